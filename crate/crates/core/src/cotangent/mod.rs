//! Structures on `N = T*M` in induced coordinates `(q, p)`, where `q = (x, y)`
//! are the affine coordinates of the base and `p` the conjugate momenta.
//! Every matrix here is `4n × 4n`, ordered `(q, p)`.

use std::cell::RefCell;
use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::charts::{chart_point_near, ChartPoint, ManifoldSpec};
use crate::error::{Error, Result};
use crate::geometry::{
    complex_structure_affine, hodge_split, kaehler_metric, symplectic_form_affine, FdDerivative, FdResidual,
    PointGeometry, Stencil,
};
use crate::linalg::{blocks, max_abs, relative_det, Tensor3};
use crate::scalar::{lit, Real};

/// Which 2-form defines `J₂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormChoice {
    Full,
    Omega11,
    OmegaPrime,
}

impl FormChoice {
    pub const ALL: [FormChoice; 3] = [FormChoice::Full, FormChoice::Omega11, FormChoice::OmegaPrime];

    pub fn label(self) -> &'static str {
        match self {
            FormChoice::Full => "omega",
            FormChoice::Omega11 => "omega11",
            FormChoice::OmegaPrime => "omegaprime",
        }
    }
}

/// An endomorphism field on `N` determined by the base point alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    J1,
    J2(FormChoice),
}

/// A covector `ξ = Σ p_μ dq^μ` over a base point.
#[derive(Debug, Clone)]
pub struct BundlePoint<T: Real> {
    pub base: PointGeometry<T>,
    pub p: DVector<T>,
}

impl<T: Real> BundlePoint<T> {
    pub fn new(base: PointGeometry<T>, p: DVector<T>) -> Self {
        assert_eq!(p.len(), base.dim(), "fiber coordinate has wrong length");
        Self { base, p }
    }

    pub fn n(&self) -> usize {
        self.base.point.n()
    }

    pub fn dim(&self) -> usize {
        2 * self.base.dim()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BundleEndomorphism<T: Real> {
    pub matrix: DMatrix<T>,
}

impl<T: Real> BundleEndomorphism<T> {
    /// Block `(r, c)` of the splitting `H ⊕ T^v`, `r, c ∈ {0, 1}`.
    pub fn block(&self, r: usize, c: usize) -> DMatrix<T> {
        let d = self.matrix.nrows() / 2;
        self.matrix.view((r * d, c * d), (d, d)).into_owned()
    }

    /// `max |J² − sign·I|`.
    pub fn square_defect(&self, sign: T) -> T {
        let d = self.matrix.nrows();
        max_abs(&(&self.matrix * &self.matrix - DMatrix::<T>::identity(d, d) * sign))
    }
}

/// Index ranges of `H^∇ = span ∂/∂q` and `T^v = span ∂/∂p`. The connection
/// is flat with affine coordinates `q`, so the splitting is the coordinate one
/// at every covector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HorizontalFrame {
    pub horizontal: Range<usize>,
    pub vertical: Range<usize>,
}

pub fn horizontal_frame<T: Real>(xi: &BundlePoint<T>) -> HorizontalFrame {
    let d = xi.base.dim();
    HorizontalFrame { horizontal: 0..d, vertical: d..2 * d }
}

/// Horizontal lift for the connection `∇ + A` written as the matrix
/// `[[I, 0], [K, I]]` with `K e_μ = A_μᵀ ξ`.
pub fn horizontal_lift<T: Real>(xi: &BundlePoint<T>, a: &Tensor3<T>) -> DMatrix<T> {
    let d = xi.base.dim();
    let mut k = DMatrix::zeros(d, d);
    for mu in 0..d {
        k.set_column(mu, &(a.slices[mu].transpose() * &xi.p));
    }
    blocks(&DMatrix::identity(d, d), &DMatrix::zeros(d, d), &k, &DMatrix::identity(d, d))
}

/// The almost complex structure that is `J` on the horizontal space of
/// `∇ + A` and `J*` on the fibres.
pub fn induced_structure<T: Real>(xi: &BundlePoint<T>, a: &Tensor3<T>) -> DMatrix<T> {
    let lift = horizontal_lift(xi, a);
    let inv = lift.clone().try_inverse().expect("unipotent matrix");
    lift * j1_matrix(&xi.base.j) * inv
}

fn j1_matrix<T: Real>(j: &DMatrix<T>) -> DMatrix<T> {
    let d = j.nrows();
    blocks(j, &DMatrix::zeros(d, d), &DMatrix::zeros(d, d), &j.transpose())
}

/// `J₁ = [[J, 0], [0, J*]]` with `(J*η)(X) = η(JX)`, i.e. `J*` is `Jᵀ`.
pub fn j1_at<T: Real>(xi: &BundlePoint<T>) -> BundleEndomorphism<T> {
    BundleEndomorphism { matrix: j1_matrix(&xi.base.j) }
}

fn form_from<T: Real>(j: &DMatrix<T>, choice: FormChoice) -> DMatrix<T> {
    let omega = symplectic_form_affine(j.nrows() / 2);
    match choice {
        FormChoice::Full => omega,
        FormChoice::Omega11 => hodge_split(j, &omega).omega11,
        FormChoice::OmegaPrime => hodge_split(j, &omega).omega_prime,
    }
}

/// The chosen 2-form at a base point.
pub fn form_at<T: Real>(base: &PointGeometry<T>, choice: FormChoice) -> DMatrix<T> {
    match choice {
        FormChoice::Full => base.omega.clone(),
        FormChoice::Omega11 => base.split.omega11.clone(),
        FormChoice::OmegaPrime => base.split.omega_prime.clone(),
    }
}

/// Flat map `v ↦ ρ(v, ·)` as a matrix (`ρᵀ`) and its inverse. A form counts
/// as degenerate when it is singular relative to its own rows, or negligible
/// next to `ω` (entries ±2), which catches round-off remnants of `ω'`.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn flat_pair<T: Real>(rho: &DMatrix<T>, tol: T) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let (det, scale) = relative_det(rho);
    if !(det.abs() > tol * scale) || !(max_abs(rho) > tol * lit::<T>(2.0)) {
        return Err(Error::DegenerateForm);
    }
    let r = rho.transpose();
    let s = r.clone().try_inverse().ok_or(Error::DegenerateForm)?;
    Ok((r, s))
}

fn j2_matrix<T: Real>(rho: &DMatrix<T>, tol: T) -> Result<DMatrix<T>> {
    let (r, s) = flat_pair(rho, tol)?;
    let d = r.nrows();
    Ok(blocks(&DMatrix::zeros(d, d), &(-s), &r, &DMatrix::zeros(d, d)))
}

/// `J₂ = [[0, −ρ♭⁻¹], [ρ♭, 0]]` with the flat map `ρ♭ = ρᵀ`.
pub fn j2_at<T: Real>(xi: &BundlePoint<T>, choice: FormChoice, tol: T) -> Result<BundleEndomorphism<T>> {
    Ok(BundleEndomorphism { matrix: j2_matrix(&form_at(&xi.base, choice), tol)? })
}

fn structure_matrix<T: Real>(base: &ChartPoint<T>, s: Structure, tol: T) -> Result<DMatrix<T>> {
    let j = complex_structure_affine(base);
    match s {
        Structure::J1 => Ok(j1_matrix(&j)),
        Structure::J2(choice) => j2_matrix(&form_from(&j, choice), tol),
    }
}

/// `g_N = diag(g, g⁻¹)`.
pub fn g_n_at<T: Real>(xi: &BundlePoint<T>) -> Result<DMatrix<T>> {
    let m = &xi.base.metric;
    m.require_nondegenerate()?;
    let inv = m.g.clone().try_inverse().ok_or(Error::Degenerate { min_abs_eigenvalue: 0.0 })?;
    let d = m.g.nrows();
    Ok(blocks(&m.g, &DMatrix::zeros(d, d), &DMatrix::zeros(d, d), &inv))
}

/// `max |g_N(J·, J·) − g_N|`.
pub fn orthogonality_defect<T: Real>(g_n: &DMatrix<T>, j: &BundleEndomorphism<T>) -> T {
    max_abs(&(j.matrix.transpose() * g_n * &j.matrix - g_n))
}

fn anticommutator<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    a * b + b * a
}

fn commutator<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    a * b - b * a
}

/// Residuals of the hyper-Hermitian relations with `ρ = ω¹¹`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuaternionRelations<T: Real> {
    pub j1_square: T,
    pub j2_square: T,
    pub anticommutator: T,
    pub j3_square: T,
    /// `J₁J₂ + J₂J₁` measured as `J₃ − (−J₂J₁)`.
    pub j3_sign: T,
}

impl<T: Real> QuaternionRelations<T> {
    pub fn max(&self) -> T {
        [self.j2_square, self.anticommutator, self.j3_square, self.j3_sign]
            .into_iter()
            .fold(self.j1_square, |a, b| a.max(b))
    }
}

pub fn quaternion_relations<T: Real>(xi: &BundlePoint<T>, tol: T) -> Result<QuaternionRelations<T>> {
    let j1 = j1_at(xi);
    let j2 = j2_at(xi, FormChoice::Omega11, tol)?;
    let j3 = BundleEndomorphism { matrix: &j1.matrix * &j2.matrix };
    Ok(QuaternionRelations {
        j1_square: j1.square_defect(-T::one()),
        j2_square: j2.square_defect(-T::one()),
        anticommutator: max_abs(&anticommutator(&j1.matrix, &j2.matrix)),
        j3_square: j3.square_defect(-T::one()),
        j3_sign: max_abs(&(&j3.matrix + &j2.matrix * &j1.matrix)),
    })
}

/// Residuals of the para-hypercomplex relations with `ρ = ω'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParaRelations<T: Real> {
    pub commutator: T,
    pub j2_square: T,
    /// `max |J₃² − I|`.
    pub j3_involution: T,
}

impl<T: Real> ParaRelations<T> {
    pub fn max(&self) -> T {
        self.commutator.max(self.j2_square).max(self.j3_involution)
    }
}

pub fn para_relations<T: Real>(xi: &BundlePoint<T>, tol: T) -> Result<ParaRelations<T>> {
    let j1 = j1_at(xi);
    let j2 = j2_at(xi, FormChoice::OmegaPrime, tol)?;
    let j3 = BundleEndomorphism { matrix: &j1.matrix * &j2.matrix };
    Ok(ParaRelations {
        commutator: max_abs(&commutator(&j1.matrix, &j2.matrix)),
        j2_square: j2.square_defect(-T::one()),
        j3_involution: j3.square_defect(T::one()),
    })
}

/// Commutator and anticommutator of `J₁` and `J₂(ω)` against
/// `2J₁[[0, −(ω⁻¹)¹¹], [ω¹¹, 0]]` and `2J₁[[0, −(ω⁻¹)'], [ω', 0]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorBlocks<T: Real> {
    pub commutator: T,
    pub anticommutator: T,
}

pub fn commutator_blocks<T: Real>(xi: &BundlePoint<T>, tol: T) -> Result<CommutatorBlocks<T>> {
    let j = &xi.base.j;
    let d = j.nrows();
    let (_, s) = flat_pair(&xi.base.omega, tol)?;
    let half = lit::<T>(0.5);
    let jsj = j * &s * j.transpose();
    let s11 = (&s + &jsj) * half;
    let s_prime = (&s - &jsj) * half;
    let r11 = xi.base.split.omega11.transpose();
    let r_prime = xi.base.split.omega_prime.transpose();
    let j1 = j1_matrix(j);
    let j2 = j2_matrix(&xi.base.omega, tol)?;
    let zero = DMatrix::zeros(d, d);
    let two = lit::<T>(2.0);
    let want_comm = &j1 * blocks(&zero, &(-s11), &r11, &zero) * two;
    let want_anti = &j1 * blocks(&zero, &(-s_prime), &r_prime, &zero) * two;
    Ok(CommutatorBlocks {
        commutator: max_abs(&(commutator(&j1, &j2) - want_comm)),
        anticommutator: max_abs(&(anticommutator(&j1, &j2) - want_anti)),
    })
}

/// Derivative of a base-dependent matrix field along the `q` part of `w`,
/// at steps `h` and `h/2`.
fn directional<T: Real>(
    spec: &ManifoldSpec<T>,
    center: &ChartPoint<T>,
    field: &impl Fn(&ChartPoint<T>) -> Result<DMatrix<T>>,
    w: &DVector<T>,
    h: T,
    size: usize,
) -> Result<[DMatrix<T>; 2]> {
    let d = 2 * center.n();
    let wq = w.rows(0, d).into_owned();
    if wq.iter().all(|v| *v == T::zero()) {
        return Ok([DMatrix::zeros(size, size), DMatrix::zeros(size, size)]);
    }
    let at = |t: T| -> Result<DMatrix<T>> {
        let plus = chart_point_near(spec, center, &(&wq * t))?;
        let minus = chart_point_near(spec, center, &(&wq * (-t)))?;
        Ok((field(&plus)? - field(&minus)?) / (t + t))
    };
    Ok([at(h)?, at(h * lit(0.5))?])
}

/// `N_J(e_a, e_c) = [Je_a, Je_c] − J[Je_a, e_c] − J[e_a, Je_c] + J²[e_a, e_c]` for
/// all coordinate pairs, with brackets of the constantly extended frame from
/// directional central differences. Slice `a`, column `c` holds `N(e_a, e_c)`.
pub fn nijenhuis<T: Real>(
    spec: &ManifoldSpec<T>,
    xi: &BundlePoint<T>,
    structure: Structure,
    h: T,
) -> Result<FdDerivative<T>> {
    let tol = spec.tol;
    let field = |c: &ChartPoint<T>| structure_matrix(c, structure, tol);
    let center = &xi.base.point;
    let jm = field(center)?;
    let dim = jm.nrows();
    let basis = |a: usize| DVector::from_fn(dim, |k, _| if k == a { T::one() } else { T::zero() });
    // dJ along e_a and along J e_a, both levels
    let mut along_e = Vec::with_capacity(dim);
    let mut along_je = Vec::with_capacity(dim);
    for a in 0..dim {
        along_e.push(directional(spec, center, &field, &basis(a), h, dim)?);
        along_je.push(directional(spec, center, &field, &jm.column(a).into_owned(), h, dim)?);
    }
    let level = |l: usize| Tensor3 {
        slices: (0..dim)
            .map(|a| {
                let mut out = DMatrix::zeros(dim, dim);
                for c in 0..dim {
                    let n = along_je[a][l].column(c) - along_je[c][l].column(a) + &jm * along_e[c][l].column(a)
                        - &jm * along_e[a][l].column(c);
                    out.set_column(c, &n);
                }
                out
            })
            .collect(),
    };
    Ok(FdDerivative::from_levels(h, level(0), level(1), max_abs(&jm)))
}

/// Finite-difference Nijenhuis tensor of `J₂(ρ)` on base directions against
/// the closed form `J₂N(∂_{q^i}, ∂_{q^j}) = Σ_k (ρ_{jk,i} − ρ_{ik,j}) ∂_{p_k}`.
#[derive(Debug, Clone)]
pub struct NijenhuisComparison<T: Real> {
    pub nijenhuis: FdDerivative<T>,
    /// `∂_μ ρ` on the base.
    pub d_rho: FdDerivative<T>,
    /// Largest component of `N` (extrapolated).
    pub max_component: T,
    /// Largest closed-form coefficient.
    pub closed_form_max: T,
    pub discrepancy: FdResidual<T>,
}

fn closed_form_defect<T: Real>(j2: &DMatrix<T>, n: &Tensor3<T>, d_rho: &Tensor3<T>) -> T {
    let d = d_rho.slices.len();
    let mut worst = T::zero();
    for i in 0..d {
        for jj in 0..d {
            let jn = j2 * n.slices[i].column(jj);
            for k in 0..2 * d {
                let want = if k < d { T::zero() } else { d_rho.get(i, jj, k - d) - d_rho.get(jj, i, k - d) };
                worst = worst.max((jn[k] - want).abs());
            }
        }
    }
    worst
}

pub fn nijenhuis_closed_form<T: Real>(
    spec: &ManifoldSpec<T>,
    xi: &BundlePoint<T>,
    choice: FormChoice,
    h: T,
) -> Result<NijenhuisComparison<T>> {
    let j2 = j2_at(xi, choice, spec.tol)?.matrix;
    let nijenhuis = nijenhuis(spec, xi, Structure::J2(choice), h)?;
    let stencil = Stencil::build(spec, &xi.base.point, h)?;
    let d_rho = stencil.derivative(|c| form_from(&complex_structure_affine(c), choice));
    let d = xi.base.dim();
    let closed_form_max = (0..d)
        .flat_map(|i| (0..d).flat_map(move |j| (0..d).map(move |k| (i, j, k))))
        .fold(T::zero(), |a, (i, j, k)| {
            a.max((d_rho.extrapolated.get(i, j, k) - d_rho.extrapolated.get(j, i, k)).abs())
        });
    let discrepancy = FdResidual::new(
        closed_form_defect(&j2, &nijenhuis.coarse, &d_rho.coarse),
        closed_form_defect(&j2, &nijenhuis.fine, &d_rho.fine),
        closed_form_defect(&j2, &nijenhuis.extrapolated, &d_rho.extrapolated),
        nijenhuis.noise.max(d_rho.noise) * max_abs(&j2).max(T::one()),
    );
    Ok(NijenhuisComparison {
        max_component: nijenhuis.extrapolated.max_abs(),
        nijenhuis,
        d_rho,
        closed_form_max,
        discrepancy,
    })
}

/// `ω_α = g_N J_α` (so `ω_α(X, Y) = g_N(X, J_α Y)`), with skewness and
/// closedness residuals. The forms depend on the base point only, so
/// derivatives along `p` vanish identically.
#[derive(Debug, Clone)]
pub struct OmegaForms<T: Real> {
    pub forms: [DMatrix<T>; 3],
    pub skew: [T; 3],
    pub closedness: [FdResidual<T>; 3],
    /// `max |∂_q ω¹¹|`; `ω₁` is closed exactly when this vanishes.
    pub nabla_omega11: T,
}

fn omega_forms_from<T: Real>(base: &ChartPoint<T>, tol: T) -> Result<[DMatrix<T>; 3]> {
    let j = complex_structure_affine(base);
    let omega = symplectic_form_affine(base.n());
    let omega11 = hodge_split(&j, &omega).omega11;
    let metric = kaehler_metric(&j, &omega11, tol);
    metric.require_nondegenerate()?;
    let d = j.nrows();
    let ginv = metric.g.clone().try_inverse().ok_or(Error::Degenerate { min_abs_eigenvalue: 0.0 })?;
    let g_n = blocks(&metric.g, &DMatrix::zeros(d, d), &DMatrix::zeros(d, d), &ginv);
    let j1 = j1_matrix(&j);
    let j2 = j2_matrix(&omega11, tol)?;
    let j3 = &j1 * &j2;
    Ok([&g_n * j1, &g_n * j2, &g_n * j3])
}

fn pad_to_bundle<T: Real>(t: &Tensor3<T>) -> Tensor3<T> {
    let (d, rows, cols) = t.dims();
    let mut slices = t.slices.clone();
    slices.extend((0..d).map(|_| DMatrix::zeros(rows, cols)));
    Tensor3 { slices }
}

pub fn omega_alpha_forms<T: Real>(spec: &ManifoldSpec<T>, xi: &BundlePoint<T>) -> Result<OmegaForms<T>> {
    let tol = spec.tol;
    let forms = omega_forms_from(&xi.base.point, tol)?;
    let skew = [0, 1, 2].map(|a| max_abs(&(&forms[a] + forms[a].transpose())));
    let stencil = Stencil::build(spec, &xi.base.point, spec.fd_step)?;
    // neighbours are regular, but ω¹¹ may degenerate there
    let mut closedness = [FdResidual::exact(); 3];
    for (a, slot) in closedness.iter_mut().enumerate() {
        let failure = RefCell::new(None);
        let d = stencil.derivative(|c| {
            omega_forms_from(c, tol).map(|f| f[a].clone()).unwrap_or_else(|e| {
                *failure.borrow_mut() = Some(e);
                forms[a].clone()
            })
        });
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let padded =
            FdDerivative::from_levels(d.h, pad_to_bundle(&d.coarse), pad_to_bundle(&d.fine), max_abs(&forms[a]));
        *slot = padded.residual(T::one(), crate::geometry::exterior_derivative_defect);
    }
    let d11 = stencil.derivative(|c| hodge_split(&complex_structure_affine(c), &symplectic_form_affine(c.n())).omega11);
    Ok(OmegaForms { forms, skew, closedness, nabla_omega11: d11.extrapolated.max_abs() })
}
