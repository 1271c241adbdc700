//! Intrinsic tensors of the induced special structure, all expressed in the
//! affine frame `(∂/∂x, ∂/∂y)` where the flat connection has vanishing
//! Christoffel symbols. Covariant derivatives are therefore plain
//! derivatives in `q = (x, y)`, estimated by [`fd::Stencil`].

pub mod conic;
pub mod fd;

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::Serialize;

use crate::charts::{chart_point, gamma_metric_affine, ChartPoint, ManifoldSpec};
use crate::error::{Error, Result};
use crate::linalg::{max_abs, symmetric_signature, Signature, Tensor3};
use crate::scalar::{lit, to_f64, Real};

pub use conic::{conic_checks, ConicReport};
pub use fd::{FdDerivative, FdResidual, Stencil};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Affine,
    Holomorphic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TensorKind {
    Endomorphism,
    Bilinear,
    Connection,
    Cubic,
}

/// Components of a tensor at a point. Rank-2 tensors have one matrix;
/// rank-3 tensors one matrix per value of the first index.
#[derive(Debug, Clone)]
pub struct TensorSample<T: Real> {
    pub z: Vec<Complex<T>>,
    pub frame: Frame,
    pub kind: TensorKind,
    pub components: Vec<DMatrix<T>>,
}

impl<T: Real> TensorSample<T> {
    pub fn matrix(z: &[Complex<T>], kind: TensorKind, m: DMatrix<T>) -> Self {
        Self { z: z.to_vec(), frame: Frame::Affine, kind, components: vec![m] }
    }

    pub fn rank3(z: &[Complex<T>], kind: TensorKind, t: Tensor3<T>) -> Self {
        Self { z: z.to_vec(), frame: Frame::Affine, kind, components: t.slices }
    }
}

/// `[[0, -I], [I, 0]]` on `(Re z, Im z)`: `J ∂/∂a = ∂/∂b`.
pub fn standard_complex_structure<T: Real>(n: usize) -> DMatrix<T> {
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        if r >= n && c == r - n {
            T::one()
        } else if r < n && c == r + n {
            -T::one()
        } else {
            T::zero()
        }
    })
}

/// `J` in the affine frame: `Jac · J_std · Jac⁻¹`.
pub fn complex_structure_affine<T: Real>(p: &ChartPoint<T>) -> DMatrix<T> {
    &p.jac * standard_complex_structure::<T>(p.n()) * &p.jac_inv
}

/// `ω = 2 Σ dx^i ∧ dy_i`, with `dx ∧ dy = dx ⊗ dy − dy ⊗ dx`.
pub fn symplectic_form_affine<T: Real>(n: usize) -> DMatrix<T> {
    let two = lit::<T>(2.0);
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        if r < n && c == r + n {
            two
        } else if r >= n && c == r - n {
            -two
        } else {
            T::zero()
        }
    })
}

/// `ρ(J·, J·)` as a matrix: `Jᵀ ρ J`.
pub fn pullback_by<T: Real>(form: &DMatrix<T>, j: &DMatrix<T>) -> DMatrix<T> {
    j.transpose() * form * j
}

#[derive(Debug, Clone)]
pub struct HodgeSplit<T: Real> {
    /// `½(ω + ω(J·, J·))`.
    pub omega11: DMatrix<T>,
    /// `ω^{20} + ω^{02} = ω − ω^{11}`.
    pub omega_prime: DMatrix<T>,
}

pub fn hodge_split<T: Real>(j: &DMatrix<T>, omega: &DMatrix<T>) -> HodgeSplit<T> {
    let omega11 = (omega + pullback_by(omega, j)) * lit::<T>(0.5);
    let omega_prime = omega - &omega11;
    HodgeSplit { omega11, omega_prime }
}

impl<T: Real> HodgeSplit<T> {
    /// Residuals of `ω¹¹(J·,J·) = ω¹¹` and `ω'(J·,J·) = −ω'`.
    pub fn type_defects(&self, j: &DMatrix<T>) -> (T, T) {
        let a = max_abs(&(pullback_by(&self.omega11, j) - &self.omega11));
        let b = max_abs(&(pullback_by(&self.omega_prime, j) + &self.omega_prime));
        (a, b)
    }
}

#[derive(Debug, Clone)]
pub struct Metric<T: Real> {
    pub g: DMatrix<T>,
    pub eigenvalues: Vec<T>,
    pub signature: Signature,
    pub degenerate: bool,
}

/// `g = ω¹¹(J·, ·)`, i.e. `Jᵀ ω¹¹`. Indefinite signatures are allowed;
/// degeneracy is flagged rather than rejected.
pub fn kaehler_metric<T: Real>(j: &DMatrix<T>, omega11: &DMatrix<T>, tol: T) -> Metric<T> {
    let g = j.transpose() * omega11;
    let (eigenvalues, signature) = symmetric_signature(&g, tol);
    Metric { degenerate: signature.zero > 0, g, eigenvalues, signature }
}

impl<T: Real> Metric<T> {
    pub fn min_abs_eigenvalue(&self) -> T {
        self.eigenvalues.iter().fold(T::max_value().unwrap(), |a, e| a.min(e.abs()))
    }

    pub fn require_nondegenerate(&self) -> Result<()> {
        if self.degenerate {
            Err(Error::Degenerate { min_abs_eigenvalue: to_f64(self.min_abs_eigenvalue()) })
        } else {
            Ok(())
        }
    }

    /// Residual of symmetry and of `g(J·, J·) = g`.
    pub fn hermitian_defect(&self, j: &DMatrix<T>) -> T {
        let sym = max_abs(&(&self.g - self.g.transpose()));
        sym.max(max_abs(&(pullback_by(&self.g, j) - &self.g)))
    }
}

/// Algebraic (derivative-free) structure at one point.
#[derive(Debug, Clone)]
pub struct PointGeometry<T: Real> {
    pub point: ChartPoint<T>,
    pub j: DMatrix<T>,
    pub omega: DMatrix<T>,
    pub split: HodgeSplit<T>,
    pub metric: Metric<T>,
    tol: T,
}

impl<T: Real> PointGeometry<T> {
    pub fn at(spec: &ManifoldSpec<T>, z: &[Complex<T>]) -> Result<Self> {
        Ok(Self::from_chart(chart_point(spec, z)?, spec.tol))
    }

    pub fn from_chart(point: ChartPoint<T>, tol: T) -> Self {
        let j = complex_structure_affine(&point);
        let omega = symplectic_form_affine(point.n());
        let split = hodge_split(&j, &omega);
        let metric = kaehler_metric(&j, &split.omega11, tol);
        Self { point, j, omega, split, metric, tol }
    }

    pub fn dim(&self) -> usize {
        2 * self.point.n()
    }

    /// `Re φ*γ` transported to the affine frame.
    pub fn gamma_metric(&self) -> DMatrix<T> {
        gamma_metric_affine(&self.point, self.tol)
    }
}

/// Finite-difference derivatives of the structure fields at a point.
#[derive(Debug, Clone)]
pub struct Derivatives<T: Real> {
    pub stencil: Stencil<T>,
    /// `(∇_μ J)^a_ν`.
    pub nabla_j: FdDerivative<T>,
    /// `∂_μ g_{νρ}`.
    pub d_metric: FdDerivative<T>,
    pub d_omega11: FdDerivative<T>,
    pub d_omega_prime: FdDerivative<T>,
}

impl<T: Real> Derivatives<T> {
    pub fn compute(spec: &ManifoldSpec<T>, geom: &PointGeometry<T>) -> Result<Self> {
        let stencil = Stencil::build(spec, &geom.point, spec.fd_step)?;
        let omega = &geom.omega;
        let tol = spec.tol;
        let nabla_j = stencil.derivative(complex_structure_affine);
        let d_metric = stencil.derivative(|c| {
            let j = complex_structure_affine(c);
            kaehler_metric(&j, &hodge_split(&j, omega).omega11, tol).g
        });
        let d_omega11 = stencil.derivative(|c| hodge_split(&complex_structure_affine(c), omega).omega11);
        let d_omega_prime = stencil.derivative(|c| hodge_split(&complex_structure_affine(c), omega).omega_prime);
        Ok(Self { stencil, nabla_j, d_metric, d_omega11, d_omega_prime })
    }
}

/// `∇J` at a chart point.
pub fn nabla_j<T: Real>(spec: &ManifoldSpec<T>, p: &ChartPoint<T>) -> Result<FdDerivative<T>> {
    Ok(Stencil::build(spec, p, spec.fd_step)?.derivative(complex_structure_affine))
}

/// `t^a_{μν} − t^a_{νμ}` for slices indexed by `μ` holding `(a, ν)`.
pub fn alternate<T: Real>(t: &Tensor3<T>) -> Tensor3<T> {
    let (d, rows, _) = t.dims();
    Tensor3::from_fn(d, rows, d, |mu, a, nu| t.get(mu, a, nu) - t.get(nu, a, mu))
}

/// `d^∇J(∂_μ, ∂_ν) = (∇_μ J)∂_ν − (∇_ν J)∂_μ`.
pub fn d_nabla_j<T: Real>(nabla_j: &Tensor3<T>) -> Tensor3<T> {
    alternate(nabla_j)
}

pub fn exp_theta_j<T: Real>(j: &DMatrix<T>, theta: T) -> DMatrix<T> {
    let id = DMatrix::<T>::identity(j.nrows(), j.ncols());
    id * theta.cos() + j * theta.sin()
}

/// `∇^θ = ∇ + A^θ` with `A^θ = −sin θ · e^{θJ} ∇J` and its torsion.
#[derive(Debug, Clone)]
pub struct ThetaFamily<T: Real> {
    pub theta: T,
    pub a_theta: Tensor3<T>,
    pub torsion: Tensor3<T>,
}

pub fn theta_connection<T: Real>(j: &DMatrix<T>, nabla_j: &Tensor3<T>, theta: T) -> ThetaFamily<T> {
    let e = exp_theta_j(j, theta) * (-theta.sin());
    let a_theta = nabla_j.map_slices(|s| &e * s);
    let torsion = alternate(&a_theta);
    ThetaFamily { theta, a_theta, torsion }
}

/// Second assembly of the torsion: `−sin θ · e^{θJ} · d^∇J`.
pub fn torsion_from_d_nabla_j<T: Real>(j: &DMatrix<T>, nabla_j: &Tensor3<T>, theta: T) -> Tensor3<T> {
    let e = exp_theta_j(j, theta) * (-theta.sin());
    d_nabla_j(nabla_j).map_slices(|s| &e * s)
}

/// `(∇^θ_μ J) = ∇_μ J + [A^θ_μ, J]`, alternated.
pub fn d_theta_j<T: Real>(j: &DMatrix<T>, nabla_j: &Tensor3<T>, family: &ThetaFamily<T>) -> Tensor3<T> {
    let cov = Tensor3 {
        slices: nabla_j.slices.iter().zip(&family.a_theta.slices).map(|(nj, a)| nj + a * j - j * a).collect(),
    };
    alternate(&cov)
}

/// Christoffel symbols of `∇^{(J)} = ∇ − J∇J`.
pub fn conjugate_connection<T: Real>(j: &DMatrix<T>, nabla_j: &Tensor3<T>) -> Tensor3<T> {
    nabla_j.map_slices(|s| -(j * s))
}

/// Christoffel symbols of `D = ½(∇ + ∇^{(J)})`.
pub fn complex_connection_d<T: Real>(j: &DMatrix<T>, nabla_j: &Tensor3<T>) -> Tensor3<T> {
    nabla_j.map_slices(|s| (j * s) * lit::<T>(-0.5))
}

/// `D_μ J = ∂_μ J + [Γ^D_μ, J]`.
pub fn d_of_j<T: Real>(j: &DMatrix<T>, nabla_j: &Tensor3<T>) -> Tensor3<T> {
    let gamma = complex_connection_d(j, nabla_j);
    Tensor3 { slices: nabla_j.slices.iter().zip(&gamma.slices).map(|(dj, g)| dj + g * j - j * g).collect() }
}

/// Levi-Civita symbols `Γ^ρ_{μν} = ½ g^{ρσ}(∂_μ g_{σν} + ∂_ν g_{σμ} − ∂_σ g_{μν})`.
pub fn levi_civita<T: Real>(g: &DMatrix<T>, dg: &Tensor3<T>) -> Result<Tensor3<T>> {
    let ginv = g.clone().try_inverse().ok_or(Error::Degenerate { min_abs_eigenvalue: 0.0 })?;
    let d = g.nrows();
    let half = lit::<T>(0.5);
    let lowered = |s: usize, mu: usize, nu: usize| half * (dg.get(mu, s, nu) + dg.get(nu, s, mu) - dg.get(s, mu, nu));
    Ok(Tensor3::from_fn(d, d, d, |mu, rho, nu| {
        (0..d).fold(T::zero(), |acc, s| acc + ginv[(rho, s)] * lowered(s, mu, nu))
    }))
}

/// `∂_μ g_{νρ} − g_{νσ} (Γ^{(J)})^σ_{μρ}`.
pub fn g_duality_defect<T: Real>(g: &DMatrix<T>, dg: &Tensor3<T>, conj: &Tensor3<T>) -> Tensor3<T> {
    Tensor3 { slices: dg.slices.iter().zip(&conj.slices).map(|(d, c)| d - g * c).collect() }
}

/// Largest deviation of a (0,3) tensor from total symmetry.
pub fn total_symmetry_defect<T: Real>(t: &Tensor3<T>) -> T {
    let (d, _, _) = t.dims();
    let mut worst = T::zero();
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                let v = t.get(a, b, c);
                for w in [t.get(b, a, c), t.get(a, c, b), t.get(c, b, a)] {
                    worst = worst.max((v - w).abs());
                }
            }
        }
    }
    worst
}

/// `max |dρ|` from the derivative slices `∂_μ ρ_{νλ}` of a 2-form.
pub fn exterior_derivative_defect<T: Real>(d_form: &Tensor3<T>) -> T {
    let (d, _, _) = d_form.dims();
    let mut worst = T::zero();
    for mu in 0..d {
        for nu in 0..d {
            for la in 0..d {
                let c = d_form.get(mu, nu, la) + d_form.get(nu, la, mu) + d_form.get(la, mu, nu);
                worst = worst.max(c.abs());
            }
        }
    }
    worst
}

/// Condition `A^ξ_X ∘ J = A^ξ_{JX}` for `A = ½ J∇J` over frame vectors `X`
/// and the given covectors `ξ`.
pub fn condition_aj_defect<T: Real>(j: &DMatrix<T>, nabla_j: &Tensor3<T>, covectors: &[Vec<T>]) -> T {
    let a = nabla_j.map_slices(|s| (j * s) * lit::<T>(0.5));
    let d = j.nrows();
    let mut worst = T::zero();
    for mu in 0..d {
        let lhs = &a.slices[mu] * j;
        let mut rhs = DMatrix::zeros(d, d);
        for k in 0..d {
            rhs += &a.slices[k] * j[(k, mu)];
        }
        let diff = lhs - rhs;
        for xi in covectors {
            for col in 0..d {
                let v = (0..d).fold(T::zero(), |acc, r| acc + xi[r] * diff[(r, col)]);
                worst = worst.max(v.abs());
            }
        }
    }
    worst
}

/// Residuals of `2g(·, J·) = ω + J*ω` and `ω = g(·, J·)` with `g = Re φ*γ`.
pub fn g_equ_identity<T: Real>(geom: &PointGeometry<T>) -> (T, T) {
    let g = geom.gamma_metric();
    let gj = &g * &geom.j;
    let rhs = &geom.omega + pullback_by(&geom.omega, &geom.j);
    let two = lit::<T>(2.0);
    (max_abs(&(&gj * two - rhs)), max_abs(&(&geom.omega - gj)))
}

#[cfg(test)]
mod tests;
