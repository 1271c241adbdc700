//! Extrinsic construction: the immersion of a holomorphic 1-form into
//! `V = T*ℂⁿ`, real special coordinates `(x, y) = (Re z, Re F)` and their
//! inversion.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{eval_jet, Expr, HoloJet};
use crate::linalg::{blocks, hermitian_signature, relative_det, Signature};
use crate::scalar::{eps, lit, to_f64, Real};

/// How the holomorphic data is given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    /// A single function `F`; the 1-form is `dF`.
    Prepotential,
    /// Components `F_1..F_n` of `Σ F_i dz^i`.
    OneForm,
}

/// Input datum: holomorphic data, sample plan and numerical parameters.
#[derive(Debug, Clone)]
pub struct ManifoldSpec<T: Real> {
    pub n: usize,
    pub kind: Kind,
    pub components: Vec<Expr>,
    pub sample_points: Vec<Vec<Complex<T>>>,
    pub fd_step: T,
    pub tol: T,
    pub conic: bool,
    /// Angles in radians.
    pub theta_samples: Vec<T>,
    pub lambda_samples: Vec<Complex<T>>,
    /// Momenta (length 2n) at which bundle checks run.
    pub fibers: Vec<Vec<T>>,
    pub expected_fail: Vec<String>,
    pub expected_skip: bool,
    /// Per-check tolerance overrides keyed by check id.
    pub tolerances: BTreeMap<String, f64>,
    pub seed: u64,
}

impl<T: Real> ManifoldSpec<T> {
    fn with(kind: Kind, n: usize, components: Vec<Expr>) -> Self {
        let deg = |d: f64| lit::<T>(d.to_radians());
        Self {
            n,
            kind,
            components,
            sample_points: Vec::new(),
            fd_step: lit(1e-5),
            tol: lit(1e-6),
            conic: false,
            theta_samples: vec![deg(30.0), deg(45.0), deg(90.0)],
            lambda_samples: Vec::new(),
            fibers: Vec::new(),
            expected_fail: Vec::new(),
            expected_skip: false,
            tolerances: BTreeMap::new(),
            seed: 0,
        }
    }

    pub fn prepotential(f: Expr) -> Self {
        let n = f.dim();
        Self::with(Kind::Prepotential, n, vec![f])
    }

    pub fn one_form(components: Vec<Expr>) -> Self {
        let n = components.len();
        Self::with(Kind::OneForm, n, components)
    }

    pub fn with_samples(mut self, samples: Vec<Vec<Complex<T>>>) -> Self {
        self.sample_points = samples;
        self
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must be rejected too
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::SpecInvalid(m));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        let want = match self.kind {
            Kind::Prepotential => 1,
            Kind::OneForm => self.n,
        };
        if self.components.len() != want {
            return bad(format!("expected {want} component expression(s), got {}", self.components.len()));
        }
        if let Some(e) = self.components.iter().find(|e| e.dim() != self.n) {
            return bad(format!("component declared for n = {} but spec has n = {}", e.dim(), self.n));
        }
        if let Some((k, _)) = self.sample_points.iter().enumerate().find(|(_, z)| z.len() != self.n) {
            return bad(format!("sample point {k} does not have {} coordinates", self.n));
        }
        if let Some((k, _)) = self.fibers.iter().enumerate().find(|(_, p)| p.len() != 2 * self.n) {
            return bad(format!("fiber {k} does not have {} momenta", 2 * self.n));
        }
        if !(self.fd_step > T::zero()) {
            return bad("fd_step must be positive".into());
        }
        if !(self.tol > T::zero()) {
            return bad("tol must be positive".into());
        }
        if self.lambda_samples.iter().any(|l| l.norm_sqr() == T::zero()) {
            return bad("lambda samples must be nonzero".into());
        }
        Ok(())
    }

    /// Jets of the 1-form components `F_i` through `order` (at most 2 for prepotentials).
    pub fn component_jets(&self, z: &[Complex<T>], order: usize) -> Result<Vec<HoloJet<T>>> {
        match self.kind {
            Kind::Prepotential => {
                let f = eval_jet(&self.components[0], z, order + 1)?;
                Ok((0..self.n).map(|i| f.partial(i)).collect())
            }
            Kind::OneForm => self.components.iter().map(|e| eval_jet(e, z, order).map_err(Error::from)).collect(),
        }
    }
}

/// `V = T*ℂⁿ` with its complex symplectic form, real structure and Hermitian form.
#[derive(Debug, Clone)]
pub struct AmbientSpace<T: Real> {
    pub n: usize,
    /// `Ω(u, v) = uᵀ Ω v`.
    pub omega: DMatrix<Complex<T>>,
    /// `γ(u, v) = vᴴ G u` with `γ = √−1 Ω(·, τ·)`.
    pub gamma: DMatrix<Complex<T>>,
}

impl<T: Real> AmbientSpace<T> {
    pub fn new(n: usize) -> Self {
        let one = Complex::new(T::one(), T::zero());
        let i = Complex::new(T::zero(), T::one());
        let mut omega = DMatrix::zeros(2 * n, 2 * n);
        for k in 0..n {
            omega[(k, n + k)] = one;
            omega[(n + k, k)] = -one;
        }
        let gamma = omega.transpose() * i;
        Self { n, omega, gamma }
    }

    /// Component-wise conjugation.
    pub fn tau(&self, u: &[Complex<T>]) -> Vec<Complex<T>> {
        u.iter().map(|c| c.conj()).collect()
    }

    pub fn gamma_signature(&self) -> Signature {
        hermitian_signature(&self.gamma, lit(1e-12)).1
    }
}

/// `(z, F_1(z), .., F_n(z)) ∈ V`.
pub fn immersion_phi<T: Real>(spec: &ManifoldSpec<T>, z: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    let jets = spec.component_jets(z, 0)?;
    Ok(z.iter().copied().chain(jets.iter().map(|j| j.value())).collect())
}

/// `M_ij = ∂F_i/∂z^j` from component jets.
pub fn differential<T: Real>(jets: &[HoloJet<T>]) -> DMatrix<Complex<T>> {
    let n = jets.len();
    DMatrix::from_fn(n, n, |i, j| jets[i].grad(j))
}

#[derive(Debug, Clone)]
pub struct Regularity<T: Real> {
    /// `Im ∂F_i/∂z^j`.
    pub matrix: DMatrix<T>,
    pub det: T,
    /// Product of row norms.
    pub scale: T,
    pub invertible: bool,
}

fn regularity_of<T: Real>(m: &DMatrix<Complex<T>>, tol: T) -> Regularity<T> {
    let matrix = m.map(|c| c.im);
    let (det, scale) = relative_det(&matrix);
    let invertible = det.abs() > tol * scale;
    Regularity { matrix, det, scale, invertible }
}

pub fn regularity_matrix<T: Real>(spec: &ManifoldSpec<T>, z: &[Complex<T>]) -> Result<Regularity<T>> {
    let jets = spec.component_jets(z, 1)?;
    Ok(regularity_of(&differential(&jets), spec.tol))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lagrangian<T: Real> {
    pub lagrangian: bool,
    /// `max_{i<j} |∂F_i/∂z^j − ∂F_j/∂z^i|`.
    pub residual: T,
}

pub fn lagrangian_of<T: Real>(m: &DMatrix<Complex<T>>, tol: T) -> Lagrangian<T> {
    let n = m.nrows();
    let mut residual = T::zero();
    for i in 0..n {
        for j in i + 1..n {
            let d = m[(i, j)] - m[(j, i)];
            residual = residual.max(d.norm_sqr().sqrt());
        }
    }
    Lagrangian { lagrangian: residual <= tol, residual }
}

pub fn is_lagrangian<T: Real>(spec: &ManifoldSpec<T>, z: &[Complex<T>]) -> Result<Lagrangian<T>> {
    if spec.kind == Kind::Prepotential {
        return Ok(Lagrangian { lagrangian: true, residual: T::zero() });
    }
    let jets = spec.component_jets(z, 1)?;
    Ok(lagrangian_of(&differential(&jets), spec.tol))
}

/// A regular point with its special coordinates and chart Jacobian.
#[derive(Debug, Clone)]
pub struct ChartPoint<T: Real> {
    pub z: Vec<Complex<T>>,
    /// Component jets `F_i`, order 2.
    pub jets: Vec<HoloJet<T>>,
    /// `∂F_i/∂z^j`.
    pub differential: DMatrix<Complex<T>>,
    pub x: DVector<T>,
    pub y: DVector<T>,
    /// `∂(x, y)/∂(Re z, Im z)`.
    pub jac: DMatrix<T>,
    pub jac_inv: DMatrix<T>,
}

impl<T: Real> ChartPoint<T> {
    pub fn n(&self) -> usize {
        self.z.len()
    }

    /// Affine coordinates `q = (x, y)`.
    pub fn q(&self) -> DVector<T> {
        let n = self.n();
        DVector::from_fn(2 * n, |k, _| if k < n { self.x[k] } else { self.y[k - n] })
    }
}

pub fn chart_point<T: Real>(spec: &ManifoldSpec<T>, z: &[Complex<T>]) -> Result<ChartPoint<T>> {
    let n = spec.n;
    let jets = spec.component_jets(z, 2)?;
    let m = differential(&jets);
    let reg = regularity_of(&m, spec.tol);
    if !reg.invertible {
        return Err(Error::NotRegular { det: to_f64(reg.det), threshold: to_f64(spec.tol * reg.scale) });
    }
    let im_inv = reg.matrix.clone().try_inverse().ok_or(Error::NotRegular { det: to_f64(reg.det), threshold: 0.0 })?;
    let re = m.map(|c| c.re);
    let id = DMatrix::<T>::identity(n, n);
    let zero = DMatrix::<T>::zeros(n, n);
    let jac = blocks(&id, &zero, &re, &(-&reg.matrix));
    let jac_inv = blocks(&id, &zero, &(&im_inv * &re), &(-&im_inv));
    Ok(ChartPoint {
        z: z.to_vec(),
        x: DVector::from_iterator(n, z.iter().map(|c| c.re)),
        y: DVector::from_iterator(n, jets.iter().map(|j| j.value().re)),
        jets,
        differential: m,
        jac,
        jac_inv,
    })
}

const NEWTON_MAX_ITER: usize = 50;
const NEWTON_BLOWUP: f64 = 1e6;

fn chart_residual<T: Real>(spec: &ManifoldSpec<T>, z: &[Complex<T>], target: &DVector<T>) -> Option<DVector<T>> {
    let n = spec.n;
    let jets = spec.component_jets(z, 0).ok()?;
    Some(DVector::from_fn(2 * n, |k, _| if k < n { z[k].re - target[k] } else { jets[k - n].value().re - target[k] }))
}

fn inf_norm<T: Real>(v: &DVector<T>) -> T {
    v.iter().fold(T::zero(), |a, x| a.max(x.abs()))
}

/// Solves `(Re z, Re F(z)) = target` for `z` by damped Newton iteration
/// starting from `z0`. `target` stacks `x` then `y`.
pub fn invert_special_coordinates<T: Real>(
    spec: &ManifoldSpec<T>,
    target: &DVector<T>,
    z0: &[Complex<T>],
) -> Result<Vec<Complex<T>>> {
    let n = spec.n;
    let goal = lit::<T>(1e-10).max(lit::<T>(100.0) * eps::<T>() * (T::one() + inf_norm(target)));
    let mut z = z0.to_vec();
    let mut r = chart_residual(spec, &z, target).ok_or(Error::StepTooLarge)?;
    let mut rn = inf_norm(&r);
    let mut converged_at = None;
    for it in 0..NEWTON_MAX_ITER {
        if rn <= goal && converged_at.is_none() {
            converged_at = Some(it);
        }
        // a couple of polishing steps after convergence, while they still help
        if let Some(c) = converged_at {
            if it >= c + 2 || rn == T::zero() {
                return Ok(z);
            }
        }
        let p = chart_point(spec, &z)?;
        let step = -(&p.jac_inv * &r);
        let mut t = T::one();
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<Complex<T>> = (0..n).map(|k| z[k] + Complex::new(t * step[k], t * step[n + k])).collect();
            if let Some(tr) = chart_residual(spec, &trial, target) {
                let tn = inf_norm(&tr);
                if tn < rn {
                    z = trial;
                    r = tr;
                    rn = tn;
                    accepted = true;
                    break;
                }
            }
            t *= lit(0.5);
        }
        if !accepted {
            if converged_at.is_some() {
                return Ok(z);
            }
            return Err(Error::NewtonDiverged { iterations: it + 1, residual: to_f64(rn) });
        }
        if rn > lit(NEWTON_BLOWUP) {
            return Err(Error::NewtonDiverged { iterations: it + 1, residual: to_f64(rn) });
        }
    }
    if rn <= goal {
        Ok(z)
    } else {
        Err(Error::NewtonDiverged { iterations: NEWTON_MAX_ITER, residual: to_f64(rn) })
    }
}

/// Chart point at affine coordinates `center.q() + dq`, found by Newton from `center.z`.
pub fn chart_point_near<T: Real>(
    spec: &ManifoldSpec<T>,
    center: &ChartPoint<T>,
    dq: &DVector<T>,
) -> Result<ChartPoint<T>> {
    let target = center.q() + dq;
    let z = invert_special_coordinates(spec, &target, &center.z).map_err(|e| match e {
        Error::NotRegular { .. } | Error::Eval(_) => Error::StepTooLarge,
        other => other,
    })?;
    chart_point(spec, &z).map_err(|e| match e {
        Error::NotRegular { .. } | Error::Eval(_) => Error::StepTooLarge,
        other => other,
    })
}

/// Pull-back of `γ` to the holomorphic frame `∂/∂z^j`.
#[derive(Debug, Clone)]
pub struct GammaPullback<T: Real> {
    /// `dφᴴ G dφ`; Hermitian.
    pub matrix: DMatrix<Complex<T>>,
    pub eigenvalues: Vec<T>,
    pub signature: Signature,
    pub nondegenerate: bool,
}

pub fn gamma_pullback_of<T: Real>(m: &DMatrix<Complex<T>>, tol: T) -> GammaPullback<T> {
    let n = m.nrows();
    let amb = AmbientSpace::<T>::new(n);
    let mut dphi = DMatrix::zeros(2 * n, n);
    dphi.view_mut((0, 0), (n, n)).fill_with_identity();
    dphi.view_mut((n, 0), (n, n)).copy_from(m);
    let matrix = dphi.adjoint() * &amb.gamma * &dphi;
    let (eigenvalues, signature) = hermitian_signature(&matrix, tol);
    GammaPullback { matrix, eigenvalues, nondegenerate: signature.zero == 0, signature }
}

/// `φ*γ` at `z`. Needs only the differential, so it is defined at
/// non-regular points too; nondegeneracy is part of the output.
pub fn gamma_pullback<T: Real>(spec: &ManifoldSpec<T>, z: &[Complex<T>]) -> Result<GammaPullback<T>> {
    let jets = spec.component_jets(z, 1)?;
    Ok(gamma_pullback_of(&differential(&jets), spec.tol))
}

/// `Re φ*γ` as a real bilinear form in the affine frame `(∂x, ∂y)`.
pub fn gamma_metric_affine<T: Real>(p: &ChartPoint<T>, tol: T) -> DMatrix<T> {
    let pb = gamma_pullback_of(&p.differential, tol);
    // g(X, Y) = Re(v_Yᴴ P v_X) with v = δa + iδb; in (a, b) this is [[A, -B], [B, A]]
    let a = pb.matrix.map(|c| c.re);
    let b = pb.matrix.map(|c| c.im);
    let g_ab = blocks(&a, &(-&b), &b, &a);
    p.jac_inv.transpose() * g_ab * &p.jac_inv
}
