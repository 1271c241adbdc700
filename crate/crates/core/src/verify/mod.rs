//! Runs the check registry over a spec's sample plan and assembles a report.

mod registry;
mod report;

use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use nalgebra::{DMatrix, DVector};
use num_complex::{Complex, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::charts::{lagrangian_of, AmbientSpace, Kind, ManifoldSpec};
use crate::cotangent::{
    commutator_blocks, g_n_at, induced_structure, j1_at, j2_at, nijenhuis, nijenhuis_closed_form, omega_alpha_forms,
    orthogonality_defect, para_relations, quaternion_relations, BundlePoint, FormChoice, NijenhuisComparison,
    Structure,
};
use crate::error::{Error, Result};
use crate::geometry::{
    alternate, complex_connection_d, condition_aj_defect, conic_checks, conjugate_connection, d_nabla_j, d_of_j,
    d_theta_j, exterior_derivative_defect, g_duality_defect, g_equ_identity, levi_civita, theta_connection,
    torsion_from_d_nabla_j, total_symmetry_defect, Derivatives, FdDerivative, FdResidual, PointGeometry,
};
use crate::linalg::{max_abs, max_abs_complex, Tensor3};
use crate::scalar::{cast_complex, lit, to_f64, Real};

pub use registry::{descriptor, registry, Applies, CheckDescriptor, Scope};
pub use report::{num, Aggregate, CheckResult, SkipReason, SpecEcho, Status, Summary, VerificationReport};

/// Sign and ordering conventions, recorded in every report.
pub const CONVENTIONS: &[(&str, &str)] = &[
    ("frame", "tensors are given in the affine frame (∂/∂x, ∂/∂y) with x = Re z, y = Re F"),
    ("bilinear_matrix", "B(X, Y) = Xᵀ B Y"),
    ("wedge", "dx∧dy = dx⊗dy − dy⊗dx, so ω = 2 Σ dx^i∧dy_i has ω(∂x^i, ∂y_j) = 2δ"),
    ("complex_structure", "J ∂/∂Re z = ∂/∂Im z"),
    ("metric", "g = ω¹¹(J·, ·) = Jᵀω¹¹; with it ω¹¹ = g(·, J·) holds with a plus sign"),
    ("covector_action", "(J*η)(X) = η(JX), i.e. J* acts by Jᵀ"),
    ("flat_map", "ρ♭(v) = ρ(v, ·) with matrix ρᵀ; J₂ = [[0, −ρ♭⁻¹], [ρ♭, 0]]"),
    ("kaehler_forms", "ω_α(X, Y) = g_N(X, J_α Y), g_N = diag(g, g⁻¹)"),
    ("nijenhuis", "N(X, Y) = [JX, JY] − J[JX, Y] − J[X, JY] + J²[X, Y]"),
    (
        "finite_differences",
        "central differences at h and h/2; pass/fail uses the Richardson extrapolation; \
         convergence_ratio = r(h)/r(h/2), null when r(h) is at round-off level",
    ),
    ("angles", "theta_samples are echoed in degrees"),
];

/// Scaling factors used when none are configured.
pub fn default_lambdas() -> Vec<Complex64> {
    vec![Complex64::new(2.0, 0.0), Complex64::new(1.0, 1.0), Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]
}

const AJ_COVECTORS: usize = 20;

fn skip_reason(e: &Error) -> SkipReason {
    match e {
        Error::NewtonDiverged { .. } | Error::StepTooLarge => SkipReason::NewtonDiverged,
        Error::Degenerate { .. } | Error::DegenerateForm => SkipReason::DegenerateForm,
        _ => SkipReason::NotRegular,
    }
}

/// A computed residual, or why there is none.
enum Outcome {
    Value { residual: f64, ratio: Option<f64>, tolerance: Option<f64> },
    Skip(SkipReason),
}

impl Outcome {
    fn exact<T: Real>(r: T) -> Self {
        Outcome::Value { residual: to_f64(r), ratio: None, tolerance: None }
    }

    fn fd<T: Real>(r: &FdResidual<T>) -> Self {
        Outcome::Value { residual: to_f64(r.value()), ratio: r.ratio.map(to_f64), tolerance: None }
    }

    fn from_result<V>(r: &Result<V>, f: impl FnOnce(&V) -> Outcome) -> Self {
        match r {
            Ok(v) => f(v),
            Err(e) => Outcome::Skip(skip_reason(e)),
        }
    }
}

/// Residual of a functional of two finite-difference derivatives evaluated level by level.
fn paired<T: Real>(
    a: &FdDerivative<T>,
    b: &FdDerivative<T>,
    amplification: T,
    f: impl Fn(&Tensor3<T>, &Tensor3<T>) -> T,
) -> FdResidual<T> {
    FdResidual::new(
        f(&a.coarse, &b.coarse),
        f(&a.fine, &b.fine),
        f(&a.extrapolated, &b.extrapolated),
        a.noise.max(b.noise) * amplification.max(T::one()),
    )
}

fn max_over<T: Real>(items: impl IntoIterator<Item = FdResidual<T>>) -> FdResidual<T> {
    items.into_iter().fold(FdResidual::exact(), FdResidual::max)
}

struct Sample<'a, T: Real> {
    spec: &'a ManifoldSpec<T>,
    index: usize,
    point: Vec<Complex64>,
    fibers: Vec<DVector<T>>,
    out: Vec<CheckResult>,
}

impl<T: Real> Sample<'_, T> {
    fn tolerance(&self, d: &CheckDescriptor) -> f64 {
        self.spec.tolerances.get(d.id).copied().unwrap_or(d.default_tolerance)
    }

    fn emit(&mut self, id: &str, fiber: Option<usize>, outcome: Outcome) {
        let d = descriptor(id).unwrap_or_else(|| panic!("unregistered check {id}"));
        let configured = self.spec.tolerances.get(d.id).copied();
        let (residual, ratio, tolerance, status) = match outcome {
            Outcome::Value { residual, ratio, tolerance } => {
                let tol = configured.or(tolerance).unwrap_or(d.default_tolerance);
                let status = if residual <= tol { Status::Pass } else { Status::Fail };
                (Some(residual), ratio, tol, status)
            }
            Outcome::Skip(reason) => (None, None, self.tolerance(d), Status::Skipped(reason)),
        };
        self.out.push(CheckResult {
            check_id: d.id.to_string(),
            point_index: self.index,
            fiber_index: fiber,
            point: self.point.clone(),
            fiber: fiber.map(|f| self.fibers[f].iter().map(|&v| to_f64(v)).collect()),
            residual,
            tolerance,
            status,
            convergence_ratio: ratio,
            expected_fail: self.spec.expected_fail.iter().any(|e| e == d.id),
        });
    }

    /// Emits a fiber-independent outcome once per fiber.
    fn emit_fibers(&mut self, id: &str, outcome: impl Fn() -> Outcome) {
        for f in 0..self.fibers.len() {
            self.emit(id, Some(f), outcome());
        }
    }

    fn skip_all(&mut self, reason: SkipReason) {
        for d in registry() {
            self.emit(d.id, None, Outcome::Skip(reason));
        }
    }

    fn applicable(&self, d: &CheckDescriptor) -> bool {
        match d.applies {
            Applies::All => true,
            Applies::Prepotential => self.spec.kind == Kind::Prepotential,
            Applies::Conic => self.spec.conic,
        }
    }
}

fn seeded_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn random_vector<T: Real>(rng: &mut ChaCha8Rng, len: usize) -> Vec<T> {
    (0..len).map(|_| lit::<T>(rng.gen_range(-1.0..1.0))).collect()
}

fn run_sample<T: Real>(spec: &ManifoldSpec<T>, index: usize) -> Vec<CheckResult> {
    let z = &spec.sample_points[index];
    let dim = 2 * spec.n;
    let mut rng = seeded_rng(spec.seed, index);
    let covectors: Vec<Vec<T>> = (0..AJ_COVECTORS).map(|_| random_vector(&mut rng, dim)).collect();
    let fibers: Vec<DVector<T>> = if spec.fibers.is_empty() {
        vec![DVector::from_vec(random_vector(&mut rng, dim))]
    } else {
        spec.fibers.iter().map(|f| DVector::from_vec(f.clone())).collect()
    };
    let mut s = Sample {
        spec,
        index,
        point: z.iter().map(|c| Complex64::new(to_f64(c.re), to_f64(c.im))).collect(),
        fibers,
        out: Vec::new(),
    };
    let geom = match PointGeometry::at(spec, z) {
        Ok(g) => g,
        Err(e) => {
            s.skip_all(skip_reason(&e));
            return s.out;
        }
    };
    let not_applicable: Vec<&'static str> = registry().iter().filter(|d| !s.applicable(d)).map(|d| d.id).collect();
    for id in &not_applicable {
        s.emit(id, None, Outcome::Skip(SkipReason::NotApplicableToKind));
    }
    let na = |id: &str| not_applicable.contains(&id);

    point_checks(&mut s, &geom, &covectors, &na);
    fiber_checks(&mut s, &geom);
    s.out
}

fn point_checks<T: Real>(
    s: &mut Sample<'_, T>,
    geom: &PointGeometry<T>,
    covectors: &[Vec<T>],
    na: &dyn Fn(&str) -> bool,
) {
    let spec = s.spec;
    let p = &geom.point;
    let n = p.n();
    let d = 2 * n;
    let j = &geom.j;

    s.emit(
        "chart.jacobian-inverse",
        None,
        Outcome::exact(max_abs(&(&p.jac * &p.jac_inv - DMatrix::<T>::identity(d, d)))),
    );
    let ambient = AmbientSpace::<T>::new(n);
    let one = Complex::new(T::one(), T::zero());
    let dphi = DMatrix::from_fn(d, n, |r, c| {
        if r < n {
            if r == c {
                one
            } else {
                Complex::new(T::zero(), T::zero())
            }
        } else {
            p.differential[(r - n, c)]
        }
    });
    let pulled = dphi.transpose() * &ambient.omega * &dphi;
    let closed = lagrangian_of(&p.differential, spec.tol);
    s.emit("chart.lagrangian-iff-closed", None, Outcome::exact((max_abs_complex(&pulled) - closed.residual).abs()));
    s.emit("structure.j-squared", None, Outcome::exact(max_abs(&(j * j + DMatrix::<T>::identity(d, d)))));

    let (a, b) = geom.split.type_defects(j);
    s.emit("forms.hodge-types", None, Outcome::exact(a.max(b)));
    if !na("forms.omegaprime-vanishes") {
        s.emit("forms.omegaprime-vanishes", None, Outcome::exact(max_abs(&geom.split.omega_prime)));
    }
    let metric_ok = !geom.metric.degenerate;
    s.emit(
        "metric.hermitian",
        None,
        if metric_ok {
            Outcome::exact(geom.metric.hermitian_defect(j))
        } else {
            Outcome::Skip(SkipReason::DegenerateForm)
        },
    );
    if !na("metric.gamma-identity") {
        let (a, b) = g_equ_identity(geom);
        s.emit("metric.gamma-identity", None, Outcome::exact(a.max(b)));
    }
    if !na("conic.homogeneity") {
        let lambdas: Vec<Complex<T>> = if spec.lambda_samples.is_empty() {
            default_lambdas().into_iter().map(cast_complex).collect()
        } else {
            spec.lambda_samples.clone()
        };
        let outcome = Outcome::from_result(&conic_checks(spec, &p.z, &lambdas), |r| Outcome::Value {
            residual: to_f64(r.residual()),
            ratio: None,
            tolerance: Some(to_f64(r.bound)),
        });
        s.emit("conic.homogeneity", None, outcome);
    }

    let fd_ids = [
        "structure.d-nabla-j",
        "connection.theta-torsion",
        "connection.theta-torsion-two-paths",
        "connection.torsionfree-iff-d-nabla-j",
        "connection.conjugate-torsionfree",
        "connection.theta-d-j",
        "connection.d-preserves-j",
        "connection.condition-aj",
        "forms.d-omega11",
        "forms.d-omegaprime",
        "metric.nabla-g-symmetric",
        "metric.levi-civita",
        "metric.g-duality",
    ];
    let der = match Derivatives::compute(spec, geom) {
        Ok(der) => der,
        Err(e) => {
            for id in fd_ids.iter().filter(|id| !na(id)) {
                s.emit(id, None, Outcome::Skip(skip_reason(&e)));
            }
            return;
        }
    };
    let nj = &der.nabla_j;
    let amp = T::one() + max_abs(j);
    let tol_of = |id: &str| s.tolerance(descriptor(id).unwrap());

    let dnj = nj.residual(T::one(), |t| d_nabla_j(t).max_abs());
    let torsion = max_over(
        spec.theta_samples.iter().map(|&th| nj.residual(amp, |t| theta_connection(j, t, th).torsion.max_abs())),
    );
    let two_paths = spec.theta_samples.iter().fold(T::zero(), |acc, &th| {
        let fam = theta_connection(j, &nj.extrapolated, th);
        acc.max(fam.torsion.sub(&torsion_from_d_nabla_j(j, &nj.extrapolated, th)).max_abs())
    });
    let agree = (to_f64(torsion.value()) <= tol_of("connection.theta-torsion"))
        == (to_f64(dnj.value()) <= tol_of("structure.d-nabla-j"));
    s.emit("structure.d-nabla-j", None, Outcome::fd(&dnj));
    s.emit("connection.theta-torsion", None, Outcome::fd(&torsion));
    s.emit("connection.theta-torsion-two-paths", None, Outcome::exact(two_paths));
    s.emit("connection.torsionfree-iff-d-nabla-j", None, Outcome::exact(if agree { T::zero() } else { T::one() }));
    s.emit(
        "connection.conjugate-torsionfree",
        None,
        Outcome::fd(&nj.residual(amp, |t| alternate(&conjugate_connection(j, t)).max_abs())),
    );
    let amp2 = amp * amp;
    let dtheta = max_over(
        spec.theta_samples
            .iter()
            .map(|&th| nj.residual(amp2, |t| d_theta_j(j, t, &theta_connection(j, t, th)).max_abs())),
    );
    s.emit("connection.theta-d-j", None, Outcome::fd(&dtheta));
    s.emit("connection.d-preserves-j", None, Outcome::fd(&nj.residual(amp2, |t| d_of_j(j, t).max_abs())));
    s.emit("connection.condition-aj", None, Outcome::fd(&nj.residual(amp2, |t| condition_aj_defect(j, t, covectors))));
    s.emit("forms.d-omega11", None, Outcome::fd(&der.d_omega11.residual(T::one(), exterior_derivative_defect)));
    s.emit("forms.d-omegaprime", None, Outcome::fd(&der.d_omega_prime.residual(T::one(), exterior_derivative_defect)));

    let metric_ids = ["metric.nabla-g-symmetric", "metric.levi-civita", "metric.g-duality"];
    if na(metric_ids[0]) {
        return;
    }
    if !metric_ok {
        for id in metric_ids {
            s.emit(id, None, Outcome::Skip(SkipReason::DegenerateForm));
        }
        return;
    }
    let g = &geom.metric.g;
    let dg = &der.d_metric;
    s.emit("metric.nabla-g-symmetric", None, Outcome::fd(&dg.residual(T::one(), total_symmetry_defect)));
    let ginv_scale = g.clone().try_inverse().map_or(T::one(), |m| max_abs(&m));
    let lc = paired(dg, nj, amp * (T::one() + ginv_scale), |dg, nj| match levi_civita(g, dg) {
        Ok(lc) => lc.sub(&complex_connection_d(j, nj)).max_abs(),
        Err(_) => T::max_value().unwrap(),
    });
    s.emit("metric.levi-civita", None, Outcome::fd(&lc));
    let g_scale = T::one() + max_abs(g);
    let dual = paired(dg, nj, amp * g_scale, |dg, nj| g_duality_defect(g, dg, &conjugate_connection(j, nj)).max_abs());
    s.emit("metric.g-duality", None, Outcome::fd(&dual));
}

fn fiber_checks<T: Real>(s: &mut Sample<'_, T>, geom: &PointGeometry<T>) {
    let spec = s.spec;
    let tol = spec.tol;
    let h = spec.fd_step;
    let bundle: Vec<BundlePoint<T>> = s.fibers.iter().map(|p| BundlePoint::new(geom.clone(), p.clone())).collect();

    for (f, xi) in bundle.iter().enumerate() {
        let j1 = j1_at(xi);
        s.emit("bundle.j1-squared", Some(f), Outcome::exact(j1.square_defect(-T::one())));
        let j2 = j2_at(xi, FormChoice::Omega11, tol);
        s.emit(
            "bundle.j2-omega11-squared",
            Some(f),
            Outcome::from_result(&j2, |m| Outcome::exact(m.square_defect(-T::one()))),
        );
        let orth = g_n_at(xi).and_then(|gn| {
            let j2 = j2.clone()?;
            Ok(orthogonality_defect(&gn, &j1).max(orthogonality_defect(&gn, &j2)))
        });
        s.emit("bundle.gn-orthogonal", Some(f), Outcome::from_result(&orth, |r| Outcome::exact(*r)));
        let quat = quaternion_relations(xi, tol);
        s.emit("bundle.quaternion", Some(f), Outcome::from_result(&quat, |r| Outcome::exact(r.max())));
        let comm = commutator_blocks(xi, tol);
        s.emit(
            "bundle.commutator-blocks",
            Some(f),
            Outcome::from_result(&comm, |r| Outcome::exact(r.commutator.max(r.anticommutator))),
        );
        let para = para_relations(xi, tol);
        s.emit("bundle.para-relations", Some(f), Outcome::from_result(&para, |r| Outcome::exact(r.max())));
    }

    // fiber-independent quantities, computed once per base point
    let xi0 = &bundle[0];
    let nij_amp = |n: &FdDerivative<T>, m: T| n.residual(T::one() + m, |t| t.max_abs());
    let full = nijenhuis(spec, xi0, Structure::J2(FormChoice::Full), h);
    let full = full.map(|n| nij_amp(&n, max_abs(&geom.omega)));
    let n1 = nijenhuis(spec, xi0, Structure::J1, h).map(|n| nij_amp(&n, max_abs(&geom.j)));
    let cmp11 = nijenhuis_closed_form(spec, xi0, FormChoice::Omega11, h);
    let cmp_prime = nijenhuis_closed_form(spec, xi0, FormChoice::OmegaPrime, h);
    let integrable_tol = s.tolerance(descriptor("bundle.j2-omegaprime-integrable").unwrap());
    s.emit_fibers("bundle.j2-omega-integrable", || Outcome::from_result(&full, Outcome::fd));
    s.emit_fibers("bundle.j1-integrable", || Outcome::from_result(&n1, Outcome::fd));
    s.emit_fibers("bundle.j2-omegaprime-integrable", || {
        Outcome::from_result(&cmp_prime, |c| Outcome::fd(&c.nijenhuis.residual(T::one(), |t| t.max_abs())))
    });
    s.emit_fibers("bundle.nijenhuis-closed-form-omega11", || {
        Outcome::from_result(&cmp11, |c| Outcome::fd(&c.discrepancy))
    });
    s.emit_fibers("bundle.nijenhuis-closed-form-omegaprime", || {
        Outcome::from_result(&cmp_prime, |c| Outcome::fd(&c.discrepancy))
    });
    let iff = |c: &NijenhuisComparison<T>| {
        let integrable = to_f64(c.max_component) <= integrable_tol;
        let parallel = to_f64(c.d_rho.extrapolated.max_abs()) <= integrable_tol;
        integrable == parallel
    };
    s.emit_fibers("bundle.integrable-iff-parallel", || match (&cmp11, &cmp_prime) {
        (Err(e), Err(_)) => Outcome::Skip(skip_reason(e)),
        _ => {
            let mismatches = [&cmp11, &cmp_prime].iter().filter(|c| c.as_ref().is_ok_and(|c| !iff(c))).count();
            Outcome::exact(lit::<T>(mismatches as f64))
        }
    });

    let forms = omega_alpha_forms(spec, xi0);
    let closed_tol = s.tolerance(descriptor("bundle.d-omega2").unwrap());
    s.emit_fibers("bundle.omega-alpha-skew", || {
        Outcome::from_result(&forms, |f| Outcome::exact(f.skew.iter().fold(T::zero(), |a, &b| a.max(b))))
    });
    s.emit_fibers("bundle.d-omega2", || Outcome::from_result(&forms, |f| Outcome::fd(&f.closedness[1])));
    s.emit_fibers("bundle.d-omega3", || Outcome::from_result(&forms, |f| Outcome::fd(&f.closedness[2])));
    s.emit_fibers("bundle.d-omega1-iff-parallel", || {
        Outcome::from_result(&forms, |f| {
            let closed = to_f64(f.closedness[0].value()) <= closed_tol;
            let parallel = to_f64(f.nabla_omega11) <= closed_tol;
            Outcome::exact(if closed == parallel { T::zero() } else { T::one() })
        })
    });

    let nj = crate::geometry::nabla_j(spec, &geom.point);
    for (f, xi) in bundle.iter().enumerate() {
        let outcome = Outcome::from_result(&nj, |nj| {
            let j1 = j1_at(xi).matrix;
            let worst =
                [complex_connection_d(&geom.j, &nj.extrapolated), conjugate_connection(&geom.j, &nj.extrapolated)]
                    .iter()
                    .map(|a| max_abs(&(induced_structure(xi, a) - &j1)))
                    .fold(T::zero(), |a, b| a.max(b));
            Outcome::exact(worst)
        });
        s.emit("bundle.induced-structure", Some(f), outcome);
    }
}

fn sort_key(r: &CheckResult) -> (String, usize, Option<usize>) {
    (r.check_id.clone(), r.point_index, r.fiber_index)
}

fn aggregate(results: &[CheckResult]) -> Vec<Aggregate> {
    let mut by_id: BTreeMap<&str, Aggregate> = BTreeMap::new();
    for r in results {
        let a = by_id.entry(&r.check_id).or_insert_with(|| Aggregate {
            check_id: r.check_id.clone(),
            evaluated: 0,
            passed: 0,
            failed: 0,
            skipped: 0,
            max_residual: None,
            worst_point: None,
            expected_fail: r.expected_fail,
        });
        match r.status {
            Status::Pass => a.passed += 1,
            Status::Fail => a.failed += 1,
            Status::Skipped(_) => a.skipped += 1,
        }
        if let Some(res) = r.residual {
            a.evaluated += 1;
            if a.max_residual.is_none_or(|m| res > m) {
                a.max_residual = Some(res);
                a.worst_point = Some((r.point_index, r.fiber_index));
            }
        }
    }
    by_id.into_values().collect()
}

fn summarize(spec_expected_skip: bool, results: &[CheckResult], aggregates: &[Aggregate]) -> Summary {
    let count = |f: &dyn Fn(&CheckResult) -> bool| results.iter().filter(|r| f(r)).count();
    let passed = count(&|r| r.status == Status::Pass);
    let failed = count(&|r| r.status == Status::Fail && !r.expected_fail);
    let expected_failures = count(&|r| r.status == Status::Fail && r.expected_fail);
    let skipped = count(&|r| r.status.is_skipped());
    let unexpected_passes: Vec<String> = aggregates
        .iter()
        .filter(|a| a.expected_fail && a.evaluated > 0 && a.failed == 0)
        .map(|a| a.check_id.clone())
        .collect();
    let all_skipped = skipped == results.len();
    let ok = failed == 0 && unexpected_passes.is_empty() && (!all_skipped || spec_expected_skip);
    Summary { results: results.len(), passed, failed, expected_failures, skipped, unexpected_passes, all_skipped, ok }
}

fn echo<T: Real>(spec: &ManifoldSpec<T>) -> SpecEcho {
    let c64 = |c: &Complex<T>| Complex64::new(to_f64(c.re), to_f64(c.im));
    SpecEcho {
        n: spec.n,
        kind: match spec.kind {
            Kind::Prepotential => "prepotential".into(),
            Kind::OneForm => "one_form".into(),
        },
        components: spec.components.iter().map(|e| e.to_string()).collect(),
        sample_points: spec.sample_points.iter().map(|z| z.iter().map(c64).collect()).collect(),
        fd_step: to_f64(spec.fd_step),
        tol: to_f64(spec.tol),
        conic: spec.conic,
        theta_samples_deg: spec.theta_samples.iter().map(|&t| to_f64(t).to_degrees()).collect(),
        lambda_samples: spec.lambda_samples.iter().map(c64).collect(),
        fibers: spec.fibers.iter().map(|f| f.iter().map(|&v| to_f64(v)).collect()).collect(),
        expected_fail: spec.expected_fail.clone(),
        expected_skip: spec.expected_skip,
        tolerances: spec.tolerances.clone(),
    }
}

/// Runs every registered check at every sample (and fiber), in parallel over
/// samples. The result order is fixed: by check ID, then point, then fiber.
pub fn run_report<T: Real>(spec: &ManifoldSpec<T>) -> Result<VerificationReport> {
    spec.validate()?;
    if let Some(bad) = spec.expected_fail.iter().chain(spec.tolerances.keys()).find(|id| descriptor(id).is_none()) {
        return Err(Error::SpecInvalid(format!("unknown check id `{bad}`")));
    }
    let mut results: Vec<CheckResult> =
        (0..spec.sample_points.len()).into_par_iter().flat_map_iter(|k| run_sample(spec, k)).collect();
    results.sort_by_key(sort_key);
    let aggregates = aggregate(&results);
    let summary = summarize(spec.expected_skip, &results, &aggregates);
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    Ok(VerificationReport {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        timestamp,
        seed: spec.seed,
        conventions: CONVENTIONS.to_vec(),
        spec: echo(spec),
        summary,
        aggregates,
        results,
    })
}
