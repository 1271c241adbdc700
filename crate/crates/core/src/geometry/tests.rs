use super::*;
use crate::charts::chart_point;
use crate::expr::parse_expression;
use nalgebra::DMatrix;
use num_complex::Complex;
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};

type Spec = ManifoldSpec<f64>;

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

fn prepot(src: &str, n: usize) -> Spec {
    let mut s = ManifoldSpec::prepotential(parse_expression(src, n).unwrap());
    s.fd_step = 2.5e-4;
    s
}

fn one_form(srcs: &[&str]) -> Spec {
    let n = srcs.len();
    let mut s = ManifoldSpec::one_form(srcs.iter().map(|e| parse_expression(e, n).unwrap()).collect());
    s.fd_step = 2.5e-4;
    s
}

fn m_quad() -> Spec {
    prepot("(i/2)*(z1^2+z2^2)", 2)
}
fn m_tau() -> Spec {
    prepot("i*z1^2 + z1*z2 + (i/2)*z2^2", 2)
}
fn m_cubic() -> Spec {
    prepot("z1^3/z2", 2)
}
fn a_sympl() -> Spec {
    one_form(&["i*z1 + z2", "i*z2"])
}
fn a_curved() -> Spec {
    one_form(&["i*z1 + z2^2", "i*z2"])
}

fn cubic_point() -> [Complex<f64>; 2] {
    [c(1.0, 0.0), c(1.0, 1.0)]
}

fn geom(spec: &Spec, z: &[Complex<f64>]) -> PointGeometry<f64> {
    PointGeometry::at(spec, z).unwrap()
}

fn mat(rows: &[&[f64]]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), rows[0].len(), |r, c| rows[r][c])
}

fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
    max_abs(&(a - b)) <= tol
}

#[test]
fn standard_structures() {
    let j = standard_complex_structure::<f64>(1);
    assert_eq!(j, mat(&[&[0.0, -1.0], &[1.0, 0.0]]));
    assert_eq!(symplectic_form_affine::<f64>(1), mat(&[&[0.0, 2.0], &[-2.0, 0.0]]));
    let w = symplectic_form_affine::<f64>(2);
    assert_eq!(w[(0, 2)], 2.0);
    assert_eq!(w[(3, 1)], -2.0);
    assert_eq!(w[(0, 3)], 0.0);
}

#[test]
fn quad_is_flat_kaehler() {
    let g = geom(&m_quad(), &[c(0.3, 0.1), c(-0.2, 0.4)]);
    let want_j = mat(&[&[0.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 0.0, 1.0], &[-1.0, 0.0, 0.0, 0.0], &[0.0, -1.0, 0.0, 0.0]]);
    assert!(close(&g.j, &want_j, 1e-15));
    assert!(close(&g.metric.g, &(DMatrix::identity(4, 4) * 2.0), 1e-15));
    assert_eq!(g.metric.signature, Signature { positive: 4, negative: 0, zero: 0 });
    assert!(close(&g.split.omega11, &g.omega, 1e-15));
    assert!(max_abs(&g.split.omega_prime) < 1e-15);
}

#[test]
fn tau_matches_hand_assembly() {
    // Re τ = [[0,1],[1,0]], Im τ = diag(2,1); J = Jac J_std Jac⁻¹ worked out by hand
    let g = geom(&m_tau(), &[c(0.2, -0.1), c(0.5, 0.3)]);
    let want_j = mat(&[&[0.0, -0.5, 0.5, 0.0], &[-1.0, 0.0, 0.0, 1.0], &[-3.0, 0.0, 0.0, 1.0], &[0.0, -1.5, 0.5, 0.0]]);
    assert!(close(&g.j, &want_j, 1e-14), "{}", g.j);
    let want_g = mat(&[&[6.0, 0.0, 0.0, -2.0], &[0.0, 3.0, -1.0, 0.0], &[0.0, -1.0, 1.0, 0.0], &[-2.0, 0.0, 0.0, 2.0]]);
    assert!(close(&g.metric.g, &want_g, 1e-14));
    assert_eq!(g.metric.signature.positive, 4);
}

#[test]
fn cubic_is_indefinite_and_complex() {
    let g = geom(&m_cubic(), &cubic_point());
    let id = DMatrix::<f64>::identity(4, 4);
    assert!(close(&(&g.j * &g.j), &(-id), 1e-12));
    // Im Hess F has one positive and one negative eigenvalue; g doubles it
    assert_eq!(g.metric.signature, Signature { positive: 2, negative: 2, zero: 0 });
    assert!(g.metric.hermitian_defect(&g.j) < 1e-12);
    let (a, b) = g.split.type_defects(&g.j);
    assert!(a < 1e-12 && b < 1e-12);
    assert!(max_abs(&g.split.omega_prime) < 1e-10);
}

#[test]
fn sympl_has_anti_invariant_part() {
    let g = geom(&a_sympl(), &[c(0.0, 0.0), c(0.0, 0.0)]);
    assert!(g.split.omega_prime.norm() > 0.1);
    let (a, b) = g.split.type_defects(&g.j);
    assert!(a < 1e-12 && b < 1e-12);
}

/// `∂J/∂q` by differencing in `(Re z, Im z)` and applying the chain rule,
/// so no coordinate inversion is involved.
fn nabla_j_chain_rule(spec: &Spec, z: &[Complex<f64>]) -> Tensor3<f64> {
    let n = z.len();
    let h = 1e-5;
    let p = chart_point(spec, z).unwrap();
    let d_s: Vec<DMatrix<f64>> = (0..2 * n)
        .map(|k| {
            let shift = |sgn: f64| {
                let mut zz = z.to_vec();
                if k < n {
                    zz[k].re += sgn * h;
                } else {
                    zz[k - n].im += sgn * h;
                }
                complex_structure_affine(&chart_point(spec, &zz).unwrap())
            };
            (shift(1.0) - shift(-1.0)) / (2.0 * h)
        })
        .collect();
    Tensor3 {
        slices: (0..2 * n)
            .map(|mu| (0..2 * n).fold(DMatrix::zeros(2 * n, 2 * n), |acc, k| acc + &d_s[k] * p.jac_inv[(k, mu)]))
            .collect(),
    }
}

#[test]
fn nabla_j_agrees_with_chain_rule_oracle() {
    let spec = m_cubic();
    let z = cubic_point();
    let p = chart_point(&spec, &z).unwrap();
    let nj = nabla_j(&spec, &p).unwrap();
    let oracle = nabla_j_chain_rule(&spec, &z);
    assert!(oracle.max_abs() > 0.1);
    assert!(nj.extrapolated.sub(&oracle).max_abs() < 1e-7);
    assert!(d_nabla_j(&nj.extrapolated).max_abs() < 5e-6);
    assert!(d_nabla_j(&oracle).max_abs() < 1e-6);
}

#[test]
fn flat_models_have_parallel_j() {
    for spec in [m_quad(), m_tau()] {
        let p = chart_point(&spec, &[c(0.1, 0.2), c(-0.3, 0.1)]).unwrap();
        let nj = nabla_j(&spec, &p).unwrap();
        assert!(nj.extrapolated.max_abs() < 1e-9);
        assert!(nj.coarse.max_abs() < 1e-9);
    }
}

#[test]
fn richardson_ratio_on_cubic() {
    let spec = m_cubic();
    let p = chart_point(&spec, &cubic_point()).unwrap();
    let nj = nabla_j(&spec, &p).unwrap();
    let r = nj.residual(1.0, |t| d_nabla_j(t).max_abs());
    let ratio = r.ratio.expect("truncation error should be measurable at this step");
    assert!((3.0..=5.0).contains(&ratio), "{ratio}");
    assert!(r.extrapolated < r.fine);
}

/// A field with `J² = −1` that is not induced by any holomorphic data.
fn adversarial_j(q: &nalgebra::DVector<f64>) -> DMatrix<f64> {
    let mut p = DMatrix::<f64>::identity(4, 4);
    p[(0, 1)] = 0.8 * q[0] * q[2];
    p[(2, 3)] = 0.5 * q[1].sin();
    p[(3, 0)] = 0.4 * q[3] * q[3];
    let inv = p.clone().try_inverse().unwrap();
    &p * standard_complex_structure::<f64>(2) * inv
}

#[test]
fn adversarial_field_is_detected() {
    let spec = m_cubic();
    let p = chart_point(&spec, &cubic_point()).unwrap();
    let st = Stencil::build(&spec, &p, 1e-3).unwrap();
    let j0 = adversarial_j(&p.q());
    let id = DMatrix::<f64>::identity(4, 4);
    assert!(close(&(&j0 * &j0), &(-id), 1e-12));
    let nj = st.derivative(|cp| adversarial_j(&cp.q())).extrapolated;
    assert!(d_nabla_j(&nj).max_abs() > 1e-2);
    let fam = theta_connection(&j0, &nj, FRAC_PI_2);
    assert!(fam.torsion.max_abs() > 1e-2);
}

#[test]
fn theta_family_on_cubic() {
    let spec = m_cubic();
    let g = geom(&spec, &cubic_point());
    let nj = nabla_j(&spec, &g.point).unwrap().extrapolated;
    let zero = theta_connection(&g.j, &nj, 0.0);
    assert_eq!(zero.a_theta.max_abs(), 0.0);
    for th in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_2] {
        let fam = theta_connection(&g.j, &nj, th);
        assert!(fam.torsion.max_abs() < 5e-6);
        assert!(fam.torsion.sub(&torsion_from_d_nabla_j(&g.j, &nj, th)).max_abs() < 1e-12);
        assert!(d_theta_j(&g.j, &nj, &fam).max_abs() < 5e-6);
    }
    let conj = conjugate_connection(&g.j, &nj);
    assert!(conj.max_abs() > 0.1);
    assert!(alternate(&conj).max_abs() < 5e-6);
    let half_pi = theta_connection(&g.j, &nj, FRAC_PI_2);
    assert!(half_pi.a_theta.sub(&conj).max_abs() < 1e-12);
    assert!(d_of_j(&g.j, &nj).max_abs() < 5e-6);
}

#[test]
fn sympl_connections() {
    let spec = a_sympl();
    let g = geom(&spec, &[c(0.2, 0.1), c(-0.1, 0.3)]);
    let nj = nabla_j(&spec, &g.point).unwrap().extrapolated;
    assert!(theta_connection(&g.j, &nj, FRAC_PI_4).torsion.max_abs() < 5e-6);
    assert!(d_of_j(&g.j, &nj).max_abs() < 5e-6);
}

#[test]
fn metric_identities_on_cubic() {
    let spec = m_cubic();
    let g = geom(&spec, &cubic_point());
    let d = Derivatives::compute(&spec, &g).unwrap();
    let dg = &d.d_metric.extrapolated;
    assert!(dg.max_abs() > 0.1);
    assert!(total_symmetry_defect(dg) < 5e-6);
    let lc = levi_civita(&g.metric.g, dg).unwrap();
    let dconn = complex_connection_d(&g.j, &d.nabla_j.extrapolated);
    assert!(lc.sub(&dconn).max_abs() < 1e-5);
    let conj = conjugate_connection(&g.j, &d.nabla_j.extrapolated);
    assert!(g_duality_defect(&g.metric.g, dg, &conj).max_abs() < 1e-5);
    assert!(exterior_derivative_defect(&d.d_omega11.extrapolated) < 5e-6);
    assert!(exterior_derivative_defect(&d.d_omega_prime.extrapolated) < 5e-6);
}

#[test]
fn condition_aj_holds_for_induced_structure() {
    let spec = m_cubic();
    let g = geom(&spec, &cubic_point());
    let nj = nabla_j(&spec, &g.point).unwrap().extrapolated;
    let xis: Vec<Vec<f64>> = (0..20).map(|k| (0..4).map(|i| ((k * 7 + i * 3) as f64).sin()).collect()).collect();
    let r = condition_aj_defect(&g.j, &nj, &xis);
    assert!(r < 1e-8, "{r}");
}

#[test]
fn g_equ_and_sign_convention() {
    for (spec, z) in [
        (m_quad(), vec![c(0.1, 0.0), c(0.0, 0.2)]),
        (m_tau(), vec![c(0.3, 0.1), c(0.2, -0.4)]),
        (m_cubic(), cubic_point().to_vec()),
    ] {
        let g = geom(&spec, &z);
        let (a, b) = g_equ_identity(&g);
        assert!(a < 1e-9 && b < 1e-9, "{a} {b}");
        // the γ-pullback metric is the same g as ω¹¹(J·, ·)
        assert!(close(&g.gamma_metric(), &g.metric.g, 1e-9));
    }
}

#[test]
fn curved_anti_invariant_part_is_not_parallel() {
    let spec = a_curved();
    let g = geom(&spec, &[c(0.0, 0.0), c(0.3, 0.0)]);
    let d = Derivatives::compute(&spec, &g).unwrap();
    assert!(d.d_omega_prime.extrapolated.max_abs() > 1e-2);
    // still closed: ω' = ω − ω¹¹ and both are
    assert!(exterior_derivative_defect(&d.d_omega_prime.extrapolated) < 5e-6);
}

#[test]
fn degenerate_metric_is_reported() {
    let j = standard_complex_structure::<f64>(1);
    let m = kaehler_metric(&j, &DMatrix::zeros(2, 2), 1e-6);
    assert!(m.degenerate);
    assert!(matches!(m.require_nondegenerate(), Err(Error::Degenerate { .. })));
}

fn random_structure(entries: &[f64]) -> DMatrix<f64> {
    let p = DMatrix::<f64>::identity(4, 4) + DMatrix::from_column_slice(4, 4, entries) * 0.3;
    let inv = p.clone().try_inverse().unwrap();
    &p * standard_complex_structure::<f64>(2) * inv
}

proptest! {
    #[test]
    fn hodge_parts_have_their_type(entries in prop::collection::vec(-1.0f64..1.0, 16)) {
        let j = random_structure(&entries);
        let w = symplectic_form_affine::<f64>(2);
        let s = hodge_split(&j, &w);
        let (a, b) = s.type_defects(&j);
        let scale = 1.0 + max_abs(&j).powi(2);
        prop_assert!(a < 1e-10 * scale * scale && b < 1e-10 * scale * scale);
        prop_assert!(close(&(&s.omega11 + &s.omega_prime), &w, 1e-12));
    }

    #[test]
    fn torsion_is_skew(entries in prop::collection::vec(-1.0f64..1.0, 64), th in 0.0f64..3.1) {
        let nj = Tensor3 { slices: entries.chunks(16).map(|s| DMatrix::from_column_slice(4, 4, s)).collect() };
        let j = standard_complex_structure::<f64>(2);
        let fam = theta_connection(&j, &nj, th);
        for mu in 0..4 {
            for nu in 0..4 {
                for a in 0..4 {
                    prop_assert!((fam.torsion.get(mu, a, nu) + fam.torsion.get(nu, a, mu)).abs() < 1e-12);
                }
            }
        }
        prop_assert!(fam.torsion.sub(&torsion_from_d_nabla_j(&j, &nj, th)).max_abs() < 1e-12);
    }
}
