//! Homogeneity of conic data under `z ↦ λz`.

use num_complex::Complex;

use crate::charts::{Kind, ManifoldSpec};
use crate::error::Result;
use crate::expr::eval;
use crate::scalar::{cabs, lit, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConicReport<T: Real> {
    /// `max_λ |F(λz) − λ²F(z)|`, or `max_{λ,i} |F_i(λz) − λF_i(z)|` for 1-forms.
    pub homogeneity: T,
    /// `|Σ z^i F_i − 2F|`; prepotentials only.
    pub euler: Option<T>,
    /// `tol · (1 + |F(z)|)`.
    pub bound: T,
}

impl<T: Real> ConicReport<T> {
    pub fn residual(&self) -> T {
        self.euler.map_or(self.homogeneity, |e| e.max(self.homogeneity))
    }

    pub fn pass(&self) -> bool {
        self.residual() <= self.bound
    }
}

fn scaled<T: Real>(z: &[Complex<T>], l: Complex<T>) -> Vec<Complex<T>> {
    z.iter().map(|&zi| zi * l).collect()
}

pub fn conic_checks<T: Real>(
    spec: &ManifoldSpec<T>,
    z: &[Complex<T>],
    lambdas: &[Complex<T>],
) -> Result<ConicReport<T>> {
    match spec.kind {
        Kind::Prepotential => {
            let f = &spec.components[0];
            let f0 = eval(f, z)?;
            let mut homogeneity = T::zero();
            for &l in lambdas {
                let fl = eval(f, &scaled(z, l))?;
                homogeneity = homogeneity.max(cabs(fl - l * l * f0));
            }
            let grad = spec.component_jets(z, 0)?;
            let euler_sum =
                z.iter().zip(&grad).fold(Complex::new(T::zero(), T::zero()), |acc, (zi, fi)| acc + zi * fi.value());
            let euler = cabs(euler_sum - f0 * lit::<T>(2.0));
            Ok(ConicReport { homogeneity, euler: Some(euler), bound: spec.tol * (T::one() + cabs(f0)) })
        }
        Kind::OneForm => {
            let base: Vec<Complex<T>> = spec.components.iter().map(|e| eval(e, z)).collect::<Result<_, _>>()?;
            let mut homogeneity = T::zero();
            for &l in lambdas {
                let zl = scaled(z, l);
                for (e, &fi) in spec.components.iter().zip(&base) {
                    homogeneity = homogeneity.max(cabs(eval(e, &zl)? - l * fi));
                }
            }
            let size = base.iter().fold(T::zero(), |a, &v| a.max(cabs(v)));
            Ok(ConicReport { homogeneity, euler: None, bound: spec.tol * (T::one() + size) })
        }
    }
}
