//! Central finite differences in the affine coordinates `q = (x, y)`.
//!
//! Every derivative is taken at two steps, `h` and `h/2`. The pair gives a
//! Richardson-extrapolated estimate (fourth order) and, for any residual
//! that vanishes analytically, the convergence ratio `r(h) / r(h/2)`, which
//! is close to 4 while truncation error dominates.

use nalgebra::{DMatrix, DVector};

use crate::charts::{chart_point_near, ChartPoint, ManifoldSpec};
use crate::error::Result;
use crate::linalg::{max_abs, Tensor3};
use crate::scalar::{eps, lit, Real};

/// Neighbouring chart points `q ± h_l e_μ` for `h_0 = h`, `h_1 = h/2`.
#[derive(Debug, Clone)]
pub struct Stencil<T: Real> {
    pub h: T,
    pub center: ChartPoint<T>,
    levels: [Vec<(ChartPoint<T>, ChartPoint<T>)>; 2],
}

impl<T: Real> Stencil<T> {
    pub fn build(spec: &ManifoldSpec<T>, center: &ChartPoint<T>, h: T) -> Result<Self> {
        let dim = 2 * center.n();
        let level = |step: T| -> Result<Vec<(ChartPoint<T>, ChartPoint<T>)>> {
            (0..dim)
                .map(|mu| {
                    let mut dq = DVector::zeros(dim);
                    dq[mu] = step;
                    let plus = chart_point_near(spec, center, &dq)?;
                    let minus = chart_point_near(spec, center, &(-dq))?;
                    Ok((plus, minus))
                })
                .collect()
        };
        Ok(Self { h, center: center.clone(), levels: [level(h)?, level(h * lit(0.5))?] })
    }

    pub fn dim(&self) -> usize {
        2 * self.center.n()
    }

    /// Derivative of a matrix-valued field along each affine coordinate.
    pub fn derivative(&self, f: impl Fn(&ChartPoint<T>) -> DMatrix<T>) -> FdDerivative<T> {
        let at = |l: usize| -> Tensor3<T> {
            let step = if l == 0 { self.h } else { self.h * lit(0.5) };
            let two_h = step + step;
            Tensor3 { slices: self.levels[l].iter().map(|(p, m)| (f(p) - f(m)) / two_h).collect() }
        };
        FdDerivative::from_levels(self.h, at(0), at(1), max_abs(&f(&self.center)))
    }
}

/// A finite-difference derivative at two steps plus its extrapolation.
#[derive(Debug, Clone)]
pub struct FdDerivative<T: Real> {
    pub h: T,
    pub coarse: Tensor3<T>,
    pub fine: Tensor3<T>,
    pub extrapolated: Tensor3<T>,
    /// Round-off floor of a difference quotient of a field of this size.
    pub noise: T,
}

impl<T: Real> FdDerivative<T> {
    pub fn from_levels(h: T, coarse: Tensor3<T>, fine: Tensor3<T>, field_scale: T) -> Self {
        let four = lit::<T>(4.0);
        let three = lit::<T>(3.0);
        let extrapolated = fine.combine(&coarse, |f, c| (four * f - c) / three);
        let noise = lit::<T>(1e3) * eps::<T>() * field_scale.max(T::one()) / h;
        Self { h, coarse, fine, extrapolated, noise }
    }

    /// Evaluates a residual functional on all three estimates. `amplification`
    /// scales the noise floor for residuals that multiply the derivative by
    /// other tensors.
    pub fn residual(&self, amplification: T, f: impl Fn(&Tensor3<T>) -> T) -> FdResidual<T> {
        FdResidual::new(f(&self.coarse), f(&self.fine), f(&self.extrapolated), self.noise * amplification.max(T::one()))
    }
}

/// Residual of an analytically vanishing quantity estimated by finite differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdResidual<T: Real> {
    /// At step `h`.
    pub coarse: T,
    /// At step `h/2`.
    pub fine: T,
    /// From the Richardson-extrapolated derivative; used for pass/fail.
    pub extrapolated: T,
    pub floor: T,
    /// `coarse / fine`, present when the coarse residual rises above the round-off floor.
    pub ratio: Option<T>,
}

impl<T: Real> FdResidual<T> {
    pub fn new(coarse: T, fine: T, extrapolated: T, floor: T) -> Self {
        let ratio = (coarse > floor && fine > T::zero()).then(|| coarse / fine);
        Self { coarse, fine, extrapolated, floor, ratio }
    }

    /// Exact zero: nothing to converge.
    pub fn exact() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    /// Component-wise maximum of two residuals of the same check.
    pub fn max(self, other: Self) -> Self {
        Self::new(
            self.coarse.max(other.coarse),
            self.fine.max(other.fine),
            self.extrapolated.max(other.extrapolated),
            self.floor.max(other.floor),
        )
    }

    pub fn value(&self) -> T {
        self.extrapolated
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::chart_point;
    use crate::expr::parse_expression;
    use num_complex::Complex;

    #[test]
    fn derivative_of_coordinates_is_identity() {
        let spec = ManifoldSpec::<f64>::prepotential(parse_expression("z1^3/z2", 2).unwrap());
        let p = chart_point(&spec, &[Complex::new(1.0, 0.0), Complex::new(1.0, 1.0)]).unwrap();
        let st = Stencil::build(&spec, &p, 1e-3).unwrap();
        let d = st.derivative(|c| DMatrix::from_column_slice(4, 1, c.q().as_slice()));
        for mu in 0..4 {
            for a in 0..4 {
                let want = if a == mu { 1.0 } else { 0.0 };
                assert!((d.extrapolated.get(mu, a, 0) - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn quadratic_error_gives_ratio_four() {
        // f(t) = t^3 along every direction has central-difference error h^2
        let h = 1e-2;
        let coarse = Tensor3::from_fn(1, 1, 1, |_, _, _| 3.0 + h * h);
        let fine = Tensor3::from_fn(1, 1, 1, |_, _, _| 3.0 + h * h / 4.0);
        let d = FdDerivative::<f64>::from_levels(h, coarse, fine, 1.0);
        assert!((d.extrapolated.get(0, 0, 0) - 3.0).abs() < 1e-14);
        let r = d.residual(1.0, |t| (t.get(0, 0, 0) - 3.0).abs());
        assert!((r.ratio.unwrap() - 4.0).abs() < 1e-9);
        let flat = FdResidual::<f64>::exact();
        assert!(flat.ratio.is_none());
    }
}
