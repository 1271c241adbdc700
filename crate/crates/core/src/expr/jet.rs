//! Truncated multivariate Taylor jets of holomorphic functions.
//!
//! A [`HoloJet`] carries the value of a holomorphic function together with
//! its complex partial derivatives through third order. Second and third
//! derivatives are stored packed (one slot per multiset of indices), so
//! symmetry under index permutations holds by construction.

use num_complex::Complex;

use crate::error::EvalError;
use crate::scalar::{cexp, cln, cpowi, Real};

/// Highest derivative order carried by a jet.
pub const MAX_ORDER: usize = 3;

#[inline]
fn idx2(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    b * (b + 1) / 2 + a
}

#[inline]
fn idx3(i: usize, j: usize, k: usize) -> usize {
    let mut s = [i, j, k];
    s.sort_unstable();
    let [a, b, c] = s;
    c * (c + 1) * (c + 2) / 6 + b * (b + 1) / 2 + a
}

/// Value and holomorphic derivatives through `order` at a point of ℂⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct HoloJet<T: Real> {
    n: usize,
    order: usize,
    value: Complex<T>,
    grad: Vec<Complex<T>>,
    hess: Vec<Complex<T>>,
    third: Vec<Complex<T>>,
}

impl<T: Real> HoloJet<T> {
    fn zeros(n: usize, order: usize) -> Self {
        let z = Complex::new(T::zero(), T::zero());
        Self {
            n,
            order,
            value: z,
            grad: vec![z; if order >= 1 { n } else { 0 }],
            hess: vec![z; if order >= 2 { n * (n + 1) / 2 } else { 0 }],
            third: vec![z; if order >= 3 { n * (n + 1) * (n + 2) / 6 } else { 0 }],
        }
    }

    pub fn constant(n: usize, order: usize, c: Complex<T>) -> Self {
        let mut j = Self::zeros(n, order);
        j.value = c;
        j
    }

    /// The coordinate function `z^k` (0-based `k`).
    pub fn variable(n: usize, order: usize, k: usize, zk: Complex<T>) -> Self {
        let mut j = Self::zeros(n, order);
        j.value = zk;
        if order >= 1 {
            j.grad[k] = Complex::new(T::one(), T::zero());
        }
        j
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> Complex<T> {
        self.value
    }

    /// ∂F/∂z^i.
    pub fn grad(&self, i: usize) -> Complex<T> {
        assert!(self.order >= 1, "jet does not carry first derivatives");
        self.grad[i]
    }

    pub fn gradient(&self) -> &[Complex<T>] {
        &self.grad
    }

    /// ∂²F/∂z^i∂z^j.
    pub fn hess(&self, i: usize, j: usize) -> Complex<T> {
        assert!(self.order >= 2, "jet does not carry second derivatives");
        self.hess[idx2(i, j)]
    }

    /// ∂³F/∂z^i∂z^j∂z^k.
    pub fn third(&self, i: usize, j: usize, k: usize) -> Complex<T> {
        assert!(self.order >= 3, "jet does not carry third derivatives");
        self.third[idx3(i, j, k)]
    }

    /// Jet of the partial derivative ∂F/∂z^i, one order lower.
    pub fn partial(&self, i: usize) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let n = self.n;
        let mut out = Self::zeros(n, self.order - 1);
        out.value = self.grad[i];
        if out.order >= 1 {
            for j in 0..n {
                out.grad[j] = self.hess[idx2(i, j)];
            }
        }
        if out.order >= 2 {
            for k in 0..n {
                for j in 0..=k {
                    out.hess[idx2(j, k)] = self.third[idx3(i, j, k)];
                }
            }
        }
        out
    }

    fn zip(&self, other: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Self {
        debug_assert_eq!(self.n, other.n);
        let order = self.order.min(other.order);
        let mut out = Self::zeros(self.n, order);
        out.value = f(self.value, other.value);
        for (o, (a, b)) in out.grad.iter_mut().zip(self.grad.iter().zip(&other.grad)) {
            *o = f(*a, *b);
        }
        for (o, (a, b)) in out.hess.iter_mut().zip(self.hess.iter().zip(&other.hess)) {
            *o = f(*a, *b);
        }
        for (o, (a, b)) in out.third.iter_mut().zip(self.third.iter().zip(&other.third)) {
            *o = f(*a, *b);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn neg(&self) -> Self {
        let zero = Self::zeros(self.n, self.order);
        zero.sub(self)
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        let mut out = self.clone();
        out.value *= c;
        out.grad.iter_mut().for_each(|g| *g *= c);
        out.hess.iter_mut().for_each(|g| *g *= c);
        out.third.iter_mut().for_each(|g| *g *= c);
        out
    }

    /// Leibniz rule through third order.
    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = (self, other);
        let n = a.n;
        let order = a.order.min(b.order);
        let mut out = Self::zeros(n, order);
        out.value = a.value * b.value;
        if order >= 1 {
            for i in 0..n {
                out.grad[i] = a.grad[i] * b.value + a.value * b.grad[i];
            }
        }
        if order >= 2 {
            for j in 0..n {
                for i in 0..=j {
                    let h = idx2(i, j);
                    out.hess[h] =
                        a.hess[h] * b.value + a.grad[i] * b.grad[j] + a.grad[j] * b.grad[i] + a.value * b.hess[h];
                }
            }
        }
        if order >= 3 {
            for k in 0..n {
                for j in 0..=k {
                    for i in 0..=j {
                        let t = idx3(i, j, k);
                        let (ij, ik, jk) = (idx2(i, j), idx2(i, k), idx2(j, k));
                        out.third[t] = a.third[t] * b.value
                            + a.hess[ij] * b.grad[k]
                            + a.hess[ik] * b.grad[j]
                            + a.hess[jk] * b.grad[i]
                            + a.grad[i] * b.hess[jk]
                            + a.grad[j] * b.hess[ik]
                            + a.grad[k] * b.hess[ij]
                            + a.value * b.third[t];
                    }
                }
            }
        }
        out
    }

    /// Chain rule for `f ∘ self` given `f(u), f'(u), f''(u), f'''(u)` at `u = self.value()`.
    pub fn compose(&self, f: [Complex<T>; 4]) -> Self {
        let u = self;
        let n = u.n;
        let [f0, f1, f2, f3] = f;
        let mut out = Self::zeros(n, u.order);
        out.value = f0;
        if u.order >= 1 {
            for i in 0..n {
                out.grad[i] = f1 * u.grad[i];
            }
        }
        if u.order >= 2 {
            for j in 0..n {
                for i in 0..=j {
                    let h = idx2(i, j);
                    out.hess[h] = f2 * u.grad[i] * u.grad[j] + f1 * u.hess[h];
                }
            }
        }
        if u.order >= 3 {
            for k in 0..n {
                for j in 0..=k {
                    for i in 0..=j {
                        let t = idx3(i, j, k);
                        let (ij, ik, jk) = (idx2(i, j), idx2(i, k), idx2(j, k));
                        out.third[t] = f3 * u.grad[i] * u.grad[j] * u.grad[k]
                            + f2 * (u.hess[ij] * u.grad[k] + u.hess[ik] * u.grad[j] + u.hess[jk] * u.grad[i])
                            + f1 * u.third[t];
                    }
                }
            }
        }
        out
    }

    pub fn recip(&self) -> Result<Self, EvalError> {
        let u = self.value;
        if u.norm_sqr() == T::zero() {
            return Err(EvalError::PoleHit);
        }
        let one = Complex::new(T::one(), T::zero());
        let r = one / u;
        let r2 = r * r;
        let two = Complex::new(T::one() + T::one(), T::zero());
        let six = two * Complex::new(T::one() + T::one() + T::one(), T::zero());
        Ok(self.compose([r, -r2, two * r2 * r, -six * r2 * r2]))
    }

    pub fn div(&self, other: &Self) -> Result<Self, EvalError> {
        Ok(self.mul(&other.recip()?))
    }

    /// Integer power. Non-negative exponents are polynomial and defined
    /// everywhere; negative exponents hit a pole at zero.
    pub fn powi(&self, k: i32) -> Result<Self, EvalError> {
        let u = self.value;
        let mut f = [Complex::new(T::zero(), T::zero()); 4];
        let mut falling = 1i64;
        for (m, slot) in f.iter_mut().enumerate() {
            if m > 0 {
                falling *= i64::from(k) - (m as i64 - 1);
            }
            if falling == 0 {
                continue;
            }
            let p = cpowi(u, k - m as i32).ok_or(EvalError::PoleHit)?;
            let c = T::from_i64(falling).expect("small integer");
            *slot = p * c;
        }
        Ok(self.compose(f))
    }

    pub fn exp(&self) -> Self {
        let e = cexp(self.value);
        self.compose([e, e, e, e])
    }

    /// Principal-branch logarithm.
    pub fn ln(&self) -> Result<Self, EvalError> {
        let l = cln(self.value).ok_or(EvalError::BranchPoint)?;
        let one = Complex::new(T::one(), T::zero());
        let r = one / self.value;
        let two = Complex::new(T::one() + T::one(), T::zero());
        Ok(self.compose([l, r, -r * r, two * r * r * r]))
    }
}
