//! Special complex, special symplectic and special Kähler geometry built
//! from holomorphic 1-forms and prepotentials, together with numerical
//! verification of the identities these structures satisfy.
//!
//! The numerical core is generic over the real scalar ([`Real`], implemented
//! for `f32` and `f64`); the aliases below fix it to `f64`, which is what
//! the verification tolerances are calibrated for.

pub mod charts;
pub mod cotangent;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod linalg;
pub mod scalar;
pub mod verify;

pub use error::{Error, EvalError, ParseError, Result};
pub use expr::{eval_jet, parse_expression, Expr, HoloJet};
pub use scalar::Real;

pub type Jet = expr::HoloJet<f64>;
pub type Spec = charts::ManifoldSpec<f64>;
pub type Chart = charts::ChartPoint<f64>;
