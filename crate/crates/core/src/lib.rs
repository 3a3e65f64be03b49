//! Continuous-domain 1-D linear inverse problems with Tikhonov (L2) and
//! generalized total-variation (gTV) regularization.

pub mod error;
pub mod experiments;
pub mod gtv;
pub mod io;
pub mod lasso;
pub mod measurements;
pub mod metrics;
pub mod operators;
pub mod quadrature;
pub mod signals;
pub mod simplex;
pub mod spline;
pub mod tikhonov;

pub use error::{Error, Result};
pub use measurements::{GridSpec, MeasurementModel};
pub use nalgebra;
pub use operators::Operator;
pub use spline::SplineSignal;
