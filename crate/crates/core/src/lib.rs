//! Numerical laboratory for random SL2(R) products and their stationary
//! measures on the projective line.
//!
//! Modules follow the objects involved: [`proj2`] (geometry of the action),
//! [`model`] (generator measures), [`walk`] (trajectories), [`transfer`]
//! (discretized perturbed Markov operators), [`smoothing`] (Fourier-analytic
//! utilities), [`renewal`] (renewal sums and their limits) and [`fourier`]
//! (Fourier coefficients of the stationary measure).

pub mod error;
pub mod fourier;
pub mod mc;
pub mod model;
pub mod proj2;
pub mod quad;
pub mod renewal;
pub mod smoothing;
pub mod transfer;
pub mod walk;

pub use error::{Error, Result};
pub use model::{GeneratorMeasure, MomentReport, Verdict};
pub use num_complex::Complex64;
pub use proj2::{CartanTriple, Mat2, ProjPoint, ScaledMat2};
pub use walk::{LyapunovEstimate, TrajectorySampler};
