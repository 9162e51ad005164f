//! Numerical potential theory on the flat torus.
//!
//! The crate evaluates Riesz and product-profile kernels on the flat torus
//! `T^d = (R / 2πZ)^d` (with the circle and the 2-sphere as auxiliary
//! spaces), computes potentials and energies of discrete and gridded
//! measures, scans kernels for the submean value inequality, minimizes
//! discrete N-point energies, and computes multivariate cosine Fourier
//! coefficients of kernel profiles.
//!
//! All randomness is drawn from explicitly seeded counter-based streams
//! (see [`rng`]), and every reduction is performed in a fixed order, so
//! results are reproducible across runs and thread counts.

pub mod energy;
pub mod error;
pub mod fourier;
pub mod geometry;
pub mod kernels;
pub mod measures;
pub mod minimize;
pub mod quadrature;
pub mod rng;
pub mod subharmonic;
pub mod sum;


pub use energy::{DiagonalPolicy, EnergyReport};
pub use error::{Error, Result};
pub use fourier::FourierReport;
pub use geometry::{Point, Space};
pub use kernels::{KernelFamily, KernelSpec, Profile, ProfileSpec, RieszCertificate};
pub use measures::{DiscreteMeasure, GridMeasure, Measure};
pub use minimize::{MinimizeConfig, MinimizeResult, UniformityMetrics};
pub use subharmonic::{Quadrature, SubharmonicityReport, SubmeanSample, Verdict};


