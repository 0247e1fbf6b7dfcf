//! Gaussian-state toolkit for resonant graviton detectors.
//!
//! A gravitational-wave mode and a phononic detector mode interact through a
//! beamsplitter coupling. This crate evolves Gaussian states of the pair,
//! evaluates detector excitation probabilities (loop hafnian and generating
//! function routes), second-order coherence in its ideal, noisy-detector and
//! open-system variants, and the homodyne intensity-correlation tomography
//! scheme. A truncated Fock-space simulator in [`fock`] serves as brute-force
//! ground truth for all closed forms.
//!
//! Conventions: ħ = 1, vacuum quadrature variance ½, quadrature ordering
//! `(x₁, p₁, …)`, ladder ordering `(a₁, a₁†, …)`.
//!
//! All analytic modules are generic over the scalar type through [`Real`];
//! the `*64` aliases below fix it to `f64`.

// `!(x > 0)` style guards are used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlations;
pub mod counting;
pub mod dynamics;
mod error;
pub mod fock;
pub mod gaussian;
pub mod physical;
mod real;
pub mod tomography;

pub use error::{Error, Result};
pub use real::{lit, Real};

pub use correlations::{G2Report, G2Variant, MomentRequest, Ordering};
pub use counting::{CountingMatrices, ProbabilityTable, Split};
pub use dynamics::{CouplingContext, OpenChannelParams};
pub use gaussian::{GaussianState, GwSignalParams, LadderMoments, PhysicalityReport, SymplecticMap};
pub use physical::{DetectorConfig, PhysicalConstants};
pub use tomography::{LocalOscillator, ReconstructionResult, TomographyTerms};

/// Complex scalar used for ladder-basis quantities.
pub type Complex<T> = nalgebra::Complex<T>;

pub type GaussianState64 = GaussianState<f64>;
pub type LadderMoments64 = LadderMoments<f64>;
pub type SymplecticMap64 = SymplecticMap<f64>;
pub type GwSignalParams64 = GwSignalParams<f64>;
pub type Complex64 = Complex<f64>;
pub type CountingMatrices64 = CountingMatrices<f64>;
pub type G2Report64 = G2Report<f64>;
pub type CouplingContext64 = CouplingContext<f64>;
pub type OpenChannelParams64 = OpenChannelParams<f64>;
pub type LocalOscillator64 = LocalOscillator<f64>;
pub type TomographyTerms64 = TomographyTerms<f64>;
pub type ReconstructionResult64 = ReconstructionResult<f64>;
