//! Random orthonormal bases, orbital moments of Hermitian matrices under Haar
//! conjugation, and quantum-ergodicity experiments on flat tori.
//!
//! The crate is organised bottom-up:
//!
//! * [`sympoly`]: partitions, elementary/complete/power-sum/Schur polynomials.
//! * [`haar`]: seeded Haar unitary sampling and Monte-Carlo estimators.
//! * [`orbit`]: the diagonal moment map and closed-form orbital moments.
//! * [`weingarten`]: exact Haar integrals of matrix-entry monomials.
//! * [`qe`]: quantum variance along eigenspace sequences.
//! * [`torus`]: lattice shells and compressed observables on flat tori.

pub mod error;
pub mod haar;
pub mod linalg;
pub mod orbit;
pub mod qe;
pub mod report;
pub mod stats;
pub mod sympoly;
pub mod torus;
pub mod weingarten;

pub use error::{Error, Result};
pub use haar::HaarSampler;
pub use linalg::CMatrix;
pub use num_complex::Complex64;
pub use orbit::{center_spectrum, MomentReport, SpectrumVector};
pub use qe::{EmpiricalMeasure, HermitianCompression, Reference, SequenceRun};
pub use report::{Claim, Provenance};
pub use stats::McEstimate;
pub use sympoly::Partition;
pub use torus::{LatticeShell, SphereFunction, TorusObservable};
