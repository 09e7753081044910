//! Simulation of a single-qutrit quantum random number generator.
//!
//! A source emits qutrits ideally prepared in the unbiased state
//! `(ζ|+⟩ + |0⟩ + ζ³|−⟩)/√3`. Public trits choose one of the spin observables
//! `S_Z`, `S_X`, `S_Y` for each qutrit; since every outcome of each has
//! probability 1/3 on that state, the outcomes form a uniform trit stream.
//! A random fraction of qutrits is measured with `S_{1/√3,ζ³}` instead, whose
//! 0-outcome frequency estimates the source fidelity.
//!
//! Modules:
//! - [`linalg`]: fixed-size complex vectors and matrices.
//! - [`qutrit`]: states, spin observables, Born rule, concurrence, fidelity.
//! - [`biphoton`]: the symmetric two-qubit picture, Γ map and CHSH forms.
//! - [`sampler`]: seeded substreams, sources and measurement sampling.
//! - [`generator`]: the certified generation session.
//! - [`stats`]: stream statistics and estimator validation.
//! - [`verify`]: the numeric identity suite.

pub mod biphoton;
pub mod generator;
pub mod linalg;
pub mod qutrit;
pub mod sampler;
pub mod stats;
pub mod verify;
