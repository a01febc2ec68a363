//! Unitary quantum simulators for stationary stochastic processes.
//!
//! Given the ε-machine of a discrete-time stationary process, this crate
//! constructs a q-simulator: a set of quantum memory states `|σ_i⟩` and a
//! single orthogonal operator `U` whose repeated application emits symbols
//! with exactly the process statistics while the internal memory entropy
//! stays at the quantum statistical complexity `C_q` throughout.
//!
//! The pipeline:
//!
//! 1. [`machine`] — parse/validate the ε-machine, stationary distribution,
//!    classical complexities, word probabilities, reference sampling.
//! 2. [`gram`] — solve the self-consistency equations for the memory-state
//!    overlaps, and analyze convergence through the pair-space transfer
//!    matrix ζ (staged complexities `C̃_q(L)`, spectral diagnostics,
//!    cryptic-order plateau estimation).
//! 3. [`quantum`] — build the memory states, the steady-state operator φ
//!    with its entropies, and the one-step unitary; verify the construction.
//! 4. [`simulate`] — run the simulator step by step, build exact L-step
//!    joint states, and compare sampled statistics against the classical
//!    ground truth.
//! 5. [`sweep`] — plot-ready complexity curves and (p, q) parameter
//!    surfaces for the upset-gambler family.
//!
//! # Example
//!
//! ```
//! use qsim_core::machine::EpsilonMachine;
//! use qsim_core::quantum::QuantumModel;
//! use qsim_core::simulate::{init_simulator, Start};
//!
//! let model = QuantumModel::build(EpsilonMachine::upset_gambler(0.7, 0.8).unwrap()).unwrap();
//! assert!(model.verification(1e-10).passed());
//!
//! let mut sim = init_simulator(&model, Start::Stationary, 7).unwrap();
//! let word = sim.run(16).unwrap();
//! assert_eq!(word.len(), 16);
//! ```
//!
//! # Parallelism
//!
//! Batch sampling and parameter sweeps are data-parallel via rayon under
//! the default `parallel` feature. Disabling it
//! (`--no-default-features`) yields a fully sequential build; seeds are
//! derived per work item, so results are bit-identical in both modes.

pub mod error;
pub mod gram;
pub mod linalg;
pub mod machine;
pub mod parallel;
pub mod quantum;
pub mod rng;
pub mod simulate;
pub mod spec_doc;
pub mod sweep;

pub use error::{QsimError, Result};
