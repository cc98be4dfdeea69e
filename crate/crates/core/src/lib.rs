//! Split-step quantum walks on `ℤ` with sparse reflectors.
//!
//! The walk `W = S₊ C₁ S₋ C₂` acts on `ℓ²(ℤ) ⊗ ℂ²`. This crate evolves it,
//! measures spreading, evaluates closed-form velocity bounds for coins that
//! become (nearly) reflecting along a sparse subsequence, cross-checks those
//! formulas against dense truncated matrices, and runs seeded random-coin
//! experiments.
//!
//! ```
//! use qwalk_lab::{coins::CoinSequence, lattice::{Spin, WalkState}, walk};
//!
//! let w = walk::SplitStepWalk::symmetric(CoinSequence::hadamard());
//! let psi = walk::evolve(&w, &WalkState::basis(0, Spin::Plus), 100).state;
//! assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
//! ```

pub mod bounds;
pub mod cli;
pub mod coins;
pub mod config;
pub mod dense;
pub mod error;
pub mod lattice;
pub mod observables;
pub mod random;
pub mod runner;
pub mod subsequence;
pub mod validation;
pub mod walk;

pub use coins::{CoinSequence, LocalCoin};
pub use error::{Error, Result};
pub use lattice::{CmvIndex, SiteIndex, Spin, WalkState};
pub use subsequence::SparseSubsequence;
pub use walk::SplitStepWalk;
