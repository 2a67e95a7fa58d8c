//! Upper bounds on distance-based entanglement measures.
//!
//! For a state `ρ` and a convex set `C` of separable states (fully separable,
//! bi-separable, or product across a fixed partition), the measure
//! `E(ρ) = inf_{σ ∈ C} D(ρ, σ)` is bounded from above by running a Gilbert
//! (conditional-gradient) iteration inside `C`. Two distances are supported:
//! the squared Bures metric and the quantum relative entropy (in bits).
//!
//! ```no_run
//! use entbound::{gilbert, states, MeasureKind, PartitionClass};
//!
//! let rho = states::ghz(2).unwrap();
//! let cfg = gilbert::GilbertConfig::default();
//! let best = gilbert::gilbert_best_of(
//!     &rho,
//!     MeasureKind::RelativeEntropy,
//!     &PartitionClass::FullySeparable,
//!     &cfg,
//!     &Default::default(),
//!     42,
//! )
//! .unwrap();
//! println!("E_R <= {}", best.best_run().best_value);
//! ```

pub mod error;
pub mod extremal;
pub mod gilbert;
pub mod qmatrix;
pub mod rng;
pub mod states;
pub mod tensor;

pub use error::{Error, Invariant, Result};
pub use extremal::{OracleConfig, PartitionClass, ProductState};
pub use gilbert::{GilbertConfig, GilbertRun, RunStatus, StepDirection};
pub use qmatrix::{CMatrix, CVector, DensityMatrix, MeasureKind, TargetState};
