//! Runtime experiments for the (μ,λ) EA and the (μ+λ) EA on jump functions.
//!
//! The crate is organised bottom-up:
//!
//! * [`bitstring`]: bit-packed search points, seedable randomness and
//!   standard bit mutation (a per-bit reference sampler and a fast
//!   binomial-count sampler with the same offspring law).
//! * [`benchmarks`]: OneMax, Jump, Cliff and LeadingOnes.
//! * [`engine`]: the evolutionary algorithm with exact evaluation accounting.
//! * [`theory`]: closed-form runtime bounds, each paired with an itemized
//!   validity predicate.
//! * [`drift`]: potential-function instrumentation, one-generation transition
//!   probes and an exact Markov-chain oracle for the (1+1) EA.
//! * [`experiment`]: trial orchestration, summaries, CSV/JSON output and the
//!   bound-versus-experiment comparison.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmarks;
pub mod bitstring;
pub mod drift;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod stats;
pub mod theory;

pub use benchmarks::{Fitness, Objective};
pub use bitstring::{mutate, mutate_fast, random_bitstring, BitString, Mutator, RandomSource};
pub use engine::{run, select_best, EAConfig, Population, RunResult, Selection, TiePolicy};
pub use error::{Error, Result};
