//! Counting, asymptotics, enumeration and Boltzmann sampling of lambda
//! terms in De Bruijn notation under a parametrised size model.
//!
//! A size model `(a, b, c, d)` charges `a + b*s` for a variable with `s`
//! successors (index `s + 1`), `c` for an abstraction and `d` for an
//! application. For closed terms of size `n`,
//!
//! ```text
//! L_{0,n} ~ C n^(-3/2) rho^(-n)
//! ```
//!
//! where `rho` is the smallest positive root of
//! `(1 - z^b)(1 - z^c)^2 - 4 z^(a+d)`.

pub mod asymptotics;
pub mod cli;
pub mod counting;
pub mod sampler;
pub mod size_model;
pub mod term;

pub use size_model::{Preset, SizeSpec, SpecError};
pub use term::{Node, Term};

use thiserror::Error;

/// Any error raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Parse(#[from] term::ParseError),
    #[error(transparent)]
    Decode(#[from] term::DecodeError),
    #[error(transparent)]
    Packed(#[from] term::PackedError),
    #[error(transparent)]
    Count(#[from] counting::CountError),
    #[error(transparent)]
    Cache(#[from] counting::cache::CacheError),
    #[error(transparent)]
    Asymptotics(#[from] asymptotics::AsymptoticsError),
    #[error(transparent)]
    Sampler(#[from] sampler::SamplerError),
}
