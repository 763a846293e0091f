//! Transition sets of finite games and the prices measured over them.

pub mod coordination;
pub mod degree;
pub mod efficiency;
pub mod error;
pub mod fixtures;
pub mod game;
pub mod io;
pub mod routing;
pub mod scalar;
pub mod structured;
pub mod transition;

pub use error::{Error, Result};
pub use game::{Convention, Game, Profile, SolutionSet, Welfare};
pub use scalar::{Rational, Scalar};
pub use transition::{DegreeMode, StableVariant, TransitionSet};
