//! Light cones, coding widths and directional dynamics of endomorphisms of
//! one-dimensional subshifts of finite type.

pub mod asymptotics;
pub mod builders;
pub mod coding;
pub mod definition;
pub mod error;
pub mod rule;
pub mod probe;
pub mod render;
pub mod report;
pub mod shift;
pub mod spacetime;
pub mod system;

pub use coding::{CodingVerdict, CodingWitness, Coder, ConeProfile, Level, ProfileOptions, Region};
pub use error::{Error, Resource, Result};
pub use rule::LocalRule;
pub use shift::{ShiftSpec, Symbol};
pub use system::{Budget, System};
