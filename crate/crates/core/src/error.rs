use std::fmt;

use crate::shift::Symbol;

/// Which resource ran out during a bounded computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Resource {
    TableEntries,
    AutomatonStates,
    WallClock,
    CodingScan,
}

impl fmt::Display for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Resource::TableEntries => "table entries",
            Resource::AutomatonStates => "automaton states",
            Resource::WallClock => "wall clock",
            Resource::CodingScan => "coding scan length",
        };
        f.write_str(name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shift space is empty")]
    EmptyShift,
    #[error("shift space is finite")]
    FiniteShift,
    #[error("alphabet size {0} is out of range (2..=255)")]
    BadAlphabet(usize),
    #[error("symbol {symbol} is not in the alphabet of size {alphabet}")]
    BadSymbol { symbol: usize, alphabet: usize },
    #[error("word {word:?} is not in the language")]
    IllegalWord { word: Vec<Symbol> },
    #[error("word of length {got} is too short, need at least {need}")]
    WordTooShort { got: usize, need: usize },
    #[error("window [{lo}, {hi}] is invalid")]
    BadWindow { lo: i64, hi: i64 },
    #[error("rule table has no entry for allowed word {word:?}")]
    MissingEntry { word: Vec<Symbol> },
    #[error("rule does not map into the shift: {image:?} is the image of {word:?}")]
    NotIntoX { word: Vec<Symbol>, image: Vec<Symbol> },
    #[error("rule is not surjective; {witness:?} has no preimage")]
    NotSurjective { witness: Option<Vec<Symbol>> },
    #[error("table of {needed} entries exceeds the cap of {cap}")]
    TableBlowup { needed: u128, cap: u128 },
    #[error("budget exceeded: {0}")]
    BudgetExceeded(Resource),
    #[error("power iteration did not converge")]
    NonConvergence,
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("profile must reach n >= {need}, has {got}")]
    ProfileTooShort { need: usize, got: usize },
    #[error("rules do not commute")]
    NotCommuting,
    #[error("invariant violated: {0}")]
    InvariantViolated(String),
    #[error("base row of length {got} is too short for {rows} rows (need {need})")]
    BaseTooShort { got: usize, rows: usize, need: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
