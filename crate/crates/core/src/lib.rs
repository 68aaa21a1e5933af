//! Symbolic dynamics toolkit: subshift languages, return times, Markov
//! diagrams, recurrence schedules and the Moran point constructor.

pub mod budget;
pub mod config;
pub mod diagram;
pub mod error;
pub mod exact;
pub mod interval;
pub mod moran;
pub mod recurrence;
pub mod schedule;
pub mod shift;
pub mod word;

pub use error::{Error, Result};
pub use config::{load_model, parse_model};
pub use diagram::{Decomposition, MarkovDiagram};
pub use exact::Quad;
pub use interval::AlphaBeta;
pub use moran::{MoranPoint, SeedConfig};
pub use schedule::{Ext, Schedule};
pub use shift::{GapSet, SubshiftModel};
pub use word::Word;
