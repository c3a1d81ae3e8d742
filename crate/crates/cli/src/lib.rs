//! Stream parsing and replay for the `fieldrank` command.

pub mod run;
pub mod stream;

pub use run::{run, Mode, Options, RunError, RunOutput};
pub use stream::{parse, Kind, Op, ParseError, UpdateStream};
