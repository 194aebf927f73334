//! Command-line front end: channel spec files, subcommands and JSON reports.
//!
//! Exit codes: 0 on success, 2 on invalid input, 3 when a computation is
//! infeasible, over budget or refused.

pub mod commands;
pub mod error;
pub mod report;
pub mod spec;

pub use commands::{run_args, Cli, Command, Outcome};
pub use error::CliError;
pub use spec::{load_channel, parse_channel_spec, Channel, ChannelSpecFile};
