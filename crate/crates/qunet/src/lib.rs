//! File formats, reports and the `qunet` command-line tool on top of
//! [`qunet_core`].

pub mod cli;
pub mod model;
pub mod netlist;
pub mod report;

pub use netlist::{parse, parse_with, serialize, NetlistDocument, ParseError, ParseErrors, ParseOptions};
