//! Library half of the `subthz` command line: sweep orchestration, figure
//! and table emission. The binary in `main.rs` is a thin argument parser
//! over [`sweep::run_sweep`].

pub mod figures;
pub mod report;
pub mod svg;
pub mod sweep;
