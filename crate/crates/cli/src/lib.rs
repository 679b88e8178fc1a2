//! IO, file formats, and pipeline orchestration around `commweave-core`:
//! edge-list and community-file parsing, the end-to-end reweighting
//! pipeline in both modes, the 16-configuration grid, and report
//! generation.

pub mod config;
pub mod grid;
pub mod io;
pub mod naming;
pub mod pipeline;
pub mod report;
