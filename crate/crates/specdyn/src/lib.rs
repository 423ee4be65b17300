//! File formats, the invariant suite and the `specdyn` command-line driver
//! built on [`specdyn_core`].

pub mod cli;
pub mod io;
pub mod verify;
