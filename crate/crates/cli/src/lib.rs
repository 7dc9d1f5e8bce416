//! Command-line front end for the `symext` library.

pub mod args;
pub mod commands;
pub mod decide;
pub mod io;
pub mod verdict;
