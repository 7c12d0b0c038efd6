//! Power allocation between channel-estimation pilots and energy beams in a
//! wirelessly-powered sensor network.

pub mod cli;
pub mod config;
pub mod csv;
pub mod eh;
pub mod error;
pub mod peb;
pub mod sim;
pub mod solver;
pub mod special;
pub mod units;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/harvesting.md")]
    mod harvesting {}
    #[doc = include_str!("../../../book/src/gains.md")]
    mod gains {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
