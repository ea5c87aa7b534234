//! Classical and Galilean-modified Maxwell solvers on periodic grids.
//!
//! The crate integrates both systems with RK4 on collocated central
//! differences ([`stepper`]), boosts stored trajectories into a moving frame and
//! measures how well each system's equations hold there ([`galilean`]), and
//! provides the closed-form point-charge fields ([`kernels`]), identity checks
//! ([`identities`]) and the two-charge force comparison ([`two_charge`]).
//! Scenario files for the command-line runner are parsed by [`scenario`].
//!
//! The guide in `book/` walks through each part with runnable examples.

pub mod classical;
pub mod constants;
pub mod dump;
pub mod error;
pub mod field;
pub mod galilean;
pub mod grid;
pub mod identities;
pub mod kernels;
pub mod modified;
pub mod ops;
pub mod scenario;
pub mod sources;
pub mod spectral;
pub mod state;
pub mod stepper;
pub mod two_charge;
pub mod vec3;

pub use error::{Error, Result};

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

// Book chapters are compiled as doctests so their snippets stay in sync.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/grid.md")]
    mod grid {}
    #[doc = include_str!("../../../book/src/solvers.md")]
    mod solvers {}
    #[doc = include_str!("../../../book/src/galilean.md")]
    mod galilean {}
    #[doc = include_str!("../../../book/src/identities.md")]
    mod identities {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/acceptance.md")]
    mod acceptance {}
}
