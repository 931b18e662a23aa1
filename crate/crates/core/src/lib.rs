//! Linear model predictive control: condensed QPs, Riccati terminal costs and
//! polyhedral terminal sets. The guide lives in `book/`.

pub mod cli;
pub mod format;
pub mod invariant_sets;
pub mod linalg;
pub mod lp_qp;
pub mod mpc;
pub mod polytope;
pub mod riccati;
pub mod scenario;

// The guide's code blocks run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/polytopes.md")]
    mod polytopes {}
    #[doc = include_str!("../../../book/src/solvers.md")]
    mod solvers {}
    #[doc = include_str!("../../../book/src/riccati.md")]
    mod riccati {}
    #[doc = include_str!("../../../book/src/condensing.md")]
    mod condensing {}
    #[doc = include_str!("../../../book/src/invariant_sets.md")]
    mod invariant_sets {}
    #[doc = include_str!("../../../book/src/closed_loop.md")]
    mod closed_loop {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
