pub mod basis;
pub mod certify;
pub mod cli;
pub mod error;
pub mod galerkin;
pub mod pde;
pub mod pi;
pub mod poly;
pub mod simulate;
pub mod spec;

/// The guide's chapters, compiled as doctests so their snippets stay current.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/pi-operators.md")]
    struct PiOperators;
    #[doc = include_str!("../../../book/src/conversion.md")]
    struct Conversion;
    #[doc = include_str!("../../../book/src/galerkin.md")]
    struct Galerkin;
    #[doc = include_str!("../../../book/src/certification.md")]
    struct Certification;
    #[doc = include_str!("../../../book/src/simulation.md")]
    struct Simulation;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
