//! Secrecy-rate simulator for bidirectional multibeam satellite links.
//!
//! Two users exchange messages through a transparent satellite while each
//! is overheard by a nearby eavesdropper. The gateway either relays the XOR
//! of both messages in one forward-link broadcast ([`xor_scheme`]) or sends
//! each message in its own slot ([`conv_scheme`]). Both designs choose the
//! satellite feed weights and the return/forward time split to maximize the
//! sum of end-to-end secrecy rates; [`montecarlo`] averages them over fading.
//!
//! The `book/` directory next to this crate walks through the models and
//! solvers; its code listings are compiled as doc-tests of this crate.

pub mod channel_gen;
pub mod checks;
pub mod conv_scheme;
mod error;
pub mod link_budget;
pub mod montecarlo;
pub mod oracle;
pub mod rates;
pub mod solvers;
pub mod xor_scheme;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};

/// Dense complex column vector.
pub type CVector = nalgebra::DVector<num_complex::Complex64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<num_complex::Complex64>;

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/link-budget.md")]
    mod link_budget {}
    #[doc = include_str!("../../../book/src/channels.md")]
    mod channels {}
    #[doc = include_str!("../../../book/src/secrecy-rates.md")]
    mod secrecy_rates {}
    #[doc = include_str!("../../../book/src/xor-beamforming.md")]
    mod xor_beamforming {}
    #[doc = include_str!("../../../book/src/reference-scheme.md")]
    mod reference_scheme {}
    #[doc = include_str!("../../../book/src/monte-carlo.md")]
    mod monte_carlo {}
    #[doc = include_str!("../../../book/src/validation.md")]
    mod validation {}
}
