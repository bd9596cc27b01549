//! Executable classification of financial markets up to isomorphism.
//!
//! The crate covers three families of markets:
//!
//! * finite one-period markets, classified by the joint law of their
//!   Radon–Nikodym derivatives together with conditional atom profiles
//!   ([`finprob`], [`onep`], [`rearrange`]);
//! * Gaussian (Markowitz) markets, reduced to the `(α, β, γ)` normal form
//!   ([`gauss`]);
//! * continuous-time diffusion markets, where the absolute market price of
//!   risk is the local invariant and deterministic-AMPR markets are mapped to
//!   canonical Bachelier form ([`ctsmkt`]).
//!
//! [`statcheck`] holds the statistical gates used to turn the constructive
//! results into pass/fail checks, and [`verify`] bundles them per market kind.

pub mod ctsmkt;
pub mod error;
pub mod finprob;
pub mod gauss;
pub mod onep;
pub mod rearrange;
pub mod statcheck;
pub mod tol;
pub mod verify;

pub use error::{Error, Result};
