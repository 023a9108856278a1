//! Level-by-level certificates that the iterated Galois groups of
//! `f(x) = x^q + c` over the rationals reach their maximal Kummer layers.
//!
//! The crate is organised bottom-up:
//!
//! * [`rat_core`]: rationals, p-adic valuations, primality, factorization.
//! * [`dynamics`]: the map `x^q + c`, orbits, exact preperiodicity.
//! * [`conditions`]: the ramification criteria on primes (R and U), the
//!   exclusion set and the search for certified primes.
//! * [`irreducibility`]: irreducibility of `f^n(x) - beta` over the rationals.
//! * [`wreath`]: the iterated wreath product `[C_q]^n` and index bookkeeping.
//! * [`galois_oracle`]: brute-force `|G_1|`, `|G_2|` for `q = 2`.
//! * [`multitree`]: joint certification over several roots.
//! * [`certificate`]: JSON documents and their independent re-verification.

pub mod certificate;
pub mod conditions;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod galois_oracle;
pub mod irreducibility;
pub mod multitree;
pub mod rat_core;
pub mod wreath;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use rat_core::Rational;
