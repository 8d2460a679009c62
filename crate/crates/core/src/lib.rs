//! Numerics for a spin coupled to a highly excited oscillator.
//!
//! The model is H = ΔE·Sz + a†a + U(a + a†)·2Sx in units ħ = ω₀ = 1. The
//! crate covers the Bloch-Siegert-shifted transition energy, the
//! multiphoton anticrossings of the full Hamiltonian, the rotated-frame
//! coupling integrals, and three-state resonance dynamics.
//!
//! ```
//! use bloch_siegert::dressed::{dressed_energy_series, resonance_g, ResonanceSpec};
//!
//! let g = resonance_g(11.0, ResonanceSpec::new(15).unwrap(), 100_000).unwrap();
//! assert!((g - 0.3386).abs() < 1e-3);
//! assert!((dressed_energy_series(0.1) - 1.0388).abs() < 1e-12);
//! ```

// index loops mirror the band algebra they implement
#![allow(clippy::needless_range_loop)]
// `!(x > 0.0)` is meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dressed;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod hamiltonian;
pub mod model;
pub mod quadrature;
pub mod rotated1d;
pub mod spectroscopy;

pub use error::{Error, Result};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use model::{BasisIndex, ModelParams, Spin};

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/dressed.md")]
    mod dressed {}
    #[doc = include_str!("../../../book/src/spectrum.md")]
    mod spectrum {}
    #[doc = include_str!("../../../book/src/anticrossings.md")]
    mod anticrossings {}
    #[doc = include_str!("../../../book/src/rotated.md")]
    mod rotated {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
