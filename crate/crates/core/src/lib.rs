//! Simultaneous reconstruction of the velocity and the memory kernel of a
//! Kelvin-Voigt fluid from an integral overdetermination measurement.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`]: divergence-free Fourier fields on the periodic box and
//!   the diagonal operators acting on them.
//! * [`memory`]: trapezoid convolution quadrature for the hereditary term.
//! * [`forward`]: IMEX time integration of the direct problem (full
//!   nonlinear and Oseen) and synthesis of measurement traces.
//! * [`inverse`]: assumption checks, kernel update, linear IBVP and the
//!   fixed-point iteration.
//! * [`continuation`]: window marching with history splitting for the
//!   Oseen problem.
//! * [`config`], [`io`], [`presets`], [`selftest`]: the CLI surface.

pub mod config;
pub mod continuation;
pub mod error;
pub mod forward;
pub mod inverse;
pub mod io;
pub mod memory;
pub mod presets;
pub mod selftest;
pub mod spectral;

pub use error::{Error, Result};
pub use memory::{KernelSpec, KernelTrace};
pub use spectral::{Grid, PressureField, SpectralField};
