//! Euler equations on centrally extended Lie algebras, at desk scale.
//!
//! Two layers share one set of conventions:
//!
//! * [`algebra`] — a finite-dimensional engine: structure constants,
//!   shifted 2-cocycles, the extended Euler equation in primal and dual
//!   form, equilibria and the quadratic stability test.
//! * [`spectral`], [`dynamics`], [`stability`] — a doubly periodic 2D
//!   pseudo-spectral vorticity solver for the shifted velocity field,
//!   with conservation monitors and the energy-Casimir a priori estimate
//!   for steady shear flows.
//!
//! [`io`] holds the file formats (field CSV/binary, algebra configs,
//! monitor tables); [`presets`] the named analytic fields and seeded
//! random initial conditions used by the CLI and the test suites.

pub mod algebra;
pub mod dynamics;
pub mod io;
pub mod presets;
pub mod spectral;
pub mod stability;
