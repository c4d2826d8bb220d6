//! Numerical laboratory for the m-equivariant Schrödinger map flow from the
//! plane to the sphere, near the family of harmonic maps.
//!
//! Profiles are sampled on a grid uniform in `y = m log r`. The modules follow
//! the data flow: [`grid`] and [`geometry`] hold the state, [`energy`] and
//! [`projection`] measure it against the harmonic family, [`linops`] holds the
//! linearised operators, [`gauge`] builds the complex field `q`, and [`flow`]
//! evolves `v_t = v × a`.

pub mod banded;
pub mod baseline;
pub mod checks;
pub mod energy;
pub mod error;
pub mod families;
pub mod flow;
pub mod gauge;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod linops;
pub mod projection;
pub mod vec3;

pub use energy::EnergyReport;
pub use error::{Error, Result};
pub use flow::{FlowConfig, FlowRecord, InitialData};
pub use gauge::GaugeField;
pub use geometry::{HarmonicParams, SphereProfile};
pub use grid::{GridSpec, RadialField, RadialGrid};
pub use num_complex::Complex64;
pub use projection::HarmonicFit;
pub use vec3::Vec3;
