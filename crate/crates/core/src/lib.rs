//! Casimir free energies between dielectric bodies immersed in an electrolyte.
//!
//! The free energy is split into three pieces that behave very differently:
//!
//! * the **universal** zero-frequency transverse-magnetic term, which only
//!   depends on temperature and geometry and is not screened by the ions;
//! * the **longitudinal** zero-frequency term, screened over the Debye length;
//! * the **non-universal** sum over nonzero Matsubara frequencies, which
//!   depends on the permittivities and is small for index-matched media.
//!
//! Planar half-spaces and slabs are handled by [`planar`]; two spheres and
//! two parallel cylinders by [`curved`]. [`scenario`] drives parameter sweeps
//! from files and emits CSV.

pub mod constants;
pub mod curved;
pub mod dielectric;
mod error;
pub mod numerics;
pub mod planar;
pub mod scenario;
pub mod thermal;
pub mod units;

pub use curved::{ChannelTruncation, CylinderPair, ScatteringResult, SpherePair};
pub use dielectric::{Electrolyte, IonSpecies, MaterialModel, OscillatorTerm, RotationalTerm};
pub use error::{CasimirError, Result};
pub use numerics::{ConvergenceReport, TruncationConfig};
pub use planar::{EnergyBreakdown, PlanarGeometry, Polarization};
pub use thermal::ThermalContext;
