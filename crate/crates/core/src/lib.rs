//! Age-structured S/I/R model with nonlinear relapse of the temporarily
//! recovered: reproduction thresholds, endemic steady states, backward
//! bifurcation diagrams and an explicit upwind solver for the transport
//! system.

pub mod analytic;
pub mod bifurcation;
pub mod demography;
pub mod error;
pub mod grid;
pub mod initial;
pub mod params;
pub mod presets;
pub mod profile;
pub mod quadrature;
pub mod sweep;
pub mod steady;
pub mod thresholds;
pub mod transport;

pub use analytic::{ConstantRates, Region};
pub use demography::{mixing_density_inf, DemographicKernel, Diagnostics};
pub use error::{Error, Result};
pub use grid::{AgeGrid, AgeState, GridSpec, StateField};
pub use params::{ParameterSet, Rate};
pub use profile::AgeProfile;
pub use thresholds::{ThresholdRegion, ThresholdReport};
pub use steady::SteadyState;
pub use transport::{Mixing, SimulationOptions, Trajectory};
pub use bifurcation::{BifurcationDiagram, Branch, DiagramRow, Stability};
pub use initial::InitialCondition;
pub use presets::{preset, Preset, PresetName};
