//! Bundled experiments: extinction, bistability from large and small
//! initial infections, endemic convergence, and an age-dependent example.

use serde::{Deserialize, Serialize};

use crate::analytic::ConstantRates;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::initial::InitialCondition;
use crate::params::{ParameterSet, Rate};
use crate::profile::AgeProfile;
use crate::transport::auto_grid;

pub const PRESET_MAX_AGE: f64 = 100.0;
/// Δa = 0.1. The boundary layer near `a = 0` has rates around 75/year; a
/// coarser age step biases `B` by several percent.
pub const PRESET_AGE_INTERVALS: usize = 1000;
pub const PRESET_MAX_TIME: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetName {
    Extinction,
    BistableHigh,
    BistableLow,
    Endemic,
    Agedep,
}

impl PresetName {
    pub const ALL: [PresetName; 5] = [
        PresetName::Extinction,
        PresetName::BistableHigh,
        PresetName::BistableLow,
        PresetName::Endemic,
        PresetName::Agedep,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PresetName::Extinction => "extinction",
            PresetName::BistableHigh => "bistable-high",
            PresetName::BistableLow => "bistable-low",
            PresetName::Endemic => "endemic",
            PresetName::Agedep => "agedep",
        }
    }
}

impl std::fmt::Display for PresetName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PresetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PresetName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown preset '{s}' (expected one of extinction, bistable-high, bistable-low, endemic, agedep)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: PresetName,
    pub summary: &'static str,
    pub params: ParameterSet,
    pub grid: GridSpec,
    pub initial: InitialCondition,
    /// For the bistable pair, the other member's initial condition.
    pub companion: Option<InitialCondition>,
}

/// μ = 0.0125, φ = 60, γ = 13, ρ = 76.65 with the given β.
pub fn reference_rates(beta: f64) -> ConstantRates {
    ConstantRates::new(0.0125, beta, 60.0, 13.0, 76.65).expect("valid reference rates")
}

fn large_bump() -> InitialCondition {
    InitialCondition::bump(0.99, 50.0, 40.0).expect("valid bump")
}

fn small_bump() -> InitialCondition {
    large_bump().scaled(1e-3).expect("valid bump")
}

fn table(knots: &[(f64, f64)]) -> AgeProfile {
    AgeProfile::table(knots.to_vec()).expect("valid bundled table")
}

/// Illustrative age-dependent rates; relapse exceeds transmission in the
/// middle age groups.
pub fn age_dependent_params() -> ParameterSet {
    ParameterSet::from_constants(&reference_rates(60.0))
        .with_rate(
            Rate::Beta,
            table(&[(0.0, 20.0), (15.0, 80.0), (30.0, 100.0), (60.0, 40.0), (100.0, 20.0)]),
        )
        .with_rate(
            Rate::Rho,
            table(&[(0.0, 40.0), (20.0, 60.0), (40.0, 140.0), (70.0, 150.0), (100.0, 60.0)]),
        )
        .with_rate(Rate::Phi, table(&[(0.0, 50.0), (50.0, 70.0)]))
        .with_rate(Rate::Contact, table(&[(0.0, 0.5), (20.0, 1.5), (60.0, 1.0), (100.0, 0.5)]))
}

pub fn preset(name: PresetName) -> Result<Preset> {
    let constants = |beta: f64| ParameterSet::from_constants(&reference_rates(beta));
    let (summary, params, initial, companion) = match name {
        PresetName::Extinction => (
            "RC < 1: every infection dies out",
            constants(0.011),
            InitialCondition::bump(0.5, 20.0, 5.0)?,
            None,
        ),
        PresetName::BistableHigh => (
            "R0 < 1 < RC, large initial infection: converges to the upper endemic state",
            constants(60.0),
            large_bump(),
            Some(small_bump()),
        ),
        PresetName::BistableLow => (
            "R0 < 1 < RC, small initial infection: dies out",
            constants(60.0),
            small_bump(),
            Some(large_bump()),
        ),
        PresetName::Endemic => (
            "R0 > 1: converges to the unique endemic state",
            constants(120.0),
            InitialCondition::bump(0.5, 20.0, 5.0)?,
            None,
        ),
        PresetName::Agedep => (
            "age-dependent rates with relapse above transmission in middle age",
            age_dependent_params(),
            InitialCondition::bump(0.5, 20.0, 5.0)?,
            None,
        ),
    };
    let grid = auto_grid(&params, PRESET_MAX_AGE, PRESET_MAX_TIME, PRESET_AGE_INTERVALS)?;
    Ok(Preset {
        name,
        summary,
        params,
        grid,
        initial,
        companion,
    })
}
