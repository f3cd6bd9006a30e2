use serde::{Deserialize, Serialize};

use crate::analytic::ConstantRates;
use crate::error::{Error, Result};
use crate::profile::{merge_knots, AgeProfile};

/// Model rates (1/year) and the constant birth rate Λ (persons/year).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    /// Exit rate μ(a).
    pub mu: AgeProfile,
    /// Transmission rate β(a).
    pub beta: AgeProfile,
    /// Treatment rate φ(a).
    pub phi: AgeProfile,
    /// Recovery rate γ(a).
    pub gamma: AgeProfile,
    /// Relapse rate ρ(a) of the temporarily recovered.
    pub rho: AgeProfile,
    /// Per-capita contact rate c(a).
    pub contact: AgeProfile,
    pub birth_rate: f64,
}

impl ParameterSet {
    pub fn from_constants(rates: &ConstantRates) -> Self {
        let c = |v: f64| AgeProfile::constant(v).expect("validated constant rate");
        Self {
            mu: c(rates.mu),
            beta: c(rates.beta),
            phi: c(rates.phi),
            gamma: c(rates.gamma),
            rho: c(rates.rho),
            contact: c(1.0),
            birth_rate: 1.0,
        }
    }

    /// Returns the constant-rate view when every profile is constant.
    pub fn constant_rates(&self) -> Option<ConstantRates> {
        Some(ConstantRates {
            mu: self.mu.as_constant()?,
            beta: self.beta.as_constant()?,
            phi: self.phi.as_constant()?,
            gamma: self.gamma.as_constant()?,
            rho: self.rho.as_constant()?,
        })
        .filter(|_| self.contact.as_constant().is_some())
    }

    /// φ + γ as a single profile.
    pub fn outflow(&self) -> AgeProfile {
        self.phi.sum(&self.gamma)
    }

    /// All knot ages of the rate profiles inside `[0, end]`.
    pub fn knots(&self, end: f64) -> Vec<f64> {
        merge_knots(
            &[
                &self.mu,
                &self.beta,
                &self.phi,
                &self.gamma,
                &self.rho,
                &self.contact,
            ],
            end,
        )
    }

    /// Errors unless Λ > 0 and μ > 0 everywhere.
    pub fn check(&self) -> Result<()> {
        if !(self.birth_rate.is_finite() && self.birth_rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "birth rate must be > 0, got {}",
                self.birth_rate
            )));
        }
        if self.mu.min_on(f64::INFINITY) <= 0.0 {
            return Err(Error::InvalidParameter(
                "exit rate mu must be strictly positive at every age".into(),
            ));
        }
        Ok(())
    }

    /// Maximum over `[0, end]` of a pointwise combination of profiles, taken
    /// over the union of their knots (exact for piecewise-linear data).
    pub fn max_combined<F>(&self, end: f64, f: F) -> f64
    where
        F: Fn(&ParameterSet, f64) -> f64,
    {
        let mut ages = self.knots(end);
        ages.push(0.0);
        ages.push(end);
        ages.into_iter().map(|a| f(self, a)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// The same parameter set with one named rate replaced or rescaled.
    pub fn with_rate(&self, which: Rate, profile: AgeProfile) -> Self {
        let mut out = self.clone();
        *out.rate_mut(which) = profile;
        out
    }

    pub fn rate(&self, which: Rate) -> &AgeProfile {
        match which {
            Rate::Mu => &self.mu,
            Rate::Beta => &self.beta,
            Rate::Phi => &self.phi,
            Rate::Gamma => &self.gamma,
            Rate::Rho => &self.rho,
            Rate::Contact => &self.contact,
        }
    }

    fn rate_mut(&mut self, which: Rate) -> &mut AgeProfile {
        match which {
            Rate::Mu => &mut self.mu,
            Rate::Beta => &mut self.beta,
            Rate::Phi => &mut self.phi,
            Rate::Gamma => &mut self.gamma,
            Rate::Rho => &mut self.rho,
            Rate::Contact => &mut self.contact,
        }
    }
}

/// Identifies one of the rate profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rate {
    Mu,
    Beta,
    Phi,
    Gamma,
    Rho,
    Contact,
}

impl std::str::FromStr for Rate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mu" => Ok(Rate::Mu),
            "beta" => Ok(Rate::Beta),
            "phi" => Ok(Rate::Phi),
            "gamma" => Ok(Rate::Gamma),
            "rho" => Ok(Rate::Rho),
            "contact" => Ok(Rate::Contact),
            other => Err(Error::InvalidParameter(format!("unknown rate '{other}'"))),
        }
    }
}

impl std::fmt::Display for Rate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Rate::Mu => "mu",
            Rate::Beta => "beta",
            Rate::Phi => "phi",
            Rate::Gamma => "gamma",
            Rate::Rho => "rho",
            Rate::Contact => "contact",
        };
        f.write_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(k: Vec<(f64, f64)>) -> AgeProfile {
        AgeProfile::table(k).unwrap()
    }

    #[test]
    fn constant_view_requires_all_constant() {
        let rates = ConstantRates::new(0.0125, 60.0, 60.0, 13.0, 76.65).unwrap();
        let p = ParameterSet::from_constants(&rates);
        assert_eq!(p.constant_rates(), Some(rates));
        let q = p.with_rate(Rate::Beta, table(vec![(0.0, 1.0), (10.0, 2.0)]));
        assert_eq!(q.constant_rates(), None);
    }

    #[test]
    fn check_rejects_zero_mu_and_births() {
        let rates = ConstantRates::new(0.0125, 60.0, 60.0, 13.0, 76.65).unwrap();
        let p = ParameterSet::from_constants(&rates);
        assert!(p.check().is_ok());
        let q = p.with_rate(Rate::Mu, table(vec![(0.0, 0.01), (50.0, 0.0)]));
        assert!(q.check().is_err());
        let mut r = p.clone();
        r.birth_rate = 0.0;
        assert!(r.check().is_err());
    }

    #[test]
    fn combined_max_checks_every_knot() {
        let rates = ConstantRates::new(0.0125, 60.0, 60.0, 13.0, 76.65).unwrap();
        let p = ParameterSet::from_constants(&rates)
            .with_rate(Rate::Rho, table(vec![(0.0, 10.0), (30.0, 100.0), (80.0, 20.0)]));
        let m = p.max_combined(100.0, |p, a| p.phi.at(a) + p.gamma.at(a) + p.rho.at(a));
        assert_eq!(m, 173.0);
    }

    #[test]
    fn rate_names_round_trip() {
        for r in [Rate::Mu, Rate::Beta, Rate::Phi, Rate::Gamma, Rate::Rho, Rate::Contact] {
            assert_eq!(r.to_string().parse::<Rate>().unwrap(), r);
        }
        assert!("delta".parse::<Rate>().is_err());
    }
}
