//! Reproduction thresholds of the infection-free state: R0, RC, the
//! Euler–Lotka function G(λ) and its dominant real root.
//!
//! All three are `∫ p∞(a) J(a) da` with `J(a) = ∫₀ᵃ β(h) e^{-∫ₕᵃ κ} dh` for
//! `κ = φ + γ + λ` (κ = 0 for RC). `J` solves `J' = β - κJ`, `J(0) = 0`,
//! which is swept forward with the outer integral accumulated alongside.

use serde::{Deserialize, Serialize};

use crate::demography::DemographicKernel;
use crate::error::{Error, Result};
use crate::params::ParameterSet;
use crate::sweep::{self, Local, Mesh, MeshSpec};

/// Relative tolerance for level doubling in the nested integrals.
pub const QUADRATURE_TOL: f64 = 1e-8;
const MAX_LEVEL: u32 = 6;
const BRACKET_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdRegion {
    /// RC ≤ 1: the infection-free state attracts everything.
    Extinction,
    /// R0 ≤ 1 < RC: endemic states may coexist with the infection-free one.
    BistableCandidate,
    /// R0 > 1.
    Endemic,
}

impl std::fmt::Display for ThresholdRegion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ThresholdRegion::Extinction => "extinction",
            ThresholdRegion::BistableCandidate => "bistable-candidate",
            ThresholdRegion::Endemic => "endemic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub r0: f64,
    pub rc: f64,
    /// Dominant real root of `G(λ) = 1`; `-∞` when β vanishes identically.
    pub lambda_star: f64,
    pub region: ThresholdRegion,
}

#[derive(Clone, Copy)]
enum Damping {
    None,
    Outflow(f64),
}

/// One sweep of the nested integral at a given mesh level.
fn nested_at(params: &ParameterSet, kernel: &DemographicKernel, damping: Damping, level: u32) -> sweep::SweepOutput {
    let end = kernel.max_age();
    let (shift, damped) = match damping {
        Damping::None => (0.0, false),
        Damping::Outflow(lambda) => (lambda, true),
    };
    let (fast, growth) = if damped {
        let hi = params.max_combined(end, |p, a| p.phi.at(a) + p.gamma.at(a)) + shift;
        let lo = -params.max_combined(end, |p, a| -(p.phi.at(a) + p.gamma.at(a))) + shift;
        (hi.abs().max(lo.abs()), (-lo).max(0.0))
    } else {
        (0.0, 0.0)
    };
    let mut breaks = params.knots(end);
    breaks.extend(kernel.knots());
    let mesh = Mesh::graded(
        end,
        &breaks,
        &[],
        MeshSpec::new(fast, growth, level),
    );
    sweep::run(&mesh, 0.0, |a| Local {
        forcing: params.beta.at(a),
        decay: if damped {
            params.phi.at(a) + params.gamma.at(a) + shift
        } else {
            0.0
        },
        offset: 0.0,
        weight: kernel.density(a),
    })
}

/// Doubles the mesh level until two successive values agree to
/// [`QUADRATURE_TOL`]. Overflow short-circuits to `+∞`.
fn nested(params: &ParameterSet, kernel: &DemographicKernel, damping: Damping, start: u32) -> Result<f64> {
    let mut prev = nested_at(params, kernel, damping, start);
    if prev.overflow {
        return Ok(f64::INFINITY);
    }
    let mut diff = f64::INFINITY;
    for level in start + 1..=start + MAX_LEVEL {
        let next = nested_at(params, kernel, damping, level);
        if next.overflow {
            return Ok(f64::INFINITY);
        }
        diff = (next.integral - prev.integral).abs();
        prev = next;
        if diff <= QUADRATURE_TOL * prev.integral.abs() || prev.integral == 0.0 {
            return Ok(prev.integral);
        }
    }
    Err(Error::ToleranceNotMet {
        tol: QUADRATURE_TOL,
        estimate: prev.integral,
        error: diff,
    })
}

/// R0 = G(0).
pub fn r0_general(params: &ParameterSet, kernel: &DemographicKernel) -> Result<f64> {
    euler_lotka_g(0.0, params, kernel)
}

/// RC = ∫ p∞(a) ∫₀ᵃ β dh da.
pub fn rc_general(params: &ParameterSet, kernel: &DemographicKernel) -> Result<f64> {
    nested(params, kernel, Damping::None, 0)
}

/// The Euler–Lotka function G(λ). Returns `+∞` once the integrand passes
/// `1e300`, which happens for strongly negative λ on long domains.
pub fn euler_lotka_g(lambda: f64, params: &ParameterSet, kernel: &DemographicKernel) -> Result<f64> {
    euler_lotka_g_refined(lambda, params, kernel, 0)
}

/// [`euler_lotka_g`] with the starting mesh refined `refinement` times (each
/// halving the step).
pub fn euler_lotka_g_refined(lambda: f64, params: &ParameterSet, kernel: &DemographicKernel, refinement: u32) -> Result<f64> {
    if !lambda.is_finite() {
        return Err(Error::NonFinite(lambda));
    }
    nested(params, kernel, Damping::Outflow(lambda), refinement)
}

/// The unique real root of `G(λ) = 1`, by bisection on the decreasing
/// function G, to `|G(λ*) - 1| ≤ tol` (or until the bracket collapses).
pub fn dominant_root(params: &ParameterSet, kernel: &DemographicKernel, tol: f64) -> Result<f64> {
    dominant_root_refined(params, kernel, tol, 0)
}

/// [`dominant_root`] on refined quadrature, see [`euler_lotka_g_refined`].
pub fn dominant_root_refined(params: &ParameterSet, kernel: &DemographicKernel, tol: f64, refinement: u32) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be > 0, got {tol}")));
    }
    let end = kernel.max_age();
    if params.beta.max_on(end) == 0.0 {
        return Err(Error::Bracket("β vanishes identically, so G ≡ 0 has no root".into()));
    }
    let g = |l: f64| euler_lotka_g_refined(l, params, kernel, refinement);
    let mut lo = -2.0 * params.max_combined(end, |p, a| p.mu.at(a) + p.phi.at(a) + p.gamma.at(a));
    let mut hi = params.beta.max_on(end);
    if lo >= 0.0 {
        lo = -1.0;
    }
    if hi <= lo {
        hi = lo + 1.0;
    }
    while g(lo)? < 1.0 {
        lo *= 2.0;
        if lo < -BRACKET_LIMIT {
            return Err(Error::Bracket(format!(
                "G(λ) stays below 1 down to λ = {lo}; is β identically zero?"
            )));
        }
    }
    let mut g_hi = g(hi)?;
    while g_hi > 1.0 {
        hi = 2.0 * hi + 1.0;
        if hi > BRACKET_LIMIT {
            return Err(Error::Bracket(format!("G(λ) stays above 1 up to λ = {hi}")));
        }
        g_hi = g(hi)?;
    }
    if (g_hi - 1.0).abs() <= tol {
        return Ok(hi);
    }
    loop {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid)?;
        if (gm - 1.0).abs() <= tol || mid <= lo || mid >= hi || hi - lo <= 1e-14 * mid.abs().max(1.0) {
            return Ok(mid);
        }
        if gm > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

pub fn region_of(r0: f64, rc: f64) -> ThresholdRegion {
    if rc <= 1.0 {
        ThresholdRegion::Extinction
    } else if r0 <= 1.0 {
        ThresholdRegion::BistableCandidate
    } else {
        ThresholdRegion::Endemic
    }
}

/// R0, RC, λ* and the region label, with `tol` passed to [`dominant_root`].
pub fn classify(params: &ParameterSet, kernel: &DemographicKernel, tol: f64) -> Result<ThresholdReport> {
    let r0 = r0_general(params, kernel)?;
    let rc = rc_general(params, kernel)?;
    let lambda_star = if params.beta.max_on(kernel.max_age()) == 0.0 {
        f64::NEG_INFINITY
    } else {
        dominant_root(params, kernel, tol)?
    };
    Ok(ThresholdReport {
        r0,
        rc,
        lambda_star,
        region: region_of(r0, rc),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::ConstantRates;
    use crate::demography::mixing_density_inf;
    use crate::grid::AgeGrid;
    use crate::params::Rate;
    use crate::profile::AgeProfile;
    use approx::assert_relative_eq;

    fn setup(beta: f64, max_age: f64) -> (ParameterSet, DemographicKernel) {
        let p = ParameterSet::from_constants(&ConstantRates::new(0.0125, beta, 60.0, 13.0, 76.65).unwrap());
        let k = mixing_density_inf(&p, &AgeGrid::new(max_age, 200).unwrap()).unwrap();
        (p, k)
    }

    #[test]
    fn constant_rates_match_closed_forms() {
        let (p, k) = setup(60.0, 800.0);
        assert_relative_eq!(r0_general(&p, &k).unwrap(), 60.0 / 73.0125, max_relative = 1e-6);
        assert_relative_eq!(rc_general(&p, &k).unwrap(), 4800.0, max_relative = 1e-3);
        assert_relative_eq!(euler_lotka_g(10.0, &p, &k).unwrap(), 60.0 / 83.0125, max_relative = 1e-6);
    }

    #[test]
    fn zero_transmission() {
        let (p, k) = setup(60.0, 100.0);
        let p = p.with_rate(Rate::Beta, AgeProfile::constant(0.0).unwrap());
        assert_eq!(r0_general(&p, &k).unwrap(), 0.0);
        assert_eq!(rc_general(&p, &k).unwrap(), 0.0);
        let rep = classify(&p, &k, 1e-10).unwrap();
        assert_eq!(rep.lambda_star, f64::NEG_INFINITY);
        assert_eq!(rep.region, ThresholdRegion::Extinction);
        assert!(dominant_root(&p, &k, 1e-10).is_err());
    }

    #[test]
    fn strongly_negative_lambda_overflows() {
        let (p, k) = setup(60.0, 800.0);
        assert_eq!(euler_lotka_g(-200.0, &p, &k).unwrap(), f64::INFINITY);
    }

    #[test]
    fn dominant_roots_and_regions() {
        for (beta, want, region) in [
            (60.0, -13.0125, ThresholdRegion::BistableCandidate),
            (120.0, 46.9875, ThresholdRegion::Endemic),
        ] {
            let (p, k) = setup(beta, 800.0);
            let rep = classify(&p, &k, 1e-10).unwrap();
            assert!((rep.lambda_star - want).abs() < 1e-4, "{rep:?}");
            assert_eq!(rep.region, region);
        }
        let (p, k) = setup(0.011, 800.0);
        assert_eq!(classify(&p, &k, 1e-10).unwrap().region, ThresholdRegion::Extinction);
    }

    #[test]
    fn age_dependent_g_is_decreasing_and_convex() {
        let (p, _) = setup(60.0, 100.0);
        let p = p
            .with_rate(Rate::Beta, AgeProfile::table(vec![(0.0, 10.0), (20.0, 90.0), (60.0, 30.0)]).unwrap())
            .with_rate(Rate::Phi, AgeProfile::table(vec![(0.0, 40.0), (50.0, 80.0)]).unwrap());
        let k = mixing_density_inf(&p, &AgeGrid::new(100.0, 200).unwrap()).unwrap();
        let vals: Vec<f64> = [-20.0, -10.0, 0.0, 10.0, 20.0]
            .iter()
            .map(|&l| euler_lotka_g(l, &p, &k).unwrap())
            .collect();
        for w in vals.windows(3) {
            assert!(w[0] > w[1] && w[1] > w[2]);
            assert!(w[0] + w[2] >= 2.0 * w[1]);
        }
        assert!(r0_general(&p, &k).unwrap() <= rc_general(&p, &k).unwrap());
    }
}
