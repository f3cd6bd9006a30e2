//! Closed forms for constant μ, β, φ, γ, ρ and c.
//!
//! With constant rates the stationary mixing density is `μ e^{-μa}` on the
//! half line, the steady profiles are sums of two exponentials and the
//! fixed-point function Ĝ is rational, so its roots solve a quadratic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantRates {
    pub mu: f64,
    pub beta: f64,
    pub phi: f64,
    pub gamma: f64,
    pub rho: f64,
}

impl ConstantRates {
    pub fn new(mu: f64, beta: f64, phi: f64, gamma: f64, rho: f64) -> Result<Self> {
        let all = [mu, beta, phi, gamma, rho];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rates must be finite and >= 0, got {all:?}"
            )));
        }
        if mu <= 0.0 {
            return Err(Error::InvalidParameter("mu must be > 0".into()));
        }
        if phi + gamma + rho <= 0.0 {
            return Err(Error::InvalidParameter("phi + gamma + rho must be > 0".into()));
        }
        Ok(Self {
            mu,
            beta,
            phi,
            gamma,
            rho,
        })
    }

    /// φ + γ.
    pub fn outflow(&self) -> f64 {
        self.phi + self.gamma
    }

    pub fn with_beta(self, beta: f64) -> Self {
        Self { beta, ..self }
    }
}

/// `(1 - e^{-d·a}) / d`, continuous through `d = 0`.
fn relaxation(d: f64, a: f64) -> f64 {
    if d.abs() < 1e-9 {
        a * (1.0 - 0.5 * d * a)
    } else {
        -(-d * a).exp_m1() / d
    }
}

/// Steady profiles `(s, i, r)` at age `a` for a given force of infection `B`.
///
/// The expressions are the two-exponential solutions rearranged around the
/// factor `(1 - e^{-Da})/D`, `D = φ + γ + B(ρ - β)`, which stays finite as
/// `D → 0`, so the degenerate case needs no separate branch beyond
/// [`relaxation`]'s series.
pub fn closed_form_profiles(b: f64, c: &ConstantRates, a: f64) -> (f64, f64, f64) {
    if a == 0.0 || b == 0.0 {
        return (1.0, 0.0, 0.0);
    }
    let k = c.outflow();
    let kappa = k + b * c.rho;
    let s = (-b * c.beta * a).exp();
    if kappa == 0.0 {
        // No outflow from I and no relapse: everyone infected stays infected.
        return (s, -(-b * c.beta * a).exp_m1(), 0.0);
    }
    let d = kappa - b * c.beta;
    let fast = (-kappa * a).exp();
    // s·(1 - e^{-Da})/D; for D < 0 the same quantity is e^{-κa}·(e^{|D|a} - 1)/|D|
    // rearranged, which cannot overflow.
    let x = if d >= 0.0 {
        k * s * relaxation(d, a)
    } else {
        k * fast * relaxation(-d, a)
    };
    let i = b * c.rho / kappa - s + (k / kappa) * fast + x;
    let r = (k / kappa) * (1.0 - fast) - x;
    (s, i, r)
}

/// `Ĝ(B) = (B + μ/ρ) / ((B + μ/β)(B + (μ+φ+γ)/ρ))`.
pub fn g_hat_rational(b: f64, c: &ConstantRates) -> Result<f64> {
    require_beta_rho(c)?;
    let num = b + c.mu / c.rho;
    let den = (b + c.mu / c.beta) * (b + (c.mu + c.outflow()) / c.rho);
    Ok(num / den)
}

/// `(R0, RC) = (β/(μ+φ+γ), β/μ)`.
pub fn r0_rc_const(c: &ConstantRates) -> (f64, f64) {
    (c.beta / (c.mu + c.outflow()), c.beta / c.mu)
}

/// Region of the backward-bifurcation diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    /// Region 1: no endemic state is predicted.
    Extinction,
    /// Region 2: two endemic states coexist with the stable infection-free one.
    Bistable,
    /// Region 3: R0 > 1.
    Endemic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BifurcationCondition {
    pub region: Region,
    pub r0: f64,
    pub rc: f64,
    /// `ρμ / (μ + (√ρ - √(φ+γ))²)`.
    pub beta_threshold: f64,
    /// Coefficient of `B` in the fixed-point quadratic,
    /// `μ/β + (μ+φ+γ)/ρ - 1`. Both positive roots require it to be negative;
    /// `region` does not test this.
    pub linear_coefficient: f64,
}

impl BifurcationCondition {
    /// Region 2 together with a negative linear coefficient: the exact
    /// condition for two roots of Ĝ(B) = 1 in (0, 1).
    pub fn two_roots(&self) -> bool {
        self.region == Region::Bistable && self.linear_coefficient < 0.0
    }
}

/// Region 2 iff `R0 < 1 < RC` and `β > ρμ/(μ + (√ρ - √(φ+γ))²)`; region 3 iff
/// `R0 > 1`; region 1 otherwise.
pub fn bifurcation_condition(c: &ConstantRates) -> BifurcationCondition {
    let (r0, rc) = r0_rc_const(c);
    let gap = c.rho.sqrt() - c.outflow().sqrt();
    let beta_threshold = c.rho * c.mu / (c.mu + gap * gap);
    let region = if r0 > 1.0 {
        Region::Endemic
    } else if r0 < 1.0 && 1.0 < rc && c.beta > beta_threshold {
        Region::Bistable
    } else {
        Region::Extinction
    };
    let linear_coefficient = if c.beta > 0.0 && c.rho > 0.0 {
        c.mu / c.beta + (c.mu + c.outflow()) / c.rho - 1.0
    } else {
        f64::INFINITY
    };
    BifurcationCondition {
        region,
        r0,
        rc,
        beta_threshold,
        linear_coefficient,
    }
}

/// Roots in (0, 1) of `Ĝ(B) = 1`, i.e. of
/// `B² + (μ/β + (μ+φ+γ)/ρ - 1) B + (μ/ρ)((μ+φ+γ)/β - 1) = 0`, ascending.
pub fn fixed_points_quadratic(c: &ConstantRates) -> Result<Vec<f64>> {
    require_beta_rho(c)?;
    let lin = c.mu / c.beta + (c.mu + c.outflow()) / c.rho - 1.0;
    let cst = (c.mu / c.rho) * ((c.mu + c.outflow()) / c.beta - 1.0);
    let disc = lin * lin - 4.0 * cst;
    if disc < 0.0 {
        return Ok(Vec::new());
    }
    // Larger-magnitude root first; the other from the product of roots.
    let q = -0.5 * (lin + lin.signum() * disc.sqrt());
    let mut roots = if q == 0.0 {
        vec![0.0]
    } else if disc == 0.0 {
        vec![q]
    } else {
        vec![q, cst / q]
    };
    roots.retain(|&b| b > 0.0 && b < 1.0);
    roots.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
    Ok(roots)
}

fn require_beta_rho(c: &ConstantRates) -> Result<()> {
    if c.beta <= 0.0 || c.rho <= 0.0 {
        return Err(Error::Degenerate(format!(
            "rational form needs beta > 0 and rho > 0 (beta = {}, rho = {})",
            c.beta, c.rho
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transmission_dominated_profiles_stay_finite() {
        let c = ConstantRates::new(0.005, 137.1, 0.0, 0.1, 0.5).unwrap();
        let (s, i, r) = closed_form_profiles(0.675, &c, 53.2);
        assert!((s + i + r - 1.0).abs() < 1e-14);
        assert!(s == 0.0 && i.is_finite() && r.is_finite());
    }
    use approx::assert_relative_eq;

    fn bistable() -> ConstantRates {
        ConstantRates::new(0.0125, 60.0, 60.0, 13.0, 76.65).unwrap()
    }

    /// The two-exponential expressions exactly as usually printed, used as an
    /// independent check away from the degenerate denominator.
    fn printed(b: f64, c: &ConstantRates, a: f64) -> (f64, f64, f64) {
        let k = c.outflow();
        let kappa = k + b * c.rho;
        let d = k + b * (c.rho - c.beta);
        let e1 = (-b * c.beta * a).exp();
        let e2 = (-kappa * a).exp();
        let i = b * c.rho / kappa - b * (c.rho - c.beta) / d * e1 - b * c.beta * k / (kappa * d) * e2;
        let r = k / kappa - k / d * e1 + b * c.beta * k / (kappa * d) * e2;
        (e1, i, r)
    }

    #[test]
    fn boundary_and_infection_free_values() {
        let c = bistable();
        assert_eq!(closed_form_profiles(0.0, &c, 37.0), (1.0, 0.0, 0.0));
        let (s, i, r) = closed_form_profiles(0.3, &c, 0.0);
        assert_eq!(s, 1.0);
        assert!(i.abs() < 1e-15 && r.abs() < 1e-15);
    }

    #[test]
    fn rearranged_form_matches_printed_form() {
        let c = bistable();
        for &b in &[1e-4, 0.01, 0.1, 0.5, 1.0] {
            for &a in &[0.01, 0.1, 1.0, 7.5, 60.0] {
                let (s, i, r) = closed_form_profiles(b, &c, a);
                let (s2, i2, r2) = printed(b, &c, a);
                assert_relative_eq!(s, s2, max_relative = 1e-14);
                assert_relative_eq!(i, i2, epsilon = 1e-13, max_relative = 1e-10);
                assert_relative_eq!(r, r2, epsilon = 1e-13, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn degenerate_denominator_is_continuous() {
        // φ+γ+B(ρ-β) = 0 at B = 73 / (120 - 76.65).
        let c = bistable().with_beta(120.0);
        let b0 = 73.0 / (120.0 - 76.65);
        let at = closed_form_profiles(b0, &c, 0.2);
        for eps in [1e-6, 1e-8, 1e-10] {
            let near = closed_form_profiles(b0 * (1.0 + eps), &c, 0.2);
            assert!((near.1 - at.1).abs() < 1e3 * eps, "{eps}: {near:?} vs {at:?}");
        }
        assert!(at.1.is_finite() && at.2.is_finite());
        assert!((at.0 + at.1 + at.2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rational_g_hat_values() {
        let c = bistable();
        let (r0, _) = r0_rc_const(&c);
        assert_relative_eq!(g_hat_rational(0.0, &c).unwrap(), r0, max_relative = 1e-14);
        assert_relative_eq!(g_hat_rational(0.1, &c).unwrap(), 0.949_65, max_relative = 1e-5);
        let big = 1e6;
        assert_relative_eq!(g_hat_rational(big, &c).unwrap() * big, 1.0, max_relative = 1e-5);
        assert!(matches!(
            g_hat_rational(0.1, &ConstantRates { rho: 0.0, ..c }),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn reproduction_numbers() {
        let (r0, rc) = r0_rc_const(&bistable());
        assert_relative_eq!(r0, 0.8218, max_relative = 1e-3);
        assert_relative_eq!(rc, 4800.0, max_relative = 1e-12);
        let (r0, rc) = r0_rc_const(&bistable().with_beta(0.011));
        assert_relative_eq!(r0, 1.5e-4, max_relative = 1e-2);
        assert_relative_eq!(rc, 0.88, max_relative = 1e-12);
        let (r0, rc) = r0_rc_const(&bistable().with_beta(120.0));
        assert_relative_eq!(r0, 1.6436, max_relative = 1e-3);
        assert_relative_eq!(rc, 9600.0, max_relative = 1e-12);
    }

    #[test]
    fn regions_of_the_reference_sets() {
        let d = bifurcation_condition(&bistable());
        assert_relative_eq!(d.beta_threshold, 16.8, max_relative = 1e-2);
        assert_eq!(d.region, Region::Bistable);
        assert!(d.two_roots());
        assert_eq!(bifurcation_condition(&bistable().with_beta(0.011)).region, Region::Extinction);
        assert_eq!(bifurcation_condition(&bistable().with_beta(120.0)).region, Region::Endemic);
        assert_eq!(bifurcation_condition(&bistable().with_beta(10.0)).region, Region::Extinction);
    }

    fn bisect(c: &ConstantRates, mut lo: f64, mut hi: f64) -> f64 {
        let f = |b: f64| g_hat_rational(b, c).unwrap() - 1.0;
        let flo = f(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (f(mid) > 0.0) == (flo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn quadratic_roots_match_bisection() {
        let c = bistable();
        let roots = fixed_points_quadratic(&c).unwrap();
        assert_eq!(roots.len(), 2);
        assert_relative_eq!(roots[0], 7.6081e-4, max_relative = 1e-4);
        assert_relative_eq!(roots[1], 4.649e-2, max_relative = 1e-3);
        let peak = (roots[0] * roots[1]).sqrt();
        assert!((roots[0] - bisect(&c, 1e-9, peak)).abs() < 1e-12);
        assert!((roots[1] - bisect(&c, peak, 1.0)).abs() < 1e-12);
        for b in roots {
            assert!((g_hat_rational(b, &c).unwrap() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn quadratic_root_counts_by_region() {
        assert!(fixed_points_quadratic(&bistable().with_beta(0.011)).unwrap().is_empty());
        let one = fixed_points_quadratic(&bistable().with_beta(120.0)).unwrap();
        assert_eq!(one.len(), 1);
        let c = bistable().with_beta(120.0);
        assert!(g_hat_rational(1e-12, &c).unwrap() > 1.0 && g_hat_rational(1.0, &c).unwrap() < 1.0);
        assert!((one[0] - bisect(&c, 1e-12, 1.0)).abs() < 1e-12);
    }
}
