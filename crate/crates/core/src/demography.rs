//! Survival, total population along characteristics, and the stationary
//! proportional-mixing density.

use crate::error::{Error, Result};
use crate::grid::AgeGrid;
use crate::params::ParameterSet;
use crate::profile::{merge_knots, AgeProfile};
use crate::quadrature;

/// Survival `F(a) = exp(-∫₀ᵃ μ)`.
pub fn survival(params: &ParameterSet, a: f64) -> Result<f64> {
    if a < 0.0 || a.is_nan() {
        return Err(Error::NegativeAge(a));
    }
    Ok((-params.mu.integral_to(a)).exp())
}

/// Survival level at which the age domain is cut off by default.
pub const SURVIVAL_CUTOFF: f64 = 1e-6;

/// Smallest `A` with `F(A) ≤ SURVIVAL_CUTOFF`, rounded up to a whole year.
pub fn default_max_age(params: &ParameterSet) -> Result<f64> {
    let target = -SURVIVAL_CUTOFF.ln();
    let floor = params.mu.min_on(f64::INFINITY);
    if !(floor > 0.0) {
        return Err(Error::InvalidParameter("mortality must be positive everywhere".into()));
    }
    // μ ≥ floor bounds the answer by target / floor.
    let mut lo = 0.0f64;
    let mut hi = (target / floor).ceil();
    while hi - lo > 1.0 {
        let mid = (0.5 * (lo + hi)).floor();
        if params.mu.integral_to(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Total population `n(t, a)` from the characteristics solution. The line
/// `t = a` takes the `t > a` branch.
pub fn total_population(params: &ParameterSet, n0: &AgeProfile, t: f64, a: f64) -> f64 {
    let cum = |x: f64| params.mu.integral_to(x);
    if t < a {
        n0.at(a - t) * (-(cum(a) - cum(a - t))).exp()
    } else {
        params.birth_rate * (-cum(a)).exp()
    }
}

/// Survival and the stationary mixing density `p∞ = c·F / ∫ c·F` on `[0, A]`.
///
/// `p_inf` holds samples on the age grid, normalized so the grid's composite
/// quadrature of `p_inf` is exactly one. [`DemographicKernel::density`]
/// evaluates `p∞` at arbitrary ages using `norm`, the continuous integral of
/// `c·F` over `[0, A]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DemographicKernel {
    pub grid: AgeGrid,
    pub survival: Vec<f64>,
    pub p_inf: Vec<f64>,
    pub norm: f64,
    mortality: AgeProfile,
    contact: AgeProfile,
}

impl DemographicKernel {
    pub fn max_age(&self) -> f64 {
        self.grid.max_age
    }

    pub fn ages(&self) -> Vec<f64> {
        self.grid.nodes()
    }

    /// `p∞(a)` for any `a` in `[0, A]`.
    #[inline]
    pub fn density(&self, a: f64) -> f64 {
        self.contact.at(a) * (-self.mortality.integral_to(a)).exp() / self.norm
    }

    /// Knots of μ and c, which bound the smooth pieces of `p∞`.
    pub fn knots(&self) -> Vec<f64> {
        merge_knots(&[&self.mortality, &self.contact], self.grid.max_age)
    }
}

pub fn mixing_density_inf(params: &ParameterSet, grid: &AgeGrid) -> Result<DemographicKernel> {
    let end = grid.max_age;
    let weight = |a: f64| params.contact.at(a) * (-params.mu.integral_to(a)).exp();

    let mut breaks = vec![0.0];
    breaks.extend(merge_knots(&[&params.mu, &params.contact], end).into_iter().filter(|&a| a > 0.0 && a < end));
    breaks.push(end);
    let scale = params.contact.max_on(end) * end;
    let mut norm = 0.0;
    for w in breaks.windows(2) {
        let share = (w[1] - w[0]) / end;
        norm += quadrature::adaptive_simpson(weight, w[0], w[1], 1e-14 * scale * share + 1e-300, 48)
            .or_else(|e| match e {
                Error::ToleranceNotMet { estimate, .. } => Ok(estimate),
                other => Err(other),
            })?;
    }
    if !(norm > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "normalizing integral of c·F must be > 0, got {norm}"
        )));
    }

    let ages = grid.nodes();
    let survival: Vec<f64> = ages.iter().map(|&a| (-params.mu.integral_to(a)).exp()).collect();
    let raw: Vec<f64> = ages
        .iter()
        .zip(&survival)
        .map(|(&a, f)| params.contact.at(a) * f)
        .collect();
    let grid_norm = quadrature::composite(&raw, grid.step());
    if !(grid_norm > 0.0) {
        return Err(Error::InvalidParameter(
            "contact rate vanishes on every grid node".into(),
        ));
    }
    let p_inf = raw.iter().map(|v| v / grid_norm).collect();

    Ok(DemographicKernel {
        grid: *grid,
        survival,
        p_inf,
        norm,
        mortality: params.mu.clone(),
        contact: params.contact.clone(),
    })
}

/// Outcome of [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// `n0(0) == Λ`; otherwise `n` jumps across the line `t = a`.
    pub compatible: bool,
    pub compatibility_gap: f64,
    pub mu_positive: bool,
    pub birth_rate_positive: bool,
    pub profiles_nonnegative: bool,
    pub messages: Vec<String>,
}

impl Diagnostics {
    pub fn is_ok(&self) -> bool {
        self.compatible && self.mu_positive && self.birth_rate_positive && self.profiles_nonnegative
    }
}

/// Checks the compatibility condition `n0(0) = Λ`, positivity of μ and
/// nonnegativity of every profile. Never aborts.
pub fn validate(params: &ParameterSet, n0: &AgeProfile) -> Diagnostics {
    let mut messages = Vec::new();
    let gap = n0.at(0.0) - params.birth_rate;
    let compatible = gap.abs() <= 1e-12 * params.birth_rate.abs().max(1.0);
    if !compatible {
        messages.push(format!(
            "n0(0) = {} differs from the birth rate {}: n(t,a) is discontinuous along t = a",
            n0.at(0.0),
            params.birth_rate
        ));
    }
    let mu_min = params.mu.min_on(f64::INFINITY);
    let mu_positive = mu_min > 0.0;
    if !mu_positive {
        messages.push(format!("exit rate mu reaches {mu_min}; it must stay > 0"));
    }
    let birth_rate_positive = params.birth_rate > 0.0;
    if !birth_rate_positive {
        messages.push(format!("birth rate must be > 0, got {}", params.birth_rate));
    }
    let named = [
        ("mu", &params.mu),
        ("beta", &params.beta),
        ("phi", &params.phi),
        ("gamma", &params.gamma),
        ("rho", &params.rho),
        ("contact", &params.contact),
        ("n0", n0),
    ];
    let mut profiles_nonnegative = true;
    for (name, p) in named {
        let m = p.min_on(f64::INFINITY);
        if m < 0.0 {
            profiles_nonnegative = false;
            messages.push(format!("{name} takes the negative value {m}"));
        }
    }
    Diagnostics {
        compatible,
        compatibility_gap: gap,
        mu_positive,
        birth_rate_positive,
        profiles_nonnegative,
        messages,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::ConstantRates;
    use crate::params::Rate;
    use approx::assert_relative_eq;

    fn base() -> ParameterSet {
        ParameterSet::from_constants(&ConstantRates::new(0.0125, 60.0, 60.0, 13.0, 76.65).unwrap())
    }

    #[test]
    fn survival_closed_forms() {
        let p = base();
        assert_eq!(survival(&p, 0.0).unwrap(), 1.0);
        assert_relative_eq!(survival(&p, 80.0).unwrap(), (-1.0f64).exp(), max_relative = 1e-15);
        let q = p.with_rate(Rate::Mu, AgeProfile::table(vec![(0.0, 0.01), (100.0, 0.03)]).unwrap());
        assert_relative_eq!(survival(&q, 100.0).unwrap(), (-2.0f64).exp(), max_relative = 1e-15);
        assert!(survival(&p, -1.0).is_err());
    }

    #[test]
    fn stationary_density_for_long_domain() {
        let p = base();
        let k = mixing_density_inf(&p, &AgeGrid::new(800.0, 1600).unwrap()).unwrap();
        assert_relative_eq!(k.p_inf[0], 0.0125, max_relative = 1e-4);
        assert_relative_eq!(k.density(0.0), 0.0125 / (1.0 - (-10.0f64).exp()), max_relative = 1e-12);
        assert_relative_eq!(quadrature::composite(&k.p_inf, k.grid.step()), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn contact_scaling_cancels() {
        let grid = AgeGrid::new(100.0, 200).unwrap();
        let p = base();
        let q = p.with_rate(Rate::Contact, AgeProfile::constant(2.0).unwrap());
        let a = mixing_density_inf(&p, &grid).unwrap();
        let b = mixing_density_inf(&q, &grid).unwrap();
        for (x, y) in a.p_inf.iter().zip(&b.p_inf) {
            assert_relative_eq!(x, y, max_relative = 1e-14);
        }
        assert_relative_eq!(a.density(33.3), b.density(33.3), max_relative = 1e-13);
    }

    #[test]
    fn zero_contact_is_rejected() {
        let p = base().with_rate(Rate::Contact, AgeProfile::constant(0.0).unwrap());
        let err = mixing_density_inf(&p, &AgeGrid::new(100.0, 200).unwrap()).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }

    #[test]
    fn population_branches() {
        let p = base();
        let n0 = AgeProfile::constant(1.0).unwrap();
        assert_relative_eq!(total_population(&p, &n0, 100.0, 80.0), (-1.0f64).exp(), max_relative = 1e-15);
        assert_eq!(total_population(&p, &n0, 0.0, 37.0), 1.0);
        // n0 = Λ·F reproduces itself for every t (up to the interpolation
        // error of the tabulated n0, ~5e-6 at this knot spacing).
        let knots: Vec<(f64, f64)> = (0..=400).map(|k| {
            let a = k as f64 * 0.5;
            (a, (-0.0125 * a).exp())
        }).collect();
        let steady = AgeProfile::table(knots).unwrap();
        for t in [0.0, 3.0, 10.0, 55.5, 120.0] {
            for a in [0.0, 1.0, 10.0, 60.0, 99.5] {
                let want = (-0.0125f64 * a).exp();
                assert_relative_eq!(total_population(&p, &steady, t, a), want, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn validate_reports_problems() {
        let p = base();
        let ok = validate(&p, &AgeProfile::constant(1.0).unwrap());
        assert!(ok.is_ok());
        let bad = validate(&p, &AgeProfile::constant(2.0).unwrap());
        assert!(!bad.compatible);
        assert_eq!(bad.compatibility_gap, 1.0);
        let q = p.with_rate(Rate::Mu, AgeProfile::table(vec![(0.0, 0.0), (10.0, 0.02)]).unwrap());
        let d = validate(&q, &AgeProfile::constant(1.0).unwrap());
        assert!(!d.mu_positive);
        assert!(!d.is_ok());
    }

    #[test]
    fn default_domain_cuts_survival() {
        let p = base();
        let a = default_max_age(&p).unwrap();
        assert_eq!(a, 1106.0);
        assert!(survival(&p, a).unwrap() <= SURVIVAL_CUTOFF);
        assert!(survival(&p, a - 1.0).unwrap() > SURVIVAL_CUTOFF);
    }
}
