//! Endemic steady states for age-dependent coefficients.
//!
//! For a fixed force of infection `B` the steady profiles are
//! `s_B(a) = exp(-B ∫₀ᵃ β)` and the solution of
//! `i' = Bβs + Bρ(1 - s) - (φ + γ + Bρ) i`, `i(0) = 0`, with
//! `r = 1 - s - i`. Steady states are the fixed points of
//! `H(B) = ∫ i_B p∞`, found as roots of `Ĝ(B) = H(B)/B = 1`.

use serde::{Deserialize, Serialize};

use crate::demography::DemographicKernel;
use crate::error::{Error, Result};
use crate::params::ParameterSet;
use crate::sweep::{self, Local, Mesh, MeshSpec};
use crate::thresholds;

/// Below this `B`, `Ĝ(B)` is replaced by its limit R0.
pub const SMALL_B: f64 = 1e-6;
/// Number of logarithmic probes of `Ĝ - 1` on `[SMALL_B, 1]`.
pub const SCAN_PROBES: usize = 512;
const MAX_STEP: f64 = 1.0;
const LEVEL: u32 = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub b_star: f64,
    pub ages: Vec<f64>,
    pub s: Vec<f64>,
    pub i: Vec<f64>,
    pub r: Vec<f64>,
    /// `|H(B*) - B*|`.
    pub residual: f64,
}

fn check_b(b: f64) -> Result<()> {
    if !b.is_finite() {
        return Err(Error::NonFinite(b));
    }
    if b < 0.0 {
        return Err(Error::InvalidParameter(format!("force of infection must be >= 0, got {b}")));
    }
    Ok(())
}

fn check_ages(ages: &[f64]) -> Result<f64> {
    let mut end = 0.0f64;
    for &a in ages {
        if !(a >= 0.0) {
            return Err(Error::NegativeAge(a));
        }
        end = end.max(a);
    }
    Ok(end)
}

/// `s_B(a) = exp(-B ∫₀ᵃ β)`.
pub fn susceptible_profile(b: f64, params: &ParameterSet, ages: &[f64]) -> Result<Vec<f64>> {
    check_b(b)?;
    check_ages(ages)?;
    Ok(ages.iter().map(|&a| (-b * params.beta.integral_to(a)).exp()).collect())
}

/// Sweeps the infected equation on `[0, end]`, sampling at `ages` and
/// accumulating `∫ i·weight`.
fn infected_sweep<W>(b: f64, params: &ParameterSet, end: f64, breaks: &[f64], ages: &[f64], weight: W, level: u32) -> sweep::SweepOutput
where
    W: Fn(f64) -> f64,
{
    let fast = params.max_combined(end, |p, a| p.phi.at(a) + p.gamma.at(a) + b * (p.rho.at(a) + p.beta.at(a)));
    let mesh = Mesh::graded(
        end,
        breaks,
        ages,
        MeshSpec {
            max_step: MAX_STEP,
            ..MeshSpec::new(fast, 0.0, level)
        },
    );
    sweep::run(&mesh, 0.0, |a| {
        let exponent = -b * params.beta.integral_to(a);
        let s = exponent.exp();
        let infected_once = -exponent.exp_m1();
        let rho = params.rho.at(a);
        Local {
            forcing: b * params.beta.at(a) * s + b * rho * infected_once,
            decay: params.phi.at(a) + params.gamma.at(a) + b * rho,
            offset: 0.0,
            weight: weight(a),
        }
    })
}

/// `(s_B, i_B, r_B)` sampled at `ages`.
pub fn steady_profiles(b: f64, params: &ParameterSet, ages: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    check_b(b)?;
    let end = check_ages(ages)?;
    if end == 0.0 || b == 0.0 {
        let n = ages.len();
        return Ok((vec![1.0; n], vec![0.0; n], vec![0.0; n]));
    }
    let out = infected_sweep(b, params, end, &params.knots(end), ages, |_| 0.0, LEVEL);
    let mut s = Vec::with_capacity(ages.len());
    let mut r = Vec::with_capacity(ages.len());
    for (&a, &i) in ages.iter().zip(&out.samples) {
        let exponent = -b * params.beta.integral_to(a);
        s.push(exponent.exp());
        r.push(-exponent.exp_m1() - i);
    }
    Ok((s, out.samples, r))
}

pub fn infected_profile(b: f64, params: &ParameterSet, ages: &[f64]) -> Result<Vec<f64>> {
    steady_profiles(b, params, ages).map(|(_, i, _)| i)
}

pub fn recovered_profile(b: f64, params: &ParameterSet, ages: &[f64]) -> Result<Vec<f64>> {
    steady_profiles(b, params, ages).map(|(_, _, r)| r)
}

fn check_unit(b: f64) -> Result<()> {
    check_b(b)?;
    if b > 1.0 {
        return Err(Error::InvalidParameter(format!("force of infection must be <= 1, got {b}")));
    }
    Ok(())
}

fn h_at_level(b: f64, params: &ParameterSet, kernel: &DemographicKernel, level: u32) -> f64 {
    if b == 0.0 {
        return 0.0;
    }
    let end = kernel.max_age();
    let mut breaks = params.knots(end);
    breaks.extend(kernel.knots());
    infected_sweep(b, params, end, &breaks, &[], |a| kernel.density(a), level).integral
}

/// `H(B) = ∫₀ᴬ i_B(a) p∞(a) da` for `B ∈ [0, 1]`.
pub fn h_value(b: f64, params: &ParameterSet, kernel: &DemographicKernel) -> Result<f64> {
    check_unit(b)?;
    Ok(h_at_level(b, params, kernel, LEVEL))
}

/// `Ĝ(B) = H(B)/B`, continued by R0 below [`SMALL_B`].
pub fn g_hat(b: f64, params: &ParameterSet, kernel: &DemographicKernel) -> Result<f64> {
    check_unit(b)?;
    if b < SMALL_B {
        return thresholds::r0_general(params, kernel);
    }
    Ok(h_at_level(b, params, kernel, LEVEL) / b)
}

/// All roots of `Ĝ(B) = 1` on `[SMALL_B, 1]`, each refined by bisection to
/// `|Ĝ(B) - 1| ≤ tol` (or to the resolution of f64), with the steady
/// profiles sampled on the kernel's age grid. Sorted by `B*`.
pub fn find_fixed_points(params: &ParameterSet, kernel: &DemographicKernel, tol: f64) -> Result<Vec<SteadyState>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be > 0, got {tol}")));
    }
    let f = |b: f64| -> Result<f64> {
        let v = h_at_level(b, params, kernel, LEVEL) / b - 1.0;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite(b))
        }
    };
    let span = (1.0 / SMALL_B).ln();
    let probes: Vec<f64> = (0..SCAN_PROBES)
        .map(|j| {
            if j + 1 == SCAN_PROBES {
                1.0
            } else {
                SMALL_B * (span * j as f64 / (SCAN_PROBES - 1) as f64).exp()
            }
        })
        .collect();
    let values = probes.iter().map(|&b| f(b)).collect::<Result<Vec<_>>>()?;

    let mut roots = Vec::new();
    for k in 0..SCAN_PROBES - 1 {
        let (b0, b1) = (probes[k], probes[k + 1]);
        let (f0, f1) = (values[k], values[k + 1]);
        if f0 == 0.0 {
            roots.push(b0);
        } else if f0.signum() != f1.signum() && f1 != 0.0 {
            roots.push(bisect(&f, b0, b1, f0, tol)?);
        }
    }
    if values[SCAN_PROBES - 1] == 0.0 {
        roots.push(1.0);
    }

    let ages = kernel.ages();
    roots
        .into_iter()
        .map(|b_star| {
            let (s, i, r) = steady_profiles(b_star, params, &ages)?;
            let residual = (h_at_level(b_star, params, kernel, LEVEL) - b_star).abs();
            Ok(SteadyState {
                b_star,
                ages: ages.clone(),
                s,
                i,
                r,
                residual,
            })
        })
        .collect()
}

fn bisect<F>(f: &F, mut lo: f64, mut hi: f64, f_lo: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let lo_sign = f_lo.signum();
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid)?;
        if fm.abs() <= tol {
            return Ok(mid);
        }
        if fm.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}
