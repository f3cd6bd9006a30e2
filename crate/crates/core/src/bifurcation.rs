//! Bifurcation diagrams: steady-state branches as one rate is swept, with an
//! empirical stability tag per branch.

use serde::{Deserialize, Serialize};

use crate::analytic::{closed_form_profiles, fixed_points_quadratic, r0_rc_const};
use crate::demography::{mixing_density_inf, DemographicKernel};
use crate::error::{Error, Result};
use crate::grid::{AgeGrid, AgeState};
use crate::params::{ParameterSet, Rate};
use crate::profile::AgeProfile;
use crate::steady::{find_fixed_points, SteadyState};
use crate::thresholds::r0_general;
use crate::transport::{auto_grid, simulate, SimulationOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
    Untested,
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Untested => "untested",
        })
    }
}

/// How a swept value enters the parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    /// The rate becomes the constant value.
    #[default]
    Replace,
    /// The base profile is multiplied by the value.
    Scale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: Rate,
    pub values: Vec<f64>,
    #[serde(default)]
    pub mode: SweepMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    /// Relative perturbation of `i*`.
    pub epsilon: f64,
    /// Simulated time in years.
    pub horizon: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            horizon: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub b_star: f64,
    /// `i*` on the diagram's age grid.
    pub infected: Vec<f64>,
    pub stability: Stability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramRow {
    pub swept_value: f64,
    pub r0: f64,
    /// Sorted by `b_star`.
    pub branches: Vec<Branch>,
    /// For constant rates: the roots found by the general solver, kept as a
    /// cross-check of the closed-form branches.
    pub general_b_star: Option<Vec<f64>>,
    /// Set when this row could not be computed; `branches` is then empty.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationDiagram {
    pub parameter: Rate,
    pub ages: Vec<f64>,
    pub rows: Vec<DiagramRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagramOptions {
    pub ages: AgeGrid,
    pub tol: f64,
    /// `None` leaves every branch `Untested`.
    pub probe: Option<ProbeOptions>,
    /// Skip the general solver on constant-rate rows.
    pub skip_cross_check: bool,
}

fn swept_params(base: &ParameterSet, spec: &SweepSpec, value: f64) -> Result<ParameterSet> {
    let profile = match spec.mode {
        SweepMode::Replace => AgeProfile::constant(value)?,
        SweepMode::Scale => base.rate(spec.parameter).scaled(value)?,
    };
    let params = base.with_rate(spec.parameter, profile);
    params.check()?;
    Ok(params)
}

fn row_for(params: &ParameterSet, opts: &DiagramOptions) -> Result<(f64, Vec<Branch>, Option<Vec<f64>>)> {
    let kernel = mixing_density_inf(params, &opts.ages)?;
    let ages = opts.ages.nodes();
    // Each branch pairs the reported state with the state the probe runs
    // from. For constant rates the reported state is the closed form on the
    // infinite age domain, while the probe needs the fixed point of the
    // truncated problem it actually simulates.
    let (r0, pairs, cross) = match params.constant_rates() {
        Some(c) => {
            let mut roots = fixed_points_quadratic(&c)?;
            roots.sort_by(f64::total_cmp);
            let general = if opts.skip_cross_check && opts.probe.is_none() {
                None
            } else {
                Some(find_fixed_points(params, &kernel, opts.tol)?)
            };
            let matched = general.as_ref().filter(|g| g.len() == roots.len());
            let pairs: Vec<(SteadyState, Option<SteadyState>)> = roots
                .iter()
                .enumerate()
                .map(|(m, &b)| (closed_form_state(b, &c, &ages, &kernel), matched.map(|g| g[m].clone())))
                .collect();
            let cross = if opts.skip_cross_check {
                None
            } else {
                general.map(|g| g.iter().map(|s| s.b_star).collect())
            };
            (r0_rc_const(&c).0, pairs, cross)
        }
        None => {
            let states = find_fixed_points(params, &kernel, opts.tol)?;
            let pairs = states.into_iter().map(|s| (s.clone(), Some(s))).collect();
            (r0_general(params, &kernel)?, pairs, None)
        }
    };
    let branches = pairs
        .into_iter()
        .map(|(shown, probed)| {
            let stability = match (&opts.probe, probed) {
                (Some(p), Some(st)) => stability_probe(params, &st, &opts.ages, p).unwrap_or(Stability::Untested),
                _ => Stability::Untested,
            };
            Branch {
                b_star: shown.b_star,
                infected: shown.i,
                stability,
            }
        })
        .collect();
    Ok((r0, branches, cross))
}

fn closed_form_state(b: f64, c: &crate::analytic::ConstantRates, ages: &[f64], kernel: &DemographicKernel) -> SteadyState {
    let mut s = Vec::with_capacity(ages.len());
    let mut i = Vec::with_capacity(ages.len());
    let mut r = Vec::with_capacity(ages.len());
    for &a in ages {
        let (x, y, z) = closed_form_profiles(b, c, a);
        s.push(x);
        i.push(y);
        r.push(z);
    }
    let h = crate::quadrature::composite(
        &i.iter().zip(&kernel.p_inf).map(|(x, p)| x * p).collect::<Vec<_>>(),
        kernel.grid.step(),
    );
    SteadyState {
        b_star: b,
        ages: ages.to_vec(),
        s,
        i,
        r,
        residual: (h - b).abs(),
    }
}

/// One row per swept value, in input order. A failing row records its
/// error and the sweep continues.
pub fn sweep(base: &ParameterSet, spec: &SweepSpec, opts: &DiagramOptions) -> BifurcationDiagram {
    let rows = spec
        .values
        .iter()
        .map(|&value| {
            match swept_params(base, spec, value).and_then(|p| row_for(&p, opts)) {
                Ok((r0, branches, general_b_star)) => DiagramRow {
                    swept_value: value,
                    r0,
                    branches,
                    general_b_star,
                    error: None,
                },
                Err(e) => DiagramRow {
                    swept_value: value,
                    r0: f64::NAN,
                    branches: Vec::new(),
                    general_b_star: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    BifurcationDiagram {
        parameter: spec.parameter,
        ages: opts.ages.nodes(),
        rows,
    }
}

/// `i* → (1 ± ε) i*` with the change taken from `s*` (and from `r*` once
/// `s*` is exhausted), so the sum stays one.
fn perturbed(st: &SteadyState, sign: f64, eps: f64) -> AgeState {
    let n = st.ages.len();
    let mut out = AgeState::infection_free(n);
    for k in 1..n {
        let i = (st.i[k] * (1.0 + sign * eps)).min(1.0);
        let mut s = st.s[k] - (i - st.i[k]);
        let mut r = st.r[k];
        if s < 0.0 {
            r += s;
            s = 0.0;
        }
        out.s[k] = s;
        out.i[k] = i;
        out.r[k] = r.max(0.0);
    }
    out
}

/// Empirical stability of a steady state on `ages` (which must match the
/// state's sampling).
///
/// The unperturbed profiles are run for `horizon` years as a reference,
/// since sampled profiles are only approximately steady for the discrete
/// scheme. The state is stable when, for each sign of an `ε` perturbation
/// of `i*`, the gap to the reference in `B` at least halves over the
/// horizon. For `B* = 0` only the upward perturbation
/// `i = ε(1 - e^{-a})` is admissible.
pub fn stability_probe(params: &ParameterSet, steady: &SteadyState, ages: &AgeGrid, opts: &ProbeOptions) -> Result<Stability> {
    if !(opts.epsilon > 0.0 && opts.epsilon <= 0.1) {
        return Err(Error::InvalidParameter(format!(
            "probe epsilon must lie in (0, 0.1], got {}",
            opts.epsilon
        )));
    }
    if steady.ages.len() != ages.len() {
        return Err(Error::ShapeMismatch {
            expected: ages.len(),
            actual: steady.ages.len(),
        });
    }
    let grid = auto_grid(params, ages.max_age, opts.horizon, ages.intervals)?;
    let run = |st: &AgeState| -> Result<(f64, f64)> {
        let t = simulate(
            params,
            st,
            &grid,
            &SimulationOptions {
                store_every: 0,
                ..Default::default()
            },
        )?;
        Ok((t.b_series[0], t.final_b()))
    };
    let base = AgeState {
        s: steady.s.clone(),
        i: steady.i.clone(),
        r: steady.r.clone(),
    };
    let (ref0, ref_t) = run(&base)?;
    let signs: &[f64] = if steady.b_star == 0.0 { &[1.0] } else { &[1.0, -1.0] };
    for &sign in signs {
        let start = if steady.b_star == 0.0 {
            let mut st = AgeState::infection_free(ages.len());
            for (k, a) in ages.nodes().into_iter().enumerate() {
                st.i[k] = opts.epsilon * -(-a).exp_m1();
                st.s[k] = 1.0 - st.i[k];
            }
            st
        } else {
            perturbed(steady, sign, opts.epsilon)
        };
        let (b0, bt) = run(&start)?;
        if (bt - ref_t).abs() > 0.5 * (b0 - ref0).abs() {
            return Ok(Stability::Unstable);
        }
    }
    Ok(Stability::Stable)
}

/// The infection-free state as a [`SteadyState`] on `ages`.
pub fn infection_free_state(ages: &AgeGrid) -> SteadyState {
    let n = ages.len();
    SteadyState {
        b_star: 0.0,
        ages: ages.nodes(),
        s: vec![1.0; n],
        i: vec![0.0; n],
        r: vec![0.0; n],
        residual: 0.0,
    }
}
