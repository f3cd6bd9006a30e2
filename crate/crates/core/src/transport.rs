//! Explicit first-order upwind scheme for the rescaled transport system
//!
//! ```text
//! (∂t + ∂a) s = -β s B
//! (∂t + ∂a) i =  β s B - (φ + γ) i + ρ r B
//! (∂t + ∂a) r =  (φ + γ) i - ρ r B
//! ```
//!
//! with `s(t,0) = 1`, `i(t,0) = r(t,0) = 0`. `B(t_j)` is the quadrature of
//! `i(t_j,·)·p(t_j,·)` on the current row.

use crate::demography::{mixing_density_inf, total_population};
use crate::error::{Error, Result};
use crate::grid::{AgeGrid, AgeState, GridSpec, StateField};
use crate::params::ParameterSet;
use crate::profile::AgeProfile;
use crate::quadrature;

/// Entries below this count as a loss of positivity.
pub const POSITIVITY_FLOOR: f64 = -1e-14;
/// Tolerance on `s + i + r = 1` for initial data.
pub const SUM_TOL: f64 = 1e-12;

/// How the mixing density `p(t, a)` is obtained.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Mixing {
    /// `p = p∞` at every step; exact when the population starts at its
    /// demographic steady state.
    #[default]
    Stationary,
    /// `p(t, ·) ∝ c·n(t, ·)` rebuilt every step from the characteristics
    /// solution for the initial population `n0`.
    Full { population: AgeProfile },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOptions {
    pub mixing: Mixing,
    /// Keep every `store_every`-th row (the initial and final rows are
    /// always kept). Zero keeps only those two.
    pub store_every: usize,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            mixing: Mixing::Stationary,
            store_every: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimestepCheck {
    Stable,
    /// `suggested` is the largest Δt meeting every bound.
    Unstable { suggested: f64 },
}

/// Rates sampled on the age nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledRates {
    pub beta: Vec<f64>,
    /// φ + γ.
    pub outflow: Vec<f64>,
    pub rho: Vec<f64>,
}

impl SampledRates {
    pub fn new(params: &ParameterSet, ages: &AgeGrid) -> Self {
        let nodes = ages.nodes();
        Self {
            beta: nodes.iter().map(|&a| params.beta.at(a)).collect(),
            outflow: nodes.iter().map(|&a| params.phi.at(a) + params.gamma.at(a)).collect(),
            rho: nodes.iter().map(|&a| params.rho.at(a)).collect(),
        }
    }
}

/// Composite quadrature of `i·p` on the age grid.
pub fn force_of_infection(i_row: &[f64], p_row: &[f64], ages: &AgeGrid) -> Result<f64> {
    let n = ages.len();
    for len in [i_row.len(), p_row.len()] {
        if len != n {
            return Err(Error::ShapeMismatch {
                expected: n,
                actual: len,
            });
        }
    }
    let product: Vec<f64> = i_row.iter().zip(p_row).map(|(i, p)| i * p).collect();
    Ok(quadrature::composite(&product, ages.step()))
}

/// Checks `Δt < Δa` and the positivity bounds
/// `Δt(1/Δa + max(φ+γ+ρ)) ≤ 1`, `Δt(1/Δa + max β) ≤ 1`.
pub fn stable_timestep(params: &ParameterSet, grid: &GridSpec) -> TimestepCheck {
    let (da, dt) = (grid.da(), grid.dt());
    let end = grid.ages.max_age;
    let reaction = params.max_combined(end, |p, a| p.phi.at(a) + p.gamma.at(a) + p.rho.at(a));
    let infection = params.beta.max_on(end);
    let bound_r = 1.0 / (1.0 / da + reaction);
    let bound_s = 1.0 / (1.0 / da + infection);
    let ok = dt < da && dt <= bound_r && dt <= bound_s;
    if ok {
        TimestepCheck::Stable
    } else {
        TimestepCheck::Unstable {
            suggested: bound_r.min(bound_s).min(da * (1.0 - 1e-6)),
        }
    }
}

/// Grid on `[0, T] × [0, A]` whose Δt is the largest allowed by
/// [`stable_timestep`].
pub fn auto_grid(params: &ParameterSet, max_age: f64, max_time: f64, age_intervals: usize) -> Result<GridSpec> {
    let trial = GridSpec::with_max_dt(max_age, max_time, age_intervals, 0.5 * max_age / age_intervals as f64)?;
    match stable_timestep(params, &trial) {
        TimestepCheck::Stable => Ok(trial),
        TimestepCheck::Unstable { suggested } => GridSpec::with_max_dt(max_age, max_time, age_intervals, suggested),
    }
}

/// One step of the upwind scheme from `row` with force of infection `b`.
pub fn step(row: &AgeState, b: f64, params: &ParameterSet, grid: &GridSpec) -> AgeState {
    let rates = SampledRates::new(params, &grid.ages);
    let mut next = AgeState::infection_free(row.len());
    step_into(row, b, &rates, grid.dt(), grid.da(), &mut next);
    next
}

/// The update formulas, written exactly as
/// `x⁺ = x + Δt·(reaction − (x_k − x_{k−1})/Δa)`, into `next`.
pub fn step_into(row: &AgeState, b: f64, rates: &SampledRates, dt: f64, da: f64, next: &mut AgeState) {
    let n = row.len();
    next.s[0] = 1.0;
    next.i[0] = 0.0;
    next.r[0] = 0.0;
    for k in 1..n {
        let (s, i, r) = (row.s[k], row.i[k], row.r[k]);
        let infection = rates.beta[k] * s * b;
        let relapse = rates.rho[k] * r * b;
        let recovery = rates.outflow[k] * i;
        next.s[k] = s + dt * (-infection - (s - row.s[k - 1]) / da);
        next.i[k] = i + dt * (infection - recovery + relapse - (i - row.i[k - 1]) / da);
        next.r[k] = r + dt * (recovery - relapse - (r - row.r[k - 1]) / da);
    }
}

/// Output of [`simulate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: GridSpec,
    pub state: StateField,
    /// `B(t_j)` for `j = 0..=N_T`.
    pub b_series: Vec<f64>,
    /// `max_a i(t_j, a)` for `j = 0..=N_T`.
    pub sup_infected: Vec<f64>,
    /// Largest `|s + i + r − 1|` over every node of every step.
    pub max_sum_defect: f64,
    /// Smallest entry of s, i, r over every node of every step.
    pub min_value: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &AgeState {
        self.state.last()
    }

    pub fn final_b(&self) -> f64 {
        *self.b_series.last().expect("b_series holds the initial value")
    }
}

fn check_initial(initial: &AgeState, n: usize) -> Result<()> {
    for len in [initial.s.len(), initial.i.len(), initial.r.len()] {
        if len != n {
            return Err(Error::ShapeMismatch {
                expected: n,
                actual: len,
            });
        }
    }
    for k in 0..n {
        let (s, i, r) = (initial.s[k], initial.i[k], initial.r[k]);
        if !(s.is_finite() && i.is_finite() && r.is_finite()) {
            return Err(Error::InvalidInitialData(format!("non-finite value at node {k}")));
        }
        if s.min(i).min(r) < POSITIVITY_FLOOR {
            return Err(Error::InvalidInitialData(format!(
                "negative fraction at node {k}: s={s}, i={i}, r={r}"
            )));
        }
        if (s + i + r - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidInitialData(format!(
                "s + i + r = {} at node {k}, expected 1",
                s + i + r
            )));
        }
    }
    if initial.i[0] != 0.0 || initial.r[0] != 0.0 {
        return Err(Error::InvalidInitialData(format!(
            "boundary values must be i(0)=r(0)=0, got i={}, r={}",
            initial.i[0], initial.r[0]
        )));
    }
    Ok(())
}

/// Mixing density on the age grid at time `t`, normalized to unit composite
/// quadrature.
fn full_mixing(params: &ParameterSet, n0: &AgeProfile, ages: &AgeGrid, t: f64) -> Result<Vec<f64>> {
    let raw: Vec<f64> = ages
        .nodes()
        .iter()
        .map(|&a| params.contact.at(a) * total_population(params, n0, t, a))
        .collect();
    let norm = quadrature::composite(&raw, ages.step());
    if !(norm > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "active population ∫c·n vanishes at t = {t}"
        )));
    }
    Ok(raw.into_iter().map(|v| v / norm).collect())
}

/// Runs the scheme over the whole grid.
///
/// Fails before stepping if the initial data or time step are unusable, and
/// aborts with [`Error::PositivityLost`] if any entry drops below
/// [`POSITIVITY_FLOOR`].
pub fn simulate(params: &ParameterSet, initial: &AgeState, grid: &GridSpec, options: &SimulationOptions) -> Result<Trajectory> {
    params.check()?;
    let n = grid.ages.len();
    check_initial(initial, n)?;
    let suggested = match stable_timestep(params, grid) {
        TimestepCheck::Stable => None,
        TimestepCheck::Unstable { suggested } => Some(suggested),
    };
    if let Some(suggested) = suggested {
        return Err(Error::StepTooLarge {
            dt: grid.dt(),
            suggested,
        });
    }

    let rates = SampledRates::new(params, &grid.ages);
    let stationary = match &options.mixing {
        Mixing::Stationary => Some(mixing_density_inf(params, &grid.ages)?.p_inf),
        Mixing::Full { .. } => None,
    };
    let mixing_at = |t: f64| -> Result<Vec<f64>> {
        match (&options.mixing, &stationary) {
            (Mixing::Stationary, Some(p)) => Ok(p.clone()),
            (Mixing::Full { population }, _) => full_mixing(params, population, &grid.ages, t),
            (Mixing::Stationary, None) => unreachable!("stationary density is built up front"),
        }
    };

    let (dt, da) = (grid.dt(), grid.da());
    let steps = grid.time_steps;
    let sup = |row: &AgeState| row.i.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut row = initial.clone();
    let mut next = AgeState::infection_free(n);
    let mut p = mixing_at(0.0)?;
    let mut b_series = Vec::with_capacity(steps + 1);
    let mut sup_infected = Vec::with_capacity(steps + 1);
    let mut max_sum_defect = row.max_sum_defect();
    let mut min_value = row.min_entry().0;
    let mut times = vec![0.0];
    let mut rows = vec![row.clone()];
    b_series.push(force_of_infection(&row.i, &p, &grid.ages)?);
    sup_infected.push(sup(&row));

    for j in 0..steps {
        step_into(&row, b_series[j], &rates, dt, da, &mut next);
        std::mem::swap(&mut row, &mut next);

        let (lowest, k) = row.min_entry();
        if lowest < POSITIVITY_FLOOR {
            return Err(Error::PositivityLost {
                step: j + 1,
                node: k,
                value: lowest,
                suggested: suggested.unwrap_or(0.5 * dt),
            });
        }
        min_value = min_value.min(lowest);
        max_sum_defect = max_sum_defect.max(row.max_sum_defect());

        if matches!(options.mixing, Mixing::Full { .. }) {
            p = mixing_at(grid.time(j + 1))?;
        }
        b_series.push(force_of_infection(&row.i, &p, &grid.ages)?);
        sup_infected.push(sup(&row));

        let last = j + 1 == steps;
        if last || (options.store_every > 0 && (j + 1) % options.store_every == 0) {
            times.push(grid.time(j + 1));
            rows.push(row.clone());
        }
    }

    Ok(Trajectory {
        grid: *grid,
        state: StateField { times, rows },
        b_series,
        sup_infected,
        max_sum_defect,
        min_value,
    })
}
