//! The subcommands, as functions from a configuration to files on disk.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use relapse::bifurcation::{sweep, DiagramOptions, SweepMode};
use relapse::demography::default_max_age;
use relapse::steady::find_fixed_points;
use relapse::thresholds::classify;
use relapse::transport::simulate;
use relapse::{
    mixing_density_inf, preset, AgeGrid, DemographicKernel, ParameterSet, PresetName, SimulationOptions,
    ThresholdReport,
};

use crate::config::{RunConfig, DEFAULT_STORED_ROWS};
use crate::output;

/// Age step for the analysis domain when the config has no `[grid]`.
pub const ANALYSIS_AGE_STEP: f64 = 0.5;

/// What a command wrote.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

struct Sink {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Sink {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn csv<F>(&mut self, name: &str, write: F) -> Result<()>
    where
        F: FnOnce(&Path) -> output::CsvResult<()>,
    {
        let path = self.dir.join(name);
        write(&path).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(path);
        Ok(())
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(path);
        Ok(())
    }

    fn finish(self, summary: String) -> Outcome {
        Outcome {
            files: self.files,
            summary,
        }
    }
}

/// The simulation grid's ages if there is one, otherwise `[0, A]` with `A`
/// cut where survival drops below one in a million.
pub fn analysis_ages(cfg: &RunConfig) -> Result<AgeGrid> {
    if let Some(g) = &cfg.grid {
        return Ok(g.ages.clone());
    }
    let end = default_max_age(&cfg.params)?;
    Ok(AgeGrid::new(end, (end / ANALYSIS_AGE_STEP).ceil() as usize)?)
}

fn threshold_report(params: &ParameterSet, kernel: &DemographicKernel, tol: f64) -> Result<ThresholdReport> {
    Ok(classify(params, kernel, tol).context("computing thresholds")?)
}

fn domain_line(kernel: &DemographicKernel) -> String {
    format!("age domain  [0, {}] with {} intervals", kernel.max_age(), kernel.grid.len() - 1)
}

pub fn thresholds(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let kernel = mixing_density_inf(&cfg.params, &analysis_ages(cfg)?)?;
    let report = threshold_report(&cfg.params, &kernel, cfg.tol)?;
    let mut sink = Sink::new(out)?;
    sink.csv("thresholds.csv", |p| output::write_thresholds(p, &report))?;
    let text = output::report_text("thresholds", &report, &[domain_line(&kernel)]);
    sink.text("report.txt", &text)?;
    Ok(sink.finish(text))
}

pub fn simulate_run(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let Some(grid) = &cfg.grid else {
        bail!("simulate needs a [grid] section");
    };
    let initial = cfg.initial.state(&grid.ages)?;
    let options = SimulationOptions {
        mixing: cfg.mixing.clone(),
        store_every: cfg.store_every,
    };
    let traj = simulate(&cfg.params, &initial, grid, &options).context("running the transport solver")?;
    let kernel = mixing_density_inf(&cfg.params, &grid.ages)?;
    let report = threshold_report(&cfg.params, &kernel, cfg.tol)?;
    let mut sink = Sink::new(out)?;
    sink.csv("trajectory.csv", |p| output::write_trajectory(p, &traj))?;
    sink.csv("b_series.csv", |p| output::write_b_series(p, &traj))?;
    let text = output::report_text(
        "simulation",
        &report,
        &[
            format!("grid        A = {}, T = {}, da = {}, dt = {}", grid.ages.max_age, grid.max_time, grid.da(), grid.dt()),
            format!("B(0)        {}", output::show(traj.b_series[0])),
            format!("B(T)        {}", output::show(traj.final_b())),
            format!("sup i(T)    {}", output::show(traj.sup_infected.last().copied().unwrap_or(f64::NAN))),
            format!("max |s+i+r-1|  {:e}", traj.max_sum_defect),
            format!("min value      {:e}", traj.min_value),
        ],
    );
    sink.text("report.txt", &text)?;
    Ok(sink.finish(text))
}

pub fn steady(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let kernel = mixing_density_inf(&cfg.params, &analysis_ages(cfg)?)?;
    let report = threshold_report(&cfg.params, &kernel, cfg.tol)?;
    let states = find_fixed_points(&cfg.params, &kernel, cfg.tol).context("locating endemic states")?;
    let mut sink = Sink::new(out)?;
    sink.csv("steady.csv", |p| output::write_steady(p, &states))?;
    let mut extra = vec![domain_line(&kernel), format!("endemic states  {}", states.len())];
    extra.extend(
        states
            .iter()
            .enumerate()
            .map(|(n, s)| format!("  B*[{n}] = {}  (residual {:e})", output::show(s.b_star), s.residual)),
    );
    let text = output::report_text("steady states", &report, &extra);
    sink.text("report.txt", &text)?;
    Ok(sink.finish(text))
}

pub fn bifurcation(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let Some(sw) = &cfg.sweep else {
        bail!("bifurcation needs a [sweep] section");
    };
    let ages = analysis_ages(cfg)?;
    let kernel = mixing_density_inf(&cfg.params, &ages)?;
    let report = threshold_report(&cfg.params, &kernel, cfg.tol)?;
    let opts = DiagramOptions {
        ages,
        tol: cfg.tol,
        probe: sw.probe,
        skip_cross_check: sw.skip_cross_check,
    };
    let diagram = sweep(&cfg.params, &sw.spec, &opts);
    let mut sink = Sink::new(out)?;
    sink.csv("diagram.csv", |p| output::write_diagram(p, &diagram))?;
    let mut extra = vec![
        domain_line(&kernel),
        format!("swept {} ({:?}) over {} values", sw.spec.parameter, sw.spec.mode, sw.spec.values.len()).to_lowercase(),
    ];
    for row in &diagram.rows {
        let branches: Vec<String> = row
            .branches
            .iter()
            .map(|b| format!("{} ({})", output::show(b.b_star), b.stability))
            .collect();
        let label = match sw.spec.mode {
            SweepMode::Replace => format!("{} = {}", sw.spec.parameter, output::show(row.swept_value)),
            SweepMode::Scale => format!("{} x {}", sw.spec.parameter, output::show(row.swept_value)),
        };
        let mut line = format!("  {label}  R0 = {}  B*: [{}]", output::show(row.r0), branches.join(", "));
        if let Some(g) = &row.general_b_star {
            line.push_str(&format!("  general: {g:?}"));
        }
        if let Some(e) = &row.error {
            line.push_str(&format!("  error: {e}"));
        }
        extra.push(line);
    }
    let text = output::report_text("bifurcation diagram (thresholds at the base parameters)", &report, &extra);
    sink.text("report.txt", &text)?;
    Ok(sink.finish(text))
}

/// Runs a bundled experiment: thresholds, trajectory, `B(t)`, the endemic
/// states of the simulated problem and the initial condition(s).
pub fn run_preset(name: PresetName, out: &Path, tol: f64) -> Result<Outcome> {
    let p = preset(name)?;
    let grid = &p.grid;
    let initial = p.initial.state(&grid.ages)?;
    let options = SimulationOptions {
        store_every: (grid.time_steps / DEFAULT_STORED_ROWS).max(1),
        ..Default::default()
    };
    let traj = simulate(&p.params, &initial, grid, &options).context("running the transport solver")?;
    let kernel = mixing_density_inf(&p.params, &grid.ages)?;
    let report = threshold_report(&p.params, &kernel, tol)?;
    let states = find_fixed_points(&p.params, &kernel, tol).context("locating endemic states")?;
    let ages = grid.ages.nodes();

    let mut sink = Sink::new(out)?;
    sink.csv("thresholds.csv", |path| output::write_thresholds(path, &report))?;
    sink.csv("trajectory.csv", |path| output::write_trajectory(path, &traj))?;
    sink.csv("b_series.csv", |path| output::write_b_series(path, &traj))?;
    sink.csv("steady.csv", |path| output::write_steady(path, &states))?;
    sink.csv("initial.csv", |path| output::write_profile(path, &ages, &initial))?;
    if let Some(other) = &p.companion {
        let other = other.state(&grid.ages)?;
        sink.csv("companion_initial.csv", |path| output::write_profile(path, &ages, &other))?;
    }
    let mut extra = vec![
        p.summary.to_string(),
        format!("grid        A = {}, T = {}, da = {}, dt = {}", grid.ages.max_age, grid.max_time, grid.da(), grid.dt()),
        format!("B(0)        {}", output::show(traj.b_series[0])),
        format!("B(T)        {}", output::show(traj.final_b())),
        format!("sup i(T)    {}", output::show(traj.sup_infected.last().copied().unwrap_or(f64::NAN))),
        format!("endemic states of the simulated problem  {}", states.len()),
    ];
    extra.extend(states.iter().enumerate().map(|(n, s)| format!("  B*[{n}] = {}", output::show(s.b_star))));
    let text = output::report_text(&format!("preset {name}"), &report, &extra);
    sink.text("report.txt", &text)?;
    Ok(sink.finish(text))
}
