//! CSV and text artifacts. Floats are written with 17 significant digits so
//! reading them back is exact.

use std::fs::File;
use std::path::Path;

use relapse::bifurcation::BifurcationDiagram;
use relapse::{AgeState, StateField, SteadyState, ThresholdReport, Trajectory};

pub type CsvResult<T> = Result<T, csv::Error>;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer(path: &Path) -> CsvResult<csv::Writer<File>> {
    csv::Writer::from_path(path)
}

/// Columns `t, a, s, i, r`, one row per stored time and age node.
pub fn write_trajectory(path: &Path, traj: &Trajectory) -> CsvResult<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "a", "s", "i", "r"])?;
    let ages = traj.grid.ages.nodes();
    for (t, row) in traj.state.times.iter().zip(&traj.state.rows) {
        for (k, a) in ages.iter().enumerate() {
            w.write_record([num(*t), num(*a), num(row.s[k]), num(row.i[k]), num(row.r[k])])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a file written by [`write_trajectory`] back into stored rows and
/// the age nodes.
pub fn read_trajectory(path: &Path) -> CsvResult<(Vec<f64>, StateField)> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut ages: Vec<f64> = Vec::new();
    let mut field = StateField {
        times: Vec::new(),
        rows: Vec::new(),
    };
    for record in reader.deserialize::<(f64, f64, f64, f64, f64)>() {
        let (t, a, s, i, r) = record?;
        if field.times.last() != Some(&t) {
            field.times.push(t);
            field.rows.push(AgeState::default());
        }
        if field.rows.len() == 1 {
            ages.push(a);
        }
        let row = field.rows.last_mut().expect("pushed above");
        row.s.push(s);
        row.i.push(i);
        row.r.push(r);
    }
    Ok((ages, field))
}

/// Columns `t, B` at every time step.
pub fn write_b_series(path: &Path, traj: &Trajectory) -> CsvResult<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "B"])?;
    for (j, b) in traj.b_series.iter().enumerate() {
        w.write_record([num(traj.grid.time(j)), num(*b)])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `a, s, i, r`.
pub fn write_profile(path: &Path, ages: &[f64], state: &AgeState) -> CsvResult<()> {
    let mut w = writer(path)?;
    w.write_record(["a", "s", "i", "r"])?;
    for (k, a) in ages.iter().enumerate() {
        w.write_record([num(*a), num(state.s[k]), num(state.i[k]), num(state.r[k])])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `branch_index, B_star, residual, a, s, i, r`.
pub fn write_steady(path: &Path, states: &[SteadyState]) -> CsvResult<()> {
    let mut w = writer(path)?;
    w.write_record(["branch_index", "B_star", "residual", "a", "s", "i", "r"])?;
    for (n, st) in states.iter().enumerate() {
        for (k, a) in st.ages.iter().enumerate() {
            w.write_record([
                n.to_string(),
                num(st.b_star),
                num(st.residual),
                num(*a),
                num(st.s[k]),
                num(st.i[k]),
                num(st.r[k]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Columns `swept_value, R0, branch_index, B_star, stability`, then `i*` at
/// every age node. One row per branch, so values without endemic states
/// contribute no rows.
pub fn write_diagram(path: &Path, diagram: &BifurcationDiagram) -> CsvResult<()> {
    let mut w = writer(path)?;
    let mut header: Vec<String> = ["swept_value", "R0", "branch_index", "B_star", "stability"]
        .map(String::from)
        .to_vec();
    header.extend(diagram.ages.iter().map(|a| format!("i(a={a})")));
    w.write_record(&header)?;
    for row in &diagram.rows {
        for (n, b) in row.branches.iter().enumerate() {
            let mut rec = vec![
                num(row.swept_value),
                num(row.r0),
                n.to_string(),
                num(b.b_star),
                b.stability.to_string(),
            ];
            rec.extend(b.infected.iter().map(|x| num(*x)));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Columns `r0, rc, lambda_star, region`.
pub fn write_thresholds(path: &Path, t: &ThresholdReport) -> CsvResult<()> {
    let mut w = writer(path)?;
    w.write_record(["r0", "rc", "lambda_star", "region"])?;
    w.write_record([num(t.r0), num(t.rc), num(t.lambda_star), t.region.to_string()])?;
    w.flush()?;
    Ok(())
}

/// Compact display for reports: plain decimals in a moderate range,
/// scientific notation otherwise.
pub fn show(x: f64) -> String {
    let m = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e6).contains(&m) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Human-readable summary; `extra` lines are appended verbatim.
pub fn report_text(title: &str, t: &ThresholdReport, extra: &[String]) -> String {
    let mut out = format!(
        "{title}\n\nR0          {}\nRC          {}\nlambda*     {}\nregion      {}\n",
        show(t.r0),
        show(t.rc),
        show(t.lambda_star),
        t.region
    );
    if !extra.is_empty() {
        out.push('\n');
        for line in extra {
            out.push_str(line);
            out.push('\n');
        }
    }
    out
}
