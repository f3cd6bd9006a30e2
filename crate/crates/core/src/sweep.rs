//! Forward sweeps in age for scalar linear equations
//! `y' = forcing(a) - decay(a)·y` together with a running integral
//! `∫ (offset(a) + weight(a)·y(a)) da`.
//!
//! Every steady profile and every threshold integral in this crate has this
//! shape, with decay rates up to ~150/year. Near `a = 0` the solution has
//! layers of width `1/decay`; further out it is slow. The mesh is therefore
//! graded geometrically away from zero and capped, and each step is a
//! three-stage Radau IIA step (order 5, L-stable), so step sizes far beyond
//! `1/decay` stay stable once the layer has passed. The integral uses the
//! same stage values with the Radau weights.

/// Coefficients at one age.
#[derive(Debug, Clone, Copy, Default)]
pub struct Local {
    pub forcing: f64,
    pub decay: f64,
    pub offset: f64,
    pub weight: f64,
}

/// Mesh controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshSpec {
    /// Largest |decay| on the domain; sets the initial grading.
    pub fast_rate: f64,
    /// Largest growth rate `max(-decay, 0)`; caps the step so growing modes
    /// stay resolved.
    pub growth_rate: f64,
    /// Upper bound on any step at level 0.
    pub max_step: f64,
    /// Each level halves every step.
    pub level: u32,
}

impl MeshSpec {
    pub fn new(fast_rate: f64, growth_rate: f64, level: u32) -> Self {
        Self {
            fast_rate,
            growth_rate,
            max_step: DEFAULT_MAX_STEP,
            level,
        }
    }
}

const GRADING: f64 = 0.025;
pub const DEFAULT_MAX_STEP: f64 = 0.25;
const MAX_NODES: f64 = 2e6;

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<f64>,
    /// `marks[m]` is the node index of the `m`-th requested sample age.
    pub marks: Vec<usize>,
}

impl Mesh {
    /// Mesh on `[0, end]` with nodes at every breakpoint and sample age.
    /// Sample ages must lie in `[0, end]`; they may come in any order.
    pub fn graded(end: f64, breakpoints: &[f64], samples: &[f64], spec: MeshSpec) -> Self {
        let scale = 0.5f64.powi(spec.level as i32);
        let eps = GRADING * scale;
        let mut cap = spec.max_step * scale;
        if spec.growth_rate > 0.0 {
            cap = cap.min(0.25 * scale / spec.growth_rate);
        }
        // Pathological growth rates would otherwise ask for billions of nodes.
        cap = cap.max(end / MAX_NODES);
        let inv_fast = 1.0 / spec.fast_rate.max(1e-3);
        let local = |a: f64| (eps * (a + inv_fast)).min(cap);

        // Fixed points: 0, end, breakpoints, samples (tagged with their slot).
        let mut fixed: Vec<(f64, Option<usize>)> = Vec::with_capacity(breakpoints.len() + samples.len() + 2);
        fixed.push((0.0, None));
        fixed.push((end, None));
        fixed.extend(breakpoints.iter().filter(|&&a| a > 0.0 && a < end).map(|&a| (a, None)));
        fixed.extend(samples.iter().enumerate().map(|(m, &a)| (a.clamp(0.0, end), Some(m))));
        fixed.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite ages"));

        let mut nodes = vec![0.0];
        let mut marks = vec![0usize; samples.len()];
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(1.0);
        for (a, slot) in fixed {
            let last = *nodes.last().expect("non-empty");
            if !close(a, last) {
                // Fill (last, a] with graded steps.
                let mut x = last;
                loop {
                    let h = local(x);
                    let rest = a - x;
                    if rest <= h * (1.0 + 1e-9) {
                        break;
                    }
                    if rest < 2.0 * h {
                        x += 0.5 * rest;
                    } else {
                        x += h;
                    }
                    nodes.push(x);
                }
                nodes.push(a);
            }
            if let Some(m) = slot {
                marks[m] = nodes.len() - 1;
            }
        }
        Self { nodes, marks }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    /// `y` at the last node.
    pub end: f64,
    pub integral: f64,
    /// `y` at the requested sample ages, in request order.
    pub samples: Vec<f64>,
    /// The solution exceeded `1e300` (or stopped being finite); `end` and
    /// `integral` are then `+∞`.
    pub overflow: bool,
}

// Radau IIA, three stages.
const SQ6: f64 = 2.449_489_742_783_178;
const C: [f64; 3] = [(4.0 - SQ6) / 10.0, (4.0 + SQ6) / 10.0, 1.0];
const A: [[f64; 3]; 3] = [
    [
        (88.0 - 7.0 * SQ6) / 360.0,
        (296.0 - 169.0 * SQ6) / 1800.0,
        (-2.0 + 3.0 * SQ6) / 225.0,
    ],
    [
        (296.0 + 169.0 * SQ6) / 1800.0,
        (88.0 + 7.0 * SQ6) / 360.0,
        (-2.0 - 3.0 * SQ6) / 225.0,
    ],
    [(16.0 - SQ6) / 36.0, (16.0 + SQ6) / 36.0, 1.0 / 9.0],
];

/// Integrates from `y(0) = y0` across `mesh`.
pub fn run<F>(mesh: &Mesh, y0: f64, coeffs: F) -> SweepOutput
where
    F: Fn(f64) -> Local,
{
    let n = mesh.nodes.len();
    let mut values = Vec::with_capacity(if mesh.marks.is_empty() { 0 } else { n });
    let keep = !mesh.marks.is_empty();
    let mut y = y0;
    let mut integral = 0.0;
    if keep {
        values.push(y);
    }
    for w in mesh.nodes.windows(2) {
        let (a0, h) = (w[0], w[1] - w[0]);
        let loc = [
            coeffs(a0 + C[0] * h),
            coeffs(a0 + C[1] * h),
            coeffs(a0 + C[2] * h),
        ];
        let mut m = [[0.0; 3]; 3];
        let mut rhs = [y; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = h * A[i][j] * loc[j].decay;
                rhs[i] += h * A[i][j] * loc[j].forcing;
            }
            m[i][i] += 1.0;
        }
        let stage = solve3(m, rhs);
        for j in 0..3 {
            integral += h * A[2][j] * (loc[j].offset + loc[j].weight * stage[j]);
        }
        y = stage[2];
        if !y.is_finite() || y.abs() > 1e300 || !integral.is_finite() {
            return SweepOutput {
                end: f64::INFINITY,
                integral: f64::INFINITY,
                samples: vec![f64::INFINITY; mesh.marks.len()],
                overflow: true,
            };
        }
        if keep {
            values.push(y);
        }
    }
    let samples = mesh.marks.iter().map(|&k| values[k]).collect();
    SweepOutput {
        end: y,
        integral,
        samples,
        overflow: false,
    }
}

/// Gaussian elimination with partial pivoting for a 3×3 system.
fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&x, &y| m[x][col].abs().partial_cmp(&m[y][col].abs()).expect("finite"))
            .expect("non-empty range");
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in row + 1..3 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    x
}
