//! Age-dependent rates.
//!
//! An [`AgeProfile`] is either a constant or a piecewise-linear table of
//! `(age, value)` knots. Tables are clamped (held constant) outside the knot
//! range, so evaluation never extrapolates into negative rates. Cumulative
//! integrals are computed segment by segment in closed form, which is exact
//! for piecewise-linear data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRepr", into = "ProfileRepr")]
pub struct AgeProfile {
    kind: Kind,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Constant(f64),
    Table {
        ages: Vec<f64>,
        values: Vec<f64>,
        /// `cumulative[k]` is the integral from 0 to `ages[k]`.
        cumulative: Vec<f64>,
    },
}

/// Serialized form: a bare number or a list of `[age, value]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum ProfileRepr {
    Constant(f64),
    Table(Vec<[f64; 2]>),
}

impl TryFrom<ProfileRepr> for AgeProfile {
    type Error = Error;

    fn try_from(repr: ProfileRepr) -> Result<Self> {
        match repr {
            ProfileRepr::Constant(v) => AgeProfile::constant(v),
            ProfileRepr::Table(knots) => {
                AgeProfile::table(knots.into_iter().map(|[a, v]| (a, v)).collect())
            }
        }
    }
}

impl From<AgeProfile> for ProfileRepr {
    fn from(p: AgeProfile) -> Self {
        match p.kind {
            Kind::Constant(v) => ProfileRepr::Constant(v),
            Kind::Table { ages, values, .. } => {
                ProfileRepr::Table(ages.into_iter().zip(values).map(|(a, v)| [a, v]).collect())
            }
        }
    }
}

impl AgeProfile {
    pub fn constant(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidProfile(format!(
                "constant value must be finite and >= 0, got {value}"
            )));
        }
        Ok(Self {
            kind: Kind::Constant(value),
        })
    }

    /// Builds a piecewise-linear profile from `(age, value)` knots.
    pub fn table(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidProfile("table needs at least one knot".into()));
        }
        for (k, &(a, v)) in knots.iter().enumerate() {
            if !a.is_finite() || a < 0.0 {
                return Err(Error::InvalidProfile(format!(
                    "knot {k}: age must be finite and >= 0, got {a}"
                )));
            }
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidProfile(format!(
                    "knot {k}: value must be finite and >= 0, got {v}"
                )));
            }
            if k > 0 && a <= knots[k - 1].0 {
                return Err(Error::InvalidProfile(format!(
                    "knot {k}: ages must be strictly increasing ({} then {a})",
                    knots[k - 1].0
                )));
            }
        }
        let (ages, values): (Vec<f64>, Vec<f64>) = knots.into_iter().unzip();
        let mut cumulative = Vec::with_capacity(ages.len());
        // Constant extension below the first knot.
        cumulative.push(values[0] * ages[0]);
        for k in 1..ages.len() {
            let seg = 0.5 * (values[k] + values[k - 1]) * (ages[k] - ages[k - 1]);
            cumulative.push(cumulative[k - 1] + seg);
        }
        Ok(Self {
            kind: Kind::Table {
                ages,
                values,
                cumulative,
            },
        })
    }

    /// Value at age `a`; negative ages are rejected.
    pub fn eval(&self, a: f64) -> Result<f64> {
        if a < 0.0 || a.is_nan() {
            return Err(Error::NegativeAge(a));
        }
        Ok(self.at(a))
    }

    /// Value at age `a` without the domain check. Ages below the first knot
    /// take the first value.
    #[inline]
    pub fn at(&self, a: f64) -> f64 {
        match &self.kind {
            Kind::Constant(v) => *v,
            Kind::Table { ages, values, .. } => {
                let n = ages.len();
                if a <= ages[0] {
                    return values[0];
                }
                if a >= ages[n - 1] {
                    return values[n - 1];
                }
                let k = segment(ages, a);
                let w = (a - ages[k]) / (ages[k + 1] - ages[k]);
                values[k] + w * (values[k + 1] - values[k])
            }
        }
    }

    /// `∫₀ᵃ profile(h) dh`, exact for the piecewise-linear representation.
    pub fn integral_to(&self, a: f64) -> f64 {
        let a = a.max(0.0);
        match &self.kind {
            Kind::Constant(v) => v * a,
            Kind::Table {
                ages,
                values,
                cumulative,
            } => {
                let n = ages.len();
                if a <= ages[0] {
                    return values[0] * a;
                }
                if a >= ages[n - 1] {
                    return cumulative[n - 1] + values[n - 1] * (a - ages[n - 1]);
                }
                let k = segment(ages, a);
                let va = self.at(a);
                cumulative[k] + 0.5 * (values[k] + va) * (a - ages[k])
            }
        }
    }

    /// Maximum over `[0, end]`. Piecewise-linear, so the maximum sits on a knot
    /// or an endpoint.
    pub fn max_on(&self, end: f64) -> f64 {
        let mut best = self.at(0.0).max(self.at(end));
        for a in self.knots() {
            if *a <= end {
                best = best.max(self.at(*a));
            }
        }
        best
    }

    pub fn min_on(&self, end: f64) -> f64 {
        let mut best = self.at(0.0).min(self.at(end));
        for a in self.knots() {
            if *a <= end {
                best = best.min(self.at(*a));
            }
        }
        best
    }

    /// Knot ages (empty for constants).
    pub fn knots(&self) -> &[f64] {
        match &self.kind {
            Kind::Constant(_) => &[],
            Kind::Table { ages, .. } => ages,
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self.kind {
            Kind::Constant(v) => Some(v),
            Kind::Table { .. } => None,
        }
    }

    /// Multiplies every value by `factor` (must be >= 0).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        match &self.kind {
            Kind::Constant(v) => Self::constant(v * factor),
            Kind::Table { ages, values, .. } => Self::table(
                ages.iter()
                    .zip(values)
                    .map(|(&a, &v)| (a, v * factor))
                    .collect(),
            ),
        }
    }

    /// Pointwise sum of two profiles, itself piecewise linear on the union of
    /// the knots.
    pub fn sum(&self, other: &AgeProfile) -> AgeProfile {
        match (&self.kind, &other.kind) {
            (Kind::Constant(x), Kind::Constant(y)) => AgeProfile {
                kind: Kind::Constant(x + y),
            },
            _ => {
                let ages = merge_knots(&[self, other], f64::INFINITY);
                let knots = ages
                    .into_iter()
                    .map(|a| (a, self.at(a) + other.at(a)))
                    .collect();
                AgeProfile::table(knots).expect("sum of valid profiles is valid")
            }
        }
    }
}

/// Index `k` with `ages[k] <= a < ages[k + 1]`; caller guarantees the range.
#[inline]
fn segment(ages: &[f64], a: f64) -> usize {
    match ages.binary_search_by(|x| x.partial_cmp(&a).expect("finite ages")) {
        Ok(k) => k.min(ages.len() - 2),
        Err(k) => k - 1,
    }
}

/// Sorted union of the knots of `profiles` lying in `[0, end]`.
pub fn merge_knots(profiles: &[&AgeProfile], end: f64) -> Vec<f64> {
    let mut all: Vec<f64> = profiles
        .iter()
        .flat_map(|p| p.knots().iter().copied())
        .filter(|&a| a <= end)
        .collect();
    all.sort_by(|a, b| a.partial_cmp(b).expect("finite knots"));
    all.dedup();
    all
}
