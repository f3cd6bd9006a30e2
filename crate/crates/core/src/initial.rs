//! Initial data `(s0, i0, r0)` on the age grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{AgeGrid, AgeState};
use crate::profile::AgeProfile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialCondition {
    /// Infection-free: `s0 ≡ 1`.
    Zero,
    /// `i0(a) = amplitude · exp(-(a - center)²/(2 width²)) · (1 - e^{-a/width})`,
    /// `r0 ≡ 0`. The last factor pins `i0(0) = 0`.
    Bump { amplitude: f64, center: f64, width: f64 },
    /// Tabulated `i0` and optionally `r0`; `s0` is the remainder.
    Table {
        infected: AgeProfile,
        #[serde(default)]
        recovered: Option<AgeProfile>,
    },
}

impl InitialCondition {
    pub fn bump(amplitude: f64, center: f64, width: f64) -> Result<Self> {
        let c = Self::Bump {
            amplitude,
            center,
            width,
        };
        c.check()?;
        Ok(c)
    }

    /// The same condition with its infected mass multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        match self {
            Self::Zero => Ok(Self::Zero),
            Self::Bump {
                amplitude,
                center,
                width,
            } => Self::bump(amplitude * factor, *center, *width),
            Self::Table { infected, recovered } => Ok(Self::Table {
                infected: infected.scaled(factor)?,
                recovered: recovered.as_ref().map(|r| r.scaled(factor)).transpose()?,
            }),
        }
    }

    pub fn check(&self) -> Result<()> {
        match self {
            Self::Zero => Ok(()),
            Self::Bump {
                amplitude,
                center,
                width,
            } => {
                if !(0.0..=1.0).contains(amplitude) {
                    return Err(Error::InvalidInitialData(format!(
                        "bump amplitude must lie in [0, 1], got {amplitude}"
                    )));
                }
                if !(center.is_finite() && *width > 0.0 && width.is_finite()) {
                    return Err(Error::InvalidInitialData(format!(
                        "bump needs a finite center and width > 0, got center={center}, width={width}"
                    )));
                }
                Ok(())
            }
            Self::Table { infected, recovered } => {
                let i0 = infected.at(0.0);
                let r0 = recovered.as_ref().map_or(0.0, |r| r.at(0.0));
                if i0 != 0.0 || r0 != 0.0 {
                    return Err(Error::InvalidInitialData(format!(
                        "tabulated data must vanish at age 0, got i0(0)={i0}, r0(0)={r0}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Samples the condition on `ages`. Fails if `i0 + r0` exceeds one.
    pub fn state(&self, ages: &AgeGrid) -> Result<AgeState> {
        self.check()?;
        let nodes = ages.nodes();
        let mut out = AgeState::infection_free(nodes.len());
        for (k, &a) in nodes.iter().enumerate() {
            let (i, r) = match self {
                Self::Zero => (0.0, 0.0),
                Self::Bump {
                    amplitude,
                    center,
                    width,
                } => {
                    let z = (a - center) / width;
                    (amplitude * (-0.5 * z * z).exp() * -(-a / width).exp_m1(), 0.0)
                }
                Self::Table { infected, recovered } => {
                    (infected.at(a), recovered.as_ref().map_or(0.0, |p| p.at(a)))
                }
            };
            if i + r > 1.0 {
                return Err(Error::InvalidInitialData(format!(
                    "i0 + r0 = {} exceeds 1 at age {a}",
                    i + r
                )));
            }
            out.i[k] = i;
            out.r[k] = r;
            out.s[k] = 1.0 - i - r;
        }
        Ok(out)
    }
}
