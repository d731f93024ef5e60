//! Piecewise-constant single-site potentials supported in `[-1/2, 1/2]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Left end of the single-site support.
pub const SUPPORT_LO: f64 = -0.5;
/// Right end of the single-site support.
pub const SUPPORT_HI: f64 = 0.5;

/// Unvalidated breakpoint/value lists, as read from a potential file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawPotential {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

/// A real step function `f` on `[-1/2, 1/2]`: `f(x) = values[i]` on
/// `(breakpoints[i], breakpoints[i + 1])`.
///
/// Construct through [`SingleSitePotential::validate`]; once built the
/// potential is immutable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPotential", into = "RawPotential")]
pub struct SingleSitePotential {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    is_free: bool,
}

impl TryFrom<RawPotential> for SingleSitePotential {
    type Error = Error;

    fn try_from(raw: RawPotential) -> Result<Self> {
        Self::validate(raw)
    }
}

impl From<SingleSitePotential> for RawPotential {
    fn from(p: SingleSitePotential) -> Self {
        RawPotential {
            breakpoints: p.breakpoints,
            values: p.values,
        }
    }
}

impl SingleSitePotential {
    pub fn validate(raw: RawPotential) -> Result<Self> {
        let RawPotential {
            breakpoints,
            values,
        } = raw;
        if breakpoints.len() < 2 {
            return Err(Error::PieceCountMismatch {
                expected: 1,
                got: values.len(),
            });
        }
        let (lo, hi) = (breakpoints[0], breakpoints[breakpoints.len() - 1]);
        if lo != SUPPORT_LO || hi != SUPPORT_HI {
            return Err(Error::SupportOutOfRange { lo, hi });
        }
        if let Some(i) = breakpoints.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::NonMonotoneBreakpoints { index: i + 1 });
        }
        if values.len() != breakpoints.len() - 1 {
            return Err(Error::PieceCountMismatch {
                expected: breakpoints.len() - 1,
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        let is_free = values.iter().all(|&v| v == 0.0);
        Ok(Self {
            breakpoints,
            values,
            is_free,
        })
    }

    /// `f = 0`. Not a valid single site for the localization theorem, but
    /// useful as a reference.
    pub fn free() -> Self {
        Self {
            breakpoints: vec![SUPPORT_LO, SUPPORT_HI],
            values: vec![0.0],
            is_free: true,
        }
    }

    /// The step barrier (or well) `λ·χ[-1/2, 1/2]`.
    pub fn constant(lambda: f64) -> Result<Self> {
        Self::validate(RawPotential {
            breakpoints: vec![SUPPORT_LO, SUPPORT_HI],
            values: vec![lambda],
        })
    }

    /// The antisymmetric step `λ(χ[-1/2, 0] − χ(0, 1/2])`.
    pub fn antisymmetric_step(lambda: f64) -> Result<Self> {
        Self::validate(RawPotential {
            breakpoints: vec![SUPPORT_LO, 0.0, SUPPORT_HI],
            values: vec![lambda, -lambda],
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_free(&self) -> bool {
        self.is_free
    }

    pub fn n_pieces(&self) -> usize {
        self.values.len()
    }

    /// `(width, value)` of each piece, left to right.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, &q)| (w[1] - w[0], q))
    }

    /// Value of `f` at `x`; at a breakpoint the right-hand piece wins, and
    /// zero is returned outside the support.
    pub fn eval(&self, x: f64) -> f64 {
        if !(SUPPORT_LO..=SUPPORT_HI).contains(&x) {
            return 0.0;
        }
        let i = self.breakpoints[1..].partition_point(|&b| b <= x);
        self.values[i.min(self.values.len() - 1)]
    }

    /// Split pieces so that no piece is wider than `max_width`. The function
    /// itself is unchanged.
    pub fn refine(&self, max_width: f64) -> Result<Self> {
        if !(max_width > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "max_width must be positive, got {max_width}"
            )));
        }
        let mut breakpoints = vec![SUPPORT_LO];
        let mut values = Vec::with_capacity(self.values.len());
        for (w, &q) in self.breakpoints.windows(2).zip(&self.values) {
            let width = w[1] - w[0];
            let parts = (width / max_width).ceil().max(1.0) as usize;
            let step = width / parts as f64;
            for j in 1..parts {
                breakpoints.push(w[0] + j as f64 * step);
                values.push(q);
            }
            breakpoints.push(w[1]);
            values.push(q);
        }
        Ok(Self {
            breakpoints,
            values,
            is_free: self.is_free,
        })
    }

    /// JSON in the potential-file format, every number written with 17
    /// significant digits.
    pub fn to_json(&self) -> String {
        let fmt = |xs: &[f64]| {
            xs.iter()
                .map(|x| format!("{x:.16e}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        format!(
            "{{\"breakpoints\": [{}], \"values\": [{}]}}",
            fmt(&self.breakpoints),
            fmt(&self.values)
        )
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
