//! The two candidate curve shapes for waiting-time densities.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use super::FitError;

/// Lower bound applied to the log-space width of a log-normal guess.
pub const VARPI_MIN: f64 = 1e-3;

/// Exponents admitted for the power law with exponential cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Alpha {
    One,
    ThreeHalves,
}

impl Alpha {
    pub fn value(self) -> f64 {
        match self {
            Alpha::One => 1.0,
            Alpha::ThreeHalves => 1.5,
        }
    }

    pub fn from_value(v: f64) -> Option<Self> {
        if v == 1.0 {
            Some(Alpha::One)
        } else if v == 1.5 {
            Some(Alpha::ThreeHalves)
        } else {
            None
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

impl FromStr for Alpha {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim()
            .parse::<f64>()
            .ok()
            .and_then(Alpha::from_value)
            .ok_or_else(|| format!("alpha must be 1 or 1.5, got `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelSpec {
    LogNormal,
    PowerLawCutoff(Alpha),
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::LogNormal => "lognormal",
            ModelSpec::PowerLawCutoff(_) => "plcutoff",
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::LogNormal => f.write_str("lognormal"),
            ModelSpec::PowerLawCutoff(a) => write!(f, "plcutoff(alpha={a})"),
        }
    }
}

/// `P(t) = p0 + A / (sqrt(2π) ϖ t) · exp(-ln²(t / t_c) / (2ϖ²))`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormalParams {
    pub p0: f64,
    pub amplitude: f64,
    pub t_c: f64,
    pub varpi: f64,
}

/// `P(t) = A · t^(-α) · exp(-t / t0)`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawCutoffParams {
    pub amplitude: f64,
    pub alpha: Alpha,
    pub t0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelParams {
    LogNormal(LogNormalParams),
    PowerLawCutoff(PowerLawCutoffParams),
}

fn check_domain(t: f64) -> Result<(), FitError> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(FitError::Domain(t))
    }
}

impl LogNormalParams {
    fn bump(&self, t: f64) -> (f64, f64) {
        let u = (t / self.t_c).ln();
        let g = self.amplitude / ((2.0 * PI).sqrt() * self.varpi * t)
            * (-(u * u) / (2.0 * self.varpi * self.varpi)).exp();
        (g, u)
    }

    pub fn eval(&self, t: f64) -> Result<f64, FitError> {
        check_domain(t)?;
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> f64 {
        self.p0 + self.bump(t).0
    }

    /// Partial derivatives with respect to `(p0, A, t_c, ϖ)`.
    pub fn gradient(&self, t: f64) -> Result<[f64; 4], FitError> {
        check_domain(t)?;
        let (g, u) = self.bump(t);
        let s2 = self.varpi * self.varpi;
        Ok([
            1.0,
            g / self.amplitude,
            g * u / (s2 * self.t_c),
            g * (u * u / s2 - 1.0) / self.varpi,
        ])
    }
}

impl PowerLawCutoffParams {
    pub fn eval(&self, t: f64) -> Result<f64, FitError> {
        check_domain(t)?;
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> f64 {
        self.amplitude * t.powf(-self.alpha.value()) * (-t / self.t0).exp()
    }

    /// Partial derivatives with respect to `(A, t0)`.
    pub fn gradient(&self, t: f64) -> Result<[f64; 2], FitError> {
        check_domain(t)?;
        let h = self.eval_unchecked(t);
        Ok([h / self.amplitude, h * t / (self.t0 * self.t0)])
    }
}

/// Evaluates the log-normal shape at `t > 0`.
pub fn eval_lognormal(params: &LogNormalParams, t: f64) -> Result<f64, FitError> {
    params.eval(t)
}

/// Evaluates the power law with exponential cutoff at `t > 0`.
pub fn eval_powerlaw_cutoff(params: &PowerLawCutoffParams, t: f64) -> Result<f64, FitError> {
    params.eval(t)
}

impl ModelParams {
    pub fn spec(&self) -> ModelSpec {
        match self {
            ModelParams::LogNormal(_) => ModelSpec::LogNormal,
            ModelParams::PowerLawCutoff(p) => ModelSpec::PowerLawCutoff(p.alpha),
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64, FitError> {
        match self {
            ModelParams::LogNormal(p) => p.eval(t),
            ModelParams::PowerLawCutoff(p) => p.eval(t),
        }
    }

    /// Checks the side conditions: positive scales and a finite, nonnegative offset.
    pub fn validate(&self) -> Result<(), FitError> {
        let ok = match self {
            ModelParams::LogNormal(p) => {
                p.p0 >= 0.0
                    && p.p0.is_finite()
                    && p.amplitude > 0.0
                    && p.amplitude.is_finite()
                    && p.t_c > 0.0
                    && p.t_c.is_finite()
                    && p.varpi > 0.0
                    && p.varpi.is_finite()
            }
            ModelParams::PowerLawCutoff(p) => {
                p.amplitude > 0.0 && p.amplitude.is_finite() && p.t0 > 0.0 && p.t0.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(FitError::InvalidParams(format!("{self:?}")))
        }
    }

    /// Optimizer coordinates: the offset as is, every scale by its logarithm.
    pub(crate) fn to_coords(self) -> Vec<f64> {
        match self {
            ModelParams::LogNormal(p) => vec![p.p0, p.amplitude.ln(), p.t_c.ln(), p.varpi.ln()],
            ModelParams::PowerLawCutoff(p) => vec![p.amplitude.ln(), p.t0.ln()],
        }
    }

    pub(crate) fn from_coords(spec: ModelSpec, x: &[f64]) -> Self {
        match spec {
            ModelSpec::LogNormal => ModelParams::LogNormal(LogNormalParams {
                p0: x[0],
                amplitude: x[1].exp(),
                t_c: x[2].exp(),
                varpi: x[3].exp(),
            }),
            ModelSpec::PowerLawCutoff(alpha) => ModelParams::PowerLawCutoff(PowerLawCutoffParams {
                amplitude: x[0].exp(),
                alpha,
                t0: x[1].exp(),
            }),
        }
    }

    /// Value and derivatives with respect to the optimizer coordinates.
    pub(crate) fn eval_with_coord_gradient(&self, t: f64, grad: &mut [f64]) -> f64 {
        match self {
            ModelParams::LogNormal(p) => {
                let (g, u) = p.bump(t);
                let s2 = p.varpi * p.varpi;
                grad[0] = 1.0;
                grad[1] = g;
                grad[2] = g * u / s2;
                grad[3] = g * (u * u / s2 - 1.0);
                p.p0 + g
            }
            ModelParams::PowerLawCutoff(p) => {
                let h = p.eval_unchecked(t);
                grad[0] = h;
                grad[1] = h * t / p.t0;
                h
            }
        }
    }
}
