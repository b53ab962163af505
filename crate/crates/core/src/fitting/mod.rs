//! Least-squares fits of the log-normal and cutoff power-law shapes to
//! binned waiting-time densities.
//!
//! Both models are treated as curve shapes over the histogram range rather
//! than normalized densities: the log-normal offset `p0` makes it
//! non-normalizable on `(0, ∞)`.

mod lm;
mod models;

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::stats::{BinRow, Histogram};

pub use lm::{minimize, LmOptions, LmOutcome, Problem};
pub use models::{
    eval_lognormal, eval_powerlaw_cutoff, Alpha, LogNormalParams, ModelParams, ModelSpec,
    PowerLawCutoffParams, VARPI_MIN,
};

/// Fewest non-empty bins a fit accepts.
pub const MIN_FIT_BINS: usize = 5;

/// Bound on the logarithm of every fitted scale parameter.
const LOG_SCALE_BOUND: f64 = 700.0;

/// Relative SSE gap under which two fits are reported as a tie.
pub const INDISTINGUISHABLE_SSE_GAP: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("model evaluated at t = {0}; t must be positive")]
    Domain(f64),
    #[error("need at least {MIN_FIT_BINS} non-empty bins, found {0}")]
    TooFewBins(usize),
    #[error("sample is empty or has no positive value")]
    EmptySample,
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("initial parameters are for {given}, fit requested {wanted}")]
    ModelMismatch { given: ModelSpec, wanted: ModelSpec },
    #[error("fits were made on different data")]
    MismatchedData,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// Plain squared density differences.
    #[default]
    Unweighted,
    /// Each bin weighted by `count / density²`, the inverse Poisson variance.
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    /// Evaluation point (bin center).
    pub t: f64,
    pub width: f64,
    pub density: f64,
    pub count: Option<u64>,
}

/// The non-empty bins of a histogram, as fitting data.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveData {
    pub points: Vec<CurvePoint>,
}

impl CurveData {
    /// Keeps points with positive density and positive `t`.
    pub fn new(points: Vec<CurvePoint>) -> Self {
        Self {
            points: points
                .into_iter()
                .filter(|p| p.density > 0.0 && p.t > 0.0 && p.density.is_finite())
                .collect(),
        }
    }

    pub fn from_histogram(h: &Histogram) -> Self {
        let points = h
            .centers()
            .into_iter()
            .zip(h.widths())
            .zip(h.densities.iter().zip(&h.counts))
            .map(|((t, width), (&density, &count))| CurvePoint {
                t,
                width,
                density,
                count: Some(count),
            })
            .collect();
        Self::new(points)
    }

    /// Bins read back from a histogram CSV, evaluated at arithmetic midpoints.
    pub fn from_rows(rows: &[BinRow]) -> Self {
        Self::new(
            rows.iter()
                .map(|r| CurvePoint {
                    t: 0.5 * (r.left + r.right),
                    width: r.right - r.left,
                    density: r.density,
                    count: Some(r.count),
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Order-independent fingerprint of the data points.
    pub fn signature(&self) -> u64 {
        let mut keys: Vec<(u64, u64)> = self
            .points
            .iter()
            .map(|p| (p.t.to_bits(), p.density.to_bits()))
            .collect();
        keys.sort_unstable();
        let mut h = DefaultHasher::new();
        keys.hash(&mut h);
        h.finish()
    }
}

/// Moments used to seed a fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuessMoments {
    pub mean: f64,
    pub log_mean: f64,
    pub log_std: f64,
}

impl GuessMoments {
    pub fn from_sample(values: &[f64]) -> Result<Self, FitError> {
        let positive: Vec<f64> = values.iter().copied().filter(|v| *v > 0.0).collect();
        if positive.is_empty() {
            return Err(FitError::EmptySample);
        }
        let n = positive.len() as f64;
        let mean = positive.iter().sum::<f64>() / n;
        let log_mean = positive.iter().map(|v| v.ln()).sum::<f64>() / n;
        let log_var = positive
            .iter()
            .map(|v| (v.ln() - log_mean).powi(2))
            .sum::<f64>()
            / n;
        Ok(Self {
            mean,
            log_mean,
            log_std: log_var.sqrt(),
        })
    }

    /// Moments of the binned distribution, each bin weighted by its mass.
    pub fn from_curve(curve: &CurveData) -> Result<Self, FitError> {
        let mass: f64 = curve.points.iter().map(|p| p.density * p.width).sum();
        if curve.is_empty() || mass.is_nan() || mass <= 0.0 {
            return Err(FitError::EmptySample);
        }
        let weighted = |f: &dyn Fn(f64) -> f64| {
            curve
                .points
                .iter()
                .map(|p| p.density * p.width * f(p.t))
                .sum::<f64>()
                / mass
        };
        let mean = weighted(&|t| t);
        let log_mean = weighted(&|t| t.ln());
        let log_var = weighted(&|t| (t.ln() - log_mean).powi(2));
        Ok(Self {
            mean,
            log_mean,
            log_std: log_var.sqrt(),
        })
    }
}

/// Starting parameters for `spec`.
///
/// Log-normal: `t_c = exp(mean ln t)`, `ϖ = std ln t` (at least
/// [`VARPI_MIN`]), `A = 1`, `p0 = 0`. Cutoff power law: `t0 = mean t` and
/// `A` matching the first non-empty bin.
pub fn initial_guess_from_moments(
    moments: &GuessMoments,
    curve: &CurveData,
    spec: ModelSpec,
) -> Result<ModelParams, FitError> {
    match spec {
        ModelSpec::LogNormal => Ok(ModelParams::LogNormal(LogNormalParams {
            p0: 0.0,
            amplitude: 1.0,
            t_c: moments.log_mean.exp(),
            varpi: moments.log_std.max(VARPI_MIN),
        })),
        ModelSpec::PowerLawCutoff(alpha) => {
            let first = curve
                .points
                .iter()
                .min_by(|a, b| a.t.total_cmp(&b.t))
                .ok_or(FitError::EmptySample)?;
            Ok(ModelParams::PowerLawCutoff(PowerLawCutoffParams {
                amplitude: first.density * first.t.powf(alpha.value()),
                alpha,
                t0: moments.mean,
            }))
        }
    }
}

pub fn initial_guess(
    sample: &[f64],
    curve: &CurveData,
    spec: ModelSpec,
) -> Result<ModelParams, FitError> {
    initial_guess_from_moments(&GuessMoments::from_sample(sample)?, curve, spec)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Goodness {
    pub sse: f64,
    /// `None` when every density is equal and R² is undefined.
    pub r_squared: Option<f64>,
}

pub fn goodness(curve: &CurveData, params: &ModelParams) -> Result<Goodness, FitError> {
    if curve.is_empty() {
        return Err(FitError::EmptySample);
    }
    let mut sse = 0.0;
    for p in &curve.points {
        let d = p.density - params.eval(p.t)?;
        sse += d * d;
    }
    let mean = curve.points.iter().map(|p| p.density).sum::<f64>() / curve.len() as f64;
    let sst: f64 = curve.points.iter().map(|p| (p.density - mean).powi(2)).sum();
    let r_squared = (sst > 0.0).then(|| 1.0 - sse / sst);
    Ok(Goodness { sse, r_squared })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub weighting: Weighting,
    pub lm: LmOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            weighting: Weighting::Unweighted,
            lm: LmOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: ModelSpec,
    pub params: ModelParams,
    /// Unweighted SSE over the fitted bins.
    pub sse: f64,
    pub r_squared: Option<f64>,
    pub n_bins: usize,
    pub converged: bool,
    pub iterations: usize,
    pub data_signature: u64,
}

struct CurveProblem<'a> {
    curve: &'a CurveData,
    spec: ModelSpec,
    weights: Vec<f64>,
}

impl Problem for CurveProblem<'_> {
    fn n_params(&self) -> usize {
        match self.spec {
            ModelSpec::LogNormal => 4,
            ModelSpec::PowerLawCutoff(_) => 2,
        }
    }

    fn n_residuals(&self) -> usize {
        self.curve.len()
    }

    fn evaluate(&self, x: &[f64], r: &mut DVector<f64>, mut jac: Option<&mut DMatrix<f64>>) {
        let params = ModelParams::from_coords(self.spec, x);
        let mut grad = [0.0; 4];
        for (i, (p, w)) in self.curve.points.iter().zip(&self.weights).enumerate() {
            let value = params.eval_with_coord_gradient(p.t, &mut grad);
            r[i] = w * (value - p.density);
            if let Some(j) = jac.as_deref_mut() {
                for (k, g) in grad.iter().take(self.n_params()).enumerate() {
                    j[(i, k)] = w * g;
                }
            }
        }
    }

    fn project(&self, x: &mut [f64]) {
        let log_start = match self.spec {
            ModelSpec::LogNormal => {
                x[0] = x[0].max(0.0);
                1
            }
            ModelSpec::PowerLawCutoff(_) => 0,
        };
        // Keeps exp() of every scale coordinate finite. A cutoff driven to the
        // bound is the pure power-law limit.
        for v in &mut x[log_start..] {
            *v = v.clamp(-LOG_SCALE_BOUND, LOG_SCALE_BOUND);
        }
    }
}

/// Fits `spec` to the curve by damped least squares.
///
/// The objective is `Σ w_i (density_i - model(t_i))²` over the non-empty
/// bins. Scales are optimized through their logarithms and the log-normal
/// offset is clamped at zero. Running out of iterations is reported through
/// `converged = false`, not as an error.
pub fn fit_curve(
    curve: &CurveData,
    spec: ModelSpec,
    init: Option<ModelParams>,
    options: &FitOptions,
) -> Result<FitResult, FitError> {
    if curve.len() < MIN_FIT_BINS {
        return Err(FitError::TooFewBins(curve.len()));
    }
    let start = match init {
        Some(p) => {
            if p.spec() != spec {
                return Err(FitError::ModelMismatch {
                    given: p.spec(),
                    wanted: spec,
                });
            }
            p.validate()?;
            p
        }
        None => initial_guess_from_moments(&GuessMoments::from_curve(curve)?, curve, spec)?,
    };
    let weights = curve
        .points
        .iter()
        .map(|p| match (options.weighting, p.count) {
            (Weighting::Poisson, Some(c)) if c > 0 => (c as f64).sqrt() / p.density,
            _ => 1.0,
        })
        .collect();
    let problem = CurveProblem {
        curve,
        spec,
        weights,
    };
    let outcome = minimize(&problem, &start.to_coords(), &options.lm);
    let params = ModelParams::from_coords(spec, &outcome.x);
    let g = goodness(curve, &params)?;
    Ok(FitResult {
        model: spec,
        params,
        sse: g.sse,
        r_squared: g.r_squared,
        n_bins: curve.len(),
        converged: outcome.converged,
        iterations: outcome.iterations,
        data_signature: curve.signature(),
    })
}

pub fn fit(
    histogram: &Histogram,
    spec: ModelSpec,
    init: Option<ModelParams>,
) -> Result<FitResult, FitError> {
    fit_curve(
        &CurveData::from_histogram(histogram),
        spec,
        init,
        &FitOptions::default(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preferred {
    First,
    Second,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub first: FitResult,
    pub second: FitResult,
    /// `|sse_a - sse_b| / min(sse_a, sse_b)`; zero when both are zero.
    pub relative_sse_difference: f64,
    pub indistinguishable: bool,
    /// Lower-SSE fit, unless the two are indistinguishable.
    pub preferred: Option<Preferred>,
}

pub fn compare(first: &FitResult, second: &FitResult) -> Result<ComparisonReport, FitError> {
    if first.data_signature != second.data_signature || first.n_bins != second.n_bins {
        return Err(FitError::MismatchedData);
    }
    let (lo, hi) = if first.sse <= second.sse {
        (first.sse, second.sse)
    } else {
        (second.sse, first.sse)
    };
    let relative_sse_difference = if hi == 0.0 {
        0.0
    } else if lo == 0.0 {
        f64::INFINITY
    } else {
        (hi - lo) / lo
    };
    let indistinguishable = relative_sse_difference < INDISTINGUISHABLE_SSE_GAP;
    let preferred = (!indistinguishable).then_some({
        if first.sse <= second.sse {
            Preferred::First
        } else {
            Preferred::Second
        }
    });
    Ok(ComparisonReport {
        first: first.clone(),
        second: second.clone(),
        relative_sse_difference,
        indistinguishable,
        preferred,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn points_from(f: impl Fn(f64) -> f64, centers: impl Iterator<Item = f64>) -> CurveData {
        CurveData::new(
            centers
                .map(|t| CurvePoint {
                    t,
                    width: 10.0,
                    density: f(t),
                    count: None,
                })
                .collect(),
        )
    }

    fn eq4_curve() -> (CurveData, PowerLawCutoffParams) {
        let truth = PowerLawCutoffParams {
            amplitude: 0.05,
            alpha: Alpha::One,
            t0: 200.0,
        };
        let curve = points_from(
            |t| truth.eval(t).unwrap(),
            (0..100).map(|i| 5.0 + 10.0 * i as f64),
        );
        (curve, truth)
    }

    #[test]
    fn zero_residual_powerlaw() {
        let (curve, truth) = eq4_curve();
        let res = fit_curve(&curve, ModelSpec::PowerLawCutoff(Alpha::One), None, &FitOptions::default())
            .unwrap();
        let ModelParams::PowerLawCutoff(p) = res.params else { panic!() };
        assert!(res.converged);
        assert!((p.amplitude / truth.amplitude - 1.0).abs() < 1e-6, "{p:?}");
        assert!((p.t0 / truth.t0 - 1.0).abs() < 1e-6, "{p:?}");
        assert!(res.sse < 1e-18, "sse {}", res.sse);
    }

    #[test]
    fn zero_residual_lognormal() {
        let truth = LogNormalParams {
            p0: 1e-4,
            amplitude: 0.8,
            t_c: 90.0,
            varpi: 0.6,
        };
        let curve = points_from(|t| truth.eval(t).unwrap(), (0..80).map(|i| 5.0 + 10.0 * i as f64));
        let res = fit_curve(&curve, ModelSpec::LogNormal, None, &FitOptions::default()).unwrap();
        let ModelParams::LogNormal(p) = res.params else { panic!() };
        assert!((p.t_c / 90.0 - 1.0).abs() < 1e-6, "{p:?}");
        assert!((p.varpi / 0.6 - 1.0).abs() < 1e-6, "{p:?}");
        assert!((p.p0 - 1e-4).abs() < 1e-9, "{p:?}");
        assert_eq!(res.r_squared.map(|r| r > 1.0 - 1e-12), Some(true));
    }

    #[test]
    fn too_few_bins() {
        let curve = points_from(|t| 1.0 / t, [1.0, 2.0, 3.0, 4.0].into_iter());
        assert_eq!(
            fit_curve(&curve, ModelSpec::LogNormal, None, &FitOptions::default()),
            Err(FitError::TooFewBins(4))
        );
    }

    #[test]
    fn init_must_match_model() {
        let (curve, truth) = eq4_curve();
        let err = fit_curve(
            &curve,
            ModelSpec::LogNormal,
            Some(ModelParams::PowerLawCutoff(truth)),
            &FitOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, FitError::ModelMismatch { .. }));
    }

    #[test]
    fn refit_at_optimum_is_stable() {
        let curve = points_from(
            |t| 0.02 / t * (-t / 150.0).exp() * (1.0 + 0.05 * (t / 13.0).sin()),
            (0..60).map(|i| 5.0 + 10.0 * i as f64),
        );
        for spec in [ModelSpec::LogNormal, ModelSpec::PowerLawCutoff(Alpha::One)] {
            let first = fit_curve(&curve, spec, None, &FitOptions::default()).unwrap();
            let again = fit_curve(&curve, spec, Some(first.params), &FitOptions::default()).unwrap();
            assert!((first.sse - again.sse).abs() < 1e-12, "{spec}: {} vs {}", first.sse, again.sse);
        }
    }

    #[test]
    fn reordering_bins_does_not_change_fit() {
        let curve = points_from(
            |t| 0.02 / t * (-t / 150.0).exp() * (1.0 + 0.05 * (t / 13.0).sin()),
            (0..60).map(|i| 5.0 + 10.0 * i as f64),
        );
        let mut reversed = curve.clone();
        reversed.points.reverse();
        let spec = ModelSpec::PowerLawCutoff(Alpha::One);
        let a = fit_curve(&curve, spec, None, &FitOptions::default()).unwrap();
        let b = fit_curve(&reversed, spec, None, &FitOptions::default()).unwrap();
        assert!((a.sse - b.sse).abs() <= 1e-12 * a.sse.max(1e-300) + 1e-20);
        assert_eq!(a.data_signature, b.data_signature);
    }

    #[test]
    fn goodness_definitions() {
        let (curve, truth) = eq4_curve();
        let g = goodness(&curve, &ModelParams::PowerLawCutoff(truth)).unwrap();
        assert_eq!(g.sse, 0.0);
        assert_eq!(g.r_squared, Some(1.0));

        let mean = curve.points.iter().map(|p| p.density).sum::<f64>() / curve.len() as f64;
        // A log-normal with a vanishing bump is the constant `mean`.
        let flat = ModelParams::LogNormal(LogNormalParams {
            p0: mean,
            amplitude: 1e-300,
            t_c: 1.0,
            varpi: 1.0,
        });
        let g = goodness(&curve, &flat).unwrap();
        assert!(g.r_squared.unwrap().abs() < 1e-12);
        assert!(g.sse >= 0.0);

        let constant = points_from(|_| 0.5, (1..8).map(f64::from));
        assert_eq!(goodness(&constant, &flat).unwrap().r_squared, None);
    }

    #[test]
    fn guesses() {
        let e = std::f64::consts::E;
        let (curve, _) = eq4_curve();
        let ModelParams::LogNormal(p) = initial_guess(&[e, e, e], &curve, ModelSpec::LogNormal).unwrap()
        else {
            panic!()
        };
        assert!((p.t_c - e).abs() < 1e-12);
        assert_eq!(p.varpi, VARPI_MIN);
        assert_eq!((p.amplitude, p.p0), (1.0, 0.0));

        let spec = ModelSpec::PowerLawCutoff(Alpha::One);
        let ModelParams::PowerLawCutoff(p) = initial_guess(&[100.0, 100.0], &curve, spec).unwrap() else {
            panic!()
        };
        assert_eq!(p.t0, 100.0);
        assert!((p.amplitude - curve.points[0].density * 5.0).abs() < 1e-15);
        assert_eq!(initial_guess(&[], &curve, spec), Err(FitError::EmptySample));
    }

    fn fake(sse: f64) -> FitResult {
        FitResult {
            model: ModelSpec::LogNormal,
            params: ModelParams::LogNormal(LogNormalParams {
                p0: 0.0,
                amplitude: 1.0,
                t_c: 1.0,
                varpi: 1.0,
            }),
            sse,
            r_squared: Some(0.9),
            n_bins: 10,
            converged: true,
            iterations: 3,
            data_signature: 7,
        }
    }

    #[test]
    fn comparison_rules() {
        let tie = compare(&fake(1.0), &fake(1.0)).unwrap();
        assert!(tie.indistinguishable && tie.preferred.is_none());

        let report = compare(&fake(1.0), &fake(2.0)).unwrap();
        assert!(!report.indistinguishable);
        assert_eq!(report.preferred, Some(Preferred::First));
        assert!((report.relative_sse_difference - 1.0).abs() < 1e-15);

        let close = compare(&fake(1.1), &fake(1.0)).unwrap();
        assert!(close.indistinguishable);

        let mut other = fake(1.0);
        other.data_signature = 8;
        assert_eq!(compare(&fake(1.0), &other), Err(FitError::MismatchedData));
    }

    #[test]
    fn poisson_weighting_runs() {
        let (curve, _) = eq4_curve();
        let weighted = CurveData::new(
            curve
                .points
                .iter()
                .map(|p| CurvePoint {
                    count: Some(100),
                    ..*p
                })
                .collect(),
        );
        let opts = FitOptions {
            weighting: Weighting::Poisson,
            ..FitOptions::default()
        };
        let res = fit_curve(&weighted, ModelSpec::PowerLawCutoff(Alpha::One), None, &opts).unwrap();
        assert!(res.sse < 1e-18);
    }
}
