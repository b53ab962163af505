mod common;

use edqueue::fitting::{
    compare, fit, fit_curve, initial_guess, Alpha, CurveData, CurvePoint, FitError, FitOptions,
    LogNormalParams, ModelParams, ModelSpec, PowerLawCutoffParams, Weighting,
};
use edqueue::stats::{histogram, Binning};

fn exact_curve(f: impl Fn(f64) -> f64, n: usize, width: f64) -> CurveData {
    CurveData::new(
        (0..n)
            .map(|i| {
                let t = width * (i as f64 + 0.5);
                CurvePoint {
                    t,
                    width,
                    density: f(t),
                    count: None,
                }
            })
            .collect(),
    )
}

#[test]
fn lognormal_guess_close_to_truth() {
    let sample = common::sample_lognormal(10_000, 120.0, 0.6, 41);
    let hist = histogram(&sample, &Binning::Linear { width: 10.0 }).unwrap();
    let curve = CurveData::from_histogram(&hist);
    let ModelParams::LogNormal(g) = initial_guess(&sample, &curve, ModelSpec::LogNormal).unwrap()
    else {
        unreachable!()
    };
    assert!((g.t_c / 120.0 - 1.0).abs() < 0.1, "{}", g.t_c);
    assert!((g.varpi / 0.6 - 1.0).abs() < 0.1, "{}", g.varpi);
}

#[test]
fn lognormal_recovered_from_samples() {
    let sample = common::sample_lognormal(5000, 150.0, 0.8, 17);
    let hist = histogram(&sample, &Binning::Linear { width: 10.0 }).unwrap();
    let res = fit(&hist, ModelSpec::LogNormal, None).unwrap();
    let ModelParams::LogNormal(p) = res.params else { unreachable!() };
    assert!((p.t_c / 150.0 - 1.0).abs() < 0.1, "{p:?}");
    assert!((p.varpi / 0.8 - 1.0).abs() < 0.1, "{p:?}");
    assert!(res.converged);
}

#[test]
fn cutoff_alpha_three_halves_exact() {
    let truth = PowerLawCutoffParams {
        amplitude: 0.3,
        alpha: Alpha::ThreeHalves,
        t0: 80.0,
    };
    let curve = exact_curve(|t| truth.eval(t).unwrap(), 120, 5.0);
    for weighting in [Weighting::Unweighted, Weighting::Poisson] {
        let opts = FitOptions {
            weighting,
            ..FitOptions::default()
        };
        // Poisson weights need counts; without them the fit falls back to
        // unit weights.
        let res = fit_curve(&curve, ModelSpec::PowerLawCutoff(Alpha::ThreeHalves), None, &opts)
            .unwrap();
        let ModelParams::PowerLawCutoff(p) = res.params else { unreachable!() };
        assert!((p.t0 - 80.0).abs() < 1e-6, "{weighting:?} {p:?}");
        assert!((p.amplitude - 0.3).abs() < 1e-9);
    }
}

#[test]
fn lognormal_with_offset_exact() {
    let truth = LogNormalParams {
        p0: 2e-4,
        amplitude: 0.9,
        t_c: 60.0,
        varpi: 0.5,
    };
    let curve = exact_curve(|t| truth.eval(t).unwrap(), 80, 5.0);
    let res = fit_curve(&curve, ModelSpec::LogNormal, None, &FitOptions::default()).unwrap();
    let ModelParams::LogNormal(p) = res.params else { unreachable!() };
    assert!((p.t_c - 60.0).abs() < 1e-6, "{p:?}");
    assert!((p.varpi - 0.5).abs() < 1e-8);
    assert!((p.p0 - 2e-4).abs() < 1e-10);
}

#[test]
fn pure_power_law_keeps_finite_cutoff() {
    // No cutoff in the data: the best t0 runs off to infinity and must
    // stay finite.
    let curve = exact_curve(|t| 0.2 / t, 100, 2.0);
    let res = fit_curve(
        &curve,
        ModelSpec::PowerLawCutoff(Alpha::One),
        None,
        &FitOptions::default(),
    )
    .unwrap();
    let ModelParams::PowerLawCutoff(p) = res.params else { unreachable!() };
    assert!(p.t0.is_finite() && p.t0 > 1e4, "{p:?}");
    assert!(p.amplitude.is_finite());
    assert!(res.sse < 1e-10);
}

#[test]
fn comparison_on_shared_data() {
    let sample = common::sample_cutoff_power_law(5000, 100.0, 1.0, 2000.0, 23);
    let hist = histogram(&sample, &Binning::Linear { width: 10.0 }).unwrap();
    let ln = fit(&hist, ModelSpec::LogNormal, None).unwrap();
    let pl = fit(&hist, ModelSpec::PowerLawCutoff(Alpha::One), None).unwrap();
    let ab = compare(&ln, &pl).unwrap();
    let ba = compare(&pl, &ln).unwrap();
    assert_eq!(ab.indistinguishable, ba.indistinguishable);
    assert!((ab.relative_sse_difference - ba.relative_sse_difference).abs() < 1e-15);
    assert!(ln.r_squared.unwrap() > 0.9 && pl.r_squared.unwrap() > 0.9);

    let other = histogram(&sample[..4000], &Binning::Linear { width: 10.0 }).unwrap();
    let pl_other = fit(&other, ModelSpec::PowerLawCutoff(Alpha::One), None).unwrap();
    assert_eq!(compare(&ln, &pl_other), Err(FitError::MismatchedData));
}
