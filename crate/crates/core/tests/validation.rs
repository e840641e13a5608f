use std::sync::Arc;

use resurgo::algebra::quad::QuadConfig;
use resurgo::algebra::{BigComplex, RatFunc};
use resurgo::borel::{laplace_sum, LaplaceConfig};
use resurgo::perturbative::{borel_germ, expand_perturbative, ODESpec};
use resurgo::singulant::{singulant_branch, ComplexPath, SingulantEquation};
use resurgo::transseries::{borel_coefficients, build_component, first_order_with_primitive, BuildConfig, TransSeriesError};
use resurgo::validation::*;

const PREC: u32 = 256;

fn c(re: f64, im: f64) -> BigComplex {
    BigComplex::from_f64(re, im, PREC)
}

#[test]
fn decaying_exponential() {
    let spec = ODESpec::new(vec![RatFunc::one(), RatFunc::one()], vec![]).unwrap();
    let eps = c(0.1, 0.0);
    let path = ComplexPath::segment(&c(0.0, 0.0), &c(1.0, 0.0), 4);
    let sol = integrate_ode(&spec, &eps, &path, &[c(1.0, 0.0)], &OdeConfig::for_precision(PREC)).unwrap();
    for (z, y) in path.samples.iter().zip(&sol.values) {
        let want = (-(z / &eps)).exp();
        assert!(y[0].dist_f64(&want) < 1e-60 * want.abs_f64(), "{}", y[0].to_string_digits(20));
    }
    assert!(sol.residual < 1e-60);
}

#[test]
fn wrong_initial_data_length() {
    let spec = ODESpec::worked_example();
    let path = ComplexPath::segment(&c(1.0, 0.0), &c(2.0, 0.0), 1);
    let err = integrate_ode(&spec, &c(0.1, 0.0), &path, &[c(1.0, 0.0)], &OdeConfig::for_precision(PREC)).unwrap_err();
    assert_eq!(err, ValidationError::InitialData { expected: 2, got: 1 });
}

#[test]
fn euler_sum_matches_decaying_solution() {
    // εy′ + y = ε/(1−z), decaying towards z → −∞, against the Borel sum of 1/(1+w) at z = 0
    let spec = ODESpec::euler_realization();
    let eps = c(0.1, 0.0);
    let path = ComplexPath::segment(&c(-12.0, 0.0), &c(0.0, 0.0), 1);
    let sol = integrate_ode(&spec, &eps, &path, &[c(0.0, 0.0)], &OdeConfig::for_precision(PREC)).unwrap();
    let sum = laplace_sum(|w| Ok((w + &c(1.0, 0.0)).recip()), &c(0.0, 0.0), &eps, 0.0, &[c(-1.0, 0.0)], &LaplaceConfig::for_precision(PREC)).unwrap();
    assert!(sol.last()[0].dist_f64(&sum.value) < 1e-20, "{} {}", sol.last()[0].to_string_digits(30), sum.value.to_string_digits(30));
}

#[test]
fn worked_example_residual() {
    let spec = ODESpec::worked_example();
    let eps = c(0.05, 0.0);
    let series = expand_perturbative(&spec, 12).unwrap();
    let start = c(1.5, 0.0);
    let (init, _) = truncated_series_data(&series, &start, &eps, 2).unwrap();
    let path = ComplexPath::segment(&start, &c(0.0, 1.0), 4);
    let sol = integrate_ode(&spec, &eps, &path, &init, &OdeConfig::for_precision(PREC)).unwrap();
    assert!(sol.residual < 1e-30, "{:e}", sol.residual);
}

#[test]
fn euler_jump_across_negative_axis() {
    let eps = c(-0.2, 0.0);
    let pi = std::f64::consts::PI;
    let m = measure_jump_rays(
        |w| Ok((w + &c(1.0, 0.0)).recip()),
        &c(0.0, 0.0),
        &c(0.0, 0.0),
        &eps,
        pi - 0.1,
        pi + 0.1,
        &[c(-1.0, 0.0)],
        &JumpConfig::for_precision(PREC),
    )
    .unwrap();
    let want = BigComplex::two_pi_i(PREC) * eps.recip().exp();
    assert!((m.value.abs_f64() - want.abs_f64()).abs() < 1e-8 * want.abs_f64());
    assert!(m.value.dist_f64(&want) < 1e-8 * want.abs_f64() || m.value.dist_f64(&-want.clone()) < 1e-8 * want.abs_f64());
}

#[test]
fn coalescing_jump() {
    // y_B = −cosh(Δw/z)/(w−z), Δ = 1, at z = 1, ε = 1/10
    let z = c(1.0, 0.0);
    let eps = c(0.1, 0.0);
    let m = measure_jump_rays(
        |w| Ok(-(&(w / &z).cosh() / &(w - &z))),
        &c(0.0, 0.0),
        &z,
        &eps,
        -0.1,
        0.1,
        &[z.clone()],
        &JumpConfig::for_precision(PREC),
    )
    .unwrap();
    // below minus above is the Hankel contribution −2πi cosh(Δ) e^(−z/ε)
    let want = -(&(BigComplex::two_pi_i(PREC) * c(1.0, 0.0).cosh()) * &(-(&z / &eps)).exp());
    let hankel = &m.minus - &m.plus;
    assert!(hankel.dist_f64(&want) < 1e-8 * want.abs_f64(), "{}", hankel.to_string_digits(20));
}

#[test]
fn jump_below_noise_is_rejected() {
    let eps = c(0.01, 0.0);
    let err = measure_jump_rays(
        |w| Ok((w - &c(50.0, 0.0)).recip()),
        &c(0.0, 0.0),
        &c(0.0, 0.0),
        &eps,
        -0.1,
        0.1,
        &[c(50.0, 0.0)],
        &JumpConfig::for_precision(PREC),
    )
    .unwrap_err();
    assert!(matches!(err, ValidationError::NoiseFloor { .. }));
}

fn worked_component(end: &BigComplex) -> resurgo::transseries::TransSeriesComponent {
    let spec = ODESpec::worked_example();
    let eq = SingulantEquation::from_spec(&spec);
    let path = ComplexPath::segment(&c(0.0, 0.0), end, 4);
    let hint = -path.samples[1].clone();
    let b = singulant_branch(&eq, &path, &hint, &c(0.0, 0.0), &QuadConfig::for_precision(PREC)).unwrap();
    let series = expand_perturbative(&spec, 4).unwrap();
    build_component(&spec, &series, &b, &BuildConfig::new(PREC)).unwrap()
}

#[test]
fn worked_example_jump_matches_prediction() {
    let spec = ODESpec::worked_example();
    let eps = c(0.05, 0.0);
    let z = c(0.0, 1.0);
    let crossing = Crossing::Continuation { minus: c(-1.5, 0.0), plus: c(1.5, 0.0) };
    let mut cfg = JumpConfig::for_precision(PREC);
    cfg.terms = 16;
    let m = measure_jump(&spec, &eps, &z, &crossing, &cfg).unwrap();
    let comp = worked_component(&z);
    let want = comp.stokes_jump(&z, &eps, 0).unwrap();
    let rel = (m.value.abs_f64() - want.abs_f64()).abs() / want.abs_f64();
    assert!(rel < 1e-6, "measured {} predicted {} rel {rel:e}", m.value.to_string_digits(15), want.to_string_digits(15));
}

fn geometric(r: f64, n: usize) -> Vec<BigComplex> {
    (0..n).map(|k| c(r, 0.0).powi(k as i64)).collect()
}

#[test]
fn geometric_sequence_fit() {
    let fit = late_term_fit(&geometric(0.5, 80), &LateTermModel::standard(), &FitConfig::default()).unwrap();
    assert_eq!(fit.model, "power");
    assert!((fit.alpha.unwrap() - 1.0).abs() < 1e-8);
    assert!((fit.chi.0 - 2.0).abs() < 1e-8 && fit.chi.1.abs() < 1e-8);
}

#[test]
fn too_few_coefficients() {
    let err = late_term_fit(&geometric(0.5, 20), &LateTermModel::standard(), &FitConfig::default()).unwrap_err();
    assert_eq!(err, ValidationError::TooFewTerms { needed: 40, got: 20 });
}

/// Synthetic `fₙ = χ^(−n) n^(α−1) (a log² n + b log n + c)(1 + 0.3/n)`, `f₀ = 1`.
fn synthetic(chi: (f64, f64), alpha: f64, logs: [f64; 3], n: usize) -> Vec<BigComplex> {
    let chi = c(chi.0, chi.1);
    let (a, b, k0) = (c(logs[0], 0.0), c(logs[1], 0.0), c(logs[2], 0.0));
    std::iter::once(c(1.0, 0.0))
        .chain((1..=n).map(|k| {
            let kc = BigComplex::from_i64(k as i64, PREC);
            let l = kc.ln();
            let poly = &(&(&a * &(&l * &l)) + &(&b * &l)) + &k0;
            let power = (&l * &c(alpha - 1.0, 0.0)).exp();
            let corr = &c(1.0, 0.0) + &(&c(0.3, 0.0) / &kc);
            &(&(&poly * &power) * &corr) * &chi.powi(-(k as i64))
        }))
        .collect()
}

#[test]
fn synthetic_models_are_identified() {
    let chi = (0.7, 0.4);
    let cases = [
        ("power", synthetic(chi, 2.5, [0.0, 0.0, 1.3], 100)),
        ("power", synthetic(chi, 0.0, [0.0, 0.0, 1.0], 100)),
        ("power-log", synthetic(chi, 0.0, [0.0, 2.0, 0.7], 100)),
        ("power-log2", synthetic(chi, 1.5, [1.0, -0.5, 0.2], 100)),
        ("log-over-s", synthetic(chi, 1.0, [0.0, 1.0, 0.5], 100)),
    ];
    for (name, seq) in cases {
        let fit = late_term_fit(&seq, &LateTermModel::standard(), &FitConfig::default()).unwrap();
        assert_eq!(fit.model, name, "{:?}", fit.candidates);
        assert!((fit.chi.0 - chi.0).abs() < 1e-8 && (fit.chi.1 - chi.1).abs() < 1e-8, "{name} {:?}", fit.chi);
    }
}

#[test]
fn custom_model() {
    // an oscillating shape is none of the standard families
    let g = |n: f64| 2.0 + (n / 5.0).sin();
    let seq: Vec<BigComplex> = (0..=100).map(|k| &c(g(k as f64), 0.0) * &c(2.0, 0.0).powi(-(k as i64))).collect();
    assert!(late_term_fit(&seq, &LateTermModel::standard(), &FitConfig::default()).is_err());
    let custom = LateTermModel::Custom { name: "wobble".into(), g: Arc::new(g) };
    let fit = late_term_fit(&seq, &[custom], &FitConfig::default()).unwrap();
    assert_eq!(fit.model, "wobble");
    assert!((fit.chi.0 - 2.0).abs() < 1e-8);
}

#[test]
fn worked_example_germ_fit() {
    let spec = ODESpec::worked_example();
    let series = expand_perturbative(&spec, 101).unwrap();
    let z = c(0.6, 0.8);
    let germ = borel_germ(&series, &z).unwrap();
    let fit = late_term_fit(&germ.coeffs, &LateTermModel::standard(), &FitConfig::default()).unwrap();
    assert_eq!(fit.model, "power");
    assert!((fit.alpha.unwrap() - 2.0).abs() < 1e-6, "{:?}", fit.alpha);
    let want = -(&(&z * &z) / &c(2.0, 0.0));
    let (wr, wi) = want.to_f64();
    assert!((fit.chi.0 - wr).abs() < 1e-6 && (fit.chi.1 - wi).abs() < 1e-6, "{:?}", fit.chi);
}

/// Germ of `εy′ + eᶻy = εH` at `z`: `y_B = H(ζ)e^(−ζ)`, `e^ζ = eᶻ − w`.
fn exp_germ<H>(h: H, z: &BigComplex, n: usize) -> Vec<BigComplex>
where
    H: Fn(&BigComplex) -> Result<BigComplex, resurgo::algebra::AlgebraError> + Copy,
{
    let chi = z.exp().abs_f64();
    let f = |w: &BigComplex| -> Result<BigComplex, TransSeriesError> {
        first_order_with_primitive(|x| Ok(x.exp()), |x| Ok(x.exp()), h, w, z)
    };
    borel_coefficients(f, 0.7 * chi, n, 512, PREC).unwrap()
}

#[test]
fn table_rows_late_terms() {
    let z = c(0.2, 0.3);
    let chi = z.exp().to_f64();
    let rows: [(&str, fn(&BigComplex) -> Result<BigComplex, resurgo::algebra::AlgebraError>); 3] = [
        ("power", |x| Ok(x * &x.exp())),
        ("power-log", |x| Ok(&(x * x) * &x.exp())),
        ("log-over-s", |x| Ok(x.clone())),
    ];
    for (name, h) in rows {
        let f = exp_germ(h, &z, 101);
        let fit = late_term_fit(&f, &LateTermModel::standard(), &FitConfig::default()).unwrap();
        assert_eq!(fit.model, name, "{:?}", fit.candidates);
        assert!(fit.residual < 1e-3);
        assert!((fit.chi.0 - chi.0).abs() < 1e-6 && (fit.chi.1 - chi.1).abs() < 1e-6, "{name} {:?}", fit.chi);
    }
}
