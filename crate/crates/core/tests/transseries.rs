use resurgo::algebra::parse::parse_ratfunc;
use resurgo::algebra::quad::QuadConfig;
use resurgo::algebra::{BigComplex, RatFunc};
use resurgo::perturbative::{expand_perturbative, ODESpec};
use resurgo::singulant::{singulant_branch, ComplexPath, SingulantEquation};
use resurgo::transseries::*;
use rug::Rational;

const PREC: u32 = 256;

fn c(re: f64, im: f64) -> BigComplex {
    BigComplex::from_f64(re, im, PREC)
}

fn sqrt2() -> BigComplex {
    c(2.0, 0.0).sqrt()
}

/// χ₁ = −z²/2 of the worked example, from 0 to `end`.
fn worked_branch(end: &BigComplex) -> resurgo::singulant::SingulantBranch {
    let eq = SingulantEquation::from_spec(&ODESpec::worked_example());
    let path = ComplexPath::segment(&c(0.0, 0.0), end, 4);
    let hint = -path.samples[1].clone();
    singulant_branch(&eq, &path, &hint, &c(0.0, 0.0), &QuadConfig::for_precision(PREC)).unwrap()
}

#[test]
fn worked_example_exponents() {
    let spec = ODESpec::worked_example();
    let series = expand_perturbative(&spec, 4).unwrap();
    let b = worked_branch(&c(0.0, 1.0));
    let ex = local_exponents(&spec, &series, &b).unwrap();
    assert_eq!(ex.gamma, 2);
    assert_eq!(ex.delta, 3);
    assert_eq!(ex.beta, Rational::from(1));
    assert_eq!(ex.alpha, Rational::from(2));
}

#[test]
fn forced_square_root_example_exponents() {
    // ε²y″ + 2εy′ + (1−z)y = 1/((1−z)(2−z)) at z★ = 1 on χ′ = 1 + √z
    let spec = ODESpec::new(
        vec![parse_ratfunc("1-z").unwrap(), RatFunc::from_int(2), RatFunc::one()],
        vec![parse_ratfunc("1/((1-z)*(2-z))").unwrap()],
    )
    .unwrap();
    let series = expand_perturbative(&spec, 3).unwrap();
    let eq = SingulantEquation::from_spec(&spec);
    let path = ComplexPath::segment(&c(1.0, 0.0), &c(1.2, 0.3), 4);
    let b = singulant_branch(&eq, &path, &c(2.0, 0.0), &c(0.0, 0.0), &QuadConfig::for_precision(PREC)).unwrap();
    let ex = local_exponents(&spec, &series, &b).unwrap();
    assert_eq!((ex.gamma, ex.delta), (1, 4));
    assert_eq!(ex.beta, Rational::from(0));
    assert_eq!(ex.alpha, Rational::from(4));
}

#[test]
fn worked_example_inner_operators() {
    let spec = ODESpec::worked_example();
    let forms = local_forms(&spec, &c(0.0, 0.0), 2, &c(-0.5, 0.0)).unwrap();
    let p0 = build_inner_problem(&forms, 3, 0, &[c(-0.75, 0.0), c(-23.0 / 16.0, 0.0)]).unwrap();
    let want0 = [vec![3.0], vec![-7.5, 4.5], vec![2.0, -3.0, 1.0]];
    let p2 = build_inner_problem(&forms, 3, 2, &[]).unwrap();
    let want2 = [vec![0.5], vec![-4.5, 2.5], vec![2.0, -3.0, 1.0]];
    for (p, want) in [(&p0, &want0), (&p2, &want2)] {
        let got = p.coeffs_f64();
        for (g, w) in got.iter().zip(want.iter()) {
            assert_eq!(g.len(), w.len(), "{got:?}");
            for (x, y) in g.iter().zip(w) {
                assert!((x - y).abs() < 1e-30, "{got:?}");
            }
        }
    }
}

#[test]
fn worked_example_inner_data_and_late_terms() {
    let spec = ODESpec::worked_example();
    let series = expand_perturbative(&spec, 4).unwrap();
    // χ₁ = −z²/2 as a Taylor series at 0
    let chi = vec![c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
    let data = inner_data_from_germ(&series, &c(0.0, 0.0), &chi, 2, 3, 0, 2).unwrap();
    assert!(data[0].dist_f64(&c(-0.75, 0.0)) < 1e-60);
    assert!(data[1].dist_f64(&c(-23.0 / 16.0, 0.0)) < 1e-60);
    let data2 = inner_data_from_germ(&series, &c(0.0, 0.0), &chi, 2, 3, 2, 1).unwrap();
    assert!(data2.iter().all(|x| x.is_zero()));

    let forms = local_forms(&spec, &c(0.0, 0.0), 2, &c(-0.5, 0.0)).unwrap();
    let p = build_inner_problem(&forms, 3, 0, &data).unwrap();
    let phi = solve_inner_series(&p, 300).unwrap();
    // the third datum from the germ agrees with the recurrence
    assert!(phi[2].dist_f64(&data[2]) < 1e-50 * data[2].abs_f64());
    let half = sqrt2().div_i64(2);
    let ratio = &phi[300] / &c(300.0, 0.0);
    assert!(ratio.dist_f64(&(-half.clone())) < 1e-2);
    let fit = connection_constants(&phi, &c(2.0, 0.0), 3, &ConnectionConfig::default()).unwrap();
    let c0 = fit.constants[0].clone().unwrap();
    let c1 = fit.constants[1].clone().unwrap();
    assert!(c0.dist_f64(&(-half)) < 1e-20, "{}", c0.to_string_digits(20));
    assert!(c1.abs_f64() < 1e-20, "{}", c1.to_string_digits(20));
    // (1−s)^0 is a polynomial and drops out
    assert!(fit.constants[2].is_none());
}

#[test]
fn zero_inner_data_gives_zero_series() {
    let forms = local_forms(&ODESpec::worked_example(), &c(0.0, 0.0), 2, &c(-0.5, 0.0)).unwrap();
    let p = build_inner_problem(&forms, 3, 2, &[]).unwrap();
    assert!(solve_inner_series(&p, 50).unwrap().iter().all(|x| x.is_zero()));
}

#[test]
fn first_order_inner_problem() {
    // εy′ + y = ε/z: at z★ = 0, χ = z (γ = 1) and y₁ = 1/z (δ = 1)
    let spec = ODESpec::first_order(RatFunc::one(), parse_ratfunc("1/z").unwrap());
    let forms = local_forms(&spec, &c(0.0, 0.0), 1, &c(1.0, 0.0)).unwrap();
    let p = build_inner_problem(&forms, 1, 0, &[c(1.0, 0.0)]).unwrap();
    let got = p.coeffs_f64();
    // normalized to a monic leading coefficient: (s − 1)φ′ + φ
    assert_eq!(got, vec![vec![1.0], vec![-1.0, 1.0]]);
    // (1−s)φ′ − φ = 0, φ(0) = 1 → φ = 1/(1−s)
    let phi = solve_inner_series(&p, 40).unwrap();
    assert!(phi.iter().all(|x| x.dist_f64(&c(1.0, 0.0)) < 1e-60));
    let fit = connection_constants(&phi, &c(1.0, 0.0), 1, &ConnectionConfig::default()).unwrap();
    assert!(fit.constants[0].as_ref().unwrap().dist_f64(&c(1.0, 0.0)) < 1e-40);
}

#[test]
fn connection_constants_of_known_sequence() {
    // φₙ = n + 2 = [sⁿ]((1−s)^(−2) + (1−s)^(−1))
    let phi: Vec<BigComplex> = (0..80).map(|n| c(n as f64 + 2.0, 0.0)).collect();
    let fit = connection_constants(&phi, &c(2.0, 0.0), 2, &ConnectionConfig::default()).unwrap();
    assert!(fit.constants[0].as_ref().unwrap().dist_f64(&c(1.0, 0.0)) < 1e-40);
    assert!(fit.constants[1].as_ref().unwrap().dist_f64(&c(1.0, 0.0)) < 1e-40);
}

#[test]
fn connection_fit_rejects_wrong_exponent() {
    let phi: Vec<BigComplex> = (0..80).map(|n| c((n as f64 + 1.0).powi(2), 0.0)).collect();
    assert!(connection_constants(&phi, &c(2.0, 0.0), 1, &ConnectionConfig::default()).is_err());
}

#[test]
fn worked_example_component() {
    let spec = ODESpec::worked_example();
    let series = expand_perturbative(&spec, 4).unwrap();
    let b = worked_branch(&c(0.0, 1.0));
    let comp = build_component(&spec, &series, &b, &BuildConfig::new(PREC)).unwrap();
    let a00 = comp.constants[0].clone().unwrap();
    let want = -(sqrt2().div_i64(8));
    assert!(a00.dist_f64(&want) < 1e-20 * want.abs_f64(), "{}", a00.to_string_digits(20));
    assert!(comp.constants[1].clone().unwrap().abs_f64() < 1e-20);
    assert_eq!(comp.unconstrained_from, Some(2));
    // a₀(z) = a₀,₀ z along the path
    for (z, a) in comp.samples.iter().zip(&comp.tracks[0].values) {
        assert!(a.dist_f64(&(&want * z)) < 1e-30);
    }
    assert!(comp.tracks[1].values.iter().all(|a| a.abs_f64() < 1e-20));
    // jump at z = i through order 1 terminates: (2π/ε)|√2 z/8| e^(−Re χ/ε)
    let z = c(0.0, 1.0);
    let eps = c(0.05, 0.0);
    let j0 = comp.stokes_jump(&z, &eps, 0).unwrap();
    let j1 = comp.stokes_jump(&z, &eps, 1).unwrap();
    assert!(j0.dist_f64(&j1) < 1e-20 * j0.abs_f64());
    let mag = 2.0 * std::f64::consts::PI / 0.05 * (2f64.sqrt() / 8.0) * (-0.5f64 / 0.05).exp();
    assert!((j0.abs_f64() - mag).abs() < 1e-12 * mag);
}

#[test]
fn hankel_term_reproduces_euler_jump() {
    let eps = c(0.1, 0.0);
    let j = hankel_power_term(&c(1.0, 0.0), &c(-1.0, 0.0), &eps);
    let want = BigComplex::two_pi_i(PREC) * eps.recip().exp();
    assert!(j.dist_f64(&want) < 1e-60 * want.abs_f64());
}

#[test]
fn late_term_jump_matches_gamma_prefactor() {
    let eps = c(0.07, 0.01);
    for (alpha, chi) in [(c(2.0, 0.0), c(0.4, 0.3)), (c(0.5, 0.0), c(1.0, -0.2)), (c(1.0 / 3.0, 0.0), c(0.7, 0.7))] {
        let amp = c(0.3, -1.1);
        let j = late_term_jump(&amp, &alpha, &chi, &eps);
        let one = c(1.0, 0.0);
        let pref = &(&(BigComplex::two_pi_i(PREC) * &amp) * &eps.pow(&(&one - &alpha))) * &resurgo::algebra::gamma::recip_gamma(&alpha);
        let want = &pref * &(-(&chi / &eps)).exp();
        assert!((j.abs_f64() - want.abs_f64()).abs() < 1e-40 * want.abs_f64());
    }
}

#[test]
fn zero_track_gives_zero_jump() {
    let j = singular_part_jump(&c(2.0, 0.0), &[c(0.0, 0.0)], &c(1.0, 0.0), &c(0.1, 0.0));
    assert!(j.is_zero());
}

#[test]
fn square_root_example_first_coefficients() {
    // P = 2, Q = 1 − z on χ′ = 1 + √z, started at z = 1 with a₀ = 1, a₁ = 5/(48(α−1))
    let spec = ODESpec::new(vec![parse_ratfunc("1-z").unwrap(), RatFunc::from_int(2), RatFunc::one()], vec![]).unwrap();
    let eq = SingulantEquation::from_spec(&spec);
    let path = ComplexPath::polyline(&[c(1.0, 0.0), c(1.5, 1.0), c(3.0, 0.5)], 0.3);
    let b = singulant_branch(&eq, &path, &c(2.0, 0.0), &c(0.0, 0.0), &QuadConfig::for_precision(PREC)).unwrap();
    let alpha = c(1.0 / 3.0, 0.0);
    let one = c(1.0, 0.0);
    let k = &c(5.0, 0.0) / &(&c(48.0, 0.0) * &(&alpha - &one));
    let prop = propagate_coefficients(&spec, &b, &alpha, &[one.clone(), k.clone()], false, &MarchConfig::new(PREC)).unwrap();
    assert!(prop.residual < 1e-20);
    let mut checked = 0;
    for (i, z) in prop.samples.iter().enumerate() {
        let a0 = z.pow(&c(-0.25, 0.0));
        let a1 = &k * &z.pow(&c(-1.75, 0.0));
        assert!(prop.tracks[0].values[i].dist_f64(&a0) < 1e-30);
        assert!(prop.tracks[1].values[i].dist_f64(&a1) < 1e-30);
        checked += 1;
    }
    assert!(checked >= 5);
}

#[test]
fn zero_constant_gives_zero_track() {
    let spec = ODESpec::new(vec![parse_ratfunc("1-z").unwrap(), RatFunc::from_int(2), RatFunc::one()], vec![]).unwrap();
    let eq = SingulantEquation::from_spec(&spec);
    let path = ComplexPath::segment(&c(1.0, 0.0), &c(2.0, 1.0), 3);
    let b = singulant_branch(&eq, &path, &c(2.0, 0.0), &c(0.0, 0.0), &QuadConfig::for_precision(PREC)).unwrap();
    let prop = propagate_coefficients(&spec, &b, &c(0.5, 0.0), &[c(0.0, 0.0)], false, &MarchConfig::new(PREC)).unwrap();
    assert!(prop.tracks[0].values.iter().all(|v| v.is_zero()));
}

#[test]
fn recurrence_display() {
    let r = coefficient_recurrence(&ODESpec::worked_example(), Some(&Rational::from(2))).unwrap();
    assert_eq!(r.leading, "(-3*z - 2χ′)a₀′ - χ″a₀ = 0");
    assert_eq!(r.unconstrained, Some(2));
}

#[test]
fn first_order_closed_forms() {
    let cfg = QuadConfig::for_precision(PREC);
    let w = c(0.3, 0.2);
    let z = c(1.0, 0.5);
    // G = 1, H = 1/z
    let y = first_order_closed_form(|_| Ok(c(1.0, 0.0)), |u| Ok(u.recip()), &w, &z, &cfg).unwrap();
    assert!(y.dist_f64(&(&z - &w).recip()) < 1e-50);
    // G = e^z, H = z: log(e^z − w)/(e^z − w)
    let y = first_order_closed_form(|u| Ok(u.exp()), |u| Ok(u.clone()), &w, &z, &cfg).unwrap();
    let e = &z.exp() - &w;
    assert!(y.dist_f64(&(&e.ln() / &e)) < 1e-50);
    // w = 0 returns the data
    let y = first_order_closed_form(|u| Ok(u.exp()), |u| Ok(u.clone()), &c(0.0, 0.0), &z, &cfg).unwrap();
    assert!(y.dist_f64(&(&z / &z.exp())) < 1e-60);
}

#[test]
fn coalescing_forcing_integral() {
    let cfg = QuadConfig::for_precision(PREC);
    let delta = c(1.0, 0.0);
    let w = c(0.4, -0.3);
    let z = c(1.2, 0.7);
    let y = inhomogeneous_borel_integral(
        |x| Ok(x.recip()),
        |t, x| Ok(&(&delta / &(x * x)) * &(&(&delta * t) / x).sinh()),
        &w,
        &z,
        &cfg,
    )
    .unwrap();
    let want = -(&(&(&delta * &w) / &z).cosh() / &(&w - &z));
    assert!(y.dist_f64(&want) < 1e-50);
    let y0 = inhomogeneous_borel_integral(|x| Ok(x.recip()), |_, _| Ok(c(0.0, 0.0)), &w, &z, &cfg).unwrap();
    assert!(y0.dist_f64(&(&z - &w).recip()) < 1e-60);
}

#[test]
fn switch_terms() {
    let chi = c(0.8, 0.1);
    let eps = c(0.02, 0.0);
    // g = n log n / χ gives 2πi log(χ/ε) e^(−χ/ε)
    let got = general_switch(|n| &(n * &n.ln()) / &chi, &chi, &eps);
    let want = &(BigComplex::two_pi_i(PREC) * (&chi / &eps).ln()) * &(-(&chi / &eps)).exp();
    assert!(got.dist_f64(&want) < 1e-50 * want.abs_f64());
    let t = SwitchTerm::from_power_log(&chi.recip(), &Rational::from(1), 1, &chi);
    assert_eq!(t.log_power, 1);
    assert_eq!(t.eps_power, Rational::from(0));
    assert!(t.coeff.dist_f64(&(-BigComplex::two_pi_i(PREC))) < 1e-60);
}
