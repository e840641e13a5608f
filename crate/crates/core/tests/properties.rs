use proptest::prelude::*;
use resurgo::algebra::gamma::gamma_ratio_exact;
use resurgo::algebra::parse::parse_ratfunc;
use resurgo::algebra::series::{star_convolve, TruncatedSeries};
use resurgo::algebra::{BigComplex, GaussianRational, Poly, RatFunc};
use resurgo::borel::pade;

const PREC: u32 = 128;

fn gauss() -> impl Strategy<Value = GaussianRational> {
    (-9i64..=9, -9i64..=9, 1i64..=6).prop_map(|(a, b, d)| &GaussianRational::from_ratio(a, d) + &(&GaussianRational::from_ratio(b, d) * &GaussianRational::i()))
}

fn poly(max_len: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec(gauss(), 1..=max_len).prop_map(Poly::new)
}

fn ratfunc() -> impl Strategy<Value = RatFunc> {
    (poly(4), poly(3)).prop_filter_map("nonzero denominator", |(n, d)| RatFunc::new(n, d).ok())
}

fn series(len: usize) -> impl Strategy<Value = TruncatedSeries> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), len).prop_map(|v| {
        TruncatedSeries::new(BigComplex::zero(PREC), v.into_iter().map(|(re, im)| BigComplex::from_f64(re, im, PREC)).collect())
    })
}

fn close(a: &[BigComplex], b: &[BigComplex], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.dist_f64(y) <= tol * (1.0 + y.abs_f64()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn display_parses_back(r in ratfunc()) {
        prop_assert_eq!(parse_ratfunc(&r.to_string()).unwrap(), r);
    }

    #[test]
    fn product_divides_back(a in ratfunc(), b in ratfunc()) {
        prop_assume!(!b.is_zero());
        prop_assert_eq!((&a * &b).checked_div(&b).unwrap(), a);
    }

    #[test]
    fn star_product_commutes(f in series(8), g in series(8)) {
        let fg = star_convolve(&f, &g).unwrap();
        let gf = star_convolve(&g, &f).unwrap();
        prop_assert!(close(&fg.coeffs, &gf.coeffs, 1e-30));
    }

    #[test]
    fn star_product_associates(f in series(8), g in series(8), h in series(8)) {
        let left = star_convolve(&star_convolve(&f, &g).unwrap(), &h).unwrap();
        let right = star_convolve(&f, &star_convolve(&g, &h).unwrap()).unwrap();
        prop_assert!(close(&left.coeffs, &right.coeffs, 1e-30));
    }

    #[test]
    fn star_of_constants_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let f = TruncatedSeries::new(BigComplex::zero(PREC), vec![BigComplex::from_f64(a, 0.0, PREC), BigComplex::zero(PREC), BigComplex::zero(PREC)]);
        let g = TruncatedSeries::new(BigComplex::zero(PREC), vec![BigComplex::from_f64(b, 0.0, PREC), BigComplex::zero(PREC), BigComplex::zero(PREC)]);
        let fg = star_convolve(&f, &g).unwrap();
        let want = [BigComplex::zero(PREC), &f.coeffs[0] * &g.coeffs[0], BigComplex::zero(PREC)];
        prop_assert!(close(&fg.coeffs, &want, 1e-35));
    }

    #[test]
    fn pade_recovers_rational_functions(
        p in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 3),
        roots in prop::collection::vec((1.5f64..4.0, 0.0f64..std::f64::consts::TAU), 2),
    ) {
        // p(w) / ((1 − w/r₁)(1 − w/r₂)) with |rᵢ| ≥ 1.5
        let num: Vec<BigComplex> = p.iter().map(|&(re, im)| BigComplex::from_f64(re, im, PREC)).collect();
        let one = BigComplex::one(PREC);
        let rs: Vec<BigComplex> = roots.iter().map(|&(m, a)| BigComplex::from_f64(m * a.cos(), m * a.sin(), PREC)).collect();
        prop_assume!(rs[0].dist_f64(&rs[1]) > 0.1);
        let f = |w: &BigComplex| {
            let n = &(&num[0] + &(w * &num[1])) + &(&(w * w) * &num[2]);
            &n / &(&(&one - &(w / &rs[0])) * &(&one - &(w / &rs[1])))
        };
        // Taylor coefficients from the product of geometric series
        let len = 16;
        let g: Vec<BigComplex> = (0..len).map(|k| {
            let mut acc = BigComplex::zero(PREC);
            for j in 0..=k {
                acc += &rs[0].powi(-(j as i64)) * &rs[1].powi(-((k - j) as i64));
            }
            acc
        }).collect();
        let c: Vec<BigComplex> = (0..len).map(|k| {
            let mut acc = BigComplex::zero(PREC);
            for (i, a) in num.iter().enumerate() {
                if i <= k {
                    acc += a * &g[k - i];
                }
            }
            acc
        }).collect();
        prop_assume!(num[2].abs_f64() > 0.05);
        let approx = pade(&c, 2, 2).unwrap();
        let w = BigComplex::from_f64(0.7, -0.4, PREC);
        prop_assert!(approx.eval(&w).dist_f64(&f(&w)) < 1e-25 * f(&w).abs_f64().max(1.0));
    }

    #[test]
    fn gamma_ratio_steps(alpha in 0.1f64..3.0, n in 0u64..60) {
        let a = BigComplex::from_f64(alpha, 0.0, PREC);
        let r0 = gamma_ratio_exact(n, &a);
        let r1 = gamma_ratio_exact(n + 1, &a);
        let step = &(&a + &BigComplex::from_i64(n as i64, PREC)) / &BigComplex::from_i64(n as i64 + 1, PREC);
        prop_assert!(r1.dist_f64(&(&r0 * &step)) < 1e-30 * r1.abs_f64());
    }
}
