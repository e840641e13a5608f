//! Local power series about a point: χ′, the shifted Borel operator acting
//! on `a(z)·t^μ`, and Taylor/Frobenius solutions of the transport equations.

use crate::algebra::series::{series_deriv, series_div, series_mul};
use crate::algebra::{pow2_neg, BigComplex};
use crate::perturbative::ODESpec;
use crate::singulant::SingulantEquation;

use super::TransSeriesError;

pub(crate) type Series = Vec<BigComplex>;

pub(crate) fn zeros(len: usize, prec: u32) -> Series {
    vec![BigComplex::zero(prec); len]
}

fn padded(mut s: Series, len: usize, prec: u32) -> Series {
    s.resize(len, BigComplex::zero(prec));
    s
}

/// Taylor series of the ODE coefficients `Pᵢ` at `z0`.
pub(crate) fn coeff_series(spec: &ODESpec, z0: &BigComplex, len: usize) -> Result<Vec<Series>, TransSeriesError> {
    spec.coeffs
        .iter()
        .map(|p| p.taylor_at(z0, len).map_err(|_| TransSeriesError::SingularCoefficient(z0.to_string_digits(10))))
        .collect()
}

/// `Σ cᵢ vⁱ` with series coefficients.
fn compose(c: &[Series], v: &Series, len: usize) -> Series {
    let prec = v[0].prec();
    let mut acc = zeros(len, prec);
    for ci in c.iter().rev() {
        acc = series_mul(&acc, v, len);
        for (a, b) in acc.iter_mut().zip(ci) {
            *a += b;
        }
    }
    acc
}

fn derivative_coeffs(c: &[Series]) -> Vec<Series> {
    c.iter().enumerate().skip(1).map(|(i, s)| s.iter().map(|x| x.scale(i as i64)).collect()).collect()
}

/// Series of `v = −χ′` solving `Σ Pᵢ vⁱ = 0` by Newton iteration on series,
/// seeded with `v0`. `None` when the root is multiple at `z0`.
pub(crate) fn neg_chiprime_newton(p: &[Series], v0: &BigComplex, len: usize) -> Option<Series> {
    let prec = v0.prec();
    let dp = derivative_coeffs(p);
    let c0: Vec<BigComplex> = p.iter().map(|s| s[0].clone()).collect();
    let d0: Vec<BigComplex> = dp.iter().map(|s| s[0].clone()).collect();
    let scale: f64 = c0.iter().enumerate().map(|(i, c)| i as f64 * c.abs_f64() * v0.abs_f64().max(1.0).powi(i as i32)).sum();
    let fp = crate::algebra::series::horner(&d0, v0);
    if fp.abs_f64() <= pow2_neg(prec as f64 / 4.0) * scale.max(1e-300) {
        return None;
    }
    let mut v = padded(vec![v0.clone()], len, prec);
    let sweeps = (usize::BITS - len.leading_zeros()) as usize + 3;
    for _ in 0..sweeps {
        let f = compose(p, &v, len);
        let g = compose(&dp, &v, len);
        if g[0].is_zero() {
            return None;
        }
        let q = series_div(&f, &g, len);
        for (a, b) in v.iter_mut().zip(&q) {
            *a -= b;
        }
    }
    Some(v)
}

/// Series of `v = −χ′` from a trapezoid Cauchy integral on the circle
/// through `start`, following the branch with `χ′(start) = chip_start`.
/// Used where branches touch at `z0`.
pub(crate) fn neg_chiprime_cauchy(
    spec: &ODESpec,
    z0: &BigComplex,
    start: &BigComplex,
    chip_start: &BigComplex,
    len: usize,
) -> Result<Series, TransSeriesError> {
    let prec = z0.prec();
    let eq = SingulantEquation::from_spec(spec);
    let d = start - z0;
    let k = (4 * len).max(128);
    let mut vals = Vec::with_capacity(k);
    let mut guess = chip_start.clone();
    let mut pts = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let th = BigComplex::pi(prec) * (2 * j) as u32 / k as u32;
        let z = z0 + &(&d * &BigComplex::cis(&th));
        let (c, sep) = eq.root_near(&z, &guess)?;
        if c.dist_f64(&guess) > sep / 3.0 && j > 0 {
            return Err(TransSeriesError::BranchPoint(z0.to_string_digits(10)));
        }
        guess = c.clone();
        pts.push(z);
        vals.push(c);
    }
    if vals[k].dist_f64(&vals[0]) > pow2_neg(prec as f64 / 2.0) * vals[0].abs_f64().max(1.0) {
        return Err(TransSeriesError::BranchPoint(z0.to_string_digits(10)));
    }
    let mut out = Vec::with_capacity(len);
    for n in 0..len {
        let mut acc = BigComplex::zero(prec);
        for j in 0..k {
            acc += &vals[j] * &(&pts[j] - z0).powi(-(n as i64));
        }
        out.push(-acc.div_i64(k as i64));
    }
    Ok(out)
}

/// `μ(μ−1)⋯(μ−k+1)`.
pub(crate) fn falling(mu: &BigComplex, k: usize) -> BigComplex {
    let prec = mu.prec();
    let mut acc = BigComplex::one(prec);
    for j in 0..k {
        acc = &acc * &(mu - &BigComplex::from_i64(j as i64, prec));
    }
    acc
}

/// The shifted operator `Σ Pᵢ Dⁱ ∂_t^(N−i)`, `D = ∂_z + v ∂_t`, applied to
/// `a(z)·t^μ`, grouped by power of t: entry `j` multiplies `t^(μ−N+j)`.
/// Entry 0 vanishes on a singulant branch; entry 1 is the transport term.
/// The returned series are `len − N` long.
pub(crate) fn level_terms(p: &[Series], v: &Series, a: &Series, mu: &BigComplex, len: usize) -> Vec<Series> {
    let prec = mu.prec();
    let n = p.len() - 1;
    let mut out = vec![zeros(len, prec); n + 1];
    for (i, pi) in p.iter().enumerate() {
        let ff = falling(mu, n - i);
        if ff.is_zero() {
            continue;
        }
        let nu = mu - &BigComplex::from_i64((n - i) as i64, prec);
        // states[d] carries the series of the term with d t-derivatives
        let mut states: Vec<Series> = vec![a.iter().map(|x| x * &ff).collect()];
        for _ in 0..i {
            let mut next = vec![zeros(len, prec); states.len() + 1];
            for (d, c) in states.iter().enumerate() {
                let dc = padded(series_deriv(c), len, prec);
                for (x, y) in next[d].iter_mut().zip(&dc) {
                    *x += y;
                }
                let e = &nu - &BigComplex::from_i64(d as i64, prec);
                let vc = series_mul(v, c, len);
                for (x, y) in next[d + 1].iter_mut().zip(&vc) {
                    *x += y * &e;
                }
            }
            states = next;
        }
        for (d, c) in states.iter().enumerate() {
            let pc = series_mul(pi, c, len);
            for (x, y) in out[i - d].iter_mut().zip(&pc) {
                *x += y;
            }
        }
    }
    // each z-derivative costs one reliable term
    out.iter_mut().for_each(|s| s.truncate(len - n));
    out
}

/// Coefficient series `A`, `B` of the transport term `A a′ + B a` for
/// exponent `μ`.
pub(crate) fn transport(p: &[Series], v: &Series, mu: &BigComplex, len: usize) -> (Series, Series) {
    let prec = mu.prec();
    let mut one = zeros(len, prec);
    one[0] = BigComplex::one(prec);
    let mut h = zeros(len, prec);
    h[1] = BigComplex::one(prec);
    let b = level_terms(p, v, &one, mu, len).swap_remove(1);
    let bh = level_terms(p, v, &h, mu, len).swap_remove(1);
    let m = b.len();
    let mut a = zeros(m, prec);
    for k in 0..m {
        a[k] = if k == 0 { bh[0].clone() } else { &bh[k] - &b[k - 1] };
    }
    (a, b)
}

/// Whether `x` is negligible against `scale` at working precision.
pub(crate) fn negligible(x: &BigComplex, scale: f64) -> bool {
    x.abs_f64() <= pow2_neg(x.prec() as f64 / 2.0) * scale.max(f64::MIN_POSITIVE)
}

/// Solves `A a′ + B a = −src` as a power series. At a regular point
/// (`A₀ ≠ 0`) `init` is `a(z0)`. At a simple zero of `A` the solution is
/// the analytic Frobenius series with exponent `β = −B₀/A₁`, which must be
/// a non-negative integer, and `init` is its coefficient of `h^β`.
pub(crate) fn solve_transport(
    a: &Series,
    b: &Series,
    src: &Series,
    init: &BigComplex,
    len: usize,
) -> Result<Series, TransSeriesError> {
    let prec = init.prec();
    let len = len.min(a.len()).min(b.len());
    let scale = a.iter().chain(b.iter()).take(3).map(|x| x.abs_f64()).fold(0.0, f64::max);
    let get = |s: &Series, k: usize| s.get(k).cloned().unwrap_or_else(|| BigComplex::zero(prec));
    let mut c = zeros(len, prec);
    if !negligible(&a[0], scale) {
        c[0] = init.clone();
        for m in 0..len - 1 {
            let mut acc = -get(src, m);
            for l in 0..=m {
                acc -= &b[l] * &c[m - l];
                if l >= 1 {
                    acc -= (&a[l] * &c[m - l + 1]).scale((m - l + 1) as i64);
                }
            }
            c[m + 1] = (&acc / &a[0]).div_i64(m as i64 + 1);
        }
        return Ok(c);
    }
    if a.len() < 2 || negligible(&a[1], scale) {
        return Err(TransSeriesError::NonAlgebraicExponent("transport coefficient has a multiple zero".into()));
    }
    let beta = indicial_exponent(a, b);
    let bi = integer_exponent(&beta)
        .ok_or_else(|| TransSeriesError::NonAlgebraicExponent(format!("local exponent {} is not a non-negative integer", beta.to_string_digits(10))))?;
    for m in 0..len {
        let mut rhs = -get(src, m);
        for k in 0..m {
            let coef = &(&get(a, m + 1 - k) * &BigComplex::from_i64(k as i64, prec)) + &get(b, m - k);
            rhs -= &coef * &c[k];
        }
        let lead = &(&a[1] * &BigComplex::from_i64(m as i64, prec)) + &b[0];
        if m == bi {
            let rs = src.iter().take(m + 1).chain(c.iter().take(m)).map(|x| x.abs_f64()).fold(scale, f64::max);
            if !negligible(&rhs, rs) {
                return Err(TransSeriesError::LogarithmicResonance(m));
            }
            c[m] = init.clone();
        } else {
            c[m] = &rhs / &lead;
        }
    }
    Ok(c)
}

/// `β = −B₀/A₁` at a simple zero of `A`.
pub(crate) fn indicial_exponent(a: &Series, b: &Series) -> BigComplex {
    -(&b[0] / &a[1])
}

pub(crate) fn integer_exponent(beta: &BigComplex) -> Option<usize> {
    let (re, im) = beta.to_f64();
    let k = re.round();
    (k >= 0.0 && (re - k).abs() < 1e-12 && im.abs() < 1e-12).then_some(k as usize)
}

/// Convergence radius estimate from the upper half of a series (root test);
/// infinite when that half vanishes.
pub(crate) fn radius(c: &Series) -> f64 {
    let n = c.len();
    let top = c.iter().map(|x| x.abs_f64()).fold(0.0, f64::max);
    let floor = top * pow2_neg(c.first().map(|x| x.prec()).unwrap_or(256) as f64 - 8.0);
    let mut worst: f64 = 0.0;
    for (k, x) in c.iter().enumerate().skip((n / 2).max(1)) {
        let m = x.abs_f64();
        if m > floor {
            worst = worst.max((m / top.max(1e-300)).powf(1.0 / k as f64));
        }
    }
    if worst == 0.0 {
        f64::INFINITY
    } else {
        1.0 / worst
    }
}
