//! Complex gamma function helpers.

use std::sync::{Mutex, OnceLock};

use rug::{Float, Integer, Rational};

use super::quad::{integrate_hankel_loop, QuadConfig};
use super::series::series_exp;
use super::{AlgebraError, BigComplex};

fn bernoulli_even(count: usize) -> Vec<Rational> {
    static CACHE: OnceLock<Mutex<Vec<Rational>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    let mut b = cache.lock().unwrap();
    // b[m] holds B_m for all m, grown on demand via the standard recurrence.
    let needed = 2 * count + 1;
    while b.len() < needed {
        let m = b.len();
        if m == 0 {
            b.push(Rational::from(1));
            continue;
        }
        let mut acc = Rational::new();
        for k in 0..m {
            let c = Integer::from(Integer::binomial_u((m + 1) as u32, k as u32));
            acc += Rational::from(&b[k] * &c);
        }
        b.push(-acc / Rational::from(m as u32 + 1));
    }
    (1..=count).map(|k| b[2 * k].clone()).collect()
}

/// Stirling series for ln Γ(z), valid for large |z| away from the negative axis.
fn ln_gamma_stirling(z: &BigComplex, terms: usize) -> BigComplex {
    let prec = z.prec();
    let half = BigComplex::from_f64(0.5, 0.0, prec);
    let two_pi = Float::with_val(prec, BigComplex::pi(prec) * 2u32);
    let ln_2pi = BigComplex::from_real(&two_pi.ln());
    let mut acc = &(&(z - &half) * &z.ln()) - z;
    acc += ln_2pi.div_i64(2);
    let zinv = z.recip();
    let zinv2 = &zinv * &zinv;
    let mut zpow = zinv.clone();
    for (k, b) in bernoulli_even(terms).iter().enumerate() {
        let k = (k + 1) as i64;
        let coeff = BigComplex::from_rationals(b, &Rational::new(), prec).div_i64(2 * k * (2 * k - 1));
        acc += &coeff * &zpow;
        zpow = &zpow * &zinv2;
    }
    acc
}

fn shift_for(prec: u32) -> f64 {
    0.13 * prec as f64 + 12.0
}

/// Returns `(P, ln Γ(z+N))` with `P = z(z+1)…(z+N−1)`.
fn shifted(z: &BigComplex) -> (BigComplex, BigComplex) {
    let prec = z.prec();
    let target = shift_for(prec);
    let mut prod = BigComplex::one(prec);
    let mut w = z.clone();
    while w.abs_f64() < target || w.re().to_f64() < target / 2.0 {
        prod = &prod * &w;
        w += BigComplex::one(prec);
    }
    let terms = (prec as usize) / 4 + 10;
    (prod, ln_gamma_stirling(&w, terms))
}

pub fn gamma(z: &BigComplex) -> BigComplex {
    let (p, lg) = shifted(z);
    lg.exp() / p
}

/// 1/Γ(z); exactly zero at non-positive integers.
pub fn recip_gamma(z: &BigComplex) -> BigComplex {
    let (p, lg) = shifted(z);
    if p.is_zero() {
        return p;
    }
    p * (-lg).exp()
}

/// Coefficients `c_k` of Γ(n+α)/Γ(n+1) ~ n^(α−1) Σ c_k n^(−k), k ≤ order.
pub fn gamma_ratio_coeffs(alpha: &BigComplex, order: usize) -> Vec<BigComplex> {
    let prec = alpha.prec();
    let len = order + 1;
    // (t/(e^t−1))^α e^{αt}: log of the first factor by series log of (e^t−1)/t.
    let mut f = Vec::with_capacity(len + 1);
    let mut fact = Float::with_val(prec, 1);
    for k in 0..=len {
        fact *= (k + 1) as u32;
        f.push(BigComplex::from_real(&(Float::with_val(prec, 1) / &fact)));
    }
    let fprime: Vec<BigComplex> = f.iter().enumerate().skip(1).map(|(k, c)| c.scale(k as i64)).collect();
    let q = super::series::series_div(&fprime, &f, len);
    let mut logf = vec![BigComplex::zero(prec)];
    logf.extend(q.iter().enumerate().map(|(k, c)| c.div_i64(k as i64 + 1)));
    logf.truncate(len);
    let mut arg: Vec<BigComplex> = logf.iter().map(|c| -(c * alpha)).collect();
    if len > 1 {
        arg[1] += alpha;
    }
    let e = series_exp(&arg, len);
    let one = BigComplex::one(prec);
    let mut falling = one.clone();
    let mut out = Vec::with_capacity(len);
    for (k, ek) in e.iter().enumerate() {
        out.push(&falling * ek);
        falling = &falling * &(alpha - &(&one.scale(k as i64) + &one));
    }
    out
}

/// n^(α−1)·Σ_{k≤order} c_k n^(−k), the large-n expansion of Γ(n+α)/Γ(n+1).
pub fn gamma_ratio_expansion(n: u64, alpha: &BigComplex, order: usize) -> BigComplex {
    let prec = alpha.prec();
    let c = gamma_ratio_coeffs(alpha, order);
    let nn = BigComplex::from_i64(n as i64, prec);
    let ninv = nn.recip();
    let mut acc = BigComplex::zero(prec);
    for ck in c.iter().rev() {
        acc = &(&acc * &ninv) + ck;
    }
    let one = BigComplex::one(prec);
    &nn.pow(&(alpha - &one)) * &acc
}

/// Exact Γ(n+α)/Γ(n+1) by the product recurrence.
pub fn gamma_ratio_exact(n: u64, alpha: &BigComplex) -> BigComplex {
    let prec = alpha.prec();
    // Γ(n+α)/Γ(n+1) = Γ(α)·Π_{j<n}(j+α)/(j+1), computed without Γ(α) when α
    // is a non-positive integer would vanish; use the direct gamma otherwise.
    let g = gamma(alpha);
    let mut acc = g;
    for j in 0..n {
        let num = alpha + &BigComplex::from_i64(j as i64, prec);
        acc = (&acc * &num).div_i64(j as i64 + 1);
    }
    acc
}

/// 1/Γ(α) = −(1/2πi) ∮ (−t)^(−α) e^(−t) dt on a Hankel loop around [0, ∞).
pub fn reciprocal_gamma_hankel(alpha: &BigComplex, cfg: &QuadConfig) -> Result<BigComplex, AlgebraError> {
    let prec = alpha.prec();
    let neg_alpha = -alpha.clone();
    let zero = BigComplex::zero(prec);
    let h = Float::with_val(prec, 1);
    let r = integrate_hankel_loop(&zero, &BigComplex::one(prec), &h, cfg, |t| {
        Ok((-t.clone()).pow(&neg_alpha) * (-t.clone()).exp())
    })?;
    Ok(-(r.value / BigComplex::two_pi_i(prec)))
}
