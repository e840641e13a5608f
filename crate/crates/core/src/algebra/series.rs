use rug::Integer;

use super::{AlgebraError, BigComplex};

/// Power series `Σ c_k (w - base)^k` truncated at `order`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries {
    pub base: BigComplex,
    pub coeffs: Vec<BigComplex>,
}

impl TruncatedSeries {
    pub fn new(base: BigComplex, coeffs: Vec<BigComplex>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least one coefficient");
        TruncatedSeries { base, coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn prec(&self) -> u32 {
        self.coeffs[0].prec()
    }

    /// Horner evaluation at `w`.
    pub fn eval(&self, w: &BigComplex) -> BigComplex {
        let h = w - &self.base;
        let mut acc = BigComplex::zero(self.prec());
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &h) + c;
        }
        acc
    }
}

/// Borel-plane convolution `∫₀^w f(s) g(w−s) ds`, term by term.
pub fn star_convolve(f: &TruncatedSeries, g: &TruncatedSeries) -> Result<TruncatedSeries, AlgebraError> {
    let prec = f.prec().min(g.prec());
    if f.base.dist_f64(&g.base) > 0.0 {
        return Err(AlgebraError::BaseMismatch);
    }
    let order = f.order().min(g.order());
    let mut out = vec![BigComplex::zero(prec); order + 1];
    for (n, slot) in out.iter_mut().enumerate().skip(1) {
        let mut acc = BigComplex::zero(prec);
        for i in 0..n {
            let j = n - 1 - i;
            // i! j! / n! = 1 / (n · C(n-1, i))
            let denom = Integer::from(Integer::binomial_u(n as u32 - 1, i as u32)) * n as u32;
            let w = rug::Float::with_val(prec, 1) / rug::Float::with_val(prec, &denom);
            acc += (&f.coeffs[i] * &g.coeffs[j]).scale_real(&w);
        }
        *slot = acc;
    }
    Ok(TruncatedSeries::new(f.base.clone(), out))
}

/// Truncated product of two coefficient vectors, `len` terms.
pub fn series_mul(a: &[BigComplex], b: &[BigComplex], len: usize) -> Vec<BigComplex> {
    let prec = a.first().or(b.first()).map(|c| c.prec()).unwrap_or(super::DEFAULT_PRECISION);
    let mut out = vec![BigComplex::zero(prec); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Truncated quotient `a / b`; requires `b[0] ≠ 0`.
pub fn series_div(a: &[BigComplex], b: &[BigComplex], len: usize) -> Vec<BigComplex> {
    let prec = b[0].prec();
    let inv0 = b[0].recip();
    let mut out: Vec<BigComplex> = Vec::with_capacity(len);
    for k in 0..len {
        let mut acc = a.get(k).cloned().unwrap_or_else(|| BigComplex::zero(prec));
        for j in 1..=k.min(b.len().saturating_sub(1)) {
            acc -= &b[j] * &out[k - j];
        }
        out.push(&acc * &inv0);
    }
    out
}

pub fn series_deriv(a: &[BigComplex]) -> Vec<BigComplex> {
    if a.len() <= 1 {
        let prec = a.first().map(|c| c.prec()).unwrap_or(super::DEFAULT_PRECISION);
        return vec![BigComplex::zero(prec)];
    }
    a.iter().enumerate().skip(1).map(|(k, c)| c.scale(k as i64)).collect()
}

/// Antiderivative vanishing at the expansion point; one term longer.
pub fn series_integrate(a: &[BigComplex]) -> Vec<BigComplex> {
    let prec = a[0].prec();
    let mut out = vec![BigComplex::zero(prec)];
    out.extend(a.iter().enumerate().map(|(k, c)| c.div_i64(k as i64 + 1)));
    out
}

/// `exp` of a series, `len` terms, via the standard recurrence.
pub fn series_exp(a: &[BigComplex], len: usize) -> Vec<BigComplex> {
    let prec = a[0].prec();
    let mut out = vec![a[0].exp()];
    for k in 1..len {
        let mut acc = BigComplex::zero(prec);
        for j in 1..=k.min(a.len() - 1) {
            acc += (&a[j] * &out[k - j]).scale(j as i64);
        }
        out.push(acc.div_i64(k as i64));
    }
    out
}

/// Horner evaluation of `Σ c_k h^k`.
pub fn horner(c: &[BigComplex], h: &BigComplex) -> BigComplex {
    let mut acc = BigComplex::zero(h.prec());
    for x in c.iter().rev() {
        acc = &(&acc * h) + x;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> BigComplex {
        BigComplex::from_f64(x, 0.0, 128)
    }

    #[test]
    fn constant_star_constant_is_w() {
        let one = TruncatedSeries::new(c(0.0), vec![c(1.0), c(0.0), c(0.0)]);
        let r = star_convolve(&one, &one).unwrap();
        assert_eq!(r.coeffs[0].to_f64().0, 0.0);
        assert_eq!(r.coeffs[1].to_f64().0, 1.0);
        assert_eq!(r.coeffs[2].to_f64().0, 0.0);
    }

    #[test]
    fn division_inverts_product() {
        let a = vec![c(1.0), c(2.0), c(-1.0), c(0.5)];
        let b = vec![c(2.0), c(1.0), c(3.0), c(0.0)];
        let p = series_mul(&a, &b, 4);
        let q = series_div(&p, &b, 4);
        for (x, y) in q.iter().zip(&a) {
            assert!(x.dist_f64(y) < 1e-30);
        }
    }

    #[test]
    fn exp_of_linear() {
        let e = series_exp(&[c(0.0), c(1.0)], 6);
        assert!((e[5].to_f64().0 - 1.0 / 120.0).abs() < 1e-15);
    }
}
