use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::{AlgebraError, BigComplex, GaussianRational, Poly};

/// Exact rational function `num/den` in lowest terms with monic denominator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl Default for RatFunc {
    fn default() -> Self {
        RatFunc::zero()
    }
}

impl RatFunc {
    /// Builds and canonicalizes `num/den`.
    pub fn new(num: Poly, den: Poly) -> Result<Self, AlgebraError> {
        if den.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        Ok(Self::canonical(num, den))
    }

    fn canonical(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return RatFunc::zero();
        }
        let g = Poly::gcd(&num, &den);
        let (num, den) = if g.is_constant() {
            (num, den)
        } else {
            (num.exact_div(&g), den.exact_div(&g))
        };
        Self::normalize_lead(num, den)
    }

    fn normalize_lead(num: Poly, den: Poly) -> Self {
        let lead = den.leading().unwrap().clone();
        if lead.is_one() {
            RatFunc { num, den }
        } else {
            let inv = lead.recip();
            RatFunc { num: num.scale(&inv), den: den.scale(&inv) }
        }
    }

    /// Cancels only the factors of `num` shared with `g`, where `g` is known
    /// to contain every common factor of `num` and `den`.
    fn reduce_with(num: Poly, den: Poly, g: &Poly) -> Self {
        if num.is_zero() {
            return RatFunc::zero();
        }
        if g.is_constant() {
            return Self::normalize_lead(num, den);
        }
        let h = Poly::gcd(&num, g);
        if h.is_constant() {
            Self::normalize_lead(num, den)
        } else {
            Self::normalize_lead(num.exact_div(&h), den.exact_div(&h))
        }
    }

    pub fn zero() -> Self {
        RatFunc { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        RatFunc::from_poly(Poly::one())
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFunc { num: p, den: Poly::one() }
    }

    pub fn constant(c: GaussianRational) -> Self {
        RatFunc::from_poly(Poly::constant(c))
    }

    pub fn from_int(n: i64) -> Self {
        RatFunc::constant(GaussianRational::from_int(n))
    }

    pub fn z() -> Self {
        RatFunc::from_poly(Poly::z())
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn as_constant(&self) -> Option<GaussianRational> {
        if self.num.is_constant() && self.den.is_constant() {
            Some(self.num.coeff(0))
        } else {
            None
        }
    }

    pub fn checked_div(&self, o: &RatFunc) -> Result<RatFunc, AlgebraError> {
        if o.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        let inv = RatFunc::normalize_lead(o.den.clone(), o.num.clone());
        Ok(self * &inv)
    }

    pub fn scale(&self, c: &GaussianRational) -> RatFunc {
        if c.is_zero() {
            return RatFunc::zero();
        }
        RatFunc { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn pow(&self, e: i32) -> Result<RatFunc, AlgebraError> {
        let base = if e < 0 { RatFunc::one().checked_div(self)? } else { self.clone() };
        let k = e.unsigned_abs();
        Ok(RatFunc { num: base.num.pow(k), den: base.den.pow(k) })
    }

    /// Quotient-rule derivative in canonical form.
    pub fn derivative(&self) -> RatFunc {
        if self.den.is_constant() {
            return RatFunc::from_poly(self.num.derivative());
        }
        let dprime = self.den.derivative();
        let g = Poly::gcd(&self.den, &dprime);
        let d_over_g = self.den.exact_div(&g);
        let dp_over_g = dprime.exact_div(&g);
        let num = &(&self.num.derivative() * &d_over_g) - &(&self.num * &dp_over_g);
        if num.is_zero() {
            return RatFunc::zero();
        }
        // For coprime num/den the result is already in lowest terms.
        RatFunc::normalize_lead(num, &self.den * &d_over_g)
    }

    pub fn eval_complex(&self, z: &BigComplex) -> Result<BigComplex, AlgebraError> {
        let d = self.den.eval_complex(z);
        if d.is_zero() {
            return Err(AlgebraError::Pole);
        }
        Ok(self.num.eval_complex(z) / d)
    }

    pub fn eval(&self, z: &GaussianRational) -> Result<GaussianRational, AlgebraError> {
        let d = self.den.eval(z);
        if d.is_zero() {
            return Err(AlgebraError::Pole);
        }
        Ok(&self.num.eval(z) / &d)
    }

    /// Evaluates `self` and its first `k` derivatives' Taylor coefficients at
    /// `z0`: returns `c_j` with `self(z0+h) = Σ c_j h^j` for `j < len`.
    pub fn taylor_at(&self, z0: &BigComplex, len: usize) -> Result<Vec<BigComplex>, AlgebraError> {
        let prec = z0.prec();
        let n = shift_coeffs(&self.num.to_complex_coeffs(prec), z0);
        let d = shift_coeffs(&self.den.to_complex_coeffs(prec), z0);
        if d[0].is_zero() {
            return Err(AlgebraError::Pole);
        }
        Ok(super::series::series_div(&pad(n, len), &pad(d, len), len))
    }

    /// Laurent expansion at `z0`: returns `(v, c)` with
    /// `self(z0+h) = h^v Σ c_j h^j`, `c_0 ≠ 0` (numerically), `len` terms.
    /// Zeros of the denominator at `z0` are located by magnitude against `tol`.
    pub fn laurent_at(&self, z0: &BigComplex, len: usize, tol: f64) -> (i64, Vec<BigComplex>) {
        let prec = z0.prec();
        let n = shift_coeffs(&self.num.to_complex_coeffs(prec), z0);
        let d = shift_coeffs(&self.den.to_complex_coeffs(prec), z0);
        let vn = leading_index(&n, tol);
        let vd = leading_index(&d, tol);
        let (vn, vd) = match (vn, vd) {
            (Some(a), Some(b)) => (a, b),
            _ => return (0, vec![BigComplex::zero(prec); len]),
        };
        let n = pad(n[vn..].to_vec(), len);
        let d = pad(d[vd..].to_vec(), len);
        (vn as i64 - vd as i64, super::series::series_div(&n, &d, len))
    }

    /// Pole order at an exact point (0 if regular).
    pub fn pole_order_exact(&self, z0: &GaussianRational) -> usize {
        let lin = Poly::new(vec![-z0, GaussianRational::one()]);
        let mut d = self.den.clone();
        let mut k = 0;
        loop {
            let (q, r) = d.div_rem(&lin);
            if !r.is_zero() || d.is_constant() {
                return k;
            }
            d = q;
            k += 1;
        }
    }
}

fn pad(mut v: Vec<BigComplex>, len: usize) -> Vec<BigComplex> {
    let prec = v.first().map(|c| c.prec()).unwrap_or(super::DEFAULT_PRECISION);
    v.resize(len.max(v.len()), BigComplex::zero(prec));
    v.truncate(len);
    v
}

fn leading_index(c: &[BigComplex], tol: f64) -> Option<usize> {
    let scale = c.iter().map(|x| x.abs_f64()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    c.iter().position(|x| x.abs_f64() > tol * scale)
}

/// Coefficients of `p(z0 + h)` in powers of `h` (Horner-style Taylor shift).
pub fn shift_coeffs(p: &[BigComplex], z0: &BigComplex) -> Vec<BigComplex> {
    let mut c = p.to_vec();
    let n = c.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            let t = &c[j + 1] * z0;
            c[j] += t;
        }
    }
    if c.is_empty() {
        c.push(BigComplex::zero(z0.prec()));
    }
    c
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_constant() {
            return write!(f, "{}", self.num);
        }
        let den = self.den.fmt_poly();
        let den_is_atom = self.den.is_monomial();
        if let Some(c) = self.num.is_constant().then(|| self.num.coeff(0)) {
            if c.is_real() {
                let p = c.re.numer();
                let q = c.re.denom();
                return if *q == 1 {
                    if den_is_atom {
                        write!(f, "{p}/{den}")
                    } else {
                        write!(f, "{p}/({den})")
                    }
                } else {
                    write!(f, "{p}/({q}*{})", if den_is_atom { den } else { format!("({den})") })
                };
            }
        }
        let num = self.num.fmt_poly();
        let num = if self.num.coeffs().iter().filter(|c| !c.is_zero()).count() > 1 {
            format!("({num})")
        } else {
            num
        };
        if den_is_atom {
            write!(f, "{num}/{den}")
        } else {
            write!(f, "{num}/({den})")
        }
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFunc({self})")
    }
}

impl<'a, 'b> Add<&'b RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn add(self, o: &'b RatFunc) -> RatFunc {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            return RatFunc::reduce_with(&self.num + &o.num, self.den.clone(), &self.den);
        }
        let g = Poly::gcd(&self.den, &o.den);
        let a = self.den.exact_div(&g);
        let b = o.den.exact_div(&g);
        let num = &(&self.num * &b) + &(&o.num * &a);
        RatFunc::reduce_with(num, &self.den * &b, &g)
    }
}

impl<'a, 'b> Sub<&'b RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn sub(self, o: &'b RatFunc) -> RatFunc {
        self + &(-o)
    }
}

impl<'a, 'b> Mul<&'b RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn mul(self, o: &'b RatFunc) -> RatFunc {
        if self.is_zero() || o.is_zero() {
            return RatFunc::zero();
        }
        let g1 = Poly::gcd(&self.num, &o.den);
        let g2 = Poly::gcd(&o.num, &self.den);
        let n1 = self.num.exact_div(&g1);
        let d2 = o.den.exact_div(&g1);
        let n2 = o.num.exact_div(&g2);
        let d1 = self.den.exact_div(&g2);
        RatFunc::normalize_lead(&n1 * &n2, &d1 * &d2)
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }
}

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        -&self
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr<RatFunc> for RatFunc {
            type Output = RatFunc;
            fn $m(self, o: RatFunc) -> RatFunc {
                (&self).$m(&o)
            }
        }
        impl<'b> $tr<&'b RatFunc> for RatFunc {
            type Output = RatFunc;
            fn $m(self, o: &'b RatFunc) -> RatFunc {
                (&self).$m(o)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;

    fn inv_z() -> RatFunc {
        RatFunc::new(Poly::one(), Poly::z()).unwrap()
    }

    #[test]
    fn like_terms_add() {
        let s = &inv_z() + &inv_z();
        assert_eq!(s.to_string(), "2/z");
    }

    #[test]
    fn product_cancels() {
        let a = RatFunc::new(Poly::one(), Poly::from_ints(&[1, -1])).unwrap();
        let b = RatFunc::new(Poly::from_ints(&[1, -1]), Poly::from_ints(&[2, -1])).unwrap();
        let p = &a * &b;
        let expect = RatFunc::new(Poly::one(), Poly::from_ints(&[2, -1])).unwrap();
        assert_eq!(p, expect);
    }

    #[test]
    fn power_rule_derivatives() {
        assert_eq!(inv_z().derivative().to_string(), "-1/z^2");
        let f = RatFunc::new(Poly::constant(GaussianRational::from_ratio(3, 4)), Poly::z().pow(3))
            .unwrap();
        assert_eq!(f.derivative().to_string(), "-9/(4*z^4)");
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert!(inv_z().checked_div(&RatFunc::zero()).is_err());
    }
}
