use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float};

/// Working precision used when the caller does not pick one.
pub const DEFAULT_PRECISION: u32 = 256;

/// Arbitrary-precision complex number.
///
/// Binary operations on operands of different precision round the result to
/// the smaller of the two.
#[derive(Clone, PartialEq)]
pub struct BigComplex(Complex);

impl BigComplex {
    pub fn zero(prec: u32) -> Self {
        BigComplex(Complex::new(prec))
    }

    pub fn one(prec: u32) -> Self {
        BigComplex(Complex::with_val(prec, 1))
    }

    pub fn i(prec: u32) -> Self {
        BigComplex(Complex::with_val(prec, (0, 1)))
    }

    pub fn from_f64(re: f64, im: f64, prec: u32) -> Self {
        BigComplex(Complex::with_val(prec, (re, im)))
    }

    pub fn from_i64(n: i64, prec: u32) -> Self {
        BigComplex(Complex::with_val(prec, n))
    }

    pub fn from_floats(re: &Float, im: &Float, prec: u32) -> Self {
        BigComplex(Complex::with_val(prec, (re, im)))
    }

    pub fn from_real(re: &Float) -> Self {
        BigComplex(Complex::with_val(re.prec(), (re, 0)))
    }

    pub fn from_rationals(re: &rug::Rational, im: &rug::Rational, prec: u32) -> Self {
        BigComplex(Complex::with_val(prec, (re, im)))
    }

    /// Parses "re,im" or a single real number.
    pub fn parse_pair(text: &str, prec: u32) -> Option<Self> {
        let mut parts = text.split(',');
        let re = Float::parse(parts.next()?.trim()).ok()?;
        let im = match parts.next() {
            Some(t) => Float::with_val(prec, Float::parse(t.trim()).ok()?),
            None => Float::new(prec),
        };
        if parts.next().is_some() {
            return None;
        }
        Some(BigComplex(Complex::with_val(prec, (Float::with_val(prec, re), im))))
    }

    pub fn from_complex(c: Complex) -> Self {
        BigComplex(c)
    }

    pub fn as_complex(&self) -> &Complex {
        &self.0
    }

    pub fn into_complex(self) -> Complex {
        self.0
    }

    pub fn prec(&self) -> u32 {
        let (a, b) = self.0.prec();
        a.min(b)
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        BigComplex(Complex::with_val(prec, &self.0))
    }

    pub fn re(&self) -> &Float {
        self.0.real()
    }

    pub fn im(&self) -> &Float {
        self.0.imag()
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.0.abs_ref())
    }

    pub fn abs_f64(&self) -> f64 {
        self.abs().to_f64()
    }

    pub fn arg(&self) -> Float {
        Float::with_val(self.prec(), self.0.arg_ref())
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.0.real().to_f64(), self.0.imag().to_f64())
    }

    pub fn is_zero(&self) -> bool {
        self.0.real().is_zero() && self.0.imag().is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.real().is_finite() && self.0.imag().is_finite()
    }

    pub fn conj(&self) -> Self {
        BigComplex(self.0.clone().conj())
    }

    pub fn recip(&self) -> Self {
        BigComplex(self.0.clone().recip())
    }

    pub fn exp(&self) -> Self {
        BigComplex(self.0.clone().exp())
    }

    pub fn ln(&self) -> Self {
        BigComplex(self.0.clone().ln())
    }

    pub fn sqrt(&self) -> Self {
        BigComplex(self.0.clone().sqrt())
    }

    pub fn sin(&self) -> Self {
        BigComplex(self.0.clone().sin())
    }

    pub fn cos(&self) -> Self {
        BigComplex(self.0.clone().cos())
    }

    pub fn sinh(&self) -> Self {
        BigComplex(self.0.clone().sinh())
    }

    pub fn cosh(&self) -> Self {
        BigComplex(self.0.clone().cosh())
    }

    /// Principal power `self^e`.
    pub fn pow(&self, e: &BigComplex) -> Self {
        if e.is_zero() {
            return BigComplex::one(self.prec().min(e.prec()));
        }
        let prec = self.prec().min(e.prec());
        BigComplex(Complex::with_val(prec, (&self.0).pow(&e.0)))
    }

    pub fn powi(&self, n: i64) -> Self {
        let prec = self.prec();
        if n == 0 {
            return BigComplex::one(prec);
        }
        let mut base = if n < 0 { self.recip() } else { self.clone() };
        let mut k = n.unsigned_abs();
        let mut acc = BigComplex::one(prec);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn mul_i(&self) -> Self {
        BigComplex(self.0.clone().mul_i(false))
    }

    pub fn scale(&self, k: i64) -> Self {
        BigComplex(Complex::with_val(self.prec(), &self.0 * k))
    }

    pub fn scale_f64(&self, k: f64) -> Self {
        BigComplex(Complex::with_val(self.prec(), &self.0 * k))
    }

    pub fn scale_real(&self, k: &Float) -> Self {
        BigComplex(Complex::with_val(self.prec().min(k.prec()), &self.0 * k))
    }

    pub fn div_i64(&self, k: i64) -> Self {
        BigComplex(Complex::with_val(self.prec(), &self.0 / k))
    }

    pub fn dist(&self, other: &BigComplex) -> Float {
        (self - other).abs()
    }

    pub fn dist_f64(&self, other: &BigComplex) -> f64 {
        self.dist(other).to_f64()
    }

    pub fn pi(prec: u32) -> Float {
        Float::with_val(prec, Constant::Pi)
    }

    /// 2πi at the given precision.
    pub fn two_pi_i(prec: u32) -> Self {
        BigComplex(Complex::with_val(prec, (0, Float::with_val(prec, Constant::Pi) * 2u32)))
    }

    /// Unit complex number e^{iθ}.
    pub fn cis(theta: &Float) -> Self {
        let prec = theta.prec();
        let (s, c) = theta.clone().sin_cos(Float::new(prec));
        BigComplex(Complex::with_val(prec, (c, s)))
    }

    /// Decimal rendering with `digits` significant digits per part.
    pub fn to_string_digits(&self, digits: usize) -> String {
        let re = self.0.real().to_string_radix(10, Some(digits));
        let im = self.0.imag().to_string_radix(10, Some(digits));
        if im.starts_with('-') {
            format!("{re}{im}i")
        } else {
            format!("{re}+{im}i")
        }
    }
}

impl fmt::Debug for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_digits(20))
    }
}

impl fmt::Display for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = (self.prec() as f64 * std::f64::consts::LOG10_2).floor() as usize;
        write!(f, "{}", self.to_string_digits(digits.max(1)))
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $atr:ident, $amethod:ident, $op:tt) => {
        impl<'a, 'b> $tr<&'b BigComplex> for &'a BigComplex {
            type Output = BigComplex;
            fn $method(self, rhs: &'b BigComplex) -> BigComplex {
                let prec = self.prec().min(rhs.prec());
                BigComplex(Complex::with_val(prec, &self.0 $op &rhs.0))
            }
        }
        impl $tr<BigComplex> for BigComplex {
            type Output = BigComplex;
            fn $method(self, rhs: BigComplex) -> BigComplex {
                (&self).$method(&rhs)
            }
        }
        impl<'b> $tr<&'b BigComplex> for BigComplex {
            type Output = BigComplex;
            fn $method(self, rhs: &'b BigComplex) -> BigComplex {
                (&self).$method(rhs)
            }
        }
        impl<'a> $tr<BigComplex> for &'a BigComplex {
            type Output = BigComplex;
            fn $method(self, rhs: BigComplex) -> BigComplex {
                self.$method(&rhs)
            }
        }
        impl<'b> $atr<&'b BigComplex> for BigComplex {
            fn $amethod(&mut self, rhs: &'b BigComplex) {
                *self = (&*self).$method(rhs);
            }
        }
        impl $atr<BigComplex> for BigComplex {
            fn $amethod(&mut self, rhs: BigComplex) {
                *self = (&*self).$method(&rhs);
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign, +);
binop!(Sub, sub, SubAssign, sub_assign, -);
binop!(Mul, mul, MulAssign, mul_assign, *);
binop!(Div, div, DivAssign, div_assign, /);

impl Neg for BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex(-self.0)
    }
}

impl<'a> Neg for &'a BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex(-self.0.clone())
    }
}

/// Real float helper at a given precision.
pub fn real(x: f64, prec: u32) -> Float {
    Float::with_val(prec, x)
}

/// 2^(-bits) as an f64 (saturating to zero for large exponents).
pub fn pow2_neg(bits: f64) -> f64 {
    (-bits * std::f64::consts::LN_2).exp()
}

impl serde::Serialize for BigComplex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("BigComplex", 2)?;
        let digits = (self.prec() as f64 * std::f64::consts::LOG10_2).floor() as usize;
        st.serialize_field("re", &self.re().to_string_radix(10, Some(digits)))?;
        st.serialize_field("im", &self.im().to_string_radix(10, Some(digits)))?;
        st.end()
    }
}
