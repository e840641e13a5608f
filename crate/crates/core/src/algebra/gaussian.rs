use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::{Integer, Rational};

use super::BigComplex;

/// Exact complex rational `re + im·i`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussianRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussianRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        GaussianRational { re, im }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn i() -> Self {
        GaussianRational::new(Rational::new(), Rational::from(1))
    }

    pub fn from_int(n: i64) -> Self {
        GaussianRational::new(Rational::from(n), Rational::new())
    }

    pub fn from_ratio(p: i64, q: i64) -> Self {
        GaussianRational::new(Rational::from((p, q)), Rational::new())
    }

    pub fn from_rational(r: Rational) -> Self {
        GaussianRational::new(r, Rational::new())
    }

    pub fn is_zero(&self) -> bool {
        self.re.cmp0().is_eq() && self.im.cmp0().is_eq()
    }

    pub fn is_one(&self) -> bool {
        self.re == 1 && self.im.cmp0().is_eq()
    }

    pub fn is_real(&self) -> bool {
        self.im.cmp0().is_eq()
    }

    pub fn conj(&self) -> Self {
        GaussianRational::new(self.re.clone(), Rational::from(-&self.im))
    }

    pub fn norm(&self) -> Rational {
        Rational::from(&self.re * &self.re) + Rational::from(&self.im * &self.im)
    }

    /// Multiplicative inverse. Panics on zero; callers check first.
    pub fn recip(&self) -> Self {
        let n = self.norm();
        assert!(n.cmp0().is_ne(), "inverse of zero");
        GaussianRational::new(
            Rational::from(&self.re / &n),
            Rational::from(-Rational::from(&self.im / &n)),
        )
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = GaussianRational::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_complex(&self, prec: u32) -> BigComplex {
        BigComplex::from_rationals(&self.re, &self.im, prec)
    }

    /// Least common multiple of the two denominators.
    pub fn denom_lcm(&self) -> Integer {
        self.re.denom().clone().lcm(self.im.denom())
    }

    fn fmt_rational(r: &Rational) -> String {
        if *r.denom() == 1 {
            r.numer().to_string()
        } else {
            format!("{}/{}", r.numer(), r.denom())
        }
    }
}

impl fmt::Display for GaussianRational {
    /// Renders as an expression accepted by the spec grammar, e.g. `3/4`,
    /// `-2*i`, `(1/2+3*i)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let re0 = self.re.cmp0().is_eq();
        let im0 = self.im.cmp0().is_eq();
        let im_str = |r: &Rational| {
            if *r == 1 {
                "i".to_string()
            } else if *r == -1 {
                "-i".to_string()
            } else {
                format!("{}*i", Self::fmt_rational(r))
            }
        };
        match (re0, im0) {
            (_, true) => write!(f, "{}", Self::fmt_rational(&self.re)),
            (true, false) => write!(f, "{}", im_str(&self.im)),
            (false, false) => {
                let im = im_str(&self.im);
                if im.starts_with('-') {
                    write!(f, "({}{})", Self::fmt_rational(&self.re), im)
                } else {
                    write!(f, "({}+{})", Self::fmt_rational(&self.re), im)
                }
            }
        }
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<'a, 'b> Add<&'b GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn add(self, o: &'b GaussianRational) -> GaussianRational {
        GaussianRational::new(Rational::from(&self.re + &o.re), Rational::from(&self.im + &o.im))
    }
}

impl<'a, 'b> Sub<&'b GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn sub(self, o: &'b GaussianRational) -> GaussianRational {
        GaussianRational::new(Rational::from(&self.re - &o.re), Rational::from(&self.im - &o.im))
    }
}

impl<'a, 'b> Mul<&'b GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: &'b GaussianRational) -> GaussianRational {
        if self.im.cmp0().is_eq() && o.im.cmp0().is_eq() {
            return GaussianRational::from_rational(Rational::from(&self.re * &o.re));
        }
        let re = Rational::from(&self.re * &o.re) - Rational::from(&self.im * &o.im);
        let im = Rational::from(&self.re * &o.im) + Rational::from(&self.im * &o.re);
        GaussianRational::new(re, im)
    }
}

impl<'a, 'b> Div<&'b GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn div(self, o: &'b GaussianRational) -> GaussianRational {
        if o.im.cmp0().is_eq() {
            return GaussianRational::new(
                Rational::from(&self.re / &o.re),
                Rational::from(&self.im / &o.re),
            );
        }
        self * &o.recip()
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(Rational::from(-&self.re), Rational::from(-&self.im))
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr<GaussianRational> for GaussianRational {
            type Output = GaussianRational;
            fn $m(self, o: GaussianRational) -> GaussianRational {
                (&self).$m(&o)
            }
        }
        impl<'b> $tr<&'b GaussianRational> for GaussianRational {
            type Output = GaussianRational;
            fn $m(self, o: &'b GaussianRational) -> GaussianRational {
                (&self).$m(o)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);
owned_ops!(Div, div);

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        -&self
    }
}
