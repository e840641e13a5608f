//! The ODE, its exact perturbative series and Borel germs.
//!
//! The equation is `Σᵢ Pᵢ(z) εⁱ y⁽ⁱ⁾(z) = Σₖ εᵏ Fₖ(z)` with rational `Pᵢ`, `Fₖ`.

use std::fmt;

use serde::Serialize;

use crate::algebra::roots::{complex_roots, squarefree};
use crate::algebra::series::TruncatedSeries;
use crate::algebra::{pow2_neg, AlgebraError, BigComplex, GaussianRational, Poly, RatFunc};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PerturbativeError {
    #[error("degenerate leading balance: P0 is identically zero")]
    DegenerateBalance,
    #[error("invalid ODE: {0}")]
    InvalidSpec(String),
    #[error("base point {0} lies on the physical singular set")]
    OnSingularSet(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ODESpec {
    /// `coeffs[i]` multiplies `εⁱ dⁱ/dzⁱ`.
    pub coeffs: Vec<RatFunc>,
    /// `forcing[k]` is the coefficient of `εᵏ`.
    pub forcing: Vec<RatFunc>,
}

impl ODESpec {
    pub fn new(coeffs: Vec<RatFunc>, forcing: Vec<RatFunc>) -> Result<Self, PerturbativeError> {
        if coeffs.len() < 2 {
            return Err(PerturbativeError::InvalidSpec("order must be at least 1".into()));
        }
        if coeffs.last().unwrap().is_zero() {
            return Err(PerturbativeError::InvalidSpec("leading coefficient vanishes".into()));
        }
        Ok(ODESpec { coeffs, forcing })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn forcing_at(&self, k: usize) -> RatFunc {
        self.forcing.get(k).cloned().unwrap_or_default()
    }

    /// `ε²y″ − 3zεy′ + 2z²y = z`, the worked second-order example.
    pub fn worked_example() -> Self {
        let z = RatFunc::z();
        ODESpec::new(
            vec![(&z * &z).scale(&GaussianRational::from_int(2)), z.scale(&GaussianRational::from_int(-3)), RatFunc::one()],
            vec![z],
        )
        .unwrap()
    }

    /// `εy′ + y = ε/(1−z)`: its germ at z = 0 is the Euler germ 1/(1+w).
    pub fn euler_realization() -> Self {
        let f = RatFunc::new(Poly::one(), Poly::from_ints(&[1, -1])).unwrap();
        ODESpec::new(vec![RatFunc::one(), RatFunc::one()], vec![RatFunc::zero(), f]).unwrap()
    }

    /// `ε y′ + G y = ε H` (first-order form with forcing at order ε).
    pub fn first_order(g: RatFunc, h: RatFunc) -> Self {
        ODESpec::new(vec![g, RatFunc::one()], vec![RatFunc::zero(), h]).unwrap()
    }

    /// Residual `Σ Pᵢ εⁱ y⁽ⁱ⁾ − F` of a truncated series at `(z, ε)`.
    pub fn residual(&self, series: &PerturbativeSeries, z: &BigComplex, eps: &BigComplex) -> Result<BigComplex, AlgebraError> {
        let prec = z.prec();
        let n = self.order();
        let mut derivs: Vec<BigComplex> = vec![BigComplex::zero(prec); n + 1];
        let mut epow = BigComplex::one(prec);
        for term in &series.terms {
            let mut d = term.clone();
            for slot in derivs.iter_mut() {
                *slot += &d.eval_complex(z)? * &epow;
                d = d.derivative();
            }
            epow = &epow * eps;
        }
        let mut acc = BigComplex::zero(prec);
        let mut epow = BigComplex::one(prec);
        for (i, p) in self.coeffs.iter().enumerate() {
            acc += &(&p.eval_complex(z)? * &epow) * &derivs[i];
            epow = &epow * eps;
        }
        let mut epow = BigComplex::one(prec);
        for f in &self.forcing {
            acc -= &f.eval_complex(z)? * &epow;
            epow = &epow * eps;
        }
        Ok(acc)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbativeSeries {
    pub terms: Vec<RatFunc>,
}

impl PerturbativeSeries {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.iter().all(|t| t.is_zero())
    }
}

/// Solves the ODE order by order in ε for `y₀ … y_M`.
pub fn expand_perturbative(spec: &ODESpec, m: usize) -> Result<PerturbativeSeries, PerturbativeError> {
    let p0 = &spec.coeffs[0];
    if p0.is_zero() {
        return Err(PerturbativeError::DegenerateBalance);
    }
    let n = spec.order();
    // derivs[m][j] = j-th derivative of y_m, j ≤ N
    let mut derivs: Vec<Vec<RatFunc>> = Vec::with_capacity(m + 1);
    let mut terms = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let mut rhs = spec.forcing_at(k);
        for i in 1..=n.min(k) {
            let pi = &spec.coeffs[i];
            if pi.is_zero() {
                continue;
            }
            let d = &derivs[k - i][i];
            if d.is_zero() {
                continue;
            }
            rhs = &rhs - &(pi * d);
        }
        let yk = rhs.checked_div(p0)?;
        let mut ds = Vec::with_capacity(n + 1);
        let mut cur = yk.clone();
        for _ in 0..=n {
            let next = cur.derivative();
            ds.push(cur);
            cur = next;
        }
        derivs.push(ds);
        terms.push(yk);
    }
    Ok(PerturbativeSeries { terms })
}

/// The Euler series `y = Σ (−1)^(n−1) (n−1)! εⁿ` of `ε²y′ + y = ε`, as
/// constant terms `y₀ … y_M` (obtained from `y_(n+1) = δ_(n0) − n yₙ`).
pub fn euler_series(m: usize) -> PerturbativeSeries {
    let mut terms = vec![RatFunc::zero()];
    let mut y = rug::Integer::from(0);
    for n in 0..m {
        let next = if n == 0 { rug::Integer::from(1) } else { -(rug::Integer::from(&y * n as u32)) };
        y = next;
        terms.push(RatFunc::constant(GaussianRational::from_rational(rug::Rational::from(y.clone()))));
    }
    PerturbativeSeries { terms }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularSource {
    ForcingPole,
    CoefficientZero,
    CoefficientPole,
}

#[derive(Clone, Debug, Serialize)]
pub struct SingularPoint {
    pub z: BigComplex,
    pub source: SingularSource,
    /// Pole order of y₁ at this point (δ), 0 when y₁ is regular there.
    pub order: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhysicalSingularSet {
    pub points: Vec<SingularPoint>,
}

impl PhysicalSingularSet {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distance from `z` to the nearest point of the set (infinite if empty).
    pub fn distance(&self, z: &BigComplex) -> f64 {
        self.points.iter().map(|p| p.z.dist_f64(z)).fold(f64::INFINITY, f64::min)
    }

    pub fn nearest(&self, z: &BigComplex) -> Option<&SingularPoint> {
        self.points.iter().min_by(|a, b| a.z.dist_f64(z).total_cmp(&b.z.dist_f64(z)))
    }
}

fn radical(p: &Poly) -> Poly {
    if p.is_constant() {
        return Poly::one();
    }
    p.exact_div(&Poly::gcd(p, &p.derivative())).monic()
}

/// Pole order of `f` at a numerically known root `r` of its denominator.
pub fn pole_order_at(f: &RatFunc, r: &BigComplex) -> usize {
    let tol = pow2_neg(r.prec() as f64 / 3.0);
    for (mult, factor) in squarefree(f.den()) {
        let scale = factor.max_coeff_abs(r.prec()).max(1.0) * r.abs_f64().max(1.0).powi(factor.degree().unwrap_or(0) as i32);
        if factor.eval_complex(r).abs_f64() < tol * scale {
            return mult;
        }
    }
    0
}

/// Γ_z: poles of the computed terms and zeros/poles of the ODE coefficients.
pub fn singular_set(series: &PerturbativeSeries, spec: Option<&ODESpec>, prec: u32) -> Result<PhysicalSingularSet, PerturbativeError> {
    let mut cands: Vec<(Poly, SingularSource)> = Vec::new();
    let mut rad = Poly::one();
    for t in &series.terms {
        let r = radical(t.den());
        if !r.is_constant() {
            let g = Poly::gcd(&rad, &r);
            rad = &rad * &r.exact_div(&g);
        }
    }
    cands.push((rad, SingularSource::ForcingPole));
    if let Some(spec) = spec {
        for p in &spec.coeffs {
            cands.push((radical(p.num()), SingularSource::CoefficientZero));
            cands.push((radical(p.den()), SingularSource::CoefficientPole));
        }
        for f in &spec.forcing {
            cands.push((radical(f.den()), SingularSource::ForcingPole));
        }
    }
    let radius = pow2_neg(prec as f64 / 4.0);
    let y1 = series.terms.get(1).cloned().unwrap_or_default();
    let mut points: Vec<SingularPoint> = Vec::new();
    for (p, source) in cands {
        if p.is_constant() {
            continue;
        }
        for r in complex_roots(&p.to_complex_coeffs(prec))? {
            if points.iter().any(|q| q.z.dist_f64(&r) < radius * r.abs_f64().max(1.0)) {
                continue;
            }
            let order = pole_order_at(&y1, &r);
            points.push(SingularPoint { z: r, source, order });
        }
    }
    points.sort_by(|a, b| {
        a.z.re().to_f64().total_cmp(&b.z.re().to_f64()).then(a.z.im().to_f64().total_cmp(&b.z.im().to_f64()))
    });
    Ok(PhysicalSingularSet { points })
}

/// Truncated germ `uₙ = y_(n+1)(z0)/n!` of the parametric Borel transform.
#[derive(Clone, Debug, Serialize)]
pub struct BorelGerm {
    pub z0: BigComplex,
    /// `y₀(z0)`, the δ-part left untouched by the Borel transform.
    pub constant: BigComplex,
    pub coeffs: Vec<BigComplex>,
}

impl BorelGerm {
    pub fn prec(&self) -> u32 {
        self.z0.prec()
    }

    pub fn as_series(&self) -> TruncatedSeries {
        let prec = self.prec();
        let coeffs = if self.coeffs.is_empty() { vec![BigComplex::zero(prec)] } else { self.coeffs.clone() };
        TruncatedSeries::new(BigComplex::zero(prec), coeffs)
    }

    /// Germ built directly from Borel coefficients.
    pub fn from_coeffs(z0: BigComplex, constant: BigComplex, coeffs: Vec<BigComplex>) -> Self {
        BorelGerm { z0, constant, coeffs }
    }
}

pub fn borel_germ(series: &PerturbativeSeries, z0: &BigComplex) -> Result<BorelGerm, PerturbativeError> {
    let prec = z0.prec();
    let eval = |t: &RatFunc| {
        t.eval_complex(z0).map_err(|_| PerturbativeError::OnSingularSet(z0.to_string_digits(12)))
    };
    let constant = match series.terms.first() {
        Some(t) => eval(t)?,
        None => BigComplex::zero(prec),
    };
    let mut coeffs = Vec::with_capacity(series.terms.len().saturating_sub(1));
    let mut fact = rug::Float::with_val(prec, 1);
    for (n, t) in series.terms.iter().skip(1).enumerate() {
        if n > 0 {
            fact *= n as u32;
        }
        let v = eval(t)?;
        if !v.is_finite() {
            return Err(PerturbativeError::OnSingularSet(z0.to_string_digits(12)));
        }
        coeffs.push(v.scale_real(&(rug::Float::with_val(prec, 1) / &fact)));
    }
    Ok(BorelGerm { z0: z0.clone(), constant, coeffs })
}

/// Symbolic record of the Borel-plane operator `Σ Pᵢ ∂_zⁱ ∂_w^(N−i)` and
/// its Cauchy data `∂_w^j y_B(0, z) = y_(j+1)(z)`, `j < N`.
#[derive(Clone, Debug)]
pub struct BorelOperator {
    pub coeffs: Vec<RatFunc>,
    pub initial_data: Vec<RatFunc>,
}

impl fmt::Display for BorelOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.coeffs.len() - 1;
        let mut first = true;
        for (i, p) in self.coeffs.iter().enumerate().rev() {
            if p.is_zero() {
                continue;
            }
            let mut op = String::new();
            match i {
                0 => {}
                1 => op.push_str("∂_z"),
                _ => op.push_str(&format!("∂_z^{i}")),
            }
            match n - i {
                0 => {}
                1 => op.push_str("∂_w"),
                k => op.push_str(&format!("∂_w^{k}")),
            }
            let coef = p.to_string();
            let (sign, body) = match coef.strip_prefix('-') {
                Some(rest) if !rest.contains(['+', '-']) => ("-", rest.to_string()),
                _ => ("+", coef.clone()),
            };
            if !first || sign == "-" {
                f.write_str(if first { "-" } else if sign == "-" { " - " } else { " + " })?;
            }
            if body == "1" {
                write!(f, "{op}")?;
            } else if body.contains(['+', '-']) {
                write!(f, "({body}){op}")?;
            } else {
                write!(f, "{body}{op}")?;
            }
            first = false;
        }
        Ok(())
    }
}

pub fn borel_transform_ode(spec: &ODESpec) -> Result<BorelOperator, PerturbativeError> {
    let n = spec.order();
    let series = expand_perturbative(spec, n)?;
    Ok(BorelOperator { coeffs: spec.coeffs.clone(), initial_data: series.terms[1..=n].to_vec() })
}
