use rug::Float;
use serde::Serialize;

use crate::algebra::quad::{integrate_hankel_loop, integrate_ray, QuadConfig, QuadResult};
use crate::algebra::{AlgebraError, BigComplex};

use super::BorelError;

#[derive(Clone, Debug, Serialize)]
pub struct RaySum {
    pub epsilon: BigComplex,
    pub theta: f64,
    pub value: BigComplex,
    pub error: f64,
}

#[derive(Clone, Debug)]
pub struct LaplaceConfig {
    pub quad: QuadConfig,
    /// A singularity closer than this to the ray (relative to max(1,|χ|))
    /// makes the sum ill-defined.
    pub tube: f64,
}

impl LaplaceConfig {
    pub fn for_precision(prec: u32) -> Self {
        LaplaceConfig { quad: QuadConfig::for_precision(prec), tube: 1e-6 }
    }
}

fn dist_to_ray(p: &BigComplex, dir: &BigComplex) -> f64 {
    let t = (p * &dir.conj()).re().to_f64();
    if t <= 0.0 {
        p.abs_f64()
    } else {
        (p * &dir.conj()).im().to_f64().abs()
    }
}

/// `y₀ + ∫₀^(∞e^(iθ)) e^(−w/ε) f(w) dw`.
pub fn laplace_sum<F>(
    f: F,
    constant: &BigComplex,
    eps: &BigComplex,
    theta: f64,
    singular: &[BigComplex],
    cfg: &LaplaceConfig,
) -> Result<RaySum, BorelError>
where
    F: Fn(&BigComplex) -> Result<BigComplex, AlgebraError>,
{
    let prec = eps.prec();
    let dir = BigComplex::cis(&Float::with_val(prec, theta));
    if let Some(s) = singular.iter().find(|s| dist_to_ray(s, &dir) < cfg.tube * s.abs_f64().max(1.0)) {
        return Err(BorelError::RayHitsSingularity(s.to_string_digits(12)));
    }
    if (&dir / eps).re().to_f64() <= 0.0 {
        return Err(BorelError::NonConvergentTail);
    }
    let inv = eps.recip();
    let r = integrate_ray(&BigComplex::zero(prec), &dir, &cfg.quad, |w| {
        let e = (-(w * &inv)).exp();
        // far nodes where the kernel has underflowed contribute nothing
        if e.is_zero() {
            return Ok(e);
        }
        Ok(e * f(w)?)
    })
        .map_err(|e| match e {
            AlgebraError::QuadratureFailed(_) => BorelError::NonConvergentTail,
            other => other.into(),
        })?;
    Ok(RaySum { epsilon: eps.clone(), theta, value: &r.value + constant, error: r.error })
}

/// `∮ e^(−w/ε) f(w) dw` counterclockwise around a cut leaving `chi` in the
/// direction `arg ε`; the loop half-width is `h_factor·|ε|`.
pub fn hankel_quadrature<F>(f: F, chi: &BigComplex, eps: &BigComplex, h_factor: f64, cfg: &QuadConfig) -> Result<QuadResult, BorelError>
where
    F: Fn(&BigComplex) -> Result<BigComplex, AlgebraError>,
{
    let prec = eps.prec();
    let dir = eps.scale_real(&eps.abs().recip());
    let h = Float::with_val(prec, h_factor * eps.abs_f64());
    let inv = eps.recip();
    Ok(integrate_hankel_loop(chi, &dir, &h, cfg, |w| Ok((-(w * &inv)).exp() * f(w)?))?)
}

/// n-th Taylor coefficient of `f` at 0 from its singularities: on the
/// cylinder `w = log x` the Cauchy contour is pushed right, onto
/// clockwise Hankel loops along `log χ + [0, ∞)`. Singularities sharing a
/// cut line are covered by one loop from the leftmost.
pub fn coefficients_via_hankel<F>(f: F, singular: &[BigComplex], n: u64, h: f64, cfg: &QuadConfig) -> Result<BigComplex, BorelError>
where
    F: Fn(&BigComplex) -> Result<BigComplex, AlgebraError>,
{
    let Some(first) = singular.first() else {
        return Err(BorelError::NoSingularities);
    };
    let prec = first.prec();
    let mut heads: Vec<BigComplex> = Vec::new();
    let mut logs: Vec<BigComplex> = singular.iter().map(|s| s.ln()).collect();
    logs.sort_by(|a, b| a.re().to_f64().total_cmp(&b.re().to_f64()));
    for l in logs {
        if !heads.iter().any(|hd| (hd.im().to_f64() - l.im().to_f64()).abs() < 1e-12) {
            heads.push(l);
        }
    }
    let hh = Float::with_val(prec, h);
    let one = BigComplex::one(prec);
    let nn = BigComplex::from_i64(n as i64, prec);
    let mut acc = BigComplex::zero(prec);
    for head in &heads {
        let r = integrate_hankel_loop(head, &one, &hh, cfg, |w| Ok((-(w * &nn)).exp() * f(&w.exp())?))?;
        acc -= r.value;
    }
    Ok(acc / BigComplex::two_pi_i(prec))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_integrand_gives_epsilon() {
        let prec = 192;
        let eps = BigComplex::from_f64(0.25, 0.1, prec);
        let theta = eps.arg().to_f64();
        let r = laplace_sum(|_| Ok(BigComplex::one(prec)), &BigComplex::zero(prec), &eps, theta, &[], &LaplaceConfig::for_precision(prec))
            .unwrap();
        assert!(r.value.dist_f64(&eps) < 1e-45);
    }

    #[test]
    fn ray_through_pole_is_rejected() {
        let prec = 128;
        let eps = BigComplex::from_f64(-0.1, 0.0, prec);
        let r = laplace_sum(
            |w| Ok((w + &BigComplex::one(prec)).recip()),
            &BigComplex::zero(prec),
            &eps,
            std::f64::consts::PI,
            &[BigComplex::from_i64(-1, prec)],
            &LaplaceConfig::for_precision(prec),
        );
        assert!(matches!(r, Err(BorelError::RayHitsSingularity(_))));
    }

    #[test]
    fn geometric_coefficients() {
        let prec = 192;
        let one = BigComplex::one(prec);
        let cfg = QuadConfig::for_precision(prec);
        for n in [0u64, 3, 17] {
            let c = coefficients_via_hankel(|x| Ok((&one - x).recip()), &[one.clone()], n, 0.5, &cfg).unwrap();
            assert!(c.dist_f64(&one) < 1e-40, "n={n}: {c:?}");
        }
    }
}
