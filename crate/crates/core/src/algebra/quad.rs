//! Double-exponential quadrature on segments, rays and Hankel loops.

use rug::Float;

use super::{pow2_neg, AlgebraError, BigComplex};

#[derive(Clone, Debug)]
pub struct QuadConfig {
    /// Relative tolerance on the level-to-level difference.
    pub tol: f64,
    pub max_level: u32,
}

impl QuadConfig {
    pub fn for_precision(prec: u32) -> Self {
        QuadConfig { tol: pow2_neg(prec as f64 - 24.0), max_level: 12 }
    }

    pub fn with_tol(tol: f64) -> Self {
        QuadConfig { tol, max_level: 12 }
    }
}

#[derive(Clone, Debug)]
pub struct QuadResult {
    pub value: BigComplex,
    pub error: f64,
}

fn t_max(prec: u32) -> f64 {
    // Beyond this the double-exponential weights are below 2^-prec.
    ((2.0 * prec as f64 * std::f64::consts::LN_2) / std::f64::consts::PI).ln() + 0.7
}

/// Generic level-refinement driver: `node(t)` returns the weighted integrand
/// at parameter t (weight includes dt-measure), or `None` when negligible.
fn refine<F>(prec: u32, tmax: f64, cfg: &QuadConfig, mut node: F) -> Result<QuadResult, AlgebraError>
where
    F: FnMut(&Float) -> Result<BigComplex, AlgebraError>,
{
    let mut sum = node(&Float::with_val(prec, 0))?;
    let mut h = 1.0f64;
    let mut k = 1i64;
    while (k as f64) * h <= tmax {
        let t = Float::with_val(prec, k as f64 * h);
        sum += node(&t)?;
        sum += node(&(-t))?;
        k += 1;
    }
    let mut prev = sum.scale_f64(h);
    let mut last_err = f64::INFINITY;
    for _level in 1..=cfg.max_level {
        h /= 2.0;
        let mut k = 1i64;
        while (k as f64) * h <= tmax {
            let t = Float::with_val(prec, k as f64 * h);
            sum += node(&t)?;
            sum += node(&(-t))?;
            k += 2;
        }
        let cur = sum.scale_f64(h);
        let diff = cur.dist_f64(&prev);
        let scale = cur.abs_f64().max(1e-300);
        last_err = diff;
        if diff <= cfg.tol * scale {
            return Ok(QuadResult { value: cur, error: diff });
        }
        prev = cur;
    }
    if last_err <= cfg.tol.sqrt() * prev.abs_f64().max(1e-300) {
        // Converging but not to the requested depth: report the estimate.
        return Ok(QuadResult { value: prev, error: last_err });
    }
    Err(AlgebraError::QuadratureFailed(last_err))
}

/// ∫ f(w) dw along the straight segment a → b (tanh-sinh).
pub fn integrate_segment<F>(a: &BigComplex, b: &BigComplex, cfg: &QuadConfig, mut f: F) -> Result<QuadResult, AlgebraError>
where
    F: FnMut(&BigComplex) -> Result<BigComplex, AlgebraError>,
{
    let prec = a.prec().min(b.prec());
    let half = (b - a).div_i64(2);
    let pi_2 = BigComplex::pi(prec) / 2u32;
    let tmax = t_max(prec);
    let floor = pow2_neg(prec as f64 + 8.0);
    refine(prec, tmax, cfg, |t| {
        let u = Float::with_val(prec, t.sinh_ref()) * &pi_2;
        let cu = Float::with_val(prec, u.cosh_ref());
        let w = Float::with_val(prec, t.cosh_ref()) * &pi_2 / (Float::with_val(prec, &cu * &cu));
        if w.to_f64() < floor {
            return Ok(BigComplex::zero(prec));
        }
        // distance from the nearer endpoint in x, computed without cancellation
        let e2 = Float::with_val(prec, (Float::with_val(prec, &u * 2u32).abs()).exp());
        let gap = Float::with_val(prec, 2u32) / (e2 + 1u32);
        let point = if u.is_sign_negative() {
            a + &half.scale_real(&gap)
        } else {
            b - &half.scale_real(&gap)
        };
        Ok((f(&point)? * &half).scale_real(&w))
    })
}

/// ∫₀^∞ f(origin + dir·r) dir dr (exp-sinh); `f` must decay along the ray.
pub fn integrate_ray<F>(origin: &BigComplex, dir: &BigComplex, cfg: &QuadConfig, mut f: F) -> Result<QuadResult, AlgebraError>
where
    F: FnMut(&BigComplex) -> Result<BigComplex, AlgebraError>,
{
    let prec = origin.prec().min(dir.prec());
    let pi_2 = BigComplex::pi(prec) / 2u32;
    let tmax = t_max(prec) + 1.0;
    refine(prec, tmax, cfg, |t| {
        let u = Float::with_val(prec, t.sinh_ref()) * &pi_2;
        let r = Float::with_val(prec, u.exp_ref());
        let w = Float::with_val(prec, t.cosh_ref()) * &pi_2 * &r;
        if w.is_zero() {
            return Ok(BigComplex::zero(prec));
        }
        let point = origin + &dir.scale_real(&r);
        let v = f(&point)?;
        if !v.is_finite() {
            // far out a decaying integrand can still overflow in its factors
            if r.to_f64() > 1e6 * (1.0 + origin.abs_f64()) {
                return Ok(BigComplex::zero(prec));
            }
            return Err(AlgebraError::QuadratureFailed(f64::INFINITY));
        }
        Ok((v * dir).scale_real(&w))
    })
}

/// Counterclockwise stadium loop around `chi`: in from infinity along
/// `chi + dir·(x + i h)`, around a semicircle of radius `h` behind `chi`,
/// and out along `chi + dir·(x − i h)`.
pub fn integrate_hankel_loop<F>(
    chi: &BigComplex,
    dir: &BigComplex,
    h: &Float,
    cfg: &QuadConfig,
    mut f: F,
) -> Result<QuadResult, AlgebraError>
where
    F: FnMut(&BigComplex) -> Result<BigComplex, AlgebraError>,
{
    let prec = chi.prec();
    let ih = BigComplex::from_floats(&Float::new(prec), h, prec);
    let upper = chi + &(dir * &ih);
    let lower = chi - &(dir * &ih);
    let top = integrate_ray(&upper, dir, cfg, &mut f)?;
    let bottom = integrate_ray(&lower, dir, cfg, &mut f)?;
    // semicircle: chi + dir·h·e^{iφ}, φ from π/2 to 3π/2, as a segment in φ
    let pi = BigComplex::pi(prec);
    let a = BigComplex::from_real(&(Float::with_val(prec, &pi) / 2u32));
    let b = BigComplex::from_real(&(Float::with_val(prec, &pi) * 3u32 / 2u32));
    let dh = dir.scale_real(h);
    let arc = integrate_segment(&a, &b, cfg, |phi| {
        let e = phi.mul_i().exp();
        let w = chi + &(&dh * &e);
        Ok(f(&w)? * (&dh * &e).mul_i())
    })?;
    let value = &(&bottom.value - &top.value) + &arc.value;
    Ok(QuadResult { value, error: top.error + bottom.error + arc.error })
}
