//! First-order equations `εy′ + G y = εH`, whose Borel transforms are known
//! in closed form.

use crate::algebra::quad::{integrate_segment, QuadConfig};
use crate::algebra::{pow2_neg, AlgebraError, BigComplex};

use super::TransSeriesError;

/// `y_B(w, z) = H(ζ)/G(ζ)` with ζ solving `∫_z^ζ G + w = 0`, found by Newton
/// continuation from `ζ = z` at `w = 0`.
pub fn first_order_closed_form<G, H>(g: G, h: H, w: &BigComplex, z: &BigComplex, cfg: &QuadConfig) -> Result<BigComplex, TransSeriesError>
where
    G: Fn(&BigComplex) -> Result<BigComplex, AlgebraError>,
    H: Fn(&BigComplex) -> Result<BigComplex, AlgebraError>,
{
    let prec = z.prec();
    let tol = pow2_neg(prec as f64 * 0.45);
    let fail = |at: &BigComplex| TransSeriesError::NewtonFailed(at.to_string_digits(10));
    let mut zeta = z.clone();
    // running value of ∫_z^ζ G
    let mut acc = BigComplex::zero(prec);
    let mut t = 0.0f64;
    let mut dt = 1.0 / 16.0;
    while t < 1.0 {
        let tn = (t + dt).min(1.0);
        let target = -(w * &BigComplex::from_f64(tn, 0.0, prec));
        let gz = g(&zeta)?;
        let mut cand = &zeta + &(&(&target - &acc) / &gz);
        let mut ok = None;
        for _ in 0..60 {
            let seg = integrate_segment(&zeta, &cand, cfg, |u| g(u))?.value;
            let f = &(&acc + &seg) - &target;
            let gc = g(&cand)?;
            let step = &f / &gc;
            cand = &cand - &step;
            if step.abs_f64() <= tol * cand.abs_f64().max(1.0) {
                let seg = integrate_segment(&zeta, &cand, cfg, |u| g(u))?.value;
                ok = Some((cand.clone(), &acc + &seg));
                break;
            }
            if !cand.is_finite() {
                break;
            }
        }
        match ok {
            Some((zn, an)) => {
                zeta = zn;
                acc = an;
                t = tn;
                dt = (dt * 1.5).min(0.25);
            }
            None => {
                dt /= 2.0;
                if dt < 1e-6 {
                    return Err(fail(&zeta));
                }
            }
        }
    }
    Ok(&h(&zeta)? / &g(&zeta)?)
}

/// As [`first_order_closed_form`] with a primitive `Gp` of `G`, so `ζ`
/// solves `Gp(ζ) = Gp(z) − w` without quadrature.
pub fn first_order_with_primitive<P, G, H>(gp: P, g: G, h: H, w: &BigComplex, z: &BigComplex) -> Result<BigComplex, TransSeriesError>
where
    P: Fn(&BigComplex) -> Result<BigComplex, AlgebraError>,
    G: Fn(&BigComplex) -> Result<BigComplex, AlgebraError>,
    H: Fn(&BigComplex) -> Result<BigComplex, AlgebraError>,
{
    let prec = z.prec();
    let tol = pow2_neg(prec as f64 * 0.45);
    let base = gp(z)?;
    let mut zeta = z.clone();
    let mut t = 0.0f64;
    let mut dt = 1.0 / 4.0;
    while t < 1.0 {
        let tn = (t + dt).min(1.0);
        let target = &base - &(w * &BigComplex::from_f64(tn, 0.0, prec));
        let mut cand = zeta.clone();
        let mut ok = false;
        for _ in 0..60 {
            let step = &(&gp(&cand)? - &target) / &g(&cand)?;
            cand = &cand - &step;
            if !cand.is_finite() {
                break;
            }
            if step.abs_f64() <= tol * cand.abs_f64().max(1.0) {
                ok = true;
                break;
            }
        }
        if ok {
            zeta = cand;
            t = tn;
            dt = (dt * 1.5).min(0.5);
        } else {
            dt /= 2.0;
            if dt < 1e-6 {
                return Err(TransSeriesError::NewtonFailed(zeta.to_string_digits(10)));
            }
        }
    }
    Ok(&h(&zeta)? / &g(&zeta)?)
}

/// `y_B(w, z) = H₀(z−w) + ∫₀^w H_B(t, z−w+t) dt` for `εy′ + y = εH(z; ε)`
/// with `H = Σ Hₖ εᵏ` and `H_B = Σ H_(k+1) w^k/k!` entire.
pub fn inhomogeneous_borel_integral<H0, HB>(h0: H0, hb: HB, w: &BigComplex, z: &BigComplex, cfg: &QuadConfig) -> Result<BigComplex, TransSeriesError>
where
    H0: Fn(&BigComplex) -> Result<BigComplex, AlgebraError>,
    HB: Fn(&BigComplex, &BigComplex) -> Result<BigComplex, AlgebraError>,
{
    let prec = z.prec();
    let base = z - w;
    let first = h0(&base)?;
    if w.is_zero() {
        return Ok(first);
    }
    let r = integrate_segment(&BigComplex::zero(prec), w, cfg, |t| hb(t, &(&base + t)))?;
    Ok(&first + &r.value)
}

/// Taylor coefficients `f₀ … f_(n−1)` at 0 of an analytic `f`, from a
/// `k`-point trapezoid rule on the circle of the given radius.
pub fn borel_coefficients<F>(f: F, radius: f64, n: usize, k: usize, prec: u32) -> Result<Vec<BigComplex>, TransSeriesError>
where
    F: Fn(&BigComplex) -> Result<BigComplex, TransSeriesError>,
{
    let mut vals = Vec::with_capacity(k);
    let mut pts = Vec::with_capacity(k);
    let r = BigComplex::from_f64(radius, 0.0, prec);
    for j in 0..k {
        let th = BigComplex::pi(prec) * (2 * j) as u32 / k as u32;
        let wj = &BigComplex::cis(&th) * &r;
        vals.push(f(&wj)?);
        pts.push(wj);
    }
    let mut out = Vec::with_capacity(n);
    for m in 0..n {
        let mut acc = BigComplex::zero(prec);
        for (v, p) in vals.iter().zip(&pts) {
            acc += v * &p.powi(-(m as i64));
        }
        out.push(acc.div_i64(k as i64));
    }
    Ok(out)
}
