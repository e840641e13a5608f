//! Taylor-series marching for the full ODE at fixed ε.

use serde::Serialize;

use crate::algebra::roots::poly_roots;
use crate::algebra::{pow2_neg, BigComplex};
use crate::perturbative::{ODESpec, PerturbativeSeries};
use crate::singulant::ComplexPath;

use super::ValidationError;

#[derive(Clone, Debug)]
pub struct OdeConfig {
    pub order: usize,
    /// Local relative error target per step.
    pub tol: f64,
    /// Fraction of the distance to the nearest coefficient singularity a
    /// step may cover.
    pub reach: f64,
    pub max_steps: usize,
}

impl OdeConfig {
    pub fn for_precision(prec: u32) -> Self {
        OdeConfig { order: 30.max(prec as usize / 4), tol: pow2_neg(prec as f64 / 2.0), reach: 0.5, max_steps: 200_000 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ODESolutionSample {
    pub schema: &'static str,
    pub path: ComplexPath,
    pub epsilon: BigComplex,
    /// `values[k][i]` is `y⁽ⁱ⁾` at `path.samples[k]`, `i ≤ N−1`.
    pub values: Vec<Vec<BigComplex>>,
    /// Accumulated absolute truncation error estimate up to each sample.
    pub errors: Vec<f64>,
    /// Largest relative ODE residual of the local polynomials at step ends.
    pub residual: f64,
    pub steps: usize,
}

impl ODESolutionSample {
    pub fn last(&self) -> &[BigComplex] {
        self.values.last().map(|v| v.as_slice()).unwrap_or(&[])
    }
}

/// Points where some coefficient or forcing term has a pole, or the leading
/// coefficient vanishes.
fn coefficient_singularities(spec: &ODESpec, prec: u32) -> Result<Vec<BigComplex>, ValidationError> {
    let mut out = Vec::new();
    for f in spec.coeffs.iter().chain(&spec.forcing) {
        if !f.den().is_constant() {
            out.extend(poly_roots(f.den(), prec)?.into_iter().map(|(r, _)| r));
        }
    }
    let lead = spec.coeffs.last().unwrap().num();
    if !lead.is_constant() {
        out.extend(poly_roots(lead, prec)?.into_iter().map(|(r, _)| r));
    }
    Ok(out)
}

struct Stepper<'a> {
    spec: &'a ODESpec,
    eps: &'a BigComplex,
    singular: Vec<BigComplex>,
    cfg: &'a OdeConfig,
}

impl Stepper<'_> {
    /// Taylor coefficients of the solution at `z0` from `y⁽ⁱ⁾(z0)`, `i < N`.
    fn taylor(&self, z0: &BigComplex, init: &[BigComplex]) -> Result<Vec<BigComplex>, ValidationError> {
        let prec = z0.prec();
        let n = self.spec.order();
        let m = self.cfg.order + 1;
        let mut epow = BigComplex::one(prec);
        let mut q = Vec::with_capacity(n + 1);
        for p in &self.spec.coeffs {
            let s = p.taylor_at(z0, m).map_err(|_| ValidationError::OnSingularity(z0.to_string_digits(10)))?;
            q.push(s.into_iter().map(|x| &x * &epow).collect::<Vec<_>>());
            epow = &epow * self.eps;
        }
        let mut f = vec![BigComplex::zero(prec); m];
        let mut epow = BigComplex::one(prec);
        for fk in &self.spec.forcing {
            let s = fk.taylor_at(z0, m).map_err(|_| ValidationError::OnSingularity(z0.to_string_digits(10)))?;
            for (a, b) in f.iter_mut().zip(&s) {
                *a += b * &epow;
            }
            epow = &epow * self.eps;
        }
        let mut c = vec![BigComplex::zero(prec); m];
        let mut fact = BigComplex::one(prec);
        for (i, y) in init.iter().enumerate() {
            if i > 0 {
                fact = fact.scale(i as i64);
            }
            c[i] = y / &fact;
        }
        // rising[r][i] = (r+1)⋯(r+i)
        let rising = |r: usize, i: usize| -> i64 { (r + 1..=r + i).map(|x| x as i64).product() };
        for j in 0..m - n {
            let mut acc = f[j].clone();
            for (i, qi) in q.iter().enumerate() {
                for l in 0..=j {
                    if i == n && l == 0 {
                        continue;
                    }
                    let r = j - l;
                    acc -= (&qi[l] * &c[r + i]).scale(rising(r, i));
                }
            }
            c[j + n] = (&acc / &q[n][0]).div_i64(rising(j, n));
        }
        Ok(c)
    }

    /// `y⁽ⁱ⁾(z0 + h)` for `i ≤ k` from the local polynomial.
    fn derivatives(c: &[BigComplex], h: &BigComplex, k: usize) -> Vec<BigComplex> {
        let prec = h.prec();
        (0..=k)
            .map(|i| {
                let mut acc = BigComplex::zero(prec);
                for m in (i..c.len()).rev() {
                    let ff: i64 = (m - i + 1..=m).map(|x| x as i64).product();
                    acc = &(&acc * h) + &c[m].scale(ff);
                }
                acc
            })
            .collect()
    }

    fn residual(&self, z: &BigComplex, d: &[BigComplex]) -> Result<f64, ValidationError> {
        let prec = z.prec();
        let mut acc = BigComplex::zero(prec);
        let mut scale: f64 = 0.0;
        let mut epow = BigComplex::one(prec);
        for (p, y) in self.spec.coeffs.iter().zip(d) {
            let t = &(&p.eval_complex(z)? * &epow) * y;
            scale = scale.max(t.abs_f64());
            acc += &t;
            epow = &epow * self.eps;
        }
        let mut epow = BigComplex::one(prec);
        for f in &self.spec.forcing {
            let t = &f.eval_complex(z)? * &epow;
            scale = scale.max(t.abs_f64());
            acc -= &t;
            epow = &epow * self.eps;
        }
        Ok(if scale > 0.0 { acc.abs_f64() / scale } else { 0.0 })
    }

    /// Largest step the truncated series supports at relative error `tol`.
    fn step_size(&self, c: &[BigComplex], z0: &BigComplex, last: f64) -> f64 {
        let m = c.len() - 1;
        // scale of the solution over the step, refined with the step itself
        let mut h = if last.is_finite() { last } else { 1.0 };
        for _ in 0..4 {
            let scale = c[..m - 1].iter().enumerate().map(|(i, x)| x.abs_f64() * h.powi(i as i32)).fold(f64::MIN_POSITIVE, f64::max);
            let mut next = f64::INFINITY;
            for k in [m - 1, m] {
                let a = c[k].abs_f64();
                if a > 0.0 {
                    next = next.min((self.cfg.tol * scale / a).powf(1.0 / k as f64));
                }
            }
            if !next.is_finite() {
                h = next;
                break;
            }
            h = next;
        }
        let d = self.singular.iter().map(|s| s.dist_f64(z0)).fold(f64::INFINITY, f64::min);
        h.min(self.cfg.reach * d)
    }
}

/// Integrates the ODE along `path` from `y⁽ⁱ⁾(path[0]) = initial[i]`.
pub fn integrate_ode(
    spec: &ODESpec,
    eps: &BigComplex,
    path: &ComplexPath,
    initial: &[BigComplex],
    cfg: &OdeConfig,
) -> Result<ODESolutionSample, ValidationError> {
    let n = spec.order();
    if initial.len() != n {
        return Err(ValidationError::InitialData { expected: n, got: initial.len() });
    }
    let prec = eps.prec();
    let st = Stepper { spec, eps, singular: coefficient_singularities(spec, prec)?, cfg };
    let mut z = path.samples[0].clone();
    let mut y: Vec<BigComplex> = initial.to_vec();
    let mut values = vec![y.clone()];
    let mut errors = vec![0.0];
    let mut err = 0.0;
    let mut residual: f64 = 0.0;
    let mut steps = 0;
    let mut last = f64::INFINITY;
    for target in &path.samples[1..] {
        loop {
            let rest = target - &z;
            let dist = rest.abs_f64();
            if dist == 0.0 {
                break;
            }
            let c = st.taylor(&z, &y)?;
            let h = st.step_size(&c, &z, last);
            if h < 1e-12 * dist.max(1e-300) {
                return Err(ValidationError::StepUnderflow(z.to_string_digits(10)));
            }
            let done = h >= dist;
            let hz = if done { rest } else { rest.scale_f64(h / dist) };
            let d = Stepper::derivatives(&c, &hz, n);
            let zn = &z + &hz;
            residual = residual.max(st.residual(&zn, &d)?);
            let m = c.len() - 1;
            let a = hz.abs_f64();
            err += c[m].abs_f64() * a.powi(m as i32) + c[m - 1].abs_f64() * a.powi(m as i32 - 1);
            y = d[..n].to_vec();
            z = if done { target.clone() } else { zn };
            last = h.min(dist);
            steps += 1;
            if steps > cfg.max_steps {
                return Err(ValidationError::StepUnderflow(z.to_string_digits(10)));
            }
            if done {
                break;
            }
        }
        values.push(y.clone());
        errors.push(err);
    }
    Ok(ODESolutionSample { schema: crate::SCHEMA, path: path.clone(), epsilon: eps.clone(), values, errors, residual, steps })
}

/// `y⁽ⁱ⁾(z)` for `i < k` from the perturbative series summed to its
/// smallest term; also returns that term's size as the truncation error.
pub fn truncated_series_data(series: &PerturbativeSeries, z: &BigComplex, eps: &BigComplex, k: usize) -> Result<(Vec<BigComplex>, f64), ValidationError> {
    let prec = z.prec();
    let mut out = vec![BigComplex::zero(prec); k];
    let mut epow = BigComplex::one(prec);
    let mut best = f64::INFINITY;
    for term in &series.terms {
        let size = (&term.eval_complex(z)? * &epow).abs_f64();
        if size > best && size > 0.0 {
            break;
        }
        if size > 0.0 {
            best = size;
        }
        let mut d = term.clone();
        for slot in out.iter_mut() {
            *slot += &d.eval_complex(z)? * &epow;
            d = d.derivative();
        }
        epow = &epow * eps;
    }
    Ok((out, if best.is_finite() { best } else { 0.0 }))
}
