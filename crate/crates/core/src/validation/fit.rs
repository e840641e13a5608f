//! Late-term model fitting for Borel germ coefficients `fₙ`.
//!
//! Every model has the form `fₙ ≈ χ^(−n) s(n) Σ_(j ≤ p) log(n)^j Aⱼ(n)` with
//! `Aⱼ(n) = Σ_k c_(j,k) n^(−k)`; `χ` and the exponent in `s` are found by
//! Levenberg–Marquardt on the residual of the inner linear fit.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use rug::ops::Pow;
use rug::Float;

use crate::algebra::linalg::least_squares;
use crate::algebra::{pow2_neg, BigComplex};

use super::ValidationError;

const FIT_PREC: u32 = 192;

#[derive(Clone)]
pub enum LateTermModel {
    /// `n^(α−1)/χⁿ`, from `(1 − w/χ)^(−α)`.
    Power,
    /// `n^(α−1) log n/χⁿ`.
    PowerLog,
    /// `n^(α−1) log² n/χⁿ`.
    PowerLogSquared,
    /// `log n/χ^(n+1)`, from `log(s)/s`.
    LogOverS,
    /// `g(n)/χⁿ` for a given shape `g`.
    Custom { name: String, g: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
}

impl LateTermModel {
    pub fn standard() -> Vec<LateTermModel> {
        vec![LateTermModel::Power, LateTermModel::LogOverS, LateTermModel::PowerLog, LateTermModel::PowerLogSquared]
    }

    pub fn name(&self) -> &str {
        match self {
            LateTermModel::Power => "power",
            LateTermModel::PowerLog => "power-log",
            LateTermModel::PowerLogSquared => "power-log2",
            LateTermModel::LogOverS => "log-over-s",
            LateTermModel::Custom { name, .. } => name,
        }
    }

    fn log_power(&self) -> usize {
        match self {
            LateTermModel::Power | LateTermModel::Custom { .. } => 0,
            LateTermModel::PowerLog | LateTermModel::LogOverS => 1,
            LateTermModel::PowerLogSquared => 2,
        }
    }

    fn free_alpha(&self) -> bool {
        matches!(self, LateTermModel::Power | LateTermModel::PowerLog | LateTermModel::PowerLogSquared)
    }
}

impl fmt::Debug for LateTermModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct FitConfig {
    /// Fraction of the sequence, from the end, used for fitting.
    pub window: f64,
    /// Number of `n^(−k)` corrections per log power.
    pub corrections: usize,
    pub threshold: f64,
    /// The leading `log(n)^p` term must carry at least this fraction of the
    /// fit at the last index.
    pub dominance: f64,
    /// A model within `tie ×` the best residual counts as equally good; the
    /// simplest such model wins, since the richer families contain the simpler.
    pub tie: f64,
    /// Residuals below this are indistinguishable.
    pub noise: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { window: 0.6, corrections: 4, threshold: 1e-3, dominance: 0.5, tie: 100.0, noise: 1e-30 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CandidateResult {
    pub model: String,
    pub residual: f64,
    pub dominant: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LateTermFit {
    pub schema: &'static str,
    pub model: String,
    pub chi: (f64, f64),
    /// Exponent `α` for the power families.
    pub alpha: Option<f64>,
    pub log_power: usize,
    /// Leading coefficients `c_(j,0)`, `j = 0..=p`, as (re, im).
    pub amplitudes: Vec<(f64, f64)>,
    /// Max relative deviation over the window.
    pub residual: f64,
    pub window: (usize, usize),
    pub candidates: Vec<CandidateResult>,
}

#[derive(Clone, Copy, Debug)]
struct C(f64, f64);

impl C {
    fn sub(self, o: C) -> C {
        C(self.0 - o.0, self.1 - o.1)
    }
    fn scale(self, k: f64) -> C {
        C(self.0 * k, self.1 * k)
    }
}

/// `log fₙ` for `n ≥ from` with the imaginary part continued along n;
/// earlier entries are left at zero.
fn unwrapped_logs(f: &[BigComplex], from: usize) -> Result<Vec<C>, ValidationError> {
    let mut out: Vec<C> = vec![C(0.0, 0.0); from];
    for (n, x) in f.iter().enumerate().skip(from) {
        if x.is_zero() {
            return Err(ValidationError::ZeroCoefficient(n));
        }
        let l = x.with_prec(FIT_PREC).ln().to_f64();
        let mut c = C(l.0, l.1);
        if n >= from + 1 {
            let step = if n >= from + 2 { out[n - 1].1 - out[n - 2].1 } else { 0.0 };
            let want = out[n - 1].1 + step;
            c.1 += std::f64::consts::TAU * ((want - c.1) / std::f64::consts::TAU).round();
        }
        out.push(c);
    }
    Ok(out)
}

struct Problem<'a> {
    /// Principal `log fₙ` at fit precision (only its exponential is used).
    logs: &'a [BigComplex],
    lo: usize,
    hi: usize,
    model: &'a LateTermModel,
    corrections: usize,
}

struct Inner {
    coeffs: Vec<BigComplex>,
    /// Relative deviations over the window.
    dev: Vec<BigComplex>,
    fit_end: BigComplex,
    lead_end: BigComplex,
}

fn fl(x: f64) -> Float {
    Float::with_val(FIT_PREC, x)
}

impl Problem<'_> {
    fn log_shape(&self, n: usize, alpha: &Float) -> Float {
        let ln = Float::with_val(FIT_PREC, n).ln();
        match self.model {
            LateTermModel::Custom { g, .. } => fl(g(n as f64).ln()),
            LateTermModel::LogOverS => fl(0.0),
            _ => Float::with_val(FIT_PREC, alpha - 1u32) * ln,
        }
    }

    /// `log(fₙ χⁿ / s(n))` for `p = (Re log χ, Im log χ, α)`.
    fn log_q(&self, p: &[Float; 3], n: usize) -> BigComplex {
        let l = BigComplex::from_floats(&p[0], &p[1], FIT_PREC);
        &(&self.logs[n] + &(&l * &BigComplex::from_i64(n as i64, FIT_PREC))) - &BigComplex::from_real(&self.log_shape(n, &p[2]))
    }

    /// `qₙ` normalized at the last index.
    fn q(&self, p: &[Float; 3]) -> Vec<BigComplex> {
        let base = self.log_q(p, self.hi - 1);
        (self.lo..self.hi).map(|n| (&self.log_q(p, n) - &base).exp()).collect()
    }

    fn basis(&self, n: usize) -> Vec<BigComplex> {
        let ln = Float::with_val(FIT_PREC, n).ln();
        let x = Float::with_val(FIT_PREC, self.lo) / n as u32;
        let mut row = Vec::new();
        for j in 0..=self.model.log_power() {
            for k in 0..self.corrections {
                let v = Float::with_val(FIT_PREC, ln.clone().pow(j as u32)) * Float::with_val(FIT_PREC, x.clone().pow(k as u32));
                row.push(BigComplex::from_real(&v));
            }
        }
        row
    }

    fn inner(&self, p: &[Float; 3]) -> Option<Inner> {
        let q = self.q(p);
        if q.iter().any(|c| !c.is_finite()) {
            return None;
        }
        let rows: Vec<Vec<BigComplex>> = (self.lo..self.hi).map(|n| self.basis(n)).collect();
        let coeffs = least_squares(&rows, &q).ok()?;
        let eval = |row: &[BigComplex]| {
            let mut acc = BigComplex::zero(FIT_PREC);
            for (x, c) in row.iter().zip(&coeffs) {
                acc += x * c;
            }
            acc
        };
        let mut dev = Vec::with_capacity(q.len());
        for (row, qn) in rows.iter().zip(&q) {
            let fit = eval(row);
            let s = BigComplex::from_real(&fit.abs());
            if s.is_zero() {
                return None;
            }
            dev.push(&(qn - &fit) / &s);
        }
        let fit_end = eval(rows.last()?);
        let p_log = self.model.log_power();
        let ln_end = Float::with_val(FIT_PREC, self.hi - 1).ln();
        let lead_end = coeffs[p_log * self.corrections].scale_real(&ln_end.pow(p_log as u32));
        Some(Inner { coeffs, dev, fit_end, lead_end })
    }

    fn residuals(&self, p: &[Float; 3]) -> Option<Vec<Float>> {
        self.inner(p).map(|r| r.dev.iter().flat_map(|d| [d.re().clone(), d.im().clone()]).collect())
    }

    fn cost(&self, p: &[Float; 3]) -> Float {
        match self.residuals(p) {
            Some(r) => r.iter().fold(fl(0.0), |acc, x| acc + Float::with_val(FIT_PREC, x * x)),
            None => fl(f64::INFINITY),
        }
    }

    /// Levenberg–Marquardt over the free parameters, with a central-difference
    /// Jacobian; each damped step is a QR least-squares solve.
    fn minimize(&self, start: [f64; 3]) -> [Float; 3] {
        let free: Vec<usize> = if self.model.free_alpha() { vec![0, 1, 2] } else { vec![0, 1] };
        let m = free.len();
        let step = pow2_neg(FIT_PREC as f64 / 3.0);
        let mut p = start.map(fl);
        let mut cost = self.cost(&p);
        let mut lambda: f64 = 1e-3;
        for _ in 0..100 {
            let Some(r0) = self.residuals(&p) else { break };
            let mut jac = vec![vec![BigComplex::zero(FIT_PREC); m]; r0.len()];
            for (col, &k) in free.iter().enumerate() {
                let h = fl(step * p[k].to_f64().abs().max(1.0));
                let (mut up, mut dn) = (p.clone(), p.clone());
                up[k] += &h;
                dn[k] -= &h;
                let (Some(ru), Some(rd)) = (self.residuals(&up), self.residuals(&dn)) else { return p };
                let two_h = Float::with_val(FIT_PREC, &h * 2u32);
                for (row, (a, b)) in ru.iter().zip(&rd).enumerate() {
                    jac[row][col] = BigComplex::from_real(&(Float::with_val(FIT_PREC, a - b) / &two_h));
                }
            }
            let norms: Vec<f64> = (0..m).map(|c| jac.iter().map(|r| r[c].abs_f64().powi(2)).sum::<f64>().sqrt().max(1e-300)).collect();
            let mut improved = false;
            for _ in 0..30 {
                let mut a = jac.clone();
                let mut rhs: Vec<BigComplex> = r0.iter().map(|x| BigComplex::from_real(&Float::with_val(FIT_PREC, -x))).collect();
                for (c, nrm) in norms.iter().enumerate() {
                    let mut row = vec![BigComplex::zero(FIT_PREC); m];
                    row[c] = BigComplex::from_f64(lambda.sqrt() * nrm, 0.0, FIT_PREC);
                    a.push(row);
                    rhs.push(BigComplex::zero(FIT_PREC));
                }
                let Ok(delta) = least_squares(&a, &rhs) else { break };
                let mut cand = p.clone();
                for (&k, d) in free.iter().zip(&delta) {
                    cand[k] += d.re();
                }
                let c = self.cost(&cand);
                if c < cost {
                    let small = free.iter().zip(&delta).all(|(&k, d)| d.abs_f64() <= pow2_neg(FIT_PREC as f64 / 2.0) * p[k].to_f64().abs().max(1.0));
                    let stalled = c.to_f64() > cost.to_f64() * (1.0 - 1e-6);
                    p = cand;
                    cost = c;
                    lambda = (lambda / 10.0).max(1e-30);
                    improved = !(small || stalled);
                    break;
                }
                lambda *= 10.0;
            }
            if !improved {
                break;
            }
        }
        p
    }
}

/// Ratio-test start from the last two log-ratios of `fₙ` with the model's
/// log factors removed: `log χ` and `α`.
fn start_point(logs: &[C], model: &LateTermModel) -> [f64; 3] {
    let n = logs.len() - 2;
    let adj = |k: usize| {
        let kf = k as f64;
        let extra = match model {
            LateTermModel::Custom { g, .. } => g(kf).ln(),
            _ => model.log_power() as f64 * kf.ln().max(1e-300).ln(),
        };
        logs[k].sub(C(extra, 0.0))
    };
    let d = |k: usize| adj(k).sub(adj(k + 1));
    let (d0, d1) = (d(n - 1), d(n));
    // d_k ≈ log χ − (α−1)/k
    let l = d1.scale(n as f64).sub(d0.scale((n - 1) as f64));
    let alpha = if model.free_alpha() { 1.0 + (l.0 - d1.0) * n as f64 } else { 1.0 };
    [l.0, l.1, alpha]
}

/// Picks the best of `candidates` for the late behaviour of `coeffs`.
pub fn late_term_fit(coeffs: &[BigComplex], candidates: &[LateTermModel], cfg: &FitConfig) -> Result<LateTermFit, ValidationError> {
    if coeffs.len() < 40 {
        return Err(ValidationError::TooFewTerms { needed: 40, got: coeffs.len() });
    }
    let hi = coeffs.len();
    let lo = (((1.0 - cfg.window) * hi as f64).floor() as usize).max(1);
    let logs = unwrapped_logs(coeffs, lo)?;
    let big_logs: Vec<BigComplex> = coeffs.iter().enumerate().map(|(n, x)| if n < lo { BigComplex::zero(FIT_PREC) } else { x.with_prec(FIT_PREC).ln() }).collect();
    let mut table = Vec::new();
    let mut passing: Vec<(usize, f64, [Float; 3], Inner)> = Vec::new();
    for (idx, model) in candidates.iter().enumerate() {
        let prob = Problem { logs: &big_logs, lo, hi, model, corrections: cfg.corrections };
        let p = prob.minimize(start_point(&logs, model));
        let Some(inner) = prob.inner(&p) else {
            table.push(CandidateResult { model: model.name().into(), residual: f64::INFINITY, dominant: false });
            continue;
        };
        let residual = inner.dev.iter().map(|d| d.abs_f64()).fold(0.0, f64::max);
        let dominant = inner.lead_end.abs_f64() >= cfg.dominance * inner.fit_end.abs_f64();
        table.push(CandidateResult { model: model.name().into(), residual, dominant });
        if residual <= cfg.threshold && dominant {
            passing.push((idx, residual, p, inner));
        }
    }
    let best = passing.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    // candidates are listed simplest first; prefer the simplest near the best
    let tie = (cfg.tie * best).max(cfg.noise);
    let Some((idx, residual, p, inner)) = passing.into_iter().find(|x| x.1 <= tie) else {
        let best = table.iter().map(|c| c.residual).fold(f64::INFINITY, f64::min);
        return Err(ValidationError::NoModel { best });
    };
    let model = &candidates[idx];
    let prob = Problem { logs: &big_logs, lo, hi, model, corrections: cfg.corrections };
    let chi = BigComplex::from_floats(&p[0], &p[1], FIT_PREC).exp().to_f64();
    // undo the normalization at the last index
    let norm = prob.log_q(&p, hi - 1).exp();
    let amplitudes = (0..=model.log_power()).map(|j| (&inner.coeffs[j * cfg.corrections] * &norm).to_f64()).collect();
    Ok(LateTermFit {
        schema: crate::SCHEMA,
        model: model.name().into(),
        chi,
        alpha: model.free_alpha().then_some(p[2].to_f64()),
        log_power: model.log_power(),
        amplitudes,
        residual,
        window: (lo, hi),
        candidates: table,
    })
}
