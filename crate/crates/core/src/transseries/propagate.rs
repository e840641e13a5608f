//! The coefficient chain `aₙ(z)` and its Taylor-series marching along a
//! singulant path.

use std::fmt;

use rug::Rational;
use serde::Serialize;

use crate::algebra::series::{horner, series_integrate};
use crate::algebra::BigComplex;
use crate::perturbative::ODESpec;
use crate::singulant::{SingulantBranch, SingulantEquation};

use super::local::{
    coeff_series, falling, indicial_exponent, level_terms, neg_chiprime_cauchy, neg_chiprime_newton, negligible, radius,
    solve_transport, transport, zeros, Series,
};
use super::TransSeriesError;

/// The ODE chain for the `aₙ` in readable form.
#[derive(Clone, Debug, Serialize)]
pub struct Recurrence {
    pub order: usize,
    pub leading: String,
    pub general: String,
    /// The first `n` with `n = α`, where the chain says nothing about `aₙ`.
    pub unconstrained: Option<usize>,
}

impl fmt::Display for Recurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.leading)?;
        write!(f, "{}", self.general)?;
        if let Some(n) = self.unconstrained {
            write!(f, "\n(n = {n}: unconstrained, fixed by matching)")?;
        }
        Ok(())
    }
}

fn paren(s: String) -> String {
    if s.chars().skip(1).any(|c| c == '+' || c == '-') {
        format!("({s})")
    } else {
        s
    }
}

/// The recurrence for the coefficients. For second-order equations it is
/// written with `P = P₁/P₂`; otherwise in terms of
/// `S₁ = Σ i Pᵢ (−χ′)^(i−1)` and `S₂ = −χ″ Σ C(i,2) Pᵢ (−χ′)^(i−2)`.
pub fn coefficient_recurrence(spec: &ODESpec, alpha: Option<&Rational>) -> Result<Recurrence, TransSeriesError> {
    let n = spec.order();
    let unconstrained = alpha.filter(|a| a.is_integer() && **a >= 0).and_then(|a| a.numer().to_usize());
    let (leading, general) = if n == 2 {
        let p = spec.coeffs[1].checked_div(&spec.coeffs[2])?;
        let ps = if p.is_zero() { String::new() } else { format!("{} ", paren(p.to_string())) };
        let s1 = if ps.is_empty() { "-2χ′".to_string() } else { format!("{ps}- 2χ′") };
        (
            format!("({s1})a₀′ - χ″a₀ = 0"),
            format!("(n-α)aₙ′({s1}) + aₙ₋₁″ - χ″(n-α)aₙ = 0"),
        )
    } else if n == 1 {
        ("P₁a₀′ = 0".to_string(), "(n-α)P₁aₙ′ = 0".to_string())
    } else {
        (
            format!("S₁a₀′ + S₂a₀ = 0  (N = {n})"),
            format!("(n-α)_{}[S₁aₙ′ + S₂aₙ] + Σ_(j=2..{n}) Lⱼ[aₙ₋ⱼ₊₁] = 0", n - 1),
        )
    };
    Ok(Recurrence { order: n, leading, general, unconstrained })
}

#[derive(Clone, Debug, Serialize)]
pub struct CoefficientTrack {
    pub index: usize,
    /// `aₙ` at each path sample.
    pub values: Vec<BigComplex>,
    pub derivatives: Vec<BigComplex>,
    /// Starting constant: the leading local coefficient at a singular base
    /// point, otherwise the value there.
    pub constant: BigComplex,
    /// Whether the constant came from inner matching.
    pub matched: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Propagation {
    pub samples: Vec<BigComplex>,
    pub tracks: Vec<CoefficientTrack>,
    pub unconstrained_from: Option<usize>,
    /// Largest relative truncation estimate over all steps.
    pub residual: f64,
    pub steps: usize,
}

#[derive(Clone, Debug)]
pub struct MarchConfig {
    pub order: usize,
    pub max_steps: usize,
    /// Step as a fraction of the estimated convergence radius.
    pub step_fraction: f64,
}

impl MarchConfig {
    pub fn new(prec: u32) -> Self {
        // order chosen so that step_fraction^order is far below 2^(-prec/2)
        let order = ((prec as f64 / 2.0 + 16.0) / 2.0).ceil() as usize;
        MarchConfig { order: order.max(24), max_steps: 20_000, step_fraction: 0.25 }
    }
}

/// `−χ′` as a series at the base point of the branch.
fn base_neg_chiprime(spec: &ODESpec, branch: &SingulantBranch, p: &[Series], len: usize) -> Result<Series, TransSeriesError> {
    let zs = &branch.z_star;
    let v0 = -branch.chiprime[0].clone();
    if let Some(v) = neg_chiprime_newton(p, &v0, len) {
        return Ok(v);
    }
    let s1 = &branch.path.samples[1];
    let start = zs + &(s1 - zs).div_i64(4);
    let guess = &branch.chiprime[0] + &(&branch.chiprime[1] - &branch.chiprime[0]).div_i64(4);
    let eq = SingulantEquation::from_spec(spec);
    let (chip, _) = eq.root_near(&start, &guess)?;
    neg_chiprime_cauchy(spec, zs, &start, &chip, len)
}

/// Taylor series of χ at the base point, `len` terms, `χ(z★) = 0`.
pub(crate) fn chi_series_at_base(spec: &ODESpec, branch: &SingulantBranch, len: usize) -> Result<Series, TransSeriesError> {
    let p = coeff_series(spec, &branch.z_star, len + 1)?;
    let v = base_neg_chiprime(spec, branch, &p, len + 1)?;
    let mut chi: Series = series_integrate(&v).into_iter().map(|c| -c).collect();
    chi.truncate(len);
    Ok(chi)
}

fn generic_mu(prec: u32) -> BigComplex {
    // any μ with (μ)_(N−1) ≠ 0 gives the same transport operator up to scale
    BigComplex::from_rationals(&Rational::from((1, 3)), &Rational::new(), prec)
}

fn transport_singular(p: &[Series], v: &Series, len: usize) -> bool {
    let (a, b) = transport(p, v, &generic_mu(v[0].prec()), len);
    let scale = a.iter().chain(b.iter()).take(3).map(|x| x.abs_f64()).fold(0.0, f64::max);
    negligible(&a[0], scale)
}

/// Local exponent of `a₀` at the base point: `−B₀/A₁` at a simple zero of
/// the transport coefficient, zero where it does not vanish.
pub(crate) fn base_exponent(spec: &ODESpec, branch: &SingulantBranch) -> Result<BigComplex, TransSeriesError> {
    let prec = branch.z_star.prec();
    let len = 12 + spec.order();
    let p = coeff_series(spec, &branch.z_star, len)?;
    let v = base_neg_chiprime(spec, branch, &p, len)?;
    let (a, b) = transport(&p, &v, &generic_mu(prec), len);
    let scale = a.iter().chain(b.iter()).take(3).map(|x| x.abs_f64()).fold(0.0, f64::max);
    if !negligible(&a[0], scale) {
        return Ok(BigComplex::zero(prec));
    }
    if negligible(&a[1], scale) {
        return Err(TransSeriesError::NonAlgebraicExponent("transport coefficient has a multiple zero".into()));
    }
    Ok(indicial_exponent(&a, &b))
}

/// Series of `a₀ … a_(K−1)` at one point given the starting constants.
fn local_chain(
    p: &[Series],
    v: &Series,
    alpha: &BigComplex,
    init: &[BigComplex],
    order: usize,
    len: usize,
) -> Result<Vec<Series>, TransSeriesError> {
    let prec = alpha.prec();
    let n = p.len() - 1;
    let mu = |k: usize| &BigComplex::from_i64(k as i64, prec) - alpha;
    let mut out: Vec<Series> = Vec::with_capacity(init.len());
    for (k, c) in init.iter().enumerate() {
        let (a, b) = transport(p, v, &mu(k), len);
        let mut src = zeros(len, prec);
        for j in 2..=n {
            if k + 1 < j {
                break;
            }
            let prev = &out[k + 1 - j];
            let lv = level_terms(p, v, prev, &mu(k + 1 - j), len);
            for (x, y) in src.iter_mut().zip(&lv[j]) {
                *x += y;
            }
        }
        // later members differentiate earlier ones, so earlier ones carry more terms
        let want = order + (init.len() - 1 - k) * n;
        out.push(solve_transport(&a, &b, &src, c, want)?);
    }
    Ok(out)
}

/// Marches `a₀, a₁, …` along the branch path. `constants[n]` are the
/// leading local coefficients at the base point when the transport equation
/// is singular there (a simple zero of its leading coefficient), and the
/// values `aₙ(z★)` otherwise. Tracks stop before the first `n` with
/// `n = α`.
pub fn propagate_coefficients(
    spec: &ODESpec,
    branch: &SingulantBranch,
    alpha: &BigComplex,
    constants: &[BigComplex],
    matched: bool,
    cfg: &MarchConfig,
) -> Result<Propagation, TransSeriesError> {
    let prec = branch.z_star.prec();
    let nord = spec.order();
    let order = cfg.order;
    let unconstrained_from = (0..=constants.len()).find(|&k| {
        let m = &BigComplex::from_i64(k as i64, prec) - alpha;
        negligible(&falling(&m, nord - 1), 1.0)
    });
    let count = unconstrained_from.unwrap_or(constants.len());
    let init = &constants[..count];
    let len = order + count.max(1) * nord + 1;
    let samples = branch.path.samples.clone();
    let mut tracks: Vec<CoefficientTrack> = init
        .iter()
        .enumerate()
        .map(|(k, c)| CoefficientTrack {
            index: k,
            values: Vec::with_capacity(samples.len()),
            derivatives: Vec::with_capacity(samples.len()),
            constant: c.clone(),
            matched,
        })
        .collect();
    let mut z = samples[0].clone();
    let mut p = coeff_series(spec, &z, len)?;
    let mut v = base_neg_chiprime(spec, branch, &p, len)?;
    let mut chain = local_chain(&p, &v, alpha, init, order, len)?;
    let record = |tracks: &mut Vec<CoefficientTrack>, chain: &[Series]| {
        for (t, s) in tracks.iter_mut().zip(chain) {
            t.values.push(s[0].clone());
            t.derivatives.push(s.get(1).cloned().unwrap_or_else(|| BigComplex::zero(prec)));
        }
    };
    record(&mut tracks, &chain);
    let mut residual: f64 = 0.0;
    let mut steps = 0;
    for target in samples.iter().skip(1) {
        loop {
            let d = target - &z;
            let dist = d.abs_f64();
            if dist == 0.0 {
                break;
            }
            let mut r = radius(&v);
            for s in p.iter().chain(chain.iter()) {
                r = r.min(radius(s));
            }
            let reach = cfg.step_fraction * r;
            let (h, last) = if dist <= reach { (d, true) } else { (d.scale_f64(reach / dist), false) };
            let hv = h.abs_f64();
            let mut vals = Vec::with_capacity(chain.len());
            for s in &chain {
                let val = horner(s, &h);
                let tail = s.last().unwrap().abs_f64() * hv.powi(s.len() as i32 - 1);
                let size = s.iter().enumerate().map(|(j, c)| c.abs_f64() * hv.powi(j as i32)).fold(0.0, f64::max);
                if size > 0.0 {
                    residual = residual.max(tail / size);
                }
                vals.push(val);
            }
            let vnext = horner(&v, &h);
            z = if last { target.clone() } else { &z + &h };
            p = coeff_series(spec, &z, len)?;
            v = neg_chiprime_newton(&p, &vnext, len)
                .ok_or_else(|| TransSeriesError::BranchPoint(z.to_string_digits(10)))?;
            // a regular point is required from here on
            if transport_singular(&p, &v, len) {
                return Err(TransSeriesError::TransportSingular(z.to_string_digits(10)));
            }
            chain = local_chain(&p, &v, alpha, &vals, order, len)?;
            steps += 1;
            if steps > cfg.max_steps {
                return Err(TransSeriesError::TransportSingular(z.to_string_digits(10)));
            }
            if last {
                break;
            }
        }
        record(&mut tracks, &chain);
    }
    Ok(Propagation { samples, tracks, unconstrained_from, residual, steps })
}
