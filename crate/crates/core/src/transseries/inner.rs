//! Inner problems at a boundary-layer point. With `s = w/(χ₀ (z−z★)^γ)`
//! the Borel equation for `y_B = (z−z★)^(−β) φ(s)` reduces at leading order
//! to an ODE in s whose Taylor coefficients at `s = 0` come from the germ
//! and whose behaviour at `s = 1` carries the matching constants.

use serde::Serialize;

use crate::algebra::linalg::least_squares;
use crate::algebra::series::series_mul;
use crate::algebra::{pow2_neg, BigComplex};
use crate::perturbative::{ODESpec, PerturbativeSeries};

use super::local::{falling, zeros, Series};
use super::TransSeriesError;

/// Leading local data at z★: `χ ∼ χ₀ h^γ` and `Pᵢ ∼ pᵢ h^(v_N + (γ−1)(N−i))`.
#[derive(Clone, Debug, Serialize)]
pub struct LocalForms {
    pub gamma: u32,
    pub chi0: BigComplex,
    pub leading: Vec<BigComplex>,
}

pub fn local_forms(spec: &ODESpec, z_star: &BigComplex, gamma: u32, chi0: &BigComplex) -> Result<LocalForms, TransSeriesError> {
    let prec = z_star.prec();
    let n = spec.order();
    let tol = pow2_neg(prec as f64 / 2.0);
    let len = n * gamma as usize + 4;
    let lau: Vec<(i64, Vec<BigComplex>)> = spec.coeffs.iter().map(|p| p.laurent_at(z_star, len, tol)).collect();
    let vn = lau[n].0;
    let mut leading = Vec::with_capacity(n + 1);
    for (i, (v, c)) in lau.iter().enumerate() {
        if spec.coeffs[i].is_zero() {
            leading.push(BigComplex::zero(prec));
            continue;
        }
        let e = vn + (gamma as i64 - 1) * (n - i) as i64 - v;
        if e < 0 {
            return Err(TransSeriesError::LocalForms(format!("coefficient {i} is too singular at z★")));
        }
        leading.push(c.get(e as usize).cloned().unwrap_or_else(|| BigComplex::zero(prec)));
    }
    Ok(LocalForms { gamma, chi0: chi0.clone(), leading })
}

/// Linear operator `Σ_j c_j(s) ∂_s^j` with polynomial `c_j` (ascending).
type Operator = Vec<Vec<BigComplex>>;

fn poly_add_into(dst: &mut Vec<BigComplex>, src: &[BigComplex], scale: &BigComplex) {
    let prec = scale.prec();
    if dst.len() < src.len() {
        dst.resize(src.len(), BigComplex::zero(prec));
    }
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s * scale;
    }
}

/// `∂_s ∘ L`.
fn d_s(l: &Operator, prec: u32) -> Operator {
    let mut out: Operator = vec![Vec::new(); l.len() + 1];
    let one = BigComplex::one(prec);
    for (j, c) in l.iter().enumerate() {
        let dc: Vec<BigComplex> = c.iter().enumerate().skip(1).map(|(k, x)| x.scale(k as i64)).collect();
        poly_add_into(&mut out[j], &dc, &one);
        poly_add_into(&mut out[j + 1], c, &one);
    }
    out
}

/// `s · L`.
fn s_times(l: &Operator, prec: u32) -> Operator {
    l.iter()
        .map(|c| {
            let mut v = vec![BigComplex::zero(prec)];
            v.extend(c.iter().cloned());
            v
        })
        .collect()
}

fn lin_comb(a: &Operator, ka: &BigComplex, b: &Operator, kb: &BigComplex) -> Operator {
    let mut out: Operator = vec![Vec::new(); a.len().max(b.len())];
    for (j, c) in a.iter().enumerate() {
        poly_add_into(&mut out[j], c, ka);
    }
    for (j, c) in b.iter().enumerate() {
        poly_add_into(&mut out[j], c, kb);
    }
    out
}

/// Inner operator for `(z−z★)^(−β) φ(s)`, normalized so that the leading
/// s-coefficient of the highest derivative is one.
pub(crate) fn inner_operator(forms: &LocalForms, beta: &BigComplex) -> Operator {
    let prec = beta.prec();
    let n = forms.leading.len() - 1;
    let g = forms.gamma as i64;
    let inv_chi0 = forms.chi0.recip();
    let mut total: Operator = vec![Vec::new(); n + 1];
    for (i, pi) in forms.leading.iter().enumerate() {
        if pi.is_zero() {
            continue;
        }
        let mut l: Operator = vec![vec![BigComplex::one(prec)]];
        let mut m = -beta.clone();
        for _ in 0..n - i {
            l = d_s(&l, prec).into_iter().map(|c| c.into_iter().map(|x| &x * &inv_chi0).collect()).collect();
            m = &m - &BigComplex::from_i64(g, prec);
        }
        for _ in 0..i {
            // ∂_z (h^m L φ) = h^(m−1) (m L − γ s ∂_s L) φ
            let sl = s_times(&d_s(&l, prec), prec);
            l = lin_comb(&l, &m, &sl, &BigComplex::from_i64(-g, prec));
            m = &m - &BigComplex::one(prec);
        }
        for (j, c) in l.iter().enumerate() {
            poly_add_into(&mut total[j], c, pi);
        }
    }
    total.truncate(n + 1);
    let lead = total[n].iter().rev().find(|x| !x.is_zero()).cloned().unwrap_or_else(|| BigComplex::one(prec));
    let inv = lead.recip();
    for c in total.iter_mut() {
        for x in c.iter_mut() {
            *x = &*x * &inv;
        }
        while c.len() > 1 && c.last().map(|x| x.abs_f64() < pow2_neg(prec as f64 / 2.0)).unwrap_or(false) {
            c.pop();
        }
    }
    total
}

#[derive(Clone, Debug, Serialize)]
pub struct InnerProblem {
    pub k: usize,
    /// Exponent in `(z−z★)^(−β) φ(s)`.
    pub beta: BigComplex,
    /// `coeffs[j]`: ascending s-coefficients multiplying `φ^(j)`.
    pub coeffs: Vec<Vec<BigComplex>>,
    /// `φ(0), φ′(0), …` up to the order minus one.
    pub initial: Vec<BigComplex>,
}

impl InnerProblem {
    /// Coefficient `c_j(s)` as real parts at double precision, for display.
    pub fn coeffs_f64(&self) -> Vec<Vec<f64>> {
        self.coeffs.iter().map(|c| c.iter().map(|x| x.re().to_f64()).collect()).collect()
    }
}

/// The inner problem of index `k`: exponent `delta − k`. `taylor` holds the
/// Taylor coefficients `φ_(k,0) … φ_(k,N−1)` from the germ.
pub fn build_inner_problem(forms: &LocalForms, delta: u32, k: usize, taylor: &[BigComplex]) -> Result<InnerProblem, TransSeriesError> {
    let prec = forms.chi0.prec();
    let beta = BigComplex::from_i64(delta as i64 - k as i64, prec);
    let coeffs = inner_operator(forms, &beta);
    let n = coeffs.len() - 1;
    // the moving singularity sits at s = 1
    let at_one: BigComplex = coeffs[n].iter().fold(BigComplex::zero(prec), |a, x| &a + x);
    let scale = coeffs[n].iter().map(|x| x.abs_f64()).fold(0.0, f64::max);
    if at_one.abs_f64() > 1e-20 * scale.max(1.0) {
        return Err(TransSeriesError::LocalForms("leading inner coefficient does not vanish at s = 1".into()));
    }
    let mut initial = Vec::with_capacity(n);
    let mut fact = BigComplex::one(prec);
    for j in 0..n {
        if j > 0 {
            fact = fact.scale(j as i64);
        }
        let t = taylor.get(j).cloned().unwrap_or_else(|| BigComplex::zero(prec));
        initial.push(&t * &fact);
    }
    Ok(InnerProblem { k, beta, coeffs, initial })
}

/// `φ_(k,n) = [h^(k−δ)] (uₙ χⁿ)` for `n ≤ m`, where `uₙ = y_(n+1)/n!` and
/// `chi` is the Taylor series of χ at z★ (starting with γ zeros).
pub fn inner_data_from_germ(
    series: &PerturbativeSeries,
    z_star: &BigComplex,
    chi: &[BigComplex],
    gamma: u32,
    delta: u32,
    k: usize,
    m: usize,
) -> Result<Vec<BigComplex>, TransSeriesError> {
    let prec = z_star.prec();
    let g = gamma as usize;
    let tilde: Series = chi[g..].to_vec();
    let tol = pow2_neg(prec as f64 / 2.0);
    let mut out = Vec::with_capacity(m + 1);
    let mut fact = BigComplex::one(prec);
    for n in 0..=m {
        if n > 0 {
            fact = fact.scale(n as i64);
        }
        let y = series.terms.get(n + 1).ok_or_else(|| {
            TransSeriesError::LocalForms(format!("perturbative series too short for inner datum {n}"))
        })?;
        if y.is_zero() {
            out.push(BigComplex::zero(prec));
            continue;
        }
        let (v, _) = y.laurent_at(z_star, 1, tol);
        let e = k as i64 - delta as i64 - v - (g * n) as i64;
        if e < 0 {
            out.push(BigComplex::zero(prec));
            continue;
        }
        let e = e as usize;
        if e >= tilde.len() {
            return Err(TransSeriesError::LocalForms("singulant series too short for the inner data".into()));
        }
        let (_, lc) = y.laurent_at(z_star, e + 1, tol);
        let mut pow = zeros(e + 1, prec);
        pow[0] = BigComplex::one(prec);
        for _ in 0..n {
            pow = series_mul(&pow, &tilde, e + 1);
        }
        let mut acc = BigComplex::zero(prec);
        for j in 0..=e {
            acc += &lc[j] * &pow[e - j];
        }
        out.push(&acc / &fact);
    }
    Ok(out)
}

/// Taylor coefficients `φ₀ … φ_M` at `s = 0` from the ODE recurrence.
pub fn solve_inner_series(problem: &InnerProblem, m: usize) -> Result<Vec<BigComplex>, TransSeriesError> {
    let prec = problem.beta.prec();
    let c = &problem.coeffs;
    let n = c.len() - 1;
    let lead0 = c[n].first().cloned().unwrap_or_else(|| BigComplex::zero(prec));
    let scale = c[n].iter().map(|x| x.abs_f64()).fold(0.0, f64::max);
    if lead0.abs_f64() <= pow2_neg(prec as f64 / 2.0) * scale {
        return Err(TransSeriesError::SingularInnerOrigin);
    }
    let mut phi: Vec<BigComplex> = Vec::with_capacity(m + 1);
    let mut fact = BigComplex::one(prec);
    for j in 0..n.min(m + 1) {
        if j > 0 {
            fact = fact.scale(j as i64);
        }
        phi.push(&problem.initial[j] / &fact);
    }
    let mut q = 0usize;
    while phi.len() <= m {
        // coefficient of s^q: Σ_j Σ_l c_(j,l) (p)_j φ_p with p = q − l + j
        let target = q + n;
        let mut acc = BigComplex::zero(prec);
        for (j, cj) in c.iter().enumerate() {
            for (l, cjl) in cj.iter().enumerate() {
                if cjl.is_zero() || q + j < l {
                    continue;
                }
                let p = q + j - l;
                if p == target {
                    continue;
                }
                let ff = falling(&BigComplex::from_i64(p as i64, prec), j);
                acc += &(cjl * &ff) * &phi[p];
            }
        }
        let ff = falling(&BigComplex::from_i64(target as i64, prec), n);
        phi.push(-(&acc / &(&lead0 * &ff)));
        q += 1;
    }
    Ok(phi)
}

#[derive(Clone, Debug)]
pub struct ConnectionConfig {
    /// Fraction of the sequence (at the end) used for fitting.
    pub window: f64,
    pub tol: f64,
    /// Tolerance on the relative movement of C₀ across window shifts.
    pub stability: f64,
}

impl Default for ConnectionConfig {
    fn default() -> Self {
        ConnectionConfig { window: 0.4, tol: 1e-6, stability: 1e-6 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConnectionFit {
    /// `Cᵢ` multiplying `(1−s)^(−(α−i))`; `None` where that power is a
    /// polynomial and invisible in late terms.
    pub constants: Vec<Option<BigComplex>>,
    pub residual: f64,
    pub drift: f64,
    pub window: (usize, usize),
}

/// `[sⁿ](1−s)^(−a) = Γ(n+a)/(Γ(a) n!)` for `n < len`.
fn binomial_column(a: &BigComplex, len: usize) -> Vec<BigComplex> {
    let prec = a.prec();
    let mut out = Vec::with_capacity(len);
    let mut b = BigComplex::one(prec);
    for n in 0..len {
        out.push(b.clone());
        b = (&b * &(a + &BigComplex::from_i64(n as i64, prec))).div_i64(n as i64 + 1);
    }
    out
}

fn fit_window(
    phi: &[BigComplex],
    cols: &[(usize, Vec<BigComplex>)],
    lo: usize,
    hi: usize,
) -> Result<(Vec<BigComplex>, f64), TransSeriesError> {
    let prec = phi[0].prec();
    let live: Vec<&(usize, Vec<BigComplex>)> = cols.iter().filter(|(_, c)| c[lo..hi].iter().any(|x| !x.is_zero())).collect();
    let mut a = Vec::with_capacity(hi - lo);
    let mut b = Vec::with_capacity(hi - lo);
    for n in lo..hi {
        let w = live.iter().map(|(_, c)| c[n].abs_f64()).fold(0.0, f64::max).max(1e-300);
        let inv = BigComplex::from_f64(1.0 / w, 0.0, prec);
        a.push(live.iter().map(|(_, c)| &c[n] * &inv).collect::<Vec<_>>());
        b.push(&phi[n] * &inv);
    }
    let x = if live.is_empty() { Vec::new() } else { least_squares(&a, &b)? };
    let mut res: f64 = 0.0;
    for n in lo..hi {
        let mut model = BigComplex::zero(prec);
        for ((_, c), xi) in live.iter().zip(&x) {
            model += &c[n] * xi;
        }
        let d = phi[n].dist_f64(&model);
        let size = phi[n].abs_f64();
        if size > 0.0 {
            res = res.max(d / size);
        } else if d > 0.0 {
            res = f64::INFINITY;
        }
    }
    let mut full = vec![BigComplex::zero(prec); cols.len()];
    for ((i, _), xi) in live.iter().zip(x) {
        full[*i] = xi;
    }
    Ok((full, res))
}

/// Fits `φₙ ≈ Σ_(i<depth) Cᵢ Γ(n+α−i)/(Γ(α−i) n!)` on the tail window and
/// checks that C₀ is stable when the window slides back by a tenth.
pub fn connection_constants(phi: &[BigComplex], alpha: &BigComplex, depth: usize, cfg: &ConnectionConfig) -> Result<ConnectionFit, TransSeriesError> {
    let m = phi.len();
    let prec = alpha.prec();
    let lo = ((1.0 - cfg.window) * m as f64).floor() as usize;
    if m < 10 || m - lo < depth + 2 {
        return Err(TransSeriesError::FitResidual { residual: f64::INFINITY, tol: cfg.tol });
    }
    let cols: Vec<(usize, Vec<BigComplex>)> =
        (0..depth).map(|i| (i, binomial_column(&(alpha - &BigComplex::from_i64(i as i64, prec)), m))).collect();
    let (c, residual) = fit_window(phi, &cols, lo, m)?;
    let shift = (m / 10).max(1);
    let (c2, _) = fit_window(phi, &cols, lo - shift.min(lo), m - shift)?;
    let size = c[0].abs_f64();
    let drift = if size > 0.0 { c[0].dist_f64(&c2[0]) / size } else { c2[0].abs_f64() };
    if residual > cfg.tol {
        return Err(TransSeriesError::FitResidual { residual, tol: cfg.tol });
    }
    if drift > cfg.stability {
        return Err(TransSeriesError::UnstableFit(drift));
    }
    let constants = cols
        .iter()
        .map(|(i, col)| col[lo..m].iter().any(|x| !x.is_zero()).then(|| c[*i].clone()))
        .collect();
    Ok(ConnectionFit { constants, residual, drift, window: (lo, m) })
}
