//! Trans-series assembly: local exponents at a boundary-layer point, the
//! coefficient chain `aₙ(z)` of the singularity expansion
//! `y_B ≈ (w−χ)^(−α) Σ aₙ (w−χ)ⁿ`, inner-problem matching for the
//! constants, and the exponentially small jumps they produce.

mod first_order;
mod inner;
mod local;
mod propagate;

pub use first_order::{borel_coefficients, first_order_closed_form, first_order_with_primitive, inhomogeneous_borel_integral};
pub use inner::{
    build_inner_problem, connection_constants, inner_data_from_germ, local_forms, solve_inner_series, ConnectionConfig,
    ConnectionFit, InnerProblem, LocalForms,
};
pub use propagate::{coefficient_recurrence, propagate_coefficients, CoefficientTrack, MarchConfig, Propagation, Recurrence};

use rug::Rational;
use serde::Serialize;

use crate::algebra::gamma::recip_gamma;
use crate::algebra::{AlgebraError, BigComplex};
use crate::perturbative::{pole_order_at, PerturbativeError, PerturbativeSeries, ODESpec};
use crate::singulant::{SingulantBranch, SingulantError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransSeriesError {
    #[error("local exponent not determinable: {0}")]
    NonAlgebraicExponent(String),
    #[error("ODE coefficient singular at z = {0}")]
    SingularCoefficient(String),
    #[error("singulant has a branch point at z = {0}")]
    BranchPoint(String),
    #[error("transport equation singular near z = {0}; re-route the path")]
    TransportSingular(String),
    #[error("resonant source at order {0} needs a logarithmic term")]
    LogarithmicResonance(usize),
    #[error("inner problem: {0}")]
    LocalForms(String),
    #[error("s = 0 is a singular point of the inner problem (nested boundary layer)")]
    SingularInnerOrigin,
    #[error("late-term fit residual {residual:e} above {tol:e}")]
    FitResidual { residual: f64, tol: f64 },
    #[error("fitted constant moves by {0:e} across window shifts")]
    UnstableFit(f64),
    #[error("Newton continuation failed near {0}")]
    NewtonFailed(String),
    #[error("z = {0} is not a sample of the component path")]
    NotOnPath(String),
    #[error("the singulant does not vanish at the base point")]
    NoZero,
    #[error(transparent)]
    Singulant(#[from] SingulantError),
    #[error(transparent)]
    Perturbative(#[from] PerturbativeError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// `χ ∼ X₁ (z−z★)^γ`, `y₁ ∼ (z−z★)^(−δ)`, `a₀ ∼ (z−z★)^β`, and
/// `α = (β+δ)/γ`, all stored exactly.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalExponents {
    pub gamma: u32,
    pub delta: u32,
    #[serde(serialize_with = "ser_rational")]
    pub beta: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub alpha: Rational,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl LocalExponents {
    pub fn alpha_complex(&self, prec: u32) -> BigComplex {
        BigComplex::from_rationals(&self.alpha, &Rational::new(), prec)
    }

    /// Integer value of α, if any.
    pub fn integer_alpha(&self) -> Option<i64> {
        self.alpha.is_integer().then(|| self.alpha.numer().to_i64()).flatten()
    }
}

/// Best rational approximation with denominator at most `max_den`, accepted
/// when within `tol`.
pub fn recognize_rational(x: f64, max_den: u64, tol: f64) -> Option<Rational> {
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut r = x;
    for _ in 0..40 {
        let a = r.floor();
        let (h2, k2) = (a as i64 * h1 + h0, a as i64 * k1 + k0);
        if k2 as u64 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (x - h1 as f64 / k1 as f64).abs() <= tol {
            return Some(Rational::from((h1, k1)));
        }
        let frac = r - a;
        if frac.abs() < 1e-300 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

/// Local exponents at the base point of `branch` (where χ vanishes).
pub fn local_exponents(spec: &ODESpec, series: &PerturbativeSeries, branch: &SingulantBranch) -> Result<LocalExponents, TransSeriesError> {
    if branch.gamma == 0 {
        return Err(TransSeriesError::NoZero);
    }
    let zs = &branch.z_star;
    let y1 = series.terms.get(1).cloned().unwrap_or_default();
    let delta = pole_order_at(&y1, zs) as u32;
    let beta = propagate::base_exponent(spec, branch)?;
    let (re, im) = beta.to_f64();
    if im.abs() > 1e-12 {
        return Err(TransSeriesError::NonAlgebraicExponent(beta.to_string_digits(10)));
    }
    let beta = recognize_rational(re, 64, 1e-12)
        .ok_or_else(|| TransSeriesError::NonAlgebraicExponent(beta.to_string_digits(10)))?;
    let alpha = Rational::from(&beta + delta) / branch.gamma;
    Ok(LocalExponents { gamma: branch.gamma, delta, beta, alpha })
}

/// The Hankel integral of `e^(−w/ε) (w−χ)^(−β)` around the cut leaving χ
/// outwards, with the power continuous from `w = 0`:
/// `−2πi ε (χ/ε)^β (−χ)^(−β) e^(−χ/ε) / Γ(β)`. Every jump formula goes
/// through here.
pub fn hankel_power_term(beta: &BigComplex, chi: &BigComplex, eps: &BigComplex) -> BigComplex {
    let prec = chi.prec();
    let rg = recip_gamma(beta);
    if rg.is_zero() {
        return BigComplex::zero(prec);
    }
    let nb = -beta.clone();
    let t = &(&(chi / eps).pow(beta) * &(-chi.clone()).pow(&nb)) * &(-(chi / eps)).exp();
    -(&(&(BigComplex::two_pi_i(prec) * eps) * &t) * &rg)
}

/// Jump `Σ_(i≤order) aᵢ(z) H(α−i)` from the singularity expansion data.
pub fn singular_part_jump(alpha: &BigComplex, coeffs: &[BigComplex], chi: &BigComplex, eps: &BigComplex) -> BigComplex {
    let prec = chi.prec();
    let mut acc = BigComplex::zero(prec);
    for (i, a) in coeffs.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let b = alpha - &BigComplex::from_i64(i as i64, prec);
        acc += a * &hankel_power_term(&b, chi, eps);
    }
    acc
}

/// Jump for late terms `y_(n+1) ∼ n^(α−1) n! (−1)^α A / (χ^(n+α) Γ(α))`:
/// these correspond to `a₀ = A (−1)^α (−χ)^α / χ^α`.
pub fn late_term_jump(amp: &BigComplex, alpha: &BigComplex, chi: &BigComplex, eps: &BigComplex) -> BigComplex {
    let prec = chi.prec();
    let sign = BigComplex::from_i64(-1, prec).pow(alpha);
    let a0 = &(&(amp * &sign) * &(-chi.clone()).pow(alpha)) / &chi.pow(alpha);
    singular_part_jump(alpha, &[a0], chi, eps)
}

/// `2πi ε g(χ/ε) e^(−χ/ε)` for late terms `uₙ ∼ g(n)/(n χⁿ)`.
pub fn general_switch<G>(g: G, chi: &BigComplex, eps: &BigComplex) -> BigComplex
where
    G: Fn(&BigComplex) -> BigComplex,
{
    let prec = chi.prec();
    let n = chi / eps;
    &(&(BigComplex::two_pi_i(prec) * eps) * &g(&n)) * &(-n).exp()
}

/// Leading form `coeff · ε^eps_power · (log ε)^log_power · e^(−χ/ε)` of a
/// switched contribution.
#[derive(Clone, Debug, Serialize)]
pub struct SwitchTerm {
    pub coeff: BigComplex,
    #[serde(serialize_with = "ser_rational")]
    pub eps_power: Rational,
    pub log_power: u32,
}

impl SwitchTerm {
    /// For `g(n) = A n^p (log n)^q`: `log(χ/ε) ∼ −log ε` at leading order.
    pub fn from_power_log(amp: &BigComplex, p: &Rational, q: u32, chi: &BigComplex) -> SwitchTerm {
        let prec = chi.prec();
        let pc = BigComplex::from_rationals(p, &Rational::new(), prec);
        let mut coeff = &(BigComplex::two_pi_i(prec) * amp) * &chi.pow(&pc);
        if q % 2 == 1 {
            coeff = -coeff;
        }
        SwitchTerm { coeff, eps_power: Rational::from(1) - p, log_power: q }
    }

    pub fn eval(&self, chi: &BigComplex, eps: &BigComplex) -> BigComplex {
        let prec = chi.prec();
        let ep = BigComplex::from_rationals(&self.eps_power, &Rational::new(), prec);
        let mut v = &self.coeff * &eps.pow(&ep);
        if self.log_power > 0 {
            v = &v * &eps.ln().powi(self.log_power as i64);
        }
        &v * &(-(chi / eps)).exp()
    }
}

/// Everything known about one exponential `e^(−χ/ε)` attached to a branch.
#[derive(Clone, Debug, Serialize)]
pub struct TransSeriesComponent {
    pub schema: &'static str,
    pub branch: usize,
    pub z_star: BigComplex,
    pub exponents: LocalExponents,
    /// Matched constants `a_(i,0)`; `None` where matching does not apply.
    pub constants: Vec<Option<BigComplex>>,
    pub samples: Vec<BigComplex>,
    pub chi: Vec<BigComplex>,
    pub tracks: Vec<CoefficientTrack>,
    /// First index left unconstrained by the recurrence (`n = α`).
    pub unconstrained_from: Option<usize>,
}

impl TransSeriesComponent {
    fn sample_index(&self, z: &BigComplex) -> Result<usize, TransSeriesError> {
        let tol = crate::algebra::pow2_neg(z.prec() as f64 / 2.0) * z.abs_f64().max(1.0);
        self.samples
            .iter()
            .position(|s| s.dist_f64(z) <= tol)
            .ok_or_else(|| TransSeriesError::NotOnPath(z.to_string_digits(10)))
    }

    /// The Stokes jump at a path sample through order `order` in ε.
    pub fn stokes_jump(&self, z: &BigComplex, eps: &BigComplex, order: usize) -> Result<BigComplex, TransSeriesError> {
        let k = self.sample_index(z)?;
        let prec = z.prec();
        let coeffs: Vec<BigComplex> = self.tracks.iter().take(order + 1).map(|t| t.values[k].clone()).collect();
        Ok(singular_part_jump(&self.exponents.alpha_complex(prec), &coeffs, &self.chi[k], eps))
    }
}

pub fn stokes_jump(component: &TransSeriesComponent, z: &BigComplex, eps: &BigComplex, order: usize) -> Result<BigComplex, TransSeriesError> {
    component.stokes_jump(z, eps, order)
}

#[derive(Clone, Debug)]
pub struct BuildConfig {
    pub march: MarchConfig,
    pub connection: ConnectionConfig,
    /// Taylor terms of the inner solutions used for the connection fit.
    pub inner_terms: usize,
    /// Number of coefficient tracks to build.
    pub tracks: usize,
}

impl BuildConfig {
    pub fn new(prec: u32) -> Self {
        BuildConfig { march: MarchConfig::new(prec), connection: ConnectionConfig::default(), inner_terms: 300, tracks: 3 }
    }
}

/// Matched constants `a_(i,0) = Cᵢ (−χ₀)^(α−i)` via the Van Dyke rule: the
/// i-th constant is read from the inner problem shifted by
/// `kᵢ = δ + β − γ(α−i)`.
pub fn matched_constants(
    spec: &ODESpec,
    series: &PerturbativeSeries,
    branch: &SingulantBranch,
    ex: &LocalExponents,
    count: usize,
    cfg: &BuildConfig,
) -> Result<Vec<Option<BigComplex>>, TransSeriesError> {
    let prec = branch.z_star.prec();
    let g = ex.gamma as usize;
    let alpha = ex.alpha_complex(prec);
    let kmax = ex.delta as usize + ex.beta.numer().to_usize().unwrap_or(0) + 1;
    let chi_loc = propagate::chi_series_at_base(spec, branch, g + kmax + spec.order() + 8)?;
    let chi0 = chi_loc[g].clone();
    let forms = local_forms(spec, &branch.z_star, ex.gamma, &chi0)?;
    let mut out = Vec::with_capacity(count);
    let mut scale = 0.0f64;
    for i in 0..count {
        let k = Rational::from(ex.delta) + &ex.beta - Rational::from(ex.gamma) * (Rational::from(&ex.alpha - i as u32));
        if !k.is_integer() || k < 0 {
            out.push(None);
            continue;
        }
        let k = k.numer().to_usize().unwrap_or(0);
        let mut init = inner_data_from_germ(series, &branch.z_star, &chi_loc, ex.gamma, ex.delta, k, spec.order() - 1)?;
        // data at rounding level is zero
        scale = init.iter().map(|x| x.abs_f64()).fold(scale, f64::max);
        for x in init.iter_mut().filter(|x| local::negligible(x, scale)) {
            *x = BigComplex::zero(prec);
        }
        let problem = build_inner_problem(&forms, ex.delta, k, &init)?;
        let phi = solve_inner_series(&problem, cfg.inner_terms)?;
        let fit = connection_constants(&phi, &alpha, (i + 1).max(3), &cfg.connection)?;
        let c = match fit.constants.get(i).cloned().flatten() {
            Some(c) => c,
            None => {
                out.push(None);
                continue;
            }
        };
        let e = &alpha - &BigComplex::from_i64(i as i64, prec);
        out.push(Some(&c * &(-chi0.clone()).pow(&e)));
    }
    Ok(out)
}

/// Builds the component of `branch` from its base point: exponents, matched
/// constants and propagated coefficient tracks along the branch path.
pub fn build_component(
    spec: &ODESpec,
    series: &PerturbativeSeries,
    branch: &SingulantBranch,
    cfg: &BuildConfig,
) -> Result<TransSeriesComponent, TransSeriesError> {
    let ex = local_exponents(spec, series, branch)?;
    let prec = branch.z_star.prec();
    let alpha = ex.alpha_complex(prec);
    let constants = matched_constants(spec, series, branch, &ex, cfg.tracks, cfg)?;
    let init: Vec<BigComplex> = constants.iter().map_while(|c| c.clone()).collect();
    let prop = propagate_coefficients(spec, branch, &alpha, &init, true, &cfg.march)?;
    Ok(TransSeriesComponent {
        schema: crate::SCHEMA,
        branch: branch.id,
        z_star: branch.z_star.clone(),
        exponents: ex,
        constants,
        samples: prop.samples,
        chi: branch.chi.clone(),
        tracks: prop.tracks,
        unconstrained_from: prop.unconstrained_from,
    })
}
