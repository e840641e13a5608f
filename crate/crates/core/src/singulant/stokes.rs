use rug::Float;
use serde::Serialize;

use crate::algebra::quad::QuadConfig;
use crate::algebra::BigComplex;

use super::{integrate_chiprime, SingulantBranch, SingulantEquation, SingulantError};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn square(half: f64) -> Self {
        Rect { re_min: -half, re_max: half, im_min: -half, im_max: half }
    }

    pub fn contains(&self, z: &BigComplex) -> bool {
        let (x, y) = z.to_f64();
        x >= self.re_min && x <= self.re_max && y >= self.im_min && y <= self.im_max
    }

    fn size(&self) -> f64 {
        (self.re_max - self.re_min).max(self.im_max - self.im_min)
    }
}

#[derive(Clone, Debug)]
pub struct TraceConfig {
    pub domain: Rect,
    /// Step as a fraction of the domain size.
    pub step: f64,
    pub max_points: usize,
    /// Points of Γ_z other than z★; tracing stops within `margin` of them.
    pub singular: Vec<BigComplex>,
    pub margin: f64,
    pub quad: QuadConfig,
}

impl TraceConfig {
    pub fn new(domain: Rect, prec: u32) -> Self {
        TraceConfig {
            domain,
            step: 0.02,
            max_points: 400,
            singular: Vec::new(),
            margin: 1e-3,
            quad: QuadConfig::with_tol(crate::algebra::pow2_neg(prec as f64 / 2.0)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndStatus {
    HitSingularSet,
    LeftDomain,
    Closed,
    MaxPoints,
}

#[derive(Clone, Debug, Serialize)]
pub struct StokesLine {
    pub branch: usize,
    pub z_star: BigComplex,
    /// Points after z★, each with `Im χ ≈ 0` and `Re χ > 0`.
    pub points: Vec<BigComplex>,
    pub chi: Vec<BigComplex>,
    pub status: EndStatus,
}

struct Corrected {
    z: BigComplex,
    chi: BigComplex,
    chip: BigComplex,
}

/// Projects a predicted point back onto `Im χ = 0` by Newton steps normal
/// to the line, integrating χ′ from the last accepted point each time.
fn correct(
    eq: &SingulantEquation,
    from: (&BigComplex, &BigComplex, &BigComplex),
    pred: BigComplex,
    guess: &BigComplex,
    quad: &QuadConfig,
) -> Result<Option<Corrected>, SingulantError> {
    let (z0, chi0, chip0) = from;
    let mut z = pred;
    let mut guess = guess.clone();
    let hop = z.dist_f64(z0);
    for _ in 0..12 {
        let (chip, sep) = eq.root_near(&z, &guess)?;
        if chip.dist_f64(&guess) > sep / 3.0 {
            return Ok(None);
        }
        let (delta, _) = integrate_chiprime(eq, z0, chip0, &z, &chip, quad)?;
        let chi = chi0 + &delta;
        let im = chi.im().to_f64();
        if im.abs() <= crate::algebra::pow2_neg(z.prec() as f64 / 2.0) * chi.abs_f64() {
            return Ok(Some(Corrected { z, chi, chip }));
        }
        let m = chip.abs_f64();
        if m == 0.0 {
            return Ok(None);
        }
        // δz = i·s·conj(χ′)/|χ′| moves Im χ by s·|χ′|
        let s = -im / m;
        if s.abs() > hop {
            return Ok(None);
        }
        let dz = chip.conj().mul_i().scale_f64(s / m);
        z = &z + &dz;
        guess = chip;
    }
    Ok(None)
}

fn unit(c: &BigComplex) -> BigComplex {
    c.scale_real(&c.abs().recip())
}

/// Traces the Stokes lines `Im χ = 0, Re χ > 0` leaving z★ along the γ
/// directions where `X₁(z − z★)^γ` is real and positive.
pub fn trace_stokes_lines(eq: &SingulantEquation, branch: &SingulantBranch, cfg: &TraceConfig) -> Result<Vec<StokesLine>, SingulantError> {
    if branch.gamma == 0 {
        // χ does not vanish at the base point: nothing to seed from
        return Ok(Vec::new());
    }
    let prec = branch.z_star.prec();
    let g = branch.gamma as f64;
    let zs = &branch.z_star;
    let h0 = cfg.step * cfg.domain.size();
    let mut lines = Vec::new();
    for k in 0..branch.gamma {
        let th = (-branch.x1.arg().to_f64() + std::f64::consts::TAU * k as f64) / g;
        let dir = BigComplex::cis(&Float::with_val(prec, th));
        let mut h = h0;
        let mut first = None;
        while h > h0 * 1e-6 {
            let pred = zs + &dir.scale_f64(h);
            let guess = (&branch.x1.scale(branch.gamma as i64)) * &(&pred - zs).powi(branch.gamma as i64 - 1);
            if let Some(c) = correct(eq, (zs, &BigComplex::zero(prec), &branch.chiprime[0]), pred, &guess, &cfg.quad)? {
                first = Some(c);
                break;
            }
            h /= 2.0;
        }
        let Some(mut cur) = first else {
            return Err(SingulantError::CorrectorDiverged(zs.to_string_digits(10)));
        };
        let mut points = vec![cur.z.clone()];
        let mut chis = vec![cur.chi.clone()];
        let mut status = EndStatus::MaxPoints;
        let mut h = h0;
        // previous point, for extrapolating χ′ along the line
        let mut prev = (zs.clone(), branch.chiprime[0].clone());
        while points.len() < cfg.max_points {
            if !cfg.domain.contains(&cur.z) {
                points.pop();
                chis.pop();
                status = EndStatus::LeftDomain;
                break;
            }
            if cfg.singular.iter().any(|s| s.dist_f64(&cur.z) < cfg.margin.max(h)) {
                status = EndStatus::HitSingularSet;
                break;
            }
            if points.len() > 3 && cur.z.dist_f64(&points[0]) < h {
                status = EndStatus::Closed;
                break;
            }
            let t = unit(&cur.chip.conj());
            let pred = &cur.z + &t.scale_f64(h);
            // the previous χ′ alone can sit on a neighbouring branch
            let guess = &cur.chip + &(&(&cur.chip - &prev.1) * &(&(&pred - &cur.z) / &(&cur.z - &prev.0)));
            match correct(eq, (&cur.z, &cur.chi, &cur.chip), pred, &guess, &cfg.quad)? {
                Some(c) if c.chi.re().to_f64() > 0.0 => {
                    prev = (cur.z.clone(), cur.chip.clone());
                    cur = c;
                    points.push(cur.z.clone());
                    chis.push(cur.chi.clone());
                    h = (h * 1.5).min(h0);
                }
                _ => {
                    h /= 2.0;
                    if h < h0 * 1e-6 {
                        return Err(SingulantError::CorrectorDiverged(cur.z.to_string_digits(10)));
                    }
                }
            }
        }
        lines.push(StokesLine { branch: branch.id, z_star: zs.clone(), points, chi: chis, status });
    }
    Ok(lines)
}
