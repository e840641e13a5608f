//! Singulant equation, branch continuation of χ′ and Stokes-line tracing.
//!
//! Singulants solve `Σ Pᵢ(z)(−χ′)ⁱ = 0`, the leading balance of the Borel
//! operator near `w = χ(z)`. With this sign the branches are already
//! normalized so that `e^(−χ/ε)` is recessive where `Re χ > 0`.

mod stokes;

pub use stokes::{trace_stokes_lines, EndStatus, Rect, StokesLine, TraceConfig};

use std::fmt;

use rug::Float;
use serde::Serialize;

use crate::algebra::quad::{integrate_segment, QuadConfig};
use crate::algebra::roots::complex_roots;
use crate::algebra::{AlgebraError, BigComplex, GaussianRational, RatFunc};
use crate::perturbative::ODESpec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SingulantError {
    #[error("branches collide near z = {0} (turning point)")]
    TurningPoint(String),
    #[error("singulant equation has no χ′ dependence")]
    Degenerate,
    #[error("χ′ is not integrable at the base point")]
    NonIntegrable,
    #[error("Stokes-line corrector diverged near z = {0}")]
    CorrectorDiverged(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingulantEquation {
    /// `coeffs[i]` multiplies `(χ′)ⁱ`.
    pub coeffs: Vec<RatFunc>,
}

impl SingulantEquation {
    pub fn from_spec(spec: &ODESpec) -> Self {
        let coeffs = spec
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, p)| if i % 2 == 1 { p.scale(&GaussianRational::from_int(-1)) } else { p.clone() })
            .collect();
        SingulantEquation { coeffs }
    }

    pub fn from_coeffs(coeffs: Vec<RatFunc>) -> Self {
        SingulantEquation { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
    }

    pub fn coeffs_at(&self, z: &BigComplex) -> Result<Vec<BigComplex>, AlgebraError> {
        self.coeffs.iter().map(|c| c.eval_complex(z)).collect()
    }

    pub fn residual(&self, z: &BigComplex, chip: &BigComplex) -> Result<BigComplex, AlgebraError> {
        let cs = self.coeffs_at(z)?;
        Ok(crate::algebra::series::horner(&cs, chip))
    }

    /// All χ′ at `z`.
    pub fn roots_at(&self, z: &BigComplex) -> Result<Vec<BigComplex>, SingulantError> {
        let cs = self.coeffs_at(z)?;
        let n = cs.iter().rposition(|c| !c.is_zero()).ok_or(SingulantError::Degenerate)?;
        if n == 0 {
            return Err(SingulantError::Degenerate);
        }
        Ok(match n {
            1 => vec![-(&cs[0] / &cs[1])],
            2 => {
                let disc = (&(&cs[1] * &cs[1]) - &(&cs[0] * &cs[2]).scale(4)).sqrt();
                let two_a = cs[2].scale(2);
                vec![(&(-cs[1].clone()) + &disc) / &two_a, (&(-cs[1].clone()) - &disc) / &two_a]
            }
            _ => complex_roots(&cs[..=n])?,
        })
    }

    /// The root at `z` nearest to `guess`, with the distance to the next
    /// nearest root (infinite for a single root).
    pub fn root_near(&self, z: &BigComplex, guess: &BigComplex) -> Result<(BigComplex, f64), SingulantError> {
        let roots = self.roots_at(z)?;
        let mut d: Vec<(f64, usize)> = roots.iter().enumerate().map(|(k, r)| (r.dist_f64(guess), k)).collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0));
        let sep = if roots.len() > 1 { roots[d[1].1].dist_f64(&roots[d[0].1]) } else { f64::INFINITY };
        Ok((roots[d[0].1].clone(), sep))
    }
}

impl fmt::Display for SingulantEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let var = match i {
                0 => String::new(),
                1 => "χ′".to_string(),
                _ => format!("(χ′)^{i}"),
            };
            let s = c.to_string();
            let (neg, body) = match s.strip_prefix('-') {
                Some(rest) if !rest.contains(['+', '-']) => (true, rest.to_string()),
                _ => (false, s),
            };
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            let body = if body.contains(['+', '-']) && !var.is_empty() { format!("({body})") } else { body };
            match (body.as_str(), var.is_empty()) {
                ("1", false) => write!(f, "{var}")?,
                (_, true) => write!(f, "{body}")?,
                _ => write!(f, "{body}*{var}")?,
            }
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        f.write_str(" = 0")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplexPath {
    pub samples: Vec<BigComplex>,
    /// Number of bisections inserted by the continuation.
    pub refinements: usize,
}

impl ComplexPath {
    pub fn new(samples: Vec<BigComplex>) -> Self {
        ComplexPath { samples, refinements: 0 }
    }

    pub fn segment(a: &BigComplex, b: &BigComplex, n: usize) -> Self {
        let n = n.max(1);
        let d = b - a;
        ComplexPath::new((0..=n).map(|k| a + &(&d * &BigComplex::from_f64(k as f64 / n as f64, 0.0, a.prec()))).collect())
    }

    /// Straight legs through `points`, subdivided so no step exceeds `max_step`.
    pub fn polyline(points: &[BigComplex], max_step: f64) -> Self {
        let mut out = vec![points[0].clone()];
        for w in points.windows(2) {
            let n = (w[0].dist_f64(&w[1]) / max_step).ceil().max(1.0) as usize;
            out.extend(ComplexPath::segment(&w[0], &w[1], n).samples.into_iter().skip(1));
        }
        ComplexPath::new(out)
    }

    /// Closed counterclockwise circle starting at `center + radius·e^(i·start)`.
    pub fn circle(center: &BigComplex, radius: f64, start: f64, n: usize) -> Self {
        let prec = center.prec();
        let mut out: Vec<BigComplex> = (0..n)
            .map(|k| {
                let th = Float::with_val(prec, start + std::f64::consts::TAU * k as f64 / n as f64);
                center + &BigComplex::cis(&th).scale_f64(radius)
            })
            .collect();
        out.push(out[0].clone());
        ComplexPath::new(out)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn max_step(&self) -> f64 {
        self.samples.windows(2).map(|w| w[0].dist_f64(&w[1])).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RootTracks {
    pub path: ComplexPath,
    /// `tracks[b][k]` is branch b at `path.samples[k]`.
    pub tracks: Vec<Vec<BigComplex>>,
}

const MAX_BISECT: usize = 40;

fn try_step(eq: &SingulantEquation, prev: &[BigComplex], z: &BigComplex) -> Result<Option<Vec<BigComplex>>, SingulantError> {
    let roots = eq.roots_at(z)?;
    if roots.len() != prev.len() {
        return Err(SingulantError::Degenerate);
    }
    let sep = if prev.len() < 2 {
        f64::INFINITY
    } else {
        let mut m = f64::INFINITY;
        for i in 0..prev.len() {
            for j in i + 1..prev.len() {
                m = m.min(prev[i].dist_f64(&prev[j]));
            }
        }
        m
    };
    let mut used = vec![false; roots.len()];
    let mut next = Vec::with_capacity(prev.len());
    for p in prev {
        let (k, d) = roots
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, r)| (k, r.dist_f64(p)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if d > sep / 3.0 {
            return Ok(None);
        }
        used[k] = true;
        next.push(roots[k].clone());
    }
    Ok(Some(next))
}

/// Continues all χ′ branches along `path`, bisecting steps so that no
/// branch moves by more than a third of the current branch separation.
pub fn continue_roots(eq: &SingulantEquation, path: &ComplexPath, start: &[BigComplex]) -> Result<RootTracks, SingulantError> {
    let prec = path.samples[0].prec();
    let collide = crate::algebra::pow2_neg(prec as f64 / 4.0);
    let mut z = path.samples[0].clone();
    let mut cur = start.to_vec();
    let mut samples = vec![z.clone()];
    let mut tracks: Vec<Vec<BigComplex>> = cur.iter().map(|r| vec![r.clone()]).collect();
    let mut refinements = 0;
    for target in path.samples.iter().skip(1) {
        let mut pending = vec![target.clone()];
        while let Some(t) = pending.last().cloned() {
            match try_step(eq, &cur, &t)? {
                Some(next) => {
                    pending.pop();
                    z = t;
                    samples.push(z.clone());
                    for (tr, r) in tracks.iter_mut().zip(&next) {
                        tr.push(r.clone());
                    }
                    cur = next;
                }
                None => {
                    let mid = (&z + &t).div_i64(2);
                    let scale = cur.iter().map(|r| r.abs_f64()).fold(1.0, f64::max);
                    let sep = cur.windows(2).map(|w| w[0].dist_f64(&w[1])).fold(f64::INFINITY, f64::min);
                    if pending.len() > MAX_BISECT || sep < collide * scale {
                        return Err(SingulantError::TurningPoint(mid.to_string_digits(10)));
                    }
                    refinements += 1;
                    pending.push(mid);
                }
            }
        }
    }
    Ok(RootTracks { path: ComplexPath { samples, refinements }, tracks })
}

#[derive(Clone, Debug, Serialize)]
pub struct SingulantBranch {
    pub id: usize,
    pub z_star: BigComplex,
    pub path: ComplexPath,
    pub chiprime: Vec<BigComplex>,
    pub chi: Vec<BigComplex>,
    /// Zero order of χ at z★ (0 when χ(z★) ≠ 0).
    pub gamma: u32,
    /// Leading coefficient of `χ ≈ X₁(z − z★)^γ`.
    pub x1: BigComplex,
    pub error: f64,
}

impl SingulantBranch {
    pub fn chi_end(&self) -> &BigComplex {
        self.chi.last().unwrap()
    }
}

/// `∫_a^b χ′` for the branch passing through `(a, ca)` and `(b, cb)`.
pub fn integrate_chiprime(
    eq: &SingulantEquation,
    a: &BigComplex,
    ca: &BigComplex,
    b: &BigComplex,
    cb: &BigComplex,
    cfg: &QuadConfig,
) -> Result<(BigComplex, f64), SingulantError> {
    let d = b - a;
    let inv = d.recip();
    let slope = cb - ca;
    let mut failure = None;
    let r = integrate_segment(a, b, cfg, |w| {
        let t = (w - a) * &inv;
        let guess = ca + &(&slope * &t);
        match eq.root_near(w, &guess) {
            Ok((r, _)) => Ok(r),
            Err(e) => {
                failure = Some(e);
                Err(AlgebraError::NoConvergence)
            }
        }
    });
    match (r, failure) {
        (Ok(r), _) => Ok((r.value, r.error)),
        (Err(_), Some(e)) => Err(e),
        (Err(AlgebraError::QuadratureFailed(_)), None) => Err(SingulantError::NonIntegrable),
        (Err(e), None) => Err(e.into()),
    }
}

/// χ along a continued track with `χ(path start) = chi0`.
pub fn integrate_singulant(
    eq: &SingulantEquation,
    tracks: &RootTracks,
    branch: usize,
    chi0: &BigComplex,
    cfg: &QuadConfig,
) -> Result<SingulantBranch, SingulantError> {
    let path = &tracks.path;
    let track = &tracks.tracks[branch];
    let prec = chi0.prec();
    let mut chi = vec![chi0.clone()];
    let mut err = 0.0;
    for k in 1..path.len() {
        let (v, e) = integrate_chiprime(eq, &path.samples[k - 1], &track[k - 1], &path.samples[k], &track[k], cfg)?;
        err += e;
        let next = &chi[k - 1] + &v;
        chi.push(next);
    }
    let z_star = path.samples[0].clone();
    let (gamma, x1) = if !chi0.is_zero() || path.len() < 2 {
        (0, chi0.clone())
    } else {
        // log|χ| slope over two tiny radii along the first step
        let dir = &path.samples[1] - &z_star;
        let r1 = BigComplex::from_f64(1e-6, 0.0, prec);
        let z1 = &z_star + &(&dir * &r1);
        let z2 = &z_star + &(&dir * &r1.div_i64(2));
        let g1 = &track[0] + &(&(&track[1] - &track[0]) * &r1);
        let g2 = &track[0] + &(&(&track[1] - &track[0]) * &r1.div_i64(2));
        let (c1, _) = eq.root_near(&z1, &g1)?;
        let (c2, _) = eq.root_near(&z2, &g2)?;
        let (x1v, _) = integrate_chiprime(eq, &z_star, &track[0], &z1, &c1, cfg)?;
        let (x2v, _) = integrate_chiprime(eq, &z_star, &track[0], &z2, &c2, cfg)?;
        let slope = (x1v.abs_f64() / x2v.abs_f64()).log2();
        let gamma = slope.round().max(1.0) as u32;
        let x1 = &x1v / &(&z1 - &z_star).powi(gamma as i64);
        (gamma, x1)
    };
    Ok(SingulantBranch {
        id: branch,
        z_star,
        path: path.clone(),
        chiprime: track.clone(),
        chi,
        gamma,
        x1,
        error: err,
    })
}

/// Continues the branch of χ′ that leaves `z_star` along `path` behaving as
/// `start` there, then integrates χ with `χ(z★) = chi0`. When roots
/// coincide at `z_star`, the branch is selected on the first step by the
/// root nearest `hint` (a value of χ′ at the second path sample).
pub fn singulant_branch(
    eq: &SingulantEquation,
    path: &ComplexPath,
    hint: &BigComplex,
    chi0: &BigComplex,
    cfg: &QuadConfig,
) -> Result<SingulantBranch, SingulantError> {
    let z0 = &path.samples[0];
    let (c1, _) = eq.root_near(&path.samples[1], hint)?;
    let roots0 = eq.roots_at(z0)?;
    let start = roots0.iter().min_by(|a, b| a.dist_f64(&c1).total_cmp(&b.dist_f64(&c1))).unwrap().clone();
    // track from the second sample (where branches are separated), then prepend z★
    let rest = ComplexPath::new(path.samples[1..].to_vec());
    let mut all = eq.roots_at(&path.samples[1])?;
    let k = all.iter().position(|r| r.dist_f64(&c1) == 0.0).unwrap();
    all.swap(0, k);
    let tr = continue_roots(eq, &rest, &all)?;
    let mut samples = vec![z0.clone()];
    samples.extend(tr.path.samples.iter().cloned());
    let mut track = vec![start];
    track.extend(tr.tracks[0].iter().cloned());
    let full = RootTracks {
        path: ComplexPath { samples, refinements: tr.path.refinements },
        tracks: vec![track],
    };
    integrate_singulant(eq, &full, 0, chi0, cfg)
}
