//! Classification of Padé pole clouds into isolated poles and branch cuts.
//!
//! The branch-cut rule is a heuristic: Padé approximants mimic a cut by a
//! string of poles along a ray, denser towards the branch point.

use serde::Serialize;

use crate::algebra::BigComplex;

use super::pade::{PadeApproximant, PadePole};

#[derive(Clone, Debug, Serialize)]
pub struct StabilityConfig {
    /// Relative distance a pole may move between the two orders.
    pub pole_tol: f64,
    /// Poles whose |residue| is below this fraction of the largest one are
    /// treated as Froissart doublets.
    pub residue_floor: f64,
    /// Maximal angular spread (radians) of a pole string.
    pub string_angle: f64,
    pub string_min: usize,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig { pole_tol: 1e-8, residue_floor: 1e-12, string_angle: 0.05, string_min: 4 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularityKind {
    IsolatedPole,
    BranchCutHead,
    Unresolved,
}

#[derive(Clone, Debug, Serialize)]
pub struct BorelSingularity {
    pub chi: BigComplex,
    pub kind: SingularityKind,
    /// Power-law order; the pole multiplicity for isolated poles.
    pub order: Option<BigComplex>,
    /// Nearest-to-origin pole of a string (equal to `chi` otherwise).
    pub nearest_member: BigComplex,
    pub support: Vec<PadePole>,
}

fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

/// Accumulation point of a string from its first three members: a quadratic
/// through their positions `t₁, t₂, t₃` (as a function of index) is
/// extrapolated to its vertex, where the spacing would shrink to zero.
fn refine_head(members: &[&PadePole]) -> BigComplex {
    let first = &members[0].location;
    if members.len() < 3 {
        return first.clone();
    }
    let prec = first.prec();
    let dir = {
        let d = &members[members.len() - 1].location - first;
        let a = d.abs();
        d.scale_real(&a.recip())
    };
    let proj = |p: &BigComplex| (p * &dir.conj()).re().to_f64();
    let t: Vec<f64> = members[..3].iter().map(|m| proj(&m.location)).collect();
    let a = (t[2] - 2.0 * t[1] + t[0]) / 2.0;
    let b = t[1] - t[0] - 3.0 * a;
    if a <= 0.0 {
        return first.clone();
    }
    // t(k) = a k² + b k + c with t(1) = t₀; vertex at k* = −b/(2a)
    let k = -b / (2.0 * a);
    if !(0.0..1.0).contains(&k) {
        return first.clone();
    }
    let tv = t[0] + a * (k * k - 1.0) + b * (k - 1.0);
    let off = first - &dir.scale_f64(proj(first));
    &off + &dir.scale_f64(tv).with_prec(prec)
}

/// Checks that the gaps between consecutive members do not shrink outwards
/// (20% slack for numerical jitter).
fn monotone_gaps(members: &[&PadePole]) -> bool {
    let gaps: Vec<f64> = members.windows(2).map(|w| w[0].location.dist_f64(&w[1].location)).collect();
    gaps.windows(2).all(|g| g[1] >= 0.8 * g[0])
}

fn stable_in(p: &PadePole, other: &PadeApproximant, tol: f64) -> bool {
    other.poles.iter().any(|q| {
        q.multiplicity == p.multiplicity && q.location.dist_f64(&p.location) <= tol * p.location.abs_f64().max(1.0)
    })
}

/// Reports poles of `p` that are stable against the higher-order `check`
/// approximant, with pole strings collapsed to a branch-cut head.
pub fn detect_singularities(p: &PadeApproximant, check: &PadeApproximant, cfg: &StabilityConfig) -> Vec<BorelSingularity> {
    let rmax = p.poles.iter().map(|q| q.residue.abs_f64()).fold(0.0, f64::max);
    let live: Vec<&PadePole> = p.poles.iter().filter(|q| q.residue.abs_f64() > cfg.residue_floor * rmax).collect();
    let args: Vec<f64> = live.iter().map(|q| q.location.arg().to_f64()).collect();
    let mut in_string = vec![false; live.len()];
    let mut out = Vec::new();
    // live is sorted by modulus; grow a string from each unassigned pole
    for i in 0..live.len() {
        if in_string[i] {
            continue;
        }
        let idx: Vec<usize> =
            (i..live.len()).filter(|&j| !in_string[j] && angle_diff(args[j], args[i]) <= cfg.string_angle).collect();
        // drop a leading member separated from the rest by a shrinking gap,
        // then keep the longest prefix whose gaps grow outwards
        let mut start = 0;
        if idx.len() >= 3 {
            let g0 = live[idx[0]].location.dist_f64(&live[idx[1]].location);
            let g1 = live[idx[1]].location.dist_f64(&live[idx[2]].location);
            if g1 < 0.8 * g0 {
                start = 1;
            }
        }
        let mut end = (start + 2).min(idx.len());
        while end < idx.len() {
            let m: Vec<&PadePole> = idx[start..=end].iter().map(|&j| live[j]).collect();
            if !monotone_gaps(&m) {
                break;
            }
            end += 1;
        }
        if end - start >= cfg.string_min {
            let members: Vec<&PadePole> = idx[start..end].iter().map(|&j| live[j]).collect();
            for &j in &idx[start..end] {
                in_string[j] = true;
            }
            // the outer part of a string already reported extends it
            let head_arg = members[0].location.arg().to_f64();
            if let Some(prev) = out.iter_mut().find(|s: &&mut BorelSingularity| {
                s.kind == SingularityKind::BranchCutHead
                    && angle_diff(s.chi.arg().to_f64(), head_arg) <= cfg.string_angle
                    && s.support.last().unwrap().location.abs_f64() < members[0].location.abs_f64()
            }) {
                prev.support.extend(members.into_iter().cloned());
                continue;
            }
            out.push(BorelSingularity {
                chi: refine_head(&members),
                kind: SingularityKind::BranchCutHead,
                order: None,
                nearest_member: members[0].location.clone(),
                support: members.into_iter().cloned().collect(),
            });
        }
    }
    for (j, q) in live.iter().enumerate() {
        if in_string[j] {
            continue;
        }
        let stable = stable_in(q, check, cfg.pole_tol);
        let prec = q.location.prec();
        out.push(BorelSingularity {
            chi: q.location.clone(),
            kind: if stable { SingularityKind::IsolatedPole } else { SingularityKind::Unresolved },
            order: stable.then(|| BigComplex::from_i64(q.multiplicity as i64, prec)),
            nearest_member: q.location.clone(),
            support: vec![(*q).clone()],
        });
    }
    out.sort_by(|a, b| a.chi.abs_f64().total_cmp(&b.chi.abs_f64()));
    out
}

/// Only the singularities that survived the stability test.
pub fn stable_singularities(all: &[BorelSingularity]) -> Vec<&BorelSingularity> {
    all.iter().filter(|s| s.kind != SingularityKind::Unresolved).collect()
}

/// Power-law order α at a dominant singularity χ from a log-log slope of
/// `|uₙ χⁿ| ∼ |A| n^(α−1)` over the last half of the germ.
pub fn estimate_order(u: &[BigComplex], chi: &BigComplex) -> Option<f64> {
    let n = u.len();
    if n < 8 {
        return None;
    }
    let lc = chi.abs_f64().ln();
    let pts: Vec<(f64, f64)> = (n / 2..n)
        .filter(|&k| k > 0 && !u[k].is_zero())
        .map(|k| ((k as f64).ln(), u[k].abs().ln().to_f64() + k as f64 * lc))
        .collect();
    if pts.len() < 4 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2)));
    Some(num / den + 1.0)
}

/// Row of a pole-cloud export.
#[derive(Clone, Debug, Serialize)]
pub struct PoleRow {
    pub re: f64,
    pub im: f64,
    pub residue_abs: f64,
    pub classification: &'static str,
}

pub fn pole_rows(p: &PadeApproximant, found: &[BorelSingularity]) -> Vec<PoleRow> {
    p.poles
        .iter()
        .map(|q| {
            let hit = found.iter().find(|s| s.support.iter().any(|m| m.location.dist_f64(&q.location) == 0.0));
            let classification = match hit.map(|s| s.kind) {
                Some(SingularityKind::IsolatedPole) => "isolated-pole",
                Some(SingularityKind::BranchCutHead) => "branch-cut",
                Some(SingularityKind::Unresolved) => "unresolved",
                None => "froissart",
            };
            let (re, im) = q.location.to_f64();
            PoleRow { re, im, residue_abs: q.residue.abs_f64(), classification }
        })
        .collect()
}
