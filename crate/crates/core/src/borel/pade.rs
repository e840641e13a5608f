use serde::Serialize;

use crate::algebra::roots::{cluster_roots, complex_roots};
use crate::algebra::series::horner;
use crate::algebra::{linalg, AlgebraError, BigComplex};

use super::BorelError;

#[derive(Clone, Debug, Serialize)]
pub struct PadePole {
    pub location: BigComplex,
    /// Leading Laurent coefficient `A` in `A/(w−c)^m`; the residue when m = 1.
    pub residue: BigComplex,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PadeApproximant {
    pub num: Vec<BigComplex>,
    /// Normalized so that `den[0] = 1`.
    pub den: Vec<BigComplex>,
    pub l: usize,
    pub m: usize,
    pub poles: Vec<PadePole>,
}

/// Relative radius within which denominator roots are merged into one pole.
pub const POLE_CLUSTER_RADIUS: f64 = 1e-6;

impl PadeApproximant {
    pub fn eval(&self, w: &BigComplex) -> BigComplex {
        horner(&self.num, w) / horner(&self.den, w)
    }

    pub fn prec(&self) -> u32 {
        self.den[0].prec()
    }

    /// Taylor coefficients of num/den up to `len` terms.
    pub fn taylor(&self, len: usize) -> Vec<BigComplex> {
        crate::algebra::series::series_div(&self.num, &self.den, len)
    }
}

fn coeff(c: &[BigComplex], k: isize, prec: u32) -> BigComplex {
    if k < 0 || k as usize >= c.len() {
        BigComplex::zero(prec)
    } else {
        c[k as usize].clone()
    }
}

fn find_poles(num: &[BigComplex], den: &[BigComplex]) -> Result<Vec<PadePole>, AlgebraError> {
    if den.len() <= 1 || den[1..].iter().all(|c| c.is_zero()) {
        return Ok(Vec::new());
    }
    let roots = complex_roots(den)?;
    let lead = den.iter().rev().find(|c| !c.is_zero()).unwrap().clone();
    let clusters = cluster_roots(&roots, POLE_CLUSTER_RADIUS);
    let mut poles = Vec::with_capacity(clusters.len());
    for (c, m) in &clusters {
        // den = lead·(w−c)^m·Π_rest(w−r)
        let mut rest = lead.clone();
        for r in &roots {
            if r.dist_f64(c) >= POLE_CLUSTER_RADIUS * c.abs_f64().max(1.0) {
                rest = &rest * &(c - r);
            }
        }
        let residue = horner(num, c) / rest;
        poles.push(PadePole { location: c.clone(), residue, multiplicity: *m });
    }
    poles.sort_by(|a, b| a.location.abs_f64().total_cmp(&b.location.abs_f64()));
    Ok(poles)
}

/// `[L/M]` Padé approximant of the germ `Σ cₖ wᵏ` via the Toeplitz system.
pub fn pade(c: &[BigComplex], l: usize, m: usize) -> Result<PadeApproximant, BorelError> {
    if l + m + 1 > c.len() {
        return Err(BorelError::TooFewCoefficients { needed: l + m + 1, available: c.len() });
    }
    let prec = c[0].prec();
    let mut den = vec![BigComplex::one(prec)];
    if m > 0 {
        let a: Vec<Vec<BigComplex>> = (0..m)
            .map(|r| (1..=m).map(|j| coeff(c, (l + 1 + r) as isize - j as isize, prec)).collect())
            .collect();
        let b: Vec<BigComplex> = (0..m).map(|r| -c[l + 1 + r].clone()).collect();
        let q = linalg::solve(&a, &b).map_err(|e| match e {
            AlgebraError::Singular { rank, .. } => BorelError::SingularPade { l, m, rank },
            other => other.into(),
        })?;
        den.extend(q);
    }
    let num: Vec<BigComplex> = (0..=l)
        .map(|i| {
            let mut acc = BigComplex::zero(prec);
            for (j, qj) in den.iter().enumerate().take(i.min(m) + 1) {
                acc += qj * &c[i - j];
            }
            acc
        })
        .collect();
    let poles = find_poles(&num, &den)?;
    Ok(PadeApproximant { num, den, l, m, poles })
}

/// Like [`pade`], but steps down along the diagonal `(L−1, M−1)` when the
/// Toeplitz system is numerically singular.
pub fn pade_robust(c: &[BigComplex], l: usize, m: usize) -> Result<PadeApproximant, BorelError> {
    let (mut l, mut m) = (l, m);
    loop {
        match pade(c, l, m) {
            Err(BorelError::SingularPade { .. }) if m > 0 => {
                m -= 1;
                l = l.saturating_sub(1);
            }
            other => return other,
        }
    }
}

/// Padé of the local expansion `Σ aᵢ tⁱ` about a singularity, near-diagonal.
pub fn pade_about_singularity(a: &[BigComplex]) -> Result<PadeApproximant, BorelError> {
    if a.len() < 8 {
        return Err(BorelError::TooFewCoefficients { needed: 8, available: a.len() });
    }
    let m = a.len() / 2;
    let l = a.len() - 1 - m;
    pade_robust(a, l, m)
}
