use super::{pow2_neg, AlgebraError, BigComplex, Poly};

const MAX_ITER: usize = 2000;

/// Roots of an exact polynomial with multiplicities.
///
/// The square-free factorization is taken exactly first, so multiplicities
/// are exact; each factor is then solved by Aberth iteration.
pub fn poly_roots(p: &Poly, prec: u32) -> Result<Vec<(BigComplex, usize)>, AlgebraError> {
    if p.is_zero() {
        return Err(AlgebraError::ZeroPolynomial);
    }
    let mut out = Vec::new();
    for (mult, factor) in squarefree(p) {
        for r in complex_roots(&factor.to_complex_coeffs(prec))? {
            out.push((r, mult));
        }
    }
    Ok(out)
}

/// Yun's square-free decomposition: pairs `(multiplicity, factor)`.
pub fn squarefree(p: &Poly) -> Vec<(usize, Poly)> {
    let mut out = Vec::new();
    if p.is_constant() {
        return out;
    }
    let dp = p.derivative();
    let a = Poly::gcd(p, &dp);
    let mut b = p.exact_div(&a);
    let mut c = dp.exact_div(&a);
    let mut d = &c - &b.derivative();
    let mut i = 1;
    while !b.is_constant() {
        let ai = Poly::gcd(&b, &d);
        b = b.exact_div(&ai);
        c = d.exact_div(&ai);
        d = &c - &b.derivative();
        if !ai.is_constant() {
            out.push((i, ai));
        }
        i += 1;
    }
    out
}

/// Simple roots of a polynomial with complex coefficients (ascending order),
/// refined at the precision of the leading coefficient.
pub fn complex_roots(coeffs: &[BigComplex]) -> Result<Vec<BigComplex>, AlgebraError> {
    let mut c = coeffs.to_vec();
    while c.last().is_some_and(|x| x.is_zero()) {
        c.pop();
    }
    if c.is_empty() {
        return Err(AlgebraError::ZeroPolynomial);
    }
    let prec = c.iter().map(|x| x.prec()).min().unwrap();
    // Roots at the origin are peeled off exactly.
    let zeros = c.iter().position(|x| !x.is_zero()).unwrap();
    let c = c[zeros..].to_vec();
    let deg = c.len() - 1;
    let mut roots = vec![BigComplex::zero(prec); zeros];
    if deg == 0 {
        return Ok(roots);
    }
    if deg == 1 {
        roots.push(-(&c[0] / &c[1]));
        return Ok(roots);
    }
    let low: Vec<BigComplex> = c.iter().map(|x| x.with_prec(64)).collect();
    let start = initial_guesses(&low);
    let coarse = aberth(&low, start, 64, false)?;
    let start = coarse.into_iter().map(|z| z.with_prec(prec)).collect();
    roots.extend(aberth(&c, start, prec, true)?);
    Ok(roots)
}

fn initial_guesses(c: &[BigComplex]) -> Vec<BigComplex> {
    let deg = c.len() - 1;
    let prec = c[0].prec();
    let lead = c[deg].abs_f64();
    // Geometric mean style radius from the constant term, bounded by Cauchy.
    let r0 = (c[0].abs_f64() / lead).powf(1.0 / deg as f64);
    let cauchy = 1.0 + c[..deg].iter().map(|x| x.abs_f64() / lead).fold(0.0, f64::max);
    let r = if r0.is_finite() && r0 > 0.0 { r0.min(cauchy) } else { 1.0 };
    (0..deg)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / deg as f64 + 0.4;
            BigComplex::from_f64(r * th.cos(), r * th.sin(), prec)
        })
        .collect()
}

fn eval_with_deriv(c: &[BigComplex], z: &BigComplex) -> (BigComplex, BigComplex) {
    let prec = z.prec();
    let mut p = BigComplex::zero(prec);
    let mut dp = BigComplex::zero(prec);
    for a in c.iter().rev() {
        dp = &(&dp * z) + &p;
        p = &(&p * z) + a;
    }
    (p, dp)
}

fn abs_poly(c: &[f64], r: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * r + a)
}

fn aberth(
    c: &[BigComplex],
    mut z: Vec<BigComplex>,
    prec: u32,
    strict: bool,
) -> Result<Vec<BigComplex>, AlgebraError> {
    let n = z.len();
    let tol = pow2_neg(prec as f64 - 8.0);
    // |p(z)| below the evaluation rounding bound: z is as good as it gets
    let noise = 4.0 * n as f64 * pow2_neg(prec as f64 - 4.0);
    let abs_c: Vec<f64> = c.iter().map(|x| x.abs_f64()).collect();
    let mut done = vec![false; n];
    for _ in 0..MAX_ITER {
        let mut all_done = true;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (p, dp) = eval_with_deriv(c, &z[k]);
            if p.is_zero() || p.abs_f64() <= noise * abs_poly(&abs_c, z[k].abs_f64()) {
                done[k] = true;
                continue;
            }
            let ratio = &p / &dp;
            let mut s = BigComplex::zero(prec);
            for j in 0..n {
                if j != k {
                    s += (&z[k] - &z[j]).recip();
                }
            }
            let denom = BigComplex::one(prec) - &ratio * &s;
            let step = &ratio / &denom;
            if !step.is_finite() {
                // Perturb a root that landed on top of another.
                z[k] += BigComplex::from_f64(1e-3, 1e-3, prec);
                all_done = false;
                continue;
            }
            z[k] -= &step;
            let scale = z[k].abs_f64().max(1e-300);
            if step.abs_f64() <= tol * scale.max(1e-3) {
                done[k] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            return Ok(z);
        }
    }
    if strict {
        Err(AlgebraError::NoConvergence)
    } else {
        Ok(z)
    }
}

/// Groups numerically coincident roots within `radius` (relative to
/// `max(1, |r|)`), returning cluster centroids with counts.
pub fn cluster_roots(roots: &[BigComplex], radius: f64) -> Vec<(BigComplex, usize)> {
    let mut used = vec![false; roots.len()];
    let mut out = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut members = vec![i];
        let mut grew = true;
        while grew {
            grew = false;
            for j in 0..roots.len() {
                if used[j] {
                    continue;
                }
                if members.iter().any(|&m| {
                    roots[m].dist_f64(&roots[j]) < radius * roots[m].abs_f64().max(1.0)
                }) {
                    used[j] = true;
                    members.push(j);
                    grew = true;
                }
            }
        }
        let prec = roots[i].prec();
        let mut sum = BigComplex::zero(prec);
        for &m in &members {
            sum += &roots[m];
        }
        out.push((sum.div_i64(members.len() as i64), members.len()));
    }
    out
}
