//! Small dense complex linear algebra at working precision.

use super::{pow2_neg, AlgebraError, BigComplex};

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
///
/// A pivot smaller than `2^(−prec/2)` times the largest entry is treated as
/// a rank deficiency.
pub fn solve(a: &[Vec<BigComplex>], b: &[BigComplex]) -> Result<Vec<BigComplex>, AlgebraError> {
    let n = b.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let prec = b[0].prec();
    let mut m: Vec<Vec<BigComplex>> = a.to_vec();
    let mut rhs = b.to_vec();
    let scale = m.iter().flatten().map(|x| x.abs_f64()).fold(0.0, f64::max);
    let thresh = scale * pow2_neg(prec as f64 / 2.0);
    for col in 0..n {
        let (piv, best) = (col..n)
            .map(|r| (r, m[r][col].abs_f64()))
            .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= thresh || best == 0.0 {
            return Err(AlgebraError::Singular { rank: col, size: n });
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        let inv = m[col][col].recip();
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] * &inv;
            for c in col..n {
                let t = &f * &m[col][c];
                m[r][c] -= t;
            }
            let t = &f * &rhs[col];
            rhs[r] -= t;
        }
    }
    let mut x = vec![BigComplex::zero(prec); n];
    for r in (0..n).rev() {
        let mut acc = rhs[r].clone();
        for c in r + 1..n {
            acc -= &m[r][c] * &x[c];
        }
        x[r] = acc / &m[r][r];
    }
    Ok(x)
}

/// Least-squares solution of the overdetermined `A x ≈ b` (rows ≥ columns),
/// via modified Gram–Schmidt QR with one reorthogonalization pass.
pub fn least_squares(a: &[Vec<BigComplex>], b: &[BigComplex]) -> Result<Vec<BigComplex>, AlgebraError> {
    let rows = a.len();
    let cols = a.first().map(|r| r.len()).unwrap_or(0);
    if cols == 0 {
        return Ok(Vec::new());
    }
    let prec = b[0].prec();
    let mut q: Vec<Vec<BigComplex>> = (0..cols).map(|j| (0..rows).map(|i| a[i][j].clone()).collect()).collect();
    let mut r = vec![vec![BigComplex::zero(prec); cols]; cols];
    let dot = |u: &[BigComplex], v: &[BigComplex]| {
        let mut acc = BigComplex::zero(prec);
        for (x, y) in u.iter().zip(v) {
            acc += &x.conj() * y;
        }
        acc
    };
    let col_scale = q.iter().map(|c| c.iter().map(|x| x.abs_f64()).fold(0.0, f64::max)).fold(0.0, f64::max);
    for j in 0..cols {
        for _pass in 0..2 {
            for k in 0..j {
                let proj = dot(&q[k], &q[j]);
                for i in 0..rows {
                    let t = &proj * &q[k][i];
                    q[j][i] -= t;
                }
                r[k][j] += proj;
            }
        }
        let nrm = dot(&q[j], &q[j]).re().clone().sqrt();
        if nrm.to_f64() <= col_scale * pow2_neg(prec as f64 / 2.0) {
            return Err(AlgebraError::Singular { rank: j, size: cols });
        }
        let nrm_c = BigComplex::from_real(&nrm);
        for i in 0..rows {
            q[j][i] = &q[j][i] / &nrm_c;
        }
        r[j][j] = nrm_c;
    }
    let qtb: Vec<BigComplex> = (0..cols).map(|j| dot(&q[j], b)).collect();
    let mut x = vec![BigComplex::zero(prec); cols];
    for i in (0..cols).rev() {
        let mut acc = qtb[i].clone();
        for k in i + 1..cols {
            acc -= &r[i][k] * &x[k];
        }
        x[i] = acc / &r[i][i];
    }
    Ok(x)
}
