//! Singular values by one-sided (Hestenes) Jacobi.
//!
//! Small singular values come out with high relative accuracy, which the rank
//! checks on channel matrices and rank-1 designs depend on. Going through the
//! eigenvalues of `A†A` would square the condition number.

use super::{Complex, ComplexMatrix, LinalgError, Result};

const MAX_SWEEPS: usize = 80;

/// Singular values of `a`, sorted non-increasing, `min(rows, cols)` of them.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let work = if a.rows() >= a.cols() { a.clone() } else { a.adjoint() };
    let (m, n) = work.shape();
    // Column-major copy so columns are contiguous.
    let mut cols: Vec<Vec<Complex>> = (0..n).map(|j| work.column(j)).collect();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let mag = gamma.norm();
                if mag == 0.0 || mag <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let e_conj = (gamma / mag).conj();
                let zeta = (beta - alpha) / (2.0 * mag);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let (xp, yq) = (*x, *y);
                    *x = xp * c - yq * e_conj * s;
                    *y = xp * s + yq * e_conj * c;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence { iterations: MAX_SWEEPS });
    }
    debug_assert!(m >= n);
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}
