//! Hermitian eigendecomposition.
//!
//! The full spectrum comes from cyclic complex Jacobi rotations. Jacobi is
//! slower than tridiagonal QL for large `n` but every matrix in this crate is
//! at most a few dozen rows (the dense Kronecker oracle tops out at 64), and
//! Jacobi gives small residuals even for clustered or repeated eigenvalues.
//!
//! [`dominant_eigpair`] is a power-iteration fast path for the top pair of a
//! positive semidefinite matrix.

use super::{inner, vec_norm, Complex, ComplexMatrix, ComplexVector, LinalgError, Result};

/// Relative symmetry tolerance accepted on input, scaled by `‖A‖_F`.
const HERMITIAN_TOL: f64 = 1e-9;
const MAX_SWEEPS: usize = 100;
/// Entries at or below this modulus do not fix the eigenvector phase.
const PHASE_PIVOT_EPS: f64 = 1e-12;

pub const DEFAULT_POWER_TOL: f64 = 1e-10;
pub const DEFAULT_POWER_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    /// Sorted non-increasing.
    pub eigenvalues: Vec<f64>,
    /// Column `j` is the unit eigenvector for `eigenvalues[j]`.
    pub eigenvectors: ComplexMatrix,
}

impl EigenResult {
    pub fn vector(&self, j: usize) -> ComplexVector {
        self.eigenvectors.column(j)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominantPair {
    pub value: f64,
    pub vector: ComplexVector,
    pub iterations: usize,
    pub residual: f64,
}

/// Rotates `v` so its first entry with modulus above 1e-12 is real and
/// non-negative. Applying it twice is a no-op.
pub fn normalize_phase(v: &mut [Complex]) {
    let Some(idx) = v.iter().position(|z| z.norm() > PHASE_PIVOT_EPS) else {
        return;
    };
    let pivot = v[idx];
    let r = pivot.norm();
    if pivot.im == 0.0 && pivot.re > 0.0 {
        return;
    }
    let rot = pivot.conj() / r;
    for z in v.iter_mut() {
        *z *= rot;
    }
    v[idx] = Complex::new(r, 0.0);
}

fn check_hermitian(a: &ComplexMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(LinalgError::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let norm = a.frobenius_norm();
    let tolerance = HERMITIAN_TOL * norm;
    let asymmetry = a.hermitian_asymmetry();
    if asymmetry > tolerance {
        return Err(LinalgError::NotHermitian { asymmetry, tolerance });
    }
    Ok(norm)
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<EigenResult> {
    let norm = check_hermitian(a)?;
    let n = a.rows();

    // Work on the exactly Hermitian part.
    let mut w = ComplexMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    for i in 0..n {
        w[(i, i)].im = 0.0;
    }
    let mut v = ComplexMatrix::identity(n);

    if norm > 0.0 && n > 1 {
        jacobi_sweeps(&mut w, &mut v, norm)?;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[(j, j)].re.total_cmp(&w[(i, i)].re).then(i.cmp(&j)));

    let eigenvalues = order.iter().map(|&i| w[(i, i)].re).collect();
    let mut eigenvectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        let len = vec_norm(&col);
        for z in col.iter_mut() {
            *z /= len;
        }
        normalize_phase(&mut col);
        for (i, z) in col.into_iter().enumerate() {
            eigenvectors[(i, dst)] = z;
        }
    }
    Ok(EigenResult {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(w: &ComplexMatrix) -> f64 {
    let n = w.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += w[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi_sweeps(w: &mut ComplexMatrix, v: &mut ComplexMatrix, norm: f64) -> Result<()> {
    let n = w.rows();
    let stop = 4.0 * f64::EPSILON * norm;
    for sweep in 0..MAX_SWEEPS {
        if off_diagonal_norm(w) <= stop {
            return Ok(());
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = w[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let app = w[(p, p)].re;
                let aqq = w[(q, q)].re;
                // Late sweeps: drop entries that no longer perturb the diagonal.
                if sweep > 3 && app.abs() + 100.0 * mag == app.abs() && aqq.abs() + 100.0 * mag == aqq.abs() {
                    w[(p, q)] = Complex::new(0.0, 0.0);
                    w[(q, p)] = Complex::new(0.0, 0.0);
                    continue;
                }
                rotate(w, v, p, q, apq, mag, app, aqq);
            }
        }
    }
    if off_diagonal_norm(w) <= stop {
        Ok(())
    } else {
        Err(LinalgError::NoConvergence { iterations: MAX_SWEEPS })
    }
}

#[allow(clippy::too_many_arguments)]
fn rotate(
    w: &mut ComplexMatrix,
    v: &mut ComplexMatrix,
    p: usize,
    q: usize,
    apq: Complex,
    mag: f64,
    app: f64,
    aqq: f64,
) {
    let n = w.rows();
    let e = apq / mag;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let e_conj = e.conj();

    // Columns: W ← W U with U[p,p]=c, U[p,q]=s, U[q,p]=−s·ē, U[q,q]=c·ē.
    for k in 0..n {
        let wkp = w[(k, p)];
        let wkq = w[(k, q)];
        w[(k, p)] = wkp * c - wkq * e_conj * s;
        w[(k, q)] = wkp * s + wkq * e_conj * c;
    }
    // Rows: W ← U† W.
    for k in 0..n {
        let wpk = w[(p, k)];
        let wqk = w[(q, k)];
        w[(p, k)] = wpk * c - wqk * e * s;
        w[(q, k)] = wpk * s + wqk * e * c;
    }
    w[(p, q)] = Complex::new(0.0, 0.0);
    w[(q, p)] = Complex::new(0.0, 0.0);
    w[(p, p)] = Complex::new(app - t * mag, 0.0);
    w[(q, q)] = Complex::new(aqq + t * mag, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * e_conj * s;
        v[(k, q)] = vkp * s + vkq * e_conj * c;
    }
}

/// Power iteration with the default tolerance and iteration cap.
pub fn dominant_eigpair(a: &ComplexMatrix) -> Result<DominantPair> {
    dominant_eigpair_with(a, DEFAULT_POWER_TOL, DEFAULT_POWER_MAX_ITER)
}

/// Power iteration for the largest eigenpair of a Hermitian PSD matrix.
///
/// Stops once `‖A v − λ v‖ ≤ tol·‖A‖_F`. When the cap is hit the last iterate
/// comes back inside [`LinalgError::PowerIterationStalled`] so the caller can
/// fall back to [`hermitian_eig`].
pub fn dominant_eigpair_with(a: &ComplexMatrix, tol: f64, max_iter: usize) -> Result<DominantPair> {
    let norm = check_hermitian(a)?;
    let n = a.rows();
    let bound = tol * norm;

    let mut v = start_vector(n);
    let mut restarted = false;
    let mut last = DominantPair {
        value: 0.0,
        vector: v.clone(),
        iterations: 0,
        residual: f64::INFINITY,
    };
    for it in 1..=max_iter {
        let w = a.mat_vec(&v)?;
        let lambda = inner(&v, &w).re;
        let residual = w
            .iter()
            .zip(&v)
            .map(|(wi, vi)| (wi - vi * lambda).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let mut vector = v.clone();
        normalize_phase(&mut vector);
        last = DominantPair {
            value: lambda,
            vector,
            iterations: it,
            residual,
        };
        let len = vec_norm(&w);
        if len <= bound && norm > 0.0 && !restarted {
            // Start vector (nearly) in the null space of a nonzero matrix:
            // restart from the basis vector with the largest diagonal entry.
            restarted = true;
            let pivot = (0..n)
                .max_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re))
                .unwrap_or(0);
            v = vec![Complex::new(0.0, 0.0); n];
            v[pivot] = Complex::new(1.0, 0.0);
            continue;
        }
        if residual <= bound || len == 0.0 {
            return Ok(last);
        }
        v = w.into_iter().map(|z| z / len).collect();
    }
    Err(LinalgError::PowerIterationStalled(Box::new(last)))
}

fn start_vector(n: usize) -> ComplexVector {
    // Fixed, irregular, dense start so results are reproducible.
    let v: ComplexVector = (0..n)
        .map(|k| {
            let k = k as f64;
            Complex::new(1.0 + (k * 0.618_033_988_7).fract(), (k * 0.414_213_562_4).fract() - 0.5)
        })
        .collect();
    let len = vec_norm(&v);
    v.into_iter().map(|z| z / len).collect()
}
