//! RIS matrix designs.
//!
//! Every design returned here satisfies `tr(Φ†Φ) = n_ris`. The optimized
//! designs maximize `tr(F†F)` with `F = GΦH`:
//!
//! * diagonal Φ: `tr(F†F) = φ†Kφ` with `K[j,i] = (g_j†g_i)(h_i†h_j)`, so the
//!   optimum is `√n · u_K` for the dominant eigenvector `u_K`;
//! * general Φ: `tr(F†F) = ψ†Mψ` with `ψ = vec(Φ)` and
//!   `M = (H*Hᵀ) ⊗ (G†G)`. The dominant eigenvector of a Kronecker product of
//!   PSD factors is the Kronecker product of their dominant eigenvectors, so
//!   the optimum is the rank-1 matrix `√n · u_B u_Aᵀ` with `A = H*Hᵀ`,
//!   `B = G†G`. The dense-`M` route is kept in [`design_opt_gen_dense`] for
//!   cross-checking.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::linalg::{
    hermitian_eig, kron, kron_vec, normalize_phase, reshape, trace_gram, vec, Complex, ComplexMatrix, ComplexVector,
    LinalgError,
};
use crate::rng::RandomStream;

/// Largest relative gap tolerated between the recomputed objective and the
/// eigenvalue prediction.
const SELF_CHECK_TOL: f64 = 1e-6;
/// Entries at or below this modulus get phase 0 under [`phase_only`].
const ZERO_PHASE_EPS: f64 = 1e-14;
/// Dense `M` has `n_ris²` rows; keep the oracle to small surfaces.
pub const DENSE_ORACLE_MAX_RIS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DesignError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("phase-only conversion needs an OPT-DIAG or OPT-GEN design, got {0}")]
    WrongKind(DesignKind),
    #[error("{kind}: objective {achieved:e} disagrees with eigenvalue prediction {predicted:e}")]
    SelfCheck {
        kind: DesignKind,
        achieved: f64,
        predicted: f64,
    },
    #[error("unknown design name {0:?}")]
    UnknownKind(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, DesignError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DesignKind {
    Rand,
    RandPhase,
    LcPhase,
    OptDiag,
    OptGen,
    OptDiagPhase,
    OptGenPhase,
    /// `Φ = I`, the plain `GH` reference.
    Identity,
}

impl DesignKind {
    pub const ALL: [DesignKind; 8] = [
        DesignKind::Rand,
        DesignKind::RandPhase,
        DesignKind::LcPhase,
        DesignKind::OptDiag,
        DesignKind::OptGen,
        DesignKind::OptDiagPhase,
        DesignKind::OptGenPhase,
        DesignKind::Identity,
    ];

    pub fn label(self) -> &'static str {
        match self {
            DesignKind::Rand => "RAND",
            DesignKind::RandPhase => "RAND-PH",
            DesignKind::LcPhase => "LC-PH",
            DesignKind::OptDiag => "OPT-DIAG",
            DesignKind::OptGen => "OPT-GEN",
            DesignKind::OptDiagPhase => "OPT-DIAG-PH",
            DesignKind::OptGenPhase => "OPT-GEN-PH",
            DesignKind::Identity => "GH",
        }
    }

    pub fn is_diagonal(self) -> bool {
        !matches!(self, DesignKind::OptGen | DesignKind::OptGenPhase)
    }
}

impl fmt::Display for DesignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for DesignKind {
    type Err = DesignError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim();
        DesignKind::ALL
            .into_iter()
            .find(|k| k.label().eq_ignore_ascii_case(key))
            .or_else(|| match key.to_ascii_uppercase().as_str() {
                "IDENTITY" => Some(DesignKind::Identity),
                "OPT" => Some(DesignKind::OptDiag),
                "OPT-PH" => Some(DesignKind::OptDiagPhase),
                _ => None,
            })
            .ok_or_else(|| DesignError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DesignFlags {
    /// LC-PH elements whose `h_i` or `g_i` had zero norm; their phase is 0.
    pub degenerate_elements: Vec<usize>,
    /// Entries mapped to phase 0 by the phase-only conversion.
    pub zero_phase_entries: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RisDesign {
    pub kind: DesignKind,
    pub phi: ComplexMatrix,
    pub diagonal: bool,
    /// `tr(F†F)` on the realization the design was built for.
    pub achieved_trace_objective: f64,
    pub flags: DesignFlags,
}

impl RisDesign {
    pub fn n_ris(&self) -> usize {
        self.phi.rows()
    }

    /// Relative deviation of `tr(Φ†Φ)` from `n_ris`.
    pub fn constraint_error(&self) -> f64 {
        let n = self.n_ris() as f64;
        (trace_gram(&self.phi).unwrap_or(f64::INFINITY) - n).abs() / n
    }
}

/// Hermitian PSD matrix of the diagonal-design quadratic form.
#[derive(Debug, Clone, PartialEq)]
pub struct KMatrix(pub ComplexMatrix);

impl KMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }
}

fn check_link(h: &ComplexMatrix, g: &ComplexMatrix) -> Result<usize> {
    let n = h.rows();
    if g.cols() != n {
        return Err(DesignError::DimensionMismatch(format!(
            "H is {}x{} but G is {}x{}; RIS sizes differ",
            h.rows(),
            h.cols(),
            g.rows(),
            g.cols()
        )));
    }
    Ok(n)
}

/// `F = G Φ H`.
pub fn compose_f(g: &ComplexMatrix, phi: &ComplexMatrix, h: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(g.matmul(phi)?.matmul(h)?)
}

/// `K[j,i] = (g_j† g_i)(h_i† h_j)` where `g_i` is column `i` of G and `h_i†`
/// is row `i` of H.
pub fn build_k(h: &ComplexMatrix, g: &ComplexMatrix) -> Result<KMatrix> {
    let n = check_link(h, g)?;
    let gg = g.gram();
    // (HH†)[i,j] = h_i† h_j.
    let hh = h.adjoint().gram();
    let mut k = ComplexMatrix::from_fn(n, n, |j, i| gg[(j, i)] * hh[(i, j)]);
    for i in 0..n {
        k[(i, i)].im = 0.0;
    }
    Ok(KMatrix(k))
}

/// Kronecker factors `(A, B) = (H*Hᵀ, G†G)` of the general-design matrix.
pub fn general_factors(h: &ComplexMatrix, g: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    check_link(h, g)?;
    // H*Hᵀ = conj(H H†) = (Hᵀ)† Hᵀ.
    let a = h.transpose().gram();
    let b = g.gram();
    Ok((a, b))
}

/// Explicit `M = (H*Hᵀ) ⊗ (G†G)`.
pub fn build_m(h: &ComplexMatrix, g: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (a, b) = general_factors(h, g)?;
    Ok(kron(&a, &b)?)
}

fn finish(
    kind: DesignKind,
    phi: ComplexMatrix,
    h: &ComplexMatrix,
    g: &ComplexMatrix,
    flags: DesignFlags,
    predicted: Option<f64>,
) -> Result<RisDesign> {
    let achieved = trace_gram(&compose_f(g, &phi, h)?)?;
    if let Some(predicted) = predicted {
        let scale = achieved.abs().max(predicted.abs());
        if scale > 0.0 && (achieved - predicted).abs() > SELF_CHECK_TOL * scale {
            return Err(DesignError::SelfCheck {
                kind,
                achieved,
                predicted,
            });
        }
    }
    Ok(RisDesign {
        kind,
        diagonal: kind.is_diagonal(),
        phi,
        achieved_trace_objective: achieved,
        flags,
    })
}

/// `Φ = diag(√n · u_K)`.
pub fn design_opt_diag(h: &ComplexMatrix, g: &ComplexMatrix) -> Result<RisDesign> {
    let n = check_link(h, g)?;
    let k = build_k(h, g)?;
    let eig = hermitian_eig(k.matrix())?;
    let scale = (n as f64).sqrt();
    let phi: ComplexVector = eig.vector(0).into_iter().map(|z| z * scale).collect();
    let predicted = n as f64 * eig.eigenvalues[0];
    finish(
        DesignKind::OptDiag,
        ComplexMatrix::from_diag(&phi),
        h,
        g,
        DesignFlags::default(),
        Some(predicted),
    )
}

/// Rank-1 general optimum `√n · u_B u_Aᵀ` from the Kronecker factors.
pub fn design_opt_gen(h: &ComplexMatrix, g: &ComplexMatrix) -> Result<RisDesign> {
    let n = check_link(h, g)?;
    let (a, b) = general_factors(h, g)?;
    let ea = hermitian_eig(&a)?;
    let eb = hermitian_eig(&b)?;
    let mut psi = kron_vec(&ea.vector(0), &eb.vector(0));
    normalize_phase(&mut psi);
    let phi = reshape(&psi, n, n)?.scale_real((n as f64).sqrt());
    let predicted = n as f64 * ea.eigenvalues[0] * eb.eigenvalues[0];
    finish(DesignKind::OptGen, phi, h, g, DesignFlags::default(), Some(predicted))
}

/// General optimum through the explicit `n² × n²` matrix `M`.
pub fn design_opt_gen_dense(h: &ComplexMatrix, g: &ComplexMatrix) -> Result<RisDesign> {
    let n = check_link(h, g)?;
    if n > DENSE_ORACLE_MAX_RIS {
        return Err(DesignError::DimensionMismatch(format!(
            "dense general design limited to n_ris <= {DENSE_ORACLE_MAX_RIS}, got {n}"
        )));
    }
    let m = build_m(h, g)?;
    let eig = hermitian_eig(&m)?;
    let phi = reshape(&eig.vector(0), n, n)?.scale_real((n as f64).sqrt());
    let predicted = n as f64 * eig.eigenvalues[0];
    finish(DesignKind::OptGen, phi, h, g, DesignFlags::default(), Some(predicted))
}

/// `arccos(Re(ṽ† v) / (‖v‖‖ṽ‖))` with `ṽ` the entrywise moduli; `None` for a
/// zero vector.
fn lc_angle(v: impl Iterator<Item = Complex> + Clone) -> Option<f64> {
    let norm_sq: f64 = v.clone().map(|z| z.norm_sqr()).sum();
    if norm_sq == 0.0 {
        return None;
    }
    // ‖ṽ‖ = ‖v‖, and Re(ṽ†v) = Σ |v_k| Re(v_k).
    let real_part: f64 = v.map(|z| z.norm() * z.re).sum();
    Some((real_part / norm_sq).clamp(-1.0, 1.0).acos())
}

/// Closed-form low-complexity phase-only diagonal design.
pub fn design_lc_phase(h: &ComplexMatrix, g: &ComplexMatrix) -> Result<RisDesign> {
    let n = check_link(h, g)?;
    let mut flags = DesignFlags::default();
    let mut diag = Vec::with_capacity(n);
    for i in 0..n {
        // h_i is the conjugate of row i; the arccos argument only sees Re(·),
        // which is the same for h_i and its conjugate.
        let phi_h = lc_angle(h.row(i).iter().map(|z| z.conj()));
        let phi_g = lc_angle((0..g.rows()).map(|r| g[(r, i)]));
        let phase = match (phi_h, phi_g) {
            (Some(a), Some(b)) => -(a + b),
            _ => {
                flags.degenerate_elements.push(i);
                0.0
            }
        };
        diag.push(Complex::from_polar(1.0, phase));
    }
    finish(DesignKind::LcPhase, ComplexMatrix::from_diag(&diag), h, g, flags, None)
}

/// Random diagonal baseline: unit-modulus phases (`amplitude_too = false`) or
/// CN(0,1) entries rescaled onto the constraint.
pub fn random_diagonal(n: usize, amplitude_too: bool, rng: &mut RandomStream) -> ComplexVector {
    if amplitude_too {
        let raw: ComplexVector = (0..n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            })
            .collect();
        let energy: f64 = raw.iter().map(|z| z.norm_sqr()).sum();
        if energy == 0.0 {
            return vec![Complex::new(1.0, 0.0); n];
        }
        let scale = (n as f64 / energy).sqrt();
        raw.into_iter().map(|z| z * scale).collect()
    } else {
        (0..n)
            .map(|_| Complex::from_polar(1.0, rng.random_range(0.0..2.0 * PI)))
            .collect()
    }
}

pub fn design_rand(
    h: &ComplexMatrix,
    g: &ComplexMatrix,
    amplitude_too: bool,
    rng: &mut RandomStream,
) -> Result<RisDesign> {
    let n = check_link(h, g)?;
    let kind = if amplitude_too {
        DesignKind::Rand
    } else {
        DesignKind::RandPhase
    };
    let diag = random_diagonal(n, amplitude_too, rng);
    finish(
        kind,
        ComplexMatrix::from_diag(&diag),
        h,
        g,
        DesignFlags::default(),
        None,
    )
}

pub fn design_identity(h: &ComplexMatrix, g: &ComplexMatrix) -> Result<RisDesign> {
    let n = check_link(h, g)?;
    finish(
        DesignKind::Identity,
        ComplexMatrix::identity(n),
        h,
        g,
        DesignFlags::default(),
        None,
    )
}

/// Keeps only the phases of an optimized design. Diagonal designs keep their
/// zero off-diagonal; general designs are rescaled by `1/√n` so the `n²`
/// unit-modulus entries meet the trace constraint.
pub fn phase_only(design: &RisDesign, h: &ComplexMatrix, g: &ComplexMatrix) -> Result<RisDesign> {
    let kind = match design.kind {
        DesignKind::OptDiag | DesignKind::OptDiagPhase => DesignKind::OptDiagPhase,
        DesignKind::OptGen | DesignKind::OptGenPhase => DesignKind::OptGenPhase,
        other => return Err(DesignError::WrongKind(other)),
    };
    let n = check_link(h, g)?;
    if design.n_ris() != n {
        return Err(DesignError::DimensionMismatch(format!(
            "design has {} elements, link has {n}",
            design.n_ris()
        )));
    }
    let mut zero_entries = 0;
    let mut to_phase = |z: Complex| {
        if z.norm() <= ZERO_PHASE_EPS {
            zero_entries += 1;
            Complex::new(1.0, 0.0)
        } else {
            z / z.norm()
        }
    };
    let phi = if kind == DesignKind::OptDiagPhase {
        let diag: ComplexVector = design.phi.diagonal().into_iter().map(&mut to_phase).collect();
        ComplexMatrix::from_diag(&diag)
    } else {
        let scale = 1.0 / (n as f64).sqrt();
        let data: ComplexVector = design.phi.as_slice().iter().map(|&z| to_phase(z) * scale).collect();
        ComplexMatrix::new(n, n, data)?
    };
    let flags = DesignFlags {
        zero_phase_entries: zero_entries,
        ..design.flags.clone()
    };
    finish(kind, phi, h, g, flags, None)
}

/// `tr(F†F)` for a diagonal design through the quadratic form `φ†Kφ`.
pub fn diagonal_objective(k: &KMatrix, phi: &[Complex]) -> Result<f64> {
    Ok(crate::linalg::quadratic_form(k.matrix(), phi)?)
}

/// `tr(F†F)` for a general design through `vec(Φ)† M vec(Φ)`.
pub fn general_objective(m: &ComplexMatrix, phi: &ComplexMatrix) -> Result<f64> {
    Ok(crate::linalg::quadratic_form(m, &vec(phi))?)
}
