//! Built-in invariant suite run by `ris-sim verify`.
//!
//! Checks run on a seeded small instance with fixed tolerances; each check
//! reports pass/fail with the worst observed deviation.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::capacity::{eigenprofile, waterfill, ChannelEigenprofile};
use crate::channel::{realize, ChannelSpec};
use crate::designs::{
    build_k, build_m, compose_f, design_opt_diag, design_opt_gen, design_opt_gen_dense, diagonal_objective,
    general_objective, random_diagonal, DesignKind, DENSE_ORACLE_MAX_RIS,
};
use crate::experiments::build_designs;
use crate::linalg::{singular_values, trace_gram, Complex, ComplexMatrix, ComplexVector};
use crate::rng::{substream, StreamTag};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, worst: f64, tol: f64) -> Self {
        Self {
            name,
            passed: worst <= tol,
            detail: format!("worst {worst:.3e} (tolerance {tol:.0e})"),
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Largest violation of the waterfilling KKT conditions, relative to the
/// water level, plus the relative budget error.
pub fn kkt_violation(profile: &ChannelEigenprofile, powers: &[f64], water_level: f64, budget: f64) -> f64 {
    let mut worst = (powers.iter().sum::<f64>() - budget).abs() / budget;
    for (&p, &l) in powers.iter().zip(&profile.eigenvalues) {
        if p < 0.0 {
            return f64::INFINITY;
        }
        if l <= 0.0 {
            if p > 0.0 {
                return f64::INFINITY;
            }
            continue;
        }
        let inv = 1.0 / l;
        if p > 0.0 {
            worst = worst.max((p + inv - water_level).abs() / water_level);
        } else if inv < water_level {
            worst = worst.max((water_level - inv) / water_level);
        }
    }
    worst
}

fn random_unit_diag(n: usize, rng: &mut crate::rng::RandomStream) -> ComplexVector {
    random_diagonal(n, true, rng)
}

fn random_general(n: usize, rng: &mut crate::rng::RandomStream) -> ComplexMatrix {
    let m = ComplexMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex::new(re, im)
    });
    let scale = (n as f64 / trace_gram(&m).unwrap_or(1.0)).sqrt();
    m.scale_real(scale)
}

/// Runs the suite on `realizations` draws of an `n`-element symmetric link.
pub fn run_invariant_suite(n: usize, realizations: usize, seed: u64) -> Vec<CheckOutcome> {
    let spec = ChannelSpec::symmetric(n, (n / 2).max(1), false, seed);
    let mut constraint: f64 = 0.0;
    let mut dominance: f64 = 0.0;
    let mut k_identity: f64 = 0.0;
    let mut m_identity: f64 = 0.0;
    let mut dense_match: f64 = 0.0;
    let mut trace_identity: f64 = 0.0;
    let mut rank_one: f64 = 0.0;
    let mut failures = Vec::new();

    for r in 0..realizations {
        let link = match realize(&spec, r as u64) {
            Ok(l) => l,
            Err(e) => {
                failures.push(format!("realization {r}: {e}"));
                continue;
            }
        };
        let (h, g) = (&link.h, &link.g);
        let outcome = (|| -> Result<(), String> {
            let designs = build_designs(&DesignKind::ALL, &link, seed, r).map_err(|(k, e)| format!("{k}: {e}"))?;
            for d in &designs {
                constraint = constraint.max(d.constraint_error());
                let f = compose_f(g, &d.phi, h).map_err(|e| e.to_string())?;
                let profile = eigenprofile(&f, n).map_err(|e| e.to_string())?;
                trace_identity = trace_identity.max(rel(profile.total(), trace_gram(&f).unwrap_or(f64::NAN)));
            }
            let diag = design_opt_diag(h, g).map_err(|e| e.to_string())?;
            let gen = design_opt_gen(h, g).map_err(|e| e.to_string())?;
            let k = build_k(h, g).map_err(|e| e.to_string())?;
            let mut rng = substream(seed, r as u64, StreamTag::Verify);
            let mut best_random: f64 = 0.0;
            for _ in 0..1000 {
                let phi = random_unit_diag(n, &mut rng);
                let direct = trace_gram(&compose_f(g, &ComplexMatrix::from_diag(&phi), h).map_err(|e| e.to_string())?)
                    .map_err(|e| e.to_string())?;
                let quad = diagonal_objective(&k, &phi).map_err(|e| e.to_string())?;
                k_identity = k_identity.max(rel(direct, quad));
                best_random = best_random.max(direct);
            }
            let slack = 1e-10 * gen.achieved_trace_objective;
            dominance = dominance
                .max(diag.achieved_trace_objective - gen.achieved_trace_objective - slack)
                .max(best_random - diag.achieved_trace_objective - slack);

            let sv = singular_values(&gen.phi).map_err(|e| e.to_string())?;
            if n > 1 {
                rank_one = rank_one.max(sv[1] / sv[0]);
            }

            if n <= DENSE_ORACLE_MAX_RIS {
                let m = build_m(h, g).map_err(|e| e.to_string())?;
                for _ in 0..20 {
                    let phi = random_general(n, &mut rng);
                    let direct = trace_gram(&compose_f(g, &phi, h).map_err(|e| e.to_string())?).unwrap_or(f64::NAN);
                    let quad = general_objective(&m, &phi).map_err(|e| e.to_string())?;
                    m_identity = m_identity.max(rel(direct, quad));
                }
                let dense = design_opt_gen_dense(h, g).map_err(|e| e.to_string())?;
                dense_match = dense_match.max(rel(dense.achieved_trace_objective, gen.achieved_trace_objective));
            }
            Ok(())
        })();
        if let Err(e) = outcome {
            failures.push(format!("realization {r}: {e}"));
        }
    }

    let mut rng = substream(seed, 0, StreamTag::Verify);
    let mut kkt: f64 = 0.0;
    for _ in 0..100 {
        let len = rng.random_range(1..=12);
        let eigs: Vec<f64> = (0..len)
            .map(|_| {
                if rng.random_bool(0.2) {
                    0.0
                } else {
                    rng.random_range(0.0..10.0f64).powi(2)
                }
            })
            .collect();
        let profile = ChannelEigenprofile::from_eigenvalues(eigs, len);
        let budget = 10f64.powf(rng.random_range(-3.0..3.0));
        match waterfill(&profile, budget) {
            Ok(w) if w.all_zero => {}
            Ok(w) => kkt = kkt.max(kkt_violation(&profile, &w.powers, w.water_level, budget)),
            Err(_) => kkt = f64::INFINITY,
        }
    }

    let mut out = vec![
        CheckOutcome::new("trace constraint on every design", constraint, 1e-9),
        CheckOutcome::new(
            "dominance OPT-GEN >= OPT-DIAG >= random diagonal",
            dominance.max(0.0),
            0.0,
        ),
        CheckOutcome::new("diagonal objective identity phi'K phi", k_identity, 1e-10),
        CheckOutcome::new("eigenvalue sum equals tr(F'F)", trace_identity, 1e-10),
        CheckOutcome::new("OPT-GEN has rank one", rank_one, 1e-8),
        CheckOutcome::new("waterfilling KKT conditions", kkt, 1e-9),
    ];
    if n <= DENSE_ORACLE_MAX_RIS {
        out.push(CheckOutcome::new(
            "general objective identity psi'M psi",
            m_identity,
            1e-10,
        ));
        out.push(CheckOutcome::new(
            "OPT-GEN fast path matches dense M",
            dense_match,
            1e-8,
        ));
    }
    out.push(CheckOutcome {
        name: "no construction failures",
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            "none".into()
        } else {
            failures.join("; ")
        },
    });
    out
}
