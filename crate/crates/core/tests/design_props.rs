mod common;

use common::*;
use proptest::prelude::*;
use ris_core::channel::{realize, ChannelRealization, ChannelSpec};
use ris_core::designs::{
    build_k, build_m, compose_f, design_opt_diag, design_opt_gen, design_opt_gen_dense, diagonal_objective,
    general_objective, DesignKind, RisDesign,
};
use ris_core::experiments::build_designs;
use ris_core::linalg::{hermitian_eig, inner, singular_values, trace_gram, vec_norm};
use ris_core::{Complex, ComplexMatrix};

fn link(n_tx: usize, n_rx: usize, n_ris: usize, paths: usize, los: bool, seed: u64) -> ChannelRealization {
    let spec = ChannelSpec {
        n_tx,
        n_rx,
        n_ris,
        n_paths_h: paths,
        n_paths_g: paths + 1,
        los,
        los_power_ratio_db: 10.0,
        seed,
    };
    realize(&spec, 0).unwrap()
}

fn all_designs(l: &ChannelRealization, seed: u64) -> Vec<RisDesign> {
    build_designs(&DesignKind::ALL, l, seed, 0).unwrap()
}

fn dims() -> impl Strategy<Value = (usize, usize, usize, usize, bool, u64)> {
    (
        1usize..=6,
        1usize..=6,
        1usize..=8,
        1usize..=6,
        any::<bool>(),
        any::<u64>(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_design_meets_the_constraint((nt, nr, ni, p, los, seed) in dims()) {
        let l = link(nt, nr, ni, p, los, seed);
        for d in all_designs(&l, seed) {
            prop_assert_eq!(d.phi.shape(), (ni, ni));
            prop_assert!(rel(trace_gram(&d.phi).unwrap(), ni as f64) <= 1e-9, "{}", d.kind);
            prop_assert_eq!(d.diagonal, d.kind.is_diagonal());
            if d.diagonal {
                prop_assert!(d.phi.is_diagonal());
            }
            let direct = trace_gram(&compose_f(&l.g, &d.phi, &l.h).unwrap()).unwrap();
            prop_assert!(rel(direct, d.achieved_trace_objective) <= 1e-10);
        }
    }

    #[test]
    fn phase_only_designs_have_constant_modulus((nt, nr, ni, p, los, seed) in dims()) {
        let l = link(nt, nr, ni, p, los, seed);
        let general = 1.0 / (ni as f64).sqrt();
        for d in all_designs(&l, seed) {
            let expected = match d.kind {
                DesignKind::RandPhase | DesignKind::LcPhase | DesignKind::OptDiagPhase | DesignKind::Identity => 1.0,
                DesignKind::OptGenPhase => general,
                _ => continue,
            };
            for i in 0..ni {
                for j in 0..ni {
                    if d.diagonal && i != j {
                        continue;
                    }
                    prop_assert!((d.phi[(i, j)].norm() - expected).abs() <= 1e-12, "{} ({i},{j})", d.kind);
                }
            }
        }
    }

    #[test]
    fn objective_identities((nt, nr, ni, p, los, seed) in dims()) {
        let l = link(nt, nr, ni, p, los, seed);
        let mut r = rng(seed ^ 0x5eed);
        let k = build_k(&l.h, &l.g).unwrap();
        let m = build_m(&l.h, &l.g).unwrap();
        for _ in 0..5 {
            let phi = random_vector(ni, &mut r);
            let direct = trace_gram(&compose_f(&l.g, &ComplexMatrix::from_diag(&phi), &l.h).unwrap()).unwrap();
            prop_assert!(rel(diagonal_objective(&k, &phi).unwrap(), direct) <= 1e-10);
            let general = random_matrix(ni, ni, &mut r);
            let direct = trace_gram(&compose_f(&l.g, &general, &l.h).unwrap()).unwrap();
            prop_assert!(rel(general_objective(&m, &general).unwrap(), direct) <= 1e-10);
        }
    }

    #[test]
    fn dominance_chain((nt, nr, ni, p, los, seed) in dims()) {
        let l = link(nt, nr, ni, p, los, seed);
        let diag = design_opt_diag(&l.h, &l.g).unwrap();
        let gen = design_opt_gen(&l.h, &l.g).unwrap();
        let slack = 1e-10 * gen.achieved_trace_objective.max(1e-300);
        prop_assert!(gen.achieved_trace_objective >= diag.achieved_trace_objective - slack);
        for d in all_designs(&l, seed) {
            if d.diagonal {
                prop_assert!(diag.achieved_trace_objective >= d.achieved_trace_objective - slack, "{}", d.kind);
            }
            prop_assert!(gen.achieved_trace_objective >= d.achieved_trace_objective - slack, "{}", d.kind);
        }
        let mut r = rng(seed);
        for _ in 0..200 {
            let raw = random_vector(ni, &mut r);
            let s = (ni as f64).sqrt() / vec_norm(&raw);
            let phi: Vec<Complex> = raw.iter().map(|z| z * s).collect();
            let obj = trace_gram(&compose_f(&l.g, &ComplexMatrix::from_diag(&phi), &l.h).unwrap()).unwrap();
            prop_assert!(diag.achieved_trace_objective >= obj - slack);
            let general = random_matrix(ni, ni, &mut r);
            let general = general.scale_real((ni as f64 / trace_gram(&general).unwrap()).sqrt());
            let obj = trace_gram(&compose_f(&l.g, &general, &l.h).unwrap()).unwrap();
            prop_assert!(gen.achieved_trace_objective >= obj - slack);
        }
    }

    #[test]
    fn scaling_covariance((nt, nr, ni, p, los, seed) in dims(), re in 0.1f64..5.0, im in -5.0f64..5.0) {
        let l = link(nt, nr, ni, p, los, seed);
        let base = all_designs(&l, seed);
        for (c, skip_lc) in [(Complex::new(re, im), true), (Complex::new(re, 0.0), false)] {
            let mut scaled = l.clone();
            scaled.h = l.h.scale(c);
            for (a, b) in base.iter().zip(all_designs(&scaled, seed)) {
                // LC-PH reads Re(H), so only positive real factors leave it unchanged.
                if skip_lc && a.kind == DesignKind::LcPhase {
                    continue;
                }
                prop_assert!(rel(b.achieved_trace_objective, c.norm_sqr() * a.achieved_trace_objective) <= 1e-9, "{}", a.kind);
            }
        }
        let k = build_k(&l.h, &l.g).unwrap();
        let eig = hermitian_eig(&k.0).unwrap();
        let simple = ni == 1 || eig.eigenvalues[0] - eig.eigenvalues[1] > 1e-6 * eig.eigenvalues[0];
        prop_assume!(simple && eig.eigenvalues[0] > 0.0);
        let a = design_opt_diag(&l.h, &l.g).unwrap().phi.diagonal();
        let b = design_opt_diag(&l.h.scale(Complex::new(re, im)), &l.g).unwrap().phi.diagonal();
        prop_assert!(rel(inner(&a, &b).norm(), vec_norm(&a) * vec_norm(&b)) <= 1e-8);
    }

    #[test]
    fn opt_gen_is_rank_one((nt, nr, ni, p, los, seed) in dims()) {
        let l = link(nt, nr, ni, p, los, seed);
        let gen = design_opt_gen(&l.h, &l.g).unwrap();
        let sv = singular_values(&gen.phi).unwrap();
        prop_assert!(sv[1..].iter().all(|s| *s <= 1e-8 * sv[0]));
    }

    #[test]
    fn fast_path_matches_dense_oracle((nt, nr, ni, p, los, seed) in dims()) {
        let l = link(nt, nr, ni, p, los, seed);
        let fast = design_opt_gen(&l.h, &l.g).unwrap();
        let dense = design_opt_gen_dense(&l.h, &l.g).unwrap();
        prop_assert!(rel(fast.achieved_trace_objective, dense.achieved_trace_objective) <= 1e-8);
        let m = build_m(&l.h, &l.g).unwrap();
        let eig = hermitian_eig(&m).unwrap();
        let top = eig.eigenvalues[0];
        let simple = eig.eigenvalues.len() == 1 || top - eig.eigenvalues[1] > 1e-6 * top;
        prop_assume!(simple && top > 0.0);
        prop_assert!(max_abs_diff(fast.phi.as_slice(), dense.phi.as_slice()) <= 1e-7);
    }
}

#[test]
fn random_designs_do_not_depend_on_other_kinds() {
    let l = link(5, 4, 6, 3, false, 11);
    let full = all_designs(&l, 11);
    let only = build_designs(&[DesignKind::Rand, DesignKind::RandPhase], &l, 11, 0).unwrap();
    assert_eq!(full[0], only[0]);
    assert_eq!(full[1], only[1]);
    let next = build_designs(&[DesignKind::Rand], &l, 11, 1).unwrap();
    assert_ne!(full[0].phi, next[0].phi);
}
