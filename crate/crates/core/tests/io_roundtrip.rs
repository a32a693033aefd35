mod common;

use common::*;
use proptest::prelude::*;
use ris_core::capacity::BudgetMode;
use ris_core::channel::ChannelSpec;
use ris_core::config::{parse_scenario_str, to_config_string};
use ris_core::designs::DesignKind;
use ris_core::experiments::{run_scenario, write_csvs, ScenarioConfig, SnrReference};
use ris_core::matrix_io::{read_link, read_matrix, write_link, write_matrix};
use ris_core::ComplexMatrix;

fn scenario() -> impl Strategy<Value = ScenarioConfig> {
    (
        (
            1usize..64,
            1usize..64,
            1usize..64,
            1usize..200,
            1usize..200,
            any::<bool>(),
        ),
        (-20.0f64..30.0, any::<u64>(), 1usize..500),
        prop::collection::btree_set(0usize..8, 1..=8),
        prop::collection::btree_set(-400i32..400, 1..12),
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(
            |((n_tx, n_rx, n_ris, ph, pg, los), (db, seed, n), designs, grid, per_antenna, per_design)| {
                ScenarioConfig {
                    name: format!("case_{seed}"),
                    channel: ChannelSpec {
                        n_tx,
                        n_rx,
                        n_ris,
                        n_paths_h: ph,
                        n_paths_g: pg,
                        los,
                        los_power_ratio_db: db,
                        seed,
                    },
                    designs: designs.into_iter().map(|i| DesignKind::ALL[i]).collect(),
                    n_realizations: n,
                    snr_grid_db: grid.into_iter().map(|s| s as f64 / 8.0).collect(),
                    budget_mode: if per_antenna {
                        BudgetMode::PerAntenna
                    } else {
                        BudgetMode::PerSymbolTotal
                    },
                    snr_reference: if per_design {
                        SnrReference::PerDesign
                    } else {
                        SnrReference::Shared
                    },
                }
            },
        )
}

proptest! {
    #[test]
    fn matrix_files_round_trip_exactly(rows in 1usize..=7, cols in 1usize..=7, seed in any::<u64>(), scale in -300i32..300) {
        let m = random_matrix(rows, cols, &mut rng(seed)).scale_real(10f64.powi(scale));
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m).unwrap();
        prop_assert_eq!(read_matrix(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn link_files_round_trip(n in 1usize..=5, seed in any::<u64>()) {
        let mut r = rng(seed);
        let (h, g) = (random_matrix(n, n + 1, &mut r), random_matrix(n + 2, n, &mut r));
        let mut buf = Vec::new();
        write_link(&mut buf, &h, &g).unwrap();
        let (h2, g2) = read_link(buf.as_slice()).unwrap();
        prop_assert_eq!((h2, g2), (h, g));
    }

    #[test]
    fn config_echo_round_trips(cfg in scenario()) {
        prop_assert!(cfg.validate().is_ok());
        let text = to_config_string(&cfg);
        prop_assert_eq!(parse_scenario_str(&text).unwrap(), cfg);
    }
}

#[test]
fn identity_matrix_file_layout() {
    let mut buf = Vec::new();
    write_matrix(&mut buf, &ComplexMatrix::identity(2)).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap(),
        "2 2\n1e0 0e0\n0e0 0e0\n0e0 0e0\n1e0 0e0\n"
    );
}

#[test]
fn csv_headers_and_row_counts() {
    let cfg = ScenarioConfig {
        name: "csv".into(),
        channel: ChannelSpec::symmetric(4, 2, true, 8),
        designs: vec![DesignKind::Rand, DesignKind::OptDiag, DesignKind::Identity],
        n_realizations: 5,
        snr_grid_db: vec![-10.0, 0.0, 10.0, 20.0],
        budget_mode: BudgetMode::PerAntenna,
        snr_reference: SnrReference::PerDesign,
    };
    let res = run_scenario(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_csvs(&res, dir.path()).unwrap();
    let read = |name: &str| std::fs::read_to_string(dir.path().join(name)).unwrap();
    let expect = [
        ("power.csv", "realization,design,sigma2_f", 3 * 5),
        ("capacity.csv", "design,snr_db,capacity_bits", 3 * 4),
        ("eigs.csv", "design,index,mean_eigenvalue", 3 * 4),
        (
            "summary.csv",
            "design,mean_sigma2_f,std_sigma2_f,capacity_low_snr_bits,capacity_high_snr_bits,dominant_eig_share",
            3,
        ),
    ];
    for (name, header, rows) in expect {
        let text = read(name);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(header), "{name}");
        assert_eq!(lines.count(), rows, "{name}");
    }
    let power = read("power.csv");
    let first: Vec<&str> = power.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&first[..2], ["0", "RAND"]);
    let reparsed: f64 = first[2].parse().unwrap();
    assert_eq!(reparsed, res.design(DesignKind::Rand).unwrap().power_samples[0]);
}
