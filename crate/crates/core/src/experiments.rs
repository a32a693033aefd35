//! Monte Carlo harness: channel power, capacity-vs-SNR and sorted eigenvalue
//! profiles for a set of RIS designs over seeded channel realizations.
//!
//! A run has two passes. The first draws every realization, builds each
//! design and records `σ²_F = tr(F†F)` and the eigenvalues of `F†F`. The
//! second fixes the SNR reference `E[σ²_F]` from those samples and sweeps the
//! SNR grid with waterfilling. Realizations are independent and may run in
//! parallel; every reduction runs in realization order, so results are
//! bit-identical for a fixed configuration whatever the thread count.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::capacity::{eigenprofile, snr_to_power, waterfill, BudgetMode, CapacityError, ChannelEigenprofile};
use crate::channel::{realize, ChannelError, ChannelRealization, ChannelSpec};
use crate::designs::{
    compose_f, design_identity, design_lc_phase, design_opt_diag, design_opt_gen, design_rand, phase_only, DesignError,
    DesignKind, RisDesign,
};
use crate::linalg::trace_gram;
use crate::parallel::{map_indices, ExecutionMode};
use crate::rng::{substream, StreamTag};

pub const DEFAULT_REALIZATIONS: usize = 100;
pub const DEFAULT_SEED: u64 = 20_210_601;
/// Elements on a 6-inch critically spaced aperture at 28 GHz.
pub const ELEMENTS_6_INCH: usize = 29;
/// Elements on a 9-inch aperture at 28 GHz.
pub const ELEMENTS_9_INCH: usize = 43;
pub const SPARSE_PATHS: usize = 10;
pub const RICH_PATHS: usize = 100;
pub const LOW_SNR_DB: f64 = -10.0;
pub const HIGH_SNR_DB: f64 = 30.0;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
    #[error("realization {realization}: {source}")]
    Channel {
        realization: usize,
        #[source]
        source: ChannelError,
    },
    #[error("realization {realization}, design {design}: {source}")]
    Design {
        realization: usize,
        design: DesignKind,
        #[source]
        source: DesignError,
    },
    #[error("realization {realization}, design {design}: {source}")]
    Capacity {
        realization: usize,
        design: DesignKind,
        #[source]
        source: CapacityError,
    },
    #[error("design {design}: {source}")]
    SnrMapping {
        design: DesignKind,
        #[source]
        source: CapacityError,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

/// Which `E[σ²_F]` sets the SNR axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnrReference {
    /// Each design's own mean channel power.
    #[default]
    PerDesign,
    /// One axis for every design: the mean channel power of the
    /// unconfigured surface (`Φ = I`), independent of the design set.
    Shared,
}

impl SnrReference {
    pub fn name(self) -> &'static str {
        match self {
            SnrReference::PerDesign => "per_design",
            SnrReference::Shared => "shared",
        }
    }
}

impl fmt::Display for SnrReference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SnrReference {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "per_design" => Ok(SnrReference::PerDesign),
            "shared" => Ok(SnrReference::Shared),
            other => Err(format!("unknown SNR reference {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    /// `channel.seed` is the base seed of the run.
    pub channel: ChannelSpec,
    /// Sorted, without duplicates.
    pub designs: Vec<DesignKind>,
    pub n_realizations: usize,
    pub snr_grid_db: Vec<f64>,
    pub budget_mode: BudgetMode,
    pub snr_reference: SnrReference,
}

impl ScenarioConfig {
    pub fn base_seed(&self) -> u64 {
        self.channel.seed
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() || self.name.contains(['/', '\\']) {
            return Err(ExperimentError::InvalidConfig(format!(
                "bad scenario name {:?}",
                self.name
            )));
        }
        self.channel
            .validate()
            .map_err(|e| ExperimentError::InvalidConfig(e.to_string()))?;
        if self.n_realizations == 0 {
            return Err(ExperimentError::InvalidConfig(
                "n_realizations must be at least 1".into(),
            ));
        }
        if self.designs.is_empty() {
            return Err(ExperimentError::InvalidConfig("no designs requested".into()));
        }
        if self.designs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ExperimentError::InvalidConfig(
                "design list must be sorted and unique".into(),
            ));
        }
        if self.snr_grid_db.is_empty() {
            return Err(ExperimentError::InvalidConfig("SNR grid is empty".into()));
        }
        if self.snr_grid_db.iter().any(|s| !s.is_finite()) || self.snr_grid_db.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ExperimentError::InvalidConfig(
                "SNR grid must be finite and strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

/// `start, start + step, …` up to and including `stop`.
pub fn snr_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0 && stop >= start);
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

pub fn default_snr_grid() -> Vec<f64> {
    snr_grid(-20.0, 30.0, 2.5)
}

/// The six reference scenarios: {NLoS, LoS+NLoS} × {10, 100 paths} with
/// 29-element arrays, and LoS+NLoS with a 43-element surface.
pub fn preset_scenarios() -> Vec<ScenarioConfig> {
    let make = |name: &str, n_ris: usize, n_paths: usize, los: bool| ScenarioConfig {
        name: name.to_string(),
        channel: ChannelSpec {
            n_ris,
            ..ChannelSpec::symmetric(ELEMENTS_6_INCH, n_paths, los, DEFAULT_SEED)
        },
        designs: DesignKind::ALL.to_vec(),
        n_realizations: DEFAULT_REALIZATIONS,
        snr_grid_db: default_snr_grid(),
        budget_mode: BudgetMode::default(),
        snr_reference: SnrReference::default(),
    };
    vec![
        make("nlos_sparse", ELEMENTS_6_INCH, SPARSE_PATHS, false),
        make("nlos_rich", ELEMENTS_6_INCH, RICH_PATHS, false),
        make("los_sparse", ELEMENTS_6_INCH, SPARSE_PATHS, true),
        make("los_rich", ELEMENTS_6_INCH, RICH_PATHS, true),
        make("los_ris43_sparse", ELEMENTS_9_INCH, SPARSE_PATHS, true),
        make("los_ris43_rich", ELEMENTS_9_INCH, RICH_PATHS, true),
    ]
}

pub fn preset(name: &str) -> Option<ScenarioConfig> {
    preset_scenarios().into_iter().find(|p| p.name == name)
}

/// Builds every design in `kinds` for one realization. Random designs draw
/// from their own sub-streams, so the set of other designs has no effect.
pub fn build_designs(
    kinds: &[DesignKind],
    link: &ChannelRealization,
    seed: u64,
    realization: usize,
) -> std::result::Result<Vec<RisDesign>, (DesignKind, DesignError)> {
    let (h, g) = (&link.h, &link.g);
    let mut opt_diag: Option<RisDesign> = None;
    let mut opt_gen: Option<RisDesign> = None;
    let r = realization as u64;
    kinds
        .iter()
        .map(|&kind| {
            let built = match kind {
                DesignKind::Rand => design_rand(h, g, true, &mut substream(seed, r, StreamTag::RandDesign)),
                DesignKind::RandPhase => design_rand(h, g, false, &mut substream(seed, r, StreamTag::RandPhaseDesign)),
                DesignKind::LcPhase => design_lc_phase(h, g),
                DesignKind::Identity => design_identity(h, g),
                DesignKind::OptDiag | DesignKind::OptDiagPhase => {
                    if opt_diag.is_none() {
                        opt_diag = Some(design_opt_diag(h, g).map_err(|e| (kind, e))?);
                    }
                    let base = opt_diag.as_ref().expect("cached");
                    if kind == DesignKind::OptDiag {
                        Ok(base.clone())
                    } else {
                        phase_only(base, h, g)
                    }
                }
                DesignKind::OptGen | DesignKind::OptGenPhase => {
                    if opt_gen.is_none() {
                        opt_gen = Some(design_opt_gen(h, g).map_err(|e| (kind, e))?);
                    }
                    let base = opt_gen.as_ref().expect("cached");
                    if kind == DesignKind::OptGen {
                        Ok(base.clone())
                    } else {
                        phase_only(base, h, g)
                    }
                }
            };
            built.map_err(|e| (kind, e))
        })
        .collect()
}

/// Channel realization `r` of a scenario together with all of its designs.
pub fn realization_designs(cfg: &ScenarioConfig, r: usize) -> Result<(ChannelRealization, Vec<RisDesign>)> {
    let link = realize(&cfg.channel, r as u64).map_err(|source| ExperimentError::Channel { realization: r, source })?;
    let designs =
        build_designs(&cfg.designs, &link, cfg.base_seed(), r).map_err(|(design, source)| ExperimentError::Design {
            realization: r,
            design,
            source,
        })?;
    Ok((link, designs))
}

#[derive(Debug, Clone)]
struct DesignSample {
    sigma2_f: f64,
    profile: ChannelEigenprofile,
}

/// Design samples plus `tr((GH)†(GH))` for the shared SNR axis.
fn evaluate_realization(cfg: &ScenarioConfig, r: usize) -> Result<(Vec<DesignSample>, f64)> {
    let (link, designs) = realization_designs(cfg, r)?;
    let unconfigured = link
        .g
        .matmul(&link.h)
        .and_then(|f| trace_gram(&f))
        .map_err(|e| ExperimentError::Design {
            realization: r,
            design: DesignKind::Identity,
            source: e.into(),
        })?;
    let samples = designs
        .into_iter()
        .map(|d| {
            let kind = d.kind;
            let design_err = |source| ExperimentError::Design {
                realization: r,
                design: kind,
                source,
            };
            let f = compose_f(&link.g, &d.phi, &link.h).map_err(design_err)?;
            let sigma2_f = trace_gram(&f).map_err(|e| design_err(e.into()))?;
            let profile = eigenprofile(&f, cfg.channel.n_ris).map_err(|source| ExperimentError::Capacity {
                realization: r,
                design: kind,
                source,
            })?;
            Ok(DesignSample { sigma2_f, profile })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((samples, unconfigured))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult {
    /// `σ²_F` per realization.
    pub power_samples: Vec<f64>,
    pub mean_power: f64,
    /// Sample standard deviation (zero for a single realization).
    pub std_power: f64,
    /// `E[σ²_F]` used for this design's SNR axis.
    pub snr_reference_power: f64,
    /// `(snr_db, mean capacity in bits/s/Hz)` aligned with the SNR grid.
    pub capacity_curve: Vec<(f64, f64)>,
    /// Mean of the per-realization sorted eigenvalues of `F†F`.
    pub mean_sorted_eigenvalues: Vec<f64>,
}

impl DesignResult {
    /// Coefficient of variation of `σ²_F`.
    pub fn power_cv(&self) -> f64 {
        self.std_power / self.mean_power
    }

    /// `λ_1 / Σλ` of the mean eigenvalue profile.
    pub fn dominant_share(&self) -> f64 {
        let total: f64 = self.mean_sorted_eigenvalues.iter().sum();
        if total > 0.0 {
            self.mean_sorted_eigenvalues[0] / total
        } else {
            0.0
        }
    }

    /// Mean capacity at `snr_db`, linearly interpolated on the grid and
    /// clamped to its ends.
    pub fn capacity_at(&self, snr_db: f64) -> f64 {
        let curve = &self.capacity_curve;
        if snr_db <= curve[0].0 {
            return curve[0].1;
        }
        for w in curve.windows(2) {
            let ((s0, c0), (s1, c1)) = (w[0], w[1]);
            if snr_db <= s1 {
                if snr_db == s1 {
                    return c1;
                }
                return c0 + (c1 - c0) * (snr_db - s0) / (s1 - s0);
            }
        }
        curve[curve.len() - 1].1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub config: ScenarioConfig,
    pub per_design: BTreeMap<DesignKind, DesignResult>,
}

impl ScenarioResult {
    pub fn design(&self, kind: DesignKind) -> Option<&DesignResult> {
        self.per_design.get(&kind)
    }
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    run_scenario_with(cfg, ExecutionMode::default())
}

pub fn run_scenario_with(cfg: &ScenarioConfig, mode: ExecutionMode) -> Result<ScenarioResult> {
    cfg.validate()?;
    let n_real = cfg.n_realizations;
    let n_designs = cfg.designs.len();

    // Pass 1: channel power and eigenvalues per (realization, design).
    let (samples, unconfigured): (Vec<Vec<DesignSample>>, Vec<f64>) =
        map_indices(n_real, mode, |r| evaluate_realization(cfg, r))
            .into_iter()
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip();

    let power_samples: Vec<Vec<f64>> = (0..n_designs)
        .map(|d| samples.iter().map(|s| s[d].sigma2_f).collect())
        .collect();
    let mean_powers: Vec<f64> = power_samples
        .iter()
        .map(|p| p.iter().sum::<f64>() / n_real as f64)
        .collect();
    let references: Vec<f64> = match cfg.snr_reference {
        SnrReference::PerDesign => mean_powers.clone(),
        SnrReference::Shared => vec![unconfigured.iter().sum::<f64>() / n_real as f64; n_designs],
    };

    // Pass 2: waterfilling budgets per (design, SNR) and capacity per realization.
    let n_ch = cfg.channel.max_channels();
    let budgets: Vec<Vec<f64>> = cfg
        .designs
        .iter()
        .zip(&references)
        .map(|(&design, &reference)| {
            cfg.snr_grid_db
                .iter()
                .map(|&snr| snr_to_power(snr, reference, n_ch, cfg.channel.n_tx, cfg.budget_mode))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|source| ExperimentError::SnrMapping { design, source })
        })
        .collect::<Result<_>>()?;

    let capacities: Vec<Vec<Vec<f64>>> = map_indices(n_real, mode, |r| {
        cfg.designs
            .iter()
            .enumerate()
            .map(|(d, &design)| {
                budgets[d]
                    .iter()
                    .map(|&p| {
                        waterfill(&samples[r][d].profile, p)
                            .map(|w| w.capacity_bits)
                            .map_err(|source| ExperimentError::Capacity {
                                realization: r,
                                design,
                                source,
                            })
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let mut per_design = BTreeMap::new();
    for (d, &kind) in cfg.designs.iter().enumerate() {
        let mean_power = mean_powers[d];
        let std_power = sample_std(&power_samples[d], mean_power);
        let capacity_curve = cfg
            .snr_grid_db
            .iter()
            .enumerate()
            .map(|(s, &snr)| {
                let total: f64 = capacities.iter().map(|c| c[d][s]).sum();
                (snr, total / n_real as f64)
            })
            .collect();
        let n_eigs = samples[0][d].profile.eigenvalues.len();
        let mut mean_sorted_eigenvalues = vec![0.0; n_eigs];
        for s in &samples {
            for (acc, l) in mean_sorted_eigenvalues.iter_mut().zip(&s[d].profile.eigenvalues) {
                *acc += l;
            }
        }
        for acc in mean_sorted_eigenvalues.iter_mut() {
            *acc /= n_real as f64;
        }
        per_design.insert(
            kind,
            DesignResult {
                power_samples: power_samples[d].clone(),
                mean_power,
                std_power,
                snr_reference_power: references[d],
                capacity_curve,
                mean_sorted_eigenvalues,
            },
        );
    }
    Ok(ScenarioResult {
        config: cfg.clone(),
        per_design,
    })
}

fn sample_std(xs: &[f64], mean: f64) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub design: DesignKind,
    pub mean_sigma2_f: f64,
    pub std_sigma2_f: f64,
    pub capacity_low_snr: f64,
    pub capacity_high_snr: f64,
    pub dominant_share: f64,
}

pub type SummaryTable = Vec<SummaryRow>;

pub fn summarize(result: &ScenarioResult) -> SummaryTable {
    result
        .per_design
        .iter()
        .map(|(&design, r)| SummaryRow {
            design,
            mean_sigma2_f: r.mean_power,
            std_sigma2_f: r.std_power,
            capacity_low_snr: r.capacity_at(LOW_SNR_DB),
            capacity_high_snr: r.capacity_at(HIGH_SNR_DB),
            dominant_share: r.dominant_share(),
        })
        .collect()
}

pub fn format_summary(table: &SummaryTable) -> String {
    let mut out = format!(
        "{:<12} {:>14} {:>12} {:>12} {:>12} {:>10}\n",
        "design", "mean sigma2_F", "std", "C@-10dB", "C@+30dB", "l1/sum"
    );
    for row in table {
        out.push_str(&format!(
            "{:<12} {:>14.2} {:>12.2} {:>12.3} {:>12.3} {:>10.4}\n",
            row.design.label(),
            row.mean_sigma2_f,
            row.std_sigma2_f,
            row.capacity_low_snr,
            row.capacity_high_snr,
            row.dominant_share
        ));
    }
    out
}

pub const POWER_CSV: &str = "power.csv";
pub const CAPACITY_CSV: &str = "capacity.csv";
pub const EIGS_CSV: &str = "eigs.csv";
pub const SUMMARY_CSV: &str = "summary.csv";

fn write_file(path: &Path, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> io::Result<()> {
    let mut w = io::BufWriter::new(fs::File::create(path)?);
    body(&mut w)?;
    w.flush()
}

/// Writes `power.csv`, `capacity.csv`, `eigs.csv` and `summary.csv` into `dir`.
/// Eigenvalue indices are 1-based; realization indices are 0-based.
pub fn write_csvs(result: &ScenarioResult, dir: &Path) -> Result<()> {
    write_file(&dir.join(POWER_CSV), |w| {
        writeln!(w, "realization,design,sigma2_f")?;
        for (kind, r) in &result.per_design {
            for (i, p) in r.power_samples.iter().enumerate() {
                writeln!(w, "{i},{kind},{p}")?;
            }
        }
        Ok(())
    })?;
    write_file(&dir.join(CAPACITY_CSV), |w| {
        writeln!(w, "design,snr_db,capacity_bits")?;
        for (kind, r) in &result.per_design {
            for (snr, c) in &r.capacity_curve {
                writeln!(w, "{kind},{snr},{c}")?;
            }
        }
        Ok(())
    })?;
    write_file(&dir.join(EIGS_CSV), |w| {
        writeln!(w, "design,index,mean_eigenvalue")?;
        for (kind, r) in &result.per_design {
            for (i, l) in r.mean_sorted_eigenvalues.iter().enumerate() {
                writeln!(w, "{kind},{},{l}", i + 1)?;
            }
        }
        Ok(())
    })?;
    write_file(&dir.join(SUMMARY_CSV), |w| {
        writeln!(
            w,
            "design,mean_sigma2_f,std_sigma2_f,capacity_low_snr_bits,capacity_high_snr_bits,dominant_eig_share"
        )?;
        for row in summarize(result) {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                row.design,
                row.mean_sigma2_f,
                row.std_sigma2_f,
                row.capacity_low_snr,
                row.capacity_high_snr,
                row.dominant_share
            )?;
        }
        Ok(())
    })?;
    Ok(())
}
