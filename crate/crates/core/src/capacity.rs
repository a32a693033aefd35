//! Waterfilling capacity over the eigenvalues of `F†F`.
//!
//! Noise is unit variance per receive element, so SNR only enters through the
//! transmit power budget.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::linalg::{hermitian_eig, ComplexMatrix, LinalgError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CapacityError {
    #[error("power must be positive and finite, got {0}")]
    NonPositivePower(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, CapacityError>;

/// How the per-symbol average power `P_ave` maps to the waterfilling budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BudgetMode {
    /// `P_ave` per transmit antenna; budget `n_T · P_ave`.
    #[default]
    PerAntenna,
    /// `P_ave` is already the total across antennas.
    PerSymbolTotal,
}

impl BudgetMode {
    pub fn name(self) -> &'static str {
        match self {
            BudgetMode::PerAntenna => "per_antenna",
            BudgetMode::PerSymbolTotal => "per_symbol_total",
        }
    }

    fn multiplier(self, n_t: usize) -> f64 {
        match self {
            BudgetMode::PerAntenna => n_t as f64,
            BudgetMode::PerSymbolTotal => 1.0,
        }
    }
}

impl fmt::Display for BudgetMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BudgetMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "per_antenna" => Ok(BudgetMode::PerAntenna),
            "per_symbol_total" => Ok(BudgetMode::PerSymbolTotal),
            other => Err(format!("unknown budget mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEigenprofile {
    /// Eigenvalues of `F†F`, clamped at zero, sorted non-increasing.
    pub eigenvalues: Vec<f64>,
    /// `min(n_R, n_T, n_IS)`.
    pub n_ch_max: usize,
}

impl ChannelEigenprofile {
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>, n_ch_max: usize) -> Self {
        for l in eigenvalues.iter_mut() {
            if *l < 0.0 {
                *l = 0.0;
            }
        }
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        Self { eigenvalues, n_ch_max }
    }

    pub fn total(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// `λ_1 / Σλ`; zero for an all-zero profile.
    pub fn dominant_share(&self) -> f64 {
        let total = self.total();
        if total > 0.0 {
            self.eigenvalues[0] / total
        } else {
            0.0
        }
    }
}

/// Eigenvalues of `F†F` for a composite channel through an `n_ris`-element
/// surface.
pub fn eigenprofile(f: &ComplexMatrix, n_ris: usize) -> Result<ChannelEigenprofile> {
    let eig = hermitian_eig(&f.gram())?;
    let n_ch = f.rows().min(f.cols()).min(n_ris);
    Ok(ChannelEigenprofile::from_eigenvalues(eig.eigenvalues, n_ch))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaterfillResult {
    /// Per-eigenchannel power, aligned with the profile's eigenvalues.
    pub powers: Vec<f64>,
    pub water_level: f64,
    pub capacity_bits: f64,
    /// Every eigenvalue was zero: capacity 0, powers spread uniformly.
    pub all_zero: bool,
}

impl WaterfillResult {
    pub fn active_channels(&self) -> usize {
        self.powers.iter().filter(|&&p| p > 0.0).count()
    }
}

/// Capacity-achieving power allocation by the sorted active-set method: try
/// the `k` strongest channels, solve the water level in closed form, and keep
/// the largest `k` whose weakest channel still gets positive power.
pub fn waterfill(profile: &ChannelEigenprofile, total_power: f64) -> Result<WaterfillResult> {
    if !(total_power > 0.0 && total_power.is_finite()) {
        return Err(CapacityError::NonPositivePower(total_power));
    }
    let n = profile.eigenvalues.len();
    if n == 0 {
        return Err(CapacityError::InvalidArgument("empty eigenprofile".into()));
    }
    let positive = profile.eigenvalues.iter().take_while(|&&l| l > 0.0).count();
    if positive == 0 {
        return Ok(WaterfillResult {
            powers: vec![total_power / n as f64; n],
            water_level: 0.0,
            capacity_bits: 0.0,
            all_zero: true,
        });
    }

    let inv: Vec<f64> = profile.eigenvalues[..positive].iter().map(|l| 1.0 / l).collect();
    let mut prefix = 0.0;
    let mut best = (1, total_power + inv[0]);
    for k in 1..=positive {
        prefix += inv[k - 1];
        let level = (total_power + prefix) / k as f64;
        if level > inv[k - 1] {
            best = (k, level);
        } else {
            break;
        }
    }
    let (active, water_level) = best;

    let mut powers = vec![0.0; n];
    let mut capacity_bits = 0.0;
    for i in 0..active {
        let p = water_level - inv[i];
        powers[i] = p;
        capacity_bits += (p * profile.eigenvalues[i]).ln_1p();
    }
    capacity_bits /= std::f64::consts::LN_2;
    Ok(WaterfillResult {
        powers,
        water_level,
        capacity_bits,
        all_zero: false,
    })
}

/// Capacity with the budget spread evenly over all eigenchannels.
pub fn equal_power_capacity(profile: &ChannelEigenprofile, total_power: f64) -> f64 {
    let p = total_power / profile.eigenvalues.len() as f64;
    profile.eigenvalues.iter().map(|l| (p * l).ln_1p()).sum::<f64>() / std::f64::consts::LN_2
}

/// One point on the per-channel SNR axis, `SNR_ch = P_ave · E[σ²_F] / N_ch`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrOperatingPoint {
    pub snr_ch_db: f64,
    pub p_ave: f64,
    pub mean_sigma2_f: f64,
}

impl SnrOperatingPoint {
    pub fn new(snr_ch_db: f64, mean_sigma2_f: f64, n_ch: usize) -> Result<Self> {
        if !(mean_sigma2_f > 0.0 && mean_sigma2_f.is_finite()) {
            return Err(CapacityError::NonPositivePower(mean_sigma2_f));
        }
        if n_ch == 0 {
            return Err(CapacityError::InvalidArgument("n_ch must be at least 1".into()));
        }
        if !snr_ch_db.is_finite() {
            return Err(CapacityError::InvalidArgument("SNR must be finite".into()));
        }
        let p_ave = 10f64.powf(snr_ch_db / 10.0) * n_ch as f64 / mean_sigma2_f;
        Ok(Self {
            snr_ch_db,
            p_ave,
            mean_sigma2_f,
        })
    }

    pub fn total_power(&self, n_t: usize, mode: BudgetMode) -> f64 {
        self.p_ave * mode.multiplier(n_t)
    }
}

/// Waterfilling budget for a per-channel SNR in dB.
pub fn snr_to_power(snr_ch_db: f64, mean_sigma2_f: f64, n_ch: usize, n_t: usize, mode: BudgetMode) -> Result<f64> {
    Ok(SnrOperatingPoint::new(snr_ch_db, mean_sigma2_f, n_ch)?.total_power(n_t, mode))
}

/// Inverse of [`snr_to_power`].
pub fn power_to_snr(total_power: f64, mean_sigma2_f: f64, n_ch: usize, n_t: usize, mode: BudgetMode) -> Result<f64> {
    if !(total_power > 0.0 && total_power.is_finite()) {
        return Err(CapacityError::NonPositivePower(total_power));
    }
    if mean_sigma2_f.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || n_ch == 0 {
        return Err(CapacityError::InvalidArgument("bad SNR reference".into()));
    }
    let p_ave = total_power / mode.multiplier(n_t);
    Ok(10.0 * (p_ave * mean_sigma2_f / n_ch as f64).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{trace_gram, Complex};

    fn profile(eigs: &[f64]) -> ChannelEigenprofile {
        ChannelEigenprofile::from_eigenvalues(eigs.to_vec(), eigs.len())
    }

    #[test]
    fn eigenprofile_examples() {
        let p = eigenprofile(&ComplexMatrix::identity(3), 3).unwrap();
        assert_eq!(p.eigenvalues, vec![1.0; 3]);
        let f = ComplexMatrix::from_diag(&[Complex::new(2.0, 0.0), Complex::new(1.0, 0.0)]);
        let p = eigenprofile(&f, 2).unwrap();
        assert_eq!(p.eigenvalues, vec![4.0, 1.0]);
        let f = ComplexMatrix::from_fn(3, 5, |i, j| Complex::new((i + 2 * j) as f64 * 0.1, i as f64 - j as f64));
        let p = eigenprofile(&f, 4).unwrap();
        assert_eq!(p.eigenvalues.len(), 5);
        assert_eq!(p.n_ch_max, 3);
        let tg = trace_gram(&f).unwrap();
        assert!((p.total() - tg).abs() <= 1e-10 * tg);
    }

    #[test]
    fn single_channel() {
        let r = waterfill(&profile(&[2.5]), 3.0).unwrap();
        assert!((r.capacity_bits - (1.0f64 + 7.5).log2()).abs() < 1e-14);
        assert_eq!(r.powers, vec![3.0]);
    }

    #[test]
    fn equal_channels_split_evenly() {
        let r = waterfill(&profile(&[0.7, 0.7]), 4.0).unwrap();
        assert!((r.powers[0] - 2.0).abs() < 1e-14 && (r.powers[1] - 2.0).abs() < 1e-14);
        assert!((r.capacity_bits - 2.0 * (1.0f64 + 1.4).log2()).abs() < 1e-13);
    }

    #[test]
    fn weak_channel_stays_off() {
        // 1/0.01 − 1/1 = 99 > P = 1, so only the strong channel is used.
        let r = waterfill(&profile(&[1.0, 0.01]), 1.0).unwrap();
        assert_eq!(r.active_channels(), 1);
        assert!((r.capacity_bits - 1.0).abs() < 1e-14);
        // Grid-search oracle over the split p1 ∈ [0, 1].
        let grid = 1_000_000;
        let best = (0..=grid)
            .map(|i| {
                let p1 = i as f64 / grid as f64;
                (1.0 + p1).log2() + (1.0 + (1.0 - p1) * 0.01).log2()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((best - r.capacity_bits).abs() < 1e-9);
    }

    #[test]
    fn all_zero_channel_is_flagged() {
        let r = waterfill(&profile(&[0.0, 0.0, 0.0]), 3.0).unwrap();
        assert!(r.all_zero);
        assert_eq!(r.capacity_bits, 0.0);
        assert_eq!(r.powers, vec![1.0; 3]);
    }

    #[test]
    fn bad_power_rejected() {
        assert!(matches!(
            waterfill(&profile(&[1.0]), 0.0),
            Err(CapacityError::NonPositivePower(_))
        ));
        assert!(waterfill(&profile(&[1.0]), f64::NAN).is_err());
        assert!(snr_to_power(0.0, 0.0, 1, 1, BudgetMode::PerAntenna).is_err());
    }

    #[test]
    fn snr_mapping() {
        let p = snr_to_power(0.0, 29.0, 29, 29, BudgetMode::PerSymbolTotal).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        let p10 = snr_to_power(10.0, 29.0, 29, 29, BudgetMode::PerSymbolTotal).unwrap();
        assert!((p10 - 10.0).abs() < 1e-13);
        let pa = snr_to_power(0.0, 29.0, 29, 29, BudgetMode::PerAntenna).unwrap();
        assert!((pa - 29.0).abs() < 1e-13);
        for mode in [BudgetMode::PerAntenna, BudgetMode::PerSymbolTotal] {
            let p = snr_to_power(-7.5, 1234.5, 29, 29, mode).unwrap();
            let snr = power_to_snr(p, 1234.5, 29, 29, mode).unwrap();
            let back = snr_to_power(snr, 1234.5, 29, 29, mode).unwrap();
            assert!((back / p - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn budget_mode_names() {
        for m in [BudgetMode::PerAntenna, BudgetMode::PerSymbolTotal] {
            assert_eq!(m.name().parse::<BudgetMode>().unwrap(), m);
        }
        assert!("per_thing".parse::<BudgetMode>().is_err());
    }
}
