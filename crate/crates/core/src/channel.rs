//! Physical multipath channels between half-wavelength uniform linear arrays.
//!
//! A channel is a sum of rank-1 path contributions
//! `α_ℓ · a_rx(θ_rx,ℓ) · a_tx(θ_tx,ℓ)†`, with spatial frequencies drawn
//! uniformly on `[-0.5, 0.5]`. Path variances are normalized so the total
//! expected path power is 1, which makes `E[tr(H†H)] = n_rx · n_tx`.
//!
//! With a LoS component, path 0 has a fixed amplitude and a uniform random
//! phase, and carries `los_power_ratio_db` more power than each NLoS path.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::linalg::{Complex, ComplexMatrix, ComplexVector, LinalgError};
use crate::rng::{substream, RandomStream, StreamTag};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("invalid count: {0}")]
    InvalidCount(String),
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, ChannelError>;

/// Critically spaced (half-wavelength) uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArrayGeometry {
    pub n_elements: usize,
}

impl ArrayGeometry {
    pub fn critical(n_elements: usize) -> Result<Self> {
        if n_elements == 0 {
            return Err(ChannelError::InvalidCount("array needs at least one element".into()));
        }
        Ok(Self { n_elements })
    }

    pub fn response(&self, theta: f64) -> Result<ComplexVector> {
        steering_vector(self.n_elements, theta)
    }
}

/// `[1, e^{j2πθ}, …, e^{j2π(n−1)θ}]`.
pub fn steering_vector(n: usize, theta: f64) -> Result<ComplexVector> {
    if n == 0 {
        return Err(ChannelError::InvalidCount(
            "steering vector length must be positive".into(),
        ));
    }
    if !theta.is_finite() {
        return Err(ChannelError::NonFinite("spatial frequency"));
    }
    Ok((0..n)
        .map(|k| {
            if k == 0 {
                Complex::new(1.0, 0.0)
            } else {
                Complex::from_polar(1.0, 2.0 * PI * k as f64 * theta)
            }
        })
        .collect())
}

/// Spatial frequency `0.5 · sin(φ)` for half-wavelength spacing.
pub fn angle_to_spatial_freq(phi: f64) -> Result<f64> {
    if !phi.is_finite() {
        return Err(ChannelError::NonFinite("angle"));
    }
    Ok(0.5 * phi.sin())
}

/// Per-path power split: the NLoS variance and, with LoS, the LoS power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPowers {
    pub nlos_variance: f64,
    pub los_power: Option<f64>,
}

impl PathPowers {
    pub fn new(n_paths: usize, los: bool, los_ratio_db: f64) -> Result<Self> {
        if n_paths == 0 {
            return Err(ChannelError::InvalidCount("need at least one path".into()));
        }
        if !los_ratio_db.is_finite() {
            return Err(ChannelError::NonFinite("LoS power ratio"));
        }
        if !los {
            return Ok(Self {
                nlos_variance: 1.0 / n_paths as f64,
                los_power: None,
            });
        }
        let ratio = 10f64.powf(los_ratio_db / 10.0);
        let variance = 1.0 / (ratio + (n_paths - 1) as f64);
        Ok(Self {
            nlos_variance: variance,
            los_power: Some(ratio * variance),
        })
    }

    /// `Σ E|α_ℓ|²`; 1 up to rounding.
    pub fn total(&self, n_paths: usize) -> f64 {
        match self.los_power {
            Some(p) => p + (n_paths - 1) as f64 * self.nlos_variance,
            None => n_paths as f64 * self.nlos_variance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub gains: Vec<Complex>,
    /// Receive-side spatial frequencies.
    pub aoa_freqs: Vec<f64>,
    /// Transmit-side spatial frequencies.
    pub aod_freqs: Vec<f64>,
    pub los_index: Option<usize>,
    pub powers: PathPowers,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.gains.len();
        if n == 0 || self.aoa_freqs.len() != n || self.aod_freqs.len() != n {
            return Err(ChannelError::DimensionMismatch(format!(
                "path set lengths {} / {} / {}",
                n,
                self.aoa_freqs.len(),
                self.aod_freqs.len()
            )));
        }
        let in_range = |t: &f64| (-0.5..=0.5).contains(t);
        if !self.aoa_freqs.iter().all(in_range) || !self.aod_freqs.iter().all(in_range) {
            return Err(ChannelError::DimensionMismatch(
                "spatial frequency outside [-0.5, 0.5]".into(),
            ));
        }
        Ok(())
    }

    /// Same paths with every gain multiplied by `c`.
    pub fn scaled(&self, c: Complex) -> Self {
        Self {
            gains: self.gains.iter().map(|&g| g * c).collect(),
            ..self.clone()
        }
    }
}

fn complex_gaussian(rng: &mut RandomStream, variance: f64) -> Complex {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(s * re, s * im)
}

fn uniform_freq(rng: &mut RandomStream) -> f64 {
    rng.random_range(-0.5..=0.5)
}

/// Draws `n_paths` paths; with `los`, path 0 is the LoS path.
pub fn draw_path_set(n_paths: usize, los: bool, los_ratio_db: f64, rng: &mut RandomStream) -> Result<PathSet> {
    let powers = PathPowers::new(n_paths, los, los_ratio_db)?;
    let mut gains = Vec::with_capacity(n_paths);
    let mut aoa_freqs = Vec::with_capacity(n_paths);
    let mut aod_freqs = Vec::with_capacity(n_paths);
    for l in 0..n_paths {
        aoa_freqs.push(uniform_freq(rng));
        aod_freqs.push(uniform_freq(rng));
        let gain = match powers.los_power {
            Some(p) if l == 0 => Complex::from_polar(p.sqrt(), rng.random_range(0.0..2.0 * PI)),
            _ => complex_gaussian(rng, powers.nlos_variance),
        };
        gains.push(gain);
    }
    Ok(PathSet {
        gains,
        aoa_freqs,
        aod_freqs,
        los_index: los.then_some(0),
        powers,
    })
}

/// `Σ_ℓ α_ℓ · a_rx(θ_rx,ℓ) · a_tx(θ_tx,ℓ)†` as an `n_rx_side × n_tx_side` matrix.
pub fn assemble_channel(paths: &PathSet, n_rx_side: usize, n_tx_side: usize) -> Result<ComplexMatrix> {
    if n_rx_side == 0 || n_tx_side == 0 {
        return Err(ChannelError::DimensionMismatch(
            "channel dimensions must be positive".into(),
        ));
    }
    paths.validate()?;
    let mut data = vec![Complex::new(0.0, 0.0); n_rx_side * n_tx_side];
    for ((&alpha, &rx), &tx) in paths.gains.iter().zip(&paths.aoa_freqs).zip(&paths.aod_freqs) {
        let a_rx = steering_vector(n_rx_side, rx)?;
        let a_tx = steering_vector(n_tx_side, tx)?;
        for (r, ar) in a_rx.iter().enumerate() {
            let row_scale = alpha * ar;
            for (t, at) in a_tx.iter().enumerate() {
                data[r * n_tx_side + t] += row_scale * at.conj();
            }
        }
    }
    Ok(ComplexMatrix::new(n_rx_side, n_tx_side, data)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_ris: usize,
    pub n_paths_h: usize,
    pub n_paths_g: usize,
    pub los: bool,
    pub los_power_ratio_db: f64,
    pub seed: u64,
}

impl ChannelSpec {
    pub const DEFAULT_LOS_RATIO_DB: f64 = 10.0;

    /// Square `n`-element arrays on every side with `n_paths` paths per hop.
    pub fn symmetric(n: usize, n_paths: usize, los: bool, seed: u64) -> Self {
        Self {
            n_tx: n,
            n_rx: n,
            n_ris: n,
            n_paths_h: n_paths,
            n_paths_g: n_paths,
            los,
            los_power_ratio_db: Self::DEFAULT_LOS_RATIO_DB,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("n_tx", self.n_tx),
            ("n_rx", self.n_rx),
            ("n_ris", self.n_ris),
            ("n_paths_h", self.n_paths_h),
            ("n_paths_g", self.n_paths_g),
        ];
        if let Some((name, _)) = dims.iter().find(|(_, v)| *v == 0) {
            return Err(ChannelError::InvalidCount(format!("{name} must be at least 1")));
        }
        if !self.los_power_ratio_db.is_finite() {
            return Err(ChannelError::NonFinite("LoS power ratio"));
        }
        Ok(())
    }

    /// `min(n_rx, n_tx, n_ris)`, the largest possible number of spatial channels.
    pub fn max_channels(&self) -> usize {
        self.n_rx.min(self.n_tx).min(self.n_ris)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// TX → RIS, `n_ris × n_tx`.
    pub h: ComplexMatrix,
    /// RIS → RX, `n_rx × n_ris`.
    pub g: ComplexMatrix,
    pub paths_h: PathSet,
    pub paths_g: PathSet,
}

impl ChannelRealization {
    /// Largest entrywise deviation of `h` and `g` from their path expansions.
    pub fn reconstruction_error(&self) -> Result<f64> {
        let h = assemble_channel(&self.paths_h, self.h.rows(), self.h.cols())?;
        let g = assemble_channel(&self.paths_g, self.g.rows(), self.g.cols())?;
        let worst = |a: &ComplexMatrix, b: &ComplexMatrix| {
            a.as_slice()
                .iter()
                .zip(b.as_slice())
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max)
        };
        Ok(worst(&h, &self.h).max(worst(&g, &self.g)))
    }
}

/// Draws realization number `realization` of `spec`. H and G use separate
/// sub-streams of `spec.seed`.
pub fn realize(spec: &ChannelSpec, realization: u64) -> Result<ChannelRealization> {
    spec.validate()?;
    let mut rng_h = substream(spec.seed, realization, StreamTag::TxToRis);
    let mut rng_g = substream(spec.seed, realization, StreamTag::RisToRx);
    let paths_h = draw_path_set(spec.n_paths_h, spec.los, spec.los_power_ratio_db, &mut rng_h)?;
    let paths_g = draw_path_set(spec.n_paths_g, spec.los, spec.los_power_ratio_db, &mut rng_g)?;
    let h = assemble_channel(&paths_h, spec.n_ris, spec.n_tx)?;
    let g = assemble_channel(&paths_g, spec.n_rx, spec.n_ris)?;
    Ok(ChannelRealization { h, g, paths_h, paths_g })
}
