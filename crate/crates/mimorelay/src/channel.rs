//! Channel generation and the statistical MMSE estimate/error decomposition.
//!
//! Channels are drawn directly in their estimate/error form: the estimate and
//! the error are sampled independently with the per-user variances of the
//! MMSE decomposition, and the true channel is their sum. This realizes the
//! estimate/error independence exactly without simulating pilot symbols.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Channel family for one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelModel {
    /// i.i.d. Rayleigh fading, per-user large-scale gain from `Scenario::gains`.
    Rayleigh,
    /// Geometric multipath model with a uniform linear array at the relay.
    MmWave {
        /// Number of propagation paths per user.
        paths: usize,
        /// Antenna spacing normalized to the carrier wavelength.
        spacing: f64,
    },
}

/// Analog phase-shifter resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseShifter {
    /// Continuous phases.
    Ideal,
    /// Phases restricted to a `2^bits`-point uniform codebook.
    Quantized { bits: u32 },
}

/// All physical parameters of one operating point.
///
/// The RF-chain count is always `2K`: the hybrid design requires it, so the
/// scenario does not carry a separate field for it.
#[derive(Debug, Clone)]
pub struct Scenario {
    /// Relay antenna count `N`.
    pub antennas: usize,
    /// User pair count `K` (2K single-antenna users, 2K RF chains).
    pub pairs: usize,
    /// Per-user transmit power `P_s` (linear, noise-normalized).
    pub user_power: f64,
    /// Relay transmit power `P_r` (linear).
    pub relay_power: f64,
    /// Pilot power `P_p` (linear); `f64::INFINITY` means perfect CSI.
    pub pilot_power: f64,
    /// Pilot sequence length `tau`.
    pub pilot_len: usize,
    /// Per-user large-scale gains `beta_j`, length 2K.
    pub gains: Vec<f64>,
    /// Phase shifter resolution for the analog stages.
    pub shifter: PhaseShifter,
    /// Channel family.
    pub model: ChannelModel,
}

impl Scenario {
    /// Equal-path-loss scenario (`beta_j = beta` for all users).
    pub fn equal_gains(
        antennas: usize,
        pairs: usize,
        user_power: f64,
        relay_power: f64,
        pilot_power: f64,
        pilot_len: usize,
        beta: f64,
    ) -> Result<Self> {
        let scn = Scenario {
            antennas,
            pairs,
            user_power,
            relay_power,
            pilot_power,
            pilot_len,
            gains: vec![beta; 2 * pairs],
            shifter: PhaseShifter::Ideal,
            model: ChannelModel::Rayleigh,
        };
        scn.validate()?;
        Ok(scn)
    }

    /// Number of single-antenna users (= RF chains).
    pub fn users(&self) -> usize {
        2 * self.pairs
    }

    /// RF-chain count `L = 2K`.
    pub fn rf_chains(&self) -> usize {
        2 * self.pairs
    }

    pub fn validate(&self) -> Result<()> {
        if self.antennas == 0 {
            return Err(Error::InvalidParameter("antenna count must be >= 1".into()));
        }
        if self.pairs == 0 {
            return Err(Error::InvalidParameter("pair count must be >= 1".into()));
        }
        if !(self.user_power > 0.0) || !(self.relay_power > 0.0) || !(self.pilot_power > 0.0) {
            return Err(Error::InvalidParameter(
                "all transmit powers must be positive".into(),
            ));
        }
        if self.pilot_len < self.users() {
            return Err(Error::InvalidParameter(format!(
                "pilot length {} shorter than user count {}",
                self.pilot_len,
                self.users()
            )));
        }
        if self.gains.len() != self.users() {
            return Err(Error::InvalidParameter(format!(
                "expected {} large-scale gains, got {}",
                self.users(),
                self.gains.len()
            )));
        }
        if self.gains.iter().any(|&b| !(b > 0.0)) {
            return Err(Error::InvalidParameter(
                "all large-scale gains must be positive".into(),
            ));
        }
        if let PhaseShifter::Quantized { bits } = self.shifter {
            if bits == 0 {
                return Err(Error::InvalidParameter(
                    "quantization bits must be >= 1".into(),
                ));
            }
        }
        if let ChannelModel::MmWave { paths, spacing } = self.model {
            if paths == 0 {
                return Err(Error::InvalidParameter("path count must be >= 1".into()));
            }
            if !(spacing >= 0.0) {
                return Err(Error::InvalidParameter(
                    "antenna spacing must be nonnegative".into(),
                ));
            }
        }
        Ok(())
    }
}

/// True channel, its estimate, and the estimation error of one draw.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// True uplink channel `G`, `N x 2K`.
    pub true_channel: DMatrix<Complex64>,
    /// Channel estimate, `N x 2K`.
    pub estimate: DMatrix<Complex64>,
    /// Estimation error, `N x 2K`; `true_channel = estimate + error` exactly.
    pub error: DMatrix<Complex64>,
    /// Per-user estimate variance `sigma_j^2`.
    pub estimate_var: Vec<f64>,
    /// Per-user error variance `eps_j^2`.
    pub error_var: Vec<f64>,
}

/// Per-user estimate and error variance of the pilot-based MMSE estimate.
///
/// `sigma^2 = tau P_p beta^2 / (tau P_p beta + 1)` and `eps^2 = beta - sigma^2`.
/// `P_p = infinity` is the perfect-CSI limit `(beta, 0)`.
pub fn estimation_variances(beta: f64, tau: usize, pilot_power: f64) -> Result<(f64, f64)> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter("beta must be positive".into()));
    }
    if tau == 0 {
        return Err(Error::InvalidParameter("tau must be >= 1".into()));
    }
    if !(pilot_power > 0.0) {
        return Err(Error::InvalidParameter(
            "pilot power must be positive".into(),
        ));
    }
    if pilot_power.is_infinite() {
        return Ok((beta, 0.0));
    }
    let tp = tau as f64 * pilot_power;
    let sigma2 = tp * beta * beta / (tp * beta + 1.0);
    Ok((sigma2, beta - sigma2))
}

fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, col_var: &[f64], rng: &mut R) -> DMatrix<Complex64> {
    // CN(0, v): each part N(0, v/2). Column-major fill keeps per-column variance.
    DMatrix::from_fn(rows, cols, |_, j| {
        let s = (col_var[j] / 2.0).sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    })
}

/// Draw one Rayleigh-fading realization: estimate and error are sampled
/// independently, the true channel is their sum.
pub fn gen_rayleigh<R: Rng>(scenario: &Scenario, rng: &mut R) -> Result<ChannelRealization> {
    scenario.validate()?;
    let n = scenario.antennas;
    let users = scenario.users();
    let mut estimate_var = Vec::with_capacity(users);
    let mut error_var = Vec::with_capacity(users);
    for &beta in &scenario.gains {
        let (s2, e2) = estimation_variances(beta, scenario.pilot_len, scenario.pilot_power)?;
        estimate_var.push(s2);
        error_var.push(e2);
    }
    let estimate = gaussian_matrix(n, users, &estimate_var, rng);
    let error = gaussian_matrix(n, users, &error_var, rng);
    let true_channel = &estimate + &error;
    Ok(ChannelRealization {
        true_channel,
        estimate,
        error,
        estimate_var,
        error_var,
    })
}

/// Draw one geometric multipath realization (ULA response, random path gains
/// and departure angles).
///
/// The estimation layer reuses the statistical decomposition with `beta = 1`
/// (the model's per-element average power): the error is drawn independently
/// and subtracted from the true channel to form the estimate.
pub fn gen_mmwave<R: Rng>(scenario: &Scenario, rng: &mut R) -> Result<ChannelRealization> {
    scenario.validate()?;
    let (paths, spacing) = match scenario.model {
        ChannelModel::MmWave { paths, spacing } => (paths, spacing),
        ChannelModel::Rayleigh => {
            return Err(Error::InvalidParameter(
                "gen_mmwave called on a Rayleigh scenario".into(),
            ))
        }
    };
    let n = scenario.antennas;
    let users = scenario.users();
    let mut true_channel = DMatrix::<Complex64>::zeros(n, users);
    let amp = (n as f64 / paths as f64).sqrt();
    for k in 0..users {
        for _ in 0..paths {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let gain = Complex64::new(re / 2f64.sqrt(), im / 2f64.sqrt());
            let theta: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
            // g_k = amp * gain * conj(steering(theta)); steering has 1/sqrt(N) modulus.
            let phase_step = -std::f64::consts::TAU * spacing * theta.sin();
            for i in 0..n {
                let steer = Complex64::from_polar(1.0 / (n as f64).sqrt(), phase_step * i as f64);
                true_channel[(i, k)] += amp * gain * steer;
            }
        }
    }
    let (sigma2, eps2) = estimation_variances(1.0, scenario.pilot_len, scenario.pilot_power)?;
    let estimate_var = vec![sigma2; users];
    let error_var = vec![eps2; users];
    let error = gaussian_matrix(n, users, &error_var, rng);
    let estimate = &true_channel - &error;
    Ok(ChannelRealization {
        true_channel,
        estimate,
        error,
        estimate_var,
        error_var,
    })
}

/// Draw one realization of whichever model the scenario selects.
pub fn generate<R: Rng>(scenario: &Scenario, rng: &mut R) -> Result<ChannelRealization> {
    match scenario.model {
        ChannelModel::Rayleigh => gen_rayleigh(scenario, rng),
        ChannelModel::MmWave { .. } => gen_mmwave(scenario, rng),
    }
}
