//! Network energy efficiency: power consumption model, the balanced
//! power-split optimum, and the RF-chain trade-off.
//!
//! Everything here uses the equal-path-loss closed form, so an operating
//! point is a handful of scalars rather than a full channel scenario.

use crate::channel;
use crate::error::{Error, Result};
use crate::rate;

/// Circuit and amplifier parameters of the consumption model.
#[derive(Debug, Clone, Copy)]
pub struct PowerModel {
    /// Power amplifier efficiency `kappa` (same at users and relay), in (0, 1].
    pub amp_efficiency: f64,
    /// Per-RF-chain circuit power `P_0`, watts.
    pub rf_chain_power: f64,
    /// Fixed circuit power `P_const`, watts.
    pub static_power: f64,
    /// Per-phase-shifter power `P_APS`, watts.
    pub shifter_power: f64,
}

impl PowerModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.amp_efficiency > 0.0 && self.amp_efficiency <= 1.0) {
            return Err(Error::InvalidParameter(
                "amplifier efficiency must lie in (0, 1]".into(),
            ));
        }
        if self.rf_chain_power < 0.0 || self.static_power < 0.0 || self.shifter_power < 0.0 {
            return Err(Error::InvalidParameter(
                "circuit powers must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Transmit-independent consumption: `2K P_0 + P_const + 2K N P_APS`.
pub fn circuit_power(model: &PowerModel, pairs: usize, antennas: usize) -> f64 {
    let users = 2.0 * pairs as f64;
    users * model.rf_chain_power + model.static_power
        + users * antennas as f64 * model.shifter_power
}

/// Total consumed power in watts. The transmit term carries the half-duplex
/// 1/2: each power is spent in only one of the two phases.
pub fn total_power(
    model: &PowerModel,
    pairs: usize,
    antennas: usize,
    user_power: f64,
    relay_power: f64,
) -> f64 {
    let users = 2.0 * pairs as f64;
    0.5 * (users * user_power + relay_power) / model.amp_efficiency
        + circuit_power(model, pairs, antennas)
}

/// One equal-path-loss operating point for EE evaluation.
#[derive(Debug, Clone)]
pub struct EePoint {
    pub antennas: usize,
    pub pairs: usize,
    /// Common large-scale gain `beta_0`.
    pub gain: f64,
    /// Pilot length `tau`.
    pub pilot_len: usize,
    /// Pilot power (linear); `f64::INFINITY` for perfect CSI.
    pub pilot_power: f64,
    pub model: PowerModel,
}

impl EePoint {
    pub fn validate(&self) -> Result<()> {
        if self.antennas == 0 || self.pairs == 0 {
            return Err(Error::InvalidParameter(
                "antenna and pair counts must be >= 1".into(),
            ));
        }
        if !(self.gain > 0.0) {
            return Err(Error::InvalidParameter("gain must be positive".into()));
        }
        self.model.validate()
    }

    /// `(sigma_0^2, epsilon_0^2)` of the MMSE decomposition at this point.
    pub fn variances(&self) -> Result<(f64, f64)> {
        channel::estimation_variances(self.gain, self.pilot_len, self.pilot_power)
    }

    /// Signal and interference coefficients `(a_0, a_1) = (pi N sigma_0^2,
    /// 8 K epsilon_0^2)` of the balanced-split EE objective.
    pub fn coefficients(&self) -> Result<(f64, f64)> {
        let (sigma2, eps2) = self.variances()?;
        let a0 = std::f64::consts::PI * self.antennas as f64 * sigma2;
        let a1 = 8.0 * self.pairs as f64 * eps2;
        Ok((a0, a1))
    }

    /// Closed-form sum spectral efficiency at the given transmit powers.
    pub fn spectral_efficiency(&self, user_power: f64, relay_power: f64) -> Result<f64> {
        self.validate()?;
        if !(user_power > 0.0) || !(relay_power > 0.0) {
            return Err(Error::InvalidParameter(
                "transmit powers must be positive".into(),
            ));
        }
        let (sigma2, eps2) = self.variances()?;
        Ok(
            rate::equal_path_loss_rate(self.antennas, self.pairs, sigma2, eps2, user_power, relay_power)
                .sum,
        )
    }

    /// EE in bits/s/Hz per watt at the given transmit powers.
    pub fn energy_efficiency(&self, user_power: f64, relay_power: f64) -> Result<f64> {
        let se = self.spectral_efficiency(user_power, relay_power)?;
        Ok(se / total_power(&self.model, self.pairs, self.antennas, user_power, relay_power))
    }

    /// EE restricted to the balanced split `P_r = 2K P_s`.
    pub fn balanced_ee(&self, user_power: f64) -> Result<f64> {
        self.energy_efficiency(user_power, 2.0 * self.pairs as f64 * user_power)
    }

    /// Globally optimal user power under the balanced split.
    pub fn optimize_user_power(&self) -> Result<OptimalPowerReport> {
        self.validate()?;
        let (a0, a1) = self.coefficients()?;
        let k = self.pairs as f64;
        let kappa = self.model.amp_efficiency;
        let pc = circuit_power(&self.model, self.pairs, self.antennas);

        // stationarity residual of the balanced-split objective; positive
        // below the optimum, negative above (quasi-concavity)
        let residual = |ps: f64| -> f64 {
            2.0 * a0 * kappa * (2.0 * k * ps / kappa + pc)
                / (((a0 + a1) * ps + 4.0) * (a1 * ps + 4.0))
                - k * (1.0 + a0 * ps / (a1 * ps + 4.0)).ln()
        };

        // bracket the sign change over a wide log grid, then bisect
        let mut lo = 1e-15;
        let mut hi = f64::NAN;
        let mut iterations = 0usize;
        let mut ps = lo;
        while ps <= 1e15 {
            let next = ps * 2.0;
            iterations += 1;
            if residual(next) < 0.0 {
                lo = ps;
                hi = next;
                break;
            }
            ps = next;
        }
        if hi.is_nan() {
            return Err(Error::OptimizerFailure(
                "no stationary point found for the EE objective".into(),
            ));
        }
        for _ in 0..200 {
            iterations += 1;
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if residual(mid) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let ps_star = 0.5 * (lo + hi);
        let pr_star = 2.0 * k * ps_star;
        Ok(OptimalPowerReport {
            user_power: ps_star,
            relay_power: pr_star,
            spectral_efficiency: self.spectral_efficiency(ps_star, pr_star)?,
            energy_efficiency: self.energy_efficiency(ps_star, pr_star)?,
            kkt_residual: residual(ps_star),
            iterations,
        })
    }
}

/// Result of the balanced-split EE optimization.
#[derive(Debug, Clone, Copy)]
pub struct OptimalPowerReport {
    pub user_power: f64,
    pub relay_power: f64,
    pub spectral_efficiency: f64,
    pub energy_efficiency: f64,
    /// Stationarity residual at the returned power (should be ~0).
    pub kkt_residual: f64,
    /// Bracket and bisection steps used.
    pub iterations: usize,
}

/// Split a total transmit budget `P_T = 2K P_s + P_r` EE-optimally:
/// `P_s = P_T/(4K)`, `P_r = P_T/2`.
pub fn optimal_power_split(total_transmit: f64, pairs: usize) -> (f64, f64) {
    let k = pairs as f64;
    (total_transmit / (4.0 * k), total_transmit / 2.0)
}

/// Closed-form optimal EE as a function of the optimal user power alone:
/// `2 a_0 kappa / ([(a_0 + a_1) P_s + 4](a_1 P_s + 4) ln 2)`.
pub fn ee_at_optimum(ps_star: f64, a0: f64, a1: f64, kappa: f64) -> f64 {
    2.0 * a0 * kappa
        / (((a0 + a1) * ps_star + 4.0) * (a1 * ps_star + 4.0) * std::f64::consts::LN_2)
}

/// The line `ln(EE*) = slope * SE* + intercept` traced by the optimal
/// operating points as circuit parameters vary (perfect CSI).
#[derive(Debug, Clone, Copy)]
pub struct GreenPointLine {
    pub slope: f64,
    pub intercept: f64,
}

impl GreenPointLine {
    /// Predicted `ln(EE*)` at a given optimal SE.
    pub fn predict(&self, spectral_efficiency: f64) -> f64 {
        self.slope * spectral_efficiency + self.intercept
    }
}

/// Theoretical line: slope `-ln2/K`, intercept `ln(a_0 kappa / (8 ln 2))`.
pub fn green_point_line(a0: f64, kappa: f64, pairs: usize) -> GreenPointLine {
    let ln2 = std::f64::consts::LN_2;
    GreenPointLine {
        slope: -ln2 / pairs as f64,
        intercept: (a0 * kappa / (8.0 * ln2)).ln(),
    }
}

/// Least-squares fit of `(SE*, ln EE*)` pairs.
pub fn fit_green_points(points: &[(f64, f64)]) -> Result<GreenPointLine> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two green points to fit a line".into(),
        ));
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(se, ee) in points {
        if !(ee > 0.0) {
            return Err(Error::InvalidParameter(
                "energy efficiency must be positive".into(),
            ));
        }
        let y = ee.ln();
        sx += se;
        sy += y;
        sxx += se * se;
        sxy += se * y;
    }
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return Err(Error::InvalidParameter(
            "green points are degenerate in SE".into(),
        ));
    }
    Ok(GreenPointLine {
        slope: (n * sxy - sx * sy) / denom,
        intercept: (sy - (n * sxy - sx * sy) / denom * sx) / n,
    })
}

/// Coefficients `(a, b, d, m)` of the EE objective rewritten as a function of
/// the pair count: `EE(K) = K log2(1 + b/(K + a)) / (d (K + m))`.
///
/// Requires imperfect CSI (`epsilon_0 > 0`) and a pilot length that does not
/// scale with `K`.
pub fn pair_count_coefficients(
    antennas: usize,
    user_power: f64,
    sigma0_sq: f64,
    eps0_sq: f64,
    model: &PowerModel,
) -> Result<(f64, f64, f64, f64)> {
    if !(eps0_sq > 0.0) {
        return Err(Error::InvalidParameter(
            "the pair-count form needs imperfect CSI (epsilon_0 > 0)".into(),
        ));
    }
    if !(user_power > 0.0) {
        return Err(Error::InvalidParameter("user power must be positive".into()));
    }
    model.validate()?;
    let n = antennas as f64;
    let a = 1.0 / (2.0 * user_power * eps0_sq);
    let b = std::f64::consts::PI * n * sigma0_sq / (8.0 * eps0_sq);
    let d = 2.0 * user_power / model.amp_efficiency
        + 2.0 * model.rf_chain_power
        + 2.0 * n * model.shifter_power;
    let m = model.static_power / d;
    Ok((a, b, d, m))
}

/// Evaluate the pair-count form of the EE objective at (possibly fractional) `k`.
pub fn ee_from_pair_count(k: f64, a: f64, b: f64, d: f64, m: f64) -> f64 {
    k * (1.0 + b / (k + a)).log2() / (d * (k + m))
}

/// EE of every admissible pair count at a fixed user power.
#[derive(Debug, Clone)]
pub struct RfChainScan {
    /// `(K, EE at P_r = 2K P_s)` for each candidate.
    pub per_pairs: Vec<(usize, f64)>,
    pub best_pairs: usize,
    /// `L* = 2 K*`.
    pub best_rf_chains: usize,
    pub best_ee: f64,
    /// Whether EE rises then falls exactly once over the scan.
    pub unimodal: bool,
}

/// Scan the pair count `K` from 1 to the largest value whose RF-chain count
/// `L = 2K` the antenna array supports, holding the pilot length fixed.
pub fn optimize_rf_chains(
    antennas: usize,
    user_power: f64,
    gain: f64,
    pilot_len: usize,
    pilot_power: f64,
    model: &PowerModel,
) -> Result<RfChainScan> {
    model.validate()?;
    let max_pairs = rate::condition_check(antennas, 2).max_rf_chains / 2;
    if max_pairs == 0 {
        return Err(Error::InvalidParameter(format!(
            "antenna count {antennas} cannot support even one pair"
        )));
    }
    let mut per_pairs = Vec::with_capacity(max_pairs);
    for pairs in 1..=max_pairs {
        let point = EePoint {
            antennas,
            pairs,
            gain,
            pilot_len,
            pilot_power,
            model: *model,
        };
        per_pairs.push((pairs, point.balanced_ee(user_power)?));
    }
    let (best_pairs, best_ee) = per_pairs
        .iter()
        .copied()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty scan");
    let mut falls = 0;
    let mut unimodal = true;
    for w in per_pairs.windows(2) {
        if w[1].1 < w[0].1 {
            falls += 1;
        } else if falls > 0 {
            unimodal = false;
        }
    }
    Ok(RfChainScan {
        per_pairs,
        best_pairs,
        best_rf_chains: 2 * best_pairs,
        best_ee,
        unimodal,
    })
}
