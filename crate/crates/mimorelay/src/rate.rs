//! Ergodic sum-rate estimators and closed-form expressions.
//!
//! Two Monte Carlo estimators are provided: the instantaneous-SINR ergodic
//! mean and the channel-hardening lower bound. Both are cross-checked against
//! the large-`N` closed form and the full-digital benchmark.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::{self, Scenario};
use crate::error::{Error, Result};
use crate::hybrid::{self, pair_partner, HybridWeights};
use crate::seedstream::trial_rng;

/// How a rate report was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMethod {
    MonteCarlo,
    HardeningBound,
    ClosedFormTheorem1,
    ClosedFormFullDigital,
}

impl RateMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            RateMethod::MonteCarlo => "monte-carlo",
            RateMethod::HardeningBound => "hardening-bound",
            RateMethod::ClosedFormTheorem1 => "closed-form-theorem1",
            RateMethod::ClosedFormFullDigital => "closed-form-full-digital",
        }
    }
}

/// Sum-rate result with per-link breakdown.
#[derive(Debug, Clone)]
pub struct RateReport {
    /// Rate of each directed link `k -> partner(k)`, bits/s/Hz.
    pub per_link: Vec<f64>,
    /// Total sum rate.
    pub sum: f64,
    pub method: RateMethod,
    /// Monte Carlo trials behind the estimate (0 for closed forms).
    pub trials: usize,
    /// Per-link standard error (Monte Carlo only).
    pub stderr: Option<Vec<f64>>,
    /// Singular draws that were resampled.
    pub resampled: usize,
}

impl RateReport {
    fn from_links(per_link: Vec<f64>, method: RateMethod, trials: usize) -> Self {
        let sum = per_link.iter().sum();
        RateReport {
            per_link,
            sum,
            method,
            trials,
            stderr: None,
            resampled: 0,
        }
    }
}

/// Uplink and downlink instantaneous SINRs of every link for one realization.
///
/// Index `k` is the transmitting user; the downlink entry is the SINR at its
/// pair partner.
pub fn per_link_sinrs(
    weights: &HybridWeights,
    true_channel: &DMatrix<Complex64>,
    user_power: f64,
    relay_power: f64,
) -> (Vec<f64>, Vec<f64>) {
    let users = weights.digital_combiner.nrows();

    // uplink: rows of W_r F_r against the true channel
    let combined = &weights.digital_combiner * &weights.analog_combiner; // 2K x N
    let received = &combined * true_channel; // 2K x 2K
    let mut uplink = Vec::with_capacity(users);
    for k in 0..users {
        let signal = user_power * received[(k, k)].norm_sqr();
        let mut interference = 0.0;
        for j in 0..users {
            if j != k {
                interference += received[(k, j)].norm_sqr();
            }
        }
        let noise = combined.row(k).norm_squared();
        uplink.push(signal / (user_power * interference + noise));
    }

    // downlink: receiver k' observes g_{k'}^T F_t W_t
    let precoded = &weights.analog_precoder * &weights.digital_precoder; // N x 2K
    let observed = true_channel.transpose() * &precoded; // 2K x 2K, row = receiver
    let mu2 = weights.normalization * weights.normalization;
    let mut downlink = Vec::with_capacity(users);
    for k in 0..users {
        let receiver = pair_partner(k);
        let signal = relay_power * observed[(receiver, k)].norm_sqr();
        let mut interference = 0.0;
        for j in 0..users {
            if j != k {
                interference += observed[(receiver, j)].norm_sqr();
            }
        }
        downlink.push(signal / (relay_power * interference + 1.0 / mu2));
    }

    (uplink, downlink)
}

/// Instantaneous uplink SINR of user `k` at the relay.
pub fn sinr_uplink(
    k: usize,
    weights: &HybridWeights,
    true_channel: &DMatrix<Complex64>,
    user_power: f64,
) -> f64 {
    per_link_sinrs(weights, true_channel, user_power, 1.0).0[k]
}

/// Instantaneous downlink SINR at the pair partner of user `k`.
pub fn sinr_downlink(
    k: usize,
    weights: &HybridWeights,
    true_channel: &DMatrix<Complex64>,
    relay_power: f64,
) -> f64 {
    per_link_sinrs(weights, true_channel, 1.0, relay_power).1[k]
}

const MAX_RESAMPLES_PER_TRIAL: usize = 100;

fn draw_weights<R: rand::Rng>(
    scenario: &Scenario,
    rng: &mut R,
) -> Result<(channel::ChannelRealization, HybridWeights, usize)> {
    let mut resampled = 0;
    loop {
        let realization = channel::generate(scenario, rng)?;
        match hybrid::build(scenario, &realization) {
            Ok(weights) => return Ok((realization, weights, resampled)),
            Err(Error::SingularChannel { .. }) if resampled < MAX_RESAMPLES_PER_TRIAL => {
                resampled += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

struct TrialAccum {
    up: Vec<f64>,
    up_sq: Vec<f64>,
    down: Vec<f64>,
    down_sq: Vec<f64>,
    resampled: usize,
}

/// Monte Carlo ergodic sum rate: per-link `1/2 min(mean_up, mean_down)` of
/// `log2(1 + SINR)` over channel realizations.
pub fn mc_sum_rate(scenario: &Scenario, trials: usize, seed: u64) -> Result<RateReport> {
    mc_sum_rate_labeled(scenario, trials, seed, "mc_sum_rate")
}

/// As [`mc_sum_rate`] with a caller-chosen stream label, so different sweep
/// points draw independent substreams.
pub fn mc_sum_rate_labeled(
    scenario: &Scenario,
    trials: usize,
    seed: u64,
    label: &str,
) -> Result<RateReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    scenario.validate()?;
    let users = scenario.users();

    let accum: Result<Vec<TrialAccum>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, label, t);
            let (realization, weights, resampled) = draw_weights(scenario, &mut rng)?;
            let (up, down) = per_link_sinrs(
                &weights,
                &realization.true_channel,
                scenario.user_power,
                scenario.relay_power,
            );
            let up: Vec<f64> = up.iter().map(|g| (1.0 + g).log2()).collect();
            let down: Vec<f64> = down.iter().map(|g| (1.0 + g).log2()).collect();
            Ok(TrialAccum {
                up_sq: up.iter().map(|r| r * r).collect(),
                down_sq: down.iter().map(|r| r * r).collect(),
                up,
                down,
                resampled,
            })
        })
        .collect();
    let accum = accum?;

    let nf = trials as f64;
    let mut up_mean = vec![0.0; users];
    let mut up_var = vec![0.0; users];
    let mut down_mean = vec![0.0; users];
    let mut down_var = vec![0.0; users];
    let mut resampled = 0;
    for a in &accum {
        for k in 0..users {
            up_mean[k] += a.up[k];
            up_var[k] += a.up_sq[k];
            down_mean[k] += a.down[k];
            down_var[k] += a.down_sq[k];
        }
        resampled += a.resampled;
    }
    let mut per_link = Vec::with_capacity(users);
    let mut stderr = Vec::with_capacity(users);
    for k in 0..users {
        up_mean[k] /= nf;
        down_mean[k] /= nf;
        let vu = (up_var[k] / nf - up_mean[k] * up_mean[k]).max(0.0);
        let vd = (down_var[k] / nf - down_mean[k] * down_mean[k]).max(0.0);
        let (mean, var) = if up_mean[k] <= down_mean[k] {
            (up_mean[k], vu)
        } else {
            (down_mean[k], vd)
        };
        per_link.push(0.5 * mean);
        stderr.push(0.5 * (var / nf).sqrt());
    }
    let mut report = RateReport::from_links(per_link, RateMethod::MonteCarlo, trials);
    report.stderr = Some(stderr);
    report.resampled = resampled;
    Ok(report)
}

/// Channel-hardening (worst-case uncorrelated noise) lower bound, with all
/// expectations estimated by Monte Carlo over realizations.
pub fn hardening_bound_rate(scenario: &Scenario, trials: usize, seed: u64) -> Result<RateReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    scenario.validate()?;
    let users = scenario.users();

    struct Moments {
        up_gain: Vec<Complex64>,
        up_gain_sq: Vec<f64>,
        up_intf: Vec<f64>,
        up_noise: Vec<f64>,
        down_gain: Vec<Complex64>,
        down_gain_sq: Vec<f64>,
        down_intf: Vec<f64>,
        inv_mu2: f64,
        resampled: usize,
    }

    let accum: Result<Vec<Moments>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, "hardening", t);
            let (realization, weights, resampled) = draw_weights(scenario, &mut rng)?;
            let g = &realization.true_channel;
            let combined = &weights.digital_combiner * &weights.analog_combiner;
            let received = &combined * g;
            let precoded = &weights.analog_precoder * &weights.digital_precoder;
            let observed = g.transpose() * &precoded;
            let mut m = Moments {
                up_gain: vec![Complex64::default(); users],
                up_gain_sq: vec![0.0; users],
                up_intf: vec![0.0; users],
                up_noise: vec![0.0; users],
                down_gain: vec![Complex64::default(); users],
                down_gain_sq: vec![0.0; users],
                down_intf: vec![0.0; users],
                inv_mu2: 1.0 / (weights.normalization * weights.normalization),
                resampled,
            };
            for k in 0..users {
                m.up_gain[k] = received[(k, k)];
                m.up_gain_sq[k] = received[(k, k)].norm_sqr();
                m.up_noise[k] = combined.row(k).norm_squared();
                let receiver = pair_partner(k);
                m.down_gain[k] = observed[(receiver, k)];
                m.down_gain_sq[k] = observed[(receiver, k)].norm_sqr();
                for j in 0..users {
                    if j != k {
                        m.up_intf[k] += received[(k, j)].norm_sqr();
                        m.down_intf[k] += observed[(receiver, j)].norm_sqr();
                    }
                }
            }
            Ok(m)
        })
        .collect();
    let accum = accum?;

    let nf = trials as f64;
    let mut per_link = Vec::with_capacity(users);
    let mut resampled = 0;
    let ps = scenario.user_power;
    let pr = scenario.relay_power;
    let inv_mu2_mean = accum.iter().map(|m| m.inv_mu2).sum::<f64>() / nf;
    for m in &accum {
        resampled += m.resampled;
    }
    for k in 0..users {
        let up_gain = accum.iter().map(|m| m.up_gain[k]).sum::<Complex64>() / nf;
        let up_gain_sq = accum.iter().map(|m| m.up_gain_sq[k]).sum::<f64>() / nf;
        let up_var = (up_gain_sq - up_gain.norm_sqr()).max(0.0);
        let up_intf = accum.iter().map(|m| m.up_intf[k]).sum::<f64>() / nf;
        let up_noise = accum.iter().map(|m| m.up_noise[k]).sum::<f64>() / nf;
        let r_up = (1.0
            + ps * up_gain.norm_sqr() / (ps * up_var + ps * up_intf + up_noise))
            .log2();

        let down_gain = accum.iter().map(|m| m.down_gain[k]).sum::<Complex64>() / nf;
        let down_gain_sq = accum.iter().map(|m| m.down_gain_sq[k]).sum::<f64>() / nf;
        let down_var = (down_gain_sq - down_gain.norm_sqr()).max(0.0);
        let down_intf = accum.iter().map(|m| m.down_intf[k]).sum::<f64>() / nf;
        let r_down = (1.0
            + pr * down_gain.norm_sqr() / (pr * down_var + pr * down_intf + inv_mu2_mean))
            .log2();

        per_link.push(0.5 * r_up.min(r_down));
    }
    let mut report = RateReport::from_links(per_link, RateMethod::HardeningBound, trials);
    report.resampled = resampled;
    Ok(report)
}

fn per_user_variances(scenario: &Scenario) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut sigma2 = Vec::with_capacity(scenario.users());
    let mut eps2 = Vec::with_capacity(scenario.users());
    for &beta in &scenario.gains {
        let (s2, e2) =
            channel::estimation_variances(beta, scenario.pilot_len, scenario.pilot_power)?;
        sigma2.push(s2);
        eps2.push(e2);
    }
    Ok((sigma2, eps2))
}

/// Per-link SINR slope `x` of the large-`N` closed form.
fn closed_form_x(scenario: &Scenario, sigma2: &[f64], eps2: &[f64], k: usize) -> f64 {
    let ps = scenario.user_power;
    let pr = scenario.relay_power;
    let eps_total: f64 = eps2.iter().sum();
    let inv_sigma_total: f64 = sigma2.iter().map(|s| 1.0 / s).sum();
    let uplink = ps * sigma2[k] / (1.0 + ps * eps_total);
    let downlink = pr / ((1.0 + pr * eps2[pair_partner(k)]) * inv_sigma_total);
    uplink.min(downlink)
}

/// Large-`N` closed-form sum rate: per link `1/2 log2(1 + pi N x / 4)`.
pub fn closed_form_theorem1(scenario: &Scenario) -> Result<RateReport> {
    scenario.validate()?;
    let (sigma2, eps2) = per_user_variances(scenario)?;
    let n = scenario.antennas as f64;
    let per_link: Vec<f64> = (0..scenario.users())
        .map(|k| {
            let x = closed_form_x(scenario, &sigma2, &eps2, k);
            0.5 * (1.0 + std::f64::consts::PI * n * x / 4.0).log2()
        })
        .collect();
    Ok(RateReport::from_links(
        per_link,
        RateMethod::ClosedFormTheorem1,
        0,
    ))
}

/// Full-digital ZF benchmark: per link `1/2 log2(1 + (N - 2K) x)`.
pub fn full_digital_rate(scenario: &Scenario) -> Result<RateReport> {
    scenario.validate()?;
    if scenario.antennas <= scenario.users() {
        return Err(Error::InvalidParameter(format!(
            "full-digital benchmark needs N > 2K (N = {}, 2K = {})",
            scenario.antennas,
            scenario.users()
        )));
    }
    let (sigma2, eps2) = per_user_variances(scenario)?;
    let excess = (scenario.antennas - scenario.users()) as f64;
    let per_link: Vec<f64> = (0..scenario.users())
        .map(|k| {
            let x = closed_form_x(scenario, &sigma2, &eps2, k);
            0.5 * (1.0 + excess * x).log2()
        })
        .collect();
    Ok(RateReport::from_links(
        per_link,
        RateMethod::ClosedFormFullDigital,
        0,
    ))
}

/// Outcome of the interference-mitigation condition `N > floor(4 L^2 / pi)`.
#[derive(Debug, Clone, Copy)]
pub struct ConditionCheck {
    pub satisfied: bool,
    /// `N - floor(4 L^2 / pi)`; positive iff satisfied.
    pub margin: i64,
    /// Largest RF-chain count the antenna count supports.
    pub max_rf_chains: usize,
}

/// Check the closed form's validity condition for `N` antennas and `L` RF chains.
pub fn condition_check(antennas: usize, rf_chains: usize) -> ConditionCheck {
    let l = rf_chains as f64;
    let threshold = (4.0 * l * l / std::f64::consts::PI).floor() as i64;
    let margin = antennas as i64 - threshold;
    ConditionCheck {
        satisfied: margin > 0,
        margin,
        max_rf_chains: (std::f64::consts::PI * antennas as f64 / 4.0).sqrt().floor() as usize,
    }
}

/// Which powers shrink with the antenna count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalingCase {
    /// Pilot power stays fixed at the scenario's value.
    FixedPilot,
    /// Pilot power scales with the user power (`P_p = P_s`).
    ScaledPilot,
}

/// Power scaling `P_s = E_s / N^alpha`, `P_r = 2K E_r / N^alpha`.
#[derive(Debug, Clone, Copy)]
pub struct ScalingSpec {
    pub alpha: f64,
    /// Fixed per-user power budget `E_s`.
    pub user_budget: f64,
    /// Fixed relay power budget `E_r`.
    pub relay_budget: f64,
    pub case: ScalingCase,
}

/// Equal-path-loss closed-form sum rate evaluated at the scaled powers.
///
/// The scenario supplies `N`, `K`, `tau`, the common gain, and the fixed-pilot
/// power; the scaling spec supplies the rest.
pub fn scaled_sum_rate(scenario: &Scenario, spec: &ScalingSpec) -> Result<RateReport> {
    scenario.validate()?;
    if !(spec.alpha > 0.0) {
        return Err(Error::InvalidParameter("alpha must be positive".into()));
    }
    let beta = equal_gain(scenario)?;
    let n = scenario.antennas as f64;
    let k = scenario.pairs as f64;
    let ps = spec.user_budget / n.powf(spec.alpha);
    let pr = 2.0 * k * spec.relay_budget / n.powf(spec.alpha);
    let pp = match spec.case {
        ScalingCase::FixedPilot => scenario.pilot_power,
        ScalingCase::ScaledPilot => ps,
    };
    let (sigma2, eps2) = channel::estimation_variances(beta, scenario.pilot_len, pp)?;
    Ok(equal_path_loss_rate(
        scenario.antennas,
        scenario.pairs,
        sigma2,
        eps2,
        ps,
        pr,
    ))
}

/// `N -> infinity` limit of [`scaled_sum_rate`] at `alpha = 1` (fixed pilot)
/// or `alpha = 1/2` (scaled pilot); other exponents diverge or vanish.
pub fn scaling_limit(scenario: &Scenario, spec: &ScalingSpec) -> Result<f64> {
    let beta = equal_gain(scenario)?;
    let k = scenario.pairs as f64;
    let tau = scenario.pilot_len as f64;
    let pi = std::f64::consts::PI;
    let arg = match spec.case {
        ScalingCase::FixedPilot => {
            let (sigma2, _) =
                channel::estimation_variances(beta, scenario.pilot_len, scenario.pilot_power)?;
            spec.user_budget.min(spec.relay_budget) * pi * sigma2 / 4.0
        }
        ScalingCase::ScaledPilot => {
            pi * tau * spec.user_budget * spec.user_budget.min(spec.relay_budget) * beta * beta
                / 4.0
        }
    };
    Ok(k * (1.0 + arg).log2())
}

fn equal_gain(scenario: &Scenario) -> Result<f64> {
    let beta = scenario.gains[0];
    if scenario.gains.iter().any(|&b| b != beta) {
        return Err(Error::InvalidParameter(
            "equal path loss required for this expression".into(),
        ));
    }
    Ok(beta)
}

/// Equal-path-loss closed form: `K log2(1 + min{up, down})` spread evenly
/// over the 2K links.
pub fn equal_path_loss_rate(
    antennas: usize,
    pairs: usize,
    sigma2: f64,
    eps2: f64,
    user_power: f64,
    relay_power: f64,
) -> RateReport {
    let n = antennas as f64;
    let k = pairs as f64;
    let pi = std::f64::consts::PI;
    let uplink = user_power * pi * n * sigma2 / (4.0 * (1.0 + 2.0 * k * user_power * eps2));
    let downlink = relay_power * pi * n * sigma2 / (8.0 * k * (1.0 + relay_power * eps2));
    let sum = k * (1.0 + uplink.min(downlink)).log2();
    let users = 2 * pairs;
    RateReport::from_links(
        vec![sum / users as f64; users],
        RateMethod::ClosedFormTheorem1,
        0,
    )
}

/// Monte Carlo statistics of `X = ||A D^{-1}||_F^2` for the equivalent
/// channel decomposition `H_eq = D + A`, against the asymptotic mean
/// `8K(2K-1)/(pi N)` and variance `32K(2K-1)/(pi^2 N^2)`.
#[derive(Debug, Clone, Copy)]
pub struct ConvergenceStats {
    pub mean: f64,
    pub variance: f64,
    pub theory_mean: f64,
    pub theory_variance: f64,
    pub trials: usize,
}

pub fn convergence_diagnostic(
    scenario: &Scenario,
    trials: usize,
    seed: u64,
) -> Result<ConvergenceStats> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    scenario.validate()?;
    let users = scenario.users();
    let samples: Result<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, "convergence", t);
            let realization = channel::generate(scenario, &mut rng)?;
            let analog = hybrid::analog_combiner(&realization.estimate);
            let equivalent = &analog * &realization.estimate;
            let mut x = 0.0;
            for k in 0..users {
                let d = equivalent[(k, k)].norm_sqr();
                for j in 0..users {
                    if j != k {
                        x += equivalent[(j, k)].norm_sqr() / d;
                    }
                }
            }
            Ok(x)
        })
        .collect();
    let samples = samples?;
    let nf = trials as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let variance = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / nf;
    let k = scenario.pairs as f64;
    let n = scenario.antennas as f64;
    let pi = std::f64::consts::PI;
    Ok(ConvergenceStats {
        mean,
        variance,
        theory_mean: 8.0 * k * (2.0 * k - 1.0) / (pi * n),
        theory_variance: 32.0 * k * (2.0 * k - 1.0) / (pi * pi * n * n),
        trials,
    })
}

/// One row of the ratio-moment table: `E{a^2/(y+a)^2}` for `y ~ N(0, sigma^2)`.
#[derive(Debug, Clone, Copy)]
pub struct RatioMomentRow {
    pub a: f64,
    pub estimate: f64,
    /// `estimate - 1`.
    pub deviation: f64,
    /// Leading series correction `3 sigma^2 / a^2`.
    pub first_correction: f64,
}

pub fn ratio_moment_check(
    sigma: f64,
    a_values: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<RatioMomentRow>> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    if sigma < 0.0 {
        return Err(Error::InvalidParameter("sigma must be nonnegative".into()));
    }
    a_values
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            if !(a > 0.0) {
                return Err(Error::InvalidParameter("a must be positive".into()));
            }
            let sum: f64 = (0..trials as u64)
                .into_par_iter()
                .map(|t| {
                    use rand_distr::{Distribution, Normal};
                    let mut rng = trial_rng(seed, "ratio_moment", (i as u64) << 32 | t);
                    let y = if sigma == 0.0 {
                        0.0
                    } else {
                        Normal::new(0.0, sigma).unwrap().sample(&mut rng)
                    };
                    a * a / ((y + a) * (y + a))
                })
                .sum();
            let estimate = sum / trials as f64;
            Ok(RatioMomentRow {
                a,
                estimate,
                deviation: estimate - 1.0,
                first_correction: 3.0 * sigma * sigma / (a * a),
            })
        })
        .collect()
}

/// Training-overhead discount applied to a rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverheadMode {
    /// Round-robin training with limited RF chains: factor `(T - N)/T`.
    LimitedRf,
    /// Full RF chains: factor `(T - 2K)/T`.
    FullRf,
}

pub fn throughput_with_overhead(
    rate: f64,
    coherence: usize,
    antennas: usize,
    pairs: usize,
    mode: OverheadMode,
) -> Result<f64> {
    let t = coherence as f64;
    let factor = match mode {
        OverheadMode::LimitedRf => {
            if coherence < antennas {
                return Err(Error::InvalidParameter(
                    "coherence time shorter than training length N".into(),
                ));
            }
            (t - antennas as f64) / t
        }
        OverheadMode::FullRf => {
            if coherence < 2 * pairs {
                return Err(Error::InvalidParameter(
                    "coherence time shorter than training length 2K".into(),
                ));
            }
            (t - 2.0 * pairs as f64) / t
        }
    };
    Ok(rate * factor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::gen_rayleigh;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn scenario(n: usize, k: usize, ps: f64, pr: f64, pp: f64) -> Scenario {
        Scenario::equal_gains(n, k, ps, pr, pp, 2 * k, 1.0).unwrap()
    }

    #[test]
    fn perfect_csi_kills_interference() {
        let scn = scenario(64, 3, 10.0, 100.0, f64::INFINITY);
        let mut rng = trial_rng(0, "sinr", 0);
        let r = gen_rayleigh(&scn, &mut rng).unwrap();
        let w = hybrid::build(&scn, &r).unwrap();
        let combined = &w.digital_combiner * &w.analog_combiner;
        for k in 0..scn.users() {
            let gamma = sinr_uplink(k, &w, &r.true_channel, scn.user_power);
            let expected = scn.user_power / combined.row(k).norm_squared();
            assert_relative_eq!(gamma, expected, max_relative = 1e-6);
        }
        // downlink: gamma = P_r mu^2
        for k in 0..scn.users() {
            let gamma = sinr_downlink(k, &w, &r.true_channel, scn.relay_power);
            let expected = scn.relay_power * w.normalization * w.normalization;
            assert_relative_eq!(gamma, expected, max_relative = 1e-6);
        }
    }

    #[test]
    fn zero_power_zero_sinr() {
        let scn = scenario(32, 2, 1.0, 1.0, 10.0);
        let mut rng = trial_rng(1, "zero", 0);
        let r = gen_rayleigh(&scn, &mut rng).unwrap();
        let w = hybrid::build(&scn, &r).unwrap();
        assert_eq!(sinr_uplink(0, &w, &r.true_channel, 0.0), 0.0);
        assert_eq!(sinr_downlink(0, &w, &r.true_channel, 0.0), 0.0);
    }

    #[test]
    fn uplink_mean_asymptotic_scale() {
        // E{gamma} * 4 / (P_s sigma_k^2 pi N) -> 1, perfect CSI
        let scn = scenario(512, 5, 2.0, 20.0, f64::INFINITY);
        let trials = 2000u64;
        let mut acc = 0.0;
        for t in 0..trials {
            let mut rng = trial_rng(2, "upmean", t);
            let r = gen_rayleigh(&scn, &mut rng).unwrap();
            let w = hybrid::build(&scn, &r).unwrap();
            acc += sinr_uplink(0, &w, &r.true_channel, scn.user_power);
        }
        let ratio = (acc / trials as f64) * 4.0 / (scn.user_power * PI * 512.0);
        assert_relative_eq!(ratio, 1.0, max_relative = 0.05);
    }

    #[test]
    fn downlink_mean_asymptotic_scale() {
        let scn = scenario(512, 5, 2.0, 20.0, f64::INFINITY);
        let trials = 2000u64;
        let mut acc = 0.0;
        for t in 0..trials {
            let mut rng = trial_rng(3, "downmean", t);
            let r = gen_rayleigh(&scn, &mut rng).unwrap();
            let w = hybrid::build(&scn, &r).unwrap();
            acc += sinr_downlink(0, &w, &r.true_channel, scn.relay_power);
        }
        // E{gamma} * (sum_j 4/(sigma_j^2 pi N)) / P_r -> 1
        let scale = 10.0 * 4.0 / (PI * 512.0);
        let ratio = (acc / trials as f64) * scale / scn.relay_power;
        assert_relative_eq!(ratio, 1.0, max_relative = 0.05);
    }

    #[test]
    fn mc_single_trial_deterministic() {
        let scn = scenario(32, 2, 10.0, 40.0, 10.0);
        let a = mc_sum_rate(&scn, 1, 42).unwrap();
        let b = mc_sum_rate(&scn, 1, 42).unwrap();
        assert_eq!(a.per_link, b.per_link);
        assert_eq!(a.sum, b.sum);
    }

    #[test]
    fn mc_close_to_closed_form() {
        let scn = scenario(64, 5, 10.0, 100.0, 10.0);
        let mc = mc_sum_rate(&scn, 2000, 7).unwrap();
        let cf = closed_form_theorem1(&scn).unwrap();
        let gap = (mc.sum - cf.sum).abs() / cf.sum;
        assert!(gap < 0.05, "gap {gap}");
    }

    #[test]
    fn quantized_b4_close_to_ideal() {
        let mut scn = scenario(256, 5, 10.0, 100.0, 10.0);
        let ideal = mc_sum_rate(&scn, 300, 11).unwrap();
        scn.shifter = crate::channel::PhaseShifter::Quantized { bits: 4 };
        let quant = mc_sum_rate(&scn, 300, 11).unwrap();
        let gap = (ideal.sum - quant.sum).abs() / ideal.sum;
        assert!(gap < 0.02, "gap {gap}");
    }

    #[test]
    fn hardening_bound_below_mc() {
        let scn = scenario(128, 3, 10.0, 60.0, 10.0);
        let mc = mc_sum_rate(&scn, 1500, 13).unwrap();
        let bound = hardening_bound_rate(&scn, 1500, 13).unwrap();
        let slack: f64 = mc
            .stderr
            .as_ref()
            .unwrap()
            .iter()
            .map(|s| 3.0 * s)
            .sum::<f64>();
        assert!(
            bound.sum <= mc.sum + slack,
            "bound {} vs mc {} (+{slack})",
            bound.sum,
            mc.sum
        );
    }

    #[test]
    fn hardening_bound_near_closed_form_at_large_n() {
        let scn = scenario(512, 2, 2.0, 8.0, 10.0);
        let bound = hardening_bound_rate(&scn, 2000, 17).unwrap();
        let cf = closed_form_theorem1(&scn).unwrap();
        assert_relative_eq!(bound.sum / cf.sum, 1.0, max_relative = 0.03);
    }

    #[test]
    fn closed_form_landmark_value() {
        // N=256, K=5, perfect CSI, beta=1, P_s=1, P_r=10 -> R_sum = 5 log2(1 + pi*256/4)
        let scn = scenario(256, 5, 1.0, 10.0, f64::INFINITY);
        let cf = closed_form_theorem1(&scn).unwrap();
        let expected = 5.0 * (1.0 + PI * 256.0 / 4.0).log2();
        assert_relative_eq!(cf.sum, expected, max_relative = 1e-12);
        assert_relative_eq!(cf.per_link[0], expected / 10.0, max_relative = 1e-12);
        // spec's rounded landmark
        assert!((cf.sum - 38.29).abs() < 0.02);
    }

    #[test]
    fn closed_form_min_args_equal_when_balanced() {
        // eps -> 0 and P_r = 2K P_s make both arguments of the min equal
        let scn = scenario(128, 4, 3.0, 24.0, f64::INFINITY);
        let (sigma2, eps2) = per_user_variances(&scn).unwrap();
        let eps_total: f64 = eps2.iter().sum();
        let inv_sig: f64 = sigma2.iter().map(|s| 1.0 / s).sum();
        let up = scn.user_power * sigma2[0] / (1.0 + scn.user_power * eps_total);
        let down = scn.relay_power / ((1.0 + scn.relay_power * eps2[1]) * inv_sig);
        assert_relative_eq!(up, down, max_relative = 1e-12);
    }

    #[test]
    fn closed_form_monotone_in_powers() {
        let base = scenario(256, 3, 1.0, 6.0, 10.0);
        let r0 = closed_form_theorem1(&base).unwrap().sum;
        let mut more_ps = base.clone();
        more_ps.user_power *= 2.0;
        let mut more_pr = base.clone();
        more_pr.relay_power *= 2.0;
        assert!(closed_form_theorem1(&more_ps).unwrap().sum >= r0);
        assert!(closed_form_theorem1(&more_pr).unwrap().sum >= r0);
    }

    #[test]
    fn full_digital_values() {
        // N=256, 2K=10, x=1 -> per-link 0.5 log2(247)
        let scn = scenario(256, 5, 1.0, 10.0, f64::INFINITY);
        let fd = full_digital_rate(&scn).unwrap();
        assert_relative_eq!(fd.per_link[0], 0.5 * 247.0f64.log2(), max_relative = 1e-12);
        assert!((fd.per_link[0] - 3.9743).abs() < 1e-3);

        // boundary N = 2K + 1 -> 0.5 log2(1 + x)
        let scn = scenario(7, 3, 1.0, 6.0, f64::INFINITY);
        let fd = full_digital_rate(&scn).unwrap();
        let (sigma2, eps2) = per_user_variances(&scn).unwrap();
        let x = closed_form_x(&scn, &sigma2, &eps2, 0);
        assert_relative_eq!(fd.per_link[0], 0.5 * (1.0 + x).log2(), max_relative = 1e-12);

        let scn = scenario(6, 3, 1.0, 6.0, f64::INFINITY);
        assert!(full_digital_rate(&scn).is_err());
    }

    #[test]
    fn full_digital_crossover() {
        // full digital exceeds the hybrid closed form iff N - 2K > pi N / 4
        for (n, k) in [(64usize, 5usize), (256, 5), (64, 2)] {
            let scn = scenario(n, k, 1.0, 2.0 * k as f64, f64::INFINITY);
            let hybrid_rate = closed_form_theorem1(&scn).unwrap().per_link[0];
            let full = full_digital_rate(&scn).unwrap().per_link[0];
            let lhs = (n - 2 * k) as f64;
            let rhs = PI * n as f64 / 4.0;
            assert_eq!(full > hybrid_rate, lhs > rhs, "N={n} K={k}");
        }
    }

    #[test]
    fn condition_check_values() {
        assert_eq!(condition_check(1000, 20).max_rf_chains, 28);
        // L=10 requires N > 127
        assert!(!condition_check(127, 10).satisfied);
        assert!(condition_check(128, 10).satisfied);
        // L=1: N > 1 suffices
        assert!(condition_check(2, 1).satisfied);
    }

    #[test]
    fn scaling_case1_converges() {
        let scn = |n| scenario(n, 5, 1.0, 1.0, 10.0);
        let spec = ScalingSpec {
            alpha: 1.0,
            user_budget: 10.0,
            relay_budget: 10.0,
            case: ScalingCase::FixedPilot,
        };
        let limit = scaling_limit(&scn(16), &spec).unwrap();
        let at_4096 = scaled_sum_rate(&scn(4096), &spec).unwrap().sum;
        assert_relative_eq!(at_4096, limit, max_relative = 0.01);
        // alpha = 1 at N and 4N within 1% for N >= 4096
        let a = scaled_sum_rate(&scn(4096), &spec).unwrap().sum;
        let b = scaled_sum_rate(&scn(16384), &spec).unwrap().sum;
        assert!((a - b).abs() / b < 0.01);
    }

    #[test]
    fn scaling_case1_oversteep_vanishes() {
        let spec = ScalingSpec {
            alpha: 1.5,
            user_budget: 10.0,
            relay_budget: 10.0,
            case: ScalingCase::FixedPilot,
        };
        let mut prev = f64::INFINITY;
        for n in [1024usize, 4096, 16384, 65536] {
            let scn = scenario(n, 5, 1.0, 1.0, 10.0);
            let r = scaled_sum_rate(&scn, &spec).unwrap().sum;
            assert!(r < prev);
            prev = r;
        }
        assert!(prev < 0.5);
    }

    #[test]
    fn scaling_case2_converges() {
        let spec = ScalingSpec {
            alpha: 0.5,
            user_budget: 0.1,
            relay_budget: 0.1,
            case: ScalingCase::ScaledPilot,
        };
        let scn = |n| scenario(n, 5, 1.0, 1.0, 10.0);
        let limit = scaling_limit(&scn(16), &spec).unwrap();
        let at_big = scaled_sum_rate(&scn(1 << 20), &spec).unwrap().sum;
        assert_relative_eq!(at_big, limit, max_relative = 0.01);
    }

    #[test]
    fn convergence_diagnostic_matches_formula() {
        let scn = scenario(256, 5, 1.0, 10.0, f64::INFINITY);
        let stats = convergence_diagnostic(&scn, 2000, 23).unwrap();
        assert_relative_eq!(stats.theory_mean, 360.0 / (PI * 256.0), max_relative = 1e-12);
        assert_relative_eq!(stats.mean, stats.theory_mean, max_relative = 0.05);

        // K = 1: E{X} = 8/(pi N)
        let scn = scenario(128, 1, 1.0, 2.0, f64::INFINITY);
        let stats = convergence_diagnostic(&scn, 1, 0).unwrap();
        assert_relative_eq!(stats.theory_mean, 8.0 / (PI * 128.0), max_relative = 1e-12);
    }

    #[test]
    fn convergence_diagnostic_halves_with_n() {
        let a = convergence_diagnostic(&scenario(128, 3, 1.0, 6.0, f64::INFINITY), 2000, 29)
            .unwrap()
            .mean;
        let b = convergence_diagnostic(&scenario(256, 3, 1.0, 6.0, f64::INFINITY), 2000, 29)
            .unwrap()
            .mean;
        assert_relative_eq!(a / b, 2.0, max_relative = 0.1);
    }

    #[test]
    fn ratio_moment_behaviour() {
        let rows = ratio_moment_check(1.0, &[10.0, 30.0, 100.0, 300.0], 400_000, 31).unwrap();
        // deviation decreases monotonically in a
        for w in rows.windows(2) {
            assert!(w[1].deviation.abs() < w[0].deviation.abs());
        }
        // sigma = 1, a = 100 -> deviation ~ 3e-4
        let d = rows[2].deviation;
        assert!(d > 1.0e-4 && d < 6.0e-4, "deviation {d}");

        // degenerate sigma = 0 -> exactly 1
        let rows = ratio_moment_check(0.0, &[5.0], 10, 0).unwrap();
        assert_eq!(rows[0].estimate, 1.0);
    }

    #[test]
    fn overhead_factors() {
        // T=600, 2K=4, N=64: ratio of factors is 596/536
        let full = throughput_with_overhead(1.0, 600, 64, 2, OverheadMode::FullRf).unwrap();
        let limited = throughput_with_overhead(1.0, 600, 64, 2, OverheadMode::LimitedRf).unwrap();
        assert_relative_eq!(full / limited, 596.0 / 536.0, max_relative = 1e-12);
        // T = N -> zero throughput in limited mode
        assert_eq!(
            throughput_with_overhead(3.0, 64, 64, 2, OverheadMode::LimitedRf).unwrap(),
            0.0
        );
        // T -> large: factor -> 1
        let f = throughput_with_overhead(1.0, 10_000_000, 64, 2, OverheadMode::LimitedRf).unwrap();
        assert!((f - 1.0).abs() < 1e-4);
    }

    #[test]
    fn saturation_with_imperfect_csi() {
        // rate(P_s = 1e4) - rate(P_s = 1e3) < 0.1 bits/s/Hz per link
        let mk = |ps: f64| scenario(128, 2, ps, 4.0 * ps, 10.0);
        let lo = mc_sum_rate(&mk(1e3), 500, 37).unwrap();
        let hi = mc_sum_rate(&mk(1e4), 500, 37).unwrap();
        for k in 0..4 {
            assert!((hi.per_link[k] - lo.per_link[k]).abs() < 0.1);
        }
    }
}
