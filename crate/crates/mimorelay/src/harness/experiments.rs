//! Named experiments behind the CLI, one per replicated figure.
//!
//! Defaults are desk-scale grids; `full = true` densifies them. All sweeps
//! are deterministic in (config, seed) regardless of worker count because
//! every Monte Carlo trial draws from its own substream.

use crate::channel::{ChannelModel, PhaseShifter, Scenario};
use crate::energy::{self, EePoint, PowerModel};
use crate::error::{Error, Result};
use crate::harness::config::{db_to_linear, Config};
use crate::harness::emit::{Cell, Table};
use crate::rate::{self, OverheadMode};

const EXPERIMENTS: &[&str] = &[
    "rate-vs-snr",
    "power-scaling",
    "quantization",
    "overhead-throughput",
    "coherence-time",
    "mmwave-rate",
    "ee-surface",
    "ee-constraint",
    "ee-contour",
    "green-points",
    "ee-vs-L",
];

/// Names accepted by [`run_experiment`], in figure order.
pub fn list_experiments() -> &'static [&'static str] {
    EXPERIMENTS
}

/// Options forwarded from the CLI that are not part of the physics.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Suppress the stderr warning about closed forms outside their
    /// validity region (used by tests).
    pub quiet: bool,
}

/// Dispatch a parsed config to its experiment and collect the result table.
pub fn run_experiment(cfg: &Config) -> Result<Table> {
    run_experiment_with(cfg, RunOptions::default())
}

pub fn run_experiment_with(cfg: &Config, opts: RunOptions) -> Result<Table> {
    match cfg.experiment.as_str() {
        "rate-vs-snr" => rate_vs_snr(cfg, opts),
        "power-scaling" => power_scaling(cfg),
        "quantization" => quantization(cfg),
        "overhead-throughput" => overhead_throughput(cfg),
        "coherence-time" => coherence_time(cfg),
        "mmwave-rate" => mmwave_rate(cfg),
        "ee-surface" => ee_grid(cfg, "ee-surface"),
        "ee-contour" => ee_grid(cfg, "ee-contour"),
        "ee-constraint" => ee_constraint(cfg),
        "green-points" => green_points(cfg),
        "ee-vs-L" => ee_vs_rf_chains(cfg),
        other => Err(Error::UnknownExperiment(other.to_string())),
    }
}

fn db_grid(lo: i32, hi: i32, step: i32) -> Vec<f64> {
    (lo..=hi).step_by(step as usize).map(f64::from).collect()
}

fn sum_stderr(per_link: &[f64]) -> f64 {
    per_link.iter().map(|s| s * s).sum::<f64>().sqrt()
}

fn warn_condition(experiment: &str, antennas: usize, rf_chains: usize, quiet: bool) {
    let check = rate::condition_check(antennas, rf_chains);
    if !check.satisfied && !quiet {
        eprintln!(
            "warning: {experiment}: N = {antennas} does not satisfy the validity \
             condition for L = {rf_chains} RF chains (needs N > {}); closed-form \
             columns are extrapolations there",
            antennas as i64 - check.margin
        );
    }
}

fn rate_vs_snr(cfg: &Config, opts: RunOptions) -> Result<Table> {
    let k = cfg.pairs.unwrap_or(5);
    let tau = cfg.pilot_len.unwrap_or(2 * k);
    let pp = cfg.pilot_power.unwrap_or(10.0);
    let beta = cfg.gain.unwrap_or(1.0);
    let ns = match cfg.antennas {
        Some(n) => vec![n],
        None if cfg.full => vec![64, 128, 256, 512],
        None => vec![64, 256],
    };
    let snrs = db_grid(-10, 20, if cfg.full { 2 } else { 5 });

    let mut table = Table::new(
        "rate-vs-snr",
        &["n", "snr_db", "mc_rate", "mc_stderr", "closed_form", "full_digital"],
    );
    for &n in &ns {
        warn_condition("rate-vs-snr", n, 2 * k, opts.quiet);
        for &snr in &snrs {
            let ps = db_to_linear(snr);
            let scn = Scenario::equal_gains(n, k, ps, 2.0 * k as f64 * ps, pp, tau, beta)?;
            let label = format!("rate-vs-snr/N={n}/snr={snr}");
            let mc = rate::mc_sum_rate_labeled(&scn, cfg.trials, cfg.seed, &label)?;
            let cf = rate::closed_form_theorem1(&scn)?;
            let fd = rate::full_digital_rate(&scn)?;
            table.push(vec![
                n.into(),
                snr.into(),
                mc.sum.into(),
                sum_stderr(mc.stderr.as_deref().unwrap_or(&[])).into(),
                cf.sum.into(),
                fd.sum.into(),
            ]);
        }
    }
    Ok(table)
}

fn power_scaling(cfg: &Config) -> Result<Table> {
    let k = cfg.pairs.unwrap_or(5);
    let tau = cfg.pilot_len.unwrap_or(2 * k);
    let pp = cfg.pilot_power.unwrap_or(10.0);
    let beta = cfg.gain.unwrap_or(1.0);
    let es = cfg.user_budget.unwrap_or(10.0);
    let er = cfg.relay_budget.unwrap_or(10.0);
    let alpha1 = cfg.alpha.unwrap_or(1.0);
    let mut ns = vec![64usize, 256, 1024, 4096];
    if cfg.full {
        ns.extend([16384, 65536]);
    }

    let mut table = Table::new(
        "power-scaling",
        &["case", "alpha", "n", "closed_form", "limit"],
    );
    let cases = [
        (1i64, alpha1, rate::ScalingCase::FixedPilot),
        (2, alpha1 / 2.0, rate::ScalingCase::ScaledPilot),
    ];
    for (case, alpha, kind) in cases {
        let spec = rate::ScalingSpec {
            alpha,
            user_budget: es,
            relay_budget: er,
            case: kind,
        };
        for &n in &ns {
            let scn = Scenario::equal_gains(n, k, 1.0, 1.0, pp, tau, beta)?;
            let value = rate::scaled_sum_rate(&scn, &spec)?.sum;
            let limit = rate::scaling_limit(&scn, &spec)?;
            table.push(vec![
                Cell::Int(case),
                alpha.into(),
                n.into(),
                value.into(),
                limit.into(),
            ]);
        }
    }
    Ok(table)
}

fn quantization(cfg: &Config) -> Result<Table> {
    let n = cfg.antennas.unwrap_or(256);
    let k = cfg.pairs.unwrap_or(5);
    let tau = cfg.pilot_len.unwrap_or(2 * k);
    let pp = cfg.pilot_power.unwrap_or(10.0);
    let beta = cfg.gain.unwrap_or(1.0);
    let bit_choices: Vec<Option<u32>> = match cfg.bits {
        Some(b) => vec![None, Some(b)],
        None => vec![None, Some(1), Some(2), Some(4)],
    };
    let snrs = db_grid(-10, 20, if cfg.full { 2 } else { 5 });

    let mut table = Table::new("quantization", &["bits", "snr_db", "mc_rate", "mc_stderr"]);
    for &bits in &bit_choices {
        for &snr in &snrs {
            let ps = db_to_linear(snr);
            let mut scn = Scenario::equal_gains(n, k, ps, 2.0 * k as f64 * ps, pp, tau, beta)?;
            let tag = match bits {
                Some(b) => {
                    scn.shifter = PhaseShifter::Quantized { bits: b };
                    b.to_string()
                }
                None => "ideal".to_string(),
            };
            let label = format!("quantization/B={tag}/snr={snr}");
            let mc = rate::mc_sum_rate_labeled(&scn, cfg.trials, cfg.seed, &label)?;
            table.push(vec![
                Cell::Text(tag),
                snr.into(),
                mc.sum.into(),
                sum_stderr(mc.stderr.as_deref().unwrap_or(&[])).into(),
            ]);
        }
    }
    Ok(table)
}

fn overhead_throughput(cfg: &Config) -> Result<Table> {
    let n = cfg.antennas.unwrap_or(64);
    let k = cfg.pairs.unwrap_or(4);
    let tau = cfg.pilot_len.unwrap_or(2 * k);
    let t = cfg.coherence.unwrap_or(600);
    let pp = cfg.pilot_power.unwrap_or(10.0);
    let beta = cfg.gain.unwrap_or(1.0);
    let snrs = db_grid(-10, 20, if cfg.full { 2 } else { 5 });

    let mut table = Table::new(
        "overhead-throughput",
        &[
            "snr_db",
            "hybrid_rate",
            "hybrid_throughput",
            "full_digital_rate",
            "full_digital_throughput",
        ],
    );
    for &snr in &snrs {
        let ps = db_to_linear(snr);
        let scn = Scenario::equal_gains(n, k, ps, 2.0 * k as f64 * ps, pp, tau, beta)?;
        let label = format!("overhead-throughput/snr={snr}");
        let hybrid = rate::mc_sum_rate_labeled(&scn, cfg.trials, cfg.seed, &label)?.sum;
        let full = rate::full_digital_rate(&scn)?.sum;
        table.push(vec![
            snr.into(),
            hybrid.into(),
            rate::throughput_with_overhead(hybrid, t, n, k, OverheadMode::LimitedRf)?.into(),
            full.into(),
            rate::throughput_with_overhead(full, t, n, k, OverheadMode::FullRf)?.into(),
        ]);
    }
    Ok(table)
}

fn coherence_time(cfg: &Config) -> Result<Table> {
    let n = cfg.antennas.unwrap_or(64);
    let k = cfg.pairs.unwrap_or(4);
    let tau = cfg.pilot_len.unwrap_or(2 * k);
    let ps = cfg.user_power.unwrap_or_else(|| db_to_linear(5.0));
    let pp = cfg.pilot_power.unwrap_or_else(|| db_to_linear(5.0));
    let beta = cfg.gain.unwrap_or(1.0);
    let ts: Vec<usize> = if cfg.full {
        (2..=40).map(|i| i * 50).collect()
    } else {
        (1..=10).map(|i| i * 100).collect()
    };

    let scn = Scenario::equal_gains(n, k, ps, 2.0 * k as f64 * ps, pp, tau, beta)?;
    let hybrid = rate::mc_sum_rate_labeled(&scn, cfg.trials, cfg.seed, "coherence-time")?.sum;
    let full = rate::full_digital_rate(&scn)?.sum;

    let mut table = Table::new(
        "coherence-time",
        &["t", "hybrid_throughput", "full_digital_throughput"],
    );
    for &t in &ts {
        table.push(vec![
            t.into(),
            rate::throughput_with_overhead(hybrid, t, n, k, OverheadMode::LimitedRf)?.into(),
            rate::throughput_with_overhead(full, t, n, k, OverheadMode::FullRf)?.into(),
        ]);
    }
    Ok(table)
}

fn mmwave_rate(cfg: &Config) -> Result<Table> {
    let k = cfg.pairs.unwrap_or(5);
    let tau = cfg.pilot_len.unwrap_or(2 * k);
    let pp = cfg.pilot_power.unwrap_or(10.0);
    let beta = cfg.gain.unwrap_or(1.0);
    let paths = cfg.paths.unwrap_or(10);
    let spacing = cfg.spacing.unwrap_or(0.5);
    let ns = match cfg.antennas {
        Some(n) => vec![n],
        None if cfg.full => vec![64, 128, 256, 512],
        None => vec![64, 256],
    };
    let snrs = db_grid(-10, 20, if cfg.full { 2 } else { 5 });

    let mut table = Table::new("mmwave-rate", &["n", "snr_db", "mc_rate", "mc_stderr"]);
    for &n in &ns {
        for &snr in &snrs {
            let ps = db_to_linear(snr);
            let mut scn = Scenario::equal_gains(n, k, ps, 2.0 * k as f64 * ps, pp, tau, beta)?;
            scn.model = ChannelModel::MmWave { paths, spacing };
            let label = format!("mmwave-rate/N={n}/snr={snr}");
            let mc = rate::mc_sum_rate_labeled(&scn, cfg.trials, cfg.seed, &label)?;
            table.push(vec![
                n.into(),
                snr.into(),
                mc.sum.into(),
                sum_stderr(mc.stderr.as_deref().unwrap_or(&[])).into(),
            ]);
        }
    }
    Ok(table)
}

fn power_model(cfg: &Config) -> PowerModel {
    PowerModel {
        amp_efficiency: cfg.amp_efficiency.unwrap_or(0.375),
        rf_chain_power: cfg.rf_chain_power.unwrap_or(1.0),
        static_power: cfg.static_power.unwrap_or(20.0),
        shifter_power: cfg.shifter_power.unwrap_or(0.02),
    }
}

fn ee_point(cfg: &Config, antennas: usize, pairs: usize) -> EePoint {
    EePoint {
        antennas,
        pairs,
        gain: cfg.gain.unwrap_or(1.0),
        pilot_len: cfg.pilot_len.unwrap_or(10),
        pilot_power: cfg.pilot_power.unwrap_or(10.0),
        model: power_model(cfg),
    }
}

fn ee_grid(cfg: &Config, name: &str) -> Result<Table> {
    let point = ee_point(cfg, cfg.antennas.unwrap_or(256), cfg.pairs.unwrap_or(5));
    let step = if cfg.full { 1 } else { 2 };
    let grid = db_grid(-20, 20, step);

    let mut table = Table::new(name, &["ps_db", "pr_db", "se", "ee"]);
    for &ps_db in &grid {
        for &pr_db in &grid {
            let ps = db_to_linear(ps_db);
            let pr = db_to_linear(pr_db);
            table.push(vec![
                ps_db.into(),
                pr_db.into(),
                point.spectral_efficiency(ps, pr)?.into(),
                point.energy_efficiency(ps, pr)?.into(),
            ]);
        }
    }
    Ok(table)
}

fn ee_constraint(cfg: &Config) -> Result<Table> {
    let pairs = cfg.pairs.unwrap_or(5);
    let point = ee_point(cfg, cfg.antennas.unwrap_or(256), pairs);
    let pts = db_grid(-10, 30, if cfg.full { 1 } else { 2 });

    let mut table = Table::new(
        "ee-constraint",
        &["p_t_db", "ps_opt", "pr_opt", "ee_opt", "ee_equal_power"],
    );
    for &pt_db in &pts {
        let total = db_to_linear(pt_db);
        let (ps, pr) = energy::optimal_power_split(total, pairs);
        // alternative split spending the same budget with P_s = P_r
        let even = total / (2.0 * pairs as f64 + 1.0);
        table.push(vec![
            pt_db.into(),
            ps.into(),
            pr.into(),
            point.energy_efficiency(ps, pr)?.into(),
            point.energy_efficiency(even, even)?.into(),
        ]);
    }
    Ok(table)
}

fn green_points(cfg: &Config) -> Result<Table> {
    let pairs = cfg.pairs.unwrap_or(5);
    let antennas = cfg.antennas.unwrap_or(128);
    let kappa = cfg.amp_efficiency.unwrap_or(0.375);
    let combos = [
        (0.5, 5.0, 0.005),
        (0.5, 10.0, 0.01),
        (1.0, 20.0, 0.02),
        (1.0, 40.0, 0.01),
        (2.0, 40.0, 0.04),
        (2.0, 80.0, 0.02),
    ];
    let mut table = Table::new(
        "green-points",
        &["p_0", "p_const", "p_aps", "ps_star", "se_star", "ee_star", "ln_ee_star", "line_ln_ee"],
    );
    for (p0, pconst, paps) in combos {
        let point = EePoint {
            antennas,
            pairs,
            gain: cfg.gain.unwrap_or(1.0),
            pilot_len: cfg.pilot_len.unwrap_or(10),
            // the straight-line relationship holds under perfect CSI
            pilot_power: cfg.pilot_power.unwrap_or(f64::INFINITY),
            model: PowerModel {
                amp_efficiency: kappa,
                rf_chain_power: p0,
                static_power: pconst,
                shifter_power: paps,
            },
        };
        let (a0, _) = point.coefficients()?;
        let line = energy::green_point_line(a0, kappa, pairs);
        let opt = point.optimize_user_power()?;
        table.push(vec![
            p0.into(),
            pconst.into(),
            paps.into(),
            opt.user_power.into(),
            opt.spectral_efficiency.into(),
            opt.energy_efficiency.into(),
            opt.energy_efficiency.ln().into(),
            line.predict(opt.spectral_efficiency).into(),
        ]);
    }
    Ok(table)
}

fn ee_vs_rf_chains(cfg: &Config) -> Result<Table> {
    let ns = match cfg.antennas {
        Some(n) => vec![n],
        None => vec![128, 256, 512],
    };
    let ps = cfg.user_power.unwrap_or_else(|| db_to_linear(5.0));
    let pp = cfg.pilot_power.unwrap_or_else(|| db_to_linear(5.0));
    let model = PowerModel {
        shifter_power: cfg.shifter_power.unwrap_or(0.02),
        ..power_model(cfg)
    };
    let mut table = Table::new("ee-vs-L", &["n", "l", "k", "ee", "is_best"]);
    for &n in &ns {
        let scan = energy::optimize_rf_chains(
            n,
            ps,
            cfg.gain.unwrap_or(1.0),
            cfg.pilot_len.unwrap_or(10),
            pp,
            &model,
        )?;
        for &(k, ee) in &scan.per_pairs {
            table.push(vec![
                n.into(),
                (2 * k).into(),
                k.into(),
                ee.into(),
                Cell::Int((k == scan.best_pairs) as i64),
            ]);
        }
    }
    Ok(table)
}
