//! Hybrid analog/digital zero-forcing weights.
//!
//! The analog stages carry only phases (entries of modulus `1/sqrt(N)`), the
//! digital stages invert the small equivalent channel seen from baseband.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::{ChannelRealization, PhaseShifter, Scenario};
use crate::error::{Error, Result};

/// Condition number above which the equivalent channel counts as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

/// Analog/digital combining and precoding matrices of one realization.
#[derive(Debug, Clone)]
pub struct HybridWeights {
    /// Analog combiner `F_r`, `2K x N`, unit-modulus entries scaled by `1/sqrt(N)`.
    pub analog_combiner: DMatrix<Complex64>,
    /// Digital combiner `W_r = (F_r G_hat)^-1`, `2K x 2K`.
    pub digital_combiner: DMatrix<Complex64>,
    /// Analog precoder `F_t = F_r^T`, `N x 2K`.
    pub analog_precoder: DMatrix<Complex64>,
    /// Digital precoder `W_t = W_r^T P`, `2K x 2K`.
    pub digital_precoder: DMatrix<Complex64>,
    /// Transmit normalization `mu = 1 / ||F_t W_t||_F`.
    pub normalization: f64,
}

/// Pair-swap permutation: block diagonal of `K` 2x2 swap blocks.
pub fn pair_permutation(pairs: usize) -> DMatrix<Complex64> {
    let users = 2 * pairs;
    DMatrix::from_fn(users, users, |i, j| {
        if i ^ 1 == j {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Partner index of user `k` within its pair.
pub fn pair_partner(k: usize) -> usize {
    k ^ 1
}

/// Analog combiner from the phases of the channel estimate:
/// `[F_r]_{j,i} = conj(g_hat_{i,j}) / (|g_hat_{i,j}| sqrt(N))`.
///
/// A zero estimate entry gets phase 0.
pub fn analog_combiner(estimate: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = estimate.nrows();
    let users = estimate.ncols();
    let scale = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(users, n, |j, i| {
        let g = estimate[(i, j)];
        let m = g.norm();
        if m == 0.0 {
            Complex64::new(scale, 0.0)
        } else {
            g.conj() * (scale / m)
        }
    })
}

/// Snap each entry's phase to the nearest point of the `2^bits` uniform
/// codebook `{2 pi m / 2^bits}`. Ties break toward the smaller codebook index.
pub fn quantize_phases(analog: &DMatrix<Complex64>, bits: u32) -> Result<DMatrix<Complex64>> {
    if bits == 0 {
        return Err(Error::InvalidParameter(
            "quantization bits must be >= 1".into(),
        ));
    }
    let levels = 1u64 << bits;
    let step = std::f64::consts::TAU / levels as f64;
    Ok(analog.map(|z| {
        let modulus = z.norm();
        let phase = z.arg().rem_euclid(std::f64::consts::TAU);
        let lo = (phase / step).floor() as u64;
        let hi = lo + 1;
        let d_lo = phase - lo as f64 * step;
        let d_hi = hi as f64 * step - phase;
        let m = if d_lo < d_hi {
            lo % levels
        } else if d_hi < d_lo {
            hi % levels
        } else {
            // equidistant: smaller index wins (hi may wrap to 0)
            (lo % levels).min(hi % levels)
        };
        Complex64::from_polar(modulus, m as f64 * step)
    }))
}

/// Digital combiner `W_r = (F_r G_hat)^-1`.
///
/// Fails with [`Error::SingularChannel`] when the equivalent channel's
/// condition number exceeds [`SINGULAR_CONDITION`]; callers resample.
pub fn digital_combiner(
    analog: &DMatrix<Complex64>,
    estimate: &DMatrix<Complex64>,
) -> Result<DMatrix<Complex64>> {
    let equivalent = analog * estimate;
    let sv = equivalent.clone().singular_values();
    let (max, min) = (sv.max(), sv.min());
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition < SINGULAR_CONDITION) {
        return Err(Error::SingularChannel { condition });
    }
    equivalent
        .try_inverse()
        .ok_or(Error::SingularChannel { condition })
}

/// Downlink precoders: `F_t = F_r^T`, `W_t = W_r^T P`.
pub fn downlink_weights(
    analog_combiner: &DMatrix<Complex64>,
    digital_combiner: &DMatrix<Complex64>,
    pairs: usize,
) -> (DMatrix<Complex64>, DMatrix<Complex64>, DMatrix<Complex64>) {
    let permutation = pair_permutation(pairs);
    let analog_precoder = analog_combiner.transpose();
    let digital_precoder = digital_combiner.transpose() * &permutation;
    (analog_precoder, digital_precoder, permutation)
}

/// Per-realization transmit normalization `mu = 1 / ||F_t W_t||_F`.
pub fn normalization(
    analog_precoder: &DMatrix<Complex64>,
    digital_precoder: &DMatrix<Complex64>,
) -> Result<f64> {
    let norm = (analog_precoder * digital_precoder).norm();
    if norm == 0.0 {
        return Err(Error::InvalidState("zero precoder".into()));
    }
    Ok(1.0 / norm)
}

/// Build the full weight set for one realization, applying phase quantization
/// when the scenario asks for it.
pub fn build(scenario: &Scenario, realization: &ChannelRealization) -> Result<HybridWeights> {
    let mut analog = analog_combiner(&realization.estimate);
    if let PhaseShifter::Quantized { bits } = scenario.shifter {
        analog = quantize_phases(&analog, bits)?;
    }
    let digital = digital_combiner(&analog, &realization.estimate)?;
    let (analog_precoder, digital_precoder, _) = downlink_weights(&analog, &digital, scenario.pairs);
    let mu = normalization(&analog_precoder, &digital_precoder)?;
    Ok(HybridWeights {
        analog_combiner: analog,
        digital_combiner: digital,
        analog_precoder,
        digital_precoder,
        normalization: mu,
    })
}
