//! PHY-layer rate abstraction.
//!
//! Maps a channel power gain, the per-subchannel transmit power and a target
//! symbol error rate to an achievable spectral efficiency in bits per OFDMA
//! symbol:
//!
//! ```text
//! r = min( log2(1 + P · γ), c_max ),   γ = |h|² / (Γ · N0 · Δf),
//! Γ = (1/3) · [Q⁻¹(P_e / 4)]²
//! ```
//!
//! `Γ` is the SNR gap penalizing the Shannon capacity for operating at a
//! finite error rate; `Q` is the standard Gaussian tail. All quantities are
//! linear (W, W/Hz, Hz); dBm-valued configuration is converted on input.

use crate::mat::Matrix;
use thiserror::Error;

/// Per-frame achievable bits/symbol for every (subchannel, user) pair.
/// Rows index subchannels, columns index users.
pub type RateMatrix = Matrix;

#[derive(Debug, Error, PartialEq)]
pub enum RateError {
    #[error("error-rate probability {0} outside the open interval (0, 0.5)")]
    ProbabilityOutOfRange(f64),
    #[error("subchannel bandwidth must be positive, got {0}")]
    InvalidBandwidth(f64),
    #[error("noise density must be positive and finite, got {0} W/Hz")]
    InvalidNoiseDensity(f64),
    #[error("maximum transmission order must be at least 1")]
    InvalidMaxOrder,
    #[error("channel gain must be nonnegative and finite, got {0}")]
    InvalidGain(f64),
    #[error("gain matrix must be nonempty")]
    EmptyGains,
    #[error("total power must be nonnegative and finite, got {0}")]
    InvalidPower(f64),
}

/// Radio-level constants of a scenario: noise density `N0` (linear W/Hz),
/// subchannel bandwidth `Δf` (Hz), target error rate `P_e` and the highest
/// supported transmission order `c_max` (bits/symbol).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    noise_density: f64,
    subchannel_bandwidth: f64,
    error_rate: f64,
    max_order: u32,
}

impl RadioParams {
    /// Builds parameters from a noise density expressed in dBm/Hz, the usual
    /// configuration unit. Internally everything is stored linear.
    pub fn from_dbm(
        noise_dbm_per_hz: f64,
        subchannel_bandwidth: f64,
        error_rate: f64,
        max_order: u32,
    ) -> Result<Self, RateError> {
        let linear = 10f64.powf((noise_dbm_per_hz - 30.0) / 10.0);
        Self::new(linear, subchannel_bandwidth, error_rate, max_order)
    }

    pub fn new(
        noise_density: f64,
        subchannel_bandwidth: f64,
        error_rate: f64,
        max_order: u32,
    ) -> Result<Self, RateError> {
        if !(noise_density > 0.0 && noise_density.is_finite()) {
            return Err(RateError::InvalidNoiseDensity(noise_density));
        }
        if !(subchannel_bandwidth > 0.0 && subchannel_bandwidth.is_finite()) {
            return Err(RateError::InvalidBandwidth(subchannel_bandwidth));
        }
        if !(error_rate > 0.0 && error_rate < 0.5) {
            return Err(RateError::ProbabilityOutOfRange(error_rate));
        }
        if max_order < 1 {
            return Err(RateError::InvalidMaxOrder);
        }
        Ok(Self {
            noise_density,
            subchannel_bandwidth,
            error_rate,
            max_order,
        })
    }

    pub fn noise_density(&self) -> f64 {
        self.noise_density
    }

    pub fn subchannel_bandwidth(&self) -> f64 {
        self.subchannel_bandwidth
    }

    pub fn error_rate(&self) -> f64 {
        self.error_rate
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    /// SNR gap `Γ` for this parameter set.
    pub fn snr_gap(&self) -> f64 {
        snr_gap(self.error_rate).expect("error rate validated at construction")
    }
}

/// Normalized channel-to-noise ratio `γ = |h|² / (Γ · N0 · Δf)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Cnr(f64);

impl Cnr {
    pub fn new(gamma: f64) -> Result<Self, RateError> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(RateError::InvalidGain(gamma));
        }
        Ok(Self(gamma))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Complementary error function, accurate to ~1e-15 relative over the range
/// used here. Small arguments use the alternating Maclaurin series of `erf`;
/// large arguments use the continued fraction of `erfc` evaluated with the
/// modified Lentz scheme.
fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    const FRAC_2_SQRT_PI: f64 = 1.128_379_167_095_512_6;
    if x < 2.0 {
        // erf(x) = 2/sqrt(pi) * sum_{n>=0} (-1)^n x^(2n+1) / (n! (2n+1))
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut n = 1u32;
        loop {
            term *= -x2 / n as f64;
            let contrib = term / (2 * n + 1) as f64;
            sum += contrib;
            if contrib.abs() <= f64::EPSILON * sum.abs() {
                break;
            }
            n += 1;
        }
        1.0 - FRAC_2_SQRT_PI * sum
    } else {
        // erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
        let mut f = x;
        let mut c = x;
        let mut d = 0.0f64;
        let tiny = 1e-300;
        for k in 1..200 {
            let a = k as f64 / 2.0;
            // b = x for every level, a_k = k/2
            d = x + a * d;
            if d.abs() < tiny {
                d = tiny;
            }
            c = x + a / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-17 {
                break;
            }
        }
        (-x * x).exp() / (std::f64::consts::PI.sqrt() * f)
    }
}

/// Standard Gaussian tail `Q(x) = P(Z > x)`.
fn gaussian_tail(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Inverse Gaussian tail on the branch `x >= 0`, i.e. the `x` with
/// `Q(x) = p` for `p` in `(0, 0.5)`. Bisection on the monotone tail; the
/// result carries a relative error below 1e-9.
pub fn q_inverse(p: f64) -> Result<f64, RateError> {
    if !(p > 0.0 && p < 0.5) {
        return Err(RateError::ProbabilityOutOfRange(p));
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while gaussian_tail(hi) > p {
        lo = hi;
        hi *= 2.0;
        debug_assert!(hi < 1e3, "tail inversion bracket ran away");
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gaussian_tail(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.max(1e-300) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// SNR gap `Γ = (1/3) [Q⁻¹(P_e/4)]²` for target error rate `P_e`.
/// Strictly decreasing in `P_e`; greater than 1 for any `P_e < 0.1`.
pub fn snr_gap(error_rate: f64) -> Result<f64, RateError> {
    if !(error_rate > 0.0 && error_rate < 0.5) {
        return Err(RateError::ProbabilityOutOfRange(error_rate));
    }
    let q = q_inverse(error_rate / 4.0)?;
    Ok(q * q / 3.0)
}

/// Normalizes a channel power gain `|h|²` by the gap-scaled noise power.
pub fn normalized_cnr(gain_sq: f64, params: &RadioParams) -> Result<Cnr, RateError> {
    if !(gain_sq >= 0.0 && gain_sq.is_finite()) {
        return Err(RateError::InvalidGain(gain_sq));
    }
    let denom = params.snr_gap() * params.noise_density() * params.subchannel_bandwidth();
    Cnr::new(gain_sq / denom)
}

/// Achievable bits/symbol at per-subchannel power `power` and normalized CNR
/// `cnr`, hard-limited by the highest transmission order.
pub fn achieved_rate(power: f64, cnr: Cnr, max_order: u32) -> f64 {
    debug_assert!(power >= 0.0 && power.is_finite());
    let raw = (1.0 + power * cnr.value()).log2();
    raw.min(max_order as f64)
}

/// Builds the full rate matrix under uniform power loading: every subchannel
/// carries `total_power / N`.
pub fn build_rate_matrix(
    gains: &Matrix,
    total_power: f64,
    params: &RadioParams,
) -> Result<RateMatrix, RateError> {
    if gains.is_empty() {
        return Err(RateError::EmptyGains);
    }
    if !(total_power >= 0.0 && total_power.is_finite()) {
        return Err(RateError::InvalidPower(total_power));
    }
    for g in gains.values() {
        if !(g >= 0.0 && g.is_finite()) {
            return Err(RateError::InvalidGain(g));
        }
    }
    let per_subchannel = total_power / gains.rows() as f64;
    let denom = params.snr_gap() * params.noise_density() * params.subchannel_bandwidth();
    let max_order = params.max_order();
    Ok(Matrix::from_fn(gains.rows(), gains.cols(), |n, k| {
        achieved_rate(per_subchannel, Cnr(gains.get(n, k) / denom), max_order)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Test-side oracle for the Gaussian tail, independent of `erfc`:
    /// composite Simpson integration of the density over `[x, x + 50]`.
    fn q_oracle(x: f64) -> f64 {
        let density = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let (a, b) = (x, x + 50.0);
        let steps = 200_000usize; // even
        let h = (b - a) / steps as f64;
        let mut acc = density(a) + density(b);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * density(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    /// Inverts the oracle by bisection; used to derive frozen expectations.
    fn q_inverse_oracle(p: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 40.0f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if q_oracle(mid) > p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn erfc_matches_quadrature_oracle() {
        for &x in &[0.0, 0.1, 0.5, 1.0, 1.5, 1.9999, 2.0, 2.5, 3.55, 5.0, 7.0] {
            let q = gaussian_tail(x);
            let oracle = q_oracle(x);
            let rel = (q - oracle).abs() / oracle;
            assert!(rel < 1e-10, "x={x}: q={q:e} oracle={oracle:e} rel={rel:e}");
        }
        // symmetry limit Q(0) = 0.5
        assert!((gaussian_tail(0.0) - 0.5).abs() < 1e-15);
        // negative arguments via the reflection branch
        assert!((gaussian_tail(-1.0) - (1.0 - gaussian_tail(1.0))).abs() < 1e-15);
    }

    #[test]
    fn q_inverse_known_points() {
        // p -> 0.5 limit: x -> 0
        assert!(q_inverse(0.5 - 1e-12).unwrap() < 1e-6);
        // tabulated Gaussian tail: Q(1) = 0.158655...
        let x = q_inverse(0.158_655_253_931_457_05).unwrap();
        assert!((x - 1.0).abs() < 1e-8, "got {x}");
        // Q^{-1}(2.5e-7) = 5.02631283605669 (frozen from the quadrature oracle)
        let x = q_inverse(2.5e-7).unwrap();
        assert!((x - 5.026_312_836_056_69).abs() < 1e-7, "got {x}");
        // and the oracle agrees at runtime
        let xo = q_inverse_oracle(2.5e-7);
        assert!((x - xo).abs() < 1e-6, "impl {x} vs oracle {xo}");
    }

    #[test]
    fn q_inverse_rejects_out_of_domain() {
        assert!(q_inverse(0.0).is_err());
        assert!(q_inverse(0.5).is_err());
        assert!(q_inverse(-0.1).is_err());
        assert!(q_inverse(0.7).is_err());
    }

    #[test]
    fn q_inverse_strictly_decreasing() {
        let mut prev = f64::INFINITY;
        for i in 1..200 {
            let p = i as f64 * 0.0025; // (0, 0.5)
            let x = q_inverse(p).unwrap();
            assert!(x < prev, "not decreasing at p={p}");
            prev = x;
        }
    }

    #[test]
    fn snr_gap_reference_values() {
        // Γ(1e-6) = 8.42127357530273 (frozen from the quadrature oracle)
        let g = snr_gap(1e-6).unwrap();
        assert!((g - 8.421_273_575_302_73).abs() / g < 1e-9, "got {g}");
        // Γ(0.2) = (1/3) [Q^{-1}(0.05)]² with Q^{-1}(0.05) = 1.6448536269...
        let g = snr_gap(0.2).unwrap();
        assert!((g - 0.901_847_818_031_805).abs() < 1e-9, "got {g}");
        // monotone decreasing
        assert!(snr_gap(1e-6).unwrap() > snr_gap(1e-3).unwrap());
        // penalty factor above 1 for any demanding error target
        for &p in &[1e-9, 1e-6, 1e-3, 0.05, 0.099] {
            assert!(snr_gap(p).unwrap() > 1.0, "gap at {p} not a penalty");
        }
    }

    #[test]
    fn normalized_cnr_linearity_and_identity() {
        let params = RadioParams::from_dbm(-174.0, 2e5, 1e-6, 6).unwrap();
        assert_eq!(normalized_cnr(0.0, &params).unwrap().value(), 0.0);
        let g = 1e-12;
        let one = normalized_cnr(g, &params).unwrap().value();
        let two = normalized_cnr(2.0 * g, &params).unwrap().value();
        assert!((two - 2.0 * one).abs() < 1e-9 * two.abs());
        // |h|² = Γ·N0·Δf normalizes to exactly 1
        let unit_gain = params.snr_gap() * params.noise_density() * params.subchannel_bandwidth();
        let gamma = normalized_cnr(unit_gain, &params).unwrap().value();
        assert!((gamma - 1.0).abs() < 1e-12);
        assert!(normalized_cnr(-1.0, &params).is_err());
    }

    #[test]
    fn achieved_rate_cap_and_zero() {
        // P·γ = 1 -> log2(2) = 1 bit
        assert!((achieved_rate(1.0, Cnr::new(1.0).unwrap(), 6) - 1.0).abs() < 1e-12);
        // cap binds: log2(1001) ≈ 9.97 > 6
        assert_eq!(achieved_rate(1.0, Cnr::new(1000.0).unwrap(), 6), 6.0);
        // no power, no rate
        assert_eq!(achieved_rate(0.0, Cnr::new(5.0).unwrap(), 6), 0.0);
        // exact cap boundary: P·γ = 2^6 - 1
        assert_eq!(achieved_rate(1.0, Cnr::new(63.0).unwrap(), 6), 6.0);
    }

    #[test]
    fn build_rate_matrix_composition() {
        let params = RadioParams::from_dbm(-174.0, 2e5, 1e-6, 6).unwrap();
        let unit_gain = params.snr_gap() * params.noise_density() * params.subchannel_bandwidth();

        // all-zero gains give all-zero rates
        let zeros = Matrix::zeros(3, 2);
        let r = build_rate_matrix(&zeros, 5.0, &params).unwrap();
        assert!(r.values().all(|v| v == 0.0));

        // N=1, |h|² = Γ·N0·Δf, P_bs = 1 -> r = log2(2) = 1
        let g = Matrix::from_rows(&[vec![unit_gain]]).unwrap();
        let r = build_rate_matrix(&g, 1.0, &params).unwrap();
        assert!((r.get(0, 0) - 1.0).abs() < 1e-12);

        // doubling power never decreases any entry
        let g = Matrix::from_fn(4, 3, |n, k| unit_gain * (1.0 + n as f64 + 2.0 * k as f64));
        let r1 = build_rate_matrix(&g, 2.0, &params).unwrap();
        let r2 = build_rate_matrix(&g, 4.0, &params).unwrap();
        for (a, b) in r1.values().zip(r2.values()) {
            assert!(b >= a);
        }

        assert_eq!(
            build_rate_matrix(&Matrix::zeros(0, 0), 1.0, &params),
            Err(RateError::EmptyGains)
        );
    }

    #[test]
    fn achieved_rate_monotone_property() {
        // deterministic pseudo-random sweep; nondecreasing in power and cnr
        let mut s = 0x1234_5678_u64;
        let mut next = move || {
            s = crate::seed::splitmix64(s);
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..10_000 {
            let p = next() * 100.0;
            let g = next() * 50.0;
            let dp = next() * 10.0;
            let dg = next() * 10.0;
            let base = achieved_rate(p, Cnr::new(g).unwrap(), 6);
            assert!(achieved_rate(p + dp, Cnr::new(g).unwrap(), 6) >= base);
            assert!(achieved_rate(p, Cnr::new(g + dg).unwrap(), 6) >= base);
            assert!((0.0..=6.0).contains(&base));
        }
    }
}
