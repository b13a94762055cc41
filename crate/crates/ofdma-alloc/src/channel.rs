//! Per-drop channel gain generation.
//!
//! Large-scale conditions (log-distance path loss plus log-normal shadowing
//! for users dropped uniformly over the cell disc) are fixed for a whole
//! drop; small-scale conditions are frequency-selective Rayleigh fading from
//! a tapped-delay impulse response per user, transformed to the subchannel
//! grid and evolved across frames as a first-order autoregressive process.
//! Everything is deterministic given a seed.

use crate::mat::Matrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

/// Users closer than this to the base station are pushed out to avoid the
/// path-loss singularity at d -> 0.
pub const EXCLUSION_RADIUS_M: f64 = 10.0;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("cell radius must exceed the {EXCLUSION_RADIUS_M} m exclusion radius, got {0}")]
    InvalidCellRadius(f64),
    #[error("number of taps must be at least 1")]
    InvalidTaps,
    #[error("frame correlation must lie in [0, 1), got {0}")]
    InvalidCorrelation(f64),
    #[error("frames per drop must be at least 1")]
    InvalidFrameCount,
    #[error("at least one user required")]
    NoUsers,
}

/// Parametric macro-cell channel configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    /// Carrier frequency in Hz. Informational: the path-loss reference at
    /// 1 m absorbs the carrier dependence.
    pub carrier_frequency: f64,
    /// Cell radius in meters.
    pub cell_radius: f64,
    /// Path-loss exponent of the log-distance model.
    pub pathloss_exponent: f64,
    /// Path loss at 1 m in dB.
    pub pathloss_ref_db: f64,
    /// Log-normal shadowing standard deviation in dB.
    pub shadowing_sigma_db: f64,
    /// Number of impulse-response taps; controls frequency selectivity.
    pub num_taps: usize,
    /// Frame-to-frame fading correlation in [0, 1); mobility abstraction.
    pub doppler_correlation: f64,
    /// Frames generated per drop.
    pub frames_per_drop: usize,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            carrier_frequency: 2.5e9,
            cell_radius: 2000.0,
            pathloss_exponent: 3.5,
            pathloss_ref_db: 38.0,
            shadowing_sigma_db: 8.0,
            num_taps: 6,
            doppler_correlation: 0.95,
            frames_per_drop: 100,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(self.cell_radius > EXCLUSION_RADIUS_M) {
            return Err(ChannelError::InvalidCellRadius(self.cell_radius));
        }
        if self.num_taps < 1 {
            return Err(ChannelError::InvalidTaps);
        }
        if !(0.0..1.0).contains(&self.doppler_correlation) {
            return Err(ChannelError::InvalidCorrelation(self.doppler_correlation));
        }
        if self.frames_per_drop < 1 {
            return Err(ChannelError::InvalidFrameCount);
        }
        Ok(())
    }
}

/// Large-scale state of one drop: distance and shadowing per user.
#[derive(Debug, Clone, PartialEq)]
pub struct UserPlacement {
    pub distances_m: Vec<f64>,
    pub shadowing_db: Vec<f64>,
}

impl UserPlacement {
    pub fn users(&self) -> usize {
        self.distances_m.len()
    }
}

/// Drops `users` users uniformly over the cell disc (density proportional to
/// distance, truncated below at the exclusion radius) with i.i.d. zero-mean
/// Gaussian shadowing in dB.
pub fn place_users(
    users: usize,
    cfg: &ChannelConfig,
    seed_value: u64,
) -> Result<UserPlacement, ChannelError> {
    cfg.validate()?;
    if users == 0 {
        return Err(ChannelError::NoUsers);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed_value);
    let d0sq = EXCLUSION_RADIUS_M * EXCLUSION_RADIUS_M;
    let rsq = cfg.cell_radius * cfg.cell_radius;
    let shadow = Normal::new(0.0, cfg.shadowing_sigma_db).expect("sigma validated");
    let mut distances_m = Vec::with_capacity(users);
    let mut shadowing_db = Vec::with_capacity(users);
    for _ in 0..users {
        let u: f64 = rng.gen();
        distances_m.push((d0sq + u * (rsq - d0sq)).sqrt());
        shadowing_db.push(shadow.sample(&mut rng));
    }
    Ok(UserPlacement {
        distances_m,
        shadowing_db,
    })
}

/// Linear large-scale power gain of one user.
fn large_scale_gain(distance_m: f64, shadow_db: f64, cfg: &ChannelConfig) -> f64 {
    let pl_db = cfg.pathloss_ref_db + 10.0 * cfg.pathloss_exponent * distance_m.log10();
    10f64.powf((shadow_db - pl_db) / 10.0)
}

/// Per-user tapped impulse response, unit total power spread evenly over the
/// taps, evolved as `h <- rho h + sqrt(1 - rho^2) w` per frame.
struct TapState {
    re: Vec<f64>,
    im: Vec<f64>,
}

/// Generates the per-frame N×K gain matrices of a drop:
/// `gain(n,k,t) = PL(d_k) · 10^(s_k/10) · |H_k(n,t)|²` with `H_k` the DFT of
/// the user's tap vector on the `subchannels` grid. `|H|²` has unit mean, so
/// large-scale terms carry all the scale.
pub fn generate_drop_gains(
    placement: &UserPlacement,
    subchannels: usize,
    cfg: &ChannelConfig,
    seed_value: u64,
) -> Result<Vec<Matrix>, ChannelError> {
    cfg.validate()?;
    if placement.users() == 0 {
        return Err(ChannelError::NoUsers);
    }
    let users = placement.users();
    let taps = cfg.num_taps;
    let rho = cfg.doppler_correlation;
    let innovation = (1.0 - rho * rho).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed_value);
    // per-tap standard deviation: total power 1 split over taps, and each
    // complex component carries half of a tap's power
    let comp_sigma = (0.5 / taps as f64).sqrt();
    let gauss = Normal::new(0.0, comp_sigma).expect("positive sigma");

    let mut states: Vec<TapState> = (0..users)
        .map(|_| TapState {
            re: (0..taps).map(|_| gauss.sample(&mut rng)).collect(),
            im: (0..taps).map(|_| gauss.sample(&mut rng)).collect(),
        })
        .collect();

    let large: Vec<f64> = (0..users)
        .map(|k| large_scale_gain(placement.distances_m[k], placement.shadowing_db[k], cfg))
        .collect();

    // DFT twiddles for the tap-to-subchannel transform
    let omega = -2.0 * std::f64::consts::PI / subchannels as f64;

    let mut frames = Vec::with_capacity(cfg.frames_per_drop);
    for frame in 0..cfg.frames_per_drop {
        if frame > 0 {
            for st in &mut states {
                for l in 0..taps {
                    st.re[l] = rho * st.re[l] + innovation * gauss.sample(&mut rng);
                    st.im[l] = rho * st.im[l] + innovation * gauss.sample(&mut rng);
                }
            }
        }
        let mut gains = Matrix::zeros(subchannels, users);
        for (k, st) in states.iter().enumerate() {
            for n in 0..subchannels {
                let mut re = 0.0;
                let mut im = 0.0;
                for l in 0..taps {
                    let phase = omega * (n * l % subchannels) as f64;
                    let (s, c) = phase.sin_cos();
                    re += st.re[l] * c - st.im[l] * s;
                    im += st.re[l] * s + st.im[l] * c;
                }
                gains.set(n, k, large[k] * (re * re + im * im));
            }
        }
        frames.push(gains);
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ChannelConfig {
        ChannelConfig::default()
    }

    #[test]
    fn placement_is_deterministic_and_truncated() {
        let a = place_users(50, &cfg(), 7).unwrap();
        let b = place_users(50, &cfg(), 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, place_users(50, &cfg(), 8).unwrap());
        assert!(a
            .distances_m
            .iter()
            .all(|&d| (EXCLUSION_RADIUS_M..=cfg().cell_radius).contains(&d)));
    }

    #[test]
    fn placement_mean_distance_matches_uniform_disc() {
        // E[d] = (2/3) R for a uniform disc; the 10 m truncation is negligible
        let p = place_users(10_000, &cfg(), 42).unwrap();
        let mean = p.distances_m.iter().sum::<f64>() / p.distances_m.len() as f64;
        let expected = 2.0 / 3.0 * cfg().cell_radius;
        assert!(
            (mean - expected).abs() / expected < 0.02,
            "mean {mean} vs {expected}"
        );
    }

    #[test]
    fn single_tap_is_flat_across_subchannels() {
        let mut c = cfg();
        c.num_taps = 1;
        c.frames_per_drop = 3;
        let p = place_users(2, &c, 1).unwrap();
        let frames = generate_drop_gains(&p, 8, &c, 2).unwrap();
        for f in &frames {
            for k in 0..2 {
                let first = f.get(0, k);
                for n in 1..8 {
                    assert!((f.get(n, k) - first).abs() < 1e-12 * first.abs());
                }
            }
        }
    }

    #[test]
    fn gains_positive_finite_and_deterministic() {
        let c = ChannelConfig {
            frames_per_drop: 5,
            ..cfg()
        };
        let p = place_users(4, &c, 3).unwrap();
        let a = generate_drop_gains(&p, 16, &c, 9).unwrap();
        let b = generate_drop_gains(&p, 16, &c, 9).unwrap();
        assert_eq!(a, b);
        for f in &a {
            for v in f.values() {
                assert!(v > 0.0 && v.is_finite());
            }
        }
    }

    /// Normalized small-scale factor of one user on one subchannel across
    /// frames, with the large-scale part divided out.
    fn fading_track(c: &ChannelConfig, frames: usize, seed: u64) -> Vec<f64> {
        let c = ChannelConfig {
            frames_per_drop: frames,
            ..*c
        };
        let placement = UserPlacement {
            distances_m: vec![100.0],
            shadowing_db: vec![0.0],
        };
        let ls = large_scale_gain(100.0, 0.0, &c);
        generate_drop_gains(&placement, 4, &c, seed)
            .unwrap()
            .iter()
            .map(|f| f.get(0, 0) / ls)
            .collect()
    }

    #[test]
    fn zero_correlation_gives_independent_frames() {
        let c = ChannelConfig {
            doppler_correlation: 0.0,
            ..cfg()
        };
        let track = fading_track(&c, 10_000, 5);
        let n = track.len() as f64;
        let mean = track.iter().sum::<f64>() / n;
        let var = track.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let lag1 = track
            .windows(2)
            .map(|w| (w[0] - mean) * (w[1] - mean))
            .sum::<f64>()
            / ((n - 1.0) * var);
        // three standard errors of an autocorrelation estimate at lag 1
        assert!(lag1.abs() < 3.0 / n.sqrt(), "lag-1 autocorr {lag1}");
    }

    #[test]
    fn high_correlation_shows_memory() {
        let c = ChannelConfig {
            doppler_correlation: 0.95,
            ..cfg()
        };
        let track = fading_track(&c, 5_000, 5);
        let n = track.len() as f64;
        let mean = track.iter().sum::<f64>() / n;
        let var = track.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let lag1 = track
            .windows(2)
            .map(|w| (w[0] - mean) * (w[1] - mean))
            .sum::<f64>()
            / ((n - 1.0) * var);
        assert!(lag1 > 0.5, "lag-1 autocorr {lag1}");
    }

    #[test]
    fn fading_factor_has_unit_mean() {
        // independent frames, averaged over subchannels and frames
        let c = ChannelConfig {
            doppler_correlation: 0.0,
            frames_per_drop: 4_000,
            ..cfg()
        };
        let placement = UserPlacement {
            distances_m: vec![250.0],
            shadowing_db: vec![0.0],
        };
        let ls = large_scale_gain(250.0, 0.0, &c);
        let frames = generate_drop_gains(&placement, 8, &c, 11).unwrap();
        let mut acc = 0.0;
        let mut count = 0usize;
        for f in &frames {
            for n in 0..8 {
                acc += f.get(n, 0) / ls;
                count += 1;
            }
        }
        let mean = acc / count as f64;
        assert!((mean - 1.0).abs() < 0.02, "normalized mean {mean}");
    }

    #[test]
    fn more_taps_decorrelate_the_band() {
        // correlation of |H|² at quarter-band separation falls as the number
        // of taps grows: for 8 uniform taps over 32 subchannels it is
        // analytically zero, for a single tap it is one
        let corr_for = |taps: usize| {
            let c = ChannelConfig {
                num_taps: taps,
                doppler_correlation: 0.0,
                frames_per_drop: 3_000,
                ..cfg()
            };
            let placement = UserPlacement {
                distances_m: vec![100.0],
                shadowing_db: vec![0.0],
            };
            let frames = generate_drop_gains(&placement, 32, &c, 17).unwrap();
            let series_a: Vec<f64> = frames.iter().map(|f| f.get(0, 0)).collect();
            let series_b: Vec<f64> = frames.iter().map(|f| f.get(8, 0)).collect();
            let n = series_a.len() as f64;
            let ma = series_a.iter().sum::<f64>() / n;
            let mb = series_b.iter().sum::<f64>() / n;
            let cov = series_a
                .iter()
                .zip(&series_b)
                .map(|(a, b)| (a - ma) * (b - mb))
                .sum::<f64>();
            let va = series_a.iter().map(|a| (a - ma).powi(2)).sum::<f64>();
            let vb = series_b.iter().map(|b| (b - mb).powi(2)).sum::<f64>();
            cov / (va * vb).sqrt()
        };
        let flat = corr_for(1);
        let mild = corr_for(2);
        let selective = corr_for(8);
        assert!(flat > 0.99, "single tap should be fully correlated: {flat}");
        assert!(mild < flat - 0.2, "2 taps {mild} vs 1 tap {flat}");
        assert!(selective < 0.3, "8 taps should decorrelate: {selective}");
    }

    #[test]
    fn users_fade_independently() {
        let c = ChannelConfig {
            doppler_correlation: 0.0,
            frames_per_drop: 4_000,
            ..cfg()
        };
        let placement = UserPlacement {
            distances_m: vec![100.0, 100.0],
            shadowing_db: vec![0.0, 0.0],
        };
        let frames = generate_drop_gains(&placement, 4, &c, 23).unwrap();
        let a: Vec<f64> = frames.iter().map(|f| f.get(0, 0)).collect();
        let b: Vec<f64> = frames.iter().map(|f| f.get(0, 1)).collect();
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let cov = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - ma) * (y - mb))
            .sum::<f64>();
        let va = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>();
        let vb = b.iter().map(|y| (y - mb).powi(2)).sum::<f64>();
        let corr = cov / (va * vb).sqrt();
        assert!(corr.abs() < 3.0 / n.sqrt() + 0.03, "cross-corr {corr}");
    }

    #[test]
    fn config_validation() {
        let mut c = cfg();
        c.cell_radius = 5.0;
        assert!(matches!(
            c.validate(),
            Err(ChannelError::InvalidCellRadius(_))
        ));
        let mut c = cfg();
        c.num_taps = 0;
        assert_eq!(c.validate(), Err(ChannelError::InvalidTaps));
        let mut c = cfg();
        c.doppler_correlation = 1.0;
        assert!(matches!(
            c.validate(),
            Err(ChannelError::InvalidCorrelation(_))
        ));
        assert!(place_users(0, &cfg(), 1).is_err());
    }
}
