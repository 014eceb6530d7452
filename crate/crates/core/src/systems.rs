//! Deterministic, seeded trajectory generators for the two benchmark
//! systems: a low-rank oscillatory signal and a damped Kuramoto network.
//!
//! Generation is reproducible by construction: every generator uses
//! ChaCha8 seeded with the config's `seed` and draws parameters in a fixed
//! documented order, so identical configs give bit-identical trajectories.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Configuration for the oscillatory system: each state variable is a
/// random linear combination of sine and cosine waves at two frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatoryConfig {
    pub state_dim: usize,
    pub freq1_hz: f64,
    pub freq2_hz: f64,
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    pub seed: u64,
}

impl Default for OscillatoryConfig {
    fn default() -> Self {
        Self {
            state_dim: 100,
            freq1_hz: 3.0,
            freq2_hz: 7.0,
            sample_rate_hz: 120.0,
            duration_s: 10.0,
            seed: 29,
        }
    }
}

impl OscillatoryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.state_dim == 0 {
            return Err(Error::InvalidConfig("state dimension must be positive".into()));
        }
        if !(self.sample_rate_hz > 0.0) || !(self.duration_s > 0.0) {
            return Err(Error::InvalidConfig(
                "sample rate and duration must be positive".into(),
            ));
        }
        let nyquist = self.sample_rate_hz / 2.0;
        for f in [self.freq1_hz, self.freq2_hz] {
            if !(f > 0.0 && f < nyquist) {
                return Err(Error::InvalidConfig(format!(
                    "frequency {f} Hz not resolvable below Nyquist {nyquist} Hz"
                )));
            }
        }
        Ok(())
    }
}

/// Generate the oscillatory trajectory, one column per sample:
///
/// `col(t) = v1 sin(2 pi f1 t) + v2 cos(2 pi f1 t) + v3 sin(2 pi f2 t) + v4 cos(2 pi f2 t)`
///
/// with `t = j / f_s` for `j = 0..=m`, `m = duration * f_s`. The component
/// vectors `v1..v4` are standard-normal, drawn in that order from the
/// seeded generator. The trajectory matrix has rank at most 4.
pub fn oscillatory_trajectory(cfg: &OscillatoryConfig) -> Result<Array2<f64>> {
    cfg.validate()?;
    let n = cfg.state_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let components: Vec<Array1<f64>> = (0..4)
        .map(|_| Array1::from_shape_fn(n, |_| rng.sample(StandardNormal)))
        .collect();

    let m = (cfg.duration_s * cfg.sample_rate_hz).round() as usize;
    let mut trajectory = Array2::zeros((n, m + 1));
    let w1 = 2.0 * std::f64::consts::PI * cfg.freq1_hz;
    let w2 = 2.0 * std::f64::consts::PI * cfg.freq2_hz;
    for j in 0..=m {
        let t = j as f64 / cfg.sample_rate_hz;
        let weights = [
            (w1 * t).sin(),
            (w1 * t).cos(),
            (w2 * t).sin(),
            (w2 * t).cos(),
        ];
        let mut col = trajectory.column_mut(j);
        for (v, w) in components.iter().zip(weights) {
            col.scaled_add(w, v);
        }
    }
    Ok(trajectory)
}

/// Configuration for the damped Kuramoto network
/// `(1 + gamma) theta_i' = omega_i + K sum_j A_ij sin(theta_j - theta_i)`.
///
/// The observable is `sin(theta_i)` per oscillator. The coupling sum is
/// taken exactly as written (no `1/n` scaling).
#[derive(Debug, Clone, PartialEq)]
pub struct KuramotoConfig {
    pub oscillator_count: usize,
    pub coupling: f64,
    pub damping: f64,
    /// Symmetric binary coupling matrix with zero diagonal.
    pub adjacency: Array2<f64>,
    /// Natural frequencies are uniform in this closed range (rad/s).
    pub natural_freq_range: (f64, f64),
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    pub seed: u64,
}

impl KuramotoConfig {
    /// All-to-all coupling with the benchmark defaults: `K = 1`,
    /// `gamma = 0.9`, natural frequencies in `[2.5, 3.0]` rad/s, 120 Hz
    /// sampling for 10 seconds.
    pub fn fully_connected(oscillator_count: usize) -> Self {
        let adjacency = Array2::from_shape_fn(
            (oscillator_count, oscillator_count),
            |(i, j)| if i == j { 0.0 } else { 1.0 },
        );
        Self {
            oscillator_count,
            coupling: 1.0,
            damping: 0.9,
            adjacency,
            natural_freq_range: (2.5, 3.0),
            sample_rate_hz: 120.0,
            duration_s: 10.0,
            seed: 29,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.oscillator_count;
        if n == 0 {
            return Err(Error::InvalidConfig("oscillator count must be positive".into()));
        }
        if self.adjacency.dim() != (n, n) {
            return Err(Error::InvalidConfig(format!(
                "adjacency is {:?}, expected {n}x{n}",
                self.adjacency.dim()
            )));
        }
        for ((i, j), &v) in self.adjacency.indexed_iter() {
            if v != 0.0 && v != 1.0 {
                return Err(Error::InvalidConfig(format!(
                    "adjacency entry ({i},{j}) = {v} is not binary"
                )));
            }
            if i == j && v != 0.0 {
                return Err(Error::InvalidConfig("adjacency diagonal must be zero".into()));
            }
            if self.adjacency[(j, i)] != v {
                return Err(Error::InvalidConfig("adjacency must be symmetric".into()));
            }
        }
        if !(0.0..=1.0).contains(&self.damping) {
            return Err(Error::InvalidConfig(format!(
                "damping must be in [0, 1], got {}",
                self.damping
            )));
        }
        let (lo, hi) = self.natural_freq_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidConfig(format!(
                "invalid natural frequency range [{lo}, {hi}]"
            )));
        }
        if !(self.sample_rate_hz > 0.0) || !(self.duration_s > 0.0) {
            return Err(Error::InvalidConfig(
                "sample rate and duration must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Observable trajectory `sin(theta_i(t_j))`, one column per sample.
pub fn kuramoto_trajectory(cfg: &KuramotoConfig) -> Result<Array2<f64>> {
    Ok(kuramoto_phases(cfg, 1)?.mapv(f64::sin))
}

/// Integrate the network with classical fixed-step RK4 and return the raw
/// phases at the sample instants. `substeps` RK4 steps are taken per
/// sample interval (the generator itself uses one).
///
/// Seeded draws happen in a fixed order: first all natural frequencies
/// `omega_i = lo + (hi - lo) u`, then all initial phases
/// `theta_i(0) = 2 pi u`, with `u` consecutive uniform doubles in `[0, 1)`.
pub fn kuramoto_phases(cfg: &KuramotoConfig, substeps: usize) -> Result<Array2<f64>> {
    cfg.validate()?;
    let n = cfg.oscillator_count;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (lo, hi) = cfg.natural_freq_range;
    let omega = Array1::from_shape_fn(n, |_| lo + (hi - lo) * rng.random::<f64>());
    let theta0 = Array1::from_shape_fn(n, |_| 2.0 * std::f64::consts::PI * rng.random::<f64>());
    kuramoto_phases_with(cfg, &omega, &theta0, substeps)
}

/// RK4 integration with explicit natural frequencies and initial phases.
pub fn kuramoto_phases_with(
    cfg: &KuramotoConfig,
    omega: &Array1<f64>,
    theta0: &Array1<f64>,
    substeps: usize,
) -> Result<Array2<f64>> {
    cfg.validate()?;
    let n = cfg.oscillator_count;
    if omega.len() != n || theta0.len() != n {
        return Err(Error::DimensionMismatch {
            context: "omega and theta0 must match the oscillator count",
            expected: n.to_string(),
            actual: format!("{}/{}", omega.len(), theta0.len()),
        });
    }
    if substeps == 0 {
        return Err(Error::InvalidConfig("substeps must be at least 1".into()));
    }

    let m = (cfg.duration_s * cfg.sample_rate_hz).round() as usize;
    let h = 1.0 / (cfg.sample_rate_hz * substeps as f64);
    let mut phases = Array2::zeros((n, m + 1));
    let mut theta = theta0.clone();
    phases.column_mut(0).assign(&theta);
    for j in 1..=m {
        for _ in 0..substeps {
            theta = rk4_step(cfg, omega, &theta, h);
        }
        phases.column_mut(j).assign(&theta);
    }
    Ok(phases)
}

fn phase_velocity(cfg: &KuramotoConfig, omega: &Array1<f64>, theta: &Array1<f64>) -> Array1<f64> {
    let n = cfg.oscillator_count;
    let inv_damp = 1.0 / (1.0 + cfg.damping);
    let mut rate = Array1::zeros(n);
    for i in 0..n {
        let mut coupling_sum = 0.0;
        for j in 0..n {
            let a = cfg.adjacency[(i, j)];
            if a != 0.0 {
                coupling_sum += a * (theta[j] - theta[i]).sin();
            }
        }
        rate[i] = (omega[i] + cfg.coupling * coupling_sum) * inv_damp;
    }
    rate
}

fn rk4_step(
    cfg: &KuramotoConfig,
    omega: &Array1<f64>,
    theta: &Array1<f64>,
    h: f64,
) -> Array1<f64> {
    let k1 = phase_velocity(cfg, omega, theta);
    let k2 = phase_velocity(cfg, omega, &(theta + &(&k1 * (h / 2.0))));
    let k3 = phase_velocity(cfg, omega, &(theta + &(&k2 * (h / 2.0))));
    let k4 = phase_velocity(cfg, omega, &(theta + &(&k3 * h)));
    theta + &((k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}
