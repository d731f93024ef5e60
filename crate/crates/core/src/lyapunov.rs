//! Monte Carlo estimation of the Lyapunov exponent
//! `γ(E) = lim (1/n) 𝔼 log ‖g_E(n, ω) ⋯ g_E(1, ω)‖`.
//!
//! Every realization draws its couplings from its own ChaCha8 stream, keyed
//! by `(master_seed, realization index)`, so estimates do not depend on the
//! execution mode or on the number of worker threads.

use rand::distributions::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::criticality::{classify_energy, Status, DEFAULT_ZERO_TOL};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::matrix::TransferMatrix;
use crate::potential::SingleSitePotential;
use crate::scattering::{free_transfer_matrix, transfer_matrix};

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.5758293035489004;
pub const DEFAULT_BURN_IN: usize = 100;

/// Stream ids with this bit set are used for the couplings on the negative
/// half line.
const NEGATIVE_HALF_LINE: u64 = 1 << 63;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    /// Probability that a site carries the single-site potential.
    pub p_one: f64,
    pub n_steps: usize,
    pub n_realizations: usize,
    pub master_seed: u64,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    /// Renormalize the vector after every step. Turning this off is a
    /// diagnostic mode that can overflow.
    #[serde(default = "default_true")]
    pub renormalize: bool,
    #[serde(skip)]
    pub exec: Exec,
}

fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}

fn default_true() -> bool {
    true
}

impl EnsembleConfig {
    pub fn new(
        p_one: f64,
        n_steps: usize,
        n_realizations: usize,
        master_seed: u64,
    ) -> Result<Self> {
        let cfg = Self {
            p_one,
            n_steps,
            n_realizations,
            master_seed,
            burn_in: DEFAULT_BURN_IN,
            renormalize: true,
            exec: Exec::default(),
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn check(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_one) {
            return Err(Error::InvalidArgument(format!(
                "p_one must lie in [0, 1], got {}",
                self.p_one
            )));
        }
        if self.n_steps == 0 || self.n_realizations == 0 {
            return Err(Error::InvalidArgument(
                "n_steps and n_realizations must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Estimator {
    VectorNorm,
    MatrixNorm,
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Estimator::VectorNorm => "vector",
            Estimator::MatrixNorm => "matrix",
        })
    }
}

/// Which half line the transfer matrices are taken on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HalfLine {
    Positive,
    /// Inverse transfer matrices stepping left from `-1/2`, with couplings
    /// drawn from a disjoint set of streams.
    Negative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub energy: f64,
    pub gamma_hat: f64,
    /// Standard error of the mean over realizations (NaN for a single
    /// realization).
    pub std_error: f64,
    pub n_steps: usize,
    pub n_realizations: usize,
    pub estimator: Estimator,
}

impl LyapunovEstimate {
    /// Normal 99% confidence interval.
    pub fn ci99(&self) -> (f64, f64) {
        (
            self.gamma_hat - Z99 * self.std_error,
            self.gamma_hat + Z99 * self.std_error,
        )
    }

    pub fn ci99_excludes_zero(&self) -> bool {
        let (lo, hi) = self.ci99();
        lo > 0.0 || hi < 0.0
    }

    fn from_samples(energy: f64, samples: &[f64], n_steps: usize, estimator: Estimator) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let std_error = if samples.len() > 1 {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            f64::NAN
        };
        Self {
            energy,
            gamma_hat: mean,
            std_error,
            n_steps,
            n_realizations: samples.len(),
            estimator,
        }
    }
}

/// The coupling stream of one realization.
pub fn realization_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Iterator over the couplings `q_1, q_2, …` of one realization.
pub struct Couplings {
    rng: ChaCha8Rng,
    dist: Bernoulli,
}

impl Couplings {
    pub fn new(config: &EnsembleConfig, stream: u64) -> Self {
        Self::from_seed(config.p_one, config.master_seed, stream)
    }

    pub fn from_seed(p_one: f64, master_seed: u64, stream: u64) -> Self {
        let dist = Bernoulli::new(p_one.clamp(0.0, 1.0)).expect("probability in [0, 1]");
        Self {
            rng: realization_rng(master_seed, stream),
            dist,
        }
    }
}

impl Iterator for Couplings {
    type Item = bool;

    fn next(&mut self) -> Option<bool> {
        Some(self.dist.sample(&mut self.rng))
    }
}

/// The first `n` couplings of realization `realization_index`.
pub fn realization_bits(config: &EnsembleConfig, realization_index: usize, n: usize) -> Vec<bool> {
    Couplings::new(config, realization_index as u64)
        .take(n)
        .collect()
}

fn stream_id(index: usize, half_line: HalfLine) -> u64 {
    match half_line {
        HalfLine::Positive => index as u64,
        HalfLine::Negative => index as u64 | NEGATIVE_HALF_LINE,
    }
}

fn generators(
    p: &SingleSitePotential,
    energy: f64,
    half_line: HalfLine,
) -> Result<(TransferMatrix, TransferMatrix)> {
    if energy == 0.0 {
        return Err(Error::InvalidArgument("E = 0 is excluded".into()));
    }
    let (g0, g) = (free_transfer_matrix(energy), transfer_matrix(p, energy));
    if !g0.is_finite() || !g.is_finite() {
        return Err(Error::NumericOverflow { step: 0 });
    }
    Ok(match half_line {
        HalfLine::Positive => (g0, g),
        HalfLine::Negative => (g0.inverse_unimodular(), g.inverse_unimodular()),
    })
}

/// Growth rate of a single vector under the random product.
pub fn lyapunov_vector_estimate(
    p: &SingleSitePotential,
    energy: f64,
    config: &EnsembleConfig,
) -> Result<LyapunovEstimate> {
    let (g0, g) = generators(p, energy, HalfLine::Positive)?;
    lyapunov_vector_estimate_with(energy, &g0, &g, config)
}

/// Vector estimator for explicitly supplied generators `g₀(E)`, `g(E)`.
pub fn lyapunov_vector_estimate_with(
    energy: f64,
    g0: &TransferMatrix,
    g: &TransferMatrix,
    config: &EnsembleConfig,
) -> Result<LyapunovEstimate> {
    config.check()?;
    let (g0, g) = (*g0, *g);
    let samples = config.exec.map_range(config.n_realizations, |r| {
        let mut bits = Couplings::new(config, stream_id(r, HalfLine::Positive));
        let mut v = [1.0, 0.0];
        for q in bits.by_ref().take(config.burn_in) {
            v = if q { g.apply(v) } else { g0.apply(v) };
            let n = v[0].hypot(v[1]);
            v = [v[0] / n, v[1] / n];
        }
        let mut sum = 0.0;
        for (step, q) in bits.take(config.n_steps).enumerate() {
            v = if q { g.apply(v) } else { g0.apply(v) };
            if config.renormalize {
                let n = v[0].hypot(v[1]);
                sum += n.ln();
                v = [v[0] / n, v[1] / n];
            } else if !(v[0].is_finite() && v[1].is_finite()) {
                return Err(Error::NumericOverflow { step });
            }
        }
        if !config.renormalize {
            sum = v[0].hypot(v[1]).ln();
        }
        Ok(sum / config.n_steps as f64)
    });
    let samples = samples.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(LyapunovEstimate::from_samples(
        energy,
        &samples,
        config.n_steps,
        Estimator::VectorNorm,
    ))
}

/// Growth rate of the full product, rescaled by its largest entry at every
/// step.
pub fn lyapunov_matrix_estimate(
    p: &SingleSitePotential,
    energy: f64,
    config: &EnsembleConfig,
) -> Result<LyapunovEstimate> {
    lyapunov_matrix_estimate_on(p, energy, config, HalfLine::Positive)
}

pub fn lyapunov_matrix_estimate_on(
    p: &SingleSitePotential,
    energy: f64,
    config: &EnsembleConfig,
    half_line: HalfLine,
) -> Result<LyapunovEstimate> {
    config.check()?;
    let (g0, g) = generators(p, energy, half_line)?;
    let samples = config.exec.map_range(config.n_realizations, |r| {
        let bits = Couplings::new(config, stream_id(r, half_line));
        let mut prod = TransferMatrix::IDENTITY;
        let mut log_scale = 0.0;
        for q in bits.take(config.n_steps) {
            prod = if q { g * prod } else { g0 * prod };
            let s = prod.max_abs();
            prod = prod.scale(1.0 / s);
            log_scale += s.ln();
        }
        (prod.norm().ln() + log_scale) / config.n_steps as f64
    });
    Ok(LyapunovEstimate::from_samples(
        energy,
        &samples,
        config.n_steps,
        Estimator::MatrixNorm,
    ))
}

pub fn lyapunov_estimate(
    p: &SingleSitePotential,
    energy: f64,
    config: &EnsembleConfig,
    estimator: Estimator,
) -> Result<LyapunovEstimate> {
    match estimator {
        Estimator::VectorNorm => lyapunov_vector_estimate(p, energy, config),
        Estimator::MatrixNorm => lyapunov_matrix_estimate(p, energy, config),
    }
}

/// One row of a `γ(E)` sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaRow {
    pub energy: f64,
    pub status: Status,
    pub estimate: std::result::Result<LyapunovEstimate, String>,
}

/// `γ̂` over an energy grid; failures are recorded per row.
pub fn gamma_curve(
    p: &SingleSitePotential,
    energies: &[f64],
    config: &EnsembleConfig,
    estimator: Estimator,
) -> Vec<GammaRow> {
    energies
        .iter()
        .map(|&energy| GammaRow {
            energy,
            status: classify_energy(p, energy, DEFAULT_ZERO_TOL).status,
            estimate: lyapunov_estimate(p, energy, config, estimator).map_err(|e| e.to_string()),
        })
        .collect()
}

/// Combined standard error of the difference of two independent estimates.
pub fn combined_std_error(a: &LyapunovEstimate, b: &LyapunovEstimate) -> f64 {
    a.std_error.hypot(b.std_error)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ex1() -> SingleSitePotential {
        SingleSitePotential::constant(1.0).unwrap()
    }

    #[test]
    fn degenerate_bits() {
        let cfg = EnsembleConfig::new(0.0, 10, 4, 1).unwrap();
        assert!(realization_bits(&cfg, 2, 1000).iter().all(|&b| !b));
        let cfg = EnsembleConfig::new(1.0, 10, 4, 1).unwrap();
        assert!(realization_bits(&cfg, 2, 1000).iter().all(|&b| b));
    }

    #[test]
    fn fair_bits_concentrate() {
        // 1e5 fair draws: sd of the mean is 0.0016, the window is ±3.2 sd
        let cfg = EnsembleConfig::new(0.5, 10, 4, 99).unwrap();
        let bits = realization_bits(&cfg, 0, 100_000);
        let mean = bits.iter().filter(|&&b| b).count() as f64 / bits.len() as f64;
        assert!((0.495..=0.505).contains(&mean), "{mean}");
    }

    #[test]
    fn streams_are_independent_of_order() {
        let cfg = EnsembleConfig::new(0.3, 10, 8, 5).unwrap();
        let a = realization_bits(&cfg, 3, 64);
        let _ = realization_bits(&cfg, 7, 64);
        assert_eq!(a, realization_bits(&cfg, 3, 64));
        assert_ne!(a, realization_bits(&cfg, 4, 64));
    }

    #[test]
    fn config_validation() {
        assert!(EnsembleConfig::new(1.5, 10, 1, 0).is_err());
        assert!(EnsembleConfig::new(0.5, 0, 1, 0).is_err());
        assert!(EnsembleConfig::new(0.5, 1, 0, 0).is_err());
    }

    #[test]
    fn free_rotations_have_zero_exponent() {
        let cfg = EnsembleConfig::new(0.0, 20_000, 20, 3).unwrap();
        let est = lyapunov_vector_estimate(&ex1(), 2.0, &cfg).unwrap();
        assert!(est.gamma_hat.abs() <= 3.0 * est.std_error + 1e-3, "{est:?}");
    }

    #[test]
    fn free_hyperbolic_rate() {
        let cfg = EnsembleConfig::new(0.0, 2000, 4, 3).unwrap();
        let est = lyapunov_matrix_estimate(&ex1(), -4.0, &cfg).unwrap();
        assert!((est.gamma_hat - 2.0).abs() < 0.02, "{est:?}");
    }

    #[test]
    fn modes_and_threads_are_bit_identical() {
        let cfg = EnsembleConfig::new(0.5, 5000, 16, 11).unwrap();
        let a = lyapunov_vector_estimate(&ex1(), 5.0, &cfg.clone().with_exec(Exec::Sequential))
            .unwrap();
        let b =
            lyapunov_vector_estimate(&ex1(), 5.0, &cfg.clone().with_exec(Exec::Parallel)).unwrap();
        assert_eq!(a, b);
        let a = lyapunov_matrix_estimate(&ex1(), 5.0, &cfg.clone().with_exec(Exec::Sequential))
            .unwrap();
        let b = lyapunov_matrix_estimate(&ex1(), 5.0, &cfg.with_exec(Exec::Parallel)).unwrap();
        assert_eq!(a.gamma_hat.to_bits(), b.gamma_hat.to_bits());
    }

    #[test]
    fn zero_energy_rejected() {
        let cfg = EnsembleConfig::new(0.5, 10, 2, 1).unwrap();
        assert!(lyapunov_vector_estimate(&ex1(), 0.0, &cfg).is_err());
        let rows = gamma_curve(&ex1(), &[0.0, 2.0], &cfg, Estimator::VectorNorm);
        assert_eq!(rows.len(), 2);
        assert!(rows[0].estimate.is_err());
        assert!(rows[1].estimate.is_ok());
    }

    #[test]
    fn unnormalized_mode_overflows_at_deep_negative_energy() {
        let mut cfg = EnsembleConfig::new(0.5, 100_000, 1, 1).unwrap();
        cfg.renormalize = false;
        assert!(matches!(
            lyapunov_vector_estimate(&ex1(), -400.0, &cfg),
            Err(Error::NumericOverflow { .. })
        ));
    }

    #[test]
    fn gamma_curve_marks_critical_rows() {
        let cfg = EnsembleConfig::new(0.5, 500, 4, 1).unwrap();
        let rows = gamma_curve(&ex1(), &[PI * PI + 1.0, 2.0], &cfg, Estimator::VectorNorm);
        assert_eq!(rows[0].status, Status::Critical);
        assert_eq!(rows[1].status, Status::Regular);
        assert_eq!(
            rows,
            gamma_curve(&ex1(), &[PI * PI + 1.0, 2.0], &cfg, Estimator::VectorNorm)
        );
    }
}
