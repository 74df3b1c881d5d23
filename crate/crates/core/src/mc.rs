//! Heat-bath dynamics for the inhomogeneous Curie-Weiss model.
//!
//! The target law is proportional to `exp(H(sigma))` with
//! `H = theta / (2 l_n) (sum_i w_i s_i)^2 + B sum_i s_i`. A random site `i` is
//! refreshed from its conditional law, which only needs the weighted sum of
//! the other spins, so each update costs O(1).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::roots::logistic;

/// Generator used for every run, recorded in output metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha, seed_from_u64)";

/// Number of batches in the batch-means error estimate.
pub const BATCHES: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub counts: Vec<usize>,
    pub atoms: Vec<f64>,
    pub theta: f64,
    pub b: f64,
    /// Total number of sweeps, one sweep being `n` single-site updates.
    pub sweeps: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub thin: usize,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.counts.len() != self.atoms.len() || self.counts.is_empty() {
            return Err(Error::Validation("counts and atoms must have equal nonzero length".into()));
        }
        if self.counts.iter().sum::<usize>() == 0 {
            return Err(Error::Validation("no vertices".into()));
        }
        if self.atoms.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::Validation("atoms must be positive".into()));
        }
        if !self.theta.is_finite() || !self.b.is_finite() {
            return Err(Error::Validation("theta and B must be finite".into()));
        }
        if self.sweeps <= self.burn_in {
            return Err(Error::Validation(format!(
                "sweeps ({}) must exceed burn_in ({})",
                self.sweeps, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::Validation("thin must be at least 1".into()));
        }
        let kept = (self.sweeps - self.burn_in).div_ceil(self.thin);
        if kept < BATCHES {
            return Err(Error::Validation(format!(
                "{kept} retained samples, need at least {BATCHES} for batch means"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McResult {
    pub mean_magnetization: f64,
    pub std_error: f64,
    /// Average of `sum_i w_i s_i / n`.
    pub mean_weighted_magnetization: f64,
    pub weighted_std_error: f64,
    pub samples_used: usize,
    pub seed_echo: u64,
    /// Gap between the running weighted sum and a final recomputation.
    pub weighted_sum_drift: f64,
}

/// Conditional probability that site `i` is up given the weighted sum of
/// the other spins.
pub fn heat_bath_up_probability(w_i: f64, rest: f64, theta: f64, b: f64, ell: f64) -> f64 {
    logistic(2.0 * (theta * w_i * rest / ell + b))
}

fn batch_means(xs: &[f64]) -> (f64, f64) {
    let size = xs.len() / BATCHES;
    let used = &xs[xs.len() - size * BATCHES..];
    let means: Vec<f64> = used.chunks(size).map(|c| c.iter().sum::<f64>() / size as f64).collect();
    let grand = means.iter().sum::<f64>() / BATCHES as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (BATCHES as f64 - 1.0);
    (xs.iter().sum::<f64>() / xs.len() as f64, (var / BATCHES as f64).sqrt())
}

/// Runs the chain. Spins start aligned with the field, or uniformly at
/// random when `B = 0`.
pub fn glauber_run(config: &McConfig) -> Result<McResult> {
    config.validate()?;
    let w: Vec<f64> = config
        .counts
        .iter()
        .zip(&config.atoms)
        .flat_map(|(&c, &a)| std::iter::repeat_n(a, c))
        .collect();
    let n = w.len();
    let ell: f64 = w.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut spins: Vec<i8> = if config.b > 0.0 {
        vec![1; n]
    } else if config.b < 0.0 {
        vec![-1; n]
    } else {
        (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
    };
    let mut weighted: f64 = spins.iter().zip(&w).map(|(&s, &wi)| s as f64 * wi).sum();
    let mut total: i64 = spins.iter().map(|&s| s as i64).sum();

    let mut mags = Vec::new();
    let mut wmags = Vec::new();
    for sweep in 0..config.sweeps {
        for _ in 0..n {
            let i = rng.random_range(0..n);
            let old = spins[i];
            let rest = weighted - old as f64 * w[i];
            let up = rng.random::<f64>() < heat_bath_up_probability(w[i], rest, config.theta, config.b, ell);
            let new: i8 = if up { 1 } else { -1 };
            if new != old {
                spins[i] = new;
                weighted = rest + new as f64 * w[i];
                total += 2 * new as i64;
            }
        }
        if sweep >= config.burn_in && (sweep - config.burn_in).is_multiple_of(config.thin) {
            mags.push(total as f64 / n as f64);
            wmags.push(weighted / n as f64);
        }
    }
    let recomputed: f64 = spins.iter().zip(&w).map(|(&s, &wi)| s as f64 * wi).sum();
    let (m, se) = batch_means(&mags);
    let (wm, wse) = batch_means(&wmags);
    Ok(McResult {
        mean_magnetization: m,
        std_error: se,
        mean_weighted_magnetization: wm,
        weighted_std_error: wse,
        samples_used: mags.len(),
        seed_echo: config.seed,
        weighted_sum_drift: (weighted - recomputed).abs(),
    })
}

fn config_spin(cfg: usize, i: usize) -> f64 {
    if cfg >> i & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Transition matrix of the random-site heat-bath chain on `2^n` states,
/// state bit `i` set meaning spin `i` is up.
pub fn transition_matrix(weights: &[f64], theta: f64, b: f64) -> Result<Vec<Vec<f64>>> {
    let n = weights.len();
    if n == 0 || n > 12 {
        return Err(Error::Validation(format!("transition matrix needs 1 <= n <= 12, got {n}")));
    }
    let ell: f64 = weights.iter().sum();
    let states = 1usize << n;
    let mut p = vec![vec![0.0; states]; states];
    for (cfg, row) in p.iter_mut().enumerate() {
        let sum: f64 = (0..n).map(|i| config_spin(cfg, i) * weights[i]).sum();
        for i in 0..n {
            let rest = sum - config_spin(cfg, i) * weights[i];
            let up = heat_bath_up_probability(weights[i], rest, theta, b, ell);
            let set = cfg | (1 << i);
            let clear = cfg & !(1 << i);
            row[set] += up / n as f64;
            row[clear] += (1.0 - up) / n as f64;
        }
    }
    Ok(p)
}

/// Normalized `exp(H)` over all `2^n` states.
pub fn boltzmann_weights(weights: &[f64], theta: f64, b: f64) -> Vec<f64> {
    let n = weights.len();
    let ell: f64 = weights.iter().sum();
    let logs: Vec<f64> = (0..1usize << n)
        .map(|cfg| {
            let sw: f64 = (0..n).map(|i| config_spin(cfg, i) * weights[i]).sum();
            let s: f64 = (0..n).map(|i| config_spin(cfg, i)).sum();
            theta / (2.0 * ell) * sw * sw + b * s
        })
        .collect();
    let lz = crate::roots::log_sum_exp(&logs);
    logs.iter().map(|l| (l - lz).exp()).collect()
}

/// Stationary law by power iteration from the uniform law.
pub fn stationary_distribution(p: &[Vec<f64>], tol: f64, max_iter: usize) -> Vec<f64> {
    let k = p.len();
    let mut pi = vec![1.0 / k as f64; k];
    for _ in 0..max_iter {
        let mut next = vec![0.0; k];
        for (i, row) in p.iter().enumerate() {
            for (j, &pij) in row.iter().enumerate() {
                next[j] += pi[i] * pij;
            }
        }
        let diff: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if diff < tol {
            break;
        }
    }
    pi
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exact_icw;

    fn cfg(counts: &[usize], atoms: &[f64], theta: f64, b: f64, sweeps: usize, seed: u64) -> McConfig {
        McConfig {
            counts: counts.to_vec(),
            atoms: atoms.to_vec(),
            theta,
            b,
            sweeps,
            burn_in: sweeps / 10,
            seed,
            thin: 1,
        }
    }

    #[test]
    fn config_validation() {
        assert!(glauber_run(&cfg(&[0, 0], &[1.0, 3.0], 0.0, 0.0, 1000, 1)).is_err());
        let mut c = cfg(&[10], &[1.0], 0.0, 0.0, 1000, 1);
        c.burn_in = 1000;
        assert!(glauber_run(&c).is_err());
        c.burn_in = 0;
        c.thin = 0;
        assert!(glauber_run(&c).is_err());
    }

    #[test]
    fn free_spins() {
        let r = glauber_run(&cfg(&[1000], &[1.0], 0.0, 0.0, 10_000, 7)).unwrap();
        assert!(r.mean_magnetization.abs() <= 3.0 * r.std_error, "{r:?}");
        assert!(r.std_error > 0.0);
        let r = glauber_run(&cfg(&[1000], &[1.0], 0.0, 0.5, 10_000, 8)).unwrap();
        assert!((r.mean_magnetization - 0.5f64.tanh()).abs() <= 3.0 * r.std_error, "{r:?}");
    }

    #[test]
    fn deterministic_given_seed() {
        let c = cfg(&[30, 20], &[1.0, 3.0], 0.9, 0.1, 2000, 42);
        let a = glauber_run(&c).unwrap();
        let b = glauber_run(&c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.seed_echo, 42);
        let other = glauber_run(&McConfig { seed: 43, ..c }).unwrap();
        assert_ne!(a.mean_magnetization, other.mean_magnetization);
    }

    #[test]
    fn incremental_sum_does_not_drift() {
        let r = glauber_run(&cfg(&[100, 100], &[0.3, 1.7], 1.2, -0.1, 5000, 3)).unwrap();
        assert!(r.weighted_sum_drift <= 1e-9, "{}", r.weighted_sum_drift);
    }

    #[test]
    fn finite_curie_weiss_agreement() {
        let (counts, atoms) = ([40, 40], [1.0, 3.0]);
        let (theta, b) = (0.8f64.sinh(), 0.2);
        let (_, exact) = exact_icw(&counts, &atoms, theta, b).unwrap();
        let r = glauber_run(&cfg(&counts, &atoms, theta, b, 40_000, 11)).unwrap();
        assert!((r.mean_magnetization - exact).abs() <= 4.0 * r.std_error, "{r:?} vs {exact}");
    }

    #[test]
    fn detailed_balance_small_system() {
        for &(theta, b) in &[(0.9, 0.2), (2.0, -0.5), (0.0, 0.0)] {
            let w = [1.0, 3.0, 2.0];
            let p = transition_matrix(&w, theta, b).unwrap();
            for row in &p {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            }
            let pi = stationary_distribution(&p, 1e-16, 100_000);
            let target = boltzmann_weights(&w, theta, b);
            assert!(total_variation(&pi, &target) <= 1e-10);
            for i in 0..8 {
                for j in 0..8 {
                    assert!((target[i] * p[i][j] - target[j] * p[j][i]).abs() < 1e-15);
                }
            }
        }
    }
}
