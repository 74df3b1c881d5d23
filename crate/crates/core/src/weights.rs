//! Finite-type vertex weight distributions.
//!
//! A [`WeightModel`] is the limiting weight law `W`: finitely many atoms
//! `a_1 < ... < a_K` with probabilities `p_k`. A [`WeightSequence`] is the
//! per-vertex weight vector of a finite graph, from which the generalized
//! random graph edge probabilities `w_i w_j / (l_n + w_i w_j)` follow.

use crate::error::{Error, Result};

/// Tolerance on `|sum(p) - 1|` before renormalization is flagged.
pub const RENORMALIZE_WARN_TOL: f64 = 1e-9;

/// Finitely supported weight distribution with cached moments.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightModel {
    atoms: Vec<f64>,
    probs: Vec<f64>,
    mean: f64,
    second_moment: f64,
    renormalized: bool,
}

impl WeightModel {
    /// Builds a model from strictly increasing positive atoms and nonnegative
    /// probabilities. Probabilities are renormalized to sum to one.
    pub fn new(atoms: &[f64], probs: &[f64]) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Validation("weight model needs at least one atom".into()));
        }
        if atoms.len() != probs.len() {
            return Err(Error::Validation(format!(
                "atoms ({}) and probs ({}) have different lengths",
                atoms.len(),
                probs.len()
            )));
        }
        for (k, &a) in atoms.iter().enumerate() {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::Validation(format!("atom {k} = {a} is not a positive real")));
            }
            if k > 0 {
                let prev = atoms[k - 1];
                if a == prev {
                    return Err(Error::Validation(format!("duplicate atom {a}")));
                }
                if a < prev {
                    return Err(Error::Validation(format!(
                        "atoms must be strictly increasing ({prev} then {a})"
                    )));
                }
            }
        }
        for (k, &p) in probs.iter().enumerate() {
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::Validation(format!("prob {k} = {p} is negative or not finite")));
            }
        }
        let total: f64 = probs.iter().sum();
        if total <= 0.0 {
            return Err(Error::Validation("all probabilities are zero".into()));
        }
        let renormalized = (total - 1.0).abs() > RENORMALIZE_WARN_TOL;
        let probs: Vec<f64> = probs.iter().map(|p| p / total).collect();
        let mean = atoms.iter().zip(&probs).map(|(a, p)| p * a).sum();
        let second_moment = atoms.iter().zip(&probs).map(|(a, p)| p * a * a).sum();
        Ok(Self {
            atoms: atoms.to_vec(),
            probs,
            mean,
            second_moment,
            renormalized,
        })
    }

    /// Like [`WeightModel::new`] but accepts `(atom, prob)` pairs in any order.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let mut sorted = pairs.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let atoms: Vec<f64> = sorted.iter().map(|p| p.0).collect();
        let probs: Vec<f64> = sorted.iter().map(|p| p.1).collect();
        Self::new(&atoms, &probs)
    }

    /// Single-type model `W = a` almost surely.
    pub fn single(a: f64) -> Result<Self> {
        Self::new(&[a], &[1.0])
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_types(&self) -> usize {
        self.atoms.len()
    }

    /// `E[W]`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `E[W^2]`.
    pub fn second_moment(&self) -> f64 {
        self.second_moment
    }

    /// True when the input probabilities were off from one by more than
    /// [`RENORMALIZE_WARN_TOL`].
    pub fn was_renormalized(&self) -> bool {
        self.renormalized
    }

    /// `(atom, prob)` pairs with strictly positive probability.
    pub fn support(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.atoms
            .iter()
            .zip(&self.probs)
            .filter(|(_, p)| **p > 0.0)
            .map(|(a, p)| (*a, *p))
    }

    pub fn support_len(&self) -> usize {
        self.support().count()
    }

    /// Smallest atom carrying positive mass.
    pub fn support_min(&self) -> f64 {
        self.support().map(|s| s.0).fold(f64::INFINITY, f64::min)
    }

    /// Largest atom carrying positive mass.
    pub fn support_max(&self) -> f64 {
        self.support().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `E[f(W)]` as a finite sum over the support.
    pub fn expect<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.support().map(|(a, p)| p * f(a)).sum()
    }

    /// Range of `E[W s(W)]` over spin profiles `s: atoms -> [-1, 1]` with
    /// `E[s(W)] = m`. Filled greedily from the lightest (lower end) or the
    /// heaviest (upper end) atom.
    pub fn weighted_range_given_mean(&self, m: f64) -> (f64, f64) {
        let support: Vec<(f64, f64)> = self.support().collect();
        // u = (1 + s) / 2 in [0, 1] with E[u] = (1 + m) / 2
        let target = 0.5 * (1.0 + m);
        let fill = |order: &mut dyn Iterator<Item = &(f64, f64)>| {
            let mut left = target;
            let mut acc = 0.0;
            for &(a, p) in order {
                let take = left.min(p).max(0.0);
                acc += a * take;
                left -= take;
            }
            2.0 * acc - self.mean
        };
        let lo = fill(&mut support.iter());
        let hi = fill(&mut support.iter().rev());
        (lo, hi)
    }

    /// Range of `E[s(W)]` over spin profiles with `E[W s(W)] = x2`.
    pub fn mean_range_given_weighted(&self, x2: f64) -> (f64, f64) {
        // weighted_range_given_mean is continuous and increasing in m at both
        // ends, so invert each end by bisection.
        let invert = |upper: bool| {
            let eval = |m: f64| {
                let (lo, hi) = self.weighted_range_given_mean(m);
                if upper { lo } else { hi }
            };
            // upper end of m: largest m with lower_x2(m) <= x2
            // lower end of m: smallest m with upper_x2(m) >= x2
            let (mut a, mut b) = (-1.0_f64, 1.0_f64);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if eval(mid) < x2 {
                    a = mid;
                } else {
                    b = mid;
                }
                if b - a < 1e-16 {
                    break;
                }
            }
            0.5 * (a + b)
        };
        (invert(false), invert(true))
    }
}

/// Per-vertex weights of a finite graph.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence {
    weights: Vec<f64>,
    total: f64,
}

impl WeightSequence {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Validation("weight sequence is empty".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Validation(format!("weight {w} is not a positive real")));
        }
        let total = order_free_sum(&weights);
        Ok(Self { weights, total })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Total weight `l_n`.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Generalized random graph edge probability `p_ij`.
    pub fn edge_probability(&self, i: usize, j: usize) -> f64 {
        grg_edge_probability(self.weights[i], self.weights[j], self.total)
    }
}

/// `w_i w_j / (l_n + w_i w_j)`.
pub fn grg_edge_probability(wi: f64, wj: f64, total: f64) -> f64 {
    let prod = wi * wj;
    prod / (total + prod)
}

/// Sum that does not depend on the order of the entries: sorted, then
/// compensated.
fn order_free_sum(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in sorted {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Empirical model and explicit weight sequence from per-type vertex counts.
pub fn counts_to_model(counts: &[usize], atoms: &[f64]) -> Result<(WeightModel, WeightSequence)> {
    if counts.is_empty() {
        return Err(Error::Validation("counts are empty".into()));
    }
    if counts.len() != atoms.len() {
        return Err(Error::Validation(format!(
            "counts ({}) and atoms ({}) have different lengths",
            counts.len(),
            atoms.len()
        )));
    }
    let n: usize = counts.iter().sum();
    if n == 0 {
        return Err(Error::Validation("counts contain no vertices".into()));
    }
    let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    let model = WeightModel::new(atoms, &probs)?;
    let weights: Vec<f64> = counts
        .iter()
        .zip(atoms)
        .flat_map(|(&c, &a)| std::iter::repeat_n(a, c))
        .collect();
    let seq = WeightSequence::new(weights)?;
    Ok((model, seq))
}
