//! Exact finite-volume quantities for finite-type instances.
//!
//! Every vertex of type `k` has weight `a_k`, so the annealed numerator
//! `sum_sigma e^{B sum sigma} prod_{i<j} (e^{beta s_i s_j} p_ij + 1 - p_ij)`
//! depends on a spin configuration only through the number of up spins
//! `j_k` in each type. Summing over the tuples `(j_1, ..., j_K)` with
//! multiplicities `prod_k C(n_k, j_k)` replaces `2^n` terms by
//! `prod_k (n_k + 1)` terms. All sums are accumulated in log space.
//!
//! Edge and degree tilts enter through per-pair factors
//! `e^{t + beta s s'} p + 1 - p = C e^{beta_t s s'}`, so tilted quantities use
//! the same reduction with modified pair factors.

use rayon::prelude::*;
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::roots::LogSum;
use crate::weights::WeightSequence;

/// Largest total number of vertices accepted by the type reduction.
pub const MAX_VERTICES: usize = 5000;
/// Largest number of types accepted by the type reduction.
pub const MAX_TYPES: usize = 4;
/// Largest number of up-spin tuples visited by one reduction.
pub const MAX_TUPLES: u128 = 50_000_000;
/// Largest instance for the `2^n` enumeration.
pub const MAX_BRUTE_FORCE: usize = 16;
/// Largest number of individually tracked vertices in degree MGFs.
pub const MAX_DISTINGUISHED: usize = 4;

/// A finite graph given by per-type vertex counts, with `(beta, B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactInstance {
    pub counts: Vec<usize>,
    pub atoms: Vec<f64>,
    pub beta: f64,
    pub b: f64,
    n: usize,
    total_weight: f64,
    /// `p[k][l] = a_k a_l / (l_n + a_k a_l)`.
    p: Vec<Vec<f64>>,
}

impl ExactInstance {
    pub fn new(counts: &[usize], atoms: &[f64], beta: f64, b: f64) -> Result<Self> {
        if counts.is_empty() || counts.len() != atoms.len() {
            return Err(Error::Validation(format!(
                "counts ({}) and atoms ({}) must be nonempty and of equal length",
                counts.len(),
                atoms.len()
            )));
        }
        if let Some(a) = atoms.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::Validation(format!("atom {a} is not a positive real")));
        }
        if !(beta.is_finite() && beta >= 0.0) || !b.is_finite() {
            return Err(Error::Validation(format!("invalid parameters beta={beta}, B={b}")));
        }
        let n: usize = counts.iter().sum();
        if n == 0 {
            return Err(Error::Validation("instance has no vertices".into()));
        }
        let total_weight: f64 = counts.iter().zip(atoms).map(|(&c, &a)| c as f64 * a).sum();
        let k = counts.len();
        let mut p = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in 0..k {
                let prod = atoms[i] * atoms[j];
                p[i][j] = prod / (total_weight + prod);
            }
        }
        Ok(Self {
            counts: counts.to_vec(),
            atoms: atoms.to_vec(),
            beta,
            b,
            n,
            total_weight,
            p,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_types(&self) -> usize {
        self.counts.len()
    }

    /// `l_n`.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// Edge probability between a type-`k` and a type-`l` vertex.
    pub fn edge_probability(&self, k: usize, l: usize) -> f64 {
        self.p[k][l]
    }

    /// Explicit per-vertex weights, grouped by type.
    pub fn weight_sequence(&self) -> Result<WeightSequence> {
        let w: Vec<f64> = self
            .counts
            .iter()
            .zip(&self.atoms)
            .flat_map(|(&c, &a)| std::iter::repeat_n(a, c))
            .collect();
        WeightSequence::new(w)
    }

    fn check_caps(&self) -> Result<()> {
        if self.n > MAX_VERTICES {
            return Err(Error::Resource(format!("n = {} exceeds {MAX_VERTICES}", self.n)));
        }
        if self.num_types() > MAX_TYPES {
            return Err(Error::Resource(format!(
                "{} types exceed {MAX_TYPES}",
                self.num_types()
            )));
        }
        let tuples: u128 = self.counts.iter().map(|&c| c as u128 + 1).product();
        if tuples > MAX_TUPLES {
            return Err(Error::Resource(format!("{tuples} count tuples exceed {MAX_TUPLES}")));
        }
        Ok(())
    }
}

/// Coupling and prefactor of a tilted edge factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltedEdgeParams {
    pub beta_t: f64,
    pub c_t: f64,
}

impl TiltedEdgeParams {
    /// `log(C e^{beta_t s})` for the spin product `s = +-1`.
    pub fn log_factor(&self, aligned: bool) -> f64 {
        self.c_t.ln() + if aligned { self.beta_t } else { -self.beta_t }
    }
}

/// Solves `e^{t + beta s} p + 1 - p = C e^{beta_t s}` for `s = +-1`.
pub fn tilted_edge_params(t: f64, p: f64, beta: f64) -> Result<TiltedEdgeParams> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("edge probability {p} outside (0, 1)")));
    }
    let up = (p * ((t + beta).exp() - 1.0)).ln_1p();
    let down = (p * ((t - beta).exp() - 1.0)).ln_1p();
    let beta_t = 0.5 * (up - down);
    let c_t = (t.exp() * p * beta.cosh() + 1.0 - p) / beta_t.cosh();
    Ok(TiltedEdgeParams { beta_t, c_t })
}

/// Log pair factors for aligned and anti-aligned spins at one tilt.
#[derive(Debug, Clone)]
struct PairTable {
    la: Vec<Vec<f64>>,
    ld: Vec<Vec<f64>>,
}

impl PairTable {
    fn new(inst: &ExactInstance, tilt: f64) -> Result<Self> {
        let k = inst.num_types();
        let mut la = vec![vec![0.0; k]; k];
        let mut ld = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in 0..k {
                let tp = tilted_edge_params(tilt, inst.p[i][j], inst.beta)?;
                la[i][j] = tp.log_factor(true);
                ld[i][j] = tp.log_factor(false);
            }
        }
        Ok(Self { la, ld })
    }
}

fn choose2(x: usize) -> f64 {
    (x as f64) * (x as f64 - 1.0) * 0.5
}

/// Individually tracked vertex: its type and the tilt on its edges.
#[derive(Debug, Clone)]
struct Distinguished {
    kind: usize,
    table: PairTable,
}

/// Precomputed data for one reduction.
struct Reduction<'a> {
    inst: &'a ExactInstance,
    rest: Vec<usize>,
    ln_binom: Vec<Vec<f64>>,
    table: PairTable,
    dist: Vec<Distinguished>,
    /// Pair factors between distinguished vertices `(la, ld)`.
    dist_pairs: Vec<Vec<(f64, f64)>>,
}

impl<'a> Reduction<'a> {
    fn new(inst: &'a ExactInstance, rest_tilt: f64, dist: &[(usize, f64)]) -> Result<Self> {
        inst.check_caps()?;
        if dist.len() > MAX_DISTINGUISHED {
            return Err(Error::Resource(format!(
                "{} tracked vertices exceed {MAX_DISTINGUISHED}",
                dist.len()
            )));
        }
        let mut rest = inst.counts.clone();
        for &(k, _) in dist {
            if k >= rest.len() || rest[k] == 0 {
                return Err(Error::Validation(format!("no vertex of type {k} left to track")));
            }
            rest[k] -= 1;
        }
        let ln_binom = rest
            .iter()
            .map(|&c| (0..=c).map(|j| ln_binomial(c as u64, j as u64)).collect())
            .collect();
        let table = PairTable::new(inst, rest_tilt)?;
        let mut d = Vec::with_capacity(dist.len());
        for &(k, s) in dist {
            d.push(Distinguished {
                kind: k,
                table: PairTable::new(inst, s)?,
            });
        }
        let mut dist_pairs = vec![vec![(0.0, 0.0); dist.len()]; dist.len()];
        for x in 0..dist.len() {
            for y in 0..dist.len() {
                if x != y {
                    let (kx, sx) = dist[x];
                    let (ky, sy) = dist[y];
                    let tp = tilted_edge_params(sx + sy, inst.p[kx][ky], inst.beta)?;
                    dist_pairs[x][y] = (tp.log_factor(true), tp.log_factor(false));
                }
            }
        }
        Ok(Self {
            inst,
            rest,
            ln_binom,
            table,
            dist: d,
            dist_pairs,
        })
    }

    /// Log weight of all configurations with `j[k]` up spins among the
    /// untracked type-`k` vertices, summed over tracked spins.
    fn log_weight(&self, j: &[usize]) -> f64 {
        let n = &self.rest;
        let k = n.len();
        let t = &self.table;
        let mut w = 0.0;
        let mut s = 0.0;
        for a in 0..k {
            let (ja, da) = (j[a], n[a] - j[a]);
            w += self.ln_binom[a][ja];
            s += ja as f64 - da as f64;
            w += (choose2(ja) + choose2(da)) * t.la[a][a] + (ja * da) as f64 * t.ld[a][a];
            for b in (a + 1)..k {
                let (jb, db) = (j[b], n[b] - j[b]);
                w += (ja * jb + da * db) as f64 * t.la[a][b] + (ja * db + da * jb) as f64 * t.ld[a][b];
            }
        }
        w += self.inst.b * s;
        if self.dist.is_empty() {
            return w;
        }
        let m = self.dist.len();
        let mut acc = LogSum::new();
        for mask in 0..(1usize << m) {
            let up = |x: usize| mask >> x & 1 == 1;
            let mut v = 0.0;
            for (x, d) in self.dist.iter().enumerate() {
                let sx = up(x);
                v += if sx { self.inst.b } else { -self.inst.b };
                for l in 0..k {
                    let (jl, dl) = (j[l] as f64, (n[l] - j[l]) as f64);
                    let (la, ld) = (d.table.la[d.kind][l], d.table.ld[d.kind][l]);
                    v += if sx { jl * la + dl * ld } else { jl * ld + dl * la };
                }
                for y in (x + 1)..m {
                    let (la, ld) = self.dist_pairs[x][y];
                    v += if sx == up(y) { la } else { ld };
                }
            }
            acc.add(v);
        }
        w + acc.value()
    }

    fn for_each_tuple<F: FnMut(&[usize])>(&self, first: usize, mut f: F) {
        let k = self.rest.len();
        let mut j = vec![0usize; k];
        j[0] = first;
        if k == 1 {
            f(&j);
            return;
        }
        loop {
            f(&j);
            let mut pos = 1;
            loop {
                if j[pos] < self.rest[pos] {
                    j[pos] += 1;
                    break;
                }
                j[pos] = 0;
                pos += 1;
                if pos == k {
                    return;
                }
            }
        }
    }

    /// Log of the full sum.
    fn total(&self) -> f64 {
        let parts: Vec<LogSum> = (0..=self.rest[0])
            .into_par_iter()
            .map(|first| {
                let mut acc = LogSum::new();
                self.for_each_tuple(first, |j| acc.add(self.log_weight(j)));
                acc
            })
            .collect();
        let mut acc = LogSum::new();
        for p in &parts {
            acc.merge(p);
        }
        acc.value()
    }

    /// Log sums binned by the total number of untracked up spins.
    fn by_total(&self) -> Vec<f64> {
        let n: usize = self.rest.iter().sum();
        let parts: Vec<Vec<LogSum>> = (0..=self.rest[0])
            .into_par_iter()
            .map(|first| {
                let mut bins = vec![LogSum::new(); n + 1];
                self.for_each_tuple(first, |j| {
                    let up: usize = j.iter().sum();
                    bins[up].add(self.log_weight(j));
                });
                bins
            })
            .collect();
        let mut bins = vec![LogSum::new(); n + 1];
        for p in &parts {
            for (b, q) in bins.iter_mut().zip(p) {
                b.merge(q);
            }
        }
        bins.iter().map(|b| b.value()).collect()
    }
}

/// `log Z^an_n`.
pub fn exact_log_partition(inst: &ExactInstance) -> Result<f64> {
    Ok(Reduction::new(inst, 0.0, &[])?.total())
}

/// Exact law of the total spin `S_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinDistribution {
    pub n: usize,
    /// Support `-n, -n + 2, ..., n`.
    pub values: Vec<i64>,
    pub log_probs: Vec<f64>,
}

impl SpinDistribution {
    pub fn probs(&self) -> Vec<f64> {
        self.log_probs.iter().map(|l| l.exp()).collect()
    }

    /// `log P(S_n = s)`, `-inf` off the support.
    pub fn log_prob(&self, s: i64) -> f64 {
        let n = self.n as i64;
        if s < -n || s > n || (s + n) % 2 != 0 {
            return f64::NEG_INFINITY;
        }
        self.log_probs[((s + n) / 2) as usize]
    }
}

pub fn exact_spin_distribution(inst: &ExactInstance) -> Result<SpinDistribution> {
    let bins = Reduction::new(inst, 0.0, &[])?.by_total();
    let mut acc = LogSum::new();
    for &b in &bins {
        acc.add(b);
    }
    let log_z = acc.value();
    let n = inst.n();
    Ok(SpinDistribution {
        n,
        values: (0..=n).map(|up| 2 * up as i64 - n as i64).collect(),
        log_probs: bins.iter().map(|b| b - log_z).collect(),
    })
}

/// Total spin value with the parity of `n` nearest to `floor(m n)`.
pub fn parity_target(m: f64, n: usize) -> i64 {
    let n_i = n as i64;
    let base = (m * n as f64).floor() as i64;
    let s = if (base - n_i).rem_euclid(2) == 0 {
        base
    } else if (base + 1) as f64 - m * n as f64 <= m * n as f64 - (base - 1) as f64 {
        base + 1
    } else {
        base - 1
    };
    s.clamp(-n_i, n_i)
}

/// `log E[e^{t |E_n|}]` under the annealed measure.
pub fn exact_log_edge_mgf(t: f64, inst: &ExactInstance) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let num = Reduction::new(inst, t, &[])?.total();
    Ok(num - exact_log_partition(inst)?)
}

pub fn exact_edge_mgf(t: f64, inst: &ExactInstance) -> Result<f64> {
    Ok(exact_log_edge_mgf(t, inst)?.exp())
}

/// `E[e^{s D_v}]` for one vertex `v` of the given type.
pub fn exact_degree_mgf(s: f64, vertex_type: usize, inst: &ExactInstance) -> Result<f64> {
    exact_joint_degree_mgf(&[s], &[vertex_type], inst)
}

/// `E[exp(sum_i s_i D_{v_i})]` for distinct vertices `v_i` of the given types.
pub fn exact_joint_degree_mgf(ss: &[f64], types: &[usize], inst: &ExactInstance) -> Result<f64> {
    if ss.len() != types.len() || ss.is_empty() {
        return Err(Error::Validation("need one tilt per tracked vertex".into()));
    }
    let tilted: Vec<(usize, f64)> = types.iter().copied().zip(ss.iter().copied()).collect();
    let plain: Vec<(usize, f64)> = types.iter().map(|&k| (k, 0.0)).collect();
    let num = Reduction::new(inst, 0.0, &tilted)?.total();
    let den = Reduction::new(inst, 0.0, &plain)?.total();
    Ok((num - den).exp())
}

/// Direct `2^n` evaluation of `log Z^an_n`.
pub fn brute_force_log_partition(weights: &WeightSequence, beta: f64, b: f64) -> Result<f64> {
    let n = weights.len();
    if n > MAX_BRUTE_FORCE {
        return Err(Error::Resource(format!("brute force limited to n <= {MAX_BRUTE_FORCE}, got {n}")));
    }
    let mut la = vec![vec![0.0; n]; n];
    let mut ld = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let p = weights.edge_probability(i, j);
            la[i][j] = (beta.exp() * p + 1.0 - p).ln();
            ld[i][j] = ((-beta).exp() * p + 1.0 - p).ln();
        }
    }
    let mut acc = LogSum::new();
    for cfg in 0u32..(1u32 << n) {
        let spin = |i: usize| cfg >> i & 1 == 1;
        let mut w = 0.0;
        for i in 0..n {
            w += if spin(i) { b } else { -b };
            for j in (i + 1)..n {
                w += if spin(i) == spin(j) { la[i][j] } else { ld[i][j] };
            }
        }
        acc.add(w);
    }
    Ok(acc.value())
}

/// Probability of `q_k` up spins in type `k` given `m_plus` up spins in
/// total, under uniform placement: `prod_k C(n_k, q_k) / C(n, m_plus)`.
pub fn multihypergeometric_conditional(q_counts: &[usize], inst: &ExactInstance, m_plus: usize) -> f64 {
    if q_counts.len() != inst.counts.len()
        || q_counts.iter().sum::<usize>() != m_plus
        || m_plus > inst.n()
        || q_counts.iter().zip(&inst.counts).any(|(q, c)| q > c)
    {
        return 0.0;
    }
    let log: f64 = q_counts
        .iter()
        .zip(&inst.counts)
        .map(|(&q, &c)| ln_binomial(c as u64, q as u64))
        .sum::<f64>()
        - ln_binomial(inst.n() as u64, m_plus as u64);
    log.exp()
}

/// `log` partition function of the finite Curie-Weiss model with Hamiltonian
/// `theta / (2 l_n) (sum w_i s_i)^2 + B sum s_i`, and its magnetization
/// `E[sum s_i] / n`.
pub fn exact_icw(counts: &[usize], atoms: &[f64], theta: f64, b: f64) -> Result<(f64, f64)> {
    let inst = ExactInstance::new(counts, atoms, 0.0, b)?;
    let red = Reduction::new(&inst, 0.0, &[])?;
    let ell = inst.total_weight();
    let n = inst.n() as f64;
    let mut z = LogSum::new();
    let mut plus = LogSum::new();
    let mut minus = LogSum::new();
    red.for_each_all(|j| {
        let mut sw = 0.0;
        let mut s = 0.0;
        let mut lw = 0.0;
        for k in 0..j.len() {
            let d = 2.0 * j[k] as f64 - counts[k] as f64;
            sw += atoms[k] * d;
            s += d;
            lw += red.ln_binom[k][j[k]];
        }
        let w = lw + theta / (2.0 * ell) * sw * sw + b * s;
        z.add(w);
        if s > 0.0 {
            plus.add(w + s.ln());
        } else if s < 0.0 {
            minus.add(w + (-s).ln());
        }
    });
    let lz = z.value();
    let m = ((plus.value() - lz).exp() - (minus.value() - lz).exp()) / n;
    Ok((lz, m))
}

impl Reduction<'_> {
    fn for_each_all<F: FnMut(&[usize])>(&self, mut f: F) {
        for first in 0..=self.rest[0] {
            self.for_each_tuple(first, &mut f);
        }
    }
}
