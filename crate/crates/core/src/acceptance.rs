//! Acceptance criteria for the library, runnable from tests and the CLI.
//!
//! Each criterion returns a [`CriterionOutcome`] holding a pass flag, a one
//! line summary of the worst observed discrepancy and the wall time. A
//! criterion also fails when it runs over its time budget.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::degrees::{degree_mgf, degree_mixture, degree_pmf, uniform_degree_mgf};
use crate::edge_ldp::{edge_cgf, edge_cgf_derivative, edge_rate, typical_edge_density};
use crate::error::Result;
use crate::fixedpoint::solve_z_star_zero_field;
use crate::legendre::entropy_rate;
use crate::mc::{boltzmann_weights, glauber_run, stationary_distribution, total_variation, transition_matrix, McConfig};
use crate::oracle::{
    brute_force_log_partition, exact_degree_mgf, exact_log_edge_mgf, exact_log_partition, exact_spin_distribution,
    multihypergeometric_conditional, parity_target, ExactInstance,
};
use crate::spin_ldp::{
    combinatorial_entropy, combinatorial_spin_rate, joint_rate, joint_rate_alt, pressure_variational, solve_lambda,
    spin_rate, spin_rate_high_t, PressureForm,
};
use crate::thermo::{annealed_pressure, critical_beta, magnetization, spontaneous_magnetization, ModelPoint};
use crate::weights::WeightModel;

/// Seed of every randomized criterion.
pub const ACCEPTANCE_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl CriterionOutcome {
    /// `PASS`/`FAIL` line used by the test target and the CLI.
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {:>2} {:<32} {:>9.3}s / {:>4}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.detail
        )
    }
}

pub const CRITERIA: [(usize, &str, u64); 10] = [
    (1, "pressure triple consistency", 5),
    (2, "critical temperature", 1),
    (3, "rate function equalities", 30),
    (4, "low temperature non-convexity", 5),
    (5, "oracle cross-validation", 60),
    (6, "finite-n convergence trends", 300),
    (7, "edge identities", 5),
    (8, "degree mixture", 2),
    (9, "monte carlo concordance", 120),
    (10, "combinatorial machinery", 10),
];

pub fn two_type() -> WeightModel {
    WeightModel::new(&[1.0, 3.0], &[0.5, 0.5]).expect("valid two-type model")
}

fn point(beta: f64, b: f64) -> ModelPoint {
    ModelPoint::new(beta, b, two_type()).expect("valid model point")
}

/// Running record of the worst discrepancy seen against a tolerance.
struct Check {
    ok: bool,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self { ok: true, notes: Vec::new() }
    }

    fn within(&mut self, label: &str, worst: f64, tol: f64) {
        let good = worst <= tol;
        self.ok &= good;
        self.notes.push(format!("{label} {worst:.2e}{}{tol:.0e}", if good { "<=" } else { ">" }));
    }

    fn holds(&mut self, label: &str, cond: bool) {
        self.ok &= cond;
        if !cond {
            self.notes.push(format!("{label} violated"));
        }
    }

    fn finish(self) -> (bool, String) {
        (self.ok, self.notes.join("; "))
    }
}

fn max_abs<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    xs.into_iter().fold(0.0, |a, x| if x.is_nan() { f64::INFINITY } else { a.max(x.abs()) })
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn criterion_1() -> Result<(bool, String)> {
    let bc = critical_beta(&two_type());
    let mut worst: f64 = 0.0;
    for &beta in &[0.2, bc, 0.8] {
        for &b in &[0.0, 0.1, 0.5] {
            let p = point(beta, b);
            let a = annealed_pressure(&p)?;
            let two = pressure_variational(&p, PressureForm::TwoDim)?;
            let two_b = pressure_variational(&p, PressureForm::TwoDimB)?;
            worst = worst.max(max_abs([a - two, a - two_b, two - two_b]));
        }
    }
    let mut c = Check::new();
    c.within("max pressure gap", worst, 1e-8);
    Ok(c.finish())
}

fn criterion_2() -> Result<(bool, String)> {
    let model = two_type();
    let bc = critical_beta(&model);
    let mut c = Check::new();
    c.within("beta_c error", (bc - 0.4f64.asinh()).abs(), 1e-12);
    let mut below_zero = true;
    let mut above_positive = true;
    for k in 1..=20 {
        let d = k as f64 * 1e-3;
        below_zero &= solve_z_star_zero_field((bc - d).sinh(), &model)?.z_star == 0.0;
        above_positive &= solve_z_star_zero_field((bc + d).sinh(), &model)?.z_star > 0.0;
    }
    c.holds("z*=0 below beta_c", below_zero);
    c.holds("z*>0 above beta_c", above_positive);
    Ok(c.finish())
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as i64;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

fn criterion_3() -> Result<(bool, String)> {
    let mut c = Check::new();
    let model = two_type();
    let mut worst: f64 = 0.0;
    for &(beta, b) in &[(0.8, 0.1), (0.2, -0.3)] {
        let p = point(beta, b);
        for &x1 in &[-0.6, -0.3, 0.0, 0.3, 0.6] {
            let (lo, hi) = model.weighted_range_given_mean(x1);
            for &f in &[0.1, 0.3, 0.5, 0.7, 0.9] {
                let x2 = lo + f * (hi - lo);
                let a = joint_rate(x1, x2, &p)?.value;
                let e = joint_rate_alt(x1, x2, &p)?.value;
                worst = worst.max((a - e).abs());
            }
        }
    }
    c.within("(a) joint vs alt", worst, 1e-8);

    let mut worst: f64 = 0.0;
    for &b in &[0.0, 0.3] {
        let p = point(0.2, b);
        for m in grid(-0.8, 0.8, 0.1) {
            worst = worst.max((spin_rate_high_t(m, &p)?.value - spin_rate(m, &p)?.value).abs());
        }
    }
    c.within("(b) high-T vs contraction", worst, 1e-6);

    let mut worst: f64 = 0.0;
    for &beta in &[0.2, 0.8] {
        for &b in &[0.0, 0.3] {
            let p = point(beta, b);
            for m in grid(-0.9, 0.9, 0.1) {
                worst = worst.max((combinatorial_spin_rate(m, &p)?.value - spin_rate(m, &p)?.value).abs());
            }
        }
    }
    c.within("(c) combinatorial vs contraction", worst, 1e-6);
    Ok(c.finish())
}

fn criterion_4() -> Result<(bool, String)> {
    let p = point(0.8, 0.0);
    let m_plus = spontaneous_magnetization(0.8, &p.model)?;
    let mut c = Check::new();
    c.holds("m+ > 0", m_plus > 0.0);
    let at_wells = max_abs([spin_rate(m_plus, &p)?.value, spin_rate(-m_plus, &p)?.value]);
    c.within("I(+-m+)", at_wells, 1e-8);
    let origin = spin_rate(0.0, &p)?.value;
    c.holds("I(0) >= 1e-3", origin >= 1e-3);
    c.notes.push(format!("I(0)={origin:.4e}"));
    let flat = spin_rate_high_t(0.0, &p)?;
    c.within("envelope at 0", flat.value.abs(), 1e-8);
    c.holds("0 not exposed", !flat.exposed);
    Ok(c.finish())
}

fn criterion_5() -> Result<(bool, String)> {
    use rayon::prelude::*;
    let atom_sets: [&[f64]; 3] = [&[1.0], &[1.0, 3.0], &[1.0, 2.0, 4.0]];
    let mut vectors: Vec<(Vec<usize>, &[f64])> = Vec::new();
    for &atoms in &atom_sets {
        let k = atoms.len();
        let mut counts = vec![1usize; k];
        loop {
            if counts.iter().sum::<usize>() <= 12 {
                vectors.push((counts.clone(), atoms));
            }
            let mut pos = 0;
            loop {
                counts[pos] += 1;
                if counts.iter().sum::<usize>() <= 12 {
                    break;
                }
                counts[pos] = 1;
                pos += 1;
                if pos == k {
                    break;
                }
            }
            if pos == k {
                break;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ACCEPTANCE_SEED);
    let draws: Vec<(f64, f64)> = (0..50)
        .map(|_| (rng.random_range(0.0..2.0), rng.random_range(-1.0..1.0)))
        .collect();
    let worst = draws
        .par_iter()
        .map(|&(beta, b)| -> Result<f64> {
            let mut w: f64 = 0.0;
            for (counts, atoms) in &vectors {
                let inst = ExactInstance::new(counts, atoms, beta, b)?;
                let exact = exact_log_partition(&inst)?;
                let brute = brute_force_log_partition(&inst.weight_sequence()?, beta, b)?;
                w = w.max((exact - brute).abs() / brute.abs().max(f64::MIN_POSITIVE));
            }
            Ok(w)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut c = Check::new();
    c.notes.push(format!("{} count vectors x 50 draws", vectors.len()));
    c.within("max relative gap", worst, 1e-10);
    Ok(c.finish())
}

/// Sizes along which the finite-n trends are checked.
pub const TREND_SIZES: [usize; 5] = [50, 100, 200, 400, 800];

fn criterion_6() -> Result<(bool, String)> {
    let mut c = Check::new();
    let atoms = [1.0, 3.0];
    for &(beta, b) in &[(0.2, 0.1), (0.8, 0.0), (0.8, 0.3)] {
        let p = point(beta, b);
        let psi = annealed_pressure(&p)?;
        let tag = format!("({beta},{b})");
        let mut press = Vec::new();
        let mut spins: Vec<Vec<f64>> = vec![Vec::new(); 3];
        let mut edges: Vec<Vec<f64>> = vec![Vec::new(); 2];
        let mut degs: Vec<Vec<f64>> = vec![Vec::new(); 3];
        let ms = [-0.4, 0.0, 0.4];
        let ts_edge = [-0.5, 0.5];
        let ts_deg = [-1.0, 0.5, 1.0];
        let rates: Vec<f64> = ms.iter().map(|&m| spin_rate(m, &p).map(|r| r.value)).collect::<Result<_>>()?;
        let cgfs: Vec<f64> = ts_edge.iter().map(|&t| edge_cgf(t, &p).map(|e| e.value)).collect::<Result<_>>()?;
        let limits: Vec<f64> = ts_deg.iter().map(|&t| degree_mgf(t, atoms[0], &p)).collect::<Result<_>>()?;
        for &n in &TREND_SIZES {
            let inst = ExactInstance::new(&[n / 2, n / 2], &atoms, beta, b)?;
            let nf = n as f64;
            press.push((exact_log_partition(&inst)? / nf - psi).abs());
            let dist = exact_spin_distribution(&inst)?;
            for (i, &m) in ms.iter().enumerate() {
                let emp = -dist.log_prob(parity_target(m, n)) / nf;
                spins[i].push((emp - rates[i]).abs());
            }
            for (i, &t) in ts_edge.iter().enumerate() {
                edges[i].push((exact_log_edge_mgf(t, &inst)? / nf - cgfs[i]).abs());
            }
            for (i, &t) in ts_deg.iter().enumerate() {
                degs[i].push((exact_degree_mgf(t, 0, &inst)? / limits[i] - 1.0).abs());
            }
        }
        c.holds(&format!("pressure decreasing {tag}"), strictly_decreasing(&press));
        c.within(&format!("pressure {tag}"), press[4], 5e-3);
        for (i, s) in spins.iter().enumerate() {
            c.holds(&format!("spin decreasing {tag} m={}", ms[i]), strictly_decreasing(s));
            c.within(&format!("spin {tag} m={}", ms[i]), s[4], 2e-2);
        }
        for (i, e) in edges.iter().enumerate() {
            c.holds(&format!("edge decreasing {tag} t={}", ts_edge[i]), strictly_decreasing(e));
        }
        let worst_edge = max_abs(edges.iter().map(|e| e[4]));
        c.notes.push(format!("edge {tag} {worst_edge:.2e}"));
        for (i, d) in degs.iter().enumerate() {
            c.holds(&format!("degree decreasing {tag} t={}", ts_deg[i]), strictly_decreasing(d));
            c.within(&format!("degree {tag} t={}", ts_deg[i]), d[4], 1e-2);
        }
    }
    Ok(c.finish())
}

fn criterion_7() -> Result<(bool, String)> {
    let mut c = Check::new();
    let p = point(0.8, 0.1);
    c.within("phi(0)", edge_cgf(0.0, &p)?.value.abs(), 1e-12);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for &t in &[-1.0, 0.0, 1.0] {
        let fd = (edge_cgf(t + h, &p)?.value - edge_cgf(t - h, &p)?.value) / (2.0 * h);
        worst = worst.max((fd - edge_cgf_derivative(t, &p)?).abs());
    }
    c.within("phi' vs difference", worst, 1e-6);
    let free = point(0.0, 0.0);
    let exact = grid(-2.0, 2.0, 0.25)
        .into_iter()
        .map(|t| edge_cgf(t, &free).map(|e| e.value == 0.5 * (t.exp() - 1.0) * free.model.mean()))
        .collect::<Result<Vec<bool>>>()?;
    c.holds("free edge cgf exact", exact.iter().all(|&e| e));
    c.within("edge rate at typical density", edge_rate(typical_edge_density(&p)?, &p)?.value.abs(), 1e-10);
    let d = (uniform_degree_mgf(h, &p)? - uniform_degree_mgf(-h, &p)?) / (2.0 * h);
    c.within("mean degree vs 2 y*", (d - 2.0 * typical_edge_density(&p)?).abs(), 1e-8);
    Ok(c.finish())
}

fn criterion_8() -> Result<(bool, String)> {
    let mut c = Check::new();
    let (mut mgf_gap, mut mass_gap, mut mean_gap): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for &(beta, b) in &[(0.5, 0.2), (0.8, 0.1), (0.8, 0.0), (1.2, -0.4)] {
        let p = point(beta, b);
        let z = p.z_star()?;
        for &w in &[1.0, 3.0] {
            let mix = degree_mixture(w, &p)?;
            for &t in &[-1.0, -0.3, 0.5, 1.0] {
                let direct = degree_mgf(t, w, &p)?;
                mgf_gap = mgf_gap.max((mix.mgf(t) - direct).abs() / direct.max(1.0));
            }
            if !mix.valid_pmf {
                continue;
            }
            let pmf: Vec<f64> = (0..=400).map(|d| degree_pmf(d, w, &p)).collect::<Result<_>>()?;
            mass_gap = mass_gap.max((pmf.iter().sum::<f64>() - 1.0).abs());
            let mean: f64 = pmf.iter().enumerate().map(|(d, q)| d as f64 * q).sum();
            let u = z * w * mix.a_beta;
            let mgf_mean = beta.cosh() * w + (u + b).tanh() * u;
            mean_gap = mean_gap.max((mean - mgf_mean).abs());
        }
    }
    c.within("mixture vs mgf", mgf_gap, 1e-10);
    c.within("pmf mass", mass_gap, 1e-9);
    c.within("pmf mean", mean_gap, 1e-8);
    Ok(c.finish())
}

fn criterion_9() -> Result<(bool, String)> {
    let mut c = Check::new();
    let config = McConfig {
        counts: vec![1000, 1000],
        atoms: vec![1.0, 3.0],
        theta: 0.8f64.sinh(),
        b: 0.2,
        sweeps: 100_000,
        burn_in: 1000,
        seed: ACCEPTANCE_SEED,
        thin: 1,
    };
    let run = glauber_run(&config)?;
    let target = magnetization(&point(0.8, 0.2))?;
    let gap = (run.mean_magnetization - target).abs();
    c.holds("within 3 standard errors", gap <= 3.0 * run.std_error);
    c.notes.push(format!(
        "mc {:.6} vs {:.6}, gap {:.2e}, se {:.2e}",
        run.mean_magnetization, target, gap, run.std_error
    ));
    let w = [1.0, 3.0, 2.0];
    let mut tv: f64 = 0.0;
    for &(theta, b) in &[(0.8f64.sinh(), 0.2), (2.0, -0.5)] {
        let pi = stationary_distribution(&transition_matrix(&w, theta, b)?, 1e-16, 100_000);
        tv = tv.max(total_variation(&pi, &boltzmann_weights(&w, theta, b)));
    }
    c.within("detailed balance TV", tv, 1e-10);
    Ok(c.finish())
}

fn criterion_10() -> Result<(bool, String)> {
    let mut c = Check::new();
    let model = two_type();
    let (mut resid, mut ident): (f64, f64) = (0.0, 0.0);
    for &m in &[-0.7, -0.35, 0.0, 0.35, 0.7] {
        let (lo, hi) = model.weighted_range_given_mean(m);
        for &f in &[0.05, 0.25, 0.5, 0.75, 0.95] {
            let x = 0.5 * (lo + f * (hi - lo) + model.mean());
            let lam = solve_lambda(m, x, &model)?;
            resid = resid.max(max_abs([lam.residuals.0, lam.residuals.1]));
            let (value, _) = combinatorial_entropy(m, x, &model)?;
            let reference = entropy_rate(m, 2.0 * x - model.mean(), &model).value - std::f64::consts::LN_2;
            ident = ident.max((value - reference).abs());
        }
    }
    c.within("lambda residuals", resid, 1e-10);
    c.within("logistic entropy identity", ident, 1e-8);
    let inst = ExactInstance::new(&[5, 7], &[1.0, 3.0], 0.0, 0.0)?;
    let mut mass: f64 = 0.0;
    for m_plus in 0..=12 {
        let total: f64 = (0..=5usize.min(m_plus))
            .filter(|&q| m_plus - q <= 7)
            .map(|q| multihypergeometric_conditional(&[q, m_plus - q], &inst, m_plus))
            .sum();
        mass = mass.max((total - 1.0).abs());
    }
    c.within("multihypergeometric mass", mass, 1e-12);
    Ok(c.finish())
}

/// Runs one criterion by number, `1..=10`.
pub fn run_criterion(id: usize) -> CriterionOutcome {
    let (_, name, budget) = CRITERIA[id - 1];
    let start = Instant::now();
    let result = match id {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        10 => criterion_10(),
        _ => unreachable!("criteria are numbered 1 to 10"),
    };
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget);
    let (mut passed, mut detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    if elapsed > budget {
        passed = false;
        detail.push_str("; over time budget");
    }
    CriterionOutcome {
        id,
        name,
        passed,
        detail,
        elapsed,
        budget,
    }
}

pub fn run_all() -> Vec<CriterionOutcome> {
    (1..=CRITERIA.len()).map(run_criterion).collect()
}
