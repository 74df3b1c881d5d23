//! Subcommand definitions and dispatch.

use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use annealed_ldp::acceptance::{run_criterion, CRITERIA};
use annealed_ldp::degrees::{degree_mgf, degree_pmf};
use annealed_ldp::edge_ldp::{edge_cgf, edge_rate};
use annealed_ldp::mc::{glauber_run, McConfig, RNG_ALGORITHM};
use annealed_ldp::oracle::{
    exact_degree_mgf, exact_log_edge_mgf, exact_log_partition, exact_spin_distribution, ExactInstance,
};
use annealed_ldp::spin_ldp::{spin_rate_curve, SpinMethod};
use annealed_ldp::thermo::{annealed_pressure, icw_magnetization, thermo_report};
use annealed_ldp::weights::counts_to_model;
use annealed_ldp::{Error, ModelPoint, WeightModel};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::grid::{parse_counts, parse_grid};
use crate::table::{write_atomic, Format, Table};

pub const SUBCOMMANDS: [&str; 7] = ["phase", "rate-spin", "rate-edges", "degrees", "oracle", "mc", "validate"];

/// Parsed grid together with the text it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub raw: String,
    pub values: Vec<f64>,
}

fn grid_arg(s: &str) -> Result<Grid, String> {
    let values = parse_grid(s).map_err(|e| e.to_string())?;
    Ok(Grid { raw: s.to_string(), values })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counts(pub Vec<usize>);

fn counts_arg(s: &str) -> Result<Counts, String> {
    parse_counts(s).map(Counts).map_err(|e| e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "annealed-ldp", version, about = "Annealed Ising thermodynamics and large deviations on generalized random graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Weight atoms, strictly increasing.
    #[arg(long, default_value = "1,3", value_parser = grid_arg)]
    pub atoms: Grid,
    /// Atom probabilities; renormalized if they do not sum to one.
    #[arg(long, default_value = "0.5,0.5", value_parser = grid_arg, conflicts_with = "counts")]
    pub probs: Grid,
    /// Per-type vertex counts; the model becomes their empirical law.
    #[arg(long, value_parser = counts_arg)]
    pub counts: Option<Counts>,
}

impl ModelArgs {
    fn model(&self) -> Result<WeightModel, Error> {
        match &self.counts {
            Some(c) => Ok(counts_to_model(&c.0, &self.atoms.values)?.0),
            None => WeightModel::new(&self.atoms.values, &self.probs.values),
        }
    }

    fn describe(&self) -> String {
        match &self.counts {
            Some(c) => format!("atoms={} counts={}", self.atoms.raw, join_usize(&c.0)),
            None => format!("atoms={} probs={}", self.atoms.raw, self.probs.raw),
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Omit the timestamp from the metadata header.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Args, Debug, Clone)]
pub struct PointArgs {
    /// Inverse temperatures.
    #[arg(long, value_parser = grid_arg, allow_hyphen_values = true)]
    pub beta: Grid,
    /// External fields.
    #[arg(long = "B", value_parser = grid_arg, allow_hyphen_values = true, default_value = "0")]
    pub b: Grid,
}

impl PointArgs {
    fn pairs(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for &beta in &self.beta.values {
            for &b in &self.b.values {
                out.push((beta, b));
            }
        }
        out
    }

    fn describe(&self) -> String {
        format!("beta={} B={}", self.beta.raw, self.b.raw)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Contraction,
    #[value(alias = "highT", alias = "highT_legendre")]
    HighT,
    Combinatorial,
}

impl MethodArg {
    fn method(self) -> SpinMethod {
        match self {
            MethodArg::Contraction => SpinMethod::Contraction,
            MethodArg::HighT => SpinMethod::HighTLegendre,
            MethodArg::Combinatorial => SpinMethod::Combinatorial,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    LogPartition,
    SpinDistribution,
    EdgeMgf,
    DegreeMgf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Acceptance,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fixed point, pressure, magnetization and susceptibility.
    #[command(args_override_self = true)]
    Phase {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Rate function of the total spin.
    #[command(args_override_self = true)]
    RateSpin {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, value_parser = grid_arg, allow_hyphen_values = true)]
        m: Grid,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "contraction")]
        method: Vec<MethodArg>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Edge-count cumulant generating function (`--t`) or rate (`--y`).
    #[command(args_override_self = true)]
    RateEdges {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, value_parser = grid_arg, allow_hyphen_values = true, conflicts_with = "y", required_unless_present = "y")]
        t: Option<Grid>,
        #[arg(long, value_parser = grid_arg, allow_hyphen_values = true)]
        y: Option<Grid>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Degree generating function (`--t`) or probability mass function (`--d`).
    #[command(args_override_self = true)]
    Degrees {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        point: PointArgs,
        /// Vertex weights; the atoms when omitted.
        #[arg(long, value_parser = grid_arg)]
        w: Option<Grid>,
        #[arg(long, value_parser = grid_arg, allow_hyphen_values = true, conflicts_with = "d", required_unless_present = "d")]
        t: Option<Grid>,
        #[arg(long, value_parser = grid_arg)]
        d: Option<Grid>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Exact finite-n quantities by type-count enumeration.
    #[command(args_override_self = true)]
    Oracle {
        #[arg(long, value_parser = counts_arg)]
        counts: Counts,
        #[arg(long, default_value = "1,3", value_parser = grid_arg)]
        atoms: Grid,
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, value_enum, default_value = "log-partition")]
        quantity: Quantity,
        #[arg(long, value_parser = grid_arg, allow_hyphen_values = true)]
        t: Option<Grid>,
        /// Type of the tracked vertex for degree generating functions.
        #[arg(long, default_value_t = 0)]
        vertex_type: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Heat-bath Monte Carlo for the inhomogeneous Curie-Weiss model.
    #[command(args_override_self = true)]
    Mc {
        #[arg(long, value_parser = counts_arg)]
        counts: Counts,
        #[arg(long, default_value = "1,3", value_parser = grid_arg)]
        atoms: Grid,
        /// Inverse temperatures; the coupling is `sinh(beta)`.
        #[arg(long, value_parser = grid_arg, conflicts_with = "theta", required_unless_present = "theta")]
        beta: Option<Grid>,
        /// Couplings, used as given.
        #[arg(long, value_parser = grid_arg)]
        theta: Option<Grid>,
        #[arg(long = "B", value_parser = grid_arg, allow_hyphen_values = true, default_value = "0")]
        b: Grid,
        #[arg(long, default_value_t = 10_000)]
        sweeps: usize,
        #[arg(long, default_value_t = 1_000)]
        burn_in: usize,
        #[arg(long, default_value_t = 1)]
        thin: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Runs the acceptance criteria and prints a pass/fail table.
    #[command(args_override_self = true)]
    Validate {
        #[arg(long, value_enum, default_value = "acceptance")]
        suite: Suite,
        /// Subset of criteria to run, e.g. `1,2,7`.
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<usize>>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

/// Failure of a run, with its exit status.
#[derive(Debug)]
pub enum Failure {
    /// Exit 1: invalid model input, a numerical failure or a failed suite.
    Validation(String),
    /// Exit 2: usage errors and unwritable output.
    Usage(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Usage(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Usage(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

fn join_usize(xs: &[usize]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn header(table: &mut Table, command: &str, model: String, params: String, seed: Option<u64>, out: &OutputArgs) {
    table.meta("command", command);
    table.meta("model", model);
    table.meta("parameters", params);
    table.meta("version", env!("CARGO_PKG_VERSION"));
    if let Some(s) = seed {
        table.meta("seed", s.to_string());
        table.meta("rng", RNG_ALGORITHM);
    }
    if !out.deterministic {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        table.meta("timestamp", format!("{secs}"));
    }
}

fn emit(table: &Table, out: &OutputArgs) -> Result<(), Failure> {
    let text = table
        .render(out.format)
        .map_err(|e| Failure::Validation(format!("cannot render output: {e}")))?;
    match &out.output {
        Some(path) => write_atomic(path, &text)
            .map_err(|e| Failure::Usage(format!("cannot write '{}': {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Evaluates `f` on every item in parallel and concatenates the rows in
/// item order.
fn rows_in_order<T, F>(items: &[T], f: F) -> Result<Vec<Vec<f64>>, Error>
where
    T: Sync,
    F: Fn(&T) -> Result<Vec<Vec<f64>>, Error> + Sync + Send,
{
    let parts: Vec<Vec<Vec<f64>>> = items.par_iter().map(f).collect::<Result<_, _>>()?;
    Ok(parts.into_iter().flatten().collect())
}

fn phase(model: &ModelArgs, point: &PointArgs, out: &OutputArgs) -> Result<(), Failure> {
    let w = model.model()?;
    let mut table = Table::new(&["beta", "B", "z_star", "psi_an", "magnetization", "susceptibility", "beta_c"]);
    header(&mut table, "phase", model.describe(), point.describe(), None, out);
    table.rows = rows_in_order(&point.pairs(), |&(beta, b)| {
        let r = thermo_report(&ModelPoint::new(beta, b, w.clone())?)?;
        let chi = r.susceptibility.map_or(f64::INFINITY, |s| s.value);
        Ok(vec![vec![beta, b, r.z_star, r.psi_an, r.magnetization, chi, r.beta_c]])
    })?;
    emit(&table, out)
}

fn rate_spin(model: &ModelArgs, point: &PointArgs, m: &Grid, methods: &[MethodArg], out: &OutputArgs) -> Result<(), Failure> {
    let w = model.model()?;
    let mut methods = methods.to_vec();
    methods.dedup();
    let mut columns = vec!["beta", "B", "m"];
    columns.extend(methods.iter().map(|k| k.method().name()));
    let mut table = Table::new(&columns);
    let names: Vec<&str> = methods.iter().map(|k| k.method().name()).collect();
    header(
        &mut table,
        "rate-spin",
        model.describe(),
        format!("{} m={} method={}", point.describe(), m.raw, names.join(",")),
        None,
        out,
    );
    table.rows = rows_in_order(&point.pairs(), |&(beta, b)| {
        let p = ModelPoint::new(beta, b, w.clone())?;
        let curves = methods
            .iter()
            .map(|k| spin_rate_curve(&m.values, &p, k.method()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((0..m.values.len())
            .map(|i| {
                let mut row = vec![beta, b, m.values[i]];
                row.extend(curves.iter().map(|c| c.values[i]));
                row
            })
            .collect())
    })?;
    emit(&table, out)
}

fn rate_edges(model: &ModelArgs, point: &PointArgs, t: &Option<Grid>, y: &Option<Grid>, out: &OutputArgs) -> Result<(), Failure> {
    let w = model.model()?;
    let pairs = point.pairs();
    let mut table;
    if let Some(t) = t {
        table = Table::new(&["beta", "B", "t", "phi", "phi_prime"]);
        header(&mut table, "rate-edges", model.describe(), format!("{} t={}", point.describe(), t.raw), None, out);
        table.rows = rows_in_order(&pairs, |&(beta, b)| {
            let p = ModelPoint::new(beta, b, w.clone())?;
            t.values
                .iter()
                .map(|&s| edge_cgf(s, &p).map(|e| vec![beta, b, s, e.value, e.derivative]))
                .collect()
        })?;
    } else {
        let y = y.as_ref().ok_or_else(|| Failure::Usage("rate-edges needs --t or --y".into()))?;
        table = Table::new(&["beta", "B", "y", "rate", "dual"]);
        header(&mut table, "rate-edges", model.describe(), format!("{} y={}", point.describe(), y.raw), None, out);
        table.rows = rows_in_order(&pairs, |&(beta, b)| {
            let p = ModelPoint::new(beta, b, w.clone())?;
            y.values
                .iter()
                .map(|&v| edge_rate(v, &p).map(|r| vec![beta, b, v, r.value, r.duals.0]))
                .collect()
        })?;
    }
    emit(&table, out)
}

fn integer_grid(g: &Grid) -> Result<Vec<u64>, Failure> {
    g.values
        .iter()
        .map(|&v| {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as u64)
            } else {
                Err(Failure::Usage(format!("degree {v} is not a nonnegative integer")))
            }
        })
        .collect()
}

fn degrees(
    model: &ModelArgs,
    point: &PointArgs,
    ws: &Option<Grid>,
    t: &Option<Grid>,
    d: &Option<Grid>,
    out: &OutputArgs,
) -> Result<(), Failure> {
    let w = model.model()?;
    let weights: Vec<f64> = ws.as_ref().map_or_else(|| w.atoms().to_vec(), |g| g.values.clone());
    let w_raw = ws.as_ref().map_or_else(|| model.atoms.raw.clone(), |g| g.raw.clone());
    let mut items = Vec::new();
    for (beta, b) in point.pairs() {
        for &x in &weights {
            items.push((beta, b, x));
        }
    }
    let mut table;
    if let Some(t) = t {
        table = Table::new(&["beta", "B", "w", "t", "mgf"]);
        header(&mut table, "degrees", model.describe(), format!("{} w={w_raw} t={}", point.describe(), t.raw), None, out);
        table.rows = rows_in_order(&items, |&(beta, b, x)| {
            let p = ModelPoint::new(beta, b, w.clone())?;
            t.values
                .iter()
                .map(|&s| degree_mgf(s, x, &p).map(|v| vec![beta, b, x, s, v]))
                .collect()
        })?;
    } else {
        let d = d.as_ref().ok_or_else(|| Failure::Usage("degrees needs --t or --d".into()))?;
        let ds = integer_grid(d)?;
        table = Table::new(&["beta", "B", "w", "d", "pmf"]);
        header(&mut table, "degrees", model.describe(), format!("{} w={w_raw} d={}", point.describe(), d.raw), None, out);
        table.rows = rows_in_order(&items, |&(beta, b, x)| {
            let p = ModelPoint::new(beta, b, w.clone())?;
            ds.iter()
                .map(|&k| degree_pmf(k, x, &p).map(|v| vec![beta, b, x, k as f64, v]))
                .collect()
        })?;
    }
    emit(&table, out)
}

#[allow(clippy::too_many_arguments)]
fn oracle(
    counts: &Counts,
    atoms: &Grid,
    point: &PointArgs,
    quantity: Quantity,
    t: &Option<Grid>,
    vertex_type: usize,
    out: &OutputArgs,
) -> Result<(), Failure> {
    let (model, _) = counts_to_model(&counts.0, &atoms.values)?;
    let n = counts.0.iter().sum::<usize>() as f64;
    let describe = format!("atoms={} counts={}", atoms.raw, join_usize(&counts.0));
    let needs_t = || t.as_ref().ok_or_else(|| Failure::Usage("this quantity needs --t".into()));
    let pairs = point.pairs();
    let inst = |beta: f64, b: f64| ExactInstance::new(&counts.0, &atoms.values, beta, b);
    let mut table;
    match quantity {
        Quantity::LogPartition => {
            table = Table::new(&["beta", "B", "n", "log_z", "psi_n", "psi_an"]);
            header(&mut table, "oracle", describe, format!("{} quantity=log-partition", point.describe()), None, out);
            table.rows = rows_in_order(&pairs, |&(beta, b)| {
                let lz = exact_log_partition(&inst(beta, b)?)?;
                let psi = annealed_pressure(&ModelPoint::new(beta, b, model.clone())?)?;
                Ok(vec![vec![beta, b, n, lz, lz / n, psi]])
            })?;
        }
        Quantity::SpinDistribution => {
            table = Table::new(&["beta", "B", "s", "log_prob", "prob"]);
            header(&mut table, "oracle", describe, format!("{} quantity=spin-distribution", point.describe()), None, out);
            table.rows = rows_in_order(&pairs, |&(beta, b)| {
                let dist = exact_spin_distribution(&inst(beta, b)?)?;
                Ok(dist
                    .values
                    .iter()
                    .zip(&dist.log_probs)
                    .map(|(&s, &l)| vec![beta, b, s as f64, l, l.exp()])
                    .collect())
            })?;
        }
        Quantity::EdgeMgf => {
            let t = needs_t()?;
            table = Table::new(&["beta", "B", "t", "log_mgf", "per_vertex", "edge_cgf"]);
            header(&mut table, "oracle", describe, format!("{} quantity=edge-mgf t={}", point.describe(), t.raw), None, out);
            table.rows = rows_in_order(&pairs, |&(beta, b)| {
                let e = inst(beta, b)?;
                let p = ModelPoint::new(beta, b, model.clone())?;
                t.values
                    .iter()
                    .map(|&s| {
                        let l = exact_log_edge_mgf(s, &e)?;
                        Ok(vec![beta, b, s, l, l / n, edge_cgf(s, &p)?.value])
                    })
                    .collect()
            })?;
        }
        Quantity::DegreeMgf => {
            let t = needs_t()?;
            let w = *atoms
                .values
                .get(vertex_type)
                .ok_or_else(|| Failure::Usage(format!("vertex type {vertex_type} out of range")))?;
            table = Table::new(&["beta", "B", "t", "exact", "asymptotic"]);
            header(
                &mut table,
                "oracle",
                describe,
                format!("{} quantity=degree-mgf vertex_type={vertex_type} t={}", point.describe(), t.raw),
                None,
                out,
            );
            table.rows = rows_in_order(&pairs, |&(beta, b)| {
                let e = inst(beta, b)?;
                let p = ModelPoint::new(beta, b, model.clone())?;
                t.values
                    .iter()
                    .map(|&s| Ok(vec![beta, b, s, exact_degree_mgf(s, vertex_type, &e)?, degree_mgf(s, w, &p)?]))
                    .collect()
            })?;
        }
    }
    emit(&table, out)
}

#[allow(clippy::too_many_arguments)]
fn mc(
    counts: &Counts,
    atoms: &Grid,
    beta: &Option<Grid>,
    theta: &Option<Grid>,
    b: &Grid,
    sweeps: usize,
    burn_in: usize,
    thin: usize,
    seed: u64,
    out: &OutputArgs,
) -> Result<(), Failure> {
    let (model, _) = counts_to_model(&counts.0, &atoms.values)?;
    let (couplings, label): (Vec<f64>, String) = match (beta, theta) {
        (Some(g), _) => (g.values.iter().map(|x| x.sinh()).collect(), format!("beta={}", g.raw)),
        (None, Some(g)) => (g.values.clone(), format!("theta={}", g.raw)),
        (None, None) => return Err(Failure::Usage("mc needs --beta or --theta".into())),
    };
    let mut items = Vec::new();
    for &th in &couplings {
        for &field in &b.values {
            items.push((th, field));
        }
    }
    let mut table = Table::new(&[
        "theta",
        "B",
        "mean_magnetization",
        "std_error",
        "mean_weighted_magnetization",
        "weighted_std_error",
        "samples_used",
        "limit_magnetization",
    ]);
    header(
        &mut table,
        "mc",
        format!("atoms={} counts={}", atoms.raw, join_usize(&counts.0)),
        format!("{label} B={} sweeps={sweeps} burn_in={burn_in} thin={thin}", b.raw),
        Some(seed),
        out,
    );
    table.rows = rows_in_order(&items, |&(th, field)| {
        let r = glauber_run(&McConfig {
            counts: counts.0.clone(),
            atoms: atoms.values.clone(),
            theta: th,
            b: field,
            sweeps,
            burn_in,
            seed,
            thin,
        })?;
        let limit = icw_magnetization(th, field, &model)?;
        Ok(vec![vec![
            th,
            field,
            r.mean_magnetization,
            r.std_error,
            r.mean_weighted_magnetization,
            r.weighted_std_error,
            r.samples_used as f64,
            limit,
        ]])
    })?;
    emit(&table, out)
}

fn validate(criteria: &Option<Vec<usize>>, out: &OutputArgs) -> Result<(), Failure> {
    let ids: Vec<usize> = criteria.clone().unwrap_or_else(|| CRITERIA.iter().map(|c| c.0).collect());
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > CRITERIA.len()) {
        return Err(Failure::Usage(format!("no criterion {bad}")));
    }
    let mut table = Table::new(&["criterion", "passed", "elapsed_s", "budget_s"]);
    header(&mut table, "validate", "acceptance".into(), format!("criteria={}", join_usize(&ids)), None, out);
    let mut failed = 0;
    for &id in &ids {
        let o = run_criterion(id);
        eprintln!("{}", o.line());
        failed += usize::from(!o.passed);
        table.push(vec![
            id as f64,
            if o.passed { 1.0 } else { 0.0 },
            o.elapsed.as_secs_f64(),
            o.budget.as_secs_f64(),
        ]);
    }
    eprintln!("{} of {} criteria passed", ids.len() - failed, ids.len());
    if out.output.is_some() {
        emit(&table, out)?;
    }
    if failed > 0 {
        return Err(Failure::Validation(format!("{failed} criteria failed")));
    }
    Ok(())
}

pub fn execute(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Phase { model, point, out } => phase(model, point, out),
        Command::RateSpin { model, point, m, method, out } => rate_spin(model, point, m, method, out),
        Command::RateEdges { model, point, t, y, out } => rate_edges(model, point, t, y, out),
        Command::Degrees { model, point, w, t, d, out } => degrees(model, point, w, t, d, out),
        Command::Oracle { counts, atoms, point, quantity, t, vertex_type, out } => {
            oracle(counts, atoms, point, *quantity, t, *vertex_type, out)
        }
        Command::Mc { counts, atoms, beta, theta, b, sweeps, burn_in, thin, seed, out } => {
            mc(counts, atoms, beta, theta, b, *sweeps, *burn_in, *thin, *seed, out)
        }
        Command::Validate { criteria, out, .. } => validate(criteria, out),
    }
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("ANNEALED_LDP_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::Usage(format!("ANNEALED_LDP_THREADS must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot start {n} worker threads: {e}")))?;
    }
    Ok(())
}

/// Parses `argv`, runs the command and returns the exit status.
pub fn run(argv: &[String]) -> i32 {
    let argv = match crate::config::splice_config(argv, &SUBCOMMANDS) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let text = e.render().to_string();
            eprintln!("{}", text.lines().next().unwrap_or("error: invalid arguments"));
            return 2;
        }
    };
    if let Err(f) = configure_threads().and_then(|_| execute(cli)) {
        eprintln!("error: {}", f.message());
        return f.code();
    }
    0
}
