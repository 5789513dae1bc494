//! Command-line front end: tables, approximate orbits, bound sweeps, trajectory runs, oracle
//! comparisons and contract audits as CSV or JSON.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bounds::{bound_row, SigmaKind, SigmaSpec};
use crate::error::{Error, Result};
use crate::flow::{FlowParams, GbarSequence};
use crate::kernels::wick::{wick_monte_carlo, WickSample};
use crate::kernels::KernelSet;
use crate::models::hier::{HierModel, HierParams};
use crate::models::oracle::oracle_comparison;
use crate::models::{contract_audit, null_model, ContractAudit, PolyToyModel, RgModel, ToyParams};
use crate::seqspace::{recursion_defects, solve_fixed_point, DeviationSequence, NormWeights, SolverConfig, SolverReport};

/// Directory for outputs when no --out is given.
pub const OUT_DIR_VAR: &str = "CROSSOVER_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "crossover", version, about = "Crossover orbits of a discrete renormalization-group flow")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// output file; relative paths are resolved against $CROSSOVER_OUT_DIR when set
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// seed of every stochastic audit
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelName {
    Null,
    Toy,
    Hier,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// coefficient table a, b, C(0), Gamma(0) over L and eps
    Kernels {
        #[arg(long = "L", num_args = 1.., default_values_t = vec![2u32])]
        l: Vec<u32>,
        #[arg(long, num_args = 1.., required = true)]
        eps: Vec<f64>,
    },
    /// approximate orbit gbar_n with its step bounds
    Flow {
        #[command(flatten)]
        flow: FlowArgs,
    },
    /// window sums against their closed-form majorants and small-eps constants
    Bounds {
        #[arg(long = "L", default_value_t = 2)]
        l: u32,
        #[arg(long, num_args = 1.., required = true)]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 0.3)]
        omega0: f64,
        /// coupling a of the flow; defaults to the kernel value at (L, eps)
        #[arg(long)]
        a: Option<f64>,
        /// sums to evaluate (dg_forward, dg_backward, mu_forward, R_backward); all by default
        #[arg(long, num_args = 1..)]
        which: Vec<String>,
        /// weight exponents, overriding the per-sum defaults
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        c_r: f64,
    },
    /// full trajectory by the sequence-space fixed point
    Orbit {
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long, value_enum, default_value_t = ModelName::Null)]
        model: ModelName,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        /// also write the solver report as JSON here
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        model_args: ModelArgs,
    },
    /// exact two-coupling orbit against RK4
    Oracle {
        #[arg(long, default_value_t = 2.7)]
        nu: f64,
        #[arg(long, default_value_t = 0.05)]
        s_min: f64,
        #[arg(long, default_value_t = 0.8)]
        s_max: f64,
        #[arg(long, default_value_t = 76)]
        points: usize,
    },
    /// sampled contract audit of a model and Monte-Carlo check of the Wick formulas
    Audit {
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long, value_enum, default_value_t = ModelName::Toy)]
        model: ModelName,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 100_000)]
        wick_samples: usize,
        /// write (phi, exp_minus_v) of the hierarchical potential at gbar* here
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[command(flatten)]
        model_args: ModelArgs,
    },
}

#[derive(Debug, Args, Clone)]
pub struct FlowArgs {
    #[arg(long = "L", default_value_t = 2)]
    pub l: u32,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.3)]
    pub omega0: f64,
    /// coupling a of the flow; defaults to the kernel value at (L, eps)
    #[arg(long)]
    pub a: Option<f64>,
    /// window override: number of steps left of 0
    #[arg(long)]
    pub n_minus: Option<usize>,
    /// window override: number of steps right of 0
    #[arg(long)]
    pub n_plus: Option<usize>,
}

#[derive(Debug, Args, Clone)]
pub struct ModelArgs {
    #[arg(long)]
    pub theta_g: Option<f64>,
    #[arg(long)]
    pub theta_r: Option<f64>,
    /// toy mass coefficient from the kernels instead of the calibrated scalar
    #[arg(long)]
    pub use_b: bool,
    /// hierarchical fluctuation variance
    #[arg(long)]
    pub sigma2: Option<f64>,
}

fn validate_l_eps(l: u32, eps: f64) -> Result<()> {
    if l < 2 {
        return Err(Error::Usage(format!("L = {l} must be at least 2")));
    }
    let top = 2f64.ln() / (l as f64).ln();
    if !(eps > 0.0 && eps < top) {
        return Err(Error::Usage(format!("eps = {eps} outside (0, ln 2 / ln L) = (0, {top})")));
    }
    Ok(())
}

fn validate_start(omega0: f64) -> Result<()> {
    if !(omega0 > 0.0 && omega0 < 1.0) {
        return Err(Error::Usage(format!("omega0 = {omega0} outside (0, 1)")));
    }
    Ok(())
}

/// Orbit runs need the tighter range of the ball-radius constraint.
fn validate_omega0(omega0: f64) -> Result<()> {
    if !(omega0 > 0.0 && omega0 < 0.5) {
        return Err(Error::Usage(format!("omega0 = {omega0} outside (0, 1/2)")));
    }
    Ok(())
}

fn kernel_a(l: u32, eps: f64) -> Result<f64> {
    Ok(KernelSet::new(l, eps)?.a_coeff)
}

impl FlowArgs {
    fn validate(&self) -> Result<()> {
        validate_l_eps(self.l, self.eps)?;
        validate_omega0(self.omega0)
    }

    fn params(&self) -> Result<FlowParams> {
        let a = match self.a {
            Some(a) => a,
            None => kernel_a(self.l, self.eps)?,
        };
        FlowParams::new(self.l, self.eps, a)
    }

    fn sequence(&self, fp: &FlowParams) -> Result<GbarSequence> {
        let def = crate::flow::default_window(fp);
        GbarSequence::build(self.omega0, self.n_minus.unwrap_or(def), self.n_plus.unwrap_or(def), fp)
    }
}

/// Floats in CSV carry 12 significant digits.
pub fn csv_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        // adding zero folds -0 into 0
        format!("{:.11e}", x + 0.0)
    }
}

struct SigFigs;

impl serde_json::ser::Formatter for SigFigs {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }
}

/// JSON with every float at 17 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFigs);
    value.serialize(&mut ser).map_err(|e| Error::Numerical(format!("serialization failed: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Numerical(e.to_string()))
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

/// One output document with a default file name.
pub struct Output {
    pub name: &'static str,
    pub body: String,
}

fn emit(out: &OutputArgs, doc: &Output) -> Result<()> {
    let ext = match out.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let dir = std::env::var_os(OUT_DIR_VAR).map(PathBuf::from);
    let path = match (&out.out, dir) {
        (Some(p), Some(d)) if p.is_relative() => Some(d.join(p)),
        (Some(p), _) => Some(p.clone()),
        (None, Some(d)) => Some(d.join(format!("{}.{ext}", doc.name))),
        (None, None) => None,
    };
    write_to(path.as_ref(), &doc.body)
}

fn write_to(path: Option<&PathBuf>, body: &str) -> Result<()> {
    let io_err = |e: io::Error| Error::Usage(format!("cannot write output: {e}"));
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(io_err)?;
            }
            std::fs::write(p, body).map_err(io_err)
        }
        None => match io::stdout().write_all(body.as_bytes()) {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
            r => r.map_err(io_err),
        },
    }
}

fn kernels_cmd(ls: &[u32], eps: &[f64], format: Format) -> Result<Output> {
    for l in ls {
        for e in eps {
            validate_l_eps(*l, *e)?;
        }
    }
    let rows: Vec<_> = ls
        .iter()
        .flat_map(|l| eps.iter().map(move |e| (*l, *e)))
        .map(|(l, e)| KernelSet::new(l, e).map(|k| k.row()))
        .collect::<Result<_>>()?;
    let body = match format {
        Format::Json => to_json(&rows)?,
        Format::Csv => csv_table(
            &["L", "eps", "a", "b", "C0", "Gamma0"],
            &rows
                .iter()
                .map(|r| vec![r.l.to_string(), csv_float(r.eps), csv_float(r.a), csv_float(r.b), csv_float(r.c0), csv_float(r.gamma0)])
                .collect::<Vec<_>>(),
        ),
    };
    Ok(Output { name: "kernels", body })
}

#[derive(Serialize)]
struct FlowRow {
    n: i64,
    gbar_n: f64,
    lower_n: f64,
    upper_n: f64,
}

fn flow_cmd(args: &FlowArgs, format: Format) -> Result<Output> {
    validate_l_eps(args.l, args.eps)?;
    validate_start(args.omega0)?;
    let fp = args.params()?;
    let gs = args.sequence(&fp)?;
    let rows: Vec<FlowRow> = gs
        .indices()
        .map(|n| {
            let (lo, hi) = gs.step_bounds(n);
            FlowRow { n, gbar_n: gs.get(n), lower_n: lo, upper_n: hi }
        })
        .collect();
    let body = match format {
        Format::Json => to_json(&rows)?,
        Format::Csv => csv_table(
            &["n", "gbar_n", "lower_n", "upper_n"],
            &rows
                .iter()
                .map(|r| vec![r.n.to_string(), csv_float(r.gbar_n), csv_float(r.lower_n), csv_float(r.upper_n)])
                .collect::<Vec<_>>(),
        ),
    };
    Ok(Output { name: "flow", body })
}

/// Default weight exponents per sum, those the sequence-space map uses.
pub fn default_exponents(kind: SigmaKind) -> (f64, f64) {
    match kind {
        SigmaKind::DgForward => (1.0, 2.0),
        SigmaKind::DgBackward => (1.5, 3.0),
        SigmaKind::MuForward => (11.0 / 6.0, 2.0),
        SigmaKind::RBackward => (2.75 - 3.0 / 16.0, 2.75),
    }
}

#[allow(clippy::too_many_arguments)]
fn bounds_cmd(
    l: u32,
    eps: &[f64],
    omega0: f64,
    a: Option<f64>,
    which: &[String],
    gamma: Option<f64>,
    nu: Option<f64>,
    c_r: f64,
    format: Format,
) -> Result<Output> {
    validate_start(omega0)?;
    let kinds: Vec<SigmaKind> = if which.is_empty() {
        SigmaKind::ALL.to_vec()
    } else {
        which.iter().map(|w| w.parse()).collect::<Result<_>>()?
    };
    let mut rows = Vec::new();
    for e in eps {
        validate_l_eps(l, *e)?;
        let fp = FlowParams::new(l, *e, match a {
            Some(a) => a,
            None => kernel_a(l, *e)?,
        })?;
        let gs = GbarSequence::build_default(omega0, &fp)?;
        for k in &kinds {
            let (g0, n0) = default_exponents(*k);
            rows.push(bound_row(&SigmaSpec::new(*k, gamma.unwrap_or(g0), nu.unwrap_or(n0), c_r), &gs));
        }
    }
    let body = match format {
        Format::Json => to_json(&rows)?,
        Format::Csv => csv_table(
            &["which", "gamma", "nu", "eps", "omega0", "L", "sigma", "tail", "bar_sigma", "K", "eps_power"],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        r.which.to_string(),
                        csv_float(r.gamma),
                        csv_float(r.nu),
                        csv_float(r.eps),
                        csv_float(r.omega0),
                        r.l.to_string(),
                        csv_float(r.sigma),
                        csv_float(r.tail),
                        csv_float(r.bar_sigma),
                        csv_float(r.k),
                        csv_float(r.eps_power),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
    };
    Ok(Output { name: "bounds", body })
}

/// A constructed model together with the flow parameters it is consistent with.
pub struct BuiltModel {
    pub model: Box<dyn RgModel>,
    pub fp: FlowParams,
}

pub fn build_model(name: ModelName, flow: &FlowArgs, m: &ModelArgs, seed: u64) -> Result<BuiltModel> {
    flow.validate()?;
    match name {
        ModelName::Null => Ok(BuiltModel { model: Box::new(null_model()), fp: flow.params()? }),
        ModelName::Toy => {
            let fp = flow.params()?;
            let beta = SolverConfig::for_omega0(flow.omega0).beta;
            let mut p = ToyParams::calibrated(&fp, beta / 12.0);
            if let Some(t) = m.theta_g {
                p.theta_g = t;
            }
            if let Some(t) = m.theta_r {
                p.theta_r = t;
            }
            p.use_b = m.use_b;
            let ks = if m.use_b { Some(KernelSet::new(flow.l, flow.eps)?) } else { None };
            let model = PolyToyModel::with_audit(p, &fp, ks.as_ref(), 1000, seed)?;
            Ok(BuiltModel { model: Box::new(model), fp })
        }
        ModelName::Hier => {
            let mut p = HierParams::new(flow.l, flow.eps);
            if let Some(s) = m.sigma2 {
                p.sigma2 = s;
            }
            let model = HierModel::with_audit(p, 1000, seed)?;
            let fp = model.fp;
            Ok(BuiltModel { model: Box::new(model), fp })
        }
    }
}

#[derive(Serialize)]
struct OrbitRow {
    n: i64,
    gbar_n: f64,
    g_n: f64,
    mu_n: f64,
    #[serde(rename = "R_norm_n")]
    r_norm_n: f64,
    residual_n: f64,
}

#[derive(Serialize)]
struct OrbitDoc<'a> {
    report: &'a SolverReport,
    rows: &'a [OrbitRow],
}

#[allow(clippy::too_many_arguments)]
fn orbit_cmd(
    flow: &FlowArgs,
    name: ModelName,
    tol: f64,
    max_iter: usize,
    report_path: Option<&PathBuf>,
    margs: &ModelArgs,
    seed: u64,
    format: Format,
) -> Result<Output> {
    let built = build_model(name, flow, margs, seed)?;
    let fp = built.fp;
    let model = built.model.as_ref();
    let gs = flow.sequence(&fp)?;
    let nw = NormWeights::standard(&fp);
    let mut cfg = SolverConfig::for_omega0(flow.omega0);
    cfg.tol = tol;
    cfg.max_iter = max_iter;
    let init = DeviationSequence::zeros_like(&gs, model.r_dim());
    let (ds, report) = solve_fixed_point(&init, &cfg, &gs, &nw, model)?;
    let defects = recursion_defects(&ds, &gs, &nw, model)?;
    let rows: Vec<OrbitRow> = gs
        .indices()
        .map(|n| {
            let i = (n - gs.lo()) as usize;
            OrbitRow {
                n,
                gbar_n: gs.get(n),
                g_n: gs.get(n) + ds.dg_at(n),
                mu_n: ds.mu_at(n),
                r_norm_n: model.r_norm(ds.r_at(n), gs.get(n), &nw),
                residual_n: if n < gs.hi() { defects[i] } else { f64::NAN },
            }
        })
        .collect();
    if let Some(p) = report_path {
        write_to(Some(p), &to_json(&report)?)?;
    }
    let body = match format {
        Format::Json => to_json(&OrbitDoc { report: &report, rows: &rows })?,
        Format::Csv => csv_table(
            &["n", "gbar_n", "g_n", "mu_n", "R_norm_n", "residual_n"],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        csv_float(r.gbar_n),
                        csv_float(r.g_n),
                        csv_float(r.mu_n),
                        csv_float(r.r_norm_n),
                        csv_float(r.residual_n),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
    };
    Ok(Output { name: "orbit", body })
}

fn oracle_cmd(nu: f64, s_min: f64, s_max: f64, points: usize, format: Format) -> Result<Output> {
    let rep = oracle_comparison(nu, s_min, s_max, points)?;
    eprintln!("max relative discrepancy {:e}", rep.max_rel_diff);
    let body = match format {
        Format::Json => to_json(&rep)?,
        Format::Csv => csv_table(
            &["s", "formula", "rk4", "rel_diff"],
            &rep.rows
                .iter()
                .map(|r| vec![csv_float(r.s), csv_float(r.formula), csv_float(r.rk4), csv_float(r.rel_diff)])
                .collect::<Vec<_>>(),
        ),
    };
    Ok(Output { name: "oracle", body })
}

#[derive(Serialize)]
struct WickAudit {
    c0: f64,
    cxy: f64,
    samples: usize,
    seed: u64,
    results: Vec<WickSample>,
    /// every mean within four standard errors of zero
    passed: bool,
}

#[derive(Serialize)]
struct AuditDoc {
    contract: ContractAudit,
    wick: WickAudit,
}

#[allow(clippy::too_many_arguments)]
fn audit_cmd(
    flow: &FlowArgs,
    name: ModelName,
    samples: usize,
    wick_samples: usize,
    snapshot: Option<&PathBuf>,
    margs: &ModelArgs,
    seed: u64,
    format: Format,
) -> Result<Output> {
    let built = build_model(name, flow, margs, seed)?;
    let nw = NormWeights::standard(&built.fp);
    let contract = contract_audit(built.model.as_ref(), &built.fp, &nw, samples, seed)?;
    let ks = KernelSet::new(flow.l, flow.eps)?;
    let (c0, cxy) = (ks.c0, ks.covariance(0.5)?);
    let results = wick_monte_carlo(c0, cxy, wick_samples, seed)?;
    let passed = results.iter().all(|r| r.mean.abs() <= 4.0 * r.std_err);
    if let Some(p) = snapshot {
        if name != ModelName::Hier {
            return Err(Error::Usage("--snapshot needs --model hier".into()));
        }
        let mut hp = HierParams::new(flow.l, flow.eps);
        if let Some(s) = margs.sigma2 {
            hp.sigma2 = s;
        }
        let hm = HierModel::with_audit(hp, 0, seed)?;
        let v = hm.potential(hm.fp.gbar_star, 0.0, &vec![0.0; hm.r_dim()]);
        let rows: Vec<Vec<String>> =
            hm.grid.snapshot(&v).into_iter().map(|(x, e)| vec![csv_float(x), csv_float(e)]).collect();
        write_to(Some(p), &csv_table(&["phi", "exp_minus_v"], &rows))?;
    }
    let doc = AuditDoc { contract, wick: WickAudit { c0, cxy, samples: wick_samples, seed, results, passed } };
    let body = match format {
        Format::Json => to_json(&doc)?,
        Format::Csv => {
            let c = &doc.contract;
            let mut s = String::from("model,samples,seed,max_ratio_g,max_ratio_mu,max_ratio_r,max_contraction,violations,wick_passed\n");
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                c.model,
                c.samples,
                c.seed,
                csv_float(c.max_ratio_g),
                csv_float(c.max_ratio_mu),
                csv_float(c.max_ratio_r),
                csv_float(c.max_contraction),
                c.violations,
                doc.wick.passed
            );
            s
        }
    };
    Ok(Output { name: "audit", body })
}

pub fn execute(cli: &Cli) -> Result<()> {
    let f = cli.output.format;
    let seed = cli.output.seed;
    let doc = match &cli.command {
        Command::Kernels { l, eps } => kernels_cmd(l, eps, f)?,
        Command::Flow { flow } => flow_cmd(flow, f)?,
        Command::Bounds { l, eps, omega0, a, which, gamma, nu, c_r } => {
            bounds_cmd(*l, eps, *omega0, *a, which, *gamma, *nu, *c_r, f)?
        }
        Command::Orbit { flow, model, tol, max_iter, report, model_args } => {
            orbit_cmd(flow, *model, *tol, *max_iter, report.as_ref(), model_args, seed, f)?
        }
        Command::Oracle { nu, s_min, s_max, points } => oracle_cmd(*nu, *s_min, *s_max, *points, f)?,
        Command::Audit { flow, model, samples, wick_samples, snapshot, model_args } => {
            audit_cmd(flow, *model, *samples, *wick_samples, snapshot.as_ref(), model_args, seed, f)?
        }
    };
    emit(&cli.output, &doc)
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    error: ErrorBody<'a>,
}

fn report_error(kind: &str, message: String) {
    let doc = ErrorDoc { error: ErrorBody { kind, message } };
    let s = serde_json::to_string(&doc).unwrap_or_else(|_| format!("{{\"error\":{{\"kind\":\"{kind}\"}}}}"));
    eprintln!("{s}");
}

/// Parses arguments and runs; returns the process exit code (0 ok, 2 usage, 1 anything else).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            report_error("usage", e.to_string().trim().to_string());
            return 2;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            report_error(e.kind(), e.to_string());
            if matches!(e, Error::Usage(_)) {
                2
            } else {
                1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formats() {
        assert_eq!(csv_float(0.1), "1.00000000000e-1");
        assert_eq!(csv_float(f64::NAN), "NaN");
        let j = to_json(&vec![1.0f64 / 3.0]).unwrap();
        assert_eq!(j.trim(), "[3.3333333333333331e-1]");
        let back: Vec<f64> = serde_json::from_str(&j).unwrap();
        assert_eq!(back[0], 1.0 / 3.0);
    }

    #[test]
    fn ranges_are_validated() {
        assert!(validate_l_eps(2, 0.5).is_ok());
        assert!(matches!(validate_l_eps(1, 0.1), Err(Error::Usage(_))));
        assert!(matches!(validate_l_eps(2, 1.0), Err(Error::Usage(_))));
        assert!(matches!(validate_l_eps(3, 0.7), Err(Error::Usage(_))));
        assert!(matches!(validate_omega0(0.5), Err(Error::Usage(_))));
        assert!(validate_start(0.7).is_ok());
        assert!(matches!(validate_start(1.0), Err(Error::Usage(_))));
    }

    #[test]
    fn default_exponents_satisfy_their_hypotheses() {
        let fp = FlowParams::new(2, 0.05, 0.004).unwrap();
        for k in SigmaKind::ALL {
            let (g, nu) = default_exponents(k);
            assert!(SigmaSpec::new(k, g, nu, 0.5).check(&fp, 0.3).is_ok(), "{}", k.name());
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["crossover", "flow", "--eps=-1"]), 2);
        assert_eq!(run(["crossover", "nonsense"]), 2);
        assert_eq!(run(["crossover", "orbit", "--model", "toy", "--eps", "0.05", "--tol=-1"]), 2);
        assert_eq!(run(["crossover", "orbit", "--model", "hier", "--eps", "0.2"]), 1);
    }

    #[test]
    fn flow_document_has_one_row_per_index() {
        let args = FlowArgs { l: 2, eps: 0.1, omega0: 0.3, a: Some(0.004), n_minus: Some(3), n_plus: Some(4) };
        let doc = flow_cmd(&args, Format::Csv).unwrap();
        let lines: Vec<&str> = doc.body.lines().collect();
        assert_eq!(lines[0], "n,gbar_n,lower_n,upper_n");
        assert_eq!(lines.len(), 1 + 8);
        assert!(lines[1].starts_with("-3,"));
    }
}
