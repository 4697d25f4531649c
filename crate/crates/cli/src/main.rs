use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qsoskit::apps::{generate, table1, Extra, Family, Instance, InstanceSpec};
use qsoskit::instance::{from_json, to_json};
use qsoskit::pipeline::{realize, run, Method, Report, RunConfig};
use qsoskit::realize::Mode;
use qsoskit::relax::RelaxOptions;
use qsoskit::sdp::write_sdpa;
use qsoskit::BasisKind;

#[derive(Parser)]
#[command(name = "qsoskit", version, about = "Quaternion SOS relaxations: generate, solve, export and benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded instance as JSON.
    Gen(GenArgs),
    /// Solve relaxations of an instance file.
    Solve(SolveArgs),
    /// Write the realized SDP of an instance in SDPA sparse format.
    Export(ExportArgs),
    /// Run seeded trials of a family and tabulate bounds and times.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct FamilyArgs {
    /// Instance family, or `table1` for the two-variable example.
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Clique size (ne5, ne6).
    #[arg(long)]
    clique: Option<usize>,
    /// Number of classes (qmmc).
    #[arg(long)]
    classes: Option<usize>,
    /// Samples per class (qmmc).
    #[arg(long)]
    per_class: Option<usize>,
    /// Trade-off parameter (qmmc).
    #[arg(long)]
    lambda: Option<f64>,
    /// Edge probability (sync).
    #[arg(long)]
    p: Option<f64>,
    /// Noise level (sync).
    #[arg(long)]
    noise: Option<f64>,
}

impl FamilyArgs {
    fn instance(&self, seed: u64) -> anyhow::Result<Instance> {
        if self.family == "table1" {
            return Ok(table1());
        }
        let family = Family::parse(&self.family)?;
        let extra = Extra {
            clique: self.clique,
            classes: self.classes,
            per_class: self.per_class,
            lambda: self.lambda,
            p: self.p,
            noise: self.noise,
        };
        Ok(generate(&InstanceSpec { family, n: self.n, seed, extra })?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisArg {
    Q,
    Mixed,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Compare {
    Rsos1,
    NaiveRealization,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
    Sdpa,
}

#[derive(Args, Clone)]
struct RelaxArgs {
    /// Relaxation order, a single value or an inclusive range such as `1..3`.
    #[arg(long)]
    order: Option<String>,
    #[arg(long, value_enum)]
    basis: Option<BasisArg>,
    #[arg(long)]
    sparse: bool,
    #[arg(long)]
    strengthen: bool,
    #[arg(long)]
    real_gram: bool,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

impl RelaxArgs {
    fn orders(&self, inst: &Instance) -> anyhow::Result<Vec<usize>> {
        let Some(s) = &self.order else {
            return Ok(vec![inst.qpop.d_min().max(default_order(inst))]);
        };
        parse_orders(s)
    }

    fn basis(&self, inst: &Instance) -> BasisKind {
        match self.basis {
            Some(BasisArg::Q) => BasisKind::VarsOnly,
            Some(BasisArg::Mixed) => BasisKind::Mixed,
            None => inst.preferred_basis(),
        }
    }

    fn options(&self, inst: &Instance, order: usize) -> anyhow::Result<RelaxOptions> {
        if self.sparse && self.strengthen {
            bail!(qsoskit::Error::InvalidOptions("--sparse and --strengthen are mutually exclusive".into()));
        }
        Ok(RelaxOptions::new(order)
            .basis(self.basis(inst))
            .sparse(self.sparse)
            .strengthen(self.strengthen)
            .real_gram(self.real_gram))
    }

    fn method(&self) -> Method {
        if self.sparse {
            Method::Sparse
        } else if self.strengthen {
            Method::QsosStrengthened
        } else {
            Method::Qsos
        }
    }
}

fn default_order(inst: &Instance) -> usize {
    inst.spec.as_ref().map_or(1, |s| s.family.default_order())
}

fn parse_orders(s: &str) -> anyhow::Result<Vec<usize>> {
    let bad = || anyhow!(qsoskit::Error::InvalidOptions(format!("cannot parse order '{s}'")));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse::<usize>().map_err(|_| bad())?, b.trim_start_matches('=').trim().parse::<usize>().map_err(|_| bad())?),
        None => {
            let d = s.trim().parse::<usize>().map_err(|_| bad())?;
            (d, d)
        }
    };
    if lo == 0 || hi < lo {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Output path (standard output when omitted).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance JSON file, or `-` for standard input.
    instance: PathBuf,
    #[command(flatten)]
    relax: RelaxArgs,
    #[arg(long, value_enum)]
    compare: Option<Compare>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Attempt rank-one extraction and certification.
    #[arg(long)]
    extract: bool,
}

#[derive(Args)]
struct ExportArgs {
    instance: PathBuf,
    #[command(flatten)]
    relax: RelaxArgs,
    /// Export the RSOS-1 program or the naive realization instead.
    #[arg(long, value_enum)]
    compare: Option<Compare>,
    #[arg(long, value_enum, default_value = "sdpa")]
    format: Format,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[command(flatten)]
    relax: RelaxArgs,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Comma-separated subset of qsos, qsos_strengthened, rsos1, sparse.
    #[arg(long, default_value = "qsos")]
    methods: String,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Number of trials solved concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn read_instance(path: &Path) -> anyhow::Result<Instance> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        s
    } else {
        fs::read_to_string(path).map_err(qsoskit::Error::from).with_context(|| format!("reading {}", path.display()))?
    };
    Ok(from_json(&text)?)
}

fn write_out(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(qsoskit::Error::from).with_context(|| format!("writing {}", p.display()))?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_gen(a: &GenArgs) -> anyhow::Result<bool> {
    let inst = a.family.instance(a.family.seed)?;
    let mut text = to_json(&inst)?;
    text.push('\n');
    write_out(&a.out, &text)?;
    Ok(true)
}

fn cmd_solve(a: &SolveArgs) -> anyhow::Result<bool> {
    if a.format == Format::Sdpa {
        bail!(qsoskit::Error::InvalidOptions("solve reports as text, json or csv; use export for sdpa".into()));
    }
    let inst = read_instance(&a.instance)?;
    let mut reports = Vec::new();
    for d in a.relax.orders(&inst)? {
        let mut cfg = RunConfig::new(a.relax.options(&inst, d)?);
        cfg.tol = a.relax.tol;
        cfg.extract = a.extract;
        cfg.truth = inst.meta.truth.clone();
        reports.push(run(&inst.qpop, a.relax.method(), &cfg)?);
        if a.compare == Some(Compare::NaiveRealization) {
            cfg.mode = Mode::Naive;
            reports.push(run(&inst.qpop, a.relax.method(), &cfg)?);
        }
    }
    if a.compare == Some(Compare::Rsos1) {
        let mut cfg = RunConfig::new(RelaxOptions::new(1));
        cfg.tol = a.relax.tol;
        reports.push(run(&inst.qpop, Method::Rsos1, &cfg)?);
    }
    print!("{}", render_reports(&reports, a.format)?);
    Ok(reports.iter().all(Report::usable))
}

fn cmd_export(a: &ExportArgs) -> anyhow::Result<bool> {
    if a.format != Format::Sdpa {
        bail!(qsoskit::Error::InvalidOptions("export writes sdpa only".into()));
    }
    let inst = read_instance(&a.instance)?;
    let orders = a.relax.orders(&inst)?;
    let [d] = orders[..] else {
        bail!(qsoskit::Error::InvalidOptions("export takes a single order".into()));
    };
    let mut cfg = RunConfig::new(a.relax.options(&inst, d)?);
    let method = match a.compare {
        Some(Compare::Rsos1) => Method::Rsos1,
        Some(Compare::NaiveRealization) => {
            cfg.mode = Mode::Naive;
            a.relax.method()
        }
        None => a.relax.method(),
    };
    let sdp = realize(&inst.qpop, method, &cfg)?;
    let label = match &inst.spec {
        Some(s) => format!("{} n={} seed={} method={} order={d}", s.family.name(), s.n, s.seed, method.name()),
        None => format!("n={} method={} order={d}", inst.qpop.n, method.name()),
    };
    write_out(&a.out, &write_sdpa(&sdp, Some(&label)))?;
    Ok(true)
}

#[derive(Serialize)]
struct BenchRow {
    trial: usize,
    seed: u64,
    method: Method,
    opt: Option<f64>,
    status: String,
    time: f64,
}

fn bench_trial(a: &BenchArgs, methods: &[Method], t: usize) -> Vec<BenchRow> {
    let seed = a.family.seed.wrapping_add(t as u64);
    let inst = match a.family.instance(seed) {
        Ok(i) => i,
        Err(e) => return methods.iter().map(|m| BenchRow { trial: t, seed, method: *m, opt: None, status: format!("error: {e}"), time: 0.0 }).collect(),
    };
    methods
        .iter()
        .map(|&m| {
            let res = a.relax.orders(&inst).and_then(|o| {
                let mut cfg = RunConfig::new(a.relax.options(&inst, o[0])?);
                cfg.tol = a.relax.tol;
                Ok(run(&inst.qpop, m, &cfg)?)
            });
            match res {
                Ok(r) => BenchRow { trial: t, seed, method: m, opt: r.usable().then_some(r.bound), status: r.status, time: r.time },
                Err(e) => BenchRow { trial: t, seed, method: m, opt: None, status: format!("error: {e}"), time: 0.0 },
            }
        })
        .collect()
}

fn cmd_bench(a: &BenchArgs) -> anyhow::Result<bool> {
    let methods = a.methods.split(',').filter(|s| !s.is_empty()).map(|s| Method::parse(s.trim())).collect::<qsoskit::Result<Vec<_>>>()?;
    let jobs = a.jobs.max(1);
    let mut rows: Vec<Vec<BenchRow>> = Vec::with_capacity(a.trials);
    let trials: Vec<usize> = (0..a.trials).collect();
    for chunk in trials.chunks(jobs) {
        let done: Vec<Vec<BenchRow>> = std::thread::scope(|s| {
            let methods = &methods;
            let handles: Vec<_> = chunk.iter().map(|&t| s.spawn(move || bench_trial(a, methods, t))).collect();
            handles.into_iter().map(|h| h.join().expect("trial thread panicked")).collect()
        });
        rows.extend(done);
    }
    print!("{}", render_bench(&rows, &methods, a.format)?);
    Ok(true)
}

fn fmt_num(x: f64) -> String {
    format!("{x:.6}")
}

fn render_reports(rs: &[Report], f: Format) -> anyhow::Result<String> {
    let blocks = |b: &[i64]| b.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    Ok(match f {
        Format::Json => serde_json::to_string_pretty(rs)? + "\n",
        Format::Csv => {
            let mut s = String::from("method,order,realization,bound,status,blocks,constraints,real_constraints,iterations,time\n");
            for r in rs {
                s += &format!(
                    "{},{},{},{},{},{},{},{},{},{:.3}\n",
                    r.method.name(),
                    r.order.map_or(String::new(), |d| d.to_string()),
                    r.realization,
                    r.bound,
                    r.status,
                    blocks(&r.blocks),
                    r.constraints,
                    r.real_constraints,
                    r.iterations,
                    r.time
                );
            }
            s
        }
        _ => {
            let mut s = format!("{:<18} {:>5} {:<10} {:>14} {:<12} {:>8} {:>8}  blocks\n", "method", "order", "real.", "bound", "status", "rows", "time");
            for r in rs {
                s += &format!(
                    "{:<18} {:>5} {:<10} {:>14} {:<12} {:>8} {:>8.3}  {}\n",
                    r.method.name(),
                    r.order.map_or("-".into(), |d| d.to_string()),
                    r.realization,
                    fmt_num(r.bound),
                    r.status,
                    r.real_constraints,
                    r.time,
                    blocks(if r.blocks.is_empty() { &r.real_blocks } else { &r.blocks })
                );
                if let Some(e) = &r.extraction {
                    s += &format!(
                        "  extraction: rank {} (λ₂/λ₁ = {:.2e}){} gap {} tight {}",
                        e.rank,
                        e.second_ratio,
                        if e.completed { " completed" } else { "" },
                        e.gap.map_or("-".into(), |g| format!("{g:.3e}")),
                        e.tight
                    );
                    if let Some(g) = e.gauge_error {
                        s += &format!(" gauge error {g:.3e}");
                    }
                    s.push('\n');
                }
                if let Some(e) = &r.extraction_error {
                    s += &format!("  extraction: {e}\n");
                }
            }
            s
        }
    })
}

fn render_bench(rows: &[Vec<BenchRow>], methods: &[Method], f: Format) -> anyhow::Result<String> {
    Ok(match f {
        Format::Json => serde_json::to_string_pretty(&rows.iter().flatten().collect::<Vec<_>>())? + "\n",
        Format::Csv => {
            let mut s = String::from("trial,seed");
            for m in methods {
                s += &format!(",{0}_opt,{0}_time", m.name());
            }
            s.push('\n');
            for r in rows {
                let Some(first) = r.first() else { continue };
                s += &format!("{},{}", first.trial, first.seed);
                for x in r {
                    s += &format!(",{},{:.3}", x.opt.map_or(String::new(), |v| v.to_string()), x.time);
                }
                s.push('\n');
            }
            s
        }
        _ => {
            let mut s = format!("{:>5} {:>20}", "trial", "seed");
            for m in methods {
                s += &format!(" {:>18} {:>8}", format!("{}.opt", m.name()), "time");
            }
            s.push('\n');
            for r in rows {
                let Some(first) = r.first() else { continue };
                s += &format!("{:>5} {:>20}", first.trial, first.seed);
                for x in r {
                    s += &format!(" {:>18} {:>8.3}", x.opt.map_or(x.status.clone(), fmt_num), x.time);
                }
                s.push('\n');
            }
            s
        }
    })
}

fn error_json(e: &anyhow::Error) -> String {
    let kind = e.chain().find_map(|c| c.downcast_ref::<qsoskit::Error>()).map_or("cli", qsoskit::Error::kind);
    serde_json::json!({ "error": { "kind": kind, "message": format!("{e:#}") } }).to_string()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Export(a) => cmd_export(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("{}", serde_json::json!({ "error": { "kind": "solver", "message": "a requested solve did not reach optimal or near_optimal" } }));
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(1)
        }
    }
}
