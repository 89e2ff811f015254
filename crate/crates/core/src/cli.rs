//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 a verdict failed, 3 runtime error.

use std::fs;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::experiments::{
    self, fmt_real, run_adjacent_mc_hooked, run_adjacent_sweep, run_bridge_experiment, run_coupling_check,
    run_degree_experiment, run_distance_experiment, run_fkg_check, CouplingOptions, DegreeOptions, DistanceOptions,
    ExperimentConfig, ExperimentReport, Status, SweepMode,
};
use crate::graph::{generate_box, generate_box_truncated, load_realization, save_realization, write_realization};
use crate::hierarchy::{read_hierarchy, validate_hierarchy, HierarchyError};
use crate::lattice::{BoxSpec, Vertex};
use crate::moments::{adjacent_expectation_exact, adjacent_expectation_quadrature, convolution_ratio, single_edge_second_moment};
use crate::params::{ModelKind, ModelParams};
use crate::verify::{run_verify, Scale, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERDICT: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "sfp", version, about = "Scale-free and long-range percolation experiments")]
struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Flat `key = value` file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Model {
    #[arg(long = "dim", default_value_t = 1)]
    dim: u32,
    #[arg(long, default_value = "1.5", value_parser = parse_real)]
    alpha: f64,
    #[arg(long, default_value = "2.5", value_parser = parse_real)]
    tau: f64,
    #[arg(long, default_value = "1", value_parser = parse_real)]
    lambda: f64,
    /// sfp, lrp or sfp_nn.
    #[arg(long, default_value = "sfp")]
    model: String,
}

impl Model {
    fn params(&self) -> Result<ModelParams, Failure> {
        let kind: ModelKind = self.model.parse().map_err(Failure::usage)?;
        ModelParams::new(self.dim, self.alpha, self.lambda, self.tau, kind).map_err(Failure::usage)
    }
}

#[derive(Debug, Args)]
struct Run {
    #[command(flatten)]
    model: Model,
    /// Box side length.
    #[arg(long)]
    side: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    replicates: Option<u64>,
    /// Write the CSV report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Run {
    fn config(&self, side: u64, replicates: u64) -> Result<ExperimentConfig, Failure> {
        let p = self.model.params()?;
        let spec = BoxSpec::new(p.d(), self.side.unwrap_or(side)).map_err(Failure::usage)?;
        ExperimentConfig::new(p, spec, self.seed, self.replicates.unwrap_or(replicates)).map_err(Failure::usage)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Derived exponents and regime for one parameter set.
    Exponents {
        #[command(flatten)]
        model: Model,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate one box and write the realization.
    Generate {
        #[command(flatten)]
        run: Run,
        /// Lower corner, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        origin: Option<String>,
        /// Keep only edges up to this length.
        #[arg(long, alias = "truncate", value_parser = parse_real)]
        trunc: Option<f64>,
    },
    /// Degree tail of interior vertices.
    Degrees {
        #[command(flatten)]
        run: Run,
        /// Boundary margin (default side / 100).
        #[arg(long)]
        margin: Option<u64>,
        /// Hill order statistics.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Graph distance against Euclidean distance.
    Distances {
        #[command(flatten)]
        run: Run,
        /// Distances N, comma separated.
        #[arg(long, default_value = "16,32,64,128,256,512,1024")]
        n_list: String,
        #[arg(long, default_value_t = 100)]
        sources: usize,
        /// Boundary margin (default side / 100).
        #[arg(long)]
        margin: Option<u64>,
        /// Skip the coupled SFP/LRP comparison.
        #[arg(long)]
        no_compare: bool,
    },
    /// Probability of two adjacent edges.
    Adjacent {
        #[command(flatten)]
        run: Run,
        #[arg(long, default_value = "4096", value_parser = parse_real)]
        r_xy: f64,
        #[arg(long, default_value = "16", value_parser = parse_real)]
        r_yz: f64,
        /// Sweep over these |y - z|, comma separated.
        #[arg(long)]
        sweep: Option<String>,
        /// In a sweep, set |x - y| = ratio |y - z| instead of holding it fixed.
        #[arg(long, value_parser = parse_real)]
        ratio: Option<f64>,
    },
    /// Positive correlation along a path.
    Fkg {
        #[command(flatten)]
        run: Run,
        /// Vertices separated by `;`, coordinates by `,`.
        #[arg(long, default_value = "0;2;3", allow_hyphen_values = true)]
        path: String,
    },
    /// Connection through a midpoint cube.
    Bridge {
        #[command(flatten)]
        run: Run,
        #[arg(long, default_value = "0.5", value_parser = parse_real)]
        beta: f64,
        #[arg(long, default_value = "64,128,256,512,1024")]
        n_list: String,
    },
    /// Edge-set inclusion of coupled SFP, LRP and SFP_NN boxes.
    Coupling {
        #[command(flatten)]
        run: Run,
        /// Use unit weights on the SFP side.
        #[arg(long)]
        unit_weights: bool,
        /// Intensity for the LRP side.
        #[arg(long, value_parser = parse_real)]
        lrp_lambda: Option<f64>,
    },
    /// Deterministic moment computations.
    Moments {
        #[command(subcommand)]
        which: MomentsCommand,
    },
    /// Hierarchy tools.
    Hierarchy {
        #[command(subcommand)]
        which: HierarchyCommand,
    },
    /// Run the acceptance suite.
    Verify {
        /// Smaller sample sizes.
        #[arg(long)]
        quick: bool,
        /// Criteria to run, comma separated.
        #[arg(long)]
        only: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, hide = true)]
        inject_failure: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum MomentsCommand {
    /// Exact adjacent-edge expectation, its sandwich and the quadrature oracle.
    Adjacent {
        #[command(flatten)]
        model: Model,
        #[arg(long, value_parser = parse_real)]
        r_xy: f64,
        #[arg(long, value_parser = parse_real)]
        r_yz: f64,
    },
    /// Second moment of a single edge indicator's conditional probability.
    Second {
        #[command(flatten)]
        model: Model,
        /// Distances, comma separated.
        #[arg(long)]
        r: String,
    },
    /// Lattice convolution of two power laws.
    Convolution {
        #[command(flatten)]
        model: Model,
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        #[arg(long, value_parser = parse_real)]
        radius: f64,
    },
}

#[derive(Debug, Subcommand)]
enum HierarchyCommand {
    /// Check a hierarchy file against a realization file.
    Check {
        #[arg(long)]
        realization: PathBuf,
        #[arg(long)]
        hierarchy: PathBuf,
    },
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(e: impl ToString) -> Self {
        Failure { code: EXIT_USAGE, message: e.to_string() }
    }

    fn runtime(e: impl ToString) -> Self {
        Failure { code: EXIT_RUNTIME, message: e.to_string() }
    }
}

/// Accepts decimals and `p/q` fractions.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("invalid number `{s}`"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("invalid number `{s}`"))?;
            a / b
        }
        None => s.parse().map_err(|_| format!("invalid number `{s}`"))?,
    };
    if v.is_nan() {
        return Err(format!("invalid number `{s}`"));
    }
    Ok(v)
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split([',', ';']).map(str::trim).filter(|t| !t.is_empty())
}

fn parse_u64_list(s: &str) -> Result<Vec<u64>, Failure> {
    split_list(s).map(|t| t.parse().map_err(|_| Failure::usage(format!("invalid integer `{t}`")))).collect()
}

fn parse_real_list(s: &str) -> Result<Vec<f64>, Failure> {
    split_list(s).map(|t| parse_real(t).map_err(Failure::usage)).collect()
}

fn parse_vertex(s: &str) -> Result<Vertex, Failure> {
    let c: Result<Vec<i64>, _> = s.split(',').map(|t| t.trim().parse::<i64>()).collect();
    c.map(|c| Vertex::new(&c)).map_err(|_| Failure::usage(format!("invalid vertex `{s}`")))
}

fn parse_path(s: &str) -> Result<Vec<Vertex>, Failure> {
    s.split(';').map(str::trim).filter(|t| !t.is_empty()).map(parse_vertex).collect()
}

/// Appends `--key value` for every config entry whose flag is absent.
fn merge_config(args: &[String], text: &str) -> Result<Vec<String>, Failure> {
    let mut out = args.to_vec();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("config line {}: expected `key = value`", n + 1)))?;
        let key = format!("--{}", k.trim().trim_start_matches('-').replace('_', "-"));
        let present = args.iter().any(|a| *a == key || a.starts_with(&format!("{key}=")));
        if present {
            continue;
        }
        match v.trim() {
            "true" => out.push(key),
            "false" => {}
            v => {
                out.push(key);
                out.push(v.trim_matches('"').to_string());
            }
        }
    }
    Ok(out)
}

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let mut args: Vec<String> = args.into_iter().map(Into::into).collect();
    if let Some(path) = config_path(&args) {
        let merged = fs::read_to_string(&path)
            .map_err(|e| Failure::runtime(format!("cannot read config {path}: {e}")))
            .and_then(|t| merge_config(&args, &t));
        match merged {
            Ok(a) => args = a,
            Err(f) => {
                eprintln!("error: {}", f.message);
                return f.code;
            }
        }
    }
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RUNTIME;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn emit(rep: &ExperimentReport, out: Option<&PathBuf>) -> Result<i32, Failure> {
    match out {
        Some(path) => {
            let f = fs::File::create(path).map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))?;
            rep.write_csv(io::BufWriter::new(f)).map_err(Failure::runtime)?;
        }
        None => rep.write_csv(io::stdout().lock()).map_err(Failure::runtime)?,
    }
    Ok(if rep.passed() { EXIT_OK } else { EXIT_VERDICT })
}

fn model_header(name: &str, p: &ModelParams) -> Vec<(String, String)> {
    vec![
        ("experiment".into(), name.into()),
        ("version".into(), experiments::VERSION.into()),
        ("d".into(), p.d().to_string()),
        ("alpha".into(), fmt_real(p.alpha())),
        ("tau".into(), fmt_real(p.tau())),
        ("lambda".into(), fmt_real(p.lambda())),
        ("model".into(), p.kind().to_string()),
    ]
}

fn rt<T, E: ToString>(r: Result<T, E>) -> Result<T, Failure> {
    r.map_err(Failure::runtime)
}

fn dispatch(cmd: Command) -> Result<i32, Failure> {
    match cmd {
        Command::Exponents { model, out } => {
            let p = model.params()?;
            let e = p.exponents();
            let mut rep = ExperimentReport::new(
                "exponents",
                model_header("exponents", &p),
                &["gamma", "alpha1", "alpha2", "delta", "delta1", "delta2", "regime"],
            );
            rep.row(vec![
                fmt_real(e.gamma),
                fmt_real(e.alpha1),
                fmt_real(e.alpha2),
                fmt_real(e.delta.value()),
                fmt_real(e.delta1.value()),
                fmt_real(e.delta2.value()),
                p.regime().to_string(),
            ]);
            emit(&rep, out.as_ref())
        }
        Command::Generate { run, origin, trunc } => {
            let p = run.model.params()?;
            let side = run.side.unwrap_or(64);
            let spec = match origin {
                Some(o) => BoxSpec::with_origin(p.d(), side, parse_vertex(&o)?),
                None => BoxSpec::new(p.d(), side),
            }
            .map_err(Failure::usage)?;
            let r = match trunc {
                Some(c) => rt(generate_box_truncated(&p, run.seed, &spec, c))?,
                None => rt(generate_box(&p, run.seed, &spec))?,
            };
            match &run.out {
                Some(path) => rt(save_realization(&r, path))?,
                None => rt(write_realization(&r, io::stdout().lock()))?,
            }
            Ok(EXIT_OK)
        }
        Command::Degrees { run, margin, k } => {
            let cfg = run.config(10_000, 1)?;
            let margin = margin.unwrap_or(cfg.spec.side() / 100);
            let rep = rt(run_degree_experiment(&cfg, DegreeOptions { margin, k }))?;
            emit(&rep, run.out.as_ref())
        }
        Command::Distances { run, n_list, sources, margin, no_compare } => {
            let cfg = run.config(20_000, 1)?;
            let mut o = DistanceOptions::new(parse_u64_list(&n_list)?, sources);
            o.margin = margin.unwrap_or(cfg.spec.side() / 100);
            o.compare_lrp = !no_compare;
            let rep = rt(run_distance_experiment(&cfg, &o))?;
            emit(&rep, run.out.as_ref())
        }
        Command::Adjacent { run, r_xy, r_yz, sweep, ratio } => {
            let cfg = run.config(2, 100_000)?;
            let rep = match sweep {
                Some(list) => {
                    let mode = match ratio {
                        Some(q) => SweepMode::FixedRatio(q),
                        None => SweepMode::FixedXy(r_xy),
                    };
                    rt(run_adjacent_sweep(&cfg, mode, &parse_real_list(&list)?))?
                }
                None => rt(run_adjacent_mc_hooked(&cfg, r_xy, r_yz, 1.0))?,
            };
            emit(&rep, run.out.as_ref())
        }
        Command::Fkg { run, path } => {
            let cfg = run.config(2, 100_000)?;
            let rep = rt(run_fkg_check(&cfg, &parse_path(&path)?))?;
            emit(&rep, run.out.as_ref())
        }
        Command::Bridge { run, beta, n_list } => {
            let cfg = run.config(2, 100_000)?;
            let rep = rt(run_bridge_experiment(&cfg, beta, &parse_u64_list(&n_list)?))?;
            emit(&rep, run.out.as_ref())
        }
        Command::Coupling { run, unit_weights, lrp_lambda } => {
            let cfg = run.config(256, 100)?;
            let rep = rt(run_coupling_check(&cfg, CouplingOptions { unit_weights, lrp_lambda }))?;
            emit(&rep, run.out.as_ref())
        }
        Command::Moments { which } => moments(which),
        Command::Hierarchy { which: HierarchyCommand::Check { realization, hierarchy } } => {
            let r = rt(load_realization(&realization))?;
            let f = fs::File::open(&hierarchy).map_err(|e| Failure::runtime(format!("{}: {e}", hierarchy.display())))?;
            let h = rt(read_hierarchy(BufReader::new(f)))?;
            match validate_hierarchy(&h, &r) {
                Ok(()) => {
                    println!("valid depth={}", h.depth());
                    Ok(EXIT_OK)
                }
                Err(HierarchyError::Violation(v)) => {
                    println!("invalid condition={} {v}", v.condition());
                    Ok(EXIT_VERDICT)
                }
                Err(e @ HierarchyError::SiteOutOfBox(..)) => {
                    println!("invalid {e}");
                    Ok(EXIT_VERDICT)
                }
                Err(e) => Err(Failure::runtime(e)),
            }
        }
        Command::Verify { quick, only, seed, inject_failure, out } => {
            let mut o = VerifyOptions::new(if quick { Scale::Quick } else { Scale::Full }, seed);
            o.inject_failure = inject_failure;
            if let Some(list) = only {
                let ids = parse_u64_list(&list)?;
                if ids.iter().any(|&i| i == 0 || i > crate::verify::CRITERIA as u64) {
                    return Err(Failure::usage(format!("criteria are numbered 1 to {}", crate::verify::CRITERIA)));
                }
                o.only = ids.into_iter().map(|i| i as u8).collect();
            }
            let (results, rep) = run_verify(&o);
            let mut err = io::stderr().lock();
            for r in &results {
                let _ = writeln!(err, "{}", r.line());
            }
            emit(&rep, out.as_ref())
        }
    }
}

fn moments(which: MomentsCommand) -> Result<i32, Failure> {
    let rep = match which {
        MomentsCommand::Adjacent { model, r_xy, r_yz } => {
            let p = model.params()?;
            let e = rt(adjacent_expectation_exact(&p, r_xy, r_yz))?;
            let q = rt(adjacent_expectation_quadrature(&p, r_xy, r_yz))?;
            let mut rep =
                ExperimentReport::new("moments_adjacent", model_header("moments_adjacent", &p), &["r_xy", "r_yz", "middle", "lower", "upper", "quadrature"]);
            rep.row(vec![fmt_real(r_xy), fmt_real(r_yz), fmt_real(e.middle_expectation), fmt_real(e.lower), fmt_real(e.upper), fmt_real(q)]);
            let rel = (e.middle_expectation - q).abs() / q.abs();
            rep.verdict("closed_form_vs_quadrature", Status::from_bool(rel <= 1e-9), format!("rel_err={}", fmt_real(rel)));
            rep
        }
        MomentsCommand::Second { model, r } => {
            let p = model.params()?;
            let a1 = p.exponents().alpha1;
            let mut rep = ExperimentReport::new("moments_second", model_header("moments_second", &p), &["r", "second_moment", "scaled"]);
            for r in parse_real_list(&r)? {
                let m = rt(single_edge_second_moment(&p, r))?;
                rep.row(vec![fmt_real(r), fmt_real(m), fmt_real(m * r.powf(2.0 * a1) / (1.0 + r.ln()))]);
            }
            rep
        }
        MomentsCommand::Convolution { model, u, v, radius } => {
            let p = model.params()?;
            let c = rt(convolution_ratio(&p, &parse_vertex(&u)?, &parse_vertex(&v)?, radius))?;
            let mut rep = ExperimentReport::new(
                "moments_convolution",
                model_header("moments_convolution", &p),
                &["u", "v", "radius", "sum", "ratio", "tail_bound", "terms"],
            );
            rep.row(vec![format!("\"{u}\""), format!("\"{v}\""), fmt_real(radius), fmt_real(c.sum), fmt_real(c.ratio), fmt_real(c.tail_bound), c.terms.to_string()]);
            rep
        }
    };
    emit(&rep, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn reals_and_lists() {
        assert_eq!(parse_real("7/3").unwrap(), 7.0 / 3.0);
        assert_eq!(parse_real(" 2.5 ").unwrap(), 2.5);
        assert!(parse_real("a/b").is_err());
        assert_eq!(parse_u64_list("4, 8;16").unwrap(), vec![4, 8, 16]);
        assert_eq!(parse_path("0;2;3").unwrap().len(), 3);
        assert_eq!(parse_vertex("-5,2").unwrap(), Vertex::new(&[-5, 2]));
    }

    #[test]
    fn config_merge_respects_flags() {
        let args = s(&["sfp", "degrees", "--alpha", "1.5"]);
        let merged = merge_config(&args, "# c\nalpha = 2\ntau=3.5\nunit_weights = true\nquick = false\n").unwrap();
        assert_eq!(merged, s(&["sfp", "degrees", "--alpha", "1.5", "--tau", "3.5", "--unit-weights"]));
        assert!(merge_config(&args, "oops").is_err());
        assert_eq!(config_path(&s(&["sfp", "--config=a.cfg"])), Some("a.cfg".into()));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["sfp", "exponents", "--frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["sfp", "exponents", "--alpha=-1"]), EXIT_USAGE);
        assert_eq!(run(["sfp", "exponents", "--model", "percolation"]), EXIT_USAGE);
        assert_eq!(run(["sfp", "verify", "--only", "13"]), EXIT_USAGE);
    }
}
