use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use trace_forms_cli::config::{
    parse_count, parse_floats, BodySpec, ExperimentConfig, ExperimentKind, MatrixSource,
    MeasureConfig, QuadConfig, SCHEMA_VERSION,
};
use trace_forms_cli::run::run;
use trace_forms_cli::{repro, CliError, Result};

/// Higher-trace averages over the boundaries of normed spaces: exact
/// minor sums, sphere-measure averages, isotropy operators, group designs,
/// and the reproduction suite.
#[derive(Parser)]
#[command(name = "trace-forms", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact higher traces (principal minor sums) of a matrix.
    Exact(ExactArgs),
    /// Trace average under the cone measure of a wedge-space body.
    ConeAvg(AvgArgs),
    /// Trace average under the hypersurface measure of a wedge-space body.
    HyperAvg(AvgArgs),
    /// Isotropy operator T of a body under a boundary measure.
    Isotropy(IsotropyArgs),
    /// Discrete facet-centroid trace formula on a polytope.
    Discrete(DiscreteArgs),
    /// 2-design defect of a finite orthogonal group on wedge powers.
    DesignCheck(DesignArgs),
    /// Monte Carlo lambda_k estimate from random k-planes.
    Grassmann(GrassmannArgs),
    /// First variation of T under a boundary perturbation, with an
    /// epsilon-ladder extrapolation and CSV table.
    Perturb(PerturbArgs),
    /// Derivative of the trace average in the interpolation parameter
    /// alpha, against the closed form, with CSV table.
    AlphaScan(AlphaScanArgs),
    /// Reproduction suite of the headline computations.
    Repro(ReproArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Load the experiment from a TOML config file (excludes other
    /// experiment flags).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Write the resolved config as TOML.
    #[arg(long, value_name = "FILE")]
    emit_config: Option<PathBuf>,
}

#[derive(Args)]
struct ExactArgs {
    /// Matrix source: file:PATH (JSON rows) or random:seed=N.
    #[arg(long)]
    matrix: Option<String>,
    /// Dimension for a random matrix.
    #[arg(long)]
    n: Option<usize>,
    /// Report a single lambda_k alongside the full trace vector.
    #[arg(long)]
    k: Option<usize>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct AvgArgs {
    /// Ambient dimension the matrix acts on.
    #[arg(long = "N")]
    n: Option<usize>,
    /// Wedge power; the body lives in dimension C(N, k).
    #[arg(long)]
    k: Option<usize>,
    /// Body family: cube | cross | hexagon | lp:p=P | l1 | l2 | linf |
    /// smooth:eps=E,g=NAME | random-poly:extra=E,seed=S | random-sym-poly:...
    #[arg(long)]
    body: Option<String>,
    /// Monte Carlo sample count (shorthand for --quad mc:SAMPLES).
    #[arg(long)]
    samples: Option<String>,
    /// Quadrature: exact | angular:N | product:N | mc:N.
    #[arg(long)]
    quad: Option<String>,
    /// Matrix source: file:PATH or random:seed=N.
    #[arg(long)]
    matrix: Option<String>,
    /// Seed for randomized quadrature.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct IsotropyArgs {
    /// Body spec; include m=... when the family needs a dimension.
    #[arg(long)]
    body: Option<String>,
    /// Measure: hypersurface | cone | alpha:A. Default hypersurface.
    #[arg(long)]
    measure: Option<String>,
    /// Quadrature: exact | angular:N | product:N | mc:N. Defaults to the
    /// body's natural rule when it has one.
    #[arg(long)]
    quad: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct DiscreteArgs {
    /// Polytope body spec.
    #[arg(long)]
    body: Option<String>,
    /// Matrix source: file:PATH or random:seed=N.
    #[arg(long)]
    matrix: Option<String>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct DesignArgs {
    /// Group: hyperoctahedral:N | dihedral:M | cyclic:N | tetrahedral |
    /// octahedral | icosahedral (b:, d:, c: shorthands).
    #[arg(long)]
    group: Option<String>,
    /// Single wedge power to check (default 1).
    #[arg(long)]
    k: Option<usize>,
    /// Check every wedge power 1..=N.
    #[arg(long)]
    all_k: bool,
    /// Extra random unit-norm conjugation trials per k (default 0; the
    /// elementary basis sweep is already complete).
    #[arg(long)]
    trials: Option<usize>,
    /// Seed for random trials.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct GrassmannArgs {
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Sample count, e.g. 1e6.
    #[arg(long)]
    samples: Option<String>,
    /// Seed for the Haar frame stream.
    #[arg(long)]
    seed: Option<u64>,
    /// Matrix source: file:PATH or random:seed=N.
    #[arg(long)]
    matrix: Option<String>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct PerturbArgs {
    /// Perturbation: cos2 | cos4 | zonal4.
    #[arg(long)]
    g: Option<String>,
    /// Measure: hypersurface | cone | alpha:A. Default hypersurface.
    #[arg(long)]
    measure: Option<String>,
    /// Decreasing epsilon ladder, e.g. 1e-2,1e-3.
    #[arg(long)]
    ladder: Option<String>,
    /// Sphere quadrature: angular:N | product:N | mc:N.
    #[arg(long)]
    quad: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the sweep table as CSV.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct AlphaScanArgs {
    /// Perturbation: cos2 | cos4 | zonal4. Default cos2.
    #[arg(long)]
    g: Option<String>,
    /// Alpha grid, e.g. 0.5,1,2,3.
    #[arg(long)]
    alphas: Option<String>,
    /// Decreasing epsilon ladder, e.g. 1e-2,1e-3.
    #[arg(long)]
    ladder: Option<String>,
    /// Sphere quadrature: angular:N | product:N | mc:N.
    #[arg(long)]
    quad: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the sweep table as CSV.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ReproArgs {
    /// Case name, or `all`.
    case: Option<String>,
    /// List the available cases.
    #[arg(long)]
    list: bool,
    #[command(flatten)]
    common: CommonArgs,
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => {}
        Err(e) => {
            let payload = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            eprintln!("{}", payload);
            std::process::exit(e.exit_code());
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    let (config, common, csv_flag) = resolve(command)?;
    if let Some(path) = &common.emit_config {
        write_file(path, &config.to_toml()?)?;
    }
    let output = run(&config)?;
    let json_text = output.report.to_json_string();
    let out_path = common.out.clone().or_else(|| config.output.clone().map(PathBuf::from));
    match &out_path {
        Some(path) => write_file(path, &json_text)?,
        None => print!("{}", json_text),
    }
    let csv_path = csv_flag.or_else(|| config.csv.clone().map(PathBuf::from));
    if let (Some(path), Some(table)) = (&csv_path, &output.csv) {
        write_file(path, &table.render())?;
    }
    if let Some(violation) = output.violation {
        let payload = json!({ "error": { "kind": "invariant-violation", "message": violation } });
        eprintln!("{}", payload);
        std::process::exit(1);
    }
    Ok(())
}

fn write_file(path: &PathBuf, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn base_config(kind: ExperimentKind) -> ExperimentConfig {
    ExperimentConfig {
        schema: SCHEMA_VERSION,
        seed: None,
        output: None,
        csv: None,
        kind,
        body: None,
        matrix: None,
        measure: None,
        quadrature: None,
    }
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ExperimentConfig::from_toml(&text)
}

fn reject_flags(used: &[(&str, bool)]) -> Result<()> {
    for (name, set) in used {
        if *set {
            return Err(CliError::Config(format!(
                "--{} cannot be combined with --config; put it in the config file",
                name
            )));
        }
    }
    Ok(())
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| CliError::Config(format!("--{} is required", flag)))
}

fn resolve(command: Command) -> Result<(ExperimentConfig, CommonArgs, Option<PathBuf>)> {
    match command {
        Command::Exact(a) => {
            if let Some(path) = &a.common.config {
                reject_flags(&[
                    ("matrix", a.matrix.is_some()),
                    ("n", a.n.is_some()),
                    ("k", a.k.is_some()),
                ])?;
                let config = load_config(path)?;
                expect_kind(&config, "exact")?;
                return Ok((config, a.common, None));
            }
            let mut config = base_config(ExperimentKind::Exact { n: a.n, k: a.k });
            config.matrix = Some(MatrixSource::parse(&require(a.matrix, "matrix")?)?);
            Ok((config, a.common, None))
        }
        Command::ConeAvg(a) => resolve_avg(a, true),
        Command::HyperAvg(a) => resolve_avg(a, false),
        Command::Isotropy(a) => {
            if let Some(path) = &a.common.config {
                reject_flags(&[
                    ("body", a.body.is_some()),
                    ("measure", a.measure.is_some()),
                    ("quad", a.quad.is_some()),
                    ("seed", a.seed.is_some()),
                ])?;
                let config = load_config(path)?;
                expect_kind(&config, "isotropy")?;
                return Ok((config, a.common, None));
            }
            let body = BodySpec::parse(&require(a.body, "body")?)?;
            let quad = match a.quad {
                Some(q) => QuadConfig::parse(&q)?,
                None => body.default_quadrature().ok_or_else(|| {
                    CliError::Config("this body has no default quadrature; pass --quad".into())
                })?,
            };
            let mut config = base_config(ExperimentKind::Isotropy);
            config.measure = Some(match a.measure {
                Some(m) => MeasureConfig::parse(&m)?,
                None => MeasureConfig::Hypersurface,
            });
            config.body = Some(body);
            config.quadrature = Some(quad);
            config.seed = a.seed;
            Ok((config, a.common, None))
        }
        Command::Discrete(a) => {
            if let Some(path) = &a.common.config {
                reject_flags(&[("body", a.body.is_some()), ("matrix", a.matrix.is_some())])?;
                let config = load_config(path)?;
                expect_kind(&config, "discrete")?;
                return Ok((config, a.common, None));
            }
            let mut config = base_config(ExperimentKind::Discrete);
            config.body = Some(BodySpec::parse(&require(a.body, "body")?)?);
            config.matrix = Some(MatrixSource::parse(&require(a.matrix, "matrix")?)?);
            Ok((config, a.common, None))
        }
        Command::DesignCheck(a) => {
            if let Some(path) = &a.common.config {
                reject_flags(&[
                    ("group", a.group.is_some()),
                    ("k", a.k.is_some()),
                    ("all-k", a.all_k),
                    ("trials", a.trials.is_some()),
                    ("seed", a.seed.is_some()),
                ])?;
                let config = load_config(path)?;
                expect_kind(&config, "design-check")?;
                return Ok((config, a.common, None));
            }
            let mut config = base_config(ExperimentKind::DesignCheck {
                group: require(a.group, "group")?,
                k: a.k,
                all_k: a.all_k,
                trials: a.trials.unwrap_or(0),
            });
            config.seed = a.seed;
            Ok((config, a.common, None))
        }
        Command::Grassmann(a) => {
            if let Some(path) = &a.common.config {
                reject_flags(&[
                    ("N", a.n.is_some()),
                    ("k", a.k.is_some()),
                    ("samples", a.samples.is_some()),
                    ("seed", a.seed.is_some()),
                    ("matrix", a.matrix.is_some()),
                ])?;
                let config = load_config(path)?;
                expect_kind(&config, "grassmann")?;
                return Ok((config, a.common, None));
            }
            let mut config = base_config(ExperimentKind::Grassmann {
                n: require(a.n, "N")?,
                k: require(a.k, "k")?,
                samples: parse_count(&require(a.samples, "samples")?)?,
            });
            config.matrix = Some(MatrixSource::parse(&require(a.matrix, "matrix")?)?);
            config.seed = Some(require(a.seed, "seed")?);
            Ok((config, a.common, None))
        }
        Command::Perturb(a) => {
            if let Some(path) = &a.common.config {
                reject_flags(&[
                    ("g", a.g.is_some()),
                    ("measure", a.measure.is_some()),
                    ("ladder", a.ladder.is_some()),
                    ("quad", a.quad.is_some()),
                    ("seed", a.seed.is_some()),
                ])?;
                let config = load_config(path)?;
                expect_kind(&config, "perturb")?;
                return Ok((config, a.common, a.csv));
            }
            let g = require(a.g, "g")?;
            let quad = match a.quad {
                Some(q) => QuadConfig::parse(&q)?,
                None => default_sphere_quad(&g)?,
            };
            let ladder = parse_floats(a.ladder.as_deref().unwrap_or("1e-2,1e-3"))?;
            let mut config = base_config(ExperimentKind::Perturb { g, ladder });
            config.measure = Some(match a.measure {
                Some(m) => MeasureConfig::parse(&m)?,
                None => MeasureConfig::Hypersurface,
            });
            config.quadrature = Some(quad);
            config.seed = a.seed;
            Ok((config, a.common, a.csv))
        }
        Command::AlphaScan(a) => {
            if let Some(path) = &a.common.config {
                reject_flags(&[
                    ("g", a.g.is_some()),
                    ("alphas", a.alphas.is_some()),
                    ("ladder", a.ladder.is_some()),
                    ("quad", a.quad.is_some()),
                    ("seed", a.seed.is_some()),
                ])?;
                let config = load_config(path)?;
                expect_kind(&config, "alpha-scan")?;
                return Ok((config, a.common, a.csv));
            }
            let g = a.g.unwrap_or_else(|| "cos2".to_string());
            let quad = match a.quad {
                Some(q) => QuadConfig::parse(&q)?,
                None => QuadConfig::Angular { nodes: 256 },
            };
            let alphas = parse_floats(a.alphas.as_deref().unwrap_or("0.5,1,2,3"))?;
            let ladder = parse_floats(a.ladder.as_deref().unwrap_or("1e-2,1e-3"))?;
            let mut config = base_config(ExperimentKind::AlphaScan { g, alphas, ladder });
            config.quadrature = Some(quad);
            config.seed = a.seed;
            Ok((config, a.common, a.csv))
        }
        Command::Repro(a) => {
            if a.list {
                for case in repro::CASES {
                    println!("{}", case);
                }
                println!("all");
                std::process::exit(0);
            }
            if let Some(path) = &a.common.config {
                reject_flags(&[("CASE", a.case.is_some())])?;
                let config = load_config(path)?;
                expect_kind(&config, "repro")?;
                return Ok((config, a.common, None));
            }
            let case = a.case.ok_or_else(|| {
                CliError::Config("pass a case name or --list; e.g. `trace-forms repro hexagon`".into())
            })?;
            Ok((base_config(ExperimentKind::Repro { case }), a.common, None))
        }
    }
}

fn resolve_avg(a: AvgArgs, cone: bool) -> Result<(ExperimentConfig, CommonArgs, Option<PathBuf>)> {
    let kind_name = if cone { "cone-avg" } else { "hyper-avg" };
    if let Some(path) = &a.common.config {
        reject_flags(&[
            ("N", a.n.is_some()),
            ("k", a.k.is_some()),
            ("body", a.body.is_some()),
            ("samples", a.samples.is_some()),
            ("quad", a.quad.is_some()),
            ("matrix", a.matrix.is_some()),
            ("seed", a.seed.is_some()),
        ])?;
        let config = load_config(path)?;
        expect_kind(&config, kind_name)?;
        return Ok((config, a.common, None));
    }
    let n = require(a.n, "N")?;
    let k = require(a.k, "k")?;
    let body = BodySpec::parse(&require(a.body, "body")?)?;
    let quad = match (a.quad, a.samples) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config("--samples and --quad are alternatives; pass one".into()));
        }
        (Some(q), None) => QuadConfig::parse(&q)?,
        (None, Some(s)) => QuadConfig::MonteCarlo { samples: parse_count(&s)? },
        (None, None) => body.default_quadrature().ok_or_else(|| {
            CliError::Config("this body needs --samples or an explicit --quad".into())
        })?,
    };
    let kind = if cone {
        ExperimentKind::ConeAvg { n, k }
    } else {
        ExperimentKind::HyperAvg { n, k }
    };
    let mut config = base_config(kind);
    config.body = Some(body);
    config.matrix = Some(MatrixSource::parse(&require(a.matrix, "matrix")?)?);
    config.quadrature = Some(quad);
    config.seed = a.seed;
    Ok((config, a.common, None))
}

fn default_sphere_quad(g: &str) -> Result<QuadConfig> {
    let (_, m) = trace_forms_cli::config::sphere_function(g)?;
    Ok(if m == 2 { QuadConfig::Angular { nodes: 4096 } } else { QuadConfig::Product { nodes: 16 } })
}

fn expect_kind(config: &ExperimentConfig, expected: &str) -> Result<()> {
    if config.kind.name() != expected {
        return Err(CliError::Config(format!(
            "config file describes `{}` but the subcommand is `{}`",
            config.kind.name(),
            expected
        )));
    }
    Ok(())
}
