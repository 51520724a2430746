//! `strawnet` command-line interface.
//!
//! Exit codes: 0 success, 1 invalid input or usage, 2 internal error,
//! 3 conflict found with `conflict --exit-on-conflict`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use strawnet::format::{parse_findings, parse_network_unvalidated, parse_network_with, serialize_network, ParseOptions};
use strawnet::harness::{surprise_bound_check, DetectionExperiment, NetSpec};
use strawnet::inference::{posterior_marginal_by_name, prob_of_evidence};
use strawnet::straw::{build_straw, fmt_sig, ConflictScorer};
use strawnet::{validate_network, Evidence, Network, Role, StrawKind, Verdict};

#[derive(Debug, Parser)]
#[command(name = "strawnet", version, about = "Straw-model conflict detection for diagnostic Bayesian networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the validation report of a network file.
    Validate {
        net: PathBuf,
    },
    /// Print P(e) and posterior marginals.
    Query {
        net: PathBuf,
        #[command(flatten)]
        load: LoadArgs,
        #[command(flatten)]
        findings: FindingArgs,
        /// Variable whose posterior to print; repeatable.
        #[arg(long = "marginal", value_name = "VAR")]
        marginals: Vec<String>,
    },
    /// Build a straw model and write it as a network file.
    Straw {
        net: PathBuf,
        #[command(flatten)]
        load: LoadArgs,
        #[arg(long, value_parser = parse_kind)]
        kind: StrawKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score findings against straw models.
    Conflict {
        net: PathBuf,
        #[command(flatten)]
        load: LoadArgs,
        #[command(flatten)]
        findings: FindingArgs,
        /// bipartite, independent or both.
        #[arg(long, default_value = "both")]
        kind: String,
        /// Exit with code 3 when any straw kind reports a conflict.
        #[arg(long)]
        exit_on_conflict: bool,
    },
    /// Compare straw kinds on a generated mixture world.
    Experiment(ExperimentArgs),
    /// Empirical check of the surprise-index bound P(c_s > K) <= 2^-K.
    CheckBound {
        net: PathBuf,
        #[command(flatten)]
        load: LoadArgs,
        /// Comma-separated straw kinds.
        #[arg(long, default_value = "bipartite,independent")]
        kind: String,
        /// Comma-separated thresholds K.
        #[arg(long = "k", default_value = "1,2,3,4")]
        thresholds: String,
        #[arg(long, default_value_t = 100_000)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct LoadArgs {
    /// Divide CPT rows by their sums instead of rejecting them.
    #[arg(long)]
    renormalize: bool,
}

#[derive(Debug, Args)]
struct FindingArgs {
    /// A finding VAR=STATE; repeatable. Overrides --findings.
    #[arg(long = "ev", value_name = "VAR=STATE")]
    ev: Vec<String>,
    /// File of VAR=STATE findings.
    #[arg(long, value_name = "FILE")]
    findings: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(long)]
    targets: usize,
    #[arg(long)]
    evidence: usize,
    #[arg(long)]
    other: usize,
    #[arg(long)]
    strength: f64,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    cases: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    states: usize,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    /// Flag a case when c_s exceeds this value.
    #[arg(long, default_value_t = 0.0)]
    threshold: f64,
    /// Comma-separated roles whose CPTs the alternate model perturbs.
    #[arg(long, default_value = "target,evidence,other")]
    perturb: String,
}

fn parse_kind(s: &str) -> Result<StrawKind, String> {
    s.parse()
}

/// Error with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn usage(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: 1, error: error.into() }
    }

    fn internal(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: 2, error: error.into() }
    }
}

impl From<strawnet::Error> for Failure {
    fn from(e: strawnet::Error) -> Self {
        use strawnet::Error::*;
        match e {
            ScopeMismatch { .. } | NotInScope(_) | StateOutOfRange { .. } | StateSpaceTooLarge { .. } => {
                Failure::internal(e)
            }
            _ => Failure::usage(e),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(Failure::usage)
}

fn load(path: &Path, args: &LoadArgs) -> CliResult<Network> {
    let text = read(path)?;
    parse_network_with(&text, ParseOptions { renormalize: args.renormalize })
        .map_err(|e| Failure::usage(anyhow!(e).context(format!("in {}", path.display()))))
}

fn findings(net: &Network, args: &FindingArgs) -> CliResult<Evidence> {
    let mut ev = match &args.findings {
        Some(path) => parse_findings(&read(path)?, net)?,
        None => Evidence::new(),
    };
    let cli = parse_findings(&args.ev.join("\n"), net)?;
    for warning in ev.override_with(&cli) {
        eprintln!("warning: {warning}");
    }
    Ok(ev)
}

fn kinds(list: &str) -> CliResult<Vec<StrawKind>> {
    if list.trim() == "both" {
        return Ok(StrawKind::ALL.to_vec());
    }
    list.split(',')
        .map(|k| k.parse().map_err(|m: String| Failure::usage(anyhow!(m))))
        .collect()
}

fn numbers(list: &str) -> CliResult<Vec<f64>> {
    list.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Failure::usage(anyhow!("invalid number \"{}\"", x.trim())))
        })
        .collect()
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Validate { net } => {
            let text = read(&net)?;
            let parsed = parse_network_unvalidated(&text)
                .map_err(|e| Failure::usage(anyhow!(e).context(format!("in {}", net.display()))))?;
            let report = validate_network(&parsed);
            if report.is_empty() {
                println!("{}: ok ({} variables)", parsed.name(), parsed.len());
                Ok(0)
            } else {
                println!("{}: {} problem(s)", parsed.name(), report.len());
                println!("{report}");
                Ok(1)
            }
        }
        Command::Query { net, load: l, findings: f, marginals } => {
            let net = load(&net, &l)?;
            let ev = findings(&net, &f)?;
            println!("P(e) = {}", fmt_sig(prob_of_evidence(&net, &ev)?, 4));
            for name in &marginals {
                let dist = posterior_marginal_by_name(&net, name, &ev)?;
                let id = net.find_or_err(name)?;
                let parts: Vec<String> = net
                    .variable(id)
                    .states
                    .iter()
                    .zip(&dist)
                    .map(|(s, p)| format!("{s}={}", fmt_sig(*p, 4)))
                    .collect();
                println!("P({name} | e): {}", parts.join(", "));
            }
            Ok(0)
        }
        Command::Straw { net, load: l, kind, out } => {
            let net = load(&net, &l)?;
            let straw = build_straw(&net, kind)?;
            for w in &straw.warnings {
                eprintln!("warning: {w}");
            }
            fs::write(&out, serialize_network(&straw.network))
                .with_context(|| format!("cannot write {}", out.display()))
                .map_err(Failure::internal)?;
            println!(
                "wrote {} straw model ({} variables) to {}",
                kind,
                straw.network.len(),
                out.display()
            );
            Ok(0)
        }
        Command::Conflict { net, load: l, findings: f, kind, exit_on_conflict } => {
            let net = load(&net, &l)?;
            let ev = findings(&net, &f)?;
            let scorer = ConflictScorer::new(&net, &kinds(&kind)?)?;
            for straw in scorer.straws() {
                for w in &straw.warnings {
                    eprintln!("warning: {w}");
                }
            }
            let report = scorer.score(&ev)?;
            println!("{report}");
            let conflict = report.scores.iter().any(|s| s.verdict == Verdict::Conflict);
            Ok(if conflict && exit_on_conflict { 3 } else { 0 })
        }
        Command::Experiment(a) => {
            let spec = NetSpec {
                n_target: a.targets,
                n_evidence: a.evidence,
                n_other: a.other,
                states_per_var: a.states,
                edge_density: a.density,
                seed: a.seed,
            };
            let mut exp = DetectionExperiment::new(spec, a.strength, a.epsilon, a.cases, a.seed);
            exp.threshold = a.threshold;
            exp.perturb_roles = a
                .perturb
                .split(',')
                .map(|r| r.trim().parse::<Role>().map_err(|m| Failure::usage(anyhow!(m))))
                .collect::<CliResult<_>>()?;
            print!("{}", exp.run()?.to_table());
            Ok(0)
        }
        Command::CheckBound { net, load: l, kind, thresholds, cases, seed } => {
            let net = load(&net, &l)?;
            let ks = numbers(&thresholds)?;
            println!("kind\tK\tfraction\tbound\tslack\twithin_bound");
            for kind in kinds(&kind)? {
                for x in surprise_bound_check(&net, kind, &ks, cases, seed)? {
                    println!(
                        "{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{}",
                        kind,
                        x.k,
                        x.fraction,
                        x.bound(),
                        x.slack(),
                        x.within_bound()
                    );
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
