//! Command-line front end: seed ingestion, stage runs, and deterministic
//! file emission. Exit code 0 on success, 1 on a domain error (malformed
//! inputs included), 2 on usage errors.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use exotime::bisim::build_sigma;
use exotime::embedding::{
    code_params, codewords, codewords_text, distance_matrix_d2, eigh, EighOptions, PairingRule,
};
use exotime::emit::float17;
use exotime::evidence::bpa_from_model;
use exotime::kripke::KripkeModel;
use exotime::proximity::{proximity_from_inner_products, ProximitySpace};
use exotime::unfolding::{unfold, SeedGraph, UnfoldLimits};
use exotime::universe::{
    self, diagnostics_json, omega_json, parse_prior_json, run_states, RunOptions, StageState,
};

#[derive(Parser)]
#[command(
    name = "exotime",
    about = "Deterministic stage simulator: unfolding, bisimulation mirrors, \
             tree-metric spectra, and evidence reports",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by the stage-producing subcommands. Flags win over the
/// config file; built-in defaults apply last.
#[derive(Args, Clone)]
struct CommonOpts {
    /// key=value config file (depth_cap, node_cap, eps_degenerate,
    /// eps_zero, pairing_rule, prior)
    #[arg(long)]
    config: Option<PathBuf>,
    /// unfolding depth cap (default 12)
    #[arg(long)]
    depth_cap: Option<usize>,
    /// unfolding node cap (default 1000000)
    #[arg(long)]
    node_cap: Option<u64>,
    /// relative degeneracy threshold for eigenvalue flags (default 1e-8)
    #[arg(long)]
    eps_degenerate: Option<f64>,
    /// zero tolerance for inner products (default 1e-12)
    #[arg(long)]
    eps_zero: Option<f64>,
    /// world-eigenvector pairing rule: positional | max-component
    /// (default positional)
    #[arg(long)]
    pairing: Option<String>,
    /// prior source for explanations: uniform | file (default uniform)
    #[arg(long)]
    prior: Option<String>,
    /// JSON array of prior probabilities, used when the prior is `file`
    #[arg(long)]
    prior_file: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Unfold a seed to a stage and export the tree
    Unfold {
        #[arg(long)]
        seed: PathBuf,
        #[arg(long)]
        alpha: usize,
        /// DOT export path
        #[arg(long)]
        dot: Option<PathBuf>,
        /// JSON export path
        #[arg(long)]
        json: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Mirror a stage into its proximity model and verify the pairing
    Bisim {
        #[arg(long)]
        seed: PathBuf,
        #[arg(long)]
        alpha: usize,
        /// JSON report path (pair list plus violation list)
        #[arg(long)]
        report: Option<PathBuf>,
        /// DOT export of both orientations with loops
        #[arg(long)]
        dot: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Enumerate the quantum-set lattice of a proximity space
    Lattice {
        /// proximity space JSON (carrier + unordered pair list)
        #[arg(long, conflicts_with = "vectors")]
        space: Option<PathBuf>,
        /// JSON array of vectors; proximity is non-orthogonality
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// carrier size cap for enumeration (default 16)
        #[arg(long, default_value_t = 16)]
        cap: usize,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Belief/plausibility/mass tables of a weighted SVA model
    Ds {
        #[arg(long)]
        model: PathBuf,
        /// comma-separated frame tags
        #[arg(long)]
        frame: String,
        /// CSV report path
        #[arg(long)]
        report: PathBuf,
    },
    /// Run one stage and write its artifacts into a directory
    Stage {
        #[arg(long)]
        seed: PathBuf,
        #[arg(long)]
        alpha: usize,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run several stages and write the trace as JSONL
    Run {
        #[arg(long)]
        seed: PathBuf,
        #[arg(long)]
        stages: usize,
        #[arg(long)]
        out: PathBuf,
        /// also write per-stage artifacts under this directory
        #[arg(long)]
        artifacts: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Spectrum of a stage's distance matrix
    Spectrum {
        #[arg(long)]
        seed: PathBuf,
        #[arg(long)]
        alpha: usize,
        /// spectrum CSV path
        #[arg(long)]
        csv: PathBuf,
        /// distance matrix CSV path
        #[arg(long)]
        d2: Option<PathBuf>,
        /// codeword dump path
        #[arg(long)]
        codewords: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
}

/// Resolved configuration after merging defaults, file, and flags.
#[derive(Clone, Debug)]
struct Config {
    limits: UnfoldLimits,
    eps_degenerate: f64,
    eps_zero: f64,
    pairing: PairingRule,
    prior_is_file: bool,
    prior_file: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            limits: UnfoldLimits::default(),
            eps_degenerate: 1e-8,
            eps_zero: 1e-12,
            pairing: PairingRule::Positional,
            prior_is_file: false,
            prior_file: None,
        }
    }
}

struct DomainError(String);

type CliResult<T> = Result<T, DomainError>;

impl<E: std::fmt::Display> From<E> for DomainError {
    fn from(e: E) -> Self {
        DomainError(e.to_string())
    }
}

fn parse_pairing(text: &str) -> CliResult<PairingRule> {
    match text {
        "positional" => Ok(PairingRule::Positional),
        "max-component" => Ok(PairingRule::MaxComponent),
        other => Err(DomainError(format!(
            "unknown pairing rule {other:?} (expected positional | max-component)"
        ))),
    }
}

fn resolve_config(common: &CommonOpts) -> CliResult<Config> {
    let mut cfg = Config::default();
    if let Some(path) = &common.config {
        let text = read(path)?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                DomainError(format!(
                    "{}:{}: expected key = value",
                    path.display(),
                    lineno + 1
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| {
                DomainError(format!(
                    "{}:{}: invalid {what} value {value:?}",
                    path.display(),
                    lineno + 1
                ))
            };
            match key {
                "depth_cap" => cfg.limits.depth_cap = value.parse().map_err(|_| bad("depth_cap"))?,
                "node_cap" => cfg.limits.node_cap = value.parse().map_err(|_| bad("node_cap"))?,
                "eps_degenerate" => {
                    cfg.eps_degenerate = value.parse().map_err(|_| bad("eps_degenerate"))?
                }
                "eps_zero" => cfg.eps_zero = value.parse().map_err(|_| bad("eps_zero"))?,
                "pairing_rule" => cfg.pairing = parse_pairing(value)?,
                "prior" => match value {
                    "uniform" => cfg.prior_is_file = false,
                    "file" => cfg.prior_is_file = true,
                    _ => return Err(bad("prior")),
                },
                other => {
                    return Err(DomainError(format!(
                        "{}:{}: unknown config key {other:?}",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        }
    }
    if let Some(v) = common.depth_cap {
        cfg.limits.depth_cap = v;
    }
    if let Some(v) = common.node_cap {
        cfg.limits.node_cap = v;
    }
    if let Some(v) = common.eps_degenerate {
        cfg.eps_degenerate = v;
    }
    if let Some(v) = common.eps_zero {
        cfg.eps_zero = v;
    }
    if let Some(v) = &common.pairing {
        cfg.pairing = parse_pairing(v)?;
    }
    if let Some(v) = &common.prior {
        match v.as_str() {
            "uniform" => cfg.prior_is_file = false,
            "file" => cfg.prior_is_file = true,
            other => return Err(DomainError(format!("unknown prior {other:?}"))),
        }
    }
    if common.prior_file.is_some() {
        cfg.prior_is_file = true;
    }
    cfg.prior_file = common.prior_file.clone();
    if cfg.prior_is_file && cfg.prior_file.is_none() {
        return Err(DomainError(
            "prior = file requires --prior-file".to_string(),
        ));
    }
    Ok(cfg)
}

impl Config {
    fn run_options(&self) -> RunOptions {
        RunOptions {
            limits: self.limits,
            eigh: EighOptions {
                eps_degenerate_rel: self.eps_degenerate,
                max_sweeps: 100,
            },
            pairing: self.pairing,
        }
    }

    fn prior(&self, n: usize) -> CliResult<Option<Vec<f64>>> {
        match (&self.prior_is_file, &self.prior_file) {
            (false, _) => Ok(None),
            (true, Some(path)) => {
                let prior = parse_prior_json(&read(path)?)?;
                if prior.len() != n {
                    return Err(DomainError(format!(
                        "prior length {} does not match basis size {n}",
                        prior.len()
                    )));
                }
                Ok(Some(prior))
            }
            (true, None) => unreachable!("validated in resolve_config"),
        }
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| DomainError(format!("{}: {e}", path.display())))
}

fn write(path: &Path, content: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| DomainError(format!("{}: {e}", parent.display())))?;
        }
    }
    fs::write(path, content).map_err(|e| DomainError(format!("{}: {e}", path.display())))
}

fn load_seed(path: &Path) -> CliResult<SeedGraph> {
    SeedGraph::from_json(&read(path)?)
        .map_err(|e| DomainError(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(DomainError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Unfold {
            seed,
            alpha,
            dot,
            json,
            common,
        } => {
            let cfg = resolve_config(&common)?;
            let stage = unfold(&load_seed(&seed)?, alpha, &cfg.limits)?;
            if let Some(path) = dot {
                write(&path, &stage.to_dot())?;
            }
            if let Some(path) = json {
                write(&path, &stage.to_json())?;
            }
            Ok(())
        }
        Command::Bisim {
            seed,
            alpha,
            report,
            dot,
            common,
        } => {
            let cfg = resolve_config(&common)?;
            let stage = unfold(&load_seed(&seed)?, alpha, &cfg.limits)?;
            let sigma = build_sigma(&stage);
            let verdict = exotime::bisim::verify_bijective_bisimulation(
                stage.kripke(),
                sigma.plus(),
                sigma.pairing(),
            )?;
            if let Some(path) = report {
                write(&path, &verdict.to_json())?;
            }
            if let Some(path) = dot {
                write(&path, &sigma.to_dot())?;
            }
            Ok(())
        }
        Command::Lattice {
            space,
            vectors,
            out,
            cap,
            common,
        } => {
            let cfg = resolve_config(&common)?;
            let space = match (space, vectors) {
                (Some(path), None) => ProximitySpace::from_json(&read(&path)?)?,
                (None, Some(path)) => {
                    let vectors: Vec<Vec<f64>> = exotime::universe::parse_vectors_json(
                        &read(&path)?,
                    )?;
                    proximity_from_inner_products(&vectors, cfg.eps_zero)?
                }
                _ => {
                    return Err(DomainError(
                        "exactly one of --space or --vectors is required".to_string(),
                    ))
                }
            };
            write(&out, &lattice_json(&space, cap)?)
        }
        Command::Ds {
            model,
            frame,
            report,
        } => {
            let m = KripkeModel::from_json(&read(&model)?)?;
            let frame: Vec<String> = frame
                .split(',')
                .filter(|t| !t.is_empty())
                .map(str::to_string)
                .collect();
            if frame.is_empty() {
                return Err(DomainError("frame must name at least one tag".to_string()));
            }
            if frame.len() > 20 {
                return Err(DomainError(format!(
                    "frame of {} tags exceeds the power-set cap of 20",
                    frame.len()
                )));
            }
            write(&report, &ds_csv(&m, &frame)?)
        }
        Command::Stage {
            seed,
            alpha,
            out_dir,
            common,
        } => {
            let cfg = resolve_config(&common)?;
            let states = run_states(&load_seed(&seed)?, alpha, &cfg.run_options())?;
            write_stage_artifacts(&out_dir, &states, alpha, &cfg, true)
        }
        Command::Run {
            seed,
            stages,
            out,
            artifacts,
            common,
        } => {
            let cfg = resolve_config(&common)?;
            let seed = load_seed(&seed)?;
            let states = run_states(&seed, stages, &cfg.run_options())?;
            let trace = universe::RunTrace {
                records: states
                    .iter()
                    .map(universe::StageRecord::from_state)
                    .collect(),
            };
            write(&out, &trace.to_jsonl())?;
            if let Some(dir) = artifacts {
                for alpha in 0..=stages {
                    write_stage_artifacts(
                        &dir.join(format!("stage_{alpha:03}")),
                        &states,
                        alpha,
                        &cfg,
                        false,
                    )?;
                }
            }
            Ok(())
        }
        Command::Spectrum {
            seed,
            alpha,
            csv,
            d2,
            codewords: codewords_path,
            common,
        } => {
            let cfg = resolve_config(&common)?;
            let stage = unfold(&load_seed(&seed)?, alpha, &cfg.limits)?;
            let words = codewords(stage.tree());
            let matrix = distance_matrix_d2(&words);
            let spectrum = eigh(
                &matrix,
                &EighOptions {
                    eps_degenerate_rel: cfg.eps_degenerate,
                    max_sweeps: 100,
                },
            )?;
            write(&csv, &spectrum.to_csv())?;
            if let Some(path) = d2 {
                write(&path, &matrix.to_csv())?;
            }
            if let Some(path) = codewords_path {
                write(&path, &codewords_text(&words))?;
            }
            Ok(())
        }
    }
}

fn write_stage_artifacts(
    dir: &Path,
    states: &[StageState],
    alpha: usize,
    cfg: &Config,
    full: bool,
) -> CliResult<()> {
    let state = &states[alpha];
    fs::create_dir_all(dir).map_err(|e| DomainError(format!("{}: {e}", dir.display())))?;
    write(&dir.join("tree.dot"), &state.stage.to_dot())?;
    write(&dir.join("spectrum.csv"), &state.basis.spectrum().to_csv())?;
    write(&dir.join("omega.json"), &omega_json(state))?;
    write(&dir.join("diagnostics.json"), &diagnostics_json(state))?;
    if full {
        let words = codewords(state.stage.tree());
        write(&dir.join("tree.json"), &state.stage.to_json())?;
        write(&dir.join("d2.csv"), &distance_matrix_d2(&words).to_csv())?;
        write(&dir.join("codewords.txt"), &codewords_text(&words))?;
        if words.len() >= 2 {
            let code = code_params(&words)?;
            write(
                &dir.join("code.json"),
                &format!(
                    "{{\"length\":{},\"count\":{},\"d_min\":{},\"e\":{}}}\n",
                    code.length, code.count, code.d_min, code.e
                ),
            )?;
        }
        write(
            &dir.join("predict.json"),
            &universe::predict(state)?.to_json(),
        )?;
        if alpha >= 1 {
            let prior = cfg.prior(states[alpha - 1].dim())?;
            let report = universe::explain(&states[alpha - 1], state, prior.as_deref())?;
            write(&dir.join("explain.json"), &report.to_json())?;
        }
    }
    Ok(())
}

fn lattice_json(space: &ProximitySpace, cap: usize) -> CliResult<String> {
    let mut sets = space.all_quantum_sets(cap)?;
    sets.sort_by_key(|q| (q.members.len(), space.names(&q.members)));
    let mut out = String::from("{\"carrier\":[");
    for (i, id) in space.carrier().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&exotime::emit::json_string(id));
    }
    out.push_str("],\"quantum_sets\":[");
    for (i, q) in sets.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let names = |set: &BTreeSet<usize>| {
            space
                .names(set)
                .iter()
                .map(|s| exotime::emit::json_string(s))
                .collect::<Vec<_>>()
                .join(",")
        };
        let _ = write!(
            out,
            "{{\"members\":[{}],\"witness\":[{}]}}",
            names(&q.members),
            names(&q.witness)
        );
    }
    out.push_str("]}\n");
    Ok(out)
}

fn ds_csv(model: &KripkeModel, frame: &[String]) -> CliResult<String> {
    let bpa = bpa_from_model(model, frame)?;
    let mut out = String::from("set,mass,bel,pl\n");
    let n = frame.len();
    let mut subsets: Vec<BTreeSet<String>> = (0u32..(1 << n))
        .map(|bits| {
            (0..n)
                .filter(|b| bits >> b & 1 == 1)
                .map(|b| frame[b].clone())
                .collect()
        })
        .collect();
    subsets.sort_by_key(|s| (s.len(), s.iter().cloned().collect::<Vec<_>>()));
    for set in subsets {
        let label = format!(
            "\"{{{}}}\"",
            set.iter().cloned().collect::<Vec<_>>().join(",")
        );
        let _ = writeln!(
            out,
            "{label},{},{},{}",
            float17(bpa.mass(&set)),
            float17(bpa.bel(&set)?),
            float17(bpa.pl(&set)?)
        );
    }
    Ok(out)
}
