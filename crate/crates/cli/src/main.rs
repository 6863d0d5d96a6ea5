//! `swreach`: command-line front end over the JSON system format.
//!
//! Exit codes: 0 for a definitive answer, 2 when a depth cap left the
//! question open, 1 for usage, input or precondition errors.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use serde_json::json;
use swreach::bounds::{run_bound_experiment, BoundExperimentConfig};
use swreach::extremal::{canonical_weights, verify_weight_certificate, FamilyTag};
use swreach::reduction::reduce_rank_system_seeded;
use swreach::search::{build_automaton_with_limit, invertible_length_bound, SearchOptions, DEFAULT_STATE_LIMIT};
use swreach::system::{feedback_regularize, matrix_to_json};
use swreach::{
    export_dot, load_system, reachable_set, save_system, search, v_chain, validate, SearchStatus, SwitchedSystem,
};

#[derive(Parser)]
#[command(
    name = "swreach",
    version,
    about = "Reachability and shortest controllable switching sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mode validity, the V chain and the controllability verdict.
    Analyze {
        /// System JSON file, or `-` for stdin.
        system: PathBuf,
    },
    /// Shortest controllable sequences by breadth-first search.
    Shortest {
        system: PathBuf,
        /// Maximum sequence length; required when some A_i is singular.
        #[arg(long)]
        depth_cap: Option<usize>,
        /// Maximum number of witnesses to print.
        #[arg(long, default_value_t = search::DEFAULT_WITNESS_CAP)]
        witness_cap: usize,
        /// Replace singular A_i by A_i + B_i K_i first (needs Im A_i + Im B_i = R^n).
        #[arg(long)]
        regularize: bool,
        #[arg(long, default_value_t = DEFAULT_STATE_LIMIT)]
        state_limit: usize,
    },
    /// Explore the subspace automaton and optionally write it as DOT.
    Automaton {
        system: PathBuf,
        #[arg(long)]
        depth_cap: Option<usize>,
        /// Output path for the DOT graph (`-` for stdout).
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_STATE_LIMIT)]
        state_limit: usize,
    },
    /// Emit a system from one of the extremal families.
    Generate {
        /// family-a, family-b, family-rank, degenerate or degenerate-rank.
        family: FamilyTag,
        n: usize,
        /// Input rank, or `-` for families without one.
        r: String,
        m: usize,
        /// Check the family's weight certificate and print the certified lower bound.
        #[arg(long)]
        weights: bool,
        /// Confirm the closed-form minimal length by breadth-first search.
        #[arg(long)]
        verify: bool,
        /// Write the system here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized bound experiments.
    Bounds {
        /// Experiment config JSON; the default grid is used when omitted.
        config: Option<PathBuf>,
        /// Write the full report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Reduce an equal-image rank-r system to dimension n - r.
    Reduce {
        system: PathBuf,
        /// Expected input rank; the command fails if the system's differs.
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit status for a command that completed.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Verdict {
    Definitive,
    Inconclusive,
}

fn read_input(path: &Path) -> anyhow::Result<Vec<u8>> {
    if path == Path::new("-") {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf).context("reading stdin")?;
        Ok(buf)
    } else {
        fs::read(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn read_system(path: &Path) -> anyhow::Result<SwitchedSystem> {
    let bytes = read_input(path)?;
    load_system(&bytes).with_context(|| format!("loading system from {}", path.display()))
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match path {
        Some(p) if p != Path::new("-") => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        _ => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn analyze(path: &Path) -> anyhow::Result<Verdict> {
    let sys = read_system(path)?;
    let report = validate(&sys);
    println!("n = {}, m = {}", sys.n(), sys.m());
    for v in &report.modes {
        println!(
            "mode {}: A {}, Im A + Im B {}, rank B = {}",
            v.mode,
            if v.a_invertible { "invertible" } else { "singular" },
            if v.regular { "= R^n" } else { "!= R^n" },
            v.rank_b
        );
    }
    let chain = v_chain(&sys);
    if chain.all_b_zero {
        println!("NOT CONTROLLABLE (V_1 = {{0}})");
        return Ok(Verdict::Definitive);
    }
    let dims: Vec<String> = chain.dims().iter().map(|d| d.to_string()).collect();
    println!("V: {}, ℓ={}", dims.join(" → "), chain.ell);
    let reach = match reachable_set(&sys) {
        Ok(r) => r,
        Err(e) => bail!("{e}"),
    };
    if !report.all_a_invertible {
        println!("(singular A_i regularized by feedback; reachable spaces unchanged)");
    }
    println!("reachable set: dim {} = {}", reach.dim(), reach);
    println!(
        "{}",
        if reach.is_full() {
            "CONTROLLABLE"
        } else {
            "NOT CONTROLLABLE"
        }
    );
    Ok(Verdict::Definitive)
}

fn shortest(
    path: &Path,
    depth_cap: Option<usize>,
    witness_cap: usize,
    regularize: bool,
    state_limit: usize,
) -> anyhow::Result<Verdict> {
    let mut sys = read_system(path)?;
    if regularize && !sys.all_a_invertible() {
        sys = feedback_regularize(&sys)?;
        println!("regularized: every A_i replaced by A_i + B_i K_i");
    }
    let opts = SearchOptions {
        depth_cap,
        witness_cap,
        state_limit,
    };
    let res = search::shortest_controllable_sequences_with(&sys, &opts)?;
    match res.status {
        SearchStatus::Controllable => {
            let len = res.shortest_length.expect("controllable result has a length");
            println!("status: controllable");
            println!("minimal length: {len}");
            let words: Vec<String> = res.witnesses.iter().map(|w| w.render(sys.m())).collect();
            println!("length {len}: {}", words.join(" "));
            if res.witnesses_truncated {
                println!(
                    "(more than {} witnesses; raise --witness-cap to list them)",
                    words.len()
                );
            }
            Ok(Verdict::Definitive)
        }
        SearchStatus::ProvablyNotControllable => {
            println!("status: not controllable");
            Ok(Verdict::Definitive)
        }
        SearchStatus::NotControllableWithinDepth => {
            println!("status: inconclusive up to depth {}", res.depth_cap_used);
            Ok(Verdict::Inconclusive)
        }
    }
}

fn automaton(path: &Path, depth_cap: Option<usize>, dot: Option<&Path>, state_limit: usize) -> anyhow::Result<Verdict> {
    let sys = read_system(path)?;
    let sound = sys.all_a_invertible().then(|| invertible_length_bound(sys.n()));
    let cap = match (depth_cap, sound) {
        (Some(c), _) => c,
        (None, Some(b)) => b,
        (None, None) => bail!("some A_i is singular: no length bound is known, so --depth-cap is required"),
    };
    let auto = build_automaton_with_limit(&sys, cap, state_limit)?;
    if let Some(p) = dot {
        write_output(Some(p), export_dot(&auto).as_bytes())?;
    }
    let summary = auto.summary();
    if dot == Some(Path::new("-")) {
        eprintln!("{summary}");
    } else {
        println!("{summary}");
    }
    let settled = auto.shortest_path_length().is_some() || auto.is_closed() || sound.is_some_and(|b| cap >= b);
    Ok(if settled {
        Verdict::Definitive
    } else {
        Verdict::Inconclusive
    })
}

fn parse_rank(family: FamilyTag, r: &str) -> anyhow::Result<Option<usize>> {
    if r == "-" || r == "—" {
        if family.uses_rank() {
            bail!("family {family} needs a rank r ≥ 1");
        }
        return Ok(None);
    }
    let value: usize = r
        .parse()
        .with_context(|| format!("rank {r:?} is not a nonnegative integer or `-`"))?;
    if !family.uses_rank() {
        bail!("family {family} takes no rank; pass `-`");
    }
    Ok(Some(value))
}

fn generate(
    family: FamilyTag,
    n: usize,
    r: &str,
    m: usize,
    weights: bool,
    verify: bool,
    out: Option<&Path>,
) -> anyhow::Result<Verdict> {
    let r = parse_rank(family, r)?;
    let sys = family.generate(n, r, m)?;
    let expected = family.minimal_length(n, r, m)?;
    write_output(out, &save_system(&sys))?;
    if weights {
        let w = canonical_weights(family, n, r, m)?;
        let report = verify_weight_certificate(&sys, &w)?;
        let listed: Vec<String> = w.0.iter().map(|x| x.to_string()).collect();
        eprintln!("weights: [{}]", listed.join(", "));
        if !report.holds {
            let hint = if matches!(family, FamilyTag::Degenerate | FamilyTag::DegenerateRank) {
                "; the degenerate families are not certified by the one-step weight check, use --verify"
            } else {
                ""
            };
            bail!(
                "weight certificate fails on {} of {} (subspace, mode) pairs{hint}",
                report.violations.len(),
                report.pairs_checked
            );
        }
        eprintln!("certified lower bound {}", report.lower_bound);
    }
    if verify {
        let opts = SearchOptions {
            depth_cap: Some(expected),
            witness_cap: 1,
            state_limit: DEFAULT_STATE_LIMIT,
        };
        let res = search::shortest_controllable_sequences_with(&sys, &opts)?;
        match res.shortest_length {
            Some(len) if len == expected => eprintln!("BFS confirms minimal length {len}"),
            other => bail!("BFS found {other:?}, closed form gives {expected}"),
        }
    }
    Ok(Verdict::Definitive)
}

fn bounds(
    config: Option<&Path>,
    json: Option<&Path>,
    seed: Option<u64>,
    samples: Option<usize>,
) -> anyhow::Result<Verdict> {
    let mut cfg: BoundExperimentConfig = match config {
        Some(p) => serde_json::from_slice(&read_input(p)?).with_context(|| format!("parsing {}", p.display()))?,
        None => BoundExperimentConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(s) = samples {
        cfg.samples = s;
    }
    let report = run_bound_experiment(&cfg)?;
    print!("{}", report.to_table());
    if let Some(p) = json {
        write_output(Some(p), report.to_json().as_bytes())?;
    }
    if report.total_violations > 0 {
        bail!("{} bound violations", report.total_violations);
    }
    Ok(Verdict::Definitive)
}

fn reduce(path: &Path, rank: Option<usize>, seed: u64, out: Option<&Path>) -> anyhow::Result<Verdict> {
    let sys = read_system(path)?;
    let red = reduce_rank_system_seeded(&sys, seed)?;
    if let Some(r) = rank {
        if r != red.r {
            bail!("system has input rank {}, not {r}", red.r);
        }
    }
    let reduced: serde_json::Value = serde_json::from_slice(&save_system(&red.reduced))?;
    let doc = json!({
        "r": red.r,
        "reduced": reduced,
        "basis_change": matrix_to_json(&red.basis_change),
        "P": matrix_to_json(red.transform.p()),
        "Q": matrix_to_json(&red.transform.q()),
        "transform_origin": format!("{:?}", red.transform.origin()).to_lowercase(),
        "transformed_A": red.transformed.iter().map(matrix_to_json).collect::<Vec<_>>(),
    });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    write_output(out, text.as_bytes())?;
    Ok(Verdict::Definitive)
}

fn run(cli: Cli) -> anyhow::Result<Verdict> {
    match cli.command {
        Command::Analyze { system } => analyze(&system),
        Command::Shortest {
            system,
            depth_cap,
            witness_cap,
            regularize,
            state_limit,
        } => shortest(&system, depth_cap, witness_cap, regularize, state_limit),
        Command::Automaton {
            system,
            depth_cap,
            dot,
            state_limit,
        } => automaton(&system, depth_cap, dot.as_deref(), state_limit),
        Command::Generate {
            family,
            n,
            r,
            m,
            weights,
            verify,
            out,
        } => generate(family, n, &r, m, weights, verify, out.as_deref()),
        Command::Bounds {
            config,
            json,
            seed,
            samples,
        } => bounds(config.as_deref(), json.as_deref(), seed, samples),
        Command::Reduce {
            system,
            rank,
            seed,
            out,
        } => reduce(&system, rank, seed, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(Verdict::Definitive) => ExitCode::SUCCESS,
        Ok(Verdict::Inconclusive) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
