//! Scenario runner for the observability game.
//!
//! Exit codes: 0 success, 2 scenario/flag parse error, 3 domain error
//! (non-rational spectrum, missing relative degree, bad shapes).

use clap::{Args, Parser, Subcommand};
use obsgame::attack::{min_unobservable_dim, minimize_unobservable};
use obsgame::game::{classify_mode, run_game, stackelberg_compare, Depth, GameTrace, Mode};
use obsgame::normalform::to_normal_form;
use obsgame::ratmat::Matrix;
use obsgame::scenario::Scenario;
use obsgame::subspace::{friend, is_friend, unobservable_dim, vstar};
use rayon::prelude::*;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_PARSE: u8 = 2;
const EXIT_DOMAIN: u8 = 3;

#[derive(Parser)]
#[command(
    name = "obsgame",
    version,
    about = "observability attack/defense game toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunFlags {
    /// Scenario file (JSON).
    scenario: PathBuf,
    /// Override the scenario's epoch count.
    #[arg(long)]
    horizon: Option<usize>,
    /// Override the scenario's lookahead: one-step or two-step.
    #[arg(long)]
    depth: Option<String>,
    /// Override the scenario's random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the scenario's search budget.
    #[arg(long)]
    budget: Option<usize>,
    /// Extra strategy override, as `EPOCH=FILE`; repeatable.
    #[arg(long = "override", value_name = "EPOCH=FILE")]
    overrides: Vec<String>,
    /// Write the primary output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce (a0, b1, b2, c0) to normal form and report its shape.
    Reduce { scenario: PathBuf },
    /// Maximal (A,B)-invariant subspace inside Ker C.
    Vstar { scenario: PathBuf },
    /// Synthesize the sensor matrix minimizing the unobservable subspace.
    Attack(RunFlags),
    /// Synthesize the friend feedback maximizing the unobservable subspace.
    Defend { scenario: PathBuf },
    /// Run the epoch game and emit a CSV trace plus a mode report.
    Game(RunFlags),
    /// Compare two-step best responses with the leader-follower values.
    Stackelberg(RunFlags),
    /// Run every scenario in a directory and aggregate mode statistics.
    Sweep(RunFlags),
}

enum CmdError {
    Parse(String),
    Domain(String),
    Io(String),
}

impl From<obsgame::Error> for CmdError {
    fn from(e: obsgame::Error) -> Self {
        CmdError::Domain(e.to_string())
    }
}

impl From<obsgame::scenario::ParseError> for CmdError {
    fn from(e: obsgame::scenario::ParseError) -> Self {
        CmdError::Parse(e.to_string())
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Reduce { scenario } => cmd_reduce(&scenario),
        Command::Vstar { scenario } => cmd_vstar(&scenario),
        Command::Attack(flags) => cmd_attack(&flags),
        Command::Defend { scenario } => cmd_defend(&scenario),
        Command::Game(flags) => cmd_game(&flags),
        Command::Stackelberg(flags) => cmd_stackelberg(&flags),
        Command::Sweep(flags) => cmd_sweep(&flags),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CmdError::Parse(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_PARSE)
        }
        Err(CmdError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DOMAIN)
        }
        Err(CmdError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn load_scenario(path: &Path) -> Result<Scenario, CmdError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CmdError::Parse(format!("{}: {e}", path.display())))?;
    Ok(Scenario::from_json(&text)?)
}

fn apply_flags(scenario: &mut Scenario, flags: &RunFlags) -> Result<(), CmdError> {
    if let Some(h) = flags.horizon {
        scenario.horizon = h;
    }
    if let Some(d) = &flags.depth {
        scenario.depth = match d.as_str() {
            "one-step" => Depth::OneStep,
            "two-step" => Depth::TwoStep,
            other => return Err(CmdError::Parse(format!("unknown depth {other:?}"))),
        };
    }
    if let Some(s) = flags.seed {
        scenario.seed = s;
    }
    if let Some(b) = flags.budget {
        scenario.budget = b;
    }
    for spec in &flags.overrides {
        let (epoch, file) = spec
            .split_once('=')
            .ok_or_else(|| CmdError::Parse(format!("override must be EPOCH=FILE, got {spec:?}")))?;
        let epoch: usize = epoch
            .parse()
            .map_err(|_| CmdError::Parse(format!("bad override epoch {epoch:?}")))?;
        let text =
            std::fs::read_to_string(file).map_err(|e| CmdError::Parse(format!("{file}: {e}")))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CmdError::Parse(e.to_string()))?;
        let wrapped = serde_json::json!({ "name": "override", "a": value });
        let parsed = Scenario::from_json(&wrapped.to_string())?;
        let matrix = parsed
            .a
            .ok_or_else(|| CmdError::Parse("override file is empty".into()))?;
        scenario.overrides.retain(|(e, _)| *e != epoch);
        scenario.overrides.push((epoch, matrix));
    }
    Ok(())
}

fn need(m: &Option<Matrix>, what: &str) -> Result<Matrix, CmdError> {
    m.clone()
        .ok_or_else(|| CmdError::Parse(format!("scenario needs matrix {what}")))
}

fn cmd_reduce(path: &Path) -> Result<(), CmdError> {
    let s = load_scenario(path)?;
    let a0 = need(&s.a0, "a0")?;
    let b1 = need(&s.b1, "b1")?;
    let c0 = need(&s.c0, "c0")?;
    let b2 = match &s.b2 {
        Some(b2) => b2.clone(),
        None => Matrix::zeros(a0.rows(), 1),
    };
    let model = to_normal_form(&a0, &b1, &b2, &c0)?;
    println!("scenario: {}", s.name);
    println!("relative degree: {:?}", model.r);
    println!("chain total s: {}", model.s);
    println!(
        "blocks: z {}x{}, xi->z {}x{}, chain-end z {}x{}, chain-end xi {}x{}, decoupling {}x{}",
        model.z_dynamics.rows(),
        model.z_dynamics.cols(),
        model.xi_to_z.rows(),
        model.xi_to_z.cols(),
        model.z_to_chain_ends.rows(),
        model.z_to_chain_ends.cols(),
        model.xi_to_chain_ends.rows(),
        model.xi_to_chain_ends.cols(),
        model.decoupling.rows(),
        model.decoupling.cols(),
    );
    if model.hypothesis_holds {
        println!("second input confined to internal dynamics: yes");
    } else {
        println!("second input confined to internal dynamics: NO (it reaches chain coordinates)");
    }
    Ok(())
}

fn cmd_vstar(path: &Path) -> Result<(), CmdError> {
    let s = load_scenario(path)?;
    let a = need(&s.a, "a")?;
    let b = need(&s.b, "b")?;
    let c = need(&s.c, "c")?;
    let r = vstar(&a, &b, &c);
    println!("scenario: {}", s.name);
    println!("dim V* = {}", r.vstar.dim());
    println!("iterations: {}", r.iterations);
    println!("iterate dims: {:?}", r.iterate_dims);
    println!("basis: {}", r.vstar.basis());
    Ok(())
}

fn cmd_attack(flags: &RunFlags) -> Result<(), CmdError> {
    let mut s = load_scenario(&flags.scenario)?;
    apply_flags(&mut s, flags)?;
    let a = need(&s.a, "a")?;
    let b = need(&s.b, "b")?;
    let m =
        s.m.ok_or_else(|| CmdError::Parse("scenario needs sensor count m".into()))?;
    let f = match &s.f0 {
        Some(f) => f.clone(),
        None => Matrix::zeros(b.cols(), a.rows()),
    };
    let c = minimize_unobservable(&a, &b, &f, m)?;
    let closed = &a + &(&b * &f);
    println!("scenario: {}", s.name);
    println!("sensor C = {c}");
    println!("phi = {}", unobservable_dim(&c, &closed));
    println!("optimum = {}", min_unobservable_dim(&closed, m)?);
    Ok(())
}

fn cmd_defend(path: &Path) -> Result<(), CmdError> {
    let s = load_scenario(path)?;
    let a = need(&s.a, "a")?;
    let b = need(&s.b, "b")?;
    let c = need(&s.c, "c")?;
    let r = vstar(&a, &b, &c);
    let f = friend(&a, &b, &r.vstar)?;
    let closed = &a + &(&b * &f);
    println!("scenario: {}", s.name);
    println!("dim V* = {}", r.vstar.dim());
    println!("friend F = {f}");
    println!("is_friend = {}", is_friend(&a, &b, &f, &r.vstar));
    println!("phi = {}", unobservable_dim(&c, &closed));
    Ok(())
}

fn trace_csv(trace: &GameTrace) -> String {
    let mut out = String::from("epoch,actor,phi,dim_vstar,max_geo_mult\n");
    for step in &trace.steps {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            step.epoch,
            step.actor.label(),
            step.phi,
            step.dim_vstar,
            step.max_geo_mult
        ));
    }
    out
}

fn mode_summary(name: &str, report: &obsgame::game::ModeReport) -> String {
    let mode = match report.mode {
        Mode::Lock => "lock",
        Mode::Oscillation => "oscillation",
        Mode::Inconclusive => "inconclusive",
    };
    let mut s = format!(
        "scenario: {name}\nmode: {mode}\nonset epoch: {}\namplitude: {}\n",
        report.onset_epoch, report.amplitude
    );
    match report.loop_period {
        Some(p) => s.push_str(&format!("loop period: {p}\n")),
        None => s.push_str("loop period: none\n"),
    }
    s.push_str(&format!(
        "lock certificate at first epoch: {}\nzero-vstar certificate: {}\nresponse-set collapse: {}\n",
        report.lock_certificate, report.zero_vstar_certificate, report.response_sets_collapse
    ));
    s
}

fn cmd_game(flags: &RunFlags) -> Result<(), CmdError> {
    let mut s = load_scenario(&flags.scenario)?;
    apply_flags(&mut s, flags)?;
    let cfg = s.game_config()?;
    let trace = run_game(&cfg).map_err(|e| CmdError::Domain(e.to_string()))?;
    let report = classify_mode(&trace, &cfg.a, &cfg.b, cfg.m);
    let csv = trace_csv(&trace);
    let summary = mode_summary(&s.name, &report);
    match &flags.out {
        Some(path) => {
            std::fs::write(path, csv)?;
            print!("{summary}");
        }
        None => {
            print!("{csv}");
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn cmd_stackelberg(flags: &RunFlags) -> Result<(), CmdError> {
    let mut s = load_scenario(&flags.scenario)?;
    apply_flags(&mut s, flags)?;
    let a = need(&s.a, "a")?;
    let b = need(&s.b, "b")?;
    let m =
        s.m.ok_or_else(|| CmdError::Parse("scenario needs sensor count m".into()))?;
    let f0 = match &s.f0 {
        Some(f) => f.clone(),
        None => Matrix::zeros(b.cols(), a.rows()),
    };
    let r = stackelberg_compare(&a, &b, m, &f0, s.budget, s.seed)?;
    println!("scenario: {}", s.name);
    println!("leader-attacker value (unrestricted): {}", r.br2x_value);
    println!("two-step attacker value (one-step family): {}", r.br2_value);
    println!("one-step attacker value: {}", r.br1_value);
    println!("value ordering holds: {}", r.value_ordering_ok);
    println!(
        "follower-defender set matches friends: {}",
        r.follower_defender_equiv
    );
    println!(
        "follower-attacker set matches one-step: {}",
        r.follower_attacker_equiv
    );
    println!("samples per check: {}", r.samples);
    Ok(())
}

fn cmd_sweep(flags: &RunFlags) -> Result<(), CmdError> {
    let dir = &flags.scenario;
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().map(|x| x == "json").unwrap_or(false))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CmdError::Parse(format!(
            "no .json scenarios in {}",
            dir.display()
        )));
    }
    enum SweepOutcome {
        Ran(Mode, Vec<usize>),
        Skipped,
        Failed(String),
    }
    let results: Vec<(String, SweepOutcome)> = paths
        .par_iter()
        .map(|path| {
            let name = path
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .to_string();
            let outcome = (|| {
                let mut s = match load_scenario(path) {
                    Ok(s) => s,
                    Err(_) => return SweepOutcome::Failed("parse error".into()),
                };
                if s.a.is_none() || s.b.is_none() || s.m.is_none() {
                    return SweepOutcome::Skipped;
                }
                if let Some(h) = flags.horizon {
                    s.horizon = h;
                }
                if let Some(seed) = flags.seed {
                    s.seed = seed;
                }
                let cfg = match s.game_config() {
                    Ok(c) => c,
                    Err(e) => return SweepOutcome::Failed(e.to_string()),
                };
                match run_game(&cfg) {
                    Ok(trace) => {
                        let report = classify_mode(&trace, &cfg.a, &cfg.b, cfg.m);
                        SweepOutcome::Ran(report.mode, trace.phis())
                    }
                    Err(e) => SweepOutcome::Failed(e.to_string()),
                }
            })();
            (name, outcome)
        })
        .collect();
    let mut locks = 0usize;
    let mut oscillations = 0usize;
    let mut inconclusive = 0usize;
    let mut skipped = 0usize;
    let mut failed = 0usize;
    for (name, outcome) in &results {
        match outcome {
            SweepOutcome::Ran(mode, phis) => {
                let label = match mode {
                    Mode::Lock => {
                        locks += 1;
                        "lock"
                    }
                    Mode::Oscillation => {
                        oscillations += 1;
                        "oscillation"
                    }
                    Mode::Inconclusive => {
                        inconclusive += 1;
                        "inconclusive"
                    }
                };
                println!("{name}: {label} phi={phis:?}");
            }
            SweepOutcome::Skipped => {
                skipped += 1;
                println!("{name}: skipped (no game system)");
            }
            SweepOutcome::Failed(msg) => {
                failed += 1;
                println!("{name}: error ({msg})");
            }
        }
    }
    println!(
        "total {} | lock {locks} | oscillation {oscillations} | inconclusive {inconclusive} | skipped {skipped} | failed {failed}",
        results.len()
    );
    Ok(())
}
