//! `srn` — classify reaction-network state spaces, compute exact threshold
//! parameters for one-dimensional networks, and cross-check with
//! brute-force and simulation oracles.
//!
//! Every command prints a single JSON report (schema in
//! `schema/report.schema.json`). Exit codes: 0 ok, 1 verdict limited by
//! `Unknown` answers, 2 input error, 3 internal inconsistency.

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use srn_core::model::{validate, ReactionNetwork, State};
use srn_core::onedim;
use srn_core::parser::{parse_with_params, serialize, ParseError, ParseErrorKind};
use srn_core::rational::{format_rat, parse_rat, Rat};
use srn_core::reach::{self, Window};
use srn_core::sim;
use srn_core::structure::{self, ClassifyOptions, CoreOptions};
use srn_core::TriState;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "srn", version, about = "Stochastic reaction network analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct NetworkArgs {
    /// Reaction network file.
    file: PathBuf,
    /// Bind a symbolic rate parameter, e.g. `--kappa k=1/2` (repeatable).
    #[arg(long = "kappa", value_name = "NAME=VALUE")]
    kappa: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a network file and echo its canonical form.
    Parse(NetworkArgs),
    /// Structural classification: trapping sets, returning jump vectors,
    /// essential/extinct verdicts.
    Classify {
        #[command(flatten)]
        net: NetworkArgs,
        /// Node-expansion budget per reachability query
        /// (default from SRN_BUDGET or 1000000).
        #[arg(long)]
        budget: Option<u64>,
        /// Per-coordinate bound of the extinction sampling window.
        #[arg(long, default_value_t = 4)]
        window: u64,
    },
    /// Minimal core networks.
    Core {
        #[command(flatten)]
        net: NetworkArgs,
        #[arg(long)]
        budget: Option<u64>,
        /// Maximum reaction count for exhaustive subset search.
        #[arg(long, default_value_t = 16)]
        cap: usize,
    },
    /// One-dimensional threshold analysis on the compatibility class of c.
    Analyze1d {
        #[command(flatten)]
        net: NetworkArgs,
        /// Class representative, comma-separated counts (default all zero).
        #[arg(long, value_name = "COUNTS")]
        c: Option<String>,
        /// Assert the network is endotactic (otherwise inferred only from
        /// weak reversibility).
        #[arg(long)]
        endotactic: bool,
    },
    /// Stochastic simulation.
    Simulate {
        #[command(flatten)]
        net: NetworkArgs,
        #[command(subcommand)]
        what: SimCommand,
    },
    /// Brute-force windowed decomposition (with per-class-line detail).
    Oracle {
        #[command(flatten)]
        net: NetworkArgs,
        /// Per-coordinate window bound.
        #[arg(long, default_value_t = 12)]
        window: u64,
        /// Restrict reporting to the compatibility line through this state.
        #[arg(long, value_name = "COUNTS")]
        c: Option<String>,
    },
}

#[derive(Args, Clone)]
struct SimArgs {
    /// Initial state, comma-separated counts (default all zero).
    #[arg(long, value_name = "COUNTS")]
    x0: Option<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Event budget.
    #[arg(long, default_value_t = 1_000_000)]
    events: u64,
    /// Simulated-time horizon.
    #[arg(long, default_value_t = 100.0)]
    time: f64,
    /// State-norm cap for the explosion heuristic.
    #[arg(long, default_value_t = 100_000_000)]
    norm: u64,
    /// Write bulk CSV output here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand, Clone)]
enum SimCommand {
    /// One trajectory; CSV rows are `time,species...`.
    Traj(SimArgs),
    /// Time-weighted stationary estimate of the first coordinate.
    Stationary {
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, default_value_t = 1000.0)]
        horizon: f64,
        /// Burn-in time (default: a tenth of the horizon).
        #[arg(long)]
        burn_in: Option<f64>,
    },
    /// Quasi-stationary estimate by the particle scheme.
    Qsd {
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, default_value_t = 500)]
        particles: usize,
        #[arg(long, default_value_t = 100.0)]
        horizon: f64,
    },
    /// Stationary estimate followed by an empirical tail fit.
    Tail {
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, default_value_t = 10000.0)]
        horizon: f64,
        #[arg(long)]
        burn_in: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            println!("{}", serde_json::to_string_pretty(&err.report).unwrap());
            ExitCode::from(err.code)
        }
    }
}

struct CliError {
    report: Value,
    code: u8,
}

fn input_error(command: &str, message: String, span: Option<Value>) -> CliError {
    CliError {
        report: json!({
            "schema_version": SCHEMA_VERSION,
            "tool": {"name": "srn", "version": env!("CARGO_PKG_VERSION")},
            "command": command,
            "error": {"message": message, "span": span},
        }),
        code: 2,
    }
}

fn parse_error_to_cli(command: &str, err: ParseError) -> CliError {
    let kind = match err.kind {
        ParseErrorKind::Syntax => "syntax",
        ParseErrorKind::UnknownSpeciesPolicy => "unknown-species-policy",
        ParseErrorKind::BadRate => "bad-rate",
        ParseErrorKind::SelfLoop => "self-loop",
    };
    input_error(
        command,
        format!("{err} [{kind}]"),
        Some(json!({
            "line": err.span.line,
            "column": err.span.column,
            "length": err.span.length,
            "kind": kind,
        })),
    )
}

fn load_network(command: &str, args: &NetworkArgs) -> Result<ReactionNetwork, CliError> {
    let text = std::fs::read_to_string(&args.file).map_err(|e| {
        input_error(command, format!("cannot read {}: {e}", args.file.display()), None)
    })?;
    let mut params: BTreeMap<String, Rat> = BTreeMap::new();
    for binding in &args.kappa {
        let Some((name, value)) = binding.split_once('=') else {
            return Err(input_error(
                command,
                format!("--kappa takes NAME=VALUE, got `{binding}`"),
                None,
            ));
        };
        let Some(v) = parse_rat(value) else {
            return Err(input_error(
                command,
                format!("cannot parse rate value `{value}`"),
                None,
            ));
        };
        params.insert(name.trim().to_string(), v);
    }
    let network =
        parse_with_params(&text, &params).map_err(|e| parse_error_to_cli(command, e))?;
    if network.reactions().is_empty() {
        return Err(input_error(command, "no reactions".to_string(), None));
    }
    let report = validate(&network);
    if !report.is_ok() {
        let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(input_error(command, format!("invalid network: {}", msgs.join("; ")), None));
    }
    Ok(network)
}

fn parse_state(command: &str, text: &Option<String>, dim: usize) -> Result<State, CliError> {
    match text {
        None => Ok(State(vec![0; dim])),
        Some(t) => {
            let parts: Result<Vec<u64>, _> =
                t.split(',').map(|p| p.trim().parse::<u64>()).collect();
            match parts {
                Ok(v) if v.len() == dim => Ok(State(v)),
                Ok(v) => Err(input_error(
                    command,
                    format!("state has {} coordinates, network has {dim}", v.len()),
                    None,
                )),
                Err(e) => Err(input_error(command, format!("cannot parse state: {e}"), None)),
            }
        }
    }
}

fn default_budget(explicit: Option<u64>) -> u64 {
    explicit
        .or_else(|| std::env::var("SRN_BUDGET").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(1_000_000)
}

fn network_digest(network: &ReactionNetwork) -> Value {
    json!({
        "species": network.species(),
        "reactions": serialize(network).lines().collect::<Vec<_>>(),
        "jump_vectors": network.jump_vectors(),
    })
}

fn report(command: &str, network: &ReactionNetwork, payload: Value, warnings: &[String]) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "srn", "version": env!("CARGO_PKG_VERSION")},
        "command": command,
        "network": network_digest(network),
        "payload": payload,
        "warnings": warnings,
    })
}

fn emit(value: &Value, warnings: &[String]) -> ExitCode {
    println!("{}", serde_json::to_string_pretty(value).unwrap());
    if warnings.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn tri(t: TriState) -> Value {
    serde_json::to_value(t).unwrap()
}

fn ser<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap()
}

fn rational(r: &Rat) -> Value {
    Value::String(format_rat(r))
}

fn poly_json(p: &srn_core::poly::Poly) -> Value {
    Value::Array(p.coeffs().iter().map(rational).collect())
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Parse(args) => {
            let network = load_network("parse", &args)?;
            let payload = json!({ "canonical": serialize(&network) });
            Ok(emit(&report("parse", &network, payload, &[]), &[]))
        }
        Command::Classify { net, budget, window } => cmd_classify(net, budget, window),
        Command::Core { net, budget, cap } => cmd_core(net, budget, cap),
        Command::Analyze1d { net, c, endotactic } => cmd_analyze1d(net, c, endotactic),
        Command::Simulate { net, what } => cmd_simulate(net, what),
        Command::Oracle { net, window, c } => cmd_oracle(net, window, c),
    }
}

fn cmd_classify(net: NetworkArgs, budget: Option<u64>, window: u64) -> Result<ExitCode, CliError> {
    let network = load_network("classify", &net)?;
    let options = ClassifyOptions {
        budget: default_budget(budget),
        extinct_sample_bound: window,
        extinct_search_bound: (window * 5).max(window + 8),
        ..ClassifyOptions::default()
    };
    let r = structure::classify(&network, &options);
    let mut warnings = Vec::new();
    for (w, t) in r.jumps.vectors.iter().zip(&r.omega_o) {
        if *t == TriState::Unknown {
            warnings.push(format!("return test for jump {w:?} exhausted its budget"));
        }
    }
    if r.extinct_sufficient == TriState::Unknown {
        warnings.push("extinction condition not decided on the window".to_string());
    }
    let payload = json!({
        "n_set": ser(&r.n_set),
        "t_set": ser(&r.t_set),
        "trap_set_empty": structure::trap_set_empty(&network),
        "trap_set_finite": structure::trap_set_finite(&network),
        "omega_o": r.jumps.vectors.iter().zip(&r.omega_o)
            .map(|(w, t)| json!({"vector": w, "returns": tri(*t)}))
            .collect::<Vec<_>>(),
        "essential": tri(r.essential),
        "extinct_sufficient": tri(r.extinct_sufficient),
        "extinct_detail": ser(&r.extinct_detail),
    });
    Ok(emit(&report("classify", &network, payload, &warnings), &warnings))
}

fn cmd_core(net: NetworkArgs, budget: Option<u64>, cap: usize) -> Result<ExitCode, CliError> {
    let network = load_network("core", &net)?;
    let options = CoreOptions { budget: default_budget(budget), cap, ..CoreOptions::default() };
    let result = structure::minimal_core_networks(&network, &options)
        .map_err(|e| input_error("core", e.to_string(), None))?;
    let reaction_text: Vec<String> = serialize(&network).lines().map(String::from).collect();
    let cores: Vec<Value> = result
        .minimal
        .iter()
        .map(|sub| {
            let ans = structure::is_core_network(&network, sub, &options).expect("valid subset");
            json!({
                "reactions": sub,
                "reaction_texts": sub.iter().map(|&i| reaction_text[i].clone()).collect::<Vec<_>>(),
                "realizations": ans.realizations.iter().map(|(removed, path)| json!({
                    "removed": removed,
                    "path": path,
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    let mut warnings = Vec::new();
    if result.incomplete {
        warnings.push("some subset answers were unknown; enumeration may be incomplete".into());
    }
    let payload = json!({
        "minimal_cores": cores,
        "incomplete": result.incomplete,
    });
    Ok(emit(&report("core", &network, payload, &warnings), &warnings))
}

fn cmd_analyze1d(
    net: NetworkArgs,
    c_text: Option<String>,
    endotactic_flag: bool,
) -> Result<ExitCode, CliError> {
    let network = load_network("analyze1d", &net)?;
    let c = parse_state("analyze1d", &c_text, network.dim())?;
    let profile = onedim::profile(&network)
        .map_err(|e| input_error("analyze1d", e.to_string(), None))?;
    let mut warnings = Vec::new();
    let endotactic = if endotactic_flag {
        Some(true)
    } else if profile.weakly_reversible {
        Some(true)
    } else {
        None
    };
    if let Some(true) = endotactic {
        if let (Some(rp), Some(rm)) = (profile.r_plus, profile.r_minus) {
            if rp >= rm {
                warnings.push(format!(
                    "endotactic hint inconsistent: R+ = {rp} is not below R- = {rm}"
                ));
            }
        }
    }
    let profile_json = json!({
        "direction": profile.direction.vector,
        "step": profile.direction.step(),
        "coord_gcd": profile.direction.coord_gcd,
        "support": profile.direction.support,
        "catalysts": profile.catalysts,
        "r": profile.r_norm,
        "r_plus": profile.r_plus,
        "r_minus": profile.r_minus,
        "h2_ok": profile.h2_ok,
        "h3_ok": profile.h3_ok,
        "h4_ok": profile.h4_ok,
        "weakly_reversible": profile.weakly_reversible,
        "endotactic": endotactic,
    });

    let params = onedim::threshold_params(&network, &profile, &c)
        .map_err(|e| input_error("analyze1d", e.to_string(), None))?;
    let geometry = onedim::class_geometry(&network, &profile, &c)
        .map_err(|e| input_error("analyze1d", e.to_string(), None))?;
    let verdict = onedim::classify_dynamics(&params, geometry.has_pic(), geometry.has_qic());
    let tails = onedim::tail_class(&params);
    let violations = onedim::consistency_check(&network, &profile, &params);

    let states = |v: &[State]| -> Vec<Vec<u64>> { v.iter().map(|s| s.0.clone()).collect() };
    let geometry_json = json!({
        "t_min": geometry.line.t_min,
        "t_max": geometry.line.t_max,
        "neutral": states(&geometry.neutral),
        "trapping": states(&geometry.trapping),
        "escaping": states(&geometry.escaping),
        "class_floor_t": geometry.class_floor_t,
        "c_sup": geometry.c_sup,
        "sigma_plus": geometry.sigma_plus,
        "sigma_minus": geometry.sigma_minus,
        "sigma_plus_count_formula": geometry.sigma_plus_count_formula,
        "progressions": ser(&geometry.progressions),
        "has_pic": tri(geometry.has_pic()),
        "has_qic": tri(geometry.has_qic()),
    });
    let payload = json!({
        "c": c.0,
        "profile": profile_json,
        "params": {
            "r": params.r_norm,
            "r_plus": params.r_plus,
            "r_minus": params.r_minus,
            "alpha": rational(&params.alpha),
            "gamma": rational(&params.gamma),
            "theta": rational(&params.theta),
            "beta": rational(&params.beta),
            "drift_poly": poly_json(&params.drift),
            "second_moment_poly": poly_json(&params.second_moment),
        },
        "geometry": geometry_json,
        "verdicts": ser(&verdict),
        "tails": ser(&tails),
        "consistency_violations": violations,
    });
    let rep = report("analyze1d", &network, payload, &warnings);
    if !violations.is_empty() {
        println!("{}", serde_json::to_string_pretty(&rep).unwrap());
        return Ok(ExitCode::from(3));
    }
    Ok(emit(&rep, &warnings))
}

fn write_csv(command: &str, path: &Option<PathBuf>, contents: &str) -> Result<(), CliError> {
    if let Some(p) = path {
        std::fs::write(p, contents)
            .map_err(|e| input_error(command, format!("cannot write {}: {e}", p.display()), None))?;
    }
    Ok(())
}

fn pmf_json(pmf: &sim::EmpiricalPMF) -> Value {
    json!({
        "support": pmf.probs.iter().map(|(&k, &p)| json!([k, p])).collect::<Vec<_>>(),
        "samples": pmf.samples,
    })
}

fn cmd_simulate(net: NetworkArgs, what: SimCommand) -> Result<ExitCode, CliError> {
    let network = load_network("simulate", &net)?;
    match what {
        SimCommand::Traj(args) => {
            let x0 = parse_state("simulate", &args.x0, network.dim())?;
            let limits = sim::SimLimits {
                max_events: args.events,
                max_time: args.time,
                max_state_norm: args.norm,
            };
            let (outcome, csv) = sim::trajectory_csv(&network, &x0, args.seed, &limits, 100_000);
            write_csv("simulate", &args.csv, &csv)?;
            let payload = json!({
                "mode": "traj",
                "outcome": {
                    "kind": ser(&outcome.kind),
                    "time": outcome.time,
                    "state": outcome.state.0,
                    "events": outcome.events,
                    "seed": outcome.seed,
                    "stream": outcome.stream,
                },
                "csv_rows_capped_at": 100_000,
            });
            Ok(emit(&report("simulate", &network, payload, &[]), &[]))
        }
        SimCommand::Stationary { sim: args, horizon, burn_in } => {
            let x0 = parse_state("simulate", &args.x0, network.dim())?;
            let burn = burn_in.unwrap_or(horizon / 10.0);
            let pmf = sim::estimate_stationary(&network, &x0, args.seed, burn, horizon);
            write_csv("simulate", &args.csv, &pmf.to_csv())?;
            let payload = json!({
                "mode": "stationary",
                "burn_in": burn,
                "horizon": horizon,
                "pmf": pmf_json(&pmf),
            });
            Ok(emit(&report("simulate", &network, payload, &[]), &[]))
        }
        SimCommand::Qsd { sim: args, particles, horizon } => {
            let x0 = parse_state("simulate", &args.x0, network.dim())?;
            let pmf = sim::estimate_qsd(&network, &x0, particles, args.seed, horizon, None)
                .map_err(|e| input_error("simulate", e.to_string(), None))?;
            write_csv("simulate", &args.csv, &pmf.to_csv())?;
            let payload = json!({
                "mode": "qsd",
                "particles": particles,
                "horizon": horizon,
                "pmf": pmf_json(&pmf),
            });
            Ok(emit(&report("simulate", &network, payload, &[]), &[]))
        }
        SimCommand::Tail { sim: args, horizon, burn_in } => {
            let x0 = parse_state("simulate", &args.x0, network.dim())?;
            let burn = burn_in.unwrap_or(horizon / 10.0);
            let pmf = sim::estimate_stationary(&network, &x0, args.seed, burn, horizon);
            write_csv("simulate", &args.csv, &pmf.to_csv())?;
            let fit = sim::fit_tail(&pmf).map_err(|e| input_error("simulate", e.to_string(), None))?;
            let payload = json!({
                "mode": "tail",
                "horizon": horizon,
                "fit": ser(&fit),
                "pmf": pmf_json(&pmf),
            });
            Ok(emit(&report("simulate", &network, payload, &[]), &[]))
        }
    }
}

fn cmd_oracle(net: NetworkArgs, window: u64, c_text: Option<String>) -> Result<ExitCode, CliError> {
    let network = load_network("oracle", &net)?;
    let win = Window::cube(network.dim(), window);
    let dec = reach::decompose_window(&network, &win)
        .map_err(|e| input_error("oracle", e.to_string(), None))?;
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for (_, label, _) in dec.iter() {
        let key = serde_json::to_value(label).unwrap().as_str().unwrap().to_string();
        *counts.entry(key).or_insert(0) += 1;
    }
    let mut warnings = Vec::new();
    if counts.contains_key("boundary-uncertain") {
        warnings.push("some classes reach past the window and are not certified".to_string());
    }

    let line_json = match &c_text {
        None => Value::Null,
        Some(_) => {
            let c = parse_state("oracle", &c_text, network.dim())?;
            let line = onedim::compatibility_line(&network, &c)
                .map_err(|e| input_error("oracle", e.to_string(), None))?;
            let mut states = Vec::new();
            let mut t = line.t_min;
            let scan_cap = 4 * (window + 1) * (line.direction.coord_gcd.max(1));
            let mut scanned = 0u64;
            while scanned <= scan_cap {
                let Some(p) = line.point(t) else { break };
                if !win.contains(p.as_slice()) {
                    if line.t_max.is_none() {
                        break;
                    }
                    t += 1;
                    scanned += 1;
                    continue;
                }
                states.push(json!({
                    "t": t,
                    "state": p.0,
                    "label": dec.label(p.as_slice()).map(|l| ser(&l)),
                    "class_id": dec.class_id(p.as_slice()),
                }));
                t += 1;
                scanned += 1;
            }
            let k_set: Vec<Vec<u64>> = onedim::k_set_on_line(&network, &line, scan_cap)
                .into_iter()
                .map(|s| s.0)
                .filter(|s| win.contains(s))
                .collect();
            json!({
                "c": c.0,
                "t_min": line.t_min,
                "t_max": line.t_max,
                "states": states,
                "k_set": k_set,
            })
        }
    };

    let payload = json!({
        "window": win.bounds,
        "label_counts": counts,
        "line": line_json,
    });
    Ok(emit(&report("oracle", &network, payload, &warnings), &warnings))
}
