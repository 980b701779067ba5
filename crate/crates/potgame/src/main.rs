//! Command-line front end: verify potentiality, design local utilities,
//! simulate the learning dynamics, analyze the joint chain exactly, and
//! re-run the built-in reference scenarios.
//!
//! Exit codes: 0 success, 1 negative verdict under --strict (or failed
//! scenario checks), 2 schema/input error, 3 missing prerequisite.

use clap::{Args, Parser, Subcommand};
use potgame::chain;
use potgame::definition::{DefError, Mode, RatValue, SystemDefinition};
use potgame::dynamics::{simulate, transition_matrix_l, Cadence, SimulationTrace, SurConfig};
use potgame::game::StrategyProfile;
use potgame::potential::{design_utilities, first_designability_failure, is_potential};
use potgame::ratmat::{format_rat, parse_rat, Rat};
use potgame::scenarios;
use potgame::state_based::{design_state_utilities, first_state_designability_failure, Sep};
use rand::RngCore;
use rayon::prelude::*;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "potgame", about = "Potential-game design and dynamics toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Overrides applied on top of the loaded definition file.
#[derive(Args, Clone, Default)]
struct Overrides {
    /// State process: sep1 (strict improvers) or sep2 (weak improvers)
    #[arg(long, value_parser = parse_sep)]
    sep: Option<Sep>,
    /// Inertia parameter as a rational p/q in (0, 1)
    #[arg(long, value_parser = parse_epsilon)]
    epsilon: Option<Rat>,
    /// Update cadence: simultaneous, roundrobin or random
    #[arg(long, value_parser = parse_cadence)]
    cadence: Option<Cadence>,
}

fn parse_sep(s: &str) -> Result<Sep, String> {
    match s {
        "sep1" => Ok(Sep::Sep1),
        "sep2" => Ok(Sep::Sep2),
        _ => Err("expected sep1 or sep2".into()),
    }
}

fn parse_epsilon(s: &str) -> Result<Rat, String> {
    let r = parse_rat(s).map_err(|e| e.to_string())?;
    if r <= Rat::from_integer(0.into()) || r >= Rat::from_integer(1.into()) {
        return Err(format!("{s} not in (0, 1)"));
    }
    Ok(r)
}

fn parse_cadence(s: &str) -> Result<Cadence, String> {
    match s {
        "simultaneous" => Ok(Cadence::Simultaneous),
        "roundrobin" => Ok(Cadence::RoundRobin),
        "random" => Ok(Cadence::RandomPlayer),
        _ => Err("expected simultaneous, roundrobin or random".into()),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check whether the stored utilities form a (state based) potential game
    Verify {
        file: PathBuf,
        /// Exit 1 on a negative verdict
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Design local utilities realizing the objective as the potential
    Design {
        file: PathBuf,
        /// Where to write the definition with utilities filled in
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit 1 when the objective is not designable
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the seeded learning dynamics and export CSV traces
    Simulate {
        file: PathBuf,
        /// Maximum number of update steps (>= 1)
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        steps: u64,
        /// Number of replicas with derived per-run seeds
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        runs: u64,
        /// Base seed; generated and printed when absent
        #[arg(long)]
        seed: Option<u64>,
        /// Trace file (run 0); run r > 0 goes to <out>.run<r>.csv
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Exact equilibrium and absorption analysis of the joint chain
    Chain {
        file: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Re-run a built-in reference scenario and check its golden values
    Repro {
        /// Scenario id: sync3, pd-network or consensus4
        id: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify {
            file,
            strict,
            overrides,
        } => cmd_verify(&file, strict, &overrides),
        Command::Design {
            file,
            out,
            strict,
            overrides,
        } => cmd_design(&file, out, strict, &overrides),
        Command::Simulate {
            file,
            steps,
            runs,
            seed,
            out,
            overrides,
        } => cmd_simulate(&file, steps as usize, runs as usize, seed, out, &overrides),
        Command::Chain { file, overrides } => cmd_chain(&file, &overrides),
        Command::Repro { id } => cmd_repro(&id),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                DefError::Missing(_) => 3,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}

fn load(path: &PathBuf, overrides: &Overrides) -> Result<SystemDefinition, DefError> {
    let mut def = SystemDefinition::load(path)?;
    if let Some(sep) = overrides.sep {
        def.sep = sep;
    }
    if let Some(eps) = &overrides.epsilon {
        def.epsilon = RatValue(eps.clone());
    }
    if let Some(c) = overrides.cadence {
        def.sur.cadence = c;
    }
    def.validate()?;
    Ok(def)
}

fn fmt_vec(v: &[Rat]) -> String {
    let inner: Vec<String> = v.iter().map(format_rat).collect();
    format!("[{}]", inner.join(", "))
}

fn fmt_profile(a: &StrategyProfile) -> String {
    let inner: Vec<String> = a.0.iter().map(|s| s.to_string()).collect();
    format!("({})", inner.join(","))
}

fn verdict(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn cmd_verify(path: &PathBuf, strict: bool, overrides: &Overrides) -> Result<ExitCode, DefError> {
    let def = load(path, overrides)?;
    match def.mode {
        Mode::Fixed => {
            let game = def.fixed_game()?;
            println!("mode: fixed");
            match is_potential(&game) {
                Some(cert) => {
                    println!("potential: yes");
                    println!("potential_vector: {}", fmt_vec(&cert.v_p));
                    println!("potential_normalized: {}", fmt_vec(&cert.normalized_v_p()));
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    println!("potential: no");
                    Ok(exit_verdict(strict))
                }
            }
        }
        Mode::StateBased => {
            let game = def.state_based_game()?;
            println!("mode: state_based");
            let matches = game.potential_matches_utilities()?;
            let monotone = game.state_process_monotone()?;
            println!("utility_potential_match: {}", verdict(matches));
            println!("state_process_monotone: {}", verdict(monotone));
            println!("state_based_potential: {}", verdict(matches && monotone));
            if matches && monotone {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(exit_verdict(strict))
            }
        }
    }
}

fn exit_verdict(strict: bool) -> ExitCode {
    if strict {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn designed_output_path(input: &PathBuf, out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| {
        let mut p = input.clone();
        p.set_extension("designed.json");
        p
    })
}

fn cmd_design(
    path: &PathBuf,
    out: Option<PathBuf>,
    strict: bool,
    overrides: &Overrides,
) -> Result<ExitCode, DefError> {
    let def = load(path, overrides)?;
    let objective = def.build_objective()?;
    let k = def.cardinalities.clone();
    let topos = def.topologies()?;
    let per_state_neighborhoods: Vec<Vec<Vec<usize>>> = topos
        .iter()
        .map(|t| (1..=def.players).map(|i| t.neighborhood(i)).collect())
        .collect();
    match def.mode {
        Mode::Fixed => {
            let nb = &per_state_neighborhoods[0];
            match design_utilities(&objective, nb, &k)? {
                Some(design) => {
                    println!("designable: yes");
                    let lifted = design.lifted_utilities(nb, &k)?;
                    for (i, local) in design.utilities.iter().enumerate() {
                        println!("player_{}: local_utility={}", i + 1, fmt_vec(local));
                    }
                    let out_path = designed_output_path(path, out);
                    def.with_utilities_fixed(&lifted).save(&out_path)?;
                    println!("output: {}", out_path.display());
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    println!("designable: no");
                    let who = first_designability_failure(objective.block(1), nb, &k)?
                        .expect("failure witness exists when design fails");
                    println!("first_failure: state=1 player={who}");
                    Ok(exit_verdict(strict))
                }
            }
        }
        Mode::StateBased => {
            match design_state_utilities(&objective, &per_state_neighborhoods, &k)? {
                Some(designs) => {
                    println!("designable: yes");
                    let mut per_state = Vec::with_capacity(designs.len());
                    for (x, d) in designs.iter().enumerate() {
                        println!(
                            "state_{}: designable players=1..={}",
                            x + 1,
                            d.utilities.len()
                        );
                        per_state.push(d.lifted_utilities(&per_state_neighborhoods[x], &k)?);
                    }
                    let out_path = designed_output_path(path, out);
                    def.with_utilities_state_based(&per_state).save(&out_path)?;
                    println!("output: {}", out_path.display());
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    println!("designable: no");
                    let (x, i) =
                        first_state_designability_failure(&objective, &per_state_neighborhoods, &k)?
                            .expect("failure witness exists when design fails");
                    println!("first_failure: state={x} player={i}");
                    Ok(exit_verdict(strict))
                }
            }
        }
    }
}

fn trace_csv(trace: &SimulationTrace, n: usize) -> String {
    let mut out = String::from("t,state");
    for i in 1..=n {
        out.push_str(&format!(",a_{i}"));
    }
    out.push_str(",phi\n");
    for step in &trace.steps {
        let state = step.state.map_or(String::new(), |x| x.to_string());
        let phi = step.phi.as_ref().map_or(String::new(), format_rat);
        out.push_str(&format!("{},{}", step.t, state));
        for s in &step.profile.0 {
            out.push_str(&format!(",{s}"));
        }
        out.push_str(&format!(",{phi}\n"));
    }
    out
}

fn cmd_simulate(
    path: &PathBuf,
    steps: usize,
    runs: usize,
    seed: Option<u64>,
    out: Option<PathBuf>,
    overrides: &Overrides,
) -> Result<ExitCode, DefError> {
    let def = load(path, overrides)?;
    let base_seed = seed.or(def.seed).unwrap_or_else(|| rand::thread_rng().next_u64());
    println!("seed: {base_seed}");
    println!("runs: {runs}");
    if out.is_none() && runs > 1 {
        return Err(DefError::Missing(
            "--out is required when --runs > 1".into(),
        ));
    }
    let (x0, a0) = def.initial_condition();
    let n = def.players;
    let traces: Vec<Result<SimulationTrace, DefError>> = match def.mode {
        Mode::Fixed => {
            let game = def.fixed_game()?;
            let objective = def.build_objective()?;
            let topo = def.topologies()?.remove(0);
            (0..runs)
                .into_par_iter()
                .map(|r| {
                    let config = SurConfig {
                        cadence: def.sur.cadence,
                        info: def.sur.information,
                        seed: base_seed.wrapping_add(r as u64),
                    };
                    simulate(&game, Some(&objective), &config, Some(&topo), a0.clone(), steps)
                        .map_err(DefError::from)
                })
                .collect()
        }
        Mode::StateBased => {
            let game = def.state_based_game()?;
            (0..runs)
                .into_par_iter()
                .map(|r| {
                    game.simulate(x0, a0.clone(), steps, base_seed.wrapping_add(r as u64))
                        .map_err(DefError::from)
                })
                .collect()
        }
    };
    let mut converged = 0usize;
    for (r, trace) in traces.into_iter().enumerate() {
        let trace = trace?;
        let csv = trace_csv(&trace, n);
        match &out {
            Some(base) => {
                let path = if r == 0 {
                    base.clone()
                } else {
                    PathBuf::from(format!("{}.run{r}.csv", base.display()))
                };
                std::fs::write(&path, &csv).map_err(|source| DefError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
            }
            None => print!("{csv}"),
        }
        match trace.converged_at {
            Some(t) => {
                converged += 1;
                println!("run_{r}: converged_at={t}");
            }
            None => println!("run_{r}: converged_at=none"),
        }
    }
    println!("converged_fraction: {converged}/{runs}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_chain(path: &PathBuf, overrides: &Overrides) -> Result<ExitCode, DefError> {
    let def = load(path, overrides)?;
    if def.mode == Mode::Fixed {
        // Documented fallback: the joint chain needs states; in fixed mode
        // list the fixed points of the profile transition matrix instead.
        let game = def.fixed_game()?;
        let cadence = match def.sur.cadence {
            Cadence::RoundRobin => Cadence::Simultaneous,
            c => c,
        };
        let topo = def.topologies()?.remove(0);
        let l = transition_matrix_l(&game, cadence, def.sur.information, Some(&topo))?;
        println!("mode: fixed");
        println!("note: listing fixed points of the profile transition matrix");
        let k = game.k();
        let mut count = 0;
        for a in StrategyProfile::all(k) {
            let idx = a.index(k) - 1;
            if l.matrix()[(idx, idx)] == Rat::from_integer(1.into()) {
                println!("fixed_point_{count}: {}", fmt_profile(&a));
                count += 1;
            }
        }
        println!("fixed_points: {count}");
        return Ok(ExitCode::SUCCESS);
    }
    let game = def.state_based_game()?;
    let labels = game.state_labels().to_vec();
    println!("mode: state_based");
    let rses = game.recurrent_state_equilibria();
    for (i, rse) in rses.iter().enumerate() {
        let states: Vec<String> = rse
            .state_set
            .iter()
            .map(|&x| labels[x - 1].clone())
            .collect();
        println!(
            "rse_{i}: action={} states={{{}}}",
            fmt_profile(&rse.action),
            states.join(",")
        );
    }
    println!("rse_count: {}", rses.len());
    let joint = game.joint_chain()?;
    let analysis = chain::analyze(&joint.0)?;
    // chain::analyze numbers pairs from 0; pair_from_index is 1-based
    let pair_label = |idx: usize| {
        let (x, a) = game.pair_from_index(idx + 1);
        format!("({},{})", labels[x - 1], fmt_profile(&a))
    };
    for (c, class) in analysis.closed_classes.iter().enumerate() {
        let members: Vec<String> = class.iter().map(|&s| pair_label(s)).collect();
        println!("closed_class_{c}: {{{}}}", members.join(", "));
    }
    for s in 0..analysis.n {
        let probs: Vec<String> = analysis.absorption[s].iter().map(format_rat).collect();
        println!(
            "pair {}: absorption=[{}] expected_steps={}",
            pair_label(s),
            probs.join(", "),
            format_rat(&analysis.expected_steps[s])
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_repro(id: &str) -> Result<ExitCode, DefError> {
    let Some(checks) = scenarios::repro(id) else {
        eprintln!("error: unknown scenario id `{id}` (expected sync3, pd-network or consensus4)");
        return Ok(ExitCode::from(2));
    };
    let mut failed = 0;
    for (name, ok) in &checks {
        println!("{}: {name}", if *ok { "PASS" } else { "FAIL" });
        if !ok {
            failed += 1;
        }
    }
    println!("checks: {} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}
