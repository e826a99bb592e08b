use std::fs;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use pdes_core::format::{
    parse_automaton, parse_supervisor_map, write_automaton, write_scaling_map, write_supervisor_map,
};
use pdes_core::{
    check_controllable, check_observable, eval_language, inf_pco_detailed, observer, product, run_trials,
    scaling_from_spec, supervisor_from_scaling, Pdes, TrialConfig, Verdict,
};

/// Exact verification and synthesis for probabilistic discrete event systems.
#[derive(Parser)]
#[command(name = "pdes", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Pair {
    plant: PathBuf,
    spec: PathBuf,
    /// Comma-separated observable events, overriding both files.
    #[arg(long, value_delimiter = ',')]
    observable: Option<Vec<String>>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide probabilistic controllability of the spec.
    CheckCtrl(Pair),
    /// Decide probabilistic observability of the spec.
    CheckObs(Pair),
    /// Build the scaling-factor map and a supervisor achieving the spec.
    Synthesize {
        #[command(flatten)]
        pair: Pair,
        /// Where to write the scaling map (stdout if omitted).
        #[arg(long)]
        scaling: Option<PathBuf>,
        /// Where to write the supervisor map (stdout if omitted).
        #[arg(long)]
        supervisor: Option<PathBuf>,
    },
    /// Compute the least achievable language above the spec.
    InfPco {
        #[command(flatten)]
        pair: Pair,
        /// Drop transitions carrying infinitesimal probability.
        #[arg(long)]
        strip_eps: bool,
        /// Keep the internal product state names.
        #[arg(long)]
        raw_names: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample runs of the plant under a supervisor map.
    Simulate {
        #[arg(long)]
        plant: PathBuf,
        #[arg(long)]
        supervisor: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Product (intersection) of two automata.
    Product {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Observer (subset construction over unobservable events).
    Observer {
        automaton: PathBuf,
        #[arg(long, value_delimiter = ',')]
        observable: Option<Vec<String>>,
    },
    /// Print L(s) for each string; events separated by spaces or dots, `ε` for empty.
    Eval {
        automaton: PathBuf,
        #[arg(required = true)]
        strings: Vec<String>,
    },
}

struct Style {
    color: bool,
}

impl Style {
    fn detect() -> Self {
        let off = std::env::var("PDES_COLOR").is_ok_and(|v| v == "0");
        Style { color: !off && std::io::stdout().is_terminal() }
    }

    fn paint(&self, text: &str, code: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_string()
        }
    }
}

fn load(path: &Path, observable: Option<&[String]>) -> Result<Pdes> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (a, warnings) = parse_automaton(&text).with_context(|| format!("parsing {}", path.display()))?;
    for w in warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    match observable {
        Some(obs) => Ok(a.with_observable(obs)?),
        None => Ok(a),
    }
}

fn load_pair(p: &Pair) -> Result<(Pdes, Pdes)> {
    let obs = p.observable.as_deref();
    Ok((load(&p.plant, obs)?, load(&p.spec, obs)?))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report(style: &Style, property: &str, plant: &Pdes, v: &Verdict) -> u8 {
    match v {
        Verdict::Holds => {
            println!("{}", style.paint(&format!("{property}: holds"), "32"));
            0
        }
        Verdict::Fails(w) => {
            println!("{}", style.paint(&format!("{property}: fails"), "31"));
            println!("{}", w.line(plant.alphabet()));
            1
        }
    }
}

fn parse_string(a: &Pdes, text: &str) -> Result<Vec<usize>> {
    let words: Vec<&str> =
        text.split(|c: char| c.is_whitespace() || c == '.').filter(|w| !w.is_empty() && *w != "ε").collect();
    Ok(a.alphabet().parse_string(&words)?)
}

fn run(cli: Cli) -> Result<u8> {
    let style = Style::detect();
    match cli.command {
        Command::CheckCtrl(p) => {
            let (g, h) = load_pair(&p)?;
            Ok(report(&style, "probabilistic controllability", &g, &check_controllable(&g, &h)?))
        }
        Command::CheckObs(p) => {
            let (g, h) = load_pair(&p)?;
            Ok(report(&style, "probabilistic observability", &g, &check_observable(&g, &h)?))
        }
        Command::Synthesize { pair, scaling, supervisor } => {
            let (g, h) = load_pair(&pair)?;
            for (name, v) in [
                ("probabilistic controllability", check_controllable(&g, &h)?),
                ("probabilistic observability", check_observable(&g, &h)?),
            ] {
                if report(&style, name, &g, &v) != 0 {
                    eprintln!("no supervisor achieves this spec exactly; try `pdes inf-pco`");
                    return Ok(1);
                }
            }
            let k = scaling_from_spec(&g, &h)?;
            let s = supervisor_from_scaling(&k)?;
            emit(scaling.as_deref(), &write_scaling_map(&k))?;
            emit(supervisor.as_deref(), &write_supervisor_map(&s))?;
            Ok(0)
        }
        Command::InfPco { pair, strip_eps, raw_names, out } => {
            let (g, h) = load_pair(&pair)?;
            let r = inf_pco_detailed(&g, &h)?;
            let mut a = if raw_names { r.h_tilde.clone() } else { r.readable() };
            if strip_eps {
                a = a.without_infinitesimal();
            }
            emit(out.as_deref(), &write_automaton(&a))?;
            Ok(0)
        }
        Command::Simulate { plant, supervisor, trials, depth, seed } => {
            let g = load(&plant, None)?;
            let text = fs::read_to_string(&supervisor).with_context(|| format!("reading {}", supervisor.display()))?;
            let sup = parse_supervisor_map(&text, g.alphabet())
                .with_context(|| format!("parsing {}", supervisor.display()))?;
            let report = run_trials(&g, &sup, &TrialConfig::new(trials, depth, seed)?)?;
            print!("{}", report.to_tsv(g.alphabet()));
            Ok(0)
        }
        Command::Product { a, b, out } => {
            let p = product(&load(&a, None)?, &load(&b, None)?)?;
            emit(out.as_deref(), &write_automaton(&p))?;
            Ok(0)
        }
        Command::Observer { automaton, observable } => {
            let a = load(&automaton, observable.as_deref())?;
            let obs = observer(&a);
            for (i, cell) in obs.cells.iter().enumerate() {
                let names: Vec<&str> = cell.iter().map(|&x| a.state_name(x)).collect();
                let mark = if i == obs.initial { " initial" } else { "" };
                println!("cell o{i} {{{}}}{mark}", names.join(" "));
            }
            for (&(c, e), &d) in &obs.delta {
                println!("step o{c} {} o{d}", a.alphabet().name(e));
            }
            Ok(0)
        }
        Command::Eval { automaton, strings } => {
            let a = load(&automaton, None)?;
            for text in &strings {
                let s = parse_string(&a, text)?;
                println!("{}\t{}", a.alphabet().format_string(&s), eval_language(&a, &s));
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
