use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nckdv::fourier::expand_over;
use nckdv::hierarchy::{flow, FlowTable};
use nckdv::stablegraphs::{enumerate, weighting_count};
use nckdv::tausolver::{solve, solver_flows, SolverConfig};
use nckdv::{DiffPoly2, Truncation};

mod verify;

#[derive(Parser)]
#[command(name = "nckdv", version, about = "Exact ncKdV flows, Pixton-class correlator predictions and stable graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(Subcommand)]
enum Command {
    /// Print the flows P_1..P_n of the hierarchy.
    Flows {
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Largest ε-exponent kept (default 2n+2 per flow).
        #[arg(long)]
        eps_max: Option<i32>,
        /// Largest μ-exponent kept (default eps_max).
        #[arg(long)]
        mu_max: Option<u32>,
        /// Lowest ∂x order of the operators (default −(2n+3) per flow).
        #[arg(long, allow_hyphen_values = true)]
        depth: Option<i32>,
        /// Also expand ∂x P_n in Fourier modes drawn from this list.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        modes: Option<Vec<i64>>,
    },
    /// Solve for the correlators and write the table.
    Predict {
        #[arg(long, default_value_t = 2)]
        gmax: u32,
        #[arg(long, default_value_t = 3)]
        nmax: usize,
        #[arg(long, default_value_t = 3)]
        mode_bound: i64,
        #[arg(long, default_value_t = 3)]
        flows: u32,
        /// Table destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite; exits 1 if any check fails.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: verify::Suite,
        /// Seed for randomized checks.
        #[arg(long, default_value_t = 20240601)]
        seed: u64,
    },
    /// Enumerate stable graphs.
    Graphs {
        #[arg(long)]
        genus: u32,
        #[arg(long)]
        legs: usize,
        /// Count weightings mod r for every graph.
        #[arg(long)]
        weightings: Option<u32>,
        /// Leg weights for --weightings (default all zero).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        a: Option<Vec<i64>>,
    },
}

fn tsv(n: u32, p: &DiffPoly2) -> String {
    let mut s = String::new();
    for (m, c) in p.iter() {
        let vars: Vec<String> = m
            .powers()
            .iter()
            .map(|(k1, k2, e)| format!("u_{},{}^{}", k1, k2, e))
            .collect();
        s += &format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            n,
            m.eps,
            m.mu,
            vars.join("*"),
            nckdv::scalar::format_rational(&c.re),
            nckdv::scalar::format_rational(&c.im)
        );
    }
    s
}

enum Fail {
    Usage(String),
    Runtime(String),
}

impl From<nckdv::Error> for Fail {
    fn from(e: nckdv::Error) -> Self {
        match e {
            nckdv::Error::ArityMismatch { .. } | nckdv::Error::OutOfRange(_) => Fail::Usage(e.to_string()),
            _ => Fail::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Self {
        Fail::Runtime(e.to_string())
    }
}

fn run(cli: Cli) -> Result<ExitCode, Fail> {
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Flows {
            n,
            format,
            eps_max,
            mu_max,
            depth,
            modes,
        } => {
            if n == 0 {
                return Err(Fail::Usage("--n must be at least 1".into()));
            }
            let mut table = FlowTable::default();
            for k in 1..=n {
                let base = Truncation::for_flow(k);
                let mut t = Truncation::new(depth.unwrap_or(base.depth_floor), eps_max.unwrap_or(base.eps_max));
                if let Some(m) = mu_max {
                    t = t.with_mu_max(m);
                }
                if !t.is_valid() {
                    return Err(Fail::Usage(format!(
                        "invalid truncation for flow {k}: need eps_max >= 0 and depth <= 0"
                    )));
                }
                let p = flow(k, t)?;
                table.flows.insert(k, (t, p));
            }
            let mut doc = table.to_json_value();
            if let Some(modes) = &modes {
                let p = table.get(n).expect("computed").dx();
                let exp = expand_over(&p, modes)?;
                let rendered: serde_json::Map<String, serde_json::Value> =
                    exp.iter().map(|(a, q)| (a.to_string(), q.to_string().into())).collect();
                doc = serde_json::json!({"flows": doc, "modes": modes, "dx_P_by_mode": rendered});
            }
            match format {
                Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap()),
                Format::Tsv => {
                    let mut s = String::from("n\teps\tmu\tmonomial\tre\tim\n");
                    for (k, (_, p)) in &table.flows {
                        s += &tsv(*k, p);
                    }
                    write!(out, "{}", s)
                }
            }
            ?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Predict {
            gmax,
            nmax,
            mode_bound,
            flows,
            out: path,
        } => {
            if nmax == 0 || flows == 0 || mode_bound < 0 {
                return Err(Fail::Usage(
                    "--nmax and --flows must be positive, --mode-bound nonnegative".into(),
                ));
            }
            let cfg = SolverConfig::new(gmax, nmax, mode_bound, flows);
            let ft = solver_flows(&cfg)?;
            let (table, report) = solve(cfg, &ft)?;
            let table_json = serde_json::to_string_pretty(&table.to_json_value()).unwrap();
            let report_json = serde_json::to_string_pretty(&report.to_json_value()).unwrap();
            match path {
                Some(p) => {
                    fs::write(&p, table_json + "\n").map_err(|e| Fail::Runtime(format!("{}: {}", p.display(), e)))?;
                    writeln!(out, "{}", report_json)?;
                }
                None => {
                    writeln!(out, "{{\"table\": {}, \"report\": {}}}", table_json, report_json)
                        ?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite, seed } => {
            let ok = verify::run(suite, seed, &mut out).map_err(|e| Fail::Runtime(e.to_string()))?;
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Graphs {
            genus,
            legs,
            weightings,
            a,
        } => {
            let graphs = enumerate(genus, legs)?;
            let weights = a.unwrap_or_else(|| vec![0; legs]);
            if weights.len() != legs {
                return Err(Fail::Usage(format!("--a needs {} weights, got {}", legs, weights.len())));
            }
            let mut arr = Vec::new();
            for g in &graphs {
                let mut v = g.to_json_value();
                if let Some(r) = weightings {
                    let c = weighting_count(g, &weights, r)?;
                    v["weightings"] = serde_json::json!({"r": r, "A": weights, "count": c});
                }
                arr.push(v);
            }
            writeln!(out, "{}", serde_json::to_string_pretty(&serde_json::Value::Array(arr)).unwrap())
                ?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Fail::Usage(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
        Err(Fail::Runtime(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(1)
        }
    }
}
