use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use unconditional::fibers::{quad_generation_check, PointConfiguration};
use unconditional::lattice::BinomialMove;
use unconditional::polytope::{
    build_unconditional, idp_check, AntiBlockingInput, AntiBlockingPolytope,
    LocallyAntiBlockingInput,
};
use unconditional::search::{find_non_convex_pieces, find_non_idp, find_non_quadratic_graph};
use unconditional::stable_sets::{
    stable_set_polytope, theorem_equivalence_harness, Agreement, Graph, KempeCache,
};
use unconditional::transfer::{audit_chain, descend_chain, quadratic_chain, MoveChain};
use unconditional::Error;

const EXIT_PARSE: u8 = 2;
const EXIT_INVARIANT: u8 = 3;
const EXIT_DISAGREE: u8 = 4;
const EXIT_NO_CHAIN: u8 = 5;
const EXIT_BUDGET: u8 = 6;

/// Exact checks for anti-blocking lattice polytopes, their unconditional
/// reflections, and stable set polytopes of graphs.
#[derive(Parser, Debug)]
#[command(name = "unconditional", version)]
struct Cli {
    /// Worker threads (0 uses every core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Input {
    /// Polytope JSON, or a graph (edge list or JSON) with --stable-set.
    input: PathBuf,

    /// Read the input as a graph and use its stable set polytope.
    #[arg(long)]
    stable_set: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lattice points and facets of P and P^±.
    Build {
        #[command(flatten)]
        input: Input,
    },
    /// Bounded IDP check of P and P^±.
    Idp {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..=8))]
        t_max: u32,
    },
    /// Bounded quadratic-generation check of the toric ideals of A and A^±.
    Quad {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(2..=6))]
        d_max: u64,
    },
    /// Projects a quadratic chain for u - v over A^± down to A.
    Descend {
        #[command(flatten)]
        input: Input,
        /// JSON binomial `{"lhs": [...], "rhs": [...]}` over A.
        #[arg(long)]
        binomial: PathBuf,
    },
    /// Checks a chain JSON against a configuration.
    Audit {
        #[command(flatten)]
        input: Input,
        /// Chain JSON as written by `descend`.
        #[arg(long)]
        chain: PathBuf,
        /// Audit against A^± instead of A.
        #[arg(long)]
        unconditional: bool,
        /// Largest admissible move degree.
        #[arg(long, default_value_t = 2)]
        max_degree: usize,
    },
    /// Quadratic generation of both stable set ideals against Kempe
    /// connectivity of replication graphs.
    Kempe {
        /// Graph as an edge list or JSON.
        graph: PathBuf,
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(0..=12))]
        a_budget: u64,
        #[arg(long, default_value_t = 2)]
        k_extra: usize,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(2..=6))]
        d_max: u64,
    },
    /// Seeded fixture searches.
    Search {
        #[arg(value_enum)]
        target: SearchTarget,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3000)]
        attempts: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
#[allow(clippy::enum_variant_names)]
enum SearchTarget {
    NonIdp,
    NonQuadratic,
    NonConvex,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Invariant(_)
            | Error::NotConvex(_)
            | Error::LeavesPolytope(_)
            | Error::InvalidChain(_)
            | Error::NotQuadratic { .. }
            | Error::EndpointMismatch(_)
            | Error::NoDecomposition { .. } => EXIT_INVARIANT,
            Error::BudgetExceeded { .. } | Error::TooLarge(_) => EXIT_BUDGET,
            _ => EXIT_PARSE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn parse_failure(what: &Path, e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_PARSE,
        message: format!("{}: {e}", what.display()),
    }
}

/// A finished command: its JSON output and exit code.
struct Outcome {
    json: Value,
    code: u8,
}

impl Outcome {
    fn ok(json: Value) -> Self {
        Self { json, code: 0 }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| parse_failure(path, e))
}

fn read_graph(path: &Path) -> Result<Graph, Failure> {
    let text = read(path)?;
    if text.trim_start().starts_with('{') {
        serde_json::from_str(&text).map_err(|e| parse_failure(path, e))
    } else {
        Graph::parse_edge_list(&text).map_err(|e| parse_failure(path, e))
    }
}

fn read_polytope(input: &Input) -> Result<AntiBlockingPolytope, Failure> {
    if input.stable_set {
        return Ok(stable_set_polytope(&read_graph(&input.input)?)?);
    }
    let text = read(&input.input)?;
    let parsed: AntiBlockingInput =
        serde_json::from_str(&text).map_err(|e| parse_failure(&input.input, e))?;
    Ok(parsed.build()?)
}

fn cmd_build(input: &Input) -> Result<Outcome, Failure> {
    if !input.stable_set {
        let text = read(&input.input)?;
        let raw: Value = serde_json::from_str(&text).map_err(|e| parse_failure(&input.input, e))?;
        if raw.get("pieces").is_some() {
            let parsed: LocallyAntiBlockingInput =
                serde_json::from_value(raw).map_err(|e| parse_failure(&input.input, e))?;
            let lab = parsed.build()?;
            return Ok(Outcome::ok(
                json!({ "locally_anti_blocking": to_value(&lab.summary()) }),
            ));
        }
    }
    let p = read_polytope(input)?;
    let pm = build_unconditional(&p)?;
    Ok(Outcome::ok(json!({
        "base": to_value(&p.summary()),
        "unconditional": to_value(&pm.summary()),
    })))
}

fn cmd_idp(input: &Input, t_max: u32) -> Result<Outcome, Failure> {
    let p = read_polytope(input)?;
    let pm = build_unconditional(&p)?;
    let (base, unc) = rayon::join(
        || idp_check(p.lattice_points(), p.hrep(), t_max),
        || idp_check(pm.lattice_points(), pm.hrep(), t_max),
    );
    let (base, unc) = (base?, unc?);
    let agree = base.is_idp() == unc.is_idp();
    Ok(Outcome {
        json: json!({
            "t_max": t_max,
            "base": to_value(&base),
            "unconditional": to_value(&unc),
            "agree": agree,
        }),
        code: if agree { 0 } else { EXIT_DISAGREE },
    })
}

fn cmd_quad(input: &Input, d_max: usize) -> Result<Outcome, Failure> {
    let p = read_polytope(input)?;
    let pm = build_unconditional(&p)?;
    let a = PointConfiguration::from_anti_blocking(&p)?;
    let apm = PointConfiguration::from_unconditional(&pm)?;
    let (base, unc) = rayon::join(
        || quad_generation_check(&a, d_max),
        || quad_generation_check(&apm, d_max),
    );
    let (base, unc) = (base?, unc?);
    let degree =
        |c: &unconditional::fibers::QuadGenCertificate| c.witness.as_ref().map(|w| w.degree);
    let agree = base.verdict == unc.verdict && degree(&base) == degree(&unc);
    Ok(Outcome {
        json: json!({
            "d_max": d_max,
            "base": to_value(&base),
            "unconditional": to_value(&unc),
            "agree": agree,
        }),
        code: if agree { 0 } else { EXIT_DISAGREE },
    })
}

fn cmd_descend(input: &Input, binomial: &Path) -> Result<Outcome, Failure> {
    let p = read_polytope(input)?;
    let pm = build_unconditional(&p)?;
    let mv: BinomialMove =
        serde_json::from_str(&read(binomial)?).map_err(|e| parse_failure(binomial, e))?;
    let a = PointConfiguration::from_anti_blocking(&p)?;
    let apm = PointConfiguration::from_unconditional(&pm)?;
    let (u, v) = (mv.lhs(), mv.rhs());
    a.indices(u)?;
    a.indices(v)?;
    let Some(source) = quadratic_chain(&apm, u, v)? else {
        return Ok(Outcome {
            json: json!({ "binomial": to_value(&mv), "source_chain": null, "descended_chain": null }),
            code: EXIT_NO_CHAIN,
        });
    };
    let descended = descend_chain(&source, u, v, &a)?;
    let audit = audit_chain(&descended, &a, u, v, 2)?;
    Ok(Outcome::ok(json!({
        "binomial": to_value(&mv),
        "source_chain": to_value(&source),
        "descended_chain": to_value(&descended),
        "source_length": source.len(),
        "audit": to_value(&audit),
    })))
}

fn cmd_audit(
    input: &Input,
    chain: &Path,
    unconditional: bool,
    max_degree: usize,
) -> Result<Outcome, Failure> {
    let p = read_polytope(input)?;
    let config = if unconditional {
        PointConfiguration::from_unconditional(&build_unconditional(&p)?)?
    } else {
        PointConfiguration::from_anti_blocking(&p)?
    };
    let text = read(chain)?;
    let raw: Value = serde_json::from_str(&text).map_err(|e| parse_failure(chain, e))?;
    let chain_value = raw.get("descended_chain").cloned().unwrap_or(raw);
    let c: MoveChain = serde_json::from_value(chain_value).map_err(|e| parse_failure(chain, e))?;
    let audit = audit_chain(&c, &config, &c.from, &c.to, max_degree)?;
    Ok(Outcome::ok(
        json!({ "accepted": true, "audit": to_value(&audit) }),
    ))
}

fn cmd_kempe(
    graph: &Path,
    a_budget: usize,
    k_extra: usize,
    d_max: usize,
) -> Result<Outcome, Failure> {
    let g = read_graph(graph)?;
    let report = theorem_equivalence_harness(&g, a_budget, k_extra, d_max, &KempeCache::new())?;
    let code = match report.agreement {
        Agreement::Agree => 0,
        Agreement::Disagree => EXIT_DISAGREE,
        Agreement::Inconclusive => EXIT_BUDGET,
    };
    Ok(Outcome {
        json: to_value(&report),
        code,
    })
}

fn cmd_search(target: SearchTarget, seed: u64, attempts: usize) -> Result<Outcome, Failure> {
    eprintln!("search seed: {seed}");
    let found = match target {
        SearchTarget::NonIdp => to_value(&find_non_idp(seed, 3..=4, 3, attempts, 4)?),
        SearchTarget::NonQuadratic => to_value(&find_non_quadratic_graph(6, 3)?.map(|(index, hit)| {
            json!({ "index": index, "graph": to_value(&hit.graph), "certificate": to_value(&hit.certificate) })
        })),
        SearchTarget::NonConvex => to_value(&find_non_convex_pieces(seed, 2, attempts)?),
    };
    Ok(Outcome::ok(
        json!({ "seed": seed, "attempts": attempts, "hit": found }),
    ))
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Build { input } => cmd_build(input),
        Command::Idp { input, t_max } => cmd_idp(input, *t_max),
        Command::Quad { input, d_max } => cmd_quad(input, *d_max as usize),
        Command::Descend { input, binomial } => cmd_descend(input, binomial),
        Command::Audit {
            input,
            chain,
            unconditional,
            max_degree,
        } => cmd_audit(input, chain, *unconditional, *max_degree),
        Command::Kempe {
            graph,
            a_budget,
            k_extra,
            d_max,
        } => cmd_kempe(graph, *a_budget as usize, *k_extra, *d_max as usize),
        Command::Search {
            target,
            seed,
            attempts,
        } => cmd_search(*target, *seed, *attempts),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVARIANT);
        }
    }
    match run(&cli) {
        Ok(out) => {
            let mut text = serde_json::to_string_pretty(&out.json).expect("serializable");
            text.push('\n');
            let written = match &cli.out {
                Some(path) => {
                    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
                }
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_PARSE);
            }
            if out.code != 0 {
                eprintln!("exit {}: see report", out.code);
            }
            ExitCode::from(out.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
