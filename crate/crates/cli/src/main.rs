use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qtcyclic::charmat::{self, CharMatrix};
use qtcyclic::cohomology::RingPresentation;
use qtcyclic::connectsum;
use qtcyclic::error::Error;
use qtcyclic::isomorphism::{self, Battery, DEFAULT_ISO_BOUND, MAX_MODULUS};
use qtcyclic::polytope::CombinatorialPolytope;
use qtcyclic::reproduce::{self, RecipeConfig, RECIPES};

#[derive(Parser, Debug)]
#[command(name = "qtcyclic", version, about = "Small covers and quasitoric manifolds over dual cyclic polytopes")]
struct Cli {
    /// Entry bound for integer enumeration.
    #[arg(long, global = true, default_value_t = 6, value_parser = clap::value_parser!(i64).range(1..))]
    bound: i64,
    /// Entry bound for the integral isomorphism search.
    #[arg(long, global = true, default_value_t = DEFAULT_ISO_BOUND, value_parser = clap::value_parser!(i64).range(1..))]
    iso_bound: i64,
    /// Modulus ladder for ring distinction, e.g. 2,3,4.
    #[arg(long, global = true, value_delimiter = ',', default_values_t = isomorphism::DEFAULT_MODULI)]
    moduli: Vec<i64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Real,
    Int,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Combinatorial data of C^n(m)* (n = 2: the m-gon).
    Polytope { n: usize, m: usize },
    /// Characteristic matrices up to equivalence.
    Enumerate { kind: Kind, n: usize, m: usize },
    /// Orbits under Aut(K_P) and pairwise ring distinction.
    Classify {
        n: usize,
        m: usize,
        /// Keep only classes admitting no connected-sum splitting (n = 3).
        #[arg(long)]
        indecomposable: bool,
    },
    /// Run a named reproduction recipe, or `all`.
    Reproduce { recipe: String },
}

/// Exit status: 1 for assertion diffs, 2 for usage errors, 3 for internal
/// invariant violations.
enum Failure {
    Diff(String),
    Usage(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidPolytope(_)
            | Error::SearchBound { .. }
            | Error::OutOfRange { .. }
            | Error::Dimension(_)
            | Error::Modulus(_)
            | Error::Parse(_) => Failure::Usage(e.to_string()),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Internal(format!("i/o: {e}"))
    }
}

fn polytope(n: usize, m: usize) -> Result<Arc<CombinatorialPolytope>, Failure> {
    Ok(Arc::new(if n == 2 { CombinatorialPolytope::polygon(m)? } else { CombinatorialPolytope::dual_cyclic(n, m)? }))
}

fn tail_text(rows: &[Vec<i64>]) -> String {
    rows.iter().map(|r| r.iter().map(i64::to_string).collect::<Vec<_>>().join(" ")).collect::<Vec<_>>().join(" / ")
}

fn cmd_polytope(cli: &Cli, n: usize, m: usize) -> Result<String, Failure> {
    let p = polytope(n, m)?;
    let faces = p.fh_vectors()?;
    Ok(match cli.format {
        Format::Json => {
            let body: Value = serde_json::from_str(&p.to_json()).map_err(|e| Failure::Internal(e.to_string()))?;
            serde_json::to_string_pretty(&json!({ "polytope": body, "faces": faces })).expect("json")
        }
        Format::Csv => {
            let mut s = String::from("vertex\n");
            for v in p.vertices() {
                s += &format!("{}\n", v.iter().map(usize::to_string).collect::<Vec<_>>().join(" "));
            }
            s
        }
        Format::Text => {
            let mut s = format!("{}: n = {n}, m = {m}, {} vertices\n", p.label(), p.vertices().len());
            s += &format!("f = {:?}\nh = {:?}\nmissing faces = {:?}\n", faces.f_vector, faces.h_vector, faces.missing_faces);
            for v in p.vertices() {
                s += &format!("  {v:?}\n");
            }
            s
        }
    })
}

fn cmd_enumerate(cli: &Cli, kind: Kind, n: usize, m: usize) -> Result<String, Failure> {
    let p = polytope(n, m)?;
    let rows: Vec<(Vec<Vec<i64>>, Value)> = match kind {
        Kind::Real => charmat::enumerate_real(&p)?.into_iter().map(|c| (c.canonical.tail(), c.canonical.to_json())).collect(),
        Kind::Int => {
            charmat::enumerate_integer(&p, cli.bound)?.into_iter().map(|c| (c.canonical.tail(), c.canonical.to_json())).collect()
        }
    };
    Ok(match cli.format {
        Format::Json => serde_json::to_string_pretty(&json!({
            "polytope": p.label(),
            "kind": match kind { Kind::Real => "Z2", Kind::Int => "Z" },
            "bound": (kind == Kind::Int).then_some(cli.bound),
            "count": rows.len(),
            "classes": rows.iter().map(|r| &r.1).collect::<Vec<_>>(),
        }))
        .expect("json"),
        Format::Csv => {
            let mut s = String::from("index,tail\n");
            for (i, (t, _)) in rows.iter().enumerate() {
                s += &format!("{},{}\n", i + 1, tail_text(t));
            }
            s
        }
        Format::Text => {
            let mut s = format!("{}: {} classes\n", p.label(), rows.len());
            for (i, (t, _)) in rows.iter().enumerate() {
                s += &format!("{:>4}  {}\n", i + 1, tail_text(t));
            }
            s
        }
    })
}

fn cmd_classify(cli: &Cli, n: usize, m: usize, indecomposable: bool) -> Result<String, Failure> {
    let p = polytope(n, m)?;
    if indecomposable && (n != 3 || m < 4) {
        return Err(Failure::Usage("--indecomposable applies to C^3(m)* only".into()));
    }
    // fiber by fiber: the parity pattern prunes the search
    let mut classes: Vec<CharMatrix> = Vec::new();
    for real in charmat::enumerate_real(&p)? {
        classes.extend(charmat::fiber_over(&real.canonical, cli.bound)?.into_iter().map(|c| c.canonical));
    }
    classes.sort();
    if indecomposable {
        let mut kept = Vec::new();
        for c in classes {
            if connectsum::indecomposable_c3(&c)? {
                kept.push(c);
            }
        }
        classes = kept;
    }
    let orbits = reproduce::orbits_within(&classes, &p.automorphism_group()?)?;
    let rings = orbits
        .iter()
        .map(|o| RingPresentation::quasitoric(&classes[o[0]]))
        .collect::<Result<Vec<_>, _>>()?;
    let battery = Battery { moduli: cli.moduli.clone(), iso_bound: cli.iso_bound, fingerprints: true };
    let report = isomorphism::distinguish_all(&rings, &battery)?;
    let types: Vec<Vec<usize>> =
        report.classes.iter().map(|c| c.iter().map(|&i| orbits[i][0] + 1).collect()).collect();
    Ok(match cli.format {
        Format::Json => serde_json::to_string_pretty(&json!({
            "polytope": p.label(),
            "bound": cli.bound,
            "indecomposable": indecomposable,
            "classes": classes.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "orbits": orbits.iter().map(|o| o.iter().map(|i| i + 1).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "ring_classes": types,
            "distinction": report.to_json(),
        }))
        .expect("json"),
        Format::Csv => {
            let mut s = String::from("orbit,ring_class,class,tail\n");
            for (oi, o) in orbits.iter().enumerate() {
                let rc = report.classes.iter().position(|c| c.contains(&oi)).unwrap_or(usize::MAX);
                for &i in o {
                    s += &format!("{},{},{},{}\n", oi + 1, rc + 1, i + 1, tail_text(&classes[i].tail()));
                }
            }
            s
        }
        Format::Text => {
            let mut s = format!(
                "{}: {} classes (bound {}), {} orbits under Aut(K_P), {} ring classes, {} unresolved pairs\n",
                p.label(),
                classes.len(),
                cli.bound,
                orbits.len(),
                report.classes.len(),
                report.unresolved().len()
            );
            for (oi, o) in orbits.iter().enumerate() {
                s += &format!("orbit {:>3} ({} classes): {}\n", oi + 1, o.len(), tail_text(&classes[o[0]].tail()));
            }
            for pv in &report.pairs {
                s += &format!("orbits {} and {}: {} {}\n", pv.i + 1, pv.j + 1, pv.outcome, pv.witness);
            }
            s
        }
    })
}

fn cmd_reproduce(cli: &Cli, recipe: &str) -> Result<(String, bool), Failure> {
    let names: Vec<&str> = if recipe == "all" { RECIPES.to_vec() } else { vec![recipe] };
    if names.iter().any(|r| !RECIPES.contains(r)) {
        return Err(Failure::Usage(format!("unknown recipe {recipe:?}; expected `all` or one of {}", RECIPES.join(", "))));
    }
    let cfg = RecipeConfig { bound: cli.bound, iso_bound: cli.iso_bound, moduli: cli.moduli.clone() };
    let reports = names.iter().map(|r| reproduce::run(r, &cfg)).collect::<Result<Vec<_>, _>>()?;
    let ok = reports.iter().all(|r| r.passed());
    let out = match cli.format {
        Format::Json => serde_json::to_string_pretty(&reports.iter().map(|r| r.to_json()).collect::<Vec<_>>()).expect("json"),
        Format::Csv => {
            let mut s = String::from("recipe,check,pass,expected,actual\n");
            for r in &reports {
                for c in &r.checks {
                    let q = |x: &str| format!("\"{}\"", x.replace('"', "\"\""));
                    s += &format!("{},{},{},{},{}\n", r.recipe, q(&c.what), c.pass, q(&c.expected), q(&c.actual));
                }
            }
            s
        }
        Format::Text => reports.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("\n\n") + "\n",
    };
    Ok((out, ok))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(&k) = cli.moduli.iter().find(|&&k| !(2..=MAX_MODULUS).contains(&k)) {
        return Err(Failure::Usage(format!("modulus {k} outside 2..={MAX_MODULUS}")));
    }
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .map_err(|e| Failure::Internal(e.to_string()))?;
    }
    let (text, ok) = match &cli.command {
        Command::Polytope { n, m } => (cmd_polytope(cli, *n, *m)?, true),
        Command::Enumerate { kind, n, m } => (cmd_enumerate(cli, *kind, *n, *m)?, true),
        Command::Classify { n, m, indecomposable } => (cmd_classify(cli, *n, *m, *indecomposable)?, true),
        Command::Reproduce { recipe } => cmd_reproduce(cli, recipe)?,
    };
    match &cli.output {
        Some(path) => fs::write(path, &text)?,
        None => match std::io::stdout().write_all(text.as_bytes()) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
            r => r?,
        },
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Diff("one or more assertions failed".into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Diff(msg)) => {
            eprintln!("qtcyclic: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("qtcyclic: usage: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("qtcyclic: internal error: {msg}");
            ExitCode::from(3)
        }
    }
}
