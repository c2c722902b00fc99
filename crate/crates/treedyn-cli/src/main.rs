//! Command-line front end: build trees and maps, compute entropy, check
//! dynamical properties, build extensions, run entropy sweeps, report
//! bounds and exactness witnesses.
//!
//! Exit codes: 0 success, 1 a requested property check failed, 2 input
//! or usage error.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use treedyn::bounds::{branch_count_check, extract_and_bound, p_lipschitz_bound, theta_defect, LipschitzSpec, SubtreeKind};
use treedyn::constructions::{comb_map, extend_exact, lower_bound_root, star_map, StarVariant};
use treedyn::dynamics::{default_witness_cap, exactness_witness, SegmentSet, WitnessOutcome};
use treedyn::io;
use treedyn::markov::{EntropyMethod, MarkovMap};
use treedyn::sampling;
use treedyn::spectral::{matrix_profile, perron};
use treedyn::tree::make_ye_tree;

#[derive(Parser)]
#[command(name = "treedyn", version, about = "Markov dynamics on metric trees")]
struct Cli {
    /// Numerical tolerance for dual-method agreement and eigensolves
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    /// Seed for every randomized harness
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a built-in map or tree to a JSON file
    Make {
        #[command(subcommand)]
        what: MakeWhat,
    },
    /// Topological entropy of a map file
    Entropy {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Both)]
        method: MethodArg,
    },
    /// Check dynamical properties; exit 1 when a requested check fails
    Check {
        #[arg(long)]
        map: PathBuf,
        /// Comma list from: transitive, exact, zero-entropy
        #[arg(long, value_delimiter = ',')]
        props: Vec<String>,
        /// Vertex chain s_0,...,s_n for a (P,S)-linearity check
        #[arg(long, value_delimiter = ',')]
        ps: Option<Vec<String>>,
    },
    /// Build the exact extension g_N over a (P,S)-linear base
    Extend {
        /// Built-in base: star:n or comb:r
        #[arg(long, conflicts_with_all = ["map", "s"])]
        base: Option<String>,
        /// Base map file (requires --s)
        #[arg(long, requires = "s")]
        map: Option<PathBuf>,
        /// Chain s_0,...,s_n of the base map
        #[arg(long, value_delimiter = ',')]
        s: Option<Vec<String>>,
        /// Pieces per attached arc
        #[arg(long = "N")]
        n_pieces: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Entropy sweep over N for a built-in base; writes CSV
    Sweep {
        /// Built-in base: star:n or comb:r
        #[arg(long)]
        base: String,
        /// N values: "10,20,40", "10:60:+10" or "10:160:x2"
        #[arg(long = "N")]
        n_values: String,
        #[arg(long)]
        csv: PathBuf,
    },
    /// Entropy bounds: subtree extraction for a tree file, or the defect
    /// frequency bound for an extension file
    Bound {
        #[arg(long, conflicts_with = "ext")]
        tree: Option<PathBuf>,
        #[arg(long)]
        ext: Option<PathBuf>,
        /// Lipschitz constant of the off-skeleton factor
        #[arg(long, default_value_t = 4.0)]
        l2: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exactness witness: iterate random seed segments to full coverage
    Witness {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        /// Iteration cap as a multiple of the arc count
        #[arg(long, default_value_t = 50)]
        cap_mult: usize,
        /// Write the per-step trace of the first seed
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum MakeWhat {
    /// Star chain map on n legs (map file)
    Star {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = VariantArg::FixedHub)]
        variant: VariantArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Comb chain map with 2^r teeth (map file)
    Comb {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tree from the star-extension class (tree file)
    Ye {
        /// Star signature, e.g. 2,2 or 3,2
        #[arg(long, value_delimiter = ',')]
        signature: Vec<usize>,
        /// Number of extra attached arcs
        #[arg(long, default_value_t = 0)]
        arcs: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Rome,
    Power,
    Both,
}

impl From<MethodArg> for EntropyMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Rome => EntropyMethod::Rome,
            MethodArg::Power => EntropyMethod::Power,
            MethodArg::Both => EntropyMethod::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    FixedHub,
    Literal,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Make { what } => {
            make(what)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Entropy { map, method } => {
            let map = load_map(&map)?;
            let h = map.entropy(method.into(), cli.tol)?;
            println!("{h:.9}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { map, props, ps } => check(&map, &props, ps.as_deref(), cli.tol),
        Command::Extend { base, map, s, n_pieces, out } => {
            let (base_map, chain) = resolve_base(base.as_deref(), map.as_deref(), s)?;
            let ext = extend_exact(&base_map, &chain, n_pieces)?;
            write_text(&out, &io::to_json_pretty(&io::extension_to_file(&ext))?)?;
            println!("extension written: {} arcs, m = {}", ext.map.arc_count(), ext.m);
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { base, n_values, csv } => {
            sweep(&base, &n_values, &csv, cli.tol)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Bound { tree, ext, l2, out } => bound(tree.as_deref(), ext.as_deref(), l2, out.as_deref(), cli.tol),
        Command::Witness { map, seeds, cap_mult, csv } => {
            witness(&map, seeds, cap_mult, csv.as_deref(), cli.seed)
        }
    }
}

fn load_map(path: &Path) -> Result<MarkovMap> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: io::MapFile = io::from_json(&text)?;
    Ok(io::map_from_file(&file)?)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn make(what: MakeWhat) -> Result<()> {
    match what {
        MakeWhat::Star { n, variant, out } => {
            let variant = match variant {
                VariantArg::FixedHub => StarVariant::FixedHub,
                VariantArg::Literal => StarVariant::Literal,
            };
            let (map, chain) = star_map(n, variant)?;
            write_text(&out, &io::to_json_pretty(&io::map_to_file(&map))?)?;
            println!("star map n={n} written; chain S = {}", chain.join(","));
        }
        MakeWhat::Comb { r, out } => {
            let (map, chain, _) = comb_map(r)?;
            write_text(&out, &io::to_json_pretty(&io::map_to_file(&map))?)?;
            println!("comb map r={r} written; chain S = {}", chain.join(","));
        }
        MakeWhat::Ye { signature, arcs, out } => {
            let tree = make_ye_tree(&signature, arcs)?;
            write_text(&out, &io::to_json_pretty(&io::tree_to_file(&tree))?)?;
            println!("tree written: {} endpoints", tree.endpoint_count());
        }
    }
    Ok(())
}

fn check(path: &Path, props: &[String], ps: Option<&[String]>, tol: f64) -> Result<ExitCode> {
    let map = load_map(path)?;
    let dynamical = map.dynamical_properties();
    let mut all_ok = true;
    for prop in props {
        let ok = match prop.as_str() {
            "transitive" => dynamical.transitive,
            "exact" => dynamical.exact,
            "zero-entropy" => map.entropy(EntropyMethod::Both, tol)? == 0.0,
            other => bail!("unknown property {other}"),
        };
        println!("{prop}={ok}");
        all_ok &= ok;
    }
    if let Some(chain) = ps {
        let report = map.check_ps_linear(chain);
        println!("ps-linear={}", report.ok);
        if !report.ok {
            for failure in &report.failures {
                println!("  failure: {failure:?}");
            }
        }
        all_ok &= report.ok;
    }
    Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn resolve_base(
    base: Option<&str>,
    map: Option<&Path>,
    s: Option<Vec<String>>,
) -> Result<(MarkovMap, Vec<String>)> {
    match (base, map) {
        (Some(spec), None) => built_in_base(spec),
        (None, Some(path)) => {
            let chain = s.ok_or_else(|| anyhow!("--map requires --s"))?;
            Ok((load_map(path)?, chain))
        }
        _ => bail!("give exactly one of --base or --map"),
    }
}

fn built_in_base(spec: &str) -> Result<(MarkovMap, Vec<String>)> {
    let (kind, value) = spec
        .split_once(':')
        .ok_or_else(|| anyhow!("base must look like star:4 or comb:2"))?;
    let value: usize = value.parse().with_context(|| format!("bad base parameter {value}"))?;
    match kind {
        "star" => {
            let (map, chain) = star_map(value, StarVariant::FixedHub)?;
            Ok((map, chain))
        }
        "comb" => {
            let (map, chain, _) = comb_map(value)?;
            Ok((map, chain))
        }
        other => bail!("unknown base kind {other}"),
    }
}

fn parse_n_values(text: &str) -> Result<Vec<usize>> {
    if let Some((range, step)) = text.rsplit_once(':') {
        let (start, end) = range
            .split_once(':')
            .ok_or_else(|| anyhow!("range must look like start:end:step"))?;
        let start: usize = start.parse()?;
        let end: usize = end.parse()?;
        let mut out = Vec::new();
        let mut n = start;
        if let Some(factor) = step.strip_prefix('x') {
            let factor: usize = factor.parse()?;
            if factor < 2 {
                bail!("geometric step must be at least x2");
            }
            while n <= end {
                out.push(n);
                n *= factor;
            }
        } else if let Some(add) = step.strip_prefix('+') {
            let add: usize = add.parse()?;
            if add == 0 {
                bail!("arithmetic step must be positive");
            }
            while n <= end {
                out.push(n);
                n += add;
            }
        } else {
            bail!("step must start with x or +");
        }
        Ok(out)
    } else {
        text.split(',').map(|v| Ok(v.trim().parse()?)).collect()
    }
}

fn sweep(base: &str, n_values: &str, csv: &Path, tol: f64) -> Result<()> {
    let values = parse_n_values(n_values)?;
    if let Some(&bad) = values.iter().find(|&&n| n <= 6) {
        bail!("N must exceed 6, got {bad}");
    }
    let (base_map, chain) = built_in_base(base)?;
    let n = chain.len() - 1;
    // one worker per N; rows come back in N order regardless of finish order
    let computed: Vec<Result<String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = values
            .iter()
            .map(|&big_n| {
                let base_map = &base_map;
                let chain = &chain;
                scope.spawn(move || -> Result<String> {
                    let ext = extend_exact(base_map, chain, big_n)?;
                    let td = ext.map.transition();
                    let lambda = perron(&td.matrix, tol.min(1e-12))?;
                    let (theta, _) = theta_defect(&ext);
                    let theta = *theta.numer() as f64 / *theta.denom() as f64;
                    let primitive = matrix_profile(&td.matrix).primitive;
                    let lower = lower_bound_root(n, big_n);
                    Ok(format!(
                        "{big_n},{arcs},{lambda:.9},{entropy:.9},{theta:.9},{primitive},{lower:.9}",
                        arcs = ext.map.arc_count(),
                        entropy = lambda.ln().max(0.0),
                    ))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let mut rows = vec!["N,arcs,lambda,entropy,theta,primitive,lower_root".to_string()];
    for row in computed {
        rows.push(row?);
    }
    write_text(csv, &(rows.join("\n") + "\n"))?;
    println!("swept {} values of N for base {base}", values.len());
    Ok(())
}

fn bound(
    tree: Option<&Path>,
    ext: Option<&Path>,
    l2: f64,
    out: Option<&Path>,
    tol: f64,
) -> Result<ExitCode> {
    let report = match (tree, ext) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)?;
            let file: io::TreeFile = io::from_json(&text)?;
            let tree = io::tree_from_file(&file)?;
            let extraction = extract_and_bound(&tree)?;
            let branch_ok = if tree.endpoint_count() >= 3 {
                Some(branch_count_check(&tree)?)
            } else {
                None
            };
            serde_json::json!({
                "kind": match extraction.kind {
                    SubtreeKind::Star => "star",
                    SubtreeKind::Comb => "comb",
                },
                "k": extraction.k,
                "bound": extraction.certified_bound,
                "endpoints": extraction.endpoints,
                "branch_count_ok": branch_ok,
                "subtree": serde_json::to_value(io::tree_to_file(&extraction.subtree))?,
            })
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path)?;
            let file: io::MapFile = io::from_json(&text)?;
            let extension = io::extension_from_file(&file)?;
            let (theta, ok) = theta_defect(&extension);
            let td = extension.map.transition();
            let lambda = perron(&td.matrix, tol.min(1e-12))?;
            let arcs = extension.map.arc_count();
            let constants: Vec<f64> = (0..arcs)
                .map(|a| if extension.defect.contains(&a) { 2.0 * lambda * l2 } else { lambda })
                .collect();
            let subsystem: BTreeSet<usize> =
                (0..arcs).filter(|a| !extension.defect.contains(a)).collect();
            let lip = p_lipschitz_bound(&LipschitzSpec {
                adjacency: td.adjacency.clone(),
                constants,
                subsystem,
            })?;
            serde_json::json!({
                "N": extension.big_n,
                "theta": format!("{}/{}", theta.numer(), theta.denom()),
                "theta_ok": ok,
                "theta_bound": format!("2/{}", extension.big_n - 5),
                "lambda": lambda,
                "l2": l2,
                "p_lipschitz_bound": lip,
            })
        }
        _ => bail!("give exactly one of --tree or --ext"),
    };
    let text = serde_json::to_string_pretty(&report)? + "\n";
    match out {
        Some(path) => write_text(path, &text)?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn witness(
    path: &Path,
    seeds: usize,
    cap_mult: usize,
    csv: Option<&Path>,
    seed: u64,
) -> Result<ExitCode> {
    let map = load_map(path)?;
    let td = map.transition();
    let arcs = map.arc_count();
    let cap = cap_mult.max(1) * arcs;
    let _ = default_witness_cap(arcs);
    let mut rng = sampling::rng(seed);
    let mut all_covered = true;
    for index in 0..seeds {
        let arc = sampling::random_index(&mut rng, arcs);
        let mut a = sampling::random_unit_rational(&mut rng);
        let mut b = sampling::random_unit_rational(&mut rng);
        if a == b {
            b = (a.clone() + treedyn::rational::int(1)) / treedyn::rational::int(2);
        }
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        let seed_set = SegmentSet::segment(arcs, arc, a, b);
        let (outcome, trace) = exactness_witness(&map, &td, &seed_set, cap)?;
        match outcome {
            WitnessOutcome::CoveredIn(steps) => {
                println!("seed={index} arc={arc} covered_in={steps}")
            }
            WitnessOutcome::NotCovered { cap } => {
                println!("seed={index} arc={arc} not_covered cap={cap}");
                all_covered = false;
            }
        }
        if index == 0 {
            if let Some(csv_path) = csv {
                let mut rows = vec!["step,arcs_full,total_measure".to_string()];
                for step in &trace {
                    rows.push(format!(
                        "{},{},{:.9}",
                        step.step, step.arcs_full, step.total_measure
                    ));
                }
                write_text(csv_path, &(rows.join("\n") + "\n"))?;
            }
        }
    }
    Ok(if all_covered { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
