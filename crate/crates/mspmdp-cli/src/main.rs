//! `mspmdp`: solve instances, measure distances and print stability bounds.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mspmdp::bounds::{bound_report, ReportConfig};
use mspmdp::examples::{build_example, ExampleId};
use mspmdp::io::{fmt4, load_problem, save_problem, to_json_pretty};
use mspmdp::lipschitz::ConstantTable;
use mspmdp::metrics::{kantorovich_law, nested_distance, ot_distance, GroundCost};
use mspmdp::model::{derive_regularity, ProblemInstance};
use mspmdp::reproduce::{compare_markdown, compare_rows, reproduce, ReproduceConfig};
use mspmdp::solver::{solve, SolverConfig};
use mspmdp::stochastic::{build_exogenous_tree, Law, QuadratureRule, TreeSpec, UniformBox};
use mspmdp::Error;

#[derive(Parser)]
#[command(name = "mspmdp", version, about = "Stability analysis for multistage stochastic programs")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Markdown)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Markdown,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    Gauss,
    Midpoint,
}

#[derive(clap::Args, Clone, Copy)]
struct TreeArgs {
    /// Atoms per dimension and layer.
    #[arg(long, default_value_t = 3)]
    atoms: usize,
    /// Quadrature rule for continuous laws.
    #[arg(long, value_enum, default_value_t = Rule::Midpoint)]
    rule: Rule,
}

impl TreeArgs {
    fn solver(self) -> SolverConfig {
        let rule = match self.rule {
            Rule::Gauss => QuadratureRule::GaussLegendre,
            Rule::Midpoint => QuadratureRule::Midpoint,
        };
        SolverConfig {
            tree: TreeSpec::new(self.atoms, rule),
            ..SolverConfig::default()
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricKind {
    Kantorovich,
    Fm,
    Wasserstein,
    Nested,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and print its optimal value.
    ///
    /// INPUT is a JSON problem spec, an example id such as `4.2a`, or
    /// `perturbed:<id>` for the perturbed example.
    Solve {
        input: String,
        #[command(flatten)]
        tree: TreeArgs,
    },
    /// Distance between two laws, or between the processes of two instances
    /// for `nested`.
    ///
    /// Laws are `uniform(l,u)`, `uniform(l,u,kd)`, `dirac(x1;x2;...)` or a
    /// JSON file holding a law.
    Metric {
        #[arg(value_enum)]
        kind: MetricKind,
        a: String,
        b: String,
        /// Order p of the Fortet-Mourier metric or r of the Wasserstein metric.
        #[arg(long, default_value_t = 2.0)]
        order: f64,
        /// Atoms per dimension when a continuous law is discretized.
        #[arg(long, default_value_t = 20)]
        atoms: usize,
    },
    /// Print the Lipschitz constants derived from an instance.
    Constants { input: String },
    /// Bound-versus-gap report for a base and a perturbed instance.
    Bounds {
        base: String,
        perturbed: String,
        #[command(flatten)]
        tree: TreeArgs,
        /// Nested-distance comparison `L,beta`.
        #[arg(long, value_parser = parse_pair)]
        nested: Option<(f64, f64)>,
        /// Filtration comparison `L,r`.
        #[arg(long, value_parser = parse_pair)]
        filtration: Option<(f64, f64)>,
    },
    /// Recompute every reference value of a built-in example.
    Reproduce {
        example: String,
        /// Also write the base and perturbed problem specs to this directory.
        #[arg(long)]
        export_dir: Option<PathBuf>,
    },
    /// Compare the stagewise bound with the nested-distance and filtration
    /// bounds on the worked examples.
    Compare {
        #[arg(default_values_t = ["4.1".to_string(), "4.2a".to_string(), "4.2b".to_string()])]
        examples: Vec<String>,
    },
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected two numbers `a,b`")?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v}: {e}"));
    Ok((num(a)?, num(b)?))
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let usage = matches!(
            e,
            Error::InvalidInput(_)
                | Error::Json(_)
                | Error::SchemaVersion(_)
                | Error::UnknownExample(_)
                | Error::InvalidExponent(_)
                | Error::InvalidBox(_)
                | Error::InvalidDistribution(_)
                | Error::InvalidDimension { .. }
        );
        Failure {
            code: if usage { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn load_instance(arg: &str) -> Result<ProblemInstance, Failure> {
    if Path::new(arg).exists() {
        return Ok(load_problem(arg)?);
    }
    let (id, perturbed) = match arg.strip_prefix("perturbed:") {
        Some(rest) => (rest, true),
        None => (arg, false),
    };
    let id: ExampleId = id
        .parse()
        .map_err(|_| usage(format!("`{arg}` is neither a file nor an example id")))?;
    Ok(build_example(&id, perturbed)?.0)
}

fn parse_law(arg: &str) -> Result<Law, Failure> {
    if Path::new(arg).exists() {
        let text = std::fs::read_to_string(arg).map_err(|e| usage(format!("cannot read {arg}: {e}")))?;
        let law: Law = serde_json::from_str(&text).map_err(Error::from)?;
        law.validate()?;
        return Ok(law);
    }
    let s = arg.replace(' ', "");
    let bad = || usage(format!("cannot parse law `{arg}`"));
    let (head, body) = s.split_once('(').ok_or_else(bad)?;
    let body = body.strip_suffix(')').ok_or_else(bad)?;
    let num = |v: &str| v.parse::<f64>().map_err(|_| bad());
    match head {
        "uniform" => {
            let parts: Vec<&str> = body.split(',').collect();
            let dim = match parts.len() {
                2 => 1,
                3 => parts[2].trim_end_matches('d').parse::<usize>().map_err(|_| bad())?,
                _ => return Err(bad()),
            };
            Ok(Law::Uniform(UniformBox::cube(num(parts[0])?, num(parts[1])?, dim)?))
        }
        "dirac" => {
            let point = body.split(';').map(num).collect::<Result<Vec<_>, _>>()?;
            Ok(Law::Discrete(mspmdp::stochastic::DiscreteDistribution::dirac(point)?))
        }
        _ => Err(bad()),
    }
}

fn discrete(law: &Law, atoms: usize) -> Result<mspmdp::stochastic::DiscreteDistribution, Failure> {
    Ok(law.discretize(atoms, QuadratureRule::Midpoint)?)
}

fn emit_json(v: serde_json::Value) -> Result<String, Failure> {
    Ok(to_json_pretty(&v)?)
}

fn run(cli: Cli) -> Result<String, Failure> {
    let fmt = cli.format;
    match cli.command {
        Command::Solve { input, tree } => {
            let inst = load_instance(&input)?;
            let rep = solve(&inst, &tree.solver())?;
            if fmt == Format::Json {
                return emit_json(serde_json::json!({
                    "value": rep.value,
                    "first_stage_decision": rep.policy.get(0),
                    "stats": rep.stats,
                }));
            }
            let mut s = String::new();
            let name = inst.name.as_deref().unwrap_or(&input);
            if fmt == Format::Csv {
                let _ = writeln!(s, "instance,value\n{name},{}", mspmdp::io::round_sig(rep.value));
                return Ok(s);
            }
            let _ = writeln!(s, "instance: {name}");
            let _ = writeln!(s, "optimal value: {}", fmt4(rep.value));
            if let Some(x) = rep.policy.get(0) {
                let parts: Vec<String> = x.iter().map(|v| fmt4(*v)).collect();
                let _ = writeln!(s, "first-stage decision: ({})", parts.join(", "));
            }
            let _ = writeln!(
                s,
                "stage minimizations: {}, decision nodes: {}",
                rep.stats.stage_minimizations,
                rep.policy.decisions.len()
                    + rep.coordinates.iter().map(|c| c.policy.decisions.len()).sum::<usize>()
            );
            Ok(s)
        }
        Command::Metric {
            kind,
            a,
            b,
            order,
            atoms,
        } => {
            let (name, value) = match kind {
                MetricKind::Nested => {
                    let (pa, pb) = (load_instance(&a)?, load_instance(&b)?);
                    let spec = TreeSpec::new(atoms.min(6), QuadratureRule::Midpoint);
                    let d = nested_distance(
                        &build_exogenous_tree(&pa.exogenous, &spec)?,
                        &build_exogenous_tree(&pb.exogenous, &spec)?,
                    )?;
                    ("nested", d)
                }
                MetricKind::Kantorovich => ("kantorovich", kantorovich_law(&parse_law(&a)?, &parse_law(&b)?, atoms)?),
                MetricKind::Fm => {
                    let (p, q) = (discrete(&parse_law(&a)?, atoms)?, discrete(&parse_law(&b)?, atoms)?);
                    ("fortet_mourier", ot_distance(&p, &q, GroundCost::FortetMourier(order))?)
                }
                MetricKind::Wasserstein => {
                    let (p, q) = (discrete(&parse_law(&a)?, atoms)?, discrete(&parse_law(&b)?, atoms)?);
                    ("wasserstein", ot_distance(&p, &q, GroundCost::Power(order))?)
                }
            };
            Ok(match fmt {
                Format::Json => emit_json(serde_json::json!({ "metric": name, "value": value }))?,
                Format::Csv => format!("metric,value\n{name},{}\n", mspmdp::io::round_sig(value)),
                Format::Markdown => format!("{name}: {}\n", mspmdp::io::round_sig(value)),
            })
        }
        Command::Constants { input } => {
            let inst = load_instance(&input)?;
            let table = ConstantTable::compute(&derive_regularity(&inst)?)?;
            if fmt == Format::Json {
                return emit_json(serde_json::to_value(&table).map_err(Error::from)?);
            }
            let mut rows: Vec<(String, f64)> = vec![
                ("L_theta".into(), table.exogenous_global.l_theta),
                ("L_Sigma".into(), table.exogenous_global.l_sigma),
                ("L_X".into(), table.exogenous_global.l_x),
            ];
            for t in 1..table.feasible_set.l_x.len() {
                rows.push((format!("L_X,{t}"), table.feasible_set.l_x[t]));
            }
            let l = &table.value_function.l;
            for (t, v) in l.iter().enumerate().take(l.len() - 1).skip(1) {
                rows.push((format!("L_{t}"), *v));
            }
            for t in 1..table.endogenous.l_hat.len() {
                rows.push((format!("Lhat_{t}"), table.endogenous.l_hat[t]));
            }
            if let Some(sw) = &table.stagewise {
                for t in 1..sw.l_xi.len() {
                    rows.push((format!("L_v,{t}"), sw.l_v[t]));
                    rows.push((format!("L_xi,{t}"), sw.l_xi[t]));
                }
            }
            let mut s = String::new();
            if fmt == Format::Csv {
                s.push_str("constant,value\n");
                for (k, v) in rows {
                    let _ = writeln!(s, "{k},{}", mspmdp::io::round_sig(v));
                }
            } else {
                s.push_str("| constant | value |\n|---|---|\n");
                for (k, v) in rows {
                    let _ = writeln!(s, "| {k} | {} |", fmt4(v));
                }
            }
            Ok(s)
        }
        Command::Bounds {
            base,
            perturbed,
            tree,
            nested,
            filtration,
        } => {
            let cfg = ReportConfig {
                solver: tree.solver(),
                nested: nested.map(|(l, b)| (l, b, 6)),
                filtration,
                ..ReportConfig::default()
            };
            let rep = bound_report(&load_instance(&base)?, &load_instance(&perturbed)?, &cfg)?;
            Ok(match fmt {
                Format::Json => rep.to_json()?,
                Format::Markdown => rep.to_markdown(),
                Format::Csv => rep.to_csv(),
            })
        }
        Command::Reproduce { example, export_dir } => {
            let id: ExampleId = example.parse()?;
            if let Some(dir) = export_dir {
                std::fs::create_dir_all(&dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
                for (p, file) in [(false, "base.json"), (true, "perturbed.json")] {
                    save_problem(&build_example(&id, p)?.0, dir.join(file))?;
                }
            }
            let rep = reproduce(&id, &ReproduceConfig::default())?;
            let out = match fmt {
                Format::Json => rep.to_json()?,
                Format::Markdown => rep.to_markdown(),
                Format::Csv => rep.to_csv(),
            };
            if rep.passed() {
                Ok(out)
            } else {
                print!("{out}");
                Err(Failure {
                    code: 1,
                    message: format!("example {id}: some values were not reproduced"),
                })
            }
        }
        Command::Compare { examples } => {
            let cfg = ReproduceConfig::default();
            let reps = examples
                .iter()
                .map(|e| Ok(reproduce(&e.parse()?, &cfg)?))
                .collect::<Result<Vec<_>, Failure>>()?;
            let rows = compare_rows(&reps);
            Ok(match fmt {
                Format::Json => emit_json(serde_json::to_value(&rows).map_err(Error::from)?)?,
                Format::Markdown => compare_markdown(&rows),
                Format::Csv => {
                    let mut s = String::from("example,gap,stagewise,nested,filtration,verdict\n");
                    let opt = |v: Option<f64>| v.map_or(String::new(), |x| mspmdp::io::round_sig(x).to_string());
                    for r in rows {
                        let _ = writeln!(
                            s,
                            "{},{},{},{},{},{}",
                            r.example,
                            mspmdp::io::round_sig(r.gap),
                            mspmdp::io::round_sig(r.stagewise),
                            opt(r.nested),
                            opt(r.filtration),
                            r.verdict
                        );
                    }
                    s
                }
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            if !out.ends_with('\n') {
                println!();
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
