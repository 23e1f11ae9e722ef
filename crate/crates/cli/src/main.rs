use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use impulsegap::brackets::{BracketAssignment, FormalBracket};
use impulsegap::cones::{
    clarke_tangent_membership_estimate, conic_hull, polar, proximal_normal_membership, qdq_certificate,
    transversality_report, PolyhedralCone, SetDescriptor,
};
use impulsegap::example::{example_4_4_report, example_scenario, ExampleConfig};
use impulsegap::extremality::{check_extremal, search_multipliers, CheckConfig, Classification, MultiplierSet, SearchConfig};
use impulsegap::fields::VectorFieldExpr;
use impulsegap::processes::{
    distance_d, distance_dinf, embed, extended_from_tsv, extended_to_tsv, integrate_extended, integrate_strict,
    strict_to_tsv, unembed, ExtendedProcess, PiecewiseControl, Scenario,
};

#[derive(Parser)]
#[command(name = "impulsegap", version, about = "Impulsive control processes, target cones and extremality checks")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// Scenario file (JSON).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Directory for report and trajectory files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// RK4 steps per unit of horizon.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Overrides the Hamiltonian tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    max_bracket_length: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a piecewise-constant control and print the process as TSV.
    Simulate {
        /// Control JSON: {"breakpoints": [...], "values": [[...], ...]}.
        #[arg(long)]
        control: String,
        /// Treat the control as a strict-sense control `u` instead of `(w0, w)`.
        #[arg(long)]
        strict: bool,
    },
    /// Embed a strict-sense process and check the round trip.
    Embed {
        #[arg(long)]
        control: String,
    },
    /// Print `d` and `d_inf` between two process TSV files.
    Distance { a: PathBuf, b: PathBuf },
    /// Evaluate the extremality conditions for given multipliers.
    CheckExtremal {
        #[arg(long)]
        process: PathBuf,
        /// {"p0": .., "p_terminal": [..], "pi": .., "lambda": ..}
        #[arg(long)]
        multipliers: String,
        /// Cone in (t, x) space; defaults to the Clarke tangent cone of the target.
        #[arg(long)]
        k_cone: Option<String>,
    },
    /// Search for multipliers and classify the process.
    SearchMultipliers {
        #[arg(long)]
        process: PathBuf,
        #[arg(long)]
        k_cone: Option<String>,
    },
    #[command(subcommand)]
    Bracket(BracketCommand),
    #[command(subcommand)]
    Cones(ConesCommand),
    /// Reproduce the bundled gap example end to end.
    #[command(name = "example-4-4")]
    Example44 {
        /// Comma-separated radii of the gap family.
        #[arg(long, value_delimiter = ',', default_value = "1,0.5,0.25,0.125")]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
    },
}

#[derive(Subcommand)]
enum BracketCommand {
    Parse { bracket: String },
    Length { bracket: String },
    Switch { bracket: String },
    /// Required class of each letter for a `C^k` pair.
    Smoothness {
        bracket: String,
        #[arg(long, default_value_t = 0)]
        k: u32,
    },
    /// Evaluate with fields `[["f1", "f2"], ...]` assigned to `X1, X2, ...`.
    Eval {
        bracket: String,
        #[arg(long)]
        fields: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        at: Vec<f64>,
    },
}

#[derive(Subcommand)]
enum ConesCommand {
    Polar {
        #[arg(long)]
        cone: String,
    },
    Hull {
        /// JSON list of vectors.
        #[arg(long)]
        vectors: String,
    },
    Transversality {
        #[arg(long)]
        k1: String,
        #[arg(long)]
        k2: String,
    },
    Project {
        #[arg(long)]
        cone: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Vec<f64>,
    },
    /// Clarke tangent cone of a set at a point.
    Clarke {
        #[arg(long)]
        set: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Vec<f64>,
        /// Also estimate membership of this direction by sampling.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        direction: Option<Vec<f64>>,
    },
    Qdq {
        #[arg(long)]
        set: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05,0.025")]
        ladder: Vec<f64>,
        #[arg(long, default_value_t = 400)]
        samples: usize,
    },
    Proximal {
        #[arg(long)]
        set: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        eta: Vec<f64>,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
    },
}

enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

impl Outcome {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

type CliResult<T> = Result<T, String>;

fn input<E: std::fmt::Display>(context: &str) -> impl Fn(E) -> String + '_ {
    move |e| format!("{context}: {e}")
}

/// Inline JSON, or the contents of the named file.
fn json_arg<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> CliResult<T> {
    let body = if Path::new(text).is_file() {
        std::fs::read_to_string(text).map_err(input(what))?
    } else {
        text.to_string()
    };
    serde_json::from_str(&body).map_err(input(what))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConeSpec {
    dim: usize,
    generators: Option<Vec<Vec<f64>>>,
    halfspaces: Option<Vec<Vec<f64>>>,
}

fn cone_arg(text: &str) -> CliResult<PolyhedralCone> {
    let spec: ConeSpec = json_arg(text, "cone")?;
    let cone = match (spec.generators, spec.halfspaces) {
        (Some(g), Some(h)) => PolyhedralCone::from_both(spec.dim, g, h),
        (Some(g), None) => PolyhedralCone::from_generators(spec.dim, g),
        (None, Some(h)) => PolyhedralCone::from_halfspaces(spec.dim, h),
        (None, None) => Err(impulsegap::Error::InvalidArgument(
            "cone needs generators or halfspaces".into(),
        )),
    };
    cone.map_err(input("cone"))
}

#[derive(Serialize)]
struct ConeOut {
    dim: usize,
    generators: Vec<Vec<f64>>,
    halfspaces: Vec<Vec<f64>>,
}

fn cone_out(k: &PolyhedralCone) -> CliResult<ConeOut> {
    Ok(ConeOut {
        dim: k.dim(),
        generators: k.generators().map_err(input("cone"))?.to_vec(),
        halfspaces: k.halfspaces().map_err(input("cone"))?.to_vec(),
    })
}

fn set_arg(text: &str) -> CliResult<SetDescriptor> {
    let s: SetDescriptor = json_arg(text, "set")?;
    s.validate().map_err(input("set"))?;
    Ok(s)
}

fn load_scenario(g: &Global) -> CliResult<Scenario> {
    let mut sc = match &g.scenario {
        Some(path) => Scenario::load(path).map_err(input(&path.display().to_string()))?,
        None => return Err("--scenario is required".into()),
    };
    apply_overrides(&mut sc, g);
    Ok(sc)
}

fn apply_overrides(sc: &mut Scenario, g: &Global) {
    if let Some(n) = g.grid {
        sc.integrator.rel_step = 1.0 / n.max(1) as f64;
        sc.integrator.max_step = None;
    }
    if let Some(t) = g.tol {
        sc.tolerances.hamiltonian = t;
    }
    if let Some(s) = g.seed {
        sc.seed = s;
    }
    if let Some(l) = g.max_bracket_length {
        sc.max_bracket_length = l;
    }
}

fn load_process(path: &Path) -> CliResult<ExtendedProcess> {
    let text = std::fs::read_to_string(path).map_err(input(&path.display().to_string()))?;
    extended_from_tsv(&text).map_err(input(&path.display().to_string()))
}

fn default_k_cone(sc: &Scenario, z: &ExtendedProcess, given: Option<&String>) -> CliResult<PolyhedralCone> {
    match given {
        Some(text) => cone_arg(text),
        None => sc
            .target
            .clarke_tangent_cone(&z.final_point())
            .map_err(input("target cone at the final point")),
    }
}

/// Prints `text` and writes it to `<out>/<name>` when `--out` is set.
fn emit(g: &Global, name: &str, text: &str) -> CliResult<()> {
    print!("{text}");
    if !text.ends_with('\n') {
        println!();
    }
    if let Some(dir) = &g.out {
        std::fs::create_dir_all(dir).map_err(input("--out"))?;
        std::fs::write(dir.join(name), text).map_err(input("--out"))?;
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable report");
    s.push('\n');
    s
}

fn run(cli: Cli) -> CliResult<Outcome> {
    let g = &cli.global;
    match &cli.command {
        Command::Simulate { control, strict } => {
            let sc = load_scenario(g)?;
            let c: PiecewiseControl = json_arg(control, "control")?;
            let c = PiecewiseControl::new(c.breakpoints, c.values).map_err(input("control"))?;
            let tsv = if *strict {
                strict_to_tsv(&integrate_strict(&sc, &c).map_err(input("simulate"))?)
            } else {
                extended_to_tsv(&integrate_extended(&sc, &c).map_err(input("simulate"))?)
            };
            emit(g, "process.tsv", &tsv)?;
            Ok(Outcome::Pass)
        }
        Command::Embed { control } => {
            let sc = load_scenario(g)?;
            let c: PiecewiseControl = json_arg(control, "control")?;
            let c = PiecewiseControl::new(c.breakpoints, c.values).map_err(input("control"))?;
            let p = integrate_strict(&sc, &c).map_err(input("embed"))?;
            let z = embed(&p);
            let back = unembed(&z, sc.tolerances.w0_min).map_err(input("embed"))?;
            let mut residual: f64 = (back.horizon - p.horizon).abs();
            for (a, b) in back.x.iter().zip(&p.x) {
                residual = residual.max(impulsegap::linalg::dist(a, b));
            }
            for (a, b) in back.v.iter().zip(&p.v) {
                residual = residual.max((a - b).abs());
            }
            emit(g, "embedded.tsv", &extended_to_tsv(&z))?;
            eprintln!("round trip residual {residual:.3e}");
            Ok(Outcome::from_bool(residual <= sc.tolerances.membership))
        }
        Command::Distance { a, b } => {
            let (za, zb) = (load_process(a)?, load_process(b)?);
            let text = format!("d = {}\nd_inf = {}\n", distance_d(&za, &zb), distance_dinf(&za, &zb));
            emit(g, "distance.txt", &text)?;
            Ok(Outcome::Pass)
        }
        Command::CheckExtremal {
            process,
            multipliers,
            k_cone,
        } => {
            let sc = load_scenario(g)?;
            let z = load_process(process)?;
            let m: MultiplierSet = json_arg(multipliers, "multipliers")?;
            let k = default_k_cone(&sc, &z, k_cone.as_ref())?;
            let report = check_extremal(&sc, &z, &m, &k, &CheckConfig::from_scenario(&sc)).map_err(input("check-extremal"))?;
            emit(g, "extremality.json", &to_json(&report))?;
            Ok(Outcome::from_bool(report.pass))
        }
        Command::SearchMultipliers { process, k_cone } => {
            let sc = load_scenario(g)?;
            let z = load_process(process)?;
            let k = default_k_cone(&sc, &z, k_cone.as_ref())?;
            let report = search_multipliers(&sc, &z, &k, &SearchConfig::from_scenario(&sc))
                .map_err(input("search-multipliers"))?;
            emit(g, "multipliers.json", &to_json(&report))?;
            Ok(match report.classification {
                Classification::Normal | Classification::Abnormal => Outcome::Pass,
                Classification::NoMultipliers => Outcome::Fail,
                Classification::Inconclusive => Outcome::Inconclusive,
            })
        }
        Command::Bracket(cmd) => run_bracket(g, cmd),
        Command::Cones(cmd) => run_cones(g, cmd),
        Command::Example44 { radii, samples } => {
            let sc = match &g.scenario {
                Some(_) => load_scenario(g)?,
                None => {
                    let mut sc = example_scenario();
                    apply_overrides(&mut sc, g);
                    sc
                }
            };
            for r in radii {
                if !(*r > 0.0) {
                    return Err(format!("radius must be positive, got {r}"));
                }
            }
            let cfg = ExampleConfig {
                grid: None,
                probe_samples: *samples,
                seed: sc.seed,
                ..ExampleConfig::default()
            };
            let report = example_4_4_report(&sc, radii, &cfg).map_err(input("example-4-4"))?;
            emit(g, "example_4_4.json", &to_json(&report))?;
            let reference_ok = report.reference.feasible
                && report.reference.final_point_error <= 1e-6
                && report.reference.cost_error <= 1e-9
                && report.reference.probe.feasible_found;
            let family_ok = report.gap_family.iter().filter(|e| e.feasible).all(|e| {
                e.below_reference
                    && e.energy_error <= 1e-8
                    && e.d_error <= 1e-10
                    && e.probe.as_ref().is_none_or(|p| !p.feasible_found)
            });
            Ok(Outcome::from_bool(
                reference_ok && family_ok && report.extremality.classification == Classification::Abnormal,
            ))
        }
    }
}

fn run_bracket(g: &Global, cmd: &BracketCommand) -> CliResult<Outcome> {
    let parse = |text: &str| FormalBracket::parse(text).map_err(input("bracket"));
    let text = match cmd {
        BracketCommand::Parse { bracket } => format!("{}\n", parse(bracket)?),
        BracketCommand::Length { bracket } => format!("{}\n", parse(bracket)?.length()),
        BracketCommand::Switch { bracket } => format!("{}\n", parse(bracket)?.switch_number()),
        BracketCommand::Smoothness { bracket, k } => {
            let b = parse(bracket)?;
            let classes = b.required_smoothness(*k);
            let mut s = String::new();
            for (letter, c) in &classes {
                s.push_str(&format!("X{letter}\t{c}\n"));
            }
            if !b.rule_verified() {
                s.push_str("# rule not verified for brackets longer than 4\n");
            }
            s
        }
        BracketCommand::Eval { bracket, fields, at } => {
            let b = parse(bracket)?;
            let texts: Vec<Vec<String>> = json_arg(fields, "fields")?;
            let fields = texts
                .iter()
                .map(|t| VectorFieldExpr::parse(t))
                .collect::<Result<Vec<_>, _>>()
                .map_err(input("fields"))?;
            let a = BracketAssignment::new(b, fields).map_err(input("bracket"))?;
            let v = a.eval(at).map_err(input("eval"))?;
            format!("{}\n", serde_json::to_string(&v).expect("numbers"))
        }
    };
    emit(g, "bracket.txt", &text)?;
    Ok(Outcome::Pass)
}

fn run_cones(g: &Global, cmd: &ConesCommand) -> CliResult<Outcome> {
    let seed = g.seed.unwrap_or(0);
    let (text, outcome) = match cmd {
        ConesCommand::Polar { cone } => {
            let k = polar(&cone_arg(cone)?).map_err(input("polar"))?;
            (to_json(&cone_out(&k)?), Outcome::Pass)
        }
        ConesCommand::Hull { vectors } => {
            let vs: Vec<Vec<f64>> = json_arg(vectors, "vectors")?;
            let k = conic_hull(&vs).map_err(input("hull"))?;
            (to_json(&cone_out(&k)?), Outcome::Pass)
        }
        ConesCommand::Transversality { k1, k2 } => {
            let r = transversality_report(&cone_arg(k1)?, &cone_arg(k2)?).map_err(input("transversality"))?;
            let ok = r.transversal;
            (to_json(&r), Outcome::from_bool(ok))
        }
        ConesCommand::Project { cone, point } => {
            let k = cone_arg(cone)?;
            if point.len() != k.dim() {
                return Err(format!("point has {} entries, cone dimension is {}", point.len(), k.dim()));
            }
            (to_json(&k.project(point)), Outcome::Pass)
        }
        ConesCommand::Clarke { set, point, direction } => {
            let s = set_arg(set)?;
            let k = s.clarke_tangent_cone(point).map_err(input("clarke"))?;
            #[derive(Serialize)]
            struct Out {
                cone: ConeOut,
                #[serde(skip_serializing_if = "Option::is_none")]
                estimate: Option<impulsegap::cones::TangentEstimate>,
            }
            let estimate = match direction {
                Some(v) => Some(
                    clarke_tangent_membership_estimate(&s, point, v, &[1e-1, 1e-2, 1e-3, 1e-4], 200, seed)
                        .map_err(input("clarke"))?,
                ),
                None => None,
            };
            (
                to_json(&Out {
                    cone: cone_out(&k)?,
                    estimate,
                }),
                Outcome::Pass,
            )
        }
        ConesCommand::Qdq {
            set,
            point,
            ladder,
            samples,
        } => {
            let s = set_arg(set)?;
            let c = qdq_certificate(&s, point, ladder, *samples, seed).map_err(input("qdq"))?;
            let outcome = match c.verdict {
                impulsegap::cones::QdqVerdict::Supported => Outcome::Pass,
                impulsegap::cones::QdqVerdict::Inconclusive => Outcome::Inconclusive,
            };
            (to_json(&c), outcome)
        }
        ConesCommand::Proximal {
            set,
            point,
            eta,
            r,
            samples,
        } => {
            let s = set_arg(set)?;
            let v = proximal_normal_membership(&s, point, eta, *r, *samples, seed).map_err(input("proximal"))?;
            let ok = v.member;
            (to_json(&v), Outcome::from_bool(ok))
        }
    };
    emit(g, "cones.json", &text)?;
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Ok(Outcome::Inconclusive) => ExitCode::from(3),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
