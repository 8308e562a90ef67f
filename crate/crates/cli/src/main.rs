mod report;

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_traits::Zero;
use serde_json::{json, Value};

use relcausal::audit::{
    ratio_identity_check_with_tol, screening_check, CommonCauseDecomposition, InputPrior,
};
use relcausal::bell::tuples;
use relcausal::constraints::check_with_tol;
use relcausal::constructions::{
    example_mermin_box, mermin_attack_box, monogamy_box, pr_box, qkd_attack_box, rcbl_svetlichny_box,
};
use relcausal::geometry::{
    classify_three_party_1p1, dual_signal_possible, e_region_contains, escape_search, four_party_configuration,
    subset_escapes, InfluenceModel, SpacetimeEvent,
};
use relcausal::inequalities::{by_name, evaluate_checked, mermin_constraints, BellFunctional, NAMES};
use relcausal::lp::{bl_membership, maximize_over_polytope, minimize_over_polytope, rcbl_maximize};
use relcausal::quantum::{
    chained_quantum_box, chained_quantum_value, mermin_quantum_box, rcbl_quantum_box,
};
use relcausal::{AnyBox, ConstraintRegime, Error, ProbabilityBox, Scalar};

use report::{Format, Report};

#[derive(Parser)]
#[command(name = "relcausal", version, about = "Relativistic causality constraints on multi-party boxes")]
struct Cli {
    /// Output format for reports.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    /// Tolerance for float boxes (default 1e-9); rational boxes stay exact.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct, evaluate and check boxes.
    #[command(subcommand, name = "box")]
    Box(BoxCmd),
    /// Bell functionals.
    #[command(subcommand)]
    Ineq(IneqCmd),
    /// Spacetime configurations.
    #[command(subcommand)]
    Geometry(GeometryCmd),
    /// Exact optimization and membership.
    #[command(subcommand)]
    Lp(LpCmd),
    /// Boxes from quantum states.
    #[command(subcommand)]
    Quantum(QuantumCmd),
    /// Bayes audits of the middle party's input.
    #[command(subcommand)]
    Audit(AuditCmd),
}

#[derive(Args)]
struct BoxInput {
    /// Box JSON file; stdin when absent or "-".
    #[arg(long = "box")]
    path: Option<PathBuf>,
}

#[derive(Args)]
struct Output {
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RegimeArgs {
    /// ns, rc-line, rc3 (three collinear parties, middle in the outer future) or custom.
    #[arg(long, default_value = "ns")]
    regime: String,
    /// Party order for rc-line, e.g. 0,1,2.
    #[arg(long, value_delimiter = ',')]
    order: Option<Vec<usize>>,
    /// Protected subsets for custom, e.g. "0;1;0,1".
    #[arg(long)]
    subsets: Option<String>,
}

#[derive(Args)]
struct FunctionalArgs {
    /// Named functional (see `ineq list`).
    #[arg(long, alias = "name")]
    ineq: Option<String>,
    /// Input count for the chained family.
    #[arg(long)]
    m: Option<usize>,
    /// Functional JSON file instead of a name.
    #[arg(long)]
    functional: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BoxCmd {
    /// Build a named box.
    Construct {
        /// pr, example, monogamy, svetlichny, qkd, mermin-attack
        #[arg(long)]
        name: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        /// Target input for mermin-attack as a bit string, e.g. 11111.
        #[arg(long)]
        target: Option<String>,
        #[command(flatten)]
        out: Output,
    },
    /// Evaluate a functional, or the Mermin constraint set.
    Eval {
        #[command(flatten)]
        functional: FunctionalArgs,
        #[command(flatten)]
        input: BoxInput,
    },
    /// Check marginal constraints; exit 1 on violation.
    Check {
        #[command(flatten)]
        regime: RegimeArgs,
        #[command(flatten)]
        input: BoxInput,
    },
    /// Marginal table of a party subset.
    Marginal {
        #[arg(long, value_delimiter = ',', required = true)]
        subset: Vec<usize>,
        #[command(flatten)]
        input: BoxInput,
    },
}

#[derive(Subcommand)]
enum IneqCmd {
    /// Names of the built-in functionals.
    List,
    /// Evaluate a functional on a box.
    Eval {
        #[command(flatten)]
        functional: FunctionalArgs,
        #[command(flatten)]
        input: BoxInput,
    },
    /// Coefficient JSON of a functional.
    Show {
        #[command(flatten)]
        functional: FunctionalArgs,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand)]
enum GeometryCmd {
    /// Regime for three events in 1+1 dimensions.
    Classify {
        /// JSON list of {"t": .., "r": [..]}.
        #[arg(long)]
        events: PathBuf,
        /// Light speed.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
    /// Is E in the region from which no influence reaches both A and B?
    Region {
        /// JSON list of three events A, B, E.
        #[arg(long)]
        events: PathBuf,
        /// Influence speed.
        #[arg(long)]
        u: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
    /// Can a subset's joint future escape one party's future?
    Escape {
        /// JSON events; omit to use the four-party configuration at --v.
        #[arg(long)]
        events: Option<PathBuf>,
        #[arg(long)]
        v: Option<f64>,
        /// Subset indices; every (n−1)-subset against the rest when absent.
        #[arg(long, value_delimiter = ',')]
        subset: Option<Vec<usize>>,
        /// Index of the party whose future is to be escaped.
        #[arg(long)]
        target: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
}

#[derive(Subcommand)]
enum LpCmd {
    /// Maximize (or minimize) a functional over a constraint polytope.
    Maximize {
        #[command(flatten)]
        functional: FunctionalArgs,
        /// ns, rc-line, rc3, custom, or rcbl (bilocal with RC terms).
        #[arg(long, alias = "set", default_value = "ns")]
        regime: String,
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<usize>>,
        #[arg(long)]
        subsets: Option<String>,
        #[arg(long)]
        minimize: bool,
    },
    /// Distance to a set; exit 1 when outside.
    Member {
        /// Only "bl" (bilocal) is supported.
        #[arg(long, default_value = "bl")]
        set: String,
        #[command(flatten)]
        input: BoxInput,
    },
}

#[derive(Subcommand)]
enum QuantumCmd {
    /// Box of a preset experiment.
    Box {
        /// mermin, chained or rcbl
        #[arg(long)]
        preset: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[command(flatten)]
        out: Output,
    },
    /// Functional values of a preset experiment.
    Value {
        #[arg(long)]
        preset: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
    },
}

#[derive(Subcommand)]
enum AuditCmd {
    /// Posterior/likelihood ratio identity for the middle input.
    Ratio {
        #[command(flatten)]
        input: BoxInput,
        /// "uniform" or a JSON file with one weight list per party.
        #[arg(long, default_value = "uniform")]
        priors: String,
    },
    /// Verify a common-cause decomposition of a pair.
    Screening {
        #[command(flatten)]
        input: BoxInput,
        #[arg(long, value_delimiter = ',', default_value = "0,2")]
        pair: Vec<usize>,
        /// Spectator input.
        #[arg(long, default_value_t = 0)]
        y: usize,
        /// JSON {"weights": [..], "components": [box, ..]}.
        #[arg(long)]
        decomposition: PathBuf,
    },
}

type CliResult<T> = std::result::Result<T, Box<dyn std::error::Error>>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(failed) => ExitCode::from(u8::from(failed)),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> CliResult<bool> {
    let (report, out) = match &cli.command {
        Command::Box(cmd) => box_cmd(cli, cmd)?,
        Command::Ineq(cmd) => ineq_cmd(cli, cmd)?,
        Command::Geometry(cmd) => (geometry_cmd(cmd)?, None),
        Command::Lp(cmd) => (lp_cmd(cli, cmd)?, None),
        Command::Quantum(cmd) => quantum_cmd(cmd)?,
        Command::Audit(cmd) => (audit_cmd(cli, cmd)?, None),
    };
    report.emit(cli.format, out.as_deref())?;
    Ok(report.failed)
}

fn read_text(path: Option<&Path>) -> CliResult<String> {
    let mut text = String::new();
    match path {
        Some(p) if p != Path::new("-") => text = std::fs::read_to_string(p)?,
        _ => {
            std::io::stdin().read_to_string(&mut text)?;
        }
    }
    Ok(text)
}

fn read_json(path: &Path) -> CliResult<Value> {
    Ok(serde_json::from_str(&read_text(Some(path))?)?)
}

fn read_box(input: &BoxInput) -> CliResult<AnyBox> {
    Ok(AnyBox::parse(&read_text(input.path.as_deref())?)?)
}

fn tol_for<T: Scalar>(cli: &Cli) -> f64 {
    if T::EXACT {
        0.0
    } else {
        cli.tol.unwrap_or(T::default_tol())
    }
}

/// Runs a generic body on either kind of box.
macro_rules! on_box {
    ($b:expr, |$x:ident| $body:expr) => {
        match $b {
            AnyBox::Rational($x) => $body,
            AnyBox::Float($x) => $body,
        }
    };
}

fn parse_subsets(s: &str) -> CliResult<Vec<Vec<usize>>> {
    s.split(';')
        .map(|part| part.split(',').map(|d| d.trim().parse::<usize>().map_err(Into::into)).collect())
        .collect()
}

fn regime(name: &str, order: &Option<Vec<usize>>, subsets: &Option<String>, parties: usize) -> CliResult<ConstraintRegime> {
    Ok(match name {
        "ns" => ConstraintRegime::FullNS,
        "rc-line" => ConstraintRegime::LineRC(order.clone().unwrap_or_else(|| (0..parties).collect())),
        "rc3" => ConstraintRegime::three_party_rc(),
        "custom" => {
            let s = subsets.as_deref().ok_or("custom regime needs --subsets")?;
            ConstraintRegime::Custom(parse_subsets(s)?)
        }
        other => return Err(format!("unknown regime {other:?}").into()),
    })
}

fn functional(args: &FunctionalArgs) -> CliResult<BellFunctional> {
    match (&args.ineq, &args.functional) {
        (_, Some(path)) => Ok(BellFunctional::from_json(&read_json(path)?)?),
        (Some(name), None) => Ok(by_name(name, args.m)?),
        (None, None) => Err("give --ineq NAME or --functional FILE".into()),
    }
}

fn box_cmd(cli: &Cli, cmd: &BoxCmd) -> CliResult<(Report, Option<PathBuf>)> {
    Ok(match cmd {
        BoxCmd::Construct { name, n, m, target, out } => {
            let b = match name.as_str() {
                "pr" => pr_box(),
                "example" => example_mermin_box(),
                "monogamy" => monogamy_box(),
                "svetlichny" => rcbl_svetlichny_box(),
                "qkd" => qkd_attack_box(m.unwrap_or(2))?,
                "mermin-attack" => {
                    let bits = target.as_deref().ok_or("mermin-attack needs --target")?;
                    let x: Vec<usize> = bits
                        .chars()
                        .map(|c| c.to_digit(2).map(|d| d as usize).ok_or("target must be a bit string"))
                        .collect::<Result<_, _>>()?;
                    mermin_attack_box(n.unwrap_or(x.len()), &x)?
                }
                other => return Err(format!("unknown box {other:?}").into()),
            };
            (box_report(&b), out.out.clone())
        }
        BoxCmd::Eval { functional: f, input } => (eval_report(cli, f, input)?, None),
        BoxCmd::Check { regime: r, input } => {
            let b = read_box(input)?;
            let reg = regime(&r.regime, &r.order, &r.subsets, b.scenario().parties())?;
            let report = on_box!(&b, |b| {
                let rep = check_with_tol(b, &reg, tol_for_box(cli, b))?;
                let rows: Vec<Vec<String>> = rep
                    .violations
                    .iter()
                    .map(|v| {
                        let subset: Vec<String> = v.subset.iter().map(|p| p.to_string()).collect();
                        vec![
                            subset.join(" "),
                            report::tuple(&v.a_s),
                            report::tuple(&v.x_s),
                            report::tuple(&v.x_c_other),
                            report::scalar(&v.discrepancy),
                        ]
                    })
                    .collect();
                let mut text = format!("{}\n", if rep.passes { "pass" } else { "fail" });
                for r in &rows {
                    text += &format!("subset {{{}}} a={} x_S={} x_c={}: {}\n", r[0], r[1], r[2], r[3], r[4]);
                }
                Report::new(rep.to_json(), text)
                    .table(&["subset", "a_s", "x_s", "x_c", "discrepancy"], rows)
                    .failed(!rep.passes)
            });
            (report, None)
        }
        BoxCmd::Marginal { subset, input } => {
            let b = read_box(input)?;
            let report = on_box!(&b, |b| marginal_report(b, subset)?);
            (report, None)
        }
    })
}

fn tol_for_box<T: Scalar>(cli: &Cli, _: &ProbabilityBox<T>) -> f64 {
    tol_for::<T>(cli)
}

fn box_report<T: Scalar>(b: &ProbabilityBox<T>) -> Report {
    let rows = b
        .support()
        .map(|(a, x, p)| vec![report::tuple(&a), report::tuple(&x), report::scalar(p)])
        .collect();
    Report::document(b.to_json()).table(&["a", "x", "p"], rows)
}

fn marginal_report<T: Scalar>(b: &ProbabilityBox<T>, subset: &[usize]) -> CliResult<Report> {
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let s = b.scenario();
    if sorted.iter().any(|&p| p >= s.parties()) {
        return Err(Error::InvalidArgument("party out of range".into()).into());
    }
    let table = b.marginal_table(&sorted);
    let radix: Vec<usize> = sorted.iter().map(|&p| s.outputs()[p]).collect();
    let outs: Vec<Vec<usize>> = tuples(&radix).collect();
    let mut rows = Vec::new();
    for (x, row) in tuples(s.inputs()).zip(&table) {
        for (a, p) in outs.iter().zip(row) {
            rows.push(vec![report::tuple(a), report::tuple(&x), report::scalar(p)]);
        }
    }
    let json = json!({
        "subset": sorted,
        "rows": rows.iter().map(|r| json!({"a": r[0], "x": r[1], "p": r[2]})).collect::<Vec<_>>(),
    });
    let text: String = rows.iter().map(|r| format!("P({}|{}) = {}\n", r[0], r[1], r[2])).collect();
    Ok(Report::new(json, text).table(&["a", "x", "p"], rows))
}

fn eval_report(cli: &Cli, args: &FunctionalArgs, input: &BoxInput) -> CliResult<Report> {
    let b = read_box(input)?;
    if args.ineq.as_deref() == Some("mermin") && args.functional.is_none() {
        return on_box!(&b, |b| {
            let set = mermin_constraints(b.scenario().parties())?;
            let bad = set.violations(b, tol_for_box(cli, b))?;
            let rows: Vec<Vec<String>> = bad.iter().map(|(x, c)| vec![report::tuple(x), report::scalar(c)]).collect();
            let mut text = format!("{}\n", if bad.is_empty() { "satisfied" } else { "violated" });
            for r in &rows {
                text += &format!("<{}> = {}\n", r[0], r[1]);
            }
            let json = json!({"satisfied": bad.is_empty(),
                              "violations": rows.iter().map(|r| json!({"x": r[0], "correlator": r[1]})).collect::<Vec<_>>()});
            Ok(Report::new(json, text).table(&["x", "correlator"], rows).failed(!bad.is_empty()))
        });
    }
    let f = functional(args)?;
    on_box!(&b, |b| {
        let e = evaluate_checked(&f, b)?;
        let value = report::scalar(&e.value);
        let mut text = format!("{value}\n");
        for w in &e.warnings {
            text += &format!("warning: {w}\n");
        }
        let json = json!({"functional": f.name, "value": e.value.to_json(), "warnings": e.warnings});
        Ok(Report::new(json, text).table(&["functional", "value"], vec![vec![f.name.clone(), value]]))
    })
}

fn ineq_cmd(cli: &Cli, cmd: &IneqCmd) -> CliResult<(Report, Option<PathBuf>)> {
    Ok(match cmd {
        IneqCmd::List => {
            let rows = NAMES.iter().map(|n| vec![n.to_string()]).collect();
            (Report::new(json!(NAMES), NAMES.join("\n")).table(&["name"], rows), None)
        }
        IneqCmd::Eval { functional, input } => (eval_report(cli, functional, input)?, None),
        IneqCmd::Show { functional: args, out } => {
            let f = functional(args)?;
            let s = f.scenario();
            let rows = f
                .coefficients()
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| {
                    let (a, x) = s.entry(k);
                    vec![report::tuple(&a), report::tuple(&x), report::rational(c)]
                })
                .collect();
            (Report::document(f.to_json()).table(&["a", "x", "coefficient"], rows), out.out.clone())
        }
    })
}

fn events(path: &Path) -> CliResult<Vec<SpacetimeEvent>> {
    Ok(SpacetimeEvent::list_from_json(&read_json(path)?)?)
}

fn geometry_cmd(cmd: &GeometryCmd) -> CliResult<Report> {
    match cmd {
        GeometryCmd::Classify { events: path, c } => {
            let ev = events(path)?;
            let [a, b, e] = ev.as_slice() else { return Err("classification needs exactly three events".into()) };
            let reg = classify_three_party_1p1([a, b, e], *c)?;
            let label = match &reg {
                ConstraintRegime::FullNS => "ns".to_string(),
                ConstraintRegime::Custom(s) => format!("rc {s:?}"),
                ConstraintRegime::LineRC(o) => format!("rc-line {o:?}"),
            };
            Ok(Report::new(reg.to_json(), label.clone()).table(&["regime"], vec![vec![label]]))
        }
        GeometryCmd::Region { events: path, u, c } => {
            let ev = events(path)?;
            let [a, b, e] = ev.as_slice() else { return Err("region needs events A, B, E".into()) };
            let model = InfluenceModel::new(*u, *c)?;
            let inside = e_region_contains(a, b, e, &model)?;
            let dual = dual_signal_possible(e, a, b, &model)?;
            let text = format!("in region: {inside}\ndual signal possible: {dual}");
            Ok(Report::new(json!({"in_region": inside, "dual_signal_possible": dual}), text)
                .table(&["in_region", "dual_signal_possible"], vec![vec![inside.to_string(), dual.to_string()]]))
        }
        GeometryCmd::Escape { events: path, v, subset, target, c } => {
            let ev = match (path, v) {
                (Some(p), _) => events(p)?,
                (None, Some(v)) => four_party_configuration(*v)?,
                (None, None) => return Err("give --events FILE or --v SPEED".into()),
            };
            let n = ev.len();
            let cases: Vec<(Vec<usize>, usize)> = match (subset, target) {
                (Some(s), Some(j)) => vec![(s.clone(), *j)],
                (None, None) => (0..n).map(|j| ((0..n).filter(|&i| i != j).collect(), j)).collect(),
                _ => return Err("--subset and --target go together".into()),
            };
            let mut rows = Vec::new();
            let mut docs = Vec::new();
            for (s, j) in cases {
                let escapes = subset_escapes(&ev, &s, j, *c)?;
                let grid = escape_search(&ev, &s, j, *c, 2)?;
                let label: Vec<String> = s.iter().map(|i| i.to_string()).collect();
                rows.push(vec![label.join(" "), j.to_string(), escapes.to_string(), report::float(grid.margin)]);
                docs.push(json!({"subset": s, "target": j, "escapes": escapes, "grid_margin": grid.margin, "grid_point": grid.point}));
            }
            let text: String = rows.iter().map(|r| format!("{{{}}} vs {}: {} (grid margin {})\n", r[0], r[1], r[2], r[3])).collect();
            Ok(Report::new(json!(docs), text).table(&["subset", "target", "escapes", "grid_margin"], rows))
        }
    }
}

fn lp_cmd(cli: &Cli, cmd: &LpCmd) -> CliResult<Report> {
    match cmd {
        LpCmd::Maximize { functional: args, regime: name, order, subsets, minimize } => {
            let f = functional(args)?;
            if name == "rcbl" {
                if *minimize {
                    return Err("rcbl supports maximization only".into());
                }
                let opt = rcbl_maximize(&f)?;
                let value = report::rational(&opt.value);
                let text = format!("{value}\nattained on {} with lone-party strategy {:?}", opt.family.label(), opt.strategy);
                return Ok(Report::new(opt.to_json(), text).table(&["value", "family"], vec![vec![value, opt.family.label().into()]]));
            }
            let reg = regime(name, order, subsets, f.scenario().parties())?;
            let opt = if *minimize { minimize_over_polytope(&f, &reg)? } else { maximize_over_polytope(&f, &reg)? };
            let value = report::rational(&opt.value);
            Ok(Report::new(opt.to_json(), value.clone()).table(&["value"], vec![vec![value]]))
        }
        LpCmd::Member { set, input } => {
            if set != "bl" {
                return Err(format!("unsupported set {set:?}; only bl").into());
            }
            let b = read_box(input)?;
            let res = on_box!(&b, |b| bl_membership(b, bl_tolerance(cli, b))?);
            let distance = report::rational(&res.distance);
            let text = format!("inside: {}\ndistance: {} ({})", res.inside, distance, report::float(res.distance.as_f64()));
            Ok(Report::new(res.to_json(), text)
                .table(&["inside", "distance"], vec![vec![res.inside.to_string(), distance]])
                .failed(!res.inside))
        }
    }
}

/// Exact boxes are tested exactly; float boxes use `--tol` or the
/// library default.
fn bl_tolerance<T: Scalar>(cli: &Cli, _: &ProbabilityBox<T>) -> Option<f64> {
    if T::EXACT {
        None
    } else {
        cli.tol
    }
}

fn quantum_cmd(cmd: &QuantumCmd) -> CliResult<(Report, Option<PathBuf>)> {
    match cmd {
        QuantumCmd::Box { preset, n, m, out } => {
            let b = match preset.as_str() {
                "mermin" => mermin_quantum_box(n.unwrap_or(3))?,
                "chained" => chained_quantum_box(m.unwrap_or(2))?,
                "rcbl" => rcbl_quantum_box(),
                other => return Err(format!("unknown preset {other:?}").into()),
            };
            Ok((box_report(&b), out.out.clone()))
        }
        QuantumCmd::Value { preset, n, m } => {
            let mut rows: Vec<Vec<String>> = Vec::new();
            match preset.as_str() {
                "chained" => {
                    let m = m.unwrap_or(2);
                    let (direct, closed) = chained_quantum_value(m)?;
                    rows.push(vec![format!("chained-{m}"), report::float(direct)]);
                    rows.push(vec!["closed-form".into(), report::float(closed)]);
                }
                "rcbl" => {
                    let b = rcbl_quantum_box();
                    for name in ["rcbl", "svetlichny"] {
                        rows.push(vec![name.into(), report::float(relcausal::evaluate(&by_name(name, None)?, &b)?)]);
                    }
                }
                "mermin" => {
                    let n = n.unwrap_or(3);
                    let b = mermin_quantum_box(n)?;
                    for (x, _) in mermin_constraints(n)?.constraints {
                        rows.push(vec![format!("<{}>", report::tuple(&x)), report::float(b.correlator(&x)?)]);
                    }
                }
                other => return Err(format!("unknown preset {other:?}").into()),
            }
            let json = json!(rows.iter().map(|r| json!({"quantity": r[0], "value": r[1]})).collect::<Vec<_>>());
            let text: String = rows.iter().map(|r| format!("{}: {}\n", r[0], r[1])).collect();
            Ok((Report::new(json, text).table(&["quantity", "value"], rows), None))
        }
    }
}

fn priors<T: Scalar>(source: &str, scenario: &relcausal::Scenario) -> CliResult<InputPrior<T>> {
    if source == "uniform" {
        return Ok(InputPrior::uniform(scenario));
    }
    let v = read_json(Path::new(source))?;
    let lists = v.as_array().ok_or("priors must be a list of per-party weight lists")?;
    let per_party = lists
        .iter()
        .map(|l| {
            l.as_array()
                .ok_or_else(|| "priors must be a list of per-party weight lists".into())
                .and_then(|w| w.iter().map(|e| T::from_json(e).map_err(Into::into)).collect::<CliResult<Vec<T>>>())
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(InputPrior::new(scenario, per_party)?)
}

fn audit_cmd(cli: &Cli, cmd: &AuditCmd) -> CliResult<Report> {
    match cmd {
        AuditCmd::Ratio { input, priors: source } => {
            let b = read_box(input)?;
            on_box!(&b, |b| {
                let p = priors(source, b.scenario())?;
                let rep = ratio_identity_check_with_tol(b, &p, tol_for_box(cli, b))?;
                let rows: Vec<Vec<String>> = rep
                    .cells
                    .iter()
                    .map(|c| {
                        vec![c.x.to_string(), c.y.to_string(), c.z.to_string(), c.a.to_string(), c.c.to_string(),
                             report::scalar(&c.posterior_ratio), report::scalar(&c.likelihood_ratio)]
                    })
                    .collect();
                let text = format!(
                    "identity holds: {}\n{} cells, {} with ratio != 1, {} skipped",
                    rep.holds,
                    rep.cells.len(),
                    rep.informative_cells(tol_for_box(cli, b)),
                    rep.skipped.len()
                );
                Ok(Report::new(rep.to_json(), text)
                    .table(&["x", "y", "z", "a", "c", "posterior_ratio", "likelihood_ratio"], rows)
                    .failed(!rep.holds))
            })
        }
        AuditCmd::Screening { input, pair, y, decomposition } => {
            let [i, j] = pair.as_slice() else { return Err("--pair takes two parties".into()) };
            let b = read_box(input)?;
            let doc = read_json(decomposition)?;
            on_box!(&b, |b| {
                let d = decomposition_from_json(&doc, b)?;
                let rep = screening_check(b, (*i, *j), *y, &d)?;
                let text = format!(
                    "passes: {}\nfactorization failures: {:?}\nreproduces box: {}\nmarginals independent of spectator: {}",
                    rep.passes, rep.screening_failures, rep.reproduces_box, rep.marginals_independent
                );
                Ok(Report::new(rep.to_json(), text)
                    .table(&["passes", "reproduces_box", "marginals_independent"],
                           vec![vec![rep.passes.to_string(), rep.reproduces_box.to_string(), rep.marginals_independent.to_string()]])
                    .failed(!rep.passes))
            })
        }
    }
}

fn decomposition_from_json<T: Scalar>(doc: &Value, _: &ProbabilityBox<T>) -> CliResult<CommonCauseDecomposition<T>> {
    let list = |key: &str| doc.get(key).and_then(Value::as_array).ok_or(format!("decomposition needs a {key:?} list"));
    let weights = list("weights")?.iter().map(T::from_json).collect::<relcausal::Result<Vec<T>>>()?;
    let components = list("components")?.iter().map(ProbabilityBox::from_json).collect::<relcausal::Result<Vec<_>>>()?;
    Ok(CommonCauseDecomposition::new(weights, components)?)
}
