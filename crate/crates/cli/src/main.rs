//! `jacstab`: dual-graph stability, twisters and theta-divisor classes from the command line.
//!
//! Exit status is 0 on success or a PASS verdict, 1 on a FAIL verdict and 2 on
//! invalid input, in which case a JSON diagnostic is printed.

mod error;
mod input;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use jacstab_core::divisor::{self, Moduli};
use jacstab_core::pushforward::{self, Indicator, Rule};
use jacstab_core::selftest::{self, Depth, SelftestConfig};
use jacstab_core::stability::{self, Basepoint};
use jacstab_core::twister::{self, TwisterVector};
use jacstab_core::{DivisorClass, DualGraph, Execution, Multidegree, RuleTable, StabilityMode, TauData};

use error::CliError;

#[derive(Parser)]
#[command(name = "jacstab", version, about = "Stability, twisters and theta-divisor classes for stable marked dual graphs")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    output: Format,
    /// Seed for randomized corpora.
    #[arg(long, global = true, env = "JACSTAB_SEED", default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Graph validation and subcurve queries.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Thresholds, stability verdicts, enumeration and the balanced condition.
    #[command(subcommand)]
    Stability(StabilityCmd),
    /// Twister action and treelike reduction.
    #[command(subcommand)]
    Twist(TwistCmd),
    /// Divisor classes on the moduli space of marked curves.
    #[command(subcommand)]
    Class(ClassCmd),
    /// Runs the cross-formula grids and corpus checks.
    Selftest {
        #[arg(long, default_value = "small")]
        depth: Depth,
        /// Flip the sign of one pushforward rule; the run is then expected to fail.
        #[arg(long)]
        corrupt: Option<Rule>,
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Args)]
struct GraphArg {
    /// Graph JSON: a path, `-` for stdin, or inline JSON.
    #[arg(long)]
    graph: String,
}

#[derive(Args)]
struct TwistArgs {
    /// Comma-separated τ.
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    k: Option<i64>,
    /// `{"tau": [...], "k": int}` as a path, `-` or inline JSON.
    #[arg(long)]
    twist: Option<String>,
}

impl TwistArgs {
    fn data(&self) -> Result<TauData, CliError> {
        input::tau_data(self.twist.as_deref(), self.tau.as_deref(), self.k)
    }
}

#[derive(Subcommand)]
enum GraphCmd {
    /// Validates the graph and reports its genus and violations.
    Validate(GraphArg),
    /// Number of edges joining a subcurve to its complement.
    Kappa {
        #[command(flatten)]
        g: GraphArg,
        /// Comma-separated vertex ids.
        #[arg(long)]
        subcurve: String,
    },
    /// Degree of the dualizing sheaf on a subcurve.
    DegOmega {
        #[command(flatten)]
        g: GraphArg,
        #[arg(long)]
        subcurve: String,
    },
    /// Treelike, compact-type and banana flags.
    Classify(GraphArg),
}

#[derive(Subcommand)]
enum StabilityCmd {
    /// Stability threshold of a subcurve.
    Threshold {
        #[command(flatten)]
        g: GraphArg,
        #[arg(long, default_value = "canonical0")]
        polarization: String,
        #[arg(long)]
        subcurve: String,
    },
    /// Checks a multidegree against every subcurve.
    Check {
        #[command(flatten)]
        g: GraphArg,
        #[arg(long, default_value = "canonical0")]
        polarization: String,
        /// Degrees in vertex-id order, or a JSON object keyed by id.
        #[arg(long, allow_hyphen_values = true)]
        multidegree: String,
        #[arg(long, default_value = "qstable")]
        mode: StabilityMode,
        /// Vertex id used for strictness; defaults to the vertex of marking 1.
        #[arg(long)]
        basepoint: Option<String>,
    },
    /// All stable multidegrees for a polarization.
    Enumerate {
        #[command(flatten)]
        g: GraphArg,
        #[arg(long, default_value = "canonical0")]
        polarization: String,
        #[arg(long, default_value = "qstable")]
        mode: StabilityMode,
        #[arg(long)]
        basepoint: Option<String>,
        #[arg(long)]
        sequential: bool,
    },
    /// Balanced condition for the twist data on this fiber.
    Balanced {
        #[command(flatten)]
        g: GraphArg,
        #[command(flatten)]
        t: TwistArgs,
    },
    /// Where the fiber sits relative to the balanced locus.
    Locus {
        #[command(flatten)]
        g: GraphArg,
        #[command(flatten)]
        t: TwistArgs,
    },
}

#[derive(Subcommand)]
enum TwistCmd {
    /// Multidegree of the twister with coefficients γ.
    Apply {
        #[command(flatten)]
        g: GraphArg,
        #[arg(long, allow_hyphen_values = true)]
        gamma: String,
    },
    /// Leaf-peeling reduction of a total-degree-0 multidegree.
    Reduce {
        #[command(flatten)]
        g: GraphArg,
        #[arg(long, allow_hyphen_values = true)]
        multidegree: String,
    },
    /// Per-edge twist coefficients for `(τ, k)`.
    Coefficients {
        #[command(flatten)]
        g: GraphArg,
        #[command(flatten)]
        t: TwistArgs,
    },
    /// Fiber multidegree of the twisted bundle.
    Lk {
        #[command(flatten)]
        g: GraphArg,
        #[command(flatten)]
        t: TwistArgs,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ThetaMethod {
    Closed,
    Derive,
    Hain,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Gm1Method {
    Closed,
    Derive,
}

#[derive(Subcommand)]
enum ClassCmd {
    /// Pullback of the theta divisor along the section given by `(τ, k)`.
    Theta {
        #[arg(long)]
        g: u32,
        /// Defaults to the length of τ.
        #[arg(long)]
        n: Option<u32>,
        #[command(flatten)]
        t: TwistArgs,
        #[arg(long, value_enum, default_value_t = ThetaMethod::Closed)]
        method: ThetaMethod,
    },
    /// Degree g-1 theta pullback; `g` defaults to `Σ τ_i + 1`.
    ThetaGm1 {
        #[arg(long)]
        g: Option<u32>,
        #[arg(long, allow_hyphen_values = true)]
        tau: String,
        #[arg(long, value_enum, default_value_t = Gm1Method::Closed)]
        method: Gm1Method,
    },
    /// Effective locus class with the correction over `E₊`.
    Mueller {
        #[arg(long)]
        g: Option<u32>,
        #[arg(long, allow_hyphen_values = true)]
        tau: String,
        /// Leave out `(h, ∅)` from `E₊`.
        #[arg(long)]
        exclude_empty: bool,
    },
    /// Degree-g part of the exponential in the atoms `C_s`.
    ZeroSectionShape {
        #[arg(long)]
        g: u32,
    },
    /// Degree g-1 multidegree on a two-component compact-type fiber.
    CompactGm1(GraphArg),
}

/// Command result: JSON payload, text rendering and verdict.
struct Report {
    payload: Value,
    text: String,
    pass: bool,
}

impl Report {
    fn ok(payload: Value, text: String) -> Self {
        Report { payload, text, pass: true }
    }
}

fn ids(graph: &DualGraph) -> Vec<String> {
    graph.vertices().iter().map(|v| v.id.clone()).collect()
}

fn verdict_text(v: &stability::Verdict) -> String {
    match &v.witness {
        None => "PASS".into(),
        Some(w) => format!("FAIL {w}"),
    }
}

fn run_graph(cmd: GraphCmd) -> Result<Report, CliError> {
    match cmd {
        GraphCmd::Validate(a) => {
            let g = input::graph(&a.graph)?;
            let payload = json!({
                "valid": true,
                "genus": g.genus(),
                "n": g.n(),
                "vertices": g.vertex_count(),
                "edges": g.edges().len(),
            });
            let text = format!("valid: genus {}, {} markings, {} vertices, {} edges", g.genus(), g.n(), g.vertex_count(), g.edges().len());
            Ok(Report::ok(payload, text))
        }
        GraphCmd::Kappa { g, subcurve } => {
            let g = input::graph(&g.graph)?;
            let y = input::subcurve(&g, &subcurve)?;
            let k = g.kappa(y)?;
            Ok(Report::ok(json!({"subcurve": g.subcurve_ids(y), "kappa": k}), k.to_string()))
        }
        GraphCmd::DegOmega { g, subcurve } => {
            let g = input::graph(&g.graph)?;
            let y = input::subcurve(&g, &subcurve)?;
            let d = g.deg_omega(y)?;
            Ok(Report::ok(json!({"subcurve": g.subcurve_ids(y), "deg_omega": d}), d.to_string()))
        }
        GraphCmd::Classify(a) => {
            let g = input::graph(&a.graph)?;
            let c = g.classify();
            let text = format!("treelike={} compact_type={} banana_like={}", c.treelike, c.compact_type, c.banana_like);
            Ok(Report::ok(serde_json::to_value(c).expect("plain struct"), text))
        }
    }
}

fn run_stability(cmd: StabilityCmd) -> Result<Report, CliError> {
    match cmd {
        StabilityCmd::Threshold { g, polarization, subcurve } => {
            let g = input::graph(&g.graph)?;
            let pol = input::polarization(&polarization)?;
            let y = input::subcurve(&g, &subcurve)?;
            let t = stability::threshold(&g, &pol, y)?;
            Ok(Report::ok(
                json!({"polarization": pol.name(), "subcurve": g.subcurve_ids(y), "threshold": t.to_string()}),
                t.to_string(),
            ))
        }
        StabilityCmd::Check { g, polarization, multidegree, mode, basepoint } => {
            let g = input::graph(&g.graph)?;
            let pol = input::polarization(&polarization)?;
            let m = input::multidegree(&g, &multidegree)?;
            let base = input::basepoint(&g, basepoint.as_deref())?;
            let v = stability::check_stability(&g, &pol, &m, mode, base)?;
            let payload = json!({
                "polarization": pol.name(),
                "mode": mode,
                "multidegree": m.to_map(&g),
                "pass": v.pass,
                "witness": v.witness,
            });
            Ok(Report { text: verdict_text(&v), payload, pass: v.pass })
        }
        StabilityCmd::Enumerate { g, polarization, mode, basepoint, sequential } => {
            let g = input::graph(&g.graph)?;
            let pol = input::polarization(&polarization)?;
            let base = input::basepoint(&g, basepoint.as_deref())?;
            let exec = if sequential { Execution::Sequential } else { Execution::Parallel };
            let found = stability::enumerate_stable(&g, &pol, mode, base, exec)?;
            let base_id = match (mode, base) {
                (StabilityMode::Qstable, b) => Some(g.id(b.resolve(&g)?).to_string()),
                _ => None,
            };
            let text = found.iter().map(Multidegree::to_string).collect::<Vec<_>>().join("\n");
            let payload = json!({
                "polarization": pol.name(),
                "mode": mode,
                "basepoint": base_id,
                "vertices": ids(&g),
                "count": found.len(),
                "multidegrees": found.iter().map(|m| m.0.clone()).collect::<Vec<_>>(),
            });
            Ok(Report::ok(payload, text))
        }
        StabilityCmd::Balanced { g, t } => {
            let g = input::graph(&g.graph)?;
            let t = t.data()?;
            let v = stability::is_balanced(&g, &t)?;
            let payload = json!({"tau": t.tau, "k": t.k, "pass": v.pass, "witness": v.witness});
            Ok(Report { text: verdict_text(&v), payload, pass: v.pass })
        }
        StabilityCmd::Locus { g, t } => {
            let g = input::graph(&g.graph)?;
            let t = t.data()?;
            let locus = stability::locus_membership(&g, &t)?;
            let value = serde_json::to_value(locus).expect("unit enum");
            let text = value.as_str().unwrap_or_default().to_string();
            Ok(Report::ok(json!({"tau": t.tau, "k": t.k, "locus": value}), text))
        }
    }
}

fn reduction_text(g: &DualGraph, r: &twister::Reduction) -> String {
    let mut lines = vec![format!("root {}", g.id(r.root))];
    for step in &r.trace {
        lines.push(format!("peel {} by {} on {{{}}} -> {:?}", step.leaf, step.coefficient, step.branch.join(","), step.degrees));
    }
    lines.push(format!("gamma {:?}", r.gamma.0));
    lines.join("\n")
}

fn run_twist(cmd: TwistCmd) -> Result<Report, CliError> {
    match cmd {
        TwistCmd::Apply { g, gamma } => {
            let g = input::graph(&g.graph)?;
            let gamma = input::multidegree(&g, &gamma)?;
            let m = twister::twist_multidegree(&g, &TwisterVector(gamma.0.clone()));
            let payload = json!({"vertices": ids(&g), "gamma": gamma.0, "multidegree": m.0});
            Ok(Report::ok(payload, m.to_string()))
        }
        TwistCmd::Reduce { g, multidegree } => {
            let g = input::graph(&g.graph)?;
            let m = input::multidegree(&g, &multidegree)?;
            let r = twister::reduce_treelike(&g, &m)?;
            let payload = json!({
                "vertices": ids(&g),
                "root": g.id(r.root),
                "gamma": r.gamma.0,
                "trace": r.trace,
            });
            Ok(Report::ok(payload, reduction_text(&g, &r)))
        }
        TwistCmd::Coefficients { g, t } => {
            let g = input::graph(&g.graph)?;
            let t = t.data()?;
            let coeffs = twister::branch_coefficients(&g, &t)?;
            let text = coeffs
                .iter()
                .map(|c| format!("{}-{}: {} (h={}, legs={:?})", c.edge[0], c.edge[1], c.coefficient, c.h, c.legs))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Report::ok(json!({"tau": t.tau, "k": t.k, "edges": coeffs}), text))
        }
        TwistCmd::Lk { g, t } => {
            let g = input::graph(&g.graph)?;
            let t = t.data()?;
            let m = twister::boundary_multidegree_lk(&g, &t)?;
            let base = stability::base_multidegree(&g, &t)?;
            let payload = json!({"vertices": ids(&g), "untwisted": base.0, "multidegree": m.0});
            Ok(Report::ok(payload, m.to_string()))
        }
    }
}

fn class_report(header: Value, class: &DivisorClass) -> Report {
    let mut payload = header;
    payload["class"] = class.to_json();
    payload["text"] = json!(class.to_string());
    Report::ok(payload, class.to_string())
}

fn gm1_moduli(g: Option<u32>, tau: &[i64]) -> Result<Moduli, CliError> {
    let g = match g {
        Some(g) => g,
        None => u32::try_from(tau.iter().sum::<i64>() + 1)
            .map_err(|_| CliError::new("TAU_SUM", "Σ τ_i + 1 must be a non-negative genus"))?,
    };
    Ok(Moduli::new(g, tau.len() as u32)?)
}

fn run_class(cmd: ClassCmd) -> Result<Report, CliError> {
    match cmd {
        ClassCmd::Theta { g, n, t, method } => {
            let t = t.data()?;
            let n = n.unwrap_or(t.tau.len() as u32);
            let moduli = Moduli::new(g, n)?;
            let class = match method {
                ThetaMethod::Closed => divisor::theta_pullback_closed(moduli, &t.tau, t.k)?,
                ThetaMethod::Derive => pushforward::derive_theta(moduli, &t)?,
                ThetaMethod::Hain => {
                    if t.k != 0 {
                        return Err(CliError::new("BAD_ARGUMENT", "the hain method requires k = 0"));
                    }
                    divisor::hain_theta_pullback(moduli, &t.tau)?
                }
            };
            let method = method.to_possible_value().expect("no skipped variants").get_name().to_string();
            Ok(class_report(json!({"g": g, "n": n, "tau": t.tau, "k": t.k, "method": method}), &class))
        }
        ClassCmd::ThetaGm1 { g, tau, method } => {
            let tau = input::int_list(&tau, "tau")?;
            let moduli = gm1_moduli(g, &tau)?;
            let class = match method {
                Gm1Method::Closed => divisor::theta_gm1_pullback(moduli, &tau)?,
                Gm1Method::Derive => pushforward::derive_theta_gm1(moduli, &tau, Indicator::default())?,
            };
            let method = method.to_possible_value().expect("no skipped variants").get_name().to_string();
            Ok(class_report(json!({"g": moduli.g, "n": moduli.n, "tau": tau, "method": method}), &class))
        }
        ClassCmd::Mueller { g, tau, exclude_empty } => {
            let tau = input::int_list(&tau, "tau")?;
            let moduli = gm1_moduli(g, &tau)?;
            let include = !exclude_empty;
            let correction = divisor::mueller_correction(moduli, &tau, include)?;
            let class = divisor::mueller_class(moduli, &tau, include)?;
            Ok(class_report(
                json!({"g": moduli.g, "n": moduli.n, "tau": tau, "include_empty": include, "correction": correction}),
                &class,
            ))
        }
        ClassCmd::ZeroSectionShape { g } => {
            if g == 0 {
                return Err(CliError::new("BAD_ARGUMENT", "g must be at least 1"));
            }
            let poly = pushforward::exp_truncate(g);
            let mut payload = json!({"g": g, "poly": poly.to_json()});
            payload["text"] = json!(poly.to_string());
            Ok(Report::ok(payload, poly.to_string()))
        }
        ClassCmd::CompactGm1(a) => {
            let g = input::graph(&a.graph)?;
            let m = pushforward::compact_type_gm1_multidegree(&g)?;
            let v = stability::check_stability(
                &g,
                &jacstab_core::Polarization::TrivialGm1,
                &m,
                StabilityMode::Qstable,
                Basepoint::Marking1,
            )?;
            let payload = json!({"vertices": ids(&g), "multidegree": m.0, "total": m.total(), "qstable": v.pass});
            Ok(Report { text: format!("{m} q-stable={}", v.pass), payload, pass: v.pass })
        }
    }
}

fn run_selftest(depth: Depth, corrupt: Option<Rule>, sequential: bool, seed: u64) -> Report {
    let mut config = SelftestConfig::new(depth, seed);
    if let Some(rule) = corrupt {
        config.rules = RuleTable::corrupted(rule);
    }
    if sequential {
        config.execution = Execution::Sequential;
    }
    let report = selftest::run(&config);
    let text = report
        .checks
        .iter()
        .map(|c| {
            let status = if c.passed() { "PASS" } else { "FAIL" };
            let mut line = format!("{status} {} ({} cases, {} failures)", c.name, c.cases, c.failures);
            if let Some(ce) = &c.first_counterexample {
                line.push_str(&format!("\n  first counterexample: {ce}"));
            }
            line
        })
        .collect::<Vec<_>>()
        .join("\n");
    Report { payload: serde_json::to_value(&report).expect("plain struct"), text, pass: report.pass }
}

fn run(cli: Cli) -> Result<Report, CliError> {
    match cli.command {
        Command::Graph(c) => run_graph(c),
        Command::Stability(c) => run_stability(c),
        Command::Twist(c) => run_twist(c),
        Command::Class(c) => run_class(c),
        Command::Selftest { depth, corrupt, sequential } => Ok(run_selftest(depth, corrupt, sequential, cli.seed)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.output;
    match run(cli) {
        Ok(report) => {
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&report.payload).expect("serializable")),
                Format::Text => println!("{}", report.text),
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&e.to_json()).expect("serializable")),
                Format::Text => eprintln!("error[{}]: {}", e.code, e.message),
            }
            ExitCode::from(2)
        }
    }
}
