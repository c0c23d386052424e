//! Subcommands and their wiring to the library.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use infodiagram::diagram::{hu_residuals, ActionForm};
use infodiagram::divergences::{
    alpha_kl_instance, binary_symmetric_pair, cross_entropy_instance, empirical_pair_from_rows, kl_instance,
    tsallis_instance,
};
use infodiagram::setfun::{
    advantage_instance, bayes_error_evaluator, compressor_setfunction, r1_instance, Compressor, Deflate,
    HypothesisEvaluator, SetFunction,
};
use infodiagram::shannon::{empirical_from_rows, shannon_instance};
use infodiagram::{check_chain_rule, interaction, mu_table, ChainRule, Dist, Joint, LogBase, RandomVariable, Sweep};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::document::{
    atom_entries, atoms_csv, parse_diagram, residuals_csv, summary, to_json, total_entries, totals_gap,
    DiagramDocument, Metadata, ResidualEntry, VerificationSummary, VerifyDocument, ViolationEntry,
};
use crate::error::{CliError, CliResult};
use crate::ingest::{default_names, read_blob, read_set_function, read_table, Table};
use crate::render::render_svg;

#[derive(Debug, Parser)]
#[command(
    name = "infodiagram",
    version,
    about = "Information diagrams for chain-rule functions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute atom values and totals, with a verification summary.
    Diagram(InstanceArgs),
    /// Sweep every interaction identity and report all residuals.
    Verify(InstanceArgs),
    /// Reproduce a built-in worked example.
    Examples(ExampleArgs),
    /// Draw a two- or three-variable diagram document as SVG.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Shannon,
    Tsallis,
    Kl,
    AlphaKl,
    CrossEntropy,
    Setfun,
    Advantage,
    Compressor,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Shannon => "shannon",
            Kind::Tsallis => "tsallis",
            Kind::Kl => "kl",
            Kind::AlphaKl => "alpha-kl",
            Kind::CrossEntropy => "cross-entropy",
            Kind::Setfun => "setfun",
            Kind::Advantage => "advantage",
            Kind::Compressor => "compressor",
        }
    }

    fn label(self) -> &'static str {
        match self {
            Kind::Shannon => "Shannon entropy",
            Kind::Tsallis => "Tsallis alpha-entropy",
            Kind::Kl => "Kullback-Leibler divergence",
            Kind::AlphaKl => "alpha-Kullback-Leibler divergence",
            Kind::CrossEntropy => "cross-entropy",
            Kind::Setfun => "set function",
            Kind::Advantage => "generalization-error advantage",
            Kind::Compressor => "compression-based information function",
        }
    }

    fn needs_alpha(self) -> bool {
        matches!(self, Kind::Tsallis | Kind::AlphaKl)
    }

    fn needs_q(self) -> bool {
        matches!(self, Kind::Kl | Kind::AlphaKl | Kind::CrossEntropy)
    }

    fn uses_base(self) -> bool {
        matches!(self, Kind::Shannon | Kind::Kl | Kind::CrossEntropy | Kind::Advantage)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Base {
    Nats,
    Bits,
}

impl From<Base> for LogBase {
    fn from(b: Base) -> LogBase {
        match b {
            Base::Nats => LogBase::Nats,
            Base::Bits => LogBase::Bits,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    /// Sample table (CSV/TSV), set-function JSON, or one file per generator for `compressor`.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "shannon")]
    pub instance: Kind,
    /// Sample table for Q, same columns as the P table.
    #[arg(long)]
    pub q: Option<PathBuf>,
    /// Target column for `advantage` on a sample table (default: last column).
    #[arg(long)]
    pub target: Option<String>,
    /// Logarithm base (default nats).
    #[arg(long, value_enum)]
    pub base: Option<Base>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = infodiagram::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = 3)]
    pub qmax: usize,
    /// Output path; `-` is stdout.
    #[arg(long, default_value = "-")]
    pub out: String,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Seed for sampled verification when n is too large for an exhaustive sweep.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct ExampleArgs {
    /// One of: xor-i3, bsc-d2, xor-advantage, fig2.
    pub name: String,
    /// Flip probability of the second channel in `bsc-d2`.
    #[arg(long, default_value_t = 0.25)]
    pub epsilon: f64,
    #[arg(long, default_value_t = infodiagram::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    /// A diagram document written by `diagram`.
    pub document: PathBuf,
    #[arg(long, default_value = "-")]
    pub out: String,
}

pub const EXAMPLES: [&str; 4] = ["xor-i3", "bsc-d2", "xor-advantage", "fig2"];

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Diagram(args) => cmd_diagram(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Examples(args) => cmd_examples(&args),
        Command::Render(args) => cmd_render(&args),
    }
}

pub fn write_output(out: &str, content: &str) -> CliResult<()> {
    if out == "-" {
        use std::io::Write;
        let mut stdout = std::io::stdout().lock();
        stdout
            .write_all(content.as_bytes())
            .and_then(|_| stdout.flush())
            .map_err(|e| CliError::Output(format!("stdout: {e}")))
    } else {
        fs::write(out, content).map_err(|e| CliError::Output(format!("{out}: {e}")))
    }
}

/// An instance ready for the engine, with its report metadata.
pub struct Built {
    pub inst: Box<dyn ChainRule>,
    pub metadata: Metadata,
}

fn single_input(args: &InstanceArgs) -> CliResult<&Path> {
    match args.inputs.as_slice() {
        [one] => Ok(one),
        many => Err(CliError::Input(format!(
            "instance {} takes one input file, got {}",
            args.instance.name(),
            many.len()
        ))),
    }
}

fn empirical(table: &Table) -> CliResult<(Dist, Vec<RandomVariable>)> {
    Ok(empirical_from_rows(&table.rows, table.weights.as_deref())?)
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

pub fn build(args: &InstanceArgs) -> CliResult<Built> {
    let kind = args.instance;
    match (kind.needs_alpha(), args.alpha) {
        (true, None) => return Err(CliError::Input(format!("instance {} needs --alpha", kind.name()))),
        (false, Some(_)) => {
            return Err(CliError::Input(format!(
                "--alpha does not apply to instance {}",
                kind.name()
            )))
        }
        _ => {}
    }
    match (kind.needs_q(), &args.q) {
        (true, None) => return Err(CliError::Input(format!("instance {} needs --q <Q table>", kind.name()))),
        (false, Some(_)) => {
            return Err(CliError::Input(format!(
                "--q does not apply to instance {}",
                kind.name()
            )))
        }
        _ => {}
    }
    if args.target.is_some() && kind != Kind::Advantage {
        return Err(CliError::Input("--target applies only to instance advantage".into()));
    }
    if args.base.is_some() && !kind.uses_base() {
        return Err(CliError::Input(format!(
            "--base does not apply to instance {}",
            kind.name()
        )));
    }
    if args.tol.is_nan() || args.tol < 0.0 {
        return Err(CliError::Input(format!("--tol {} must be nonnegative", args.tol)));
    }
    let base: LogBase = args.base.unwrap_or(Base::Nats).into();
    let mut inputs: Vec<String> = args.inputs.iter().map(|p| p.display().to_string()).collect();
    let mut compressor = None;

    let (inst, names): (Box<dyn ChainRule>, Vec<String>) = match kind {
        Kind::Shannon | Kind::Tsallis => {
            let table = read_table(single_input(args)?)?;
            let (p, vars) = empirical(&table)?;
            let inst: Box<dyn ChainRule> = if kind == Kind::Shannon {
                Box::new(shannon_instance(&p, &vars, base)?)
            } else {
                Box::new(tsallis_instance(&p, &vars, args.alpha.unwrap_or_default())?)
            };
            (inst, table.names)
        }
        Kind::Kl | Kind::AlphaKl | Kind::CrossEntropy => {
            let q_path = args.q.as_deref().unwrap_or(Path::new(""));
            inputs.push(q_path.display().to_string());
            let p_table = read_table(single_input(args)?)?;
            let q_table = read_table(q_path)?;
            if p_table.names != q_table.names {
                return Err(CliError::Input(format!(
                    "Q table columns {:?} differ from P table columns {:?}",
                    q_table.names, p_table.names
                )));
            }
            let (pair, vars) = empirical_pair_from_rows(
                &p_table.rows,
                p_table.weights.as_deref(),
                &q_table.rows,
                q_table.weights.as_deref(),
            )?;
            let inst: Box<dyn ChainRule> = match kind {
                Kind::Kl => Box::new(kl_instance(&pair, &vars, base)?),
                Kind::AlphaKl => Box::new(alpha_kl_instance(&pair, &vars, args.alpha.unwrap_or_default())?),
                _ => Box::new(cross_entropy_instance(&pair, &vars, base)?),
            };
            (inst, p_table.names)
        }
        Kind::Setfun => {
            let input = read_set_function(single_input(args)?)?;
            let r = SetFunction::new(input.n, input.values)?;
            (Box::new(r1_instance(&r)), input.names)
        }
        Kind::Advantage => {
            let path = single_input(args)?;
            if is_json(path) {
                if args.target.is_some() || args.base.is_some() {
                    return Err(CliError::Input(
                        "--target and --base apply only when advantage reads a sample table".into(),
                    ));
                }
                let input = read_set_function(path)?;
                let e = HypothesisEvaluator::new(input.n, input.values)?;
                (Box::new(advantage_instance(&e)), input.names)
            } else {
                let table = read_table(path)?;
                if table.names.len() < 2 {
                    return Err(CliError::Input(
                        "advantage needs at least one feature column and a target".into(),
                    ));
                }
                let target_at = match &args.target {
                    Some(t) => table
                        .names
                        .iter()
                        .position(|n| n == t)
                        .ok_or_else(|| CliError::Input(format!("no column named {t:?}")))?,
                    None => table.names.len() - 1,
                };
                let (p, mut vars) = empirical(&table)?;
                let target = vars.remove(target_at);
                let mut names = table.names;
                names.remove(target_at);
                let e = bayes_error_evaluator(&p, &vars, &target, base)?;
                (Box::new(advantage_instance(&e)), names)
            }
        }
        Kind::Compressor => {
            let blobs = args
                .inputs
                .iter()
                .map(|p| read_blob(p))
                .collect::<CliResult<Vec<_>>>()?;
            let deflate = Deflate::default();
            compressor = Some(deflate.name());
            let r = compressor_setfunction(&blobs, &deflate)?;
            let names = args
                .inputs
                .iter()
                .map(|p| {
                    p.file_name()
                        .map_or_else(|| p.display().to_string(), |f| f.to_string_lossy().into_owned())
                })
                .collect();
            (Box::new(r1_instance(&r)), names)
        }
    };
    let names = if names.len() == inst.generators() {
        names
    } else {
        default_names(inst.generators())
    };
    Ok(Built {
        metadata: Metadata {
            instance: kind.name().into(),
            label: kind.label().into(),
            base: (kind.uses_base() && !(kind == Kind::Advantage && is_json(&args.inputs[0])))
                .then(|| base.name().to_owned()),
            alpha: args.alpha,
            tolerance: args.tol,
            q_max: args.qmax,
            seed: args.seed,
            generators: names,
            inputs,
            compressor,
        },
        inst,
    })
}

/// Chain-rule check plus the Hu sweep. The summary is always produced; the
/// error carries a description of the first failed check.
pub struct Checked {
    pub report: infodiagram::DiagramReport,
    pub violations: Vec<infodiagram::ChainRuleViolation>,
    pub sweep: &'static str,
}

pub fn check(inst: &dyn ChainRule, q_max: usize, tol: f64, seed: u64) -> CliResult<Checked> {
    if q_max == 0 {
        return Err(CliError::Input("--qmax must be at least 1".into()));
    }
    let n = inst.generators();
    let sweep = Sweep::auto(n, seed);
    let violations = check_chain_rule(inst, tol, seed);
    let report = hu_residuals(inst, q_max, sweep)?;
    Ok(Checked {
        report,
        violations,
        sweep: if sweep == Sweep::Exhaustive {
            "exhaustive"
        } else {
            "sampled"
        },
    })
}

fn joint_list(terms: &[Vec<usize>]) -> String {
    terms.iter().map(|t| joint_name(t)).collect::<Vec<_>>().join("; ")
}

fn joint_name(t: &[usize]) -> String {
    format!("{{{}}}", t.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
}

/// Names the failed checks, or `None` when everything passed.
pub fn failure_message(v: &VerificationSummary, violations: &[ViolationEntry]) -> Option<String> {
    if v.passed {
        return None;
    }
    let mut parts = Vec::new();
    if let Some(w) = violations.first() {
        parts.push(format!(
            "chain rule fails at {} pair(s), worst (Y={}, Z={}) off by {:e}",
            v.chain_rule_violations,
            joint_name(&w.first),
            joint_name(&w.second),
            w.gap
        ));
    }
    if v.max_residual > v.tolerance {
        if let Some(w) = &v.worst {
            parts.push(format!(
                "interaction identity fails at q={}, L=({}), J={}: K_q = {}, region measure = {}, gap {:e} > tol {:e}",
                w.q,
                joint_list(&w.terms),
                joint_name(&w.given),
                w.lhs,
                w.rhs,
                w.gap,
                v.tolerance
            ));
        }
    }
    if v.totals_gap > v.tolerance {
        parts.push(format!(
            "totals differ from the sum of atoms meeting them by {:e} > tol {:e}",
            v.totals_gap, v.tolerance
        ));
    }
    Some(parts.join("; "))
}

pub fn diagram_document(built: &Built) -> CliResult<(DiagramDocument, Vec<ViolationEntry>)> {
    let inst = &*built.inst;
    let m = &built.metadata;
    let measure = mu_table(inst)?;
    let atoms = atom_entries(&measure);
    let totals = total_entries(inst.generators(), |k| inst.total(k));
    let gap = totals_gap(&atoms, &totals);
    let checked = check(inst, m.q_max, m.tolerance, m.seed)?;
    let violations: Vec<ViolationEntry> = checked.violations.iter().map(ViolationEntry::from).collect();
    let verification = summary(
        &checked.report,
        m.q_max,
        m.tolerance,
        checked.sweep,
        violations.len(),
        gap,
    );
    Ok((
        DiagramDocument {
            metadata: m.clone(),
            atoms,
            totals,
            verification,
        },
        violations,
    ))
}

fn cmd_diagram(args: &InstanceArgs) -> CliResult<()> {
    let built = build(args)?;
    let (doc, violations) = diagram_document(&built)?;
    let text = match args.format {
        Format::Json => to_json(&doc)?,
        Format::Csv => atoms_csv(&doc.atoms)?,
    };
    write_output(&args.out, &text)?;
    match failure_message(&doc.verification, &violations) {
        Some(msg) => Err(CliError::Verification(msg)),
        None => Ok(()),
    }
}

pub fn verify_document(inst: &dyn ChainRule, metadata: &Metadata) -> CliResult<VerifyDocument> {
    let checked = check(inst, metadata.q_max, metadata.tolerance, metadata.seed)?;
    let violations: Vec<ViolationEntry> = checked.violations.iter().map(ViolationEntry::from).collect();
    let measure = &checked.report.atom_values;
    let atoms = atom_entries(measure);
    let totals = total_entries(inst.generators(), |k| inst.total(k));
    let gap = totals_gap(&atoms, &totals);
    let verification = summary(
        &checked.report,
        metadata.q_max,
        metadata.tolerance,
        checked.sweep,
        violations.len(),
        gap,
    );
    Ok(VerifyDocument {
        metadata: metadata.clone(),
        verification,
        chain_rule: violations,
        residuals: checked.report.residuals.iter().map(ResidualEntry::from).collect(),
    })
}

fn cmd_verify(args: &InstanceArgs) -> CliResult<()> {
    let built = build(args)?;
    let doc = verify_document(&*built.inst, &built.metadata)?;
    let text = match args.format {
        Format::Json => to_json(&doc)?,
        Format::Csv => residuals_csv(&doc.residuals)?,
    };
    write_output(&args.out, &text)?;
    match failure_message(&doc.verification, &doc.chain_rule) {
        Some(msg) => Err(CliError::Verification(msg)),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExampleReport {
    pub example: String,
    pub description: String,
    pub base: String,
    pub parameters: serde_json::Value,
    pub value: f64,
    pub expected: f64,
    pub gap: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub details: serde_json::Value,
}

fn xor_joint() -> (Dist, Vec<RandomVariable>) {
    let rows = vec![
        vec!["0", "0", "0"],
        vec!["0", "1", "1"],
        vec!["1", "0", "1"],
        vec!["1", "1", "0"],
    ];
    empirical_from_rows(&rows, None).expect("fixed table")
}

pub fn run_example(args: &ExampleArgs) -> CliResult<ExampleReport> {
    let singles = |n: usize| (1..=n).map(Joint::generator).collect::<Vec<_>>();
    let (description, base, parameters, value, expected, details) = match args.name.as_str() {
        "xor-i3" => {
            let (p, vars) = xor_joint();
            let inst = shannon_instance(&p, &vars, LogBase::Bits)?;
            let v = interaction(&inst, &singles(3), Joint::UNIT)?;
            (
                "I_3(X;Y;Z) for Z = X xor Y with X, Y independent fair bits",
                "bits",
                serde_json::json!({}),
                v,
                -1.0,
                serde_json::json!({}),
            )
        }
        "bsc-d2" => {
            let eps = args.epsilon;
            let (pair, vars) = binary_symmetric_pair(eps)?;
            let inst = kl_instance(&pair, &vars, LogBase::Bits)?;
            let v = interaction(&inst, &singles(2), Joint::UNIT)?;
            let closed = 1.0 + 0.5 * ((1.0 - eps).log2() + eps.log2());
            (
                "D_2(X;Y) between binary symmetric channels with flip probabilities 1/2 (P) and epsilon (Q)",
                "bits",
                serde_json::json!({ "epsilon": eps }),
                v,
                closed,
                serde_json::json!({}),
            )
        }
        "xor-advantage" => {
            let (p, vars) = xor_joint();
            let e = bayes_error_evaluator(&p, &vars[..2], &vars[2], LogBase::Bits)?;
            let v = interaction(&advantage_instance(&e), &singles(2), Joint::UNIT)?;
            (
                "Ad^2(X_1;X_2) for predicting X_1 xor X_2 under log loss",
                "bits",
                serde_json::json!({}),
                v,
                -1.0,
                serde_json::json!({ "E": e.errors().values() }),
            )
        }
        "fig2" => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let weights: Vec<f64> = (0..8).map(|_| rng.gen_range(0.01..1.0)).collect();
            let p = Dist::from_weights(&weights)?;
            let bit = |k: u32| RandomVariable::from_labels((0..8u32).map(|w| w >> k & 1));
            let inst = shannon_instance(&p, &[bit(0), bit(1), bit(2)], LogBase::Nats)?;
            let (x12, x13, x3, x1) = (Joint::of(&[1, 2]), Joint::of(&[1, 3]), Joint::of(&[3]), Joint::of(&[1]));
            let lhs = interaction(&inst, &[x12, x13], Joint::UNIT)?;
            let acted = inst.acted(x1, x3);
            let mi = interaction(&inst, &[x12, x3], Joint::UNIT)?;
            (
                "I_2(X_12;X_13) against X_3.I_1(X_1) + I_2(X_12;X_3) on a random joint of three bits",
                "nats",
                serde_json::json!({ "seed": args.seed }),
                lhs,
                acted + mi,
                serde_json::json!({ "masses": p.masses(), "X3.I1(X1)": acted, "I2(X12;X3)": mi }),
            )
        }
        other => {
            return Err(CliError::Input(format!(
                "unknown example {other:?}; available: {}",
                EXAMPLES.join(", ")
            )))
        }
    };
    let gap = (value - expected).abs();
    Ok(ExampleReport {
        example: args.name.clone(),
        description: description.into(),
        base: base.into(),
        parameters,
        value,
        expected,
        gap,
        tolerance: args.tol,
        passed: gap <= args.tol,
        details,
    })
}

fn cmd_examples(args: &ExampleArgs) -> CliResult<()> {
    let report = run_example(args)?;
    write_output(&args.out, &to_json(&report)?)?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "example {}: value {} differs from expected {} by {:e}",
            report.example, report.value, report.expected, report.gap
        )))
    }
}

fn cmd_render(args: &RenderArgs) -> CliResult<()> {
    let text =
        fs::read_to_string(&args.document).map_err(|e| CliError::Input(format!("{}: {e}", args.document.display())))?;
    let doc = parse_diagram(&text)?;
    write_output(&args.out, &render_svg(&doc)?)
}
