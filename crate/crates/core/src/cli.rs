//! Command-line front end. [`run`] returns the exit code and both output
//! streams so that it can be exercised without a process.

use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::catalog::{entry, enumerate_dinfty, Label};
use crate::classify::{classify, ClassifyError, CmTypeReport};
use crate::field::FieldSpec;
use crate::local::LocalError;
use crate::matrix::{
    knorrer_lift, minimize_presentation, reduce_mod_z, verify_mf, MatrixFactorization, PresentationMatrix, SeriesMatrix,
};
use crate::pairs::{
    build_indecomposable_pair_module, case_one, case_two, conductor_square, is_indecomposable_pair_module,
    jordan_route, lift_module, non_membership_checks, pair_invariants, ArtinianPair, FiniteExtensionSpec,
    IndecomposabilityOptions, PairError, DEFAULT_MAX_DEGREE,
};
use crate::parse::{infer_variables, parse_in};
use crate::series::SeriesContext;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_UNSUPPORTED: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "cmtype", version, about = "Cohen-Macaulay representation type of hypersurface singularities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Q, or Fp:<prime>.
    #[arg(long, default_value = "Q")]
    field: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Reserved; every algorithm is deterministic for a fixed seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify k[[vars]]/(f).
    Classify {
        #[arg(short = 'f', long = "poly")]
        poly: Option<String>,
        /// Inline expression, or @file with one expression per line.
        input: Option<String>,
        #[arg(long)]
        prec: Option<u32>,
        /// Comma-separated variable order; default is order of appearance.
        #[arg(long)]
        vars: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// List the indecomposable MCM modules over k[[x,y]]/(xy^2).
    Catalog {
        #[arg(long, default_value_t = 3)]
        kmax: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Lift a matrix factorization to f + z^2 and reduce it back.
    Knorrer {
        /// A catalog label such as FamA(2).
        #[arg(long)]
        entry: Option<String>,
        #[arg(short = 'f', long = "poly")]
        poly: Option<String>,
        /// Rows separated by ';', entries by ','.
        #[arg(long)]
        phi: Option<String>,
        #[arg(long, default_value = "z")]
        var: String,
        #[arg(long, default_value_t = 16)]
        prec: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Conductor square, Jordan pair module of rank n, and its lift.
    Construct {
        /// one, two, kd, or @file with an extension in text form.
        #[arg(long, default_value = "one")]
        case: String,
        #[arg(short = 'n', long, default_value_t = 2)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Check a matrix factorization, or the built-in ideal non-memberships.
    Verify {
        #[arg(short = 'f', long = "poly")]
        poly: Option<String>,
        #[arg(long)]
        phi: Option<String>,
        #[arg(long)]
        psi: Option<String>,
        #[arg(long)]
        prec: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
}

/// Exit code, stdout, stderr.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { code: EXIT_OK, stdout, stderr: String::new() }
    }

    fn fail(code: i32, msg: impl std::fmt::Display) -> Self {
        Outcome { code, stdout: String::new(), stderr: format!("error: {msg}\n") }
    }
}

/// Accepts `Q`, `Fp:p`, `Fp` and `F<p>:<p>`.
pub fn parse_field(text: &str) -> Result<FieldSpec, String> {
    let t = text.trim();
    if t == "Q" || t == "QQ" {
        return Ok(FieldSpec::rationals());
    }
    let rest = t.strip_prefix('F').ok_or_else(|| format!("unknown field {t}"))?;
    let digits = match rest.split_once(':') {
        Some(("p", p)) => p.to_string(),
        Some((a, b)) if a == b => b.to_string(),
        Some(_) => return Err(format!("unknown field {t}")),
        None => rest.trim_start_matches('p').to_string(),
    };
    let p: u64 = digits.parse().map_err(|_| format!("unknown field {t}"))?;
    FieldSpec::prime(p).map_err(|e| e.to_string())
}

fn field_name(field: FieldSpec) -> String {
    match field.characteristic() {
        0 => "Q".into(),
        p => format!("Fp:{p}"),
    }
}

pub fn run<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Outcome::ok(text),
                _ => Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: text },
            };
        }
    };
    let common = match &cli.command {
        Command::Classify { common, .. }
        | Command::Catalog { common, .. }
        | Command::Knorrer { common, .. }
        | Command::Construct { common, .. }
        | Command::Verify { common, .. } => common.clone(),
    };
    let field = match parse_field(&common.field) {
        Ok(f) => f,
        Err(e) => return Outcome::fail(EXIT_USAGE, e),
    };
    match cli.command {
        Command::Classify { poly, input, prec, vars, .. } => {
            let src = match (poly, input) {
                (Some(p), None) | (None, Some(p)) => p,
                _ => return Outcome::fail(EXIT_USAGE, "give exactly one of -f EXPR, EXPR or @file"),
            };
            let vars: Option<Vec<String>> = vars.map(|v| v.split(',').map(|s| s.trim().to_string()).collect());
            match src.strip_prefix('@') {
                Some(path) => classify_batch(path, field, prec, vars.as_deref(), common.format),
                None => classify_one(&src, field, prec, vars.as_deref(), common.format),
            }
        }
        Command::Catalog { kmax, .. } => run_catalog(kmax, field, common.format),
        Command::Knorrer { entry, poly, phi, var, prec, .. } => {
            run_knorrer(entry, poly, phi, &var, prec, field, common.format)
        }
        Command::Construct { case, n, .. } => run_construct(&case, n, field, common.format, common.seed),
        Command::Verify { poly, phi, psi, prec, .. } => run_verify(poly, phi, psi, prec, field, common.format),
    }
}

fn classify_error_code(e: &ClassifyError) -> i32 {
    match e {
        ClassifyError::CharacteristicTwoHighDimension(_) => EXIT_UNSUPPORTED,
        ClassifyError::Local(LocalError::SmallCharacteristic(_) | LocalError::CharacteristicTwo) => EXIT_UNSUPPORTED,
        ClassifyError::PrecisionInsufficient { .. } => EXIT_PRECISION,
        _ => EXIT_USAGE,
    }
}

fn classify_message(e: &ClassifyError) -> String {
    match e {
        ClassifyError::CharacteristicTwoHighDimension(d) => {
            format!("characteristic 2 unsupported for d ≥ 2 (dimension {d})")
        }
        e => e.to_string(),
    }
}

/// Report for one expression, or an error outcome.
pub fn classify_text(
    text: &str,
    field: FieldSpec,
    prec: Option<u32>,
    vars: Option<&[String]>,
) -> Result<CmTypeReport, (i32, String)> {
    let usage = |e: String| (EXIT_USAGE, e);
    let mut names = match vars {
        Some(v) => v.to_vec(),
        None => infer_variables(text).map_err(|e| usage(e.to_string()))?,
    };
    while names.len() < 2 {
        let mut k = names.len();
        let mut fresh = format!("t{k}");
        while names.contains(&fresh) {
            k += 1;
            fresh = format!("t{k}");
        }
        names.push(fresh);
    }
    let ctx = SeriesContext::new(names, field);
    let probe = parse_in(text, &ctx, u32::MAX / 4).map_err(|e| usage(e.to_string()))?;
    let precision = match prec {
        Some(0) => return Err(usage("precision must be at least 1".into())),
        Some(p) => p,
        None => 2 * probe.total_degree().unwrap_or(0) + 6,
    };
    let f = parse_in(text, &ctx, precision).map_err(|e| usage(e.to_string()))?;
    classify(&f).map_err(|e| (classify_error_code(&e), classify_message(&e)))
}

pub fn report_json(input: &str, field: FieldSpec, r: &CmTypeReport) -> Value {
    json!({
        "input": input,
        "field": field_name(field),
        "dimension": r.dimension,
        "multiplicity": r.multiplicity,
        "verdict": r.verdict.tag(),
        "normal_form": r.normal_form.to_string(),
        "generator_bound": r.generator_bound,
        "witness": r.witness.steps,
        "precision_used": r.precision_used,
    })
}

fn report_text(input: &str, field: FieldSpec, r: &CmTypeReport) -> String {
    let bound = r.generator_bound.map_or("none".to_string(), |b| b.to_string());
    let mut out = format!(
        "input: {input}\nfield: {}\ndimension: {}\nmultiplicity: {}\nverdict: {}\nnormal_form: {}\ngenerator_bound: {bound}\nprecision_used: {}\n",
        field_name(field),
        r.dimension,
        r.multiplicity,
        r.verdict.tag(),
        r.normal_form,
        r.precision_used
    );
    if let crate::classify::Verdict::Undetermined(why) = &r.verdict {
        out.push_str(&format!("reason: {why}\n"));
    }
    for s in &r.witness.steps {
        out.push_str(&format!("witness: {s}\n"));
    }
    out
}

fn render_report(input: &str, field: FieldSpec, r: &CmTypeReport, format: Format) -> String {
    match format {
        Format::Json => format!("{}\n", report_json(input, field, r)),
        Format::Text => report_text(input, field, r),
    }
}

fn classify_one(text: &str, field: FieldSpec, prec: Option<u32>, vars: Option<&[String]>, format: Format) -> Outcome {
    match classify_text(text, field, prec, vars) {
        Ok(r) => Outcome::ok(render_report(text, field, &r, format)),
        Err((code, msg)) => Outcome::fail(code, msg),
    }
}

fn classify_batch(path: &str, field: FieldSpec, prec: Option<u32>, vars: Option<&[String]>, format: Format) -> Outcome {
    let content = match std::fs::read_to_string(path) {
        Ok(c) => c,
        Err(e) => return Outcome::fail(EXIT_USAGE, format!("cannot read {path}: {e}")),
    };
    let lines: Vec<&str> = content
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .collect();
    let results: Vec<Outcome> = lines.par_iter().map(|l| classify_one(l, field, prec, vars, format)).collect();
    let mut out = Outcome::ok(String::new());
    for (line, r) in lines.iter().zip(results) {
        out.code = out.code.max(r.code);
        out.stdout.push_str(&r.stdout);
        if !r.stderr.is_empty() {
            out.stderr.push_str(&format!("{line}: {}", r.stderr));
        }
    }
    out
}

fn run_catalog(kmax: u32, field: FieldSpec, format: Format) -> Outcome {
    let entries = match enumerate_dinfty(kmax, field) {
        Ok(e) => e,
        Err(e) => return Outcome::fail(EXIT_USAGE, e),
    };
    let mut rows = Vec::new();
    let mut text = String::new();
    for e in &entries {
        let nu = match e.nu() {
            Ok(n) => n,
            Err(err) => return Outcome::fail(EXIT_USAGE, err),
        };
        let verified = verify_mf(&e.mf).unwrap_or(false);
        let complement = e.label.complement().map(|c| c.to_string());
        text.push_str(&format!(
            "{} | psi: {} | nu: {nu} | verified: {verified}{}\n",
            e.to_line(),
            e.mf.psi.to_text(),
            if e.degenerate { " | degenerate" } else { "" }
        ));
        rows.push(json!({
            "label": e.label.to_string(),
            "phi": e.mf.phi.to_text(),
            "psi": e.mf.psi.to_text(),
            "nu": nu,
            "verified": verified,
            "degenerate": e.degenerate,
            "complement": complement,
        }));
    }
    match format {
        Format::Json => Outcome::ok(format!("{}\n", Value::Array(rows))),
        Format::Text => Outcome::ok(text),
    }
}

/// Parses `FamA(2)`, `XY` and the like.
pub fn parse_label(text: &str) -> Option<Label> {
    let t = text.trim();
    let simple = match t {
        "Y" => Some(Label::Y),
        "X" => Some(Label::X),
        "Y2" => Some(Label::Y2),
        "XY" => Some(Label::XY),
        "XY2" => Some(Label::XY2),
        _ => None,
    };
    if simple.is_some() {
        return simple;
    }
    let (name, rest) = t.split_once('(')?;
    let k: u32 = rest.strip_suffix(')')?.trim().parse().ok().filter(|&k| k >= 1)?;
    match name {
        "FamA" => Some(Label::FamA(k)),
        "FamB" => Some(Label::FamB(k)),
        "FamC" => Some(Label::FamC(k)),
        "FamD" => Some(Label::FamD(k)),
        _ => None,
    }
}

fn run_knorrer(
    label: Option<String>,
    poly: Option<String>,
    phi: Option<String>,
    var: &str,
    prec: u32,
    field: FieldSpec,
    format: Format,
) -> Outcome {
    let mf = match (label, poly, phi) {
        (Some(l), None, None) => match parse_label(&l) {
            Some(l) => match entry(l, field) {
                Ok(e) => e.mf,
                Err(e) => return Outcome::fail(EXIT_USAGE, e),
            },
            None => return Outcome::fail(EXIT_USAGE, format!("unknown catalog label {l}")),
        },
        (None, Some(f), Some(phi)) => match factorization_from_text(&f, &phi, None, prec, field) {
            Ok(mf) => mf,
            Err(e) => return Outcome::fail(EXIT_USAGE, e),
        },
        _ => return Outcome::fail(EXIT_USAGE, "give --entry LABEL, or -f EXPR with --phi MATRIX"),
    };
    let result = (|| -> Result<Value, String> {
        let lifted = knorrer_lift(&mf, var).map_err(|e| e.to_string())?;
        let verified = verify_mf(&lifted).map_err(|e| e.to_string())?;
        let lifted_nu = minimize_presentation(&PresentationMatrix::new(lifted.f.clone(), lifted.phi.clone()))
            .map_err(|e| e.to_string())?
            .nu();
        let reduced = reduce_mod_z(&lifted, var).map_err(|e| e.to_string())?;
        let reduced_nu = minimize_presentation(&reduced).map_err(|e| e.to_string())?.nu();
        let nu = minimize_presentation(&PresentationMatrix::new(mf.f.clone(), mf.phi.clone()))
            .map_err(|e| e.to_string())?
            .nu();
        Ok(json!({
            "f": mf.f.to_poly_string(),
            "phi": mf.phi.to_text(),
            "lifted_equation": lifted.f.to_poly_string(),
            "lifted_phi": lifted.phi.to_text(),
            "lifted_psi": lifted.psi.to_text(),
            "lift_verified": verified,
            "nu": nu,
            "lifted_nu": lifted_nu,
            "reduced_nu": reduced_nu,
        }))
    })();
    match result {
        Ok(v) => Outcome::ok(render_value(&v, format)),
        Err(e) => Outcome::fail(EXIT_USAGE, e),
    }
}

fn render_value(v: &Value, format: Format) -> String {
    match format {
        Format::Json => format!("{v}\n"),
        Format::Text => {
            let mut out = String::new();
            if let Value::Object(map) = v {
                for (k, val) in map {
                    match val {
                        Value::String(s) => out.push_str(&format!("{k}: {s}\n")),
                        other => out.push_str(&format!("{k}: {other}\n")),
                    }
                }
            }
            out
        }
    }
}

fn factorization_from_text(
    f: &str,
    phi: &str,
    psi: Option<&str>,
    prec: u32,
    field: FieldSpec,
) -> Result<MatrixFactorization, String> {
    let mut names = infer_variables(f).map_err(|e| e.to_string())?;
    for t in [Some(phi), psi].into_iter().flatten() {
        for v in infer_variables(&t.replace([';', ','], "+")).map_err(|e| e.to_string())? {
            if !names.contains(&v) {
                names.push(v);
            }
        }
    }
    let ctx = SeriesContext::new(names, field);
    let f = parse_in(f, &ctx, prec).map_err(|e| e.to_string())?;
    let phi = SeriesMatrix::parse(phi, &ctx, prec).map_err(|e| e.to_string())?;
    let psi = match psi {
        Some(p) => SeriesMatrix::parse(p, &ctx, prec).map_err(|e| e.to_string())?,
        None => crate::catalog::complement(&f, &phi).map_err(|e| e.to_string())?,
    };
    MatrixFactorization::new(f, phi, psi).map_err(|e| e.to_string())
}

fn pair_error_code(e: &PairError) -> i32 {
    match e {
        PairError::PrecisionInsufficient(_) => EXIT_PRECISION,
        _ => EXIT_USAGE,
    }
}

fn run_construct(case: &str, n: usize, field: FieldSpec, format: Format, seed: u64) -> Outcome {
    let opts = IndecomposabilityOptions { seed, ..Default::default() };
    let result = (|| -> Result<Value, PairError> {
        if case == "kd" {
            let pair = Arc::new(ArtinianPair::k_into_d(field));
            let m = build_indecomposable_pair_module(&pair, n)?;
            return Ok(json!({
                "pair": "k -> k[x,y]/(x^2,xy,y^2)",
                "rank": n,
                "dim_v": m.v.dim(),
                "dim_w": m.w_dim(),
                "indecomposable": is_indecomposable_pair_module(&m, &opts)?,
            }));
        }
        let ext = match case {
            "one" => case_one(field),
            "two" => case_two(field),
            other => {
                let path = other
                    .strip_prefix('@')
                    .ok_or_else(|| PairError::Parse(format!("unknown case {other}; use one, two, kd or @file")))?;
                let text = std::fs::read_to_string(path).map_err(|e| PairError::Parse(format!("{path}: {e}")))?;
                FiniteExtensionSpec::parse(&text, field)?
            }
        };
        let (nu_rs, codim) = pair_invariants(&ext)?;
        let square = conductor_square(&ext, DEFAULT_MAX_DEGREE)?;
        let route = jordan_route(&square.pair)?;
        let m = build_indecomposable_pair_module(&square.pair, n)?;
        let indecomposable = match is_indecomposable_pair_module(&m, &opts) {
            Ok(b) => Value::Bool(b),
            Err(PairError::Inconclusive(_) | PairError::DimensionTooLarge { .. }) => Value::Null,
            Err(e) => return Err(e),
        };
        let lifted = lift_module(&m, &square, DEFAULT_MAX_DEGREE)?;
        Ok(json!({
            "f": ext.base_equation.to_poly_string(),
            "nu_RS": nu_rs,
            "codim": codim,
            "conductor": square.conductor.generators.iter().map(|g| g.to_poly_string()).collect::<Vec<_>>(),
            "dim_A": square.conductor.dim_a,
            "dim_B": square.conductor.dim_b,
            "route": format!("{route:?}"),
            "rank": n,
            "dim_v": m.v.dim(),
            "indecomposable": indecomposable,
            "lifted_rank": lifted.rank,
            "lifted_nu": lifted.nu,
            "relations_exact_below": lifted.precision,
            "presentation": lifted.presentation.matrix.to_text(),
        }))
    })();
    match result {
        Ok(v) => Outcome::ok(render_value(&v, format)),
        Err(e) => Outcome::fail(pair_error_code(&e), e),
    }
}

fn run_verify(
    poly: Option<String>,
    phi: Option<String>,
    psi: Option<String>,
    prec: Option<u32>,
    field: FieldSpec,
    format: Format,
) -> Outcome {
    match (poly, phi) {
        (Some(f), Some(phi)) => {
            let prec = prec.unwrap_or(32);
            match factorization_from_text(&f, &phi, psi.as_deref(), prec, field).and_then(|mf| {
                verify_mf(&mf).map_err(|e| e.to_string())
            }) {
                Ok(ok) => Outcome::ok(render_value(&json!({ "matrix_factorization": ok }), format)),
                Err(e) => Outcome::fail(EXIT_USAGE, e),
            }
        }
        (None, None) => match non_membership_checks(field) {
            Ok(reports) => {
                let rows: Vec<Value> = reports
                    .iter()
                    .map(|r| json!({ "element": r.element, "ideal": r.ideal, "member": r.member, "degree": r.degree }))
                    .collect();
                match format {
                    Format::Json => Outcome::ok(format!("{}\n", Value::Array(rows))),
                    Format::Text => Outcome::ok(reports.iter().map(|r| format!("{}\n", r.describe())).collect()),
                }
            }
            Err(e) => Outcome::fail(pair_error_code(&e), e),
        },
        _ => Outcome::fail(EXIT_USAGE, "give -f EXPR with --phi (and optionally --psi), or no arguments"),
    }
}
