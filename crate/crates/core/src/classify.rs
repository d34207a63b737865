//! Cohen-Macaulay type of `k[[x_0, ..., x_d]]/(f)`.

use std::fmt;

use crate::local::{
    discriminant, discriminant_reducedness, general_position, is_reduced_local, milnor_number, split_quadratic,
    tangent_cone_pattern, LocalError, MilnorNumber, Reducedness, TangentConePattern,
};
use crate::series::{Order, TruncatedSeries};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Finite,
    BoundedInfinite,
    Unbounded,
    Undetermined(String),
}

impl Verdict {
    pub fn tag(&self) -> &'static str {
        match self {
            Verdict::Finite => "finite",
            Verdict::BoundedInfinite => "bounded-infinite",
            Verdict::Unbounded => "unbounded",
            Verdict::Undetermined(_) => "undetermined",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalForm {
    Regular,
    A(u32),
    AInfinity,
    D(u32),
    DInfinity,
    E6,
    E7,
    E8,
    None,
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormalForm::Regular => write!(f, "regular"),
            NormalForm::A(n) => write!(f, "A{n}"),
            NormalForm::AInfinity => write!(f, "Ainfinity"),
            NormalForm::D(n) => write!(f, "D{n}"),
            NormalForm::DInfinity => write!(f, "Dinfinity"),
            NormalForm::E6 => write!(f, "E6"),
            NormalForm::E7 => write!(f, "E7"),
            NormalForm::E8 => write!(f, "E8"),
            NormalForm::None => write!(f, "none"),
        }
    }
}

/// How the verdict was reached.
#[derive(Clone, Debug, Default)]
pub struct Witness {
    pub squares_split: usize,
    /// The two-variable germ the curve analysis ran on, when a split happened.
    pub residual: Option<TruncatedSeries>,
    pub steps: Vec<String>,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.steps.join("; "))
    }
}

#[derive(Clone, Debug)]
pub struct CmTypeReport {
    pub verdict: Verdict,
    pub normal_form: NormalForm,
    pub dimension: usize,
    pub multiplicity: u32,
    pub generator_bound: Option<u64>,
    pub witness: Witness,
    pub precision_used: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ClassifyError {
    #[error("the input is zero or a unit")]
    ZeroOrUnitInput,
    #[error("a germ in at least two variables is required")]
    DimensionZero,
    #[error("characteristic 2 is not supported in dimension {0}")]
    CharacteristicTwoHighDimension(usize),
    #[error("precision {precision} is insufficient ({reason}); retry with --prec {suggested}")]
    PrecisionInsufficient { precision: u32, suggested: u32, reason: String },
    #[error(transparent)]
    Local(LocalError),
}

impl From<LocalError> for ClassifyError {
    fn from(e: LocalError) -> Self {
        match e {
            LocalError::PrecisionInsufficient { precision, reason } => {
                ClassifyError::PrecisionInsufficient { precision, suggested: 2 * precision.max(4), reason }
            }
            LocalError::CharacteristicTwo => ClassifyError::CharacteristicTwoHighDimension(2),
            e => ClassifyError::Local(e),
        }
    }
}

fn insufficient(f: &TruncatedSeries, reason: &str) -> ClassifyError {
    let precision = f.precision();
    ClassifyError::PrecisionInsufficient { precision, suggested: 2 * precision.max(4), reason: reason.into() }
}

/// Outcome of the curve analysis, before bounds are attached.
struct CurveResult {
    verdict: Verdict,
    normal_form: NormalForm,
    /// The `A_n` route, where ideals suffice for the generator count.
    via_ideals: bool,
}

impl CurveResult {
    fn new(verdict: Verdict, normal_form: NormalForm) -> Self {
        CurveResult { verdict, normal_form, via_ideals: false }
    }
}

fn char_excluded(p: u64) -> bool {
    matches!(p, 2 | 3 | 5)
}

fn milnor(g: &TruncatedSeries) -> Result<u32, ClassifyError> {
    match milnor_number(g)? {
        MilnorNumber::Finite { value, .. } => Ok(value as u32),
        MilnorNumber::Infinite => Err(insufficient(g, "Milnor number of a reduced germ came out infinite")),
    }
}

fn reducedness(g: &TruncatedSeries, w: &crate::series::WeierstrassData) -> Result<Reducedness, ClassifyError> {
    if g.is_exact() {
        return Ok(if is_reduced_local(g)? { Reducedness::Reduced } else { Reducedness::NonReduced });
    }
    Ok(discriminant_reducedness(w)?)
}

/// Decision tree for a germ in two variables.
fn analyze_curve(g: &TruncatedSeries, steps: &mut Vec<String>) -> Result<CurveResult, ClassifyError> {
    let p = g.field().characteristic();
    let e = match g.jet_order().order {
        Order::Finite(e) => e,
        Order::Infinite => return Err(ClassifyError::ZeroOrUnitInput),
        Order::AbovePrecision => return Err(insufficient(g, "the germ vanishes below the working precision")),
    };
    steps.push(format!("curve multiplicity {e}"));
    if e == 1 {
        return Ok(CurveResult::new(Verdict::Finite, NormalForm::Regular));
    }
    if e >= 4 {
        steps.push("multiplicity at least 4".into());
        return Ok(CurveResult::new(Verdict::Unbounded, NormalForm::None));
    }
    let gp = match general_position(g) {
        Ok(gp) => gp,
        Err(LocalError::NoGeneralCoordinates) => {
            let reason = format!("no coordinates over F_{p} put the tangent cone in general position");
            return Ok(CurveResult::new(Verdict::Undetermined(reason), NormalForm::None));
        }
        Err(e) => return Err(e.into()),
    };
    let w = gp.germ.weierstrass_prepare(gp.y).map_err(LocalError::from)?;
    let red = reducedness(&gp.germ, &w)?;
    if red == Reducedness::Undecided {
        if e == 3 && !char_excluded(p) && tangent_cone_pattern(&gp.germ)? == TangentConePattern::Trp {
            return triple_line_unknown_reducedness(g, steps);
        }
        return Err(insufficient(g, "the discriminant vanishes below the working precision"));
    }
    let reduced = red == Reducedness::Reduced;
    steps.push(if reduced { "reduced".into() } else { "not reduced".into() });
    if e == 2 {
        if !reduced {
            return Ok(CurveResult::new(Verdict::BoundedInfinite, NormalForm::AInfinity));
        }
        let nf = match p {
            2 => NormalForm::None,
            0 => {
                let mu = milnor(g)?;
                steps.push(format!("Milnor number {mu}"));
                NormalForm::A(mu)
            }
            _ => {
                let delta = discriminant(&w)?.expect("degree two");
                let Some(ord) = delta.jet_order().order.finite() else {
                    return Err(insufficient(g, "the discriminant vanishes below the working precision"));
                };
                steps.push(format!("discriminant order {ord}"));
                NormalForm::A(ord - 1)
            }
        };
        return Ok(CurveResult { verdict: Verdict::Finite, normal_form: nf, via_ideals: true });
    }
    // e == 3
    if reduced && char_excluded(p) {
        let reason = format!("reduced multiplicity-3 germs are not classified in characteristic {p}");
        return Ok(CurveResult::new(Verdict::Undetermined(reason), NormalForm::None));
    }
    let pattern = match tangent_cone_pattern(&gp.germ) {
        Ok(t) => t,
        Err(LocalError::SmallCharacteristic(_)) => {
            let reason = format!("tangent cone pattern unavailable in characteristic {p}");
            return Ok(CurveResult::new(Verdict::Undetermined(reason), NormalForm::None));
        }
        Err(e) => return Err(e.into()),
    };
    steps.push(format!("tangent cone {}", pattern.tag()));
    let result = match (reduced, pattern) {
        (true, TangentConePattern::Sqf3) => CurveResult::new(Verdict::Finite, NormalForm::D(4)),
        (true, TangentConePattern::Dbl) => {
            let mu = milnor(g)?;
            steps.push(format!("Milnor number {mu}"));
            CurveResult::new(Verdict::Finite, NormalForm::D(mu))
        }
        (true, TangentConePattern::Trp) => {
            let mu = milnor(g)?;
            steps.push(format!("Milnor number {mu}"));
            match mu {
                6 => CurveResult::new(Verdict::Finite, NormalForm::E6),
                7 => CurveResult::new(Verdict::Finite, NormalForm::E7),
                8 => CurveResult::new(Verdict::Finite, NormalForm::E8),
                _ => CurveResult::new(Verdict::Unbounded, NormalForm::None),
            }
        }
        (false, TangentConePattern::Dbl) => CurveResult::new(Verdict::BoundedInfinite, NormalForm::DInfinity),
        (false, _) => CurveResult::new(Verdict::Unbounded, NormalForm::None),
    };
    Ok(result)
}

/// Triple-line cone with reducedness unknown: only `E6`, `E7`, `E8` are
/// finite and each is determined by its 9-jet, so any other jet is unbounded.
fn triple_line_unknown_reducedness(g: &TruncatedSeries, steps: &mut Vec<String>) -> Result<CurveResult, ClassifyError> {
    const E8_DETERMINACY: u32 = 10;
    steps.push(format!("tangent cone {}", TangentConePattern::Trp.tag()));
    match milnor_number(g) {
        Ok(MilnorNumber::Finite { value, certified: true }) if (6..=8).contains(&value) => {
            steps.push(format!("Milnor number {value}"));
            let nf = [NormalForm::E6, NormalForm::E7, NormalForm::E8][value - 6];
            Ok(CurveResult::new(Verdict::Finite, nf))
        }
        _ if g.precision() >= E8_DETERMINACY => {
            steps.push("not E6, E7 or E8 at this precision".into());
            Ok(CurveResult::new(Verdict::Unbounded, NormalForm::None))
        }
        _ => Err(insufficient(g, "the discriminant vanishes below the working precision")),
    }
}

fn generator_bound(verdict: &Verdict, nf: NormalForm, via_ideals: bool, d: usize, p: u64) -> Option<u64> {
    let d = d as u32;
    match verdict {
        Verdict::Finite if nf == NormalForm::Regular => Some(1),
        Verdict::Finite if !char_excluded(p) => Some(6 * 2u64.pow(d - 1)),
        Verdict::Finite if via_ideals => Some(2u64.pow(d)),
        Verdict::BoundedInfinite => Some(2u64.pow(d)),
        _ => None,
    }
}

/// Classifies `k[[vars]]/(f)` at the precision carried by `f`.
pub fn classify(f: &TruncatedSeries) -> Result<CmTypeReport, ClassifyError> {
    let n = f.ctx().nvars();
    if n < 2 {
        return Err(ClassifyError::DimensionZero);
    }
    let d = n - 1;
    let p = f.field().characteristic();
    let e = match f.jet_order().order {
        Order::Finite(0) | Order::Infinite => return Err(ClassifyError::ZeroOrUnitInput),
        Order::Finite(e) => e,
        Order::AbovePrecision => return Err(insufficient(f, "the germ vanishes below the working precision")),
    };
    let mut witness = Witness::default();
    witness.steps.push(format!("dimension {d}, multiplicity {e}"));
    let report = |verdict: Verdict, nf: NormalForm, via_ideals: bool, witness: Witness| {
        let generator_bound = generator_bound(&verdict, nf, via_ideals, d, p);
        CmTypeReport {
            verdict,
            normal_form: nf,
            dimension: d,
            multiplicity: e,
            generator_bound,
            witness,
            precision_used: f.precision(),
        }
    };
    if e == 1 {
        return Ok(report(Verdict::Finite, NormalForm::Regular, false, witness));
    }
    if d == 1 {
        let r = analyze_curve(f, &mut witness.steps)?;
        return Ok(report(r.verdict, r.normal_form, r.via_ideals, witness));
    }
    if e >= 3 {
        witness.steps.push("multiplicity at least 3 in dimension at least 2".into());
        return Ok(report(Verdict::Unbounded, NormalForm::None, false, witness));
    }
    if p == 2 {
        return Err(ClassifyError::CharacteristicTwoHighDimension(d));
    }
    let split = split_quadratic(f)?;
    let g = split.residual.clone();
    witness.squares_split = split.squares_split;
    witness.steps.push(format!("split {} squares, residual {}", split.squares_split, g));
    witness.residual = Some(g.clone());
    match g.jet_order().order {
        Order::Infinite => {
            witness.steps.push("residual is zero".into());
            return Ok(report(Verdict::BoundedInfinite, NormalForm::AInfinity, false, witness));
        }
        Order::AbovePrecision => return Err(insufficient(f, "the residual vanishes below the working precision")),
        Order::Finite(_) if g.ctx().nvars() > 2 => {
            witness.steps.push("residual has multiplicity at least 3 in dimension at least 2".into());
            return Ok(report(Verdict::Unbounded, NormalForm::None, false, witness));
        }
        Order::Finite(_) => {}
    }
    let r = analyze_curve(&g, &mut witness.steps)?;
    Ok(report(r.verdict, r.normal_form, r.via_ideals, witness))
}
