//! Invariants of a germ `f`: splitting off squares, Milnor numbers,
//! reducedness and the tangent cone of a cubic.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::bivariate::{singular_gcd, BiPoly};
use crate::field::Scalar;
use crate::jets::{JetError, JetQuotient};
use crate::series::{Ctx, Order, SeriesContext, SeriesError, TruncatedSeries, WeierstrassData};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LocalError {
    #[error("characteristic 2 is not supported here")]
    CharacteristicTwo,
    #[error("order {0} where order 2 was required")]
    NotOrderTwo(u32),
    #[error("order {0} where order 3 was required")]
    NotOrderThree(u32),
    #[error("characteristic {0} is too small for this test")]
    SmallCharacteristic(u64),
    #[error("precision {precision} is insufficient: {reason}")]
    PrecisionInsufficient { precision: u32, reason: String },
    #[error("expected a germ in two variables, got {0}")]
    NotBivariate(usize),
    #[error("an exact polynomial input is required")]
    NotExact,
    #[error("no coordinates over this field make the leading form regular")]
    NoGeneralCoordinates,
    #[error(transparent)]
    Series(SeriesError),
}

impl From<SeriesError> for LocalError {
    fn from(e: SeriesError) -> Self {
        match e {
            SeriesError::PrecisionInsufficient { precision, reason } => {
                LocalError::PrecisionInsufficient { precision, reason }
            }
            e => LocalError::Series(e),
        }
    }
}

fn jet_error(precision: u32, e: JetError) -> LocalError {
    LocalError::PrecisionInsufficient { precision, reason: e.to_string() }
}

/// One step of [`split_quadratic`].
#[derive(Clone, Debug)]
pub enum ChangeStep {
    /// `x_target ↦ x_target + x_source` in `ctx`.
    Shear { ctx: Ctx, target: usize, source: usize },
    /// Before the step, `f = unit * σ(y^2 + g)` with `σ: y ↦ image`, where
    /// `y` is variable `var` of `ctx` and `g` is the next residual.
    Complete { ctx: Ctx, var: usize, image: TruncatedSeries, unit: TruncatedSeries },
}

#[derive(Clone, Debug)]
pub struct SplitResult {
    pub residual: TruncatedSeries,
    pub squares_split: usize,
    pub change_log: Vec<ChangeStep>,
}

impl SplitResult {
    /// Rebuilds the input from the residual by replaying the log backwards.
    pub fn reconstruct(&self) -> Result<TruncatedSeries, LocalError> {
        let mut r = self.residual.clone();
        for step in self.change_log.iter().rev() {
            match step {
                ChangeStep::Complete { ctx, var, image, unit } => {
                    let g = r.change_context(ctx)?;
                    let y = TruncatedSeries::var(ctx, *var, g.precision());
                    let inner = y.mul(&y)?.add(&g)?;
                    r = unit.mul(&inner.substitute(&BTreeMap::from([(*var, image.clone())]))?)?;
                }
                ChangeStep::Shear { ctx, target, source } => {
                    let n = r.precision();
                    let back = TruncatedSeries::var(ctx, *target, n).sub(&TruncatedSeries::var(ctx, *source, n))?;
                    r = r.substitute(&BTreeMap::from([(*target, back)]))?;
                }
            }
        }
        Ok(r)
    }

    /// Whether the reconstruction agrees with `f` below the working precision.
    pub fn verify(&self, f: &TruncatedSeries) -> bool {
        self.reconstruct().map(|r| r.agrees_with(f)).unwrap_or(false)
    }
}

fn square_exps(n: usize, i: usize) -> Vec<u32> {
    let mut e = vec![0; n];
    e[i] = 2;
    e
}

fn cross_exps(n: usize, i: usize, j: usize) -> Vec<u32> {
    let mut e = vec![0; n];
    e[i] = 1;
    e[j] = 1;
    e
}

fn order_or_error(f: &TruncatedSeries) -> Result<Option<u32>, LocalError> {
    match f.jet_order().order {
        Order::Finite(o) => Ok(Some(o)),
        Order::Infinite => Ok(None),
        Order::AbovePrecision => Err(LocalError::PrecisionInsufficient {
            precision: f.precision(),
            reason: "the germ vanishes below the working precision".into(),
        }),
    }
}

fn drop_variable(ctx: &Ctx, j: usize) -> Ctx {
    let vars = ctx.vars().iter().enumerate().filter(|(i, _)| *i != j).map(|(_, v)| v.clone());
    SeriesContext::new(vars, ctx.field())
}

/// Writes `f = unit * σ(y^2 + g)` for `y` = variable `j`, assuming the
/// quadratic part of `f` contains `y^2`.
fn complete_square(
    f: &TruncatedSeries,
    j: usize,
) -> Result<(TruncatedSeries, TruncatedSeries, TruncatedSeries), LocalError> {
    let field = f.field();
    let half = field.inv(&field.from_i64(2)).ok_or(LocalError::CharacteristicTwo)?;
    let y = f.var_series(j);
    let parts = f.expand_in(j);
    if f.is_exact() && parts.len() == 3 {
        // a*f = (a*y + b/2)^2 + (a*c - b^2/4), all polynomial.
        let n = f.precision().max(2 * f.total_degree().unwrap_or(0) + 2);
        let [c, b, a] = [0, 1, 2].map(|k| parts[k].with_precision(n));
        let bh = b.scale(&half);
        let g = a.mul(&c)?.sub(&bh.mul(&bh)?)?;
        let image = a.mul(&y.with_precision(n))?.add(&bh)?;
        let unit = a.invert_unit()?.with_precision(f.precision());
        return Ok((image, unit, g));
    }
    let w: WeierstrassData = f.weierstrass_prepare(j)?;
    debug_assert_eq!(w.degree, 2);
    let (b1, b2) = (&w.coefficients[0], &w.coefficients[1]);
    let b1h = b1.scale(&half);
    let g = b2.sub(&b1h.mul(&b1h)?)?;
    let image = y.add(&b1h)?;
    Ok((image, w.unit, g))
}

/// Splits off squares until two variables remain, or the residual stops
/// having order two.
pub fn split_quadratic(f: &TruncatedSeries) -> Result<SplitResult, LocalError> {
    if f.field().characteristic() == 2 {
        return Err(LocalError::CharacteristicTwo);
    }
    match order_or_error(f)? {
        Some(2) => {}
        Some(o) => return Err(LocalError::NotOrderTwo(o)),
        None => return Err(LocalError::NotOrderTwo(u32::MAX)),
    }
    let mut cur = f.clone();
    let mut log = Vec::new();
    let mut squares_split = 0;
    while cur.ctx().nvars() > 2 && cur.jet_order().order == Order::Finite(2) {
        let ctx = cur.ctx().clone();
        let n = ctx.nvars();
        let q = cur.homogeneous_part(2);
        let j = match (0..n).rev().find(|&j| !q.coefficient(&square_exps(n, j)).is_zero()) {
            Some(j) => j,
            None => {
                let (i, j) = (0..n)
                    .rev()
                    .flat_map(|j| (0..j).rev().map(move |i| (i, j)))
                    .find(|&(i, j)| !q.coefficient(&cross_exps(n, i, j)).is_zero())
                    .expect("a nonzero quadratic form has a square or a cross term");
                let p = cur.precision();
                let img = TruncatedSeries::var(&ctx, i, p).add(&TruncatedSeries::var(&ctx, j, p))?;
                cur = cur.substitute(&BTreeMap::from([(i, img)]))?;
                log.push(ChangeStep::Shear { ctx: ctx.clone(), target: i, source: j });
                j
            }
        };
        let (image, unit, g) = complete_square(&cur, j)?;
        log.push(ChangeStep::Complete { ctx: ctx.clone(), var: j, image, unit });
        cur = g.change_context(&drop_variable(&ctx, j))?;
        squares_split += 1;
    }
    Ok(SplitResult { residual: cur, squares_split, change_log: log })
}

fn require_bivariate(f: &TruncatedSeries) -> Result<(), LocalError> {
    match f.ctx().nvars() {
        2 => Ok(()),
        n => Err(LocalError::NotBivariate(n)),
    }
}

/// A bivariate germ in coordinates where its leading form contains `y^e`.
#[derive(Clone, Debug)]
pub struct GeneralPosition {
    pub germ: TruncatedSeries,
    pub y: usize,
    /// `c` when `x ↦ x + c*y` was applied to reach these coordinates.
    pub shear: Option<Scalar>,
    pub order: u32,
}

/// Chooses coordinates in which `f(0, y)` has order `ord(f)`.
pub fn general_position(f: &TruncatedSeries) -> Result<GeneralPosition, LocalError> {
    require_bivariate(f)?;
    let field = f.field();
    let e = match order_or_error(f)? {
        Some(e) => e,
        None => return Err(LocalError::NotOrderTwo(u32::MAX)),
    };
    let lead = f.homogeneous_part(e);
    if !lead.coefficient(&[0, e]).is_zero() {
        return Ok(GeneralPosition { germ: f.clone(), y: 1, shear: None, order: e });
    }
    if !lead.coefficient(&[e, 0]).is_zero() {
        return Ok(GeneralPosition { germ: f.clone(), y: 0, shear: None, order: e });
    }
    // The coefficient of y^e after x ↦ x + c*y is lead(c, 1).
    let limit = match field.characteristic() {
        0 => e as u64 + 1,
        p => p - 1,
    };
    for c in 1..=limit {
        let c = field.from_i64(c as i64);
        let value = lead.terms().fold(Scalar::zero(), |acc, (m, a)| {
            field.add(&acc, &field.mul(a, &field.pow(&c, m.exps()[0] as u64)))
        });
        if !value.is_zero() {
            let n = f.precision();
            let img = f.var_series(0).add(&f.var_series(1).scale(&c))?;
            let germ = f.substitute(&BTreeMap::from([(0, img.with_precision(n))]))?;
            return Ok(GeneralPosition { germ, y: 1, shear: Some(c), order: e });
        }
    }
    Err(LocalError::NoGeneralCoordinates)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reducedness {
    Reduced,
    NonReduced,
    Undecided,
}

/// Exact reducedness of a polynomial germ in two variables: non-reduced
/// iff `gcd(f, f_x, f_y)` vanishes at the origin.
pub fn is_reduced_local(f: &TruncatedSeries) -> Result<bool, LocalError> {
    require_bivariate(f)?;
    if !f.is_exact() {
        return Err(LocalError::NotExact);
    }
    if f.is_exact_zero() {
        return Ok(true);
    }
    Ok(!singular_gcd(f).value_at_origin().is_zero())
}

/// Discriminant of a distinguished polynomial of degree 2 or 3.
pub fn discriminant(w: &WeierstrassData) -> Result<Option<TruncatedSeries>, LocalError> {
    let field = w.unit.field();
    let b = &w.coefficients;
    let k = |n: i64| field.from_i64(n);
    match w.degree {
        2 => Ok(Some(b[0].mul(&b[0])?.sub(&b[1].scale(&k(4)))?)),
        3 if field.characteristic() != 3 => {
            // y ↦ y - b1/3 gives y^3 + p*y + q.
            let third = field.inv(&k(3)).expect("char is not 3");
            let b1b1 = b[0].mul(&b[0])?;
            let p = b[1].sub(&b1b1.scale(&third))?;
            let q = b1b1
                .mul(&b[0])?
                .scale(&field.mul(&k(2), &field.pow(&third, 3)))
                .sub(&b[0].mul(&b[1])?.scale(&third))?
                .add(&b[2])?;
            let d = p.pow(3).scale(&k(-4)).sub(&q.mul(&q)?.scale(&k(27)))?;
            Ok(Some(d))
        }
        _ => Ok(None),
    }
}

/// Reducedness read off the discriminant of a Weierstrass polynomial.
pub fn discriminant_reducedness(w: &WeierstrassData) -> Result<Reducedness, LocalError> {
    if w.degree <= 1 {
        return Ok(Reducedness::Reduced);
    }
    let p = w.unit.field().characteristic();
    let Some(d) = discriminant(w)? else { return Ok(Reducedness::Undecided) };
    Ok(match d.jet_order().order {
        Order::Finite(_) => Reducedness::Reduced,
        Order::Infinite if p == 0 || p > w.degree as u64 => Reducedness::NonReduced,
        _ => Reducedness::Undecided,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MilnorNumber {
    Finite { value: usize, certified: bool },
    Infinite,
}

/// `dim_k k[[x,y]]/(f_x, f_y)`, certified by the Nakayama closure test.
pub fn milnor_number(f: &TruncatedSeries) -> Result<MilnorNumber, LocalError> {
    require_bivariate(f)?;
    if f.is_exact() && !is_reduced_local(f)? {
        return Ok(MilnorNumber::Infinite);
    }
    let cap = if f.is_exact() {
        let d = f.total_degree().unwrap_or(0).max(2);
        (d - 1) * (d - 1) + 2
    } else {
        f.precision()
    };
    let gens = [f.partial(0), f.partial(1)];
    let q = JetQuotient::new(f.ctx(), &gens, cap).map_err(|e| jet_error(f.precision(), e))?;
    Ok(MilnorNumber::Finite { value: q.dim(), certified: true })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TangentConePattern {
    Sqf3,
    Dbl,
    Trp,
}

impl TangentConePattern {
    pub fn tag(self) -> &'static str {
        match self {
            TangentConePattern::Sqf3 => "SQF3",
            TangentConePattern::Dbl => "DBL",
            TangentConePattern::Trp => "TRP",
        }
    }
}

/// Root multiplicity pattern of the cubic leading form.
pub fn tangent_cone_pattern(f: &TruncatedSeries) -> Result<TangentConePattern, LocalError> {
    require_bivariate(f)?;
    let p = f.field().characteristic();
    if p == 2 || p == 3 {
        return Err(LocalError::SmallCharacteristic(p));
    }
    match order_or_error(f)? {
        Some(3) => {}
        Some(o) => return Err(LocalError::NotOrderThree(o)),
        None => return Err(LocalError::NotOrderThree(u32::MAX)),
    }
    let lead = f.homogeneous_part(3).with_precision(4);
    let g = BiPoly::from_series(&lead)
        .gcd(&BiPoly::from_series(&lead.partial(0)))
        .gcd(&BiPoly::from_series(&lead.partial(1)));
    let degree = g.to_series(f.ctx(), 4).total_degree().unwrap_or(0);
    Ok(match degree {
        0 => TangentConePattern::Sqf3,
        1 => TangentConePattern::Dbl,
        _ => TangentConePattern::Trp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::parse::parse_series;

    fn q() -> FieldSpec {
        FieldSpec::rationals()
    }

    fn f2(t: &str) -> TruncatedSeries {
        parse_series(t, &["x", "y"], q(), 20).unwrap()
    }

    fn f3(t: &str) -> TruncatedSeries {
        parse_series(t, &["x0", "x1", "x2"], q(), 16).unwrap()
    }

    fn residual_is(split: &SplitResult, expected: &str) {
        let vars: Vec<&str> = split.residual.ctx().vars().iter().map(String::as_str).collect();
        let g = parse_series(expected, &vars, q(), 16).unwrap();
        assert!(split.residual.agrees_with(&g), "{} vs {expected}", split.residual);
    }

    #[test]
    fn split_examples() {
        let f = f3("x1^2 + x2^2");
        let s = split_quadratic(&f).unwrap();
        assert_eq!(s.squares_split, 1);
        residual_is(&s, "x1^2");
        assert!(s.verify(&f));

        let f = f3("x0^3 + x1^4 + x2^2");
        let s = split_quadratic(&f).unwrap();
        residual_is(&s, "x0^3 + x1^4");
        assert!(s.verify(&f));

        let f = f3("x2^2 + 2*x0*x2 + x0^3");
        let s = split_quadratic(&f).unwrap();
        residual_is(&s, "x0^3 - x0^2");
        assert!(s.verify(&f));
    }

    #[test]
    fn split_with_shear_and_series_coefficients() {
        let f = f3("x0*x2 + x1^3 + x2^3*x0 + x2^5");
        let s = split_quadratic(&f).unwrap();
        assert!(matches!(s.change_log[0], ChangeStep::Shear { .. }));
        assert!(s.verify(&f));
        let f = f3("x2^2*(1 + x0) + x2^3 + x1^3 + x0*x1*x2");
        let s = split_quadratic(&f).unwrap();
        assert!(s.verify(&f));
    }

    #[test]
    fn split_preconditions() {
        let f = parse_series("x0^2 + x1^2 + x2^2", &["x0", "x1", "x2"], FieldSpec::prime(2).unwrap(), 8).unwrap();
        assert_eq!(split_quadratic(&f).unwrap_err(), LocalError::CharacteristicTwo);
        assert_eq!(split_quadratic(&f3("x0^3 + x2^3")).unwrap_err(), LocalError::NotOrderTwo(3));
    }

    /// `dim k[[x,y]]/(x^a, y^b)` by counting standard monomials.
    fn monomial_colength(a: u32, b: u32) -> usize {
        (0..a).flat_map(|i| (0..b).map(move |j| (i, j))).count()
    }

    #[test]
    fn milnor_examples() {
        assert_eq!(milnor_number(&f2("x^2 + y^2")).unwrap(), MilnorNumber::Finite { value: 1, certified: true });
        assert_eq!(
            milnor_number(&f2("x^3 + y^4")).unwrap(),
            MilnorNumber::Finite { value: monomial_colength(2, 3), certified: true }
        );
        assert_eq!(milnor_number(&f2("y^2")).unwrap(), MilnorNumber::Infinite);
        for (a, b) in [(2, 5), (3, 5), (4, 4), (2, 9)] {
            let f = f2(&format!("x^{a} + y^{b}"));
            assert_eq!(
                milnor_number(&f).unwrap(),
                MilnorNumber::Finite { value: monomial_colength(a - 1, b - 1), certified: true }
            );
        }
    }

    #[test]
    fn milnor_of_truncated_germ() {
        let f = parse_series("x^3 + y^4", &["x", "y"], q(), 12).unwrap().as_inexact();
        assert_eq!(milnor_number(&f).unwrap(), MilnorNumber::Finite { value: 6, certified: true });
        let f = parse_series("x^3 + y^4", &["x", "y"], q(), 5).unwrap().as_inexact();
        assert!(matches!(milnor_number(&f), Err(LocalError::PrecisionInsufficient { .. })));
    }

    #[test]
    fn reducedness_examples() {
        assert!(is_reduced_local(&f2("y^2 - x^3")).unwrap());
        assert!(!is_reduced_local(&f2("x*y^2")).unwrap());
        assert!(is_reduced_local(&f2("x^2 + y^2")).unwrap());
        // The repeated factor misses the origin.
        assert!(is_reduced_local(&f2("x*(y - 1)^2")).unwrap());
        assert!(!is_reduced_local(&f2("(y^2 - x^3)^2*(1 + x)")).unwrap());
    }

    #[test]
    fn discriminant_agrees_with_gcd() {
        for t in ["y^2 - x^3", "y^2*(y + x^2)", "y^3 + x^4", "(y - x)^2*(y + x)", "y^3 - x^2*y"] {
            let f = f2(t);
            let w = f.weierstrass_prepare(1).unwrap();
            let r = discriminant_reducedness(&w).unwrap();
            let expected = if is_reduced_local(&f).unwrap() { Reducedness::Reduced } else { Reducedness::NonReduced };
            assert_eq!(r, expected, "{t}");
        }
    }

    #[test]
    fn tangent_cone_examples() {
        assert_eq!(tangent_cone_pattern(&f2("x*y^2")).unwrap(), TangentConePattern::Dbl);
        assert_eq!(tangent_cone_pattern(&f2("y^3")).unwrap(), TangentConePattern::Trp);
        assert_eq!(tangent_cone_pattern(&f2("y^3 + x^2*y")).unwrap(), TangentConePattern::Sqf3);
        let f = parse_series("y^3", &["x", "y"], FieldSpec::prime(3).unwrap(), 8).unwrap();
        assert_eq!(tangent_cone_pattern(&f).unwrap_err(), LocalError::SmallCharacteristic(3));
    }

    #[test]
    fn general_position_shears_when_needed() {
        let g = general_position(&f2("x*y*(x + 2*y)")).unwrap();
        assert!(g.shear.is_some());
        assert!(!g.germ.coefficient(&[0, 3]).is_zero());
    }
}
