//! Finite birational extensions of plane curve germs, their conductor
//! squares and Artinian pairs, Jordan-type pair modules, and the pullback
//! lifting of pair modules to maximal Cohen-Macaulay modules.
//!
//! An extension `S = R[g_1, ..., g_t]` of `R = k[[x, y]]/(f)` with
//! `g_i = N_i / x^(k_i)` is handled through the ideal `J = x^K S` of `R`,
//! `K = max k_i`, so that every computation happens in finite quotients of
//! `P = k[[x, y]]`.

use std::sync::Arc;

use num_traits::Zero;

use crate::algebra::{decide_locality, FiniteAlgebra, Locality};
use crate::field::{FieldSpec, Scalar};
use crate::jets::{colength, JetError, JetQuotient};
use crate::linalg::{axpy, nullspace, unit_vector, zero_vector, Subspace, Vector};
use crate::matrix::{PresentationMatrix, SeriesMatrix};
use crate::parse::{parse_in, ParseError};
use crate::series::{Ctx, Monomial, SeriesContext, SeriesError, TruncatedSeries};

/// Degree cap for certified quotients.
pub const DEFAULT_MAX_DEGREE: u32 = 48;
/// Precision used for polynomial text.
const TEXT_PRECISION: u32 = 128;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PairError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("inconsistent multiplication table: {0}")]
    InconsistentTable(String),
    #[error("precision insufficient: {0}")]
    PrecisionInsufficient(String),
    #[error("hypotheses not met: {0}")]
    HypothesesNotMet(String),
    #[error("dimension {dim} exceeds the cap {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },
    #[error("module does not belong to this square: {0}")]
    MismatchedSquare(String),
    #[error("indecomposability undecided: {0}")]
    Inconclusive(String),
    #[error("degenerate pair")]
    Degenerate,
}

impl From<ParseError> for PairError {
    fn from(e: ParseError) -> Self {
        PairError::Parse(e.to_string())
    }
}

impl From<SeriesError> for PairError {
    fn from(e: SeriesError) -> Self {
        PairError::Parse(e.to_string())
    }
}

impl From<JetError> for PairError {
    fn from(e: JetError) -> Self {
        PairError::PrecisionInsufficient(e.to_string())
    }
}

/// `g = numerator / x^x_power`.
#[derive(Clone, Debug)]
pub struct Fraction {
    pub name: String,
    pub numerator: TruncatedSeries,
    pub x_power: u32,
}

/// `g_i g_j = constant + sum_l coefficients[l] g_l` with coefficients in `R`.
#[derive(Clone, Debug)]
pub struct Relation {
    pub left: usize,
    pub right: usize,
    pub constant: TruncatedSeries,
    pub coefficients: Vec<TruncatedSeries>,
}

#[derive(Clone, Debug)]
pub struct FiniteExtensionSpec {
    pub base_equation: TruncatedSeries,
    pub generators: Vec<Fraction>,
    pub relations: Vec<Relation>,
}

/// The ring `k[[x, y]]` extensions live over.
pub fn extension_context(field: FieldSpec) -> Ctx {
    SeriesContext::new(["x", "y"], field)
}

fn x_power(ctx: &Ctx, k: u32) -> TruncatedSeries {
    TruncatedSeries::var(ctx, 0, TEXT_PRECISION).pow(k)
}

impl FiniteExtensionSpec {
    pub fn ctx(&self) -> &Ctx {
        self.base_equation.ctx()
    }

    pub fn field(&self) -> FieldSpec {
        self.ctx().field()
    }

    /// `K = max k_i`.
    pub fn conductor_exponent(&self) -> u32 {
        self.generators.iter().map(|g| g.x_power).max().unwrap_or(0)
    }

    pub fn is_identity(&self) -> bool {
        self.generators.is_empty()
    }

    /// Generators of `J = x^K S` lifted to `P`, together with `f`.
    pub fn j_ideal(&self) -> Vec<TruncatedSeries> {
        let k = self.conductor_exponent();
        let mut gens = vec![self.base_equation.clone(), x_power(self.ctx(), k)];
        for g in &self.generators {
            gens.push(x_power(self.ctx(), k - g.x_power).poly_mul(&g.numerator).expect("same context"));
        }
        gens
    }

    /// Parses the text format: a line `f = ...`, then one line
    /// `name = numerator / x^k` per generator, then relation lines
    /// `a*b = ...` whose right sides are linear in the generators.
    pub fn parse(text: &str, field: FieldSpec) -> Result<Self, PairError> {
        let ctx = extension_context(field);
        let mut base = None;
        let mut gens: Vec<(String, String, u32)> = Vec::new();
        let mut rels: Vec<(String, String, String)> = Vec::new();
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (lhs, rhs) = line
                .split_once('=')
                .ok_or_else(|| PairError::Parse(format!("expected '=' in line: {line}")))?;
            let (lhs, rhs) = (lhs.trim(), rhs.trim());
            if lhs == "f" {
                base = Some(parse_in(rhs, &ctx, TEXT_PRECISION)?);
            } else if let Some((a, b)) = lhs.split_once('*') {
                rels.push((a.trim().to_string(), b.trim().to_string(), rhs.to_string()));
            } else {
                let (num, k) = split_fraction(rhs)?;
                gens.push((lhs.to_string(), num, k));
            }
        }
        let base_equation = base.ok_or_else(|| PairError::Parse("missing line 'f = ...'".into()))?;
        let generators = gens
            .iter()
            .map(|(name, num, k)| {
                Ok(Fraction { name: name.clone(), numerator: parse_in(num, &ctx, TEXT_PRECISION)?, x_power: *k })
            })
            .collect::<Result<Vec<_>, PairError>>()?;
        let names: Vec<&str> = generators.iter().map(|g| g.name.as_str()).collect();
        let index = |n: &str| {
            names.iter().position(|m| *m == n).ok_or_else(|| PairError::Parse(format!("unknown generator {n}")))
        };
        let mut relations = Vec::new();
        for (a, b, rhs) in &rels {
            let (constant, coefficients) = parse_linear(rhs, &ctx, &names)?;
            relations.push(Relation { left: index(a)?, right: index(b)?, constant, coefficients });
        }
        let spec = FiniteExtensionSpec { base_equation, generators, relations };
        spec.check_table()?;
        Ok(spec)
    }

    /// Every relation must hold in `R` and every product `g_i g_j` must be
    /// covered, so that `S = R + sum R g_i`.
    pub fn check_table(&self) -> Result<(), PairError> {
        let f = &self.base_equation;
        let ctx = self.ctx();
        if f.is_exact_zero() || !f.is_exact() {
            return Err(PairError::InconsistentTable("f must be a nonzero polynomial".into()));
        }
        if f.divide_exact(&x_power(ctx, 1)).is_some() {
            return Err(PairError::InconsistentTable("x divides f, so x is a zero divisor".into()));
        }
        let t = self.generators.len();
        for i in 0..t {
            for j in i..t {
                let covered = self
                    .relations
                    .iter()
                    .any(|r| (r.left, r.right) == (i, j) || (r.left, r.right) == (j, i));
                if !covered {
                    let (a, b) = (&self.generators[i].name, &self.generators[j].name);
                    return Err(PairError::InconsistentTable(format!("no relation for {a}*{b}")));
                }
            }
        }
        for r in &self.relations {
            let (gi, gj) = (&self.generators[r.left], &self.generators[r.right]);
            let m = self
                .generators
                .iter()
                .map(|g| g.x_power)
                .chain([gi.x_power + gj.x_power])
                .max()
                .unwrap_or(0);
            let mut diff = gi.numerator.poly_mul(&gj.numerator)?.poly_mul(&x_power(ctx, m - gi.x_power - gj.x_power))?;
            diff = diff.poly_sub(&r.constant.poly_mul(&x_power(ctx, m))?)?;
            for (c, g) in r.coefficients.iter().zip(&self.generators) {
                diff = diff.poly_sub(&c.poly_mul(&g.numerator)?.poly_mul(&x_power(ctx, m - g.x_power))?)?;
            }
            if !diff.is_exact_zero() && diff.divide_exact(f).is_none() {
                return Err(PairError::InconsistentTable(format!(
                    "{}*{} does not hold modulo f",
                    gi.name, gj.name
                )));
            }
        }
        Ok(())
    }
}

fn split_fraction(text: &str) -> Result<(String, u32), PairError> {
    let Some((num, den)) = text.rsplit_once('/') else {
        return Ok((text.to_string(), 0));
    };
    let den = den.trim();
    let k = match den.strip_prefix('x') {
        Some("") => 1,
        Some(rest) => rest
            .trim()
            .strip_prefix('^')
            .and_then(|e| e.trim().parse::<u32>().ok())
            .ok_or_else(|| PairError::Parse(format!("denominator must be a power of x: {den}")))?,
        None if den == "1" => 0,
        None => return Err(PairError::Parse(format!("denominator must be a power of x: {den}"))),
    };
    let num = num.trim();
    let num = num.strip_prefix('(').and_then(|n| n.strip_suffix(')')).unwrap_or(num);
    Ok((num.to_string(), k))
}

/// Splits `text`, a polynomial in `x, y` and the generator names, into its
/// part free of generators and the coefficient of each generator.
fn parse_linear(text: &str, ctx: &Ctx, names: &[&str]) -> Result<(TruncatedSeries, Vec<TruncatedSeries>), PairError> {
    let vars: Vec<String> = ["x", "y"].iter().map(|s| s.to_string()).chain(names.iter().map(|s| s.to_string())).collect();
    let wide = SeriesContext::new(vars, ctx.field());
    let s = parse_in(text, &wide, TEXT_PRECISION)?;
    let mut constant = Vec::new();
    let mut coeffs: Vec<Vec<(Monomial, Scalar)>> = vec![Vec::new(); names.len()];
    for (m, c) in s.terms() {
        let e = m.exps();
        let base = Monomial::new(e[..2].to_vec());
        let extra: Vec<usize> = (2..e.len()).filter(|&i| e[i] > 0).collect();
        match extra.as_slice() {
            [] => constant.push((base, c.clone())),
            [i] if e[*i] == 1 => coeffs[i - 2].push((base, c.clone())),
            _ => return Err(PairError::Parse(format!("relation is not linear in the generators: {text}"))),
        }
    }
    let build = |terms: Vec<(Monomial, Scalar)>| TruncatedSeries::from_terms(ctx, TEXT_PRECISION, terms, true);
    Ok((build(constant), coeffs.into_iter().map(build).collect()))
}

pub const CASE_ONE_TEXT: &str = "f = y^3\nu = y / x^2\nw = y^2 / x^4\nu*u = w\nu*w = 0\nw*w = 0\n";
pub const CASE_TWO_TEXT: &str =
    "f = y^2*(y + x^2)\nu = y / x^2\nv = (y^2 + x^2*y) / x^5\nu*u = x*v - u\nu*v = 0\nv*v = 0\n";

/// `f = y^3`, `S = R[y/x^2] = R + R y/x^2 + R y^2/x^4`.
pub fn case_one(field: FieldSpec) -> FiniteExtensionSpec {
    FiniteExtensionSpec::parse(CASE_ONE_TEXT, field).expect("built-in table")
}

/// `f = y^2 (y + x^2)`, `S = R[u, v]` with `u = y/x^2`, `v = (y^2 + x^2 y)/x^5`.
pub fn case_two(field: FieldSpec) -> FiniteExtensionSpec {
    FiniteExtensionSpec::parse(CASE_TWO_TEXT, field).expect("built-in table")
}

/// `S = R`.
pub fn identity_extension(f: TruncatedSeries) -> FiniteExtensionSpec {
    FiniteExtensionSpec { base_equation: f, generators: Vec::new(), relations: Vec::new() }
}

/// Products of ideal generators with the variables, i.e. generators of `m I`.
fn times_max_ideal(ctx: &Ctx, gens: &[TruncatedSeries]) -> Vec<TruncatedSeries> {
    let (x, y) = (TruncatedSeries::var(ctx, 0, TEXT_PRECISION), TruncatedSeries::var(ctx, 1, TEXT_PRECISION));
    gens.iter()
        .flat_map(|g| [x.poly_mul(g).expect("same context"), y.poly_mul(g).expect("same context")])
        .collect()
}

/// `(nu_R(S), dim mS/(m^2 S + m))`, from colengths of ideals built from `J`.
pub fn pair_invariants_at(ext: &FiniteExtensionSpec, max_degree: u32) -> Result<(usize, usize), PairError> {
    let ctx = ext.ctx();
    let f = ext.base_equation.clone();
    let j = ext.j_ideal();
    let mut mj = times_max_ideal(ctx, &j);
    mj.push(f.clone());
    let mut m2j = times_max_ideal(ctx, &mj);
    m2j.extend(times_max_ideal(ctx, &[x_power(ctx, ext.conductor_exponent())]));
    m2j.push(f);
    let cj = colength(ctx, &j, max_degree)?;
    let cmj = colength(ctx, &mj, max_degree)?;
    let cm2j = colength(ctx, &m2j, max_degree)?;
    Ok((cmj - cj, cm2j - cmj))
}

pub fn pair_invariants(ext: &FiniteExtensionSpec) -> Result<(usize, usize), PairError> {
    pair_invariants_at(ext, DEFAULT_MAX_DEGREE)
}

/// Outcome of a jet-level ideal membership test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipReport {
    pub element: String,
    pub ideal: Vec<String>,
    pub member: bool,
    /// The quotient was certified at this degree, so the answer is exact.
    pub degree: u32,
}

impl MembershipReport {
    pub fn describe(&self) -> String {
        let verb = if self.member { "lies in" } else { "refuted below degree" };
        if self.member {
            format!("{} {verb} ({})", self.element, self.ideal.join(", "))
        } else {
            format!("{} in ({}): {verb} {}", self.element, self.ideal.join(", "), self.degree)
        }
    }
}

/// Decides `element ∈ ideal` in `P` when the ideal has finite colength.
pub fn check_membership(
    element: &TruncatedSeries,
    ideal: &[TruncatedSeries],
    max_degree: u32,
) -> Result<MembershipReport, PairError> {
    let q = JetQuotient::new(element.ctx(), ideal, max_degree)?;
    Ok(MembershipReport {
        element: element.to_poly_string(),
        ideal: ideal.iter().map(|g| g.to_poly_string()).collect(),
        member: q.contains(element)?,
        degree: q.degree(),
    })
}

/// The four ideal non-memberships behind the non-cyclicity claims for
/// `f = y^3` and `f = y^2 (y + q)` with `q = x^2`.
pub fn non_membership_checks(field: FieldSpec) -> Result<Vec<MembershipReport>, PairError> {
    let ctx = extension_context(field);
    let p = |t: &str| parse_in(t, &ctx, TEXT_PRECISION);
    let cases: [(&str, &[&str]); 4] = [
        ("x*y", &["x^3", "x^2*y", "y^2", "y^3"]),
        ("y^2", &["x^2*y", "x^4", "x^3*y", "x*y^2", "y^3"]),
        ("x^2*y", &["x^4", "x^3*y", "y^2 + x^2*y", "y^2*(y + x^2)"]),
        ("y^2 + x^2*y", &["x^5", "x^3*y", "x*(y^2 + x^2*y)", "y*(y^2 + x^2*y)"]),
    ];
    cases
        .iter()
        .map(|(e, gens)| {
            let gens = gens.iter().map(|g| p(g)).collect::<Result<Vec<_>, _>>()?;
            check_membership(&p(e)?, &gens, DEFAULT_MAX_DEGREE)
        })
        .collect()
}

/// A commutative Artinian pair `A ↪ B`.
#[derive(Clone, Debug)]
pub struct ArtinianPair {
    pub a: FiniteAlgebra,
    pub b: FiniteAlgebra,
    /// `B`-coordinates of the image of each basis element of `A`.
    pub embedding: Vec<Vector>,
    /// `K` for pairs coming from a square, `0` otherwise.
    pub conductor_exponent: u32,
    pub degenerate: bool,
}

impl ArtinianPair {
    pub fn from_parts(a: FiniteAlgebra, b: FiniteAlgebra, embedding: Vec<Vector>) -> Result<Self, PairError> {
        let pair = ArtinianPair { a, b, embedding, conductor_exponent: 0, degenerate: false };
        pair.check()?;
        Ok(pair)
    }

    /// `k ↪ k[x, y]/(x^2, xy, y^2)`, basis `1, x, y` of the target.
    pub fn k_into_d(field: FieldSpec) -> Self {
        let a = FiniteAlgebra::new(field, vec![vec![vec![field.one()]]], vec![field.one()]);
        let table = (0..3)
            .map(|i| (0..3).map(|j| if i == 0 || j == 0 { unit_vector(3, i + j) } else { zero_vector(3) }).collect())
            .collect();
        let b = FiniteAlgebra::new(field, table, unit_vector(3, 0));
        ArtinianPair { a, b, embedding: vec![unit_vector(3, 0)], conductor_exponent: 0, degenerate: false }
    }

    pub fn field(&self) -> FieldSpec {
        self.b.field()
    }

    /// The embedding is a unital algebra map and `A` is local.
    pub fn check(&self) -> Result<(), PairError> {
        let bad = |m: &str| Err(PairError::HypothesesNotMet(m.into()));
        if self.embedding.len() != self.a.dim() {
            return bad("embedding size differs from dim A");
        }
        if self.embed(self.a.one()) != *self.b.one() {
            return bad("embedding is not unital");
        }
        let n = self.a.dim();
        for i in 0..n {
            for j in 0..n {
                if self.embed(self.a.basis_product(i, j)) != self.b.mul(&self.embedding[i], &self.embedding[j]) {
                    return bad("embedding is not multiplicative");
                }
            }
        }
        if !self.degenerate && n - self.max_ideal_a().dim() != 1 {
            return bad("A is not local");
        }
        Ok(())
    }

    pub fn embed(&self, a: &[Scalar]) -> Vector {
        let field = self.field();
        let mut out = zero_vector(self.b.dim());
        for (c, img) in a.iter().zip(&self.embedding) {
            axpy(field, &mut out, c, img);
        }
        out
    }

    /// The maximal ideal of `A`, i.e. its radical.
    pub fn max_ideal_a(&self) -> Subspace {
        self.a.radical().unwrap_or_else(|| self.a.trace_form_kernel())
    }

    /// Image of `A` in `B`.
    pub fn a_image(&self) -> Subspace {
        Subspace::spanned_by(self.field(), self.b.dim(), self.embedding.iter().cloned())
    }

    /// Image of `m_A` in `B`.
    pub fn max_ideal_image(&self) -> Subspace {
        Subspace::spanned_by(self.field(), self.b.dim(), self.max_ideal_a().basis().map(|v| self.embed(v)).collect::<Vec<_>>())
    }

    /// `span{ s t : s in left, t in right }` inside `B`.
    pub fn product_span(&self, left: &Subspace, right: &Subspace) -> Subspace {
        let mut out = Subspace::new(self.field(), self.b.dim());
        for s in left.basis() {
            for t in right.basis() {
                out.insert(self.b.mul(s, t));
            }
        }
        out
    }

    pub fn whole_b(&self) -> Subspace {
        let n = self.b.dim();
        Subspace::spanned_by(self.field(), n, (0..n).map(|i| unit_vector(n, i)))
    }

    /// `(nu_A(B), dim m_A B / (m_A^2 B + m_A))`.
    pub fn invariants(&self) -> (usize, usize) {
        let ma = self.max_ideal_image();
        let mb = self.product_span(&ma, &self.whole_b());
        let mut low = self.product_span(&ma, &mb);
        for v in ma.basis() {
            low.insert(v.clone());
        }
        (self.b.dim() - mb.dim(), mb.dim() - low.dim())
    }
}

#[derive(Clone, Debug)]
pub struct ConductorDescription {
    /// Minimal generators of the preimage of the conductor in `P`.
    pub generators: Vec<TruncatedSeries>,
    pub dim_a: usize,
    pub dim_b: usize,
    /// Degree at which the colon computation was certified and compared
    /// with the next one.
    pub degree: u32,
}

/// The conductor square of an extension together with the data needed to
/// pull pair modules back to `S^r`.
#[derive(Clone, Debug)]
pub struct ConductorSquare {
    pub pair: Arc<ArtinianPair>,
    pub conductor: ConductorDescription,
    pub ext: FiniteExtensionSpec,
    /// `P/(x^K c + f)`, in which `B = J/(x^K c + f)` sits.
    qc: Option<JetQuotient>,
    j_image: Option<Subspace>,
    /// Representatives in `J` of the basis of `B`.
    b_reps: Vec<TruncatedSeries>,
}

impl ConductorSquare {
    /// The element of `J` representing `B`-coordinates `v`.
    pub fn lift_b(&self, v: &[Scalar]) -> TruncatedSeries {
        let ctx = self.ext.ctx();
        let mut acc = TruncatedSeries::zero(ctx, TEXT_PRECISION).with_precision(1);
        for (c, rep) in v.iter().zip(&self.b_reps) {
            if !c.is_zero() {
                acc = acc.poly_add(&rep.scale(c)).expect("same context");
            }
        }
        acc
    }

    /// `B`-coordinates of an element of `J`.
    pub fn b_coordinates(&self, j: &TruncatedSeries) -> Result<Vector, PairError> {
        let (Some(qc), Some(img)) = (&self.qc, &self.j_image) else {
            return Err(PairError::Degenerate);
        };
        img.coordinates(&qc.reduce(j)?).ok_or_else(|| PairError::MismatchedSquare("element outside J".into()))
    }

    pub fn b_representatives(&self) -> &[TruncatedSeries] {
        &self.b_reps
    }

    /// Generators of `x^K c + f`.
    pub fn scaled_conductor(&self) -> Vec<TruncatedSeries> {
        let xk = x_power(self.ext.ctx(), self.ext.conductor_exponent());
        let mut gens: Vec<TruncatedSeries> =
            self.conductor.generators.iter().map(|c| xk.poly_mul(c).expect("same context")).collect();
        gens.push(self.ext.base_equation.clone());
        gens
    }
}

/// Generators of `(R :_R S)` computed in `P/(x^K, f)` certified at degree `d`.
fn conductor_at(ext: &FiniteExtensionSpec, d: u32, max_degree: u32) -> Result<Option<Vec<TruncatedSeries>>, PairError> {
    let ctx = ext.ctx();
    let field = ext.field();
    let f = ext.base_equation.clone();
    let xk = x_power(ctx, ext.conductor_exponent());
    let Some(q) = JetQuotient::try_degree(ctx, &[xk.clone(), f.clone()], d) else {
        return Ok(None);
    };
    let monos = q.basis_monomials();
    let mut rows: Vec<Vector> = Vec::new();
    for g in ext.generators.iter().filter(|g| g.x_power > 0) {
        let qi = JetQuotient::new(ctx, &[x_power(ctx, g.x_power), f.clone()], max_degree)?;
        let cols = monos.iter().map(|m| qi.reduce_product(m, &g.numerator)).collect::<Result<Vec<_>, _>>()?;
        rows.extend((0..qi.dim()).map(|r| cols.iter().map(|c| c[r].clone()).collect::<Vector>()));
    }
    let kernel = nullspace(field, &rows, q.dim());
    let mut gens: Vec<TruncatedSeries> = kernel.iter().map(|v| q.to_series(v)).collect();
    gens.extend([xk, f]);
    Ok(Some(gens))
}

/// A minimal generating subset of a finite-colength ideal: generators whose
/// images in `I/mI` are independent, preferring lower degree.
pub fn minimal_generators(ctx: &Ctx, gens: &[TruncatedSeries], max_degree: u32) -> Result<Vec<TruncatedSeries>, PairError> {
    let mut sorted: Vec<&TruncatedSeries> = gens.iter().filter(|g| !g.is_exact_zero()).collect();
    sorted.sort_by_key(|g| g.jet_order().order.finite().unwrap_or(u32::MAX));
    let owned: Vec<TruncatedSeries> = sorted.iter().map(|g| (*g).clone()).collect();
    let q = JetQuotient::new(ctx, &times_max_ideal(ctx, &owned), max_degree)?;
    let mut span = Subspace::new(ctx.field(), q.dim());
    let mut out = Vec::new();
    for g in owned {
        if span.insert(q.reduce(&g)?) {
            out.push(g);
        }
    }
    Ok(out)
}

fn same_ideal(ctx: &Ctx, a: &[TruncatedSeries], b: &[TruncatedSeries], max_degree: u32) -> Result<bool, PairError> {
    let qa = JetQuotient::new(ctx, a, max_degree)?;
    let qb = JetQuotient::new(ctx, b, max_degree)?;
    for g in b {
        if !qa.contains(g)? {
            return Ok(false);
        }
    }
    for g in a {
        if !qb.contains(g)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Structure constants of `P/I` on its standard monomial basis.
fn quotient_algebra(q: &JetQuotient) -> Result<FiniteAlgebra, PairError> {
    let n = q.dim();
    let table = (0..n).map(|i| (0..n).map(|j| q.multiply(&unit_vector(n, i), &unit_vector(n, j))).collect()).collect();
    let one = q.reduce(&TruncatedSeries::one(q.ctx(), TEXT_PRECISION))?;
    Ok(FiniteAlgebra::new(q.field(), table, one))
}

fn degenerate_square(ext: &FiniteExtensionSpec) -> ConductorSquare {
    let field = ext.field();
    let zero_alg = || FiniteAlgebra::new(field, Vec::new(), Vec::new());
    let pair = ArtinianPair { a: zero_alg(), b: zero_alg(), embedding: Vec::new(), conductor_exponent: 0, degenerate: true };
    ConductorSquare {
        pair: Arc::new(pair),
        conductor: ConductorDescription {
            generators: vec![TruncatedSeries::one(ext.ctx(), TEXT_PRECISION)],
            dim_a: 0,
            dim_b: 0,
            degree: 0,
        },
        ext: ext.clone(),
        qc: None,
        j_image: None,
        b_reps: Vec::new(),
    }
}

/// The square `R/c ↪ S/c` of an extension. The colon computation must give
/// the same ideal at two consecutive certified degrees.
pub fn conductor_square(ext: &FiniteExtensionSpec, max_degree: u32) -> Result<ConductorSquare, PairError> {
    ext.check_table()?;
    if ext.is_identity() {
        return Ok(degenerate_square(ext));
    }
    let ctx = ext.ctx().clone();
    let field = ext.field();
    let f = ext.base_equation.clone();
    let k = ext.conductor_exponent();
    let base = JetQuotient::new(&ctx, &[x_power(&ctx, k), f.clone()], max_degree)?.degree();
    let first = conductor_at(ext, base, max_degree)?.expect("certified degree");
    let second = conductor_at(ext, base + 1, max_degree)?
        .ok_or_else(|| PairError::PrecisionInsufficient("colon ideal not certified at the next degree".into()))?;
    if !same_ideal(&ctx, &first, &second, max_degree)? {
        return Err(PairError::PrecisionInsufficient(format!("colon ideal not stable between degrees {base} and {}", base + 1)));
    }
    let conductor = minimal_generators(&ctx, &first, max_degree)?;

    let qa = JetQuotient::new(&ctx, &conductor, max_degree)?;
    let a = quotient_algebra(&qa)?;

    let xk = x_power(&ctx, k);
    let mut scaled: Vec<TruncatedSeries> = conductor.iter().map(|c| xk.poly_mul(c).expect("same context")).collect();
    scaled.push(f.clone());
    let qc = JetQuotient::new(&ctx, &scaled, max_degree)?;
    let mut j_image = Subspace::new(field, qc.dim());
    for g in ext.j_ideal() {
        for m in Monomial::all_below(2, qc.degree()) {
            j_image.insert(qc.reduce_product(&m, &g)?);
        }
    }
    let b_coords: Vec<Vector> = j_image.basis().cloned().collect();
    let b_reps: Vec<TruncatedSeries> = b_coords.iter().map(|v| qc.to_series(v)).collect();
    let nb = b_reps.len();

    // x^K p ≡ j1 j2 in P/(x^(2K) c + f) determines the product p of j1, j2.
    let x2k = x_power(&ctx, 2 * k);
    let mut wide: Vec<TruncatedSeries> = conductor.iter().map(|c| x2k.poly_mul(c).expect("same context")).collect();
    wide.push(f.clone());
    let qt = JetQuotient::new(&ctx, &wide, max_degree)?;
    let shifted = b_reps
        .iter()
        .map(|r| Ok(qt.reduce(&xk.poly_mul(r)?)?))
        .collect::<Result<Vec<_>, PairError>>()?;
    let system: Vec<Vector> = (0..qt.dim()).map(|r| shifted.iter().map(|c| c[r].clone()).collect()).collect();
    let mut table = vec![vec![Vec::new(); nb]; nb];
    for i in 0..nb {
        for j in i..nb {
            let target = qt.reduce(&b_reps[i].poly_mul(&b_reps[j])?)?;
            let c = crate::linalg::solve(field, &system, &target, nb)
                .ok_or_else(|| PairError::InconsistentTable("S is not closed under multiplication".into()))?;
            table[i][j] = c.clone();
            table[j][i] = c;
        }
    }
    let b_of = |s: &TruncatedSeries| -> Result<Vector, PairError> {
        j_image.coordinates(&qc.reduce(s)?).ok_or_else(|| PairError::InconsistentTable("element outside J".into()))
    };
    let b_one = b_of(&xk)?;
    let b = FiniteAlgebra::new(field, table, b_one);
    let embedding = qa
        .basis_monomials()
        .iter()
        .map(|m| b_of(&xk.poly_mul(&TruncatedSeries::from_terms(&ctx, TEXT_PRECISION, [(m.clone(), field.one())], true))?))
        .collect::<Result<Vec<_>, _>>()?;
    let pair = ArtinianPair { a, b, embedding, conductor_exponent: k, degenerate: false };
    pair.check()?;
    Ok(ConductorSquare {
        conductor: ConductorDescription { generators: conductor, dim_a: qa.dim(), dim_b: nb, degree: base },
        pair: Arc::new(pair),
        ext: ext.clone(),
        qc: Some(qc),
        j_image: Some(j_image),
        b_reps,
    })
}

/// A pair module `(V, W)` with `W = B^rank`; coordinate `i * dim B + l` is
/// component `i`, basis element `l`.
#[derive(Clone, Debug)]
pub struct PairModule {
    pub pair: Arc<ArtinianPair>,
    pub rank: usize,
    pub v: Subspace,
}

impl PairModule {
    pub fn new(pair: Arc<ArtinianPair>, rank: usize, spanning: Vec<Vector>) -> Result<Self, PairError> {
        let dim = rank * pair.b.dim();
        if spanning.iter().any(|s| s.len() != dim) {
            return Err(PairError::HypothesesNotMet("spanning vector has the wrong length".into()));
        }
        let v = Subspace::spanned_by(pair.field(), dim, spanning);
        let m = PairModule { pair, rank, v };
        if !m.is_a_closed() {
            return Err(PairError::HypothesesNotMet("V is not closed under A".into()));
        }
        if !m.generates_w() {
            return Err(PairError::HypothesesNotMet("B V differs from W".into()));
        }
        Ok(m)
    }

    /// `V = A e_1` inside `W = B`.
    pub fn trivial(pair: Arc<ArtinianPair>) -> Result<Self, PairError> {
        let span = pair.embedding.clone();
        PairModule::new(pair, 1, span)
    }

    pub fn w_dim(&self) -> usize {
        self.rank * self.pair.b.dim()
    }

    /// `s w` for `s` in `B`, acting on every component.
    pub fn act(&self, s: &[Scalar], w: &[Scalar]) -> Vector {
        let nb = self.pair.b.dim();
        (0..self.rank).flat_map(|i| self.pair.b.mul(s, &w[i * nb..(i + 1) * nb])).collect()
    }

    pub fn is_a_closed(&self) -> bool {
        self.pair.embedding.iter().all(|a| self.v.basis().all(|w| self.v.contains(&self.act(a, w))))
    }

    pub fn generates_w(&self) -> bool {
        let nb = self.pair.b.dim();
        let mut span = Subspace::new(self.pair.field(), self.w_dim());
        for w in self.v.basis() {
            for l in 0..nb {
                span.insert(self.act(&unit_vector(nb, l), w));
            }
        }
        span.dim() == self.w_dim()
    }

    pub fn spanning_matrix(&self) -> Vec<Vector> {
        self.v.basis().cloned().collect()
    }

    pub fn direct_sum(&self, other: &PairModule) -> Result<PairModule, PairError> {
        if !Arc::ptr_eq(&self.pair, &other.pair) {
            return Err(PairError::MismatchedSquare("summands over different pairs".into()));
        }
        let (d1, d2) = (self.w_dim(), other.w_dim());
        let mut span: Vec<Vector> = self.v.basis().map(|v| [v.clone(), zero_vector(d2)].concat()).collect();
        span.extend(other.v.basis().map(|v| [zero_vector(d1), v.clone()].concat()));
        PairModule::new(self.pair.clone(), self.rank + other.rank, span)
    }

    /// Image under `g` in `GL_rank(k)`, acting on components.
    pub fn transform(&self, g: &[Vector]) -> Result<PairModule, PairError> {
        let field = self.pair.field();
        let nb = self.pair.b.dim();
        let span = self
            .v
            .basis()
            .map(|w| {
                let mut out = zero_vector(self.w_dim());
                for (i, row) in g.iter().enumerate() {
                    for (j, c) in row.iter().enumerate() {
                        axpy(field, &mut out[i * nb..(i + 1) * nb], c, &w[j * nb..(j + 1) * nb]);
                    }
                }
                out
            })
            .collect();
        PairModule::new(self.pair.clone(), self.rank, span)
    }
}

/// Which hypothesis the construction used.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JordanRoute {
    /// `A = k`, `B` local of dimension 3 with square-zero radical.
    Terminal,
    /// `nu_A(B) >= 4`.
    FourGenerators,
    /// `nu_A(B) = 3` and `m_A B / m_A` not cyclic.
    NonCyclic,
}

/// Vectors among `candidates` independent modulo `base`.
fn independent_modulo(base: &Subspace, candidates: impl IntoIterator<Item = Vector>, want: usize) -> Vec<Vector> {
    let mut span = base.clone();
    let mut out = Vec::new();
    for c in candidates {
        if out.len() == want {
            break;
        }
        if span.insert(c.clone()) {
            out.push(c);
        }
    }
    out
}

/// `(route, x, y, U)` with `V = span{e_i, x e_i + y e_(i+1)} + U^n`.
fn jordan_data(pair: &ArtinianPair) -> Result<(JordanRoute, Vector, Vector, Subspace), PairError> {
    let nb = pair.b.dim();
    let whole = pair.whole_b();
    if pair.a.dim() == 1 && nb == 3 {
        if let Some(rad) = pair.b.radical() {
            if rad.dim() == 2 && pair.product_span(&rad, &rad).dim() == 0 {
                let r: Vec<Vector> = rad.basis().cloned().collect();
                return Ok((JordanRoute::Terminal, r[0].clone(), r[1].clone(), Subspace::new(pair.field(), nb)));
            }
        }
    }
    let (nu, codim) = pair.invariants();
    let ma = pair.max_ideal_image();
    let mb = pair.product_span(&ma, &whole);
    let (route, base, candidates, extra) = if nu >= 4 {
        let mut base = mb.clone();
        for a in &pair.embedding {
            base.insert(a.clone());
        }
        (JordanRoute::FourGenerators, base, whole.basis().cloned().collect::<Vec<_>>(), mb)
    } else if nu == 3 && codim >= 2 {
        let mut base = pair.product_span(&ma, &mb);
        for v in ma.basis() {
            base.insert(v.clone());
        }
        (JordanRoute::NonCyclic, base.clone(), mb.basis().cloned().collect(), base)
    } else {
        return Err(PairError::HypothesesNotMet(format!("nu_A(B) = {nu}, dim m_A B/(m_A^2 B + m_A) = {codim}")));
    };
    let picked = independent_modulo(&base, candidates, 2);
    let [x, y] = <[Vector; 2]>::try_from(picked)
        .map_err(|_| PairError::HypothesesNotMet("no two independent generators".into()))?;
    Ok((route, x, y, extra))
}

/// Rank `n` module `V = span{e_i, x e_i + y e_(i+1)} + U^n` in `W = B^n`,
/// with `x, y` as chosen by [`jordan_data`]. For `n = 1` this is `A e_1`.
pub fn build_indecomposable_pair_module(pair: &Arc<ArtinianPair>, n: usize) -> Result<PairModule, PairError> {
    if pair.degenerate {
        return Err(PairError::HypothesesNotMet("degenerate pair".into()));
    }
    if n == 0 {
        return Err(PairError::HypothesesNotMet("rank must be positive".into()));
    }
    if n == 1 {
        return PairModule::trivial(pair.clone());
    }
    let (_, x, y, extra) = jordan_data(pair)?;
    let nb = pair.b.dim();
    let one = pair.b.one().clone();
    let place = |i: usize, s: &Vector| {
        let mut w = zero_vector(n * nb);
        w[i * nb..(i + 1) * nb].clone_from_slice(s);
        w
    };
    let mut span = Vec::new();
    for i in 0..n {
        span.push(place(i, &one));
        let mut w = place(i, &x);
        if i + 1 < n {
            let field = pair.field();
            axpy(field, &mut w, &field.one(), &place(i + 1, &y));
        }
        span.push(w);
        span.extend(extra.basis().map(|u| place(i, u)));
    }
    PairModule::new(pair.clone(), n, span)
}

/// The route [`build_indecomposable_pair_module`] takes for this pair.
pub fn jordan_route(pair: &ArtinianPair) -> Result<JordanRoute, PairError> {
    jordan_data(pair).map(|d| d.0)
}

#[derive(Clone, Copy, Debug)]
pub struct IndecomposabilityOptions {
    /// Cap on `rank^2 * dim B`, the number of unknowns for `End(V, W)`.
    pub max_unknowns: usize,
    /// Exhaustive idempotent search over `F_p` when `p^dim` is at most this.
    pub exhaustive_cap: u64,
    pub seed: u64,
}

impl Default for IndecomposabilityOptions {
    fn default() -> Self {
        IndecomposabilityOptions { max_unknowns: 4096, exhaustive_cap: 1 << 20, seed: 0x5eed }
    }
}

/// Product in `M_n(B)`; index `(i * n + j) * dim B + l`.
fn matrix_product(b: &FiniteAlgebra, n: usize, s: &[Scalar], t: &[Scalar]) -> Vector {
    let nb = b.dim();
    let field = b.field();
    let block = |m: &[Scalar], i: usize, j: usize| m[(i * n + j) * nb..(i * n + j + 1) * nb].to_vec();
    let mut out = zero_vector(n * n * nb);
    for i in 0..n {
        for k in 0..n {
            let sik = block(s, i, k);
            if sik.iter().all(Zero::is_zero) {
                continue;
            }
            for j in 0..n {
                let p = b.mul(&sik, &block(t, k, j));
                axpy(field, &mut out[(i * n + j) * nb..(i * n + j + 1) * nb], &field.one(), &p);
            }
        }
    }
    out
}

/// `End(V, W) = {beta in M_n(B) : beta V ⊆ V}` as a subspace of `M_n(B)`.
pub fn endomorphism_space(m: &PairModule, opts: &IndecomposabilityOptions) -> Result<Subspace, PairError> {
    let (n, nb) = (m.rank, m.pair.b.dim());
    let unknowns = n * n * nb;
    if unknowns > opts.max_unknowns {
        return Err(PairError::DimensionTooLarge { dim: unknowns, cap: opts.max_unknowns });
    }
    let field = m.pair.field();
    let free = m.v.free_columns();
    let mut rows: Vec<Vector> = Vec::new();
    for w in m.v.basis() {
        // Column t: beta_t w reduced modulo V, at the free columns.
        let cols: Vec<Vector> = (0..unknowns)
            .map(|t| {
                let (ij, l) = (t / nb, t % nb);
                let (i, j) = (ij / n, ij % n);
                let mut img = zero_vector(n * nb);
                img[i * nb..(i + 1) * nb].clone_from_slice(&m.pair.b.mul(&unit_vector(nb, l), &w[j * nb..(j + 1) * nb]));
                let r = m.v.reduce(&img);
                free.iter().map(|&c| r[c].clone()).collect()
            })
            .collect();
        rows.extend((0..free.len()).map(|r| cols.iter().map(|c| c[r].clone()).collect::<Vector>()));
    }
    Ok(Subspace::spanned_by(field, unknowns, nullspace(field, &rows, unknowns)))
}

/// Decides whether `End(V, W)` is local. The algebra is reduced modulo
/// `M_n(rad B)`, a nilpotent ideal, before searching for idempotents.
pub fn is_indecomposable_pair_module(m: &PairModule, opts: &IndecomposabilityOptions) -> Result<bool, PairError> {
    let e = endomorphism_space(m, opts)?;
    let (n, nb) = (m.rank, m.pair.b.dim());
    let field = m.pair.field();
    let b = &m.pair.b;
    let rad = b.radical().unwrap_or_else(|| b.trace_form_kernel());
    let mut nil = Subspace::new(field, n * n * nb);
    for ij in 0..n * n {
        for r in rad.basis() {
            let mut v = zero_vector(n * n * nb);
            v[ij * nb..(ij + 1) * nb].clone_from_slice(r);
            nil.insert(v);
        }
    }
    let mut identity = zero_vector(n * n * nb);
    for i in 0..n {
        identity[(i * n + i) * nb..(i * n + i + 1) * nb].clone_from_slice(b.one());
    }
    let quotient = FiniteAlgebra::from_quotient(field, &e, &nil, &identity, |s, t| matrix_product(b, n, s, t))
        .map_err(|err| PairError::HypothesesNotMet(err.to_string()))?;
    match decide_locality(&quotient, opts.seed, opts.exhaustive_cap) {
        Locality::Local => Ok(true),
        Locality::NotLocal(_) => Ok(false),
        Locality::Inconclusive(why) => Err(PairError::Inconclusive(why)),
    }
}

/// An MCM module `M` over `R` obtained by pulling a pair module back along
/// the conductor square, stored as `x^K M ⊆ J^r ⊆ P^r`.
#[derive(Clone, Debug)]
pub struct LiftedModulePresentation {
    pub rank: usize,
    /// Minimal generators, each a vector of length `rank`.
    pub generators: Vec<Vec<TruncatedSeries>>,
    pub nu: usize,
    /// `nu x nu` relation matrix over `P`; its cokernel is `M`.
    pub presentation: PresentationMatrix,
    /// Relations are exact below this degree.
    pub precision: u32,
}

/// Span in `Q^r` of `mono * g` over generators `g` and monomials of degree
/// in `degrees`.
fn module_span(
    q: &JetQuotient,
    gens: &[Vec<TruncatedSeries>],
    degrees: std::ops::Range<u32>,
    x_only: bool,
) -> Result<Subspace, PairError> {
    let r = gens.first().map_or(0, Vec::len);
    let mut span = Subspace::new(q.field(), r * q.dim());
    let monos: Vec<Monomial> = Monomial::all_below(2, degrees.end.min(q.degree().max(1)))
        .into_iter()
        .filter(|m| m.degree() >= degrees.start && (!x_only || m.exps()[0] > 0))
        .collect();
    for g in gens {
        for m in &monos {
            let mut v = Vec::with_capacity(r * q.dim());
            for c in g {
                v.extend(q.reduce_product(m, c)?);
            }
            span.insert(v);
        }
    }
    Ok(span)
}

/// `ord_y f(0, y)`.
fn y_order_on_axis(f: &TruncatedSeries) -> Option<u32> {
    f.terms().filter(|(m, _)| m.exps()[0] == 0).map(|(m, _)| m.exps()[1]).min()
}

/// Relations among `gens` over `P` modulo `m^(d)`, as a subspace of
/// `(P_{<d})^nu` indexed by `(i, monomial)`, together with its `m`-multiple.
fn truncated_syzygies(
    ctx: &Ctx,
    f: &TruncatedSeries,
    gens: &[Vec<TruncatedSeries>],
    d: u32,
    shift: u32,
) -> Result<(Subspace, Subspace, Vec<Monomial>), PairError> {
    let field = ctx.field();
    let big = d + shift;
    let mut ideal = vec![f.clone()];
    ideal.extend(
        Monomial::all_of_degree(2, big)
            .into_iter()
            .map(|m| TruncatedSeries::from_terms(ctx, big + 1, [(m, field.one())], true)),
    );
    let qd = JetQuotient::try_degree(ctx, &ideal, big)
        .ok_or_else(|| PairError::PrecisionInsufficient("truncation ideal not certified".into()))?;
    let column = |m: &Monomial, g: &[TruncatedSeries]| -> Result<Vector, PairError> {
        let mut v = Vec::new();
        for c in g {
            v.extend(qd.reduce_product(m, c)?);
        }
        Ok(v)
    };
    let all = Monomial::all_below(2, big);
    let (low, high): (Vec<Monomial>, Vec<Monomial>) = all.into_iter().partition(|m| m.degree() < d);
    let rows_len = gens.first().map_or(0, Vec::len) * qd.dim();
    // A relation's low part must map into the span of all high parts.
    let mut high_span = Subspace::new(field, rows_len);
    for g in gens {
        for m in &high {
            high_span.insert(column(m, g)?);
        }
    }
    let free = high_span.free_columns();
    let mut cols: Vec<Vector> = Vec::new();
    for g in gens {
        for m in &low {
            let r = high_span.reduce(&column(m, g)?);
            cols.push(free.iter().map(|&c| r[c].clone()).collect());
        }
    }
    let rows: Vec<Vector> = (0..free.len()).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
    let z = Subspace::spanned_by(field, cols.len(), nullspace(field, &rows, cols.len()));
    let index: std::collections::HashMap<&Monomial, usize> = low.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let nl = low.len();
    let mut mz = Subspace::new(field, cols.len());
    for v in z.basis() {
        for var in 0..2 {
            let step = Monomial::var(2, var);
            let mut w = zero_vector(cols.len());
            for (k, c) in v.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                let (i, m) = (k / nl, &low[k % nl]);
                if let Some(&j) = index.get(&m.mul(&step)) {
                    w[i * nl + j] = c.clone();
                }
            }
            mz.insert(w);
        }
    }
    Ok((z, mz, low))
}

/// Pulls `m` back along the square: `M = {p in S^r : p mod c in V}`.
pub fn lift_module(m: &PairModule, square: &ConductorSquare, max_degree: u32) -> Result<LiftedModulePresentation, PairError> {
    if !Arc::ptr_eq(&m.pair, &square.pair) {
        return Err(PairError::MismatchedSquare("the pair module was built over a different pair".into()));
    }
    if square.pair.degenerate {
        return Err(PairError::Degenerate);
    }
    let ctx = square.ext.ctx().clone();
    let f = square.ext.base_equation.clone();
    let (r, nb) = (m.rank, square.pair.b.dim());
    let zero = TruncatedSeries::zero(&ctx, TEXT_PRECISION);
    let scaled = square.scaled_conductor();

    let mut gens: Vec<Vec<TruncatedSeries>> =
        m.v.basis().map(|v| (0..r).map(|i| square.lift_b(&v[i * nb..(i + 1) * nb])).collect()).collect();
    for c in &scaled[..scaled.len() - 1] {
        for i in 0..r {
            gens.push((0..r).map(|j| if i == j { c.clone() } else { zero.clone() }).collect());
        }
    }

    // nu = dim M/mM, computed modulo m x^K c + f.
    let mut small = times_max_ideal(&ctx, &scaled);
    small.push(f.clone());
    let q0 = JetQuotient::new(&ctx, &small, max_degree)?;
    let img = module_span(&q0, &gens, 0..q0.degree(), false)?;
    let m_img = module_span(&q0, &gens, 1..q0.degree(), false)?;
    let nu = img.dim() - m_img.dim();
    let mut chosen = m_img.clone();
    let mut minimal = Vec::new();
    for g in &gens {
        let mut v = Vec::new();
        for c in g {
            v.extend(q0.reduce(c)?);
        }
        if chosen.insert(v) {
            minimal.push(g.clone());
        }
    }

    // rank = length(M/xM) / length(R/xR), modulo x^(K+1) c + f.
    let mut thin = times_max_ideal(&ctx, &scaled).into_iter().step_by(2).collect::<Vec<_>>();
    thin.push(f.clone());
    let q1 = JetQuotient::new(&ctx, &thin, max_degree)?;
    let len = module_span(&q1, &minimal, 0..q1.degree(), false)?.dim()
        - module_span(&q1, &minimal, 0..q1.degree(), true)?.dim();
    let e = y_order_on_axis(&f).ok_or_else(|| PairError::InconsistentTable("x divides f".into()))? as usize;
    if len % e != 0 {
        return Err(PairError::PrecisionInsufficient(format!("length {len} of M/xM is not a multiple of {e}")));
    }
    let rank = len / e;

    // m^L R^r ⊆ x^K M, so relations modulo m^(d + L) are exact below d.
    let shift = JetQuotient::new(&ctx, &scaled, max_degree)?.degree();
    for d in 2..=max_degree.saturating_sub(shift) {
        let (z, mz, low) = truncated_syzygies(&ctx, &f, &minimal, d, shift)?;
        if z.dim() - mz.dim() != nu {
            continue;
        }
        let cols = independent_modulo(&mz, z.basis().cloned(), nu);
        let nl = low.len();
        let rows = (0..nu)
            .map(|i| {
                cols.iter()
                    .map(|c| {
                        let terms = low.iter().zip(&c[i * nl..(i + 1) * nl]).map(|(mo, a)| (mo.clone(), a.clone()));
                        TruncatedSeries::from_terms(&ctx, d, terms.collect::<Vec<_>>(), false)
                    })
                    .collect()
            })
            .collect();
        let matrix = SeriesMatrix::from_rows(&ctx, d, rows).map_err(|e| PairError::Parse(e.to_string()))?;
        return Ok(LiftedModulePresentation {
            rank,
            generators: minimal,
            nu,
            presentation: PresentationMatrix::new(f, matrix),
            precision: d,
        });
    }
    Err(PairError::PrecisionInsufficient(format!("relations did not reach {nu} generators below degree {max_degree}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldSpec {
        FieldSpec::rationals()
    }

    fn p(t: &str) -> TruncatedSeries {
        parse_in(t, &extension_context(q()), TEXT_PRECISION).unwrap()
    }

    #[test]
    fn invariants_of_built_in_extensions() {
        for ext in [case_one(q()), case_two(q())] {
            assert_eq!(pair_invariants(&ext).unwrap(), (3, 2));
            assert_eq!(pair_invariants_at(&ext, DEFAULT_MAX_DEGREE + 16).unwrap(), (3, 2));
        }
        assert_eq!(pair_invariants(&identity_extension(p("y^3"))).unwrap(), (1, 0));
    }

    #[test]
    fn inconsistent_tables_are_rejected() {
        let bad = CASE_ONE_TEXT.replace("u*u = w", "u*u = 0");
        assert!(matches!(FiniteExtensionSpec::parse(&bad, q()), Err(PairError::InconsistentTable(_))));
        let missing = CASE_ONE_TEXT.replace("w*w = 0\n", "");
        assert!(matches!(FiniteExtensionSpec::parse(&missing, q()), Err(PairError::InconsistentTable(_))));
        assert!(matches!(FiniteExtensionSpec::parse("f = y^3\nu = y / y^2\nu*u = 0\n", q()), Err(PairError::Parse(_))));
    }

    #[test]
    fn non_memberships_hold() {
        for r in non_membership_checks(q()).unwrap() {
            assert!(!r.member, "{}", r.describe());
        }
    }

    #[test]
    fn case_one_square() {
        let sq = conductor_square(&case_one(q()), DEFAULT_MAX_DEGREE).unwrap();
        let hand = [p("x^4"), p("x^2*y"), p("y^2")];
        assert!(same_ideal(sq.ext.ctx(), &sq.conductor.generators, &hand, DEFAULT_MAX_DEGREE).unwrap());
        assert_eq!((sq.conductor.dim_a, sq.conductor.dim_b), (6, 12));
        assert_eq!(sq.pair.invariants(), (3, 2));
        assert!(sq.pair.b.is_associative() && sq.pair.b.is_commutative());
    }

    fn opts() -> IndecomposabilityOptions {
        IndecomposabilityOptions::default()
    }

    #[test]
    fn jordan_modules_over_k_into_d() {
        for field in [q(), FieldSpec::prime(7).unwrap()] {
            let pair = Arc::new(ArtinianPair::k_into_d(field));
            assert_eq!(jordan_route(&pair).unwrap(), JordanRoute::Terminal);
            for n in 1..=3 {
                let m = build_indecomposable_pair_module(&pair, n).unwrap();
                assert_eq!(m.v.dim(), if n == 1 { 1 } else { 2 * n });
                assert!(is_indecomposable_pair_module(&m, &opts()).unwrap(), "n = {n}");
            }
        }
    }

    #[test]
    fn direct_sums_are_decomposable() {
        let pair = Arc::new(ArtinianPair::k_into_d(q()));
        let a = build_indecomposable_pair_module(&pair, 1).unwrap();
        let b = build_indecomposable_pair_module(&pair, 2).unwrap();
        assert!(!is_indecomposable_pair_module(&a.direct_sum(&a).unwrap(), &opts()).unwrap());
        assert!(!is_indecomposable_pair_module(&a.direct_sum(&b).unwrap(), &opts()).unwrap());
    }

    #[test]
    fn jordan_module_over_case_one() {
        let sq = conductor_square(&case_one(q()), DEFAULT_MAX_DEGREE).unwrap();
        assert_eq!(jordan_route(&sq.pair).unwrap(), JordanRoute::NonCyclic);
        let m = build_indecomposable_pair_module(&sq.pair, 2).unwrap();
        assert!(is_indecomposable_pair_module(&m, &opts()).unwrap());
        assert!(PairModule::trivial(sq.pair.clone()).is_ok());
    }

    #[test]
    fn trivial_module_lifts_to_r() {
        for ext in [case_one(q()), case_two(q())] {
            let sq = conductor_square(&ext, DEFAULT_MAX_DEGREE).unwrap();
            let lifted = lift_module(&PairModule::trivial(sq.pair.clone()).unwrap(), &sq, DEFAULT_MAX_DEGREE).unwrap();
            assert_eq!((lifted.rank, lifted.nu), (1, 1));
            assert!(relations_hold(&lifted, &ext.base_equation));
        }
    }

    #[test]
    fn jordan_lifts_have_constant_rank() {
        let sq = conductor_square(&case_one(q()), DEFAULT_MAX_DEGREE).unwrap();
        for n in 2..=3 {
            let m = build_indecomposable_pair_module(&sq.pair, n).unwrap();
            let lifted = lift_module(&m, &sq, DEFAULT_MAX_DEGREE).unwrap();
            assert_eq!(lifted.rank, n);
            assert!(lifted.nu >= n);
            assert_eq!(lifted.presentation.matrix.nrows(), lifted.nu);
            assert!(relations_hold(&lifted, &sq.ext.base_equation));
        }
    }

    /// Each column applied to the generators lies in `(f) + m^precision`.
    fn relations_hold(l: &LiftedModulePresentation, f: &TruncatedSeries) -> bool {
        let ctx = f.ctx();
        let d = l.precision;
        let mut ideal = vec![f.clone()];
        ideal.extend(Monomial::all_of_degree(2, d).into_iter().map(|m| TruncatedSeries::from_terms(ctx, d + 1, [(m, q().one())], true)));
        let qd = JetQuotient::try_degree(ctx, &ideal, d).unwrap();
        let phi = &l.presentation.matrix;
        (0..phi.ncols()).all(|j| {
            (0..l.rank).all(|c| {
                let mut acc = TruncatedSeries::zero(ctx, d);
                for i in 0..phi.nrows() {
                    acc = acc.add(&phi.get(i, j).mul(&l.generators[i][c].with_precision(d).as_inexact()).unwrap()).unwrap();
                }
                qd.contains(&acc).unwrap()
            })
        })
    }

    #[test]
    fn case_two_relations_reproduced() {
        let sq = conductor_square(&case_two(q()), DEFAULT_MAX_DEGREE).unwrap();
        assert_eq!(sq.pair.invariants(), (3, 2));
        let b = &sq.pair.b;
        let u = sq.b_coordinates(&p("x^3*y")).unwrap();
        let v = sq.b_coordinates(&p("y^2 + x^2*y")).unwrap();
        let x = sq.b_coordinates(&p("x^6")).unwrap();
        let mut rhs = b.mul(&x, &v);
        axpy(q(), &mut rhs, &q().from_i64(-1), &u);
        assert_eq!(b.mul(&u, &u), rhs);
        assert!(b.mul(&u, &v).iter().all(Zero::is_zero));
        assert!(b.mul(&v, &v).iter().all(Zero::is_zero));
    }

    #[test]
    fn identity_square_is_degenerate() {
        let sq = conductor_square(&identity_extension(p("y^3")), DEFAULT_MAX_DEGREE).unwrap();
        assert!(sq.pair.degenerate);
        assert_eq!(sq.pair.b.dim(), 0);
    }
}
