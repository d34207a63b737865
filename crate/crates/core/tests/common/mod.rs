#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use cmtype::field::FieldSpec;
use cmtype::parse::parse_in;
use cmtype::series::{Ctx, Monomial, SeriesContext, TruncatedSeries};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn ctx(vars: &[&str], field: FieldSpec) -> Ctx {
    SeriesContext::new(vars.iter().copied(), field)
}

pub fn poly(ctx: &Ctx, text: &str, prec: u32) -> TruncatedSeries {
    parse_in(text, ctx, prec).unwrap()
}

/// Parsed at `2 * deg + 6`.
pub fn at_default(ctx: &Ctx, text: &str) -> TruncatedSeries {
    let probe = poly(ctx, text, 1 << 20);
    let prec = 2 * probe.total_degree().unwrap_or(0) + 6;
    probe.with_precision(prec)
}

pub fn with_default_precision(f: &TruncatedSeries) -> TruncatedSeries {
    f.with_precision(2 * f.total_degree().unwrap_or(0) + 6)
}

/// Curve germs in `x, y` with their expected `(verdict, normal form, bound)`.
pub const CURVE_TABLE: [(&str, &str, &str, Option<u64>); 6] = [
    ("y^2", "bounded-infinite", "Ainfinity", Some(2)),
    ("x*y^2", "bounded-infinite", "Dinfinity", Some(2)),
    ("y^3", "unbounded", "none", None),
    ("y^2*(y + x^2)", "unbounded", "none", None),
    ("x^4 + y^4", "unbounded", "none", None),
    ("x^3 + y^4", "finite", "E6", Some(6)),
];

/// Two-variable germs used for invariance checks.
pub const CORPUS: [&str; 14] = [
    "x^2 + y^2",
    "y^2 + x^3",
    "y^2 + x^5",
    "y^2 - x^2*y + x^4",
    "x^2*y + y^4",
    "x^2*y + y^5",
    "x^3 + y^4",
    "x^3 + x*y^3",
    "x^3 + y^5",
    "y^3 + x^2*y",
    "x*y^2",
    "y^2",
    "y^3",
    "x^4 + y^4",
];

/// `x_i -> sum_j m[i][j] x_j`.
pub fn linear_change(f: &TruncatedSeries, m: &[Vec<i64>]) -> TruncatedSeries {
    let c = f.ctx();
    let field = c.field();
    let n = c.nvars();
    let prec = f.precision();
    let images: BTreeMap<usize, TruncatedSeries> = (0..n)
        .map(|i| {
            let terms: Vec<(Monomial, BigRational)> =
                (0..n).map(|j| (Monomial::var(n, j), field.from_i64(m[i][j]))).collect();
            (i, TruncatedSeries::from_terms(c, prec, terms, true))
        })
        .collect();
    f.substitute(&images).unwrap()
}

fn det(m: &[Vec<i64>]) -> i64 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<i64>> =
                m[1..].iter().map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| *v).collect()).collect();
            let s = if j % 2 == 0 { 1 } else { -1 };
            s * m[0][j] * det(&minor)
        })
        .sum()
}

/// Invertible over every field with characteristic above 5.
pub fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<i64>> {
    loop {
        let m: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-2..=2)).collect()).collect();
        let d = det(&m);
        if d != 0 && [2, 3, 5, 7].iter().all(|p| d % p != 0) {
            return m;
        }
    }
}

/// `1 + a x + b y + c x y` with small integer coefficients.
pub fn random_unit(rng: &mut ChaCha8Rng, c: &Ctx) -> TruncatedSeries {
    let n = c.nvars();
    let field = c.field();
    let mut terms = vec![(Monomial::one(n), field.one())];
    for i in 0..n {
        terms.push((Monomial::var(n, i), field.from_i64(rng.gen_range(-3..=3))));
    }
    let mut e = vec![0; n];
    e[0] = 1;
    e[n - 1] += 1;
    terms.push((Monomial::new(e), field.from_i64(rng.gen_range(-3..=3))));
    TruncatedSeries::from_terms(c, 64, terms, true)
}

/// A random polynomial of order `e` in `y` at `x = 0`: `c y^e` plus terms
/// divisible by `x`.
pub fn random_y_regular(rng: &mut ChaCha8Rng, c: &Ctx, e: u32, prec: u32) -> TruncatedSeries {
    let field = c.field();
    let mut terms = vec![(Monomial::new(vec![0, e]), field.from_i64(rng.gen_range(1..=3)))];
    for _ in 0..rng.gen_range(1..=5) {
        let a = rng.gen_range(1..=4);
        let b = rng.gen_range(0..=4);
        terms.push((Monomial::new(vec![a, b]), field.from_i64(rng.gen_range(-4..=4))));
    }
    if rng.gen_bool(0.5) {
        terms.push((Monomial::new(vec![0, e + rng.gen_range(1..=2)]), field.from_i64(rng.gen_range(-2..=2))));
    }
    TruncatedSeries::from_terms(c, prec, terms, true)
}

type Poly = HashMap<(u32, u32), BigRational>;

fn to_poly(f: &TruncatedSeries) -> Poly {
    f.terms().map(|(m, c)| ((m.exps()[0], m.exps()[1]), c.clone())).collect()
}

fn derivative(p: &Poly, var: usize) -> Poly {
    let mut out = Poly::new();
    for (&(a, b), c) in p {
        let (k, m) = if var == 0 { (a, (a.wrapping_sub(1), b)) } else { (b, (a, b.wrapping_sub(1))) };
        if k > 0 {
            out.insert(m, c * BigRational::from_integer(k.into()));
        }
    }
    out
}

fn rank_q(mut rows: Vec<Vec<BigRational>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for col in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = BigRational::one() / rows[r][col].clone();
        let pivot: Vec<BigRational> = rows[r].iter().map(|v| v * &inv).collect();
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let factor = rows[i][col].clone();
                for (x, y) in rows[i].iter_mut().zip(&pivot) {
                    *x -= &factor * y;
                }
            }
        }
        rows[r] = pivot;
        r += 1;
    }
    r
}

/// `dim Q[x,y]/((f_x, f_y) + m^N)` by dense elimination, increased until it
/// stops growing; `None` if it never does below `cap`.
pub fn brute_milnor(f: &TruncatedSeries, cap: u32) -> Option<usize> {
    let p = to_poly(f);
    let partials = [derivative(&p, 0), derivative(&p, 1)];
    let mut last = None;
    for n in 1..=cap {
        let monos: Vec<(u32, u32)> = (0..n).flat_map(|d| (0..=d).map(move |i| (d - i, i))).collect();
        let index: HashMap<(u32, u32), usize> = monos.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let mut rows = Vec::new();
        for g in &partials {
            for &(a, b) in &monos {
                let mut row = vec![BigRational::zero(); monos.len()];
                for (&(ga, gb), c) in g {
                    if let Some(&k) = index.get(&(ga + a, gb + b)) {
                        row[k] += c;
                    }
                }
                rows.push(row);
            }
        }
        let dim = monos.len() - rank_q(rows);
        if last == Some(dim) {
            return Some(dim);
        }
        last = Some(dim);
    }
    None
}
