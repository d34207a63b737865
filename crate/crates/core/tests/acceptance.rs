//! One line per acceptance criterion. Identities are exact; the only
//! tolerances are the wall-clock limits below.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use cmtype::catalog::enumerate_dinfty;
use cmtype::classify::{classify, CmTypeReport};
use cmtype::field::FieldSpec;
use cmtype::local::{milnor_number, tangent_cone_pattern, MilnorNumber};
use cmtype::matrix::{knorrer_lift, minimize_presentation, reduce_mod_z, verify_mf, PresentationMatrix, SeriesMatrix};
use cmtype::pairs::{
    build_indecomposable_pair_module, case_one, case_two, conductor_square, is_indecomposable_pair_module,
    lift_module, non_membership_checks, pair_invariants, pair_invariants_at, ArtinianPair, IndecomposabilityOptions,
    DEFAULT_MAX_DEGREE,
};
use cmtype::series::TruncatedSeries;
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CLASSIFY_TABLE_LIMIT: Duration = Duration::from_secs(5);
const SUSPENSION_LIMIT: Duration = Duration::from_secs(30);
const PAIR_MODULE_LIMIT: Duration = Duration::from_secs(60);
const CATALOG_K_MAX: u32 = 10;
const CATALOG_SIZE: usize = 45;
const MAX_RANK: usize = 4;
const INVARIANCE_CASES: usize = 100;
const ROUND_TRIP_CASES: usize = 50;
const MONOTONICITY_CASES: usize = 50;
const SEED: u64 = 20_240_917;

type Check = Result<String, String>;

fn q() -> FieldSpec {
    FieldSpec::rationals()
}

fn summary(r: &CmTypeReport) -> (String, String, Option<u64>) {
    (r.verdict.tag().to_string(), r.normal_form.to_string(), r.generator_bound)
}

fn classification_table() -> Check {
    let start = Instant::now();
    let two = ctx(&["x", "y"], q());
    let three = ctx(&["x0", "x1", "x2"], q());
    let mut cases: Vec<(TruncatedSeries, &str, &str, Option<u64>)> =
        CURVE_TABLE.iter().map(|(t, v, n, b)| (at_default(&two, t), *v, *n, *b)).collect();
    cases.push((at_default(&three, "x0^3 + x1^3 + x2^3"), "unbounded", "none", None));
    cases.push((at_default(&three, "x1^2 + x2^2"), "bounded-infinite", "Ainfinity", Some(4)));
    for (f, verdict, nf, bound) in &cases {
        let r = classify(f).map_err(|e| format!("{f}: {e}"))?;
        let want = (verdict.to_string(), nf.to_string(), *bound);
        if summary(&r) != want {
            return Err(format!("{f}: got {:?}, want {want:?}", summary(&r)));
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= CLASSIFY_TABLE_LIMIT {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("{} germs in {elapsed:.2?}", cases.len()))
}

fn exact_product(a: &SeriesMatrix, b: &SeriesMatrix) -> Vec<Vec<TruncatedSeries>> {
    (0..a.nrows())
        .map(|i| {
            (0..b.ncols())
                .map(|j| {
                    (0..a.ncols()).fold(TruncatedSeries::zero(a.ctx(), 1), |acc, k| {
                        acc.poly_add(&a.get(i, k).poly_mul(b.get(k, j)).unwrap()).unwrap()
                    })
                })
                .collect()
        })
        .collect()
}

fn is_scalar(m: &[Vec<TruncatedSeries>], f: &TruncatedSeries) -> bool {
    m.iter().enumerate().all(|(i, row)| {
        row.iter().enumerate().all(|(j, e)| if i == j { e.equals_exactly(f) } else { e.is_exact_zero() })
    })
}

fn catalog_exactness() -> Check {
    let cat = enumerate_dinfty(CATALOG_K_MAX, q()).map_err(|e| e.to_string())?;
    if cat.len() != CATALOG_SIZE {
        return Err(format!("{} entries", cat.len()));
    }
    let mut max_nu = 0;
    for e in &cat {
        let (phi, psi, f) = (&e.mf.phi, &e.mf.psi, &e.mf.f);
        if !is_scalar(&exact_product(phi, psi), f) || !is_scalar(&exact_product(psi, phi), f) {
            return Err(format!("{}: phi psi differs from f I", e.label));
        }
        let nu = e.nu().map_err(|err| err.to_string())?;
        if nu > 2 {
            return Err(format!("{}: minimized size {nu}", e.label));
        }
        max_nu = max_nu.max(nu);
    }
    Ok(format!("{} entries exact, largest minimized size {max_nu}", cat.len()))
}

fn knorrer_transfer() -> Check {
    let cat = enumerate_dinfty(CATALOG_K_MAX, q()).map_err(|e| e.to_string())?;
    let mut count = 0;
    for e in cat.iter().filter(|e| !e.degenerate) {
        let err = |x: cmtype::matrix::MatrixError| format!("{}: {x}", e.label);
        let lifted = knorrer_lift(&e.mf, "z").map_err(err)?;
        if !verify_mf(&lifted).map_err(err)? {
            return Err(format!("{}: lift is not a matrix factorization", e.label));
        }
        let lifted_nu = minimize_presentation(&PresentationMatrix::new(lifted.f.clone(), lifted.phi.clone()))
            .map_err(err)?
            .nu();
        if lifted_nu > 4 {
            return Err(format!("{}: minimized lift size {lifted_nu}", e.label));
        }
        let reduced = minimize_presentation(&reduce_mod_z(&lifted, "z").map_err(err)?).map_err(err)?.nu();
        let nu = e.nu().map_err(err)?;
        if reduced != 2 * nu {
            return Err(format!("{}: reduction has {reduced} generators, entry has {nu}", e.label));
        }
        count += 1;
    }
    Ok(format!("{count} lifts verified"))
}

fn suspension_consistency() -> Check {
    let start = Instant::now();
    let mut count = 0;
    for (g_text, ..) in CURVE_TABLE {
        let base = classify(&at_default(&ctx(&["x", "y"], q()), g_text)).map_err(|e| e.to_string())?;
        for d in 2..=3usize {
            let extra: Vec<String> = (2..=d).map(|i| format!("z{i}")).collect();
            let mut names = vec!["x", "y"];
            names.extend(extra.iter().map(String::as_str));
            let text = format!("{g_text} + {}", extra.iter().map(|z| format!("{z}^2")).collect::<Vec<_>>().join(" + "));
            let r = classify(&at_default(&ctx(&names, q()), &text)).map_err(|e| format!("{text}: {e}"))?;
            let want_bound = match base.verdict.tag() {
                "finite" => Some(6 * 2u64.pow(d as u32 - 1)),
                "bounded-infinite" => Some(2u64.pow(d as u32)),
                _ => None,
            };
            if r.verdict != base.verdict || r.generator_bound != want_bound {
                return Err(format!("{text}: {:?} vs {:?}, bound {:?}", r.verdict, base.verdict, r.generator_bound));
            }
            count += 1;
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= SUSPENSION_LIMIT {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("{count} suspensions in {elapsed:.2?}"))
}

fn pair_invariant_check() -> Check {
    for (name, ext) in [("y^3", case_one(q())), ("y^2(y+x^2)", case_two(q()))] {
        for cap in [DEFAULT_MAX_DEGREE, DEFAULT_MAX_DEGREE + 1, DEFAULT_MAX_DEGREE + 2] {
            let inv = pair_invariants_at(&ext, cap).map_err(|e| e.to_string())?;
            if inv != (3, 2) {
                return Err(format!("{name}: {inv:?} at degree cap {cap}"));
            }
        }
        if pair_invariants(&ext).map_err(|e| e.to_string())? != (3, 2) {
            return Err(format!("{name}: default invariants differ"));
        }
    }
    let reports = non_membership_checks(q()).map_err(|e| e.to_string())?;
    if let Some(r) = reports.iter().find(|r| r.member) {
        return Err(format!("membership not refuted: {}", r.describe()));
    }
    Ok(format!("(3, 2) for both extensions, {} non-memberships refuted", reports.len()))
}

fn big_indecomposables() -> Check {
    let start = Instant::now();
    let opts = IndecomposabilityOptions::default();
    for field in [q(), FieldSpec::prime(7).unwrap()] {
        let pair = Arc::new(ArtinianPair::k_into_d(field));
        for n in 1..=MAX_RANK {
            let m = build_indecomposable_pair_module(&pair, n).map_err(|e| e.to_string())?;
            if !is_indecomposable_pair_module(&m, &opts).map_err(|e| e.to_string())? {
                return Err(format!("rank {n} over characteristic {} decomposes", field.characteristic()));
            }
        }
    }
    let square = conductor_square(&case_one(q()), DEFAULT_MAX_DEGREE).map_err(|e| e.to_string())?;
    let mut ranks = Vec::new();
    for n in 1..=MAX_RANK {
        let m = build_indecomposable_pair_module(&square.pair, n).map_err(|e| e.to_string())?;
        let lifted = lift_module(&m, &square, DEFAULT_MAX_DEGREE).map_err(|e| e.to_string())?;
        if lifted.rank != n {
            return Err(format!("rank {n} module lifted to rank {}", lifted.rank));
        }
        ranks.push(format!("{}:{}", lifted.rank, lifted.nu));
    }
    let elapsed = start.elapsed();
    if elapsed >= PAIR_MODULE_LIMIT {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("rank:generators {} in {elapsed:.2?}", ranks.join(" ")))
}

fn milnor_oracles() -> Check {
    let c = ctx(&["x", "y"], q());
    let table = [("x^2 + y^2", 1), ("x^3 + y^4", 6), ("x^3 + x*y^3", 7), ("x^3 + y^5", 8), ("x^2*y + y^4", 5)];
    for (text, want) in table {
        let f = at_default(&c, text);
        let oracle = brute_milnor(&f, 20).ok_or_else(|| format!("{text}: oracle did not stabilize"))?;
        match milnor_number(&f).map_err(|e| e.to_string())? {
            MilnorNumber::Finite { value, certified: true } if value == want && oracle == want => {}
            other => return Err(format!("{text}: {other:?}, oracle {oracle}, want {want}")),
        }
    }
    Ok(format!("{} values match the oracle", table.len()))
}

fn invariance(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let c = ctx(&["x", "y"], q());
    for i in 0..INVARIANCE_CASES {
        let g = at_default(&c, CORPUS[i % CORPUS.len()]);
        let changed = linear_change(&g, &random_invertible(rng, 2));
        let h = with_default_precision(&random_unit(rng, &c).poly_mul(&changed).unwrap());
        let (rg, rh) = (classify(&g).map_err(|e| format!("{g}: {e}"))?, classify(&h).map_err(|e| format!("{h}: {e}"))?);
        if summary(&rg) != summary(&rh) {
            return Err(format!("classify({g}) = {:?} but classify({h}) = {:?}", summary(&rg), summary(&rh)));
        }
        if g.jet_order().order != h.jet_order().order {
            return Err(format!("order differs for {g} and {h}"));
        }
        let (mg, mh) = (milnor_number(&g).map_err(|e| e.to_string())?, milnor_number(&h).map_err(|e| e.to_string())?);
        if mg != mh {
            return Err(format!("Milnor number differs for {g} and {h}"));
        }
        if g.jet_order().order.finite() == Some(3) && tangent_cone_pattern(&g).ok() != tangent_cone_pattern(&h).ok() {
            return Err(format!("tangent cone differs for {g} and {h}"));
        }
    }
    let c3 = ctx(&["x", "y", "z"], q());
    for i in 0..INVARIANCE_CASES / 5 {
        let g = at_default(&c3, &format!("{} + z^2", CORPUS[i % CORPUS.len()]));
        let m = random_invertible(rng, 3);
        let h = with_default_precision(&linear_change(&g, &m));
        let (rg, rh) = (classify(&g).map_err(|e| format!("{g}: {e}"))?, classify(&h).map_err(|e| format!("{h}: {e}"))?);
        if summary(&rg) != summary(&rh) {
            return Err(format!("classify({g}) = {:?} but classify({h}) = {:?}", summary(&rg), summary(&rh)));
        }
    }
    Ok(INVARIANCE_CASES + INVARIANCE_CASES / 5)
}

fn round_trips(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let c = ctx(&["x", "y"], q());
    for _ in 0..ROUND_TRIP_CASES {
        let e = rng.gen_range(1..=4);
        let f = random_y_regular(rng, &c, e, 12);
        let w = f.weierstrass_prepare(1).map_err(|err| format!("{f}: {err}"))?;
        let ok = w.reconstruct().agrees_with(&f)
            && w.degree == e
            && !w.unit.constant_term().is_zero_scalar()
            && w.coefficients.iter().all(|b| b.constant_term().is_zero_scalar());
        if !ok {
            return Err(format!("round trip fails for {f}"));
        }
    }
    Ok(ROUND_TRIP_CASES)
}

trait ZeroScalar {
    fn is_zero_scalar(&self) -> bool;
}

impl ZeroScalar for cmtype::Scalar {
    fn is_zero_scalar(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
}

fn monotonicity(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let c = ctx(&["x", "y"], q());
    for i in 0..MONOTONICITY_CASES {
        let e = rng.gen_range(1..=4);
        let f = random_y_regular(rng, &c, e, 40);
        let (lo, hi) = (f.with_precision(10).as_inexact(), f.with_precision(14).as_inexact());
        let (wl, wh) = (lo.weierstrass_prepare(1).map_err(|e| e.to_string())?, hi.weierstrass_prepare(1).map_err(|e| e.to_string())?);
        let coeffs_agree = wl.coefficients.iter().zip(&wh.coefficients).all(|(a, b)| a.agrees_with(b));
        let u = random_unit(rng, &c);
        let (ul, uh) = (u.with_precision(10).as_inexact(), u.with_precision(14).as_inexact());
        let inverses_agree = ul.invert_unit().unwrap().agrees_with(&uh.invert_unit().unwrap());
        let products_agree = lo.mul(&ul).unwrap().agrees_with(&hi.mul(&uh).unwrap());
        if !(wl.unit.agrees_with(&wh.unit) && coeffs_agree && inverses_agree && products_agree) {
            return Err(format!("precision 10 and 14 disagree for {f}"));
        }
        let g = at_default(&c, CORPUS[i % CORPUS.len()]);
        let raised = g.with_precision(g.precision() + 6);
        let (a, b) = (classify(&g).map_err(|e| format!("{g}: {e}"))?, classify(&raised).map_err(|e| format!("{raised}: {e}"))?);
        if summary(&a) != summary(&b) {
            return Err(format!("classification of {g} changes with precision"));
        }
    }
    Ok(MONOTONICITY_CASES)
}

fn property_suites() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let a = invariance(&mut rng)?;
    let b = round_trips(&mut rng)?;
    let c = monotonicity(&mut rng)?;
    Ok(format!("{a} invariance, {b} round-trip, {c} monotonicity cases"))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("classification regression table", classification_table),
        ("D-infinity catalog exactness", catalog_exactness),
        ("Knorrer transfer", knorrer_transfer),
        ("suspension consistency", suspension_consistency),
        ("pair invariants", pair_invariant_check),
        ("indecomposable pair modules and lifts", big_indecomposables),
        ("Milnor oracle suite", milnor_oracles),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail})", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
