//! The published worked examples, rerun from embedded fixtures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use super::commands::{dominance_of, envelope_of_pmfs, random_gamble, Ctx};
use super::report::{Finding, Status};
use crate::combine::{factorability_check, natural_extension, sklar_combine, Factorability, Linkage};
use crate::copula::{extended_value, proper_quasi_copula, sklar_decompose, CopulaSpec, SklarError};
use crate::credal::{
    factorising_probe, independent_natural_extension, lower_prevision_of, marginal, pbox_of_lower_prevision,
    strong_product, Axis, Gamble, LowerPrevision, MarginalPrevision,
};
use crate::grid::{ExtReal, Grid, Table1D, Table2D};
use crate::icopula::{check_imprecise_copula, CopulaSet};
use crate::io::{parse_field, parse_object, strings, LowerPrevisionJson, MarginalJson, PBoxJson, PmfJson};
use crate::numerics::{int, rat, Rational};
use crate::orders::{i_sd, prop_lo_harness, set_relation, DfSet, Extension, PropLoInput};
use crate::pbox::{
    check_necessary_conditions, coherence_check, induced_lower_probability, induced_values, is_two_coherent,
    lp_envelopes, marginals, pbox_of_lower_probability, BiPBox, EventRef, PBox,
};

pub const COUNTEREXAMPLE: &str = include_str!("../../fixtures/counterexample.json");
pub const STRONG_PRODUCT_EXAMPLE: &str = include_str!("../../fixtures/strong_product.json");
pub const PREFERENCE: &str = include_str!("../../fixtures/preference.json");
pub const UNIFORM: &str = include_str!("../../fixtures/uniform.json");

pub fn fixtures() -> [&'static [u8]; 4] {
    [
        COUNTEREXAMPLE.as_bytes(),
        STRONG_PRODUCT_EXAMPLE.as_bytes(),
        PREFERENCE.as_bytes(),
        UNIFORM.as_bytes(),
    ]
}

fn object(text: &str) -> Map<String, Value> {
    parse_object(text).expect("embedded fixture parses")
}

pub fn run(ctx: Ctx) -> Vec<Finding> {
    let mut out = Vec::new();
    counterexample(&mut out);
    lower_probability_round_trip(&mut out);
    copula_extension(&mut out);
    imprecise_copulas(&mut out, ctx);
    natural_extension_diagram(&mut out, ctx);
    imprecise_sklar(&mut out, ctx);
    strong_product_example(&mut out, ctx);
    preference(&mut out);
    set_extensions(&mut out);
    prop_lo(&mut out, ctx);
    out
}

fn counterexample(out: &mut Vec<Finding>) {
    let obj = object(COUNTEREXAMPLE);
    let first = parse_field::<Vec<PmfJson>>(&obj, "pmfs").expect("fixture")[0]
        .to_pmf("/pmfs/0")
        .expect("fixture");
    out.push(Finding::claim(
        "counterexample.pmf-cdf",
        "the CDF of the first pmf is a bivariate distribution function",
        first.cdf().is_distribution_function(),
        "standardized and 2-increasing",
    ));

    let b = envelope_of_pmfs(&obj).expect("fixture");
    let (mx, my) = marginals(&b);
    let lo = b.lower();
    let values = [
        ("lower Fx(1)", mx.lower().value(1).clone(), rat(1, 2)),
        ("lower Fx(2)", mx.lower().value(2).clone(), rat(1, 2)),
        ("lower Fy(1)", my.lower().value(1).clone(), rat(1, 5)),
        ("lower F(1,1)", lo.value(1, 1).clone(), rat(1, 10)),
        ("lower F(2,1)", lo.value(2, 1).clone(), rat(1, 5)),
    ];
    let values_ok = values.iter().all(|(_, got, want)| got == want);
    let fac = factorability_check(lo, mx.lower(), my.lower());
    let witness_ok = matches!(&fac, Factorability::NotFactorable(c) if c.first == (1, 1) && c.second == (2, 1));
    let listing: Vec<String> = values.iter().map(|(n, got, _)| format!("{n} = {got}")).collect();
    out.push(
        Finding::claim(
            "counterexample-1",
            "the lower envelope is not a function of its lower marginals, so no copula links them",
            values_ok && witness_ok,
            format!(
                "{}; {}",
                listing.join(", "),
                match &fac {
                    Factorability::NotFactorable(c) => format!(
                        "NotFactorable at ({}, {}) vs ({}, {})",
                        c.first.0, c.first.1, c.second.0, c.second.1
                    ),
                    _ => "factorable".to_string(),
                }
            ),
        )
        .with_data(json!(values.iter().map(|(n, got, _)| json!({ "at": n, "value": got.to_string() })).collect::<Vec<_>>())),
    );

    out.push(Finding::claim(
        "counterexample.coherent",
        "the envelope lower probability is coherent",
        coherence_check(&b).is_coherent(),
        "every bound attained by a pmf in the credal set",
    ));
    let q = induced_lower_probability(&b, EventRef::Quadrant { x: 1, y: 1 });
    out.push(Finding::claim(
        "counterexample.quadrant",
        "the induced lower probability of the quadrant at (1, 1) is the envelope value",
        q == rat(1, 10),
        format!("lower P(X <= 1, Y <= 1) = {q}"),
    ));
    let sklar = sklar_decompose(lo);
    let sklar_ok = matches!(
        &sklar,
        Err(SklarError::WellDefinedness { first, second, .. }) if *first == (1, 1) && *second == (2, 1)
    );
    out.push(Finding::claim(
        "counterexample.sklar-decompose",
        "decomposing the lower envelope fails on well-definedness",
        sklar_ok,
        match sklar {
            Err(e) => e.to_string(),
            Ok(_) => "decomposition succeeded".to_string(),
        },
    ));
}

fn uniform_pbox() -> PBox {
    serde_json::from_str::<PBoxJson>(UNIFORM)
        .expect("fixture")
        .to_pbox("")
        .expect("fixture")
}

fn lower_probability_round_trip(out: &mut Vec<Finding>) {
    let u = uniform_pbox();
    let b = natural_extension(&u, &u);
    let values = induced_values(&b);
    let rebuilt = pbox_of_lower_probability(&values);
    out.push(Finding::claim(
        "two-coherent.pbox",
        "a 2-coherent lower probability on quadrants defines a bivariate p-box",
        is_two_coherent(&values) && rebuilt.as_ref() == Ok(&b),
        "quadrant values of the Frechet-Hoeffding box on uniform marginals rebuild the box",
    ));
}

fn builtins() -> Vec<CopulaSpec> {
    vec![
        CopulaSpec::Lukasiewicz,
        CopulaSpec::Product,
        CopulaSpec::Minimum,
        CopulaSpec::clayton(int(2)).expect("valid"),
        CopulaSpec::frank(int(3)).expect("valid"),
    ]
}

fn copula_extension(out: &mut Vec<Finding>) {
    let x = ExtReal::Finite(rat(-1, 2));
    let y = ExtReal::Finite(rat(1, 2));
    let zero_left = builtins().iter().all(|c| extended_value(|u, v| c.value(u, v), &x, &y) == int(0));
    out.push(Finding::claim(
        "copula-extension.negative",
        "the extension of a copula vanishes left of the origin",
        zero_left,
        "every builtin family gives 0 at (-1/2, 1/2)",
    ));
    let m = extended_value(
        |u, v| CopulaSpec::Minimum.value(u, v),
        &ExtReal::Finite(rat(1, 2)),
        &ExtReal::Finite(int(2)),
    );
    out.push(Finding::claim(
        "copula-extension.minimum",
        "the minimum copula extends as min{x, y} inside the unit interval",
        m == rat(1, 2),
        format!("C'(1/2, 2) = {m}"),
    ));
}

fn imprecise_copulas(out: &mut Vec<Finding>, ctx: Ctx) {
    let r = ctx.resolution;
    let frechet = check_imprecise_copula(&CopulaSpec::Lukasiewicz, &CopulaSpec::Minimum, r);
    out.push(Finding::claim(
        "imprecise-copula.frechet-pair",
        "the Frechet-Hoeffding pair is an imprecise copula",
        frechet.is_empty(),
        format!("{} violations at resolution {r}", frechet.len()),
    ));
    let singles: Vec<String> = builtins()
        .into_iter()
        .filter_map(|c| {
            let v = check_imprecise_copula(&c, &c, r);
            (!v.is_empty()).then(|| format!("{c}: {}", v[0]))
        })
        .collect();
    out.push(Finding::claim(
        "imprecise-copula.single",
        "a pair (C, C) of one copula is an imprecise copula",
        singles.is_empty(),
        if singles.is_empty() {
            "all builtin families pass".to_string()
        } else {
            singles.join("; ")
        },
    ));
    let q = proper_quasi_copula();
    let v = check_imprecise_copula(&q, &q, 3);
    out.push(Finding::claim(
        "imprecise-copula.quasi-pair",
        "a pair (Q, Q) of a proper quasi-copula is not an imprecise copula",
        !v.is_empty(),
        match v.first() {
            Some(first) => format!("{} violations, first: {first}", v.len()),
            None => "no violation".to_string(),
        },
    ));
}

/// Random CDF values on `n` finite points with denominators 8.
fn random_cdf(rng: &mut ChaCha8Rng, grid: &Grid) -> Table1D {
    let n = grid.len();
    let mut cuts: Vec<i64> = (0..n - 2).map(|_| rng.gen_range(0..=8)).collect();
    cuts.sort_unstable();
    let mut values = vec![int(0)];
    values.extend(cuts.into_iter().map(|k| rat(k, 8)));
    values.push(int(1));
    Table1D::new(grid.clone(), values).expect("sorted values in [0, 1]")
}

/// Four random CDFs sorted pointwise, lowest first.
pub fn sorted_cdfs(rng: &mut ChaCha8Rng, grid: &Grid) -> [Table1D; 4] {
    let draws: Vec<Table1D> = (0..4).map(|_| random_cdf(rng, grid)).collect();
    let mut columns: Vec<Vec<Rational>> = (0..grid.len())
        .map(|t| {
            let mut c: Vec<Rational> = draws.iter().map(|d| d.value(t).clone()).collect();
            c.sort();
            c
        })
        .collect();
    let mut take = |k: usize| {
        Table1D::new(grid.clone(), columns.iter_mut().map(|c| c[k].clone()).collect()).expect("order statistics of CDFs")
    };
    [take(0), take(1), take(2), take(3)]
}

pub fn small_grid() -> Grid {
    Grid::with_interior([int(0), int(1), int(2)]).expect("increasing")
}

pub fn random_pbox(rng: &mut ChaCha8Rng, grid: &Grid) -> PBox {
    let [a, _, _, d] = sorted_cdfs(rng, grid);
    PBox::new(a, d).expect("ordered")
}

fn natural_extension_diagram(out: &mut Vec<Finding>, ctx: Ctx) {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let g = small_grid();
    let trials = 10;
    let mut bad = None;
    for k in 0..trials {
        let (x, y) = (random_pbox(&mut rng, &g), random_pbox(&mut rng, &g));
        let b = natural_extension(&x, &y);
        let same = lp_envelopes(&b).is_some_and(|(lo, up)| &lo == b.lower() && &up == b.upper());
        if !same && bad.is_none() {
            bad = Some(k);
        }
    }
    out.push(Finding::claim(
        "natural-extension.diagram",
        "the envelopes of all joints with marginals in the p-boxes are the Frechet-Hoeffding bounds",
        bad.is_none(),
        match bad {
            None => format!("LP envelopes match on {trials} seeded marginal pairs"),
            Some(k) => format!("mismatch on trial {k}"),
        },
    ));
}

fn imprecise_sklar(out: &mut Vec<Finding>, ctx: Ctx) {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed ^ 0x5eed);
    let g = small_grid();
    let pool = [
        CopulaSpec::Lukasiewicz,
        CopulaSpec::Product,
        CopulaSpec::Minimum,
        CopulaSpec::clayton(rat(-1, 2)).expect("valid"),
        CopulaSpec::clayton(int(5)).expect("valid"),
        CopulaSpec::frank(int(3)).expect("valid"),
        CopulaSpec::frank(int(-3)).expect("valid"),
    ];
    let trials = 8;
    let (mut conditions, mut coherent) = (0, 0);
    let mut first_bad = None;
    for k in 0..trials {
        let (x, y) = (random_pbox(&mut rng, &g), random_pbox(&mut rng, &g));
        let size = rng.gen_range(1..=3);
        let members: Vec<CopulaSpec> = (0..size).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect();
        let names: Vec<String> = members.iter().map(ToString::to_string).collect();
        let set = CopulaSet::new(members, ctx.resolution).expect("builtin families are copulas");
        let b = sklar_combine(&x, &y, Linkage::Set(&set));
        let c = check_necessary_conditions(&b).is_empty();
        let h = coherence_check(&b).is_coherent();
        conditions += usize::from(c);
        coherent += usize::from(h);
        if !(c && h) && first_bad.is_none() {
            first_bad = Some(format!("trial {k}, copulas {{{}}}", names.join(", ")));
        }
    }
    out.push(Finding::claim(
        "imprecise-sklar.necessary-conditions",
        "a p-box built from marginal p-boxes and a copula set satisfies the mixed rectangle conditions",
        conditions == trials,
        format!("{conditions} of {trials} seeded combinations"),
    ));
    out.push(Finding::claim(
        "imprecise-sklar.coherence",
        "a p-box built from marginal p-boxes and a copula set is coherent",
        coherent == trials,
        match first_bad {
            None => format!("{coherent} of {trials} seeded combinations coherent"),
            Some(s) => format!("{coherent} of {trials}; first failure {s}"),
        },
    ));
}

fn indicator_sets(n: usize) -> Vec<Vec<Rational>> {
    (1..(1u32 << n))
        .map(|mask| (0..n).map(|i| if mask >> i & 1 == 1 { int(1) } else { int(0) }).collect())
        .collect()
}

fn same_marginal(a: &MarginalPrevision, b: &MarginalPrevision) -> bool {
    a.labels() == b.labels()
        && indicator_sets(a.labels().len())
            .iter()
            .all(|f| a.lower(f) == b.lower(f) && a.upper(f) == b.upper(f))
}

fn strong_product_example(out: &mut Vec<Finding>, ctx: Ctx) {
    let obj = object(STRONG_PRODUCT_EXAMPLE);
    let mx = parse_field::<MarginalJson>(&obj, "x").and_then(|m| m.to_marginal("/x")).expect("fixture");
    let my = parse_field::<MarginalJson>(&obj, "y").and_then(|m| m.to_marginal("/y")).expect("fixture");
    let alt: LowerPrevision = parse_field::<LowerPrevisionJson>(&obj, "alternative")
        .and_then(|m| m.to_lower_prevision("/alternative"))
        .expect("fixture");
    let product = strong_product(&mx, &my);

    let q = rat(1, 4);
    let h = rat(1, 2);
    let z = int(0);
    let expected = vec![
        vec![q.clone(), q.clone(), q.clone(), q.clone()],
        vec![h.clone(), z.clone(), h.clone(), z.clone()],
        vec![h.clone(), h.clone(), z.clone(), z.clone()],
        vec![int(1), z.clone(), z.clone(), z.clone()],
    ];
    out.push(
        Finding::claim(
            "strong-product.vertices",
            "the strong product has exactly the four product vertices",
            product.vertices() == expected.as_slice(),
            "vertices in (00, 01, 10, 11) order",
        )
        .with_data(json!(product.vertices().iter().map(|v| strings(v)).collect::<Vec<_>>())),
    );

    let corner = Gamble::quadrant(product.space(), 0, 0);
    let (sp_corner, alt_corner) = (
        lower_prevision_of(&product, &corner).expect("shape"),
        lower_prevision_of(&alt, &corner).expect("shape"),
    );
    out.push(Finding::claim(
        "strong-product.corner",
        "the alternative product gives {(0,0)} more lower probability than the strong product",
        sp_corner == q && alt_corner == rat(3, 8),
        format!("alternative {alt_corner} > strong product {sp_corner}"),
    ));
    let marg_ok = same_marginal(&marginal(&alt, Axis::X), &mx) && same_marginal(&marginal(&alt, Axis::Y), &my);
    out.push(Finding::claim(
        "strong-product.alternative-marginals",
        "the alternative product has the same marginals",
        marg_ok,
        "lower and upper probabilities of every event agree",
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let gambles = 20;
    let mut below = 0;
    for _ in 0..gambles {
        let f = Gamble::new(random_gamble(&mut rng, 2, 2));
        let ine = independent_natural_extension(&mx, &my, &f).expect("shape");
        below += usize::from(ine <= lower_prevision_of(&product, &f).expect("shape"));
    }
    out.push(Finding::claim(
        "strong-product.factorising-bounds",
        "the independent natural extension lies below the strong product",
        below == gambles,
        format!("{below} of {gambles} seeded gambles"),
    ));

    let trials = 100;
    let probe = factorising_probe(&product, trials, ctx.seed);
    let mut f = Finding::claim(
        "strong-product.factorising",
        "the strong product is factorising",
        !probe.is_violation(),
        probe.to_string(),
    );
    if !probe.is_violation() {
        f.status = Status::NoViolationFound;
    }
    out.push(f);
    let alt_probe = factorising_probe(&alt, trials, ctx.seed);
    out.push(Finding::claim(
        "strong-product.alternative-not-factorising",
        "the alternative product is not factorising",
        alt_probe.is_violation(),
        alt_probe.to_string(),
    ));

    let (pa, pb) = (pbox_of_lower_prevision(&product), pbox_of_lower_prevision(&alt));
    let (px, py) = (mx.pbox(), my.pbox());
    let product_form = (0..pa.xgrid().len()).all(|i| {
        (0..pa.ygrid().len()).all(|j| {
            pa.lower().value(i, j) == &(px.lower().value(i) * py.lower().value(j))
                && pa.upper().value(i, j) == &(px.upper().value(i) * py.upper().value(j))
        })
    });
    out.push(Finding::claim(
        "strong-product.pbox",
        "the strong product induces the product p-box",
        product_form,
        "lower F = lower Fx * lower Fy and upper F = upper Fx * upper Fy",
    ));
    let diff: Vec<(usize, usize)> = (0..pa.xgrid().len())
        .flat_map(|i| (0..pa.ygrid().len()).map(move |j| (i, j)))
        .filter(|&(i, j)| pa.lower().value(i, j) != pb.lower().value(i, j) || pa.upper().value(i, j) != pb.upper().value(i, j))
        .collect();
    out.push(Finding::claim(
        "strong-product.pbox-difference",
        "the two products induce p-boxes differing only at (0, 0)",
        diff == [(1, 1)] && pb.lower().value(1, 1) == &rat(3, 8) && pa.lower().value(1, 1) == &q,
        format!(
            "differ at {} grid points; lower F(0,0) = {} vs {}",
            diff.len(),
            pb.lower().value(1, 1),
            pa.lower().value(1, 1)
        ),
    ));
}

fn preference(out: &mut Vec<Finding>) {
    let obj = object(PREFERENCE);
    let pmf = parse_field::<PmfJson>(&obj, "joint").and_then(|p| p.to_pmf("/joint")).expect("fixture");
    let d = dominance_of(&pmf);
    out.push(Finding::claim(
        "preference.sd-equivalent",
        "X and Y are equivalent under stochastic dominance",
        d.x_sd_y && d.y_sd_x,
        "marginal CDFs coincide",
    ));
    out.push(Finding::claim(
        "preference.sp",
        "Y is strictly statistically preferred to X",
        d.preference == crate::orders::Preference::YPreferred && d.x_over_y == rat(7, 10) && d.y_over_x == rat(4, 5),
        format!("P(X >= Y) = {}, P(Y >= X) = {}", d.x_over_y, d.y_over_x),
    ));
}

fn set_extensions(out: &mut Vec<Finding>) {
    let ge = |a: &i32, b: &i32| a >= b;
    let e = |i| Extension::new(i).expect("in range");
    let cases = [
        ("all pairs", 1, vec![5, 6], vec![1, 2]),
        ("one element above all", 2, vec![9, 0], vec![1, 2]),
        ("a single pair", 4, vec![3, 0], vec![2, 5]),
        ("one element below all", 5, vec![3, 4], vec![0, 9]),
    ];
    let failed: Vec<&str> = cases
        .iter()
        .filter(|(_, i, a, b)| !set_relation(e(*i), a, b, ge))
        .map(|(n, ..)| *n)
        .collect();
    out.push(Finding::claim(
        "set-extensions.configurations",
        "the illustrated set configurations satisfy extensions 1, 2, 4 and 5",
        failed.is_empty(),
        if failed.is_empty() {
            "all four configurations hold".to_string()
        } else {
            format!("failed: {}", failed.join(", "))
        },
    ));
}

/// Marginal p-box pairs with `(X box) <=_i (Y box)` on their samples:
/// overlapping boxes for extensions 2 to 6, separated ones for all six.
fn transfer_marginals(rng: &mut ChaCha8Rng, g: &Grid, separated: bool) -> (PBox, PBox) {
    let [a, b, c, d] = sorted_cdfs(rng, g);
    if separated {
        (PBox::new(a, b).expect("ordered"), PBox::new(c, d).expect("ordered"))
    } else {
        (PBox::new(a, c).expect("ordered"), PBox::new(b, d).expect("ordered"))
    }
}

fn prop_lo(out: &mut Vec<Finding>, ctx: Ctx) {
    let r = ctx.resolution;
    let frechet = CopulaSet::new(vec![CopulaSpec::Lukasiewicz, CopulaSpec::Minimum], r).expect("copulas");
    let product = CopulaSet::new(vec![CopulaSpec::Product], r).expect("copula");
    let g = small_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let cases: Vec<(&str, &str, &CopulaSet, Vec<u8>)> = vec![
        (
            "order-transfer.frechet",
            "with the Frechet-Hoeffding copula pair, marginal i-dominance gives i-dominance for i = 2..6",
            &frechet,
            (2..=6).collect(),
        ),
        (
            "order-transfer.product",
            "with the product copula, marginal i-dominance gives i-dominance for i = 1..6",
            &product,
            (1..=6).collect(),
        ),
    ];
    for (id, claim, set, range) in cases {
        let mut lines = Vec::new();
        let mut ok = true;
        for i in range {
            let separated = i == 1;
            let (x1, y1) = transfer_marginals(&mut rng, &g, separated);
            let (x2, y2) = transfer_marginals(&mut rng, &g, separated);
            let input = PropLoInput {
                x1: &x1,
                x2: &x2,
                y1: &y1,
                y2: &y2,
                cx: set,
                cy: set,
            };
            let report = prop_lo_harness(&input, Extension::new(i).expect("in range"), 3, r, ctx.seed + u64::from(i))
                .expect("shared grids");
            ok &= report.premises_established() && report.confirmed();
            lines.push(format!("i = {i}: {}", report.summary()));
        }
        out.push(Finding::claim(id, claim, ok, lines.join("; ")));
    }

    let u = uniform_pbox();
    let input = PropLoInput {
        x1: &u,
        x2: &u,
        y1: &u,
        y2: &u,
        cx: &frechet,
        cy: &frechet,
    };
    let one = Extension::new(1).expect("in range");
    let report = prop_lo_harness(&input, one, 0, r, ctx.seed).expect("shared grids");
    let ne: BiPBox = natural_extension(&u, &u);
    let sets = DfSet::<Table2D>::new(vec![ne.lower().clone(), ne.upper().clone()]).expect("shared grids");
    let direct = i_sd(one, &sets, &sets).expect("shared grids");
    let (cm, cl) = (ne.upper().value(2, 2).clone(), ne.lower().value(2, 2).clone());
    out.push(Finding::claim(
        "order-transfer.uniform-first-extension",
        "for uniform marginals and the Frechet-Hoeffding pair, extension 1 fails",
        report.first_marginal_premise
            && report.second_marginal_premise
            && !report.copula_premise
            && report.conclusion.is_none()
            && !direct
            && cm == rat(1, 2)
            && cl == int(0),
        format!(
            "harness: {}; direct check {direct}; C_M(F,F)(1/2,1/2) = {cm} > {cl} = C_L(F,F)(1/2,1/2)",
            report.summary()
        ),
    ));
}
