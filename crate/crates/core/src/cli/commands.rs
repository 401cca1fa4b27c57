use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::report::{Finding, Status};
use crate::combine::{factorability_check_with, natural_extension, sklar_combine, Factorability, FactorabilityMode, Linkage};
use crate::copula::{frechet_bounds_check, is_quasi_copula, sklar_decompose, validate_copula, CopulaSpec};
use crate::credal::{
    factorising_probe, independent_natural_extension, lower_prevision_of, pbox_of_lower_prevision, strong_product,
    Gamble, LowerPrevision, MarginalPrevision, ProbeOutcome,
};
use crate::grid::Table2D;
use crate::icopula::{check_imprecise_copula, property_battery, ImpreciseCopula};
use crate::io::{
    from_json, only_keys, parse_field, parse_object, strings, strings2, BiPBoxJson, CopulaJson, CopulaSetJson,
    InputError, LowerPrevisionJson, MarginalJson, PBoxJson, PmfJson,
};
use crate::numerics::{rat, Rational};
use crate::orders::{sd, sp, JointPmf, Preference};
use crate::pbox::{
    check_necessary_conditions, coherence_check, envelope_of_cdfs, induced_values, lp_envelopes, marginals,
    two_coherence_violation, BiPBox, CoherenceOutcome, PBox,
};

/// Shared run parameters.
#[derive(Debug, Clone, Copy)]
pub struct Ctx {
    pub seed: u64,
    pub resolution: usize,
}

pub type Findings = Result<Vec<Finding>, InputError>;

fn first_few<T: ToString>(items: &[T], n: usize) -> Value {
    Value::Array(items.iter().take(n).map(|v| Value::String(v.to_string())).collect())
}

pub fn validate_pbox(text: &str) -> Findings {
    let obj = parse_object(text)?;
    if !obj.contains_key("xgrid") {
        let j: PBoxJson = from_json(text)?;
        j.check_literals("")?;
        return Ok(vec![match j.to_pbox("") {
            Ok(p) => Finding::check(
                "pbox.valid",
                true,
                format!("ordered standardized bounds on {} grid points", p.grid().len()),
            ),
            Err(e) => Finding::check("pbox.valid", false, e.to_string()),
        }]);
    }
    let j: BiPBoxJson = from_json(text)?;
    j.check_literals("")?;
    let b = match j.to_bipbox("") {
        Ok(b) => b,
        Err(e) => return Ok(vec![Finding::check("bipbox.valid", false, e.to_string())]),
    };
    let mut out = vec![Finding::check(
        "bipbox.valid",
        true,
        format!(
            "ordered standardized bounds on a {}x{} grid",
            b.xgrid().len(),
            b.ygrid().len()
        ),
    )];
    out.push(match two_coherence_violation(&induced_values(&b)) {
        None => Finding::check("bipbox.two-coherence", true, "induced lower probability is 2-coherent"),
        Some(v) => Finding::check("bipbox.two-coherence", false, v.to_string()),
    });
    out.push(necessary_conditions_finding("bipbox.necessary-conditions", &b));
    Ok(out)
}

fn necessary_conditions_finding(id: &str, b: &BiPBox) -> Finding {
    let v = check_necessary_conditions(b);
    if v.is_empty() {
        Finding::check(id, true, "I-RI1 to I-RI4 hold on every rectangle")
    } else {
        Finding::check(id, false, format!("{} violations, first: {}", v.len(), v[0]))
            .with_data(json!({ "violations": first_few(&v, 10) }))
    }
}

pub fn coherence_finding(id: &str, b: &BiPBox) -> Finding {
    match coherence_check(b) {
        CoherenceOutcome::Coherent => Finding::check(id, true, "every bound is attained by a pmf in the credal set"),
        CoherenceOutcome::Incoherent(w) => Finding::check(id, false, w.describe(b.xgrid(), b.ygrid())),
    }
}

pub fn copula_findings(c: &CopulaSpec, resolution: usize) -> Vec<Finding> {
    let v = validate_copula(c, resolution);
    let axioms = if v.is_empty() {
        Finding::check(
            "copula.axioms",
            true,
            format!("{c}: grounded, uniform margins and 2-increasing at resolution {resolution}"),
        )
    } else {
        Finding::check(
            "copula.axioms",
            false,
            format!("{c}: {} violations, first {}: {}", v.len(), v[0].condition(), v[0]),
        )
        .with_data(json!({ "violations": first_few(&v, 10) }))
    };
    vec![
        axioms,
        Finding::check("copula.quasi", is_quasi_copula(c, resolution), format!("{c}: quasi-copula conditions")),
        Finding::check(
            "copula.frechet",
            frechet_bounds_check(c, resolution),
            format!("{c}: within the Frechet-Hoeffding bounds"),
        ),
    ]
}

pub fn validate_copula_cmd(ctx: Ctx, family: Option<&str>, theta: Option<&str>, text: Option<&str>) -> Findings {
    let c = match (family, text) {
        (Some(f), _) => crate::io::copula_of_family("", f, theta)?,
        (None, Some(t)) => from_json::<CopulaJson>(t)?.to_copula("")?,
        (None, None) => return Err(InputError::new("", "give --family or --input")),
    };
    Ok(copula_findings(&c, ctx.resolution))
}

pub fn icopula_findings(lower: CopulaSpec, upper: CopulaSpec, resolution: usize) -> Vec<Finding> {
    let name = format!("({lower}, {upper})");
    let v = check_imprecise_copula(&lower, &upper, resolution);
    if !v.is_empty() {
        return vec![Finding::check(
            "icopula.conditions",
            false,
            format!("{name}: {} violations, first: {}", v.len(), v[0]),
        )
        .with_data(json!({ "violations": first_few(&v, 10) }))];
    }
    let ic = ImpreciseCopula::certify(lower, upper, resolution).expect("checked above");
    let battery = property_battery(&ic, resolution);
    vec![
        Finding::check(
            "icopula.conditions",
            true,
            format!("{name}: boundary conditions and CI-1 to CI-4 hold at resolution {resolution}"),
        ),
        Finding::check(
            "icopula.battery",
            battery.is_clean(),
            if battery.is_clean() {
                format!("{name}: ordered, monotone, Lipschitz, within the Frechet-Hoeffding bounds")
            } else {
                format!("{name}: failed {}", battery.failures().join(", "))
            },
        ),
    ]
}

pub fn validate_icopula(ctx: Ctx, text: &str) -> Findings {
    let obj = parse_object(text)?;
    only_keys(&obj, &["lower", "upper"])?;
    let lower = parse_field::<CopulaJson>(&obj, "lower")?.to_copula("/lower")?;
    let upper = parse_field::<CopulaJson>(&obj, "upper")?.to_copula("/upper")?;
    Ok(icopula_findings(lower, upper, ctx.resolution))
}

fn marginal_pair(obj: &serde_json::Map<String, Value>) -> Result<(PBox, PBox), InputError> {
    let x = parse_field::<PBoxJson>(obj, "x")?.to_pbox("/x")?;
    let y = parse_field::<PBoxJson>(obj, "y")?.to_pbox("/y")?;
    Ok((x, y))
}

fn bipbox_data(b: &BiPBox) -> Value {
    serde_json::to_value(BiPBoxJson::of(b)).expect("serializes")
}

pub fn combine(ctx: Ctx, text: &str) -> Findings {
    let obj = parse_object(text)?;
    only_keys(&obj, &["x", "y", "copulas", "imprecise"])?;
    let (x, y) = marginal_pair(&obj)?;
    let b = if obj.contains_key("copulas") {
        let set = parse_field::<CopulaSetJson>(&obj, "copulas")?.to_set("/copulas", ctx.resolution)?;
        sklar_combine(&x, &y, Linkage::Set(&set))
    } else {
        let pair = crate::io::field(&obj, "imprecise")?
            .as_object()
            .ok_or_else(|| InputError::new("/imprecise", "expected an object"))?;
        let lower = parse_field::<CopulaJson>(pair, "lower")
            .map_err(|e| e.nested("/imprecise"))?
            .to_copula("/imprecise/lower")?;
        let upper = parse_field::<CopulaJson>(pair, "upper")
            .map_err(|e| e.nested("/imprecise"))?
            .to_copula("/imprecise/upper")?;
        match ImpreciseCopula::certify(lower, upper, ctx.resolution) {
            Ok(ic) => sklar_combine(&x, &y, Linkage::Imprecise(&ic)),
            Err(v) => {
                return Ok(vec![Finding::check(
                    "combine.imprecise-copula",
                    false,
                    format!("{} violations, first: {}", v.len(), v[0]),
                )])
            }
        }
    };
    Ok(vec![
        Finding::check("combine.result", true, "bivariate p-box from the marginals and the copulas").with_data(bipbox_data(&b)),
        necessary_conditions_finding("combine.necessary-conditions", &b),
        coherence_finding("combine.coherence", &b),
    ])
}

pub fn natural_extension_cmd(text: &str) -> Findings {
    let obj = parse_object(text)?;
    only_keys(&obj, &["x", "y"])?;
    let (x, y) = marginal_pair(&obj)?;
    let b = natural_extension(&x, &y);
    let lp = lp_envelopes(&b);
    let same = lp.as_ref().is_some_and(|(lo, up)| lo == b.lower() && up == b.upper());
    Ok(vec![
        Finding::check("natural-extension.result", true, "lower C_L(Fx, Fy), upper C_M(Fx, Fy)").with_data(bipbox_data(&b)),
        Finding::check(
            "natural-extension.lp-envelopes",
            same,
            if same {
                "LP envelopes of the credal set equal the Frechet-Hoeffding bounds at every grid point"
            } else {
                "LP envelopes differ from the Frechet-Hoeffding bounds"
            },
        ),
        coherence_finding("natural-extension.coherence", &b),
    ])
}

pub fn coherence(text: &str) -> Findings {
    let b = from_json::<BiPBoxJson>(text)?.to_bipbox("")?;
    Ok(vec![coherence_finding("coherence", &b)])
}

/// Checks that a subcopula of `f` reproduces `f` through its checkerboard extension.
pub fn round_trip(f: &Table2D) -> Result<bool, String> {
    let sub = sklar_decompose(f).map_err(|e| e.to_string())?;
    let c = sub.to_copula();
    let (fx, fy) = (f.x_marginal(), f.y_marginal());
    let rebuilt = Table2D::from_fn(f.xgrid().clone(), f.ygrid().clone(), |i, j| c.value(&fx[i], &fy[j]))
        .expect("copula values lie in [0, 1]");
    Ok(&rebuilt == f)
}

pub fn decompose(text: &str) -> Findings {
    let pmf = from_json::<PmfJson>(text)?.to_pmf("")?;
    let f = pmf.cdf();
    match sklar_decompose(&f) {
        Err(e) => Ok(vec![Finding::check("decompose.subcopula", false, e.to_string())]),
        Ok(sub) => {
            let ok = round_trip(&f).unwrap_or(false);
            Ok(vec![
                Finding::check(
                    "decompose.subcopula",
                    true,
                    format!("subcopula on {}x{} marginal nodes", sub.u_nodes().len(), sub.v_nodes().len()),
                )
                .with_data(json!({
                    "u": strings(sub.u_nodes()),
                    "v": strings(sub.v_nodes()),
                    "values": sub.u_nodes().iter().map(|u| sub.v_nodes().iter().map(|v| sub.at_nodes(u, v).expect("node").to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
                })),
                Finding::check(
                    "decompose.round-trip",
                    ok,
                    "checkerboard extension evaluated at the marginals reproduces the CDF",
                ),
            ])
        }
    }
}

pub fn factorability_finding(id: &str, f: &Factorability, b: &BiPBox) -> Finding {
    match f {
        Factorability::Factorable { u, v, .. } => Finding::check(
            id,
            true,
            format!("depends on the marginals only; combining function on {}x{} nodes", u.len(), v.len()),
        ),
        Factorability::NotFactorable(c) => Finding::check(
            id,
            false,
            format!(
                "points {} and {} share marginal values but have values {} and {}",
                crate::pbox::point_label(b.xgrid(), b.ygrid(), c.first.0, c.first.1),
                crate::pbox::point_label(b.xgrid(), b.ygrid(), c.second.0, c.second.1),
                c.first_value,
                c.second_value
            ),
        )
        .with_data(json!({
            "first": [c.first.0, c.first.1],
            "second": [c.second.0, c.second.1],
            "first_value": c.first_value.to_string(),
            "second_value": c.second_value.to_string(),
        })),
        Factorability::NotACopula { reason } => Finding::check(id, false, format!("combining function is not a copula: {reason}")),
    }
}

/// Envelope p-box of the CDFs of several pmfs.
pub fn envelope_of_pmfs(obj: &serde_json::Map<String, Value>) -> Result<BiPBox, InputError> {
    let list = parse_field::<Vec<PmfJson>>(obj, "pmfs")?;
    if list.is_empty() {
        return Err(InputError::new("/pmfs", "need at least one pmf"));
    }
    let mut cdfs = Vec::new();
    for (k, p) in list.iter().enumerate() {
        cdfs.push(p.to_pmf(&format!("/pmfs/{k}"))?.cdf());
    }
    envelope_of_cdfs(&cdfs).map_err(|e| InputError::new("/pmfs", e))
}

pub fn factorability(text: &str, strict: bool) -> Findings {
    let mode = if strict { FactorabilityMode::Copula } else { FactorabilityMode::AnyFunction };
    let obj = parse_object(text)?;
    only_keys(&obj, &["pmfs"])?;
    let b = envelope_of_pmfs(&obj)?;
    let (mx, my) = marginals(&b);
    let lower = factorability_check_with(b.lower(), mx.lower(), my.lower(), mode);
    let upper = factorability_check_with(b.upper(), mx.upper(), my.upper(), mode);
    Ok(vec![
        Finding::check("factorability.envelope", true, "pointwise envelopes of the pmf CDFs").with_data(bipbox_data(&b)),
        factorability_finding("factorability.lower", &lower, &b),
        factorability_finding("factorability.upper", &upper, &b),
    ])
}

fn vertices_data(lp: &LowerPrevision) -> Value {
    Value::Array(lp.vertices().iter().map(|v| json!(strings(v))).collect())
}

fn singleton_lowers(lp: &LowerPrevision) -> Vec<Vec<Rational>> {
    let s = lp.space();
    (0..s.nx())
        .map(|x| {
            (0..s.ny())
                .map(|y| {
                    let g = Gamble::from_fn(s, |a, b| if (a, b) == (x, y) { rat(1, 1) } else { rat(0, 1) });
                    lower_prevision_of(lp, &g).expect("shape")
                })
                .collect()
        })
        .collect()
}

pub fn probe_finding(id: &str, lp: &LowerPrevision, trials: usize, seed: u64) -> Finding {
    match factorising_probe(lp, trials, seed) {
        ProbeOutcome::NoViolation { probes } => {
            Finding::new(id, Status::NoViolationFound, format!("{probes} probes, no factorisation failure"))
        }
        ProbeOutcome::Violation {
            f,
            g,
            order,
            lhs,
            rhs,
            probe,
        } => Finding::check(id, false, format!("probe {probe}: {order} fails, {lhs} != {rhs}")).with_data(json!({
            "f": strings(&f),
            "g": strings(&g),
            "lhs": lhs.to_string(),
            "rhs": rhs.to_string(),
        })),
    }
}

fn marginals_of(obj: &serde_json::Map<String, Value>) -> Result<(MarginalPrevision, MarginalPrevision), InputError> {
    let x = parse_field::<MarginalJson>(obj, "x")?.to_marginal("/x")?;
    let y = parse_field::<MarginalJson>(obj, "y")?.to_marginal("/y")?;
    Ok((x, y))
}

pub fn strong_product_cmd(ctx: Ctx, text: &str, trials: usize) -> Findings {
    let obj = parse_object(text)?;
    only_keys(&obj, &["x", "y", "alternative"])?;
    let (mx, my) = marginals_of(&obj)?;
    let product = strong_product(&mx, &my);
    let mut out = vec![
        Finding::check("strong-product.vertices", true, format!("{} vertices", product.vertices().len()))
            .with_data(vertices_data(&product)),
        Finding::check(
            "strong-product.singletons",
            true,
            "lower probability of each singleton {(x, y)}, rows by x",
        )
        .with_data(json!(strings2(&singleton_lowers(&product)))),
        probe_finding("strong-product.factorising", &product, trials, ctx.seed),
    ];
    if obj.contains_key("alternative") {
        let alt = parse_field::<LowerPrevisionJson>(&obj, "alternative")?.to_lower_prevision("/alternative")?;
        if alt.space() != product.space() {
            return Err(InputError::new("/alternative/space", "must match the marginal labels"));
        }
        out.push(
            Finding::check("alternative.singletons", true, "lower probability of each singleton {(x, y)}, rows by x")
                .with_data(json!(strings2(&singleton_lowers(&alt)))),
        );
        let probe = factorising_probe(&alt, trials, ctx.seed);
        let status = if probe.is_violation() { Status::Pass } else { Status::NoViolationFound };
        out.push(Finding::new("alternative.not-factorising", status, probe.to_string()));
        let (a, b) = (pbox_of_lower_prevision(&product), pbox_of_lower_prevision(&alt));
        let diff: Vec<String> = (0..a.xgrid().len())
            .flat_map(|i| (0..a.ygrid().len()).map(move |j| (i, j)))
            .filter(|&(i, j)| a.lower().value(i, j) != b.lower().value(i, j) || a.upper().value(i, j) != b.upper().value(i, j))
            .map(|(i, j)| crate::pbox::point_label(a.xgrid(), a.ygrid(), i, j))
            .collect();
        out.push(
            Finding::check(
                "alternative.pbox-difference",
                true,
                format!("induced p-boxes differ at {} grid points", diff.len()),
            )
            .with_data(json!(diff)),
        );
    }
    Ok(out)
}

pub fn random_gamble(rng: &mut ChaCha8Rng, nx: usize, ny: usize) -> Vec<Vec<Rational>> {
    (0..nx)
        .map(|_| (0..ny).map(|_| rat(rng.gen_range(-8..=8), rng.gen_range(1..=4))).collect())
        .collect()
}

pub fn inat_extension(ctx: Ctx, text: &str, count: usize) -> Findings {
    let obj = parse_object(text)?;
    only_keys(&obj, &["x", "y", "gambles"])?;
    let (mx, my) = marginals_of(&obj)?;
    let product = strong_product(&mx, &my);
    let (nx, ny) = (product.space().nx(), product.space().ny());
    let gambles: Vec<Vec<Vec<Rational>>> = if obj.contains_key("gambles") {
        let raw = parse_field::<Vec<Vec<Vec<String>>>>(&obj, "gambles")?;
        let mut out = Vec::new();
        for (k, g) in raw.iter().enumerate() {
            let p = format!("/gambles/{k}");
            if g.len() != nx || g.iter().any(|r| r.len() != ny) {
                return Err(InputError::new(p, format!("expected a {nx}x{ny} table")));
            }
            let vals = g
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    r.iter()
                        .enumerate()
                        .map(|(j, s)| crate::numerics::parse_rational(s).map_err(|e| InputError::new(format!("{p}/{i}/{j}"), e)))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            out.push(vals);
        }
        out
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        (0..count).map(|_| random_gamble(&mut rng, nx, ny)).collect()
    };
    let precise = mx.is_precise() && my.is_precise();
    let mut rows = Vec::new();
    let mut ok = true;
    for g in &gambles {
        let f = Gamble::new(g.clone());
        let ine = independent_natural_extension(&mx, &my, &f).map_err(|e| InputError::new("/gambles", e))?;
        let sp = lower_prevision_of(&product, &f).map_err(|e| InputError::new("/gambles", e))?;
        ok &= if precise { ine == sp } else { ine <= sp };
        rows.push(json!({ "gamble": strings2(g), "independent_natural_extension": ine.to_string(), "strong_product": sp.to_string() }));
    }
    let relation = if precise { "equals" } else { "is at most" };
    Ok(vec![Finding::check(
        "inat-extension.bound",
        ok,
        format!(
            "independent natural extension {relation} the strong product on {} gambles",
            gambles.len()
        ),
    )
    .with_data(Value::Array(rows))])
}

pub fn factorising_probe_cmd(ctx: Ctx, text: &str, trials: usize) -> Findings {
    let lp = from_json::<LowerPrevisionJson>(text)?.to_lower_prevision("")?;
    Ok(vec![probe_finding("factorising-probe", &lp, trials, ctx.seed)])
}

pub struct DominanceOutcome {
    pub x_sd_y: bool,
    pub y_sd_x: bool,
    pub preference: Preference,
    pub x_over_y: Rational,
    pub y_over_x: Rational,
}

pub fn dominance_of(pmf: &crate::io::Pmf) -> DominanceOutcome {
    let grid_masses = pmf.grid_masses();
    let f = Table2D::cdf_of_pmf(pmf.space.xgrid(), pmf.space.ygrid(), &grid_masses).expect("validated");
    let fx = crate::grid::Table1D::new(pmf.space.xgrid(), f.x_marginal()).expect("marginal CDF");
    let fy = crate::grid::Table1D::new(pmf.space.ygrid(), f.y_marginal()).expect("marginal CDF");
    let joint = JointPmf::new(
        pmf.space.xlabels().to_vec(),
        pmf.space.ylabels().to_vec(),
        pmf.masses.clone(),
    )
    .expect("validated pmf");
    let out = sp(&joint);
    let same_grid = pmf.space.xlabels() == pmf.space.ylabels();
    DominanceOutcome {
        x_sd_y: same_grid && sd(&fx, &fy).unwrap_or(false),
        y_sd_x: same_grid && sd(&fy, &fx).unwrap_or(false),
        preference: out.preference,
        x_over_y: out.x_over_y,
        y_over_x: out.y_over_x,
    }
}

pub fn dominance(text: &str) -> Findings {
    let obj = parse_object(text)?;
    only_keys(&obj, &["joint"])?;
    let pmf = parse_field::<PmfJson>(&obj, "joint")?.to_pmf("/joint")?;
    if pmf.space.xlabels() != pmf.space.ylabels() {
        return Err(InputError::new("/joint/ylabels", "X and Y must share their value labels"));
    }
    let d = dominance_of(&pmf);
    let pref = match d.preference {
        Preference::XPreferred => "X strictly preferred",
        Preference::YPreferred => "Y strictly preferred",
        Preference::Indifferent => "indifferent",
    };
    Ok(vec![
        Finding::new(
            "dominance.sd",
            Status::Pass,
            format!("X dominates Y: {}; Y dominates X: {}", d.x_sd_y, d.y_sd_x),
        )
        .with_data(json!({ "x_dominates_y": d.x_sd_y, "y_dominates_x": d.y_sd_x })),
        Finding::new(
            "dominance.sp",
            Status::Pass,
            format!("P(X >= Y) = {}, P(Y >= X) = {}: {pref}", d.x_over_y, d.y_over_x),
        )
        .with_data(json!({ "x_over_y": d.x_over_y.to_string(), "y_over_x": d.y_over_x.to_string(), "preference": pref })),
    ])
}
