//! Imprecise copulas: pairs `(lower, upper)` of unit-square functions with
//! copula margins whose mixed rectangle sums are nonnegative.
//!
//! Every check runs on a finite lattice, so a certificate is only as fine as
//! the resolution it records.

use std::fmt;

use num_traits::Signed;
use thiserror::Error;

use crate::copula::{
    lattice, lipschitz_on_nodes, lukasiewicz, merge_nodes, minimum, tabulate, validate_copula, CopulaSpec,
    CopulaViolation, GridCopula,
};
use crate::grid::mixed_rectangle_slacks;
use crate::numerics::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MixedCondition {
    Ci1,
    Ci2,
    Ci3,
    Ci4,
}

impl MixedCondition {
    pub const ALL: [MixedCondition; 4] = [
        MixedCondition::Ci1,
        MixedCondition::Ci2,
        MixedCondition::Ci3,
        MixedCondition::Ci4,
    ];
}

impl fmt::Display for MixedCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = MixedCondition::ALL.iter().position(|c| c == self).unwrap_or(0) + 1;
        write!(f, "CI-{i}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Lower,
    Upper,
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Component::Lower => "lower",
            Component::Upper => "upper",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImpreciseCopulaViolation {
    Boundary {
        component: Component,
        violation: CopulaViolation,
    },
    Mixed {
        condition: MixedCondition,
        u1: Rational,
        u2: Rational,
        v1: Rational,
        v2: Rational,
        slack: Rational,
    },
}

impl fmt::Display for ImpreciseCopulaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImpreciseCopulaViolation::Boundary { component, violation } => write!(f, "{component}: {violation}"),
            ImpreciseCopulaViolation::Mixed {
                condition,
                u1,
                u2,
                v1,
                v2,
                slack,
            } => write!(f, "{condition} on [{u1}, {u2}] x [{v1}, {v2}]: {slack}"),
        }
    }
}

fn boundary_only(c: &CopulaSpec, us: &[Rational], vs: &[Rational], component: Component) -> Vec<ImpreciseCopulaViolation> {
    crate::copula::validate_on_nodes(c, us, vs)
        .into_iter()
        .filter(|v| !matches!(v, CopulaViolation::NegativeVolume { .. }))
        .map(|violation| ImpreciseCopulaViolation::Boundary { component, violation })
        .collect()
}

fn nodes_for(lower: &CopulaSpec, upper: &CopulaSpec, resolution: usize) -> Vec<Rational> {
    let base = lattice(resolution);
    let mut lists: Vec<&[Rational]> = vec![&base];
    for c in [lower, upper] {
        if let CopulaSpec::GridTable(t) = c {
            lists.push(t.u_nodes());
            lists.push(t.v_nodes());
        }
    }
    merge_nodes(lists)
}

/// Boundary conditions at the nodes and CI-1..CI-4 on every node rectangle,
/// each inequality allowed a slack of `tolerance`.
pub fn check_imprecise_copula_with(
    lower: &CopulaSpec,
    upper: &CopulaSpec,
    resolution: usize,
    tolerance: &Rational,
) -> Vec<ImpreciseCopulaViolation> {
    let nodes = nodes_for(lower, upper, resolution);
    let mut out = boundary_only(lower, &nodes, &nodes, Component::Lower);
    out.extend(boundary_only(upper, &nodes, &nodes, Component::Upper));
    let lo = tabulate(lower, &nodes, &nodes);
    let up = tabulate(upper, &nodes, &nodes);
    let n = nodes.len();
    for a1 in 0..n {
        for a2 in a1..n {
            for b1 in 0..n {
                for b2 in b1..n {
                    let slacks = mixed_rectangle_slacks(&lo, &up, (a1, a2), (b1, b2));
                    for (condition, slack) in MixedCondition::ALL.into_iter().zip(slacks) {
                        if slack < -tolerance {
                            out.push(ImpreciseCopulaViolation::Mixed {
                                condition,
                                u1: nodes[a1].clone(),
                                u2: nodes[a2].clone(),
                                v1: nodes[b1].clone(),
                                v2: nodes[b2].clone(),
                                slack,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

/// [`check_imprecise_copula_with`] at the combined tolerance of the two
/// components.
pub fn check_imprecise_copula(lower: &CopulaSpec, upper: &CopulaSpec, resolution: usize) -> Vec<ImpreciseCopulaViolation> {
    let tol = lower.tolerance().max(upper.tolerance());
    check_imprecise_copula_with(lower, upper, resolution, &tol)
}

/// A pair that passed [`check_imprecise_copula_with`] at `resolution`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImpreciseCopula {
    lower: CopulaSpec,
    upper: CopulaSpec,
    resolution: usize,
    tolerance: Rational,
}

impl ImpreciseCopula {
    pub fn certify(
        lower: CopulaSpec,
        upper: CopulaSpec,
        resolution: usize,
    ) -> Result<Self, Vec<ImpreciseCopulaViolation>> {
        let tolerance = lower.tolerance().max(upper.tolerance());
        Self::certify_with(lower, upper, resolution, tolerance)
    }

    pub fn certify_with(
        lower: CopulaSpec,
        upper: CopulaSpec,
        resolution: usize,
        tolerance: Rational,
    ) -> Result<Self, Vec<ImpreciseCopulaViolation>> {
        let violations = check_imprecise_copula_with(&lower, &upper, resolution, &tolerance);
        if violations.is_empty() {
            Ok(ImpreciseCopula {
                lower,
                upper,
                resolution,
                tolerance,
            })
        } else {
            Err(violations)
        }
    }

    pub fn lower(&self) -> &CopulaSpec {
        &self.lower
    }

    pub fn upper(&self) -> &CopulaSpec {
        &self.upper
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn tolerance(&self) -> &Rational {
        &self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CopulaSetError {
    #[error("a copula set needs at least one member")]
    Empty,
    #[error("member {index} ({name}) is not a copula: {first}")]
    NotACopula { index: usize, name: String, first: String },
}

/// A nonempty finite family of validated copulas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopulaSet {
    members: Vec<CopulaSpec>,
}

impl CopulaSet {
    pub fn new(members: Vec<CopulaSpec>, resolution: usize) -> Result<Self, CopulaSetError> {
        if members.is_empty() {
            return Err(CopulaSetError::Empty);
        }
        for (index, c) in members.iter().enumerate() {
            if let Some(first) = validate_copula(c, resolution).first() {
                return Err(CopulaSetError::NotACopula {
                    index,
                    name: c.to_string(),
                    first: first.to_string(),
                });
            }
        }
        Ok(CopulaSet { members })
    }

    pub fn members(&self) -> &[CopulaSpec] {
        &self.members
    }

    pub fn tolerance(&self) -> Rational {
        self.members.iter().map(CopulaSpec::tolerance).max().expect("nonempty")
    }

    pub fn lower_value(&self, u: &Rational, v: &Rational) -> Rational {
        self.members.iter().map(|c| c.value(u, v)).min().expect("nonempty")
    }

    pub fn upper_value(&self, u: &Rational, v: &Rational) -> Rational {
        self.members.iter().map(|c| c.value(u, v)).max().expect("nonempty")
    }
}

/// Pointwise minimum and maximum over the members at the lattice nodes,
/// stored as node tables and certified.
///
/// # Panics
///
/// If certification fails: envelopes of copulas always satisfy the mixed
/// inequalities, so a failure means a bug in evaluation or checking.
pub fn envelope_of_set(s: &CopulaSet, resolution: usize) -> ImpreciseCopula {
    let mut lists: Vec<&[Rational]> = Vec::new();
    let base = lattice(resolution);
    lists.push(&base);
    for c in s.members() {
        if let CopulaSpec::GridTable(t) = c {
            lists.push(t.u_nodes());
            lists.push(t.v_nodes());
        }
    }
    let nodes = merge_nodes(lists);
    let table = |f: &dyn Fn(&Rational, &Rational) -> Rational| {
        CopulaSpec::GridTable(
            GridCopula::from_fn(nodes.clone(), nodes.clone(), |u, v| f(u, v)).expect("envelopes keep copula margins"),
        )
    };
    let lower = table(&|u, v| s.lower_value(u, v));
    let upper = table(&|u, v| s.upper_value(u, v));
    match ImpreciseCopula::certify_with(lower, upper, resolution, s.tolerance()) {
        Ok(ic) => ic,
        Err(v) => panic!("envelope of a copula set failed certification: {}", v[0]),
    }
}

/// Outcome of the derived-property battery for one certified pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatteryReport {
    pub resolution: usize,
    pub ordered: bool,
    pub lower_monotone: bool,
    pub upper_monotone: bool,
    pub lower_lipschitz: bool,
    pub upper_lipschitz: bool,
    pub frechet_sandwich: bool,
}

impl BatteryReport {
    pub fn is_clean(&self) -> bool {
        self.ordered
            && self.lower_monotone
            && self.upper_monotone
            && self.lower_lipschitz
            && self.upper_lipschitz
            && self.frechet_sandwich
    }

    pub fn failures(&self) -> Vec<&'static str> {
        [
            (self.ordered, "lower <= upper"),
            (self.lower_monotone, "lower componentwise nondecreasing"),
            (self.upper_monotone, "upper componentwise nondecreasing"),
            (self.lower_lipschitz, "lower Lipschitz"),
            (self.upper_lipschitz, "upper Lipschitz"),
            (self.frechet_sandwich, "C_L <= lower <= upper <= C_M"),
        ]
        .into_iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, name)| name)
        .collect()
    }
}

fn monotone(t: &[Vec<Rational>], tol: &Rational) -> bool {
    let n = t.len();
    (0..n).all(|a| {
        (0..t[a].len()).all(|b| {
            (a == 0 || t[a - 1][b] <= &t[a][b] + tol) && (b == 0 || t[a][b - 1] <= &t[a][b] + tol)
        })
    })
}

pub fn property_battery(ic: &ImpreciseCopula, resolution: usize) -> BatteryReport {
    let nodes = nodes_for(&ic.lower, &ic.upper, resolution);
    let tol = &ic.tolerance;
    let lo = tabulate(&ic.lower, &nodes, &nodes);
    let up = tabulate(&ic.upper, &nodes, &nodes);
    let mut ordered = true;
    let mut sandwich = true;
    for (a, u) in nodes.iter().enumerate() {
        for (b, v) in nodes.iter().enumerate() {
            ordered &= lo[a][b] <= &up[a][b] + tol;
            sandwich &= lukasiewicz(u, v) <= &lo[a][b] + tol && up[a][b] <= minimum(u, v) + tol;
        }
    }
    BatteryReport {
        resolution,
        ordered,
        lower_monotone: monotone(&lo, tol),
        upper_monotone: monotone(&up, tol),
        lower_lipschitz: lipschitz_on_nodes(&nodes, &nodes, &lo, tol),
        upper_lipschitz: lipschitz_on_nodes(&nodes, &nodes, &up, tol),
        frechet_sandwich: sandwich && !lo.iter().flatten().any(Signed::is_negative),
    }
}
