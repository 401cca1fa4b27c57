//! Stochastic dominance, statistical preference and their lifts to finite
//! sets of distribution functions.

use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::copula::{lattice, merge_nodes, CopulaSpec};
use crate::grid::{Table1D, Table2D};
use crate::icopula::CopulaSet;
use crate::numerics::{rat, Rational};
use crate::pbox::PBox;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderError {
    #[error("distribution functions live on different grids")]
    GridMismatch,
    #[error("set extensions are numbered 1 to 6, got {0}")]
    Extension(u8),
    #[error("a set of distribution functions must be nonempty")]
    EmptySet,
    #[error("joint masses: {0}")]
    Joint(String),
}

/// `F_X <= F_Y` everywhere, read as "X stochastically dominates Y".
pub fn sd(f: &Table1D, g: &Table1D) -> Result<bool, OrderError> {
    f.pointwise_le(g).ok_or(OrderError::GridMismatch)
}

pub fn sd_bivariate(f: &Table2D, g: &Table2D) -> Result<bool, OrderError> {
    f.pointwise_le(g).ok_or(OrderError::GridMismatch)
}

/// A pmf of `(X, Y)` over outcome labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointPmf {
    xvalues: Vec<Rational>,
    yvalues: Vec<Rational>,
    masses: Vec<Vec<Rational>>,
}

impl JointPmf {
    pub fn new(xvalues: Vec<Rational>, yvalues: Vec<Rational>, masses: Vec<Vec<Rational>>) -> Result<Self, OrderError> {
        if masses.len() != xvalues.len() || masses.iter().any(|r| r.len() != yvalues.len()) {
            return Err(OrderError::Joint("shape does not match the value lists".into()));
        }
        if masses.iter().flatten().any(Signed::is_negative) {
            return Err(OrderError::Joint("negative mass".into()));
        }
        let total: Rational = masses.iter().flatten().sum();
        if !total.is_one() {
            return Err(OrderError::Joint(format!("masses sum to {total}")));
        }
        Ok(JointPmf {
            xvalues,
            yvalues,
            masses,
        })
    }

    /// Joint pmf with CDF `C(F_X(x), F_Y(y))` on the finite points of the
    /// two grids; both marginals must put all their mass on finite points.
    pub fn from_copula(fx: &Table1D, fy: &Table1D, c: &CopulaSpec) -> Result<Self, OrderError> {
        let finite = |t: &Table1D| -> Result<Vec<Rational>, OrderError> {
            let n = t.grid().len();
            if !t.value(n - 2).is_one() {
                return Err(OrderError::Joint("marginal has mass at +inf".into()));
            }
            Ok(t.grid().points()[1..n - 1]
                .iter()
                .map(|p| p.finite().expect("interior points are finite").clone())
                .collect())
        };
        let (xs, ys) = (finite(fx)?, finite(fy)?);
        let cdf = |i: usize, j: usize| -> Rational {
            if i == 0 || j == 0 {
                Rational::zero()
            } else {
                c.value(fx.value(i), fy.value(j))
            }
        };
        let masses = (1..=xs.len())
            .map(|i| {
                (1..=ys.len())
                    .map(|j| cdf(i, j) - cdf(i - 1, j) - cdf(i, j - 1) + cdf(i - 1, j - 1))
                    .collect()
            })
            .collect();
        JointPmf::new(xs, ys, masses)
    }

    pub fn prob(&self, pred: impl Fn(&Rational, &Rational) -> bool) -> Rational {
        let mut total = Rational::zero();
        for (i, x) in self.xvalues.iter().enumerate() {
            for (j, y) in self.yvalues.iter().enumerate() {
                if pred(x, y) {
                    total += &self.masses[i][j];
                }
            }
        }
        total
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preference {
    XPreferred,
    YPreferred,
    Indifferent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpOutcome {
    pub preference: Preference,
    /// `P(X >= Y)`.
    pub x_over_y: Rational,
    /// `P(Y >= X)`.
    pub y_over_x: Rational,
}

impl SpOutcome {
    /// Weak statistical preference of X over Y.
    pub fn x_weakly_preferred(&self) -> bool {
        self.x_over_y >= self.y_over_x
    }
}

pub fn sp(j: &JointPmf) -> SpOutcome {
    let x_over_y = j.prob(|x, y| x >= y);
    let y_over_x = j.prob(|x, y| y >= x);
    let preference = match x_over_y.cmp(&y_over_x) {
        std::cmp::Ordering::Greater => Preference::XPreferred,
        std::cmp::Ordering::Less => Preference::YPreferred,
        std::cmp::Ordering::Equal => Preference::Indifferent,
    };
    SpOutcome {
        preference,
        x_over_y,
        y_over_x,
    }
}

/// One of the six ways of lifting a relation on elements to sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Extension(u8);

impl Extension {
    pub fn new(i: u8) -> Result<Self, OrderError> {
        if (1..=6).contains(&i) {
            Ok(Extension(i))
        } else {
            Err(OrderError::Extension(i))
        }
    }

    pub fn all() -> impl Iterator<Item = Extension> {
        (1..=6).map(Extension)
    }

    pub fn index(&self) -> u8 {
        self.0
    }
}

impl fmt::Display for Extension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Quantifier patterns, with `r(a, b)` the base relation:
/// 1 all a, all b; 2 some a, all b; 3 all b, some a; 4 some a, some b;
/// 5 some b, all a; 6 all a, some b.
pub fn set_relation<A, B>(i: Extension, a: &[A], b: &[B], base: impl Fn(&A, &B) -> bool) -> bool {
    let r = &base;
    match i.0 {
        1 => a.iter().all(|x| b.iter().all(|y| r(x, y))),
        2 => a.iter().any(|x| b.iter().all(|y| r(x, y))),
        3 => b.iter().all(|y| a.iter().any(|x| r(x, y))),
        4 => a.iter().any(|x| b.iter().any(|y| r(x, y))),
        5 => b.iter().any(|y| a.iter().all(|x| r(x, y))),
        6 => a.iter().all(|x| b.iter().any(|y| r(x, y))),
        _ => unreachable!("extension index is validated"),
    }
}

/// A nonempty list of distribution functions on shared grids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DfSet<T> {
    members: Vec<T>,
}

impl DfSet<Table1D> {
    pub fn new(members: Vec<Table1D>) -> Result<Self, OrderError> {
        let first = members.first().ok_or(OrderError::EmptySet)?;
        if members.iter().any(|m| m.grid() != first.grid()) {
            return Err(OrderError::GridMismatch);
        }
        Ok(DfSet { members })
    }
}

impl DfSet<Table2D> {
    pub fn new(members: Vec<Table2D>) -> Result<Self, OrderError> {
        let first = members.first().ok_or(OrderError::EmptySet)?;
        if members.iter().any(|m| !m.same_grids(first)) {
            return Err(OrderError::GridMismatch);
        }
        Ok(DfSet { members })
    }
}

impl<T> DfSet<T> {
    pub fn members(&self) -> &[T] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// `FX <=_i FY` under the pointwise order: the i-th dominance of the first
/// random vector over the second.
pub fn i_sd(i: Extension, fx: &DfSet<Table2D>, fy: &DfSet<Table2D>) -> Result<bool, OrderError> {
    let (a, b) = (&fx.members[0], &fy.members[0]);
    if !a.same_grids(b) {
        return Err(OrderError::GridMismatch);
    }
    Ok(set_relation(i, &fx.members, &fy.members, |f, g| {
        f.pointwise_le(g).expect("grids checked")
    }))
}

/// Set relation between univariate p-boxes read through finite samples.
pub fn univariate_set_relation(i: Extension, a: &DfSet<Table1D>, b: &DfSet<Table1D>) -> Result<bool, OrderError> {
    if a.members[0].grid() != b.members[0].grid() {
        return Err(OrderError::GridMismatch);
    }
    Ok(set_relation(i, &a.members, &b.members, |f, g| {
        f.pointwise_le(g).expect("grids checked")
    }))
}

/// Seeded distribution functions inside `p`: the two bounds first, then
/// `extra` random monotone tables squeezed between them.
pub fn sample_pbox(p: &PBox, extra: usize, rng: &mut ChaCha8Rng) -> Vec<Table1D> {
    let mut out = vec![p.lower().clone()];
    if p.upper() != p.lower() {
        out.push(p.upper().clone());
    }
    let n = p.grid().len();
    for _ in 0..extra {
        let mut values = Vec::with_capacity(n);
        let mut prev = Rational::zero();
        for t in 0..n {
            let lo = p.lower().value(t).max(&prev).clone();
            let hi = p.upper().value(t).clone();
            let k = rng.gen_range(0..=4);
            let v = &lo + (&hi - &lo) * rat(k, 4);
            values.push(v.clone());
            prev = v;
        }
        let f = Table1D::new(p.grid().clone(), values).expect("sampled between two CDFs");
        if !out.contains(&f) {
            out.push(f);
        }
    }
    out
}

/// Pointwise `c <= d` at every node pair.
fn copula_le(c: &CopulaSpec, d: &CopulaSpec, nodes: &[Rational]) -> bool {
    nodes.iter().all(|u| nodes.iter().all(|v| c.value(u, v) <= d.value(u, v)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropLoReport {
    pub extension: Extension,
    pub first_marginal_premise: bool,
    pub second_marginal_premise: bool,
    pub copula_premise: bool,
    pub fx_size: usize,
    pub fy_size: usize,
    /// `None` when the premises are not established.
    pub conclusion: Option<bool>,
}

impl PropLoReport {
    pub fn premises_established(&self) -> bool {
        self.first_marginal_premise && self.second_marginal_premise && self.copula_premise
    }

    pub fn confirmed(&self) -> bool {
        self.conclusion == Some(true)
    }

    pub fn summary(&self) -> String {
        match self.conclusion {
            None => format!(
                "premises not established (marginals: {}, {}; copulas: {})",
                self.first_marginal_premise, self.second_marginal_premise, self.copula_premise
            ),
            Some(c) => format!(
                "premises hold; |F_X| = {}, |F_Y| = {}; conclusion {}",
                self.fx_size,
                self.fy_size,
                if c { "confirmed" } else { "refuted" }
            ),
        }
    }
}

/// Inputs of the harness: marginal p-boxes of both vectors and their
/// copula sets. `x1`, `y1` share a grid, as do `x2`, `y2`.
pub struct PropLoInput<'a> {
    pub x1: &'a PBox,
    pub x2: &'a PBox,
    pub y1: &'a PBox,
    pub y2: &'a PBox,
    pub cx: &'a CopulaSet,
    pub cy: &'a CopulaSet,
}

/// Materializes `F_X = {C(F1, F2)}` and `F_Y` from sampled marginals, checks
/// the premises on those samples and, if they hold, evaluates `F_X <=_i F_Y`.
///
/// Copulas are compared on the lattice of the given resolution joined with
/// every sampled marginal value, which covers all points where the
/// materialized tables evaluate them.
pub fn prop_lo_harness(
    input: &PropLoInput<'_>,
    i: Extension,
    samples: usize,
    resolution: usize,
    seed: u64,
) -> Result<PropLoReport, OrderError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sx1 = sample_pbox(input.x1, samples, &mut rng);
    let sx2 = sample_pbox(input.x2, samples, &mut rng);
    let sy1 = sample_pbox(input.y1, samples, &mut rng);
    let sy2 = sample_pbox(input.y2, samples, &mut rng);

    let (dx1, dy1) = (DfSet::<Table1D>::new(sx1.clone())?, DfSet::<Table1D>::new(sy1.clone())?);
    let (dx2, dy2) = (DfSet::<Table1D>::new(sx2.clone())?, DfSet::<Table1D>::new(sy2.clone())?);
    let first = univariate_set_relation(i, &dx1, &dy1)?;
    let second = univariate_set_relation(i, &dx2, &dy2)?;

    let base = lattice(resolution);
    let values: Vec<Rational> = [&sx1, &sx2, &sy1, &sy2]
        .into_iter()
        .flat_map(|s| s.iter().flat_map(|t| t.values().iter().cloned()))
        .collect();
    let nodes = merge_nodes([&base[..], &values[..]]);
    let copulas = set_relation(i, input.cx.members(), input.cy.members(), |c, d| copula_le(c, d, &nodes));

    let materialize = |cs: &CopulaSet, s1: &[Table1D], s2: &[Table1D]| {
        let mut out = Vec::new();
        for c in cs.members() {
            for f1 in s1 {
                for f2 in s2 {
                    let t = Table2D::from_fn(f1.grid().clone(), f2.grid().clone(), |a, b| {
                        c.value(f1.value(a), f2.value(b))
                    })
                    .expect("copula values lie in [0, 1]");
                    if !out.contains(&t) {
                        out.push(t);
                    }
                }
            }
        }
        DfSet::<Table2D>::new(out)
    };
    let fx = materialize(input.cx, &sx1, &sx2)?;
    let fy = materialize(input.cy, &sy1, &sy2)?;
    let established = first && second && copulas;
    let conclusion = if established { Some(i_sd(i, &fx, &fy)?) } else { None };
    Ok(PropLoReport {
        extension: i,
        first_marginal_premise: first,
        second_marginal_premise: second,
        copula_premise: copulas,
        fx_size: fx.len(),
        fy_size: fy.len(),
        conclusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combine::natural_extension;
    use crate::grid::Grid;
    use crate::numerics::{int, parse_rational};

    fn r(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn preference() -> JointPmf {
        let vals = vec![int(0), rat(1, 2), int(1)];
        let z = int(0);
        JointPmf::new(
            vals.clone(),
            vals,
            vec![
                vec![z.clone(), r("0.2"), z.clone()],
                vec![r("0.1"), z.clone(), r("0.1")],
                vec![r("0.1"), z, r("0.5")],
            ],
        )
        .unwrap()
    }

    #[test]
    fn preference_degrees() {
        let out = sp(&preference());
        assert_eq!(out.x_over_y, rat(7, 10));
        assert_eq!(out.y_over_x, rat(4, 5));
        assert_eq!(out.preference, Preference::YPreferred);
    }

    #[test]
    fn symmetric_joint_is_indifferent() {
        let vals = vec![int(0), int(1)];
        let j = JointPmf::new(
            vals.clone(),
            vals,
            vec![vec![rat(1, 8), rat(3, 8)], vec![rat(3, 8), rat(1, 8)]],
        )
        .unwrap();
        assert_eq!(sp(&j).preference, Preference::Indifferent);
    }

    #[test]
    fn shifted_uniform_dominates() {
        let g = Grid::with_interior([int(0), int(1), int(2)]).unwrap();
        let low = Table1D::new(g.clone(), vec![int(0), rat(1, 2), int(1), int(1), int(1)]).unwrap();
        let high = Table1D::new(g, vec![int(0), int(0), rat(1, 2), int(1), int(1)]).unwrap();
        assert!(sd(&high, &low).unwrap());
        assert!(!sd(&low, &high).unwrap());
        assert!(sd(&low, &low).unwrap());
    }

    #[test]
    fn singleton_sets_reduce_to_the_base() {
        for i in Extension::all() {
            assert!(set_relation(i, &[3], &[2], |a, b| a >= b));
            assert!(!set_relation(i, &[1], &[2], |a, b| a >= b));
        }
        assert_eq!(Extension::new(7), Err(OrderError::Extension(7)));
    }

    #[test]
    fn figure_style_configurations() {
        let ge = |a: &i32, b: &i32| a >= b;
        let e = |i| Extension::new(i).unwrap();
        // Every element of A above every element of B.
        assert!(set_relation(e(1), &[5, 6], &[1, 2], ge));
        // A best element a1 beats all of B, the other does not.
        assert!(set_relation(e(2), &[9, 0], &[1, 2], ge) && !set_relation(e(1), &[9, 0], &[1, 2], ge));
        // One comparable pair only.
        assert!(set_relation(e(4), &[3, 0], &[2, 5], ge) && !set_relation(e(3), &[3, 0], &[2, 5], ge));
        // A worst element of B sits below all of A.
        assert!(set_relation(e(5), &[3, 4], &[0, 9], ge) && !set_relation(e(2), &[3, 4], &[0, 9], ge));
    }

    fn uniform() -> Table1D {
        let g = Grid::with_interior([int(0), rat(1, 2), int(1)]).unwrap();
        Table1D::new(g, vec![int(0), int(0), rat(1, 2), int(1), int(1)]).unwrap()
    }

    #[test]
    fn bivariate_dominance_between_frechet_couplings() {
        let f = uniform();
        let p = PBox::precise(f.clone());
        let ne = natural_extension(&p, &p);
        assert!(sd_bivariate(ne.lower(), ne.upper()).unwrap());
        assert!(!sd_bivariate(ne.upper(), ne.lower()).unwrap());
    }

    #[test]
    fn uniform_example_blocks_the_first_extension() {
        let p = PBox::precise(uniform());
        let set = CopulaSet::new(vec![CopulaSpec::Lukasiewicz, CopulaSpec::Minimum], 4).unwrap();
        let input = PropLoInput {
            x1: &p,
            x2: &p,
            y1: &p,
            y2: &p,
            cx: &set,
            cy: &set,
        };
        let one = Extension::new(1).unwrap();
        let report = prop_lo_harness(&input, one, 0, 4, 1).unwrap();
        assert!(report.first_marginal_premise && report.second_marginal_premise);
        assert!(!report.copula_premise);
        assert_eq!(report.conclusion, None);
        let ne = natural_extension(&p, &p);
        let set2 = DfSet::<Table2D>::new(vec![ne.lower().clone(), ne.upper().clone()]).unwrap();
        assert!(!i_sd(one, &set2, &set2).unwrap());
        assert_eq!(ne.upper().value(2, 2), &rat(1, 2));
        assert_eq!(ne.lower().value(2, 2), &int(0));
        for i in 2..=6 {
            let report = prop_lo_harness(&input, Extension::new(i).unwrap(), 0, 4, 1).unwrap();
            assert!(report.confirmed(), "i = {i}: {}", report.summary());
        }
    }
}
