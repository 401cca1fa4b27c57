//! Coherent lower previsions on finite product spaces, represented by the
//! extreme points of their credal sets.

use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grid::{Grid, Table1D, Table2D};
use crate::numerics::{rat, solve_lp, Bounds, LinearProgram, LpOutcome, Rational, Relation, Sense};
use crate::pbox::{BiPBox, PBox};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CredalError {
    #[error("outcome labels must be nonempty and strictly increasing")]
    Labels,
    #[error("a lower prevision needs at least one vertex")]
    NoVertices,
    #[error("vertex {index} has the wrong shape")]
    Shape { index: usize },
    #[error("vertex {index} has a negative mass")]
    NegativeMass { index: usize },
    #[error("vertex {index} sums to {sum}, expected 1")]
    MassSum { index: usize, sum: String },
    #[error("gamble has the wrong shape")]
    GambleShape,
    #[error("label index {0} is out of range")]
    LabelIndex(usize),
}

fn increasing(labels: &[Rational]) -> bool {
    !labels.is_empty() && labels.windows(2).all(|w| w[0] < w[1])
}

fn check_pmf(index: usize, masses: &[Rational]) -> Result<(), CredalError> {
    if masses.iter().any(Signed::is_negative) {
        return Err(CredalError::NegativeMass { index });
    }
    let sum: Rational = masses.iter().sum();
    if !sum.is_one() {
        return Err(CredalError::MassSum {
            index,
            sum: sum.to_string(),
        });
    }
    Ok(())
}

fn dedup_in_order<T: PartialEq>(items: Vec<T>) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(items.len());
    for item in items {
        if !out.contains(&item) {
            out.push(item);
        }
    }
    out
}

fn dot(p: &[Rational], f: &[Rational]) -> Rational {
    p.iter().zip(f).map(|(a, b)| a * b).sum()
}

/// Ordered outcome labels of `X` and `Y`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteSpace {
    xlabels: Vec<Rational>,
    ylabels: Vec<Rational>,
}

impl FiniteSpace {
    pub fn new(xlabels: Vec<Rational>, ylabels: Vec<Rational>) -> Result<Self, CredalError> {
        if !increasing(&xlabels) || !increasing(&ylabels) {
            return Err(CredalError::Labels);
        }
        Ok(FiniteSpace { xlabels, ylabels })
    }

    pub fn xlabels(&self) -> &[Rational] {
        &self.xlabels
    }

    pub fn ylabels(&self) -> &[Rational] {
        &self.ylabels
    }

    pub fn nx(&self) -> usize {
        self.xlabels.len()
    }

    pub fn ny(&self) -> usize {
        self.ylabels.len()
    }

    /// Labels framed by the `-inf` and `+inf` sentinels.
    pub fn xgrid(&self) -> Grid {
        Grid::with_interior(self.xlabels.iter().cloned()).expect("labels are increasing")
    }

    pub fn ygrid(&self) -> Grid {
        Grid::with_interior(self.ylabels.iter().cloned()).expect("labels are increasing")
    }
}

/// A lower prevision on one finite space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalPrevision {
    labels: Vec<Rational>,
    vertices: Vec<Vec<Rational>>,
}

impl MarginalPrevision {
    pub fn new(labels: Vec<Rational>, vertices: Vec<Vec<Rational>>) -> Result<Self, CredalError> {
        if !increasing(&labels) {
            return Err(CredalError::Labels);
        }
        if vertices.is_empty() {
            return Err(CredalError::NoVertices);
        }
        for (index, v) in vertices.iter().enumerate() {
            if v.len() != labels.len() {
                return Err(CredalError::Shape { index });
            }
            check_pmf(index, v)?;
        }
        Ok(MarginalPrevision {
            labels,
            vertices: dedup_in_order(vertices),
        })
    }

    pub fn labels(&self) -> &[Rational] {
        &self.labels
    }

    pub fn vertices(&self) -> &[Vec<Rational>] {
        &self.vertices
    }

    pub fn is_precise(&self) -> bool {
        self.vertices.len() == 1
    }

    pub fn lower(&self, f: &[Rational]) -> Rational {
        assert_eq!(f.len(), self.labels.len(), "gamble shape");
        self.vertices.iter().map(|p| dot(p, f)).min().expect("nonempty")
    }

    pub fn upper(&self, f: &[Rational]) -> Rational {
        assert_eq!(f.len(), self.labels.len(), "gamble shape");
        self.vertices.iter().map(|p| dot(p, f)).max().expect("nonempty")
    }

    /// `F_lower(t) = P_lower(X <= t)`, `F_upper(t) = P_upper(X <= t)`.
    pub fn pbox(&self) -> PBox {
        let grid = Grid::with_interior(self.labels.iter().cloned()).expect("labels are increasing");
        let n = self.labels.len();
        let cdf = |upper: bool| {
            let mut values = vec![Rational::zero()];
            for t in 0..n {
                let ind: Vec<Rational> = (0..n).map(|i| indicator(i <= t)).collect();
                values.push(if upper { self.upper(&ind) } else { self.lower(&ind) });
            }
            values.push(Rational::one());
            Table1D::new(grid.clone(), values).expect("envelopes of CDFs are CDFs")
        };
        PBox::new(cdf(false), cdf(true)).expect("lower envelope below upper envelope")
    }
}

fn indicator(b: bool) -> Rational {
    if b {
        Rational::one()
    } else {
        Rational::zero()
    }
}

/// A real function on `X x Y`, stored as `values[x][y]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gamble {
    values: Vec<Vec<Rational>>,
}

impl Gamble {
    pub fn new(values: Vec<Vec<Rational>>) -> Self {
        Gamble { values }
    }

    pub fn from_fn(space: &FiniteSpace, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        Gamble {
            values: (0..space.nx()).map(|x| (0..space.ny()).map(|y| f(x, y)).collect()).collect(),
        }
    }

    pub fn constant(space: &FiniteSpace, c: Rational) -> Self {
        Gamble::from_fn(space, |_, _| c.clone())
    }

    /// Indicator of the quadrant `{(x', y') : x' <= x, y' <= y}` by label index.
    pub fn quadrant(space: &FiniteSpace, x: usize, y: usize) -> Self {
        Gamble::from_fn(space, |i, j| indicator(i <= x && j <= y))
    }

    /// `f(x) g(y)`.
    pub fn product(f: &[Rational], g: &[Rational]) -> Self {
        Gamble {
            values: f.iter().map(|a| g.iter().map(|b| a * b).collect()).collect(),
        }
    }

    pub fn values(&self) -> &[Vec<Rational>] {
        &self.values
    }

    pub fn value(&self, x: usize, y: usize) -> &Rational {
        &self.values[x][y]
    }

    fn fits(&self, space: &FiniteSpace) -> bool {
        self.values.len() == space.nx() && self.values.iter().all(|r| r.len() == space.ny())
    }

    fn flat(&self) -> Vec<Rational> {
        self.values.iter().flatten().cloned().collect()
    }

    fn negated(&self) -> Gamble {
        Gamble {
            values: self.values.iter().map(|r| r.iter().map(|v| -v).collect()).collect(),
        }
    }
}

/// A joint lower prevision given by the vertices of its credal set; each
/// vertex is stored flat in x-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowerPrevision {
    space: FiniteSpace,
    vertices: Vec<Vec<Rational>>,
}

impl LowerPrevision {
    /// `vertices[k]` is a pmf listed x-major: `(x0,y0), (x0,y1), ..., (x1,y0), ...`.
    pub fn new(space: FiniteSpace, vertices: Vec<Vec<Rational>>) -> Result<Self, CredalError> {
        if vertices.is_empty() {
            return Err(CredalError::NoVertices);
        }
        let cells = space.nx() * space.ny();
        for (index, v) in vertices.iter().enumerate() {
            if v.len() != cells {
                return Err(CredalError::Shape { index });
            }
            check_pmf(index, v)?;
        }
        Ok(LowerPrevision {
            space,
            vertices: dedup_in_order(vertices),
        })
    }

    pub fn precise(space: FiniteSpace, masses: Vec<Rational>) -> Result<Self, CredalError> {
        LowerPrevision::new(space, vec![masses])
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn vertices(&self) -> &[Vec<Rational>] {
        &self.vertices
    }

    pub fn mass(&self, vertex: usize, x: usize, y: usize) -> &Rational {
        &self.vertices[vertex][x * self.space.ny() + y]
    }
}

/// Minimum over the vertices of the expectation of `f`.
pub fn lower_prevision_of(lp: &LowerPrevision, f: &Gamble) -> Result<Rational, CredalError> {
    if !f.fits(&lp.space) {
        return Err(CredalError::GambleShape);
    }
    let flat = f.flat();
    Ok(lp.vertices.iter().map(|p| dot(p, &flat)).min().expect("nonempty"))
}

pub fn upper_prevision_of(lp: &LowerPrevision, f: &Gamble) -> Result<Rational, CredalError> {
    lower_prevision_of(lp, &f.negated()).map(|v| -v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Projection of every vertex onto one coordinate.
pub fn marginal(lp: &LowerPrevision, axis: Axis) -> MarginalPrevision {
    let (nx, ny) = (lp.space.nx(), lp.space.ny());
    let project = |p: &Vec<Rational>| -> Vec<Rational> {
        match axis {
            Axis::X => (0..nx).map(|x| p[x * ny..(x + 1) * ny].iter().sum()).collect(),
            Axis::Y => (0..ny).map(|y| (0..nx).map(|x| &p[x * ny + y]).sum()).collect(),
        }
    };
    let labels = match axis {
        Axis::X => lp.space.xlabels.clone(),
        Axis::Y => lp.space.ylabels.clone(),
    };
    MarginalPrevision::new(labels, lp.vertices.iter().map(project).collect()).expect("projections of pmfs are pmfs")
}

/// Lower prevision of the slice `f(., y)` under `mx`.
pub fn conditional_from_marginal(mx: &MarginalPrevision, f: &Gamble, y: usize) -> Result<Rational, CredalError> {
    if f.values.len() != mx.labels.len() {
        return Err(CredalError::GambleShape);
    }
    if f.values.iter().any(|r| y >= r.len()) {
        return Err(CredalError::LabelIndex(y));
    }
    let slice: Vec<Rational> = f.values.iter().map(|r| r[y].clone()).collect();
    Ok(mx.lower(&slice))
}

/// All products of a vertex of `mx` with a vertex of `my`, `mx`-major.
pub fn strong_product(mx: &MarginalPrevision, my: &MarginalPrevision) -> LowerPrevision {
    let space = FiniteSpace::new(mx.labels.clone(), my.labels.clone()).expect("marginal labels are increasing");
    let mut vertices = Vec::with_capacity(mx.vertices.len() * my.vertices.len());
    for p in &mx.vertices {
        for q in &my.vertices {
            vertices.push(p.iter().flat_map(|a| q.iter().map(move |b| a * b)).collect());
        }
    }
    LowerPrevision::new(space, vertices).expect("products of pmfs are pmfs")
}

/// `sup mu` such that `f - mu >= g - P_X(g | Y) + h - P_Y(h | X)` for some
/// gambles `g, h`, solved as one LP with
/// `m_y <= E_P g(., y)` for every vertex `P` of `mx` and
/// `n_x <= E_Q h(x, .)` for every vertex `Q` of `my`.
pub fn independent_natural_extension(
    mx: &MarginalPrevision,
    my: &MarginalPrevision,
    f: &Gamble,
) -> Result<Rational, CredalError> {
    let (nx, ny) = (mx.labels.len(), my.labels.len());
    if f.values.len() != nx || f.values.iter().any(|r| r.len() != ny) {
        return Err(CredalError::GambleShape);
    }
    let cells = nx * ny;
    let mu = 0;
    let g = |x: usize, y: usize| 1 + x * ny + y;
    let h = |x: usize, y: usize| 1 + cells + x * ny + y;
    let m = |y: usize| 1 + 2 * cells + y;
    let n = |x: usize| 1 + 2 * cells + ny + x;
    let vars = 1 + 2 * cells + nx + ny;

    let mut objective = vec![Rational::zero(); vars];
    objective[mu] = Rational::one();
    let mut lp = LinearProgram::new(objective, Sense::Maximize);
    for var in 0..vars {
        lp = lp.bounds(var, Bounds::free());
    }
    let row = |entries: &[(usize, Rational)]| {
        let mut c = vec![Rational::zero(); vars];
        for (i, v) in entries {
            c[*i] += v;
        }
        c
    };
    for p in &mx.vertices {
        for y in 0..ny {
            let mut entries = vec![(m(y), Rational::one())];
            entries.extend((0..nx).map(|x| (g(x, y), -p[x].clone())));
            lp = lp.constraint(row(&entries), Relation::Le, Rational::zero());
        }
    }
    for q in &my.vertices {
        for x in 0..nx {
            let mut entries = vec![(n(x), Rational::one())];
            entries.extend((0..ny).map(|y| (h(x, y), -q[y].clone())));
            lp = lp.constraint(row(&entries), Relation::Le, Rational::zero());
        }
    }
    let minus_one = -Rational::one();
    for x in 0..nx {
        for y in 0..ny {
            let entries = [
                (mu, Rational::one()),
                (g(x, y), Rational::one()),
                (m(y), minus_one.clone()),
                (h(x, y), Rational::one()),
                (n(x), minus_one.clone()),
            ];
            lp = lp.constraint(row(&entries), Relation::Le, f.values[x][y].clone());
        }
    }
    match solve_lp(&lp).expect("dimensions are consistent") {
        LpOutcome::Optimal { value, .. } => Ok(value),
        other => panic!("independent natural extension LP is feasible and bounded, got {other:?}"),
    }
}

/// Which factor is required to be nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorOrder {
    /// `P(f g) = P(f P(g))` with `f >= 0` on `X`.
    NonnegativeX,
    /// `P(f g) = P(g P(f))` with `g >= 0` on `Y`.
    NonnegativeY,
}

impl fmt::Display for FactorOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FactorOrder::NonnegativeX => "P(fg) = P(f P(g)), f >= 0",
            FactorOrder::NonnegativeY => "P(fg) = P(g P(f)), g >= 0",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProbeOutcome {
    /// No counterexample among `probes` pairs; evidence, not proof.
    NoViolation { probes: usize },
    Violation {
        f: Vec<Rational>,
        g: Vec<Rational>,
        order: FactorOrder,
        lhs: Rational,
        rhs: Rational,
        probe: usize,
    },
}

impl fmt::Display for ProbeOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[Rational]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
        match self {
            ProbeOutcome::NoViolation { probes } => write!(f, "{probes} probes, no factorisation failure"),
            ProbeOutcome::Violation {
                f: a,
                g,
                order,
                lhs,
                rhs,
                probe,
            } => write!(f, "probe {probe}: {order} fails for f = [{}], g = [{}]: {lhs} != {rhs}", list(a), list(g)),
        }
    }
}

impl ProbeOutcome {
    pub fn is_violation(&self) -> bool {
        matches!(self, ProbeOutcome::Violation { .. })
    }
}

/// Nonempty proper lower and upper sets of `0..n`, plus the whole space.
fn order_sets(n: usize) -> Vec<Vec<Rational>> {
    let mut out = Vec::new();
    for t in 0..n {
        out.push((0..n).map(|i| indicator(i <= t)).collect());
        if t > 0 {
            out.push((0..n).map(|i| indicator(i >= t)).collect());
        }
    }
    out
}

fn random_gamble(rng: &mut ChaCha8Rng, n: usize, nonnegative: bool) -> Vec<Rational> {
    let lo = if nonnegative { 0 } else { -10 };
    (0..n).map(|_| rat(rng.gen_range(lo..=10), rng.gen_range(1..=4))).collect()
}

/// Evaluates both factorisation identities on a fixed battery of indicator
/// pairs and then on `trials` seeded random pairs per identity.
pub fn factorising_probe(lp: &LowerPrevision, trials: usize, seed: u64) -> ProbeOutcome {
    let (nx, ny) = (lp.space.nx(), lp.space.ny());
    let eval = |f: &[Rational], g: &[Rational]| lower_prevision_of(lp, &Gamble::product(f, g)).expect("shape");
    let mut probe = 0usize;
    let mut test = |f: &[Rational], g: &[Rational], order: FactorOrder| -> Option<ProbeOutcome> {
        probe += 1;
        let lhs = eval(f, g);
        let rhs = match order {
            FactorOrder::NonnegativeX => {
                let ones_x = vec![Rational::one(); nx];
                let pg = eval(&ones_x, g);
                let scaled: Vec<Rational> = f.iter().map(|v| v * &pg).collect();
                eval(&scaled, &vec![Rational::one(); ny])
            }
            FactorOrder::NonnegativeY => {
                let ones_y = vec![Rational::one(); ny];
                let pf = eval(f, &ones_y);
                let scaled: Vec<Rational> = g.iter().map(|v| v * &pf).collect();
                eval(&vec![Rational::one(); nx], &scaled)
            }
        };
        (lhs != rhs).then(|| ProbeOutcome::Violation {
            f: f.to_vec(),
            g: g.to_vec(),
            order,
            lhs,
            rhs,
            probe,
        })
    };

    let (sets_x, sets_y) = (order_sets(nx), order_sets(ny));
    for a in &sets_x {
        for b in &sets_y {
            let minus_b: Vec<Rational> = b.iter().map(|v| -v).collect();
            let minus_a: Vec<Rational> = a.iter().map(|v| -v).collect();
            for (f, g, order) in [
                (a, b, FactorOrder::NonnegativeX),
                (a, &minus_b, FactorOrder::NonnegativeX),
                (a, b, FactorOrder::NonnegativeY),
                (&minus_a, b, FactorOrder::NonnegativeY),
            ] {
                if let Some(v) = test(f, g, order) {
                    return v;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let f = random_gamble(&mut rng, nx, true);
        let g = random_gamble(&mut rng, ny, false);
        if let Some(v) = test(&f, &g, FactorOrder::NonnegativeX) {
            return v;
        }
        let f = random_gamble(&mut rng, nx, false);
        let g = random_gamble(&mut rng, ny, true);
        if let Some(v) = test(&f, &g, FactorOrder::NonnegativeY) {
            return v;
        }
    }
    ProbeOutcome::NoViolation { probes: probe }
}

/// The bivariate p-box of quadrant lower and upper probabilities, on the
/// labels framed by sentinels.
pub fn pbox_of_lower_prevision(lp: &LowerPrevision) -> BiPBox {
    let space = &lp.space;
    let (nx, ny) = (space.nx(), space.ny());
    let table = |upper: bool| {
        Table2D::from_fn(space.xgrid(), space.ygrid(), |i, j| {
            if i == 0 || j == 0 {
                return Rational::zero();
            }
            let quadrant = Gamble::quadrant(space, (i - 1).min(nx - 1), (j - 1).min(ny - 1));
            if upper {
                upper_prevision_of(lp, &quadrant).expect("shape")
            } else {
                lower_prevision_of(lp, &quadrant).expect("shape")
            }
        })
        .expect("probabilities lie in [0, 1]")
    };
    BiPBox::new(table(false), table(true)).expect("quadrant envelopes form a p-box")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::int;

    fn binary() -> Vec<Rational> {
        vec![int(0), int(1)]
    }

    fn marginal_example() -> MarginalPrevision {
        MarginalPrevision::new(binary(), vec![vec![rat(1, 2), rat(1, 2)], vec![int(1), int(0)]]).unwrap()
    }

    fn mixture() -> LowerPrevision {
        let space = FiniteSpace::new(binary(), binary()).unwrap();
        let v = |a: (i64, i64), b: (i64, i64), c: (i64, i64), d: (i64, i64)| {
            vec![rat(a.0, a.1), rat(b.0, b.1), rat(c.0, c.1), rat(d.0, d.1)]
        };
        LowerPrevision::new(
            space,
            vec![
                v((3, 8), (1, 8), (3, 8), (1, 8)),
                v((3, 8), (3, 8), (1, 8), (1, 8)),
                v((1, 1), (0, 1), (0, 1), (0, 1)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn rejects_invalid_vertices() {
        let space = FiniteSpace::new(binary(), binary()).unwrap();
        assert_eq!(
            LowerPrevision::new(space.clone(), vec![vec![int(1); 4]]),
            Err(CredalError::MassSum {
                index: 0,
                sum: "4".into()
            })
        );
        assert_eq!(
            LowerPrevision::new(space, vec![vec![int(2), int(-1), int(0), int(0)]]),
            Err(CredalError::NegativeMass { index: 0 })
        );
        assert_eq!(FiniteSpace::new(vec![int(1), int(1)], binary()), Err(CredalError::Labels));
    }

    #[test]
    fn strong_product_vertices_and_corner() {
        let sp = strong_product(&marginal_example(), &marginal_example());
        let q = rat(1, 4);
        let h = rat(1, 2);
        let z = int(0);
        assert_eq!(
            sp.vertices(),
            &[
                vec![q.clone(), q.clone(), q.clone(), q],
                vec![h.clone(), z.clone(), h.clone(), z.clone()],
                vec![h.clone(), h, z.clone(), z.clone()],
                vec![int(1), z.clone(), z.clone(), z],
            ]
        );
        let corner = Gamble::quadrant(sp.space(), 0, 0);
        assert_eq!(lower_prevision_of(&sp, &corner).unwrap(), rat(1, 4));
        assert_eq!(lower_prevision_of(&mixture(), &corner).unwrap(), rat(3, 8));
    }

    #[test]
    fn marginals_of_both_products_agree() {
        let mx = marginal_example();
        let sp = strong_product(&mx, &mx);
        for lp in [&sp, &mixture()] {
            for axis in [Axis::X, Axis::Y] {
                let m = marginal(lp, axis);
                for f in order_sets(2) {
                    assert_eq!(m.lower(&f), mx.lower(&f));
                }
            }
        }
    }

    #[test]
    fn conditional_slice() {
        let space = FiniteSpace::new(binary(), binary()).unwrap();
        let f = Gamble::quadrant(&space, 0, 0);
        assert_eq!(conditional_from_marginal(&marginal_example(), &f, 0).unwrap(), rat(1, 2));
        let constant_in_x = Gamble::from_fn(&space, |_, y| int(y as i64 + 3));
        assert_eq!(conditional_from_marginal(&marginal_example(), &constant_in_x, 1).unwrap(), int(4));
    }

    #[test]
    fn probe_separates_the_two_products() {
        let mx = marginal_example();
        assert_eq!(factorising_probe(&strong_product(&mx, &mx), 50, 3), ProbeOutcome::NoViolation { probes: 4 * 9 + 100 });
        assert!(factorising_probe(&mixture(), 50, 3).is_violation());
    }

    #[test]
    fn independent_natural_extension_of_precise_marginals_is_the_product() {
        let p = MarginalPrevision::new(binary(), vec![vec![rat(1, 3), rat(2, 3)]]).unwrap();
        let q = MarginalPrevision::new(binary(), vec![vec![rat(3, 4), rat(1, 4)]]).unwrap();
        let space = FiniteSpace::new(binary(), binary()).unwrap();
        let f = Gamble::from_fn(&space, |x, y| int((x as i64 + 1) * (2 * y as i64 - 1)));
        let product = strong_product(&p, &q);
        assert_eq!(
            independent_natural_extension(&p, &q, &f).unwrap(),
            lower_prevision_of(&product, &f).unwrap()
        );
    }

    #[test]
    fn independent_natural_extension_on_quadrants() {
        let mx = marginal_example();
        let sp = strong_product(&mx, &mx);
        for x in 0..2 {
            for y in 0..2 {
                let f = Gamble::quadrant(sp.space(), x, y);
                assert_eq!(
                    independent_natural_extension(&mx, &mx, &f).unwrap(),
                    lower_prevision_of(&sp, &f).unwrap()
                );
            }
        }
    }

    #[test]
    fn induced_pboxes_differ_only_at_the_corner() {
        let mx = marginal_example();
        let a = pbox_of_lower_prevision(&strong_product(&mx, &mx));
        let b = pbox_of_lower_prevision(&mixture());
        let diff: Vec<(usize, usize)> = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .filter(|&(i, j)| a.lower().value(i, j) != b.lower().value(i, j) || a.upper().value(i, j) != b.upper().value(i, j))
            .collect();
        assert_eq!(diff, vec![(1, 1)]);
        assert_eq!(a.lower().value(1, 1), &rat(1, 4));
        assert_eq!(b.lower().value(1, 1), &rat(3, 8));
    }

    #[test]
    fn marginal_pbox() {
        let p = marginal_example().pbox();
        assert_eq!(p.lower().values(), &[int(0), rat(1, 2), int(1), int(1)]);
        assert_eq!(p.upper().values(), &[int(0), int(1), int(1), int(1)]);
    }
}
