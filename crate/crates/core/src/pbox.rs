//! Univariate and bivariate p-boxes, the lower probabilities they induce on
//! quadrant events, and the exact coherence oracle.
//!
//! The credal set of a bivariate p-box on a finite grid is the polytope of
//! pmfs `m` (mass on the cells `i, j >= 1`) whose CDF stays between the two
//! bounds. [`coherence_check`] and [`lp_envelopes`] optimize the CDF at each
//! grid point over that polytope.

use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::grid::{mixed_rectangle_slacks, ExtReal, Grid, GridError, StandardizationDefect, Table1D, Table2D};
use crate::numerics::{LpOutcome, PreparedRegion, Rational, Region, Relation, Sense};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PBoxError {
    #[error("lower and upper bounds live on different grids")]
    GridMismatch,
    #[error("lower bound exceeds upper bound at ({x}, {y})")]
    Crossing { x: usize, y: usize },
    #[error("{which} bound is not standardized: {defect}")]
    NotStandardized {
        which: &'static str,
        defect: StandardizationDefect,
    },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// A pair of univariate CDFs `lower <= upper` on one grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PBox {
    lower: Table1D,
    upper: Table1D,
}

impl PBox {
    pub fn new(lower: Table1D, upper: Table1D) -> Result<Self, PBoxError> {
        match lower.pointwise_le(&upper) {
            None => Err(PBoxError::GridMismatch),
            Some(false) => {
                let x = (0..lower.grid().len())
                    .find(|&i| lower.value(i) > upper.value(i))
                    .unwrap_or(0);
                Err(PBoxError::Crossing { x, y: 0 })
            }
            Some(true) => Ok(PBox { lower, upper }),
        }
    }

    pub fn precise(cdf: Table1D) -> Self {
        PBox {
            lower: cdf.clone(),
            upper: cdf,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.lower.grid()
    }

    pub fn lower(&self) -> &Table1D {
        &self.lower
    }

    pub fn upper(&self) -> &Table1D {
        &self.upper
    }

    pub fn is_precise(&self) -> bool {
        self.lower == self.upper
    }

    /// True iff `cdf` lies between the bounds.
    pub fn contains(&self, cdf: &Table1D) -> bool {
        self.lower.pointwise_le(cdf) == Some(true) && cdf.pointwise_le(&self.upper) == Some(true)
    }
}

/// A pair of standardized tables `lower <= upper` on a shared product grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiPBox {
    lower: Table2D,
    upper: Table2D,
}

impl BiPBox {
    pub fn new(lower: Table2D, upper: Table2D) -> Result<Self, PBoxError> {
        if !lower.same_grids(&upper) {
            return Err(PBoxError::GridMismatch);
        }
        if let Some(defect) = lower.standardization_defect() {
            return Err(PBoxError::NotStandardized { which: "lower", defect });
        }
        if let Some(defect) = upper.standardization_defect() {
            return Err(PBoxError::NotStandardized { which: "upper", defect });
        }
        if let Some((x, y)) = first_crossing(&lower, &upper) {
            return Err(PBoxError::Crossing { x, y });
        }
        Ok(BiPBox { lower, upper })
    }

    pub fn precise(cdf: Table2D) -> Result<Self, PBoxError> {
        BiPBox::new(cdf.clone(), cdf)
    }

    pub fn lower(&self) -> &Table2D {
        &self.lower
    }

    pub fn upper(&self) -> &Table2D {
        &self.upper
    }

    pub fn xgrid(&self) -> &Grid {
        self.lower.xgrid()
    }

    pub fn ygrid(&self) -> &Grid {
        self.lower.ygrid()
    }

    /// True iff `cdf` lies between the bounds at every grid point.
    pub fn contains(&self, cdf: &Table2D) -> bool {
        self.lower.pointwise_le(cdf) == Some(true) && cdf.pointwise_le(&self.upper) == Some(true)
    }
}

fn first_crossing(lower: &Table2D, upper: &Table2D) -> Option<(usize, usize)> {
    for i in 0..lower.xgrid().len() {
        for j in 0..lower.ygrid().len() {
            if lower.value(i, j) > upper.value(i, j) {
                return Some((i, j));
            }
        }
    }
    None
}

/// A quadrant `[-inf, x] x [-inf, y]` or its complement, by grid index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventRef {
    Quadrant { x: usize, y: usize },
    QuadrantComplement { x: usize, y: usize },
}

impl EventRef {
    pub fn indices(&self) -> (usize, usize) {
        match *self {
            EventRef::Quadrant { x, y } | EventRef::QuadrantComplement { x, y } => (x, y),
        }
    }

    pub fn complement(&self) -> EventRef {
        match *self {
            EventRef::Quadrant { x, y } => EventRef::QuadrantComplement { x, y },
            EventRef::QuadrantComplement { x, y } => EventRef::Quadrant { x, y },
        }
    }
}

impl fmt::Display for EventRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventRef::Quadrant { x, y } => write!(f, "A({x}, {y})"),
            EventRef::QuadrantComplement { x, y } => write!(f, "A^c({x}, {y})"),
        }
    }
}

/// A lower probability on every quadrant and quadrant complement of a grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventValues {
    xgrid: Grid,
    ygrid: Grid,
    quadrant: Vec<Vec<Rational>>,
    complement: Vec<Vec<Rational>>,
}

impl EventValues {
    pub fn new(
        xgrid: Grid,
        ygrid: Grid,
        quadrant: Vec<Vec<Rational>>,
        complement: Vec<Vec<Rational>>,
    ) -> Result<Self, GridError> {
        for table in [&quadrant, &complement] {
            if table.len() != xgrid.len() {
                return Err(GridError::Dimension {
                    expected: xgrid.len(),
                    found: table.len(),
                });
            }
            if let Some(row) = table.iter().find(|r| r.len() != ygrid.len()) {
                return Err(GridError::Dimension {
                    expected: ygrid.len(),
                    found: row.len(),
                });
            }
        }
        Ok(EventValues {
            xgrid,
            ygrid,
            quadrant,
            complement,
        })
    }

    pub fn xgrid(&self) -> &Grid {
        &self.xgrid
    }

    pub fn ygrid(&self) -> &Grid {
        &self.ygrid
    }

    pub fn get(&self, event: EventRef) -> &Rational {
        match event {
            EventRef::Quadrant { x, y } => &self.quadrant[x][y],
            EventRef::QuadrantComplement { x, y } => &self.complement[x][y],
        }
    }

    pub fn set(&mut self, event: EventRef, value: Rational) {
        match event {
            EventRef::Quadrant { x, y } => self.quadrant[x][y] = value,
            EventRef::QuadrantComplement { x, y } => self.complement[x][y] = value,
        }
    }

    pub fn events(&self) -> impl Iterator<Item = EventRef> + '_ {
        let m = self.ygrid.len();
        (0..self.xgrid.len()).flat_map(move |x| {
            (0..m).flat_map(move |y| [EventRef::Quadrant { x, y }, EventRef::QuadrantComplement { x, y }])
        })
    }
}

pub fn induced_lower_probability(b: &BiPBox, e: EventRef) -> Rational {
    match e {
        EventRef::Quadrant { x, y } => b.lower.value(x, y).clone(),
        EventRef::QuadrantComplement { x, y } => Rational::one() - b.upper.value(x, y),
    }
}

pub fn induced_values(b: &BiPBox) -> EventValues {
    let (n, m) = (b.xgrid().len(), b.ygrid().len());
    let quadrant = b.lower.values().to_vec();
    let complement = (0..n)
        .map(|x| (0..m).map(|y| Rational::one() - b.upper.value(x, y)).collect())
        .collect();
    EventValues {
        xgrid: b.xgrid().clone(),
        ygrid: b.ygrid().clone(),
        quadrant,
        complement,
    }
}

/// Everything that keeps an event assignment from defining a bivariate p-box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PBoxViolation {
    OutOfRange { event: EventRef },
    LowerNotStandardized(StandardizationDefect),
    UpperNotStandardized(StandardizationDefect),
    Crossing { x: usize, y: usize },
}

impl fmt::Display for PBoxViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PBoxViolation::OutOfRange { event } => write!(f, "value of {event} is outside [0, 1]"),
            PBoxViolation::LowerNotStandardized(d) => write!(f, "lower table: {d}"),
            PBoxViolation::UpperNotStandardized(d) => write!(f, "upper table: {d}"),
            PBoxViolation::Crossing { x, y } => write!(f, "upper below lower at ({x}, {y})"),
        }
    }
}

/// `F_lower(x, y) = P(A(x, y))`, `F_upper(x, y) = 1 - P(A^c(x, y))`.
pub fn pbox_of_lower_probability(values: &EventValues) -> Result<BiPBox, Vec<PBoxViolation>> {
    let unit = |v: &Rational| *v >= Rational::zero() && *v <= Rational::one();
    let mut violations: Vec<PBoxViolation> = values
        .events()
        .filter(|&e| !unit(values.get(e)))
        .map(|event| PBoxViolation::OutOfRange { event })
        .collect();
    if !violations.is_empty() {
        return Err(violations);
    }
    let (n, m) = (values.xgrid.len(), values.ygrid.len());
    let upper_values = (0..n)
        .map(|x| (0..m).map(|y| Rational::one() - &values.complement[x][y]).collect())
        .collect();
    let lower = Table2D::new(values.xgrid.clone(), values.ygrid.clone(), values.quadrant.clone())
        .expect("range already checked");
    let upper = Table2D::new(values.xgrid.clone(), values.ygrid.clone(), upper_values).expect("range already checked");
    if let Some(d) = lower.standardization_defect() {
        violations.push(PBoxViolation::LowerNotStandardized(d));
    }
    if let Some(d) = upper.standardization_defect() {
        violations.push(PBoxViolation::UpperNotStandardized(d));
    }
    if let Some((x, y)) = first_crossing(&lower, &upper) {
        violations.push(PBoxViolation::Crossing { x, y });
    }
    if violations.is_empty() {
        Ok(BiPBox { lower, upper })
    } else {
        Err(violations)
    }
}

/// A quadrant touching `-inf` is the empty event; its complement is sure.
fn is_null_quadrant(x: usize, y: usize) -> bool {
    x == 0 || y == 0
}

/// The first failure of monotonicity, normalisation or `P(E) + P(E^c) <= 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TwoCoherenceViolation {
    Normalisation { event: EventRef, expected: Rational },
    OutOfRange { event: EventRef },
    NotMonotone { smaller: EventRef, larger: EventRef },
    ComplementSum { event: EventRef, sum: Rational },
}

impl fmt::Display for TwoCoherenceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TwoCoherenceViolation::Normalisation { event, expected } => write!(f, "{event} must have value {expected}"),
            TwoCoherenceViolation::OutOfRange { event } => write!(f, "value of {event} is outside [0, 1]"),
            TwoCoherenceViolation::NotMonotone { smaller, larger } => {
                write!(f, "{smaller} is contained in {larger} but has the larger value")
            }
            TwoCoherenceViolation::ComplementSum { event, sum } => {
                write!(f, "{event} and its complement sum to {sum} > 1")
            }
        }
    }
}

pub fn two_coherence_violation(values: &EventValues) -> Option<TwoCoherenceViolation> {
    let (n, m) = (values.xgrid.len(), values.ygrid.len());
    let (top_x, top_y) = (n - 1, m - 1);
    let zero = Rational::zero();
    let one = Rational::one();

    for e in values.events() {
        let (x, y) = e.indices();
        let expected = match e {
            EventRef::Quadrant { .. } if is_null_quadrant(x, y) => Some(&zero),
            EventRef::QuadrantComplement { .. } if is_null_quadrant(x, y) => Some(&one),
            EventRef::Quadrant { .. } if (x, y) == (top_x, top_y) => Some(&one),
            EventRef::QuadrantComplement { .. } if (x, y) == (top_x, top_y) => Some(&zero),
            _ => None,
        };
        if let Some(expected) = expected {
            if values.get(e) != expected {
                return Some(TwoCoherenceViolation::Normalisation {
                    event: e,
                    expected: expected.clone(),
                });
            }
        }
        let v = values.get(e);
        if *v < zero || *v > one {
            return Some(TwoCoherenceViolation::OutOfRange { event: e });
        }
    }

    // Quadrants grow with (x, y); complements shrink.
    for x1 in 0..n {
        for y1 in 0..m {
            for x2 in x1..n {
                for y2 in y1..m {
                    let small = EventRef::Quadrant { x: x1, y: y1 };
                    let large = EventRef::Quadrant { x: x2, y: y2 };
                    if values.get(small) > values.get(large) {
                        return Some(TwoCoherenceViolation::NotMonotone {
                            smaller: small,
                            larger: large,
                        });
                    }
                    let small_c = EventRef::QuadrantComplement { x: x2, y: y2 };
                    let large_c = EventRef::QuadrantComplement { x: x1, y: y1 };
                    if values.get(small_c) > values.get(large_c) {
                        return Some(TwoCoherenceViolation::NotMonotone {
                            smaller: small_c,
                            larger: large_c,
                        });
                    }
                }
            }
        }
    }

    for x in 0..n {
        for y in 0..m {
            let e = EventRef::Quadrant { x, y };
            let sum = values.get(e) + values.get(e.complement());
            if sum > one {
                return Some(TwoCoherenceViolation::ComplementSum { event: e, sum });
            }
        }
    }
    None
}

pub fn is_two_coherent(values: &EventValues) -> bool {
    two_coherence_violation(values).is_none()
}

/// The four rectangle inequalities every coherent bivariate p-box obeys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NecessaryCondition {
    IRi1,
    IRi2,
    IRi3,
    IRi4,
}

impl fmt::Display for NecessaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NecessaryCondition::IRi1 => "I-RI1",
            NecessaryCondition::IRi2 => "I-RI2",
            NecessaryCondition::IRi3 => "I-RI3",
            NecessaryCondition::IRi4 => "I-RI4",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionViolation {
    pub condition: NecessaryCondition,
    pub x1: usize,
    pub x2: usize,
    pub y1: usize,
    pub y2: usize,
    /// The left-hand side of the `>= 0` inequality.
    pub slack: Rational,
}

impl fmt::Display for ConditionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} on x {}..{}, y {}..{}: {}",
            self.condition, self.x1, self.x2, self.y1, self.y2, self.slack
        )
    }
}

/// Scans all `x1 <= x2`, `y1 <= y2` for the four mixed rectangle
/// inequalities of [`mixed_rectangle_slacks`], with the lower table in the
/// `lo` role.
pub fn check_necessary_conditions(b: &BiPBox) -> Vec<ConditionViolation> {
    let (lo, up) = (b.lower.values(), b.upper.values());
    let (n, m) = (b.xgrid().len(), b.ygrid().len());
    let conditions = [
        NecessaryCondition::IRi1,
        NecessaryCondition::IRi2,
        NecessaryCondition::IRi3,
        NecessaryCondition::IRi4,
    ];
    let mut out = Vec::new();
    for x1 in 0..n {
        for x2 in x1..n {
            for y1 in 0..m {
                for y2 in y1..m {
                    let slacks = mixed_rectangle_slacks(lo, up, (x1, x2), (y1, y2));
                    for (condition, slack) in conditions.into_iter().zip(slacks) {
                        if slack < Rational::zero() {
                            out.push(ConditionViolation {
                                condition,
                                x1,
                                x2,
                                y1,
                                y2,
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

/// The pmf polytope `{m >= 0 : sum m = 1, lower <= cdf(m) <= upper}`.
///
/// Variables are the masses of cells `(i, j)` with `i, j >= 1`. Bounds that
/// hold for every pmf (`lower = 0`, `upper = 1`, the `-inf` boundary) add no
/// rows.
pub struct CredalPolytope {
    n: usize,
    m: usize,
    region: Region,
    prepared: PreparedRegion,
}

impl CredalPolytope {
    pub fn new(b: &BiPBox) -> Self {
        let (n, m) = (b.xgrid().len(), b.ygrid().len());
        let vars = (n - 1) * (m - 1);
        let mut region = Region::new(vars);
        region.add_constraint(vec![Rational::one(); vars], Relation::Eq, Rational::one());
        for x in 1..n {
            for y in 1..m {
                if (x, y) == (n - 1, m - 1) {
                    continue;
                }
                let lo = b.lower.value(x, y);
                let up = b.upper.value(x, y);
                if lo == up {
                    region.add_constraint(cdf_coefficients(n, m, x, y), Relation::Eq, lo.clone());
                    continue;
                }
                if !lo.is_zero() {
                    region.add_constraint(cdf_coefficients(n, m, x, y), Relation::Ge, lo.clone());
                }
                if !up.is_one() {
                    region.add_constraint(cdf_coefficients(n, m, x, y), Relation::Le, up.clone());
                }
            }
        }
        let prepared = region.prepare().expect("dimensions are consistent");
        CredalPolytope { n, m, region, prepared }
    }

    pub fn is_empty(&self) -> bool {
        !self.prepared.is_feasible()
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    /// Optimizes `cdf(m)(x, y)`; returns the value and an optimal pmf.
    pub fn optimize_cdf(&self, x: usize, y: usize, sense: Sense) -> Option<(Rational, Vec<Rational>)> {
        let objective = cdf_coefficients(self.n, self.m, x, y);
        match self.prepared.optimize(&objective, sense).expect("dimensions are consistent") {
            LpOutcome::Optimal { value, point } => Some((value, point)),
            LpOutcome::Infeasible => None,
            LpOutcome::Unbounded => unreachable!("the pmf simplex is bounded"),
        }
    }

    /// Full mass table (including the zero `-inf` row and column) of an LP point.
    pub fn masses_of(&self, point: &[Rational]) -> Vec<Vec<Rational>> {
        let mut out = vec![vec![Rational::zero(); self.m]; self.n];
        for i in 1..self.n {
            for j in 1..self.m {
                out[i][j] = point[(i - 1) * (self.m - 1) + (j - 1)].clone();
            }
        }
        out
    }

    fn cdf_of_point(&self, point: &[Rational]) -> Vec<Vec<Rational>> {
        let mut out = vec![vec![Rational::zero(); self.m]; self.n];
        for i in 1..self.n {
            let mut row = Rational::zero();
            for j in 1..self.m {
                row += &point[(i - 1) * (self.m - 1) + (j - 1)];
                out[i][j] = &out[i - 1][j] + &row;
            }
        }
        out
    }
}

fn cdf_coefficients(n: usize, m: usize, x: usize, y: usize) -> Vec<Rational> {
    let mut c = vec![Rational::zero(); (n - 1) * (m - 1)];
    for i in 1..=x {
        for j in 1..=y {
            c[(i - 1) * (m - 1) + (j - 1)] = Rational::one();
        }
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Lower => "lower",
            Side::Upper => "upper",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoherenceWitness {
    pub x: usize,
    pub y: usize,
    pub side: Side,
    /// LP optimum at the point; `None` when the credal set is empty.
    pub attained: Option<Rational>,
    /// The bound the optimum should have matched.
    pub bound: Rational,
}

impl CoherenceWitness {
    pub fn describe(&self, xgrid: &Grid, ygrid: &Grid) -> String {
        let attained = self
            .attained
            .as_ref()
            .map_or_else(|| "infeasible".to_string(), |v| v.to_string());
        format!(
            "{} bound at ({}, {}): bound {}, LP optimum {}",
            self.side,
            xgrid.point(self.x),
            ygrid.point(self.y),
            self.bound,
            attained
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoherenceOutcome {
    Coherent,
    Incoherent(CoherenceWitness),
}

impl CoherenceOutcome {
    pub fn is_coherent(&self) -> bool {
        matches!(self, CoherenceOutcome::Coherent)
    }
}

/// Decides whether both bounds are attained at every grid point by pmfs in
/// the credal set, scanning points in x-major order with the lower bound
/// first.
///
/// Since every member of the polytope already satisfies the bounds, a bound
/// is attained as soon as some feasible pmf touches it; each LP solution is
/// therefore reused to certify every other point it touches.
pub fn coherence_check(b: &BiPBox) -> CoherenceOutcome {
    let (n, m) = (b.xgrid().len(), b.ygrid().len());
    let polytope = CredalPolytope::new(b);
    if polytope.is_empty() {
        return CoherenceOutcome::Incoherent(CoherenceWitness {
            x: 0,
            y: 0,
            side: Side::Lower,
            attained: None,
            bound: b.lower.value(0, 0).clone(),
        });
    }
    let mut lower_done = vec![vec![false; m]; n];
    let mut upper_done = vec![vec![false; m]; n];
    for row in lower_done.iter_mut().chain(upper_done.iter_mut()) {
        row[0] = true;
    }
    lower_done[0].fill(true);
    upper_done[0].fill(true);
    lower_done[n - 1][m - 1] = true;
    upper_done[n - 1][m - 1] = true;

    let certify = |point: &[Rational], lower_done: &mut Vec<Vec<bool>>, upper_done: &mut Vec<Vec<bool>>| {
        let cdf = polytope.cdf_of_point(point);
        for i in 1..n {
            for j in 1..m {
                if cdf[i][j] == *b.lower.value(i, j) {
                    lower_done[i][j] = true;
                }
                if cdf[i][j] == *b.upper.value(i, j) {
                    upper_done[i][j] = true;
                }
            }
        }
    };

    for x in 0..n {
        for y in 0..m {
            for side in [Side::Lower, Side::Upper] {
                let (done, bound, sense) = match side {
                    Side::Lower => (&lower_done, b.lower.value(x, y), Sense::Minimize),
                    Side::Upper => (&upper_done, b.upper.value(x, y), Sense::Maximize),
                };
                if done[x][y] {
                    continue;
                }
                let (value, point) = polytope.optimize_cdf(x, y, sense).expect("polytope is nonempty");
                if value != *bound {
                    return CoherenceOutcome::Incoherent(CoherenceWitness {
                        x,
                        y,
                        side,
                        attained: Some(value),
                        bound: bound.clone(),
                    });
                }
                certify(&point, &mut lower_done, &mut upper_done);
            }
        }
    }
    CoherenceOutcome::Coherent
}

/// Lower and upper envelopes of the credal set, one LP per point and side.
/// `None` when the credal set is empty.
pub fn lp_envelopes(b: &BiPBox) -> Option<(Table2D, Table2D)> {
    let polytope = CredalPolytope::new(b);
    if polytope.is_empty() {
        return None;
    }
    let envelope = |sense| {
        Table2D::from_fn(b.xgrid().clone(), b.ygrid().clone(), |x, y| {
            polytope.optimize_cdf(x, y, sense).expect("polytope is nonempty").0
        })
        .expect("LP optima of CDFs lie in [0, 1]")
    };
    Some((envelope(Sense::Minimize), envelope(Sense::Maximize)))
}

/// True iff `F_lower <= cdf(pmf) <= F_upper`; `pmf` must be a valid mass table.
pub fn credal_contains(b: &BiPBox, masses: &[Vec<Rational>]) -> Result<bool, GridError> {
    let cdf = Table2D::cdf_of_pmf(b.xgrid().clone(), b.ygrid().clone(), masses)?;
    Ok(b.contains(&cdf))
}

/// `(F_lower(., +inf), F_upper(., +inf))` and the analogous Y pair.
pub fn marginals(b: &BiPBox) -> (PBox, PBox) {
    let marginal = |t: &Table2D, x_axis: bool| {
        if x_axis {
            Table1D::new(t.xgrid().clone(), t.x_marginal()).expect("standardized tables have CDF marginals")
        } else {
            Table1D::new(t.ygrid().clone(), t.y_marginal()).expect("standardized tables have CDF marginals")
        }
    };
    let px = PBox::new(marginal(&b.lower, true), marginal(&b.upper, true)).expect("ordered tables");
    let py = PBox::new(marginal(&b.lower, false), marginal(&b.upper, false)).expect("ordered tables");
    (px, py)
}

/// Renders a grid index pair as extended-real coordinates.
pub fn point_label(xgrid: &Grid, ygrid: &Grid, x: usize, y: usize) -> String {
    let show = |p: &ExtReal| p.to_string();
    format!("({}, {})", show(xgrid.point(x)), show(ygrid.point(y)))
}

/// Pointwise lower and upper envelopes of a nonempty family of CDF tables.
pub fn envelope_of_cdfs(cdfs: &[Table2D]) -> Result<BiPBox, PBoxError> {
    let first = cdfs.first().expect("at least one CDF");
    if cdfs.iter().any(|c| !c.same_grids(first)) {
        return Err(PBoxError::GridMismatch);
    }
    let (xg, yg) = (first.xgrid().clone(), first.ygrid().clone());
    let pick = |upper: bool| {
        Table2D::from_fn(xg.clone(), yg.clone(), |i, j| {
            let values = cdfs.iter().map(|c| c.value(i, j));
            if upper { values.max() } else { values.min() }.expect("nonempty").clone()
        })
    };
    BiPBox::new(pick(false)?, pick(true)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{int, rat};

    fn grid(points: &[i64]) -> Grid {
        Grid::with_interior(points.iter().map(|&p| int(p))).unwrap()
    }

    fn lukasiewicz(u: &Rational, v: &Rational) -> Rational {
        (u + v - Rational::one()).max(Rational::zero())
    }

    fn uniform3() -> Table1D {
        Table1D::new(grid(&[1, 2, 3]), vec![int(0), rat(1, 3), rat(2, 3), int(1), int(1)]).unwrap()
    }

    fn natural(fx: &Table1D, fy: &Table1D) -> BiPBox {
        let lower = Table2D::from_fn(fx.grid().clone(), fy.grid().clone(), |i, j| {
            lukasiewicz(fx.value(i), fy.value(j))
        })
        .unwrap();
        let upper = Table2D::from_fn(fx.grid().clone(), fy.grid().clone(), |i, j| {
            fx.value(i).min(fy.value(j)).clone()
        })
        .unwrap();
        BiPBox::new(lower, upper).unwrap()
    }

    #[test]
    fn induced_values_round_trip() {
        let b = natural(&uniform3(), &uniform3());
        let values = induced_values(&b);
        assert_eq!(induced_lower_probability(&b, EventRef::Quadrant { x: 4, y: 4 }), int(1));
        assert_eq!(
            induced_lower_probability(&b, EventRef::QuadrantComplement { x: 4, y: 4 }),
            int(0)
        );
        assert!(is_two_coherent(&values));
        assert_eq!(pbox_of_lower_probability(&values).unwrap(), b);
    }

    #[test]
    fn complement_sum_above_one_is_rejected() {
        let b = natural(&uniform3(), &uniform3());
        let mut values = induced_values(&b);
        let e = EventRef::Quadrant { x: 2, y: 2 };
        // Lower 1/3; complement raised so that the pair sums to 6/5.
        values.set(e.complement(), rat(13, 15));
        assert_eq!(values.get(e) + values.get(e.complement()), rat(6, 5));
        assert!(!is_two_coherent(&values));
        let diag = pbox_of_lower_probability(&values).unwrap_err();
        assert!(diag.iter().any(|v| matches!(v, PBoxViolation::Crossing { x: 2, y: 2 })));
    }

    #[test]
    fn empty_event_must_have_zero() {
        let b = natural(&uniform3(), &uniform3());
        let mut values = induced_values(&b);
        values.set(EventRef::Quadrant { x: 0, y: 3 }, rat(1, 10));
        assert!(matches!(
            two_coherence_violation(&values),
            Some(TwoCoherenceViolation::Normalisation { .. })
        ));
        assert!(!is_two_coherent(&values));
    }

    #[test]
    fn precise_box_is_coherent() {
        let fx = uniform3();
        let t = Table2D::from_fn(fx.grid().clone(), fx.grid().clone(), |i, j| fx.value(i) * fx.value(j)).unwrap();
        let b = BiPBox::precise(t).unwrap();
        assert!(check_necessary_conditions(&b).is_empty());
        assert_eq!(coherence_check(&b), CoherenceOutcome::Coherent);
    }

    #[test]
    fn natural_extension_envelopes_are_exact() {
        let b = natural(&uniform3(), &uniform3());
        assert!(check_necessary_conditions(&b).is_empty());
        assert!(coherence_check(&b).is_coherent());
        let (lo, up) = lp_envelopes(&b).unwrap();
        assert_eq!(&lo, b.lower());
        assert_eq!(&up, b.upper());
    }

    #[test]
    fn raised_lower_bound_is_caught() {
        let b = natural(&uniform3(), &uniform3());
        let mut lower = b.lower().values().to_vec();
        lower[2][2] = rat(2, 3);
        let raised = BiPBox::new(
            Table2D::new(b.xgrid().clone(), b.ygrid().clone(), lower).unwrap(),
            b.upper().clone(),
        )
        .unwrap();
        // F(2, 2) = 2/3 pins the whole first row inside y <= 2, so F(1, 2) = 1/3.
        let expected = CoherenceWitness {
            x: 1,
            y: 2,
            side: Side::Lower,
            attained: Some(rat(1, 3)),
            bound: int(0),
        };
        assert_eq!(coherence_check(&raised), CoherenceOutcome::Incoherent(expected));
    }

    #[test]
    fn raise_by_one_hundredth_surfaces_at_the_first_starved_point() {
        let b = natural(&uniform3(), &uniform3());
        let mut lower = b.lower().values().to_vec();
        lower[2][2] = rat(1, 3) + rat(1, 100);
        let raised = BiPBox::new(
            Table2D::new(b.xgrid().clone(), b.ygrid().clone(), lower).unwrap(),
            b.upper().clone(),
        )
        .unwrap();
        let (lo, _) = lp_envelopes(&raised).unwrap();
        // The raised bound is itself attained, so the failure shows up where
        // the extra 1/100 of mass has to come from: row 1 below y = 2.
        assert_eq!(lo.value(2, 2), &(rat(1, 3) + rat(1, 100)));
        assert_eq!(lo.value(1, 2), &rat(1, 100));
        let expected = CoherenceWitness {
            x: 1,
            y: 2,
            side: Side::Lower,
            attained: Some(rat(1, 100)),
            bound: int(0),
        };
        assert_eq!(coherence_check(&raised), CoherenceOutcome::Incoherent(expected));
    }

    #[test]
    fn non_two_increasing_degenerate_box_violates_every_condition() {
        let g = grid(&[1, 2]);
        let h = rat(1, 2);
        let values = vec![
            vec![int(0), int(0), int(0), int(0)],
            vec![int(0), int(0), h.clone(), h.clone()],
            vec![int(0), h.clone(), h.clone(), int(1)],
            vec![int(0), h.clone(), int(1), int(1)],
        ];
        let t = Table2D::new(g.clone(), g, values).unwrap();
        assert!(t.is_standardized());
        assert!(!t.is_two_increasing());
        let b = BiPBox::precise(t).unwrap();
        let violations = check_necessary_conditions(&b);
        for c in [
            NecessaryCondition::IRi1,
            NecessaryCondition::IRi2,
            NecessaryCondition::IRi3,
            NecessaryCondition::IRi4,
        ] {
            assert!(violations.iter().any(|v| v.condition == c), "{c} missing");
        }
        assert!(!coherence_check(&b).is_coherent());
    }

    #[test]
    fn marginals_of_natural_extension() {
        let fx = uniform3();
        let b = natural(&fx, &fx);
        let (px, py) = marginals(&b);
        assert!(px.is_precise() && py.is_precise());
        assert_eq!(px.lower(), &fx);
        assert_eq!(py.upper(), &fx);
    }
}
