//! Dense two-phase simplex over exact rationals.
//!
//! Bland's rule is used for both the entering and the leaving variable, so
//! the method terminates on degenerate problems. There is no presolve and
//! no scaling: problems handled here have at most a few hundred columns.
//!
//! The feasible region and the objective are kept apart so that one phase-1
//! solve can be reused for many objectives over the same polytope, which is
//! how the coherence oracle queries every grid point.

use num_traits::{Signed, Zero};
use thiserror::Error;

use super::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coefficients: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// Per-variable bounds; `None` means unbounded in that direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

impl Bounds {
    pub fn nonnegative() -> Self {
        Bounds {
            lower: Some(Rational::zero()),
            upper: None,
        }
    }

    pub fn free() -> Self {
        Bounds {
            lower: None,
            upper: None,
        }
    }

    pub fn between(lower: Rational, upper: Rational) -> Self {
        Bounds {
            lower: Some(lower),
            upper: Some(upper),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("constraint {row} has {found} coefficients, expected {expected}")]
    ConstraintWidth {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("objective has {found} coefficients, expected {expected}")]
    ObjectiveWidth { found: usize, expected: usize },
    #[error("bounds given for {found} variables, expected {expected}")]
    BoundsWidth { found: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        value: Rational,
        point: Vec<Rational>,
    },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

/// Constraints plus variable bounds: the polytope an LP optimizes over.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    num_vars: usize,
    constraints: Vec<Constraint>,
    bounds: Vec<Bounds>,
}

impl Region {
    /// A region over `num_vars` nonnegative variables with no constraints.
    pub fn new(num_vars: usize) -> Self {
        Region {
            num_vars,
            constraints: Vec::new(),
            bounds: vec![Bounds::nonnegative(); num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn bounds(&self) -> &[Bounds] {
        &self.bounds
    }

    pub fn add_constraint(&mut self, coefficients: Vec<Rational>, relation: Relation, rhs: Rational) {
        self.constraints.push(Constraint {
            coefficients,
            relation,
            rhs,
        });
    }

    pub fn set_bounds(&mut self, var: usize, bounds: Bounds) {
        self.bounds[var] = bounds;
    }

    pub fn with_bounds(mut self, bounds: Vec<Bounds>) -> Self {
        self.bounds = bounds;
        self
    }

    fn validate(&self) -> Result<(), LpError> {
        if self.bounds.len() != self.num_vars {
            return Err(LpError::BoundsWidth {
                found: self.bounds.len(),
                expected: self.num_vars,
            });
        }
        for (row, c) in self.constraints.iter().enumerate() {
            if c.coefficients.len() != self.num_vars {
                return Err(LpError::ConstraintWidth {
                    row,
                    found: c.coefficients.len(),
                    expected: self.num_vars,
                });
            }
        }
        Ok(())
    }

    /// Runs phase 1. The returned solver answers any number of objectives.
    pub fn prepare(&self) -> Result<PreparedRegion, LpError> {
        self.validate()?;
        let std = StandardForm::build(self);
        let tableau = std.feasible_tableau();
        Ok(PreparedRegion {
            num_vars: self.num_vars,
            std,
            tableau,
        })
    }

    /// Checks every constraint and bound at `point`, exactly.
    pub fn contains(&self, point: &[Rational]) -> bool {
        if point.len() != self.num_vars {
            return false;
        }
        let bounds_ok = self.bounds.iter().zip(point).all(|(b, x)| {
            b.lower.as_ref().is_none_or(|l| x >= l) && b.upper.as_ref().is_none_or(|u| x <= u)
        });
        bounds_ok
            && self.constraints.iter().all(|c| {
                let lhs: Rational = c.coefficients.iter().zip(point).map(|(a, x)| a * x).sum();
                match c.relation {
                    Relation::Le => lhs <= c.rhs,
                    Relation::Eq => lhs == c.rhs,
                    Relation::Ge => lhs >= c.rhs,
                }
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<Rational>,
    pub sense: Sense,
    pub region: Region,
}

impl LinearProgram {
    pub fn new(objective: Vec<Rational>, sense: Sense) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            sense,
            region: Region::new(n),
        }
    }

    pub fn constraint(mut self, coefficients: Vec<Rational>, relation: Relation, rhs: Rational) -> Self {
        self.region.add_constraint(coefficients, relation, rhs);
        self
    }

    pub fn bounds(mut self, var: usize, bounds: Bounds) -> Self {
        self.region.set_bounds(var, bounds);
        self
    }
}

/// Solves one LP exactly.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome, LpError> {
    let prepared = lp.region.prepare()?;
    prepared.optimize(&lp.objective, lp.sense)
}

/// How an original variable is expressed through nonnegative columns.
#[derive(Debug, Clone)]
enum VarMap {
    /// x = offset + y
    Shifted { column: usize, offset: Rational },
    /// x = offset - y
    Mirrored { column: usize, offset: Rational },
    /// x = y_plus - y_minus
    Split { plus: usize, minus: usize },
}

#[derive(Debug, Clone)]
struct StandardForm {
    var_maps: Vec<VarMap>,
    num_columns: usize,
    rows: Vec<(Vec<Rational>, Relation, Rational)>,
    infeasible_bounds: bool,
}

impl StandardForm {
    fn build(region: &Region) -> Self {
        let mut var_maps = Vec::with_capacity(region.num_vars);
        let mut num_columns = 0;
        let mut bound_rows: Vec<(usize, Rational)> = Vec::new();
        let mut infeasible_bounds = false;
        for b in &region.bounds {
            let map = match (&b.lower, &b.upper) {
                (Some(l), upper) => {
                    let column = num_columns;
                    num_columns += 1;
                    if let Some(u) = upper {
                        if u < l {
                            infeasible_bounds = true;
                        }
                        bound_rows.push((column, u - l));
                    }
                    VarMap::Shifted {
                        column,
                        offset: l.clone(),
                    }
                }
                (None, Some(u)) => {
                    let column = num_columns;
                    num_columns += 1;
                    VarMap::Mirrored {
                        column,
                        offset: u.clone(),
                    }
                }
                (None, None) => {
                    let plus = num_columns;
                    num_columns += 2;
                    VarMap::Split {
                        plus,
                        minus: plus + 1,
                    }
                }
            };
            var_maps.push(map);
        }

        let mut rows = Vec::with_capacity(region.constraints.len() + bound_rows.len());
        for c in &region.constraints {
            let mut coeffs = vec![Rational::zero(); num_columns];
            let mut rhs = c.rhs.clone();
            for (a, map) in c.coefficients.iter().zip(&var_maps) {
                if a.is_zero() {
                    continue;
                }
                match map {
                    VarMap::Shifted { column, offset } => {
                        coeffs[*column] += a;
                        rhs -= a * offset;
                    }
                    VarMap::Mirrored { column, offset } => {
                        coeffs[*column] -= a;
                        rhs -= a * offset;
                    }
                    VarMap::Split { plus, minus } => {
                        coeffs[*plus] += a;
                        coeffs[*minus] -= a;
                    }
                }
            }
            rows.push((coeffs, c.relation, rhs));
        }
        for (column, width) in bound_rows {
            let mut coeffs = vec![Rational::zero(); num_columns];
            coeffs[column] = Rational::from_integer(1.into());
            rows.push((coeffs, Relation::Le, width));
        }
        StandardForm {
            var_maps,
            num_columns,
            rows,
            infeasible_bounds,
        }
    }

    /// Objective over standard columns plus the constant term.
    fn map_objective(&self, objective: &[Rational]) -> (Vec<Rational>, Rational) {
        let mut costs = vec![Rational::zero(); self.num_columns];
        let mut constant = Rational::zero();
        for (c, map) in objective.iter().zip(&self.var_maps) {
            if c.is_zero() {
                continue;
            }
            match map {
                VarMap::Shifted { column, offset } => {
                    costs[*column] += c;
                    constant += c * offset;
                }
                VarMap::Mirrored { column, offset } => {
                    costs[*column] -= c;
                    constant += c * offset;
                }
                VarMap::Split { plus, minus } => {
                    costs[*plus] += c;
                    costs[*minus] -= c;
                }
            }
        }
        (costs, constant)
    }

    fn recover_point(&self, columns: &[Rational]) -> Vec<Rational> {
        self.var_maps
            .iter()
            .map(|map| match map {
                VarMap::Shifted { column, offset } => offset + &columns[*column],
                VarMap::Mirrored { column, offset } => offset - &columns[*column],
                VarMap::Split { plus, minus } => &columns[*plus] - &columns[*minus],
            })
            .collect()
    }

    /// Phase 1: a feasible basis over structural and slack columns, or
    /// `None` when the region is empty.
    fn feasible_tableau(&self) -> Option<Tableau> {
        if self.infeasible_bounds {
            return None;
        }
        let m = self.rows.len();
        let mut num_slack = 0;
        let mut num_art = 0;
        for (_, rel, rhs) in &self.rows {
            let flipped = rhs.is_negative();
            match effective_relation(*rel, flipped) {
                Relation::Le => num_slack += 1,
                Relation::Ge => {
                    num_slack += 1;
                    num_art += 1;
                }
                Relation::Eq => num_art += 1,
            }
        }
        let n_struct = self.num_columns;
        let n_real = n_struct + num_slack;
        let width = n_real + num_art;

        let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(m);
        let mut rhs_col: Vec<Rational> = Vec::with_capacity(m);
        let mut basis: Vec<usize> = Vec::with_capacity(m);
        let mut next_slack = n_struct;
        let mut next_art = n_real;
        let one = Rational::from_integer(1.into());
        for (coeffs, rel, rhs) in &self.rows {
            let flipped = rhs.is_negative();
            let mut row = vec![Rational::zero(); width];
            for (j, a) in coeffs.iter().enumerate() {
                if !a.is_zero() {
                    row[j] = if flipped { -a } else { a.clone() };
                }
            }
            let b = if flipped { -rhs } else { rhs.clone() };
            match effective_relation(*rel, flipped) {
                Relation::Le => {
                    row[next_slack] = one.clone();
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -one.clone();
                    next_slack += 1;
                    row[next_art] = one.clone();
                    basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = one.clone();
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            rows.push(row);
            rhs_col.push(b);
        }

        let mut tableau = Tableau {
            rows,
            rhs: rhs_col,
            basis,
            allowed: width,
            cost: Vec::new(),
            cost_rhs: Rational::zero(),
        };

        if num_art > 0 {
            let mut costs = vec![Rational::zero(); width];
            for c in costs.iter_mut().skip(n_real) {
                *c = one.clone();
            }
            tableau.load_costs(&costs);
            match tableau.run() {
                PivotResult::Optimal => {}
                PivotResult::Unbounded => unreachable!("phase 1 objective is bounded below by 0"),
            }
            if !tableau.objective_value().is_zero() {
                return None;
            }
            tableau.evict_artificials(n_real);
        }
        tableau.truncate_columns(n_real);
        Some(tableau)
    }
}

fn effective_relation(rel: Relation, flipped: bool) -> Relation {
    match (rel, flipped) {
        (Relation::Le, true) => Relation::Ge,
        (Relation::Ge, true) => Relation::Le,
        (r, _) => r,
    }
}

enum PivotResult {
    Optimal,
    Unbounded,
}

/// Dense tableau in canonical form; the cost row holds reduced costs of a
/// minimization with `cost_rhs = -objective`.
#[derive(Debug, Clone)]
struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Columns with index >= allowed never enter the basis.
    allowed: usize,
    cost: Vec<Rational>,
    cost_rhs: Rational,
}

impl Tableau {
    fn width(&self) -> usize {
        self.rows.first().map_or(self.allowed, Vec::len)
    }

    fn load_costs(&mut self, costs: &[Rational]) {
        let mut cost = costs.to_vec();
        cost.resize(self.width(), Rational::zero());
        let mut cost_rhs = Rational::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &costs.get(b).cloned().unwrap_or_else(Rational::zero);
            if cb.is_zero() {
                continue;
            }
            for (j, a) in self.rows[i].iter().enumerate() {
                if !a.is_zero() {
                    cost[j] -= cb * a;
                }
            }
            cost_rhs -= cb * &self.rhs[i];
        }
        self.cost = cost;
        self.cost_rhs = cost_rhs;
    }

    fn objective_value(&self) -> Rational {
        -self.cost_rhs.clone()
    }

    fn run(&mut self) -> PivotResult {
        loop {
            // Bland: lowest-index column with negative reduced cost.
            let entering = (0..self.allowed).find(|&j| self.cost[j].is_negative());
            let Some(col) = entering else {
                return PivotResult::Optimal;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((row, _)) = best else {
                return PivotResult::Unbounded;
            };
            self.pivot(row, col);
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let pivot = self.rows[row][col].clone();
        if pivot != Rational::from_integer(1.into()) {
            for a in self.rows[row].iter_mut() {
                if !a.is_zero() {
                    *a /= &pivot;
                }
            }
            self.rhs[row] /= &pivot;
        }
        let pivot_row = std::mem::take(&mut self.rows[row]);
        let pivot_rhs = self.rhs[row].clone();
        let support: Vec<usize> = pivot_row
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(j, _)| j)
            .collect();

        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let factor = r[col].clone();
            if factor.is_zero() {
                continue;
            }
            for &j in &support {
                r[j] -= &factor * &pivot_row[j];
            }
            self.rhs[i] -= &factor * &pivot_rhs;
        }
        let factor = self.cost[col].clone();
        if !factor.is_zero() {
            for &j in &support {
                self.cost[j] -= &factor * &pivot_row[j];
            }
            self.cost_rhs -= &factor * &pivot_rhs;
        }
        self.rows[row] = pivot_row;
        self.basis[row] = col;
    }

    /// Pivots basic artificial columns (all at level zero) out of the basis;
    /// rows where that is impossible are redundant and dropped.
    fn evict_artificials(&mut self, first_artificial: usize) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] < first_artificial {
                i += 1;
                continue;
            }
            match (0..first_artificial).find(|&j| !self.rows[i][j].is_zero()) {
                Some(col) => {
                    self.pivot(i, col);
                    i += 1;
                }
                None => {
                    self.rows.remove(i);
                    self.rhs.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }

    fn truncate_columns(&mut self, keep: usize) {
        for r in &mut self.rows {
            r.truncate(keep);
        }
        self.allowed = keep;
        self.cost.clear();
        self.cost_rhs = Rational::zero();
    }

    fn column_values(&self, num_columns: usize) -> Vec<Rational> {
        let mut values = vec![Rational::zero(); num_columns];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < num_columns {
                values[b] = self.rhs[i].clone();
            }
        }
        values
    }
}

/// A region after phase 1, ready to optimize objectives.
#[derive(Debug, Clone)]
pub struct PreparedRegion {
    num_vars: usize,
    std: StandardForm,
    tableau: Option<Tableau>,
}

impl PreparedRegion {
    pub fn is_feasible(&self) -> bool {
        self.tableau.is_some()
    }

    pub fn optimize(&self, objective: &[Rational], sense: Sense) -> Result<LpOutcome, LpError> {
        if objective.len() != self.num_vars {
            return Err(LpError::ObjectiveWidth {
                found: objective.len(),
                expected: self.num_vars,
            });
        }
        let Some(start) = &self.tableau else {
            return Ok(LpOutcome::Infeasible);
        };
        let (mut costs, constant) = self.std.map_objective(objective);
        if sense == Sense::Maximize {
            for c in &mut costs {
                *c = -c.clone();
            }
        }
        let mut tableau = start.clone();
        tableau.load_costs(&costs);
        match tableau.run() {
            PivotResult::Unbounded => Ok(LpOutcome::Unbounded),
            PivotResult::Optimal => {
                let columns = tableau.column_values(self.std.num_columns);
                let point = self.std.recover_point(&columns);
                let value: Rational = objective.iter().zip(&point).map(|(c, x)| c * x).sum();
                debug_assert_eq!(
                    value,
                    match sense {
                        Sense::Minimize => tableau.objective_value() + &constant,
                        Sense::Maximize => -tableau.objective_value() + &constant,
                    }
                );
                Ok(LpOutcome::Optimal { value, point })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rational::{int, rat};

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn single_bound() {
        let lp = LinearProgram::new(v(&[1]), Sense::Maximize).constraint(v(&[1]), Relation::Le, int(1));
        assert_eq!(
            solve_lp(&lp).unwrap(),
            LpOutcome::Optimal {
                value: int(1),
                point: v(&[1])
            }
        );
    }

    #[test]
    fn unbounded_ray() {
        let lp = LinearProgram::new(v(&[1]), Sense::Maximize);
        assert_eq!(solve_lp(&lp).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn infeasible_system() {
        let lp = LinearProgram::new(v(&[1, 1]), Sense::Minimize)
            .constraint(v(&[1, 1]), Relation::Ge, int(3))
            .constraint(v(&[1, 1]), Relation::Le, int(2));
        assert_eq!(solve_lp(&lp).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let lp = LinearProgram::new(v(&[1, 1]), Sense::Minimize).constraint(v(&[1]), Relation::Ge, int(3));
        assert!(matches!(solve_lp(&lp), Err(LpError::ConstraintWidth { row: 0, .. })));
    }

    /// Masses p00, p01, p10, p11 with both marginals (1/2, 1/2).
    fn two_by_two(objective: Vec<Rational>, sense: Sense) -> LinearProgram {
        let half = rat(1, 2);
        LinearProgram::new(objective, sense)
            .constraint(v(&[1, 1, 0, 0]), Relation::Eq, half.clone())
            .constraint(v(&[0, 0, 1, 1]), Relation::Eq, half.clone())
            .constraint(v(&[1, 0, 1, 0]), Relation::Eq, half.clone())
            .constraint(v(&[0, 1, 0, 1]), Relation::Eq, half)
    }

    #[test]
    fn transportation_polytope_minimum_is_countermonotone() {
        // Extreme pmfs of this polytope are (1/2,0,0,1/2) and (0,1/2,1/2,0).
        let lp = two_by_two(v(&[1, 0, 0, 0]), Sense::Minimize);
        match solve_lp(&lp).unwrap() {
            LpOutcome::Optimal { value, point } => {
                assert_eq!(value, int(0));
                assert_eq!(point, vec![int(0), rat(1, 2), rat(1, 2), int(0)]);
                assert!(lp.region.contains(&point));
            }
            other => panic!("unexpected {other:?}"),
        }
        let lp = two_by_two(v(&[1, 0, 0, 0]), Sense::Maximize);
        assert_eq!(solve_lp(&lp).unwrap().value(), Some(&rat(1, 2)));
    }

    #[test]
    fn free_and_bounded_variables() {
        // max x - y  with x in [-1, 2], y free, y >= x - 5/2, y >= -x
        let lp = LinearProgram::new(v(&[1, -1]), Sense::Maximize)
            .bounds(0, Bounds::between(int(-1), int(2)))
            .bounds(1, Bounds::free())
            .constraint(v(&[-1, 1]), Relation::Ge, rat(-5, 2))
            .constraint(v(&[1, 1]), Relation::Ge, int(0));
        let out = solve_lp(&lp).unwrap();
        // y >= max(x - 5/2, -x); x - y maximal at x = 2, y = -1/2 giving 5/2.
        assert_eq!(out.value(), Some(&rat(5, 2)));
        if let LpOutcome::Optimal { point, .. } = out {
            assert!(lp.region.contains(&point));
        }
    }

    #[test]
    fn upper_only_bound() {
        let lp = LinearProgram::new(v(&[1]), Sense::Maximize).bounds(
            0,
            Bounds {
                lower: None,
                upper: Some(rat(7, 3)),
            },
        );
        assert_eq!(solve_lp(&lp).unwrap().value(), Some(&rat(7, 3)));
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's classic cycling instance (minimize form).
        let lp = LinearProgram::new(vec![rat(-3, 4), int(20), rat(-1, 2), int(6)], Sense::Minimize)
            .constraint(vec![rat(1, 4), int(-8), int(-1), int(9)], Relation::Le, int(0))
            .constraint(vec![rat(1, 2), int(-12), rat(-1, 2), int(3)], Relation::Le, int(0))
            .constraint(v(&[0, 0, 1, 0]), Relation::Le, int(1));
        assert_eq!(solve_lp(&lp).unwrap().value(), Some(&rat(-5, 4)));
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let lp = LinearProgram::new(v(&[1, 2]), Sense::Minimize)
            .constraint(v(&[1, 1]), Relation::Eq, int(1))
            .constraint(v(&[2, 2]), Relation::Eq, int(2));
        assert_eq!(solve_lp(&lp).unwrap().value(), Some(&int(1)));
    }

    #[test]
    fn prepared_region_answers_many_objectives() {
        let region = two_by_two(v(&[0, 0, 0, 0]), Sense::Minimize).region;
        let prepared = region.prepare().unwrap();
        for k in 0..4 {
            let mut obj = v(&[0, 0, 0, 0]);
            obj[k] = int(1);
            assert_eq!(prepared.optimize(&obj, Sense::Minimize).unwrap().value(), Some(&int(0)));
            assert_eq!(prepared.optimize(&obj, Sense::Maximize).unwrap().value(), Some(&rat(1, 2)));
        }
    }
}
