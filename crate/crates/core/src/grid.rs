//! Finite discretizations of the extended real line and the function tables
//! that live on them.
//!
//! A [`Grid`] always starts at `-inf` and ends at `+inf`. One-dimensional
//! tables hold cumulative distribution functions; two-dimensional tables
//! hold the (possibly non-2-increasing) functions a bivariate p-box is made
//! of. Mass may sit at `+inf`; the `-inf` row and column carry none.

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::numerics::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtReal {
    NegInf,
    Finite(Rational),
    PosInf,
}

impl ExtReal {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => f.write_str("-inf"),
            ExtReal::PosInf => f.write_str("+inf"),
            ExtReal::Finite(v) => f.write_str(&format_rational(v)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("a grid needs at least the two sentinels")]
    TooShort,
    #[error("grid must start at -inf and end at +inf")]
    MissingSentinel,
    #[error("grid points must be strictly increasing (index {0})")]
    NotIncreasing(usize),
    #[error("expected {expected} values, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("value at {at} is outside [0, 1]")]
    OutOfUnitInterval { at: String },
    #[error("table decreases at {at}")]
    NotMonotone { at: String },
    #[error("boundary condition violated at {at}")]
    Boundary { at: String },
    #[error("rectangle indices out of order or range: x {x1}..{x2}, y {y1}..{y2}")]
    IndexOrder { x1: usize, x2: usize, y1: usize, y2: usize },
    #[error("masses sum to {0}, expected 1")]
    MassSum(String),
    #[error("negative mass at ({0}, {1})")]
    NegativeMass(usize, usize),
    #[error("mass on the -inf row or column at ({0}, {1})")]
    MassAtNegInf(usize, usize),
}

/// Strictly increasing points from `-inf` to `+inf`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Grid {
    points: Vec<ExtReal>,
}

impl Grid {
    pub fn new(points: Vec<ExtReal>) -> Result<Self, GridError> {
        if points.len() < 2 {
            return Err(GridError::TooShort);
        }
        if points.first() != Some(&ExtReal::NegInf) || points.last() != Some(&ExtReal::PosInf) {
            return Err(GridError::MissingSentinel);
        }
        if let Some(i) = points.windows(2).position(|w| w[0] >= w[1]) {
            return Err(GridError::NotIncreasing(i + 1));
        }
        Ok(Grid { points })
    }

    /// Sentinels around the given strictly increasing finite points.
    pub fn with_interior(values: impl IntoIterator<Item = Rational>) -> Result<Self, GridError> {
        let mut points = vec![ExtReal::NegInf];
        points.extend(values.into_iter().map(ExtReal::Finite));
        points.push(ExtReal::PosInf);
        Grid::new(points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &[ExtReal] {
        &self.points
    }

    pub fn point(&self, index: usize) -> &ExtReal {
        &self.points[index]
    }

    pub fn last_index(&self) -> usize {
        self.points.len() - 1
    }

    pub fn index_of(&self, point: &ExtReal) -> Option<usize> {
        self.points.binary_search(point).ok()
    }
}

fn unit(v: &Rational) -> bool {
    !v.is_negative() && *v <= Rational::one()
}

/// A univariate CDF tabulated on a grid: nondecreasing, `0` at `-inf`,
/// `1` at `+inf`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Table1D {
    grid: Grid,
    values: Vec<Rational>,
}

impl Table1D {
    pub fn new(grid: Grid, values: Vec<Rational>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::Dimension {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !unit(v)) {
            return Err(GridError::OutOfUnitInterval {
                at: grid.point(i).to_string(),
            });
        }
        if let Some(i) = values.windows(2).position(|w| w[0] > w[1]) {
            return Err(GridError::NotMonotone {
                at: grid.point(i + 1).to_string(),
            });
        }
        if !values[0].is_zero() {
            return Err(GridError::Boundary { at: "-inf".into() });
        }
        if !values[values.len() - 1].is_one() {
            return Err(GridError::Boundary { at: "+inf".into() });
        }
        Ok(Table1D { grid, values })
    }

    /// CDF of a pmf given on the grid's points.
    pub fn from_masses(grid: Grid, masses: &[Rational]) -> Result<Self, GridError> {
        if masses.len() != grid.len() {
            return Err(GridError::Dimension {
                expected: grid.len(),
                found: masses.len(),
            });
        }
        if let Some(i) = masses.iter().position(|m| m.is_negative()) {
            return Err(GridError::NegativeMass(i, 0));
        }
        if !masses[0].is_zero() {
            return Err(GridError::MassAtNegInf(0, 0));
        }
        let mut acc = Rational::zero();
        let values: Vec<Rational> = masses
            .iter()
            .map(|m| {
                acc += m;
                acc.clone()
            })
            .collect();
        if !acc.is_one() {
            return Err(GridError::MassSum(format_rational(&acc)));
        }
        Table1D::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, index: usize) -> &Rational {
        &self.values[index]
    }

    /// Point masses recovered by first differences.
    pub fn masses(&self) -> Vec<Rational> {
        let mut prev = Rational::zero();
        self.values
            .iter()
            .map(|v| {
                let m = v - &prev;
                prev = v.clone();
                m
            })
            .collect()
    }

    /// Pointwise `self <= other`; `None` when the grids differ.
    pub fn pointwise_le(&self, other: &Table1D) -> Option<bool> {
        (self.grid == other.grid).then(|| self.values.iter().zip(&other.values).all(|(a, b)| a <= b))
    }
}

/// A function on `xgrid x ygrid` with values in `[0, 1]`, indexed
/// `values[x][y]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Table2D {
    xgrid: Grid,
    ygrid: Grid,
    values: Vec<Vec<Rational>>,
}

/// Why a table fails to be standardized; indices are grid indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StandardizationDefect {
    NonzeroAtNegInf { x: usize, y: usize },
    CornerNotOne,
    DecreasingInX { x: usize, y: usize },
    DecreasingInY { x: usize, y: usize },
}

impl fmt::Display for StandardizationDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StandardizationDefect::NonzeroAtNegInf { x, y } => write!(f, "nonzero on the -inf boundary at ({x}, {y})"),
            StandardizationDefect::CornerNotOne => f.write_str("value at (+inf, +inf) is not 1"),
            StandardizationDefect::DecreasingInX { x, y } => write!(f, "decreasing in x at ({x}, {y})"),
            StandardizationDefect::DecreasingInY { x, y } => write!(f, "decreasing in y at ({x}, {y})"),
        }
    }
}

/// A rectangle `[x1, x2] x [y1, y2]` of grid indices with its volume.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rectangle {
    pub x1: usize,
    pub x2: usize,
    pub y1: usize,
    pub y2: usize,
    pub volume: Rational,
}

impl Table2D {
    pub fn new(xgrid: Grid, ygrid: Grid, values: Vec<Vec<Rational>>) -> Result<Self, GridError> {
        if values.len() != xgrid.len() {
            return Err(GridError::Dimension {
                expected: xgrid.len(),
                found: values.len(),
            });
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != ygrid.len() {
                return Err(GridError::Dimension {
                    expected: ygrid.len(),
                    found: row.len(),
                });
            }
            if let Some(j) = row.iter().position(|v| !unit(v)) {
                return Err(GridError::OutOfUnitInterval {
                    at: format!("({}, {})", xgrid.point(i), ygrid.point(j)),
                });
            }
        }
        Ok(Table2D { xgrid, ygrid, values })
    }

    /// Builds a table by evaluating `f` at every index pair.
    pub fn from_fn(
        xgrid: Grid,
        ygrid: Grid,
        mut f: impl FnMut(usize, usize) -> Rational,
    ) -> Result<Self, GridError> {
        let values = (0..xgrid.len())
            .map(|i| (0..ygrid.len()).map(|j| f(i, j)).collect())
            .collect();
        Table2D::new(xgrid, ygrid, values)
    }

    /// Joint CDF `F(x, y) = sum of masses at (x', y') <= (x, y)`.
    pub fn cdf_of_pmf(xgrid: Grid, ygrid: Grid, masses: &[Vec<Rational>]) -> Result<Self, GridError> {
        if masses.len() != xgrid.len() {
            return Err(GridError::Dimension {
                expected: xgrid.len(),
                found: masses.len(),
            });
        }
        let mut total = Rational::zero();
        for (i, row) in masses.iter().enumerate() {
            if row.len() != ygrid.len() {
                return Err(GridError::Dimension {
                    expected: ygrid.len(),
                    found: row.len(),
                });
            }
            for (j, m) in row.iter().enumerate() {
                if m.is_negative() {
                    return Err(GridError::NegativeMass(i, j));
                }
                if (i == 0 || j == 0) && !m.is_zero() {
                    return Err(GridError::MassAtNegInf(i, j));
                }
                total += m;
            }
        }
        if !total.is_one() {
            return Err(GridError::MassSum(format_rational(&total)));
        }
        let (n, m) = (xgrid.len(), ygrid.len());
        let mut values = vec![vec![Rational::zero(); m]; n];
        for i in 0..n {
            let mut row_acc = Rational::zero();
            for j in 0..m {
                row_acc += &masses[i][j];
                values[i][j] = if i == 0 {
                    row_acc.clone()
                } else {
                    &values[i - 1][j] + &row_acc
                };
            }
        }
        Table2D::new(xgrid, ygrid, values)
    }

    pub fn xgrid(&self) -> &Grid {
        &self.xgrid
    }

    pub fn ygrid(&self) -> &Grid {
        &self.ygrid
    }

    pub fn values(&self) -> &[Vec<Rational>] {
        &self.values
    }

    pub fn value(&self, x: usize, y: usize) -> &Rational {
        &self.values[x][y]
    }

    pub fn same_grids(&self, other: &Table2D) -> bool {
        self.xgrid == other.xgrid && self.ygrid == other.ygrid
    }

    /// `F(x, +inf)` for every x.
    pub fn x_marginal(&self) -> Vec<Rational> {
        let last = self.ygrid.last_index();
        self.values.iter().map(|row| row[last].clone()).collect()
    }

    /// `F(+inf, y)` for every y.
    pub fn y_marginal(&self) -> Vec<Rational> {
        self.values[self.xgrid.last_index()].clone()
    }

    pub fn rectangle_volume(&self, x1: usize, x2: usize, y1: usize, y2: usize) -> Result<Rational, GridError> {
        if x1 > x2 || y1 > y2 || x2 >= self.xgrid.len() || y2 >= self.ygrid.len() {
            return Err(GridError::IndexOrder { x1, x2, y1, y2 });
        }
        Ok(self.volume_unchecked(x1, x2, y1, y2))
    }

    fn volume_unchecked(&self, x1: usize, x2: usize, y1: usize, y2: usize) -> Rational {
        let v = &self.values;
        &v[x2][y2] + &v[x1][y1] - &v[x1][y2] - &v[x2][y1]
    }

    /// Componentwise nondecreasing.
    pub fn is_monotone(&self) -> bool {
        let (n, m) = (self.xgrid.len(), self.ygrid.len());
        (0..n).all(|i| (1..m).all(|j| self.values[i][j - 1] <= self.values[i][j]))
            && (1..n).all(|i| (0..m).all(|j| self.values[i - 1][j] <= self.values[i][j]))
    }

    /// Monotone, zero on the `-inf` row and column, one at `(+inf, +inf)`.
    pub fn is_standardized(&self) -> bool {
        self.standardization_defect().is_none()
    }

    /// The first reason the table is not standardized, if any.
    pub fn standardization_defect(&self) -> Option<StandardizationDefect> {
        let (n, m) = (self.xgrid.len(), self.ygrid.len());
        for i in 0..n {
            for j in 0..m {
                if (i == 0 || j == 0) && !self.values[i][j].is_zero() {
                    return Some(StandardizationDefect::NonzeroAtNegInf { x: i, y: j });
                }
            }
        }
        if !self.values[n - 1][m - 1].is_one() {
            return Some(StandardizationDefect::CornerNotOne);
        }
        for i in 0..n {
            for j in 0..m {
                if j > 0 && self.values[i][j - 1] > self.values[i][j] {
                    return Some(StandardizationDefect::DecreasingInY { x: i, y: j });
                }
                if i > 0 && self.values[i - 1][j] > self.values[i][j] {
                    return Some(StandardizationDefect::DecreasingInX { x: i, y: j });
                }
            }
        }
        None
    }

    /// First adjacent-index cell with negative volume, in x-major order.
    pub fn first_negative_cell(&self) -> Option<Rectangle> {
        let (n, m) = (self.xgrid.len(), self.ygrid.len());
        for i in 1..n {
            for j in 1..m {
                let volume = self.volume_unchecked(i - 1, i, j - 1, j);
                if volume.is_negative() {
                    return Some(Rectangle {
                        x1: i - 1,
                        x2: i,
                        y1: j - 1,
                        y2: j,
                        volume,
                    });
                }
            }
        }
        None
    }

    /// First rectangle (over all index pairs) with negative volume.
    pub fn first_negative_rectangle(&self) -> Option<Rectangle> {
        let (n, m) = (self.xgrid.len(), self.ygrid.len());
        for x1 in 0..n {
            for x2 in x1 + 1..n {
                for y1 in 0..m {
                    for y2 in y1 + 1..m {
                        let volume = self.volume_unchecked(x1, x2, y1, y2);
                        if volume.is_negative() {
                            return Some(Rectangle { x1, x2, y1, y2, volume });
                        }
                    }
                }
            }
        }
        None
    }

    /// Nonnegative volume on every rectangle. Checking adjacent cells is
    /// enough: any rectangle's volume is the sum of the cells it covers.
    pub fn is_two_increasing(&self) -> bool {
        self.first_negative_cell().is_none()
    }

    pub fn is_distribution_function(&self) -> bool {
        self.is_standardized() && self.is_two_increasing()
    }

    /// Cell masses `m(i, j) = volume([i-1, i] x [j-1, j])`, zero on the
    /// `-inf` row and column. Inverse of [`Table2D::cdf_of_pmf`] for
    /// distribution functions.
    pub fn cell_masses(&self) -> Vec<Vec<Rational>> {
        let (n, m) = (self.xgrid.len(), self.ygrid.len());
        let mut out = vec![vec![Rational::zero(); m]; n];
        for i in 0..n {
            for j in 0..m {
                let left = if i > 0 { self.values[i - 1][j].clone() } else { Rational::zero() };
                let below = if j > 0 { self.values[i][j - 1].clone() } else { Rational::zero() };
                let diag = if i > 0 && j > 0 {
                    self.values[i - 1][j - 1].clone()
                } else {
                    Rational::zero()
                };
                out[i][j] = &self.values[i][j] - left - below + diag;
            }
        }
        out
    }

    /// Pointwise `self <= other`; `None` when the grids differ.
    pub fn pointwise_le(&self, other: &Table2D) -> Option<bool> {
        self.same_grids(other).then(|| {
            self.values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.iter().zip(b).all(|(p, q)| p <= q))
        })
    }
}

/// Left-hand sides of the four mixed rectangle inequalities for a pair of
/// tables `(lo, up)` on `[x1, x2] x [y1, y2]`, in order:
///
/// 1. `lo(x2,y2) + up(x1,y1) - lo(x1,y2) - lo(x2,y1)`
/// 2. `up(x2,y2) + lo(x1,y1) - lo(x1,y2) - lo(x2,y1)`
/// 3. `up(x2,y2) + up(x1,y1) - up(x1,y2) - lo(x2,y1)`
/// 4. `up(x2,y2) + up(x1,y1) - lo(x1,y2) - up(x2,y1)`
///
/// With `lo = up` each one is the rectangle volume.
pub fn mixed_rectangle_slacks(
    lo: &[Vec<Rational>],
    up: &[Vec<Rational>],
    (x1, x2): (usize, usize),
    (y1, y2): (usize, usize),
) -> [Rational; 4] {
    [
        &lo[x2][y2] + &up[x1][y1] - &lo[x1][y2] - &lo[x2][y1],
        &up[x2][y2] + &lo[x1][y1] - &lo[x1][y2] - &lo[x2][y1],
        &up[x2][y2] + &up[x1][y1] - &up[x1][y2] - &lo[x2][y1],
        &up[x2][y2] + &up[x1][y1] - &lo[x1][y2] - &up[x2][y1],
    ]
}
