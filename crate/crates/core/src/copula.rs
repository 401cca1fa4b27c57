//! Copulas on the unit square: the Fréchet-Hoeffding bounds, the product
//! copula, two Archimedean families, and bilinear node tables.

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::grid::{ExtReal, Grid, Table2D};
use crate::numerics::{snap_f64, to_f64, tolerance_rational, Rational, SNAP_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CopulaError {
    #[error("argument ({u}, {v}) is outside the unit square")]
    Domain { u: String, v: String },
    #[error("theta {theta} is not admissible for the {family} family")]
    Theta { family: &'static str, theta: String },
    #[error("node list must increase strictly from 0 to 1")]
    Nodes,
    #[error("expected a {rows}x{cols} value table")]
    Shape { rows: usize, cols: usize },
    #[error("value at node ({u}, {v}) is outside [0, 1]")]
    Range { u: String, v: String },
    #[error("boundary condition fails at node ({u}, {v})")]
    Boundary { u: String, v: String },
}

/// Node table on `u_0 = 0 < ... < u_k = 1` by `v_0 = 0 < ... < v_l = 1`
/// with copula boundary values, interpolated bilinearly between nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridCopula {
    u: Vec<Rational>,
    v: Vec<Rational>,
    values: Vec<Vec<Rational>>,
}

fn valid_nodes(nodes: &[Rational]) -> bool {
    nodes.len() >= 2
        && nodes[0].is_zero()
        && nodes[nodes.len() - 1].is_one()
        && nodes.windows(2).all(|w| w[0] < w[1])
}

impl GridCopula {
    pub fn new(u: Vec<Rational>, v: Vec<Rational>, values: Vec<Vec<Rational>>) -> Result<Self, CopulaError> {
        if !valid_nodes(&u) || !valid_nodes(&v) {
            return Err(CopulaError::Nodes);
        }
        if values.len() != u.len() || values.iter().any(|r| r.len() != v.len()) {
            return Err(CopulaError::Shape {
                rows: u.len(),
                cols: v.len(),
            });
        }
        let (last_u, last_v) = (u.len() - 1, v.len() - 1);
        for (a, row) in values.iter().enumerate() {
            for (b, c) in row.iter().enumerate() {
                let at = || (u[a].to_string(), v[b].to_string());
                if c.is_negative() || *c > Rational::one() {
                    let (u, v) = at();
                    return Err(CopulaError::Range { u, v });
                }
                let expected = if a == 0 || b == 0 {
                    Some(Rational::zero())
                } else if a == last_u {
                    Some(v[b].clone())
                } else if b == last_v {
                    Some(u[a].clone())
                } else {
                    None
                };
                if expected.is_some_and(|e| &e != c) {
                    let (u, v) = at();
                    return Err(CopulaError::Boundary { u, v });
                }
            }
        }
        Ok(GridCopula { u, v, values })
    }

    /// Tabulates `f` on the product of the two node lists.
    pub fn from_fn(
        u: Vec<Rational>,
        v: Vec<Rational>,
        mut f: impl FnMut(&Rational, &Rational) -> Rational,
    ) -> Result<Self, CopulaError> {
        let values = u.iter().map(|a| v.iter().map(|b| f(a, b)).collect()).collect();
        GridCopula::new(u, v, values)
    }

    pub fn u_nodes(&self) -> &[Rational] {
        &self.u
    }

    pub fn v_nodes(&self) -> &[Rational] {
        &self.v
    }

    pub fn values(&self) -> &[Vec<Rational>] {
        &self.values
    }

    fn eval(&self, u: &Rational, v: &Rational) -> Rational {
        let (a, s) = locate(&self.u, u);
        let (b, t) = locate(&self.v, v);
        let c = |i: usize, j: usize| &self.values[i][j];
        let one = Rational::one();
        let (a1, b1) = ((a + 1).min(self.u.len() - 1), (b + 1).min(self.v.len() - 1));
        (&one - &s) * (&one - &t) * c(a, b) + &s * (&one - &t) * c(a1, b) + (&one - &s) * &t * c(a, b1) + &s * &t * c(a1, b1)
    }
}

/// Index of the cell containing `x` and the relative position inside it.
fn locate(nodes: &[Rational], x: &Rational) -> (usize, Rational) {
    match nodes.binary_search(x) {
        Ok(i) => (i, Rational::zero()),
        Err(i) => {
            let (lo, hi) = (&nodes[i - 1], &nodes[i]);
            (i - 1, (x - lo) / (hi - lo))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CopulaSpec {
    Lukasiewicz,
    Minimum,
    Product,
    Clayton { theta: Rational },
    Frank { theta: Rational },
    GridTable(GridCopula),
}

impl fmt::Display for CopulaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CopulaSpec::Lukasiewicz => f.write_str("lukasiewicz"),
            CopulaSpec::Minimum => f.write_str("minimum"),
            CopulaSpec::Product => f.write_str("product"),
            CopulaSpec::Clayton { theta } => write!(f, "clayton({theta})"),
            CopulaSpec::Frank { theta } => write!(f, "frank({theta})"),
            CopulaSpec::GridTable(t) => write!(f, "table({}x{})", t.u.len(), t.v.len()),
        }
    }
}

pub fn lukasiewicz(u: &Rational, v: &Rational) -> Rational {
    (u + v - Rational::one()).max(Rational::zero())
}

pub fn minimum(u: &Rational, v: &Rational) -> Rational {
    u.min(v).clone()
}

fn in_unit(x: &Rational) -> bool {
    !x.is_negative() && *x <= Rational::one()
}

impl CopulaSpec {
    pub fn clayton(theta: Rational) -> Result<Self, CopulaError> {
        if theta.is_zero() || theta < -Rational::one() {
            return Err(CopulaError::Theta {
                family: "clayton",
                theta: theta.to_string(),
            });
        }
        Ok(CopulaSpec::Clayton { theta })
    }

    pub fn frank(theta: Rational) -> Result<Self, CopulaError> {
        if theta.is_zero() {
            return Err(CopulaError::Theta {
                family: "frank",
                theta: theta.to_string(),
            });
        }
        Ok(CopulaSpec::Frank { theta })
    }

    pub fn grid_table(u: Vec<Rational>, v: Vec<Rational>, values: Vec<Vec<Rational>>) -> Result<Self, CopulaError> {
        GridCopula::new(u, v, values).map(CopulaSpec::GridTable)
    }

    /// Exact families evaluate in rationals; the Archimedean ones go through
    /// floating point.
    pub fn is_exact(&self) -> bool {
        !matches!(self, CopulaSpec::Clayton { .. } | CopulaSpec::Frank { .. })
    }

    /// Comparison slack for checks on this copula's values.
    pub fn tolerance(&self) -> Rational {
        if self.is_exact() {
            Rational::zero()
        } else {
            tolerance_rational(SNAP_TOLERANCE)
        }
    }

    pub fn eval(&self, u: &Rational, v: &Rational) -> Result<Rational, CopulaError> {
        if !in_unit(u) || !in_unit(v) {
            return Err(CopulaError::Domain {
                u: u.to_string(),
                v: v.to_string(),
            });
        }
        Ok(self.value(u, v))
    }

    /// Evaluation for arguments already known to lie in `[0, 1]`.
    pub fn value(&self, u: &Rational, v: &Rational) -> Rational {
        match self {
            CopulaSpec::Lukasiewicz => lukasiewicz(u, v),
            CopulaSpec::Minimum => minimum(u, v),
            CopulaSpec::Product => u * v,
            CopulaSpec::GridTable(t) => t.eval(u, v),
            CopulaSpec::Clayton { theta } | CopulaSpec::Frank { theta } => {
                if u.is_zero() || v.is_zero() {
                    return Rational::zero();
                }
                if u.is_one() {
                    return v.clone();
                }
                if v.is_one() {
                    return u.clone();
                }
                let (uf, vf, th) = (to_f64(u), to_f64(v), to_f64(theta));
                let x = match self {
                    CopulaSpec::Clayton { .. } => clayton_f64(uf, vf, th),
                    _ => frank_f64(uf, vf, th),
                };
                snap_f64(x.clamp(0.0, 1.0), SNAP_TOLERANCE)
            }
        }
    }
}

fn clayton_f64(u: f64, v: f64, theta: f64) -> f64 {
    let base = u.powf(-theta) + v.powf(-theta) - 1.0;
    if base <= 0.0 {
        0.0
    } else {
        base.powf(-1.0 / theta)
    }
}

fn frank_f64(u: f64, v: f64, theta: f64) -> f64 {
    let num = (-theta * u).exp_m1() * (-theta * v).exp_m1();
    -(num / (-theta).exp_m1()).ln_1p() / theta
}

/// Nodes `0, 1/r, ..., 1`.
pub fn lattice(resolution: usize) -> Vec<Rational> {
    assert!(resolution >= 1, "lattice resolution must be positive");
    let r = resolution as i64;
    (0..=r).map(|k| crate::numerics::rat(k, r)).collect()
}

/// Sorted union of node lists, always containing 0 and 1.
pub fn merge_nodes<'a>(lists: impl IntoIterator<Item = &'a [Rational]>) -> Vec<Rational> {
    let mut all: Vec<Rational> = vec![Rational::zero(), Rational::one()];
    for list in lists {
        all.extend(list.iter().filter(|x| in_unit(x)).cloned());
    }
    all.sort();
    all.dedup();
    all
}

/// Lattice nodes, plus the table's own nodes for a [`CopulaSpec::GridTable`].
pub fn validation_nodes(c: &CopulaSpec, resolution: usize) -> (Vec<Rational>, Vec<Rational>) {
    let base = lattice(resolution);
    match c {
        CopulaSpec::GridTable(t) => (merge_nodes([&base[..], &t.u]), merge_nodes([&base[..], &t.v])),
        _ => (base.clone(), base),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CopulaViolation {
    /// COP1: `C(u, 0) = C(0, v) = 0`.
    NotGrounded { u: Rational, v: Rational, value: Rational },
    /// COP2: `C(u, 1) = u`, `C(1, v) = v`.
    WrongMargin {
        u: Rational,
        v: Rational,
        value: Rational,
        expected: Rational,
    },
    /// COP3: nonnegative rectangle volume.
    NegativeVolume {
        u1: Rational,
        u2: Rational,
        v1: Rational,
        v2: Rational,
        volume: Rational,
    },
}

impl CopulaViolation {
    pub fn condition(&self) -> &'static str {
        match self {
            CopulaViolation::NotGrounded { .. } => "COP1",
            CopulaViolation::WrongMargin { .. } => "COP2",
            CopulaViolation::NegativeVolume { .. } => "COP3",
        }
    }
}

impl fmt::Display for CopulaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CopulaViolation::NotGrounded { u, v, value } => write!(f, "COP1 at ({u}, {v}): value {value}"),
            CopulaViolation::WrongMargin { u, v, value, expected } => {
                write!(f, "COP2 at ({u}, {v}): value {value}, expected {expected}")
            }
            CopulaViolation::NegativeVolume { u1, u2, v1, v2, volume } => {
                write!(f, "COP3 on [{u1}, {u2}] x [{v1}, {v2}]: volume {volume}")
            }
        }
    }
}

/// Node values of `c` on `us x vs`.
pub fn tabulate(c: &CopulaSpec, us: &[Rational], vs: &[Rational]) -> Vec<Vec<Rational>> {
    us.iter().map(|u| vs.iter().map(|v| c.value(u, v)).collect()).collect()
}

fn boundary_violations(us: &[Rational], vs: &[Rational], t: &[Vec<Rational>], tol: &Rational) -> Vec<CopulaViolation> {
    let mut out = Vec::new();
    let off = |a: &Rational, b: &Rational| (a - b).abs() > *tol;
    let zero = Rational::zero();
    for (a, u) in us.iter().enumerate() {
        for (b, v) in vs.iter().enumerate() {
            let value = &t[a][b];
            if (u.is_zero() || v.is_zero()) && off(value, &zero) {
                out.push(CopulaViolation::NotGrounded {
                    u: u.clone(),
                    v: v.clone(),
                    value: value.clone(),
                });
            } else if u.is_one() && off(value, v) || v.is_one() && off(value, u) {
                let expected = if u.is_one() { v.clone() } else { u.clone() };
                out.push(CopulaViolation::WrongMargin {
                    u: u.clone(),
                    v: v.clone(),
                    value: value.clone(),
                    expected,
                });
            }
        }
    }
    out
}

/// A quasi-copula that is not a copula: the product on the nodes
/// `{0, 1/3, 2/3, 1}` with both off-diagonal corners of the middle cell
/// raised by 1/12, which leaves a middle volume of -1/18.
pub fn proper_quasi_copula() -> CopulaSpec {
    let n: Vec<Rational> = (0..=3).map(|k| Rational::new(k.into(), 3.into())).collect();
    let mut values = tabulate(&CopulaSpec::Product, &n, &n);
    values[1][2] += Rational::new(1.into(), 12.into());
    values[2][1] += Rational::new(1.into(), 12.into());
    CopulaSpec::grid_table(n.clone(), n, values).expect("boundaries untouched")
}

/// COP1-COP3 on the given node sets. COP3 is checked on adjacent-node
/// cells; every node rectangle's volume is the sum of the cells it covers.
pub fn validate_on_nodes(c: &CopulaSpec, us: &[Rational], vs: &[Rational]) -> Vec<CopulaViolation> {
    let tol = c.tolerance();
    let t = tabulate(c, us, vs);
    let mut out = boundary_violations(us, vs, &t, &tol);
    for a in 1..us.len() {
        for b in 1..vs.len() {
            let volume = &t[a][b] - &t[a - 1][b] - &t[a][b - 1] + &t[a - 1][b - 1];
            if volume < -&tol {
                out.push(CopulaViolation::NegativeVolume {
                    u1: us[a - 1].clone(),
                    u2: us[a].clone(),
                    v1: vs[b - 1].clone(),
                    v2: vs[b].clone(),
                    volume,
                });
            }
        }
    }
    out
}

pub fn validate_copula(c: &CopulaSpec, resolution: usize) -> Vec<CopulaViolation> {
    let (us, vs) = validation_nodes(c, resolution);
    validate_on_nodes(c, &us, &vs)
}

/// True iff `|t(a2, b2) - t(a1, b1)| <= |u2 - u1| + |v2 - v1|` for all node
/// pairs. Checked along single-axis steps between adjacent nodes; the
/// general pair follows by the triangle inequality along a staircase path.
pub fn lipschitz_on_nodes(us: &[Rational], vs: &[Rational], t: &[Vec<Rational>], tol: &Rational) -> bool {
    for a in 0..us.len() {
        for b in 0..vs.len() {
            if a > 0 && (&t[a][b] - &t[a - 1][b]).abs() > &us[a] - &us[a - 1] + tol {
                return false;
            }
            if b > 0 && (&t[a][b] - &t[a][b - 1]).abs() > &vs[b] - &vs[b - 1] + tol {
                return false;
            }
        }
    }
    true
}

/// COP1, COP2 and the Lipschitz condition on the validation lattice.
pub fn is_quasi_copula(c: &CopulaSpec, resolution: usize) -> bool {
    let (us, vs) = validation_nodes(c, resolution);
    let tol = c.tolerance();
    let t = tabulate(c, &us, &vs);
    boundary_violations(&us, &vs, &t, &tol).is_empty() && lipschitz_on_nodes(&us, &vs, &t, &tol)
}

/// `C_L <= c <= C_M` at every validation node.
pub fn frechet_bounds_check(c: &CopulaSpec, resolution: usize) -> bool {
    let (us, vs) = validation_nodes(c, resolution);
    let tol = c.tolerance();
    us.iter().all(|u| {
        vs.iter().all(|v| {
            let x = c.value(u, v);
            x >= lukasiewicz(u, v) - &tol && x <= minimum(u, v) + &tol
        })
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SklarError {
    #[error("table is not standardized: {0}")]
    NotStandardized(String),
    #[error(
        "points ({}, {}) and ({}, {}) share marginal values but have joint values {} and {}",
        first.0, first.1, second.0, second.1, first_value, second_value
    )]
    WellDefinedness {
        first: (usize, usize),
        second: (usize, usize),
        first_value: Rational,
        second_value: Rational,
    },
    #[error("rectangle x {x1}..{x2}, y {y1}..{y2} has negative volume")]
    NotTwoIncreasing { x1: usize, x2: usize, y1: usize, y2: usize },
}

/// A copula known only on the ranges of two marginals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubCopula {
    table: GridCopula,
}

impl SubCopula {
    pub fn u_nodes(&self) -> &[Rational] {
        &self.table.u
    }

    pub fn v_nodes(&self) -> &[Rational] {
        &self.table.v
    }

    /// Value at a node pair; `None` off the nodes.
    pub fn at_nodes(&self, u: &Rational, v: &Rational) -> Option<&Rational> {
        let a = self.table.u.binary_search(u).ok()?;
        let b = self.table.v.binary_search(v).ok()?;
        Some(&self.table.values[a][b])
    }

    /// The checkerboard (bilinear) extension to the whole unit square.
    pub fn to_copula(&self) -> CopulaSpec {
        CopulaSpec::GridTable(self.table.clone())
    }
}

fn index_in(nodes: &[Rational], x: &Rational) -> usize {
    nodes.binary_search(x).expect("node present")
}

/// Two grid points with the same marginal images but different joint values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalClash {
    pub first: (usize, usize),
    pub second: (usize, usize),
    pub first_value: Rational,
    pub second_value: Rational,
}

/// The function `(fx(x), fy(y)) -> joint(x, y)` on the node sets
/// `image(fx)` and `image(fy)`, if it is well defined. Points are scanned in
/// x-major order and the clash reported is the first one met.
pub fn induced_node_table(
    joint: &Table2D,
    fx: &[Rational],
    fy: &[Rational],
) -> Result<(Vec<Rational>, Vec<Rational>, Vec<Vec<Rational>>), MarginalClash> {
    let us = merge_nodes([fx]);
    let vs = merge_nodes([fy]);
    let mut seen: Vec<Vec<Option<(usize, usize)>>> = vec![vec![None; vs.len()]; us.len()];
    let mut values = vec![vec![Rational::zero(); vs.len()]; us.len()];
    for x in 0..joint.xgrid().len() {
        for y in 0..joint.ygrid().len() {
            let (a, b) = (index_in(&us, &fx[x]), index_in(&vs, &fy[y]));
            let value = joint.value(x, y);
            match seen[a][b] {
                Some(at) if &values[a][b] != value => {
                    return Err(MarginalClash {
                        first: at,
                        second: (x, y),
                        first_value: values[a][b].clone(),
                        second_value: value.clone(),
                    });
                }
                Some(_) => {}
                None => {
                    seen[a][b] = Some((x, y));
                    values[a][b] = value.clone();
                }
            }
        }
    }
    Ok((us, vs, values))
}

/// Splits `f` into its marginals and a subcopula on their ranges.
///
/// Checks run in a fixed order: standardization, then well-definedness,
/// then 2-increasingness.
pub fn sklar_decompose(f: &Table2D) -> Result<SubCopula, SklarError> {
    if let Some(defect) = f.standardization_defect() {
        return Err(SklarError::NotStandardized(defect.to_string()));
    }
    let (us, vs, values) = induced_node_table(f, &f.x_marginal(), &f.y_marginal()).map_err(|c| {
        SklarError::WellDefinedness {
            first: c.first,
            second: c.second,
            first_value: c.first_value,
            second_value: c.second_value,
        }
    })?;
    if let Some(r) = f.first_negative_cell() {
        return Err(SklarError::NotTwoIncreasing {
            x1: r.x1,
            x2: r.x2,
            y1: r.y1,
            y2: r.y2,
        });
    }
    let table = GridCopula::new(us, vs, values).expect("standardized marginals give copula boundaries");
    Ok(SubCopula { table })
}

/// Value of the extension of a unit-square function to the extended plane:
/// zero left of or below the origin, the function itself on the square and
/// its margins beyond 1.
pub fn extended_value(
    c: impl Fn(&Rational, &Rational) -> Rational,
    x: &ExtReal,
    y: &ExtReal,
) -> Rational {
    let clip = |p: &ExtReal| -> Option<Rational> {
        match p {
            ExtReal::NegInf => None,
            ExtReal::PosInf => Some(Rational::one()),
            ExtReal::Finite(v) if v.is_negative() => None,
            ExtReal::Finite(v) => Some(v.min(&Rational::one()).clone()),
        }
    };
    match (clip(x), clip(y)) {
        (Some(u), Some(v)) => c(&u, &v),
        _ => Rational::zero(),
    }
}

pub fn extend_to_distribution(c: &CopulaSpec, xgrid: &Grid, ygrid: &Grid) -> Table2D {
    Table2D::from_fn(xgrid.clone(), ygrid.clone(), |i, j| {
        extended_value(|u, v| c.value(u, v), xgrid.point(i), ygrid.point(j))
    })
    .expect("copula values lie in [0, 1]")
}
