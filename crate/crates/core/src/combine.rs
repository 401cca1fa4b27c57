//! Joining marginal p-boxes into bivariate ones through sets of copulas.

use crate::copula::{induced_node_table, lukasiewicz, minimum, validate_on_nodes, GridCopula, MarginalClash};
use crate::grid::{GridError, Table1D, Table2D};
use crate::icopula::{CopulaSet, ImpreciseCopula};
use crate::numerics::Rational;
use crate::pbox::{credal_contains, BiPBox, PBox};

/// What links the two marginals.
#[derive(Debug, Clone, Copy)]
pub enum Linkage<'a> {
    /// Members are evaluated exactly at the marginal values.
    Set(&'a CopulaSet),
    Imprecise(&'a ImpreciseCopula),
}

/// `lower(x, y) = C_lower(Fx_lower(x), Fy_lower(y))`,
/// `upper(x, y) = C_upper(Fx_upper(x), Fy_upper(y))`.
pub fn sklar_combine(px: &PBox, py: &PBox, link: Linkage<'_>) -> BiPBox {
    let (xg, yg) = (px.grid().clone(), py.grid().clone());
    let (lx, ly, ux, uy) = (px.lower(), py.lower(), px.upper(), py.upper());
    let (lower, upper) = match link {
        Linkage::Set(s) => (
            Table2D::from_fn(xg.clone(), yg.clone(), |i, j| s.lower_value(lx.value(i), ly.value(j))),
            Table2D::from_fn(xg, yg, |i, j| s.upper_value(ux.value(i), uy.value(j))),
        ),
        Linkage::Imprecise(ic) => (
            Table2D::from_fn(xg.clone(), yg.clone(), |i, j| ic.lower().value(lx.value(i), ly.value(j))),
            Table2D::from_fn(xg, yg, |i, j| ic.upper().value(ux.value(i), uy.value(j))),
        ),
    };
    let lower = lower.expect("copula values lie in [0, 1]");
    let upper = upper.expect("copula values lie in [0, 1]");
    BiPBox::new(lower, upper).expect("copula bounds of ordered marginals form a p-box")
}

/// `lower = C_L(Fx_lower, Fy_lower)`, `upper = C_M(Fx_upper, Fy_upper)`.
pub fn natural_extension(px: &PBox, py: &PBox) -> BiPBox {
    let (xg, yg) = (px.grid().clone(), py.grid().clone());
    let lower = Table2D::from_fn(xg.clone(), yg.clone(), |i, j| {
        lukasiewicz(px.lower().value(i), py.lower().value(j))
    })
    .expect("values in [0, 1]");
    let upper = Table2D::from_fn(xg, yg, |i, j| minimum(px.upper().value(i), py.upper().value(j)))
        .expect("values in [0, 1]");
    BiPBox::new(lower, upper).expect("Fréchet bounds of ordered marginals form a p-box")
}

/// Membership test for the credal set of a bivariate p-box: a pmf belongs
/// iff its CDF lies between the bounds.
pub struct CredalDescription<'a> {
    pbox: &'a BiPBox,
}

impl<'a> CredalDescription<'a> {
    pub fn contains(&self, masses: &[Vec<Rational>]) -> Result<bool, GridError> {
        credal_contains(self.pbox, masses)
    }
}

pub fn credal_description(b: &BiPBox) -> CredalDescription<'_> {
    CredalDescription { pbox: b }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Factorability {
    /// The combining function on `image(fx) x image(fy)`.
    Factorable {
        u: Vec<Rational>,
        v: Vec<Rational>,
        values: Vec<Vec<Rational>>,
    },
    NotFactorable(MarginalClash),
    /// Strict mode only: a combining function exists but is not a copula.
    NotACopula { reason: String },
}

impl Factorability {
    pub fn is_factorable(&self) -> bool {
        matches!(self, Factorability::Factorable { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FactorabilityMode {
    /// Any function of the marginal values will do.
    #[default]
    AnyFunction,
    /// The induced node table must itself be a copula on its nodes.
    Copula,
}

/// Does `joint(x, y)` depend on `(x, y)` only through `(fx(x), fy(y))`?
pub fn factorability_check(joint: &Table2D, fx: &Table1D, fy: &Table1D) -> Factorability {
    factorability_check_with(joint, fx, fy, FactorabilityMode::AnyFunction)
}

pub fn factorability_check_with(joint: &Table2D, fx: &Table1D, fy: &Table1D, mode: FactorabilityMode) -> Factorability {
    assert!(
        fx.grid() == joint.xgrid() && fy.grid() == joint.ygrid(),
        "marginal grids must match the joint table"
    );
    let (u, v, values) = match induced_node_table(joint, fx.values(), fy.values()) {
        Ok(t) => t,
        Err(clash) => return Factorability::NotFactorable(clash),
    };
    if mode == FactorabilityMode::Copula {
        match GridCopula::new(u.clone(), v.clone(), values.clone()) {
            Err(e) => return Factorability::NotACopula { reason: e.to_string() },
            Ok(t) => {
                let c = crate::copula::CopulaSpec::GridTable(t);
                if let Some(first) = validate_on_nodes(&c, &u, &v).first() {
                    return Factorability::NotACopula {
                        reason: first.to_string(),
                    };
                }
            }
        }
    }
    Factorability::Factorable { u, v, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::CopulaSpec;
    use crate::grid::Grid;
    use crate::numerics::{int, parse_rational, rat};
    use crate::pbox::{coherence_check, marginals};

    fn r(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn grid01() -> Grid {
        Grid::with_interior([int(0), int(1)]).unwrap()
    }

    fn uniform01() -> Table1D {
        Table1D::new(grid01(), vec![int(0), rat(1, 2), int(1), int(1)]).unwrap()
    }

    #[test]
    fn natural_extension_arithmetic() {
        let g = Grid::with_interior([int(0)]).unwrap();
        let px = PBox::new(
            Table1D::new(g.clone(), vec![int(0), r("0.5"), int(1)]).unwrap(),
            Table1D::new(g.clone(), vec![int(0), r("0.6"), int(1)]).unwrap(),
        )
        .unwrap();
        let py = PBox::new(
            Table1D::new(g.clone(), vec![int(0), r("0.7"), int(1)]).unwrap(),
            Table1D::new(g, vec![int(0), r("0.9"), int(1)]).unwrap(),
        )
        .unwrap();
        let b = natural_extension(&px, &py);
        assert_eq!(b.lower().value(1, 1), &rat(1, 5));
        assert_eq!(b.upper().value(1, 1), &rat(3, 5));
        let (mx, my) = marginals(&b);
        assert_eq!((mx, my), (px, py));
    }

    #[test]
    fn product_singleton_gives_product_table() {
        let p = PBox::precise(uniform01());
        let s = CopulaSet::new(vec![CopulaSpec::Product], 4).unwrap();
        let b = sklar_combine(&p, &p, Linkage::Set(&s));
        assert_eq!(b.lower(), b.upper());
        assert_eq!(b.lower().value(1, 1), &rat(1, 4));
        assert!(coherence_check(&b).is_coherent());
    }

    #[test]
    fn frechet_set_matches_natural_extension() {
        let g = grid01();
        let px = PBox::new(
            Table1D::new(g.clone(), vec![int(0), rat(1, 4), rat(3, 4), int(1)]).unwrap(),
            Table1D::new(g.clone(), vec![int(0), rat(1, 2), int(1), int(1)]).unwrap(),
        )
        .unwrap();
        let s = CopulaSet::new(vec![CopulaSpec::Lukasiewicz, CopulaSpec::Minimum], 4).unwrap();
        assert_eq!(sklar_combine(&px, &px, Linkage::Set(&s)), natural_extension(&px, &px));
    }

    #[test]
    fn clayton_singleton_is_precise() {
        let p = PBox::precise(uniform01());
        let c = CopulaSpec::clayton(int(2)).unwrap();
        let s = CopulaSet::new(vec![c.clone()], 4).unwrap();
        let b = sklar_combine(&p, &p, Linkage::Set(&s));
        assert_eq!(b.lower(), b.upper());
        assert_eq!(b.lower().value(1, 1), &c.value(&rat(1, 2), &rat(1, 2)));
    }

    #[test]
    fn credal_membership() {
        let p = PBox::precise(uniform01());
        let s = CopulaSet::new(vec![CopulaSpec::Product], 4).unwrap();
        let b = sklar_combine(&p, &p, Linkage::Set(&s));
        let d = credal_description(&b);
        let q = rat(1, 4);
        let z = int(0);
        let product = vec![
            vec![z.clone(); 4],
            vec![z.clone(), q.clone(), q.clone(), z.clone()],
            vec![z.clone(), q.clone(), q.clone(), z.clone()],
            vec![z.clone(); 4],
        ];
        assert!(d.contains(&product).unwrap());
        let mut corner = vec![vec![z.clone(); 4]; 4];
        corner[1][1] = int(1);
        assert!(!d.contains(&corner).unwrap());
    }

    #[test]
    fn natural_extension_lower_is_factorable() {
        let p = PBox::precise(uniform01());
        let b = natural_extension(&p, &p);
        let f = factorability_check(b.lower(), &uniform01(), &uniform01());
        assert!(f.is_factorable());
        assert!(factorability_check_with(b.lower(), &uniform01(), &uniform01(), FactorabilityMode::Copula).is_factorable());
    }
}
