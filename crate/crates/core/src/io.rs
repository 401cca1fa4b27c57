//! JSON schemas for every input object, with exact rational strings.
//!
//! Parsing happens in two stages: serde checks the shape (with the failing
//! location reported as a JSON pointer) and the `to_*` conversions check the
//! mathematical invariants.

use std::fmt;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::copula::CopulaSpec;
use crate::credal::{FiniteSpace, LowerPrevision, MarginalPrevision};
use crate::grid::{ExtReal, Grid, Table1D, Table2D};
use crate::icopula::CopulaSet;
use crate::numerics::{format_rational, parse_rational, Rational};
use crate::pbox::{BiPBox, PBox};

/// A pointered input diagnostic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputError {
    pub pointer: String,
    pub message: String,
}

impl InputError {
    pub fn new(pointer: impl Into<String>, message: impl fmt::Display) -> Self {
        InputError {
            pointer: pointer.into(),
            message: message.to_string(),
        }
    }

    /// The same error seen from an enclosing object at `prefix`.
    pub fn nested(self, prefix: &str) -> Self {
        InputError {
            pointer: format!("{prefix}{}", self.pointer),
            message: self.message,
        }
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = if self.pointer.is_empty() { "/" } else { &self.pointer };
        write!(f, "at {at}: {}", self.message)
    }
}

impl std::error::Error for InputError {}

/// Deserializes `text`, reporting shape errors with a JSON pointer.
pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T, InputError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer: String = e
            .path()
            .iter()
            .filter_map(|seg| match seg {
                serde_path_to_error::Segment::Seq { index } => Some(format!("/{index}")),
                serde_path_to_error::Segment::Map { key } => Some(format!("/{}", escape_pointer(key))),
                serde_path_to_error::Segment::Enum { variant } => Some(format!("/{}", escape_pointer(variant))),
                serde_path_to_error::Segment::Unknown => None,
            })
            .collect();
        InputError::new(pointer, e.into_inner())
    })
}

fn escape_pointer(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

fn num(ptr: &str, s: &str) -> Result<Rational, InputError> {
    parse_rational(s).map_err(|e| InputError::new(ptr, e))
}

fn nums(ptr: &str, v: &[String]) -> Result<Vec<Rational>, InputError> {
    v.iter().enumerate().map(|(i, s)| num(&format!("{ptr}/{i}"), s)).collect()
}

fn nums2(ptr: &str, v: &[Vec<String>]) -> Result<Vec<Vec<Rational>>, InputError> {
    v.iter().enumerate().map(|(i, row)| nums(&format!("{ptr}/{i}"), row)).collect()
}

pub fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

pub fn strings2(v: &[Vec<Rational>]) -> Vec<Vec<String>> {
    v.iter().map(|r| strings(r)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridJson {
    pub points: Vec<String>,
}

impl GridJson {
    pub fn of(g: &Grid) -> Self {
        GridJson {
            points: g.points().iter().map(ToString::to_string).collect(),
        }
    }

    pub fn to_grid(&self, ptr: &str) -> Result<Grid, InputError> {
        let points = self
            .points
            .iter()
            .enumerate()
            .map(|(i, s)| match s.trim() {
                "-inf" => Ok(ExtReal::NegInf),
                "+inf" | "inf" => Ok(ExtReal::PosInf),
                t => num(&format!("{ptr}/points/{i}"), t).map(ExtReal::Finite),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Grid::new(points).map_err(|e| InputError::new(format!("{ptr}/points"), e))
    }
}

fn grid_literals(ptr: &str, g: &GridJson) -> Result<(), InputError> {
    for (i, s) in g.points.iter().enumerate() {
        if !matches!(s.trim(), "-inf" | "+inf" | "inf") {
            num(&format!("{ptr}/points/{i}"), s.trim())?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PBoxJson {
    pub grid: GridJson,
    pub lower: Vec<String>,
    pub upper: Vec<String>,
}

impl PBoxJson {
    pub fn of(p: &PBox) -> Self {
        PBoxJson {
            grid: GridJson::of(p.grid()),
            lower: strings(p.lower().values()),
            upper: strings(p.upper().values()),
        }
    }

    /// Parses every literal without checking the p-box conditions.
    pub fn check_literals(&self, ptr: &str) -> Result<(), InputError> {
        grid_literals(&format!("{ptr}/grid"), &self.grid)?;
        nums(&format!("{ptr}/lower"), &self.lower)?;
        nums(&format!("{ptr}/upper"), &self.upper).map(drop)
    }

    pub fn to_pbox(&self, ptr: &str) -> Result<PBox, InputError> {
        let g = self.grid.to_grid(&format!("{ptr}/grid"))?;
        let table = |name: &str, v: &[String]| {
            let p = format!("{ptr}/{name}");
            Table1D::new(g.clone(), nums(&p, v)?).map_err(|e| InputError::new(p, e))
        };
        PBox::new(table("lower", &self.lower)?, table("upper", &self.upper)?).map_err(|e| InputError::new(ptr, e))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiPBoxJson {
    pub xgrid: GridJson,
    pub ygrid: GridJson,
    pub lower: Vec<Vec<String>>,
    pub upper: Vec<Vec<String>>,
}

impl BiPBoxJson {
    pub fn of(b: &BiPBox) -> Self {
        BiPBoxJson {
            xgrid: GridJson::of(b.xgrid()),
            ygrid: GridJson::of(b.ygrid()),
            lower: strings2(b.lower().values()),
            upper: strings2(b.upper().values()),
        }
    }

    /// Parses every literal without checking the p-box conditions.
    pub fn check_literals(&self, ptr: &str) -> Result<(), InputError> {
        grid_literals(&format!("{ptr}/xgrid"), &self.xgrid)?;
        grid_literals(&format!("{ptr}/ygrid"), &self.ygrid)?;
        nums2(&format!("{ptr}/lower"), &self.lower)?;
        nums2(&format!("{ptr}/upper"), &self.upper).map(drop)
    }

    pub fn to_bipbox(&self, ptr: &str) -> Result<BiPBox, InputError> {
        let xg = self.xgrid.to_grid(&format!("{ptr}/xgrid"))?;
        let yg = self.ygrid.to_grid(&format!("{ptr}/ygrid"))?;
        let table = |name: &str, v: &[Vec<String>]| {
            let p = format!("{ptr}/{name}");
            Table2D::new(xg.clone(), yg.clone(), nums2(&p, v)?).map_err(|e| InputError::new(p, e))
        };
        BiPBox::new(table("lower", &self.lower)?, table("upper", &self.upper)?).map_err(|e| InputError::new(ptr, e))
    }
}

/// A joint pmf on labelled outcomes; `masses[x][y]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PmfJson {
    pub xlabels: Vec<String>,
    pub ylabels: Vec<String>,
    pub masses: Vec<Vec<String>>,
}

/// A parsed pmf: outcome labels and masses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pmf {
    pub space: FiniteSpace,
    pub masses: Vec<Vec<Rational>>,
}

impl Pmf {
    /// Masses padded with the empty `-inf` row and column and the `+inf`
    /// row and column, as the grid tables expect.
    pub fn grid_masses(&self) -> Vec<Vec<Rational>> {
        let (nx, ny) = (self.space.nx(), self.space.ny());
        let zero = Rational::from_integer(0.into());
        let mut out = vec![vec![zero; ny + 2]; nx + 2];
        for (i, row) in self.masses.iter().enumerate() {
            for (j, m) in row.iter().enumerate() {
                out[i + 1][j + 1] = m.clone();
            }
        }
        out
    }

    pub fn cdf(&self) -> Table2D {
        Table2D::cdf_of_pmf(self.space.xgrid(), self.space.ygrid(), &self.grid_masses()).expect("validated pmf")
    }

    pub fn flat(&self) -> Vec<Rational> {
        self.masses.iter().flatten().cloned().collect()
    }
}

impl PmfJson {
    pub fn to_pmf(&self, ptr: &str) -> Result<Pmf, InputError> {
        let space = space_of(ptr, &self.xlabels, &self.ylabels)?;
        let masses = nums2(&format!("{ptr}/masses"), &self.masses)?;
        check_masses(&format!("{ptr}/masses"), &space, &masses)?;
        Ok(Pmf { space, masses })
    }
}

fn space_of(ptr: &str, xl: &[String], yl: &[String]) -> Result<FiniteSpace, InputError> {
    let xs = nums(&format!("{ptr}/xlabels"), xl)?;
    let ys = nums(&format!("{ptr}/ylabels"), yl)?;
    FiniteSpace::new(xs, ys).map_err(|e| InputError::new(ptr, e))
}

fn check_masses(ptr: &str, space: &FiniteSpace, masses: &[Vec<Rational>]) -> Result<(), InputError> {
    if masses.len() != space.nx() {
        return Err(InputError::new(ptr, format!("expected {} rows, found {}", space.nx(), masses.len())));
    }
    let mut total = Rational::from_integer(0.into());
    for (i, row) in masses.iter().enumerate() {
        if row.len() != space.ny() {
            return Err(InputError::new(
                format!("{ptr}/{i}"),
                format!("expected {} entries, found {}", space.ny(), row.len()),
            ));
        }
        for (j, m) in row.iter().enumerate() {
            if m < &Rational::from_integer(0.into()) {
                return Err(InputError::new(format!("{ptr}/{i}/{j}"), "negative mass"));
            }
            total += m;
        }
    }
    if total != Rational::from_integer(1.into()) {
        return Err(InputError::new(ptr, format!("masses sum to {total}, expected 1")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCopulaJson {
    pub u: Vec<String>,
    pub v: Vec<String>,
    pub values: Vec<Vec<String>>,
}

/// `{"family": "clayton", "theta": "2"}` or `{"table": {...}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CopulaJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<GridCopulaJson>,
}

impl CopulaJson {
    pub fn to_copula(&self, ptr: &str) -> Result<CopulaSpec, InputError> {
        if let Some(t) = &self.table {
            if self.family.is_some() || self.theta.is_some() {
                return Err(InputError::new(ptr, "a table member takes no family or theta"));
            }
            let p = format!("{ptr}/table");
            let u = nums(&format!("{p}/u"), &t.u)?;
            let v = nums(&format!("{p}/v"), &t.v)?;
            let values = nums2(&format!("{p}/values"), &t.values)?;
            return CopulaSpec::grid_table(u, v, values).map_err(|e| InputError::new(p, e));
        }
        let family = self
            .family
            .as_deref()
            .ok_or_else(|| InputError::new(ptr, "expected \"family\" or \"table\""))?;
        copula_of_family(ptr, family, self.theta.as_deref())
    }
}

/// Builds a named family; `theta` is required exactly for the parametric ones.
pub fn copula_of_family(ptr: &str, family: &str, theta: Option<&str>) -> Result<CopulaSpec, InputError> {
    let theta_ptr = format!("{ptr}/theta");
    let need = |theta: Option<&str>| -> Result<Rational, InputError> {
        let t = theta.ok_or_else(|| InputError::new(ptr, format!("family {family} needs theta")))?;
        num(&theta_ptr, t)
    };
    let plain = |c: CopulaSpec| {
        if theta.is_some() {
            Err(InputError::new(&theta_ptr, format!("family {family} takes no parameter")))
        } else {
            Ok(c)
        }
    };
    match family.to_ascii_lowercase().as_str() {
        "lukasiewicz" | "w" => plain(CopulaSpec::Lukasiewicz),
        "minimum" | "m" => plain(CopulaSpec::Minimum),
        "product" | "independence" | "pi" => plain(CopulaSpec::Product),
        "clayton" => CopulaSpec::clayton(need(theta)?).map_err(|e| InputError::new(&theta_ptr, e)),
        "frank" => CopulaSpec::frank(need(theta)?).map_err(|e| InputError::new(&theta_ptr, e)),
        other => Err(InputError::new(format!("{ptr}/family"), format!("unknown copula family {other:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CopulaSetJson {
    pub members: Vec<CopulaJson>,
}

impl CopulaSetJson {
    pub fn to_members(&self, ptr: &str) -> Result<Vec<CopulaSpec>, InputError> {
        self.members
            .iter()
            .enumerate()
            .map(|(i, m)| m.to_copula(&format!("{ptr}/members/{i}")))
            .collect()
    }

    pub fn to_set(&self, ptr: &str, resolution: usize) -> Result<CopulaSet, InputError> {
        CopulaSet::new(self.to_members(ptr)?, resolution).map_err(|e| InputError::new(format!("{ptr}/members"), e))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceJson {
    pub xlabels: Vec<String>,
    pub ylabels: Vec<String>,
}

/// Credal-set vertices, each a pmf `masses[x][y]` on the space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerPrevisionJson {
    pub space: SpaceJson,
    pub vertices: Vec<Vec<Vec<String>>>,
}

impl LowerPrevisionJson {
    pub fn of(lp: &LowerPrevision) -> Self {
        let s = lp.space();
        LowerPrevisionJson {
            space: SpaceJson {
                xlabels: strings(s.xlabels()),
                ylabels: strings(s.ylabels()),
            },
            vertices: lp
                .vertices()
                .iter()
                .map(|v| v.chunks(s.ny()).map(strings).collect())
                .collect(),
        }
    }

    pub fn to_lower_prevision(&self, ptr: &str) -> Result<LowerPrevision, InputError> {
        let space = space_of(&format!("{ptr}/space"), &self.space.xlabels, &self.space.ylabels)?;
        let mut flat = Vec::with_capacity(self.vertices.len());
        for (k, v) in self.vertices.iter().enumerate() {
            let p = format!("{ptr}/vertices/{k}");
            let masses = nums2(&p, v)?;
            check_masses(&p, &space, &masses)?;
            flat.push(masses.into_iter().flatten().collect());
        }
        LowerPrevision::new(space, flat).map_err(|e| InputError::new(format!("{ptr}/vertices"), e))
    }
}

/// A marginal lower prevision given by the vertices of its credal set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginalJson {
    pub labels: Vec<String>,
    pub vertices: Vec<Vec<String>>,
}

impl MarginalJson {
    pub fn to_marginal(&self, ptr: &str) -> Result<MarginalPrevision, InputError> {
        let labels = nums(&format!("{ptr}/labels"), &self.labels)?;
        let vertices = nums2(&format!("{ptr}/vertices"), &self.vertices)?;
        for (k, v) in vertices.iter().enumerate() {
            let p = format!("{ptr}/vertices/{k}");
            if v.len() != labels.len() {
                return Err(InputError::new(p, format!("expected {} masses, found {}", labels.len(), v.len())));
            }
            if v.iter().any(|m| m < &Rational::from_integer(0.into())) {
                return Err(InputError::new(p, "negative mass"));
            }
            let total: Rational = v.iter().sum();
            if total != Rational::from_integer(1.into()) {
                return Err(InputError::new(p, format!("masses sum to {total}, expected 1")));
            }
        }
        MarginalPrevision::new(labels, vertices).map_err(|e| InputError::new(ptr, e))
    }
}

/// The value at `key` of a top-level object.
pub fn field<'a>(
    obj: &'a serde_json::Map<String, serde_json::Value>,
    key: &str,
) -> Result<&'a serde_json::Value, InputError> {
    obj.get(key)
        .ok_or_else(|| InputError::new("", format!("missing field \"{key}\"")))
}

/// Deserializes the value at `key`, prefixing any pointer with `/key`.
pub fn parse_field<T: DeserializeOwned>(
    obj: &serde_json::Map<String, serde_json::Value>,
    key: &str,
) -> Result<T, InputError> {
    let v = field(obj, key)?;
    from_json::<T>(&v.to_string()).map_err(|e| e.nested(&format!("/{}", escape_pointer(key))))
}

pub fn parse_object(text: &str) -> Result<serde_json::Map<String, serde_json::Value>, InputError> {
    match from_json::<serde_json::Value>(text)? {
        serde_json::Value::Object(m) => Ok(m),
        _ => Err(InputError::new("", "expected a JSON object")),
    }
}

/// Rejects keys outside `allowed`.
pub fn only_keys(obj: &serde_json::Map<String, serde_json::Value>, allowed: &[&str]) -> Result<(), InputError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(InputError::new(
            format!("/{}", escape_pointer(k)),
            format!("unknown field, expected one of {allowed:?}"),
        )),
        None => Ok(()),
    }
}
