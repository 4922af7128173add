//! Geometry file format: JSON with exact rational-string coefficients.
//!
//! A geometry file stores the control grids per patch plus, optionally,
//! fitted linear gluing data per interface. Coefficients are written as
//! rational strings ("3/4", "-2") so that the exact pipeline round-trips
//! without loss; a decimal shim accepts "0.25"-style strings and plain JSON
//! numbers on input.

use crate::gluing::GluingData;
use crate::multipatch::{detect_topology, Interface, MultiPatch, MultiPatchError, PatchMap, Side};
use crate::scalar::{Point2, Rat, Scalar};
use crate::spline::{make_space, NumberMode, SplineError, TensorSpline};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot parse coefficient {0:?}")]
    BadCoeff(String),
    #[error("patch {id}: expected {expected} coefficients, found {found}")]
    CoeffCount {
        id: usize,
        expected: usize,
        found: usize,
    },
    #[error("unknown side {0:?}")]
    UnknownSide(String),
    #[error("gluing record references no interface: patches {0} and {1}")]
    NoSuchInterface(usize, usize),
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error(transparent)]
    MultiPatch(#[from] MultiPatchError),
}

#[derive(Serialize, Deserialize)]
struct SpaceDesc {
    p: usize,
    r: i32,
    k: usize,
}

#[derive(Serialize, Deserialize)]
struct PatchDesc {
    id: usize,
    space: SpaceDesc,
    /// Row-major over (i, j): index i * (n + 1) + j.
    coeffs: Vec<[serde_json::Value; 2]>,
}

#[derive(Serialize, Deserialize)]
struct GluingDesc {
    patch_a: usize,
    side_a: String,
    patch_b: usize,
    side_b: String,
    a0_l: String,
    a1_l: String,
    a0_r: String,
    a1_r: String,
    b0_l: String,
    b1_l: String,
    b0_r: String,
    b1_r: String,
}

#[derive(Serialize, Deserialize)]
struct GeometryDoc {
    #[serde(default)]
    number_mode: NumberMode,
    patches: Vec<PatchDesc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gluing: Option<Vec<GluingDesc>>,
}

/// A parsed geometry file; gluing entries, when present, are aligned with
/// `geometry.interfaces`.
pub struct ParsedGeometry {
    pub geometry: MultiPatch<Rat>,
    pub gluing: Option<Vec<GluingData<Rat>>>,
    pub number_mode: NumberMode,
}

fn rat_to_string(v: &Rat) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// Parse "n", "n/d", or a decimal like "-1.25e-3" into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat, IoError> {
    let bad = || IoError::BadCoeff(s.to_string());
    let t = s.trim();
    if let Some((n, d)) = t.split_once('/') {
        let num: BigInt = n.trim().parse().map_err(|_| bad())?;
        let den: BigInt = d.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    if !t.contains(['.', 'e', 'E']) {
        let num: BigInt = t.parse().map_err(|_| bad())?;
        return Ok(BigRational::from_integer(num));
    }
    // decimal with optional exponent, parsed exactly
    let (mant, exp) = match t.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (int_part, frac_part) = match mant.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mant, ""),
    };
    let digits = format!("{}{}", int_part, frac_part);
    if digits.is_empty() || digits == "-" || digits == "+" {
        return Err(bad());
    }
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let shift = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let pow = ten.pow(shift.unsigned_abs() as u32);
    Ok(if shift >= 0 {
        BigRational::from_integer(num * pow)
    } else {
        BigRational::new(num, pow)
    })
}

fn value_to_rat(v: &serde_json::Value) -> Result<Rat, IoError> {
    match v {
        serde_json::Value::String(s) => parse_rat(s),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Rat::from_int(i))
            } else if let Some(f) = n.as_f64() {
                BigRational::from_float(f).ok_or_else(|| IoError::BadCoeff(n.to_string()))
            } else {
                Err(IoError::BadCoeff(n.to_string()))
            }
        }
        other => Err(IoError::BadCoeff(other.to_string())),
    }
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Bottom => "bottom",
        Side::Top => "top",
        Side::Left => "left",
        Side::Right => "right",
    }
}

fn parse_side(s: &str) -> Result<Side, IoError> {
    match s {
        "bottom" => Ok(Side::Bottom),
        "top" => Ok(Side::Top),
        "left" => Ok(Side::Left),
        "right" => Ok(Side::Right),
        other => Err(IoError::UnknownSide(other.to_string())),
    }
}

/// Serialize a geometry (and optionally its fitted gluing data, aligned
/// with `geom.interfaces`) to pretty-printed JSON.
pub fn serialize_geometry(
    geom: &MultiPatch<Rat>,
    gluing: Option<&[GluingData<Rat>]>,
    number_mode: NumberMode,
) -> Result<String, IoError> {
    let patches = geom
        .patches
        .iter()
        .map(|pm| {
            let sp = pm.space();
            PatchDesc {
                id: pm.id,
                space: SpaceDesc {
                    p: sp.degree(),
                    r: sp.regularity(),
                    k: sp.inner_knot_count(),
                },
                coeffs: pm
                    .geometry
                    .coeffs
                    .iter()
                    .map(|pt| {
                        [
                            serde_json::Value::String(rat_to_string(&pt.x)),
                            serde_json::Value::String(rat_to_string(&pt.y)),
                        ]
                    })
                    .collect(),
            }
        })
        .collect();
    let gluing = gluing.map(|gs| {
        gs.iter()
            .zip(&geom.interfaces)
            .map(|(g, itf)| GluingDesc {
                patch_a: itf.edge_a.patch,
                side_a: side_name(itf.edge_a.side).to_string(),
                patch_b: itf.edge_b.patch,
                side_b: side_name(itf.edge_b.side).to_string(),
                a0_l: rat_to_string(&g.a0_l),
                a1_l: rat_to_string(&g.a1_l),
                a0_r: rat_to_string(&g.a0_r),
                a1_r: rat_to_string(&g.a1_r),
                b0_l: rat_to_string(&g.b0_l),
                b1_l: rat_to_string(&g.b1_l),
                b0_r: rat_to_string(&g.b0_r),
                b1_r: rat_to_string(&g.b1_r),
            })
            .collect()
    });
    let doc = GeometryDoc {
        number_mode,
        patches,
        gluing,
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

fn matches_interface(itf: &Interface, a: usize, sa: Side, b: usize, sb: Side) -> bool {
    (itf.edge_a.patch == a
        && itf.edge_a.side == sa
        && itf.edge_b.patch == b
        && itf.edge_b.side == sb)
        || (itf.edge_a.patch == b
            && itf.edge_a.side == sb
            && itf.edge_b.patch == a
            && itf.edge_b.side == sa)
}

/// Parse a geometry file; topology is re-detected from the control grids.
pub fn parse_geometry(text: &str) -> Result<ParsedGeometry, IoError> {
    let doc: GeometryDoc = serde_json::from_str(text)?;
    let mut patches = Vec::with_capacity(doc.patches.len());
    for pd in &doc.patches {
        let space = make_space::<Rat>(pd.space.p, pd.space.r, pd.space.k)?;
        let dim = space.last_index() + 1;
        if pd.coeffs.len() != dim * dim {
            return Err(IoError::CoeffCount {
                id: pd.id,
                expected: dim * dim,
                found: pd.coeffs.len(),
            });
        }
        let coeffs = pd
            .coeffs
            .iter()
            .map(|[x, y]| Ok(Point2::new(value_to_rat(x)?, value_to_rat(y)?)))
            .collect::<Result<Vec<_>, IoError>>()?;
        patches.push(PatchMap::new(
            pd.id,
            TensorSpline::new(space.clone(), space, coeffs)?,
        )?);
    }
    let geometry = detect_topology(patches)?;
    let gluing = match &doc.gluing {
        None => None,
        Some(descs) => {
            let mut out: Vec<Option<GluingData<Rat>>> = vec![None; geometry.interfaces.len()];
            for gd in descs {
                let sa = parse_side(&gd.side_a)?;
                let sb = parse_side(&gd.side_b)?;
                let idx = geometry
                    .interfaces
                    .iter()
                    .position(|itf| matches_interface(itf, gd.patch_a, sa, gd.patch_b, sb))
                    .ok_or(IoError::NoSuchInterface(gd.patch_a, gd.patch_b))?;
                out[idx] = Some(GluingData {
                    a0_l: parse_rat(&gd.a0_l)?,
                    a1_l: parse_rat(&gd.a1_l)?,
                    a0_r: parse_rat(&gd.a0_r)?,
                    a1_r: parse_rat(&gd.a1_r)?,
                    b0_l: parse_rat(&gd.b0_l)?,
                    b1_l: parse_rat(&gd.b1_l)?,
                    b0_r: parse_rat(&gd.b0_r)?,
                    b1_r: parse_rat(&gd.b1_r)?,
                });
            }
            let complete = out.into_iter().collect::<Option<Vec<_>>>();
            match complete {
                Some(v) => Some(v),
                // partial gluing lists are treated as absent
                None => None,
            }
        }
    };
    Ok(ParsedGeometry {
        geometry,
        gluing,
        number_mode: doc.number_mode,
    })
}

/// Lift a float geometry to exact dyadic rationals for serialization.
pub fn geometry_to_rat(geom: &MultiPatch<f64>) -> Result<MultiPatch<Rat>, IoError> {
    let patches = geom
        .patches
        .iter()
        .map(|pm| {
            let space = make_space::<Rat>(
                pm.space().degree(),
                pm.space().regularity(),
                pm.space().inner_knot_count(),
            )?;
            let coeffs = pm
                .geometry
                .coeffs
                .iter()
                .map(|pt| Point2::new(Rat::from_f64(pt.x), Rat::from_f64(pt.y)))
                .collect();
            Ok(PatchMap::new(
                pm.id,
                TensorSpline::new(space.clone(), space, coeffs)?,
            )?)
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    Ok(detect_topology(patches)?)
}
