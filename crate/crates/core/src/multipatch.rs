//! Multi-patch geometry model: patches, interfaces, boundary edges, vertex
//! fans, the interface reparameterization convention and regularity checks.
//!
//! Interfaces follow the convention that both patch maps, after applying the
//! stored reorientation, trace the shared curve as `F(0, v)` with the same
//! v-direction. Reorientations are the eight dihedral symmetries of the
//! parameter square, realized as index symmetries of the control grid (valid
//! because the knot vectors are uniform and symmetric).

use crate::bernstein::{de_casteljau_split, tensor_cell_coeffs};
use crate::scalar::{Point2, Scalar};
use crate::spline::{PatchSpline, SplineError, SplineSpace};
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum MultiPatchError {
    #[error("patch {0} has different spaces in u and v")]
    NonSquareSpace(usize),
    #[error("patches {0} and {1} live in different spline spaces")]
    MixedSpaces(usize, usize),
    #[error("patches {0} and {1} are duplicates")]
    DuplicatePatch(usize, usize),
    #[error("edge {0:?} matches more than one other edge")]
    NonManifoldEdge(EdgeId),
    #[error("edges {0:?} and {1:?} share endpoints but their control polygons differ (partial or incompatible edge match)")]
    PartialEdgeMatch(EdgeId, EdgeId),
    #[error("corner of patch {patch} lies in the interior of edge {edge:?} (T-junction)")]
    TJunction { patch: usize, edge: EdgeId },
    #[error("interface index {0} out of range")]
    NoSuchInterface(usize),
    #[error(transparent)]
    Spline(#[from] SplineError),
}

/// The four sides of the parameter square, following the edge-curve table
/// b_1(t)=(t,0), b_2(t)=(t,1), b_3(t)=(0,t), b_4(t)=(1,t).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Bottom = 1,
    Top = 2,
    Left = 3,
    Right = 4,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Bottom, Side::Top, Side::Left, Side::Right];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// One edge of one patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId {
    pub patch: usize,
    pub side: Side,
}

/// A dihedral symmetry of the parameter square acting on control-grid
/// indices: reflections first, then the optional transpose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GridSymmetry {
    pub reverse_i: bool,
    pub reverse_j: bool,
    pub transpose: bool,
}

impl GridSymmetry {
    pub const IDENTITY: GridSymmetry = GridSymmetry {
        reverse_i: false,
        reverse_j: false,
        transpose: false,
    };

    const ALL: [GridSymmetry; 8] = {
        let mut out = [GridSymmetry::IDENTITY; 8];
        let mut idx = 0;
        let flags = [false, true];
        let mut a = 0;
        while a < 2 {
            let mut b = 0;
            while b < 2 {
                let mut c = 0;
                while c < 2 {
                    out[idx] = GridSymmetry {
                        reverse_i: flags[a],
                        reverse_j: flags[b],
                        transpose: flags[c],
                    };
                    idx += 1;
                    c += 1;
                }
                b += 1;
            }
            a += 1;
        }
        out
    };

    /// Original-grid index that supplies the transformed grid entry (i, j).
    pub fn map_index(&self, n: usize, i: usize, j: usize) -> (usize, usize) {
        let (mut a, mut b) = (i, j);
        if self.reverse_i {
            a = n - a;
        }
        if self.reverse_j {
            b = n - b;
        }
        if self.transpose {
            (b, a)
        } else {
            (a, b)
        }
    }

    /// Symmetry mapping side `m` onto the `u = 0` edge with v along t.
    pub fn for_side(side: Side) -> GridSymmetry {
        match side {
            Side::Left => GridSymmetry::IDENTITY,
            Side::Right => GridSymmetry {
                reverse_i: true,
                reverse_j: false,
                transpose: false,
            },
            Side::Bottom => GridSymmetry {
                reverse_i: false,
                reverse_j: false,
                transpose: true,
            },
            Side::Top => GridSymmetry {
                reverse_i: true,
                reverse_j: false,
                transpose: true,
            },
        }
    }

    /// Composition `self` after `other` (apply `other`, then `self`).
    pub fn compose(&self, other: &GridSymmetry) -> GridSymmetry {
        // the action on two probe indices identifies the group element
        let n = 4usize;
        let probes = [(0usize, 1usize), (1usize, 3usize)];
        let target: Vec<(usize, usize)> = probes
            .iter()
            .map(|&(i, j)| {
                let (a, b) = self.map_index(n, i, j);
                other.map_index(n, a, b)
            })
            .collect();
        for cand in GridSymmetry::ALL {
            if probes
                .iter()
                .zip(&target)
                .all(|(&(i, j), t)| cand.map_index(n, i, j) == *t)
            {
                return cand;
            }
        }
        unreachable!("dihedral group is closed under composition")
    }

    pub fn inverse(&self) -> GridSymmetry {
        for cand in GridSymmetry::ALL {
            if cand.compose(self) == GridSymmetry::IDENTITY {
                return cand;
            }
        }
        unreachable!("dihedral group elements are invertible")
    }

    /// Additional reversal of the v direction in the reoriented frame.
    pub fn then_reverse_v(&self) -> GridSymmetry {
        GridSymmetry {
            reverse_i: false,
            reverse_j: true,
            transpose: false,
        }
        .compose(self)
    }
}

/// A single geometry mapping with its patch id.
#[derive(Clone, PartialEq, Debug)]
pub struct PatchMap<T> {
    pub id: usize,
    pub geometry: PatchSpline<T>,
}

impl<T: Scalar> PatchMap<T> {
    pub fn new(id: usize, geometry: PatchSpline<T>) -> Result<Self, MultiPatchError> {
        if geometry.space_u != geometry.space_v {
            return Err(MultiPatchError::NonSquareSpace(id));
        }
        Ok(PatchMap { id, geometry })
    }

    pub fn space(&self) -> &SplineSpace<T> {
        &self.geometry.space_u
    }

    pub fn grid_n(&self) -> usize {
        self.space().last_index()
    }

    /// Control points along one side, ordered by the edge parameter t.
    pub fn edge_points(&self, side: Side) -> Vec<Point2<T>> {
        let n = self.grid_n();
        (0..=n)
            .map(|t| {
                let (i, j) = match side {
                    Side::Bottom => (t, 0),
                    Side::Top => (t, n),
                    Side::Left => (0, t),
                    Side::Right => (n, t),
                };
                self.geometry.at(i, j).clone()
            })
            .collect()
    }

    /// Apply a grid symmetry, producing the equivalent reparameterized patch.
    pub fn apply_symmetry(&self, sym: &GridSymmetry) -> PatchMap<T> {
        let n = self.grid_n();
        let nv = n + 1;
        let mut coeffs = Vec::with_capacity(nv * nv);
        for i in 0..=n {
            for j in 0..=n {
                let (a, b) = sym.map_index(n, i, j);
                coeffs.push(self.geometry.at(a, b).clone());
            }
        }
        PatchMap {
            id: self.id,
            geometry: PatchSpline::new(
                self.geometry.space_u.clone(),
                self.geometry.space_v.clone(),
                coeffs,
            )
            .expect("symmetry preserves the grid shape"),
        }
    }
}

/// Reparameterize so that the given side becomes the `u = 0` edge.
pub fn reorient_to_interface<T: Scalar>(patch: &PatchMap<T>, side: Side) -> PatchMap<T> {
    patch.apply_symmetry(&GridSymmetry::for_side(side))
}

/// A whole shared edge between two patches, with the reorientations under
/// which both traces coincide as F(0, v).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interface {
    pub edge_a: EdgeId,
    pub edge_b: EdgeId,
    pub orientation_flip: bool,
    pub reorient_a: GridSymmetry,
    pub reorient_b: GridSymmetry,
}

/// A geometric vertex with its (patch, corner) incidences ordered
/// counterclockwise by outgoing direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex<T> {
    pub position: Point2<T>,
    /// (patch id, corner (u0, v0) with u0, v0 in {0, n}).
    pub corners: Vec<(usize, (usize, usize))>,
}

#[derive(Clone, Debug)]
pub struct MultiPatch<T> {
    pub patches: Vec<PatchMap<T>>,
    pub interfaces: Vec<Interface>,
    pub boundary_edges: Vec<EdgeId>,
    pub vertices: Vec<Vertex<T>>,
}

fn points_match<T: Scalar>(a: &Point2<T>, b: &Point2<T>) -> bool {
    if T::EXACT {
        a == b
    } else {
        // float-mode edge matching tolerance
        (a.x.to_f64() - b.x.to_f64()).abs() <= 1e-9 && (a.y.to_f64() - b.y.to_f64()).abs() <= 1e-9
    }
}

fn edges_match<T: Scalar>(a: &[Point2<T>], b: &[Point2<T>]) -> Option<bool> {
    if a.iter().zip(b).all(|(x, y)| points_match(x, y)) {
        return Some(false);
    }
    if a.iter().zip(b.iter().rev()).all(|(x, y)| points_match(x, y)) {
        return Some(true);
    }
    None
}

/// Identify interfaces, boundary edges and vertex fans of a patch
/// collection. In float mode, matched control points are snapped to their
/// mean so that downstream trace equalities hold exactly.
pub fn detect_topology<T: Scalar>(
    patches: Vec<PatchMap<T>>,
) -> Result<MultiPatch<T>, MultiPatchError> {
    let mut patches = patches;
    for p in &patches {
        if p.geometry.space_u != p.geometry.space_v {
            return Err(MultiPatchError::NonSquareSpace(p.id));
        }
    }
    for a in 0..patches.len() {
        for b in a + 1..patches.len() {
            if patches[a].space() != patches[b].space() {
                return Err(MultiPatchError::MixedSpaces(patches[a].id, patches[b].id));
            }
            if patches[a].geometry.coeffs == patches[b].geometry.coeffs {
                return Err(MultiPatchError::DuplicatePatch(patches[a].id, patches[b].id));
            }
        }
    }

    let all_edges: Vec<EdgeId> = patches
        .iter()
        .flat_map(|p| Side::ALL.iter().map(move |&s| EdgeId { patch: p.id, side: s }))
        .collect();
    fn idx_in<T>(patches: &[PatchMap<T>], pid: usize) -> usize {
        patches.iter().position(|p| p.id == pid).unwrap()
    }
    let idx_of = |pid: usize| idx_in(&patches, pid);

    // pair up matching edges
    let mut partner: Vec<Option<(usize, bool)>> = vec![None; all_edges.len()];
    for ea in 0..all_edges.len() {
        for eb in ea + 1..all_edges.len() {
            if all_edges[ea].patch == all_edges[eb].patch {
                continue;
            }
            let pa = &patches[idx_of(all_edges[ea].patch)];
            let pb = &patches[idx_of(all_edges[eb].patch)];
            let pts_a = pa.edge_points(all_edges[ea].side);
            let pts_b = pb.edge_points(all_edges[eb].side);
            if let Some(flipped) = edges_match(&pts_a, &pts_b) {
                if partner[ea].is_some() {
                    return Err(MultiPatchError::NonManifoldEdge(all_edges[ea]));
                }
                if partner[eb].is_some() {
                    return Err(MultiPatchError::NonManifoldEdge(all_edges[eb]));
                }
                partner[ea] = Some((eb, flipped));
                partner[eb] = Some((ea, flipped));
            }
        }
    }

    // guard against partial edge matches: distinct unmatched edges sharing
    // both endpoints must be identical, sharing the paper's assumption
    for ea in 0..all_edges.len() {
        if partner[ea].is_some() {
            continue;
        }
        for eb in ea + 1..all_edges.len() {
            if partner[eb].is_some() || all_edges[ea].patch == all_edges[eb].patch {
                continue;
            }
            let pa = &patches[idx_of(all_edges[ea].patch)];
            let pb = &patches[idx_of(all_edges[eb].patch)];
            let pts_a = pa.edge_points(all_edges[ea].side);
            let pts_b = pb.edge_points(all_edges[eb].side);
            let ends_a = [pts_a.first().unwrap(), pts_a.last().unwrap()];
            let ends_b = [pts_b.first().unwrap(), pts_b.last().unwrap()];
            let shared = ends_a
                .iter()
                .filter(|x| ends_b.iter().any(|y| points_match(x, y)))
                .count();
            if shared == 2 {
                return Err(MultiPatchError::PartialEdgeMatch(all_edges[ea], all_edges[eb]));
            }
        }
    }

    // T-junction guard: a corner of one patch sitting at the midpoint of an
    // unmatched edge of another
    let half = T::from_ratio(1, 2);
    for (e, eid) in all_edges.iter().enumerate() {
        if partner[e].is_some() {
            continue;
        }
        let pe = &patches[idx_of(eid.patch)];
        let re = reorient_to_interface(pe, eid.side);
        let mid = re
            .geometry
            .restrict_u(&T::zero())
            .and_then(|c| c.eval(&half, 0))
            .map_err(MultiPatchError::Spline)?;
        for p in &patches {
            if p.id == eid.patch {
                continue;
            }
            let n = p.grid_n();
            for (ci, cj) in [(0, 0), (n, 0), (0, n), (n, n)] {
                if points_match(p.geometry.at(ci, cj), &mid) {
                    return Err(MultiPatchError::TJunction {
                        patch: p.id,
                        edge: *eid,
                    });
                }
            }
        }
    }

    // snap matched control points in float mode
    if !T::EXACT {
        for ea in 0..all_edges.len() {
            let Some((eb, flipped)) = partner[ea] else { continue };
            if eb < ea {
                continue;
            }
            let ia = idx_in(&patches, all_edges[ea].patch);
            let ib = idx_in(&patches, all_edges[eb].patch);
            let n = patches[ia].grid_n();
            for t in 0..=n {
                let tb = if flipped { n - t } else { t };
                let pa = edge_grid_index(all_edges[ea].side, n, t);
                let pb = edge_grid_index(all_edges[eb].side, n, tb);
                let mean = patches[ia]
                    .geometry
                    .at(pa.0, pa.1)
                    .add(patches[ib].geometry.at(pb.0, pb.1))
                    .scale(&half);
                patches[ia].geometry.set(pa.0, pa.1, mean.clone());
                patches[ib].geometry.set(pb.0, pb.1, mean);
            }
        }
    }

    // assemble interfaces sorted by (min patch id, max patch id, sides)
    let mut interfaces = Vec::new();
    for ea in 0..all_edges.len() {
        let Some((eb, flipped)) = partner[ea] else { continue };
        if eb < ea {
            continue;
        }
        let (mut first, mut second) = (all_edges[ea], all_edges[eb]);
        if second.patch < first.patch {
            std::mem::swap(&mut first, &mut second);
        }
        let reorient_a = GridSymmetry::for_side(first.side);
        let mut reorient_b = GridSymmetry::for_side(second.side);
        if flipped {
            reorient_b = reorient_b.then_reverse_v();
        }
        interfaces.push(Interface {
            edge_a: first,
            edge_b: second,
            orientation_flip: flipped,
            reorient_a,
            reorient_b,
        });
    }
    interfaces.sort_by_key(|itf| {
        (
            itf.edge_a.patch.min(itf.edge_b.patch),
            itf.edge_a.patch.max(itf.edge_b.patch),
            itf.edge_a.side,
            itf.edge_b.side,
        )
    });

    let boundary_edges: Vec<EdgeId> = all_edges
        .iter()
        .enumerate()
        .filter(|(e, _)| partner[*e].is_none())
        .map(|(_, id)| *id)
        .collect();

    let vertices = collect_vertices(&patches)?;

    Ok(MultiPatch {
        patches,
        interfaces,
        boundary_edges,
        vertices,
    })
}

fn edge_grid_index(side: Side, n: usize, t: usize) -> (usize, usize) {
    match side {
        Side::Bottom => (t, 0),
        Side::Top => (t, n),
        Side::Left => (0, t),
        Side::Right => (n, t),
    }
}

fn collect_vertices<T: Scalar>(
    patches: &[PatchMap<T>],
) -> Result<Vec<Vertex<T>>, MultiPatchError> {
    let mut vertices: Vec<Vertex<T>> = Vec::new();
    for p in patches {
        let n = p.grid_n();
        for (ci, cj) in [(0usize, 0usize), (n, 0), (n, n), (0, n)] {
            let pos = p.geometry.at(ci, cj).clone();
            if let Some(v) = vertices
                .iter_mut()
                .find(|v| points_match(&v.position, &pos))
            {
                v.corners.push((p.id, (ci, cj)));
            } else {
                vertices.push(Vertex {
                    position: pos,
                    corners: vec![(p.id, (ci, cj))],
                });
            }
        }
    }
    // counterclockwise fan order by the corner's diagonal direction
    for v in &mut vertices {
        let mut keyed: Vec<(f64, (usize, (usize, usize)))> = v
            .corners
            .iter()
            .map(|&(pid, (ci, cj))| {
                let p = patches.iter().find(|p| p.id == pid).unwrap();
                let n = p.grid_n();
                let ni = if ci == 0 { 1 } else { n - 1 };
                let nj = if cj == 0 { 1 } else { n - 1 };
                let du = p.geometry.at(ni, cj).sub(p.geometry.at(ci, cj));
                let dv = p.geometry.at(ci, nj).sub(p.geometry.at(ci, cj));
                let dir = du.add(&dv);
                let ang = dir.y.to_f64().atan2(dir.x.to_f64());
                (ang, (pid, (ci, cj)))
            })
            .collect();
        keyed.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.cmp(&b.1))
        });
        v.corners = keyed.into_iter().map(|(_, c)| c).collect();
    }
    vertices.sort_by(|a, b| a.corners.cmp(&b.corners));
    Ok(vertices)
}

impl<T: Scalar> MultiPatch<T> {
    pub fn patch(&self, id: usize) -> &PatchMap<T> {
        self.patches
            .iter()
            .find(|p| p.id == id)
            .expect("patch ids are validated at construction")
    }

    pub fn space(&self) -> &SplineSpace<T> {
        self.patches[0].space()
    }

    /// The two reoriented patch maps of an interface; both have the shared
    /// curve as their `u = 0` trace with matching v-direction.
    pub fn reoriented_pair(&self, itf: &Interface) -> (PatchMap<T>, PatchMap<T>) {
        let a = self.patch(itf.edge_a.patch).apply_symmetry(&itf.reorient_a);
        let b = self.patch(itf.edge_b.patch).apply_symmetry(&itf.reorient_b);
        (a, b)
    }
}

/// Verdict of the sampled + certified Jacobian sign check.
#[derive(Debug, Clone, PartialEq)]
pub enum Regularity {
    Regular,
    /// Locations (u, v) where the Jacobian determinant vanishes, changes
    /// sign, or could not be certified by coefficient hulls.
    Suspect(Vec<(f64, f64)>),
}

/// Check patch regularity: the Jacobian determinant is sampled on a dense
/// grid and certified per cell through the Bernstein coefficient hull, with
/// up to three rounds of subdivision for ambiguous cells.
pub fn check_regularity<T: Scalar>(
    patch: &PatchMap<T>,
    samples_per_span: usize,
) -> Result<Regularity, MultiPatchError> {
    let samples_per_span = samples_per_span.max(2);
    let fu = patch.geometry.derivative_u()?;
    let fv = patch.geometry.derivative_v()?;
    let det = |u: &T, v: &T| -> Result<T, SplineError> {
        Ok(fu.eval(u, v, 0, 0)?.cross(&fv.eval(u, v, 0, 0)?))
    };

    let breaks = patch.space().breaks();
    let mut suspects: Vec<(f64, f64)> = Vec::new();
    let mut sign: Option<bool> = None;

    // dense sampling
    let cells = breaks.len() - 1;
    for ci in 0..cells {
        for cj in 0..cells {
            for a in 0..samples_per_span {
                for b in 0..samples_per_span {
                    let frac = |q: usize| T::from_ratio((2 * q + 1) as i64, (2 * samples_per_span) as i64);
                    let u = breaks[ci].clone()
                        + (breaks[ci + 1].clone() - breaks[ci].clone()) * frac(a);
                    let v = breaks[cj].clone()
                        + (breaks[cj + 1].clone() - breaks[cj].clone()) * frac(b);
                    let d = det(&u, &v)?;
                    let here = if d.near_zero() {
                        None
                    } else {
                        Some(d.is_positive())
                    };
                    match (sign, here) {
                        (_, None) => suspects.push((u.to_f64(), v.to_f64())),
                        (None, Some(s)) => sign = Some(s),
                        (Some(s0), Some(s)) if s0 != s => {
                            suspects.push((u.to_f64(), v.to_f64()))
                        }
                        _ => {}
                    }
                }
            }
        }
    }

    let Some(sign) = sign else {
        return Ok(Regularity::Suspect(vec![(0.5, 0.5)]));
    };

    // coefficient-hull certification per cell
    let p = patch.space().degree();
    let deg = 2 * p - 1;
    for ci in 0..cells {
        for cj in 0..cells {
            let grid = tensor_cell_coeffs(
                |u, v| det(u, v).expect("in-domain evaluation"),
                (&breaks[ci], &breaks[ci + 1]),
                (&breaks[cj], &breaks[cj + 1]),
                (deg, deg),
            )?;
            if !certify_cell(&grid, sign, 3) {
                let cu = (breaks[ci].to_f64() + breaks[ci + 1].to_f64()) / 2.0;
                let cv = (breaks[cj].to_f64() + breaks[cj + 1].to_f64()) / 2.0;
                suspects.push((cu, cv));
            }
        }
    }

    suspects.dedup();
    if suspects.is_empty() {
        Ok(Regularity::Regular)
    } else {
        Ok(Regularity::Suspect(suspects))
    }
}

fn certify_cell<T: Scalar>(grid: &[Vec<T>], positive: bool, rounds_left: usize) -> bool {
    let uniform = grid.iter().flatten().all(|c| {
        !c.near_zero() && (c.is_positive() == positive)
    });
    if uniform {
        return true;
    }
    if rounds_left == 0 {
        return false;
    }
    let half = T::from_ratio(1, 2);
    // split in u (outer index), then each half in v
    let (u_lo, u_hi) = split_grid_u(grid, &half);
    for part in [u_lo, u_hi] {
        let (v_lo, v_hi) = split_grid_v(&part, &half);
        for quad in [v_lo, v_hi] {
            if !certify_cell(&quad, positive, rounds_left - 1) {
                return false;
            }
        }
    }
    true
}

fn split_grid_u<T: Scalar>(grid: &[Vec<T>], s: &T) -> (Vec<Vec<T>>, Vec<Vec<T>>) {
    let rows = grid.len();
    let cols = grid[0].len();
    let mut lo = vec![vec![T::zero(); cols]; rows];
    let mut hi = vec![vec![T::zero(); cols]; rows];
    for j in 0..cols {
        let col: Vec<T> = (0..rows).map(|i| grid[i][j].clone()).collect();
        let (l, h) = de_casteljau_split(&col, s);
        for i in 0..rows {
            lo[i][j] = l[i].clone();
            hi[i][j] = h[i].clone();
        }
    }
    (lo, hi)
}

fn split_grid_v<T: Scalar>(grid: &[Vec<T>], s: &T) -> (Vec<Vec<T>>, Vec<Vec<T>>) {
    let mut lo = Vec::with_capacity(grid.len());
    let mut hi = Vec::with_capacity(grid.len());
    for row in grid {
        let (l, h) = de_casteljau_split(row, s);
        lo.push(l);
        hi.push(h);
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rat};
    use crate::spline::{make_space, TensorSpline};
    use num_traits::{One, Zero};

    /// Bilinear patch from corners at (u,v) = (0,0), (1,0), (0,1), (1,1).
    fn bilinear(
        id: usize,
        c00: (i64, i64),
        c10: (i64, i64),
        c01: (i64, i64),
        c11: (i64, i64),
    ) -> PatchMap<Rat> {
        let s = make_space::<Rat>(1, 0, 0).unwrap();
        let pt = |(x, y): (i64, i64)| Point2::new(Rat::from_int(x), Rat::from_int(y));
        // row-major over u: (0,0), (0,1), (1,0), (1,1)
        let coeffs = vec![pt(c00), pt(c01), pt(c10), pt(c11)];
        PatchMap::new(id, TensorSpline::new(s.clone(), s, coeffs).unwrap()).unwrap()
    }

    fn unit_square(id: usize, ox: i64, oy: i64) -> PatchMap<Rat> {
        bilinear(
            id,
            (ox, oy),
            (ox + 1, oy),
            (ox, oy + 1),
            (ox + 1, oy + 1),
        )
    }

    /// Parameter transform matching a grid symmetry.
    fn param_of_sym(sym: &GridSymmetry, u: &Rat, v: &Rat) -> (Rat, Rat) {
        let mut a = u.clone();
        let mut b = v.clone();
        if sym.reverse_i {
            a = Rat::one() - a;
        }
        if sym.reverse_j {
            b = Rat::one() - b;
        }
        if sym.transpose {
            (b, a)
        } else {
            (a, b)
        }
    }

    #[test]
    fn two_squares_topology() {
        let mp = detect_topology(vec![unit_square(0, 0, 0), unit_square(1, 1, 0)]).unwrap();
        assert_eq!(mp.interfaces.len(), 1);
        assert_eq!(mp.boundary_edges.len(), 6);
        assert_eq!(mp.vertices.len(), 6);
        let itf = &mp.interfaces[0];
        assert_eq!(itf.edge_a, EdgeId { patch: 0, side: Side::Right });
        assert_eq!(itf.edge_b, EdgeId { patch: 1, side: Side::Left });
        assert!(!itf.orientation_flip);
        // shared-edge vertices have two incidences each
        let shared: Vec<_> = mp
            .vertices
            .iter()
            .filter(|v| v.corners.len() == 2)
            .collect();
        assert_eq!(shared.len(), 2);
    }

    #[test]
    fn single_patch_topology() {
        let mp = detect_topology(vec![unit_square(0, 0, 0)]).unwrap();
        assert!(mp.interfaces.is_empty());
        assert_eq!(mp.boundary_edges.len(), 4);
        assert_eq!(mp.vertices.len(), 4);
    }

    #[test]
    fn plus_shape_topology() {
        let mp = detect_topology(vec![
            unit_square(0, 0, 0),
            unit_square(1, 1, 0),
            unit_square(2, -1, 0),
            unit_square(3, 0, 1),
            unit_square(4, 0, -1),
        ])
        .unwrap();
        assert_eq!(mp.interfaces.len(), 4);
        assert_eq!(mp.boundary_edges.len(), 12);
        assert_eq!(mp.vertices.len(), 12);
        // the four corners of the center square have valence 3
        let triple = mp.vertices.iter().filter(|v| v.corners.len() == 3).count();
        assert_eq!(triple, 4);
    }

    #[test]
    fn duplicate_patch_detected() {
        let err = detect_topology(vec![unit_square(0, 0, 0), unit_square(1, 0, 0)]);
        assert!(matches!(err, Err(MultiPatchError::DuplicatePatch(0, 1))));
    }

    #[test]
    fn mixed_spaces_detected() {
        let s2 = make_space::<Rat>(2, 1, 0).unwrap();
        let mut coeffs = Vec::new();
        for i in 0..s2.dim() {
            for j in 0..s2.dim() {
                coeffs.push(Point2::new(rat(i as i64 + 4, 2), rat(j as i64, 2)));
            }
        }
        let quadratic =
            PatchMap::new(1, TensorSpline::new(s2.clone(), s2, coeffs).unwrap()).unwrap();
        let err = detect_topology(vec![unit_square(0, 0, 0), quadratic]);
        assert!(matches!(err, Err(MultiPatchError::MixedSpaces(0, 1))));
    }

    #[test]
    fn non_manifold_edge_detected() {
        // two distinct patches glued to the same edge of patch 0
        let a = unit_square(0, 0, 0);
        let b = unit_square(1, 1, 0);
        let c = bilinear(2, (1, 0), (2, -1), (1, 1), (2, 2));
        let err = detect_topology(vec![a, b, c]);
        assert!(matches!(err, Err(MultiPatchError::NonManifoldEdge(_))));
    }

    #[test]
    fn t_junction_detected() {
        // tall patch on the left, two stacked squares on the right
        let tall = bilinear(0, (0, 0), (1, 0), (0, 2), (1, 2));
        let low = unit_square(1, 1, 0);
        let high = unit_square(2, 1, 1);
        let err = detect_topology(vec![tall, low, high]);
        assert!(matches!(err, Err(MultiPatchError::TJunction { .. })));
    }

    #[test]
    fn partial_edge_match_detected() {
        let s = make_space::<Rat>(2, 1, 0).unwrap();
        let square = |id: usize, ox: i64| {
            let mut coeffs = Vec::new();
            for i in 0..3i64 {
                for j in 0..3i64 {
                    coeffs.push(Point2::new(rat(2 * ox + i, 2), rat(j, 2)));
                }
            }
            PatchMap::new(id, TensorSpline::new(s.clone(), s.clone(), coeffs).unwrap()).unwrap()
        };
        let a = square(0, 0);
        let mut b = square(1, 1);
        // bulge the middle control point of b's left edge off the shared line
        b.geometry.set(0, 1, Point2::new(rat(3, 2), rat(1, 2)));
        let err = detect_topology(vec![a, b]);
        assert!(matches!(err, Err(MultiPatchError::PartialEdgeMatch(_, _))));
    }

    #[test]
    fn reorientation_moves_side_to_left() {
        let p = bilinear(0, (0, 0), (3, 1), (-1, 2), (4, 5));
        for side in Side::ALL {
            let r = reorient_to_interface(&p, side);
            assert_eq!(r.edge_points(Side::Left), p.edge_points(side));
        }
    }

    #[test]
    fn reorientation_preserves_the_map() {
        // F_new(u, v) = F_old(phi(u, v)) for every dihedral symmetry
        let s = make_space::<Rat>(2, 1, 1).unwrap();
        let mut coeffs = Vec::new();
        for i in 0..s.dim() {
            for j in 0..s.dim() {
                coeffs.push(Point2::new(
                    rat((3 * i + j * j) as i64, 5),
                    rat((i * i + 2 * j) as i64 + 1, 7),
                ));
            }
        }
        let p = PatchMap::new(0, TensorSpline::new(s.clone(), s, coeffs).unwrap()).unwrap();
        let samples = [
            (rat(0, 1), rat(0, 1)),
            (rat(1, 3), rat(2, 5)),
            (rat(1, 2), rat(1, 7)),
            (rat(4, 5), rat(9, 10)),
            (rat(1, 1), rat(1, 1)),
        ];
        for sym in [
            GridSymmetry::IDENTITY,
            GridSymmetry::for_side(Side::Bottom),
            GridSymmetry::for_side(Side::Top),
            GridSymmetry::for_side(Side::Right),
            GridSymmetry::for_side(Side::Right).then_reverse_v(),
            GridSymmetry::for_side(Side::Bottom).then_reverse_v(),
        ] {
            let q = p.apply_symmetry(&sym);
            for (u, v) in &samples {
                let (a, b) = param_of_sym(&sym, u, v);
                assert_eq!(
                    q.geometry.eval(u, v, 0, 0).unwrap(),
                    p.geometry.eval(&a, &b, 0, 0).unwrap()
                );
            }
        }
    }

    #[test]
    fn symmetry_group_axioms() {
        let mut elems = Vec::new();
        for side in Side::ALL {
            elems.push(GridSymmetry::for_side(side));
            elems.push(GridSymmetry::for_side(side).then_reverse_v());
        }
        for e in &elems {
            assert_eq!(e.inverse().compose(e), GridSymmetry::IDENTITY);
            assert_eq!(e.compose(&e.inverse()), GridSymmetry::IDENTITY);
        }
        // applying a symmetry and then its inverse restores the patch
        let p = bilinear(0, (0, 0), (3, 1), (-1, 2), (4, 5));
        for e in &elems {
            let there = p.apply_symmetry(e);
            let back = there.apply_symmetry(&e.inverse());
            assert_eq!(back.geometry.coeffs, p.geometry.coeffs);
        }
    }

    #[test]
    fn interface_traces_agree_after_reorientation() {
        // squares glued with deliberately different sides facing each other
        let a = unit_square(0, 0, 0);
        // patch 1 sits to the right but parameterized rotated: its Top edge is shared
        let b = bilinear(1, (2, 0), (2, 1), (1, 0), (1, 1));
        assert_eq!(b.edge_points(Side::Top), vec![
            Point2::new(Rat::one(), Rat::zero()),
            Point2::new(Rat::one(), Rat::one()),
        ]);
        let mp = detect_topology(vec![a, b]).unwrap();
        assert_eq!(mp.interfaces.len(), 1);
        let (ra, rb) = mp.reoriented_pair(&mp.interfaces[0]);
        assert_eq!(ra.edge_points(Side::Left), rb.edge_points(Side::Left));
    }

    #[test]
    fn regularity_of_affine_patch() {
        let p = unit_square(0, 0, 0);
        assert_eq!(check_regularity(&p, 3).unwrap(), Regularity::Regular);
    }

    #[test]
    fn regularity_of_convex_bilinear_quad() {
        let p = bilinear(0, (0, 0), (2, 0), (0, 1), (3, 2));
        assert_eq!(check_regularity(&p, 3).unwrap(), Regularity::Regular);
    }

    #[test]
    fn fold_map_is_suspect() {
        // F(u,v) = ((u - 1/2)^2, v): Jacobian determinant 2(u - 1/2) vanishes
        // along u = 1/2
        let s = make_space::<Rat>(2, 2, 0).unwrap();
        let xs = [rat(1, 4), rat(-1, 4), rat(1, 4)];
        let ys = [Rat::zero(), rat(1, 2), Rat::one()];
        let mut coeffs = Vec::new();
        for x in &xs {
            for y in &ys {
                coeffs.push(Point2::new(x.clone(), y.clone()));
            }
        }
        let p = PatchMap::new(0, TensorSpline::new(s.clone(), s, coeffs).unwrap()).unwrap();
        match check_regularity(&p, 4).unwrap() {
            Regularity::Suspect(locs) => {
                assert!(locs.iter().any(|(u, _)| (u - 0.5).abs() < 0.3));
            }
            Regularity::Regular => panic!("fold map certified regular"),
        }
    }

    #[test]
    fn orientation_flip_recorded() {
        // patch 1's left edge runs in the opposite v-direction
        let a = unit_square(0, 0, 0);
        let b = bilinear(1, (1, 1), (2, 1), (1, 0), (2, 0));
        let mp = detect_topology(vec![a, b]).unwrap();
        assert_eq!(mp.interfaces.len(), 1);
        assert!(mp.interfaces[0].orientation_flip);
        let (ra, rb) = mp.reoriented_pair(&mp.interfaces[0]);
        assert_eq!(ra.edge_points(Side::Left), rb.edge_points(Side::Left));
    }
}
