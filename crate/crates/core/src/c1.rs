//! C1 isogeometric spaces over AS-G1 multi-patch geometries.
//!
//! An isogeometric function is stored through its pull-backs g = phi o F
//! on each patch, one scalar coefficient grid per patch. The function is C1
//! across an interface exactly when the grids satisfy the trace equality and
//! the graph-G1 row of the interface's gluing data. A basis of the full C1
//! space is obtained from an exact null-space computation organised as a
//! minimal determining set: every basis function sets one free coefficient
//! to one and the coupled coefficients follow.

use crate::gluing::{
    compute_exact_gluing, global_bernstein_to_piecewise, gluing_residual, GluingData, GluingError,
};
use crate::multipatch::{Interface, MultiPatch, MultiPatchError};
use crate::scalar::Scalar;
use crate::spline::{
    make_space, ScalarTensorSpline, Spline, SplineError, SplineSpace, TensorSpline,
};
use crate::bernstein::PiecewiseBernstein;
use serde::Serialize;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum C1Error {
    #[error("interface {0} does not glue exactly with the supplied data; the geometry is not AS-G1 as given")]
    NotAsG1(usize),
    #[error("singular Jacobian at the evaluation point")]
    SingularJacobian,
    #[error("no patch with id {0}")]
    NoSuchPatch(usize),
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error(transparent)]
    Gluing(#[from] GluingError),
    #[error(transparent)]
    MultiPatch(#[from] MultiPatchError),
}

/// Classification of a basis function by the columns it touches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BasisClass {
    Interior,
    Interface,
    Vertex,
}

/// Per-patch coefficient grids of one isogeometric function.
#[derive(Clone, Debug)]
pub struct IsoFunctionCoeffs<T> {
    pub grids: Vec<ScalarTensorSpline<T>>,
}

/// One basis function in sparse column form; `free_col` is the minimal
/// determining coefficient (value one, unique to this function).
#[derive(Clone, Debug)]
pub struct SparseFn<T> {
    pub free_col: usize,
    pub entries: Vec<(usize, T)>,
}

/// Basis of the C1 isogeometric space at one refinement level.
#[derive(Clone, Debug)]
pub struct C1Basis<T> {
    pub space: SplineSpace<T>,
    pub level: usize,
    pub patch_ids: Vec<usize>,
    pub functions: Vec<SparseFn<T>>,
    pub classes: Vec<BasisClass>,
}

impl<T: Scalar> C1Basis<T> {
    pub fn dim(&self) -> usize {
        self.functions.len()
    }

    /// Global scalar column of coefficient (i, j) of the patch at `pos`.
    pub fn col(&self, pos: usize, i: usize, j: usize) -> usize {
        let d = self.space.dim();
        (pos * d + i) * d + j
    }

    pub fn decode(&self, col: usize) -> (usize, usize, usize) {
        let d = self.space.dim();
        (col / (d * d), (col / d) % d, col % d)
    }

    /// Materialize one basis function as per-patch coefficient grids.
    pub fn to_grids(&self, idx: usize) -> Result<IsoFunctionCoeffs<T>, C1Error> {
        self.grids_from_entries(&self.functions[idx].entries)
    }

    fn grids_from_entries(&self, entries: &[(usize, T)]) -> Result<IsoFunctionCoeffs<T>, C1Error> {
        let d = self.space.dim();
        let mut flats = vec![vec![T::zero(); d * d]; self.patch_ids.len()];
        for (col, val) in entries {
            let (pos, i, j) = self.decode(*col);
            flats[pos][i * d + j] = val.clone();
        }
        let grids = flats
            .into_iter()
            .map(|f| TensorSpline::new(self.space.clone(), self.space.clone(), f))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(IsoFunctionCoeffs { grids })
    }

    /// Exact representation of target per-patch grids in the basis: read the
    /// candidate coefficients off the free columns and verify every other
    /// coefficient matches. Returns `None` when the target is not in the
    /// space.
    pub fn represent(&self, target: &[ScalarTensorSpline<T>]) -> Option<Vec<T>> {
        let d = self.space.dim();
        let total = self.patch_ids.len() * d * d;
        let mut tv = vec![T::zero(); total];
        for (pos, grid) in target.iter().enumerate() {
            for i in 0..d {
                for j in 0..d {
                    tv[self.col(pos, i, j)] = grid.at(i, j).clone();
                }
            }
        }
        let coeffs: Vec<T> = self
            .functions
            .iter()
            .map(|f| tv[f.free_col].clone())
            .collect();
        let mut recon = vec![T::zero(); total];
        for (f, c) in self.functions.iter().zip(&coeffs) {
            if c.near_zero() {
                continue;
            }
            for (col, val) in &f.entries {
                recon[*col] = recon[*col].clone() + c.clone() * val.clone();
            }
        }
        for (a, b) in recon.iter().zip(&tv) {
            if !a.near_eq(b) {
                return None;
            }
        }
        Some(coeffs)
    }
}

/// The scalar spline space at refinement level L: same degree and
/// regularity as the geometry space, mesh size h0 / 2^L.
pub fn level_space<T: Scalar>(
    geom_space: &SplineSpace<T>,
    level: usize,
) -> Result<SplineSpace<T>, SplineError> {
    let spans = (geom_space.inner_knot_count() + 1) << level;
    make_space(geom_space.degree(), geom_space.regularity(), spans - 1)
}

/// Gluing functions of one interface expressed on the breaks of the scalar
/// space; for fitted linear data the degrees are (1, 1, 2), while exact
/// gluing functions of a non-AS-G1 geometry carry higher degrees.
#[derive(Clone, Debug)]
pub struct GluingSplines<T> {
    pub alpha_l: PiecewiseBernstein<T>,
    pub alpha_r: PiecewiseBernstein<T>,
    pub beta: PiecewiseBernstein<T>,
}

impl<T: Scalar> GluingSplines<T> {
    /// Linear/quadratic gluing data expanded on the given breaks.
    pub fn from_data(data: &GluingData<T>, breaks: &[T]) -> Self {
        GluingSplines {
            alpha_l: global_bernstein_to_piecewise(
                &[data.a0_l.clone(), data.a1_l.clone()],
                breaks,
            ),
            alpha_r: global_bernstein_to_piecewise(
                &[data.a0_r.clone(), data.a1_r.clone()],
                breaks,
            ),
            beta: global_bernstein_to_piecewise(&data.beta_bernstein(), breaks),
        }
    }
}

/// Homogeneous graph-G1 rows of one interface on the scalar grids at the
/// given space: trace equality plus the per-span Bernstein coefficients of
/// `alpha_r D_u g_l(0,.) - alpha_l D_u g_r(0,.) + beta (d/dv) g(0,.)`.
fn graph_g1_rows<T: Scalar>(
    itf: &Interface,
    glue: &GluingSplines<T>,
    space: &SplineSpace<T>,
    patch_pos: &HashMap<usize, usize>,
    col: &impl Fn(usize, usize, usize) -> usize,
) -> Result<Vec<Vec<(usize, T)>>, C1Error> {
    let n = space.last_index();
    let p = space.degree();
    let k = space.inner_knot_count();
    let tau = space.knots()[p + 1].clone() - space.knots()[1].clone();
    let du_factor = T::from_int(p as i64) / tau;

    let pos_a = patch_pos[&itf.edge_a.patch];
    let pos_b = patch_pos[&itf.edge_b.patch];
    let orig_a = |i: usize, j: usize| itf.reorient_a.map_index(n, i, j);
    let orig_b = |i: usize, j: usize| itf.reorient_b.map_index(n, i, j);

    let mut rows: Vec<Vec<(usize, T)>> = Vec::new();
    for j in 0..=n {
        let (ai, aj) = orig_a(0, j);
        let (bi, bj) = orig_b(0, j);
        rows.push(vec![
            (col(pos_a, ai, aj), T::one()),
            (col(pos_b, bi, bj), -T::one()),
        ]);
    }

    let alpha_l = &glue.alpha_l;
    let alpha_r = &glue.alpha_r;
    let beta = &glue.beta;

    // residual degree: the largest product degree appearing in the rows
    let res_deg = (alpha_l.degree.max(alpha_r.degree) + p)
        .max(beta.degree + p.saturating_sub(1));
    let nres = (k + 1) * (res_deg + 1);
    let mut span_rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); nres];
    let mut emit = |pattern: &PiecewiseBernstein<T>, c: usize| {
        let elevated = pattern.elevated(res_deg);
        for (s, span) in elevated.spans.iter().enumerate() {
            for (b, coeff) in span.iter().enumerate() {
                if !coeff.near_zero() {
                    span_rows[s * (res_deg + 1) + b].push((c, coeff.clone()));
                }
            }
        }
    };

    for j in 0..=n {
        let mut coeffs = vec![T::zero(); space.dim()];
        coeffs[j] = T::one();
        let nj: Spline<T, T> = Spline::new(space.clone(), coeffs)?;
        let bnj = PiecewiseBernstein::from_spline(&nj)?;
        let bdnj = PiecewiseBernstein::from_spline(&nj.derivative()?)?;

        let (ai, aj) = orig_a(0, j);
        let pat = alpha_r
            .mul(&bnj)?
            .scale(&-du_factor.clone())
            .add(&beta.mul(&bdnj)?)?;
        emit(&pat, col(pos_a, ai, aj));
        let (ai, aj) = orig_a(1, j);
        emit(&alpha_r.mul(&bnj)?.scale(&du_factor), col(pos_a, ai, aj));
        let (bi, bj) = orig_b(0, j);
        emit(&alpha_l.mul(&bnj)?.scale(&du_factor), col(pos_b, bi, bj));
        let (bi, bj) = orig_b(1, j);
        emit(
            &alpha_l.mul(&bnj)?.scale(&-du_factor.clone()),
            col(pos_b, bi, bj),
        );
    }

    for mut row in span_rows {
        merge_terms(&mut row);
        if !row.is_empty() {
            rows.push(row);
        }
    }
    Ok(rows)
}

fn merge_terms<T: Scalar>(row: &mut Vec<(usize, T)>) {
    row.sort_by_key(|(c, _)| *c);
    let mut merged: Vec<(usize, T)> = Vec::with_capacity(row.len());
    for (c, v) in row.drain(..) {
        if let Some((lc, lv)) = merged.last_mut() {
            if *lc == c {
                *lv = lv.clone() + v;
                continue;
            }
        }
        merged.push((c, v));
    }
    merged.retain(|(_, v)| !v.near_zero());
    *row = merged;
}

/// All homogeneous C1 rows over the scalar grids at the given space.
pub fn c1_rows<T: Scalar>(
    geom: &MultiPatch<T>,
    gluing: &[GluingData<T>],
    space: &SplineSpace<T>,
) -> Result<Vec<Vec<(usize, T)>>, C1Error> {
    let breaks = space.breaks();
    let splines: Vec<GluingSplines<T>> = gluing
        .iter()
        .map(|d| GluingSplines::from_data(d, &breaks))
        .collect();
    c1_rows_from_splines(geom, &splines, space)
}

/// As [`c1_rows`], with gluing functions of arbitrary degree.
pub fn c1_rows_from_splines<T: Scalar>(
    geom: &MultiPatch<T>,
    gluing: &[GluingSplines<T>],
    space: &SplineSpace<T>,
) -> Result<Vec<Vec<(usize, T)>>, C1Error> {
    let patch_pos: HashMap<usize, usize> = geom
        .patches
        .iter()
        .enumerate()
        .map(|(pos, p)| (p.id, pos))
        .collect();
    let d = space.dim();
    let col = |pos: usize, i: usize, j: usize| (pos * d + i) * d + j;
    let mut rows = Vec::new();
    for (itf, glue) in geom.interfaces.iter().zip(gluing) {
        rows.extend(graph_g1_rows(itf, glue, space, &patch_pos, &col)?);
    }
    Ok(rows)
}

/// Exact gluing functions of every interface, re-expressed on the breaks
/// of the given scalar space.
pub fn exact_gluing_splines<T: Scalar>(
    geom: &MultiPatch<T>,
    space: &SplineSpace<T>,
) -> Result<Vec<GluingSplines<T>>, C1Error> {
    let breaks = space.breaks();
    geom.interfaces
        .iter()
        .map(|itf| {
            let exact = compute_exact_gluing(geom, itf)?;
            Ok(GluingSplines {
                alpha_l: PiecewiseBernstein::from_spline(&exact.alpha_l)?.refined(&breaks)?,
                alpha_r: PiecewiseBernstein::from_spline(&exact.alpha_r)?.refined(&breaks)?,
                beta: PiecewiseBernstein::from_spline(&exact.beta_bar)?.refined(&breaks)?,
            })
        })
        .collect()
}

/// Build the C1 basis at refinement level L.
///
/// The supplied gluing data must glue the geometry exactly (zero residual
/// on every interface); the basis then consists of exact null-space
/// elements of the graph-G1 system, selected through a minimal determining
/// set that prefers keeping vertex-adjacent coefficients free, then
/// interface-run coefficients, with all untouched interior coefficients
/// passing through as single-coefficient functions.
pub fn build_c1_space<T: Scalar>(
    geom: &MultiPatch<T>,
    gluing: &[GluingData<T>],
    level: usize,
) -> Result<C1Basis<T>, C1Error> {
    for (idx, (itf, data)) in geom.interfaces.iter().zip(gluing).enumerate() {
        let (rx, ry) = gluing_residual(geom, itf, data)?;
        if !(rx.is_near_zero() && ry.is_near_zero()) {
            return Err(C1Error::NotAsG1(idx));
        }
    }
    let space = level_space(geom.space(), level)?;
    let rows = c1_rows(geom, gluing, &space)?;
    build_from_rows(geom, space, level, rows)
}

/// Build a C1 space over an arbitrary regular geometry using its exact
/// gluing functions instead of fitted linear data. The resulting functions
/// are genuinely C1, but over a non-AS-G1 geometry the space is too poor
/// for optimal approximation; this path exists for degenerate-convergence
/// studies.
pub fn build_c1_space_exact_gluing<T: Scalar>(
    geom: &MultiPatch<T>,
    level: usize,
) -> Result<C1Basis<T>, C1Error> {
    let space = level_space(geom.space(), level)?;
    let splines = exact_gluing_splines(geom, &space)?;
    let rows = c1_rows_from_splines(geom, &splines, &space)?;
    build_from_rows(geom, space, level, rows)
}

fn build_from_rows<T: Scalar>(
    geom: &MultiPatch<T>,
    space: SplineSpace<T>,
    level: usize,
    rows: Vec<Vec<(usize, T)>>,
) -> Result<C1Basis<T>, C1Error> {
    let d = space.dim();
    let n = space.last_index();
    let npatch = geom.patches.len();
    let total = npatch * d * d;

    // column classification: 0 = interface run, 1 = vertex-adjacent,
    // 2 = interior (never appears in a row)
    let mut touched = vec![false; total];
    for row in &rows {
        for (c, _) in row {
            touched[*c] = true;
        }
    }
    let class_of = |c: usize| -> u8 {
        if !touched[c] {
            return 2;
        }
        let i = (c / d) % d;
        let j = c % d;
        if i.min(n - i) <= 1 && j.min(n - j) <= 1 {
            1
        } else {
            0
        }
    };

    // exact elimination; pivots (determined coefficients) prefer interface
    // columns over vertex-adjacent ones, so the free set keeps the vertex
    // blocks first, matching the determining-set selection order
    let mut pivots: HashMap<usize, Vec<(usize, T)>> = HashMap::new();
    let mut pivot_order: Vec<usize> = Vec::new();
    for row in rows {
        let mut work = row;
        // substitute known pivots
        loop {
            let mut expanded: Vec<(usize, T)> = Vec::new();
            let mut changed = false;
            for (c, v) in &work {
                if let Some(expr) = pivots.get(c) {
                    changed = true;
                    for (ec, ev) in expr {
                        expanded.push((*ec, v.clone() * ev.clone()));
                    }
                } else {
                    expanded.push((*c, v.clone()));
                }
            }
            merge_terms(&mut expanded);
            work = expanded;
            if !changed {
                break;
            }
        }
        if work.is_empty() {
            continue;
        }
        // pivot choice: lowest (class preference, column index)
        let (pc, pv) = work
            .iter()
            .min_by_key(|(c, _)| (class_of(*c), *c))
            .map(|(c, v)| (*c, v.clone()))
            .unwrap();
        let expr: Vec<(usize, T)> = work
            .into_iter()
            .filter(|(c, _)| *c != pc)
            .map(|(c, v)| (c, -v / pv.clone()))
            .collect();
        // keep existing pivot expressions reduced
        for other in pivots.values_mut() {
            if let Some(idx) = other.iter().position(|(c, _)| *c == pc) {
                let w = other.remove(idx).1;
                for (ec, ev) in &expr {
                    other.push((*ec, w.clone() * ev.clone()));
                }
                merge_terms(other);
            }
        }
        pivots.insert(pc, expr);
        pivot_order.push(pc);
    }

    // basis functions, ordered: vertex free columns, interface free columns,
    // interior columns (column index breaks ties)
    let mut free_cols: Vec<usize> = (0..total).filter(|c| !pivots.contains_key(c)).collect();
    free_cols.sort_by_key(|&c| {
        let rank = match class_of(c) {
            1 => 0u8, // vertex
            0 => 1,   // interface
            _ => 2,   // interior
        };
        (rank, c)
    });

    // scatter map: free col -> contributions from determined columns
    let mut contributions: HashMap<usize, Vec<(usize, T)>> = HashMap::new();
    for (pc, expr) in &pivots {
        for (fc, w) in expr {
            contributions.entry(*fc).or_default().push((*pc, w.clone()));
        }
    }

    let mut functions = Vec::with_capacity(free_cols.len());
    let mut classes = Vec::with_capacity(free_cols.len());
    for &fc in &free_cols {
        let mut entries = vec![(fc, T::one())];
        if let Some(extra) = contributions.get(&fc) {
            entries.extend(extra.iter().cloned());
        }
        merge_terms(&mut entries);
        functions.push(SparseFn {
            free_col: fc,
            entries,
        });
        classes.push(match class_of(fc) {
            1 => BasisClass::Vertex,
            0 => BasisClass::Interface,
            _ => BasisClass::Interior,
        });
    }

    Ok(C1Basis {
        space,
        level,
        patch_ids: geom.patches.iter().map(|p| p.id).collect(),
        functions,
        classes,
    })
}

/// Value, physical gradient and physical Hessian of an isogeometric
/// function on one patch.
#[derive(Clone, Debug, PartialEq)]
pub struct IsoEval<T> {
    pub value: T,
    pub gradient: [T; 2],
    /// (d2/dx1^2, d2/dx1 dx2, d2/dx2^2)
    pub hessian: [T; 3],
}

/// Evaluate phi(F(u,v)) with derivatives pushed forward through the chain
/// rule; `order` caps the derivative work (0, 1 or 2).
pub fn eval_iso_function<T: Scalar>(
    phi: &IsoFunctionCoeffs<T>,
    geom: &MultiPatch<T>,
    patch_id: usize,
    u: &T,
    v: &T,
    order: usize,
) -> Result<IsoEval<T>, C1Error> {
    let pos = geom
        .patches
        .iter()
        .position(|p| p.id == patch_id)
        .ok_or(C1Error::NoSuchPatch(patch_id))?;
    let g = &phi.grids[pos];
    let f = &geom.patches[pos].geometry;

    let value = g.eval(u, v, 0, 0)?;
    let mut out = IsoEval {
        value,
        gradient: [T::zero(), T::zero()],
        hessian: [T::zero(), T::zero(), T::zero()],
    };
    if order == 0 {
        return Ok(out);
    }

    let fu = f.eval(u, v, 1, 0)?;
    let fv = f.eval(u, v, 0, 1)?;
    let det = fu.x.clone() * fv.y.clone() - fu.y.clone() * fv.x.clone();
    if det.near_zero() {
        return Err(C1Error::SingularJacobian);
    }
    let gu = g.eval(u, v, 1, 0)?;
    let gv = g.eval(u, v, 0, 1)?;
    // grad_x phi = J^{-T} grad_xi g with J = [fu | fv]
    let gx = (gu.clone() * fv.y.clone() - gv.clone() * fu.y.clone()) / det.clone();
    let gy = (gv.clone() * fu.x.clone() - gu.clone() * fv.x.clone()) / det.clone();
    out.gradient = [gx.clone(), gy.clone()];
    if order == 1 {
        return Ok(out);
    }

    // H_x = J^{-T} (H_xi g - gx H_xi F_x - gy H_xi F_y) J^{-1}
    let guu = g.eval(u, v, 2, 0)?;
    let guv = g.eval(u, v, 1, 1)?;
    let gvv = g.eval(u, v, 0, 2)?;
    let fuu = f.eval(u, v, 2, 0)?;
    let fuv = f.eval(u, v, 1, 1)?;
    let fvv = f.eval(u, v, 0, 2)?;
    let m = [
        guu - gx.clone() * fuu.x.clone() - gy.clone() * fuu.y.clone(),
        guv - gx.clone() * fuv.x.clone() - gy.clone() * fuv.y.clone(),
        gvv - gx.clone() * fvv.x.clone() - gy.clone() * fvv.y.clone(),
    ];
    // rows of J^{-T}: a = ( fv.y, -fu.y) / det,  b = (-fv.x, fu.x) / det
    let a = [fv.y.clone() / det.clone(), -fu.y.clone() / det.clone()];
    let b = [-fv.x.clone() / det.clone(), fu.x.clone() / det.clone()];
    let quad = |r: &[T; 2], s: &[T; 2]| -> T {
        r[0].clone() * m[0].clone() * s[0].clone()
            + r[0].clone() * m[1].clone() * s[1].clone()
            + r[1].clone() * m[1].clone() * s[0].clone()
            + r[1].clone() * m[2].clone() * s[1].clone()
    };
    out.hessian = [quad(&a, &a), quad(&a, &b), quad(&b, &b)];
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gluing::check_asg1;
    use crate::linalg::rank_dense;
    use crate::multipatch::{detect_topology, PatchMap};
    use crate::scalar::{rat, Point2, Rat};
    use crate::spline::PatchSpline;
    use num_traits::{One, Zero};

    fn bilinear(id: usize, corners: [(i64, i64); 4], p: usize, r: i32, k: usize) -> PatchMap<Rat> {
        // corners: F(0,0), F(0,1), F(1,0), F(1,1)
        let s1 = make_space::<Rat>(1, 0, 0).unwrap();
        let pt = |c: (i64, i64)| Point2::new(Rat::from_int(c.0), Rat::from_int(c.1));
        let coarse = TensorSpline::new(
            s1.clone(),
            s1,
            vec![pt(corners[0]), pt(corners[1]), pt(corners[2]), pt(corners[3])],
        )
        .unwrap();
        let target = make_space::<Rat>(p, r, k).unwrap();
        PatchMap::new(id, coarse.refine(&target, &target).unwrap()).unwrap()
    }

    /// Two bilinear quads sharing the segment (0,0)-(1,3); genuinely
    /// varying gluing functions.
    fn bilinear_pair(p: usize, r: i32, k: usize) -> (MultiPatch<Rat>, Vec<GluingData<Rat>>) {
        let a = bilinear(0, [(0, 0), (1, 3), (3, 0), (4, 4)], p, r, k);
        let b = bilinear(1, [(0, 0), (1, 3), (-3, 1), (-2, 5)], p, r, k);
        let mp = detect_topology(vec![a, b]).unwrap();
        let report = check_asg1(&mp, &mp.interfaces[0]).unwrap();
        assert!(report.is_asg1);
        let data = report.witness.unwrap();
        (mp, vec![data])
    }

    fn reflection_pair(p: usize, r: i32, k: usize) -> (MultiPatch<Rat>, Vec<GluingData<Rat>>) {
        let a = bilinear(0, [(0, 0), (0, 1), (1, 0), (1, 1)], p, r, k);
        let b = bilinear(1, [(0, 0), (0, 1), (-1, 0), (-1, 1)], p, r, k);
        let mp = detect_topology(vec![a, b]).unwrap();
        let report = check_asg1(&mp, &mp.interfaces[0]).unwrap();
        (mp, vec![report.witness.unwrap()])
    }

    fn oracle_dim(geom: &MultiPatch<Rat>, gluing: &[GluingData<Rat>], level: usize) -> usize {
        // brute force: total columns minus exact rank of the dense system
        let space = level_space(geom.space(), level).unwrap();
        let total = geom.patches.len() * space.dim() * space.dim();
        let rows = c1_rows(geom, gluing, &space).unwrap();
        let dense: Vec<Vec<Rat>> = rows
            .iter()
            .map(|r| {
                let mut row = vec![Rat::zero(); total];
                for (c, v) in r {
                    row[*c] = v.clone();
                }
                row
            })
            .collect();
        total - rank_dense(&dense)
    }

    #[test]
    fn single_patch_dimension() {
        let mp = detect_topology(vec![bilinear(0, [(0, 0), (0, 1), (1, 0), (1, 1)], 2, 1, 1)])
            .unwrap();
        let basis = build_c1_space(&mp, &[], 0).unwrap();
        let d = basis.space.dim();
        assert_eq!(basis.dim(), d * d);
        assert!(basis.classes.iter().all(|c| *c == BasisClass::Interior));
        // each function is a single unit coefficient
        for f in &basis.functions {
            assert_eq!(f.entries.len(), 1);
            assert!(f.entries[0].1.is_one());
        }
    }

    #[test]
    fn reflection_pair_dimension() {
        // straight interface with alpha = +/-1, beta = 0: the C1 space is the
        // tensor product of (C1 splines over two x-elements) x (splines in y):
        // p=3, r=1, k=0 gives (4 + 4 - 2) * 4 = 24
        let (mp, gluing) = reflection_pair(3, 1, 0);
        let basis = build_c1_space(&mp, &gluing, 0).unwrap();
        assert_eq!(basis.dim(), 24);
        assert_eq!(basis.dim(), oracle_dim(&mp, &gluing, 0));
    }

    #[test]
    fn dimension_matches_rank_oracle_various() {
        for (p, r, k) in [(2, 1, 0), (2, 1, 1), (3, 1, 0), (3, 2, 1)] {
            let (mp, gluing) = bilinear_pair(p, r, k);
            for level in 0..2 {
                let basis = build_c1_space(&mp, &gluing, level).unwrap();
                assert_eq!(
                    basis.dim(),
                    oracle_dim(&mp, &gluing, level),
                    "p={p} r={r} k={k} L={level}"
                );
            }
        }
    }

    #[test]
    fn basis_functions_satisfy_rows() {
        let (mp, gluing) = bilinear_pair(3, 1, 0);
        let basis = build_c1_space(&mp, &gluing, 0).unwrap();
        let rows = c1_rows(&mp, &gluing, &basis.space).unwrap();
        for f in &basis.functions {
            let lookup: std::collections::HashMap<usize, Rat> =
                f.entries.iter().cloned().collect();
            for row in &rows {
                let mut acc = Rat::zero();
                for (c, v) in row {
                    if let Some(w) = lookup.get(c) {
                        acc = acc + v.clone() * w.clone();
                    }
                }
                assert!(acc.is_zero());
            }
        }
    }

    #[test]
    fn free_columns_determine_functions_uniquely() {
        // the free column of each function is zero in every other function
        let (mp, gluing) = bilinear_pair(2, 1, 1);
        let basis = build_c1_space(&mp, &gluing, 0).unwrap();
        for (a, fa) in basis.functions.iter().enumerate() {
            for (b, fb) in basis.functions.iter().enumerate() {
                let val = fb
                    .entries
                    .iter()
                    .find(|(c, _)| *c == fa.free_col)
                    .map(|(_, v)| v.clone())
                    .unwrap_or_else(Rat::zero);
                if a == b {
                    assert!(val.is_one());
                } else {
                    assert!(val.is_zero());
                }
            }
        }
    }

    fn scalar_grid_of(
        mp: &MultiPatch<Rat>,
        space: &SplineSpace<Rat>,
        pick: impl Fn(&Point2<Rat>) -> Rat,
    ) -> Vec<ScalarTensorSpline<Rat>> {
        mp.patches
            .iter()
            .map(|p| {
                let refined: PatchSpline<Rat> = p.geometry.refine(space, space).unwrap();
                let flat: Vec<Rat> = refined.coeffs.iter().map(&pick).collect();
                TensorSpline::new(space.clone(), space.clone(), flat).unwrap()
            })
            .collect()
    }

    #[test]
    fn polynomial_reproduction() {
        let (mp, gluing) = bilinear_pair(3, 1, 0);
        for level in 0..2 {
            let basis = build_c1_space(&mp, &gluing, level).unwrap();
            let d = basis.space.dim();
            // constant one
            let ones: Vec<ScalarTensorSpline<Rat>> = (0..mp.patches.len())
                .map(|_| {
                    TensorSpline::new(
                        basis.space.clone(),
                        basis.space.clone(),
                        vec![Rat::one(); d * d],
                    )
                    .unwrap()
                })
                .collect();
            assert!(basis.represent(&ones).is_some());
            // linear coordinates x1 and x2: coefficient grids are the
            // refined geometry components
            let x1 = scalar_grid_of(&mp, &basis.space, |pt| pt.x.clone());
            let x2 = scalar_grid_of(&mp, &basis.space, |pt| pt.y.clone());
            assert!(basis.represent(&x1).is_some());
            assert!(basis.represent(&x2).is_some());
        }
    }

    #[test]
    fn represent_rejects_non_member() {
        let (mp, gluing) = bilinear_pair(2, 1, 0);
        let basis = build_c1_space(&mp, &gluing, 0).unwrap();
        let d = basis.space.dim();
        // a single-patch unit coefficient on the interface layer is not C1
        let mut flats = vec![vec![Rat::zero(); d * d]; 2];
        let rows = c1_rows(&mp, &gluing, &basis.space).unwrap();
        let touched = rows[rows.len() - 1][0].0;
        flats[touched / (d * d)][touched % (d * d)] = Rat::one();
        let grids: Vec<ScalarTensorSpline<Rat>> = flats
            .into_iter()
            .map(|f| TensorSpline::new(basis.space.clone(), basis.space.clone(), f).unwrap())
            .collect();
        assert!(basis.represent(&grids).is_none());
    }

    #[test]
    fn nestedness_under_dyadic_refinement() {
        let (mp, gluing) = bilinear_pair(2, 1, 0);
        let coarse = build_c1_space(&mp, &gluing, 0).unwrap();
        let fine = build_c1_space(&mp, &gluing, 1).unwrap();
        for idx in 0..coarse.dim() {
            let grids = coarse.to_grids(idx).unwrap();
            let refined: Vec<ScalarTensorSpline<Rat>> = grids
                .grids
                .iter()
                .map(|g| g.refine(&fine.space, &fine.space).unwrap())
                .collect();
            assert!(fine.represent(&refined).is_some(), "function {idx}");
        }
    }

    #[test]
    fn cross_interface_continuity() {
        let (mp, gluing) = bilinear_pair(3, 1, 0);
        let basis = build_c1_space(&mp, &gluing, 0).unwrap();
        let itf = &mp.interfaces[0];
        // both edges sit on side Left after reorientation with matching
        // parameters; evaluate value and physical gradient from both sides
        for idx in 0..basis.dim() {
            let phi = basis.to_grids(idx).unwrap();
            for t in 0..20 {
                let tv = rat(t, 19);
                let ea = eval_iso_function(&phi, &mp, itf.edge_a.patch, &Rat::zero(), &tv, 1)
                    .unwrap();
                let tb = if itf.orientation_flip {
                    Rat::one() - tv.clone()
                } else {
                    tv.clone()
                };
                let eb = eval_iso_function(&phi, &mp, itf.edge_b.patch, &Rat::zero(), &tb, 1)
                    .unwrap();
                assert_eq!(ea.value, eb.value);
                assert_eq!(ea.gradient, eb.gradient);
            }
        }
    }

    #[test]
    fn constant_and_linear_evaluation() {
        let (mp, gluing) = bilinear_pair(2, 1, 0);
        let basis = build_c1_space(&mp, &gluing, 0).unwrap();
        let d = basis.space.dim();
        let ones = IsoFunctionCoeffs {
            grids: (0..2)
                .map(|_| {
                    TensorSpline::new(
                        basis.space.clone(),
                        basis.space.clone(),
                        vec![Rat::one(); d * d],
                    )
                    .unwrap()
                })
                .collect(),
        };
        let x1 = IsoFunctionCoeffs {
            grids: scalar_grid_of(&mp, &basis.space, |pt| pt.x.clone()),
        };
        for (u, v) in [(rat(1, 3), rat(1, 5)), (rat(3, 4), rat(2, 3))] {
            for pid in [0usize, 1] {
                let e1 = eval_iso_function(&ones, &mp, pid, &u, &v, 2).unwrap();
                assert!(e1.value.is_one());
                assert!(e1.gradient.iter().all(|g| g.is_zero()));
                assert!(e1.hessian.iter().all(|h| h.is_zero()));
                let ex = eval_iso_function(&x1, &mp, pid, &u, &v, 2).unwrap();
                assert_eq!(ex.gradient, [Rat::one(), Rat::zero()]);
                assert!(ex.hessian.iter().all(|h| h.is_zero()));
            }
        }
    }

    #[test]
    fn not_asg1_rejected() {
        let (mp, _) = bilinear_pair(2, 1, 0);
        // wrong gluing data: reflection data does not glue this geometry
        let (_, wrong) = reflection_pair(2, 1, 0);
        assert!(matches!(
            build_c1_space(&mp, &wrong, 0),
            Err(C1Error::NotAsG1(0))
        ));
    }

    #[test]
    fn singular_jacobian_detected() {
        // fold map: x = (u - 1/2)^2 has det J = 0 along u = 1/2
        let s = make_space::<Rat>(2, 1, 0).unwrap();
        let coeffs = vec![
            Point2::new(rat(1, 4), Rat::zero()),
            Point2::new(rat(1, 4), rat(1, 2)),
            Point2::new(rat(1, 4), Rat::one()),
            Point2::new(rat(-1, 4), Rat::zero()),
            Point2::new(rat(-1, 4), rat(1, 2)),
            Point2::new(rat(-1, 4), Rat::one()),
            Point2::new(rat(1, 4), Rat::zero()),
            Point2::new(rat(1, 4), rat(1, 2)),
            Point2::new(rat(1, 4), Rat::one()),
        ];
        let patch = PatchMap::new(0, TensorSpline::new(s.clone(), s.clone(), coeffs).unwrap())
            .unwrap();
        let mp = detect_topology(vec![patch]).unwrap();
        let basis = build_c1_space(&mp, &[], 0).unwrap();
        let phi = basis.to_grids(0).unwrap();
        assert!(matches!(
            eval_iso_function(&phi, &mp, 0, &rat(1, 2), &rat(1, 3), 1),
            Err(C1Error::SingularJacobian)
        ));
    }
}
