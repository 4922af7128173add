//! Assembly and exact elimination of the linear constraint sets over the
//! control points: boundary interpolation, vertex interpolation, and the
//! G1 rows induced by fitted gluing data.
//!
//! All rows are linear equations in the flat unknown vector of control-point
//! coordinates. Elimination is exact (rational mode) and deterministic, and
//! produces an affine map from the free columns to the full vector.

use crate::bernstein::PiecewiseBernstein;
use crate::gluing::{global_bernstein_to_piecewise, GluingData};
use crate::multipatch::{EdgeId, Interface, MultiPatch, Side};
use crate::scalar::Scalar;
use crate::spline::{Spline, SplineError};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ConstraintError {
    #[error("constraint system is infeasible (column {col} receives conflicting values)")]
    Conflict { col: usize },
    #[error("constraint system is infeasible (contradictory row)")]
    Infeasible,
    #[error("no gluing data supplied for interface {0}")]
    MissingGluingData(usize),
    #[error(transparent)]
    Spline(#[from] SplineError),
}

/// Flat index space over all control-point coordinates of a multi-patch
/// geometry: column = ((patch position * (n+1) + i) * (n+1) + j) * 2 + coord.
#[derive(Clone, Debug)]
pub struct Unknowns {
    patch_ids: Vec<usize>,
    n: usize,
}

impl Unknowns {
    pub fn for_geometry<T: Scalar>(geom: &MultiPatch<T>) -> Unknowns {
        Unknowns {
            patch_ids: geom.patches.iter().map(|p| p.id).collect(),
            n: geom.space().last_index(),
        }
    }

    pub fn last_index(&self) -> usize {
        self.n
    }

    pub fn count(&self) -> usize {
        2 * self.patch_ids.len() * (self.n + 1) * (self.n + 1)
    }

    fn patch_pos(&self, patch_id: usize) -> usize {
        self.patch_ids
            .iter()
            .position(|&id| id == patch_id)
            .expect("patch id belongs to the geometry")
    }

    pub fn col(&self, patch_id: usize, i: usize, j: usize, coord: usize) -> usize {
        debug_assert!(i <= self.n && j <= self.n && coord < 2);
        ((self.patch_pos(patch_id) * (self.n + 1) + i) * (self.n + 1) + j) * 2 + coord
    }

    /// Inverse of [`col`]: (patch id, i, j, coord).
    pub fn decode(&self, col: usize) -> (usize, usize, usize, usize) {
        let coord = col % 2;
        let rest = col / 2;
        let j = rest % (self.n + 1);
        let rest = rest / (self.n + 1);
        let i = rest % (self.n + 1);
        let pos = rest / (self.n + 1);
        (self.patch_ids[pos], i, j, coord)
    }
}

/// One sparse linear equation `sum coeff * d_col = rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintRow<T> {
    pub terms: Vec<(usize, T)>,
    pub rhs: T,
}

impl<T: Scalar> ConstraintRow<T> {
    pub fn assignment(col: usize, value: T) -> Self {
        ConstraintRow {
            terms: vec![(col, T::one())],
            rhs: value,
        }
    }

    fn normalize(&mut self) {
        self.terms.sort_by_key(|(c, _)| *c);
        let mut merged: Vec<(usize, T)> = Vec::with_capacity(self.terms.len());
        for (c, v) in self.terms.drain(..) {
            if let Some(last) = merged.last_mut() {
                if last.0 == c {
                    last.1 = last.1.clone() + v;
                    continue;
                }
            }
            merged.push((c, v));
        }
        merged.retain(|(_, v)| !v.near_zero());
        self.terms = merged;
    }

    /// Residual of the row at a full assignment vector.
    pub fn residual(&self, d: &[T]) -> T {
        let mut acc = -self.rhs.clone();
        for (c, v) in &self.terms {
            acc = acc + v.clone() * d[*c].clone();
        }
        acc
    }
}

/// Fix the boundary rows/columns of control points to the initial geometry:
/// one assignment per control point on each boundary edge, per coordinate.
pub fn build_boundary_constraints<T: Scalar>(
    geom_tilde: &MultiPatch<T>,
    unknowns: &Unknowns,
) -> Vec<ConstraintRow<T>> {
    let n = unknowns.last_index();
    let mut rows = Vec::new();
    for edge in &geom_tilde.boundary_edges {
        let patch = geom_tilde.patch(edge.patch);
        for t in 0..=n {
            let (i, j) = edge_index(edge.side, n, t);
            let d = patch.geometry.at(i, j);
            rows.push(ConstraintRow::assignment(
                unknowns.col(edge.patch, i, j, 0),
                d.x.clone(),
            ));
            rows.push(ConstraintRow::assignment(
                unknowns.col(edge.patch, i, j, 1),
                d.y.clone(),
            ));
        }
    }
    rows
}

fn edge_index(side: Side, n: usize, t: usize) -> (usize, usize) {
    match side {
        Side::Bottom => (t, 0),
        Side::Top => (t, n),
        Side::Left => (0, t),
        Side::Right => (n, t),
    }
}

/// Fix each corner control point and its two edge-adjacent neighbors to the
/// initial geometry (pins corner positions and first derivatives there).
pub fn build_vertex_constraints<T: Scalar>(
    geom_tilde: &MultiPatch<T>,
    unknowns: &Unknowns,
) -> Vec<ConstraintRow<T>> {
    let n = unknowns.last_index();
    let mut rows = Vec::new();
    for patch in &geom_tilde.patches {
        for (ci, cj) in [(0, 0), (n, 0), (0, n), (n, n)] {
            let ni = if ci == 0 { 1 } else { n - 1 };
            let nj = if cj == 0 { 1 } else { n - 1 };
            for (i, j) in [(ci, cj), (ni, cj), (ci, nj)] {
                let d = patch.geometry.at(i, j);
                rows.push(ConstraintRow::assignment(
                    unknowns.col(patch.id, i, j, 0),
                    d.x.clone(),
                ));
                rows.push(ConstraintRow::assignment(
                    unknowns.col(patch.id, i, j, 1),
                    d.y.clone(),
                ));
            }
        }
    }
    rows
}

/// The homogeneous G1 rows of one interface with fixed gluing data: trace
/// equality of the shared edge plus the per-span Bernstein coefficients of
/// the degree-(p+1) residual
/// `alpha_r D_u F_l(0,.) - alpha_l D_u F_r(0,.) + beta D_v G`.
pub fn build_asg1_constraints<T: Scalar>(
    geom: &MultiPatch<T>,
    gluing: &[GluingData<T>],
    unknowns: &Unknowns,
) -> Result<Vec<ConstraintRow<T>>, ConstraintError> {
    if gluing.len() != geom.interfaces.len() {
        return Err(ConstraintError::MissingGluingData(gluing.len()));
    }
    let mut rows = Vec::new();
    for (itf, data) in geom.interfaces.iter().zip(gluing) {
        rows.extend(interface_rows(geom, itf, data, unknowns)?);
    }
    Ok(rows)
}

fn interface_rows<T: Scalar>(
    geom: &MultiPatch<T>,
    itf: &Interface,
    data: &GluingData<T>,
    unknowns: &Unknowns,
) -> Result<Vec<ConstraintRow<T>>, ConstraintError> {
    let space = geom.space();
    let n = space.last_index();
    let p = space.degree();
    let k = space.inner_knot_count();
    let breaks = space.breaks();
    // D_u F(0, v) = (p / tau) (row_1(v) - row_0(v))
    let tau = space.knots()[p + 1].clone() - space.knots()[1].clone();
    let du_factor = T::from_int(p as i64) / tau;

    // original-grid columns of the reoriented rows 0 and 1
    let orig = |sym: &crate::multipatch::GridSymmetry, i: usize, j: usize| sym.map_index(n, i, j);

    let mut rows = Vec::new();

    // trace equality d^l_{0,j} = d^r_{0,j} in the reoriented frame
    for j in 0..=n {
        let (ai, aj) = orig(&itf.reorient_a, 0, j);
        let (bi, bj) = orig(&itf.reorient_b, 0, j);
        for c in 0..2 {
            rows.push(ConstraintRow {
                terms: vec![
                    (unknowns.col(itf.edge_a.patch, ai, aj, c), T::one()),
                    (unknowns.col(itf.edge_b.patch, bi, bj, c), -T::one()),
                ],
                rhs: T::zero(),
            });
        }
    }

    // gluing functions in piecewise Bernstein form on the interface breaks
    let alpha_l = global_bernstein_to_piecewise(&[data.a0_l.clone(), data.a1_l.clone()], &breaks);
    let alpha_r = global_bernstein_to_piecewise(&[data.a0_r.clone(), data.a1_r.clone()], &breaks);
    let beta = global_bernstein_to_piecewise(&data.beta_bernstein(), &breaks);

    // contribution of each unit control coordinate to the scalar residual;
    // the x and y equations have identical structure, so assemble one scalar
    // pattern per (patch-side, row index, j) and emit it for both coords
    let residual_rows = 2 * (k + 1) * (p + 2);
    let mut span_rows: Vec<ConstraintRow<T>> = (0..residual_rows)
        .map(|_| ConstraintRow {
            terms: Vec::new(),
            rhs: T::zero(),
        })
        .collect();

    let mut emit = |pattern: &PiecewiseBernstein<T>, patch: usize, i: usize, j: usize| {
        let elevated = pattern.elevated(p + 1);
        for c in 0..2 {
            let col = unknowns.col(patch, i, j, c);
            for (s, span) in elevated.spans.iter().enumerate() {
                for (b, coeff) in span.iter().enumerate() {
                    if coeff.near_zero() {
                        continue;
                    }
                    let row = c * (k + 1) * (p + 2) + s * (p + 2) + b;
                    span_rows[row].terms.push((col, coeff.clone()));
                }
            }
        }
    };

    for j in 0..=n {
        // basis function N_j(v) and its derivative as piecewise Bernstein
        let mut coeffs = vec![T::zero(); space.dim()];
        coeffs[j] = T::one();
        let nj: Spline<T, T> = Spline::new(space.clone(), coeffs)?;
        let bnj = PiecewiseBernstein::from_spline(&nj)?;
        let bdnj = PiecewiseBernstein::from_spline(&nj.derivative()?)?;

        // patch a, row 0: -(p/tau) alpha_r N_j + beta N'_j
        let (ai, aj) = orig(&itf.reorient_a, 0, j);
        let pat = alpha_r
            .mul(&bnj)?
            .scale(&-du_factor.clone())
            .add(&beta.mul(&bdnj)?)?;
        emit(&pat, itf.edge_a.patch, ai, aj);
        // patch a, row 1: (p/tau) alpha_r N_j
        let (ai, aj) = orig(&itf.reorient_a, 1, j);
        emit(&alpha_r.mul(&bnj)?.scale(&du_factor), itf.edge_a.patch, ai, aj);
        // patch b, row 0: (p/tau) alpha_l N_j
        let (bi, bj) = orig(&itf.reorient_b, 0, j);
        emit(&alpha_l.mul(&bnj)?.scale(&du_factor), itf.edge_b.patch, bi, bj);
        // patch b, row 1: -(p/tau) alpha_l N_j
        let (bi, bj) = orig(&itf.reorient_b, 1, j);
        emit(
            &alpha_l.mul(&bnj)?.scale(&-du_factor.clone()),
            itf.edge_b.patch,
            bi,
            bj,
        );
    }

    for mut row in span_rows {
        row.normalize();
        if !row.terms.is_empty() {
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Affine expression of one column in the free columns.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnExpr<T> {
    pub offset: T,
    pub terms: Vec<(usize, T)>,
}

/// Result of exact elimination: rank, fixed/pivot/free partition, and the
/// affine map free columns -> full vector.
#[derive(Clone, Debug)]
pub struct ConstraintSystem<T> {
    pub unknowns: Unknowns,
    pub rank: usize,
    pub free_cols: Vec<usize>,
    /// Expression of every column; free columns map to themselves.
    exprs: HashMap<usize, ColumnExpr<T>>,
}

impl<T: Scalar> ConstraintSystem<T> {
    pub fn column_expression(&self, col: usize) -> ColumnExpr<T> {
        self.exprs.get(&col).cloned().unwrap_or(ColumnExpr {
            offset: T::zero(),
            terms: vec![(col, T::one())],
        })
    }

    pub fn is_free(&self, col: usize) -> bool {
        !self.exprs.contains_key(&col)
    }

    /// Full unknown vector from values of the free columns (ordered as in
    /// `free_cols`).
    pub fn solve_with(&self, free_values: &[T]) -> Vec<T> {
        assert_eq!(free_values.len(), self.free_cols.len());
        let pos: HashMap<usize, usize> = self
            .free_cols
            .iter()
            .enumerate()
            .map(|(a, &c)| (c, a))
            .collect();
        (0..self.unknowns.count())
            .map(|col| {
                let e = self.column_expression(col);
                let mut acc = e.offset;
                for (c, w) in &e.terms {
                    acc = acc + w.clone() * free_values[pos[c]].clone();
                }
                acc
            })
            .collect()
    }
}

/// Exact Gaussian elimination with deterministic pivoting: single-term rows
/// are folded first (constant propagation), then remaining rows pivot on the
/// largest absolute coefficient, ties broken by lowest column index.
pub fn eliminate<T: Scalar>(
    rows: &[ConstraintRow<T>],
    unknowns: &Unknowns,
) -> Result<ConstraintSystem<T>, ConstraintError> {
    let mut work: Vec<ConstraintRow<T>> = rows
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.normalize();
            r
        })
        .collect();

    let mut fixed: HashMap<usize, T> = HashMap::new();
    // constant folding to a fixpoint
    loop {
        let mut changed = false;
        let mut next = Vec::with_capacity(work.len());
        for mut row in work.drain(..) {
            // substitute known columns
            let mut keep = Vec::new();
            for (c, v) in row.terms.drain(..) {
                if let Some(val) = fixed.get(&c) {
                    row.rhs = row.rhs.clone() - v * val.clone();
                } else {
                    keep.push((c, v));
                }
            }
            row.terms = keep;
            if row.terms.is_empty() {
                if !row.rhs.near_zero() {
                    return Err(ConstraintError::Infeasible);
                }
                changed = true;
                continue;
            }
            if row.terms.len() == 1 {
                let (c, v) = row.terms[0].clone();
                let val = row.rhs.clone() / v;
                if let Some(prev) = fixed.get(&c) {
                    if !prev.near_eq(&val) {
                        return Err(ConstraintError::Conflict { col: c });
                    }
                } else {
                    fixed.insert(c, val);
                }
                changed = true;
                continue;
            }
            next.push(row);
        }
        work = next;
        if !changed {
            break;
        }
    }

    // Gaussian elimination on the remaining multi-term rows
    let mut pivots: Vec<(usize, ConstraintRow<T>)> = Vec::new();
    loop {
        // deterministic pivot selection
        let mut best: Option<(usize, usize, T)> = None; // (row, col, |coeff|)
        for (ri, row) in work.iter().enumerate() {
            for (c, v) in &row.terms {
                let mag = v.abs();
                let better = match &best {
                    None => true,
                    Some((_, bc, bm)) => mag > *bm || (mag == *bm && *c < *bc),
                };
                if better {
                    best = Some((ri, *c, mag));
                }
            }
        }
        let Some((ri, pc, _)) = best else { break };
        let mut pivot_row = work.swap_remove(ri);
        let pv = pivot_row
            .terms
            .iter()
            .find(|(c, _)| *c == pc)
            .unwrap()
            .1
            .clone();
        // normalize the pivot row to coefficient 1 at the pivot column
        let inv = T::one() / pv;
        for (_, v) in pivot_row.terms.iter_mut() {
            *v = v.clone() * inv.clone();
        }
        pivot_row.rhs = pivot_row.rhs * inv;
        // eliminate from the other rows and from earlier pivot expressions
        let elim = |row: &mut ConstraintRow<T>| {
            let Some(w) = row
                .terms
                .iter()
                .find(|(c, _)| *c == pc)
                .map(|(_, v)| v.clone())
            else {
                return;
            };
            for (c, v) in &pivot_row.terms {
                row.terms.push((*c, -(w.clone() * v.clone())));
            }
            row.rhs = row.rhs.clone() - w * pivot_row.rhs.clone();
            row.normalize();
        };
        for row in work.iter_mut() {
            elim(row);
        }
        for (_, row) in pivots.iter_mut() {
            elim(row);
        }
        work.retain(|r| {
            if r.terms.is_empty() {
                // rhs must be zero here; contradictions are caught below
                return !r.rhs.near_zero();
            }
            true
        });
        if work.iter().any(|r| r.terms.is_empty()) {
            return Err(ConstraintError::Infeasible);
        }
        pivots.push((pc, pivot_row));
    }

    // assemble expressions: pivot col = rhs - sum(other terms)
    let mut exprs: HashMap<usize, ColumnExpr<T>> = HashMap::new();
    for (c, v) in &fixed {
        exprs.insert(
            *c,
            ColumnExpr {
                offset: v.clone(),
                terms: Vec::new(),
            },
        );
    }
    for (pc, row) in &pivots {
        let mut terms = Vec::new();
        for (c, v) in &row.terms {
            if c != pc {
                terms.push((*c, -v.clone()));
            }
        }
        terms.sort_by_key(|(c, _)| *c);
        exprs.insert(
            *pc,
            ColumnExpr {
                offset: row.rhs.clone(),
                terms,
            },
        );
    }
    let rank = exprs.len();
    let free_cols: Vec<usize> = (0..unknowns.count())
        .filter(|c| !exprs.contains_key(c))
        .collect();
    Ok(ConstraintSystem {
        unknowns: unknowns.clone(),
        rank,
        free_cols,
        exprs,
    })
}

/// Line-oriented debug dump: `row: coeff@(l,i,j,c) ... = rhs`.
pub fn dump_rows<T: Scalar>(rows: &[ConstraintRow<T>], unknowns: &Unknowns) -> String {
    let mut out = String::new();
    for row in rows {
        out.push_str("row:");
        for (col, v) in &row.terms {
            let (l, i, j, c) = unknowns.decode(*col);
            out.push_str(&format!(" {}@({},{},{},{})", v, l, i, j, c));
        }
        out.push_str(&format!(" = {}\n", row.rhs));
    }
    out
}

/// Convenience: collect all boundary edge ids touching a column.
pub fn boundary_columns<T: Scalar>(geom: &MultiPatch<T>, unknowns: &Unknowns) -> Vec<usize> {
    let mut cols: Vec<usize> = build_boundary_constraints(geom, unknowns)
        .iter()
        .flat_map(|r| r.terms.iter().map(|(c, _)| *c))
        .collect();
    cols.sort_unstable();
    cols.dedup();
    cols
}

/// Boundary edge ids of a patch side, for callers iterating sample points.
pub fn edge_point_index(side: Side, n: usize, t: usize) -> (usize, usize) {
    edge_index(side, n, t)
}

/// Whether an edge is a boundary edge of the geometry.
pub fn is_boundary_edge<T: Scalar>(geom: &MultiPatch<T>, edge: &EdgeId) -> bool {
    geom.boundary_edges.contains(edge)
}
