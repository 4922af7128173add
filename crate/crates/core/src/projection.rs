//! L2 projection onto the C1 isogeometric space and convergence studies.
//!
//! This module works in f64 throughout (mass assembly, solve, error norms);
//! the basis itself is imported from the exact-rational construction. Error
//! norms are relative per derivative order: the L2 norm of the order-i
//! derivative error divided by the same norm of the target.

use crate::c1::{
    build_c1_space, build_c1_space_exact_gluing, eval_iso_function, C1Basis, C1Error,
    IsoFunctionCoeffs,
};
use crate::gluing::GluingData;
use crate::multipatch::{detect_topology, MultiPatch, MultiPatchError, PatchMap, Side};
use crate::scalar::{Rat, Scalar};
use crate::spline::{SplineError, TensorSpline};
use serde::Serialize;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ProjectionError {
    #[error("mass matrix is not symmetric positive definite (pivot {0} failed)")]
    NotSpd(usize),
    #[error("projection residual {0:e} exceeds the tolerance; solve is unreliable")]
    ResidualTooLarge(f64),
    #[error("unknown target function `{0}`")]
    UnknownTarget(String),
    #[error(transparent)]
    C1(#[from] C1Error),
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error(transparent)]
    MultiPatch(#[from] MultiPatchError),
}

/// Analytic target function on the physical plane.
#[derive(Clone)]
pub struct TargetFunction {
    pub name: &'static str,
    pub value: fn(f64, f64) -> f64,
    pub gradient: fn(f64, f64) -> [f64; 2],
    /// (d2/dx1^2, d2/dx1 dx2, d2/dx2^2)
    pub hessian: fn(f64, f64) -> [f64; 3],
}

impl TargetFunction {
    /// Built-in trigonometric target z = 2 cos(x1) sin(x2).
    pub fn trig() -> Self {
        TargetFunction {
            name: "paper23",
            value: |x, y| 2.0 * x.cos() * y.sin(),
            gradient: |x, y| [-2.0 * x.sin() * y.sin(), 2.0 * x.cos() * y.cos()],
            hessian: |x, y| {
                [
                    -2.0 * x.cos() * y.sin(),
                    -2.0 * x.sin() * y.cos(),
                    -2.0 * x.cos() * y.sin(),
                ]
            },
        }
    }

    /// First physical coordinate; reproduced exactly by any C1 space over
    /// an AS-G1 geometry.
    pub fn linear_x1() -> Self {
        TargetFunction {
            name: "x1",
            value: |x, _| x,
            gradient: |_, _| [1.0, 0.0],
            hessian: |_, _| [0.0, 0.0, 0.0],
        }
    }

    pub fn by_name(name: &str) -> Result<Self, ProjectionError> {
        match name {
            "paper23" => Ok(Self::trig()),
            "x1" => Ok(Self::linear_x1()),
            _ => Err(ProjectionError::UnknownTarget(name.to_string())),
        }
    }
}

/// Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // initial guess on [-1, 1], refined by Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..64 {
            let (pn, dpn) = legendre(n, x);
            let dx = pn / dpn;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dpn) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dpn * dpn);
        out.push(((x + 1.0) / 2.0, w / 2.0));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = pk;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Convert an exact geometry to floating point.
pub fn geometry_to_f64(geom: &MultiPatch<Rat>) -> Result<MultiPatch<f64>, MultiPatchError> {
    let patches = geom
        .patches
        .iter()
        .map(|p| {
            let su = p.geometry.space_u.convert::<f64>();
            let sv = p.geometry.space_v.convert::<f64>();
            let coeffs = p
                .geometry
                .coeffs
                .iter()
                .map(|c| {
                    let (x, y) = c.to_f64();
                    crate::scalar::Point2::new(x, y)
                })
                .collect();
            PatchMap::new(p.id, TensorSpline::new(su, sv, coeffs)?)
        })
        .collect::<Result<Vec<_>, MultiPatchError>>()?;
    detect_topology(patches)
}

/// Convert an exact C1 basis to floating point.
pub fn basis_to_f64(basis: &C1Basis<Rat>) -> C1Basis<f64> {
    C1Basis {
        space: basis.space.convert::<f64>(),
        level: basis.level,
        patch_ids: basis.patch_ids.clone(),
        functions: basis
            .functions
            .iter()
            .map(|f| crate::c1::SparseFn {
                free_col: f.free_col,
                entries: f
                    .entries
                    .iter()
                    .map(|(c, v)| (*c, v.to_f64()))
                    .collect(),
            })
            .collect(),
        classes: basis.classes.clone(),
    }
}

/// Per-patch scatter of the basis: local column -> (function, coefficient).
fn column_scatter(basis: &C1Basis<f64>) -> Vec<Vec<Vec<(usize, f64)>>> {
    let d = basis.space.dim();
    let mut scatter = vec![vec![Vec::new(); d * d]; basis.patch_ids.len()];
    for (fi, f) in basis.functions.iter().enumerate() {
        for (col, val) in &f.entries {
            let (pos, i, j) = basis.decode(*col);
            scatter[pos][i * d + j].push((fi, *val));
        }
    }
    scatter
}

/// Assemble the L2 mass matrix and load vector with `nodes` Gauss points
/// per knot span per direction.
pub fn assemble_l2_system_with_nodes(
    basis: &C1Basis<f64>,
    geom: &MultiPatch<f64>,
    target: &TargetFunction,
    nodes: usize,
) -> Result<(Vec<Vec<f64>>, Vec<f64>), ProjectionError> {
    let (rows, z) = assemble_l2_sparse_with_nodes(basis, geom, target, nodes)?;
    let nh = z.len();
    let mut m = vec![vec![0.0; nh]; nh];
    for (i, row) in rows.iter().enumerate() {
        for (&j, &v) in row {
            m[i][j] = v;
        }
    }
    Ok((m, z))
}

/// Assemble the mass matrix in sparse row-map form; only a bounded number of
/// basis functions overlap any quadrature point, so rows stay short.
pub fn assemble_l2_sparse_with_nodes(
    basis: &C1Basis<f64>,
    geom: &MultiPatch<f64>,
    target: &TargetFunction,
    nodes: usize,
) -> Result<(Vec<HashMap<usize, f64>>, Vec<f64>), ProjectionError> {
    let space = &basis.space;
    let p = space.degree();
    let d = space.dim();
    let nh = basis.dim();
    let gl = gauss_legendre(nodes);
    let breaks = space.breaks();
    let scatter = column_scatter(basis);

    // global quadrature nodes with weights, one list reused per direction
    let mut qpts: Vec<(f64, f64)> = Vec::new();
    for w in breaks.windows(2) {
        let len = w[1] - w[0];
        for (t, wt) in &gl {
            qpts.push((w[0] + len * t, wt * len));
        }
    }
    // cache basis tables
    let tables: Vec<(usize, Vec<Vec<f64>>)> = qpts
        .iter()
        .map(|(t, _)| space.basis_local(t, 0))
        .collect::<Result<_, _>>()?;

    let mut m: Vec<HashMap<usize, f64>> = vec![HashMap::new(); nh];
    let mut z = vec![0.0; nh];
    let mut scratch = vec![0.0; nh];

    for (pos, patch) in geom.patches.iter().enumerate() {
        let sc = &scatter[pos];
        for (a, (u, wu)) in qpts.iter().enumerate() {
            let (su, bu) = &tables[a];
            for (b, (v, wv)) in qpts.iter().enumerate() {
                let (sv, bv) = &tables[b];
                let fu = patch.geometry.eval(u, v, 1, 0)?;
                let fv = patch.geometry.eval(u, v, 0, 1)?;
                let det = (fu.x * fv.y - fu.y * fv.x).abs();
                let w = wu * wv * det;

                // active C1 functions at this point
                let mut touched: Vec<usize> = Vec::new();
                for ia in 0..=p {
                    let i = su - p + ia;
                    for jb in 0..=p {
                        let j = sv - p + jb;
                        let wb = bu[0][ia] * bv[0][jb];
                        if wb == 0.0 {
                            continue;
                        }
                        for (fi, coeff) in &sc[i * d + j] {
                            if scratch[*fi] == 0.0 && !touched.contains(fi) {
                                touched.push(*fi);
                            }
                            scratch[*fi] += wb * coeff;
                        }
                    }
                }
                let fx = patch.geometry.eval(u, v, 0, 0)?;
                let zval = (target.value)(fx.x, fx.y);
                for &fi in &touched {
                    let vi = scratch[fi];
                    z[fi] += w * zval * vi;
                    let row = &mut m[fi];
                    // w * (vi * vj) keeps the update bitwise symmetric
                    for &fj in &touched {
                        *row.entry(fj).or_insert(0.0) += w * (vi * scratch[fj]);
                    }
                }
                for &fi in &touched {
                    scratch[fi] = 0.0;
                }
            }
        }
    }
    Ok((m, z))
}

/// Assemble with the default p+1 Gauss nodes per span.
pub fn assemble_l2_system(
    basis: &C1Basis<f64>,
    geom: &MultiPatch<f64>,
    target: &TargetFunction,
) -> Result<(Vec<Vec<f64>>, Vec<f64>), ProjectionError> {
    assemble_l2_system_with_nodes(basis, geom, target, basis.space.degree() + 1)
}

/// Solve M c = z by Cholesky factorization; fails on non-SPD input or an
/// unreliable residual.
pub fn project(m: &[Vec<f64>], z: &[f64]) -> Result<Vec<f64>, ProjectionError> {
    let n = z.len();
    // lower-triangular factor
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(ProjectionError::NotSpd(i));
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    // forward / backward substitution
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = z[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut c = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k][i] * c[k];
        }
        c[i] = s / l[i][i];
    }
    // residual guard
    let zmax = z.iter().fold(0.0_f64, |a, b| a.max(b.abs())).max(1e-300);
    let mut rmax = 0.0_f64;
    for i in 0..n {
        let mut s = -z[i];
        for j in 0..n {
            s += m[i][j] * c[j];
        }
        rmax = rmax.max(s.abs());
    }
    if rmax > 1e-10 * zmax {
        return Err(ProjectionError::ResidualTooLarge(rmax));
    }
    Ok(c)
}

/// Solve the sparse SPD system M c = z by Jacobi-preconditioned conjugate
/// gradients, with the same residual guard as the dense path. Used when the
/// space is too large for a dense factorization.
pub fn project_cg(m: &[HashMap<usize, f64>], z: &[f64]) -> Result<Vec<f64>, ProjectionError> {
    let n = z.len();
    let matvec = |x: &[f64], out: &mut [f64]| {
        for (i, row) in m.iter().enumerate() {
            let mut s = 0.0;
            for (&j, &v) in row {
                s += v * x[j];
            }
            out[i] = s;
        }
    };
    let mut dinv = vec![0.0; n];
    for i in 0..n {
        let d = *m[i].get(&i).unwrap_or(&0.0);
        if d <= 0.0 {
            return Err(ProjectionError::NotSpd(i));
        }
        dinv[i] = 1.0 / d;
    }
    let zmax = z.iter().fold(0.0_f64, |a, b| a.max(b.abs())).max(1e-300);
    let mut c = vec![0.0; n];
    let mut r = z.to_vec();
    let mut s: Vec<f64> = r.iter().zip(&dinv) .map(|(ri, di)| ri * di).collect();
    let mut p = s.clone();
    let mut rs: f64 = r.iter().zip(&s).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for _ in 0..20 * n.max(100) {
        if r.iter().fold(0.0_f64, |a, b| a.max(b.abs())) <= 1e-12 * zmax {
            break;
        }
        matvec(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(ProjectionError::NotSpd(0));
        }
        let alpha = rs / pap;
        for i in 0..n {
            c[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            s[i] = r[i] * dinv[i];
        }
        let rs_new: f64 = r.iter().zip(&s).map(|(a, b)| a * b).sum();
        let beta = rs_new / rs;
        rs = rs_new;
        for i in 0..n {
            p[i] = s[i] + beta * p[i];
        }
    }
    // residual guard against the true matrix
    matvec(&c, &mut ap);
    let rmax = ap
        .iter()
        .zip(z)
        .fold(0.0_f64, |a, (mi, zi)| a.max((mi - zi).abs()));
    if rmax > 1e-10 * zmax {
        return Err(ProjectionError::ResidualTooLarge(rmax));
    }
    Ok(c)
}

/// Combine projection coefficients into per-patch coefficient grids.
pub fn combine(basis: &C1Basis<f64>, c: &[f64]) -> Result<IsoFunctionCoeffs<f64>, ProjectionError> {
    let d = basis.space.dim();
    let mut flats = vec![vec![0.0; d * d]; basis.patch_ids.len()];
    for (f, ci) in basis.functions.iter().zip(c) {
        if *ci == 0.0 {
            continue;
        }
        for (col, val) in &f.entries {
            let (pos, i, j) = basis.decode(*col);
            flats[pos][i * d + j] += ci * val;
        }
    }
    let grids = flats
        .into_iter()
        .map(|f| TensorSpline::new(basis.space.clone(), basis.space.clone(), f))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(IsoFunctionCoeffs { grids })
}

/// Relative L2/H1/H2 errors (seminorm ratios per derivative order) plus
/// absolute sup-norm errors on a dense sample grid and along interfaces.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ErrorNorms {
    pub l2: f64,
    pub h1: f64,
    pub h2: f64,
    pub linf: f64,
    pub linf_interface: f64,
}

pub fn compute_errors(
    u: &IsoFunctionCoeffs<f64>,
    geom: &MultiPatch<f64>,
    basis: &C1Basis<f64>,
    target: &TargetFunction,
    nodes: usize,
) -> Result<ErrorNorms, ProjectionError> {
    let gl = gauss_legendre(nodes);
    let breaks = basis.space.breaks();
    let mut qpts: Vec<(f64, f64)> = Vec::new();
    for w in breaks.windows(2) {
        let len = w[1] - w[0];
        for (t, wt) in &gl {
            qpts.push((w[0] + len * t, wt * len));
        }
    }

    let (mut e0, mut e1, mut e2) = (0.0, 0.0, 0.0);
    let (mut n0, mut n1, mut n2) = (0.0, 0.0, 0.0);
    for patch in &geom.patches {
        for (uq, wu) in &qpts {
            for (vq, wv) in &qpts {
                let fu = patch.geometry.eval(uq, vq, 1, 0)?;
                let fv = patch.geometry.eval(uq, vq, 0, 1)?;
                let det = (fu.x * fv.y - fu.y * fv.x).abs();
                let w = wu * wv * det;
                let fx = patch.geometry.eval(uq, vq, 0, 0)?;
                let ev = eval_iso_function(u, geom, patch.id, uq, vq, 2)?;
                let zv = (target.value)(fx.x, fx.y);
                let zg = (target.gradient)(fx.x, fx.y);
                let zh = (target.hessian)(fx.x, fx.y);
                e0 += w * (ev.value - zv).powi(2);
                n0 += w * zv * zv;
                e1 += w
                    * ((ev.gradient[0] - zg[0]).powi(2) + (ev.gradient[1] - zg[1]).powi(2));
                n1 += w * (zg[0] * zg[0] + zg[1] * zg[1]);
                let dh = [
                    ev.hessian[0] - zh[0],
                    ev.hessian[1] - zh[1],
                    ev.hessian[2] - zh[2],
                ];
                e2 += w * (dh[0] * dh[0] + 2.0 * dh[1] * dh[1] + dh[2] * dh[2]);
                n2 += w * (zh[0] * zh[0] + 2.0 * zh[1] * zh[1] + zh[2] * zh[2]);
            }
        }
    }

    // sup-norm on a 33-points-per-span grid per patch
    let spans = breaks.len() - 1;
    let grid = 33 * spans;
    let mut linf = 0.0_f64;
    for patch in &geom.patches {
        for a in 0..=grid {
            let uq = a as f64 / grid as f64;
            for b in 0..=grid {
                let vq = b as f64 / grid as f64;
                let fx = patch.geometry.eval(&uq, &vq, 0, 0)?;
                let g = u.grids[geom
                    .patches
                    .iter()
                    .position(|p| p.id == patch.id)
                    .unwrap()]
                .eval(&uq, &vq, 0, 0)?;
                linf = linf.max((g - (target.value)(fx.x, fx.y)).abs());
            }
        }
    }

    // 257 points along each interface (on the first patch's edge)
    let mut linf_itf = 0.0_f64;
    for itf in &geom.interfaces {
        let pos = geom
            .patches
            .iter()
            .position(|p| p.id == itf.edge_a.patch)
            .unwrap();
        let patch = &geom.patches[pos];
        for s in 0..257 {
            let t = s as f64 / 256.0;
            let (uq, vq) = match itf.edge_a.side {
                Side::Left => (0.0, t),
                Side::Right => (1.0, t),
                Side::Bottom => (t, 0.0),
                Side::Top => (t, 1.0),
            };
            let fx = patch.geometry.eval(&uq, &vq, 0, 0)?;
            let g = u.grids[pos].eval(&uq, &vq, 0, 0)?;
            linf_itf = linf_itf.max((g - (target.value)(fx.x, fx.y)).abs());
        }
    }

    Ok(ErrorNorms {
        l2: (e0 / n0.max(1e-300)).sqrt(),
        h1: (e1 / n1.max(1e-300)).sqrt(),
        h2: (e2 / n2.max(1e-300)).sqrt(),
        linf: linf.max(linf_itf),
        linf_interface: linf_itf,
    })
}

/// How the C1 space is glued per interface during a convergence run.
#[derive(Clone, Copy, Debug)]
pub enum C1Mode<'a> {
    /// Fitted linear gluing data of an AS-G1 geometry.
    Fitted(&'a [GluingData<Rat>]),
    /// Exact (higher-degree) gluing functions; works on any regular
    /// geometry but loses approximation power off the AS-G1 class.
    ExactGluing,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelRow {
    pub level: usize,
    pub h: f64,
    pub n_h: usize,
    pub e_l2: f64,
    pub e_h1: f64,
    pub e_h2: f64,
    pub e_linf: f64,
    pub e_linf_interface: f64,
    pub ord_l2: Option<f64>,
    pub ord_h1: Option<f64>,
    pub ord_h2: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub target: String,
    pub rows: Vec<LevelRow>,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("L,h,N_h,eL2,eH1,eH2,eLinf,ordL2,ordH1,ordH2\n");
        let fmt = |o: &Option<f64>| o.map(|v| format!("{v:.3}")).unwrap_or_default();
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.6e},{},{:.6e},{:.6e},{:.6e},{:.6e},{},{},{}\n",
                r.level,
                r.h,
                r.n_h,
                r.e_l2,
                r.e_h1,
                r.e_h2,
                r.e_linf,
                fmt(&r.ord_l2),
                fmt(&r.ord_h1),
                fmt(&r.ord_h2),
            ));
        }
        out
    }
}

/// Dyadic-refinement convergence study: build the C1 space, project the
/// target, and report errors and estimated orders per level.
pub fn run_convergence(
    geom: &MultiPatch<Rat>,
    mode: C1Mode,
    max_level: usize,
    target: &TargetFunction,
    gauss_nodes: Option<usize>,
) -> Result<ConvergenceReport, ProjectionError> {
    let geom_f = geometry_to_f64(geom)?;
    let h0 = 1.0 / (geom.space().inner_knot_count() + 1) as f64;
    let mut rows: Vec<LevelRow> = Vec::new();
    for level in 0..=max_level {
        let basis_rat = match mode {
            C1Mode::Fitted(gluing) => build_c1_space(geom, gluing, level)?,
            C1Mode::ExactGluing => build_c1_space_exact_gluing(geom, level)?,
        };
        let basis = basis_to_f64(&basis_rat);
        let nodes = gauss_nodes.unwrap_or(basis.space.degree() + 1);
        let (rows_m, z) = assemble_l2_sparse_with_nodes(&basis, &geom_f, target, nodes)?;
        // dense Cholesky for small spaces; preconditioned CG once a dense
        // factorization would dominate time and memory
        let c = if basis.dim() <= 2000 {
            let nh = z.len();
            let mut m = vec![vec![0.0; nh]; nh];
            for (i, row) in rows_m.iter().enumerate() {
                for (&j, &v) in row {
                    m[i][j] = v;
                }
            }
            project(&m, &z)?
        } else {
            project_cg(&rows_m, &z)?
        };
        let u = combine(&basis, &c)?;
        // error quadrature uses extra nodes so the measurement grid never
        // coincides with the collocation-like points of a coarse projection
        let err = compute_errors(&u, &geom_f, &basis, target, nodes + 2)?;
        let ord = |prev: f64, cur: f64| -> Option<f64> {
            if prev > 0.0 && cur > 0.0 {
                Some((prev / cur).log2())
            } else {
                None
            }
        };
        let (ord_l2, ord_h1, ord_h2) = match rows.last() {
            Some(prev) => (
                ord(prev.e_l2, err.l2),
                ord(prev.e_h1, err.h1),
                ord(prev.e_h2, err.h2),
            ),
            None => (None, None, None),
        };
        rows.push(LevelRow {
            level,
            h: h0 / (1u64 << level) as f64,
            n_h: basis.dim(),
            e_l2: err.l2,
            e_h1: err.h1,
            e_h2: err.h2,
            e_linf: err.linf,
            e_linf_interface: err.linf_interface,
            ord_l2,
            ord_h1,
            ord_h2,
        });
    }
    Ok(ConvergenceReport {
        target: target.name.to_string(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c1::level_space;
    use crate::gluing::check_asg1;
    use crate::scalar::Point2;
    use crate::spline::make_space;

    fn bilinear(id: usize, corners: [(i64, i64); 4], p: usize, r: i32, k: usize) -> PatchMap<Rat> {
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

    fn bilinear_pair(p: usize, r: i32, k: usize) -> (MultiPatch<Rat>, Vec<GluingData<Rat>>) {
        let a = bilinear(0, [(0, 0), (1, 3), (3, 0), (4, 4)], p, r, k);
        let b = bilinear(1, [(0, 0), (1, 3), (-3, 1), (-2, 5)], p, r, k);
        let mp = detect_topology(vec![a, b]).unwrap();
        let report = check_asg1(&mp, &mp.interfaces[0]).unwrap();
        assert!(report.is_asg1);
        (mp, vec![report.witness.unwrap()])
    }

    fn unit_square(p: usize, r: i32, k: usize) -> MultiPatch<Rat> {
        detect_topology(vec![bilinear(0, [(0, 0), (0, 1), (1, 0), (1, 1)], p, r, k)]).unwrap()
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in 1..=6 {
            let gl = gauss_legendre(n);
            assert!((gl.iter().map(|(_, w)| w).sum::<f64>() - 1.0).abs() < 1e-14);
            for deg in 0..=(2 * n - 1) {
                let quad: f64 = gl.iter().map(|(t, w)| w * t.powi(deg as i32)).sum();
                let exact = 1.0 / (deg as f64 + 1.0);
                assert!((quad - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn bilinear_mass_matrix_matches_kronecker_oracle() {
        // identity square, p = 1, k = 0: four hat functions; the mass matrix
        // is the Kronecker square of the 1D linear mass [[1/3,1/6],[1/6,1/3]]
        let mp = unit_square(1, 0, 0);
        let basis = basis_to_f64(&build_c1_space(&mp, &[], 0).unwrap());
        let geom_f = geometry_to_f64(&mp).unwrap();
        let (m, _) = assemble_l2_system(&basis, &geom_f, &TargetFunction::trig()).unwrap();
        let one_d = [[1.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 1.0 / 3.0]];
        for fi in 0..4 {
            for fj in 0..4 {
                // function index maps to coefficient (i, j) via the basis
                let (_, i1, j1) = basis.decode(basis.functions[fi].free_col);
                let (_, i2, j2) = basis.decode(basis.functions[fj].free_col);
                let expected = one_d[i1][i2] * one_d[j1][j2];
                assert!((m[fi][fj] - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn mass_sum_equals_area_and_matrix_is_symmetric() {
        let (mp, gluing) = bilinear_pair(2, 1, 0);
        let basis = basis_to_f64(&build_c1_space(&mp, &gluing, 0).unwrap());
        let geom_f = geometry_to_f64(&mp).unwrap();
        let (m, _) = assemble_l2_system(&basis, &geom_f, &TargetFunction::trig()).unwrap();
        // shoelace area of the two quads
        let quad_area = |c: [(f64, f64); 4]| -> f64 {
            // corners in order F(0,0), F(0,1), F(1,1), F(1,0)
            let ring = [c[0], c[1], c[3], c[2]];
            let mut s = 0.0;
            for i in 0..4 {
                let (x1, y1) = ring[i];
                let (x2, y2) = ring[(i + 1) % 4];
                s += x1 * y2 - x2 * y1;
            }
            s.abs() / 2.0
        };
        let area = quad_area([(0.0, 0.0), (1.0, 3.0), (3.0, 0.0), (4.0, 4.0)])
            + quad_area([(0.0, 0.0), (1.0, 3.0), (-3.0, 1.0), (-2.0, 5.0)]);
        let total: f64 = m.iter().map(|r| r.iter().sum::<f64>()).sum();
        assert!((total - area).abs() < 1e-9, "sum {total} area {area}");
        for i in 0..m.len() {
            for j in 0..m.len() {
                assert!((m[i][j] - m[j][i]).abs() == 0.0);
            }
        }
    }

    #[test]
    fn projection_reproduces_linear_target() {
        let (mp, gluing) = bilinear_pair(3, 1, 0);
        let basis = basis_to_f64(&build_c1_space(&mp, &gluing, 0).unwrap());
        let geom_f = geometry_to_f64(&mp).unwrap();
        let target = TargetFunction::linear_x1();
        let (m, z) = assemble_l2_system(&basis, &geom_f, &target).unwrap();
        let c = project(&m, &z).unwrap();
        let u = combine(&basis, &c).unwrap();
        let err = compute_errors(&u, &geom_f, &basis, &target, 4).unwrap();
        assert!(err.l2 < 1e-11, "l2 {}", err.l2);
        assert!(err.h1 < 1e-10, "h1 {}", err.h1);
        assert!(err.linf < 1e-10, "linf {}", err.linf);
    }

    #[test]
    fn cg_solve_matches_dense_cholesky() {
        let (mp, gluing) = bilinear_pair(3, 1, 1);
        let basis = basis_to_f64(&build_c1_space(&mp, &gluing, 1).unwrap());
        let geom_f = geometry_to_f64(&mp).unwrap();
        let target = TargetFunction::trig();
        let (rows, z) = assemble_l2_sparse_with_nodes(&basis, &geom_f, &target, 4).unwrap();
        let nh = z.len();
        let mut m = vec![vec![0.0; nh]; nh];
        for (i, row) in rows.iter().enumerate() {
            for (&j, &v) in row {
                m[i][j] = v;
            }
        }
        let cd = project(&m, &z).unwrap();
        let cc = project_cg(&rows, &z).unwrap();
        let scale = cd.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        for (a, b) in cd.iter().zip(&cc) {
            assert!((a - b).abs() <= 1e-8 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn perturbing_a_coefficient_increases_l2_error() {
        let (mp, gluing) = bilinear_pair(2, 1, 0);
        let basis = basis_to_f64(&build_c1_space(&mp, &gluing, 0).unwrap());
        let geom_f = geometry_to_f64(&mp).unwrap();
        let target = TargetFunction::trig();
        let (m, z) = assemble_l2_system(&basis, &geom_f, &target).unwrap();
        let c = project(&m, &z).unwrap();
        let base = compute_errors(&combine(&basis, &c).unwrap(), &geom_f, &basis, &target, 4)
            .unwrap()
            .l2;
        for idx in [0, c.len() / 2, c.len() - 1] {
            let mut cp = c.clone();
            cp[idx] += 0.05;
            let e = compute_errors(
                &combine(&basis, &cp).unwrap(),
                &geom_f,
                &basis,
                &target,
                4,
            )
            .unwrap()
            .l2;
            assert!(e > base, "idx {idx}: {e} <= {base}");
        }
    }

    #[test]
    fn single_patch_convergence_orders() {
        let mp = unit_square(3, 1, 0);
        let report =
            run_convergence(&mp, C1Mode::Fitted(&[]), 3, &TargetFunction::trig(), None).unwrap();
        let last = report.rows.last().unwrap();
        assert!(last.ord_l2.unwrap() > 3.5, "L2 order {:?}", last.ord_l2);
        assert!(last.ord_h1.unwrap() > 2.5, "H1 order {:?}", last.ord_h1);
        assert!(last.ord_h2.unwrap() > 1.5, "H2 order {:?}", last.ord_h2);
        // error monotonicity
        for w in report.rows.windows(2) {
            assert!(w[1].e_l2 < w[0].e_l2);
        }
    }

    #[test]
    fn two_patch_asg1_convergence() {
        let (mp, gluing) = bilinear_pair(3, 1, 0);
        let report = run_convergence(
            &mp,
            C1Mode::Fitted(&gluing),
            2,
            &TargetFunction::trig(),
            None,
        )
        .unwrap();
        let last = report.rows.last().unwrap();
        assert!(last.ord_l2.unwrap() > 3.0, "L2 order {:?}", last.ord_l2);
        for w in report.rows.windows(2) {
            assert!(w[1].e_l2 < w[0].e_l2);
        }
        // csv shape
        let csv = report.to_csv();
        assert!(csv.starts_with("L,h,N_h,eL2,eH1,eH2,eLinf,ordL2,ordH1,ordH2\n"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn quadrature_refinement_is_consistent() {
        // doubling the Gauss nodes from an adequate baseline moves the
        // reported errors by well under 0.1%
        let (mp, gluing) = bilinear_pair(2, 1, 0);
        let r1 = run_convergence(
            &mp,
            C1Mode::Fitted(&gluing),
            1,
            &TargetFunction::trig(),
            Some(6),
        )
        .unwrap();
        let r2 = run_convergence(
            &mp,
            C1Mode::Fitted(&gluing),
            1,
            &TargetFunction::trig(),
            Some(12),
        )
        .unwrap();
        for (a, b) in r1.rows.iter().zip(&r2.rows) {
            assert!((a.e_l2 - b.e_l2).abs() / b.e_l2 < 1e-3);
            assert!((a.e_h1 - b.e_h1).abs() / b.e_h1 < 1e-3);
        }
    }

    #[test]
    fn exact_gluing_mode_runs_on_asg1_geometry() {
        // on an AS-G1 geometry both modes give C1 spaces; the exact-gluing
        // space is a subspace, so its error is at least as large
        let (mp, gluing) = bilinear_pair(2, 1, 0);
        let fit = run_convergence(
            &mp,
            C1Mode::Fitted(&gluing),
            1,
            &TargetFunction::trig(),
            None,
        )
        .unwrap();
        let exa = run_convergence(&mp, C1Mode::ExactGluing, 1, &TargetFunction::trig(), None)
            .unwrap();
        for (a, b) in fit.rows.iter().zip(&exa.rows) {
            assert!(b.e_l2 >= a.e_l2 * 0.999, "exact {} fitted {}", b.e_l2, a.e_l2);
        }
    }

    #[test]
    fn level_space_mesh_size() {
        let s = make_space::<Rat>(3, 1, 1).unwrap();
        let fine = level_space(&s, 2).unwrap();
        assert_eq!(fine.breaks().len() - 1, 8);
    }
}
