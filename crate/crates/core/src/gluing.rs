//! Gluing data of an interface: exact data from determinants of the patch
//! tangents, a linear/quadratic fit of it, and the AS-G1 certification test.
//!
//! Conventions at an interface (after reorientation, both patches trace the
//! shared curve as F(0, v) with matching v-direction):
//!   alpha_l(v) = det(D_u F_l(0,v), D_v G(v)),
//!   alpha_r(v) = det(D_u F_r(0,v), D_v G(v)),
//!   beta_bar(v) = det(D_u F_l(0,v), D_u F_r(0,v)),
//! where G is the shared trace. These satisfy the exact identity
//!   alpha_r * D_u F_l(0,.) - alpha_l * D_u F_r(0,.) + beta_bar * D_v G = 0.
//! A parameterization is AS-G1 at the interface when the identity admits
//! nontrivial gluing functions with both alphas linear (and then beta splits
//! into linear factors beta_l, beta_r).

use crate::bernstein::{curve_components, de_casteljau_split, spline_det, PiecewiseBernstein};
use crate::linalg::{null_space_dense, solve_dense};
use crate::multipatch::{Interface, MultiPatch, MultiPatchError, PatchMap};
use crate::scalar::Scalar;
use crate::spline::{CurveSpline, ScalarSpline, SplineError};
use serde::Serialize;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum GluingError {
    #[error("interface tangent vanishes near v = {0}")]
    DegenerateTangent(f64),
    #[error("exact gluing data violates the endpoint sign condition")]
    SignCondition,
    #[error("lambda_beta must be positive")]
    NonPositiveWeight,
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error(transparent)]
    MultiPatch(#[from] MultiPatchError),
}

/// Exact gluing data of an interface, as splines over the interface
/// parameter: the alphas live in degree 2p-1, regularity r-1; beta_bar in
/// degree 2p, regularity r.
#[derive(Clone, Debug)]
pub struct ExactGluing<T> {
    pub alpha_l: ScalarSpline<T>,
    pub alpha_r: ScalarSpline<T>,
    pub beta_bar: ScalarSpline<T>,
}

/// Linear gluing data: endpoints of the linear alphas and of the linear
/// factors beta_l, beta_r. The derived beta(v) = alpha_l beta_r -
/// alpha_r beta_l is quadratic.
#[derive(Clone, Debug, PartialEq)]
pub struct GluingData<T> {
    pub a0_l: T,
    pub a1_l: T,
    pub a0_r: T,
    pub a1_r: T,
    pub b0_l: T,
    pub b1_l: T,
    pub b0_r: T,
    pub b1_r: T,
}

impl<T: Scalar> GluingData<T> {
    fn lerp(a: &T, b: &T, v: &T) -> T {
        a.clone() * (T::one() - v.clone()) + b.clone() * v.clone()
    }

    pub fn alpha_l(&self, v: &T) -> T {
        Self::lerp(&self.a0_l, &self.a1_l, v)
    }

    pub fn alpha_r(&self, v: &T) -> T {
        Self::lerp(&self.a0_r, &self.a1_r, v)
    }

    pub fn beta_l(&self, v: &T) -> T {
        Self::lerp(&self.b0_l, &self.b1_l, v)
    }

    pub fn beta_r(&self, v: &T) -> T {
        Self::lerp(&self.b0_r, &self.b1_r, v)
    }

    /// The derived quadratic beta(v) = alpha_l(v) beta_r(v) - alpha_r(v) beta_l(v).
    pub fn beta(&self, v: &T) -> T {
        self.alpha_l(v) * self.beta_r(v) - self.alpha_r(v) * self.beta_l(v)
    }

    /// Bernstein coefficients of beta on [0,1] (degree 2).
    pub fn beta_bernstein(&self) -> [T; 3] {
        let half = T::from_ratio(1, 2);
        [
            self.a0_l.clone() * self.b0_r.clone() - self.a0_r.clone() * self.b0_l.clone(),
            (self.a0_l.clone() * self.b1_r.clone() + self.a1_l.clone() * self.b0_r.clone()
                - self.a0_r.clone() * self.b1_l.clone()
                - self.a1_r.clone() * self.b0_l.clone())
                * half,
            self.a1_l.clone() * self.b1_r.clone() - self.a1_r.clone() * self.b1_l.clone(),
        ]
    }

    /// The endpoint certificate for the sign condition alpha_l alpha_r < 0
    /// on [0,1]: each alpha keeps its sign (same-signed endpoints) and the
    /// two alphas have opposite signs.
    pub fn sign_certificate(&self) -> bool {
        sign_certificate(&[
            self.a0_l.clone(),
            self.a1_l.clone(),
            self.a0_r.clone(),
            self.a1_r.clone(),
        ])
    }
}

fn sign_certificate<T: Scalar>(a: &[T]) -> bool {
    let prod_pos = |x: &T, y: &T| {
        let p = x.clone() * y.clone();
        !p.near_zero() && p.is_positive()
    };
    let prod_neg = |x: &T, y: &T| {
        let p = x.clone() * y.clone();
        !p.near_zero() && p.is_negative()
    };
    prod_pos(&a[0], &a[1]) && prod_pos(&a[2], &a[3]) && prod_neg(&a[0], &a[2])
}

/// The reoriented interface tangent data: both u-derivative traces and the
/// derivative of the shared curve.
struct InterfaceFrame<T> {
    du_l: CurveSpline<T>,
    du_r: CurveSpline<T>,
    dv_trace: CurveSpline<T>,
}

fn interface_frame<T: Scalar>(
    geom: &MultiPatch<T>,
    interface: &Interface,
) -> Result<InterfaceFrame<T>, GluingError> {
    let (pa, pb) = geom.reoriented_pair(interface);
    let frame = frame_of_pair(&pa, &pb)?;
    // the shared trace must have a nonvanishing tangent
    let breaks = frame.dv_trace.space.breaks();
    let p = frame.dv_trace.space.degree();
    for w in breaks.windows(2) {
        for j in 0..=(p + 2) {
            let t = w[0].clone()
                + (w[1].clone() - w[0].clone()) * T::from_ratio(j as i64, (p + 2) as i64);
            let d = frame.dv_trace.eval(&t, 0)?;
            if d.x.near_zero() && d.y.near_zero() {
                return Err(GluingError::DegenerateTangent(t.to_f64()));
            }
        }
    }
    Ok(frame)
}

fn frame_of_pair<T: Scalar>(
    pa: &PatchMap<T>,
    pb: &PatchMap<T>,
) -> Result<InterfaceFrame<T>, GluingError> {
    let du_l = pa.geometry.derivative_u()?.restrict_u(&T::zero())?;
    let du_r = pb.geometry.derivative_u()?.restrict_u(&T::zero())?;
    let dv_trace = pa.geometry.restrict_u(&T::zero())?.derivative()?;
    Ok(InterfaceFrame { du_l, du_r, dv_trace })
}

/// Exact gluing data of an interface from the determinant formulas.
pub fn compute_exact_gluing<T: Scalar>(
    geom: &MultiPatch<T>,
    interface: &Interface,
) -> Result<ExactGluing<T>, GluingError> {
    let frame = interface_frame(geom, interface)?;
    Ok(ExactGluing {
        alpha_l: spline_det(&frame.du_l, &frame.dv_trace)?,
        alpha_r: spline_det(&frame.du_r, &frame.dv_trace)?,
        beta_bar: spline_det(&frame.du_l, &frame.du_r)?,
    })
}

/// Restrict a global Bernstein polynomial on [0,1] (degree = coeffs.len()-1)
/// to the given break intervals.
pub fn global_bernstein_to_piecewise<T: Scalar>(
    coeffs: &[T],
    breaks: &[T],
) -> PiecewiseBernstein<T> {
    let mut spans = Vec::with_capacity(breaks.len() - 1);
    for w in breaks.windows(2) {
        let (a, b) = (w[0].clone(), w[1].clone());
        // split off [a, 1], then [a, b] inside it
        let (_, right) = de_casteljau_split(coeffs, &a);
        let local = if a == T::one() {
            right
        } else {
            let s = (b - a.clone()) / (T::one() - a);
            de_casteljau_split(&right, &s).0
        };
        spans.push(local);
    }
    PiecewiseBernstein {
        degree: coeffs.len() - 1,
        breaks: breaks.to_vec(),
        spans,
    }
}

/// The two coordinate polynomials of the G1 residual
/// alpha_r * D_u F_l - alpha_l * D_u F_r + beta * D_v G, where the gluing
/// functions are given in piecewise Bernstein form on the interface breaks.
fn residual_components<T: Scalar>(
    frame: &InterfaceFrame<T>,
    alpha_l: &PiecewiseBernstein<T>,
    alpha_r: &PiecewiseBernstein<T>,
    beta: &PiecewiseBernstein<T>,
) -> Result<(PiecewiseBernstein<T>, PiecewiseBernstein<T>), GluingError> {
    let (lx, ly) = curve_components(&frame.du_l)?;
    let (rx, ry) = curve_components(&frame.du_r)?;
    let (tx, ty) = curve_components(&frame.dv_trace)?;
    let comp = |l: &ScalarSpline<T>, r: &ScalarSpline<T>, t: &ScalarSpline<T>| {
        let bl = PiecewiseBernstein::from_spline(l)?;
        let br = PiecewiseBernstein::from_spline(r)?;
        let bt = PiecewiseBernstein::from_spline(t)?;
        alpha_r
            .mul(&bl)?
            .sub(&alpha_l.mul(&br)?)?
            .add(&beta.mul(&bt)?)
    };
    Ok((comp(&lx, &rx, &tx)?, comp(&ly, &ry, &ty)?))
}

/// Fit linear gluing data to exact data: alphas interpolate the exact
/// alphas at the endpoints; the beta factors minimize
/// int (beta_bar - beta)^2 + lambda_beta (int beta_l^2 + int beta_r^2)
/// subject to beta matching beta_bar at both endpoints.
pub fn fit_linear_gluing<T: Scalar>(
    exact: &ExactGluing<T>,
    lambda_beta: &T,
) -> Result<GluingData<T>, GluingError> {
    if lambda_beta.near_zero() || lambda_beta.is_negative() {
        return Err(GluingError::NonPositiveWeight);
    }
    let a0_l = exact.alpha_l.eval(&T::zero(), 0)?;
    let a1_l = exact.alpha_l.eval(&T::one(), 0)?;
    let a0_r = exact.alpha_r.eval(&T::zero(), 0)?;
    let a1_r = exact.alpha_r.eval(&T::one(), 0)?;
    if !sign_certificate(&[a0_l.clone(), a1_l.clone(), a0_r.clone(), a1_r.clone()]) {
        return Err(GluingError::SignCondition);
    }

    let breaks = exact.beta_bar.space.breaks();
    let beta_bar = PiecewiseBernstein::from_spline(&exact.beta_bar)?;
    let alpha_l = global_bernstein_to_piecewise(&[a0_l.clone(), a1_l.clone()], &breaks);
    let alpha_r = global_bernstein_to_piecewise(&[a0_r.clone(), a1_r.clone()], &breaks);
    let one_minus_v = global_bernstein_to_piecewise(&[T::one(), T::zero()], &breaks);
    let v_poly = global_bernstein_to_piecewise(&[T::zero(), T::one()], &breaks);

    // beta as a linear form in the unknowns b = (b0_l, b1_l, b0_r, b1_r)
    let minus_one = -T::one();
    let psi: [PiecewiseBernstein<T>; 4] = [
        alpha_r.mul(&one_minus_v)?.scale(&minus_one),
        alpha_r.mul(&v_poly)?.scale(&minus_one),
        alpha_l.mul(&one_minus_v)?,
        alpha_l.mul(&v_poly)?,
    ];
    // regularizer Gram matrix of (1-v, v) on [0,1]
    let third = T::from_ratio(1, 3);
    let sixth = T::from_ratio(1, 6);
    let reg = |i: usize, j: usize| -> T {
        // same factor (l-l or r-r) only
        if (i < 2) != (j < 2) {
            return T::zero();
        }
        if i == j {
            third.clone()
        } else {
            sixth.clone()
        }
    };

    // KKT system: 4 unknowns + 2 multipliers for the endpoint constraints
    //   beta(0) = a0_l b0_r - a0_r b0_l = beta_bar(0)
    //   beta(1) = a1_l b1_r - a1_r b1_l = beta_bar(1)
    let mut kkt = vec![vec![T::zero(); 6]; 6];
    let mut rhs = vec![T::zero(); 6];
    let two = T::from_int(2);
    for i in 0..4 {
        for j in 0..4 {
            kkt[i][j] = two.clone()
                * (psi[i].mul(&psi[j])?.integral() + lambda_beta.clone() * reg(i, j));
        }
        rhs[i] = two.clone() * beta_bar.mul(&psi[i])?.integral();
    }
    let c_rows: [[T; 4]; 2] = [
        [-a0_r.clone(), T::zero(), a0_l.clone(), T::zero()],
        [T::zero(), -a1_r.clone(), T::zero(), a1_l.clone()],
    ];
    for (ci, row) in c_rows.iter().enumerate() {
        for j in 0..4 {
            kkt[4 + ci][j] = row[j].clone();
            kkt[j][4 + ci] = row[j].clone();
        }
    }
    rhs[4] = exact.beta_bar.eval(&T::zero(), 0)?;
    rhs[5] = exact.beta_bar.eval(&T::one(), 0)?;

    let sol = solve_dense(&kkt, &rhs).expect("KKT system is nonsingular for lambda_beta > 0");
    Ok(GluingData {
        a0_l,
        a1_l,
        a0_r,
        a1_r,
        b0_l: sol[0].clone(),
        b1_l: sol[1].clone(),
        b0_r: sol[2].clone(),
        b1_r: sol[3].clone(),
    })
}

/// Serializable per-interface diagnostics of the AS-G1 test.
#[derive(Debug, Clone, Serialize)]
pub struct AsG1Diagnostics {
    pub patch_l: usize,
    pub patch_r: usize,
    pub is_asg1: bool,
    /// Degree of the space holding the exact alphas (2p-1).
    pub alpha_degree: usize,
    /// Degree of the space holding exact beta_bar (2p).
    pub beta_bar_degree: usize,
    /// Whether the exact alphas happen to be linear already.
    pub exact_alphas_linear: bool,
    /// Dimension of the null space of the 7-unknown certification system.
    pub nullity: usize,
    /// Witness endpoints (alpha_l(0), alpha_l(1), alpha_r(0), alpha_r(1)).
    pub witness_alpha_endpoints: Option<[f64; 4]>,
}

#[derive(Debug, Clone)]
pub struct AsG1Report<T> {
    pub is_asg1: bool,
    pub witness: Option<GluingData<T>>,
    pub diagnostics: AsG1Diagnostics,
}

/// Decide whether an interface admits linear gluing data with the required
/// sign pattern. Assembles the homogeneous system in the 7 unknowns
/// (a0_l, a1_l, a0_r, a1_r, q0, q1, q2) with beta quadratic in Bernstein
/// form, and searches the null space for a sign-feasible vector.
pub fn check_asg1<T: Scalar>(
    geom: &MultiPatch<T>,
    interface: &Interface,
) -> Result<AsG1Report<T>, GluingError> {
    let frame = interface_frame(geom, interface)?;
    let breaks = frame.du_l.space.breaks();

    // columns of the residual system, one per unknown
    let mut columns: Vec<Vec<T>> = Vec::with_capacity(7);
    for t in 0..7 {
        let mut lin_l = [T::zero(), T::zero()];
        let mut lin_r = [T::zero(), T::zero()];
        let mut quad = [T::zero(), T::zero(), T::zero()];
        match t {
            0 | 1 => lin_l[t] = T::one(),
            2 | 3 => lin_r[t - 2] = T::one(),
            _ => quad[t - 4] = T::one(),
        }
        let alpha_l = global_bernstein_to_piecewise(&lin_l, &breaks);
        let alpha_r = global_bernstein_to_piecewise(&lin_r, &breaks);
        let beta = global_bernstein_to_piecewise(&quad, &breaks);
        let (rx, ry) = residual_components(&frame, &alpha_l, &alpha_r, &beta)?;
        let mut col = Vec::new();
        for pb in [rx, ry] {
            for span in &pb.spans {
                col.extend(span.iter().cloned());
            }
        }
        columns.push(col);
    }
    let rows = columns[0].len();
    let matrix: Vec<Vec<T>> = (0..rows)
        .map(|r| (0..7).map(|c| columns[c][r].clone()).collect())
        .collect();
    let null_basis = null_space_dense(&matrix);

    let exact = compute_exact_gluing(geom, interface)?;
    let exact_alphas_linear = spline_is_linear(&exact.alpha_l)? && spline_is_linear(&exact.alpha_r)?;

    // a candidate counts only if it is sign-feasible and its beta admits the
    // linear factorization of the definition
    let mut found: Option<(Vec<T>, GluingData<T>)> = None;
    let feasible = |w: &[T]| sign_certificate(&w[0..4]);
    let consider = |w: Vec<T>,
                    store: &mut Option<(Vec<T>, GluingData<T>)>|
     -> Result<(), GluingError> {
        if store.is_some() {
            return Ok(());
        }
        for cand in [w.clone(), w.iter().map(|x| -x.clone()).collect()] {
            if feasible(&cand) {
                if let Some(gd) = reconstruct_gluing(&cand)? {
                    *store = Some((cand, gd));
                    return Ok(());
                }
            }
        }
        Ok(())
    };

    // candidate from the exact data, when it is already of the linear kind
    if exact_alphas_linear {
        if let Some(q) = quadratic_bernstein_of(&exact.beta_bar)? {
            let w = vec![
                exact.alpha_l.eval(&T::zero(), 0)?,
                exact.alpha_l.eval(&T::one(), 0)?,
                exact.alpha_r.eval(&T::zero(), 0)?,
                exact.alpha_r.eval(&T::one(), 0)?,
                q[0].clone(),
                q[1].clone(),
                q[2].clone(),
            ];
            if in_null_space(&matrix, &w) {
                consider(w, &mut found)?;
            }
        }
    }
    for b in &null_basis {
        consider(b.clone(), &mut found)?;
    }
    if found.is_none() && null_basis.len() >= 2 {
        // deterministic random combinations of the null-space basis
        let mut state: u64 = 0x9e3779b97f4a7c15;
        for _ in 0..400 {
            let mut w = vec![T::zero(); 7];
            for b in &null_basis {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                let c = ((state >> 33) % 11) as i64 - 5;
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi = wi.clone() + bi.clone() * T::from_int(c);
                }
            }
            consider(w, &mut found)?;
            if found.is_some() {
                break;
            }
        }
    }

    let is_asg1 = found.is_some();
    let (witness_vec, witness) = match found {
        Some((w, gd)) => (Some(w), Some(gd)),
        None => (None, None),
    };
    let p = geom.space().degree();
    let diagnostics = AsG1Diagnostics {
        patch_l: interface.edge_a.patch,
        patch_r: interface.edge_b.patch,
        is_asg1,
        alpha_degree: 2 * p - 1,
        beta_bar_degree: 2 * p,
        exact_alphas_linear,
        nullity: null_basis.len(),
        witness_alpha_endpoints: witness_vec
            .as_ref()
            .map(|w| [w[0].to_f64(), w[1].to_f64(), w[2].to_f64(), w[3].to_f64()]),
    };
    Ok(AsG1Report {
        is_asg1,
        witness,
        diagnostics,
    })
}

fn in_null_space<T: Scalar>(matrix: &[Vec<T>], w: &[T]) -> bool {
    matrix.iter().all(|row| {
        let mut acc = T::zero();
        for (a, x) in row.iter().zip(w) {
            acc = acc + a.clone() * x.clone();
        }
        acc.near_zero()
    })
}

fn spline_is_linear<T: Scalar>(f: &ScalarSpline<T>) -> Result<bool, GluingError> {
    let f0 = f.eval(&T::zero(), 0)?;
    let f1 = f.eval(&T::one(), 0)?;
    let n = 4 * (f.space.degree() + 1);
    for j in 1..n {
        let t = T::from_ratio(j as i64, n as i64);
        let lin = f0.clone() * (T::one() - t.clone()) + f1.clone() * t.clone();
        if !f.eval(&t, 0)?.near_eq(&lin) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Global quadratic Bernstein coefficients of a spline, if it is in fact a
/// global quadratic polynomial.
fn quadratic_bernstein_of<T: Scalar>(f: &ScalarSpline<T>) -> Result<Option<[T; 3]>, GluingError> {
    let half = T::from_ratio(1, 2);
    let q0 = f.eval(&T::zero(), 0)?;
    let q2 = f.eval(&T::one(), 0)?;
    let mid = f.eval(&half, 0)?;
    let two = T::from_int(2);
    let q1 = two.clone() * mid - (q0.clone() + q2.clone()) * half.clone();
    // verify on a dense sample
    let n = 4 * (f.space.degree() + 1);
    for j in 0..=n {
        let t = T::from_ratio(j as i64, n as i64);
        let omt = T::one() - t.clone();
        let val = q0.clone() * omt.clone() * omt.clone()
            + two.clone() * q1.clone() * omt * t.clone()
            + q2.clone() * t.clone() * t.clone();
        if !f.eval(&t, 0)?.near_eq(&val) {
            return Ok(None);
        }
    }
    Ok(Some([q0, q1, q2]))
}

/// Split a sign-feasible null-space vector into full gluing data by
/// factoring the quadratic beta as alpha_l beta_r - alpha_r beta_l with the
/// minimal-norm regularizer. Returns None when no such factorization with
/// linear factors exists (possible when the alphas are proportional).
fn reconstruct_gluing<T: Scalar>(w: &[T]) -> Result<Option<GluingData<T>>, GluingError> {
    let (a0_l, a1_l, a0_r, a1_r) = (w[0].clone(), w[1].clone(), w[2].clone(), w[3].clone());
    // constraints C b = q in the degree-2 Bernstein basis,
    // b = (b0_l, b1_l, b0_r, b1_r)
    let half = T::from_ratio(1, 2);
    let c: Vec<Vec<T>> = vec![
        vec![-a0_r.clone(), T::zero(), a0_l.clone(), T::zero()],
        vec![
            -a1_r.clone() * half.clone(),
            -a0_r.clone() * half.clone(),
            a1_l.clone() * half.clone(),
            a0_l.clone() * half.clone(),
        ],
        vec![T::zero(), -a1_r.clone(), T::zero(), a1_l.clone()],
    ];
    // particular solution of C b = q via reduced row echelon form
    let augmented: Vec<Vec<T>> = c
        .iter()
        .zip(&w[4..7])
        .map(|(row, qi)| {
            let mut r = row.clone();
            r.push(qi.clone());
            r
        })
        .collect();
    let (red, pivot_cols) = crate::linalg::rref(&augmented);
    if pivot_cols.contains(&4) {
        // the quadratic beta does not factor over these alphas
        return Ok(None);
    }
    let mut b0 = vec![T::zero(); 4];
    for (r, &pc) in pivot_cols.iter().enumerate() {
        b0[pc] = red[r][4].clone();
    }
    // minimum-regularizer element of the solution family: b = b0 + N y with
    // N spanning the null space of C
    let null = crate::linalg::null_space_dense(&c);
    if !null.is_empty() {
        let third = T::from_ratio(1, 3);
        let sixth = T::from_ratio(1, 6);
        let r_mat = |i: usize, j: usize| -> T {
            if (i < 2) != (j < 2) {
                T::zero()
            } else if i == j {
                third.clone()
            } else if i / 2 == j / 2 {
                sixth.clone()
            } else {
                T::zero()
            }
        };
        let apply_r = |x: &[T]| -> Vec<T> {
            (0..4)
                .map(|i| {
                    let mut acc = T::zero();
                    for j in 0..4 {
                        acc = acc + r_mat(i, j) * x[j].clone();
                    }
                    acc
                })
                .collect()
        };
        let dim = null.len();
        let mut mat = vec![vec![T::zero(); dim]; dim];
        let mut rhs = vec![T::zero(); dim];
        let rb0 = apply_r(&b0);
        for (a, na) in null.iter().enumerate() {
            let rna = apply_r(na);
            for (b, nb) in null.iter().enumerate() {
                let mut acc = T::zero();
                for i in 0..4 {
                    acc = acc + nb[i].clone() * rna[i].clone();
                }
                mat[b][a] = acc;
            }
            let mut acc = T::zero();
            for i in 0..4 {
                acc = acc + na[i].clone() * rb0[i].clone();
            }
            rhs[a] = -acc;
        }
        let y = solve_dense(&mat, &rhs)
            .expect("projected regularizer is positive definite on the null space");
        for (na, yi) in null.iter().zip(&y) {
            for i in 0..4 {
                b0[i] = b0[i].clone() + na[i].clone() * yi.clone();
            }
        }
    }
    Ok(Some(GluingData {
        a0_l,
        a1_l,
        a0_r,
        a1_r,
        b0_l: b0[0].clone(),
        b1_l: b0[1].clone(),
        b0_r: b0[2].clone(),
        b1_r: b0[3].clone(),
    }))
}

/// The G1 residual of explicit gluing data on an interface, as a pair of
/// piecewise Bernstein polynomials; identically zero iff the data glues the
/// two patches with G1 continuity.
pub fn gluing_residual<T: Scalar>(
    geom: &MultiPatch<T>,
    interface: &Interface,
    data: &GluingData<T>,
) -> Result<(PiecewiseBernstein<T>, PiecewiseBernstein<T>), GluingError> {
    let frame = interface_frame(geom, interface)?;
    let breaks = frame.du_l.space.breaks();
    let alpha_l = global_bernstein_to_piecewise(&[data.a0_l.clone(), data.a1_l.clone()], &breaks);
    let alpha_r = global_bernstein_to_piecewise(&[data.a0_r.clone(), data.a1_r.clone()], &breaks);
    let beta = global_bernstein_to_piecewise(&data.beta_bernstein(), &breaks);
    residual_components(&frame, &alpha_l, &alpha_r, &beta)
}
