//! Univariate and tensor-product B-spline spaces with exact arithmetic.
//!
//! Spaces are always of the uniform kind: degree `p`, inner-knot continuity
//! `r`, and `k` uniform inner knots of multiplicity `p - r` on [0,1], so the
//! dimension is `n + 1` with `n = p + k(p - r)`. Non-uniform knot vectors are
//! deliberately not representable.

use crate::linalg::{solve_dense_multi, LinAlgError};
use crate::scalar::{Point2, Scalar};
use serde::{Deserialize, Serialize};
use std::fmt::Debug;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SplineError {
    #[error("degenerate space parameters: p={p}, r={r}, k={k}")]
    DegenerateParameters { p: usize, r: i32, k: usize },
    #[error("parameter outside [0,1]")]
    OutOfDomain,
    #[error("coefficient count {got} does not match space dimension {expected}")]
    CoefficientCount { got: usize, expected: usize },
    #[error("target space does not contain the source space")]
    NonNested,
    #[error("knot sequences do not match")]
    KnotMismatch,
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

/// Number pipeline selector carried by geometry files and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NumberMode {
    #[default]
    ExactRational,
    Float64,
}

/// The univariate spline space `S_k^{p,r}([0,1])`.
#[derive(Clone, PartialEq, Debug)]
pub struct SplineSpace<T> {
    p: usize,
    r: i32,
    k: usize,
    knots: Vec<T>,
}

/// Spec-facing constructor: `0 <= r <= p` as for geometry spaces.
pub fn make_space<T: Scalar>(p: usize, r: i32, k: usize) -> Result<SplineSpace<T>, SplineError> {
    if p < 1 || r < 0 || r > p as i32 {
        return Err(SplineError::DegenerateParameters { p, r, k });
    }
    SplineSpace::new(p, r, k)
}

impl<T: Scalar> SplineSpace<T> {
    /// Internal constructor; also admits `p = 0` and `r = -1` for derivative
    /// spaces (inner multiplicity `p + 1`, i.e. discontinuous pieces).
    pub fn new(p: usize, r: i32, k: usize) -> Result<Self, SplineError> {
        if r < -1 || r > p as i32 {
            return Err(SplineError::DegenerateParameters { p, r, k });
        }
        let mult = (p as i32 - r) as usize;
        let mut knots = Vec::with_capacity(2 * (p + 1) + k * mult);
        for _ in 0..=p {
            knots.push(T::zero());
        }
        for i in 1..=k {
            let z = T::from_ratio(i as i64, (k + 1) as i64);
            for _ in 0..mult {
                knots.push(z.clone());
            }
        }
        for _ in 0..=p {
            knots.push(T::one());
        }
        Ok(SplineSpace { p, r, k, knots })
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn regularity(&self) -> i32 {
        self.r
    }

    pub fn inner_knot_count(&self) -> usize {
        self.k
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    /// n = p + k(p - r); the dimension is n + 1.
    pub fn last_index(&self) -> usize {
        self.knots.len() - self.p - 2
    }

    pub fn dim(&self) -> usize {
        self.last_index() + 1
    }

    pub fn span_count(&self) -> usize {
        self.k + 1
    }

    /// Break points 0, 1/(k+1), ..., 1.
    pub fn breaks(&self) -> Vec<T> {
        (0..=self.k + 1)
            .map(|i| T::from_ratio(i as i64, (self.k + 1) as i64))
            .collect()
    }

    /// Space containing derivatives: degree p-1, regularity r-1, same inner knots.
    pub fn derivative_space(&self) -> Result<SplineSpace<T>, SplineError> {
        SplineSpace::new(self.p - 1, self.r - 1, self.k)
    }

    fn find_span(&self, u: &T) -> usize {
        let n = self.last_index();
        if *u >= self.knots[n + 1] {
            return n;
        }
        let mut s = self.p;
        while !(*u >= self.knots[s] && *u < self.knots[s + 1]) {
            s += 1;
        }
        s
    }

    /// Local basis derivatives at `u`: returns the span and a
    /// `(der+1) x (p+1)` table whose row `d` holds the order-`d` derivatives
    /// of the `p+1` basis functions that are nonzero on the span.
    pub fn basis_local(&self, u: &T, der: usize) -> Result<(usize, Vec<Vec<T>>), SplineError> {
        if *u < T::zero() || *u > T::one() {
            return Err(SplineError::OutOfDomain);
        }
        let p = self.p;
        let span = self.find_span(u);
        let nd = der.min(p);
        let uu = &self.knots;

        let mut ndu = vec![vec![T::zero(); p + 1]; p + 1];
        ndu[0][0] = T::one();
        let mut left = vec![T::zero(); p + 1];
        let mut right = vec![T::zero(); p + 1];
        for j in 1..=p {
            left[j] = u.clone() - uu[span + 1 - j].clone();
            right[j] = uu[span + j].clone() - u.clone();
            let mut saved = T::zero();
            for rr in 0..j {
                ndu[j][rr] = right[rr + 1].clone() + left[j - rr].clone();
                let temp = ndu[rr][j - 1].clone() / ndu[j][rr].clone();
                ndu[rr][j] = saved.clone() + right[rr + 1].clone() * temp.clone();
                saved = left[j - rr].clone() * temp;
            }
            ndu[j][j] = saved;
        }

        let mut ders = vec![vec![T::zero(); p + 1]; der + 1];
        for j in 0..=p {
            ders[0][j] = ndu[j][p].clone();
        }
        if nd > 0 {
            for r0 in 0..=p {
                let mut a = vec![vec![T::zero(); p + 1]; 2];
                let (mut s1, mut s2) = (0usize, 1usize);
                a[0][0] = T::one();
                for kk in 1..=nd {
                    let mut d = T::zero();
                    let rk = r0 as i64 - kk as i64;
                    let pk = p as i64 - kk as i64;
                    if r0 >= kk {
                        a[s2][0] =
                            a[s1][0].clone() / ndu[(pk + 1) as usize][rk as usize].clone();
                        d = a[s2][0].clone() * ndu[rk as usize][pk as usize].clone();
                    }
                    let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                    let j2 = if r0 as i64 - 1 <= pk { kk - 1 } else { p - r0 };
                    for j in j1..=j2 {
                        a[s2][j] = (a[s1][j].clone() - a[s1][j - 1].clone())
                            / ndu[(pk + 1) as usize][(rk + j as i64) as usize].clone();
                        d = d + a[s2][j].clone()
                            * ndu[(rk + j as i64) as usize][pk as usize].clone();
                    }
                    if r0 as i64 <= pk {
                        a[s2][kk] = -a[s1][kk - 1].clone()
                            / ndu[(pk + 1) as usize][r0].clone();
                        d = d + a[s2][kk].clone() * ndu[r0][pk as usize].clone();
                    }
                    ders[kk][r0] = d;
                    std::mem::swap(&mut s1, &mut s2);
                }
            }
            let mut factor = T::from_int(p as i64);
            for kk in 1..=nd {
                for j in 0..=p {
                    ders[kk][j] = ders[kk][j].clone() * factor.clone();
                }
                factor = factor * T::from_int((p - kk) as i64);
            }
        }
        Ok((span, ders))
    }

    /// All basis derivatives at `u` as rows of length `dim()`.
    pub fn basis_all(&self, u: &T, der: usize) -> Result<Vec<Vec<T>>, SplineError> {
        let (span, local) = self.basis_local(u, der)?;
        let mut out = vec![vec![T::zero(); self.dim()]; der + 1];
        for d in 0..=der {
            for j in 0..=self.p {
                out[d][span - self.p + j] = local[d][j].clone();
            }
        }
        Ok(out)
    }

    /// Greville abscissae (averages of p consecutive inner knots).
    pub fn greville(&self) -> Vec<T> {
        let p = self.p;
        (0..self.dim())
            .map(|a| {
                let mut s = T::zero();
                for j in 1..=p {
                    s = s + self.knots[a + j].clone();
                }
                s / T::from_int(p as i64)
            })
            .collect()
    }

    pub fn convert<U: Scalar>(&self) -> SplineSpace<U> {
        SplineSpace::new(self.p, self.r, self.k).expect("parameters already validated")
    }
}

/// Coefficients a spline can carry: scalars or plane points.
pub trait Coeff<T: Scalar>: Clone + PartialEq + Debug + 'static {
    fn zero_value() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn scale(&self, s: &T) -> Self;
    fn near_zero(&self) -> bool;
}

impl<T: Scalar> Coeff<T> for T {
    fn zero_value() -> Self {
        T::zero()
    }
    fn add(&self, other: &Self) -> Self {
        self.clone() + other.clone()
    }
    fn sub(&self, other: &Self) -> Self {
        self.clone() - other.clone()
    }
    fn scale(&self, s: &T) -> Self {
        self.clone() * s.clone()
    }
    fn near_zero(&self) -> bool {
        Scalar::near_zero(self)
    }
}

impl<T: Scalar> Coeff<T> for Point2<T> {
    fn zero_value() -> Self {
        Point2::zero()
    }
    fn add(&self, other: &Self) -> Self {
        Point2::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        Point2::sub(self, other)
    }
    fn scale(&self, s: &T) -> Self {
        Point2::scale(self, s)
    }
    fn near_zero(&self) -> bool {
        Scalar::near_zero(&self.x) && Scalar::near_zero(&self.y)
    }
}

/// A univariate spline with coefficients of type `C`.
#[derive(Clone, PartialEq, Debug)]
pub struct Spline<T, C> {
    pub space: SplineSpace<T>,
    pub coeffs: Vec<C>,
}

pub type ScalarSpline<T> = Spline<T, T>;
pub type CurveSpline<T> = Spline<T, Point2<T>>;

impl<T: Scalar, C: Coeff<T>> Spline<T, C> {
    pub fn new(space: SplineSpace<T>, coeffs: Vec<C>) -> Result<Self, SplineError> {
        if coeffs.len() != space.dim() {
            return Err(SplineError::CoefficientCount {
                got: coeffs.len(),
                expected: space.dim(),
            });
        }
        Ok(Spline { space, coeffs })
    }

    pub fn zero(space: SplineSpace<T>) -> Self {
        let n = space.dim();
        Spline {
            space,
            coeffs: vec![C::zero_value(); n],
        }
    }

    pub fn eval(&self, u: &T, der: usize) -> Result<C, SplineError> {
        if der > self.space.degree() {
            // Derivatives beyond the degree vanish identically.
            if *u < T::zero() || *u > T::one() {
                return Err(SplineError::OutOfDomain);
            }
            return Ok(C::zero_value());
        }
        let (span, local) = self.space.basis_local(u, der)?;
        let p = self.space.degree();
        let mut acc = C::zero_value();
        for j in 0..=p {
            acc = acc.add(&self.coeffs[span - p + j].scale(&local[der][j]));
        }
        Ok(acc)
    }

    /// Derivative spline in the degree p-1, regularity r-1 space.
    pub fn derivative(&self) -> Result<Spline<T, C>, SplineError> {
        let space = self.space.derivative_space()?;
        let p = self.space.degree();
        let knots = self.space.knots();
        let mut coeffs = Vec::with_capacity(space.dim());
        for i in 0..self.coeffs.len() - 1 {
            let gap = knots[i + p + 1].clone() - knots[i + 1].clone();
            let factor = T::from_int(p as i64) / gap;
            coeffs.push(self.coeffs[i + 1].sub(&self.coeffs[i]).scale(&factor));
        }
        Spline::new(space, coeffs)
    }

    pub fn add(&self, other: &Self) -> Result<Self, SplineError> {
        if self.space != other.space {
            return Err(SplineError::KnotMismatch);
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.add(b))
            .collect();
        Spline::new(self.space.clone(), coeffs)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SplineError> {
        if self.space != other.space {
            return Err(SplineError::KnotMismatch);
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.sub(b))
            .collect();
        Spline::new(self.space.clone(), coeffs)
    }

    pub fn scale(&self, s: &T) -> Self {
        Spline {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|c| c.scale(s)).collect(),
        }
    }

    pub fn is_near_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.near_zero())
    }

    /// Re-express this spline in a superspace; errors if the target does not
    /// contain it (verified pointwise, exactly in rational mode).
    pub fn refine(&self, target: &SplineSpace<T>) -> Result<Spline<T, C>, SplineError> {
        let matrix = refinement_matrix(&self.space, target)?;
        Ok(apply_refinement(&matrix, &self.coeffs, target))
    }
}

fn apply_refinement<T: Scalar, C: Coeff<T>>(
    matrix: &[Vec<T>],
    coeffs: &[C],
    target: &SplineSpace<T>,
) -> Spline<T, C> {
    let out: Vec<C> = matrix
        .iter()
        .map(|row| {
            let mut acc = C::zero_value();
            for (c, w) in coeffs.iter().zip(row) {
                if !Scalar::near_zero(w) {
                    acc = acc.add(&c.scale(w));
                }
            }
            acc
        })
        .collect();
    Spline {
        space: target.clone(),
        coeffs: out,
    }
}

/// The matrix mapping source coefficients to target coefficients for a
/// nested pair of spaces. Built by collocation at target Greville points and
/// verified on a dense per-span sample; a mismatch means the spaces are not
/// nested.
pub fn refinement_matrix<T: Scalar>(
    source: &SplineSpace<T>,
    target: &SplineSpace<T>,
) -> Result<Vec<Vec<T>>, SplineError> {
    if source == target {
        let d = source.dim();
        let mut eye = vec![vec![T::zero(); d]; d];
        for (i, row) in eye.iter_mut().enumerate() {
            row[i] = T::one();
        }
        return Ok(eye);
    }
    if target.degree() < source.degree() {
        return Err(SplineError::NonNested);
    }
    let greville = target.greville();
    let dim_t = target.dim();
    let dim_s = source.dim();
    let mut mat = vec![vec![T::zero(); dim_t]; dim_t];
    let mut rhs = vec![vec![T::zero(); dim_s]; dim_t];
    for (a, g) in greville.iter().enumerate() {
        mat[a] = target.basis_all(g, 0)?.remove(0);
        rhs[a] = source.basis_all(g, 0)?.remove(0);
    }
    let solution = solve_dense_multi(&mat, &rhs)?;
    // columns of `solution` are the target coefficients of the source basis
    let refinement: Vec<Vec<T>> = (0..dim_t)
        .map(|row| (0..dim_s).map(|col| solution[row][col].clone()).collect())
        .collect();

    // Verify the interpolant actually reproduces each source basis function.
    let pt = target.degree();
    let breaks = target.breaks();
    for w in breaks.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        for j in 0..=pt + 1 {
            let t = a.clone()
                + (b.clone() - a.clone()) * T::from_ratio((j + 1) as i64, (pt + 3) as i64);
            let src_vals = source.basis_all(&t, 0)?.remove(0);
            let tgt_vals = target.basis_all(&t, 0)?.remove(0);
            for s in 0..dim_s {
                let mut acc = T::zero();
                for (row, tv) in tgt_vals.iter().enumerate() {
                    if !Scalar::near_zero(tv) {
                        acc = acc + refinement[row][s].clone() * tv.clone();
                    }
                }
                if !acc.near_eq(&src_vals[s]) {
                    return Err(SplineError::NonNested);
                }
            }
        }
    }
    Ok(refinement)
}

/// A tensor-product spline over `[0,1]^2` with an `(nu+1) x (nv+1)` grid of
/// coefficients, stored row-major over the u index.
#[derive(Clone, PartialEq, Debug)]
pub struct TensorSpline<T, C> {
    pub space_u: SplineSpace<T>,
    pub space_v: SplineSpace<T>,
    pub coeffs: Vec<C>,
}

pub type ScalarTensorSpline<T> = TensorSpline<T, T>;
pub type PatchSpline<T> = TensorSpline<T, Point2<T>>;

impl<T: Scalar, C: Coeff<T>> TensorSpline<T, C> {
    pub fn new(
        space_u: SplineSpace<T>,
        space_v: SplineSpace<T>,
        coeffs: Vec<C>,
    ) -> Result<Self, SplineError> {
        let expected = space_u.dim() * space_v.dim();
        if coeffs.len() != expected {
            return Err(SplineError::CoefficientCount {
                got: coeffs.len(),
                expected,
            });
        }
        Ok(TensorSpline {
            space_u,
            space_v,
            coeffs,
        })
    }

    pub fn zero(space_u: SplineSpace<T>, space_v: SplineSpace<T>) -> Self {
        let len = space_u.dim() * space_v.dim();
        TensorSpline {
            space_u,
            space_v,
            coeffs: vec![C::zero_value(); len],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &C {
        &self.coeffs[i * self.space_v.dim() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, c: C) {
        let nv = self.space_v.dim();
        self.coeffs[i * nv + j] = c;
    }

    pub fn eval(&self, u: &T, v: &T, du: usize, dv: usize) -> Result<C, SplineError> {
        if du > self.space_u.degree() || dv > self.space_v.degree() {
            if *u < T::zero() || *u > T::one() || *v < T::zero() || *v > T::one() {
                return Err(SplineError::OutOfDomain);
            }
            return Ok(C::zero_value());
        }
        let (su, bu) = self.space_u.basis_local(u, du)?;
        let (sv, bv) = self.space_v.basis_local(v, dv)?;
        let (pu, pv) = (self.space_u.degree(), self.space_v.degree());
        let mut acc = C::zero_value();
        for a in 0..=pu {
            let i = su - pu + a;
            let mut row = C::zero_value();
            for b in 0..=pv {
                let j = sv - pv + b;
                row = row.add(&self.at(i, j).scale(&bv[dv][b]));
            }
            acc = acc.add(&row.scale(&bu[du][a]));
        }
        Ok(acc)
    }

    /// Partial derivative in u as a tensor spline.
    pub fn derivative_u(&self) -> Result<TensorSpline<T, C>, SplineError> {
        let du = self.space_u.derivative_space()?;
        let p = self.space_u.degree();
        let knots = self.space_u.knots();
        let nv = self.space_v.dim();
        let mut coeffs = Vec::with_capacity(du.dim() * nv);
        for i in 0..self.space_u.dim() - 1 {
            let gap = knots[i + p + 1].clone() - knots[i + 1].clone();
            let factor = T::from_int(p as i64) / gap;
            for j in 0..nv {
                coeffs.push(self.at(i + 1, j).sub(self.at(i, j)).scale(&factor));
            }
        }
        TensorSpline::new(du, self.space_v.clone(), coeffs)
    }

    /// Partial derivative in v as a tensor spline.
    pub fn derivative_v(&self) -> Result<TensorSpline<T, C>, SplineError> {
        let dv = self.space_v.derivative_space()?;
        let p = self.space_v.degree();
        let knots = self.space_v.knots();
        let nu = self.space_u.dim();
        let mut coeffs = Vec::with_capacity(nu * dv.dim());
        for i in 0..nu {
            for j in 0..self.space_v.dim() - 1 {
                let gap = knots[j + p + 1].clone() - knots[j + 1].clone();
                let factor = T::from_int(p as i64) / gap;
                coeffs.push(self.at(i, j + 1).sub(self.at(i, j)).scale(&factor));
            }
        }
        TensorSpline::new(self.space_u.clone(), dv, coeffs)
    }

    /// Restriction to a fixed u as a spline in v.
    pub fn restrict_u(&self, u: &T) -> Result<Spline<T, C>, SplineError> {
        let (su, bu) = self.space_u.basis_local(u, 0)?;
        let pu = self.space_u.degree();
        let nv = self.space_v.dim();
        let mut coeffs = vec![C::zero_value(); nv];
        for a in 0..=pu {
            let i = su - pu + a;
            for (j, cj) in coeffs.iter_mut().enumerate() {
                *cj = cj.add(&self.at(i, j).scale(&bu[0][a]));
            }
        }
        Spline::new(self.space_v.clone(), coeffs)
    }

    pub fn refine(
        &self,
        target_u: &SplineSpace<T>,
        target_v: &SplineSpace<T>,
    ) -> Result<TensorSpline<T, C>, SplineError> {
        let ru = refinement_matrix(&self.space_u, target_u)?;
        let rv = refinement_matrix(&self.space_v, target_v)?;
        let (nu_s, nv_s) = (self.space_u.dim(), self.space_v.dim());
        let (nu_t, nv_t) = (target_u.dim(), target_v.dim());
        // rows first: tmp[a][j] = sum_i ru[a][i] c[i][j]
        let mut tmp = vec![C::zero_value(); nu_t * nv_s];
        for a in 0..nu_t {
            for i in 0..nu_s {
                if Scalar::near_zero(&ru[a][i]) {
                    continue;
                }
                for j in 0..nv_s {
                    tmp[a * nv_s + j] =
                        tmp[a * nv_s + j].add(&self.at(i, j).scale(&ru[a][i]));
                }
            }
        }
        let mut out = vec![C::zero_value(); nu_t * nv_t];
        for a in 0..nu_t {
            for b in 0..nv_t {
                let mut acc = C::zero_value();
                for j in 0..nv_s {
                    if !Scalar::near_zero(&rv[b][j]) {
                        acc = acc.add(&tmp[a * nv_s + j].scale(&rv[b][j]));
                    }
                }
                out[a * nv_t + b] = acc;
            }
        }
        TensorSpline::new(target_u.clone(), target_v.clone(), out)
    }
}
