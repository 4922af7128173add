//! Piecewise Bernstein (Bezier) representation of splines.
//!
//! Products, determinants and exact integrals of splines are computed per
//! knot span in Bernstein form with binomial-coefficient convolution; the
//! results convert back to B-spline form by collocation.

use crate::linalg::solve_dense_multi;
use crate::scalar::{binomial, Scalar};
use crate::spline::{CurveSpline, ScalarSpline, Spline, SplineError, SplineSpace};

/// Bernstein basis value `B_i^n(s)`.
pub fn bernstein_value<T: Scalar>(n: usize, i: usize, s: &T) -> T {
    let mut v: T = binomial(n, i);
    for _ in 0..i {
        v = v * s.clone();
    }
    let one_minus = T::one() - s.clone();
    for _ in 0..(n - i) {
        v = v * one_minus.clone();
    }
    v
}

/// de Casteljau evaluation of a Bernstein segment at local parameter `s`.
pub fn de_casteljau<T: Scalar>(coeffs: &[T], s: &T) -> T {
    let mut b = coeffs.to_vec();
    let one_minus = T::one() - s.clone();
    for level in (1..b.len()).rev() {
        for i in 0..level {
            b[i] = b[i].clone() * one_minus.clone() + b[i + 1].clone() * s.clone();
        }
    }
    b[0].clone()
}

/// Split a Bernstein segment at local parameter `s` into left/right halves.
pub fn de_casteljau_split<T: Scalar>(coeffs: &[T], s: &T) -> (Vec<T>, Vec<T>) {
    let n = coeffs.len();
    let mut b = coeffs.to_vec();
    let one_minus = T::one() - s.clone();
    let mut left = Vec::with_capacity(n);
    let mut right = vec![T::zero(); n];
    left.push(b[0].clone());
    right[n - 1] = b[n - 1].clone();
    for level in (1..n).rev() {
        for i in 0..level {
            b[i] = b[i].clone() * one_minus.clone() + b[i + 1].clone() * s.clone();
        }
        left.push(b[0].clone());
        right[level - 1] = b[level - 1].clone();
    }
    (left, right)
}

/// A piecewise-polynomial function stored as one Bernstein coefficient list
/// per break interval.
#[derive(Clone, PartialEq, Debug)]
pub struct PiecewiseBernstein<T> {
    pub degree: usize,
    pub breaks: Vec<T>,
    pub spans: Vec<Vec<T>>,
}

impl<T: Scalar> PiecewiseBernstein<T> {
    /// Exact per-span Bernstein extraction of a scalar spline.
    pub fn from_spline(f: &ScalarSpline<T>) -> Result<Self, SplineError> {
        let degree = f.space.degree();
        let breaks = f.space.breaks();
        let mut spans = Vec::with_capacity(breaks.len() - 1);
        for w in breaks.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            // strictly interior collocation nodes so evaluation always sees
            // this span's polynomial piece
            let nodes: Vec<T> = interior_nodes(degree);
            let mut mat = vec![vec![T::zero(); degree + 1]; degree + 1];
            let mut rhs = vec![vec![T::zero()]; degree + 1];
            for (row, s) in nodes.iter().enumerate() {
                for i in 0..=degree {
                    mat[row][i] = bernstein_value(degree, i, s);
                }
                let t = a.clone() + (b.clone() - a.clone()) * s.clone();
                rhs[row][0] = f.eval(&t, 0)?;
            }
            let sol = solve_dense_multi(&mat, &rhs)?;
            spans.push(sol.into_iter().map(|mut r| r.remove(0)).collect());
        }
        Ok(PiecewiseBernstein {
            degree,
            breaks,
            spans,
        })
    }

    pub fn constant(value: T, breaks: Vec<T>) -> Self {
        let spans = vec![vec![value]; breaks.len() - 1];
        PiecewiseBernstein {
            degree: 0,
            breaks,
            spans,
        }
    }

    pub fn eval(&self, t: &T) -> T {
        let span = self.locate(t);
        let (a, b) = (&self.breaks[span], &self.breaks[span + 1]);
        let s = (t.clone() - a.clone()) / (b.clone() - a.clone());
        de_casteljau(&self.spans[span], &s)
    }

    fn locate(&self, t: &T) -> usize {
        let last = self.spans.len() - 1;
        for i in 0..last {
            if *t < self.breaks[i + 1] {
                return i;
            }
        }
        last
    }

    fn assert_compatible(&self, other: &Self) -> Result<(), SplineError> {
        if self.breaks != other.breaks {
            return Err(SplineError::KnotMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SplineError> {
        self.binary_same_degree(other, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SplineError> {
        self.binary_same_degree(other, |a, b| a.clone() - b.clone())
    }

    fn binary_same_degree(
        &self,
        other: &Self,
        op: impl Fn(&T, &T) -> T,
    ) -> Result<Self, SplineError> {
        self.assert_compatible(other)?;
        let degree = self.degree.max(other.degree);
        let lhs = self.elevated(degree);
        let rhs = other.elevated(degree);
        let spans = lhs
            .spans
            .iter()
            .zip(&rhs.spans)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| op(x, y)).collect())
            .collect();
        Ok(PiecewiseBernstein {
            degree,
            breaks: self.breaks.clone(),
            spans,
        })
    }

    /// Re-express the piecewise polynomial on a finer break sequence; every
    /// old break must reappear among the new ones.
    pub fn refined(&self, new_breaks: &[T]) -> Result<Self, SplineError> {
        let mut spans = Vec::with_capacity(new_breaks.len() - 1);
        for w in new_breaks.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let mid = (a.clone() + b.clone()) / T::from_int(2);
            let old = self.locate(&mid);
            let (c, d) = (&self.breaks[old], &self.breaks[old + 1]);
            if *a < *c || *b > *d {
                return Err(SplineError::KnotMismatch);
            }
            let len = d.clone() - c.clone();
            let s0 = (a.clone() - c.clone()) / len.clone();
            let s1 = (b.clone() - c.clone()) / len;
            // carve [s0, s1] out of the old span's coefficients
            let (_, right) = de_casteljau_split(&self.spans[old], &s0);
            let t = (s1 - s0.clone()) / (T::one() - s0);
            let (piece, _) = de_casteljau_split(&right, &t);
            spans.push(piece);
        }
        Ok(PiecewiseBernstein {
            degree: self.degree,
            breaks: new_breaks.to_vec(),
            spans,
        })
    }

    pub fn scale(&self, s: &T) -> Self {
        PiecewiseBernstein {
            degree: self.degree,
            breaks: self.breaks.clone(),
            spans: self
                .spans
                .iter()
                .map(|c| c.iter().map(|x| x.clone() * s.clone()).collect())
                .collect(),
        }
    }

    /// Exact product via binomial-coefficient convolution per span.
    pub fn mul(&self, other: &Self) -> Result<Self, SplineError> {
        self.assert_compatible(other)?;
        let (m, n) = (self.degree, other.degree);
        let degree = m + n;
        let denom: Vec<T> = (0..=degree).map(|k| binomial::<T>(degree, k)).collect();
        let spans = self
            .spans
            .iter()
            .zip(&other.spans)
            .map(|(a, b)| {
                (0..=degree)
                    .map(|k| {
                        let mut acc = T::zero();
                        let lo = k.saturating_sub(n);
                        let hi = k.min(m);
                        for i in lo..=hi {
                            let w = binomial::<T>(m, i) * binomial::<T>(n, k - i);
                            acc = acc + w * a[i].clone() * b[k - i].clone();
                        }
                        acc / denom[k].clone()
                    })
                    .collect()
            })
            .collect();
        Ok(PiecewiseBernstein {
            degree,
            breaks: self.breaks.clone(),
            spans,
        })
    }

    /// Degree elevation to `target` (no-op if already there).
    pub fn elevated(&self, target: usize) -> Self {
        if target <= self.degree {
            return self.clone();
        }
        let mut out = self.clone();
        while out.degree < target {
            let n = out.degree;
            out.spans = out
                .spans
                .iter()
                .map(|c| {
                    let mut e = vec![T::zero(); n + 2];
                    e[0] = c[0].clone();
                    e[n + 1] = c[n].clone();
                    for i in 1..=n {
                        let w = T::from_ratio(i as i64, (n + 1) as i64);
                        e[i] = c[i - 1].clone() * w.clone()
                            + c[i].clone() * (T::one() - w);
                    }
                    e
                })
                .collect();
            out.degree = n + 1;
        }
        out
    }

    /// Exact integral over [0,1].
    pub fn integral(&self) -> T {
        let inv = T::one() / T::from_int((self.degree + 1) as i64);
        let mut acc = T::zero();
        for (w, c) in self.breaks.windows(2).zip(&self.spans) {
            let len = w[1].clone() - w[0].clone();
            let sum: T = c.iter().cloned().fold(T::zero(), |s, x| s + x);
            acc = acc + len * inv.clone() * sum;
        }
        acc
    }

    pub fn is_near_zero(&self) -> bool {
        self.spans
            .iter()
            .all(|c| c.iter().all(|x| x.near_zero()))
    }

    /// Convert into the given B-spline space by collocation and verify the
    /// result reproduces this function on a dense sample.
    pub fn to_spline(&self, space: &SplineSpace<T>) -> Result<ScalarSpline<T>, SplineError> {
        if space.breaks() != self.breaks {
            return Err(SplineError::KnotMismatch);
        }
        let greville = space.greville();
        let dim = space.dim();
        let mut mat = vec![vec![T::zero(); dim]; dim];
        let mut rhs = vec![vec![T::zero()]; dim];
        for (row, g) in greville.iter().enumerate() {
            mat[row] = space.basis_all(g, 0)?.remove(0);
            rhs[row][0] = self.eval(g);
        }
        let sol = solve_dense_multi(&mat, &rhs)?;
        let coeffs: Vec<T> = sol.into_iter().map(|mut r| r.remove(0)).collect();
        let result = Spline::new(space.clone(), coeffs)?;
        // the function must genuinely lie in the space
        let p = space.degree();
        for w in self.breaks.windows(2) {
            for j in 0..=p + 1 {
                let t = w[0].clone()
                    + (w[1].clone() - w[0].clone())
                        * T::from_ratio((2 * j + 1) as i64, (2 * p + 4) as i64);
                if !result.eval(&t, 0)?.near_eq(&self.eval(&t)) {
                    return Err(SplineError::NonNested);
                }
            }
        }
        Ok(result)
    }
}

fn interior_nodes<T: Scalar>(degree: usize) -> Vec<T> {
    (0..=degree)
        .map(|j| T::from_ratio((j + 1) as i64, (degree + 2) as i64))
        .collect()
}

/// `det(c1(v), c2(v))` as an exact spline of degree `deg(c1)+deg(c2)` and
/// regularity `min(r1, r2)` over the shared knot configuration.
pub fn spline_det<T: Scalar>(
    c1: &CurveSpline<T>,
    c2: &CurveSpline<T>,
) -> Result<ScalarSpline<T>, SplineError> {
    if c1.space.inner_knot_count() != c2.space.inner_knot_count() {
        return Err(SplineError::KnotMismatch);
    }
    let (x1, y1) = curve_components(c1)?;
    let (x2, y2) = curve_components(c2)?;
    let bx1 = PiecewiseBernstein::from_spline(&x1)?;
    let by1 = PiecewiseBernstein::from_spline(&y1)?;
    let bx2 = PiecewiseBernstein::from_spline(&x2)?;
    let by2 = PiecewiseBernstein::from_spline(&y2)?;
    let det = bx1.mul(&by2)?.sub(&by1.mul(&bx2)?)?;
    let degree = c1.space.degree() + c2.space.degree();
    let reg = c1.space.regularity().min(c2.space.regularity());
    let space = SplineSpace::new(degree, reg, c1.space.inner_knot_count())?;
    det.to_spline(&space)
}

/// Split an R^2-valued spline into scalar coordinate splines.
pub fn curve_components<T: Scalar>(
    c: &CurveSpline<T>,
) -> Result<(ScalarSpline<T>, ScalarSpline<T>), SplineError> {
    let xs: Vec<T> = c.coeffs.iter().map(|p| p.x.clone()).collect();
    let ys: Vec<T> = c.coeffs.iter().map(|p| p.y.clone()).collect();
    Ok((
        Spline::new(c.space.clone(), xs)?,
        Spline::new(c.space.clone(), ys)?,
    ))
}

/// Bernstein coefficients of a bivariate polynomial on one cell, obtained by
/// tensor collocation of an arbitrary evaluator.
pub fn tensor_cell_coeffs<T: Scalar>(
    eval: impl Fn(&T, &T) -> T,
    (u0, u1): (&T, &T),
    (v0, v1): (&T, &T),
    (deg_u, deg_v): (usize, usize),
) -> Result<Vec<Vec<T>>, SplineError> {
    let su = interior_nodes::<T>(deg_u);
    let sv = interior_nodes::<T>(deg_v);
    let bmat = |deg: usize, s: &[T]| -> Vec<Vec<T>> {
        s.iter()
            .map(|x| (0..=deg).map(|i| bernstein_value(deg, i, x)).collect())
            .collect()
    };
    let mu = bmat(deg_u, &su);
    let mv = bmat(deg_v, &sv);
    // values on the node grid
    let vals: Vec<Vec<T>> = su
        .iter()
        .map(|s| {
            let u = u0.clone() + (u1.clone() - u0.clone()) * s.clone();
            sv.iter()
                .map(|t| {
                    let v = v0.clone() + (v1.clone() - v0.clone()) * t.clone();
                    eval(&u, &v)
                })
                .collect()
        })
        .collect();
    // solve along v for every u-node, then along u
    let mut partial = vec![vec![T::zero(); deg_v + 1]; deg_u + 1];
    for (a, row) in vals.iter().enumerate() {
        let rhs: Vec<Vec<T>> = row.iter().map(|x| vec![x.clone()]).collect();
        let sol = solve_dense_multi(&mv, &rhs)?;
        for (b, r) in sol.into_iter().enumerate() {
            partial[a][b] = r.into_iter().next().unwrap();
        }
    }
    let mut out = vec![vec![T::zero(); deg_v + 1]; deg_u + 1];
    for b in 0..=deg_v {
        let rhs: Vec<Vec<T>> = (0..=deg_u).map(|a| vec![partial[a][b].clone()]).collect();
        let sol = solve_dense_multi(&mu, &rhs)?;
        for (a, r) in sol.into_iter().enumerate() {
            out[a][b] = r.into_iter().next().unwrap();
        }
    }
    Ok(out)
}
