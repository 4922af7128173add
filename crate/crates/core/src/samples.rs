//! Built-in sample geometries: bilinear corpora, perturbed biquadratic
//! pairs, and generic multi-patch inputs for the reparameterization and
//! convergence studies.

use crate::multipatch::{detect_topology, MultiPatch, MultiPatchError, PatchMap};
use crate::scalar::{rat, Point2, Rat, Scalar};
use crate::spline::{make_space, SplineError, TensorSpline};
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SampleError {
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error(transparent)]
    MultiPatch(#[from] MultiPatchError),
}

/// A bilinear patch from its four corners F(0,0), F(0,1), F(1,0), F(1,1),
/// embedded in the space S^{p,r} with k inner knots.
pub fn bilinear_patch(
    id: usize,
    corners: [Point2<Rat>; 4],
    p: usize,
    r: i32,
    k: usize,
) -> Result<PatchMap<Rat>, SampleError> {
    let s1 = make_space::<Rat>(1, 0, 0)?;
    let coarse = TensorSpline::new(s1.clone(), s1, corners.to_vec())?;
    let target = make_space::<Rat>(p, r, k)?;
    Ok(PatchMap::new(id, coarse.refine(&target, &target)?)?)
}

/// A biquadratic patch from its 3x3 control grid (row-major over (i, j):
/// index i runs along u), embedded in S^{p,r} with k inner knots.
pub fn biquadratic_patch(
    id: usize,
    grid: [Point2<Rat>; 9],
    p: usize,
    r: i32,
    k: usize,
) -> Result<PatchMap<Rat>, SampleError> {
    let s2 = make_space::<Rat>(2, 0, 0)?;
    let coarse = TensorSpline::new(s2.clone(), s2, grid.to_vec())?;
    let target = make_space::<Rat>(p, r, k)?;
    Ok(PatchMap::new(id, coarse.refine(&target, &target)?)?)
}

fn pt(x: i64, y: i64) -> Point2<Rat> {
    Point2::new(Rat::from_int(x), Rat::from_int(y))
}

fn ptr(x: Rat, y: Rat) -> Point2<Rat> {
    Point2::new(x, y)
}

/// Corpus of bilinear multi-patch geometries (every bilinear multi-patch
/// parameterization is AS-G1). Returns at least five configurations.
pub fn bilinear_corpus(p: usize, r: i32, k: usize) -> Result<Vec<MultiPatch<Rat>>, SampleError> {
    let mut out = Vec::new();
    // 1. two unit squares
    out.push(detect_topology(vec![
        bilinear_patch(0, [pt(0, 0), pt(0, 1), pt(1, 0), pt(1, 1)], p, r, k)?,
        bilinear_patch(1, [pt(0, 0), pt(0, 1), pt(-1, 0), pt(-1, 1)], p, r, k)?,
    ])?);
    // 2. two generic convex quads with a slanted interface
    out.push(detect_topology(vec![
        bilinear_patch(0, [pt(0, 0), pt(1, 3), pt(3, 0), pt(4, 4)], p, r, k)?,
        bilinear_patch(1, [pt(0, 0), pt(1, 3), pt(-3, 1), pt(-2, 5)], p, r, k)?,
    ])?);
    // 3. a sheared pair
    out.push(detect_topology(vec![
        bilinear_patch(0, [pt(0, 0), pt(1, 2), pt(2, 0), pt(3, 2)], p, r, k)?,
        bilinear_patch(1, [pt(0, 0), pt(1, 2), pt(-2, 1), pt(-1, 3)], p, r, k)?,
    ])?);
    // 4. a three-patch strip of trapezoids
    out.push(detect_topology(vec![
        bilinear_patch(0, [pt(0, 0), pt(0, 2), pt(2, 0), pt(1, 2)], p, r, k)?,
        bilinear_patch(1, [pt(2, 0), pt(1, 2), pt(4, 1), pt(3, 3)], p, r, k)?,
        bilinear_patch(2, [pt(4, 1), pt(3, 3), pt(6, 0), pt(6, 3)], p, r, k)?,
    ])?);
    // 5. an L-shape of three unit squares around a corner
    out.push(detect_topology(vec![
        bilinear_patch(0, [pt(0, 0), pt(0, 1), pt(1, 0), pt(1, 1)], p, r, k)?,
        bilinear_patch(1, [pt(1, 0), pt(1, 1), pt(2, 0), pt(2, 1)], p, r, k)?,
        bilinear_patch(2, [pt(0, 1), pt(0, 2), pt(1, 1), pt(1, 2)], p, r, k)?,
    ])?);
    Ok(out)
}

/// Chebyshev (bounding-box) diameter of a patch's control net; rational,
/// used to scale perturbations.
pub fn patch_diameter(patch: &PatchMap<Rat>) -> Rat {
    let xs: Vec<&Rat> = patch.geometry.coeffs.iter().map(|c| &c.x).collect();
    let ys: Vec<&Rat> = patch.geometry.coeffs.iter().map(|c| &c.y).collect();
    let spread = |v: &[&Rat]| -> Rat {
        let mut min = v[0].clone();
        let mut max = v[0].clone();
        for x in v {
            if **x < min {
                min = (*x).clone();
            }
            if **x > max {
                max = (*x).clone();
            }
        }
        max - min
    };
    let sx = spread(&xs);
    let sy = spread(&ys);
    if sx > sy {
        sx
    } else {
        sy
    }
}

/// Two-patch biquadratic geometries whose shared-edge middle control point
/// is displaced by 0.05 of the patch diameter; generically not AS-G1.
/// `variant` selects the displacement direction (0..3).
pub fn perturbed_biquadratic_pair(variant: usize) -> Result<MultiPatch<Rat>, SampleError> {
    // base: two unit squares side by side, biquadratic grids
    let half = rat(1, 2);
    let base_a: [Point2<Rat>; 9] = [
        pt(0, 0),
        ptr(Rat::zero(), half.clone()),
        pt(0, 1),
        ptr(half.clone(), Rat::zero()),
        ptr(half.clone(), half.clone()),
        ptr(half.clone(), Rat::one()),
        pt(1, 0),
        ptr(Rat::one(), half.clone()),
        pt(1, 1),
    ];
    let base_b: [Point2<Rat>; 9] = [
        pt(0, 0),
        ptr(Rat::zero(), half.clone()),
        pt(0, 1),
        ptr(-half.clone(), Rat::zero()),
        ptr(-half.clone(), half.clone()),
        ptr(-half.clone(), Rat::one()),
        pt(-1, 0),
        ptr(-Rat::one(), half.clone()),
        pt(-1, 1),
    ];
    // diameter of the unit square is 1; magnitude 0.05 = 1/20
    let eps = rat(1, 20);
    let delta = match variant % 4 {
        0 => Point2::new(eps.clone(), Rat::zero()),
        1 => Point2::new(Rat::zero(), eps.clone()),
        2 => Point2::new(eps.clone(), eps.clone()),
        _ => Point2::new(-eps.clone(), eps.clone()),
    };
    // displace the middle control point of the shared edge (u = 0 on both)
    let mut a = base_a;
    let mut b = base_b;
    a[1] = a[1].add(&delta);
    b[1] = b[1].add(&delta);
    detect_topology(vec![
        biquadratic_patch(0, a, 2, 1, 0)?,
        biquadratic_patch(1, b, 2, 1, 0)?,
    ])
    .map_err(SampleError::from)
}

/// Generic three-patch strip with curved biquadratic interfaces; regular
/// but not AS-G1 as given. The reparameterization input of the convergence
/// studies.
pub fn three_patch_generic() -> Result<MultiPatch<Rat>, SampleError> {
    let h = rat(1, 2);
    // shared edges at x = 1 and x = 2, middle control points pushed off
    let e1 = [pt(1, 0), ptr(rat(12, 10), rat(6, 10)), pt(1, 1)];
    let e2 = [pt(2, 0), ptr(rat(18, 10), rat(4, 10)), pt(2, 1)];
    let col = |x: Rat, ymid_shift: Rat| -> [Point2<Rat>; 3] {
        [
            ptr(x.clone(), Rat::zero()),
            ptr(x.clone(), h.clone() + ymid_shift),
            ptr(x, Rat::one()),
        ]
    };
    let grid = |c0: [Point2<Rat>; 3], c1: [Point2<Rat>; 3], c2: [Point2<Rat>; 3]| {
        let mut g: Vec<Point2<Rat>> = Vec::with_capacity(9);
        g.extend(c0);
        g.extend(c1);
        g.extend(c2);
        <[Point2<Rat>; 9]>::try_from(g).unwrap()
    };
    let p0 = grid(
        col(Rat::zero(), Rat::zero()),
        col(h.clone(), rat(1, 5)),
        e1.clone(),
    );
    let p1 = grid(e1, col(rat(3, 2), rat(-1, 5)), e2.clone());
    let p2 = grid(e2, col(rat(5, 2), rat(1, 10)), col(rat(3, 1), Rat::zero()));
    detect_topology(vec![
        biquadratic_patch(0, p0, 2, 1, 0)?,
        biquadratic_patch(1, p1, 2, 1, 0)?,
        biquadratic_patch(2, p2, 2, 1, 0)?,
    ])
    .map_err(SampleError::from)
}

/// Five-patch plus shape with curved biquadratic interfaces around the
/// center patch; not AS-G1 as given.
pub fn five_patch_generic() -> Result<MultiPatch<Rat>, SampleError> {
    let h = rat(1, 2);
    let d = rat(1, 10);
    // center patch [0,1]^2 with its four edges bulged outward
    let left = [pt(0, 0), ptr(-d.clone(), h.clone()), pt(0, 1)];
    let right = [pt(1, 0), ptr(Rat::one() + d.clone(), h.clone()), pt(1, 1)];
    let bottom = [pt(0, 0), ptr(h.clone(), -d.clone()), pt(1, 0)];
    let top = [pt(0, 1), ptr(h.clone(), Rat::one() + d.clone()), pt(1, 1)];
    let straight = |a: Point2<Rat>, b: Point2<Rat>| -> [Point2<Rat>; 3] {
        let mid = Point2::new(
            (a.x.clone() + b.x.clone()) / Rat::from_int(2),
            (a.y.clone() + b.y.clone()) / Rat::from_int(2),
        );
        [a, mid, b]
    };
    let grid = |c0: [Point2<Rat>; 3], c1: [Point2<Rat>; 3], c2: [Point2<Rat>; 3]| {
        let mut g: Vec<Point2<Rat>> = Vec::with_capacity(9);
        g.extend(c0);
        g.extend(c1);
        g.extend(c2);
        <[Point2<Rat>; 9]>::try_from(g).unwrap()
    };
    // center: u runs left -> right, v bottom -> top
    let center = grid(
        left.clone(),
        [
            bottom[1].clone(),
            ptr(h.clone(), h.clone()),
            top[1].clone(),
        ],
        right.clone(),
    );
    // neighbors, each sharing one curved edge with the center
    let west = grid(
        straight(pt(-1, 0), pt(-1, 1)),
        straight(ptr(-h.clone(), Rat::zero()), ptr(-h.clone(), Rat::one())),
        left,
    );
    let east = grid(
        right,
        straight(
            ptr(rat(3, 2), Rat::zero()),
            ptr(rat(3, 2), Rat::one()),
        ),
        straight(pt(2, 0), pt(2, 1)),
    );
    // south and north run v along x so that the shared edge is a full side
    let south = grid(
        straight(pt(0, -1), pt(0, 0)),
        [
            ptr(h.clone(), -Rat::one()),
            ptr(h.clone(), -h.clone()),
            bottom[1].clone(),
        ],
        straight(pt(1, -1), pt(1, 0)),
    );
    let north = grid(
        straight(pt(0, 1), pt(0, 2)),
        [
            top[1].clone(),
            ptr(h.clone(), rat(3, 2)),
            ptr(h.clone(), Rat::from_int(2)),
        ],
        straight(pt(1, 1), pt(1, 2)),
    );
    detect_topology(vec![
        biquadratic_patch(0, center, 2, 1, 0)?,
        biquadratic_patch(1, west, 2, 1, 0)?,
        biquadratic_patch(2, east, 2, 1, 0)?,
        biquadratic_patch(3, south, 2, 1, 0)?,
        biquadratic_patch(4, north, 2, 1, 0)?,
    ])
    .map_err(SampleError::from)
}

/// Two bilinear quads joined along a slanted edge, embedded in the cubic
/// space S^{3,1} with one inner knot; the standard gluing-fit test
/// interface (exact alphas linear, exact beta quadratic).
pub fn cubic_test_interface() -> Result<MultiPatch<Rat>, SampleError> {
    Ok(detect_topology(vec![
        bilinear_patch(0, [pt(0, 0), pt(1, 3), pt(3, 0), pt(4, 4)], 3, 1, 1)?,
        bilinear_patch(1, [pt(0, 0), pt(1, 3), pt(-3, 1), pt(-2, 5)], 3, 1, 1)?,
    ])?)
}
