// SPDX-License-Identifier: Apache-2.0

//! Closed-form eigendecomposition of symmetric 3x3 matrices.
//!
//! Plane fitting only ever needs the eigenvalues and the eigenvector of the
//! smallest eigenvalue of a covariance matrix, so that is all this solver
//! returns. Everything runs in f64 on a matrix pre-scaled to unit magnitude;
//! the eigenvector of the best-separated eigenvalue is taken from row cross
//! products and the remaining pair is resolved in the orthogonal subspace,
//! which stays stable when two eigenvalues nearly coincide.

pub(crate) type Mat3 = [[f64; 3]; 3];

#[derive(Debug, Clone, Copy)]
pub(crate) struct SymEigen3 {
    /// Eigenvalues in descending order.
    pub values: [f64; 3],
    /// Unit eigenvector of `values[2]`. Sign is arbitrary here; callers
    /// apply their own orientation convention.
    pub smallest: [f64; 3],
}

#[inline]
fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

fn mat_vec(a: &Mat3, v: [f64; 3]) -> [f64; 3] {
    [dot(a[0], v), dot(a[1], v), dot(a[2], v)]
}

/// Eigenvalues of a symmetric 3x3 matrix in descending order, by the
/// trigonometric solution of the characteristic polynomial.
fn eigenvalues(a: &Mat3) -> [f64; 3] {
    let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    if p1 == 0.0 {
        let mut d = [a[0][0], a[1][1], a[2][2]];
        d.sort_by(|x, y| y.partial_cmp(x).unwrap());
        return d;
    }
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    let d0 = a[0][0] - q;
    let d1 = a[1][1] - q;
    let d2 = a[2][2] - q;
    let p2 = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    if p == 0.0 {
        return [q, q, q];
    }
    // B = (A - q I) / p; r = det(B) / 2 lands in [-1, 1] up to rounding.
    let b = [
        [d0 / p, a[0][1] / p, a[0][2] / p],
        [a[0][1] / p, d1 / p, a[1][2] / p],
        [a[0][2] / p, a[1][2] / p, d2 / p],
    ];
    let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det_b / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let largest = q + 2.0 * p * phi.cos();
    let smallest = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
    let middle = 3.0 * q - largest - smallest;
    [largest, middle, smallest]
}

/// Best eigenvector of (A - lambda I) by the largest cross product of its
/// rows. Returns None when every cross product underflows, i.e. the
/// eigenvalue is (numerically) repeated.
fn eigenvector_by_rows(a: &Mat3, lambda: f64) -> Option<[f64; 3]> {
    let m = [
        [a[0][0] - lambda, a[0][1], a[0][2]],
        [a[0][1], a[1][1] - lambda, a[1][2]],
        [a[0][2], a[1][2], a[2][2] - lambda],
    ];
    let c01 = cross(m[0], m[1]);
    let c02 = cross(m[0], m[2]);
    let c12 = cross(m[1], m[2]);
    let n01 = dot(c01, c01);
    let n02 = dot(c02, c02);
    let n12 = dot(c12, c12);
    let (best, best_n) = if n01 >= n02 && n01 >= n12 {
        (c01, n01)
    } else if n02 >= n12 {
        (c02, n02)
    } else {
        (c12, n12)
    };
    if best_n <= f64::MIN_POSITIVE {
        return None;
    }
    Some(normalize(best))
}

/// Any unit vector orthogonal to `v`.
fn orthogonal_unit(v: [f64; 3]) -> [f64; 3] {
    let axis = if v[0].abs() <= v[1].abs() && v[0].abs() <= v[2].abs() {
        [1.0, 0.0, 0.0]
    } else if v[1].abs() <= v[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    normalize(cross(v, axis))
}

/// Eigendecomposition entry point. `a` must be symmetric; only the upper
/// triangle is trusted to mirror the lower one.
pub(crate) fn sym_eigen3(a: &Mat3) -> SymEigen3 {
    // Scale to unit magnitude so the rank and separation thresholds below
    // are relative.
    let mut scale = 0.0f64;
    for row in a {
        for &v in row {
            scale = scale.max(v.abs());
        }
    }
    if scale == 0.0 || !scale.is_finite() {
        return SymEigen3 {
            values: [0.0; 3],
            smallest: [0.0, 0.0, 1.0],
        };
    }
    let s = [
        [a[0][0] / scale, a[0][1] / scale, a[0][2] / scale],
        [a[1][0] / scale, a[1][1] / scale, a[1][2] / scale],
        [a[2][0] / scale, a[2][1] / scale, a[2][2] / scale],
    ];
    let vals = eigenvalues(&s);
    let span = vals[0] - vals[2];
    let out_values = [vals[0] * scale, vals[1] * scale, vals[2] * scale];
    if span <= f64::EPSILON * 8.0 {
        // Numerically isotropic: every direction is an eigenvector.
        return SymEigen3 {
            values: out_values,
            smallest: [0.0, 0.0, 1.0],
        };
    }
    // Resolve the eigenvector on the side with the wider spectral gap and
    // derive the smallest-eigenvalue direction from it. This avoids the
    // ill-conditioned cross products of a nearly repeated eigenvalue.
    let gap_low = vals[1] - vals[2];
    let gap_high = vals[0] - vals[1];
    let smallest = if gap_low >= gap_high {
        eigenvector_by_rows(&s, vals[2])
    } else {
        eigenvector_by_rows(&s, vals[0]).map(|v1| subspace_smallest(&s, v1))
    }
    .unwrap_or([0.0, 0.0, 1.0]);
    // The trigonometric roots lose roughly half their digits when two of
    // them nearly coincide. The Rayleigh quotient of the resolved vector is
    // first-order insensitive to the vector's own error, so it restores the
    // reported smallest eigenvalue to full precision.
    let rq = dot(smallest, mat_vec(&s, smallest)).min(vals[1]);
    SymEigen3 {
        values: [out_values[0], out_values[1], rq * scale],
        smallest,
    }
}

/// Smallest-eigenvalue direction of `s` restricted to the plane orthogonal
/// to the (well-separated) largest eigenvector `v1`.
fn subspace_smallest(s: &Mat3, v1: [f64; 3]) -> [f64; 3] {
    let u = orthogonal_unit(v1);
    let w = cross(v1, u);
    let su = mat_vec(s, u);
    let sw = mat_vec(s, w);
    let b00 = dot(u, su);
    let b01 = dot(u, sw);
    let b11 = dot(w, sw);
    let half_diff = 0.5 * (b00 - b11);
    let disc = (half_diff * half_diff + b01 * b01).sqrt();
    let mu = 0.5 * (b00 + b11) - disc;
    // Pick the better-conditioned row of (B - mu I) for the null direction.
    let (c, t) = if (b00 - mu).abs() >= (b11 - mu).abs() {
        (b01, mu - b00)
    } else {
        (mu - b11, b01)
    };
    let len = (c * c + t * t).sqrt();
    if len <= f64::MIN_POSITIVE {
        return u;
    }
    let (c, t) = (c / len, t / len);
    normalize([
        c * u[0] + t * w[0],
        c * u[1] + t * w[1],
        c * u[2] + t * w[2],
    ])
}
