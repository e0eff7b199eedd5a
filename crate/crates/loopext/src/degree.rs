//! Mapping degree of a sphere family viewed as a map from the collapsed
//! parameter cube to SU(2) ~ S^3.
//!
//! Two independent routes:
//! * quadrature of the pullback of the normalised volume form, written as
//!   the triple product of left logarithmic derivatives, divided by
//!   vol(S^3) = 2 pi^2;
//! * signed counting of preimages of a regular value on the piecewise-linear
//!   approximation (Kuhn tetrahedra through quaternion coordinates).
//!
//! `mapping_degree` runs both and insists they agree.

use crate::algebra::SU2Element;
use crate::error::{Error, Result};
use crate::maps::{Axis, Side, SphereMap};
use crate::numeric::{pairwise_sum, trapezoid_weights};

/// Margin within which the quadrature value must sit next to an integer.
pub const DEGREE_TOL: f64 = 0.2;

/// Raw (unrounded) degree quadrature.
pub fn degree_quadrature(f: &SphereMap) -> f64 {
    let d = f.as_disk();
    let (n_u, n_s, n_t) = d.shape();
    let du = d.log_derivative(Axis::U, Side::Left).expect("grid checked");
    let ds = d.log_derivative(Axis::S, Side::Left).expect("grid checked");
    let dt = d.log_derivative(Axis::Theta, Side::Left).expect("grid checked");
    let wu = trapezoid_weights(n_u);
    let ws = trapezoid_weights(n_s);
    let wt = 1.0 / n_t as f64;
    let mut cell = Vec::with_capacity((n_u + 1) * (n_s + 1));
    for i in 0..=n_u {
        for j in 0..=n_s {
            let mut acc = Vec::with_capacity(n_t);
            for l in 0..n_t {
                let idx = (i * (n_s + 1) + j) * n_t + l;
                let a = du[idx].to_vector();
                let b = ds[idx].to_vector();
                let c = dt[idx].to_vector();
                let det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
                    + a[2] * (b[0] * c[1] - b[1] * c[0]);
                acc.push(det);
            }
            cell.push(wu[i] * ws[j] * wt * pairwise_sum(&acc));
        }
    }
    pairwise_sum(&cell) / (2.0 * std::f64::consts::PI * std::f64::consts::PI)
}

/// Deterministic list of regular-value candidates (unit quaternions).
fn regular_values() -> Vec<[f64; 4]> {
    let raw: [[f64; 4]; 8] = [
        [0.3717, -0.2534, 0.8012, 0.3906],
        [-0.1412, 0.6219, 0.3313, 0.6941],
        [0.5521, 0.1812, -0.4417, 0.6820],
        [0.2213, 0.4114, 0.5519, -0.6862],
        [-0.6023, 0.3312, 0.2214, 0.6901],
        [0.1119, -0.7214, 0.4417, 0.5201],
        [0.8311, 0.2217, 0.1113, 0.4978],
        [-0.3319, -0.4413, 0.7124, 0.4301],
    ];
    raw.iter()
        .map(|q| {
            let n = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
            [q[0] / n, q[1] / n, q[2] / n, q[3] / n]
        })
        .collect()
}

/// Solve the 4x4 system M x = b by Gaussian elimination with partial
/// pivoting.  Returns None for (numerically) singular systems.
fn solve4(m: &[[f64; 4]; 4], b: &[f64; 4]) -> Option<[f64; 4]> {
    let mut a = [[0.0f64; 5]; 4];
    for i in 0..4 {
        for j in 0..4 {
            a[i][j] = m[i][j];
        }
        a[i][4] = b[i];
    }
    for col in 0..4 {
        let mut piv = col;
        for r in col + 1..4 {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..4 {
            if r == col {
                continue;
            }
            let f = a[r][col] / a[col][col];
            for c in col..5 {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut x = [0.0f64; 4];
    for i in 0..4 {
        x[i] = a[i][4] / a[i][i];
    }
    Some(x)
}

fn det4(m: &[[f64; 4]; 4]) -> f64 {
    let mut a = *m;
    let mut det = 1.0;
    for col in 0..4 {
        let mut piv = col;
        for r in col + 1..4 {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < 1e-300 {
            return 0.0;
        }
        if piv != col {
            a.swap(col, piv);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..4 {
            let f = a[r][col] / a[col][col];
            for c in col..4 {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

/// Kuhn decomposition of the unit cube into six positively oriented
/// tetrahedra: vertex chains 0 -> e_a -> e_a + e_b -> (1,1,1) over the
/// permutations (a, b, c), carrying the permutation sign.
const KUHN_TETS: [([usize; 3], f64); 6] = [
    ([0, 1, 2], 1.0),
    ([0, 2, 1], -1.0),
    ([1, 0, 2], -1.0),
    ([1, 2, 0], 1.0),
    ([2, 0, 1], 1.0),
    ([2, 1, 0], -1.0),
];

fn corner_offset(axes: &[usize; 3], upto: usize) -> [usize; 3] {
    let mut v = [0usize; 3];
    for &ax in axes.iter().take(upto) {
        v[ax] = 1;
    }
    v
}

/// Signed preimage count of one regular value.  Returns None when a
/// barycentric coordinate is too close to zero to decide (value nearly on a
/// face of the PL image).
fn preimage_count(quats: &[[f64; 4]], n_u: usize, n_s: usize, n_t: usize, g0: &[f64; 4]) -> Option<i64> {
    let at = |i: usize, j: usize, l: usize| quats[(i * (n_s + 1) + j) * n_t + l % n_t];
    let mut total = 0i64;
    for i in 0..n_u {
        for j in 0..n_s {
            for l in 0..n_t {
                for (axes, orient) in KUHN_TETS.iter() {
                    let mut m = [[0.0f64; 4]; 4];
                    let mut any_positive = false;
                    for v in 0..4 {
                        let off = corner_offset(axes, v);
                        let q = at(i + off[0], j + off[1], l + off[2]);
                        let mut dot = 0.0;
                        for c in 0..4 {
                            m[c][v] = q[c];
                            dot += q[c] * g0[c];
                        }
                        any_positive |= dot > 0.0;
                    }
                    // a cone with all generators in the far hemisphere
                    // cannot contain the ray through g0
                    if !any_positive {
                        continue;
                    }
                    let Some(lambda) = solve4(&m, g0) else { continue };
                    let min = lambda.iter().cloned().fold(f64::INFINITY, f64::min);
                    if min > 1e-9 {
                        total += (orient * det4(&m).signum()) as i64;
                    } else if min > -1e-9 {
                        // ambiguous: g0 sits on a face of this image simplex
                        return None;
                    }
                }
            }
        }
    }
    Some(total)
}

/// Signed preimage count at a regular value, retrying over the deterministic
/// candidate list when a value lands on a PL face.
pub fn degree_preimage_count(f: &SphereMap) -> Result<i64> {
    let d = f.as_disk();
    let (n_u, n_s, n_t) = d.shape();
    let quats: Vec<[f64; 4]> = d.samples().iter().map(SU2Element::quaternion).collect();
    for g0 in regular_values() {
        if let Some(count) = preimage_count(&quats, n_u, n_s, n_t, &g0) {
            return Ok(count);
        }
    }
    Err(Error::Degeneracy { value: f64::NAN, distance: f64::NAN })
}

/// Integer mapping degree; both routes must agree and the quadrature must
/// sit within `DEGREE_TOL` of an integer.
pub fn mapping_degree(f: &SphereMap) -> Result<i64> {
    let raw = degree_quadrature(f);
    let rounded = raw.round();
    let distance = (raw - rounded).abs();
    if distance > DEGREE_TOL {
        return Err(Error::Degeneracy { value: raw, distance });
    }
    let counted = degree_preimage_count(f)?;
    if counted != rounded as i64 {
        return Err(Error::Degeneracy { value: raw, distance: (raw - counted as f64).abs() });
    }
    Ok(counted)
}
