//! Exact and closed-form arithmetic for SU(2), su(2) and the additive
//! circle R/Z.
//!
//! SU(2) elements are stored as 2x2 complex matrices.  A group element is
//! g = cos(t) I + sin(t) (i n.sigma) with rotation angle t in [0, pi]; the
//! exponential and logarithm are evaluated in closed form through that
//! decomposition (Rodrigues form), with series fallbacks near t = 0.
//!
//! The circle group is realised additively as R/Z, so the exponential
//! R -> R/Z is plain reduction mod 1 and multiplicative circle formulas
//! become addition of representatives.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rotation-angle margin kept away from the branch cut at angle pi.
pub const DELTA_CHART: f64 = 0.1;

/// Frobenius tolerance for the structural matrix invariants.
pub const MATRIX_TOL: f64 = 1e-12;

type M2 = [[Complex64; 2]; 2];

const ZERO_M: M2 = [
    [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
    [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
];

fn mat_mul(a: &M2, b: &M2) -> M2 {
    let mut out = ZERO_M;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn mat_adjoint(a: &M2) -> M2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

fn mat_sub(a: &M2, b: &M2) -> M2 {
    let mut out = ZERO_M;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][j] - b[i][j];
        }
    }
    out
}

fn mat_frob(a: &M2) -> f64 {
    let mut s = 0.0;
    for row in a {
        for z in row {
            s += z.norm_sqr();
        }
    }
    s.sqrt()
}

fn identity_m() -> M2 {
    [
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    ]
}

/// Group element of K = SU(2): unitary 2x2 with determinant 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SU2Element {
    entries: M2,
}

/// Lie algebra element of su(2): anti-Hermitian traceless 2x2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su2Vector {
    entries: M2,
}

impl SU2Element {
    pub fn identity() -> Self {
        SU2Element { entries: identity_m() }
    }

    /// Build from raw entries, validating unitarity and det = 1.
    pub fn from_matrix(entries: M2) -> Result<Self> {
        let g = SU2Element { entries };
        let u = g.unitarity_defect();
        let d = g.det_defect();
        if u > MATRIX_TOL || d > MATRIX_TOL {
            return Err(Error::Validation(format!(
                "matrix is not in SU(2): unitarity defect {u:.3e}, det defect {d:.3e}"
            )));
        }
        Ok(g)
    }

    pub fn entries(&self) -> &M2 {
        &self.entries
    }

    pub fn mul(&self, other: &SU2Element) -> SU2Element {
        SU2Element { entries: mat_mul(&self.entries, &other.entries) }
    }

    /// Inverse = conjugate transpose.
    pub fn inverse(&self) -> SU2Element {
        SU2Element { entries: mat_adjoint(&self.entries) }
    }

    /// ||g* g - I||_F.
    pub fn unitarity_defect(&self) -> f64 {
        let p = mat_mul(&mat_adjoint(&self.entries), &self.entries);
        mat_frob(&mat_sub(&p, &identity_m()))
    }

    /// |det(g) - 1|.
    pub fn det_defect(&self) -> f64 {
        let det = self.entries[0][0] * self.entries[1][1] - self.entries[0][1] * self.entries[1][0];
        (det - Complex64::new(1.0, 0.0)).norm()
    }

    /// Rotation angle in [0, pi]: g = cos(t) I + sin(t) (i n.sigma).
    pub fn angle(&self) -> f64 {
        let w = 0.5 * (self.entries[0][0] + self.entries[1][1]).re;
        let v = self.imag_vector();
        let s = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        s.atan2(w)
    }

    /// Frobenius distance to another element.
    pub fn distance(&self, other: &SU2Element) -> f64 {
        mat_frob(&mat_sub(&self.entries, &other.entries))
    }

    /// Coefficients (a, b, c) of the anti-Hermitian part (g - g*)/2
    /// in the basis (i sigma_1, i sigma_2, i sigma_3).
    fn imag_vector(&self) -> [f64; 3] {
        let a01 = 0.5 * (self.entries[0][1] - self.entries[1][0].conj());
        let a00 = 0.5 * (self.entries[0][0] - self.entries[0][0].conj());
        [a01.im, a01.re, a00.im]
    }

    /// Quaternion coordinates (q0, q1, q2, q3) on S^3 with
    /// g = q0 I + i (q1 sigma_1 + q2 sigma_2 + q3 sigma_3).
    pub fn quaternion(&self) -> [f64; 4] {
        let w = 0.5 * (self.entries[0][0] + self.entries[1][1]).re;
        let v = self.imag_vector();
        [w, v[0], v[1], v[2]]
    }
}

impl Su2Vector {
    pub fn zero() -> Self {
        Su2Vector { entries: ZERO_M }
    }

    /// Build from raw entries, validating anti-Hermiticity and tracelessness.
    pub fn from_matrix(entries: M2) -> Result<Self> {
        let x = Su2Vector { entries };
        let h = x.hermiticity_defect();
        let t = x.trace_defect();
        if h > MATRIX_TOL || t > MATRIX_TOL {
            return Err(Error::Validation(format!(
                "matrix is not in su(2): anti-Hermitian defect {h:.3e}, trace defect {t:.3e}"
            )));
        }
        Ok(x)
    }

    /// X = i (a sigma_1 + b sigma_2 + c sigma_3).
    pub fn from_vector(a: f64, b: f64, c: f64) -> Self {
        Su2Vector {
            entries: [
                [Complex64::new(0.0, c), Complex64::new(b, a)],
                [Complex64::new(-b, a), Complex64::new(0.0, -c)],
            ],
        }
    }

    /// Coefficients in the basis (i sigma_1, i sigma_2, i sigma_3).
    pub fn to_vector(&self) -> [f64; 3] {
        [self.entries[0][1].im, self.entries[0][1].re, self.entries[0][0].im]
    }

    pub fn entries(&self) -> &M2 {
        &self.entries
    }

    /// ||X* + X||_F.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut s = ZERO_M;
        let adj = mat_adjoint(&self.entries);
        for i in 0..2 {
            for j in 0..2 {
                s[i][j] = adj[i][j] + self.entries[i][j];
            }
        }
        mat_frob(&s)
    }

    /// |tr X|.
    pub fn trace_defect(&self) -> f64 {
        (self.entries[0][0] + self.entries[1][1]).norm()
    }

    /// Euclidean norm of the coefficient vector; equals the rotation angle
    /// of exp(X).
    pub fn norm(&self) -> f64 {
        let v = self.to_vector();
        (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
    }

    pub fn scale(&self, t: f64) -> Su2Vector {
        let mut out = ZERO_M;
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = self.entries[i][j] * t;
            }
        }
        Su2Vector { entries: out }
    }

    pub fn add(&self, other: &Su2Vector) -> Su2Vector {
        let mut out = ZERO_M;
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = self.entries[i][j] + other.entries[i][j];
            }
        }
        Su2Vector { entries: out }
    }

    pub fn sub(&self, other: &Su2Vector) -> Su2Vector {
        Su2Vector { entries: mat_sub(&self.entries, &other.entries) }
    }

    /// Matrix commutator [X, Y] = XY - YX.
    pub fn bracket(&self, other: &Su2Vector) -> Su2Vector {
        let xy = mat_mul(&self.entries, &other.entries);
        let yx = mat_mul(&other.entries, &self.entries);
        Su2Vector { entries: mat_sub(&xy, &yx) }
    }

    /// Ad(g) X = g X g^{-1}.
    pub fn conjugate_by(&self, g: &SU2Element) -> Su2Vector {
        let p = mat_mul(&g.entries, &self.entries);
        Su2Vector { entries: mat_mul(&p, &g.inverse().entries) }
    }
}

/// Closed-form exponential su(2) -> SU(2) (Rodrigues form).
pub fn su2_exp(x: &Su2Vector) -> SU2Element {
    let t = x.norm();
    let (cos_t, sinc_t) = if t < 1e-8 {
        // sin(t)/t = 1 - t^2/6 + t^4/120
        (1.0 - t * t / 2.0 + t.powi(4) / 24.0, 1.0 - t * t / 6.0)
    } else {
        (t.cos(), t.sin() / t)
    };
    let mut entries = ZERO_M;
    let id = identity_m();
    for i in 0..2 {
        for j in 0..2 {
            entries[i][j] = id[i][j] * cos_t + x.entries[i][j] * sinc_t;
        }
    }
    SU2Element { entries }
}

/// Principal-branch logarithm SU(2) -> su(2).
///
/// Defined for rotation angles t < pi - DELTA_CHART; the branch cut at
/// t = pi (g = -I) is excluded together with a safety margin so that the
/// chart stays well conditioned.
pub fn su2_log(g: &SU2Element) -> Result<Su2Vector> {
    let t = g.angle();
    let limit = std::f64::consts::PI - DELTA_CHART;
    if t >= limit {
        return Err(Error::ChartDomain { angle: t, limit });
    }
    // (g - g*)/2 = sin(t) (i n.sigma); multiply by t/sin(t).
    let anti = {
        let adj = mat_adjoint(&g.entries);
        let mut out = ZERO_M;
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = (g.entries[i][j] - adj[i][j]) * 0.5;
            }
        }
        out
    };
    let factor = if t < 1e-8 { 1.0 + t * t / 6.0 } else { t / t.sin() };
    let mut entries = ZERO_M;
    for i in 0..2 {
        for j in 0..2 {
            entries[i][j] = anti[i][j] * factor;
        }
    }
    Ok(Su2Vector { entries })
}

/// Project a 2x2 matrix onto su(2) (anti-Hermitian traceless part).
pub fn project_su2(m: &M2) -> Su2Vector {
    let adj = mat_adjoint(m);
    let mut anti = ZERO_M;
    for i in 0..2 {
        for j in 0..2 {
            anti[i][j] = (m[i][j] - adj[i][j]) * 0.5;
        }
    }
    let half_tr = (anti[0][0] + anti[1][1]) * 0.5;
    anti[0][0] -= half_tr;
    anti[1][1] -= half_tr;
    Su2Vector { entries: anti }
}

/// Raw positive-definite pairing -tr(XY) on su(2).
pub fn raw_pairing(x: &Su2Vector, y: &Su2Vector) -> f64 {
    let p = mat_mul(&x.entries, &y.entries);
    -(p[0][0] + p[1][1]).re
}

/// Element of U(1) = R/Z in the additive realisation, stored as a
/// representative in [0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle(f64);

impl Circle {
    pub const ZERO: Circle = Circle(0.0);

    pub fn from_real(x: f64) -> Circle {
        let mut r = x.rem_euclid(1.0);
        if r >= 1.0 {
            r = 0.0;
        }
        Circle(r)
    }

    /// Representative in [0, 1).
    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn add(&self, other: Circle) -> Circle {
        Circle::from_real(self.0 + other.0)
    }

    pub fn sub(&self, other: Circle) -> Circle {
        Circle::from_real(self.0 - other.0)
    }

    pub fn neg(&self) -> Circle {
        Circle::from_real(-self.0)
    }

    /// Distance mod 1: min(|a-b|, 1-|a-b|).
    pub fn dist(&self, other: Circle) -> f64 {
        let d = (self.0 - other.0).rem_euclid(1.0);
        d.min(1.0 - d)
    }

    /// Lift to the real branch through 0, i.e. the representative in
    /// (-1/2, 1/2].  Errors when the value is more than 0.25 away from 0,
    /// where the intended branch becomes ambiguous for our uses.
    pub fn lift(&self) -> Result<f64> {
        let r = if self.0 > 0.5 { self.0 - 1.0 } else { self.0 };
        if r.abs() > 0.25 {
            return Err(Error::Branch { value: self.0 });
        }
        Ok(r)
    }
}

/// Canonical quotient map exp: R -> R/Z.
pub fn circle_exp(x: f64) -> Circle {
    Circle::from_real(x)
}

/// Grid resolution (N_theta, N_s, N_u) used throughout the sampled maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSize {
    pub n_theta: usize,
    pub n_s: usize,
    pub n_u: usize,
}

impl GridSize {
    pub fn new(n_theta: usize, n_s: usize, n_u: usize) -> GridSize {
        GridSize { n_theta, n_s, n_u }
    }

    pub fn default_grid() -> GridSize {
        GridSize::new(64, 64, 32)
    }

    pub fn halved(&self) -> GridSize {
        GridSize::new((self.n_theta / 2).max(8), (self.n_s / 2).max(8), (self.n_u / 2).max(8))
    }

    pub fn doubled(&self) -> GridSize {
        GridSize::new(self.n_theta * 2, self.n_s * 2, self.n_u * 2)
    }

    pub fn label(&self) -> String {
        format!("{}x{}x{}", self.n_theta, self.n_s, self.n_u)
    }
}

/// Normalisation constants fixed once by calibration and read-only after.
///
/// `c_killing` and `sign` scale the raw pairing -tr(XY) so that the
/// left-invariant two-form has period exactly +1 over the transgression
/// generator; `c_kappa` scales the kappa exponent and is fitted through the
/// product identity for surface integrals.  `quad_error` is the relative
/// agreement of the generator period between `grid` and its halved grid and
/// drives all grid-tied tolerances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub c_killing: f64,
    pub sign: f64,
    pub c_kappa: f64,
    pub grid: GridSize,
    pub quad_error: f64,
    pub degree_sign: i64,
    pub generator_period: f64,
    pub murray_residual: f64,
}

impl CalibrationRecord {
    /// Provisional record with unit scales, used to bootstrap calibration.
    pub fn raw(grid: GridSize) -> CalibrationRecord {
        CalibrationRecord {
            c_killing: 1.0,
            sign: 1.0,
            c_kappa: 1.0,
            grid,
            quad_error: 0.0,
            degree_sign: 1,
            generator_period: 0.0,
            murray_residual: 0.0,
        }
    }

    /// Grid-tied tolerance: max(floor, multiplier * quadrature estimate).
    pub fn tolerance(&self, floor: f64, multiplier: f64) -> f64 {
        (multiplier * self.quad_error).max(floor)
    }
}

/// Calibrated Killing pairing sign * c_killing * (-tr(XY)).
pub fn killing(x: &Su2Vector, y: &Su2Vector, cal: &CalibrationRecord) -> f64 {
    cal.sign * cal.c_killing * raw_pairing(x, y)
}
