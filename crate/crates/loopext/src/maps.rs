//! Sampled-map models of the mapping spaces: based loops in SU(2), paths of
//! loops, disk and sphere families, and homotopy-class records for fillings.
//!
//! Grid conventions:
//! * theta is sampled at j/N_theta for j = 0..N_theta-1; the endpoint is
//!   omitted and periodicity is index arithmetic mod N_theta.
//! * s and u are sampled on 0..=N including both endpoints.
//! * A disk is the square [0,1]_u x [0,1]_s with the three edges u=0, s=0,
//!   s=1 collapsed to the basepoint; a sphere additionally collapses u=1.
//!
//! Derivatives are finite differences: 4th-order central in the periodic
//! theta direction, 4th-order five-point stencils in s and u with one-sided
//! closures at the endpoints, projected back onto su(2) after the group
//! division.

use num_complex::Complex64;

use crate::algebra::{project_su2, su2_exp, su2_log, SU2Element, Su2Vector};
use crate::error::{Error, Result};

/// Base-point tolerance for the structural invariants of sampled maps.
pub const GRID_TOL: f64 = 1e-12;

fn shape_err(expected: impl Into<String>, got: impl Into<String>) -> Error {
    Error::ShapeMismatch { expected: expected.into(), got: got.into() }
}

// ---------------------------------------------------------------------------
// finite-difference stencils on group-valued sequences
// ---------------------------------------------------------------------------

type M2 = [[Complex64; 2]; 2];

fn mat_axpy(acc: &mut M2, g: &SU2Element, c: f64) {
    let e = g.entries();
    for i in 0..2 {
        for j in 0..2 {
            acc[i][j] += e[i][j] * c;
        }
    }
}

/// Raw matrix derivative of a periodic sequence (4th-order central).
fn periodic_matrix_derivative(get: &dyn Fn(usize) -> SU2Element, n: usize, i: usize) -> M2 {
    let h = 1.0 / n as f64;
    let mut acc = [[Complex64::new(0.0, 0.0); 2]; 2];
    let c = 1.0 / (12.0 * h);
    mat_axpy(&mut acc, &get((i + n - 2) % n), c);
    mat_axpy(&mut acc, &get((i + n - 1) % n), -8.0 * c);
    mat_axpy(&mut acc, &get((i + 1) % n), 8.0 * c);
    mat_axpy(&mut acc, &get((i + 2) % n), -c);
    acc
}

/// Raw matrix derivative on 0..=n (4th-order central, one-sided closures).
///
/// The 2nd-order variant leaves percent-level errors on the steep
/// transgression fixtures at the default grids, which is far too coarse for
/// the integrality checks downstream; the five-point stencils keep the same
/// structure at negligible cost.
fn line_matrix_derivative(get: &dyn Fn(usize) -> SU2Element, n: usize, i: usize) -> M2 {
    let h = 1.0 / n as f64;
    let mut acc = [[Complex64::new(0.0, 0.0); 2]; 2];
    let apply = |acc: &mut M2, base: usize, coeffs: &[f64; 5]| {
        for (o, c) in coeffs.iter().enumerate() {
            if *c != 0.0 {
                mat_axpy(acc, &get(base + o), c / h);
            }
        }
    };
    if i == 0 {
        apply(&mut acc, 0, &[-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -0.25]);
    } else if i == 1 {
        apply(&mut acc, 0, &[-0.25, -5.0 / 6.0, 1.5, -0.5, 1.0 / 12.0]);
    } else if i == n - 1 {
        apply(&mut acc, n - 4, &[-1.0 / 12.0, 0.5, -1.5, 5.0 / 6.0, 0.25]);
    } else if i == n {
        apply(&mut acc, n - 4, &[0.25, -4.0 / 3.0, 3.0, -4.0, 25.0 / 12.0]);
    } else {
        apply(&mut acc, i - 2, &[1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0]);
    }
    acc
}

fn left_divide(g: &SU2Element, d: &M2) -> Su2Vector {
    let gi = g.inverse();
    let e = gi.entries();
    let mut prod = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            prod[i][j] = e[i][0] * d[0][j] + e[i][1] * d[1][j];
        }
    }
    project_su2(&prod)
}

fn right_divide(g: &SU2Element, d: &M2) -> Su2Vector {
    let gi = g.inverse();
    let e = gi.entries();
    let mut prod = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            prod[i][j] = d[i][0] * e[0][j] + d[i][1] * e[1][j];
        }
    }
    project_su2(&prod)
}

/// Axis of differentiation for sampled maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    U,
    S,
    Theta,
}

/// Left variant g^{-1} dg or right variant (dg) g^{-1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

// ---------------------------------------------------------------------------
// Loop
// ---------------------------------------------------------------------------

/// Based loop in SU(2), sampled at theta_j = j / N_theta.
#[derive(Debug, Clone, PartialEq)]
pub struct Loop {
    samples: Vec<SU2Element>,
}

impl Loop {
    pub fn new(samples: Vec<SU2Element>) -> Result<Loop> {
        if samples.len() < 4 {
            return Err(Error::Validation("loop needs at least 4 samples".into()));
        }
        let l = Loop { samples };
        if l.samples[0].distance(&SU2Element::identity()) > GRID_TOL {
            return Err(Error::Validation("loop is not based at the identity".into()));
        }
        Ok(l)
    }

    pub fn constant_identity(n_theta: usize) -> Loop {
        Loop { samples: vec![SU2Element::identity(); n_theta] }
    }

    pub fn n_theta(&self) -> usize {
        self.samples.len()
    }

    pub fn get(&self, j: usize) -> &SU2Element {
        &self.samples[j]
    }

    pub fn samples(&self) -> &[SU2Element] {
        &self.samples
    }

    pub fn product(&self, other: &Loop) -> Result<Loop> {
        if self.n_theta() != other.n_theta() {
            return Err(shape_err(format!("n_theta {}", self.n_theta()), format!("n_theta {}", other.n_theta())));
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a.mul(b))
            .collect();
        Ok(Loop { samples })
    }

    pub fn inverse(&self) -> Loop {
        Loop { samples: self.samples.iter().map(|g| g.inverse()).collect() }
    }

    pub fn distance_max(&self, other: &Loop) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max)
    }

    /// Max rotation angle over the loop; the log-distance from the constant
    /// identity loop.
    pub fn max_angle(&self) -> f64 {
        self.samples.iter().map(|g| g.angle()).fold(0.0, f64::max)
    }

    /// Left logarithmic theta-derivative g^{-1} g'.
    pub fn log_derivative(&self, side: Side) -> Vec<Su2Vector> {
        let n = self.n_theta();
        (0..n)
            .map(|j| {
                let d = periodic_matrix_derivative(&|i| self.samples[i], n, j);
                match side {
                    Side::Left => left_divide(&self.samples[j], &d),
                    Side::Right => right_divide(&self.samples[j], &d),
                }
            })
            .collect()
    }
}

/// Element of the Lie algebra of the loop group: su(2)-valued loop vanishing
/// at the basepoint.
#[derive(Debug, Clone, PartialEq)]
pub struct LieLoop {
    samples: Vec<Su2Vector>,
}

impl LieLoop {
    pub fn new(samples: Vec<Su2Vector>) -> Result<LieLoop> {
        if samples.len() < 4 {
            return Err(Error::Validation("lie loop needs at least 4 samples".into()));
        }
        if samples[0].norm() > GRID_TOL {
            return Err(Error::Validation("lie loop does not vanish at the basepoint".into()));
        }
        Ok(LieLoop { samples })
    }

    pub fn zero(n_theta: usize) -> LieLoop {
        LieLoop { samples: vec![Su2Vector::zero(); n_theta] }
    }

    pub fn n_theta(&self) -> usize {
        self.samples.len()
    }

    pub fn get(&self, j: usize) -> &Su2Vector {
        &self.samples[j]
    }

    pub fn samples(&self) -> &[Su2Vector] {
        &self.samples
    }

    pub fn scale(&self, t: f64) -> LieLoop {
        LieLoop { samples: self.samples.iter().map(|x| x.scale(t)).collect() }
    }

    pub fn add(&self, other: &LieLoop) -> LieLoop {
        LieLoop {
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    /// Pointwise matrix bracket.
    pub fn bracket(&self, other: &LieLoop) -> LieLoop {
        LieLoop {
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a.bracket(b))
                .collect(),
        }
    }

    /// Pointwise exponential; a based loop.
    pub fn exp(&self) -> Loop {
        Loop { samples: self.samples.iter().map(su2_exp).collect() }
    }
}

// ---------------------------------------------------------------------------
// PathOfLoops
// ---------------------------------------------------------------------------

/// Path in the loop group starting at the constant identity loop, sampled at
/// s_i = i / N_s (rows) times theta_j (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct PathOfLoops {
    samples: Vec<SU2Element>,
    n_s: usize,
    n_theta: usize,
}

impl PathOfLoops {
    pub fn new(samples: Vec<SU2Element>, n_s: usize, n_theta: usize) -> Result<PathOfLoops> {
        if samples.len() != (n_s + 1) * n_theta {
            return Err(shape_err(
                format!("{} samples", (n_s + 1) * n_theta),
                format!("{} samples", samples.len()),
            ));
        }
        let p = PathOfLoops { samples, n_s, n_theta };
        let id = SU2Element::identity();
        for j in 0..n_theta {
            if p.get(0, j).distance(&id) > GRID_TOL {
                return Err(Error::Validation("path does not start at the constant loop".into()));
            }
        }
        for i in 0..=n_s {
            if p.get(i, 0).distance(&id) > GRID_TOL {
                return Err(Error::Validation(format!("row {i} is not a based loop")));
            }
        }
        Ok(p)
    }

    pub(crate) fn from_samples_unchecked(samples: Vec<SU2Element>, n_s: usize, n_theta: usize) -> PathOfLoops {
        PathOfLoops { samples, n_s, n_theta }
    }

    pub fn constant_identity(n_s: usize, n_theta: usize) -> PathOfLoops {
        PathOfLoops {
            samples: vec![SU2Element::identity(); (n_s + 1) * n_theta],
            n_s,
            n_theta,
        }
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_s, self.n_theta)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &SU2Element {
        &self.samples[i * self.n_theta + j]
    }

    pub fn row(&self, i: usize) -> Loop {
        Loop {
            samples: self.samples[i * self.n_theta..(i + 1) * self.n_theta].to_vec(),
        }
    }

    /// Endpoint loop; the evaluation map on the path group.
    pub fn endpoint(&self) -> Loop {
        self.row(self.n_s)
    }

    /// Row-major samples (s outer, theta inner).
    pub fn row_major_samples(&self) -> &[SU2Element] {
        &self.samples
    }

    /// A path is closed when it returns to the constant identity loop.
    pub fn closure_defect(&self) -> f64 {
        self.endpoint().distance_max(&Loop::constant_identity(self.n_theta))
    }

    pub fn is_closed(&self) -> bool {
        self.closure_defect() <= GRID_TOL
    }

    pub fn product(&self, other: &PathOfLoops) -> Result<PathOfLoops> {
        if self.shape() != other.shape() {
            return Err(shape_err(format!("{:?}", self.shape()), format!("{:?}", other.shape())));
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a.mul(b))
            .collect();
        Ok(PathOfLoops { samples, n_s: self.n_s, n_theta: self.n_theta })
    }

    pub fn inverse(&self) -> PathOfLoops {
        PathOfLoops {
            samples: self.samples.iter().map(|g| g.inverse()).collect(),
            n_s: self.n_s,
            n_theta: self.n_theta,
        }
    }

    pub fn distance_max(&self, other: &PathOfLoops) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max)
    }

    pub fn max_angle(&self) -> f64 {
        self.samples.iter().map(|g| g.angle()).fold(0.0, f64::max)
    }

    /// Logarithmic derivative along the requested axis; row-major
    /// (N_s + 1) x N_theta samples.
    pub fn log_derivative(&self, axis: Axis, side: Side) -> Result<Vec<Su2Vector>> {
        let (n_s, n_t) = (self.n_s, self.n_theta);
        if n_s < 4 || n_t < 4 {
            return Err(Error::Validation("grid size must be at least 4 along each axis".into()));
        }
        let mut out = Vec::with_capacity((n_s + 1) * n_t);
        match axis {
            Axis::S => {
                for i in 0..=n_s {
                    for j in 0..n_t {
                        let d = line_matrix_derivative(&|r| *self.get(r, j), n_s, i);
                        out.push(match side {
                            Side::Left => left_divide(self.get(i, j), &d),
                            Side::Right => right_divide(self.get(i, j), &d),
                        });
                    }
                }
            }
            Axis::Theta => {
                for i in 0..=n_s {
                    for j in 0..n_t {
                        let d = periodic_matrix_derivative(&|c| *self.get(i, c), n_t, j);
                        out.push(match side {
                            Side::Left => left_divide(self.get(i, j), &d),
                            Side::Right => right_divide(self.get(i, j), &d),
                        });
                    }
                }
            }
            Axis::U => return Err(Error::Validation("a path of loops has no u axis".into())),
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// DiskMap / SphereMap
// ---------------------------------------------------------------------------

/// Based family over the collapsed square: grid (N_u + 1) x (N_s + 1) x
/// N_theta with the edges u=0, s=0, s=1 collapsed to the basepoint.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskMap {
    samples: Vec<SU2Element>,
    n_u: usize,
    n_s: usize,
    n_theta: usize,
}

impl DiskMap {
    pub fn new(samples: Vec<SU2Element>, n_u: usize, n_s: usize, n_theta: usize) -> Result<DiskMap> {
        let expected = (n_u + 1) * (n_s + 1) * n_theta;
        if samples.len() != expected {
            return Err(shape_err(format!("{expected} samples"), format!("{} samples", samples.len())));
        }
        let d = DiskMap { samples, n_u, n_s, n_theta };
        let id = SU2Element::identity();
        for j in 0..=n_s {
            for l in 0..n_theta {
                if d.get(0, j, l).distance(&id) > GRID_TOL {
                    return Err(Error::Validation("u = 0 face is not collapsed".into()));
                }
            }
        }
        for i in 0..=n_u {
            for l in 0..n_theta {
                if d.get(i, 0, l).distance(&id) > GRID_TOL || d.get(i, n_s, l).distance(&id) > GRID_TOL {
                    return Err(Error::Validation("s-faces are not collapsed".into()));
                }
            }
            for j in 0..=n_s {
                if d.get(i, j, 0).distance(&id) > GRID_TOL {
                    return Err(Error::Validation("a theta fiber is not based".into()));
                }
            }
        }
        Ok(d)
    }

    pub(crate) fn from_samples_unchecked(
        samples: Vec<SU2Element>,
        n_u: usize,
        n_s: usize,
        n_theta: usize,
    ) -> DiskMap {
        DiskMap { samples, n_u, n_s, n_theta }
    }

    pub fn constant_identity(n_u: usize, n_s: usize, n_theta: usize) -> DiskMap {
        DiskMap {
            samples: vec![SU2Element::identity(); (n_u + 1) * (n_s + 1) * n_theta],
            n_u,
            n_s,
            n_theta,
        }
    }

    pub fn n_u(&self) -> usize {
        self.n_u
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n_u, self.n_s, self.n_theta)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, l: usize) -> &SU2Element {
        &self.samples[(i * (self.n_s + 1) + j) * self.n_theta + l]
    }

    pub fn samples(&self) -> &[SU2Element] {
        &self.samples
    }

    /// Restriction to the boundary: the u = 1 slice, a closed path of loops.
    pub fn boundary_restriction(&self) -> PathOfLoops {
        let start = self.n_u * (self.n_s + 1) * self.n_theta;
        PathOfLoops {
            samples: self.samples[start..].to_vec(),
            n_s: self.n_s,
            n_theta: self.n_theta,
        }
    }

    pub fn product(&self, other: &DiskMap) -> Result<DiskMap> {
        if self.shape() != other.shape() {
            return Err(shape_err(format!("{:?}", self.shape()), format!("{:?}", other.shape())));
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a.mul(b))
            .collect();
        Ok(DiskMap { samples, n_u: self.n_u, n_s: self.n_s, n_theta: self.n_theta })
    }

    pub fn inverse(&self) -> DiskMap {
        DiskMap {
            samples: self.samples.iter().map(|g| g.inverse()).collect(),
            n_u: self.n_u,
            n_s: self.n_s,
            n_theta: self.n_theta,
        }
    }

    /// Logarithmic derivative along u, s or theta; row-major over the grid.
    pub fn log_derivative(&self, axis: Axis, side: Side) -> Result<Vec<Su2Vector>> {
        let (n_u, n_s, n_t) = self.shape();
        if n_u < 4 || n_s < 4 || n_t < 4 {
            return Err(Error::Validation("grid size must be at least 4 along each axis".into()));
        }
        let mut out = Vec::with_capacity((n_u + 1) * (n_s + 1) * n_t);
        for i in 0..=n_u {
            for j in 0..=n_s {
                for l in 0..n_t {
                    let d = match axis {
                        Axis::U => line_matrix_derivative(&|r| *self.get(r, j, l), n_u, i),
                        Axis::S => line_matrix_derivative(&|r| *self.get(i, r, l), n_s, j),
                        Axis::Theta => periodic_matrix_derivative(&|c| *self.get(i, j, c), n_t, l),
                    };
                    out.push(match side {
                        Side::Left => left_divide(self.get(i, j, l), &d),
                        Side::Right => right_divide(self.get(i, j, l), &d),
                    });
                }
            }
        }
        Ok(out)
    }

    pub fn into_sphere(self) -> Result<SphereMap> {
        let boundary = self.boundary_restriction();
        let defect = boundary.distance_max(&PathOfLoops::constant_identity(self.n_s, self.n_theta));
        if defect > GRID_TOL {
            return Err(Error::Validation(format!(
                "boundary row is not collapsed (defect {defect:.3e})"
            )));
        }
        Ok(SphereMap(self))
    }
}

/// A disk map whose boundary row is also collapsed to the basepoint.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereMap(DiskMap);

impl SphereMap {
    pub fn as_disk(&self) -> &DiskMap {
        &self.0
    }

    pub fn into_disk(self) -> DiskMap {
        self.0
    }

    pub fn product(&self, other: &SphereMap) -> Result<SphereMap> {
        self.0.product(&other.0).map(SphereMap)
    }

    pub fn pointwise_square(&self) -> SphereMap {
        SphereMap(self.0.product(&self.0).expect("same shape"))
    }
}

// ---------------------------------------------------------------------------
// canonical filling and the transgression generator
// ---------------------------------------------------------------------------

/// Fill a closed path of loops by the radial exponential chart:
/// D(u, s, theta) = exp(u log beta(s, theta)).
///
/// Right inverse of `boundary_restriction` at the samples.
pub fn canonical_filling(beta: &PathOfLoops, n_u: usize) -> Result<DiskMap> {
    if !beta.is_closed() {
        return Err(Error::Validation(format!(
            "boundary is not closed (defect {:.3e})",
            beta.closure_defect()
        )));
    }
    if n_u < 4 {
        return Err(Error::Validation("filling needs n_u >= 4".into()));
    }
    let (n_s, n_t) = beta.shape();
    let mut logs = Vec::with_capacity((n_s + 1) * n_t);
    for i in 0..=n_s {
        for j in 0..n_t {
            logs.push(su2_log(beta.get(i, j))?);
        }
    }
    let mut samples = Vec::with_capacity((n_u + 1) * (n_s + 1) * n_t);
    for i in 0..=n_u {
        let u = i as f64 / n_u as f64;
        if i == 0 {
            samples.extend(std::iter::repeat(SU2Element::identity()).take((n_s + 1) * n_t));
            continue;
        }
        if i == n_u {
            // exact boundary restriction at u = 1
            for idx in 0..(n_s + 1) * n_t {
                samples.push(*beta.get(idx / n_t, idx % n_t));
            }
            continue;
        }
        for x in &logs {
            samples.push(su2_exp(&x.scale(u)));
        }
    }
    DiskMap::new(samples, n_u, n_s, n_t)
}

/// Radial profile: 0 at 0, 1 at 1, C^2 flat contact at both ends, with the
/// slope plateauing at 1/(1 - delta) instead of the ~1.9 peak of polynomial
/// smoothsteps.  A flatter speed keeps the polar-angle gradient of the
/// sphere parameterisation small, which directly controls the quadrature
/// error of every generator integral.
fn ramp_profile(r: f64) -> f64 {
    const DELTA: f64 = 0.18;
    if r >= 1.0 {
        return 1.0;
    }
    let v = 1.0 / (1.0 - DELTA);
    // speed w = v * q(r/delta) ramping up, constant, ramping down, with
    // q the cubic smoothstep; integrate piecewise in closed form
    let q_int = |t: f64| t * t * t - 0.5 * t * t * t * t; // integral of 3t^2-2t^3
    if r < DELTA {
        let t = r / DELTA;
        v * DELTA * q_int(t)
    } else if r <= 1.0 - DELTA {
        v * (DELTA * q_int(1.0) + (r - DELTA))
    } else {
        let t = (1.0 - r) / DELTA;
        1.0 - v * DELTA * q_int(t)
    }
}

/// Parameterisation of the unit sphere by the collapsed square: all four
/// edges map to the north pole (0, 0, 1) and the center to the south pole,
/// with polar angle driven by the radial profile and azimuth by the angle
/// around the center.  Degree +-1 onto the sphere.
fn collapsed_square_to_sphere(u: f64, s: f64) -> [f64; 3] {
    let p1 = 2.0 * u - 1.0;
    let p2 = 2.0 * s - 1.0;
    let rho = (p1 * p1 + p2 * p2).sqrt();
    if rho >= 1.0 {
        return [0.0, 0.0, 1.0];
    }
    let alpha = std::f64::consts::PI * (1.0 - ramp_profile(rho));
    let (sin_a, cos_a) = alpha.sin_cos();
    if rho < 1e-14 {
        return [0.0, 0.0, cos_a];
    }
    [sin_a * p1 / rho, sin_a * p2 / rho, cos_a]
}

/// The clutching family generating pi_2 of the loop group:
/// gamma_x(theta) = exp(i pi theta x.sigma) exp(-i pi theta sigma_3)
/// over the collapsed-square sphere parameterisation above.
pub fn transgress_generator(n_u: usize, n_s: usize, n_theta: usize) -> SphereMap {
    let pi = std::f64::consts::PI;
    let mut samples = Vec::with_capacity((n_u + 1) * (n_s + 1) * n_theta);
    for i in 0..=n_u {
        let u = i as f64 / n_u as f64;
        for j in 0..=n_s {
            let s = j as f64 / n_s as f64;
            let x = collapsed_square_to_sphere(u, s);
            if x[0] == 0.0 && x[1] == 0.0 && x[2] == 1.0 {
                // the two factors cancel exactly at the basepoint
                samples.extend(std::iter::repeat(SU2Element::identity()).take(n_theta));
                continue;
            }
            for l in 0..n_theta {
                let t = pi * l as f64 / n_theta as f64;
                let a = su2_exp(&Su2Vector::from_vector(t * x[0], t * x[1], t * x[2]));
                let b = su2_exp(&Su2Vector::from_vector(0.0, 0.0, -t));
                samples.push(a.mul(&b));
            }
        }
    }
    let disk = DiskMap::from_samples_unchecked(samples, n_u, n_s, n_theta);
    disk.into_sphere().expect("generator has a collapsed boundary by construction")
}

// ---------------------------------------------------------------------------
// FillingClass
// ---------------------------------------------------------------------------

/// Class of a disk filling: the (closed) boundary path of loops plus the
/// surface integral of the left-invariant two-form, which pins the relative
/// homotopy class through its integer shifts.
#[derive(Debug, Clone, PartialEq)]
pub struct FillingClass {
    boundary: PathOfLoops,
    integral: f64,
}

impl FillingClass {
    pub fn new(boundary: PathOfLoops, integral: f64) -> Result<FillingClass> {
        if !boundary.is_closed() {
            return Err(Error::Validation(format!(
                "filling boundary is not closed (defect {:.3e})",
                boundary.closure_defect()
            )));
        }
        Ok(FillingClass { boundary, integral })
    }

    /// Neutral element: constant boundary, zero integral.
    pub fn trivial(n_s: usize, n_theta: usize) -> FillingClass {
        FillingClass { boundary: PathOfLoops::constant_identity(n_s, n_theta), integral: 0.0 }
    }

    pub fn boundary(&self) -> &PathOfLoops {
        &self.boundary
    }

    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn with_integral(&self, integral: f64) -> FillingClass {
        FillingClass { boundary: self.boundary.clone(), integral }
    }
}
