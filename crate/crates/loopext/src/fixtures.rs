//! Deterministic seeded fixtures: smooth random loops, paths of loops, and
//! smooth circle-valued functions, all built from low-order Fourier data in
//! the Lie algebra and pushed through the exponential.  Low mode counts keep
//! quadrature error under control; amplitudes are chosen by the callers.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{circle_exp, su2_exp, Circle, GridSize, SU2Element, Su2Vector};
use crate::maps::{LieLoop, Loop, PathOfLoops};

/// Maximum Fourier mode used in the theta direction.
const THETA_MODES: usize = 3;
/// Maximum sine mode used in the path direction.
const PATH_MODES: usize = 2;

pub struct FixtureGen {
    rng: ChaCha8Rng,
    grid: GridSize,
}

impl FixtureGen {
    pub fn new(seed: u64, grid: GridSize) -> FixtureGen {
        FixtureGen { rng: ChaCha8Rng::seed_from_u64(seed), grid }
    }

    pub fn grid(&self) -> GridSize {
        self.grid
    }

    fn coeff(&mut self) -> f64 {
        self.rng.gen_range(-1.0..1.0)
    }

    pub fn su2_vector(&mut self, amp: f64) -> Su2Vector {
        Su2Vector::from_vector(
            amp * self.coeff(),
            amp * self.coeff(),
            amp * self.coeff(),
        )
    }

    pub fn su2_point(&mut self, amp: f64) -> SU2Element {
        su2_exp(&self.su2_vector(amp))
    }

    /// Smooth loop-algebra element: sum over modes m of
    /// A_m sin(2 pi m t) + B_m (cos(2 pi m t) - 1), vanishing at t = 0,
    /// with amplitudes decaying by mode.
    pub fn lie_loop(&mut self, amp: f64) -> LieLoop {
        let n = self.grid.n_theta;
        let mut coeffs = Vec::new();
        for m in 1..=THETA_MODES {
            let decay = amp / m as f64 / m as f64;
            coeffs.push((self.su2_vector(decay), self.su2_vector(decay)));
        }
        let samples = (0..n)
            .map(|j| {
                let t = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                let mut x = Su2Vector::zero();
                for (m, (a, b)) in coeffs.iter().enumerate() {
                    let w = (m + 1) as f64 * t;
                    x = x.add(&a.scale(w.sin())).add(&b.scale(w.cos() - 1.0));
                }
                x
            })
            .collect();
        LieLoop::new(samples).expect("vanishes at the basepoint by construction")
    }

    pub fn based_loop(&mut self, amp: f64) -> Loop {
        self.lie_loop(amp).exp()
    }

    /// Loop inside the chart of radius `amp` around `center`.
    pub fn loop_near(&mut self, center: &Loop, amp: f64) -> Loop {
        let delta = self.lie_loop(amp).exp();
        center.product(&delta).expect("same grid")
    }

    /// Closed path of loops: exp of sum over modes of sin(pi m s) L_m(theta).
    pub fn closed_path(&mut self, amp: f64) -> PathOfLoops {
        let (n_s, n_t) = (self.grid.n_s, self.grid.n_theta);
        let layers: Vec<LieLoop> =
            (0..PATH_MODES).map(|m| self.lie_loop(amp / (m + 1) as f64)).collect();
        let mut samples = Vec::with_capacity((n_s + 1) * n_t);
        for i in 0..=n_s {
            let s = i as f64 / n_s as f64;
            for j in 0..n_t {
                let mut x = Su2Vector::zero();
                for (m, l) in layers.iter().enumerate() {
                    let c = (std::f64::consts::PI * (m + 1) as f64 * s).sin();
                    x = x.add(&l.get(j).scale(c));
                }
                samples.push(su2_exp(&x));
            }
        }
        PathOfLoops::new(samples, n_s, n_t).expect("closed by construction")
    }

    /// Open path of loops (an element of the based path group): exp of
    /// s L_0(theta) + sum_m sin(pi m s) L_m(theta).
    pub fn open_path(&mut self, amp: f64) -> PathOfLoops {
        let (n_s, n_t) = (self.grid.n_s, self.grid.n_theta);
        let head = self.lie_loop(amp);
        let layers: Vec<LieLoop> =
            (0..PATH_MODES).map(|m| self.lie_loop(amp / (m + 1) as f64)).collect();
        let mut samples = Vec::with_capacity((n_s + 1) * n_t);
        for i in 0..=n_s {
            let s = i as f64 / n_s as f64;
            for j in 0..n_t {
                let mut x = head.get(j).scale(s);
                for (m, l) in layers.iter().enumerate() {
                    let c = (std::f64::consts::PI * (m + 1) as f64 * s).sin();
                    x = x.add(&l.get(j).scale(c));
                }
                samples.push(su2_exp(&x));
            }
        }
        PathOfLoops::new(samples, n_s, n_t).expect("based by construction")
    }

    /// Grid of tangent vectors X(s, theta) = s * X_hat(theta): the linear
    /// one-parameter profile used for derived-cocycle checks.
    pub fn linear_tangent(&mut self, amp: f64) -> TangentPath {
        let x_hat = self.lie_loop(amp);
        let (n_s, n_t) = (self.grid.n_s, self.grid.n_theta);
        let mut samples = Vec::with_capacity((n_s + 1) * n_t);
        for i in 0..=n_s {
            let s = i as f64 / n_s as f64;
            for j in 0..n_t {
                samples.push(x_hat.get(j).scale(s));
            }
        }
        TangentPath { samples, n_s, n_t, endpoint: x_hat }
    }

    /// Smooth circle-valued function on SU(2) with b(e) = 0.
    pub fn smooth_group_function(&mut self) -> impl Fn(&SU2Element) -> Circle {
        let m = [self.su2_point(1.2), self.su2_point(0.8)];
        let w = [self.coeff() * 0.1, self.coeff() * 0.1];
        let at = move |g: &SU2Element| {
            let mut v = 0.0;
            for (mi, wi) in m.iter().zip(&w) {
                let p = g.mul(mi);
                let e = p.entries();
                v += wi * (e[0][0].re + 0.7 * e[0][1].im - 0.3 * e[1][0].re);
            }
            v
        };
        let offset = at(&SU2Element::identity());
        move |g: &SU2Element| circle_exp(at(g) - offset)
    }

    /// Smooth circle-valued function on the path group with b(e) = 0,
    /// built from a few fixed probe samples of the path.
    pub fn smooth_path_function(&mut self) -> impl Fn(&PathOfLoops) -> Circle {
        let probes: Vec<(f64, f64, SU2Element, f64)> = (0..4)
            .map(|_| {
                (
                    self.rng.gen_range(0.2..1.0),
                    self.rng.gen_range(0.0..1.0),
                    self.su2_point(1.0),
                    self.coeff() * 0.08,
                )
            })
            .collect();
        let at = move |p: &PathOfLoops| {
            let mut v = 0.0;
            for (fs, ft, m, w) in &probes {
                let i = ((fs * p.n_s() as f64).round() as usize).min(p.n_s());
                let j = ((ft * p.n_theta() as f64) as usize) % p.n_theta();
                let e = p.get(i, j).mul(m);
                let en = e.entries();
                v += w * (en[0][0].re + 0.5 * en[0][1].re - 0.4 * en[1][1].im);
            }
            v
        };
        // normalise so that the constant identity path maps to 0
        move |p: &PathOfLoops| {
            let id = PathOfLoops::constant_identity(p.n_s(), p.n_theta());
            circle_exp(at(p) - at(&id))
        }
    }

    /// Like `smooth_path_function`, but with vanishing first derivative at
    /// the identity (the probe functional is squared).
    pub fn smooth_path_function_flat(&mut self) -> impl Fn(&PathOfLoops) -> Circle {
        let inner = self.smooth_path_function();
        move |p: &PathOfLoops| {
            let v = inner(p).lift().unwrap_or(0.25);
            circle_exp(8.0 * v * v)
        }
    }
}

/// Tangent vector to the path group at the identity, sampled on the path
/// grid, together with its endpoint loop-algebra value.
pub struct TangentPath {
    samples: Vec<Su2Vector>,
    n_s: usize,
    n_t: usize,
    endpoint: LieLoop,
}

impl TangentPath {
    /// exp(t X): the one-parameter family through the identity path.
    pub fn at(&self, t: f64) -> PathOfLoops {
        let samples = self.samples.iter().map(|x| su2_exp(&x.scale(t))).collect();
        PathOfLoops::from_samples_unchecked(samples, self.n_s, self.n_t)
    }

    /// X(1): the endpoint value in the loop algebra.
    pub fn endpoint(&self) -> &LieLoop {
        &self.endpoint
    }

    /// Pointwise bracket [X, Y] of two tangents on the same grid.
    pub fn bracket(&self, other: &TangentPath) -> TangentPath {
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a.bracket(b))
            .collect();
        let endpoint = self.endpoint.bracket(&other.endpoint);
        TangentPath { samples, n_s: self.n_s, n_t: self.n_t, endpoint }
    }
}
