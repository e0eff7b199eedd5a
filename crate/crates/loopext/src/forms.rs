//! The Lie algebra cocycle omega, pullback integrals of its left-invariant
//! extension over disk and sphere families, the period homomorphism, and the
//! calibration that fixes every normalisation constant.
//!
//! omega(f, g) = int_{S^1} <f(t), g'(t)> dt is evaluated by the periodic
//! trapezoid rule with a 4th-order stencil for g'.  The left-invariant
//! pullback over a parameter square uses left logarithmic derivatives in the
//! two surface directions, omega-paired fiberwise, with (u, s) positively
//! oriented.

use serde::Serialize;

use crate::algebra::{killing, CalibrationRecord, Circle, GridSize, circle_exp};
use crate::cocycle::kappa_pairing;
use crate::degree::mapping_degree;
use crate::error::{Error, Result};
use crate::fixtures::FixtureGen;
use crate::maps::{canonical_filling, transgress_generator, Axis, DiskMap, LieLoop, Side, SphereMap};
use crate::numeric::{pairwise_sum, trapezoid_weights};

use crate::algebra::Su2Vector;

/// 4th-order periodic derivative of an su(2)-valued sequence.
pub(crate) fn lie_theta_derivative(samples: &[Su2Vector]) -> Vec<Su2Vector> {
    let n = samples.len();
    let h = 1.0 / n as f64;
    let c = 1.0 / (12.0 * h);
    (0..n)
        .map(|i| {
            samples[(i + n - 2) % n]
                .scale(c)
                .add(&samples[(i + n - 1) % n].scale(-8.0 * c))
                .add(&samples[(i + 1) % n].scale(8.0 * c))
                .add(&samples[(i + 2) % n].scale(-c))
        })
        .collect()
}

fn omega_samples(f: &[Su2Vector], g: &[Su2Vector], cal: &CalibrationRecord) -> f64 {
    let n = f.len();
    let dg = lie_theta_derivative(g);
    let vals: Vec<f64> = (0..n).map(|j| killing(&f[j], &dg[j], cal)).collect();
    pairwise_sum(&vals) / n as f64
}

/// The continuous Lie algebra cocycle on loop-algebra elements.
pub fn omega(f: &LieLoop, g: &LieLoop, cal: &CalibrationRecord) -> Result<f64> {
    if f.n_theta() != g.n_theta() {
        return Err(Error::ShapeMismatch {
            expected: format!("n_theta {}", f.n_theta()),
            got: format!("n_theta {}", g.n_theta()),
        });
    }
    Ok(omega_samples(f.samples(), g.samples(), cal))
}

/// Integral of the left-invariant extension of omega over a disk family.
pub fn pullback_integral(f: &DiskMap, cal: &CalibrationRecord) -> f64 {
    let (n_u, n_s, n_t) = f.shape();
    let du = f.log_derivative(Axis::U, Side::Left).expect("validated grid");
    let ds = f.log_derivative(Axis::S, Side::Left).expect("validated grid");
    let wu = trapezoid_weights(n_u);
    let ws = trapezoid_weights(n_s);
    let mut cells = Vec::with_capacity((n_u + 1) * (n_s + 1));
    for i in 0..=n_u {
        for j in 0..=n_s {
            let base = (i * (n_s + 1) + j) * n_t;
            let fu = &du[base..base + n_t];
            let fs = &ds[base..base + n_t];
            cells.push(wu[i] * ws[j] * omega_samples(fu, fs, cal));
        }
    }
    pairwise_sum(&cells)
}

/// Integral over a sphere family together with its circle class.
pub fn period_homomorphism(sigma: &SphereMap, cal: &CalibrationRecord) -> (f64, Circle) {
    let value = pullback_integral(sigma.as_disk(), cal);
    (value, circle_exp(value))
}

/// One row of the calibration convergence table.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub grid: String,
    pub raw_value: f64,
    pub calibrated_value: f64,
    pub richardson_estimate: f64,
}

/// Calibration output: the record plus its convergence table.
#[derive(Debug, Clone)]
pub struct Calibration {
    pub record: CalibrationRecord,
    pub table: Vec<ConvergenceRow>,
}

/// Number of seeded disk pairs used by the internal Murray fit.
const MURRAY_FIT_PAIRS: usize = 8;

/// Internal seed for calibration fixtures; calibration is a function of the
/// grid alone so that cached records stay valid across run seeds.
const CALIBRATION_SEED: u64 = 0xCA11_B001;

/// Compute every normalisation constant for the given grid.
///
/// Stage one integrates the left-invariant form over the transgression
/// generator and absorbs scale and sign into the Killing pairing so the
/// period is exactly +1; stage two fits the kappa scale through the product
/// identity for surface integrals over seeded disk pairs.
pub fn calibrate(grid: GridSize) -> Result<Calibration> {
    let mut record = CalibrationRecord::raw(grid);

    let gen = transgress_generator(grid.n_u, grid.n_s, grid.n_theta);
    let half = grid.halved();
    let gen_half = transgress_generator(half.n_u, half.n_s, half.n_theta);

    let raw = pullback_integral(gen.as_disk(), &record);
    let raw_half = pullback_integral(gen_half.as_disk(), &record);
    if raw.abs() < 1e-6 {
        return Err(Error::Calibration(format!(
            "raw generator period {raw:.3e} is degenerate at grid {}",
            grid.label()
        )));
    }

    record.sign = raw.signum();
    record.c_killing = 1.0 / raw.abs();
    record.quad_error = ((raw - raw_half) / raw).abs();
    record.generator_period = pullback_integral(gen.as_disk(), &record);

    let degree = mapping_degree(&gen)?;
    if degree.abs() != 1 {
        return Err(Error::Calibration(format!("generator degree {degree} is not a unit")));
    }
    record.degree_sign = degree.signum();

    // kappa scale from the product identity
    //   int_f + int_g - int_{f g} = c_kappa * <<f|d, g|d>>
    // fitted by least squares through the origin over seeded pairs.
    let mut gen_fixtures = FixtureGen::new(CALIBRATION_SEED, grid);
    let mut num = 0.0;
    let mut den = 0.0;
    let mut samples = Vec::new();
    for _ in 0..MURRAY_FIT_PAIRS {
        let beta1 = gen_fixtures.closed_path(0.35);
        let beta2 = gen_fixtures.closed_path(0.3);
        let f = canonical_filling(&beta1, grid.n_u)?;
        let g = canonical_filling(&beta2, grid.n_u)?;
        let fg = f.product(&g)?;
        let rhs = pullback_integral(&f, &record) + pullback_integral(&g, &record)
            - pullback_integral(&fg, &record);
        let pairing = kappa_pairing(&beta1, &beta2, &record)?;
        num += pairing * rhs;
        den += pairing * pairing;
        samples.push((pairing, rhs));
    }
    if den < 1e-12 {
        return Err(Error::Calibration("kappa pairing is degenerate on the fit fixtures".into()));
    }
    record.c_kappa = num / den;
    record.murray_residual = samples
        .iter()
        .map(|(e, r)| (r - record.c_kappa * e).abs())
        .fold(0.0, f64::max);

    let richardson = raw + (raw - raw_half) / 3.0;
    let table = vec![
        ConvergenceRow {
            grid: half.label(),
            raw_value: raw_half,
            calibrated_value: raw_half * record.sign * record.c_killing,
            richardson_estimate: richardson,
        },
        ConvergenceRow {
            grid: grid.label(),
            raw_value: raw,
            calibrated_value: record.generator_period,
            richardson_estimate: richardson,
        },
    ];

    Ok(Calibration { record, table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{raw_pairing, Su2Vector};
    use crate::maps::LieLoop;
    use once_cell::sync::Lazy;

    static CAL: Lazy<CalibrationRecord> =
        Lazy::new(|| calibrate(GridSize::new(32, 32, 16)).unwrap().record);

    fn lie_loop_from(n: usize, f: impl Fn(f64) -> Su2Vector) -> LieLoop {
        LieLoop::new(
            (0..n)
                .map(|j| f(j as f64 / n as f64))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn omega_antisymmetry_and_diagonal() {
        let cal = CalibrationRecord::raw(GridSize::new(64, 8, 8));
        let x = Su2Vector::from_vector(0.4, -0.2, 0.7);
        let y = Su2Vector::from_vector(0.1, 0.3, -0.5);
        let f = lie_loop_from(64, |t| {
            x.scale((2.0 * std::f64::consts::PI * t).sin())
                .add(&y.scale((4.0 * std::f64::consts::PI * t).cos() - 1.0))
        });
        let g = lie_loop_from(64, |t| {
            y.scale((2.0 * std::f64::consts::PI * t).sin() * 0.7)
                .add(&x.scale(((2.0 * std::f64::consts::PI * t).cos() - 1.0) * 0.3))
        });
        let fg = omega(&f, &g, &cal).unwrap();
        let gf = omega(&g, &f, &cal).unwrap();
        assert!((fg + gf).abs() < 1e-10, "antisymmetry defect {}", (fg + gf).abs());
        assert!(omega(&f, &f, &cal).unwrap().abs() < 1e-12);
    }

    #[test]
    fn omega_matches_closed_form_oracle() {
        // f = sin(2 pi t) X, g = (cos(2 pi t) - 1) X
        // int_0^1 sin(2 pi t) * (-2 pi sin(2 pi t)) dt = -pi
        let cal = CalibrationRecord::raw(GridSize::new(64, 8, 8));
        let x = Su2Vector::from_vector(0.3, 0.5, -0.2);
        let f = lie_loop_from(64, |t| x.scale((2.0 * std::f64::consts::PI * t).sin()));
        let g = lie_loop_from(64, |t| x.scale((2.0 * std::f64::consts::PI * t).cos() - 1.0));
        let got = omega(&f, &g, &cal).unwrap();
        let expected = -std::f64::consts::PI * raw_pairing(&x, &x);
        assert!(
            (got - expected).abs() < 1e-3 * expected.abs(),
            "omega {got} vs oracle {expected}"
        );
    }

    #[test]
    fn omega_is_bilinear() {
        let cal = CalibrationRecord::raw(GridSize::new(64, 8, 8));
        let pi2 = 2.0 * std::f64::consts::PI;
        let x = lie_loop_from(64, |t| Su2Vector::from_vector(0.4, -0.1, 0.2).scale((pi2 * t).sin()));
        let y = lie_loop_from(64, |t| {
            Su2Vector::from_vector(-0.3, 0.5, 0.1).scale((2.0 * pi2 * t).cos() - 1.0)
        });
        let z = lie_loop_from(64, |t| Su2Vector::from_vector(0.2, 0.2, -0.6).scale((pi2 * t).sin()));
        let (a, b) = (1.7, -0.45);
        let combo = x.scale(a).add(&y.scale(b));
        let lhs = omega(&combo, &z, &cal).unwrap();
        let rhs = a * omega(&x, &z, &cal).unwrap() + b * omega(&y, &z, &cal).unwrap();
        assert!((lhs - rhs).abs() < 1e-12, "bilinearity defect {:.3e}", (lhs - rhs).abs());
    }

    #[test]
    fn omega_jacobi_identity() {
        let cal = CalibrationRecord::raw(GridSize::new(256, 8, 8));
        let pi2 = 2.0 * std::f64::consts::PI;
        let mk = |a: [f64; 3], b: [f64; 3], m1: f64, m2: f64| {
            lie_loop_from(256, move |t| {
                Su2Vector::from_vector(a[0], a[1], a[2])
                    .scale(0.06 * (pi2 * m1 * t).sin())
                    .add(
                        &Su2Vector::from_vector(b[0], b[1], b[2])
                            .scale(0.06 * ((pi2 * m2 * t).cos() - 1.0)),
                    )
            })
        };
        let x = mk([1.0, 0.2, -0.3], [0.0, 0.7, 0.1], 1.0, 2.0);
        let y = mk([-0.4, 1.0, 0.0], [0.3, 0.0, 0.8], 2.0, 1.0);
        let z = mk([0.2, -0.5, 1.0], [0.9, 0.1, 0.0], 1.0, 1.0);
        let r = omega(&x.bracket(&y), &z, &cal).unwrap()
            + omega(&y.bracket(&z), &x, &cal).unwrap()
            + omega(&z.bracket(&x), &y, &cal).unwrap();
        assert!(r.abs() < 1e-9, "jacobi residual {r:.3e}");
    }

    #[test]
    fn constant_disk_has_zero_integral() {
        let cal = CalibrationRecord::raw(GridSize::new(16, 16, 8));
        let d = DiskMap::constant_identity(8, 16, 16);
        assert!(pullback_integral(&d, &cal).abs() < 1e-13);
    }

    #[test]
    fn calibrated_generator_period_is_one() {
        let cal = &*CAL;
        assert!((cal.generator_period - 1.0).abs() < 1e-9);
        assert!(cal.c_killing > 0.0);
        let gen = transgress_generator(cal.grid.n_u, cal.grid.n_s, cal.grid.n_theta);
        let (p, class) = period_homomorphism(&gen, cal);
        assert!((p - 1.0).abs() < 1e-9);
        assert!(class.dist(Circle::ZERO) < 1e-9);
    }

    #[test]
    fn sign_flip_is_absorbed() {
        // flipping the raw form leaves the calibrated period at +1
        let cal = &*CAL;
        let mut flipped = cal.clone();
        flipped.sign = -cal.sign;
        flipped.c_killing = cal.c_killing;
        let gen = transgress_generator(cal.grid.n_u, cal.grid.n_s, cal.grid.n_theta);
        let p = pullback_integral(gen.as_disk(), &flipped);
        assert!((p + 1.0).abs() < 1e-9);
    }

    #[test]
    fn squared_generator_has_period_two() {
        let cal = &*CAL;
        let gen = transgress_generator(cal.grid.n_u, cal.grid.n_s, cal.grid.n_theta);
        let sq = gen.pointwise_square();
        let (p, _) = period_homomorphism(&sq, cal);
        assert!((p - 2.0).abs() < 20.0 * cal.quad_error.max(1e-6), "period {p}");
    }

    #[test]
    fn gluing_a_sphere_shifts_the_integral_by_its_period() {
        let cal = &*CAL;
        let grid = cal.grid;
        let mut fx = FixtureGen::new(99, grid);
        let beta = fx.closed_path(0.4);
        let d = canonical_filling(&beta, grid.n_u).unwrap();
        let gen = transgress_generator(grid.n_u, grid.n_s, grid.n_theta);
        let glued = d.product(gen.as_disk()).unwrap();
        let shift = pullback_integral(&glued, cal) - pullback_integral(&d, cal);
        assert!((shift - 1.0).abs() < cal.tolerance(1e-6, 10.0), "shift {shift}");
    }
}
