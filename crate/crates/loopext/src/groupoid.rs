//! The level-k action groupoid on U(1) x P_e(Omega K), the pi_2 subaction,
//! the object-isomorphism (quotient) test, and the band quotient U(1)/k for
//! rational levels.
//!
//! Quotients are never materialised: orbits are probed through the
//! isomorphism test with a bounded search over the integer (pi_2) shifts of
//! the filling class, which is exactly how the groupoid replaces a possibly
//! bad quotient space.

use std::fmt;

use crate::algebra::{circle_exp, CalibrationRecord, Circle};
use crate::cocycle::{canonical_class, filling_inverse, filling_product, kappa_exponent};
use crate::error::{Error, Result};
use crate::maps::{FillingClass, PathOfLoops};

// ---------------------------------------------------------------------------
// levels
// ---------------------------------------------------------------------------

/// The level k: a rational in lowest terms, or a real with no rational
/// presentation (used for density sweeps).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Level {
    Rational { num: i64, den: i64 },
    Irrational(f64),
}

/// Fractional part of the golden ratio, the canonical irrational fixture.
pub const GOLDEN_FRACTION: f64 = 0.618033988749894848;

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Level {
    pub fn rational(num: i64, den: i64) -> Result<Level> {
        if den == 0 {
            return Err(Error::Config("level denominator must be nonzero".into()));
        }
        let sign = if den < 0 { -1 } else { 1 };
        let (num, den) = (num * sign, den * sign);
        let g = gcd(num, den).max(1);
        Ok(Level::Rational { num: num / g, den: den / g })
    }

    pub fn integer(n: i64) -> Level {
        Level::Rational { num: n, den: 1 }
    }

    /// Parse "2", "1/2", "-3/4", "golden", or a decimal (kept irrational).
    pub fn parse(text: &str) -> Result<Level> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("golden") || t.eq_ignore_ascii_case("phi") {
            return Ok(Level::Irrational(GOLDEN_FRACTION));
        }
        if let Some((p, q)) = t.split_once('/') {
            let num: i64 = p
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad level numerator in '{text}'")))?;
            let den: i64 = q
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad level denominator in '{text}'")))?;
            return Level::rational(num, den);
        }
        if let Ok(n) = t.parse::<i64>() {
            return Ok(Level::integer(n));
        }
        t.parse::<f64>()
            .map(Level::Irrational)
            .map_err(|_| Error::Config(format!("cannot parse level '{text}'")))
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Level::Rational { num, den } => *num as f64 / *den as f64,
            Level::Irrational(x) => *x,
        }
    }

    pub fn is_integer(&self) -> bool {
        matches!(self, Level::Rational { den: 1, .. })
    }

    /// Distance mod 1 between k and the nearest integer.
    pub fn fractional_defect(&self) -> f64 {
        let f = self.as_f64().rem_euclid(1.0);
        f.min(1.0 - f)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Rational { num, den: 1 } => write!(f, "{num}"),
            Level::Rational { num, den } => write!(f, "{num}/{den}"),
            Level::Irrational(x) if (x - GOLDEN_FRACTION).abs() < 1e-15 => write!(f, "golden"),
            Level::Irrational(x) => write!(f, "{x}"),
        }
    }
}

// ---------------------------------------------------------------------------
// the action groupoid
// ---------------------------------------------------------------------------

/// Object (z, gamma) of the level-k action groupoid.
#[derive(Debug, Clone)]
pub struct GroupoidObject {
    pub z: Circle,
    pub gamma: PathOfLoops,
}

impl GroupoidObject {
    pub fn distance(&self, other: &GroupoidObject) -> f64 {
        self.z.dist(other.z).max(self.gamma.distance_max(&other.gamma))
    }
}

/// Morphism: a source object together with a filling-class arrow; the
/// target is always computed, never stored.
#[derive(Debug, Clone)]
pub struct GroupoidMorphism {
    pub source: GroupoidObject,
    pub arrow: FillingClass,
}

/// The right action (z, gamma).[f] =
/// (z - k int_f + kappa-exponent_k(gamma, f|d), gamma . f|d).
pub fn act(
    o: &GroupoidObject,
    f: &FillingClass,
    k: f64,
    cal: &CalibrationRecord,
) -> Result<GroupoidObject> {
    let twist = kappa_exponent(&o.gamma, f.boundary(), k, cal)?;
    Ok(GroupoidObject {
        z: o.z.add(circle_exp(-k * f.integral() + twist)),
        gamma: o.gamma.product(f.boundary())?,
    })
}

pub fn identity_morphism(o: &GroupoidObject) -> GroupoidMorphism {
    let (n_s, n_t) = o.gamma.shape();
    GroupoidMorphism { source: o.clone(), arrow: FillingClass::trivial(n_s, n_t) }
}

pub fn target(m: &GroupoidMorphism, k: f64, cal: &CalibrationRecord) -> Result<GroupoidObject> {
    act(&m.source, &m.arrow, k, cal)
}

/// Compose source-to-target; errors when target(m1) and source(m2) disagree
/// beyond the tolerance.
pub fn compose(
    m1: &GroupoidMorphism,
    m2: &GroupoidMorphism,
    k: f64,
    cal: &CalibrationRecord,
    tolerance: f64,
) -> Result<GroupoidMorphism> {
    let t1 = target(m1, k, cal)?;
    let defect = t1.distance(&m2.source);
    if defect > tolerance {
        return Err(Error::Composability { defect, tolerance });
    }
    Ok(GroupoidMorphism {
        source: m1.source.clone(),
        arrow: filling_product(&m1.arrow, &m2.arrow, cal)?,
    })
}

/// The inverse morphism sits at the target and carries the inverse class.
pub fn invert(m: &GroupoidMorphism, k: f64, cal: &CalibrationRecord) -> Result<GroupoidMorphism> {
    Ok(GroupoidMorphism {
        source: target(m, k, cal)?,
        arrow: filling_inverse(&m.arrow, cal)?,
    })
}

/// Decision of the orbit / object-isomorphism test.
#[derive(Debug, Clone, Copy)]
pub struct IsomorphismDecision {
    pub isomorphic: bool,
    /// Circle defect at the best integer shift within the search bound.
    pub defect: f64,
    /// The witnessing pi_2 shift.
    pub shift: i64,
}

/// Decide whether two objects are connected by a morphism, searching the
/// pi_2 shifts |m| <= bound of the canonical filling class of
/// beta = gamma_1^{-1} gamma_2.
pub fn objects_isomorphic(
    o1: &GroupoidObject,
    o2: &GroupoidObject,
    k: f64,
    cal: &CalibrationRecord,
    bound: i64,
    tolerance: f64,
) -> Result<IsomorphismDecision> {
    let ev_defect = o1.gamma.endpoint().distance_max(&o2.gamma.endpoint());
    if ev_defect > tolerance.max(1e-9) {
        return Ok(IsomorphismDecision { isomorphic: false, defect: f64::INFINITY, shift: 0 });
    }
    let beta = o1.gamma.inverse().product(&o2.gamma)?;
    let class = canonical_class(&beta, cal)?;
    let twist = kappa_exponent(&o1.gamma, &beta, k, cal)?;
    let base = o2.z.sub(o1.z).value() + k * class.integral() - twist;
    let mut best = (f64::INFINITY, 0i64);
    for m in -bound..=bound {
        let defect = circle_exp(base + k * m as f64 * cal.generator_period).dist(Circle::ZERO);
        if defect < best.0 {
            best = (defect, m);
        }
    }
    Ok(IsomorphismDecision { isomorphic: best.0 < tolerance, defect: best.0, shift: best.1 })
}

/// Defect as a function of the search bound, for the density sweep at
/// irrational levels.
pub fn isomorphism_defect_table(
    o1: &GroupoidObject,
    o2: &GroupoidObject,
    k: f64,
    cal: &CalibrationRecord,
    max_bound: i64,
) -> Result<Vec<(i64, f64)>> {
    let mut rows = Vec::new();
    for bound in 0..=max_bound {
        let d = objects_isomorphic(o1, o2, k, cal, bound, 0.0)?;
        rows.push((bound, d.defect));
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// the band U(1)/k for rational k
// ---------------------------------------------------------------------------

/// The group R/(Z + kZ) = R/(1/q)Z for k = p/q in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandGroup {
    num: i64,
    den: i64,
}

impl BandGroup {
    pub fn level(&self) -> Level {
        Level::Rational { num: self.num, den: self.den }
    }

    /// 1/q: the modulus of the band.
    pub fn modulus(&self) -> f64 {
        1.0 / self.den as f64
    }

    pub fn denominator(&self) -> i64 {
        self.den
    }

    /// Reduce a circle value mod 1/q.
    pub fn project(&self, z: Circle) -> f64 {
        z.value().rem_euclid(self.modulus())
    }

    /// Distance in the band (mod 1/q).
    pub fn dist(&self, a: Circle, b: Circle) -> f64 {
        let m = self.modulus();
        let d = (self.project(a) - self.project(b)).rem_euclid(m);
        d.min(m - d)
    }
}

/// Z + kZ = (1/q) Z when k = p/q in lowest terms; irrational levels have no
/// Hausdorff quotient and are rejected.
pub fn band_quotient(level: &Level) -> Result<BandGroup> {
    match level {
        Level::Rational { num, den } => {
            if *num == 0 {
                // Z + 0 Z = Z
                return Ok(BandGroup { num: 0, den: 1 });
            }
            Ok(BandGroup { num: *num, den: *den })
        }
        Level::Irrational(x) => Err(Error::IrrationalLevel { value: format!("{x}") }),
    }
}
