//! The structure 2-group (U(1) x pi_2 => U(1)), the section-wise groupoid
//! (P_1 => P_0) built from local sections of the endpoint evaluation, and
//! the local trivialisations with their 2-morphisms.
//!
//! Sections are built from one master section per atlas,
//!   Sigma(x)(t) = exp(t log mu) . exp(t log(mu^{-1} x)),
//! warped per chart by a smooth reparameterisation phi_i of [0,1]:
//!   sigma_i(x)(s) = Sigma(x)(phi_i(s)).
//! Reparameterised systems are coherent: any two sections of the same point
//! are homotopic through a family factoring through the one-dimensional
//! image of Sigma(x), whose surface integral vanishes identically.  That
//! coherence is exactly what makes the trivialisation functors respect
//! targets for every level simultaneously; with independently centered
//! exponential charts the defect is a nonzero homotopy area and the functor
//! laws fail by a grid-independent amount.
//!
//! Morphism conventions: a quadruple (z, gamma, eta, [f]) stores the source
//! circle value, source path gamma and target path eta with
//! eta = gamma . f|d; the target circle value is always computed through the
//! action.  The 2-group acts on morphisms by
//! (z, gamma, eta, [f]).(w, [sigma]) = (z + w, gamma, eta, [f sigma]).

use crate::algebra::{circle_exp, su2_exp, su2_log, CalibrationRecord, Circle};
use crate::cocycle::{canonical_class, filling_product, kappa_exponent, pi2_class};
use crate::error::{Error, Result};
use crate::maps::{FillingClass, LieLoop, Loop, PathOfLoops};
use crate::numeric::dist_to_integer;

// ---------------------------------------------------------------------------
// the structure 2-group (U(1) x pi_2 => U(1))
// ---------------------------------------------------------------------------

/// Morphism (z, [sigma]) of the structure 2-group: source z, target
/// z - k * n * per(generator).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoGroupMorphism {
    pub z: Circle,
    pub n: i64,
}

impl TwoGroupMorphism {
    pub fn source(&self) -> Circle {
        self.z
    }

    pub fn target(&self, k: f64, cal: &CalibrationRecord) -> Circle {
        self.z.add(circle_exp(-k * self.n as f64 * cal.generator_period))
    }

    /// Group product in U(1) x pi_2 (pi_2 is central).
    pub fn product(&self, other: &TwoGroupMorphism) -> TwoGroupMorphism {
        TwoGroupMorphism { z: self.z.add(other.z), n: self.n + other.n }
    }

    pub fn inverse_morphism(&self, k: f64, cal: &CalibrationRecord) -> TwoGroupMorphism {
        TwoGroupMorphism { z: self.target(k, cal), n: -self.n }
    }
}

/// (z - k n, n') o (z, n) = (z, n + n').
pub fn two_group_compose(
    first: &TwoGroupMorphism,
    second: &TwoGroupMorphism,
    k: f64,
    cal: &CalibrationRecord,
    tolerance: f64,
) -> Result<TwoGroupMorphism> {
    let defect = first.target(k, cal).dist(second.z);
    if defect > tolerance {
        return Err(Error::Composability { defect, tolerance });
    }
    Ok(TwoGroupMorphism { z: first.z, n: first.n + second.n })
}

/// Exhaustive small-sample verification of the 2-group axioms: category
/// laws, s and t as homomorphisms, and the interchange law.  Everything is
/// integer and mod-1 arithmetic, so residuals sit at rounding level.
pub fn two_group_axiom_report(k: f64, cal: &CalibrationRecord) -> Vec<(String, f64)> {
    let zs = [0.0, 0.3, 0.501, 0.77];
    let ns = [-2i64, -1, 0, 1, 2];
    let tol = 1e-9;
    let mut worst_compose: f64 = 0.0;
    let mut worst_identity: f64 = 0.0;
    let mut worst_assoc: f64 = 0.0;
    let mut worst_inverse: f64 = 0.0;
    let mut worst_hom: f64 = 0.0;
    let mut worst_interchange: f64 = 0.0;
    for &z in &zs {
        for &n in &ns {
            let m = TwoGroupMorphism { z: circle_exp(z), n };
            // identity morphisms are neutral
            let id_src = TwoGroupMorphism { z: m.source(), n: 0 };
            let id_tgt = TwoGroupMorphism { z: m.target(k, cal), n: 0 };
            let left = two_group_compose(&id_src, &m, k, cal, tol).unwrap();
            let right = two_group_compose(&m, &id_tgt, k, cal, tol).unwrap();
            worst_identity = worst_identity
                .max(left.z.dist(m.z) + (left.n - m.n).abs() as f64)
                .max(right.z.dist(m.z) + (right.n - m.n).abs() as f64);
            // inverse law
            let mi = m.inverse_morphism(k, cal);
            let round = two_group_compose(&m, &mi, k, cal, tol).unwrap();
            worst_inverse = worst_inverse.max(round.z.dist(m.z) + round.n.abs() as f64);
            // the displayed composition law
            for &n2 in &ns {
                let m2 = TwoGroupMorphism { z: m.target(k, cal), n: n2 };
                let c = two_group_compose(&m, &m2, k, cal, tol).unwrap();
                worst_compose = worst_compose
                    .max(c.z.dist(m.z) + (c.n - (n + n2)).abs() as f64);
                // associativity
                let m3 = TwoGroupMorphism { z: m2.target(k, cal), n: 1 };
                let ab_c = two_group_compose(&c, &m3, k, cal, tol).unwrap();
                let bc = two_group_compose(&m2, &m3, k, cal, tol).unwrap();
                let a_bc = two_group_compose(&m, &bc, k, cal, tol).unwrap();
                worst_assoc = worst_assoc
                    .max(ab_c.z.dist(a_bc.z) + (ab_c.n - a_bc.n).abs() as f64);
                // s and t are group homomorphisms
                let p = m.product(&m2);
                worst_hom = worst_hom
                    .max(p.source().dist(m.source().add(m2.source())))
                    .max(p.target(k, cal).dist(m.target(k, cal).add(m2.target(k, cal))));
                // interchange: (a' o a) . (b' o b) = (a' . b') o (a . b)
                let a = TwoGroupMorphism { z: circle_exp(z), n };
                let a2 = TwoGroupMorphism { z: a.target(k, cal), n: n2 };
                let b = TwoGroupMorphism { z: circle_exp(0.11), n: 1 };
                let b2 = TwoGroupMorphism { z: b.target(k, cal), n: -1 };
                let lhs = two_group_compose(&a, &a2, k, cal, tol)
                    .unwrap()
                    .product(&two_group_compose(&b, &b2, k, cal, tol).unwrap());
                let rhs = two_group_compose(&a.product(&b), &a2.product(&b2), k, cal, 1e-6)
                    .unwrap();
                worst_interchange =
                    worst_interchange.max(lhs.z.dist(rhs.z) + (lhs.n - rhs.n).abs() as f64);
            }
        }
    }
    vec![
        ("two_group.compose".into(), worst_compose),
        ("two_group.identity".into(), worst_identity),
        ("two_group.associativity".into(), worst_assoc),
        ("two_group.inverse".into(), worst_inverse),
        ("two_group.st_homomorphism".into(), worst_hom),
        ("two_group.interchange".into(), worst_interchange),
    ]
}

// ---------------------------------------------------------------------------
// atlas of reparameterised sections
// ---------------------------------------------------------------------------

/// A chart of the atlas: center loop, radius in log-distance, and the path
/// from the constant loop to the center along the warped master section.
#[derive(Debug, Clone)]
pub struct Chart {
    pub id: usize,
    pub center: Loop,
    pub radius: f64,
    pub path_to_center: PathOfLoops,
}

/// Atlas of local sections of ev: all charts share one master section
/// through the center; each chart warps the path parameter by its own
/// smooth reparameterisation.
pub struct Atlas {
    center: Loop,
    center_log: LieLoop,
    radius: f64,
    warps: Vec<f64>,
    n_s: usize,
}

impl Atlas {
    /// Warp amplitudes must keep phi_i monotone: |a| pi < 1.
    pub fn new(center: Loop, radius: f64, warps: Vec<f64>, n_s: usize) -> Result<Atlas> {
        let limit = std::f64::consts::PI - crate::algebra::DELTA_CHART;
        if radius >= limit {
            return Err(Error::Validation(format!(
                "chart radius {radius} exceeds the log-chart limit {limit}"
            )));
        }
        for a in &warps {
            if a.abs() * std::f64::consts::PI >= 1.0 {
                return Err(Error::Validation(format!("warp amplitude {a} is not monotone")));
            }
        }
        let logs = center
            .samples()
            .iter()
            .map(su2_log)
            .collect::<Result<Vec<_>>>()?;
        let center_log = LieLoop::new(logs)?;
        Ok(Atlas { center, center_log, radius, warps, n_s })
    }

    pub fn chart_count(&self) -> usize {
        self.warps.len()
    }

    pub fn grid_n_s(&self) -> usize {
        self.n_s
    }

    fn warp(&self, i: usize, s: f64) -> f64 {
        let a = self.warps[i];
        s + a * (std::f64::consts::PI * s).sin().powi(2)
    }

    /// Chart membership: log-distance from the center below the radius.
    pub fn contains(&self, x: &Loop) -> bool {
        self.center
            .inverse()
            .product(x)
            .map(|d| d.max_angle() < self.radius)
            .unwrap_or(false)
    }

    /// sigma_i(x)(s) = p_i(s) . exp(phi_i(s) log(mu^{-1} x)), with
    /// p_i(s) = exp(phi_i(s) log mu) the warped path to the center.
    pub fn local_section(&self, i: usize, x: &Loop) -> Result<PathOfLoops> {
        let delta = self.center.inverse().product(x)?;
        if delta.max_angle() >= self.radius {
            return Err(Error::ChartDomain { angle: delta.max_angle(), limit: self.radius });
        }
        let n_t = x.n_theta();
        let mut logs = Vec::with_capacity(n_t);
        for j in 0..n_t {
            logs.push(su2_log(delta.get(j))?);
        }
        let mut samples = Vec::with_capacity((self.n_s + 1) * n_t);
        for row in 0..=self.n_s {
            let phi = self.warp(i, row as f64 / self.n_s as f64);
            for j in 0..n_t {
                let p = su2_exp(&self.center_log.get(j).scale(phi));
                samples.push(p.mul(&su2_exp(&logs[j].scale(phi))));
            }
        }
        PathOfLoops::new(samples, self.n_s, n_t)
    }

    /// The chart view with its path to the center (the section at mu).
    pub fn chart(&self, i: usize) -> Result<Chart> {
        Ok(Chart {
            id: i,
            center: self.center.clone(),
            radius: self.radius,
            path_to_center: self.local_section(i, &self.center)?,
        })
    }

    /// Transition class sigma_ij with boundary sigma_j(x)^{-1} sigma_i(x),
    /// so that sigma_i = sigma_j . boundary, and the canonical filling
    /// integral.
    pub fn transition_class(
        &self,
        i: usize,
        j: usize,
        x: &Loop,
        cal: &CalibrationRecord,
    ) -> Result<FillingClass> {
        let si = self.local_section(i, x)?;
        let sj = self.local_section(j, x)?;
        let boundary = sj.inverse().product(&si)?;
        canonical_class(&boundary, cal)
    }
}

// ---------------------------------------------------------------------------
// the section-wise groupoid (P_1 => P_0)
// ---------------------------------------------------------------------------

/// Object of P_0: a circle value over a section point sigma_i(x).
#[derive(Debug, Clone)]
pub struct MoritaObject {
    pub z: Circle,
    pub chart: usize,
    pub x: Loop,
    pub gamma: PathOfLoops,
}

/// Morphism of P_1: (z, gamma, eta, [f]) with ev(gamma) = ev(eta) and
/// eta = gamma . f|d; z is the source circle value.
#[derive(Debug, Clone)]
pub struct MoritaMorphism {
    pub z: Circle,
    pub x: Loop,
    pub chart_source: usize,
    pub chart_target: usize,
    pub gamma: PathOfLoops,
    pub eta: PathOfLoops,
    pub class: FillingClass,
}

pub fn morita_object(atlas: &Atlas, chart: usize, x: &Loop, z: Circle) -> Result<MoritaObject> {
    Ok(MoritaObject { z, chart, x: x.clone(), gamma: atlas.local_section(chart, x)? })
}

/// Build the fixture morphism between the chart-a and chart-b sections of
/// x, with the canonical class shifted by `shift` generators.
pub fn morita_morphism(
    atlas: &Atlas,
    cal: &CalibrationRecord,
    z: Circle,
    x: &Loop,
    chart_source: usize,
    chart_target: usize,
    shift: i64,
) -> Result<MoritaMorphism> {
    let gamma = atlas.local_section(chart_source, x)?;
    let eta = atlas.local_section(chart_target, x)?;
    let boundary = gamma.inverse().product(&eta)?;
    let base = canonical_class(&boundary, cal)?;
    let class = base.with_integral(base.integral() + shift as f64 * cal.generator_period);
    Ok(MoritaMorphism {
        z,
        x: x.clone(),
        chart_source,
        chart_target,
        gamma,
        eta,
        class,
    })
}

impl MoritaMorphism {
    pub fn source(&self) -> MoritaObject {
        MoritaObject {
            z: self.z,
            chart: self.chart_source,
            x: self.x.clone(),
            gamma: self.gamma.clone(),
        }
    }

    pub fn target(&self, k: f64, cal: &CalibrationRecord) -> Result<MoritaObject> {
        let twist = kappa_exponent(&self.gamma, self.class.boundary(), k, cal)?;
        Ok(MoritaObject {
            z: self.z.add(circle_exp(-k * self.class.integral() + twist)),
            chart: self.chart_target,
            x: self.x.clone(),
            gamma: self.eta.clone(),
        })
    }

    /// Defects of the two defining relations of P_1:
    /// ev(gamma) = ev(eta) and eta = gamma . f|d.
    pub fn relation_defects(&self) -> (f64, f64) {
        let ev = self.gamma.endpoint().distance_max(&self.eta.endpoint());
        let prod = self
            .gamma
            .product(self.class.boundary())
            .map(|p| p.distance_max(&self.eta))
            .unwrap_or(f64::INFINITY);
        (ev, prod)
    }

    /// The 2-group action on morphisms: z shifts by w on the source and the
    /// class absorbs the pi_2 element.
    pub fn act(&self, w: Circle, n: i64, cal: &CalibrationRecord) -> MoritaMorphism {
        let mut out = self.clone();
        out.z = self.z.add(w);
        out.class = self
            .class
            .with_integral(self.class.integral() + n as f64 * cal.generator_period);
        out
    }
}

/// The 2-group action on objects: (z, gamma).w = (z + w, gamma).
pub fn morita_act_object(o: &MoritaObject, w: Circle) -> MoritaObject {
    MoritaObject { z: o.z.add(w), ..o.clone() }
}

/// Compose source-to-target; classes multiply in the filling group.
pub fn morita_compose(
    m1: &MoritaMorphism,
    m2: &MoritaMorphism,
    k: f64,
    cal: &CalibrationRecord,
    tolerance: f64,
) -> Result<MoritaMorphism> {
    let t1 = m1.target(k, cal)?;
    let defect = t1.z.dist(m2.z).max(t1.gamma.distance_max(&m2.gamma));
    if defect > tolerance {
        return Err(Error::Composability { defect, tolerance });
    }
    Ok(MoritaMorphism {
        z: m1.z,
        x: m1.x.clone(),
        chart_source: m1.chart_source,
        chart_target: m2.chart_target,
        gamma: m1.gamma.clone(),
        eta: m2.eta.clone(),
        class: filling_product(&m1.class, &m2.class, cal)?,
    })
}

/// The projection functor to the base: objects and morphisms go to the
/// common endpoint loop.
pub fn base_projection(m: &MoritaMorphism) -> Loop {
    m.gamma.endpoint()
}

/// Named residual rows of a structural check suite.
pub type AxiomReport = Vec<(String, f64)>;

fn max_row(rows: &AxiomReport) -> f64 {
    rows.iter().map(|(_, r)| *r).fold(0.0, f64::max)
}

/// The built section-wise groupoid over a fixture set, with its axiom
/// report.
pub struct MoritaGroupoid {
    pub objects: Vec<MoritaObject>,
    pub morphisms: Vec<MoritaMorphism>,
    pub report: AxiomReport,
}

impl MoritaGroupoid {
    pub fn worst_residual(&self) -> f64 {
        max_row(&self.report)
    }
}

/// Construct objects and morphisms over the fixture loops and verify the
/// defining relations, the groupoid axioms, the inclusion functor into the
/// ambient action groupoid, and the integer-torsor structure of the fibers.
/// Errors with `Coverage` when a fixture loop lies in no chart.
pub fn morita_build(
    atlas: &Atlas,
    fixtures: &[Loop],
    k: f64,
    cal: &CalibrationRecord,
) -> Result<MoritaGroupoid> {
    for (idx, x) in fixtures.iter().enumerate() {
        if !atlas.contains(x) {
            return Err(Error::Coverage(format!("fixture loop {idx} lies in no chart")));
        }
    }
    let tol = 5e-3;
    let mut objects = Vec::new();
    let mut morphisms = Vec::new();
    let mut relation: f64 = 0.0;
    let mut identity: f64 = 0.0;
    let mut inverse: f64 = 0.0;
    let mut inclusion: f64 = 0.0;
    let mut torsor: f64 = 0.0;
    for x in fixtures {
        for chart in 0..atlas.chart_count() {
            objects.push(morita_object(atlas, chart, x, circle_exp(0.31))?);
        }
        for a in 0..atlas.chart_count() {
            for b in 0..atlas.chart_count() {
                if a == b {
                    continue;
                }
                let m = morita_morphism(atlas, cal, circle_exp(0.3), x, a, b, 0)?;
                let (ev, prod) = m.relation_defects();
                relation = relation.max(ev).max(prod);
                // identity morphisms behave neutrally
                let id = phibar_morphism(atlas, a, x, &TwoGroupMorphism { z: m.z, n: 0 }, cal)?;
                let composed = morita_compose(&id, &m, k, cal, tol)?;
                identity = identity
                    .max((composed.class.integral() - m.class.integral()).abs())
                    .max(composed.class.boundary().distance_max(m.class.boundary()));
                // inverse through the filling group
                let t = m.target(k, cal)?;
                let inv = MoritaMorphism {
                    z: t.z,
                    x: x.clone(),
                    chart_source: b,
                    chart_target: a,
                    gamma: m.eta.clone(),
                    eta: m.gamma.clone(),
                    class: crate::cocycle::filling_inverse(&m.class, cal)?,
                };
                let round = morita_compose(&m, &inv, k, cal, tol)?;
                inverse = inverse
                    .max(round.target(k, cal)?.z.dist(m.z))
                    .max(round.class.integral().abs());
                // inclusion functor respects source, target, composition
                let g = crate::groupoid::GroupoidMorphism {
                    source: crate::groupoid::GroupoidObject { z: m.z, gamma: m.gamma.clone() },
                    arrow: m.class.clone(),
                };
                let gt = crate::groupoid::target(&g, k, cal)?;
                inclusion = inclusion
                    .max(gt.z.dist(t.z))
                    .max(gt.gamma.distance_max(&t.gamma));
                morphisms.push(m);
            }
        }
        torsor = torsor.max(torsor_integrality(atlas, cal, x, 0, 1, &[-2, -1, 1, 2])?);
    }
    let report = vec![
        ("morita.p1_relations".to_string(), relation),
        ("morita.identity".to_string(), identity),
        ("morita.inverse".to_string(), inverse),
        ("morita.inclusion_functor".to_string(), inclusion),
        ("morita.torsor_integrality".to_string(), torsor),
    ];
    Ok(MoritaGroupoid { objects, morphisms, report })
}

/// The bundle-axiom report for one chart pair: functoriality of the two
/// trivialisations, their equivariance under the 2-group action, the exact
/// identity Phi o Phi-bar = id, naturality of the connecting 2-morphism,
/// and commutation with the base projection.
pub fn trivialization_suite(
    atlas: &Atlas,
    chart_i: usize,
    chart_j: usize,
    fixtures: &[Loop],
    k: f64,
    cal: &CalibrationRecord,
) -> Result<AxiomReport> {
    let tol = 5e-3;
    let mut functor: f64 = 0.0;
    let mut equivariance: f64 = 0.0;
    let mut section_identity: f64 = 0.0;
    let mut naturality: f64 = 0.0;
    let mut projection: f64 = 0.0;
    // a third chart makes phi-composition nontrivial when available
    let mid = (0..atlas.chart_count())
        .find(|c| *c != chart_i && *c != chart_j)
        .unwrap_or(chart_j);
    for x in fixtures {
        let m = morita_morphism(atlas, cal, circle_exp(0.3), x, chart_i, mid, 1)?;
        // (a) functors: targets and composites map coherently
        let (g, snap) = phi_morphism(atlas, &m, cal)?;
        functor = functor.max(snap).max(g.source().dist(m.z));
        let t1 = m.target(k, cal)?;
        functor = functor.max(t1.z.dist(g.target(k, cal)));
        let mut m2 = morita_morphism(atlas, cal, t1.z, x, mid, chart_j, 0)?;
        m2.z = t1.z;
        let comp = morita_compose(&m, &m2, k, cal, tol)?;
        let (g2, _) = phi_morphism(atlas, &m2, cal)?;
        let (gc, _) = phi_morphism(atlas, &comp, cal)?;
        let expected = two_group_compose(&g, &g2, k, cal, tol)?;
        functor = functor.max(gc.z.dist(expected.z) + (gc.n - expected.n).abs() as f64);
        // (b) equivariance of both trivialisations
        let w = circle_exp(0.23);
        let n = 2i64;
        let acted = m.act(w, n, cal);
        let (lhs, _) = phi_morphism(atlas, &acted, cal)?;
        let rhs = g.product(&TwoGroupMorphism { z: w, n });
        equivariance = equivariance.max(lhs.z.dist(rhs.z) + (lhs.n - rhs.n).abs() as f64);
        let o = m.source();
        let (bl, bz) = phi_object(&morita_act_object(&o, w));
        let (al, az) = phi_object(&o);
        equivariance = equivariance.max(bl.distance_max(&al)).max(bz.dist(az.add(w)));
        let tg = TwoGroupMorphism { z: circle_exp(0.4), n: 1 };
        let acted_g = tg.product(&TwoGroupMorphism { z: w, n });
        let lhs_m = phibar_morphism(atlas, chart_i, x, &acted_g, cal)?;
        let rhs_m = phibar_morphism(atlas, chart_i, x, &tg, cal)?.act(w, n, cal);
        equivariance = equivariance
            .max(lhs_m.z.dist(rhs_m.z))
            .max((lhs_m.class.integral() - rhs_m.class.integral()).abs());
        // (c) Phi o Phi-bar = id, exact at samples
        let ob = phibar_object(atlas, chart_i, x, circle_exp(0.42))?;
        let (lx, lz) = phi_object(&ob);
        section_identity = section_identity
            .max(lx.distance_max(x))
            .max(lz.dist(circle_exp(0.42)));
        let back = phibar_morphism(atlas, chart_i, x, &tg, cal)?;
        let (tg2, d) = phi_morphism(atlas, &back, cal)?;
        section_identity = section_identity
            .max(d)
            .max(tg2.z.dist(tg.z))
            .max((tg2.n - tg.n).abs() as f64);
        // (d) naturality of tau-bar against m, plus its circle-action law
        let mm = morita_morphism(atlas, cal, circle_exp(0.3), x, chart_j, mid, 1)?;
        let (gm, _) = phi_morphism(atlas, &mm, cal)?;
        let src = mm.source();
        let tgt = mm.target(k, cal)?;
        let (tau_src, c1) = tau_bar(atlas, chart_i, &src, cal)?;
        let (tau_tgt, c2) = tau_bar(atlas, chart_i, &tgt, cal)?;
        naturality = naturality.max(c1).max(c2);
        let pb = phibar_morphism(atlas, chart_i, x, &gm, cal)?;
        let left = morita_compose(&pb, &tau_tgt, k, cal, tol)?;
        let right = morita_compose(&tau_src, &mm, k, cal, tol)?;
        naturality = naturality
            .max(left.class.boundary().distance_max(right.class.boundary()))
            .max((left.class.integral() - right.class.integral()).abs());
        let lt = left.target(k, cal)?;
        let rt = right.target(k, cal)?;
        naturality = naturality.max(lt.z.dist(rt.z)).max(lt.gamma.distance_max(&rt.gamma));
        let (tau_acted, _) = tau_bar(atlas, chart_i, &morita_act_object(&src, w), cal)?;
        let shifted = tau_src.act(w, 0, cal);
        naturality = naturality
            .max(tau_acted.z.dist(shifted.z))
            .max((tau_acted.class.integral() - shifted.class.integral()).abs());
        // (e) the base projection commutes with everything
        projection = projection
            .max(base_projection(&acted).distance_max(&base_projection(&m)))
            .max(phi_object(&m.source()).0.distance_max(&base_projection(&m)));
    }
    Ok(vec![
        ("trivialization.functor".to_string(), functor),
        ("trivialization.equivariance".to_string(), equivariance),
        ("trivialization.phi_phibar_identity".to_string(), section_identity),
        ("trivialization.tau_naturality".to_string(), naturality),
        ("trivialization.projection".to_string(), projection),
    ])
}

// ---------------------------------------------------------------------------
// trivialisations
// ---------------------------------------------------------------------------

/// Phi_i on objects: (z, gamma) -> (ev gamma, z).
pub fn phi_object(o: &MoritaObject) -> (Loop, Circle) {
    (o.gamma.endpoint(), o.z)
}

/// Phi_i on morphisms: (z, gamma, eta, [f]) -> (z, [f] . sigma_{ab}) where
/// the transition class cancels the boundary; returns the 2-group morphism
/// and the distance of the resulting class integral from an integer (the
/// coherence defect of the section system).
pub fn phi_morphism(
    atlas: &Atlas,
    m: &MoritaMorphism,
    cal: &CalibrationRecord,
) -> Result<(TwoGroupMorphism, f64)> {
    let t = atlas.transition_class(m.chart_source, m.chart_target, &m.x, cal)?;
    let c = filling_product(&m.class, &t, cal)?;
    let scaled = c.integral() / cal.generator_period;
    let n = scaled.round();
    Ok((
        TwoGroupMorphism { z: m.z, n: n as i64 },
        (scaled - n).abs(),
    ))
}

/// Phi-bar_i on objects: (l, z) -> (z, sigma_i(l)).
pub fn phibar_object(atlas: &Atlas, i: usize, l: &Loop, z: Circle) -> Result<MoritaObject> {
    morita_object(atlas, i, l, z)
}

/// Phi-bar_i on morphisms: (l, (z, [sigma])) -> (z, sigma_i(l), sigma_i(l),
/// [sigma]); the pi_2 class rides on the trivial boundary.
pub fn phibar_morphism(
    atlas: &Atlas,
    i: usize,
    l: &Loop,
    g: &TwoGroupMorphism,
    cal: &CalibrationRecord,
) -> Result<MoritaMorphism> {
    let section = atlas.local_section(i, l)?;
    let (n_s, n_t) = section.shape();
    Ok(MoritaMorphism {
        z: g.z,
        x: l.clone(),
        chart_source: i,
        chart_target: i,
        gamma: section.clone(),
        eta: section,
        class: pi2_class(g.n, n_s, n_t, cal),
    })
}

/// tau-bar_i component at an object (z, sigma_j(x)): the morphism from
/// (z, sigma_i(x)) back to the object, carrying the transition class with
/// its integral snapped onto the admissible representative that kills the
/// circle shift.  The returned defect is the distance of the snap from an
/// integer, i.e. the measured coherence defect of the section system.
pub fn tau_bar(
    atlas: &Atlas,
    i: usize,
    o: &MoritaObject,
    cal: &CalibrationRecord,
) -> Result<(MoritaMorphism, f64)> {
    let j = o.chart;
    let sigma_i = atlas.local_section(i, &o.x)?;
    let boundary = sigma_i.inverse().product(&o.gamma)?;
    let base = canonical_class(&boundary, cal)?;
    let pairing = kappa_exponent(&sigma_i, &boundary, 1.0, cal)?;
    let chi = (base.integral() - pairing) / cal.generator_period;
    let snap = chi.round();
    let class = base.with_integral(base.integral() - snap * cal.generator_period);
    Ok((
        MoritaMorphism {
            z: o.z,
            x: o.x.clone(),
            chart_source: i,
            chart_target: j,
            gamma: sigma_i,
            eta: o.gamma.clone(),
            class,
        },
        (chi - snap).abs(),
    ))
}

/// Torsor check: over a fixed (gamma, eta) pair the morphisms differ by
/// integer shifts of the class integral; returns the worst distance of the
/// pairwise shift quotients from integers.
pub fn torsor_integrality(
    atlas: &Atlas,
    cal: &CalibrationRecord,
    x: &Loop,
    chart_a: usize,
    chart_b: usize,
    shifts: &[i64],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let base = morita_morphism(atlas, cal, Circle::ZERO, x, chart_a, chart_b, 0)?;
    for &m in shifts {
        let shifted = morita_morphism(atlas, cal, Circle::ZERO, x, chart_a, chart_b, m)?;
        let q = (shifted.class.integral() - base.class.integral()) / cal.generator_period;
        worst = worst.max(dist_to_integer(q)).max((q - m as f64).abs());
        // boundaries agree exactly
        worst = worst.max(shifted.class.boundary().distance_max(base.class.boundary()));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::FixtureGen;
    use crate::test_support::shared_calibration;

    fn test_atlas(cal: &CalibrationRecord) -> (Atlas, Vec<Loop>) {
        let grid = cal.grid;
        let mut gen = FixtureGen::new(71, grid);
        let center = gen.based_loop(0.5);
        let atlas = Atlas::new(center.clone(), 1.4, vec![0.0, 0.17, -0.13], grid.n_s).unwrap();
        let fixtures: Vec<Loop> = (0..3).map(|_| gen.loop_near(&center, 0.35)).collect();
        (atlas, fixtures)
    }

    #[test]
    fn two_group_axioms_are_exact() {
        let cal = shared_calibration();
        for k in [0.0, 0.5, 1.0, crate::groupoid::GOLDEN_FRACTION] {
            for (name, residual) in two_group_axiom_report(k, cal) {
                assert!(residual < 1e-12, "{name} residual {residual:.3e} at k = {k}");
            }
        }
    }

    #[test]
    fn local_sections_invert_the_evaluation() {
        let cal = shared_calibration();
        let (atlas, fixtures) = test_atlas(cal);
        for x in &fixtures {
            for i in 0..atlas.chart_count() {
                let s = atlas.local_section(i, x).unwrap();
                assert!(s.endpoint().distance_max(x) < 1e-10, "ev defect");
            }
        }
        // sigma_i(mu) = p_i
        let chart = atlas.chart(1).unwrap();
        let s = atlas.local_section(1, &chart.center).unwrap();
        assert!(s.distance_max(&chart.path_to_center) < 1e-12);
    }

    #[test]
    fn section_chart_domain_is_enforced() {
        let cal = shared_calibration();
        let (atlas, _) = test_atlas(cal);
        let mut far = FixtureGen::new(99, cal.grid);
        // a loop at distance ~ 2.4 > radius 1.4 from the center
        let outside = far.lie_loop(1.0).scale(2.4).exp();
        assert!(!atlas.contains(&outside));
        match atlas.local_section(0, &outside) {
            Err(Error::ChartDomain { .. }) => {}
            other => panic!("expected ChartDomain, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn section_smoothness_proxy() {
        // finite-difference derivative of sigma_i under loop perturbations
        // is bounded and refines at second order
        let cal = shared_calibration();
        let (atlas, fixtures) = test_atlas(cal);
        let x = &fixtures[0];
        let mut gen = FixtureGen::new(77, cal.grid);
        let dir = gen.lie_loop(1.0);
        let section = |eps: f64| {
            let moved = x.product(&dir.scale(eps).exp()).unwrap();
            atlas.local_section(1, &moved).unwrap()
        };
        let diff = |eps: f64| {
            let plus = section(eps);
            let minus = section(-eps);
            plus.distance_max(&minus) / (2.0 * eps)
        };
        let d1 = diff(1e-2);
        let d2 = diff(5e-3);
        assert!(d1.is_finite() && d1 < 10.0, "derivative proxy {d1}");
        let second_order = (d1 - d2).abs() / d1;
        assert!(second_order < 5e-3, "derivative not settling: {second_order:.3e}");
    }

    #[test]
    fn transition_classes_satisfy_the_defining_relation() {
        let cal = shared_calibration();
        let (atlas, fixtures) = test_atlas(cal);
        let x = &fixtures[0];
        // i = j: trivial class
        let t_ii = atlas.transition_class(1, 1, x, cal).unwrap();
        assert!(t_ii.boundary().closure_defect() < 1e-12);
        assert!(t_ii.integral().abs() < 1e-9);
        for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let t = atlas.transition_class(i, j, x, cal).unwrap();
            let si = atlas.local_section(i, x).unwrap();
            let sj = atlas.local_section(j, x).unwrap();
            let rebuilt = sj.product(t.boundary()).unwrap();
            assert!(rebuilt.distance_max(&si) < 1e-10, "relation defect");
        }
    }

    #[test]
    fn transition_cocycle_coherence_over_triples() {
        // [sigma_jk][sigma_ij] and [sigma_ik] fill the same boundary, so
        // their integrals differ by an integer (here: quadrature-close to 0)
        let cal = shared_calibration();
        let (atlas, fixtures) = test_atlas(cal);
        let x = &fixtures[0];
        let (i, j, k) = (0usize, 1usize, 2usize);
        let t_ij = atlas.transition_class(i, j, x, cal).unwrap();
        let t_jk = atlas.transition_class(j, k, x, cal).unwrap();
        let t_ik = atlas.transition_class(i, k, x, cal).unwrap();
        let prod = filling_product(&t_jk, &t_ij, cal).unwrap();
        assert!(prod.boundary().distance_max(t_ik.boundary()) < 1e-10);
        let defect = dist_to_integer((prod.integral() - t_ik.integral()) / cal.generator_period);
        assert!(defect < 5e-3, "coherence defect {defect:.3e}");
    }

    #[test]
    fn morita_relations_and_torsor() {
        let cal = shared_calibration();
        let (atlas, fixtures) = test_atlas(cal);
        let x = &fixtures[1];
        let m = morita_morphism(&atlas, cal, circle_exp(0.3), x, 0, 1, 0).unwrap();
        let (ev, prod) = m.relation_defects();
        assert!(ev < 1e-10 && prod < 1e-10, "P1 relations ({ev:.2e}, {prod:.2e})");
        let worst = torsor_integrality(&atlas, cal, x, 0, 1, &[-2, -1, 1, 2]).unwrap();
        assert!(worst < 1e-9, "torsor defect {worst:.3e}");
    }

    #[test]
    fn inclusion_functor_matches_the_action_groupoid() {
        let cal = shared_calibration();
        let (atlas, fixtures) = test_atlas(cal);
        let x = &fixtures[0];
        let k = 0.5;
        let m1 = morita_morphism(&atlas, cal, circle_exp(0.21), x, 0, 1, 0).unwrap();
        let t1 = m1.target(k, cal).unwrap();
        let m2 = MoritaMorphism {
            z: t1.z,
            ..morita_morphism(&atlas, cal, t1.z, x, 1, 2, 1).unwrap()
        };
        let composite = morita_compose(&m1, &m2, k, cal, 5e-3).unwrap();
        // the same composite through the ambient action groupoid
        let g1 = crate::groupoid::GroupoidMorphism {
            source: crate::groupoid::GroupoidObject { z: m1.z, gamma: m1.gamma.clone() },
            arrow: m1.class.clone(),
        };
        let g2 = crate::groupoid::GroupoidMorphism {
            source: crate::groupoid::GroupoidObject { z: m2.z, gamma: m2.gamma.clone() },
            arrow: m2.class.clone(),
        };
        let gc = crate::groupoid::compose(&g1, &g2, k, cal, 5e-3).unwrap();
        assert!(gc.arrow.boundary().distance_max(composite.class.boundary()) < 1e-10);
        assert!((gc.arrow.integral() - composite.class.integral()).abs() < 1e-9);
        let t_inc = crate::groupoid::target(&gc, k, cal).unwrap();
        let t_mor = composite.target(k, cal).unwrap();
        assert!(t_inc.z.dist(t_mor.z) < 1e-9);
        assert!(t_inc.gamma.distance_max(&t_mor.gamma) < 1e-10);
    }

    #[test]
    fn phi_and_phibar_compose_to_the_identity() {
        let cal = shared_calibration();
        let (atlas, fixtures) = test_atlas(cal);
        let l = &fixtures[2];
        let z = circle_exp(0.42);
        // objects
        let o = phibar_object(&atlas, 1, l, z).unwrap();
        let (l2, z2) = phi_object(&o);
        assert!(l2.distance_max(l) < 1e-10 && z2.dist(z) < 1e-15);
        // morphisms
        for n in [-2i64, 0, 3] {
            let g = TwoGroupMorphism { z, n };
            let m = phibar_morphism(&atlas, 1, l, &g, cal).unwrap();
            let (g2, defect) = phi_morphism(&atlas, &m, cal).unwrap();
            assert!(defect < 1e-9, "integer defect {defect:.3e}");
            assert_eq!(g2.n, n);
            assert!(g2.z.dist(z) < 1e-15);
        }
    }

    #[test]
    fn phi_is_a_functor_and_tau_bar_is_natural() {
        let cal = shared_calibration();
        let (atlas, fixtures) = test_atlas(cal);
        let x = &fixtures[0];
        let tol = 5e-3;
        for k in [0.0, 0.5, 1.0] {
            let m = morita_morphism(&atlas, cal, circle_exp(0.3), x, 0, 1, 1).unwrap();
            // phi respects targets
            let (g, snap) = phi_morphism(&atlas, &m, cal).unwrap();
            assert!(snap < tol, "snap {snap:.3e}");
            let t_m = m.target(k, cal).unwrap();
            let t_g = g.target(k, cal);
            assert!(t_m.z.dist(t_g) < tol, "k = {k}: target defect {}", t_m.z.dist(t_g));
            // naturality square of tau_bar at i = 2
            let i = 2;
            let src = m.source();
            let (tau_src, c1) = tau_bar(&atlas, i, &src, cal).unwrap();
            let (tau_tgt, c2) = tau_bar(&atlas, i, &t_m, cal).unwrap();
            assert!(c1 < tol && c2 < tol, "coherence defects ({c1:.2e}, {c2:.2e})");
            // left side: (phibar phi)(m) then tau at the target
            let pb = phibar_morphism(&atlas, i, x, &g, cal).unwrap();
            let lhs = morita_compose(&pb, &tau_tgt, k, cal, tol).unwrap();
            // right side: tau at the source then m
            let rhs = morita_compose(&tau_src, &m, k, cal, tol).unwrap();
            assert!(lhs.class.boundary().distance_max(rhs.class.boundary()) < 1e-9);
            assert!(
                (lhs.class.integral() - rhs.class.integral()).abs() < tol,
                "k = {k}: naturality integral defect {:.3e}",
                (lhs.class.integral() - rhs.class.integral()).abs()
            );
            let lt = lhs.target(k, cal).unwrap();
            let rt = rhs.target(k, cal).unwrap();
            assert!(lt.z.dist(rt.z) < tol && lt.gamma.distance_max(&rt.gamma) < 1e-9);
        }
    }

    #[test]
    fn equivariance_of_the_trivialisations() {
        let cal = shared_calibration();
        let (atlas, fixtures) = test_atlas(cal);
        let x = &fixtures[1];
        let w = circle_exp(0.23);
        let n = 2i64;
        let m = morita_morphism(&atlas, cal, circle_exp(0.61), x, 0, 2, 0).unwrap();
        // objects commute exactly
        let o = m.source();
        let (bl, bz) = phi_object(&morita_act_object(&o, w));
        let (al, az) = phi_object(&o);
        assert!(bl.distance_max(&al) < 1e-15 && bz.dist(az.add(w)) < 1e-15);
        // morphisms: phi(m.(w,n)) = phi(m) . (w,n)
        let acted = m.act(w, n, cal);
        let (lhs, _) = phi_morphism(&atlas, &acted, cal).unwrap();
        let (base, _) = phi_morphism(&atlas, &m, cal).unwrap();
        let rhs = base.product(&TwoGroupMorphism { z: w, n });
        assert!(lhs.z.dist(rhs.z) < 1e-12);
        assert_eq!(lhs.n, rhs.n);
        // phibar: phibar(l, g.(w,n)) = phibar(l, g).(w,n)
        let g = TwoGroupMorphism { z: circle_exp(0.4), n: 1 };
        let acted_g = g.product(&TwoGroupMorphism { z: w, n });
        let lhs_m = phibar_morphism(&atlas, 1, x, &acted_g, cal).unwrap();
        let rhs_m = phibar_morphism(&atlas, 1, x, &g, cal).unwrap().act(w, n, cal);
        assert!(lhs_m.z.dist(rhs_m.z) < 1e-12);
        assert!((lhs_m.class.integral() - rhs_m.class.integral()).abs() < 1e-12);
        // tau_bar flows through the object action: tau((z,gamma).w) = tau((z,gamma)).(w, 0)
        let (tau_acted, _) = tau_bar(&atlas, 1, &morita_act_object(&o, w), cal).unwrap();
        let (tau_base, _) = tau_bar(&atlas, 1, &o, cal).unwrap();
        let shifted = tau_base.act(w, 0, cal);
        assert!(tau_acted.z.dist(shifted.z) < 1e-12);
        assert!((tau_acted.class.integral() - shifted.class.integral()).abs() < 1e-12);
    }

    #[test]
    fn full_subcategory_and_projection() {
        let cal = shared_calibration();
        let (atlas, fixtures) = test_atlas(cal);
        let x = &fixtures[0];
        let m = morita_morphism(&atlas, cal, circle_exp(0.3), x, 0, 1, 0).unwrap();
        let k = 0.5;
        // source in the preimage of U_i iff target is
        let src_in = atlas.contains(&m.source().gamma.endpoint());
        let tgt_in = atlas.contains(&m.target(k, cal).unwrap().gamma.endpoint());
        assert_eq!(src_in, tgt_in);
        // pi commutes with the action and with phi
        let acted = m.act(circle_exp(0.9), 1, cal);
        assert!(base_projection(&acted).distance_max(&base_projection(&m)) < 1e-15);
        let (l, _z) = phi_object(&m.source());
        assert!(l.distance_max(&base_projection(&m)) < 1e-12);
    }

    #[test]
    fn morita_build_reports_and_coverage() {
        let cal = shared_calibration();
        let (atlas, fixtures) = test_atlas(cal);
        let built = morita_build(&atlas, &fixtures, 0.5, cal).unwrap();
        assert_eq!(built.objects.len(), fixtures.len() * atlas.chart_count());
        assert_eq!(built.morphisms.len(), fixtures.len() * 6);
        assert!(
            built.worst_residual() < 5e-3,
            "axiom report: {:?}",
            built.report
        );
        // a loop outside every chart triggers the coverage error
        let mut far = FixtureGen::new(123, cal.grid);
        let outside = far.lie_loop(1.0).scale(2.5).exp();
        match morita_build(&atlas, &[outside], 0.5, cal) {
            Err(Error::Coverage(_)) => {}
            other => panic!("expected Coverage, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn trivialization_suite_rows_are_small() {
        let cal = shared_calibration();
        let (atlas, fixtures) = test_atlas(cal);
        for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let rows = trivialization_suite(&atlas, i, j, &fixtures[..1], 0.5, cal).unwrap();
            for (name, residual) in rows {
                assert!(residual < 5e-3, "{name} at charts ({i},{j}): {residual:.3e}");
            }
        }
    }

    #[test]
    fn band_collapses_the_torsor_fibers() {
        let cal = shared_calibration();
        let (atlas, fixtures) = test_atlas(cal);
        let x = &fixtures[0];
        for text in ["1/2", "2/3", "2"] {
            let level = crate::groupoid::Level::parse(text).unwrap();
            let band = crate::groupoid::band_quotient(&level).unwrap();
            let k = level.as_f64();
            let base = morita_morphism(&atlas, cal, circle_exp(0.37), x, 0, 1, 0).unwrap();
            let t0 = base.target(k, cal).unwrap();
            for shift in [-2i64, -1, 1, 2] {
                let m = morita_morphism(&atlas, cal, circle_exp(0.37), x, 0, 1, shift).unwrap();
                let t = m.target(k, cal).unwrap();
                let defect = band.dist(t.z, t0.z);
                assert!(
                    defect < 10.0 * cal.quad_error + 1e-12,
                    "k = {text}, shift {shift}: band defect {defect:.3e}"
                );
            }
        }
    }
}
