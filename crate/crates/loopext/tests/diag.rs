//! Manual diagnostics: run with
//!   cargo test -p loopext --test diag -- --ignored --nocapture

use loopext::algebra::{CalibrationRecord, GridSize};
use loopext::degree::{degree_preimage_count, degree_quadrature};
use loopext::forms::pullback_integral;
use loopext::maps::transgress_generator;

#[test]
#[ignore]
fn generator_convergence() {
    let raw = CalibrationRecord::raw(GridSize::default_grid());
    for (nu, ns, nt) in [(8, 16, 16), (16, 32, 32), (32, 64, 64), (32, 64, 32), (64, 128, 128), (64, 64, 64)] {
        let gen = transgress_generator(nu, ns, nt);
        let p = pullback_integral(gen.as_disk(), &raw);
        let q = degree_quadrature(&gen);
        let c = degree_preimage_count(&gen).unwrap();
        let sq = gen.pointwise_square();
        let q2 = degree_quadrature(&sq);
        let c2 = degree_preimage_count(&sq).unwrap();
        println!(
            "grid u{nu} s{ns} t{nt}: raw period {p:.6}, degree quad {q:.4} count {c}, sq quad {q2:.4} count {c2}"
        );
    }
}
