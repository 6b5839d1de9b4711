//! End-to-end driver checks on generated densities at desk scale.

use msf::{
    anti_leakage, classic_factorize, constant_gauge, doubling_factorize, factor_residual,
    generate_density, outer_defect, unitary_defect, FactorConfig, GridSamples,
};

fn density(r: usize, n: usize, n_g: usize, seed: u64) -> GridSamples {
    generate_density(&msf::GeneratorConfig::new(r, n, n_g, seed)).unwrap().to_grid(n_g)
}

#[test]
fn desk_scale_density_both_drivers() {
    let n_g = 256;
    let s = density(16, 5, n_g, 42);
    let cfg = FactorConfig::default();

    let classic = classic_factorize(&s, &cfg).unwrap();
    let c1 = factor_residual(&s, &classic.factor);
    let c2 = anti_leakage(&classic.factor);
    println!("triangular: residual {c1:.3e}, anti leakage {c2:.3e}");
    assert!(c1 < 1e-10, "triangular product residual {c1:.3e}");
    assert!(c2 < 1e-2, "triangular anti leakage {c2:.3e}");

    let doubling = doubling_factorize(&s, &cfg).unwrap();
    let d1 = factor_residual(&s, &doubling.factor);
    let d2 = anti_leakage(&doubling.factor);
    println!("doubling:   residual {d1:.3e}, anti leakage {d2:.3e}");
    assert!(d1 < 1e-10, "doubling product residual {d1:.3e}");
    assert!(d2 < 1e-2, "doubling anti leakage {d2:.3e}");

    // The outer defect is limited by the same tail fold that bounds the
    // anti leakage, so at this grid it sits well above machine precision.
    let od = outer_defect(&classic.factor).unwrap();
    println!("triangular outer defect {od:.3e}");
    assert!(od < 1e-3, "outer defect {od:.3e}");
}

#[test]
fn drivers_agree_for_small_orders() {
    for (r, n_g, seed) in [(2usize, 256usize, 1u64), (4, 256, 2), (8, 512, 3)] {
        let s = density(r, 1, n_g, seed);
        let cfg = FactorConfig::default();
        let a = classic_factorize(&s, &cfg).unwrap().factor;
        let b = doubling_factorize(&s, &cfg).unwrap().factor;
        let (w, dev) = constant_gauge(&a, &b).unwrap();
        let ud = unitary_defect(&w);
        println!("r = {r}: gauge deviation {dev:.3e}, unitary defect {ud:.3e}");
        assert!(dev < 1e-8, "r = {r}: gauge deviation {dev:.3e}");
        assert!(ud < 1e-8, "r = {r}: gauge unitary defect {ud:.3e}");
    }
}
