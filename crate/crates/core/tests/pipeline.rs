//! Generate, serialize, solve and certify through the public API.

use binmrf::bench::{generate, GeneratorConfig, Topology};
use binmrf::certificate::{certify, CertifyOptions, Status};
use binmrf::{brute_solve, format_instance, parse_instance, solve, EnergyModel, SolverConfig};
use proptest::prelude::*;

#[test]
fn instance_survives_a_round_trip_and_certifies() {
    let cfg = GeneratorConfig::from_sigma_d(Topology::Grid, 3, 1.0, 4.0, 77);
    let model: EnergyModel = generate(&cfg).unwrap();
    let back: EnergyModel = parse_instance(&format_instance(&model)).unwrap();
    assert_eq!(back, model);
    let run = solve(&back, &SolverConfig::default()).unwrap();
    let cert = certify(&back, &run, &CertifyOptions::default()).unwrap();
    assert!(cert.all_passed(), "{}", cert.to_text());
    assert_eq!(cert.partial.fixed_count(), 9);
    let min = brute_solve(&back, 20).unwrap().min_energy;
    assert!((cert.labeling_energy.unwrap() - min).abs() < 1e-9);
}

#[test]
fn edge_decomposition_gives_the_same_certified_minimum() {
    for seed in 0..10 {
        let cfg = GeneratorConfig::from_sigma_d(Topology::Complete, 5, 1.0, 3.0, seed);
        let model: EnergyModel = generate(&cfg).unwrap();
        let config = SolverConfig {
            decomposition: binmrf::DecompositionKind::Edge,
            ..SolverConfig::default()
        };
        let run = solve(&model, &config).unwrap();
        let min = brute_solve(&model, 20).unwrap().min_energy;
        assert!((run.report.final_bound() - min).abs() < 1e-7, "seed {seed}");
    }
}

#[test]
fn large_instance_skips_oracle_checks() {
    let cfg = GeneratorConfig::from_sigma_d(Topology::Grid, 6, 1.0, 2.0, 1);
    let model: EnergyModel = generate(&cfg).unwrap();
    let run = solve(&model, &SolverConfig::default()).unwrap();
    let cert = certify(
        &model,
        &run,
        &CertifyOptions {
            oracle_limit: 12,
            ..CertifyOptions::default()
        },
    )
    .unwrap();
    assert!(cert.all_passed(), "{}", cert.to_text());
    assert_eq!(cert.statement("persistency").unwrap().status, Status::Skip);
    assert_eq!(cert.statement("duality-gap").unwrap().status, Status::Pass);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bound_never_decreases_and_stays_below_the_minimum(
        seed in any::<u64>(),
        alpha in 0.0f64..=1.0,
        sigma_d in 0.5f64..12.0,
        complete in any::<bool>(),
    ) {
        let cfg = if complete {
            GeneratorConfig::from_sigma_d(Topology::Complete, 6, alpha, sigma_d, seed)
        } else {
            GeneratorConfig::from_sigma_d(Topology::Grid, 3, alpha, sigma_d, seed)
        };
        let model: EnergyModel = generate(&cfg).unwrap();
        let run = solve(&model, &SolverConfig::default()).unwrap();
        let mut prev = run.report.initial_bound;
        for &b in &run.report.bound_history {
            prop_assert!(b >= prev - 1e-12);
            prev = b;
        }
        prop_assert!(prev <= brute_solve(&model, 20).unwrap().min_energy + 1e-9);
    }
}
