//! Cross-module checks: minimizer, analysis, sampler and dynamics together.

use dnls_core::analysis::{gn_energy_floor, interpolate, seminorm_distance, GnConstant, SolitonProfile};
use dnls_core::elliptic::soliton_params;
use dnls_core::hypo::{lie_rank, RankMode};
use dnls_core::lattice::{gradient_sum_squares, mass, GibbsSpec, LatticeField, Nonlinearity};
use dnls_core::rng;
use dnls_core::sampling::{mcmc_gibbs, McmcConfig};
use dnls_core::sde::{integrate, Observables, SdeParams};
use dnls_core::variational::{grad_bound_check, minimize_energy, sampled_soliton, MinimizeOptions};

#[test]
fn discrete_solitons_approach_the_continuum_profile() {
    let q = SolitonProfile::new(soliton_params(25.0, 1.0).unwrap()).unwrap();
    let d: Vec<f64> = [16usize, 32, 64, 128]
        .iter()
        .map(|&n| {
            let s = minimize_energy(n, 25.0, &MinimizeOptions::default()).unwrap();
            seminorm_distance(&interpolate(&s.field), &q).distance
        })
        .collect();
    for w in d.windows(2) {
        assert!(w[1] < 0.7 * w[0], "{d:?}");
    }
}

#[test]
fn minimizer_beats_the_sampled_profile() {
    for n in [16usize, 64] {
        let nl = Nonlinearity::default();
        let sampled = nl.energy(&sampled_soliton(n, 25.0).unwrap()).total;
        let best = minimize_energy(n, 25.0, &MinimizeOptions::default()).unwrap().energy;
        assert!(best <= sampled + 1e-12, "n={n}: {best} vs {sampled}");
    }
}

#[test]
fn ground_energy_respects_the_gn_floor() {
    let c = GnConstant::persisted().c_hat;
    for n in [8usize, 32] {
        for m in [1.0, 10.0, 25.0] {
            let s = minimize_energy(n, m, &MinimizeOptions::default()).unwrap();
            let g = 0.5 * n as f64 * gradient_sum_squares(&s.field);
            assert!(s.energy >= gn_energy_floor(c, m, g) - 1e-9, "n={n} m={m}");
        }
    }
}

#[test]
fn low_energy_gibbs_samples_obey_the_gradient_bound() {
    let (n, m) = (16, 25.0);
    let c = GnConstant::persisted().c_hat;
    let s = minimize_energy(n, m, &MinimizeOptions::default()).unwrap();
    let cfg = McmcConfig {
        steps: 200_000,
        burn_in: 20_000,
        thin: 200,
        seed: 3,
        ..McmcConfig::default()
    };
    let r = mcmc_gibbs(&GibbsSpec::new(n, m, 50.0).unwrap(), &cfg, Some(s.field.clone())).unwrap();
    let mut checked = 0;
    for (f, &h) in r.samples.iter().zip(&r.energies) {
        if h <= s.energy + 1.0 {
            assert!(grad_bound_check(f, m, 1.0, s.energy, c));
            checked += 1;
        }
    }
    assert!(checked >= 100, "only {checked} samples in the window");
}

#[test]
fn zero_temperature_flow_keeps_the_soliton() {
    let s = minimize_energy(32, 25.0, &MinimizeOptions::default()).unwrap();
    let mut params = SdeParams::new(32, 25.0, 1.0, f64::INFINITY);
    params.record_every = 2000;
    let obs = Observables {
        distance: true,
        monotonicity: true,
    };
    let tr = integrate(&s.field, &params, 2.0, obs, rng::stream(1, 1)).unwrap();
    let first = tr.records[0].distance.unwrap();
    let last = tr.records.last().unwrap().distance.unwrap();
    // the splitting's own fixed point sits O(dt²) away from the exact minimizer
    let dt2 = tr.dt * tr.dt;
    assert!((first - last).abs() < 1e4 * dt2, "{first} -> {last}");
    assert!((tr.records.last().unwrap().energy - s.energy).abs() < 10.0 * dt2);
}

#[test]
fn soliton_point_has_full_rank() {
    for n in [3usize, 6] {
        let s = minimize_energy(n, 25.0, &MinimizeOptions::default()).unwrap();
        for mode in [RankMode::ExplicitFamily, RankMode::NestedBrackets] {
            assert_eq!(lie_rank(s.field.values(), mode).unwrap(), 2 * n - 1);
        }
    }
}

#[test]
fn fields_survive_a_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let s = minimize_energy(12, 7.0, &MinimizeOptions::default()).unwrap().field;
    let bin = dir.path().join("f.bin");
    let js = dir.path().join("f.json");
    std::fs::write(&bin, s.to_bytes()).unwrap();
    std::fs::write(&js, s.to_json()).unwrap();
    assert_eq!(LatticeField::load(&bin).unwrap(), s);
    let back = LatticeField::load(&js).unwrap();
    assert_eq!(back, s);
    assert!((mass(&back) - 7.0).abs() < 1e-12);
}
