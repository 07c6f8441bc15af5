use npfisher::models::{
    heat_capacity, ising_exact_small, ising_sample_energies, normal_fi, normal_kl, normal_sample,
    IsingConfig, IsingState, NormalParams,
};
use npfisher::samples::SampleSet;
use npfisher::seed::derive_seed;
use proptest::prelude::*;

#[test]
fn normal_samples_match_their_moments() {
    let s = normal_sample(NormalParams::new(1.5, 0.3).unwrap(), 50_000, 8).unwrap();
    assert!((s.mean() - 1.5).abs() < 0.01);
    assert!((s.variance().sqrt() - 0.3).abs() < 0.01);
}

#[test]
fn kl_matches_local_fisher_form() {
    // KL(p_theta || p_theta+d) ~ g d^2 / 2 for small d.
    let p = NormalParams::new(0.0, 1.0).unwrap();
    let d = 1e-3;
    let q = NormalParams::new(0.0, 1.0 + d).unwrap();
    let g = normal_fi(p).unwrap()[1][1];
    let kl = normal_kl(p, q).unwrap();
    assert!((kl / (0.5 * g * d * d) - 1.0).abs() < 1e-2);
}

#[test]
fn high_temperature_heat_capacity_vanishes() {
    // C_h ~ 2 / T^2 per site at high T for the square lattice.
    let t = 50.0;
    let cfg = IsingConfig { l: 8, temperature: t, n_samples: 20_000, warmup_sweeps: 100, thin_sweeps: 2, seed: 5, ..Default::default() };
    let e = ising_sample_energies(&cfg).unwrap();
    let totals = SampleSet::new(e.values().iter().map(|v| v * 64.0).collect()).unwrap();
    let c = heat_capacity(&totals, t, 8).unwrap();
    assert!((c * t * t / 2.0 - 1.0).abs() < 0.1, "C_h T^2 = {}", c * t * t);
}

#[test]
fn exact_three_by_three_is_consistent() {
    let e = ising_exact_small(3, 2.5).unwrap();
    let var = e.mean_energy_sq - e.mean_energy * e.mean_energy;
    assert!((e.heat_capacity - var / (9.0 * 6.25)).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn energy_cache_tracks_random_walks(l in 2usize..10, t in 0.5f64..6.0, seed in any::<u64>(), sweeps in 1usize..20) {
        let mut s = IsingState::ordered(l, 0.0, seed);
        for _ in 0..sweeps {
            s.sweep(t);
        }
        prop_assert!((s.energy() - s.recompute_energy()).abs() < 1e-9);
        let per_site = s.energy() / (l * l) as f64;
        prop_assert!((-2.0..=2.0).contains(&per_site));
    }

    #[test]
    fn flip_delta_is_odd(l in 3usize..8, seed in any::<u64>(), site in 0usize..9) {
        let mut s = IsingState::ordered(l, 0.0, seed);
        for _ in 0..3 { s.sweep(2.5); }
        let site = site % (l * l);
        let d = s.flip_delta(site);
        let mut spins = s.spins().to_vec();
        spins[site] = -spins[site];
        let flipped = IsingState::from_spins(l, spins, 0.0, seed);
        prop_assert!((flipped.flip_delta(site) + d).abs() < 1e-12);
        prop_assert!((flipped.energy() - s.energy() - d).abs() < 1e-9);
    }

    #[test]
    fn derived_seeds_differ_from_siblings(master in any::<u64>(), a in 0u64..1000, b in 0u64..1000) {
        prop_assume!(a != b);
        prop_assert_ne!(derive_seed(master, &[a]), derive_seed(master, &[b]));
    }
}
