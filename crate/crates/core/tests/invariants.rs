use kglab::functionals::{
    energy, energy_norm_sq, g0, g2, gradient_sq, h1_norm_sq, k0, l2_norm_sq, momentum,
    static_action, BumpSampler, NonlinearityParams, PhasePoint,
};
use kglab::profiles::translate;
use kglab::propagator::free_evolve;
use kglab::spectral::{
    l2_norm_spectral, lebesgue_norm, lp_decompose, partition_bump, read_snapshot, write_snapshot,
    LpBlock, ScalarField, SpectralGrid,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn params() -> impl Strategy<Value = NonlinearityParams> {
    (0.0..3.0f64, 0.5..2.0f64, 0.5..2.0f64)
        .prop_map(|(b, m1, m2)| NonlinearityParams::new(b, m1, m2).unwrap())
}

fn phase(grid: &SpectralGrid, seed: u64) -> PhasePoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = BumpSampler::default();
    let u = s.sample(&mut rng, grid).render(grid);
    let [v1, v2] = s
        .sample(&mut rng, grid)
        .render(grid)
        .components()
        .map(|c| c.clone());
    PhasePoint::new(u, v1, v2).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partition_sums_to_one(s in 0.0..500.0f64) {
        let top = 12;
        let total: f64 = (0..=top).map(|j| LpBlock(j).symbol(s)).sum();
        prop_assert!((total - 1.0).abs() < 1e-12, "{total}");
        prop_assert!((0.0..=1.0).contains(&partition_bump(s)));
    }

    #[test]
    fn blocks_reassemble_the_field(seed in any::<u64>()) {
        let g = SpectralGrid::new(1, 256, 10.0).unwrap();
        let f = phase(&g, seed).pair().u1().clone();
        let mut sum = ScalarField::zeros(&g);
        for (_, b) in lp_decompose(&f) {
            sum = sum.add_scaled(&b, 1.0);
        }
        prop_assert!(sum.max_abs_diff(&f) <= 1e-12 * f.max_abs().max(1.0));
    }

    #[test]
    fn parseval(seed in any::<u64>(), dim in 1usize..=2) {
        let g = SpectralGrid::new(dim, 64, 8.0).unwrap();
        let f = phase(&g, seed).pair().u1().clone();
        prop_assert!(rel(l2_norm_spectral(&f), lebesgue_norm(&f, 2.0)) < 1e-12);
    }

    #[test]
    fn scaling_identities(seed in any::<u64>(), p in params()) {
        let g = SpectralGrid::radial(256, 14.0).unwrap();
        let pair = phase(&g, seed).pair().clone();
        let h1 = h1_norm_sq(&pair);
        prop_assert!(rel(g0(&pair, &p), 0.25 * h1) < 1e-10);
        prop_assert!(rel(static_action(&pair, &p) - 0.25 * k0(&pair, &p), 0.25 * h1) < 1e-10);
        let display = gradient_sq(&pair) / 6.0 + 0.5 * l2_norm_sq(&pair);
        prop_assert!(rel(g2(&pair, &p), display) < 1e-10);
    }

    #[test]
    fn free_flow_is_an_isometric_group(seed in any::<u64>(), t in -5.0..5.0f64, s in -5.0..5.0f64) {
        let g = SpectralGrid::new(1, 128, 12.0).unwrap();
        let u = phase(&g, seed);
        let n0 = energy_norm_sq(&u);
        let a = free_evolve(&free_evolve(&u, t), s);
        let b = free_evolve(&u, t + s);
        prop_assert!(rel(energy_norm_sq(&a), n0) < 1e-12);
        let diff = energy_norm_sq(&a.add_scaled(&b, -1.0)).sqrt();
        prop_assert!(diff <= 1e-11 * n0.sqrt());
        let back = free_evolve(&b, -(t + s));
        prop_assert!(energy_norm_sq(&back.add_scaled(&u, -1.0)).sqrt() <= 1e-11 * n0.sqrt());
    }

    #[test]
    fn translation_preserves_energy_and_momentum(seed in any::<u64>(), a in -3.0..3.0f64, p in params()) {
        let g = SpectralGrid::new(1, 256, 16.0).unwrap();
        let u = phase(&g, seed);
        let v = translate(&u, [a, 0.0, 0.0]);
        prop_assert!(rel(energy(&v, &p), energy(&u, &p)) < 1e-10);
        prop_assert!((momentum(&v)[0] - momentum(&u)[0]).abs() < 1e-10 * energy_norm_sq(&u));
    }

    #[test]
    fn snapshot_roundtrip_is_exact(seed in any::<u64>(), radial in any::<bool>()) {
        let g = if radial {
            SpectralGrid::radial(64, 10.0).unwrap()
        } else {
            SpectralGrid::new(2, 16, 5.0).unwrap()
        };
        let u = phase(&g, seed);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.bin");
        let f = u.fields();
        write_snapshot(&path, &[f[0], f[1], f[2], f[3]]).unwrap();
        let back = read_snapshot(&path).unwrap();
        prop_assert_eq!(back.grid.geometry(), g.geometry());
        for (a, b) in back.fields.iter().zip(f) {
            prop_assert_eq!(a.values(), b.values());
        }
    }
}
