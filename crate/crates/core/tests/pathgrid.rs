use carpetlab::carpet::{build_carpet, CarpetSpec, TangentAngle};
use carpetlab::labcli::oracle::random_instance;
use carpetlab::pathgrid::{
    brute_force_min_length, build_grid, evaluate_path, path_touches, shortest_path, CellClass, GridDomain,
    MassDistribution, PathFamilySpec, StripKind,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_rho(grid: &GridDomain<f64>, rng: &mut ChaCha8Rng) -> MassDistribution<f64> {
    let weights = (0..grid.num_vars()).map(|_| rng.gen_range(0.0..0.3)).collect();
    let density = (0..grid.num_cells()).map(|_| rng.gen_range(0.0..1.0)).collect();
    MassDistribution::from_weights(weights).with_density(density)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reported_length_is_the_pay_once_cost_of_the_path(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (grid, rho) = random_instance(&mut rng).unwrap();
        let path = shortest_path(&grid, &rho).unwrap();
        prop_assert!(path.feasible);
        for w in path.nodes.windows(2) {
            prop_assert!(grid.neighbours(w[0]).iter().any(|&(n, _, _)| n == w[1]));
        }
        let again = evaluate_path(&grid, &rho, &path.nodes).unwrap();
        prop_assert!((again.length - path.length).abs() <= 1e-12 * path.length.max(1.0));
        let circles: f64 = path_touches(&grid, &path).iter().map(|&c| rho.weight(grid.circle_var[c].unwrap())).sum();
        prop_assert!((circles - path.circles).abs() <= 1e-12);
        prop_assert!(path.length <= path.search_cost + 1e-12);
    }

    #[test]
    fn search_agrees_with_the_exact_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (grid, rho) = random_instance(&mut rng).unwrap();
        let search = shortest_path(&grid, &rho).unwrap();
        let exact = brute_force_min_length(&grid, &rho).unwrap();
        prop_assert!((search.length - exact.length).abs() <= 1e-9 * exact.length.max(1.0));
    }

    #[test]
    fn raising_a_weight_never_lowers_the_cost(seed in any::<u64>(), bump in 0.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (grid, rho) = random_instance(&mut rng).unwrap();
        let v = rng.gen_range(0..grid.num_vars());
        let mut heavier = rho.clone();
        heavier.weights[v] += bump;
        let before = shortest_path(&grid, &rho).unwrap();
        let after = shortest_path(&grid, &heavier).unwrap();
        prop_assert!(after.search_cost >= before.search_cost - 1e-12);
    }
}

#[test]
fn zero_weights_reduce_to_the_continuous_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let (grid, rho) = random_instance(&mut rng).unwrap();
        let zero = MassDistribution::from_weights(vec![0.0; grid.num_vars()]).with_density(rho.density.clone());
        // the same grid with every square turned into free material of zero density
        let mut density = rho.density.clone();
        let class: Vec<CellClass> = grid
            .class
            .iter()
            .enumerate()
            .map(|(c, k)| match k {
                CellClass::Inside(_) => {
                    density[c] = 0.0;
                    CellClass::Material
                }
                k => *k,
            })
            .collect();
        let open = GridDomain::from_classes(grid.nx, grid.ny, grid.hx, class, 0, grid.sources.clone(), grid.sinks.clone())
            .unwrap();
        let a = shortest_path(&grid, &zero).unwrap();
        let b = shortest_path(&open, &MassDistribution::from_weights(vec![]).with_density(density)).unwrap();
        assert!((a.length - b.length).abs() < 1e-12, "{} vs {}", a.length, b.length);
    }
}

#[test]
fn dihedral_images_have_the_same_minimum() {
    let carpet = build_carpet(CarpetSpec::unit_square(3, 2)).unwrap();
    let m = carpet.middle().unwrap();
    let o = carpet.outer().unwrap();
    let grid: GridDomain<f64> = build_grid(Some(&carpet), 3, PathFamilySpec::ConnectCircles { a: m, b: o }).unwrap();
    assert_eq!(grid.symmetries.len(), 8);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let rho = random_rho(&grid, &mut rng);
        let base = shortest_path(&grid, &rho).unwrap().length;
        for s in &grid.symmetries {
            let mut image = rho.clone();
            for c in 0..grid.num_cells() {
                image.density[s.node[c]] = rho.density[c];
            }
            for v in 0..grid.num_vars() {
                image.weights[s.var[v]] = rho.weights[v];
            }
            let moved = shortest_path(&grid, &image).unwrap().length;
            assert!((moved - base).abs() <= 1e-12 * base.max(1.0), "{}: {moved} vs {base}", s.name);
        }
    }
}

#[test]
fn periodic_strip_matches_the_unrolled_window() {
    let carpet = build_carpet(CarpetSpec::weak_tangent(3, 2, TangentAngle::Quarter, 3)).unwrap();
    let rows = 12;
    let strip = |periodic| PathFamilySpec::AxisToAxis { strip: StripKind::Quarter, periods: 1, periodic };
    let wrapped: GridDomain<f64> = build_grid(Some(&carpet), rows, strip(true)).unwrap();
    let unrolled: GridDomain<f64> = build_grid(Some(&carpet), rows, strip(false)).unwrap();
    assert_eq!(wrapped.num_vars(), unrolled.num_vars());
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10 {
        let rho = random_rho(&wrapped, &mut rng);
        // the outermost sheet on either side sees squares cut by the window;
        // make it too dear to use
        let sheet = wrapped.num_cells();
        let last = unrolled.num_cells() - sheet;
        let density = (0..unrolled.num_cells())
            .map(|c| if c < sheet || c >= last { 50.0 } else { rho.density[c % sheet] })
            .collect();
        let replicated = MassDistribution::from_weights(rho.weights.clone()).with_density(density);
        let a = shortest_path(&wrapped, &rho).unwrap().length;
        let b = shortest_path(&unrolled, &replicated).unwrap().length;
        assert!((a - b).abs() <= 1e-12 * a.max(1.0), "{a} vs {b}");
    }
}
