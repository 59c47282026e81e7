use carpetlab::carpet::{build_carpet, CarpetSpec};
use carpetlab::modulus::{
    check_admissibility, compute_group_modulus, compute_modulus, distinguished_pair_table, extremal_structure,
    solve_rows, synthesize_square_sides, GroupMode, Status,
};
use carpetlab::pathgrid::{MassDistribution, PathFamilySpec};
use carpetlab::SolverOptions;
use proptest::prelude::*;

fn pair_family(carpet: &carpetlab::carpet::Carpet) -> PathFamilySpec {
    PathFamilySpec::ConnectCircles { a: carpet.middle().unwrap(), b: carpet.outer().unwrap() }
}

fn l2(a: &MassDistribution<f64>, b: &MassDistribution<f64>) -> f64 {
    let w: f64 = a.weights.iter().zip(&b.weights).map(|(x, y)| (x - y).powi(2)).sum();
    let n = a.density.len().max(b.density.len());
    let d: f64 = (0..n).map(|c| (a.density_at(c) - b.density_at(c)).powi(2)).sum();
    (w + d).sqrt()
}

#[test]
fn converged_result_honours_its_contract() {
    let carpet = build_carpet(CarpetSpec::unit_square(3, 2)).unwrap();
    let opts = SolverOptions { keep_constraints: true, ..SolverOptions::default() };
    let (grid, r) = compute_modulus(Some(&carpet), pair_family(&carpet), 3, &opts).unwrap();
    assert_eq!(r.status, Status::Converged);
    assert!(r.kkt <= opts.tol_qp);
    assert!(r.min_length >= 1.0 - opts.tol_feas);
    let adm = check_admissibility(&r.distribution, &grid).unwrap();
    assert!(adm.min_length >= 1.0 - opts.tol_feas);
    assert!((r.recompute_mass(&grid) - r.value).abs() <= 1e-12 * r.value);
    assert!((r.circle_mass + r.continuous_mass - r.value).abs() <= 1e-12 * r.value);
    for row in &r.constraints {
        assert!(r.evaluate_row(row) >= 1.0 - 1e-6);
    }
    let lambda = 1.5;
    let bigger = r.distribution.scaled(lambda).mass(&grid);
    assert!((bigger - lambda * lambda * r.value).abs() <= 1e-12 * bigger);
    assert!(r.bracket.0 <= r.value && r.value <= r.bracket.1);
    // the two end circles are never touched, so they carry no weight
    let w = grid.circle_weights(&r.distribution.weights);
    assert_eq!(w[carpet.middle().unwrap()], 0.0);
    assert_eq!(w[carpet.outer().unwrap()], 0.0);
}

#[test]
fn final_program_has_a_unique_minimiser() {
    let carpet = build_carpet(CarpetSpec::unit_square(3, 2)).unwrap();
    let opts = SolverOptions { keep_constraints: true, symmetrize: false, ..SolverOptions::default() };
    let (grid, r) = compute_modulus(Some(&carpet), pair_family(&carpet), 3, &opts).unwrap();
    let rows = r.constraints.clone();
    let (v1, d1) = solve_rows(&grid, GroupMode::Trivial, true, &rows, 1e-10).unwrap();
    let mut reversed = rows.clone();
    reversed.reverse();
    let (v2, d2) = solve_rows(&grid, GroupMode::Trivial, true, &reversed, 1e-10).unwrap();
    let mut shuffled = rows.clone();
    let n = shuffled.len();
    for i in 0..n {
        shuffled.swap(i, (i * 7919 + 13) % n);
    }
    let (v3, d3) = solve_rows(&grid, GroupMode::Trivial, true, &shuffled, 1e-10).unwrap();
    assert!(l2(&d1, &d2) <= 1e-6, "{}", l2(&d1, &d2));
    assert!(l2(&d1, &d3) <= 1e-6, "{}", l2(&d1, &d3));
    assert!(l2(&d1, &r.distribution) <= 1e-6, "{}", l2(&d1, &r.distribution));
    assert!((v1 - v2).abs() <= 1e-9 * v1 && (v1 - v3).abs() <= 1e-9 * v1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn more_constraints_never_lower_the_minimum(cut_a in 0.0f64..1.0, cut_b in 0.0f64..1.0) {
        let carpet = build_carpet(CarpetSpec::unit_square(3, 2)).unwrap();
        let opts = SolverOptions { keep_constraints: true, ..SolverOptions::default() };
        let (grid, r) = compute_modulus(Some(&carpet), pair_family(&carpet), 2, &opts).unwrap();
        let n = r.constraints.len();
        let (i, j) = ((cut_a * n as f64) as usize, (cut_b * n as f64) as usize);
        let (small, large) = (i.min(j), i.max(j));
        let (v_small, _) = solve_rows(&grid, GroupMode::Trivial, true, &r.constraints[..small], 1e-10).unwrap();
        let (v_large, _) = solve_rows(&grid, GroupMode::Trivial, true, &r.constraints[..large], 1e-10).unwrap();
        prop_assert!(v_small <= v_large * (1.0 + 1e-9) + 1e-12);
    }
}

#[test]
fn trivial_group_is_the_plain_modulus() {
    let carpet = build_carpet(CarpetSpec::unit_square(3, 2)).unwrap();
    let opts = SolverOptions::default();
    let (_, plain) = compute_modulus(Some(&carpet), pair_family(&carpet), 3, &opts).unwrap();
    let (_, group) = compute_group_modulus(&carpet, pair_family(&carpet), 3, &opts).unwrap();
    assert_eq!(plain.value, group.value);
    assert_eq!(plain.distribution, group.distribution);
    assert!(compute_group_modulus(&carpet, pair_family(&carpet), 3, &opts.clone().with_group(GroupMode::Scaling { k: 1 }))
        .is_err());
}

#[test]
fn dihedral_mass_counts_each_orbit_once() {
    let carpet = build_carpet(CarpetSpec::unit_square(3, 2)).unwrap();
    let opts = SolverOptions::default();
    let (grid, plain) = compute_modulus(Some(&carpet), pair_family(&carpet), 3, &opts).unwrap();
    let (_, sym) = compute_modulus(Some(&carpet), pair_family(&carpet), 3, &opts.clone().with_group(GroupMode::Dihedral)).unwrap();
    assert_eq!(sym.status, Status::Converged);
    // the symmetric plain extremal is admissible for the group problem and
    // pays every orbit once instead of once per member
    assert!(sym.value <= plain.bracket.1, "{} vs {}", sym.value, plain.value);
    // conversely the group extremal, charged per circle, costs at least the
    // plain modulus (up to the admissibility slack)
    let per_circle = sym.distribution.mass(&grid);
    let slack = (1.0 - opts.tol_feas).powi(2);
    assert!(per_circle >= plain.value * slack, "{per_circle} vs {}", plain.value);
    let adm = check_admissibility(&sym.distribution, &grid).unwrap();
    assert!(adm.min_length >= 1.0 - opts.tol_feas);
    let s = extremal_structure(&carpet, &grid, &plain, 2, 1e-4).unwrap();
    assert!(s.symmetry_defect <= 1e-6);
    assert_eq!(s.end_weights, (0.0, 0.0));
}

#[test]
fn circle_weights_alone_cannot_block_material_corridors() {
    let carpet = build_carpet(CarpetSpec::unit_square(3, 1)).unwrap();
    let opts = SolverOptions { continuous: false, ..SolverOptions::default() };
    let (_, r) = compute_modulus(Some(&carpet), pair_family(&carpet), 2, &opts).unwrap();
    assert_eq!(r.status, Status::Infeasible);
    assert!(r.value.is_infinite());
}

#[test]
fn zero_distribution_has_zero_length() {
    let carpet = build_carpet(CarpetSpec::unit_square(3, 2)).unwrap();
    let grid = carpetlab::pathgrid::build_grid::<f64>(Some(&carpet), 2, pair_family(&carpet)).unwrap();
    let adm = check_admissibility(&MassDistribution::zero(&grid), &grid).unwrap();
    assert_eq!(adm.min_length, 0.0);
    assert!(adm.witness.feasible);
}

#[test]
fn single_precision_calibration() {
    let opts = carpetlab::modulus::SolverOptions::<f32>::default();
    let (_, r) = compute_modulus::<f32>(None, PathFamilySpec::VerticalSegments { width: 2.0 }, 32, &opts).unwrap();
    assert_eq!(r.status, Status::Converged);
    assert!((r.value - 2.0).abs() <= 0.02 * 2.0, "{}", r.value);
}

#[test]
fn square_sides_follow_the_weights() {
    let carpet = build_carpet(CarpetSpec::unit_square(3, 2)).unwrap();
    let (grid, r) = compute_modulus(Some(&carpet), pair_family(&carpet), 3, &SolverOptions::default()).unwrap();
    let sides = synthesize_square_sides(&grid, &r).unwrap();
    let w = grid.circle_weights(&r.distribution.weights);
    assert!(!sides.sides.contains_key(&carpet.middle().unwrap()));
    assert!(!sides.sides.contains_key(&carpet.outer().unwrap()));
    let log_ratio = 2.0 * std::f64::consts::PI / r.value;
    for (&id, &l) in &sides.sides {
        assert!((l - w[id] * log_ratio).abs() <= 1e-12);
        if w[id] == 0.0 {
            assert_eq!(l, 0.0);
        }
    }
    let tight = SolverOptions { max_iterations: 1, ..SolverOptions::default() };
    let (g1, partial) = compute_modulus(Some(&carpet), pair_family(&carpet), 3, &tight).unwrap();
    assert_eq!(partial.status, Status::IterationLimit);
    assert!(synthesize_square_sides(&g1, &partial).is_err());
}

#[test]
fn small_pair_table() {
    let table = distinguished_pair_table::<f64>(3, 2, 2, &SolverOptions::default()).unwrap();
    assert!(table.all_converged);
    // pairs of generation ≤ 2 up to the eight isometries
    let mut keys: Vec<(String, String)> = table.rows.iter().map(|r| (r.label_a.clone(), r.label_b.clone())).collect();
    keys.dedup();
    assert_eq!(keys.len(), table.rows.len());
    assert_eq!(table.rows.iter().map(|r| r.orbit_size).sum::<usize>(), 10 * 9 / 2);
    assert!(distinguished_pair_table::<f64>(3, 1, 1, &SolverOptions::default()).is_err());
}
