//! Audit of the per-entry path search against the exact pay-once oracle.
//!
//! Random instances are non-adversarial: constant density on material, no
//! blocked cells, and at least two material cells between any two squares.
//! The corridor fixture breaks those rules on purpose.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::pathgrid::{
    brute_force_min_length, shortest_path, CellClass, GridDomain, MassDistribution, ORACLE_MAX_CELLS,
    ORACLE_MAX_CIRCLES,
};
use crate::Result;

/// Relative agreement required between the two lengths.
pub const AGREEMENT_TOL: f64 = 1e-9;
/// Material cells required between two squares of a random instance.
pub const MIN_GAP: usize = 2;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleCase {
    pub index: usize,
    pub nx: usize,
    pub ny: usize,
    pub squares: usize,
    pub search_length: f64,
    pub exact_length: f64,
    pub agree: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixtureReport {
    pub search_length: f64,
    pub search_cost: f64,
    pub exact_length: f64,
    /// `search_length - exact_length`.
    pub gap: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub seed: u64,
    pub count: usize,
    pub agreed: usize,
    pub max_difference: f64,
    pub disagreements: Vec<OracleCase>,
    pub fixture: FixtureReport,
    pub passed: bool,
}

/// A random non-adversarial instance with its distribution.
pub fn random_instance(rng: &mut ChaCha8Rng) -> Result<(GridDomain<f64>, MassDistribution<f64>)> {
    let (nx, ny) = loop {
        let nx = rng.gen_range(5..=14);
        let ny = rng.gen_range(5..=14);
        if nx * ny <= ORACLE_MAX_CELLS {
            break (nx, ny);
        }
    };
    let wanted = rng.gen_range(1..=ORACLE_MAX_CIRCLES);
    let mut squares: Vec<(usize, usize, usize)> = Vec::new();
    for _ in 0..200 {
        if squares.len() == wanted {
            break;
        }
        let s = rng.gen_range(1..=3usize.min(ny - 2));
        let x = rng.gen_range(0..=nx - s);
        let y = rng.gen_range(1..=ny - 1 - s);
        let far = squares.iter().all(|&(a, b, t)| {
            let gx = (x + s + MIN_GAP <= a) || (a + t + MIN_GAP <= x);
            let gy = (y + s + MIN_GAP <= b) || (b + t + MIN_GAP <= y);
            gx || gy
        });
        if far {
            squares.push((x, y, s));
        }
    }
    let mut class = vec![CellClass::Material; nx * ny];
    for (v, &(x, y, s)) in squares.iter().enumerate() {
        for j in y..y + s {
            for i in x..x + s {
                class[j * nx + i] = CellClass::Inside(v);
            }
        }
    }
    let sources = (0..nx).collect();
    let sinks = ((ny - 1) * nx..ny * nx).collect();
    let grid = GridDomain::from_classes(nx, ny, 1.0 / ny as f64, class, squares.len(), sources, sinks)?;
    let weights = (0..squares.len()).map(|_| rng.gen_range(0.0..0.5)).collect();
    let d = rng.gen_range(0.05..1.0);
    let rho = MassDistribution::from_weights(weights).with_density(vec![d; nx * ny]);
    Ok((grid, rho))
}

/// Two routes from the bottom row to the top row. The cheap one touches the
/// single square, leaves its neighbourhood and comes back, so the per-entry
/// search pays the square twice and prefers the dearer route.
pub fn corridor_fixture() -> Result<(GridDomain<f64>, MassDistribution<f64>)> {
    let (nx, ny) = (9, 7);
    let mut class = vec![CellClass::Blocked; nx * ny];
    let near = [(3, 0), (3, 1), (3, 2), (2, 2), (1, 2), (1, 3), (1, 4), (2, 4), (3, 4), (3, 5), (3, 6)];
    let far: Vec<(usize, usize)> = (0..ny).map(|j| (7, j)).collect();
    let mut density = vec![0.0; nx * ny];
    for &(i, j) in &near {
        class[j * nx + i] = CellClass::Material;
        density[j * nx + i] = 1.0;
    }
    for &(i, j) in &far {
        class[j * nx + i] = CellClass::Material;
        density[j * nx + i] = 2.0;
    }
    class[3 * nx + 4] = CellClass::Inside(0);
    let grid = GridDomain::from_classes(nx, ny, 1.0, class, 1, vec![3, 7], vec![6 * nx + 3, 6 * nx + 7])?;
    let rho = MassDistribution::from_weights(vec![2.0]).with_density(density);
    Ok((grid, rho))
}

fn agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= AGREEMENT_TOL * b.abs().max(1.0)
}

/// Runs `count` seeded random instances plus the corridor fixture.
pub fn run_oracle_suite(seed: u64, count: usize) -> Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agreed = 0;
    let mut max_difference: f64 = 0.0;
    let mut disagreements = Vec::new();
    for index in 0..count {
        let (grid, rho) = random_instance(&mut rng)?;
        let search = shortest_path(&grid, &rho)?;
        let exact = brute_force_min_length(&grid, &rho)?;
        let ok = agree(search.length, exact.length);
        max_difference = max_difference.max((search.length - exact.length).abs());
        if ok {
            agreed += 1;
        } else {
            disagreements.push(OracleCase {
                index,
                nx: grid.nx,
                ny: grid.ny,
                squares: grid.num_vars(),
                search_length: search.length,
                exact_length: exact.length,
                agree: false,
            });
        }
    }
    let (grid, rho) = corridor_fixture()?;
    let search = shortest_path(&grid, &rho)?;
    let exact = brute_force_min_length(&grid, &rho)?;
    let fixture = FixtureReport {
        search_length: search.length,
        search_cost: search.search_cost,
        exact_length: exact.length,
        gap: search.length - exact.length,
        flagged: !agree(search.length, exact.length),
    };
    Ok(OracleReport {
        seed,
        count,
        agreed,
        max_difference,
        passed: agreed == count,
        disagreements,
        fixture,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corridor_gap_is_one() {
        // cheap route: 11 cells at density 1 plus the square once = 13;
        // per entry it costs 15, so the search takes the 7-cell route at
        // density 2 = 14
        let (grid, rho) = corridor_fixture().unwrap();
        let exact = brute_force_min_length(&grid, &rho).unwrap();
        let search = shortest_path(&grid, &rho).unwrap();
        assert!((exact.length - 13.0).abs() < 1e-12);
        assert!((search.length - 14.0).abs() < 1e-12);
        let r = run_oracle_suite(1, 0).unwrap();
        assert!(r.fixture.flagged);
        assert!((r.fixture.gap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn instances_respect_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let (g, _) = random_instance(&mut rng).unwrap();
            assert!(g.num_cells() <= ORACLE_MAX_CELLS);
            assert!((1..=ORACLE_MAX_CIRCLES).contains(&g.num_vars()));
        }
    }
}
