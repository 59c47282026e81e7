use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::qp::{DualQp, QpReport, SparseRow};
use crate::carpet::Carpet;
use crate::pathgrid::{
    build_grid, shortest_path, shortest_paths, GridDomain, MassDistribution, PathFamilySpec,
    PathResult,
};
use crate::{Error, Real, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GroupMode {
    Trivial,
    /// Weights constant on orbits of the eight isometries, each orbit counted once.
    Dihedral,
    /// Quotient by `μ^k` on a log-polar strip of `k` periods.
    Scaling { k: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverOptions<T: Real> {
    /// Stop once the minimum ρ-length is at least `1 - tol_feas`.
    pub tol_feas: T,
    /// KKT tolerance of the final quadratic program.
    pub tol_qp: T,
    pub max_iterations: usize,
    pub group: GroupMode,
    /// Iterations over which the relative mass change is measured.
    pub stall_window: usize,
    pub stall_rel: T,
    /// Violated paths added per separation call.
    pub paths_per_oracle: usize,
    /// Continuous densities on material cells (the transboundary part).
    pub continuous: bool,
    /// Add the images of every generated path under the family's symmetries.
    pub symmetrize: bool,
    pub keep_constraints: bool,
    /// Dual active-set steps allowed per QP solve.
    pub max_qp_steps: usize,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        SolverOptions {
            tol_feas: T::lit(1e-3),
            tol_qp: T::lit(1e-8),
            max_iterations: 5000,
            group: GroupMode::Trivial,
            stall_window: 10,
            stall_rel: T::lit(1e-6),
            paths_per_oracle: 8,
            continuous: true,
            symmetrize: true,
            keep_constraints: false,
            max_qp_steps: 1_000_000,
        }
    }
}

impl<T: Real> SolverOptions<T> {
    pub fn with_group(mut self, group: GroupMode) -> Self {
        self.group = group;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |x: T| x.is_finite() && x > T::zero();
        if !pos(self.tol_feas) || self.tol_feas >= T::one() {
            return Err(Error::param("tol_feas must lie in (0, 1)"));
        }
        if !pos(self.tol_qp) || !pos(self.stall_rel) {
            return Err(Error::param("tolerances must be positive"));
        }
        if let GroupMode::Scaling { k: 0 } = self.group {
            return Err(Error::param("period multiplier k must be at least 1"));
        }
        if self.paths_per_oracle == 0 || self.max_iterations == 0 || self.stall_window == 0 {
            return Err(Error::param("iteration limits must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    IterationLimit,
    /// No admissible distribution over the active variables: modulus ∞.
    Infeasible,
}

/// Linear constraint `Σ mult·w + Σ coef·d ≥ 1` generated by one path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintRow<T: Real> {
    /// Solver variable (circle, orbit or slot) with the number of distinct
    /// touched circles it stands for.
    pub circles: Vec<(usize, u32)>,
    /// Material cell with its length coefficient.
    pub cells: Vec<(usize, T)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModulusResult<T: Real> {
    pub family: PathFamilySpec,
    pub group: GroupMode,
    pub resolution: usize,
    pub status: Status,
    /// Mass of the final distribution.
    pub value: T,
    /// Dual lower bound and the mass rescaled by the final minimum length.
    pub bracket: (T, T),
    pub circle_mass: T,
    pub continuous_mass: T,
    /// Final distribution, one weight per grid variable.
    pub distribution: MassDistribution<T>,
    /// Weight of every solver variable (orbits in dihedral mode).
    pub group_weights: Vec<T>,
    /// Solver variable of every grid variable.
    pub var_group: Vec<usize>,
    pub iterations: usize,
    pub min_length: T,
    pub kkt: T,
    pub gap: T,
    pub num_constraints: usize,
    pub constraints: Vec<ConstraintRow<T>>,
    pub witness: Option<PathResult<T>>,
}

impl<T: Real> ModulusResult<T> {
    fn infinite(grid: &GridDomain<T>, opts: &SolverOptions<T>, iterations: usize) -> Self {
        ModulusResult {
            family: grid.family,
            group: opts.group,
            resolution: grid.resolution,
            status: Status::Infeasible,
            value: T::infinity(),
            bracket: (T::infinity(), T::infinity()),
            circle_mass: T::infinity(),
            continuous_mass: T::zero(),
            distribution: MassDistribution::zero(grid),
            group_weights: Vec::new(),
            var_group: Vec::new(),
            iterations,
            min_length: T::zero(),
            kkt: T::zero(),
            gap: T::zero(),
            num_constraints: 0,
            constraints: Vec::new(),
            witness: None,
        }
    }

    pub fn is_converged(&self) -> bool {
        self.status == Status::Converged
    }

    /// Mass recomputed from the stored distribution, orbits counted once.
    pub fn recompute_mass(&self, grid: &GridDomain<T>) -> T {
        let circles: T = self.group_weights.iter().map(|&w| w * w).sum();
        circles + self.distribution.continuous_mass(grid)
    }

    /// Share of the continuous part in the total mass.
    pub fn continuous_share(&self) -> T {
        if self.value > T::zero() {
            self.continuous_mass / self.value
        } else {
            T::zero()
        }
    }

    /// Value of a constraint row under the final distribution.
    pub fn evaluate_row(&self, row: &ConstraintRow<T>) -> T {
        let c = row.circles.iter().fold(T::zero(), |acc, &(v, m)| {
            acc + self.group_weights[v] * T::from_usize_lossy(m as usize)
        });
        row.cells.iter().fold(c, |acc, &(cell, k)| acc + k * self.distribution.density_at(cell))
    }
}

/// A constraint row in grid terms, before grouping.
#[derive(Clone, Debug)]
struct GridRow {
    vars: Vec<(usize, u32)>,
    cells: Vec<(usize, f64)>,
}

impl GridRow {
    fn from_path<T: Real>(path: &PathResult<T>) -> Self {
        GridRow {
            vars: path.var_multiplicities(),
            cells: path.cell_coefficients.iter().map(|&(c, k)| (c, k.as_f64())).collect(),
        }
    }
}

/// Variables, grouping and the growing constraint set of one computation.
struct Problem<'g, T: Real> {
    grid: &'g GridDomain<T>,
    var_group: Vec<usize>,
    num_groups: usize,
    cell_slot: Vec<Option<u32>>,
    material: Vec<usize>,
    qp: DualQp,
    seen: HashSet<Vec<(u32, i64)>>,
    symmetrize: bool,
    infeasible: bool,
}

impl<'g, T: Real> Problem<'g, T> {
    fn new(grid: &'g GridDomain<T>, group: GroupMode, continuous: bool, symmetrize: bool) -> Result<Self> {
        let var_group = group_map(grid, group)?;
        let num_groups = var_group.iter().map(|g| g + 1).max().unwrap_or(0);
        let material: Vec<usize> =
            if continuous { grid.material_cells().collect() } else { Vec::new() };
        let mut cell_slot = vec![None; grid.num_cells()];
        for (k, &c) in material.iter().enumerate() {
            cell_slot[c] = Some((num_groups + k) as u32);
        }
        let area = grid.cell_area.as_f64();
        let costs: Vec<f64> =
            std::iter::repeat(1.0).take(num_groups).chain(material.iter().map(|_| area)).collect();
        Ok(Problem {
            grid,
            var_group,
            num_groups,
            cell_slot,
            material,
            qp: DualQp::new(&costs),
            seen: HashSet::new(),
            symmetrize,
            infeasible: false,
        })
    }

    fn sparse(&self, row: &GridRow) -> SparseRow {
        let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
        for &(v, m) in &row.vars {
            *acc.entry(self.var_group[v] as u32).or_default() += f64::from(m);
        }
        for &(c, k) in &row.cells {
            if let Some(slot) = self.cell_slot[c] {
                *acc.entry(slot).or_default() += k;
            }
        }
        SparseRow { idx: acc.keys().copied().collect(), val: acc.values().copied().collect() }
    }

    /// Adds the row of `path` and its symmetric images. Returns how many were new.
    fn add(&mut self, path: &PathResult<T>) -> usize {
        let base = GridRow::from_path(path);
        let mut images = vec![base.clone()];
        if self.symmetrize {
            for s in &self.grid.symmetries {
                images.push(GridRow {
                    vars: base.vars.iter().map(|&(v, m)| (s.var[v], m)).collect(),
                    cells: base.cells.iter().map(|&(c, k)| (s.node[c], k)).collect(),
                });
            }
        }
        let mut added = 0;
        for img in images {
            let row = self.sparse(&img);
            if row.idx.is_empty() {
                self.infeasible = true;
                continue;
            }
            let key: Vec<(u32, i64)> =
                row.idx.iter().zip(&row.val).map(|(&j, &v)| (j, (v * 1e12).round() as i64)).collect();
            if self.seen.insert(key) {
                self.qp.push(row);
                added += 1;
            }
        }
        added
    }

    fn group_weights(&self) -> Vec<f64> {
        self.qp.x[..self.num_groups].iter().map(|v| v.max(0.0)).collect()
    }

    fn distribution(&self) -> MassDistribution<T> {
        // roundoff can leave entries a few ulps below zero
        let x: Vec<f64> = self.qp.x.iter().map(|v| v.max(0.0)).collect();
        let weights = self.var_group.iter().map(|&g| T::lit(x[g])).collect();
        let mut density = vec![T::zero(); self.grid.num_cells()];
        for (k, &c) in self.material.iter().enumerate() {
            density[c] = T::lit(x[self.num_groups + k]);
        }
        MassDistribution { weights, density }
    }

    fn constraint_rows(&self) -> Vec<ConstraintRow<T>> {
        self.qp
            .rows()
            .iter()
            .map(|r| {
                let mut row = ConstraintRow { circles: Vec::new(), cells: Vec::new() };
                for (&j, &v) in r.idx.iter().zip(&r.val) {
                    let j = j as usize;
                    if j < self.num_groups {
                        row.circles.push((j, v.round() as u32));
                    } else {
                        row.cells.push((self.material[j - self.num_groups], T::lit(v)));
                    }
                }
                row
            })
            .collect()
    }
}

/// Solver variable of every grid variable for the requested group mode.
fn group_map<T: Real>(grid: &GridDomain<T>, group: GroupMode) -> Result<Vec<usize>> {
    let strip = match grid.family {
        PathFamilySpec::AxisToAxis { periods, periodic, .. } => Some((periods, periodic)),
        _ => None,
    };
    match (group, strip) {
        (GroupMode::Scaling { k }, Some((periods, true))) if k == periods => {
            Ok((0..grid.num_vars()).collect())
        }
        (GroupMode::Scaling { k }, Some((periods, true))) => Err(Error::param(format!(
            "scaling group k = {k} on a strip of {periods} periods"
        ))),
        (GroupMode::Scaling { .. }, _) => {
            Err(Error::param("the scaling group needs a periodic quotient strip"))
        }
        (_, Some((_, true))) => Err(Error::param("quotient strips need the scaling group")),
        (GroupMode::Trivial, _) => Ok((0..grid.num_vars()).collect()),
        (GroupMode::Dihedral, _) => {
            if grid.symmetries.len() != 8 {
                return Err(Error::param("dihedral mode needs a family invariant under all 8 isometries"));
            }
            let n = grid.num_vars();
            let mut group = vec![usize::MAX; n];
            let mut next = 0;
            for v in 0..n {
                if group[v] != usize::MAX {
                    continue;
                }
                for s in &grid.symmetries {
                    group[s.var[v]] = next;
                }
                next += 1;
            }
            Ok(group)
        }
    }
}

/// Builds the grid for `family` and computes its modulus.
pub fn compute_modulus<T: Real>(
    carpet: Option<&Carpet>,
    family: PathFamilySpec,
    resolution: usize,
    opts: &SolverOptions<T>,
) -> Result<(GridDomain<T>, ModulusResult<T>)> {
    let grid = build_grid(carpet, resolution, family)?;
    let result = solve_on_grid(&grid, opts)?;
    Ok((grid, result))
}

/// Modulus with weights constant on the orbits of `opts.group`. Under
/// `Scaling { k }` the carpet must be a weak tangent and the family a periodic
/// strip of `k` periods; the trivial group gives the plain modulus.
pub fn compute_group_modulus<T: Real>(
    carpet: &Carpet,
    family: PathFamilySpec,
    resolution: usize,
    opts: &SolverOptions<T>,
) -> Result<(GridDomain<T>, ModulusResult<T>)> {
    if matches!(opts.group, GroupMode::Scaling { .. }) && !carpet.is_weak_tangent() {
        return Err(Error::domain("group modulus under scaling needs a weak-tangent carpet"));
    }
    compute_modulus(Some(carpet), family, resolution, opts)
}

/// Constraint generation: alternate the quadratic program over the current
/// rows with the shortest-path separation oracle.
pub fn solve_on_grid<T: Real>(grid: &GridDomain<T>, opts: &SolverOptions<T>) -> Result<ModulusResult<T>> {
    opts.validate()?;
    let mut prob = Problem::new(grid, opts.group, opts.continuous, opts.symmetrize)?;
    let tol_feas = opts.tol_feas.as_f64();
    let tol_qp = opts.tol_qp.as_f64();

    // uniform start: every variable and every material cell equal
    let d0 = if opts.continuous { T::one() } else { T::zero() };
    let start = MassDistribution::uniform(grid, T::one(), d0);
    let first = shortest_paths(grid, &start, opts.paths_per_oracle, T::infinity())?;
    if !first[0].feasible {
        // no path joins the two ends: the family is empty
        let mut r = ModulusResult::infinite(grid, opts, 0);
        r.status = Status::Converged;
        r.value = T::zero();
        r.bracket = (T::zero(), T::zero());
        r.circle_mass = T::zero();
        r.min_length = T::infinity();
        r.group_weights = vec![T::zero(); prob.num_groups];
        r.var_group = prob.var_group.clone();
        return Ok(r);
    }
    for p in &first {
        prob.add(p);
    }
    if prob.infeasible {
        return Ok(ModulusResult::infinite(grid, opts, 0));
    }

    let mut masses: Vec<f64> = Vec::new();
    let mut status = Status::IterationLimit;
    let mut report = QpReport::default();
    let mut witness = None;
    let mut min_length = 0.0;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        report = prob.qp.solve(tol_qp, opts.max_qp_steps);
        let rho = prob.distribution();
        // rows violated by less than tol_qp count as satisfied
        let below = T::one() - opts.tol_qp;
        let paths = shortest_paths(grid, &rho, opts.paths_per_oracle, below)?;
        let best = &paths[0];
        min_length = best.length.as_f64();
        let mass = prob.qp.mass();
        masses.push(mass);
        let stalled = masses.len() > opts.stall_window && {
            let old = masses[masses.len() - 1 - opts.stall_window];
            (mass - old).abs() <= opts.stall_rel.as_f64() * mass
        };
        let feasible = min_length >= 1.0 - tol_feas;
        let mut added = 0;
        if !(feasible && stalled) {
            for p in paths.iter().filter(|p| p.length < below) {
                added += prob.add(p);
            }
            if prob.infeasible {
                return Ok(ModulusResult::infinite(grid, opts, iterations));
            }
        }
        if added == 0 {
            // stalled, or every violated path is already a row
            witness = Some(best.clone());
            if feasible && report.kkt <= tol_qp {
                status = Status::Converged;
            }
            break;
        }
    }

    let mass = prob.qp.mass();
    let distribution = prob.distribution();
    let group_weights: Vec<T> = prob.group_weights().into_iter().map(T::lit).collect();
    let circle_mass: f64 = prob.group_weights().iter().map(|w| w * w).sum();
    let hi = if min_length > 0.0 { mass / (min_length * min_length) } else { f64::INFINITY };
    if witness.is_none() {
        witness = Some(shortest_path(grid, &distribution)?);
    }
    Ok(ModulusResult {
        family: grid.family,
        group: opts.group,
        resolution: grid.resolution,
        status,
        value: T::lit(mass),
        bracket: (T::lit(prob.qp.dual_value().min(mass)), T::lit(hi.max(mass.min(hi)))),
        circle_mass: T::lit(circle_mass),
        continuous_mass: T::lit(mass - circle_mass),
        distribution,
        group_weights,
        var_group: prob.var_group.clone(),
        iterations,
        min_length: T::lit(min_length),
        kkt: T::lit(report.kkt),
        gap: T::lit(prob.qp.gap()),
        num_constraints: prob.qp.num_rows(),
        constraints: if opts.keep_constraints { prob.constraint_rows() } else { Vec::new() },
        witness,
    })
}

/// Solves the quadratic program for a fixed set of rows from a cold start.
pub fn solve_rows<T: Real>(
    grid: &GridDomain<T>,
    group: GroupMode,
    continuous: bool,
    rows: &[ConstraintRow<T>],
    tol: T,
) -> Result<(T, MassDistribution<T>)> {
    let mut prob = Problem::new(grid, group, continuous, false)?;
    for r in rows {
        let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
        for &(v, m) in &r.circles {
            if v >= prob.num_groups {
                return Err(Error::param("row refers to an unknown variable"));
            }
            *acc.entry(v as u32).or_default() += f64::from(m);
        }
        for &(c, k) in &r.cells {
            if let Some(slot) = prob.cell_slot.get(c).copied().flatten() {
                *acc.entry(slot).or_default() += k.as_f64();
            }
        }
        prob.qp.push(SparseRow { idx: acc.keys().copied().collect(), val: acc.values().copied().collect() });
    }
    prob.qp.solve(tol.as_f64(), 10_000_000);
    Ok((T::lit(prob.qp.mass()), prob.distribution()))
}

/// Minimum ρ-length over the family and the path attaining it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Admissibility<T: Real> {
    pub min_length: T,
    pub witness: PathResult<T>,
}

/// One call of the separation oracle.
pub fn check_admissibility<T: Real>(
    rho: &MassDistribution<T>,
    grid: &GridDomain<T>,
) -> Result<Admissibility<T>> {
    let witness = shortest_path(grid, rho)?;
    Ok(Admissibility { min_length: witness.length, witness })
}
