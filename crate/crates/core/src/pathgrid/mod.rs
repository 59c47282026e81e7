//! Cell grids, path families and minimum ρ-length search.
//!
//! A grid cell is `Material` (carries a continuous density), `Inside` a
//! removed square (free to cross, pays the square's weight once) or
//! `Blocked`. A path touches a circle when one of its cells meets the closed
//! square, which on an aligned grid means the circle owns a cell in the 3×3
//! neighbourhood.
//!
//! Weights are stored per *variable*. On the unit square a variable is a
//! circle id; on a log-polar quotient strip it is a scaling orbit slot, and a
//! touched circle is identified by its slot together with the number of times
//! the path has wound around the strip (its lift).

mod build;
mod search;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

pub use build::{build_grid, StripLayout};
pub use search::{
    brute_force_min_length, evaluate_path, path_touches, shortest_path, shortest_paths,
    ORACLE_MAX_CELLS, ORACLE_MAX_CIRCLES,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StripKind {
    Quarter,
    ThreeQuarter,
}

impl StripKind {
    pub fn quarter_turns(self) -> usize {
        match self {
            StripKind::Quarter => 1,
            StripKind::ThreeQuarter => 3,
        }
    }
}

/// Declarative description of a path family Γ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "variant")]
pub enum PathFamilySpec {
    /// Paths joining two circles in the complement of their closed squares.
    ConnectCircles { a: usize, b: usize },
    /// Paths joining the two boundary rays of a weak tangent, on the log-polar
    /// quotient by `μ^periods` (or on the unrolled window when not periodic).
    AxisToAxis { strip: StripKind, periods: u32, periodic: bool },
    /// Vertical segments of the rectangle `[0, width] × [0, 1]`.
    VerticalSegments { width: f64 },
    /// Radial segments of the annulus `1 < |z| < ratio`.
    RadialSegments { ratio: f64 },
}

impl PathFamilySpec {
    pub fn quotient(strip: StripKind, periods: u32) -> Self {
        PathFamilySpec::AxisToAxis { strip, periods, periodic: true }
    }

    pub fn name(&self) -> String {
        match self {
            PathFamilySpec::ConnectCircles { a, b } => format!("connect({a},{b})"),
            PathFamilySpec::AxisToAxis { strip, periods, periodic } => {
                let s = match strip {
                    StripKind::Quarter => "quarter",
                    StripKind::ThreeQuarter => "three_quarter",
                };
                let wrap = if *periodic { "" } else { ",unrolled" };
                format!("axis_to_axis({s},k={periods}{wrap})")
            }
            PathFamilySpec::VerticalSegments { width } => format!("vertical_segments(a={width})"),
            PathFamilySpec::RadialSegments { ratio } => format!("radial_segments(R={ratio})"),
        }
    }

    /// Families of fixed segments rather than free grid paths.
    pub fn is_segment_family(&self) -> bool {
        matches!(
            self,
            PathFamilySpec::VerticalSegments { .. } | PathFamilySpec::RadialSegments { .. }
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellClass {
    Material,
    /// Inside the open square of the given circle id.
    Inside(usize),
    Blocked,
}

/// A touched circle: weight variable plus lift relative to the cell's own
/// sheet of the strip (always 0 off periodic strips).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TouchKey {
    pub var: u32,
    pub lift: i32,
}

/// A weight variable of the grid.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Variable {
    /// Circle id standing for the variable (the slot representative on strips).
    pub circle: usize,
    pub label: String,
}

/// Isometry of a grid onto itself that preserves its path family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GridSymmetry {
    pub name: String,
    /// Image of every node (cells, then the exterior node if present).
    pub node: Vec<usize>,
    /// Image of every variable.
    pub var: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PathMode {
    /// Any 4-neighbour path from a source to a sink.
    Free,
    /// Only the straight columns bottom to top.
    Columns,
}

/// A discretised region with its path family. Immutable after construction.
#[derive(Clone, Debug, Serialize)]
pub struct GridDomain<T: Real> {
    pub family: PathFamilySpec,
    pub resolution: usize,
    pub nx: usize,
    pub ny: usize,
    /// Centre-to-centre distance along x and along y.
    pub hx: T,
    pub hy: T,
    pub cell_area: T,
    /// Length of the half-edge charged at each end of a path.
    pub terminal: T,
    pub class: Vec<CellClass>,
    /// Touch set of every node, sorted.
    pub touch: Vec<Vec<TouchKey>>,
    /// Whether node `nx·ny` is the exterior of the outer square.
    pub exterior: bool,
    pub periodic: bool,
    pub mode: PathMode,
    pub sources: Vec<usize>,
    pub sinks: Vec<usize>,
    pub variables: Vec<Variable>,
    /// Variable of every circle id, if any.
    pub circle_var: Vec<Option<usize>>,
    pub symmetries: Vec<GridSymmetry>,
    #[serde(skip)]
    is_source: Vec<bool>,
    #[serde(skip)]
    is_sink: Vec<bool>,
}

impl<T: Real> GridDomain<T> {
    /// Assembles a grid from a cell classification. Touch sets are derived from
    /// the 3×3 neighbourhoods; `Inside(c)` cells refer to variable `c`.
    ///
    /// Used for small hand-made and random instances.
    pub fn from_classes(
        nx: usize,
        ny: usize,
        h: T,
        class: Vec<CellClass>,
        num_vars: usize,
        sources: Vec<usize>,
        sinks: Vec<usize>,
    ) -> Result<Self> {
        if class.len() != nx * ny {
            return Err(Error::param("class map size does not match the grid"));
        }
        for c in &class {
            if let CellClass::Inside(v) = c {
                if *v >= num_vars {
                    return Err(Error::UnknownCircle(*v));
                }
            }
        }
        let touch = (0..nx * ny)
            .map(|cell| {
                if class[cell] == CellClass::Blocked {
                    return Vec::new();
                }
                let set: BTreeSet<TouchKey> = neighbourhood(nx, ny, false, cell)
                    .filter_map(|(nb, _)| match class[nb] {
                        CellClass::Inside(v) => Some(TouchKey { var: v as u32, lift: 0 }),
                        _ => None,
                    })
                    .collect();
                set.into_iter().collect()
            })
            .collect();
        let variables =
            (0..num_vars).map(|v| Variable { circle: v, label: format!("c{v}") }).collect();
        let grid = GridDomain {
            family: PathFamilySpec::VerticalSegments { width: nx as f64 / ny as f64 },
            resolution: nx.min(ny),
            nx,
            ny,
            hx: h,
            hy: h,
            cell_area: h * h,
            terminal: h,
            class,
            touch,
            exterior: false,
            periodic: false,
            mode: PathMode::Free,
            sources,
            sinks,
            variables,
            circle_var: (0..num_vars).map(Some).collect(),
            symmetries: Vec::new(),
            is_source: Vec::new(),
            is_sink: Vec::new(),
        };
        grid.finish()
    }

    fn finish(mut self) -> Result<Self> {
        let n = self.num_nodes();
        let keep: Vec<bool> = (0..n).map(|s| self.passable(s)).collect();
        self.sources.retain(|&s| s < n && keep[s]);
        self.sinks.retain(|&s| s < n && keep[s]);
        self.sources.sort_unstable();
        self.sources.dedup();
        self.sinks.sort_unstable();
        self.sinks.dedup();
        self.is_source = vec![false; n];
        self.is_sink = vec![false; n];
        for &s in &self.sources {
            self.is_source[s] = true;
        }
        for &s in &self.sinks {
            self.is_sink[s] = true;
        }
        Ok(self)
    }

    pub fn num_cells(&self) -> usize {
        self.nx * self.ny
    }

    /// Cells plus the exterior node when present.
    pub fn num_nodes(&self) -> usize {
        self.num_cells() + usize::from(self.exterior)
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn exterior_node(&self) -> Option<usize> {
        self.exterior.then(|| self.num_cells())
    }

    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn cell_coords(&self, cell: usize) -> (usize, usize) {
        (cell % self.nx, cell / self.nx)
    }

    pub fn is_source(&self, node: usize) -> bool {
        self.is_source[node]
    }

    pub fn is_sink(&self, node: usize) -> bool {
        self.is_sink[node]
    }

    pub fn passable(&self, node: usize) -> bool {
        node >= self.num_cells() || self.class[node] != CellClass::Blocked
    }

    pub fn is_material(&self, node: usize) -> bool {
        node < self.num_cells() && self.class[node] == CellClass::Material
    }

    pub fn material_cells(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_cells()).filter(|&c| self.class[c] == CellClass::Material)
    }

    pub fn count(&self, class: CellClass) -> usize {
        self.class.iter().filter(|&&c| c == class).count()
    }

    /// Neighbours of a node with the edge length and the change of sheet.
    pub fn neighbours(&self, node: usize) -> Vec<(usize, T, i32)> {
        let mut out = Vec::with_capacity(5);
        self.for_each_neighbour(node, |nb, len, shift| out.push((nb, len, shift)));
        out
    }

    /// Variable weights from per-circle weights (slot representatives on strips).
    pub fn weights_from_circles(&self, circle_weights: &[T]) -> Vec<T> {
        self.variables
            .iter()
            .map(|v| circle_weights.get(v.circle).copied().unwrap_or_else(T::zero))
            .collect()
    }

    /// Per-circle weights from variable weights; circles without a variable get 0.
    pub fn circle_weights(&self, weights: &[T]) -> Vec<T> {
        self.circle_var
            .iter()
            .map(|v| v.map_or_else(T::zero, |v| weights[v]))
            .collect()
    }
}

/// 4-neighbours of a cell with the sheet change across the periodic seam.
pub(crate) fn neighbourhood4(
    nx: usize,
    ny: usize,
    periodic: bool,
    cell: usize,
) -> impl Iterator<Item = (usize, i32)> {
    let (i, j) = (cell % nx, cell / nx);
    let mut out: [(usize, i32); 4] = [(usize::MAX, 0); 4];
    if i > 0 {
        out[0] = (cell - 1, 0);
    }
    if i + 1 < nx {
        out[1] = (cell + 1, 0);
    }
    if j > 0 {
        out[2] = (cell - nx, 0);
    } else if periodic && ny > 1 {
        out[2] = ((ny - 1) * nx + i, -1);
    }
    if j + 1 < ny {
        out[3] = (cell + nx, 0);
    } else if periodic && ny > 1 {
        out[3] = (i, 1);
    }
    out.into_iter().filter(|&(c, _)| c != usize::MAX)
}

/// The 3×3 neighbourhood of a cell (itself included) with sheet changes.
pub(crate) fn neighbourhood(
    nx: usize,
    ny: usize,
    periodic: bool,
    cell: usize,
) -> impl Iterator<Item = (usize, i32)> {
    let (i, j) = ((cell % nx) as i64, (cell / nx) as i64);
    let (nxi, nyi) = (nx as i64, ny as i64);
    (-1..=1i64).flat_map(move |dj| {
        (-1..=1i64).filter_map(move |di| {
            let x = i + di;
            if x < 0 || x >= nxi {
                return None;
            }
            let mut y = j + dj;
            let mut shift = 0;
            if y < 0 || y >= nyi {
                if !periodic || nyi < 3 {
                    return None;
                }
                shift = if y < 0 { -1 } else { 1 };
                y = y.rem_euclid(nyi);
            }
            Some(((y * nxi + x) as usize, shift))
        })
    })
}

/// Non-negative circle-variable weights and material-cell densities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MassDistribution<T: Real> {
    /// Weight of every variable (circle id, orbit or strip slot).
    pub weights: Vec<T>,
    /// Density of every cell; empty means zero everywhere. Only material
    /// entries are read.
    pub density: Vec<T>,
}

impl<T: Real> MassDistribution<T> {
    pub fn zero(grid: &GridDomain<T>) -> Self {
        MassDistribution {
            weights: vec![T::zero(); grid.num_vars()],
            density: vec![T::zero(); grid.num_cells()],
        }
    }

    pub fn from_weights(weights: Vec<T>) -> Self {
        MassDistribution { weights, density: Vec::new() }
    }

    /// Same value `w` on every variable and `d` on every material cell.
    pub fn uniform(grid: &GridDomain<T>, w: T, d: T) -> Self {
        MassDistribution { weights: vec![w; grid.num_vars()], density: vec![d; grid.num_cells()] }
    }

    pub fn with_density(mut self, density: Vec<T>) -> Self {
        self.density = density;
        self
    }

    pub fn weight(&self, var: usize) -> T {
        self.weights.get(var).copied().unwrap_or_else(T::zero)
    }

    pub fn density_at(&self, cell: usize) -> T {
        self.density.get(cell).copied().unwrap_or_else(T::zero)
    }

    pub fn validate(&self, grid: &GridDomain<T>) -> Result<()> {
        if self.weights.len() != grid.num_vars() {
            return Err(Error::param(format!(
                "{} weights for {} variables",
                self.weights.len(),
                grid.num_vars()
            )));
        }
        if !self.density.is_empty() && self.density.len() != grid.num_cells() {
            return Err(Error::param("density length does not match the grid"));
        }
        if self.weights.iter().chain(&self.density).any(|x| !x.is_finite() || *x < T::zero()) {
            return Err(Error::param("weights must be finite and non-negative"));
        }
        Ok(())
    }

    /// Circle mass `Σ w²` (each variable counted once).
    pub fn circle_mass(&self) -> T {
        self.weights.iter().map(|&w| w * w).sum()
    }

    /// Continuous mass `Σ d² · area` over material cells.
    pub fn continuous_mass(&self, grid: &GridDomain<T>) -> T {
        if self.density.is_empty() {
            return T::zero();
        }
        grid.material_cells().map(|c| self.density[c] * self.density[c]).sum::<T>() * grid.cell_area
    }

    pub fn mass(&self, grid: &GridDomain<T>) -> T {
        self.circle_mass() + self.continuous_mass(grid)
    }

    pub fn scaled(&self, factor: T) -> Self {
        MassDistribution {
            weights: self.weights.iter().map(|&w| w * factor).collect(),
            density: self.density.iter().map(|&d| d * factor).collect(),
        }
    }
}

/// A source-to-sink path with its pay-once ρ-length.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathResult<T: Real> {
    /// Node sequence; the exterior node, when used, has index `nx·ny`.
    pub nodes: Vec<usize>,
    /// Sheet of every node relative to the first one.
    pub sheets: Vec<i32>,
    /// `false` when no source is connected to a sink.
    pub feasible: bool,
    /// Pay-once ρ-length (`continuous + circles`).
    pub length: T,
    pub continuous: T,
    pub circles: T,
    /// Cost under the per-entry relaxation the search minimised; equal to
    /// `length` for paths found by the brute-force oracle.
    pub search_cost: T,
    /// Distinct touched circles as (variable, absolute lift).
    pub touched: Vec<(u32, i32)>,
    /// Coefficient of every material cell in the continuous part.
    pub cell_coefficients: Vec<(usize, T)>,
}

impl<T: Real> PathResult<T> {
    pub fn infeasible() -> Self {
        PathResult {
            nodes: Vec::new(),
            sheets: Vec::new(),
            feasible: false,
            length: T::infinity(),
            continuous: T::infinity(),
            circles: T::zero(),
            search_cost: T::infinity(),
            touched: Vec::new(),
            cell_coefficients: Vec::new(),
        }
    }

    pub fn endpoints(&self) -> Option<(usize, usize)> {
        Some((*self.nodes.first()?, *self.nodes.last()?))
    }

    /// Multiplicity of every touched variable (number of distinct lifts).
    pub fn var_multiplicities(&self) -> Vec<(usize, u32)> {
        let mut out: Vec<(usize, u32)> = Vec::new();
        for &(v, _) in &self.touched {
            match out.last_mut() {
                Some((last, n)) if *last == v as usize => *n += 1,
                _ => out.push((v as usize, 1)),
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbourhood_wraps_only_when_periodic() {
        let n: Vec<_> = neighbourhood(4, 4, false, 0).collect();
        assert_eq!(n.len(), 4);
        let n: Vec<_> = neighbourhood(4, 4, true, 0).collect();
        assert_eq!(n.len(), 6);
        assert!(n.contains(&(12, -1)) && n.contains(&(13, -1)));
        let n: Vec<_> = neighbourhood4(4, 4, true, 13).collect();
        assert!(n.contains(&(1, 1)));
    }

    #[test]
    fn from_classes_touch_sets() {
        let mut class = vec![CellClass::Material; 25];
        class[12] = CellClass::Inside(0);
        let g = GridDomain::<f64>::from_classes(5, 5, 0.2, class, 1, vec![0], vec![24]).unwrap();
        let touching: Vec<usize> = (0..25).filter(|&c| !g.touch[c].is_empty()).collect();
        assert_eq!(touching, vec![6, 7, 8, 11, 12, 13, 16, 17, 18]);
    }

    #[test]
    fn mass_distribution_checks() {
        let class = vec![CellClass::Material; 4];
        let g = GridDomain::<f64>::from_classes(2, 2, 0.5, class, 1, vec![0], vec![3]).unwrap();
        let rho = MassDistribution::uniform(&g, 2.0, 1.0);
        assert!((rho.mass(&g) - 5.0).abs() < 1e-15);
        assert!(MassDistribution::<f64>::from_weights(vec![-1.0]).validate(&g).is_err());
        assert!(MassDistribution::<f64>::from_weights(vec![]).validate(&g).is_err());
    }
}
