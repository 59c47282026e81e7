use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use super::{neighbourhood4, GridDomain, MassDistribution, PathMode, PathResult, TouchKey};
use crate::{Error, Real, Result};

/// Size limits of the brute-force oracle.
pub const ORACLE_MAX_CELLS: usize = 150;
pub const ORACLE_MAX_CIRCLES: usize = 6;

#[derive(Clone, Copy)]
struct Item<T> {
    cost: T,
    hops: u32,
    node: usize,
}

impl<T: Real> PartialEq for Item<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Real> Eq for Item<T> {}

impl<T: Real> PartialOrd for Item<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Item<T> {
    // reversed: BinaryHeap pops the smallest (cost, hops, node)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap_or(Ordering::Equal)
            .then(other.hops.cmp(&self.hops))
            .then(other.node.cmp(&self.node))
    }
}

impl<T: Real> GridDomain<T> {
    fn density_of(&self, rho: &MassDistribution<T>, node: usize) -> T {
        if self.is_material(node) {
            rho.density_at(node)
        } else {
            T::zero()
        }
    }

    /// Calls `f(neighbour, edge length, sheet change)` for every passable neighbour.
    pub(crate) fn for_each_neighbour(&self, node: usize, mut f: impl FnMut(usize, T, i32)) {
        let ncell = self.num_cells();
        if node == ncell {
            for cell in 0..ncell {
                let (i, j) = self.cell_coords(cell);
                let border = i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny;
                if border && self.passable(cell) {
                    f(cell, self.hx, 0);
                }
            }
            return;
        }
        for (nb, shift) in neighbourhood4(self.nx, self.ny, self.periodic, node) {
            if self.passable(nb) {
                let len = if nb / self.nx == node / self.nx && shift == 0 { self.hx } else { self.hy };
                f(nb, len, shift);
            }
        }
        if self.exterior {
            let (i, j) = self.cell_coords(node);
            if i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny {
                f(ncell, self.hx, 0);
            }
        }
    }

    /// Weight of the circles in `touch[b]` not already touched at `a`.
    fn entry_cost(&self, rho: &MassDistribution<T>, a: usize, b: usize, shift: i32) -> T {
        let prev = &self.touch[a];
        self.touch[b]
            .iter()
            .filter(|k| !prev.contains(&TouchKey { var: k.var, lift: k.lift + shift }))
            .map(|k| rho.weight(k.var as usize))
            .fold(T::zero(), |s, w| s + w)
    }

    fn start_cost(&self, rho: &MassDistribution<T>, s: usize) -> T {
        let half = self.terminal / T::lit(2.0);
        self.touch[s].iter().fold(half * self.density_of(rho, s), |acc, k| acc + rho.weight(k.var as usize))
    }
}

/// Minimum ρ-length path under the per-entry relaxation.
///
/// The search pays a circle's weight each time the circle enters the touch
/// set; the returned [`PathResult::length`] re-evaluates the path with every
/// distinct circle paid once, so it never exceeds [`PathResult::search_cost`].
pub fn shortest_path<T: Real>(grid: &GridDomain<T>, rho: &MassDistribution<T>) -> Result<PathResult<T>> {
    let mut paths = shortest_paths(grid, rho, 1, T::infinity())?;
    Ok(paths.pop().unwrap_or_else(PathResult::infeasible))
}

/// Up to `max_paths` distinct source-to-sink paths, cheapest first, whose
/// per-entry cost is below `below`. The first one is always the minimum.
///
/// Free grids return the tree paths of the cheapest sinks; segment grids
/// return the cheapest columns.
pub fn shortest_paths<T: Real>(
    grid: &GridDomain<T>,
    rho: &MassDistribution<T>,
    max_paths: usize,
    below: T,
) -> Result<Vec<PathResult<T>>> {
    rho.validate(grid)?;
    if max_paths == 0 {
        return Ok(Vec::new());
    }
    if grid.mode == PathMode::Columns {
        return column_paths(grid, rho, max_paths, below);
    }
    let n = grid.num_nodes();
    let mut dist = vec![T::infinity(); n];
    let mut hops = vec![u32::MAX; n];
    let mut pred = vec![(usize::MAX, 0i32); n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for &s in &grid.sources {
        let c = grid.start_cost(rho, s);
        if (c, 0, s) < (dist[s], hops[s], s) {
            dist[s] = c;
            hops[s] = 0;
            heap.push(Item { cost: c, hops: 0, node: s });
        }
    }
    while let Some(Item { cost, hops: h, node }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        let d_node = grid.density_of(rho, node);
        grid.for_each_neighbour(node, |nb, len, shift| {
            if done[nb] {
                return;
            }
            let step = len * (d_node + grid.density_of(rho, nb)) / T::lit(2.0)
                + grid.entry_cost(rho, node, nb, shift);
            let c = cost + step;
            let better = match c.partial_cmp(&dist[nb]) {
                Some(Ordering::Less) => true,
                Some(Ordering::Equal) => (h + 1, node) < (hops[nb], pred[nb].0),
                _ => false,
            };
            if better {
                dist[nb] = c;
                hops[nb] = h + 1;
                pred[nb] = (node, shift);
                heap.push(Item { cost: c, hops: h + 1, node: nb });
            }
        });
    }

    let half = grid.terminal / T::lit(2.0);
    let mut ends: Vec<(T, u32, usize)> = grid
        .sinks
        .iter()
        .filter(|&&s| dist[s].is_finite())
        .map(|&s| (dist[s] + half * grid.density_of(rho, s), hops[s], s))
        .collect();
    ends.sort_by(|x, y| {
        x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2))
    });
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (k, &(total, _, sink)) in ends.iter().enumerate() {
        if out.len() >= max_paths || (k > 0 && total >= below) {
            break;
        }
        let mut nodes = vec![sink];
        let mut cur = sink;
        while pred[cur].0 != usize::MAX {
            cur = pred[cur].0;
            nodes.push(cur);
        }
        nodes.reverse();
        if !seen.insert(nodes.clone()) {
            continue;
        }
        let mut path = evaluate_path(grid, rho, &nodes)?;
        path.search_cost = total;
        out.push(path);
    }
    if out.is_empty() {
        out.push(PathResult::infeasible());
    }
    Ok(out)
}

fn column_paths<T: Real>(
    grid: &GridDomain<T>,
    rho: &MassDistribution<T>,
    max_paths: usize,
    below: T,
) -> Result<Vec<PathResult<T>>> {
    let mut all = Vec::with_capacity(grid.nx);
    for i in 0..grid.nx {
        let nodes: Vec<usize> = (0..grid.ny).map(|j| grid.cell_index(i, j)).collect();
        if nodes.iter().any(|&c| !grid.passable(c)) {
            continue;
        }
        all.push(evaluate_path(grid, rho, &nodes)?);
    }
    all.sort_by(|a, b| {
        a.length
            .partial_cmp(&b.length)
            .unwrap_or(Ordering::Equal)
            .then(a.nodes[0].cmp(&b.nodes[0]))
    });
    let mut out: Vec<PathResult<T>> = Vec::new();
    for (k, p) in all.into_iter().enumerate() {
        if out.len() >= max_paths || (k > 0 && p.length >= below) {
            break;
        }
        out.push(p);
    }
    if out.is_empty() {
        out.push(PathResult::infeasible());
    }
    Ok(out)
}

/// Re-evaluates a node sequence from scratch with pay-once semantics.
pub fn evaluate_path<T: Real>(
    grid: &GridDomain<T>,
    rho: &MassDistribution<T>,
    nodes: &[usize],
) -> Result<PathResult<T>> {
    let (Some(&first), Some(&last)) = (nodes.first(), nodes.last()) else {
        return Err(Error::param("empty path"));
    };
    if !grid.is_source(first) || !grid.is_sink(last) {
        return Err(Error::param("path must run from a source to a sink"));
    }
    let half = grid.terminal / T::lit(2.0);
    let mut coef: BTreeMap<usize, T> = BTreeMap::new();
    let mut add = |node: usize, v: T| {
        if grid.is_material(node) {
            let e = coef.entry(node).or_insert_with(T::zero);
            *e = *e + v;
        }
    };
    add(first, half);
    add(last, half);
    let mut sheets = vec![0i32];
    let mut search_cost = grid.start_cost(rho, first);
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut step = None;
        grid.for_each_neighbour(a, |nb, len, shift| {
            if nb == b && step.is_none() {
                step = Some((len, shift));
            }
        });
        let (len, shift) =
            step.ok_or_else(|| Error::param(format!("nodes {a} and {b} are not adjacent")))?;
        add(a, len / T::lit(2.0));
        add(b, len / T::lit(2.0));
        search_cost = search_cost
            + len * (grid.density_of(rho, a) + grid.density_of(rho, b)) / T::lit(2.0)
            + grid.entry_cost(rho, a, b, shift);
        sheets.push(sheets.last().unwrap() + shift);
    }
    search_cost = search_cost + half * grid.density_of(rho, last);
    let touched: BTreeSet<(u32, i32)> = nodes
        .iter()
        .zip(&sheets)
        .flat_map(|(&n, &s)| grid.touch[n].iter().map(move |k| (k.var, k.lift + s)))
        .collect();
    let circles = touched.iter().fold(T::zero(), |acc, &(v, _)| acc + rho.weight(v as usize));
    let continuous =
        coef.iter().fold(T::zero(), |acc, (&c, &k)| acc + k * rho.density_at(c));
    Ok(PathResult {
        nodes: nodes.to_vec(),
        sheets,
        feasible: true,
        length: continuous + circles,
        continuous,
        circles,
        search_cost,
        touched: touched.into_iter().collect(),
        cell_coefficients: coef.into_iter().collect(),
    })
}

/// Exact pay-once minimum by search over (node, touched-circle subset) states.
pub fn brute_force_min_length<T: Real>(
    grid: &GridDomain<T>,
    rho: &MassDistribution<T>,
) -> Result<PathResult<T>> {
    rho.validate(grid)?;
    if grid.periodic {
        return Err(Error::param("the oracle does not handle periodic strips"));
    }
    if grid.num_cells() > ORACLE_MAX_CELLS {
        return Err(Error::TooLarge(format!("{} cells > {ORACLE_MAX_CELLS}", grid.num_cells())));
    }
    let vars: BTreeSet<u32> = grid.touch.iter().flatten().map(|k| k.var).collect();
    if vars.len() > ORACLE_MAX_CIRCLES {
        return Err(Error::TooLarge(format!("{} circles > {ORACLE_MAX_CIRCLES}", vars.len())));
    }
    if grid.mode == PathMode::Columns {
        return shortest_path(grid, rho);
    }
    let bit: BTreeMap<u32, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let masks = 1usize << vars.len();
    let mask_of = |node: usize| grid.touch[node].iter().fold(0usize, |m, k| m | 1 << bit[&k.var]);
    let weight_of = |mask: usize| {
        vars.iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .fold(T::zero(), |acc, (_, &v)| acc + rho.weight(v as usize))
    };
    let n = grid.num_nodes();
    let state = |node: usize, mask: usize| node * masks + mask;
    let mut dist = vec![T::infinity(); n * masks];
    let mut hops = vec![u32::MAX; n * masks];
    let mut pred = vec![usize::MAX; n * masks];
    let mut done = vec![false; n * masks];
    let mut heap = BinaryHeap::new();
    let half = grid.terminal / T::lit(2.0);
    for &s in &grid.sources {
        let m = mask_of(s);
        let st = state(s, m);
        let c = half * grid.density_of(rho, s) + weight_of(m);
        if c < dist[st] {
            dist[st] = c;
            hops[st] = 0;
            heap.push(Item { cost: c, hops: 0, node: st });
        }
    }
    let mut best: Option<(T, u32, usize)> = None;
    while let Some(Item { cost, hops: h, node: st }) = heap.pop() {
        if done[st] {
            continue;
        }
        done[st] = true;
        if let Some((b, _, _)) = best {
            if cost > b {
                break;
            }
        }
        let (node, mask) = (st / masks, st % masks);
        if grid.is_sink(node) {
            let total = cost + half * grid.density_of(rho, node);
            let cand = (total, h, st);
            if best.map_or(true, |b| {
                cand.0 < b.0 || (cand.0 == b.0 && (cand.1, cand.2) < (b.1, b.2))
            }) {
                best = Some(cand);
            }
        }
        let d_node = grid.density_of(rho, node);
        grid.for_each_neighbour(node, |nb, len, _| {
            let nm = mask | mask_of(nb);
            let ns = state(nb, nm);
            if done[ns] {
                return;
            }
            let c = cost
                + len * (d_node + grid.density_of(rho, nb)) / T::lit(2.0)
                + weight_of(nm & !mask);
            if c < dist[ns] || (c == dist[ns] && h + 1 < hops[ns]) {
                dist[ns] = c;
                hops[ns] = h + 1;
                pred[ns] = st;
                heap.push(Item { cost: c, hops: h + 1, node: ns });
            }
        });
    }
    let Some((total, _, end)) = best else {
        return Ok(PathResult::infeasible());
    };
    let mut nodes = vec![end / masks];
    let mut cur = end;
    while pred[cur] != usize::MAX {
        cur = pred[cur];
        nodes.push(cur / masks);
    }
    nodes.reverse();
    let mut path = evaluate_path(grid, rho, &nodes)?;
    path.search_cost = total;
    Ok(path)
}

/// Distinct circles touched by a path: circle ids on unit-square grids,
/// slot representatives on strips.
pub fn path_touches<T: Real>(grid: &GridDomain<T>, path: &PathResult<T>) -> BTreeSet<usize> {
    path.touched
        .iter()
        .map(|&(v, _)| grid.variables.get(v as usize).map_or(v as usize, |x| x.circle))
        .collect()
}
