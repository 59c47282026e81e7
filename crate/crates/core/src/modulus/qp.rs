//! `min Σ c_j x_j²  s.t.  A x ≥ 1` with non-negative sparse rows.
//!
//! Goldfarb–Idnani dual active-set method in the scaled variables
//! `y_j = √c_j x_j`. The active rows are kept linearly independent and the
//! upper Cholesky factor `R` of their Gram matrix `A_S C⁻¹ A_Sᵀ` is updated
//! in place, so rows appended between solves are absorbed from a warm start.
//! Throughout, `x = C⁻¹ Aᵀ μ` with `μ ≥ 0`; because `A ≥ 0` the primal sign
//! constraint `x ≥ 0` holds automatically.

/// A row whose residual norm after projection falls below this fraction of
/// its own norm is treated as dependent on the active rows.
const DEPENDENT: f64 = 1e-12;
/// Steps between refinements of the active equations.
const REFINE_EVERY: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct SparseRow {
    pub idx: Vec<u32>,
    pub val: Vec<f64>,
}

impl SparseRow {
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.idx.iter().zip(&self.val).map(|(&j, &v)| v * x[j as usize]).sum()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct QpReport {
    pub kkt: f64,
    pub steps: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct DualQp {
    cinv: Vec<f64>,
    rows: Vec<SparseRow>,
    gdiag: Vec<f64>,
    pub mu: Vec<f64>,
    pub x: Vec<f64>,
    active: Vec<usize>,
    is_active: Vec<bool>,
    /// Columns of `R`; column `j` holds rows `0..=j`.
    r: Vec<Vec<f64>>,
    work: Vec<f64>,
}

impl DualQp {
    pub fn new(costs: &[f64]) -> Self {
        DualQp {
            cinv: costs.iter().map(|c| 1.0 / c).collect(),
            rows: Vec::new(),
            gdiag: Vec::new(),
            mu: Vec::new(),
            x: vec![0.0; costs.len()],
            active: Vec::new(),
            is_active: Vec::new(),
            r: Vec::new(),
            work: vec![0.0; costs.len()],
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn push(&mut self, row: SparseRow) {
        let g = row.idx.iter().zip(&row.val).map(|(&j, &v)| v * v * self.cinv[j as usize]).sum();
        self.rows.push(row);
        self.gdiag.push(g);
        self.mu.push(0.0);
        self.is_active.push(false);
    }

    fn axpy_row(&mut self, i: usize, delta: f64) {
        let row = &self.rows[i];
        for (&j, &v) in row.idx.iter().zip(&row.val) {
            self.x[j as usize] += delta * v * self.cinv[j as usize];
        }
    }

    fn rebuild_x(&mut self) {
        self.x.iter_mut().for_each(|v| *v = 0.0);
        for q in 0..self.active.len() {
            let i = self.active[q];
            self.axpy_row(i, self.mu[i]);
        }
    }

    pub fn mass(&self) -> f64 {
        self.x.iter().zip(&self.cinv).map(|(x, ci)| x * x / ci).sum()
    }

    /// Dual objective in mass units; a lower bound for the optimum.
    pub fn dual_value(&self) -> f64 {
        2.0 * self.mu.iter().sum::<f64>() - self.mass()
    }

    /// Duality gap `2 Σ μ_i (a_i·x - 1)` in mass units.
    pub fn gap(&self) -> f64 {
        2.0 * self.rows.iter().zip(&self.mu).map(|(r, m)| m * (r.dot(&self.x) - 1.0)).sum::<f64>()
    }

    /// Natural KKT residual `max_i |min(μ_i, a_i·x - 1)|`.
    pub fn kkt(&self) -> f64 {
        self.rows
            .iter()
            .zip(&self.mu)
            .map(|(r, &m)| m.min(r.dot(&self.x) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    #[cfg(test)]
    pub fn min_slack(&self) -> f64 {
        self.rows.iter().map(|r| r.dot(&self.x) - 1.0).fold(f64::INFINITY, f64::min)
    }

    /// Runs dual steps until no row is violated by more than `tol / 2`, or
    /// `max_steps` steps were taken.
    pub fn solve(&mut self, tol: f64, max_steps: usize) -> QpReport {
        let mut report = QpReport::default();
        self.refine();
        let mut since_refine = 0;
        while report.steps < max_steps {
            let Some(p) = self.most_violated(0.5 * tol) else { break };
            let before = report.steps;
            if !self.enter(p, &mut report.steps, max_steps) {
                break;
            }
            since_refine += report.steps - before;
            if since_refine >= REFINE_EVERY {
                self.refine();
                since_refine = 0;
            }
        }
        self.refine();
        report.kkt = self.kkt();
        report
    }

    /// Inactive row with the most negative normalised slack below `-tol`.
    fn most_violated(&self, tol: f64) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            if self.is_active[i] || self.gdiag[i] <= 0.0 {
                continue;
            }
            let s = row.dot(&self.x) - 1.0;
            if s >= -tol {
                continue;
            }
            let score = s / self.gdiag[i].sqrt();
            if best.map_or(true, |(_, b)| score < b) {
                best = Some((i, score));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Brings row `p` into the active set, dropping rows whose multiplier
    /// reaches zero on the way. Returns `false` if the row cannot be
    /// satisfied or the step budget ran out.
    fn enter(&mut self, p: usize, steps: &mut usize, max_steps: usize) -> bool {
        let np2 = self.gdiag[p];
        let mut slack = self.rows[p].dot(&self.x) - 1.0;
        loop {
            if *steps >= max_steps {
                return false;
            }
            *steps += 1;
            let d = self.gram_column(p);
            let w = self.forward(&d);
            let r = self.backward(w.clone());
            let delta = np2 - w.iter().map(|v| v * v).sum::<f64>();
            let dependent = delta <= DEPENDENT * np2;

            let mut partial = (f64::INFINITY, usize::MAX);
            for (q, &rq) in r.iter().enumerate() {
                if rq > 0.0 {
                    let t = self.mu[self.active[q]].max(0.0) / rq;
                    if t < partial.0 {
                        partial = (t, q);
                    }
                }
            }
            let full = if dependent { f64::INFINITY } else { -slack / delta };
            let t = partial.0.min(full);
            if !t.is_finite() {
                return false;
            }
            for (q, &rq) in r.iter().enumerate() {
                self.mu[self.active[q]] -= t * rq;
            }
            self.mu[p] += t;
            if !dependent {
                self.axpy_row(p, t);
                for (q, &rq) in r.iter().enumerate() {
                    self.axpy_row(self.active[q], -t * rq);
                }
                slack += t * delta;
            }
            if full <= partial.0 {
                let mut col = w;
                col.push(delta.sqrt());
                self.r.push(col);
                self.active.push(p);
                self.is_active[p] = true;
                return true;
            }
            let q = partial.1;
            self.mu[self.active[q]] = 0.0;
            self.remove(q);
        }
    }

    /// `G_{S,p}` for the active set `S`.
    fn gram_column(&mut self, p: usize) -> Vec<f64> {
        let row = &self.rows[p];
        for (&j, &v) in row.idx.iter().zip(&row.val) {
            self.work[j as usize] = v * self.cinv[j as usize];
        }
        let d = self.active.iter().map(|&i| self.rows[i].dot(&self.work)).collect();
        for &j in &self.rows[p].idx {
            self.work[j as usize] = 0.0;
        }
        d
    }

    /// Solves `Rᵀ w = d`.
    fn forward(&self, d: &[f64]) -> Vec<f64> {
        let mut w = Vec::with_capacity(d.len());
        for (j, col) in self.r.iter().enumerate() {
            let s: f64 = col[..j].iter().zip(&w).map(|(a, b)| a * b).sum();
            w.push((d[j] - s) / col[j]);
        }
        w
    }

    /// Solves `R v = w` in place.
    fn backward(&self, mut w: Vec<f64>) -> Vec<f64> {
        for j in (0..self.r.len()).rev() {
            let col = &self.r[j];
            w[j] /= col[j];
            let v = w[j];
            for (wi, &c) in w[..j].iter_mut().zip(&col[..j]) {
                *wi -= c * v;
            }
        }
        w
    }

    /// Deletes active position `q` and restores the triangular factor with
    /// Givens rotations.
    fn remove(&mut self, q: usize) {
        let i = self.active.remove(q);
        self.is_active[i] = false;
        self.r.remove(q);
        for j in q..self.r.len() {
            let (a, b) = (self.r[j][j], self.r[j][j + 1]);
            let h = a.hypot(b);
            let (c, s) = (a / h, b / h);
            self.r[j][j] = h;
            self.r[j].pop();
            for col in &mut self.r[j + 1..] {
                let (u, v) = (col[j], col[j + 1]);
                col[j] = c * u + s * v;
                col[j + 1] = c * v - s * u;
            }
        }
    }

    /// Rebuilds `x` from the multipliers and takes one Newton correction on
    /// the active equations `a_i·x = 1`.
    fn refine(&mut self) {
        self.rebuild_x();
        if self.active.is_empty() {
            return;
        }
        let e: Vec<f64> = self.active.iter().map(|&i| 1.0 - self.rows[i].dot(&self.x)).collect();
        let delta = self.backward(self.forward(&e));
        for q in 0..self.active.len() {
            let i = self.active[q];
            self.mu[i] += delta[q];
            self.axpy_row(i, delta[q]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(entries: &[(u32, f64)]) -> SparseRow {
        SparseRow { idx: entries.iter().map(|e| e.0).collect(), val: entries.iter().map(|e| e.1).collect() }
    }

    #[test]
    fn single_constraint_closed_form() {
        // min x0² + x1² s.t. x0 + x1 ≥ 1  →  x = (1/2, 1/2), mass 1/2
        let mut qp = DualQp::new(&[1.0, 1.0]);
        qp.push(row(&[(0, 1.0), (1, 1.0)]));
        let rep = qp.solve(1e-12, 1000);
        assert!(rep.kkt <= 1e-12);
        assert!((qp.mass() - 0.5).abs() < 1e-12);
        assert!((qp.dual_value() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn weighted_costs() {
        // min 2x0² + x1² s.t. x0 + x1 ≥ 1 → x0 = 1/3, x1 = 2/3, mass 2/3
        let mut qp = DualQp::new(&[2.0, 1.0]);
        qp.push(row(&[(0, 1.0), (1, 1.0)]));
        qp.solve(1e-12, 1000);
        assert!((qp.x[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((qp.mass() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn inactive_rows_get_zero_multiplier() {
        let mut qp = DualQp::new(&[1.0, 1.0, 1.0]);
        qp.push(row(&[(0, 1.0)]));
        qp.push(row(&[(0, 1.0), (1, 1.0)]));
        qp.push(row(&[(2, 2.0)]));
        let rep = qp.solve(1e-12, 5000);
        assert!(rep.kkt <= 1e-12, "{rep:?}");
        assert!((qp.x[0] - 1.0).abs() < 1e-12);
        assert!(qp.x[1].abs() < 1e-12);
        assert!((qp.x[2] - 0.5).abs() < 1e-12);
        assert!(qp.mu[1].abs() < 1e-12);
        assert!(qp.gap().abs() < 1e-12);
    }

    #[test]
    fn duplicate_rows_are_dependent() {
        // only 7 distinct rows among 30
        let n = 40;
        let mut qp = DualQp::new(&vec![1.0; n]);
        for k in 0..30 {
            let entries: Vec<(u32, f64)> =
                (0..n as u32).map(|j| (j, 1.0 + 0.01 * ((j as usize * (k + 3)) % 7) as f64)).collect();
            qp.push(row(&entries));
        }
        let rep = qp.solve(1e-10, 20_000);
        assert!(rep.kkt <= 1e-10, "{rep:?}");
        assert!(qp.min_slack() > -1e-10);
        assert!(qp.active.len() <= 7);
        assert!((qp.dual_value() - qp.mass()).abs() < 1e-10);
    }

    #[test]
    fn warm_start_matches_cold_start() {
        let rows: Vec<SparseRow> = (0..12u32)
            .map(|k| row(&[(k % 5, 1.0), ((k % 5 + 1 + k % 3) % 5, 0.5 + k as f64 * 0.1), (5, 0.3)]))
            .collect();
        let costs = [1.0, 2.0, 0.5, 1.5, 1.0, 3.0];
        let mut warm = DualQp::new(&costs);
        for r in &rows {
            warm.push(r.clone());
            warm.solve(1e-12, 1000);
        }
        let mut cold = DualQp::new(&costs);
        for r in &rows {
            cold.push(r.clone());
        }
        cold.solve(1e-12, 1000);
        assert!((warm.mass() - cold.mass()).abs() < 1e-12, "{} {} {} {}", warm.mass(), cold.mass(), warm.kkt(), cold.kkt());
        for (a, b) in warm.x.iter().zip(&cold.x) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
