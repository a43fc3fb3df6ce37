//! Bounded-variable primal simplex on a dense tableau.
//!
//! Every row `a·x (sense) b` is rewritten as `a·x − s = 0` with a row
//! activity variable `s` whose bounds encode the sense, so the whole problem
//! becomes `[A | −I]·(x, s) = 0` with box bounds. Rows whose activity starts
//! outside its box get an artificial column; phase one minimizes their sum.
//! The basis is refactorized with an LU decomposition periodically and before
//! optimality is declared.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::model::{MilpModel, ModelError, Sense};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Primal feasibility, relative to `1 + ‖rhs‖∞`.
    pub feasibility: f64,
    /// Dual feasibility of reduced costs.
    pub optimality: f64,
    /// Smallest tableau entry accepted as a pivot.
    pub pivot: f64,
    pub integrality: f64,
    /// Absolute optimality gap for branch and bound.
    pub gap: f64,
    /// Primal/dual objective gap, relative to `1 + |obj|`.
    pub duality_gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            feasibility: 1e-9,
            optimality: 1e-9,
            pivot: 1e-9,
            integrality: 1e-6,
            gap: 1e-6,
            duality_gap: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LpConfig {
    pub tol: Tolerances,
    pub max_iterations: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub stall_threshold: usize,
    pub refactor_interval: usize,
}

impl Default for LpConfig {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            max_iterations: 200_000,
            stall_threshold: 50,
            refactor_interval: 100,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LpStats {
    pub pivots: usize,
    pub bound_flips: usize,
    pub bland_pivots: usize,
    pub refactorizations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    /// One multiplier per row: `≤ 0` on `≤` rows, `≥ 0` on `≥` rows.
    pub dual: Vec<f64>,
    /// `c − Aᵀy` per column.
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    /// Row multipliers proving infeasibility, see [`farkas_margin`].
    pub farkas: Option<Vec<f64>>,
    pub stats: LpStats,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LpError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

pub fn solve_lp(model: &MilpModel) -> Result<LpSolution, LpError> {
    solve_lp_with(model, &model.lower, &model.upper, &LpConfig::default())
}

/// Solves the relaxation of `model` with column bounds replaced by
/// `lower`/`upper`.
pub fn solve_lp_with(model: &MilpModel, lower: &[f64], upper: &[f64], cfg: &LpConfig) -> Result<LpSolution, LpError> {
    model.validate()?;
    let n = model.columns();
    assert_eq!(lower.len(), n);
    assert_eq!(upper.len(), n);
    if (0..n).any(|j| lower[j] > upper[j]) {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            primal: lower.to_vec(),
            dual: vec![0.0; model.rows.len()],
            reduced_costs: vec![0.0; n],
            objective: f64::NAN,
            farkas: None,
            stats: LpStats::default(),
        });
    }
    let mut t = Tableau::new(model, lower, upper, cfg.tol);
    t.refactor()?;
    let scale = 1.0 + model.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
    let feas_tol = cfg.tol.feasibility * scale;

    if t.artificials > 0 {
        t.set_phase_one_costs();
        t.refactor()?;
        let outcome = t.iterate(cfg, feas_tol)?;
        debug_assert_eq!(outcome, Outcome::Optimal, "phase one is bounded below");
        let infeasibility: f64 = (t.n + t.m..t.ntot).map(|k| t.x[k]).sum();
        if infeasibility > feas_tol {
            let y = t.duals();
            let farkas = orient_farkas(model, lower, upper, y);
            let mut sol = t.solution(model, LpStatus::Infeasible);
            sol.farkas = farkas;
            return Ok(sol);
        }
        t.drive_out_artificials();
    }
    t.set_phase_two_costs(&model.objective);
    t.refactor()?;
    let status = match t.iterate(cfg, feas_tol)? {
        Outcome::Optimal => LpStatus::Optimal,
        Outcome::Unbounded => LpStatus::Unbounded,
    };
    Ok(t.solution(model, status))
}

/// Largest value of `yᵀ(A·x) − yᵀs` over the column box and the row boxes
/// (`s` ranging over each row's admissible activity). A negative margin
/// proves that no `x` satisfies the rows. Returns `+∞` when unbounded.
pub fn farkas_margin(model: &MilpModel, lower: &[f64], upper: &[f64], y: &[f64]) -> f64 {
    let n = model.columns();
    let mut g = vec![0.0; n];
    for (row, &yi) in model.rows.iter().zip(y) {
        for &(j, a) in &row.terms {
            g[j] += yi * a;
        }
    }
    let mut sup = 0.0;
    for j in 0..n {
        let bound = if g[j] > 0.0 { upper[j] } else { lower[j] };
        if g[j] != 0.0 {
            sup += g[j] * bound;
        }
    }
    for (row, &yi) in model.rows.iter().zip(y) {
        // maximize −y·s with s restricted by the row sense
        let (lo, hi) = row_box(row.sense, row.rhs);
        let coef = -yi;
        if coef != 0.0 {
            sup += coef * if coef > 0.0 { hi } else { lo };
        }
    }
    if sup.is_nan() {
        f64::INFINITY
    } else {
        sup
    }
}

fn row_box(sense: Sense, rhs: f64) -> (f64, f64) {
    match sense {
        Sense::Le => (f64::NEG_INFINITY, rhs),
        Sense::Ge => (rhs, f64::INFINITY),
        Sense::Eq => (rhs, rhs),
    }
}

fn orient_farkas(model: &MilpModel, lower: &[f64], upper: &[f64], y: Vec<f64>) -> Option<Vec<f64>> {
    if farkas_margin(model, lower, upper, &y) < 0.0 {
        return Some(y);
    }
    let neg: Vec<f64> = y.iter().map(|v| -v).collect();
    (farkas_margin(model, lower, upper, &neg) < 0.0).then_some(neg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free column resting at zero.
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Outcome {
    Optimal,
    Unbounded,
}

enum Step {
    Unbounded,
    Flip,
    Pivot { row: usize, to_upper: bool },
}

struct Tableau {
    m: usize,
    n: usize,
    ntot: usize,
    artificials: usize,
    /// Sparse original columns of `[A | −I | artificials]`.
    cols: Vec<Vec<(usize, f64)>>,
    /// Row-major `B⁻¹·[A | −I | artificials]`.
    t: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    d: Vec<f64>,
    x: Vec<f64>,
    status: Vec<Status>,
    head: Vec<usize>,
    tol: Tolerances,
    stats: LpStats,
    since_refactor: usize,
}

impl Tableau {
    fn new(model: &MilpModel, lower: &[f64], upper: &[f64], tol: Tolerances) -> Self {
        let n = model.columns();
        let m = model.rows.len();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, row) in model.rows.iter().enumerate() {
            for &(j, a) in &row.terms {
                cols[j].push((i, a));
            }
        }
        let mut lo = lower.to_vec();
        let mut hi = upper.to_vec();
        let mut x = Vec::with_capacity(n + 2 * m);
        let mut status = Vec::with_capacity(n + 2 * m);
        for j in 0..n {
            let (v, s) = if lo[j].is_finite() {
                (lo[j], Status::AtLower)
            } else if hi[j].is_finite() {
                (hi[j], Status::AtUpper)
            } else {
                (0.0, Status::Free)
            };
            x.push(v);
            status.push(s);
        }
        let activity: Vec<f64> = model.rows.iter().map(|r| r.activity(&x)).collect();
        let mut head = vec![0; m];
        let mut art_rows = Vec::new();
        for (i, row) in model.rows.iter().enumerate() {
            let (l, u) = row_box(row.sense, row.rhs);
            cols.push(vec![(i, -1.0)]);
            lo.push(l);
            hi.push(u);
            let r = activity[i];
            if r < l - tol.feasibility {
                x.push(l);
                status.push(Status::AtLower);
                art_rows.push((i, l - r));
            } else if r > u + tol.feasibility {
                x.push(u);
                status.push(Status::AtUpper);
                art_rows.push((i, r - u));
            } else {
                x.push(r);
                status.push(Status::Basic);
                head[i] = n + i;
            }
        }
        for &(i, gap) in &art_rows {
            // activity − s + σ·art = 0 with art = gap ≥ 0
            let target = x[n + i];
            let sigma = if target > activity[i] { 1.0 } else { -1.0 };
            head[i] = cols.len();
            cols.push(vec![(i, sigma)]);
            lo.push(0.0);
            hi.push(f64::INFINITY);
            x.push(gap);
            status.push(Status::Basic);
        }
        let ntot = cols.len();
        Self {
            m,
            n,
            ntot,
            artificials: art_rows.len(),
            cols,
            t: vec![0.0; m * ntot],
            lo,
            hi,
            cost: vec![0.0; ntot],
            d: vec![0.0; ntot],
            x,
            status,
            head,
            tol,
            stats: LpStats::default(),
            since_refactor: 0,
        }
    }

    fn set_phase_one_costs(&mut self) {
        self.cost = vec![0.0; self.ntot];
        for k in self.n + self.m..self.ntot {
            self.cost[k] = 1.0;
        }
    }

    fn set_phase_two_costs(&mut self, objective: &[f64]) {
        self.cost = vec![0.0; self.ntot];
        self.cost[..self.n].copy_from_slice(objective);
    }

    /// Inverse of the current basis matrix.
    fn basis_inverse(&self) -> Result<DMatrix<f64>, LpError> {
        let m = self.m;
        let mut b = DMatrix::<f64>::zeros(m, m);
        for (r, &k) in self.head.iter().enumerate() {
            for &(i, a) in &self.cols[k] {
                b[(i, r)] = a;
            }
        }
        b.lu()
            .try_inverse()
            .ok_or_else(|| LpError::NumericalFailure("singular basis".into()))
    }

    /// Rebuilds tableau, basic values and reduced costs from the original
    /// columns.
    fn refactor(&mut self) -> Result<(), LpError> {
        self.stats.refactorizations += 1;
        self.since_refactor = 0;
        let (m, ntot) = (self.m, self.ntot);
        if m == 0 {
            self.d.copy_from_slice(&self.cost);
            return Ok(());
        }
        let binv = self.basis_inverse()?;
        for v in self.t.iter_mut() {
            *v = 0.0;
        }
        let mut rhs = vec![0.0; m];
        for k in 0..ntot {
            for &(i, a) in &self.cols[k] {
                for r in 0..m {
                    let b = binv[(r, i)];
                    if b != 0.0 {
                        self.t[r * ntot + k] += b * a;
                    }
                }
                if self.status[k] != Status::Basic {
                    rhs[i] -= a * self.x[k];
                }
            }
        }
        for r in 0..m {
            let mut v = 0.0;
            for i in 0..m {
                v += binv[(r, i)] * rhs[i];
            }
            self.x[self.head[r]] = v;
        }
        let y = self.duals_from(&binv);
        for k in 0..ntot {
            let mut d = self.cost[k];
            for &(i, a) in &self.cols[k] {
                d -= y[i] * a;
            }
            self.d[k] = if self.status[k] == Status::Basic { 0.0 } else { d };
        }
        Ok(())
    }

    fn duals_from(&self, binv: &DMatrix<f64>) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (r, &k) in self.head.iter().enumerate() {
            let c = self.cost[k];
            if c != 0.0 {
                for i in 0..m {
                    y[i] += c * binv[(r, i)];
                }
            }
        }
        y
    }

    fn duals(&self) -> Vec<f64> {
        if self.m == 0 {
            return Vec::new();
        }
        match self.basis_inverse() {
            Ok(binv) => self.duals_from(&binv),
            Err(_) => vec![0.0; self.m],
        }
    }

    fn can_move(&self, k: usize, dir: f64) -> bool {
        match self.status[k] {
            Status::Basic => false,
            Status::Free => true,
            Status::AtLower => dir > 0.0 && self.hi[k] > self.lo[k],
            Status::AtUpper => dir < 0.0 && self.hi[k] > self.lo[k],
        }
    }

    fn price(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for k in 0..self.ntot {
            let d = self.d[k];
            let dir = if d < -self.tol.optimality {
                1.0
            } else if d > self.tol.optimality {
                -1.0
            } else {
                continue;
            };
            if !self.can_move(k, dir) {
                continue;
            }
            if bland {
                return Some((k, dir));
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Some((k, dir));
            }
        }
        best
    }

    fn ratio(&self, q: usize, dir: f64, bland: bool) -> (Step, f64) {
        let ntot = self.ntot;
        let mut theta = f64::INFINITY;
        let mut step = Step::Unbounded;
        let mut best_alpha = 0.0;
        let mut best_head = usize::MAX;
        for r in 0..self.m {
            let alpha = self.t[r * ntot + q] * dir;
            if alpha.abs() <= self.tol.pivot {
                continue;
            }
            let k = self.head[r];
            let (limit, to_upper) = if alpha > 0.0 {
                if !self.lo[k].is_finite() {
                    continue;
                }
                (((self.x[k] - self.lo[k]) / alpha).max(0.0), false)
            } else {
                if !self.hi[k].is_finite() {
                    continue;
                }
                (((self.hi[k] - self.x[k]) / -alpha).max(0.0), true)
            };
            let better = if limit < theta - 1e-12 {
                true
            } else if limit <= theta + 1e-12 {
                if bland {
                    k < best_head
                } else {
                    alpha.abs() > best_alpha
                }
            } else {
                false
            };
            if better {
                theta = limit.min(theta);
                step = Step::Pivot { row: r, to_upper };
                best_alpha = alpha.abs();
                best_head = k;
            }
        }
        let span = self.hi[q] - self.lo[q];
        if span.is_finite() && span <= theta {
            return (Step::Flip, span);
        }
        (step, theta)
    }

    fn move_values(&mut self, q: usize, dir: f64, theta: f64) {
        if theta == 0.0 {
            return;
        }
        let ntot = self.ntot;
        self.x[q] += dir * theta;
        for r in 0..self.m {
            let a = self.t[r * ntot + q];
            if a != 0.0 {
                let k = self.head[r];
                self.x[k] -= a * dir * theta;
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let ntot = self.ntot;
        let piv = self.t[r * ntot + q];
        let mut pivot_row: Vec<(usize, f64)> = Vec::new();
        for k in 0..ntot {
            let v = self.t[r * ntot + k];
            if v != 0.0 {
                let scaled = v / piv;
                self.t[r * ntot + k] = scaled;
                pivot_row.push((k, scaled));
            }
        }
        self.t[r * ntot + q] = 1.0;
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * ntot + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * ntot..(i + 1) * ntot];
            for &(k, v) in &pivot_row {
                row[k] -= f * v;
            }
            row[q] = 0.0;
        }
        let f = self.d[q];
        if f != 0.0 {
            for &(k, v) in &pivot_row {
                self.d[k] -= f * v;
            }
        }
        self.d[q] = 0.0;
        self.head[r] = q;
        self.status[q] = Status::Basic;
        self.stats.pivots += 1;
        self.since_refactor += 1;
    }

    fn primal_infeasibility(&self) -> f64 {
        (0..self.ntot)
            .map(|k| (self.lo[k] - self.x[k]).max(self.x[k] - self.hi[k]).max(0.0))
            .fold(0.0, f64::max)
    }

    fn iterate(&mut self, cfg: &LpConfig, feas_tol: f64) -> Result<Outcome, LpError> {
        let mut stall = 0usize;
        let mut iterations = 0usize;
        let mut checks = 0usize;
        loop {
            iterations += 1;
            if iterations > cfg.max_iterations {
                return Err(LpError::NumericalFailure(format!(
                    "no convergence after {} iterations",
                    cfg.max_iterations
                )));
            }
            if self.since_refactor >= cfg.refactor_interval {
                self.refactor()?;
            }
            let bland = stall >= cfg.stall_threshold;
            let Some((q, dir)) = self.price(bland) else {
                if self.since_refactor > 0 {
                    self.refactor()?;
                    checks += 1;
                    if checks > 5 {
                        return Err(LpError::NumericalFailure("optimality check keeps failing".into()));
                    }
                    if self.price(bland).is_some() {
                        continue;
                    }
                }
                if self.primal_infeasibility() > feas_tol.max(1e-7) {
                    return Err(LpError::NumericalFailure("basic solution drifted out of bounds".into()));
                }
                return Ok(Outcome::Optimal);
            };
            let (step, theta) = self.ratio(q, dir, bland);
            if bland {
                self.stats.bland_pivots += 1;
            }
            if theta < 1e-12 {
                stall += 1;
            } else {
                stall = 0;
            }
            match step {
                Step::Unbounded => return Ok(Outcome::Unbounded),
                Step::Flip => {
                    self.move_values(q, dir, theta);
                    if dir > 0.0 {
                        self.x[q] = self.hi[q];
                        self.status[q] = Status::AtUpper;
                    } else {
                        self.x[q] = self.lo[q];
                        self.status[q] = Status::AtLower;
                    }
                    self.stats.bound_flips += 1;
                }
                Step::Pivot { row, to_upper } => {
                    self.move_values(q, dir, theta);
                    let leaving = self.head[row];
                    self.pivot(row, q);
                    if to_upper {
                        self.x[leaving] = self.hi[leaving];
                        self.status[leaving] = Status::AtUpper;
                    } else {
                        self.x[leaving] = self.lo[leaving];
                        self.status[leaving] = Status::AtLower;
                    }
                }
            }
        }
    }

    /// Pivots zero-valued artificials out of the basis and pins every
    /// artificial to zero.
    fn drive_out_artificials(&mut self) {
        let first_art = self.n + self.m;
        let ntot = self.ntot;
        for r in 0..self.m {
            if self.head[r] < first_art {
                continue;
            }
            let mut best = None;
            let mut best_abs = 1e-7;
            for k in 0..first_art {
                if self.status[k] == Status::Basic {
                    continue;
                }
                let a = self.t[r * ntot + k].abs();
                if a > best_abs {
                    best_abs = a;
                    best = Some(k);
                }
            }
            if let Some(k) = best {
                let leaving = self.head[r];
                self.pivot(r, k);
                self.x[leaving] = 0.0;
                self.status[leaving] = Status::AtLower;
            }
        }
        for k in first_art..ntot {
            self.hi[k] = 0.0;
            if self.status[k] != Status::Basic {
                self.x[k] = 0.0;
            }
        }
    }

    fn solution(&self, model: &MilpModel, status: LpStatus) -> LpSolution {
        let primal = self.x[..self.n].to_vec();
        let (dual, reduced_costs) = if status == LpStatus::Optimal {
            let y = self.duals();
            let d = (0..self.n)
                .map(|j| self.cost[j] - self.cols[j].iter().map(|&(i, a)| y[i] * a).sum::<f64>())
                .collect();
            (y, d)
        } else {
            (vec![0.0; self.m], vec![0.0; self.n])
        };
        let objective = match status {
            LpStatus::Optimal => model.objective_value(&primal),
            LpStatus::Unbounded => f64::NEG_INFINITY,
            LpStatus::Infeasible => f64::NAN,
        };
        LpSolution {
            status,
            primal,
            dual,
            reduced_costs,
            objective,
            farkas: None,
            stats: self.stats,
        }
    }
}
