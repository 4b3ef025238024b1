//! Dense bounded-variable primal simplex.
//!
//! Two phases over a full tableau `B^-1 A`. Structural variables carry finite
//! lower bounds and possibly infinite upper bounds; nonbasic variables rest at
//! one of their bounds. Pricing is Dantzig's largest reduced cost, switching to
//! Bland's smallest-index rule after `10 (n + m)` consecutive degenerate pivots.
//! The tableau is rebuilt from the original matrix every
//! [`REFACTOR_INTERVAL`] pivots.

use thiserror::Error;

/// Pivots between two tableau rebuilds.
pub const REFACTOR_INTERVAL: usize = 100;
/// Row feasibility tolerance, scaled by `1 + |rhs|`.
pub const PRIMAL_TOL: f64 = 1e-9;
/// Reduced-cost tolerance for the optimality and sign invariants.
pub const DUAL_TOL: f64 = 1e-7;
/// Duality gap tolerance, scaled by `1 + |objective|`.
pub const GAP_TOL: f64 = 1e-6;

const PIVOT_TOL: f64 = 1e-9;
const PRICE_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid bounds for variable {var}: [{lower}, {upper}]")]
    Bounds { var: usize, lower: f64, upper: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("iteration limit of {0} pivots reached")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LpProblem {
    /// Problem over `[0, 1]^n` with no rows yet.
    pub fn unit_box(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            sense,
            objective,
            rows: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![1.0; n],
        }
    }

    pub fn with_row(mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        self.rows.push(LpRow {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn n(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.n();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Dimension(format!(
                "{} objective coefficients but {} lower / {} upper bounds",
                n,
                self.lower.len(),
                self.upper.len()
            )));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(LpError::Dimension(format!(
                    "row {} has {} coefficients, expected {}",
                    i,
                    row.coeffs.len(),
                    n
                )));
            }
        }
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            if !l.is_finite() || l > u || u.is_nan() {
                return Err(LpError::Bounds {
                    var: j,
                    lower: l,
                    upper: u,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisStatus {
    Basic,
    AtLower,
    AtUpper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub basis: Vec<BasisStatus>,
    /// Signed reduced costs `c_j - y.a_j` in the problem's own sense.
    pub reduced_costs: Vec<f64>,
    /// Row duals in the problem's own sense.
    pub duals: Vec<f64>,
    pub pivots: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColState {
    Basic,
    AtLower,
    AtUpper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    m: usize,
    ncols: usize,
    n_struct: usize,
    /// Original constraint matrix including slack and artificial columns.
    a: Vec<f64>,
    rhs: Vec<f64>,
    /// `B^-1 A`, row-major.
    t: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<ColState>,
    kind: Vec<ColKind>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    d: Vec<f64>,
    /// Column holding `sign * e_i` for row `i`, used to read `B^-1`.
    unit_col: Vec<usize>,
    unit_sign: Vec<f64>,
    pivots: usize,
    since_refactor: usize,
}

enum Step {
    Optimal,
    Unbounded,
    Moved { degenerate: bool },
}

impl Tableau {
    fn build(p: &LpProblem) -> Self {
        let n = p.n();
        let m = p.rows.len();
        let mut kind = vec![ColKind::Structural; n];
        let mut lower = p.lower.clone();
        let mut upper = p.upper.clone();
        let mut cols: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|j| {
                p.rows
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| r.coeffs[j] != 0.0)
                    .map(|(i, r)| (i, r.coeffs[j]))
                    .collect()
            })
            .collect();
        let mut slack_of = vec![None; m];
        for (i, row) in p.rows.iter().enumerate() {
            let sign = match row.relation {
                Relation::Le => 1.0,
                Relation::Ge => -1.0,
                Relation::Eq => continue,
            };
            slack_of[i] = Some((cols.len(), sign));
            cols.push(vec![(i, sign)]);
            kind.push(ColKind::Slack);
            lower.push(0.0);
            upper.push(f64::INFINITY);
        }

        let mut basis = vec![usize::MAX; m];
        let mut unit_col = vec![usize::MAX; m];
        let mut unit_sign = vec![1.0; m];
        let mut beta = vec![0.0; m];
        for (i, row) in p.rows.iter().enumerate() {
            let residual = row.rhs - (0..n).map(|j| row.coeffs[j] * p.lower[j]).sum::<f64>();
            match slack_of[i] {
                Some((col, sign)) if sign * residual >= 0.0 => {
                    basis[i] = col;
                    beta[i] = sign * residual;
                    unit_col[i] = col;
                    unit_sign[i] = sign;
                }
                other => {
                    let sign = if residual < 0.0 { -1.0 } else { 1.0 };
                    let col = cols.len();
                    cols.push(vec![(i, sign)]);
                    kind.push(ColKind::Artificial);
                    lower.push(0.0);
                    upper.push(f64::INFINITY);
                    basis[i] = col;
                    beta[i] = residual.abs();
                    match other {
                        Some((slack, s)) => {
                            unit_col[i] = slack;
                            unit_sign[i] = s;
                        }
                        None => {
                            unit_col[i] = col;
                            unit_sign[i] = sign;
                        }
                    }
                }
            }
        }

        let ncols = cols.len();
        let mut a = vec![0.0; m * ncols];
        for (j, col) in cols.iter().enumerate() {
            for &(i, v) in col {
                a[i * ncols + j] = v;
            }
        }
        let mut state = vec![ColState::AtLower; ncols];
        for &b in &basis {
            state[b] = ColState::Basic;
        }
        let rhs = p.rows.iter().map(|r| r.rhs).collect();
        let mut tab = Self {
            m,
            ncols,
            n_struct: n,
            t: a.clone(),
            a,
            rhs,
            beta,
            basis,
            state,
            kind,
            lower,
            upper,
            cost: vec![0.0; ncols],
            d: vec![0.0; ncols],
            unit_col,
            unit_sign,
            pivots: 0,
            since_refactor: 0,
        };
        // Basic columns are +-e_i; normalise rows so the basis is the identity.
        for i in 0..m {
            let s = tab.a[i * ncols + tab.basis[i]];
            if s != 1.0 {
                for j in 0..ncols {
                    tab.t[i * ncols + j] /= s;
                }
            }
        }
        tab
    }

    fn has_artificials(&self) -> bool {
        self.kind.contains(&ColKind::Artificial)
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            ColState::AtUpper => self.upper[j],
            _ => self.lower[j],
        }
    }

    fn value(&self, j: usize) -> f64 {
        match self.state[j] {
            ColState::Basic => {
                let r = self.basis.iter().position(|&b| b == j).unwrap();
                self.beta[r]
            }
            _ => self.nonbasic_value(j),
        }
    }

    fn set_cost(&mut self, cost: Vec<f64>) {
        self.cost = cost;
        self.recompute_reduced_costs();
    }

    fn recompute_reduced_costs(&mut self) {
        let nc = self.ncols;
        for j in 0..nc {
            let mut z = 0.0;
            for r in 0..self.m {
                z += self.cost[self.basis[r]] * self.t[r * nc + j];
            }
            self.d[j] = self.cost[j] - z;
        }
        for &b in &self.basis {
            self.d[b] = 0.0;
        }
    }

    /// Rebuilds `B^-1 A` and the basic values from the original data.
    fn refactor(&mut self) -> Result<(), LpError> {
        let (m, nc) = (self.m, self.ncols);
        if m == 0 {
            self.since_refactor = 0;
            return Ok(());
        }
        // Gauss-Jordan on [B | A | r] with partial pivoting.
        let w = m + nc + 1;
        let mut aug = vec![0.0; m * w];
        for i in 0..m {
            let mut r = self.rhs[i];
            for j in 0..nc {
                let v = self.a[i * nc + j];
                aug[i * w + m + j] = v;
                if self.state[j] != ColState::Basic {
                    r -= v * self.nonbasic_value(j);
                }
            }
            aug[i * w + m + nc] = r;
            for (k, &b) in self.basis.iter().enumerate() {
                aug[i * w + k] = self.a[i * nc + b];
            }
        }
        for col in 0..m {
            let piv = (col..m)
                .max_by(|&x, &y| aug[x * w + col].abs().total_cmp(&aug[y * w + col].abs()))
                .unwrap();
            if aug[piv * w + col].abs() < 1e-12 {
                return Err(LpError::Numerical(
                    "singular basis during refactorization".into(),
                ));
            }
            if piv != col {
                for j in 0..w {
                    aug.swap(piv * w + j, col * w + j);
                }
            }
            let p = aug[col * w + col];
            for j in 0..w {
                aug[col * w + j] /= p;
            }
            for i in 0..m {
                if i == col {
                    continue;
                }
                let f = aug[i * w + col];
                if f != 0.0 {
                    for j in 0..w {
                        aug[i * w + j] -= f * aug[col * w + j];
                    }
                }
            }
        }
        // Row `k` of the reduced system now corresponds to basis position `k`.
        for k in 0..m {
            for j in 0..nc {
                self.t[k * nc + j] = aug[k * w + m + j];
            }
            self.beta[k] = aug[k * w + m + nc];
            self.t[k * nc + self.basis[k]] = 1.0;
        }
        self.since_refactor = 0;
        self.recompute_reduced_costs();
        Ok(())
    }

    fn eligible(&self, j: usize, allow_artificial: bool) -> Option<f64> {
        if self.state[j] == ColState::Basic {
            return None;
        }
        if self.kind[j] == ColKind::Artificial && !allow_artificial {
            return None;
        }
        if self.upper[j] - self.lower[j] <= 0.0 {
            return None;
        }
        match self.state[j] {
            ColState::AtLower if self.d[j] > PRICE_TOL => Some(self.d[j]),
            ColState::AtUpper if self.d[j] < -PRICE_TOL => Some(-self.d[j]),
            _ => None,
        }
    }

    fn step(&mut self, bland: bool, allow_artificial: bool) -> Result<Step, LpError> {
        let nc = self.ncols;
        let entering = if bland {
            (0..nc).find(|&j| self.eligible(j, allow_artificial).is_some())
        } else {
            let mut best: Option<(usize, f64)> = None;
            for j in 0..nc {
                if let Some(score) = self.eligible(j, allow_artificial) {
                    if best.is_none_or(|(_, s)| score > s) {
                        best = Some((j, score));
                    }
                }
            }
            best.map(|(j, _)| j)
        };
        let Some(q) = entering else {
            return Ok(Step::Optimal);
        };
        let dir = if self.state[q] == ColState::AtLower {
            1.0
        } else {
            -1.0
        };

        // Ratio test: basic values move by -dir * t * T[:, q].
        let mut step = self.upper[q] - self.lower[q];
        let mut leave: Option<(usize, bool)> = None;
        let mut leave_pivot = 0.0f64;
        for r in 0..self.m {
            let alpha = dir * self.t[r * nc + q];
            let b = self.basis[r];
            let (limit, to_lower) = if alpha > PIVOT_TOL {
                ((self.beta[r] - self.lower[b]) / alpha, true)
            } else if alpha < -PIVOT_TOL {
                if self.upper[b].is_infinite() {
                    continue;
                }
                ((self.upper[b] - self.beta[r]) / -alpha, false)
            } else {
                continue;
            };
            let limit = limit.max(0.0);
            let better = if limit < step - 1e-12 {
                true
            } else if limit <= step + 1e-12 {
                // Ties with a bound flip keep the flip; ties between rows follow the pricing mode.
                match leave {
                    None => false,
                    Some((lr, _)) if bland => b < self.basis[lr],
                    Some(_) => alpha.abs() > leave_pivot,
                }
            } else {
                false
            };
            if better {
                step = limit;
                leave = Some((r, to_lower));
                leave_pivot = alpha.abs();
            }
        }
        if step.is_infinite() {
            return Ok(Step::Unbounded);
        }
        let degenerate = step < 1e-12;

        for r in 0..self.m {
            self.beta[r] -= dir * step * self.t[r * nc + q];
        }
        match leave {
            None => {
                self.state[q] = if dir > 0.0 {
                    ColState::AtUpper
                } else {
                    ColState::AtLower
                };
                self.pivots += 1;
                self.since_refactor += 1;
            }
            Some((r, to_lower)) => {
                let old = self.basis[r];
                let entering_value = self.nonbasic_value(q) + dir * step;
                self.state[old] = if to_lower {
                    ColState::AtLower
                } else {
                    ColState::AtUpper
                };
                self.state[q] = ColState::Basic;
                self.basis[r] = q;
                self.beta[r] = entering_value;
                self.pivot(r, q);
                self.pivots += 1;
                self.since_refactor += 1;
                if self.since_refactor >= REFACTOR_INTERVAL {
                    self.refactor()?;
                }
            }
        }
        Ok(Step::Moved { degenerate })
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.ncols;
        let p = self.t[r * nc + q];
        for j in 0..nc {
            self.t[r * nc + j] /= p;
        }
        let (before, rest) = self.t.split_at_mut(r * nc);
        let (prow, after) = rest.split_at_mut(nc);
        for row in before.chunks_mut(nc).chain(after.chunks_mut(nc)) {
            let f = row[q];
            if f != 0.0 {
                for j in 0..nc {
                    row[j] -= f * prow[j];
                }
                row[q] = 0.0;
            }
        }
        prow[q] = 1.0;
        let f = self.d[q];
        if f != 0.0 {
            for j in 0..nc {
                self.d[j] -= f * prow[j];
            }
        }
        self.d[q] = 0.0;
    }

    fn run_phase(&mut self, allow_artificial: bool, limit: usize) -> Result<bool, LpError> {
        let bland_after = 10 * (self.n_struct + self.m);
        let mut degenerate_run = 0usize;
        let mut bland = false;
        let mut cleanups = 0;
        loop {
            if self.pivots > limit {
                return Err(LpError::IterationLimit(limit));
            }
            match self.step(bland, allow_artificial)? {
                Step::Unbounded => return Ok(false),
                Step::Moved { degenerate } => {
                    if degenerate {
                        degenerate_run += 1;
                        if degenerate_run > bland_after {
                            bland = true;
                        }
                    } else {
                        degenerate_run = 0;
                    }
                }
                Step::Optimal => {
                    // Confirm optimality on a freshly rebuilt tableau.
                    if self.since_refactor == 0 {
                        return Ok(true);
                    }
                    self.refactor()?;
                    cleanups += 1;
                    if cleanups > 20 {
                        return Err(LpError::Numerical("pricing does not settle".into()));
                    }
                }
            }
        }
    }
}

/// Solves `p` to optimality, or reports infeasibility or unboundedness.
pub fn solve_lp(p: &LpProblem) -> Result<LpResult, LpError> {
    p.validate()?;
    let n = p.n();
    let m = p.rows.len();
    let sign = match p.sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let mut tab = Tableau::build(p);
    let limit = 200 * (tab.ncols + m) + 10_000;

    if tab.has_artificials() {
        let cost = tab
            .kind
            .iter()
            .map(|&k| if k == ColKind::Artificial { -1.0 } else { 0.0 })
            .collect();
        tab.set_cost(cost);
        tab.refactor()?;
        tab.run_phase(true, limit)?;
        let infeasibility: f64 = (0..tab.ncols)
            .filter(|&j| tab.kind[j] == ColKind::Artificial)
            .map(|j| tab.value(j))
            .sum();
        let scale = 1.0 + p.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
        if infeasibility > 1e-9 * scale {
            return Ok(infeasible_result(n, m, tab.pivots));
        }
        for j in 0..tab.ncols {
            if tab.kind[j] == ColKind::Artificial {
                tab.upper[j] = 0.0;
                if tab.state[j] == ColState::AtUpper {
                    tab.state[j] = ColState::AtLower;
                }
            }
        }
    }

    let mut cost = vec![0.0; tab.ncols];
    for j in 0..n {
        cost[j] = sign * p.objective[j];
    }
    tab.set_cost(cost);
    tab.refactor()?;
    if !tab.run_phase(false, limit)? {
        return Ok(LpResult {
            status: LpStatus::Unbounded,
            ..infeasible_result(n, m, tab.pivots)
        });
    }

    let x: Vec<f64> = (0..n).map(|j| tab.value(j)).collect();
    let nc = tab.ncols;
    let duals_max: Vec<f64> = (0..m)
        .map(|i| {
            let col = tab.unit_col[i];
            (0..m)
                .map(|r| tab.cost[tab.basis[r]] * tab.t[r * nc + col])
                .sum::<f64>()
                / tab.unit_sign[i]
        })
        .collect();
    let reduced_costs: Vec<f64> = (0..n)
        .map(|j| match tab.state[j] {
            ColState::Basic => 0.0,
            _ => {
                let ya: f64 = (0..m).map(|i| duals_max[i] * p.rows[i].coeffs[j]).sum();
                sign * (sign * p.objective[j] - ya)
            }
        })
        .collect();
    let basis = (0..n)
        .map(|j| match tab.state[j] {
            ColState::Basic => BasisStatus::Basic,
            ColState::AtLower => BasisStatus::AtLower,
            ColState::AtUpper => BasisStatus::AtUpper,
        })
        .collect();
    let objective = x.iter().zip(&p.objective).map(|(a, b)| a * b).sum();
    Ok(LpResult {
        status: LpStatus::Optimal,
        x,
        objective,
        basis,
        reduced_costs,
        duals: duals_max.iter().map(|y| sign * y).collect(),
        pivots: tab.pivots,
    })
}

fn infeasible_result(n: usize, m: usize, pivots: usize) -> LpResult {
    LpResult {
        status: LpStatus::Infeasible,
        x: vec![0.0; n],
        objective: f64::NAN,
        basis: vec![BasisStatus::AtLower; n],
        reduced_costs: vec![0.0; n],
        duals: vec![0.0; m],
        pivots,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    NotOptimal(LpStatus),
    Shape(String),
    PrimalResidual {
        row: usize,
        excess: f64,
    },
    BoundViolation {
        var: usize,
        value: f64,
    },
    BasicReducedCost {
        var: usize,
        rc: f64,
    },
    DualSign {
        var: usize,
        rc: f64,
    },
    RowDualSign {
        row: usize,
        dual: f64,
    },
    ReducedCostMismatch {
        var: usize,
        stated: f64,
        recomputed: f64,
    },
    NotAtBound {
        var: usize,
        value: f64,
    },
    DualityGap {
        primal: f64,
        dual: f64,
    },
    ObjectiveMismatch {
        stated: f64,
        recomputed: f64,
    },
}

/// Recomputes every optimality certificate of `r` from scratch.
pub fn check_certificates(p: &LpProblem, r: &LpResult) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if r.status != LpStatus::Optimal {
        out.push(Diagnostic::NotOptimal(r.status));
        return out;
    }
    let n = p.n();
    let m = p.rows.len();
    if r.x.len() != n || r.basis.len() != n || r.reduced_costs.len() != n || r.duals.len() != m {
        out.push(Diagnostic::Shape(
            "result vectors do not match the problem".into(),
        ));
        return out;
    }
    // Work in maximisation form.
    let s = if p.sense == Sense::Maximize {
        1.0
    } else {
        -1.0
    };

    for (i, row) in p.rows.iter().enumerate() {
        let lhs: f64 = row.coeffs.iter().zip(&r.x).map(|(a, x)| a * x).sum();
        let tol = PRIMAL_TOL * (1.0 + row.rhs.abs());
        let excess = match row.relation {
            Relation::Le => lhs - row.rhs,
            Relation::Ge => row.rhs - lhs,
            Relation::Eq => (lhs - row.rhs).abs(),
        };
        if excess > tol {
            out.push(Diagnostic::PrimalResidual { row: i, excess });
        }
        let y = s * r.duals[i];
        let bad = match row.relation {
            Relation::Le => y < -DUAL_TOL,
            Relation::Ge => y > DUAL_TOL,
            Relation::Eq => false,
        };
        if bad {
            out.push(Diagnostic::RowDualSign {
                row: i,
                dual: r.duals[i],
            });
        }
    }
    for j in 0..n {
        let v = r.x[j];
        if v < p.lower[j] - PRIMAL_TOL || v > p.upper[j] + PRIMAL_TOL {
            out.push(Diagnostic::BoundViolation { var: j, value: v });
        }
        let rc = s * r.reduced_costs[j];
        let recomputed = p.objective[j]
            - (0..m)
                .map(|i| r.duals[i] * p.rows[i].coeffs[j])
                .sum::<f64>();
        match r.basis[j] {
            BasisStatus::Basic => {
                if rc.abs() > DUAL_TOL {
                    out.push(Diagnostic::BasicReducedCost {
                        var: j,
                        rc: r.reduced_costs[j],
                    });
                }
                if (s * recomputed).abs() > DUAL_TOL * (1.0 + p.objective[j].abs()) {
                    out.push(Diagnostic::BasicReducedCost {
                        var: j,
                        rc: recomputed,
                    });
                }
            }
            status => {
                let fixed = p.lower[j] == p.upper[j];
                let (bound, sign_ok) = if status == BasisStatus::AtLower {
                    (p.lower[j], fixed || rc <= DUAL_TOL)
                } else {
                    (p.upper[j], fixed || rc >= -DUAL_TOL)
                };
                if !sign_ok {
                    out.push(Diagnostic::DualSign {
                        var: j,
                        rc: r.reduced_costs[j],
                    });
                }
                if (v - bound).abs() > PRIMAL_TOL {
                    out.push(Diagnostic::NotAtBound { var: j, value: v });
                }
                if (recomputed - r.reduced_costs[j]).abs() > DUAL_TOL * (1.0 + p.objective[j].abs())
                {
                    out.push(Diagnostic::ReducedCostMismatch {
                        var: j,
                        stated: r.reduced_costs[j],
                        recomputed,
                    });
                }
            }
        }
    }
    let primal: f64 = p.objective.iter().zip(&r.x).map(|(c, x)| c * x).sum();
    if (primal - r.objective).abs() > GAP_TOL * (1.0 + primal.abs()) {
        out.push(Diagnostic::ObjectiveMismatch {
            stated: r.objective,
            recomputed: primal,
        });
    }
    // Lagrangian bound y.b + sum_j max over the box of (c_j - y.a_j) x_j.
    let mut dual = (0..m).map(|i| s * r.duals[i] * p.rows[i].rhs).sum::<f64>();
    for j in 0..n {
        let rc = s
            * (p.objective[j]
                - (0..m)
                    .map(|i| r.duals[i] * p.rows[i].coeffs[j])
                    .sum::<f64>());
        dual += if rc > 0.0 {
            rc * p.upper[j]
        } else {
            rc * p.lower[j]
        };
    }
    let dual = s * dual;
    let gap = (primal - dual).abs();
    // A NaN gap must also be reported.
    if gap.is_nan() || gap > GAP_TOL * (1.0 + primal.abs()) {
        out.push(Diagnostic::DualityGap { primal, dual });
    }
    out
}
