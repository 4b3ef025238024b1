//! Cardinality hyperplanes and reduced-cost reasoning.
//!
//! Every improving solution lies on some hyperplane `1.x = k` with `k` inside
//! the range obtained from the two LPs `max / min { 1.x : Ax <= b,
//! c.x >= LB + 1, x in [0,1]^n }`. Each hyperplane carries its own LP
//! relaxation whose reduced costs give the constraint
//!
//! ```text
//!   sum_{j nonbasic at 0} |rc_j| x_j + sum_{j nonbasic at 1} |rc_j| (1 - x_j) <= UB - LB
//! ```
//!
//! satisfied by every solution at least as good as `LB`. All real-valued
//! comparisons here leave a [`MARGIN`] in the direction that never discards a
//! truly improving solution.

use thiserror::Error;

use crate::assignment::{consumed_gap_of, Coordinate, PartialAssignment};
use crate::family::{Certificate, Provenance};
use crate::model::Instance;
use crate::simplex::{solve_lp, BasisStatus, LpError, LpProblem, LpStatus, Relation, Sense};

/// One-sided safety margin on every real-valued pruning test.
pub const MARGIN: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("cardinality {k} outside [0, {n}]")]
    Cardinality { k: usize, n: usize },
    #[error("remaining gap {0} is negative; the node is already terminal")]
    NegativeGap(f64),
    #[error("reduced costs {sum} do not exceed the gap {gap}")]
    NotViolated { sum: f64, gap: f64 },
    #[error("unexpected LP status {0:?}")]
    Status(LpStatus),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CardinalityRange {
    pub k_min: usize,
    pub k_max: usize,
}

impl CardinalityRange {
    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.k_min..=self.k_max
    }

    pub fn contains(&self, k: usize) -> bool {
        (self.k_min..=self.k_max).contains(&k)
    }
}

/// How the reduced-cost budget is derived from the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GapConvention {
    /// `UB - LB`.
    #[default]
    Standard,
    /// `UB - (LB + 1)`, valid because objective values are integral.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarClass {
    Basic,
    NonbasicZero,
    NonbasicOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HyperplaneStatus {
    Open,
    Closed,
    Infeasible,
}

/// LP relaxation of one hyperplane `1.x = k`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneData {
    pub k: usize,
    pub status: HyperplaneStatus,
    pub ub_real: f64,
    pub ub_int: i64,
    pub xbar: Vec<f64>,
    /// Signed reduced costs; exactly zero for basic variables.
    pub rc: Vec<f64>,
    pub class: Vec<VarClass>,
}

impl HyperplaneData {
    pub fn n(&self) -> usize {
        self.class.len()
    }

    pub fn nonbasic_zero(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(|&j| self.class[j] == VarClass::NonbasicZero)
    }

    pub fn nonbasic_one(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(|&j| self.class[j] == VarClass::NonbasicOne)
    }

    pub fn basic(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(|&j| self.class[j] == VarClass::Basic)
    }

    /// LP-preferred value of `var`; basic variables round to the nearer bound.
    pub fn preferred(&self, var: usize) -> bool {
        match self.class[var] {
            VarClass::NonbasicZero => false,
            VarClass::NonbasicOne => true,
            VarClass::Basic => self.xbar[var] >= 0.5,
        }
    }

    pub fn gap(&self, lb: i64, convention: GapConvention) -> f64 {
        match convention {
            GapConvention::Standard => self.ub_real - lb as f64,
            GapConvention::Strict => self.ub_real - (lb as f64 + 1.0),
        }
    }

    pub fn close(&mut self) {
        if self.status == HyperplaneStatus::Open {
            self.status = HyperplaneStatus::Closed;
        }
    }
}

fn as_f64(v: &[i64]) -> Vec<f64> {
    v.iter().map(|&x| x as f64).collect()
}

fn knapsack_rows(inst: &Instance, mut p: LpProblem) -> LpProblem {
    for i in 0..inst.m() {
        p = p.with_row(
            as_f64(&inst.weights()[i]),
            Relation::Le,
            inst.capacity(i) as f64,
        );
    }
    p
}

/// Range of cardinalities an improving solution can have, or `None` when the
/// relaxation already shows that no solution beats `lb`.
pub fn cardinality_range(
    inst: &Instance,
    lb: i64,
) -> Result<Option<CardinalityRange>, BoundsError> {
    let n = inst.n();
    let build = |sense| {
        knapsack_rows(inst, LpProblem::unit_box(sense, vec![1.0; n])).with_row(
            as_f64(inst.profits()),
            Relation::Ge,
            lb as f64 + 1.0,
        )
    };
    let upper = solve_lp(&build(Sense::Maximize))?;
    match upper.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Ok(None),
        s => return Err(BoundsError::Status(s)),
    }
    let lower = solve_lp(&build(Sense::Minimize))?;
    match lower.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Ok(None),
        s => return Err(BoundsError::Status(s)),
    }
    let k_max = ((upper.objective + MARGIN).floor().max(0.0) as usize).min(n);
    let k_min = ((lower.objective - MARGIN).ceil().max(0.0) as usize).min(n);
    Ok((k_min <= k_max).then_some(CardinalityRange { k_min, k_max }))
}

/// Solves `max { c.x : Ax <= b, 1.x = k, x in [0,1]^n }`.
pub fn hyperplane_relaxation(inst: &Instance, k: usize) -> Result<HyperplaneData, BoundsError> {
    let n = inst.n();
    if k > n {
        return Err(BoundsError::Cardinality { k, n });
    }
    let p = knapsack_rows(
        inst,
        LpProblem::unit_box(Sense::Maximize, as_f64(inst.profits())),
    )
    .with_row(vec![1.0; n], Relation::Eq, k as f64);
    let r = solve_lp(&p)?;
    match r.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Ok(HyperplaneData {
                k,
                status: HyperplaneStatus::Infeasible,
                ub_real: f64::NEG_INFINITY,
                ub_int: i64::MIN,
                xbar: vec![0.0; n],
                rc: vec![0.0; n],
                class: vec![VarClass::Basic; n],
            })
        }
        s => return Err(BoundsError::Status(s)),
    }
    let class: Vec<VarClass> = r
        .basis
        .iter()
        .map(|b| match b {
            BasisStatus::Basic => VarClass::Basic,
            BasisStatus::AtLower => VarClass::NonbasicZero,
            BasisStatus::AtUpper => VarClass::NonbasicOne,
        })
        .collect();
    let rc = r
        .reduced_costs
        .iter()
        .zip(&class)
        .map(|(&d, &c)| if c == VarClass::Basic { 0.0 } else { d })
        .collect();
    Ok(HyperplaneData {
        k,
        status: HyperplaneStatus::Open,
        ub_real: r.objective,
        ub_int: (r.objective + MARGIN).floor() as i64,
        xbar: r.x,
        rc,
        class,
    })
}

/// Reduced-cost budget `UB - LB` before any deviation from the LP point.
pub fn rc_gap(h: &HyperplaneData, lb: i64) -> f64 {
    h.gap(lb, GapConvention::Standard)
}

/// Budget spent by the deviations of `assignment` from the LP point.
pub fn consumed_gap(h: &HyperplaneData, assignment: &PartialAssignment) -> f64 {
    consumed_gap_of(h, assignment.coords())
}

/// Free nonbasic variables whose reduced cost alone exceeds the remaining
/// budget, paired with the only value an improving solution can give them.
pub fn implied_fixings(
    h: &HyperplaneData,
    gap_remaining: f64,
    assignment: &PartialAssignment,
) -> Result<Vec<Coordinate>, BoundsError> {
    if gap_remaining < -MARGIN {
        return Err(BoundsError::NegativeGap(gap_remaining));
    }
    Ok(assignment
        .free_vars()
        .filter(|&j| h.class[j] != VarClass::Basic && h.rc[j].abs() > gap_remaining + MARGIN)
        .map(|j| Coordinate::new(j, h.preferred(j)))
        .collect())
}

/// Smallest-first subset of `opposite` whose reduced costs still exceed `gap`.
///
/// Returns indices into `opposite`, in input order.
pub(crate) fn minimal_exceeding(opposite: &[(Coordinate, f64)], gap: f64) -> Option<Vec<usize>> {
    let mut order: Vec<usize> = (0..opposite.len()).collect();
    order.sort_by(|&a, &b| {
        opposite[b]
            .1
            .total_cmp(&opposite[a].1)
            .then(opposite[a].0.var.cmp(&opposite[b].0.var))
    });
    let threshold = gap + MARGIN;
    let mut sum = 0.0;
    let mut take = None;
    if sum > threshold {
        take = Some(0);
    } else {
        for (i, &idx) in order.iter().enumerate() {
            sum += opposite[idx].1;
            if sum > threshold {
                take = Some(i + 1);
                break;
            }
        }
    }
    let len = take?;
    let mut chosen: Vec<usize> = order[..len].to_vec();
    // Drop members in ascending order of |rc| while the sum stays above the gap.
    for pos in (0..chosen.len()).rev() {
        let without: f64 = chosen
            .iter()
            .enumerate()
            .filter(|&(p, _)| p != pos)
            .map(|(_, &idx)| opposite[idx].1)
            .sum();
        if without > threshold {
            chosen.remove(pos);
        }
    }
    chosen.sort_unstable();
    Some(chosen)
}

/// Certificate built from a violated reduced-cost constraint.
///
/// `opposite` lists the coordinates set away from the LP point, with `|rc|`.
pub fn rc_certificate(
    h: &HyperplaneData,
    lb: i64,
    convention: GapConvention,
    opposite: &[(Coordinate, f64)],
) -> Result<Certificate, BoundsError> {
    let gap = h.gap(lb, convention);
    let sum: f64 = opposite.iter().map(|o| o.1).sum();
    let chosen = minimal_exceeding(opposite, gap).ok_or(BoundsError::NotViolated { sum, gap })?;
    let coords = chosen.into_iter().map(|i| opposite[i].0).collect();
    Ok(Certificate::new(coords, Provenance::ReducedCost))
}
