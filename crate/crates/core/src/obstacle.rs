//! One descent of resolution search on a hyperplane.
//!
//! Starting from `u(F)` the descent
//!
//! 1. checks the node (capacities, cardinality, reduced-cost budget);
//! 2. fixes every free nonbasic variable whose reduced cost alone exceeds the
//!    remaining budget (these fixings are consequences, never recorded);
//! 3. waxes: repeatedly sets the free nonbasic variable of largest `|rc|` to
//!    its LP value, re-checking after each step;
//! 4. hands the last `spb_size` free variables to branch and bound.
//!
//! Whichever step fails yields a certificate made of family and waxed
//! coordinates only. A coordinate fixed in step 2 that takes part in a
//! capacity or cardinality conflict is replaced by the deviations that forced
//! it, so the certificate stays terminal on its own.

use std::collections::HashMap;
use std::time::Instant;

use thiserror::Error;

use crate::assignment::{Coordinate, Origin, PartialAssignment};
use crate::bnb::{solve_subproblem, BnbConfig, BnbError, SolutionSink, Subproblem};
use crate::bounds::{
    implied_fixings, minimal_exceeding, BoundsError, GapConvention, HyperplaneData,
    HyperplaneStatus, VarClass, MARGIN,
};
use crate::family::{Certificate, ClauseFamily, FamilyError, Provenance};
use crate::incumbent::Incumbent;
use crate::model::{FullSolution, Instance};

#[derive(Debug, Error, PartialEq)]
pub enum ObstacleError {
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Bnb(#[from] BnbError),
    #[error("hyperplane {0} is not open")]
    NotOpen(usize),
    #[error("ones weigh {sum} but constraint allows {capacity}: no violation")]
    CapacityNotViolated { sum: i64, capacity: i64 },
    #[error("cardinality {k} is still reachable")]
    CardinalityNotViolated { k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObstacleConfig {
    pub spb_size: usize,
    pub final_dfs_size: usize,
    pub gap: GapConvention,
}

/// Where the descent stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// The hyperplane bound is already no better than the incumbent.
    Root,
    Consistency,
    ImplicitWaning,
    Waxing,
    BranchAndBound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleOutcome {
    /// Best value found during this descent, if it improved the incumbent.
    pub try_value: Option<i64>,
    pub best_solution: Option<FullSolution>,
    pub certificate: Certificate,
    pub phase: Phase,
    /// False when a deadline interrupted branch and bound; the certificate is
    /// then meaningless and must not be recorded.
    pub completed: bool,
    pub waxed: usize,
    pub implied: usize,
    pub bnb_nodes: u64,
}

/// Shrinks a capacity conflict to a minimal set of items set to one.
pub fn wane_capacity(
    inst: &Instance,
    row: usize,
    ones: &[Coordinate],
) -> Result<Certificate, ObstacleError> {
    let capacity = inst.capacity(row);
    let w = |c: &Coordinate| inst.weight(row, c.var);
    let sum: i64 = ones.iter().map(w).sum();
    if sum <= capacity {
        return Err(ObstacleError::CapacityNotViolated { sum, capacity });
    }
    let mut order: Vec<usize> = (0..ones.len()).collect();
    order.sort_by(|&a, &b| {
        w(&ones[b])
            .cmp(&w(&ones[a]))
            .then(ones[a].var.cmp(&ones[b].var))
    });
    let mut acc = 0;
    let mut len = 0;
    for &idx in &order {
        acc += w(&ones[idx]);
        len += 1;
        if acc > capacity {
            break;
        }
    }
    let mut chosen: Vec<usize> = order[..len].to_vec();
    for pos in (0..chosen.len()).rev() {
        let without: i64 = chosen
            .iter()
            .enumerate()
            .filter(|&(p, _)| p != pos)
            .map(|(_, &idx)| w(&ones[idx]))
            .sum();
        if without > capacity {
            chosen.remove(pos);
        }
    }
    chosen.sort_unstable();
    Ok(Certificate::new(
        chosen.into_iter().map(|i| ones[i]).collect(),
        Provenance::CapacityViolation,
    ))
}

/// Certificate for a node that can no longer reach cardinality `k`.
pub fn wane_cardinality(
    k: usize,
    assignment: &PartialAssignment,
) -> Result<Certificate, ObstacleError> {
    let n = assignment.n();
    let pick = |value: bool, count: usize| -> Vec<Coordinate> {
        (0..n)
            .filter(|&j| assignment.get(j) == Some(value))
            .take(count)
            .map(|j| Coordinate::new(j, value))
            .collect()
    };
    let coords = if assignment.count_ones() > k {
        pick(true, k + 1)
    } else if assignment.count_zeros() > n - k {
        pick(false, n - k + 1)
    } else {
        return Err(ObstacleError::CardinalityNotViolated { k });
    };
    Ok(Certificate::new(coords, Provenance::CardinalityViolation))
}

/// Reports branch-and-bound solutions to the shared incumbent.
struct IncumbentSink<'a> {
    inc: &'a Incumbent,
    best: Option<(Vec<bool>, i64)>,
}

impl SolutionSink for IncumbentSink<'_> {
    fn bound(&self) -> i64 {
        self.inc.lb()
    }

    fn report(&mut self, x: &[bool], value: i64) {
        if self.inc.offer(x, value) && self.best.as_ref().is_none_or(|b| value > b.1) {
            self.best = Some((x.to_vec(), value));
        }
    }
}

struct Descent<'a> {
    inst: &'a Instance,
    h: &'a HyperplaneData,
    pa: PartialAssignment,
    gap: f64,
    /// Deviations that forced each implied fixing.
    reasons: HashMap<usize, Vec<Coordinate>>,
}

impl Descent<'_> {
    fn opposite(&self) -> Vec<(Coordinate, f64)> {
        self.pa
            .coords()
            .filter(|&c| self.h.is_opposite(c))
            .map(|c| (c, self.h.rc[c.var].abs()))
            .collect()
    }

    fn ones(&self) -> Vec<Coordinate> {
        self.pa.coords().filter(|c| c.value).collect()
    }

    /// Replaces implied coordinates by their reasons, orders by assignment
    /// position and fills in the fresh order.
    fn finalize(&self, cert: Certificate) -> Certificate {
        let mut coords: Vec<Coordinate> = Vec::with_capacity(cert.coords.len());
        for c in cert.coords {
            match self.pa.origin(c.var) {
                Some(Origin::Implied) => coords.extend(self.reasons[&c.var].iter().copied()),
                _ => coords.push(c),
            }
        }
        coords.sort_by_key(|c| self.pa.position(c.var));
        coords.dedup();
        let fresh = coords
            .iter()
            .copied()
            .filter(|c| self.pa.origin(c.var) != Some(Origin::Family))
            .collect();
        Certificate {
            coords,
            provenance: cert.provenance,
            fresh_order: Vec::new(),
        }
        .with_fresh_order(fresh)
    }

    /// Shortest certificate for any violated check, if the node is terminal.
    fn check(&self) -> Result<Option<Certificate>, ObstacleError> {
        let mut candidates = Vec::new();
        let ones = self.ones();
        for row in 0..self.inst.m() {
            if self.pa.consumed()[row] > self.inst.capacity(row) {
                candidates.push(self.finalize(wane_capacity(self.inst, row, &ones)?));
            }
        }
        let n = self.pa.n();
        if self.pa.count_ones() > self.h.k || self.pa.count_zeros() > n - self.h.k {
            candidates.push(self.finalize(wane_cardinality(self.h.k, &self.pa)?));
        }
        if self.pa.consumed_gap() > self.gap + MARGIN {
            let opposite = self.opposite();
            let sum: f64 = opposite.iter().map(|o| o.1).sum();
            let chosen = minimal_exceeding(&opposite, self.gap)
                .ok_or(BoundsError::NotViolated { sum, gap: self.gap })?;
            let coords = chosen.into_iter().map(|i| opposite[i].0).collect();
            candidates.push(self.finalize(Certificate::new(coords, Provenance::ReducedCost)));
        }
        Ok(candidates.into_iter().min_by_key(|c| c.len()))
    }

    fn apply_implied(&mut self) -> Result<usize, ObstacleError> {
        let remaining = self.gap - self.pa.consumed_gap();
        let fixes = implied_fixings(self.h, remaining, &self.pa)?;
        if fixes.is_empty() {
            return Ok(0);
        }
        let opposite = self.opposite();
        for &c in &fixes {
            let need = self.gap - self.h.rc[c.var].abs();
            let reason = minimal_exceeding(&opposite, need)
                .expect("fixing is forced by the current deviations")
                .into_iter()
                .map(|i| opposite[i].0)
                .collect();
            self.reasons.insert(c.var, reason);
            self.pa.assign(self.inst, self.h, c, Origin::Implied);
        }
        Ok(fixes.len())
    }
}

/// Runs one descent from `u(family)` on hyperplane `h`.
pub fn obstacle(
    family: &ClauseFamily,
    h: &HyperplaneData,
    inst: &Instance,
    incumbent: &Incumbent,
    cfg: &ObstacleConfig,
    deadline: Option<Instant>,
) -> Result<ObstacleOutcome, ObstacleError> {
    if h.status == HyperplaneStatus::Infeasible {
        return Err(ObstacleError::NotOpen(h.k));
    }
    let lb = incumbent.lb();
    let gap = h.gap(lb, cfg.gap);
    let u = family.u_of()?;
    let mut d = Descent {
        inst,
        h,
        pa: PartialAssignment::new(inst),
        gap,
        reasons: HashMap::new(),
    };
    let outcome =
        |certificate: Certificate, phase: Phase, d: &Descent, waxed: usize| ObstacleOutcome {
            try_value: None,
            best_solution: None,
            certificate,
            phase,
            completed: true,
            waxed,
            implied: d.reasons.len(),
            bnb_nodes: 0,
        };

    if h.ub_int <= lb || gap < -MARGIN {
        return Ok(outcome(
            Certificate::empty(Provenance::ReducedCost),
            Phase::Root,
            &d,
            0,
        ));
    }
    for (c, _) in &u {
        d.pa.assign(inst, h, *c, Origin::Family);
    }
    if let Some(cert) = d.check()? {
        return Ok(outcome(cert, Phase::Consistency, &d, 0));
    }

    d.apply_implied()?;
    if let Some(cert) = d.check()? {
        return Ok(outcome(cert, Phase::ImplicitWaning, &d, 0));
    }

    let mut candidates: Vec<usize> = (0..inst.n())
        .filter(|&j| h.class[j] != VarClass::Basic)
        .collect();
    candidates.sort_by(|&a, &b| h.rc[b].abs().total_cmp(&h.rc[a].abs()).then(a.cmp(&b)));
    let mut waxed = 0;
    for &j in &candidates {
        if d.pa.free_count() <= cfg.spb_size {
            break;
        }
        if !d.pa.is_free(j) {
            continue;
        }
        d.pa.assign(inst, h, Coordinate::new(j, h.preferred(j)), Origin::Waxed);
        waxed += 1;
        if let Some(cert) = d.check()? {
            return Ok(outcome(cert, Phase::Waxing, &d, waxed));
        }
        d.apply_implied()?;
        if let Some(cert) = d.check()? {
            return Ok(outcome(cert, Phase::Waxing, &d, waxed));
        }
    }

    let sp = Subproblem::new(inst, h, d.pa.states(), gap)?;
    let bnb_cfg = BnbConfig {
        spb_size: sp.free.len().max(cfg.spb_size),
        final_dfs_size: cfg.final_dfs_size,
    };
    let mut sink = IncumbentSink {
        inc: incumbent,
        best: None,
    };
    let result = solve_subproblem(&sp, inst, h, &mut sink, &bnb_cfg, deadline)?;
    let coords: Vec<Coordinate> =
        d.pa.log()
            .iter()
            .filter(|(_, o)| matches!(o, Origin::Family | Origin::Waxed))
            .map(|(c, _)| *c)
            .collect();
    let fresh =
        d.pa.log()
            .iter()
            .filter(|(_, o)| *o == Origin::Waxed)
            .map(|(c, _)| *c)
            .collect();
    let certificate = Certificate::new(coords, Provenance::BnbExhausted).with_fresh_order(fresh);
    let best_solution = sink
        .best
        .as_ref()
        .map(|(x, _)| inst.evaluate(x).expect("solution length matches"));
    Ok(ObstacleOutcome {
        try_value: sink.best.as_ref().map(|b| b.1),
        best_solution,
        certificate,
        phase: Phase::BranchAndBound,
        completed: result.exhausted,
        waxed,
        implied: d.reasons.len(),
        bnb_nodes: result.nodes,
    })
}
