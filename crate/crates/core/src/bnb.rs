//! Depth-first branch and bound over the residual free variables.
//!
//! Free variables are visited in a fixed order (increasing `|rc|`, basic
//! variables last) and each is first set to its LP-preferred value. Nodes are
//! pruned on
//!
//! * (a) integer capacity,
//! * (b) the residual cardinality window,
//! * (c) the reduced-cost budget, with [`MARGIN`],
//! * (d) current profit plus the `r` largest remaining profits, `r` being the
//!   number of items still to pick, against the live lower bound.
//!
//! Once at most `final_dfs_size` variables remain the search drops rule (c)
//! and finishes as a plain enumeration.

use std::time::Instant;

use thiserror::Error;

use crate::assignment::{consumed_gap_of, Coordinate};
use crate::bounds::{HyperplaneData, VarClass, MARGIN};
use crate::model::Instance;

#[derive(Debug, Error, PartialEq)]
pub enum BnbError {
    #[error("context violates capacity of constraint {0}")]
    Capacity(usize),
    #[error("context fixes {ones} ones with {free} free variables, cardinality {k} unreachable")]
    Cardinality { ones: usize, free: usize, k: usize },
    #[error("{free} free variables exceed the limit of {limit}")]
    TooLarge { free: usize, limit: usize },
    #[error("context has length {got}, expected {expected}")]
    Length { expected: usize, got: usize },
}

/// Receives improving solutions.
pub trait SolutionSink {
    /// Only solutions with value strictly above this are reported.
    fn bound(&self) -> i64;
    fn report(&mut self, x: &[bool], value: i64);
}

/// Collects every solution above a fixed bound.
#[derive(Debug, Clone, Default)]
pub struct Collector {
    pub lb: i64,
    pub found: Vec<(Vec<bool>, i64)>,
}

impl Collector {
    pub fn new(lb: i64) -> Self {
        Self {
            lb,
            found: Vec::new(),
        }
    }
}

impl SolutionSink for Collector {
    fn bound(&self) -> i64 {
        self.lb
    }

    fn report(&mut self, x: &[bool], value: i64) {
        self.found.push((x.to_vec(), value));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BnbConfig {
    pub spb_size: usize,
    pub final_dfs_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subproblem {
    /// Free variables in branching order.
    pub free: Vec<usize>,
    /// Context values; free positions hold `false`.
    pub base: Vec<bool>,
    pub residual_caps: Vec<i64>,
    pub residual_card: usize,
    pub remaining_gap: f64,
    pub context_profit: i64,
}

impl Subproblem {
    /// Residual problem below `context` on hyperplane `h`, with reduced-cost
    /// budget `gap` before any deviation.
    pub fn new(
        inst: &Instance,
        h: &HyperplaneData,
        context: &[Option<bool>],
        gap: f64,
    ) -> Result<Self, BnbError> {
        let n = inst.n();
        if context.len() != n {
            return Err(BnbError::Length {
                expected: n,
                got: context.len(),
            });
        }
        let mut caps = inst.capacities().to_vec();
        let mut ones = 0;
        let mut profit = 0;
        for (j, s) in context.iter().enumerate() {
            if *s == Some(true) {
                ones += 1;
                profit += inst.profit(j);
                for (i, cap) in caps.iter_mut().enumerate() {
                    *cap -= inst.weight(i, j);
                }
            }
        }
        if let Some(i) = caps.iter().position(|&c| c < 0) {
            return Err(BnbError::Capacity(i));
        }
        let mut free: Vec<usize> = (0..n).filter(|&j| context[j].is_none()).collect();
        if ones > h.k || h.k - ones > free.len() {
            return Err(BnbError::Cardinality {
                ones,
                free: free.len(),
                k: h.k,
            });
        }
        free.sort_by(|&a, &b| {
            let basic_a = h.class[a] == VarClass::Basic;
            let basic_b = h.class[b] == VarClass::Basic;
            basic_a
                .cmp(&basic_b)
                .then(h.rc[a].abs().total_cmp(&h.rc[b].abs()))
                .then(a.cmp(&b))
        });
        let consumed = consumed_gap_of(
            h,
            context
                .iter()
                .enumerate()
                .filter_map(|(j, s)| s.map(|v| Coordinate::new(j, v))),
        );
        Ok(Self {
            free,
            base: context.iter().map(|s| s.unwrap_or(false)).collect(),
            residual_caps: caps,
            residual_card: h.k - ones,
            remaining_gap: gap - consumed,
            context_profit: profit,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BnbOutcome {
    /// False only when the deadline interrupted the search.
    pub exhausted: bool,
    pub nodes: u64,
    pub reported: usize,
}

struct Search<'a, S: SolutionSink> {
    inst: &'a Instance,
    h: &'a HyperplaneData,
    order: &'a [usize],
    sink: &'a mut S,
    x: Vec<bool>,
    caps: Vec<i64>,
    /// `best[offsets[i] + r]` = sum of the `r` largest profits among `order[i..]`.
    best: Vec<i64>,
    offsets: Vec<usize>,
    dfs_threshold: usize,
    deadline: Option<Instant>,
    nodes: u64,
    reported: usize,
    aborted: bool,
}

impl<'a, S: SolutionSink> Search<'a, S> {
    fn new(
        inst: &'a Instance,
        h: &'a HyperplaneData,
        sp: &'a Subproblem,
        sink: &'a mut S,
        dfs_threshold: usize,
        deadline: Option<Instant>,
    ) -> Self {
        let len = sp.free.len();
        let mut offsets = Vec::with_capacity(len + 1);
        let mut best = Vec::new();
        for i in 0..=len {
            offsets.push(best.len());
            let mut p: Vec<i64> = sp.free[i..].iter().map(|&j| inst.profit(j)).collect();
            p.sort_unstable_by(|a, b| b.cmp(a));
            best.push(0);
            let mut acc = 0;
            for v in p {
                acc += v;
                best.push(acc);
            }
        }
        Self {
            inst,
            h,
            order: &sp.free,
            sink,
            x: sp.base.clone(),
            caps: sp.residual_caps.clone(),
            best,
            offsets,
            dfs_threshold,
            deadline,
            nodes: 0,
            reported: 0,
            aborted: false,
        }
    }

    fn fits(&self, j: usize) -> bool {
        self.caps
            .iter()
            .enumerate()
            .all(|(i, &c)| self.inst.weight(i, j) <= c)
    }

    fn take(&mut self, j: usize, sign: i64) {
        for (i, c) in self.caps.iter_mut().enumerate() {
            *c -= sign * self.inst.weight(i, j);
        }
        self.x[j] = sign > 0;
    }

    fn go(&mut self, i: usize, r: usize, gap: f64, profit: i64, use_gap: bool) {
        self.nodes += 1;
        if self.nodes & 0x3fff == 0 {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.aborted = true;
                }
            }
        }
        if self.aborted {
            return;
        }
        let len = self.order.len();
        let rem = len - i;
        if r > rem {
            return;
        }
        if profit + self.best[self.offsets[i] + r] <= self.sink.bound() {
            return;
        }
        if i == len {
            self.sink.report(&self.x, profit);
            self.reported += 1;
            return;
        }
        let use_gap = use_gap && rem > self.dfs_threshold;
        let j = self.order[i];
        let preferred = self.h.preferred(j);
        for value in [preferred, !preferred] {
            let mut g = gap;
            if use_gap && self.h.is_opposite(Coordinate::new(j, value)) {
                g -= self.h.rc[j].abs();
                if g < -MARGIN {
                    continue;
                }
            }
            if value {
                if r == 0 || !self.fits(j) {
                    continue;
                }
                self.take(j, 1);
                self.go(i + 1, r - 1, g, profit + self.inst.profit(j), use_gap);
                self.take(j, -1);
            } else {
                if r > rem - 1 {
                    continue;
                }
                self.go(i + 1, r, g, profit, use_gap);
            }
        }
    }
}

/// Exhaustively searches `sp`, reporting every completion that beats the
/// sink's bound at the time it is reached.
pub fn solve_subproblem<S: SolutionSink>(
    sp: &Subproblem,
    inst: &Instance,
    h: &HyperplaneData,
    sink: &mut S,
    cfg: &BnbConfig,
    deadline: Option<Instant>,
) -> Result<BnbOutcome, BnbError> {
    if sp.free.len() > cfg.spb_size {
        return Err(BnbError::TooLarge {
            free: sp.free.len(),
            limit: cfg.spb_size,
        });
    }
    Ok(run(sp, inst, h, sink, cfg.final_dfs_size, true, deadline))
}

/// Plain enumeration of a small subproblem, without reduced-cost pruning.
pub fn dfs_enumerate<S: SolutionSink>(
    sp: &Subproblem,
    inst: &Instance,
    h: &HyperplaneData,
    sink: &mut S,
    final_dfs_size: usize,
    deadline: Option<Instant>,
) -> Result<BnbOutcome, BnbError> {
    if sp.free.len() > final_dfs_size {
        return Err(BnbError::TooLarge {
            free: sp.free.len(),
            limit: final_dfs_size,
        });
    }
    Ok(run(sp, inst, h, sink, final_dfs_size, false, deadline))
}

fn run<S: SolutionSink>(
    sp: &Subproblem,
    inst: &Instance,
    h: &HyperplaneData,
    sink: &mut S,
    dfs_threshold: usize,
    use_gap: bool,
    deadline: Option<Instant>,
) -> BnbOutcome {
    let mut search = Search::new(inst, h, sp, sink, dfs_threshold, deadline);
    search.go(
        0,
        sp.residual_card,
        sp.remaining_gap,
        sp.context_profit,
        use_gap,
    );
    BnbOutcome {
        exhausted: !search.aborted,
        nodes: search.nodes,
        reported: search.reported,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{hyperplane_relaxation, rc_gap};

    fn t1() -> Instance {
        Instance::new("T1", vec![10, 6, 4], vec![vec![5, 4, 3]], vec![8]).unwrap()
    }

    const CFG: BnbConfig = BnbConfig {
        spb_size: 20,
        final_dfs_size: 20,
    };

    #[test]
    fn t1_plane_two() {
        let inst = t1();
        let h = hyperplane_relaxation(&inst, 2).unwrap();
        let sp = Subproblem::new(&inst, &h, &[None; 3], rc_gap(&h, 10)).unwrap();
        let mut sink = Collector::new(10);
        let out = solve_subproblem(&sp, &inst, &h, &mut sink, &CFG, None).unwrap();
        assert!(out.exhausted);
        assert_eq!(sink.found, vec![(vec![true, false, true], 14)]);

        let mut sink = Collector::new(10);
        dfs_enumerate(&sp, &inst, &h, &mut sink, 20, None).unwrap();
        assert_eq!(sink.found, vec![(vec![true, false, true], 14)]);

        let mut sink = Collector::new(h.ub_int);
        dfs_enumerate(&sp, &inst, &h, &mut sink, 20, None).unwrap();
        assert!(sink.found.is_empty());
    }

    #[test]
    fn zero_residual_cardinality_forces_zeros() {
        let inst = t1();
        let h = hyperplane_relaxation(&inst, 1).unwrap();
        let sp = Subproblem::new(&inst, &h, &[Some(true), None, None], 100.0).unwrap();
        assert_eq!(sp.residual_card, 0);
        let mut sink = Collector::new(-1);
        solve_subproblem(&sp, &inst, &h, &mut sink, &CFG, None).unwrap();
        assert_eq!(sink.found, vec![(vec![true, false, false], 10)]);
    }

    #[test]
    fn empty_free_set_reports_context() {
        let inst = t1();
        let h = hyperplane_relaxation(&inst, 2).unwrap();
        let sp = Subproblem::new(&inst, &h, &[Some(true), Some(false), Some(true)], 100.0).unwrap();
        let mut sink = Collector::new(13);
        dfs_enumerate(&sp, &inst, &h, &mut sink, 20, None).unwrap();
        assert_eq!(sink.found, vec![(vec![true, false, true], 14)]);
    }

    #[test]
    fn profit_bound_prunes_worthless_subtrees() {
        let inst = Instance::new("z", vec![5, 0, 0, 0], vec![vec![1, 1, 1, 1]], vec![4]).unwrap();
        let h = hyperplane_relaxation(&inst, 2).unwrap();
        let sp = Subproblem::new(&inst, &h, &[Some(true), None, None, None], 100.0).unwrap();
        let mut sink = Collector::new(5);
        let out = solve_subproblem(&sp, &inst, &h, &mut sink, &CFG, None).unwrap();
        assert!(sink.found.is_empty());
        assert_eq!(out.nodes, 1);
    }

    #[test]
    fn context_errors() {
        let inst = t1();
        let h = hyperplane_relaxation(&inst, 1).unwrap();
        assert_eq!(
            Subproblem::new(&inst, &h, &[Some(true), Some(true), None], 1.0).unwrap_err(),
            BnbError::Capacity(0)
        );
        assert!(matches!(
            Subproblem::new(&inst, &h, &[Some(false), Some(false), Some(false)], 1.0),
            Err(BnbError::Cardinality { .. })
        ));
        let sp = Subproblem::new(&inst, &h, &[None; 3], 1.0).unwrap();
        let small = BnbConfig {
            spb_size: 2,
            final_dfs_size: 2,
        };
        assert!(matches!(
            solve_subproblem(&sp, &inst, &h, &mut Collector::new(0), &small, None),
            Err(BnbError::TooLarge { .. })
        ));
    }
}
