//! Top-level search: greedy start, cardinality range, hyperplane scheduling.

use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::bounds::{
    cardinality_range, hyperplane_relaxation, BoundsError, CardinalityRange, GapConvention,
    HyperplaneData, HyperplaneStatus,
};
use crate::family::{
    family_invariant_check, Certificate, ClauseFamily, FamilyError, FamilyViolation,
};
use crate::incumbent::{Improvement, Incumbent};
use crate::model::{evaluate, FullSolution, Instance};
use crate::obstacle::{obstacle, ObstacleConfig, ObstacleError, Phase};

pub const DEFAULT_NB_ITER: usize = 50;
pub const DEFAULT_FINAL_DFS_SIZE: usize = 20;

#[derive(Debug, Error, PartialEq)]
pub enum DriverError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Obstacle(#[from] ObstacleError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("family invariant broken on hyperplane {k}: {violations:?}")]
    Invariant {
        k: usize,
        violations: Vec<FamilyViolation>,
    },
    #[error("hyperplane {k} exceeded {cap} clause additions")]
    TerminationCap { k: usize, cap: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Policy {
    /// Visit open hyperplanes in turn, `nb_iter` descents per visit.
    #[default]
    RoundRobin,
    /// Exhaust each hyperplane before moving to the next.
    Sequential,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    /// Free variables handed to branch and bound; `None` picks a size from `m`.
    pub spb_size: Option<usize>,
    pub final_dfs_size: Option<usize>,
    pub nb_iter: usize,
    pub policy: Policy,
    pub gap: GapConvention,
    pub time_limit: Option<Duration>,
    /// Values above 1 explore hyperplanes on parallel workers.
    pub threads: usize,
    pub trace: bool,
    /// Check family invariants after every update.
    pub audit: bool,
    pub record_certificates: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            spb_size: None,
            final_dfs_size: None,
            nb_iter: DEFAULT_NB_ITER,
            policy: Policy::RoundRobin,
            gap: GapConvention::Standard,
            time_limit: None,
            threads: 1,
            trace: false,
            audit: false,
            record_certificates: false,
        }
    }
}

impl SolveConfig {
    /// Concrete descent parameters for `inst`.
    pub fn obstacle_config(&self, inst: &Instance) -> Result<ObstacleConfig, DriverError> {
        if self.nb_iter == 0 {
            return Err(DriverError::Config("nb_iter must be at least 1".into()));
        }
        let n = inst.n();
        let spb = self
            .spb_size
            .unwrap_or_else(|| (2 * (inst.m() + 1) + 20).max(20))
            .min(n);
        let dfs = self
            .final_dfs_size
            .unwrap_or(DEFAULT_FINAL_DFS_SIZE)
            .min(spb);
        Ok(ObstacleConfig {
            spb_size: spb,
            final_dfs_size: dfs,
            gap: self.gap,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HyperplaneOutcome {
    Open,
    Exhausted,
    /// The first descent already showed the LP bound cannot beat the incumbent.
    ClosedAtRoot,
    Infeasible,
}

impl HyperplaneOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            HyperplaneOutcome::Open => "open",
            HyperplaneOutcome::Exhausted => "exhausted",
            HyperplaneOutcome::ClosedAtRoot => "closed-at-root",
            HyperplaneOutcome::Infeasible => "infeasible",
        }
    }

    pub fn is_closed(self) -> bool {
        self != HyperplaneOutcome::Open
    }
}

/// Search state of one hyperplane, kept across visits.
#[derive(Debug, Clone)]
pub struct HyperplaneSearch {
    pub h: HyperplaneData,
    pub family: ClauseFamily,
    pub outcome: HyperplaneOutcome,
    pub obstacle_calls: u64,
    pub clauses: u64,
    pub resolutions: u64,
    pub max_depth: usize,
    pub bnb_nodes: u64,
    /// Recorded certificates with the bound in force when each was returned.
    pub certificates: Vec<(i64, Certificate)>,
    pub trace: Vec<String>,
}

impl HyperplaneSearch {
    pub fn new(h: HyperplaneData, n: usize) -> Result<Self, DriverError> {
        let outcome = match h.status {
            HyperplaneStatus::Infeasible => HyperplaneOutcome::Infeasible,
            _ => HyperplaneOutcome::Open,
        };
        Ok(Self {
            h,
            family: ClauseFamily::new(n)?,
            outcome,
            obstacle_calls: 0,
            clauses: 0,
            resolutions: 0,
            max_depth: 0,
            bnb_nodes: 0,
            certificates: Vec::new(),
            trace: Vec::new(),
        })
    }

    pub fn k(&self) -> usize {
        self.h.k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IterOutcome {
    pub iterations: usize,
    pub timed_out: bool,
}

/// Runs up to `nb_iter` descents on one hyperplane.
pub fn iterative_rs(
    hs: &mut HyperplaneSearch,
    inst: &Instance,
    incumbent: &Incumbent,
    nb_iter: usize,
    ocfg: &ObstacleConfig,
    cfg: &SolveConfig,
    deadline: Option<Instant>,
) -> Result<IterOutcome, DriverError> {
    let cap = 4u64.checked_pow(inst.n() as u32).unwrap_or(u64::MAX);
    let mut iterations = 0;
    while iterations < nb_iter && !hs.outcome.is_closed() {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            return Ok(IterOutcome {
                iterations,
                timed_out: true,
            });
        }
        let out = obstacle(&hs.family, &hs.h, inst, incumbent, ocfg, deadline)?;
        hs.obstacle_calls += 1;
        hs.bnb_nodes += out.bnb_nodes;
        iterations += 1;
        if !out.completed {
            return Ok(IterOutcome {
                iterations,
                timed_out: true,
            });
        }
        let added = hs.family.add_clause(&out.certificate)?;
        hs.clauses += 1;
        hs.resolutions += added.resolutions as u64;
        hs.max_depth = hs.max_depth.max(added.depth);
        if cfg.record_certificates {
            hs.certificates
                .push((incumbent.lb(), out.certificate.clone()));
        }
        if cfg.trace {
            hs.trace.push(added.trace_line(hs.h.k));
        }
        if cfg.audit {
            let violations = family_invariant_check(&hs.family);
            if !violations.is_empty() {
                return Err(DriverError::Invariant {
                    k: hs.h.k,
                    violations,
                });
            }
            if hs.clauses > cap {
                return Err(DriverError::TerminationCap { k: hs.h.k, cap });
            }
        }
        if added.exhausted {
            hs.outcome = if hs.obstacle_calls == 1 && out.phase == Phase::Root {
                HyperplaneOutcome::ClosedAtRoot
            } else {
                HyperplaneOutcome::Exhausted
            };
            hs.h.close();
        }
    }
    Ok(IterOutcome {
        iterations,
        timed_out: false,
    })
}

/// Greedy by profit over capacity-normalised weight.
pub fn greedy_lb(inst: &Instance) -> FullSolution {
    let (n, m) = (inst.n(), inst.m());
    let ratio = |j: usize| {
        let load: f64 = (0..m)
            .map(|i| inst.weight(i, j) as f64 / inst.capacity(i).max(1) as f64)
            .sum();
        if load == 0.0 {
            f64::INFINITY
        } else {
            inst.profit(j) as f64 / load
        }
    };
    let mut order: Vec<(usize, f64)> = (0..n).map(|j| (j, ratio(j))).collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut residual = inst.capacities().to_vec();
    let mut x = vec![false; n];
    for (j, _) in order {
        if (0..m).all(|i| inst.weight(i, j) <= residual[i]) {
            for (i, r) in residual.iter_mut().enumerate() {
                *r -= inst.weight(i, j);
            }
            x[j] = true;
        }
    }
    evaluate(inst, &x).expect("length matches")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProofStatus {
    Proved,
    TimeLimited,
}

impl ProofStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ProofStatus::Proved => "proved",
            ProofStatus::TimeLimited => "time-limited",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneReport {
    pub k: usize,
    pub outcome: HyperplaneOutcome,
    /// `None` for infeasible hyperplanes.
    pub ub_int: Option<i64>,
    pub obstacle_calls: u64,
    pub clauses: u64,
    pub resolutions: u64,
    pub max_depth: usize,
    pub bnb_nodes: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub instance: String,
    pub n: usize,
    pub m: usize,
    pub status: ProofStatus,
    pub optimum: i64,
    pub solution: FullSolution,
    pub greedy: i64,
    pub range: Option<CardinalityRange>,
    pub hyperplanes: Vec<HyperplaneReport>,
    pub trajectory: Vec<Improvement>,
    pub elapsed: Duration,
    pub trace: Vec<String>,
    /// Recorded certificates per hyperplane, when requested.
    pub certificates: Vec<(usize, Vec<(i64, Certificate)>)>,
}

impl SolveReport {
    pub fn is_proved(&self) -> bool {
        self.status == ProofStatus::Proved
    }

    pub fn obstacle_calls(&self) -> u64 {
        self.hyperplanes.iter().map(|h| h.obstacle_calls).sum()
    }

    pub fn clauses(&self) -> u64 {
        self.hyperplanes.iter().map(|h| h.clauses).sum()
    }
}

/// Solves `inst` to proven optimality or until the time limit.
pub fn solve(inst: &Instance, cfg: &SolveConfig) -> Result<SolveReport, DriverError> {
    let start = Instant::now();
    let deadline = cfg.time_limit.map(|t| start + t);
    let ocfg = cfg.obstacle_config(inst)?;
    let greedy = greedy_lb(inst);
    let incumbent = Incumbent::with_start(greedy.x.clone(), greedy.value, start);

    let range = cardinality_range(inst, incumbent.lb())?;
    let mut searches = Vec::new();
    if let Some(r) = range {
        for k in r.iter() {
            searches.push(HyperplaneSearch::new(
                hyperplane_relaxation(inst, k)?,
                inst.n(),
            )?);
        }
    }
    searches.sort_by(|a, b| b.h.ub_int.cmp(&a.h.ub_int).then(a.k().cmp(&b.k())));

    let timed_out = if cfg.threads > 1 {
        run_parallel(&mut searches, inst, &incumbent, &ocfg, cfg, deadline)?
    } else {
        run_sequential(&mut searches, inst, &incumbent, &ocfg, cfg, deadline)?
    };

    let all_closed = searches.iter().all(|s| s.outcome.is_closed());
    let status = if all_closed && !timed_out {
        ProofStatus::Proved
    } else {
        ProofStatus::TimeLimited
    };
    searches.sort_by_key(|s| s.k());
    let solution = evaluate(inst, &incumbent.solution()).expect("length matches");
    debug_assert!(solution.feasible && solution.value == incumbent.lb());
    let mut trace = Vec::new();
    let mut certificates = Vec::new();
    let hyperplanes = searches
        .into_iter()
        .map(|s| {
            trace.extend(s.trace.iter().cloned());
            if cfg.record_certificates {
                certificates.push((s.k(), s.certificates.clone()));
            }
            HyperplaneReport {
                k: s.k(),
                outcome: s.outcome,
                ub_int: (s.outcome != HyperplaneOutcome::Infeasible).then_some(s.h.ub_int),
                obstacle_calls: s.obstacle_calls,
                clauses: s.clauses,
                resolutions: s.resolutions,
                max_depth: s.max_depth,
                bnb_nodes: s.bnb_nodes,
            }
        })
        .collect();
    Ok(SolveReport {
        instance: inst.name().to_string(),
        n: inst.n(),
        m: inst.m(),
        status,
        optimum: solution.value,
        solution,
        greedy: greedy.value,
        range,
        hyperplanes,
        trajectory: incumbent.history(),
        elapsed: start.elapsed(),
        trace,
        certificates,
    })
}

fn run_sequential(
    searches: &mut [HyperplaneSearch],
    inst: &Instance,
    incumbent: &Incumbent,
    ocfg: &ObstacleConfig,
    cfg: &SolveConfig,
    deadline: Option<Instant>,
) -> Result<bool, DriverError> {
    match cfg.policy {
        Policy::Sequential => {
            for hs in searches.iter_mut() {
                while !hs.outcome.is_closed() {
                    if iterative_rs(hs, inst, incumbent, cfg.nb_iter, ocfg, cfg, deadline)?
                        .timed_out
                    {
                        return Ok(true);
                    }
                }
            }
        }
        Policy::RoundRobin => {
            while searches.iter().any(|s| !s.outcome.is_closed()) {
                for hs in searches.iter_mut().filter(|s| !s.outcome.is_closed()) {
                    if iterative_rs(hs, inst, incumbent, cfg.nb_iter, ocfg, cfg, deadline)?
                        .timed_out
                    {
                        return Ok(true);
                    }
                }
            }
        }
    }
    Ok(false)
}

/// One hyperplane per worker at a time; the incumbent is the only shared state.
fn run_parallel(
    searches: &mut Vec<HyperplaneSearch>,
    inst: &Instance,
    incumbent: &Incumbent,
    ocfg: &ObstacleConfig,
    cfg: &SolveConfig,
    deadline: Option<Instant>,
) -> Result<bool, DriverError> {
    let queue: Mutex<VecDeque<HyperplaneSearch>> = Mutex::new(searches.drain(..).collect());
    let done: Mutex<Vec<HyperplaneSearch>> = Mutex::new(Vec::new());
    let failure: Mutex<Option<DriverError>> = Mutex::new(None);
    let timed_out = std::sync::atomic::AtomicBool::new(false);
    std::thread::scope(|s| {
        for _ in 0..cfg.threads {
            s.spawn(|| loop {
                if failure.lock().unwrap().is_some() {
                    return;
                }
                let Some(mut hs) = queue.lock().unwrap().pop_front() else {
                    return;
                };
                let mut result = Ok(());
                while !hs.outcome.is_closed()
                    && !timed_out.load(std::sync::atomic::Ordering::Relaxed)
                {
                    match iterative_rs(&mut hs, inst, incumbent, cfg.nb_iter, ocfg, cfg, deadline) {
                        Ok(o) if o.timed_out => {
                            timed_out.store(true, std::sync::atomic::Ordering::Relaxed)
                        }
                        Ok(_) => {}
                        Err(e) => {
                            result = Err(e);
                            break;
                        }
                    }
                }
                done.lock().unwrap().push(hs);
                if let Err(e) = result {
                    failure.lock().unwrap().get_or_insert(e);
                    return;
                }
            });
        }
    });
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    searches.extend(done.into_inner().unwrap());
    searches.extend(queue.into_inner().unwrap());
    Ok(timed_out.into_inner())
}
