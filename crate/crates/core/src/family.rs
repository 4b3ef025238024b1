//! Ordered clause family for resolution search.
//!
//! Each clause records a terminal partial assignment (`body` plus a `marker`
//! coordinate). The next node to explore, `u(F)`, is obtained by walking the
//! clauses in order: every clause contributes the body coordinates that no
//! earlier clause fixed (its *self-strays*) and then its marker variable with
//! the opposite value. Contributed variables are pairwise distinct, so a
//! family never holds more than `n` clauses.
//!
//! Inserting a certificate either appends a clause (when the certificate
//! mentions variables outside `u(F)`) or resolves it against the latest clause
//! it depends on, dropping that clause and everything after it. Deriving the
//! empty certificate means the whole space is refuted.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::assignment::Coordinate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    CapacityViolation,
    ReducedCost,
    CardinalityViolation,
    BnbExhausted,
    Resolution,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::CapacityViolation => "capacity-violation",
            Provenance::ReducedCost => "reduced-cost",
            Provenance::CardinalityViolation => "cardinality-violation",
            Provenance::BnbExhausted => "bnb-exhausted",
            Provenance::Resolution => "resolution",
        })
    }
}

/// A partial assignment none of whose completions improves on the incumbent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    /// Coordinates in assignment order.
    pub coords: Vec<Coordinate>,
    pub provenance: Provenance,
    /// Coordinates not taken from the family, in assignment order.
    pub fresh_order: Vec<Coordinate>,
}

impl Certificate {
    pub fn new(coords: Vec<Coordinate>, provenance: Provenance) -> Self {
        Self {
            coords,
            provenance,
            fresh_order: Vec::new(),
        }
    }

    pub fn empty(provenance: Provenance) -> Self {
        Self::new(Vec::new(), provenance)
    }

    pub fn with_fresh_order(mut self, fresh: Vec<Coordinate>) -> Self {
        self.fresh_order = fresh;
        self
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    /// True when `x` agrees with every coordinate.
    pub fn covers(&self, x: &[bool]) -> bool {
        self.coords.iter().all(|c| x[c.var] == c.value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub body: Vec<Coordinate>,
    pub marker: Coordinate,
    pub provenance: Provenance,
    /// Body coordinates first contributed by this clause, in order.
    pub self_strays: Vec<Coordinate>,
}

impl Clause {
    pub fn coords(&self) -> impl Iterator<Item = Coordinate> + '_ {
        self.body
            .iter()
            .copied()
            .chain(std::iter::once(self.marker))
    }

    pub fn len(&self) -> usize {
        self.body.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Which clause fixed a variable in `u(F)`, and with what value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Contribution {
    pub clause: usize,
    pub order: usize,
    pub value: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FamilyError {
    #[error("family needs at least one variable")]
    NoVariables,
    #[error("family is exhausted")]
    Exhausted,
    #[error("variable {0} is out of range")]
    OutOfRange(usize),
    #[error("variable {0} appears twice in the certificate")]
    Duplicate(usize),
    #[error("certificate sets x{var}={value} but u(F) has the opposite value")]
    Inconsistent { var: usize, value: bool },
    #[error("fresh order does not list exactly the coordinates outside u(F)")]
    FreshMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AddCase {
    Empty,
    Append,
    Resolve,
}

impl fmt::Display for AddCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AddCase::Empty => "empty",
            AddCase::Append => "ii",
            AddCase::Resolve => "iii",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AddOutcome {
    pub exhausted: bool,
    /// Case taken for the incoming certificate.
    pub case: AddCase,
    /// Size of the incoming certificate.
    pub size: usize,
    /// Clause count afterwards.
    pub depth: usize,
    pub resolutions: usize,
}

impl AddOutcome {
    pub fn trace_line(&self, k: usize) -> String {
        format!(
            "k={} case={} size={} depth={}",
            k, self.case, self.size, self.depth
        )
    }
}

#[derive(Debug, Clone)]
pub struct ClauseFamily {
    n: usize,
    clauses: Vec<Clause>,
    exhausted: bool,
    contributor: Vec<Option<Contribution>>,
}

impl ClauseFamily {
    pub fn new(n: usize) -> Result<Self, FamilyError> {
        if n == 0 {
            return Err(FamilyError::NoVariables);
        }
        Ok(Self {
            n,
            clauses: Vec::new(),
            exhausted: false,
            contributor: vec![None; n],
        })
    }

    /// Builds a family from raw clauses without any checking. Intended for
    /// exercising [`family_invariant_check`].
    pub fn from_raw_parts(n: usize, clauses: Vec<Clause>) -> Self {
        let mut f = Self {
            n,
            clauses,
            exhausted: false,
            contributor: vec![None; n],
        };
        f.rebuild_contributors();
        f
    }

    fn rebuild_contributors(&mut self) {
        self.contributor = vec![None; self.n];
        for (ci, clause) in self.clauses.iter().enumerate() {
            for (order, c) in clause.self_strays.iter().enumerate() {
                self.contributor[c.var] = Some(Contribution {
                    clause: ci,
                    order,
                    value: c.value,
                });
            }
            self.contributor[clause.marker.var] = Some(Contribution {
                clause: ci,
                order: clause.self_strays.len(),
                value: !clause.marker.value,
            });
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn is_exhausted(&self) -> bool {
        self.exhausted
    }

    pub fn contribution(&self, var: usize) -> Option<Contribution> {
        self.contributor[var]
    }

    /// The next node: contributed coordinates in walk order.
    pub fn u_of(&self) -> Result<Vec<(Coordinate, Contribution)>, FamilyError> {
        if self.exhausted {
            return Err(FamilyError::Exhausted);
        }
        Ok(self.walk())
    }

    fn walk(&self) -> Vec<(Coordinate, Contribution)> {
        let mut out = Vec::new();
        for (ci, clause) in self.clauses.iter().enumerate() {
            for (order, &c) in clause.self_strays.iter().enumerate() {
                out.push((
                    c,
                    Contribution {
                        clause: ci,
                        order,
                        value: c.value,
                    },
                ));
            }
            let flipped = clause.marker.flipped();
            out.push((
                flipped,
                Contribution {
                    clause: ci,
                    order: clause.self_strays.len(),
                    value: flipped.value,
                },
            ));
        }
        out
    }

    /// `u(F)` as a dense vector.
    pub fn u_vector(&self) -> Vec<Option<bool>> {
        let mut v = vec![None; self.n];
        for (c, _) in self.walk() {
            v[c.var] = Some(c.value);
        }
        v
    }

    /// Records a terminal certificate and updates the family.
    pub fn add_clause(&mut self, cert: &Certificate) -> Result<AddOutcome, FamilyError> {
        if self.exhausted {
            return Err(FamilyError::Exhausted);
        }
        let mut seen = HashSet::with_capacity(cert.coords.len());
        let mut fresh_set = HashSet::new();
        for c in &cert.coords {
            if c.var >= self.n {
                return Err(FamilyError::OutOfRange(c.var));
            }
            if !seen.insert(c.var) {
                return Err(FamilyError::Duplicate(c.var));
            }
            match self.contributor[c.var] {
                Some(con) if con.value != c.value => {
                    return Err(FamilyError::Inconsistent {
                        var: c.var,
                        value: c.value,
                    })
                }
                Some(_) => {}
                None => {
                    fresh_set.insert(*c);
                }
            }
        }
        let fresh: Vec<Coordinate> = if cert.fresh_order.is_empty() {
            cert.coords
                .iter()
                .copied()
                .filter(|c| fresh_set.contains(c))
                .collect()
        } else {
            cert.fresh_order.clone()
        };
        if fresh.len() != fresh_set.len() || !fresh.iter().all(|c| fresh_set.contains(c)) {
            return Err(FamilyError::FreshMismatch);
        }

        let size = cert.coords.len();
        let case = if cert.coords.is_empty() {
            AddCase::Empty
        } else if fresh.is_empty() {
            AddCase::Resolve
        } else {
            AddCase::Append
        };
        let mut coords = cert.coords.clone();
        let mut fresh = fresh;
        let mut provenance = cert.provenance;
        let mut resolutions = 0;
        loop {
            if coords.is_empty() {
                self.exhausted = true;
                self.clauses.clear();
                self.contributor = vec![None; self.n];
                return Ok(AddOutcome {
                    exhausted: true,
                    case,
                    size,
                    depth: 0,
                    resolutions,
                });
            }
            if !fresh.is_empty() {
                self.append(coords, fresh, provenance);
                return Ok(AddOutcome {
                    exhausted: false,
                    case,
                    size,
                    depth: self.clauses.len(),
                    resolutions,
                });
            }
            // Every coordinate is contributed: resolve with the latest clause involved.
            let j = coords
                .iter()
                .map(|c| self.contributor[c.var].expect("contributed").clause)
                .max()
                .expect("non-empty");
            let target = self.clauses[j].clone();
            let mut resolvent: Vec<Coordinate> = coords
                .iter()
                .copied()
                .filter(|c| self.contributor[c.var].map(|con| con.clause) != Some(j))
                .collect();
            for c in &target.body {
                if !resolvent.iter().any(|r| r.var == c.var) {
                    resolvent.push(*c);
                }
            }
            self.clauses.truncate(j);
            for c in target
                .self_strays
                .iter()
                .chain(std::iter::once(&target.marker))
            {
                self.contributor[c.var] = None;
            }
            // Dropped later clauses no longer contribute either.
            for con in self.contributor.iter_mut() {
                if con.is_some_and(|x| x.clause >= j) {
                    *con = None;
                }
            }
            resolvent.sort_by_key(|c| {
                self.contributor[c.var]
                    .map(|con| (con.clause, con.order))
                    .unwrap_or((usize::MAX, 0))
            });
            fresh = target
                .self_strays
                .iter()
                .copied()
                .filter(|c| resolvent.contains(c))
                .collect();
            // Keep fresh coordinates in their original contribution order.
            let contributed: Vec<Coordinate> = resolvent
                .iter()
                .copied()
                .filter(|c| self.contributor[c.var].is_some())
                .collect();
            coords = contributed
                .into_iter()
                .chain(fresh.iter().copied())
                .collect();
            provenance = Provenance::Resolution;
            resolutions += 1;
        }
    }

    fn append(&mut self, coords: Vec<Coordinate>, fresh: Vec<Coordinate>, provenance: Provenance) {
        let marker = *fresh.last().expect("fresh coordinates");
        let self_strays: Vec<Coordinate> = fresh[..fresh.len() - 1].to_vec();
        let mut body: Vec<Coordinate> = coords
            .iter()
            .copied()
            .filter(|c| self.contributor[c.var].is_some())
            .collect();
        body.sort_by_key(|c| {
            let con = self.contributor[c.var].unwrap();
            (con.clause, con.order)
        });
        body.extend(self_strays.iter().copied());
        let ci = self.clauses.len();
        for (order, c) in self_strays.iter().enumerate() {
            self.contributor[c.var] = Some(Contribution {
                clause: ci,
                order,
                value: c.value,
            });
        }
        self.contributor[marker.var] = Some(Contribution {
            clause: ci,
            order: self_strays.len(),
            value: !marker.value,
        });
        self.clauses.push(Clause {
            body,
            marker,
            provenance,
            self_strays,
        });
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyViolation {
    /// A variable is contributed by more than one clause.
    DuplicateContribution {
        var: usize,
        clause: usize,
    },
    /// A body coordinate is neither contributed earlier nor a self-stray.
    Order {
        clause: usize,
        coord: Coordinate,
    },
    /// A body coordinate disagrees with the value contributed earlier.
    BodyValue {
        clause: usize,
        coord: Coordinate,
    },
    /// A self-stray is missing from the body.
    StrayNotInBody {
        clause: usize,
        coord: Coordinate,
    },
    /// The marker variable also occurs in the body.
    MarkerInBody {
        clause: usize,
    },
    Size {
        clauses: usize,
        n: usize,
    },
    /// The cached contributor table is stale.
    Bookkeeping {
        var: usize,
    },
    /// `u(F)` extends a recorded clause.
    Revisit {
        clause: usize,
    },
}

/// Recomputes the structural invariants of `family` from scratch.
pub fn family_invariant_check(family: &ClauseFamily) -> Vec<FamilyViolation> {
    let mut out = Vec::new();
    let n = family.n;
    if family.clauses.len() > n {
        out.push(FamilyViolation::Size {
            clauses: family.clauses.len(),
            n,
        });
    }
    let mut contributed: Vec<Option<(usize, bool)>> = vec![None; n];
    let mut contribute =
        |var: usize, clause: usize, value: bool, out: &mut Vec<FamilyViolation>| {
            if var >= n {
                return;
            }
            if contributed[var].is_some() {
                out.push(FamilyViolation::DuplicateContribution { var, clause });
            }
            contributed[var] = Some((clause, value));
        };
    let mut table: Vec<Option<(usize, bool)>> = vec![None; n];
    for (ci, clause) in family.clauses.iter().enumerate() {
        for c in &clause.self_strays {
            if !clause.body.contains(c) {
                out.push(FamilyViolation::StrayNotInBody {
                    clause: ci,
                    coord: *c,
                });
            }
        }
        for c in &clause.body {
            if c.var >= n {
                out.push(FamilyViolation::Order {
                    clause: ci,
                    coord: *c,
                });
                continue;
            }
            if clause.self_strays.contains(c) {
                continue;
            }
            match table[c.var] {
                Some((_, v)) if v == c.value => {}
                Some(_) => out.push(FamilyViolation::BodyValue {
                    clause: ci,
                    coord: *c,
                }),
                None => out.push(FamilyViolation::Order {
                    clause: ci,
                    coord: *c,
                }),
            }
        }
        if clause.body.iter().any(|c| c.var == clause.marker.var) {
            out.push(FamilyViolation::MarkerInBody { clause: ci });
        }
        for c in &clause.self_strays {
            contribute(c.var, ci, c.value, &mut out);
            table[c.var] = Some((ci, c.value));
        }
        contribute(clause.marker.var, ci, !clause.marker.value, &mut out);
        if clause.marker.var < n {
            table[clause.marker.var] = Some((ci, !clause.marker.value));
        }
    }
    for var in 0..n {
        let cached = family.contributor[var].map(|c| (c.clause, c.value));
        if cached != table[var] {
            out.push(FamilyViolation::Bookkeeping { var });
        }
    }
    if !family.exhausted {
        let u = family.u_vector();
        for (ci, clause) in family.clauses.iter().enumerate() {
            if clause
                .coords()
                .all(|c| c.var < n && u[c.var] == Some(c.value))
            {
                out.push(FamilyViolation::Revisit { clause: ci });
            }
        }
    }
    out
}
