//! Partial 0/1/free assignments with incremental bookkeeping.

use std::fmt;

use crate::bounds::{HyperplaneData, VarClass};
use crate::model::Instance;

/// A single fixed component `x_var = value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coordinate {
    pub var: usize,
    pub value: bool,
}

impl Coordinate {
    pub fn new(var: usize, value: bool) -> Self {
        Self { var, value }
    }

    pub fn flipped(self) -> Self {
        Self {
            var: self.var,
            value: !self.value,
        }
    }
}

impl fmt::Display for Coordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}={}", self.var, u8::from(self.value))
    }
}

/// Where an assigned coordinate came from during a descent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    Family,
    Implied,
    Waxed,
    Bnb,
}

#[derive(Debug, Clone)]
pub struct PartialAssignment {
    state: Vec<Option<bool>>,
    log: Vec<(Coordinate, Origin)>,
    position: Vec<usize>,
    count_ones: usize,
    count_zeros: usize,
    consumed: Vec<i64>,
    consumed_gap: f64,
    profit: i64,
}

impl PartialAssignment {
    pub fn new(inst: &Instance) -> Self {
        Self {
            state: vec![None; inst.n()],
            log: Vec::new(),
            position: vec![usize::MAX; inst.n()],
            count_ones: 0,
            count_zeros: 0,
            consumed: vec![0; inst.m()],
            consumed_gap: 0.0,
            profit: 0,
        }
    }

    /// Fixes a free variable. Panics if `var` is already assigned.
    pub fn assign(
        &mut self,
        inst: &Instance,
        h: &HyperplaneData,
        coord: Coordinate,
        origin: Origin,
    ) {
        let j = coord.var;
        assert!(self.state[j].is_none(), "variable {j} assigned twice");
        self.state[j] = Some(coord.value);
        self.position[j] = self.log.len();
        self.log.push((coord, origin));
        if coord.value {
            self.count_ones += 1;
            self.profit += inst.profit(j);
            for (i, c) in self.consumed.iter_mut().enumerate() {
                *c += inst.weight(i, j);
            }
        } else {
            self.count_zeros += 1;
        }
        if h.is_opposite(coord) {
            self.consumed_gap += h.rc[j].abs();
        }
    }

    pub fn n(&self) -> usize {
        self.state.len()
    }

    pub fn get(&self, var: usize) -> Option<bool> {
        self.state[var]
    }

    pub fn is_free(&self, var: usize) -> bool {
        self.state[var].is_none()
    }

    pub fn states(&self) -> &[Option<bool>] {
        &self.state
    }

    pub fn log(&self) -> &[(Coordinate, Origin)] {
        &self.log
    }

    /// Index of `var` in the assignment log.
    pub fn position(&self, var: usize) -> Option<usize> {
        let p = self.position[var];
        (p != usize::MAX).then_some(p)
    }

    pub fn origin(&self, var: usize) -> Option<Origin> {
        self.position(var).map(|p| self.log[p].1)
    }

    pub fn count_ones(&self) -> usize {
        self.count_ones
    }

    pub fn count_zeros(&self) -> usize {
        self.count_zeros
    }

    pub fn free_count(&self) -> usize {
        self.n() - self.count_ones - self.count_zeros
    }

    pub fn consumed(&self) -> &[i64] {
        &self.consumed
    }

    pub fn consumed_gap(&self) -> f64 {
        self.consumed_gap
    }

    pub fn profit(&self) -> i64 {
        self.profit
    }

    pub fn free_vars(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(|&j| self.state[j].is_none())
    }

    pub fn coords(&self) -> impl Iterator<Item = Coordinate> + '_ {
        self.log.iter().map(|(c, _)| *c)
    }

    /// First violated capacity row, if any.
    pub fn violated_row(&self, inst: &Instance) -> Option<usize> {
        (0..inst.m()).find(|&i| self.consumed[i] > inst.capacity(i))
    }

    pub fn to_bits(&self) -> Vec<bool> {
        self.state.iter().map(|s| s.unwrap_or(false)).collect()
    }
}

/// Recomputes the reduced-cost consumption of `assignment` from scratch.
pub fn consumed_gap_of(h: &HyperplaneData, coords: impl IntoIterator<Item = Coordinate>) -> f64 {
    coords
        .into_iter()
        .filter(|&c| h.is_opposite(c))
        .map(|c| h.rc[c.var].abs())
        .sum()
}

impl HyperplaneData {
    /// True when `coord` sets a nonbasic variable away from its LP value.
    pub fn is_opposite(&self, coord: Coordinate) -> bool {
        match self.class[coord.var] {
            VarClass::NonbasicZero => coord.value,
            VarClass::NonbasicOne => !coord.value,
            VarClass::Basic => false,
        }
    }
}
