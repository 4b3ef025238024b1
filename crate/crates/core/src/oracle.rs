//! Exhaustive reference solver. Deliberately independent of the search code.

use thiserror::Error;

use crate::model::{FullSolution, Instance};

pub const MAX_ORACLE_N: usize = 25;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{0} variables is too many for exhaustive enumeration (limit {MAX_ORACLE_N})")]
    TooLarge(usize),
}

/// Visits every assignment in Gray-code order with running totals.
///
/// The callback receives the current bit mask, profit, cardinality and
/// feasibility.
fn gray_scan(
    inst: &Instance,
    mut visit: impl FnMut(u32, i64, usize, bool),
) -> Result<(), OracleError> {
    let n = inst.n();
    if n > MAX_ORACLE_N {
        return Err(OracleError::TooLarge(n));
    }
    let m = inst.m();
    let mut load = vec![0i64; m];
    let mut over = 0usize;
    let mut profit = 0i64;
    let mut mask = 0u32;
    visit(0, 0, 0, (0..m).all(|i| inst.capacity(i) >= 0));
    for step in 1u32..(1u32 << n) {
        let j = step.trailing_zeros() as usize;
        mask ^= 1 << j;
        let sign = if mask >> j & 1 == 1 { 1 } else { -1 };
        profit += sign * inst.profit(j);
        for (i, l) in load.iter_mut().enumerate() {
            let before = *l > inst.capacity(i);
            *l += sign * inst.weight(i, j);
            let after = *l > inst.capacity(i);
            match (before, after) {
                (false, true) => over += 1,
                (true, false) => over -= 1,
                _ => {}
            }
        }
        visit(mask, profit, mask.count_ones() as usize, over == 0);
    }
    Ok(())
}

fn bits(mask: u32, n: usize) -> Vec<bool> {
    (0..n).map(|j| mask >> j & 1 == 1).collect()
}

/// Key ordering masks like the vectors `(x_0, ..., x_{n-1})`.
fn lex_key(mask: u32, n: usize) -> u32 {
    (0..n).fold(0u32, |acc, j| acc << 1 | (mask >> j & 1))
}

/// An optimal solution; among ties, the lexicographically smallest vector.
pub fn brute_force(inst: &Instance) -> Result<FullSolution, OracleError> {
    let n = inst.n();
    let mut best: Option<(i64, u32)> = None;
    gray_scan(inst, |mask, profit, _, feasible| {
        if !feasible {
            return;
        }
        let better = match best {
            None => true,
            Some((v, b)) => profit > v || (profit == v && lex_key(mask, n) < lex_key(b, n)),
        };
        if better {
            best = Some((profit, mask));
        }
    })?;
    let (value, mask) = best.expect("the empty selection is feasible");
    Ok(FullSolution {
        x: bits(mask, n),
        value,
        feasible: true,
    })
}

/// Every feasible solution of value at least `lb + 1`, optionally on one
/// cardinality, sorted by vector.
pub fn enumerate_improving(
    inst: &Instance,
    lb: i64,
    k: Option<usize>,
) -> Result<Vec<FullSolution>, OracleError> {
    let n = inst.n();
    let mut out = Vec::new();
    gray_scan(inst, |mask, profit, card, feasible| {
        if feasible && profit > lb && k.is_none_or(|k| k == card) {
            out.push(FullSolution {
                x: bits(mask, n),
                value: profit,
                feasible: true,
            });
        }
    })?;
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t1() -> Instance {
        Instance::new("T1", vec![10, 6, 4], vec![vec![5, 4, 3]], vec![8]).unwrap()
    }

    #[test]
    fn t1_optimum() {
        let s = brute_force(&t1()).unwrap();
        assert_eq!((s.value, s.x), (14, vec![true, false, true]));
    }

    #[test]
    fn trivial_cases() {
        let zero = Instance::new("z", vec![0, 0], vec![vec![1, 1]], vec![1]).unwrap();
        let s = brute_force(&zero).unwrap();
        assert_eq!(s.value, 0);
        assert_eq!(s.x, vec![false, false]);
        let nofit = Instance::new("n", vec![3], vec![vec![5]], vec![4]).unwrap();
        assert_eq!(brute_force(&nofit).unwrap().x, vec![false]);
    }

    #[test]
    fn improving_sets() {
        let t = t1();
        let s = enumerate_improving(&t, 13, None).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].x, vec![true, false, true]);
        assert!(enumerate_improving(&t, 14, None).unwrap().is_empty());
        let s = enumerate_improving(&t, -1, Some(0)).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].value, 0);
    }

    #[test]
    fn too_large() {
        let inst = Instance::new("big", vec![1; 26], vec![vec![1; 26]], vec![1]).unwrap();
        assert_eq!(brute_force(&inst), Err(OracleError::TooLarge(26)));
    }

    #[test]
    fn max_of_improving_is_optimum() {
        let inst = Instance::new(
            "s",
            vec![8, 3, 7, 2, 9],
            vec![vec![4, 2, 3, 1, 5], vec![1, 4, 4, 2, 2]],
            vec![8, 7],
        )
        .unwrap();
        let all = enumerate_improving(&inst, -1, None).unwrap();
        let best = all.iter().map(|s| s.value).max().unwrap();
        assert_eq!(brute_force(&inst).unwrap().value, best);
    }
}
