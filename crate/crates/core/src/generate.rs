//! Seeded random instances and the solver-versus-oracle harness.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::Instance;
use crate::oracle::{brute_force, OracleError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomSpec {
    pub n: RangeInclusive<usize>,
    pub m: RangeInclusive<usize>,
    /// Profits and weights are drawn uniformly from `0..=coef_max`.
    pub coef_max: i64,
}

impl Default for RandomSpec {
    fn default() -> Self {
        Self {
            n: 8..=18,
            m: 1..=5,
            coef_max: 100,
        }
    }
}

/// Uniform coefficients with capacities at half the row sums.
pub fn random_instance(rng: &mut impl Rng, spec: &RandomSpec, name: String) -> Instance {
    let n = rng.gen_range(spec.n.clone());
    let m = rng.gen_range(spec.m.clone());
    let profits = (0..n).map(|_| rng.gen_range(0..=spec.coef_max)).collect();
    let weights: Vec<Vec<i64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(0..=spec.coef_max)).collect())
        .collect();
    let capacities = weights
        .iter()
        .map(|row| row.iter().sum::<i64>() / 2)
        .collect();
    Instance::new(name, profits, weights, capacities).expect("generated instance is valid")
}

/// `count` instances from one seed; the sequence is reproducible.
pub fn random_suite(seed: u64, count: usize, spec: &RandomSpec) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| random_instance(&mut rng, spec, format!("rand{seed}_{i}")))
        .collect()
}

/// Correlated instances in the style of the OR-Library `mknapcb` sets:
/// weights in `1..=1000`, capacities at `tightness` times the row sums and
/// profits tied to the column weights.
pub fn correlated_instance(seed: u64, n: usize, m: usize, tightness: f64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<Vec<i64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(1..=1000)).collect())
        .collect();
    let capacities = weights
        .iter()
        .map(|row| (tightness * row.iter().sum::<i64>() as f64).floor() as i64)
        .collect();
    let profits = (0..n)
        .map(|j| {
            let col: i64 = weights.iter().map(|row| row[j]).sum();
            col / m as i64 + rng.gen_range(0..=500)
        })
        .collect();
    Instance::new(format!("corr{m}.{n}_{seed}"), profits, weights, capacities)
        .expect("generated instance is valid")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub instance: String,
    pub expected: i64,
    /// `None` when the solver failed or did not prove optimality.
    pub got: Option<i64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerifySummary {
    pub checked: usize,
    pub mismatches: Vec<Mismatch>,
}

impl VerifySummary {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Solves every instance with `solver` and compares against brute force.
///
/// `solver` returns the proved optimum, or an error message.
pub fn run_verification(
    instances: &[Instance],
    mut solver: impl FnMut(&Instance) -> Result<i64, String>,
) -> Result<VerifySummary, OracleError> {
    let mut summary = VerifySummary::default();
    for inst in instances {
        let expected = brute_force(inst)?.value;
        summary.checked += 1;
        match solver(inst) {
            Ok(v) if v == expected => {}
            Ok(v) => summary.mismatches.push(Mismatch {
                instance: inst.name().to_string(),
                expected,
                got: Some(v),
                detail: "value differs".into(),
            }),
            Err(e) => summary.mismatches.push(Mismatch {
                instance: inst.name().to_string(),
                expected,
                got: None,
                detail: e,
            }),
        }
    }
    Ok(summary)
}
