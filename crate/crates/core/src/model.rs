//! Instance representation for the 0-1 multidimensional knapsack problem.
//!
//! An [`Instance`] holds nonnegative integer profits, an `m x n` consumption
//! matrix and `m` capacities. Everything here is exact integer arithmetic;
//! all row sums and the total profit are checked for `i64` overflow when the
//! instance is built, so later sums over subsets can never overflow.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("instance must have at least one item and one constraint (n={n}, m={m})")]
    Empty { n: usize, m: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("negative coefficient {value} in {what}")]
    Negative { what: &'static str, value: i64 },
    #[error("integer overflow while summing {0}")]
    Overflow(&'static str),
    #[error("solution has length {got}, instance has {expected} items")]
    LengthMismatch { expected: usize, got: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("stream truncated: expected {expected} at token {index}")]
    Truncated {
        index: usize,
        expected: &'static str,
    },
    #[error("token {index} ({token:?}) is not an integer")]
    NotInteger { index: usize, token: String },
    #[error("token {index} holds negative value {value} for {what}")]
    Negative {
        index: usize,
        what: &'static str,
        value: i64,
    },
    #[error("problem starting at token {index} is invalid: {source}")]
    Invalid { index: usize, source: ModelError },
    #[error("{count} trailing tokens after the last problem (first at token {index})")]
    Trailing { index: usize, count: usize },
}

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("registry line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("cannot read registry file: {0}")]
    Io(#[from] std::io::Error),
}

/// Immutable 0-1 multidimensional knapsack instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    name: String,
    profits: Vec<i64>,
    /// Row-major consumption, `weights[i][j] = a_ij`.
    weights: Vec<Vec<i64>>,
    capacities: Vec<i64>,
    declared_optimum: Option<i64>,
}

impl Instance {
    pub fn new(
        name: impl Into<String>,
        profits: Vec<i64>,
        weights: Vec<Vec<i64>>,
        capacities: Vec<i64>,
    ) -> Result<Self, ModelError> {
        let n = profits.len();
        let m = weights.len();
        if n == 0 || m == 0 {
            return Err(ModelError::Empty { n, m });
        }
        if capacities.len() != m {
            return Err(ModelError::Dimension(format!(
                "{} capacities for {} constraints",
                capacities.len(),
                m
            )));
        }
        for (i, row) in weights.iter().enumerate() {
            if row.len() != n {
                return Err(ModelError::Dimension(format!(
                    "constraint {} has {} coefficients, expected {}",
                    i,
                    row.len(),
                    n
                )));
            }
        }
        if let Some(&v) = profits.iter().find(|&&v| v < 0) {
            return Err(ModelError::Negative {
                what: "profits",
                value: v,
            });
        }
        if let Some(&v) = weights.iter().flatten().find(|&&v| v < 0) {
            return Err(ModelError::Negative {
                what: "weights",
                value: v,
            });
        }
        if let Some(&v) = capacities.iter().find(|&&v| v < 0) {
            return Err(ModelError::Negative {
                what: "capacities",
                value: v,
            });
        }
        checked_sum(&profits).ok_or(ModelError::Overflow("profits"))?;
        for row in &weights {
            checked_sum(row).ok_or(ModelError::Overflow("constraint row"))?;
        }
        Ok(Self {
            name: name.into(),
            profits,
            weights,
            capacities,
            declared_optimum: None,
        })
    }

    pub fn with_declared_optimum(mut self, value: Option<i64>) -> Self {
        self.declared_optimum = value;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.profits.len()
    }

    pub fn m(&self) -> usize {
        self.weights.len()
    }

    pub fn profits(&self) -> &[i64] {
        &self.profits
    }

    pub fn profit(&self, j: usize) -> i64 {
        self.profits[j]
    }

    pub fn weights(&self) -> &[Vec<i64>] {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> i64 {
        self.weights[i][j]
    }

    pub fn capacities(&self) -> &[i64] {
        &self.capacities
    }

    pub fn capacity(&self, i: usize) -> i64 {
        self.capacities[i]
    }

    /// Optimum written in the source file. Metadata only; never used as a bound.
    pub fn declared_optimum(&self) -> Option<i64> {
        self.declared_optimum
    }

    /// A row with all-zero coefficients constrains nothing.
    pub fn is_vacuous_row(&self, i: usize) -> bool {
        self.weights[i].iter().all(|&a| a == 0)
    }

    pub fn row_sum(&self, i: usize) -> i64 {
        self.weights[i].iter().sum()
    }

    pub fn total_profit(&self) -> i64 {
        self.profits.iter().sum()
    }

    /// Value and feasibility of a full 0-1 vector.
    pub fn evaluate(&self, x: &[bool]) -> Result<FullSolution, ModelError> {
        evaluate(self, x)
    }
}

fn checked_sum(values: &[i64]) -> Option<i64> {
    values.iter().try_fold(0i64, |acc, &v| acc.checked_add(v))
}

/// A complete 0-1 assignment with its objective value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FullSolution {
    pub x: Vec<bool>,
    pub value: i64,
    pub feasible: bool,
}

impl FullSolution {
    pub fn cardinality(&self) -> usize {
        self.x.iter().filter(|&&b| b).count()
    }

    pub fn bits(&self) -> String {
        self.x.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

pub fn evaluate(inst: &Instance, x: &[bool]) -> Result<FullSolution, ModelError> {
    if x.len() != inst.n() {
        return Err(ModelError::LengthMismatch {
            expected: inst.n(),
            got: x.len(),
        });
    }
    let value = x
        .iter()
        .zip(inst.profits())
        .filter(|(&b, _)| b)
        .map(|(_, &c)| c)
        .sum();
    let feasible = inst
        .weights()
        .iter()
        .zip(inst.capacities())
        .all(|(row, &b)| {
            let used: i64 = x.iter().zip(row).filter(|(&s, _)| s).map(|(_, &a)| a).sum();
            used <= b
        });
    Ok(FullSolution {
        x: x.to_vec(),
        value,
        feasible,
    })
}

/// Default instance name, matching the OR-Library `cbM.N_R` convention.
pub fn default_name(m: usize, n: usize, index: usize) -> String {
    format!("cb{m}.{n}_{index}")
}

struct Tokens<'a> {
    iter: std::iter::Enumerate<std::str::SplitAsciiWhitespace<'a>>,
    consumed: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            iter: text.split_ascii_whitespace().enumerate(),
            consumed: 0,
        }
    }

    fn next_int(&mut self, expected: &'static str) -> Result<(usize, i64), ParseError> {
        match self.iter.next() {
            None => Err(ParseError::Truncated {
                index: self.consumed,
                expected,
            }),
            Some((index, tok)) => {
                self.consumed = index + 1;
                tok.parse::<i64>()
                    .map(|v| (index, v))
                    .map_err(|_| ParseError::NotInteger {
                        index,
                        token: tok.to_string(),
                    })
            }
        }
    }

    fn next_nonneg(&mut self, what: &'static str) -> Result<i64, ParseError> {
        let (index, v) = self.next_int(what)?;
        if v < 0 {
            return Err(ParseError::Negative {
                index,
                what,
                value: v,
            });
        }
        Ok(v)
    }
}

/// Parses OR-Library `mknapcb` text. Instances are named `cbM.N_R`.
pub fn parse_orlib(text: &str) -> Result<Vec<Instance>, ParseError> {
    parse_orlib_with(text, default_name)
}

/// Parses OR-Library `mknapcb` text, naming each problem with `name(m, n, index)`.
pub fn parse_orlib_with(
    text: &str,
    name: impl Fn(usize, usize, usize) -> String,
) -> Result<Vec<Instance>, ParseError> {
    let mut toks = Tokens::new(text);
    let count = toks.next_nonneg("problem count")? as usize;
    let mut out = Vec::with_capacity(count.min(1024));
    for p in 0..count {
        let start = toks.consumed;
        let n = toks.next_nonneg("item count")? as usize;
        let m = toks.next_nonneg("constraint count")? as usize;
        let declared = toks.next_nonneg("declared optimum")?;
        let profits = (0..n)
            .map(|_| toks.next_nonneg("profit"))
            .collect::<Result<Vec<_>, _>>()?;
        let weights = (0..m)
            .map(|_| {
                (0..n)
                    .map(|_| toks.next_nonneg("weight"))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let capacities = (0..m)
            .map(|_| toks.next_nonneg("capacity"))
            .collect::<Result<Vec<_>, _>>()?;
        let inst = Instance::new(name(m, n, p), profits, weights, capacities)
            .map_err(|source| ParseError::Invalid {
                index: start,
                source,
            })?
            .with_declared_optimum((declared != 0).then_some(declared));
        out.push(inst);
    }
    let rest: Vec<_> = toks.iter.by_ref().collect();
    if let Some(&(index, _)) = rest.first() {
        return Err(ParseError::Trailing {
            index,
            count: rest.len(),
        });
    }
    Ok(out)
}

/// Writes instances back in `mknapcb` layout.
pub fn serialize_orlib(instances: &[Instance]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}", instances.len());
    for inst in instances {
        let _ = writeln!(
            s,
            "{} {} {}",
            inst.n(),
            inst.m(),
            inst.declared_optimum().unwrap_or(0)
        );
        write_row(&mut s, inst.profits());
        for row in inst.weights() {
            write_row(&mut s, row);
        }
        write_row(&mut s, inst.capacities());
    }
    s
}

fn write_row(s: &mut String, values: &[i64]) {
    for chunk in values.chunks(10) {
        let line: Vec<String> = chunk.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnownOptimum {
    pub value: i64,
    pub source: String,
}

/// Published optimal values keyed by instance name.
#[derive(Debug, Clone, Default)]
pub struct KnownOptimaRegistry {
    entries: BTreeMap<String, KnownOptimum>,
}

/// Registry table shipped with the crate.
pub const BUNDLED_REGISTRY: &str = include_str!("../../../data/known_optima.txt");

/// Environment variable that may point at an alternative registry file.
pub const REGISTRY_ENV: &str = "RESCUE_MKP_DATA";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegistryCheck {
    Unknown,
    Match(i64),
    Mismatch { expected: i64, got: i64 },
}

impl KnownOptimaRegistry {
    pub fn parse(text: &str) -> Result<Self, RegistryError> {
        let mut entries = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(RegistryError::Malformed {
                    line: lineno + 1,
                    reason: format!("expected 3 fields, found {}", fields.len()),
                });
            }
            let value = fields[1]
                .parse::<i64>()
                .map_err(|_| RegistryError::Malformed {
                    line: lineno + 1,
                    reason: format!("{:?} is not an integer", fields[1]),
                })?;
            entries.insert(
                fields[0].to_string(),
                KnownOptimum {
                    value,
                    source: fields[2].to_string(),
                },
            );
        }
        Ok(Self { entries })
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED_REGISTRY).expect("bundled registry is well formed")
    }

    pub fn from_file(path: &Path) -> Result<Self, RegistryError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Loads from `$RESCUE_MKP_DATA` when set, otherwise the bundled table.
    pub fn load_default() -> Result<Self, RegistryError> {
        match std::env::var_os(REGISTRY_ENV) {
            Some(path) => Self::from_file(Path::new(&path)),
            None => Ok(Self::bundled()),
        }
    }

    /// Adds declared optima of parsed instances that are not already known.
    pub fn absorb_declared(&mut self, instances: &[Instance]) {
        for inst in instances {
            if let Some(v) = inst.declared_optimum() {
                self.entries
                    .entry(inst.name().to_string())
                    .or_insert_with(|| KnownOptimum {
                        value: v,
                        source: "declared".to_string(),
                    });
            }
        }
    }

    pub fn lookup(&self, name: &str) -> Option<i64> {
        self.entries.get(name).map(|e| e.value)
    }

    pub fn entry(&self, name: &str) -> Option<&KnownOptimum> {
        self.entries.get(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn check(&self, name: &str, proved_value: i64) -> RegistryCheck {
        match self.lookup(name) {
            None => RegistryCheck::Unknown,
            Some(v) if v == proved_value => RegistryCheck::Match(v),
            Some(v) => RegistryCheck::Mismatch {
                expected: v,
                got: proved_value,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn t1() -> Instance {
        Instance::new("T1", vec![10, 6, 4], vec![vec![5, 4, 3]], vec![8]).unwrap()
    }

    #[test]
    fn parse_t1() {
        let v = parse_orlib("1 3 1 0 10 6 4 5 4 3 8").unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].profits(), t1().profits());
        assert_eq!(v[0].weights(), t1().weights());
        assert_eq!(v[0].capacities(), t1().capacities());
        assert_eq!(v[0].declared_optimum(), None);
        assert_eq!(v[0].name(), "cb1.3_0");
        let again = parse_orlib(&serialize_orlib(&v)).unwrap();
        assert_eq!(again, v);
    }

    #[test]
    fn parse_empty_file() {
        assert_eq!(parse_orlib("0").unwrap(), vec![]);
    }

    #[test]
    fn parse_truncated() {
        let err = parse_orlib("1 2 1 0 1 1 1 1").unwrap_err();
        assert_eq!(
            err,
            ParseError::Truncated {
                index: 8,
                expected: "capacity"
            }
        );
    }

    #[test]
    fn parse_rejects_negative_and_garbage() {
        assert!(matches!(
            parse_orlib("1 1 1 0 5 -2 3"),
            Err(ParseError::Negative { index: 5, .. })
        ));
        assert!(matches!(
            parse_orlib("1 1 1 0 5 x 3"),
            Err(ParseError::NotInteger { index: 5, .. })
        ));
        assert!(matches!(
            parse_orlib("1 0 1 0 3"),
            Err(ParseError::Invalid { .. }) | Err(ParseError::Trailing { .. })
        ));
    }

    #[test]
    fn parse_keeps_declared_optimum() {
        let v = parse_orlib("1 1 1 7 7 1 1").unwrap();
        assert_eq!(v[0].declared_optimum(), Some(7));
        let mut reg = KnownOptimaRegistry::default();
        reg.absorb_declared(&v);
        assert_eq!(reg.lookup("cb1.1_0"), Some(7));
    }

    #[test]
    fn evaluate_t1() {
        let t = t1();
        let s = t.evaluate(&[true, false, true]).unwrap();
        assert_eq!((s.value, s.feasible), (14, true));
        let s = t.evaluate(&[true, true, false]).unwrap();
        assert_eq!((s.value, s.feasible), (16, false));
        let s = t.evaluate(&[false; 3]).unwrap();
        assert_eq!((s.value, s.feasible), (0, true));
        assert!(matches!(
            t.evaluate(&[true]),
            Err(ModelError::LengthMismatch {
                expected: 3,
                got: 1
            })
        ));
    }

    #[test]
    fn construction_guards() {
        assert!(matches!(
            Instance::new("x", vec![], vec![], vec![]),
            Err(ModelError::Empty { .. })
        ));
        assert!(matches!(
            Instance::new("x", vec![i64::MAX, 1], vec![vec![0, 0]], vec![0]),
            Err(ModelError::Overflow(_))
        ));
        let v = Instance::new("x", vec![1], vec![vec![0]], vec![0]).unwrap();
        assert!(v.is_vacuous_row(0));
    }

    #[test]
    fn registry_lookup() {
        let reg = KnownOptimaRegistry::bundled();
        assert_eq!(reg.len(), 30);
        assert_eq!(reg.lookup("cb10.500_0"), Some(117821));
        assert_eq!(reg.lookup("cb10.500_12"), Some(217847));
        assert_eq!(reg.lookup("unknown_instance"), None);
        assert_eq!(reg.entry("cb10.500_29").unwrap().source, "table1");
        assert_eq!(
            reg.check("cb10.500_0", 117820),
            RegistryCheck::Mismatch {
                expected: 117821,
                got: 117820
            }
        );
    }

    #[test]
    fn registry_rejects_bad_lines() {
        assert!(KnownOptimaRegistry::parse("a 1").is_err());
        assert!(KnownOptimaRegistry::parse("a b c").is_err());
    }
}
