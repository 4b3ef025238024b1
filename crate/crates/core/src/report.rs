//! Line-oriented text report: `key=value` header, then `LB_TRAJECTORY` and
//! `HYPERPLANES` sections in CSV form.

use std::fmt::Write as _;

use thiserror::Error;

use crate::driver::SolveReport;

pub const TRAJECTORY_SECTION: &str = "LB_TRAJECTORY";
pub const HYPERPLANE_SECTION: &str = "HYPERPLANES";
const TRAJECTORY_COLUMNS: &str = "value,time_ms";
const HYPERPLANE_COLUMNS: &str = "k,status,ub_int,obstacle_calls,clauses";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReportError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing section {0}")]
    MissingSection(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperplaneRow {
    pub k: usize,
    pub status: String,
    pub ub_int: Option<i64>,
    pub obstacle_calls: u64,
    pub clauses: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReportDocument {
    /// Header entries in output order.
    pub header: Vec<(String, String)>,
    /// `(value, elapsed milliseconds)`.
    pub trajectory: Vec<(i64, u64)>,
    pub hyperplanes: Vec<HyperplaneRow>,
}

impl ReportDocument {
    pub fn from_report(r: &SolveReport) -> Self {
        let bits: String = r
            .solution
            .x
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect();
        let range = match r.range {
            Some(c) => format!("{}..{}", c.k_min, c.k_max),
            None => "none".into(),
        };
        let mut doc = Self::default();
        doc.set("instance", &r.instance);
        doc.set("n", r.n);
        doc.set("m", r.m);
        doc.set("status", r.status.as_str());
        doc.set("optimum", r.optimum);
        doc.set("time_ms", r.elapsed.as_millis());
        doc.set("solution", bits);
        doc.set("greedy", r.greedy);
        doc.set("k_range", range);
        doc.set("obstacle_calls", r.obstacle_calls());
        doc.set("clauses", r.clauses());
        doc.trajectory = r
            .trajectory
            .iter()
            .map(|i| (i.value, i.elapsed.as_millis() as u64))
            .collect();
        doc.hyperplanes = r
            .hyperplanes
            .iter()
            .map(|h| HyperplaneRow {
                k: h.k,
                status: h.outcome.as_str().into(),
                ub_int: h.ub_int,
                obstacle_calls: h.obstacle_calls,
                clauses: h.clauses,
            })
            .collect();
        doc
    }

    /// Sets a header entry, replacing an existing key in place.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.header.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.header.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.header
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(out, "{k}={v}");
        }
        let _ = writeln!(out, "{TRAJECTORY_SECTION}\n{TRAJECTORY_COLUMNS}");
        for (v, t) in &self.trajectory {
            let _ = writeln!(out, "{v},{t}");
        }
        let _ = writeln!(out, "{HYPERPLANE_SECTION}\n{HYPERPLANE_COLUMNS}");
        for h in &self.hyperplanes {
            let ub = h.ub_int.map_or("-".to_string(), |u| u.to_string());
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                h.k, h.status, ub, h.obstacle_calls, h.clauses
            );
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ReportError> {
        #[derive(PartialEq)]
        enum At {
            Header,
            Trajectory,
            Hyperplanes,
        }
        let mut doc = Self::default();
        let mut at = At::Header;
        let mut seen = (false, false);
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        while let Some((line, raw)) = lines.next() {
            let err = |msg: &str| ReportError::Syntax {
                line,
                msg: msg.to_string(),
            };
            let columns = |expected: &str, next: Option<(usize, &str)>| match next {
                Some((_, l)) if l == expected => Ok(()),
                _ => Err(ReportError::Syntax {
                    line: line + 1,
                    msg: format!("expected column line {expected}"),
                }),
            };
            if raw == TRAJECTORY_SECTION {
                columns(TRAJECTORY_COLUMNS, lines.next())?;
                at = At::Trajectory;
                seen.0 = true;
                continue;
            }
            if raw == HYPERPLANE_SECTION {
                columns(HYPERPLANE_COLUMNS, lines.next())?;
                at = At::Hyperplanes;
                seen.1 = true;
                continue;
            }
            if raw.is_empty() {
                continue;
            }
            match at {
                At::Header => {
                    let (k, v) = raw
                        .split_once('=')
                        .ok_or_else(|| err("expected key=value"))?;
                    doc.header.push((k.to_string(), v.to_string()));
                }
                At::Trajectory => {
                    let (v, t) = raw
                        .split_once(',')
                        .ok_or_else(|| err("expected value,time_ms"))?;
                    let v = v.parse().map_err(|_| err("bad value"))?;
                    let t = t.parse().map_err(|_| err("bad time"))?;
                    doc.trajectory.push((v, t));
                }
                At::Hyperplanes => {
                    let f: Vec<&str> = raw.split(',').collect();
                    if f.len() != 5 {
                        return Err(err("expected 5 fields"));
                    }
                    doc.hyperplanes.push(HyperplaneRow {
                        k: f[0].parse().map_err(|_| err("bad k"))?,
                        status: f[1].to_string(),
                        ub_int: match f[2] {
                            "-" => None,
                            s => Some(s.parse().map_err(|_| err("bad ub_int"))?),
                        },
                        obstacle_calls: f[3].parse().map_err(|_| err("bad obstacle_calls"))?,
                        clauses: f[4].parse().map_err(|_| err("bad clauses"))?,
                    });
                }
            }
        }
        if !seen.0 {
            return Err(ReportError::MissingSection(TRAJECTORY_SECTION));
        }
        if !seen.1 {
            return Err(ReportError::MissingSection(HYPERPLANE_SECTION));
        }
        Ok(doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::{solve, SolveConfig};
    use crate::model::Instance;

    #[test]
    fn round_trip_from_solve() {
        let inst = Instance::new(
            "mix",
            vec![9, 4, 7, 3, 6],
            vec![vec![5, 2, 4, 1, 3], vec![1, 3, 2, 4, 2]],
            vec![7, 6],
        )
        .unwrap();
        let cfg = SolveConfig {
            spb_size: Some(1),
            ..SolveConfig::default()
        };
        let r = solve(&inst, &cfg).unwrap();
        let doc = ReportDocument::from_report(&r);
        let text = doc.render();
        let back = ReportDocument::parse(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.render(), text);
        assert_eq!(back.get("status"), Some("proved"));
        assert_eq!(back.get("optimum"), Some(r.optimum.to_string().as_str()));
    }

    #[test]
    fn infeasible_rows_and_extra_keys() {
        let mut doc = ReportDocument::default();
        doc.set("instance", "x");
        doc.set("registry", "unknown");
        doc.set("registry", "match");
        doc.trajectory.push((4, 0));
        doc.hyperplanes.push(HyperplaneRow {
            k: 3,
            status: "infeasible".into(),
            ub_int: None,
            obstacle_calls: 0,
            clauses: 0,
        });
        let back = ReportDocument::parse(&doc.render()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.header.len(), 2);
    }

    #[test]
    fn malformed() {
        assert_eq!(
            ReportDocument::parse("a=1\n"),
            Err(ReportError::MissingSection(TRAJECTORY_SECTION))
        );
        assert!(matches!(
            ReportDocument::parse("nokey\n"),
            Err(ReportError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            ReportDocument::parse("LB_TRAJECTORY\nwrong\n"),
            Err(ReportError::Syntax { line: 2, .. })
        ));
        assert!(ReportDocument::parse("LB_TRAJECTORY\nvalue,time_ms\nx,1\n").is_err());
    }
}
