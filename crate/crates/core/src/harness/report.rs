use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// The five compared algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    /// Exact maximum stable matching.
    A,
    /// Best of R runs of the 3/2-approximation.
    B,
    /// Single run of the 3/2-approximation.
    C,
    /// Best of R runs of the 2-approximation.
    D,
    /// Single run of the 2-approximation.
    E,
}

impl Label {
    pub const ALL: [Label; 5] = [Self::A, Self::B, Self::C, Self::D, Self::E];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|l| l.to_string() == s)
            .ok_or_else(|| format!("unknown algorithm label `{s}`"))
    }
}

pub const CSV_HEADER: &str = "experiment,n1,n2,n3,pref_len,seed,mode,algo,size,opt,ratio,time_ms,nodes";

/// One CSV row. `opt` and `ratio` are empty when the exact search ran out
/// of budget; `nodes` is set on exact rows only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub experiment: String,
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub pref_len: String,
    pub seed: u64,
    /// Exact search mode, or the popularity mode in experiment 3.
    pub mode: String,
    pub algo: Label,
    pub size: usize,
    pub opt: Option<usize>,
    pub ratio: Option<f64>,
    pub time_ms: f64,
    pub nodes: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.rows.is_empty() {
            w.write_record(CSV_HEADER.split(','))?;
        }
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }

    pub fn read_csv<R: io::Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let rows = r.deserialize().collect::<Result<Vec<ReportRow>, _>>()?;
        Ok(Self { rows })
    }
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Per-size exact solve averages for experiment 0.
#[derive(Clone, Debug, PartialEq)]
pub struct TimingSummary {
    pub n1: usize,
    pub mode: String,
    pub trials: usize,
    pub mean_size: f64,
    pub mean_time_ms: f64,
    pub budget_limited: usize,
}

pub fn summarize_timing(report: &ExperimentReport) -> Vec<TimingSummary> {
    let mut groups: BTreeMap<(usize, String), Vec<&ReportRow>> = BTreeMap::new();
    for row in report.rows.iter().filter(|r| r.algo == Label::A) {
        groups
            .entry((row.n1, row.mode.clone()))
            .or_default()
            .push(row);
    }
    groups
        .into_iter()
        .map(|((n1, mode), rows)| {
            let n = rows.len() as f64;
            TimingSummary {
                n1,
                mode,
                trials: rows.len(),
                mean_size: rows.iter().map(|r| r.size as f64).sum::<f64>() / n,
                mean_time_ms: rows.iter().map(|r| r.time_ms).sum::<f64>() / n,
                budget_limited: rows.iter().filter(|r| r.opt.is_none()).count(),
            }
        })
        .collect()
}

/// Which column groups a ratio table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupBy {
    N1,
    PrefLen,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioSummary {
    /// The `n1` or preference-length value of the group.
    pub key: String,
    pub algo: Label,
    /// Rows with a known optimum.
    pub count: usize,
    pub mean_ratio: f64,
    pub std_err: f64,
    pub mean_size: f64,
}

/// Mean ratio to optimal per group and algorithm, over rows whose optimum
/// is known. Groups keep their order of first appearance.
pub fn ratio_table(report: &ExperimentReport, by: GroupBy) -> Vec<RatioSummary> {
    let mut keys: Vec<String> = Vec::new();
    let mut groups: BTreeMap<(usize, Label), Vec<&ReportRow>> = BTreeMap::new();
    for row in &report.rows {
        let key = match by {
            GroupBy::N1 => row.n1.to_string(),
            GroupBy::PrefLen => row.pref_len.clone(),
        };
        let k = match keys.iter().position(|x| *x == key) {
            Some(k) => k,
            None => {
                keys.push(key);
                keys.len() - 1
            }
        };
        groups.entry((k, row.algo)).or_default().push(row);
    }
    groups
        .into_iter()
        .map(|((k, algo), rows)| {
            let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
            let (mean_ratio, std_err) = mean_and_se(&ratios);
            RatioSummary {
                key: keys[k].clone(),
                algo,
                count: ratios.len(),
                mean_ratio,
                std_err,
                mean_size: rows.iter().map(|r| r.size as f64).sum::<f64>() / rows.len() as f64,
            }
        })
        .collect()
}

/// One instance of experiment 3 with sizes per popularity mode.
#[derive(Clone, Debug, PartialEq)]
pub struct GridRow {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub pref_len: String,
    pub seed: u64,
    /// `(mode, sizes of A..E, exact search hit its budget)`.
    pub cells: Vec<(String, [usize; 5], bool)>,
}

impl GridRow {
    pub fn budget_limited(&self) -> bool {
        self.cells.iter().any(|c| c.2)
    }
}

pub fn grid(report: &ExperimentReport) -> Vec<GridRow> {
    let mut out: Vec<GridRow> = Vec::new();
    for row in &report.rows {
        let same_instance = |g: &GridRow| {
            (g.n1, g.n2, g.n3, &g.pref_len, g.seed)
                == (row.n1, row.n2, row.n3, &row.pref_len, row.seed)
        };
        let g = match out.iter().position(same_instance) {
            Some(i) => &mut out[i],
            None => {
                out.push(GridRow {
                    n1: row.n1,
                    n2: row.n2,
                    n3: row.n3,
                    pref_len: row.pref_len.clone(),
                    seed: row.seed,
                    cells: Vec::new(),
                });
                out.last_mut().expect("just pushed")
            }
        };
        let c = match g.cells.iter().position(|c| c.0 == row.mode) {
            Some(c) => c,
            None => {
                g.cells.push((row.mode.clone(), [0; 5], false));
                g.cells.len() - 1
            }
        };
        g.cells[c].1[row.algo.index()] = row.size;
        if row.algo == Label::A && row.opt.is_none() {
            g.cells[c].2 = true;
        }
    }
    out
}

impl fmt::Display for GridRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.n1, self.n2, self.n3, self.pref_len)?;
        for (mode, sizes, limited) in &self.cells {
            let flag = if *limited { "*" } else { "" };
            write!(f, " | {mode}:")?;
            for s in sizes {
                write!(f, " {s}")?;
            }
            f.write_str(flag)?;
        }
        Ok(())
    }
}
