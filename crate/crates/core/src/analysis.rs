//! Dataset-level summaries and their text serializations.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{DatasetLattice, DiscreteDataset};
use crate::info::{rajski_in, EntropyLattice, InfoValue, LogBase};
use crate::law::VariableSet;

/// Subset count above which [`landscape`] refuses to run by default.
pub const DEFAULT_LANDSCAPE_CAP: u128 = 1_000_000;

/// Decimal places used by the CSV writers.
pub const CSV_DECIMALS: usize = 12;

pub const MIN_PENWIDTH: f64 = 0.2;
pub const MAX_PENWIDTH: f64 = 5.0;

/// Pairwise distances between the variables of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricMatrix {
    pub labels: Vec<String>,
    /// `V₂` in units of `base`, row-major.
    pub values: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rajski: Option<Vec<Vec<f64>>>,
}

const SYMMETRY_TOLERANCE: f64 = 1e-12;

fn check_square(labels: &[String], values: &[Vec<f64>], what: &str) -> Result<()> {
    let n = labels.len();
    if values.len() != n || values.iter().any(|r| r.len() != n) {
        return Err(Error::Malformed(format!("{what} must be {n}×{n} to match the labels")));
    }
    for i in 0..n {
        if values[i][i] != 0.0 {
            return Err(Error::Malformed(format!("{what}: diagonal entry {i} is {}", values[i][i])));
        }
        for j in 0..n {
            let v = values[i][j];
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Malformed(format!("{what}: entry ({i},{j}) = {v} is not a distance")));
            }
            if (v - values[j][i]).abs() > SYMMETRY_TOLERANCE {
                return Err(Error::Malformed(format!("{what}: entries ({i},{j}) and ({j},{i}) differ")));
            }
        }
    }
    Ok(())
}

impl MetricMatrix {
    pub fn new(labels: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        check_square(&labels, &values, "metric matrix")?;
        Ok(MetricMatrix { labels, values, rajski: None })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// Off-diagonal pairs `i < j` in row-major order with their distance.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.len();
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j, self.values[i][j])))
    }

    /// The off-diagonal pair with the smallest distance; ties go to the first in row-major order.
    pub fn min_pair(&self) -> Option<(usize, usize, f64)> {
        self.pairs().fold(None, |best, p| match best {
            Some(b) if b.2 <= p.2 => Some(b),
            _ => Some(p),
        })
    }

    pub fn max_value(&self) -> f64 {
        self.pairs().map(|p| p.2).fold(0.0, f64::max)
    }
}

/// `V₂` for every pair of a lattice, each unordered pair evaluated once.
pub fn metric_matrix_of<E: EntropyLattice>(lattice: &mut E, labels: Vec<String>, rajski: bool) -> Result<MetricMatrix> {
    let n = lattice.n_vars();
    if n < 2 {
        return Err(Error::TooFewVariables { got: n, needed: 2 });
    }
    if labels.len() != n {
        return Err(Error::Malformed(format!("{} labels for {n} variables", labels.len())));
    }
    let mut values = vec![vec![0.0; n]; n];
    let mut rj = rajski.then(|| vec![vec![0.0; n]; n]);
    for i in 0..n {
        for j in i + 1..n {
            let v = lattice.metric(i, j)?;
            values[i][j] = v;
            values[j][i] = v;
            if let Some(r) = rj.as_mut() {
                let d = rajski_in(lattice, i, j)?;
                r[i][j] = d;
                r[j][i] = d;
            }
        }
    }
    Ok(MetricMatrix { labels, values, rajski: rj })
}

/// Metric matrix of the empirical laws of a dataset.
pub fn metric_matrix(data: &DiscreteDataset, base: LogBase, rajski: bool) -> Result<MetricMatrix> {
    let mut lattice = DatasetLattice::new(data, base);
    metric_matrix_of(&mut lattice, data.column_names().to_vec(), rajski)
}

/// Entropy, co-information and volume of one variable subset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandscapeEntry {
    pub k: usize,
    pub subset: VariableSet,
    #[serde(rename = "H_k")]
    pub h: InfoValue,
    #[serde(rename = "I_k")]
    pub i: InfoValue,
    #[serde(rename = "V_k")]
    pub v: InfoValue,
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Number of subsets of sizes `2..=k_max` among `n` variables.
pub fn landscape_size(n: usize, k_max: usize) -> u128 {
    (2..=k_max).map(|k| binomial(n as u128, k as u128)).fold(0u128, u128::saturating_add)
}

/// Lexicographic `k`-combinations of `0..n` as bit sets.
fn combinations(n: usize, k: usize) -> impl Iterator<Item = VariableSet> {
    let mut idx: Vec<usize> = (0..k).collect();
    let mut done = k > n;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let set = VariableSet::from_bits(idx.iter().fold(0u64, |b, &i| b | 1 << i));
        match (0..k).rev().find(|&p| idx[p] < n - k + p) {
            Some(p) => {
                idx[p] += 1;
                for q in p + 1..k {
                    idx[q] = idx[q - 1] + 1;
                }
            }
            None => done = true,
        }
        Some(set)
    })
}

/// One entry per subset of size `2..=k_max`, grouped by size, lexicographic within a size.
pub fn landscape_of<E: EntropyLattice>(lattice: &mut E, k_max: usize, cap: u128) -> Result<Vec<LandscapeEntry>> {
    let n = lattice.n_vars();
    if k_max < 2 || k_max > n {
        return Err(Error::KMaxOutOfRange { k_max, n });
    }
    let total = landscape_size(n, k_max);
    if total > cap {
        return Err(Error::BudgetExceeded { what: "landscape subsets", requested: total, budget: cap });
    }
    let base = lattice.base();
    let mut out = Vec::with_capacity(total as usize);
    for k in 2..=k_max {
        for subset in combinations(n, k) {
            let h = lattice.subset_entropy(subset)?;
            let i = lattice.co_information(subset)?;
            let v = lattice.volume(subset)?;
            out.push(LandscapeEntry {
                k,
                subset,
                h: InfoValue::new(h, base),
                i: InfoValue::new(i, base),
                v: InfoValue::new(v, base),
            });
        }
    }
    Ok(out)
}

pub fn landscape(data: &DiscreteDataset, k_max: usize, base: LogBase, cap: u128) -> Result<Vec<LandscapeEntry>> {
    landscape_of(&mut DatasetLattice::new(data, base), k_max, cap)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Json,
}

/// Fixed-point with [`CSV_DECIMALS`] places, trailing zeros removed.
pub fn format_decimal(x: f64) -> String {
    let mut s = format!("{x:.CSV_DECIMALS$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

fn csv_line(fields: impl IntoIterator<Item = String>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(fields.into_iter().collect::<Vec<_>>())?;
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output of UTF-8 fields is UTF-8"))
}

/// CSV starts with the label row followed by one row per variable; JSON is
/// `{"labels": [...], "values": [[...], ...]}` with full precision.
pub fn export_matrix(m: &MetricMatrix, format: MatrixFormat) -> Result<String> {
    match format {
        MatrixFormat::Csv => {
            let mut out = csv_line(m.labels.iter().cloned())?;
            for row in &m.values {
                out.push_str(&csv_line(row.iter().map(|&v| format_decimal(v)))?);
            }
            Ok(out)
        }
        MatrixFormat::Json => {
            let mut s = serde_json::to_string_pretty(m)?;
            s.push('\n');
            Ok(s)
        }
    }
}

pub fn parse_matrix(text: &str, format: MatrixFormat) -> Result<MetricMatrix> {
    match format {
        MatrixFormat::Json => {
            let m: MetricMatrix = serde_json::from_str(text)?;
            check_square(&m.labels, &m.values, "metric matrix")?;
            if let Some(r) = &m.rajski {
                check_square(&m.labels, r, "rajski matrix")?;
            }
            Ok(m)
        }
        MatrixFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
            let labels: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
            let mut values = Vec::new();
            for (r, record) in reader.records().enumerate() {
                let record = record?;
                let row = record
                    .iter()
                    .enumerate()
                    .map(|(c, cell)| {
                        cell.trim().parse::<f64>().map_err(|_| Error::NonNumericCell {
                            row: r + 2,
                            column: c,
                            value: cell.to_owned(),
                        })
                    })
                    .collect::<Result<Vec<f64>>>()?;
                values.push(row);
            }
            MetricMatrix::new(labels, values)
        }
    }
}

/// How distances map to edge thickness in [`export_dot`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DotConfig {
    /// Thick edges for close pairs instead of distant ones.
    pub inverse: bool,
    pub min_penwidth: f64,
    pub max_penwidth: f64,
}

impl Default for DotConfig {
    fn default() -> Self {
        DotConfig { inverse: false, min_penwidth: MIN_PENWIDTH, max_penwidth: MAX_PENWIDTH }
    }
}

impl DotConfig {
    /// Linear map of `[0, max_v]` onto `[min, max]` penwidth, reversed when `inverse`.
    pub fn penwidth(&self, v: f64, max_v: f64) -> f64 {
        let t = if max_v > 0.0 { (v / max_v).clamp(0.0, 1.0) } else { 0.0 };
        let t = if self.inverse { 1.0 - t } else { t };
        self.min_penwidth + t * (self.max_penwidth - self.min_penwidth)
    }
}

fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Undirected complete graph, one edge per pair labelled with its distance.
pub fn export_dot(m: &MetricMatrix, config: &DotConfig) -> String {
    let max_v = m.max_value();
    let mut out = String::from("graph metric {\n");
    for label in &m.labels {
        let _ = writeln!(out, "  {};", dot_id(label));
    }
    for (i, j, v) in m.pairs() {
        let _ = writeln!(
            out,
            "  {} -- {} [penwidth={}, label=\"{}\"];",
            dot_id(&m.labels[i]),
            dot_id(&m.labels[j]),
            format_decimal(config.penwidth(v, max_v)),
            format_decimal(v)
        );
    }
    out.push_str("}\n");
    out
}

/// CSV with columns `k, subset, variables, H_k, I_k, V_k`; variable names are `;`-separated.
pub fn export_landscape_csv(entries: &[LandscapeEntry], labels: &[String]) -> Result<String> {
    let mut out = csv_line(["k", "subset", "variables", "H_k", "I_k", "V_k"].map(String::from))?;
    for e in entries {
        let names: Vec<&str> = e.subset.iter().map(|i| labels.get(i).map_or("?", String::as_str)).collect();
        out.push_str(&csv_line([
            e.k.to_string(),
            e.subset.to_string(),
            names.join(";"),
            format_decimal(e.h.value),
            format_decimal(e.i.value),
            format_decimal(e.v.value),
        ])?);
    }
    Ok(out)
}
