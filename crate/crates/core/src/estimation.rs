//! From tabular data to empirical laws: CSV ingestion, quantization and
//! frequency counting.

use std::collections::{BTreeMap, HashMap};
use std::io::Read;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::info::{entropy_of_masses, EntropyLattice, LogBase};
use crate::law::{Alphabet, JointLaw, VariableSet};

/// Real-valued samples, stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    column_names: Vec<String>,
    columns: Vec<Vec<f64>>,
    n_samples: usize,
}

impl RawDataset {
    pub fn new(column_names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        let n_samples = columns.first().map_or(0, Vec::len);
        if columns.is_empty() || n_samples == 0 {
            return Err(Error::EmptyInput);
        }
        if column_names.len() != columns.len() {
            return Err(Error::Malformed(format!(
                "{} column names for {} columns",
                column_names.len(),
                columns.len()
            )));
        }
        if let Some(bad) = columns.iter().position(|c| c.len() != n_samples) {
            return Err(Error::RaggedRows { row: bad, expected: n_samples, found: columns[bad].len() });
        }
        Ok(RawDataset { column_names, columns, n_samples })
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_vars(&self) -> usize {
        self.columns.len()
    }
}

/// Parses comma-separated numeric cells. Row numbers in errors are 1-based
/// line numbers of the record, counting the header.
pub fn ingest_csv<R: Read>(source: R, has_header: bool) -> Result<RawDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let mut names: Option<Vec<String>> = None;
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;

    for (k, record) in reader.records().enumerate() {
        let record = record?;
        let row = k + 1;
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(Error::RaggedRows { row, expected: w, found: record.len() });
            }
            _ => {}
        }
        if has_header && names.is_none() {
            names = Some(record.iter().map(str::to_owned).collect());
            continue;
        }
        if columns.is_empty() {
            columns = vec![Vec::new(); record.len()];
        }
        for (column, cell) in record.iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::MissingValue { row, column });
            }
            let value: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::NonNumericCell { row, column, value: cell.to_owned() })?;
            columns[column].push(value);
        }
    }

    if columns.is_empty() {
        return Err(Error::EmptyInput);
    }
    let names = names.unwrap_or_else(|| (0..columns.len()).map(|j| format!("x{j}")).collect());
    RawDataset::new(names, columns)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Binning {
    #[default]
    EqualWidth,
    EqualFrequency,
    /// Input is already discrete; values are densely re-indexed.
    None,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bins {
    Global(usize),
    PerVariable(Vec<usize>),
}

pub const DEFAULT_BINS: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizeConfig {
    pub strategy: Binning,
    pub bins: Bins,
}

impl Default for QuantizeConfig {
    fn default() -> Self {
        QuantizeConfig { strategy: Binning::EqualWidth, bins: Bins::Global(DEFAULT_BINS) }
    }
}

impl QuantizeConfig {
    pub fn new(strategy: Binning, bins: usize) -> Self {
        QuantizeConfig { strategy, bins: Bins::Global(bins) }
    }

    fn bins_for(&self, column: usize) -> usize {
        match &self.bins {
            Bins::Global(b) => *b,
            Bins::PerVariable(v) => v[column],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum QuantizeWarning {
    /// A column with a single distinct value collapsed to one bin.
    ConstantColumn { column: usize },
}

/// Samples quantized to bin indices.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDataset {
    column_names: Vec<String>,
    alphabet: Alphabet,
    rows: Vec<Vec<u32>>,
    bin_edges: Vec<Vec<f64>>,
    warnings: Vec<QuantizeWarning>,
}

impl DiscreteDataset {
    /// Wraps already-discrete rows; bin edges are left empty.
    pub fn from_rows(column_names: Vec<String>, alphabet: Alphabet, rows: Vec<Vec<u32>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput);
        }
        if column_names.len() != alphabet.n_vars() {
            return Err(Error::Malformed(format!(
                "{} column names for {} variables",
                column_names.len(),
                alphabet.n_vars()
            )));
        }
        if let Some(row) = rows.iter().find(|r| !alphabet.contains(r)) {
            return Err(Error::OutOfAlphabet { cell: row.clone(), sizes: alphabet.sizes().to_vec() });
        }
        let bin_edges = vec![Vec::new(); alphabet.n_vars()];
        Ok(DiscreteDataset { column_names, alphabet, rows, bin_edges, warnings: Vec::new() })
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn bin_edges(&self) -> &[Vec<f64>] {
        &self.bin_edges
    }

    pub fn warnings(&self) -> &[QuantizeWarning] {
        &self.warnings
    }

    pub fn n_samples(&self) -> usize {
        self.rows.len()
    }

    pub fn n_vars(&self) -> usize {
        self.alphabet.n_vars()
    }

    /// Bin indices as reals, e.g. to re-run [`quantize`] with [`Binning::None`].
    pub fn to_raw(&self) -> RawDataset {
        let columns = (0..self.n_vars()).map(|j| self.rows.iter().map(|r| r[j] as f64).collect()).collect();
        RawDataset { column_names: self.column_names.clone(), columns, n_samples: self.n_samples() }
    }

    fn counts(&self, subset: VariableSet) -> BTreeMap<Vec<u32>, u64> {
        let positions = subset.to_vec();
        let mut counts = BTreeMap::new();
        for row in &self.rows {
            let key: Vec<u32> = positions.iter().map(|&i| row[i]).collect();
            *counts.entry(key).or_insert(0u64) += 1;
        }
        counts
    }

    /// Relative frequencies of the value tuples of `subset`, over the
    /// sub-alphabet of its variables.
    pub fn empirical_law(&self, subset: VariableSet) -> Result<JointLaw> {
        let alphabet = self.alphabet.restrict(subset)?;
        let n = self.n_samples() as f64;
        JointLaw::new(alphabet, self.counts(subset).into_iter().map(|(k, c)| (k, c as f64 / n)))
    }
}

/// Memoized empirical entropies of every variable subset of a dataset.
///
/// The entropy of `S` equals the entropy of `empirical_law(S)` bit for bit:
/// both sum `−(c/n) log(c/n)` over the same counts in the same order.
pub struct DatasetLattice<'a> {
    data: &'a DiscreteDataset,
    base: LogBase,
    cache: HashMap<u64, f64>,
}

impl<'a> DatasetLattice<'a> {
    pub fn new(data: &'a DiscreteDataset, base: LogBase) -> Self {
        DatasetLattice { data, base, cache: HashMap::new() }
    }
}

impl EntropyLattice for DatasetLattice<'_> {
    fn n_vars(&self) -> usize {
        self.data.n_vars()
    }

    fn base(&self) -> LogBase {
        self.base
    }

    fn subset_entropy(&mut self, subset: VariableSet) -> Result<f64> {
        if subset.is_empty() {
            return Ok(0.0);
        }
        if let Some(&h) = self.cache.get(&subset.bits()) {
            return Ok(h);
        }
        subset.check_bounds(self.n_vars())?;
        let n = self.data.n_samples() as f64;
        let h = entropy_of_masses(self.data.counts(subset).into_values().map(|c| c as f64 / n), self.base);
        self.cache.insert(subset.bits(), h);
        Ok(h)
    }
}

struct Quantized {
    indices: Vec<u32>,
    edges: Vec<f64>,
}

fn bin_by_edges(values: &[f64], edges: Vec<f64>) -> Quantized {
    let indices = values.iter().map(|&v| edges.partition_point(|&e| e <= v) as u32).collect();
    Quantized { indices, edges }
}

fn equal_width(values: &[f64], bins: usize) -> Quantized {
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let width = (hi - lo) / bins as f64;
    let mut edges: Vec<f64> = Vec::with_capacity(bins.saturating_sub(1));
    for k in 1..bins {
        let e = lo + k as f64 * width;
        if e > lo && e < hi && edges.last().is_none_or(|&last| e > last) {
            edges.push(e);
        }
    }
    bin_by_edges(values, edges)
}

fn equal_frequency(values: &[f64], bins: usize) -> Quantized {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut edges: Vec<f64> = Vec::new();
    for k in 1..bins {
        let cut = sorted[k * n / bins];
        // ties stay together: a cut equal to the minimum or to the previous
        // cut would only create an empty bin
        if cut > sorted[0] && edges.last().is_none_or(|&last| cut > last) {
            edges.push(cut);
        }
    }
    bin_by_edges(values, edges)
}

fn pass_through(values: &[f64], column: usize) -> Result<Quantized> {
    if let Some(&value) = values.iter().find(|v| v.fract() != 0.0) {
        return Err(Error::NonIntegerForNone { column, value });
    }
    let mut levels = values.to_vec();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    Ok(bin_by_edges(values, levels.split_off(1)))
}

/// Maps every column to bin indices.
///
/// * equal-width: `[min, max]` cut into `bins` equal intervals, the last one
///   closed on the right; values on an internal edge go to the right bin.
/// * equal-frequency: cuts at the empirical quantiles `sorted[k·n/bins]`;
///   equal values share a bin, so fewer bins may be occupied.
/// * none: integer input, re-indexed densely by rank.
pub fn quantize(data: &RawDataset, config: &QuantizeConfig) -> Result<DiscreteDataset> {
    if let Bins::PerVariable(v) = &config.bins {
        if v.len() != data.n_vars() {
            return Err(Error::BinCountMismatch { got: v.len(), expected: data.n_vars() });
        }
    }
    let mut columns = Vec::with_capacity(data.n_vars());
    let mut warnings = Vec::new();
    for (j, values) in data.columns.iter().enumerate() {
        let bins = config.bins_for(j);
        if config.strategy != Binning::None {
            if bins == 0 {
                return Err(Error::ZeroBins);
            }
            if config.strategy == Binning::EqualFrequency && bins > data.n_samples {
                return Err(Error::TooManyBins { column: j, bins, samples: data.n_samples });
            }
        }
        let q = match config.strategy {
            Binning::EqualWidth => equal_width(values, bins),
            Binning::EqualFrequency => equal_frequency(values, bins),
            Binning::None => pass_through(values, j)?,
        };
        if values.iter().all(|&v| v == values[0]) && (config.strategy == Binning::None || bins > 1) {
            warnings.push(QuantizeWarning::ConstantColumn { column: j });
        }
        columns.push(q);
    }

    let sizes: Vec<usize> = columns
        .iter()
        .enumerate()
        .map(|(j, q)| match config.strategy {
            Binning::EqualWidth if !q.edges.is_empty() => config.bins_for(j).max(q.edges.len() + 1),
            _ => q.edges.len() + 1,
        })
        .collect();
    let alphabet = Alphabet::new(sizes)?;
    let rows = (0..data.n_samples).map(|i| columns.iter().map(|q| q.indices[i]).collect()).collect();
    Ok(DiscreteDataset {
        column_names: data.column_names.clone(),
        alphabet,
        rows,
        bin_edges: columns.into_iter().map(|q| q.edges).collect(),
        warnings,
    })
}
