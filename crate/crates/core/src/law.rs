//! Finite discrete joint laws over product alphabets.
//!
//! A [`JointLaw`] stores only cells of strictly positive mass, so every sum
//! over atoms automatically follows the `0 · log 0 = 0` convention.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on the total mass of a law.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Subsets are bitmasks, which caps the number of variables.
pub const MAX_VARIABLES: usize = 64;

/// Cardinalities N₁,…,Nₙ of the value sets of n variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Alphabet {
    sizes: Vec<usize>,
}

impl Alphabet {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.len() > MAX_VARIABLES {
            return Err(Error::TooManyVariables { got: sizes.len(), max: MAX_VARIABLES });
        }
        if let Some(index) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::EmptyValueSet { index });
        }
        if sizes.iter().any(|&s| s > u32::MAX as usize) {
            return Err(Error::AlphabetTooLarge);
        }
        Ok(Self { sizes })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n_vars(&self) -> usize {
        self.sizes.len()
    }

    /// Number of cells of a dense table, `None` on overflow.
    pub fn cells(&self) -> Option<usize> {
        self.sizes.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s))
    }

    pub fn contains(&self, cell: &[u32]) -> bool {
        cell.len() == self.sizes.len() && cell.iter().zip(&self.sizes).all(|(&x, &n)| (x as usize) < n)
    }

    /// Sub-alphabet of the variables in `keep`, in ascending index order.
    pub fn restrict(&self, keep: VariableSet) -> Result<Alphabet> {
        keep.check_bounds(self.n_vars())?;
        if keep.is_empty() {
            return Err(Error::EmptySubset);
        }
        Ok(Alphabet { sizes: keep.iter().map(|i| self.sizes[i]).collect() })
    }

    pub fn concat(&self, other: &Alphabet) -> Result<Alphabet> {
        let mut sizes = self.sizes.clone();
        sizes.extend_from_slice(&other.sizes);
        Alphabet::new(sizes)
    }

    /// All cells in row-major order (last variable varies fastest).
    pub fn iter_cells(&self) -> CellIter<'_> {
        CellIter { sizes: &self.sizes, next: Some(vec![0; self.sizes.len()]) }
    }
}

impl TryFrom<Vec<usize>> for Alphabet {
    type Error = Error;

    fn try_from(sizes: Vec<usize>) -> Result<Self> {
        Alphabet::new(sizes)
    }
}

impl From<Alphabet> for Vec<usize> {
    fn from(a: Alphabet) -> Self {
        a.sizes
    }
}

/// Odometer over the cells of an alphabet.
pub struct CellIter<'a> {
    sizes: &'a [usize],
    next: Option<Vec<u32>>,
}

impl Iterator for CellIter<'_> {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for pos in (0..succ.len()).rev() {
            succ[pos] += 1;
            if (succ[pos] as usize) < self.sizes[pos] {
                self.next = Some(succ);
                return Some(current);
            }
            succ[pos] = 0;
        }
        Some(current)
    }
}

/// An ascending, duplicate-free set of variable positions stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct VariableSet(u64);

impl VariableSet {
    pub const EMPTY: VariableSet = VariableSet(0);

    pub fn from_indices(indices: &[usize]) -> Result<Self> {
        let mut bits = 0u64;
        for &i in indices {
            if i >= MAX_VARIABLES {
                return Err(Error::IndexOutOfRange { index: i, n: MAX_VARIABLES });
            }
            if bits & (1 << i) != 0 {
                return Err(Error::DuplicateVariable { index: i });
            }
            bits |= 1 << i;
        }
        Ok(VariableSet(bits))
    }

    /// Panics if `index >= 64`.
    pub fn singleton(index: usize) -> Self {
        assert!(index < MAX_VARIABLES, "variable index {index} out of range");
        VariableSet(1 << index)
    }

    /// The set {0, …, n−1}.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_VARIABLES);
        if n == MAX_VARIABLES {
            VariableSet(u64::MAX)
        } else {
            VariableSet((1u64 << n) - 1)
        }
    }

    pub fn from_bits(bits: u64) -> Self {
        VariableSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, index: usize) -> bool {
        index < MAX_VARIABLES && self.0 & (1 << index) != 0
    }

    pub fn union(self, other: Self) -> Self {
        VariableSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        VariableSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        VariableSet(self.0 & !other.0)
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn check_bounds(self, n: usize) -> Result<()> {
        match self.iter().find(|&i| i >= n) {
            Some(index) => Err(Error::IndexOutOfRange { index, n }),
            None => Ok(()),
        }
    }

    /// Indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(i)
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Nonempty subsets of `self`, as sub-bitmasks in descending numeric order.
    pub fn subsets(self) -> impl Iterator<Item = VariableSet> {
        let mask = self.0;
        let mut current = Some(mask);
        std::iter::from_fn(move || {
            let sub = current?;
            if sub == 0 {
                current = None;
                return None;
            }
            current = Some((sub - 1) & mask);
            Some(VariableSet(sub))
        })
    }

    /// Positions of this set's members within `parent`'s ascending order.
    pub(crate) fn positions_within(self, parent: VariableSet) -> Vec<usize> {
        parent.iter().enumerate().filter(|&(_, v)| self.contains(v)).map(|(pos, _)| pos).collect()
    }
}

impl fmt::Display for VariableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for VariableSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for VariableSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let indices = Vec::<usize>::deserialize(deserializer)?;
        VariableSet::from_indices(&indices).map_err(serde::de::Error::custom)
    }
}

/// An exact discrete probability law over a product alphabet.
///
/// Cells are keyed by value tuples and kept in lexicographic order, so every
/// traversal (and every floating-point sum) is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LawFile", into = "LawFile")]
pub struct JointLaw {
    alphabet: Alphabet,
    mass: BTreeMap<Vec<u32>, f64>,
}

impl JointLaw {
    /// Builds a law from `(cell, probability)` pairs. Zero entries are
    /// dropped and repeated cells accumulate.
    pub fn new<I>(alphabet: Alphabet, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let mut mass = BTreeMap::new();
        for (cell, p) in entries {
            if !alphabet.contains(&cell) {
                return Err(Error::OutOfAlphabet { cell, sizes: alphabet.sizes.clone() });
            }
            if !p.is_finite() || p < 0.0 {
                return Err(Error::NegativeMass { cell, mass: p });
            }
            if p > 0.0 {
                *mass.entry(cell).or_insert(0.0) += p;
            }
        }
        let law = JointLaw { alphabet, mass };
        law.validate()?;
        Ok(law)
    }

    /// Row-major dense table, last variable fastest.
    pub fn from_dense(alphabet: Alphabet, table: &[f64]) -> Result<Self> {
        let expected = alphabet.cells().ok_or(Error::AlphabetTooLarge)?;
        if table.len() != expected {
            return Err(Error::DenseLength { got: table.len(), expected });
        }
        let entries: Vec<_> = alphabet.iter_cells().zip(table.iter().copied()).collect();
        JointLaw::new(alphabet, entries)
    }

    pub fn uniform(alphabet: Alphabet) -> Result<Self> {
        let cells = alphabet.cells().ok_or(Error::AlphabetTooLarge)?;
        let p = 1.0 / cells as f64;
        let mass = alphabet.iter_cells().map(|c| (c, p)).collect();
        let law = JointLaw { alphabet, mass };
        law.validate()?;
        Ok(law)
    }

    pub fn point_mass(alphabet: Alphabet, cell: Vec<u32>) -> Result<Self> {
        JointLaw::new(alphabet, [(cell, 1.0)])
    }

    /// Rechecks every structural invariant.
    pub fn validate(&self) -> Result<()> {
        let mut sum = 0.0;
        for (cell, &p) in &self.mass {
            if !self.alphabet.contains(cell) {
                return Err(Error::OutOfAlphabet { cell: cell.clone(), sizes: self.alphabet.sizes.clone() });
            }
            if !p.is_finite() || p <= 0.0 {
                return Err(Error::NegativeMass { cell: cell.clone(), mass: p });
            }
            sum += p;
        }
        if (sum - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::NotNormalized { sum, tolerance: MASS_TOLERANCE });
        }
        Ok(())
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn n_vars(&self) -> usize {
        self.alphabet.n_vars()
    }

    pub fn all_variables(&self) -> VariableSet {
        VariableSet::full(self.n_vars())
    }

    /// Number of cells with positive mass.
    pub fn support_len(&self) -> usize {
        self.mass.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.mass.iter().map(|(c, &p)| (c.as_slice(), p))
    }

    pub fn prob(&self, cell: &[u32]) -> f64 {
        self.mass.get(cell).copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.values().sum()
    }

    /// Marginal law of the variables in `keep`, over their sub-alphabet.
    pub fn marginalize(&self, keep: VariableSet) -> Result<JointLaw> {
        let alphabet = self.alphabet.restrict(keep)?;
        if keep == self.all_variables() {
            return Ok(self.clone());
        }
        let positions = keep.to_vec();
        let mut mass = BTreeMap::new();
        for (cell, &p) in &self.mass {
            let key: Vec<u32> = positions.iter().map(|&i| cell[i]).collect();
            *mass.entry(key).or_insert(0.0) += p;
        }
        Ok(JointLaw { alphabet, mass })
    }

    /// Law of independent pairs: variables of `self` first, then `other`'s.
    pub fn product(&self, other: &JointLaw) -> Result<JointLaw> {
        let alphabet = self.alphabet.concat(&other.alphabet)?;
        let mut mass = BTreeMap::new();
        for (u, &p) in &self.mass {
            for (v, &q) in &other.mass {
                let mut cell = u.clone();
                cell.extend_from_slice(v);
                mass.insert(cell, p * q);
            }
        }
        Ok(JointLaw { alphabet, mass })
    }

    /// Image law under a deterministic map of cells. Used to build derived
    /// variables such as copies or tuples of existing ones.
    pub fn pushforward<F>(&self, alphabet: Alphabet, map: F) -> Result<JointLaw>
    where
        F: Fn(&[u32]) -> Vec<u32>,
    {
        JointLaw::new(alphabet, self.mass.iter().map(|(c, &p)| (map(c), p)))
    }

    /// Appends an exact copy of variable `index` as a new last variable.
    pub fn with_copy_of(&self, index: usize) -> Result<JointLaw> {
        if index >= self.n_vars() {
            return Err(Error::IndexOutOfRange { index, n: self.n_vars() });
        }
        let mut sizes = self.alphabet.sizes.clone();
        sizes.push(sizes[index]);
        self.pushforward(Alphabet::new(sizes)?, |c| {
            let mut out = c.to_vec();
            out.push(c[index]);
            out
        })
    }

    /// Reorders variables: new variable `k` is old variable `order[k]`.
    pub fn permute(&self, order: &[usize]) -> Result<JointLaw> {
        let set = VariableSet::from_indices(order)?;
        if order.len() != self.n_vars() {
            return Err(Error::Malformed(format!(
                "permutation has {} entries for {} variables",
                order.len(),
                self.n_vars()
            )));
        }
        set.check_bounds(self.n_vars())?;
        let sizes = order.iter().map(|&i| self.alphabet.sizes[i]).collect();
        self.pushforward(Alphabet::new(sizes)?, |c| order.iter().map(|&i| c[i]).collect())
    }

    /// Dense row-major table; `None` when the alphabet is too large to allocate.
    pub fn to_dense(&self) -> Option<Vec<f64>> {
        let cells = self.alphabet.cells()?;
        let mut table = vec![0.0; cells];
        for (cell, &p) in &self.mass {
            let idx = cell.iter().zip(&self.alphabet.sizes).fold(0usize, |acc, (&x, &n)| acc * n + x as usize);
            table[idx] = p;
        }
        Some(table)
    }
}

/// On-disk form: `{"alphabet":[N1,…], "mass":[{"cell":[x1,…],"p":0.5},…]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LawFile {
    pub alphabet: Vec<usize>,
    pub mass: Vec<CellMass>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellMass {
    pub cell: Vec<u32>,
    pub p: f64,
}

impl TryFrom<LawFile> for JointLaw {
    type Error = Error;

    fn try_from(file: LawFile) -> Result<Self> {
        JointLaw::new(Alphabet::new(file.alphabet)?, file.mass.into_iter().map(|m| (m.cell, m.p)))
    }
}

impl From<JointLaw> for LawFile {
    fn from(law: JointLaw) -> Self {
        LawFile {
            alphabet: law.alphabet.sizes,
            mass: law.mass.into_iter().map(|(cell, p)| CellMass { cell, p }).collect(),
        }
    }
}
