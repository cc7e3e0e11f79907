//! Scalar information functionals on discrete laws.
//!
//! Entropies are `−Σ p log_c p`, so every Shannon quantity that is provably
//! nonnegative comes out nonnegative. Two independent routes compute the
//! k-mutual information (co-information):
//!
//! * [`mutual_information_direct`] takes the expectation, over atoms of the
//!   joint law, of the log of alternating products of sub-block marginals;
//! * [`mutual_information_ie`] takes the alternating sum of joint entropies
//!   over the subset lattice.
//!
//! Everything built from joint entropies goes through the [`EntropyLattice`]
//! trait so the same code serves exact laws ([`LawLattice`]) and datasets.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::law::{JointLaw, VariableSet};

/// Slack below zero that is attributed to floating-point cancellation.
pub const NEGATIVE_SLACK: f64 = 1e-9;

/// Logarithm base `c > 1`; 2 gives bits, e gives nats.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct LogBase(f64);

impl LogBase {
    pub const BITS: LogBase = LogBase(2.0);
    pub const NATS: LogBase = LogBase(std::f64::consts::E);

    pub fn new(base: f64) -> Result<Self> {
        if base.is_finite() && base > 1.0 {
            Ok(LogBase(base))
        } else {
            Err(Error::InvalidBase(base))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn log(self, x: f64) -> f64 {
        if self.0 == 2.0 {
            x.log2()
        } else if self.0 == std::f64::consts::E {
            x.ln()
        } else {
            x.ln() / self.0.ln()
        }
    }
}

impl Default for LogBase {
    fn default() -> Self {
        LogBase::BITS
    }
}

impl TryFrom<f64> for LogBase {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        LogBase::new(v)
    }
}

impl From<LogBase> for f64 {
    fn from(b: LogBase) -> f64 {
        b.0
    }
}

/// An information quantity together with the log base it is measured in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoValue {
    pub value: f64,
    pub base: LogBase,
}

impl InfoValue {
    pub fn new(value: f64, base: LogBase) -> Self {
        InfoValue { value, base }
    }

    pub fn bits(value: f64) -> Self {
        InfoValue { value, base: LogBase::BITS }
    }

    pub fn value(self) -> f64 {
        self.value
    }

    pub fn base(self) -> LogBase {
        self.base
    }

    fn same_unit(self, other: InfoValue) -> Result<()> {
        if self.base == other.base {
            Ok(())
        } else {
            Err(Error::UnitMismatch { left: self.base.0, right: other.base.0 })
        }
    }

    pub fn try_add(self, other: InfoValue) -> Result<InfoValue> {
        self.same_unit(other)?;
        Ok(InfoValue::new(self.value + other.value, self.base))
    }

    pub fn try_sub(self, other: InfoValue) -> Result<InfoValue> {
        self.same_unit(other)?;
        Ok(InfoValue::new(self.value - other.value, self.base))
    }

    /// Same quantity expressed in another unit.
    pub fn convert(self, base: LogBase) -> InfoValue {
        InfoValue::new(self.value * self.base.0.ln() / base.0.ln(), base)
    }
}

/// Clamps cancellation noise to zero; anything more negative is a bug.
pub(crate) fn nonnegative(value: f64, what: &str) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -NEGATIVE_SLACK {
        Ok(0.0)
    } else {
        Err(Error::InvariantViolation(format!("{what} = {value:e} is negative")))
    }
}

/// `−Σ p log_c p` over a collection of positive masses.
pub fn entropy_of_masses<I: IntoIterator<Item = f64>>(masses: I, base: LogBase) -> f64 {
    // rounding can push a marginal mass a hair above 1
    let h: f64 = masses.into_iter().map(|p| if p >= 1.0 { 0.0 } else { -p * base.log(p) }).sum();
    h + 0.0
}

/// Marginal masses of `law` on `subset`, keyed by the projected tuple.
pub(crate) fn marginal_masses(law: &JointLaw, subset: VariableSet) -> BTreeMap<Vec<u32>, f64> {
    let positions = subset.to_vec();
    let mut out = BTreeMap::new();
    for (cell, p) in law.iter() {
        let key: Vec<u32> = positions.iter().map(|&i| cell[i]).collect();
        *out.entry(key).or_insert(0.0) += p;
    }
    out
}

/// A source of joint entropies `H(X_S)` for subsets of a fixed set of variables.
///
/// `subset_entropy(∅)` is 0. Implementations are expected to memoize.
pub trait EntropyLattice {
    fn n_vars(&self) -> usize;

    fn base(&self) -> LogBase;

    fn subset_entropy(&mut self, subset: VariableSet) -> Result<f64>;

    /// Inclusion–exclusion: `Σ_{∅≠T⊆S} (−1)^{|T|−1} H(T)`. For a singleton this is `H(X)`.
    fn co_information(&mut self, subset: VariableSet) -> Result<f64> {
        self.check(subset, 1)?;
        let mut total = 0.0;
        for t in subset.subsets() {
            let h = self.subset_entropy(t)?;
            if t.len() % 2 == 1 {
                total += h;
            } else {
                total -= h;
            }
        }
        Ok(total)
    }

    /// Dual inclusion–exclusion: `Σ_{∅≠T⊆S} (−1)^{|T|−1} I(T)`, which reconstructs `H(S)`.
    fn entropy_from_co_information(&mut self, subset: VariableSet) -> Result<f64> {
        self.check(subset, 1)?;
        let mut total = 0.0;
        for t in subset.subsets() {
            let i = self.co_information(t)?;
            if t.len() % 2 == 1 {
                total += i;
            } else {
                total -= i;
            }
        }
        Ok(total)
    }

    /// `H(target | given)` as `H(target ∪ given) − H(given)`, without clamping.
    fn conditional_entropy_raw(&mut self, target: VariableSet, given: VariableSet) -> Result<f64> {
        self.check(target, 1)?;
        given.check_bounds(self.n_vars())?;
        if !target.is_disjoint(given) {
            return Err(Error::OverlappingSets);
        }
        Ok(self.subset_entropy(target.union(given))? - self.subset_entropy(given)?)
    }

    /// `I(a; b | given)` from four joint entropies, without clamping.
    fn conditional_mi_raw(&mut self, a: VariableSet, b: VariableSet, given: VariableSet) -> Result<f64> {
        self.check(a, 1)?;
        self.check(b, 1)?;
        given.check_bounds(self.n_vars())?;
        if !a.is_disjoint(b) || !a.is_disjoint(given) || !b.is_disjoint(given) {
            return Err(Error::OverlappingSets);
        }
        let hag = self.subset_entropy(a.union(given))?;
        let hbg = self.subset_entropy(b.union(given))?;
        let hg = self.subset_entropy(given)?;
        let habg = self.subset_entropy(a.union(b).union(given))?;
        Ok((hag + hbg) - (hg + habg))
    }

    fn conditional_entropy(&mut self, target: VariableSet, given: VariableSet) -> Result<f64> {
        let v = self.conditional_entropy_raw(target, given)?;
        nonnegative(v, "conditional entropy")
    }

    fn conditional_mi(&mut self, a: VariableSet, b: VariableSet, given: VariableSet) -> Result<f64> {
        let v = self.conditional_mi_raw(a, b, given)?;
        nonnegative(v, "conditional mutual information")
    }

    /// `V(X_i, X_j) = 2H(X_i,X_j) − H(X_i) − H(X_j)`, symmetric bit for bit.
    fn metric_raw(&mut self, i: usize, j: usize) -> Result<f64> {
        if i == j {
            return Err(Error::SameVariable { index: i });
        }
        let (lo, hi) = (i.min(j), i.max(j));
        let pair = VariableSet::singleton(lo).union(VariableSet::singleton(hi));
        self.check(pair, 2)?;
        let hij = self.subset_entropy(pair)?;
        let hi_ = self.subset_entropy(VariableSet::singleton(lo))?;
        let hj = self.subset_entropy(VariableSet::singleton(hi))?;
        Ok(2.0 * hij - (hi_ + hj))
    }

    fn metric(&mut self, i: usize, j: usize) -> Result<f64> {
        let v = self.metric_raw(i, j)?;
        nonnegative(v, "information metric")
    }

    /// `V_k = H_k − I_k` on `subset`.
    fn volume(&mut self, subset: VariableSet) -> Result<f64> {
        self.check(subset, 2)?;
        let v = self.subset_entropy(subset)? - self.co_information(subset)?;
        nonnegative(v, "information volume")
    }

    #[doc(hidden)]
    fn check(&self, subset: VariableSet, needed: usize) -> Result<()> {
        subset.check_bounds(self.n_vars())?;
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        if subset.len() < needed {
            return Err(Error::SubsetTooSmall { got: subset.len(), needed });
        }
        Ok(())
    }
}

/// Memoized joint entropies of one exact law.
pub struct LawLattice<'a> {
    law: &'a JointLaw,
    base: LogBase,
    cache: HashMap<u64, f64>,
}

impl<'a> LawLattice<'a> {
    pub fn new(law: &'a JointLaw, base: LogBase) -> Self {
        LawLattice { law, base, cache: HashMap::new() }
    }

    pub fn law(&self) -> &'a JointLaw {
        self.law
    }
}

impl EntropyLattice for LawLattice<'_> {
    fn n_vars(&self) -> usize {
        self.law.n_vars()
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
        let h = if subset == self.law.all_variables() {
            entropy_of_masses(self.law.iter().map(|(_, p)| p), self.base)
        } else {
            entropy_of_masses(marginal_masses(self.law, subset).into_values(), self.base)
        };
        self.cache.insert(subset.bits(), h);
        Ok(h)
    }
}

fn check_subset(law: &JointLaw, subset: VariableSet, needed: usize) -> Result<()> {
    LawLattice::new(law, LogBase::BITS).check(subset, needed)
}

pub fn joint_entropy(law: &JointLaw, subset: VariableSet, base: LogBase) -> Result<InfoValue> {
    check_subset(law, subset, 1)?;
    let h = LawLattice::new(law, base).subset_entropy(subset)?;
    Ok(InfoValue::new(h, base))
}

/// k-mutual information as an expectation over the atoms of the joint marginal:
/// `Σ_x p(x) Σ_{∅≠T⊆S} (−1)^{|T|} log p(x_T)`.
///
/// Only atoms of positive joint mass are visited; their sub-block marginals
/// are then positive too.
pub fn mutual_information_direct(law: &JointLaw, subset: VariableSet, base: LogBase) -> Result<InfoValue> {
    check_subset(law, subset, 2)?;
    let blocks: Vec<(Vec<usize>, bool, BTreeMap<Vec<u32>, f64>)> = subset
        .subsets()
        .filter(|&t| t != subset)
        .map(|t| (t.positions_within(subset), t.len() % 2 == 0, marginal_masses(law, t)))
        .collect();
    let joint = marginal_masses(law, subset);
    let top_even = subset.len().is_multiple_of(2);
    let mut total = 0.0;
    let mut key = Vec::with_capacity(subset.len());
    for (atom, &p) in &joint {
        let mut inner = if top_even { base.log(p) } else { -base.log(p) };
        for (positions, even, masses) in &blocks {
            key.clear();
            key.extend(positions.iter().map(|&k| atom[k]));
            let q = masses[key.as_slice()];
            if *even {
                inner += base.log(q);
            } else {
                inner -= base.log(q);
            }
        }
        total += p * inner;
    }
    Ok(InfoValue::new(total, base))
}

/// k-mutual information as the alternating sum of joint entropies.
pub fn mutual_information_ie(law: &JointLaw, subset: VariableSet, base: LogBase) -> Result<InfoValue> {
    let v = LawLattice::new(law, base).co_information(subset)?;
    Ok(InfoValue::new(v, base))
}

/// Joint entropy rebuilt from the k-mutual informations of all sub-blocks.
pub fn entropy_from_mi(law: &JointLaw, subset: VariableSet, base: LogBase) -> Result<InfoValue> {
    let v = LawLattice::new(law, base).entropy_from_co_information(subset)?;
    Ok(InfoValue::new(v, base))
}

pub fn conditional_entropy(
    law: &JointLaw,
    target: VariableSet,
    given: VariableSet,
    base: LogBase,
) -> Result<InfoValue> {
    let v = LawLattice::new(law, base).conditional_entropy(target, given)?;
    Ok(InfoValue::new(v, base))
}

/// `I(a; b | given)`; an empty `given` gives the plain mutual information.
pub fn conditional_mi(
    law: &JointLaw,
    a: VariableSet,
    b: VariableSet,
    given: VariableSet,
    base: LogBase,
) -> Result<InfoValue> {
    let v = LawLattice::new(law, base).conditional_mi(a, b, given)?;
    Ok(InfoValue::new(v, base))
}

/// Information metric `V(X_i, X_j) = H(X_i,X_j) − I(X_i;X_j)`.
pub fn info_metric(law: &JointLaw, i: usize, j: usize, base: LogBase) -> Result<InfoValue> {
    let v = LawLattice::new(law, base).metric(i, j)?;
    Ok(InfoValue::new(v, base))
}

/// The three equivalent closed forms of the information metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricForms {
    /// `H(X,Y) − I(X;Y)`
    pub joint_minus_mutual: f64,
    /// `H(X|Y) + H(Y|X)`
    pub conditional_sum: f64,
    /// `Σ p(x,y) log( p(x)p(y) / p(x,y)² )`
    pub expectation: f64,
}

pub fn info_metric_forms(law: &JointLaw, i: usize, j: usize, base: LogBase) -> Result<MetricForms> {
    if i == j {
        return Err(Error::SameVariable { index: i });
    }
    let (si, sj) = (VariableSet::singleton(i), VariableSet::singleton(j));
    let pair = si.union(sj);
    check_subset(law, pair, 2)?;
    let mut lattice = LawLattice::new(law, base);
    let joint_minus_mutual = lattice.subset_entropy(pair)? - lattice.co_information(pair)?;
    let conditional_sum = lattice.conditional_entropy_raw(si, sj)? + lattice.conditional_entropy_raw(sj, si)?;

    let mi = marginal_masses(law, si);
    let mj = marginal_masses(law, sj);
    let (pi, pj) = if i < j { (0, 1) } else { (1, 0) };
    let expectation = marginal_masses(law, pair)
        .iter()
        .map(|(xy, &p)| p * base.log(mi[&xy[pi..=pi]] * mj[&xy[pj..=pj]] / (p * p)))
        .sum();
    Ok(MetricForms { joint_minus_mutual, conditional_sum, expectation })
}

/// k-volume `V_k = H_k − I_k`.
pub fn info_volume(law: &JointLaw, subset: VariableSet, base: LogBase) -> Result<InfoValue> {
    let v = LawLattice::new(law, base).volume(subset)?;
    Ok(InfoValue::new(v, base))
}

/// Normalized distance `1 − I(X;Y)/H(X,Y)` in `[0, 1]`; 0 when `H(X,Y) = 0`.
pub fn rajski_distance(law: &JointLaw, i: usize, j: usize) -> Result<f64> {
    let mut lattice = LawLattice::new(law, LogBase::BITS);
    rajski_in(&mut lattice, i, j)
}

pub(crate) fn rajski_in<E: EntropyLattice>(lattice: &mut E, i: usize, j: usize) -> Result<f64> {
    let v = lattice.metric(i, j)?;
    let pair = VariableSet::singleton(i).union(VariableSet::singleton(j));
    let h = lattice.subset_entropy(pair)?;
    if h <= 0.0 {
        return Ok(0.0);
    }
    // 1 − I/H = V/H
    Ok((v / h).clamp(0.0, 1.0))
}
