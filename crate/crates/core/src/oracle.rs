//! Brute-force verification over the probability simplex.
//!
//! Laws come either from an exhaustive grid (all masses multiples of `1/m`)
//! or from symmetric Dirichlet(1) sampling with a recorded seed. Each law is
//! checked against the pseudometric axioms and the geodesic characterization.
//! Metric values are also recomputed here from the dense table, through a
//! path that shares nothing with [`crate::info`].

use serde::Serialize;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::geometry::{is_geodesic_triple, is_markov_chain};
use crate::info::{EntropyLattice, LawLattice, LogBase};
use crate::law::{Alphabet, JointLaw, VariableSet};

/// Default cap on the number of laws a single run may visit.
pub const DEFAULT_LAW_BUDGET: u128 = 10_000_000;

/// Violations kept verbatim in a report; the rest are only counted.
pub const MAX_RECORDED_VIOLATIONS: usize = 100;

/// All laws whose masses are multiples of `1/resolution`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplexGrid {
    pub alphabet: Alphabet,
    pub resolution: u32,
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

impl SimplexGrid {
    pub fn new(alphabet: Alphabet, resolution: u32) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::Malformed("grid resolution must be at least 1".into()));
        }
        alphabet.cells().ok_or(Error::AlphabetTooLarge)?;
        Ok(SimplexGrid { alphabet, resolution })
    }

    /// Stars and bars: `C(m + cells − 1, cells − 1)`, saturating.
    pub fn law_count(&self) -> u128 {
        let cells = self.alphabet.cells().unwrap_or(usize::MAX) as u128;
        let m = self.resolution as u128;
        binomial(m + cells - 1, cells - 1).unwrap_or(u128::MAX)
    }

    pub fn laws(&self, budget: u128) -> Result<GridLaws> {
        let count = self.law_count();
        if count > budget {
            return Err(Error::BudgetExceeded { what: "grid laws", requested: count, budget });
        }
        let cells = self.alphabet.cells().ok_or(Error::AlphabetTooLarge)?;
        let mut parts = vec![0u32; cells];
        parts[0] = self.resolution;
        Ok(GridLaws { alphabet: self.alphabet.clone(), resolution: self.resolution, parts, done: false })
    }
}

/// Compositions of `m` into `cells` parts, in lexicographically decreasing order.
pub struct GridLaws {
    alphabet: Alphabet,
    resolution: u32,
    parts: Vec<u32>,
    done: bool,
}

impl GridLaws {
    fn advance(&mut self) {
        let k = self.parts.len();
        if k == 1 || self.parts[k - 1] == self.resolution {
            self.done = true;
            return;
        }
        let tail = self.parts[k - 1];
        self.parts[k - 1] = 0;
        let h = (0..k - 1).rev().find(|&i| self.parts[i] > 0).expect("nonzero part before the tail");
        self.parts[h] -= 1;
        self.parts[h + 1] = tail + 1;
    }
}

impl Iterator for GridLaws {
    type Item = JointLaw;

    fn next(&mut self) -> Option<JointLaw> {
        if self.done {
            return None;
        }
        let m = self.resolution as f64;
        let table: Vec<f64> = self.parts.iter().map(|&c| c as f64 / m).collect();
        let law = JointLaw::from_dense(self.alphabet.clone(), &table).expect("grid point is a valid law");
        self.advance();
        Some(law)
    }
}

/// Laws drawn uniformly from the simplex (symmetric Dirichlet with α = 1),
/// as normalized i.i.d. exponential weights.
pub struct DirichletLaws {
    alphabet: Alphabet,
    cells: usize,
    remaining: usize,
    rng: ChaCha8Rng,
}

impl DirichletLaws {
    pub fn new(alphabet: Alphabet, samples: usize, seed: u64) -> Result<Self> {
        let cells = alphabet.cells().ok_or(Error::AlphabetTooLarge)?;
        Ok(DirichletLaws { alphabet, cells, remaining: samples, rng: ChaCha8Rng::seed_from_u64(seed) })
    }
}

impl Iterator for DirichletLaws {
    type Item = JointLaw;

    fn next(&mut self) -> Option<JointLaw> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let weights: Vec<f64> = (0..self.cells).map(|_| Exp1.sample(&mut self.rng)).collect();
        let total: f64 = weights.iter().sum();
        let table: Vec<f64> = weights.iter().map(|w| w / total).collect();
        Some(JointLaw::from_dense(self.alphabet.clone(), &table).expect("normalized weights form a law"))
    }
}

/// Where the laws under test come from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum LawSource {
    Grid(SimplexGrid),
    Dirichlet { alphabet: Alphabet, samples: usize, seed: u64 },
    /// `(X, Y, Z)` with `Y = (X, Z)` and the law of `(X, Z)` drawn from Dirichlet(1).
    PairInMiddle { sizes: [usize; 2], samples: usize, seed: u64 },
}

impl LawSource {
    pub fn n_vars(&self) -> usize {
        match self {
            LawSource::Grid(g) => g.alphabet.n_vars(),
            LawSource::Dirichlet { alphabet, .. } => alphabet.n_vars(),
            LawSource::PairInMiddle { .. } => 3,
        }
    }

    /// Number of laws the source will yield.
    pub fn expected_count(&self) -> u128 {
        match self {
            LawSource::Grid(g) => g.law_count(),
            LawSource::Dirichlet { samples, .. } | LawSource::PairInMiddle { samples, .. } => *samples as u128,
        }
    }

    pub fn laws(&self, budget: u128) -> Result<Box<dyn Iterator<Item = JointLaw>>> {
        let count = self.expected_count();
        if count > budget {
            return Err(Error::BudgetExceeded { what: "oracle laws", requested: count, budget });
        }
        Ok(match self {
            LawSource::Grid(g) => Box::new(g.laws(budget)?),
            LawSource::Dirichlet { alphabet, samples, seed } => {
                Box::new(DirichletLaws::new(alphabet.clone(), *samples, *seed)?)
            }
            LawSource::PairInMiddle { sizes: [nx, nz], samples, seed } => {
                let (nx, nz) = (*nx, *nz);
                let inner = DirichletLaws::new(Alphabet::new(vec![nx, nz])?, *samples, *seed)?;
                let outer = Alphabet::new(vec![nx, nx * nz, nz])?;
                Box::new(inner.map(move |l| {
                    l.pushforward(outer.clone(), |c| vec![c[0], c[0] * nz as u32 + c[1], c[1]])
                        .expect("pair encoding stays in the alphabet")
                }))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    /// `|V(i,j) − V(j,i)|`
    Symmetry,
    /// `V(X, copy of X)`
    CopyIsZero,
    /// `max(0, V(i,k) − V(i,j) − V(j,k))`
    Triangle,
    /// `|V| from [`crate::info`] minus `V` recomputed from the dense table.
    RouteAgreement,
    /// 1 when triangle equality and vanishing certificates disagree.
    GeodesicEquivalence,
    /// `|V(x,z) − V(x,y) − V(y,z) + 2H(y|x,z) + 2I(x;z|y)|`
    ResidualIdentity,
    /// For geodesic triples: worst Markov condition, or `−I₃` when negative.
    GeodesicImpliesMarkov,
    /// 1 when a grid does not yield exactly its stars-and-bars count.
    EnumerationCount,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub law_index: usize,
    pub property: Property,
    pub variables: Vec<usize>,
    pub residual: f64,
    pub law: JointLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyResidual {
    pub property: Property,
    pub checks: u64,
    pub max_residual: f64,
    pub violations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub source: LawSource,
    pub tolerance: f64,
    pub laws_tested: usize,
    pub max_residual: f64,
    pub violation_count: u64,
    /// At most [`MAX_RECORDED_VIOLATIONS`] entries.
    pub violations: Vec<Violation>,
    pub residuals: Vec<PropertyResidual>,
}

impl OracleReport {
    pub fn residual(&self, property: Property) -> Option<&PropertyResidual> {
        self.residuals.iter().find(|r| r.property == property)
    }

    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

struct Recorder {
    tolerance: f64,
    residuals: Vec<PropertyResidual>,
    violations: Vec<Violation>,
    violation_count: u64,
}

impl Recorder {
    fn new(tolerance: f64) -> Self {
        Recorder { tolerance, residuals: Vec::new(), violations: Vec::new(), violation_count: 0 }
    }

    fn record(&mut self, law_index: usize, law: &JointLaw, property: Property, variables: &[usize], residual: f64) {
        let slot = match self.residuals.iter().position(|r| r.property == property) {
            Some(i) => i,
            None => {
                self.residuals.push(PropertyResidual { property, checks: 0, max_residual: 0.0, violations: 0 });
                self.residuals.len() - 1
            }
        };
        let entry = &mut self.residuals[slot];
        entry.checks += 1;
        if residual.is_nan() || residual > entry.max_residual {
            entry.max_residual = residual;
        }
        if residual.is_nan() || residual > self.tolerance {
            entry.violations += 1;
            self.violation_count += 1;
            if self.violations.len() < MAX_RECORDED_VIOLATIONS {
                self.violations.push(Violation {
                    law_index,
                    property,
                    variables: variables.to_vec(),
                    residual,
                    law: law.clone(),
                });
            }
        }
    }

    fn finish(mut self, source: &LawSource, laws_tested: usize) -> OracleReport {
        self.residuals.sort_by_key(|r| r.property);
        let max_residual = self.residuals.iter().map(|r| r.max_residual).fold(0.0, f64::max);
        OracleReport {
            source: source.clone(),
            tolerance: self.tolerance,
            laws_tested,
            max_residual,
            violation_count: self.violation_count,
            violations: self.violations,
            residuals: self.residuals,
        }
    }
}

/// `V(X_i, X_j)` in bits straight from a dense row-major table.
pub fn dense_metric(table: &[f64], sizes: &[usize], i: usize, j: usize) -> f64 {
    let (ni, nj) = (sizes[i], sizes[j]);
    let mut strides = vec![1usize; sizes.len()];
    for k in (0..sizes.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * sizes[k + 1];
    }
    let mut pair = vec![0.0; ni * nj];
    for (idx, &p) in table.iter().enumerate() {
        let xi = (idx / strides[i]) % ni;
        let xj = (idx / strides[j]) % nj;
        pair[xi * nj + xj] += p;
    }
    let mut pi = vec![0.0; ni];
    let mut pj = vec![0.0; nj];
    for a in 0..ni {
        for b in 0..nj {
            pi[a] += pair[a * nj + b];
            pj[b] += pair[a * nj + b];
        }
    }
    let mut v = 0.0;
    for a in 0..ni {
        for b in 0..nj {
            let p = pair[a * nj + b];
            if p > 0.0 {
                v += p * (pi[a] * pj[b] / (p * p)).log2();
            }
        }
    }
    v
}

fn require_vars(source: &LawSource, needed: usize) -> Result<()> {
    if source.n_vars() < needed {
        return Err(Error::TooFewVariables { got: source.n_vars(), needed });
    }
    Ok(())
}

fn check_count(rec: &mut Recorder, source: &LawSource, tested: usize, last: Option<&JointLaw>) {
    if let (LawSource::Grid(_), Some(law)) = (source, last) {
        let ok = tested as u128 == source.expected_count();
        rec.record(tested, law, Property::EnumerationCount, &[], if ok { 0.0 } else { 1.0 });
    }
}

/// Symmetry, `V(X, X') = 0` for an exact copy `X'`, and every triangle
/// inequality, on each law of `source`. Metric values are also compared with
/// [`dense_metric`].
pub fn verify_pseudometric(source: &LawSource, tol: f64, budget: u128) -> Result<OracleReport> {
    require_vars(source, 3)?;
    let mut rec = Recorder::new(tol);
    let mut tested = 0;
    let mut last = None;
    for law in source.laws(budget)? {
        let n = law.n_vars();
        let dense = law.to_dense().ok_or(Error::AlphabetTooLarge)?;
        let mut lattice = LawLattice::new(&law, LogBase::BITS);
        let mut v = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                v[i][j] = lattice.metric(i, j)?;
                if i < j {
                    let dv = dense_metric(&dense, law.alphabet().sizes(), i, j);
                    rec.record(tested, &law, Property::RouteAgreement, &[i, j], (v[i][j] - dv).abs());
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                rec.record(tested, &law, Property::Symmetry, &[i, j], (v[i][j] - v[j][i]).abs());
            }
            let copied = law.with_copy_of(i)?;
            let d = LawLattice::new(&copied, LogBase::BITS).metric(i, n)?;
            rec.record(tested, &law, Property::CopyIsZero, &[i], d);
        }
        for i in 0..n {
            for k in i + 1..n {
                for j in (0..n).filter(|&j| j != i && j != k) {
                    let excess = v[i][k] - (v[i][j] + v[j][k]);
                    rec.record(tested, &law, Property::Triangle, &[i, j, k], excess.max(0.0));
                }
            }
        }
        tested += 1;
        last = Some(law);
    }
    check_count(&mut rec, source, tested, last.as_ref());
    Ok(rec.finish(source, tested))
}

/// For every ordered triple of every law: triangle equality within `2·tol`
/// holds exactly when both certificates vanish within `tol`; the residual
/// identity holds; and geodesic triples are Markov with `I₃ ≥ −tol`.
pub fn verify_geodesic_equivalence(source: &LawSource, tol: f64, budget: u128) -> Result<OracleReport> {
    require_vars(source, 3)?;
    let mut rec = Recorder::new(tol);
    let mut tested = 0;
    let mut last = None;
    for law in source.laws(budget)? {
        let n = law.n_vars();
        let mut lattice = LawLattice::new(&law, LogBase::BITS);
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if x == y || y == z || x == z {
                        continue;
                    }
                    let report = is_geodesic_triple(&mut lattice, x, y, z, tol)?;
                    let cert = &report.triples[0];
                    let equality = cert.triangle_residual.abs() <= 2.0 * tol;
                    let disagree = equality != cert.geodesic;
                    rec.record(tested, &law, Property::GeodesicEquivalence, &[x, y, z], if disagree { 1.0 } else { 0.0 });
                    rec.record(tested, &law, Property::ResidualIdentity, &[x, y, z], cert.identity_residual);
                    if cert.geodesic {
                        let markov = is_markov_chain(&mut lattice, &[x, y, z], tol)?;
                        let worst = markov.conditions.iter().map(|c| c.value).fold(0.0, f64::max);
                        let triple = VariableSet::from_indices(&[x, y, z])?;
                        let i3 = lattice.co_information(triple)?;
                        let residual = if markov.is_markov { (-i3).max(0.0) } else { worst.max((-i3).max(0.0)) };
                        rec.record(tested, &law, Property::GeodesicImpliesMarkov, &[x, y, z], residual);
                    }
                }
            }
        }
        tested += 1;
        last = Some(law);
    }
    check_count(&mut rec, source, tested, last.as_ref());
    Ok(rec.finish(source, tested))
}

/// Grid laws on a 2×2 alphabet with `V(X,Y) ≤ tol`.
pub fn zero_set_scan(grid: &SimplexGrid, tol: f64, budget: u128) -> Result<Vec<JointLaw>> {
    if grid.alphabet.sizes() != [2, 2] {
        return Err(Error::WrongAlphabet { expected: vec![2, 2], got: grid.alphabet.sizes().to_vec() });
    }
    let mut out = Vec::new();
    for law in grid.laws(budget)? {
        if LawLattice::new(&law, LogBase::BITS).metric(0, 1)? <= tol {
            out.push(law);
        }
    }
    Ok(out)
}
