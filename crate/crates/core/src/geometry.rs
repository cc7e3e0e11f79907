//! Decision procedures for the geometry of the information metric.
//!
//! Every procedure runs on an [`EntropyLattice`], so the same code checks
//! exact laws ([`LawLattice`](crate::LawLattice)) and empirical ones
//! ([`DatasetLattice`](crate::estimation::DatasetLattice)).
//!
//! * A chain `(X₁,…,Xₙ)` is Markov when `I(X₁;Xₙ | X_S) = 0` for every
//!   nonempty subset `S` of the interior.
//! * A triple `(X,Y,Z)` is geodesic (`V(X,Z) = V(X,Y) + V(Y,Z)`) exactly when
//!   `H(Y|X,Z) = 0` and `I(X;Z|Y) = 0`; the triangle residual always equals
//!   `−2H(Y|X,Z) − 2I(X;Z|Y)`.
//! * A longer chain is geodesic when all its ordered sub-triples are.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::info::{nonnegative, EntropyLattice, LawLattice, LogBase};
use crate::law::{Alphabet, JointLaw, VariableSet};

/// Certificate tolerance for exact laws.
pub const EXACT_TOLERANCE: f64 = 1e-9;
/// Certificate tolerance for laws estimated from samples.
pub const EMPIRICAL_TOLERANCE: f64 = 1e-6;

/// Largest interior for which all `2^interior − 1` Markov conditions are checked.
pub const MAX_MARKOV_INTERIOR: usize = 24;

fn check_distinct(indices: &[usize], n: usize) -> Result<VariableSet> {
    let set = VariableSet::from_indices(indices)?;
    set.check_bounds(n)?;
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub given: VariableSet,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkovReport {
    pub order: Vec<usize>,
    pub tolerance: f64,
    pub is_markov: bool,
    /// `I(first; last | given)` for every nonempty interior subset.
    pub conditions: Vec<Condition>,
    pub violations: Vec<Condition>,
}

pub fn is_markov_chain<E: EntropyLattice>(lattice: &mut E, order: &[usize], tol: f64) -> Result<MarkovReport> {
    if order.len() < 3 {
        return Err(Error::ChainTooShort(order.len()));
    }
    check_distinct(order, lattice.n_vars())?;
    let interior_len = order.len() - 2;
    if interior_len > MAX_MARKOV_INTERIOR {
        return Err(Error::BudgetExceeded {
            what: "Markov conditions",
            requested: (1u128 << interior_len) - 1,
            budget: (1u128 << MAX_MARKOV_INTERIOR) - 1,
        });
    }
    let first = VariableSet::singleton(order[0]);
    let last = VariableSet::singleton(order[order.len() - 1]);
    let interior = VariableSet::from_indices(&order[1..order.len() - 1])?;

    let mut conditions = Vec::new();
    let mut subsets: Vec<VariableSet> = interior.subsets().collect();
    subsets.sort_by_key(|s| (s.len(), s.to_vec()));
    for given in subsets {
        let value = lattice.conditional_mi(first, last, given)?;
        conditions.push(Condition { given, value });
    }
    let violations: Vec<Condition> = conditions.iter().filter(|c| c.value > tol).cloned().collect();
    Ok(MarkovReport { order: order.to_vec(), tolerance: tol, is_markov: violations.is_empty(), conditions, violations })
}

/// Certificates for one ordered sub-triple `(h, i, j)` of a chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripleCertificate {
    pub triple: [usize; 3],
    /// `I(X_h; X_j | X_i)`
    pub conditional_mi: f64,
    /// `H(X_i | X_h, X_j)`
    pub conditional_entropy: f64,
    /// `V(h,j) − V(h,i) − V(i,j)`, never positive.
    pub triangle_residual: f64,
    /// `|triangle_residual + 2·conditional_entropy + 2·conditional_mi|` on unclamped values.
    pub identity_residual: f64,
    pub geodesic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicReport {
    pub chain: Vec<usize>,
    pub tolerance: f64,
    pub is_geodesic: bool,
    pub triples: Vec<TripleCertificate>,
}

fn triple_certificate<E: EntropyLattice>(lattice: &mut E, h: usize, i: usize, j: usize, tol: f64) -> Result<TripleCertificate> {
    let (sh, si, sj) = (VariableSet::singleton(h), VariableSet::singleton(i), VariableSet::singleton(j));
    let cmi = lattice.conditional_mi_raw(sh, sj, si)?;
    let ce = lattice.conditional_entropy_raw(si, sh.union(sj))?;
    let triangle_residual = lattice.metric_raw(h, j)? - (lattice.metric_raw(h, i)? + lattice.metric_raw(i, j)?);
    let identity_residual = (triangle_residual + 2.0 * ce + 2.0 * cmi).abs();
    let conditional_mi = nonnegative(cmi, "conditional mutual information")?;
    let conditional_entropy = nonnegative(ce, "conditional entropy")?;
    Ok(TripleCertificate {
        triple: [h, i, j],
        conditional_mi,
        conditional_entropy,
        triangle_residual,
        identity_residual,
        geodesic: conditional_mi <= tol && conditional_entropy <= tol,
    })
}

pub fn is_geodesic_triple<E: EntropyLattice>(
    lattice: &mut E,
    x: usize,
    y: usize,
    z: usize,
    tol: f64,
) -> Result<GeodesicReport> {
    is_geodesic_chain(lattice, &[x, y, z], tol)
}

/// Checks every ordered sub-triple `h < i < j` of `order`.
pub fn is_geodesic_chain<E: EntropyLattice>(lattice: &mut E, order: &[usize], tol: f64) -> Result<GeodesicReport> {
    if order.len() < 3 {
        return Err(Error::ChainTooShort(order.len()));
    }
    check_distinct(order, lattice.n_vars())?;
    let mut triples = Vec::new();
    for a in 0..order.len() {
        for b in a + 1..order.len() {
            for c in b + 1..order.len() {
                triples.push(triple_certificate(lattice, order[a], order[b], order[c], tol)?);
            }
        }
    }
    Ok(GeodesicReport {
        chain: order.to_vec(),
        tolerance: tol,
        is_geodesic: triples.iter().all(|t| t.geodesic),
        triples,
    })
}

/// Every triple `(x, y, z)` with distinct entries and `x < z`; the
/// reversed triple is the same geodesic question.
pub fn scan_geodesic_triples<E: EntropyLattice>(lattice: &mut E, tol: f64) -> Result<Vec<GeodesicReport>> {
    let n = lattice.n_vars();
    let mut out = Vec::new();
    for x in 0..n {
        for z in x + 1..n {
            for y in (0..n).filter(|&y| y != x && y != z) {
                out.push(is_geodesic_triple(lattice, x, y, z, tol)?);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PythagoreanReport {
    /// The pair whose distance is the hypotenuse.
    pub hypotenuse: [usize; 2],
    pub legs: [[usize; 2]; 2],
    /// Squared hypotenuse.
    pub lhs: f64,
    /// Sum of squared legs.
    pub rhs: f64,
    pub residual: f64,
    pub holds: bool,
}

/// Tests `V(a,b)² = V(a,c)² + V(b,c)²` for the three cyclic orientations
/// `(x,y,z)`, `(y,z,x)`, `(z,x,y)`.
pub fn pythagorean_check<E: EntropyLattice>(
    lattice: &mut E,
    x: usize,
    y: usize,
    z: usize,
    tol: f64,
) -> Result<[PythagoreanReport; 3]> {
    check_distinct(&[x, y, z], lattice.n_vars())?;
    let mut orient = |a: usize, b: usize, c: usize| -> Result<PythagoreanReport> {
        let hyp = lattice.metric(a, b)?;
        let l1 = lattice.metric(a, c)?;
        let l2 = lattice.metric(b, c)?;
        let lhs = hyp * hyp;
        let rhs = l1 * l1 + l2 * l2;
        let residual = (lhs - rhs).abs();
        Ok(PythagoreanReport {
            hypotenuse: [a, b],
            legs: [[a, c], [b, c]],
            lhs,
            rhs,
            residual,
            holds: residual <= tol * lhs.max(1.0),
        })
    };
    Ok([orient(x, y, z)?, orient(y, z, x)?, orient(z, x, y)?])
}

/// All unordered triples `x < y < z` with their three orientations.
pub fn scan_pythagorean<E: EntropyLattice>(lattice: &mut E, tol: f64) -> Result<Vec<[PythagoreanReport; 3]>> {
    let n = lattice.n_vars();
    let mut out = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            for z in y + 1..n {
                out.push(pythagorean_check(lattice, x, y, z, tol)?);
            }
        }
    }
    Ok(out)
}

/// Default cap on the table size of the product law used to re-verify an
/// integer triple through the full metric computation.
pub const DEFAULT_CELL_BUDGET: u64 = 1 << 20;

/// Alphabet sizes `N_X = c^a`, `N_Y = c^b`, `N_Z = c^z` of independent uniform
/// variables whose metric triangle is right-angled at `Z`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegerTriple {
    pub n_x: u64,
    pub n_y: u64,
    pub n_z: u64,
    pub base: u64,
    /// `(a, b, z)` with `N = c^exponent`.
    pub exponents: [u32; 3],
    /// `V(X,Y) = a+b`, `V(X,Z) = a+z`, `V(Y,Z) = b+z` in units of `log_c`.
    pub distances: [u64; 3],
    /// Whether the triple also has the shape `N_Z = c^k`, `N_Y = N_X^(k²)`.
    pub matches_closed_form: bool,
    /// Hypotenuse-`(X,Y)` orientation recomputed on the product of uniform
    /// laws; `None` when the table exceeds the cell budget.
    pub verification: Option<PythagoreanReport>,
}

/// Exhaustive search over exponents `a, b, z ≥ 1` with `c^a, c^b, c^z ≤ n_max`
/// for `ab = az + bz + z²`, i.e. `(a+b)² = (a+z)² + (b+z)²` in exact integers.
pub fn iid_integer_triples(base: u64, n_max: u64, cell_budget: u64, tol: f64) -> Result<Vec<IntegerTriple>> {
    if base < 2 {
        return Err(Error::InvalidBase(base as f64));
    }
    if n_max < base {
        return Err(Error::SearchBoundTooSmall { base, n_max });
    }
    let mut max_exp = 0u32;
    while base.checked_pow(max_exp + 1).is_some_and(|p| p <= n_max) {
        max_exp += 1;
    }
    let log_base = LogBase::new(base as f64)?;

    let mut out = Vec::new();
    for a in 1..=max_exp as u64 {
        for b in 1..=max_exp as u64 {
            for z in 1..=max_exp as u64 {
                if a * b != a * z + b * z + z * z {
                    continue;
                }
                let distances = [a + b, a + z, b + z];
                if distances[0] * distances[0] != distances[1] * distances[1] + distances[2] * distances[2] {
                    return Err(Error::InvariantViolation(format!("({a},{b},{z}) is not a Pythagorean triple")));
                }
                let verification = match base.checked_pow((a + b + z) as u32) {
                    Some(cells) if cells <= cell_budget => Some(verify_uniform_triple(base, [a, b, z], log_base, tol)?),
                    _ => None,
                };
                out.push(IntegerTriple {
                    n_x: base.pow(a as u32),
                    n_y: base.pow(b as u32),
                    n_z: base.pow(z as u32),
                    base,
                    exponents: [a as u32, b as u32, z as u32],
                    distances,
                    matches_closed_form: b == a * z * z,
                    verification,
                });
            }
        }
    }
    Ok(out)
}

fn verify_uniform_triple(base: u64, exps: [u64; 3], log_base: LogBase, tol: f64) -> Result<PythagoreanReport> {
    let uniform = |e: u64| JointLaw::uniform(Alphabet::new(vec![base.pow(e as u32) as usize])?);
    let law = uniform(exps[0])?.product(&uniform(exps[1])?)?.product(&uniform(exps[2])?)?;
    let [hyp, _, _] = pythagorean_check(&mut LawLattice::new(&law, log_base), 0, 1, 2, tol)?;
    Ok(hyp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const TOL: f64 = EXACT_TOLERANCE;

    fn law(sizes: &[usize], dense: &[f64]) -> JointLaw {
        JointLaw::from_dense(Alphabet::new(sizes.to_vec()).unwrap(), dense).unwrap()
    }

    fn bits(l: &JointLaw) -> LawLattice<'_> {
        LawLattice::new(l, LogBase::BITS)
    }

    fn xor() -> JointLaw {
        let mut t = vec![0.0; 8];
        for x in 0..2 {
            for y in 0..2 {
                t[x * 4 + y * 2 + (x ^ y)] = 0.25;
            }
        }
        law(&[2, 2, 2], &t)
    }

    fn copies(n: usize) -> JointLaw {
        let coin = JointLaw::uniform(Alphabet::new(vec![2]).unwrap()).unwrap();
        coin.pushforward(Alphabet::new(vec![2; n]).unwrap(), |c| vec![c[0]; n]).unwrap()
    }

    fn independent(n: usize) -> JointLaw {
        JointLaw::uniform(Alphabet::new(vec![2; n]).unwrap()).unwrap()
    }

    /// A, B independent coins; variables (A, (A,B), B).
    fn pair_in_the_middle() -> JointLaw {
        let ab = independent(2);
        ab.pushforward(Alphabet::new(vec![2, 4, 2]).unwrap(), |c| vec![c[0], c[0] * 2 + c[1], c[1]]).unwrap()
    }

    #[test]
    fn markov_examples() {
        let c = copies(3);
        assert!(is_markov_chain(&mut bits(&c), &[0, 1, 2], TOL).unwrap().is_markov);

        let x = xor();
        let r = is_markov_chain(&mut bits(&x), &[0, 1, 2], TOL).unwrap();
        assert!(!r.is_markov);
        assert_eq!(r.violations.len(), 1);
        assert_abs_diff_eq!(r.violations[0].value, 1.0, epsilon = 1e-12);

        let ind = independent(3);
        for order in [[0, 1, 2], [2, 0, 1], [1, 2, 0]] {
            assert!(is_markov_chain(&mut bits(&ind), &order, TOL).unwrap().is_markov);
        }
        assert!(matches!(is_markov_chain(&mut bits(&ind), &[0, 1], TOL), Err(Error::ChainTooShort(2))));
        assert!(matches!(is_markov_chain(&mut bits(&ind), &[0, 1, 0], TOL), Err(Error::DuplicateVariable { .. })));
    }

    #[test]
    fn markov_lists_all_interior_subsets() {
        let c = copies(5);
        let r = is_markov_chain(&mut bits(&c), &[4, 1, 2, 3, 0], TOL).unwrap();
        assert_eq!(r.conditions.len(), 7);
        assert_eq!(r.conditions[0].given, VariableSet::singleton(1));
        assert!(r.is_markov);
    }

    #[test]
    fn geodesic_triple_examples() {
        let l = pair_in_the_middle();
        let mut lat = bits(&l);
        let r = is_geodesic_triple(&mut lat, 0, 1, 2, TOL).unwrap();
        assert!(r.is_geodesic);
        assert_abs_diff_eq!(lat.metric(0, 1).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lat.metric(1, 2).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lat.metric(0, 2).unwrap(), 2.0, epsilon = 1e-12);

        let x = xor();
        let r = is_geodesic_triple(&mut bits(&x), 0, 2, 1, TOL).unwrap();
        assert!(!r.is_geodesic);
        assert_abs_diff_eq!(r.triples[0].conditional_mi, 1.0, epsilon = 1e-12);
        assert!(r.triples[0].identity_residual <= 1e-9);

        let ind = independent(3);
        let r = is_geodesic_triple(&mut bits(&ind), 0, 1, 2, TOL).unwrap();
        assert!(!r.is_geodesic);
        assert_abs_diff_eq!(r.triples[0].conditional_entropy, 1.0, epsilon = 1e-12);
        assert!(matches!(is_geodesic_triple(&mut bits(&ind), 0, 0, 2, TOL), Err(Error::DuplicateVariable { .. })));
    }

    #[test]
    fn geodesic_chain_examples() {
        let c = copies(4);
        let mut lat = bits(&c);
        let r = is_geodesic_chain(&mut lat, &[0, 1, 2, 3], TOL).unwrap();
        assert!(r.is_geodesic);
        assert_eq!(r.triples.len(), 4);
        assert!(r.triples.iter().all(|t| t.conditional_mi == 0.0 && t.conditional_entropy == 0.0));
        for i in 0..4 {
            for j in i + 1..4 {
                assert_eq!(lat.metric(i, j).unwrap(), 0.0);
            }
        }
        let ind = independent(4);
        assert!(!is_geodesic_chain(&mut bits(&ind), &[0, 1, 2, 3], TOL).unwrap().is_geodesic);
        assert!(matches!(is_geodesic_chain(&mut bits(&ind), &[0, 1], TOL), Err(Error::ChainTooShort(2))));
    }

    #[test]
    fn pythagorean_examples() {
        let c = copies(3);
        let r = pythagorean_check(&mut bits(&c), 0, 1, 2, TOL).unwrap();
        assert!(r.iter().all(|o| o.holds && o.lhs == 0.0));

        let coins_const = independent(2).product(&law(&[1], &[1.0])).unwrap();
        let r = pythagorean_check(&mut bits(&coins_const), 0, 1, 2, TOL).unwrap();
        assert!(r.iter().all(|o| !o.holds));
        assert_abs_diff_eq!(r[0].lhs, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r[0].rhs, 2.0, epsilon = 1e-12);

        let u = |n: usize| JointLaw::uniform(Alphabet::new(vec![n]).unwrap()).unwrap();
        let l = u(4).product(&u(8)).unwrap().product(&u(2)).unwrap();
        let r = pythagorean_check(&mut bits(&l), 0, 1, 2, TOL).unwrap();
        assert!(r[0].holds);
        assert_eq!(r[0].hypotenuse, [0, 1]);
        assert_abs_diff_eq!(r[0].lhs, 25.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r[0].rhs, 25.0, epsilon = 1e-9);
        assert!(!r[1].holds && !r[2].holds);
    }

    #[test]
    fn integer_triple_examples() {
        let found = iid_integer_triples(2, 16, DEFAULT_CELL_BUDGET, TOL).unwrap();
        let t = found.iter().find(|t| (t.n_x, t.n_y, t.n_z) == (4, 8, 2)).expect("(4,8,2)");
        assert_eq!(t.exponents, [2, 3, 1]);
        assert_eq!(t.distances, [5, 3, 4]);
        assert!(!t.matches_closed_form);
        assert!(t.verification.as_ref().unwrap().holds);
        assert_eq!(found.len(), 2);

        assert!(iid_integer_triples(2, 2, DEFAULT_CELL_BUDGET, TOL).unwrap().is_empty());
        assert!(iid_integer_triples(3, 3usize.pow(8) as u64, 1000, TOL)
            .unwrap()
            .iter()
            .all(|t| t.n_x != t.n_z));
        assert!(matches!(iid_integer_triples(1, 16, 10, TOL), Err(Error::InvalidBase(_))));
        assert!(matches!(iid_integer_triples(4, 3, 10, TOL), Err(Error::SearchBoundTooSmall { .. })));

        // over budget: reported without re-verification
        let t = iid_integer_triples(2, 16, 10, TOL).unwrap();
        assert!(t.iter().all(|t| t.verification.is_none()));
    }

    #[test]
    fn scans_cover_all_triples() {
        let l = independent(4);
        assert_eq!(scan_geodesic_triples(&mut bits(&l), TOL).unwrap().len(), 12);
        assert_eq!(scan_pythagorean(&mut bits(&l), TOL).unwrap().len(), 4);
    }
}
