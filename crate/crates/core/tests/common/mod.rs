#![allow(dead_code)]

use infometric::estimation::DiscreteDataset;
use infometric::{Alphabet, JointLaw, VariableSet};
use proptest::prelude::*;

pub fn alphabet(sizes: &[usize]) -> Alphabet {
    Alphabet::new(sizes.to_vec()).unwrap()
}

pub fn set(ix: &[usize]) -> VariableSet {
    VariableSet::from_indices(ix).unwrap()
}

pub fn dense(sizes: &[usize], table: &[f64]) -> JointLaw {
    JointLaw::from_dense(alphabet(sizes), table).unwrap()
}

pub fn sparse(sizes: &[usize], entries: &[(&[u32], f64)]) -> JointLaw {
    JointLaw::new(alphabet(sizes), entries.iter().map(|(c, p)| (c.to_vec(), *p))).unwrap()
}

pub fn fair_coin() -> JointLaw {
    dense(&[2], &[0.5, 0.5])
}

/// `Z = X ⊕ Y` with fair independent `X`, `Y`.
pub fn xor() -> JointLaw {
    sparse(&[2, 2, 2], &[(&[0, 0, 0], 0.25), (&[0, 1, 1], 0.25), (&[1, 0, 1], 0.25), (&[1, 1, 0], 0.25)])
}

pub fn correlated_pair() -> JointLaw {
    dense(&[2, 2], &[0.5, 0.0, 0.0, 0.5])
}

pub fn independent_coins(n: usize) -> JointLaw {
    JointLaw::uniform(alphabet(&vec![2; n])).unwrap()
}

/// `n` exact copies of a fair coin.
pub fn copies(n: usize) -> JointLaw {
    let mut law = fair_coin();
    for _ in 1..n {
        law = law.with_copy_of(0).unwrap();
    }
    law
}

/// `(A, (A,B), B)` with independent fair coins `A`, `B`.
pub fn pair_in_middle() -> JointLaw {
    independent_coins(2)
        .pushforward(alphabet(&[2, 4, 2]), |c| vec![c[0], 2 * c[0] + c[1], c[1]])
        .unwrap()
}

pub fn dataset(cols: &[&[u32]]) -> DiscreteDataset {
    let n = cols[0].len();
    let sizes = cols.iter().map(|c| *c.iter().max().unwrap() as usize + 1).collect();
    let rows = (0..n).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
    let names = (0..cols.len()).map(|i| format!("v{i}")).collect();
    DiscreteDataset::from_rows(names, Alphabet::new(sizes).unwrap(), rows).unwrap()
}

/// Random law over `n_vars` variables of size `1..=max_size`, about a third of cells empty.
pub fn arb_law(n_vars: std::ops::RangeInclusive<usize>, max_size: usize) -> impl Strategy<Value = JointLaw> {
    n_vars
        .prop_flat_map(move |n| prop::collection::vec(1..=max_size, n))
        .prop_flat_map(|sizes| {
            let cells: usize = sizes.iter().product();
            let weights = prop::collection::vec(prop_oneof![1 => Just(0.0), 2 => 0.01f64..1.0], cells);
            (Just(sizes), weights)
        })
        .prop_map(|(sizes, mut w)| {
            if w.iter().all(|&x| x == 0.0) {
                w[0] = 1.0;
            }
            let total: f64 = w.iter().sum();
            let table: Vec<f64> = w.iter().map(|x| x / total).collect();
            JointLaw::from_dense(Alphabet::new(sizes).unwrap(), &table).unwrap()
        })
}

/// Random discrete dataset with `n_vars` columns of values below `max_size`.
pub fn arb_dataset(n_vars: std::ops::RangeInclusive<usize>, max_size: u32) -> impl Strategy<Value = DiscreteDataset> {
    (n_vars, 1usize..60)
        .prop_flat_map(move |(n, rows)| prop::collection::vec(prop::collection::vec(0..max_size, n), rows))
        .prop_map(move |rows| {
            let n = rows[0].len();
            let names = (0..n).map(|i| format!("c{i}")).collect();
            DiscreteDataset::from_rows(names, Alphabet::new(vec![max_size as usize; n]).unwrap(), rows).unwrap()
        })
}

/// A nonempty subset of `0..n` from a bit pattern.
pub fn subset_from_bits(bits: u64, n: usize) -> VariableSet {
    let mask = (1u64 << n) - 1;
    let b = bits & mask;
    VariableSet::from_bits(if b == 0 { 1 } else { b })
}
