//! One line per acceptance criterion; exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use infometric::analysis::{export_dot, landscape, metric_matrix, DotConfig};
use infometric::estimation::{ingest_csv, quantize, Binning, DiscreteDataset, QuantizeConfig};
use infometric::geometry::{iid_integer_triples, is_geodesic_triple, is_markov_chain, DEFAULT_CELL_BUDGET};
use infometric::oracle::{
    verify_geodesic_equivalence, verify_pseudometric, zero_set_scan, LawSource, OracleReport, Property, SimplexGrid,
    DEFAULT_LAW_BUDGET,
};
use infometric::*;

const EXACT_TOL: f64 = 1e-9;
const COPY_TOL: f64 = 1e-12;
const ZERO_SET_TOL: f64 = 1e-12;
const ESTIMATION_TOL: f64 = 1e-12;
const SEED: u64 = 20_240_517;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn alphabet(sizes: &[usize]) -> Alphabet {
    Alphabet::new(sizes.to_vec()).unwrap()
}

fn set(ix: &[usize]) -> VariableSet {
    VariableSet::from_indices(ix).unwrap()
}

fn max_of(r: &OracleReport, p: Property) -> f64 {
    r.residual(p).map_or(0.0, |x| x.max_residual)
}

fn pseudometric() -> Outcome {
    let start = Instant::now();
    let grid = LawSource::Grid(SimplexGrid::new(alphabet(&[2, 2, 2]), 4).unwrap());
    let sampled = LawSource::Dirichlet { alphabet: alphabet(&[3, 3, 3]), samples: 10_000, seed: SEED };
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, src, expected) in [("grid", &grid, 330usize), ("dirichlet", &sampled, 10_000)] {
        let r = verify_pseudometric(src, EXACT_TOL, DEFAULT_LAW_BUDGET).unwrap();
        let tri = r.residual(Property::Triangle).unwrap().violations;
        let sym = max_of(&r, Property::Symmetry);
        let copy = max_of(&r, Property::CopyIsZero);
        pass &= r.laws_tested == expected && tri == 0 && sym == 0.0 && copy <= COPY_TOL;
        detail.push(format!("{name}: {} laws, {tri} triangle violations, symmetry {sym:e}, copy {copy:e}", r.laws_tested));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(10);
    detail.push(format!("{:.2}s", elapsed.as_secs_f64()));
    outcome(pass, detail.join("; "))
}

fn zero_set() -> Outcome {
    let start = Instant::now();
    let zeros = zero_set_scan(&SimplexGrid::new(alphabet(&[2, 2]), 2).unwrap(), ZERO_SET_TOL, DEFAULT_LAW_BUDGET).unwrap();
    let elapsed = start.elapsed();
    let mut found: Vec<Vec<f64>> = zeros.iter().map(|l| l.to_dense().unwrap()).collect();
    found.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut expected = vec![
        vec![0.5, 0.0, 0.0, 0.5],
        vec![0.0, 0.5, 0.5, 0.0],
        vec![1.0, 0.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0, 0.0],
        vec![0.0, 0.0, 1.0, 0.0],
        vec![0.0, 0.0, 0.0, 1.0],
    ];
    expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let max_v = zeros.iter().map(|l| info_metric(l, 0, 1, LogBase::BITS).unwrap().value).fold(0.0, f64::max);
    let pass = found == expected && max_v <= ZERO_SET_TOL && elapsed < Duration::from_secs(1);
    outcome(pass, format!("{} laws, max V {max_v:e}, {:.3}s", zeros.len(), elapsed.as_secs_f64()))
}

fn random_law(rng: &mut ChaCha8Rng) -> JointLaw {
    let n = rng.random_range(2..=4);
    let sizes: Vec<usize> = (0..n).map(|_| rng.random_range(1..=3)).collect();
    let cells: usize = sizes.iter().product();
    let mut w: Vec<f64> = (0..cells).map(|_| if rng.random_bool(0.25) { 0.0 } else { rng.random::<f64>() }).collect();
    if w.iter().all(|&x| x == 0.0) {
        w[0] = 1.0;
    }
    let total: f64 = w.iter().sum();
    let table: Vec<f64> = w.iter().map(|x| x / total).collect();
    JointLaw::from_dense(Alphabet::new(sizes).unwrap(), &table).unwrap()
}

fn inclusion_exclusion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut route, mut dual) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let law = random_law(&mut rng);
        for bits in 1u64..1 << law.n_vars() {
            let s = VariableSet::from_bits(bits);
            if s.len() >= 2 {
                let d = mutual_information_direct(&law, s, LogBase::BITS).unwrap().value;
                let ie = mutual_information_ie(&law, s, LogBase::BITS).unwrap().value;
                route = route.max((d - ie).abs());
            }
            let h = joint_entropy(&law, s, LogBase::BITS).unwrap().value;
            let back = entropy_from_mi(&law, s, LogBase::BITS).unwrap().value;
            dual = dual.max((h - back).abs());
        }
    }
    outcome(route <= EXACT_TOL && dual <= EXACT_TOL, format!("1000 laws, route gap {route:e}, duality gap {dual:e}"))
}

fn xor_golden() -> Outcome {
    let law = JointLaw::new(
        alphabet(&[2, 2, 2]),
        [(vec![0, 0, 0], 0.25), (vec![0, 1, 1], 0.25), (vec![1, 0, 1], 0.25), (vec![1, 1, 0], 0.25)],
    )
    .unwrap();
    let b = LogBase::BITS;
    let all = set(&[0, 1, 2]);
    let h3 = joint_entropy(&law, all, b).unwrap().value;
    let i2: Vec<f64> = [[0, 1], [0, 2], [1, 2]]
        .iter()
        .map(|p| mutual_information_direct(&law, set(p), b).unwrap().value)
        .collect();
    let i3 = mutual_information_direct(&law, all, b).unwrap().value;
    let i3_ie = mutual_information_ie(&law, all, b).unwrap().value;
    let v3 = info_volume(&law, all, b).unwrap().value;
    let cmi = conditional_mi(&law, set(&[0]), set(&[1]), set(&[2]), b).unwrap().value;
    let pass = (h3 - 2.0).abs() <= EXACT_TOL
        && i2.iter().all(|v| v.abs() <= EXACT_TOL)
        && (i3 + 1.0).abs() <= EXACT_TOL
        && (i3_ie + 1.0).abs() <= EXACT_TOL
        && (v3 - 3.0).abs() <= EXACT_TOL
        && (cmi - 1.0).abs() <= EXACT_TOL;
    outcome(pass, format!("H3 {h3}, I2 {i2:?}, I3 {i3}, V3 {v3}, I(X;Y|Z) {cmi}"))
}

fn geodesic_sources() -> Vec<(&'static str, LawSource)> {
    vec![
        ("grid", LawSource::Grid(SimplexGrid::new(alphabet(&[2, 2, 2]), 4).unwrap())),
        ("pair 2x2", LawSource::PairInMiddle { sizes: [2, 2], samples: 500, seed: SEED }),
        ("pair 3x2", LawSource::PairInMiddle { sizes: [3, 2], samples: 500, seed: SEED + 1 }),
        ("dirichlet", LawSource::Dirichlet { alphabet: alphabet(&[2, 2, 2]), samples: 1000, seed: SEED }),
    ]
}

fn geodesic_equivalence(reports: &[(&str, OracleReport)]) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, r) in reports {
        let disagree = r.residual(Property::GeodesicEquivalence).unwrap().violations;
        let identity = max_of(r, Property::ResidualIdentity);
        pass &= disagree == 0 && identity <= EXACT_TOL;
        detail.push(format!("{name}: {} laws, {disagree} disagreements, identity {identity:e}", r.laws_tested));
    }
    // positive control: the constructed pair law is geodesic
    let coins = JointLaw::uniform(alphabet(&[2, 2])).unwrap();
    let law = coins.pushforward(alphabet(&[2, 4, 2]), |c| vec![c[0], 2 * c[0] + c[1], c[1]]).unwrap();
    pass &= is_geodesic_triple(&mut LawLattice::new(&law, LogBase::BITS), 0, 1, 2, EXACT_TOL).unwrap().is_geodesic;
    outcome(pass, detail.join("; "))
}

fn geodesic_markov(reports: &[(&str, OracleReport)]) -> Outcome {
    let mut pass = true;
    let mut checked = 0;
    for (_, r) in reports {
        let p = r.residual(Property::GeodesicImpliesMarkov);
        checked += p.map_or(0, |p| p.checks);
        pass &= p.is_none_or(|p| p.violations == 0);
    }
    // a Markov certificate must also hold with the chain's own checker on a copy chain
    let copy = JointLaw::uniform(alphabet(&[2])).unwrap().with_copy_of(0).unwrap().with_copy_of(0).unwrap();
    pass &= is_markov_chain(&mut LawLattice::new(&copy, LogBase::BITS), &[0, 1, 2], EXACT_TOL).unwrap().is_markov;
    pass &= checked > 0;
    outcome(pass, format!("{checked} geodesic triples checked"))
}

fn integer_triples() -> Outcome {
    let triples = iid_integer_triples(2, 1024, DEFAULT_CELL_BUDGET, EXACT_TOL).unwrap();
    let mut expected = Vec::new();
    for a in 1u64..=10 {
        for b in 1u64..=10 {
            for z in 1u64..=10 {
                if a * b == a * z + b * z + z * z {
                    expected.push((a, b, z));
                }
            }
        }
    }
    let mut got: Vec<(u64, u64, u64)> =
        triples.iter().map(|t| (t.exponents[0].into(), t.exponents[1].into(), t.exponents[2].into())).collect();
    got.sort();
    expected.sort();
    let hit = triples.iter().find(|t| (t.n_x, t.n_y, t.n_z) == (4, 8, 2));
    let hit_ok = hit.is_some_and(|t| {
        let v = t.verification.as_ref();
        t.distances == [5, 3, 4]
            && v.is_some_and(|v| v.holds && v.residual <= EXACT_TOL && (v.lhs - 25.0).abs() <= EXACT_TOL)
    });
    let verified_ok = triples.iter().all(|t| t.verification.as_ref().is_none_or(|v| v.holds));
    let closed = triples.iter().filter(|t| t.matches_closed_form).count();
    let pass = got == expected && hit_ok && verified_ok;
    outcome(
        pass,
        format!(
            "{} triples {:?}; (4,8,2) verified {hit_ok}; {closed} match the closed form, {} do not",
            got.len(),
            got,
            triples.len() - closed
        ),
    )
}

fn diabetes(bins: usize) -> DiscreteDataset {
    let raw = ingest_csv(std::fs::File::open("tests/data/diabetes.csv").unwrap(), true).unwrap();
    quantize(&raw, &QuantizeConfig::new(Binning::EqualWidth, bins)).unwrap()
}

fn pipeline() -> Outcome {
    let start = Instant::now();
    let data = diabetes(9);
    let m = metric_matrix(&data, LogBase::BITS, false).unwrap();
    let n = m.len();
    let symmetric = (0..n).all(|i| m.get(i, i) == 0.0 && (0..n).all(|j| m.get(i, j) == m.get(j, i) && m.get(i, j) >= 0.0));
    let dot = export_dot(&m, &DotConfig::default());
    let edges = dot.matches(" -- ").count();
    let l = landscape(&data, 4, LogBase::BITS, 1_000_000).unwrap();
    let identity = l.iter().map(|e| (e.v.value - (e.h.value - e.i.value)).abs()).fold(0.0, f64::max);
    let elapsed = start.elapsed();
    let pass = data.n_samples() == 442
        && n == 10
        && symmetric
        && edges == 45
        && l.len() == 375
        && identity <= EXACT_TOL
        && l.iter().all(|e| e.v.value >= -EXACT_TOL)
        && elapsed < Duration::from_secs(30);

    // soft: the 5th and 6th variables (s1, s2) as the closest pair
    let mut soft = Vec::new();
    for bins in [6, 9, 12] {
        let d = diabetes(bins);
        let m = metric_matrix(&d, LogBase::BITS, false).unwrap();
        let (i, j, v) = m.min_pair().unwrap();
        let tag = if (i, j) == (4, 5) { "match" } else { "MISMATCH (logged only)" };
        soft.push(format!("bins {bins}: min ({},{}) V={v:.3} {tag}", m.labels[i], m.labels[j]));
    }
    outcome(
        pass,
        format!(
            "10x10 symmetric {symmetric}, {edges} DOT edges, {} landscape entries, identity {identity:e}, {:.2}s; {}",
            l.len(),
            elapsed.as_secs_f64(),
            soft.join(", ")
        ),
    )
}

fn estimation_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut mass_gap, mut commute_gap) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let n = rng.random_range(2..=5);
        let size = rng.random_range(2..=4u32);
        let samples = rng.random_range(1..=200);
        let rows: Vec<Vec<u32>> =
            (0..samples).map(|_| (0..n).map(|_| rng.random_range(0..size)).collect()).collect();
        let names = (0..n).map(|i| format!("c{i}")).collect();
        let data = DiscreteDataset::from_rows(names, Alphabet::new(vec![size as usize; n]).unwrap(), rows).unwrap();
        let outer = VariableSet::from_bits(rng.random_range(1..1u64 << n));
        let inner_bits = rng.random_range(1..1u64 << n) & outer.bits();
        let inner = if inner_bits == 0 { VariableSet::singleton(outer.iter().next().unwrap()) } else { VariableSet::from_bits(inner_bits) };
        let law = data.empirical_law(outer).unwrap();
        mass_gap = mass_gap.max((law.total_mass() - 1.0).abs());
        let pos: Vec<usize> = outer.iter().enumerate().filter(|(_, v)| inner.contains(*v)).map(|(k, _)| k).collect();
        let two_step = law.marginalize(VariableSet::from_indices(&pos).unwrap()).unwrap();
        let direct = data.empirical_law(inner).unwrap();
        mass_gap = mass_gap.max((direct.total_mass() - 1.0).abs());
        if two_step.alphabet() != direct.alphabet() || two_step.support_len() != direct.support_len() {
            commute_gap = f64::INFINITY;
        }
        for (cell, p) in direct.iter() {
            commute_gap = commute_gap.max((two_step.prob(cell) - p).abs());
        }
    }
    outcome(
        mass_gap <= ESTIMATION_TOL && commute_gap <= ESTIMATION_TOL,
        format!("1000 datasets, mass gap {mass_gap:e}, marginalization gap {commute_gap:e}"),
    )
}

fn main() {
    let geodesic_reports: Vec<(&str, OracleReport)> = geodesic_sources()
        .into_iter()
        .map(|(name, src)| (name, verify_geodesic_equivalence(&src, EXACT_TOL, DEFAULT_LAW_BUDGET).unwrap()))
        .collect();

    let results = [
        ("1 pseudometric axioms", pseudometric()),
        ("2 zero set on 2x2, m=2", zero_set()),
        ("3 inclusion-exclusion consistency", inclusion_exclusion()),
        ("4 XOR golden values", xor_golden()),
        ("5 geodesic equivalence", geodesic_equivalence(&geodesic_reports)),
        ("6 geodesic implies Markov and I3 >= 0", geodesic_markov(&geodesic_reports)),
        ("7 Pythagorean integer triples", integer_triples()),
        ("8 diabetes pipeline", pipeline()),
        ("9 estimation identities", estimation_identities()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("{} [{name}] {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
