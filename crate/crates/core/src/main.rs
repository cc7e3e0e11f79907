use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use infometric::analysis::{
    export_dot, export_landscape_csv, export_matrix, format_decimal, landscape_of, metric_matrix_of, DotConfig,
    MatrixFormat, DEFAULT_LANDSCAPE_CAP,
};
use infometric::estimation::{ingest_csv, quantize, Binning, DatasetLattice, DiscreteDataset, QuantizeConfig, DEFAULT_BINS};
use infometric::geometry::{
    iid_integer_triples, is_geodesic_chain, is_markov_chain, scan_geodesic_triples, scan_pythagorean,
    DEFAULT_CELL_BUDGET, EMPIRICAL_TOLERANCE, EXACT_TOLERANCE,
};
use infometric::oracle::{
    verify_geodesic_equivalence, verify_pseudometric, zero_set_scan, LawSource, SimplexGrid, DEFAULT_LAW_BUDGET,
};
use infometric::{Alphabet, EntropyLattice, Error, JointLaw, LawLattice, LogBase, Result, VariableSet};

#[derive(Parser)]
#[command(name = "infometric", version, about = "Information distances, volumes and geodesics on discrete data")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Bins per variable for continuous columns.
    #[arg(long, global = true, default_value_t = DEFAULT_BINS)]
    bins: usize,
    #[arg(long, global = true, value_enum, default_value_t = BinningArg::Width)]
    binning: BinningArg,
    #[arg(long, global = true, default_value_t = 2.0)]
    log_base: f64,
    /// Tolerance for vanishing quantities [default: 1e-9 on exact laws, 1e-6 on data].
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Largest subset size in the landscape [default: all variables].
    #[arg(long, global = true)]
    k_max: Option<usize>,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Seed for random law sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// The CSV input has no header row.
    #[arg(long, global = true)]
    no_header: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum BinningArg {
    Width,
    Frequency,
    None,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    ZeroSet,
    Pseudometric,
    Geodesic,
}

#[derive(Subcommand)]
enum Command {
    /// Pairwise information metric matrix.
    Metric {
        input: PathBuf,
        /// Add the normalized distance 1 − I/H to JSON output.
        #[arg(long)]
        rajski: bool,
        /// In DOT output, draw close pairs with thick edges.
        #[arg(long)]
        inverse: bool,
    },
    /// Entropy, co-information and volume of every subset up to --k-max.
    Landscape {
        input: PathBuf,
        /// Refuse to evaluate more subsets than this.
        #[arg(long, default_value_t = DEFAULT_LANDSCAPE_CAP)]
        max_subsets: u128,
    },
    /// Scan all triples for geodesics.
    Geodesics {
        input: PathBuf,
        /// Report every scanned triple, not only geodesic ones.
        #[arg(long)]
        all: bool,
    },
    /// Test whether a variable order is a Markov chain.
    Markov {
        input: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        order: Vec<usize>,
        /// Also certify the order as a geodesic chain.
        #[arg(long)]
        geodesic: bool,
    },
    /// Pythagorean triangles among variables, or the integer search over uniform alphabets.
    Pythagorean {
        input: Option<PathBuf>,
        #[arg(long)]
        iid_search: bool,
        #[arg(long, default_value_t = 2)]
        base: u64,
        #[arg(long, default_value_t = 1024)]
        nmax: u64,
        /// Largest product table rebuilt to verify a triple.
        #[arg(long, default_value_t = DEFAULT_CELL_BUDGET)]
        cell_budget: u64,
    },
    /// Brute-force checks over a simplex grid or random laws.
    Oracle {
        /// Alphabet such as 2x2 or 2x2x2.
        #[arg(long, default_value = "2x2x2")]
        grid: String,
        /// Grid resolution m: masses are multiples of 1/m.
        #[arg(long)]
        resolution: Option<u32>,
        /// [default: zero-set on 2x2, pseudometric otherwise]
        #[arg(long, value_enum)]
        suite: Option<Suite>,
        /// Sample this many Dirichlet(1) laws instead of walking the grid.
        #[arg(long)]
        samples: Option<usize>,
        /// Sample laws of (X, (X,Z), Z) with X, Z of these sizes, such as 2x3.
        #[arg(long)]
        pair: Option<String>,
        #[arg(long, default_value_t = DEFAULT_LAW_BUDGET)]
        budget: u128,
    },
    /// H, I and V of one subset.
    Entropy {
        input: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        subset: Vec<usize>,
    },
}

/// Entropies of either an exact law or a quantized dataset.
enum Lattice<'a> {
    Law(LawLattice<'a>),
    Data(DatasetLattice<'a>),
}

impl EntropyLattice for Lattice<'_> {
    fn n_vars(&self) -> usize {
        match self {
            Lattice::Law(l) => l.n_vars(),
            Lattice::Data(d) => d.n_vars(),
        }
    }

    fn base(&self) -> LogBase {
        match self {
            Lattice::Law(l) => l.base(),
            Lattice::Data(d) => d.base(),
        }
    }

    fn subset_entropy(&mut self, subset: VariableSet) -> Result<f64> {
        match self {
            Lattice::Law(l) => l.subset_entropy(subset),
            Lattice::Data(d) => d.subset_entropy(subset),
        }
    }
}

enum Input {
    Law(JointLaw),
    Data(DiscreteDataset),
}

impl Input {
    fn load(path: &Path, g: &Global) -> Result<Input> {
        let file = File::open(path).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
        let file = BufReader::new(file);
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            return Ok(Input::Law(serde_json::from_reader(file)?));
        }
        let raw = ingest_csv(file, !g.no_header)?;
        let strategy = match g.binning {
            BinningArg::Width => Binning::EqualWidth,
            BinningArg::Frequency => Binning::EqualFrequency,
            BinningArg::None => Binning::None,
        };
        let data = quantize(&raw, &QuantizeConfig::new(strategy, g.bins))?;
        for w in data.warnings() {
            eprintln!("warning: {w:?}");
        }
        Ok(Input::Data(data))
    }

    fn labels(&self) -> Vec<String> {
        match self {
            Input::Law(l) => (0..l.n_vars()).map(|i| format!("x{i}")).collect(),
            Input::Data(d) => d.column_names().to_vec(),
        }
    }

    fn lattice(&self, base: LogBase) -> Lattice<'_> {
        match self {
            Input::Law(l) => Lattice::Law(LawLattice::new(l, base)),
            Input::Data(d) => Lattice::Data(DatasetLattice::new(d, base)),
        }
    }

    fn default_tol(&self) -> f64 {
        match self {
            Input::Law(_) => EXACT_TOLERANCE,
            Input::Data(_) => EMPIRICAL_TOLERANCE,
        }
    }
}

fn parse_sizes(spec: &str) -> Result<Alphabet> {
    let sizes = spec
        .split(['x', 'X'])
        .map(|p| p.trim().parse::<usize>().map_err(|_| Error::Malformed(format!("bad alphabet {spec:?}"))))
        .collect::<Result<Vec<_>>>()?;
    Alphabet::new(sizes)
}

fn json_text<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn unsupported(format: FormatArg, command: &str) -> Error {
    let name = format.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default();
    Error::Malformed(format!("{command} does not support --format {name}"))
}

fn run(cli: Cli) -> Result<String> {
    let g = &cli.global;
    let base = LogBase::new(g.log_base)?;
    if g.tol.is_some_and(|t| !t.is_finite() || t < 0.0) {
        return Err(Error::Malformed("--tol must be a finite nonnegative number".into()));
    }
    let json_only = |command: &str| match g.format {
        None | Some(FormatArg::Json) => Ok(()),
        Some(f) => Err(unsupported(f, command)),
    };
    match &cli.command {
        Command::Metric { input, rajski, inverse } => {
            let input = Input::load(input, g)?;
            let m = metric_matrix_of(&mut input.lattice(base), input.labels(), *rajski)?;
            match g.format.unwrap_or(FormatArg::Csv) {
                FormatArg::Csv => export_matrix(&m, MatrixFormat::Csv),
                FormatArg::Json => export_matrix(&m, MatrixFormat::Json),
                FormatArg::Dot => Ok(export_dot(&m, &DotConfig { inverse: *inverse, ..DotConfig::default() })),
            }
        }
        Command::Landscape { input, max_subsets } => {
            let input = Input::load(input, g)?;
            let mut lattice = input.lattice(base);
            let k_max = g.k_max.unwrap_or(lattice.n_vars());
            let entries = landscape_of(&mut lattice, k_max, *max_subsets)?;
            match g.format.unwrap_or(FormatArg::Csv) {
                FormatArg::Csv => export_landscape_csv(&entries, &input.labels()),
                FormatArg::Json => json_text(&json!({ "labels": input.labels(), "entries": entries })),
                f => Err(unsupported(f, "landscape")),
            }
        }
        Command::Geodesics { input, all } => {
            json_only("geodesics")?;
            let input = Input::load(input, g)?;
            let tol = g.tol.unwrap_or(input.default_tol());
            let reports = scan_geodesic_triples(&mut input.lattice(base), tol)?;
            let scanned = reports.len();
            let shown: Vec<_> = reports.into_iter().filter(|r| *all || r.is_geodesic).collect();
            let geodesic_count = shown.iter().filter(|r| r.is_geodesic).count();
            json_text(&json!({
                "labels": input.labels(),
                "tolerance": tol,
                "triples_scanned": scanned,
                "geodesic_count": geodesic_count,
                "triples": shown,
            }))
        }
        Command::Markov { input, order, geodesic } => {
            json_only("markov")?;
            let input = Input::load(input, g)?;
            let tol = g.tol.unwrap_or(input.default_tol());
            let mut lattice = input.lattice(base);
            let markov = is_markov_chain(&mut lattice, order, tol)?;
            if *geodesic {
                let chain = is_geodesic_chain(&mut lattice, order, tol)?;
                json_text(&json!({ "markov": markov, "geodesic": chain }))
            } else {
                json_text(&markov)
            }
        }
        Command::Pythagorean { input, iid_search, base: c, nmax, cell_budget } => {
            if *iid_search {
                let tol = g.tol.unwrap_or(EXACT_TOLERANCE);
                let triples = iid_integer_triples(*c, *nmax, *cell_budget, tol)?;
                return match g.format.unwrap_or(FormatArg::Json) {
                    FormatArg::Json => json_text(&triples),
                    FormatArg::Csv => {
                        let mut out = String::from("n_x,n_y,n_z,a,b,z,v_xy,v_xz,v_yz,matches_closed_form,residual\n");
                        for t in &triples {
                            let [a, b, z] = t.exponents;
                            let [vxy, vxz, vyz] = t.distances;
                            let residual = t.verification.as_ref().map_or(String::new(), |v| format_decimal(v.residual));
                            out.push_str(&format!(
                                "{},{},{},{a},{b},{z},{vxy},{vxz},{vyz},{},{residual}\n",
                                t.n_x, t.n_y, t.n_z, t.matches_closed_form
                            ));
                        }
                        Ok(out)
                    }
                    f => Err(unsupported(f, "pythagorean")),
                };
            }
            json_only("pythagorean")?;
            let path = input
                .as_ref()
                .ok_or_else(|| Error::Malformed("pythagorean needs an input file or --iid-search".into()))?;
            let input = Input::load(path, g)?;
            let tol = g.tol.unwrap_or(input.default_tol());
            let reports = scan_pythagorean(&mut input.lattice(base), tol)?;
            let right: Vec<_> = reports.iter().flatten().filter(|r| r.holds).collect();
            json_text(&json!({
                "labels": input.labels(),
                "tolerance": tol,
                "triples_scanned": reports.len(),
                "right_angles": right,
            }))
        }
        Command::Oracle { grid, resolution, suite, samples, pair, budget } => {
            json_only("oracle")?;
            let alphabet = parse_sizes(grid)?;
            let source = match (pair, samples, resolution) {
                (Some(p), n, _) => {
                    let sizes = parse_sizes(p)?;
                    let [nx, nz] = sizes.sizes() else {
                        return Err(Error::Malformed("--pair takes two sizes such as 2x3".into()));
                    };
                    LawSource::PairInMiddle { sizes: [*nx, *nz], samples: n.unwrap_or(1000), seed: g.seed }
                }
                (None, Some(n), _) => LawSource::Dirichlet { alphabet: alphabet.clone(), samples: *n, seed: g.seed },
                (None, None, m) => LawSource::Grid(SimplexGrid::new(alphabet.clone(), m.unwrap_or(4))?),
            };
            if !matches!(source, LawSource::Grid(_)) {
                eprintln!("seed: {}", g.seed);
            }
            let suite = suite.unwrap_or(if alphabet.sizes() == [2, 2] && pair.is_none() {
                Suite::ZeroSet
            } else {
                Suite::Pseudometric
            });
            match suite {
                Suite::ZeroSet => {
                    let LawSource::Grid(grid) = &source else {
                        return Err(Error::Malformed("the zero-set suite walks a grid; drop --samples and --pair".into()));
                    };
                    let tol = g.tol.unwrap_or(1e-12);
                    let zeros = zero_set_scan(grid, tol, *budget)?;
                    json_text(&json!({
                        "suite": "zero-set",
                        "source": source,
                        "tolerance": tol,
                        "laws_tested": grid.law_count(),
                        "zero_count": zeros.len(),
                        "zero_set": zeros,
                    }))
                }
                Suite::Pseudometric => {
                    json_text(&verify_pseudometric(&source, g.tol.unwrap_or(EXACT_TOLERANCE), *budget)?)
                }
                Suite::Geodesic => {
                    json_text(&verify_geodesic_equivalence(&source, g.tol.unwrap_or(EXACT_TOLERANCE), *budget)?)
                }
            }
        }
        Command::Entropy { input, subset } => {
            let input = Input::load(input, g)?;
            let set = VariableSet::from_indices(subset)?;
            let mut lattice = input.lattice(base);
            lattice.check(set, 1)?;
            let h = lattice.subset_entropy(set)?;
            let i = lattice.co_information(set)?;
            let v = if set.len() >= 2 { Some(lattice.volume(set)?) } else { None };
            let h_from_i = lattice.entropy_from_co_information(set)?;
            match g.format.unwrap_or(FormatArg::Json) {
                FormatArg::Json => json_text(&json!({
                    "subset": set,
                    "log_base": base,
                    "H": h,
                    "I": i,
                    "V": v,
                    "H_from_I": h_from_i,
                })),
                FormatArg::Csv => {
                    let v = v.map_or(String::new(), format_decimal);
                    Ok(format!(
                        "subset,H,I,V\n\"{set}\",{},{},{v}\n",
                        format_decimal(h),
                        format_decimal(i)
                    ))
                }
                f => Err(unsupported(f, "entropy")),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let output = cli.global.output.clone();
    let result = run(cli).and_then(|text| match &output {
        Some(path) => std::fs::write(path, text).map_err(Error::from),
        None => io::stdout().lock().write_all(text.as_bytes()).map_err(Error::from),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_internal() { 2 } else { 1 })
        }
    }
}
