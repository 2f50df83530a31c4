//! `asymlim`: asymptotic limits of contractions from the command line.
//!
//! Exit codes: 0 success; 1 malformed input; 2 no convergence (`compute`);
//! 3 a construction bound failed (`construct`); 4 failed checks (`verify`);
//! 5 inadmissible spectrum and 6 undecidable spectrum (`admissible`).

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use asymlim::admissibility::{check_admissible, AdmissibilityError, Multiplicity, SpectrumSpec};
use asymlim::asymptotics::{asymptotic_limit_dense, classify, AsymptoticsError, ConvergenceReport, DEFAULT_MAX_DOUBLINGS};
use asymlim::constructions::{
    hybrid_construction, lemma_block_construction, lemma_diagonal_construction, BlockSpec, ConstructionError,
    Eigenvalues, OrbitConstruction,
};
use asymlim::linalg::ComplexMatrix;
use asymlim::operators::{parse_matrix_json, read_matrix_file, write_matrix_json, DenseContraction, DEFAULT_DENSE_CAP};
use asymlim::verify::{examples_suite, props_suite, render_table};

use output::{csv_table, sibling, Outputs};

const EXIT_MALFORMED: u8 = 1;
const EXIT_NO_CONVERGENCE: u8 = 2;
const EXIT_BOUND_FAILED: u8 = 3;
const EXIT_CHECKS_FAILED: u8 = 4;
const EXIT_INADMISSIBLE: u8 = 5;
const EXIT_UNDECIDABLE: u8 = 6;

/// Trials per property in `verify --suite props`.
const PROPS_TRIALS: usize = 50;
/// Grid extent for `verify --suite examples`.
const EXAMPLES_EXTENT: i64 = 50;

#[derive(Parser)]
#[command(name = "asymlim", version, about = "Asymptotic limits A_T = lim T*^n T^n of contractions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Asymptotic limit of a dense contraction given as a matrix file.
    Compute {
        #[arg(long)]
        input: PathBuf,
        /// Where to write the limit matrix.
        #[arg(long)]
        out: PathBuf,
        /// Where to write the convergence report (JSON); stdout if omitted.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-10, value_parser = positive)]
        tol: f64,
        /// Squarings of T*T before giving up (exit 2).
        #[arg(long, default_value_t = DEFAULT_MAX_DOUBLINGS)]
        max_doublings: usize,
    },
    /// Build a contraction with a prescribed limit and tabulate errors
    /// against the theoretical bound.
    ///
    /// The exact limit is written next to --out as NAME.limit.json.
    Construct {
        #[arg(long, value_enum)]
        method: Method,
        /// Block spec ({"blocks": [matrix, ...]}) or spectrum JSON.
        #[arg(long)]
        spec: PathBuf,
        /// Truncation N: grid indices with l + m <= N (diagonal, hybrid).
        #[arg(long, default_value_t = 20)]
        truncate: i64,
        #[arg(long)]
        out: PathBuf,
        /// CSV table with columns n,error,bound.
        #[arg(long)]
        table: PathBuf,
    },
    /// Run a built-in check suite and print a pass/fail table.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the C_ij class of a dense contraction.
    Classify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-10, value_parser = positive)]
        tol: f64,
    },
    /// Decide whether a spectrum can be an asymptotic limit.
    ///
    /// Spectrum JSON: {"atoms": [{"value": x, "mult": n | "inf"}],
    /// "tails": [{"expr": "j/(j+1)", "start": 1, "increasing": true}]}.
    /// Formulas use the variable j; ^ is right-associative.
    Admissible {
        #[arg(long)]
        spec: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Block,
    Diagonal,
    Hybrid,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Examples,
    Props,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

/// A failed command: exit code plus diagnostic.
struct Failure(u8, String);

impl Failure {
    fn malformed(msg: impl std::fmt::Display) -> Self {
        Failure(EXIT_MALFORMED, msg.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compute { input, out, table, tol, max_doublings } => {
            compute(&input, &out, table.as_deref(), tol, max_doublings)
        }
        Command::Construct { method, spec, truncate, out, table } => construct(method, &spec, truncate, &out, &table),
        Command::Verify { suite, seed } => verify(suite, seed),
        Command::Classify { input, tol } => classify_cmd(&input, tol),
        Command::Admissible { spec } => admissible(&spec),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn load_contraction(path: &Path) -> Result<DenseContraction<f64>, Failure> {
    let m: ComplexMatrix<f64> = read_matrix_file(path).map_err(Failure::malformed)?;
    DenseContraction::new(m).map_err(Failure::malformed)
}

fn commit(outputs: Outputs) -> Result<(), Failure> {
    outputs.commit().map_err(|e| Failure::malformed(format!("cannot write output: {e}")))
}

fn compute(input: &Path, out: &Path, table: Option<&Path>, tol: f64, max_doublings: usize) -> Result<(), Failure> {
    let t = load_contraction(input)?;
    let emit_report = |report: &ConvergenceReport, outputs: &mut Outputs| match table {
        Some(path) => outputs.add(path, report.to_json()),
        None => print!("{}", report.to_json()),
    };
    match asymptotic_limit_dense(&t, tol, max_doublings) {
        Ok(d) => {
            let mut outputs = Outputs::default();
            outputs.add(out, write_matrix_json(&d.limit));
            emit_report(&d.report, &mut outputs);
            commit(outputs)
        }
        Err(AsymptoticsError::NoConvergence(report)) => {
            let mut outputs = Outputs::default();
            emit_report(&report, &mut outputs);
            commit(outputs)?;
            Err(Failure(EXIT_NO_CONVERGENCE, format!("no convergence within {max_doublings} doublings")))
        }
        Err(e) => Err(Failure::malformed(e)),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockFile {
    blocks: Vec<serde_json::Value>,
}

fn read_block_spec(path: &Path) -> Result<BlockSpec<f64>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::malformed(format!("{}: {e}", path.display())))?;
    let doc: BlockFile = serde_json::from_str(&text).map_err(|e| Failure::malformed(format!("malformed block spec: {e}")))?;
    let blocks = doc
        .blocks
        .iter()
        .enumerate()
        .map(|(j, v)| parse_matrix_json(&v.to_string()).map_err(|e| Failure::malformed(format!("block {j}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BlockSpec::new(blocks))
}

fn construction_failure(e: ConstructionError) -> Failure {
    Failure::malformed(e)
}

/// Eigenvalues for the grid constructions: the single tail's formula
/// (re-indexed to start at 1), or the atoms expanded into a sorted list.
fn eigenvalues_from(spec: &SpectrumSpec, allow_atoms_as_list: bool) -> Result<Eigenvalues, Failure> {
    match spec.tails.as_slice() {
        [tail] => {
            let shift = tail.start - 1;
            let expr = if shift == 0 {
                tail.expr.clone()
            } else {
                let var = asymlim::expr::ExprAst::Var;
                let offset = asymlim::expr::ExprAst::Literal(shift as f64);
                tail.expr.substitute(&asymlim::expr::ExprAst::binary(asymlim::expr::BinOp::Add, var, offset))
            };
            Ok(Eigenvalues::Formula(expr))
        }
        [] if allow_atoms_as_list => Ok(Eigenvalues::List(expand_atoms(spec)?)),
        _ => Err(Failure::malformed("spectrum must contain exactly one tail")),
    }
}

fn expand_atoms(spec: &SpectrumSpec) -> Result<Vec<f64>, Failure> {
    let mut values = Vec::new();
    for a in &spec.atoms {
        match a.mult {
            Multiplicity::Finite(n) if n <= DEFAULT_DENSE_CAP as u64 => values.extend(std::iter::repeat_n(a.value, n as usize)),
            _ => return Err(Failure::malformed(format!("atom {} needs a finite multiplicity", a.value))),
        }
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn construct(method: Method, spec_path: &Path, n_total: i64, out: &Path, table_path: &Path) -> Result<(), Failure> {
    let (t, limit, report) = match method {
        Method::Block => {
            let c = lemma_block_construction(&read_block_spec(spec_path)?).map_err(construction_failure)?;
            let report = c.table(c.block_count() - 1).map_err(construction_failure)?;
            (c.t.matrix().clone(), c.exact_limit.clone(), report)
        }
        Method::Diagonal | Method::Hybrid => {
            if n_total < 3 {
                return Err(Failure::malformed("--truncate must be at least 3"));
            }
            let spec = SpectrumSpec::read(spec_path).map_err(Failure::malformed)?;
            let c: OrbitConstruction<f64> = if let Method::Diagonal = method {
                lemma_diagonal_construction(eigenvalues_from(&spec, true)?).map_err(construction_failure)?
            } else {
                let lambda = eigenvalues_from(&spec, false)?;
                let b = lambda.value(1).map_err(construction_failure)?;
                hybrid_construction(&expand_atoms(&spec)?, b, lambda).map_err(construction_failure)?
            };
            let ws = c.truncate(n_total).map_err(construction_failure)?;
            let report = c.table(n_total, (n_total - 2) as usize).map_err(construction_failure)?;
            let diag: Vec<f64> = ws.indices.iter().map(|idx| c.exact_limit(*idx)).collect();
            (ws.to_matrix(), ComplexMatrix::from_real_diagonal(&diag), report)
        }
    };
    if !report.respects_bounds(1e-10) {
        eprint!("{}", csv_table(&report));
        return Err(Failure(EXIT_BOUND_FAILED, "measured error exceeds the theoretical bound".into()));
    }
    let mut outputs = Outputs::default();
    outputs.add(out, write_matrix_json(&t));
    outputs.add(sibling(out, "limit"), write_matrix_json(&limit));
    outputs.add(table_path, csv_table(&report));
    commit(outputs)
}

fn verify(suite: Suite, seed: u64) -> Result<(), Failure> {
    let checks = match suite {
        Suite::Examples => examples_suite(EXAMPLES_EXTENT),
        Suite::Props => props_suite(seed, PROPS_TRIALS),
    };
    print!("{}", render_table(&checks));
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure(EXIT_CHECKS_FAILED, format!("failed checks: {}", failed.join("; "))))
    }
}

fn classify_cmd(input: &Path, tol: f64) -> Result<(), Failure> {
    let t = load_contraction(input)?;
    let c = classify(&t, tol).map_err(Failure::malformed)?;
    println!("class: {}", c.label());
    println!("forward: {:?}", c.forward);
    println!("backward: {:?}", c.backward);
    println!("dim H0: {}", c.stable_dim);
    println!("dim H1: {}", c.isometric_dim);
    Ok(())
}

fn admissible(spec_path: &Path) -> Result<(), Failure> {
    let spec = SpectrumSpec::read(spec_path).map_err(Failure::malformed)?;
    match check_admissible(&spec) {
        Ok(v) => {
            println!("case: {}", v.case);
            println!("admissible: {}", v.admissible);
            println!("witness: {}", v.witness);
            if v.admissible {
                Ok(())
            } else {
                Err(Failure(EXIT_INADMISSIBLE, format!("inadmissible spectrum ({})", v.witness)))
            }
        }
        Err(e @ AdmissibilityError::Undecidable { .. }) => Err(Failure(EXIT_UNDECIDABLE, e.to_string())),
        Err(e) => Err(Failure::malformed(e)),
    }
}
