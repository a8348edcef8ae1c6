//! `shiftlab`: build truncated weighted shifts from JSON, check them, and
//! emit JSON certificates.
//!
//! Exit codes: 0 success, 1 mathematical failure, 2 input error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use shiftlab_core::boundary::{classify, push_to_boundary, DEFAULT_CIRCLE_SAMPLES};
use shiftlab_core::certificate::{run_pipeline, PipelineOptions, Settings, TOOL, VERSION};
use shiftlab_core::dilation::{brehmer_defect, build_cyclic_dilation, doubly_commuting_obstruction};
use shiftlab_core::formats::{BetaFile, WeightFile};
use shiftlab_core::multiindex::binomial;
use shiftlab_core::normalize::phase_normalize;
use shiftlab_core::parrott::{parrott_polynomial, refutation_report, ParrottConfig};
use shiftlab_core::poly::PolynomialFile;
use shiftlab_core::vncheck::{vn_check, SupOptions, Verdict, DEFAULT_GRID};
use shiftlab_core::weights::{DEFAULT_COMMUTATION_TOL, MODULUS_TOL};
use shiftlab_core::{MatrixPolynomial, ShiftError, TruncatedShift, WeightFamily};

/// Largest Hilbert-space dimension the CLI will build a dense shift on.
const MAX_DIM: usize = 50_000;

/// Residual above which a dilation certificate is reported as failed.
const DILATION_TOL: f64 = 1e-12;

#[derive(Parser, Debug)]
#[command(name = "shiftlab", version, about = "Truncated multivariable weighted shifts and von Neumann's inequality")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Commutation tolerance.
    #[arg(long, global = true, default_value_t = DEFAULT_COMMUTATION_TOL)]
    tol: f64,
    /// Torus grid points per axis for sup-norms.
    #[arg(long, global = true, default_value_t = DEFAULT_GRID)]
    grid: usize,
    /// Refine the grid maximum by local search (`--refine false` to disable).
    #[arg(long, global = true, default_value_t = true, action = clap::ArgAction::Set)]
    refine: bool,
    /// Seed for random polynomial batteries.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Compact single-line JSON (the default).
    #[arg(long, global = true, conflicts_with = "pretty")]
    json: bool,
    /// Indented JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Worker threads for grid searches.
    #[arg(long, global = true, env = "SHIFTLAB_THREADS")]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct WeightsInput {
    /// Weight family (`{"d","N","weights":[{"I","j","re","im"}]}`).
    weights: PathBuf,
    /// Read a β file (`{"d","N","beta":[{"I","value"}]}`) instead.
    #[arg(long)]
    beta: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the commutation relations of a weight family.
    Validate(WeightsInput),
    /// Build the shift matrices T_1..T_d.
    Build(WeightsInput),
    /// Phase-normalize an injective family to its moduli.
    Normalize(WeightsInput),
    /// Good/bad indices, scalable pairs and the scaling radius.
    Classify(WeightsInput),
    /// Push a contractive injective family to the unimodular boundary.
    Push {
        #[command(flatten)]
        input: WeightsInput,
        /// Points sampled on each scaling circle.
        #[arg(long, default_value_t = DEFAULT_CIRCLE_SAMPLES)]
        samples: usize,
        /// Write the final family as a weight file.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare ‖p(T)‖ with sup over the torus of ‖p‖.
    VnCheck {
        #[command(flatten)]
        input: WeightsInput,
        /// Polynomial (`{"d","n","terms":[{"K","coeff"}]}`).
        poly: PathBuf,
    },
    /// Certify the cyclic unitary dilation of T(1) up to a degree bound.
    DilateCheck {
        #[arg(long)]
        d: usize,
        #[arg(long = "N")]
        n: usize,
        /// Polynomial degree the compression identity is certified for.
        #[arg(long, default_value_t = 4)]
        degree: usize,
        /// Random polynomials in the test battery.
        #[arg(long, default_value_t = 50)]
        battery: usize,
    },
    /// Spectrum of the Brehmer defect for a subset of axes.
    Brehmer {
        #[command(flatten)]
        input: WeightsInput,
        /// 1-based axes, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        subset: Vec<usize>,
    },
    /// Reproduce the three-variable counterexample.
    Parrott {
        /// Also write the counterexample weight file.
        #[arg(long)]
        write_weights: Option<PathBuf>,
        /// Also write the 3×3 polynomial.
        #[arg(long)]
        write_poly: Option<PathBuf>,
    },
    /// Run every stage and emit one certificate.
    Pipeline {
        #[command(flatten)]
        input: WeightsInput,
        /// Skip the boundary push.
        #[arg(long)]
        no_push: bool,
        /// Random scalar and 2×2 polynomials in the VN battery (each).
        #[arg(long, default_value_t = 4)]
        polys: usize,
        /// Extra polynomial files for the VN battery.
        #[arg(long = "poly")]
        extra: Vec<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<ShiftError> for Failure {
    fn from(e: ShiftError) -> Self {
        let code = match e {
            ShiftError::Domain(_) | ShiftError::Contract(_) => 1,
            ShiftError::Argument(_) | ShiftError::MissingWeight { .. } | ShiftError::Parse(_) => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    settings: Settings,
    result: T,
}

struct Ctx {
    global: Global,
}

impl Ctx {
    fn settings(&self, circle_samples: usize) -> Settings {
        Settings {
            commutation_tol: self.global.tol,
            modulus_tol: MODULUS_TOL,
            grid_per_axis: self.global.grid,
            refine: self.global.refine,
            circle_samples,
            seed: self.global.seed,
        }
    }

    fn sup_options(&self) -> SupOptions {
        SupOptions {
            grid_per_axis: self.global.grid,
            refine: self.global.refine,
            ..SupOptions::default()
        }
    }

    fn emit<T: Serialize>(&self, command: &str, circle_samples: usize, result: T) -> CliResult<()> {
        let envelope = Envelope {
            tool: TOOL,
            version: VERSION,
            command,
            settings: self.settings(circle_samples),
            result,
        };
        let text = if self.global.pretty {
            serde_json::to_string_pretty(&envelope)
        } else {
            serde_json::to_string(&envelope)
        }
        .map_err(|e| Failure::input(format!("serializing output: {e}")))?;
        let mut out = std::io::stdout().lock();
        match writeln!(out, "{text}") {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::input(format!("stdout: {e}"))),
            _ => Ok(()),
        }
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::input(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn with_path(path: &Path) -> impl Fn(ShiftError) -> Failure + '_ {
    move |e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    }
}

fn check_dim(d: usize, n: usize) -> CliResult<()> {
    let dim = binomial(n + 1 + d, d);
    if d == 0 || dim > MAX_DIM {
        return Err(Failure::input(format!(
            "d={d}, N={n} gives dim H_(N+1) = {dim}; supported range is d ≥ 1 and dim ≤ {MAX_DIM}"
        )));
    }
    Ok(())
}

fn load_weights(input: &WeightsInput) -> CliResult<WeightFamily> {
    let path = &input.weights;
    let text = read(path)?;
    if input.beta {
        let file = BetaFile::parse(&text).map_err(with_path(path))?;
        check_dim(file.d, file.n)?;
        let beta = file.to_family().map_err(with_path(path))?;
        WeightFamily::from_beta(&beta).map_err(with_path(path))
    } else {
        let file = WeightFile::parse(&text).map_err(with_path(path))?;
        check_dim(file.d, file.n)?;
        file.to_family().map_err(with_path(path))
    }
}

fn load_poly(path: &Path) -> CliResult<MatrixPolynomial> {
    let file: PolynomialFile = serde_json::from_str(&read(path)?)
        .map_err(ShiftError::from)
        .map_err(with_path(path))?;
    MatrixPolynomial::from_json(&file).map_err(with_path(path))
}

fn build(ctx: &Ctx, w: &WeightFamily) -> CliResult<TruncatedShift> {
    Ok(TruncatedShift::build_with_tol(w, ctx.global.tol)?)
}

#[derive(Serialize)]
struct ValidateResult {
    d: usize,
    #[serde(rename = "N")]
    n: usize,
    passed: bool,
    contractive: bool,
    injective: bool,
    report: shiftlab_core::weights::ValidationReport,
}

#[derive(Serialize)]
struct NormalizeResult {
    gauge: shiftlab_core::normalize::GaugeJson,
    conjugation_residual: f64,
    modulus: WeightFile,
}

#[derive(Serialize)]
struct ClassifyResult {
    good: Vec<shiftlab_core::MultiIndex>,
    bad: Vec<shiftlab_core::MultiIndex>,
    scalable: Vec<shiftlab_core::boundary::PairJson>,
    radius: Option<f64>,
}

#[derive(Serialize)]
struct PushResult {
    trace: shiftlab_core::boundary::PushTrace,
    final_weights: WeightFile,
}

#[derive(Serialize)]
struct BrehmerResult {
    defect: shiftlab_core::dilation::BrehmerReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    obstruction: Option<shiftlab_core::dilation::ObstructionReport>,
}

fn run(ctx: &Ctx, command: Command) -> CliResult<()> {
    let samples = DEFAULT_CIRCLE_SAMPLES;
    match command {
        Command::Validate(input) => {
            let w = load_weights(&input)?;
            let report = w.validate_commuting(ctx.global.tol);
            let passed = report.passed();
            for v in &report.violations {
                eprintln!(
                    "violation: I={}, j={}, k={}, residual {:.3e} > tol {:.1e}",
                    v.index, v.j, v.k, v.residual, report.tol
                );
            }
            ctx.emit(
                "validate",
                samples,
                ValidateResult {
                    d: w.d(),
                    n: w.n(),
                    passed,
                    contractive: w.is_contractive(),
                    injective: w.is_injective(),
                    report,
                },
            )?;
            if !passed {
                return Err(Failure {
                    code: 1,
                    message: "commutation relations fail".into(),
                });
            }
            Ok(())
        }
        Command::Build(input) => {
            let t = build(ctx, &load_weights(&input)?)?;
            ctx.emit("build", samples, t.export())
        }
        Command::Normalize(input) => {
            let w = load_weights(&input)?;
            let t = build(ctx, &w)?;
            let n = phase_normalize(&w)?;
            ctx.emit(
                "normalize",
                samples,
                NormalizeResult {
                    gauge: n.gauge_json(),
                    conjugation_residual: n.conjugation_residual(&t)?,
                    modulus: WeightFile::from(&n.modulus),
                },
            )
        }
        Command::Classify(input) => {
            let w = load_weights(&input)?;
            build(ctx, &w)?;
            let state = classify(&w)?;
            ctx.emit(
                "classify",
                samples,
                ClassifyResult {
                    good: state.good_indices(),
                    bad: state.bad_indices(),
                    scalable: state
                        .scalable_pairs()
                        .into_iter()
                        .map(|(index, j)| shiftlab_core::boundary::PairJson { index, j: j + 1 })
                        .collect(),
                    radius: state.radius(),
                },
            )
        }
        Command::Push {
            input,
            samples,
            output,
        } => {
            let w = load_weights(&input)?;
            build(ctx, &w)?;
            let trace = push_to_boundary(&w, None, samples)?;
            let final_weights = WeightFile::from(trace.final_family());
            if let Some(path) = output {
                write_json(&path, &final_weights)?;
            }
            ctx.emit("push", samples, PushResult { trace, final_weights })
        }
        Command::VnCheck { input, poly } => {
            let w = load_weights(&input)?;
            let p = load_poly(&poly)?;
            let t = build(ctx, &w)?;
            let report = vn_check(&p, &t, ctx.sup_options())?;
            let violated = report.verdict == Verdict::Violated;
            eprintln!(
                "‖p(T)‖ = {:.12}, sup = {:.12} ± {:.3e}, ratio = {:.9}, {:?}",
                report.operator_norm, report.sup.value, report.sup.uncertainty, report.ratio, report.verdict
            );
            ctx.emit("vn-check", samples, report)?;
            if violated {
                return Err(Failure {
                    code: 1,
                    message: "von Neumann inequality violated".into(),
                });
            }
            Ok(())
        }
        Command::DilateCheck { d, n, degree, battery } => {
            let side = n + degree + 2;
            let size = (side as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
            if d == 0 || size > MAX_DIM as u128 {
                return Err(Failure::input(format!(
                    "grid ℤ_{side}^{d} has {size} points; supported range is d ≥ 1 and at most {MAX_DIM}"
                )));
            }
            let cert = build_cyclic_dilation(n, d, degree, battery, ctx.global.seed)?;
            let ok = cert.unitaries_verified && cert.residual <= DILATION_TOL;
            ctx.emit("dilate-check", samples, &cert)?;
            if !ok {
                return Err(Failure {
                    code: 1,
                    message: format!("dilation residual {:.3e} exceeds {DILATION_TOL:.0e}", cert.residual),
                });
            }
            Ok(())
        }
        Command::Brehmer { input, subset } => {
            let w = load_weights(&input)?;
            if let Some(&j) = subset.iter().find(|&&j| j == 0 || j > w.d()) {
                return Err(Failure::input(format!("axis {j} out of range 1..={}", w.d())));
            }
            let axes: Vec<usize> = subset.iter().map(|j| j - 1).collect();
            let t = build(ctx, &w)?;
            let defect = brehmer_defect(&t, &axes)?;
            let obstruction = match axes[..] {
                [j, k] if j != k => Some(doubly_commuting_obstruction(&t, j, k, ctx.global.tol)?),
                _ => None,
            };
            ctx.emit("brehmer", samples, BrehmerResult { defect, obstruction })
        }
        Command::Parrott {
            write_weights,
            write_poly,
        } => {
            if let Some(path) = write_weights {
                let w = ParrottConfig::counterexample().build_family()?;
                write_json(&path, &WeightFile::from(&w))?;
            }
            if let Some(path) = write_poly {
                write_json(&path, &parrott_polynomial().to_json())?;
            }
            let rep = refutation_report(ctx.global.grid, ctx.global.refine)?;
            eprintln!("‖p(A₁,A₂,A₃)‖ = {:.12} (6-dim compression)", rep.norm_compressed);
            eprintln!("‖p(T₁,T₂,T₃)‖ = {:.12} (full truncated shift)", rep.norm_full_shift);
            eprintln!(
                "witness rows {:?} × cols {:?}: norm {:.12}",
                rep.witness.rows, rep.witness.cols, rep.witness.norm
            );
            eprintln!(
                "sup over 𝕋³ = {:.9} ± {:.3e}; ratio {:.9}",
                rep.sup.value, rep.sup.uncertainty, rep.ratio
            );
            eprintln!("{}", rep.conclusion);
            ctx.emit("parrott", samples, rep)
        }
        Command::Pipeline {
            input,
            no_push,
            polys,
            extra,
        } => {
            let w = load_weights(&input)?;
            let extra = extra.iter().map(|p| load_poly(p)).collect::<CliResult<Vec<_>>>()?;
            let validation = w.validate_commuting(ctx.global.tol);
            if !validation.passed() {
                for v in &validation.violations {
                    eprintln!("violation: I={}, j={}, k={}, residual {:.3e}", v.index, v.j, v.k, v.residual);
                }
                return Err(Failure {
                    code: 1,
                    message: "commutation relations fail".into(),
                });
            }
            let opts = PipelineOptions {
                settings: ctx.settings(samples),
                push: !no_push,
                random_polys: polys,
                extra,
                ..PipelineOptions::default()
            };
            let cert = run_pipeline(&w, &opts)?;
            // Violations are only unexpected for injective contractive families.
            let unexpected = cert.injective && cert.contractive && cert.vn_violated();
            ctx.emit("pipeline", samples, &cert)?;
            if unexpected {
                return Err(Failure {
                    code: 1,
                    message: "von Neumann inequality violated by an injective contractive shift".into(),
                });
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let ctx = Ctx { global: cli.global };
    match run(&ctx, cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
