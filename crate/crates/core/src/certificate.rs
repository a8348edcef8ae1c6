//! Outcome records emitted by the library and the CLI.

use serde::Serialize;

use crate::boundary::{classify, push_to_boundary, PushTrace, DEFAULT_CIRCLE_SAMPLES};
use crate::dilation::{brehmer_defect, doubly_commuting_obstruction, BrehmerReport, ObstructionReport};
use crate::error::Result;
use crate::normalize::phase_normalize;
use crate::parrott::parrott_polynomial;
use crate::poly::MatrixPolynomial;
use crate::shift::TruncatedShift;
use crate::vncheck::{vn_check, SupOptions, Verdict, VnReport};
use crate::weights::{ValidationReport, WeightFamily, DEFAULT_COMMUTATION_TOL, MODULUS_TOL};

pub const TOOL: &str = "shiftlab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Tolerances and grid settings a certificate was produced with.
#[derive(Clone, Debug, Serialize)]
pub struct Settings {
    pub commutation_tol: f64,
    pub modulus_tol: f64,
    pub grid_per_axis: usize,
    pub refine: bool,
    pub circle_samples: usize,
    pub seed: u64,
}

/// A pipeline stage that did not run, with the reason.
#[derive(Clone, Debug, Serialize)]
pub struct Skipped {
    pub skipped: bool,
    pub reason: String,
}

impl Skipped {
    pub fn because(reason: impl Into<String>) -> Self {
        Skipped {
            skipped: true,
            reason: reason.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum Stage<T> {
    Ran(T),
    Skipped(Skipped),
}

impl<T> Stage<T> {
    pub fn ran(&self) -> Option<&T> {
        match self {
            Stage::Ran(t) => Some(t),
            Stage::Skipped(_) => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalizeSummary {
    pub path_residual: f64,
    pub conjugation_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassifySummary {
    pub good: usize,
    pub bad: usize,
    pub scalable: usize,
    pub radius: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VnBattery {
    pub polynomials: usize,
    pub max_ratio: f64,
    pub holds: usize,
    pub inconclusive: usize,
    pub violated: usize,
    pub reports: Vec<VnReport>,
}

/// Composite certificate: one sub-record per stage.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub tool: &'static str,
    pub version: &'static str,
    pub settings: Settings,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub contractive: bool,
    pub injective: bool,
    pub validation: ValidationReport,
    pub commutator_norm: f64,
    pub normalize: Stage<NormalizeSummary>,
    pub classify: Stage<ClassifySummary>,
    pub push: Stage<PushTrace>,
    pub vn: VnBattery,
    pub brehmer: Vec<BrehmerReport>,
    pub obstructions: Vec<ObstructionReport>,
}

/// Options for [`run_pipeline`].
#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub settings: Settings,
    pub push: bool,
    /// Random scalar and 2×2 polynomials per kind in the VN battery.
    pub random_polys: usize,
    pub max_degree: usize,
    /// Extra polynomials to test in addition to the built-in probes.
    pub extra: Vec<MatrixPolynomial>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            settings: Settings {
                commutation_tol: DEFAULT_COMMUTATION_TOL,
                modulus_tol: MODULUS_TOL,
                grid_per_axis: crate::vncheck::DEFAULT_GRID,
                refine: true,
                circle_samples: DEFAULT_CIRCLE_SAMPLES,
                seed: 0,
            },
            push: true,
            random_polys: 4,
            max_degree: 3,
            extra: Vec::new(),
        }
    }
}

impl Certificate {
    pub fn vn_violated(&self) -> bool {
        self.vn.violated > 0
    }
}

/// Probe polynomials: the coordinates `z_j`, the three-variable Parrott
/// polynomial when `d = 3`, then seeded random scalar and 2×2 polynomials.
pub fn probe_polynomials(d: usize, random: usize, degree: usize, seed: u64) -> Result<Vec<MatrixPolynomial>> {
    let mut out = Vec::new();
    for j in 0..d {
        out.push(MatrixPolynomial::coordinate(d, j)?);
    }
    if d == 3 {
        out.push(parrott_polynomial());
    }
    for k in 0..random as u64 {
        out.push(MatrixPolynomial::random(d, 1, degree, seed.wrapping_mul(1_000_003).wrapping_add(2 * k))?);
        out.push(MatrixPolynomial::random(d, 2, degree, seed.wrapping_mul(1_000_003).wrapping_add(2 * k + 1))?);
    }
    Ok(out)
}

/// validate → normalize → classify → push → VN battery → Brehmer spectra.
///
/// Only validation failure is an error; stages that do not apply to the
/// family are recorded as skipped.
pub fn run_pipeline(weights: &WeightFamily, opts: &PipelineOptions) -> Result<Certificate> {
    let s = &opts.settings;
    let validation = weights.validate_commuting(s.commutation_tol);
    let shift = TruncatedShift::build_with_tol(weights, s.commutation_tol)?;
    let injective = weights.is_injective();
    let contractive = weights.is_contractive();

    let normalize = if injective {
        let n = phase_normalize(weights)?;
        Stage::Ran(NormalizeSummary {
            path_residual: n.path_residual,
            conjugation_residual: n.conjugation_residual(&shift)?,
        })
    } else {
        Stage::Skipped(Skipped::because("zero weights: no unitary gauge to the modulus family"))
    };

    let (classify_stage, push) = if !injective {
        let why = "zero weights: boundary scaling never turns a zero weight nonzero";
        (Stage::Skipped(Skipped::because(why)), Stage::Skipped(Skipped::because(why)))
    } else if !contractive {
        let why = "family is not contractive";
        (Stage::Skipped(Skipped::because(why)), Stage::Skipped(Skipped::because(why)))
    } else {
        let state = classify(weights)?;
        let summary = ClassifySummary {
            good: state.good_indices().len(),
            bad: state.bad_indices().len(),
            scalable: state.scalable_pairs().len(),
            radius: state.radius(),
        };
        let push = if opts.push {
            Stage::Ran(push_to_boundary(weights, None, s.circle_samples)?)
        } else {
            Stage::Skipped(Skipped::because("push disabled"))
        };
        (Stage::Ran(summary), push)
    };

    let mut polys = probe_polynomials(weights.d(), opts.random_polys, opts.max_degree, s.seed)?;
    polys.extend(opts.extra.iter().cloned());
    let sup_opts = SupOptions {
        grid_per_axis: s.grid_per_axis,
        refine: s.refine,
        ..SupOptions::default()
    };
    let reports = if contractive {
        polys
            .iter()
            .filter(|p| !p.is_zero())
            .map(|p| vn_check(p, &shift, sup_opts))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let count = |v: Verdict| reports.iter().filter(|r| r.verdict == v).count();
    let vn = VnBattery {
        polynomials: reports.len(),
        max_ratio: reports.iter().map(|r| r.ratio).fold(0.0, f64::max),
        holds: count(Verdict::Holds),
        inconclusive: count(Verdict::Inconclusive),
        violated: count(Verdict::Violated),
        reports,
    };

    let d = weights.d();
    let mut brehmer = Vec::new();
    let mut obstructions = Vec::new();
    for j in 0..d {
        brehmer.push(brehmer_defect(&shift, &[j])?);
    }
    for j in 0..d {
        for k in (j + 1)..d {
            brehmer.push(brehmer_defect(&shift, &[j, k])?);
            obstructions.push(doubly_commuting_obstruction(&shift, j, k, s.commutation_tol)?);
        }
    }

    Ok(Certificate {
        tool: TOOL,
        version: VERSION,
        settings: s.clone(),
        d,
        n: weights.n(),
        contractive,
        injective,
        validation,
        commutator_norm: shift.commutator_norm(),
        normalize,
        classify: classify_stage,
        push,
        vn,
        brehmer,
        obstructions,
    })
}
