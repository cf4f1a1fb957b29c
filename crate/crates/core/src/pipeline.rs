//! End-to-end experiments: fit the generator models, offset them, reconstruct
//! them, and collect errors per `(τ, side, model)` cell.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::basis::{KnotVector, SplineModel};
use crate::bi_offset::{fit_bi_offset_refined, fit_bi_offset_unrefined, mse, BiOffsetResult};
use crate::curve::{uniform_points, Curve};
use crate::datasets::{generate_test_dataset, load_samples, NoiseModel, TestFunction};
use crate::error::{Error, Result};
use crate::geometry::{detect_cusps, theoretical_offset, CuspReport, Side};
use crate::interpolation::{natural_cubic_interpolant, NaturalCubic};
use crate::op_spline::{default_p, default_q, fit_op_spline, OffsetSpec, DEFAULT_MARGIN};
use crate::refinement::{orientation_report, refine_tangents, RefinementResult};
use crate::tp_spline::{
    default_basis_size, derivative_data, fit_p_spline, fit_tp_spline_with, select_p_spline_lambda,
    select_parameters, Dataset, GcvSearch, RegularizationParams,
};

/// Samples per curve in exports and in model-relative errors.
pub const CURVE_SAMPLES: usize = 512;
/// Grid size for cusp scans.
pub const CUSP_GRID: usize = 512;

/// A count that is either fixed or chosen from the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Count {
    #[default]
    Auto,
    Fixed(usize),
}

impl Count {
    pub fn resolve(self, auto: usize) -> usize {
        match self {
            Count::Auto => auto,
            Count::Fixed(v) => v,
        }
    }
}

impl FromStr for Count {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("auto") {
            return Ok(Count::Auto);
        }
        s.trim()
            .parse()
            .map(Count::Fixed)
            .map_err(|_| Error::Parse(format!("expected a count or `auto`, got `{s}`")))
    }
}

impl Serialize for Count {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Count::Auto => s.serialize_str("auto"),
            Count::Fixed(v) => s.serialize_u64(*v as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Count {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Count::Fixed(v as usize)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Penalized fit with slope data.
    Tp,
    /// Penalized fit without slope data.
    Pspline,
    /// Natural cubic interpolant.
    Spline,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Tp, ModelKind::Pspline, ModelKind::Spline];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Tp => "tp",
            ModelKind::Pspline => "pspline",
            ModelKind::Spline => "spline",
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown model `{s}`")))
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Experiment configuration. Every key is optional in the TOML form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Builtin test function (`p1`, `p2`, `line`) or path to an `x,y` CSV file.
    pub input: String,
    /// Sample count for builtins.
    pub samples: Count,
    /// Basis dimension.
    pub n: Count,
    pub taus: Vec<f64>,
    pub sides: Vec<Side>,
    pub models: Vec<ModelKind>,
    pub noise_sigma: f64,
    pub relative_noise: bool,
    /// Independent noise on the slope data fed to the penalized fit.
    pub deriv_noise_sigma: f64,
    pub seed: u64,
    pub q: Count,
    pub p: Count,
    /// Boundary margin of the constraint range, in knot spacings.
    pub margin: f64,
    pub gcv_grid_size: usize,
    pub gcv_lower: f64,
    pub gcv_upper: f64,
    pub gcv_max_evals: usize,
    pub gcv_tol: f64,
    pub output_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let gcv = GcvSearch::default();
        Self {
            input: "p1".into(),
            samples: Count::Auto,
            n: Count::Fixed(14),
            taus: vec![0.1, 0.3, 0.5, 0.7],
            sides: Side::BOTH.to_vec(),
            models: ModelKind::ALL.to_vec(),
            noise_sigma: 0.0,
            relative_noise: false,
            deriv_noise_sigma: 0.0,
            seed: 0,
            q: Count::Auto,
            p: Count::Auto,
            margin: DEFAULT_MARGIN,
            gcv_grid_size: gcv.grid_size,
            gcv_lower: gcv.lower,
            gcv_upper: gcv.upper,
            gcv_max_evals: gcv.max_evals,
            gcv_tol: gcv.simplex_tol,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.taus.is_empty() || self.taus.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(Error::InvalidInput(format!("taus must be nonempty and positive: {:?}", self.taus)));
        }
        if self.sides.is_empty() {
            return Err(Error::InvalidInput("sides must be nonempty".into()));
        }
        if self.models.is_empty() {
            return Err(Error::InvalidInput("models must be nonempty".into()));
        }
        for (name, v) in [("noise_sigma", self.noise_sigma), ("deriv_noise_sigma", self.deriv_noise_sigma)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(0.0..0.5).contains(&self.margin) {
            return Err(Error::InvalidInput(format!("margin {} outside [0, 0.5)", self.margin)));
        }
        Ok(())
    }

    pub fn gcv(&self) -> GcvSearch {
        GcvSearch {
            grid_size: self.gcv_grid_size,
            lower: self.gcv_lower,
            upper: self.gcv_upper,
            max_evals: self.gcv_max_evals,
            simplex_tol: self.gcv_tol,
        }
    }

    pub fn builtin(&self) -> Option<TestFunction> {
        self.input.parse().ok()
    }

    fn noise(&self) -> NoiseModel {
        NoiseModel {
            sigma: self.noise_sigma,
            relative: self.relative_noise,
        }
    }
}

/// A fitted generator: either a spline on the experiment's knot vector or
/// the interpolant baseline.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Spline(SplineModel),
    Interpolant(NaturalCubic),
}

impl Curve for Generator {
    fn domain(&self) -> (f64, f64) {
        match self {
            Generator::Spline(s) => s.domain(),
            Generator::Interpolant(s) => s.domain(),
        }
    }

    fn eval(&self, x: f64, deriv: usize) -> Result<f64> {
        match self {
            Generator::Spline(s) => s.eval(x, deriv),
            Generator::Interpolant(s) => s.eval(x, deriv),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub kind: ModelKind,
    pub generator: Generator,
    /// Regularization weights and GCV score for the penalized models.
    pub selection: Option<(RegularizationParams, f64)>,
}

/// Data and fitted generators shared by all cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub dataset: Dataset,
    pub truth: Option<TestFunction>,
    pub knots: KnotVector,
    pub models: Vec<FittedModel>,
}

impl Prepared {
    pub fn model(&self, kind: ModelKind) -> Option<&FittedModel> {
        self.models.iter().find(|m| m.kind == kind)
    }

    /// `CURVE_SAMPLES` uniform abscissae over the data domain.
    pub fn reference_xs(&self) -> Vec<f64> {
        let (a, b) = self.dataset.domain();
        uniform_points(a, b, CURVE_SAMPLES)
    }
}

pub fn load_dataset(cfg: &PipelineConfig) -> Result<(Dataset, Option<TestFunction>)> {
    match cfg.builtin() {
        Some(f) => {
            let m = cfg.samples.resolve(f.default_samples());
            Ok((generate_test_dataset(f, m, cfg.noise(), cfg.seed)?, Some(f)))
        }
        None => {
            let path = Path::new(&cfg.input);
            if !path.exists() {
                return Err(Error::UnknownTestFunction(cfg.input.clone()));
            }
            let mut d = load_samples(path)?;
            if cfg.noise_sigma > 0.0 {
                let mut ys = d.ys().to_vec();
                cfg.noise().apply(&mut ys, cfg.seed)?;
                d = Dataset::new(d.xs().to_vec(), ys)?;
            }
            Ok((d, None))
        }
    }
}

/// Fits every configured generator model.
pub fn prepare(cfg: &PipelineConfig) -> Result<Prepared> {
    cfg.validate()?;
    let (dataset, truth) = load_dataset(cfg)?;
    let (a, b) = dataset.domain();
    let n = cfg.n.resolve(default_basis_size(dataset.len()));
    let knots = KnotVector::uniform(a, b, n)?;
    let gcv = cfg.gcv();
    let mut models = Vec::new();
    for &kind in &cfg.models {
        let fitted = match kind {
            ModelKind::Tp => {
                let sel = select_parameters(&dataset, &knots, &gcv)?;
                let mut deriv = derivative_data(&dataset);
                if cfg.deriv_noise_sigma > 0.0 {
                    let noise = NoiseModel {
                        sigma: cfg.deriv_noise_sigma,
                        relative: cfg.relative_noise,
                    };
                    let seed = cfg.seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
                    noise.apply(&mut deriv.node_slopes, seed)?;
                    noise.apply(&mut deriv.mid_slopes, seed.wrapping_add(1))?;
                }
                let g = fit_tp_spline_with(&dataset, &deriv, &knots, sel.params)?;
                FittedModel {
                    kind,
                    generator: Generator::Spline(g),
                    selection: Some((sel.params, sel.score)),
                }
            }
            ModelKind::Pspline => {
                let sel = select_p_spline_lambda(&dataset, &knots, &gcv)?;
                let g = fit_p_spline(&dataset, &knots, sel.params.lambda)?;
                FittedModel {
                    kind,
                    generator: Generator::Spline(g),
                    selection: Some((sel.params, sel.score)),
                }
            }
            ModelKind::Spline => FittedModel {
                kind,
                generator: Generator::Interpolant(natural_cubic_interpolant(&dataset)),
                selection: None,
            },
        };
        models.push(fitted);
    }
    Ok(Prepared {
        dataset,
        truth,
        knots,
        models,
    })
}

/// Errors of one reconstruction against the three references.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionError {
    /// Against the generator model on `CURVE_SAMPLES` points.
    pub mse_model: f64,
    /// Against the dataset ordinates.
    pub mse_data: f64,
    /// Against the noise-free builtin on `CURVE_SAMPLES` points.
    pub mse_truth: Option<f64>,
    pub rms_fit: f64,
    pub dropped: usize,
}

/// Offset, refinement and reconstruction results for one model in one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMetrics {
    /// Cusps of the theoretical offset of the generator.
    pub cusps: Vec<CuspReport>,
    pub offset: SplineModel,
    /// Cusps of the back-offset of the offset spline.
    pub offset_cusps: usize,
    pub refinement: RefinementResult,
    pub orientation_inversions: usize,
    pub refined: BiOffsetResult,
    pub unrefined: BiOffsetResult,
    pub refined_error: ReconstructionError,
    pub unrefined_error: ReconstructionError,
}

impl CellMetrics {
    /// No cusp on the back-offset of the offset spline.
    pub fn offset_regular(&self) -> bool {
        self.offset_cusps == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelCell {
    pub model: ModelKind,
    pub outcome: std::result::Result<CellMetrics, Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentCell {
    pub tau: f64,
    pub side: Side,
    pub models: Vec<ModelCell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub prepared: Prepared,
    pub cells: Vec<ExperimentCell>,
}

impl ExperimentReport {
    pub fn params(&self) -> Option<RegularizationParams> {
        self.prepared
            .model(ModelKind::Tp)
            .and_then(|m| m.selection.map(|s| s.0))
    }

    pub fn cell(&self, tau: f64, side: Side, model: ModelKind) -> Option<&ModelCell> {
        self.cells
            .iter()
            .find(|c| c.tau == tau && c.side == side)?
            .models
            .iter()
            .find(|m| m.model == model)
    }

    pub fn failures(&self) -> Vec<(f64, Side, ModelKind, &Error)> {
        self.cells
            .iter()
            .flat_map(|c| {
                c.models.iter().filter_map(move |m| match &m.outcome {
                    Err(e) => Some((c.tau, c.side, m.model, e)),
                    Ok(_) => None,
                })
            })
            .collect()
    }
}

/// The offset specification used for every cell of `cfg`.
pub fn offset_spec(cfg: &PipelineConfig, knots: &KnotVector, tau: f64, side: Side) -> Result<OffsetSpec> {
    let n = knots.dim();
    OffsetSpec::new(tau, side, cfg.q.resolve(default_q(n)), cfg.p.resolve(default_p(n)))?
        .with_margin(cfg.margin)
}

/// Offset, refinement and bi-offset reconstruction for one generator.
pub fn run_cell(prepared: &Prepared, model: &FittedModel, spec: &OffsetSpec) -> Result<CellMetrics> {
    let g = &model.generator;
    let kv = &prepared.knots;
    let cusps = detect_cusps(g, spec.signed_tau(), CUSP_GRID)?;
    let f = fit_op_spline(g, spec, kv)?;
    let offset_cusps = detect_cusps(&f, -spec.signed_tau(), CUSP_GRID)?.len();
    let refinement = refine_tangents(&f, g, spec)?;
    let orientation_inversions = orientation_report(&refinement).len();
    let refined = fit_bi_offset_refined(g, &refinement, spec, kv)?;
    let unrefined = fit_bi_offset_unrefined(g, &refinement, spec, kv)?;
    let refined_error = reconstruction_error(prepared, g, &refined)?;
    let unrefined_error = reconstruction_error(prepared, g, &unrefined)?;
    Ok(CellMetrics {
        cusps,
        offset: f,
        offset_cusps,
        refinement,
        orientation_inversions,
        refined,
        unrefined,
        refined_error,
        unrefined_error,
    })
}

fn reconstruction_error(prepared: &Prepared, g: &Generator, h: &BiOffsetResult) -> Result<ReconstructionError> {
    let xs = prepared.reference_xs();
    let model_ys: Vec<f64> = xs.iter().map(|&x| g.value(x)).collect::<Result<_>>()?;
    let mse_truth = match prepared.truth {
        Some(f) => {
            let ys: Vec<f64> = xs.iter().map(|&x| f.eval(x)).collect();
            Some(mse(&h.model, &xs, &ys)?)
        }
        None => None,
    };
    Ok(ReconstructionError {
        mse_model: mse(&h.model, &xs, &model_ys)?,
        mse_data: mse(&h.model, prepared.dataset.xs(), prepared.dataset.ys())?,
        mse_truth,
        rms_fit: h.rms_fit,
        dropped: h.dropped.len(),
    })
}

/// Runs every `(τ, side)` cell for every model. Stage failures are recorded
/// in the cell; only generator fitting failures abort the run.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<ExperimentReport> {
    let prepared = prepare(cfg)?;
    let mut cells = Vec::new();
    for &tau in &cfg.taus {
        for &side in &cfg.sides {
            let spec = offset_spec(cfg, &prepared.knots, tau, side);
            let models = prepared
                .models
                .iter()
                .map(|m| ModelCell {
                    model: m.kind,
                    outcome: spec.clone().and_then(|s| run_cell(&prepared, m, &s)),
                })
                .collect();
            cells.push(ExperimentCell { tau, side, models });
        }
    }
    Ok(ExperimentReport { prepared, cells })
}

/// A named polyline.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn sample<C: Curve + ?Sized>(name: impl Into<String>, c: &C) -> Result<Self> {
        Ok(Self {
            name: name.into(),
            points: c.sample(CURVE_SAMPLES)?,
        })
    }

    /// The theoretical offset `(x, g(x)) + τN(x)` at `CURVE_SAMPLES` generator abscissae.
    pub fn theoretical_offset<C: Curve + ?Sized>(name: impl Into<String>, g: &C, signed_tau: f64) -> Result<Self> {
        let (a, b) = g.domain();
        let points = uniform_points(a, b, CURVE_SAMPLES)
            .into_iter()
            .map(|x| theoretical_offset(g, x, signed_tau).map(|p| (p.x, p.y)))
            .collect::<Result<_>>()?;
        Ok(Self {
            name: name.into(),
            points,
        })
    }
}

pub fn cell_label(model: ModelKind, kind: &str, side: Side, tau: f64) -> String {
    format!("{model}_{kind}_{side}_tau{tau}")
}

/// Generators, offset splines, bi-offsets and theoretical offsets of every
/// successful cell, in report order.
pub fn report_curves(report: &ExperimentReport) -> Result<Vec<Series>> {
    let mut out = Vec::new();
    for m in &report.prepared.models {
        out.push(Series::sample(m.kind.name(), &m.generator)?);
    }
    for cell in &report.cells {
        for mc in &cell.models {
            let Ok(metrics) = &mc.outcome else { continue };
            let g = &report.prepared.model(mc.model).expect("model present").generator;
            out.push(Series::theoretical_offset(
                cell_label(mc.model, "theoretical", cell.side, cell.tau),
                g,
                cell.side.signed(cell.tau),
            )?);
            out.push(Series::sample(cell_label(mc.model, "offset", cell.side, cell.tau), &metrics.offset)?);
            out.push(Series::sample(
                cell_label(mc.model, "bioffset", cell.side, cell.tau),
                &metrics.refined.model,
            )?);
            out.push(Series::sample(
                cell_label(mc.model, "bioffset_unrefined", cell.side, cell.tau),
                &metrics.unrefined.model,
            )?);
        }
    }
    Ok(out)
}
