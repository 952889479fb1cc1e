use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Map, Value};

use super::{sidecar, EstimateArgs, InputArgs, MethodArg};
use crate::cells::{cell_dump, check_method, map_cells, moments_exact_2d, moments_mc_cell, MomentMethod, SpatialGrid};
use crate::error::{Error, Result};
use crate::estimators::{
    auto_radii, estimate_local, estimate_refined, estimate_tensors, reach_warning, reduced_radius_estimate,
    volume_tensor_hat, SteinerMatrix, TensorEstimate, Variant,
};
use crate::measures::{
    refined_measure, shell_measure, voronoi_tensor_measure, DirectionRegion, MeasureValue, RegionOfInterest,
    SpatialRegion,
};
use crate::shapes::io::{sample_from_json, sample_from_pbm, sample_to_json, sample_to_pbm, PbmHeader};
use crate::shapes::{digitize, ground_truth, hausdorff_to_sample, Lattice, PointSample, ReferenceShape, Window};
use crate::symtensor::{sup_norm, SymTensor};
use crate::SCHEMA_VERSION;

/// Where the points come from.
#[derive(Clone, Debug)]
pub enum InputSpec {
    /// Digitize `shape` at each spacing in `a`.
    Shape { shape: ReferenceShape, a: Vec<f64> },
    /// A fixed sample read from `path`.
    Sample { sample: PointSample, path: PathBuf },
}

impl InputSpec {
    pub fn from_args(args: &InputArgs) -> Result<Self> {
        if let Some(text) = &args.shape {
            let shape = read_shape(text)?;
            if args.a.is_empty() {
                return Err(Error::invalid("--shape needs at least one lattice spacing --a"));
            }
            if let Some(bad) = args.a.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
                return Err(Error::invalid(format!("lattice spacing must be positive, got {bad}")));
            }
            return Ok(InputSpec::Shape {
                shape,
                a: args.a.clone(),
            });
        }
        let path = args
            .sample
            .clone()
            .ok_or_else(|| Error::invalid("give --shape or --sample"))?;
        if !args.a.is_empty() {
            return Err(Error::invalid("--a only applies to --shape"));
        }
        Ok(InputSpec::Sample {
            sample: read_sample(&path)?,
            path,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            InputSpec::Shape { shape, .. } => shape.dim(),
            InputSpec::Sample { sample, .. } => sample.dim(),
        }
    }

    pub fn shape(&self) -> Option<&ReferenceShape> {
        match self {
            InputSpec::Shape { shape, .. } => Some(shape),
            InputSpec::Sample { .. } => None,
        }
    }

    /// One `(a, sample)` pair per run; `a` is `None` for an unstructured
    /// sample.
    fn samples(&self) -> Result<Vec<(Option<f64>, PointSample)>> {
        match self {
            InputSpec::Shape { shape, a } => a
                .iter()
                .map(|&a| Ok((Some(a), digitize_shape(shape, a, 2.0 * a)?)))
                .collect(),
            InputSpec::Sample { sample, .. } => {
                Ok(vec![(sample.lattice().map(|l| l.spacing), sample.clone())])
            }
        }
    }

    fn echo(&self) -> Value {
        match self {
            InputSpec::Shape { shape, a } => json!({ "shape": shape, "a": a }),
            InputSpec::Sample { sample, path } => json!({
                "sample": path.display().to_string(),
                "points": sample.len(),
                "d": sample.dim(),
            }),
        }
    }
}

/// Which measures feed which Steiner system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Standard,
    Refined,
    Shell,
    Reduced,
}

impl Mode {
    fn variant(self) -> Variant {
        match self {
            Mode::Standard | Mode::Refined => Variant::Standard,
            Mode::Shell => Variant::Shell,
            Mode::Reduced => Variant::Reduced,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum RadiiSpec {
    Explicit { values: Vec<f64> },
    Auto { cap: f64 },
}

/// Everything that determines an estimation report.
#[derive(Clone, Debug)]
pub struct EstimateConfig {
    pub input: InputSpec,
    pub r: u32,
    pub s: u32,
    radii: RadiiSpec,
    /// Declared reach: `--reach`, else the shape's reach when finite.
    pub reach: Option<f64>,
    pub region: RegionOfInterest,
    pub method: MomentMethod,
    pub mode: Mode,
    pub least_squares: bool,
}

impl EstimateConfig {
    pub fn from_args(args: &EstimateArgs) -> Result<Self> {
        let input = InputSpec::from_args(&args.input)?;
        let d = input.dim();
        let mode = if args.refined {
            Mode::Refined
        } else if args.shell {
            Mode::Shell
        } else if args.reduced {
            Mode::Reduced
        } else {
            Mode::Standard
        };
        let region = match &args.region {
            Some(text) => read_region(text)?,
            None => RegionOfInterest::all(),
        };
        region.validate(d)?;
        if region.direction != DirectionRegion::Full && mode != Mode::Shell {
            return Err(Error::Unsupported("direction caps need --shell".into()));
        }
        if mode == Mode::Reduced && region.spatial != SpatialRegion::All {
            return Err(Error::precondition("--reduced needs the whole space as region"));
        }
        let method = match args.method {
            MethodArg::Exact => MomentMethod::Exact {
                max_degree: args.max_degree,
            },
            MethodArg::Mc => MomentMethod::Mc {
                samples: args.mc_n,
                seed: args.seed,
            },
        };
        check_method(d, args.s, method)?;
        let radii = if args.auto_radii || args.radii.is_empty() {
            if !(args.radius_cap > 0.0 && args.radius_cap.is_finite()) {
                return Err(Error::invalid("--radius-cap must be positive"));
            }
            RadiiSpec::Auto { cap: args.radius_cap }
        } else {
            RadiiSpec::Explicit {
                values: args.radii.clone(),
            }
        };
        let reach = match args.reach {
            Some(v) if !(v > 0.0) => return Err(Error::invalid("--reach must be positive")),
            Some(v) => Some(v),
            None => input.shape().map(|s| s.reach().set).filter(|v| v.is_finite()),
        };
        let cfg = EstimateConfig {
            input,
            r: args.r,
            s: args.s,
            radii,
            reach,
            region,
            method,
            mode,
            least_squares: args.least_squares,
        };
        cfg.radii()?;
        Ok(cfg)
    }

    /// Configuration for digitizing `shape` at the given spacings with the
    /// defaults of the command line.
    pub fn for_shape(shape: ReferenceShape, a: Vec<f64>, r: u32, s: u32) -> Self {
        let reach = Some(shape.reach().set).filter(|v| v.is_finite());
        EstimateConfig {
            input: InputSpec::Shape { shape, a },
            r,
            s,
            radii: RadiiSpec::Auto {
                cap: crate::estimators::DEFAULT_RADIUS_CAP,
            },
            reach,
            region: RegionOfInterest::all(),
            method: MomentMethod::default(),
            mode: Mode::Standard,
            least_squares: false,
        }
    }

    pub fn with_radii(mut self, radii: Vec<f64>) -> Self {
        self.radii = RadiiSpec::Explicit { values: radii };
        self
    }

    pub fn with_method(mut self, method: MomentMethod) -> Self {
        self.method = method;
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    /// The radii used for every run.
    pub fn radii(&self) -> Result<Vec<f64>> {
        let d = self.input.dim();
        let need = match self.mode.variant() {
            Variant::Standard => d + 1,
            _ => d,
        };
        let radii = match &self.radii {
            RadiiSpec::Auto { cap } => {
                let count = if self.least_squares { 2 * need } else { need };
                auto_radii(count, self.reach, *cap)?
            }
            RadiiSpec::Explicit { values } => values.clone(),
        };
        if let Some(w) = reach_warning(&radii, self.reach) {
            return Err(Error::precondition(w));
        }
        if !self.least_squares && radii.len() != need {
            return Err(Error::invalid(format!(
                "{} radii given; this mode needs exactly {need} (or pass --least-squares)",
                radii.len()
            )));
        }
        Ok(radii)
    }

    fn matrix(&self, radii: &[f64]) -> Result<SteinerMatrix> {
        let d = self.input.dim();
        let variant = self.mode.variant();
        if self.least_squares {
            SteinerMatrix::overdetermined(radii, self.r, self.s, d, variant)
        } else {
            SteinerMatrix::new(radii, self.r, self.s, d, variant)
        }
    }

    fn echo(&self, radii: &[f64]) -> Value {
        json!({
            "input": self.input.echo(),
            "r": self.r,
            "s": self.s,
            "radii": radii,
            "radii_spec": self.radii,
            "reach": self.reach,
            "region": self.region,
            "method": self.method,
            "mode": self.mode,
            "least_squares": self.least_squares,
        })
    }
}

/// Result of one estimation run.
struct Run {
    a: Option<f64>,
    sample: PointSample,
    measures: Vec<MeasureValue>,
    estimate: TensorEstimate,
    volume_tensor: Option<SymTensor>,
    truth: BTreeMap<usize, crate::shapes::GroundTruth>,
    millis: f64,
}

impl Run {
    /// `(sup_norm, max_coeff)` error of `Φ̂_k`; for the zero slot with
    /// `s >= 1` the solver's own value is compared.
    fn error(&self, k: usize) -> Option<(f64, f64)> {
        let truth = &self.truth.get(&k)?.tensor;
        let est = match (&self.estimate.solved_top, k == self.estimate.dim) {
            (Some(top), true) => top,
            _ => self.estimate.get(k)?,
        };
        let diff = est - truth;
        Some((sup_norm(&diff).value, diff.max_abs_coeff()))
    }
}

fn run_once(cfg: &EstimateConfig, a: Option<f64>, sample: PointSample, radii: &[f64]) -> Result<Run> {
    let start = Instant::now();
    let matrix = cfg.matrix(radii)?;
    let (r, s, method) = (cfg.r, cfg.s, cfg.method);
    let spatial = &cfg.region.spatial;
    let measures: Vec<MeasureValue> = radii
        .iter()
        .map(|&rad| match cfg.mode {
            Mode::Standard | Mode::Reduced => voronoi_tensor_measure(&sample, rad, r, s, spatial, method),
            Mode::Refined => refined_measure(&sample, rad, r, s, spatial, method),
            Mode::Shell => shell_measure(&sample, rad, r, s, &cfg.region, method),
        })
        .collect::<Result<_>>()?;
    let mut volume_tensor = None;
    let mut estimate = match cfg.mode {
        Mode::Standard => estimate_tensors(&measures, &matrix)?,
        Mode::Refined => {
            let spacing = sample
                .lattice()
                .map(|l| l.spacing)
                .ok_or_else(|| Error::precondition("--refined needs a lattice sample"))?;
            estimate_refined(&measures, &matrix, spacing)?
        }
        Mode::Shell => estimate_local(&measures, &matrix)?,
        Mode::Reduced => {
            let phi = volume_tensor_hat(&sample, r)?;
            let est = reduced_radius_estimate(&measures, &phi, &matrix)?;
            volume_tensor = Some(phi);
            est
        }
    };
    if let Some(w) = reach_warning(radii, cfg.reach) {
        estimate.warnings.push(w);
    }
    let whole = cfg.region == RegionOfInterest::all();
    let mut truth = BTreeMap::new();
    if let (Some(shape), true) = (cfg.input.shape(), whole) {
        for &k in estimate.tensors.keys() {
            truth.insert(k, ground_truth(shape, k, r, s)?);
        }
    }
    Ok(Run {
        a,
        sample,
        measures,
        estimate,
        volume_tensor,
        truth,
        millis: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn run_all(cfg: &EstimateConfig) -> Result<(Vec<f64>, Vec<Run>)> {
    let radii = cfg.radii()?;
    let runs = cfg
        .input
        .samples()?
        .into_iter()
        .map(|(a, sample)| run_once(cfg, a, sample, &radii))
        .collect::<Result<Vec<_>>>()?;
    Ok((radii, runs))
}

fn header(cfg: &EstimateConfig, radii: &[f64]) -> Map<String, Value> {
    let mut top = Map::new();
    top.insert("schema_version".into(), json!(SCHEMA_VERSION));
    top.insert(
        "tool".into(),
        json!({ "name": "vorotens", "version": env!("CARGO_PKG_VERSION") }),
    );
    top.insert("config".into(), cfg.echo(radii));
    top
}

/// The JSON report of `vorotens estimate`. Without `timing` the text
/// depends only on the configuration.
pub fn estimate_report(cfg: &EstimateConfig, timing: bool) -> Result<String> {
    let (radii, runs) = run_all(cfg)?;
    let mut top = header(cfg, &radii);
    let runs: Vec<Value> = runs
        .iter()
        .map(|run| {
            let mut obj = Map::new();
            obj.insert("a".into(), json!(run.a));
            obj.insert("points".into(), json!(run.sample.len()));
            obj.insert("radii".into(), json!(radii));
            obj.insert("measures".into(), json!(run.measures));
            obj.insert("estimate".into(), json!(run.estimate));
            if let Some(phi) = &run.volume_tensor {
                obj.insert("volume_tensor_hat".into(), json!(phi));
            }
            if !run.truth.is_empty() {
                let truth: Map<String, Value> =
                    run.truth.iter().map(|(k, t)| (k.to_string(), json!(t))).collect();
                let errors: Map<String, Value> = run
                    .truth
                    .keys()
                    .filter_map(|&k| {
                        let (sup, max) = run.error(k)?;
                        Some((k.to_string(), json!({ "sup_norm": sup, "max_coeff": max })))
                    })
                    .collect();
                obj.insert("truth".into(), Value::Object(truth));
                obj.insert("errors".into(), Value::Object(errors));
            }
            if timing {
                obj.insert("timing_ms".into(), json!(run.millis));
            }
            Value::Object(obj)
        })
        .collect();
    top.insert("runs".into(), Value::Array(runs));
    let mut text = serde_json::to_string_pretty(&Value::Object(top))?;
    text.push('\n');
    Ok(text)
}

/// Output of `vorotens converge`.
#[derive(Clone, Debug)]
pub struct ConvergeOutput {
    pub csv: String,
    pub summary: String,
}

/// Least-squares slope of `ln y` against `ln x`; `None` when a value is
/// not positive or fewer than two points remain.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || x.len() != y.len() || x.iter().chain(y).any(|v| !(*v > 0.0 && v.is_finite())) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Sweep the lattice spacings of a shape configuration.
pub fn converge_tables(cfg: &EstimateConfig, timing: bool) -> Result<ConvergeOutput> {
    let (shape, a_list) = match &cfg.input {
        InputSpec::Shape { shape, a } => (shape, a),
        InputSpec::Sample { .. } => return Err(Error::invalid("converge needs --shape and a list of --a")),
    };
    if a_list.len() < 3 {
        return Err(Error::invalid(format!(
            "converge needs at least 3 lattice spacings, got {}",
            a_list.len()
        )));
    }
    let (radii, runs) = run_all(cfg)?;
    let orders: Vec<usize> = runs[0].estimate.tensors.keys().cloned().collect();
    let d = shape.dim();

    let mut csv = format!(
        "# vorotens converge schema_version={SCHEMA_VERSION} r={} s={} mode={:?} radii={:?}\n",
        cfg.r, cfg.s, cfg.mode, radii
    );
    let mut cols = vec!["a".to_string(), "points".into(), "hausdorff".into(), "hausdorff_over_a".into()];
    for k in &orders {
        cols.push(format!("err_{k}"));
        cols.push(format!("maxcoef_{k}"));
    }
    cols.push("runtime_ms".into());
    csv.push_str(&cols.join(","));
    csv.push('\n');

    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    let mut errs: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for run in &runs {
        let a = run.a.expect("digitized runs carry a spacing");
        let hd = if d == 2 {
            Some(hausdorff_to_sample(shape, &run.sample, a / 8.0)?)
        } else {
            None
        };
        let fmt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:e}"));
        let mut line = vec![format!("{a}"), run.sample.len().to_string(), fmt(hd), fmt(hd.map(|h| h / a))];
        if let Some(h) = hd {
            ratios.push(h / a);
        }
        let mut row_err = Map::new();
        for &k in &orders {
            let e = run.error(k);
            line.push(fmt(e.map(|e| e.0)));
            line.push(fmt(e.map(|e| e.1)));
            if let Some((sup, max)) = e {
                errs.entry(k).or_default().push(sup);
                row_err.insert(k.to_string(), json!({ "sup_norm": sup, "max_coeff": max }));
            }
        }
        line.push(if timing { format!("{:.3}", run.millis) } else { String::new() });
        csv.push_str(&line.join(","));
        csv.push('\n');
        let mut row = json!({
            "a": a,
            "points": run.sample.len(),
            "hausdorff": hd,
            "estimate": run.estimate.tensors,
            "errors": row_err,
        });
        if timing {
            row["timing_ms"] = json!(run.millis);
        }
        rows.push(row);
    }

    let mut top = header(cfg, &radii);
    let slopes: Map<String, Value> = errs
        .iter()
        .filter(|(_, e)| e.len() == a_list.len())
        .filter_map(|(k, e)| Some((k.to_string(), json!(log_log_slope(a_list, e)?))))
        .collect();
    top.insert("slopes".into(), Value::Object(slopes));
    if !ratios.is_empty() {
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        top.insert(
            "hausdorff_over_a".into(),
            json!({ "min": lo, "max": hi, "ratio": hi / lo }),
        );
    }
    top.insert("rows".into(), Value::Array(rows));
    let mut summary = serde_json::to_string_pretty(&Value::Object(top))?;
    summary.push('\n');
    Ok(ConvergeOutput { csv, summary })
}

/// JSON description of the restricted cell at `site` with its moments.
pub fn cell_dump_report(input: &InputSpec, site: &[f64], radius: f64, s_max: u32) -> Result<String> {
    let sample = match input {
        InputSpec::Shape { shape, a } if a.len() == 1 => digitize_shape(shape, a[0], 2.0 * a[0])?,
        InputSpec::Shape { .. } => return Err(Error::invalid("cell-dump takes a single --a")),
        InputSpec::Sample { sample, .. } => sample.clone(),
    };
    if site.len() != sample.dim() {
        return Err(Error::DimensionMismatch {
            expected: sample.dim(),
            found: site.len(),
        });
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("--radius must be positive"));
    }
    let pos = locate(&sample, site)?;
    let (cell, table) = map_cells(&sample, radius, &[pos], |pos, cell| {
        let table = if sample.dim() == 2 {
            moments_exact_2d(cell, s_max)?
        } else {
            moments_mc_cell(cell, s_max, 100_000, 0, pos as u64)?
        };
        Ok((cell_dump(cell), table))
    })?
    .pop()
    .expect("one site requested");
    let mut out = json!({ "schema_version": SCHEMA_VERSION, "cell": cell, "moments": table });
    if sample.dim() != 2 {
        out["moments_method"] = json!({ "kind": "mc", "samples": 100_000, "seed": 0 });
    }
    let mut text = serde_json::to_string_pretty(&out)?;
    text.push('\n');
    Ok(text)
}

/// Sample position of `site`, allowing for decimal rounding of lattice
/// coordinates.
fn locate(sample: &PointSample, site: &[f64]) -> Result<usize> {
    if let Some(pos) = sample.position(site) {
        return Ok(pos);
    }
    let scale = site.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    match SpatialGrid::with_auto_cell(sample).nearest(site) {
        Some((pos, dist)) if dist <= 1e-9 * scale => Ok(pos),
        _ => Err(Error::precondition(format!("{site:?} is not a sample point"))),
    }
}

pub(super) fn read_shape(text: &str) -> Result<ReferenceShape> {
    let json = if text.trim_start().starts_with('{') {
        text.to_string()
    } else {
        std::fs::read_to_string(text)?
    };
    let shape = ReferenceShape::from_json(&json)?;
    shape.validate()?;
    Ok(shape)
}

fn read_region(text: &str) -> Result<RegionOfInterest> {
    let json = match text.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)?,
        None => text.to_string(),
    };
    Ok(serde_json::from_str(&json)?)
}

fn read_sample(path: &Path) -> Result<PointSample> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pbm")) {
        let header: PbmHeader = serde_json::from_str(&std::fs::read_to_string(sidecar(path))?)?;
        sample_from_pbm(&text, &header)
    } else {
        sample_from_json(&text)
    }
}

fn digitize_shape(shape: &ReferenceShape, a: f64, pad: f64) -> Result<PointSample> {
    let lattice = Lattice::cubic(a, shape.dim())?;
    digitize(shape, &lattice, &Window::around(shape, pad))
}

/// Sample JSON for `shape` at spacing `a`, plus a PBM image and its header
/// when requested (planar shapes only).
pub fn digitize_files(
    shape: &ReferenceShape,
    a: f64,
    pad: f64,
    pbm: bool,
) -> Result<(String, Option<(String, String)>)> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid(format!("lattice spacing must be positive, got {a}")));
    }
    if !(pad >= 0.0) {
        return Err(Error::invalid("padding must be nonnegative"));
    }
    let sample = digitize_shape(shape, a, pad)?;
    let json = sample_to_json(&sample)?;
    let image = if pbm {
        let (image, header) = sample_to_pbm(&sample, &Window::around(shape, pad))?;
        Some((image, serde_json::to_string_pretty(&header)? + "\n"))
    } else {
        None
    };
    Ok((json, image))
}
