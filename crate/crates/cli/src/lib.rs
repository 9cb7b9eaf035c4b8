//! Drivers behind the `funtf` binary: connecting frames, the full-spark
//! experiment, and file I/O for the thin command wrappers.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use funtf_core::eigensteps::{is_interior, of_frame, sample_interior, DEFAULT_INTERIOR_MARGIN};
use funtf_core::frames::{invert_permutation, is_od, nod_reorder, spark, DEFAULT_RANK_TOL};
use funtf_core::lifting::{fiber_path, lift_path, synthesize, BaseData};
use funtf_core::random::random_funtf;
use funtf_core::{EigenstepsTable, Error, Field, Frame, FramePath};

pub mod commands;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0} frames are not supported here; the real case is covered by the motion commands (morph, swap)")]
    FieldUnsupported(Field),
    #[error("{which} is not a FUNTF (unit norm residual {unit_norm:.3e}, tightness residual {tightness:.3e})")]
    NotFuntf {
        which: &'static str,
        unit_norm: f64,
        tightness: f64,
    },
    #[error("N = {n}, d = {d}: the eigensteps interior is empty (needs N >= d + 2)")]
    InteriorEmpty { n: usize, d: usize },
    #[error("{0} is orthodecomposable")]
    EndpointOd(&'static str),
    #[error("{path}: {message}")]
    FileFormat { path: String, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Shared options of every subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub tol: f64,
    pub steps: usize,
    pub seed: u64,
    pub field: Field,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            steps: 64,
            seed: 0,
            field: Field::Complex,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::Config(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.steps < 2 {
            return Err(CliError::Config(format!(
                "steps must be at least 2, got {}",
                self.steps
            )));
        }
        Ok(())
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleMetrics {
    pub t: f64,
    pub funtf_residual: f64,
    pub od_margin: f64,
    pub eigensteps_deviation: Option<f64>,
}

/// Per-sample metrics of a path and its verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathReport {
    pub construction: String,
    pub samples: Vec<SampleMetrics>,
    pub max_funtf_residual: f64,
    pub min_od_margin: f64,
    pub max_eigensteps_deviation: Option<f64>,
    pub start_deviation: f64,
    pub end_deviation: f64,
    pub tol: f64,
    pub pass: bool,
    pub notes: Vec<String>,
}

impl PathReport {
    /// Pass iff every sample is a FUNTF within `tol` and both endpoint
    /// deviations are at most `10 tol`.
    pub fn new(path: &FramePath, start_deviation: f64, end_deviation: f64, tol: f64) -> Self {
        let samples = path
            .samples()
            .iter()
            .map(|s| SampleMetrics {
                t: s.t,
                funtf_residual: s.funtf_residual,
                od_margin: s.od_margin,
                eigensteps_deviation: s.eigensteps_deviation,
            })
            .collect();
        let max_funtf_residual = path.max_funtf_residual();
        Self {
            construction: path.metadata.construction.clone(),
            samples,
            max_funtf_residual,
            min_od_margin: path.min_od_margin(),
            max_eigensteps_deviation: path.max_eigensteps_deviation(),
            start_deviation,
            end_deviation,
            tol,
            pass: max_funtf_residual <= tol
                && start_deviation <= 10.0 * tol
                && end_deviation <= 10.0 * tol,
            notes: path.metadata.notes.clone(),
        }
    }

    /// Endpoint comparison against the frames the path should join.
    pub fn between(path: &FramePath, from: &Frame, to: &Frame, tol: f64) -> Self {
        Self::new(
            path,
            path.start().max_column_distance(from),
            path.end().max_column_distance(to),
            tol,
        )
    }

    /// The report without per-sample rows.
    pub fn summary(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("samples");
            obj.insert("samples".into(), self.samples.len().into());
        }
        v
    }
}

fn funtf_or_err(frame: &Frame, which: &'static str) -> CliResult<()> {
    let report = frame.check_funtf(1e-8);
    if report.ok {
        Ok(())
    } else {
        Err(CliError::NotFuntf {
            which,
            unit_norm: report.unit_norm_resid,
            tightness: report.tightness_resid,
        })
    }
}

fn check_pair(f: &Frame, g: &Frame) -> CliResult<()> {
    for frame in [f, g] {
        if frame.field().is_real() {
            return Err(CliError::FieldUnsupported(Field::Real));
        }
    }
    if (f.dim(), f.len()) != (g.dim(), g.len()) {
        return Err(Error::DimensionMismatch(format!(
            "{} x {} against {} x {}",
            f.dim(),
            f.len(),
            g.dim(),
            g.len()
        ))
        .into());
    }
    funtf_or_err(f, "first frame")?;
    funtf_or_err(g, "second frame")?;
    let (n, d) = (f.len(), f.dim());
    if n < d + 2 {
        return Err(CliError::InteriorEmpty { n, d });
    }
    Ok(())
}

/// The fixed interior frame every route passes through: the seed-0
/// interior sample lifted with the identity fiber point.
pub fn anchor_frame(n: usize, d: usize, field: Field) -> CliResult<(EigenstepsTable, Frame)> {
    let table = sample_interior(n, d, &mut ChaCha8Rng::seed_from_u64(0))?;
    let frame = synthesize(&table, &BaseData::identity(field, n, d))?;
    Ok((table, frame))
}

/// Route from an arbitrary FUNTF to a frame with interior eigensteps: along
/// the fiber to the boundary lift of the anchor, then back along that lift.
fn to_interior(frame: &Frame, anchor: &Frame, steps: usize) -> CliResult<Vec<FramePath>> {
    let table = of_frame(frame);
    let lift = lift_path(anchor, &table, steps)?;
    let fiber = fiber_path(frame, lift.end(), steps)?;
    Ok(vec![fiber, lift.reversed()])
}

fn connect_parts(f: &Frame, g: &Frame, steps: usize) -> CliResult<(Vec<FramePath>, Vec<String>)> {
    let (n, d) = (f.len(), f.dim());
    let mut notes = Vec::new();
    let mut parts = Vec::new();
    let mut start = f.clone();
    if !is_interior(&of_frame(f), DEFAULT_INTERIOR_MARGIN)? {
        let (_, anchor) = anchor_frame(n, d, f.field())?;
        notes.push("first frame on the boundary: routed through the seed-0 interior anchor".into());
        parts.extend(to_interior(f, &anchor, steps)?);
        start = anchor;
    }
    let lift = lift_path(&start, &of_frame(g), steps)?;
    let fiber = fiber_path(lift.end(), g, steps)?;
    parts.push(lift);
    parts.push(fiber);
    Ok((parts, notes))
}

/// Connects two complex FUNTFs: lift along the straight eigensteps segment
/// (from the interior anchor when the first frame is on the boundary), then
/// move within the fiber of the second frame's eigensteps.
pub fn cmd_connect(f: &Frame, g: &Frame, config: &RunConfig) -> CliResult<(FramePath, PathReport)> {
    config.validate()?;
    check_pair(f, g)?;
    let (parts, notes) = connect_parts(f, g, config.steps)?;
    let mut path = FramePath::concat("connect", parts)?;
    path.metadata.notes.extend(notes);
    let report = PathReport::between(&path, f, g, config.tol);
    Ok((path, report))
}

/// Whether no OD frame shares these eigensteps: interior tables, or tables
/// whose first `d` vectors form a NOD basis.
fn od_free_eigensteps(frame: &Frame) -> CliResult<bool> {
    if is_interior(&of_frame(frame), DEFAULT_INTERIOR_MARGIN)? {
        return Ok(true);
    }
    let d = frame.dim();
    let head = frame.select(&(0..d).collect::<Vec<_>>())?;
    Ok(!is_od(&head) && spark(&head, DEFAULT_RANK_TOL)?.full_spark)
}

/// The path of [`cmd_connect`] avoiding OD frames. When an endpoint's
/// eigensteps are shared with OD frames the columns are first reordered so
/// that the leading `d` vectors form a NOD basis; the route is built in the
/// reordered frame and the reordering undone on every sample.
pub fn cmd_connect_nod(
    f: &Frame,
    g: &Frame,
    config: &RunConfig,
) -> CliResult<(FramePath, PathReport, Vec<usize>)> {
    config.validate()?;
    check_pair(f, g)?;
    if is_od(f) {
        return Err(CliError::EndpointOd("first frame"));
    }
    if is_od(g) {
        return Err(CliError::EndpointOd("second frame"));
    }
    let n = f.len();
    let identity: Vec<usize> = (0..n).collect();
    let mut candidates = vec![identity.clone(), nod_reorder(f)?, nod_reorder(g)?];
    candidates.dedup();
    let mut sigma = None;
    for c in &candidates {
        if od_free_eigensteps(&f.permute(c)?)? && od_free_eigensteps(&g.permute(c)?)? {
            sigma = Some(c.clone());
            break;
        }
    }
    let mut notes = Vec::new();
    let sigma = sigma.unwrap_or_else(|| {
        notes.push(
            "no single reordering clears both endpoints; OD frames may share their eigensteps"
                .into(),
        );
        candidates[1].clone()
    });
    let (fs, gs) = (f.permute(&sigma)?, g.permute(&sigma)?);
    let (parts, route_notes) = connect_parts(&fs, &gs, config.steps)?;
    let inverse = invert_permutation(&sigma)?;
    let mut path = FramePath::concat("connect nod", parts)?.permuted(&inverse)?;
    if sigma != identity {
        notes.push(format!(
            "columns reordered by {sigma:?} and restored on the path"
        ));
    }
    path.metadata.notes.extend(route_notes);
    path.metadata.notes.extend(notes);
    let mut report = PathReport::between(&path, f, g, config.tol);
    report.pass &= report.min_od_margin > 0.0;
    Ok((path, report, sigma))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FullSparkSummary {
    #[serde(rename = "N")]
    pub n: usize,
    pub d: usize,
    pub field: Field,
    pub trials: usize,
    pub full_spark_count: usize,
    pub ratio: f64,
    /// Smallest dependent subset found among the failures.
    pub first_failure: Option<Vec<usize>>,
}

/// Spark of `trials` random FUNTFs.
pub fn cmd_experiment_fullspark(
    n: usize,
    d: usize,
    trials: usize,
    config: &RunConfig,
) -> CliResult<FullSparkSummary> {
    config.validate()?;
    let mut rng = config.rng();
    let mut count = 0;
    let mut first_failure = None;
    for _ in 0..trials {
        let frame = random_funtf(n, d, config.field, &mut rng)?;
        let report = spark(&frame, DEFAULT_RANK_TOL)?;
        if report.full_spark {
            count += 1;
        } else if first_failure.is_none() {
            first_failure = Some(report.witness);
        }
    }
    Ok(FullSparkSummary {
        n,
        d,
        field: config.field,
        trials,
        full_spark_count: count,
        ratio: if trials == 0 {
            1.0
        } else {
            count as f64 / trials as f64
        },
        first_failure,
    })
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::FileFormat {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn read_frame(path: &Path) -> CliResult<Frame> {
    let frame = Frame::from_json(&read(path)?).map_err(|e| CliError::FileFormat {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    if frame.dim() == 0 || frame.is_empty() {
        return Err(CliError::FileFormat {
            path: path.display().to_string(),
            message: "frame has no vectors or zero dimension".into(),
        });
    }
    Ok(frame)
}

pub fn read_table(path: &Path) -> CliResult<EigenstepsTable> {
    EigenstepsTable::from_json(&read(path)?).map_err(|e| CliError::FileFormat {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn write(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| CliError::FileFormat {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_bounds() {
        assert!(RunConfig::default().validate().is_ok());
        let bad = RunConfig {
            steps: 1,
            ..RunConfig::default()
        };
        assert!(matches!(bad.validate(), Err(CliError::Config(_))));
        let bad = RunConfig {
            tol: 0.0,
            ..RunConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn small_frames_have_no_interior() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_funtf(4, 3, Field::Complex, &mut rng).unwrap();
        let g = random_funtf(4, 3, Field::Complex, &mut rng).unwrap();
        assert!(matches!(
            cmd_connect(&f, &g, &RunConfig::default()),
            Err(CliError::InteriorEmpty { n: 4, d: 3 })
        ));
    }

    #[test]
    fn real_frames_refused() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_funtf(5, 2, Field::Real, &mut rng).unwrap();
        assert!(matches!(
            cmd_connect(&f, &f, &RunConfig::default()),
            Err(CliError::FieldUnsupported(Field::Real))
        ));
    }

    #[test]
    fn connecting_a_frame_to_itself() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_funtf(5, 2, Field::Complex, &mut rng).unwrap();
        let (path, report) = cmd_connect(&f, &f, &RunConfig::default()).unwrap();
        assert!(report.pass, "{:?}", report.summary());
        assert!(path.max_step() < 1e-6);
    }

    #[test]
    fn random_pair_seed_7() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = random_funtf(5, 2, Field::Complex, &mut rng).unwrap();
        let g = random_funtf(5, 2, Field::Complex, &mut rng).unwrap();
        let (_, report) = cmd_connect(&f, &g, &RunConfig::default()).unwrap();
        assert!(report.pass, "{:?}", report.summary());
        assert!(report.max_eigensteps_deviation.unwrap() < 1e-7);
    }
}
