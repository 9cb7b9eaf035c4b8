use std::fmt::Write as _;

use super::{od_margin, Frame};
use crate::error::{Error, Result};

/// One sampled frame with its verification metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSample {
    pub t: f64,
    pub frame: Frame,
    pub funtf_residual: f64,
    pub od_margin: f64,
    /// Deviation of the sample's eigensteps from the declared eigenstep path,
    /// when the construction declares one.
    pub eigensteps_deviation: Option<f64>,
}

impl FrameSample {
    pub fn new(t: f64, frame: Frame) -> Self {
        Self {
            t,
            funtf_residual: frame.funtf_residual(),
            od_margin: od_margin(&frame),
            frame,
            eigensteps_deviation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathMetadata {
    pub construction: String,
    pub steps: usize,
    pub notes: Vec<String>,
}

/// A sampled continuous path of frames, `t` running from 0 to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePath {
    samples: Vec<FrameSample>,
    pub metadata: PathMetadata,
}

impl FramePath {
    pub fn new(samples: Vec<FrameSample>, metadata: PathMetadata) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::InvalidArgument("a path needs at least one sample".into()))?;
        let shape = (first.frame.dim(), first.frame.len(), first.frame.field());
        if first.t != 0.0
            || samples.last().map(|s| s.t) != Some(if samples.len() == 1 { 0.0 } else { 1.0 })
        {
            return Err(Error::InvalidArgument(
                "path must run from t = 0 to t = 1".into(),
            ));
        }
        for w in samples.windows(2) {
            if w[1].t <= w[0].t {
                return Err(Error::InvalidArgument(format!(
                    "t not increasing: {} then {}",
                    w[0].t, w[1].t
                )));
            }
        }
        if let Some(s) = samples
            .iter()
            .find(|s| (s.frame.dim(), s.frame.len(), s.frame.field()) != shape)
        {
            return Err(Error::DimensionMismatch(format!(
                "sample at t = {} has a different shape",
                s.t
            )));
        }
        Ok(Self { samples, metadata })
    }

    /// Builds samples from frames on the grid `ts`.
    pub fn from_frames(construction: &str, ts: &[f64], frames: Vec<Frame>) -> Result<Self> {
        if ts.len() != frames.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} times for {} frames",
                ts.len(),
                frames.len()
            )));
        }
        let samples = ts
            .iter()
            .zip(frames)
            .map(|(&t, f)| FrameSample::new(t, f))
            .collect();
        Self::new(
            samples,
            PathMetadata {
                construction: construction.into(),
                steps: ts.len().saturating_sub(1),
                notes: Vec::new(),
            },
        )
    }

    /// Joins paths end to end, giving each an equal share of `[0, 1]` and
    /// dropping the repeated sample at every junction.
    pub fn concat(construction: &str, parts: Vec<FramePath>) -> Result<Self> {
        let m = parts.len();
        if m == 0 {
            return Err(Error::InvalidArgument("nothing to concatenate".into()));
        }
        let mut samples: Vec<FrameSample> = Vec::new();
        let mut notes = Vec::new();
        let mut steps = 0;
        for (k, part) in parts.into_iter().enumerate() {
            steps += part.metadata.steps;
            let jump = samples
                .last()
                .map(|last| last.frame.max_column_distance(&part.samples[0].frame));
            if let Some(jump) = jump {
                notes.push(format!("junction {k}: jump {jump:.3e}"));
            }
            notes.extend(
                part.metadata
                    .notes
                    .iter()
                    .map(|n| format!("{}: {n}", part.metadata.construction)),
            );
            for (idx, mut s) in part.samples.into_iter().enumerate() {
                if idx == 0 && !samples.is_empty() {
                    continue;
                }
                s.t = (k as f64 + s.t) / m as f64;
                samples.push(s);
            }
        }
        if let Some(last) = samples.last_mut() {
            last.t = 1.0;
        }
        Self::new(
            samples,
            PathMetadata {
                construction: construction.into(),
                steps,
                notes,
            },
        )
    }

    /// The same path traversed backwards.
    pub fn reversed(&self) -> FramePath {
        let samples = self
            .samples
            .iter()
            .rev()
            .map(|s| FrameSample {
                t: 1.0 - s.t,
                ..s.clone()
            })
            .collect();
        FramePath {
            samples,
            metadata: PathMetadata {
                construction: format!("{} (reversed)", self.metadata.construction),
                ..self.metadata.clone()
            },
        }
    }

    /// Applies a column permutation to every sample.
    pub fn permuted(&self, sigma: &[usize]) -> Result<FramePath> {
        let samples = self
            .samples
            .iter()
            .map(|s| {
                Ok(FrameSample {
                    frame: s.frame.permute(sigma)?,
                    ..s.clone()
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FramePath {
            samples,
            metadata: self.metadata.clone(),
        })
    }

    pub fn samples(&self) -> &[FrameSample] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [FrameSample] {
        &mut self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn start(&self) -> &Frame {
        &self.samples[0].frame
    }

    pub fn end(&self) -> &Frame {
        &self.samples[self.samples.len() - 1].frame
    }

    pub fn max_funtf_residual(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.funtf_residual)
            .fold(0.0, f64::max)
    }

    pub fn min_od_margin(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.od_margin)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_eigensteps_deviation(&self) -> Option<f64> {
        self.samples
            .iter()
            .filter_map(|s| s.eigensteps_deviation)
            .reduce(f64::max)
    }

    /// Largest column-wise jump between consecutive samples.
    pub fn max_step(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| w[0].frame.max_column_distance(&w[1].frame))
            .fold(0.0, f64::max)
    }

    /// Header `t,funtf_residual,od_margin,` then one column per frame entry,
    /// column-major; complex frames get separate real and imaginary columns.
    pub fn to_csv(&self) -> String {
        let first = self.start();
        let complex = !first.field().is_real();
        let mut out = String::from("t,funtf_residual,od_margin");
        for j in 0..first.len() {
            for i in 0..first.dim() {
                if complex {
                    let _ = write!(out, ",f{j}_{i}_re,f{j}_{i}_im");
                } else {
                    let _ = write!(out, ",f{j}_{i}");
                }
            }
        }
        out.push('\n');
        for s in &self.samples {
            let _ = write!(
                out,
                "{:.17e},{:.6e},{:.6e}",
                s.t, s.funtf_residual, s.od_margin
            );
            for z in s.frame.data().iter() {
                if complex {
                    let _ = write!(out, ",{:.17e},{:.17e}", z.re, z.im);
                } else {
                    let _ = write!(out, ",{:.17e}", z.re);
                }
            }
            out.push('\n');
        }
        out
    }
}
