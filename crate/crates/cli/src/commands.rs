//! Argument parsing and dispatch for the `funtf` binary.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use funtf_core::eigensteps::{
    is_interior, of_frame, sample_interior, validate, DEFAULT_INTERIOR_MARGIN,
};
use funtf_core::frames::{
    naimark_complement, od_components, od_margin, spark_with_budget, DEFAULT_EDGE_EPS,
};
use funtf_core::lifting::{lift_path, synthesize, BaseData};
use funtf_core::motions::{
    align_for_morph, canonical_simplex, simplex_onb_morph_path, two_onb_swap_frames,
    two_onb_swap_path,
};
use funtf_core::random::{random_base, random_funtf};
use funtf_core::{Field, FramePath};

use crate::{
    cmd_connect, cmd_connect_nod, cmd_experiment_fullspark, read_frame, read_table, write,
    CliResult, PathReport, RunConfig,
};

#[derive(Debug, Parser)]
#[command(
    name = "funtf",
    version,
    about = "Finite unit norm tight frames: synthesis, paths and checks"
)]
pub struct Cli {
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 64)]
    pub steps: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value = "complex")]
    pub field: Field,
    /// Where to write the command's artifact (frame or table JSON, path CSV).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that a frame is a FUNTF.
    Verify { frame: PathBuf },
    /// Eigensteps of a frame (CSV when --output ends in .csv).
    Eigensteps { frame: PathBuf },
    /// Frame with the given eigensteps.
    Synthesize {
        table: PathBuf,
        /// Draw the fiber point from --seed instead of using the identity.
        #[arg(long)]
        random_base: bool,
    },
    /// Lift the straight eigensteps path from a frame to a target table.
    Lift { frame: PathBuf, table: PathBuf },
    /// Path between two complex FUNTFs.
    Connect { from: PathBuf, to: PathBuf },
    /// Path between two complex NOD FUNTFs avoiding OD frames.
    ConnectNod { from: PathBuf, to: PathBuf },
    /// Naimark complement.
    Naimark { frame: PathBuf },
    /// Spark and a smallest dependent subset.
    Spark {
        frame: PathBuf,
        #[arg(long, default_value_t = funtf_core::frames::DEFAULT_SPARK_BUDGET)]
        budget: u128,
    },
    /// Orthogonal decomposition and OD margin.
    Od { frame: PathBuf },
    /// Random FUNTF, or an interior eigensteps table.
    Sample {
        n: usize,
        d: usize,
        #[arg(long)]
        eigensteps: bool,
    },
    /// Simplex-to-two-bases morph in dimension d.
    Morph { d: usize },
    /// Staged swap between the two positively oriented bases in dimension d.
    Swap {
        d: usize,
        /// FUNTF of d-2 vectors in dimension d-3; a simplex when omitted.
        #[arg(long)]
        small: Option<PathBuf>,
    },
    /// Fraction of random FUNTFs that are full spark.
    ExperimentFullspark {
        n: usize,
        d: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
}

/// What a command prints and whether its verdict passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub stdout: String,
}

impl Cli {
    pub fn config(&self) -> RunConfig {
        RunConfig {
            tol: self.tol,
            steps: self.steps,
            seed: self.seed,
            field: self.field,
            output: self.output.clone(),
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes")
}

/// Writes `artifact` to the output path and prints `summary`; without an
/// output path the artifact itself is printed.
fn emit(config: &RunConfig, pass: bool, artifact: String, summary: Value) -> CliResult<Outcome> {
    let stdout = match &config.output {
        Some(path) => {
            write(path, &artifact)?;
            pretty(&summary)
        }
        None => artifact,
    };
    Ok(Outcome { pass, stdout })
}

/// Paths always print their summary; the CSV goes to the output path.
fn emit_path(
    config: &RunConfig,
    path: &FramePath,
    report: &PathReport,
    extra: Value,
) -> CliResult<Outcome> {
    if let Some(out) = &config.output {
        write(out, &path.to_csv())?;
    }
    let mut summary = report.summary();
    if let (Some(obj), Value::Object(more)) = (summary.as_object_mut(), extra) {
        obj.extend(more);
    }
    Ok(Outcome {
        pass: report.pass,
        stdout: pretty(&summary),
    })
}

pub fn run(cli: &Cli) -> CliResult<Outcome> {
    let config = cli.config();
    config.validate()?;
    match &cli.command {
        Command::Verify { frame } => {
            let f = read_frame(frame)?;
            let r = f.check_funtf(config.tol);
            Ok(Outcome {
                pass: r.ok,
                stdout: pretty(&json!({
                    "field": f.field(), "d": f.dim(), "N": f.len(),
                    "unit_norm_resid": r.unit_norm_resid, "tightness_resid": r.tightness_resid,
                    "tol": config.tol, "funtf": r.ok,
                })),
            })
        }
        Command::Eigensteps { frame } => {
            let table = of_frame(&read_frame(frame)?);
            let report = validate(&table, 1e-9);
            let csv = config
                .output
                .as_ref()
                .is_some_and(|p| p.extension().is_some_and(|e| e == "csv"));
            let artifact = if csv { table.to_csv() } else { table.to_json() };
            let summary = json!({
                "N": table.frame_size(), "d": table.dim(), "valid": report.ok,
                "interior": is_interior(&table, DEFAULT_INTERIOR_MARGIN)?, "convention": report.convention,
            });
            emit(&config, report.ok, artifact, summary)
        }
        Command::Synthesize {
            table,
            random_base: random,
        } => {
            let t = read_table(table)?;
            let base = if *random {
                random_base(&t, config.field, &mut config.rng())?
            } else {
                BaseData::identity(config.field, t.frame_size(), t.dim())
            };
            let f = synthesize(&t, &base)?;
            let r = f.check_funtf(config.tol);
            let deviation = of_frame(&f).max_deviation(&t);
            let summary = json!({"funtf": r.ok, "eigensteps_deviation": deviation});
            emit(&config, r.ok, f.to_json(), summary)
        }
        Command::Lift { frame, table } => {
            let (f, t) = (read_frame(frame)?, read_table(table)?);
            let path = lift_path(&f, &t, config.steps)?;
            let end = of_frame(path.end()).max_deviation(&t);
            let report =
                PathReport::new(&path, path.start().max_column_distance(&f), end, config.tol);
            emit_path(&config, &path, &report, json!({}))
        }
        Command::Connect { from, to } => {
            let (f, g) = (read_frame(from)?, read_frame(to)?);
            let (path, report) = cmd_connect(&f, &g, &config)?;
            emit_path(&config, &path, &report, json!({}))
        }
        Command::ConnectNod { from, to } => {
            let (f, g) = (read_frame(from)?, read_frame(to)?);
            let (path, report, sigma) = cmd_connect_nod(&f, &g, &config)?;
            emit_path(&config, &path, &report, json!({"permutation": sigma}))
        }
        Command::Naimark { frame } => {
            let g = naimark_complement(&read_frame(frame)?)?;
            let summary =
                json!({"d": g.dim(), "N": g.len(), "funtf": g.check_funtf(config.tol).ok});
            emit(&config, true, g.to_json(), summary)
        }
        Command::Spark { frame, budget } => {
            let r = spark_with_budget(
                &read_frame(frame)?,
                funtf_core::frames::DEFAULT_RANK_TOL,
                *budget,
            )?;
            let v = json!({"spark": r.spark, "witness": r.witness, "full_spark": r.full_spark});
            Ok(Outcome {
                pass: true,
                stdout: pretty(&v),
            })
        }
        Command::Od { frame } => {
            let f = read_frame(frame)?;
            let components = od_components(&f, DEFAULT_EDGE_EPS);
            let margin = od_margin(&f);
            let v = json!({
                "is_od": components.len() > 1, "components": components,
                "od_margin": if margin.is_finite() { json!(margin) } else { json!("inf") },
            });
            Ok(Outcome {
                pass: true,
                stdout: pretty(&v),
            })
        }
        Command::Sample { n, d, eigensteps } => {
            let mut rng = config.rng();
            if *eigensteps {
                let t = sample_interior(*n, *d, &mut rng)?;
                emit(
                    &config,
                    true,
                    t.to_json(),
                    json!({"N": n, "d": d, "interior": true}),
                )
            } else {
                let f = random_funtf(*n, *d, config.field, &mut rng)?;
                let r = f.check_funtf(config.tol);
                emit(
                    &config,
                    r.ok,
                    f.to_json(),
                    json!({"N": n, "d": d, "funtf": r.ok}),
                )
            }
        }
        Command::Morph { d } => {
            let (h, xi) = canonical_simplex(*d)?;
            let hp = align_for_morph(&xi, &h, &h, &xi)?;
            let path = simplex_onb_morph_path(&xi, &h, &hp, &xi, config.steps)?;
            let mut report = PathReport::new(&path, 0.0, 0.0, config.tol);
            report.pass &= report.min_od_margin > 0.0;
            emit_path(&config, &path, &report, json!({}))
        }
        Command::Swap { d, small } => {
            let small = match small {
                Some(p) => Some(read_frame(p)?),
                None if *d > 3 => Some(canonical_simplex(d - 2)?.0),
                None => None,
            };
            let frames = two_onb_swap_frames(*d, small.as_ref())?;
            let path = two_onb_swap_path(*d, small.as_ref(), config.steps)?;
            let mut report = PathReport::between(&path, &frames.f_star, &frames.g_star, config.tol);
            report.pass &= report.min_od_margin > 0.0;
            emit_path(&config, &path, &report, json!({"xi": frames.xi}))
        }
        Command::ExperimentFullspark { n, d, trials } => {
            let s = cmd_experiment_fullspark(*n, *d, *trials, &config)?;
            Ok(Outcome {
                pass: s.full_spark_count == s.trials,
                stdout: pretty(&serde_json::to_value(&s).expect("summary serializes")),
            })
        }
    }
}

/// Exit code for a finished run: 0 pass, 1 verdict fail, 2 error.
pub fn exit_code(result: &CliResult<Outcome>) -> i32 {
    match result {
        Ok(o) if o.pass => 0,
        Ok(_) => 1,
        Err(_) => 2,
    }
}
