//! Declarative sweep runner: evaluates exact, asymptotic, and trial-averaged
//! general-threshold bounds over (arrangement, N, SNR) grids and emits the
//! results as CSV plus a structured metadata sidecar.
//!
//! Scenario files are TOML with a closed schema; unknown keys are rejected so
//! that a typo in a sweep grid cannot silently run the wrong experiment.

use std::io::Write;
use std::path::Path;

use nalgebra::{Complex, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array_model::{synthesize_scene, ArrayConfig, ThresholdScheme};
use crate::arrangement::Arrangement;
use crate::error::{Error, Result};
use crate::fisher_crb::{
    crb_asymptotic, crb_general_threshold, crb_optimal_hadamard_with_power, CrbFormula,
};

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub array: ArraySection,
    pub arrangements: Vec<ArrangementEntry>,
    pub scene: SceneSection,
    pub threshold: ThresholdSection,
    /// Threshold/source redraws per grid point for the general-threshold
    /// curve.
    pub trials: usize,
    pub seed: u64,
    /// Destination CSV path; the metadata sidecar lands next to it.
    pub output: String,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ArraySection {
    pub num_elements: usize,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ArrangementEntry {
    pub name: String,
    /// Arrangement mini-language: `edges:K`, `left:K`, `center:K`,
    /// `bits:0110...`.
    pub spec: String,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSection {
    pub angles_deg: Vec<f64>,
    pub powers: Vec<f64>,
    pub snapshot_counts: Vec<usize>,
    pub snr_db: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSection {
    pub h_max: f64,
    pub levels: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub arrangement: String,
    pub formula: CrbFormula,
    pub num_snapshots: usize,
    pub snr_db: f64,
    /// 1-based target index.
    pub target: usize,
    /// Bound in radians^2.
    pub crb: f64,
    /// `10 log10(crb)`.
    pub crb_db: f64,
    /// Contributing evaluations: 1 for the deterministic formulas, the number
    /// of kept trials for the general-threshold mean.
    pub trials: usize,
}

#[derive(Debug, Clone, Default)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridExclusions {
    pub arrangement: String,
    pub num_snapshots: usize,
    pub snr_db: f64,
    pub excluded: usize,
    pub trials: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub tool_version: String,
    /// The source-signal model behind the synthesized scenes; recorded
    /// because the bound averages depend on it.
    pub source_model: String,
    pub trials: usize,
    pub exclusions: Vec<GridExclusions>,
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub table: ResultTable,
    pub metadata: RunMetadata,
}

pub fn parse_spec(text: &str, origin: &str) -> Result<ScenarioSpec> {
    toml::from_str(text).map_err(|e| Error::SpecParse {
        path: origin.to_string(),
        source: Box::new(e),
    })
}

pub fn load_spec(path: &Path) -> Result<ScenarioSpec> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_spec(&text, &path.display().to_string())
}

fn validate(spec: &ScenarioSpec) -> Result<Vec<Arrangement<f64>>> {
    let invalid = |what: &'static str, context: String| Error::Invalid { what, context };
    if spec.arrangements.is_empty() {
        return Err(invalid("scenario", "no arrangements listed".into()));
    }
    if spec.scene.snapshot_counts.is_empty() || spec.scene.snr_db.is_empty() {
        return Err(invalid("scenario", "empty N or SNR grid".into()));
    }
    if spec.scene.snapshot_counts.contains(&0) {
        return Err(invalid("scenario", "snapshot counts must be positive".into()));
    }
    if spec.trials == 0 {
        return Err(invalid("scenario", "at least one trial is required".into()));
    }
    if spec.scene.angles_deg.len() != spec.scene.powers.len() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "{} angles but {} powers",
                spec.scene.angles_deg.len(),
                spec.scene.powers.len()
            ),
        });
    }
    let mut arrangements = Vec::with_capacity(spec.arrangements.len());
    for entry in &spec.arrangements {
        if entry.name.contains(',') {
            return Err(invalid(
                "arrangement name",
                format!("`{}` contains a comma, which would corrupt the CSV", entry.name),
            ));
        }
        arrangements.push(Arrangement::parse(&entry.spec, spec.array.num_elements)?);
    }
    Ok(arrangements)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial stream seed from (master seed, grid index, trial, stream role),
/// so that parallel and serial grid evaluation draw identical randomness.
pub(crate) fn derive_seed(master: u64, grid: u64, trial: u64, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64(grid ^ splitmix64(trial ^ splitmix64(stream))))
}

/// Trial-averaged general-threshold bound diagonal.
///
/// Each trial draws fresh source phases and a fresh discrete threshold;
/// singular trials are excluded and counted. Returns the per-target means,
/// the number of kept trials, and the exclusion count.
#[allow(clippy::too_many_arguments)]
pub fn mean_general_crb(
    cfg: &ArrayConfig,
    arr: &Arrangement<f64>,
    angles_rad: &[f64],
    powers: &[f64],
    sigma2: f64,
    num_snapshots: usize,
    threshold: &ThresholdSection,
    trials: usize,
    master_seed: u64,
    grid_index: u64,
) -> Result<(Vec<f64>, usize, usize)> {
    let k = angles_rad.len();
    let mut sums = vec![0.0_f64; k];
    let mut excluded = 0usize;
    for trial in 0..trials {
        let scene_seed = derive_seed(master_seed, grid_index, trial as u64, 0);
        let threshold_seed = derive_seed(master_seed, grid_index, trial as u64, 1);
        let scene = synthesize_scene(cfg, angles_rad, powers, num_snapshots, sigma2, scene_seed)?;
        let scheme = ThresholdScheme::DiscreteRandom {
            h_max: threshold.h_max,
            levels: threshold.levels,
            seed: threshold_seed,
        };
        let h = scheme.materialize(&scene, cfg)?;
        match crb_general_threshold(&scene, cfg, arr, &h) {
            Ok(crb) => {
                for (kk, sum) in sums.iter_mut().enumerate() {
                    *sum += crb.matrix[(kk, kk)];
                }
            }
            Err(Error::Unidentifiable { .. }) => excluded += 1,
            Err(other) => return Err(other),
        }
    }
    let kept = trials - excluded;
    if kept == 0 {
        return Ok((vec![f64::NAN; k], 0, excluded));
    }
    for sum in &mut sums {
        *sum /= kept as f64;
    }
    Ok((sums, kept, excluded))
}

struct GridOutcome {
    exact: Vec<f64>,
    asymptotic: Vec<f64>,
    general: Vec<f64>,
    kept: usize,
    excluded: usize,
}

pub fn run_scenario(spec: &ScenarioSpec) -> Result<ScenarioRun> {
    let arrangements = validate(spec)?;
    let cfg = ArrayConfig::new(spec.array.num_elements)?;
    let angles_rad: Vec<f64> = spec.scene.angles_deg.iter().map(|a| a.to_radians()).collect();
    let powers = &spec.scene.powers;
    let k = angles_rad.len();
    let power_matrix = DMatrix::from_diagonal(&DVector::from_iterator(
        k,
        powers.iter().map(|&p| Complex::new(p, 0.0)),
    ));

    let n_grid = &spec.scene.snapshot_counts;
    let snr_grid = &spec.scene.snr_db;
    let points: Vec<(usize, usize, usize)> = (0..arrangements.len())
        .flat_map(|a| {
            n_grid.iter().enumerate().flat_map(move |(ni, _)| {
                snr_grid.iter().enumerate().map(move |(si, _)| (a, ni, si))
            })
        })
        .collect();

    let outcomes: Vec<Result<GridOutcome>> = points
        .par_iter()
        .map(|&(a_idx, n_idx, snr_idx)| {
            let arr = &arrangements[a_idx];
            let n = n_grid[n_idx];
            let snr_db = snr_grid[snr_idx];
            let snr_lin = 10f64.powf(snr_db / 10.0);
            // the sweep holds the source powers fixed and varies the noise
            // floor; SNR is referenced to the first source
            let sigma2 = powers[0] / snr_lin;
            let snrs: Vec<f64> = powers.iter().map(|&p| p / sigma2).collect();

            let exact =
                crb_optimal_hadamard_with_power(&cfg, arr, &angles_rad, &power_matrix, sigma2, n)?;
            let asymptotic = crb_asymptotic(arr, &angles_rad, &snrs, n)?;
            let grid_index = (a_idx * n_grid.len() * snr_grid.len()
                + n_idx * snr_grid.len()
                + snr_idx) as u64;
            let (general, kept, excluded) = mean_general_crb(
                &cfg,
                arr,
                &angles_rad,
                powers,
                sigma2,
                n,
                &spec.threshold,
                spec.trials,
                spec.seed,
                grid_index,
            )?;
            if excluded * 10 > spec.trials {
                return Err(Error::ExcessiveExclusions {
                    context: format!(
                        "arrangement `{}`, N = {n}, SNR = {snr_db} dB",
                        spec.arrangements[a_idx].name
                    ),
                    excluded,
                    trials: spec.trials,
                });
            }
            Ok(GridOutcome {
                exact: exact.variances(),
                asymptotic: asymptotic.variances(),
                general,
                kept,
                excluded,
            })
        })
        .collect();

    let mut resolved = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        resolved.push(outcome?);
    }

    // assemble rows ordered by (arrangement, formula, N, SNR, target)
    let mut rows = Vec::new();
    let mut exclusions = Vec::new();
    let point_index = |a: usize, ni: usize, si: usize| {
        a * n_grid.len() * snr_grid.len() + ni * snr_grid.len() + si
    };
    for (a_idx, entry) in spec.arrangements.iter().enumerate() {
        for formula in [
            CrbFormula::OptimalExact,
            CrbFormula::Asymptotic,
            CrbFormula::GeneralThreshold,
        ] {
            for (n_idx, &n) in n_grid.iter().enumerate() {
                for (snr_idx, &snr_db) in snr_grid.iter().enumerate() {
                    let outcome = &resolved[point_index(a_idx, n_idx, snr_idx)];
                    let (values, trials) = match formula {
                        CrbFormula::OptimalExact => (&outcome.exact, 1),
                        CrbFormula::Asymptotic => (&outcome.asymptotic, 1),
                        CrbFormula::GeneralThreshold => (&outcome.general, outcome.kept),
                        _ => unreachable!(),
                    };
                    for (target, &crb) in values.iter().enumerate() {
                        rows.push(ResultRow {
                            arrangement: entry.name.clone(),
                            formula,
                            num_snapshots: n,
                            snr_db,
                            target: target + 1,
                            crb,
                            crb_db: 10.0 * crb.log10(),
                            trials,
                        });
                    }
                }
            }
        }
        for (n_idx, &n) in n_grid.iter().enumerate() {
            for (snr_idx, &snr_db) in snr_grid.iter().enumerate() {
                let outcome = &resolved[point_index(a_idx, n_idx, snr_idx)];
                exclusions.push(GridExclusions {
                    arrangement: entry.name.clone(),
                    num_snapshots: n,
                    snr_db,
                    excluded: outcome.excluded,
                    trials: spec.trials,
                });
            }
        }
    }

    Ok(ScenarioRun {
        table: ResultTable { rows },
        metadata: RunMetadata {
            seed: spec.seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            source_model: "constant-modulus random-phase sources; general-threshold rows are \
                           means of per-trial bounds"
                .to_string(),
            trials: spec.trials,
            exclusions,
        },
    })
}

/// Write the table as CSV: header
/// `arrangement,formula,N,snr_db,target,crb,crb_db,trials`, bound values in
/// scientific notation with 10 significant digits.
pub fn emit_table<W: Write>(table: &ResultTable, mut out: W) -> std::io::Result<()> {
    writeln!(out, "arrangement,formula,N,snr_db,target,crb,crb_db,trials")?;
    for row in &table.rows {
        writeln!(
            out,
            "{},{},{},{},{},{:.9e},{:.9e},{}",
            row.arrangement,
            row.formula,
            row.num_snapshots,
            row.snr_db,
            row.target,
            row.crb,
            row.crb_db,
            row.trials
        )?;
    }
    Ok(())
}

/// Serialize the run metadata sidecar as TOML.
pub fn emit_metadata<W: Write>(metadata: &RunMetadata, mut out: W) -> Result<()> {
    let text = toml::to_string_pretty(metadata).map_err(|e| Error::Invalid {
        what: "run metadata",
        context: e.to_string(),
    })?;
    out.write_all(text.as_bytes()).map_err(|source| Error::Io {
        path: "<metadata writer>".to_string(),
        source,
    })
}

/// Write the CSV at `csv_path` and the sidecar at `<csv_path>.meta.toml`.
pub fn write_run(run: &ScenarioRun, csv_path: &Path) -> Result<std::path::PathBuf> {
    let io_err = |path: &Path, source: std::io::Error| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let mut csv = Vec::new();
    emit_table(&run.table, &mut csv).map_err(|e| io_err(csv_path, e))?;
    std::fs::write(csv_path, csv).map_err(|e| io_err(csv_path, e))?;

    let sidecar = csv_path.with_file_name(format!(
        "{}.meta.toml",
        csv_path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "output".to_string())
    ));
    let mut meta = Vec::new();
    emit_metadata(&run.metadata, &mut meta)?;
    std::fs::write(&sidecar, meta).map_err(|e| io_err(&sidecar, e))?;
    Ok(sidecar)
}
