//! Optimize, baseline and eval runs and the files they leave behind.
//!
//! Output directory contents:
//!
//! | file | written by | content |
//! |------|------------|---------|
//! | `trace.csv` | optimize | one row per iteration |
//! | `timing.csv` | optimize | wall-clock seconds per iteration |
//! | `best_config.json` | optimize, baseline | per-BS tilt, power and role |
//! | `summary.json` | optimize, baseline | 20-seed means and run statistics |
//! | `sinr_cdf.csv` | optimize, baseline | sorted per-population SINRs |
//! | `dataset.csv`, `state.json` | optimize | checkpoint |
//! | `eval_summary.json`, `eval_sinr_cdf.csv` | eval | as above, for a stored config |
//!
//! Everything except `timing.csv` is a pure function of the run spec.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use corridor_bo::bo::{write_trace_csv, BayesOpt, BoState, StateBlob, Termination};
use corridor_bo::netsim::{CellRole, Network, NetworkSetting};
use corridor_bo::rng::derive_seed;
use corridor_bo::{Error, ObservationDataset, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Mode, RunSpec};

/// Fresh drops used to score a final configuration.
pub const N_FINAL_SEEDS: usize = 20;
const FINAL_EVAL_TAG: u64 = 101;
/// Tilt and power of the all-downtilt reference network.
pub const BASELINE_TILT_DEG: f64 = -12.0;
pub const BASELINE_POWER_DBM: f64 = 46.0;
/// Iteration at which the early best is recorded in the summary.
pub const EARLY_ITERATION: usize = 80;

pub fn final_seeds(seed: u64) -> Vec<u64> {
    (0..N_FINAL_SEEDS as u64).map(|i| derive_seed(seed, FINAL_EVAL_TAG, i)).collect()
}

/// Pooled result of evaluating one setting on several drops.
#[derive(Debug, Clone)]
pub struct PooledEval {
    pub seeds: Vec<u64>,
    /// Per-UE SINRs in dB, concatenated over seeds.
    pub gue_sinr_db: Vec<f64>,
    pub uav_sinr_db: Vec<f64>,
    pub mean_gue_db: f64,
    pub mean_uav_db: f64,
    pub objective: f64,
    /// Per BS, number of GUEs and UAVs served over all drops.
    pub served_gue: Vec<usize>,
    pub served_uav: Vec<usize>,
    /// Share of UAVs whose serving BS has a positive tilt.
    pub uav_uptilt_share: f64,
}

impl PooledEval {
    pub fn role(&self, b: usize) -> (CellRole, bool) {
        match (self.served_gue[b], self.served_uav[b]) {
            (0, 0) => (CellRole::Off, false),
            (_, 0) => (CellRole::Ground, false),
            (g, _) => (CellRole::Aerial, g > 0),
        }
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn evaluate_pooled(net: &Network<f64>, x: &NetworkSetting<f64>, lambda: f64, seeds: &[u64]) -> Result<PooledEval> {
    let reports = seeds
        .par_iter()
        .map(|&s| net.evaluate(x, lambda, s))
        .collect::<Result<Vec<_>>>()?;
    let n_bs = net.n_bs();
    let mut out = PooledEval {
        seeds: seeds.to_vec(),
        gue_sinr_db: Vec::new(),
        uav_sinr_db: Vec::new(),
        mean_gue_db: 0.0,
        mean_uav_db: 0.0,
        objective: 0.0,
        served_gue: vec![0; n_bs],
        served_uav: vec![0; n_bs],
        uav_uptilt_share: 0.0,
    };
    let mut uav_up = 0usize;
    for r in &reports {
        let n_gue = r.sinr_db_per_gue.len();
        for (k, &b) in r.serving_bs.iter().enumerate() {
            if k < n_gue {
                out.served_gue[b] += 1;
            } else {
                out.served_uav[b] += 1;
                if x.tilts_deg[b] > 0.0 {
                    uav_up += 1;
                }
            }
        }
        out.gue_sinr_db.extend_from_slice(&r.sinr_db_per_gue);
        out.uav_sinr_db.extend_from_slice(&r.sinr_db_per_uav);
    }
    out.mean_gue_db = mean(&out.gue_sinr_db);
    out.mean_uav_db = mean(&out.uav_sinr_db);
    out.objective = lambda * out.mean_uav_db + (1.0 - lambda) * out.mean_gue_db;
    out.uav_uptilt_share = uav_up as f64 / out.uav_sinr_db.len().max(1) as f64;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellEntry {
    /// 1-based.
    pub bs: usize,
    pub site: usize,
    pub sector: usize,
    pub tilt_deg: f64,
    pub power_dbm: f64,
    pub role: CellRole,
    pub mixed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestConfig {
    pub lambda: f64,
    pub seed: u64,
    /// Evaluation seed of the observation that made this setting the best.
    pub best_seed: Option<u64>,
    pub best_observed: Option<f64>,
    pub cells: Vec<CellEntry>,
}

impl BestConfig {
    fn build(net: &Network<f64>, x: &NetworkSetting<f64>, pooled: &PooledEval, spec: &RunSpec) -> Self {
        let cells = net
            .layout
            .bs_list
            .iter()
            .enumerate()
            .map(|(b, bs)| {
                let (role, mixed) = pooled.role(b);
                CellEntry {
                    bs: b + 1,
                    site: bs.site,
                    sector: bs.sector,
                    tilt_deg: x.tilts_deg[b],
                    power_dbm: x.powers_dbm[b],
                    role,
                    mixed,
                }
            })
            .collect();
        Self {
            lambda: spec.lambda,
            seed: spec.seed,
            best_seed: None,
            best_observed: None,
            cells,
        }
    }

    pub fn setting(&self) -> NetworkSetting<f64> {
        NetworkSetting {
            tilts_deg: self.cells.iter().map(|c| c.tilt_deg).collect(),
            powers_dbm: self.cells.iter().map(|c| c.power_dbm).collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|_| Error::MissingArtifact(path.display().to_string()))?;
        serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.display().to_string(),
            reason: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mode: Mode,
    pub lambda: f64,
    pub seed: u64,
    pub eval_seeds: Vec<u64>,
    pub mean_sinr_gue_db: f64,
    pub mean_sinr_uav_db: f64,
    pub objective: f64,
    pub uptilted_bs: usize,
    pub downtilted_bs: usize,
    pub off_bs: usize,
    pub uav_uptilt_share: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimization: Option<OptimizationStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationStats {
    pub iterations: usize,
    pub termination: Termination,
    pub ei_variant: corridor_bo::bo::EiVariant,
    pub initial_objective: f64,
    pub best_observed: f64,
    pub best_seed: u64,
    /// Best observed objective after [`EARLY_ITERATION`] iterations.
    pub best_at_early_iteration: Option<f64>,
}

impl Summary {
    fn build(mode: Mode, spec: &RunSpec, x: &NetworkSetting<f64>, pooled: &PooledEval) -> Self {
        let n_bs = x.tilts_deg.len();
        Self {
            mode,
            lambda: spec.lambda,
            seed: spec.seed,
            eval_seeds: pooled.seeds.clone(),
            mean_sinr_gue_db: pooled.mean_gue_db,
            mean_sinr_uav_db: pooled.mean_uav_db,
            objective: pooled.objective,
            uptilted_bs: x.tilts_deg.iter().filter(|&&t| t > 0.0).count(),
            downtilted_bs: x.tilts_deg.iter().filter(|&&t| t < 0.0).count(),
            off_bs: (0..n_bs).filter(|&b| pooled.role(b).0 == CellRole::Off).count(),
            uav_uptilt_share: pooled.uav_uptilt_share,
            optimization: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|_| Error::MissingArtifact(path.display().to_string()))?;
        serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.display().to_string(),
            reason: e.to_string(),
        })
    }
}

/// Writes via a temporary sibling and a rename.
fn write_file<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
{
    let tmp = path.with_extension("tmp");
    let mut w = BufWriter::new(fs::File::create(&tmp)?);
    body(&mut w)?;
    w.flush()?;
    drop(w);
    fs::rename(&tmp, path)?;
    Ok(())
}

fn write_json<S: Serialize>(path: &Path, v: &S) -> Result<()> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, v)?;
        writeln!(w)
    })
}

/// Rows `population,rank,sinr_db,cdf`, sorted ascending per population.
pub fn write_cdf_csv<W: Write>(pooled: &PooledEval, mut w: W) -> std::io::Result<()> {
    writeln!(w, "population,rank,sinr_db,cdf")?;
    for (name, vals) in [("gue", &pooled.gue_sinr_db), ("uav", &pooled.uav_sinr_db)] {
        let mut v = vals.clone();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        for (i, s) in v.iter().enumerate() {
            writeln!(w, "{name},{},{s:.6},{:.6}", i + 1, (i + 1) as f64 / n)?;
        }
    }
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    spec: serde_json::Value,
    state: StateBlob<f64>,
}

fn save_checkpoint(dir: &Path, spec: &RunSpec, st: &BoState<f64>) -> Result<()> {
    write_file(&dir.join("dataset.csv"), |w| st.dataset.write_csv(w))?;
    write_json(
        &dir.join("state.json"),
        &Checkpoint {
            spec: spec.fingerprint(),
            state: st.to_blob(),
        },
    )
}

fn load_checkpoint(dir: &Path, spec: &RunSpec, bo: &BayesOpt<'_, f64>) -> Result<Option<BoState<f64>>> {
    let path = dir.join("state.json");
    if !path.exists() {
        return Ok(None);
    }
    let ck: Checkpoint = serde_json::from_str(&fs::read_to_string(&path)?).map_err(|e| Error::Format {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    if ck.spec != spec.fingerprint() {
        return Err(Error::Config(format!(
            "checkpoint in {} was written for a different configuration",
            dir.display()
        )));
    }
    let (lower, upper) = bo.bounds();
    let ds = ObservationDataset::load_csv(&dir.join("dataset.csv"), lower, upper)?;
    Ok(Some(BoState::from_blob(ck.state, ds)))
}

/// Outcome of a command, for the exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub summary: Summary,
    pub output_dir: PathBuf,
}

fn network(spec: &RunSpec) -> Result<Network<f64>> {
    Network::new(spec.scenario.clone())
}

/// Runs the optimizer and writes every artifact. With `resume`, continues
/// from a checkpoint in the output directory if one exists.
pub fn run_optimize(spec: &RunSpec, resume: bool) -> Result<RunResult> {
    let dir = &spec.output_dir;
    ensure_dir(dir)?;
    let net = network(spec)?;
    let bo = BayesOpt::new(&net, spec.lambda, spec.bo.clone(), spec.seed)?;
    let start = if resume { load_checkpoint(dir, spec, &bo)? } else { None };
    let first_new = start.as_ref().map_or(0, |s| s.iteration);
    let n_bs = net.n_bs();
    let mut ck_err = None;
    let (out, st) = bo.run_from(start, |st| {
        if st.iteration % n_bs == 0 && ck_err.is_none() {
            ck_err = save_checkpoint(dir, spec, st).err();
        }
    })?;
    if let Some(e) = ck_err {
        return Err(e);
    }
    save_checkpoint(dir, spec, &st)?;

    write_file(&dir.join("trace.csv"), |w| write_trace_csv(&out.trace, w))?;
    write_file(&dir.join("timing.csv"), |w| {
        writeln!(w, "n,wall_time_s")?;
        for (i, t) in out.wall_time_s.iter().enumerate() {
            writeln!(w, "{},{t:.3}", first_new + i + 1)?;
        }
        Ok(())
    })?;

    let pooled = evaluate_pooled(&net, &out.best_x, spec.lambda, &final_seeds(spec.seed))?;
    let mut best = BestConfig::build(&net, &out.best_x, &pooled, spec);
    best.best_seed = Some(out.best_seed);
    best.best_observed = Some(out.best_observed);
    write_json(&dir.join("best_config.json"), &best)?;
    write_file(&dir.join("sinr_cdf.csv"), |w| write_cdf_csv(&pooled, w))?;

    let mut summary = Summary::build(Mode::Optimize, spec, &out.best_x, &pooled);
    summary.optimization = Some(OptimizationStats {
        iterations: out.trace.len(),
        termination: out.termination,
        ei_variant: spec.bo.ei_variant,
        initial_objective: bo.initial_value()?,
        best_observed: out.best_observed,
        best_seed: out.best_seed,
        best_at_early_iteration: out.trace.get(EARLY_ITERATION - 1).map(|r| r.best),
    });
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(RunResult {
        summary,
        output_dir: dir.clone(),
    })
}

pub fn baseline_setting(n_bs: usize) -> NetworkSetting<f64> {
    NetworkSetting::uniform(n_bs, BASELINE_TILT_DEG, BASELINE_POWER_DBM)
}

/// Scores the all-downtilt, full-power network on the final-evaluation drops.
pub fn run_baseline(spec: &RunSpec) -> Result<RunResult> {
    let dir = &spec.output_dir;
    ensure_dir(dir)?;
    let net = network(spec)?;
    let x = baseline_setting(net.n_bs());
    let pooled = evaluate_pooled(&net, &x, spec.lambda, &final_seeds(spec.seed))?;
    write_json(&dir.join("best_config.json"), &BestConfig::build(&net, &x, &pooled, spec))?;
    write_file(&dir.join("sinr_cdf.csv"), |w| write_cdf_csv(&pooled, w))?;
    let summary = Summary::build(Mode::Baseline, spec, &x, &pooled);
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(RunResult {
        summary,
        output_dir: dir.clone(),
    })
}

/// Re-scores a stored `best_config.json` on the drops derived from the
/// spec's seed. The file's mixing ratio is used unless `lambda` is given.
pub fn run_eval(spec: &RunSpec, config: &Path, lambda: Option<f64>) -> Result<RunResult> {
    let dir = &spec.output_dir;
    ensure_dir(dir)?;
    let net = network(spec)?;
    let stored = BestConfig::load(config)?;
    if stored.cells.len() != net.n_bs() {
        return Err(Error::Format {
            path: config.display().to_string(),
            reason: format!("{} cells, scenario has {}", stored.cells.len(), net.n_bs()),
        });
    }
    let x = stored.setting();
    x.validate(&net.cfg)?;
    let mut spec = spec.clone();
    spec.lambda = lambda.unwrap_or(stored.lambda);
    spec.validate()?;
    let pooled = evaluate_pooled(&net, &x, spec.lambda, &final_seeds(spec.seed))?;
    write_file(&dir.join("eval_sinr_cdf.csv"), |w| write_cdf_csv(&pooled, w))?;
    let summary = Summary::build(Mode::Eval, &spec, &x, &pooled);
    write_json(&dir.join("eval_summary.json"), &summary)?;
    Ok(RunResult {
        summary,
        output_dir: dir.clone(),
    })
}
