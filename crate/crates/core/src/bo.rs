//! Per-BS round-robin Bayesian optimization of tilts and powers.
//!
//! Each iteration picks the next BS in turn, draws random `(tilt, power)`
//! pairs for it on top of the current setting, scores them by expected
//! improvement under the GP surrogate, moves the current setting to the best
//! candidate, observes the objective with a fresh seed, and refits the GP.
//! The run stops once `l_max` consecutive full passes over all BSs leave the
//! best observed objective unchanged.

use std::io::Write;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{fit, FitSettings, GpHyper, GpModel, ObservationDataset};
use crate::netsim::{Network, NetworkSetting};
use crate::rng::{derive_seed, stream};
use crate::scalar::{norm_cdf, norm_pdf, Real};

/// Seed tags for [`derive_seed`].
pub mod tags {
    pub const INIT_POINT: u64 = 1;
    pub const INIT_EVAL: u64 = 2;
    pub const CANDIDATES: u64 = 3;
    pub const EVAL: u64 = 4;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EiVariant {
    /// Spread term uses the posterior variance, in both the scale and the
    /// standardization of the improvement.
    #[default]
    Paper,
    /// Spread term uses the posterior standard deviation.
    Textbook,
}

impl std::str::FromStr for EiVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Self::Paper),
            "textbook" => Ok(Self::Textbook),
            other => Err(Error::Config(format!("unknown EI variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoSettings<T> {
    pub n_candidates: usize,
    pub batch_size: usize,
    pub xi: T,
    pub l_max: usize,
    pub n_initial: usize,
    pub max_iterations: usize,
    pub ei_variant: EiVariant,
}

impl<T: Real> Default for BoSettings<T> {
    fn default() -> Self {
        Self {
            n_candidates: 500,
            batch_size: 50,
            xi: T::c(0.01),
            l_max: 3,
            n_initial: 10,
            max_iterations: 2000,
            ei_variant: EiVariant::Paper,
        }
    }
}

impl<T: Real> BoSettings<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.batch_size == 0 || self.n_candidates == 0 || !self.n_candidates.is_multiple_of(self.batch_size) {
            return bad("n_candidates must be a positive multiple of batch_size");
        }
        if !(self.xi >= T::zero() && self.xi < T::one()) {
            return bad("xi must lie in [0, 1)");
        }
        if self.l_max < 1 {
            return bad("l_max must be at least 1");
        }
        if self.n_initial < 2 {
            return bad("n_initial must be at least 2 for the first hyperparameter fit");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        Ok(())
    }
}

/// 1-based BS considered at 1-based iteration `n`.
pub fn bs_index(n: usize, n_bs: usize) -> usize {
    assert!(n >= 1 && n_bs >= 1);
    (n - 1) % n_bs + 1
}

/// Expected-improvement score of a candidate with posterior `(mu, var)`
/// against the incumbent `f_hat_star`.
pub fn expected_improvement<T: Real>(mu: T, var: T, f_hat_star: T, xi: T, variant: EiVariant) -> T {
    let a = mu - f_hat_star - xi;
    if !(var > T::zero()) {
        return a.max(T::zero());
    }
    let s = match variant {
        EiVariant::Paper => var,
        EiVariant::Textbook => var.sqrt(),
    };
    let delta = a / s;
    (a * norm_cdf(delta) + s * norm_pdf(delta)).max(T::zero())
}

/// `n_candidates` copies of `x_cur` with BS `b`'s (0-based) tilt and power
/// redrawn uniformly from their boxes, in batches of `batch_size`.
pub fn propose_candidates<T: Real, R: Rng + ?Sized>(
    x_cur: &[T],
    b: usize,
    tilt_range: [T; 2],
    power_range: [T; 2],
    settings: &BoSettings<T>,
    rng: &mut R,
) -> Vec<Vec<Vec<T>>> {
    let n_bs = x_cur.len() / 2;
    let n_batches = settings.n_candidates / settings.batch_size;
    (0..n_batches)
        .map(|_| {
            (0..settings.batch_size)
                .map(|_| {
                    let mut c = x_cur.to_vec();
                    c[b] = T::sample_range(rng, tilt_range[0], tilt_range[1]);
                    c[n_bs + b] = T::sample_range(rng, power_range[0], power_range[1]);
                    c
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection<T> {
    /// Flat index of the chosen candidate.
    pub index: usize,
    pub f_hat_star: T,
    pub means: Vec<T>,
    pub vars: Vec<T>,
    pub scores: Vec<T>,
}

/// Scores every candidate batch and returns the EI argmax (lowest index on
/// ties). The incumbent is the highest posterior mean among the candidates.
pub fn select_query<T: Real>(
    batches: &[Vec<Vec<T>>],
    model: &GpModel<T>,
    xi: T,
    variant: EiVariant,
) -> Selection<T> {
    let post: Vec<(T, T)> = batches.iter().flat_map(|b| model.posterior_batch(b)).collect();
    let (means, vars): (Vec<T>, Vec<T>) = post.into_iter().unzip();
    assert!(!means.is_empty(), "no candidates");
    let f_hat_star = means.iter().copied().fold(T::neg_infinity(), T::max);
    let scores: Vec<T> = means
        .iter()
        .zip(&vars)
        .map(|(&m, &v)| expected_improvement(m, v, f_hat_star, xi, variant))
        .collect();
    let mut index = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[index] {
            index = i;
        }
    }
    Selection {
        index,
        f_hat_star,
        means,
        vars,
        scores,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow<T> {
    pub n: usize,
    /// 1-based BS index.
    pub bs: usize,
    pub tilt_deg: T,
    pub power_dbm: T,
    pub value: T,
    pub best: T,
    pub eval_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// `l_max` consecutive passes without improvement.
    Converged,
    IterationCap,
}

/// Complete resumable optimizer state.
#[derive(Debug, Clone)]
pub struct BoState<T> {
    /// Last completed iteration.
    pub iteration: usize,
    pub current_x: NetworkSetting<T>,
    /// Running best observation during the loop phase.
    pub best_observed: T,
    pub best_x: NetworkSetting<T>,
    pub best_seed: u64,
    /// Best observation at the end of the last improving pass.
    pub loop_best: T,
    /// Consecutive passes without improvement.
    pub stall_loops: usize,
    pub dataset: ObservationDataset<T>,
    pub hyper: GpHyper<T>,
    pub trace: Vec<TraceRow<T>>,
    pub termination: Option<Termination>,
}

/// JSON part of a checkpoint; the dataset travels as CSV next to it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct StateBlob<T> {
    pub iteration: usize,
    pub current_x: NetworkSetting<T>,
    pub best_observed: Option<T>,
    pub best_x: NetworkSetting<T>,
    pub best_seed: u64,
    pub loop_best: Option<T>,
    pub stall_loops: usize,
    pub hyper: GpHyper<T>,
    pub trace: Vec<TraceRow<T>>,
    pub termination: Option<Termination>,
}

fn finite<T: Real>(v: T) -> Option<T> {
    v.is_finite().then_some(v)
}

impl<T: Real> BoState<T> {
    pub fn to_blob(&self) -> StateBlob<T> {
        StateBlob {
            iteration: self.iteration,
            current_x: self.current_x.clone(),
            best_observed: finite(self.best_observed),
            best_x: self.best_x.clone(),
            best_seed: self.best_seed,
            loop_best: finite(self.loop_best),
            stall_loops: self.stall_loops,
            hyper: self.hyper,
            trace: self.trace.clone(),
            termination: self.termination,
        }
    }

    pub fn from_blob(blob: StateBlob<T>, dataset: ObservationDataset<T>) -> Self {
        Self {
            iteration: blob.iteration,
            current_x: blob.current_x,
            best_observed: blob.best_observed.unwrap_or(T::neg_infinity()),
            best_x: blob.best_x,
            best_seed: blob.best_seed,
            loop_best: blob.loop_best.unwrap_or(T::neg_infinity()),
            stall_loops: blob.stall_loops,
            dataset,
            hyper: blob.hyper,
            trace: blob.trace,
            termination: blob.termination,
        }
    }
}

/// Writes the trace as `n,bs,tilt_deg,power_dbm,value_db,best_db`.
pub fn write_trace_csv<T: Real, W: Write>(trace: &[TraceRow<T>], mut w: W) -> std::io::Result<()> {
    writeln!(w, "n,bs,tilt_deg,power_dbm,value_db,best_db")?;
    for r in trace {
        writeln!(
            w,
            "{},{},{:.6},{:.6},{:.6},{:.6}",
            r.n,
            r.bs,
            r.tilt_deg.as_f64(),
            r.power_dbm.as_f64(),
            r.value.as_f64(),
            r.best.as_f64()
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct RunOutcome<T> {
    pub best_x: NetworkSetting<T>,
    pub best_observed: T,
    pub best_seed: u64,
    pub trace: Vec<TraceRow<T>>,
    pub termination: Termination,
    /// Wall-clock seconds at the end of each iteration, from the start of
    /// [`BayesOpt::run`]. Not part of the deterministic outputs.
    pub wall_time_s: Vec<f64>,
}

/// Optimizer bound to a network, a mixing ratio and a run seed.
pub struct BayesOpt<'a, T> {
    pub net: &'a Network<T>,
    pub lambda: T,
    pub settings: BoSettings<T>,
    pub fit: FitSettings<T>,
    pub seed: u64,
}

impl<'a, T: Real> BayesOpt<'a, T> {
    pub fn new(net: &'a Network<T>, lambda: T, settings: BoSettings<T>, seed: u64) -> Result<Self> {
        settings.validate()?;
        if !(lambda >= T::zero() && lambda <= T::one()) {
            return Err(Error::Config(format!("lambda {lambda} outside [0, 1]")));
        }
        Ok(Self {
            net,
            lambda,
            settings,
            fit: FitSettings::default(),
            seed,
        })
    }

    fn n_bs(&self) -> usize {
        self.net.n_bs()
    }

    fn tilt_range(&self) -> [T; 2] {
        self.net.cfg.tilt_range_deg
    }

    fn power_range(&self) -> [T; 2] {
        [self.net.cfg.min_power_dbm, self.net.cfg.max_power_dbm]
    }

    /// Input box of the stacked decision vector.
    pub fn bounds(&self) -> (Vec<T>, Vec<T>) {
        let n = self.n_bs();
        let (t, p) = (self.tilt_range(), self.power_range());
        let lower = std::iter::repeat_n(t[0], n).chain(std::iter::repeat_n(p[0], n)).collect();
        let upper = std::iter::repeat_n(t[1], n).chain(std::iter::repeat_n(p[1], n)).collect();
        (lower, upper)
    }

    fn observe(&self, x: &NetworkSetting<T>, seed: u64) -> Result<T> {
        Ok(self.net.evaluate(x, self.lambda, seed)?.objective_value)
    }

    /// Objective of the all-zero-tilt, full-power starting setting, observed
    /// with the seed reserved for iteration 0.
    pub fn initial_value(&self) -> Result<T> {
        let x0 = NetworkSetting::uniform(self.n_bs(), T::zero(), self.power_range()[1]);
        self.observe(&x0, derive_seed(self.seed, tags::EVAL, 0))
    }

    /// Evaluates `n_initial` random settings, fits the first GP, and sets the
    /// current setting to all-zero tilts at full power.
    pub fn initialize(&self) -> Result<BoState<T>> {
        let (lower, upper) = self.bounds();
        let mut dataset = ObservationDataset::new(lower, upper)?;
        let n_bs = self.n_bs();
        let (t, p) = (self.tilt_range(), self.power_range());
        for i in 0..self.settings.n_initial as u64 {
            let mut rng = stream(derive_seed(self.seed, tags::INIT_POINT, i), 0);
            let x = NetworkSetting {
                tilts_deg: (0..n_bs).map(|_| T::sample_range(&mut rng, t[0], t[1])).collect(),
                powers_dbm: (0..n_bs).map(|_| T::sample_range(&mut rng, p[0], p[1])).collect(),
            };
            let y = self.observe(&x, derive_seed(self.seed, tags::INIT_EVAL, i))?;
            dataset.push(x.to_vector(), y)?;
        }
        let hyper = fit(&dataset, &self.fit, None)?;
        let x0 = NetworkSetting::uniform(n_bs, T::zero(), p[1]);
        Ok(BoState {
            iteration: 0,
            best_x: x0.clone(),
            current_x: x0,
            best_observed: T::neg_infinity(),
            best_seed: 0,
            loop_best: T::neg_infinity(),
            stall_loops: 0,
            dataset,
            hyper,
            trace: Vec::new(),
            termination: None,
        })
    }

    /// Runs one iteration. Returns the termination reason once the run ends.
    pub fn step(&self, st: &mut BoState<T>) -> Result<Option<Termination>> {
        if let Some(t) = st.termination {
            return Ok(Some(t));
        }
        let n = st.iteration + 1;
        let n_bs = self.n_bs();
        let b = bs_index(n, n_bs) - 1;

        let model = GpModel::new(&st.dataset, st.hyper, &self.fit)?;
        let mut rng = stream(derive_seed(self.seed, tags::CANDIDATES, n as u64), 0);
        let x_cur = st.current_x.to_vector();
        let batches = propose_candidates(
            &x_cur,
            b,
            self.tilt_range(),
            self.power_range(),
            &self.settings,
            &mut rng,
        );
        let sel = select_query(&batches, &model, self.settings.xi, self.settings.ei_variant);
        let chosen = &batches[sel.index / self.settings.batch_size][sel.index % self.settings.batch_size];

        let x_n = NetworkSetting::from_vector(chosen)?;
        let eval_seed = derive_seed(self.seed, tags::EVAL, n as u64);
        let f_n = self.observe(&x_n, eval_seed)?;
        st.dataset.push(chosen.clone(), f_n)?;
        // a failed refit keeps the previous hyperparameters
        if let Ok(h) = fit(&st.dataset, &self.fit, Some(&st.hyper)) {
            st.hyper = h;
        }

        if f_n > st.best_observed {
            st.best_observed = f_n;
            st.best_x = x_n.clone();
            st.best_seed = eval_seed;
        }
        st.trace.push(TraceRow {
            n,
            bs: b + 1,
            tilt_deg: x_n.tilts_deg[b],
            power_dbm: x_n.powers_dbm[b],
            value: f_n,
            best: st.best_observed,
            eval_seed,
        });
        st.current_x = x_n;
        st.iteration = n;

        if b + 1 == n_bs {
            if st.best_observed > st.loop_best {
                st.loop_best = st.best_observed;
                st.stall_loops = 0;
            } else {
                st.stall_loops += 1;
            }
            if st.stall_loops >= self.settings.l_max {
                st.termination = Some(Termination::Converged);
            }
        }
        if st.termination.is_none() && n >= self.settings.max_iterations {
            st.termination = Some(Termination::IterationCap);
        }
        Ok(st.termination)
    }

    /// Runs from `state` (or a fresh initialization) to termination, calling
    /// `on_iter` after every iteration.
    pub fn run_from<F: FnMut(&BoState<T>)>(
        &self,
        state: Option<BoState<T>>,
        mut on_iter: F,
    ) -> Result<(RunOutcome<T>, BoState<T>)> {
        let start = Instant::now();
        let mut st = match state {
            Some(s) => s,
            None => self.initialize()?,
        };
        let mut wall = Vec::new();
        let termination = loop {
            let t = self.step(&mut st)?;
            wall.push(start.elapsed().as_secs_f64());
            on_iter(&st);
            if let Some(t) = t {
                break t;
            }
        };
        Ok((
            RunOutcome {
                best_x: st.best_x.clone(),
                best_observed: st.best_observed,
                best_seed: st.best_seed,
                trace: st.trace.clone(),
                termination,
                wall_time_s: wall,
            },
            st,
        ))
    }

    pub fn run(&self) -> Result<RunOutcome<T>> {
        Ok(self.run_from(None, |_| {})?.0)
    }
}
