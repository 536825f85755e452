//! Downlink SINR, RSS association and the λ-weighted mean-SINR objective.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::channel::{
    los_state, path_loss_db, shadow_fading_db, small_scale_power, AntennaPattern, LinkGeometry,
    UeKind,
};
use crate::deploy::{build_layout, drop_users, Layout, ScenarioConfig, UserDrop};
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Real;

/// Per-BS electrical tilt (degrees) and transmit power (dBm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSetting<T> {
    pub tilts_deg: Vec<T>,
    pub powers_dbm: Vec<T>,
}

impl<T: Real> NetworkSetting<T> {
    pub fn uniform(n_bs: usize, tilt_deg: T, power_dbm: T) -> Self {
        Self {
            tilts_deg: vec![tilt_deg; n_bs],
            powers_dbm: vec![power_dbm; n_bs],
        }
    }

    pub fn n_bs(&self) -> usize {
        self.tilts_deg.len()
    }

    /// Stacked decision vector `[tilts, powers]`.
    pub fn to_vector(&self) -> Vec<T> {
        self.tilts_deg.iter().chain(&self.powers_dbm).copied().collect()
    }

    pub fn from_vector(v: &[T]) -> Result<Self> {
        if !v.len().is_multiple_of(2) {
            return Err(Error::InvalidInput(format!("odd decision vector length {}", v.len())));
        }
        let (t, p) = v.split_at(v.len() / 2);
        Ok(Self {
            tilts_deg: t.to_vec(),
            powers_dbm: p.to_vec(),
        })
    }

    pub fn validate(&self, cfg: &ScenarioConfig<T>) -> Result<()> {
        if self.tilts_deg.len() != cfg.n_bs() || self.powers_dbm.len() != cfg.n_bs() {
            return Err(Error::InvalidInput(format!(
                "setting has {}/{} entries, expected {}",
                self.tilts_deg.len(),
                self.powers_dbm.len(),
                cfg.n_bs()
            )));
        }
        let [tlo, thi] = cfg.tilt_range_deg;
        if let Some(t) = self.tilts_deg.iter().find(|t| !(**t >= tlo && **t <= thi)) {
            return Err(Error::InvalidInput(format!("tilt {t} outside [{tlo}, {thi}]")));
        }
        let (plo, phi) = (cfg.min_power_dbm, cfg.max_power_dbm);
        if let Some(p) = self.powers_dbm.iter().find(|p| !(**p >= plo && **p <= phi)) {
            return Err(Error::InvalidInput(format!("power {p} outside [{plo}, {phi}]")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellRole {
    Ground,
    Aerial,
    Off,
}

impl CellRole {
    pub fn as_str(self) -> &'static str {
        match self {
            CellRole::Ground => "ground",
            CellRole::Aerial => "aerial",
            CellRole::Off => "off",
        }
    }
}

/// The setting-independent part of one drop: users, geometry, path loss,
/// shadowing and small-scale fading for every BS–UE pair.
///
/// Link arrays are UE-major: entry `k * n_bs + b`. UEs are ordered GUEs
/// first, then UAVs.
#[derive(Debug, Clone)]
pub struct Realization<T> {
    pub drop: UserDrop<T>,
    pub n_bs: usize,
    pub kinds: Vec<UeKind>,
    pub azimuth_off_deg: Vec<T>,
    pub elevation_deg: Vec<T>,
    /// Path loss plus shadowing, dB.
    pub loss_db: Vec<T>,
    pub small_scale: Vec<T>,
}

impl<T: Real> Realization<T> {
    pub fn n_ues(&self) -> usize {
        self.kinds.len()
    }

    pub fn n_gue(&self) -> usize {
        self.drop.gue_positions.len()
    }

    pub fn position(&self, k: usize) -> [T; 3] {
        let g = self.n_gue();
        if k < g {
            self.drop.gue_positions[k]
        } else {
            self.drop.uav_positions[k - g]
        }
    }
}

/// Serving BS per UE: argmax of `p_b + G_{b,k}` (dB), lowest index on ties.
pub fn associate<T: Real>(gain_db: &[T], powers_dbm: &[T]) -> Vec<usize> {
    let n_bs = powers_dbm.len();
    gain_db
        .chunks_exact(n_bs)
        .map(|row| {
            let mut best = 0;
            let mut best_rss = T::neg_infinity();
            for (b, (&g, &p)) in row.iter().zip(powers_dbm).enumerate() {
                let rss = p + g;
                if rss > best_rss {
                    best_rss = rss;
                    best = b;
                }
            }
            best
        })
        .collect()
}

/// Downlink SINR of one UE in dB, given its row of large-scale gains (dB) and
/// small-scale powers, all BS powers (dBm) and the noise power (dBm).
pub fn sinr_db<T: Real>(
    serving: usize,
    gain_db_row: &[T],
    small_row: &[T],
    powers_dbm: &[T],
    noise_dbm: T,
) -> T {
    let mut signal = T::zero();
    let mut interference = T::zero();
    for (b, ((&g, &h), &p)) in gain_db_row.iter().zip(small_row).zip(powers_dbm).enumerate() {
        let rx = (p + g).from_db() * h;
        if b == serving {
            signal = rx;
        } else {
            interference = interference + rx;
        }
    }
    (signal / (interference + noise_dbm.from_db())).to_db()
}

/// Classifies each BS by the users it serves. A BS with at least one UAV is
/// aerial (and flagged as mixed if it also serves GUEs).
pub fn classify_cells(serving: &[usize], kinds: &[UeKind], n_bs: usize) -> (Vec<CellRole>, Vec<bool>) {
    let mut gues = vec![0usize; n_bs];
    let mut uavs = vec![0usize; n_bs];
    for (&b, &k) in serving.iter().zip(kinds) {
        match k {
            UeKind::Gue => gues[b] += 1,
            UeKind::Uav => uavs[b] += 1,
        }
    }
    let roles = (0..n_bs)
        .map(|b| match (gues[b], uavs[b]) {
            (_, u) if u > 0 => CellRole::Aerial,
            (g, _) if g > 0 => CellRole::Ground,
            _ => CellRole::Off,
        })
        .collect();
    let mixed = (0..n_bs).map(|b| gues[b] > 0 && uavs[b] > 0).collect();
    (roles, mixed)
}

/// λ-weighted combination of the per-population mean SINRs (dB domain).
pub fn weighted_objective<T: Real>(lambda: T, gue_sinr_db: &[T], uav_sinr_db: &[T]) -> T {
    let mean = |v: &[T]| {
        if v.is_empty() {
            T::zero()
        } else {
            v.iter().fold(T::zero(), |a, &b| a + b) / T::c(v.len() as f64)
        }
    };
    lambda * mean(uav_sinr_db) + (T::one() - lambda) * mean(gue_sinr_db)
}

#[derive(Debug, Clone)]
pub struct EvalReport<T> {
    pub sinr_db_per_gue: Vec<T>,
    pub sinr_db_per_uav: Vec<T>,
    /// Serving BS of each UE, GUEs first.
    pub serving_bs: Vec<usize>,
    pub objective_value: T,
    pub cell_roles: Vec<CellRole>,
    pub mixed_cells: Vec<bool>,
    pub lambda: T,
    pub seed: u64,
    pub gue_positions: Vec<[T; 3]>,
    pub uav_positions: Vec<[T; 3]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalSummary {
    pub seed: u64,
    pub lambda: f64,
    pub objective: f64,
    pub mean_sinr_gue_db: f64,
    pub mean_sinr_uav_db: f64,
    pub cell_roles: Vec<CellRole>,
    pub mixed_cells: Vec<usize>,
}

impl<T: Real> EvalReport<T> {
    pub fn mean_gue_db(&self) -> T {
        mean(&self.sinr_db_per_gue)
    }

    pub fn mean_uav_db(&self) -> T {
        mean(&self.sinr_db_per_uav)
    }

    /// Recomputes the objective from the stored per-UE vectors.
    pub fn recompute_objective(&self) -> T {
        weighted_objective(self.lambda, &self.sinr_db_per_gue, &self.sinr_db_per_uav)
    }

    pub fn summary(&self) -> EvalSummary {
        EvalSummary {
            seed: self.seed,
            lambda: self.lambda.as_f64(),
            objective: self.objective_value.as_f64(),
            mean_sinr_gue_db: self.mean_gue_db().as_f64(),
            mean_sinr_uav_db: self.mean_uav_db().as_f64(),
            cell_roles: self.cell_roles.clone(),
            mixed_cells: self
                .mixed_cells
                .iter()
                .enumerate()
                .filter_map(|(b, &m)| m.then_some(b))
                .collect(),
        }
    }

    /// One row per UE: `kind,x_m,y_m,z_m,serving_bs,sinr_db`. BS indices are 1-based.
    pub fn write_ue_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "kind,x_m,y_m,z_m,serving_bs,sinr_db")?;
        let rows = self
            .gue_positions
            .iter()
            .zip(&self.sinr_db_per_gue)
            .map(|(p, s)| (UeKind::Gue, p, s))
            .chain(
                self.uav_positions
                    .iter()
                    .zip(&self.sinr_db_per_uav)
                    .map(|(p, s)| (UeKind::Uav, p, s)),
            );
        for ((kind, p, s), b) in rows.zip(&self.serving_bs) {
            writeln!(
                w,
                "{},{:.3},{:.3},{:.3},{},{:.6}",
                kind.as_str(),
                p[0].as_f64(),
                p[1].as_f64(),
                p[2].as_f64(),
                b + 1,
                s.as_f64()
            )?;
        }
        Ok(())
    }
}

fn mean<T: Real>(v: &[T]) -> T {
    if v.is_empty() {
        return T::nan();
    }
    v.iter().fold(T::zero(), |a, &b| a + b) / T::c(v.len() as f64)
}

/// Scenario-bound simulator.
#[derive(Debug, Clone)]
pub struct Network<T> {
    pub cfg: ScenarioConfig<T>,
    pub layout: Layout<T>,
    pub pattern: AntennaPattern<T>,
    pub noise_dbm: T,
}

impl<T: Real> Network<T> {
    pub fn new(cfg: ScenarioConfig<T>) -> Result<Self> {
        let layout = build_layout(&cfg)?;
        let pattern = AntennaPattern::from_config(&cfg);
        let noise_dbm = cfg.noise_power_dbm();
        Ok(Self {
            cfg,
            layout,
            pattern,
            noise_dbm,
        })
    }

    pub fn n_bs(&self) -> usize {
        self.layout.n_bs()
    }

    /// Draws users and every link's random terms from `seed`.
    ///
    /// The channel stream is consumed UE by UE (GUEs then UAVs) and, within
    /// a UE, BS by BS: LoS draw, shadowing, small-scale power.
    pub fn realize(&self, seed: u64) -> Result<Realization<T>> {
        let drop = drop_users(&self.cfg, &self.layout, seed);
        let mut rng = rng::stream(seed, rng::CHANNEL);
        let n_bs = self.n_bs();
        let ues: Vec<([T; 3], UeKind)> = drop
            .gue_positions
            .iter()
            .map(|&p| (p, UeKind::Gue))
            .chain(drop.uav_positions.iter().map(|&p| (p, UeKind::Uav)))
            .collect();
        let n = ues.len() * n_bs;
        let mut azimuth_off_deg = Vec::with_capacity(n);
        let mut elevation_deg = Vec::with_capacity(n);
        let mut loss_db = Vec::with_capacity(n);
        let mut small_scale = Vec::with_capacity(n);
        for &(pos, kind) in &ues {
            for bs in &self.layout.bs_list {
                let g = LinkGeometry::new(bs, pos, kind, &self.layout);
                let los = los_state(&g, &mut rng)?;
                let pl = path_loss_db(&g, los, self.cfg.carrier_ghz)?;
                let sf = shadow_fading_db(los, kind, g.ue_height_m, &mut rng);
                azimuth_off_deg.push(g.azimuth_off_deg);
                elevation_deg.push(g.elevation_deg);
                loss_db.push(pl + sf);
                small_scale.push(small_scale_power(kind, &mut rng));
            }
        }
        Ok(Realization {
            kinds: ues.iter().map(|u| u.1).collect(),
            drop,
            n_bs,
            azimuth_off_deg,
            elevation_deg,
            loss_db,
            small_scale,
        })
    }

    /// Large-scale gain matrix `G` (dB, UE-major) under the tilts of `x`.
    pub fn gains_db(&self, real: &Realization<T>, x: &NetworkSetting<T>) -> Vec<T> {
        let n_bs = real.n_bs;
        (0..real.loss_db.len())
            .map(|i| {
                let b = i % n_bs;
                let a = self
                    .pattern
                    .gain_db(real.azimuth_off_deg[i], real.elevation_deg[i], x.tilts_deg[b]);
                -real.loss_db[i] + a
            })
            .collect()
    }

    /// Objective and per-UE metrics of `x` on a fixed realization.
    pub fn evaluate_realization(
        &self,
        x: &NetworkSetting<T>,
        lambda: T,
        real: &Realization<T>,
    ) -> Result<EvalReport<T>> {
        check_lambda(lambda)?;
        x.validate(&self.cfg)?;
        let n_bs = real.n_bs;
        let gains = self.gains_db(real, x);
        let serving = associate(&gains, &x.powers_dbm);
        let sinr: Vec<T> = serving
            .iter()
            .enumerate()
            .map(|(k, &b)| {
                let r = k * n_bs..(k + 1) * n_bs;
                sinr_db(b, &gains[r.clone()], &real.small_scale[r], &x.powers_dbm, self.noise_dbm)
            })
            .collect();
        let n_gue = real.n_gue();
        let (gue, uav) = sinr.split_at(n_gue);
        let (cell_roles, mixed_cells) = classify_cells(&serving, &real.kinds, n_bs);
        Ok(EvalReport {
            objective_value: weighted_objective(lambda, gue, uav),
            sinr_db_per_gue: gue.to_vec(),
            sinr_db_per_uav: uav.to_vec(),
            serving_bs: serving,
            cell_roles,
            mixed_cells,
            lambda,
            seed: real.drop.seed,
            gue_positions: real.drop.gue_positions.clone(),
            uav_positions: real.drop.uav_positions.clone(),
        })
    }

    /// One noisy objective sample: a fresh drop and channel from `seed`.
    pub fn evaluate(&self, x: &NetworkSetting<T>, lambda: T, seed: u64) -> Result<EvalReport<T>> {
        check_lambda(lambda)?;
        x.validate(&self.cfg)?;
        let real = self.realize(seed)?;
        self.evaluate_realization(x, lambda, &real)
    }
}

fn check_lambda<T: Real>(lambda: T) -> Result<()> {
    if lambda >= T::zero() && lambda <= T::one() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("lambda {lambda} outside [0, 1]")))
    }
}
