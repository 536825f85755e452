//! Hexagonal 19-site deployment with wrap-around, and stochastic user drops.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Real;

/// An aerial corridor: a horizontal rectangle flown at constant height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Corridor<T> {
    pub x_range: [T; 2],
    pub y_range: [T; 2],
    pub height_m: T,
}

impl<T: Real> Corridor<T> {
    pub fn contains(&self, p: &[T; 3]) -> bool {
        p[0] >= self.x_range[0]
            && p[0] <= self.x_range[1]
            && p[1] >= self.y_range[0]
            && p[1] <= self.y_range[1]
            && p[2] == self.height_m
    }
}

/// Deployment, channel, user and noise parameters of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig<T> {
    pub isd_m: T,
    pub n_sites: usize,
    pub bs_height_m: T,
    pub sectors_per_site: usize,
    pub carrier_ghz: T,
    pub bandwidth_hz: T,
    pub max_power_dbm: T,
    pub min_power_dbm: T,
    pub noise_psd_dbm_hz: T,
    pub noise_figure_db: T,
    pub gue_height_m: T,
    pub mean_gues_per_sector: usize,
    pub mean_uavs_per_corridor: usize,
    pub corridors: Vec<Corridor<T>>,
    pub hpbw_vert_deg: T,
    pub hpbw_horiz_deg: T,
    pub max_antenna_gain_dbi: T,
    pub tilt_range_deg: [T; 2],
}

impl<T: Real> Default for ScenarioConfig<T> {
    fn default() -> Self {
        let c = T::c;
        let corridor = |x: [f64; 2], y: [f64; 2], h: f64| Corridor {
            x_range: [c(x[0]), c(x[1])],
            y_range: [c(y[0]), c(y[1])],
            height_m: c(h),
        };
        Self {
            isd_m: c(500.0),
            n_sites: 19,
            bs_height_m: c(25.0),
            sectors_per_site: 3,
            carrier_ghz: c(2.0),
            bandwidth_hz: c(1.0e7),
            max_power_dbm: c(46.0),
            min_power_dbm: c(6.0),
            noise_psd_dbm_hz: c(-174.0),
            noise_figure_db: c(9.0),
            gue_height_m: c(1.5),
            mean_gues_per_sector: 15,
            mean_uavs_per_corridor: 50,
            corridors: vec![
                corridor([-650.0, -610.0], [-780.0, 780.0], 150.0),
                corridor([-780.0, 780.0], [-650.0, -610.0], 120.0),
                corridor([-780.0, 780.0], [610.0, 650.0], 120.0),
                corridor([610.0, 650.0], [-780.0, 780.0], 150.0),
            ],
            hpbw_vert_deg: c(10.0),
            hpbw_horiz_deg: c(65.0),
            max_antenna_gain_dbi: c(8.0),
            tilt_range_deg: [c(-90.0), c(90.0)],
        }
    }
}

impl<T: Real> ScenarioConfig<T> {
    pub fn n_bs(&self) -> usize {
        self.n_sites * self.sectors_per_site
    }

    /// Thermal noise power over the full band, dBm.
    pub fn noise_power_dbm(&self) -> T {
        self.noise_psd_dbm_hz + self.bandwidth_hz.to_db() + self.noise_figure_db
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.isd_m > T::zero()) {
            return bad("isd_m must be positive");
        }
        if self.n_sites != 19 {
            return bad("only the 19-site layout is supported (n_sites = 19)");
        }
        if self.sectors_per_site != 3 {
            return bad("sectors_per_site must be 3");
        }
        if !(self.min_power_dbm < self.max_power_dbm) {
            return bad("min_power_dbm must be below max_power_dbm");
        }
        if self.tilt_range_deg[0] != -self.tilt_range_deg[1] || !(self.tilt_range_deg[1] > T::zero())
        {
            return bad("tilt_range_deg must be symmetric about 0");
        }
        if self.corridors.len() != 4 {
            return bad("exactly four corridors are required");
        }
        for c in &self.corridors {
            if !(c.x_range[0] < c.x_range[1] && c.y_range[0] < c.y_range[1]) {
                return bad("corridor ranges must be increasing");
            }
            if c.height_m < T::c(100.0) || c.height_m > T::c(300.0) {
                return bad("corridor heights must lie in the aerial model range [100, 300] m");
            }
        }
        if !(self.gue_height_m > T::zero() && self.gue_height_m < T::c(13.0)) {
            return bad("gue_height_m must lie in (0, 13) m");
        }
        if !(self.bandwidth_hz > T::zero() && self.carrier_ghz > T::zero()) {
            return bad("bandwidth and carrier must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaseStation<T> {
    pub site: usize,
    pub sector: usize,
    /// Boresight azimuth, degrees counter-clockwise from +x.
    pub azimuth_deg: T,
    pub position: [T; 2],
    pub height_m: T,
}

#[derive(Debug, Clone)]
pub struct Layout<T> {
    pub site_positions: Vec<[T; 2]>,
    pub bs_list: Vec<BaseStation<T>>,
    /// Cluster translations; index 0 is the zero vector.
    pub wrap_shifts: [[T; 2]; 7],
    pub isd_m: T,
}

/// Sector boresights shared by every site.
pub const SECTOR_AZIMUTHS_DEG: [f64; 3] = [30.0, 150.0, 270.0];

fn rot<T: Real>(v: [T; 2], deg: f64) -> [T; 2] {
    let (s, c) = deg.to_radians().sin_cos();
    let (s, c) = (T::c(s), T::c(c));
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

/// Builds the origin-centred 19-site layout.
///
/// Site lattice basis vectors point at 30° and 90°, so the site hexagons are
/// flat-topped. Sites are ordered centre, first ring, second ring, each ring
/// by increasing polar angle; BS `3·site + sector` has boresight
/// `SECTOR_AZIMUTHS_DEG[sector]`.
pub fn build_layout<T: Real>(cfg: &ScenarioConfig<T>) -> Result<Layout<T>> {
    cfg.validate()?;
    let isd = cfg.isd_m;
    let e1 = rot([isd, T::zero()], 30.0);
    let e2 = [T::zero(), isd];

    let mut sites = Vec::new();
    let lim = isd * T::c(2.0) * T::c(1.0 + 1e-9);
    for q in -2i32..=2 {
        for r in -2i32..=2 {
            let (qf, rf) = (T::c(q as f64), T::c(r as f64));
            let p = [qf * e1[0] + rf * e2[0], qf * e1[1] + rf * e2[1]];
            if p[0].hypot(p[1]) <= lim {
                sites.push(p);
            }
        }
    }
    debug_assert_eq!(sites.len(), 19);
    let ring_key = |p: &[T; 2]| {
        let d = (p[0].hypot(p[1]) / isd).as_f64();
        let ring = if d < 0.5 { 0 } else if d < 1.5 { 1 } else { 2 };
        let mut ang = p[1].as_f64().atan2(p[0].as_f64()).to_degrees();
        if ang < 0.0 {
            ang += 360.0;
        }
        (ring, ang)
    };
    sites.sort_by(|a, b| {
        let (ra, aa) = ring_key(a);
        let (rb, ab) = ring_key(b);
        ra.cmp(&rb).then(aa.total_cmp(&ab))
    });
    // exact zero for the centre site
    sites[0] = [T::zero(), T::zero()];

    let bs_list = sites
        .iter()
        .enumerate()
        .flat_map(|(site, &position)| {
            SECTOR_AZIMUTHS_DEG
                .iter()
                .enumerate()
                .map(move |(sector, &az)| BaseStation {
                    site,
                    sector,
                    azimuth_deg: T::c(az),
                    position,
                    height_m: cfg.bs_height_m,
                })
        })
        .collect();

    // 19 = 3² + 3·2 + 2²: the neighbouring cluster sits 3 steps along one
    // lattice axis and 2 along the next.
    let base = [
        T::c(3.0) * e1[0] + T::c(2.0) * e2[0],
        T::c(3.0) * e1[1] + T::c(2.0) * e2[1],
    ];
    let mut wrap_shifts = [[T::zero(); 2]; 7];
    for (k, s) in wrap_shifts.iter_mut().skip(1).enumerate() {
        *s = rot(base, 60.0 * k as f64);
    }

    Ok(Layout {
        site_positions: sites,
        bs_list,
        wrap_shifts,
        isd_m: isd,
    })
}

impl<T: Real> Layout<T> {
    pub fn n_bs(&self) -> usize {
        self.bs_list.len()
    }

    /// Circumradius of a site hexagon.
    pub fn hex_circumradius(&self) -> T {
        self.isd_m / T::c(3.0).sqrt()
    }

    /// Whether `p` lies in the union of the 19 site hexagons.
    ///
    /// A point belongs to the hexagon of its nearest lattice site; the seven
    /// cluster images cover the neighbourhood of the layout, so the point is
    /// inside iff its nearest image site is an unshifted one.
    pub fn in_service_region(&self, p: [T; 2]) -> bool {
        let mut best_inside = T::infinity();
        let mut best_outside = T::infinity();
        for (k, s) in self.wrap_shifts.iter().enumerate() {
            for site in &self.site_positions {
                let dx = p[0] - site[0] - s[0];
                let dy = p[1] - site[1] - s[1];
                let d2 = dx * dx + dy * dy;
                if k == 0 {
                    best_inside = best_inside.min(d2);
                } else {
                    best_outside = best_outside.min(d2);
                }
            }
        }
        best_inside <= best_outside
    }

    /// Axis-aligned bounding box of the service region: `[xmin, xmax, ymin, ymax]`.
    pub fn service_bbox(&self) -> [T; 4] {
        let r = self.hex_circumradius();
        let mut b = [T::infinity(), T::neg_infinity(), T::infinity(), T::neg_infinity()];
        for p in &self.site_positions {
            b[0] = b[0].min(p[0] - r);
            b[1] = b[1].max(p[0] + r);
            b[2] = b[2].min(p[1] - r);
            b[3] = b[3].max(p[1] + r);
        }
        b
    }
}

/// Wrap-corrected displacement `b' - a` and its 3-D length, where `b'` is
/// the cluster image of `b` horizontally closest to `a`.
pub fn wrap_displacement<T: Real>(a: [T; 3], b: [T; 3], layout: &Layout<T>) -> ([T; 3], T) {
    let mut best = [T::zero(); 3];
    let mut best_h2 = T::infinity();
    for s in &layout.wrap_shifts {
        let dx = b[0] + s[0] - a[0];
        let dy = b[1] + s[1] - a[1];
        let h2 = dx * dx + dy * dy;
        if h2 < best_h2 {
            best_h2 = h2;
            best = [dx, dy, b[2] - a[2]];
        }
    }
    let dist = (best_h2 + best[2] * best[2]).sqrt();
    (best, dist)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserDrop<T> {
    pub gue_positions: Vec<[T; 3]>,
    pub uav_positions: Vec<[T; 3]>,
    /// Corridor index of each UAV.
    pub uav_corridor: Vec<usize>,
    pub seed: u64,
}

impl<T> UserDrop<T> {
    pub fn n_ues(&self) -> usize {
        self.gue_positions.len() + self.uav_positions.len()
    }
}

/// Draws GUEs and UAVs from the [`rng::USERS`] stream of `seed`.
///
/// Counts are fixed at the configured means: `mean_gues_per_sector` per BS,
/// uniform over the service region by rejection from its bounding box, and
/// `mean_uavs_per_corridor` per corridor, uniform over each box.
pub fn drop_users<T: Real>(cfg: &ScenarioConfig<T>, layout: &Layout<T>, seed: u64) -> UserDrop<T> {
    let mut rng = rng::stream(seed, rng::USERS);
    let n_gue = cfg.mean_gues_per_sector * layout.n_bs();
    let bbox = layout.service_bbox();
    let mut gue_positions = Vec::with_capacity(n_gue);
    while gue_positions.len() < n_gue {
        let x = T::sample_range(&mut rng, bbox[0], bbox[1]);
        let y = T::sample_range(&mut rng, bbox[2], bbox[3]);
        if layout.in_service_region([x, y]) {
            gue_positions.push([x, y, cfg.gue_height_m]);
        }
    }

    let mut uav_positions = Vec::with_capacity(cfg.mean_uavs_per_corridor * cfg.corridors.len());
    let mut uav_corridor = Vec::with_capacity(uav_positions.capacity());
    for (ci, c) in cfg.corridors.iter().enumerate() {
        for _ in 0..cfg.mean_uavs_per_corridor {
            let x = T::sample_range(&mut rng, c.x_range[0], c.x_range[1]);
            let y = T::sample_range(&mut rng, c.y_range[0], c.y_range[1]);
            uav_positions.push([x, y, c.height_m]);
            uav_corridor.push(ci);
        }
    }
    UserDrop {
        gue_positions,
        uav_positions,
        uav_corridor,
        seed,
    }
}

/// Uniform point in the service region; shared by tests and tools that need
/// region samples without a full drop.
pub fn sample_service_point<T: Real, R: Rng + ?Sized>(layout: &Layout<T>, rng: &mut R) -> [T; 2] {
    let bbox = layout.service_bbox();
    loop {
        let x = T::sample_range(rng, bbox[0], bbox[1]);
        let y = T::sample_range(rng, bbox[2], bbox[3]);
        if layout.in_service_region([x, y]) {
            return [x, y];
        }
    }
}
