//! Large-scale propagation, the tilted sector antenna, and small-scale fading.
//!
//! Ground links follow the urban-macro LoS probability, dual-slope LoS path
//! loss and NLoS path loss at the 2 GHz carrier. Aerial links above 100 m
//! are always LoS and use the height-dependent aerial LoS path loss and
//! shadowing spread.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::deploy::{wrap_displacement, BaseStation, Layout, ScenarioConfig};
use crate::error::{Error, Result};
use crate::scalar::Real;

const SPEED_OF_LIGHT: f64 = 3.0e8;
/// Minimum horizontal distance fed to the path-loss formulas.
pub const MIN_D2D_M: f64 = 10.0;
/// Upper validity bound of the ground formulas.
pub const MAX_D2D_M: f64 = 5000.0;
/// Aerial model applies from this UE height upwards.
pub const AERIAL_MIN_HEIGHT_M: f64 = 100.0;
pub const AERIAL_MAX_HEIGHT_M: f64 = 300.0;
/// Ground formulas are used below this UE height.
pub const GROUND_MAX_HEIGHT_M: f64 = 13.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UeKind {
    Gue,
    Uav,
}

impl UeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            UeKind::Gue => "gue",
            UeKind::Uav => "uav",
        }
    }
}

/// Parabolic sector pattern with separable vertical and horizontal cuts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaPattern<T> {
    pub hpbw_vert_deg: T,
    pub hpbw_horiz_deg: T,
    pub max_gain_dbi: T,
    /// Front-to-back floor `A_m`, dB.
    pub max_attenuation_db: T,
    /// Vertical side-lobe floor `SLA_V`, dB.
    pub side_lobe_db: T,
}

impl<T: Real> AntennaPattern<T> {
    pub fn from_config(cfg: &ScenarioConfig<T>) -> Self {
        Self {
            hpbw_vert_deg: cfg.hpbw_vert_deg,
            hpbw_horiz_deg: cfg.hpbw_horiz_deg,
            max_gain_dbi: cfg.max_antenna_gain_dbi,
            max_attenuation_db: T::c(30.0),
            side_lobe_db: T::c(30.0),
        }
    }

    /// Vertical attenuation (≤ 0 dB); depends on `elevation - tilt` only.
    #[inline]
    pub fn vertical_db(&self, elevation_deg: T, tilt_deg: T) -> T {
        let u = (elevation_deg - tilt_deg) / self.hpbw_vert_deg;
        -(T::c(12.0) * u * u).min(self.side_lobe_db)
    }

    #[inline]
    pub fn horizontal_db(&self, azimuth_off_deg: T) -> T {
        let u = azimuth_off_deg / self.hpbw_horiz_deg;
        -(T::c(12.0) * u * u).min(self.max_attenuation_db)
    }

    /// Element gain in dBi towards `(azimuth_off, elevation)` with electrical
    /// tilt `tilt` (negative = downtilt). Angles in degrees; azimuth already
    /// wrapped to (−180, 180].
    #[inline]
    pub fn gain_db(&self, azimuth_off_deg: T, elevation_deg: T, tilt_deg: T) -> T {
        let total = self.vertical_db(elevation_deg, tilt_deg) + self.horizontal_db(azimuth_off_deg);
        self.max_gain_dbi - (-total).min(self.max_attenuation_db)
    }
}

/// Wrap-corrected geometry of one BS→UE link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry<T> {
    pub d2d_m: T,
    pub d3d_m: T,
    pub azimuth_off_deg: T,
    pub elevation_deg: T,
    pub ue_kind: UeKind,
    pub ue_height_m: T,
    pub bs_height_m: T,
}

/// Wraps an angle in degrees to (−180, 180].
pub fn wrap_deg<T: Real>(a: T) -> T {
    let full = T::c(360.0);
    let mut x = a % full;
    if x <= T::c(-180.0) {
        x = x + full;
    } else if x > T::c(180.0) {
        x = x - full;
    }
    x
}

impl<T: Real> LinkGeometry<T> {
    pub fn new(bs: &BaseStation<T>, ue: [T; 3], ue_kind: UeKind, layout: &Layout<T>) -> Self {
        let a = [bs.position[0], bs.position[1], bs.height_m];
        let (v, d3d_m) = wrap_displacement(a, ue, layout);
        let d2d_m = v[0].hypot(v[1]);
        let bearing = v[1].atan2(v[0]).to_degrees();
        Self {
            d2d_m,
            d3d_m,
            azimuth_off_deg: wrap_deg(bearing - bs.azimuth_deg),
            elevation_deg: v[2].atan2(d2d_m).to_degrees(),
            ue_kind,
            ue_height_m: ue[2],
            bs_height_m: bs.height_m,
        }
    }

    fn check_height(&self) -> Result<()> {
        let h = self.ue_height_m.as_f64();
        let ok = match self.ue_kind {
            UeKind::Gue => (1.0..GROUND_MAX_HEIGHT_M).contains(&h),
            UeKind::Uav => (AERIAL_MIN_HEIGHT_M..=AERIAL_MAX_HEIGHT_M).contains(&h),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "unsupported {} height {h} m",
                self.ue_kind.as_str()
            )))
        }
    }

    /// `(d2d, d3d)` with the horizontal distance clamped to [`MIN_D2D_M`].
    fn clamped(&self) -> (T, T) {
        let d2d = self.d2d_m.max(T::c(MIN_D2D_M));
        let dh = self.ue_height_m - self.bs_height_m;
        (d2d, (d2d * d2d + dh * dh).sqrt())
    }
}

/// Probability that the link is LoS.
pub fn los_probability<T: Real>(geom: &LinkGeometry<T>) -> Result<T> {
    geom.check_height()?;
    Ok(match geom.ue_kind {
        UeKind::Uav => T::one(),
        UeKind::Gue => {
            let d = geom.d2d_m;
            let b = T::c(18.0);
            if d <= b {
                T::one()
            } else {
                b / d + (-d / T::c(63.0)).exp() * (T::one() - b / d)
            }
        }
    })
}

pub fn los_state<T: Real, R: Rng + ?Sized>(geom: &LinkGeometry<T>, rng: &mut R) -> Result<bool> {
    let p = los_probability(geom)?;
    Ok(match geom.ue_kind {
        UeKind::Uav => true,
        UeKind::Gue => T::sample_unit(rng) < p,
    })
}

/// Ground LoS path loss, dual slope around the effective-height breakpoint.
fn ground_los_db<T: Real>(d2d: T, d3d: T, h_bs: T, h_ut: T, fc_ghz: T) -> T {
    let h_e = T::one();
    let bp = T::c(4.0) * (h_bs - h_e) * (h_ut - h_e) * fc_ghz * T::c(1e9) / T::c(SPEED_OF_LIGHT);
    let f = T::c(20.0) * fc_ghz.log10();
    if d2d <= bp {
        T::c(28.0) + T::c(22.0) * d3d.log10() + f
    } else {
        let dh = h_bs - h_ut;
        T::c(28.0) + T::c(40.0) * d3d.log10() + f - T::c(9.0) * (bp * bp + dh * dh).log10()
    }
}

/// Path loss in dB for the given LoS state.
pub fn path_loss_db<T: Real>(geom: &LinkGeometry<T>, los: bool, carrier_ghz: T) -> Result<T> {
    geom.check_height()?;
    let (d2d, d3d) = geom.clamped();
    if d2d > T::c(MAX_D2D_M) {
        return Err(Error::InvalidInput(format!(
            "horizontal distance {} m beyond model validity",
            d2d
        )));
    }
    let h_ut = geom.ue_height_m;
    Ok(match geom.ue_kind {
        UeKind::Uav => {
            if !los {
                return Err(Error::InvalidInput("aerial links are LoS only".into()));
            }
            T::c(30.9)
                + (T::c(22.25) - T::c(0.5) * h_ut.log10()) * d3d.log10()
                + T::c(20.0) * carrier_ghz.log10()
        }
        UeKind::Gue => {
            let pl_los = ground_los_db(d2d, d3d, geom.bs_height_m, h_ut, carrier_ghz);
            if los {
                pl_los
            } else {
                let nlos = T::c(13.54) + T::c(39.08) * d3d.log10() + T::c(20.0) * carrier_ghz.log10()
                    - T::c(0.6) * (h_ut - T::c(1.5));
                pl_los.max(nlos)
            }
        }
    })
}

/// Shadow-fading standard deviation, dB.
pub fn shadow_sigma_db<T: Real>(los: bool, ue_kind: UeKind, ue_height_m: T) -> T {
    match (ue_kind, los) {
        (UeKind::Uav, _) => T::c(4.64) * (T::c(-0.0066) * ue_height_m).exp(),
        (UeKind::Gue, true) => T::c(4.0),
        (UeKind::Gue, false) => T::c(6.0),
    }
}

/// Zero-mean log-normal shadowing sample, dB, independent per call.
pub fn shadow_fading_db<T: Real, R: Rng + ?Sized>(
    los: bool,
    ue_kind: UeKind,
    ue_height_m: T,
    rng: &mut R,
) -> T {
    shadow_sigma_db(los, ue_kind, ue_height_m) * T::sample_std_normal(rng)
}

/// `|h|²`: unit-mean exponential for GUEs (Rayleigh), exactly 1 for UAVs.
pub fn small_scale_power<T: Real, R: Rng + ?Sized>(ue_kind: UeKind, rng: &mut R) -> T {
    match ue_kind {
        UeKind::Gue => T::sample_exp1(rng),
        UeKind::Uav => T::one(),
    }
}

/// Large-scale gain `G` in dB. The shadowing term is an extra loss; the UE
/// antenna is omnidirectional at 0 dBi.
#[inline]
pub fn large_scale_gain_db<T: Real>(pathloss_db: T, shadow_db: T, antenna_gain_db: T) -> T {
    -pathloss_db - shadow_db + antenna_gain_db
}

/// Every random and deterministic term of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkRealization<T> {
    pub los: bool,
    pub pathloss_db: T,
    pub shadow_db: T,
    pub antenna_gain_db: T,
    pub large_scale_gain_db: T,
    pub small_scale_power: T,
}

impl<T: Real> LinkRealization<T> {
    /// Draws LoS state, shadowing and fading in that order from `rng`.
    pub fn draw<R: Rng + ?Sized>(
        geom: &LinkGeometry<T>,
        tilt_deg: T,
        pattern: &AntennaPattern<T>,
        carrier_ghz: T,
        rng: &mut R,
    ) -> Result<Self> {
        let los = los_state(geom, rng)?;
        let pathloss_db = path_loss_db(geom, los, carrier_ghz)?;
        let shadow_db = shadow_fading_db(los, geom.ue_kind, geom.ue_height_m, rng);
        let small_scale_power = small_scale_power(geom.ue_kind, rng);
        let antenna_gain_db = pattern.gain_db(geom.azimuth_off_deg, geom.elevation_deg, tilt_deg);
        Ok(Self {
            los,
            pathloss_db,
            shadow_db,
            antenna_gain_db,
            large_scale_gain_db: large_scale_gain_db(pathloss_db, shadow_db, antenna_gain_db),
            small_scale_power,
        })
    }
}
