//! Monte-Carlo checks of the random link terms against their closed forms.

use corridor_bo::channel::{
    los_probability, los_state, path_loss_db, shadow_fading_db, shadow_sigma_db, small_scale_power, LinkGeometry,
    UeKind,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const N: usize = 1_000_000;

fn moments(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

fn ground_link(d2d: f64) -> LinkGeometry<f64> {
    let dh = 1.5 - 25.0;
    LinkGeometry {
        d2d_m: d2d,
        d3d_m: (d2d * d2d + dh * dh).sqrt(),
        azimuth_off_deg: 0.0,
        elevation_deg: dh.atan2(d2d).to_degrees(),
        ue_kind: UeKind::Gue,
        ue_height_m: 1.5,
        bs_height_m: 25.0,
    }
}

#[test]
fn los_rate_matches_probability() {
    let g = ground_link(500.0);
    let p = los_probability(&g).unwrap();
    let expected = 18.0 / 500.0 + (-500.0f64 / 63.0).exp() * (1.0 - 18.0 / 500.0);
    assert!((p - expected).abs() < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let hits = (0..N).filter(|_| los_state(&g, &mut rng).unwrap()).count() as f64 / N as f64;
    let se = (p * (1.0 - p) / N as f64).sqrt();
    assert!((hits - p).abs() < 4.0 * se, "rate {hits} vs {p}");
}

#[test]
fn shadowing_is_zero_mean_with_model_spread() {
    let cases = [
        (UeKind::Gue, true, 1.5, 4.0),
        (UeKind::Gue, false, 1.5, 6.0),
        (UeKind::Uav, true, 150.0, 4.64 * (-0.0066f64 * 150.0).exp()),
    ];
    for (i, (kind, los, h, sigma)) in cases.into_iter().enumerate() {
        assert_eq!(shadow_sigma_db(los, kind, h), sigma);
        let mut rng = ChaCha8Rng::seed_from_u64(10 + i as u64);
        let v: Vec<f64> = (0..N).map(|_| shadow_fading_db(los, kind, h, &mut rng)).collect();
        let (m, s) = moments(&v);
        assert!(m.abs() < 3.0 * sigma / (N as f64).sqrt(), "{kind:?} mean {m}");
        assert!((s / sigma - 1.0).abs() < 0.02, "{kind:?} std {s} vs {sigma}");
    }
}

#[test]
fn rayleigh_power_is_unit_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let v: Vec<f64> = (0..N).map(|_| small_scale_power(UeKind::Gue, &mut rng)).collect();
    let (m, _) = moments(&v);
    assert!((m - 1.0).abs() < 0.005);
    let cdf1 = v.iter().filter(|&&x| x <= 1.0).count() as f64 / N as f64;
    assert!((cdf1 - (1.0 - (-1.0f64).exp())).abs() < 0.005);
    assert_eq!(small_scale_power::<f64, _>(UeKind::Uav, &mut rng), 1.0);
}

#[test]
fn ground_path_loss_sweep_is_monotone_per_branch() {
    for los in [true, false] {
        let mut prev = f64::NEG_INFINITY;
        for i in 0..1000 {
            let d = 10.0 + 4990.0 * i as f64 / 999.0;
            let pl = path_loss_db(&ground_link(d), los, 2.0).unwrap();
            assert!(pl >= prev - 1e-9, "los={los} d={d}");
            prev = pl;
        }
    }
}
