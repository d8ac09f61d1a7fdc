//! Estimation of dispersion parameters from recorded putts.

use super::{Knot, PuttRecord};
use crate::error::{Error, Result};
use crate::physics::GreenModel;

/// Putts per fitted distance.
pub const DEFAULT_WINDOW: usize = 100;

/// Root-mean-square of the start-to-rest direction over all putts, with the
/// mean held at zero.
pub fn estimate_angle_sd(putts: &[PuttRecord]) -> Result<f64> {
    if putts.is_empty() {
        return Err(Error::EmptyInput("no putts to estimate angle dispersion"));
    }
    let mut sum_sq = 0.0;
    for p in putts {
        if p.final_x == 0.0 && p.final_y == 0.0 {
            return Err(Error::UndefinedAngle);
        }
        let a = p.final_x.atan2(p.final_y);
        sum_sq += a * a;
    }
    Ok((sum_sq / putts.len() as f64).sqrt())
}

/// Fits one knot per requested hole distance.
///
/// For each distance `d`, the `window` putts whose starting distance is
/// nearest to `d` are rescaled to start exactly at `d`. Putts that were holed,
/// or that stopped short while on a line through the hole, are dropped; the
/// knot is the mean and sample sd of the remaining roll lengths.
pub fn estimate_distance_profile(
    putts: &[PuttRecord],
    hole_dists: &[f64],
    window: usize,
    green: &GreenModel,
) -> Result<Vec<Knot>> {
    if putts.is_empty() {
        return Err(Error::EmptyInput("no putts to estimate distance dispersion"));
    }
    if window < 2 {
        return Err(Error::InvalidParameter(format!(
            "window must be at least 2, got {window}"
        )));
    }
    let radius_in = green.hole_radius_in();
    hole_dists
        .iter()
        .map(|&d| {
            let mut order: Vec<usize> = (0..putts.len()).collect();
            order.sort_by(|&a, &b| {
                let da = (putts[a].hole_dist - d).abs();
                let db = (putts[b].hole_dist - d).abs();
                da.total_cmp(&db).then(a.cmp(&b))
            });
            let aligned_within = (radius_in / d).atan();
            let rolls: Vec<f64> = order
                .into_iter()
                .take(window)
                .filter_map(|i| {
                    let p = &putts[i];
                    if p.holed {
                        return None;
                    }
                    let scale = d / p.hole_dist;
                    let (x, y) = (p.final_x * scale, p.final_y * scale);
                    let roll = x.hypot(y);
                    let went_past = roll > d;
                    let off_line = x.atan2(y).abs() > aligned_within;
                    (went_past || off_line).then_some(roll)
                })
                .collect();
            if rolls.len() < 2 {
                return Err(Error::InsufficientData {
                    hole_in: d,
                    survivors: rolls.len(),
                });
            }
            let n = rolls.len() as f64;
            let mean = rolls.iter().sum::<f64>() / n;
            let var = rolls.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
            if var <= 0.0 {
                return Err(Error::DegenerateDispersion { hole_in: d });
            }
            Ok(Knot::new(d, mean, var.sqrt()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    use crate::rng::stream;

    fn record(hole: f64, x: f64, y: f64, holed: bool) -> PuttRecord {
        PuttRecord {
            player: "p".into(),
            hole_dist: hole,
            final_x: x,
            final_y: y,
            holed,
        }
    }

    #[test]
    fn angle_sd_of_straight_putts_is_zero() {
        let putts: Vec<_> = (1..20).map(|i| record(100.0, 0.0, i as f64 * 10.0, false)).collect();
        assert_eq!(estimate_angle_sd(&putts).unwrap(), 0.0);
    }

    #[test]
    fn angle_sd_rejects_empty_and_origin() {
        assert!(matches!(estimate_angle_sd(&[]), Err(Error::EmptyInput(_))));
        assert!(matches!(
            estimate_angle_sd(&[record(50.0, 0.0, 0.0, false)]),
            Err(Error::UndefinedAngle)
        ));
    }

    #[test]
    fn angle_sd_recovers_synthetic_value() {
        let mut rng = stream(3);
        let normal = Normal::new(0.0, 0.03).unwrap();
        let putts: Vec<_> = (0..10_000)
            .map(|_| {
                let a: f64 = normal.sample(&mut rng);
                let r = rng.random_range(50.0..300.0);
                record(120.0, r * a.sin(), r * a.cos(), false)
            })
            .collect();
        let sd = estimate_angle_sd(&putts).unwrap();
        assert!((sd - 0.03).abs() < 0.002, "{sd}");
    }

    #[test]
    fn identical_rolls_are_degenerate() {
        let putts: Vec<_> = (0..50).map(|_| record(100.0, 0.0, 200.0, false)).collect();
        let err = estimate_distance_profile(&putts, &[100.0], 100, &GreenModel::default()).unwrap_err();
        assert!(matches!(err, Error::DegenerateDispersion { .. }));
    }

    #[test]
    fn too_few_survivors_is_an_error() {
        let mut putts: Vec<_> = (0..50).map(|_| record(100.0, 0.0, 100.0, true)).collect();
        putts.push(record(100.0, 0.0, 130.0, false));
        let err = estimate_distance_profile(&putts, &[100.0], 100, &GreenModel::default()).unwrap_err();
        assert!(matches!(err, Error::InsufficientData { survivors: 1, .. }));
    }

    #[test]
    fn window_picks_nearest_putts_and_rescales() {
        // Two putts near 100 and a far cluster that must be ignored.
        let mut putts = vec![
            record(98.0, 0.0, 98.0 * 1.2, false),
            record(102.0, 0.0, 102.0 * 1.4, false),
        ];
        putts.extend((0..10).map(|_| record(400.0, 0.0, 900.0, false)));
        let k = estimate_distance_profile(&putts, &[100.0], 2, &GreenModel::default()).unwrap();
        assert!((k[0].target - 130.0).abs() < 1e-9);
        assert!((k[0].sd - (200.0f64).sqrt()).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn fitted_knots_scale_with_the_green(scale in 0.5..3.0f64, seed in 0u64..1000) {
            let mut rng = stream(seed);
            let putts: Vec<_> = (0..60)
                .map(|_| {
                    let a: f64 = rng.random_range(-0.2..0.2);
                    let r: f64 = rng.random_range(60.0..200.0);
                    record(100.0 + rng.random_range(-5.0..5.0), r * a.sin(), r * a.cos(), false)
                })
                .collect();
            let scaled: Vec<_> = putts
                .iter()
                .map(|p| record(p.hole_dist * scale, p.final_x * scale, p.final_y * scale, false))
                .collect();
            // The alignment cone depends on hole size, so the hole scales too.
            let green = GreenModel::default();
            let big = GreenModel { hole_radius: green.hole_radius * scale, ..green };
            let a = estimate_distance_profile(&putts, &[100.0], 40, &green).unwrap();
            let b = estimate_distance_profile(&scaled, &[100.0 * scale], 40, &big).unwrap();
            prop_assert!((b[0].target - scale * a[0].target).abs() < 1e-9 * scale * a[0].target);
            prop_assert!((b[0].sd - scale * a[0].sd).abs() < 1e-8 * scale * a[0].sd);
        }
    }
}
