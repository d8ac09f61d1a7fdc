use std::io::Write;

use greenside::config::{Overrides, RunConfig};
use greenside::pipeline::{self, RunOptions, Step};
use greenside::rng::stream;
use greenside::skill::{estimate_angle_sd, estimate_distance_profile, read_putt_records, PuttRecord};
use greenside::GreenModel;
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Putt outcome from first principles: the ball travels a straight line,
/// passes the hole at lateral offset `d·|sin a|` after `d·cos a` inches, and
/// drops if its speed there (from `D = k s²`) is below
/// `1.63 (1 − (δ/R)²)` m/s.
fn play(d: f64, angle: f64, roll: f64) -> (f64, f64, bool) {
    const K: f64 = 1.093;
    const R: f64 = 0.054;
    const M: f64 = 0.0254;
    let along = d * angle.cos();
    let lateral = d * angle.sin().abs() * M;
    if along >= 0.0 && roll >= along && lateral < R {
        let speed = ((roll - along) * M / K).sqrt();
        if speed < 1.63 * (1.0 - (lateral / R).powi(2)) {
            return (0.0, d, true);
        }
    }
    (roll * angle.sin(), roll * angle.cos(), false)
}

fn synthetic(player: &str, d: f64, target: f64, sd: f64, angle_sd: f64, count: usize, seed: u64) -> Vec<PuttRecord> {
    let mut rng = stream(seed);
    let angle = Normal::new(0.0, angle_sd).unwrap();
    let roll = Normal::new(target, sd).unwrap();
    (0..count)
        .map(|_| {
            let (x, y, holed) = play(d, angle.sample(&mut rng), roll.sample(&mut rng).max(0.0));
            PuttRecord {
                player: player.into(),
                hole_dist: d,
                final_x: x,
                final_y: y,
                holed,
            }
        })
        .collect()
}

#[test]
fn recovers_a_known_distance_knot() {
    // A realistic direction error lets enough misses pass the filter.
    let putts = synthetic("p", 100.0, 117.84, 12.41, 0.027, 40_000, 1);
    let knots = estimate_distance_profile(&putts, &[100.0], putts.len(), &GreenModel::default()).unwrap();
    let k = knots[0];
    assert_eq!(k.hole, 100.0);
    assert!((k.target - 117.84).abs() <= 1.5, "target {}", k.target);
    assert!((k.sd - 12.41).abs() <= 1.5, "sd {}", k.sd);
}

#[test]
fn recovers_a_known_angle_sd() {
    let mut rng = stream(2);
    let normal = Normal::new(0.0, 0.03).unwrap();
    let putts: Vec<PuttRecord> = (0..10_000)
        .map(|_| {
            let a: f64 = normal.sample(&mut rng);
            let r = rng.random_range(50.0..150.0);
            PuttRecord {
                player: "p".into(),
                hole_dist: 100.0,
                final_x: r * a.sin(),
                final_y: r * a.cos(),
                holed: false,
            }
        })
        .collect();
    let sd = estimate_angle_sd(&putts).unwrap();
    assert!((sd - 0.03).abs() <= 0.002, "{sd}");
}

#[test]
fn fit_stage_estimates_from_raw_putts() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("putts.csv");
    let mut f = std::fs::File::create(&raw).unwrap();
    writeln!(f, "player,hole_dist_in,final_x_in,final_y_in,holed").unwrap();
    let dists = [100.0, 200.0, 400.0];
    let mut seed = 10;
    for (p, angle_sd) in [("Ann", 0.03), ("Bo", 0.02)] {
        for d in dists {
            seed += 1;
            for r in synthetic(p, d, d * 1.1, d * 0.1, angle_sd, 600, seed) {
                writeln!(
                    f,
                    "{},{},{},{},{}",
                    r.player, r.hole_dist, r.final_x, r.final_y, r.holed
                )
                .unwrap();
            }
        }
    }
    drop(f);
    let conf = dir.path().join("run.conf");
    std::fs::write(
        &conf,
        "players = Ann, Bo\nseed = 1\nfit.putts = putts.csv\nfit.distances = 100, 200, 400\nfit.window = 600\n",
    )
    .unwrap();
    let cfg = RunConfig::load(&conf, &Overrides::default()).unwrap();
    let out = pipeline::run(&cfg, Step::Fit, RunOptions::default()).unwrap();

    // The stage writes exactly what the estimators return, at table precision.
    let records = read_putt_records(&raw).unwrap();
    for s in &out.skills {
        let mine: Vec<_> = records.iter().filter(|r| r.player == s.name).cloned().collect();
        let angle = estimate_angle_sd(&mine).unwrap();
        assert!((s.angle_sd - angle).abs() <= 5e-5);
        let knots = estimate_distance_profile(&mine, &dists, 600, &cfg.green).unwrap();
        for (a, b) in s.profile().iter().zip(&knots) {
            assert!((a.target - b.target).abs() <= 5e-5 && (a.sd - b.sd).abs() <= 5e-5);
        }
    }
    let ann = &out.skills[0];
    assert!((ann.angle_sd - 0.03).abs() < 0.005);
}

#[test]
fn missing_column_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("putts.csv");
    std::fs::write(&raw, "player,hole_dist_in,final_x_in,holed\nA,100,1,false\n").unwrap();
    let e = read_putt_records(&raw).unwrap_err().to_string();
    assert!(e.contains("final_y_in"), "{e}");
}

#[test]
fn player_without_putts_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("putts.csv"),
        "player,hole_dist_in,final_x_in,final_y_in,holed\nA,100,1,120,false\n",
    )
    .unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "players = A, B\nseed = 1\nfit.putts = putts.csv\n").unwrap();
    let cfg = RunConfig::load(&conf, &Overrides::default()).unwrap();
    let e = pipeline::run(&cfg, Step::Fit, RunOptions::default())
        .unwrap_err()
        .to_string();
    assert!(e.contains("fit") && e.contains("no putts for player"), "{e}");
}
