use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use greenside::config::{Overrides, RunConfig};
use greenside::pipeline::{self, RunOptions, Status, Step};
use greenside::players;
use greenside::transitions::build_transitions;
use greenside::{Discretization, GreenModel};

const COARSE_PAIR: &str = "players = Johnson, Els\nseed = 5\ngrid.delta = 20\ngrid.n_offsets = 5\n\
                           simulate.trials = 2000\nanalysis.capture_samples = 500\n";

fn setup(text: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, text).unwrap();
    (dir, conf)
}

fn load(conf: &Path) -> RunConfig {
    RunConfig::load(conf, &Overrides::default()).unwrap()
}

fn csv_files(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "csv" || x == "meta") {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn write_improper(dir: &Path) {
    // From 20 in every putt stays at 20 in: no policy ever holes out.
    fs::write(
        dir.join("bot.csv"),
        "state,offset,dest_state,probability\n1,0,1,1\n1,1,0,0.5\n1,1,1,0.5\n2,0,1,1\n2,1,0,1\n",
    )
    .unwrap();
    fs::write(
        dir.join("bot.meta"),
        "player = Bot\ndelta = 20\nmax_dist = 40\nn_offsets = 1\n",
    )
    .unwrap();
}

#[test]
fn coarse_run_completes_every_stage() {
    let (dir, conf) = setup(COARSE_PAIR);
    let out = pipeline::run(&load(&conf), Step::All, RunOptions::default()).unwrap();
    assert!(!out.manifest.stages.is_empty());
    assert!(
        out.manifest.stages.iter().all(|r| r.status == Status::Ok),
        "{}",
        out.manifest.render()
    );
    for stage in [
        "fit",
        "validate_proper:Els",
        "match:Johnson_vs_Els",
        "gap_table",
        "simulate",
    ] {
        assert_eq!(out.manifest.status(stage), Some(Status::Ok), "{stage}");
    }
    let text = fs::read_to_string(dir.path().join("out/manifest.txt")).unwrap();
    assert!(text.contains("seed = 5") && text.contains("tol = 1e-9"));
    assert!(text.contains("seed.transitions/Johnson = "));
    for f in [
        "skills/angle_sd.csv",
        "skills/profiles.csv",
        "transitions/Els.csv",
        "stroke/Johnson.csv",
        "match/Johnson_vs_Els.csv",
        "analysis/gap_table.csv",
        "analysis/diff_Johnson_vs_Els.csv",
        "analysis/capture_rates.csv",
        "simulate.csv",
    ] {
        assert!(dir.path().join("out").join(f).exists(), "{f}");
    }
}

#[test]
fn rerun_skips_finished_stages_and_reproduces_files() {
    let (dir, conf) = setup(COARSE_PAIR);
    let cfg = load(&conf);
    pipeline::run(&cfg, Step::All, RunOptions::default()).unwrap();
    let first = csv_files(&dir.path().join("out"));

    let again = pipeline::run(&cfg, Step::All, RunOptions::default()).unwrap();
    for stage in [
        "fit",
        "transitions:Johnson",
        "match:Johnson_vs_Els",
        "gap_table",
        "simulate",
    ] {
        assert_eq!(again.manifest.status(stage), Some(Status::Skipped), "{stage}");
    }
    assert_eq!(again.manifest.status("verify:Johnson_vs_Els"), Some(Status::Ok));
    assert_eq!(csv_files(&dir.path().join("out")), first);

    // A resumed match reloads to the same equilibrium values.
    let fresh = pipeline::run(
        &RunConfig::load(
            &conf,
            &Overrides {
                out: Some(dir.path().join("fresh")),
                ..Default::default()
            },
        )
        .unwrap(),
        Step::Match,
        RunOptions::default(),
    )
    .unwrap();
    let key = ("Johnson".to_string(), "Els".to_string());
    let (a, b) = (&again.matches[&key].values, &fresh.matches[&key].values);
    assert!(a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12));

    // A different seed invalidates the stamps.
    let reseeded = RunConfig::load(
        &conf,
        &Overrides {
            seed: Some(6),
            ..Default::default()
        },
    )
    .unwrap();
    let out = pipeline::run(&reseeded, Step::Transitions, RunOptions::default()).unwrap();
    assert_eq!(out.manifest.status("transitions:Johnson"), Some(Status::Ok));
}

#[test]
fn improper_transition_file_halts_at_validation() {
    let (dir, conf) = setup("players = Bot\nseed = 1\nplayer.Bot.transitions = bot.csv\n");
    write_improper(dir.path());
    let e = pipeline::run(&load(&conf), Step::All, RunOptions::default()).unwrap_err();
    let msg = e.to_string();
    assert!(msg.contains("validate_proper:Bot"), "{msg}");
    let manifest = fs::read_to_string(dir.path().join("out/manifest.txt")).unwrap();
    assert!(manifest.contains("stage.validate_proper:Bot = FAILED"), "{manifest}");
    assert!(manifest.contains("stage.transitions:Bot = OK"));
    // Earlier outputs stay on disk.
    assert!(dir.path().join("out/transitions/Bot.csv").exists());
}

#[test]
fn parameter_tables_pass_through() {
    let (dir, conf) = setup("players = Zed\nseed = 1\nskills.angle_sd = a.csv\nskills.profiles = p.csv\n");
    fs::write(dir.path().join("a.csv"), "player,angle_sd\nZed,0.0310\n").unwrap();
    fs::write(
        dir.path().join("p.csv"),
        "player,hole_in,target_in,sd_in\nZed,100,120.5,10\nZed,800,810,50\n",
    )
    .unwrap();
    let out = pipeline::run(&load(&conf), Step::Fit, RunOptions::default()).unwrap();
    assert_eq!(out.skills.len(), 1);
    assert_eq!(out.skills[0].angle_sd, 0.031);
    assert_eq!(out.skills[0].interpolate(100.0), (120.5, 10.0));
    let written = fs::read_to_string(dir.path().join("out/skills/profiles.csv")).unwrap();
    assert_eq!(
        written,
        "player,hole_in,target_in,sd_in\nZed,100.0000,120.5000,10.0000\nZed,800.0000,810.0000,50.0000\n"
    );
}

#[test]
fn malformed_table_header_names_the_column() {
    let (dir, conf) = setup("players = Zed\nseed = 1\nskills.angle_sd = a.csv\nskills.profiles = p.csv\n");
    fs::write(dir.path().join("a.csv"), "player,angle_sd\nZed,0.03\n").unwrap();
    fs::write(dir.path().join("p.csv"), "player,hole_in,target\nZed,100,120\n").unwrap();
    let msg = pipeline::run(&load(&conf), Step::Fit, RunOptions::default())
        .unwrap_err()
        .to_string();
    assert!(msg.contains("target_in"), "{msg}");
}

#[test]
fn binary_reports_stage_and_exit_code() {
    let exe = env!("CARGO_BIN_EXE_greenside");
    let (dir, conf) = setup("players = Bot\nseed = 1\nplayer.Bot.transitions = bot.csv\n");
    write_improper(dir.path());
    let run = Command::new(exe)
        .args(["pipeline", "--config"])
        .arg(&conf)
        .output()
        .unwrap();
    assert!(!run.status.success());
    let err = String::from_utf8_lossy(&run.stderr);
    assert!(err.contains("stage validate_proper:Bot failed"), "{err}");

    let (dir, conf) = setup("players = Johnson\nseed = 1\n");
    let out = dir.path().join("elsewhere");
    let run = Command::new(exe)
        .args(["transitions", "--coarse", "--seed", "9", "--config"])
        .arg(&conf)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("Johnson") && stdout.contains("117.8400"), "{stdout}");
    let meta = fs::read_to_string(out.join("transitions/Johnson.meta")).unwrap();
    assert!(meta.contains("delta = 20"), "{meta}");
    assert!(fs::read_to_string(out.join("manifest.txt"))
        .unwrap()
        .contains("seed = 9"));

    let run = Command::new(exe)
        .args(["fit", "--config", "/nonexistent.conf"])
        .output()
        .unwrap();
    assert!(!run.status.success());
}

#[test]
fn thread_count_does_not_change_results() {
    let skill = players::builtin("Woods").unwrap();
    let green = GreenModel::default();
    let disc = Discretization::coarse(&green);
    let build = || build_transitions(&skill, &green, &disc, 300, 42).unwrap();
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(build);
    let four = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(build);
    assert_eq!(one, four);
}

#[test]
fn bundled_tables_match_builtin_players() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let dir = tempfile::tempdir().unwrap();
    let o = Overrides {
        coarse: true,
        out: Some(dir.path().to_path_buf()),
        ..Overrides::default()
    };
    let cfg = RunConfig::load(&data.join("scenarios.conf"), &o).unwrap();
    assert_eq!(cfg.pairs.len(), players::SCENARIOS.len());
    let out = pipeline::run(&cfg, Step::Fit, RunOptions::default()).unwrap();
    assert_eq!(out.skills, players::all());
    RunConfig::load(&data.join("demo.conf"), &o).unwrap();
}
