//! Staged runs from a [`RunConfig`] to the full set of output files.
//!
//! Every stage records its status and wall time in `manifest.txt`. Stages
//! that are costly to redo leave a stamp holding a hash of the config and
//! input files; a rerun with the same hash reloads their outputs instead of
//! recomputing them.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::{Digest, Sha256};

use crate::analysis::{self, GapTable};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::game::{
    self, build_match_game, read_match_profile, strategy_iteration, verify_equilibrium, write_match, MatchGame,
    MatchSolution, MatchState, Player, SolverConfig,
};
use crate::players;
use crate::rng::derive;
use crate::skill::{self, PlayerSkill};
use crate::ssp::{self, StrokeSolution};
use crate::transitions::{self, TransitionModel};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// How far a command runs. Later steps include the ones they depend on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Step {
    Fit,
    Transitions,
    Stroke,
    Match,
    Analyze,
    Simulate,
    All,
}

impl Step {
    fn wants_analysis(self) -> bool {
        matches!(self, Step::Analyze | Step::All)
    }

    fn wants_simulation(self) -> bool {
        matches!(self, Step::Simulate | Step::All)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Skipped,
    Failed,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Ok => "OK",
            Status::Skipped => "SKIPPED",
            Status::Failed => "FAILED",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    pub name: String,
    pub status: Status,
    pub seconds: f64,
    pub note: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    pub settings: Vec<(String, String)>,
    pub stages: Vec<StageRecord>,
}

impl Manifest {
    pub fn status(&self, stage: &str) -> Option<Status> {
        self.stages.iter().find(|r| r.name == stage).map(|r| r.status)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.settings {
            let _ = writeln!(s, "{k} = {v}");
        }
        for r in &self.stages {
            let _ = write!(s, "stage.{} = {} {:.3}s", r.name, r.status.label(), r.seconds);
            if !r.note.is_empty() {
                let _ = write!(s, " {}", r.note);
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Print skill summaries and one line per finished stage.
    pub echo: bool,
}

/// In-memory products of a run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub out_dir: PathBuf,
    pub manifest: Manifest,
    pub skills: Vec<PlayerSkill>,
    pub models: BTreeMap<String, TransitionModel>,
    pub strokes: BTreeMap<String, StrokeSolution>,
    /// Equilibria keyed by `(player one, player two)`.
    pub matches: BTreeMap<(String, String), MatchSolution>,
    /// Pooled gap table; `None` unless computed in this run.
    pub gaps: Option<GapTable>,
}

struct Runner<'c> {
    cfg: &'c RunConfig,
    opts: RunOptions,
    hash: String,
    manifest: Manifest,
}

impl Runner<'_> {
    fn out(&self, rel: &str) -> PathBuf {
        self.cfg.out.join(rel)
    }

    fn stamp(&self, name: &str) -> PathBuf {
        self.cfg.out.join(".stamps").join(name.replace([':', '/'], "_"))
    }

    fn stage_hash(&self, name: &str) -> String {
        hex(&Sha256::new().chain_update(&self.hash).chain_update(name).finalize())
    }

    fn is_fresh(&self, name: &str, outputs: &[PathBuf]) -> bool {
        outputs.iter().all(|p| p.exists())
            && fs::read_to_string(self.stamp(name)).is_ok_and(|h| h == self.stage_hash(name))
    }

    fn record(&mut self, name: &str, status: Status, start: Instant, note: String) {
        if self.opts.echo {
            eprintln!("{name}: {} {note}", status.label());
        }
        self.manifest.stages.push(StageRecord {
            name: name.to_string(),
            status,
            seconds: start.elapsed().as_secs_f64(),
            note,
        });
    }

    fn fail(&mut self, name: &str, start: Instant, e: Error) -> Error {
        let _ = fs::remove_file(self.stamp(name));
        self.record(name, Status::Failed, start, e.to_string());
        let _ = self.write_manifest();
        Error::Stage {
            stage: name.to_string(),
            source: Box::new(e),
        }
    }

    /// Runs a stage whose outputs are always recomputed.
    fn always<T>(&mut self, name: &str, body: impl FnOnce() -> Result<(T, String)>) -> Result<T> {
        let start = Instant::now();
        match body() {
            Ok((v, note)) => {
                self.record(name, Status::Ok, start, note);
                Ok(v)
            }
            Err(e) => Err(self.fail(name, start, e)),
        }
    }

    /// Runs a resumable stage. `body` receives `true` when its outputs are
    /// current and should be reloaded rather than recomputed.
    fn resumable<T>(&mut self, name: &str, outputs: &[PathBuf], body: impl FnOnce(bool) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let cached = self.is_fresh(name, outputs);
        match body(cached) {
            Ok(v) => {
                if !cached {
                    let stamp = self.stamp(name);
                    let written = create_parent(&stamp)
                        .and_then(|_| fs::write(&stamp, self.stage_hash(name)).map_err(|e| Error::io(&stamp, e)));
                    if let Err(e) = written {
                        return Err(self.fail(name, start, e));
                    }
                }
                let status = if cached { Status::Skipped } else { Status::Ok };
                self.record(name, status, start, String::new());
                Ok(v)
            }
            Err(e) => Err(self.fail(name, start, e)),
        }
    }

    fn write_manifest(&self) -> Result<()> {
        let path = self.out("manifest.txt");
        fs::write(&path, self.manifest.render()).map_err(|e| Error::io(&path, e))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) => fs::create_dir_all(dir).map_err(|e| Error::io(dir, e)),
        None => Ok(()),
    }
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    create_parent(path)?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// Hash of everything that determines the outputs.
pub fn config_hash(cfg: &RunConfig) -> Result<String> {
    let mut h = Sha256::new();
    h.update(VERSION);
    h.update(cfg.canonical());
    let mut inputs: Vec<&PathBuf> = [&cfg.angle_table, &cfg.profile_table, &cfg.raw_putts]
        .into_iter()
        .flatten()
        .collect();
    for (csv, meta) in cfg.transition_files.values() {
        inputs.push(csv);
        inputs.push(meta);
    }
    for p in inputs {
        h.update(fs::read(p).map_err(|e| Error::io(p, e))?);
    }
    Ok(hex(&h.finalize()))
}

fn pair_label(p1: &str, p2: &str) -> String {
    format!("{p1}_vs_{p2}")
}

fn solver_config(cfg: &RunConfig, p1: &str, p2: &str) -> SolverConfig {
    SolverConfig {
        tol: cfg.tol,
        init_seed: derive(cfg.seed, &format!("match/{p1}/{p2}")),
        ..SolverConfig::default()
    }
}

/// Skills for the configured players: fitted from raw putts, or taken from
/// parameter tables (bundled ones by default). Players backed by a
/// hand-supplied transition file may have no skill entry.
fn gather_skills(cfg: &RunConfig) -> Result<Vec<PlayerSkill>> {
    if let Some(path) = &cfg.raw_putts {
        let records = skill::read_putt_records(path)?;
        let groups: Vec<(&String, Vec<_>)> = cfg
            .players
            .iter()
            .filter(|p| !cfg.transition_files.contains_key(*p))
            .map(|p| (p, records.iter().filter(|r| &r.player == p).cloned().collect()))
            .collect();
        if let Some((p, _)) = groups.iter().find(|(_, g)| g.is_empty()) {
            return Err(Error::parse(path, 0, format!("no putts for player {p}")));
        }
        return groups
            .into_iter()
            .map(|(p, mine)| {
                let angle = skill::estimate_angle_sd(&mine)?;
                let profile = skill::estimate_distance_profile(&mine, &cfg.fit_distances, cfg.fit_window, &cfg.green)?;
                PlayerSkill::new(p.clone(), angle, profile)
            })
            .collect();
    }
    let angles = match &cfg.angle_table {
        Some(p) => skill::read_angle_sds(p)?,
        None => players::all().into_iter().map(|s| (s.name, s.angle_sd)).collect(),
    };
    let profiles = match &cfg.profile_table {
        Some(p) => skill::read_profiles(p)?,
        None => players::all()
            .into_iter()
            .map(|s| (s.name.clone(), s.profile().to_vec()))
            .collect(),
    };
    let mut out = Vec::new();
    for p in &cfg.players {
        match angles.iter().find(|(n, _)| n == p) {
            Some((_, sd)) => {
                let profile = profiles
                    .get(p)
                    .ok_or_else(|| Error::InvalidParameter(format!("no distance profile for player {p}")))?;
                out.push(PlayerSkill::new(p.clone(), *sd, profile.clone())?);
            }
            None if cfg.transition_files.contains_key(p) => {}
            None => return Err(Error::InvalidParameter(format!("no skill parameters for player {p}"))),
        }
    }
    Ok(out)
}

fn echo_skills(skills: &[PlayerSkill]) {
    println!("{:<12} {:>9}", "player", "angle_sd");
    for s in skills {
        println!("{:<12} {:>9.4}", s.name, s.angle_sd);
    }
    println!();
    println!("{:<12} {:>9} {:>10} {:>9}", "player", "hole_in", "target_in", "sd_in");
    for s in skills {
        for k in s.profile() {
            println!("{:<12} {:>9.4} {:>10.4} {:>9.4}", s.name, k.hole, k.target, k.sd);
        }
    }
}

/// Runs the stages needed for `step` and writes the manifest.
pub fn run(cfg: &RunConfig, step: Step, opts: RunOptions) -> Result<RunOutput> {
    fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    let hash = config_hash(cfg)?;
    let mut settings = vec![
        ("version".to_string(), VERSION.to_string()),
        ("config".to_string(), cfg.path.display().to_string()),
        ("config_hash".to_string(), hash.clone()),
        ("seed".to_string(), cfg.seed.to_string()),
        ("tie_seed".to_string(), cfg.tie_seed.to_string()),
        ("tol".to_string(), format!("{:e}", cfg.tol)),
        ("transitions.samples".to_string(), cfg.samples.to_string()),
        ("grid.delta".to_string(), cfg.grid.delta.to_string()),
        ("grid.max_dist".to_string(), cfg.grid.max_dist.to_string()),
        ("grid.n_offsets".to_string(), cfg.grid.n_offsets.to_string()),
        ("match.delta_cap".to_string(), cfg.delta_cap.to_string()),
        ("green.k_friction".to_string(), cfg.green.k_friction.to_string()),
        ("green.hole_radius".to_string(), cfg.green.hole_radius.to_string()),
        (
            "green.max_capture_speed".to_string(),
            cfg.green.max_capture_speed.to_string(),
        ),
    ];
    for p in &cfg.players {
        if !cfg.transition_files.contains_key(p) {
            let label = format!("transitions/{p}");
            settings.push((format!("seed.{label}"), derive(cfg.seed, &label).to_string()));
        }
    }
    for (p1, p2) in &cfg.pairs {
        let label = format!("match/{p1}/{p2}");
        settings.push((format!("seed.{label}"), derive(cfg.seed, &label).to_string()));
    }
    if step.wants_analysis() {
        settings.push(("analysis.threshold".to_string(), cfg.threshold.to_string()));
        settings.push(("analysis.capture_samples".to_string(), cfg.capture_samples.to_string()));
        settings.push(("seed.capture".to_string(), derive(cfg.seed, "capture").to_string()));
    }
    if step.wants_simulation() {
        settings.push(("simulate.trials".to_string(), cfg.sim_trials.to_string()));
        settings.push(("seed.simulate".to_string(), derive(cfg.seed, "simulate").to_string()));
    }
    let mut r = Runner {
        cfg,
        opts,
        hash,
        manifest: Manifest {
            settings,
            stages: Vec::new(),
        },
    };
    let result = run_stages(&mut r, step);
    r.write_manifest()?;
    let mut out = result?;
    out.manifest = r.manifest;
    Ok(out)
}

fn run_stages(r: &mut Runner<'_>, step: Step) -> Result<RunOutput> {
    let cfg = r.cfg;
    let mut out = RunOutput {
        out_dir: cfg.out.clone(),
        manifest: Manifest::default(),
        skills: Vec::new(),
        models: BTreeMap::new(),
        strokes: BTreeMap::new(),
        matches: BTreeMap::new(),
        gaps: None,
    };

    let angle_path = r.out("skills/angle_sd.csv");
    let profile_path = r.out("skills/profiles.csv");
    let outputs = [angle_path.clone(), profile_path.clone()];
    out.skills = r.resumable("fit", &outputs, |cached| {
        if !cached {
            let skills = gather_skills(cfg)?;
            write_file(&angle_path, |w| skill::write_angle_sds(w, &skills))?;
            write_file(&profile_path, |w| skill::write_profiles(w, &skills))?;
        }
        // Downstream stages always read the written tables, so a resumed run
        // sees exactly the values a fresh one does.
        let angles = skill::read_angle_sds(&angle_path)?;
        let profiles = skill::read_profiles(&profile_path)?;
        skill::skills_from_tables(&angles, &profiles)
    })?;
    if r.opts.echo {
        echo_skills(&out.skills);
    }
    if step == Step::Fit {
        return Ok(out);
    }

    for p in &cfg.players {
        let csv = r.out(&format!("transitions/{p}.csv"));
        let meta = r.out(&format!("transitions/{p}.meta"));
        let skill = out.skills.iter().find(|s| &s.name == p);
        let tm = r.resumable(&format!("transitions:{p}"), &[csv.clone(), meta.clone()], |cached| {
            if cached {
                return transitions::read_transitions(&csv, &meta);
            }
            let tm = match (cfg.transition_files.get(p), skill) {
                (Some((c, m)), _) => transitions::read_transitions(c, m)?,
                (None, Some(s)) => {
                    let seed = derive(cfg.seed, &format!("transitions/{p}"));
                    transitions::build_transitions(s, &cfg.green, &cfg.grid, cfg.samples, seed)?
                }
                (None, None) => return Err(Error::InvalidParameter(format!("no skill parameters for player {p}"))),
            };
            write_file(&csv, |w| transitions::write_transitions(w, &tm))?;
            write_file(&meta, |w| transitions::write_metadata(w, &tm))?;
            Ok(tm)
        })?;
        r.always(&format!("validate_proper:{p}"), || {
            let rep = transitions::validate_proper(&tm);
            if !rep.is_absorbing {
                return Err(Error::Improper {
                    player: p.clone(),
                    reason: "some policy never reaches the hole".into(),
                });
            }
            Ok(((), format!("min_hole_prob_n_steps={:.4}", rep.min_absorb_prob_n_steps)))
        })?;
        out.models.insert(p.clone(), tm);
    }
    if step == Step::Transitions {
        return Ok(out);
    }

    if step != Step::Simulate {
        for p in &cfg.players {
            let tm = &out.models[p];
            let path = r.out(&format!("stroke/{p}.csv"));
            let sol = r.always(&format!("stroke:{p}"), || {
                let sol = ssp::value_iteration(tm, cfg.tol, ssp::DEFAULT_MAX_ITER)?;
                write_file(&path, |w| ssp::write_stroke(w, tm, &sol))?;
                let note = format!("expected_putts_at_max={:.4}", sol.values[tm.n_states()]);
                Ok((sol, note))
            })?;
            out.strokes.insert(p.clone(), sol);
        }
    }
    if step == Step::Stroke {
        return Ok(out);
    }

    for (p1, p2) in &cfg.pairs {
        let label = pair_label(p1, p2);
        let path = r.out(&format!("match/{label}.csv"));
        let game = build_match_game(&out.models[p1], &out.models[p2], cfg.delta_cap, cfg.tie_seed).map_err(|e| {
            Error::Stage {
                stage: format!("match:{label}"),
                source: Box::new(e),
            }
        })?;
        let scfg = solver_config(cfg, p1, p2);
        let sol = r.resumable(&format!("match:{label}"), std::slice::from_ref(&path), |cached| {
            if cached {
                let profile = read_match_profile(&path, &game)?;
                let values = game::evaluate_profile(&game, &profile, &scfg.chain, None)?;
                return Ok(MatchSolution {
                    profile,
                    values,
                    iterations: 0,
                    evaluations: 1,
                });
            }
            let sol = strategy_iteration(&game, &scfg)?;
            write_file(&path, |w| write_match(w, &game, &sol))?;
            Ok(sol)
        })?;
        r.always(&format!("verify:{label}"), || {
            let rep = verify_equilibrium(&game, &sol, equilibrium_tolerance(cfg.tol));
            let note = format!(
                "max_deviation_gain={:e} consistency_residual={:e}",
                rep.max_deviation_gain, rep.consistency_residual
            );
            if !rep.ok {
                return Err(Error::InvalidParameter(format!("equilibrium check failed: {note}")));
            }
            let v = sol.values[game.index(MatchState {
                s1: game.tm1.n_states(),
                s2: game.tm1.n_states(),
                delta: 0,
            })];
            Ok(((), format!("{note} value_at_max_tied={v:.4}")))
        })?;
        out.matches.insert((p1.clone(), p2.clone()), sol);
    }

    if step.wants_analysis() {
        analyze(r, &mut out)?;
    }
    if step.wants_simulation() {
        simulate(r, &out)?;
    }
    Ok(out)
}

/// Slack for the equilibrium check: the solver stops switching once gains
/// fall below `tol`, and linear solves add rounding on top.
pub fn equilibrium_tolerance(tol: f64) -> f64 {
    (10.0 * tol).max(1e-8)
}

fn analyze(r: &mut Runner<'_>, out: &mut RunOutput) -> Result<()> {
    let cfg = r.cfg;
    let gap_path = r.out("analysis/gap_table.csv");
    out.gaps = r.resumable("gap_table", std::slice::from_ref(&gap_path), |cached| {
        if cached {
            return Ok(None);
        }
        let mut table = GapTable::new(cfg.delta_cap);
        for (p1, p2) in &cfg.pairs {
            let game = build_match_game(&out.models[p1], &out.models[p2], cfg.delta_cap, cfg.tie_seed)?;
            let eq = &out.matches[&(p1.clone(), p2.clone())];
            let lifted = analysis::lift_stroke_policy(&out.strokes[p2], &game, Player::Two)?;
            let g = analysis::state_gaps(&game, eq, &lifted, &solver_config(cfg, p1, p2))?;
            table.accumulate(&game, &g.gaps, |_| 1.0);
        }
        write_file(&gap_path, |w| analysis::write_gap_table(w, &table))?;
        Ok(Some(table))
    })?;

    let diff_paths: Vec<PathBuf> = cfg
        .pairs
        .iter()
        .map(|(a, b)| r.out(&format!("analysis/diff_{}.csv", pair_label(a, b))))
        .collect();
    r.resumable("diff_map", &diff_paths, |cached| {
        if cached {
            return Ok(());
        }
        for ((p1, p2), path) in cfg.pairs.iter().zip(&diff_paths) {
            let game: MatchGame<'_> = build_match_game(&out.models[p1], &out.models[p2], cfg.delta_cap, cfg.tie_seed)?;
            let eq = &out.matches[&(p1.clone(), p2.clone())];
            let map = analysis::diff_map(&out.strokes[p2], &game, eq, cfg.threshold)?;
            write_file(path, |w| analysis::write_diff_map(w, &map))?;
        }
        Ok(())
    })?;

    let cr_path = r.out("analysis/capture_rates.csv");
    r.resumable("capture_rates", std::slice::from_ref(&cr_path), |cached| {
        if cached {
            return Ok(());
        }
        let rows = analysis::capture_rate_table(
            &out.skills,
            &cfg.green,
            &cfg.capture_distances,
            cfg.capture_samples,
            derive(cfg.seed, "capture"),
        )?;
        write_file(&cr_path, |w| analysis::write_capture_rates(w, &rows))
    })
}

fn simulate(r: &mut Runner<'_>, out: &RunOutput) -> Result<()> {
    let cfg = r.cfg;
    let path = r.out("simulate.csv");
    r.resumable("simulate", std::slice::from_ref(&path), |cached| {
        if cached {
            return Ok(());
        }
        let seed = derive(cfg.seed, "simulate");
        let mut rows = Vec::new();
        for (k, (p1, p2)) in cfg.pairs.iter().enumerate() {
            let game = build_match_game(&out.models[p1], &out.models[p2], cfg.delta_cap, cfg.tie_seed)?;
            let eq = &out.matches[&(p1.clone(), p2.clone())];
            for (i, &(s1, s2, delta)) in cfg.sim_starts.iter().enumerate() {
                let start = game.index(MatchState { s1, s2, delta });
                let trial_seed = derive(seed, &format!("{k}/{i}"));
                let res = analysis::simulate_match(&game, &eq.profile, &eq.profile, start, cfg.sim_trials, trial_seed)?;
                rows.push((p1, p2, s1, s2, delta, res, eq.values[start]));
            }
        }
        write_file(&path, |w| {
            writeln!(w, "player1,player2,s1,s2,delta,trials,mean,std_error,value")?;
            for (p1, p2, s1, s2, d, res, v) in &rows {
                writeln!(
                    w,
                    "{p1},{p2},{s1},{s2},{d},{},{:.4},{:.4},{v:.4}",
                    res.trials, res.mean, res.std_error
                )?;
            }
            Ok(())
        })
    })
}
