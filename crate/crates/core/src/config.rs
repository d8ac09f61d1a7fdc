//! Run configuration: a flat `key = value` text file with `#` comments.
//!
//! ```text
//! players = Johnson, Els
//! seed = 2024
//! grid.delta = 20
//! match.pairs = Johnson:Els
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::physics::GreenModel;
use crate::players;
use crate::transitions::Discretization;

/// Key → (line, raw value).
pub type KeyValues = BTreeMap<String, (usize, String)>;

pub fn parse_key_values(path: &Path, text: &str) -> Result<KeyValues> {
    let mut out = KeyValues::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(path, i + 1, format!("expected `key = value`, got {line:?}")))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::parse(path, i + 1, "empty key"));
        }
        if out.insert(k.to_string(), (i + 1, v.trim().to_string())).is_some() {
            return Err(Error::parse(path, i + 1, format!("duplicate key `{k}`")));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Source of the config, for error messages.
    pub path: PathBuf,
    pub players: Vec<String>,
    /// `player,angle_sd` table; bundled values when absent.
    pub angle_table: Option<PathBuf>,
    /// `player,hole_in,target_in,sd_in` table; bundled values when absent.
    pub profile_table: Option<PathBuf>,
    /// Raw putt records to fit skills from.
    pub raw_putts: Option<PathBuf>,
    pub fit_distances: Vec<f64>,
    pub fit_window: usize,
    /// Hand-supplied transition models per player: (csv, metadata).
    pub transition_files: BTreeMap<String, (PathBuf, PathBuf)>,
    pub green: GreenModel,
    pub grid: Discretization,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub delta_cap: usize,
    pub tie_seed: u64,
    pub pairs: Vec<(String, String)>,
    pub threshold: f64,
    pub capture_distances: Vec<f64>,
    pub capture_samples: usize,
    pub sim_trials: usize,
    /// Simulation starts as `(s1, s2, delta)`.
    pub sim_starts: Vec<(usize, usize, i32)>,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub coarse: bool,
    pub out: Option<PathBuf>,
}

struct Reader<'a> {
    path: &'a Path,
    kv: KeyValues,
}

impl Reader<'_> {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.kv.remove(key)
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str, default: Option<T>) -> Result<T> {
        match self.take(key) {
            Some((line, v)) => v
                .parse()
                .map_err(|_| Error::parse(self.path, line, format!("`{key}`: cannot parse {v:?}"))),
            None => default.ok_or_else(|| Error::parse(self.path, 0, format!("missing required key `{key}`"))),
        }
    }

    fn list<T: std::str::FromStr>(&mut self, key: &str, default: Vec<T>) -> Result<Vec<T>> {
        match self.take(key) {
            Some((line, v)) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse()
                        .map_err(|_| Error::parse(self.path, line, format!("`{key}`: cannot parse {s:?}")))
                })
                .collect(),
            None => Ok(default),
        }
    }

    fn file(&mut self, key: &str, base: &Path) -> Result<Option<PathBuf>> {
        let Some((line, v)) = self.take(key) else {
            return Ok(None);
        };
        let p = base.join(v);
        if !p.exists() {
            return Err(Error::parse(
                self.path,
                line,
                format!("`{key}`: file {} does not exist", p.display()),
            ));
        }
        Ok(Some(p))
    }
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(path, &text, overrides)
    }

    pub fn from_text(path: &Path, text: &str, overrides: &Overrides) -> Result<Self> {
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        let mut r = Reader {
            path,
            kv: parse_key_values(path, text)?,
        };
        let players: Vec<String> = r.list("players", vec![])?;
        if players.is_empty() {
            return Err(Error::parse(path, 0, "`players` must name at least one player"));
        }
        let angle_table = r.file("skills.angle_sd", &base)?;
        let profile_table = r.file("skills.profiles", &base)?;
        let raw_putts = r.file("fit.putts", &base)?;
        let fit_distances = r.list("fit.distances", vec![40.0, 100.0, 200.0, 400.0, 800.0])?;
        let fit_window = r.parse("fit.window", Some(crate::skill::DEFAULT_WINDOW))?;

        let mut transition_files = BTreeMap::new();
        for p in &players {
            if let Some(csv) = r.file(&format!("player.{p}.transitions"), &base)? {
                let meta = match r.file(&format!("player.{p}.transitions_meta"), &base)? {
                    Some(m) => m,
                    None => csv.with_extension("meta"),
                };
                transition_files.insert(p.clone(), (csv, meta));
            }
        }

        let d = GreenModel::default();
        let green = GreenModel::new(
            r.parse("green.k_friction", Some(d.k_friction))?,
            r.parse("green.hole_radius", Some(d.hole_radius))?,
            r.parse("green.max_capture_speed", Some(d.max_capture_speed))?,
        )?;
        let std = Discretization::standard();
        let mut grid = Discretization::new(
            r.parse("grid.delta", Some(std.delta))?,
            r.parse("grid.max_dist", Some(std.max_dist))?,
            r.parse("grid.n_offsets", Some(std.n_offsets))?,
        )?;
        if overrides.coarse {
            grid = Discretization::coarse(&green);
        }
        grid.check_green(&green)?;

        let seed: u64 = r.parse("seed", None)?;
        let seed = overrides.seed.unwrap_or(seed);
        let samples = r.parse("transitions.samples", Some(1000))?;
        let tol = r.parse("solver.tol", Some(1e-9))?;
        let delta_cap: usize = r.parse("match.delta_cap", Some(5))?;
        let tie_seed = r.parse("match.tie_seed", Some(seed))?;

        let default_pairs: Vec<(String, String)> = {
            let bundled: Vec<_> = players::SCENARIOS
                .iter()
                .filter(|(a, b)| players.iter().any(|p| p == a) && players.iter().any(|p| p == b))
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect();
            if bundled.is_empty() {
                players.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect()
            } else {
                bundled
            }
        };
        let pairs = match r.take("match.pairs") {
            None => default_pairs,
            Some((line, v)) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    let (a, b) = s
                        .split_once(':')
                        .ok_or_else(|| Error::parse(path, line, format!("pair {s:?} is not `p1:p2`")))?;
                    let (a, b) = (a.trim().to_string(), b.trim().to_string());
                    if !players.contains(&a) || !players.contains(&b) {
                        return Err(Error::parse(path, line, format!("pair {s:?} names an unlisted player")));
                    }
                    Ok((a, b))
                })
                .collect::<Result<_>>()?,
        };

        let threshold = r.parse("analysis.threshold", Some(crate::analysis::DEFAULT_THRESHOLD_IN))?;
        let capture_distances = r.list("analysis.capture_distances", vec![100.0, 200.0, 400.0, 800.0])?;
        let capture_samples = r.parse("analysis.capture_samples", Some(10_000))?;
        let sim_trials = r.parse("simulate.trials", Some(100_000))?;
        let sim_starts: Vec<(usize, usize, i32)> = match r.take("simulate.starts") {
            None => vec![(5, 5, 0)],
            Some((line, v)) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
                    let bad = || Error::parse(path, line, format!("start {s:?} is not `s1:s2:delta`"));
                    if parts.len() != 3 {
                        return Err(bad());
                    }
                    Ok((
                        parts[0].parse().map_err(|_| bad())?,
                        parts[1].parse().map_err(|_| bad())?,
                        parts[2].parse().map_err(|_| bad())?,
                    ))
                })
                .collect::<Result<_>>()?,
        };
        for &(s1, s2, d) in &sim_starts {
            if s1 > grid.n_states || s2 > grid.n_states || d.unsigned_abs() as usize > delta_cap {
                return Err(Error::parse(
                    path,
                    0,
                    format!("simulation start ({s1}, {s2}, {d}) is outside the game"),
                ));
            }
        }
        let out_default = r
            .take("out")
            .map(|(_, v)| base.join(v))
            .unwrap_or_else(|| base.join("out"));
        let out = overrides.out.clone().unwrap_or(out_default);

        if let Some((k, (line, _))) = r.kv.into_iter().next() {
            return Err(Error::parse(path, line, format!("unknown key `{k}`")));
        }
        Ok(Self {
            path: path.to_path_buf(),
            players,
            angle_table,
            profile_table,
            raw_putts,
            fit_distances,
            fit_window,
            transition_files,
            green,
            grid,
            samples,
            seed,
            tol,
            delta_cap,
            tie_seed,
            pairs,
            threshold,
            capture_distances,
            capture_samples,
            sim_trials,
            sim_starts,
            out,
        })
    }

    /// Canonical rendering of every setting that affects outputs. Paths are
    /// left out; callers hash the referenced files' contents instead.
    pub fn canonical(&self) -> String {
        let mut c = self.clone();
        c.path = PathBuf::new();
        c.out = PathBuf::new();
        for p in [&mut c.angle_table, &mut c.profile_table, &mut c.raw_putts]
            .into_iter()
            .flatten()
        {
            *p = PathBuf::new();
        }
        for (csv, meta) in c.transition_files.values_mut() {
            *csv = PathBuf::new();
            *meta = PathBuf::new();
        }
        format!("{c:?}")
    }
}
