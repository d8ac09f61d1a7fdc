//! Grid discretization of the green and Monte Carlo estimation of the
//! stroke-play transition model.
//!
//! State `s` is a ball `s·delta` inches from the hole (state 0 is the hole).
//! Action `j` in state `s` aims to roll the ball `(s + j)·delta` inches, i.e.
//! `j·delta` inches past the hole.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::par;
use crate::physics::GreenModel;
use crate::rng::substream;
use crate::skill::{records, PlayerSkill, PuttOutcome};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization {
    pub delta: f64,
    pub max_dist: f64,
    pub n_states: usize,
    /// Largest aim offset `m`; actions are `0..=m`.
    pub n_offsets: usize,
}

impl Discretization {
    pub fn new(delta: f64, max_dist: f64, n_offsets: usize) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite() && max_dist > 0.0 && max_dist.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "grid step and max distance must be positive (delta={delta}, max_dist={max_dist})"
            )));
        }
        let ratio = max_dist / delta;
        let n_states = ratio.round();
        if (ratio - n_states).abs() > 1e-9 || n_states < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "max distance {max_dist} is not a whole number of {delta}-inch steps"
            )));
        }
        Ok(Self {
            delta,
            max_dist,
            n_states: n_states as usize,
            n_offsets,
        })
    }

    /// 5-inch grid out to 800 inches with offsets up to 110 inches.
    pub fn standard() -> Self {
        Self::new(5.0, 800.0, 22).unwrap()
    }

    /// 20-inch grid out to 800 inches with as many offsets as the green
    /// allows.
    pub fn coarse(green: &GreenModel) -> Self {
        Self::new(20.0, 800.0, (green.max_overshoot() / 20.0).floor() as usize).unwrap()
    }

    /// Checks that the largest offset can still drop.
    pub fn check_green(&self, green: &GreenModel) -> Result<()> {
        let reach = self.n_offsets as f64 * self.delta;
        if reach > green.max_overshoot() + 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "offsets reach {reach} in past the hole, beyond the {:.2} in capture range",
                green.max_overshoot()
            )));
        }
        Ok(())
    }

    pub fn n_actions(&self) -> usize {
        self.n_offsets + 1
    }

    pub fn distance(&self, state: usize) -> f64 {
        state as f64 * self.delta
    }

    /// Nearest grid state to a distance in inches, ties rounding up,
    /// clamped to the outermost state.
    pub fn state_of(&self, dist: f64) -> usize {
        ((dist / self.delta + 0.5).floor().max(0.0) as usize).min(self.n_states)
    }
}

/// Sparse row: `(destination state, probability)`, destinations ascending.
pub type Row = Vec<(u32, f64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionModel {
    pub player: String,
    pub disc: Discretization,
    rows: Vec<Row>,
    /// Putts simulated per row; zero for hand-built models.
    pub sample_count: usize,
    pub seed: u64,
}

impl TransitionModel {
    /// Wraps hand-built rows, indexed `(s - 1)·(m + 1) + j`.
    pub fn from_rows(player: impl Into<String>, disc: Discretization, rows: Vec<Row>) -> Result<Self> {
        Self::checked(player.into(), disc, rows, 0, 0)
    }

    fn checked(player: String, disc: Discretization, rows: Vec<Row>, sample_count: usize, seed: u64) -> Result<Self> {
        let expected = disc.n_states * disc.n_actions();
        if rows.len() != expected {
            return Err(Error::InvalidParameter(format!(
                "expected {expected} transition rows, got {}",
                rows.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            let sum: f64 = row.iter().map(|&(_, p)| p).sum();
            let bad_entry = row
                .iter()
                .any(|&(d, p)| d as usize > disc.n_states || !(0.0..=1.0).contains(&p));
            let sorted = row.windows(2).all(|w| w[0].0 < w[1].0);
            if bad_entry || !sorted || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "transition row {} (state {}, offset {}) is not a distribution",
                    i,
                    i / disc.n_actions() + 1,
                    i % disc.n_actions()
                )));
            }
        }
        Ok(Self {
            player,
            disc,
            rows,
            sample_count,
            seed,
        })
    }

    pub fn n_states(&self) -> usize {
        self.disc.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.disc.n_actions()
    }

    /// Row for state `s ≥ 1`, offset `j`.
    pub fn row(&self, s: usize, j: usize) -> &[(u32, f64)] {
        &self.rows[(s - 1) * self.n_actions() + j]
    }

    pub fn hole_probability(&self, s: usize, j: usize) -> f64 {
        match self.row(s, j).first() {
            Some(&(0, p)) => p,
            _ => 0.0,
        }
    }
}

/// Estimates every row by resolving `sample_count` putts. Each row draws from
/// its own sub-stream of `seed`, so the model is identical for any thread
/// count.
pub fn build_transitions(
    skill: &PlayerSkill,
    green: &GreenModel,
    disc: &Discretization,
    sample_count: usize,
    seed: u64,
) -> Result<TransitionModel> {
    if sample_count == 0 {
        return Err(Error::InvalidParameter("sample count must be at least 1".into()));
    }
    disc.check_green(green)?;
    let limit = disc.max_dist + green.max_overshoot();
    let aim_max = disc.distance(disc.n_states + disc.n_offsets);
    if aim_max > limit + 1e-9 {
        return Err(Error::AimOutOfRange {
            aim_in: aim_max,
            limit_in: limit,
        });
    }
    let m1 = disc.n_actions();
    let n = disc.n_states;
    let rows = par::map_indices(n * m1, |r| {
        let (s, j) = (r / m1 + 1, r % m1);
        let mut rng = substream(seed, &[s as u64, j as u64]);
        let hole = disc.distance(s);
        let aim = disc.distance(s + j);
        let mut counts = vec![0u32; n + 1];
        for _ in 0..sample_count {
            let dest = match skill.resolve_putt(hole, aim, green, &mut rng) {
                PuttOutcome::Holed => 0,
                PuttOutcome::Missed { rest_dist, .. } => disc.state_of(rest_dist),
            };
            counts[dest] += 1;
        }
        counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(d, &c)| (d as u32, c as f64 / sample_count as f64))
            .collect::<Row>()
    });
    TransitionModel::checked(skill.name.clone(), *disc, rows, sample_count, seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProperReport {
    /// Every stationary policy reaches the hole with probability one.
    pub is_absorbing: bool,
    /// Smallest probability, over start states and policies, of having holed
    /// within `n_states` putts.
    pub min_absorb_prob_n_steps: f64,
    /// Every row puts positive mass on holing or on a strictly closer state.
    pub every_row_progresses: bool,
}

/// Certifies inevitable termination on the estimated model.
pub fn validate_proper(tm: &TransitionModel) -> ProperReport {
    let n = tm.n_states();
    let m1 = tm.n_actions();

    let every_row_progresses =
        (1..=n).all(|s| (0..m1).all(|j| tm.row(s, j).iter().any(|&(d, p)| (d as usize) < s && p > 0.0)));

    // Largest set of states that some policy can keep itself inside forever.
    let mut trapped = vec![true; n + 1];
    trapped[0] = false;
    loop {
        let mut changed = false;
        for s in 1..=n {
            if trapped[s] && !(0..m1).any(|j| tm.row(s, j).iter().all(|&(d, _)| trapped[d as usize])) {
                trapped[s] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let is_absorbing = !trapped.iter().any(|&t| t);

    // Worst-case n-step hitting probability.
    let mut hit = vec![0.0; n + 1];
    hit[0] = 1.0;
    for _ in 0..n {
        let next: Vec<f64> = (0..=n)
            .map(|s| {
                if s == 0 {
                    return 1.0;
                }
                (0..m1)
                    .map(|j| tm.row(s, j).iter().map(|&(d, p)| p * hit[d as usize]).sum::<f64>())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        hit = next;
    }
    let min_absorb_prob_n_steps = hit[1..].iter().copied().fold(f64::INFINITY, f64::min);

    ProperReport {
        is_absorbing,
        min_absorb_prob_n_steps,
        every_row_progresses,
    }
}

/// Sparse rows `state,offset,dest_state,probability`. Probabilities are
/// written in shortest round-trip form so a reload is exact.
pub fn write_transitions<W: Write>(mut w: W, tm: &TransitionModel) -> std::io::Result<()> {
    writeln!(w, "state,offset,dest_state,probability")?;
    for s in 1..=tm.n_states() {
        for j in 0..tm.n_actions() {
            for &(d, p) in tm.row(s, j) {
                writeln!(w, "{s},{j},{d},{p}")?;
            }
        }
    }
    Ok(())
}

pub fn write_metadata<W: Write>(mut w: W, tm: &TransitionModel) -> std::io::Result<()> {
    writeln!(w, "player = {}", tm.player)?;
    writeln!(w, "delta = {}", tm.disc.delta)?;
    writeln!(w, "max_dist = {}", tm.disc.max_dist)?;
    writeln!(w, "n_offsets = {}", tm.disc.n_offsets)?;
    writeln!(w, "sample_count = {}", tm.sample_count)?;
    writeln!(w, "seed = {}", tm.seed)
}

pub fn read_transitions(csv_path: &Path, meta_path: &Path) -> Result<TransitionModel> {
    let text = std::fs::read_to_string(meta_path).map_err(|e| Error::io(meta_path, e))?;
    let meta = crate::config::parse_key_values(meta_path, &text)?;
    let get = |k: &str| {
        meta.get(k)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::parse(meta_path, 0, format!("missing key `{k}`")))
    };
    let num = |k: &str| -> Result<f64> {
        let (line, v) = &meta[k];
        v.parse()
            .map_err(|_| Error::parse(meta_path, *line, format!("`{k}` is not a number")))
    };
    get("player")?;
    get("delta")?;
    get("max_dist")?;
    get("n_offsets")?;
    let disc = Discretization::new(num("delta")?, num("max_dist")?, num("n_offsets")? as usize)?;
    let sample_count = meta.get("sample_count").map_or(Ok(0.0), |_| num("sample_count"))? as usize;
    let seed = meta.get("seed").map_or(Ok(0.0), |_| num("seed"))? as u64;

    let cols = ["state", "offset", "dest_state", "probability"];
    let mut grouped: BTreeMap<(usize, usize), Row> = BTreeMap::new();
    for (line, f) in records::read_columns(csv_path, &cols)? {
        let s = records::parse_f64(csv_path, line, cols[0], &f[0])? as usize;
        let j = records::parse_f64(csv_path, line, cols[1], &f[1])? as usize;
        let d = records::parse_f64(csv_path, line, cols[2], &f[2])? as u32;
        let p = records::parse_f64(csv_path, line, cols[3], &f[3])?;
        if s == 0 || s > disc.n_states || j > disc.n_offsets {
            return Err(Error::parse(
                csv_path,
                line,
                format!("state/offset ({s}, {j}) outside the grid"),
            ));
        }
        grouped.entry((s, j)).or_default().push((d, p));
    }
    let mut rows = Vec::with_capacity(disc.n_states * disc.n_actions());
    for s in 1..=disc.n_states {
        for j in 0..disc.n_actions() {
            let mut row = grouped.remove(&(s, j)).unwrap_or_default();
            row.sort_by_key(|&(d, _)| d);
            rows.push(row);
        }
    }
    TransitionModel::checked(get("player")?.to_string(), disc, rows, sample_count, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::players;
    use crate::skill::Knot;

    fn exact_skill() -> PlayerSkill {
        PlayerSkill::new(
            "exact",
            0.0,
            vec![Knot::new(1.0, 1.0, 0.0), Knot::new(2000.0, 2000.0, 0.0)],
        )
        .unwrap()
    }

    #[test]
    fn grid_shapes() {
        let d = Discretization::standard();
        assert_eq!((d.n_states, d.n_actions()), (160, 23));
        d.check_green(&GreenModel::default()).unwrap();
        let c = Discretization::coarse(&GreenModel::default());
        assert_eq!((c.n_states, c.n_offsets), (40, 5));
        assert!(Discretization::new(7.0, 800.0, 1).is_err());
        assert!(Discretization::new(5.0, 800.0, 23)
            .unwrap()
            .check_green(&GreenModel::default())
            .is_err());
    }

    #[test]
    fn rounding_is_nearest_with_ties_up() {
        let d = Discretization::standard();
        assert_eq!(d.state_of(12.4), 2);
        assert_eq!(d.state_of(12.5), 3);
        assert_eq!(d.state_of(0.0), 0);
        assert_eq!(d.state_of(5000.0), 160);
    }

    #[test]
    fn dead_weight_putt_always_drops() {
        let tm = build_transitions(
            &exact_skill(),
            &GreenModel::default(),
            &Discretization::standard(),
            50,
            1,
        )
        .unwrap();
        assert_eq!(tm.row(20, 0), &[(0, 1.0)]);
    }

    #[test]
    fn rows_are_frequencies() {
        let j = players::builtin("Johnson").unwrap();
        let disc = Discretization::coarse(&GreenModel::default());
        let tm = build_transitions(&j, &GreenModel::default(), &disc, 1000, 9).unwrap();
        for s in 1..=tm.n_states() {
            for a in 0..tm.n_actions() {
                let row = tm.row(s, a);
                let sum: f64 = row.iter().map(|x| x.1).sum();
                assert!((sum - 1.0).abs() < 1e-12);
                for &(d, p) in row {
                    assert!(d as usize <= tm.n_states());
                    assert!(((p * 1000.0) - (p * 1000.0).round()).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn build_is_deterministic() {
        let j = players::builtin("Els").unwrap();
        let disc = Discretization::coarse(&GreenModel::default());
        let a = build_transitions(&j, &GreenModel::default(), &disc, 200, 4).unwrap();
        let b = build_transitions(&j, &GreenModel::default(), &disc, 200, 4).unwrap();
        let c = build_transitions(&j, &GreenModel::default(), &disc, 200, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn holing_probability_falls_with_distance() {
        let j = players::builtin("Johnson").unwrap();
        let disc = Discretization::coarse(&GreenModel::default());
        let n = 4000;
        let tm = build_transitions(&j, &GreenModel::default(), &disc, n, 2).unwrap();
        for a in 0..tm.n_actions() {
            for s in 1..tm.n_states() {
                let (p, q) = (tm.hole_probability(s, a), tm.hole_probability(s + 1, a));
                let se = ((p * (1.0 - p) + q * (1.0 - q)) / n as f64).sqrt();
                assert!(q <= p + 3.0 * se + 1e-12, "s={s} j={a}: {p} -> {q}");
            }
        }
    }

    #[test]
    fn johnson_from_100_inches_holes_about_41_percent() {
        let j = players::builtin("Johnson").unwrap();
        let disc = Discretization::standard();
        // offset 4 aims 120 in, the nearest grid aim to 117.84
        let tm = build_transitions(&j, &GreenModel::default(), &disc, 10_000, 17).unwrap();
        let p = tm.hole_probability(20, 4);
        assert!((p - 0.41).abs() <= 0.05, "{p}");
    }

    #[test]
    fn proper_checks() {
        let j = players::builtin("Johnson").unwrap();
        let disc = Discretization::coarse(&GreenModel::default());
        let tm = build_transitions(&j, &GreenModel::default(), &disc, 1000, 3).unwrap();
        let rep = validate_proper(&tm);
        assert!(rep.is_absorbing);
        assert!(rep.min_absorb_prob_n_steps > 0.0);

        let one = Discretization::new(5.0, 5.0, 0).unwrap();
        let tm = TransitionModel::from_rows("x", one, vec![vec![(0, 1.0)]]).unwrap();
        let rep = validate_proper(&tm);
        assert!(rep.is_absorbing && rep.every_row_progresses);
        assert_eq!(rep.min_absorb_prob_n_steps, 1.0);

        // State 2 can stay put forever under offset 1.
        let two = Discretization::new(5.0, 10.0, 1).unwrap();
        let rows = vec![vec![(0, 1.0)], vec![(0, 1.0)], vec![(0, 0.5), (2, 0.5)], vec![(2, 1.0)]];
        let tm = TransitionModel::from_rows("x", two, rows).unwrap();
        let rep = validate_proper(&tm);
        assert!(!rep.is_absorbing && !rep.every_row_progresses);
        assert_eq!(rep.min_absorb_prob_n_steps, 0.0);
    }

    #[test]
    fn bad_rows_are_rejected() {
        let one = Discretization::new(5.0, 5.0, 0).unwrap();
        assert!(TransitionModel::from_rows("x", one, vec![vec![(0, 0.5)]]).is_err());
        assert!(TransitionModel::from_rows("x", one, vec![vec![(2, 1.0)]]).is_err());
        assert!(TransitionModel::from_rows("x", one, vec![]).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let j = players::builtin("Woods").unwrap();
        let disc = Discretization::coarse(&GreenModel::default());
        let tm = build_transitions(&j, &GreenModel::default(), &disc, 333, 8).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (c, m) = (dir.path().join("t.csv"), dir.path().join("t.meta"));
        write_transitions(std::fs::File::create(&c).unwrap(), &tm).unwrap();
        write_metadata(std::fs::File::create(&m).unwrap(), &tm).unwrap();
        assert_eq!(read_transitions(&c, &m).unwrap(), tm);
    }
}
