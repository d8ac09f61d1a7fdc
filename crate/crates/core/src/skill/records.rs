//! CSV ingestion of raw putts and fitted skill tables.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use super::{Knot, PlayerSkill, PuttRecord};
use crate::error::{Error, Result};

/// Reads a headed CSV, resolving `columns` by name. Yields the 1-based line
/// number and the requested fields in `columns` order.
pub(crate) fn read_columns(path: &Path, columns: &[&str]) -> Result<Vec<(usize, Vec<String>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    let idx = columns
        .iter()
        .map(|c| {
            headers
                .iter()
                .position(|h| h == *c)
                .ok_or_else(|| Error::parse(path, 1, format!("missing column `{c}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let fields = idx.iter().map(|&i| rec.get(i).unwrap_or("").to_string()).collect();
        rows.push((line, fields));
    }
    Ok(rows)
}

pub(crate) fn parse_f64(path: &Path, line: usize, column: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(path, line, format!("column `{column}`: not a number: {raw:?}")))
}

fn parse_bool(path: &Path, line: usize, raw: &str) -> Result<bool> {
    match raw.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "t" => Ok(true),
        "0" | "false" | "no" | "f" => Ok(false),
        _ => Err(Error::parse(
            path,
            line,
            format!("column `holed`: not a boolean: {raw:?}"),
        )),
    }
}

/// Columns `player,hole_dist_in,final_x_in,final_y_in,holed`.
pub fn read_putt_records(path: &Path) -> Result<Vec<PuttRecord>> {
    let cols = ["player", "hole_dist_in", "final_x_in", "final_y_in", "holed"];
    read_columns(path, &cols)?
        .into_iter()
        .map(|(line, f)| {
            let hole_dist = parse_f64(path, line, cols[1], &f[1])?;
            if hole_dist <= 0.0 {
                return Err(Error::parse(path, line, "hole distance must be positive"));
            }
            Ok(PuttRecord {
                player: f[0].clone(),
                hole_dist,
                final_x: parse_f64(path, line, cols[2], &f[2])?,
                final_y: parse_f64(path, line, cols[3], &f[3])?,
                holed: parse_bool(path, line, &f[4])?,
            })
        })
        .collect()
}

/// Columns `player,angle_sd`, in file order.
pub fn read_angle_sds(path: &Path) -> Result<Vec<(String, f64)>> {
    read_columns(path, &["player", "angle_sd"])?
        .into_iter()
        .map(|(line, f)| Ok((f[0].clone(), parse_f64(path, line, "angle_sd", &f[1])?)))
        .collect()
}

/// Columns `player,hole_in,target_in,sd_in`, grouped by player.
pub fn read_profiles(path: &Path) -> Result<BTreeMap<String, Vec<Knot>>> {
    let cols = ["player", "hole_in", "target_in", "sd_in"];
    let mut out: BTreeMap<String, Vec<Knot>> = BTreeMap::new();
    for (line, f) in read_columns(path, &cols)? {
        let knot = Knot::new(
            parse_f64(path, line, cols[1], &f[1])?,
            parse_f64(path, line, cols[2], &f[2])?,
            parse_f64(path, line, cols[3], &f[3])?,
        );
        out.entry(f[0].clone()).or_default().push(knot);
    }
    Ok(out)
}

/// Joins per-player angle sds with their distance profiles.
pub fn skills_from_tables(
    angles: &[(String, f64)],
    profiles: &BTreeMap<String, Vec<Knot>>,
) -> Result<Vec<PlayerSkill>> {
    angles
        .iter()
        .map(|(name, sd)| {
            let profile = profiles
                .get(name)
                .ok_or_else(|| Error::InvalidParameter(format!("no distance profile for player {name}")))?;
            PlayerSkill::new(name.clone(), *sd, profile.clone())
        })
        .collect()
}

pub fn write_angle_sds<W: Write>(mut w: W, skills: &[PlayerSkill]) -> std::io::Result<()> {
    writeln!(w, "player,angle_sd")?;
    for s in skills {
        writeln!(w, "{},{:.4}", s.name, s.angle_sd)?;
    }
    Ok(())
}

pub fn write_profiles<W: Write>(mut w: W, skills: &[PlayerSkill]) -> std::io::Result<()> {
    writeln!(w, "player,hole_in,target_in,sd_in")?;
    for s in skills {
        for k in s.profile() {
            writeln!(w, "{},{:.4},{:.4},{:.4}", s.name, k.hole, k.target, k.sd)?;
        }
    }
    Ok(())
}
