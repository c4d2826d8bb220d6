//! CSV and JSON persistence for profiles, gauge fields and run records.
//!
//! A profile is stored as `r,v1,v2,v3` rows plus a sidecar
//! `<name>.json` holding the grid. Reading checks that the stored radii match
//! the sidecar grid.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowRecord;
use crate::gauge::GaugeField;
use crate::geometry::SphereProfile;
use crate::grid::{GridSpec, RadialGrid};
use crate::vec3::Vec3;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
struct ProfileRow {
    r: f64,
    v1: f64,
    v2: f64,
    v3: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileMeta {
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn write_profile(path: &Path, profile: &SphereProfile, t: Option<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (r, v) in profile.grid().r().iter().zip(profile.values()) {
        w.serialize(ProfileRow { r: *r, v1: v[0], v2: v[1], v3: v[2] })?;
    }
    w.flush()?;
    let meta = ProfileMeta { grid: profile.grid().spec(), t };
    write_json(&sidecar_path(path), &meta)
}

pub fn read_profile(path: &Path) -> Result<(SphereProfile, ProfileMeta)> {
    let meta: ProfileMeta = read_json(&sidecar_path(path))?;
    let grid = RadialGrid::from_spec(meta.grid)?.shared();
    let mut rdr = csv::Reader::from_path(path)?;
    let mut v = Vec::with_capacity(grid.n());
    for (j, row) in rdr.deserialize::<ProfileRow>().enumerate() {
        let row = row?;
        if j >= grid.n() {
            return Err(Error::GridMismatch(format!("more than {} rows", grid.n())));
        }
        let r = grid.r()[j];
        if (row.r - r).abs() > 1e-9 * r.max(1.0) {
            return Err(Error::GridMismatch(format!("row {j}: r = {} but grid has {r}", row.r)));
        }
        v.push(Vec3::new(row.v1, row.v2, row.v3));
    }
    grid.check_len(v.len())?;
    Ok((SphereProfile::new(grid, v)?, meta))
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
struct GaugeRow {
    r: f64,
    q_re: f64,
    q_im: f64,
    nu_re: f64,
    nu_im: f64,
}

pub fn write_gauge(path: &Path, g: &GaugeField) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for ((r, q), nu) in g.grid.r().iter().zip(&g.q).zip(&g.nu) {
        w.serialize(GaugeRow { r: *r, q_re: q.re, q_im: q.im, nu_re: nu.re, nu_im: nu.im })?;
    }
    w.flush()?;
    Ok(())
}

/// One CSV row per item, header from the field names.
pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_records(path: &Path, records: &[FlowRecord]) -> Result<()> {
    write_rows(path, records)
}

pub fn read_records(path: &Path) -> Result<Vec<FlowRecord>> {
    let mut rdr = csv::Reader::from_path(path)?;
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let f = File::open(path)?;
    Ok(serde_json::from_reader(std::io::BufReader::new(f))?)
}
