//! Correspondence and ground-truth files, plus generic CSV output.
//!
//! Correspondence files carry the header `u1,v1,u2,v2` with one match per
//! row, in pixels relative to the principal point.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Homography, Mat3, Vec2};
use crate::robust::Correspondence;
use crate::scene::SyntheticInstance;

pub const CORRESPONDENCE_HEADER: [&str; 4] = ["u1", "v1", "u2", "v2"];

#[derive(Serialize, Deserialize)]
struct CorrRow {
    u1: f64,
    v1: f64,
    u2: f64,
    v2: f64,
}

pub fn read_correspondences(path: &Path) -> Result<Vec<Correspondence>> {
    let file = File::open(path)?;
    read_correspondences_from(BufReader::new(file))
}

pub fn read_correspondences_from(reader: impl std::io::Read) -> Result<Vec<Correspondence>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CORRESPONDENCE_HEADER) {
        return Err(Error::Parse(format!(
            "expected header `{}`, found `{}`",
            CORRESPONDENCE_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for (line, row) in rdr.deserialize::<CorrRow>().enumerate() {
        let r = row.map_err(|e| Error::Parse(format!("row {}: {e}", line + 2)))?;
        if ![r.u1, r.v1, r.u2, r.v2].iter().all(|v| v.is_finite()) {
            return Err(Error::Parse(format!("row {}: non-finite coordinate", line + 2)));
        }
        out.push(Correspondence::new(Vec2::new(r.u1, r.v1), Vec2::new(r.u2, r.v2)));
    }
    Ok(out)
}

pub fn write_correspondences(path: &Path, corrs: &[Correspondence]) -> Result<()> {
    write_correspondences_to(File::create(path)?, corrs)
}

pub fn write_correspondences_to(writer: impl Write, corrs: &[Correspondence]) -> Result<()> {
    let rows = corrs.iter().map(|c| CorrRow { u1: c.src.x, v1: c.src.y, u2: c.dst.x, v2: c.dst.y });
    write_csv(writer, &CORRESPONDENCE_HEADER, rows)
}

/// Ground truth stored next to a generated correspondence file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Row-major, unit Frobenius norm, positive determinant.
    pub h: [f64; 9],
    pub lambda: f64,
    pub lambda_p: f64,
    pub focal: f64,
}

impl GroundTruth {
    pub fn from_instance(inst: &SyntheticInstance) -> Result<Self> {
        let m = inst.gt_h.canonical()?;
        Ok(Self {
            h: std::array::from_fn(|k| m[(k / 3, k % 3)]),
            lambda: inst.gt_lambda,
            lambda_p: inst.gt_lambda_p,
            focal: inst.focal,
        })
    }

    pub fn homography(&self) -> Result<Homography> {
        Homography::new(Mat3::from_row_slice(&self.h))
    }
}

/// `dir/name.csv` → `dir/name.gt.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("gt.json")
}

pub fn write_ground_truth(path: &Path, gt: &GroundTruth) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, gt)?;
    writeln!(f)?;
    Ok(())
}

pub fn read_ground_truth(path: &Path) -> Result<GroundTruth> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

/// Writes `header` followed by one serialized row per item. The header is
/// written even when there are no rows.
pub fn write_csv<T: Serialize>(
    writer: impl Write,
    header: &[&str],
    rows: impl IntoIterator<Item = T>,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
