//! Sample files: JSON point lists and plain PBM (P1) bitmaps with a JSON
//! sidecar header.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Lattice, PointSample, Window};
use crate::error::{Error, Result};
use crate::SCHEMA_VERSION;

#[derive(Debug, Serialize, Deserialize)]
struct SampleFile {
    #[serde(default = "default_version")]
    schema_version: u32,
    d: usize,
    #[serde(default)]
    a: Option<f64>,
    #[serde(default)]
    offset: Option<Vec<f64>>,
    points: Vec<Vec<f64>>,
}

fn default_version() -> u32 {
    SCHEMA_VERSION
}

pub fn sample_to_json(sample: &PointSample) -> Result<String> {
    let file = SampleFile {
        schema_version: SCHEMA_VERSION,
        d: sample.dim(),
        a: sample.lattice().map(|l| l.spacing),
        offset: sample.lattice().map(|l| l.offset.clone()),
        points: sample.points().map(|p| p.to_vec()).collect(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn sample_from_json(text: &str) -> Result<PointSample> {
    let file: SampleFile = serde_json::from_str(text)?;
    let lattice = match (file.a, file.offset) {
        (Some(a), Some(offset)) => Some(Lattice::new(a, offset)?),
        (Some(a), None) => Some(Lattice::cubic(a, file.d)?),
        (None, Some(_)) => return Err(Error::invalid("lattice offset given without spacing `a`")),
        (None, None) => None,
    };
    PointSample::new(file.d, file.points, lattice)
}

/// Header stored next to a PBM image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PbmHeader {
    #[serde(default = "default_version")]
    pub schema_version: u32,
    pub a: f64,
    pub offset: Vec<f64>,
    pub window: Window,
}

/// Render a planar lattice sample as a P1 bitmap. Row 0 is the largest
/// second coordinate; column 0 the smallest first coordinate.
pub fn sample_to_pbm(sample: &PointSample, window: &Window) -> Result<(String, PbmHeader)> {
    let lattice = planar_lattice(sample)?;
    let ranges = lattice.index_range(window);
    let (w, h) = extent(&ranges)?;
    let mut bits = vec![false; w * h];
    for p in sample.points() {
        let k = lattice.index_of(p);
        let (col, row) = (k[0] - ranges[0].0, ranges[1].1 - k[1]);
        if col < 0 || row < 0 || col as usize >= w || row as usize >= h {
            return Err(Error::precondition("sample point outside the PBM window"));
        }
        bits[row as usize * w + col as usize] = true;
    }
    let mut out = format!("P1\n{w} {h}\n");
    for row in bits.chunks(w) {
        let line: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    let header = PbmHeader {
        schema_version: SCHEMA_VERSION,
        a: lattice.spacing,
        offset: lattice.offset.clone(),
        window: window.clone(),
    };
    Ok((out, header))
}

pub fn sample_from_pbm(pbm: &str, header: &PbmHeader) -> Result<PointSample> {
    let lattice = Lattice::new(header.a, header.offset.clone())?;
    if lattice.dim() != 2 || header.window.dim() != 2 {
        return Err(Error::invalid("PBM samples are planar"));
    }
    let ranges = lattice.index_range(&header.window);
    let (w, h) = extent(&ranges)?;

    let tokens: Vec<&str> = pbm
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split_whitespace())
        .collect();
    if tokens.first() != Some(&"P1") {
        return Err(Error::invalid("not a plain PBM (P1) file"));
    }
    let size = |i: usize| -> Result<usize> {
        tokens
            .get(i)
            .ok_or_else(|| Error::invalid("truncated PBM header"))?
            .parse()
            .map_err(|_| Error::invalid("bad PBM size"))
    };
    let (fw, fh) = (size(1)?, size(2)?);
    if (fw, fh) != (w, h) {
        return Err(Error::invalid(format!(
            "PBM is {fw}x{fh} but the sidecar window spans {w}x{h} lattice points"
        )));
    }
    // pixels may be packed without separators
    let pixels: Vec<bool> = tokens[3..]
        .iter()
        .flat_map(|t| t.chars())
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::invalid(format!("bad PBM pixel {other:?}"))),
        })
        .collect::<Result<_>>()?;
    if pixels.len() != w * h {
        return Err(Error::invalid(format!(
            "PBM has {} pixels, expected {}",
            pixels.len(),
            w * h
        )));
    }
    let mut points = Vec::new();
    for (i, &on) in pixels.iter().enumerate() {
        if on {
            let (row, col) = ((i / w) as i64, (i % w) as i64);
            points.push(lattice.point(&[ranges[0].0 + col, ranges[1].1 - row]));
        }
    }
    PointSample::new(2, points, Some(lattice))
}

fn planar_lattice(sample: &PointSample) -> Result<&Lattice> {
    let lattice = sample
        .lattice()
        .ok_or_else(|| Error::precondition("PBM export needs lattice metadata"))?;
    if sample.dim() != 2 {
        return Err(Error::invalid("PBM samples are planar"));
    }
    Ok(lattice)
}

fn extent(ranges: &[(i64, i64)]) -> Result<(usize, usize)> {
    let w = ranges[0].1 - ranges[0].0 + 1;
    let h = ranges[1].1 - ranges[1].0 + 1;
    if w <= 0 || h <= 0 {
        return Err(Error::invalid("window contains no lattice points"));
    }
    Ok((w as usize, h as usize))
}
