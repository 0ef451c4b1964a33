use std::fmt::Write as _;
use std::path::Path;

use super::{read_file, RawPoints, SampleSet};
use crate::{Error, Result, Vec3};

pub(crate) fn read_points(path: &Path) -> Result<RawPoints> {
    let bytes = read_file(path)?;
    let text = std::str::from_utf8(&bytes).map_err(|_| Error::parse(path, 0, "not UTF-8 text"))?;
    let mut points = Vec::new();
    let mut normals = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields = line
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(path, lineno + 1, e.to_string()))?;
        if fields.len() != 6 {
            return Err(Error::parse(
                path,
                lineno + 1,
                format!("expected 6 values, found {}", fields.len()),
            ));
        }
        points.push(Vec3::new(fields[0], fields[1], fields[2]));
        normals.push(Vec3::new(fields[3], fields[4], fields[5]));
    }
    Ok(RawPoints {
        points,
        normals: Some(normals),
    })
}

pub(crate) fn write_points(samples: &SampleSet, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(samples.len() * 64);
    for s in samples.iter() {
        let (p, n) = (s.point, s.normal);
        let _ = writeln!(out, "{} {} {} {} {} {}", p.x, p.y, p.z, n.x, n.y, n.z);
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
