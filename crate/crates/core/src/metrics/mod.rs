//! Fit and smoothness statistics of reconstructed meshes.

mod curvature;
mod distance;

use std::fmt::Write;

pub use curvature::{curvature_stats, vertex_curvatures, CurvatureStats, VertexCurvature};
pub use distance::{
    closest_point_on_triangle, point_triangle_distance_squared, rms_distance, rms_distance_brute_force,
    TriangleBvh,
};

use crate::io::{CoordinateSpace, SampleSet};
use crate::{Error, Result, TriangleMesh};

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub label: String,
    pub triangles: usize,
    pub rms: f64,
    pub curvature: CurvatureStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

const COLUMNS: [&str; 9] = [
    "model",
    "triangles",
    "rms",
    "avg_mean",
    "max_mean",
    "avg_gauss",
    "max_gauss",
    "excluded_vertices",
    "degenerate_triangles",
];

impl ReportRow {
    pub fn compute(label: impl Into<String>, mesh: &TriangleMesh, samples: &SampleSet) -> Result<Self> {
        if samples.space != CoordinateSpace::World {
            return Err(Error::InvalidParameter("metrics expect world-space samples".into()));
        }
        Ok(ReportRow {
            label: label.into(),
            triangles: mesh.triangles.len(),
            rms: rms_distance(samples.points(), mesh)?,
            curvature: curvature_stats(mesh)?,
        })
    }

    fn cells(&self) -> [String; 9] {
        let c = &self.curvature;
        [
            self.label.clone(),
            self.triangles.to_string(),
            format!("{:.6}", self.rms),
            format!("{:.6}", c.avg_mean),
            format!("{:.6}", c.max_mean),
            format!("{:.6}", c.avg_gauss),
            format!("{:.6}", c.max_gauss),
            c.excluded_vertices.to_string(),
            c.degenerate_triangles.to_string(),
        ]
    }
}

/// Computes one row per `(label, mesh, samples)`.
pub fn report(rows: &[(&str, &TriangleMesh, &SampleSet)]) -> Result<Report> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter("report needs at least one row".into()));
    }
    Ok(Report {
        rows: rows
            .iter()
            .map(|(label, mesh, samples)| ReportRow::compute(*label, mesh, samples))
            .collect::<Result<_>>()?,
    })
}

impl Report {
    /// Column-aligned text. Distances are in the input's units, mean
    /// curvature in 1/unit and Gaussian curvature in 1/unit^2.
    pub fn to_text(&self) -> String {
        let cells: Vec<[String; 9]> = self.rows.iter().map(ReportRow::cells).collect();
        let widths: Vec<usize> = (0..COLUMNS.len())
            .map(|c| cells.iter().map(|r| r[c].len()).chain([COLUMNS[c].len()]).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        let line = |out: &mut String, row: &[&str]| {
            for (c, cell) in row.iter().enumerate() {
                if c == 0 {
                    let _ = write!(out, "{cell:<w$}", w = widths[c]);
                } else {
                    let _ = write!(out, "  {cell:>w$}", w = widths[c]);
                }
            }
            out.push('\n');
        };
        line(&mut out, &COLUMNS);
        for r in &cells {
            line(&mut out, &r.iter().map(String::as_str).collect::<Vec<_>>());
        }
        out
    }

    /// Tab-separated: one header line, then one line per row.
    pub fn to_tsv(&self) -> String {
        let mut out = COLUMNS.join("\t");
        out.push('\n');
        for r in &self.rows {
            let c = &r.curvature;
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.label,
                r.triangles,
                r.rms,
                c.avg_mean,
                c.max_mean,
                c.avg_gauss,
                c.max_gauss,
                c.excluded_vertices,
                c.degenerate_triangles
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::icosphere;
    use crate::{Sample, Vec3};
    use nalgebra::{Rotation3, Unit};

    fn vertex_samples(m: &TriangleMesh) -> SampleSet {
        m.vertices.iter().map(|&v| Sample::new(v, v.normalize())).collect()
    }

    #[test]
    fn single_row_report() {
        let m = icosphere(2.0, 2);
        let s = vertex_samples(&m);
        let r = report(&[("(4)", &m, &s)]).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].triangles, 320);
        assert_eq!(r.rows[0].rms, 0.0);
        let tsv = r.to_tsv();
        let lines: Vec<&str> = tsv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].split('\t').count(), 9);
        assert_eq!(lines[1].split('\t').count(), 9);
        assert!(lines[1].starts_with("(4)\t320\t0\t"));
        let text = r.to_text();
        assert_eq!(text.lines().count(), 2);
        let header = text.lines().next().unwrap();
        assert!(header.starts_with("model"));
        assert_eq!(text.lines().nth(1).unwrap().len(), header.len());
        assert!(report(&[]).is_err());
    }

    #[test]
    fn rms_is_rigid_invariant() {
        let m = icosphere(1.5, 2);
        let pts: Vec<Vec3> = (0..200)
            .map(|i| {
                let t = i as f64 * 0.37;
                Vec3::new(t.sin(), (1.3 * t).cos(), (0.7 * t).sin()) * 2.0
            })
            .collect();
        let base = rms_distance(&pts, &m).unwrap();
        let rot = Rotation3::from_axis_angle(&Unit::new_normalize(Vec3::new(1.0, 2.0, -0.5)), 0.83);
        let shift = Vec3::new(10.0, -3.0, 4.5);
        let mut moved = m.clone();
        moved.map_vertices(|v| rot * v + shift);
        let moved_pts: Vec<Vec3> = pts.iter().map(|p| rot * p + shift).collect();
        let after = rms_distance(&moved_pts, &moved).unwrap();
        assert!((after - base).abs() <= 1e-9 * base);
    }

    #[test]
    fn sample_above_large_triangle() {
        let m = TriangleMesh::new(
            vec![Vec3::new(-100.0, -100.0, 0.0), Vec3::new(100.0, -100.0, 0.0), Vec3::new(0.0, 100.0, 0.0)],
            vec![[0, 1, 2]],
        );
        let d = rms_distance(&[Vec3::new(1.0, 2.0, 0.75)], &m).unwrap();
        assert!((d - 0.75).abs() < 1e-15);
    }
}
