//! ASCII PLY export for visual inspection in standard viewers.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use plidar_core::geometry::PointCloud;

use super::IoError;

pub fn write_ply(pc: &PointCloud, path: &Path) -> Result<(), IoError> {
    let mut out = Vec::new();
    let has_attr = pc.attributes().is_some();
    writeln!(out, "ply").unwrap();
    writeln!(out, "format ascii 1.0").unwrap();
    writeln!(out, "element vertex {}", pc.len()).unwrap();
    writeln!(out, "property float x").unwrap();
    writeln!(out, "property float y").unwrap();
    writeln!(out, "property float z").unwrap();
    if has_attr {
        writeln!(out, "property float attribute").unwrap();
    }
    writeln!(out, "end_header").unwrap();
    for (i, p) in pc.points().iter().enumerate() {
        if has_attr {
            let a = pc.attributes().unwrap()[i];
            writeln!(out, "{} {} {} {}", p[0], p[1], p[2], a).unwrap();
        } else {
            writeln!(out, "{} {} {}", p[0], p[1], p[2]).unwrap();
        }
    }
    fs::write(path, out).map_err(|e| IoError::file(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    /// Minimal parse-back of our own output; test-only.
    fn read_ply(path: &Path) -> PointCloud {
        let text = fs::read_to_string(path).unwrap();
        let mut lines = text.lines();
        let mut n = 0usize;
        for line in lines.by_ref() {
            if let Some(rest) = line.strip_prefix("element vertex ") {
                n = rest.parse().unwrap();
            }
            if line == "end_header" {
                break;
            }
        }
        let points: Vec<[f64; 3]> = lines
            .take(n)
            .map(|l| {
                let v: Vec<f64> = l.split(' ').map(|t| t.parse().unwrap()).collect();
                [v[0], v[1], v[2]]
            })
            .collect();
        assert_eq!(points.len(), n);
        PointCloud::new(points).unwrap()
    }

    #[test]
    fn empty_cloud_header_only() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("empty.ply");
        write_ply(&PointCloud::empty(), &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("element vertex 0"));
        assert!(text.trim_end().ends_with("end_header"));
    }

    #[test]
    fn one_point_one_vertex_line() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("one.ply");
        let pc = PointCloud::new(vec![[1.0, 2.0, 3.0]]).unwrap();
        write_ply(&pc, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let body: Vec<&str> = text
            .lines()
            .skip_while(|l| *l != "end_header")
            .skip(1)
            .collect();
        assert_eq!(body, vec!["1 2 3"]);
    }

    #[test]
    fn parse_back_recovers_coordinates() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("cloud.ply");
        let pc = PointCloud::new(vec![[0.123456, -7.5, 42.0], [1e-3, 2.25, 99.75]])
            .unwrap()
            .with_attributes(vec![0.5, 0.25])
            .unwrap();
        write_ply(&pc, &path).unwrap();
        let back = read_ply(&path);
        for (a, b) in pc.points().iter().zip(back.points()) {
            for c in 0..3 {
                assert!((a[c] - b[c]).abs() < 1e-6);
            }
        }
    }
}
