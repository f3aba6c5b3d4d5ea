//! File interchange: JSON for every type, CSV for point sets, measures and
//! traces. Floats are written either by the shortest round-trip formatter
//! (JSON) or with 17 significant digits (CSV), so reading back is lossless.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{BoxRegion, PointSet, DEFAULT_DEDUP_TOL};
use crate::measures::{fmt17, DiscreteMeasure};

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// Reads a file; failures are input errors, not I/O faults of the tool.
pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))
}

pub fn write_text(dir: &Path, name: &str, content: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, content)?;
    Ok(path)
}

fn csv_text(header: Vec<String>, rows: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn axis_header(dim: usize) -> Vec<String> {
    (0..dim).map(|d| format!("x{d}")).collect()
}

pub fn point_set_to_csv(ps: &PointSet) -> Result<String> {
    csv_text(axis_header(ps.dim()), ps.iter().map(|p| p.iter().map(|v| fmt17(*v)).collect()))
}

pub fn measure_to_csv(mu: &DiscreteMeasure) -> Result<String> {
    let mut header = axis_header(mu.dim());
    header.extend(["re", "im"].map(String::from));
    csv_text(
        header,
        mu.atoms().map(|(p, w)| {
            let mut row: Vec<String> = p.iter().map(|v| fmt17(*v)).collect();
            row.push(fmt17(w.re));
            row.push(fmt17(w.im));
            row
        }),
    )
}

/// Parsed CSV rows plus whether the file carries weight columns.
fn parse_csv(text: &str) -> Result<(usize, bool, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let weighted = header.iter().any(|h| h == "re");
    let dim = header.iter().filter(|h| h.starts_with('x')).count();
    if dim == 0 || header.len() != dim + if weighted { 2 } else { 0 } {
        return Err(Error::Parse(format!("unrecognised CSV header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row: std::result::Result<Vec<f64>, _> = rec.iter().map(|v| v.trim().parse::<f64>()).collect();
        rows.push(row.map_err(|e| Error::Parse(format!("bad number in CSV: {e}")))?);
    }
    Ok((dim, weighted, rows))
}

/// Tight bounding box of the rows (the CSV format carries no box).
fn bounds(dim: usize, rows: &[Vec<f64>]) -> Result<BoxRegion> {
    if rows.is_empty() {
        return Err(Error::Empty("CSV file has no rows"));
    }
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for r in rows {
        for d in 0..dim {
            lo[d] = lo[d].min(r[d]);
            hi[d] = hi[d].max(r[d]);
        }
    }
    BoxRegion::new(lo, hi)
}

pub fn point_set_from_csv(text: &str) -> Result<PointSet> {
    let (dim, _, rows) = parse_csv(text)?;
    let bbox = bounds(dim, &rows)?;
    let coords = rows.iter().flat_map(|r| r[..dim].to_vec()).collect();
    PointSet::new(dim, coords, bbox, DEFAULT_DEDUP_TOL)
}

/// Weighted CSV gives its weights; a plain point list gives the unit comb.
pub fn measure_from_csv(text: &str) -> Result<DiscreteMeasure> {
    let (dim, weighted, rows) = parse_csv(text)?;
    let bbox = bounds(dim, &rows)?;
    let coords = rows.iter().flat_map(|r| r[..dim].to_vec()).collect();
    let weights = rows
        .iter()
        .map(|r| if weighted { Complex64::new(r[dim], r[dim + 1]) } else { Complex64::new(1.0, 0.0) })
        .collect();
    DiscreteMeasure::new(dim, coords, weights, bbox, DEFAULT_DEDUP_TOL)
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// A measure file, or a point-set file read as its unit comb.
pub fn load_measure(path: &Path) -> Result<DiscreteMeasure> {
    let text = read_text(path)?;
    if is_csv(path) {
        return measure_from_csv(&text);
    }
    let value: serde_json::Value = from_json(&text)?;
    if value.get("atoms").is_some() {
        from_json(&text)
    } else if value.get("points").is_some() {
        Ok(DiscreteMeasure::unit_comb(&from_json::<PointSet>(&text)?))
    } else {
        Err(Error::Parse(format!("{} is neither a measure nor a point set", path.display())))
    }
}

/// A point-set file, or the support of a measure file.
pub fn load_point_set(path: &Path) -> Result<PointSet> {
    let text = read_text(path)?;
    if is_csv(path) {
        return point_set_from_csv(&text);
    }
    let value: serde_json::Value = from_json(&text)?;
    if value.get("points").is_some() {
        from_json(&text)
    } else if value.get("atoms").is_some() {
        Ok(from_json::<DiscreteMeasure>(&text)?.support())
    } else {
        Err(Error::Parse(format!("{} is neither a point set nor a measure", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_are_lossless() {
        let v = [0.1, 1.0 / 3.0, std::f64::consts::PI, -2.5e-7];
        let ps = PointSet::from_1d(&v, -3.2, 3.2).unwrap();
        let back = point_set_from_csv(&point_set_to_csv(&ps).unwrap()).unwrap();
        assert_eq!(back.coords(), ps.coords());

        let mu = DiscreteMeasure::from_1d(&v, &[1.0 / 7.0, -2.0, 0.3, 1e-3], -4.0, 4.0).unwrap();
        let back = measure_from_csv(&measure_to_csv(&mu).unwrap()).unwrap();
        assert_eq!(back.positions(), mu.positions());
        assert_eq!(back.weights(), mu.weights());
    }

    #[test]
    fn json_round_trips_and_detection() {
        let dir = tempfile::tempdir().unwrap();
        let ps = PointSet::from_1d(&[0.0, 0.1, 1.0 / 3.0], -1.0, 1.0).unwrap();
        let p = write_text(dir.path(), "ps.json", &to_json(&ps).unwrap()).unwrap();
        assert_eq!(load_point_set(&p).unwrap(), ps);
        let mu = load_measure(&p).unwrap();
        assert_eq!(mu.len(), 3);
        let q = write_text(dir.path(), "mu.json", &to_json(&mu).unwrap()).unwrap();
        assert_eq!(load_measure(&q).unwrap(), mu);
        assert_eq!(load_point_set(&q).unwrap().coords(), ps.coords());
        let bad = write_text(dir.path(), "bad.json", "{\"x\": 1}").unwrap();
        assert!(load_measure(&bad).is_err());
        assert!(matches!(load_measure(&dir.path().join("missing.json")), Err(Error::InvalidArgument(_))));
    }
}
