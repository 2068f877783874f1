//! Space-time count data: observed counts `y` and expected counts `e` on a
//! complete area × period grid.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::check_header;
use crate::output::fmt_f64;

/// Observed and expected counts for `n_areas × n_periods` cells, stored
/// area-major (`cell = area * n_periods + period`).
#[derive(Debug, Clone, PartialEq)]
pub struct StDataset {
    area_ids: Vec<String>,
    period_labels: Vec<String>,
    y: Vec<u64>,
    e: Vec<f64>,
}

impl StDataset {
    pub fn new(area_ids: Vec<String>, period_labels: Vec<String>, y: Vec<u64>, e: Vec<f64>) -> Result<Self> {
        let cells = area_ids.len() * period_labels.len();
        if cells == 0 {
            return Err(Error::InvalidConfig("dataset needs at least one area and one period".into()));
        }
        if y.len() != cells {
            return Err(Error::ShapeMismatch(y.len(), cells));
        }
        if e.len() != cells {
            return Err(Error::ShapeMismatch(e.len(), cells));
        }
        let t = period_labels.len();
        for (k, &value) in e.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NonPositiveExpected {
                    area: area_ids[k / t].clone(),
                    period: period_labels[k % t].clone(),
                    value,
                });
            }
        }
        Ok(StDataset {
            area_ids,
            period_labels,
            y,
            e,
        })
    }

    /// Dataset with integer labels `0..n_areas` and `1..=n_periods`.
    pub fn from_grid(n_areas: usize, n_periods: usize, y: Vec<u64>, e: Vec<f64>) -> Result<Self> {
        Self::new(
            (0..n_areas).map(|i| i.to_string()).collect(),
            (1..=n_periods).map(|t| t.to_string()).collect(),
            y,
            e,
        )
    }

    pub fn n_areas(&self) -> usize {
        self.area_ids.len()
    }

    pub fn n_periods(&self) -> usize {
        self.period_labels.len()
    }

    pub fn n_cells(&self) -> usize {
        self.y.len()
    }

    #[inline]
    pub fn cell(&self, area: usize, period: usize) -> usize {
        area * self.n_periods() + period
    }

    pub fn area_ids(&self) -> &[String] {
        &self.area_ids
    }

    pub fn period_labels(&self) -> &[String] {
        &self.period_labels
    }

    pub fn y(&self) -> &[u64] {
        &self.y
    }

    pub fn e(&self) -> &[f64] {
        &self.e
    }

    /// Standardised incidence ratio `y / e` for every cell.
    pub fn sir(&self) -> Vec<f64> {
        self.y.iter().zip(&self.e).map(|(&y, &e)| y as f64 / e).collect()
    }

    pub fn total_observed(&self) -> f64 {
        self.y.iter().map(|&y| y as f64).sum()
    }

    pub fn total_expected(&self) -> f64 {
        self.e.iter().sum()
    }
}

/// Loads a `area_id,period,y,e` CSV holding a complete grid.
///
/// Areas and periods are indexed in ascending order of their labels
/// (numerically when every label is an integer); adjacency and centroid files
/// refer to areas by that index.
pub fn load_dataset(path: &Path) -> Result<StDataset> {
    let mut reader = csv::Reader::from_path(path)?;
    check_header(path, reader.headers()?, &["area_id", "period", "y", "e"])?;
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let area = record[0].trim().to_string();
        let period = record[1].trim().to_string();
        let y_raw = record[2].trim();
        let y: i64 = match y_raw.parse::<i64>() {
            Ok(v) => v,
            Err(_) => match y_raw.parse::<f64>() {
                Ok(v) if v.fract() == 0.0 && v.is_finite() => v as i64,
                _ => return Err(Error::parse(path, format!("row {}: `{y_raw}` is not an integer count", line + 2))),
            },
        };
        if y < 0 {
            return Err(Error::NegativeCount { area, period, value: y });
        }
        let e: f64 = record[3]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, format!("row {}: `{}` is not a number", line + 2, &record[3])))?;
        rows.push((area, period, y as u64, e));
    }
    let area_ids = sorted_labels(rows.iter().map(|r| r.0.as_str()));
    let period_labels = sorted_labels(rows.iter().map(|r| r.1.as_str()));
    let area_index: HashMap<&str, usize> = area_ids.iter().enumerate().map(|(k, a)| (a.as_str(), k)).collect();
    let period_index: HashMap<&str, usize> =
        period_labels.iter().enumerate().map(|(k, p)| (p.as_str(), k)).collect();

    let t = period_labels.len();
    let mut y = vec![None; area_ids.len() * t];
    let mut e = vec![0.0; area_ids.len() * t];
    for (area, period, yv, ev) in &rows {
        let k = area_index[area.as_str()] * t + period_index[period.as_str()];
        if y[k].is_some() {
            return Err(Error::DuplicateCell {
                area: area.clone(),
                period: period.clone(),
            });
        }
        y[k] = Some(*yv);
        e[k] = *ev;
    }
    let y = y
        .into_iter()
        .enumerate()
        .map(|(k, v)| {
            v.ok_or_else(|| Error::MissingCell {
                area: area_ids[k / t].clone(),
                period: period_labels[k % t].clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    StDataset::new(area_ids, period_labels, y, e)
}

/// Writes the dataset in the format read by [`load_dataset`].
pub fn write_dataset(data: &StDataset, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "area_id,period,y,e")?;
    for (i, area) in data.area_ids.iter().enumerate() {
        for (t, period) in data.period_labels.iter().enumerate() {
            let k = data.cell(i, t);
            writeln!(out, "{area},{period},{},{}", data.y[k], fmt_f64(data.e[k]))?;
        }
    }
    out.flush()?;
    Ok(())
}

fn sorted_labels<'a>(labels: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut unique: Vec<String> = labels.map(str::to_string).collect();
    unique.sort();
    unique.dedup();
    if unique.iter().all(|l| l.parse::<i64>().is_ok()) {
        unique.sort_by_key(|l| l.parse::<i64>().unwrap());
    }
    unique
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &tempfile::TempDir, body: &str) -> std::path::PathBuf {
        let path = dir.path().join("counts.csv");
        fs::write(&path, body).unwrap();
        path
    }

    #[test]
    fn loads_unit_grid() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "area_id,period,y,e\n0,1,1,1\n0,2,1,1\n1,1,1,1\n1,2,1,1\n");
        let d = load_dataset(&p).unwrap();
        assert_eq!((d.n_areas(), d.n_periods()), (2, 2));
        assert!(d.sir().iter().all(|&s| s == 1.0));
    }

    #[test]
    fn sir_is_ratio() {
        let d = StDataset::from_grid(1, 1, vec![20], vec![10.0]).unwrap();
        assert_eq!(d.sir(), vec![2.0]);
    }

    #[test]
    fn incomplete_grid_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "area_id,period,y,e\n0,1,1,1\n0,2,1,1\n1,1,1,1\n");
        match load_dataset(&p) {
            Err(Error::MissingCell { area, period }) => assert_eq!((area.as_str(), period.as_str()), ("1", "2")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_values_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "area_id,period,y,e\n0,1,3,0\n");
        assert!(matches!(load_dataset(&p), Err(Error::NonPositiveExpected { .. })));
        let p = write(&dir, "area_id,period,y,e\n0,1,-3,2\n");
        assert!(matches!(load_dataset(&p), Err(Error::NegativeCount { .. })));
        let p = write(&dir, "area,period,y,e\n0,1,3,2\n");
        assert!(matches!(load_dataset(&p), Err(Error::Parse { .. })));
    }

    #[test]
    fn numeric_labels_sort_numerically() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "area_id,period,y,e\n10,1,1,1\n2,1,5,1\n");
        let d = load_dataset(&p).unwrap();
        assert_eq!(d.area_ids(), &["2".to_string(), "10".to_string()]);
        assert_eq!(d.y(), &[5, 1]);
    }

    #[test]
    fn write_then_load_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let d = StDataset::from_grid(2, 3, vec![0, 4, 9, 1, 2, 3], vec![1.5, 2.25, 0.1, 7.0, 3.0, 1e-3]).unwrap();
        let p = dir.path().join("d.csv");
        write_dataset(&d, &p).unwrap();
        let back = load_dataset(&p).unwrap();
        assert_eq!(back, d);
        let p2 = dir.path().join("d2.csv");
        write_dataset(&back, &p2).unwrap();
        assert_eq!(fs::read(&p).unwrap(), fs::read(&p2).unwrap());
    }
}
