//! Areal spatial structure: adjacency, Leroux precision matrices, Gaussian
//! kernel weights and centroid geometry.

use std::collections::HashSet;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Planar centroid coordinates, all in the same length unit.
pub type Centroid = [f64; 2];

/// N areal units joined by a binary, symmetric neighbourhood relation.
#[derive(Debug, Clone, PartialEq)]
pub struct ArealGraph {
    n_areas: usize,
    /// Each undirected edge once, stored as `(min, max)`.
    edges: Vec<(usize, usize)>,
    /// Sorted neighbour list per area.
    neighbors: Vec<Vec<usize>>,
    centroids: Option<Vec<Centroid>>,
}

/// Builds a graph from an undirected edge list.
///
/// Self-loops, out-of-range indices and duplicate edges (in either
/// orientation) are rejected. A disconnected graph is accepted but logged,
/// since an intrinsic CAR prior is then improper on every component.
pub fn build_graph(n_areas: usize, edges: &[(usize, usize)]) -> Result<ArealGraph> {
    if n_areas == 0 {
        return Err(Error::InvalidConfig("a graph needs at least one area".into()));
    }
    let mut seen = HashSet::with_capacity(edges.len());
    let mut neighbors = vec![Vec::new(); n_areas];
    let mut stored = Vec::with_capacity(edges.len());
    for &(i, j) in edges {
        if i == j {
            return Err(Error::InvalidEdge(i, j, "self-loop"));
        }
        if i >= n_areas || j >= n_areas {
            return Err(Error::InvalidEdge(i, j, "area index out of range"));
        }
        let key = (i.min(j), i.max(j));
        if !seen.insert(key) {
            return Err(Error::InvalidEdge(i, j, "duplicate edge"));
        }
        stored.push(key);
        neighbors[i].push(j);
        neighbors[j].push(i);
    }
    for list in &mut neighbors {
        list.sort_unstable();
    }
    stored.sort_unstable();
    let graph = ArealGraph {
        n_areas,
        edges: stored,
        neighbors,
        centroids: None,
    };
    let components = graph.connected_components();
    if components.len() > 1 {
        log::warn!(
            "adjacency graph has {} connected components; intrinsic CAR terms are improper on each",
            components.len()
        );
    }
    Ok(graph)
}

impl ArealGraph {
    pub fn n_areas(&self) -> usize {
        self.n_areas
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn neighbor_count(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn neighbor_counts(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn centroids(&self) -> Option<&[Centroid]> {
        self.centroids.as_deref()
    }

    /// Attach centroid coordinates (one per area, finite).
    pub fn with_centroids(mut self, centroids: Vec<Centroid>) -> Result<Self> {
        if centroids.len() != self.n_areas {
            return Err(Error::ShapeMismatch(centroids.len(), self.n_areas));
        }
        if centroids.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidConfig("centroid coordinates must be finite".into()));
        }
        self.centroids = Some(centroids);
        Ok(self)
    }

    /// Connected components as sorted lists of area indices.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut label = vec![usize::MAX; self.n_areas];
        let mut components = Vec::new();
        for start in 0..self.n_areas {
            if label[start] != usize::MAX {
                continue;
            }
            let id = components.len();
            let mut members = vec![start];
            label[start] = id;
            let mut head = 0;
            while head < members.len() {
                let v = members[head];
                head += 1;
                for &w in &self.neighbors[v] {
                    if label[w] == usize::MAX {
                        label[w] = id;
                        members.push(w);
                    }
                }
            }
            members.sort_unstable();
            components.push(members);
        }
        components
    }

    /// Eigenvalues of the graph Laplacian `diag(W1) - W`, ascending.
    pub fn laplacian_eigenvalues(&self) -> Vec<f64> {
        let n = self.n_areas;
        let mut lap = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            lap[(i, i)] = self.neighbor_count(i) as f64;
        }
        for &(i, j) in &self.edges {
            lap[(i, j)] = -1.0;
            lap[(j, i)] = -1.0;
        }
        let mut eig: Vec<f64> = SymmetricEigen::new(lap)
            .eigenvalues
            .iter()
            // the Laplacian is PSD; clip round-off below zero
            .map(|v| v.max(0.0))
            .collect();
        eig.sort_by(f64::total_cmp);
        eig
    }

    /// Euclidean distance between two centroids.
    pub fn distance(&self, i: usize, j: usize) -> Result<f64> {
        let c = self.centroids.as_ref().ok_or(Error::MissingCentroids)?;
        Ok(euclidean(c[i], c[j]))
    }

    /// Largest pairwise centroid distance.
    pub fn max_distance(&self) -> Result<f64> {
        let c = self.centroids.as_ref().ok_or(Error::MissingCentroids)?;
        let mut max: f64 = 0.0;
        for i in 0..c.len() {
            for j in (i + 1)..c.len() {
                max = max.max(euclidean(c[i], c[j]));
            }
        }
        Ok(max)
    }
}

pub fn euclidean(a: Centroid, b: Centroid) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Symmetric sparse matrix in compressed-row form (both triangles stored).
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePrecision {
    dimension: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl SparsePrecision {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// `(col, value)` pairs of row `i`, columns ascending.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_start[i]..self.row_start[i + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    /// All stored `(row, col, value)` triples.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        (0..self.dimension)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .collect()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        self.get(i, i)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dimension, self.dimension);
        for (i, j, v) in self.entries() {
            m[(i, j)] = v;
        }
        m
    }

    /// `x' Q y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.dimension)
            .map(|i| x[i] * self.row(i).map(|(j, v)| v * y[j]).sum::<f64>())
            .sum()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.to_dense().cholesky().is_some()
    }
}

/// `Q(W, rho) = rho (diag(W1) - W) + (1 - rho) I`.
pub fn leroux_precision(graph: &ArealGraph, rho: f64) -> Result<SparsePrecision> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::RhoOutOfRange(rho, "[0, 1]"));
    }
    let n = graph.n_areas();
    let mut row_start = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(n + 2 * graph.edges().len());
    let mut values = Vec::with_capacity(cols.capacity());
    row_start.push(0);
    for i in 0..n {
        let diag = rho * graph.neighbor_count(i) as f64 + (1.0 - rho);
        let mut placed_diag = false;
        for &j in graph.neighbors(i) {
            if !placed_diag && j > i {
                cols.push(i);
                values.push(diag);
                placed_diag = true;
            }
            cols.push(j);
            values.push(-rho);
        }
        if !placed_diag {
            cols.push(i);
            values.push(diag);
        }
        row_start.push(cols.len());
    }
    Ok(SparsePrecision {
        dimension: n,
        row_start,
        cols,
        values,
    })
}

/// Conditional mean and variance of `phi[i]` given all other entries under the
/// Leroux CAR prior with variance `tau2`.
///
/// An island (no neighbours) under the intrinsic limit `rho = 1` has no
/// defined conditional; it is taken to be N(0, tau2).
pub fn full_conditional_params(
    graph: &ArealGraph,
    rho: f64,
    tau2: f64,
    phi: &[f64],
    i: usize,
) -> Result<(f64, f64)> {
    if phi.len() != graph.n_areas() {
        return Err(Error::ShapeMismatch(phi.len(), graph.n_areas()));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::RhoOutOfRange(rho, "[0, 1]"));
    }
    let neighbours = graph.neighbors(i);
    let denom = rho * neighbours.len() as f64 + 1.0 - rho;
    if denom <= 0.0 {
        return Ok((0.0, tau2));
    }
    let sum: f64 = neighbours.iter().map(|&j| phi[j]).sum();
    Ok((rho * sum / denom, tau2 / denom))
}

/// `log det Q(W, rho)` from precomputed Laplacian eigenvalues.
pub fn leroux_log_det(laplacian_eigenvalues: &[f64], rho: f64) -> f64 {
    laplacian_eigenvalues
        .iter()
        .map(|nu| (rho * nu + 1.0 - rho).ln())
        .sum()
}

/// Row-normalized Gaussian kernel weights `f(d_ij | rho)` with zero diagonal,
/// stored sparsely by row and by column.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
    cols: Vec<Vec<(usize, f64)>>,
}

/// Normalized weights below this are dropped (and the row renormalized).
pub const KERNEL_TRUNCATION: f64 = 1e-12;

impl KernelMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Non-zero `(j, f(d_ij))` entries of row `i`.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// Non-zero `(i, f(d_ij))` entries of column `j`.
    pub fn col(&self, j: usize) -> &[(usize, f64)] {
        &self.cols[j]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .iter()
            .find(|&&(c, _)| c == j)
            .map_or(0.0, |&(_, w)| w)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// `out = K x` for one period's latent amplitudes.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.rows[i].iter().map(|&(j, w)| w * x[j]).sum();
        }
    }
}

pub fn kernel_weights(centroids: &[Centroid], rho: f64) -> Result<KernelMatrix> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::RhoOutOfRange(rho, "(0, inf)"));
    }
    if centroids.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::InvalidConfig("centroid coordinates must be finite".into()));
    }
    let n = centroids.len();
    let mut rows = Vec::with_capacity(n);
    let mut cols = vec![Vec::new(); n];
    let mut logw = vec![0.0; n];
    for i in 0..n {
        let mut max = f64::NEG_INFINITY;
        for (j, w) in logw.iter_mut().enumerate() {
            if j == i {
                *w = f64::NEG_INFINITY;
                continue;
            }
            let d = euclidean(centroids[i], centroids[j]);
            *w = -d * d / (2.0 * rho);
            max = max.max(*w);
        }
        let total: f64 = logw.iter().map(|w| (w - max).exp()).sum();
        let mut row: Vec<(usize, f64)> = logw
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(j, w)| (j, (w - max).exp() / total))
            .filter(|&(_, w)| w >= KERNEL_TRUNCATION)
            .collect();
        let kept: f64 = row.iter().map(|&(_, w)| w).sum();
        for entry in &mut row {
            entry.1 /= kept;
            cols[entry.0].push((i, entry.1));
        }
        rows.push(row);
    }
    Ok(KernelMatrix { n, rows, cols })
}

/// Reads an adjacency CSV (`area_i,area_j`, 0-based) into a graph.
pub fn read_adjacency_csv(path: &Path, n_areas: usize) -> Result<ArealGraph> {
    let mut reader = csv::Reader::from_path(path)?;
    check_header(path, reader.headers()?, &["area_i", "area_j"])?;
    let mut edges = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let parse = |k: usize| -> Result<usize> {
            record[k].trim().parse().map_err(|_| {
                Error::parse(path, format!("row {}: `{}` is not an area index", line + 2, &record[k]))
            })
        };
        edges.push((parse(0)?, parse(1)?));
    }
    build_graph(n_areas, &edges)
}

/// Reads a centroid CSV (`area_id,x,y`) ordered to match `area_ids`.
pub fn read_centroids_csv(path: &Path, area_ids: &[String]) -> Result<Vec<Centroid>> {
    let mut reader = csv::Reader::from_path(path)?;
    check_header(path, reader.headers()?, &["area_id", "x", "y"])?;
    let mut found: Vec<Option<Centroid>> = vec![None; area_ids.len()];
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let id = record[0].trim();
        let idx = area_ids
            .iter()
            .position(|a| a == id)
            .ok_or_else(|| Error::parse(path, format!("row {}: unknown area `{id}`", line + 2)))?;
        let coord = |k: usize| -> Result<f64> {
            record[k]
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, format!("row {}: bad coordinate `{}`", line + 2, &record[k])))
        };
        found[idx] = Some([coord(1)?, coord(2)?]);
    }
    found
        .into_iter()
        .zip(area_ids)
        .map(|(c, id)| c.ok_or_else(|| Error::parse(path, format!("no centroid for area `{id}`"))))
        .collect()
}

pub(crate) fn check_header(path: &Path, header: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let got: Vec<&str> = header.iter().map(str::trim).collect();
    if got != expected {
        return Err(Error::parse(
            path,
            format!("expected header `{}`, found `{}`", expected.join(","), got.join(",")),
        ));
    }
    Ok(())
}
