//! Real-data ingestion: pixel-affinity graphs, correlation graphs from price
//! panels, and symmetrized/centered count matrices.

use crate::error::{Error, Result};
use crate::graph::SignedGraph;
use nalgebra::DMatrix;

/// Pixel neighborhood radius and exponential decay for affinity weights.
#[derive(Debug, Clone, Copy)]
pub struct ImageGraphParams {
    pub radius: f64,
    pub b: f64,
}

impl Default for ImageGraphParams {
    fn default() -> Self {
        Self { radius: 5.0, b: 14.0 }
    }
}

/// Row-major RGB image with channels in [0, 1].
#[derive(Debug, Clone)]
pub struct PixelImage {
    height: usize,
    width: usize,
    pixels: Vec<[f64; 3]>,
}

impl PixelImage {
    pub fn new(height: usize, width: usize, pixels: Vec<[f64; 3]>) -> Result<Self> {
        if pixels.len() != height * width {
            return Err(Error::DimensionMismatch(format!(
                "expected {}x{} = {} pixels, got {}",
                height,
                width,
                height * width,
                pixels.len()
            )));
        }
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixel(&self, row: usize, col: usize) -> [f64; 3] {
        self.pixels[row * self.width + col]
    }

    pub fn node_count(&self) -> usize {
        self.height * self.width
    }
}

/// Neighborhood graph over pixels (row-major node order).
///
/// Pairs within Euclidean grid distance `radius` become edges. Raw color
/// differences over all candidate pairs are z-score standardized (sample
/// standard deviation) and the weight is `exp(-b·z)`; weights can exceed 1
/// where the standardized difference is negative.
pub fn image_to_graph(img: &PixelImage, params: &ImageGraphParams) -> Result<SignedGraph> {
    if img.node_count() < 2 {
        return Err(Error::InvalidParameter(
            "image must have at least two pixels".into(),
        ));
    }
    if !(params.radius > 0.0) || !(params.b > 0.0) {
        return Err(Error::InvalidParameter(
            "radius and b must be positive".into(),
        ));
    }
    let reach = params.radius.floor() as i64;
    let r2 = params.radius * params.radius;
    // offsets on the half-plane so each pair is visited once
    let mut offsets = Vec::new();
    for dr in 0..=reach {
        let dc_start = if dr == 0 { 1 } else { -reach };
        for dc in dc_start..=reach {
            if (dr * dr + dc * dc) as f64 <= r2 {
                offsets.push((dr, dc));
            }
        }
    }

    let (h, w) = (img.height as i64, img.width as i64);
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    let mut diffs: Vec<f64> = Vec::new();
    for row in 0..h {
        for col in 0..w {
            let a = img.pixel(row as usize, col as usize);
            for &(dr, dc) in &offsets {
                let (nr, nc) = (row + dr, col + dc);
                if nr < 0 || nr >= h || nc < 0 || nc >= w {
                    continue;
                }
                let b_px = img.pixel(nr as usize, nc as usize);
                let diff = ((a[0] - b_px[0]).powi(2)
                    + (a[1] - b_px[1]).powi(2)
                    + (a[2] - b_px[2]).powi(2))
                .sqrt();
                let i = (row * w + col) as u32;
                let j = (nr * w + nc) as u32;
                pairs.push((i, j));
                diffs.push(diff);
            }
        }
    }

    let n = diffs.len();
    if n < 2 {
        return Err(Error::DegenerateImage);
    }
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n as f64 - 1.0);
    let sd = var.sqrt();
    if sd == 0.0 {
        return Err(Error::DegenerateImage);
    }

    let triples = pairs
        .into_iter()
        .zip(diffs)
        .map(|((i, j), d)| (i, j, (-params.b * (d - mean) / sd).exp()));
    SignedGraph::from_edges(img.node_count(), triples)
}

/// Instrument price panel: rows are instruments, columns are dates.
#[derive(Debug, Clone)]
pub struct TimeSeriesPanel {
    pub ids: Vec<String>,
    pub dates: Vec<String>,
    pub prices: DMatrix<f64>,
}

impl TimeSeriesPanel {
    pub fn new(ids: Vec<String>, dates: Vec<String>, prices: DMatrix<f64>) -> Result<Self> {
        if prices.nrows() != ids.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} ids but {} price rows",
                ids.len(),
                prices.nrows()
            )));
        }
        if prices.ncols() != dates.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} dates but {} price columns",
                dates.len(),
                prices.ncols()
            )));
        }
        if prices.ncols() < 3 {
            return Err(Error::InvalidParameter(
                "panel needs at least 3 dates".into(),
            ));
        }
        for i in 0..prices.nrows() {
            for t in 0..prices.ncols() {
                if !(prices[(i, t)] > 0.0) {
                    return Err(Error::NonPositivePrice {
                        instrument: i,
                        time: t,
                    });
                }
            }
        }
        Ok(Self { ids, dates, prices })
    }

    pub fn instrument_index(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }
}

/// Daily log returns `ln(P_t / P_{t-1})`, an n×(T-1) matrix.
pub fn log_returns(panel: &TimeSeriesPanel) -> Result<DMatrix<f64>> {
    let (n, t) = panel.prices.shape();
    let mut out = DMatrix::zeros(n, t - 1);
    for i in 0..n {
        for s in 1..t {
            let (prev, cur) = (panel.prices[(i, s - 1)], panel.prices[(i, s)]);
            if !(prev > 0.0) {
                return Err(Error::NonPositivePrice {
                    instrument: i,
                    time: s - 1,
                });
            }
            if !(cur > 0.0) {
                return Err(Error::NonPositivePrice {
                    instrument: i,
                    time: s,
                });
            }
            out[(i, s - 1)] = (cur / prev).ln();
        }
    }
    Ok(out)
}

/// Market-excess returns: each row minus the market return row.
pub fn excess_returns(returns: &DMatrix<f64>, market_row: &[f64]) -> Result<DMatrix<f64>> {
    if market_row.len() != returns.ncols() {
        return Err(Error::LengthMismatch {
            expected: returns.ncols(),
            got: market_row.len(),
        });
    }
    let mut out = returns.clone();
    for i in 0..out.nrows() {
        for t in 0..out.ncols() {
            out[(i, t)] -= market_row[t];
        }
    }
    Ok(out)
}

/// Full signed graph of pairwise Pearson correlations between return rows.
pub fn pearson_correlation_graph(returns: &DMatrix<f64>) -> Result<SignedGraph> {
    let (n, t) = returns.shape();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "need at least two instruments".into(),
        ));
    }
    let mut centered = returns.clone();
    let mut norms = vec![0.0f64; n];
    for i in 0..n {
        let mean = (0..t).map(|s| returns[(i, s)]).sum::<f64>() / t as f64;
        let mut acc = 0.0;
        for s in 0..t {
            let c = returns[(i, s)] - mean;
            centered[(i, s)] = c;
            acc += c * c;
        }
        if acc == 0.0 {
            return Err(Error::ZeroVarianceRow(i));
        }
        norms[i] = acc.sqrt();
    }
    let mut triples = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut dot = 0.0;
            for s in 0..t {
                dot += centered[(i, s)] * centered[(j, s)];
            }
            triples.push((i as u32, j as u32, dot / (norms[i] * norms[j])));
        }
    }
    SignedGraph::from_edges(n, triples)
}

/// Sparse nonnegative count matrix, possibly asymmetric, zero diagonal.
#[derive(Debug, Clone)]
pub struct CountsMatrix {
    node_count: usize,
    entries: Vec<(u32, u32, f64)>,
}

impl CountsMatrix {
    pub fn new(node_count: usize, entries: Vec<(u32, u32, f64)>) -> Result<Self> {
        for &(i, j, w) in &entries {
            if i == j {
                return Err(Error::InvalidEdge {
                    i,
                    j,
                    reason: "count matrix must have zero diagonal".into(),
                });
            }
            if i as usize >= node_count || j as usize >= node_count {
                return Err(Error::InvalidEdge {
                    i,
                    j,
                    reason: format!("endpoint out of range for {node_count} nodes"),
                });
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidEdge {
                    i,
                    j,
                    reason: "counts must be finite and nonnegative".into(),
                });
            }
        }
        Ok(Self {
            node_count,
            entries,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn entries(&self) -> &[(u32, u32, f64)] {
        &self.entries
    }
}

/// Symmetrizes `M + Mᵀ`, then subtracts the median of the nonzero undirected
/// weights. Entries centered to exactly zero are dropped; the median of an
/// even count is the midpoint of the two middle values.
pub fn symmetrize_center(counts: &CountsMatrix) -> Result<SignedGraph> {
    use std::collections::BTreeMap;
    let mut sums: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for &(i, j, w) in &counts.entries {
        if w == 0.0 {
            continue;
        }
        let key = (i.min(j), i.max(j));
        *sums.entry(key).or_insert(0.0) += w;
    }
    if sums.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let mut values: Vec<f64> = sums.values().copied().collect();
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    let median = if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    };
    let triples = sums
        .into_iter()
        .map(|((i, j), w)| (i, j, w - median));
    SignedGraph::from_edges(counts.node_count, triples)
}
