//! Graph-structured network inputs, batched as disjoint unions of graphs.

use serde::{Deserialize, Serialize};

use crate::error::{NnError, Result};
use crate::tensor::Tensor2;

/// One observation: node features, normalized adjacency and per-graph extras.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphInput {
    /// `N × d`, row 0 is the ego node.
    pub features: Tensor2,
    /// `N × N` normalized adjacency.
    pub adjacency: Tensor2,
    pub extras: Vec<f64>,
}

impl GraphInput {
    pub fn new(features: Tensor2, adjacency: Tensor2, extras: Vec<f64>) -> Result<Self> {
        let n = features.rows();
        if n == 0 {
            return Err(NnError::Shape("graph has no nodes".into()));
        }
        if adjacency.shape() != (n, n) {
            return Err(NnError::Shape(format!("adjacency {:?} for {n} nodes", adjacency.shape())));
        }
        features.check_finite("node features")?;
        adjacency.check_finite("adjacency")?;
        if extras.iter().any(|v| !v.is_finite()) {
            return Err(NnError::NonFinite("graph extras".into()));
        }
        Ok(Self { features, adjacency, extras })
    }

    pub fn nodes(&self) -> usize {
        self.features.rows()
    }
}

/// Node ranges and adjacency blocks of a batch of graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphLayout {
    /// Graph `g` owns rows `offsets[g]..offsets[g + 1]`.
    offsets: Vec<usize>,
    adjacency: Vec<Tensor2>,
}

impl GraphLayout {
    pub fn single(adjacency: Tensor2, nodes: usize) -> Result<Self> {
        if adjacency.shape() != (nodes, nodes) {
            return Err(NnError::Shape(format!("adjacency {:?} for {nodes} nodes", adjacency.shape())));
        }
        Ok(Self { offsets: vec![0, nodes], adjacency: vec![adjacency] })
    }

    pub fn graphs(&self) -> usize {
        self.adjacency.len()
    }

    pub fn total_nodes(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn range(&self, g: usize) -> std::ops::Range<usize> {
        self.offsets[g]..self.offsets[g + 1]
    }

    fn check_rows(&self, h: &Tensor2) -> Result<()> {
        if h.rows() != self.total_nodes() {
            return Err(NnError::Shape(format!("{} node rows for {} nodes", h.rows(), self.total_nodes())));
        }
        Ok(())
    }

    /// Block-diagonal `Â·H`.
    pub fn propagate(&self, h: &Tensor2) -> Result<Tensor2> {
        self.apply(h, false)
    }

    /// Block-diagonal `Âᵀ·G`.
    pub fn propagate_transposed(&self, g: &Tensor2) -> Result<Tensor2> {
        self.apply(g, true)
    }

    fn apply(&self, h: &Tensor2, transposed: bool) -> Result<Tensor2> {
        self.check_rows(h)?;
        let d = h.cols();
        let mut out = Tensor2::zeros(h.rows(), d);
        for (g, adj) in self.adjacency.iter().enumerate() {
            let base = self.offsets[g];
            let n = adj.rows();
            for i in 0..n {
                for j in 0..n {
                    let a = if transposed { adj.get(j, i) } else { adj.get(i, j) };
                    if a == 0.0 {
                        continue;
                    }
                    let src = h.row(base + j).to_vec();
                    out.row_mut(base + i).iter_mut().zip(&src).for_each(|(o, x)| *o += a * x);
                }
            }
        }
        Ok(out)
    }
}

/// A batch of graphs stacked into one node matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphBatch {
    pub features: Tensor2,
    pub layout: GraphLayout,
    /// `B × e`.
    pub extras: Tensor2,
}

impl GraphBatch {
    pub fn from_inputs(inputs: &[&GraphInput]) -> Result<Self> {
        let first = inputs.first().ok_or_else(|| NnError::Shape("empty batch".into()))?;
        let (d, e) = (first.features.cols(), first.extras.len());
        let total: usize = inputs.iter().map(|g| g.nodes()).sum();
        let mut features = Tensor2::zeros(total, d);
        let mut extras = Tensor2::zeros(inputs.len(), e);
        let mut offsets = Vec::with_capacity(inputs.len() + 1);
        let mut adjacency = Vec::with_capacity(inputs.len());
        let mut row = 0;
        offsets.push(0);
        for (b, g) in inputs.iter().enumerate() {
            if g.features.cols() != d || g.extras.len() != e {
                return Err(NnError::Shape("graphs in a batch must share feature and extras widths".into()));
            }
            for i in 0..g.nodes() {
                features.row_mut(row + i).copy_from_slice(g.features.row(i));
            }
            row += g.nodes();
            offsets.push(row);
            adjacency.push(g.adjacency.clone());
            extras.row_mut(b).copy_from_slice(&g.extras);
        }
        Ok(Self { features, layout: GraphLayout { offsets, adjacency }, extras })
    }

    pub fn len(&self) -> usize {
        self.layout.graphs()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Per graph: `[mean over nodes, ego node row, extras]`.
pub fn readout(h: &Tensor2, layout: &GraphLayout, extras: &Tensor2) -> Result<Tensor2> {
    layout.check_rows(h)?;
    if extras.rows() != layout.graphs() {
        return Err(NnError::Shape(format!("{} extras rows for {} graphs", extras.rows(), layout.graphs())));
    }
    let d = h.cols();
    let e = extras.cols();
    let mut out = Tensor2::zeros(layout.graphs(), 2 * d + e);
    for g in 0..layout.graphs() {
        let range = layout.range(g);
        let inv_n = 1.0 / range.len() as f64;
        let ego = range.start;
        let row = out.row_mut(g);
        for i in range {
            row[..d].iter_mut().zip(h.row(i)).for_each(|(o, x)| *o += x * inv_n);
        }
        row[d..2 * d].copy_from_slice(h.row(ego));
        row[2 * d..].copy_from_slice(extras.row(g));
    }
    Ok(out)
}

/// Gradient of [`readout`] with respect to the node matrix (width `d`).
pub fn readout_backward(d_out: &Tensor2, layout: &GraphLayout, d: usize) -> Result<Tensor2> {
    if d_out.rows() != layout.graphs() || d_out.cols() < 2 * d {
        return Err(NnError::Shape(format!("readout gradient {:?} for {} graphs of width {d}", d_out.shape(), layout.graphs())));
    }
    let mut dh = Tensor2::zeros(layout.total_nodes(), d);
    for g in 0..layout.graphs() {
        let range = layout.range(g);
        let inv_n = 1.0 / range.len() as f64;
        let ego = range.start;
        let grad = d_out.row(g);
        for i in range {
            dh.row_mut(i).iter_mut().zip(&grad[..d]).for_each(|(o, x)| *o += x * inv_n);
        }
        dh.row_mut(ego).iter_mut().zip(&grad[d..2 * d]).for_each(|(o, x)| *o += x);
    }
    Ok(dh)
}

/// Node rows concatenated in order, zero-padded to `max_nodes`, then extras.
pub fn flatten(batch: &GraphBatch, max_nodes: usize) -> Result<Tensor2> {
    let d = batch.features.cols();
    let e = batch.extras.cols();
    let mut out = Tensor2::zeros(batch.len(), max_nodes * d + e);
    for g in 0..batch.len() {
        let range = batch.layout.range(g);
        if range.len() > max_nodes {
            return Err(NnError::Shape(format!("graph with {} nodes exceeds the flat limit of {max_nodes}", range.len())));
        }
        let row = out.row_mut(g);
        for (k, i) in range.enumerate() {
            row[k * d..(k + 1) * d].copy_from_slice(batch.features.row(i));
        }
        row[max_nodes * d..].copy_from_slice(batch.extras.row(g));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(n: usize, seed: f64) -> GraphInput {
        let f = Tensor2::from_vec(n, 3, (0..n * 3).map(|i| (i as f64 * 0.37 + seed).sin()).collect()).unwrap();
        let a = Tensor2::from_vec(n, n, (0..n * n).map(|i| ((i as f64 + seed) * 1.3).cos().abs()).collect()).unwrap();
        GraphInput::new(f, a, vec![seed, -seed]).unwrap()
    }

    #[test]
    fn batch_propagation_matches_per_graph() {
        let (g1, g2) = (input(2, 0.1), input(3, 0.7));
        let batch = GraphBatch::from_inputs(&[&g1, &g2]).unwrap();
        let out = batch.layout.propagate(&batch.features).unwrap();
        for (g, input) in [&g1, &g2].into_iter().enumerate() {
            let single = GraphLayout::single(input.adjacency.clone(), input.nodes()).unwrap();
            let expect = single.propagate(&input.features).unwrap();
            for (k, i) in batch.layout.range(g).enumerate() {
                assert_eq!(out.row(i), expect.row(k));
            }
        }
    }

    #[test]
    fn readout_layout() {
        let g = input(2, 0.4);
        let batch = GraphBatch::from_inputs(&[&g]).unwrap();
        let r = readout(&batch.features, &batch.layout, &batch.extras).unwrap();
        assert_eq!(r.cols(), 8);
        for k in 0..3 {
            let mean = (g.features.get(0, k) + g.features.get(1, k)) / 2.0;
            assert!((r.get(0, k) - mean).abs() < 1e-15);
            assert_eq!(r.get(0, 3 + k), g.features.get(0, k));
        }
        assert_eq!(&r.row(0)[6..], &[0.4, -0.4]);
    }

    #[test]
    fn flatten_pads_with_zeros() {
        let g = input(2, 0.2);
        let batch = GraphBatch::from_inputs(&[&g]).unwrap();
        let f = flatten(&batch, 3).unwrap();
        assert_eq!(f.cols(), 11);
        assert_eq!(&f.row(0)[..6], &g.features.data()[..6]);
        assert_eq!(&f.row(0)[6..9], &[0.0; 3]);
        assert!(flatten(&batch, 1).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(GraphInput::new(Tensor2::zeros(0, 3), Tensor2::zeros(0, 0), vec![]).is_err());
        assert!(GraphInput::new(Tensor2::zeros(2, 3), Tensor2::zeros(3, 3), vec![]).is_err());
        let a = input(2, 0.0);
        let mut b = input(2, 0.0);
        b.extras.push(1.0);
        assert!(GraphBatch::from_inputs(&[&a, &b]).is_err());
        assert!(GraphBatch::from_inputs(&[]).is_err());
    }
}
