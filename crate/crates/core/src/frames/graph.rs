//! Correlation networks, orthodecomposability and its quantitative margin.

use rand::Rng;

use super::Frame;
use crate::error::{Error, Result};
use crate::numerics::C64;

/// Inner products at or below this modulus count as zero.
pub const DEFAULT_EDGE_EPS: f64 = 1e-8;

/// Graph on frame indices; `(i, j, |<f_i, f_j>|)` with `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationGraph {
    pub vertices: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl CorrelationGraph {
    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.vertices);
        for &(i, j, _) in &self.edges {
            uf.union(i, j);
        }
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); self.vertices];
        for v in 0..self.vertices {
            by_root[uf.find(v)].push(v);
        }
        let mut comps: Vec<Vec<usize>> = by_root.into_iter().filter(|c| !c.is_empty()).collect();
        comps.sort_by_key(|c| c[0]);
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

fn all_weights(frame: &Frame) -> Vec<(usize, usize, f64)> {
    let gram = frame.gram();
    let n = frame.len();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push((i, j, gram[(i, j)].norm()));
        }
    }
    out
}

/// Edges where `|<f_i, f_j>| > eps`.
pub fn correlation_graph(frame: &Frame, eps: f64) -> CorrelationGraph {
    CorrelationGraph {
        vertices: frame.len(),
        edges: all_weights(frame)
            .into_iter()
            .filter(|e| e.2 > eps)
            .collect(),
    }
}

/// Maximal orthogonal blocks of the frame.
pub fn od_components(frame: &Frame, eps: f64) -> Vec<Vec<usize>> {
    correlation_graph(frame, eps).components()
}

/// Whether the frame splits into mutually orthogonal pieces.
pub fn is_od(frame: &Frame) -> bool {
    !correlation_graph(frame, DEFAULT_EDGE_EPS).is_connected()
}

/// The largest threshold at which the correlation graph stays connected: the
/// lightest edge of a maximum spanning tree. Zero for OD frames, infinite for
/// a single vector.
pub fn od_margin(frame: &Frame) -> f64 {
    let n = frame.len();
    if n <= 1 {
        return f64::INFINITY;
    }
    let mut edges = all_weights(frame);
    edges.sort_by(|a, b| b.2.total_cmp(&a.2));
    let mut uf = UnionFind::new(n);
    let mut joined = 1;
    for (i, j, w) in edges {
        if uf.union(i, j) {
            joined += 1;
            if joined == n {
                return w;
            }
        }
    }
    0.0
}

/// A permutation whose first `d` entries index a basis with connected
/// correlation graph, chosen greedily: keep adding an unused vector that is
/// neither in the span of the chosen ones nor orthogonal to all of them.
pub fn nod_reorder(frame: &Frame) -> Result<Vec<usize>> {
    let (d, n) = (frame.dim(), frame.len());
    if n == 0 || is_od(frame) {
        return Err(Error::FrameIsOd);
    }
    let cols = frame.columns();
    let mut chosen = vec![0usize];
    // orthonormal basis of the chosen span
    let mut basis = vec![cols[0].unscale(cols[0].norm())];
    while chosen.len() < d {
        let next = (0..n).filter(|j| !chosen.contains(j)).find_map(|j| {
            let f = &cols[j];
            let mut r = f.clone();
            for q in &basis {
                r -= q * q.dotc(f);
            }
            let touches = chosen
                .iter()
                .any(|&c| cols[c].dotc(f).norm() > DEFAULT_EDGE_EPS);
            let rn = r.norm();
            (rn > 1e-8 && touches).then(|| (j, r.unscale(rn)))
        });
        match next {
            Some((j, q)) => {
                chosen.push(j);
                basis.push(q);
            }
            None => return Err(Error::FrameIsOd),
        }
    }
    let rest: Vec<usize> = (0..n).filter(|j| !chosen.contains(j)).collect();
    chosen.extend(rest);
    Ok(chosen)
}

/// Rotates orthonormal pairs drawn from different maximal blocks by `delta`
/// radians in their plane until the frame is NOD. Each rotation keeps the
/// frame operator and merges two blocks.
pub fn od_perturb<R: Rng + ?Sized>(frame: &Frame, delta: f64, rng: &mut R) -> Result<Frame> {
    let report = frame.check_funtf(1e-8);
    if !report.ok {
        return Err(Error::NotFuntf {
            unit_norm: report.unit_norm_resid,
            tightness: report.tightness_resid,
        });
    }
    if !is_od(frame) {
        return Err(Error::NotOd);
    }
    if delta == 0.0 {
        return Ok(frame.clone());
    }
    let mut current = frame.clone();
    let mut touched = vec![false; frame.len()];
    for _ in 0..frame.len() {
        let blocks = od_components(&current, DEFAULT_EDGE_EPS);
        if blocks.len() <= 1 {
            return Ok(current);
        }
        let pick = |block: &[usize]| *block.iter().find(|&&j| !touched[j]).unwrap_or(&block[0]);
        let (a, b) = (pick(&blocks[0]), pick(&blocks[1]));
        touched[a] = true;
        touched[b] = true;
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let (c, s) = (delta.cos(), sign * delta.sin());
        let (fa, fb) = (current.column(a), current.column(b));
        let na = &fa * C64::new(c, 0.0) + &fb * C64::new(s, 0.0);
        let nb = &fb * C64::new(c, 0.0) - &fa * C64::new(s, 0.0);
        current = current.with_column(a, &na).with_column(b, &nb);
    }
    if is_od(&current) {
        // the angle was too small to register above the edge threshold
        return Err(Error::InvalidArgument(format!(
            "delta = {delta:e} too small to separate blocks"
        )));
    }
    Ok(current)
}
