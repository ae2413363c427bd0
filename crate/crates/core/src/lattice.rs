//! Finite Euclidean balls of Z^d with dense vertex indexing.

use crate::error::CoreError;
use crate::point::{Edge, Vertex, MAX_DIM};

const NONE: u32 = u32::MAX;

/// Closed Euclidean ball B(center, radius) intersected with Z^d.
///
/// Vertices are enumerated lexicographically over the bounding cube; a dense
/// cube table gives O(1) membership and neighbor lookups. The 2d direction
/// slots of a vertex are ordered (+e1, -e1, +e2, -e2, ...).
pub struct LatticeBox {
    center: Vertex,
    radius: i64,
    dim: usize,
    verts: Vec<Vertex>,
    cube: Vec<u32>,
    side: i64,
    /// n * 2d neighbor indices, usize::MAX where the neighbor is outside.
    nbr: Vec<usize>,
}

pub const OUTSIDE: usize = usize::MAX;

impl LatticeBox {
    pub fn new(center: Vertex, radius: i64, dim: usize) -> Result<Self, CoreError> {
        if dim < 1 || dim > MAX_DIM || center.dim() != dim {
            return Err(CoreError::BadDimension(dim, MAX_DIM));
        }
        if radius < 0 {
            return Err(CoreError::Invalid(format!("negative radius {radius}")));
        }
        let side = 2 * radius + 1;
        let cube_len = (side as usize).pow(dim as u32);
        let r2 = radius * radius;
        let mut verts = Vec::new();
        let mut cube = vec![NONE; cube_len];
        let mut offset = [0i64; MAX_DIM];
        // lexicographic scan of the bounding cube
        let mut idx = 0usize;
        loop {
            let mut norm2 = 0i64;
            for x in offset[..dim].iter() {
                norm2 += (x - radius) * (x - radius);
            }
            if norm2 <= r2 {
                let mut coords = [0i64; MAX_DIM];
                for (i, x) in offset[..dim].iter().enumerate() {
                    coords[i] = center.coord(i) + x - radius;
                }
                cube[idx] = verts.len() as u32;
                verts.push(Vertex::new(&coords[..dim]).unwrap());
            }
            idx += 1;
            let mut axis = dim;
            loop {
                if axis == 0 {
                    break;
                }
                axis -= 1;
                offset[axis] += 1;
                if offset[axis] < side {
                    break;
                }
                offset[axis] = 0;
            }
            if offset[..dim].iter().all(|&x| x == 0) {
                break;
            }
        }
        let mut boxx = LatticeBox { center, radius, dim, verts, cube, side, nbr: Vec::new() };
        let n = boxx.len();
        let mut nbr = vec![OUTSIDE; n * 2 * dim];
        for i in 0..n {
            let v = boxx.verts[i];
            for k in 0..2 * dim {
                let (axis, delta) = Self::slot_dir(k);
                if let Some(j) = boxx.index_of(&v.step(axis, delta)) {
                    nbr[i * 2 * dim + k] = j;
                }
            }
        }
        boxx.nbr = nbr;
        Ok(boxx)
    }

    /// Direction of neighbor slot k: (axis, +-1).
    pub fn slot_dir(k: usize) -> (usize, i64) {
        (k / 2, if k % 2 == 0 { 1 } else { -1 })
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn center(&self) -> Vertex {
        self.center
    }

    pub fn vertex(&self, i: usize) -> Vertex {
        self.verts[i]
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.verts
    }

    fn cube_index(&self, v: &Vertex) -> Option<usize> {
        let mut idx = 0usize;
        for i in 0..self.dim {
            let off = v.coord(i) - self.center.coord(i) + self.radius;
            if off < 0 || off >= self.side {
                return None;
            }
            idx = idx * self.side as usize + off as usize;
        }
        Some(idx)
    }

    pub fn index_of(&self, v: &Vertex) -> Option<usize> {
        if v.dim() != self.dim {
            return None;
        }
        let ci = self.cube_index(v)?;
        match self.cube[ci] {
            NONE => None,
            i => Some(i as usize),
        }
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        self.index_of(v).is_some()
    }

    /// Neighbor index of vertex i in direction slot k, OUTSIDE if killed.
    pub fn neighbor(&self, i: usize, k: usize) -> usize {
        self.nbr[i * 2 * self.dim + k]
    }

    pub fn neighbor_slots(&self) -> &[usize] {
        &self.nbr
    }

    /// Every bond with at least one endpoint in the box, each exactly once in
    /// canonical orientation (lower endpoint first). Bonds crossing the
    /// boundary appear once with their outside endpoint.
    pub fn incident_edges(&self) -> Vec<Edge> {
        let mut edges = Vec::with_capacity(self.len() * self.dim + self.len());
        for v in &self.verts {
            for axis in 0..self.dim {
                let up = v.step(axis, 1);
                edges.push(Edge { from: *v, to: up });
                let down = v.step(axis, -1);
                if !self.contains(&down) {
                    edges.push(Edge { from: down, to: *v });
                }
            }
        }
        edges
    }

    /// Rate slots touched by a bond: (vertex index, direction slot) for each
    /// endpoint inside the box.
    pub fn edge_slots(&self, edge: &Edge) -> Vec<(usize, usize)> {
        let axis = edge.axis();
        let (lower, _) = edge.canonical();
        let upper = lower.step(axis, 1);
        let mut out = Vec::with_capacity(2);
        if let Some(i) = self.index_of(&lower) {
            out.push((i, 2 * axis));
        }
        if let Some(j) = self.index_of(&upper) {
            out.push((j, 2 * axis + 1));
        }
        out
    }

    /// The bond sitting in direction slot k of vertex i.
    pub fn slot_edge(&self, i: usize, k: usize) -> Edge {
        let (axis, delta) = Self::slot_dir(k);
        let v = self.verts[i];
        Edge { from: v, to: v.step(axis, delta) }
    }
}
