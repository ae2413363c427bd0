//! Lattice vertices and nearest-neighbor edges.
//!
//! Coordinates are stored in a fixed-size array so vertices are Copy and hash
//! cheaply; unused coordinates are pinned to zero so equality and hashing are
//! dimension-consistent.

use std::fmt;

use crate::error::CoreError;

/// Largest supported lattice dimension.
pub const MAX_DIM: usize = 4;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    c: [i64; MAX_DIM],
    dim: u8,
}

impl Vertex {
    pub fn new(coords: &[i64]) -> Result<Self, CoreError> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(CoreError::BadDimension(coords.len(), MAX_DIM));
        }
        let mut c = [0i64; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Vertex { c, dim: coords.len() as u8 })
    }

    pub fn origin(dim: usize) -> Self {
        assert!(dim >= 1 && dim <= MAX_DIM);
        Vertex { c: [0; MAX_DIM], dim: dim as u8 }
    }

    /// Unit step along `axis` with the given sign.
    pub fn unit(dim: usize, axis: usize, sign: i64) -> Self {
        let mut v = Vertex::origin(dim);
        v.c[axis] = sign.signum();
        v
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coord(&self, axis: usize) -> i64 {
        self.c[axis]
    }

    pub fn coords(&self) -> &[i64] {
        &self.c[..self.dim as usize]
    }

    pub fn add(&self, other: &Vertex) -> Vertex {
        debug_assert_eq!(self.dim, other.dim);
        let mut c = [0i64; MAX_DIM];
        for i in 0..self.dim as usize {
            c[i] = self.c[i] + other.c[i];
        }
        Vertex { c, dim: self.dim }
    }

    pub fn sub(&self, other: &Vertex) -> Vertex {
        debug_assert_eq!(self.dim, other.dim);
        let mut c = [0i64; MAX_DIM];
        for i in 0..self.dim as usize {
            c[i] = self.c[i] - other.c[i];
        }
        Vertex { c, dim: self.dim }
    }

    pub fn step(&self, axis: usize, delta: i64) -> Vertex {
        let mut v = *self;
        v.c[axis] += delta;
        v
    }

    pub fn l1_norm(&self) -> i64 {
        self.coords().iter().map(|x| x.abs()).sum()
    }

    pub fn norm_sq(&self) -> i64 {
        self.coords().iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.coords().iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Oriented nearest-neighbor bond.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Edge {
    pub from: Vertex,
    pub to: Vertex,
}

impl Edge {
    pub fn new(from: Vertex, to: Vertex) -> Result<Self, CoreError> {
        if from.dim != to.dim || from.sub(&to).l1_norm() != 1 {
            return Err(CoreError::NotNeighbors(from, to));
        }
        Ok(Edge { from, to })
    }

    /// Axis along which the bond runs.
    pub fn axis(&self) -> usize {
        for i in 0..self.from.dim as usize {
            if self.from.c[i] != self.to.c[i] {
                return i;
            }
        }
        unreachable!("degenerate edge")
    }

    /// Orientation-free key: (lower endpoint, axis). Both orientations of a
    /// bond map to the same key, which is what makes conductances symmetric.
    pub fn canonical(&self) -> (Vertex, usize) {
        let axis = self.axis();
        if self.from.c[axis] <= self.to.c[axis] {
            (self.from, axis)
        } else {
            (self.to, axis)
        }
    }

    pub fn reversed(&self) -> Edge {
        Edge { from: self.to, to: self.from }
    }

    /// Translate both endpoints by `z`.
    pub fn translate(&self, z: &Vertex) -> Edge {
        Edge { from: self.from.add(z), to: self.to.add(z) }
    }
}
