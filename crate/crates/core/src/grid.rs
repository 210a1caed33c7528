//! Row-major 2D storage and the grid geometry conventions used throughout.
//!
//! Rows index `y`, columns index `x`. Offsets are `(row, col)` pairs of
//! signed whole pixels.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub width: usize,
    pub height: usize,
}

impl Dims {
    /// Dimensions must be non-zero powers of two.
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if !width.is_power_of_two() || !height.is_power_of_two() {
            return Err(Error::InvalidDims { width, height });
        }
        Ok(Self { width, height })
    }

    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Pixel at the grid centre; zero lag / zero frequency in centred layouts.
    pub fn center(&self) -> (usize, usize) {
        (self.height / 2, self.width / 2)
    }

    pub fn contains(&self, row: i64, col: i64) -> bool {
        row >= 0 && col >= 0 && (row as usize) < self.height && (col as usize) < self.width
    }

    pub(crate) fn ensure_eq(&self, other: Dims) -> Result<()> {
        if *self != other {
            return Err(Error::DimsMismatch {
                expected: *self,
                actual: other,
            });
        }
        Ok(())
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

/// Signed whole-pixel translation `(row, col)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Offset {
    pub row: i32,
    pub col: i32,
}

impl Offset {
    pub const ZERO: Offset = Offset { row: 0, col: 0 };

    pub fn new(row: i32, col: i32) -> Self {
        Self { row, col }
    }
}

impl fmt::Display for Offset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    dims: Dims,
    data: Vec<T>,
}

impl<T: Copy> Grid<T> {
    pub fn filled(dims: Dims, value: T) -> Self {
        Self {
            dims,
            data: vec![value; dims.len()],
        }
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(dims.len());
        for r in 0..dims.height {
            for c in 0..dims.width {
                data.push(f(r, c));
            }
        }
        Self { dims, data }
    }

    pub fn from_vec(dims: Dims, data: Vec<T>) -> Result<Self> {
        if data.len() != dims.len() {
            return Err(Error::InvalidInput {
                what: "grid data",
                detail: format!("{} values for a {} grid", data.len(), dims),
            });
        }
        Ok(Self { dims, data })
    }

    pub fn map<U: Copy>(&self, f: impl FnMut(T) -> U) -> Grid<U> {
        Grid {
            dims: self.dims,
            data: self.data.iter().copied().map(f).collect(),
        }
    }

    pub fn zip_map<U: Copy, V: Copy>(&self, other: &Grid<U>, mut f: impl FnMut(T, U) -> V) -> Grid<V> {
        debug_assert_eq!(self.dims, other.dims);
        Grid {
            dims: self.dims,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Circular shift so that `out[(r + dr) mod h][(c + dc) mod w] = self[r][c]`.
    pub fn roll(&self, dr: i64, dc: i64) -> Self {
        let (h, w) = (self.dims.height as i64, self.dims.width as i64);
        let mut out = self.data.clone();
        for r in 0..h {
            let rr = (r + dr).rem_euclid(h);
            for c in 0..w {
                let cc = (c + dc).rem_euclid(w);
                out[(rr * w + cc) as usize] = self.data[(r * w + c) as usize];
            }
        }
        Self {
            dims: self.dims,
            data: out,
        }
    }

    /// Point reflection through the origin on the periodic grid: `out[r][c] = self[-r][-c]`.
    pub fn reflect(&self) -> Self {
        let (h, w) = (self.dims.height, self.dims.width);
        Self::from_fn(self.dims, |r, c| self[((h - r) % h, (w - c) % w)])
    }
}

impl<T> Grid<T> {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.data.iter()
    }

    pub fn get(&self, row: i64, col: i64) -> Option<&T> {
        self.dims
            .contains(row, col)
            .then(|| &self.data[row as usize * self.dims.width + col as usize])
    }
}

impl<T> Index<(usize, usize)> for Grid<T> {
    type Output = T;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.dims.width + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Grid<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.dims.width + c]
    }
}

/// Swap half-planes so index 0 moves to the centre. For power-of-two sizes
/// this is its own inverse (`fftshift == ifftshift`).
pub fn fftshift<T: Copy>(data: &mut [T], dims: Dims) {
    let (h, w) = (dims.height, dims.width);
    let (hh, hw) = (h / 2, w / 2);
    if hw > 0 {
        for row in data.chunks_exact_mut(w) {
            row.rotate_left(hw);
        }
    }
    if hh > 0 {
        data.rotate_left(hh * w);
    }
}
