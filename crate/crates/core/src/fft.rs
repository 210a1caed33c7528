//! Two-dimensional FFTs on row-major grids.
//!
//! The optical propagator is the unitary, centred DFT: zero frequency sits at
//! [`Dims::center`] and `sum |out|^2 == sum |in|^2`.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::grid::{fftshift, Dims};
use crate::scalar::Real;

/// Planned forward and inverse transforms for one grid shape.
///
/// Plans are immutable and `Send + Sync`; one instance can be shared across
/// threads, each call allocating its own scratch.
#[derive(Clone)]
pub struct Fft2<T: Real> {
    dims: Dims,
    row_fwd: Arc<dyn Fft<T>>,
    row_inv: Arc<dyn Fft<T>>,
    col_fwd: Arc<dyn Fft<T>>,
    col_inv: Arc<dyn Fft<T>>,
    unitary: T,
}

impl<T: Real> Fft2<T> {
    pub fn new(dims: Dims) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            dims,
            row_fwd: planner.plan_fft_forward(dims.width),
            row_inv: planner.plan_fft_inverse(dims.width),
            col_fwd: planner.plan_fft_forward(dims.height),
            col_inv: planner.plan_fft_inverse(dims.height),
            unitary: T::one() / T::of(dims.len() as f64).sqrt(),
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Unnormalised forward transform, origin at index 0.
    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.run(data, &self.row_fwd, &self.col_fwd);
    }

    /// Unnormalised inverse transform (no `1/N` factor), origin at index 0.
    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.run(data, &self.row_inv, &self.col_inv);
    }

    /// Unitary centred forward transform.
    pub fn forward_centered(&self, data: &mut [Complex<T>]) {
        fftshift(data, self.dims);
        self.forward(data);
        fftshift(data, self.dims);
        self.scale(data);
    }

    /// Unitary centred inverse transform; exact inverse of [`Self::forward_centered`].
    pub fn inverse_centered(&self, data: &mut [Complex<T>]) {
        fftshift(data, self.dims);
        self.inverse(data);
        fftshift(data, self.dims);
        self.scale(data);
    }

    fn scale(&self, data: &mut [Complex<T>]) {
        let s = self.unitary;
        for v in data.iter_mut() {
            *v = *v * s;
        }
    }

    fn run(&self, data: &mut [Complex<T>], rows: &Arc<dyn Fft<T>>, cols: &Arc<dyn Fft<T>>) {
        let Dims { width, height } = self.dims;
        assert_eq!(data.len(), width * height, "buffer does not match plan dims");
        if width > 1 {
            rows.process(data);
        }
        if height > 1 {
            let mut t = vec![Complex::default(); data.len()];
            transpose(data, &mut t, width, height);
            cols.process(&mut t);
            transpose(&t, data, height, width);
        }
    }
}

/// `src` is `rows x cols` row-major; `dst` becomes `cols x rows`.
fn transpose<T: Copy>(src: &[T], dst: &mut [T], cols: usize, rows: usize) {
    const BLOCK: usize = 16;
    for rb in (0..rows).step_by(BLOCK) {
        for cb in (0..cols).step_by(BLOCK) {
            for r in rb..(rb + BLOCK).min(rows) {
                for c in cb..(cb + BLOCK).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}
