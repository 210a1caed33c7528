//! Second-order intensity-fluctuation correlation and the Fourier-modulus
//! data derived from it.
//!
//! For a delta-correlated source the detector-plane fluctuation covariance is
//! shift-invariant, so the estimator averages over frames and over detector
//! pixels at once:
//!
//! ```text
//! C(d) = (1/N) sum_k sum_x dI_k(x) dI_k(x + d),    dI_k = I_k - mean_k(I_k)
//! ```
//!
//! evaluated per frame as `IDFT(|DFT(dI_k)|^2)`. Lag bin `d` of the centred
//! map coincides with object-grid frequency bin `d` under the far-field
//! forward model, so `sqrt(C / C(0))` is directly `|F{O * mask}| / |F{O * mask}|(0)`.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::grid::{fftshift, Dims, Grid};
use crate::optics::{SpeckleEnsemble, SpeckleSource};
use crate::scalar::Real;

/// Frames per independent partial sum; fixes the reduction tree.
pub const CHUNK_FRAMES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    Raw,
    PeakNormalized,
}

/// Fluctuation autocorrelation over centred lag space.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMap<T> {
    values: Grid<T>,
    n_frames_used: usize,
    normalization: Normalization,
    position_index: usize,
}

impl<T: Real> CorrelationMap<T> {
    pub fn new(values: Grid<T>, n_frames_used: usize, normalization: Normalization, position_index: usize) -> Self {
        Self {
            values,
            n_frames_used,
            normalization,
            position_index,
        }
    }

    pub fn values(&self) -> &Grid<T> {
        &self.values
    }

    pub fn dims(&self) -> Dims {
        self.values.dims()
    }

    pub fn n_frames_used(&self) -> usize {
        self.n_frames_used
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn position_index(&self) -> usize {
        self.position_index
    }

    /// Zero-lag value.
    pub fn peak(&self) -> T {
        self.values[self.dims().center()]
    }

    pub fn peak_normalized(&self) -> Result<Self> {
        let p = self.peak();
        if !(p > T::zero()) {
            return Err(Error::Degenerate(format!("zero-lag correlation is {p}")));
        }
        Ok(Self {
            values: self.values.map(|v| v / p),
            normalization: Normalization::PeakNormalized,
            ..self.clone()
        })
    }
}

/// Per-position Fourier modulus `A(k) >= 0` in centred frequency layout.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeMap<T> {
    values: Grid<T>,
    position_index: usize,
}

impl<T: Real> AmplitudeMap<T> {
    pub fn new(values: Grid<T>, position_index: usize) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::InvalidInput {
                what: "amplitude map",
                detail: "values must be finite and non-negative".into(),
            });
        }
        Ok(Self {
            values,
            position_index,
        })
    }

    pub fn values(&self) -> &Grid<T> {
        &self.values
    }

    pub fn dims(&self) -> Dims {
        self.values.dims()
    }

    pub fn position_index(&self) -> usize {
        self.position_index
    }

    /// Value at zero frequency.
    pub fn dc(&self) -> T {
        self.values[self.dims().center()]
    }
}

/// Circular autocorrelation `sum_x a(x) a(x + d)` in centred lag layout.
fn autocorr_into<T: Real>(plan: &Fft2<T>, a: &[T], buf: &mut Vec<Complex<T>>, acc: &mut [T]) {
    buf.clear();
    buf.extend(a.iter().map(|&v| Complex::new(v, T::zero())));
    plan.forward(buf);
    for (v, s) in buf.iter().zip(acc.iter_mut()) {
        *s = *s + v.norm_sqr();
    }
}

fn power_to_lag<T: Real>(plan: &Fft2<T>, power: &[T], scale: T) -> Grid<T> {
    let dims = plan.dims();
    let mut buf: Vec<Complex<T>> = power.iter().map(|&p| Complex::new(p, T::zero())).collect();
    plan.inverse(&mut buf);
    let norm = scale / T::of(dims.len() as f64);
    let mut out: Vec<T> = buf.iter().map(|v| v.re * norm).collect();
    symmetrize(&mut out, dims);
    fftshift(&mut out, dims);
    Grid::from_vec(dims, out).expect("sized to dims")
}

/// Enforce `c(d) == c(-d)` exactly (index-0 layout); removes FFT round-off asymmetry.
fn symmetrize<T: Real>(c: &mut [T], dims: Dims) {
    let (h, w) = (dims.height, dims.width);
    let half = T::of(0.5);
    for r in 0..h {
        for col in 0..w {
            let (mr, mc) = ((h - r) % h, (w - col) % w);
            let (i, j) = (r * w + col, mr * w + mc);
            if i < j {
                let m = (c[i] + c[j]) * half;
                c[i] = m;
                c[j] = m;
            }
        }
    }
}

/// Ensemble-averaged fluctuation autocorrelation of a recorded ensemble.
///
/// Subtracts the ensemble-mean frame and averages the per-frame circular
/// autocorrelations. Output is raw (not normalised), zero lag at the centre.
pub fn fluct_autocorr<T: Real>(ensemble: &SpeckleEnsemble<T>) -> Result<CorrelationMap<T>> {
    let n = ensemble.n_frames();
    if n < 2 {
        return Err(Error::TooFewFrames {
            required: 2,
            actual: n,
        });
    }
    let dims = ensemble.dims();
    let plan = Fft2::new(dims);
    let inv_n = T::one() / T::of(n as f64);
    let mut mean = vec![T::zero(); dims.len()];
    for f in ensemble.frames() {
        for (m, &v) in mean.iter_mut().zip(f.values().iter()) {
            *m = *m + v;
        }
    }
    mean.iter_mut().for_each(|m| *m = *m * inv_n);

    let frames = ensemble.frames();
    let partials: Vec<Vec<T>> = (0..n.div_ceil(CHUNK_FRAMES))
        .into_par_iter()
        .map(|chunk| {
            let mut acc = vec![T::zero(); dims.len()];
            let mut buf = Vec::with_capacity(dims.len());
            let mut fluct = vec![T::zero(); dims.len()];
            for f in &frames[chunk * CHUNK_FRAMES..((chunk + 1) * CHUNK_FRAMES).min(n)] {
                for ((d, &v), &m) in fluct.iter_mut().zip(f.values().iter()).zip(&mean) {
                    *d = v - m;
                }
                autocorr_into(&plan, &fluct, &mut buf, &mut acc);
            }
            acc
        })
        .collect();
    let power = sum_in_order(partials, dims.len());
    Ok(CorrelationMap::new(
        power_to_lag(&plan, &power, inv_n),
        n,
        Normalization::Raw,
        ensemble.position_index(),
    ))
}

fn sum_in_order<T: Real>(partials: Vec<Vec<T>>, len: usize) -> Vec<T> {
    let mut total = vec![T::zero(); len];
    for p in partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t = *t + v;
        }
    }
    total
}

/// Streaming form of [`fluct_autocorr`] that never holds more than a chunk of frames.
///
/// Uses `sum_k |DFT(dI_k)|^2 = sum_k |DFT(I_k)|^2 - |DFT(sum_k I_k)|^2 / N`, which is
/// algebraically identical to subtracting the ensemble-mean frame first.
#[derive(Debug, Clone)]
pub struct FluctuationAccumulator<T> {
    dims: Dims,
    power: Vec<T>,
    sum: Vec<T>,
    n_frames: usize,
}

impl<T: Real> FluctuationAccumulator<T> {
    pub fn new(dims: Dims) -> Self {
        Self {
            dims,
            power: vec![T::zero(); dims.len()],
            sum: vec![T::zero(); dims.len()],
            n_frames: 0,
        }
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    fn push_with(&mut self, plan: &Fft2<T>, frame: &[T], buf: &mut Vec<Complex<T>>) {
        autocorr_into(plan, frame, buf, &mut self.power);
        for (s, &v) in self.sum.iter_mut().zip(frame) {
            *s = *s + v;
        }
        self.n_frames += 1;
    }

    pub fn push(&mut self, plan: &Fft2<T>, frame: &[T]) {
        let mut buf = Vec::with_capacity(frame.len());
        self.push_with(plan, frame, &mut buf);
    }

    /// Adds another accumulator's totals; merge order fixes the rounding.
    pub fn merge(&mut self, other: &Self) {
        for (a, &b) in self.power.iter_mut().zip(&other.power) {
            *a = *a + b;
        }
        for (a, &b) in self.sum.iter_mut().zip(&other.sum) {
            *a = *a + b;
        }
        self.n_frames += other.n_frames;
    }

    pub fn finish(&self, plan: &Fft2<T>, position_index: usize) -> Result<CorrelationMap<T>> {
        let n = self.n_frames;
        if n < 2 {
            return Err(Error::TooFewFrames {
                required: 2,
                actual: n,
            });
        }
        let inv_n = T::one() / T::of(n as f64);
        let mut mean: Vec<Complex<T>> = self.sum.iter().map(|&s| Complex::new(s, T::zero())).collect();
        plan.forward(&mut mean);
        let power: Vec<T> = self
            .power
            .iter()
            .zip(&mean)
            .map(|(&p, m)| p - m.norm_sqr() * inv_n)
            .collect();
        Ok(CorrelationMap::new(
            power_to_lag(plan, &power, inv_n),
            n,
            Normalization::Raw,
            position_index,
        ))
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }
}

/// Simulate `n_frames` frames from `source` and estimate their fluctuation
/// autocorrelation without storing the ensemble.
///
/// Frames are processed in fixed chunks of [`CHUNK_FRAMES`] whose partial sums
/// are merged in chunk order, so the result does not depend on thread count.
pub fn correlate_source<T: Real>(source: &SpeckleSource<T>, n_frames: usize) -> Result<CorrelationMap<T>> {
    if n_frames < 2 {
        return Err(Error::TooFewFrames {
            required: 2,
            actual: n_frames,
        });
    }
    let dims = source.dims();
    let plan = Fft2::new(dims);
    let partials: Vec<FluctuationAccumulator<T>> = (0..n_frames.div_ceil(CHUNK_FRAMES))
        .into_par_iter()
        .map(|chunk| {
            let mut acc = FluctuationAccumulator::new(dims);
            let mut field = Vec::with_capacity(dims.len());
            let mut buf = Vec::with_capacity(dims.len());
            let mut frame = vec![T::zero(); dims.len()];
            for k in chunk * CHUNK_FRAMES..((chunk + 1) * CHUNK_FRAMES).min(n_frames) {
                source.frame_into(k, &mut field, &mut frame);
                acc.push_with(&plan, &frame, &mut buf);
            }
            acc
        })
        .collect();
    let mut total = FluctuationAccumulator::new(dims);
    for p in &partials {
        total.merge(p);
    }
    total.finish(&plan, source.position_index())
}

/// Normalised second moment `<I^2> / <I>^2` at one detector pixel.
pub fn g2_point<T: Real>(ensemble: &SpeckleEnsemble<T>, pixel: (usize, usize)) -> Result<T> {
    let n = ensemble.n_frames();
    if n < 2 {
        return Err(Error::TooFewFrames {
            required: 2,
            actual: n,
        });
    }
    let dims = ensemble.dims();
    if pixel.0 >= dims.height || pixel.1 >= dims.width {
        return Err(Error::InvalidInput {
            what: "pixel",
            detail: format!("{pixel:?} outside the {dims} grid"),
        });
    }
    let (mut s1, mut s2) = (T::zero(), T::zero());
    for f in ensemble.frames() {
        let v = f.values()[pixel];
        s1 = s1 + v;
        s2 = s2 + v * v;
    }
    let nf = T::of(n as f64);
    let (m1, m2) = (s1 / nf, s2 / nf);
    if !(m1 > T::zero()) {
        return Err(Error::Degenerate(format!("mean intensity at {pixel:?} is zero")));
    }
    Ok(m2 / (m1 * m1))
}

/// `A = sqrt(max(C, 0) / C(0))`, reinterpreting lag bins as frequency bins.
pub fn amplitude_from_correlation<T: Real>(map: &CorrelationMap<T>) -> Result<AmplitudeMap<T>> {
    let peak = map.peak();
    if !(peak > T::zero()) {
        return Err(Error::Degenerate(format!(
            "zero-lag correlation at position {} is {peak}",
            map.position_index()
        )));
    }
    let values = map.values().map(|v| (v.max(T::zero()) / peak).sqrt());
    AmplitudeMap::new(values, map.position_index())
}
