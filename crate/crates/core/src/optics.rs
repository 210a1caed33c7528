//! Pseudothermal illumination, object/probe transmission, far-field
//! propagation and intensity recording.
//!
//! The source is delta-correlated per grid pixel: every pixel carries an
//! independent circular complex Gaussian amplitude with `E[|E|^2] = 1`.
//! The object stores intensity transmittance `O`; the field is multiplied by
//! `sqrt(O)` so that the recorded fluctuation spectrum is `|F{O * mask}|^2`.

use num_complex::Complex;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::grid::{Dims, Grid, Offset};
use crate::scalar::Real;
use crate::seed;

/// Complex amplitude on a power-of-two grid with a pixel pitch.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField<T> {
    data: Grid<Complex<T>>,
    pitch: T,
}

impl<T: Real> ComplexField<T> {
    pub fn new(data: Grid<Complex<T>>, pitch: T) -> Result<Self> {
        let dims = data.dims();
        Dims::new(dims.width, dims.height)?;
        if !(pitch.is_finite() && pitch > T::zero()) {
            return Err(Error::InvalidInput {
                what: "pixel pitch",
                detail: format!("{pitch} is not a positive finite length"),
            });
        }
        if data.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidInput {
                what: "complex field",
                detail: "contains NaN or infinite samples".into(),
            });
        }
        Ok(Self { data, pitch })
    }

    pub fn zeros(dims: Dims) -> Self {
        Self {
            data: Grid::filled(dims, Complex::default()),
            pitch: T::one(),
        }
    }

    pub fn dims(&self) -> Dims {
        self.data.dims()
    }

    pub fn pitch(&self) -> T {
        self.pitch
    }

    pub fn grid(&self) -> &Grid<Complex<T>> {
        &self.data
    }

    pub fn into_grid(self) -> Grid<Complex<T>> {
        self.data
    }

    pub fn energy(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, v| acc + v.norm_sqr())
    }
}

/// Intensity transmittance `O(r) >= 0` of the sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectSample<T> {
    values: Grid<T>,
}

impl<T: Real> ObjectSample<T> {
    pub fn new(values: Grid<T>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::InvalidInput {
                what: "object sample",
                detail: "values must be finite and non-negative".into(),
            });
        }
        if !values.iter().any(|v| *v > T::zero()) {
            return Err(Error::InvalidInput {
                what: "object sample",
                detail: "at least one value must be positive".into(),
            });
        }
        Ok(Self { values })
    }

    pub fn dims(&self) -> Dims {
        self.values.dims()
    }

    pub fn values(&self) -> &Grid<T> {
        &self.values
    }

    pub fn into_values(self) -> Grid<T> {
        self.values
    }
}

/// Bounding box of the non-zero part of a mask, inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaskBounds {
    pub dims: Dims,
    pub min_row: i32,
    pub max_row: i32,
    pub min_col: i32,
    pub max_col: i32,
}

impl MaskBounds {
    fn of<T: Real>(mask: &Grid<T>) -> Option<Self> {
        let dims = mask.dims();
        let mut b: Option<MaskBounds> = None;
        for r in 0..dims.height {
            for c in 0..dims.width {
                if mask[(r, c)] > T::zero() {
                    let (r, c) = (r as i32, c as i32);
                    b = Some(match b {
                        None => MaskBounds {
                            dims,
                            min_row: r,
                            max_row: r,
                            min_col: c,
                            max_col: c,
                        },
                        Some(b) => MaskBounds {
                            min_row: b.min_row.min(r),
                            max_row: b.max_row.max(r),
                            min_col: b.min_col.min(c),
                            max_col: b.max_col.max(c),
                            ..b
                        },
                    });
                }
            }
        }
        b
    }

    /// Whether the mask, translated by `offset`, stays inside the grid.
    pub fn fits(&self, offset: Offset) -> bool {
        let (h, w) = (self.dims.height as i64, self.dims.width as i64);
        let (dr, dc) = (offset.row as i64, offset.col as i64);
        self.min_row as i64 + dr >= 0
            && self.max_row as i64 + dr < h
            && self.min_col as i64 + dc >= 0
            && self.max_col as i64 + dc < w
    }
}

/// Illumination aperture `P(r)`; translated copies give `P(r - R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeAperture<T> {
    mask: Grid<T>,
    diameter: usize,
    center: (usize, usize),
    bounds: MaskBounds,
}

impl<T: Real> ProbeAperture<T> {
    pub fn new(mask: Grid<T>, diameter: usize, center: (usize, usize)) -> Result<Self> {
        if mask.iter().any(|v| !(*v >= T::zero() && *v <= T::one())) {
            return Err(Error::InvalidInput {
                what: "probe mask",
                detail: "values must lie in [0, 1]".into(),
            });
        }
        let bounds = MaskBounds::of(&mask).ok_or_else(|| Error::InvalidInput {
            what: "probe mask",
            detail: "mask is identically zero".into(),
        })?;
        Ok(Self {
            mask,
            diameter,
            center,
            bounds,
        })
    }

    pub fn mask(&self) -> &Grid<T> {
        &self.mask
    }

    pub fn dims(&self) -> Dims {
        self.mask.dims()
    }

    pub fn diameter(&self) -> usize {
        self.diameter
    }

    pub fn center(&self) -> (usize, usize) {
        self.center
    }

    pub fn bounds(&self) -> MaskBounds {
        self.bounds
    }

    pub fn max_value(&self) -> T {
        self.mask.iter().fold(T::zero(), |m, &v| m.max(v))
    }

    /// `P(r - R)` for `R = offset`; fails when the support would leave the grid.
    pub fn translated(&self, offset: Offset) -> Result<Grid<T>> {
        if !self.bounds.fits(offset) {
            return Err(Error::ProbeOutOfGrid {
                row: offset.row,
                col: offset.col,
                dims: self.dims(),
            });
        }
        let dims = self.dims();
        let mut out = Grid::filled(dims, T::zero());
        let b = self.bounds;
        for r in b.min_row..=b.max_row {
            for c in b.min_col..=b.max_col {
                let (tr, tc) = ((r + offset.row) as usize, (c + offset.col) as usize);
                out[(tr, tc)] = self.mask[(r as usize, c as usize)];
            }
        }
        Ok(out)
    }

    /// Same aperture with a different mask (e.g. after dilation); the centre is kept.
    pub fn with_mask(&self, mask: Grid<T>) -> Result<Self> {
        self.dims().ensure_eq(mask.dims())?;
        Self::new(mask, self.diameter, self.center)
    }
}

/// Non-negative detector-plane intensity.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityFrame<T> {
    values: Grid<T>,
    pitch: T,
}

impl<T: Real> IntensityFrame<T> {
    pub fn new(values: Grid<T>, pitch: T) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::InvalidInput {
                what: "intensity frame",
                detail: "values must be finite and non-negative".into(),
            });
        }
        Ok(Self { values, pitch })
    }

    pub fn dims(&self) -> Dims {
        self.values.dims()
    }

    pub fn pitch(&self) -> T {
        self.pitch
    }

    pub fn values(&self) -> &Grid<T> {
        &self.values
    }

    pub fn total(&self) -> T {
        self.values.iter().fold(T::zero(), |a, &v| a + v)
    }
}

/// Frames recorded at one probe position.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeckleEnsemble<T> {
    frames: Vec<IntensityFrame<T>>,
    position_index: usize,
    master_seed: u64,
}

impl<T: Real> SpeckleEnsemble<T> {
    pub fn new(frames: Vec<IntensityFrame<T>>, position_index: usize, master_seed: u64) -> Result<Self> {
        let first = frames.first().ok_or(Error::TooFewFrames {
            required: 1,
            actual: 0,
        })?;
        let dims = first.dims();
        for f in &frames {
            dims.ensure_eq(f.dims())?;
        }
        Ok(Self {
            frames,
            position_index,
            master_seed,
        })
    }

    pub fn frames(&self) -> &[IntensityFrame<T>] {
        &self.frames
    }

    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn dims(&self) -> Dims {
        self.frames[0].dims()
    }

    pub fn position_index(&self) -> usize {
        self.position_index
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }
}

/// Delta-correlated circular complex Gaussian field with `E[|E|^2] = 1`.
pub fn gen_thermal_field<T: Real>(dims: Dims, seed: u64) -> Result<ComplexField<T>> {
    gen_thermal_field_scaled(dims, seed, T::one())
}

/// Thermal field with mean intensity `mean_intensity` (each quadrature has
/// variance `mean_intensity / 2`).
pub fn gen_thermal_field_scaled<T: Real>(dims: Dims, seed: u64, mean_intensity: T) -> Result<ComplexField<T>> {
    let dims = Dims::new(dims.width, dims.height)?;
    if !(mean_intensity >= T::zero() && mean_intensity.is_finite()) {
        return Err(Error::InvalidInput {
            what: "source intensity",
            detail: format!("{mean_intensity} is not a finite non-negative value"),
        });
    }
    let mut data = Vec::with_capacity(dims.len());
    fill_thermal(&mut data, dims.len(), seed, mean_intensity);
    ComplexField::new(Grid::from_vec(dims, data)?, T::one())
}

fn fill_thermal<T: Real>(out: &mut Vec<Complex<T>>, n: usize, seed: u64, mean_intensity: T) {
    let sigma = (mean_intensity.as_f64() * 0.5).sqrt();
    let mut rng = seed::rng(seed);
    out.clear();
    out.extend((0..n).map(|_| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex::new(T::of(re * sigma), T::of(im * sigma))
    }));
}

/// `X(r) = E(r) * sqrt(O(r)) * P(r - R)`.
pub fn apply_transmission<T: Real>(
    field: &ComplexField<T>,
    object: &ObjectSample<T>,
    probe: &ProbeAperture<T>,
    position: Offset,
) -> Result<ComplexField<T>> {
    let t = transmission(object, probe, position)?;
    field.dims().ensure_eq(t.dims())?;
    let out = field.grid().zip_map(&t, |e, a| e * a);
    Ok(ComplexField {
        data: out,
        pitch: field.pitch,
    })
}

/// Amplitude transmission `sqrt(O(r)) * P(r - R)` seen by the field.
pub fn transmission<T: Real>(object: &ObjectSample<T>, probe: &ProbeAperture<T>, position: Offset) -> Result<Grid<T>> {
    object.dims().ensure_eq(probe.dims())?;
    let mask = probe.translated(position)?;
    Ok(object.values().zip_map(&mask, |o, m| o.sqrt() * m))
}

/// Fraunhofer propagation as the unitary centred DFT.
pub fn propagate_farfield<T: Real>(field: &ComplexField<T>) -> ComplexField<T> {
    let plan = Fft2::new(field.dims());
    propagate_with(&plan, field, true)
}

/// Inverse of [`propagate_farfield`].
pub fn propagate_farfield_inverse<T: Real>(field: &ComplexField<T>) -> ComplexField<T> {
    let plan = Fft2::new(field.dims());
    propagate_with(&plan, field, false)
}

fn propagate_with<T: Real>(plan: &Fft2<T>, field: &ComplexField<T>, forward: bool) -> ComplexField<T> {
    let mut data = field.grid().clone();
    if forward {
        plan.forward_centered(data.as_mut_slice());
    } else {
        plan.inverse_centered(data.as_mut_slice());
    }
    // Detector pitch is the DFT-conjugate of the object pitch.
    let n = T::of(field.dims().width as f64);
    ComplexField {
        data,
        pitch: T::one() / (n * field.pitch),
    }
}

/// `I = |E|^2` per pixel.
pub fn record_intensity<T: Real>(field: &ComplexField<T>) -> IntensityFrame<T> {
    IntensityFrame {
        values: field.grid().map(|v| v.norm_sqr()),
        pitch: field.pitch,
    }
}

/// Frame generator for one probe position.
///
/// Frame `k` depends only on `(master_seed, position_index, k)` and the
/// fixed transmission, so frames can be produced in any order or in parallel.
pub struct SpeckleSource<T: Real> {
    plan: Fft2<T>,
    transmission: Grid<T>,
    master_seed: u64,
    position_index: usize,
}

impl<T: Real> SpeckleSource<T> {
    pub fn new(
        object: &ObjectSample<T>,
        probe: &ProbeAperture<T>,
        position: Offset,
        position_index: usize,
        master_seed: u64,
    ) -> Result<Self> {
        let transmission = transmission(object, probe, position)?;
        Ok(Self {
            plan: Fft2::new(object.dims()),
            transmission,
            master_seed,
            position_index,
        })
    }

    pub fn dims(&self) -> Dims {
        self.transmission.dims()
    }

    pub fn position_index(&self) -> usize {
        self.position_index
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn frame_seed(&self, k: usize) -> u64 {
        seed::frame_seed(self.master_seed, self.position_index as u64, k as u64)
    }

    /// Speckle frame `k`, written into `buf` (length = pixel count).
    pub fn frame_into(&self, k: usize, scratch: &mut Vec<Complex<T>>, out: &mut [T]) {
        let n = self.transmission.dims().len();
        fill_thermal(scratch, n, self.frame_seed(k), T::one());
        for (e, &t) in scratch.iter_mut().zip(self.transmission.iter()) {
            *e = *e * t;
        }
        self.plan.forward_centered(scratch);
        for (o, e) in out.iter_mut().zip(scratch.iter()) {
            *o = e.norm_sqr();
        }
    }

    pub fn frame(&self, k: usize) -> IntensityFrame<T> {
        let dims = self.dims();
        let mut scratch = Vec::with_capacity(dims.len());
        let mut out = vec![T::zero(); dims.len()];
        self.frame_into(k, &mut scratch, &mut out);
        IntensityFrame {
            values: Grid::from_vec(dims, out).expect("sized to dims"),
            pitch: T::one() / T::of(dims.width as f64),
        }
    }
}

/// Record `n_frames` speckle frames for one probe position.
///
/// Frame `k` equals
/// `record_intensity(propagate_farfield(apply_transmission(gen_thermal_field(dims, frame_seed(master_seed, position_index, k)), ..)))`.
pub fn simulate_ensemble<T: Real>(
    object: &ObjectSample<T>,
    probe: &ProbeAperture<T>,
    position: Offset,
    position_index: usize,
    n_frames: usize,
    master_seed: u64,
) -> Result<SpeckleEnsemble<T>> {
    if n_frames == 0 {
        return Err(Error::TooFewFrames {
            required: 1,
            actual: 0,
        });
    }
    let source = SpeckleSource::new(object, probe, position, position_index, master_seed)?;
    let frames: Vec<_> = (0..n_frames).into_par_iter().map(|k| source.frame(k)).collect();
    SpeckleEnsemble::new(frames, position_index, master_seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims(n: usize) -> Dims {
        Dims::square(n).unwrap()
    }

    fn full_probe(n: usize) -> ProbeAperture<f64> {
        ProbeAperture::new(Grid::filled(dims(n), 1.0), n, (n / 2, n / 2)).unwrap()
    }

    #[test]
    fn zero_intensity_source_is_zero() {
        let f = gen_thermal_field_scaled::<f64>(dims(8), 3, 0.0).unwrap();
        assert!(f.grid().iter().all(|v| *v == Complex::default()));
    }

    #[test]
    fn thermal_field_is_seed_deterministic() {
        let a = gen_thermal_field::<f64>(dims(16), 11).unwrap();
        let b = gen_thermal_field::<f64>(dims(16), 11).unwrap();
        let c = gen_thermal_field::<f64>(dims(16), 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_dims_rejected() {
        let d = Dims {
            width: 12,
            height: 8,
        };
        assert!(gen_thermal_field::<f64>(d, 0).is_err());
    }

    #[test]
    fn identity_transmission() {
        let field = gen_thermal_field::<f64>(dims(8), 1).unwrap();
        let obj = ObjectSample::new(Grid::filled(dims(8), 1.0)).unwrap();
        let out = apply_transmission(&field, &obj, &full_probe(8), Offset::ZERO).unwrap();
        assert_eq!(out, field);
    }

    #[test]
    fn zero_object_rejected_but_zero_transmission_zeroes_field() {
        assert!(ObjectSample::new(Grid::filled(dims(8), 0.0)).is_err());
        // A delta object: only one pixel transmits.
        let mut o = Grid::filled(dims(8), 0.0);
        o[(3, 4)] = 4.0;
        let obj = ObjectSample::new(o).unwrap();
        let field = gen_thermal_field::<f64>(dims(8), 5).unwrap();
        let out = apply_transmission(&field, &obj, &full_probe(8), Offset::ZERO).unwrap();
        for r in 0..8 {
            for c in 0..8 {
                if (r, c) == (3, 4) {
                    assert_eq!(out.grid()[(r, c)], field.grid()[(r, c)] * 2.0);
                } else {
                    assert_eq!(out.grid()[(r, c)], Complex::default());
                }
            }
        }
    }

    #[test]
    fn translated_probe_leaving_grid_names_position() {
        let mut m = Grid::filled(dims(16), 0.0);
        for r in 6..10 {
            for c in 6..10 {
                m[(r, c)] = 1.0;
            }
        }
        let probe = ProbeAperture::new(m, 4, (8, 8)).unwrap();
        assert!(probe.translated(Offset::new(0, 6)).is_ok());
        let err = probe.translated(Offset::new(0, 7)).unwrap_err();
        assert!(err.to_string().contains("(0, 7)"), "{err}");
    }

    #[test]
    fn delta_at_center_propagates_to_flat_magnitude() {
        let mut g = Grid::filled(dims(16), Complex::default());
        g[(8, 8)] = Complex::new(1.0, 0.0);
        let out = propagate_farfield(&ComplexField::new(g, 1.0).unwrap());
        for v in out.grid().iter() {
            assert!((v.norm() - 0.0625f64).abs() < 1e-12);
            // Centred convention: a centred delta has a flat, real spectrum.
            assert!(f64::abs(v.im) < 1e-12);
        }
    }

    #[test]
    fn record_intensity_cases() {
        let z = ComplexField::<f64>::zeros(dims(4));
        assert!(record_intensity(&z).values().iter().all(|&v| v == 0.0));
        let g = Grid::from_fn(dims(4), |r, c| Complex::from_polar(1.0, (r * 4 + c) as f64));
        let unit = ComplexField::new(g, 1.0).unwrap();
        assert!(record_intensity(&unit)
            .values()
            .iter()
            .all(|&v| (v - 1.0).abs() < 1e-14));
        let f = gen_thermal_field::<f64>(dims(8), 9).unwrap();
        let fr = record_intensity(&f);
        assert_eq!(fr.total(), f.energy());
    }

    #[test]
    fn single_frame_ensemble_equals_manual_composition() {
        let d = dims(16);
        let obj = ObjectSample::new(Grid::from_fn(d, |r, c| ((r + c) % 3) as f64 * 0.5)).unwrap();
        let probe = full_probe(16);
        let ens = simulate_ensemble(&obj, &probe, Offset::ZERO, 2, 1, 99).unwrap();
        let field = gen_thermal_field::<f64>(d, seed::frame_seed(99, 2, 0)).unwrap();
        let manual = record_intensity(&propagate_farfield(
            &apply_transmission(&field, &obj, &probe, Offset::ZERO).unwrap(),
        ));
        assert_eq!(ens.n_frames(), 1);
        assert_eq!(ens.frames()[0].values(), manual.values());
    }

    #[test]
    fn ensemble_requires_a_frame() {
        let obj = ObjectSample::new(Grid::filled(dims(4), 1.0)).unwrap();
        assert!(simulate_ensemble(&obj, &full_probe(4), Offset::ZERO, 0, 0, 1).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let f = gen_thermal_field::<f32>(dims(8), 2).unwrap();
        let back = propagate_farfield_inverse(&propagate_farfield(&f));
        for (a, b) in back.grid().iter().zip(f.grid().iter()) {
            assert!((a - b).norm() < 1e-5);
        }
    }
}
