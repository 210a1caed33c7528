//! Ptychographic reconstruction from per-position intensity-correlation moduli.
//!
//! Each iteration visits every scan position once. At position `R` the exit
//! wave `X = O * P_R` is formed with the (optionally dilated) probe at its
//! nominal location, its transform modulus is replaced by the measured
//! amplitude, and the object is corrected inside the probe:
//!
//! ```text
//! O <- max(Re(O + w * P_R * (X' - X) / max(P_R^2)), 0)
//! ```
//!
//! Amplitude maps are peak-normalised independently per position, so before
//! each projection the map is rescaled to the current exit wave's zero-frequency
//! magnitude. Visit order alternates direction between iterations.

use num_complex::Complex;

use crate::correlation::AmplitudeMap;
use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::grid::{Dims, Grid};
use crate::optics::ProbeAperture;
use crate::scalar::Real;
use crate::scan::ScanPlan;

use super::projection::apply_modulus;
use super::residual::{exit_spectrum, ResidualSum};
use super::state::{init_estimate, InitMode};
use super::support::{dilate_support, SupportMask};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiiOptions {
    pub loose_px: u32,
    pub n_iter: usize,
    pub seed: u64,
    pub init: InitMode,
    /// Update weight `w`.
    pub relaxation: f64,
}

impl Default for PiiOptions {
    fn default() -> Self {
        Self {
            loose_px: 0,
            n_iter: 20,
            seed: 0,
            init: InitMode::Uniform,
            relaxation: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiiOutcome<T> {
    pub object: Grid<T>,
    /// One entry per completed iteration.
    pub residual_history: Vec<T>,
}

/// Probe masks used by the reconstruction: translated to every nominal
/// position, then dilated by `loose_px` (clipped to the grid).
pub fn reconstruction_masks<T: Real>(probe: &ProbeAperture<T>, plan: &ScanPlan, loose_px: u32) -> Result<Vec<Grid<T>>> {
    probe.dims().ensure_eq(plan.dims())?;
    plan.nominal()
        .map(|r| {
            let m = probe.translated(r)?;
            Ok(if loose_px == 0 {
                m
            } else {
                dilate_support(&SupportMask::from_values(&m), loose_px).to_values()
            })
        })
        .collect()
}

/// Residual of `estimate` against every position's amplitude, using the
/// nominal, dilated probes.
pub fn reciprocal_residual<T: Real>(
    estimate: &Grid<T>,
    amps: &[AmplitudeMap<T>],
    probe: &ProbeAperture<T>,
    plan: &ScanPlan,
    loose_px: u32,
) -> Result<T> {
    let masks = reconstruction_masks(probe, plan, loose_px)?;
    super::residual::reciprocal_residual_masks(estimate, amps, &masks)
}

pub fn pii_reconstruct<T: Real>(
    amps: &[AmplitudeMap<T>],
    probe: &ProbeAperture<T>,
    plan: &ScanPlan,
    loose_px: u32,
    n_iter: usize,
    seed: u64,
) -> Result<PiiOutcome<T>> {
    let opts = PiiOptions {
        loose_px,
        n_iter,
        seed,
        ..PiiOptions::default()
    };
    PiiEngine::new(amps, probe, plan, &opts)?.run(n_iter)
}

pub fn pii_reconstruct_with<T: Real>(
    amps: &[AmplitudeMap<T>],
    probe: &ProbeAperture<T>,
    plan: &ScanPlan,
    opts: &PiiOptions,
) -> Result<PiiOutcome<T>> {
    PiiEngine::new(amps, probe, plan, opts)?.run(opts.n_iter)
}

/// Stateful PII run; exposes single iterations for inspection.
pub struct PiiEngine<'a, T: Real> {
    amps: &'a [AmplitudeMap<T>],
    masks: Vec<Grid<T>>,
    mask_peak: Vec<T>,
    plan: Fft2<T>,
    object: Vec<T>,
    relaxation: T,
    iteration: usize,
    residuals: Vec<T>,
    exit: Vec<Complex<T>>,
}

impl<'a, T: Real> PiiEngine<'a, T> {
    pub fn new(amps: &'a [AmplitudeMap<T>], probe: &ProbeAperture<T>, plan: &ScanPlan, opts: &PiiOptions) -> Result<Self> {
        if amps.len() != plan.len() {
            return Err(Error::InvalidInput {
                what: "PII inputs",
                detail: format!("{} amplitude maps for {} scan positions", amps.len(), plan.len()),
            });
        }
        let dims = probe.dims();
        for a in amps {
            dims.ensure_eq(a.dims())?;
        }
        if !(opts.relaxation > 0.0 && opts.relaxation <= 2.0) {
            return Err(Error::InvalidInput {
                what: "PII relaxation",
                detail: format!("w = {} is outside (0, 2]", opts.relaxation),
            });
        }
        let masks = reconstruction_masks(probe, plan, opts.loose_px)?;
        let mask_peak = masks
            .iter()
            .map(|m| m.iter().fold(T::zero(), |a, &v| a.max(v * v)))
            .collect();
        // Pixels no probe reaches are unconstrained by the data; they start (and stay) at zero.
        let object = init_estimate::<T>(dims, opts.init, opts.seed)
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if masks.iter().any(|m| m.as_slice()[i] > T::zero()) {
                    v.re
                } else {
                    T::zero()
                }
            })
            .collect();
        Ok(Self {
            amps,
            masks,
            mask_peak,
            plan: Fft2::new(dims),
            object,
            relaxation: T::of(opts.relaxation),
            iteration: 0,
            residuals: Vec::new(),
            exit: Vec::with_capacity(dims.len()),
        })
    }

    pub fn dims(&self) -> Dims {
        self.plan.dims()
    }

    pub fn object(&self) -> Grid<T> {
        Grid::from_vec(self.dims(), self.object.clone()).expect("sized to dims")
    }

    /// Replace the current estimate (negative values are clamped).
    pub fn set_object(&mut self, object: &Grid<T>) -> Result<()> {
        self.dims().ensure_eq(object.dims())?;
        self.object = object.iter().map(|&v| v.max(T::zero())).collect();
        Ok(())
    }

    pub fn residual_history(&self) -> &[T] {
        &self.residuals
    }

    fn update_position(&mut self, i: usize) {
        let mask = self.masks[i].as_slice();
        let amp = self.amps[i].values().as_slice();
        self.exit.clear();
        self.exit.extend(
            self.object
                .iter()
                .zip(mask)
                .map(|(&o, &p)| Complex::new(o * p, T::zero())),
        );
        self.plan.forward_centered(&mut self.exit);
        let centre = {
            let (r, c) = self.dims().center();
            r * self.dims().width + c
        };
        let dc_amp = amp[centre];
        let dc_est = self.exit[centre].norm();
        let scale = if dc_amp > T::zero() && dc_est > T::zero() {
            dc_est / dc_amp
        } else {
            T::one()
        };
        apply_modulus(&mut self.exit, amp, scale);
        self.plan.inverse_centered(&mut self.exit);
        let peak = self.mask_peak[i];
        if !(peak > T::zero()) {
            return;
        }
        let w = self.relaxation / peak;
        for ((o, &p), x) in self.object.iter_mut().zip(mask).zip(&self.exit) {
            if p > T::zero() {
                let current = *o * p;
                *o = (*o + w * p * (x.re - current)).max(T::zero());
            }
        }
    }

    fn residual(&mut self) -> Result<T> {
        let est = self.object();
        let mut sum = ResidualSum::default();
        for (amp, mask) in self.amps.iter().zip(&self.masks) {
            exit_spectrum(&self.plan, &est, mask, &mut self.exit);
            sum.add(&self.exit, amp.values().as_slice());
        }
        sum.value()
    }

    /// One pass over all positions; returns the residual after the pass.
    pub fn iterate(&mut self) -> Result<T> {
        let n = self.amps.len();
        let forward = self.iteration.is_multiple_of(2);
        for k in 0..n {
            self.update_position(if forward { k } else { n - 1 - k });
        }
        self.iteration += 1;
        let r = self.residual()?;
        self.residuals.push(r);
        Ok(r)
    }

    pub fn run(mut self, n_iter: usize) -> Result<PiiOutcome<T>> {
        for _ in 0..n_iter {
            self.iterate()?;
        }
        Ok(PiiOutcome {
            object: self.object(),
            residual_history: self.residuals,
        })
    }
}
