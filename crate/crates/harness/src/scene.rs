//! Scan geometry and simulated correlation data for one configuration.

use std::collections::BTreeMap;

use pii_core::correlation::{amplitude_from_correlation, correlate_source, AmplitudeMap};
use pii_core::fft::Fft2;
use pii_core::optics::{ObjectSample, ProbeAperture, SpeckleSource};
use pii_core::retrieval::SupportMask;
use pii_core::scan::{inject_shift_error, make_scan_plan, probe_mask, ScanAxis, ScanPlan};
use pii_core::{seed, Dims, Grid, Offset};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::Result;

/// Seed stream used for shift-error draws, separate from the speckle streams.
const SHIFT_STREAM: u64 = 0x5348_4946_5400;

/// Seed of replicate `r` under `master`.
pub fn replicate_seed(master: u64, r: usize) -> u64 {
    seed::derive(master, r as u64)
}

/// Seed of the shift-error draws for a replicate; independent of the
/// percentage, so larger errors scale the same draws.
pub fn shift_seed(replicate_seed: u64) -> u64 {
    seed::derive(replicate_seed, SHIFT_STREAM)
}

/// Object, probe and nominal scan for a configuration.
///
/// The probe starts centred on the grid rows and the raster is centred on
/// the grid along the scan axis.
#[derive(Debug, Clone)]
pub struct Scene {
    pub dims: Dims,
    pub object: ObjectSample<f64>,
    pub probe: ProbeAperture<f64>,
    pub plan: ScanPlan,
    /// Union of the probe masks at the nominal positions.
    pub footprint: Grid<f64>,
}

impl Scene {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let dims = cfg.dims()?;
        let object = ObjectSample::new(cfg.object.render(dims)?)?;
        Self::with_object(dims, object, cfg.probe_px, cfg.steps, cfg.step_px, cfg.axis)
    }

    pub fn with_object(
        dims: Dims,
        object: ObjectSample<f64>,
        probe_px: usize,
        steps: usize,
        step_px: u32,
        axis: ScanAxis,
    ) -> Result<Self> {
        let span = (steps.saturating_sub(1)) * step_px as usize;
        let first = |n: usize| n.saturating_sub(span) / 2;
        let (cy, cx) = dims.center();
        let center = match axis {
            ScanAxis::X => (cy, first(dims.width)),
            ScanAxis::Y => (first(dims.height), cx),
            ScanAxis::XyGrid => (first(dims.height), first(dims.width)),
        };
        let probe = probe_mask(probe_px, dims, center)?;
        let plan = make_scan_plan(&probe, steps, step_px, axis, Offset::ZERO)?;
        let mut footprint = Grid::filled(dims, 0.0);
        for o in plan.nominal() {
            let m = probe.translated(o)?;
            footprint = footprint.zip_map(&m, f64::max);
        }
        Ok(Self {
            dims,
            object,
            probe,
            plan,
            footprint,
        })
    }

    /// Ground truth for scoring: the object where the nominal scan illuminates it.
    pub fn truth(&self) -> Grid<f64> {
        self.object.values().zip_map(&self.footprint, |o, p| o * p)
    }

    pub fn footprint_support(&self) -> SupportMask {
        SupportMask::from_values(&self.footprint)
    }

    pub fn shifted_plan(&self, pct: f64, replicate_seed: u64) -> Result<ScanPlan> {
        Ok(inject_shift_error(&self.plan, pct, shift_seed(replicate_seed))?)
    }

    /// Per-position amplitude maps simulated at the plan's true positions.
    pub fn amplitudes(&self, plan: &ScanPlan, n_frames: usize, master_seed: u64) -> Result<Vec<AmplitudeMap<f64>>> {
        Ok(self.amplitudes_for(&[plan], n_frames, master_seed)?.remove(0))
    }

    /// Amplitudes for several plans of the same scan, simulating each distinct
    /// (position index, true offset) pair once.
    pub fn amplitudes_for(
        &self,
        plans: &[&ScanPlan],
        n_frames: usize,
        master_seed: u64,
    ) -> Result<Vec<Vec<AmplitudeMap<f64>>>> {
        let mut keys: Vec<(usize, Offset)> = plans
            .iter()
            .flat_map(|p| p.true_positions().enumerate())
            .collect();
        keys.sort_by_key(|&(i, o)| (i, o.row, o.col));
        keys.dedup();
        let maps: Vec<AmplitudeMap<f64>> = keys
            .par_iter()
            .map(|&(i, o)| self.amplitude_at(o, i, n_frames, master_seed))
            .collect::<Result<_>>()?;
        let table: BTreeMap<(usize, i32, i32), &AmplitudeMap<f64>> =
            keys.iter().zip(&maps).map(|(&(i, o), m)| ((i, o.row, o.col), m)).collect();
        Ok(plans
            .iter()
            .map(|p| {
                p.true_positions()
                    .enumerate()
                    .map(|(i, o)| table[&(i, o.row, o.col)].clone())
                    .collect()
            })
            .collect())
    }

    fn amplitude_at(&self, offset: Offset, index: usize, n_frames: usize, master_seed: u64) -> Result<AmplitudeMap<f64>> {
        let src = SpeckleSource::new(&self.object, &self.probe, offset, index, master_seed)?;
        Ok(amplitude_from_correlation(&correlate_source(&src, n_frames)?)?)
    }

    /// Full-field amplitude: the whole nominal footprint illuminated at once.
    /// Uses speckle stream `plan.len()`, distinct from every scan position.
    pub fn full_field_amplitude(&self, n_frames: usize, master_seed: u64) -> Result<AmplitudeMap<f64>> {
        let illum = ProbeAperture::new(self.footprint.clone(), self.probe.diameter(), self.dims.center())?;
        let src = SpeckleSource::new(&self.object, &illum, Offset::ZERO, self.plan.len(), master_seed)?;
        Ok(amplitude_from_correlation(&correlate_source(&src, n_frames)?)?)
    }

    /// Noise-free amplitude maps at the plan's true positions, peak-normalised.
    pub fn exact_amplitudes(&self, plan: &ScanPlan) -> Result<Vec<AmplitudeMap<f64>>> {
        let fft = Fft2::<f64>::new(self.dims);
        plan.true_positions()
            .enumerate()
            .map(|(i, o)| {
                let m = self.probe.translated(o)?;
                Ok(AmplitudeMap::new(exact_modulus(&fft, &self.object.values().zip_map(&m, |a, b| a * b)), i)?)
            })
            .collect()
    }

    /// Root-mean-square difference between measured and noise-free amplitudes.
    pub fn spectrum_rmse(&self, plan: &ScanPlan, amps: &[AmplitudeMap<f64>]) -> Result<f64> {
        let exact = self.exact_amplitudes(plan)?;
        let (mut s, mut n) = (0.0, 0usize);
        for (a, e) in amps.iter().zip(&exact) {
            for (x, y) in a.values().iter().zip(e.values().iter()) {
                s += (x - y) * (x - y);
                n += 1;
            }
        }
        Ok((s / n as f64).sqrt())
    }
}

/// `|F{g}|`, divided by its zero-frequency value.
pub fn exact_modulus(fft: &Fft2<f64>, g: &Grid<f64>) -> Grid<f64> {
    let mut buf: Vec<_> = g.iter().map(|&v| num_complex::Complex64::new(v, 0.0)).collect();
    fft.forward_centered(&mut buf);
    let d = g.dims();
    let (cy, cx) = d.center();
    let dc = buf[cy * d.width + cx].norm();
    let scale = if dc > 0.0 { 1.0 / dc } else { 1.0 };
    Grid::from_vec(d, buf.iter().map(|v| v.norm() * scale).collect()).expect("sized to dims")
}
