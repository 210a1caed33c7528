//! `simulate` and `reconstruct`: raw datasets in PIID containers.
//!
//! A simulated container holds, per scan position, the nominal and true
//! offsets and (with `store_frames`) every speckle frame. With
//! `save_amplitudes` it also carries the amplitude map of each position
//! (section index = position) and of the full-field illumination
//! (index = number of positions).

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use pii_core::correlation::{
    amplitude_from_correlation, AmplitudeMap, CorrelationMap, FluctuationAccumulator, CHUNK_FRAMES,
};
use pii_core::Dims;
use pii_core::fft::Fft2;
use pii_core::optics::SpeckleSource;
use pii_core::piid::{Header, PiidContainer, PiidReader, PiidWriter, PositionRecord, Section, SectionKind};
use pii_core::scan::{ScanPlan, ScanPosition};

use crate::config::{Algorithm, ExperimentConfig};
use crate::error::{HarnessError, Result};
use crate::output::residual_csv;
use crate::pgm::write_pgm;
use crate::scenarios::{reconstruct, score, Data, Reconstruction};
use crate::scene::Scene;

/// Frame reduction in fixed chunks, matching the in-memory estimator bit for bit.
struct ChunkedSum {
    total: FluctuationAccumulator<f64>,
    chunk: FluctuationAccumulator<f64>,
}

impl ChunkedSum {
    fn new(dims: Dims) -> Self {
        Self {
            total: FluctuationAccumulator::new(dims),
            chunk: FluctuationAccumulator::new(dims),
        }
    }

    fn push(&mut self, fft: &Fft2<f64>, frame: &[f64]) {
        self.chunk.push(fft, frame);
        if self.chunk.n_frames() == CHUNK_FRAMES {
            self.flush();
        }
    }

    fn flush(&mut self) {
        if self.chunk.n_frames() > 0 {
            let dims = self.chunk.dims();
            self.total.merge(&std::mem::replace(&mut self.chunk, FluctuationAccumulator::new(dims)));
        }
    }

    fn finish(mut self, fft: &Fft2<f64>, index: usize) -> Result<CorrelationMap<f64>> {
        self.flush();
        Ok(self.total.finish(fft, index)?)
    }
}

/// Simulate the configured scan (first shift value, master seed `cfg.seed`)
/// and write it to `path`.
pub fn simulate_dataset(cfg: &ExperimentConfig, path: &Path) -> Result<Header> {
    cfg.validate()?;
    let scene = Scene::new(cfg)?;
    let plan = scene.shifted_plan(cfg.shift_list()[0], cfg.seed)?;
    let header = Header {
        dims: scene.dims,
        n_positions: plan.len() as u32,
        n_frames: if cfg.store_frames { cfg.frames as u32 } else { 0 },
        master_seed: cfg.seed,
    };
    let mut w = PiidWriter::new(BufWriter::new(File::create(path)?), header)?;
    let fft = Fft2::<f64>::new(scene.dims);
    let mut amps = Vec::with_capacity(plan.len());
    let mut field = Vec::new();
    let mut frame = vec![0.0; scene.dims.len()];
    for (i, p) in plan.positions().iter().enumerate() {
        w.begin_position(p.nominal, p.true_)?;
        let src = SpeckleSource::new(&scene.object, &scene.probe, p.true_, i, cfg.seed)?;
        let mut acc = ChunkedSum::new(scene.dims);
        for k in 0..cfg.frames {
            src.frame_into(k, &mut field, &mut frame);
            if cfg.store_frames {
                w.write_frame(&frame)?;
            }
            acc.push(&fft, &frame);
        }
        amps.push(amplitude_from_correlation(&acc.finish(&fft, i)?)?);
    }
    if cfg.save_amplitudes {
        for a in &amps {
            w.write_section(&Section::from_grid(SectionKind::Amplitude, a.position_index() as u32, a.values()))?;
        }
        let full = scene.full_field_amplitude(cfg.frames, cfg.seed)?;
        w.write_section(&Section::from_grid(SectionKind::Amplitude, plan.len() as u32, full.values()))?;
    }
    w.finish()?.into_inner().map_err(|e| HarnessError::Io(e.into_error()))?;
    Ok(header)
}

/// Amplitude maps of a dataset: stored sections when present for every
/// position, otherwise estimated from the stored frames.
/// Positions, per-position amplitude maps and the full-field map if stored.
pub type DatasetAmplitudes = (ScanPlanData, Vec<AmplitudeMap<f64>>, Option<AmplitudeMap<f64>>);

pub fn load_amplitudes(path: &Path) -> Result<DatasetAmplitudes> {
    let mut r = PiidReader::new(BufReader::new(File::open(path)?))?;
    let h = r.header();
    let fft = Fft2::<f64>::new(h.dims);
    let mut positions = Vec::with_capacity(h.n_positions as usize);
    let mut from_frames = Vec::new();
    let mut frame = vec![0.0; h.dims.len()];
    for i in 0..h.n_positions as usize {
        let (nominal, true_) = r.read_position()?;
        positions.push(ScanPosition { nominal, true_ });
        let mut acc = ChunkedSum::new(h.dims);
        for _ in 0..h.n_frames {
            r.read_frame(&mut frame)?;
            acc.push(&fft, &frame);
        }
        if h.n_frames >= 2 {
            from_frames.push(amplitude_from_correlation(&acc.finish(&fft, i)?)?);
        }
    }
    let mut stored: Vec<Option<AmplitudeMap<f64>>> = vec![None; h.n_positions as usize + 1];
    while let Some(s) = r.read_section()? {
        if s.kind == SectionKind::Amplitude && (s.index as usize) < stored.len() {
            stored[s.index as usize] = Some(AmplitudeMap::new(s.to_grid(), s.index as usize)?);
        }
    }
    let full = stored.pop().flatten();
    let amps = if stored.iter().all(Option::is_some) {
        stored.into_iter().map(Option::unwrap).collect()
    } else if from_frames.len() == positions.len() {
        from_frames
    } else {
        return Err(HarnessError::Invalid(format!(
            "{}: neither amplitude sections nor frames for every position",
            path.display()
        )));
    };
    Ok((ScanPlanData { header: h, positions }, amps, full))
}

/// Positions and header read from a dataset.
#[derive(Debug, Clone)]
pub struct ScanPlanData {
    pub header: Header,
    pub positions: Vec<ScanPosition>,
}

/// Paths written by [`reconstruct_dataset`].
#[derive(Debug, Clone)]
pub struct ReconstructOutput {
    pub image: PathBuf,
    pub residual_csv: PathBuf,
    pub container: PathBuf,
    pub reconstruction: Reconstruction,
    /// Quality against the configured object, when the dataset matches it.
    pub quality: Option<f64>,
}

/// Reconstruct a dataset with the configured algorithm, probe and loose radius.
pub fn reconstruct_dataset(cfg: &ExperimentConfig, path: &Path, out: &Path) -> Result<ReconstructOutput> {
    let (data, amps, full) = load_amplitudes(path)?;
    let mut cfg = cfg.clone();
    cfg.grid = data.header.dims.width;
    cfg.steps = data.positions.len();
    let scene = Scene::new(&cfg)?;
    let plan = ScanPlan::from_positions(
        data.positions
            .iter()
            .map(|p| ScanPosition {
                nominal: p.nominal,
                true_: p.nominal,
            })
            .collect(),
        cfg.step_px,
        cfg.axis,
        scene.probe.bounds(),
    )?;
    let loose = cfg.loose_list()[0];
    let d = match cfg.algorithm {
        Algorithm::Pii => Data::Scan { plan: &plan, amps: &amps, loose_px: loose },
        _ => Data::FullField(full.as_ref().ok_or_else(|| {
            HarnessError::Invalid(format!("{}: no full-field amplitude section for {}", path.display(), cfg.algorithm))
        })?),
    };
    let iters = cfg.iters;
    let rec = reconstruct(&scene, cfg.algorithm, d, iters, &cfg, data.header.master_seed)?;
    std::fs::create_dir_all(out)?;
    let image = out.join("reconstruction.pgm");
    let csv = out.join("residual.csv");
    let container = out.join("reconstruction.piid");
    write_pgm(&image, &rec.image)?;
    std::fs::write(&csv, residual_csv(&rec.residuals))?;
    PiidContainer {
        dims: scene.dims,
        n_frames: 0,
        master_seed: data.header.master_seed,
        positions: data
            .positions
            .iter()
            .map(|p| PositionRecord {
                nominal: p.nominal,
                true_: p.true_,
                frames: Vec::new(),
            })
            .collect(),
        sections: vec![Section::from_grid(SectionKind::Reconstruction, 0, &rec.image)],
    }
    .save(&container)?;
    let quality = (plan.nominal().eq(scene.plan.nominal())).then(|| score(&rec.image, &scene.truth()));
    Ok(ReconstructOutput {
        image,
        residual_csv: csv,
        container,
        reconstruction: rec,
        quality,
    })
}
