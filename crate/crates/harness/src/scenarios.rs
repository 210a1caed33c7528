//! Experiment scenarios. Each replicate uses its own seed and output
//! directory `r<k>/`; replicates run concurrently.

use std::fs;
use std::path::Path;
use std::time::Instant;

use pii_core::correlation::AmplitudeMap;
use pii_core::piid::{PiidContainer, PositionRecord, Section, SectionKind};
use pii_core::retrieval::{
    constrained_image, init_state, pii_reconstruct_with, run_er, run_hio, PiiOptions,
};
use pii_core::scan::ScanPlan;
use pii_core::Grid;
use rayon::prelude::*;

use crate::config::{Algorithm, ExperimentConfig, Scenario};
use crate::error::{HarnessError, Result};
use crate::output::{quality_csv, residual_csv, summary_csv, write_manifest, ExperimentResult, RunRecord};
use crate::pgm::write_pgm;
use crate::quality::registered_quality;
use crate::scene::{replicate_seed, Scene};

/// A finished reconstruction.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub image: Grid<f64>,
    pub residuals: Vec<f64>,
    pub runtime_s: f64,
}

/// Inputs of one reconstruction.
pub enum Data<'a> {
    /// Per-position maps with the nominal plan used for reconstruction.
    Scan { plan: &'a ScanPlan, amps: &'a [AmplitudeMap<f64>], loose_px: u32 },
    /// One full-field map; the scene footprint is the support.
    FullField(&'a AmplitudeMap<f64>),
}

pub fn reconstruct(
    scene: &Scene,
    algorithm: Algorithm,
    data: Data<'_>,
    iters: usize,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<Reconstruction> {
    let start = Instant::now();
    let (image, residuals) = match (algorithm, data) {
        (Algorithm::Pii, Data::Scan { plan, amps, loose_px }) => {
            let opts = PiiOptions {
                loose_px,
                n_iter: iters,
                seed,
                init: cfg.init,
                ..PiiOptions::default()
            };
            let out = pii_reconstruct_with(amps, &scene.probe, plan, &opts)?;
            (out.object, out.residual_history)
        }
        (Algorithm::Er | Algorithm::Hio, Data::FullField(amp)) => {
            let support = scene.footprint_support();
            let state = init_state(scene.dims, cfg.init, seed);
            let state = if algorithm == Algorithm::Er {
                run_er(state, amp, &support, iters)?
            } else {
                run_hio(state, amp, &support, cfg.beta, iters)?
            };
            (constrained_image(state.estimate(), &support), state.residual_history().to_vec())
        }
        (a, _) => {
            return Err(HarnessError::Invalid(format!(
                "{a} needs {} data",
                if a == Algorithm::Pii { "scan" } else { "full-field" }
            )))
        }
    };
    Ok(Reconstruction {
        image,
        residuals,
        runtime_s: start.elapsed().as_secs_f64(),
    })
}

/// Quality against the scene truth; a constant image carries no information and scores 0.
pub fn score(image: &Grid<f64>, truth: &Grid<f64>) -> f64 {
    registered_quality(image, truth).unwrap_or(0.0)
}

/// Collects one replicate's artifacts and its PIID container.
struct ReplicateOut<'a> {
    cfg: &'a ExperimentConfig,
    dir: String,
    replicate: usize,
    seed: u64,
    records: Vec<RunRecord>,
    artifacts: Vec<String>,
    truth: Grid<f64>,
}

/// Dataset container under construction.
struct Container {
    name: String,
    inner: PiidContainer,
    next_section: u32,
}

impl Container {
    fn new(name: String, scene: &Scene, plan: &ScanPlan, amps: &[AmplitudeMap<f64>], seed: u64, save: bool) -> Self {
        let sections = if save {
            amps.iter()
                .enumerate()
                .map(|(i, a)| Section::from_grid(SectionKind::Amplitude, i as u32, a.values()))
                .collect()
        } else {
            Vec::new()
        };
        Self {
            name,
            inner: PiidContainer {
                dims: scene.dims,
                n_frames: 0,
                master_seed: seed,
                positions: plan
                    .positions()
                    .iter()
                    .map(|p| PositionRecord {
                        nominal: p.nominal,
                        true_: p.true_,
                        frames: Vec::new(),
                    })
                    .collect(),
                sections,
            },
            next_section: 0,
        }
    }

    fn add_amplitude(&mut self, index: u32, amp: &AmplitudeMap<f64>) {
        self.inner.sections.push(Section::from_grid(SectionKind::Amplitude, index, amp.values()));
    }
}

impl<'a> ReplicateOut<'a> {
    fn new(cfg: &'a ExperimentConfig, scene: &Scene, replicate: usize) -> Result<Self> {
        let dir = format!("r{replicate}");
        fs::create_dir_all(cfg.out.join(&dir))?;
        Ok(Self {
            cfg,
            dir,
            replicate,
            seed: replicate_seed(cfg.seed, replicate),
            records: Vec::new(),
            artifacts: Vec::new(),
            truth: scene.truth(),
        })
    }

    fn container(&self, name: &str, scene: &Scene, plan: &ScanPlan, amps: &[AmplitudeMap<f64>]) -> Container {
        Container::new(
            format!("{}/{name}.piid", self.dir),
            scene,
            plan,
            amps,
            self.seed,
            self.cfg.save_amplitudes,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn emit(
        &mut self,
        container: &mut Container,
        name: &str,
        algorithm: Algorithm,
        n_frames: usize,
        shift_pct: f64,
        loose_px: u32,
        iters: usize,
        rec: Reconstruction,
        spectrum_rmse: Option<f64>,
    ) -> Result<()> {
        let image = format!("{}/{name}.pgm", self.dir);
        let csv = format!("{}/{name}_residual.csv", self.dir);
        write_pgm(&self.cfg.out.join(&image), &rec.image)?;
        fs::write(self.cfg.out.join(&csv), residual_csv(&rec.residuals))?;
        let section = container.next_section;
        container.next_section += 1;
        container
            .inner
            .sections
            .push(Section::from_grid(SectionKind::Reconstruction, section, &rec.image));
        self.artifacts.extend([image.clone(), csv.clone()]);
        self.records.push(RunRecord {
            id: format!("{}/{name}", self.dir),
            replicate: self.replicate,
            seed: self.seed,
            algorithm: algorithm.to_string(),
            n_frames,
            shift_pct,
            loose_px,
            iters,
            quality: score(&rec.image, &self.truth),
            final_residual: rec.residuals.last().copied().unwrap_or(f64::NAN),
            spectrum_rmse,
            runtime_s: rec.runtime_s,
            image,
            residual_csv: csv,
            container: container.name.clone(),
            section,
        });
        Ok(())
    }

    fn close(&mut self, container: Container) -> Result<()> {
        container.inner.save(self.cfg.out.join(&container.name))?;
        self.artifacts.push(container.name);
        Ok(())
    }
}

type ReplicateResult = (Vec<RunRecord>, Vec<String>);

fn run_replicates(
    cfg: &ExperimentConfig,
    job: impl Fn(&Scene, &mut ReplicateOut<'_>) -> Result<()> + Sync,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out)?;
    let scene = Scene::new(cfg)?;
    let parts: Vec<ReplicateResult> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let mut out = ReplicateOut::new(cfg, &scene, r)?;
            job(&scene, &mut out)?;
            Ok((out.records, out.artifacts))
        })
        .collect::<Result<_>>()?;
    let mut records = Vec::new();
    let mut artifacts = Vec::new();
    for (r, a) in parts {
        records.extend(r);
        artifacts.extend(a);
    }
    fs::write(cfg.out.join("quality.csv"), quality_csv(&records))?;
    fs::write(cfg.out.join("summary.csv"), summary_csv(&records))?;
    artifacts.extend(["quality.csv".to_string(), "summary.csv".to_string()]);
    let result = ExperimentResult::new(cfg, records, artifacts);
    write_manifest(&result, &cfg.out)?;
    Ok(result)
}

/// ER and HIO on the full-field map against PII on the scan, one shared dataset.
pub fn run_compare_algorithms(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run_replicates(cfg, |scene, out| {
        let plan = &scene.plan;
        let amps = scene.amplitudes(plan, cfg.frames, out.seed)?;
        let full = scene.full_field_amplitude(cfg.frames, out.seed)?;
        let mut c = out.container("data", scene, plan, &amps);
        if cfg.save_amplitudes {
            c.add_amplitude(plan.len() as u32, &full);
        }
        for alg in [Algorithm::Er, Algorithm::Hio] {
            let rec = reconstruct(scene, alg, Data::FullField(&full), cfg.baseline_iters, cfg, out.seed)?;
            out.emit(&mut c, alg.name(), alg, cfg.frames, 0.0, 0, cfg.baseline_iters, rec, None)?;
        }
        let rec = reconstruct(
            scene,
            Algorithm::Pii,
            Data::Scan { plan, amps: &amps, loose_px: 0 },
            cfg.iters,
            cfg,
            out.seed,
        )?;
        out.emit(&mut c, "pii", Algorithm::Pii, cfg.frames, 0.0, 0, cfg.iters, rec, None)?;
        out.close(c)
    })
}

fn pct_tag(p: f64) -> String {
    p.to_string().replace('.', "p")
}

/// PII with exact-position reconstruction masks over a sweep of shift errors.
pub fn run_shift_error(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run_sweep(cfg, &cfg.shift_list(), &[0])
}

/// PII over shift errors x loose-support radii.
pub fn run_loose_support(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run_sweep(cfg, &cfg.shift_list(), &cfg.loose_list())
}

fn run_sweep(cfg: &ExperimentConfig, shifts: &[f64], looses: &[u32]) -> Result<ExperimentResult> {
    run_replicates(cfg, |scene, out| {
        let plans: Vec<ScanPlan> = shifts
            .iter()
            .map(|&p| scene.shifted_plan(p, out.seed))
            .collect::<Result<_>>()?;
        let amps = scene.amplitudes_for(&plans.iter().collect::<Vec<_>>(), cfg.frames, out.seed)?;
        for ((&pct, plan), amps) in shifts.iter().zip(&plans).zip(&amps) {
            let tag = format!("shift{}", pct_tag(pct));
            let mut c = out.container(&tag, scene, plan, amps);
            for &loose in looses {
                let rec = reconstruct(
                    scene,
                    Algorithm::Pii,
                    Data::Scan { plan: &scene.plan, amps, loose_px: loose },
                    cfg.iters,
                    cfg,
                    out.seed,
                )?;
                let name = if looses.len() == 1 && looses[0] == 0 {
                    format!("pii_{tag}")
                } else {
                    format!("pii_{tag}_loose{loose}")
                };
                out.emit(&mut c, &name, Algorithm::Pii, cfg.frames, pct, loose, cfg.iters, rec, None)?;
            }
            out.close(c)?;
        }
        Ok(())
    })
}

/// PII quality and amplitude error against the number of speckle frames.
pub fn run_frames_sweep(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run_replicates(cfg, |scene, out| {
        for &n in &cfg.frames_list {
            let amps = scene.amplitudes(&scene.plan, n, out.seed)?;
            let rmse = scene.spectrum_rmse(&scene.plan, &amps)?;
            let mut c = out.container(&format!("n{n}"), scene, &scene.plan, &amps);
            let rec = reconstruct(
                scene,
                Algorithm::Pii,
                Data::Scan { plan: &scene.plan, amps: &amps, loose_px: 0 },
                cfg.iters,
                cfg,
                out.seed,
            )?;
            out.emit(&mut c, &format!("pii_n{n}"), Algorithm::Pii, n, 0.0, 0, cfg.iters, rec, Some(rmse))?;
            out.close(c)?;
        }
        Ok(())
    })
}

/// One run of `algorithm` with the first shift and loose values.
pub fn run_custom(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let pct = cfg.shift_list()[0];
    let loose = cfg.loose_list()[0];
    run_replicates(cfg, |scene, out| {
        let plan = scene.shifted_plan(pct, out.seed)?;
        let (amps, full);
        let data = if cfg.algorithm == Algorithm::Pii {
            amps = scene.amplitudes(&plan, cfg.frames, out.seed)?;
            Data::Scan { plan: &scene.plan, amps: &amps, loose_px: loose }
        } else {
            amps = Vec::new();
            full = scene.full_field_amplitude(cfg.frames, out.seed)?;
            Data::FullField(&full)
        };
        let mut c = out.container("data", scene, &plan, &amps);
        if let Data::FullField(f) = &data {
            if cfg.save_amplitudes {
                c.add_amplitude(plan.len() as u32, f);
            }
        }
        let rec = reconstruct(scene, cfg.algorithm, data, cfg.iters, cfg, out.seed)?;
        out.emit(&mut c, cfg.algorithm.name(), cfg.algorithm, cfg.frames, pct, loose, cfg.iters, rec, None)?;
        out.close(c)
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    match cfg.scenario {
        Scenario::CompareAlgorithms => run_compare_algorithms(cfg),
        Scenario::ShiftError => run_shift_error(cfg),
        Scenario::LooseSupport => run_loose_support(cfg),
        Scenario::FramesSweep => run_frames_sweep(cfg),
        Scenario::Custom => run_custom(cfg),
    }
}

/// Whether every artifact listed in `result` exists under its output directory.
pub fn artifacts_exist(result: &ExperimentResult, dir: &Path) -> bool {
    result.artifacts.iter().all(|a| dir.join(a).is_file())
}
