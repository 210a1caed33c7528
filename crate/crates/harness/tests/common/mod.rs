#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use pii_core::{Dims, Grid};
use pii_harness::ExperimentConfig;

/// A small, fast configuration writing to `out`.
pub fn small_config(scenario: &str, out: &Path) -> ExperimentConfig {
    let text = format!(
        "scenario = {scenario}\ngrid = 32\nobject = two-disk\nprobe_px = 12\nsteps = 4\nstep_px = 2\n\
         frames = 40\niters = 5\nbaseline_iters = 20\nreplicates = 2\nframes_list = 10,40\n\
         shift = 0,50\nloose = 0,2\nseed = 9\nout = {}\n",
        out.display()
    );
    let cfg = ExperimentConfig::parse_text(&text, "small").unwrap();
    cfg.validate().unwrap();
    cfg
}

pub fn disk(n: usize, center: (f64, f64), radius: f64) -> Grid<f64> {
    Grid::from_fn(Dims::square(n).unwrap(), |r, c| {
        let (dy, dx) = (r as f64 - center.0, c as f64 - center.1);
        if dy * dy + dx * dx < radius * radius {
            1.0
        } else {
            0.0
        }
    })
}

fn zero_mean_unit(g: &Grid<f64>) -> Vec<f64> {
    let n = g.as_slice().len() as f64;
    let m = g.iter().sum::<f64>() / n;
    let v: Vec<f64> = g.iter().map(|x| x - m).collect();
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / s).collect()
}

/// Direct max over every circular shift of `recon` and of its point reflection.
pub fn brute_quality(recon: &Grid<f64>, truth: &Grid<f64>) -> f64 {
    let d = truth.dims();
    let (h, w) = (d.height, d.width);
    let t = zero_mean_unit(truth);
    let mut best = f64::NEG_INFINITY;
    for flip in [false, true] {
        let src = Grid::from_fn(d, |r, c| {
            if flip {
                recon[((h - r) % h, (w - c) % w)]
            } else {
                recon[(r, c)]
            }
        });
        let a = zero_mean_unit(&src);
        for sy in 0..h {
            for sx in 0..w {
                let mut s = 0.0;
                for r in 0..h {
                    for c in 0..w {
                        s += a[((r + sy) % h) * w + (c + sx) % w] * t[r * w + c];
                    }
                }
                best = best.max(s);
            }
        }
    }
    best
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Every file under `dir`, relative, sorted.
pub fn files(dir: &Path) -> Vec<PathBuf> {
    fn walk(base: &Path, dir: &Path, out: &mut Vec<PathBuf>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(base, &p, out);
            } else {
                out.push(p.strip_prefix(base).unwrap().to_path_buf());
            }
        }
    }
    let mut v = Vec::new();
    walk(dir, dir, &mut v);
    v.sort();
    v
}

/// Asserts that the CSV and PIID files of two output trees are byte-identical.
pub fn assert_same_outputs(a: &Path, b: &Path) -> usize {
    let fa = files(a);
    assert_eq!(fa, files(b));
    let mut compared = 0;
    for f in &fa {
        let ext = f.extension().and_then(|e| e.to_str()).unwrap_or("");
        if matches!(ext, "csv" | "piid" | "pgm") {
            assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{}", f.display());
            compared += 1;
        }
    }
    compared
}
