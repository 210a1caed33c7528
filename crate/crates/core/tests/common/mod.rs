#![allow(dead_code)]

use num_complex::Complex64;
use pii_core::correlation::AmplitudeMap;
use pii_core::optics::{ObjectSample, ProbeAperture};
use pii_core::{Dims, Grid};

pub fn dims(n: usize) -> Dims {
    Dims::square(n).unwrap()
}

/// Direct O(P^2) centred, unitary 2-D DFT. Output bin (r, c) holds frequency
/// (r - h/2, c - w/2); input pixel (y, x) sits at coordinate (y - h/2, x - w/2).
pub fn naive_dft(input: &Grid<Complex64>) -> Grid<Complex64> {
    let d = input.dims();
    let (h, w) = (d.height as i64, d.width as i64);
    let tau = std::f64::consts::TAU;
    let norm = 1.0 / ((h * w) as f64).sqrt();
    Grid::from_fn(d, |r, c| {
        let (kr, kc) = (r as i64 - h / 2, c as i64 - w / 2);
        let mut acc = Complex64::new(0.0, 0.0);
        for y in 0..h {
            for x in 0..w {
                let v = input[(y as usize, x as usize)];
                if v.re == 0.0 && v.im == 0.0 {
                    continue;
                }
                let (py, px) = (y - h / 2, x - w / 2);
                let ph = -tau * ((kr * py) as f64 / h as f64 + (kc * px) as f64 / w as f64);
                acc += v * Complex64::from_polar(1.0, ph);
            }
        }
        acc * norm
    })
}

/// Same as [`naive_dft`] but separable (rows then columns); O(P^1.5), for 128^2 grids.
pub fn separable_dft(input: &Grid<f64>) -> Grid<Complex64> {
    let d = input.dims();
    let (h, w) = (d.height, d.width);
    let tau = std::f64::consts::TAU;
    let dft1 = |v: &[Complex64]| -> Vec<Complex64> {
        let n = v.len() as i64;
        (0..n)
            .map(|k| {
                let kk = k - n / 2;
                v.iter()
                    .enumerate()
                    .map(|(x, &a)| {
                        let px = x as i64 - n / 2;
                        a * Complex64::from_polar(1.0, -tau * (kk * px) as f64 / n as f64)
                    })
                    .sum::<Complex64>()
            })
            .collect()
    };
    let mut rows: Vec<Vec<Complex64>> = (0..h)
        .map(|r| {
            let row: Vec<Complex64> = (0..w).map(|c| Complex64::new(input[(r, c)], 0.0)).collect();
            dft1(&row)
        })
        .collect();
    #[allow(clippy::needless_range_loop)]
    for c in 0..w {
        let col: Vec<Complex64> = (0..h).map(|r| rows[r][c]).collect();
        for (r, v) in dft1(&col).into_iter().enumerate() {
            rows[r][c] = v;
        }
    }
    let norm = 1.0 / ((h * w) as f64).sqrt();
    Grid::from_fn(d, |r, c| rows[r][c] * norm)
}

pub fn disk(d: Dims, center: (f64, f64), radius: f64) -> Grid<f64> {
    Grid::from_fn(d, |r, c| {
        let (dy, dx) = (r as f64 - center.0, c as f64 - center.1);
        if dy * dy + dx * dx < radius * radius {
            1.0
        } else {
            0.0
        }
    })
}

pub fn full_probe(d: Dims) -> ProbeAperture<f64> {
    ProbeAperture::new(Grid::filled(d, 1.0), d.width, d.center()).unwrap()
}

pub fn object(values: Grid<f64>) -> ObjectSample<f64> {
    ObjectSample::new(values).unwrap()
}

/// Exact, unnormalised `|F{values}|` via the direct DFT.
pub fn exact_amp(values: &Grid<f64>, index: usize) -> AmplitudeMap<f64> {
    let spectrum = naive_dft(&values.map(|v| Complex64::new(v, 0.0)));
    AmplitudeMap::new(spectrum.map(|v| v.norm()), index).unwrap()
}

fn zero_mean_unit(g: &Grid<f64>) -> Vec<f64> {
    let n = g.as_slice().len() as f64;
    let m = g.iter().sum::<f64>() / n;
    let v: Vec<f64> = g.iter().map(|x| x - m).collect();
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / s).collect()
}

/// Brute-force maximum NCC over every circular shift of `recon` and of its
/// point reflection.
pub fn brute_quality(recon: &Grid<f64>, truth: &Grid<f64>) -> f64 {
    let d = truth.dims();
    let t = zero_mean_unit(truth);
    let (h, w) = (d.height, d.width);
    let mut best = f64::NEG_INFINITY;
    for cand in [recon.clone(), Grid::from_fn(d, |r, c| recon[((h - r) % h, (w - c) % w)])] {
        let a = zero_mean_unit(&cand);
        for dr in 0..h {
            for dc in 0..w {
                let mut s = 0.0;
                for r in 0..h {
                    let rr = (r + dr) % h;
                    for c in 0..w {
                        s += a[rr * w + (c + dc) % w] * t[r * w + c];
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
