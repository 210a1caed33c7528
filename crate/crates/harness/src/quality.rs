//! Registration-invariant image similarity.

use num_complex::Complex64;
use pii_core::fft::Fft2;
use pii_core::Grid;

use crate::error::{HarnessError, Result};

/// Maximum zero-mean normalised cross-correlation between `truth` and every
/// circular translation of `recon` or of its 180-degree rotation.
///
/// Invariant to translation, point reflection, positive scale and offset;
/// lies in [-1, 1].
pub fn registered_quality(recon: &Grid<f64>, truth: &Grid<f64>) -> Result<f64> {
    let dims = truth.dims();
    if recon.dims() != dims {
        return Err(HarnessError::Invalid(format!(
            "quality: reconstruction is {}, truth is {dims}",
            recon.dims()
        )));
    }
    let plan = Fft2::<f64>::new(dims);
    let t = centred_spectrum(&plan, truth).ok_or_else(|| HarnessError::Invalid("quality: truth is constant".into()))?;
    let mut best = f64::NEG_INFINITY;
    for cand in [recon.clone(), recon.reflect()] {
        let a = centred_spectrum(&plan, &cand)
            .ok_or_else(|| HarnessError::Invalid("quality: reconstruction is constant".into()))?;
        let mut x: Vec<Complex64> = a.iter().zip(&t).map(|(p, q)| p * q.conj()).collect();
        plan.inverse(&mut x);
        let n = dims.len() as f64;
        best = x.iter().fold(best, |m, v| m.max(v.re / n));
    }
    Ok(best.clamp(-1.0, 1.0))
}

/// DFT of the zero-mean, unit-norm image; `None` for a constant image.
fn centred_spectrum(plan: &Fft2<f64>, g: &Grid<f64>) -> Option<Vec<Complex64>> {
    let n = g.as_slice().len() as f64;
    let mean = g.iter().sum::<f64>() / n;
    let norm = g.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>().sqrt();
    if !(norm > 1e-12 * (mean.abs() * n.sqrt()).max(f64::MIN_POSITIVE)) {
        return None;
    }
    let mut buf: Vec<Complex64> = g.iter().map(|v| Complex64::new((v - mean) / norm, 0.0)).collect();
    plan.forward(&mut buf);
    Some(buf)
}
