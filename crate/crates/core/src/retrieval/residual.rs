use num_complex::Complex;

use crate::correlation::AmplitudeMap;
use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::grid::Grid;
use crate::scalar::Real;

/// Running sums of the reciprocal-space residual
///
/// ```text
/// E = sqrt( sum_R sum_k (s_R |F{O P_R}|(k) - A_R(k))^2 / sum_R sum_k A_R(k)^2 )
/// ```
///
/// with the least-squares scale `s_R = sum |F| A / sum |F|^2` (0 if `|F| == 0`).
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct ResidualSum {
    num: f64,
    den: f64,
}

impl ResidualSum {
    /// Add one position: `spectrum` is the centred transform of the exit wave.
    pub(crate) fn add<T: Real>(&mut self, spectrum: &[Complex<T>], amp: &[T]) {
        let (mut fa, mut ff, mut aa) = (0.0, 0.0, 0.0);
        for (f, &a) in spectrum.iter().zip(amp) {
            let (m, a) = (f.norm().as_f64(), a.as_f64());
            fa += m * a;
            ff += m * m;
            aa += a * a;
        }
        let s = if ff > 0.0 { fa / ff } else { 0.0 };
        let num: f64 = spectrum
            .iter()
            .zip(amp)
            .map(|(f, &a)| {
                let d = s * f.norm().as_f64() - a.as_f64();
                d * d
            })
            .sum();
        self.num += num;
        self.den += aa;
    }

    pub(crate) fn value<T: Real>(&self) -> Result<T> {
        if !(self.den > 0.0) {
            return Err(Error::Degenerate("all amplitude maps are zero".into()));
        }
        Ok(T::of((self.num / self.den).sqrt()))
    }
}

/// Reciprocal-space residual of a real estimate against per-position moduli.
///
/// `masks[i]` is the (possibly dilated) probe already translated to the
/// nominal position of `amps[i]`.
pub fn reciprocal_residual_masks<T: Real>(estimate: &Grid<T>, amps: &[AmplitudeMap<T>], masks: &[Grid<T>]) -> Result<T> {
    if amps.len() != masks.len() {
        return Err(Error::InvalidInput {
            what: "residual",
            detail: format!("{} amplitude maps for {} probe positions", amps.len(), masks.len()),
        });
    }
    let dims = estimate.dims();
    let plan = Fft2::new(dims);
    let mut sum = ResidualSum::default();
    let mut buf = Vec::with_capacity(dims.len());
    for (amp, mask) in amps.iter().zip(masks) {
        dims.ensure_eq(amp.dims())?;
        dims.ensure_eq(mask.dims())?;
        exit_spectrum(&plan, estimate, mask, &mut buf);
        sum.add(&buf, amp.values().as_slice());
    }
    sum.value()
}

pub(crate) fn exit_spectrum<T: Real>(plan: &Fft2<T>, estimate: &Grid<T>, mask: &Grid<T>, buf: &mut Vec<Complex<T>>) {
    buf.clear();
    buf.extend(
        estimate
            .iter()
            .zip(mask.iter())
            .map(|(&o, &p)| Complex::new(o * p, T::zero())),
    );
    plan.forward_centered(buf);
}
