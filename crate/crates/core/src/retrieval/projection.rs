use num_complex::Complex;

use crate::correlation::AmplitudeMap;
use crate::fft::Fft2;
use crate::grid::Grid;
use crate::scalar::Real;

/// Replace the transform modulus of `estimate` with `amp`, keeping the phase.
///
/// Where the current transform vanishes the phase is taken as 0. Returns the
/// result in object space.
pub fn modulus_project<T: Real>(estimate: &Grid<Complex<T>>, amp: &AmplitudeMap<T>) -> Grid<Complex<T>> {
    let plan = Fft2::new(estimate.dims());
    let mut buf = estimate.as_slice().to_vec();
    project_in_place(&plan, &mut buf, amp.values().as_slice(), T::one());
    Grid::from_vec(estimate.dims(), buf).expect("sized to dims")
}

/// In-place modulus projection against `scale * amp`.
pub(crate) fn project_in_place<T: Real>(plan: &Fft2<T>, buf: &mut [Complex<T>], amp: &[T], scale: T) {
    plan.forward_centered(buf);
    apply_modulus(buf, amp, scale);
    plan.inverse_centered(buf);
}

pub(crate) fn apply_modulus<T: Real>(spectrum: &mut [Complex<T>], amp: &[T], scale: T) {
    for (f, &a) in spectrum.iter_mut().zip(amp) {
        let m = f.norm();
        let target = a * scale;
        *f = if m > T::zero() {
            *f * (target / m)
        } else {
            Complex::new(target, T::zero())
        };
    }
}
