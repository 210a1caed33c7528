//! Error-reduction and hybrid input-output iterations on a single
//! full-field modulus.
//!
//! The object-domain constraint is the support intersected with realness and
//! non-negativity. Estimates are kept real; the transform-domain projection
//! uses the amplitude map at its stored scale.

use num_complex::Complex;

use crate::correlation::AmplitudeMap;
use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::grid::Grid;
use crate::scalar::Real;

use super::projection::project_in_place;
use super::residual::ResidualSum;
use super::state::RetrievalState;
use super::support::SupportMask;

pub const DEFAULT_BETA: f64 = 0.7;

/// Reusable FFT plan plus data for repeated ER/HIO steps.
pub struct SingleModulus<'a, T: Real> {
    plan: Fft2<T>,
    amp: &'a AmplitudeMap<T>,
    support: &'a SupportMask,
    projected: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
}

impl<'a, T: Real> SingleModulus<'a, T> {
    pub fn new(amp: &'a AmplitudeMap<T>, support: &'a SupportMask) -> Result<Self> {
        amp.dims().ensure_eq(support.dims())?;
        Ok(Self {
            plan: Fft2::new(amp.dims()),
            amp,
            support,
            projected: Vec::new(),
            scratch: Vec::new(),
        })
    }

    fn project(&mut self, state: &RetrievalState<T>) -> Result<()> {
        state.dims().ensure_eq(self.amp.dims())?;
        self.projected.clear();
        self.projected.extend_from_slice(state.estimate.as_slice());
        project_in_place(&self.plan, &mut self.projected, self.amp.values().as_slice(), T::one());
        Ok(())
    }

    fn admissible(&self, i: usize) -> bool {
        self.support.mask().as_slice()[i] && self.projected[i].re >= T::zero()
    }

    /// Residual of the object-domain projection of the current modulus projection.
    fn residual(&mut self) -> Result<T> {
        self.scratch.clear();
        for i in 0..self.projected.len() {
            let v = if self.admissible(i) { self.projected[i].re } else { T::zero() };
            self.scratch.push(Complex::new(v, T::zero()));
        }
        self.plan.forward_centered(&mut self.scratch);
        let mut sum = ResidualSum::default();
        sum.add(&self.scratch, self.amp.values().as_slice());
        sum.value()
    }

    pub fn er_step(&mut self, mut state: RetrievalState<T>) -> Result<RetrievalState<T>> {
        self.project(&state)?;
        for (i, v) in state.estimate.as_mut_slice().iter_mut().enumerate() {
            let re = if self.admissible(i) { self.projected[i].re } else { T::zero() };
            *v = Complex::new(re, T::zero());
        }
        let r = self.residual()?;
        state.residual_history.push(r);
        state.iteration += 1;
        Ok(state)
    }

    pub fn hio_step(&mut self, mut state: RetrievalState<T>, beta: T) -> Result<RetrievalState<T>> {
        check_beta(beta)?;
        self.project(&state)?;
        for (i, v) in state.estimate.as_mut_slice().iter_mut().enumerate() {
            let re = if self.admissible(i) {
                self.projected[i].re
            } else {
                v.re - beta * self.projected[i].re
            };
            *v = Complex::new(re, T::zero());
        }
        let r = self.residual()?;
        state.residual_history.push(r);
        state.iteration += 1;
        Ok(state)
    }
}

fn check_beta<T: Real>(beta: T) -> Result<()> {
    if !(beta > T::zero() && beta <= T::one()) {
        return Err(Error::InvalidInput {
            what: "HIO feedback",
            detail: format!("beta = {beta} is outside (0, 1]"),
        });
    }
    Ok(())
}

/// One error-reduction iteration.
pub fn er_step<T: Real>(state: RetrievalState<T>, amp: &AmplitudeMap<T>, support: &SupportMask) -> Result<RetrievalState<T>> {
    SingleModulus::new(amp, support)?.er_step(state)
}

/// One hybrid input-output iteration with feedback `beta`.
pub fn hio_step<T: Real>(
    state: RetrievalState<T>,
    amp: &AmplitudeMap<T>,
    support: &SupportMask,
    beta: T,
) -> Result<RetrievalState<T>> {
    check_beta(beta)?;
    SingleModulus::new(amp, support)?.hio_step(state, beta)
}

pub fn run_er<T: Real>(
    state: RetrievalState<T>,
    amp: &AmplitudeMap<T>,
    support: &SupportMask,
    n_iter: usize,
) -> Result<RetrievalState<T>> {
    let mut solver = SingleModulus::new(amp, support)?;
    (0..n_iter).try_fold(state, |s, _| solver.er_step(s))
}

pub fn run_hio<T: Real>(
    state: RetrievalState<T>,
    amp: &AmplitudeMap<T>,
    support: &SupportMask,
    beta: T,
    n_iter: usize,
) -> Result<RetrievalState<T>> {
    check_beta(beta)?;
    let mut solver = SingleModulus::new(amp, support)?;
    (0..n_iter).try_fold(state, |s, _| solver.hio_step(s, beta))
}

/// Object-domain projection of an estimate: real part inside the support,
/// negatives and everything outside set to zero. This is the image reported
/// for HIO, whose iterate is unconstrained outside the support.
pub fn constrained_image<T: Real>(estimate: &Grid<Complex<T>>, support: &SupportMask) -> Grid<T> {
    estimate.zip_map(support.mask(), |v, inside| {
        if inside && v.re > T::zero() {
            v.re
        } else {
            T::zero()
        }
    })
}
