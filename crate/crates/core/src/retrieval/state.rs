use num_complex::Complex;
use rand::Rng;

use crate::grid::{Dims, Grid};
use crate::scalar::Real;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    /// Constant 1 over the whole grid.
    Uniform,
    /// Independent uniform `[0, 1)` magnitudes, zero phase.
    Random,
}

impl InitMode {
    pub fn name(self) -> &'static str {
        match self {
            InitMode::Uniform => "uniform",
            InitMode::Random => "random",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "uniform" => Some(InitMode::Uniform),
            "random" => Some(InitMode::Random),
            _ => None,
        }
    }
}

/// Iterate of a single-modulus phase-retrieval run (ER / HIO).
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalState<T> {
    pub(crate) estimate: Grid<Complex<T>>,
    pub(crate) iteration: usize,
    pub(crate) residual_history: Vec<T>,
    pub(crate) rng_seed: u64,
}

impl<T: Real> RetrievalState<T> {
    pub fn from_estimate(estimate: Grid<Complex<T>>, rng_seed: u64) -> Self {
        Self {
            estimate,
            iteration: 0,
            residual_history: Vec::new(),
            rng_seed,
        }
    }

    pub fn estimate(&self) -> &Grid<Complex<T>> {
        &self.estimate
    }

    pub fn dims(&self) -> Dims {
        self.estimate.dims()
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn residual_history(&self) -> &[T] {
        &self.residual_history
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    /// Real part of the estimate.
    pub fn real(&self) -> Grid<T> {
        self.estimate.map(|v| v.re)
    }
}

pub fn init_state<T: Real>(dims: Dims, mode: InitMode, seed: u64) -> RetrievalState<T> {
    RetrievalState::from_estimate(init_estimate(dims, mode, seed), seed)
}

pub(crate) fn init_estimate<T: Real>(dims: Dims, mode: InitMode, seed: u64) -> Grid<Complex<T>> {
    match mode {
        InitMode::Uniform => Grid::filled(dims, Complex::new(T::one(), T::zero())),
        InitMode::Random => {
            let mut rng = seed::rng(seed);
            let data = (0..dims.len())
                .map(|_| Complex::new(T::of(rng.random::<f64>()), T::zero()))
                .collect();
            Grid::from_vec(dims, data).expect("sized to dims")
        }
    }
}
