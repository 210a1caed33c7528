//! Probe raster, nominal/true scan positions and shift-error injection.
//!
//! Positions are whole-pixel offsets of the probe relative to where its mask
//! was built. Reconstruction consumes `nominal`; simulation consumes `true_`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{Dims, Grid, Offset};
use crate::optics::{MaskBounds, ProbeAperture};
use crate::scalar::Real;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScanAxis {
    /// Along columns.
    X,
    /// Along rows.
    Y,
    /// Raster over rows then columns, `n_steps` per axis.
    XyGrid,
}

impl ScanAxis {
    pub fn name(self) -> &'static str {
        match self {
            ScanAxis::X => "x",
            ScanAxis::Y => "y",
            ScanAxis::XyGrid => "xy",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Some(ScanAxis::X),
            "y" => Some(ScanAxis::Y),
            "xy" | "xy-grid" | "grid" => Some(ScanAxis::XyGrid),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanPosition {
    pub nominal: Offset,
    pub true_: Offset,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPlan {
    positions: Vec<ScanPosition>,
    step: u32,
    axis: ScanAxis,
    shift_error_pct: f64,
    error_seed: u64,
    bounds: MaskBounds,
}

impl ScanPlan {
    /// Rebuild a plan from stored positions (e.g. a dataset header).
    pub fn from_positions(
        positions: Vec<ScanPosition>,
        step: u32,
        axis: ScanAxis,
        bounds: MaskBounds,
    ) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidInput {
                what: "scan plan",
                detail: "needs at least one position".into(),
            });
        }
        for (i, p) in positions.iter().enumerate() {
            for o in [p.nominal, p.true_] {
                if !bounds.fits(o) {
                    return Err(out_of_grid(i, o, bounds.dims));
                }
            }
        }
        Ok(Self {
            positions,
            step,
            axis,
            shift_error_pct: 0.0,
            error_seed: 0,
            bounds,
        })
    }

    pub fn positions(&self) -> &[ScanPosition] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn step(&self) -> u32 {
        self.step
    }

    pub fn axis(&self) -> ScanAxis {
        self.axis
    }

    pub fn shift_error_pct(&self) -> f64 {
        self.shift_error_pct
    }

    pub fn error_seed(&self) -> u64 {
        self.error_seed
    }

    pub fn dims(&self) -> Dims {
        self.bounds.dims
    }

    pub fn nominal(&self) -> impl Iterator<Item = Offset> + '_ {
        self.positions.iter().map(|p| p.nominal)
    }

    pub fn true_positions(&self) -> impl Iterator<Item = Offset> + '_ {
        self.positions.iter().map(|p| p.true_)
    }

    /// Largest per-coordinate `|true - nominal|`.
    pub fn max_error(&self) -> u32 {
        self.positions
            .iter()
            .map(|p| {
                (p.true_.row - p.nominal.row)
                    .unsigned_abs()
                    .max((p.true_.col - p.nominal.col).unsigned_abs())
            })
            .max()
            .unwrap_or(0)
    }
}

fn out_of_grid(step: usize, o: Offset, dims: Dims) -> Error {
    Error::ScanOutOfGrid {
        step,
        row: o.row,
        col: o.col,
        dims,
    }
}

/// Arithmetic raster of `n_steps` probe offsets starting at `start`.
pub fn make_scan_plan<T: Real>(
    probe: &ProbeAperture<T>,
    n_steps: usize,
    step_px: u32,
    axis: ScanAxis,
    start: Offset,
) -> Result<ScanPlan> {
    if n_steps == 0 {
        return Err(Error::InvalidInput {
            what: "scan plan",
            detail: "n_steps must be at least 1".into(),
        });
    }
    let s = step_px as i64;
    let at = |i: i64, j: i64| -> Offset {
        Offset::new(
            (start.row as i64 + i * s) as i32,
            (start.col as i64 + j * s) as i32,
        )
    };
    let offsets: Vec<Offset> = match axis {
        ScanAxis::X => (0..n_steps as i64).map(|j| at(0, j)).collect(),
        ScanAxis::Y => (0..n_steps as i64).map(|i| at(i, 0)).collect(),
        ScanAxis::XyGrid => (0..n_steps as i64)
            .flat_map(|i| (0..n_steps as i64).map(move |j| (i, j)))
            .map(|(i, j)| at(i, j))
            .collect(),
    };
    let bounds = probe.bounds();
    for (i, &o) in offsets.iter().enumerate() {
        if !bounds.fits(o) {
            return Err(out_of_grid(i, o, bounds.dims));
        }
    }
    Ok(ScanPlan {
        positions: offsets
            .into_iter()
            .map(|o| ScanPosition {
                nominal: o,
                true_: o,
            })
            .collect(),
        step: step_px,
        axis,
        shift_error_pct: 0.0,
        error_seed: 0,
        bounds,
    })
}

/// Perturb true positions by per-position uniform jitter of up to `pct`% of
/// the step along the scan axis (both axes for a grid scan), rounded to whole
/// pixels. Nominal positions are left untouched.
///
/// Draws come from ChaCha8 seeded with `seed`: positions in order, one
/// `uniform(-m, m)` per perturbed coordinate (row before column), where
/// `m = pct * step / 100`; rounding is half away from zero.
pub fn inject_shift_error(plan: &ScanPlan, pct: f64, seed: u64) -> Result<ScanPlan> {
    if !(0.0..=100.0).contains(&pct) {
        return Err(Error::InvalidInput {
            what: "shift error",
            detail: format!("{pct}% is outside [0, 100]"),
        });
    }
    let m = pct * plan.step as f64 / 100.0;
    let mut rng = seed::rng(seed);
    let mut draw = |on: bool| -> i32 {
        if on && m > 0.0 {
            rng.random_range(-m..=m).round() as i32
        } else {
            0
        }
    };
    let (perturb_row, perturb_col) = match plan.axis {
        ScanAxis::X => (false, true),
        ScanAxis::Y => (true, false),
        ScanAxis::XyGrid => (true, true),
    };
    let mut positions = Vec::with_capacity(plan.len());
    for (i, p) in plan.positions.iter().enumerate() {
        let dr = draw(perturb_row);
        let dc = draw(perturb_col);
        let t = Offset::new(p.nominal.row + dr, p.nominal.col + dc);
        if !plan.bounds.fits(t) {
            return Err(out_of_grid(i, t, plan.bounds.dims));
        }
        positions.push(ScanPosition {
            nominal: p.nominal,
            true_: t,
        });
    }
    Ok(ScanPlan {
        positions,
        shift_error_pct: pct,
        error_seed: seed,
        ..plan.clone()
    })
}

/// Binary disk: 1 where the distance to `center` is below `diameter / 2`.
///
/// Distances are measured between pixel indices, so `diameter = 1` lights the
/// centre pixel only.
pub fn probe_mask<T: Real>(diameter_px: usize, dims: Dims, center: (usize, usize)) -> Result<ProbeAperture<T>> {
    if diameter_px == 0 || diameter_px > dims.width.min(dims.height) {
        return Err(Error::InvalidInput {
            what: "probe diameter",
            detail: format!("{diameter_px} px does not fit the {dims} grid"),
        });
    }
    if center.0 >= dims.height || center.1 >= dims.width {
        return Err(Error::InvalidInput {
            what: "probe centre",
            detail: format!("{center:?} outside the {dims} grid"),
        });
    }
    let r = diameter_px as f64 / 2.0;
    let r2 = r * r;
    let mask = Grid::from_fn(dims, |row, col| {
        let dy = row as f64 - center.0 as f64;
        let dx = col as f64 - center.1 as f64;
        if dx * dx + dy * dy < r2 {
            T::one()
        } else {
            T::zero()
        }
    });
    ProbeAperture::new(mask, diameter_px, center)
}
