use crate::grid::{Dims, Grid};
use crate::scalar::Real;

/// Binary object-domain support, with the dilation radius already applied.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportMask {
    mask: Grid<bool>,
    loose_px: u32,
}

impl SupportMask {
    pub fn new(mask: Grid<bool>) -> Self {
        Self { mask, loose_px: 0 }
    }

    /// Pixels with a strictly positive value.
    pub fn from_values<T: Real>(values: &Grid<T>) -> Self {
        Self::new(values.map(|v| v > T::zero()))
    }

    pub fn full(dims: Dims) -> Self {
        Self::new(Grid::filled(dims, true))
    }

    pub fn mask(&self) -> &Grid<bool> {
        &self.mask
    }

    pub fn dims(&self) -> Dims {
        self.mask.dims()
    }

    pub fn loose_px(&self) -> u32 {
        self.loose_px
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.mask[(row, col)]
    }

    pub fn is_subset_of(&self, other: &SupportMask) -> bool {
        self.mask.iter().zip(other.mask.iter()).all(|(&a, &b)| !a || b)
    }

    pub fn to_values<T: Real>(&self) -> Grid<T> {
        self.mask.map(|b| if b { T::one() } else { T::zero() })
    }
}

/// Morphological dilation by a digital disk of radius `loose_px`, clipped to the grid.
///
/// The structuring element holds the offsets within `L + 1/4` of the origin;
/// that radius makes the dilated lattice disk track the continuous disk of
/// radius `r + L` most closely.
pub fn dilate_support(mask: &SupportMask, loose_px: u32) -> SupportMask {
    if loose_px == 0 {
        return mask.clone();
    }
    let dims = mask.dims();
    let (h, w) = (dims.height as i64, dims.width as i64);
    let l = loose_px as i64;
    let disk: Vec<(i64, i64)> = (-l..=l)
        .flat_map(|dr| (-l..=l).map(move |dc| (dr, dc)))
        .filter(|(dr, dc)| 16 * (dr * dr + dc * dc) <= (4 * l + 1) * (4 * l + 1))
        .collect();
    let src = &mask.mask;
    let mut out = src.clone();
    for r in 0..h {
        for c in 0..w {
            if !src[(r as usize, c as usize)] {
                continue;
            }
            // Interior pixels add nothing their neighbours do not.
            let interior = [(-1, 0), (1, 0), (0, -1), (0, 1)]
                .iter()
                .all(|&(dr, dc)| src.get(r + dr, c + dc).copied().unwrap_or(false));
            if interior {
                continue;
            }
            for &(dr, dc) in &disk {
                let (rr, cc) = (r + dr, c + dc);
                if rr >= 0 && rr < h && cc >= 0 && cc < w {
                    out[(rr as usize, cc as usize)] = true;
                }
            }
        }
    }
    SupportMask {
        mask: out,
        loose_px: mask.loose_px + loose_px,
    }
}
