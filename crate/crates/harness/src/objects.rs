//! Built-in test objects and object files.
//!
//! Objects are drawn on a 128-pixel reference frame; on an `n`-pixel grid
//! every coordinate and length is multiplied by `n / 128` and rounded. Values
//! are intensity transmissions in [0, 1].
//!
//! | name        | contents (reference-frame rows x cols, half-open)                              |
//! |-------------|--------------------------------------------------------------------------------|
//! | `glyph`     | letter F at 1.0: stem [50,78)x[30,35), top [50,55)x[30,50), arm [62,66)x[30,46); |
//! |             | three bars at 0.7: [50,78)x[58,62), [68,72), [78,82); patch [60,70)x[92,104) at 0.4 |
//! | `two-disk`  | disk centre (64,45) diameter 22 at 1.0; disk centre (62,80) diameter 26 at 0.5 |
//! | `three-bar` | bars [48,80) rows at cols [40,48) 1.0, [60,66) 0.8, [80,84) 0.6               |
//!
//! Disks are the pixels strictly closer than half the diameter to the centre.
//! Where shapes overlap the larger value wins.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pii_core::{Dims, Grid};

use crate::error::{HarnessError, Result};
use crate::pgm;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObjectSpec {
    Glyph,
    TwoDisk,
    ThreeBar,
    /// 8- or 16-bit PGM, scaled to [0, 1] by its maxval; must match the grid.
    File(PathBuf),
}

impl ObjectSpec {
    pub const BUILT_IN: [ObjectSpec; 3] = [ObjectSpec::Glyph, ObjectSpec::TwoDisk, ObjectSpec::ThreeBar];

    pub fn render(&self, dims: Dims) -> Result<Grid<f64>> {
        let s = Scale::new(dims);
        let g = match self {
            ObjectSpec::Glyph => s.draw(&[
                Shape::Rect(50, 78, 30, 35, 1.0),
                Shape::Rect(50, 55, 30, 50, 1.0),
                Shape::Rect(62, 66, 30, 46, 1.0),
                Shape::Rect(50, 78, 58, 62, 0.7),
                Shape::Rect(50, 78, 68, 72, 0.7),
                Shape::Rect(50, 78, 78, 82, 0.7),
                Shape::Rect(60, 70, 92, 104, 0.4),
            ]),
            ObjectSpec::TwoDisk => s.draw(&[Shape::Disk(64, 45, 22, 1.0), Shape::Disk(62, 80, 26, 0.5)]),
            ObjectSpec::ThreeBar => s.draw(&[
                Shape::Rect(48, 80, 40, 48, 1.0),
                Shape::Rect(48, 80, 60, 66, 0.8),
                Shape::Rect(48, 80, 80, 84, 0.6),
            ]),
            ObjectSpec::File(path) => load_object_file(path, dims)?,
        };
        Ok(g)
    }
}

impl fmt::Display for ObjectSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectSpec::Glyph => f.write_str("glyph"),
            ObjectSpec::TwoDisk => f.write_str("two-disk"),
            ObjectSpec::ThreeBar => f.write_str("three-bar"),
            ObjectSpec::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl FromStr for ObjectSpec {
    type Err = std::convert::Infallible;

    /// Built-in names, anything else is taken as a file path.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "glyph" => ObjectSpec::Glyph,
            "two-disk" => ObjectSpec::TwoDisk,
            "three-bar" => ObjectSpec::ThreeBar,
            other => ObjectSpec::File(PathBuf::from(other)),
        })
    }
}

enum Shape {
    /// rows [r0, r1) x cols [c0, c1), value
    Rect(i64, i64, i64, i64, f64),
    /// centre row, centre col, diameter, value
    Disk(i64, i64, i64, f64),
}

struct Scale {
    dims: Dims,
    k: f64,
}

impl Scale {
    fn new(dims: Dims) -> Self {
        Self {
            dims,
            k: dims.width.min(dims.height) as f64 / 128.0,
        }
    }

    fn px(&self, v: i64) -> f64 {
        (v as f64 * self.k).round()
    }

    fn draw(&self, shapes: &[Shape]) -> Grid<f64> {
        let mut g = Grid::filled(self.dims, 0.0);
        for shape in shapes {
            for r in 0..self.dims.height {
                for c in 0..self.dims.width {
                    let (y, x) = (r as f64, c as f64);
                    let (inside, v) = match *shape {
                        Shape::Rect(r0, r1, c0, c1, v) => {
                            (y >= self.px(r0) && y < self.px(r1) && x >= self.px(c0) && x < self.px(c1), v)
                        }
                        Shape::Disk(cr, cc, d, v) => {
                            let rad = self.px(d) / 2.0;
                            let (dy, dx) = (y - self.px(cr), x - self.px(cc));
                            (dy * dy + dx * dx < rad * rad, v)
                        }
                    };
                    if inside && v > g[(r, c)] {
                        g[(r, c)] = v;
                    }
                }
            }
        }
        g
    }
}

fn load_object_file(path: &Path, dims: Dims) -> Result<Grid<f64>> {
    let img = pgm::read_pgm(path)?;
    if img.dims() != dims {
        return Err(HarnessError::Invalid(format!(
            "object file {} is {}, expected {dims}",
            path.display(),
            img.dims()
        )));
    }
    Ok(img)
}
