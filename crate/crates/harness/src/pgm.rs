//! Binary greymap (PGM, `P5`) images.

use std::fs;
use std::io::Write;
use std::path::Path;

use pii_core::{Dims, Grid};

use crate::error::{HarnessError, Result};

/// 8-bit image, min-max scaled; a constant image maps to 0.
pub fn encode_pgm(g: &Grid<f64>) -> Vec<u8> {
    let d = g.dims();
    let (lo, hi) = g
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    let mut out = format!("P5\n{} {}\n255\n", d.width, d.height).into_bytes();
    out.extend(g.iter().map(|&v| {
        if span > 0.0 {
            ((v - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8
        } else {
            0
        }
    }));
    out
}

pub fn write_pgm(path: &Path, g: &Grid<f64>) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_pgm(g))?;
    Ok(())
}

/// Reads `P5` (8 or 16 bit) or `P2`; values are divided by maxval.
pub fn read_pgm(path: &Path) -> Result<Grid<f64>> {
    let bytes = fs::read(path).map_err(|e| HarnessError::Invalid(format!("cannot read {}: {e}", path.display())))?;
    decode_pgm(&bytes).map_err(|e| HarnessError::Invalid(format!("{}: {e}", path.display())))
}

pub fn decode_pgm(bytes: &[u8]) -> std::result::Result<Grid<f64>, String> {
    let mut pos = 0;
    let mut token = || -> std::result::Result<String, String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated header".into());
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = token()?;
    let num = |s: String| s.parse::<usize>().map_err(|_| format!("bad header field {s:?}"));
    let w = num(token()?)?;
    let h = num(token()?)?;
    let maxval = num(token()?)?;
    if maxval == 0 || maxval > 65535 {
        return Err(format!("maxval {maxval} out of range"));
    }
    let dims = Dims::new(w, h).map_err(|e| e.to_string())?;
    let n = dims.len();
    let values: Vec<f64> = match magic.as_str() {
        "P5" => {
            let data = &bytes[pos + 1..];
            let wide = maxval > 255;
            let need = if wide { 2 * n } else { n };
            if data.len() < need {
                return Err(format!("expected {need} data bytes, found {}", data.len()));
            }
            if wide {
                data.chunks_exact(2).take(n).map(|b| u16::from_be_bytes([b[0], b[1]]) as f64).collect()
            } else {
                data[..n].iter().map(|&b| b as f64).collect()
            }
        }
        "P2" => (0..n).map(|_| token().and_then(num).map(|v| v as f64)).collect::<std::result::Result<_, _>>()?,
        m => return Err(format!("unsupported format {m:?}")),
    };
    Grid::from_vec(dims, values.into_iter().map(|v| v / maxval as f64).collect()).map_err(|e| e.to_string())
}
