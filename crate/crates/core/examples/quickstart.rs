//! Simulate a short scan of a disk and reconstruct it with PII.

use pii_core::correlation::{amplitude_from_correlation, correlate_source};
use pii_core::optics::{ObjectSample, SpeckleSource};
use pii_core::retrieval::pii_reconstruct;
use pii_core::scan::{make_scan_plan, probe_mask, ScanAxis};
use pii_core::{Dims, Grid, Offset};

fn main() -> pii_core::Result<()> {
    let dims = Dims::square(64)?;
    let object = ObjectSample::new(Grid::from_fn(dims, |r, c| {
        let (dy, dx) = (r as f64 - 32.0, c as f64 - 30.0);
        if dy * dy + dx * dx < 64.0 {
            1.0
        } else {
            0.2
        }
    }))?;
    let probe = probe_mask::<f64>(20, dims, (32, 24))?;
    let plan = make_scan_plan(&probe, 8, 2, ScanAxis::X, Offset::ZERO)?;

    let amps = plan
        .true_positions()
        .enumerate()
        .map(|(i, offset)| {
            let source = SpeckleSource::new(&object, &probe, offset, i, 42)?;
            amplitude_from_correlation(&correlate_source(&source, 500)?)
        })
        .collect::<pii_core::Result<Vec<_>>>()?;

    let out = pii_reconstruct(&amps, &probe, &plan, 0, 20, 0)?;
    for (i, r) in out.residual_history.iter().enumerate() {
        println!("iteration {:>2}: residual {r:.5}", i + 1);
    }
    Ok(())
}
