//! "PIID" binary dataset container (little-endian).
//!
//! ```text
//! magic        4 bytes  "PIID"
//! version      u16      1
//! width        u32
//! height       u32
//! n_positions  u32
//! n_frames     u32      frames stored per position (0 = frames omitted)
//! master_seed  u64
//! n_positions times:
//!     nominal offset  i32 row, i32 col
//!     true offset     i32 row, i32 col
//!     n_frames frames of width*height f64, row-major
//! zero or more sections until end of file:
//!     tag    u32   2 = correlation, 3 = amplitude, 4 = reconstruction
//!     index  u32   position index (correlation/amplitude) or run slot
//!     width  u32
//!     height u32
//!     width*height f64, row-major (centred layout for correlation/amplitude)
//! ```

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Dims, Grid, Offset};
use crate::scalar::Real;

pub const MAGIC: &[u8; 4] = b"PIID";
pub const VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SectionKind {
    Correlation = 2,
    Amplitude = 3,
    Reconstruction = 4,
}

impl SectionKind {
    pub fn tag(self) -> u32 {
        self as u32
    }

    pub fn from_tag(tag: u32) -> Option<Self> {
        match tag {
            2 => Some(SectionKind::Correlation),
            3 => Some(SectionKind::Amplitude),
            4 => Some(SectionKind::Reconstruction),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub dims: Dims,
    pub n_positions: u32,
    pub n_frames: u32,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub kind: SectionKind,
    pub index: u32,
    pub dims: Dims,
    pub values: Vec<f64>,
}

impl Section {
    pub fn from_grid<T: Real>(kind: SectionKind, index: u32, grid: &Grid<T>) -> Self {
        Self {
            kind,
            index,
            dims: grid.dims(),
            values: grid.iter().map(|v| v.as_f64()).collect(),
        }
    }

    pub fn to_grid<T: Real>(&self) -> Grid<T> {
        Grid::from_vec(self.dims, self.values.iter().map(|&v| T::of(v)).collect()).expect("section sized to dims")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositionRecord {
    pub nominal: Offset,
    pub true_: Offset,
    pub frames: Vec<Vec<f64>>,
}

/// Whole container held in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct PiidContainer {
    pub dims: Dims,
    pub n_frames: u32,
    pub master_seed: u64,
    pub positions: Vec<PositionRecord>,
    pub sections: Vec<Section>,
}

impl PiidContainer {
    pub fn header(&self) -> Header {
        Header {
            dims: self.dims,
            n_positions: self.positions.len() as u32,
            n_frames: self.n_frames,
            master_seed: self.master_seed,
        }
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<W> {
        let mut out = PiidWriter::new(w, self.header())?;
        for p in &self.positions {
            out.begin_position(p.nominal, p.true_)?;
            for f in &p.frames {
                out.write_frame(f)?;
            }
        }
        for s in &self.sections {
            out.write_section(s)?;
        }
        out.finish()
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut rd = PiidReader::new(r)?;
        let h = rd.header();
        let mut positions = Vec::with_capacity(h.n_positions as usize);
        for _ in 0..h.n_positions {
            let (nominal, true_) = rd.read_position()?;
            let mut frames = Vec::with_capacity(h.n_frames as usize);
            for _ in 0..h.n_frames {
                let mut f = vec![0.0; h.dims.len()];
                rd.read_frame(&mut f)?;
                frames.push(f);
            }
            positions.push(PositionRecord { nominal, true_, frames });
        }
        let mut sections = Vec::new();
        while let Some(s) = rd.read_section()? {
            sections.push(s);
        }
        Ok(Self {
            dims: h.dims,
            n_frames: h.n_frames,
            master_seed: h.master_seed,
            positions,
            sections,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let w = self.write_to(BufWriter::new(File::create(path)?))?;
        w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }

    pub fn sections_of(&self, kind: SectionKind) -> impl Iterator<Item = &Section> {
        self.sections.iter().filter(move |s| s.kind == kind)
    }
}

/// Streaming writer; enforces the record order of the format.
pub struct PiidWriter<W: Write> {
    w: W,
    header: Header,
    positions_done: u32,
    frames_in_position: u32,
}

impl<W: Write> PiidWriter<W> {
    pub fn new(mut w: W, header: Header) -> Result<Self> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(header.dims.width as u32).to_le_bytes())?;
        w.write_all(&(header.dims.height as u32).to_le_bytes())?;
        w.write_all(&header.n_positions.to_le_bytes())?;
        w.write_all(&header.n_frames.to_le_bytes())?;
        w.write_all(&header.master_seed.to_le_bytes())?;
        Ok(Self {
            w,
            header,
            positions_done: 0,
            frames_in_position: header.n_frames,
        })
    }

    fn position_complete(&self) -> bool {
        self.frames_in_position == self.header.n_frames
    }

    pub fn begin_position(&mut self, nominal: Offset, true_: Offset) -> Result<()> {
        if !self.position_complete() || self.positions_done == self.header.n_positions {
            return Err(Error::Format("position record out of order".into()));
        }
        for v in [nominal.row, nominal.col, true_.row, true_.col] {
            self.w.write_all(&v.to_le_bytes())?;
        }
        self.positions_done += 1;
        self.frames_in_position = 0;
        Ok(())
    }

    pub fn write_frame(&mut self, frame: &[f64]) -> Result<()> {
        if self.position_complete() || frame.len() != self.header.dims.len() {
            return Err(Error::Format("frame out of order or wrong size".into()));
        }
        write_f64s(&mut self.w, frame)?;
        self.frames_in_position += 1;
        Ok(())
    }

    pub fn write_section(&mut self, s: &Section) -> Result<()> {
        if !self.position_complete() || self.positions_done != self.header.n_positions {
            return Err(Error::Format("sections must follow all position records".into()));
        }
        if s.values.len() != s.dims.len() {
            return Err(Error::Format("section data does not match its dims".into()));
        }
        for v in [s.kind.tag(), s.index, s.dims.width as u32, s.dims.height as u32] {
            self.w.write_all(&v.to_le_bytes())?;
        }
        write_f64s(&mut self.w, &s.values)
    }

    pub fn finish(mut self) -> Result<W> {
        if !self.position_complete() || self.positions_done != self.header.n_positions {
            return Err(Error::Format(format!(
                "container truncated: {} of {} positions written",
                self.positions_done, self.header.n_positions
            )));
        }
        self.w.flush()?;
        Ok(self.w)
    }
}

fn write_f64s<W: Write>(w: &mut W, values: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Streaming reader mirroring [`PiidWriter`].
pub struct PiidReader<R: Read> {
    r: R,
    header: Header,
}

impl<R: Read> PiidReader<R> {
    pub fn new(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(truncated)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!("bad magic {magic:?}")));
        }
        let version = u16::from_le_bytes(read_array(&mut r)?);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let width = u32::from_le_bytes(read_array(&mut r)?) as usize;
        let height = u32::from_le_bytes(read_array(&mut r)?) as usize;
        let dims = Dims::new(width, height).map_err(|e| Error::Format(e.to_string()))?;
        let n_positions = u32::from_le_bytes(read_array(&mut r)?);
        let n_frames = u32::from_le_bytes(read_array(&mut r)?);
        let master_seed = u64::from_le_bytes(read_array(&mut r)?);
        Ok(Self {
            r,
            header: Header {
                dims,
                n_positions,
                n_frames,
                master_seed,
            },
        })
    }

    pub fn header(&self) -> Header {
        self.header
    }

    pub fn read_position(&mut self) -> Result<(Offset, Offset)> {
        let mut v = [0i32; 4];
        for x in v.iter_mut() {
            *x = i32::from_le_bytes(read_array(&mut self.r)?);
        }
        Ok((Offset::new(v[0], v[1]), Offset::new(v[2], v[3])))
    }

    pub fn read_frame(&mut self, out: &mut [f64]) -> Result<()> {
        read_f64s(&mut self.r, out)
    }

    /// Next trailing section, or `None` at a clean end of file.
    pub fn read_section(&mut self) -> Result<Option<Section>> {
        let mut first = [0u8; 4];
        match read_fully_or_eof(&mut self.r, &mut first)? {
            0 => return Ok(None),
            4 => {}
            _ => return Err(Error::Format("truncated section header".into())),
        }
        let tag = u32::from_le_bytes(first);
        let kind = SectionKind::from_tag(tag).ok_or_else(|| Error::Format(format!("unknown section tag {tag}")))?;
        let index = u32::from_le_bytes(read_array(&mut self.r)?);
        let width = u32::from_le_bytes(read_array(&mut self.r)?) as usize;
        let height = u32::from_le_bytes(read_array(&mut self.r)?) as usize;
        let dims = Dims::new(width, height).map_err(|e| Error::Format(e.to_string()))?;
        let mut values = vec![0.0; dims.len()];
        read_f64s(&mut self.r, &mut values)?;
        Ok(Some(Section {
            kind,
            index,
            dims,
            values,
        }))
    }
}

fn truncated(e: io::Error) -> Error {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        Error::Format("unexpected end of file".into())
    } else {
        Error::Io(e)
    }
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(b)
}

fn read_f64s<R: Read>(r: &mut R, out: &mut [f64]) -> Result<()> {
    let mut buf = vec![0u8; out.len() * 8];
    r.read_exact(&mut buf).map_err(truncated)?;
    for (v, chunk) in out.iter_mut().zip(buf.chunks_exact(8)) {
        *v = f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
    }
    Ok(())
}

fn read_fully_or_eof<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<usize> {
    let mut n = 0;
    while n < buf.len() {
        match r.read(&mut buf[n..]) {
            Ok(0) => break,
            Ok(k) => n += k,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(n)
}
