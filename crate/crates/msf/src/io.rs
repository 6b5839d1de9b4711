//! Binary file formats for coefficient sets and grid samples.
//!
//! Two sibling formats share one layout philosophy: a four-byte magic, a
//! little-endian `u32` header, then the payload as interleaved little-endian
//! `f64` pairs `(re, im)`. Writing then reading is bitwise lossless for
//! every value, `-0.0` and non-finite payloads included.
//!
//! **MSFC v1** — Laurent coefficients:
//!
//! ```text
//! offset  size  field
//!      0     4  magic "MSFC"
//!      4     4  version (= 1)
//!      8     4  r       (matrix dimension, ≥ 1)
//!     12     4  n_neg   (lowest power is −n_neg)
//!     16     4  n_pos   (highest power is n_pos)
//!     20     …  (n_neg+n_pos+1)·r·r complex values, coefficient-major from
//!               power −n_neg up to n_pos, row-major within each matrix
//! ```
//!
//! **MSFG v1** — grid samples:
//!
//! ```text
//! offset  size  field
//!      0     4  magic "MSFG"
//!      4     4  version (= 1)
//!      8     4  r       (matrix dimension, ≥ 1)
//!     12     4  N_g     (grid size, power of two ≥ 2)
//!     16     …  N_g·r·r complex values in grid order j = 0..N_g−1,
//!               row-major within each matrix
//! ```
//!
//! Readers reject wrong magic, unsupported versions, invalid headers,
//! truncated payloads, and trailing bytes, always naming the byte offset of
//! the problem.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::laurent::{GridSamples, LaurentPoly};
use crate::mat::Mat;

const MAGIC_COEFFS: &[u8; 4] = b"MSFC";
const MAGIC_SAMPLES: &[u8; 4] = b"MSFG";
const VERSION: u32 = 1;

/// Refuse to allocate payloads beyond this many complex values (4 GiB);
/// a corrupt header must fail cleanly, not abort on an absurd allocation.
const MAX_VALUES: u64 = 1 << 28;

/// Content of a factorization input file, either representation.
#[derive(Debug, Clone)]
pub enum Payload {
    /// An MSFC coefficient set.
    Coefficients(LaurentPoly),
    /// An MSFG sample set.
    Samples(GridSamples),
}

fn fail(offset: u64, message: impl Into<String>) -> Error {
    Error::Format { offset, message: message.into() }
}

/// Tracks the byte offset so every error can name where parsing stopped.
struct Cursor<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> Cursor<R> {
    fn new(inner: R) -> Self {
        Cursor { inner, offset: 0 }
    }

    fn read_exact(&mut self, buf: &mut [u8], what: &str) -> Result<()> {
        let start = self.offset;
        let mut filled = 0;
        while filled < buf.len() {
            match self.inner.read(&mut buf[filled..]) {
                Ok(0) => {
                    return Err(fail(
                        start + filled as u64,
                        format!("unexpected end of file while reading {what}"),
                    ))
                }
                Ok(n) => filled += n,
                Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
                Err(e) => return Err(Error::Io(e)),
            }
        }
        self.offset += buf.len() as u64;
        Ok(())
    }

    fn read_u32(&mut self, what: &str) -> Result<u32> {
        let mut b = [0u8; 4];
        self.read_exact(&mut b, what)?;
        Ok(u32::from_le_bytes(b))
    }

    fn read_complex(&mut self, what: &str) -> Result<Complex64> {
        let mut b = [0u8; 16];
        self.read_exact(&mut b, what)?;
        let re = f64::from_le_bytes(b[..8].try_into().unwrap());
        let im = f64::from_le_bytes(b[8..].try_into().unwrap());
        Ok(Complex64::new(re, im))
    }

    /// Fails unless the stream is exhausted.
    fn expect_end(&mut self) -> Result<()> {
        let mut probe = [0u8; 1];
        loop {
            match self.inner.read(&mut probe) {
                Ok(0) => return Ok(()),
                Ok(_) => return Err(fail(self.offset, "trailing data after payload")),
                Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
                Err(e) => return Err(Error::Io(e)),
            }
        }
    }

    fn read_magic(&mut self) -> Result<[u8; 4]> {
        let mut m = [0u8; 4];
        self.read_exact(&mut m, "magic bytes")?;
        Ok(m)
    }

    fn check_version(&mut self) -> Result<()> {
        let at = self.offset;
        let v = self.read_u32("format version")?;
        if v != VERSION {
            return Err(fail(at, format!("unsupported format version {v} (expected {VERSION})")));
        }
        Ok(())
    }

    fn read_dimension(&mut self) -> Result<usize> {
        let at = self.offset;
        let r = self.read_u32("matrix dimension")?;
        if r == 0 {
            return Err(fail(at, "matrix dimension must be ≥ 1"));
        }
        Ok(r as usize)
    }

    /// Reads `count` matrices of order `r`, guarding the total allocation.
    fn read_matrices(&mut self, count: u64, r: usize, what: &str) -> Result<Vec<Mat>> {
        let per = (r as u64) * (r as u64);
        let total = count.checked_mul(per).filter(|&t| t <= MAX_VALUES).ok_or_else(|| {
            fail(self.offset, format!("header promises an implausible payload of {count}×{per} values"))
        })?;
        let _ = total;
        let mut out = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let mut m = Mat::zeros(r, r);
            for v in m.data_mut() {
                *v = self.read_complex(what)?;
            }
            out.push(m);
        }
        Ok(out)
    }
}

fn write_u32<W: Write>(w: &mut W, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn write_matrices<W: Write>(w: &mut W, mats: &[Mat]) -> Result<()> {
    for m in mats {
        for v in m.data() {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
    }
    Ok(())
}

fn header_u32(value: usize, what: &str) -> Result<u32> {
    u32::try_from(value).map_err(|_| Error::InvalidConfig {
        message: format!("{what} {value} does not fit the format's 32-bit header field"),
    })
}

/// Writes a coefficient set in MSFC v1 layout.
pub fn write_poly<W: Write>(mut w: W, p: &LaurentPoly) -> Result<()> {
    w.write_all(MAGIC_COEFFS)?;
    write_u32(&mut w, VERSION)?;
    write_u32(&mut w, header_u32(p.r(), "matrix dimension")?)?;
    write_u32(&mut w, header_u32(p.n_neg(), "lower band")?)?;
    write_u32(&mut w, header_u32(p.n_pos(), "upper band")?)?;
    write_matrices(&mut w, p.coeffs())?;
    w.flush()?;
    Ok(())
}

/// Reads an MSFC v1 coefficient set.
pub fn read_poly<R: Read>(r: R) -> Result<LaurentPoly> {
    let mut c = Cursor::new(r);
    let magic = c.read_magic()?;
    if &magic != MAGIC_COEFFS {
        return Err(fail(0, format!("bad magic {:?} (expected \"MSFC\")", magic_lossy(&magic))));
    }
    read_poly_body(&mut c)
}

fn read_poly_body<R: Read>(c: &mut Cursor<R>) -> Result<LaurentPoly> {
    c.check_version()?;
    let dim = c.read_dimension()?;
    let n_neg = c.read_u32("lower band")? as usize;
    let n_pos = c.read_u32("upper band")? as usize;
    let count = (n_neg as u64) + (n_pos as u64) + 1;
    let coeffs = c.read_matrices(count, dim, "coefficient payload")?;
    c.expect_end()?;
    Ok(LaurentPoly::from_coeffs(dim, n_neg, n_pos, coeffs))
}

/// Writes a sample set in MSFG v1 layout.
pub fn write_samples<W: Write>(mut w: W, s: &GridSamples) -> Result<()> {
    w.write_all(MAGIC_SAMPLES)?;
    write_u32(&mut w, VERSION)?;
    write_u32(&mut w, header_u32(s.r(), "matrix dimension")?)?;
    write_u32(&mut w, header_u32(s.n_g(), "grid size")?)?;
    write_matrices(&mut w, s.nodes())?;
    w.flush()?;
    Ok(())
}

/// Reads an MSFG v1 sample set.
pub fn read_samples<R: Read>(r: R) -> Result<GridSamples> {
    let mut c = Cursor::new(r);
    let magic = c.read_magic()?;
    if &magic != MAGIC_SAMPLES {
        return Err(fail(0, format!("bad magic {:?} (expected \"MSFG\")", magic_lossy(&magic))));
    }
    read_samples_body(&mut c)
}

fn read_samples_body<R: Read>(c: &mut Cursor<R>) -> Result<GridSamples> {
    c.check_version()?;
    let dim = c.read_dimension()?;
    let at = c.offset;
    let n_g = c.read_u32("grid size")? as usize;
    if n_g < 2 || !n_g.is_power_of_two() {
        return Err(fail(at, format!("grid size must be a power of two ≥ 2, got {n_g}")));
    }
    let values = c.read_matrices(n_g as u64, dim, "sample payload")?;
    c.expect_end()?;
    Ok(GridSamples::from_values(values))
}

/// Reads either format, dispatching on the magic bytes.
pub fn read_payload<R: Read>(r: R) -> Result<Payload> {
    let mut c = Cursor::new(r);
    let magic = c.read_magic()?;
    match &magic {
        m if m == MAGIC_COEFFS => Ok(Payload::Coefficients(read_poly_body(&mut c)?)),
        m if m == MAGIC_SAMPLES => Ok(Payload::Samples(read_samples_body(&mut c)?)),
        other => Err(fail(
            0,
            format!("bad magic {:?} (expected \"MSFC\" or \"MSFG\")", magic_lossy(other)),
        )),
    }
}

fn magic_lossy(bytes: &[u8; 4]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

/// Writes a coefficient set to a file (buffered).
pub fn save_poly(path: &Path, p: &LaurentPoly) -> Result<()> {
    write_poly(BufWriter::new(File::create(path)?), p)
}

/// Reads a coefficient set from a file (buffered).
pub fn load_poly(path: &Path) -> Result<LaurentPoly> {
    read_poly(BufReader::new(File::open(path)?))
}

/// Writes a sample set to a file (buffered).
pub fn save_samples(path: &Path, s: &GridSamples) -> Result<()> {
    write_samples(BufWriter::new(File::create(path)?), s)
}

/// Reads a sample set from a file (buffered).
pub fn load_samples(path: &Path) -> Result<GridSamples> {
    read_samples(BufReader::new(File::open(path)?))
}

/// Reads either format from a file (buffered).
pub fn load_payload(path: &Path) -> Result<Payload> {
    read_payload(BufReader::new(File::open(path)?))
}
