//! 16-bit binary PGM export with a plain-text sidecar describing the detector.

use std::io::{self, BufRead, Write};

use super::detector::{DetectorFrame, DetectorSpec};

pub const PGM_MAX: u16 = u16::MAX;

/// Writes counts rounded to the nearest integer and clamped to 65535.
///
/// Returns the number of clamped pixels.
pub fn write_pgm<W: Write>(frame: &DetectorFrame, mut out: W) -> io::Result<usize> {
    let spec = frame.spec();
    write!(out, "P5\n{} {}\n{}\n", spec.cols, spec.rows, PGM_MAX)?;
    let mut clamped = 0;
    let mut buf = Vec::with_capacity(frame.counts().len() * 2);
    for &c in frame.counts() {
        let v = c.round();
        let px = if v > PGM_MAX as f64 {
            clamped += 1;
            PGM_MAX
        } else {
            v as u16
        };
        buf.extend_from_slice(&px.to_be_bytes());
    }
    out.write_all(&buf)?;
    Ok(clamped)
}

/// Reads a 16-bit PGM written by [`write_pgm`]: `(cols, rows, pixels)`.
pub fn read_pgm<R: BufRead>(mut input: R) -> io::Result<(usize, usize, Vec<u16>)> {
    let invalid = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
    let mut header = Vec::new();
    let mut line = String::new();
    while header.len() < 4 {
        line.clear();
        if input.read_line(&mut line)? == 0 {
            return Err(invalid("truncated PGM header"));
        }
        let content = line.split('#').next().unwrap_or("");
        header.extend(content.split_whitespace().map(str::to_owned));
    }
    if header[0] != "P5" {
        return Err(invalid("not a binary PGM"));
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|_| invalid("bad PGM header field"));
    let (cols, rows, max) = (parse(&header[1])?, parse(&header[2])?, parse(&header[3])?);
    if max != PGM_MAX as usize {
        return Err(invalid("expected maxval 65535"));
    }
    let mut raw = vec![0u8; rows * cols * 2];
    input.read_exact(&mut raw)?;
    let pixels = raw.chunks_exact(2).map(|b| u16::from_be_bytes([b[0], b[1]])).collect();
    Ok((cols, rows, pixels))
}

/// `key = value` description of the detector that produced a frame.
pub fn sidecar(spec: &DetectorSpec, clamped: usize) -> String {
    format!(
        "rows = {}\ncols = {}\npitch = {:.17e}\norigin_x = {:.17e}\norigin_y = {:.17e}\naxis_rotation = {:.17e}\nmean_photons = {:.17e}\nseed = {}\nnoiseless = {}\nclamped_pixels = {}\n",
        spec.rows,
        spec.cols,
        spec.pitch,
        spec.origin.0,
        spec.origin.1,
        spec.axis_rotation,
        spec.mean_photons,
        spec.seed,
        spec.noiseless,
        clamped,
    )
}
