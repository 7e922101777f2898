//! Binary dump of an assembled block system.
//!
//! Layout, all little-endian:
//!
//! ```text
//! offset 0   b"DBOX"
//! offset 4   u32 N (nodes)
//! offset 8   u32 T (channels)
//! offset 12  u32 reserved, zero
//! offset 16  B, NT x NT, row-major, each entry (re: f64, im: f64)
//! ...        f, NT entries (re: f64, im: f64)
//! ```

use std::io::{Read, Write};

use num_complex::Complex64;

use super::BlockSystem;
use crate::error::{Error, Result};

pub const DUMP_MAGIC: [u8; 4] = *b"DBOX";

/// Contents of a dump file.
#[derive(Debug, Clone, PartialEq)]
pub struct DumpedSystem {
    pub n_nodes: usize,
    pub truncation: usize,
    /// Row-major `NT x NT`.
    pub matrix: Vec<Complex64>,
    pub rhs: Vec<Complex64>,
}

impl DumpedSystem {
    pub fn dimension(&self) -> usize {
        self.n_nodes * self.truncation
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dimension() + col]
    }
}

fn header_field(value: usize, name: &str) -> Result<[u8; 4]> {
    u32::try_from(value)
        .map(u32::to_le_bytes)
        .map_err(|_| Error::InvalidConfig(format!("{name} = {value} does not fit the dump header")))
}

fn write_complex(out: &mut impl Write, z: Complex64) -> std::io::Result<()> {
    out.write_all(&z.re.to_le_bytes())?;
    out.write_all(&z.im.to_le_bytes())
}

pub(super) fn write_dump(system: &BlockSystem, out: impl Write) -> Result<()> {
    let mut out = std::io::BufWriter::new(out);
    out.write_all(&DUMP_MAGIC)?;
    out.write_all(&header_field(system.n_nodes(), "N")?)?;
    out.write_all(&header_field(system.truncation(), "T")?)?;
    out.write_all(&[0u8; 4])?;
    let dim = system.dimension();
    for row in 0..dim {
        for col in 0..dim {
            write_complex(&mut out, system.entry(row, col))?;
        }
    }
    for &z in system.rhs() {
        write_complex(&mut out, z)?;
    }
    out.flush()?;
    Ok(())
}

fn read_u32(input: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_complex(input: &mut impl Read) -> Result<Complex64> {
    let mut buf = [0u8; 16];
    input.read_exact(&mut buf)?;
    let re = f64::from_le_bytes(buf[..8].try_into().unwrap());
    let im = f64::from_le_bytes(buf[8..].try_into().unwrap());
    Ok(Complex64::new(re, im))
}

/// Reads a dump written by [`BlockSystem::write_dump`].
pub fn read_dump(input: impl Read) -> Result<DumpedSystem> {
    let mut input = std::io::BufReader::new(input);
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if magic != DUMP_MAGIC {
        return Err(Error::InvalidConfig(format!("bad dump magic {magic:?}")));
    }
    let n_nodes = read_u32(&mut input)? as usize;
    let truncation = read_u32(&mut input)? as usize;
    let _reserved = read_u32(&mut input)?;
    let dim = n_nodes * truncation;
    let matrix = (0..dim * dim)
        .map(|_| read_complex(&mut input))
        .collect::<Result<Vec<_>>>()?;
    let rhs = (0..dim)
        .map(|_| read_complex(&mut input))
        .collect::<Result<Vec<_>>>()?;
    Ok(DumpedSystem {
        n_nodes,
        truncation,
        matrix,
        rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{build_channels, ProblemConfig};
    use crate::kernel::KernelContext;
    use crate::nystrom::{assemble, Discretization};

    #[test]
    fn header_and_layout() {
        let config = ProblemConfig::dimensionless(2.0, 4.0, 1).unwrap();
        let ctx = KernelContext::new(config, build_channels(&config, 3).unwrap());
        let system = assemble(&ctx, &Discretization::trapezoid(1.0, 5).unwrap()).unwrap();
        let mut bytes = Vec::new();
        system.write_dump(&mut bytes).unwrap();

        let dim = 15;
        assert_eq!(bytes.len(), 16 + 16 * (dim * dim + dim));
        assert_eq!(&bytes[..4], b"DBOX");
        assert_eq!(&bytes[4..8], &5u32.to_le_bytes());
        assert_eq!(&bytes[8..12], &3u32.to_le_bytes());
        assert_eq!(&bytes[12..16], &[0; 4]);
        // entry (row 1, col 2) sits at 16 + 16 * (1 * dim + 2)
        let at = 16 + 16 * (dim + 2);
        let re = f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
        let im = f64::from_le_bytes(bytes[at + 8..at + 16].try_into().unwrap());
        assert_eq!(Complex64::new(re, im), system.entry(1, 2));

        let back = read_dump(&bytes[..]).unwrap();
        assert_eq!((back.n_nodes, back.truncation), (5, 3));
        for row in 0..dim {
            for col in 0..dim {
                assert_eq!(back.entry(row, col), system.entry(row, col));
            }
        }
        assert_eq!(back.rhs, system.rhs());
    }

    #[test]
    fn rejects_bad_magic() {
        let bytes = b"XBOX\0\0\0\0\0\0\0\0\0\0\0\0";
        assert!(read_dump(&bytes[..]).is_err());
    }
}
