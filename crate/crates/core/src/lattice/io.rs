//! CSV and binary serialization of symmetric sequences.
//!
//! CSV rows list every full-box site: the index columns followed by the value.
//! Floats are written in shortest round-trip form, so reading back is exact.
//!
//! Binary layout (little endian):
//!
//! ```text
//! magic  b"KGSQ"
//! u32    format version (1)
//! u32    n
//! u64    K
//! f64    mu
//! u8 × n offset codes (0 = site, 1 = bond)
//! u64    number of values (full box)
//! f64 ×  values in lexicographic full-box order
//! ```

use super::{GridSpec, Lattice, Offset, SymmetricSequence, Symmetry};
use crate::error::{Error, Result};
use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use std::io::{Read, Write};

const MAGIC: &[u8; 4] = b"KGSQ";
const VERSION: u32 = 1;

pub fn write_csv<W: Write>(x: &SymmetricSequence, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let lat = x.lattice();
    match lat.dim() {
        1 => wtr.write_record(["j", "value"])?,
        _ => wtr.write_record(["j1", "j2", "value"])?,
    }
    for j in lat.full_indices() {
        let v = x.get(&j[..lat.dim()]);
        match lat.dim() {
            1 => wtr.write_record([j[0].to_string(), v.to_string()])?,
            _ => wtr.write_record([j[0].to_string(), j[1].to_string(), v.to_string()])?,
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a CSV written by [`write_csv`] onto a known lattice. Sites absent from
/// the file are zero; orbits are averaged.
pub fn read_csv<R: Read>(lattice: Lattice, r: R) -> Result<SymmetricSequence> {
    let mut rdr = csv::Reader::from_reader(r);
    let dim = lattice.dim();
    let mut sums = vec![0.0; lattice.len()];
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != dim + 1 {
            return Err(Error::Format(format!(
                "expected {} columns, found {}",
                dim + 1,
                rec.len()
            )));
        }
        let mut j = [0i64; 2];
        for (a, slot) in j.iter_mut().enumerate().take(dim) {
            *slot = rec[a]
                .trim()
                .parse()
                .map_err(|e| Error::Format(format!("index {:?}: {e}", &rec[a])))?;
        }
        let v: f64 = rec[dim]
            .trim()
            .parse()
            .map_err(|e| Error::Format(format!("value {:?}: {e}", &rec[dim])))?;
        let r = lattice
            .representative(&j[..dim])
            .ok_or_else(|| Error::Format(format!("index {:?} outside the box", &j[..dim])))?;
        sums[r] += v;
    }
    for (i, s) in sums.iter_mut().enumerate() {
        *s /= lattice.multiplicity(i);
    }
    SymmetricSequence::from_values(lattice, sums)
}

pub(crate) fn write_lattice_header<W: Write>(lat: &Lattice, w: &mut W) -> Result<()> {
    w.write_u32::<LittleEndian>(lat.dim() as u32)?;
    w.write_u64::<LittleEndian>(lat.grid().k() as u64)?;
    w.write_f64::<LittleEndian>(lat.mu())?;
    for o in lat.symmetry().offsets() {
        w.write_u8(o.code())?;
    }
    Ok(())
}

pub(crate) fn read_lattice_header<R: Read>(r: &mut R) -> Result<Lattice> {
    let dim = r.read_u32::<LittleEndian>()? as usize;
    if dim != 1 && dim != 2 {
        return Err(Error::Format(format!("dimension {dim} in header")));
    }
    let k = r.read_u64::<LittleEndian>()? as usize;
    let mu = r.read_f64::<LittleEndian>()?;
    let mut offsets = Vec::with_capacity(dim);
    for _ in 0..dim {
        offsets.push(Offset::from_code(r.read_u8()?)?);
    }
    // The file carries no decay budget; any valid K is accepted on read.
    let grid = GridSpec::with_decay_budget(dim, k, mu, 0.0)
        .map_err(|e| Error::Format(format!("bad grid header: {e}")))?;
    Lattice::new(grid, Symmetry::new(&offsets)?)
}

pub(crate) fn write_values<W: Write>(x: &SymmetricSequence, w: &mut W) -> Result<()> {
    let full = x.to_full();
    w.write_u64::<LittleEndian>(full.len() as u64)?;
    for v in full {
        w.write_f64::<LittleEndian>(v)?;
    }
    Ok(())
}

pub(crate) fn read_values<R: Read>(lat: Lattice, r: &mut R) -> Result<SymmetricSequence> {
    let count = r.read_u64::<LittleEndian>()? as usize;
    if count != lat.full_len() {
        return Err(Error::Format(format!(
            "{count} values for a box of {}",
            lat.full_len()
        )));
    }
    let mut full = vec![0.0; count];
    r.read_f64_into::<LittleEndian>(&mut full)?;
    SymmetricSequence::from_full(lat, &full)
}

pub fn write_binary<W: Write>(x: &SymmetricSequence, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(VERSION)?;
    write_lattice_header(x.lattice(), &mut w)?;
    write_values(x, &mut w)
}

pub fn read_binary<R: Read>(mut r: R) -> Result<SymmetricSequence> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a sequence file".into()));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let lat = read_lattice_header(&mut r)?;
    read_values(lat, &mut r)
}
