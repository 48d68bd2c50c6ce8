//! Binary key dumps: `GZK1`, u16 LE width, u64 LE count, then each key as
//! `⌈width/8⌉` little-endian bytes.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::bitkey::low_ones;
use crate::error::{Error, Result};

pub const DUMP_MAGIC: &[u8; 4] = b"GZK1";

pub fn write_dump(path: &Path, width: u32, keys: &[u128]) -> Result<()> {
    if !(1..=128).contains(&width) {
        return Err(Error::WidthOutOfRange(width));
    }
    let bytes = width.div_ceil(8) as usize;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&(width as u16).to_le_bytes())?;
    w.write_all(&(keys.len() as u64).to_le_bytes())?;
    for k in keys {
        if k & !low_ones(width) != 0 {
            return Err(Error::Format(format!("key {k:#x} exceeds {width} bits")));
        }
        w.write_all(&k.to_le_bytes()[..bytes])?;
    }
    w.flush()?;
    Ok(())
}

/// Returns the width and the keys. Without `sort`, keys must be strictly
/// increasing; with it they are sorted and deduplicated.
pub fn read_dump(path: &Path, sort: bool) -> Result<(u32, Vec<u128>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != DUMP_MAGIC {
        return Err(Error::Format("bad magic, expected GZK1".into()));
    }
    let mut w = [0u8; 2];
    r.read_exact(&mut w)?;
    let width = u16::from_le_bytes(w) as u32;
    if !(1..=128).contains(&width) {
        return Err(Error::WidthOutOfRange(width));
    }
    let mut c = [0u8; 8];
    r.read_exact(&mut c)?;
    let count = u64::from_le_bytes(c);
    let bytes = width.div_ceil(8) as usize;
    let mut keys = Vec::with_capacity(count.min(1 << 24) as usize);
    for _ in 0..count {
        let mut buf = [0u8; 16];
        r.read_exact(&mut buf[..bytes])?;
        let k = u128::from_le_bytes(buf);
        if k & !low_ones(width) != 0 {
            return Err(Error::Format(format!("key {k:#x} exceeds {width} bits")));
        }
        keys.push(k);
    }
    if r.read(&mut [0u8; 1])? != 0 {
        return Err(Error::Format("trailing bytes after keys".into()));
    }
    if sort {
        keys.sort_unstable();
        keys.dedup();
    } else if let Some(i) = keys.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::Format(format!(
            "keys not strictly increasing at index {}",
            i + 1
        )));
    }
    Ok((width, keys))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for width in [1u32, 6, 8, 9, 64, 100, 128] {
            let p = dir.path().join(format!("k{width}.gzk"));
            let keys: Vec<u128> = (0..20u128)
                .map(|i| (i * 0x9e37_79b9) & low_ones(width))
                .collect();
            let mut sorted = keys.clone();
            sorted.sort_unstable();
            sorted.dedup();
            write_dump(&p, width, &sorted).unwrap();
            assert_eq!(read_dump(&p, false).unwrap(), (width, sorted.clone()));
            let raw = std::fs::read(&p).unwrap();
            assert_eq!(&raw[..4], b"GZK1");
            assert_eq!(raw.len(), 14 + sorted.len() * width.div_ceil(8) as usize);
        }
    }

    #[test]
    fn unsorted_needs_flag() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("u.gzk");
        write_dump(&p, 8, &[9, 5, 5, 12]).unwrap();
        assert!(read_dump(&p, false).is_err());
        assert_eq!(read_dump(&p, true).unwrap(), (8, vec![5, 9, 12]));
        std::fs::write(&p, b"NOPE").unwrap();
        assert!(read_dump(&p, true).is_err());
    }
}
