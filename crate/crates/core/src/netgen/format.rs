//! Binary edge-list serialization.
//!
//! Layout (little endian): magic `SCDN`, `u32` format version, `u64` node
//! count, `u64` edge count, then `(u64 supplier, u64 buyer)` pairs sorted by
//! buyer, then supplier.

use std::io::{self, BufReader, BufWriter, Read, Write};

use thiserror::Error;

use super::network::{edge_key, SupplyNetwork};

pub const MAGIC: [u8; 4] = *b"SCDN";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 24;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic {0:?}, not a network file")]
    BadMagic([u8; 4]),
    #[error("unsupported network format version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("file truncated: {0}")]
    Truncated(&'static str),
    #[error("trailing bytes after {0} edges")]
    Trailing(u64),
    #[error("edge {index} ({supplier} -> {buyer}) invalid: {reason}")]
    BadEdge {
        index: u64,
        supplier: u64,
        buyer: u64,
        reason: &'static str,
    },
}

pub fn write_network<W: Write>(net: &SupplyNetwork, w: W) -> io::Result<()> {
    let mut w = BufWriter::with_capacity(1 << 20, w);
    w.write_all(&MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(net.n_nodes() as u64).to_le_bytes())?;
    w.write_all(&(net.n_edges() as u64).to_le_bytes())?;
    for (s, b) in net.edges() {
        w.write_all(&(s as u64).to_le_bytes())?;
        w.write_all(&(b as u64).to_le_bytes())?;
    }
    w.flush()
}

fn read_exact_or<R: Read>(r: &mut R, buf: &mut [u8], what: &'static str) -> Result<(), FormatError> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => FormatError::Truncated(what),
        _ => FormatError::Io(e),
    })
}

pub fn read_network<R: Read>(r: R) -> Result<SupplyNetwork, FormatError> {
    let mut r = BufReader::with_capacity(1 << 20, r);
    let mut head = [0u8; HEADER_LEN];
    read_exact_or(&mut r, &mut head, "header")?;
    let magic: [u8; 4] = head[0..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(FormatError::BadMagic(magic));
    }
    let version = u32::from_le_bytes(head[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(FormatError::Version(version));
    }
    let n_nodes = u64::from_le_bytes(head[8..16].try_into().unwrap());
    let n_edges = u64::from_le_bytes(head[16..24].try_into().unwrap());
    if n_nodes > u32::MAX as u64 {
        return Err(FormatError::BadEdge {
            index: 0,
            supplier: 0,
            buyer: 0,
            reason: "node count exceeds 32-bit ids",
        });
    }
    let mut keys = Vec::with_capacity(n_edges.min(1 << 28) as usize);
    let mut pair = [0u8; 16];
    let mut prev: Option<u64> = None;
    for index in 0..n_edges {
        read_exact_or(&mut r, &mut pair, "edge list")?;
        let supplier = u64::from_le_bytes(pair[0..8].try_into().unwrap());
        let buyer = u64::from_le_bytes(pair[8..16].try_into().unwrap());
        let bad = |reason| FormatError::BadEdge {
            index,
            supplier,
            buyer,
            reason,
        };
        if supplier >= n_nodes || buyer >= n_nodes {
            return Err(bad("node id out of range"));
        }
        if supplier == buyer {
            return Err(bad("self-loop"));
        }
        let key = edge_key(supplier as u32, buyer as u32);
        if prev.is_some_and(|p| p >= key) {
            return Err(bad("not sorted by buyer then supplier, or duplicate"));
        }
        prev = Some(key);
        keys.push(key);
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(FormatError::Trailing(n_edges));
    }
    Ok(SupplyNetwork::from_sorted_keys(n_nodes as usize, &keys))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SupplyNetwork {
        SupplyNetwork::from_edges(5, [(0, 1), (2, 1), (1, 3), (4, 3), (3, 0)]).unwrap()
    }

    #[test]
    fn round_trip_and_layout() {
        let net = sample();
        let mut buf = Vec::new();
        write_network(&net, &mut buf).unwrap();
        assert_eq!(buf.len(), 24 + 16 * 5);
        assert_eq!(&buf[..4], b"SCDN");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 5);
        // first pair is (3 -> 0): buyer-major ordering
        assert_eq!(u64::from_le_bytes(buf[24..32].try_into().unwrap()), 3);
        assert_eq!(u64::from_le_bytes(buf[32..40].try_into().unwrap()), 0);
        assert_eq!(read_network(&buf[..]).unwrap(), net);
    }

    #[test]
    fn corruption_detected() {
        let mut buf = Vec::new();
        write_network(&sample(), &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_network(&bad[..]), Err(FormatError::BadMagic(_))));
        let mut bad = buf.clone();
        bad[4] = 9;
        assert!(matches!(read_network(&bad[..]), Err(FormatError::Version(9))));
        assert!(matches!(read_network(&buf[..30]), Err(FormatError::Truncated(_))));
        assert!(matches!(read_network(&buf[..10]), Err(FormatError::Truncated(_))));
        let mut bad = buf.clone();
        bad.push(0);
        assert!(matches!(read_network(&bad[..]), Err(FormatError::Trailing(5))));
        let mut bad = buf.clone();
        bad[16] = 6; // claim one more edge than stored
        assert!(matches!(read_network(&bad[..]), Err(FormatError::Truncated(_))));
        let mut bad = buf;
        bad[24] = 0; // first edge becomes 0 -> 0
        assert!(matches!(read_network(&bad[..]), Err(FormatError::BadEdge { .. })));
    }
}
