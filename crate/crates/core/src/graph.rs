//! Undirected simple graphs in compressed sparse row layout.
//!
//! Every undirected edge `{u, v}` is stored twice, once in each endpoint's
//! adjacency range. Ranges are sorted ascending and contain neither
//! self-loops nor duplicates. Vertex IDs are `u32`; row offsets are `usize`
//! so graphs with more than 2^31 directed edges stay representable on 64-bit
//! targets.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::ops::Range;
use std::path::Path;

use crate::error::{Error, Result};

/// Vertex identifier.
pub type Vertex = u32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsrGraph {
    row_offsets: Vec<usize>,
    col_indices: Vec<Vertex>,
}

impl Default for CsrGraph {
    fn default() -> Self {
        CsrGraph {
            row_offsets: vec![0],
            col_indices: Vec::new(),
        }
    }
}

impl CsrGraph {
    /// Builds a normalized graph on `n` vertices from an arbitrary edge
    /// sequence. Self-loops are dropped, duplicates and reverse duplicates
    /// are merged.
    ///
    /// Panics if an endpoint is `>= n`.
    pub fn from_edges<I>(n: usize, edges: I) -> Self
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        assert!(n <= Vertex::MAX as usize, "vertex count exceeds u32 range");
        let edges: Vec<(Vertex, Vertex)> = edges.into_iter().filter(|&(u, v)| u != v).collect();

        let mut counts = vec![0usize; n + 1];
        for &(u, v) in &edges {
            assert!(
                (u as usize) < n && (v as usize) < n,
                "edge ({u}, {v}) out of range for n={n}"
            );
            counts[u as usize + 1] += 1;
            counts[v as usize + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }

        let mut fill = counts.clone();
        let mut cols = vec![0 as Vertex; counts[n]];
        for &(u, v) in &edges {
            cols[fill[u as usize]] = v;
            fill[u as usize] += 1;
            cols[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        drop(edges);

        // Sort each range, then squeeze out duplicates in place.
        let mut row_offsets = Vec::with_capacity(n + 1);
        row_offsets.push(0);
        let mut write = 0;
        for u in 0..n {
            let range = &mut cols[counts[u]..counts[u + 1]];
            range.sort_unstable();
            let mut last = None;
            for i in counts[u]..counts[u + 1] {
                let v = cols[i];
                if last != Some(v) {
                    cols[write] = v;
                    write += 1;
                    last = Some(v);
                }
            }
            row_offsets.push(write);
        }
        cols.truncate(write);
        cols.shrink_to_fit();

        CsrGraph {
            row_offsets,
            col_indices: cols,
        }
    }

    /// Wraps raw CSR arrays after checking every structural invariant.
    pub fn from_csr(row_offsets: Vec<usize>, col_indices: Vec<Vertex>) -> Result<Self> {
        let g = CsrGraph {
            row_offsets,
            col_indices,
        };
        g.check()?;
        Ok(g)
    }

    /// Full O(n + m log Δ) structural check: offsets, ordering, self-loops
    /// and symmetry.
    pub fn check(&self) -> Result<()> {
        let offs = &self.row_offsets;
        if offs.first() != Some(&0) {
            return Err(Error::Format("row_offsets must start at 0".into()));
        }
        if *offs.last().unwrap() != self.col_indices.len() {
            return Err(Error::Format("row_offsets must end at col_indices length".into()));
        }
        if offs.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Format("row_offsets must be nondecreasing".into()));
        }
        if !self.col_indices.len().is_multiple_of(2) {
            return Err(Error::Format("odd number of directed edges".into()));
        }
        let n = self.num_vertices();
        for u in 0..n {
            let nbrs = self.neighbors(u as Vertex);
            for (i, &v) in nbrs.iter().enumerate() {
                if v as usize >= n {
                    return Err(Error::Format(format!("neighbor {v} of {u} out of range")));
                }
                if v as usize == u {
                    return Err(Error::Format(format!("self-loop at {u}")));
                }
                if i > 0 && nbrs[i - 1] >= v {
                    return Err(Error::Format(format!("adjacency of {u} not strictly ascending")));
                }
                if self.neighbors(v).binary_search(&(u as Vertex)).is_err() {
                    return Err(Error::Format(format!("edge ({u}, {v}) has no reverse")));
                }
            }
        }
        Ok(())
    }

    pub fn num_vertices(&self) -> usize {
        self.row_offsets.len() - 1
    }

    /// Undirected edge count.
    pub fn num_edges(&self) -> usize {
        self.col_indices.len() / 2
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[Vertex] {
        &self.col_indices
    }

    #[inline]
    pub fn degree(&self, u: Vertex) -> usize {
        let u = u as usize;
        self.row_offsets[u + 1] - self.row_offsets[u]
    }

    #[inline]
    pub fn neighbors(&self, u: Vertex) -> &[Vertex] {
        &self.col_indices[self.edge_range(u)]
    }

    /// Positions of `u`'s outgoing directed edges inside `col_indices`.
    #[inline]
    pub fn edge_range(&self, u: Vertex) -> Range<usize> {
        let u = u as usize;
        self.row_offsets[u]..self.row_offsets[u + 1]
    }

    pub fn max_degree(&self) -> usize {
        self.row_offsets.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0)
    }

    pub fn vertices(&self) -> Range<Vertex> {
        0..self.num_vertices() as Vertex
    }

    /// Undirected edges `(u, v)` with `u < v`, in CSR order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.vertices().flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }
}

/// Parses a SNAP-style edge list.
///
/// Original IDs are compacted to `0..n` by ascending numeric value. Only IDs
/// that occur in at least one non-loop edge become vertices.
pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<CsrGraph> {
    let mut raw = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let u = parse_id(tokens.next(), lineno)?;
        let v = parse_id(tokens.next(), lineno)?;
        if u != v {
            raw.push((u, v));
        }
    }

    let mut ids: Vec<u64> = raw.iter().flat_map(|&(u, v)| [u, v]).collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() > Vertex::MAX as usize {
        return Err(Error::Format("too many vertices".into()));
    }
    let index: HashMap<u64, Vertex> = ids.iter().enumerate().map(|(i, &id)| (id, i as Vertex)).collect();

    Ok(CsrGraph::from_edges(
        ids.len(),
        raw.into_iter().map(|(u, v)| (index[&u], index[&v])),
    ))
}

fn parse_id(token: Option<&str>, line: usize) -> Result<u64> {
    let token = token.ok_or_else(|| Error::parse(line, "expected two vertex IDs"))?;
    if token.starts_with('-') {
        return Err(Error::parse(line, format!("negative vertex ID {token:?}")));
    }
    token
        .parse::<u64>()
        .map_err(|_| Error::parse(line, format!("malformed vertex ID {token:?}")))
}

/// Parses a DIMACS `.col` file. The declared vertex count is authoritative,
/// so isolated vertices survive.
pub fn parse_dimacs<R: BufRead>(reader: R) -> Result<CsrGraph> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            None | Some("c") => {}
            Some("p") => {
                if n.is_some() {
                    return Err(Error::parse(lineno, "duplicate problem line"));
                }
                let _format = tokens
                    .next()
                    .ok_or_else(|| Error::parse(lineno, "incomplete problem line"))?;
                let count = tokens
                    .next()
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| Error::parse(lineno, "malformed vertex count"))?;
                if count > Vertex::MAX as usize {
                    return Err(Error::parse(lineno, "vertex count exceeds u32 range"));
                }
                n = Some(count);
            }
            Some("e") => {
                let n = n.ok_or_else(|| Error::parse(lineno, "edge line before problem line"))?;
                let mut endpoint = || -> Result<Vertex> {
                    let tok = tokens
                        .next()
                        .ok_or_else(|| Error::parse(lineno, "edge line needs two endpoints"))?;
                    let id = tok
                        .parse::<i64>()
                        .map_err(|_| Error::parse(lineno, format!("malformed vertex ID {tok:?}")))?;
                    if id < 1 || id as u64 > n as u64 {
                        return Err(Error::parse(lineno, format!("vertex {id} out of range [1, {n}]")));
                    }
                    Ok((id - 1) as Vertex)
                };
                let u = endpoint()?;
                let v = endpoint()?;
                edges.push((u, v));
            }
            Some(other) => {
                return Err(Error::parse(lineno, format!("unknown line type {other:?}")));
            }
        }
    }
    let n = n.ok_or_else(|| Error::parse(0, "missing problem line"))?;
    Ok(CsrGraph::from_edges(n, edges))
}

/// Writes one `u v` line per undirected edge (`u < v`).
pub fn write_edge_list<W: Write>(g: &CsrGraph, mut out: W) -> io::Result<()> {
    writeln!(out, "# n {} m {}", g.num_vertices(), g.num_edges())?;
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    out.flush()
}

pub fn write_dimacs<W: Write>(g: &CsrGraph, mut out: W) -> io::Result<()> {
    writeln!(out, "p edge {} {}", g.num_vertices(), g.num_edges())?;
    for (u, v) in g.edges() {
        writeln!(out, "e {} {}", u + 1, v + 1)?;
    }
    out.flush()
}

const CSR_MAGIC: &[u8; 4] = b"CSRG";
const CSR_VERSION: u8 = 1;

/// Binary cache: magic, version byte, `n` and `m` as little-endian u64,
/// `n + 1` row offsets as u64, then `2m` column indices as u32.
pub fn write_binary<W: Write>(g: &CsrGraph, mut out: W) -> io::Result<()> {
    out.write_all(CSR_MAGIC)?;
    out.write_all(&[CSR_VERSION])?;
    out.write_all(&(g.num_vertices() as u64).to_le_bytes())?;
    out.write_all(&(g.num_edges() as u64).to_le_bytes())?;
    for &off in &g.row_offsets {
        out.write_all(&(off as u64).to_le_bytes())?;
    }
    for &v in &g.col_indices {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()
}

pub fn read_binary<R: Read>(mut input: R) -> Result<CsrGraph> {
    let mut magic = [0u8; 5];
    input.read_exact(&mut magic)?;
    if &magic[..4] != CSR_MAGIC {
        return Err(Error::Format("bad CSRG magic".into()));
    }
    if magic[4] != CSR_VERSION {
        return Err(Error::Format(format!("unsupported CSRG version {}", magic[4])));
    }
    let n = read_u64(&mut input)? as usize;
    let m = read_u64(&mut input)? as usize;
    let mut row_offsets = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        row_offsets.push(read_u64(&mut input)? as usize);
    }
    let mut col_indices = Vec::with_capacity(2 * m);
    let mut buf = [0u8; 4];
    for _ in 0..2 * m {
        input.read_exact(&mut buf)?;
        col_indices.push(u32::from_le_bytes(buf));
    }
    CsrGraph::from_csr(row_offsets, col_indices)
}

fn read_u64<R: Read>(input: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

/// Loads a graph, picking the parser from the file extension: `.col` is
/// DIMACS, `.csrg` the binary cache, anything else an edge list.
pub fn load_graph(path: impl AsRef<Path>) -> Result<CsrGraph> {
    let path = path.as_ref();
    let file = File::open(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("col") => parse_dimacs(BufReader::new(file)),
        Some("csrg") => read_binary(BufReader::new(file)),
        _ => parse_edge_list(BufReader::new(file)),
    }
}

pub fn save_graph(g: &CsrGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let out = BufWriter::new(File::create(path)?);
    match path.extension().and_then(|e| e.to_str()) {
        Some("col") => write_dimacs(g, out)?,
        Some("csrg") => write_binary(g, out)?,
        _ => write_edge_list(g, out)?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge_list(s: &str) -> CsrGraph {
        parse_edge_list(s.as_bytes()).unwrap()
    }

    fn dimacs(s: &str) -> Result<CsrGraph> {
        parse_dimacs(s.as_bytes())
    }

    #[test]
    fn path_p3() {
        let g = edge_list("0 1\n1 2");
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.num_edges(), 2);
        assert_eq!(g.neighbors(1), &[0, 2]);
    }

    #[test]
    fn self_loop_dropped_and_ids_compacted() {
        let g = edge_list("5 5\n5 6");
        assert_eq!(g.num_vertices(), 2);
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.neighbors(0), &[1]);
    }

    #[test]
    fn duplicates_merged() {
        let g = edge_list("0 1\n1 0\n0 1");
        assert_eq!((g.num_vertices(), g.num_edges()), (2, 1));
    }

    #[test]
    fn compaction_is_by_numeric_order() {
        let a = edge_list("# comment\n30 10\n20 10\n");
        let b = edge_list("10 20\n10 30\n");
        assert_eq!(a, b);
        assert_eq!(a.neighbors(0), &[1, 2]);
    }

    #[test]
    fn edge_list_errors() {
        let err = parse_edge_list("0 1\n1 x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_edge_list("0 1\n-1 2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_edge_list("7\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn dimacs_triangle() {
        let g = dimacs("c triangle\np edge 3 3\ne 1 2\ne 2 3\ne 1 3\n").unwrap();
        assert_eq!(g.num_edges(), 3);
        assert!((0..3).all(|u| g.degree(u) == 2));
    }

    #[test]
    fn dimacs_keeps_declared_vertices() {
        let g = dimacs("p edge 4 2\ne 1 2\ne 3 4\n").unwrap();
        assert_eq!((g.num_vertices(), g.num_edges()), (4, 2));
        let g = dimacs("p edge 5 1\ne 1 2\n").unwrap();
        assert_eq!(g.degree(4), 0);
    }

    #[test]
    fn dimacs_errors() {
        assert!(matches!(
            dimacs("p edge 2 1\ne 1 3\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            dimacs("e 1 2\np edge 2 1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(dimacs("c nothing\n"), Err(Error::Parse { .. })));
        assert!(matches!(dimacs("p edge 2 1\ne 0 1\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn degrees() {
        let k3 = CsrGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]);
        assert_eq!(k3.degree(0), 2);
        let star = CsrGraph::from_edges(6, [(0, 1), (0, 2), (0, 3), (0, 4)]);
        assert_eq!(star.degree(0), 4);
        assert_eq!(star.degree(5), 0);
        assert_eq!(star.max_degree(), 4);
    }

    #[test]
    #[should_panic]
    fn degree_out_of_range() {
        CsrGraph::from_edges(2, [(0, 1)]).degree(2);
    }

    #[test]
    fn from_csr_rejects_asymmetry() {
        assert!(CsrGraph::from_csr(vec![0, 1, 1], vec![1]).is_err());
        assert!(CsrGraph::from_csr(vec![0, 1, 2], vec![1, 0]).is_ok());
        assert!(CsrGraph::from_csr(vec![0, 2, 2], vec![0, 0]).is_err());
    }

    #[test]
    fn binary_rejects_bad_magic() {
        let mut bytes = Vec::new();
        write_binary(&CsrGraph::from_edges(2, [(0, 1)]), &mut bytes).unwrap();
        assert!(read_binary(bytes.as_slice()).is_ok());
        bytes[0] = b'X';
        assert!(read_binary(bytes.as_slice()).is_err());
    }

    #[test]
    fn empty_graph() {
        let g = edge_list("# nothing here\n");
        assert_eq!(g.num_vertices(), 0);
        assert_eq!(g.max_degree(), 0);
        g.check().unwrap();
    }
}
