//! Exact distinct counting over term ids, with an optional spill-to-disk
//! sort-unique fallback for memory-constrained runs.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::PathBuf;

use tempfile::TempDir;

pub(crate) struct DistinctCounter {
    seen: HashSet<u64>,
    max_in_memory: usize,
    spill: Option<Spill>,
}

struct Spill {
    dir: TempDir,
    chunks: Vec<PathBuf>,
}

impl DistinctCounter {
    /// Unbounded in-memory counting.
    pub fn new() -> Self {
        Self::with_limit(usize::MAX)
    }

    /// Spills sorted id chunks to a temporary directory whenever the
    /// in-memory set reaches `max_in_memory`.
    pub fn with_limit(max_in_memory: usize) -> Self {
        DistinctCounter {
            seen: HashSet::new(),
            max_in_memory: max_in_memory.max(1),
            spill: None,
        }
    }

    pub fn insert(&mut self, id: u64) -> io::Result<()> {
        self.seen.insert(id);
        if self.seen.len() >= self.max_in_memory {
            self.spill_chunk()?;
        }
        Ok(())
    }

    fn spill_chunk(&mut self) -> io::Result<()> {
        if self.seen.is_empty() {
            return Ok(());
        }
        if self.spill.is_none() {
            self.spill = Some(Spill {
                dir: TempDir::with_prefix("rdfload-distinct-")?,
                chunks: Vec::new(),
            });
        }
        let spill = self.spill.as_mut().expect("just initialized");
        let path = spill.dir.path().join(format!("chunk-{:06}", spill.chunks.len()));
        let mut ids: Vec<u64> = self.seen.drain().collect();
        ids.sort_unstable();
        let mut out = BufWriter::new(File::create(&path)?);
        for id in ids {
            out.write_all(&id.to_le_bytes())?;
        }
        out.flush()?;
        spill.chunks.push(path);
        Ok(())
    }

    pub fn finish(mut self) -> io::Result<u64> {
        if self.spill.is_none() {
            return Ok(self.seen.len() as u64);
        }
        self.spill_chunk()?;
        let spill = self.spill.take().expect("spilled");
        let mut heads: Vec<(Option<u64>, ChunkReader)> = Vec::with_capacity(spill.chunks.len());
        for path in &spill.chunks {
            let mut reader = ChunkReader::open(path)?;
            let head = reader.next_id()?;
            heads.push((head, reader));
        }
        let mut count = 0u64;
        loop {
            let Some(min) = heads.iter().filter_map(|(h, _)| *h).min() else {
                break;
            };
            count += 1;
            for (head, reader) in &mut heads {
                while *head == Some(min) {
                    *head = reader.next_id()?;
                }
            }
        }
        Ok(count)
    }
}

struct ChunkReader {
    reader: BufReader<File>,
}

impl ChunkReader {
    fn open(path: &PathBuf) -> io::Result<Self> {
        Ok(ChunkReader {
            reader: BufReader::new(File::open(path)?),
        })
    }

    fn next_id(&mut self) -> io::Result<Option<u64>> {
        let mut buf = [0u8; 8];
        match self.reader.read_exact(&mut buf) {
            Ok(()) => Ok(Some(u64::from_le_bytes(buf))),
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => Ok(None),
            Err(e) => Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn in_memory_counts_distinct() {
        let mut counter = DistinctCounter::new();
        for id in [1u64, 2, 2, 3, 1, 4] {
            counter.insert(id).unwrap();
        }
        assert_eq!(counter.finish().unwrap(), 4);
    }

    #[test]
    fn spilled_counts_match_in_memory() {
        let ids: Vec<u64> = (0..1000).map(|i| (i * 7919) % 97).collect();
        let expected = {
            let mut c = DistinctCounter::new();
            for &id in &ids {
                c.insert(id).unwrap();
            }
            c.finish().unwrap()
        };
        let mut spilled = DistinctCounter::with_limit(8);
        for &id in &ids {
            spilled.insert(id).unwrap();
        }
        assert_eq!(spilled.finish().unwrap(), expected);
        assert_eq!(expected, 97);
    }
}
