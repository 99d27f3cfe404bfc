//! Disk-backed reference store.
//!
//! Triples are dictionary-encoded and buffered in three ordered
//! in-memory sets (SPO, POS, OSP). When a buffer reaches the flush
//! threshold, each ordering is written out as a sorted, immutable run
//! file; runs of the same level are merged four at a time into the next
//! level. Duplicate detection consults both the buffer and the on-disk
//! runs before every insert, so set semantics hold across flushes.
//!
//! The on-disk layout is internal and versioned: every file starts with
//! a magic header and directories whose manifest does not match are
//! rejected. There is no crash recovery beyond write-temp-then-rename
//! atomicity for runs and the manifest; the dictionary file is an
//! append-only log whose durable prefix length is recorded in the
//! manifest.

use std::collections::BTreeSet;
use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use memmap2::Mmap;
use serde::{Deserialize, Serialize};

use crate::dataset::Batch;
use crate::model::{Triple, TriplePattern};

use super::dictionary::TermDictionary;
use super::index::{IdPattern, IndexKind};
use super::memory::decode_triple;
use super::{dir_size, LoadOutcome, StoreError, StoreMetricsSnapshot, TripleStore};

const MANIFEST_MAGIC: &[u8; 8] = b"RDFLSTR1";
const RUN_MAGIC: &[u8; 8] = b"RDFLRUN1";
const DICT_MAGIC: &[u8; 8] = b"RDFLDIC1";
const MANIFEST_FILE: &str = "manifest.bin";
const DICT_FILE: &str = "dict.bin";
const FORMAT_VERSION: u32 = 1;

const RUN_HEADER_LEN: usize = 24;
const RECORD_LEN: usize = 24;
const MERGE_FANOUT: usize = 4;

#[derive(Serialize, Deserialize)]
struct Manifest {
    version: u32,
    flush_threshold: u64,
    triple_count: u64,
    dict_terms: u64,
    dict_bytes: u64,
    next_run_id: u64,
    merge_work: u64,
    runs: Vec<ManifestRun>,
}

#[derive(Serialize, Deserialize)]
struct ManifestRun {
    file: String,
    kind: String,
    records: u64,
    level: u32,
}

/// One immutable sorted run file, mapped read-only.
struct Run {
    path: PathBuf,
    map: Mmap,
    records: u64,
    level: u32,
}

impl Run {
    fn open(path: &Path, kind: IndexKind, level: u32) -> Result<Run, StoreError> {
        let file = File::open(path)?;
        let map = unsafe { Mmap::map(&file)? };
        let incompatible = |reason: &str| StoreError::IncompatibleFormat {
            path: path.to_owned(),
            reason: reason.to_owned(),
        };
        if map.len() < RUN_HEADER_LEN || &map[..8] != RUN_MAGIC {
            return Err(incompatible("bad run file magic"));
        }
        if map[8] != kind_byte(kind) {
            return Err(incompatible("run file holds a different index ordering"));
        }
        let records = u64::from_le_bytes(map[16..24].try_into().expect("8 bytes"));
        let expected = RUN_HEADER_LEN as u64 + records * RECORD_LEN as u64;
        if map.len() as u64 != expected {
            return Err(incompatible("run file length does not match its header"));
        }
        Ok(Run {
            path: path.to_owned(),
            map,
            records,
            level,
        })
    }

    fn record(&self, i: u64) -> [u64; 3] {
        let off = RUN_HEADER_LEN + i as usize * RECORD_LEN;
        let bytes = &self.map[off..off + RECORD_LEN];
        [
            u64::from_le_bytes(bytes[0..8].try_into().expect("8 bytes")),
            u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")),
            u64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes")),
        ]
    }

    /// Index of the first record `>= key`.
    fn lower_bound(&self, key: [u64; 3]) -> u64 {
        let mut lo = 0u64;
        let mut hi = self.records;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.record(mid) < key {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    fn contains(&self, key: [u64; 3]) -> bool {
        let i = self.lower_bound(key);
        i < self.records && self.record(i) == key
    }

    fn range(&self, lo: [u64; 3], hi: [u64; 3]) -> impl Iterator<Item = [u64; 3]> + '_ {
        let start = self.lower_bound(lo);
        (start..self.records)
            .map(move |i| self.record(i))
            .take_while(move |&k| k <= hi)
    }

    fn iter(&self) -> impl Iterator<Item = [u64; 3]> + '_ {
        (0..self.records).map(move |i| self.record(i))
    }
}

fn kind_byte(kind: IndexKind) -> u8 {
    match kind {
        IndexKind::Spo => 0,
        IndexKind::Pos => 1,
        IndexKind::Osp => 2,
    }
}

fn kind_index(kind: IndexKind) -> usize {
    kind_byte(kind) as usize
}

pub struct DiskStore {
    dir: PathBuf,
    flush_threshold: u64,
    dict: TermDictionary,
    durable_terms: usize,
    buffers: [BTreeSet<[u64; 3]>; 3],
    runs: [Vec<Run>; 3],
    triple_count: u64,
    merge_work: u64,
    next_run_id: u64,
    dirty: bool,
}

impl DiskStore {
    /// Opens the store in `dir`, creating the directory when absent.
    /// A directory containing data from a different format version (or
    /// arbitrary other files) is rejected.
    pub fn open(dir: &Path, flush_threshold: u64) -> Result<DiskStore, StoreError> {
        fs::create_dir_all(dir)?;
        let manifest_path = dir.join(MANIFEST_FILE);
        if !manifest_path.exists() {
            if fs::read_dir(dir)?.next().is_some() {
                return Err(StoreError::IncompatibleFormat {
                    path: dir.to_owned(),
                    reason: "directory is not empty and holds no store manifest".to_owned(),
                });
            }
            return Ok(DiskStore {
                dir: dir.to_owned(),
                flush_threshold: flush_threshold.max(1),
                dict: TermDictionary::new(),
                durable_terms: 0,
                buffers: Default::default(),
                runs: Default::default(),
                triple_count: 0,
                merge_work: 0,
                next_run_id: 0,
                dirty: false,
            });
        }

        let bytes = fs::read(&manifest_path)?;
        let incompatible = |reason: String| StoreError::IncompatibleFormat {
            path: dir.to_owned(),
            reason,
        };
        if bytes.len() < 8 || &bytes[..8] != MANIFEST_MAGIC {
            return Err(incompatible("bad manifest magic".to_owned()));
        }
        let manifest: Manifest = serde_json::from_slice(&bytes[8..])
            .map_err(|e| incompatible(format!("unreadable manifest: {e}")))?;
        if manifest.version != FORMAT_VERSION {
            return Err(incompatible(format!(
                "format version {} is not supported",
                manifest.version
            )));
        }

        let dict = read_dictionary(&dir.join(DICT_FILE), &manifest)?;
        let mut runs: [Vec<Run>; 3] = Default::default();
        for entry in &manifest.runs {
            let kind = match entry.kind.as_str() {
                "spo" => IndexKind::Spo,
                "pos" => IndexKind::Pos,
                "osp" => IndexKind::Osp,
                other => return Err(incompatible(format!("unknown index ordering {other:?}"))),
            };
            let run = Run::open(&dir.join(&entry.file), kind, entry.level)?;
            if run.records != entry.records {
                return Err(incompatible(format!(
                    "run {} record count mismatch",
                    entry.file
                )));
            }
            runs[kind_index(kind)].push(run);
        }

        let store = DiskStore {
            dir: dir.to_owned(),
            flush_threshold: flush_threshold.max(1),
            dict,
            durable_terms: manifest.dict_terms as usize,
            buffers: Default::default(),
            runs,
            triple_count: manifest.triple_count,
            merge_work: manifest.merge_work,
            next_run_id: manifest.next_run_id,
            dirty: false,
        };
        store.remove_orphan_files()?;
        Ok(store)
    }

    /// Cumulative number of records written by run merges. Grows
    /// monotonically with store size.
    pub fn merge_work(&self) -> u64 {
        self.merge_work
    }

    /// `(ordering, level, records)` for every live run; test hook for
    /// the merge schedule.
    pub fn run_shape(&self) -> Vec<(IndexKind, u32, u64)> {
        let mut shape = Vec::new();
        for kind in IndexKind::ALL {
            for run in &self.runs[kind_index(kind)] {
                shape.push((kind, run.level, run.records));
            }
        }
        shape
    }

    pub fn len(&self) -> u64 {
        self.triple_count
    }

    pub fn is_empty(&self) -> bool {
        self.triple_count == 0
    }

    pub fn insert(&mut self, triple: &Triple) -> Result<bool, StoreError> {
        let spo = [
            self.dict.intern(triple.subject()).as_u64(),
            self.dict.intern(triple.predicate()).as_u64(),
            self.dict.intern(triple.object()).as_u64(),
        ];
        if self.contains_ids(spo) {
            return Ok(false);
        }
        for kind in IndexKind::ALL {
            self.buffers[kind_index(kind)].insert(kind.to_key(spo));
        }
        self.triple_count += 1;
        self.dirty = true;
        if self.buffers[0].len() as u64 >= self.flush_threshold {
            self.flush()?;
        }
        Ok(true)
    }

    fn contains_ids(&self, spo: [u64; 3]) -> bool {
        if self.buffers[0].contains(&spo) {
            return true;
        }
        self.runs[0].iter().any(|run| run.contains(spo))
    }

    /// Writes buffered triples out as level-0 runs, merges full levels,
    /// and commits the manifest.
    pub fn flush(&mut self) -> Result<(), StoreError> {
        if !self.buffers[0].is_empty() {
            self.append_dictionary()?;
            for kind in IndexKind::ALL {
                let buffer = std::mem::take(&mut self.buffers[kind_index(kind)]);
                let records = buffer.len() as u64;
                let run = self.write_run(kind, 0, buffer.into_iter(), records)?;
                self.runs[kind_index(kind)].push(run);
            }
            self.merge_full_levels()?;
            self.dirty = false;
        }
        self.write_manifest()
    }

    fn append_dictionary(&mut self) -> Result<(), StoreError> {
        if self.dict.len() == self.durable_terms {
            return Ok(());
        }
        let path = self.dir.join(DICT_FILE);
        let mut file = if path.exists() {
            OpenOptions::new().append(true).open(&path)?
        } else {
            let mut f = File::create(&path)?;
            f.write_all(DICT_MAGIC)?;
            f
        };
        let mut out = BufWriter::new(&mut file);
        self.dict.write_range(self.durable_terms, &mut out)?;
        out.flush()?;
        drop(out);
        file.sync_all()?;
        self.durable_terms = self.dict.len();
        Ok(())
    }

    fn write_run(
        &mut self,
        kind: IndexKind,
        level: u32,
        keys: impl Iterator<Item = [u64; 3]>,
        count_hint: u64,
    ) -> Result<Run, StoreError> {
        let id = self.next_run_id;
        self.next_run_id += 1;
        let name = format!("run-{id:06}-{}.idx", kind.label());
        let tmp = self.dir.join(format!("{name}.tmp"));
        let path = self.dir.join(&name);

        let mut file = File::create(&tmp)?;
        {
            let mut out = BufWriter::new(&mut file);
            out.write_all(RUN_MAGIC)?;
            out.write_all(&[kind_byte(kind), 0, 0, 0, 0, 0, 0, 0])?;
            out.write_all(&count_hint.to_le_bytes())?;
            let mut written = 0u64;
            for key in keys {
                for part in key {
                    out.write_all(&part.to_le_bytes())?;
                }
                written += 1;
            }
            out.flush()?;
            drop(out);
            if written != count_hint {
                file.seek(SeekFrom::Start(16))?;
                file.write_all(&written.to_le_bytes())?;
            }
        }
        file.sync_all()?;
        drop(file);
        fs::rename(&tmp, &path)?;
        Run::open(&path, kind, level)
    }

    fn merge_full_levels(&mut self) -> Result<(), StoreError> {
        for kind in IndexKind::ALL {
            loop {
                let slot = kind_index(kind);
                let Some(level) = lowest_full_level(&self.runs[slot]) else {
                    break;
                };
                let mut inputs = Vec::with_capacity(MERGE_FANOUT);
                let mut i = 0;
                while i < self.runs[slot].len() && inputs.len() < MERGE_FANOUT {
                    if self.runs[slot][i].level == level {
                        inputs.push(self.runs[slot].remove(i));
                    } else {
                        i += 1;
                    }
                }
                let total: u64 = inputs.iter().map(|r| r.records).sum();
                let merged = {
                    let sources: Vec<_> = inputs.iter().map(|r| r.iter()).collect();
                    self.write_run(kind, level + 1, KWayMerge::new(sources), total)?
                };
                self.merge_work += merged.records;
                for old in inputs {
                    fs::remove_file(&old.path)?;
                }
                self.runs[slot].push(merged);
            }
        }
        Ok(())
    }

    fn write_manifest(&self) -> Result<(), StoreError> {
        let dict_bytes = match fs::metadata(self.dir.join(DICT_FILE)) {
            Ok(meta) => meta.len(),
            Err(_) => 0,
        };
        let mut runs = Vec::new();
        for kind in IndexKind::ALL {
            for run in &self.runs[kind_index(kind)] {
                runs.push(ManifestRun {
                    file: run
                        .path
                        .file_name()
                        .expect("run files have names")
                        .to_string_lossy()
                        .into_owned(),
                    kind: kind.label().to_owned(),
                    records: run.records,
                    level: run.level,
                });
            }
        }
        let manifest = Manifest {
            version: FORMAT_VERSION,
            flush_threshold: self.flush_threshold,
            triple_count: self.triple_count,
            dict_terms: self.durable_terms as u64,
            dict_bytes,
            next_run_id: self.next_run_id,
            merge_work: self.merge_work,
            runs,
        };
        let tmp = self.dir.join(format!("{MANIFEST_FILE}.tmp"));
        let mut file = File::create(&tmp)?;
        file.write_all(MANIFEST_MAGIC)?;
        file.write_all(&serde_json::to_vec(&manifest).expect("manifest serializes"))?;
        file.sync_all()?;
        drop(file);
        fs::rename(&tmp, self.dir.join(MANIFEST_FILE))?;
        Ok(())
    }

    fn remove_orphan_files(&self) -> Result<(), StoreError> {
        let live: BTreeSet<PathBuf> = self
            .runs
            .iter()
            .flatten()
            .map(|r| r.path.clone())
            .chain([self.dir.join(MANIFEST_FILE), self.dir.join(DICT_FILE)])
            .collect();
        for entry in fs::read_dir(&self.dir)? {
            let path = entry?.path();
            if path.is_file() && !live.contains(&path) {
                fs::remove_file(&path)?;
            }
        }
        Ok(())
    }

    /// Like [`MemoryStore::scan_index`]: answers a pattern from one
    /// forced ordering by scan-and-filter, for index agreement checks.
    pub fn scan_index(
        &self,
        kind: IndexKind,
        pattern: &TriplePattern,
    ) -> Result<Vec<Triple>, StoreError> {
        let Some(ids) = IdPattern::resolve(pattern, &self.dict) else {
            return Ok(Vec::new());
        };
        let slot = kind_index(kind);
        let mut out = Vec::new();
        let keys = self.buffers[slot]
            .iter()
            .copied()
            .chain(self.runs[slot].iter().flat_map(|r| r.iter()));
        for key in keys {
            let spo = kind.from_key(key);
            if ids.matches(spo) {
                out.push(decode_triple(&self.dict, spo)?);
            }
        }
        Ok(out)
    }
}

fn lowest_full_level(runs: &[Run]) -> Option<u32> {
    let mut levels: Vec<u32> = runs.iter().map(|r| r.level).collect();
    levels.sort_unstable();
    let mut i = 0;
    while i < levels.len() {
        let level = levels[i];
        let same = levels[i..].iter().take_while(|&&l| l == level).count();
        if same >= MERGE_FANOUT {
            return Some(level);
        }
        i += same;
    }
    None
}

fn read_dictionary(path: &Path, manifest: &Manifest) -> Result<TermDictionary, StoreError> {
    if manifest.dict_terms == 0 {
        return Ok(TermDictionary::new());
    }
    let file = File::open(path)?;
    // The manifest records the durable prefix; bytes past it are debris
    // from an interrupted append.
    if file.metadata()?.len() > manifest.dict_bytes {
        file.set_len(manifest.dict_bytes)?;
    }
    let mut reader = BufReader::new(file);
    let mut magic = [0u8; 8];
    reader.read_exact(&mut magic)?;
    if &magic != DICT_MAGIC {
        return Err(StoreError::IncompatibleFormat {
            path: path.to_owned(),
            reason: "bad dictionary magic".to_owned(),
        });
    }
    TermDictionary::read_from(&mut reader, manifest.dict_terms)
}

/// Merges already-sorted key streams; equal keys collapse to one.
struct KWayMerge<I: Iterator<Item = [u64; 3]>> {
    heads: Vec<(Option<[u64; 3]>, I)>,
}

impl<I: Iterator<Item = [u64; 3]>> KWayMerge<I> {
    fn new(sources: Vec<I>) -> Self {
        let heads = sources
            .into_iter()
            .map(|mut it| (it.next(), it))
            .collect();
        KWayMerge { heads }
    }
}

impl<I: Iterator<Item = [u64; 3]>> Iterator for KWayMerge<I> {
    type Item = [u64; 3];

    fn next(&mut self) -> Option<Self::Item> {
        let min = self
            .heads
            .iter()
            .filter_map(|(head, _)| *head)
            .min()?;
        for (head, source) in &mut self.heads {
            while *head == Some(min) {
                *head = source.next();
            }
        }
        Some(min)
    }
}

impl TripleStore for DiskStore {
    fn load_batch(&mut self, batch: &Batch) -> Result<LoadOutcome, StoreError> {
        let mut outcome = LoadOutcome::default();
        for triple in batch.triples() {
            if self.insert(triple)? {
                outcome.inserted += 1;
            } else {
                outcome.duplicates += 1;
            }
        }
        Ok(outcome)
    }

    fn match_pattern<'a>(
        &'a self,
        pattern: &TriplePattern,
    ) -> Box<dyn Iterator<Item = Result<Triple, StoreError>> + 'a> {
        let Some(ids) = IdPattern::resolve(pattern, &self.dict) else {
            return Box::new(std::iter::empty());
        };
        let kind = ids.select_index();
        let (lo, hi) = ids.key_range(kind);
        let slot = kind_index(kind);
        let buffered = self.buffers[slot].range(lo..=hi).copied();
        let from_runs = self.runs[slot]
            .iter()
            .flat_map(move |run| run.range(lo, hi));
        Box::new(
            buffered
                .chain(from_runs)
                .map(move |key| decode_triple(&self.dict, kind.from_key(key))),
        )
    }

    fn snapshot_metrics(&self) -> Result<StoreMetricsSnapshot, StoreError> {
        Ok(StoreMetricsSnapshot {
            triple_count: self.triple_count,
            dictionary_size: self.dict.len() as u64,
            disk_bytes: dir_size(&self.dir)?,
        })
    }

    fn finish(&mut self) -> Result<(), StoreError> {
        self.flush()
    }
}

impl Drop for DiskStore {
    fn drop(&mut self) {
        if self.dirty {
            if let Err(e) = self.flush() {
                log::warn!("disk store flush on drop failed: {e}");
            }
        }
    }
}
