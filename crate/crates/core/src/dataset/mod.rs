//! Dataset preparation: batch splitting, statistics, and synthetic
//! generation.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{Term, Triple};
use crate::ntriples::{line_byte_length, write_triple_line, NtParser};
use crate::store::{TermDictionary, TermId};

mod distinct;
mod synth;

use distinct::DistinctCounter;
pub use synth::{generate_synthetic, ObjectCardinality, Regularity, SynthProfile};

pub const DEFAULT_BATCH_SIZE: usize = 50_000;

/// An ordered group of triples: the unit of loading and measurement.
/// Batches emitted by [`split_batches`] all hold exactly the configured
/// batch size; short remainders are discarded, never written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    index: u64,
    triples: Vec<Triple>,
}

impl Batch {
    pub fn new(index: u64, triples: Vec<Triple>) -> Self {
        Batch { index, triples }
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }
}

pub fn batch_file_name(index: u64) -> String {
    format!("batch-{index:06}.nt")
}

/// The batch files of `dir` in loading order (zero-padded names sort
/// lexicographically).
pub fn list_batch_files(dir: &Path) -> Result<Vec<PathBuf>, Error> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::file(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|ext| ext == "nt")
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("batch-"))
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Reads one batch file in strict mode.
pub fn read_batch(path: &Path, index: u64) -> Result<Batch, Error> {
    let file = File::open(path).map_err(|e| Error::file(path, e))?;
    let triples = NtParser::new(BufReader::new(file))
        .map(|r| r.map(|(_, t)| t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Batch::new(index, triples))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitOutcome {
    pub batch_files: Vec<PathBuf>,
    pub discarded: u64,
}

/// Splits an N-Triples file into canonical batch files of exactly
/// `batch_size` triples each, named `batch-%06d.nt` in source order.
/// The remainder that cannot fill a final batch is counted and
/// discarded. Parsing is strict; on any error the files created by this
/// call are removed.
pub fn split_batches(
    input: &Path,
    batch_size: usize,
    out_dir: &Path,
) -> Result<SplitOutcome, Error> {
    if batch_size == 0 {
        return Err(Error::config("batch size must be at least 1"));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::file(out_dir, e))?;
    let mut created: Vec<PathBuf> = Vec::new();
    match split_inner(input, batch_size, out_dir, &mut created) {
        Ok(outcome) => {
            if outcome.batch_files.is_empty() && outcome.discarded > 0 {
                log::warn!(
                    "{}: only {} triples, shorter than one batch of {batch_size}; nothing was written",
                    input.display(),
                    outcome.discarded
                );
            }
            Ok(outcome)
        }
        Err(e) => {
            for path in created {
                let _ = fs::remove_file(path);
            }
            Err(e)
        }
    }
}

fn split_inner(
    input: &Path,
    batch_size: usize,
    out_dir: &Path,
    created: &mut Vec<PathBuf>,
) -> Result<SplitOutcome, Error> {
    let file = File::open(input).map_err(|e| Error::file(input, e))?;
    let mut parser = NtParser::new(BufReader::new(file));

    let mut buffer = String::new();
    let mut in_buffer = 0usize;
    let mut next_index = 0u64;
    let mut line = String::new();

    for item in parser.by_ref() {
        let (_, triple) = item?;
        line.clear();
        write_triple_line(&mut line, &triple).expect("writing to a String cannot fail");
        buffer.push_str(&line);
        in_buffer += 1;
        if in_buffer == batch_size {
            let path = out_dir.join(batch_file_name(next_index));
            write_atomically(&path, buffer.as_bytes())?;
            created.push(path);
            buffer.clear();
            in_buffer = 0;
            next_index += 1;
        }
    }

    Ok(SplitOutcome {
        batch_files: created.clone(),
        discarded: in_buffer as u64,
    })
}

fn write_atomically(path: &Path, contents: &[u8]) -> Result<(), Error> {
    let tmp = path.with_extension("nt.tmp");
    fs::write(&tmp, contents).map_err(|e| Error::file(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::file(path, e))?;
    Ok(())
}

/// Table-style dataset statistics: statement count (with multiplicity),
/// exact distinct term counts per position, mean bytes per triple in
/// the canonical encoding (newline included), and the structural
/// distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub triples: u64,
    pub subjects: u64,
    pub predicates: u64,
    pub objects: u64,
    pub mean_bpt: f64,
    /// subject degree (statements per subject) → number of subjects
    pub subject_degree_histogram: BTreeMap<u64, u64>,
    /// predicate IRI → number of statements
    pub predicate_frequency: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StatsOptions {
    /// When set, distinct-id sets spill to disk past this many entries
    /// instead of growing in memory.
    pub spill_threshold: Option<usize>,
}

/// Streaming accumulator behind [`compute_stats`]; also fed directly by
/// the synthetic generator so returned stats always agree with a
/// re-scan of the emitted file.
pub struct StatsBuilder {
    dict: TermDictionary,
    subjects: DistinctCounter,
    predicates: DistinctCounter,
    objects: DistinctCounter,
    subject_degrees: HashMap<u64, u64>,
    predicate_counts: HashMap<u64, u64>,
    total_bytes: u64,
    triples: u64,
}

impl StatsBuilder {
    pub fn new(options: StatsOptions) -> Self {
        let counter = || match options.spill_threshold {
            Some(limit) => DistinctCounter::with_limit(limit),
            None => DistinctCounter::new(),
        };
        StatsBuilder {
            dict: TermDictionary::new(),
            subjects: counter(),
            predicates: counter(),
            objects: counter(),
            subject_degrees: HashMap::new(),
            predicate_counts: HashMap::new(),
            total_bytes: 0,
            triples: 0,
        }
    }

    pub fn observe(&mut self, triple: &Triple) -> Result<(), Error> {
        let s = self.dict.intern(triple.subject()).as_u64();
        let p = self.dict.intern(triple.predicate()).as_u64();
        let o = self.dict.intern(triple.object()).as_u64();
        self.subjects.insert(s)?;
        self.predicates.insert(p)?;
        self.objects.insert(o)?;
        *self.subject_degrees.entry(s).or_insert(0) += 1;
        *self.predicate_counts.entry(p).or_insert(0) += 1;
        self.total_bytes += line_byte_length(triple) as u64;
        self.triples += 1;
        Ok(())
    }

    pub fn finish(self) -> Result<DatasetStats, Error> {
        let mut histogram: BTreeMap<u64, u64> = BTreeMap::new();
        for degree in self.subject_degrees.values() {
            *histogram.entry(*degree).or_insert(0) += 1;
        }
        let mut predicate_frequency = BTreeMap::new();
        for (id, count) in &self.predicate_counts {
            let term = self
                .dict
                .term(TermId::from_u64(*id))
                .expect("interned id resolves");
            let label = match term {
                Term::Iri(iri) => iri.clone(),
                other => unreachable!("predicates are IRIs, found {other:?}"),
            };
            predicate_frequency.insert(label, *count);
        }
        let mean_bpt = if self.triples == 0 {
            0.0
        } else {
            self.total_bytes as f64 / self.triples as f64
        };
        Ok(DatasetStats {
            triples: self.triples,
            subjects: self.subjects.finish()?,
            predicates: self.predicates.finish()?,
            objects: self.objects.finish()?,
            mean_bpt,
            subject_degree_histogram: histogram,
            predicate_frequency,
        })
    }
}

/// Computes [`DatasetStats`] in one strict streaming pass.
pub fn compute_stats(input: &Path) -> Result<DatasetStats, Error> {
    compute_stats_with(input, StatsOptions::default())
}

pub fn compute_stats_with(input: &Path, options: StatsOptions) -> Result<DatasetStats, Error> {
    let file = File::open(input).map_err(|e| Error::file(input, e))?;
    let mut builder = StatsBuilder::new(options);
    for item in NtParser::new(BufReader::new(file)) {
        let (_, triple) = item?;
        builder.observe(&triple)?;
    }
    builder.finish()
}

/// Writes triples to `path` in canonical form, through a temp file.
pub(crate) fn write_ntriples_atomically<'a>(
    path: &Path,
    triples: impl Iterator<Item = &'a Triple>,
) -> Result<(), Error> {
    let tmp = path.with_extension("tmp");
    let mut out = BufWriter::new(File::create(&tmp).map_err(|e| Error::file(&tmp, e))?);
    let mut line = String::new();
    for triple in triples {
        line.clear();
        write_triple_line(&mut line, triple).expect("writing to a String cannot fail");
        out.write_all(line.as_bytes()).map_err(|e| Error::file(&tmp, e))?;
    }
    out.flush().map_err(|e| Error::file(&tmp, e))?;
    drop(out);
    fs::rename(&tmp, path).map_err(|e| Error::file(path, e))?;
    Ok(())
}
