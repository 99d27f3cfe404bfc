//! Pure in-memory reference store: three ordered id-triple sets.

use std::collections::BTreeSet;

use crate::dataset::Batch;
use crate::model::{Triple, TriplePattern};

use super::dictionary::{TermDictionary, TermId};
use super::index::{IdPattern, IndexKind};
use super::{LoadOutcome, StoreError, StoreMetricsSnapshot, TripleStore};

#[derive(Debug, Default)]
pub struct MemoryStore {
    dict: TermDictionary,
    indexes: [BTreeSet<[u64; 3]>; 3],
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts one triple; returns false when it was already present.
    pub fn insert(&mut self, triple: &Triple) -> bool {
        let spo = [
            self.dict.intern(triple.subject()).as_u64(),
            self.dict.intern(triple.predicate()).as_u64(),
            self.dict.intern(triple.object()).as_u64(),
        ];
        let new = self.indexes[0].insert(IndexKind::Spo.to_key(spo));
        self.indexes[1].insert(IndexKind::Pos.to_key(spo));
        self.indexes[2].insert(IndexKind::Osp.to_key(spo));
        new
    }

    pub fn len(&self) -> u64 {
        self.indexes[0].len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.indexes[0].is_empty()
    }

    fn index(&self, kind: IndexKind) -> &BTreeSet<[u64; 3]> {
        match kind {
            IndexKind::Spo => &self.indexes[0],
            IndexKind::Pos => &self.indexes[1],
            IndexKind::Osp => &self.indexes[2],
        }
    }

    fn decode(&self, spo: [u64; 3]) -> Result<Triple, StoreError> {
        decode_triple(&self.dict, spo)
    }

    /// Answers `pattern` by fully scanning one specific index and
    /// filtering, regardless of which index the selection rule would
    /// pick. All three orderings must agree; tests rely on this to
    /// cross-check index contents.
    pub fn scan_index(&self, kind: IndexKind, pattern: &TriplePattern) -> Vec<Triple> {
        let Some(ids) = IdPattern::resolve(pattern, &self.dict) else {
            return Vec::new();
        };
        self.index(kind)
            .iter()
            .map(|&key| kind.from_key(key))
            .filter(|&spo| ids.matches(spo))
            .map(|spo| self.decode(spo).expect("memory ids are always valid"))
            .collect()
    }
}

pub(super) fn decode_triple(dict: &TermDictionary, spo: [u64; 3]) -> Result<Triple, StoreError> {
    let term = |id: u64| {
        dict.term(TermId::from_u64(id))
            .cloned()
            .ok_or_else(|| StoreError::corrupt(format!("unknown term id {id}")))
    };
    Triple::new(term(spo[0])?, term(spo[1])?, term(spo[2])?)
        .map_err(|e| StoreError::corrupt(format!("stored triple violates term rules: {e}")))
}

impl TripleStore for MemoryStore {
    fn load_batch(&mut self, batch: &Batch) -> Result<LoadOutcome, StoreError> {
        let mut outcome = LoadOutcome::default();
        for triple in batch.triples() {
            if self.insert(triple) {
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
        Box::new(
            self.index(kind)
                .range(lo..=hi)
                .map(move |&key| self.decode(kind.from_key(key))),
        )
    }

    fn snapshot_metrics(&self) -> Result<StoreMetricsSnapshot, StoreError> {
        Ok(StoreMetricsSnapshot {
            triple_count: self.len(),
            dictionary_size: self.dict.len() as u64,
            disk_bytes: 0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Term;

    fn triple(s: &str, p: &str, o: &str) -> Triple {
        Triple::new(
            Term::iri(format!("http://x/{s}")).unwrap(),
            Term::iri(format!("http://x/{p}")).unwrap(),
            Term::iri(format!("http://x/{o}")).unwrap(),
        )
        .unwrap()
    }

    fn collect(store: &MemoryStore, pattern: &TriplePattern) -> Vec<Triple> {
        store
            .match_pattern(pattern)
            .collect::<Result<Vec<_>, _>>()
            .unwrap()
    }

    #[test]
    fn empty_store_snapshot() {
        let store = MemoryStore::new();
        assert_eq!(
            store.snapshot_metrics().unwrap(),
            StoreMetricsSnapshot {
                triple_count: 0,
                dictionary_size: 0,
                disk_bytes: 0
            }
        );
    }

    #[test]
    fn set_semantics() {
        let mut store = MemoryStore::new();
        assert!(store.insert(&triple("s1", "p1", "o1")));
        assert!(!store.insert(&triple("s1", "p1", "o1")));
        assert!(store.insert(&triple("s1", "p2", "o2")));
        assert_eq!(store.len(), 2);
    }

    #[test]
    fn match_by_subject_and_by_predicate_object() {
        let mut store = MemoryStore::new();
        store.insert(&triple("s1", "p1", "o1"));
        store.insert(&triple("s1", "p2", "o2"));
        store.insert(&triple("s2", "p1", "o1"));

        let by_subject = collect(
            &store,
            &TriplePattern::any().with_subject(Term::iri("http://x/s1").unwrap()),
        );
        assert_eq!(by_subject.len(), 2);

        let by_po = collect(
            &store,
            &TriplePattern::any()
                .with_predicate(Term::iri("http://x/p1").unwrap())
                .with_object(Term::iri("http://x/o1").unwrap()),
        );
        assert_eq!(by_po.len(), 2);

        let fully_bound = collect(
            &store,
            &TriplePattern::any()
                .with_subject(Term::iri("http://x/s1").unwrap())
                .with_predicate(Term::iri("http://x/p1").unwrap())
                .with_object(Term::iri("http://x/o1").unwrap()),
        );
        assert_eq!(fully_bound, vec![triple("s1", "p1", "o1")]);
    }

    #[test]
    fn unknown_term_matches_nothing() {
        let mut store = MemoryStore::new();
        store.insert(&triple("s1", "p1", "o1"));
        let none = collect(
            &store,
            &TriplePattern::any().with_subject(Term::iri("http://x/absent").unwrap()),
        );
        assert!(none.is_empty());
    }
}
