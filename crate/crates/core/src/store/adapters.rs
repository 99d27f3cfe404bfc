//! Misbehaving store adapters for exercising the driver's abort rules.

use std::time::Duration;

use crate::dataset::Batch;
use crate::model::{Triple, TriplePattern};

use super::{LoadOutcome, StoreError, StoreMetricsSnapshot, TripleStore};

/// Wraps a store so that loading a batch stalls for a fixed duration per
/// triple, simulating a uniformly slow store. The stall is applied as
/// one sleep of `delay × batch size`.
pub struct SlowStore<S> {
    inner: S,
    delay_per_triple: Duration,
}

impl<S: TripleStore> SlowStore<S> {
    pub fn new(inner: S, delay_per_triple: Duration) -> Self {
        SlowStore {
            inner,
            delay_per_triple,
        }
    }
}

impl<S: TripleStore> TripleStore for SlowStore<S> {
    fn load_batch(&mut self, batch: &Batch) -> Result<LoadOutcome, StoreError> {
        let stall = self.delay_per_triple.saturating_mul(batch.len() as u32);
        if !stall.is_zero() {
            std::thread::sleep(stall);
        }
        self.inner.load_batch(batch)
    }

    fn match_pattern<'a>(
        &'a self,
        pattern: &TriplePattern,
    ) -> Box<dyn Iterator<Item = Result<Triple, StoreError>> + 'a> {
        self.inner.match_pattern(pattern)
    }

    fn snapshot_metrics(&self) -> Result<StoreMetricsSnapshot, StoreError> {
        self.inner.snapshot_metrics()
    }

    fn finish(&mut self) -> Result<(), StoreError> {
        self.inner.finish()
    }
}

/// Wraps a store so that it fails fatally once the configured number of
/// insertions has been reached, simulating a crash (e.g. out of
/// memory). The batch that would cross the limit is not loaded.
pub struct CrashingStore<S> {
    inner: S,
    crash_after: u64,
    processed: u64,
}

impl<S: TripleStore> CrashingStore<S> {
    pub fn new(inner: S, crash_after: u64) -> Self {
        CrashingStore {
            inner,
            crash_after,
            processed: 0,
        }
    }
}

impl<S: TripleStore> TripleStore for CrashingStore<S> {
    fn load_batch(&mut self, batch: &Batch) -> Result<LoadOutcome, StoreError> {
        if self.processed + batch.len() as u64 > self.crash_after {
            return Err(StoreError::Crashed(format!(
                "injected crash after {} insertions",
                self.crash_after
            )));
        }
        let outcome = self.inner.load_batch(batch)?;
        self.processed += batch.len() as u64;
        Ok(outcome)
    }

    fn match_pattern<'a>(
        &'a self,
        pattern: &TriplePattern,
    ) -> Box<dyn Iterator<Item = Result<Triple, StoreError>> + 'a> {
        self.inner.match_pattern(pattern)
    }

    fn snapshot_metrics(&self) -> Result<StoreMetricsSnapshot, StoreError> {
        self.inner.snapshot_metrics()
    }

    fn finish(&mut self) -> Result<(), StoreError> {
        self.inner.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Term;
    use crate::store::MemoryStore;

    fn batch_of(n: usize, offset: usize) -> Batch {
        let triples = (0..n)
            .map(|i| {
                Triple::new(
                    Term::iri(format!("http://x/s{}", offset + i)).unwrap(),
                    Term::iri("http://x/p").unwrap(),
                    Term::iri(format!("http://x/o{}", offset + i)).unwrap(),
                )
                .unwrap()
            })
            .collect();
        Batch::new(0, triples)
    }

    #[test]
    fn slow_store_with_zero_delay_behaves_like_its_inner_store() {
        let mut slow = SlowStore::new(MemoryStore::new(), Duration::ZERO);
        let outcome = slow.load_batch(&batch_of(10, 0)).unwrap();
        assert_eq!(outcome.inserted, 10);
        let again = slow.load_batch(&batch_of(10, 0)).unwrap();
        assert_eq!(again.duplicates, 10);
        assert_eq!(slow.snapshot_metrics().unwrap().triple_count, 10);
    }

    #[test]
    fn crashing_store_fails_at_the_limit() {
        let mut crashing = CrashingStore::new(MemoryStore::new(), 15);
        assert!(crashing.load_batch(&batch_of(10, 0)).is_ok());
        let err = crashing.load_batch(&batch_of(10, 10)).unwrap_err();
        assert!(matches!(err, StoreError::Crashed(_)));
    }
}
