//! Index orderings and the bound-prefix selection rule.

use super::dictionary::{TermDictionary, TermId};
use crate::model::TriplePattern;

/// The three sorted orderings the reference store maintains. Every
/// pattern of bound positions maps onto a contiguous key prefix in one
/// of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndexKind {
    Spo,
    Pos,
    Osp,
}

impl IndexKind {
    pub const ALL: [IndexKind; 3] = [IndexKind::Spo, IndexKind::Pos, IndexKind::Osp];

    pub fn label(self) -> &'static str {
        match self {
            IndexKind::Spo => "spo",
            IndexKind::Pos => "pos",
            IndexKind::Osp => "osp",
        }
    }

    /// Permutes an `(s, p, o)` id triple into this ordering's key.
    pub fn to_key(self, spo: [u64; 3]) -> [u64; 3] {
        let [s, p, o] = spo;
        match self {
            IndexKind::Spo => [s, p, o],
            IndexKind::Pos => [p, o, s],
            IndexKind::Osp => [o, s, p],
        }
    }

    /// Inverse of [`IndexKind::to_key`].
    pub fn from_key(self, key: [u64; 3]) -> [u64; 3] {
        let [a, b, c] = key;
        match self {
            IndexKind::Spo => [a, b, c],
            IndexKind::Pos => [c, a, b],
            IndexKind::Osp => [b, c, a],
        }
    }

    /// Selects the index serving a pattern: `(s,·,·)`/`(s,p,·)` → SPO,
    /// `(·,p,·)`/`(·,p,o)` → POS, `(·,·,o)`/`(s,·,o)` → OSP, fully bound
    /// → SPO, nothing bound → SPO full scan.
    pub fn select(s: bool, p: bool, o: bool) -> IndexKind {
        match (s, p, o) {
            (true, _, false) => IndexKind::Spo,
            (true, true, true) => IndexKind::Spo,
            (false, true, _) => IndexKind::Pos,
            (_, false, true) => IndexKind::Osp,
            (false, false, false) => IndexKind::Spo,
        }
    }
}

/// A pattern resolved to dictionary ids. `None` in a position means
/// unbound.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdPattern {
    pub s: Option<u64>,
    pub p: Option<u64>,
    pub o: Option<u64>,
}

impl IdPattern {
    /// Resolves a term-level pattern against a dictionary. Returns
    /// `None` when a bound term is not interned, in which case nothing
    /// can match.
    pub fn resolve(pattern: &TriplePattern, dict: &TermDictionary) -> Option<IdPattern> {
        let resolve_pos = |term: &Option<crate::model::Term>| -> Option<Option<u64>> {
            match term {
                None => Some(None),
                Some(t) => dict.get(t).map(|id: TermId| Some(id.as_u64())),
            }
        };
        Some(IdPattern {
            s: resolve_pos(&pattern.subject)?,
            p: resolve_pos(&pattern.predicate)?,
            o: resolve_pos(&pattern.object)?,
        })
    }

    pub fn select_index(&self) -> IndexKind {
        IndexKind::select(self.s.is_some(), self.p.is_some(), self.o.is_some())
    }

    /// Inclusive key range covering all candidate keys in `kind`'s
    /// ordering. For the index chosen by [`IdPattern::select_index`] the
    /// bound positions always form an exact prefix, so no post-filtering
    /// is needed; for other orderings the range may over-approximate.
    pub fn key_range(&self, kind: IndexKind) -> ([u64; 3], [u64; 3]) {
        let in_key_order = match kind {
            IndexKind::Spo => [self.s, self.p, self.o],
            IndexKind::Pos => [self.p, self.o, self.s],
            IndexKind::Osp => [self.o, self.s, self.p],
        };
        let mut lo = [0u64; 3];
        let mut hi = [u64::MAX; 3];
        for (i, bound) in in_key_order.iter().enumerate() {
            match bound {
                Some(v) => {
                    lo[i] = *v;
                    hi[i] = *v;
                }
                None => break,
            }
        }
        (lo, hi)
    }

    /// Whether an `(s, p, o)` id triple satisfies every bound position.
    pub fn matches(&self, spo: [u64; 3]) -> bool {
        self.s.is_none_or(|v| v == spo[0])
            && self.p.is_none_or(|v| v == spo[1])
            && self.o.is_none_or(|v| v == spo[2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_round_trip() {
        let spo = [1, 2, 3];
        for kind in IndexKind::ALL {
            assert_eq!(kind.from_key(kind.to_key(spo)), spo);
        }
    }

    #[test]
    fn selection_rule() {
        assert_eq!(IndexKind::select(true, false, false), IndexKind::Spo);
        assert_eq!(IndexKind::select(true, true, false), IndexKind::Spo);
        assert_eq!(IndexKind::select(true, true, true), IndexKind::Spo);
        assert_eq!(IndexKind::select(false, true, false), IndexKind::Pos);
        assert_eq!(IndexKind::select(false, true, true), IndexKind::Pos);
        assert_eq!(IndexKind::select(false, false, true), IndexKind::Osp);
        assert_eq!(IndexKind::select(true, false, true), IndexKind::Osp);
        assert_eq!(IndexKind::select(false, false, false), IndexKind::Spo);
    }

    #[test]
    fn selected_index_needs_no_post_filter() {
        // For every bound combination, the range on the selected index
        // must cover exactly the matching keys: a bound combination maps
        // to a full prefix of the selected ordering.
        for mask in 0u8..8 {
            let pattern = IdPattern {
                s: (mask & 1 != 0).then_some(5),
                p: (mask & 2 != 0).then_some(6),
                o: (mask & 4 != 0).then_some(7),
            };
            let kind = pattern.select_index();
            let (lo, hi) = pattern.key_range(kind);
            let prefix_len = (0..3).take_while(|&i| lo[i] == hi[i]).count();
            let bound = pattern.s.is_some() as usize
                + pattern.p.is_some() as usize
                + pattern.o.is_some() as usize;
            assert_eq!(prefix_len, bound, "pattern mask {mask:03b}");
        }
    }
}
