//! Dictionary encoding of terms to 64-bit ids.

use std::collections::HashMap;
use std::io::{self, Read, Write};

use crate::model::Term;

use super::StoreError;

/// Identifier assigned to an interned term. Ids are dense, start at 0,
/// and are stable for the lifetime of the owning store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(u64);

impl TermId {
    pub fn as_u64(self) -> u64 {
        self.0
    }

    pub(crate) fn from_u64(id: u64) -> Self {
        TermId(id)
    }
}

/// Bijective mapping between terms and ids within one store instance.
#[derive(Debug, Default)]
pub struct TermDictionary {
    ids: HashMap<Term, TermId>,
    terms: Vec<Term>,
}

impl TermDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id for `term`, assigning the next free id on first
    /// sight.
    pub fn intern(&mut self, term: &Term) -> TermId {
        if let Some(&id) = self.ids.get(term) {
            return id;
        }
        let id = TermId(self.terms.len() as u64);
        self.terms.push(term.clone());
        self.ids.insert(term.clone(), id);
        id
    }

    pub fn get(&self, term: &Term) -> Option<TermId> {
        self.ids.get(term).copied()
    }

    pub fn term(&self, id: TermId) -> Option<&Term> {
        self.terms.get(id.0 as usize)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Serializes terms `[start, len)` in id order. Used to append newly
    /// interned terms to a dictionary file at flush time.
    pub fn write_range(&self, start: usize, out: &mut impl Write) -> io::Result<()> {
        for term in &self.terms[start..] {
            write_term_record(out, term)?;
        }
        Ok(())
    }

    /// Reads `count` term records and rebuilds the dictionary; record `i`
    /// receives id `i`.
    pub fn read_from(input: &mut impl Read, count: u64) -> Result<Self, StoreError> {
        let mut dict = TermDictionary::new();
        for _ in 0..count {
            let term = read_term_record(input)?;
            dict.intern(&term);
        }
        if dict.len() as u64 != count {
            return Err(StoreError::corrupt("dictionary file contains duplicate terms"));
        }
        Ok(dict)
    }
}

const KIND_IRI: u8 = 0;
const KIND_BLANK: u8 = 1;
const KIND_LITERAL_PLAIN: u8 = 2;
const KIND_LITERAL_LANG: u8 = 3;
const KIND_LITERAL_TYPED: u8 = 4;

fn write_term_record(out: &mut impl Write, term: &Term) -> io::Result<()> {
    match term {
        Term::Iri(value) => {
            out.write_all(&[KIND_IRI])?;
            write_str(out, value)
        }
        Term::BlankNode(label) => {
            out.write_all(&[KIND_BLANK])?;
            write_str(out, label)
        }
        Term::Literal(lit) => {
            if let Some(tag) = lit.language() {
                out.write_all(&[KIND_LITERAL_LANG])?;
                write_str(out, lit.lexical())?;
                write_str(out, tag)
            } else if let Some(dt) = lit.datatype() {
                out.write_all(&[KIND_LITERAL_TYPED])?;
                write_str(out, lit.lexical())?;
                write_str(out, dt)
            } else {
                out.write_all(&[KIND_LITERAL_PLAIN])?;
                write_str(out, lit.lexical())
            }
        }
    }
}

fn read_term_record(input: &mut impl Read) -> Result<Term, StoreError> {
    let mut kind = [0u8; 1];
    input.read_exact(&mut kind)?;
    let invalid = |e: crate::model::TermError| StoreError::corrupt(format!("dictionary record: {e}"));
    match kind[0] {
        KIND_IRI => Term::iri(read_str(input)?).map_err(invalid),
        KIND_BLANK => Term::blank_node(read_str(input)?).map_err(invalid),
        KIND_LITERAL_PLAIN => Ok(Term::literal(read_str(input)?)),
        KIND_LITERAL_LANG => {
            let lexical = read_str(input)?;
            let tag = read_str(input)?;
            Term::literal_lang(lexical, tag).map_err(invalid)
        }
        KIND_LITERAL_TYPED => {
            let lexical = read_str(input)?;
            let dt = read_str(input)?;
            Term::literal_typed(lexical, dt).map_err(invalid)
        }
        other => Err(StoreError::corrupt(format!(
            "unknown dictionary record kind {other}"
        ))),
    }
}

fn write_str(out: &mut impl Write, s: &str) -> io::Result<()> {
    out.write_all(&(s.len() as u32).to_le_bytes())?;
    out.write_all(s.as_bytes())
}

fn read_str(input: &mut impl Read) -> Result<String, StoreError> {
    let mut len = [0u8; 4];
    input.read_exact(&mut len)?;
    let mut buf = vec![0u8; u32::from_le_bytes(len) as usize];
    input.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|_| StoreError::corrupt("dictionary record is not UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_bijective() {
        let mut dict = TermDictionary::new();
        let a = Term::iri("http://a").unwrap();
        let b = Term::literal("b");
        let id_a = dict.intern(&a);
        let id_b = dict.intern(&b);
        assert_ne!(id_a, id_b);
        assert_eq!(dict.intern(&a), id_a);
        assert_eq!(dict.len(), 2);
        assert_eq!(dict.term(id_a), Some(&a));
        assert_eq!(dict.term(id_b), Some(&b));
        assert_eq!(dict.get(&a), Some(id_a));
    }

    #[test]
    fn round_trips_through_bytes() {
        let mut dict = TermDictionary::new();
        for term in [
            Term::iri("http://example.org/s").unwrap(),
            Term::blank_node("b0").unwrap(),
            Term::literal("plain"),
            Term::literal_lang("hallo", "de").unwrap(),
            Term::literal_typed("5", "http://www.w3.org/2001/XMLSchema#integer").unwrap(),
        ] {
            dict.intern(&term);
        }
        let mut bytes = Vec::new();
        dict.write_range(0, &mut bytes).unwrap();
        let restored = TermDictionary::read_from(&mut bytes.as_slice(), dict.len() as u64).unwrap();
        assert_eq!(restored.len(), dict.len());
        for i in 0..dict.len() {
            let id = TermId(i as u64);
            assert_eq!(restored.term(id), dict.term(id));
        }
    }
}
