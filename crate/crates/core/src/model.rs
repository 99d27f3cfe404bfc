//! RDF terms and triples as they appear in N-Triples documents.
//!
//! Terms are validated lexically on construction: IRIs are checked for
//! whitespace and angle brackets, blank node labels against the
//! `BLANK_NODE_LABEL` production, and language tags against `LANGTAG`.
//! No IRI resolution or scheme validation is performed.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TermError {
    #[error("invalid IRI {value:?}: {reason}")]
    InvalidIri { value: String, reason: &'static str },
    #[error("invalid blank node label {label:?}")]
    InvalidBlankNodeLabel { label: String },
    #[error("invalid language tag {tag:?}")]
    InvalidLanguageTag { tag: String },
    #[error("literal terms cannot be subjects")]
    LiteralSubject,
    #[error("predicates must be IRIs")]
    NonIriPredicate,
}

/// An RDF term: IRI, blank node, or literal.
///
/// A literal carries at most one of a datatype IRI or a language tag.
/// `xsd:string` is the implicit datatype of plain literals and is
/// normalized away on construction, so two spellings of the same
/// literal compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    BlankNode(String),
    Literal(Literal),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    lexical: String,
    kind: LiteralKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LiteralKind {
    Plain,
    Language(String),
    Typed(String),
}

pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";

impl Term {
    pub fn iri(value: impl Into<String>) -> Result<Self, TermError> {
        let value = value.into();
        check_iri(&value)?;
        Ok(Term::Iri(value))
    }

    pub fn blank_node(label: impl Into<String>) -> Result<Self, TermError> {
        let label = label.into();
        if !is_valid_blank_node_label(&label) {
            return Err(TermError::InvalidBlankNodeLabel { label });
        }
        Ok(Term::BlankNode(label))
    }

    pub fn literal(lexical: impl Into<String>) -> Self {
        Term::Literal(Literal {
            lexical: lexical.into(),
            kind: LiteralKind::Plain,
        })
    }

    pub fn literal_lang(lexical: impl Into<String>, tag: impl Into<String>) -> Result<Self, TermError> {
        let tag = tag.into();
        if !is_valid_language_tag(&tag) {
            return Err(TermError::InvalidLanguageTag { tag });
        }
        Ok(Term::Literal(Literal {
            lexical: lexical.into(),
            kind: LiteralKind::Language(tag),
        }))
    }

    pub fn literal_typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Result<Self, TermError> {
        let datatype = datatype.into();
        check_iri(&datatype)?;
        let kind = if datatype == XSD_STRING {
            LiteralKind::Plain
        } else {
            LiteralKind::Typed(datatype)
        };
        Ok(Term::Literal(Literal {
            lexical: lexical.into(),
            kind,
        }))
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_blank_node(&self) -> bool {
        matches!(self, Term::BlankNode(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }
}

impl Literal {
    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn kind(&self) -> &LiteralKind {
        &self.kind
    }

    pub fn language(&self) -> Option<&str> {
        match &self.kind {
            LiteralKind::Language(tag) => Some(tag),
            _ => None,
        }
    }

    /// The explicit datatype IRI, if any. Plain literals report `None`
    /// even though their RDF datatype is `xsd:string`.
    pub fn datatype(&self) -> Option<&str> {
        match &self.kind {
            LiteralKind::Typed(dt) => Some(dt),
            _ => None,
        }
    }
}

fn check_iri(value: &str) -> Result<(), TermError> {
    if value.is_empty() {
        return Err(TermError::InvalidIri {
            value: value.to_owned(),
            reason: "empty",
        });
    }
    for c in value.chars() {
        if c.is_whitespace() {
            return Err(TermError::InvalidIri {
                value: value.to_owned(),
                reason: "contains whitespace",
            });
        }
        if c == '<' || c == '>' {
            return Err(TermError::InvalidIri {
                value: value.to_owned(),
                reason: "contains an angle bracket",
            });
        }
    }
    Ok(())
}

fn is_pn_chars_base(c: char) -> bool {
    matches!(c,
        'A'..='Z' | 'a'..='z'
        | '\u{00C0}'..='\u{00D6}' | '\u{00D8}'..='\u{00F6}' | '\u{00F8}'..='\u{02FF}'
        | '\u{0370}'..='\u{037D}' | '\u{037F}'..='\u{1FFF}'
        | '\u{200C}'..='\u{200D}' | '\u{2070}'..='\u{218F}'
        | '\u{2C00}'..='\u{2FEF}' | '\u{3001}'..='\u{D7FF}'
        | '\u{F900}'..='\u{FDCF}' | '\u{FDF0}'..='\u{FFFD}'
        | '\u{10000}'..='\u{EFFFF}')
}

fn is_pn_chars_u(c: char) -> bool {
    is_pn_chars_base(c) || c == '_' || c == ':'
}

fn is_pn_chars(c: char) -> bool {
    is_pn_chars_u(c)
        || c == '-'
        || c.is_ascii_digit()
        || c == '\u{00B7}'
        || ('\u{0300}'..='\u{036F}').contains(&c)
        || ('\u{203F}'..='\u{2040}').contains(&c)
}

/// `BLANK_NODE_LABEL` body (without the `_:` prefix): first character is
/// `PN_CHARS_U` or a digit, interior characters allow `.`, the last
/// character must not be `.`.
pub fn is_valid_blank_node_label(label: &str) -> bool {
    let mut chars = label.chars();
    let Some(first) = chars.next() else {
        return false;
    };
    if !(is_pn_chars_u(first) || first.is_ascii_digit()) {
        return false;
    }
    let mut last = first;
    for c in chars {
        if !(is_pn_chars(c) || c == '.') {
            return false;
        }
        last = c;
    }
    last != '.' || label.len() == 1
}

/// `LANGTAG` body (without the `@`): `[a-zA-Z]+ ('-' [a-zA-Z0-9]+)*`.
pub fn is_valid_language_tag(tag: &str) -> bool {
    let mut parts = tag.split('-');
    let Some(primary) = parts.next() else {
        return false;
    };
    if primary.is_empty() || !primary.chars().all(|c| c.is_ascii_alphabetic()) {
        return false;
    }
    parts.all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphanumeric()))
}

/// A subject-predicate-object statement. The subject is an IRI or blank
/// node and the predicate an IRI; these are enforced on construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    subject: Term,
    predicate: Term,
    object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Self, TermError> {
        if subject.is_literal() {
            return Err(TermError::LiteralSubject);
        }
        if !predicate.is_iri() {
            return Err(TermError::NonIriPredicate);
        }
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Term {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }

    pub fn into_parts(self) -> (Term, Term, Term) {
        (self.subject, self.predicate, self.object)
    }
}

/// A triple pattern with any subset of positions bound.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: Option<Term>,
    pub predicate: Option<Term>,
    pub object: Option<Term>,
}

impl TriplePattern {
    pub fn any() -> Self {
        Self::default()
    }

    pub fn with_subject(mut self, s: Term) -> Self {
        self.subject = Some(s);
        self
    }

    pub fn with_predicate(mut self, p: Term) -> Self {
        self.predicate = Some(p);
        self
    }

    pub fn with_object(mut self, o: Term) -> Self {
        self.object = Some(o);
        self
    }

    pub fn matches(&self, triple: &Triple) -> bool {
        self.subject.as_ref().is_none_or(|s| s == triple.subject())
            && self.predicate.as_ref().is_none_or(|p| p == triple.predicate())
            && self.object.as_ref().is_none_or(|o| o == triple.object())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iri_rejects_whitespace_and_brackets() {
        assert!(Term::iri("http://example.org/a").is_ok());
        assert!(Term::iri("").is_err());
        assert!(Term::iri("http://example.org/a b").is_err());
        assert!(Term::iri("http://example.org/a\tb").is_err());
        assert!(Term::iri("http://example.org/<a>").is_err());
    }

    #[test]
    fn xsd_string_normalizes_to_plain() {
        let typed = Term::literal_typed("x", XSD_STRING).unwrap();
        assert_eq!(typed, Term::literal("x"));
    }

    #[test]
    fn blank_node_labels() {
        assert!(is_valid_blank_node_label("b0"));
        assert!(is_valid_blank_node_label("0b"));
        assert!(is_valid_blank_node_label("a.b"));
        assert!(is_valid_blank_node_label("a:b"));
        assert!(!is_valid_blank_node_label(""));
        assert!(!is_valid_blank_node_label("a."));
        assert!(!is_valid_blank_node_label(".a"));
        assert!(!is_valid_blank_node_label("a b"));
    }

    #[test]
    fn language_tags() {
        assert!(is_valid_language_tag("en"));
        assert!(is_valid_language_tag("en-US"));
        assert!(is_valid_language_tag("de-CH-1996"));
        assert!(!is_valid_language_tag(""));
        assert!(!is_valid_language_tag("-en"));
        assert!(!is_valid_language_tag("en-"));
        assert!(!is_valid_language_tag("e n"));
        assert!(!is_valid_language_tag("1en"));
    }

    #[test]
    fn triple_position_constraints() {
        let iri = Term::iri("http://example.org/p").unwrap();
        let lit = Term::literal("x");
        assert_eq!(
            Triple::new(lit.clone(), iri.clone(), iri.clone()),
            Err(TermError::LiteralSubject)
        );
        assert_eq!(
            Triple::new(iri.clone(), lit, iri.clone()),
            Err(TermError::NonIriPredicate)
        );
        assert!(Triple::new(iri.clone(), iri.clone(), iri).is_ok());
    }

    #[test]
    fn pattern_matching() {
        let s = Term::iri("http://example.org/s").unwrap();
        let p = Term::iri("http://example.org/p").unwrap();
        let o = Term::literal("v");
        let t = Triple::new(s.clone(), p.clone(), o.clone()).unwrap();
        assert!(TriplePattern::any().matches(&t));
        assert!(TriplePattern::any().with_subject(s).matches(&t));
        assert!(!TriplePattern::any().with_subject(o).matches(&t));
    }
}
