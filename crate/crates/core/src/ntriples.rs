//! Streaming N-Triples parser and canonical serializer.
//!
//! The parser consumes a `BufRead` line by line, so peak memory is
//! bounded by the longest line in the input, not the file size. Both LF
//! and CRLF line endings are accepted.
//!
//! The serializer emits one canonical line per triple: single ASCII
//! spaces between terms, ` .` and LF at the end, and exactly the escapes
//! the grammar requires (`\" \\ \n \r` in literals, `\uXXXX` for the
//! characters an IRIREF cannot hold verbatim). Byte-per-triple
//! statistics are defined over this canonical encoding, including the
//! terminating newline, so they are independent of how the input file
//! happened to be formatted.

use std::fmt::{self, Write as _};
use std::io::{self, BufRead};

use thiserror::Error;

use crate::model::{Term, TermError, Triple};

#[derive(Debug, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: u64,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error)]
pub enum ParseErrorKind {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("expected {expected}, found {found:?}")]
    Unexpected { expected: &'static str, found: String },
    #[error("unexpected end of line while reading {expected}")]
    UnexpectedEol { expected: &'static str },
    #[error("invalid escape sequence {found:?}")]
    BadEscape { found: String },
    #[error("missing '.' statement terminator")]
    MissingDot,
    #[error("trailing content after statement: {found:?}")]
    TrailingContent { found: String },
    #[error(transparent)]
    Term(#[from] TermError),
}

impl ParseError {
    /// True for stream-level failures that cannot be skipped in lenient
    /// mode (I/O errors, invalid UTF-8).
    pub fn is_io(&self) -> bool {
        matches!(self.kind, ParseErrorKind::Io(_))
    }
}

/// Streaming parser over an N-Triples byte stream.
///
/// Yields `(line_number, triple)` pairs in file order; comment and blank
/// lines are skipped. Line numbers are 1-based and count every physical
/// line. After a syntax error the iterator resumes on the next line, so
/// callers choose the error policy: stop at the first `Err` (strict) or
/// count and keep going (lenient). I/O errors are terminal.
pub struct NtParser<R: BufRead> {
    reader: R,
    line_no: u64,
    buf: String,
    peak_buffer_bytes: usize,
    done: bool,
}

impl<R: BufRead> NtParser<R> {
    pub fn new(reader: R) -> Self {
        NtParser {
            reader,
            line_no: 0,
            buf: String::new(),
            peak_buffer_bytes: 0,
            done: false,
        }
    }

    /// Largest capacity the internal line buffer has reached. Grows with
    /// the longest line seen, not with the number of lines.
    pub fn peak_buffer_bytes(&self) -> usize {
        self.peak_buffer_bytes
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.line_no,
            kind,
        }
    }
}

impl<R: BufRead> Iterator for NtParser<R> {
    type Item = Result<(u64, Triple), ParseError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            self.buf.clear();
            self.line_no += 1;
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => {
                    self.done = true;
                    return None;
                }
                Ok(_) => {}
                Err(e) => {
                    self.done = true;
                    return Some(Err(self.error(ParseErrorKind::Io(e))));
                }
            }
            self.peak_buffer_bytes = self.peak_buffer_bytes.max(self.buf.capacity());
            let line = self.buf.strip_suffix('\n').unwrap_or(&self.buf);
            let line = line.strip_suffix('\r').unwrap_or(line);
            match parse_line(line) {
                Ok(Some(triple)) => return Some(Ok((self.line_no, triple))),
                Ok(None) => continue,
                Err(kind) => return Some(Err(self.error(kind))),
            }
        }
    }
}

/// Parses one line: a statement, a comment, or nothing.
fn parse_line(line: &str) -> Result<Option<Triple>, ParseErrorKind> {
    let mut cur = Cursor::new(line);
    cur.skip_ws();
    match cur.peek() {
        None | Some('#') => return Ok(None),
        _ => {}
    }
    let subject = cur.parse_term("subject")?;
    cur.require_ws("predicate")?;
    let predicate = cur.parse_term("predicate")?;
    cur.require_ws("object")?;
    let object = cur.parse_term("object")?;
    cur.skip_ws();
    match cur.next() {
        Some('.') => {}
        Some(c) => {
            return Err(ParseErrorKind::Unexpected {
                expected: "'.' statement terminator",
                found: c.to_string(),
            })
        }
        None => return Err(ParseErrorKind::MissingDot),
    }
    cur.skip_ws();
    match cur.peek() {
        None | Some('#') => {}
        Some(_) => {
            return Err(ParseErrorKind::TrailingContent {
                found: cur.rest().to_owned(),
            })
        }
    }
    Ok(Some(Triple::new(subject, predicate, object)?))
}

/// Parses a single term in N-Triples syntax, e.g. `<http://a>`, `_:b0`,
/// or `"x"@en`. The whole input must be consumed.
pub fn parse_term(input: &str) -> Result<Term, ParseErrorKind> {
    let mut cur = Cursor::new(input.trim_matches([' ', '\t']));
    let term = cur.parse_term("term")?;
    if cur.peek().is_some() {
        return Err(ParseErrorKind::TrailingContent {
            found: cur.rest().to_owned(),
        });
    }
    Ok(term)
}

struct Cursor<'a> {
    rest: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str) -> Self {
        Cursor { rest: s }
    }

    fn peek(&self) -> Option<char> {
        self.rest.chars().next()
    }

    fn next(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.rest = &self.rest[c.len_utf8()..];
        Some(c)
    }

    fn rest(&self) -> &'a str {
        self.rest
    }

    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start_matches([' ', '\t']);
    }

    fn require_ws(&mut self, expected: &'static str) -> Result<(), ParseErrorKind> {
        match self.peek() {
            Some(' ') | Some('\t') => {
                self.skip_ws();
                Ok(())
            }
            Some(c) => Err(ParseErrorKind::Unexpected {
                expected: "whitespace",
                found: c.to_string(),
            }),
            None => Err(ParseErrorKind::UnexpectedEol { expected }),
        }
    }

    fn parse_term(&mut self, position: &'static str) -> Result<Term, ParseErrorKind> {
        match self.peek() {
            Some('<') => self.parse_iri(),
            Some('_') => self.parse_blank_node(),
            Some('"') => self.parse_literal(),
            Some(_) => Err(ParseErrorKind::Unexpected {
                expected: position,
                found: token_preview(self.rest),
            }),
            None => Err(ParseErrorKind::UnexpectedEol { expected: position }),
        }
    }

    fn parse_iri(&mut self) -> Result<Term, ParseErrorKind> {
        debug_assert_eq!(self.next(), Some('<'));
        let mut value = String::new();
        loop {
            match self.next() {
                Some('>') => break,
                Some('\\') => value.push(self.parse_uchar()?),
                Some(c) if forbidden_in_iriref(c) => {
                    return Err(ParseErrorKind::Unexpected {
                        expected: "IRI character or '>'",
                        found: c.to_string(),
                    })
                }
                Some(c) => value.push(c),
                None => return Err(ParseErrorKind::UnexpectedEol { expected: "'>'" }),
            }
        }
        Ok(Term::iri(value)?)
    }

    fn parse_blank_node(&mut self) -> Result<Term, ParseErrorKind> {
        debug_assert_eq!(self.next(), Some('_'));
        if self.next() != Some(':') {
            return Err(ParseErrorKind::Unexpected {
                expected: "':' after '_'",
                found: token_preview(self.rest),
            });
        }
        // The label runs until whitespace or end of line; validity is
        // checked by the Term constructor against BLANK_NODE_LABEL.
        let end = self
            .rest
            .find([' ', '\t'])
            .unwrap_or(self.rest.len());
        let label = &self.rest[..end];
        self.rest = &self.rest[end..];
        Ok(Term::blank_node(label)?)
    }

    fn parse_literal(&mut self) -> Result<Term, ParseErrorKind> {
        debug_assert_eq!(self.next(), Some('"'));
        let mut lexical = String::new();
        loop {
            match self.next() {
                Some('"') => break,
                Some('\\') => lexical.push(self.parse_echar_or_uchar()?),
                Some(c) => lexical.push(c),
                None => {
                    return Err(ParseErrorKind::UnexpectedEol {
                        expected: "closing '\"'",
                    })
                }
            }
        }
        match self.peek() {
            Some('@') => {
                self.next();
                let end = self
                    .rest
                    .find([' ', '\t'])
                    .unwrap_or(self.rest.len());
                let tag = &self.rest[..end];
                self.rest = &self.rest[end..];
                Ok(Term::literal_lang(lexical, tag)?)
            }
            Some('^') => {
                self.next();
                if self.next() != Some('^') {
                    return Err(ParseErrorKind::Unexpected {
                        expected: "'^^' datatype marker",
                        found: token_preview(self.rest),
                    });
                }
                if self.peek() != Some('<') {
                    return Err(ParseErrorKind::Unexpected {
                        expected: "datatype IRI",
                        found: token_preview(self.rest),
                    });
                }
                let datatype = self.parse_iri()?;
                match datatype {
                    Term::Iri(dt) => Ok(Term::literal_typed(lexical, dt)?),
                    _ => unreachable!("parse_iri returns IRIs"),
                }
            }
            _ => Ok(Term::literal(lexical)),
        }
    }

    /// After a backslash inside a literal: ECHAR or UCHAR.
    fn parse_echar_or_uchar(&mut self) -> Result<char, ParseErrorKind> {
        match self.next() {
            Some('t') => Ok('\t'),
            Some('b') => Ok('\u{8}'),
            Some('n') => Ok('\n'),
            Some('r') => Ok('\r'),
            Some('f') => Ok('\u{C}'),
            Some('"') => Ok('"'),
            Some('\'') => Ok('\''),
            Some('\\') => Ok('\\'),
            Some('u') => self.parse_hex_escape(4),
            Some('U') => self.parse_hex_escape(8),
            Some(c) => Err(ParseErrorKind::BadEscape {
                found: format!("\\{c}"),
            }),
            None => Err(ParseErrorKind::UnexpectedEol { expected: "escape" }),
        }
    }

    /// After a backslash inside an IRIREF: only UCHAR is allowed.
    fn parse_uchar(&mut self) -> Result<char, ParseErrorKind> {
        match self.next() {
            Some('u') => self.parse_hex_escape(4),
            Some('U') => self.parse_hex_escape(8),
            Some(c) => Err(ParseErrorKind::BadEscape {
                found: format!("\\{c}"),
            }),
            None => Err(ParseErrorKind::UnexpectedEol { expected: "escape" }),
        }
    }

    fn parse_hex_escape(&mut self, digits: usize) -> Result<char, ParseErrorKind> {
        let mut code: u32 = 0;
        let mut consumed = String::with_capacity(digits);
        for _ in 0..digits {
            let c = self.next().ok_or(ParseErrorKind::UnexpectedEol {
                expected: "hex digit",
            })?;
            consumed.push(c);
            let digit = c.to_digit(16).ok_or_else(|| ParseErrorKind::BadEscape {
                found: format!("\\u{consumed}"),
            })?;
            code = code * 16 + digit;
        }
        char::from_u32(code).ok_or(ParseErrorKind::BadEscape {
            found: format!("\\u{{{code:X}}}"),
        })
    }
}

fn token_preview(rest: &str) -> String {
    let token: String = rest.chars().take(16).collect();
    if token.is_empty() {
        "end of line".to_owned()
    } else {
        token
    }
}

/// Characters an IRIREF cannot contain verbatim.
fn forbidden_in_iriref(c: char) -> bool {
    c <= '\u{20}' || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')
}

/// Serializes one triple as a canonical N-Triples line, `'.'` and LF
/// included.
pub fn serialize_triple(triple: &Triple) -> String {
    let mut out = String::new();
    write_triple_line(&mut out, triple).expect("writing to a String cannot fail");
    out
}

/// Writes the canonical line for `triple` (including the trailing LF)
/// into any `fmt::Write` sink.
pub fn write_triple_line(out: &mut impl fmt::Write, triple: &Triple) -> fmt::Result {
    write_term(out, triple.subject())?;
    out.write_char(' ')?;
    write_term(out, triple.predicate())?;
    out.write_char(' ')?;
    write_term(out, triple.object())?;
    out.write_str(" .\n")
}

pub fn write_term(out: &mut impl fmt::Write, term: &Term) -> fmt::Result {
    match term {
        Term::Iri(value) => {
            out.write_char('<')?;
            for c in value.chars() {
                if forbidden_in_iriref(c) || c == '>' {
                    write!(out, "\\u{:04X}", c as u32)?;
                } else {
                    out.write_char(c)?;
                }
            }
            out.write_char('>')
        }
        Term::BlankNode(label) => {
            out.write_str("_:")?;
            out.write_str(label)
        }
        Term::Literal(lit) => {
            out.write_char('"')?;
            for c in lit.lexical().chars() {
                match c {
                    '"' => out.write_str("\\\"")?,
                    '\\' => out.write_str("\\\\")?,
                    '\n' => out.write_str("\\n")?,
                    '\r' => out.write_str("\\r")?,
                    _ => out.write_char(c)?,
                }
            }
            out.write_char('"')?;
            if let Some(tag) = lit.language() {
                out.write_char('@')?;
                out.write_str(tag)?;
            } else if let Some(dt) = lit.datatype() {
                out.write_str("^^")?;
                write_term(out, &Term::Iri(dt.to_owned()))?;
            }
            Ok(())
        }
    }
}

/// Byte length of the canonical line for `triple`, newline included,
/// without building the string.
pub fn line_byte_length(triple: &Triple) -> usize {
    let mut counter = ByteCounter(0);
    write_triple_line(&mut counter, triple).expect("counting cannot fail");
    counter.0
}

struct ByteCounter(usize);

impl fmt::Write for ByteCounter {
    fn write_str(&mut self, s: &str) -> fmt::Result {
        self.0 += s.len();
        Ok(())
    }

    fn write_char(&mut self, c: char) -> fmt::Result {
        self.0 += c.len_utf8();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor as IoCursor;

    fn parse_all(input: &str) -> Vec<(u64, Triple)> {
        NtParser::new(IoCursor::new(input))
            .collect::<Result<Vec<_>, _>>()
            .unwrap()
    }

    fn iri(v: &str) -> Term {
        Term::iri(v).unwrap()
    }

    #[test]
    fn minimal_statement() {
        let triples = parse_all("<http://a> <http://p> \"x\" .\n");
        assert_eq!(triples.len(), 1);
        let (line, t) = &triples[0];
        assert_eq!(*line, 1);
        assert_eq!(t.subject(), &iri("http://a"));
        assert_eq!(t.predicate(), &iri("http://p"));
        assert_eq!(t.object(), &Term::literal("x"));
    }

    #[test]
    fn blank_subject_and_comment() {
        let triples = parse_all("_:b0 <http://p> <http://o> .\n# note\n");
        assert_eq!(triples.len(), 1);
        assert_eq!(triples[0].1.subject(), &Term::blank_node("b0").unwrap());
    }

    #[test]
    fn missing_object_is_an_error() {
        let err = NtParser::new(IoCursor::new("<http://a> <http://p> .\n"))
            .next()
            .unwrap()
            .unwrap_err();
        assert_eq!(err.line, 1);
        // `.` is consumed as the object candidate, which is not a term.
        assert!(matches!(
            err.kind,
            ParseErrorKind::Unexpected { expected: "object", .. }
        ));
    }

    #[test]
    fn error_reports_correct_line_and_recovery_continues() {
        let input = "<http://a> <http://p> <http://o> .\nnot a triple\n<http://a> <http://p> \"y\" .\n";
        let mut parser = NtParser::new(IoCursor::new(input));
        assert!(parser.next().unwrap().is_ok());
        let err = parser.next().unwrap().unwrap_err();
        assert_eq!(err.line, 2);
        let (line, _) = parser.next().unwrap().unwrap();
        assert_eq!(line, 3);
    }

    #[test]
    fn crlf_and_blank_lines() {
        let triples = parse_all("\r\n<http://a> <http://p> <http://o> .\r\n\n");
        assert_eq!(triples.len(), 1);
        assert_eq!(triples[0].0, 2);
    }

    #[test]
    fn comment_after_statement() {
        let triples = parse_all("<http://a> <http://p> <http://o> . # trailing\n");
        assert_eq!(triples.len(), 1);
    }

    #[test]
    fn trailing_content_rejected() {
        let err = NtParser::new(IoCursor::new("<http://a> <http://p> <http://o> . <junk>\n"))
            .next()
            .unwrap()
            .unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::TrailingContent { .. }));
    }

    #[test]
    fn literal_escapes_round_trip() {
        let input = "<http://a> <http://p> \"quote \\\" backslash \\\\ newline \\n tab \\t\" .\n";
        let triples = parse_all(input);
        let Term::Literal(lit) = triples[0].1.object() else {
            panic!("expected literal");
        };
        assert_eq!(lit.lexical(), "quote \" backslash \\ newline \n tab \t");
        let line = serialize_triple(&triples[0].1);
        // Tab needs no escape; quote, backslash, and newline do.
        assert!(line.contains("\\\""));
        assert!(line.contains("\\\\"));
        assert!(line.contains("\\n"));
        assert!(line.contains('\t'));
        assert_eq!(parse_all(&line)[0].1, triples[0].1);
    }

    #[test]
    fn uchar_escapes() {
        let triples = parse_all("<http://a/\\u0041> <http://p> \"\\U0001F600\" .\n");
        assert_eq!(triples[0].1.subject(), &iri("http://a/A"));
        assert_eq!(triples[0].1.object(), &Term::literal("😀"));
    }

    #[test]
    fn uchar_whitespace_in_iri_rejected() {
        let err = NtParser::new(IoCursor::new("<http://a/\\u0020b> <http://p> <http://o> .\n"))
            .next()
            .unwrap()
            .unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Term(_)));
    }

    #[test]
    fn surrogate_escape_rejected() {
        let err = NtParser::new(IoCursor::new("<http://a> <http://p> \"\\uD800\" .\n"))
            .next()
            .unwrap()
            .unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::BadEscape { .. }));
    }

    #[test]
    fn language_and_datatype_objects() {
        let triples = parse_all(
            "<http://a> <http://p> \"hi\"@en-US .\n<http://a> <http://p> \"5\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n",
        );
        let Term::Literal(first) = triples[0].1.object() else {
            panic!()
        };
        assert_eq!(first.language(), Some("en-US"));
        let Term::Literal(second) = triples[1].1.object() else {
            panic!()
        };
        assert_eq!(
            second.datatype(),
            Some("http://www.w3.org/2001/XMLSchema#integer")
        );
    }

    #[test]
    fn xsd_string_datatype_folds_to_plain_on_parse() {
        let triples = parse_all(
            "<http://a> <http://p> \"x\"^^<http://www.w3.org/2001/XMLSchema#string> .\n",
        );
        assert_eq!(triples[0].1.object(), &Term::literal("x"));
        assert_eq!(
            serialize_triple(&triples[0].1),
            "<http://a> <http://p> \"x\" .\n"
        );
    }

    #[test]
    fn forty_four_byte_line() {
        // Independent oracle: count the characters of the expected line
        // by hand; every character is ASCII, so bytes == characters.
        let expected = "<http://ex/s> <http://ex/p> <http://ex/o> .\n";
        assert_eq!(expected.len(), 44);
        let t = Triple::new(iri("http://ex/s"), iri("http://ex/p"), iri("http://ex/o")).unwrap();
        assert_eq!(serialize_triple(&t), expected);
        assert_eq!(serialize_triple(&t).len(), 44);
        assert_eq!(line_byte_length(&t), 44);
    }

    #[test]
    fn multibyte_characters_count_as_bytes() {
        let t = Triple::new(iri("http://s"), iri("http://p"), Term::literal("é")).unwrap();
        // "é" is 2 bytes in UTF-8, 1 character.
        let line = serialize_triple(&t);
        assert_eq!(line_byte_length(&t), line.len());
        assert_eq!(line.chars().count() + 1, line.len());
    }

    #[test]
    fn parse_term_helper() {
        assert_eq!(parse_term("<http://a>").unwrap(), iri("http://a"));
        assert_eq!(parse_term("_:x").unwrap(), Term::blank_node("x").unwrap());
        assert_eq!(parse_term("\"v\"@en").unwrap(), Term::literal_lang("v", "en").unwrap());
        assert!(parse_term("<http://a> <http://b>").is_err());
        assert!(parse_term("nonsense").is_err());
    }

    #[test]
    fn streaming_buffer_is_bounded_by_longest_line() {
        let mut input = String::new();
        let long_object: String = "x".repeat(600);
        input.push_str(&format!("<http://s> <http://p> \"{long_object}\" .\n"));
        for i in 0..10_000 {
            input.push_str(&format!("<http://s/{i}> <http://p> <http://o/{i}> .\n"));
        }
        let longest = input.lines().map(str::len).max().unwrap();
        let mut parser = NtParser::new(IoCursor::new(input.as_str()));
        let count = parser.by_ref().filter(|r| r.is_ok()).count();
        assert_eq!(count, 10_001);
        // The reusable line buffer never grows past the longest line
        // (plus its terminator and amortized growth slack).
        assert!(parser.peak_buffer_bytes() <= 2 * (longest + 2));
    }
}
