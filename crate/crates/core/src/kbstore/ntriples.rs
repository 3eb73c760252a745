//! Line-oriented N-Triples reader.
//!
//! IRIs inside angle brackets are taken verbatim (relative references included),
//! blank nodes become opaque `_:label` IRIs, and literals keep their datatype or
//! language tag.

use super::term::{Iri, Literal, Term, Triple};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}: `{text}`")]
pub struct ParseError {
    pub line: usize,
    pub text: String,
    pub message: String,
}

/// Parses every triple in `input`. Blank lines and `#` comment lines are skipped.
pub fn parse_document(input: &str) -> Result<Vec<Triple>, ParseError> {
    let mut triples = Vec::new();
    for (idx, raw) in input.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let triple = parse_line(line).map_err(|message| ParseError {
            line: idx + 1,
            text: raw.to_string(),
            message,
        })?;
        triples.push(triple);
    }
    Ok(triples)
}

/// Parses a single term in N-Triples syntax (IRI, blank node or literal).
pub fn parse_term(text: &str) -> Result<Term, String> {
    let mut cursor = Cursor::new(text.trim());
    let term = cursor.term()?;
    cursor.skip_ws();
    if !cursor.at_end() {
        return Err("trailing characters after term".into());
    }
    Ok(term)
}

fn parse_line(line: &str) -> Result<Triple, String> {
    let mut cursor = Cursor::new(line);
    let subject = match cursor.term()? {
        Term::Iri(iri) => iri,
        Term::Literal(_) => return Err("literal in subject position".into()),
    };
    cursor.skip_ws();
    let predicate = match cursor.term()? {
        Term::Iri(iri) if !iri.as_str().starts_with("_:") => iri,
        _ => return Err("predicate must be an IRI".into()),
    };
    cursor.skip_ws();
    let object = cursor.term()?;
    cursor.skip_ws();
    if !cursor.eat('.') {
        return Err("expected '.' terminating the triple".into());
    }
    cursor.skip_ws();
    if !cursor.at_end() && !cursor.rest().starts_with('#') {
        return Err("unexpected characters after '.'".into());
    }
    Ok(Triple { subject, predicate, object })
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<Term, String> {
        match self.peek() {
            Some('<') => self.iri_ref().map(Term::Iri),
            Some('_') => self.blank_node().map(Term::Iri),
            Some('"') => self.literal().map(Term::Literal),
            Some(c) => Err(format!("unexpected character '{c}'")),
            None => Err("unexpected end of line".into()),
        }
    }

    fn iri_ref(&mut self) -> Result<Iri, String> {
        self.bump();
        let mut value = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some('\\') => value.push(self.unicode_escape()?),
                Some(c) => value.push(c),
                None => return Err("unterminated IRI".into()),
            }
        }
        Iri::new(value).ok_or_else(|| "IRI is empty or contains whitespace".to_string())
    }

    fn blank_node(&mut self) -> Result<Iri, String> {
        if !self.rest().starts_with("_:") {
            return Err("malformed blank node".into());
        }
        let start = self.pos;
        self.pos += 2;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.') {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        // A trailing '.' belongs to the statement terminator.
        while self.src[start..self.pos].ends_with('.') {
            self.pos -= 1;
        }
        if self.pos == start + 2 {
            return Err("empty blank node label".into());
        }
        Ok(Iri::new(&self.src[start..self.pos]).expect("label has no whitespace"))
    }

    fn literal(&mut self) -> Result<Literal, String> {
        self.bump();
        let mut lexical = String::new();
        loop {
            match self.bump() {
                Some('"') => break,
                Some('\\') => {
                    let c = match self.peek() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u' | 'U') => {
                            lexical.push(self.unicode_escape()?);
                            continue;
                        }
                        _ => return Err("invalid escape in literal".into()),
                    };
                    self.bump();
                    lexical.push(c);
                }
                Some(c) => lexical.push(c),
                None => return Err("unterminated literal".into()),
            }
        }
        if self.eat('@') {
            let start = self.pos;
            while let Some(c) = self.peek() {
                if c.is_ascii_alphanumeric() || c == '-' {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            if self.pos == start {
                return Err("empty language tag".into());
            }
            let lang = self.src[start..self.pos].to_string();
            return Ok(Literal { lexical, datatype: None, lang: Some(lang) });
        }
        if self.rest().starts_with("^^") {
            self.pos += 2;
            if self.peek() != Some('<') {
                return Err("datatype must be an IRI".into());
            }
            let dt = self.iri_ref()?;
            return Ok(Literal::typed(lexical, dt));
        }
        Ok(Literal::plain(lexical))
    }

    /// Reads `uXXXX` or `UXXXXXXXX` after a consumed backslash.
    fn unicode_escape(&mut self) -> Result<char, String> {
        let width = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err("invalid escape".into()),
        };
        let rest = self.rest();
        if rest.len() < width || !rest.is_char_boundary(width) {
            return Err("truncated unicode escape".into());
        }
        let hex = &rest[..width];
        let code = u32::from_str_radix(hex, 16).map_err(|_| "bad unicode escape".to_string())?;
        self.pos += width;
        char::from_u32(code).ok_or_else(|| "escape is not a scalar value".to_string())
    }
}
