use std::fmt;

use serde::{Deserialize, Serialize};

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDF_LANG_STRING: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";
pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

/// Pseudo-classes standing in for literal datatypes when type information is asked of a literal.
pub const DATE_CLASS: &str = "urn:kgqa:class:Date";
pub const NUMBER_CLASS: &str = "urn:kgqa:class:Number";
pub const STRING_CLASS: &str = "urn:kgqa:class:String";

/// An absolute (or opaque) IRI. Blank nodes are kept as opaque `_:label` IRIs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Iri(String);

impl Iri {
    /// Builds an IRI, rejecting empty strings and strings containing whitespace.
    pub fn new(value: impl Into<String>) -> Option<Self> {
        let value = value.into();
        if value.is_empty() || value.chars().any(char::is_whitespace) {
            None
        } else {
            Some(Iri(value))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The part after the last `#`, `/` or `:`; the whole IRI when none of those occur
    /// or the IRI ends with one of them.
    pub fn local_name(&self) -> &str {
        let s = self.0.as_str();
        match s.rfind(['#', '/', ':']) {
            Some(i) if i + 1 < s.len() => &s[i + 1..],
            _ => s,
        }
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Coarse classification of literal datatypes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LiteralKind {
    Date,
    Number,
    String,
    /// A datatype outside the built-in xsd families; the datatype IRI itself acts as the class.
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub lexical: String,
    pub datatype: Option<Iri>,
    pub lang: Option<String>,
}

impl Literal {
    pub fn plain(lexical: impl Into<String>) -> Self {
        Literal { lexical: lexical.into(), datatype: None, lang: None }
    }

    pub fn typed(lexical: impl Into<String>, datatype: Iri) -> Self {
        Literal { lexical: lexical.into(), datatype: Some(datatype), lang: None }
    }

    pub fn kind(&self) -> LiteralKind {
        let Some(dt) = &self.datatype else {
            return LiteralKind::String;
        };
        if dt.as_str() == RDF_LANG_STRING {
            return LiteralKind::String;
        }
        let Some(local) = dt.as_str().strip_prefix(XSD) else {
            return LiteralKind::Other;
        };
        match local {
            "date" | "dateTime" | "dateTimeStamp" | "gYear" | "gYearMonth" | "gMonthDay"
            | "gDay" | "gMonth" | "time" => LiteralKind::Date,
            "integer" | "decimal" | "double" | "float" | "int" | "long" | "short" | "byte"
            | "nonNegativeInteger" | "positiveInteger" | "nonPositiveInteger"
            | "negativeInteger" | "unsignedInt" | "unsignedLong" | "unsignedShort"
            | "unsignedByte" => LiteralKind::Number,
            "string" | "normalizedString" | "token" | "language" | "Name" | "NCName" => {
                LiteralKind::String
            }
            _ => LiteralKind::Other,
        }
    }

    /// The class a literal answers to a type query with.
    pub fn pseudo_class(&self) -> Iri {
        let class = match self.kind() {
            LiteralKind::Date => DATE_CLASS,
            LiteralKind::Number => NUMBER_CLASS,
            LiteralKind::String => STRING_CLASS,
            LiteralKind::Other => {
                return self.datatype.clone().expect("Other kind always carries a datatype")
            }
        };
        Iri(class.to_string())
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("\"")?;
        write_escaped(f, &self.lexical)?;
        f.write_str("\"")?;
        if let Some(lang) = &self.lang {
            write!(f, "@{lang}")
        } else if let Some(dt) = &self.datatype {
            write!(f, "^^<{dt}>")
        } else {
            Ok(())
        }
    }
}

fn write_escaped(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\r' => f.write_str("\\r")?,
            '\t' => f.write_str("\\t")?,
            c if (c as u32) < 0x20 => write!(f, "\\u{:04X}", c as u32)?,
            c => write!(f, "{c}")?,
        }
    }
    Ok(())
}

/// A graph node: an IRI or a literal leaf.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
}

impl Term {
    pub fn iri(value: &str) -> Term {
        Term::Iri(Iri::new(value).expect("valid IRI literal"))
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            Term::Literal(_) => None,
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<Literal> for Term {
    fn from(lit: Literal) -> Self {
        Term::Literal(lit)
    }
}

/// N-Triples rendering of the term.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) if iri.as_str().starts_with("_:") => write!(f, "{iri}"),
            Term::Iri(iri) => write!(f, "<{iri}>"),
            Term::Literal(lit) => write!(f, "{lit}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Iri, predicate: Iri, object: impl Into<Term>) -> Self {
        Triple { subject, predicate, object: object.into() }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <{}> {} .", Term::Iri(self.subject.clone()), self.predicate, self.object)
    }
}

/// Splits a local name on camel-case boundaries and underscores, lowercased.
/// `birthPlace` becomes `birth place`, `Klaus_Wowereit` becomes `klaus wowereit`.
pub fn decamelize(local: &str) -> String {
    let mut words: Vec<String> = Vec::new();
    let mut current = String::new();
    let mut prev: Option<char> = None;
    for c in local.chars() {
        if c == '_' || c == '-' || c.is_whitespace() {
            if !current.is_empty() {
                words.push(std::mem::take(&mut current));
            }
            prev = None;
            continue;
        }
        if c.is_uppercase() {
            if let Some(p) = prev {
                if p.is_lowercase() || p.is_ascii_digit() {
                    words.push(std::mem::take(&mut current));
                }
            }
        }
        current.extend(c.to_lowercase());
        prev = Some(c);
    }
    if !current.is_empty() {
        words.push(current);
    }
    words.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decamelize_splits_camel_and_underscores() {
        assert_eq!(decamelize("birthPlace"), "birth place");
        assert_eq!(decamelize("Klaus_Wowereit"), "klaus wowereit");
        assert_eq!(decamelize("leader"), "leader");
        assert_eq!(decamelize("populationTotal2010"), "population total2010");
        assert_eq!(decamelize("NASA"), "nasa");
    }

    #[test]
    fn local_name_picks_last_segment() {
        let iri = Iri::new("http://dbpedia.org/ontology/birthPlace").unwrap();
        assert_eq!(iri.local_name(), "birthPlace");
        let iri = Iri::new("http://xmlns.com/foaf/0.1/Person").unwrap();
        assert_eq!(iri.local_name(), "Person");
        let iri = Iri::new("a").unwrap();
        assert_eq!(iri.local_name(), "a");
        let iri = Iri::new("http://example.org/").unwrap();
        assert_eq!(iri.local_name(), "http://example.org/");
    }

    #[test]
    fn iri_rejects_whitespace_and_empty() {
        assert!(Iri::new("").is_none());
        assert!(Iri::new("a b").is_none());
    }

    #[test]
    fn literal_kinds() {
        let date = Literal::typed("1989-11-09", Iri::new(format!("{XSD}date")).unwrap());
        assert_eq!(date.kind(), LiteralKind::Date);
        assert_eq!(date.pseudo_class().as_str(), DATE_CLASS);
        let n = Literal::typed("3", Iri::new(format!("{XSD}integer")).unwrap());
        assert_eq!(n.pseudo_class().as_str(), NUMBER_CLASS);
        assert_eq!(Literal::plain("x").pseudo_class().as_str(), STRING_CLASS);
        let custom = Literal::typed("1.9", Iri::new("http://dbpedia.org/datatype/metre").unwrap());
        assert_eq!(custom.pseudo_class().as_str(), "http://dbpedia.org/datatype/metre");
    }
}
