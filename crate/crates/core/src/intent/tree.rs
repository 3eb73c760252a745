use serde::Serialize;

use crate::entitylink::Span;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("tree syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("tree token `{token}` not found in question text")]
    Alignment { token: String },
}

/// A constituent tree. Pre-terminals are the leaves and carry the token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseTree {
    pub label: String,
    pub children: Vec<ParseTree>,
    pub token: Option<String>,
    pub span: Span,
}

impl ParseTree {
    pub fn is_leaf(&self) -> bool {
        self.token.is_some()
    }

    pub fn leaves(&self) -> Vec<&ParseTree> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a ParseTree>) {
        if self.is_leaf() {
            out.push(self);
        } else {
            for c in &self.children {
                c.collect_leaves(out);
            }
        }
    }

    /// Leaf tokens joined by single spaces.
    pub fn text(&self) -> String {
        self.leaves().iter().filter_map(|l| l.token.as_deref()).collect::<Vec<_>>().join(" ")
    }

    /// Re-anchors every span onto `text` by locating each leaf token in order.
    pub fn aligned(&self, text: &str) -> Result<ParseTree, TreeError> {
        let mut cursor = 0;
        let mut tree = self.clone();
        tree.align_inner(text, &mut cursor)?;
        Ok(tree)
    }

    fn align_inner(&mut self, text: &str, cursor: &mut usize) -> Result<(), TreeError> {
        if let Some(token) = &self.token {
            let surface = unescape_token(token);
            let found = text[*cursor..]
                .find(surface)
                .ok_or_else(|| TreeError::Alignment { token: token.clone() })?;
            let start = *cursor + found;
            self.span = Span::new(start, start + surface.len());
            *cursor = self.span.end;
            return Ok(());
        }
        for c in &mut self.children {
            c.align_inner(text, cursor)?;
        }
        let first = self.children.first().map(|c| c.span.start).unwrap_or(*cursor);
        let last = self.children.last().map(|c| c.span.end).unwrap_or(*cursor);
        self.span = Span::new(first, last);
        Ok(())
    }
}

fn unescape_token(token: &str) -> &str {
    match token {
        "-LRB-" => "(",
        "-RRB-" => ")",
        "-LSB-" => "[",
        "-RSB-" => "]",
        "-LCB-" => "{",
        "-RCB-" => "}",
        "``" | "''" => "\"",
        other => other,
    }
}

#[derive(Debug, PartialEq)]
enum Tok<'a> {
    Open(usize),
    Close(usize),
    Atom(usize, &'a str),
}

fn lex(text: &str) -> Vec<Tok<'_>> {
    let mut toks = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        if c == '(' || c == ')' || c.is_whitespace() {
            if let Some(s) = start.take() {
                toks.push(Tok::Atom(s, &text[s..i]));
            }
            match c {
                '(' => toks.push(Tok::Open(i)),
                ')' => toks.push(Tok::Close(i)),
                _ => {}
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        toks.push(Tok::Atom(s, &text[s..]));
    }
    toks
}

/// Parses a Penn-style bracketed tree such as `(NP (DT the) (NN dog))`.
///
/// Spans index the leaf tokens joined by single spaces. An unlabeled or `ROOT`
/// wrapper around a single tree is removed.
pub fn parse_bracketed(text: &str) -> Result<ParseTree, TreeError> {
    let toks = lex(text);
    let mut pos = 0;
    let mut offset = 0;
    let mut tree = parse_node(&toks, &mut pos, &mut offset, text.len())?;
    if pos < toks.len() {
        return Err(syntax(tok_pos(&toks[pos]), "trailing input after tree"));
    }
    while (tree.label.is_empty() || tree.label == "ROOT") && tree.children.len() == 1 {
        tree = tree.children.pop().expect("one child");
    }
    Ok(tree)
}

fn tok_pos(t: &Tok<'_>) -> usize {
    match t {
        Tok::Open(p) | Tok::Close(p) | Tok::Atom(p, _) => *p,
    }
}

fn syntax(position: usize, message: &str) -> TreeError {
    TreeError::Syntax { position, message: message.to_string() }
}

fn parse_node(
    toks: &[Tok<'_>],
    pos: &mut usize,
    offset: &mut usize,
    end: usize,
) -> Result<ParseTree, TreeError> {
    let open_at = match toks.get(*pos) {
        Some(Tok::Open(p)) => *p,
        Some(t) => return Err(syntax(tok_pos(t), "expected '('")),
        None => return Err(syntax(end, "empty tree")),
    };
    *pos += 1;
    let label = match toks.get(*pos) {
        Some(Tok::Atom(_, a)) => {
            *pos += 1;
            a.to_string()
        }
        Some(Tok::Open(_)) => String::new(),
        Some(Tok::Close(p)) => return Err(syntax(*p, "empty constituent")),
        None => return Err(syntax(end, "unbalanced brackets")),
    };
    // pre-terminal: (TAG word)
    if let Some(Tok::Atom(_, word)) = toks.get(*pos) {
        *pos += 1;
        match toks.get(*pos) {
            Some(Tok::Close(_)) => *pos += 1,
            Some(t) => return Err(syntax(tok_pos(t), "pre-terminal must hold a single token")),
            None => return Err(syntax(end, "unbalanced brackets")),
        }
        if *offset > 0 {
            *offset += 1;
        }
        let span = Span::new(*offset, *offset + word.len());
        *offset = span.end;
        return Ok(ParseTree { label, children: Vec::new(), token: Some(word.to_string()), span });
    }
    let mut children = Vec::new();
    loop {
        match toks.get(*pos) {
            Some(Tok::Close(_)) => {
                *pos += 1;
                break;
            }
            Some(Tok::Open(_)) => children.push(parse_node(toks, pos, offset, end)?),
            Some(t) => return Err(syntax(tok_pos(t), "unexpected token")),
            None => return Err(syntax(end, "unbalanced brackets")),
        }
    }
    if children.is_empty() {
        return Err(syntax(open_at, "empty constituent"));
    }
    let span = Span::new(children[0].span.start, children[children.len() - 1].span.end);
    Ok(ParseTree { label, children, token: None, span })
}
