//! Topological intent structures extracted from constituent trees.
//!
//! Four patterns are matched top-down:
//!
//! | pattern | tree shape          | phrase            | example                         |
//! |---------|---------------------|-------------------|---------------------------------|
//! | 1       | `VP → VB NP`        | verb              | Who *produces* Orangina?        |
//! | 2       | `VP → VB PP`        | verb + preposition| shows *created by* John Cleese  |
//! | 3       | `NP → NP PP`        | noun(s) + prep.   | the *mayor of* Berlin           |
//! | 4       | `SQ → VB NP VP`     | whole VP          | was Alberta *admitted as province* |
//!
//! Arguments resolve to a seed when they lie inside a detected mention, to the
//! answer node when they are the questioned constituent, and to a fresh variable
//! when they are themselves the head of a nested pattern. Subtrees inside a
//! mention are never searched.

mod tree;

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::entitylink::{MentionLink, Span};
use crate::lexsim;

pub use tree::{parse_bracketed, ParseTree, TreeError};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum IntentNode {
    Seed(MentionLink),
    Var(usize),
    Answer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Pattern {
    VerbObject = 1,
    VerbPreposition = 2,
    NounPreposition = 3,
    AuxSubjectVerb = 4,
}

/// Expected KB role of an edge's argument (`to`) node, consulted only when
/// traversal respects edge direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ArgumentRole {
    /// `the N of Y`: Y is the subject of the matching triple.
    Subject,
    /// passive agent `V by Y`: Y is the object of the matching triple.
    Object,
    Unspecified,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntentEdge {
    /// Head (the thing the phrase describes).
    pub from: NodeId,
    pub phrase: String,
    pub phrase_spans: Vec<Span>,
    /// Argument.
    pub to: NodeId,
    pub pattern: Pattern,
    pub role: ArgumentRole,
    /// Set when the phrase has no content word left after tokenization.
    pub empty_phrase: bool,
}

impl IntentEdge {
    pub fn other(&self, node: NodeId) -> NodeId {
        if self.from == node {
            self.to
        } else {
            self.from
        }
    }

    pub fn touches(&self, node: NodeId) -> bool {
        self.from == node || self.to == node
    }
}

/// Supported structure shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Shape {
    /// `ANSNODE – p – seed`
    Single,
    /// `ANSNODE – p1 – var – p2 – seed`
    Chain,
    /// `seed1 – p1 – ANSNODE – p2 – seed2`
    Triangle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntentStructure {
    pub nodes: Vec<IntentNode>,
    pub edges: Vec<IntentEdge>,
    /// Hop bound: the largest distance from any structure node to its nearest seed.
    pub k: usize,
    pub shape: Shape,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructureError {
    #[error("no topological pattern matched")]
    NoStructure,
    #[error("unsupported structure: {0}")]
    Unsupported(String),
}

impl IntentStructure {
    pub fn answer(&self) -> NodeId {
        self.nodes
            .iter()
            .position(|n| matches!(n, IntentNode::Answer))
            .expect("validated structure has an answer node")
    }

    pub fn seeds(&self) -> Vec<&MentionLink> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                IntentNode::Seed(m) => Some(m),
                _ => None,
            })
            .collect()
    }

    pub fn seed(&self, id: NodeId) -> Option<&MentionLink> {
        match &self.nodes[id] {
            IntentNode::Seed(m) => Some(m),
            _ => None,
        }
    }

    /// Edges incident to `node`, in edge order.
    pub fn edges_at(&self, node: NodeId) -> impl Iterator<Item = (usize, &IntentEdge)> {
        self.edges.iter().enumerate().filter(move |(_, e)| e.touches(node))
    }

    pub fn describe_node(&self, id: NodeId) -> String {
        match &self.nodes[id] {
            IntentNode::Answer => "ANSNODE".to_string(),
            IntentNode::Var(v) => format!("?v{v}"),
            IntentNode::Seed(m) => format!("\"{}\"", m.surface),
        }
    }

    /// Builds a structure directly, validating its shape and computing K.
    pub fn from_parts(nodes: Vec<IntentNode>, edges: Vec<IntentEdge>) -> Result<Self, StructureError> {
        if edges.is_empty() {
            return Err(StructureError::NoStructure);
        }
        let answers = nodes.iter().filter(|n| matches!(n, IntentNode::Answer)).count();
        if answers != 1 {
            return Err(StructureError::Unsupported(format!("{answers} answer nodes")));
        }
        let shape = classify(&nodes, &edges)?;
        let k = hop_bound(&nodes, &edges);
        Ok(IntentStructure { nodes, edges, k, shape })
    }
}

fn classify(nodes: &[IntentNode], edges: &[IntentEdge]) -> Result<Shape, StructureError> {
    let is_answer = |n: NodeId| matches!(nodes[n], IntentNode::Answer);
    let is_seed = |n: NodeId| matches!(nodes[n], IntentNode::Seed(_));
    let is_var = |n: NodeId| matches!(nodes[n], IntentNode::Var(_));
    let answer_edge = |e: &IntentEdge| is_answer(e.from) || is_answer(e.to);
    let unsupported = |msg: &str| StructureError::Unsupported(msg.to_string());
    if edges.iter().any(|e| e.from == e.to) {
        return Err(unsupported("self-loop edge"));
    }
    match edges {
        [e] => {
            if answer_edge(e) && is_seed(e.other(if is_answer(e.from) { e.from } else { e.to })) {
                Ok(Shape::Single)
            } else if !answer_edge(e) {
                Err(StructureError::NoStructure)
            } else {
                Err(unsupported("single edge without a seed entity"))
            }
        }
        [a, b] => {
            let ans = nodes.iter().position(|n| matches!(n, IntentNode::Answer)).expect("one answer");
            if a.touches(ans) && b.touches(ans) {
                let (sa, sb) = (a.other(ans), b.other(ans));
                if is_seed(sa) && is_seed(sb) && sa != sb {
                    return Ok(Shape::Triangle);
                }
                return Err(unsupported("two answer edges need two distinct seeds"));
            }
            let (near, far) = if a.touches(ans) { (a, b) } else if b.touches(ans) { (b, a) } else {
                return Err(StructureError::NoStructure);
            };
            let var = near.other(ans);
            if is_var(var) && far.touches(var) && is_seed(far.other(var)) {
                Ok(Shape::Chain)
            } else {
                Err(unsupported("two edges that form neither a chain nor a triangle"))
            }
        }
        _ => Err(unsupported("more than two edges")),
    }
}

fn hop_bound(nodes: &[IntentNode], edges: &[IntentEdge]) -> usize {
    let mut dist: Vec<Option<usize>> = vec![None; nodes.len()];
    let mut queue = VecDeque::new();
    for (i, n) in nodes.iter().enumerate() {
        if matches!(n, IntentNode::Seed(_)) {
            dist[i] = Some(0);
            queue.push_back(i);
        }
    }
    while let Some(n) = queue.pop_front() {
        let d = dist[n].expect("queued nodes have a distance");
        for e in edges.iter().filter(|e| e.touches(n)) {
            let m = e.other(n);
            if dist[m].is_none() {
                dist[m] = Some(d + 1);
                queue.push_back(m);
            }
        }
    }
    dist.into_iter().flatten().max().unwrap_or(0)
}

const COPULAS: &[&str] = &["'m", "'re", "'s", "am", "are", "be", "been", "being", "is", "was", "were"];
const IMPERATIVES: &[&str] = &["give", "list", "name", "show"];
const PHRASE_SKIP_TAGS: &[&str] = &["DT", "PDT", "PRP$", "WDT", "POS"];

fn is_verb(t: &ParseTree) -> bool {
    t.label.starts_with("VB")
}

fn is_np(t: &ParseTree) -> bool {
    matches!(t.label.as_str(), "NP" | "WHNP" | "NML" | "NX")
}

fn is_pp(t: &ParseTree) -> bool {
    matches!(t.label.as_str(), "PP" | "WHPP")
}

fn is_preposition(t: &ParseTree) -> bool {
    t.is_leaf() && matches!(t.label.as_str(), "IN" | "TO")
}

fn is_wh(t: &ParseTree) -> bool {
    t.label.starts_with("WH") || matches!(t.label.as_str(), "WP" | "WRB" | "WDT" | "WP$")
}

fn is_punct(t: &ParseTree) -> bool {
    t.is_leaf() && !t.label.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
}

fn is_clause_like(t: &ParseTree) -> bool {
    matches!(t.label.as_str(), "S" | "SQ" | "SBAR" | "SBARQ" | "SINV" | "VP" | "FRAG" | "UCP")
}

fn token_lower(t: &ParseTree) -> String {
    t.token.as_deref().unwrap_or("").to_lowercase()
}

fn content_children(t: &ParseTree) -> Vec<&ParseTree> {
    t.children.iter().filter(|c| !is_punct(c)).collect()
}

struct Builder<'a> {
    mentions: &'a [MentionLink],
    nodes: Vec<IntentNode>,
    edges: Vec<IntentEdge>,
    seed_nodes: BTreeMap<usize, NodeId>,
    answer: NodeId,
    next_var: usize,
}

impl<'a> Builder<'a> {
    fn new(mentions: &'a [MentionLink]) -> Self {
        Builder {
            mentions,
            nodes: vec![IntentNode::Answer],
            edges: Vec::new(),
            seed_nodes: BTreeMap::new(),
            answer: 0,
            next_var: 1,
        }
    }

    fn covering_mention(&self, span: Span) -> Option<usize> {
        self.mentions.iter().position(|m| m.span.contains(span))
    }

    fn overlaps_mention(&self, spans: &[Span]) -> bool {
        spans.iter().any(|s| self.mentions.iter().any(|m| m.span.overlaps(*s)))
    }

    fn seed(&mut self, mention: usize) -> NodeId {
        if let Some(&id) = self.seed_nodes.get(&mention) {
            return id;
        }
        self.nodes.push(IntentNode::Seed(self.mentions[mention].clone()));
        let id = self.nodes.len() - 1;
        self.seed_nodes.insert(mention, id);
        id
    }

    fn fresh_var(&mut self) -> NodeId {
        self.nodes.push(IntentNode::Var(self.next_var));
        self.next_var += 1;
        self.nodes.len() - 1
    }

    fn emit(&mut self, from: NodeId, leaves: &[&ParseTree], to: NodeId, pattern: Pattern, role: ArgumentRole) {
        let phrase = leaves.iter().filter_map(|l| l.token.as_deref()).collect::<Vec<_>>().join(" ");
        let phrase_spans = leaves.iter().map(|l| l.span).collect();
        let empty_phrase = lexsim::tokenize(&phrase).is_empty();
        self.edges.push(IntentEdge { from, phrase, phrase_spans, to, pattern, role, empty_phrase });
    }

    /// Resolves a constituent to a structure node. `head` is the node the
    /// constituent denotes when it is already known (copula complements,
    /// the questioned constituent).
    fn resolve(&mut self, t: &ParseTree, head: Option<NodeId>) -> Option<NodeId> {
        if let Some(m) = self.covering_mention(t.span) {
            return Some(self.seed(m));
        }
        let kids = content_children(t);
        if is_np(t) || t.label.starts_with("WH") {
            // pattern 3: NP → NP PP
            if let [inner, pp] = kids.as_slice() {
                if is_np(inner) && is_pp(pp) {
                    if let Some(x) = self.noun_preposition(inner, pp, head) {
                        return Some(x);
                    }
                }
            }
            // reduced relative / relative clause modifying a head noun phrase
            if let [inner, modifier] = kids.as_slice() {
                if is_np(inner) && matches!(modifier.label.as_str(), "VP" | "SBAR" | "S") {
                    let x = match self.resolve(inner, head) {
                        Some(x) => x,
                        None => self.fresh_var(),
                    };
                    self.clause(modifier, x);
                    return Some(x);
                }
            }
        }
        if t.is_leaf() && is_wh(t) {
            return Some(head.unwrap_or(self.answer));
        }
        let inside: Vec<usize> =
            (0..self.mentions.len()).filter(|&i| t.span.contains(self.mentions[i].span)).collect();
        if let [m] = inside.as_slice() {
            return Some(self.seed(*m));
        }
        head
    }

    fn noun_preposition(&mut self, inner: &ParseTree, pp: &ParseTree, head: Option<NodeId>) -> Option<NodeId> {
        let pp_kids = content_children(pp);
        let [prep, object] = pp_kids.as_slice() else {
            return None;
        };
        if !is_preposition(prep) {
            return None;
        }
        let mut words: Vec<&ParseTree> = inner
            .leaves()
            .into_iter()
            .filter(|l| !PHRASE_SKIP_TAGS.contains(&l.label.as_str()) && !is_punct(l))
            .collect();
        words.push(prep);
        let spans: Vec<Span> = words.iter().map(|l| l.span).collect();
        if self.overlaps_mention(&spans) {
            return None;
        }
        let arg = self.resolve(object, None)?;
        let x = head.unwrap_or_else(|| self.fresh_var());
        self.emit(x, &words, arg, Pattern::NounPreposition, ArgumentRole::Subject);
        Some(x)
    }

    /// Walks a clause whose grammatical subject is `subject`.
    fn clause(&mut self, t: &ParseTree, subject: NodeId) {
        if self.covering_mention(t.span).is_some() || t.is_leaf() {
            return;
        }
        let kids: Vec<&ParseTree> = content_children(t).into_iter().filter(|c| !is_wh(c)).collect();

        // pattern 4: SQ → VB NP VP
        if t.label == "SQ" {
            if let [verb, np, vp] = kids.as_slice() {
                if is_verb(verb) && is_np(np) && vp.label == "VP" {
                    let words: Vec<&ParseTree> = vp.leaves().into_iter().filter(|l| !is_punct(l)).collect();
                    let spans: Vec<Span> = words.iter().map(|l| l.span).collect();
                    if !words.is_empty() && !self.overlaps_mention(&spans) {
                        if let Some(arg) = self.resolve(np, None) {
                            self.emit(subject, &words, arg, Pattern::AuxSubjectVerb, ArgumentRole::Unspecified);
                            return;
                        }
                    }
                }
            }
        }

        if let Some(vi) = kids.iter().position(|k| is_verb(k) && k.is_leaf()) {
            let verb = kids[vi];
            let verb_overlaps = self.overlaps_mention(&[verb.span]);
            match kids.get(vi + 1) {
                Some(np) if is_np(np) && COPULAS.contains(&token_lower(verb).as_str()) => {
                    self.resolve(np, Some(subject));
                }
                Some(np) if is_np(np) && !verb_overlaps => {
                    // pattern 1: VP → VB NP
                    if let Some(arg) = self.resolve(np, None) {
                        if arg != subject {
                            self.emit(subject, &[verb], arg, Pattern::VerbObject, ArgumentRole::Unspecified);
                        }
                    }
                }
                Some(pp) if is_pp(pp) && !verb_overlaps => {
                    // pattern 2: VP → VB PP
                    let pp_kids = content_children(pp);
                    if let [prep, object] = pp_kids.as_slice() {
                        if is_preposition(prep) && !self.overlaps_mention(&[prep.span]) {
                            if let Some(arg) = self.resolve(object, None) {
                                let role = if token_lower(prep) == "by" {
                                    ArgumentRole::Object
                                } else {
                                    ArgumentRole::Unspecified
                                };
                                self.emit(subject, &[verb, prep], arg, Pattern::VerbPreposition, role);
                            }
                        }
                    }
                }
                Some(vp) if vp.label == "VP" => self.clause(vp, subject),
                _ => {}
            }
            return;
        }

        for k in kids {
            if is_clause_like(k) {
                self.clause(k, subject);
            }
        }
    }

    fn finish(self) -> Result<IntentStructure, StructureError> {
        let mut used: Vec<NodeId> = self.edges.iter().flat_map(|e| [e.from, e.to]).collect();
        used.sort_unstable();
        used.dedup();
        let remap: BTreeMap<NodeId, NodeId> = used.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let nodes: Vec<IntentNode> = used.iter().map(|&old| self.nodes[old].clone()).collect();
        let edges: Vec<IntentEdge> = self
            .edges
            .into_iter()
            .map(|mut e| {
                e.from = remap[&e.from];
                e.to = remap[&e.to];
                e
            })
            .collect();
        if !nodes.iter().any(|n| matches!(n, IntentNode::Answer)) {
            return Err(StructureError::NoStructure);
        }
        IntentStructure::from_parts(nodes, edges)
    }
}

/// The outermost WH constituent containing the first WH word, if any.
fn questioned_constituent(root: &ParseTree) -> Option<Vec<usize>> {
    fn find(t: &ParseTree, path: &mut Vec<usize>) -> bool {
        if t.is_leaf() {
            return is_wh(t);
        }
        for (i, c) in t.children.iter().enumerate() {
            path.push(i);
            if find(c, path) {
                return true;
            }
            path.pop();
        }
        false
    }
    let mut path = Vec::new();
    if !find(root, &mut path) {
        return None;
    }
    // climb while the parent is still a WH phrase
    let mut keep = path.len();
    let mut node_labels = Vec::with_capacity(path.len());
    let mut cur = root;
    for &i in &path {
        cur = &cur.children[i];
        node_labels.push(cur.label.clone());
    }
    while keep >= 2 && node_labels[keep - 2].starts_with("WH") {
        keep -= 1;
    }
    path.truncate(keep);
    Some(path)
}

fn subtree<'t>(root: &'t ParseTree, path: &[usize]) -> &'t ParseTree {
    path.iter().fold(root, |t, &i| &t.children[i])
}

/// Extracts the intent structure of a question.
///
/// `tree` spans and `mentions` spans must share one coordinate system, normally
/// the question text (see [`ParseTree::aligned`]).
pub fn extract_structure(tree: &ParseTree, mentions: &[MentionLink]) -> Result<IntentStructure, StructureError> {
    let mut b = Builder::new(mentions);
    let answer = b.answer;
    let leaves = tree.leaves();
    let first = leaves.iter().find(|l| !is_punct(l)).map(|l| token_lower(l)).unwrap_or_default();

    if IMPERATIVES.contains(&first.as_str()) {
        // Give me all X / List X: the last noun phrase of the command is requested.
        let mut vp = tree;
        while vp.label != "VP" {
            match content_children(vp).into_iter().find(|c| !c.is_leaf()) {
                Some(c) => vp = c,
                None => break,
            }
        }
        if let Some(target) = content_children(vp).into_iter().rfind(|c| is_np(c)) {
            b.resolve(target, Some(answer));
        }
    } else if let Some(path) = questioned_constituent(tree) {
        let wh = subtree(tree, &path);
        b.resolve(wh, Some(answer));
        b.clause(tree, answer);
    } else {
        b.clause(tree, answer);
    }
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kbstore::Iri;

    fn mention(q: &str, surface: &str, iri: &str) -> MentionLink {
        let start = q.find(surface).unwrap();
        MentionLink {
            span: Span::new(start, start + surface.len()),
            surface: surface.to_string(),
            entity: Iri::new(iri).unwrap(),
            confidence: 0.9,
        }
    }

    fn structure(q: &str, tree: &str, mentions: &[(&str, &str)]) -> Result<IntentStructure, StructureError> {
        let t = parse_bracketed(tree).unwrap().aligned(q).unwrap();
        let links: Vec<_> = mentions.iter().map(|(s, i)| mention(q, s, i)).collect();
        extract_structure(&t, &links)
    }

    #[test]
    fn answer_node_only_question_is_rejected() {
        let q = "Who is Angela Merkel?";
        let r = structure(
            q,
            "(SBARQ (WHNP (WP Who)) (SQ (VBZ is) (NP (NNP Angela) (NNP Merkel))) (. ?))",
            &[("Angela Merkel", "res:Angela_Merkel")],
        );
        assert_eq!(r.unwrap_err(), StructureError::NoStructure);
    }

    #[test]
    fn unresolved_argument_yields_no_structure() {
        let q = "Who is the mayor of the city?";
        let r = structure(
            q,
            "(SBARQ (WHNP (WP Who)) (SQ (VBZ is) (NP (NP (DT the) (NN mayor)) (PP (IN of) (NP (DT the) (NN city))))) (. ?))",
            &[],
        );
        assert_eq!(r.unwrap_err(), StructureError::NoStructure);
    }

    #[test]
    fn imperative_list() {
        let q = "List the children of Margaret Thatcher.";
        let s = structure(
            q,
            "(S (VP (VB List) (NP (NP (DT the) (NNS children)) (PP (IN of) (NP (NNP Margaret) (NNP Thatcher))))) (. .))",
            &[("Margaret Thatcher", "res:Margaret_Thatcher")],
        )
        .unwrap();
        assert_eq!(s.edges.len(), 1);
        assert_eq!(s.edges[0].phrase, "children of");
        assert_eq!(s.nodes[s.edges[0].from], IntentNode::Answer);
    }

    #[test]
    fn give_me_all_with_coordinated_relative_clause_is_a_triangle() {
        let q = "Give me all people that were born in Vienna and died in Berlin.";
        let s = structure(
            q,
            "(S (VP (VB Give) (NP (PRP me)) (NP (NP (DT all) (NNS people)) (SBAR (WHNP (WDT that)) (S (VP (VP (VBD were) (VP (VBN born) (PP (IN in) (NP (NNP Vienna))))) (CC and) (VP (VBD died) (PP (IN in) (NP (NNP Berlin))))))))) (. .))",
            &[("Vienna", "res:Vienna"), ("Berlin", "res:Berlin")],
        )
        .unwrap();
        assert_eq!(s.shape, Shape::Triangle);
        let phrases: Vec<_> = s.edges.iter().map(|e| e.phrase.as_str()).collect();
        assert_eq!(phrases, ["born in", "died in"]);
        assert_eq!(s.k, 1);
    }

    #[test]
    fn three_edges_are_unsupported() {
        let q = "Who are the parents of the wife of the son of Juan Carlos I?";
        let r = structure(
            q,
            "(SBARQ (WHNP (WP Who)) (SQ (VBP are) (NP (NP (DT the) (NNS parents)) (PP (IN of) (NP (NP (DT the) (NN wife)) (PP (IN of) (NP (NP (DT the) (NN son)) (PP (IN of) (NP (NNP Juan) (NNP Carlos) (NNP I))))))))) (. ?))",
            &[("Juan Carlos I", "res:Juan_Carlos_I")],
        );
        assert!(matches!(r, Err(StructureError::Unsupported(_))));
    }

    #[test]
    fn from_parts_validates_shapes() {
        let q = "x y";
        let m = |s| mention(q, s, "res:X");
        let edge = |from, to| IntentEdge {
            from,
            phrase: "p".into(),
            phrase_spans: vec![],
            to,
            pattern: Pattern::VerbObject,
            role: ArgumentRole::Unspecified,
            empty_phrase: false,
        };
        let single = IntentStructure::from_parts(vec![IntentNode::Answer, IntentNode::Seed(m("x"))], vec![edge(0, 1)]).unwrap();
        assert_eq!((single.shape, single.k), (Shape::Single, 1));
        let chain = IntentStructure::from_parts(
            vec![IntentNode::Answer, IntentNode::Var(1), IntentNode::Seed(m("x"))],
            vec![edge(0, 1), edge(1, 2)],
        )
        .unwrap();
        assert_eq!((chain.shape, chain.k), (Shape::Chain, 2));
        let dangling = IntentStructure::from_parts(vec![IntentNode::Answer, IntentNode::Var(1)], vec![edge(0, 1)]);
        assert!(dangling.is_err());
        let same_seed = IntentStructure::from_parts(
            vec![IntentNode::Answer, IntentNode::Seed(m("x"))],
            vec![edge(0, 1), edge(0, 1)],
        );
        assert!(same_seed.is_err());
    }
}
