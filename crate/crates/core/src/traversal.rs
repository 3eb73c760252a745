//! Subgraph construction and joint path ranking.
//!
//! A path binds every structure edge to one KB predicate. Its score is the mean of
//! the per-step predicate scores plus the type score of the answers it reaches:
//!
//! ```text
//! total = (1/m) · Σ predicate_score_i + type_score
//! ```
//!
//! Steps are taken on the undirected subgraph unless direction is respected, and
//! every step must clear the threshold `tau`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::config::ClassMap;
use crate::focus::{type_score, Focus};
use crate::intent::{ArgumentRole, IntentNode, IntentStructure, NodeId, Shape};
use crate::kbstore::{Direction, Iri, KnowledgeBase, Neighbor, Term, Triple};
use crate::lexsim::{self, SimilarityLexicon};

pub const DEFAULT_TAU: f64 = 0.3;
pub const DEFAULT_BEAM: usize = 5;
pub const DEFAULT_MAX_K: usize = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TraversalError {
    #[error("seed {0} does not occur in the knowledge base")]
    UnknownSeed(Iri),
    #[error("no seed entities given")]
    NoSeeds,
    #[error("hop bound must be at least 1")]
    ZeroHops,
    #[error("structure needs {needed} hops but the cap is {cap}")]
    TooDeep { needed: usize, cap: usize },
    #[error("no candidate path survives the threshold and structure matching")]
    NoPath,
    #[error("invalid ranker configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankerConfig {
    pub tau: f64,
    /// Candidate predicates kept per step and frontier node; `usize::MAX` disables the beam.
    pub beam: usize,
    pub max_k: usize,
    pub respect_direction: bool,
    pub excluded_predicates: BTreeSet<Iri>,
    pub classes: ClassMap,
}

impl Default for RankerConfig {
    fn default() -> Self {
        RankerConfig {
            tau: DEFAULT_TAU,
            beam: DEFAULT_BEAM,
            max_k: DEFAULT_MAX_K,
            respect_direction: false,
            excluded_predicates: BTreeSet::new(),
            classes: ClassMap::default(),
        }
    }
}

impl RankerConfig {
    pub fn validate(&self) -> Result<(), TraversalError> {
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(TraversalError::Config(format!("tau {} outside [0, 1]", self.tau)));
        }
        if self.beam == 0 {
            return Err(TraversalError::Config("beam must be at least 1".into()));
        }
        if self.max_k == 0 {
            return Err(TraversalError::Config("max K must be at least 1".into()));
        }
        Ok(())
    }
}

/// The K-layer neighbourhood of a set of seeds.
#[derive(Debug, Clone)]
pub struct Subgraph {
    layers: BTreeMap<Term, usize>,
    edges: BTreeSet<Triple>,
    adjacency: HashMap<Term, Vec<Neighbor>>,
    k: usize,
}

impl Subgraph {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn layer(&self, node: &Term) -> Option<usize> {
        self.layers.get(node).copied()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&Term, usize)> {
        self.layers.iter().map(|(t, &l)| (t, l))
    }

    pub fn edges(&self) -> impl Iterator<Item = &Triple> {
        self.edges.iter()
    }

    pub fn contains_edge(&self, t: &Triple) -> bool {
        self.edges.contains(t)
    }

    /// Subgraph edges incident to `node`, sorted like [`KnowledgeBase::neighbors`].
    pub fn neighbors(&self, node: &Term) -> &[Neighbor] {
        self.adjacency.get(node).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Breadth-first, undirected expansion from every seed to depth `k`, merged into
/// one subgraph. Literals are reached but never expanded.
pub fn build_subgraph(kb: &KnowledgeBase, seeds: &[Iri], k: usize) -> Result<Subgraph, TraversalError> {
    build_subgraph_excluding(kb, seeds, k, &BTreeSet::new())
}

/// [`build_subgraph`] ignoring edges whose predicate is in `excluded`.
pub fn build_subgraph_excluding(
    kb: &KnowledgeBase,
    seeds: &[Iri],
    k: usize,
    excluded: &BTreeSet<Iri>,
) -> Result<Subgraph, TraversalError> {
    if seeds.is_empty() {
        return Err(TraversalError::NoSeeds);
    }
    if k == 0 {
        return Err(TraversalError::ZeroHops);
    }
    let mut layers = BTreeMap::new();
    let mut queue = VecDeque::new();
    for seed in seeds {
        let term = Term::Iri(seed.clone());
        if !kb.contains(&term) {
            return Err(TraversalError::UnknownSeed(seed.clone()));
        }
        if layers.insert(term.clone(), 0).is_none() {
            queue.push_back(term);
        }
    }
    let mut edges = BTreeSet::new();
    while let Some(node) = queue.pop_front() {
        let layer = layers[&node];
        if layer >= k || node.is_literal() {
            continue;
        }
        for n in kb.neighbors(&node) {
            if excluded.contains(&n.predicate) {
                continue;
            }
            edges.insert(n.triple_from(&node).expect("non-literal endpoint"));
            if !layers.contains_key(&n.other) {
                layers.insert(n.other.clone(), layer + 1);
                queue.push_back(n.other.clone());
            }
        }
    }
    let mut adjacency: HashMap<Term, Vec<Neighbor>> = HashMap::new();
    for t in &edges {
        let subject = Term::Iri(t.subject.clone());
        adjacency.entry(subject.clone()).or_default().push(Neighbor {
            predicate: t.predicate.clone(),
            other: t.object.clone(),
            direction: Direction::Out,
        });
        adjacency.entry(t.object.clone()).or_default().push(Neighbor {
            predicate: t.predicate.clone(),
            other: subject,
            direction: Direction::In,
        });
    }
    for list in adjacency.values_mut() {
        list.sort();
    }
    Ok(Subgraph { layers, edges, adjacency, k })
}

/// Mean over the label's content words of each word's best similarity to any phrase word.
pub fn label_score(label: &str, phrase_words: &[String], lex: &SimilarityLexicon) -> f64 {
    let label_words = lexsim::tokenize(label);
    if label_words.is_empty() || phrase_words.is_empty() {
        return 0.0;
    }
    let sum: f64 = label_words
        .iter()
        .map(|w| {
            phrase_words
                .iter()
                .map(|tw| lex.word_similarity(w, tw).unwrap_or(0.0))
                .fold(0.0, f64::max)
        })
        .sum();
    sum / label_words.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredicateScore {
    pub score: f64,
    /// The phrase (and extra phrase) had no content words, so the score is 0 by default.
    pub empty_phrase: bool,
}

/// Best label score of predicate `p` against `phrase`; with `extra_phrase`, the
/// better of the two phrases.
pub fn predicate_score(
    kb: &KnowledgeBase,
    p: &Iri,
    phrase: &str,
    lex: &SimilarityLexicon,
    extra_phrase: Option<&str>,
) -> PredicateScore {
    let labels = kb.labels_of(p);
    let best = |text: &str| -> Option<f64> {
        let words = lexsim::tokenize(text);
        if words.is_empty() {
            return None;
        }
        Some(labels.iter().map(|l| label_score(l, &words, lex)).fold(0.0, f64::max))
    };
    let main = best(phrase);
    let extra = extra_phrase.and_then(best);
    match (main, extra) {
        (None, None) => PredicateScore { score: 0.0, empty_phrase: true },
        (a, b) => PredicateScore { score: a.unwrap_or(0.0).max(b.unwrap_or(0.0)), empty_phrase: false },
    }
}

/// Orientation of a bound step, seen from the end nearer the seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum StepDirection {
    Undirected,
    /// The near end is the triple's subject.
    Forward,
    /// The near end is the triple's object.
    Backward,
}

impl StepDirection {
    fn of(d: Direction) -> Self {
        match d {
            Direction::Out => StepDirection::Forward,
            Direction::In => StepDirection::Backward,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathStep {
    /// Index of the structure edge this step binds.
    pub edge: usize,
    pub predicate: Iri,
    pub direction: StepDirection,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidatePath {
    /// One step per structure edge, in structure edge order.
    pub steps: Vec<PathStep>,
    /// Variable nodes and the KB node each is bound to.
    pub bindings: Vec<(NodeId, Term)>,
    /// KB nodes bound to the answer node, sorted.
    pub answers: Vec<Term>,
    pub predicate_mean: f64,
    pub type_score: f64,
    pub total: f64,
}

impl CandidatePath {
    fn predicates(&self) -> impl Iterator<Item = &Iri> {
        self.steps.iter().map(|s| &s.predicate)
    }

    /// The ranking order: total descending, then predicate IRIs, answers, bindings
    /// and directions ascending.
    pub fn rank_cmp(&self, other: &Self) -> Ordering {
        other
            .total
            .total_cmp(&self.total)
            .then_with(|| self.predicates().cmp(other.predicates()))
            .then_with(|| self.answers.cmp(&other.answers))
            .then_with(|| self.bindings.cmp(&other.bindings))
            .then_with(|| {
                let d = |p: &Self| p.steps.iter().map(|s| s.direction).collect::<Vec<_>>();
                d(self).cmp(&d(other))
            })
    }
}

/// Mean of step scores in step order.
pub fn mean_score(steps: &[PathStep]) -> f64 {
    steps.iter().map(|s| s.score).sum::<f64>() / steps.len() as f64
}

struct StepChoice {
    predicate: Iri,
    direction: StepDirection,
    score: f64,
    targets: Vec<Term>,
}

struct Ranker<'a> {
    kb: &'a KnowledgeBase,
    sub: &'a Subgraph,
    structure: &'a IntentStructure,
    focus: &'a Focus,
    lex: &'a SimilarityLexicon,
    cfg: &'a RankerConfig,
    memo: HashMap<(usize, Iri), f64>,
}

impl Ranker<'_> {
    fn edge_score(&mut self, edge: usize, p: &Iri) -> f64 {
        if let Some(&s) = self.memo.get(&(edge, p.clone())) {
            return s;
        }
        let e = &self.structure.edges[edge];
        let adjacent_to_answer = [e.from, e.to].contains(&self.structure.answer());
        let extra = if adjacent_to_answer { self.focus.extra_phrase() } else { None };
        let s = predicate_score(self.kb, p, &e.phrase, self.lex, extra).score;
        self.memo.insert((edge, p.clone()), s);
        s
    }

    /// Direction a step from `origin_node` along `edge` must take, if constrained.
    fn required_direction(&self, edge: usize, origin_node: NodeId) -> Option<Direction> {
        if !self.cfg.respect_direction {
            return None;
        }
        let e = &self.structure.edges[edge];
        let from_argument = e.to == origin_node;
        match (e.role, from_argument) {
            (ArgumentRole::Unspecified, _) => None,
            (ArgumentRole::Subject, true) | (ArgumentRole::Object, false) => Some(Direction::Out),
            (ArgumentRole::Subject, false) | (ArgumentRole::Object, true) => Some(Direction::In),
        }
    }

    /// Scored predicate candidates leaving `origin` along structure edge `edge`,
    /// limited to the beam and filtered by tau.
    fn choices(
        &mut self,
        origin: &Term,
        origin_node: NodeId,
        edge: usize,
        exclude: &[&Term],
        targets_must_be_iris: bool,
    ) -> Vec<StepChoice> {
        let required = self.required_direction(edge, origin_node);
        let mut grouped: BTreeMap<(Iri, StepDirection), BTreeSet<Term>> = BTreeMap::new();
        for n in self.sub.neighbors(origin) {
            if exclude.contains(&&n.other) || (targets_must_be_iris && n.other.is_literal()) {
                continue;
            }
            if required.is_some_and(|d| d != n.direction) {
                continue;
            }
            let direction =
                if self.cfg.respect_direction { StepDirection::of(n.direction) } else { StepDirection::Undirected };
            grouped.entry((n.predicate.clone(), direction)).or_default().insert(n.other.clone());
        }
        let mut choices: Vec<StepChoice> = grouped
            .into_iter()
            .map(|((predicate, direction), targets)| {
                let score = self.edge_score(edge, &predicate);
                StepChoice { predicate, direction, score, targets: targets.into_iter().collect() }
            })
            .collect();
        choices.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| a.predicate.cmp(&b.predicate))
                .then_with(|| a.direction.cmp(&b.direction))
        });
        choices.truncate(self.cfg.beam);
        choices.retain(|c| c.score >= self.cfg.tau);
        choices
    }

    fn finish_path(&self, mut steps: Vec<PathStep>, bindings: Vec<(NodeId, Term)>, answers: Vec<Term>) -> CandidatePath {
        steps.sort_by_key(|s| s.edge);
        let predicate_mean = mean_score(&steps);
        let ts = type_score(self.kb, &answers, self.focus, self.lex, &self.cfg.classes);
        CandidatePath { steps, bindings, answers, predicate_mean, type_score: ts, total: predicate_mean + ts }
    }

    fn seed_term(&self, node: NodeId) -> Term {
        Term::Iri(self.structure.seed(node).expect("seed node").entity.clone())
    }

    fn single(&mut self) -> Vec<CandidatePath> {
        let e = &self.structure.edges[0];
        let ans = self.structure.answer();
        let seed_node = e.other(ans);
        let seed = self.seed_term(seed_node);
        self.choices(&seed, seed_node, 0, &[&seed], false)
            .into_iter()
            .map(|c| {
                let step = PathStep { edge: 0, predicate: c.predicate, direction: c.direction, score: c.score };
                self.finish_path(vec![step], Vec::new(), c.targets)
            })
            .collect()
    }

    fn chain(&mut self) -> Vec<CandidatePath> {
        let ans = self.structure.answer();
        let (near, _) = self.structure.edges_at(ans).next().expect("answer edge");
        let var_node = self.structure.edges[near].other(ans);
        let far = (0..self.structure.edges.len()).find(|&i| i != near).expect("two edges");
        let seed_node = self.structure.edges[far].other(var_node);
        let seed = self.seed_term(seed_node);

        let mut paths = Vec::new();
        for c2 in self.choices(&seed, seed_node, far, &[&seed], true) {
            for var in &c2.targets {
                for c1 in self.choices(var, var_node, near, &[&seed, var], false) {
                    let steps = vec![
                        PathStep { edge: far, predicate: c2.predicate.clone(), direction: c2.direction, score: c2.score },
                        PathStep { edge: near, predicate: c1.predicate, direction: c1.direction, score: c1.score },
                    ];
                    paths.push(self.finish_path(steps, vec![(var_node, var.clone())], c1.targets));
                }
            }
        }
        paths
    }

    fn triangle(&mut self) -> Vec<CandidatePath> {
        let ans = self.structure.answer();
        let edges: Vec<usize> = self.structure.edges_at(ans).map(|(i, _)| i).collect();
        let (ea, eb) = (edges[0], edges[1]);
        let (na, nb) = (self.structure.edges[ea].other(ans), self.structure.edges[eb].other(ans));
        let (sa, sb) = (self.seed_term(na), self.seed_term(nb));
        let left = self.choices(&sa, na, ea, &[&sa, &sb], false);
        let right = self.choices(&sb, nb, eb, &[&sa, &sb], false);
        let mut paths = Vec::new();
        for a in &left {
            for b in &right {
                let common: Vec<Term> = a.targets.iter().filter(|t| b.targets.binary_search(t).is_ok()).cloned().collect();
                if common.is_empty() {
                    continue;
                }
                let steps = vec![
                    PathStep { edge: ea, predicate: a.predicate.clone(), direction: a.direction, score: a.score },
                    PathStep { edge: eb, predicate: b.predicate.clone(), direction: b.direction, score: b.score },
                ];
                paths.push(self.finish_path(steps, Vec::new(), common));
            }
        }
        paths
    }
}

/// Enumerates structure-conforming paths in `sub` and ranks them best first.
pub fn enumerate_and_rank(
    kb: &KnowledgeBase,
    sub: &Subgraph,
    structure: &IntentStructure,
    focus: &Focus,
    lex: &SimilarityLexicon,
    cfg: &RankerConfig,
) -> Result<Vec<CandidatePath>, TraversalError> {
    cfg.validate()?;
    if structure.k > cfg.max_k {
        return Err(TraversalError::TooDeep { needed: structure.k, cap: cfg.max_k });
    }
    debug_assert!(structure.nodes.iter().filter(|n| matches!(n, IntentNode::Answer)).count() == 1);
    let mut ranker = Ranker { kb, sub, structure, focus, lex, cfg, memo: HashMap::new() };
    let mut paths = match structure.shape {
        Shape::Single => ranker.single(),
        Shape::Chain => ranker.chain(),
        Shape::Triangle => ranker.triangle(),
    };
    if paths.is_empty() {
        return Err(TraversalError::NoPath);
    }
    paths.sort_by(CandidatePath::rank_cmp);
    Ok(paths)
}

/// Seed IRIs of a structure, in node order.
pub fn structure_seeds(structure: &IntentStructure) -> Vec<Iri> {
    let mut seeds: Vec<Iri> = structure.seeds().into_iter().map(|m| m.entity.clone()).collect();
    seeds.dedup();
    seeds
}
