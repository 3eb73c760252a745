//! Brute-force reference for path enumeration and scoring, written without the
//! ranker's data structures: distances are recomputed by sweeping the triple list,
//! every structure-conforming binding is enumerated, and scores are evaluated
//! straight from the formulas.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use kgqa::config::ClassMap;
use kgqa::focus::Focus;
use kgqa::intent::{ArgumentRole, IntentEdge, IntentNode, IntentStructure, NodeId, Shape};
use kgqa::kbstore::{Iri, KnowledgeBase, Term, Triple};
use kgqa::lexsim::{tokenize, SimilarityLexicon};
use kgqa::traversal::{CandidatePath, StepDirection};

#[derive(Debug, Clone, PartialEq)]
pub struct RefPath {
    /// (structure edge, predicate, direction, score), by edge index.
    pub steps: Vec<(usize, Iri, StepDirection, f64)>,
    pub bindings: Vec<(NodeId, Term)>,
    pub answers: Vec<Term>,
    pub total: f64,
}

pub fn canonical(p: &CandidatePath) -> RefPath {
    RefPath {
        steps: p.steps.iter().map(|s| (s.edge, s.predicate.clone(), s.direction, s.score)).collect(),
        bindings: p.bindings.clone(),
        answers: p.answers.clone(),
        total: p.total,
    }
}

pub struct Oracle<'a> {
    pub kb: &'a KnowledgeBase,
    pub lex: &'a SimilarityLexicon,
    pub classes: &'a ClassMap,
    pub tau: f64,
    pub respect_direction: bool,
}

fn label_score(lex: &SimilarityLexicon, label: &str, words: &[String]) -> f64 {
    let label_words = tokenize(label);
    if label_words.is_empty() || words.is_empty() {
        return 0.0;
    }
    let mut sum = 0.0;
    for lw in &label_words {
        let mut best: f64 = 0.0;
        for w in words {
            best = best.max(lex.word_similarity(lw, w).unwrap());
        }
        sum += best;
    }
    sum / label_words.len() as f64
}

impl Oracle<'_> {
    fn phrase_score(&self, p: &Iri, phrase: &str) -> Option<f64> {
        let words = tokenize(phrase);
        if words.is_empty() {
            return None;
        }
        let mut best: f64 = 0.0;
        for l in self.kb.labels_of(p) {
            best = best.max(label_score(self.lex, &l, &words));
        }
        Some(best)
    }

    pub fn predicate_score(&self, p: &Iri, phrase: &str, extra: Option<&str>) -> f64 {
        let a = self.phrase_score(p, phrase).unwrap_or(0.0);
        let b = extra.and_then(|x| self.phrase_score(p, x)).unwrap_or(0.0);
        a.max(b)
    }

    pub fn type_score(&self, answers: &[Term], focus: &Focus) -> f64 {
        if answers.is_empty() || (focus.phrase.is_empty() && focus.coarse_types.is_empty()) {
            return 0.0;
        }
        let head = tokenize(&focus.headword);
        if focus.coarse_types.is_empty() && head.is_empty() {
            return 0.0;
        }
        let mut sum = 0.0;
        for a in answers {
            let types = self.kb.types_of(a);
            let s = if !focus.coarse_types.is_empty() {
                let hit = focus.coarse_types.iter().any(|&c| self.classes.classes(c).any(|cls| types.contains(cls)));
                if hit {
                    1.0
                } else {
                    0.0
                }
            } else {
                let mut best: f64 = 0.0;
                for t in &types {
                    for l in self.kb.labels_of(t) {
                        best = best.max(label_score(self.lex, &l, &head));
                    }
                }
                best
            };
            sum += s;
        }
        sum / answers.len() as f64
    }

    /// Hop distances from the seeds, never stepping out of a literal.
    fn distances(&self, seeds: &[Term], k: usize) -> HashMap<Term, usize> {
        let mut dist: HashMap<Term, usize> = seeds.iter().map(|s| (s.clone(), 0)).collect();
        for d in 0..k {
            let mut next = Vec::new();
            for t in self.kb.triples() {
                let s = Term::Iri(t.subject.clone());
                if dist.get(&s) == Some(&d) && !dist.contains_key(&t.object) {
                    next.push(t.object.clone());
                }
                if !t.object.is_literal() && dist.get(&t.object) == Some(&d) && !dist.contains_key(&s) {
                    next.push(s);
                }
            }
            for n in next {
                dist.entry(n).or_insert(d + 1);
            }
        }
        dist
    }

    fn subgraph_triples(&self, seeds: &[Term], k: usize) -> Vec<Triple> {
        let dist = self.distances(seeds, k);
        let inner = |t: &Term| !t.is_literal() && dist.get(t).is_some_and(|&d| d < k);
        self.kb
            .triples()
            .filter(|t| inner(&Term::Iri(t.subject.clone())) || inner(&t.object))
            .cloned()
            .collect()
    }

    fn allowed(&self, e: &IntentEdge, walk_from: NodeId, from_is_subject: bool) -> bool {
        if !self.respect_direction {
            return true;
        }
        let argument_is_subject = if e.to == walk_from { from_is_subject } else { !from_is_subject };
        match e.role {
            ArgumentRole::Subject => argument_is_subject,
            ArgumentRole::Object => !argument_is_subject,
            ArgumentRole::Unspecified => true,
        }
    }

    fn direction(&self, from_is_subject: bool) -> StepDirection {
        match (self.respect_direction, from_is_subject) {
            (false, _) => StepDirection::Undirected,
            (true, true) => StepDirection::Forward,
            (true, false) => StepDirection::Backward,
        }
    }

    pub fn rank(&self, s: &IntentStructure, focus: &Focus) -> Vec<RefPath> {
        let ans = s.nodes.iter().position(|n| *n == IntentNode::Answer).unwrap();
        let seed_term = |n: NodeId| match &s.nodes[n] {
            IntentNode::Seed(m) => Term::Iri(m.entity.clone()),
            other => panic!("not a seed: {other:?}"),
        };
        let seeds: Vec<Term> = (0..s.nodes.len()).filter(|&n| matches!(s.nodes[n], IntentNode::Seed(_))).map(seed_term).collect();
        let sub = self.subgraph_triples(&seeds, s.k);
        // (predicate, neighbour, node is subject)
        let incident = |x: &Term| -> Vec<(Iri, Term, bool)> {
            let mut v = Vec::new();
            for t in &sub {
                if Term::Iri(t.subject.clone()) == *x {
                    v.push((t.predicate.clone(), t.object.clone(), true));
                }
                if t.object == *x {
                    v.push((t.predicate.clone(), Term::Iri(t.subject.clone()), false));
                }
            }
            v
        };
        let extra = |e: &IntentEdge| if e.touches(ans) { focus.extra_phrase() } else { None };
        let score = |i: usize, p: &Iri| self.predicate_score(p, &s.edges[i].phrase, extra(&s.edges[i]));

        let mut out = Vec::new();
        let mut emit = |mut steps: Vec<(usize, Iri, StepDirection, f64)>, bindings: Vec<(NodeId, Term)>, answers: BTreeSet<Term>| {
            if steps.iter().any(|st| st.3 < self.tau) {
                return;
            }
            steps.sort_by_key(|st| st.0);
            let mut sum = 0.0;
            for st in &steps {
                sum += st.3;
            }
            let answers: Vec<Term> = answers.into_iter().collect();
            let total = sum / steps.len() as f64 + self.type_score(&answers, focus);
            out.push(RefPath { steps, bindings, answers, total });
        };

        match s.shape {
            Shape::Single => {
                let seed_node = s.edges[0].other(ans);
                let seed = seed_term(seed_node);
                let mut groups: BTreeMap<(Iri, StepDirection), BTreeSet<Term>> = BTreeMap::new();
                for (p, other, subj) in incident(&seed) {
                    if other != seed && self.allowed(&s.edges[0], seed_node, subj) {
                        groups.entry((p, self.direction(subj))).or_default().insert(other);
                    }
                }
                for ((p, d), answers) in groups {
                    let sc = score(0, &p);
                    emit(vec![(0, p, d, sc)], vec![], answers);
                }
            }
            Shape::Chain => {
                let near = (0..2).find(|&i| s.edges[i].touches(ans)).unwrap();
                let far = 1 - near;
                let var_node = s.edges[near].other(ans);
                let seed_node = s.edges[far].other(var_node);
                let seed = seed_term(seed_node);
                let mut groups: BTreeMap<(Iri, StepDirection, Term, Iri, StepDirection), BTreeSet<Term>> = BTreeMap::new();
                for (p2, v, subj2) in incident(&seed) {
                    if v == seed || v.is_literal() || !self.allowed(&s.edges[far], seed_node, subj2) {
                        continue;
                    }
                    for (p1, a, subj1) in incident(&v) {
                        if a == seed || a == v || !self.allowed(&s.edges[near], var_node, subj1) {
                            continue;
                        }
                        let key = (p2.clone(), self.direction(subj2), v.clone(), p1, self.direction(subj1));
                        groups.entry(key).or_default().insert(a);
                    }
                }
                for ((p2, d2, v, p1, d1), answers) in groups {
                    let (s2, s1) = (score(far, &p2), score(near, &p1));
                    emit(vec![(far, p2, d2, s2), (near, p1, d1, s1)], vec![(var_node, v)], answers);
                }
            }
            Shape::Triangle => {
                let ea = (0..2).find(|&i| s.edges[i].touches(ans)).unwrap();
                let eb = 1 - ea;
                let (na, nb) = (s.edges[ea].other(ans), s.edges[eb].other(ans));
                let (sa, sb) = (seed_term(na), seed_term(nb));
                let mut groups: BTreeMap<(Iri, StepDirection, Iri, StepDirection), BTreeSet<Term>> = BTreeMap::new();
                for (pa, a, subja) in incident(&sa) {
                    if a == sa || a == sb || !self.allowed(&s.edges[ea], na, subja) {
                        continue;
                    }
                    for (pb, b, subjb) in incident(&sb) {
                        if b == a && self.allowed(&s.edges[eb], nb, subjb) {
                            let key = (pa.clone(), self.direction(subja), pb, self.direction(subjb));
                            groups.entry(key).or_default().insert(a.clone());
                        }
                    }
                }
                for ((pa, da, pb, db), answers) in groups {
                    let (x, y) = (score(ea, &pa), score(eb, &pb));
                    emit(vec![(ea, pa, da, x), (eb, pb, db, y)], vec![], answers);
                }
            }
        }
        out.sort_by(order);
        out
    }
}

fn order(a: &RefPath, b: &RefPath) -> Ordering {
    let preds = |p: &RefPath| p.steps.iter().map(|s| s.1.clone()).collect::<Vec<_>>();
    let dirs = |p: &RefPath| p.steps.iter().map(|s| s.2).collect::<Vec<_>>();
    b.total
        .partial_cmp(&a.total)
        .unwrap()
        .then_with(|| preds(a).cmp(&preds(b)))
        .then_with(|| a.answers.cmp(&b.answers))
        .then_with(|| a.bindings.cmp(&b.bindings))
        .then_with(|| dirs(a).cmp(&dirs(b)))
}
