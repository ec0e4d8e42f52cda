//! Brute-force enumeration used to cross-check the constructions.
//!
//! Everything here is deliberately naive: explicit word lists, set
//! fixpoints and breadth-first searches, sharing no code with the
//! constructions they are meant to validate.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::automata::{Nfa, Word};
use crate::error::Result;
use crate::filters::FilterSpec;
use crate::grammar::{Cfg, Sym};

/// All words over `0..k` of length at most `max_len`, shortest first.
pub fn words(k: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut all = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * k);
        for w in &layer {
            for a in 0..k {
                let mut v = w.clone();
                v.push(a);
                next.push(v);
            }
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    all
}

pub fn words_named(alphabet: &[String], max_len: usize) -> Vec<Word> {
    words(alphabet.len(), max_len)
        .into_iter()
        .map(|w| w.into_iter().map(|a| alphabet[a].clone()).collect())
        .collect()
}

fn eps_closure(a: &Nfa, set: &mut BTreeSet<usize>) {
    let mut stack: Vec<usize> = set.iter().copied().collect();
    while let Some(q) = stack.pop() {
        for &(label, p) in a.out(q) {
            if label.is_none() && set.insert(p) {
                stack.push(p);
            }
        }
    }
}

/// Fewest letters needed from each state to reach acceptance.
fn letters_to_accept(a: &Nfa) -> Vec<usize> {
    let mut dist = vec![usize::MAX; a.num_states()];
    let mut queue = VecDeque::new();
    for &f in a.accepting() {
        dist[f] = 0;
        queue.push_back(f);
    }
    while let Some(p) = queue.pop_front() {
        for t in a.transitions().iter().filter(|t| t.to == p) {
            let d = dist[p] + usize::from(t.label.is_some());
            if d < dist[t.from] {
                dist[t.from] = d;
                if t.label.is_none() {
                    queue.push_front(t.from);
                } else {
                    queue.push_back(t.from);
                }
            }
        }
    }
    dist
}

/// `L(a)` up to length `max_len`, by depth-first search over state sets.
pub fn nfa_words(a: &Nfa, max_len: usize) -> BTreeSet<Word> {
    let mut out = BTreeSet::new();
    nfa_words_each(a, max_len, |w| {
        out.insert(w.iter().map(|&x| a.alphabet()[x].clone()).collect());
    });
    out
}

/// Call `f` once for every word of `L(a)` up to length `max_len`.
/// Branches that cannot reach acceptance within the remaining length are
/// cut.
pub fn nfa_words_each(a: &Nfa, max_len: usize, mut f: impl FnMut(&[usize])) {
    let dist = letters_to_accept(a);
    let mut start = BTreeSet::from([a.initial()]);
    eps_closure(a, &mut start);
    let mut stack = vec![(start, Vec::<usize>::new())];
    while let Some((set, w)) = stack.pop() {
        if set.iter().any(|q| a.accepting().contains(q)) {
            f(&w);
        }
        if w.len() == max_len {
            continue;
        }
        for x in (0..a.alphabet().len()).rev() {
            let mut next = BTreeSet::new();
            for &q in &set {
                for &(label, p) in a.out(q) {
                    if label == Some(x) {
                        next.insert(p);
                    }
                }
            }
            eps_closure(a, &mut next);
            let remaining = max_len - w.len() - 1;
            if next.iter().all(|&p| dist[p] > remaining) {
                continue;
            }
            let mut v = w.clone();
            v.push(x);
            stack.push((next, v));
        }
    }
}

/// `L(g)` up to length `max_len`, by iterating the rules on explicit word
/// sets until nothing changes. Works for any grammar shape.
pub fn grammar_words(g: &Cfg, max_len: usize) -> BTreeSet<Word> {
    let mut lang: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); g.num_nonterminals()];
    loop {
        let mut changed = false;
        for r in g.rules() {
            let mut partial: BTreeSet<Vec<usize>> = BTreeSet::from([Vec::new()]);
            for s in &r.rhs {
                let mut next = BTreeSet::new();
                for u in &partial {
                    match *s {
                        Sym::T(t) => {
                            if u.len() < max_len {
                                let mut v = u.clone();
                                v.push(t);
                                next.insert(v);
                            }
                        }
                        Sym::N(y) => {
                            for v in &lang[y] {
                                if u.len() + v.len() <= max_len {
                                    let mut x = u.clone();
                                    x.extend_from_slice(v);
                                    next.insert(x);
                                }
                            }
                        }
                    }
                }
                partial = next;
                if partial.is_empty() {
                    break;
                }
            }
            for w in partial {
                if lang[r.lhs].insert(w) {
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    lang[g.axiom()]
        .iter()
        .map(|w| w.iter().map(|&t| g.terminals()[t].clone()).collect())
        .collect()
}

/// Bare transition list with initial state `0`, for fast enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawNfa {
    pub n: usize,
    pub initial: usize,
    pub accepting: Vec<bool>,
    /// `(from, label, to)`, `None` being ε.
    pub edges: Vec<(usize, Option<usize>, usize)>,
}

impl RawNfa {
    pub fn from_nfa(a: &Nfa) -> RawNfa {
        RawNfa {
            n: a.num_states(),
            initial: a.initial(),
            accepting: (0..a.num_states()).map(|q| a.is_accepting(q)).collect(),
            edges: a.transitions().iter().map(|t| (t.from, t.label, t.to)).collect(),
        }
    }
}

/// Length of a shortest path from the initial state to an accepting one.
pub fn shortest_path_len(a: &RawNfa) -> Option<usize> {
    let mut dist = vec![usize::MAX; a.n];
    let mut queue = VecDeque::from([a.initial]);
    dist[a.initial] = 0;
    while let Some(q) = queue.pop_front() {
        if a.accepting[q] {
            return Some(dist[q]);
        }
        for &(_, label, to) in a.edges.iter().filter(|e| e.0 == q) {
            let d = dist[q] + usize::from(label.is_some());
            if d < dist[to] {
                dist[to] = d;
                if label.is_none() {
                    queue.push_front(to);
                } else {
                    queue.push_back(to);
                }
            }
        }
    }
    None
}

/// Length of a shortest word of `L(a)` balanced over the symbols `open`
/// and `close`, searching configurations `(state, height)` with height at
/// most `max_height`. Other symbols are never taken.
pub fn shortest_dyck1_len(a: &RawNfa, open: usize, close: usize, max_height: usize) -> Option<usize> {
    let mut dist = HashMap::from([((a.initial, 0usize), 0usize)]);
    let mut queue = VecDeque::from([((a.initial, 0usize), 0usize)]);
    while let Some(((q, h), d)) = queue.pop_front() {
        if dist[&(q, h)] < d {
            continue;
        }
        if h == 0 && a.accepting[q] {
            return Some(d);
        }
        for &(_, label, to) in a.edges.iter().filter(|e| e.0 == q) {
            let (h2, cost) = match label {
                None => (Some(h), 0),
                Some(x) if x == open => ((h < max_height).then_some(h + 1), 1),
                Some(x) if x == close => (h.checked_sub(1), 1),
                Some(_) => (None, 1),
            };
            let Some(h2) = h2 else { continue };
            if dist.get(&(to, h2)).is_none_or(|&old| d + cost < old) {
                dist.insert((to, h2), d + cost);
                if cost == 0 {
                    queue.push_front(((to, h2), d));
                } else {
                    queue.push_back(((to, h2), d + 1));
                }
            }
        }
    }
    None
}

/// Every ε-free automaton over `k` letters with states `0..n`, initial
/// state `0`, and any set of accepting states.
pub fn all_nfas(n: usize, k: usize) -> impl Iterator<Item = RawNfa> {
    let slots = n * k * n;
    (0u64..1 << slots).flat_map(move |mask| {
        let edges: Vec<(usize, Option<usize>, usize)> = (0..slots)
            .filter(|bit| mask >> bit & 1 == 1)
            .map(|bit| (bit / (k * n), Some(bit / n % k), bit % n))
            .collect();
        (0u64..1 << n).map(move |acc| RawNfa {
            n,
            initial: 0,
            accepting: (0..n).map(|q| acc >> q & 1 == 1).collect(),
            edges: edges.clone(),
        })
    })
}

/// Maximum of `shortest(a)` over all `n`-state automata on `k` letters on
/// which it is defined.
pub fn rational_index_brute(n: usize, k: usize, shortest: impl Fn(&RawNfa) -> Option<usize>) -> usize {
    all_nfas(n, k).filter_map(|a| shortest(&a)).max().unwrap_or(0)
}

/// Whether `w ∈ σ(L(outer))`, where `σ(x)` is the language of `sub[x]`.
///
/// Bottom-up over all spans of `w`, empty ones included: a terminal `x`
/// covers `w[i..j]` when that factor belongs to `sub[x]`.
pub fn sigma_member<S: AsRef<str>>(
    outer: &Cfg,
    sub: &BTreeMap<String, FilterSpec>,
    w: &[S],
) -> Result<bool> {
    let n = w.len();
    let mut leaf = vec![vec![vec![false; n + 1]; n + 1]; outer.terminals().len()];
    for (t, name) in outer.terminals().iter().enumerate() {
        let f = sub
            .get(name)
            .ok_or_else(|| crate::Error::MissingSubstitution(name.clone()))?;
        for i in 0..=n {
            for j in i..=n {
                leaf[t][i][j] = f.member(&w[i..j]).unwrap_or(false);
            }
        }
    }
    let mut span = vec![vec![vec![false; n + 1]; n + 1]; outer.num_nonterminals()];
    loop {
        let mut changed = false;
        for r in outer.rules() {
            for i in 0..=n {
                // positions reachable after reading a prefix of the rhs
                let mut reach = vec![false; n + 1];
                reach[i] = true;
                for s in &r.rhs {
                    let mut next = vec![false; n + 1];
                    for m in (i..=n).filter(|&m| reach[m]) {
                        for j in m..=n {
                            let ok = match *s {
                                Sym::T(t) => leaf[t][m][j],
                                Sym::N(y) => span[y][m][j],
                            };
                            if ok {
                                next[j] = true;
                            }
                        }
                    }
                    reach = next;
                }
                for j in i..=n {
                    if reach[j] && !span[r.lhs][i][j] {
                        span[r.lhs][i][j] = true;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return Ok(span[outer.axiom()][0][n]);
        }
    }
}
