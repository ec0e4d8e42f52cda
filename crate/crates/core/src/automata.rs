//! Nondeterministic finite automata with optional ε-transitions.
//!
//! States and symbols carry opaque string names; internally everything is
//! indexed by `usize`. The empty label encodes ε and is never part of the
//! alphabet. Constructions elsewhere in the crate name their states
//! structurally, e.g. `(q,3)`, so that outputs stay readable.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Words are sequences of symbol names.
pub type Word = Vec<String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub from: usize,
    /// `None` is ε.
    pub label: Option<usize>,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nfa {
    states: Vec<String>,
    alphabet: Vec<String>,
    initial: usize,
    accepting: BTreeSet<usize>,
    transitions: Vec<Transition>,
    state_index: HashMap<String, usize>,
    symbol_index: HashMap<String, usize>,
    out: Vec<Vec<(Option<usize>, usize)>>,
}

/// Incremental construction by index. State names are deduplicated.
#[derive(Debug, Clone)]
pub struct NfaBuilder {
    states: Vec<String>,
    state_index: HashMap<String, usize>,
    alphabet: Vec<String>,
    initial: usize,
    accepting: BTreeSet<usize>,
    transitions: BTreeSet<Transition>,
}

impl NfaBuilder {
    pub fn new<S: AsRef<str>>(alphabet: &[S]) -> Self {
        NfaBuilder {
            states: Vec::new(),
            state_index: HashMap::new(),
            alphabet: alphabet.iter().map(|s| s.as_ref().to_string()).collect(),
            initial: 0,
            accepting: BTreeSet::new(),
            transitions: BTreeSet::new(),
        }
    }

    pub fn state(&mut self, name: impl Into<String>) -> usize {
        let name = name.into();
        if let Some(&i) = self.state_index.get(&name) {
            return i;
        }
        let i = self.states.len();
        self.state_index.insert(name.clone(), i);
        self.states.push(name);
        i
    }

    pub fn symbol(&self, name: &str) -> Option<usize> {
        self.alphabet.iter().position(|s| s == name)
    }

    pub fn initial(&mut self, q: usize) -> &mut Self {
        self.initial = q;
        self
    }

    pub fn accept(&mut self, q: usize) -> &mut Self {
        self.accepting.insert(q);
        self
    }

    pub fn transition(&mut self, from: usize, label: Option<usize>, to: usize) -> &mut Self {
        self.transitions.insert(Transition { from, label, to });
        self
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn build(self) -> Nfa {
        assert!(
            self.initial < self.states.len(),
            "builder finished without any state"
        );
        Nfa::assemble(
            self.states,
            self.alphabet,
            self.initial,
            self.accepting,
            self.transitions.into_iter().collect(),
        )
    }
}

impl Nfa {
    fn assemble(
        states: Vec<String>,
        alphabet: Vec<String>,
        initial: usize,
        accepting: BTreeSet<usize>,
        mut transitions: Vec<Transition>,
    ) -> Nfa {
        transitions.sort();
        transitions.dedup();
        let state_index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let symbol_index = alphabet
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let mut out = vec![Vec::new(); states.len()];
        for t in &transitions {
            out[t.from].push((t.label, t.to));
        }
        Nfa {
            states,
            alphabet,
            initial,
            accepting,
            transitions,
            state_index,
            symbol_index,
            out,
        }
    }

    /// Validating constructor working on names. An empty label is ε.
    pub fn from_parts<S: AsRef<str>>(
        states: &[S],
        alphabet: &[S],
        initial: &str,
        accepting: &[S],
        transitions: &[(S, S, S)],
    ) -> Result<Nfa> {
        let mut seen = BTreeSet::new();
        for s in states {
            if !seen.insert(s.as_ref()) {
                return Err(Error::InvalidAutomaton(format!(
                    "duplicate state `{}`",
                    s.as_ref()
                )));
            }
        }
        let mut syms = BTreeSet::new();
        for a in alphabet {
            if a.as_ref().is_empty() {
                return Err(Error::InvalidAutomaton(
                    "the empty label is reserved for epsilon".into(),
                ));
            }
            if !syms.insert(a.as_ref()) {
                return Err(Error::InvalidAutomaton(format!(
                    "duplicate symbol `{}`",
                    a.as_ref()
                )));
            }
        }
        let mut b = NfaBuilder::new(alphabet);
        for s in states {
            b.state(s.as_ref());
        }
        let lookup = |b: &NfaBuilder, name: &str| {
            b.state_index
                .get(name)
                .copied()
                .ok_or_else(|| Error::UnknownState(name.to_string()))
        };
        let init = lookup(&b, initial)?;
        b.initial(init);
        for f in accepting {
            let f = lookup(&b, f.as_ref())?;
            b.accept(f);
        }
        for (from, label, to) in transitions {
            let from = lookup(&b, from.as_ref())?;
            let to = lookup(&b, to.as_ref())?;
            let label = match label.as_ref() {
                "" => None,
                l => Some(
                    b.symbol(l)
                        .ok_or_else(|| Error::UnknownSymbol(l.to_string()))?,
                ),
            };
            b.transition(from, label, to);
        }
        Ok(b.build())
    }

    /// Automaton accepting exactly one word.
    pub fn single_word<S: AsRef<str>, W: AsRef<str>>(alphabet: &[S], word: &[W]) -> Result<Nfa> {
        let mut b = NfaBuilder::new(alphabet);
        let mut prev = b.state("w0");
        b.initial(prev);
        for (i, s) in word.iter().enumerate() {
            let sym = b
                .symbol(s.as_ref())
                .ok_or_else(|| Error::UnknownSymbol(s.as_ref().to_string()))?;
            let next = b.state(format!("w{}", i + 1));
            b.transition(prev, Some(sym), next);
            prev = next;
        }
        b.accept(prev);
        Ok(b.build())
    }

    /// One accepting state with a self-loop on every symbol.
    pub fn universal<S: AsRef<str>>(alphabet: &[S]) -> Nfa {
        let mut b = NfaBuilder::new(alphabet);
        let q = b.state("u");
        b.initial(q).accept(q);
        for a in 0..alphabet.len() {
            b.transition(q, Some(a), q);
        }
        b.build()
    }

    /// One non-accepting state and no transitions.
    pub fn empty<S: AsRef<str>>(alphabet: &[S]) -> Nfa {
        let mut b = NfaBuilder::new(alphabet);
        let q = b.state("e");
        b.initial(q);
        b.build()
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, q: usize) -> &str {
        &self.states[q]
    }

    pub fn state_id(&self, name: &str) -> Option<usize> {
        self.state_index.get(name).copied()
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn symbol_id(&self, name: &str) -> Option<usize> {
        self.symbol_index.get(name).copied()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn accepting(&self) -> &BTreeSet<usize> {
        &self.accepting
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting.contains(&q)
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Outgoing `(label, target)` pairs of `q`.
    pub fn out(&self, q: usize) -> &[(Option<usize>, usize)] {
        &self.out[q]
    }

    pub fn has_epsilon(&self) -> bool {
        self.transitions.iter().any(|t| t.label.is_none())
    }

    /// Translate a word of names into symbol ids.
    pub fn encode<S: AsRef<str>>(&self, w: &[S]) -> Result<Vec<usize>> {
        w.iter()
            .map(|s| {
                self.symbol_id(s.as_ref())
                    .ok_or_else(|| Error::UnknownSymbol(s.as_ref().to_string()))
            })
            .collect()
    }

    pub fn decode(&self, w: &[usize]) -> Word {
        w.iter().map(|&a| self.alphabet[a].clone()).collect()
    }

    /// Extend `set` (a membership vector) to its ε-closure.
    pub fn close(&self, set: &mut [bool]) {
        let mut stack: Vec<usize> = (0..set.len()).filter(|&q| set[q]).collect();
        while let Some(q) = stack.pop() {
            for &(l, p) in &self.out[q] {
                if l.is_none() && !set[p] {
                    set[p] = true;
                    stack.push(p);
                }
            }
        }
    }

    /// Reflexive-transitive ε-reachability, `closure[q][p]`.
    pub fn epsilon_closure_matrix(&self) -> Vec<Vec<bool>> {
        (0..self.num_states())
            .map(|q| {
                let mut set = vec![false; self.num_states()];
                set[q] = true;
                self.close(&mut set);
                set
            })
            .collect()
    }

    fn step(&self, set: &[bool], a: usize) -> Vec<bool> {
        let mut next = vec![false; set.len()];
        for q in (0..set.len()).filter(|&q| set[q]) {
            for &(l, p) in &self.out[q] {
                if l == Some(a) {
                    next[p] = true;
                }
            }
        }
        self.close(&mut next);
        next
    }

    pub fn accepts_ids(&self, w: &[usize]) -> bool {
        let mut set = vec![false; self.num_states()];
        set[self.initial] = true;
        self.close(&mut set);
        for &a in w {
            set = self.step(&set, a);
            if !set.iter().any(|&b| b) {
                return false;
            }
        }
        self.accepting.iter().any(|&f| set[f])
    }

    pub fn accepts<S: AsRef<str>>(&self, w: &[S]) -> Result<bool> {
        Ok(self.accepts_ids(&self.encode(w)?))
    }

    /// Shortest distance (in symbols) from each state to acceptance.
    fn distance_to_accept(&self) -> Vec<Option<usize>> {
        let n = self.num_states();
        let mut rev: Vec<Vec<(bool, usize)>> = vec![Vec::new(); n];
        for t in &self.transitions {
            rev[t.to].push((t.label.is_none(), t.from));
        }
        let mut dist = vec![None; n];
        let mut deque = VecDeque::new();
        for &f in &self.accepting {
            dist[f] = Some(0);
            deque.push_back(f);
        }
        // 0-1 BFS: ε edges cost nothing
        while let Some(q) = deque.pop_front() {
            let d = dist[q].unwrap();
            for &(eps, p) in &rev[q] {
                let nd = if eps { d } else { d + 1 };
                if dist[p].is_none_or(|old| nd < old) {
                    dist[p] = Some(nd);
                    if eps {
                        deque.push_front(p);
                    } else {
                        deque.push_back(p);
                    }
                }
            }
        }
        dist
    }

    /// Shortest accepted word; ties go to the lexicographically least word
    /// under the declared alphabet order.
    pub fn shortest_witness_ids(&self) -> Option<Vec<usize>> {
        let dist = self.distance_to_accept();
        let n = self.num_states();
        let mut set = vec![false; n];
        set[self.initial] = true;
        self.close(&mut set);
        let mut d = (0..n).filter(|&q| set[q]).filter_map(|q| dist[q]).min()?;
        let mut word = Vec::with_capacity(d);
        while d > 0 {
            let frontier: Vec<bool> = (0..n).map(|q| set[q] && dist[q] == Some(d)).collect();
            let mut advanced = false;
            for a in 0..self.alphabet.len() {
                let next = self.step(&frontier, a);
                if (0..n).any(|q| next[q] && dist[q] == Some(d - 1)) {
                    word.push(a);
                    set = next;
                    d -= 1;
                    advanced = true;
                    break;
                }
            }
            debug_assert!(advanced, "distance labelling is inconsistent");
            if !advanced {
                return None;
            }
        }
        Some(word)
    }

    pub fn shortest_witness(&self) -> Option<Word> {
        self.shortest_witness_ids().map(|w| self.decode(&w))
    }

    pub fn is_empty(&self) -> bool {
        self.shortest_witness_ids().is_none()
    }

    /// The same automaton rerooted at `q` with `p` as sole accepting state.
    pub fn sub_automaton(&self, q: &str, p: &str) -> Result<Nfa> {
        let q = self
            .state_id(q)
            .ok_or_else(|| Error::UnknownState(q.to_string()))?;
        let p = self
            .state_id(p)
            .ok_or_else(|| Error::UnknownState(p.to_string()))?;
        Ok(self.sub_automaton_ids(q, p))
    }

    pub fn sub_automaton_ids(&self, q: usize, p: usize) -> Nfa {
        let mut a = self.clone();
        a.initial = q;
        a.accepting = BTreeSet::from([p]);
        a
    }

    /// Same automaton over a different alphabet. Transitions on symbols
    /// missing from `alphabet` are dropped.
    pub fn with_alphabet<S: AsRef<str>>(&self, alphabet: &[S]) -> Nfa {
        let alphabet: Vec<String> = alphabet.iter().map(|s| s.as_ref().to_string()).collect();
        let remap: Vec<Option<usize>> = self
            .alphabet
            .iter()
            .map(|s| alphabet.iter().position(|t| t == s))
            .collect();
        let transitions = self
            .transitions
            .iter()
            .filter_map(|t| match t.label {
                None => Some(*t),
                Some(a) => remap[a].map(|b| Transition {
                    label: Some(b),
                    ..*t
                }),
            })
            .collect();
        Nfa::assemble(
            self.states.clone(),
            alphabet,
            self.initial,
            self.accepting.clone(),
            transitions,
        )
    }

    /// Equivalent automaton without ε-transitions on the same state set.
    pub fn remove_epsilon(&self) -> Nfa {
        if !self.has_epsilon() {
            return self.clone();
        }
        let closure = self.epsilon_closure_matrix();
        let n = self.num_states();
        let mut transitions = Vec::new();
        let mut accepting = BTreeSet::new();
        for q in 0..n {
            for r in (0..n).filter(|&r| closure[q][r]) {
                if self.is_accepting(r) {
                    accepting.insert(q);
                }
                for &(l, p) in &self.out[r] {
                    if let Some(a) = l {
                        transitions.push(Transition {
                            from: q,
                            label: Some(a),
                            to: p,
                        });
                    }
                }
            }
        }
        Nfa::assemble(
            self.states.clone(),
            self.alphabet.clone(),
            self.initial,
            accepting,
            transitions,
        )
    }

    /// States reachable from the initial state.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        seen[self.initial] = true;
        let mut stack = vec![self.initial];
        while let Some(q) = stack.pop() {
            for &(_, p) in &self.out[q] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// States from which an accepting state is reachable.
    pub fn coreachable(&self) -> Vec<bool> {
        let n = self.num_states();
        let mut rev = vec![Vec::new(); n];
        for t in &self.transitions {
            rev[t.to].push(t.from);
        }
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = self.accepting.iter().copied().collect();
        for &f in &stack {
            seen[f] = true;
        }
        while let Some(q) = stack.pop() {
            for &p in &rev[q] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// Drop states that are unreachable or cannot reach acceptance. The
    /// initial state always survives.
    pub fn trim(&self) -> Nfa {
        let fwd = self.reachable();
        let bwd = self.coreachable();
        let keep: Vec<bool> = (0..self.num_states())
            .map(|q| q == self.initial || (fwd[q] && bwd[q]))
            .collect();
        self.retain_states(&keep)
    }

    fn retain_states(&self, keep: &[bool]) -> Nfa {
        let mut map = vec![usize::MAX; self.num_states()];
        let mut states = Vec::new();
        for q in 0..self.num_states() {
            if keep[q] {
                map[q] = states.len();
                states.push(self.states[q].clone());
            }
        }
        let transitions = self
            .transitions
            .iter()
            .filter(|t| keep[t.from] && keep[t.to])
            .map(|t| Transition {
                from: map[t.from],
                label: t.label,
                to: map[t.to],
            })
            .collect();
        let accepting = self
            .accepting
            .iter()
            .filter(|&&q| keep[q])
            .map(|&q| map[q])
            .collect();
        Nfa::assemble(
            states,
            self.alphabet.clone(),
            map[self.initial],
            accepting,
            transitions,
        )
    }

    pub fn to_file(&self) -> NfaFile {
        NfaFile {
            states: self.states.clone(),
            alphabet: self.alphabet.clone(),
            initial: self.states[self.initial].clone(),
            accepting: self
                .accepting
                .iter()
                .map(|&q| self.states[q].clone())
                .collect(),
            transitions: self
                .transitions
                .iter()
                .map(|t| NfaTransitionFile {
                    from: self.states[t.from].clone(),
                    label: t.label.map(|a| self.alphabet[a].clone()).unwrap_or_default(),
                    to: self.states[t.to].clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        // Going through `Value` sorts the keys.
        let value = serde_json::to_value(self.to_file()).expect("NFA serialization cannot fail");
        serde_json::to_string_pretty(&value).expect("NFA serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Nfa> {
        let file: NfaFile = serde_json::from_str(text)?;
        file.into_nfa()
    }
}

/// On-disk NFA layout. A transition label of `""` is ε.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NfaFile {
    pub states: Vec<String>,
    pub alphabet: Vec<String>,
    pub initial: String,
    pub accepting: Vec<String>,
    pub transitions: Vec<NfaTransitionFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NfaTransitionFile {
    pub from: String,
    pub label: String,
    pub to: String,
}

impl NfaFile {
    pub fn into_nfa(self) -> Result<Nfa> {
        let transitions: Vec<(String, String, String)> = self
            .transitions
            .into_iter()
            .map(|t| (t.from, t.label, t.to))
            .collect();
        Nfa::from_parts(
            &self.states,
            &self.alphabet,
            &self.initial,
            &self.accepting,
            &transitions,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> Nfa {
        Nfa::from_parts(
            &["q0", "q1"],
            &["a"],
            "q0",
            &["q1"],
            &[("q0", "a", "q1")],
        )
        .unwrap()
    }

    #[test]
    fn accepts_basic() {
        let one = Nfa::from_parts(&["q"], &["a"], "q", &["q"], &[]).unwrap();
        assert!(one.accepts::<&str>(&[]).unwrap());
        assert!(!one.accepts(&["a"]).unwrap());
        assert!(chain().accepts(&["a"]).unwrap());
        assert!(matches!(
            chain().accepts(&["b"]),
            Err(Error::UnknownSymbol(s)) if s == "b"
        ));
    }

    #[test]
    fn shortest_witness_examples() {
        let one = Nfa::from_parts(&["q"], &["a"], "q", &["q"], &[]).unwrap();
        assert_eq!(one.shortest_witness(), Some(vec![]));
        let a = Nfa::from_parts(
            &["q0", "q1", "q2"],
            &["a", "b", "c"],
            "q0",
            &["q1"],
            &[("q0", "a", "q1"), ("q0", "b", "q2"), ("q2", "c", "q1")],
        )
        .unwrap();
        assert_eq!(a.shortest_witness(), Some(vec!["a".to_string()]));
        let dead = Nfa::from_parts(&["q0", "q1"], &["a"], "q0", &["q1"], &[]).unwrap();
        assert_eq!(dead.shortest_witness(), None);
    }

    #[test]
    fn shortest_witness_lexicographic_tie() {
        // both "ba" and "ab" have length 2; declared order puts b first
        let a = Nfa::from_parts(
            &["s", "x", "y", "f"],
            &["b", "a"],
            "s",
            &["f"],
            &[
                ("s", "a", "x"),
                ("x", "b", "f"),
                ("s", "b", "y"),
                ("y", "a", "f"),
            ],
        )
        .unwrap();
        assert_eq!(a.shortest_witness(), Some(vec!["b".into(), "a".into()]));
    }

    #[test]
    fn epsilon_cycles_terminate() {
        let a = Nfa::from_parts(
            &["p", "q", "r"],
            &["a"],
            "p",
            &["r"],
            &[("p", "", "q"), ("q", "", "p"), ("q", "a", "r")],
        )
        .unwrap();
        assert!(a.accepts(&["a"]).unwrap());
        assert_eq!(a.shortest_witness(), Some(vec!["a".into()]));
        let b = a.remove_epsilon();
        assert!(!b.has_epsilon());
        assert!(b.accepts(&["a"]).unwrap());
        assert!(!b.accepts::<&str>(&[]).unwrap());
    }

    #[test]
    fn sub_automaton_examples() {
        let one = Nfa::from_parts(&["q"], &["a"], "q", &[], &[]).unwrap();
        assert!(one.sub_automaton("q", "q").unwrap().accepts::<&str>(&[]).unwrap());
        let c = chain();
        assert_eq!(
            c.sub_automaton("q0", "q1").unwrap().shortest_witness(),
            Some(vec!["a".into()])
        );
        assert!(c.sub_automaton("q1", "q0").unwrap().is_empty());
        assert!(matches!(
            c.sub_automaton("q0", "zz"),
            Err(Error::UnknownState(_))
        ));
    }

    #[test]
    fn invalid_parts_rejected() {
        assert!(Nfa::from_parts(&["q"], &["a"], "p", &[], &[]).is_err());
        assert!(Nfa::from_parts(&["q"], &["a"], "q", &[], &[("q", "b", "q")]).is_err());
        assert!(Nfa::from_parts(&["q", "q"], &["a"], "q", &[], &[]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let a = Nfa::from_parts(
            &["p", "q"],
            &["a", "b"],
            "p",
            &["q"],
            &[("p", "", "q"), ("q", "b", "p")],
        )
        .unwrap();
        let back = Nfa::from_json(&a.to_json()).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn trim_keeps_language() {
        let a = Nfa::from_parts(
            &["s", "dead", "f", "unreach"],
            &["a"],
            "s",
            &["f"],
            &[("s", "a", "dead"), ("s", "a", "f"), ("unreach", "a", "f")],
        )
        .unwrap();
        let t = a.trim();
        assert_eq!(t.num_states(), 2);
        assert!(t.accepts(&["a"]).unwrap());
    }
}
