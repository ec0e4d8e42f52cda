//! One-counter automata.
//!
//! The counter starts at 0 and never goes negative: a decrement is only
//! enabled when the counter is positive, whatever the guard says.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::automata::{Nfa, NfaBuilder, Word};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Guard {
    Any,
    Zero,
    Positive,
}

impl Guard {
    pub fn allows(self, counter: usize) -> bool {
        match self {
            Guard::Any => true,
            Guard::Zero => counter == 0,
            Guard::Positive => counter > 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcceptMode {
    FinalState,
    FinalStateAndZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CounterMove {
    pub from: usize,
    /// `None` is ε.
    pub read: Option<usize>,
    pub guard: Guard,
    pub delta: i8,
    pub to: usize,
}

impl CounterMove {
    /// Counter value after taking the move, if it is enabled.
    pub fn apply(&self, counter: usize) -> Option<usize> {
        if !self.guard.allows(counter) {
            return None;
        }
        match self.delta {
            -1 => counter.checked_sub(1),
            0 => Some(counter),
            _ => Some(counter + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterAutomaton {
    states: Vec<String>,
    alphabet: Vec<String>,
    initial: usize,
    accepting: BTreeSet<usize>,
    moves: Vec<CounterMove>,
    accept_mode: AcceptMode,
    out: Vec<Vec<CounterMove>>,
}

impl CounterAutomaton {
    /// Index-level constructor. Panics on out-of-range indices or deltas
    /// outside `{-1, 0, 1}`.
    pub fn new(
        states: Vec<String>,
        alphabet: Vec<String>,
        initial: usize,
        accepting: BTreeSet<usize>,
        mut moves: Vec<CounterMove>,
        accept_mode: AcceptMode,
    ) -> CounterAutomaton {
        assert!(initial < states.len());
        assert!(accepting.iter().all(|&q| q < states.len()));
        for m in &moves {
            assert!(m.from < states.len() && m.to < states.len());
            assert!(m.read.is_none_or(|a| a < alphabet.len()));
            assert!((-1..=1).contains(&m.delta), "counter delta out of range");
        }
        moves.sort();
        moves.dedup();
        let mut out = vec![Vec::new(); states.len()];
        for m in &moves {
            out[m.from].push(*m);
        }
        CounterAutomaton {
            states,
            alphabet,
            initial,
            accepting,
            moves,
            accept_mode,
            out,
        }
    }

    /// Recognizer of the one-pair Dyck language over `open`/`close`.
    ///
    /// With [`AcceptMode::FinalStateAndZero`] it has a single state; with
    /// [`AcceptMode::FinalState`] a zero-guarded ε-move leads to a separate
    /// final state without outgoing moves.
    pub fn dyck1(open: &str, close: &str, mode: AcceptMode) -> CounterAutomaton {
        let mut states = vec!["q".to_string()];
        let mut moves = vec![
            CounterMove {
                from: 0,
                read: Some(0),
                guard: Guard::Any,
                delta: 1,
                to: 0,
            },
            CounterMove {
                from: 0,
                read: Some(1),
                guard: Guard::Positive,
                delta: -1,
                to: 0,
            },
        ];
        let accepting = match mode {
            AcceptMode::FinalStateAndZero => BTreeSet::from([0]),
            AcceptMode::FinalState => {
                states.push("f".into());
                moves.push(CounterMove {
                    from: 0,
                    read: None,
                    guard: Guard::Zero,
                    delta: 0,
                    to: 1,
                });
                BTreeSet::from([1])
            }
        };
        CounterAutomaton::new(
            states,
            vec![open.to_string(), close.to_string()],
            0,
            accepting,
            moves,
            mode,
        )
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn accepting(&self) -> &BTreeSet<usize> {
        &self.accepting
    }

    pub fn moves(&self) -> &[CounterMove] {
        &self.moves
    }

    pub fn accept_mode(&self) -> AcceptMode {
        self.accept_mode
    }

    pub fn encode<S: AsRef<str>>(&self, w: &[S]) -> Result<Vec<usize>> {
        w.iter()
            .map(|s| {
                self.alphabet
                    .iter()
                    .position(|a| a == s.as_ref())
                    .ok_or_else(|| Error::UnknownSymbol(s.as_ref().to_string()))
            })
            .collect()
    }

    fn accepts_config(&self, q: usize, c: usize) -> bool {
        self.accepting.contains(&q)
            && (self.accept_mode == AcceptMode::FinalState || c == 0)
    }

    fn close(&self, configs: &mut HashSet<(usize, usize)>, cap: usize) {
        let mut stack: Vec<(usize, usize)> = configs.iter().copied().collect();
        while let Some((q, c)) = stack.pop() {
            for m in &self.out[q] {
                if m.read.is_some() {
                    continue;
                }
                if let Some(c2) = m.apply(c) {
                    if c2 <= cap && configs.insert((m.to, c2)) {
                        stack.push((m.to, c2));
                    }
                }
            }
        }
    }

    pub fn accepts_ids(&self, w: &[usize]) -> bool {
        let n = self.states.len();
        let cap = w.len() * n + n;
        let mut cur = HashSet::from([(self.initial, 0usize)]);
        self.close(&mut cur, cap);
        for &a in w {
            let mut next = HashSet::new();
            for &(q, c) in &cur {
                for m in &self.out[q] {
                    if m.read == Some(a) {
                        if let Some(c2) = m.apply(c) {
                            if c2 <= cap {
                                next.insert((m.to, c2));
                            }
                        }
                    }
                }
            }
            self.close(&mut next, cap);
            if next.is_empty() {
                return false;
            }
            cur = next;
        }
        cur.iter().any(|&(q, c)| self.accepts_config(q, c))
    }

    pub fn accepts<S: AsRef<str>>(&self, w: &[S]) -> Result<bool> {
        Ok(self.accepts_ids(&self.encode(w)?))
    }

    /// Shortest accepted word among runs whose counter never exceeds
    /// `cap`, found by breadth-first search over configurations.
    pub fn shortest_accepted_ids(&self, cap: usize) -> Option<Vec<usize>> {
        type Config = (usize, usize);
        let start: Config = (self.initial, 0);
        let mut dist: HashMap<Config, usize> = HashMap::from([(start, 0)]);
        let mut parent: HashMap<Config, (Config, Option<usize>)> = HashMap::new();
        let mut done: HashSet<Config> = HashSet::new();
        let mut queue = VecDeque::from([start]);
        // 0-1 search: ε-moves cost nothing and go to the front of the queue
        while let Some((q, c)) = queue.pop_front() {
            if !done.insert((q, c)) {
                continue;
            }
            if self.accepts_config(q, c) {
                let mut word = Vec::new();
                let mut cur = (q, c);
                while let Some(&(prev, a)) = parent.get(&cur) {
                    word.extend(a);
                    cur = prev;
                }
                word.reverse();
                return Some(word);
            }
            let d = dist[&(q, c)];
            for m in &self.out[q] {
                let Some(c2) = m.apply(c) else { continue };
                if c2 > cap {
                    continue;
                }
                let d2 = d + usize::from(m.read.is_some());
                if dist.get(&(m.to, c2)).is_some_and(|&old| old <= d2) {
                    continue;
                }
                dist.insert((m.to, c2), d2);
                parent.insert((m.to, c2), ((q, c), m.read));
                if m.read.is_none() {
                    queue.push_front((m.to, c2));
                } else {
                    queue.push_back((m.to, c2));
                }
            }
        }
        None
    }

    pub fn shortest_accepted(&self, cap: usize) -> Option<Word> {
        self.shortest_accepted_ids(cap)
            .map(|w| w.into_iter().map(|a| self.alphabet[a].clone()).collect())
    }

    /// Synchronized product with an NFA over the same alphabet.
    pub fn product(&self, a: &Nfa) -> Result<CounterAutomaton> {
        let mine: BTreeSet<&String> = self.alphabet.iter().collect();
        let theirs: BTreeSet<&String> = a.alphabet().iter().collect();
        if mine != theirs {
            return Err(Error::AlphabetMismatch(format!(
                "counter automaton over {:?}, NFA over {:?}",
                self.alphabet,
                a.alphabet()
            )));
        }
        let to_mine: Vec<usize> = a
            .alphabet()
            .iter()
            .map(|s| self.alphabet.iter().position(|t| t == s).expect("checked above"))
            .collect();
        let na = a.num_states();
        let id = |p: usize, q: usize| p * na + q;
        let mut states = Vec::with_capacity(self.states.len() * na);
        for p in &self.states {
            for q in a.states() {
                states.push(format!("({p},{q})"));
            }
        }
        let mut moves = Vec::new();
        for m in &self.moves {
            for q in 0..na {
                match m.read {
                    None => moves.push(CounterMove {
                        from: id(m.from, q),
                        to: id(m.to, q),
                        ..*m
                    }),
                    Some(x) => {
                        for &(label, q2) in a.out(q) {
                            if label.map(|l| to_mine[l]) == Some(x) {
                                moves.push(CounterMove {
                                    from: id(m.from, q),
                                    to: id(m.to, q2),
                                    ..*m
                                });
                            }
                        }
                    }
                }
            }
        }
        for t in a.transitions() {
            if t.label.is_none() {
                for p in 0..self.states.len() {
                    moves.push(CounterMove {
                        from: id(p, t.from),
                        read: None,
                        guard: Guard::Any,
                        delta: 0,
                        to: id(p, t.to),
                    });
                }
            }
        }
        let accepting = self
            .accepting
            .iter()
            .flat_map(|&p| a.accepting().iter().map(move |&q| id(p, q)))
            .collect();
        Ok(CounterAutomaton::new(
            states,
            self.alphabet.clone(),
            id(self.initial, a.initial()),
            accepting,
            moves,
            self.accept_mode,
        ))
    }

    /// Default counter cap for [`CounterAutomaton::to_nfa`]: the square of
    /// the number of states.
    pub fn default_cap(&self) -> usize {
        self.states.len() * self.states.len()
    }

    /// Expansion into an NFA over states `(q,i)` with `0 ≤ i ≤ cap` plus an
    /// absorbing, non-accepting `reject` state that catches overflow.
    pub fn to_nfa(&self, cap: usize) -> Nfa {
        let mut b = NfaBuilder::new(&self.alphabet);
        let levels = cap + 1;
        for q in &self.states {
            for i in 0..levels {
                b.state(format!("({q},{i})"));
            }
        }
        let reject = b.state("reject");
        let id = |q: usize, i: usize| q * levels + i;
        b.initial(id(self.initial, 0));
        for m in &self.moves {
            for i in 0..levels {
                let Some(j) = m.apply(i) else { continue };
                let target = if j <= cap { id(m.to, j) } else { reject };
                b.transition(id(m.from, i), m.read, target);
            }
        }
        for a in 0..self.alphabet.len() {
            b.transition(reject, Some(a), reject);
        }
        for &q in &self.accepting {
            for i in 0..levels {
                if self.accepts_config(q, i) {
                    b.accept(id(q, i));
                }
            }
        }
        b.build()
    }

    pub fn to_file(&self) -> CounterFile {
        CounterFile {
            states: self.states.clone(),
            alphabet: self.alphabet.clone(),
            initial: self.states[self.initial].clone(),
            accepting: self.accepting.iter().map(|&q| self.states[q].clone()).collect(),
            accept_mode: self.accept_mode,
            transitions: self
                .moves
                .iter()
                .map(|m| CounterTransitionFile {
                    from: self.states[m.from].clone(),
                    label: m.read.map(|a| self.alphabet[a].clone()).unwrap_or_default(),
                    guard: m.guard,
                    delta: m.delta,
                    to: self.states[m.to].clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        // Going through `Value` sorts the keys.
        let value = serde_json::to_value(self.to_file()).expect("counter automaton serialization cannot fail");
        serde_json::to_string_pretty(&value).expect("counter automaton serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<CounterAutomaton> {
        let file: CounterFile = serde_json::from_str(text)?;
        file.into_counter()
    }
}

/// On-disk layout: the NFA layout plus `guard`, `delta` and `accept_mode`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterFile {
    pub states: Vec<String>,
    pub alphabet: Vec<String>,
    pub initial: String,
    pub accepting: Vec<String>,
    pub accept_mode: AcceptMode,
    pub transitions: Vec<CounterTransitionFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterTransitionFile {
    pub from: String,
    pub label: String,
    #[serde(default = "any_guard")]
    pub guard: Guard,
    #[serde(default)]
    pub delta: i8,
    pub to: String,
}

fn any_guard() -> Guard {
    Guard::Any
}

impl CounterFile {
    pub fn into_counter(self) -> Result<CounterAutomaton> {
        let mut index = HashMap::new();
        for (i, s) in self.states.iter().enumerate() {
            if index.insert(s.as_str(), i).is_some() {
                return Err(Error::InvalidAutomaton(format!("duplicate state `{s}`")));
            }
        }
        let state = |s: &str| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| Error::UnknownState(s.to_string()))
        };
        if self.alphabet.iter().any(|a| a.is_empty()) {
            return Err(Error::InvalidAutomaton("empty symbol name".into()));
        }
        let symbol = |s: &str| {
            self.alphabet
                .iter()
                .position(|a| a == s)
                .ok_or_else(|| Error::UnknownSymbol(s.to_string()))
        };
        let initial = state(&self.initial)?;
        let accepting = self
            .accepting
            .iter()
            .map(|s| state(s))
            .collect::<Result<BTreeSet<_>>>()?;
        let mut moves = Vec::new();
        for t in &self.transitions {
            if !(-1..=1).contains(&t.delta) {
                return Err(Error::InvalidAutomaton(format!(
                    "counter delta {} out of range",
                    t.delta
                )));
            }
            moves.push(CounterMove {
                from: state(&t.from)?,
                read: if t.label.is_empty() {
                    None
                } else {
                    Some(symbol(&t.label)?)
                },
                guard: t.guard,
                delta: t.delta,
                to: state(&t.to)?,
            });
        }
        Ok(CounterAutomaton::new(
            self.states.clone(),
            self.alphabet.clone(),
            initial,
            accepting,
            moves,
            self.accept_mode,
        ))
    }
}
