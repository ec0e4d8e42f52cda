//! Rational transducers: finite automata with an input and an output tape.
//!
//! Every transition reads at most one symbol and writes at most one symbol;
//! longer outputs are spread over a chain of fresh states when a transducer
//! is built from a morphism. This keeps both compositions plain products.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::automata::{Nfa, NfaBuilder, Word};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Move {
    pub from: usize,
    pub read: Option<usize>,
    pub write: Option<usize>,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transducer {
    input_alphabet: Vec<String>,
    output_alphabet: Vec<String>,
    states: Vec<String>,
    initial: usize,
    accepting: BTreeSet<usize>,
    moves: Vec<Move>,
    out: Vec<Vec<Move>>,
}

#[derive(Debug, Clone)]
pub struct TransducerBuilder {
    input_alphabet: Vec<String>,
    output_alphabet: Vec<String>,
    states: Vec<String>,
    state_index: HashMap<String, usize>,
    initial: usize,
    accepting: BTreeSet<usize>,
    moves: BTreeSet<Move>,
}

impl TransducerBuilder {
    pub fn new<S: AsRef<str>, T: AsRef<str>>(input: &[S], output: &[T]) -> Self {
        TransducerBuilder {
            input_alphabet: input.iter().map(|s| s.as_ref().to_string()).collect(),
            output_alphabet: output.iter().map(|s| s.as_ref().to_string()).collect(),
            states: Vec::new(),
            state_index: HashMap::new(),
            initial: 0,
            accepting: BTreeSet::new(),
            moves: BTreeSet::new(),
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

    pub fn input_symbol(&self, name: &str) -> Option<usize> {
        self.input_alphabet.iter().position(|s| s == name)
    }

    pub fn output_symbol(&self, name: &str) -> Option<usize> {
        self.output_alphabet.iter().position(|s| s == name)
    }

    pub fn initial(&mut self, q: usize) -> &mut Self {
        self.initial = q;
        self
    }

    pub fn accept(&mut self, q: usize) -> &mut Self {
        self.accepting.insert(q);
        self
    }

    pub fn add(
        &mut self,
        from: usize,
        read: Option<usize>,
        write: Option<usize>,
        to: usize,
    ) -> &mut Self {
        self.moves.insert(Move {
            from,
            read,
            write,
            to,
        });
        self
    }

    /// Read `read` and write `output` from `from` to `to`, spreading the
    /// output over fresh states named after `tag`.
    pub fn add_path(
        &mut self,
        from: usize,
        read: Option<usize>,
        output: &[usize],
        to: usize,
        tag: &str,
    ) -> &mut Self {
        if output.len() <= 1 {
            return self.add(from, read, output.first().copied(), to);
        }
        let mut cur = from;
        let mut read = read;
        for (i, &b) in output.iter().enumerate() {
            let next = if i + 1 == output.len() {
                to
            } else {
                self.state(format!("{tag}.{}", i + 1))
            };
            self.add(cur, read.take(), Some(b), next);
            cur = next;
        }
        self
    }

    pub fn build(self) -> Transducer {
        assert!(self.initial < self.states.len(), "transducer without states");
        Transducer::assemble(
            self.input_alphabet,
            self.output_alphabet,
            self.states,
            self.initial,
            self.accepting,
            self.moves.into_iter().collect(),
        )
    }
}

fn same_alphabet(a: &[String], b: &[String]) -> bool {
    let sa: BTreeSet<&String> = a.iter().collect();
    let sb: BTreeSet<&String> = b.iter().collect();
    sa == sb
}

impl Transducer {
    fn assemble(
        input_alphabet: Vec<String>,
        output_alphabet: Vec<String>,
        states: Vec<String>,
        initial: usize,
        accepting: BTreeSet<usize>,
        mut moves: Vec<Move>,
    ) -> Transducer {
        moves.sort();
        moves.dedup();
        let mut out = vec![Vec::new(); states.len()];
        for m in &moves {
            out[m.from].push(*m);
        }
        Transducer {
            input_alphabet,
            output_alphabet,
            states,
            initial,
            accepting,
            moves,
            out,
        }
    }

    /// Copies every input symbol to the output.
    pub fn identity<S: AsRef<str>>(alphabet: &[S]) -> Transducer {
        let mut b = TransducerBuilder::new(alphabet, alphabet);
        let q = b.state("id");
        b.initial(q).accept(q);
        for a in 0..alphabet.len() {
            b.add(q, Some(a), Some(a), q);
        }
        b.build()
    }

    /// Reads anything, writes nothing.
    pub fn erase_all<S: AsRef<str>, T: AsRef<str>>(input: &[S], output: &[T]) -> Transducer {
        let mut b = TransducerBuilder::new(input, output);
        let q = b.state("erase");
        b.initial(q).accept(q);
        for a in 0..input.len() {
            b.add(q, Some(a), None, q);
        }
        b.build()
    }

    /// Transducer of the letter-to-word morphism given by `images`, one
    /// entry per input symbol.
    pub fn morphism<S: AsRef<str>, T: AsRef<str>, U: AsRef<str>>(
        input: &[S],
        output: &[T],
        images: &[(U, Vec<U>)],
    ) -> Result<Transducer> {
        let mut b = TransducerBuilder::new(input, output);
        let q = b.state("h");
        b.initial(q).accept(q);
        for (sym, image) in images {
            let a = b
                .input_symbol(sym.as_ref())
                .ok_or_else(|| Error::UnknownSymbol(sym.as_ref().to_string()))?;
            let word = image
                .iter()
                .map(|s| {
                    b.output_symbol(s.as_ref())
                        .ok_or_else(|| Error::UnknownSymbol(s.as_ref().to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            b.add_path(q, Some(a), &word, q, &format!("h[{}]", sym.as_ref()));
        }
        Ok(b.build())
    }

    /// Swap the two tapes.
    pub fn inverse(&self) -> Transducer {
        let moves = self
            .moves
            .iter()
            .map(|m| Move {
                read: m.write,
                write: m.read,
                ..*m
            })
            .collect();
        Transducer::assemble(
            self.output_alphabet.clone(),
            self.input_alphabet.clone(),
            self.states.clone(),
            self.initial,
            self.accepting.clone(),
            moves,
        )
    }

    pub fn input_alphabet(&self) -> &[String] {
        &self.input_alphabet
    }

    pub fn output_alphabet(&self) -> &[String] {
        &self.output_alphabet
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn accepting(&self) -> &BTreeSet<usize> {
        &self.accepting
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    pub fn encode_input<S: AsRef<str>>(&self, w: &[S]) -> Result<Vec<usize>> {
        w.iter()
            .map(|s| {
                self.input_alphabet
                    .iter()
                    .position(|a| a == s.as_ref())
                    .ok_or_else(|| Error::UnknownSymbol(s.as_ref().to_string()))
            })
            .collect()
    }

    pub fn decode_output(&self, w: &[usize]) -> Word {
        w.iter().map(|&b| self.output_alphabet[b].clone()).collect()
    }

    /// All outputs of length at most `max_out` produced on accepting runs
    /// over `w`.
    pub fn transduce_bounded_ids(&self, w: &[usize], max_out: usize) -> BTreeSet<Vec<usize>> {
        let mut results = BTreeSet::new();
        let mut seen: HashSet<(usize, usize, Vec<usize>)> = HashSet::new();
        let mut stack = vec![(self.initial, 0usize, Vec::new())];
        while let Some((q, pos, outw)) = stack.pop() {
            if !seen.insert((q, pos, outw.clone())) {
                continue;
            }
            if pos == w.len() && self.accepting.contains(&q) {
                results.insert(outw.clone());
            }
            for m in &self.out[q] {
                let npos = match m.read {
                    None => pos,
                    Some(a) if pos < w.len() && w[pos] == a => pos + 1,
                    Some(_) => continue,
                };
                let mut nout = outw.clone();
                if let Some(b) = m.write {
                    if nout.len() == max_out {
                        continue;
                    }
                    nout.push(b);
                }
                stack.push((m.to, npos, nout));
            }
        }
        results
    }

    pub fn transduce_bounded<S: AsRef<str>>(&self, w: &[S], max_out: usize) -> Result<BTreeSet<Word>> {
        let ids = self.encode_input(w)?;
        Ok(self
            .transduce_bounded_ids(&ids, max_out)
            .into_iter()
            .map(|o| self.decode_output(&o))
            .collect())
    }

    /// Transducer for the relation `{(u, v) | ∃y (u, y) ∈ self, (y, v) ∈ next}`.
    pub fn compose(&self, next: &Transducer) -> Result<Transducer> {
        if !same_alphabet(&self.output_alphabet, &next.input_alphabet) {
            return Err(Error::AlphabetMismatch(format!(
                "output {:?} vs input {:?}",
                self.output_alphabet, next.input_alphabet
            )));
        }
        let bridge: Vec<usize> = self
            .output_alphabet
            .iter()
            .map(|s| next.input_alphabet.iter().position(|t| t == s).unwrap())
            .collect();
        let mut b = TransducerBuilder::new(&self.input_alphabet, &next.output_alphabet);
        let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut queue = VecDeque::new();
        let mut intern = |b: &mut TransducerBuilder,
                          queue: &mut VecDeque<(usize, usize)>,
                          p: usize,
                          q: usize| {
            *ids.entry((p, q)).or_insert_with(|| {
                queue.push_back((p, q));
                b.state(format!("({},{})", self.states[p], next.states[q]))
            })
        };
        let start = intern(&mut b, &mut queue, self.initial, next.initial);
        b.initial(start);
        while let Some((p, q)) = queue.pop_front() {
            let from = intern(&mut b, &mut queue, p, q);
            if self.accepting.contains(&p) && next.accepting.contains(&q) {
                b.accept(from);
            }
            for m1 in &self.out[p] {
                match m1.write {
                    None => {
                        let to = intern(&mut b, &mut queue, m1.to, q);
                        b.add(from, m1.read, None, to);
                    }
                    Some(y) => {
                        for m2 in &next.out[q] {
                            if m2.read == Some(bridge[y]) {
                                let to = intern(&mut b, &mut queue, m1.to, m2.to);
                                b.add(from, m1.read, m2.write, to);
                            }
                        }
                    }
                }
            }
            for m2 in &next.out[q] {
                if m2.read.is_none() {
                    let to = intern(&mut b, &mut queue, p, m2.to);
                    b.add(from, None, m2.write, to);
                }
            }
        }
        Ok(b.build().trim())
    }

    /// Automaton over the input alphabet recognizing
    /// `{w | ∃y ∈ L(a), (w, y) ∈ self}`.
    pub fn compose_nfa(&self, a: &Nfa) -> Result<Nfa> {
        if !same_alphabet(&self.output_alphabet, a.alphabet()) {
            return Err(Error::AlphabetMismatch(format!(
                "transducer output {:?} vs automaton {:?}",
                self.output_alphabet,
                a.alphabet()
            )));
        }
        let bridge: Vec<usize> = self
            .output_alphabet
            .iter()
            .map(|s| a.symbol_id(s).unwrap())
            .collect();
        let mut b = NfaBuilder::new(&self.input_alphabet);
        let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut queue = VecDeque::new();
        let mut intern = |b: &mut NfaBuilder, queue: &mut VecDeque<(usize, usize)>, p: usize, q: usize| {
            *ids.entry((p, q)).or_insert_with(|| {
                queue.push_back((p, q));
                b.state(format!("({},{})", self.states[p], a.state_name(q)))
            })
        };
        let start = intern(&mut b, &mut queue, self.initial, a.initial());
        b.initial(start);
        while let Some((p, q)) = queue.pop_front() {
            let from = intern(&mut b, &mut queue, p, q);
            if self.accepting.contains(&p) && a.is_accepting(q) {
                b.accept(from);
            }
            for m in &self.out[p] {
                match m.write {
                    None => {
                        let to = intern(&mut b, &mut queue, m.to, q);
                        b.transition(from, m.read, to);
                    }
                    Some(y) => {
                        for &(l, q2) in a.out(q) {
                            if l == Some(bridge[y]) {
                                let to = intern(&mut b, &mut queue, m.to, q2);
                                b.transition(from, m.read, to);
                            }
                        }
                    }
                }
            }
            for &(l, q2) in a.out(q) {
                if l.is_none() {
                    let to = intern(&mut b, &mut queue, p, q2);
                    b.transition(from, None, to);
                }
            }
        }
        Ok(b.build().trim())
    }

    /// Forget the output tape.
    pub fn domain_nfa(&self) -> Nfa {
        let mut b = NfaBuilder::new(&self.input_alphabet);
        for s in &self.states {
            b.state(s.clone());
        }
        b.initial(self.initial);
        for &f in &self.accepting {
            b.accept(f);
        }
        for m in &self.moves {
            b.transition(m.from, m.read, m.to);
        }
        b.build()
    }

    /// Keep the initial state and states lying on some accepting run.
    pub fn trim(&self) -> Transducer {
        let n = self.num_states();
        let mut fwd = vec![false; n];
        fwd[self.initial] = true;
        let mut stack = vec![self.initial];
        while let Some(q) = stack.pop() {
            for m in &self.out[q] {
                if !fwd[m.to] {
                    fwd[m.to] = true;
                    stack.push(m.to);
                }
            }
        }
        let mut rev = vec![Vec::new(); n];
        for m in &self.moves {
            rev[m.to].push(m.from);
        }
        let mut bwd = vec![false; n];
        let mut stack: Vec<usize> = self.accepting.iter().copied().collect();
        for &f in &stack {
            bwd[f] = true;
        }
        while let Some(q) = stack.pop() {
            for &p in &rev[q] {
                if !bwd[p] {
                    bwd[p] = true;
                    stack.push(p);
                }
            }
        }
        let keep: Vec<bool> = (0..n)
            .map(|q| q == self.initial || (fwd[q] && bwd[q]))
            .collect();
        let mut map = vec![usize::MAX; n];
        let mut states = Vec::new();
        for q in 0..n {
            if keep[q] {
                map[q] = states.len();
                states.push(self.states[q].clone());
            }
        }
        let moves = self
            .moves
            .iter()
            .filter(|m| keep[m.from] && keep[m.to])
            .map(|m| Move {
                from: map[m.from],
                to: map[m.to],
                ..*m
            })
            .collect();
        let accepting = self
            .accepting
            .iter()
            .filter(|&&q| keep[q])
            .map(|&q| map[q])
            .collect();
        Transducer::assemble(
            self.input_alphabet.clone(),
            self.output_alphabet.clone(),
            states,
            map[self.initial],
            accepting,
            moves,
        )
    }

    pub fn to_file(&self) -> TransducerFile {
        let name = |o: Option<usize>, alph: &[String]| o.map(|i| alph[i].clone()).unwrap_or_default();
        TransducerFile {
            states: self.states.clone(),
            input_alphabet: self.input_alphabet.clone(),
            output_alphabet: self.output_alphabet.clone(),
            initial: self.states[self.initial].clone(),
            accepting: self.accepting.iter().map(|&q| self.states[q].clone()).collect(),
            transitions: self
                .moves
                .iter()
                .map(|m| TransducerTransitionFile {
                    from: self.states[m.from].clone(),
                    read: name(m.read, &self.input_alphabet),
                    write: name(m.write, &self.output_alphabet),
                    to: self.states[m.to].clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        // Going through `Value` sorts the keys.
        let value = serde_json::to_value(self.to_file()).expect("transducer serialization cannot fail");
        serde_json::to_string_pretty(&value).expect("transducer serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Transducer> {
        let file: TransducerFile = serde_json::from_str(text)?;
        file.into_transducer()
    }
}

/// On-disk transducer layout; `""` in `read`/`write` is ε.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransducerFile {
    pub states: Vec<String>,
    pub input_alphabet: Vec<String>,
    pub output_alphabet: Vec<String>,
    pub initial: String,
    pub accepting: Vec<String>,
    pub transitions: Vec<TransducerTransitionFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransducerTransitionFile {
    pub from: String,
    pub read: String,
    pub write: String,
    pub to: String,
}

impl TransducerFile {
    pub fn into_transducer(self) -> Result<Transducer> {
        let mut b = TransducerBuilder::new(&self.input_alphabet, &self.output_alphabet);
        for s in &self.states {
            if b.state_index.contains_key(s) {
                return Err(Error::InvalidAutomaton(format!("duplicate state `{s}`")));
            }
            b.state(s.clone());
        }
        let lookup = |b: &TransducerBuilder, s: &str| {
            b.state_index
                .get(s)
                .copied()
                .ok_or_else(|| Error::UnknownState(s.to_string()))
        };
        let init = lookup(&b, &self.initial)?;
        b.initial(init);
        for f in &self.accepting {
            let f = lookup(&b, f)?;
            b.accept(f);
        }
        for t in &self.transitions {
            let from = lookup(&b, &t.from)?;
            let to = lookup(&b, &t.to)?;
            let read = match t.read.as_str() {
                "" => None,
                s => Some(b.input_symbol(s).ok_or_else(|| Error::UnknownSymbol(s.to_string()))?),
            };
            let write = match t.write.as_str() {
                "" => None,
                s => Some(b.output_symbol(s).ok_or_else(|| Error::UnknownSymbol(s.to_string()))?),
            };
            b.add(from, read, write, to);
        }
        Ok(b.build())
    }
}
