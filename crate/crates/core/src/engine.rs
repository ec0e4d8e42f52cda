//! Decision procedures for `L(A) ∩ F ≠ ∅`, substitution collapse, rational
//! index measurement and the divide-and-conquer checker.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::automata::{Nfa, NfaBuilder, Word};
use crate::counter::{AcceptMode, CounterAutomaton};
use crate::error::{Error, Result};
use crate::filters::{self, FilterSpec};
use crate::gen;
use crate::grammar::{Cfg, Sym};
use crate::oracle;
use crate::reductions::{bar_hillel_productive, intersection_min_length};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    BarHillel,
    Counter,
    Substitution,
    Log2,
}

/// Requested pipeline; `Auto` picks by filter kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MethodChoice {
    #[default]
    Auto,
    BarHillel,
    Counter,
    Log2,
}

impl std::str::FromStr for MethodChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(MethodChoice::Auto),
            "bar-hillel" => Ok(MethodChoice::BarHillel),
            "counter" => Ok(MethodChoice::Counter),
            "log2" => Ok(MethodChoice::Log2),
            _ => Err(Error::parse(0, 0, format!("unknown method `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecisionReport {
    pub method: Method,
    pub nonempty: bool,
    pub stats: BTreeMap<String, u64>,
    pub witness: Option<Word>,
}

impl DecisionReport {
    /// Pretty JSON with sorted keys.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report serialization cannot fail");
        serde_json::to_string_pretty(&value).expect("report serialization cannot fail")
    }
}

/// A filter prepared for repeated queries.
#[derive(Debug, Clone)]
pub struct Decider {
    filter: FilterSpec,
    cnf: Option<Cfg>,
}

fn check_alphabet(a: &Nfa, f: &FilterSpec) -> Result<()> {
    let fa = f.alphabet();
    let missing: Vec<&String> = a.alphabet().iter().filter(|s| !fa.contains(s)).collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::AlphabetMismatch(format!(
            "automaton symbols {missing:?} are not in the {} alphabet",
            f.name()
        )))
    }
}

impl Decider {
    pub fn new(filter: &FilterSpec) -> Decider {
        Decider {
            cnf: filter.grammar().map(|g| g.to_cnf()),
            filter: filter.clone(),
        }
    }

    pub fn filter(&self) -> &FilterSpec {
        &self.filter
    }

    fn counter_machine(&self) -> Result<CounterAutomaton> {
        match &self.filter {
            FilterSpec::Counter(m) => Ok(m.clone()),
            FilterSpec::Dyck(1) => Ok(CounterAutomaton::dyck1(
                &filters::dyck_open(1),
                &filters::dyck_close(1),
                AcceptMode::FinalState,
            )),
            other => Err(Error::UnsupportedFilter(format!(
                "no counter automaton for {other}"
            ))),
        }
    }

    fn grammar(&self) -> Result<&Cfg> {
        self.cnf.as_ref().ok_or_else(|| {
            Error::UnsupportedFilter(format!("no grammar for {}", self.filter))
        })
    }

    pub fn decide(&self, a: &Nfa, method: MethodChoice) -> Result<DecisionReport> {
        check_alphabet(a, &self.filter)?;
        let method = match method {
            MethodChoice::Auto => match self.filter {
                FilterSpec::Counter(_) => MethodChoice::Counter,
                FilterSpec::SSharpUp => {
                    return Err(Error::UnsupportedFilter(
                        "ssharpup can only be a reduction target".into(),
                    ))
                }
                _ => MethodChoice::BarHillel,
            },
            m => m,
        };
        let mut stats = BTreeMap::new();
        let (method, witness, nonempty) = match method {
            MethodChoice::BarHillel | MethodChoice::Auto => {
                let g = self.grammar()?;
                let out = bar_hillel_productive(g, a)?;
                stats.insert("nonterminals_created".into(), out.num_nonterminals() as u64);
                stats.insert("rules_created".into(), out.rules().len() as u64);
                stats.insert("states_created".into(), a.num_states() as u64);
                let w = out.shortest_word();
                let nonempty = w.is_some();
                (Method::BarHillel, w, nonempty)
            }
            MethodChoice::Counter => {
                let m = self.counter_machine()?;
                let product = m.product(&a.with_alphabet(m.alphabet()))?;
                let cap = product.default_cap();
                let nfa = product.to_nfa(cap);
                stats.insert("counter_cap".into(), cap as u64);
                stats.insert("states_created".into(), nfa.num_states() as u64);
                let w = nfa.shortest_witness();
                let nonempty = w.is_some();
                (Method::Counter, w, nonempty)
            }
            MethodChoice::Log2 => {
                let g = self.grammar()?;
                let checker = log2_check(g, &a.remove_epsilon())?;
                stats.insert("max_live_triples".into(), checker.max_live_triples as u64);
                stats.insert("max_recursion_depth".into(), checker.max_recursion_depth as u64);
                if let Some(l) = checker.witness_length {
                    stats.insert("witness_length".into(), l as u64);
                }
                (Method::Log2, None, checker.result)
            }
        };
        if let Some(w) = &witness {
            stats.insert("witness_length".into(), w.len() as u64);
            assert!(a.accepts(w)?, "witness rejected by the automaton");
            assert!(self.filter.member(w)?, "witness rejected by the filter");
        }
        Ok(DecisionReport {
            method,
            nonempty,
            stats,
            witness,
        })
    }

    /// Length of a shortest word of `L(a) ∩ F`, via the default pipeline.
    pub fn shortest_length(&self, a: &Nfa) -> Result<Option<usize>> {
        match (&self.filter, &self.cnf) {
            (FilterSpec::Counter(_), _) | (_, None) => {
                Ok(self.decide(a, MethodChoice::Auto)?.witness.map(|w| w.len()))
            }
            (_, Some(g)) => {
                check_alphabet(a, &self.filter)?;
                intersection_min_length(g, a)
            }
        }
    }
}

pub fn nrr_decide(a: &Nfa, f: &FilterSpec) -> Result<DecisionReport> {
    Decider::new(f).decide(a, MethodChoice::Auto)
}

pub fn nrr_decide_with(a: &Nfa, f: &FilterSpec, method: MethodChoice) -> Result<DecisionReport> {
    Decider::new(f).decide(a, method)
}

struct Collapse {
    nfa: Nfa,
    /// Per edge `(q, outer symbol, p)`, the inner witness.
    witnesses: HashMap<(usize, usize, usize), Word>,
    decisions: usize,
}

fn collapse(
    a: &Nfa,
    sub: &BTreeMap<String, FilterSpec>,
    outer_alphabet: &[String],
) -> Result<Collapse> {
    let mut filters: Vec<&FilterSpec> = Vec::new();
    let mut which = Vec::new();
    for x in outer_alphabet {
        let f = sub
            .get(x)
            .ok_or_else(|| Error::MissingSubstitution(x.clone()))?;
        let i = match filters.iter().position(|g| *g == f) {
            Some(i) => i,
            None => {
                filters.push(f);
                filters.len() - 1
            }
        };
        which.push(i);
    }
    let n = a.num_states();
    let mut memo: HashMap<(usize, usize, usize), Option<Word>> = HashMap::new();
    let mut decisions = 0;
    for (i, f) in filters.iter().enumerate() {
        let decider = Decider::new(f);
        let alphabet = f.alphabet();
        for q in 0..n {
            for p in 0..n {
                let part = a.sub_automaton_ids(q, p).with_alphabet(&alphabet);
                decisions += 1;
                let report = decider.decide(&part, MethodChoice::Auto)?;
                memo.insert((i, q, p), report.witness);
            }
        }
    }
    let mut b = NfaBuilder::new(outer_alphabet);
    for s in a.states() {
        b.state(s.clone());
    }
    b.initial(a.initial());
    for &f in a.accepting() {
        b.accept(f);
    }
    let mut witnesses = HashMap::new();
    for (x, &i) in which.iter().enumerate() {
        for q in 0..n {
            for p in 0..n {
                if let Some(w) = &memo[&(i, q, p)] {
                    b.transition(q, Some(x), p);
                    witnesses.insert((q, x, p), w.clone());
                }
            }
        }
    }
    Ok(Collapse {
        nfa: b.build(),
        witnesses,
        decisions,
    })
}

/// Automaton over `outer_alphabet` with an edge `q -x-> p` exactly when
/// `L(a restricted to q..p) ∩ sub[x] ≠ ∅`.
pub fn substitution_collapse(
    a: &Nfa,
    sub: &BTreeMap<String, FilterSpec>,
    outer_alphabet: &[String],
) -> Result<Nfa> {
    Ok(collapse(a, sub, outer_alphabet)?.nfa)
}

/// Decide `L(a) ∩ σ(L(outer)) ≠ ∅` by collapsing `a` and deciding the
/// outer filter on the result. The witness is assembled from the outer
/// witness and the inner witnesses of the edges on its run.
pub fn substitution_decide(
    a: &Nfa,
    outer: &FilterSpec,
    sub: &BTreeMap<String, FilterSpec>,
) -> Result<DecisionReport> {
    let outer_alphabet = outer.alphabet();
    let c = collapse(a, sub, &outer_alphabet)?;
    let report = nrr_decide(&c.nfa, outer)?;
    let mut stats = BTreeMap::new();
    stats.insert("inner_decisions".into(), c.decisions as u64);
    stats.insert("collapsed_edges".into(), c.nfa.transitions().len() as u64);
    let witness = match &report.witness {
        None => None,
        Some(x) => {
            let run = accepting_run(&c.nfa, &c.nfa.encode(x)?).expect("outer witness is accepted");
            let mut w = Vec::new();
            for (i, &sym) in c.nfa.encode(x)?.iter().enumerate() {
                w.extend(c.witnesses[&(run[i], sym, run[i + 1])].iter().cloned());
            }
            Some(w)
        }
    };
    if let Some(w) = &witness {
        stats.insert("witness_length".into(), w.len() as u64);
        assert!(a.accepts(w)?, "witness rejected by the automaton");
        if let Some(g) = outer.grammar() {
            assert!(oracle::sigma_member(&g, sub, w)?, "witness outside σ(L)");
        }
    }
    Ok(DecisionReport {
        method: Method::Substitution,
        nonempty: report.nonempty,
        stats,
        witness,
    })
}

/// State sequence of an accepting run of an ε-free automaton.
fn accepting_run(a: &Nfa, w: &[usize]) -> Option<Vec<usize>> {
    let n = a.num_states();
    let mut back: Vec<Vec<Option<usize>>> = vec![vec![None; n]; w.len() + 1];
    let mut live = vec![false; n];
    live[a.initial()] = true;
    let mut layers = vec![live];
    for (i, &x) in w.iter().enumerate() {
        let mut next = vec![false; n];
        for q in (0..n).filter(|&q| layers[i][q]) {
            for &(l, p) in a.out(q) {
                if l == Some(x) && !next[p] {
                    next[p] = true;
                    back[i + 1][p] = Some(q);
                }
            }
        }
        layers.push(next);
    }
    let mut q = (0..n).find(|&q| layers[w.len()][q] && a.is_accepting(q))?;
    let mut run = vec![q];
    for i in (1..=w.len()).rev() {
        q = back[i][q]?;
        run.push(q);
    }
    run.reverse();
    Some(run)
}

/// Highest state count accepted by exhaustive rational index mode.
pub const EXHAUSTIVE_CEILING: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexMode {
    Exhaustive,
    Sample { count: usize, seed: u64 },
}

fn nfa_from_mask(n: usize, alphabet: &[String], names: &[String], mask: u64, acc: u64) -> Nfa {
    let k = alphabet.len();
    let mut b = NfaBuilder::new(alphabet);
    for name in names {
        b.state(name.clone());
    }
    b.initial(0);
    for q in 0..n {
        if acc >> q & 1 == 1 {
            b.accept(q);
        }
    }
    for bit in 0..n * k * n {
        if mask >> bit & 1 == 1 {
            b.transition(bit / (k * n), Some(bit / n % k), bit % n);
        }
    }
    b.build()
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Whether `(mask, acc)` is the least encoding among all relabelings of
/// states that keep state 0 in place.
fn is_canonical(n: usize, k: usize, mask: u64, acc: u64, perms: &[Vec<usize>]) -> bool {
    for perm in perms {
        let mut pm = 0u64;
        for bit in 0..n * k * n {
            if mask >> bit & 1 == 1 {
                let (q, a, p) = (bit / (k * n), bit / n % k, bit % n);
                pm |= 1 << ((perm[q] * k + a) * n + perm[p]);
            }
        }
        let mut pa = 0u64;
        for q in 0..n {
            if acc >> q & 1 == 1 {
                pa |= 1 << perm[q];
            }
        }
        if (pm, pa) < (mask, acc) {
            return false;
        }
    }
    true
}

/// Largest shortest-witness length over ε-free `n`-state automata whose
/// language meets the filter.
pub fn rational_index(f: &FilterSpec, n: usize, mode: IndexMode) -> Result<usize> {
    if n == 0 {
        return Err(Error::Limit("rational index needs at least one state".into()));
    }
    let decider = Decider::new(f);
    let alphabet = f.alphabet();
    let k = alphabet.len();
    let names: Vec<String> = (0..n).map(|q| q.to_string()).collect();
    let slots = n * k * n;
    let eval = |mask: u64, acc: u64| -> Result<Option<usize>> {
        decider.shortest_length(&nfa_from_mask(n, &alphabet, &names, mask, acc))
    };
    let best = match mode {
        IndexMode::Exhaustive => {
            if n > EXHAUSTIVE_CEILING || k > 4 || slots > 24 {
                return Err(Error::Limit(format!(
                    "exhaustive mode supports at most {EXHAUSTIVE_CEILING} states and 24 transition slots \
                     (asked for {n} states over {k} symbols)"
                )));
            }
            let ids: Vec<usize> = (1..n).collect();
            let perms: Vec<Vec<usize>> = permutations(&ids)
                .into_iter()
                .map(|p| std::iter::once(0).chain(p).collect())
                .collect();
            (0u64..1 << slots)
                .into_par_iter()
                .map(|mask| -> Result<usize> {
                    let mut best = 0;
                    for acc in 0u64..1 << n {
                        if acc == 0 || !is_canonical(n, k, mask, acc, &perms) {
                            continue;
                        }
                        if let Some(l) = eval(mask, acc)? {
                            best = best.max(l);
                        }
                    }
                    Ok(best)
                })
                .try_reduce(|| 0, |x, y| Ok(x.max(y)))?
        }
        IndexMode::Sample { count, seed } => {
            if slots > 64 {
                return Err(Error::Limit("too many transition slots for sampling".into()));
            }
            let mut rng = gen::rng(seed);
            let candidates: Vec<(u64, u64)> = (0..count)
                .map(|_| {
                    let mut mask = 0u64;
                    for bit in 0..slots {
                        if rng.gen_bool(0.5) {
                            mask |= 1 << bit;
                        }
                    }
                    let acc = rng.gen_range(1u64..1 << n);
                    (mask, acc)
                })
                .collect();
            candidates
                .into_par_iter()
                .map(|(mask, acc)| -> Result<usize> { Ok(eval(mask, acc)?.unwrap_or(0)) })
                .try_reduce(|| 0, |x, y| Ok(x.max(y)))?
        }
    };
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CheckerStats {
    pub max_live_triples: usize,
    pub max_recursion_depth: usize,
    pub result: bool,
    /// Length of the shortest word found, when the answer is positive.
    pub witness_length: Option<usize>,
}

struct Checker<'a> {
    g: &'a Cfg,
    n: usize,
    /// `trans[σ][q]`: successors of `q` on `σ`.
    trans: Vec<Vec<Vec<usize>>>,
    /// `paths[l][q][p]`: some path of length `l` leads from `q` to `p`.
    paths: Vec<Vec<Vec<bool>>>,
    /// `lengths[l][x]`: nonterminal `x` derives some word of length `l`.
    lengths: Vec<Vec<bool>>,
    /// Keyed by `(x, q, p, len, frame_len)`. `Some(h)`: derivable, and the
    /// derivation found sits `h` frames tall inside a frame of `frame_len`.
    memo: HashMap<(usize, usize, usize, usize, usize), Option<usize>>,
    live: usize,
    max_live: usize,
    max_depth: usize,
}

impl Checker<'_> {
    fn extend_tables(&mut self, upto: usize) {
        while self.paths.len() <= upto {
            let l = self.paths.len();
            let mut next = vec![vec![false; self.n]; self.n];
            if l == 0 {
                for (q, row) in next.iter_mut().enumerate() {
                    row[q] = true;
                }
            } else {
                for q in 0..self.n {
                    for m in 0..self.n {
                        if !self.paths[l - 1][q][m] {
                            continue;
                        }
                        for succ in &self.trans {
                            for &p in &succ[m] {
                                next[q][p] = true;
                            }
                        }
                    }
                }
            }
            self.paths.push(next);
            let mut lens = vec![false; self.g.num_nonterminals()];
            loop {
                let mut changed = false;
                for r in self.g.rules() {
                    if lens[r.lhs] {
                        continue;
                    }
                    let ok = match r.rhs[..] {
                        [] => l == 0,
                        [Sym::T(_)] => l == 1,
                        [Sym::N(y), Sym::N(z)] => (1..l).any(|ly| {
                            self.lengths.get(ly).is_some_and(|v| v[y])
                                && self.lengths.get(l - ly).is_some_and(|v| v[z])
                        }),
                        _ => false,
                    };
                    if ok {
                        lens[r.lhs] = true;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            self.lengths.push(lens);
        }
    }

    /// Start a new frame: verify `[q x p]` for words of length `len`.
    /// Returns the height of the frame tree below it on success. Memoized
    /// subtrees count towards `max_depth` as if they had been re-explored.
    fn frame(&mut self, x: usize, q: usize, p: usize, len: usize, depth: usize) -> Option<usize> {
        self.live += 1;
        self.max_live = self.max_live.max(self.live);
        self.max_depth = self.max_depth.max(depth);
        let r = self.node(x, q, p, len, len, depth);
        if let Some(h) = r {
            self.max_depth = self.max_depth.max(depth + h);
        }
        self.live -= 1;
        r
    }

    /// Walk down the central branch of a frame of length `frame_len`. Children
    /// longer than two thirds of the frame stay on the branch; every other
    /// child is checked in a frame of its own.
    fn node(&mut self, x: usize, q: usize, p: usize, len: usize, frame_len: usize, depth: usize) -> Option<usize> {
        if let Some(&r) = self.memo.get(&(x, q, p, len, frame_len)) {
            return r;
        }
        if !self.paths[len][q][p] || !self.lengths[len][x] {
            return None;
        }
        let g = self.g;
        let mut found = None;
        'rules: for r in g.rules().iter().filter(|r| r.lhs == x) {
            match r.rhs[..] {
                [] => {
                    if len == 0 && q == p {
                        found = Some(0);
                        break;
                    }
                }
                [Sym::T(t)] => {
                    if len == 1 && self.trans[t][q].contains(&p) {
                        found = Some(0);
                        break;
                    }
                }
                [Sym::N(y), Sym::N(z)] => {
                    for ly in 1..len {
                        let lz = len - ly;
                        if !self.lengths[ly][y] || !self.lengths[lz][z] {
                            continue;
                        }
                        for m in 0..self.n {
                            if !self.paths[ly][q][m] || !self.paths[lz][m][p] {
                                continue;
                            }
                            let h = if 3 * ly > 2 * frame_len {
                                self.frame(z, m, p, lz, depth + 1).and_then(|hz| {
                                    self.node(y, q, m, ly, frame_len, depth).map(|hy| hy.max(hz + 1))
                                })
                            } else if 3 * lz > 2 * frame_len {
                                self.frame(y, q, m, ly, depth + 1).and_then(|hy| {
                                    self.node(z, m, p, lz, frame_len, depth).map(|hz| hz.max(hy + 1))
                                })
                            } else {
                                self.frame(y, q, m, ly, depth + 1).and_then(|hy| {
                                    self.frame(z, m, p, lz, depth + 1).map(|hz| hy.max(hz) + 1)
                                })
                            };
                            if h.is_some() {
                                found = h;
                                break 'rules;
                            }
                        }
                    }
                }
                _ => unreachable!("checked CNF"),
            }
        }
        self.memo.insert((x, q, p, len, frame_len), found);
        found
    }
}

/// Decide `L(a) ∩ L(g) ≠ ∅` by checking triples `[q A p]` recursively,
/// splitting every derivation at a central node whose yield has between a
/// third and two thirds of the current length.
///
/// Word lengths are tried in increasing order. The search stops at the
/// first length with a derivation from the axiom, or once no triple has a
/// shortest derivation of length above half the current one, after which
/// no new triple can become derivable.
pub fn log2_check(g: &Cfg, a: &Nfa) -> Result<CheckerStats> {
    if !g.is_cnf() {
        return Err(Error::NotCnf);
    }
    if a.has_epsilon() {
        return Err(Error::EpsilonTransitions);
    }
    let n = a.num_states();
    let tmap: Vec<Option<usize>> = g.terminals().iter().map(|t| a.symbol_id(t)).collect();
    let mut trans = vec![vec![Vec::new(); n]; g.terminals().len()];
    for t in a.transitions() {
        if let Some(l) = t.label {
            for (gt, m) in tmap.iter().enumerate() {
                if *m == Some(l) {
                    trans[gt][t.from].push(t.to);
                }
            }
        }
    }
    let mut c = Checker {
        g,
        n,
        trans,
        paths: Vec::new(),
        lengths: Vec::new(),
        memo: HashMap::new(),
        live: 0,
        max_live: 0,
        max_depth: 0,
    };
    let nn = g.num_nonterminals();
    let mut discovered = vec![false; nn * n * n];
    let mut last_new = 0usize;
    let mut len = 0usize;
    loop {
        c.extend_tables(len);
        for &f in a.accepting() {
            if c.frame(g.axiom(), a.initial(), f, len, 0).is_some() {
                return Ok(CheckerStats {
                    max_live_triples: c.max_live,
                    max_recursion_depth: c.max_depth,
                    result: true,
                    witness_length: Some(len),
                });
            }
        }
        if len > 0 {
            for x in 0..nn {
                for q in 0..n {
                    for p in 0..n {
                        let i = (x * n + q) * n + p;
                        if !discovered[i] && c.frame(x, q, p, len, 0).is_some() {
                            discovered[i] = true;
                            last_new = len;
                        }
                    }
                }
            }
        }
        if len >= 1 && len >= 2 * last_new {
            return Ok(CheckerStats {
                max_live_triples: c.max_live,
                max_recursion_depth: c.max_depth,
                result: false,
                witness_length: None,
            });
        }
        len += 1;
    }
}
