//! Grammar × automaton intersection, the Dyck-driven transducer for a
//! grammar, the marking transformation and the reduction into `S_#^↑`.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use crate::automata::{Nfa, NfaBuilder, Word};
use crate::error::{Error, Result};
use crate::filters::{self, CLOSE, OPEN, SHARP};
use crate::grammar::{Cfg, CfgBuilder, Sym};
use crate::transducer::{Transducer, TransducerBuilder};

/// `step[σ][q]`: states `p` with `q →ε* · σ · ε* p`.
fn letter_steps(a: &Nfa) -> Vec<Vec<Vec<bool>>> {
    let n = a.num_states();
    let eps = a.epsilon_closure_matrix();
    let mut step = vec![vec![vec![false; n]; n]; a.alphabet().len()];
    for q in 0..n {
        for q1 in (0..n).filter(|&q1| eps[q][q1]) {
            for &(label, p1) in a.out(q1) {
                let Some(s) = label else { continue };
                for p in 0..n {
                    if eps[p1][p] {
                        step[s][q][p] = true;
                    }
                }
            }
        }
    }
    step
}

/// Grammar terminal id → automaton symbol id.
fn terminal_map(g: &Cfg, a: &Nfa) -> Vec<Option<usize>> {
    g.terminals().iter().map(|t| a.symbol_id(t)).collect()
}

fn triple_name(a: &Nfa, g: &Cfg, q: usize, x: usize, p: usize) -> String {
    format!("[{},{},{}]", a.state_name(q), g.nonterminals()[x], a.state_name(p))
}

/// Intersection grammar with one nonterminal `[q,A,p]` for every state pair
/// and nonterminal of `g`, plus a fresh axiom.
///
/// ε-moves of `a` are absorbed into the terminal rules: `[q,A,p] → σ` when
/// `q →ε* σ ε* p`, and `[q,A,p] → ε` for `A → ε` when `q →ε* p`. Longer
/// right-hand sides chain triples through shared states. Unproductive
/// triples are kept, so for ε-free `g` the output has exactly
/// `|N|·|Q|² + 1` nonterminals.
pub fn bar_hillel(g: &Cfg, a: &Nfa) -> Cfg {
    let n = a.num_states();
    let nn = g.num_nonterminals();
    let eps = a.epsilon_closure_matrix();
    let step = letter_steps(a);
    let tmap = terminal_map(g, a);
    let mut b = CfgBuilder::new();
    for t in g.terminals() {
        b.terminal(t.clone());
    }
    // Triple names end in `]`, so the primed axiom name is always fresh.
    let start = b.nonterminal(format!("{}'", g.nonterminals()[g.axiom()]));
    let id = |q: usize, x: usize, p: usize| 1 + (q * nn + x) * n + p;
    for q in 0..n {
        for x in 0..nn {
            for p in 0..n {
                let i = b.nonterminal(triple_name(a, g, q, x, p));
                debug_assert_eq!(i, id(q, x, p));
            }
        }
    }
    for r in g.rules() {
        if r.rhs.is_empty() {
            for q in 0..n {
                for p in (0..n).filter(|&p| eps[q][p]) {
                    b.rule(id(q, r.lhs, p), vec![]);
                }
            }
            continue;
        }
        for q0 in 0..n {
            // extend partial state chains one symbol at a time
            let mut chains: Vec<(usize, Vec<Sym>)> = vec![(q0, Vec::new())];
            for s in &r.rhs {
                let mut next = Vec::new();
                for (q, rhs) in chains {
                    for p in 0..n {
                        let sym = match *s {
                            Sym::T(t) => match tmap[t] {
                                Some(x) if step[x][q][p] => Sym::T(t),
                                _ => continue,
                            },
                            Sym::N(y) => Sym::N(id(q, y, p)),
                        };
                        let mut rhs = rhs.clone();
                        rhs.push(sym);
                        next.push((p, rhs));
                    }
                }
                chains = next;
            }
            for (p, rhs) in chains {
                b.rule(id(q0, r.lhs, p), rhs);
            }
        }
    }
    for &f in a.accepting() {
        b.rule(start, vec![Sym::N(id(a.initial(), g.axiom(), f))]);
    }
    b.build(start)
}

/// Intersection grammar restricted to productive triples reachable from the
/// axiom, computed by a worklist instead of materializing every triple.
/// `L(bar_hillel_productive(g, a)) = L(bar_hillel(g, a))`.
pub fn bar_hillel_productive(g: &Cfg, a: &Nfa) -> Result<Cfg> {
    if !g.is_cnf() {
        return Err(Error::NotCnf);
    }
    let n = a.num_states();
    let nn = g.num_nonterminals();
    let eps = a.epsilon_closure_matrix();
    let step = letter_steps(a);
    let tmap = terminal_map(g, a);
    let id = |q: usize, x: usize, p: usize| (q * nn + x) * n + p;

    let mut left: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nn];
    let mut right: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nn];
    for r in g.rules() {
        if let [Sym::N(y), Sym::N(z)] = r.rhs[..] {
            left[y].push((r.lhs, z));
            right[z].push((r.lhs, y));
        }
    }
    let mut productive = vec![false; nn * n * n];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); nn * n];
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); nn * n];
    let mut work: Vec<(usize, usize, usize)> = Vec::new();
    let add = |q: usize,
                   x: usize,
                   p: usize,
                   productive: &mut Vec<bool>,
                   succ: &mut Vec<Vec<usize>>,
                   pred: &mut Vec<Vec<usize>>,
                   work: &mut Vec<(usize, usize, usize)>| {
        if !productive[id(q, x, p)] {
            productive[id(q, x, p)] = true;
            succ[x * n + q].push(p);
            pred[x * n + p].push(q);
            work.push((q, x, p));
        }
    };
    for r in g.rules() {
        match r.rhs[..] {
            [] => {
                for q in 0..n {
                    for p in 0..n {
                        if eps[q][p] {
                            add(q, r.lhs, p, &mut productive, &mut succ, &mut pred, &mut work);
                        }
                    }
                }
            }
            [Sym::T(t)] => {
                let Some(s) = tmap[t] else { continue };
                for q in 0..n {
                    for p in 0..n {
                        if step[s][q][p] {
                            add(q, r.lhs, p, &mut productive, &mut succ, &mut pred, &mut work);
                        }
                    }
                }
            }
            _ => {}
        }
    }
    while let Some((q, y, r)) = work.pop() {
        for &(x, z) in &left[y] {
            let targets = succ[z * n + r].clone();
            for p in targets {
                add(q, x, p, &mut productive, &mut succ, &mut pred, &mut work);
            }
        }
        for &(x, l) in &right[y] {
            let sources = pred[l * n + q].clone();
            for q0 in sources {
                add(q0, x, r, &mut productive, &mut succ, &mut pred, &mut work);
            }
        }
    }

    let mut b = CfgBuilder::new();
    for t in g.terminals() {
        b.terminal(t.clone());
    }
    let start_name = format!("{}'", g.nonterminals()[g.axiom()]);
    let start = b.nonterminal(start_name);
    let mut queue: Vec<(usize, usize, usize)> = Vec::new();
    let intern = |b: &mut CfgBuilder, queue: &mut Vec<(usize, usize, usize)>, q, x, p| {
        let name = triple_name(a, g, q, x, p);
        let known = b.has_nonterminal(&name);
        let i = b.nonterminal(name);
        if !known {
            queue.push((q, x, p));
        }
        i
    };
    for &f in a.accepting() {
        if productive[id(a.initial(), g.axiom(), f)] {
            let t = intern(&mut b, &mut queue, a.initial(), g.axiom(), f);
            b.rule(start, vec![Sym::N(t)]);
        }
    }
    while let Some((q, x, p)) = queue.pop() {
        let lhs = intern(&mut b, &mut queue, q, x, p);
        for r in g.rules().iter().filter(|r| r.lhs == x) {
            match r.rhs[..] {
                [] => {
                    if eps[q][p] {
                        b.rule(lhs, vec![]);
                    }
                }
                [Sym::T(t)] => {
                    if tmap[t].is_some_and(|s| step[s][q][p]) {
                        b.rule(lhs, vec![Sym::T(t)]);
                    }
                }
                [Sym::N(y), Sym::N(z)] => {
                    for &m in &succ[y * n + q] {
                        if productive[id(m, z, p)] {
                            let ny = intern(&mut b, &mut queue, q, y, m);
                            let nz = intern(&mut b, &mut queue, m, z, p);
                            b.rule(lhs, vec![Sym::N(ny), Sym::N(nz)]);
                        }
                    }
                }
                _ => unreachable!("checked CNF"),
            }
        }
    }
    Ok(b.build(start))
}

/// Length of a shortest word of `L(g) ∩ L(a)` for `g` in Chomsky normal
/// form, by a shortest-derivation search over triples that never names
/// them.
pub fn intersection_min_length(g: &Cfg, a: &Nfa) -> Result<Option<usize>> {
    if !g.is_cnf() {
        return Err(Error::NotCnf);
    }
    let n = a.num_states();
    let nn = g.num_nonterminals();
    let eps = a.epsilon_closure_matrix();
    let step = letter_steps(a);
    let tmap = terminal_map(g, a);
    let id = |q: usize, x: usize, p: usize| (q * nn + x) * n + p;
    let mut left: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nn];
    let mut right: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nn];
    for r in g.rules() {
        if let [Sym::N(y), Sym::N(z)] = r.rhs[..] {
            left[y].push((r.lhs, z));
            right[z].push((r.lhs, y));
        }
    }
    let mut dist = vec![usize::MAX; nn * n * n];
    let mut done = vec![false; nn * n * n];
    let mut heap = BinaryHeap::new();
    for r in g.rules() {
        for q in 0..n {
            for p in 0..n {
                let d = match r.rhs[..] {
                    [] if eps[q][p] => 0,
                    [Sym::T(t)] if tmap[t].is_some_and(|s| step[s][q][p]) => 1,
                    _ => continue,
                };
                if d < dist[id(q, r.lhs, p)] {
                    dist[id(q, r.lhs, p)] = d;
                    heap.push(Reverse((d, q, r.lhs, p)));
                }
            }
        }
    }
    // finished triples by (nonterminal, left state) and (nonterminal, right state)
    let mut from: Vec<Vec<usize>> = vec![Vec::new(); nn * n];
    let mut into: Vec<Vec<usize>> = vec![Vec::new(); nn * n];
    while let Some(Reverse((d, q, y, r))) = heap.pop() {
        if done[id(q, y, r)] {
            continue;
        }
        done[id(q, y, r)] = true;
        from[y * n + q].push(r);
        into[y * n + r].push(q);
        let relax = |q: usize,
                     x: usize,
                     p: usize,
                     d: usize,
                     dist: &mut Vec<usize>,
                     heap: &mut BinaryHeap<_>| {
            if d < dist[id(q, x, p)] {
                dist[id(q, x, p)] = d;
                heap.push(Reverse((d, q, x, p)));
            }
        };
        for &(x, z) in &left[y] {
            for &p in &from[z * n + r] {
                let c = d + dist[id(r, z, p)];
                relax(q, x, p, c, &mut dist, &mut heap);
            }
        }
        for &(x, l) in &right[y] {
            for &q0 in &into[l * n + q] {
                let c = dist[id(q0, l, q)] + d;
                relax(q0, x, r, c, &mut dist, &mut heap);
            }
        }
    }
    Ok(a.accepting()
        .iter()
        .map(|&f| dist[id(a.initial(), g.axiom(), f)])
        .filter(|&d| d != usize::MAX)
        .min())
}

/// The pieces of the Dyck-driven transducer for a grammar.
#[derive(Debug, Clone)]
pub struct CsTransducer {
    /// The grammar in Chomsky normal form.
    pub cnf: Cfg,
    /// `brackets[k - 1]` is the nonterminal encoded by bracket pair `k`;
    /// the axiom is pair 1.
    pub brackets: Vec<usize>,
    /// Transducer from the `|brackets|`-pair Dyck alphabet to the terminals.
    pub inner: Transducer,
    /// `inner` precomposed with the decoding of two-pair Dyck blocks.
    pub full: Transducer,
}

impl CsTransducer {
    pub fn new(g: &Cfg) -> CsTransducer {
        let cnf = g.to_cnf();
        let mut brackets = vec![cnf.axiom()];
        brackets.extend((0..cnf.num_nonterminals()).filter(|&x| x != cnf.axiom()));
        let mut bracket_of = vec![0; cnf.num_nonterminals()];
        for (k, &x) in brackets.iter().enumerate() {
            bracket_of[x] = k;
        }
        let open = |x: usize| 2 * bracket_of[x];
        let close = |x: usize| 2 * bracket_of[x] + 1;

        let input = filters::dyck_alphabet(brackets.len());
        let mut b = TransducerBuilder::new(&input, cnf.terminals());
        let init = b.state("init");
        let lp = b.state("loop");
        b.initial(init).accept(lp);
        b.add(init, Some(open(cnf.axiom())), None, lp);
        for (i, r) in cnf.rules().iter().enumerate() {
            match r.rhs[..] {
                [] => {
                    b.accept(init);
                }
                [Sym::T(t)] => {
                    b.add(lp, Some(close(r.lhs)), Some(t), lp);
                }
                [Sym::N(y), Sym::N(z)] => {
                    let popped = b.state(format!("r{i}.pop"));
                    let pushed = b.state(format!("r{i}.push"));
                    b.add(lp, Some(close(r.lhs)), None, popped);
                    b.add(popped, Some(open(z)), None, pushed);
                    b.add(pushed, Some(open(y)), None, lp);
                }
                _ => unreachable!("CNF rule shapes"),
            }
        }
        let inner = b.build();
        let full = filters::dyck_encoder(brackets.len())
            .inverse()
            .compose(&inner)
            .expect("encoder output matches the bracket alphabet");
        CsTransducer {
            cnf,
            brackets,
            inner,
            full,
        }
    }

    /// Image of a word over the bracket alphabet under the block encoding
    /// `a_k ↦ a1 a2^k`, `ā_k ↦ ā2^k ā1`.
    pub fn encode(&self, d: &[String]) -> Word {
        encode_dyck_word(d)
    }

    /// A two-pair Dyck word whose image contains `w`, found by intersecting
    /// the inverse image of `{w}` with the bracket Dyck language and lifting
    /// the result through the block encoding.
    pub fn preimage<S: AsRef<str>>(&self, w: &[S]) -> Result<Option<Word>> {
        let target = Nfa::single_word(self.cnf.terminals(), w)?;
        let domain = self.inner.compose_nfa(&target)?;
        let dyck = filters::dyck_grammar(self.brackets.len()).to_cnf();
        let g = bar_hillel_productive(&dyck, &domain)?;
        Ok(g.shortest_word().map(|d| encode_dyck_word(&d)))
    }
}

fn encode_dyck_word(d: &[String]) -> Word {
    let mut out = Vec::new();
    for s in d {
        if let Some(k) = s.strip_prefix("abar") {
            let k: usize = k.parse().expect("Dyck symbol");
            out.extend(std::iter::repeat_n(filters::dyck_close(2), k));
            out.push(filters::dyck_close(1));
        } else {
            let k: usize = s[1..].parse().expect("Dyck symbol");
            out.push(filters::dyck_open(1));
            out.extend(std::iter::repeat_n(filters::dyck_open(2), k));
        }
    }
    out
}

/// Transducer over the two-pair Dyck alphabet with `T(D₂) = L(g)`.
pub fn cs_transducer(g: &Cfg) -> Transducer {
    CsTransducer::new(g).full
}

/// Search for a two-pair Dyck word `d` with `w ∈ T(d)` directly on the
/// domain of `t`.
pub fn cs_preimage_direct<S: AsRef<str>>(t: &Transducer, w: &[S]) -> Result<Option<Word>> {
    let target = Nfa::single_word(t.output_alphabet(), w)?;
    let domain = t.compose_nfa(&target)?;
    let g = bar_hillel_productive(&filters::dyck_grammar(2).to_cnf(), &domain)?;
    Ok(g.shortest_word())
}

/// Nonterminal count of the Chomsky normal form of the two-pair Dyck grammar.
pub fn d2_cnf_size() -> usize {
    filters::dyck_grammar(2).to_cnf().num_nonterminals()
}

/// Height bound for witnesses of `L(a) ∩ D₂`: one more than the number of
/// nonterminals of the intersection grammar with the normalized Dyck grammar.
pub fn height_bound(a: &Nfa) -> usize {
    let q = a.num_states();
    d2_cnf_size() * q * q + 2
}

/// An automaton over the two-pair Dyck alphabet together with its height
/// function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedNfa {
    pub nfa: Nfa,
    /// `None` only for the reject state.
    pub height: Vec<Option<usize>>,
    pub reject_state: usize,
}

fn d2_ids(a: &Nfa) -> Result<Vec<usize>> {
    let d2 = filters::dyck_alphabet(2);
    a.alphabet()
        .iter()
        .map(|s| {
            d2.iter()
                .position(|t| t == s)
                .ok_or_else(|| Error::UnknownSymbol(s.clone()))
        })
        .collect()
}

/// The marking transformation: track the bracket height up to
/// [`height_bound`], sending overflow and underflow to a reject state.
pub fn mark_automaton(a: &Nfa) -> Result<MarkedNfa> {
    let ids = d2_ids(a)?;
    let m = height_bound(a);
    let levels = m + 1;
    let mut b = NfaBuilder::new(&filters::dyck_alphabet(2));
    let mut height = Vec::new();
    for q in a.states() {
        for i in 0..levels {
            b.state(format!("({q},{i})"));
            height.push(Some(i));
        }
    }
    let reject = b.state("reject");
    height.push(None);
    let id = |q: usize, i: usize| q * levels + i;
    b.initial(id(a.initial(), 0));
    for &f in a.accepting() {
        b.accept(id(f, 0));
    }
    for t in a.transitions() {
        for i in 0..levels {
            let target = match t.label.map(|l| ids[l]) {
                None => id(t.to, i),
                // even ids open, odd ids close
                Some(s) if s % 2 == 0 => {
                    if i < m {
                        id(t.to, i + 1)
                    } else {
                        reject
                    }
                }
                Some(_) => {
                    if i > 0 {
                        id(t.to, i - 1)
                    } else {
                        reject
                    }
                }
            };
            b.transition(id(t.from, i), t.label.map(|l| ids[l]), target);
        }
    }
    Ok(MarkedNfa {
        nfa: b.build(),
        height,
        reject_state: reject,
    })
}

/// `φ(a_i) = a x_i`, `φ(ā_i) = x̄_i ā # #`.
pub fn phi<S: AsRef<str>>(u: &[S]) -> Result<Word> {
    let mut out = Vec::new();
    for s in u {
        match s.as_ref() {
            "a1" => out.extend([OPEN, "x1"].map(String::from)),
            "a2" => out.extend([OPEN, "x2"].map(String::from)),
            "abar1" => out.extend(["xbar1", CLOSE, SHARP, SHARP].map(String::from)),
            "abar2" => out.extend(["xbar2", CLOSE, SHARP, SHARP].map(String::from)),
            other => return Err(Error::UnknownSymbol(other.to_string())),
        }
    }
    Ok(out)
}

/// `a x1 x2 φ(u) xbar2 xbar1 abar`
pub fn phi_witness<S: AsRef<str>>(u: &[S]) -> Result<Word> {
    let mut out: Word = [OPEN, "x1", "x2"].map(String::from).to_vec();
    out.extend(phi(u)?);
    out.extend(["xbar2", "xbar1", CLOSE].map(String::from));
    Ok(out)
}

/// Automaton over `A ∪ X ∪ {#}` with `L(a) ∩ D₂ ≠ ∅` iff
/// `L(result) ∩ S_#^↑ ≠ ∅`. It reads `a x1 x2`, then simulates the marked
/// automaton on φ-images, then reads `xbar2 xbar1 abar`. Every state carries
/// a `#` self-loop.
pub fn reduce_d2_to_ssharpup(a: &Nfa) -> Result<Nfa> {
    let marked = mark_automaton(a)?.nfa;
    let alphabet = filters::s_sharp_up_alphabet();
    let sym = |s: &str| alphabet.iter().position(|t| t == s).expect("fixed alphabet");
    let (open, close, sharp) = (sym(OPEN), sym(CLOSE), sym(SHARP));
    let x = [sym("x1"), sym("x2")];
    let xbar = [sym("xbar1"), sym("xbar2")];

    let mut b = NfaBuilder::new(&alphabet);
    let start = b.state("start");
    let s1 = b.state("start.a");
    let s2 = b.state("start.x1");
    b.initial(start);
    b.transition(start, Some(open), s1);
    b.transition(s1, Some(x[0]), s2);
    // marked states keep their names, so ids are offset by three
    let base = b.num_states();
    for q in marked.states() {
        b.state(q.clone());
    }
    let inner = |q: usize| base + q;
    b.transition(s2, Some(x[1]), inner(marked.initial()));
    let mut opened: Vec<Option<usize>> = vec![None; marked.num_states()];
    let mut closed: Vec<[Option<usize>; 2]> = vec![[None; 2]; marked.num_states()];
    for t in marked.transitions() {
        let from = inner(t.from);
        let to = inner(t.to);
        match t.label {
            None => {
                b.transition(from, None, to);
            }
            Some(l) => {
                let k = l / 2;
                if l % 2 == 0 {
                    let mid = *opened[t.from].get_or_insert_with(|| {
                        b.state(format!("{}.open", marked.state_name(t.from)))
                    });
                    b.transition(from, Some(open), mid);
                    b.transition(mid, Some(x[k]), to);
                } else {
                    let mid = *closed[t.from][k].get_or_insert_with(|| {
                        b.state(format!("{}.close{}", marked.state_name(t.from), k + 1))
                    });
                    b.transition(from, Some(xbar[k]), mid);
                    b.transition(mid, Some(close), to);
                }
            }
        }
    }
    let e1 = b.state("end.xbar2");
    let e2 = b.state("end.xbar1");
    let fin = b.state("end");
    for &f in marked.accepting() {
        b.transition(inner(f), Some(xbar[1]), e1);
    }
    b.transition(e1, Some(xbar[0]), e2);
    b.transition(e2, Some(close), fin);
    b.accept(fin);
    for q in 0..b.num_states() {
        b.transition(q, Some(sharp), q);
    }
    Ok(b.build())
}

/// Symbols of `a` that are not part of `alphabet`.
pub fn foreign_symbols(a: &Nfa, alphabet: &[String]) -> BTreeSet<String> {
    a.alphabet()
        .iter()
        .filter(|s| !alphabet.contains(s))
        .cloned()
        .collect()
}
