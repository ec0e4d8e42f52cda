//! Seeded random instances for experiments and tests.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automata::{Nfa, NfaBuilder};
use crate::counter::{AcceptMode, CounterAutomaton, CounterMove, Guard};
use crate::grammar::{Cfg, CfgBuilder, Sym};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// NFA with states `0..n`, initial `0`, each labelled transition present
/// with probability `density`. With `epsilon`, about one ε-move per state is
/// added as well.
pub fn random_nfa<R: Rng, S: AsRef<str>>(
    rng: &mut R,
    n: usize,
    alphabet: &[S],
    density: f64,
    epsilon: bool,
) -> Nfa {
    let mut b = NfaBuilder::new(alphabet);
    for q in 0..n {
        b.state(q.to_string());
    }
    b.initial(0);
    for q in 0..n {
        if rng.gen_bool(0.4) {
            b.accept(q);
        }
        for a in 0..alphabet.len() {
            for p in 0..n {
                if rng.gen_bool(density) {
                    b.transition(q, Some(a), p);
                }
            }
        }
        if epsilon && rng.gen_bool(0.7) {
            let p = rng.gen_range(0..n);
            if p != q {
                b.transition(q, None, p);
            }
        }
    }
    if rng.gen_bool(0.8) {
        let f = rng.gen_range(0..n);
        b.accept(f);
    }
    b.build()
}

/// ε-free grammar in Chomsky normal form with between one and `max_nts`
/// nonterminals named `S`, `A`, `B`, … The axiom `S` never occurs on a
/// right-hand side.
pub fn random_cnf<R: Rng, S: AsRef<str>>(rng: &mut R, max_nts: usize, terminals: &[S]) -> Cfg {
    const NAMES: [&str; 8] = ["S", "A", "B", "C", "D", "E", "F", "G"];
    let k = rng.gen_range(1..=max_nts.clamp(1, NAMES.len()));
    let mut b = CfgBuilder::new();
    for name in &NAMES[..k] {
        b.nonterminal(*name);
    }
    for t in terminals {
        b.terminal(t.as_ref());
    }
    for x in 0..k {
        let rules = rng.gen_range(1..=3);
        for _ in 0..rules {
            if k > 1 && rng.gen_bool(0.55) {
                let y = rng.gen_range(1..k);
                let z = rng.gen_range(1..k);
                b.rule(x, vec![Sym::N(y), Sym::N(z)]);
            } else {
                let t = rng.gen_range(0..terminals.len());
                b.rule(x, vec![Sym::T(t)]);
            }
        }
    }
    b.build(0)
}

/// Counter automaton with `n` states, `moves` random moves and optional
/// ε-moves.
pub fn random_counter<R: Rng, S: AsRef<str>>(
    rng: &mut R,
    n: usize,
    alphabet: &[S],
    moves: usize,
    epsilon: bool,
    mode: AcceptMode,
) -> CounterAutomaton {
    let guards = [Guard::Any, Guard::Zero, Guard::Positive];
    let mut list = Vec::new();
    for _ in 0..moves {
        let read = if epsilon && rng.gen_bool(0.2) {
            None
        } else {
            Some(rng.gen_range(0..alphabet.len()))
        };
        list.push(CounterMove {
            from: rng.gen_range(0..n),
            read,
            guard: guards[rng.gen_range(0..3)],
            delta: rng.gen_range(-1..=1),
            to: rng.gen_range(0..n),
        });
    }
    let mut accepting: BTreeSet<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
    if accepting.is_empty() {
        accepting.insert(rng.gen_range(0..n));
    }
    CounterAutomaton::new(
        (0..n).map(|q| q.to_string()).collect(),
        alphabet.iter().map(|s| s.as_ref().to_string()).collect(),
        0,
        accepting,
        list,
        mode,
    )
}
