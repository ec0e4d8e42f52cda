//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line. Pass criterion numbers as arguments to
//! run a subset: `cargo test --test acceptance -- 3 8`.
//!
//! Set `RR_BLESS=1` to rewrite the CLI golden files instead of comparing.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::Rng;

use rr_core::counter::{AcceptMode, CounterAutomaton, CounterMove, Guard};
use rr_core::engine::{self, IndexMode, MethodChoice};
use rr_core::filters::{self, FilterSpec};
use rr_core::gen::{random_cnf, random_nfa, rng};
use rr_core::oracle::{grammar_words, nfa_words_each};
use rr_core::reductions::{self, CsTransducer};
use rr_core::{Cfg, Nfa};

type Check = fn() -> Result<String, String>;

const CRITERIA: [(&str, Check); 10] = [
    ("bar-hillel exactness", bar_hillel_exactness),
    ("triple count", triple_count),
    ("cs dual inclusion", cs_dual_inclusion),
    ("marking", marking),
    ("phi reduction", phi_reduction),
    ("counter bounds", counter_bounds),
    ("log2 checker", log2_checker),
    ("rational index goldens", rational_index_goldens),
    ("substitution", substitution),
    ("cli golden corpus", cli_golden),
];

fn main() -> ExitCode {
    let selected: BTreeSet<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in CRITERIA.iter().enumerate() {
        let id = i + 1;
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {id:>2} {name:<24} {secs:>7.1}s  {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id:>2} {name:<24} {secs:>7.1}s  {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let t = start.elapsed();
    if t > limit {
        return Err(format!("{what} took {:.1}s, limit {}s", t.as_secs_f64(), limit.as_secs()));
    }
    Ok(())
}

fn ab() -> Vec<String> {
    vec!["a".into(), "b".into()]
}

/// One seeded grammar/automaton pair over `{a, b}`.
fn gn_instance(seed: u64, max_states: usize, epsilon: bool) -> (Cfg, Nfa) {
    let mut r = rng(seed);
    let g = random_cnf(&mut r, 4, &ab());
    let n = r.gen_range(1..=max_states);
    let a = random_nfa(&mut r, n, &ab(), 0.3, epsilon);
    (g, a)
}

fn bar_hillel_exactness() -> Result<String, String> {
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut nonempty = 0;
    for i in 0..50u64 {
        let (g, a) = gn_instance(1000 + i, 4, i % 2 == 0);
        let out = reductions::bar_hillel(&g, &a);
        let got = grammar_words(&out, 8);
        let want: BTreeSet<_> = grammar_words(&g, 8)
            .into_iter()
            .filter(|w| a.accepts(w).unwrap())
            .collect();
        if !want.is_empty() {
            nonempty += 1;
        }
        if got != want {
            bad.push(i);
        }
    }
    within(start, Duration::from_secs(60), "50 instances")?;
    if !bad.is_empty() {
        return Err(format!("discrepancies on instances {bad:?}"));
    }
    Ok(format!("50 instances, {nonempty} with nonempty bounded intersection, 0 discrepancies"))
}

fn triple_count() -> Result<String, String> {
    let mut checked = 0;
    let mut check = |g: &Cfg, a: &Nfa| -> Result<(), String> {
        let q = a.num_states();
        let want = g.num_nonterminals() * q * q + 1;
        let got = reductions::bar_hillel(g, a).num_nonterminals();
        checked += 1;
        if got != want {
            return Err(format!("|N|={} |Q|={q}: {got} nonterminals, expected {want}", g.num_nonterminals()));
        }
        Ok(())
    };
    for i in (1..50u64).step_by(2) {
        let (g, a) = gn_instance(1000 + i, 4, false);
        check(&g, &a)?;
    }
    for i in 0..100u64 {
        let (g, a) = gn_instance(2000 + i, 6, false);
        check(&g, &a)?;
    }
    for i in 0..100u64 {
        let (g, a) = gn_instance(7000 + i, 5, false);
        check(&g, &a)?;
    }
    Ok(format!("{checked} ε-free instances, count exact on all"))
}

/// All words of `D_k` up to length `max_len`.
fn dyck_words(k: usize, max_len: usize) -> Vec<Vec<String>> {
    fn go(
        len: usize,
        out: &mut Vec<Vec<String>>,
        cur: &mut Vec<String>,
        stack: &mut Vec<usize>,
        k: usize,
        max_len: usize,
    ) {
        if stack.is_empty() {
            out.push(cur.clone());
        }
        if len + stack.len() < max_len {
            for j in 1..=k {
                cur.push(filters::dyck_open(j));
                stack.push(j);
                go(len + 1, out, cur, stack, k, max_len);
                stack.pop();
                cur.pop();
            }
        }
        if let Some(&j) = stack.last() {
            cur.push(filters::dyck_close(j));
            stack.pop();
            go(len + 1, out, cur, stack, k, max_len);
            stack.push(j);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, &mut out, &mut Vec::new(), &mut Vec::new(), k, max_len);
    out
}

fn cs_dual_inclusion() -> Result<String, String> {
    let start = Instant::now();
    let grammars = vec![
        ("D1", filters::dyck_grammar(1)),
        ("S", filters::symmetric_grammar()),
        ("anbn", Cfg::parse("S -> a S b | a b").unwrap()),
        ("palindromes", Cfg::parse("S -> a S a | b S b | a | b |").unwrap()),
        ("ab-blocks", Cfg::parse("S -> A B\nA -> a A | a\nB -> b B | c").unwrap()),
    ];
    let dyck = dyck_words(2, 12);
    let mut images = 0usize;
    let mut bracket_images = 0usize;
    let mut preimages = 0usize;
    for (name, g) in &grammars {
        let cs = CsTransducer::new(g);
        let direct = grammar_words(g, 12);
        for d in &dyck {
            for w in cs.full.transduce_bounded(d, 12).map_err(|e| e.to_string())? {
                images += 1;
                if !cs.cnf.cyk(&w).map_err(|e| e.to_string())? || !direct.contains(&w) {
                    return Err(format!("{name}: image {w:?} of {d:?} not in L(G)"));
                }
            }
        }
        // Same inclusion one level down, before the two-pair encoding.
        for d in dyck_words(cs.brackets.len(), 10) {
            for w in cs.inner.transduce_bounded(&d, 10).map_err(|e| e.to_string())? {
                bracket_images += 1;
                if !cs.cnf.cyk(&w).map_err(|e| e.to_string())? || !direct.contains(&w) {
                    return Err(format!("{name}: image {w:?} of bracket word {d:?} not in L(G)"));
                }
            }
        }
        for w in grammar_words(g, 5) {
            let d = cs
                .preimage(&w)
                .map_err(|e| e.to_string())?
                .ok_or_else(|| format!("{name}: no preimage for {w:?}"))?;
            if !filters::dyck_member(2, &d).unwrap() {
                return Err(format!("{name}: preimage {d:?} of {w:?} is not a Dyck word"));
            }
            if !cs.full.transduce_bounded(&d, w.len()).unwrap().contains(&w) {
                return Err(format!("{name}: preimage {d:?} does not map to {w:?}"));
            }
            preimages += 1;
        }
    }
    within(start, Duration::from_secs(180), "5 grammars")?;
    Ok(format!(
        "{} D2 words with {images} images and {bracket_images} bracket-level images CYK-checked, {preimages} preimages found",
        dyck.len()
    ))
}

fn d2_instance(seed: u64, density: f64, epsilon: bool) -> Nfa {
    let mut r = rng(seed);
    let n = r.gen_range(1..=3);
    random_nfa(&mut r, n, &filters::dyck_alphabet(2), density, epsilon)
}

fn marking() -> Result<String, String> {
    let d2 = FilterSpec::Dyck(2);
    let mut nonempty = 0;
    let mut swept = 0usize;
    for i in 0..100u64 {
        let a = d2_instance(4000 + i, 0.25, i % 3 == 0);
        let before = engine::nrr_decide(&a, &d2).map_err(|e| e.to_string())?.nonempty;
        let m = reductions::mark_automaton(&a).map_err(|e| e.to_string())?;
        let after = engine::nrr_decide(&m.nfa, &d2).map_err(|e| e.to_string())?.nonempty;
        if before != after {
            return Err(format!("instance {i}: emptiness {before} before, {after} after"));
        }
        nonempty += usize::from(before);
        let sign: Vec<i64> = m
            .nfa
            .alphabet()
            .iter()
            .map(|s| if s.starts_with("abar") { -1 } else { 1 })
            .collect();
        let mut violation = None;
        nfa_words_each(&m.nfa, 8, |w| {
            swept += 1;
            let mut h = 0i64;
            for &x in w {
                h += sign[x];
                if h < 0 {
                    break;
                }
            }
            if h != 0 && violation.is_none() {
                violation = Some(m.nfa.decode(w));
            }
        });
        if let Some(w) = violation {
            return Err(format!("instance {i}: marked automaton accepts {w:?}"));
        }
    }
    Ok(format!(
        "100 instances ({nonempty} nonempty), emptiness preserved, {swept} accepted words height-checked"
    ))
}

const PHI_SWEEP_LEN: usize = 20;

fn phi_reduction() -> Result<String, String> {
    let d2 = FilterSpec::Dyck(2);
    let mut nonempty = 0;
    let mut swept = 0usize;
    for i in 0..30u64 {
        let a = d2_instance(5000 + i, 0.3, i % 3 == 0);
        let b = reductions::reduce_d2_to_ssharpup(&a).map_err(|e| e.to_string())?;
        let report = engine::nrr_decide(&a, &d2).map_err(|e| e.to_string())?;
        if report.nonempty {
            nonempty += 1;
            let u = report.witness.expect("Dyck decisions carry witnesses");
            let w = reductions::phi_witness(&u).map_err(|e| e.to_string())?;
            if !filters::m_inf_member(&w).unwrap() {
                return Err(format!("instance {i}: witness {w:?} fails m_inf_member"));
            }
            if !b.accepts(&w).unwrap() {
                return Err(format!("instance {i}: witness {w:?} not accepted by the reduction"));
            }
        } else {
            let mut hit = None;
            nfa_words_each(&b, PHI_SWEEP_LEN, |w| {
                swept += 1;
                if hit.is_none() {
                    let w = b.decode(w);
                    if filters::s_sharp_up_member(&w).unwrap() {
                        hit = Some(w);
                    }
                }
            });
            if let Some(w) = hit {
                return Err(format!("instance {i}: empty input but {w:?} is accepted"));
            }
        }
    }
    Ok(format!(
        "30 instances: {nonempty} nonempty witnesses pass, {} empty with {swept} words swept to length {PHI_SWEEP_LEN}",
        30 - nonempty
    ))
}

/// Every ε-free final-state counter automaton over `{a, b}` with `n` states
/// and at most one move per (state, letter), initial state 0.
fn all_counters(n: usize) -> Vec<CounterAutomaton> {
    let mut options: Vec<Option<(Guard, i8, usize)>> = vec![None];
    for guard in [Guard::Any, Guard::Zero, Guard::Positive] {
        for delta in -1..=1 {
            for to in 0..n {
                options.push(Some((guard, delta, to)));
            }
        }
    }
    let slots = 2 * n;
    let mut out = Vec::new();
    let mut choice = vec![0usize; slots];
    loop {
        let moves: Vec<CounterMove> = choice
            .iter()
            .enumerate()
            .filter_map(|(s, &c)| {
                options[c].map(|(guard, delta, to)| CounterMove {
                    from: s / 2,
                    read: Some(s % 2),
                    guard,
                    delta,
                    to,
                })
            })
            .collect();
        for acc in 1..(1u32 << n) {
            out.push(CounterAutomaton::new(
                (0..n).map(|q| q.to_string()).collect(),
                ab(),
                0,
                (0..n).filter(|q| acc >> q & 1 == 1).collect(),
                moves.clone(),
                AcceptMode::FinalState,
            ));
        }
        let mut s = 0;
        while s < slots && choice[s] + 1 == options.len() {
            choice[s] = 0;
            s += 1;
        }
        if s == slots {
            return out;
        }
        choice[s] += 1;
    }
}

const COUNTER_TRUTH_CAP: usize = 64;

fn counter_bounds() -> Result<String, String> {
    let mut machines = 0usize;
    let mut nonempty = 0usize;
    for n in 1..=2 {
        for m in all_counters(n) {
            machines += 1;
            let truth = m.shortest_accepted_ids(COUNTER_TRUTH_CAP);
            let expanded = m.to_nfa(m.default_cap());
            let via_nfa = expanded.shortest_witness_ids();
            if truth.is_some() != via_nfa.is_some() {
                return Err(format!("{}: expansion changes emptiness", m.to_json()));
            }
            if let Some(w) = via_nfa {
                if !m.accepts_ids(&w) {
                    return Err(format!("{}: expansion accepts a rejected word {w:?}", m.to_json()));
                }
            }
            let Some(_) = truth else { continue };
            nonempty += 1;
            let bounded = m
                .shortest_accepted_ids(n * n)
                .ok_or_else(|| format!("{}: no run with counter ≤ {}", m.to_json(), n * n))?;
            if bounded.len() > n * n * n {
                return Err(format!(
                    "{}: shortest counter-bounded witness has length {}",
                    m.to_json(),
                    bounded.len()
                ));
            }
        }
    }
    Ok(format!(
        "{machines} machines, {nonempty} nonempty, all within length n³ and counter n², expansion exact"
    ))
}

/// Smallest `k` with `1.5^k ≥ l`.
fn log_three_halves_ceil(l: usize) -> usize {
    let mut k = 0;
    let mut p = 1.0f64;
    while p < l as f64 {
        p *= 1.5;
        k += 1;
    }
    k
}

fn log2_checker() -> Result<String, String> {
    let mut nonempty = 0;
    let mut worst = 0usize;
    let mut deepest_empty = 0usize;
    let mut longest = 0usize;
    for i in 0..100u64 {
        let (g, a) = gn_instance(7000 + i, 5, false);
        let f = FilterSpec::UserGrammar(g.clone());
        let report = engine::nrr_decide_with(&a, &f, MethodChoice::BarHillel).map_err(|e| e.to_string())?;
        let stats = engine::log2_check(&g, &a).map_err(|e| e.to_string())?;
        if stats.result != report.nonempty {
            return Err(format!("instance {i}: checker says {}, pipeline {}", stats.result, report.nonempty));
        }
        match &report.witness {
            Some(w) => {
                nonempty += 1;
                let bound = log_three_halves_ceil(w.len().max(1)) + 2;
                if stats.max_recursion_depth > bound {
                    return Err(format!(
                        "instance {i}: depth {} exceeds {bound} for witness length {}",
                        stats.max_recursion_depth,
                        w.len()
                    ));
                }
                worst = worst.max(stats.max_recursion_depth);
                longest = longest.max(w.len());
            }
            None if report.nonempty => return Err(format!("instance {i}: no witness")),
            None => deepest_empty = deepest_empty.max(stats.max_recursion_depth),
        }
    }
    // Long witnesses: a^n b^n against a^k b*, shortest word of length 2k.
    let g = Cfg::parse("S -> a S b | a b").unwrap().to_cnf();
    for k in 1..=24usize {
        let mut b = rr_core::NfaBuilder::new(&ab());
        for q in 0..=k {
            b.state(q.to_string());
        }
        b.initial(0);
        b.accept(k);
        for q in 0..k {
            b.transition(q, Some(0), q + 1);
        }
        b.transition(k, Some(1), k);
        let a = b.build();
        let stats = engine::log2_check(&g, &a).map_err(|e| e.to_string())?;
        let bound = log_three_halves_ceil(2 * k) + 2;
        if stats.witness_length != Some(2 * k) || stats.max_recursion_depth > bound {
            return Err(format!("a^{k} b*: {stats:?}, depth bound {bound}"));
        }
        worst = worst.max(stats.max_recursion_depth);
        longest = longest.max(2 * k);
    }
    // Bushy derivations: S -> S S | a against exactly a^k.
    let g = Cfg::parse("S -> S S | a").unwrap().to_cnf();
    for k in 1..=24usize {
        let mut b = rr_core::NfaBuilder::new(&ab());
        for q in 0..=k {
            b.state(q.to_string());
        }
        b.initial(0);
        b.accept(k);
        for q in 0..k {
            b.transition(q, Some(0), q + 1);
        }
        let a = b.build();
        let stats = engine::log2_check(&g, &a).map_err(|e| e.to_string())?;
        let bound = log_three_halves_ceil(k) + 2;
        if stats.witness_length != Some(k) || stats.max_recursion_depth > bound {
            return Err(format!("a^{k}: {stats:?}, depth bound {bound}"));
        }
        worst = worst.max(stats.max_recursion_depth);
    }
    Ok(format!(
        "100 seeded instances agree ({nonempty} nonempty) plus 48 long-witness instances; max depth {worst} at lengths up to {longest} (empty cases: {deepest_empty})"
    ))
}

/// Values produced by `oracle::rational_index_brute` for n = 1, 2, 3.
const ALL_WORDS_INDEX: [usize; 3] = [0, 1, 2];
const D1_INDEX: [usize; 3] = [0, 4, 8];

fn rational_index_goldens() -> Result<String, String> {
    let start = Instant::now();
    let all = FilterSpec::UserGrammar(Cfg::parse("S -> a S | b S |").unwrap());
    for (f, golden) in [(&all, ALL_WORDS_INDEX), (&FilterSpec::Dyck(1), D1_INDEX)] {
        for n in 1..=3 {
            let got = engine::rational_index(f, n, IndexMode::Exhaustive).map_err(|e| e.to_string())?;
            if got != golden[n - 1] {
                return Err(format!("{f} at n={n}: {got}, golden {}", golden[n - 1]));
            }
        }
    }
    within(start, Duration::from_secs(300), "index computation")?;
    Ok(format!("all-words {ALL_WORDS_INDEX:?}, D1 {D1_INDEX:?}"))
}

const SUBSTITUTION_SWEEP_LEN: usize = 10;

fn substitution() -> Result<String, String> {
    let mut inner: Vec<String> = filters::dyck_alphabet(1);
    inner.extend(filters::symmetric_alphabet());
    let mut nonempty = 0;
    for i in 0..20u64 {
        let mut r = rng(9000 + i);
        let outer = if i % 2 == 0 { FilterSpec::Symmetric } else { FilterSpec::Dyck(1) };
        let sub: BTreeMap<String, FilterSpec> = outer
            .alphabet()
            .into_iter()
            .map(|x| {
                let f = if r.gen_bool(0.5) { FilterSpec::Dyck(1) } else { FilterSpec::Symmetric };
                (x, f)
            })
            .collect();
        let n = r.gen_range(1..=3);
        let a = random_nfa(&mut r, n, &inner, 0.12, i % 4 == 0);
        let report = engine::substitution_decide(&a, &outer, &sub).map_err(|e| e.to_string())?;
        let outer_g = outer.grammar().expect("builtin filters have grammars");
        let mut found: Option<Vec<String>> = None;
        nfa_words_each(&a, SUBSTITUTION_SWEEP_LEN, |w| {
            if found.is_none() {
                let w = a.decode(w);
                if rr_core::oracle::sigma_member(&outer_g, &sub, &w).unwrap() {
                    found = Some(w);
                }
            }
        });
        if report.nonempty != found.is_some() {
            return Err(format!(
                "instance {i}: collapse says {}, enumeration to length {SUBSTITUTION_SWEEP_LEN} found {found:?} (engine witness {:?})",
                report.nonempty, report.witness
            ));
        }
        if let Some(w) = &report.witness {
            nonempty += 1;
            if !a.accepts(w).unwrap() || !rr_core::oracle::sigma_member(&outer_g, &sub, w).unwrap() {
                return Err(format!("instance {i}: invalid witness {w:?}"));
            }
        }
    }
    Ok(format!("20 instances ({nonempty} nonempty) match enumeration to length {SUBSTITUTION_SWEEP_LEN}"))
}

struct Scenario {
    name: &'static str,
    args: &'static [&'static str],
    exit: i32,
}

const SCENARIOS: [Scenario; 12] = [
    Scenario { name: "member_true", args: &["member", "--filter", "dyck2", "--word", "a1 a2 abar2 abar1"], exit: 0 },
    Scenario { name: "member_false", args: &["--json", "member", "--filter", "dyck2", "--word", "a1 a2 abar1 abar2"], exit: 1 },
    Scenario { name: "decide_empty", args: &["decide", "--filter", "dyck2", "--nfa", "empty.json"], exit: 1 },
    Scenario { name: "decide_loop", args: &["--json", "decide", "--filter", "dyck2", "--nfa", "loop.json"], exit: 0 },
    Scenario { name: "witness_nested", args: &["--json", "witness", "--filter", "dyck2", "--nfa", "nested.json"], exit: 0 },
    Scenario {
        name: "witness_counter",
        args: &["--json", "witness", "--filter", "dyck1", "--nfa", "d1_chain.json", "--method", "counter"],
        exit: 0,
    },
    Scenario {
        name: "decide_grammar",
        args: &["--json", "decide", "--filter", "grammar:anbn.txt", "--nfa", "a_plus_b_plus.json"],
        exit: 0,
    },
    Scenario { name: "index_d1", args: &["--json", "index", "--filter", "dyck1", "--states", "2"], exit: 0 },
    Scenario {
        name: "check_log2",
        args: &["--json", "check-log2", "--grammar", "anbn.txt", "--nfa", "a_plus_b_plus.json", "--stats"],
        exit: 0,
    },
    Scenario { name: "mark_stats", args: &["reduce", "mark", "--nfa", "loop.json", "--emit-stats"], exit: 0 },
    Scenario { name: "broken_nfa", args: &["decide", "--filter", "dyck2", "--nfa", "broken.json"], exit: 2 },
    Scenario {
        name: "bad_grammar",
        args: &["decide", "--filter", "grammar:bad_grammar.txt", "--nfa", "a_plus_b_plus.json"],
        exit: 2,
    },
];

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn run_rr(args: &[&str]) -> Result<(i32, String, String), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_rr"))
        .args(args)
        .current_dir(golden_dir())
        .output()
        .map_err(|e| format!("spawning rr: {e}"))?;
    Ok((
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    ))
}

fn cli_golden() -> Result<String, String> {
    let bless = std::env::var_os("RR_BLESS").is_some();
    let expected = golden_dir().join("expected");
    for s in &SCENARIOS {
        let (code, stdout, stderr) = run_rr(s.args)?;
        let again = run_rr(s.args)?;
        if again != (code, stdout.clone(), stderr.clone()) {
            return Err(format!("{}: output differs between runs", s.name));
        }
        if code != s.exit {
            return Err(format!("{}: exit {code}, expected {} (stderr: {stderr})", s.name, s.exit));
        }
        if s.args.contains(&"--json") {
            serde_json::from_str::<serde_json::Value>(&stdout)
                .map_err(|e| format!("{}: stdout is not JSON: {e}", s.name))?;
        }
        let out_path = expected.join(format!("{}.out", s.name));
        let err_path = expected.join(format!("{}.err", s.name));
        if bless {
            std::fs::write(&out_path, &stdout).map_err(|e| e.to_string())?;
            std::fs::write(&err_path, &stderr).map_err(|e| e.to_string())?;
            continue;
        }
        let want_out = std::fs::read_to_string(&out_path).map_err(|e| format!("{}: {e}", out_path.display()))?;
        let want_err = std::fs::read_to_string(&err_path).map_err(|e| format!("{}: {e}", err_path.display()))?;
        if stdout != want_out || stderr != want_err {
            return Err(format!("{}: output differs from golden files", s.name));
        }
    }
    Ok(format!("{} scenarios byte-stable with expected exit codes", SCENARIOS.len()))
}
