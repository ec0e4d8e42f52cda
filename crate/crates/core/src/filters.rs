//! Built-in filter languages and their membership oracles.
//!
//! Symbol spelling is ASCII: `a1`/`abar1` for Dyck brackets, `x1`/`xbar1`
//! for the symmetric language, and `a`, `abar`, `#` for the bracket pair
//! and marker used by `S_#^↑`.

use std::collections::HashMap;
use std::fmt;

use crate::counter::CounterAutomaton;
use crate::error::{Error, Result};
use crate::grammar::Cfg;
use crate::transducer::{Transducer, TransducerBuilder};

pub const OPEN: &str = "a";
pub const CLOSE: &str = "abar";
pub const SHARP: &str = "#";

pub fn dyck_open(k: usize) -> String {
    format!("a{k}")
}

pub fn dyck_close(k: usize) -> String {
    format!("abar{k}")
}

/// `a1, abar1, a2, abar2, …`
pub fn dyck_alphabet(n: usize) -> Vec<String> {
    (1..=n).flat_map(|k| [dyck_open(k), dyck_close(k)]).collect()
}

/// `x1, xbar1, x2, xbar2`
pub fn symmetric_alphabet() -> Vec<String> {
    ["x1", "xbar1", "x2", "xbar2"].map(String::from).to_vec()
}

pub fn symmetric_sharp_alphabet() -> Vec<String> {
    let mut v = symmetric_alphabet();
    v.push(SHARP.into());
    v
}

/// `a, abar, x1, xbar1, x2, xbar2, #`
pub fn s_sharp_up_alphabet() -> Vec<String> {
    let mut v = vec![OPEN.to_string(), CLOSE.to_string()];
    v.extend(symmetric_sharp_alphabet());
    v
}

/// `S -> S S |  | a1 S abar1 | …`
pub fn dyck_grammar(n: usize) -> Cfg {
    let mut text = String::from("S -> S S | ");
    for k in 1..=n {
        text.push_str(&format!(" | {} S {}", dyck_open(k), dyck_close(k)));
    }
    Cfg::parse(&text).expect("Dyck grammar text is well formed")
}

pub fn symmetric_grammar() -> Cfg {
    Cfg::parse("S -> x1 S xbar1 | x2 S xbar2 |").expect("symmetric grammar text is well formed")
}

/// Grammar of `S_#`: blocks of `#` before every letter of a word of `S`.
pub fn symmetric_sharp_grammar() -> Cfg {
    Cfg::parse(
        "S -> N |\n\
         N -> H x1 N H xbar1 | H x1 H xbar1 | H x2 N H xbar2 | H x2 H xbar2\n\
         H -> # H |\n",
    )
    .expect("S_# grammar text is well formed")
}

fn check_alphabet<S: AsRef<str>>(w: &[S], alphabet: &[&str]) -> Result<()> {
    for s in w {
        if !alphabet.contains(&s.as_ref()) {
            return Err(Error::UnknownSymbol(s.as_ref().to_string()));
        }
    }
    Ok(())
}

/// Bracket type of a Dyck symbol: `(k, is_open)`.
fn dyck_symbol(n: usize, s: &str) -> Option<(usize, bool)> {
    let (rest, open) = match s.strip_prefix("abar") {
        Some(r) => (r, false),
        None => (s.strip_prefix('a')?, true),
    };
    let k: usize = rest.parse().ok()?;
    (rest == k.to_string() && (1..=n).contains(&k)).then_some((k, open))
}

pub fn dyck_member<S: AsRef<str>>(n: usize, w: &[S]) -> Result<bool> {
    let mut stack = Vec::new();
    let mut ok = true;
    for s in w {
        let (k, open) =
            dyck_symbol(n, s.as_ref()).ok_or_else(|| Error::UnknownSymbol(s.as_ref().to_string()))?;
        if open {
            stack.push(k);
        } else if ok && stack.pop() != Some(k) {
            ok = false;
        }
    }
    Ok(ok && stack.is_empty())
}

fn x_letter(s: &str) -> Option<(u8, bool)> {
    match s {
        "x1" => Some((1, true)),
        "x2" => Some((2, true)),
        "xbar1" => Some((1, false)),
        "xbar2" => Some((2, false)),
        _ => None,
    }
}

fn sym_ok(w: &[&str]) -> bool {
    if !w.len().is_multiple_of(2) {
        return false;
    }
    let half = w.len() / 2;
    (0..half).all(|i| {
        matches!(
            (x_letter(w[i]), x_letter(w[w.len() - 1 - i])),
            (Some((k, true)), Some((j, false))) if k == j
        )
    })
}

/// Membership in `S`: `u · mirror(ū)` for `u` over `{x1, x2}`.
pub fn sym_member<S: AsRef<str>>(w: &[S]) -> Result<bool> {
    let w: Vec<&str> = w.iter().map(|s| s.as_ref()).collect();
    check_alphabet(&w, &["x1", "xbar1", "x2", "xbar2"])?;
    Ok(sym_ok(&w))
}

fn s_sharp_ok(w: &[&str]) -> bool {
    if w.is_empty() {
        return true;
    }
    if w.last() == Some(&SHARP) {
        return false;
    }
    let letters: Vec<&str> = w.iter().copied().filter(|&s| s != SHARP).collect();
    sym_ok(&letters)
}

/// Membership in `S_# = S ↑ #*`: `#`-blocks may precede each letter of a
/// word of `S`; trailing `#` and nonempty pure-`#` words are rejected.
pub fn s_sharp_member<S: AsRef<str>>(w: &[S]) -> Result<bool> {
    let w: Vec<&str> = w.iter().map(|s| s.as_ref()).collect();
    check_alphabet(&w, &["x1", "xbar1", "x2", "xbar2", SHARP])?;
    Ok(s_sharp_ok(&w))
}

const UP_ALPHABET: [&str; 7] = [OPEN, CLOSE, "x1", "xbar1", "x2", "xbar2", SHARP];

/// `M = a S_# ā ∪ {ε}`
fn in_m(w: &[&str]) -> bool {
    w.is_empty()
        || (w.len() >= 2
            && w[0] == OPEN
            && w[w.len() - 1] == CLOSE
            && s_sharp_ok(&w[1..w.len() - 1]))
}

struct MInf<'a> {
    w: &'a [&'a str],
    memo: HashMap<(usize, usize), bool>,
}

impl MInf<'_> {
    fn check(&mut self, start: usize, end: usize) -> bool {
        if let Some(&r) = self.memo.get(&(start, end)) {
            return r;
        }
        let r = self.compute(start, end);
        self.memo.insert((start, end), r);
        r
    }

    fn compute(&mut self, start: usize, end: usize) -> bool {
        let seg = &self.w[start..end];
        if in_m(seg) {
            return true;
        }
        if seg.len() < 2 || seg[0] != OPEN || seg[seg.len() - 1] != CLOSE {
            return false;
        }
        // Split the interior into y-blocks over X ∪ {#} and top-level
        // bracketed z-blocks. Since every z-block must itself be balanced,
        // the top-level bracket pairs are forced.
        let (lo, hi) = (start + 1, end - 1);
        let mut ys: Vec<(usize, usize)> = Vec::new();
        let mut zs: Vec<(usize, usize)> = Vec::new();
        let mut depth = 0usize;
        let mut y_start = lo;
        let mut z_start = lo;
        for i in lo..hi {
            match self.w[i] {
                OPEN => {
                    if depth == 0 {
                        ys.push((y_start, i));
                        z_start = i;
                    }
                    depth += 1;
                }
                CLOSE => {
                    if depth == 0 {
                        return false;
                    }
                    depth -= 1;
                    if depth == 0 {
                        zs.push((z_start, i + 1));
                        y_start = i + 1;
                    }
                }
                _ => {}
            }
        }
        if depth != 0 || zs.is_empty() {
            return false;
        }
        ys.push((y_start, hi));
        // interior y-blocks must be nonempty
        if ys[1..ys.len() - 1].iter().any(|&(a, b)| a == b) {
            return false;
        }
        let mut outer: Vec<&str> = vec![OPEN];
        for &(a, b) in &ys {
            outer.extend_from_slice(&self.w[a..b]);
        }
        outer.push(CLOSE);
        if !in_m(&outer) {
            return false;
        }
        zs.into_iter().all(|(a, b)| self.check(a, b))
    }
}

/// Membership in `M^(∞)`.
pub fn m_inf_member<S: AsRef<str>>(w: &[S]) -> Result<bool> {
    let w: Vec<&str> = w.iter().map(|s| s.as_ref()).collect();
    check_alphabet(&w, &UP_ALPHABET)?;
    let mut m = MInf {
        w: &w,
        memo: HashMap::new(),
    };
    Ok(m.check(0, w.len()))
}

/// Membership in `M^(+)`: the bracket projection (erasing `X` and `#`) is
/// not a Dyck word.
pub fn m_plus_member<S: AsRef<str>>(w: &[S]) -> Result<bool> {
    let w: Vec<&str> = w.iter().map(|s| s.as_ref()).collect();
    check_alphabet(&w, &UP_ALPHABET)?;
    let mut height: i64 = 0;
    let mut balanced = true;
    for s in &w {
        match *s {
            OPEN => height += 1,
            CLOSE => {
                height -= 1;
                if height < 0 {
                    balanced = false;
                }
            }
            _ => {}
        }
    }
    Ok(!(balanced && height == 0))
}

pub fn s_sharp_up_member<S: AsRef<str>>(w: &[S]) -> Result<bool> {
    Ok(m_inf_member(w)? || m_plus_member(w)?)
}

/// Transducer of the morphism `a_k ↦ a1 a2^k`, `ā_k ↦ ā2^k ā1` from the
/// `n`-pair Dyck alphabet into the two-pair one.
pub fn dyck_encoder(n: usize) -> Transducer {
    assert!(n >= 1, "Dyck alphabet needs at least one pair");
    let input = dyck_alphabet(n);
    let output = dyck_alphabet(2);
    let mut b = TransducerBuilder::new(&input, &output);
    let q = b.state("enc");
    b.initial(q).accept(q);
    let (a1, abar1, a2, abar2) = (0, 1, 2, 3);
    for k in 1..=n {
        let open: Vec<usize> = std::iter::once(a1).chain(std::iter::repeat_n(a2, k)).collect();
        let close: Vec<usize> = std::iter::repeat_n(abar2, k).chain(std::iter::once(abar1)).collect();
        b.add_path(q, Some(2 * (k - 1)), &open, q, &format!("enc[{}]", dyck_open(k)));
        b.add_path(q, Some(2 * (k - 1) + 1), &close, q, &format!("enc[{}]", dyck_close(k)));
    }
    b.build()
}

/// A fixed filter language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterSpec {
    Dyck(usize),
    Symmetric,
    SymmetricSharp,
    SSharpUp,
    UserGrammar(Cfg),
    Counter(CounterAutomaton),
}

impl FilterSpec {
    /// Parse a built-in filter name: `dyck1`, `dyck2`, `dyckN:k`, `sym`,
    /// `symsharp`, `ssharpup`.
    pub fn builtin(name: &str) -> Result<FilterSpec> {
        match name {
            "dyck1" => Ok(FilterSpec::Dyck(1)),
            "dyck2" => Ok(FilterSpec::Dyck(2)),
            "sym" => Ok(FilterSpec::Symmetric),
            "symsharp" => Ok(FilterSpec::SymmetricSharp),
            "ssharpup" => Ok(FilterSpec::SSharpUp),
            _ => match name.strip_prefix("dyckN:").map(str::parse::<usize>) {
                Some(Ok(k)) if k >= 1 => Ok(FilterSpec::Dyck(k)),
                _ => Err(Error::UnsupportedFilter(name.to_string())),
            },
        }
    }

    pub fn name(&self) -> String {
        match self {
            FilterSpec::Dyck(n) => format!("dyck{n}"),
            FilterSpec::Symmetric => "sym".into(),
            FilterSpec::SymmetricSharp => "symsharp".into(),
            FilterSpec::SSharpUp => "ssharpup".into(),
            FilterSpec::UserGrammar(_) => "grammar".into(),
            FilterSpec::Counter(_) => "counter".into(),
        }
    }

    pub fn alphabet(&self) -> Vec<String> {
        match self {
            FilterSpec::Dyck(n) => dyck_alphabet(*n),
            FilterSpec::Symmetric => symmetric_alphabet(),
            FilterSpec::SymmetricSharp => symmetric_sharp_alphabet(),
            FilterSpec::SSharpUp => s_sharp_up_alphabet(),
            FilterSpec::UserGrammar(g) => g.terminals().to_vec(),
            FilterSpec::Counter(m) => m.alphabet().to_vec(),
        }
    }

    /// A grammar for the filter, when one is available.
    pub fn grammar(&self) -> Option<Cfg> {
        match self {
            FilterSpec::Dyck(n) => Some(dyck_grammar(*n)),
            FilterSpec::Symmetric => Some(symmetric_grammar()),
            FilterSpec::SymmetricSharp => Some(symmetric_sharp_grammar()),
            FilterSpec::UserGrammar(g) => Some(g.clone()),
            FilterSpec::SSharpUp | FilterSpec::Counter(_) => None,
        }
    }

    pub fn member<S: AsRef<str>>(&self, w: &[S]) -> Result<bool> {
        match self {
            FilterSpec::Dyck(n) => dyck_member(*n, w),
            FilterSpec::Symmetric => sym_member(w),
            FilterSpec::SymmetricSharp => s_sharp_member(w),
            FilterSpec::SSharpUp => s_sharp_up_member(w),
            FilterSpec::UserGrammar(g) => g.to_cnf().cyk(w),
            FilterSpec::Counter(m) => m.accepts(w),
        }
    }
}

impl fmt::Display for FilterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}
