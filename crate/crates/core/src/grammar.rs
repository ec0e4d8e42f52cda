//! Context-free grammars.
//!
//! Text format: one rule per line, `LHS -> sym sym ... | alt ...`, tokens
//! separated by whitespace, an empty alternative is ε. Nonterminals are the
//! symbols appearing on some left-hand side and the first left-hand side is
//! the axiom. Lines starting with `//` are comments. Two optional directives
//! pin down sets the rules cannot express: `%nonterminals A B ...` (first one
//! is the axiom) and `%terminals a b ...`.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym {
    T(usize),
    N(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub lhs: usize,
    pub rhs: Vec<Sym>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cfg {
    nonterminals: Vec<String>,
    terminals: Vec<String>,
    rules: Vec<Rule>,
    axiom: usize,
}

/// Collects nonterminals, terminals and rules; duplicate rules are dropped.
#[derive(Debug, Clone, Default)]
pub struct CfgBuilder {
    nonterminals: Vec<String>,
    nt_index: HashMap<String, usize>,
    terminals: Vec<String>,
    t_index: HashMap<String, usize>,
    rules: Vec<Rule>,
    seen: HashSet<Rule>,
}

impl CfgBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn nonterminal(&mut self, name: impl Into<String>) -> usize {
        let name = name.into();
        if let Some(&i) = self.nt_index.get(&name) {
            return i;
        }
        let i = self.nonterminals.len();
        self.nt_index.insert(name.clone(), i);
        self.nonterminals.push(name);
        i
    }

    pub fn terminal(&mut self, name: impl Into<String>) -> usize {
        let name = name.into();
        if let Some(&i) = self.t_index.get(&name) {
            return i;
        }
        let i = self.terminals.len();
        self.t_index.insert(name.clone(), i);
        self.terminals.push(name);
        i
    }

    pub fn has_nonterminal(&self, name: &str) -> bool {
        self.nt_index.contains_key(name)
    }

    /// A name not yet used by any nonterminal or terminal.
    pub fn fresh(&self, base: &str) -> String {
        let mut name = base.to_string();
        while self.nt_index.contains_key(&name) || self.t_index.contains_key(&name) {
            name.push('\'');
        }
        name
    }

    pub fn rule(&mut self, lhs: usize, rhs: Vec<Sym>) -> &mut Self {
        let r = Rule { lhs, rhs };
        if self.seen.insert(r.clone()) {
            self.rules.push(r);
        }
        self
    }

    pub fn num_nonterminals(&self) -> usize {
        self.nonterminals.len()
    }

    pub fn build(self, axiom: usize) -> Cfg {
        Cfg::assemble(self.nonterminals, self.terminals, self.rules, axiom)
    }
}

impl Cfg {
    fn assemble(
        nonterminals: Vec<String>,
        terminals: Vec<String>,
        mut rules: Vec<Rule>,
        axiom: usize,
    ) -> Cfg {
        assert!(axiom < nonterminals.len(), "axiom out of range");
        // grouping by lhs keeps the text form order-preserving
        rules.sort_by_key(|r| r.lhs);
        Cfg {
            nonterminals,
            terminals,
            rules,
            axiom,
        }
    }

    /// Validating constructor from names. `rules` pairs a left-hand side with
    /// right-hand-side tokens; a token is a nonterminal iff it is listed in
    /// `nonterminals`.
    pub fn from_parts<S: AsRef<str>>(
        nonterminals: &[S],
        terminals: &[S],
        rules: &[(S, Vec<S>)],
        axiom: &str,
    ) -> Result<Cfg> {
        let mut b = CfgBuilder::new();
        for n in nonterminals {
            if b.has_nonterminal(n.as_ref()) {
                return Err(Error::InvalidGrammar(format!(
                    "duplicate nonterminal `{}`",
                    n.as_ref()
                )));
            }
            b.nonterminal(n.as_ref());
        }
        for t in terminals {
            if b.has_nonterminal(t.as_ref()) {
                return Err(Error::InvalidGrammar(format!(
                    "`{}` is both terminal and nonterminal",
                    t.as_ref()
                )));
            }
            b.terminal(t.as_ref());
        }
        let axiom = *b
            .nt_index
            .get(axiom)
            .ok_or_else(|| Error::InvalidGrammar(format!("axiom `{axiom}` is not a nonterminal")))?;
        for (lhs, rhs) in rules {
            let l = *b.nt_index.get(lhs.as_ref()).ok_or_else(|| {
                Error::InvalidGrammar(format!("left-hand side `{}` is not a nonterminal", lhs.as_ref()))
            })?;
            let mut syms = Vec::with_capacity(rhs.len());
            for s in rhs {
                let s = s.as_ref();
                if let Some(&n) = b.nt_index.get(s) {
                    syms.push(Sym::N(n));
                } else if let Some(&t) = b.t_index.get(s) {
                    syms.push(Sym::T(t));
                } else {
                    return Err(Error::InvalidGrammar(format!("unknown symbol `{s}`")));
                }
            }
            b.rule(l, syms);
        }
        Ok(b.build(axiom))
    }

    pub fn parse(text: &str) -> Result<Cfg> {
        let mut declared_nts: Option<Vec<String>> = None;
        let mut declared_ts: Option<Vec<String>> = None;
        let mut raw: Vec<(usize, String, Vec<Vec<String>>)> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with("//") {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix("%nonterminals") {
                declared_nts = Some(rest.split_whitespace().map(String::from).collect());
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix("%terminals") {
                declared_ts = Some(rest.split_whitespace().map(String::from).collect());
                continue;
            }
            let Some(arrow) = line.find("->") else {
                let column = line.len() - line.trim_start().len() + 1;
                return Err(Error::parse(lineno, column, "expected `LHS -> ...`"));
            };
            let lhs: Vec<&str> = line[..arrow].split_whitespace().collect();
            if lhs.len() != 1 {
                return Err(Error::parse(
                    lineno,
                    1,
                    "left-hand side must be exactly one symbol",
                ));
            }
            let alts = line[arrow + 2..]
                .split('|')
                .map(|alt| alt.split_whitespace().map(String::from).collect())
                .collect();
            raw.push((lineno, lhs[0].to_string(), alts));
        }
        let nts: Vec<String> = match declared_nts {
            Some(v) => v,
            None => {
                let mut v: Vec<String> = Vec::new();
                for (_, lhs, _) in &raw {
                    if !v.contains(lhs) {
                        v.push(lhs.clone());
                    }
                }
                v
            }
        };
        if nts.is_empty() {
            return Err(Error::parse(1, 1, "grammar has no rules"));
        }
        let nt_set: HashSet<&str> = nts.iter().map(String::as_str).collect();
        let ts: Vec<String> = match declared_ts {
            Some(v) => v,
            None => {
                let mut v: Vec<String> = Vec::new();
                for (_, _, alts) in &raw {
                    for s in alts.iter().flatten() {
                        if !nt_set.contains(s.as_str()) && !v.contains(s) {
                            v.push(s.clone());
                        }
                    }
                }
                v
            }
        };
        let mut rules = Vec::new();
        for (lineno, lhs, alts) in raw {
            if !nt_set.contains(lhs.as_str()) {
                return Err(Error::parse(
                    lineno,
                    1,
                    format!("`{lhs}` is not a declared nonterminal"),
                ));
            }
            for alt in alts {
                rules.push((lhs.clone(), alt));
            }
        }
        let axiom = nts[0].clone();
        Cfg::from_parts(&nts, &ts, &rules, &axiom)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut lhs_order: Vec<usize> = Vec::new();
        for r in &self.rules {
            if !lhs_order.contains(&r.lhs) {
                lhs_order.push(r.lhs);
            }
        }
        let implicit_nts = lhs_order.len() == self.nonterminals.len()
            && lhs_order.iter().enumerate().all(|(i, &n)| i == n)
            && self.axiom == 0;
        let mut implicit_ts: Vec<usize> = Vec::new();
        for r in &self.rules {
            for s in &r.rhs {
                if let Sym::T(t) = s {
                    if !implicit_ts.contains(t) {
                        implicit_ts.push(*t);
                    }
                }
            }
        }
        let implicit_ts = implicit_ts.len() == self.terminals.len()
            && implicit_ts.iter().enumerate().all(|(i, &t)| i == t);
        if !implicit_nts {
            let mut order = vec![self.axiom];
            order.extend((0..self.nonterminals.len()).filter(|&n| n != self.axiom));
            let names: Vec<&str> = order.iter().map(|&n| self.nonterminals[n].as_str()).collect();
            let _ = writeln!(out, "%nonterminals {}", names.join(" "));
        }
        if !implicit_ts {
            let _ = writeln!(out, "%terminals {}", self.terminals.join(" "));
        }
        for &lhs in &lhs_order {
            let alts: Vec<String> = self
                .rules
                .iter()
                .filter(|r| r.lhs == lhs)
                .map(|r| {
                    r.rhs
                        .iter()
                        .map(|s| self.symbol_name(*s))
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            let _ = writeln!(out, "{} -> {}", self.nonterminals[lhs], alts.join(" | "));
        }
        out
    }

    pub fn nonterminals(&self) -> &[String] {
        &self.nonterminals
    }

    pub fn terminals(&self) -> &[String] {
        &self.terminals
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn axiom(&self) -> usize {
        self.axiom
    }

    pub fn num_nonterminals(&self) -> usize {
        self.nonterminals.len()
    }

    pub fn nonterminal_id(&self, name: &str) -> Option<usize> {
        self.nonterminals.iter().position(|n| n == name)
    }

    pub fn terminal_id(&self, name: &str) -> Option<usize> {
        self.terminals.iter().position(|t| t == name)
    }

    pub fn symbol_name(&self, s: Sym) -> &str {
        match s {
            Sym::T(t) => &self.terminals[t],
            Sym::N(n) => &self.nonterminals[n],
        }
    }

    pub fn encode<S: AsRef<str>>(&self, w: &[S]) -> Result<Vec<usize>> {
        w.iter()
            .map(|s| {
                self.terminal_id(s.as_ref())
                    .ok_or_else(|| Error::UnknownSymbol(s.as_ref().to_string()))
            })
            .collect()
    }

    pub fn decode(&self, w: &[usize]) -> Vec<String> {
        w.iter().map(|&t| self.terminals[t].clone()).collect()
    }

    /// Chomsky normal form: every rule is `A -> B C` or `A -> σ`, `S -> ε`
    /// only for the axiom, which never occurs on a right-hand side.
    pub fn is_cnf(&self) -> bool {
        self.rules.iter().all(|r| match r.rhs.as_slice() {
            [] => r.lhs == self.axiom,
            [Sym::T(_)] => true,
            [Sym::N(b), Sym::N(c)] => *b != self.axiom && *c != self.axiom,
            _ => false,
        })
    }

    /// Nonterminals deriving some terminal word.
    pub fn productive(&self) -> Vec<bool> {
        let n = self.num_nonterminals();
        let mut productive = vec![false; n];
        let mut missing: Vec<usize> = self
            .rules
            .iter()
            .map(|r| r.rhs.iter().filter(|s| matches!(s, Sym::N(_))).count())
            .collect();
        let mut uses: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, r) in self.rules.iter().enumerate() {
            for s in &r.rhs {
                if let Sym::N(b) = s {
                    uses[*b].push(i);
                }
            }
        }
        let mut stack: Vec<usize> = Vec::new();
        for (i, r) in self.rules.iter().enumerate() {
            if missing[i] == 0 && !productive[r.lhs] {
                productive[r.lhs] = true;
                stack.push(r.lhs);
            }
        }
        while let Some(b) = stack.pop() {
            for &i in &uses[b] {
                missing[i] -= 1;
                let lhs = self.rules[i].lhs;
                if missing[i] == 0 && !productive[lhs] {
                    productive[lhs] = true;
                    stack.push(lhs);
                }
            }
        }
        productive
    }

    pub fn is_nonempty(&self) -> bool {
        self.productive()[self.axiom]
    }

    pub fn nullable(&self) -> Vec<bool> {
        let mut nullable = vec![false; self.num_nonterminals()];
        loop {
            let mut changed = false;
            for r in &self.rules {
                if !nullable[r.lhs]
                    && r.rhs
                        .iter()
                        .all(|s| matches!(s, Sym::N(b) if nullable[*b]))
                {
                    nullable[r.lhs] = true;
                    changed = true;
                }
            }
            if !changed {
                return nullable;
            }
        }
    }

    /// Drop nonterminals that are unproductive or unreachable from the axiom.
    /// The axiom itself is kept even when the language is empty. Terminals
    /// are untouched.
    pub fn reduce(&self) -> Cfg {
        let productive = self.productive();
        let live_rules: Vec<&Rule> = self
            .rules
            .iter()
            .filter(|r| {
                productive[r.lhs]
                    && r.rhs
                        .iter()
                        .all(|s| !matches!(s, Sym::N(b) if !productive[*b]))
            })
            .collect();
        let mut reachable = vec![false; self.num_nonterminals()];
        reachable[self.axiom] = true;
        let mut stack = vec![self.axiom];
        while let Some(a) = stack.pop() {
            for r in live_rules.iter().filter(|r| r.lhs == a) {
                for s in &r.rhs {
                    if let Sym::N(b) = s {
                        if !reachable[*b] {
                            reachable[*b] = true;
                            stack.push(*b);
                        }
                    }
                }
            }
        }
        let mut map = vec![usize::MAX; self.num_nonterminals()];
        let mut names = Vec::new();
        for (n, name) in self.nonterminals.iter().enumerate() {
            if reachable[n] && (productive[n] || n == self.axiom) {
                map[n] = names.len();
                names.push(name.clone());
            }
        }
        let rules = live_rules
            .into_iter()
            .filter(|r| map[r.lhs] != usize::MAX)
            .map(|r| Rule {
                lhs: map[r.lhs],
                rhs: r
                    .rhs
                    .iter()
                    .map(|s| match s {
                        Sym::N(b) => Sym::N(map[*b]),
                        t => *t,
                    })
                    .collect(),
            })
            .collect();
        Cfg::assemble(names, self.terminals.clone(), rules, map[self.axiom])
    }

    /// Convert to Chomsky normal form with the same language.
    ///
    /// Steps: fresh axiom, ε-rule removal, unit-rule removal, splitting of
    /// long right-hand sides, then terminal lifting inside binary rules.
    /// Useless nonterminals are removed between steps.
    pub fn to_cnf(&self) -> Cfg {
        // fresh axiom
        let mut b = CfgBuilder::new();
        let start_name = {
            let mut probe = CfgBuilder::new();
            for n in &self.nonterminals {
                probe.nonterminal(n.clone());
            }
            for t in &self.terminals {
                probe.terminal(t.clone());
            }
            probe.fresh(&format!("{}'", self.nonterminals[self.axiom]))
        };
        let start = b.nonterminal(start_name);
        for n in &self.nonterminals {
            b.nonterminal(n.clone());
        }
        for t in &self.terminals {
            b.terminal(t.clone());
        }
        let shift = |s: &Sym| match s {
            Sym::N(n) => Sym::N(n + 1),
            t => *t,
        };
        b.rule(start, vec![Sym::N(self.axiom + 1)]);
        for r in &self.rules {
            b.rule(r.lhs + 1, r.rhs.iter().map(shift).collect());
        }
        let g = b.build(start).reduce();

        // ε-rules
        let nullable = g.nullable();
        let mut rules: BTreeSet<Rule> = BTreeSet::new();
        for r in &g.rules {
            let positions: Vec<usize> = r
                .rhs
                .iter()
                .enumerate()
                .filter(|(_, s)| matches!(s, Sym::N(n) if nullable[*n]))
                .map(|(i, _)| i)
                .collect();
            for mask in 0u64..(1u64 << positions.len()) {
                let rhs: Vec<Sym> = r
                    .rhs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| {
                        positions
                            .iter()
                            .position(|p| p == i)
                            .is_none_or(|k| mask & (1 << k) == 0)
                    })
                    .map(|(_, s)| *s)
                    .collect();
                if !rhs.is_empty() {
                    rules.insert(Rule { lhs: r.lhs, rhs });
                }
            }
        }
        if nullable[g.axiom] {
            rules.insert(Rule {
                lhs: g.axiom,
                rhs: vec![],
            });
        }

        // unit rules
        let n = g.num_nonterminals();
        let mut unit = vec![vec![false; n]; n];
        for (a, row) in unit.iter_mut().enumerate() {
            row[a] = true;
        }
        loop {
            let mut changed = false;
            for r in &rules {
                if let [Sym::N(c)] = r.rhs.as_slice() {
                    for a in 0..n {
                        if unit[a][r.lhs] && !unit[a][*c] {
                            unit[a][*c] = true;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut b = CfgBuilder::new();
        for name in &g.nonterminals {
            b.nonterminal(name.clone());
        }
        for t in &g.terminals {
            b.terminal(t.clone());
        }
        for a in 0..n {
            for r in &rules {
                if unit[a][r.lhs] && !matches!(r.rhs.as_slice(), [Sym::N(_)]) {
                    b.rule(a, r.rhs.clone());
                }
            }
        }
        let g = b.build(g.axiom).reduce();

        // long rules, then terminals inside binary rules
        let mut b = CfgBuilder::new();
        for name in &g.nonterminals {
            b.nonterminal(name.clone());
        }
        for t in &g.terminals {
            b.terminal(t.clone());
        }
        let mut tails: HashMap<Vec<Sym>, usize> = HashMap::new();
        let mut lifted: HashMap<usize, usize> = HashMap::new();
        let mut pending: Vec<(usize, Vec<Sym>)> =
            g.rules.iter().map(|r| (r.lhs, r.rhs.clone())).collect();
        let mut binary: Vec<(usize, Vec<Sym>)> = Vec::new();
        while let Some((lhs, rhs)) = pending.pop() {
            if rhs.len() <= 2 {
                binary.push((lhs, rhs));
                continue;
            }
            let tail = rhs[1..].to_vec();
            let t = match tails.get(&tail) {
                Some(&t) => t,
                None => {
                    let name = b.fresh(&format!(
                        "<{}>",
                        tail.iter()
                            .map(|s| g.symbol_name(*s))
                            .collect::<Vec<_>>()
                            .join(".")
                    ));
                    let t = b.nonterminal(name);
                    tails.insert(tail.clone(), t);
                    pending.push((t, tail));
                    t
                }
            };
            binary.push((lhs, vec![rhs[0], Sym::N(t)]));
        }
        binary.sort();
        for (lhs, rhs) in binary {
            if rhs.len() == 2 {
                let rhs = rhs
                    .into_iter()
                    .map(|s| match s {
                        Sym::T(t) => {
                            let nt = *lifted.entry(t).or_insert_with(|| {
                                let name = b.fresh(&format!("<{}>", g.terminals[t]));
                                b.nonterminal(name)
                            });
                            Sym::N(nt)
                        }
                        n => n,
                    })
                    .collect();
                b.rule(lhs, rhs);
            } else {
                b.rule(lhs, rhs);
            }
        }
        for (&t, &nt) in &lifted {
            b.rule(nt, vec![Sym::T(t)]);
        }
        let cnf = b.build(g.axiom).reduce();
        debug_assert!(cnf.is_cnf());
        cnf
    }

    /// CYK membership; requires CNF.
    pub fn cyk_ids(&self, w: &[usize]) -> Result<bool> {
        if !self.is_cnf() {
            return Err(Error::NotCnf);
        }
        let n = w.len();
        if n == 0 {
            return Ok(self
                .rules
                .iter()
                .any(|r| r.lhs == self.axiom && r.rhs.is_empty()));
        }
        let k = self.num_nonterminals();
        // table[len-1][start] is the set of nonterminals deriving w[start..start+len]
        let mut table = vec![vec![vec![false; k]; n]; n];
        for (i, &a) in w.iter().enumerate() {
            for r in &self.rules {
                if r.rhs == [Sym::T(a)] {
                    table[0][i][r.lhs] = true;
                }
            }
        }
        let binary: Vec<(usize, usize, usize)> = self
            .rules
            .iter()
            .filter_map(|r| match r.rhs.as_slice() {
                [Sym::N(b), Sym::N(c)] => Some((r.lhs, *b, *c)),
                _ => None,
            })
            .collect();
        for len in 2..=n {
            for start in 0..=n - len {
                for split in 1..len {
                    for &(a, b, c) in &binary {
                        if !table[len - 1][start][a]
                            && table[split - 1][start][b]
                            && table[len - split - 1][start + split][c]
                        {
                            table[len - 1][start][a] = true;
                        }
                    }
                }
            }
        }
        Ok(table[n - 1][0][self.axiom])
    }

    pub fn cyk<S: AsRef<str>>(&self, w: &[S]) -> Result<bool> {
        let ids = self.encode(w)?;
        self.cyk_ids(&ids)
    }

    /// Minimum derivable word length per nonterminal (`None` if unproductive).
    pub fn min_lengths(&self) -> Vec<Option<u64>> {
        let mut len: Vec<Option<u64>> = vec![None; self.num_nonterminals()];
        loop {
            let mut changed = false;
            for r in &self.rules {
                let total = r.rhs.iter().try_fold(0u64, |acc, s| match s {
                    Sym::T(_) => Some(acc.saturating_add(1)),
                    Sym::N(b) => len[*b].map(|l| acc.saturating_add(l)),
                });
                if let Some(total) = total {
                    if len[r.lhs].is_none_or(|old| total < old) {
                        len[r.lhs] = Some(total);
                        changed = true;
                    }
                }
            }
            if !changed {
                return len;
            }
        }
    }

    /// A minimum-length word of the language, lexicographically least among
    /// those under the declared terminal order.
    pub fn shortest_word_ids(&self) -> Option<Vec<usize>> {
        let len = self.min_lengths();
        len[self.axiom]?;
        let tight: Vec<&Rule> = self
            .rules
            .iter()
            .filter(|r| {
                let total = r.rhs.iter().try_fold(0u64, |acc, s| match s {
                    Sym::T(_) => Some(acc.saturating_add(1)),
                    Sym::N(b) => len[*b].map(|l| acc.saturating_add(l)),
                });
                total.is_some() && total == len[r.lhs]
            })
            .collect();
        let mut best: Vec<Option<Vec<usize>>> = vec![None; self.num_nonterminals()];
        loop {
            let mut changed = false;
            for r in &tight {
                let mut word = Vec::new();
                let mut complete = true;
                for s in &r.rhs {
                    match s {
                        Sym::T(t) => word.push(*t),
                        Sym::N(b) => match &best[*b] {
                            Some(w) => word.extend_from_slice(w),
                            None => {
                                complete = false;
                                break;
                            }
                        },
                    }
                }
                if complete && best[r.lhs].as_ref().is_none_or(|old| word < *old) {
                    best[r.lhs] = Some(word);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        best[self.axiom].take()
    }

    pub fn shortest_word(&self) -> Option<Vec<String>> {
        self.shortest_word_ids().map(|w| self.decode(&w))
    }
}
