//! Plain-text rule files.
//!
//! ```text
//! #rnca-rule v1
//! #name: beta=1
//! #states: 0 1 2 3 4
//! #quiescent: 0
//! g: 0 4 1          # g(0,4) = 1, so g(4,0) = -1
//! t: 0 1 4 -1       # T on the cyclic class of (0,1,4); the reversed class is negated
//! f: 0 4 0 0 0 1    # explicit table entry f(c,u,r,d,l), applied last
//! ```
//!
//! `g:` and `t:` lines give a flow certificate; the rule is built from it,
//! with unlisted entries zero. Without them the starting table is the
//! identity. `f:` lines then overwrite single entries, so a full table is
//! just `f:` lines and a perturbed rule is a certificate plus one of them.

use thiserror::Error;

use crate::flow::FlowSpec;
use crate::rule::{build_rule, Rule, RuleError};
use crate::state::{Neighborhood, State, StateSet};

pub const RULE_MAGIC: &str = "#rnca-rule v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleFileError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Rule(#[from] RuleError),
}

fn parse_err(line: usize, reason: impl Into<String>) -> RuleFileError {
    RuleFileError::Parse { line, reason: reason.into() }
}

fn numbers(line: usize, text: &str) -> Result<Vec<i64>, RuleFileError> {
    text.split_whitespace().map(|w| w.parse().map_err(|_| parse_err(line, format!("`{w}` is not an integer")))).collect()
}

/// Fills one antisymmetric slot and its partners, refusing contradictions.
fn fill(table: &mut [Option<i64>], slots: &[(usize, i64)], line: usize) -> Result<(), RuleFileError> {
    for &(i, v) in slots {
        match table[i] {
            Some(old) if old != v => return Err(parse_err(line, "contradicts an earlier entry")),
            _ => table[i] = Some(v),
        }
    }
    Ok(())
}

pub fn load_rule(text: &str) -> Result<Rule, RuleFileError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.split('#').next().map(str::trim).unwrap_or(""), l.trim()));
    match lines.next() {
        Some((_, _, first)) if first == RULE_MAGIC => {}
        _ => return Err(parse_err(1, format!("expected `{RULE_MAGIC}`"))),
    }
    let mut name = None;
    let mut states = None;
    let mut quiescent = None;
    let mut gs = vec![];
    let mut ts = vec![];
    let mut fs = vec![];
    for (no, body, raw) in lines {
        if let Some(header) = raw.strip_prefix('#') {
            let Some((key, value)) = header.split_once(':') else { continue };
            match key.trim() {
                "name" => name = Some(value.trim().to_string()),
                "states" => {
                    let q = numbers(no, value)?;
                    states = Some(StateSet::new(q).map_err(|e| parse_err(no, e.to_string()))?);
                }
                "quiescent" => match numbers(no, value)?[..] {
                    [q] => quiescent = Some(q),
                    _ => return Err(parse_err(no, "expected one quiescent state")),
                },
                _ => {}
            }
            continue;
        }
        if body.is_empty() {
            continue;
        }
        let (kind, rest) = body.split_once(':').ok_or_else(|| parse_err(no, "expected `g:`, `t:` or `f:`"))?;
        let v = numbers(no, rest)?;
        match (kind.trim(), v.len()) {
            ("g", 3) => gs.push((no, v)),
            ("t", 4) => ts.push((no, v)),
            ("f", 6) => fs.push((no, v)),
            ("g" | "t" | "f", n) => return Err(parse_err(no, format!("wrong number of values ({n}) for `{kind}:`"))),
            _ => return Err(parse_err(no, format!("unknown entry kind `{kind}`"))),
        }
    }
    let states = states.ok_or_else(|| parse_err(1, "missing `#states:` header"))?;
    let quiescent = quiescent.unwrap_or_else(|| states.min());
    let n = states.len();
    let idx = |no: usize, s: State| states.index_of(s).ok_or_else(|| parse_err(no, format!("state {s} is outside the alphabet")));

    let mut rule = if gs.is_empty() && ts.is_empty() {
        Rule::identity(states.clone(), quiescent)?
    } else {
        let mut direct = vec![None; n * n];
        for (no, v) in &gs {
            let (x, y) = (idx(*no, v[0])?, idx(*no, v[1])?);
            fill(&mut direct, &[(x * n + y, v[2]), (y * n + x, -v[2])], *no)?;
        }
        let mut triple = vec![None; n * n * n];
        for (no, v) in &ts {
            let (x, y, z) = (idx(*no, v[0])?, idx(*no, v[1])?, idx(*no, v[2])?);
            let at = |a: usize, b: usize, c: usize| (a * n + b) * n + c;
            let t = v[3];
            fill(
                &mut triple,
                &[(at(x, y, z), t), (at(y, z, x), t), (at(z, x, y), t), (at(z, y, x), -t), (at(y, x, z), -t), (at(x, z, y), -t)],
                *no,
            )?;
        }
        let flow = FlowSpec::from_tables(
            states.clone(),
            direct.into_iter().map(|v| v.unwrap_or(0)).collect(),
            triple.into_iter().map(|v| v.unwrap_or(0)).collect(),
        )?;
        build_rule(&flow, quiescent)?
    };
    for (no, v) in &fs {
        for &s in &v[..5] {
            idx(*no, s)?;
        }
        rule = rule.with_entry(Neighborhood::new(v[0], v[1], v[2], v[3], v[4]), v[5]).map_err(|e| parse_err(*no, e.to_string()))?;
    }
    Ok(rule.with_name(name.unwrap_or_else(|| "custom".into())))
}

fn header(name: &str, states: &StateSet, quiescent: State) -> String {
    let q: Vec<String> = states.iter().map(|s| s.to_string()).collect();
    format!("{RULE_MAGIC}\n#name: {name}\n#states: {}\n#quiescent: {quiescent}\n", q.join(" "))
}

/// The full table as `f:` lines in canonical tuple order.
pub fn save_rule_table(rule: &Rule) -> String {
    let mut out = header(rule.name(), rule.states(), rule.quiescent());
    for (t, v) in rule.entries() {
        out += &format!("f: {} {} {} {} {} {v}\n", t.c, t.u, t.r, t.d, t.l);
    }
    out
}

/// A certificate as `g:` and `t:` lines, non-zero entries in normal form.
pub fn save_certificate(name: &str, flow: &FlowSpec, quiescent: State) -> String {
    let mut out = header(name, flow.states(), quiescent);
    let g = flow.direct_entries();
    let t = flow.triple_entries();
    if g.is_empty() {
        out += "# g is zero\n";
    }
    for (x, y, v) in g {
        out += &format!("g: {x} {y} {v}\n");
    }
    if t.is_empty() {
        out += "# T is zero\n";
    }
    for (x, y, z, v) in t {
        out += &format!("t: {x} {y} {z} {v}\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule::canonical_rule;

    #[test]
    fn certificates_round_trip() {
        for beta in [-1, 0, 1] {
            let rule = canonical_rule(beta, 0).unwrap();
            let text = save_certificate("c", &FlowSpec::canonical(beta), 0);
            assert_eq!(load_rule(&text).unwrap(), rule);
        }
    }

    #[test]
    fn full_tables_round_trip() {
        let rule = canonical_rule(1, 2).unwrap();
        let back = load_rule(&save_rule_table(&rule)).unwrap();
        assert_eq!(back, rule);
        assert_eq!(back.name(), rule.name());
    }

    #[test]
    fn entry_overrides_apply_last() {
        let text = "#rnca-rule v1\n#states: 0 1 2 3 4\ng: 0 4 1\nf: 0 4 4 4 4 0\n";
        let rule = load_rule(text).unwrap();
        let base = canonical_rule(0, 0).unwrap();
        assert_eq!(rule, base.with_entry(Neighborhood::new(0, 4, 4, 4, 4), 0).unwrap());
    }

    #[test]
    fn no_certificate_means_identity() {
        let rule = load_rule("#rnca-rule v1\n#states: 0 1 2\n").unwrap();
        assert!(rule.is_trivial());
    }

    #[test]
    fn malformed_files() {
        let cases = [
            ("#rnca-pattern v1\n", 1),
            ("#rnca-rule v1\n#states: 0 1\nq: 1 2\n", 3),
            ("#rnca-rule v1\n#states: 0 1\ng: 0 1\n", 3),
            ("#rnca-rule v1\n#states: 0 1\ng: 0 7 1\n", 3),
            ("#rnca-rule v1\n#states: 0 1 2\ng: 0 1 1\ng: 1 0 1\n", 4),
            ("#rnca-rule v1\n#states: 0 1\nf: 0 0 0 0 1 x\n", 3),
        ];
        for (text, line) in cases {
            match load_rule(text) {
                Err(RuleFileError::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }
}
