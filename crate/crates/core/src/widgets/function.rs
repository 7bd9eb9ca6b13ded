//! Truth tables declared in pattern notes, one `OUT = expr` note per output.
//! Expressions use input names, `not`, `and`, `or` and parentheses; a note
//! reading `single-use` marks the widget as traversable once.

use super::{Assignment, Pattern, Widget, WidgetError};

pub const SINGLE_USE_NOTE: &str = "single-use";

#[derive(Clone, Debug, PartialEq, Eq)]
enum Expr {
    Input(String),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

impl Expr {
    fn eval(&self, a: &Assignment) -> bool {
        match self {
            Expr::Input(n) => a[n],
            Expr::Not(e) => !e.eval(a),
            Expr::And(x, y) => x.eval(a) && y.eval(a),
            Expr::Or(x, y) => x.eval(a) || y.eval(a),
        }
    }
}

struct Parser<'a> {
    tokens: Vec<&'a str>,
    at: usize,
    inputs: Vec<&'a str>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a str> {
        self.tokens.get(self.at).copied()
    }

    fn next(&mut self) -> Option<&'a str> {
        let t = self.peek();
        self.at += 1;
        t
    }

    fn or(&mut self) -> Result<Expr, String> {
        let mut e = self.and()?;
        while self.peek() == Some("or") {
            self.at += 1;
            e = Expr::Or(Box::new(e), Box::new(self.and()?));
        }
        Ok(e)
    }

    fn and(&mut self) -> Result<Expr, String> {
        let mut e = self.atom()?;
        while self.peek() == Some("and") {
            self.at += 1;
            e = Expr::And(Box::new(e), Box::new(self.atom()?));
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Expr, String> {
        match self.next() {
            Some("not") => Ok(Expr::Not(Box::new(self.atom()?))),
            Some("(") => {
                let e = self.or()?;
                match self.next() {
                    Some(")") => Ok(e),
                    _ => Err("unbalanced parenthesis".into()),
                }
            }
            Some(name) if self.inputs.contains(&name) => Ok(Expr::Input(name.to_string())),
            Some(other) => Err(format!("`{other}` is not an input")),
            None => Err("expression ends early".into()),
        }
    }
}

fn parse(text: &str, inputs: Vec<&str>) -> Result<Expr, String> {
    let spaced = text.replace('(', " ( ").replace(')', " ) ");
    let mut p = Parser { tokens: spaced.split_whitespace().collect(), at: 0, inputs };
    let e = p.or()?;
    match p.peek() {
        None => Ok(e),
        Some(t) => Err(format!("unexpected `{t}`")),
    }
}

impl Widget {
    /// A widget whose truth table comes from the pattern's notes.
    pub fn from_notes(pattern: Pattern) -> Result<Widget, WidgetError> {
        let inputs: Vec<&str> = pattern.inputs().map(|p| p.name.as_str()).collect();
        let mut exprs = vec![];
        for port in pattern.outputs() {
            let note = pattern
                .notes
                .iter()
                .find_map(|n| n.split_once('=').filter(|(lhs, _)| lhs.trim() == port.name).map(|(_, rhs)| rhs))
                .ok_or_else(|| WidgetError::UndeclaredFunction(port.name.clone()))?;
            let expr = parse(note, inputs.clone())
                .map_err(|reason| WidgetError::BadFunction { port: port.name.clone(), reason })?;
            exprs.push((port.name.clone(), expr));
        }
        let single = pattern.notes.iter().any(|n| n.trim() == SINGLE_USE_NOTE);
        let widget = Widget::from_fn(pattern, |a| exprs.iter().map(|(o, e)| (o.clone(), e.eval(a))).collect());
        Ok(if single { widget.single_use() } else { widget })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::widgets::{branch, gate_and, gate_andnot, red_wire};

    #[test]
    fn catalog_notes_declare_the_catalog_tables() {
        for w in [gate_and(), gate_andnot(), branch(), red_wire(8)] {
            let from_notes = Widget::from_notes(w.pattern.clone()).unwrap();
            assert_eq!(from_notes.truth_table, w.truth_table, "{}", w.name());
            assert_eq!(from_notes.single_use, w.single_use, "{}", w.name());
        }
    }

    #[test]
    fn precedence_and_errors() {
        let e = parse("not A or B and C", vec!["A", "B", "C"]).unwrap();
        let a: Assignment = [("A".into(), true), ("B".into(), true), ("C".into(), false)].into();
        assert!(!e.eval(&a));
        assert!(parse("A and", vec!["A"]).is_err());
        assert!(parse("(A", vec!["A"]).is_err());
        assert!(parse("A B", vec!["A", "B"]).is_err());
        assert!(parse("Z", vec!["A"]).is_err());
    }
}
