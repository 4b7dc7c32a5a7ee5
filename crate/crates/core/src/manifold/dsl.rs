//! Line-oriented surface description language.
//!
//! ```text
//! coords x1 x2 x3 x4
//! domain x1 -1 1          # one line per coordinate
//! g 1 1 = 1/(1+x1^2)      # omitted entries: 0 off the diagonal, 1 on it
//! J standard              # or `J i j = <expr>` entries
//! ```
//!
//! Expressions follow the grammar
//! `expr := term (('+'|'-') term)*`, `term := factor (('*'|'/') factor)*`,
//! `factor := base ('^' integer)?`,
//! `base := number | coord | func '(' expr ')' | '(' expr ')' | '-' base`.
//! Negation binds tighter than `^`, so `-x1^2` reads as `(-x1)^2`.

use crate::error::{Error, Result};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Tanh,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            Func::Log => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Tanh => v.tanh(),
        }
    }
}

/// Expression tree over the chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => x[*i],
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, n) => a.eval(x).powi(*n),
            Expr::Call(f, a) => f.apply(a.eval(x)),
        }
    }

    /// Renders with explicit parentheses using the given coordinate names.
    pub fn render(&self, names: &[String]) -> String {
        match self {
            Expr::Num(v) if *v < 0.0 => format!("(0 - {})", -v),
            Expr::Num(v) => format!("{v}"),
            Expr::Var(i) => names[*i].clone(),
            Expr::Neg(a) => format!("(0 - {})", a.render(names)),
            Expr::Add(a, b) => format!("({} + {})", a.render(names), b.render(names)),
            Expr::Sub(a, b) => format!("({} - {})", a.render(names), b.render(names)),
            Expr::Mul(a, b) => format!("({} * {})", a.render(names), b.render(names)),
            Expr::Div(a, b) => format!("({} / {})", a.render(names), b.render(names)),
            Expr::Pow(a, n) => format!("{}^{n}", a.render(names)),
            Expr::Call(f, a) => format!("{}({})", f.name(), a.render(names)),
        }
    }
}

/// Entries of the metric and complex structure, as parsed.
#[derive(Clone, Debug, PartialEq)]
pub enum ComplexStructureSpec {
    Standard,
    Entries(Vec<((usize, usize), Expr)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceSpec {
    pub coords: [String; 4],
    pub domain: [(f64, f64); 4],
    /// `(row, col)` zero-based entries given explicitly.
    pub metric: Vec<((usize, usize), Expr)>,
    pub complex_structure: ComplexStructureSpec,
}

impl SurfaceSpec {
    /// Full 4×4 metric entry table with defaults filled in.
    pub fn metric_table(&self) -> Vec<Expr> {
        let mut table: Vec<Expr> = (0..16)
            .map(|k| Expr::Num(if k / 4 == k % 4 { 1.0 } else { 0.0 }))
            .collect();
        for ((i, j), e) in &self.metric {
            table[4 * i + j] = e.clone();
        }
        table
    }

    pub fn structure_table(&self) -> Vec<Expr> {
        let mut table = vec![Expr::Num(0.0); 16];
        match &self.complex_structure {
            ComplexStructureSpec::Standard => {
                for (i, j, v) in [(1, 0, 1.0), (0, 1, -1.0), (3, 2, 1.0), (2, 3, -1.0)] {
                    table[4 * i + j] = Expr::Num(v);
                }
            }
            ComplexStructureSpec::Entries(entries) => {
                for ((i, j), e) in entries {
                    table[4 * i + j] = e.clone();
                }
            }
        }
        table
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    col: usize,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
        }
    }
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax { line, column, message: message.into() }
}

fn lex(text: &str, line: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut k = i + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    i = k;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse::<f64>().map_err(|_| syntax(line, col, format!("malformed number `{s}`")))?;
            out.push(Token { tok: Tok::Num(v), col });
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), col });
        } else if "+-*/^()=".contains(c) {
            out.push(Token { tok: Tok::Sym(c), col });
            i += 1;
        } else {
            return Err(syntax(line, col, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    end_col: usize,
    coords: &'a [String],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    fn err(&self, message: impl Into<String>) -> Error {
        syntax(self.line, self.col(), message)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        match self.peek() {
            Some(Tok::Sym(s)) if *s == c => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.err(format!("expected `{c}`, found {t}"))),
            None => Err(self.err(format!("expected `{c}`, found end of line"))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(Tok::Sym(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if c == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while let Some(Tok::Sym(c @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = if c == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if let Some(Tok::Sym('^')) = self.peek() {
            self.pos += 1;
            let negative = if let Some(Tok::Sym('-')) = self.peek() {
                self.pos += 1;
                true
            } else {
                false
            };
            let col = self.col();
            match self.next() {
                Some(Tok::Num(v)) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => {
                    let n = v as i32;
                    Ok(Expr::Pow(Box::new(base), if negative { -n } else { n }))
                }
                _ => Err(syntax(self.line, col, "exponent must be an integer")),
            }
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<Expr> {
        let col = self.col();
        match self.next() {
            Some(Tok::Num(v)) => Ok(Expr::Num(v)),
            Some(Tok::Sym('-')) => Ok(Expr::Neg(Box::new(self.base()?))),
            Some(Tok::Sym('(')) => {
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                if let Some(i) = self.coords.iter().position(|c| *c == name) {
                    Ok(Expr::Var(i))
                } else if let Some(f) = Func::from_name(&name) {
                    self.expect_sym('(')?;
                    let e = self.expr()?;
                    self.expect_sym(')')?;
                    Ok(Expr::Call(f, Box::new(e)))
                } else {
                    Err(syntax(self.line, col, format!("unknown identifier `{name}`")))
                }
            }
            Some(t) => Err(syntax(self.line, col, format!("unexpected {t}"))),
            None => Err(syntax(self.line, col, "unexpected end of line")),
        }
    }
}

/// Parses a standalone expression over the given coordinate names.
pub fn parse_expression(text: &str, coords: &[String]) -> Result<Expr> {
    let toks = lex(text, 1)?;
    let mut p = Parser { toks: &toks, pos: 0, line: 1, end_col: text.chars().count() + 1, coords };
    let e = p.expr()?;
    if p.pos < toks.len() {
        return Err(p.err("trailing input after expression"));
    }
    Ok(e)
}

fn index(tok: Option<&Token>, line: usize, end: usize) -> Result<usize> {
    match tok {
        Some(Token { tok: Tok::Num(v), col }) => {
            if v.fract() == 0.0 && (1.0..=4.0).contains(v) {
                Ok(*v as usize - 1)
            } else {
                Err(syntax(line, *col, "index must be 1, 2, 3 or 4"))
            }
        }
        Some(t) => Err(syntax(line, t.col, format!("expected index, found {}", t.tok))),
        None => Err(syntax(line, end, "expected index")),
    }
}

fn signed_number(toks: &[Token], pos: &mut usize, line: usize, end: usize) -> Result<f64> {
    let mut sign = 1.0;
    if let Some(Token { tok: Tok::Sym('-'), .. }) = toks.get(*pos) {
        sign = -1.0;
        *pos += 1;
    }
    match toks.get(*pos) {
        Some(Token { tok: Tok::Num(v), .. }) => {
            *pos += 1;
            Ok(sign * v)
        }
        Some(t) => Err(syntax(line, t.col, format!("expected number, found {}", t.tok))),
        None => Err(syntax(line, end, "expected number")),
    }
}

/// Parses a full surface description.
pub fn parse_spec(text: &str) -> Result<SurfaceSpec> {
    let mut coords: Option<[String; 4]> = None;
    let mut domain: [Option<(f64, f64)>; 4] = [None; 4];
    let mut metric: Vec<((usize, usize), Expr)> = Vec::new();
    let mut standard = false;
    let mut j_entries: Vec<((usize, usize), Expr)> = Vec::new();
    let mut last_line = 1;

    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        last_line = line;
        let toks = lex(raw, line)?;
        let end = raw.chars().count() + 1;
        let Some(first) = toks.first() else { continue };
        let Tok::Ident(head) = &first.tok else {
            return Err(syntax(line, first.col, "expected a statement keyword"));
        };
        match head.as_str() {
            "coords" => {
                if coords.is_some() {
                    return Err(syntax(line, first.col, "duplicate coords line"));
                }
                let mut names = Vec::new();
                for t in &toks[1..] {
                    match &t.tok {
                        Tok::Ident(n) if Func::from_name(n).is_none() => {
                            if names.contains(n) {
                                return Err(syntax(line, t.col, format!("repeated coordinate `{n}`")));
                            }
                            names.push(n.clone());
                        }
                        other => return Err(syntax(line, t.col, format!("invalid coordinate name {other}"))),
                    }
                }
                if names.len() != 4 {
                    return Err(syntax(line, end, format!("expected 4 coordinate names, found {}", names.len())));
                }
                coords = Some([names[0].clone(), names[1].clone(), names[2].clone(), names[3].clone()]);
            }
            "domain" => {
                let Some(names) = &coords else {
                    return Err(syntax(line, first.col, "domain before coords"));
                };
                let k = match toks.get(1) {
                    Some(Token { tok: Tok::Ident(n), col }) => names
                        .iter()
                        .position(|c| c == n)
                        .ok_or_else(|| syntax(line, *col, format!("unknown coordinate `{n}`")))?,
                    Some(t) => return Err(syntax(line, t.col, "expected coordinate name")),
                    None => return Err(syntax(line, end, "expected coordinate name")),
                };
                let mut pos = 2;
                let lo = signed_number(&toks, &mut pos, line, end)?;
                let hi = signed_number(&toks, &mut pos, line, end)?;
                if let Some(t) = toks.get(pos) {
                    return Err(syntax(line, t.col, "trailing input after domain bounds"));
                }
                if !(lo < hi) {
                    return Err(syntax(line, first.col, "domain interval has empty interior"));
                }
                if domain[k].is_some() {
                    return Err(syntax(line, first.col, "duplicate domain line"));
                }
                domain[k] = Some((lo, hi));
            }
            "g" | "J" => {
                let Some(names) = &coords else {
                    return Err(syntax(line, first.col, format!("{head} before coords")));
                };
                if head == "J" {
                    if let Some(Token { tok: Tok::Ident(w), col }) = toks.get(1) {
                        if w != "standard" {
                            return Err(syntax(line, *col, format!("expected `standard` or indices, found `{w}`")));
                        }
                        if let Some(t) = toks.get(2) {
                            return Err(syntax(line, t.col, "trailing input after `J standard`"));
                        }
                        if standard || !j_entries.is_empty() {
                            return Err(syntax(line, first.col, "complex structure given twice"));
                        }
                        standard = true;
                        continue;
                    }
                }
                let i = index(toks.get(1), line, end)?;
                let j = index(toks.get(2), line, end)?;
                match toks.get(3) {
                    Some(Token { tok: Tok::Sym('='), .. }) => {}
                    Some(t) => return Err(syntax(line, t.col, format!("expected `=`, found {}", t.tok))),
                    None => return Err(syntax(line, end, "expected `=`")),
                }
                let mut p = Parser { toks: &toks[4..], pos: 0, line, end_col: end, coords: names };
                let e = p.expr()?;
                if p.pos < toks.len() - 4 {
                    return Err(p.err("trailing input after expression"));
                }
                let target = if head == "g" { &mut metric } else { &mut j_entries };
                if head == "J" && standard {
                    return Err(syntax(line, first.col, "complex structure given twice"));
                }
                if target.iter().any(|(ij, _)| *ij == (i, j)) {
                    return Err(syntax(line, first.col, format!("duplicate entry {head} {} {}", i + 1, j + 1)));
                }
                target.push(((i, j), e));
            }
            other => return Err(syntax(line, first.col, format!("unknown statement `{other}`"))),
        }
    }

    let coords = coords.ok_or_else(|| syntax(1, 1, "missing coords line"))?;
    let mut dom = [(0.0, 0.0); 4];
    for k in 0..4 {
        dom[k] = domain[k].ok_or_else(|| syntax(last_line, 1, format!("missing domain for `{}`", coords[k])))?;
    }
    let complex_structure = if j_entries.is_empty() {
        ComplexStructureSpec::Standard
    } else {
        ComplexStructureSpec::Entries(j_entries)
    };
    Ok(SurfaceSpec { coords, domain: dom, metric, complex_structure })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> Vec<String> {
        ["x1", "x2", "x3", "x4"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn precedence_and_functions() {
        let e = parse_expression("1 + 2*x1^2 - x2/4", &names()).unwrap();
        assert!((e.eval(&[3.0, 2.0, 0.0, 0.0]) - 18.5).abs() < 1e-15);
        let e = parse_expression("exp(log(x3)) * sqrt(4) + tanh(0) + sin(0) + cos(0)", &names()).unwrap();
        assert!((e.eval(&[0.0, 0.0, 1.5, 0.0]) - 4.0).abs() < 1e-14);
        let e = parse_expression("-x1^2", &names()).unwrap();
        assert_eq!(e.eval(&[2.0, 0.0, 0.0, 0.0]), 4.0);
        let e = parse_expression("2^-1 + 1.5e1", &names()).unwrap();
        assert_eq!(e.eval(&[0.0; 4]), 15.5);
    }

    #[test]
    fn render_round_trip() {
        let e = parse_expression("-(x1 - 2)^3/(1+x2*x2) - sqrt(x3)", &names()).unwrap();
        let back = parse_expression(&e.render(&names()), &names()).unwrap();
        let p = [0.3, -0.7, 0.2, 0.0];
        assert!((e.eval(&p) - back.eval(&p)).abs() < 1e-15);
    }

    #[test]
    fn error_positions() {
        let err = parse_expression("1 + * 2", &names()).unwrap_err();
        assert_eq!(err, Error::Syntax { line: 1, column: 5, message: "unexpected `*`".into() });
        let text = "coords x1 x2 x3 x4\ndomain x1 -1 1\ng 1 1 = (x1 + 2";
        match parse_spec(text).unwrap_err() {
            Error::Syntax { line, column, .. } => assert_eq!((line, column), (3, 16)),
            e => panic!("{e}"),
        }
        match parse_spec("coords x1 x2 x3 x4\nfoo").unwrap_err() {
            Error::Syntax { line, column, message } => {
                assert_eq!((line, column), (2, 1));
                assert!(message.contains("unknown statement"));
            }
            e => panic!("{e}"),
        }
        assert!(parse_spec("coords a b c\n").is_err());
        assert!(parse_expression("x1 ^ 1.5", &names()).is_err());
        assert!(parse_expression("y + 1", &names()).is_err());
        assert!(parse_expression("x1 $ 2", &names()).is_err());
    }

    #[test]
    fn full_description() {
        let text = "# test surface\ncoords x1 x2 x3 x4\n\
                    domain x1 -1 1\ndomain x2 -1 1\ndomain x3 -2 2\ndomain x4 0 1\n\
                    g 1 1 = 1/(1+x1^2)   # first entry\n\
                    g 2 2 = 1/(1+x1^2)\n\
                    J standard\n";
        let spec = parse_spec(text).unwrap();
        assert_eq!(spec.domain[2], (-2.0, 2.0));
        let table = spec.metric_table();
        assert_eq!(table[0].eval(&[1.0, 0.0, 0.0, 0.0]), 0.5);
        assert_eq!(table[15].eval(&[0.0; 4]), 1.0);
        assert_eq!(table[1].eval(&[0.0; 4]), 0.0);
        assert_eq!(spec.complex_structure, ComplexStructureSpec::Standard);
        assert!(parse_spec("coords x1 x2 x3 x4\ndomain x1 -1 1").is_err());
        let dup = format!("{text}g 1 1 = 2\n");
        assert!(parse_spec(&dup).is_err());
    }
}
