//! Infix expression parser and evaluator for coefficient data.
//!
//! Coefficients (diffusion entries, drift components, weights, gauges) are
//! written as plain text over the variables `x1..xd`, numeric literals, the
//! functions `exp`, `log`, `sqrt`, `abs`, `pow`, `min`, `max`, and the
//! branching form `piecewise(cond ? a : b)` where `cond` is a comparison.
//! `log` is the natural logarithm. The grammar (EBNF) is documented in the
//! repository README.
//!
//! Printing is the inverse of parsing: `parse(&ast.to_string()) == ast`.

use std::fmt;

use crate::error::{Error, Result};

/// Binary operators, including comparisons (which evaluate to 1.0 / 0.0).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl BinOp {
    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne
        )
    }

    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
        }
    }

    /// Printing precedence; parenthesization follows the parser's binding.
    fn precedence(self) -> u8 {
        match self {
            _ if self.is_comparison() => 1,
            BinOp::Add | BinOp::Sub => 2,
            BinOp::Mul | BinOp::Div => 3,
            BinOp::Pow => 5,
            _ => unreachable!(),
        }
    }
}

/// Built-in functions callable with parenthesized arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Abs,
    Pow,
    Min,
    Max,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Pow => "pow",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Exp | Func::Log | Func::Sqrt | Func::Abs => 1,
            Func::Pow | Func::Min | Func::Max => 2,
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "pow" => Func::Pow,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }
}

/// Expression tree. Variables are 0-based internally and print as `x1..xd`.
#[derive(Debug, Clone, PartialEq)]
pub enum Ast {
    /// Non-negative finite literal (negation is a unary node).
    Const(f64),
    Var(usize),
    Neg(Box<Ast>),
    Binary(BinOp, Box<Ast>, Box<Ast>),
    Call(Func, Vec<Ast>),
    /// `piecewise(cond ? then : otherwise)`; `cond` is a comparison node.
    Piecewise {
        cond: Box<Ast>,
        then: Box<Ast>,
        otherwise: Box<Ast>,
    },
}

impl Ast {
    /// Evaluate at a point. The caller guarantees `x.len()` covers every
    /// variable index (enforced at parse time against the declared dimension).
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Ast::Const(c) => *c,
            Ast::Var(i) => x[*i],
            Ast::Neg(a) => -a.eval(x),
            Ast::Binary(op, a, b) => {
                let (u, v) = (a.eval(x), b.eval(x));
                apply_bin(*op, u, v)
            }
            Ast::Call(f, args) => match f {
                Func::Exp => args[0].eval(x).exp(),
                Func::Log => args[0].eval(x).ln(),
                Func::Sqrt => args[0].eval(x).sqrt(),
                Func::Abs => args[0].eval(x).abs(),
                Func::Pow => args[0].eval(x).powf(args[1].eval(x)),
                Func::Min => args[0].eval(x).min(args[1].eval(x)),
                Func::Max => args[0].eval(x).max(args[1].eval(x)),
            },
            Ast::Piecewise {
                cond,
                then,
                otherwise,
            } => {
                if cond.eval(x) != 0.0 {
                    then.eval(x)
                } else {
                    otherwise.eval(x)
                }
            }
        }
    }

    /// Evaluate while folding every branch decision (piecewise arm, min/max
    /// selection, abs sign) into `sig`. Two points with equal signatures lie
    /// on the same smooth piece of the expression, which is what one-sided
    /// differencing near breakpoints needs.
    pub fn eval_signed(&self, x: &[f64], sig: &mut u64) -> f64 {
        fn push(sig: &mut u64, bit: bool) {
            *sig = sig
                .wrapping_mul(0x100000001b3)
                .wrapping_add(if bit { 2 } else { 1 });
        }
        match self {
            Ast::Const(c) => *c,
            Ast::Var(i) => x[*i],
            Ast::Neg(a) => -a.eval_signed(x, sig),
            Ast::Binary(op, a, b) => {
                let u = a.eval_signed(x, sig);
                let v = b.eval_signed(x, sig);
                apply_bin(*op, u, v)
            }
            Ast::Call(f, args) => match f {
                Func::Exp => args[0].eval_signed(x, sig).exp(),
                Func::Log => args[0].eval_signed(x, sig).ln(),
                Func::Sqrt => args[0].eval_signed(x, sig).sqrt(),
                Func::Abs => {
                    let v = args[0].eval_signed(x, sig);
                    push(sig, v < 0.0);
                    v.abs()
                }
                Func::Pow => {
                    let u = args[0].eval_signed(x, sig);
                    let v = args[1].eval_signed(x, sig);
                    u.powf(v)
                }
                Func::Min => {
                    let u = args[0].eval_signed(x, sig);
                    let v = args[1].eval_signed(x, sig);
                    push(sig, u <= v);
                    u.min(v)
                }
                Func::Max => {
                    let u = args[0].eval_signed(x, sig);
                    let v = args[1].eval_signed(x, sig);
                    push(sig, u >= v);
                    u.max(v)
                }
            },
            Ast::Piecewise {
                cond,
                then,
                otherwise,
            } => {
                let c = cond.eval_signed(x, sig) != 0.0;
                push(sig, c);
                // Both arms contribute to the signature only through the taken
                // branch; the untaken arm may be singular there.
                if c {
                    then.eval_signed(x, sig)
                } else {
                    otherwise.eval_signed(x, sig)
                }
            }
        }
    }

    /// Breakpoints along the single coordinate of a 1-d expression: constants
    /// compared against `x1` in piecewise conditions. Quadrature splits at
    /// these so adaptive refinement never straddles a kink.
    pub fn breakpoints_1d(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_breakpoints(&mut out);
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        out
    }

    fn collect_breakpoints(&self, out: &mut Vec<f64>) {
        match self {
            Ast::Const(_) | Ast::Var(_) => {}
            Ast::Neg(a) => a.collect_breakpoints(out),
            Ast::Binary(_, a, b) => {
                a.collect_breakpoints(out);
                b.collect_breakpoints(out);
            }
            Ast::Call(_, args) => {
                for a in args {
                    a.collect_breakpoints(out);
                }
            }
            Ast::Piecewise {
                cond,
                then,
                otherwise,
            } => {
                if let Ast::Binary(op, l, r) = cond.as_ref() {
                    if op.is_comparison() {
                        match (l.as_ref(), r.as_ref()) {
                            (Ast::Var(_), Ast::Const(c)) | (Ast::Const(c), Ast::Var(_)) => {
                                out.push(*c)
                            }
                            (Ast::Var(_), Ast::Neg(n)) | (Ast::Neg(n), Ast::Var(_)) => {
                                if let Ast::Const(c) = n.as_ref() {
                                    out.push(-*c);
                                }
                            }
                            _ => {}
                        }
                    }
                }
                cond.collect_breakpoints(out);
                then.collect_breakpoints(out);
                otherwise.collect_breakpoints(out);
            }
        }
    }

    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Ast::Const(_) => None,
            Ast::Var(i) => Some(*i),
            Ast::Neg(a) => a.max_var(),
            Ast::Binary(_, a, b) => a.max_var().max(b.max_var()),
            Ast::Call(_, args) => args.iter().filter_map(|a| a.max_var()).max(),
            Ast::Piecewise {
                cond,
                then,
                otherwise,
            } => [cond.max_var(), then.max_var(), otherwise.max_var()]
                .into_iter()
                .flatten()
                .max(),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        match self {
            Ast::Const(c) => write!(f, "{c}"),
            Ast::Var(i) => write!(f, "x{}", i + 1),
            Ast::Neg(a) => {
                // Negation binds between `*` and `^`.
                if min_prec > 4 {
                    write!(f, "(")?;
                    write!(f, "-")?;
                    a.fmt_prec(f, 5)?;
                    write!(f, ")")
                } else {
                    write!(f, "-")?;
                    a.fmt_prec(f, 5)
                }
            }
            Ast::Binary(op, a, b) => {
                let p = op.precedence();
                let paren = p < min_prec;
                if paren {
                    write!(f, "(")?;
                }
                // `^` is right-associative, everything else left-associative.
                let (lp, rp) = if *op == BinOp::Pow {
                    (6, 4)
                } else {
                    (p, p + 1)
                };
                a.fmt_prec(f, lp)?;
                write!(f, " {} ", op.symbol())?;
                b.fmt_prec(f, rp)?;
                if paren {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Ast::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    a.fmt_prec(f, 0)?;
                }
                write!(f, ")")
            }
            Ast::Piecewise {
                cond,
                then,
                otherwise,
            } => {
                write!(f, "piecewise(")?;
                cond.fmt_prec(f, 0)?;
                write!(f, " ? ")?;
                then.fmt_prec(f, 0)?;
                write!(f, " : ")?;
                otherwise.fmt_prec(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

fn apply_bin(op: BinOp, u: f64, v: f64) -> f64 {
    match op {
        BinOp::Add => u + v,
        BinOp::Sub => u - v,
        BinOp::Mul => u * v,
        BinOp::Div => u / v,
        BinOp::Pow => u.powf(v),
        BinOp::Lt => (u < v) as u8 as f64,
        BinOp::Le => (u <= v) as u8 as f64,
        BinOp::Gt => (u > v) as u8 as f64,
        BinOp::Ge => (u >= v) as u8 as f64,
        BinOp::Eq => (u == v) as u8 as f64,
        BinOp::Ne => (u != v) as u8 as f64,
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Question,
    Colon,
    Cmp(BinOp),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    pos: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let pos = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => out.push(Spanned { tok: Tok::Plus, pos }),
            '-' => out.push(Spanned { tok: Tok::Minus, pos }),
            '*' => out.push(Spanned { tok: Tok::Star, pos }),
            '/' => out.push(Spanned { tok: Tok::Slash, pos }),
            '^' => out.push(Spanned { tok: Tok::Caret, pos }),
            '(' => out.push(Spanned { tok: Tok::LParen, pos }),
            ')' => out.push(Spanned { tok: Tok::RParen, pos }),
            ',' => out.push(Spanned { tok: Tok::Comma, pos }),
            '?' => out.push(Spanned { tok: Tok::Question, pos }),
            ':' => out.push(Spanned { tok: Tok::Colon, pos }),
            '<' | '>' | '=' | '!' => {
                let two = bytes.get(i + 1) == Some(&b'=');
                let op = match (c, two) {
                    ('<', true) => BinOp::Le,
                    ('<', false) => BinOp::Lt,
                    ('>', true) => BinOp::Ge,
                    ('>', false) => BinOp::Gt,
                    ('=', true) => BinOp::Eq,
                    ('!', true) => BinOp::Ne,
                    _ => {
                        return Err(Error::Parse {
                            position: pos,
                            message: format!("stray `{c}`; expected a comparison operator"),
                        })
                    }
                };
                out.push(Spanned { tok: Tok::Cmp(op), pos });
                if two {
                    i += 1;
                }
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s = &text[start..i];
                let v: f64 = s.parse().map_err(|_| Error::Parse {
                    position: start,
                    message: format!("malformed number `{s}`"),
                })?;
                out.push(Spanned {
                    tok: Tok::Num(v),
                    pos: start,
                });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push(Spanned {
                    tok: Tok::Ident(text[start..i].to_string()),
                    pos: start,
                });
                continue;
            }
            _ => {
                return Err(Error::Parse {
                    position: pos,
                    message: format!("unexpected character `{c}`"),
                })
            }
        }
        i += 1;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser<'a> {
    toks: &'a [Spanned],
    idx: usize,
    dim: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|s| &s.tok)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map(|s| s.pos).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|s| s.tok.clone());
        self.idx += 1;
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<()> {
        if self.peek() == Some(want) {
            self.idx += 1;
            Ok(())
        } else {
            Err(Error::Parse {
                position: self.pos(),
                message: format!("expected {what}"),
            })
        }
    }

    fn expression(&mut self) -> Result<Ast> {
        let lhs = self.additive()?;
        if let Some(Tok::Cmp(op)) = self.peek().cloned() {
            self.idx += 1;
            let rhs = self.additive()?;
            return Ok(Ast::Binary(op, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn additive(&mut self) -> Result<Ast> {
        let mut node = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => break,
            };
            self.idx += 1;
            let rhs = self.multiplicative()?;
            node = Ast::Binary(op, Box::new(node), Box::new(rhs));
        }
        Ok(node)
    }

    fn multiplicative(&mut self) -> Result<Ast> {
        let mut node = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => break,
            };
            self.idx += 1;
            let rhs = self.unary()?;
            node = Ast::Binary(op, Box::new(node), Box::new(rhs));
        }
        Ok(node)
    }

    fn unary(&mut self) -> Result<Ast> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.idx += 1;
                Ok(Ast::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Plus) => {
                self.idx += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Ast> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.idx += 1;
            let exp = self.unary()?;
            return Ok(Ast::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Ast> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Ast::Const(v)),
            Some(Tok::LParen) => {
                let inner = self.expression()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => self.ident(name, pos),
            _ => Err(Error::Parse {
                position: pos,
                message: "expected a number, variable, function call, or `(`".into(),
            }),
        }
    }

    fn ident(&mut self, name: String, pos: usize) -> Result<Ast> {
        if let Some(rest) = name.strip_prefix('x') {
            if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                let index: usize = rest.parse().map_err(|_| Error::Parse {
                    position: pos,
                    message: format!("malformed variable `{name}`"),
                })?;
                if index == 0 || index > self.dim {
                    return Err(Error::DimensionMismatch {
                        index,
                        dim: self.dim,
                    });
                }
                return Ok(Ast::Var(index - 1));
            }
        }
        if name == "piecewise" {
            self.expect(&Tok::LParen, "`(` after `piecewise`")?;
            let cond_pos = self.pos();
            let cond = self.expression()?;
            match &cond {
                Ast::Binary(op, _, _) if op.is_comparison() => {}
                _ => {
                    return Err(Error::Parse {
                        position: cond_pos,
                        message: "piecewise condition must be a comparison".into(),
                    })
                }
            }
            self.expect(&Tok::Question, "`?` after piecewise condition")?;
            let then = self.expression()?;
            self.expect(&Tok::Colon, "`:` between piecewise branches")?;
            let otherwise = self.expression()?;
            self.expect(&Tok::RParen, "`)` closing piecewise")?;
            return Ok(Ast::Piecewise {
                cond: Box::new(cond),
                then: Box::new(then),
                otherwise: Box::new(otherwise),
            });
        }
        if let Some(func) = Func::from_name(&name) {
            self.expect(&Tok::LParen, &format!("`(` after `{name}`"))?;
            let mut args = vec![self.expression()?];
            while self.peek() == Some(&Tok::Comma) {
                self.idx += 1;
                args.push(self.expression()?);
            }
            self.expect(&Tok::RParen, "`)` closing argument list")?;
            if args.len() != func.arity() {
                return Err(Error::Parse {
                    position: pos,
                    message: format!(
                        "`{name}` takes {} argument(s), got {}",
                        func.arity(),
                        args.len()
                    ),
                });
            }
            return Ok(Ast::Call(func, args));
        }
        Err(Error::UnknownIdentifier {
            name,
            position: pos,
        })
    }
}

/// Parse `text` as an expression over `x1..x<dim>`.
pub fn parse_expression(text: &str, dim: usize) -> Result<Ast> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks: &toks,
        idx: 0,
        dim,
        end: text.len(),
    };
    let ast = p.expression()?;
    if p.idx != toks.len() {
        return Err(Error::Parse {
            position: p.pos(),
            message: "trailing input after expression".into(),
        });
    }
    Ok(ast)
}
