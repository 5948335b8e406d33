use num_bigint::BigInt;

use super::{diff, normalize, Expr, Kernel, Rational, Workspace};
use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    /// `_{` opening a jet subscript list.
    JetOpen,
    Punct(char),
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(text: &'a str) -> Result<Vec<(usize, Tok)>> {
        let mut lx = Lexer { src: text.as_bytes(), pos: 0 };
        let mut out = Vec::new();
        while let Some(t) = lx.next()? {
            out.push(t);
        }
        Ok(out)
    }

    fn err(&self, offset: usize, message: &str) -> Error {
        Error::Syntax { offset, message: message.to_string() }
    }

    fn next(&mut self) -> Result<Option<(usize, Tok)>> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let Some(&c) = self.src.get(self.pos) else {
            return Ok(None);
        };
        let start = self.pos;
        if c.is_ascii_digit() || (c == b'.' && self.src.get(start + 1).is_some_and(u8::is_ascii_digit)) {
            return self.number(start).map(|t| Some((start, t)));
        }
        if c.is_ascii_alphabetic() {
            while let Some(&d) = self.src.get(self.pos) {
                let jet_start = d == b'_' && self.src.get(self.pos + 1) == Some(&b'{');
                if jet_start || !(d.is_ascii_alphanumeric() || d == b'_') {
                    break;
                }
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
            return Ok(Some((start, Tok::Ident(name))));
        }
        if c == b'_' {
            if self.src.get(start + 1) == Some(&b'{') {
                self.pos += 2;
                return Ok(Some((start, Tok::JetOpen)));
            }
            return Err(self.err(start, "stray `_`"));
        }
        if b"+-*/^(),}".contains(&c) {
            self.pos += 1;
            return Ok(Some((start, Tok::Punct(c as char))));
        }
        Err(self.err(start, &format!("unexpected character `{}`", c as char)))
    }

    fn number(&mut self, start: usize) -> Result<Tok> {
        let mut int_part = String::new();
        let mut frac_part = String::new();
        while let Some(&d) = self.src.get(self.pos).filter(|d| d.is_ascii_digit()) {
            int_part.push(d as char);
            self.pos += 1;
        }
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            while let Some(&d) = self.src.get(self.pos).filter(|d| d.is_ascii_digit()) {
                frac_part.push(d as char);
                self.pos += 1;
            }
        }
        if self.src.get(self.pos).is_some_and(|d| d.is_ascii_alphabetic() || *d == b'_') {
            return Err(self.err(self.pos, "identifier cannot start with a digit"));
        }
        let digits = format!("{int_part}{frac_part}");
        let n: BigInt = digits.parse().map_err(|_| self.err(start, "malformed number"))?;
        let d = BigInt::from(10u32).pow(frac_part.len() as u32);
        Ok(Tok::Num(Rational::new(n, d)))
    }
}

struct Parser<'w> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    ws: &'w Workspace,
}

/// Parses `text` in the workspace and returns its canonical form.
pub fn parse(text: &str, ws: &Workspace) -> Result<Expr> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser { toks, at: 0, end: text.len(), ws };
    if p.toks.is_empty() {
        return Err(Error::Syntax { offset: 0, message: "empty expression".into() });
    }
    let e = p.expr()?;
    if let Some((off, t)) = p.toks.get(p.at) {
        return Err(Error::Syntax { offset: *off, message: format!("unexpected {}", describe(t)) });
    }
    normalize(&e)
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(q) => format!("number `{q}`"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::JetOpen => "`_{`".into(),
        Tok::Punct(c) => format!("`{c}`"),
    }
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.at).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Syntax { offset: self.offset(), message: message.into() }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                terms.push(-self.term()?);
            } else {
                return Ok(Expr::add(terms));
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut factors = vec![self.factor()?];
        loop {
            if self.eat('*') {
                factors.push(self.factor()?);
            } else if self.eat('/') {
                factors.push(self.factor()?.pow(-1));
            } else {
                return Ok(Expr::mul(factors));
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(-self.factor()?);
        }
        if self.eat('+') {
            return self.factor();
        }
        let base = self.atom()?;
        if self.eat('^') {
            let n = self.exponent()?;
            return Ok(base.pow(n));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i64> {
        let paren = self.eat('(');
        let negative = self.eat('-');
        if !negative {
            self.eat('+');
        }
        let off = self.offset();
        let n = match self.peek() {
            Some(Tok::Num(q)) if q.is_integer() => {
                let q = q.clone();
                self.at += 1;
                i64::try_from(q.to_integer()).map_err(|_| Error::Syntax { offset: off, message: "exponent too large".into() })?
            }
            _ => return Err(self.err("expected an integer exponent")),
        };
        if paren {
            self.expect(')')?;
        }
        Ok(if negative { -n } else { n })
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.at += 1;
                Ok(s)
            }
            _ => Err(self.err("expected an identifier")),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        let off = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(q)) => {
                self.at += 1;
                Ok(Expr::rational(q))
            }
            Some(Tok::Punct('(')) => {
                self.at += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                if self.peek() == Some(&Tok::JetOpen) {
                    self.at += 1;
                    return self.jet(&name, off);
                }
                if self.eat('(') {
                    return self.call(&name, off);
                }
                self.ws.lookup(&name).map(|s| Expr::sym(&s)).ok_or(Error::UnknownSymbol(name))
            }
            Some(t) => Err(self.err(format!("unexpected {}", describe(&t)))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn jet(&mut self, name: &str, off: usize) -> Result<Expr> {
        let dep = self.ws.lookup(name).ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
        let Some((alpha, _)) = dep.jet_data(self.ws.p()).filter(|_| dep.is_dependent()) else {
            return Err(Error::Syntax { offset: off, message: format!("`{name}` is not a dependent variable") });
        };
        let mut k = MultiIndex::zero(self.ws.p());
        loop {
            let v = self.ident()?;
            let sym = self.ws.lookup(&v).ok_or_else(|| Error::UnknownSymbol(v.clone()))?;
            let Some(slot) = self.ws.slot_of(&sym) else {
                return Err(self.err(format!("`{v}` is not an independent variable")));
            };
            k = k.increment(slot);
            if !self.eat(',') {
                break;
            }
        }
        self.expect('}')?;
        if k.order() > self.ws.jet_cap() {
            return Err(Error::JetOrderExceeded {
                name: self.ws.jet(alpha, &k).name().to_string(),
                order: k.order(),
                cap: self.ws.jet_cap(),
            });
        }
        Ok(self.ws.jet_expr(alpha, &k))
    }

    fn args(&mut self) -> Result<Vec<Expr>> {
        let mut args = vec![self.expr()?];
        while self.eat(',') {
            args.push(self.expr()?);
        }
        self.expect(')')?;
        Ok(args)
    }

    fn symbol_arg(&self, e: &Expr, what: &str, off: usize) -> Result<super::Symbol> {
        e.as_sym()
            .cloned()
            .ok_or_else(|| Error::Syntax { offset: off, message: format!("{what} expects a variable here") })
    }

    fn call(&mut self, name: &str, off: usize) -> Result<Expr> {
        if let Some(k) = Kernel::from_name(name) {
            let args = self.args()?;
            if args.len() != 1 {
                return Err(Error::Syntax { offset: off, message: format!("`{name}` takes one argument") });
            }
            return Ok(Expr::kernel(k, args.into_iter().next().unwrap()));
        }
        match name {
            "diff" => {
                let args = self.args()?;
                if args.len() < 2 {
                    return Err(Error::Syntax { offset: off, message: "`diff` needs an expression and variables".into() });
                }
                let mut e = normalize(&args[0])?;
                for a in &args[1..] {
                    let s = self.symbol_arg(a, "diff", off)?;
                    e = diff(&e, &s)?;
                }
                Ok(e)
            }
            "integrate" => {
                let args = self.args()?;
                if args.len() != 2 {
                    return Err(Error::Syntax { offset: off, message: "`integrate` takes two arguments".into() });
                }
                let x = self.symbol_arg(&args[1], "integrate", off)?;
                Ok(Expr::integral(args[0].clone(), &x))
            }
            _ => {
                let declared = self
                    .ws
                    .function_args(name)
                    .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?
                    .to_vec();
                let args = self.args()?;
                let given: Vec<_> = args.iter().map(|a| a.as_sym().cloned()).collect();
                if given.len() != declared.len() || given.iter().zip(&declared).any(|(g, d)| g.as_ref() != Some(d)) {
                    let list: Vec<_> = declared.iter().map(|s| s.name()).collect();
                    return Err(Error::Syntax {
                        offset: off,
                        message: format!("`{name}` must be applied to its declared arguments ({})", list.join(",")),
                    });
                }
                Ok(Expr::func(name, &declared))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ws() -> Workspace {
        let mut ws = Workspace::new(&["x1", "x2"], &["u"], 2).unwrap();
        ws.add_parameter("lambda").unwrap();
        let args = ws.independent().to_vec();
        ws.add_function("a", &args).unwrap();
        ws
    }

    #[test]
    fn parses_jets_and_powers() {
        let ws = ws();
        let e = parse("u_{x1,x2} - 2*u^3", &ws).unwrap();
        assert_eq!(e.to_string(), "u_{x1,x2} - 2*u^3");
        assert_eq!(parse("u_{x2,x1}", &ws).unwrap(), parse("u_{x1,x2}", &ws).unwrap());
        assert_eq!(parse("0*u + x1", &ws).unwrap().to_string(), "x1");
        assert!(parse("(u+1)^2 - u^2 - 2*u - 1", &ws).unwrap().is_zero_literal());
        assert_eq!(parse("u^-2", &ws).unwrap(), parse("1/u^2", &ws).unwrap());
        assert_eq!(parse("-x1^2", &ws).unwrap(), parse("-(x1^2)", &ws).unwrap());
        assert_eq!(parse("0.5*u", &ws).unwrap(), parse("u/2", &ws).unwrap());
    }

    #[test]
    fn reports_errors_with_offsets() {
        let ws = ws();
        assert_eq!(parse("u + v", &ws), Err(Error::UnknownSymbol("v".into())));
        assert!(matches!(parse("u +", &ws), Err(Error::Syntax { offset: 3, .. })));
        assert!(matches!(parse("u $ 1", &ws), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("u_{x1,x1,x2}", &ws), Err(Error::JetOrderExceeded { order: 3, cap: 2, .. })));
        assert!(matches!(parse("a(x1)", &ws), Err(Error::Syntax { .. })));
    }

    #[test]
    fn unknown_functions_and_reserved_calls() {
        let ws = ws();
        let e = parse("diff(a(x1,x2),x1)", &ws).unwrap();
        assert_eq!(e.to_string(), "diff(a(x1,x2),x1)");
        assert_eq!(parse(&e.to_string(), &ws).unwrap(), e);
        let i = parse("integrate(a(x1,x2)*x1, x2)", &ws).unwrap();
        assert_eq!(parse(&i.to_string(), &ws).unwrap(), i);
    }
}
