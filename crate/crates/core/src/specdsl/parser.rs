use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::lexer::{tokenize, Pos, Tok, Token};
use super::{ErrorKind, ParseError, SpecSource};
use crate::rules::{FactorPattern, RuleError, RuleSet};
use crate::terms::{
    Complex, Expression, Factor, Letter, MultiIndex, OperatorWord, Product, Scalar, TermError,
};

#[derive(Clone, Debug)]
struct Name {
    text: String,
    pos: Pos,
}

#[derive(Clone, Debug)]
struct Num {
    value: BigInt,
    pos: Pos,
}

#[derive(Clone, Debug)]
struct LetterAst {
    label: Name,
    order: Num,
}

#[derive(Clone, Debug)]
struct FactorAst {
    letters: Vec<LetterAst>,
    atom: Name,
    power: Option<Num>,
}

#[derive(Clone, Debug)]
struct PatternAst {
    /// `None` is the `[*]` wildcard.
    letters: Option<Vec<LetterAst>>,
    /// `None` is the `*` wildcard.
    atom: Option<Name>,
    pos: Pos,
}

#[derive(Clone, Debug)]
struct TermAst {
    coeff: Scalar,
    factors: Vec<FactorAst>,
}

#[derive(Clone, Debug)]
enum Stmt {
    Slots(Num),
    Diff {
        name: Name,
        up: Num,
        down: Num,
    },
    Atom {
        name: Name,
        index: Option<(Vec<Num>, Vec<Num>)>,
    },
    MaxOrder {
        label: Name,
        pattern: PatternAst,
        bound: Num,
    },
    MaxPower {
        pattern: PatternAst,
        bound: Num,
    },
    Ideal {
        members: Vec<(PatternAst, Option<Num>)>,
    },
    Commute {
        a: Name,
        b: Name,
        value: Scalar,
    },
    Cond {
        lhs: FactorAst,
        rhs: Vec<TermAst>,
    },
}

struct Parser<'a> {
    text: &'a str,
    toks: Vec<Token>,
    i: usize,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> PResult<Self> {
        Ok(Parser {
            text,
            toks: tokenize(text)?,
            i: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn syntax(&self, expected: &str) -> ParseError {
        ParseError::at(
            ErrorKind::Syntax,
            self.text,
            self.pos(),
            format!("expected {expected}, found {}", self.peek().describe()),
        )
    }

    fn expect(&mut self, t: Tok) -> PResult<Pos> {
        if self.peek() == &t {
            Ok(self.bump().pos)
        } else {
            Err(self.syntax(&t.describe()))
        }
    }

    fn name(&mut self, what: &str) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Ident(text) => {
                let pos = self.bump().pos;
                Ok(Name { text, pos })
            }
            _ => Err(self.syntax(what)),
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        if matches!(self.peek(), Tok::Ident(s) if s == kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.syntax(&format!("`{kw}`")))
        }
    }

    fn number(&mut self) -> PResult<Num> {
        match self.peek().clone() {
            Tok::Int(s) => {
                let pos = self.bump().pos;
                Ok(Num {
                    value: s.parse().expect("lexer yields digits"),
                    pos,
                })
            }
            _ => Err(self.syntax("a number")),
        }
    }

    fn signed(&mut self) -> PResult<Num> {
        let pos = self.pos();
        let neg = self.eat(&Tok::Minus);
        let mut n = self.number()?;
        if neg {
            n.value = -n.value;
            n.pos = pos;
        }
        Ok(n)
    }

    fn rational(&mut self) -> PResult<BigRational> {
        let num = self.number()?;
        if self.eat(&Tok::Slash) {
            let den = self.number()?;
            if den.value.is_zero() {
                return Err(ParseError::at(
                    ErrorKind::Semantic,
                    self.text,
                    den.pos,
                    "zero denominator",
                ));
            }
            Ok(BigRational::new(num.value, den.value))
        } else {
            Ok(BigRational::from_integer(num.value))
        }
    }

    /// `(a)`, `(a+bi)` or `(a-bi)`, with the opening parenthesis already seen.
    fn gaussian_body(&mut self) -> PResult<Scalar> {
        let neg = self.eat(&Tok::Minus);
        let mut re = self.rational()?;
        if neg {
            re = -re;
        }
        let mut im = BigRational::zero();
        if matches!(self.peek(), Tok::Plus | Tok::Minus) {
            let neg = self.bump().tok == Tok::Minus;
            im = self.rational()?;
            if neg {
                im = -im;
            }
            match self.peek() {
                Tok::Ident(s) if s == "i" => {
                    self.bump();
                }
                _ => return Err(self.syntax("`i`")),
            }
        }
        self.expect(Tok::RParen)?;
        Ok(Scalar::new(re, im))
    }

    fn scalar(&mut self) -> PResult<Scalar> {
        if self.eat(&Tok::LParen) {
            return self.gaussian_body();
        }
        let neg = self.eat(&Tok::Minus);
        let r = self.rational()?;
        Ok(Scalar::real(if neg { -r } else { r }))
    }

    fn letters(&mut self) -> PResult<Vec<LetterAst>> {
        let mut out = Vec::new();
        loop {
            let label = self.name("a differential label")?;
            let order = if self.eat(&Tok::Caret) {
                self.number()?
            } else {
                Num {
                    value: 1.into(),
                    pos: label.pos,
                }
            };
            out.push(LetterAst { label, order });
            if self.eat(&Tok::RBracket) {
                return Ok(out);
            }
        }
    }

    fn factor(&mut self) -> PResult<FactorAst> {
        let letters = if self.eat(&Tok::LBracket) {
            self.letters()?
        } else {
            Vec::new()
        };
        let atom = self.name("an atom")?;
        let power = if self.eat(&Tok::Caret) {
            Some(self.number()?)
        } else {
            None
        };
        Ok(FactorAst {
            letters,
            atom,
            power,
        })
    }

    fn pattern(&mut self) -> PResult<PatternAst> {
        let pos = self.pos();
        let letters = if self.eat(&Tok::LBracket) {
            if self.eat(&Tok::Star) {
                self.expect(Tok::RBracket)?;
                None
            } else {
                Some(self.letters()?)
            }
        } else {
            Some(Vec::new())
        };
        let atom = if self.eat(&Tok::Star) {
            None
        } else {
            Some(self.name("an atom or `*`")?)
        };
        Ok(PatternAst { letters, atom, pos })
    }

    fn term(&mut self, negative: bool) -> PResult<TermAst> {
        let mut coeff = match self.peek() {
            Tok::Int(_) => Scalar::real(self.rational()?),
            Tok::LParen => {
                self.bump();
                self.gaussian_body()?
            }
            _ => Scalar::one(),
        };
        self.eat(&Tok::Star);
        if negative {
            coeff = -coeff;
        }
        self.expect(Tok::LBrace)?;
        let mut factors = Vec::new();
        if !self.eat(&Tok::RBrace) {
            loop {
                factors.push(self.factor()?);
                if self.eat(&Tok::RBrace) {
                    break;
                }
                if !self.eat(&Tok::Comma) {
                    return Err(self.syntax("`,` or `}`"));
                }
            }
        }
        Ok(TermAst { coeff, factors })
    }

    /// Terms joined by `+`/`-`, or a lone `0`.
    fn expr(&mut self, end: &Tok) -> PResult<Vec<TermAst>> {
        if matches!(self.peek(), Tok::Int(s) if s == "0") && self.peek_at(1) == end {
            self.bump();
            return Ok(Vec::new());
        }
        let mut terms = Vec::new();
        let mut negative = self.eat(&Tok::Minus);
        loop {
            terms.push(self.term(negative)?);
            match self.peek() {
                Tok::Plus => negative = false,
                Tok::Minus => negative = true,
                _ => return Ok(terms),
            }
            self.bump();
        }
    }

    fn index_vector(&mut self) -> PResult<Vec<Num>> {
        self.expect(Tok::LBracket)?;
        let mut v = Vec::new();
        if self.eat(&Tok::RBracket) {
            return Ok(v);
        }
        loop {
            v.push(self.signed()?);
            if self.eat(&Tok::RBracket) {
                return Ok(v);
            }
            if !self.eat(&Tok::Comma) {
                return Err(self.syntax("`,` or `]`"));
            }
        }
    }

    fn statement(&mut self) -> PResult<(Stmt, Pos)> {
        let pos = self.pos();
        let kw = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return Err(self.syntax("a statement")),
        };
        let stmt = match kw.as_str() {
            "slots" => {
                self.bump();
                Stmt::Slots(self.number()?)
            }
            "diff" => {
                self.bump();
                let name = self.name("a label name")?;
                self.keyword("up")?;
                let up = self.number()?;
                self.keyword("down")?;
                let down = self.number()?;
                Stmt::Diff { name, up, down }
            }
            "atom" => {
                self.bump();
                let name = self.name("an atom name")?;
                let index = if matches!(self.peek(), Tok::Ident(s) if s == "n") {
                    self.bump();
                    let upper = self.index_vector()?;
                    self.keyword("m")?;
                    let lower = self.index_vector()?;
                    Some((upper, lower))
                } else {
                    None
                };
                Stmt::Atom { name, index }
            }
            "maxorder" => {
                self.bump();
                let label = self.name("a differential label")?;
                self.keyword("on")?;
                let pattern = self.pattern()?;
                self.expect(Tok::Eq)?;
                Stmt::MaxOrder {
                    label,
                    pattern,
                    bound: self.number()?,
                }
            }
            "maxpower" => {
                self.bump();
                let pattern = self.pattern()?;
                self.expect(Tok::Eq)?;
                Stmt::MaxPower {
                    pattern,
                    bound: self.number()?,
                }
            }
            "ideal" => {
                self.bump();
                self.expect(Tok::LBrace)?;
                let mut members = Vec::new();
                loop {
                    let p = self.pattern()?;
                    let k = if self.eat(&Tok::Caret) {
                        Some(self.number()?)
                    } else {
                        None
                    };
                    members.push((p, k));
                    if self.eat(&Tok::RBrace) {
                        break;
                    }
                    if !self.eat(&Tok::Comma) {
                        return Err(self.syntax("`,` or `}`"));
                    }
                }
                Stmt::Ideal { members }
            }
            "commute" => {
                self.bump();
                let a = self.name("a differential label")?;
                let b = self.name("a differential label")?;
                self.expect(Tok::Eq)?;
                Stmt::Commute {
                    a,
                    b,
                    value: self.scalar()?,
                }
            }
            "cond" => {
                self.bump();
                let lhs = self.factor()?;
                self.expect(Tok::Eq)?;
                Stmt::Cond {
                    lhs,
                    rhs: self.expr(&Tok::Semi)?,
                }
            }
            _ => return Err(self.syntax("a statement")),
        };
        self.expect(Tok::Semi)?;
        Ok((stmt, pos))
    }
}

struct Resolver<'a> {
    text: &'a str,
}

impl Resolver<'_> {
    fn err(&self, pos: Pos, msg: impl Into<String>) -> ParseError {
        ParseError::at(ErrorKind::Semantic, self.text, pos, msg)
    }

    fn small(&self, n: &Num, what: &str) -> PResult<u32> {
        u32::try_from(&n.value).map_err(|_| self.err(n.pos, format!("{what} out of range")))
    }

    fn positive(&self, n: &Num, what: &str) -> PResult<u32> {
        let v = self.small(n, what)?;
        if v == 0 {
            return Err(self.err(n.pos, format!("{what} must be at least 1")));
        }
        Ok(v)
    }

    fn word(&self, complex: &Complex, letters: &[LetterAst]) -> PResult<OperatorWord> {
        let mut out = Vec::new();
        for l in letters {
            let id = complex.label_id(&l.label.text).ok_or_else(|| {
                self.err(
                    l.label.pos,
                    format!("unknown differential label `{}`", l.label.text),
                )
            })?;
            out.push(Letter::new(id, self.positive(&l.order, "order")?));
        }
        Ok(OperatorWord::from_letters(out).expect("orders checked"))
    }

    fn atom(&self, complex: &Complex, n: &Name) -> PResult<crate::terms::AtomId> {
        complex
            .atom_id(&n.text)
            .ok_or_else(|| self.err(n.pos, format!("unknown atom `{}`", n.text)))
    }

    fn factor(&self, complex: &Complex, f: &FactorAst) -> PResult<(Factor, u32)> {
        let word = self.word(complex, &f.letters)?;
        let atom = self.atom(complex, &f.atom)?;
        let power = match &f.power {
            Some(n) => self.positive(n, "power")?,
            None => 1,
        };
        Ok((Factor::new(word, atom), power))
    }

    fn pattern(&self, complex: &Complex, p: &PatternAst) -> PResult<FactorPattern> {
        let word = match &p.letters {
            Some(ls) => Some(self.word(complex, ls)?),
            None => None,
        };
        let atom = match &p.atom {
            Some(n) => Some(self.atom(complex, n)?),
            None => None,
        };
        Ok(FactorPattern { atom, word })
    }

    fn expression(&self, complex: &Arc<Complex>, terms: &[TermAst]) -> PResult<Expression> {
        let mut e = Expression::zero(complex.clone());
        for t in terms {
            let mut p = Product::new();
            for f in &t.factors {
                let (factor, k) = self.factor(complex, f)?;
                p.insert(factor, k);
            }
            e.add_term(p, t.coeff.clone());
        }
        Ok(e)
    }

    fn rule_error(&self, pos: Pos, e: RuleError) -> ParseError {
        self.err(pos, e.to_string())
    }
}

/// Parses a spec given as a string; error origins read `<inline>`.
pub fn parse_spec(text: &str) -> Result<RuleSet, ParseError> {
    parse_spec_source(&SpecSource::inline(text))
}

pub fn parse_spec_source(src: &SpecSource) -> Result<RuleSet, ParseError> {
    parse_spec_text(&src.text).map_err(|mut e| {
        e.origin = src.origin.clone();
        e
    })
}

fn parse_spec_text(text: &str) -> Result<RuleSet, ParseError> {
    let mut p = Parser::new(text)?;
    let mut stmts = Vec::new();
    while p.peek() != &Tok::Eof {
        stmts.push(p.statement()?);
    }
    let r = Resolver { text };

    let mut slots: Option<usize> = None;
    for (s, pos) in &stmts {
        if let Stmt::Slots(n) = s {
            if slots.is_some() {
                return Err(r.err(*pos, "duplicate `slots` declaration"));
            }
            slots = Some(r.positive(n, "slot count")? as usize);
        }
    }
    let Some(slots) = slots else {
        return Err(r.err(Pos { line: 1, column: 1 }, "missing `slots` declaration"));
    };
    let mut complex = Complex::new(slots).expect("slot count is positive");
    for (s, _) in &stmts {
        if let Stmt::Diff { name, up, down } = s {
            let up_slot = r.small(up, "slot")? as usize;
            let down_slot = r.small(down, "slot")? as usize;
            match complex.add_label(&name.text, up_slot, down_slot) {
                Ok(_) => {}
                Err(TermError::SlotOutOfRange { slot, slots }) => {
                    let at = if slot == up_slot { up.pos } else { down.pos };
                    return Err(r.err(at, format!("slot {slot} out of range 1..={slots}")));
                }
                Err(TermError::DuplicateName(_)) => {
                    return Err(r.err(
                        name.pos,
                        format!("duplicate differential label `{}`", name.text),
                    ))
                }
                Err(e) => return Err(r.err(name.pos, e.to_string())),
            }
        }
    }
    for (s, _) in &stmts {
        if let Stmt::Atom { name, index } = s {
            if complex.label_id(&name.text).is_some() {
                return Err(r.err(
                    name.pos,
                    format!("`{}` is already a differential label", name.text),
                ));
            }
            let idx = match index {
                None => MultiIndex::zero(slots),
                Some((upper, lower)) => {
                    let conv = |v: &[Num]| -> PResult<Vec<i64>> {
                        v.iter()
                            .map(|n| {
                                i64::try_from(&n.value)
                                    .map_err(|_| r.err(n.pos, "index out of range"))
                            })
                            .collect()
                    };
                    MultiIndex {
                        upper: conv(upper)?,
                        lower: conv(lower)?,
                    }
                }
            };
            complex.add_atom(&name.text, idx).map_err(|e| match e {
                TermError::DuplicateName(_) => {
                    r.err(name.pos, format!("duplicate atom `{}`", name.text))
                }
                other => r.err(name.pos, other.to_string()),
            })?;
        }
    }

    let mut rules = RuleSet::new(complex);
    let complex = rules.complex().clone();
    for (s, pos) in &stmts {
        match s {
            Stmt::Slots(_) | Stmt::Diff { .. } | Stmt::Atom { .. } => {}
            Stmt::MaxOrder {
                label,
                pattern,
                bound,
            } => {
                let l = complex.label_id(&label.text).ok_or_else(|| {
                    r.err(
                        label.pos,
                        format!("unknown differential label `{}`", label.text),
                    )
                })?;
                let pat = r.pattern(&complex, pattern)?;
                let b = r.positive(bound, "bound")?;
                rules
                    .add_max_order(l, pat, b)
                    .map_err(|e| r.rule_error(*pos, e))?;
            }
            Stmt::MaxPower { pattern, bound } => {
                let pat = r.pattern(&complex, pattern)?;
                let b = r.positive(bound, "bound")?;
                rules
                    .add_max_power(pat, b)
                    .map_err(|e| r.rule_error(*pos, e))?;
            }
            Stmt::Ideal { members } => {
                let mut pats = Vec::new();
                for (m, k) in members {
                    let pat = r.pattern(&complex, m)?;
                    let k = match k {
                        Some(n) => r.positive(n, "multiplicity")?,
                        None => 1,
                    };
                    if pats.len() + k as usize > 1 << 16 {
                        return Err(r.err(m.pos, "ideal too large"));
                    }
                    pats.extend(std::iter::repeat_n(pat, k as usize));
                }
                rules.add_ideal(pats).map_err(|e| r.rule_error(*pos, e))?;
            }
            Stmt::Commute { a, b, value } => {
                let la = complex.label_id(&a.text).ok_or_else(|| {
                    r.err(a.pos, format!("unknown differential label `{}`", a.text))
                })?;
                let lb = complex.label_id(&b.text).ok_or_else(|| {
                    r.err(b.pos, format!("unknown differential label `{}`", b.text))
                })?;
                rules
                    .set_commutation(la, lb, value.clone())
                    .map_err(|e| r.rule_error(*pos, e))?;
            }
            Stmt::Cond { lhs, rhs } => {
                let (f, k) = r.factor(&complex, lhs)?;
                if k != 1 {
                    return Err(r.err(lhs.atom.pos, "condition left side must be a single factor"));
                }
                let e = r.expression(&complex, rhs)?;
                rules
                    .add_condition(f, e)
                    .map_err(|e| r.rule_error(*pos, e))?;
            }
        }
    }
    Ok(rules)
}

/// Parses an expression over the complex of `rules`.
pub fn parse_expr(rules: &RuleSet, text: &str) -> Result<Expression, ParseError> {
    let mut p = Parser::new(text)?;
    let terms = p.expr(&Tok::Eof)?;
    p.expect(Tok::Eof)?;
    Resolver { text }.expression(rules.complex(), &terms)
}
