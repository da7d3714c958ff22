//! Reader and canonical printer for `.masp` programs and `.facts` instances.
//!
//! ```text
//! program  := item*
//! item     := module | defblock | rule | show
//! module   := "module" IDENT "show" predlist "{" item* "}"
//! defblock := "def" predlist "{" rule* "}"
//! show     := "#show" predlist "."
//! rule     := (head)? (":-" body)? "."
//! head     := atom (";" atom)* | "{" atom "}"
//! body     := lit ("," lit)*
//! lit      := ("not" ("not")?)? atom | term ("=" | "!=") term
//! ```
//!
//! `%` starts a line comment. Bare rules at one nesting level form a single
//! def-module whose intensional symbols are all symbols occurring in them.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::ast::{Atom, CmpOp, Comparison, Constant, DefModule, Member, Meta, ModularProgram, PredicateSymbol, Rule, Term, Variable};
use crate::error::{Diagnostic, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(usize),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Dot,
    Semi,
    Slash,
    If,
    Eq,
    Neq,
    Show,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Var(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Slash => "`/`".into(),
            Tok::If => "`:-`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Neq => "`!=`".into(),
            Tok::Show => "`#show`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let adv = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                adv(1, &mut i, &mut col);
                continue;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            _ => {}
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            ';' => Tok::Semi,
            '/' => Tok::Slash,
            '=' => Tok::Eq,
            ':' if chars.get(i + 1) == Some(&'-') => Tok::If,
            '!' if chars.get(i + 1) == Some(&'=') => Tok::Neq,
            '#' => {
                let word: String = chars[i + 1..].iter().take_while(|c| c.is_ascii_alphanumeric() || **c == '_').collect();
                if word == "show" {
                    Tok::Show
                } else {
                    return Err(Error::Parse(Diagnostic::error(l0, c0, format!("unknown directive `#{word}`"))));
                }
            }
            c if c.is_ascii_digit() => {
                let s: String = chars[i..].iter().take_while(|c| c.is_ascii_digit()).collect();
                let n = s.parse().map_err(|_| Error::Parse(Diagnostic::error(l0, c0, format!("integer `{s}` out of range"))))?;
                Tok::Int(n)
            }
            c if c.is_ascii_alphabetic() => {
                let s: String = chars[i..].iter().take_while(|c| c.is_ascii_alphanumeric() || **c == '_').collect();
                if c.is_ascii_uppercase() {
                    Tok::Var(s)
                } else {
                    Tok::Ident(s)
                }
            }
            c => return Err(Error::Parse(Diagnostic::error(l0, c0, format!("unexpected character `{c}`")))),
        };
        let width = match &tok {
            Tok::Ident(s) | Tok::Var(s) => s.chars().count(),
            Tok::Int(n) => n.to_string().len(),
            Tok::If | Tok::Neq => 2,
            Tok::Show => 5,
            _ => 1,
        };
        adv(width, &mut i, &mut col);
        out.push(Spanned { tok, line: l0, col: c0 });
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    warnings: Vec<Diagnostic>,
}

/// Members collected at one nesting level; bare rules are gathered into a
/// single implicit def-module placed where the first bare rule appears.
struct Level {
    members: Vec<Option<Member>>,
    bare: Vec<Rule>,
    bare_at: Option<(usize, usize, usize)>,
    show: Option<BTreeSet<PredicateSymbol>>,
}

impl Level {
    fn finish(self) -> (Vec<Member>, Option<BTreeSet<PredicateSymbol>>) {
        let mut members = self.members;
        if let Some((slot, line, col)) = self.bare_at {
            let int: Vec<PredicateSymbol> = self.bare.iter().flat_map(|r| r.predicates()).collect();
            let mut d = DefModule::new(int, self.bare);
            d.meta = Meta::at(line, col);
            members[slot] = Some(Member::Def(d));
        }
        (members.into_iter().flatten().collect(), self.show)
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (l, c) = self.here();
        Err(Error::Parse(Diagnostic::error(l, c, msg)))
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {}, found {}", want.describe(), self.peek().describe()))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            t => self.error(format!("expected {what}, found {}", t.describe())),
        }
    }

    fn is_module_start(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == "module") && matches!(self.peek_at(1), Tok::Ident(_))
    }

    fn is_def_start(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == "def")
            && (matches!(self.peek_at(1), Tok::LBrace) || matches!((self.peek_at(1), self.peek_at(2)), (Tok::Ident(_), Tok::Slash)))
    }

    fn items(&mut self, top: bool) -> Result<Level> {
        let mut level = Level { members: Vec::new(), bare: Vec::new(), bare_at: None, show: None };
        loop {
            match self.peek() {
                Tok::Eof if top => break,
                Tok::RBrace if !top => break,
                Tok::Eof => return self.error("expected `}` before end of input"),
                Tok::Show => {
                    let (l, c) = self.here();
                    self.bump();
                    let preds = self.predlist()?;
                    self.expect(Tok::Dot)?;
                    if !top {
                        return Err(Error::Parse(Diagnostic::error(
                            l,
                            c,
                            "#show is only allowed at top level; modules declare public symbols with `show`",
                        )));
                    }
                    if level.show.is_some() {
                        return Err(Error::Parse(Diagnostic::error(l, c, "duplicate #show")));
                    }
                    level.show = Some(preds);
                }
                _ if self.is_module_start() => {
                    let m = self.module()?;
                    level.members.push(Some(Member::Program(m)));
                }
                _ if self.is_def_start() => {
                    let d = self.defblock()?;
                    level.members.push(Some(Member::Def(d)));
                }
                _ => {
                    let (l, c) = self.here();
                    let r = self.rule()?;
                    if level.bare_at.is_none() {
                        level.bare_at = Some((level.members.len(), l, c));
                        level.members.push(None);
                    }
                    level.bare.push(r);
                }
            }
        }
        Ok(level)
    }

    fn predlist(&mut self) -> Result<BTreeSet<PredicateSymbol>> {
        let mut out = BTreeSet::new();
        if !matches!(self.peek(), Tok::Ident(_)) {
            return Ok(out);
        }
        loop {
            let name = self.ident("predicate name")?;
            self.expect(Tok::Slash)?;
            let arity = match self.bump() {
                Tok::Int(n) => n,
                t => {
                    self.pos -= 1;
                    return self.error(format!("expected arity, found {}", t.describe()));
                }
            };
            out.insert(PredicateSymbol::new(name, arity));
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                return Ok(out);
            }
        }
    }

    fn module(&mut self) -> Result<ModularProgram> {
        let (l, c) = self.here();
        self.bump();
        let name = self.ident("module name")?;
        match self.peek() {
            Tok::Ident(s) if s == "show" => {
                self.bump();
            }
            t => return self.error(format!("expected `show`, found {}", t.describe())),
        }
        let public = self.predlist()?;
        self.expect(Tok::LBrace)?;
        let level = self.items(false)?;
        self.expect(Tok::RBrace)?;
        let (members, _) = level.finish();
        Ok(ModularProgram { public, members, meta: Meta { label: Some(name), line: l, column: c } })
    }

    fn defblock(&mut self) -> Result<DefModule> {
        let (l, c) = self.here();
        self.bump();
        let intensional = self.predlist()?;
        self.expect(Tok::LBrace)?;
        let mut rules = Vec::new();
        while *self.peek() != Tok::RBrace {
            if *self.peek() == Tok::Eof {
                return self.error("expected `}` before end of input");
            }
            let (rl, rc) = self.here();
            let r = self.rule()?;
            for p in r.head_predicates() {
                if !intensional.contains(&p) {
                    self.warnings.push(Diagnostic::warning(
                        rl,
                        rc,
                        format!("head symbol {p} is not declared intensional in this def block"),
                    ));
                }
            }
            rules.push(r);
        }
        self.bump();
        Ok(DefModule { intensional, rules, meta: Meta::at(l, c) })
    }

    fn term(&mut self) -> Result<Term> {
        match self.bump() {
            Tok::Ident(s) => Ok(Term::Constant(Constant(s))),
            Tok::Var(s) => Ok(Term::Variable(Variable(s))),
            t => {
                self.pos -= 1;
                self.error(format!("expected a term, found {}", t.describe()))
            }
        }
    }

    fn atom(&mut self) -> Result<Atom> {
        let name = self.ident("atom")?;
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.bump();
            loop {
                args.push(self.term()?);
                match self.bump() {
                    Tok::Comma => continue,
                    Tok::RParen => break,
                    t => {
                        self.pos -= 1;
                        return self.error(format!("expected `,` or `)`, found {}", t.describe()));
                    }
                }
            }
        }
        Ok(Atom::new(&name, args))
    }

    fn rule(&mut self) -> Result<Rule> {
        let (l, c) = self.here();
        let mut r = Rule::default();
        match self.peek() {
            Tok::LBrace => {
                self.bump();
                r.head.push(self.atom()?);
                r.choice = true;
                if *self.peek() == Tok::Semi {
                    return self.error("a choice head holds a single atom");
                }
                self.expect(Tok::RBrace)?;
            }
            Tok::If => {}
            Tok::Ident(_) => {
                r.head.push(self.atom()?);
                while *self.peek() == Tok::Semi {
                    self.bump();
                    r.head.push(self.atom()?);
                }
            }
            t => return self.error(format!("expected a rule, found {}", t.describe())),
        }
        if *self.peek() == Tok::If {
            self.bump();
            loop {
                self.literal(&mut r)?;
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::Dot)?;
        if let Some(v) = r.unsafe_variable() {
            return Err(Error::Parse(Diagnostic::error(l, c, format!("unsafe rule: variable {v} does not occur in a positive body atom"))));
        }
        Ok(r)
    }

    fn literal(&mut self, r: &mut Rule) -> Result<()> {
        let is_cmp = matches!(self.peek(), Tok::Var(_)) || matches!(self.peek_at(1), Tok::Eq | Tok::Neq);
        if is_cmp {
            let left = self.term()?;
            let op = match self.bump() {
                Tok::Eq => CmpOp::Eq,
                Tok::Neq => CmpOp::Neq,
                t => {
                    self.pos -= 1;
                    return self.error(format!("expected `=` or `!=`, found {}", t.describe()));
                }
            };
            let right = self.term()?;
            r.cmp.push(Comparison { left, op, right });
            return Ok(());
        }
        let mut nots = 0;
        while matches!(self.peek(), Tok::Ident(s) if s == "not") && matches!(self.peek_at(1), Tok::Ident(_)) {
            self.bump();
            nots += 1;
            if nots > 2 {
                return self.error("at most two `not` may precede an atom");
            }
        }
        let a = self.atom()?;
        match nots {
            0 => r.pos.push(a),
            1 => r.neg.push(a),
            _ => r.dneg.push(a),
        }
        Ok(())
    }
}

/// Parses a program. At top level the public symbols are those of `#show`,
/// or every symbol occurring free in some member when there is none.
/// Returns the program with any warnings.
pub fn parse_program(src: &str) -> Result<(ModularProgram, Vec<Diagnostic>)> {
    let mut p = Parser { toks: lex(src)?, pos: 0, warnings: Vec::new() };
    let level = p.items(true)?;
    let (members, show) = level.finish();
    let mut prog = ModularProgram::new(BTreeSet::new(), members);
    prog.public = match show {
        Some(s) => s,
        None => prog.members.iter().flat_map(|m| m.free_predicates()).collect(),
    };
    Ok((prog, p.warnings))
}

/// Parses a set of ground facts into the instance def-module, labelled `M_E`.
pub fn parse_instance(src: &str) -> Result<DefModule> {
    let mut p = Parser { toks: lex(src)?, pos: 0, warnings: Vec::new() };
    let mut rules = Vec::new();
    while *p.peek() != Tok::Eof {
        let (l, c) = p.here();
        if !matches!(p.peek(), Tok::Ident(_)) || p.is_module_start() || p.is_def_start() {
            return Err(Error::Parse(Diagnostic::error(l, c, "an instance may only contain facts")));
        }
        let a = p.atom()?;
        if *p.peek() != Tok::Dot {
            return Err(Error::Parse(Diagnostic::error(l, c, "an instance may only contain facts")));
        }
        p.bump();
        if !a.is_ground() {
            return Err(Error::Parse(Diagnostic::error(l, c, format!("fact {a} is not ground"))));
        }
        rules.push(Rule::fact(a));
    }
    let int: Vec<PredicateSymbol> = rules.iter().flat_map(|r| r.predicates()).collect();
    let mut d = DefModule::new(int, rules);
    d.meta = Meta::labelled("M_E");
    Ok(d)
}

fn predlist_text(s: &BTreeSet<PredicateSymbol>) -> String {
    s.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")
}

fn print_def(out: &mut String, d: &DefModule, indent: usize) {
    let pad = "  ".repeat(indent);
    let list = predlist_text(&d.intensional);
    if list.is_empty() {
        let _ = writeln!(out, "{pad}def {{");
    } else {
        let _ = writeln!(out, "{pad}def {list} {{");
    }
    for r in &d.rules {
        let _ = writeln!(out, "{pad}  {r}");
    }
    let _ = writeln!(out, "{pad}}}");
}

fn print_members(out: &mut String, members: &[Member], indent: usize, counter: &mut usize) {
    for m in members {
        match m {
            Member::Def(d) => print_def(out, d, indent),
            Member::Program(p) => {
                let pad = "  ".repeat(indent);
                *counter += 1;
                let name = p.name().map(str::to_string).unwrap_or_else(|| format!("m{counter}"));
                let _ = writeln!(out, "{pad}module {name} show {} {{", predlist_text(&p.public));
                print_members(out, &p.members, indent + 1, counter);
                let _ = writeln!(out, "{pad}}}");
            }
        }
    }
}

/// Canonical text: an explicit `#show`, every def-module as a `def` block,
/// predicate lists in canonical order.
pub fn print_program(p: &ModularProgram) -> String {
    let mut out = String::new();
    let list = predlist_text(&p.public);
    if list.is_empty() {
        out.push_str("#show.\n");
    } else {
        let _ = writeln!(out, "#show {list}.");
    }
    print_members(&mut out, &p.members, 0, &mut 0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_rules_form_one_implicit_module() {
        let (p, w) = parse_program("edge(a,b). edge(b,c).").unwrap();
        assert!(w.is_empty());
        assert_eq!(p.members.len(), 1);
        let d = &p.defmods()[0];
        assert_eq!(d.intensional, BTreeSet::from([PredicateSymbol::new("edge", 2)]));
        assert_eq!(p.public, d.intensional);
    }

    #[test]
    fn instance_equals_implicit_module() {
        let src = "edge(a,b). edge(b,c). edge(c,d).";
        let (p, _) = parse_program(src).unwrap();
        assert_eq!(&parse_instance(src).unwrap(), p.defmods()[0]);
    }

    #[test]
    fn nested_module_and_def_block() {
        let src = "#show in/2.\nmodule cn show vertex/1, in/2 {\n def r/2 { r(X,Y) :- in(X,Y). r(X,Y) :- r(X,Z), r(Z,Y). }\n :- not r(X,Y), vertex(X), vertex(Y).\n}\n";
        let (p, _) = parse_program(src).unwrap();
        let Member::Program(cn) = &p.members[0] else { panic!() };
        assert_eq!(cn.name(), Some("cn"));
        assert_eq!(cn.members.len(), 2);
        assert_eq!(cn.hidden(), BTreeSet::from([PredicateSymbol::new("r", 2)]));
    }

    #[test]
    fn error_positions_are_one_based() {
        let err = parse_program("p(a).\nq(X) :- .").unwrap_err();
        match err {
            Error::Parse(d) => assert_eq!((d.line, d.column), (2, 9)),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn unsafe_rule_is_rejected() {
        let err = parse_program("p(X) :- not q(X).").unwrap_err();
        assert!(err.to_string().contains("variable X"), "{err}");
    }

    #[test]
    fn instance_rejects_rules_and_variables() {
        assert!(parse_instance("p(a) :- q(a).").is_err());
        assert!(parse_instance("p(X).").is_err());
        assert!(parse_instance("").unwrap().rules.is_empty());
    }

    #[test]
    fn duplicate_show_is_an_error() {
        assert!(parse_program("#show p/1. #show q/1. p(a).").is_err());
    }

    #[test]
    fn undeclared_head_in_def_warns() {
        let (_, w) = parse_program("def p/1 { q(X) :- p(X). }").unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].line, 1);
    }

    #[test]
    fn literals_and_comments() {
        let (p, _) = parse_program("% comment\n a ; b :- c, not d, not not e, X = Y, f(X), g(Y), X != a.").unwrap();
        let r = &p.defmods()[0].rules[0];
        assert_eq!(r.head.len(), 2);
        assert_eq!((r.pos.len(), r.neg.len(), r.dneg.len(), r.cmp.len()), (3, 1, 1, 2));
    }

    #[test]
    fn print_then_parse_is_identity() {
        let src = "#show in/2.\nmodule sg show vertex/1, edge/2, in/2 {\n def vertex/1 { vertex(X) :- edge(X,Y). }\n def in/2 { {in(X,Y)} :- edge(X,Y). }\n}\nmodule hc show vertex/1, in/2 { def { :- in(X,Y), in(X,Z), Y != Z. } }\n";
        let (p, _) = parse_program(src).unwrap();
        let text = print_program(&p);
        let (q, _) = parse_program(&text).unwrap();
        assert_eq!(p, q);
        assert_eq!(text, print_program(&q));
    }
}
