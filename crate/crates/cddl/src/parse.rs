//! CDDL concrete syntax: lexer, parser and rule resolution.
//!
//! Rules whose right-hand side is a single type become type rules and are
//! kept as [`TypeExpr::Ref`] until [`inline`]. Group rules are spliced into
//! the groups that mention them. Recursion through either kind is rejected.

use std::collections::HashMap;

use thiserror::Error;

use crate::ast::{ArrayGroup, MapGroup, Schema, StrKind, TypeExpr, INT_MAX, INT_MIN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParseErrorKind {
    Syntax,
    UnknownRule,
    RecursiveRule,
    Unsupported,
}

impl ParseErrorKind {
    pub fn code(self) -> &'static str {
        match self {
            ParseErrorKind::Syntax => "SyntaxError",
            ParseErrorKind::UnknownRule => "UnknownRule",
            ParseErrorKind::RecursiveRule => "RecursiveRule",
            ParseErrorKind::Unsupported => "Unsupported",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {}: {message}", kind.code())]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct Pos {
    line: usize,
    col: usize,
}

impl Pos {
    fn err(self, kind: ParseErrorKind, message: impl Into<String>) -> ParseError {
        ParseError { kind, line: self.line, col: self.col, message: message.into() }
    }
}

type Result<T> = std::result::Result<T, ParseError>;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Int(i128),
    Text(String),
    /// `#6.n`
    Tag(u64),
    /// `#7.n`
    Simple(u8),
    /// lone `#`
    Hash,
    /// `.name`
    Control(String),
    Punct(&'static str),
    Eof,
}

struct Lexer<'a> {
    src: &'a [u8],
    i: usize,
    line: usize,
    col: usize,
}

const PUNCTS: &[&str] = &[
    "...", "//=", "//", "/=", "=>", "..", "=", "/", ",", "?", "*", "+", "(", ")", "[", "]", "{", "}", ":", "^", "<",
    ">", "~", "&",
];

fn name_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_' || b == b'@' || b == b'$'
}

fn name_char(b: u8) -> bool {
    name_start(b) || b.is_ascii_digit()
}

impl<'a> Lexer<'a> {
    fn peek(&self, k: usize) -> Option<u8> {
        self.src.get(self.i + k).copied()
    }

    fn bump(&mut self) -> u8 {
        let b = self.src[self.i];
        self.i += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        b
    }

    fn pos(&self) -> Pos {
        Pos { line: self.line, col: self.col }
    }

    fn skip_trivia(&mut self) {
        while let Some(b) = self.peek(0) {
            if b.is_ascii_whitespace() {
                self.bump();
            } else if b == b';' {
                while self.peek(0).is_some_and(|b| b != b'\n') {
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn uint(&mut self, pos: Pos) -> Result<u128> {
        let hex = self.peek(0) == Some(b'0') && matches!(self.peek(1), Some(b'x' | b'X'));
        let (radix, start) = if hex {
            self.bump();
            self.bump();
            (16, self.i)
        } else {
            (10, self.i)
        };
        while self.peek(0).is_some_and(|b| b.is_ascii_hexdigit() && (radix == 16 || b.is_ascii_digit())) {
            self.bump();
        }
        let digits = std::str::from_utf8(&self.src[start..self.i]).expect("ascii");
        if self.peek(0) == Some(b'.') && self.peek(1).is_some_and(|b| b.is_ascii_digit()) {
            return Err(pos.err(ParseErrorKind::Unsupported, "floating-point literals"));
        }
        if matches!(self.peek(0), Some(b'e' | b'E')) && radix == 10 {
            return Err(pos.err(ParseErrorKind::Unsupported, "floating-point literals"));
        }
        u128::from_str_radix(digits, radix).map_err(|_| pos.err(ParseErrorKind::Syntax, "bad integer literal"))
    }

    fn text(&mut self, pos: Pos) -> Result<String> {
        self.bump();
        let mut out = Vec::new();
        loop {
            match self.peek(0) {
                None => return Err(pos.err(ParseErrorKind::Syntax, "unterminated text literal")),
                Some(b'"') => {
                    self.bump();
                    break;
                }
                Some(b'\\') => {
                    self.bump();
                    let c = self.peek(0).ok_or_else(|| pos.err(ParseErrorKind::Syntax, "bad escape"))?;
                    self.bump();
                    match c {
                        b'"' | b'\\' | b'/' => out.push(c),
                        b'n' => out.push(b'\n'),
                        b't' => out.push(b'\t'),
                        b'r' => out.push(b'\r'),
                        b'b' => out.push(8),
                        b'f' => out.push(12),
                        b'u' => {
                            let hex: Vec<u8> = (0..4).filter_map(|_| self.peek(0).map(|_| self.bump())).collect();
                            let code = std::str::from_utf8(&hex)
                                .ok()
                                .and_then(|h| u32::from_str_radix(h, 16).ok())
                                .and_then(char::from_u32)
                                .ok_or_else(|| pos.err(ParseErrorKind::Syntax, "bad \\u escape"))?;
                            let mut buf = [0u8; 4];
                            out.extend_from_slice(code.encode_utf8(&mut buf).as_bytes());
                        }
                        _ => return Err(pos.err(ParseErrorKind::Syntax, "bad escape")),
                    }
                }
                Some(_) => out.push(self.bump()),
            }
        }
        String::from_utf8(out).map_err(|_| pos.err(ParseErrorKind::Syntax, "text literal is not UTF-8"))
    }

    fn next(&mut self) -> Result<(Tok, Pos)> {
        self.skip_trivia();
        let pos = self.pos();
        let Some(b) = self.peek(0) else { return Ok((Tok::Eof, pos)) };
        let tok =
            match b {
                b'"' => Tok::Text(self.text(pos)?),
                b'\'' => return Err(pos.err(ParseErrorKind::Unsupported, "byte string literals")),
                b'h' | b'b' if self.peek(1) == Some(b'\'') => {
                    return Err(pos.err(ParseErrorKind::Unsupported, "byte string literals"))
                }
                b'0'..=b'9' => Tok::Int(self.uint(pos)? as i128),
                b'-' if self.peek(1).is_some_and(|b| b.is_ascii_digit()) => {
                    self.bump();
                    Tok::Int(-(self.uint(pos)? as i128))
                }
                b'#' => {
                    self.bump();
                    let major = self.peek(0).filter(|b| b.is_ascii_digit());
                    match major {
                        None => Tok::Hash,
                        Some(m) => {
                            self.bump();
                            if self.peek(0) != Some(b'.') || !self.peek(1).is_some_and(|b| b.is_ascii_digit()) {
                                return Err(pos.err(ParseErrorKind::Unsupported, "type with unspecified tag or value"));
                            }
                            self.bump();
                            let v = self.uint(pos)?;
                            match m {
                                b'6' => Tok::Tag(
                                    u64::try_from(v).map_err(|_| pos.err(ParseErrorKind::Syntax, "tag too large"))?,
                                ),
                                b'7' => Tok::Simple(
                                    u8::try_from(v)
                                        .ok()
                                        .filter(|v| !(24..32).contains(v))
                                        .ok_or_else(|| pos.err(ParseErrorKind::Syntax, "bad simple value"))?,
                                ),
                                _ => {
                                    return Err(pos
                                        .err(ParseErrorKind::Unsupported, "major-type literals other than #6 and #7"))
                                }
                            }
                        }
                    }
                }
                b'.' if self.peek(1).is_some_and(|b| b.is_ascii_alphabetic()) => {
                    self.bump();
                    let start = self.i;
                    while self.peek(0).is_some_and(name_char) {
                        self.bump();
                    }
                    Tok::Control(String::from_utf8_lossy(&self.src[start..self.i]).into_owned())
                }
                b if name_start(b) => {
                    let start = self.i;
                    self.bump();
                    loop {
                        match self.peek(0) {
                            Some(c) if name_char(c) => {
                                self.bump();
                            }
                            Some(b'-' | b'.') if self.peek(1).is_some_and(name_char) => {
                                self.bump();
                            }
                            _ => break,
                        }
                    }
                    Tok::Name(String::from_utf8_lossy(&self.src[start..self.i]).into_owned())
                }
                _ => {
                    let rest = &self.src[self.i..];
                    let p = PUNCTS.iter().find(|p| rest.starts_with(p.as_bytes())).ok_or_else(|| {
                        pos.err(ParseErrorKind::Syntax, format!("unexpected character {:?}", b as char))
                    })?;
                    for _ in 0..p.len() {
                        self.bump();
                    }
                    Tok::Punct(p)
                }
            };
        Ok((tok, pos))
    }
}

// Surface syntax.

#[derive(Debug, Clone)]
enum SType1 {
    Name(String, Pos),
    Int(i128),
    Text(String),
    Simple(u8),
    Any,
    Range(i128, i128),
    Sized(StrKind, u64, u64),
    Array(SGroup),
    Map(SGroup),
    Paren(SType),
    Tag(u64, SType),
}

type SType = Vec<SType1>;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Occ {
    One,
    Opt,
    Star,
}

#[derive(Debug, Clone)]
enum EntryKind {
    Type(SType),
    Member { key: Key, cut: bool, value: SType },
    Group(SGroup),
}

#[derive(Debug, Clone)]
enum Key {
    Bare(String),
    Type(SType),
}

#[derive(Debug, Clone)]
struct SEntry {
    occ: Occ,
    pos: Pos,
    kind: EntryKind,
}

#[derive(Debug, Clone)]
struct SGroup(Vec<Vec<SEntry>>);

struct RuleDef {
    name: String,
    pos: Pos,
    body: SGroup,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn is(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn eat(&mut self, p: &str) -> bool {
        if self.is(p) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &str) -> Result<()> {
        if self.eat(p) {
            Ok(())
        } else {
            Err(self.pos().err(ParseErrorKind::Syntax, format!("expected `{p}`, found {}", describe(self.peek()))))
        }
    }

    fn rules(&mut self) -> Result<Vec<RuleDef>> {
        let mut out = Vec::new();
        while *self.peek() != Tok::Eof {
            let pos = self.pos();
            let name = match self.advance() {
                Tok::Name(n) => n,
                t => return Err(pos.err(ParseErrorKind::Syntax, format!("expected rule name, found {}", describe(&t)))),
            };
            if name.starts_with('$') {
                return Err(pos.err(ParseErrorKind::Unsupported, "sockets and plugs"));
            }
            if self.is("<") {
                return Err(self.pos().err(ParseErrorKind::Unsupported, "generic rules"));
            }
            if self.is("/=") || self.is("//=") {
                return Err(self.pos().err(ParseErrorKind::Unsupported, "choice extension by assignment"));
            }
            self.expect("=")?;
            let body = self.group()?;
            if !self.at_rule_start() && *self.peek() != Tok::Eof {
                return Err(self.pos().err(ParseErrorKind::Syntax, format!("unexpected {}", describe(self.peek()))));
            }
            out.push(RuleDef { name, pos, body });
        }
        Ok(out)
    }

    fn at_rule_start(&self) -> bool {
        matches!(self.peek(), Tok::Name(_)) && matches!(self.peek_at(1), Tok::Punct("=" | "/=" | "//=" | "<"))
    }

    fn group(&mut self) -> Result<SGroup> {
        let mut alts = vec![self.seq()?];
        while self.eat("//") {
            alts.push(self.seq()?);
        }
        Ok(SGroup(alts))
    }

    fn entry_start(&self) -> bool {
        if self.at_rule_start() {
            return false;
        }
        match self.peek() {
            Tok::Name(_) | Tok::Int(_) | Tok::Text(_) | Tok::Tag(_) | Tok::Simple(_) | Tok::Hash => true,
            Tok::Punct(p) => matches!(*p, "?" | "*" | "+" | "(" | "[" | "{" | "~" | "&"),
            _ => false,
        }
    }

    fn seq(&mut self) -> Result<Vec<SEntry>> {
        let mut out = Vec::new();
        while self.entry_start() {
            out.push(self.entry()?);
            self.eat(",");
        }
        Ok(out)
    }

    fn entry(&mut self) -> Result<SEntry> {
        let pos = self.pos();
        let occ = if self.eat("?") {
            Occ::Opt
        } else if self.eat("*") {
            if matches!(self.peek(), Tok::Int(_)) && !matches!(self.peek_at(1), Tok::Punct("=>" | ":" | "^")) {
                return Err(pos.err(ParseErrorKind::Unsupported, "bounded occurrence n*m"));
            }
            Occ::Star
        } else if self.is("+") {
            return Err(pos.err(ParseErrorKind::Unsupported, "one-or-more occurrence `+`"));
        } else if matches!(self.peek(), Tok::Int(_)) && matches!(self.peek_at(1), Tok::Punct("*")) {
            return Err(pos.err(ParseErrorKind::Unsupported, "bounded occurrence n*m"));
        } else {
            Occ::One
        };
        if self.is("~") || self.is("&") {
            return Err(self.pos().err(ParseErrorKind::Unsupported, "unwrap and enumeration operators"));
        }
        if let (Tok::Name(n), Tok::Punct(":")) = (self.peek().clone(), self.peek_at(1).clone()) {
            self.advance();
            self.advance();
            let value = self.ty()?;
            return Ok(SEntry { occ, pos, kind: EntryKind::Member { key: Key::Bare(n), cut: true, value } });
        }
        let key = if self.is("(") {
            let ppos = self.pos();
            self.advance();
            let g = self.group()?;
            self.expect(")")?;
            if !self.is("=>") && !self.is(":") && !self.is("^") {
                // parenthesized type followed by a choice is still a type
                if self.is("/") || matches!(self.peek(), Tok::Control(_)) || self.is("..") || self.is("...") {
                    let t = group_as_type(&g)
                        .ok_or_else(|| ppos.err(ParseErrorKind::Syntax, "group used where a type is expected"))?;
                    let mut first = vec![SType1::Paren(t.clone())];
                    while self.eat("/") {
                        first.push(self.ty1()?);
                    }
                    return self.member_or_type(occ, pos, first);
                }
                return Ok(SEntry { occ, pos, kind: EntryKind::Group(g) });
            }
            let t = group_as_type(&g).ok_or_else(|| ppos.err(ParseErrorKind::Syntax, "group used as a map key"))?;
            vec![SType1::Paren(t.clone())]
        } else {
            self.ty()?
        };
        self.member_or_type(occ, pos, key)
    }

    fn member_or_type(&mut self, occ: Occ, pos: Pos, t: SType) -> Result<SEntry> {
        let cut = if self.eat("=>") {
            false
        } else if self.eat("^") {
            self.expect("=>")?;
            true
        } else if self.eat(":") {
            true
        } else {
            return Ok(SEntry { occ, pos, kind: EntryKind::Type(t) });
        };
        let value = self.ty()?;
        Ok(SEntry { occ, pos, kind: EntryKind::Member { key: Key::Type(t), cut, value } })
    }

    fn ty(&mut self) -> Result<SType> {
        let mut alts = vec![self.ty1()?];
        while self.eat("/") {
            alts.push(self.ty1()?);
        }
        Ok(alts)
    }

    fn ty1(&mut self) -> Result<SType1> {
        let pos = self.pos();
        let t = self.ty2()?;
        if self.is("..") || self.is("...") {
            let exclusive = self.advance() == Tok::Punct("...");
            let hpos = self.pos();
            let hi = self.ty2()?;
            let (SType1::Int(lo), SType1::Int(hi)) = (&t, hi) else {
                return Err(hpos.err(ParseErrorKind::Unsupported, "ranges with non-literal bounds"));
            };
            let hi = if exclusive { hi - 1 } else { hi };
            return Ok(SType1::Range(*lo, hi));
        }
        if let Tok::Control(op) = self.peek().clone() {
            if op != "size" {
                return Err(self.pos().err(ParseErrorKind::Unsupported, format!("control operator .{op}")));
            }
            self.advance();
            let kind = match &t {
                SType1::Name(n, _) if n == "tstr" || n == "text" => StrKind::Text,
                SType1::Name(n, _) if n == "bstr" || n == "bytes" => StrKind::Bytes,
                _ => return Err(pos.err(ParseErrorKind::Unsupported, ".size on a non-string type")),
            };
            let spos = self.pos();
            let (lo, hi) = match self.ty2()? {
                SType1::Int(n) => (n, n),
                SType1::Paren(p) if p.len() == 1 => match p[0] {
                    SType1::Int(n) => (n, n),
                    SType1::Range(lo, hi) => (lo, hi),
                    _ => return Err(spos.err(ParseErrorKind::Unsupported, ".size with a non-literal bound")),
                },
                _ => return Err(spos.err(ParseErrorKind::Unsupported, ".size with a non-literal bound")),
            };
            let lo = u64::try_from(lo.max(0)).map_err(|_| spos.err(ParseErrorKind::Syntax, "size out of range"))?;
            let hi = u64::try_from(hi).map_err(|_| spos.err(ParseErrorKind::Syntax, "size out of range"))?;
            return Ok(SType1::Sized(kind, lo, hi));
        }
        Ok(t)
    }

    fn ty2(&mut self) -> Result<SType1> {
        let pos = self.pos();
        match self.advance() {
            Tok::Int(n) => {
                if !(INT_MIN..=INT_MAX).contains(&n) {
                    return Err(pos.err(ParseErrorKind::Syntax, "integer literal out of range"));
                }
                Ok(SType1::Int(n))
            }
            Tok::Text(s) => Ok(SType1::Text(s)),
            Tok::Simple(v) => Ok(SType1::Simple(v)),
            Tok::Hash => Ok(SType1::Any),
            Tok::Name(n) => {
                if n.starts_with('$') {
                    return Err(pos.err(ParseErrorKind::Unsupported, "sockets and plugs"));
                }
                if self.is("<") {
                    return Err(self.pos().err(ParseErrorKind::Unsupported, "generic arguments"));
                }
                Ok(SType1::Name(n, pos))
            }
            Tok::Tag(tag) => {
                self.expect("(")?;
                let t = self.ty()?;
                self.expect(")")?;
                Ok(SType1::Tag(tag, t))
            }
            Tok::Punct("(") => {
                let t = self.ty()?;
                self.expect(")")?;
                Ok(SType1::Paren(t))
            }
            Tok::Punct("[") => {
                let g = self.group()?;
                self.expect("]")?;
                Ok(SType1::Array(g))
            }
            Tok::Punct("{") => {
                let g = self.group()?;
                self.expect("}")?;
                Ok(SType1::Map(g))
            }
            Tok::Punct(p @ ("~" | "&")) => Err(pos.err(ParseErrorKind::Unsupported, format!("operator `{p}`"))),
            t => Err(pos.err(ParseErrorKind::Syntax, format!("expected a type, found {}", describe(&t)))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Name(n) => format!("name `{n}`"),
        Tok::Int(n) => format!("integer {n}"),
        Tok::Text(s) => format!("text {s:?}"),
        Tok::Tag(n) => format!("tag #6.{n}"),
        Tok::Simple(n) => format!("simple #7.{n}"),
        Tok::Hash => "`#`".into(),
        Tok::Control(c) => format!("control .{c}"),
        Tok::Punct(p) => format!("`{p}`"),
        Tok::Eof => "end of input".into(),
    }
}

/// The type a group denotes when it is just one plain type entry.
fn group_as_type(g: &SGroup) -> Option<&SType> {
    match g.0.as_slice() {
        [seq] => match seq.as_slice() {
            [SEntry { occ: Occ::One, kind: EntryKind::Type(t), .. }] => Some(t),
            [SEntry { occ: Occ::One, kind: EntryKind::Group(g), .. }] => group_as_type(g),
            _ => None,
        },
        _ => None,
    }
}

fn prelude(name: &str) -> Option<TypeExpr> {
    Some(match name {
        "any" => TypeExpr::Any,
        "int" => TypeExpr::Int,
        "uint" => TypeExpr::UInt,
        "nint" => TypeExpr::NInt,
        "tstr" | "text" => TypeExpr::Tstr,
        "bstr" | "bytes" => TypeExpr::Bstr,
        "bool" => TypeExpr::bool(),
        "false" => TypeExpr::LitSimple(20),
        "true" => TypeExpr::LitSimple(21),
        "nil" | "null" => TypeExpr::LitSimple(22),
        "undefined" => TypeExpr::LitSimple(23),
        "never" => TypeExpr::Never,
        _ => return None,
    })
}

fn unsupported_prelude(name: &str) -> bool {
    matches!(
        name,
        "float"
            | "float16"
            | "float32"
            | "float64"
            | "float16-32"
            | "float32-64"
            | "number"
            | "biguint"
            | "bignint"
            | "bigint"
            | "integer"
            | "unsigned"
            | "tdate"
            | "time"
            | "uri"
            | "b64url"
            | "regexp"
            | "mime-message"
            | "cbor-any"
            | "encoded-cbor"
            | "eb64url"
            | "eb64legacy"
            | "eb16"
            | "decfrac"
            | "bigfloat"
    )
}

struct Resolver<'a> {
    rules: HashMap<&'a str, &'a RuleDef>,
    splicing: Vec<String>,
}

impl<'a> Resolver<'a> {
    fn is_group_rule(&self, name: &str, seen: &mut Vec<String>) -> Result<bool> {
        let Some(rule) = self.rules.get(name) else { return Ok(false) };
        if seen.iter().any(|s| s == name) {
            return Err(rule.pos.err(ParseErrorKind::RecursiveRule, format!("rule `{name}` refers to itself")));
        }
        seen.push(name.to_owned());
        let r = match group_as_type(&rule.body) {
            None => true,
            Some(t) => match t.as_slice() {
                [SType1::Name(n, _)] if prelude(n).is_none() => self.is_group_rule(n, seen)?,
                _ => false,
            },
        };
        seen.pop();
        Ok(r)
    }

    fn group_rule(&self, name: &str) -> Result<bool> {
        self.is_group_rule(name, &mut Vec::new())
    }

    /// A group rule named by an entry that is just that name.
    fn spliced(&self, e: &SEntry) -> Result<Option<&'a RuleDef>> {
        if let EntryKind::Type(t) = &e.kind {
            if let [SType1::Name(n, _)] = t.as_slice() {
                if prelude(n).is_none() && self.group_rule(n)? {
                    return Ok(Some(self.rules[n.as_str()]));
                }
            }
        }
        Ok(None)
    }

    fn enter(&mut self, rule: &RuleDef, at: Pos) -> Result<()> {
        if self.splicing.contains(&rule.name) {
            return Err(at.err(ParseErrorKind::RecursiveRule, format!("group `{}` includes itself", rule.name)));
        }
        self.splicing.push(rule.name.clone());
        Ok(())
    }

    fn ty(&mut self, t: &SType) -> Result<TypeExpr> {
        let mut parts = t.iter().rev();
        let last = self.ty1(parts.next().expect("non-empty choice"))?;
        parts.try_fold(last, |acc, t| Ok(TypeExpr::choice(self.ty1(t)?, acc)))
    }

    fn ty1(&mut self, t: &SType1) -> Result<TypeExpr> {
        Ok(match t {
            SType1::Name(n, pos) => {
                if let Some(t) = prelude(n) {
                    t
                } else if !self.rules.contains_key(n.as_str()) {
                    if unsupported_prelude(n) {
                        return Err(pos.err(ParseErrorKind::Unsupported, format!("prelude type `{n}`")));
                    }
                    return Err(pos.err(ParseErrorKind::UnknownRule, format!("no rule named `{n}`")));
                } else if self.group_rule(n)? {
                    return Err(pos.err(ParseErrorKind::Syntax, format!("group `{n}` used as a type")));
                } else {
                    TypeExpr::Ref(n.clone())
                }
            }
            SType1::Int(n) => TypeExpr::LitInt(*n),
            SType1::Text(s) => TypeExpr::LitText(s.clone()),
            SType1::Simple(v) => TypeExpr::LitSimple(*v),
            SType1::Any => TypeExpr::Any,
            SType1::Range(lo, hi) => TypeExpr::Range(*lo, *hi),
            SType1::Sized(kind, lo, hi) => TypeExpr::Sized { kind: *kind, lo: *lo, hi: *hi },
            SType1::Array(g) => TypeExpr::array(self.array(g)?),
            SType1::Map(g) => TypeExpr::map(self.map(g)?),
            SType1::Paren(t) => self.ty(t)?,
            SType1::Tag(tag, t) => TypeExpr::Tagged(*tag, Box::new(self.ty(t)?)),
        })
    }

    fn array(&mut self, g: &SGroup) -> Result<ArrayGroup> {
        let mut alts = g.0.iter().rev();
        let last = self.array_seq(alts.next().expect("non-empty group"))?;
        alts.try_fold(last, |acc, s| Ok(ArrayGroup::alt(self.array_seq(s)?, acc)))
    }

    fn array_seq(&mut self, seq: &[SEntry]) -> Result<ArrayGroup> {
        let Some((last, init)) = seq.split_last() else { return Ok(ArrayGroup::Empty) };
        let last = self.array_entry(last)?;
        init.iter().rev().try_fold(last, |acc, e| Ok(ArrayGroup::concat(self.array_entry(e)?, acc)))
    }

    fn array_entry(&mut self, e: &SEntry) -> Result<ArrayGroup> {
        let body = if let Some(rule) = self.spliced(e)? {
            self.enter(rule, e.pos)?;
            let g = self.array(&rule.body);
            self.splicing.pop();
            g?
        } else {
            match &e.kind {
                EntryKind::Type(t) => ArrayGroup::Elem(self.ty(t)?),
                EntryKind::Member { key: Key::Bare(_), value, .. } => ArrayGroup::Elem(self.ty(value)?),
                EntryKind::Member { key: Key::Type(_), .. } => {
                    return Err(e.pos.err(ParseErrorKind::Unsupported, "key/value members inside arrays"))
                }
                EntryKind::Group(g) => self.array(g)?,
            }
        };
        Ok(match e.occ {
            Occ::One => body,
            Occ::Opt => ArrayGroup::opt(body),
            Occ::Star => ArrayGroup::star(body),
        })
    }

    fn map(&mut self, g: &SGroup) -> Result<MapGroup> {
        let mut alts = g.0.iter().rev();
        let last = self.map_seq(alts.next().expect("non-empty group"))?;
        alts.try_fold(last, |acc, s| Ok(MapGroup::alt(self.map_seq(s)?, acc)))
    }

    fn map_seq(&mut self, seq: &[SEntry]) -> Result<MapGroup> {
        let Some((last, init)) = seq.split_last() else { return Ok(MapGroup::Empty) };
        let last = self.map_entry(last)?;
        init.iter().rev().try_fold(last, |acc, e| Ok(MapGroup::concat(self.map_entry(e)?, acc)))
    }

    fn map_entry(&mut self, e: &SEntry) -> Result<MapGroup> {
        let body = if let Some(rule) = self.spliced(e)? {
            self.enter(rule, e.pos)?;
            let g = self.map(&rule.body);
            self.splicing.pop();
            g?
        } else {
            match &e.kind {
                EntryKind::Type(_) => {
                    return Err(e.pos.err(ParseErrorKind::Syntax, "map group entry without a key"));
                }
                EntryKind::Member { key, cut, value } => {
                    let key = match key {
                        Key::Bare(n) => TypeExpr::LitText(n.clone()),
                        Key::Type(t) => self.ty(t)?,
                    };
                    MapGroup::entry(key, self.ty(value)?, *cut)
                }
                EntryKind::Group(g) => self.map(g)?,
            }
        };
        Ok(match e.occ {
            Occ::One => body,
            Occ::Opt => MapGroup::opt(body),
            Occ::Star => MapGroup::star(body),
        })
    }
}

fn refs(t: &TypeExpr, out: &mut Vec<String>) {
    match t {
        TypeExpr::Ref(n) => out.push(n.clone()),
        TypeExpr::Array(g) => array_refs(g, out),
        TypeExpr::Map(g) => map_refs(g, out),
        TypeExpr::Choice(a, b) => {
            refs(a, out);
            refs(b, out);
        }
        TypeExpr::Tagged(_, t) => refs(t, out),
        _ => {}
    }
}

fn array_refs(g: &ArrayGroup, out: &mut Vec<String>) {
    match g {
        ArrayGroup::Empty => {}
        ArrayGroup::Elem(t) => refs(t, out),
        ArrayGroup::Alt(a, b) | ArrayGroup::Concat(a, b) => {
            array_refs(a, out);
            array_refs(b, out);
        }
        ArrayGroup::Opt(a) | ArrayGroup::Star(a) => array_refs(a, out),
    }
}

fn map_refs(g: &MapGroup, out: &mut Vec<String>) {
    match g {
        MapGroup::Empty => {}
        MapGroup::Entry { key, value, .. } | MapGroup::Table { key, value, .. } => {
            refs(key, out);
            refs(value, out);
        }
        MapGroup::Alt(a, b) | MapGroup::Concat(a, b) => {
            map_refs(a, out);
            map_refs(b, out);
        }
        MapGroup::Opt(a) | MapGroup::Star(a) => map_refs(a, out),
    }
}

/// Parses CDDL text. The first rule is the root and must be a type.
pub fn parse_cddl(text: &str) -> std::result::Result<Schema, ParseError> {
    let mut lexer = Lexer { src: text.as_bytes(), i: 0, line: 1, col: 1 };
    let mut toks = Vec::new();
    loop {
        let (t, pos) = lexer.next()?;
        let eof = t == Tok::Eof;
        toks.push((t, pos));
        if eof {
            break;
        }
    }
    let defs = Parser { toks, i: 0 }.rules()?;
    if defs.is_empty() {
        return Err(Pos { line: 1, col: 1 }.err(ParseErrorKind::Syntax, "no rules"));
    }
    let mut by_name: HashMap<&str, &RuleDef> = HashMap::new();
    for d in &defs {
        if by_name.insert(&d.name, d).is_some() {
            return Err(d.pos.err(ParseErrorKind::Syntax, format!("rule `{}` defined twice", d.name)));
        }
        if prelude(&d.name).is_some() {
            return Err(d.pos.err(ParseErrorKind::Syntax, format!("rule `{}` redefines a prelude type", d.name)));
        }
    }
    let mut r = Resolver { rules: by_name, splicing: Vec::new() };
    let mut rules = Vec::new();
    for d in &defs {
        if r.group_rule(&d.name)? {
            continue;
        }
        let t = group_as_type(&d.body).expect("type rule");
        rules.push((d.name.clone(), r.ty(t)?));
    }
    let root = defs[0].name.clone();
    if r.group_rule(&root)? {
        return Err(defs[0].pos.err(ParseErrorKind::Syntax, "the first rule must be a type"));
    }
    // reject cycles among type rules
    let index: HashMap<&str, usize> = rules.iter().enumerate().map(|(i, (n, _))| (n.as_str(), i)).collect();
    let edges: Vec<Vec<usize>> = rules
        .iter()
        .map(|(_, t)| {
            let mut out = Vec::new();
            refs(t, &mut out);
            out.iter().map(|n| index[n.as_str()]).collect()
        })
        .collect();
    let mut state = vec![0u8; rules.len()];
    for start in 0..rules.len() {
        if state[start] != 0 {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        state[start] = 1;
        while let Some((node, next)) = stack.pop() {
            if let Some(&succ) = edges[node].get(next) {
                stack.push((node, next + 1));
                match state[succ] {
                    0 => {
                        state[succ] = 1;
                        stack.push((succ, 0));
                    }
                    1 => {
                        let name = &rules[succ].0;
                        return Err(r.rules[name.as_str()]
                            .pos
                            .err(ParseErrorKind::RecursiveRule, format!("rule `{name}` refers to itself")));
                    }
                    _ => {}
                }
            } else {
                state[node] = 2;
            }
        }
    }
    Ok(Schema { rules, root })
}

/// The root type with every rule reference substituted.
pub fn inline(schema: &Schema) -> TypeExpr {
    fn go(t: &TypeExpr, s: &Schema) -> TypeExpr {
        match t {
            TypeExpr::Ref(n) => go(s.rule(n).expect("resolved reference"), s),
            TypeExpr::Array(g) => TypeExpr::array(go_array(g, s)),
            TypeExpr::Map(g) => TypeExpr::map(go_map(g, s)),
            TypeExpr::Choice(a, b) => TypeExpr::choice(go(a, s), go(b, s)),
            TypeExpr::Tagged(tag, t) => TypeExpr::Tagged(*tag, Box::new(go(t, s))),
            t => t.clone(),
        }
    }
    fn go_array(g: &ArrayGroup, s: &Schema) -> ArrayGroup {
        match g {
            ArrayGroup::Empty => ArrayGroup::Empty,
            ArrayGroup::Elem(t) => ArrayGroup::Elem(go(t, s)),
            ArrayGroup::Alt(a, b) => ArrayGroup::alt(go_array(a, s), go_array(b, s)),
            ArrayGroup::Concat(a, b) => ArrayGroup::concat(go_array(a, s), go_array(b, s)),
            ArrayGroup::Opt(a) => ArrayGroup::opt(go_array(a, s)),
            ArrayGroup::Star(a) => ArrayGroup::star(go_array(a, s)),
        }
    }
    fn go_map(g: &MapGroup, s: &Schema) -> MapGroup {
        match g {
            MapGroup::Empty => MapGroup::Empty,
            MapGroup::Entry { key, value, cut } => MapGroup::entry(go(key, s), go(value, s), *cut),
            MapGroup::Table { key, excluded, value } => {
                MapGroup::Table { key: go(key, s), excluded: excluded.clone(), value: go(value, s) }
            }
            MapGroup::Alt(a, b) => MapGroup::alt(go_map(a, s), go_map(b, s)),
            MapGroup::Concat(a, b) => MapGroup::concat(go_map(a, s), go_map(b, s)),
            MapGroup::Opt(a) => MapGroup::opt(go_map(a, s)),
            MapGroup::Star(a) => MapGroup::star(go_map(a, s)),
        }
    }
    go(schema.rule(&schema.root).expect("root rule"), schema)
}
