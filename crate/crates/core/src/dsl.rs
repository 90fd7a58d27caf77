//! Text format for user-defined schemes (`.scheme` files).
//!
//! ```text
//! # forward Euler in time, central in space
//! params D;
//!
//! template fe_t for ut {
//!   (1, 0): dt^-1;
//!   (0, 0): -dt^-1;
//! }
//!
//! scheme {
//!   fe_t - D * central_xx = 0
//! }
//! ```
//!
//! Coefficients are exact: integer literals, the symbols `D`, `tau`, `dt`,
//! `dx`, the operators `+ - * /`, integer powers `^n` / `^(-n)`, and
//! parentheses. Division is only allowed by a single monomial. A scheme term
//! may name one template, either declared in the file or built in.
//! Whitespace is insignificant and `#` starts a line comment.

use std::fmt::{self, Write as _};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::laurent::{LaurentPoly, SymbolId};
use crate::stencil::{
    builtin_template, DerivativeKind, DerivativeTemplate, GridOffset, SchemeSpec, SchemeTerm,
    Stencil, StencilError, BUILTIN_TEMPLATES,
};

const KEYWORDS: [&str; 4] = ["template", "for", "scheme", "params"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagnosticKind {
    #[error("syntax error: found {found}, expected {}", .expected.join(" or "))]
    SyntaxError {
        found: String,
        expected: Vec<&'static str>,
    },
    #[error("unknown symbol `{0}` (expected one of D, tau, dt, dx)")]
    UnknownSymbol(String),
    #[error("`{0}` is not declared in `params`")]
    UndeclaredParameter(String),
    #[error("only D and tau may be declared as params, found `{0}`")]
    InvalidParameter(String),
    #[error("exponents must be integers")]
    NonIntegerExponent,
    #[error("decimal literals are not allowed; write an exact fraction instead")]
    FloatLiteral,
    #[error("cannot divide by `{0}`: only nonzero monomials are invertible")]
    NonInvertibleDivision(String),
    #[error("unresolved template `{0}`")]
    UnresolvedTemplate(String),
    #[error("duplicate definition of `{0}`")]
    Duplicate(String),
    #[error("offset {0} listed twice")]
    DuplicateOffset(GridOffset),
    #[error("exponent out of range")]
    ExponentOverflow,
    #[error("input is not valid UTF-8")]
    InvalidUtf8,
    #[error(transparent)]
    Stencil(#[from] StencilError),
}

/// A parse failure with its 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {kind}")]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub kind: DiagnosticKind,
}

/// Parsed contents of a `.scheme` file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemeFile {
    params: Option<Vec<SymbolId>>,
    templates: Vec<DerivativeTemplate>,
    scheme: SchemeSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemeFileError {
    #[error("duplicate template `{0}`")]
    DuplicateTemplate(String),
    #[error("scheme references `{0}`, which is neither declared nor built in")]
    UnresolvedTemplate(String),
    #[error("invalid params declaration")]
    InvalidParams,
}

impl SchemeFile {
    pub fn new(
        params: Option<Vec<SymbolId>>,
        templates: Vec<DerivativeTemplate>,
        scheme: SchemeSpec,
    ) -> Result<SchemeFile, SchemeFileError> {
        if let Some(ps) = &params {
            let ok = ps
                .iter()
                .all(|s| matches!(s, SymbolId::Diffusivity | SymbolId::RelaxTime));
            let unique = ps.iter().collect::<std::collections::BTreeSet<_>>().len() == ps.len();
            if !ok || !unique || ps.is_empty() {
                return Err(SchemeFileError::InvalidParams);
            }
        }
        for (i, t) in templates.iter().enumerate() {
            if BUILTIN_TEMPLATES.contains(&t.name())
                || templates[..i].iter().any(|u| u.name() == t.name())
                || !is_identifier(t.name())
            {
                return Err(SchemeFileError::DuplicateTemplate(t.name().to_string()));
            }
        }
        for term in scheme.terms() {
            let name = term.template.name();
            let resolved = match templates.iter().find(|t| t.name() == name) {
                Some(t) => Some(t.clone()),
                None => builtin_template(name).ok(),
            };
            if resolved.as_ref() != Some(&term.template) {
                return Err(SchemeFileError::UnresolvedTemplate(name.to_string()));
            }
        }
        Ok(SchemeFile {
            params,
            templates,
            scheme,
        })
    }

    /// Wraps a scheme, declaring any non-built-in templates it uses locally.
    pub fn from_scheme(scheme: SchemeSpec) -> Result<SchemeFile, SchemeFileError> {
        let mut templates: Vec<DerivativeTemplate> = Vec::new();
        for term in scheme.terms() {
            let t = &term.template;
            if builtin_template(t.name()).ok().as_ref() != Some(t)
                && !templates.iter().any(|u| u.name() == t.name())
            {
                templates.push(t.clone());
            }
        }
        SchemeFile::new(None, templates, scheme)
    }

    pub fn params(&self) -> Option<&[SymbolId]> {
        self.params.as_deref()
    }

    pub fn templates(&self) -> &[DerivativeTemplate] {
        &self.templates
    }

    pub fn scheme(&self) -> &SchemeSpec {
        &self.scheme
    }

    pub fn into_scheme(self) -> SchemeSpec {
        self.scheme
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !KEYWORDS.contains(&s)
        && SymbolId::from_name(s).is_none()
}

// ---------------------------------------------------------------------------
// lexer

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Punct(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Punct(c) => write!(f, "`{c}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
        } else if c.is_whitespace() {
            i += 1;
            col += 1;
        } else if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
                col += 1;
            }
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
                col += 1;
            }
            if i < chars.len() && (chars[i] == '.' || chars[i] == 'e' || chars[i] == 'E') {
                return Err(Diagnostic {
                    line: tl,
                    col: tc,
                    kind: DiagnosticKind::FloatLiteral,
                });
            }
            let digits: String = chars[start..i].iter().collect();
            out.push(Token {
                tok: Tok::Int(digits.parse().expect("ascii digits")),
                line: tl,
                col: tc,
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
                col += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: tl,
                col: tc,
            });
        } else if "(){},:;*/+-^=".contains(c) {
            i += 1;
            col += 1;
            out.push(Token {
                tok: Tok::Punct(c),
                line: tl,
                col: tc,
            });
        } else if c == '.' {
            return Err(Diagnostic {
                line: tl,
                col: tc,
                kind: DiagnosticKind::FloatLiteral,
            });
        } else {
            return Err(Diagnostic {
                line: tl,
                col: tc,
                kind: DiagnosticKind::SyntaxError {
                    found: format!("`{c}`"),
                    expected: vec!["a token"],
                },
            });
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

// ---------------------------------------------------------------------------
// parser

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    params: Option<Vec<SymbolId>>,
}

/// Result of parsing one multiplicative term in a scheme body.
struct SchemeFactor {
    coefficient: LaurentPoly,
    template: Option<(String, usize, usize)>,
}

impl Parser {
    fn new(text: &str) -> Result<Parser, Diagnostic> {
        Ok(Parser {
            tokens: lex(text)?,
            pos: 0,
            params: None,
        })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, t: &Token, kind: DiagnosticKind) -> Diagnostic {
        Diagnostic {
            line: t.line,
            col: t.col,
            kind,
        }
    }

    fn unexpected(&self, expected: Vec<&'static str>) -> Diagnostic {
        let t = self.peek();
        self.error_at(
            t,
            DiagnosticKind::SyntaxError {
                found: t.tok.to_string(),
                expected,
            },
        )
    }

    fn at_punct(&self, c: char) -> bool {
        self.peek().tok == Tok::Punct(c)
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn expect_punct(&mut self, c: char, label: &'static str) -> Result<Token, Diagnostic> {
        if self.at_punct(c) {
            Ok(self.bump())
        } else {
            Err(self.unexpected(vec![label]))
        }
    }

    fn expect_keyword(&mut self, kw: &'static str) -> Result<(), Diagnostic> {
        if self.at_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(vec![kw]))
        }
    }

    fn expect_ident(&mut self, label: &'static str) -> Result<(String, Token), Diagnostic> {
        match &self.peek().tok {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                Ok((s, self.bump()))
            }
            _ => Err(self.unexpected(vec![label])),
        }
    }

    fn signed_int(&mut self) -> Result<i32, Diagnostic> {
        let negative = if self.at_punct('-') {
            self.bump();
            true
        } else {
            if self.at_punct('+') {
                self.bump();
            }
            false
        };
        let t = self.peek().clone();
        match &t.tok {
            Tok::Int(n) => {
                self.bump();
                let n = if negative { -n.clone() } else { n.clone() };
                i32::try_from(n).map_err(|_| self.error_at(&t, DiagnosticKind::ExponentOverflow))
            }
            _ => Err(self.unexpected(vec!["an integer"])),
        }
    }

    // expr := ['+'|'-'] term (('+'|'-') term)*
    fn expr(&mut self) -> Result<LaurentPoly, Diagnostic> {
        let mut acc = self.term()?;
        loop {
            if self.at_punct('+') {
                self.bump();
                acc = &acc + &self.term()?;
            } else if self.at_punct('-') {
                self.bump();
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    // term := unary (('*'|'/') unary)*
    fn term(&mut self) -> Result<LaurentPoly, Diagnostic> {
        let mut acc = self.unary()?;
        loop {
            if self.at_punct('*') {
                self.bump();
                acc = &acc * &self.unary()?;
            } else if self.at_punct('/') {
                self.bump();
                let at = self.peek().clone();
                let d = self.unary()?;
                acc = &acc * &self.invert(&d, &at)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn invert(&self, d: &LaurentPoly, at: &Token) -> Result<LaurentPoly, Diagnostic> {
        d.inverse()
            .ok_or_else(|| self.error_at(at, DiagnosticKind::NonInvertibleDivision(d.to_string())))
    }

    fn unary(&mut self) -> Result<LaurentPoly, Diagnostic> {
        if self.at_punct('-') {
            self.bump();
            Ok(-self.unary()?)
        } else if self.at_punct('+') {
            self.bump();
            self.unary()
        } else {
            self.power()
        }
    }

    // power := atom ('^' exponent)?
    fn power(&mut self) -> Result<LaurentPoly, Diagnostic> {
        let base = self.atom()?;
        self.maybe_exponent(base)
    }

    fn maybe_exponent(&mut self, base: LaurentPoly) -> Result<LaurentPoly, Diagnostic> {
        if !self.at_punct('^') {
            return Ok(base);
        }
        self.bump();
        let at = self.peek().clone();
        let e = self.exponent()?;
        if e.unsigned_abs() > 64 {
            return Err(self.error_at(&at, DiagnosticKind::ExponentOverflow));
        }
        base.pow(e).ok_or_else(|| {
            self.error_at(&at, DiagnosticKind::NonInvertibleDivision(base.to_string()))
        })
    }

    fn exponent(&mut self) -> Result<i32, Diagnostic> {
        if self.at_punct('(') {
            self.bump();
            let e = self.signed_int().map_err(|d| self.non_integer(d))?;
            if !self.at_punct(')') {
                let t = self.peek().clone();
                return Err(self.error_at(&t, DiagnosticKind::NonIntegerExponent));
            }
            self.bump();
            Ok(e)
        } else {
            let e = self.signed_int().map_err(|d| self.non_integer(d))?;
            if self.at_punct('^') {
                return Err(self.unexpected(vec!["an operator"]));
            }
            Ok(e)
        }
    }

    fn non_integer(&self, d: Diagnostic) -> Diagnostic {
        match d.kind {
            DiagnosticKind::SyntaxError { .. } => Diagnostic {
                kind: DiagnosticKind::NonIntegerExponent,
                ..d
            },
            _ => d,
        }
    }

    fn symbol(&self, name: &str, t: &Token) -> Result<LaurentPoly, Diagnostic> {
        let s = SymbolId::from_name(name)
            .ok_or_else(|| self.error_at(t, DiagnosticKind::UnknownSymbol(name.to_string())))?;
        if let Some(ps) = &self.params {
            let is_param = matches!(s, SymbolId::Diffusivity | SymbolId::RelaxTime);
            if is_param && !ps.contains(&s) {
                return Err(self.error_at(t, DiagnosticKind::UndeclaredParameter(name.to_string())));
            }
        }
        Ok(LaurentPoly::symbol(s))
    }

    // atom := INT | SYMBOL | '(' expr ')'
    fn atom(&mut self) -> Result<LaurentPoly, Diagnostic> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Int(n) => {
                self.bump();
                Ok(LaurentPoly::constant(BigRational::from_integer(n.clone())))
            }
            Tok::Ident(name) => {
                self.bump();
                self.symbol(name, &t)
            }
            Tok::Punct('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(')', "`)`")?;
                Ok(e)
            }
            _ => Err(self.unexpected(vec!["a number", "a symbol", "`(`"])),
        }
    }

    /// One product in a scheme body; at most one factor names a template.
    fn scheme_factor(
        &mut self,
        templates: &[DerivativeTemplate],
    ) -> Result<SchemeFactor, Diagnostic> {
        let mut out = SchemeFactor {
            coefficient: LaurentPoly::one(),
            template: None,
        };
        let mut dividing = false;
        loop {
            let t = self.peek().clone();
            let factor = match &t.tok {
                Tok::Ident(name) if SymbolId::from_name(name).is_none() => {
                    if KEYWORDS.contains(&name.as_str()) {
                        return Err(self.unexpected(vec!["a template name", "a coefficient"]));
                    }
                    if let Some((first, line, col)) = &out.template {
                        let known = templates.iter().any(|u| u.name() == first)
                            || BUILTIN_TEMPLATES.contains(&first.as_str());
                        if !known {
                            return Err(Diagnostic {
                                line: *line,
                                col: *col,
                                kind: DiagnosticKind::UnknownSymbol(first.clone()),
                            });
                        }
                    }
                    if dividing || out.template.is_some() {
                        return Err(self.error_at(
                            &t,
                            DiagnosticKind::SyntaxError {
                                found: t.tok.to_string(),
                                expected: vec!["a coefficient factor"],
                            },
                        ));
                    }
                    self.bump();
                    out.template = Some((name.clone(), t.line, t.col));
                    None
                }
                _ => Some(self.unary()?),
            };
            if let Some(f) = factor {
                out.coefficient = if dividing {
                    &out.coefficient * &self.invert(&f, &t)?
                } else {
                    &out.coefficient * &f
                };
            }
            if self.at_punct('*') {
                self.bump();
                dividing = false;
            } else if self.at_punct('/') {
                self.bump();
                dividing = true;
            } else {
                return Ok(out);
            }
        }
    }

    fn params_decl(&mut self) -> Result<Vec<SymbolId>, Diagnostic> {
        self.expect_keyword("params")?;
        let mut out = Vec::new();
        loop {
            let (name, t) = self.expect_ident("a parameter name")?;
            match SymbolId::from_name(&name) {
                Some(s @ (SymbolId::Diffusivity | SymbolId::RelaxTime)) => {
                    if out.contains(&s) {
                        return Err(self.error_at(&t, DiagnosticKind::Duplicate(name)));
                    }
                    out.push(s);
                }
                _ => return Err(self.error_at(&t, DiagnosticKind::InvalidParameter(name))),
            }
            if self.at_punct(',') {
                self.bump();
            } else {
                break;
            }
        }
        self.expect_punct(';', "`;`")?;
        Ok(out)
    }

    fn template_decl(&mut self) -> Result<(DerivativeTemplate, Token), Diagnostic> {
        self.expect_keyword("template")?;
        let (name, name_tok) = self.expect_ident("a template name")?;
        if !is_identifier(&name) {
            return Err(self.error_at(
                &name_tok,
                DiagnosticKind::SyntaxError {
                    found: format!("`{name}`"),
                    expected: vec!["a template name"],
                },
            ));
        }
        self.expect_keyword("for")?;
        let kind = match &self.peek().tok {
            Tok::Ident(s) => DerivativeKind::from_tag(s),
            _ => None,
        }
        .ok_or_else(|| self.unexpected(vec!["ut", "utt", "uxx", "utxx"]))?;
        self.bump();
        self.expect_punct('{', "`{`")?;
        let mut entries = Stencil::new();
        let mut seen = Vec::new();
        while !self.at_punct('}') {
            let open = self
                .expect_punct('(', "`(`")
                .map_err(|_| self.unexpected(vec!["`(`", "`}`"]))?;
            let dt = self.signed_int()?;
            self.expect_punct(',', "`,`")?;
            let dx = self.signed_int()?;
            self.expect_punct(')', "`)`")?;
            self.expect_punct(':', "`:`")?;
            let c = self.expr()?;
            self.expect_punct(';', "`;`")?;
            let offset = GridOffset::new(dt, dx);
            if seen.contains(&offset) {
                return Err(self.error_at(&open, DiagnosticKind::DuplicateOffset(offset)));
            }
            seen.push(offset);
            entries.add_at(offset, c);
        }
        self.bump();
        let t = DerivativeTemplate::new(name, kind, entries)
            .map_err(|e| self.error_at(&name_tok, e.into()))?;
        Ok((t, name_tok))
    }

    fn scheme_block(
        &mut self,
        templates: &[DerivativeTemplate],
    ) -> Result<Vec<SchemeTerm>, Diagnostic> {
        self.expect_keyword("scheme")?;
        self.expect_punct('{', "`{`")?;
        let mut terms = Vec::new();
        let mut first = true;
        loop {
            let negative = if self.at_punct('-') {
                self.bump();
                true
            } else if self.at_punct('+') {
                self.bump();
                false
            } else if first {
                false
            } else if self.at_punct('=') {
                break;
            } else {
                return Err(self.unexpected(vec!["`+`", "`-`", "`=`"]));
            };
            first = false;
            let f = self.scheme_factor(templates)?;
            let Some((name, line, col)) = f.template else {
                return Err(self.unexpected(vec!["a template name"]));
            };
            let template = match templates.iter().find(|t| t.name() == name) {
                Some(t) => t.clone(),
                None => builtin_template(&name).map_err(|_| Diagnostic {
                    line,
                    col,
                    kind: DiagnosticKind::UnresolvedTemplate(name.clone()),
                })?,
            };
            let coefficient = if negative {
                -f.coefficient
            } else {
                f.coefficient
            };
            terms.push(SchemeTerm {
                coefficient,
                template,
            });
        }
        self.expect_punct('=', "`=`")?;
        let zero_tok = self.peek().clone();
        match &zero_tok.tok {
            Tok::Int(n) if n.is_zero() => {
                self.bump();
            }
            _ => return Err(self.unexpected(vec!["`0`"])),
        }
        self.expect_punct('}', "`}`")?;
        Ok(terms)
    }

    fn file(&mut self) -> Result<SchemeFile, Diagnostic> {
        let mut templates: Vec<DerivativeTemplate> = Vec::new();
        let mut scheme: Option<(SchemeSpec, Token)> = None;
        loop {
            let t = self.peek().clone();
            if self.at_keyword("params") {
                if self.params.is_some() || !templates.is_empty() || scheme.is_some() {
                    return Err(self.error_at(&t, DiagnosticKind::Duplicate("params".into())));
                }
                self.params = Some(self.params_decl()?);
            } else if self.at_keyword("template") {
                let (tpl, name_tok) = self.template_decl()?;
                if BUILTIN_TEMPLATES.contains(&tpl.name())
                    || templates.iter().any(|u| u.name() == tpl.name())
                {
                    return Err(
                        self.error_at(&name_tok, DiagnosticKind::Duplicate(tpl.name().to_string()))
                    );
                }
                templates.push(tpl);
            } else if self.at_keyword("scheme") {
                if scheme.is_some() {
                    return Err(self.error_at(&t, DiagnosticKind::Duplicate("scheme".into())));
                }
                let terms = self.scheme_block(&templates)?;
                let spec = SchemeSpec::new(terms).map_err(|e| self.error_at(&t, e.into()))?;
                scheme = Some((spec, t));
            } else if self.peek().tok == Tok::Eof && scheme.is_some() {
                break;
            } else {
                let mut expected = vec!["`params`", "`template`", "`scheme`"];
                if scheme.is_some() {
                    expected.push("end of input");
                }
                return Err(self.unexpected(expected));
            }
        }
        let (scheme, _) = scheme.expect("loop exits only with a scheme");
        Ok(SchemeFile {
            params: self.params.take(),
            templates,
            scheme,
        })
    }
}

/// Parses a standalone coefficient expression such as `1 - 3*D*tau*dx^-2`.
pub fn parse_expression(text: &str) -> Result<LaurentPoly, Diagnostic> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    if p.peek().tok != Tok::Eof {
        return Err(p.unexpected(vec!["an operator", "end of input"]));
    }
    Ok(e)
}

pub fn parse_scheme(text: &str) -> Result<SchemeFile, Diagnostic> {
    Parser::new(text)?.file()
}

/// Like [`parse_scheme`], for raw bytes that may not be UTF-8.
pub fn parse_scheme_bytes(bytes: &[u8]) -> Result<SchemeFile, Diagnostic> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_scheme(text),
        Err(e) => {
            let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).unwrap_or_default();
            let line = valid.matches('\n').count() + 1;
            let col = valid.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            Err(Diagnostic {
                line,
                col,
                kind: DiagnosticKind::InvalidUtf8,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// rendering

fn render_coefficient_prefix(out: &mut String, c: &LaurentPoly, first: bool) {
    let single_negative = c.as_monomial().is_some_and(|(coef, _)| coef.is_negative());
    let (sign, mag) = if single_negative {
        ("-", -c)
    } else {
        ("+", c.clone())
    };
    if first {
        if sign == "-" {
            out.push('-');
        }
    } else {
        let _ = write!(out, "{sign} ");
    }
    if mag.as_constant().is_some_and(|v| v.is_one()) {
        return;
    }
    if mag.len() > 1 {
        let _ = write!(out, "({mag}) * ");
    } else {
        let _ = write!(out, "{mag} * ");
    }
}

/// Canonical text for a scheme file; `parse_scheme(&render_scheme(f)) == Ok(f)`.
pub fn render_scheme(file: &SchemeFile) -> String {
    let mut out = String::new();
    if let Some(ps) = &file.params {
        let names: Vec<_> = ps.iter().map(|s| s.name()).collect();
        let _ = writeln!(out, "params {};\n", names.join(", "));
    }
    for t in &file.templates {
        let _ = writeln!(out, "template {} for {} {{", t.name(), t.target());
        for (o, c) in t.entries().entries() {
            let _ = writeln!(out, "  ({}, {}): {};", o.time, o.space, c);
        }
        out.push_str("}\n\n");
    }
    out.push_str("scheme {\n");
    for (i, term) in file.scheme.terms().iter().enumerate() {
        out.push_str("  ");
        render_coefficient_prefix(&mut out, &term.coefficient, i == 0);
        out.push_str(term.template.name());
        out.push('\n');
    }
    out.push_str("  = 0\n}\n");
    out
}
