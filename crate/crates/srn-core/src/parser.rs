//! Plain-text DSL for reaction networks.
//!
//! ```text
//! # comment
//! species: E Ip EIp I EIpI     (optional; fixes species order)
//! E + Ip <-> EIp @ 1, 1
//! EIp -> E + I @ 1/2
//! 0 -> S @ 0.25
//! 2 S -> S @ k1                (symbolic rate, bound at parse time)
//! ```
//!
//! One reaction per line. `0` denotes the empty complex. `->` takes one
//! rate after `@`, `<->` takes two (forward, backward). Species are
//! declared implicitly in order of first appearance unless a `species:`
//! header fixes the order, in which case unknown names are rejected.

use crate::model::{Complex, Reaction, ReactionNetwork};
use crate::rational::{format_rat, parse_rat, Rat};
use num_traits::Signed;
use std::collections::BTreeMap;

/// Position of a token in the source: 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnknownSpeciesPolicy,
    BadRate,
    SelfLoop,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub kind: ParseErrorKind,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}: {}", self.span.line, self.span.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(String),
    Arrow,
    BiArrow,
    Plus,
    At,
    Comma,
    Slash,
    Dot,
    Colon,
}

struct Token {
    tok: Tok,
    column: usize,
    length: usize,
}

fn lex_line(line_no: usize, text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            '#' => break,
            c if c.is_whitespace() => {
                i += 1;
            }
            '+' => {
                tokens.push(Token { tok: Tok::Plus, column: col, length: 1 });
                i += 1;
            }
            '@' => {
                tokens.push(Token { tok: Tok::At, column: col, length: 1 });
                i += 1;
            }
            ',' => {
                tokens.push(Token { tok: Tok::Comma, column: col, length: 1 });
                i += 1;
            }
            '/' => {
                tokens.push(Token { tok: Tok::Slash, column: col, length: 1 });
                i += 1;
            }
            '.' => {
                tokens.push(Token { tok: Tok::Dot, column: col, length: 1 });
                i += 1;
            }
            ':' => {
                tokens.push(Token { tok: Tok::Colon, column: col, length: 1 });
                i += 1;
            }
            '<' => {
                if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') {
                    tokens.push(Token { tok: Tok::BiArrow, column: col, length: 3 });
                    i += 3;
                } else {
                    return Err(syntax(line_no, col, 1, "expected `<->`"));
                }
            }
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    tokens.push(Token { tok: Tok::Arrow, column: col, length: 2 });
                    i += 2;
                } else {
                    return Err(syntax(line_no, col, 1, "expected `->`"));
                }
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                tokens.push(Token { tok: Tok::Int(s), column: col, length: i - start });
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
                {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                tokens.push(Token { tok: Tok::Ident(s), column: col, length: i - start });
            }
            other => {
                return Err(syntax(
                    line_no,
                    col,
                    1,
                    &format!("unexpected character `{other}`"),
                ));
            }
        }
    }
    Ok(tokens)
}

fn syntax(line: usize, column: usize, length: usize, message: &str) -> ParseError {
    ParseError {
        span: SourceSpan { line, column, length },
        message: message.to_string(),
        kind: ParseErrorKind::Syntax,
    }
}

struct NetBuilder {
    species: Vec<String>,
    fixed_order: bool,
    reactions: Vec<(Vec<u64>, Vec<u64>, Rat)>,
}

impl NetBuilder {
    fn species_index(
        &mut self,
        name: &str,
        line: usize,
        column: usize,
    ) -> Result<usize, ParseError> {
        if let Some(i) = self.species.iter().position(|s| s == name) {
            return Ok(i);
        }
        if self.fixed_order {
            return Err(ParseError {
                span: SourceSpan { line, column, length: name.chars().count() },
                message: format!("species `{name}` is not in the species header"),
                kind: ParseErrorKind::UnknownSpeciesPolicy,
            });
        }
        self.species.push(name.to_string());
        Ok(self.species.len() - 1)
    }
}

/// Raw complex as (species index, coefficient) pairs.
type RawComplex = Vec<(usize, u64)>;

fn densify(raw: &RawComplex, dim: usize) -> Vec<u64> {
    let mut v = vec![0u64; dim];
    for &(i, c) in raw {
        v[i] += c;
    }
    v
}

struct LineParser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    line: usize,
    builder: &'a mut NetBuilder,
}

impl<'a> LineParser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn end_span(&self) -> (usize, usize) {
        match self.tokens.last() {
            Some(t) => (t.column + t.length, 1),
            None => (1, 1),
        }
    }

    fn syntax_here(&self, message: &str) -> ParseError {
        match self.peek() {
            Some(t) => syntax(self.line, t.column, t.length, message),
            None => {
                let (col, len) = self.end_span();
                syntax(self.line, col, len, message)
            }
        }
    }

    /// complex = "0" | term ("+" term)*
    fn complex(&mut self) -> Result<RawComplex, ParseError> {
        if let Some(Token { tok: Tok::Int(s), .. }) = self.peek() {
            if s == "0" {
                // Lone zero is the empty complex; a coefficient cannot be 0.
                let next_is_ident = matches!(
                    self.tokens.get(self.pos + 1),
                    Some(Token { tok: Tok::Ident(_), .. })
                );
                if !next_is_ident {
                    self.bump();
                    return Ok(Vec::new());
                }
            }
        }
        let mut terms = Vec::new();
        loop {
            terms.push(self.term()?);
            if matches!(self.peek(), Some(Token { tok: Tok::Plus, .. })) {
                self.bump();
            } else {
                break;
            }
        }
        Ok(terms)
    }

    /// term = [integer] species-name
    fn term(&mut self) -> Result<(usize, u64), ParseError> {
        let mut coeff = 1u64;
        if let Some(Token { tok: Tok::Int(s), column, length }) = self.peek() {
            let (col, len) = (*column, *length);
            coeff = s.parse().map_err(|_| {
                syntax(self.line, col, len, "stoichiometric coefficient too large")
            })?;
            if coeff == 0 {
                return Err(syntax(self.line, col, len, "zero stoichiometric coefficient"));
            }
            self.bump();
        }
        match self.peek() {
            Some(Token { tok: Tok::Ident(name), column, length }) => {
                let (name, col, _len) = (name.clone(), *column, *length);
                self.bump();
                let idx = self.builder.species_index(&name, self.line, col)?;
                Ok((idx, coeff))
            }
            _ => Err(self.syntax_here("expected a species name")),
        }
    }

    /// rate = integer ["/" integer | "." digits] | identifier
    fn rate(&mut self, params: &BTreeMap<String, Rat>) -> Result<Rat, ParseError> {
        match self.peek() {
            Some(Token { tok: Tok::Ident(name), column, length }) => {
                let (name, col, len) = (name.clone(), *column, *length);
                self.bump();
                match params.get(&name) {
                    Some(v) => check_positive(v.clone(), self.line, col, len),
                    None => Err(ParseError {
                        span: SourceSpan { line: self.line, column: col, length: len },
                        message: format!("rate parameter `{name}` is unbound"),
                        kind: ParseErrorKind::BadRate,
                    }),
                }
            }
            Some(Token { tok: Tok::Int(s), column, length }) => {
                let (mut text, col, mut len) = (s.clone(), *column, *length);
                self.bump();
                match self.peek() {
                    Some(Token { tok: Tok::Slash, .. }) => {
                        self.bump();
                        match self.peek() {
                            Some(Token { tok: Tok::Int(q), length: ql, .. }) => {
                                let ql = *ql;
                                text = format!("{text}/{q}");
                                len += 1 + ql;
                                self.bump();
                            }
                            _ => return Err(self.syntax_here("expected a denominator")),
                        }
                    }
                    Some(Token { tok: Tok::Dot, .. }) => {
                        self.bump();
                        match self.peek() {
                            Some(Token { tok: Tok::Int(q), length: ql, .. }) => {
                                let ql = *ql;
                                text = format!("{text}.{q}");
                                len += 1 + ql;
                                self.bump();
                            }
                            _ => return Err(self.syntax_here("expected decimal digits")),
                        }
                    }
                    _ => {}
                }
                let value = parse_rat(&text).ok_or_else(|| ParseError {
                    span: SourceSpan { line: self.line, column: col, length: len },
                    message: format!("cannot parse rate `{text}`"),
                    kind: ParseErrorKind::BadRate,
                })?;
                check_positive(value, self.line, col, len)
            }
            _ => {
                let mut e = self.syntax_here("expected a rate");
                e.kind = ParseErrorKind::BadRate;
                Err(e)
            }
        }
    }

    fn reaction_line(&mut self, params: &BTreeMap<String, Rat>) -> Result<(), ParseError> {
        let line_start_col = self.tokens.first().map_or(1, |t| t.column);
        let lhs = self.complex()?;
        let reversible = match self.peek() {
            Some(Token { tok: Tok::Arrow, .. }) => {
                self.bump();
                false
            }
            Some(Token { tok: Tok::BiArrow, .. }) => {
                self.bump();
                true
            }
            _ => return Err(self.syntax_here("expected `->` or `<->`")),
        };
        let rhs = self.complex()?;
        match self.peek() {
            Some(Token { tok: Tok::At, .. }) => {
                self.bump();
            }
            _ => return Err(self.syntax_here("expected `@` before the rate")),
        }
        let forward = self.rate(params)?;
        let backward = if reversible {
            match self.peek() {
                Some(Token { tok: Tok::Comma, .. }) => {
                    self.bump();
                }
                _ => {
                    return Err(self.syntax_here("`<->` requires two rates: forward, backward"))
                }
            }
            Some(self.rate(params)?)
        } else {
            None
        };
        if self.pos != self.tokens.len() {
            return Err(self.syntax_here("trailing input after reaction"));
        }

        let dim = self.builder.species.len();
        let y = densify(&lhs, dim);
        let yp = densify(&rhs, dim);
        if y == yp {
            return Err(ParseError {
                span: SourceSpan {
                    line: self.line,
                    column: line_start_col,
                    length: self.tokens.last().map_or(1, |t| t.column + t.length - line_start_col),
                },
                message: "reactant equals product".to_string(),
                kind: ParseErrorKind::SelfLoop,
            });
        }
        self.builder.reactions.push((y.clone(), yp.clone(), forward));
        if let Some(b) = backward {
            self.builder.reactions.push((yp, y, b));
        }
        Ok(())
    }
}

fn check_positive(v: Rat, line: usize, column: usize, length: usize) -> Result<Rat, ParseError> {
    if v.is_positive() {
        Ok(v)
    } else {
        Err(ParseError {
            span: SourceSpan { line, column, length },
            message: "rate must be positive".to_string(),
            kind: ParseErrorKind::BadRate,
        })
    }
}

/// Parse a network, resolving symbolic rate names from `params`.
pub fn parse_with_params(
    text: &str,
    params: &BTreeMap<String, Rat>,
) -> Result<ReactionNetwork, ParseError> {
    let mut builder = NetBuilder {
        species: Vec::new(),
        fixed_order: false,
        reactions: Vec::new(),
    };
    let mut seen_reaction = false;
    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        let tokens = lex_line(line_no, line)?;
        if tokens.is_empty() {
            continue;
        }
        // Optional species header, before any reaction.
        if let (Tok::Ident(first), Some(Tok::Colon)) =
            (&tokens[0].tok, tokens.get(1).map(|t| &t.tok))
        {
            if first == "species" {
                if seen_reaction || builder.fixed_order {
                    return Err(syntax(
                        line_no,
                        tokens[0].column,
                        tokens[0].length,
                        "species header must precede all reactions",
                    ));
                }
                for t in &tokens[2..] {
                    match &t.tok {
                        Tok::Ident(name) => {
                            if builder.species.contains(name) {
                                return Err(syntax(
                                    line_no,
                                    t.column,
                                    t.length,
                                    &format!("duplicate species `{name}`"),
                                ));
                            }
                            builder.species.push(name.clone());
                        }
                        _ => {
                            return Err(syntax(
                                line_no,
                                t.column,
                                t.length,
                                "species header takes species names",
                            ));
                        }
                    }
                }
                if builder.species.is_empty() {
                    return Err(syntax(
                        line_no,
                        tokens[0].column,
                        tokens[0].length,
                        "empty species header",
                    ));
                }
                builder.fixed_order = true;
                continue;
            }
        }
        let mut lp = LineParser { tokens, pos: 0, line: line_no, builder: &mut builder };
        lp.reaction_line(params)?;
        seen_reaction = true;
    }

    let dim = builder.species.len();
    let reactions = builder
        .reactions
        .into_iter()
        .map(|(y, yp, k)| {
            Reaction::new(
                Complex(padded(&y, dim)),
                Complex(padded(&yp, dim)),
                k,
            )
        })
        .collect();
    Ok(ReactionNetwork::new(builder.species, reactions))
}

fn padded(v: &[u64], dim: usize) -> Vec<u64> {
    let mut out = v.to_vec();
    out.resize(dim, 0);
    out
}

/// Parse a network with no symbolic rate parameters.
pub fn parse(text: &str) -> Result<ReactionNetwork, ParseError> {
    parse_with_params(text, &BTreeMap::new())
}

fn complex_text(c: &[u64], species: &[String]) -> String {
    let mut parts = Vec::new();
    for (j, &coeff) in c.iter().enumerate() {
        if coeff == 0 {
            continue;
        }
        if coeff == 1 {
            parts.push(species[j].clone());
        } else {
            parts.push(format!("{coeff} {}", species[j]));
        }
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" + ")
    }
}

/// Canonical text form: one reaction per line, species in declaration
/// order. Reversible pairs are not re-merged. A `species:` header is
/// emitted only when first-appearance order would not reproduce the
/// declared order.
pub fn serialize(network: &ReactionNetwork) -> String {
    let species = network.species();
    let mut body = String::new();
    let mut appearance: Vec<usize> = Vec::new();
    for r in network.reactions() {
        for c in [&r.reactant, &r.product] {
            for (j, &coeff) in c.0.iter().enumerate() {
                if coeff > 0 && !appearance.contains(&j) {
                    appearance.push(j);
                }
            }
        }
        body.push_str(&complex_text(&r.reactant.0, species));
        body.push_str(" -> ");
        body.push_str(&complex_text(&r.product.0, species));
        body.push_str(" @ ");
        body.push_str(&format_rat(&r.rate));
        body.push('\n');
    }
    let natural_order = appearance == (0..species.len()).collect::<Vec<_>>();
    if natural_order {
        body
    } else {
        format!("species: {}\n{body}", species.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, rat};

    #[test]
    fn parses_basic_reactions() {
        let n = parse("S -> 2 S @ 1\n3 S -> S @ 1").unwrap();
        assert_eq!(n.species(), ["S"]);
        assert_eq!(n.reactions().len(), 2);
        assert_eq!(n.reactions()[0].reactant.0, vec![1]);
        assert_eq!(n.reactions()[0].product.0, vec![2]);
    }

    #[test]
    fn reversible_and_empty_complex() {
        let n = parse("0 <-> S @ 1, 2").unwrap();
        assert_eq!(n.reactions().len(), 2);
        assert_eq!(n.reactions()[0].reactant.0, vec![0]);
        assert_eq!(n.reactions()[0].product.0, vec![1]);
        assert_eq!(n.reactions()[0].rate, rat(1));
        assert_eq!(n.reactions()[1].reactant.0, vec![1]);
        assert_eq!(n.reactions()[1].product.0, vec![0]);
        assert_eq!(n.reactions()[1].rate, rat(2));
    }

    #[test]
    fn idh_fragment_declares_species_in_order() {
        let n = parse("E + Ip <-> EIp @ 1, 1\nEIp -> E + I @ 1").unwrap();
        assert_eq!(n.species(), ["E", "Ip", "EIp", "I"]);
        assert_eq!(n.reactions().len(), 3);
    }

    #[test]
    fn symbolic_rates_bind_from_params() {
        let mut params = BTreeMap::new();
        params.insert("k".to_string(), frac(1, 2));
        let n = parse_with_params("S -> 2 S @ k", &params).unwrap();
        assert_eq!(n.reactions()[0].rate, frac(1, 2));

        let err = parse("S -> 2 S @ k").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::BadRate);
        assert_eq!(err.span.line, 1);
        assert_eq!(err.span.column, 12);
    }

    #[test]
    fn rejects_self_loop_at_parse_time() {
        let err = parse("S + S -> 2 S @ 1").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::SelfLoop);
    }

    #[test]
    fn species_header_fixes_order_and_policy() {
        let n = parse("species: B A\nA -> B @ 1").unwrap();
        assert_eq!(n.species(), ["B", "A"]);
        let err = parse("species: A\nA -> B @ 1").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownSpeciesPolicy);
        assert_eq!(err.span.line, 2);
        assert_eq!(err.span.column, 6);
    }

    #[test]
    fn error_spans_point_at_offending_tokens() {
        let err = parse("S -> 2 S").unwrap_err();
        assert_eq!(err.span.line, 1);
        assert_eq!(err.span.column, 9);
        let err = parse("S => 2 S @ 1").unwrap_err();
        assert_eq!((err.span.line, err.span.column), (1, 3));
        let err = parse("S -> 2 S @ 0").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::BadRate);
        assert_eq!(err.span.column, 12);
    }

    #[test]
    fn serialize_canonical_forms() {
        let n = parse("S -> 2 S @ 1/2").unwrap();
        assert_eq!(serialize(&n), "S -> 2 S @ 1/2\n");
        let n = parse("S -> 0 @ 1").unwrap();
        assert_eq!(serialize(&n), "S -> 0 @ 1\n");
        // Declaration order differing from appearance order forces a header.
        let n = parse("species: B A\nA -> B @ 1").unwrap();
        assert_eq!(serialize(&n), "species: B A\nA -> B @ 1\n");
    }

    #[test]
    fn round_trips_the_idh_network() {
        let text = "\
E + Ip <-> EIp @ 1, 1
EIp -> E + I @ 1
EIp + I <-> EIpI @ 1, 1
EIpI -> EIp + Ip @ 1
";
        let n = parse(text).unwrap();
        let again = parse(&serialize(&n)).unwrap();
        assert_eq!(n, again);
    }

    #[test]
    fn decimal_rates_are_exact() {
        let n = parse("S -> 2 S @ 0.25").unwrap();
        assert_eq!(n.reactions()[0].rate, frac(1, 4));
    }

    #[test]
    fn crlf_and_comments() {
        let n = parse("# header\r\nS -> 2 S @ 1 # inline\r\n\r\n").unwrap();
        assert_eq!(n.reactions().len(), 1);
    }
}
