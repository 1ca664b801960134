use num_bigint::BigInt;

use super::{Diagnostic, LustreError, Span};
use crate::logic::{parse_rational, Rational};

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(BigInt),
    Real(Rational),
    Kw(&'static str),
    Sym(&'static str),
    Realizable,
    Property,
    Eof,
}

const KEYWORDS: &[&str] = &[
    "node", "function", "returns", "var", "let", "tel", "const", "assert", "if", "then", "else",
    "pre", "and", "or", "xor", "not", "div", "mod", "true", "false", "bool", "int", "real",
];

// Longest first.
const SYMBOLS: &[&str] = &[
    "->", "=>", "<>", "<=", ">=", "(", ")", ",", ";", ":", "=", "<", ">", "+", "-", "*", "/",
];

pub fn lex(text: &str) -> Result<Vec<(Tok, Span)>, LustreError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let advance = |i: &mut usize, line: &mut u32, col: &mut u32, n: usize| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    let rest = |i: usize| -> String { chars[i..chars.len().min(i + 16)].iter().collect() };
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            let r = rest(i);
            if r.starts_with("--%REALIZABLE") {
                out.push((Tok::Realizable, span));
                advance(&mut i, &mut line, &mut col, "--%REALIZABLE".len());
                continue;
            }
            if r.starts_with("--%PROPERTY") {
                out.push((Tok::Property, span));
                advance(&mut i, &mut line, &mut col, "--%PROPERTY".len());
                continue;
            }
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        if c == '(' && chars.get(i + 1) == Some(&'*') {
            advance(&mut i, &mut line, &mut col, 2);
            loop {
                if i + 1 >= chars.len() {
                    return Err(LustreError::Syntax(Diagnostic::error(span, "unterminated comment")));
                }
                if chars[i] == '*' && chars[i + 1] == ')' {
                    advance(&mut i, &mut line, &mut col, 2);
                    break;
                }
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                advance(&mut i, &mut line, &mut col, 1);
            }
            let word: String = chars[start..i].iter().collect();
            let tok = match KEYWORDS.iter().find(|k| **k == word) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(word),
            };
            out.push((tok, span));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                advance(&mut i, &mut line, &mut col, 1);
            }
            let mut real = false;
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                real = true;
                advance(&mut i, &mut line, &mut col, 1);
                while i < chars.len() && chars[i].is_ascii_digit() {
                    advance(&mut i, &mut line, &mut col, 1);
                }
            } else if i < chars.len() && chars[i] == '.' {
                // `1.` is a real literal too
                real = true;
                advance(&mut i, &mut line, &mut col, 1);
            }
            let text: String = chars[start..i].iter().collect();
            let tok = if real {
                let t = text.trim_end_matches('.');
                Tok::Real(parse_rational(t).expect("digits"))
            } else {
                Tok::Int(text.parse().expect("digits"))
            };
            out.push((tok, span));
            continue;
        }
        let r = rest(i);
        match SYMBOLS.iter().find(|s| r.starts_with(**s)) {
            Some(s) => {
                out.push((Tok::Sym(s), span));
                advance(&mut i, &mut line, &mut col, s.len());
            }
            None => {
                return Err(LustreError::Syntax(Diagnostic::error(
                    span,
                    format!("unexpected character `{c}`"),
                )))
            }
        }
    }
    out.push((Tok::Eof, Span { line, col }));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|(t, _)| t).collect()
    }

    #[test]
    fn directives_survive_comment_stripping() {
        let t = toks("--%REALIZABLE a, b;\n-- plain comment\n--%PROPERTY ok;");
        assert_eq!(t[0], Tok::Realizable);
        assert_eq!(t[1], Tok::Ident("a".into()));
        assert!(t.contains(&Tok::Property));
        assert!(!t.iter().any(|x| *x == Tok::Ident("plain".into())));
    }

    #[test]
    fn numbers_and_arrows() {
        let t = toks("x = 0.25 -> pre(x) + 3;");
        assert_eq!(t[2], Tok::Real(crate::logic::ratio(1, 4)));
        assert_eq!(t[3], Tok::Sym("->"));
        assert_eq!(t[9], Tok::Int(3.into()));
    }

    #[test]
    fn spans_track_lines() {
        let l = lex("a\n  b").unwrap();
        assert_eq!((l[1].1.line, l[1].1.col), (2, 3));
    }
}
