use super::ParseError;
use crate::num::{parse_rat, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum Token<'a> {
    Ident(&'a str),
    /// Digits with an optional `.digits` or `/digits` tail.
    Number(&'a str),
    Symbol(&'static str),
    End,
}

const SYMBOLS: [&str; 20] = [
    "->", ">=", "<=", "==", ">", "<", "+", "-", "*", "/", "^", "!", "(", ")", "[", "]", ",", ":",
    "=", ";",
];

/// Single-line tokenizer with 1-based column tracking.
pub(super) struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col_offset: usize,
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str, line: usize) -> Self {
        Self::with_offset(src, line, 1)
    }

    pub fn with_offset(src: &'a str, line: usize, col: usize) -> Self {
        Self {
            src,
            pos: 0,
            line,
            col_offset: col,
        }
    }

    pub fn line(&self) -> usize {
        self.line
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    /// Column of the next token.
    pub fn column(&mut self) -> usize {
        self.skip_ws();
        self.col_offset + self.src[..self.pos].chars().count()
    }

    pub fn error_at(&self, col: usize, expected: &str) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            col,
            expected: expected.to_string(),
        }
    }

    fn scan(&mut self) -> Result<(Token<'a>, usize), ParseError> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let Some(c) = rest.chars().next() else {
            return Ok((Token::End, 0));
        };
        if c.is_ascii_alphabetic() || c == '_' {
            let len = rest
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .unwrap_or(rest.len());
            return Ok((Token::Ident(&rest[..len]), len));
        }
        if c.is_ascii_digit() {
            let bytes = rest.as_bytes();
            let mut len = bytes.iter().take_while(|b| b.is_ascii_digit()).count();
            if len < bytes.len() && bytes[len] == b'.' {
                let frac = bytes[len + 1..]
                    .iter()
                    .take_while(|b| b.is_ascii_digit())
                    .count();
                if frac > 0 {
                    len += 1 + frac;
                }
            }
            return Ok((Token::Number(&rest[..len]), len));
        }
        for sym in SYMBOLS {
            if rest.starts_with(sym) {
                return Ok((Token::Symbol(sym), sym.len()));
            }
        }
        let col = self.col_offset + self.src[..self.pos].chars().count();
        Err(self.error_at(col, "a valid token"))
    }

    pub fn peek(&mut self) -> Result<Token<'a>, ParseError> {
        self.scan().map(|(t, _)| t)
    }

    pub fn peek_ident(&mut self) -> Option<&'a str> {
        match self.scan() {
            Ok((Token::Ident(s), _)) => Some(s),
            _ => None,
        }
    }

    pub fn next_token(&mut self) -> Result<Token<'a>, ParseError> {
        let (t, len) = self.scan()?;
        self.pos += len;
        Ok(t)
    }

    pub fn eat_symbol(&mut self, sym: &str) -> bool {
        match self.scan() {
            Ok((Token::Symbol(s), len)) if s == sym => {
                self.pos += len;
                true
            }
            _ => false,
        }
    }

    pub fn expect_symbol(&mut self, sym: &str) -> Result<(), ParseError> {
        let col = self.column();
        if self.eat_symbol(sym) {
            Ok(())
        } else {
            Err(self.error_at(col, &format!("`{sym}`")))
        }
    }

    pub fn expect_ident(&mut self) -> Result<(String, usize), ParseError> {
        let col = self.column();
        match self.next_token()? {
            Token::Ident(s) => Ok((s.to_string(), col)),
            _ => Err(self.error_at(col, "an identifier")),
        }
    }

    /// `p`, `p/q`, `-p/q` or a decimal.
    pub fn expect_rational(&mut self) -> Result<Rat, ParseError> {
        let col = self.column();
        let negative = self.eat_symbol("-");
        let Token::Number(num) = self.next_token()? else {
            return Err(self.error_at(col, "a rational number"));
        };
        let mut text = num.to_string();
        if self.eat_symbol("/") {
            match self.next_token()? {
                Token::Number(den) => {
                    text.push('/');
                    text.push_str(den);
                }
                _ => return Err(self.error_at(col, "a rational number")),
            }
        }
        let value = parse_rat(&text).ok_or_else(|| self.error_at(col, "a rational number"))?;
        Ok(if negative { -value } else { value })
    }

    pub fn ident_list(&mut self) -> Result<Vec<String>, ParseError> {
        let mut out = vec![self.expect_ident()?.0];
        while self.eat_symbol(",") {
            out.push(self.expect_ident()?.0);
        }
        Ok(out)
    }

    pub fn expect_end(&mut self) -> Result<(), ParseError> {
        let col = self.column();
        match self.peek()? {
            Token::End => Ok(()),
            _ => Err(self.error_at(col, "end of line")),
        }
    }

    /// Remaining raw text and its starting column.
    pub fn rest(&mut self) -> (&'a str, usize) {
        let col = self.column();
        let text = &self.src[self.pos..];
        self.pos = self.src.len();
        (text, col)
    }
}
