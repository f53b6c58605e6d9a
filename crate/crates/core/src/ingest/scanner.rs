//! Character scanner shared by the N-Triples and Turtle readers.

use super::IngestError;

pub(crate) struct Scanner<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Scanner<'a> {
    pub fn new(src: &'a str) -> Self {
        Scanner { src, pos: 0 }
    }

    pub fn pos(&self) -> usize {
        self.pos
    }

    pub fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    pub fn rest_from(&self, start: usize) -> &'a str {
        &self.src[start..self.pos]
    }

    pub fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    pub fn peek_nth(&self, n: usize) -> Option<char> {
        self.rest().chars().nth(n)
    }

    pub fn starts_with(&self, s: &str) -> bool {
        self.rest().starts_with(s)
    }

    pub fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    pub fn advance(&mut self, bytes: usize) {
        self.pos += bytes;
    }

    pub fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    pub fn is_eof(&self) -> bool {
        self.pos >= self.src.len()
    }

    /// (line, column), both 1-based, of a byte offset.
    pub fn location(&self, at: usize) -> (usize, usize) {
        let before = &self.src[..at.min(self.src.len())];
        let line = before.matches('\n').count() + 1;
        let line_start = before.rfind('\n').map(|i| i + 1).unwrap_or(0);
        let column = before[line_start..].chars().count() + 1;
        (line, column)
    }

    pub fn error_at(&self, at: usize, message: impl Into<String>) -> IngestError {
        let (line, column) = self.location(at);
        IngestError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    pub fn error(&self, message: impl Into<String>) -> IngestError {
        self.error_at(self.pos, message)
    }

    pub fn unsupported(&self, construct: &str) -> IngestError {
        let (line, column) = self.location(self.pos);
        IngestError::Unsupported {
            construct: construct.to_string(),
            line,
            column,
        }
    }

    /// Skips spaces and tabs only.
    pub fn skip_inline_ws(&mut self) {
        while matches!(self.peek(), Some(' ') | Some('\t')) {
            self.pos += 1;
        }
    }

    /// Skips all whitespace and `#` comments.
    pub fn skip_ws_and_comments(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => self.skip_comment(),
                _ => break,
            }
        }
    }

    pub fn skip_comment(&mut self) {
        while let Some(c) = self.peek() {
            if c == '\n' || c == '\r' {
                break;
            }
            self.bump();
        }
    }

    /// `<...>` with `\u`/`\U` escapes decoded. Positioned on `<`.
    pub fn read_iriref(&mut self) -> Result<String, IngestError> {
        let start = self.pos;
        if !self.eat('<') {
            return Err(self.error("expected '<'"));
        }
        let mut out = String::new();
        loop {
            let at = self.pos;
            match self.bump() {
                None => return Err(self.error_at(start, "unterminated IRI")),
                Some('>') => break,
                Some('\\') => match self.bump() {
                    Some('u') => out.push(self.read_hex_escape(4, at)?),
                    Some('U') => out.push(self.read_hex_escape(8, at)?),
                    _ => return Err(self.error_at(at, "invalid escape in IRI")),
                },
                Some(c) if c == ' ' || c == '<' || c == '"' || c == '\n' || c == '\r' => {
                    return Err(self.error_at(at, format!("invalid character {c:?} in IRI")));
                }
                Some(c) => out.push(c),
            }
        }
        Ok(out)
    }

    /// `_:label`. Positioned on `_`.
    pub fn read_blank_label(&mut self) -> Result<String, IngestError> {
        if !self.starts_with("_:") {
            return Err(self.error("expected blank node label"));
        }
        self.advance(2);
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' || c == '-' || c == '.' {
                self.bump();
            } else {
                break;
            }
        }
        // A label may not end with '.'; that dot terminates the statement.
        while self.src[start..self.pos].ends_with('.') {
            self.pos -= 1;
        }
        if self.pos == start {
            return Err(self.error("empty blank node label"));
        }
        Ok(self.src[start..self.pos].to_string())
    }

    /// Quoted string; handles `"`, `'` and their triple-quoted long forms when
    /// `allow_long` is set. Positioned on the opening quote.
    pub fn read_string(&mut self, allow_single: bool, allow_long: bool) -> Result<String, IngestError> {
        let start = self.pos;
        let quote = match self.peek() {
            Some('"') => '"',
            Some('\'') if allow_single => '\'',
            _ => return Err(self.error("expected string literal")),
        };
        let triple: String = std::iter::repeat_n(quote, 3).collect();
        let long = allow_long && self.starts_with(&triple);
        self.advance(if long { 3 } else { 1 });
        let mut out = String::new();
        loop {
            if long && self.starts_with(&triple) {
                // Up to two quotes may precede the closing triple.
                let mut extra = 0;
                while self.peek_nth(3 + extra) == Some(quote) && extra < 2 {
                    extra += 1;
                }
                for _ in 0..extra {
                    out.push(quote);
                }
                self.advance(3 + extra);
                break;
            }
            let at = self.pos;
            match self.bump() {
                None => return Err(self.error_at(start, "unterminated string literal")),
                Some(c) if c == quote && !long => break,
                Some('\\') => out.push(self.read_string_escape(at)?),
                Some(c @ ('\n' | '\r')) if !long => {
                    return Err(self.error_at(at, format!("raw {c:?} in string literal")));
                }
                Some(c) => out.push(c),
            }
        }
        Ok(out)
    }

    fn read_string_escape(&mut self, at: usize) -> Result<char, IngestError> {
        Ok(match self.bump() {
            Some('t') => '\t',
            Some('b') => '\u{8}',
            Some('n') => '\n',
            Some('r') => '\r',
            Some('f') => '\u{c}',
            Some('"') => '"',
            Some('\'') => '\'',
            Some('\\') => '\\',
            Some('u') => self.read_hex_escape(4, at)?,
            Some('U') => self.read_hex_escape(8, at)?,
            _ => return Err(self.error_at(at, "invalid escape sequence")),
        })
    }

    fn read_hex_escape(&mut self, digits: usize, at: usize) -> Result<char, IngestError> {
        let hex = self.rest().get(..digits).unwrap_or("");
        if hex.len() != digits || !hex.chars().all(|c| c.is_ascii_hexdigit()) {
            return Err(self.error_at(at, "malformed unicode escape"));
        }
        let code = u32::from_str_radix(hex, 16).map_err(|_| self.error_at(at, "malformed unicode escape"))?;
        self.advance(digits);
        char::from_u32(code).ok_or_else(|| self.error_at(at, "escape is not a unicode scalar value"))
    }

    /// `@lang-tag`, positioned on `@`.
    pub fn read_langtag(&mut self) -> Result<String, IngestError> {
        if !self.eat('@') {
            return Err(self.error("expected '@'"));
        }
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '-' {
                self.bump();
            } else {
                break;
            }
        }
        let tag = &self.src[start..self.pos];
        if tag.is_empty() || !tag.starts_with(|c: char| c.is_ascii_alphabetic()) {
            return Err(self.error_at(start, "malformed language tag"));
        }
        Ok(tag.to_string())
    }
}
