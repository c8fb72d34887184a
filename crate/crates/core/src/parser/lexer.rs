use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Lt,
    Gt,
    Le,
    Ge,
    EqEq,
    Ne,
    Comma,
    Semi,
    Colon,
    Dot,
    At,
    Plus,
    Minus,
    Star,
    Bar,
    BarBar,
    AndAnd,
    Bang,
    Assign,
    Eq,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Le => "<=",
            Tok::Ge => ">=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Dot => ".",
            Tok::At => "@",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Bar => "|",
            Tok::BarBar => "||",
            Tok::AndAnd => "&&",
            Tok::Bang => "!",
            Tok::Assign => ":=",
            Tok::Eq => "=",
            _ => "?",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, msg: String| ParseError { line, col, message: msg };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line: tl, col: tc });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            col += i - start;
            let text: String = chars[start..i].iter().collect();
            let n = text.parse::<i64>().map_err(|_| err(tl, tc, format!("integer literal `{text}` out of range")))?;
            out.push(Token { tok: Tok::Int(n), line: tl, col: tc });
            continue;
        }
        if c == '"' || c == '\'' {
            let quote = c;
            let mut s = String::new();
            advance(1, &mut i, &mut col);
            loop {
                match chars.get(i) {
                    None | Some('\n') => return Err(err(tl, tc, "unterminated string literal".into())),
                    Some(&ch) if ch == quote => {
                        advance(1, &mut i, &mut col);
                        break;
                    }
                    Some('\\') => {
                        match chars.get(i + 1) {
                            Some(&e @ ('\\' | '"' | '\'')) => s.push(e),
                            _ => return Err(err(line, col, "invalid escape sequence".into())),
                        }
                        advance(2, &mut i, &mut col);
                    }
                    Some(&ch) => {
                        s.push(ch);
                        advance(1, &mut i, &mut col);
                    }
                }
            }
            out.push(Token { tok: Tok::Str(s), line: tl, col: tc });
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let tok2 = match two.as_str() {
            "<=" => Some(Tok::Le),
            ">=" => Some(Tok::Ge),
            "==" => Some(Tok::EqEq),
            "!=" => Some(Tok::Ne),
            "||" => Some(Tok::BarBar),
            "&&" => Some(Tok::AndAnd),
            ":=" => Some(Tok::Assign),
            _ => None,
        };
        if let Some(tok) = tok2 {
            out.push(Token { tok, line: tl, col: tc });
            advance(2, &mut i, &mut col);
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '<' => Tok::Lt,
            '>' => Tok::Gt,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            ':' => Tok::Colon,
            '.' => Tok::Dot,
            '@' => Tok::At,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '|' => Tok::Bar,
            '!' => Tok::Bang,
            '=' => Tok::Eq,
            other => return Err(err(tl, tc, format!("unexpected character `{other}`"))),
        };
        out.push(Token { tok, line: tl, col: tc });
        advance(1, &mut i, &mut col);
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

/// Cursor over a token stream with backtracking and furthest-error tracking.
pub struct Cursor {
    toks: Vec<Token>,
    pub pos: usize,
    furthest: Option<(usize, ParseError)>,
}

impl Cursor {
    pub fn new(toks: Vec<Token>) -> Self {
        Cursor { toks, pos: 0, furthest: None }
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    pub fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn at(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    pub fn at_ident(&self, name: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == name)
    }

    pub fn eat(&mut self, t: &Tok) -> bool {
        if self.at(t) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn eat_ident(&mut self, name: &str) -> bool {
        if self.at_ident(name) {
            self.next();
            true
        } else {
            false
        }
    }

    /// Records an error at the current token and returns it.
    pub fn error(&mut self, message: impl Into<String>) -> ParseError {
        let t = &self.toks[self.pos];
        let e = ParseError { line: t.line, col: t.col, message: message.into() };
        match &self.furthest {
            Some((p, _)) if *p > self.pos => {}
            _ => self.furthest = Some((self.pos, e.clone())),
        }
        e
    }

    pub fn expected(&mut self, what: &str) -> ParseError {
        let found = self.peek().describe();
        self.error(format!("expected {what}, found {found}"))
    }

    pub fn expect(&mut self, t: &Tok) -> Result<(), ParseError> {
        if self.eat(t) {
            Ok(())
        } else {
            let what = format!("`{}`", t.symbol());
            Err(self.expected(&what))
        }
    }

    pub fn expect_ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            _ => Err(self.expected("an identifier")),
        }
    }

    pub fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_ident(kw) {
            Ok(())
        } else {
            Err(self.expected(&format!("`{kw}`")))
        }
    }

    /// The error that got furthest into the input; used when every
    /// alternative of a backtracking choice failed.
    pub fn best_error(&self, fallback: ParseError) -> ParseError {
        match &self.furthest {
            Some((_, e)) if (e.line, e.col) > (fallback.line, fallback.col) => e.clone(),
            _ => fallback,
        }
    }

    /// Runs `f`, restoring the position if it fails.
    pub fn attempt<T>(&mut self, f: impl FnOnce(&mut Self) -> Result<T, ParseError>) -> Result<T, ParseError> {
        let saved = self.pos;
        let r = f(self);
        if r.is_err() {
            self.pos = saved;
        }
        r
    }
}
