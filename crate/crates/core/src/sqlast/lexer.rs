use super::SyntaxError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Keyword {
    Select,
    Distinct,
    From,
    As,
    Join,
    On,
    Where,
    Group,
    By,
    Having,
    Order,
    Asc,
    Desc,
    Limit,
    Union,
    Intersect,
    Except,
    And,
    Or,
    Not,
    Between,
    Like,
    In,
}

impl Keyword {
    pub(crate) fn lookup(word: &str) -> Option<Keyword> {
        use Keyword::*;
        Some(match word.to_ascii_lowercase().as_str() {
            "select" => Select,
            "distinct" => Distinct,
            "from" => From,
            "as" => As,
            "join" => Join,
            "on" => On,
            "where" => Where,
            "group" => Group,
            "by" => By,
            "having" => Having,
            "order" => Order,
            "asc" => Asc,
            "desc" => Desc,
            "limit" => Limit,
            "union" => Union,
            "intersect" => Intersect,
            "except" => Except,
            "and" => And,
            "or" => Or,
            "not" => Not,
            "between" => Between,
            "like" => Like,
            "in" => In,
            _ => return None,
        })
    }

    pub(crate) fn text(self) -> &'static str {
        use Keyword::*;
        match self {
            Select => "select",
            Distinct => "distinct",
            From => "from",
            As => "as",
            Join => "join",
            On => "on",
            Where => "where",
            Group => "group",
            By => "by",
            Having => "having",
            Order => "order",
            Asc => "asc",
            Desc => "desc",
            Limit => "limit",
            Union => "union",
            Intersect => "intersect",
            Except => "except",
            And => "and",
            Or => "or",
            Not => "not",
            Between => "between",
            Like => "like",
            In => "in",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Kw(Keyword),
    Ident(String),
    /// Double-quoted: an identifier where one is required, otherwise
    /// resolved against the schema and read as a string if that fails.
    Quoted(String),
    Str(String),
    Number(String),
    Comma,
    Dot,
    LParen,
    RParen,
    Star,
    Plus,
    Minus,
    Slash,
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
    Semicolon,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Kw(k) => k.text().to_string(),
            Tok::Ident(s) => s.clone(),
            Tok::Quoted(s) => format!("\"{s}\""),
            Tok::Str(s) => format!("'{s}'"),
            Tok::Number(n) => n.clone(),
            Tok::Comma => ",".into(),
            Tok::Dot => ".".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::Star => "*".into(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::Slash => "/".into(),
            Tok::Eq => "=".into(),
            Tok::Ne => "!=".into(),
            Tok::Lt => "<".into(),
            Tok::Gt => ">".into(),
            Tok::Le => "<=".into(),
            Tok::Ge => ">=".into(),
            Tok::Semicolon => ";".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

/// Tokens paired with their byte offsets; always ends with `Eof`.
pub(crate) fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b',' => single(&mut i, Tok::Comma),
            b'.' if !bytes.get(i + 1).is_some_and(u8::is_ascii_digit) => single(&mut i, Tok::Dot),
            b'(' => single(&mut i, Tok::LParen),
            b')' => single(&mut i, Tok::RParen),
            b'*' => single(&mut i, Tok::Star),
            b'+' => single(&mut i, Tok::Plus),
            b'-' => single(&mut i, Tok::Minus),
            b'/' => single(&mut i, Tok::Slash),
            b';' => single(&mut i, Tok::Semicolon),
            b'=' => {
                i += if bytes.get(i + 1) == Some(&b'=') {
                    2
                } else {
                    1
                };
                Tok::Eq
            }
            b'!' if bytes.get(i + 1) == Some(&b'=') => {
                i += 2;
                Tok::Ne
            }
            b'<' => match bytes.get(i + 1) {
                Some(b'=') => {
                    i += 2;
                    Tok::Le
                }
                Some(b'>') => {
                    i += 2;
                    Tok::Ne
                }
                _ => single(&mut i, Tok::Lt),
            },
            b'>' => match bytes.get(i + 1) {
                Some(b'=') => {
                    i += 2;
                    Tok::Ge
                }
                _ => single(&mut i, Tok::Gt),
            },
            b'\'' | b'"' | b'`' => {
                let (body, end) = quoted(text, i)?;
                i = end;
                if c == b'\'' {
                    Tok::Str(body)
                } else {
                    Tok::Quoted(body)
                }
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'_') {
                    return Err(unexpected(text, start));
                }
                Tok::Number(text[start..i].to_string())
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &text[start..i];
                match Keyword::lookup(word) {
                    Some(k) => Tok::Kw(k),
                    None => Tok::Ident(word.to_string()),
                }
            }
            _ => return Err(unexpected(text, start)),
        };
        out.push((tok, start));
    }
    out.push((Tok::Eof, text.len()));
    Ok(out)
}

fn single(i: &mut usize, tok: Tok) -> Tok {
    *i += 1;
    tok
}

fn unexpected(text: &str, at: usize) -> SyntaxError {
    let found: String = text[at..].chars().take(1).collect();
    SyntaxError {
        position: at,
        expected: vec!["token".into()],
        found,
    }
}

/// Reads a quoted run starting at `start`; the quote character is escaped by
/// doubling it. Returns the body and the offset just past the closing quote.
fn quoted(text: &str, start: usize) -> Result<(String, usize), SyntaxError> {
    let quote = text.as_bytes()[start] as char;
    let mut body = String::new();
    let mut chars = text[start + 1..].char_indices().peekable();
    while let Some((off, ch)) = chars.next() {
        if ch == quote {
            if chars.peek().map(|&(_, c)| c) == Some(quote) {
                chars.next();
                body.push(quote);
                continue;
            }
            return Ok((body, start + 1 + off + 1));
        }
        body.push(ch);
    }
    Err(SyntaxError {
        position: start,
        expected: vec![format!("closing {quote}")],
        found: "end of input".into(),
    })
}
