use super::ast::Loc;
use super::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Name(String),
    Int(i64),
    Float(f64),
    Str(String),
    Kw(Keyword),
    /// Operator or punctuation, by its source text.
    Op(&'static str),
    Newline,
    Indent,
    Dedent,
    Eof,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keyword {
    Def,
    While,
    If,
    Elif,
    Else,
    Return,
    Assert,
    And,
    Or,
    Not,
    True,
    False,
}

fn keyword(s: &str) -> Option<Keyword> {
    Some(match s {
        "def" => Keyword::Def,
        "while" => Keyword::While,
        "if" => Keyword::If,
        "elif" => Keyword::Elif,
        "else" => Keyword::Else,
        "return" => Keyword::Return,
        "assert" => Keyword::Assert,
        "and" => Keyword::And,
        "or" => Keyword::Or,
        "not" => Keyword::Not,
        "True" => Keyword::True,
        "False" => Keyword::False,
        _ => return None,
    })
}

// Longest match first.
const OPERATORS: [&str; 33] = [
    "<<=", ">>=", "//=", "==", "!=", "<=", ">=", "<<", ">>", "//", "+=", "-=", "*=", "/=", "%=",
    "|=", "^=", "&=", "+", "-", "*", "/", "%", "|", "^", "&", "<", ">", "=", "(", ")", "[", "]",
];

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub loc: Loc,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut indents: Vec<usize> = vec![0];
    let mut last_line = 0u32;

    for (idx, raw) in source.lines().enumerate() {
        let line_no = idx as u32 + 1;
        last_line = line_no;
        let chars: Vec<char> = raw.chars().collect();
        let mut width = 0usize;
        while width < chars.len() && chars[width] == ' ' {
            width += 1;
        }
        if width < chars.len() && chars[width] == '\t' {
            return Err(ParseError::new(line_no, width as u32 + 1, "tab in indentation"));
        }
        if width == chars.len() || chars[width] == '#' {
            continue;
        }

        let current = *indents.last().expect("indent stack never empty");
        let first = Loc::new(line_no, width as u32 + 1);
        if width > current {
            indents.push(width);
            out.push(Token { tok: Tok::Indent, loc: first });
        } else {
            while width < *indents.last().expect("indent stack never empty") {
                indents.pop();
                out.push(Token { tok: Tok::Dedent, loc: first });
            }
            if width != *indents.last().expect("indent stack never empty") {
                return Err(ParseError::new(line_no, first.col, "inconsistent dedent"));
            }
        }

        lex_line(&chars, width, line_no, &mut out)?;
        out.push(Token {
            tok: Tok::Newline,
            loc: Loc::new(line_no, chars.len() as u32 + 1),
        });
    }

    let end = Loc::new(last_line + 1, 1);
    while indents.len() > 1 {
        indents.pop();
        out.push(Token { tok: Tok::Dedent, loc: end });
    }
    out.push(Token { tok: Tok::Eof, loc: end });
    Ok(out)
}

fn lex_line(chars: &[char], start: usize, line: u32, out: &mut Vec<Token>) -> Result<(), ParseError> {
    let mut i = start;
    while i < chars.len() {
        let c = chars[i];
        let loc = Loc::new(line, i as u32 + 1);
        if c == ' ' {
            i += 1;
            continue;
        }
        if c == '\t' {
            return Err(ParseError::new(line, loc.col, "tab character"));
        }
        if c == '#' {
            break;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let s = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[s..i].iter().collect();
            let tok = match keyword(&word) {
                Some(k) => Tok::Kw(k),
                None => Tok::Name(word),
            };
            out.push(Token { tok, loc });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let (tok, next) = lex_number(chars, i, loc)?;
            out.push(Token { tok, loc });
            i = next;
            continue;
        }
        if c == '"' || c == '\'' {
            let (s, next) = lex_string(chars, i, loc)?;
            out.push(Token { tok: Tok::Str(s), loc });
            i = next;
            continue;
        }
        if c == ',' || c == ':' {
            out.push(Token {
                tok: Tok::Op(if c == ',' { "," } else { ":" }),
                loc,
            });
            i += 1;
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match OPERATORS.iter().find(|op| rest.starts_with(**op)) {
            Some(op) => {
                out.push(Token { tok: Tok::Op(op), loc });
                i += op.len();
            }
            None => {
                return Err(ParseError::new(line, loc.col, format!("unexpected character {c:?}")))
            }
        }
    }
    Ok(())
}

fn lex_number(chars: &[char], start: usize, loc: Loc) -> Result<(Tok, usize), ParseError> {
    let mut i = start;
    let mut is_float = false;
    while i < chars.len() && chars[i].is_ascii_digit() {
        i += 1;
    }
    if i < chars.len() && chars[i] == '.' {
        is_float = true;
        i += 1;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
    }
    if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
        let mut j = i + 1;
        if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
            j += 1;
        }
        if j < chars.len() && chars[j].is_ascii_digit() {
            is_float = true;
            i = j;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
        }
    }
    let text: String = chars[start..i].iter().collect();
    let tok = if is_float {
        Tok::Float(
            text.parse()
                .map_err(|_| ParseError::new(loc.line, loc.col, "malformed float literal"))?,
        )
    } else {
        Tok::Int(
            text.parse()
                .map_err(|_| ParseError::new(loc.line, loc.col, "integer literal out of range"))?,
        )
    };
    Ok((tok, i))
}

fn lex_string(chars: &[char], start: usize, loc: Loc) -> Result<(String, usize), ParseError> {
    let quote = chars[start];
    let mut i = start + 1;
    let mut s = String::new();
    while i < chars.len() {
        match chars[i] {
            c if c == quote => return Ok((s, i + 1)),
            '\\' => {
                let esc = chars
                    .get(i + 1)
                    .ok_or_else(|| ParseError::new(loc.line, loc.col, "unterminated string"))?;
                s.push(match esc {
                    'n' => '\n',
                    't' => '\t',
                    '\\' => '\\',
                    '"' => '"',
                    '\'' => '\'',
                    other => {
                        return Err(ParseError::new(
                            loc.line,
                            i as u32 + 1,
                            format!("unknown escape \\{other}"),
                        ))
                    }
                });
                i += 2;
            }
            c => {
                s.push(c);
                i += 1;
            }
        }
    }
    Err(ParseError::new(loc.line, loc.col, "unterminated string"))
}
