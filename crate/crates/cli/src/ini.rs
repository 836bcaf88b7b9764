//! Sectioned `key = value` files.
//!
//! Values are numbers, booleans, double-quoted strings or bracketed lists of
//! values; a list may span several lines. `#` starts a comment outside strings.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Bool(bool),
    Str(String),
    List(Vec<Value>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(x) => write!(f, "{x:?}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => write!(f, "\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"")),
            Value::List(items) => {
                write!(f, "[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "]")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct IniError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> IniError {
    IniError { line, message: message.into() }
}

/// One `key = value` with the line it started on.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: Value,
    pub line: usize,
}

/// Sections in file order; keys before any header live in section `""`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    pub sections: Vec<(String, BTreeMap<String, Entry>)>,
}

impl Document {
    pub fn section(&self, name: &str) -> Option<&BTreeMap<String, Entry>> {
        self.sections.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    pub fn section_names(&self) -> impl Iterator<Item = &str> {
        self.sections.iter().map(|(n, _)| n.as_str())
    }
}

fn strip_comment(line: &str) -> &str {
    let mut in_str = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        match c {
            '\\' if in_str && !escaped => {
                escaped = true;
                continue;
            }
            '"' if !escaped => in_str = !in_str,
            '#' if !in_str => return &line[..i],
            _ => {}
        }
        escaped = false;
    }
    line
}

/// Net bracket depth of `s`, ignoring brackets inside strings.
fn depth(s: &str) -> i64 {
    let mut d = 0;
    let mut in_str = false;
    let mut escaped = false;
    for c in s.chars() {
        match c {
            '\\' if in_str && !escaped => {
                escaped = true;
                continue;
            }
            '"' if !escaped => in_str = !in_str,
            '[' if !in_str => d += 1,
            ']' if !in_str => d -= 1,
            _ => {}
        }
        escaped = false;
    }
    d
}

pub fn parse(text: &str) -> Result<Document, IniError> {
    let mut doc = Document::default();
    let mut current = String::new();
    let mut lines = text.lines().enumerate().peekable();
    while let Some((idx, raw)) = lines.next() {
        let line_no = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            if !line.contains('=') {
                let name = rest.strip_suffix(']').ok_or_else(|| err(line_no, "unterminated section header"))?.trim();
                if name.is_empty() {
                    return Err(err(line_no, "empty section name"));
                }
                if doc.section(name).is_some() {
                    return Err(err(line_no, format!("duplicate section [{name}]")));
                }
                current = name.to_string();
                doc.sections.push((current.clone(), BTreeMap::new()));
                continue;
            }
        }
        let (key, value) = line.split_once('=').ok_or_else(|| err(line_no, "expected `key = value`"))?;
        let key = key.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '-') {
            return Err(err(line_no, format!("invalid key `{key}`")));
        }
        let mut value = value.trim().to_string();
        while depth(&value) > 0 {
            let (_, more) = lines.next().ok_or_else(|| err(line_no, "unterminated list"))?;
            value.push(' ');
            value.push_str(strip_comment(more).trim());
        }
        let parsed = ValueParser { s: value.as_bytes(), pos: 0, line: line_no }.parse_all()?;
        if doc.section(&current).is_none() {
            doc.sections.push((current.clone(), BTreeMap::new()));
        }
        let section = &mut doc.sections.iter_mut().find(|(n, _)| n == &current).expect("section exists").1;
        if section.insert(key.to_string(), Entry { value: parsed, line: line_no }).is_some() {
            return Err(err(line_no, format!("duplicate key `{key}`")));
        }
    }
    Ok(doc)
}

struct ValueParser<'a> {
    s: &'a [u8],
    pos: usize,
    line: usize,
}

impl ValueParser<'_> {
    fn parse_all(mut self) -> Result<Value, IniError> {
        let v = self.value()?;
        self.ws();
        if self.pos != self.s.len() {
            return Err(err(self.line, format!("unexpected trailing input at column {}", self.pos + 1)));
        }
        Ok(v)
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn value(&mut self) -> Result<Value, IniError> {
        self.ws();
        match self.s.get(self.pos) {
            None => Err(err(self.line, "missing value")),
            Some(b'"') => self.string(),
            Some(b'[') => self.list(),
            Some(_) => self.bare(),
        }
    }

    fn string(&mut self) -> Result<Value, IniError> {
        self.pos += 1;
        let mut out = Vec::new();
        while let Some(&c) = self.s.get(self.pos) {
            self.pos += 1;
            match c {
                b'"' => return Ok(Value::Str(String::from_utf8(out).map_err(|_| err(self.line, "invalid UTF-8"))?)),
                b'\\' => {
                    let e = *self.s.get(self.pos).ok_or_else(|| err(self.line, "unterminated string"))?;
                    self.pos += 1;
                    out.push(e);
                }
                _ => out.push(c),
            }
        }
        Err(err(self.line, "unterminated string"))
    }

    fn list(&mut self) -> Result<Value, IniError> {
        self.pos += 1;
        let mut items = Vec::new();
        self.ws();
        if self.s.get(self.pos) == Some(&b']') {
            self.pos += 1;
            return Ok(Value::List(items));
        }
        loop {
            items.push(self.value()?);
            self.ws();
            match self.s.get(self.pos) {
                Some(b',') => self.pos += 1,
                Some(b']') => {
                    self.pos += 1;
                    return Ok(Value::List(items));
                }
                _ => return Err(err(self.line, "expected `,` or `]` in list")),
            }
        }
    }

    fn bare(&mut self) -> Result<Value, IniError> {
        let start = self.pos;
        while self.pos < self.s.len() && !matches!(self.s[self.pos], b',' | b']' | b'[') {
            self.pos += 1;
        }
        let tok = std::str::from_utf8(&self.s[start..self.pos]).expect("ASCII delimiters").trim();
        match tok {
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            _ => tok.parse::<f64>().map(Value::Num).map_err(|_| {
                err(self.line, format!("`{tok}` is not a number, boolean, quoted string or list"))
            }),
        }
    }
}
