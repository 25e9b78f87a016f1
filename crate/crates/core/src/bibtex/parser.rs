use std::collections::{HashMap, HashSet};

use indexmap::IndexMap;

use super::{normalize_value_checked, BibEntry, BibError, MacroTable, ParseDiagnostic, ParsedBib, MONTHS};

#[derive(Debug, Clone)]
enum Part {
    Literal(String),
    Macro { name: String, line: usize },
}

#[derive(Debug)]
struct RawEntry {
    entry_type: String,
    key: String,
    fields: Vec<(String, Vec<Part>)>,
    line: usize,
}

#[derive(Debug)]
struct RawMacro {
    name: String,
    parts: Vec<Part>,
    line: usize,
}

struct Scanner {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

fn is_ident_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, '"' | '#' | '%' | '\'' | '(' | ')' | ',' | '=' | '{' | '}' | '@')
}

impl Scanner {
    fn new(text: &str) -> Self {
        Scanner {
            chars: text.chars().collect(),
            pos: 0,
            line: 1,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn syntax(&self, message: impl Into<String>) -> BibError {
        BibError::Syntax {
            line: self.line,
            message: message.into(),
        }
    }

    /// Advances to the next `@` that starts a line, or to the end of input.
    fn recover(&mut self) {
        while let Some(c) = self.bump() {
            if c == '\n' {
                let mut look = self.pos;
                while look < self.chars.len() && matches!(self.chars[look], ' ' | '\t' | '\r') {
                    look += 1;
                }
                if look < self.chars.len() && self.chars[look] == '@' {
                    while self.pos < look {
                        self.bump();
                    }
                    return;
                }
            }
        }
    }

    fn ident(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if is_ident_char(c) {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn expect(&mut self, want: char) -> Result<(), BibError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c == want => {
                self.bump();
                Ok(())
            }
            Some(c) => Err(self.syntax(format!("expected `{want}`, found `{c}`"))),
            None => Err(BibError::UnbalancedBraces { line: self.line }),
        }
    }

    /// Reads a balanced `{...}` group, returning its content without the outer braces.
    fn braced(&mut self) -> Result<String, BibError> {
        let start_line = self.line;
        self.bump();
        let mut depth = 1usize;
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(BibError::UnbalancedBraces { line: start_line }),
                Some('{') => {
                    depth += 1;
                    s.push('{');
                }
                Some('}') => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(s);
                    }
                    s.push('}');
                }
                Some(c) => s.push(c),
            }
        }
    }

    fn quoted(&mut self) -> Result<String, BibError> {
        let start_line = self.line;
        self.bump();
        let mut depth = 0usize;
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(BibError::UnbalancedBraces { line: start_line }),
                Some('"') if depth == 0 => return Ok(s),
                Some('{') => {
                    depth += 1;
                    s.push('{');
                }
                Some('}') => {
                    if depth == 0 {
                        return Err(BibError::UnbalancedBraces { line: self.line });
                    }
                    depth -= 1;
                    s.push('}');
                }
                Some(c) => s.push(c),
            }
        }
    }

    fn value(&mut self) -> Result<Vec<Part>, BibError> {
        let mut parts = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some('{') => parts.push(Part::Literal(self.braced()?)),
                Some('"') => parts.push(Part::Literal(self.quoted()?)),
                Some(c) if c.is_ascii_digit() => {
                    let mut s = String::new();
                    while let Some(d) = self.peek().filter(char::is_ascii_digit) {
                        s.push(d);
                        self.bump();
                    }
                    parts.push(Part::Literal(s));
                }
                Some(c) if is_ident_char(c) => {
                    let line = self.line;
                    let name = self.ident();
                    parts.push(Part::Macro { name, line });
                }
                Some(c) => return Err(self.syntax(format!("expected a value, found `{c}`"))),
                None => return Err(BibError::UnbalancedBraces { line: self.line }),
            }
            self.skip_ws();
            if self.peek() == Some('#') {
                self.bump();
            } else {
                return Ok(parts);
            }
        }
    }

    fn skip_block(&mut self, close: char) -> Result<(), BibError> {
        let open = if close == '}' { '{' } else { '(' };
        let start_line = self.line;
        let mut depth = 1usize;
        loop {
            match self.bump() {
                None => return Err(BibError::UnbalancedBraces { line: start_line }),
                Some(c) if c == open => depth += 1,
                Some(c) if c == close => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(());
                    }
                }
                Some(_) => {}
            }
        }
    }

    fn entry_body(&mut self, entry_type: String, close: char, line: usize) -> Result<RawEntry, BibError> {
        self.skip_ws();
        let mut key = String::new();
        while let Some(c) = self.peek() {
            if c == ',' || c == close || c == '{' || c == '}' || c.is_whitespace() {
                break;
            }
            key.push(c);
            self.bump();
        }
        self.skip_ws();
        if key.is_empty() {
            return Err(self.syntax("entry has an empty cite key"));
        }
        let mut fields: Vec<(String, Vec<Part>)> = Vec::new();
        let mut seen = HashSet::new();
        match self.peek() {
            Some(c) if c == close => {
                self.bump();
                return Ok(RawEntry {
                    entry_type,
                    key,
                    fields,
                    line,
                });
            }
            Some(',') => {
                self.bump();
            }
            Some(c) => return Err(self.syntax(format!("expected `,` after cite key, found `{c}`"))),
            None => return Err(BibError::UnbalancedBraces { line }),
        }
        loop {
            self.skip_ws();
            match self.peek() {
                None => return Err(BibError::UnbalancedBraces { line }),
                Some(c) if c == close => {
                    self.bump();
                    break;
                }
                _ => {}
            }
            let field_line = self.line;
            let name = self.ident().to_lowercase();
            if name.is_empty() {
                let found = self.peek().map(String::from).unwrap_or_default();
                return Err(self.syntax(format!("expected a field name, found `{found}`")));
            }
            self.expect('=')?;
            let parts = self.value()?;
            if !seen.insert(name.clone()) {
                return Err(BibError::DuplicateField {
                    line: field_line,
                    key,
                    field: name,
                });
            }
            fields.push((name, parts));
            self.skip_ws();
            match self.peek() {
                Some(',') => {
                    self.bump();
                }
                Some(c) if c == close => {
                    self.bump();
                    break;
                }
                Some(c) => return Err(self.syntax(format!("expected `,` or `{close}`, found `{c}`"))),
                None => return Err(BibError::UnbalancedBraces { line }),
            }
        }
        Ok(RawEntry {
            entry_type,
            key,
            fields,
            line,
        })
    }

    /// Parses one `@...` item; `self.pos` is just past the `@`.
    fn item(&mut self) -> Result<Option<Item>, BibError> {
        let line = self.line;
        self.skip_ws();
        let kind = self.ident().to_lowercase();
        if kind.is_empty() {
            return Err(self.syntax("expected an entry type after `@`"));
        }
        self.skip_ws();
        let close = match self.peek() {
            Some('{') => '}',
            Some('(') => ')',
            _ if kind == "comment" => return Ok(None),
            Some(c) => return Err(self.syntax(format!("expected `{{` or `(` after @{kind}, found `{c}`"))),
            None => return Err(self.syntax(format!("unexpected end of input after @{kind}"))),
        };
        self.bump();
        match kind.as_str() {
            "comment" => {
                self.skip_block(close)?;
                Ok(None)
            }
            "preamble" => {
                self.value()?;
                self.expect(close)?;
                Ok(None)
            }
            "string" => {
                self.skip_ws();
                let name = self.ident();
                if name.is_empty() {
                    return Err(self.syntax("@string without a macro name"));
                }
                self.expect('=')?;
                let parts = self.value()?;
                self.expect(close)?;
                Ok(Some(Item::Macro(RawMacro { name, parts, line })))
            }
            _ => Ok(Some(Item::Entry(self.entry_body(kind, close, line)?))),
        }
    }
}

enum Item {
    Entry(RawEntry),
    Macro(RawMacro),
}

struct Resolver<'a> {
    defs: HashMap<String, &'a [Part]>,
    done: HashMap<String, Result<String, BibError>>,
}

impl<'a> Resolver<'a> {
    fn lookup(&mut self, name: &str, line: usize, stack: &mut Vec<String>) -> Result<String, BibError> {
        let key = name.to_ascii_lowercase();
        if let Some(r) = self.done.get(&key) {
            return r.clone();
        }
        if stack.contains(&key) {
            return Err(BibError::CyclicMacro {
                line,
                name: name.to_string(),
            });
        }
        let Some(parts) = self.defs.get(&key).copied() else {
            return Err(BibError::UndefinedMacro {
                line,
                name: name.to_string(),
            });
        };
        stack.push(key.clone());
        let r = self.concat(parts, stack);
        stack.pop();
        self.done.insert(key, r.clone());
        r
    }

    fn concat(&mut self, parts: &[Part], stack: &mut Vec<String>) -> Result<String, BibError> {
        let mut s = String::new();
        for p in parts {
            match p {
                Part::Literal(l) => s.push_str(l),
                Part::Macro { name, line } => s.push_str(&self.lookup(name, *line, stack)?),
            }
        }
        Ok(s)
    }
}

/// Parses BibTeX text from one source file.
///
/// In strict mode the first error aborts the parse. Otherwise malformed items are
/// skipped and reported in [`ParsedBib::diagnostics`].
pub fn parse_bib(text: &str, source_id: &str, strict: bool) -> Result<ParsedBib, BibError> {
    parse_bib_with(text, source_id, strict, &MacroTable::new())
}

/// Like [`parse_bib`], with `predefined` macros (for example from files read earlier)
/// visible to this text. Definitions in `text` take precedence.
pub fn parse_bib_with(
    text: &str,
    source_id: &str,
    strict: bool,
    predefined: &MacroTable,
) -> Result<ParsedBib, BibError> {
    let mut out = ParsedBib::default();
    let fail = |err: BibError, diags: &mut Vec<ParseDiagnostic>| -> Result<(), BibError> {
        if strict {
            return Err(err);
        }
        let line = match &err {
            BibError::UnbalancedBraces { line }
            | BibError::DuplicateField { line, .. }
            | BibError::UndefinedMacro { line, .. }
            | BibError::CyclicMacro { line, .. }
            | BibError::Syntax { line, .. } => *line,
            BibError::EmptyName { .. } => 0,
        };
        let message = err.to_string();
        let message = message
            .strip_prefix(&format!("line {line}: "))
            .map(str::to_string)
            .unwrap_or(message);
        diags.push(ParseDiagnostic {
            line,
            message: format!("{message}; skipped"),
        });
        Ok(())
    };

    let mut scanner = Scanner::new(text);
    let mut items = Vec::new();
    while let Some(c) = scanner.bump() {
        if c != '@' {
            continue;
        }
        match scanner.item() {
            Ok(Some(item)) => items.push(item),
            Ok(None) => {}
            Err(e) => {
                fail(e, &mut out.diagnostics)?;
                scanner.recover();
            }
        }
    }

    let mut user_macros: Vec<&RawMacro> = Vec::new();
    let mut entries: Vec<&RawEntry> = Vec::new();
    for item in &items {
        match item {
            Item::Macro(m) => user_macros.push(m),
            Item::Entry(e) => entries.push(e),
        }
    }

    let mut month_parts: Vec<(String, Vec<Part>)> = MONTHS
        .iter()
        .map(|(abbr, full)| (abbr.to_string(), vec![Part::Literal(full.to_string())]))
        .collect();
    let mut names: Vec<&str> = predefined.names().collect();
    names.sort_unstable();
    for name in names {
        let value = predefined.get(name).unwrap_or_default();
        month_parts.push((name.to_string(), vec![Part::Literal(value.to_string())]));
    }
    let mut resolver = Resolver {
        defs: month_parts.iter().map(|(k, p)| (k.clone(), p.as_slice())).collect(),
        done: HashMap::new(),
    };
    for m in &user_macros {
        resolver.defs.insert(m.name.to_ascii_lowercase(), &m.parts);
    }
    // Later definitions win; resolve each distinct user name once, in definition order.
    let mut reported = HashSet::new();
    for m in user_macros.iter().rev() {
        let key = m.name.to_ascii_lowercase();
        if !reported.insert(key.clone()) {
            continue;
        }
        match resolver.lookup(&m.name, m.line, &mut Vec::new()) {
            Ok(v) => out.macros.insert(&m.name, &v),
            Err(e) => fail(e, &mut out.diagnostics)?,
        }
    }

    'entries: for raw in entries {
        let mut fields = IndexMap::new();
        for (name, parts) in &raw.fields {
            let value = match resolver.concat(parts, &mut Vec::new()) {
                Ok(v) => v,
                Err(e) => {
                    fail(e, &mut out.diagnostics)?;
                    continue 'entries;
                }
            };
            let (normalized, removed) = normalize_value_checked(&value);
            if removed {
                out.diagnostics.push(ParseDiagnostic {
                    line: raw.line,
                    message: format!("removed marker codepoints from `{}` in `{}`", name, raw.key),
                });
            }
            fields.insert(name.clone(), normalized);
        }
        out.entries.push(BibEntry {
            entry_type: raw.entry_type.clone(),
            cite_key: raw.key.clone(),
            fields,
            source_id: source_id.to_string(),
        });
    }
    Ok(out)
}

/// Parses raw bytes, replacing invalid UTF-8 with U+FFFD and noting it in the diagnostics.
pub fn parse_bib_bytes(bytes: &[u8], source_id: &str, strict: bool) -> Result<ParsedBib, BibError> {
    parse_bib_bytes_with(bytes, source_id, strict, &MacroTable::new())
}

/// [`parse_bib_bytes`] with predefined macros, as in [`parse_bib_with`].
pub fn parse_bib_bytes_with(
    bytes: &[u8],
    source_id: &str,
    strict: bool,
    predefined: &MacroTable,
) -> Result<ParsedBib, BibError> {
    let text = String::from_utf8_lossy(bytes);
    let lossy = matches!(text, std::borrow::Cow::Owned(_));
    let mut parsed = parse_bib_with(&text, source_id, strict, predefined)?;
    if lossy {
        parsed.diagnostics.insert(
            0,
            ParseDiagnostic {
                line: 0,
                message: "input is not valid UTF-8; invalid bytes replaced".to_string(),
            },
        );
    }
    Ok(parsed)
}
