//! Line-oriented ODD text format.
//!
//! ```text
//! Include weather is [clear, overcast, snowy]
//!
//! ## Conditional ODD Statements
//! # Exclude Datacloud 1
//! Conditional Exclude
//!     [brightness, clearness_score, contrast_score] of visibility
//!         for [clear, city-street, night] is [18.167, 0.12, 2.18]
//!         with spread 0.0031 threshold 0.5
//! ```
//!
//! The `with` line is optional. A `# Exclude Datacloud N` comment directly
//! before a block records its source cloud.

use std::fmt::Write as _;

use thiserror::Error;

use super::{ExcludeBlock, OddSpecification, DEFAULT_EXCLUDE_THRESHOLD};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

const INDENT: &str = "    ";

pub fn emit(spec: &OddSpecification) -> String {
    let mut s = String::new();
    for (feature, values) in &spec.includes {
        let mut sorted = values.clone();
        sorted.sort();
        let _ = writeln!(s, "Include {feature} is [{}]", sorted.join(", "));
    }
    if spec.excludes.is_empty() {
        return s;
    }
    if !spec.includes.is_empty() {
        s.push('\n');
    }
    s.push_str("## Conditional ODD Statements\n");
    for b in &spec.excludes {
        if let Some(id) = b.source {
            let _ = writeln!(s, "# Exclude Datacloud {id}");
        }
        s.push_str("Conditional Exclude\n");
        let _ = writeln!(s, "{INDENT}[{}] of {}", b.attributes.join(", "), b.group);
        let nums: Vec<String> = b.values.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{INDENT}{INDENT}for [{}] is [{}]", b.trigger.join(", "), nums.join(", "));
        let mut with = String::new();
        if let Some(spread) = b.spread {
            let _ = write!(with, " spread {spread}");
        }
        if b.threshold != DEFAULT_EXCLUDE_THRESHOLD {
            let _ = write!(with, " threshold {}", b.threshold);
        }
        if !with.is_empty() {
            let _ = writeln!(s, "{INDENT}{INDENT}with{with}");
        }
    }
    s
}

struct Cursor<'a> {
    line: usize,
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(line: usize, text: &'a str) -> Self {
        Self { line, text, pos: 0 }
    }

    fn error(&self, at: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column: self.text[..at].chars().count() + 1,
            message: message.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let r = self.rest();
        self.pos += r.len() - r.trim_start().len();
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.text.len()
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error(self.pos, format!("unexpected `{}`", self.rest().trim_end())))
        }
    }

    /// A run of characters that are neither whitespace nor list punctuation.
    fn word(&mut self) -> Result<(usize, &'a str), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let len = self
            .rest()
            .find(|c: char| c.is_whitespace() || matches!(c, '[' | ']' | ','))
            .unwrap_or(self.rest().len());
        if len == 0 {
            return Err(self.error(start, "expected a name"));
        }
        self.pos += len;
        Ok((start, &self.text[start..self.pos]))
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        let (at, w) = self.word().map_err(|e| ParseError {
            message: format!("expected `{kw}`"),
            ..e
        })?;
        if w != kw {
            return Err(self.error(at, format!("expected `{kw}`, found `{w}`")));
        }
        Ok(())
    }

    /// `[item, item, ...]` with items trimmed; at least one item.
    fn list(&mut self) -> Result<Vec<(usize, String)>, ParseError> {
        self.skip_ws();
        if !self.rest().starts_with('[') {
            return Err(self.error(self.pos, "expected `[`"));
        }
        let open = self.pos;
        let close = match self.rest().find(']') {
            Some(i) => self.pos + i,
            None => return Err(self.error(open, "unclosed `[`")),
        };
        let body = &self.text[open + 1..close];
        if body.contains('[') {
            return Err(self.error(open + 1 + body.find('[').unwrap_or(0), "nested `[`"));
        }
        let mut items = Vec::new();
        let mut at = open + 1;
        for raw in body.split(',') {
            let lead = raw.len() - raw.trim_start().len();
            let item = raw.trim();
            if item.is_empty() {
                return Err(self.error(at + lead, "empty list item"));
            }
            items.push((at + lead, item.to_string()));
            at += raw.len() + 1;
        }
        self.pos = close + 1;
        Ok(items)
    }

    fn number(&self, at: usize, s: &str) -> Result<f64, ParseError> {
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.error(at, format!("`{s}` is not a number"))),
        }
    }

    fn number_word(&mut self) -> Result<f64, ParseError> {
        let (at, w) = self.word()?;
        self.number(at, w)
    }
}

fn is_indented(line: &str) -> bool {
    line.starts_with([' ', '\t'])
}

fn source_comment(line: &str) -> Option<u64> {
    let body = line.trim_start().trim_start_matches('#').trim();
    body.strip_prefix("Exclude Datacloud")?.trim().parse().ok()
}

pub fn parse(input: &str) -> Result<OddSpecification, ParseError> {
    let lines: Vec<&str> = input.lines().collect();
    let mut spec = OddSpecification::default();
    let mut pending_source = None;
    let mut i = 0;
    while i < lines.len() {
        let line_no = i + 1;
        let text = lines[i];
        i += 1;
        let trimmed = text.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            if let Some(id) = source_comment(trimmed) {
                pending_source = Some(id);
            }
            continue;
        }
        let mut cur = Cursor::new(line_no, text);
        let (at, head) = cur.word()?;
        match head {
            "Include" => {
                let (fat, feature) = cur.word()?;
                cur.keyword("is")?;
                let items = cur.list()?;
                cur.finish()?;
                if spec.includes.contains_key(feature) {
                    return Err(cur.error(fat, format!("second include for `{feature}`")));
                }
                let mut values: Vec<String> = Vec::with_capacity(items.len());
                for (vat, v) in items {
                    if values.contains(&v) {
                        return Err(cur.error(vat, format!("duplicate value `{v}`")));
                    }
                    values.push(v);
                }
                spec.include(feature, values);
                pending_source = None;
            }
            "Conditional" => {
                cur.keyword("Exclude")?;
                cur.finish()?;
                let (block, used) = parse_block(&lines[i..], i + 1, line_no)?;
                i += used;
                spec.excludes.push(ExcludeBlock {
                    source: pending_source.take(),
                    ..block
                });
            }
            other => return Err(cur.error(at, format!("unknown keyword `{other}`"))),
        }
    }
    Ok(spec)
}

/// Parses the indented continuation lines of a conditional exclude.
/// Returns the block and the number of lines consumed.
fn parse_block(lines: &[&str], first_line: usize, header_line: usize) -> Result<(ExcludeBlock, usize), ParseError> {
    let missing = |what: &str| ParseError {
        line: header_line,
        column: 1,
        message: format!("conditional exclude is missing its {what} line"),
    };

    let text = *lines.first().ok_or_else(|| missing("attribute"))?;
    let mut cur = Cursor::new(first_line, text);
    if !is_indented(text) {
        return Err(cur.error(0, "expected an indented attribute list"));
    }
    let attributes: Vec<String> = cur.list()?.into_iter().map(|(_, a)| a).collect();
    cur.keyword("of")?;
    let (_, group) = cur.word()?;
    let group = group.to_string();
    cur.finish()?;

    let text = *lines.get(1).ok_or_else(|| missing("`for`"))?;
    let mut cur = Cursor::new(first_line + 1, text);
    if !is_indented(text) {
        return Err(cur.error(0, "expected an indented `for` line"));
    }
    cur.keyword("for")?;
    let trigger: Vec<String> = cur.list()?.into_iter().map(|(_, t)| t).collect();
    cur.keyword("is")?;
    let list_at = {
        cur.skip_ws();
        cur.pos
    };
    let values = cur
        .list()?
        .into_iter()
        .map(|(at, v)| cur.number(at, &v))
        .collect::<Result<Vec<f64>, _>>()?;
    cur.finish()?;
    if values.len() != attributes.len() {
        return Err(cur.error(
            list_at,
            format!("{} attributes but {} values", attributes.len(), values.len()),
        ));
    }

    let mut block = ExcludeBlock {
        attributes,
        group,
        trigger,
        values,
        source: None,
        spread: None,
        threshold: DEFAULT_EXCLUDE_THRESHOLD,
    };
    let mut used = 2;
    if let Some(&text) = lines.get(2) {
        if is_indented(text) && text.trim_start().starts_with("with") {
            let mut cur = Cursor::new(first_line + 2, text);
            cur.keyword("with")?;
            let (mut spread, mut threshold) = (false, false);
            while !cur.at_end() {
                let (at, key) = cur.word()?;
                match key {
                    "spread" if !spread && !threshold => {
                        block.spread = Some(cur.number_word()?);
                        spread = true;
                    }
                    "threshold" if !threshold => {
                        block.threshold = cur.number_word()?;
                        threshold = true;
                    }
                    _ => return Err(cur.error(at, format!("unexpected `{key}`"))),
                }
            }
            if !spread && !threshold {
                return Err(cur.error(text.len(), "expected `spread` or `threshold`"));
            }
            used = 3;
        }
    }
    Ok((block, used))
}
