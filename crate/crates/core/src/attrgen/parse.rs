//! Extraction of quoted-string lists and yes/no verdicts from free-form
//! chat responses.

use std::collections::HashSet;

use thiserror::Error;

use crate::model::normalize_name;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no bracketed list of quoted strings in response: {snippet:?}")]
pub struct ParseError {
    pub snippet: String,
}

impl ParseError {
    fn new(text: &str) -> Self {
        ParseError {
            snippet: text.chars().take(120).collect(),
        }
    }
}

/// Returns the normalized items of the first balanced `[...]` list made only
/// of quoted strings, keeping the first occurrence of duplicates.
///
/// Code fences, surrounding prose, single/double and curly quotes, trailing
/// commas and nested lists are tolerated. A closing quote only ends a string
/// when it is followed by `,` or `]`, so `'levi's logo'` parses as one item.
pub fn parse_list_response(text: &str) -> Result<Vec<String>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    for start in (0..chars.len()).filter(|&i| chars[i] == '[') {
        let Some(raw) = list_at(&chars, start) else {
            continue;
        };
        let mut seen = HashSet::new();
        let items: Vec<String> = raw
            .iter()
            .map(|s| normalize_name(s))
            .filter(|s| !s.is_empty() && seen.insert(s.clone()))
            .collect();
        if !items.is_empty() {
            return Ok(items);
        }
    }
    Err(ParseError::new(text))
}

fn closing_quote(open: char) -> Option<char> {
    match open {
        '"' => Some('"'),
        '\'' => Some('\''),
        '\u{201c}' => Some('\u{201d}'),
        '\u{2018}' => Some('\u{2019}'),
        _ => None,
    }
}

fn list_at(chars: &[char], start: usize) -> Option<Vec<String>> {
    let mut items = Vec::new();
    let mut depth = 0usize;
    let mut i = start;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '[' => depth += 1,
            ']' => {
                depth -= 1;
                if depth == 0 {
                    return Some(items);
                }
            }
            ',' => {}
            c if c.is_whitespace() => {}
            c => {
                let close = closing_quote(c)?;
                let (item, end) = quoted_at(chars, i + 1, close)?;
                items.push(item);
                i = end;
            }
        }
        i += 1;
    }
    None
}

// Reads a string body starting at `from`; returns it with the index of the closing quote.
fn quoted_at(chars: &[char], from: usize, close: char) -> Option<(String, usize)> {
    let mut out = String::new();
    let mut i = from;
    while i < chars.len() {
        let c = chars[i];
        if c == '\\' && i + 1 < chars.len() {
            out.push(match chars[i + 1] {
                'n' | 't' | 'r' => ' ',
                other => other,
            });
            i += 2;
            continue;
        }
        if c == '\n' {
            return None;
        }
        if c == close && terminates(chars, i + 1) {
            return Some((out, i));
        }
        out.push(c);
        i += 1;
    }
    None
}

fn terminates(chars: &[char], from: usize) -> bool {
    chars[from..]
        .iter()
        .find(|c| !c.is_whitespace())
        .is_none_or(|&c| c == ',' || c == ']')
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum YesNo {
    Yes,
    No,
    Ambiguous,
}

/// Classifies a response by its first alphabetic token.
pub fn parse_yes_no(text: &str) -> YesNo {
    let token: String = text
        .chars()
        .skip_while(|c| !c.is_alphabetic())
        .take_while(|c| c.is_alphabetic())
        .collect();
    match token.to_lowercase().as_str() {
        "yes" => YesNo::Yes,
        "no" => YesNo::No,
        _ => YesNo::Ambiguous,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fenced_python_list_dedups() {
        let got = parse_list_response("```python\n['Silk', 'leather', 'silk']\n```").unwrap();
        assert_eq!(got, vec!["silk", "leather"]);
    }

    #[test]
    fn prose_prefix() {
        let got = parse_list_response("Sure! [\"forest habitat\", \"wetland habitat\"]").unwrap();
        assert_eq!(got, vec!["forest habitat", "wetland habitat"]);
    }

    #[test]
    fn no_list() {
        assert!(parse_list_response("I cannot answer that.").is_err());
        assert!(parse_list_response("[]").is_err());
        assert!(parse_list_response("[color, size]").is_err());
        assert!(parse_list_response("['unterminated").is_err());
    }

    #[test]
    fn apostrophes_inside_single_quotes() {
        let got = parse_list_response("['gucci logo', 'levi's logo']").unwrap();
        assert_eq!(got, vec!["gucci logo", "levi's logo"]);
    }

    #[test]
    fn skips_non_list_brackets() {
        let got = parse_list_response("[Note] here you go: ['a', 'b',]").unwrap();
        assert_eq!(got, vec!["a", "b"]);
    }

    #[test]
    fn yes_no() {
        assert_eq!(parse_yes_no("Yes. These are all physical items..."), YesNo::Yes);
        assert_eq!(parse_yes_no("no, these describe holistic qualities"), YesNo::No);
        assert_eq!(parse_yes_no("They are items."), YesNo::Ambiguous);
        assert_eq!(parse_yes_no("**YES** - all objects"), YesNo::Yes);
        assert_eq!(parse_yes_no("Nope"), YesNo::Ambiguous);
        assert_eq!(parse_yes_no(""), YesNo::Ambiguous);
    }
}
