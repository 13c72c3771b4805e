//! Reference tokenizer: split on whitespace, then split off punctuation.
//!
//! Text sent to the external parser must be tokenized by the same rule, or
//! alignment will fail.

/// Punctuation that stays inside a token when flanked by alphanumerics
/// (`well-known`, `don't`, `3.5`, `1,000`).
const WORD_INTERNAL: [char; 4] = ['-', '\'', '.', ','];

pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        split_chunk(chunk, &mut out);
    }
    out
}

fn split_chunk(chunk: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = chunk.chars().collect();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let is_break = if c.is_alphanumeric() {
            false
        } else if WORD_INTERNAL.contains(&c) {
            let prev = i > 0 && chars[i - 1].is_alphanumeric();
            let next = chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
            !(prev && next)
        } else {
            !is_word_symbol(c)
        };
        if is_break {
            if !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
            out.push(c.to_string());
        } else {
            current.push(c);
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
}

fn is_word_symbol(c: char) -> bool {
    !c.is_ascii_punctuation() && !matches!(c, '“' | '”' | '‘' | '’' | '…' | '\u{2013}' | '\u{2014}')
}
