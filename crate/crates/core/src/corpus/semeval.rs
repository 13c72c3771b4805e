//! SemEval-2010 Task 8 text format.
//!
//! ```text
//! 1	"The <e1>singer</e1> caused a <e2>commotion</e2>."
//! Cause-Effect(e1,e2)
//! Comment: optional
//!
//! ```

#![allow(clippy::tabs_in_doc_comments)]

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::label::DirectedLabel;
use super::tokenize::tokenize;
use super::{RawInstance, Span};
use crate::error::{Error, Result};

const MARKERS: [&str; 4] = ["<e1>", "</e1>", "<e2>", "</e2>"];

pub fn parse_semeval_file(path: &Path) -> Result<Vec<RawInstance>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_semeval(&text)
}

pub fn parse_semeval(text: &str) -> Result<Vec<RawInstance>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).peekable();

    while let Some((lineno, line)) = lines.next() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| Error::SemEval {
            line: lineno,
            message,
        };
        let (id, sentence) = parse_header(line).map_err(err)?;
        if !seen.insert(id) {
            return Err(err(format!("duplicate instance id {id}")));
        }
        let (tokens, e1, e2) = parse_sentence(sentence).map_err(err)?;

        let (label_lineno, label_line) = match lines.next() {
            Some((n, l)) if !l.trim().is_empty() => (n, l),
            _ => return Err(err(format!("instance {id} has no label line"))),
        };
        let label: DirectedLabel = label_line.parse().map_err(|e| Error::SemEval {
            line: label_lineno,
            message: format!("{e}"),
        })?;

        while let Some((_, l)) = lines.peek() {
            if l.trim_start().starts_with("Comment") {
                lines.next();
            } else {
                break;
            }
        }
        if let Some((n, l)) = lines.peek() {
            if !l.trim().is_empty() {
                return Err(Error::SemEval {
                    line: *n,
                    message: "expected blank line after record".into(),
                });
            }
        }

        out.push(RawInstance {
            id,
            tokens,
            e1,
            e2,
            label,
        });
    }
    Ok(out)
}

fn parse_header(line: &str) -> std::result::Result<(u64, &str), String> {
    let (id, rest) = line
        .split_once('\t')
        .or_else(|| line.split_once(' '))
        .ok_or_else(|| "expected `ID<TAB>\"sentence\"`".to_string())?;
    let id: u64 = id
        .trim()
        .parse()
        .map_err(|_| format!("bad instance id {:?}", id.trim()))?;
    let rest = rest.trim();
    let sentence = rest
        .strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .ok_or_else(|| "sentence must be enclosed in double quotes".to_string())?;
    Ok((id, sentence))
}

/// Tokenizes a marked sentence and locates both entity spans.
pub(crate) fn parse_sentence(
    sentence: &str,
) -> std::result::Result<(Vec<String>, Span, Span), String> {
    let mut positions = Vec::with_capacity(4);
    for marker in MARKERS {
        let mut found = sentence.match_indices(marker);
        let (pos, _) = found
            .next()
            .ok_or_else(|| format!("missing entity marker {marker}"))?;
        if found.next().is_some() {
            return Err(format!("entity marker {marker} appears more than once"));
        }
        positions.push((pos, marker));
    }
    if positions[0].0 > positions[1].0 || positions[2].0 > positions[3].0 {
        return Err("entity close marker precedes its open marker".into());
    }
    positions.sort();
    // Opening and closing markers of one entity must be adjacent in text order.
    let nested = positions[0].1[1..] != positions[1].1[2..] || positions[2].1[1..] != positions[3].1[2..];
    if nested {
        return Err("entity spans overlap".into());
    }

    let mut tokens = Vec::new();
    let mut spans = [None, None];
    let mut cursor = 0;
    let mut open_at = 0;
    for (pos, marker) in positions {
        tokens.extend(tokenize(&sentence[cursor..pos]));
        cursor = pos + marker.len();
        let which = usize::from(marker.contains('2'));
        if marker.starts_with("</") {
            if tokens.len() == open_at {
                return Err(format!("entity e{} is empty", which + 1));
            }
            spans[which] = Some(Span::new(open_at, tokens.len() - 1));
        } else {
            open_at = tokens.len();
        }
    }
    tokens.extend(tokenize(&sentence[cursor..]));
    let [Some(e1), Some(e2)] = spans else {
        unreachable!("both spans closed above")
    };
    Ok((tokens, e1, e2))
}

/// Serializes instances back to the SemEval text format.
pub fn write_semeval(instances: &[RawInstance]) -> String {
    let mut out = String::new();
    for inst in instances {
        let mut words = Vec::with_capacity(inst.tokens.len());
        for (i, tok) in inst.tokens.iter().enumerate() {
            let mut w = String::new();
            for (span, tag) in [(inst.e1, "e1"), (inst.e2, "e2")] {
                if span.start == i {
                    let _ = write!(w, "<{tag}>");
                }
            }
            w.push_str(tok);
            for (span, tag) in [(inst.e1, "e1"), (inst.e2, "e2")] {
                if span.end == i {
                    let _ = write!(w, "</{tag}>");
                }
            }
            words.push(w);
        }
        let _ = writeln!(out, "{}\t\"{}\"", inst.id, words.join(" "));
        let _ = writeln!(out, "{}", inst.label);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::label::Direction;

    #[test]
    fn parses_marked_record() {
        let text = "1\t\"The <e1>singer</e1> caused a <e2>commotion</e2>.\"\nCause-Effect(e1,e2)\n\n";
        let insts = parse_semeval(text).unwrap();
        assert_eq!(insts.len(), 1);
        let inst = &insts[0];
        assert_eq!(inst.tokens, ["The", "singer", "caused", "a", "commotion", "."]);
        assert_eq!(inst.e1, Span::new(1, 1));
        assert_eq!(inst.e2, Span::new(4, 4));
        assert_eq!(inst.label, DirectedLabel::relation("Cause-Effect", Direction::E1ToE2));
    }

    #[test]
    fn comment_lines_are_ignored() {
        let text = "7\t\"<e2>A</e2> and <e1>b c</e1>\"\nOther\nComment: whatever\n\n\
                    8\t\"<e1>x</e1> <e2>y</e2>\"\nCause-Effect(e2,e1)\nComment:\n";
        let insts = parse_semeval(text).unwrap();
        assert_eq!(insts.len(), 2);
        assert_eq!(insts[0].e1, Span::new(2, 3));
        assert_eq!(insts[0].e2, Span::new(0, 0));
        assert!(insts[0].label.is_other());
        assert_eq!(insts[1].label.direction(), Some(Direction::E2ToE1));
    }

    fn line_of(err: Error) -> usize {
        match err {
            Error::SemEval { line, .. } => line,
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn malformed_records_name_the_line() {
        let missing = "1\t\"<e1>a</e1> b c\"\nOther\n";
        assert_eq!(line_of(parse_semeval(missing).unwrap_err()), 1);

        let bad_label = "1\t\"<e1>a</e1> <e2>b</e2>\"\nOther\n\n2\t\"<e1>a</e1> <e2>b</e2>\"\nFoo\n";
        assert_eq!(line_of(parse_semeval(bad_label).unwrap_err()), 5);

        let dup = "3\t\"<e1>a</e1> <e2>b</e2>\"\nOther\n\n3\t\"<e1>a</e1> <e2>b</e2>\"\nOther\n";
        assert_eq!(line_of(parse_semeval(dup).unwrap_err()), 4);

        let overlap = "1\t\"<e1>a <e2>b</e1> c</e2>\"\nOther\n";
        assert!(parse_semeval(overlap).is_err());

        let empty = "1\t\"<e1></e1> <e2>b</e2>\"\nOther\n";
        assert!(parse_semeval(empty).is_err());
    }
}
