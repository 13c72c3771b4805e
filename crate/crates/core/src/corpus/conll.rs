//! CoNLL-X dependency files.
//!
//! Columns: `ID FORM LEMMA CPOS POS FEATS HEAD DEPREL [PHEAD PDEPREL ...]`.
//! `HEAD = 0` marks the root. Sentences are separated by blank lines; lines
//! starting with `#` are skipped.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{ParsedSentence, ParsedToken};
use crate::error::{Error, Result};

const MIN_COLUMNS: usize = 8;

pub fn read_conll(path: &Path) -> Result<Vec<ParsedSentence>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_conll(&text)
}

pub fn parse_conll(text: &str) -> Result<Vec<ParsedSentence>> {
    let mut sentences = Vec::new();
    let mut block: Vec<&str> = Vec::new();
    for line in text.lines().chain(std::iter::once("")) {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !block.is_empty() {
                let ordinal = sentences.len() + 1;
                sentences.push(parse_block(&block).map_err(|message| Error::Conll {
                    sentence: ordinal,
                    message,
                })?);
                block.clear();
            }
        } else if !line.starts_with('#') {
            block.push(line);
        }
    }
    Ok(sentences)
}

fn parse_block(lines: &[&str]) -> std::result::Result<ParsedSentence, String> {
    let n = lines.len();
    let mut tokens = Vec::with_capacity(n);
    for (i, line) in lines.iter().enumerate() {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < MIN_COLUMNS {
            return Err(format!(
                "token {} has {} columns, expected at least {MIN_COLUMNS}",
                i + 1,
                cols.len()
            ));
        }
        let id: usize = cols[0]
            .parse()
            .map_err(|_| format!("bad token id {:?}", cols[0]))?;
        if id != i + 1 {
            return Err(format!("token id {id} at position {}", i + 1));
        }
        let head: usize = cols[6]
            .parse()
            .map_err(|_| format!("token {id}: bad head {:?}", cols[6]))?;
        if head > n {
            return Err(format!("token {id}: head {head} out of range 0..={n}"));
        }
        tokens.push(ParsedToken {
            form: cols[1].to_string(),
            head: head.checked_sub(1),
            deprel: cols[7].to_string(),
        });
    }
    ParsedSentence::new(tokens).map_err(|e| match e {
        Error::Format(m) => m,
        other => other.to_string(),
    })
}

/// Writes sentences as 10-column CoNLL-X.
pub fn write_conll(sentences: &[ParsedSentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        for (i, t) in s.tokens().iter().enumerate() {
            let head = t.head.map_or(0, |h| h + 1);
            let _ = writeln!(out, "{}\t{}\t_\t_\t_\t_\t{}\t{}\t_\t_", i + 1, t.form, head, t.deprel);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_token_sentence() {
        let s = parse_conll("1\tsinger\t_\tN\tNN\t_\t2\tnsubj\n2\tcaused\t_\tV\tVBD\t_\t0\troot\n").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].root(), 1);
        assert_eq!(s[0].tokens()[0].head, Some(1));
    }

    #[test]
    fn rejects_cycle() {
        let err = parse_conll("1\ta\t_\t_\t_\t_\t2\tx\n2\tb\t_\t_\t_\t_\t1\ty\n").unwrap_err();
        assert!(matches!(err, Error::Conll { sentence: 1, .. }), "{err}");
    }

    #[test]
    fn diagnostics_carry_sentence_ordinal() {
        let ok = "1\ta\t_\t_\t_\t_\t0\troot\n\n";
        let short = format!("{ok}1\ta\t_\t_\t0\troot\n");
        assert!(matches!(parse_conll(&short), Err(Error::Conll { sentence: 2, .. })));
        let range = format!("{ok}{ok}1\ta\t_\t_\t_\t_\t3\troot\n");
        assert!(matches!(parse_conll(&range), Err(Error::Conll { sentence: 3, .. })));
        let two_roots = "1\ta\t_\t_\t_\t_\t0\troot\n2\tb\t_\t_\t_\t_\t0\troot\n";
        assert!(parse_conll(two_roots).is_err());
    }

    #[test]
    fn five_token_round_trip() {
        let text = "1\tThe\t_\tDT\tDT\t_\t2\tdet\t_\t_\n\
                    2\tsinger\t_\tNN\tNN\t_\t3\tnsubj\t_\t_\n\
                    3\tcaused\t_\tVB\tVBD\t_\t0\tROOT\t_\t_\n\
                    4\ta\t_\tDT\tDT\t_\t5\tdet\t_\t_\n\
                    5\tcommotion\t_\tNN\tNN\t_\t3\tdobj\t_\t_\n\n";
        let parsed = parse_conll(text).unwrap();
        assert_eq!(parsed[0].len(), 5);
        let rels: Vec<&str> = parsed[0].tokens().iter().map(|t| t.deprel.as_str()).collect();
        assert_eq!(rels, ["det", "nsubj", "ROOT", "det", "dobj"]);
        assert_eq!(parse_conll(&write_conll(&parsed)).unwrap(), parsed);
    }

    #[test]
    fn skips_comments_and_extra_blank_lines() {
        let text = "# sent_id = 1\n\n\n1\ta\t_\t_\t_\t_\t0\troot\textra\tcols\there\n\n\n";
        let parsed = parse_conll(text).unwrap();
        assert_eq!(parsed.len(), 1);
    }
}
