//! Annotated sentences, dependency parses, and the relation label codec.

mod conll;
pub mod label;
mod lexical;
mod semeval;
pub mod tokenize;

pub use conll::{parse_conll, read_conll, write_conll};
pub use label::{ClassScheme, DirectedLabel, Direction, LabelSet};
pub use lexical::LexFeatures;
pub use semeval::{parse_semeval, parse_semeval_file, write_semeval};

use crate::error::{Error, Result};

/// Inclusive token-index range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        assert!(start <= end, "span start after end");
        Span { start, end }
    }

    pub fn single(i: usize) -> Self {
        Span { start: i, end: i }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.start <= i && i <= self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start <= other.end && other.start <= self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<usize> {
        self.start..=self.end
    }
}

/// One annotated SemEval record.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawInstance {
    pub id: u64,
    pub tokens: Vec<String>,
    pub e1: Span,
    pub e2: Span,
    pub label: DirectedLabel,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedToken {
    pub form: String,
    /// Zero-based head index; `None` for the root.
    pub head: Option<usize>,
    pub deprel: String,
}

impl ParsedToken {
    pub fn new(form: impl Into<String>, head: Option<usize>, deprel: impl Into<String>) -> Self {
        ParsedToken {
            form: form.into(),
            head,
            deprel: deprel.into(),
        }
    }
}

/// A dependency-parsed sentence whose head links form a single-rooted tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedSentence {
    tokens: Vec<ParsedToken>,
    root: usize,
}

impl ParsedSentence {
    pub fn new(tokens: Vec<ParsedToken>) -> Result<Self> {
        let n = tokens.len();
        if n == 0 {
            return Err(Error::Format("empty sentence".into()));
        }
        let mut root = None;
        for (i, t) in tokens.iter().enumerate() {
            match t.head {
                None if root.is_some() => {
                    return Err(Error::Format(format!("tokens {} and {} are both roots", root.unwrap() + 1, i + 1)))
                }
                None => root = Some(i),
                Some(h) if h >= n => {
                    return Err(Error::Format(format!("token {}: head {} out of range", i + 1, h + 1)))
                }
                Some(_) => {}
            }
        }
        let root = root.ok_or_else(|| Error::Format("no root token".into()))?;

        // 0 = unvisited, 1 = on current walk, 2 = reaches root.
        let mut state = vec![0u8; n];
        state[root] = 2;
        for start in 0..n {
            let mut walk = Vec::new();
            let mut cur = start;
            while state[cur] == 0 {
                state[cur] = 1;
                walk.push(cur);
                cur = tokens[cur].head.expect("only the root has no head");
            }
            if state[cur] == 1 {
                return Err(Error::Format(format!("head links form a cycle through token {}", cur + 1)));
            }
            for w in walk {
                state[w] = 2;
            }
        }
        Ok(ParsedSentence { tokens, root })
    }

    pub fn tokens(&self) -> &[ParsedToken] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn head(&self, i: usize) -> Option<usize> {
        self.tokens[i].head
    }
}

/// A SemEval record paired with the parse of the same token sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlignedInstance {
    pub raw: RawInstance,
    pub parse: ParsedSentence,
}

pub fn align(raw: RawInstance, parse: ParsedSentence) -> Result<AlignedInstance> {
    let err = |message: String| Error::Alignment { id: raw.id, message };
    if raw.tokens.len() != parse.len() {
        return Err(err(format!(
            "annotation has {} tokens but parse has {}",
            raw.tokens.len(),
            parse.len()
        )));
    }
    if let Some(i) = raw
        .tokens
        .iter()
        .zip(parse.tokens())
        .position(|(a, b)| *a != b.form)
    {
        return Err(err(format!(
            "token {i} differs: annotation {:?} vs parse {:?}",
            raw.tokens[i],
            parse.tokens()[i].form
        )));
    }
    Ok(AlignedInstance { raw, parse })
}

/// Pairs records with parses positionally.
pub fn align_corpus(raw: Vec<RawInstance>, parses: Vec<ParsedSentence>) -> Result<Vec<AlignedInstance>> {
    if raw.len() != parses.len() {
        return Err(Error::Format(format!(
            "{} annotated instances but {} parsed sentences",
            raw.len(),
            parses.len()
        )));
    }
    raw.into_iter().zip(parses).map(|(r, p)| align(r, p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(tokens: &[&str]) -> RawInstance {
        RawInstance {
            id: 9,
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
            e1: Span::single(0),
            e2: Span::single(1),
            label: DirectedLabel::Other,
        }
    }

    fn chain(forms: &[&str]) -> ParsedSentence {
        let tokens = forms
            .iter()
            .enumerate()
            .map(|(i, f)| ParsedToken::new(*f, (i > 0).then(|| i - 1), "dep"))
            .collect();
        ParsedSentence::new(tokens).unwrap()
    }

    const SIX: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

    #[test]
    fn aligns_identical_tokens() {
        let a = align(raw(&SIX), chain(&SIX)).unwrap();
        assert_eq!(a.parse.len(), 6);
    }

    #[test]
    fn length_mismatch() {
        let err = align(raw(&SIX), chain(&SIX[..5])).unwrap_err();
        assert!(err.to_string().contains("6 tokens but parse has 5"), "{err}");
    }

    #[test]
    fn form_mismatch_names_index() {
        let mut forms = SIX;
        forms[3] = "X";
        let err = align(raw(&SIX), chain(&forms)).unwrap_err();
        assert!(err.to_string().contains("token 3 differs"), "{err}");
    }

    #[test]
    fn tree_validation() {
        assert!(ParsedSentence::new(vec![ParsedToken::new("a", Some(0), "x")]).is_err());
        let s = ParsedSentence::new(vec![
            ParsedToken::new("a", Some(1), "x"),
            ParsedToken::new("b", None, "root"),
        ])
        .unwrap();
        assert_eq!(s.root(), 1);
        let three_cycle = vec![
            ParsedToken::new("r", None, "root"),
            ParsedToken::new("a", Some(2), "x"),
            ParsedToken::new("b", Some(3), "x"),
            ParsedToken::new("c", Some(1), "x"),
        ];
        assert!(ParsedSentence::new(three_cycle).is_err());
    }
}
