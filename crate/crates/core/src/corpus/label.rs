use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const OTHER: &str = "Other";

/// The nine SemEval-2010 Task 8 relation types.
pub const SEMEVAL_RELATIONS: [&str; 9] = [
    "Cause-Effect",
    "Component-Whole",
    "Content-Container",
    "Entity-Destination",
    "Entity-Origin",
    "Instrument-Agency",
    "Member-Collection",
    "Message-Topic",
    "Product-Producer",
];

/// Which nominal fills the first argument of the relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// `R(e1,e2)`: e1 is the subject.
    E1ToE2,
    /// `R(e2,e1)`: e2 is the subject.
    E2ToE1,
}

impl Direction {
    pub fn flipped(self) -> Self {
        match self {
            Direction::E1ToE2 => Direction::E2ToE1,
            Direction::E2ToE1 => Direction::E1ToE2,
        }
    }
}

/// A relation label with its argument order. `Other` carries no direction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DirectedLabel {
    Other,
    Relation { name: String, direction: Direction },
}

impl DirectedLabel {
    pub fn relation(name: impl Into<String>, direction: Direction) -> Self {
        DirectedLabel::Relation {
            name: name.into(),
            direction,
        }
    }

    pub fn is_other(&self) -> bool {
        matches!(self, DirectedLabel::Other)
    }

    /// Base relation name, `None` for `Other`.
    pub fn base(&self) -> Option<&str> {
        match self {
            DirectedLabel::Other => None,
            DirectedLabel::Relation { name, .. } => Some(name),
        }
    }

    pub fn direction(&self) -> Option<Direction> {
        match self {
            DirectedLabel::Other => None,
            DirectedLabel::Relation { direction, .. } => Some(*direction),
        }
    }

    /// The same relation with its arguments swapped.
    pub fn flipped(&self) -> Self {
        match self {
            DirectedLabel::Other => DirectedLabel::Other,
            DirectedLabel::Relation { name, direction } => {
                DirectedLabel::relation(name.clone(), direction.flipped())
            }
        }
    }
}

impl fmt::Display for DirectedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DirectedLabel::Other => f.write_str(OTHER),
            DirectedLabel::Relation {
                name,
                direction: Direction::E1ToE2,
            } => write!(f, "{name}(e1,e2)"),
            DirectedLabel::Relation {
                name,
                direction: Direction::E2ToE1,
            } => write!(f, "{name}(e2,e1)"),
        }
    }
}

impl FromStr for DirectedLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == OTHER {
            return Ok(DirectedLabel::Other);
        }
        let (name, direction) = if let Some(name) = s.strip_suffix("(e1,e2)") {
            (name, Direction::E1ToE2)
        } else if let Some(name) = s.strip_suffix("(e2,e1)") {
            (name, Direction::E2ToE1)
        } else {
            return Err(Error::Label(format!("{s:?} is neither Other nor Name(e1,e2)/Name(e2,e1)")));
        };
        if name.is_empty() || name.contains(|c: char| c.is_whitespace() || c == '(' || c == ')') {
            return Err(Error::Label(format!("bad relation name in {s:?}")));
        }
        Ok(DirectedLabel::relation(name, direction))
    }
}

/// How labels map onto network output classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassScheme {
    /// `2R+1` classes: Other, then `r(e1,e2)`, `r(e2,e1)` for each relation.
    Directed,
    /// `R+1` classes: Other, then one per relation.
    Undirected,
}

/// Ordered inventory of base relation names. `Other` is implicit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelSet {
    relations: Vec<String>,
}

impl Default for LabelSet {
    fn default() -> Self {
        Self::semeval()
    }
}

impl LabelSet {
    pub fn new<S: Into<String>>(relations: impl IntoIterator<Item = S>) -> Result<Self> {
        let relations: Vec<String> = relations.into_iter().map(Into::into).collect();
        for (i, r) in relations.iter().enumerate() {
            if r == OTHER {
                return Err(Error::Label("Other is implicit and must not be listed".into()));
            }
            // Reuse the codec's name validation.
            DirectedLabel::from_str(&format!("{r}(e1,e2)"))?;
            if relations[..i].contains(r) {
                return Err(Error::Label(format!("duplicate relation {r:?}")));
            }
        }
        Ok(LabelSet { relations })
    }

    pub fn semeval() -> Self {
        LabelSet {
            relations: SEMEVAL_RELATIONS.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// One relation name per line; blank lines and `#` comments skipped.
    pub fn parse(text: &str) -> Result<Self> {
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn relations(&self) -> &[String] {
        &self.relations
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r == name)
    }

    pub fn validate(&self, label: &DirectedLabel) -> Result<()> {
        match label.base() {
            Some(name) if self.index_of(name).is_none() => {
                Err(Error::Label(format!("unknown relation {name:?}")))
            }
            _ => Ok(()),
        }
    }

    /// Every label of the inventory, in directed class order.
    pub fn all_labels(&self) -> Vec<DirectedLabel> {
        (0..self.num_classes(ClassScheme::Directed))
            .map(|c| self.directed_label(c))
            .collect()
    }

    pub fn num_classes(&self, scheme: ClassScheme) -> usize {
        match scheme {
            ClassScheme::Directed => 2 * self.len() + 1,
            ClassScheme::Undirected => self.len() + 1,
        }
    }

    pub fn class_of(&self, label: &DirectedLabel, scheme: ClassScheme) -> Result<usize> {
        let DirectedLabel::Relation { name, direction } = label else {
            return Ok(0);
        };
        let r = self
            .index_of(name)
            .ok_or_else(|| Error::Label(format!("unknown relation {name:?}")))?;
        Ok(match (scheme, direction) {
            (ClassScheme::Undirected, _) => 1 + r,
            (ClassScheme::Directed, Direction::E1ToE2) => 1 + 2 * r,
            (ClassScheme::Directed, Direction::E2ToE1) => 2 + 2 * r,
        })
    }

    /// Inverse of [`class_of`](Self::class_of) under the directed scheme.
    pub fn directed_label(&self, class: usize) -> DirectedLabel {
        if class == 0 {
            return DirectedLabel::Other;
        }
        let r = (class - 1) / 2;
        let direction = if (class - 1).is_multiple_of(2) {
            Direction::E1ToE2
        } else {
            Direction::E2ToE1
        };
        DirectedLabel::relation(self.relations[r].clone(), direction)
    }

    /// Label for an undirected class, attaching `direction` to non-Other classes.
    pub fn undirected_label(&self, class: usize, direction: Direction) -> DirectedLabel {
        if class == 0 {
            DirectedLabel::Other
        } else {
            DirectedLabel::relation(self.relations[class - 1].clone(), direction)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_directed_and_other() {
        assert_eq!("Other".parse::<DirectedLabel>().unwrap(), DirectedLabel::Other);
        assert_eq!(
            "Cause-Effect(e2,e1)".parse::<DirectedLabel>().unwrap(),
            DirectedLabel::relation("Cause-Effect", Direction::E2ToE1)
        );
        assert!("Cause-Effect".parse::<DirectedLabel>().is_err());
        assert!("(e1,e2)".parse::<DirectedLabel>().is_err());
    }

    #[test]
    fn codec_round_trips_all_19_labels() {
        let set = LabelSet::semeval();
        let all = set.all_labels();
        assert_eq!(all.len(), 19);
        for (class, label) in all.iter().enumerate() {
            assert_eq!(&label.to_string().parse::<DirectedLabel>().unwrap(), label);
            assert_eq!(set.class_of(label, ClassScheme::Directed).unwrap(), class);
        }
    }

    #[test]
    fn undirected_classes() {
        let set = LabelSet::semeval();
        let ce = DirectedLabel::relation("Cause-Effect", Direction::E2ToE1);
        assert_eq!(set.class_of(&ce, ClassScheme::Undirected).unwrap(), 1);
        assert_eq!(set.undirected_label(1, Direction::E2ToE1), ce);
        assert_eq!(set.num_classes(ClassScheme::Undirected), 10);
    }

    #[test]
    fn label_set_file_format() {
        let set = LabelSet::parse("# toy\nA-B\n\nC-D\n").unwrap();
        assert_eq!(set.relations(), ["A-B", "C-D"]);
        assert!(LabelSet::parse("A\nA\n").is_err());
        assert!(LabelSet::parse("Other\n").is_err());
        assert!(set.validate(&DirectedLabel::relation("X", Direction::E1ToE2)).is_err());
    }
}
