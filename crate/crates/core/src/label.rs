use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The five body-shape classes, in canonical ordinal order.
///
/// The ordinal (`as usize`) is the class index used by every model, matrix
/// and file format in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ShapeLabel {
    Apple = 0,
    Hourglass = 1,
    InvertedTriangle = 2,
    Rectangle = 3,
    Triangle = 4,
}

impl ShapeLabel {
    pub const ALL: [ShapeLabel; 5] = [
        ShapeLabel::Apple,
        ShapeLabel::Hourglass,
        ShapeLabel::InvertedTriangle,
        ShapeLabel::Rectangle,
        ShapeLabel::Triangle,
    ];

    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn from_ordinal(i: usize) -> Option<ShapeLabel> {
        Self::ALL.get(i).copied()
    }

    /// Canonical class name used in manifests and reports.
    pub fn name(self) -> &'static str {
        match self {
            ShapeLabel::Apple => "Apple",
            ShapeLabel::Hourglass => "Hourglass",
            ShapeLabel::InvertedTriangle => "InvertedTriangle",
            ShapeLabel::Rectangle => "Rectangle",
            ShapeLabel::Triangle => "Triangle",
        }
    }

    pub fn names() -> Vec<String> {
        Self::ALL.iter().map(|l| l.name().to_string()).collect()
    }
}

impl fmt::Display for ShapeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShapeLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Self::ALL
            .iter()
            .copied()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::UnknownLabel(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordinals_are_canonical() {
        for (i, l) in ShapeLabel::ALL.iter().enumerate() {
            assert_eq!(l.ordinal(), i);
            assert_eq!(ShapeLabel::from_ordinal(i), Some(*l));
            assert_eq!(l.name().parse::<ShapeLabel>().unwrap(), *l);
        }
        assert_eq!(ShapeLabel::from_ordinal(5), None);
        assert!("Pear".parse::<ShapeLabel>().is_err());
    }
}
