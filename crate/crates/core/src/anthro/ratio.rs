//! Ratio features over body measurements.
//!
//! A ratio is written either `a/b` or `(a-b)/c` where each operand names a
//! measurement (`bust`, `waist`, `hip`, `shoulder`, `stature`).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::silhouette::BodyMeasurements;

pub const DEFAULT_RATIOS: [&str; 13] = [
    "bust/waist",
    "hip/waist",
    "hip/bust",
    "waist/stature",
    "bust/stature",
    "hip/stature",
    "shoulder/bust",
    "shoulder/hip",
    "(bust-waist)/stature",
    "(hip-waist)/stature",
    "(hip-bust)/stature",
    "waist/bust",
    "stature/hip",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Bust,
    Waist,
    Hip,
    Shoulder,
    Stature,
}

impl Field {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "bust" => Field::Bust,
            "waist" => Field::Waist,
            "hip" => Field::Hip,
            "shoulder" => Field::Shoulder,
            "stature" => Field::Stature,
            other => return Err(Error::invalid(format!("unknown measurement `{other}`"))),
        })
    }

    fn get(self, m: &BodyMeasurements) -> f64 {
        match self {
            Field::Bust => m.bust,
            Field::Waist => m.waist,
            Field::Hip => m.hip,
            Field::Shoulder => m.shoulder,
            Field::Stature => m.stature,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Numerator {
    Single(Field),
    Difference(Field, Field),
}

/// One parsed ratio term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioSpec {
    name: String,
    numerator: Numerator,
    denominator: Field,
}

impl RatioSpec {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn defaults() -> Vec<RatioSpec> {
        DEFAULT_RATIOS
            .iter()
            .map(|s| s.parse().expect("default ratios parse"))
            .collect()
    }

    pub fn eval(&self, m: &BodyMeasurements) -> Result<f64> {
        let den = self.denominator.get(m);
        if !(den > 0.0) {
            return Err(Error::invalid(format!("zero denominator in `{}`", self.name)));
        }
        let num = match self.numerator {
            Numerator::Single(f) => f.get(m),
            Numerator::Difference(a, b) => a.get(m) - b.get(m),
        };
        Ok(num / den)
    }
}

impl FromStr for RatioSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (num, den) = s
            .rsplit_once('/')
            .ok_or_else(|| Error::invalid(format!("ratio `{s}` has no `/`")))?;
        let num = num.trim();
        let numerator = match num.strip_prefix('(').and_then(|n| n.strip_suffix(')')) {
            Some(inner) => {
                let (a, b) = inner
                    .split_once('-')
                    .ok_or_else(|| Error::invalid(format!("expected `(a-b)` in `{s}`")))?;
                Numerator::Difference(Field::parse(a)?, Field::parse(b)?)
            }
            None => Numerator::Single(Field::parse(num)?),
        };
        Ok(RatioSpec {
            name: s.to_string(),
            numerator,
            denominator: Field::parse(den)?,
        })
    }
}

impl fmt::Display for RatioSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Named feature vector, in spec order.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioFeatures {
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

pub fn ratio_features(m: &BodyMeasurements, specs: &[RatioSpec]) -> Result<RatioFeatures> {
    let values = specs.iter().map(|r| r.eval(m)).collect::<Result<Vec<_>>>()?;
    Ok(RatioFeatures {
        names: specs.iter().map(|r| r.name.clone()).collect(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bust_over_waist() {
        let m = BodyMeasurements::new(100.0, 80.0, 90.0, 40.0, 170.0).unwrap();
        let spec: RatioSpec = "bust/waist".parse().unwrap();
        assert_eq!(ratio_features(&m, &[spec]).unwrap().values, vec![1.25]);
    }

    #[test]
    fn equal_measurements() {
        let m = BodyMeasurements::from_array([50.0; 5]);
        let f = ratio_features(&m, &RatioSpec::defaults()).unwrap();
        assert_eq!(f.values.len(), 13);
        for (name, v) in f.names.iter().zip(&f.values) {
            let expected = if name.starts_with('(') { 0.0 } else { 1.0 };
            assert_eq!(*v, expected, "{name}");
        }
    }

    #[test]
    fn zero_denominator() {
        let m = BodyMeasurements::from_array([1.0, 0.0, 1.0, 1.0, 1.0]);
        assert!(ratio_features(&m, &["bust/waist".parse().unwrap()]).is_err());
    }

    #[test]
    fn parse_errors() {
        assert!("bust".parse::<RatioSpec>().is_err());
        assert!("bust/neck".parse::<RatioSpec>().is_err());
        assert!("(bust+waist)/hip".parse::<RatioSpec>().is_err());
        let r: RatioSpec = " (hip - waist) / stature ".parse().unwrap();
        assert_eq!(r.to_string(), "(hip - waist) / stature");
    }
}
