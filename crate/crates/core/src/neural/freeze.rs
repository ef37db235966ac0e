use std::fmt;
use std::str::FromStr;

use super::network::Network;
use crate::error::{Error, Result};

/// Which top-level layers to freeze. Freezing a block freezes everything in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FreezeSpec {
    None,
    All,
    /// Freeze layers `0..n`.
    First(usize),
    /// Keep only the last `n` layers trainable; freeze the rest.
    AllButLast(usize),
    Indices(Vec<usize>),
}

impl FromStr for FreezeSpec {
    type Err = Error;

    /// `none`, `all`, `first:N`, `last:N` (train only the last N) or `idx:1,2,5`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let count = |v: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::invalid(format!("bad layer count {v:?} in freeze spec")))
        };
        match s.split_once(':') {
            None if s == "none" => Ok(FreezeSpec::None),
            None if s == "all" => Ok(FreezeSpec::All),
            Some(("first", n)) => Ok(FreezeSpec::First(count(n)?)),
            Some(("last", n)) => Ok(FreezeSpec::AllButLast(count(n)?)),
            Some(("idx", list)) => list
                .split(',')
                .filter(|t| !t.trim().is_empty())
                .map(count)
                .collect::<Result<Vec<_>>>()
                .map(FreezeSpec::Indices),
            _ => Err(Error::invalid(format!(
                "freeze spec {s:?}: expected none, all, first:N, last:N or idx:I,J"
            ))),
        }
    }
}

impl fmt::Display for FreezeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FreezeSpec::None => write!(f, "none"),
            FreezeSpec::All => write!(f, "all"),
            FreezeSpec::First(n) => write!(f, "first:{n}"),
            FreezeSpec::AllButLast(n) => write!(f, "last:{n}"),
            FreezeSpec::Indices(ix) => {
                let parts: Vec<String> = ix.iter().map(usize::to_string).collect();
                write!(f, "idx:{}", parts.join(","))
            }
        }
    }
}

impl FreezeSpec {
    /// Frozen flag per top-level layer for a stack of `count` layers.
    pub fn mask(&self, count: usize) -> Result<Vec<bool>> {
        let too_many = |n: usize| Error::invalid(format!("freeze count {n} exceeds {count} layers"));
        Ok(match self {
            FreezeSpec::None => vec![false; count],
            FreezeSpec::All => vec![true; count],
            FreezeSpec::First(n) => {
                if *n > count {
                    return Err(too_many(*n));
                }
                (0..count).map(|i| i < *n).collect()
            }
            FreezeSpec::AllButLast(n) => {
                if *n > count {
                    return Err(too_many(*n));
                }
                (0..count).map(|i| i < count - n).collect()
            }
            FreezeSpec::Indices(ix) => {
                let mut mask = vec![false; count];
                for &i in ix {
                    *mask
                        .get_mut(i)
                        .ok_or_else(|| Error::invalid(format!("layer index {i} out of range 0..{count}")))? = true;
                }
                mask
            }
        })
    }
}

/// Returns a copy of `net` whose frozen flags are exactly those selected.
pub fn freeze_layers(net: &Network, spec: &FreezeSpec) -> Result<Network> {
    let mask = spec.mask(net.layers().len())?;
    let mut out = net.clone();
    for (layer, frozen) in out.layers_mut().iter_mut().zip(mask) {
        layer.set_frozen(frozen);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_but_last_five_of_sixteen() {
        let mask = FreezeSpec::AllButLast(5).mask(16).unwrap();
        assert!(mask[..=10].iter().all(|&f| f));
        assert!(mask[11..].iter().all(|&f| !f));
    }

    #[test]
    fn masks() {
        assert_eq!(FreezeSpec::None.mask(3).unwrap(), vec![false; 3]);
        assert_eq!(FreezeSpec::First(2).mask(3).unwrap(), vec![true, true, false]);
        assert_eq!(FreezeSpec::AllButLast(0).mask(2).unwrap(), vec![true, true]);
        assert_eq!(FreezeSpec::Indices(vec![2]).mask(3).unwrap(), vec![false, false, true]);
        assert!(FreezeSpec::Indices(vec![3]).mask(3).is_err());
        assert!(FreezeSpec::First(4).mask(3).is_err());
    }

    #[test]
    fn parse_round_trip() {
        for s in ["none", "all", "first:3", "last:5", "idx:0,4,7"] {
            let spec: FreezeSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("last".parse::<FreezeSpec>().is_err());
        assert!("first:x".parse::<FreezeSpec>().is_err());
    }
}
