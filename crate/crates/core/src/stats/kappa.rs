use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Error, Result};

/// Cohen's kappa between two labelings of the same samples.
///
/// When chance agreement is 1 (both labelings use one and the same label)
/// kappa is defined as 1 for perfect agreement and 0 otherwise.
pub fn cohen_kappa<T: Eq + Hash>(a: &[T], b: &[T]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!("labelings of length {} and {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::invalid("kappa needs at least one sample"));
    }
    let n = a.len() as f64;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64;
    let po = agree / n;
    let mut ca: HashMap<&T, usize> = HashMap::new();
    let mut cb: HashMap<&T, usize> = HashMap::new();
    for x in a {
        *ca.entry(x).or_default() += 1;
    }
    for y in b {
        *cb.entry(y).or_default() += 1;
    }
    let pe: f64 = ca
        .iter()
        .map(|(k, &na)| na as f64 * cb.get(k).copied().unwrap_or(0) as f64)
        .sum::<f64>()
        / (n * n);
    if (1.0 - pe).abs() < 1e-15 {
        return Ok(if po == 1.0 { 1.0 } else { 0.0 });
    }
    Ok((po - pe) / (1.0 - pe))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_cases() {
        assert_eq!(cohen_kappa(&["A", "A", "B", "B"], &["A", "A", "B", "B"]).unwrap(), 1.0);
        assert_eq!(cohen_kappa(&["A", "A", "B", "B"], &["B", "B", "A", "A"]).unwrap(), -1.0);
        assert_eq!(cohen_kappa(&["A", "A", "B", "B"], &["A", "B", "A", "B"]).unwrap(), 0.0);
    }

    #[test]
    fn single_label_universe() {
        assert_eq!(cohen_kappa(&[1, 1, 1], &[1, 1, 1]).unwrap(), 1.0);
    }

    #[test]
    fn errors() {
        assert!(cohen_kappa(&[1, 2], &[1]).is_err());
        assert!(cohen_kappa::<u8>(&[], &[]).is_err());
    }
}
