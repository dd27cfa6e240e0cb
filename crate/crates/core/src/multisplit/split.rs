use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Uniform random partition of `0..n` into a screening part of size
/// `round(ratio · n)` and a testing part; both returned sorted.
pub fn split_indices(rng: &mut Stream, n: usize, ratio: f64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 4 {
        return Err(Error::domain(format!("splitting needs n >= 4, got {n}")));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::domain(format!(
            "split ratio must lie in (0, 1), got {ratio}"
        )));
    }
    let k = (ratio * n as f64).round() as usize;
    if k == 0 || k == n {
        return Err(Error::domain(format!(
            "ratio {ratio} leaves an empty part for n = {n}"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let mut s = idx[..k].to_vec();
    let mut t = idx[k..].to_vec();
    s.sort_unstable();
    t.sort_unstable();
    Ok((s, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn sizes_and_partition() {
        let (s, t) = split_indices(&mut stream(1), 10, 0.3).unwrap();
        assert_eq!((s.len(), t.len()), (3, 7));
        let mut all: Vec<usize> = s.iter().chain(&t).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            split_indices(&mut stream(5), 50, 0.3).unwrap(),
            split_indices(&mut stream(5), 50, 0.3).unwrap()
        );
    }

    #[test]
    fn uniform_membership() {
        let mut counts = [0usize; 10];
        let mut rng = stream(11);
        let draws = 10_000;
        for _ in 0..draws {
            for i in split_indices(&mut rng, 10, 0.3).unwrap().0 {
                counts[i] += 1;
            }
        }
        for c in counts {
            assert!((c as f64 / draws as f64 - 0.3).abs() < 0.015, "{c}");
        }
    }

    #[test]
    fn degenerate_sizes() {
        assert!(split_indices(&mut stream(1), 3, 0.5).is_err());
        assert!(split_indices(&mut stream(1), 10, 0.01).is_err());
        assert!(split_indices(&mut stream(1), 10, 0.99).is_err());
    }
}
