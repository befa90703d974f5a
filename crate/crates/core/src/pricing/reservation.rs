//! Reservation vectors: how many units each price level may sell.

use crate::error::{Error, Result};

/// Splits `total` into `parts` nondecreasing integers differing by at most one.
pub fn near_even(total: usize, parts: usize) -> Vec<usize> {
    if parts == 0 {
        return Vec::new();
    }
    let (base, extra) = (total / parts, total % parts);
    (0..parts).map(|i| base + usize::from(i >= parts - extra)).collect()
}

/// Near-even split of `k` units over `levels` levels.
pub fn even_split(k: usize, levels: usize) -> Vec<usize> {
    near_even(k, levels)
}

/// `q_1` fixed, the remaining `k - q_1` units spread near-evenly over the
/// `delta_cap` higher levels. `None` when `q_1 > k`.
pub fn ceil_first(k: usize, delta_cap: usize, q1: usize) -> Option<Vec<usize>> {
    if q1 > k {
        return None;
    }
    let mut q = Vec::with_capacity(delta_cap + 1);
    q.push(q1);
    q.extend(near_even(k - q1, delta_cap));
    Some(q)
}

/// Checks `q_1 ≤ … ≤ q_n`, `Σ q = k` and the expected length.
pub fn check_nondecreasing(q: &[usize], k: usize, levels: usize) -> Result<()> {
    if q.len() != levels {
        return Err(Error::InvalidReservation(format!("expected {levels} entries, got {}", q.len())));
    }
    if q.iter().sum::<usize>() != k {
        return Err(Error::InvalidReservation(format!("entries sum to {}, expected {k}", q.iter().sum::<usize>())));
    }
    if let Some(i) = q.windows(2).position(|w| w[0] > w[1]) {
        return Err(Error::InvalidReservation(format!("q_{} = {} > q_{} = {}", i + 1, q[i], i + 2, q[i + 1])));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn near_even_puts_extras_last() {
        assert_eq!(near_even(10, 3), vec![3, 3, 4]);
        assert_eq!(near_even(2, 4), vec![0, 0, 1, 1]);
        assert_eq!(near_even(0, 2), vec![0, 0]);
        assert!(near_even(5, 0).is_empty());
    }

    #[test]
    fn ceil_first_layout() {
        assert_eq!(ceil_first(40, 3, 7), Some(vec![7, 11, 11, 11]));
        assert_eq!(ceil_first(5, 2, 6), None);
    }

    #[test]
    fn ordering_check() {
        assert!(check_nondecreasing(&[1, 2, 2], 5, 3).is_ok());
        assert!(check_nondecreasing(&[3, 2], 5, 2).is_err());
        assert!(check_nondecreasing(&[1, 2], 4, 2).is_err());
        assert!(check_nondecreasing(&[1, 2], 3, 3).is_err());
    }
}
