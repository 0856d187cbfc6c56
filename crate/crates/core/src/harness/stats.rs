use statrs::distribution::{Binomial, DiscreteCDF};

/// Outcome of a one-sided sign test on paired differences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignTest {
    pub wins: u64,
    pub losses: u64,
    pub ties: u64,
    /// `P(X >= wins)` for `X ~ Binomial(wins + losses, 1/2)`.
    pub p_value: f64,
}

/// One-sided sign test that `a` tends to exceed `b`. Ties and non-finite pairs are dropped.
pub fn sign_test(a: &[f64], b: &[f64]) -> SignTest {
    let (mut wins, mut losses, mut ties) = (0u64, 0u64, 0u64);
    for (x, y) in a.iter().zip(b) {
        if !(x.is_finite() && y.is_finite()) || x == y {
            ties += 1;
        } else if x > y {
            wins += 1;
        } else {
            losses += 1;
        }
    }
    SignTest {
        wins,
        losses,
        ties,
        p_value: binomial_upper_tail(wins, wins + losses),
    }
}

/// `P(X >= k)` for `X ~ Binomial(n, 1/2)`.
pub fn binomial_upper_tail(k: u64, n: u64) -> f64 {
    if n == 0 || k == 0 {
        return 1.0;
    }
    let dist = Binomial::new(0.5, n).expect("valid binomial");
    dist.sf(k - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_probabilities() {
        // 15 of 20: sum_{k>=15} C(20,k) / 2^20 = 21700 / 1048576
        assert!((binomial_upper_tail(15, 20) - 21_700.0 / 1_048_576.0).abs() < 1e-12);
        assert!(binomial_upper_tail(14, 20) > 0.05);
        assert_eq!(binomial_upper_tail(0, 10), 1.0);
        assert!((binomial_upper_tail(3, 3) - 0.125).abs() < 1e-12);
    }

    #[test]
    fn ties_are_dropped() {
        let t = sign_test(&[1.0, 2.0, 3.0, f64::NAN], &[0.0, 2.0, 4.0, 1.0]);
        assert_eq!((t.wins, t.losses, t.ties), (1, 1, 2));
        assert!((t.p_value - 0.75).abs() < 1e-12);
    }
}
