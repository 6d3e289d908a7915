//! Summary statistics across document sets.

/// Arithmetic mean; 0 for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation divided by `√n`; 0 with fewer than two values.
pub fn stderr(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignTest {
    /// Sets where `a > b`.
    pub wins: usize,
    /// Sets where `a < b`.
    pub losses: usize,
    /// Exact sets, which the test ignores.
    pub ties: usize,
    pub p_value: f64,
}

/// Paired two-sided sign test of `a` against `b`.
pub fn sign_test(a: &[f64], b: &[f64]) -> SignTest {
    assert_eq!(a.len(), b.len(), "paired samples must have equal length");
    let wins = a.iter().zip(b).filter(|(x, y)| x > y).count();
    let losses = a.iter().zip(b).filter(|(x, y)| x < y).count();
    let n = wins + losses;
    let k = wins.min(losses);
    // P(X ≤ k) for X ~ Binomial(n, 1/2), doubled and capped at 1
    let mut term = 0.5f64.powi(n as i32);
    let mut tail = 0.0;
    for i in 0..=k {
        tail += term;
        term *= (n - i) as f64 / (i + 1) as f64;
    }
    SignTest {
        wins,
        losses,
        ties: a.len() - n,
        p_value: (2.0 * tail).min(1.0),
    }
}
