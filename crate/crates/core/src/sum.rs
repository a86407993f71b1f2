//! Order-fixed floating point reductions.

const LEAF: usize = 32;

/// Pairwise (tree) summation over the slice in index order. The result
/// depends only on the input values, never on how they were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        return xs.iter().fold(0.0, |acc, &x| acc + x);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_small_integers() {
        let xs: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&xs), 500_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn better_than_naive_on_many_tenths() {
        let xs = vec![0.1; 1 << 20];
        let err = (pairwise_sum(&xs) - 104_857.6).abs();
        assert!(err < 1e-8, "{err}");
    }
}
