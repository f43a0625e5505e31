//! Compensated summation.
//!
//! Every reduction over lattice sites goes through [`KahanSum`] (Neumaier's
//! variant), which keeps oracle comparisons tight up to n = 2¹⁴.

#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator of `f64`.
pub fn ksum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<KahanSum>().value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_small_terms() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(ksum(xs), 2.0);
    }

    #[test]
    fn harmonic_sum_matches_reverse_order() {
        let fwd = ksum((1..=100_000).map(|k| 1.0 / k as f64));
        let rev = ksum((1..=100_000).rev().map(|k| 1.0 / k as f64));
        assert!((fwd - rev).abs() <= 1e-15 * fwd);
    }
}
