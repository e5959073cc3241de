// SPDX-License-Identifier: Apache-2.0

/// Running weighted sums `S_N = Σ w_n`, `Σ w_n x_n`, `Σ w_n y_n`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErgodicAverager {
    weight_sum: f64,
    wx: Vec<f64>,
    wy: Vec<f64>,
}

impl ErgodicAverager {
    pub fn new() -> Self {
        Self::default()
    }

    /// Panics if `weight <= 0` or the dimensions change between updates.
    pub fn update(&mut self, weight: f64, x: &[f64], y: &[f64]) {
        assert!(weight > 0.0, "ergodic weight must be positive");
        if self.wx.is_empty() && self.wy.is_empty() {
            self.wx = vec![0.0; x.len()];
            self.wy = vec![0.0; y.len()];
        }
        assert_eq!(self.wx.len(), x.len());
        assert_eq!(self.wy.len(), y.len());
        self.weight_sum += weight;
        self.wx.iter_mut().zip(x).for_each(|(s, v)| *s += weight * v);
        self.wy.iter_mut().zip(y).for_each(|(s, v)| *s += weight * v);
    }

    pub fn weight_sum(&self) -> f64 {
        self.weight_sum
    }

    pub fn is_empty(&self) -> bool {
        self.weight_sum == 0.0
    }

    /// `(X_N, Y_N)`. Panics when nothing has been accumulated.
    pub fn average(&self) -> (Vec<f64>, Vec<f64>) {
        assert!(self.weight_sum > 0.0, "average of an empty ergodic accumulator");
        let s = self.weight_sum;
        (self.wx.iter().map(|v| v / s).collect(), self.wy.iter().map(|v| v / s).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_weights_give_arithmetic_mean() {
        let mut avg = ErgodicAverager::new();
        for x in [0.0, 3.0, 6.0] {
            avg.update(1.0, &[x], &[2.0 * x]);
        }
        assert_eq!(avg.average(), (vec![3.0], vec![6.0]));
    }

    #[test]
    fn weighted_mean() {
        let mut avg = ErgodicAverager::new();
        avg.update(1.0, &[0.0], &[0.0]);
        avg.update(3.0, &[4.0], &[0.0]);
        assert_eq!(avg.average().0, vec![3.0]);
        assert_eq!(avg.weight_sum(), 4.0);
    }

    #[test]
    #[should_panic(expected = "empty")]
    fn empty_average_panics() {
        ErgodicAverager::new().average();
    }

    #[test]
    #[should_panic(expected = "positive")]
    fn nonpositive_weight_panics() {
        ErgodicAverager::new().update(0.0, &[1.0], &[1.0]);
    }
}
