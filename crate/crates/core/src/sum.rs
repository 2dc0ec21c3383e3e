//! Compensated accumulation.
//!
//! Squared-difference sums run over 10^4 and more terms; chunked evaluation
//! changes addition order, so plain `+=` drifts between serial and parallel
//! results. Neumaier's variant of Kahan summation keeps both within a few ulps
//! of the exact sum.

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another partial accumulator in, keeping both compensation terms.
    pub fn merge(&mut self, other: &NeumaierSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<NeumaierSum>().value()
}

/// Compensated Σ (x_i − y_i)². Slices must have equal length.
#[inline]
pub fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = NeumaierSum::new();
    for (a, b) in x.iter().zip(y) {
        let d = a - b;
        acc.add(d * d);
    }
    acc.value()
}

/// Same sum as [`squared_distance`], evaluated as independent chunks whose
/// partial accumulators are merged left to right.
pub fn squared_distance_chunked(x: &[f64], y: &[f64], chunk: usize) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let chunk = chunk.max(1);
    let mut total = NeumaierSum::new();
    for (cx, cy) in x.chunks(chunk).zip(y.chunks(chunk)) {
        let mut part = NeumaierSum::new();
        for (a, b) in cx.iter().zip(cy) {
            let d = a - b;
            part.add(d * d);
        }
        total.merge(&part);
    }
    total.value()
}
