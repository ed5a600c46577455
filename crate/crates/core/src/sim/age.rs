//! Exact time averages of a sawtooth age process.
//!
//! Between deliveries the age grows linearly from `a` to `b = a + d`. The
//! time it spends at or below `x` is `ramp(x − a) − ramp(x − b)` with
//! `ramp(y) = max(y, 0)`. Summed over segments, `Σ ramp(x − a_i)` equals
//! `x·#{a_i < x} − Σ_{a_i < x} a_i`, so each endpoint only needs to be binned
//! once; prefix sums then give the occupation time at every grid point.

#[derive(Clone, Debug)]
pub(crate) struct AgeAccumulator {
    grid: Vec<f64>,
    /// Per bin: count and sum of segment starts, minus those of segment ends.
    count: Vec<f64>,
    sum: Vec<f64>,
    integral: f64,
    time: f64,
}

impl AgeAccumulator {
    pub fn new(grid: &[f64]) -> Self {
        let bins = grid.len() + 1;
        Self { grid: grid.to_vec(), count: vec![0.0; bins], sum: vec![0.0; bins], integral: 0.0, time: 0.0 }
    }

    /// Age rising linearly from `start` for `duration`.
    pub fn segment(&mut self, start: f64, duration: f64) {
        if duration <= 0.0 {
            return;
        }
        let end = start + duration;
        self.integral += duration * (start + 0.5 * duration);
        self.time += duration;
        let b = self.grid.partition_point(|&g| g <= start);
        self.count[b] += 1.0;
        self.sum[b] += start;
        let b = self.grid.partition_point(|&g| g <= end);
        self.count[b] -= 1.0;
        self.sum[b] -= end;
    }

    pub fn mean(&self) -> f64 {
        self.integral / self.time
    }

    /// Fraction of time with age `≤ x` at each grid point.
    pub fn cdf(&self) -> Vec<f64> {
        let mut count = self.count[0];
        let mut sum = self.sum[0];
        let mut out = Vec::with_capacity(self.grid.len());
        for (i, &x) in self.grid.iter().enumerate() {
            // Entries in bins 0..=i have their endpoint below x.
            out.push(((x * count - sum) / self.time).clamp(0.0, 1.0));
            count += self.count[i + 1];
            sum += self.sum[i + 1];
        }
        // Rounding can break monotonicity by a few ulps.
        for i in 1..out.len() {
            out[i] = out[i].max(out[i - 1]);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(segments: &[(f64, f64)], x: f64) -> f64 {
        let ramp = |y: f64| y.max(0.0);
        let total: f64 = segments.iter().map(|s| s.1).sum();
        segments.iter().map(|&(a, d)| ramp(x - a) - ramp(x - a - d)).sum::<f64>() / total
    }

    #[test]
    fn matches_direct_clipping() {
        let segments = [(0.0, 1.0), (0.3, 2.5), (1.2, 0.4), (2.0, 0.0), (0.7, 3.3)];
        let grid = [0.0, 0.3, 0.5, 1.0, 1.2, 2.0, 3.0, 5.0];
        let mut acc = AgeAccumulator::new(&grid);
        for &(a, d) in &segments {
            acc.segment(a, d);
        }
        for (x, got) in grid.iter().zip(acc.cdf()) {
            assert!((got - direct(&segments, *x)).abs() < 1e-14, "x = {x}");
        }
        let mean: f64 = segments.iter().map(|&(a, d)| d * (a + d / 2.0)).sum::<f64>() / 7.2;
        assert!((acc.mean() - mean).abs() < 1e-14);
    }
}
