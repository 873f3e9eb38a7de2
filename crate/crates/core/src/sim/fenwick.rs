//! Cumulative-sum tree over nonnegative weights with prefix search.

#[derive(Debug, Clone)]
pub struct FenwickTree {
    tree: Vec<f64>,
    weights: Vec<f64>,
}

impl FenwickTree {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            tree: vec![0.0; n + 1],
            weights: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn set(&mut self, i: usize, w: f64) {
        debug_assert!(w >= 0.0);
        let delta = w - self.weights[i];
        self.weights[i] = w;
        let mut j = i + 1;
        while j < self.tree.len() {
            self.tree[j] += delta;
            j += j & j.wrapping_neg();
        }
    }

    /// Sum of weights `0..i`.
    pub fn prefix_sum(&self, i: usize) -> f64 {
        let mut s = 0.0;
        let mut j = i;
        while j > 0 {
            s += self.tree[j];
            j -= j & j.wrapping_neg();
        }
        s
    }

    pub fn total(&self) -> f64 {
        self.prefix_sum(self.len())
    }

    /// Smallest index `i` with `prefix_sum(i + 1) > u`, clamped to the last
    /// index with positive weight.
    pub fn find(&self, mut u: f64) -> usize {
        let n = self.len();
        let mut pos = 0;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= u {
                pos = next;
                u -= self.tree[next];
            }
            step >>= 1;
        }
        let mut idx = pos.min(n - 1);
        while self.weights[idx] <= 0.0 && idx > 0 {
            idx -= 1;
        }
        idx
    }
}
