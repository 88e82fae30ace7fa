//! Small dense-vector helpers and the chunked reduction used by every mean.
//!
//! Sums are accumulated sequentially in index order inside fixed chunks of
//! [`CHUNK`] terms, and chunk partials are folded into the total in order.
//! The result depends only on the input order, never on thread count.

pub const CHUNK: usize = 1024;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// `y += a * x`
#[inline]
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|v| v.is_finite())
}

/// Chunked scalar sum.
#[derive(Debug, Default)]
pub struct ScalarSum {
    total: f64,
    partial: f64,
    in_chunk: usize,
}

impl ScalarSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        self.partial += v;
        self.in_chunk += 1;
        if self.in_chunk == CHUNK {
            self.total += self.partial;
            self.partial = 0.0;
            self.in_chunk = 0;
        }
    }

    pub fn finish(self) -> f64 {
        self.total + self.partial
    }
}

/// Chunked vector sum. Either call [`VecSum::add`], or accumulate a term into
/// [`VecSum::partial_mut`] and then call [`VecSum::commit`] once per term.
#[derive(Debug)]
pub struct VecSum {
    total: Vec<f64>,
    partial: Vec<f64>,
    in_chunk: usize,
}

impl VecSum {
    pub fn new(dim: usize) -> Self {
        Self {
            total: vec![0.0; dim],
            partial: vec![0.0; dim],
            in_chunk: 0,
        }
    }

    #[inline]
    pub fn partial_mut(&mut self) -> &mut [f64] {
        &mut self.partial
    }

    #[inline]
    pub fn add(&mut self, v: &[f64]) {
        axpy(1.0, v, &mut self.partial);
        self.commit();
    }

    #[inline]
    pub fn commit(&mut self) {
        self.in_chunk += 1;
        if self.in_chunk == CHUNK {
            self.flush();
        }
    }

    fn flush(&mut self) {
        for (t, p) in self.total.iter_mut().zip(self.partial.iter_mut()) {
            *t += *p;
            *p = 0.0;
        }
        self.in_chunk = 0;
    }

    pub fn finish(mut self) -> Vec<f64> {
        self.flush();
        self.total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunked_sum_matches_naive_on_integers() {
        let mut s = ScalarSum::new();
        for i in 0..5000 {
            s.add(i as f64);
        }
        assert_eq!(s.finish(), (0..5000).sum::<i64>() as f64);
    }

    #[test]
    fn vec_sum_crosses_chunk_boundary() {
        let mut s = VecSum::new(2);
        for i in 0..(2 * CHUNK + 3) {
            s.add(&[1.0, i as f64]);
        }
        let out = s.finish();
        assert_eq!(out[0], (2 * CHUNK + 3) as f64);
        let n = (2 * CHUNK + 3) as f64;
        assert_eq!(out[1], n * (n - 1.0) / 2.0);
    }

    #[test]
    fn norms() {
        assert_eq!(norm(&[3.0, 4.0]), 5.0);
        assert_eq!(norm_inf(&[1.0, -7.0, 2.0]), 7.0);
    }
}
