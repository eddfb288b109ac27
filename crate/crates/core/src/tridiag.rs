//! Lowest eigenpairs of a real symmetric tridiagonal matrix.
//!
//! Eigenvalues come from Sturm-sequence bisection, eigenvectors from
//! inverse iteration on a partially pivoted LU factorization of T − λI,
//! with Gram–Schmidt against the previously accepted vectors so that
//! near-degenerate pairs stay orthogonal.

/// Symmetric tridiagonal matrix: `diag[i]` on the diagonal and `off[i]`
/// coupling rows i and i + 1.
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// Unit Euclidean-norm eigenvectors, one per value.
    pub vectors: Vec<Vec<f64>>,
    /// ‖Tv − λv‖ per pair.
    pub residuals: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(!diag.is_empty());
        assert_eq!(off.len() + 1, diag.len());
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    pub fn norm_estimate(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = f64::MIN_POSITIVE.max(f64::EPSILON * f64::EPSILON * self.norm_estimate());
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0..self.len() {
            if i > 0 {
                q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / q;
            }
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// k-th smallest eigenvalue (0-based) by bisection to full precision.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        assert!(k < self.len());
        let (mut lo, mut hi) = self.gershgorin();
        let pad = f64::EPSILON * self.norm_estimate().max(f64::MIN_POSITIVE);
        lo -= pad;
        hi += pad;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn residual(&self, value: f64, v: &[f64]) -> f64 {
        self.apply(v)
            .iter()
            .zip(v)
            .map(|(tv, x)| (tv - value * x).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// The `count` smallest eigenpairs in ascending order.
    pub fn lowest(&self, count: usize) -> EigenPairs {
        let count = count.min(self.len());
        let values: Vec<f64> = (0..count).map(|k| self.eigenvalue(k)).collect();
        let norm = self.norm_estimate().max(f64::MIN_POSITIVE);
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(count);
        let mut residuals = Vec::with_capacity(count);
        for (k, &lambda) in values.iter().enumerate() {
            let lu = ShiftedLu::factor(self, lambda);
            let n = self.len();
            // Deterministic, non-symmetric start so both parities are seeded.
            let mut v: Vec<f64> = (0..n)
                .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_75 * (k as f64 + 1.0)).sin())
                .collect();
            normalize(&mut v);
            for _ in 0..8 {
                lu.solve(&mut v);
                for prev in &vectors {
                    let d = dot(prev, &v);
                    v.iter_mut().zip(prev).for_each(|(x, p)| *x -= d * p);
                }
                normalize(&mut v);
                if self.residual(lambda, &v) <= 4.0 * f64::EPSILON * norm * (n as f64).sqrt() {
                    break;
                }
            }
            residuals.push(self.residual(lambda, &v));
            vectors.push(v);
        }
        EigenPairs {
            values,
            vectors,
            residuals,
        }
    }
}

/// LU of T − λI with partial pivoting: U has two superdiagonals.
struct ShiftedLu {
    l: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(t: &SymTridiagonal, shift: f64) -> Self {
        let n = t.len();
        let tiny = f64::EPSILON * t.norm_estimate().max(f64::MIN_POSITIVE);
        let mut d: Vec<f64> = t.diag.iter().map(|x| x - shift).collect();
        let mut l = t.off.clone();
        let mut du = t.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= l[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = l[i] / d[i];
                l[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / l[i];
                d[i] = l[i];
                l[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        Self {
            l,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.l[i] * b[i];
        }
        // Rescale on the fly instead of overflowing near-exact shifts.
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= self.du[i] * b[i + 1];
            }
            if i + 2 < n {
                s -= self.du2[i] * b[i + 2];
            }
            b[i] = s / self.d[i];
            if !b[i].is_finite() || b[i].abs() > 1e150 {
                let scale = b[i..]
                    .iter()
                    .map(|x| x.abs())
                    .filter(|x| x.is_finite())
                    .fold(0.0, f64::max);
                let scale = if scale > 0.0 { scale } else { 1.0 };
                b[i..]
                    .iter_mut()
                    .for_each(|x| *x = if x.is_finite() { *x / scale } else { 1.0 });
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}
