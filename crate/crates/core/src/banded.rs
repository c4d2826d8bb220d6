//! Banded linear algebra: LU with partial pivoting and inertia counts for
//! symmetric band matrices.

use crate::error::{Error, Result};

/// Square band matrix with `kl` sub- and `ku` super-diagonals. Extra room for
/// `kl` fill-in diagonals is reserved so the LU can pivot in place.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku {
            return 0.0;
        }
        self.data[self.idx(i, j)]
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "({i}, {j}) outside the band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Solves `A x = b` in place, consuming the factorisation workspace.
    pub fn solve(mut self, b: &mut [f64]) -> Result<()> {
        let (n, kl) = (self.n, self.kl);
        assert_eq!(b.len(), n);
        let reach = kl + self.ku;
        let w = self.width;
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].abs();
            for i in k + 1..=last {
                let v = self.data[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::NumericalAbort {
                    t: f64::NAN,
                    reason: format!("singular band matrix at column {k}"),
                });
            }
            let jmax = (k + reach).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.idx(k, j);
                    let c = self.idx(p, j);
                    self.data.swap(a, c);
                }
                b.swap(k, p);
            }
            let piv = self.data[self.idx(k, k)];
            let rowk = k * w + kl;
            for i in k + 1..=last {
                let ik = self.idx(i, k);
                let l = self.data[ik] / piv;
                if l == 0.0 {
                    continue;
                }
                self.data[ik] = 0.0;
                let rowi = i * w + kl;
                for j in k + 1..=jmax {
                    self.data[rowi + j - i] -= l * self.data[rowk + j - k];
                }
                b[i] -= l * b[k];
            }
        }
        for k in (0..n).rev() {
            let jmax = (k + reach).min(n - 1);
            let mut acc = b[k];
            for j in k + 1..=jmax {
                acc -= self.data[self.idx(k, j)] * b[j];
            }
            b[k] = acc / self.data[self.idx(k, k)];
        }
        Ok(())
    }
}

/// Number of eigenvalues below `sigma` of the symmetric band matrix given by
/// its diagonals `diag[d][i] = A[i][i+d]`, `d = 0..=p`.
pub fn count_below(diags: &[Vec<f64>], sigma: f64) -> usize {
    let n = diags[0].len();
    let p = diags.len() - 1;
    let w = 2 * p + 1;
    let mut a = vec![0.0; n * w];
    let at = |i: usize, j: usize| i * w + (j + p - i);
    for i in 0..n {
        for (d, diag) in diags.iter().enumerate() {
            if i + d < n {
                a[at(i, i + d)] = diag[i];
                a[at(i + d, i)] = diag[i];
            }
        }
        a[at(i, i)] -= sigma;
    }
    let tiny = f64::EPSILON * diags[0].iter().fold(1.0f64, |s, x| s.max(x.abs()));
    let mut neg = 0;
    for k in 0..n {
        let mut piv = a[at(k, k)];
        if piv.abs() < tiny {
            piv = if piv < 0.0 { -tiny } else { tiny };
            a[at(k, k)] = piv;
        }
        if piv < 0.0 {
            neg += 1;
        }
        let last = (k + p).min(n - 1);
        for i in k + 1..=last {
            let l = a[at(i, k)] / piv;
            for j in k + 1..=last {
                a[at(i, j)] -= l * a[at(k, j)];
            }
        }
    }
    neg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_against_dense_product() {
        let n = 40;
        let (kl, ku) = (3, 2);
        let mut m = BandMatrix::zeros(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                let v = ((i * 7 + j * 13) % 11) as f64 - 5.0 + if i == j { 0.5 } else { 0.0 };
                m.add(i, j, v);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut b = m.mul_vec(&x);
        m.solve(&mut b).unwrap();
        for i in 0..n {
            assert!((b[i] - x[i]).abs() < 1e-9, "{i}: {} vs {}", b[i], x[i]);
        }
    }

    #[test]
    fn inertia_of_discrete_laplacian() {
        // eigenvalues of tridiag(-1, 2, -1) are 2 - 2 cos(k pi / (n + 1))
        let n = 50;
        let diags = vec![vec![2.0; n], vec![-1.0; n]];
        for k in 1..=n {
            let lam = 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert_eq!(count_below(&diags, lam - 1e-9), k - 1);
            assert_eq!(count_below(&diags, lam + 1e-9), k);
        }
    }
}
