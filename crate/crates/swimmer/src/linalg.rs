//! Banded LU factorization with partial pivoting.
//!
//! Both the tangential-stress BVP (bandwidths 1/2) and the implicit clamp of
//! the fourth-order flagellum operator (bandwidths 2/3) reduce to small banded
//! systems with irregular boundary rows, so a general `(kl, ku)` solver with
//! pivoting is used instead of a fixed-stencil Thomas/pentadiagonal routine.

use crate::{Error, Result};

/// Banded matrix in compact row storage: entry `(i, j)` of the full matrix is
/// held at `a[i][kl + j - i]` for `|i - j|` within the bandwidths.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    a: Vec<f64>,
}

impl BandedMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        BandedMatrix {
            n,
            kl,
            ku,
            a: vec![0.0; n * (kl + ku + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    /// Resets all entries to zero, keeping the allocation.
    pub fn clear(&mut self) {
        self.a.fill(0.0);
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let off = self.offset(i, j);
        self.a[off] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let off = self.offset(i, j);
        self.a[off] += v;
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        debug_assert!(j + self.kl >= i && j <= i + self.ku, "({i},{j}) outside band");
        i * self.width() + (self.kl + j - i)
    }

    /// Multiplies by a vector; used by tests and residual checks.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let w = self.width();
        for i in 0..self.n {
            let mut acc = 0.0;
            let jlo = i.saturating_sub(self.kl);
            let jhi = (i + self.ku).min(self.n - 1);
            for j in jlo..=jhi {
                acc += self.a[i * w + (self.kl + j - i)] * x[j];
            }
            y[i] = acc;
        }
    }

    /// LU-factorizes with partial pivoting, consuming the compact storage.
    pub fn factor(mut self, context: &'static str) -> Result<BandedLu> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mm = kl + ku + 1;
        let mut al = vec![0.0; n * kl.max(1)];
        let mut indx = vec![0usize; n];

        // Left-shift the first kl rows so column 0 is the pivot column.
        let mut l = kl;
        for i in 0..kl {
            for j in (kl - i)..mm {
                self.a[i * mm + j - l] = self.a[i * mm + j];
            }
            l -= 1;
            for j in (mm - l - 1)..mm {
                self.a[i * mm + j] = 0.0;
            }
        }

        let mut l = kl;
        for k in 0..n {
            if l < n {
                l += 1;
            }
            let hi = l.min(n);
            let mut piv = k;
            let mut dum = self.a[k * mm];
            for i in (k + 1)..hi {
                if self.a[i * mm].abs() > dum.abs() {
                    dum = self.a[i * mm];
                    piv = i;
                }
            }
            indx[k] = piv;
            if dum == 0.0 {
                return Err(Error::SingularSystem {
                    context,
                    row: k,
                    pivot: 0.0,
                });
            }
            if piv != k {
                for j in 0..mm {
                    self.a.swap(k * mm + j, piv * mm + j);
                }
            }
            for i in (k + 1)..hi {
                let mult = self.a[i * mm] / self.a[k * mm];
                al[k * kl.max(1) + (i - k - 1)] = mult;
                for j in 1..mm {
                    self.a[i * mm + j - 1] = self.a[i * mm + j] - mult * self.a[k * mm + j];
                }
                self.a[i * mm + mm - 1] = 0.0;
            }
        }

        Ok(BandedLu {
            n,
            kl,
            ku,
            a: self.a,
            al,
            indx,
        })
    }
}

/// Factored form produced by [`BandedMatrix::factor`].
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    a: Vec<f64>,
    al: Vec<f64>,
    indx: Vec<usize>,
}

impl BandedLu {
    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mm = self.kl + self.ku + 1;
        let klw = self.kl.max(1);

        let mut l = self.kl;
        for k in 0..n {
            let piv = self.indx[k];
            if piv != k {
                b.swap(k, piv);
            }
            if l < n {
                l += 1;
            }
            for i in (k + 1)..l.min(n) {
                b[i] -= self.al[k * klw + (i - k - 1)] * b[k];
            }
        }

        let mut l = 1;
        for i in (0..n).rev() {
            let mut dum = b[i];
            for k in 1..l {
                dum -= self.a[i * mm + k] * b[i + k];
            }
            b[i] = dum / self.a[i * mm];
            if l < mm {
                l += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_banded(n: usize, kl: usize, ku: usize, rng: &mut StdRng) -> BandedMatrix {
        let mut m = BandedMatrix::new(n, kl, ku);
        for i in 0..n {
            let jlo = i.saturating_sub(kl);
            let jhi = (i + ku).min(n - 1);
            for j in jlo..=jhi {
                m.set(i, j, rng.gen_range(-1.0..1.0));
            }
            // keep the matrix comfortably nonsingular
            m.add(i, i, 4.0);
        }
        m
    }

    #[test]
    fn solves_random_banded_systems() {
        let mut rng = StdRng::seed_from_u64(7);
        for &(n, kl, ku) in &[(6usize, 1usize, 2usize), (25, 2, 3), (101, 2, 3), (40, 1, 1)] {
            let m = random_banded(n, kl, ku, &mut rng);
            let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let mut b = vec![0.0; n];
            m.matvec(&x_true, &mut b);
            let lu = m.clone().factor("test").unwrap();
            lu.solve(&mut b);
            for (xi, bi) in x_true.iter().zip(&b) {
                assert!((xi - bi).abs() < 1e-10, "{xi} vs {bi}");
            }
        }
    }

    #[test]
    fn pivoting_handles_zero_leading_diagonal() {
        // leading diagonal entry zero forces a row swap
        let mut m = BandedMatrix::new(3, 1, 1);
        m.set(0, 0, 0.0);
        m.set(0, 1, 1.0);
        m.set(1, 0, 1.0);
        m.set(1, 1, 2.0);
        m.set(1, 2, 1.0);
        m.set(2, 1, 1.0);
        m.set(2, 2, 2.0);
        let x_true = [1.0, 2.0, -1.0];
        let mut b = vec![0.0; 3];
        m.matvec(&x_true, &mut b);
        let lu = m.factor("test").unwrap();
        lu.solve(&mut b);
        for (xi, bi) in x_true.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn reports_singularity() {
        let mut m = BandedMatrix::new(3, 1, 1);
        // second column identically zero -> singular
        m.set(0, 0, 1.0);
        m.set(2, 2, 1.0);
        assert!(matches!(
            m.factor("test"),
            Err(Error::SingularSystem { .. })
        ));
    }
}
