//! Banded matrices and LU factorisation with partial pivoting.
//!
//! Storage follows the LAPACK general-band layout: column `j` occupies a
//! stripe of `2*kl + ku + 1` entries and `A[i][j]` lives at row
//! `kl + ku + i - j` of that stripe. The top `kl` rows start out empty and
//! receive the fill produced by row interchanges.

use crate::error::{Error, Result};

/// Pivots with magnitude below this are treated as exact zeros.
pub const SINGULAR_PIVOT: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            ab: vec![0.0; (2 * kl + ku + 1) * n],
        }
    }

    pub fn identity(n: usize, kl: usize, ku: usize) -> Self {
        let mut a = Self::zeros(n, kl, ku);
        for i in 0..n {
            a.set(i, i, 1.0);
        }
        a
    }

    /// Builds a banded matrix from dense rows; entries outside the band must be zero.
    pub fn from_dense(rows: &[Vec<f64>], kl: usize, ku: usize) -> Result<Self> {
        let n = rows.len();
        let mut a = Self::zeros(n, kl, ku);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if a.in_band(i, j) {
                    a.set(i, j, v);
                } else if v != 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "entry ({i}, {j}) lies outside the band kl={kl}, ku={ku}"
                    )));
                }
            }
        }
        Ok(a)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.kl
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.ku
    }

    fn ldab(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.ldab() + self.kl + self.ku + i - j
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i <= j + self.kl && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.ab[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// # Panics
    /// If `(i, j)` is outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.ab[k] = v;
    }

    /// # Panics
    /// If `(i, j)` is outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.ab[k] += v;
    }

    /// Number of structurally in-band entries of row `i` that are non-zero.
    pub fn row_nonzeros(&self, i: usize) -> usize {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.ku).min(self.n - 1);
        (lo..=hi).filter(|&j| self.get(i, j) != 0.0).count()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        Ok((0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect())
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Raw band storage, including the fill rows.
    pub fn storage(&self) -> &[f64] {
        &self.ab
    }

    /// Factorises `self` in place of a copy.
    pub fn factor(&self) -> Result<BandedLu> {
        lu_factor(self.clone())
    }
}

/// In-band LU factors with the row-interchange log.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedLu {
    lu: BandedMatrix,
    pivots: Vec<usize>,
}

/// Gaussian elimination with partial pivoting restricted to the band.
pub fn lu_factor(mut a: BandedMatrix) -> Result<BandedLu> {
    let n = a.n;
    let kl = a.kl;
    let kv = a.kl + a.ku;
    let ld = a.ldab();
    let mut pivots = vec![0usize; n];
    // last column touched by U so far
    let mut ju = 0usize;
    for j in 0..n {
        let km = kl.min(n - 1 - j);
        let col = j * ld + kv;
        let mut jp = 0usize;
        let mut best = a.ab[col].abs();
        for p in 1..=km {
            let v = a.ab[col + p].abs();
            if v > best {
                best = v;
                jp = p;
            }
        }
        pivots[j] = j + jp;
        if !(best >= SINGULAR_PIVOT) {
            return Err(Error::Singular { column: j });
        }
        ju = ju.max((j + a.ku + jp).min(n - 1));
        if jp != 0 {
            for c in j..=ju {
                let r0 = c * ld + kv + j - c;
                a.ab.swap(r0, r0 + jp);
            }
        }
        if km > 0 {
            let inv = 1.0 / a.ab[col];
            for p in 1..=km {
                a.ab[col + p] *= inv;
            }
            for c in j + 1..=ju {
                let base = c * ld + kv + j - c;
                let ujc = a.ab[base];
                if ujc != 0.0 {
                    for p in 1..=km {
                        a.ab[base + p] -= a.ab[col + p] * ujc;
                    }
                }
            }
        }
    }
    Ok(BandedLu { lu: a, pivots })
}

impl BandedLu {
    pub fn order(&self) -> usize {
        self.lu.n
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn factors(&self) -> &BandedMatrix {
        &self.lu
    }

    /// Solves `A x = b` with the stored factors.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_in_place(&self, x: &mut [f64]) -> Result<()> {
        let a = &self.lu;
        let n = a.n;
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x.len(),
            });
        }
        let kv = a.kl + a.ku;
        let ld = a.ldab();
        // L y = P b, interchanges applied as they were made
        for j in 0..n {
            let lm = a.kl.min(n - 1 - j);
            let l = self.pivots[j];
            if l != j {
                x.swap(l, j);
            }
            let xj = x[j];
            if xj != 0.0 {
                let col = j * ld + kv;
                for p in 1..=lm {
                    x[j + p] -= a.ab[col + p] * xj;
                }
            }
        }
        // U x = y; U has kl + ku superdiagonals
        for j in (0..n).rev() {
            let col = j * ld + kv;
            x[j] /= a.ab[col];
            let xj = x[j];
            if xj != 0.0 {
                let top = j.saturating_sub(kv);
                for i in top..j {
                    x[i] -= a.ab[col + i - j] * xj;
                }
            }
        }
        Ok(())
    }
}

/// Factorises and solves in one call.
pub fn solve(a: &BandedMatrix, b: &[f64]) -> Result<Vec<f64>> {
    a.factor()?.solve(b)
}
