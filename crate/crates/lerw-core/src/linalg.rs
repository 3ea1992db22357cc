//! Direct solvers for the killed-walk systems (I − P): dense LU for small
//! domains, band LU with partial pivoting for large signed systems, and band
//! Cholesky for large unsigned (positive definite) systems.
//!
//! All factorizations expose solves and the log-determinant with sign; the
//! signed transition matrix is symmetric but indefinite, so pivoted LU is
//! used there. Band layouts follow the LAPACK convention with `kl` extra
//! rows for pivoting fill.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix is singular at pivot {0}")]
    Singular(usize),
    #[error("matrix is not positive definite at row {0}")]
    NotPositiveDefinite(usize),
}

/// Dense LU factorization with partial pivoting.
pub struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
    swaps: usize,
}

impl DenseLu {
    /// Factors a row-major n×n matrix.
    pub fn new(n: usize, mut a: Vec<f64>) -> Result<DenseLu, LinalgError> {
        assert_eq!(a.len(), n * n);
        let mut piv = vec![0usize; n];
        let mut swaps = 0usize;
        for j in 0..n {
            let mut p = j;
            let mut best = a[j * n + j].abs();
            for i in (j + 1)..n {
                let v = a[i * n + j].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(LinalgError::Singular(j));
            }
            piv[j] = p;
            if p != j {
                swaps += 1;
                for c in 0..n {
                    a.swap(j * n + c, p * n + c);
                }
            }
            let d = a[j * n + j];
            for i in (j + 1)..n {
                let m = a[i * n + j] / d;
                a[i * n + j] = m;
                if m != 0.0 {
                    for c in (j + 1)..n {
                        a[i * n + c] -= m * a[j * n + c];
                    }
                }
            }
        }
        Ok(DenseLu {
            n,
            lu: a,
            piv,
            swaps,
        })
    }

    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        for j in 0..n {
            b.swap(j, self.piv[j]);
            let x = b[j];
            if x != 0.0 {
                for i in (j + 1)..n {
                    b[i] -= self.lu[i * n + j] * x;
                }
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.lu[j * n + j];
            let x = b[j];
            if x != 0.0 {
                for i in 0..j {
                    b[i] -= self.lu[i * n + j] * x;
                }
            }
        }
    }

    /// (log |det|, sign of det).
    pub fn log_det(&self) -> (f64, i32) {
        let mut logdet = 0.0;
        let mut sign = if self.swaps % 2 == 0 { 1 } else { -1 };
        for j in 0..self.n {
            let d = self.lu[j * self.n + j];
            logdet += d.abs().ln();
            if d < 0.0 {
                sign = -sign;
            }
        }
        (logdet, sign)
    }
}

/// Band LU with partial pivoting (LAPACK `gbtrf` layout).
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    /// column-major band storage, width 2·kl + ku + 1
    ab: Vec<f64>,
    piv: Vec<usize>,
    swaps: usize,
}

impl BandLu {
    /// Factors a band matrix given by `entry(i, j)` for |i − j| ≤ band.
    pub fn new(
        n: usize,
        band: usize,
        entry: impl Fn(usize, usize) -> f64,
    ) -> Result<BandLu, LinalgError> {
        let (kl, ku) = (band, band);
        let w = 2 * kl + ku + 1;
        let mut ab = vec![0.0f64; n * w];
        for j in 0..n {
            let lo = j.saturating_sub(ku);
            let hi = (j + kl).min(n - 1);
            for i in lo..=hi {
                ab[j * w + (kl + ku + i - j)] = entry(i, j);
            }
        }
        let mut piv = vec![0usize; n];
        let mut swaps = 0usize;
        let at = |ab: &Vec<f64>, i: usize, j: usize| ab[j * w + (kl + ku + i - j)];
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut p = 0usize;
            let mut best = at(&ab, j, j).abs();
            for q in 1..=km {
                let v = at(&ab, j + q, j).abs();
                if v > best {
                    best = v;
                    p = q;
                }
            }
            if best == 0.0 {
                return Err(LinalgError::Singular(j));
            }
            piv[j] = j + p;
            if p > 0 {
                swaps += 1;
                let cmax = (j + kl + ku).min(n - 1);
                for c in j..=cmax {
                    ab.swap(c * w + (kl + ku + j - c), c * w + (kl + ku + j + p - c));
                }
            }
            let d = at(&ab, j, j);
            for i in (j + 1)..=(j + km) {
                let m = at(&ab, i, j) / d;
                ab[j * w + (kl + ku + i - j)] = m;
            }
            let cmax = (j + kl + ku).min(n - 1);
            for c in (j + 1)..=cmax {
                let v = at(&ab, j, c);
                if v == 0.0 {
                    continue;
                }
                let base = c * w + kl + ku;
                for i in (j + 1)..=(j + km) {
                    let m = ab[j * w + (kl + ku + i - j)];
                    ab[base + i - c] -= m * v;
                }
            }
        }
        Ok(BandLu {
            n,
            kl,
            ku,
            ab,
            piv,
            swaps,
        })
    }

    pub fn solve(&self, b: &mut [f64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let w = 2 * kl + ku + 1;
        assert_eq!(b.len(), n);
        for j in 0..n {
            b.swap(j, self.piv[j]);
            let x = b[j];
            if x != 0.0 {
                let im = (j + kl).min(n - 1);
                for i in (j + 1)..=im {
                    b[i] -= self.ab[j * w + (kl + ku + i - j)] * x;
                }
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.ab[j * w + kl + ku];
            let x = b[j];
            if x != 0.0 {
                let lo = j.saturating_sub(kl + ku);
                for i in lo..j {
                    b[i] -= self.ab[j * w + (kl + ku + i - j)] * x;
                }
            }
        }
    }

    pub fn log_det(&self) -> (f64, i32) {
        let w = 2 * self.kl + self.ku + 1;
        let mut logdet = 0.0;
        let mut sign = if self.swaps % 2 == 0 { 1 } else { -1 };
        for j in 0..self.n {
            let d = self.ab[j * w + self.kl + self.ku];
            logdet += d.abs().ln();
            if d < 0.0 {
                sign = -sign;
            }
        }
        (logdet, sign)
    }
}

/// Band Cholesky A = L·Lᵀ for symmetric positive definite band matrices.
pub struct BandCholesky {
    n: usize,
    kl: usize,
    /// row-major: row i holds L(i, i−kl), …, L(i, i)
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn new(
        n: usize,
        band: usize,
        entry: impl Fn(usize, usize) -> f64,
    ) -> Result<BandCholesky, LinalgError> {
        let kl = band;
        let w = kl + 1;
        let mut l = vec![0.0f64; n * w];
        for i in 0..n {
            let jlo = i.saturating_sub(kl);
            for j in jlo..=i {
                let mut s = entry(i, j);
                let klo = jlo.max(j.saturating_sub(kl));
                for k in klo..j {
                    s -= l[i * w + (k + kl - i)] * l[j * w + (k + kl - j)];
                }
                if j == i {
                    if s <= 0.0 {
                        return Err(LinalgError::NotPositiveDefinite(i));
                    }
                    l[i * w + kl] = s.sqrt();
                } else {
                    l[i * w + (j + kl - i)] = s / l[j * w + kl];
                }
            }
        }
        Ok(BandCholesky { n, kl, l })
    }

    pub fn solve(&self, b: &mut [f64]) {
        let (n, kl) = (self.n, self.kl);
        let w = kl + 1;
        for i in 0..n {
            let jlo = i.saturating_sub(kl);
            let mut s = b[i];
            for j in jlo..i {
                s -= self.l[i * w + (j + kl - i)] * b[j];
            }
            b[i] = s / self.l[i * w + kl];
        }
        for i in (0..n).rev() {
            let jhi = (i + kl).min(n - 1);
            let mut s = b[i];
            for j in (i + 1)..=jhi {
                s -= self.l[j * w + (i + kl - j)] * b[j];
            }
            b[i] = s / self.l[i * w + kl];
        }
    }

    pub fn log_det(&self) -> (f64, i32) {
        let w = self.kl + 1;
        let mut half = 0.0;
        for i in 0..self.n {
            half += self.l[i * w + self.kl].ln();
        }
        (2.0 * half, 1)
    }
}

/// Incremental LDLᵀ of a growing symmetric matrix with push/pop, used for
/// loop-factor determinants along depth-first SAW enumeration. Pivot k is the
/// conditioned Green's diagonal G_{A∖{v₁…v_{k−1}}}(v_k, v_k), so the running
/// product of pivots is F(prefix; A).
pub struct BorderedFactor {
    /// max dimension
    cap: usize,
    k: usize,
    /// row-major lower-triangular factor rows (unit diagonal implicit)
    l: Vec<f64>,
    d: Vec<f64>,
    /// running pivot products; pivots of killed-walk Green matrices lie in
    /// [1, G_max], so the plain product cannot overflow at these depths
    fprod: Vec<f64>,
}

impl BorderedFactor {
    pub fn new(cap: usize) -> BorderedFactor {
        BorderedFactor {
            cap,
            k: 0,
            l: vec![0.0; cap * cap],
            d: vec![0.0; cap],
            fprod: {
                let mut v = vec![1.0; cap + 1];
                v[0] = 1.0;
                v
            },
        }
    }

    pub fn depth(&self) -> usize {
        self.k
    }

    /// Current F value (product of pivots so far).
    pub fn f_value(&self) -> f64 {
        self.fprod[self.k]
    }

    /// Pushes a vertex with column `col` = G[v, prefix..] and diagonal
    /// `diag` = G[v, v]. Returns the new pivot G_{A∖prefix}(v, v).
    pub fn push(&mut self, col: &[f64], diag: f64) -> f64 {
        let k = self.k;
        assert!(k < self.cap);
        assert_eq!(col.len(), k);
        // solve L w = col, scale by D⁻¹
        let row = k * self.cap;
        for j in 0..k {
            let mut s = col[j];
            for m in 0..j {
                s -= self.l[j * self.cap + m] * self.d[m] * self.l[row + m];
            }
            self.l[row + j] = s / self.d[j];
        }
        let mut pivot = diag;
        for m in 0..k {
            pivot -= self.l[row + m] * self.l[row + m] * self.d[m];
        }
        self.d[k] = pivot;
        self.fprod[k + 1] = self.fprod[k] * pivot;
        self.k = k + 1;
        pivot
    }

    pub fn pop(&mut self) {
        assert!(self.k > 0);
        self.k -= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_det(n: usize, a: &[f64]) -> f64 {
        // cofactor expansion, n ≤ 4, oracle only
        match n {
            1 => a[0],
            2 => a[0] * a[3] - a[1] * a[2],
            _ => {
                let mut det = 0.0;
                for c in 0..n {
                    let mut minor = Vec::new();
                    for i in 1..n {
                        for j in 0..n {
                            if j != c {
                                minor.push(a[i * n + j]);
                            }
                        }
                    }
                    let s = if c % 2 == 0 { 1.0 } else { -1.0 };
                    det += s * a[c] * dense_det(n - 1, &minor);
                }
                det
            }
        }
    }

    fn xorshift(state: &mut u64) -> f64 {
        *state ^= *state << 13;
        *state ^= *state >> 7;
        *state ^= *state << 17;
        (*state % 1000) as f64 / 500.0 - 1.0
    }

    #[test]
    fn dense_lu_matches_cofactor_det_and_solves() {
        let mut st = 0x9e3779b97f4a7c15u64;
        for n in 1..=4usize {
            for _ in 0..20 {
                let mut a: Vec<f64> = (0..n * n).map(|_| xorshift(&mut st)).collect();
                for i in 0..n {
                    a[i * n + i] += 3.0; // keep well-conditioned
                }
                let det = dense_det(n, &a);
                let lu = DenseLu::new(n, a.clone()).unwrap();
                let (ld, s) = lu.log_det();
                assert!(
                    (s as f64 * ld.exp() - det).abs() < 1e-9 * det.abs().max(1.0),
                    "n={n}"
                );
                let x0: Vec<f64> = (0..n).map(|_| xorshift(&mut st)).collect();
                let mut b = vec![0.0; n];
                for i in 0..n {
                    for j in 0..n {
                        b[i] += a[i * n + j] * x0[j];
                    }
                }
                lu.solve(&mut b);
                for i in 0..n {
                    assert!((b[i] - x0[i]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn band_lu_matches_dense() {
        let mut st = 42u64;
        for &(n, band) in &[(8usize, 2usize), (20, 3), (30, 5), (17, 1)] {
            let mut a = vec![0.0f64; n * n];
            for i in 0..n {
                for j in 0..n {
                    if i.abs_diff(j) <= band {
                        a[i * n + j] = xorshift(&mut st);
                    }
                }
                a[i * n + i] += 4.0;
            }
            let dense = DenseLu::new(n, a.clone()).unwrap();
            let bd = BandLu::new(n, band, |i, j| a[i * n + j]).unwrap();
            let (ld1, s1) = dense.log_det();
            let (ld2, s2) = bd.log_det();
            assert_eq!(s1, s2);
            assert!((ld1 - ld2).abs() < 1e-10 * ld1.abs().max(1.0));
            let mut b1: Vec<f64> = (0..n).map(|_| xorshift(&mut st)).collect();
            let mut b2 = b1.clone();
            dense.solve(&mut b1);
            bd.solve(&mut b2);
            for i in 0..n {
                assert!((b1[i] - b2[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn band_lu_handles_indefinite_rows() {
        // forces pivoting: tiny diagonal
        let n = 6;
        let a = |i: usize, j: usize| -> f64 {
            if i == j {
                if i == 2 {
                    1e-14
                } else {
                    2.0
                }
            } else if i.abs_diff(j) == 1 {
                1.0
            } else {
                0.0
            }
        };
        let bd = BandLu::new(n, 1, a).unwrap();
        let mut full = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i.abs_diff(j) <= 1 {
                    full[i * n + j] = a(i, j);
                }
            }
        }
        let dense = DenseLu::new(n, full).unwrap();
        let (l1, s1) = dense.log_det();
        let (l2, s2) = bd.log_det();
        assert_eq!(s1, s2);
        assert!((l1 - l2).abs() < 1e-8);
    }

    #[test]
    fn band_cholesky_matches_dense_on_spd() {
        let mut st = 7u64;
        for &(n, band) in &[(10usize, 2usize), (25, 4)] {
            // build SPD band: diagonally dominant symmetric
            let mut a = vec![0.0f64; n * n];
            for i in 0..n {
                for j in i..n.min(i + band + 1) {
                    if i != j {
                        let v = 0.3 * xorshift(&mut st);
                        a[i * n + j] = v;
                        a[j * n + i] = v;
                    }
                }
                a[i * n + i] = 4.0;
            }
            let chol = BandCholesky::new(n, band, |i, j| a[i * n + j]).unwrap();
            let dense = DenseLu::new(n, a.clone()).unwrap();
            let (l1, _) = dense.log_det();
            let (l2, s2) = chol.log_det();
            assert_eq!(s2, 1);
            assert!((l1 - l2).abs() < 1e-9);
            let mut b1: Vec<f64> = (0..n).map(|_| xorshift(&mut st)).collect();
            let mut b2 = b1.clone();
            dense.solve(&mut b1);
            chol.solve(&mut b2);
            for i in 0..n {
                assert!((b1[i] - b2[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn bordered_factor_tracks_submatrix_determinants() {
        // G must be symmetric with positive leading minors; use SPD
        let n = 6;
        let mut g = vec![0.0f64; n * n];
        let mut st = 11u64;
        for i in 0..n {
            for j in i..n {
                let v = 0.2 * xorshift(&mut st);
                g[i * n + j] = v;
                g[j * n + i] = v;
            }
            g[i * n + i] = 2.0 + i as f64 * 0.1;
        }
        let mut bf = BorderedFactor::new(n);
        let mut dets = Vec::new();
        for k in 0..n {
            let col: Vec<f64> = (0..k).map(|j| g[k * n + j]).collect();
            bf.push(&col, g[k * n + k]);
            dets.push(bf.f_value());
        }
        // compare against cofactor determinants of leading minors
        for k in 1..=4usize {
            let mut sub = vec![0.0; k * k];
            for i in 0..k {
                for j in 0..k {
                    sub[i * k + j] = g[i * n + j];
                }
            }
            let det = dense_det(k, &sub);
            assert!((dets[k - 1] - det).abs() < 1e-10 * det.abs().max(1.0));
        }
        // pop/push consistency
        bf.pop();
        bf.pop();
        let col: Vec<f64> = (0..4).map(|j| g[4 * n + j]).collect();
        bf.push(&col, g[4 * n + 4]);
        assert!((bf.f_value() - dets[4]).abs() < 1e-12 * dets[4].abs());
    }
}
