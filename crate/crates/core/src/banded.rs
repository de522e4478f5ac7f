//! Banded matrices, LU with partial pivoting, and a shift-invert subspace
//! eigensolver for symmetric pencils `K x = lambda M x` with `M` positive
//! definite.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Square matrix with `kl` sub- and `ku` super-diagonals.
///
/// Each row keeps `kl` extra slots to the right so an in-place LU with row
/// pivoting has room for fill-in.
#[derive(Debug, Clone)]
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
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// Rows/columns `range` as a new band matrix.
    pub fn submatrix(&self, range: std::ops::Range<usize>) -> BandMatrix {
        let n = range.len();
        let mut out = BandMatrix::zeros(n, self.kl, self.ku);
        for i in 0..n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(n - 1);
            for j in lo..=hi {
                let v = self.get(range.start + i, range.start + j);
                if v != 0.0 {
                    out.add(i, j, v);
                }
            }
        }
        out
    }

    /// `self + alpha * other`, both with the same band structure.
    pub fn axpy(&self, alpha: f64, other: &BandMatrix) -> BandMatrix {
        assert_eq!((self.n, self.kl, self.ku), (other.n, other.kl, other.ku));
        let mut out = self.clone();
        for (o, &v) in out.data.iter_mut().zip(&other.data) {
            *o += alpha * v;
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.data[self.idx(i, j)] * x[j]).sum()
            })
            .collect()
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.matvec(y))
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let mut max_abs: f64 = 0.0;
        let mut max_diff: f64 = 0.0;
        for i in 0..self.n {
            for j in i..=(i + self.ku).min(self.n - 1) {
                let a = self.get(i, j);
                let b = self.get(j, i);
                max_abs = max_abs.max(a.abs()).max(b.abs());
                max_diff = max_diff.max((a - b).abs());
            }
        }
        if max_abs == 0.0 {
            0.0
        } else {
            max_diff / max_abs
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// LU factorisation with partial pivoting.
    #[allow(clippy::needless_range_loop)]
    pub fn lu(&self) -> Result<BandLu> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut a = self.clone();
        let mut piv = vec![0usize; n];
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = a.data[a.idx(k, k)].abs();
            for i in (k + 1)..=last_row {
                let v = a.data[a.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            piv[k] = p;
            if best <= scale * 1e-300 {
                return Err(Error::SingularMatrix(k));
            }
            let last_col = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let ik = a.idx(k, j);
                    let ip = a.idx(p, j);
                    a.data.swap(ik, ip);
                }
            }
            let pivot = a.data[a.idx(k, k)];
            for i in (k + 1)..=last_row {
                let ik = a.idx(i, k);
                let l = a.data[ik] / pivot;
                a.data[ik] = l;
                if l != 0.0 {
                    for j in (k + 1)..=last_col {
                        let kj = a.data[a.idx(k, j)];
                        let ij = a.idx(i, j);
                        a.data[ij] -= l * kj;
                    }
                }
            }
        }
        Ok(BandLu { lu: a, piv })
    }
}

/// Factorised band matrix.
#[derive(Debug, Clone)]
pub struct BandLu {
    lu: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let a = &self.lu;
        let n = a.n;
        let mut b = rhs.to_vec();
        for k in 0..n {
            b.swap(k, self.piv[k]);
            let bk = b[k];
            if bk != 0.0 {
                for i in (k + 1)..=(k + a.kl).min(n - 1) {
                    b[i] -= a.data[a.idx(i, k)] * bk;
                }
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in (i + 1)..=(i + a.kl + a.ku).min(n - 1) {
                s -= a.data[a.idx(i, j)] * b[j];
            }
            b[i] = s / a.data[a.idx(i, i)];
        }
        b
    }

    /// Smallest `|u_ii|` over largest, a crude conditioning indicator.
    pub fn pivot_ratio(&self) -> f64 {
        let d: Vec<f64> = (0..self.lu.n).map(|i| self.lu.data[self.lu.idx(i, i)].abs()).collect();
        let max = d.iter().cloned().fold(0.0, f64::max);
        let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
        if max == 0.0 {
            0.0
        } else {
            min / max
        }
    }
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// One eigenpair of the pencil, eigenvector `M`-normalised.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// `||K x - lambda M x|| / (||K x|| + |lambda| ||M x||)`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct EigsOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Extra subspace columns beyond the requested count.
    pub guard: usize,
    /// Residual accepted once iteration stagnates at the rounding floor.
    pub stall_tol: f64,
}

impl Default for EigsOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 400,
            guard: 6,
            stall_tol: 1e-8,
        }
    }
}

/// The `count` eigenpairs of `K x = lambda M x` closest to `shift`, ordered
/// by distance to the shift.
///
/// Subspace iteration on `(K - shift M)^-1 M` with Rayleigh-Ritz on the
/// original pencil. The start block is deterministic: the normalised
/// all-ones vector followed by cosine modes.
pub fn eigs_near(
    k: &BandMatrix,
    m: &BandMatrix,
    shift: f64,
    count: usize,
    opts: EigsOptions,
) -> Result<Vec<EigenPair>> {
    let n = k.dim();
    assert_eq!(m.dim(), n);
    let count = count.min(n);
    let p = (count + opts.guard).min(n);
    let lu = k.axpy(-shift, m).lu()?;

    let mut x: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            (0..n)
                .map(|i| {
                    if j == 0 {
                        1.0
                    } else {
                        (std::f64::consts::PI * j as f64 * (i as f64 + 0.5) / n as f64).cos()
                    }
                })
                .collect()
        })
        .collect();

    let mut last_residual = f64::INFINITY;
    let mut stalled = 0;
    for _ in 0..opts.max_iter {
        let mut y: Vec<Vec<f64>> = x.iter().map(|xi| lu.solve(&m.matvec(xi))).collect();
        m_orthonormalize(&mut y, m);
        let (values, vectors) = rayleigh_ritz(k, m, &y)?;

        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| {
            (values[a] - shift)
                .abs()
                .partial_cmp(&(values[b] - shift).abs())
                .unwrap()
        });
        let pairs: Vec<(f64, Vec<f64>)> = order.iter().map(|&c| (values[c], vectors[c].clone())).collect();

        let residuals: Vec<f64> = pairs
            .iter()
            .take(count)
            .map(|(lam, v)| pencil_residual(k, m, *lam, v))
            .collect();
        let worst = residuals.iter().cloned().fold(0.0, f64::max);
        // rounding floor: stop once the residual no longer improves
        if worst > 0.5 * last_residual {
            stalled += 1;
        } else {
            stalled = 0;
        }
        last_residual = worst;
        x = pairs.iter().map(|(_, v)| v.clone()).collect();
        if worst < opts.tol || (stalled >= 4 && worst < opts.stall_tol) {
            return Ok(pairs
                .into_iter()
                .take(count)
                .zip(residuals)
                .map(|((value, vector), residual)| EigenPair {
                    value,
                    vector,
                    residual,
                })
                .collect());
        }
    }
    Err(Error::NoConvergence {
        shift,
        iterations: opts.max_iter,
        residual: last_residual,
    })
}

pub fn pencil_residual(k: &BandMatrix, m: &BandMatrix, lambda: f64, v: &[f64]) -> f64 {
    let kv = k.matvec(v);
    let mv = m.matvec(v);
    let r: f64 = kv
        .iter()
        .zip(&mv)
        .map(|(a, b)| (a - lambda * b).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale = dot(&kv, &kv).sqrt() + lambda.abs() * dot(&mv, &mv).sqrt();
    if scale == 0.0 {
        0.0
    } else {
        r / scale
    }
}

/// Modified Gram-Schmidt in the `M` inner product, applied twice.
fn m_orthonormalize(cols: &mut [Vec<f64>], m: &BandMatrix) {
    for _pass in 0..2 {
        for j in 0..cols.len() {
            let mj = m.matvec(&cols[j]);
            let nrm = dot(&cols[j], &mj).sqrt();
            if nrm > 0.0 {
                cols[j].iter_mut().for_each(|v| *v /= nrm);
            }
            let mj = m.matvec(&cols[j]);
            for c in (j + 1)..cols.len() {
                let proj = dot(&cols[c], &mj);
                let (head, tail) = cols.split_at_mut(c);
                for (t, h) in tail[0].iter_mut().zip(&head[j]) {
                    *t -= proj * h;
                }
            }
        }
    }
}

/// Ritz pairs of the pencil on the span of `basis` (assumed `M`-orthonormal).
fn rayleigh_ritz(k: &BandMatrix, m: &BandMatrix, basis: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let p = basis.len();
    let kb: Vec<Vec<f64>> = basis.iter().map(|b| k.matvec(b)).collect();
    let mb: Vec<Vec<f64>> = basis.iter().map(|b| m.matvec(b)).collect();
    let kp = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&basis[i], &kb[j]) + dot(&basis[j], &kb[i])));
    let mp = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&basis[i], &mb[j]) + dot(&basis[j], &mb[i])));
    let chol = mp
        .cholesky()
        .ok_or_else(|| Error::Consistency("projected mass matrix not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Consistency("projected mass factor singular".into()))?;
    let c = &linv * kp * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let z = linv.transpose() * &eig.eigenvectors;
    let n = basis[0].len();
    let vectors = (0..p)
        .map(|col| {
            let mut v = vec![0.0; n];
            for (r, b) in basis.iter().enumerate() {
                let w = z[(r, col)];
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi += w * bi;
                }
            }
            v
        })
        .collect();
    Ok((eig.eigenvalues.iter().copied().collect(), vectors))
}
