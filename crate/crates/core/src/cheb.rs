//! Chebyshev-Lobatto collocation on `[-1, 1]`.
//!
//! Functions are carried as values at the `n` Lobatto nodes (ascending).
//! Differentiation and integration go through coefficient space; tails below
//! `CHOP` relative to the largest coefficient are dropped before
//! differentiating so that roundoff is not amplified.

use std::f64::consts::PI;

use nalgebra::Vector4;

const CHOP: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct Chebyshev {
    nodes: Vec<f64>,
    /// `basis[j][k] = T_j(x_k)`
    basis: Vec<Vec<f64>>,
}

impl Chebyshev {
    pub fn new(n: usize) -> Self {
        assert!(n >= 3, "need at least three Lobatto nodes");
        let deg = n - 1;
        let nodes: Vec<f64> = (0..n).map(|k| -(PI * k as f64 / deg as f64).cos()).collect();
        let basis = (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| {
                        let t = (PI * ((j * k) % (2 * deg)) as f64 / deg as f64).cos();
                        if j % 2 == 1 {
                            -t
                        } else {
                            t
                        }
                    })
                    .collect()
            })
            .collect();
        Self { nodes, basis }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    pub fn coeffs(&self, values: &[f64]) -> Vec<f64> {
        let n = self.len();
        let deg = (n - 1) as f64;
        let half = |k: usize| if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        (0..n)
            .map(|j| {
                let s: f64 = (0..n).map(|k| half(k) * values[k] * self.basis[j][k]).sum();
                2.0 / deg * s * half(j)
            })
            .collect()
    }

    pub fn values(&self, coeffs: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|k| coeffs.iter().zip(&self.basis).map(|(c, row)| c * row[k]).sum())
            .collect()
    }

    pub fn diff(&self, values: &[f64]) -> Vec<f64> {
        let mut c = self.coeffs(values);
        chop(&mut c);
        self.values(&diff_coeffs(&c))
    }

    pub fn diff_n(&self, values: &[f64], order: usize) -> Vec<f64> {
        let mut c = self.coeffs(values);
        for _ in 0..order {
            chop(&mut c);
            c = diff_coeffs(&c);
        }
        self.values(&c)
    }

    /// `x -> int_{-1}^x f`.
    pub fn cumint(&self, values: &[f64]) -> Vec<f64> {
        self.values(&cumint_coeffs(&self.coeffs(values)))
    }

    /// Clenshaw-Curtis integral over `[-1, 1]`.
    pub fn integral(&self, values: &[f64]) -> f64 {
        let c = self.coeffs(values);
        c.iter()
            .enumerate()
            .step_by(2)
            .map(|(j, cj)| 2.0 * cj / (1.0 - (j * j) as f64))
            .sum()
    }

    pub fn interpolant(&self, values: &[f64]) -> ChebFn {
        ChebFn {
            coeffs: self.coeffs(values),
        }
    }

    pub fn diff_vec(&self, f: &[Vector4<f64>]) -> Vec<Vector4<f64>> {
        self.map_components(f, |v| self.diff(v))
    }

    pub fn diff_n_vec(&self, f: &[Vector4<f64>], order: usize) -> Vec<Vector4<f64>> {
        self.map_components(f, |v| self.diff_n(v, order))
    }

    pub fn cumint_vec(&self, f: &[Vector4<f64>]) -> Vec<Vector4<f64>> {
        self.map_components(f, |v| self.cumint(v))
    }

    fn map_components(&self, f: &[Vector4<f64>], op: impl Fn(&[f64]) -> Vec<f64>) -> Vec<Vector4<f64>> {
        let cols: Vec<Vec<f64>> = (0..4)
            .map(|c| op(&f.iter().map(|v| v[c]).collect::<Vec<_>>()))
            .collect();
        (0..f.len())
            .map(|k| Vector4::new(cols[0][k], cols[1][k], cols[2][k], cols[3][k]))
            .collect()
    }
}

/// A Chebyshev series on `[-1, 1]`, evaluated with Clenshaw's recurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebFn {
    pub coeffs: Vec<f64>,
}

impl ChebFn {
    pub fn eval(&self, x: f64) -> f64 {
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * x * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs.first().copied().unwrap_or(0.0) + x * b1 - b2
    }

    pub fn derivative(&self) -> ChebFn {
        let mut c = self.coeffs.clone();
        chop(&mut c);
        ChebFn {
            coeffs: diff_coeffs(&c),
        }
    }
}

/// Four Chebyshev series evaluated together.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebVec4(pub [ChebFn; 4]);

impl ChebVec4 {
    pub fn new(cheb: &Chebyshev, f: &[Vector4<f64>]) -> Self {
        let comp = |c: usize| cheb.interpolant(&f.iter().map(|v| v[c]).collect::<Vec<_>>());
        Self([comp(0), comp(1), comp(2), comp(3)])
    }

    pub fn eval(&self, x: f64) -> Vector4<f64> {
        Vector4::new(
            self.0[0].eval(x),
            self.0[1].eval(x),
            self.0[2].eval(x),
            self.0[3].eval(x),
        )
    }
}

fn chop(c: &mut [f64]) {
    let max = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return;
    }
    for v in c.iter_mut().rev() {
        if v.abs() > CHOP * max {
            break;
        }
        *v = 0.0;
    }
}

fn diff_coeffs(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    for j in (1..n).rev() {
        let above = if j + 1 < n { d[j + 1] } else { 0.0 };
        d[j - 1] = above + 2.0 * j as f64 * c[j];
    }
    d[0] *= 0.5;
    d
}

fn cumint_coeffs(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    let get = |j: usize| c.get(j).copied().unwrap_or(0.0);
    let mut b = vec![0.0; n];
    for (j, bj) in b.iter_mut().enumerate().skip(1) {
        let prev = if j == 1 { 2.0 * get(0) } else { get(j - 1) };
        *bj = (prev - get(j + 1)) / (2.0 * j as f64);
    }
    b[0] = -b
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, v)| if j % 2 == 1 { -v } else { *v })
        .sum::<f64>();
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_clenshaw() {
        let ch = Chebyshev::new(33);
        let f = ch.sample(|x| (2.0 * x).sin() + x * x);
        let back = ch.values(&ch.coeffs(&f));
        for (a, b) in f.iter().zip(&back) {
            assert!((a - b).abs() < 1e-14);
        }
        let fun = ch.interpolant(&f);
        for &x in &[-0.77, 0.0, 0.31, 1.0] {
            assert!((fun.eval(x) - ((2.0 * x).sin() + x * x)).abs() < 1e-13);
        }
    }

    #[test]
    fn spectral_derivatives() {
        let ch = Chebyshev::new(64);
        let f = ch.sample(|x| (3.0 * x).exp());
        let d1 = ch.diff(&f);
        let d3 = ch.diff_n(&f, 3);
        for (k, &x) in ch.nodes().iter().enumerate() {
            let e = (3.0 * x).exp();
            let scale = 3f64.exp();
            assert!((d1[k] - 3.0 * e).abs() < 1e-12 * 3.0 * scale, "d1 at {x}");
            assert!((d3[k] - 27.0 * e).abs() < 1e-9 * 27.0 * scale, "d3 at {x}");
        }
    }

    #[test]
    fn cumulative_integral_and_quadrature() {
        let ch = Chebyshev::new(40);
        let f = ch.sample(|x| x.cos());
        let g = ch.cumint(&f);
        for (k, &x) in ch.nodes().iter().enumerate() {
            assert!((g[k] - (x.sin() + 1f64.sin())).abs() < 1e-14);
        }
        assert!((ch.integral(&f) - 2.0 * 1f64.sin()).abs() < 1e-14);
    }
}
