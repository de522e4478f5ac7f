//! The 4x4 structure matrix `T`, the oscillatory/exponential basis `N`, and
//! the boundary matrices `G(gamma)` and `G_delta`.

use nalgebra::{Matrix4, Vector4};

/// `T = diag(T1, T2)` with `T1 = [[0, -1], [1, 0]]`, `T2 = diag(-1, 1)`.
pub fn t() -> Matrix4<f64> {
    Matrix4::new(
        0.0, -1.0, 0.0, 0.0, //
        1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, -1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0,
    )
}

/// `T^k` for any `k`, using `T^4 = I`.
pub fn t_pow(k: usize) -> Matrix4<f64> {
    match k % 4 {
        0 => Matrix4::identity(),
        1 => t(),
        2 => Matrix4::from_diagonal(&Vector4::new(-1.0, -1.0, 1.0, 1.0)),
        _ => t().transpose(),
    }
}

/// `N(xi, tau)` given `tau(xi)`, `tau(-1)` and `tau(1)`.
pub fn n_vec(tau: f64, tau_lo: f64, tau_hi: f64) -> Vector4<f64> {
    Vector4::new(tau.cos(), tau.sin(), (-tau + tau_lo).exp(), (tau - tau_hi).exp())
}

/// Limit of `N` at `xi = -1`.
pub fn n_minus() -> Vector4<f64> {
    Vector4::new(1.0, 0.0, 1.0, 0.0)
}

/// Limit of `N` at `xi = 1` along the quantized sequence.
pub fn n_plus(delta: f64) -> Vector4<f64> {
    Vector4::new(delta.cos(), delta.sin(), 0.0, 1.0)
}

/// Boundary matrix with rows `T^2 N(-1)`, `T^3 N(-1)`, `T^2 N(1)`, `T^3 N(1)`
/// at phase `gamma = gamma(1)`, exponentials kept.
pub fn g_matrix(gamma: f64) -> Matrix4<f64> {
    let e = (-gamma).exp();
    let (s, c) = gamma.sin_cos();
    Matrix4::new(
        -1.0, 0.0, 1.0, e, //
        0.0, -1.0, -1.0, e, //
        -c, -s, e, 1.0, //
        s, -c, -e, 1.0,
    )
}

/// `G(gamma)` with the exponentially small entries dropped and
/// `gamma = delta (mod 2 pi)`.
pub fn g_delta(delta: f64) -> Matrix4<f64> {
    let (s, c) = delta.sin_cos();
    Matrix4::new(
        -1.0, 0.0, 1.0, 0.0, //
        0.0, -1.0, -1.0, 0.0, //
        -c, -s, 0.0, 1.0, //
        s, -c, 0.0, 1.0,
    )
}

pub fn det_g_closed(gamma: f64) -> f64 {
    let e = (-gamma).exp();
    -2.0 * gamma.cos() + 2.0 * e * (2.0 - e * gamma.cos())
}

pub fn det_g_delta_closed(delta: f64) -> f64 {
    -2.0 * delta.cos()
}

/// Cofactor expansion along the first row.
pub fn det4(m: &Matrix4<f64>) -> f64 {
    let minor = |skip: usize| {
        let cols: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
        let a = |r: usize, c: usize| m[(r, cols[c])];
        a(1, 0) * (a(2, 1) * a(3, 2) - a(2, 2) * a(3, 1)) - a(1, 1) * (a(2, 0) * a(3, 2) - a(2, 2) * a(3, 0))
            + a(1, 2) * (a(2, 0) * a(3, 1) - a(2, 1) * a(3, 0))
    };
    (0..4)
        .map(|c| {
            let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
            sign * m[(0, c)] * minor(c)
        })
        .sum()
}
