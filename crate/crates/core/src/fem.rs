//! Hermite-cubic (C1) finite elements for fourth-order operators on an
//! interval.
//!
//! Unknowns are `(v, v')` at every node, interleaved: dof `2i` is the value
//! and `2i + 1` the slope at node `i`. Element coupling gives a band matrix
//! with three sub- and super-diagonals.

use serde::{Deserialize, Serialize};

use crate::banded::BandMatrix;
use crate::quad::GaussLegendre;

pub const BANDWIDTH: usize = 3;

/// Values and derivatives of the four Hermite shape functions at local
/// coordinate `s in [0, 1]` on an element of length `h`; derivatives are
/// with respect to `x`.
pub fn shape(s: f64, h: f64) -> [[f64; 4]; 4] {
    let s2 = s * s;
    let s3 = s2 * s;
    let n = [
        1.0 - 3.0 * s2 + 2.0 * s3,
        h * (s - 2.0 * s2 + s3),
        3.0 * s2 - 2.0 * s3,
        h * (-s2 + s3),
    ];
    let d1 = [
        (-6.0 * s + 6.0 * s2) / h,
        1.0 - 4.0 * s + 3.0 * s2,
        (6.0 * s - 6.0 * s2) / h,
        -2.0 * s + 3.0 * s2,
    ];
    let d2 = [
        (-6.0 + 12.0 * s) / (h * h),
        (-4.0 + 6.0 * s) / h,
        (6.0 - 12.0 * s) / (h * h),
        (-2.0 + 6.0 * s) / h,
    ];
    let d3 = [12.0 / (h * h * h), 6.0 / (h * h), -12.0 / (h * h * h), 6.0 / (h * h)];
    [n, d1, d2, d3]
}

/// Node positions on an interval. Nodes are strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub nodes: Vec<f64>,
}

impl Mesh {
    pub fn uniform(lo: f64, hi: f64, elements: usize) -> Self {
        let mut nodes: Vec<f64> = (0..=elements)
            .map(|i| lo + (hi - lo) * i as f64 / elements as f64)
            .collect();
        nodes[elements] = hi;
        Self { nodes }
    }

    /// Concatenate uniform pieces `[(lo, hi, elements), ...]` that share endpoints.
    pub fn piecewise(pieces: &[(f64, f64, usize)]) -> Self {
        let mut nodes = Vec::new();
        for (k, &(lo, hi, n)) in pieces.iter().enumerate() {
            let part = Mesh::uniform(lo, hi, n).nodes;
            let skip = usize::from(k > 0);
            nodes.extend_from_slice(&part[skip..]);
        }
        Self { nodes }
    }

    pub fn elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn dofs(&self) -> usize {
        2 * self.nodes.len()
    }

    pub fn lo(&self) -> f64 {
        self.nodes[0]
    }

    pub fn hi(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Element index containing `x` (clamped to the mesh).
    pub fn locate(&self, x: f64) -> usize {
        locate(&self.nodes, x)
    }
}

fn locate(nodes: &[f64], x: f64) -> usize {
    let n = nodes.len() - 1;
    match nodes.binary_search_by(|v| v.total_cmp(&x)) {
        Ok(i) => i.min(n - 1),
        Err(i) => i.saturating_sub(1).min(n - 1),
    }
}

/// Global stiffness for `int k0 v'' w'' + k1 v' w' + k2 v w` and mass for
/// `int rho v w`, assembled with `gauss` points per element.
pub fn assemble(
    mesh: &Mesh,
    stiffness: impl Fn(f64) -> (f64, f64, f64),
    density: impl Fn(f64) -> f64,
    gauss: usize,
) -> (BandMatrix, BandMatrix) {
    let n = mesh.dofs();
    let mut k = BandMatrix::zeros(n, BANDWIDTH, BANDWIDTH);
    let mut m = BandMatrix::zeros(n, BANDWIDTH, BANDWIDTH);
    let gl = GaussLegendre::new(gauss);
    for e in 0..mesh.elements() {
        let (x0, x1) = (mesh.nodes[e], mesh.nodes[e + 1]);
        let h = x1 - x0;
        let mut ke = [[0.0; 4]; 4];
        let mut me = [[0.0; 4]; 4];
        for (&t, &w) in gl.nodes.iter().zip(&gl.weights) {
            let s = 0.5 * (t + 1.0);
            let x = x0 + s * h;
            let wx = 0.5 * w * h;
            let [sv, s1, s2, _] = shape(s, h);
            let (c0, c1, c2) = stiffness(x);
            let rho = density(x);
            for i in 0..4 {
                for j in 0..4 {
                    ke[i][j] += wx * (c0 * s2[i] * s2[j] + c1 * s1[i] * s1[j] + c2 * sv[i] * sv[j]);
                    me[i][j] += wx * rho * sv[i] * sv[j];
                }
            }
        }
        for i in 0..4 {
            for j in 0..4 {
                k.add(2 * e + i, 2 * e + j, ke[i][j]);
                m.add(2 * e + i, 2 * e + j, me[i][j]);
            }
        }
    }
    (k, m)
}

/// A C1 piecewise-cubic function given by nodal values and slopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeFunction {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
}

impl FeFunction {
    pub fn from_dofs(mesh: &Mesh, dofs: &[f64]) -> Self {
        assert_eq!(dofs.len(), mesh.dofs());
        Self {
            nodes: mesh.nodes.clone(),
            values: dofs.iter().step_by(2).copied().collect(),
            slopes: dofs.iter().skip(1).step_by(2).copied().collect(),
        }
    }

    pub fn zero(mesh: &Mesh) -> Self {
        Self::from_dofs(mesh, &vec![0.0; mesh.dofs()])
    }

    pub fn dofs(&self) -> Vec<f64> {
        self.values
            .iter()
            .zip(&self.slopes)
            .flat_map(|(&v, &s)| [v, s])
            .collect()
    }

    pub fn mesh(&self) -> Mesh {
        Mesh {
            nodes: self.nodes.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().chain(&self.slopes).all(|&v| v == 0.0)
    }

    /// `derivative`-th derivative (0..=3) at `x`; `x` outside the support is
    /// clamped to the nearest element.
    pub fn eval(&self, x: f64, derivative: usize) -> f64 {
        let e = locate(&self.nodes, x);
        let (x0, x1) = (self.nodes[e], self.nodes[e + 1]);
        let h = x1 - x0;
        let s = (x - x0) / h;
        let sh = shape(s, h);
        let c = [self.values[e], self.slopes[e], self.values[e + 1], self.slopes[e + 1]];
        (0..4).map(|i| sh[derivative][i] * c[i]).sum()
    }

    pub fn lo(&self) -> f64 {
        self.nodes[0]
    }

    pub fn hi(&self) -> f64 {
        *self.nodes.last().unwrap()
    }
}
