//! Euclidean gamma matrices in the antihermitian convention.

use nalgebra::{Complex, SMatrix};

pub type C64 = Complex<f64>;
pub type Mat2 = SMatrix<C64, 2, 2>;
pub type Mat4 = SMatrix<C64, 4, 4>;
/// Sheet (2) tensor spinor (4) matrices; index = 4 * sheet + spinor.
pub type Mat8 = SMatrix<C64, 8, 8>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `sheet ⊗ spinor` as an 8x8 matrix.
pub fn kron(sheet: &Mat2, spinor: &Mat4) -> Mat8 {
    let mut out = Mat8::zeros();
    for i in 0..2 {
        for j in 0..2 {
            let s = sheet[(i, j)];
            if s == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..4 {
                for l in 0..4 {
                    out[(4 * i + k, 4 * j + l)] = s * spinor[(k, l)];
                }
            }
        }
    }
    out
}

pub fn sheet_diag(x: C64, y: C64) -> Mat2 {
    Mat2::new(x, C64::new(0.0, 0.0), C64::new(0.0, 0.0), y)
}

/// Antihermitian gammas `g[0..4]` with `{g_a, g_b} = -2 delta_ab`, plus the
/// grading `gamma5 = g0 g1 g2 g3`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSet {
    pub g: [Mat4; 4],
    pub gamma5: Mat4,
}

impl GammaSet {
    /// `i` times the hermitian chiral representation.
    pub fn chiral() -> Self {
        let zero = c(0.0);
        let one = c(1.0);
        let pauli = [
            [[zero, one], [one, zero]],
            [[zero, -I], [I, zero]],
            [[one, zero], [zero, -one]],
        ];
        // hermitian e0 = [[0, 1], [1, 0]], e_j = [[0, -i s_j], [i s_j, 0]]
        let mut e = [Mat4::zeros(); 4];
        for k in 0..2 {
            e[0][(k, k + 2)] = one;
            e[0][(k + 2, k)] = one;
        }
        for (j, s) in pauli.iter().enumerate() {
            for r in 0..2 {
                for col in 0..2 {
                    e[j + 1][(r, col + 2)] = -I * s[r][col];
                    e[j + 1][(r + 2, col)] = I * s[r][col];
                }
            }
        }
        let g = e.map(|m| m * I);
        let gamma5 = g[0] * g[1] * g[2] * g[3];
        Self { g, gamma5 }
    }

    /// Largest entry deviation from the defining relations.
    pub fn defect(&self) -> f64 {
        let id = Mat4::identity();
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                let delta = if a == b { 2.0 } else { 0.0 };
                let ac = self.g[a] * self.g[b] + self.g[b] * self.g[a] + id * c(delta);
                worst = worst.max(ac.camax());
            }
            worst = worst.max((self.g[a].adjoint() + self.g[a]).camax());
            worst = worst.max((self.gamma5 * self.g[a] + self.g[a] * self.gamma5).camax());
        }
        worst = worst.max((self.gamma5 * self.gamma5 - id).camax());
        worst
    }
}

/// The fixed representation used throughout the engine.
pub fn gamma_basis() -> GammaSet {
    GammaSet::chiral()
}
