//! 2x2 real matrices.

use core::ops::Mul;

use crate::math;

/// Row-major 2x2 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    /// Counterclockwise rotation by `angle` radians.
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = (math::sin(angle), math::cos(angle));
        Mat2::new(c, -s, s, c)
    }

    pub fn scaled(&self, k: f64) -> Self {
        let m = self.0;
        Mat2::new(k * m[0][0], k * m[0][1], k * m[1][0], k * m[1][1])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        let m = self.0;
        [m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]]
    }

    pub fn column(&self, j: usize) -> [f64; 2] {
        [self.0[0][j], self.0[1][j]]
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Coefficients `(m, p, s)` with `|A b(theta)|^2 = m + p cos 2theta + s sin 2theta`.
    pub fn gain_profile(&self) -> (f64, f64, f64) {
        let a1 = self.column(0);
        let a2 = self.column(1);
        let n1 = a1[0] * a1[0] + a1[1] * a1[1];
        let n2 = a2[0] * a2[0] + a2[1] * a2[1];
        ((n1 + n2) / 2.0, (n1 - n2) / 2.0, a1[0] * a2[0] + a1[1] * a2[1])
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        let (m, p, s) = self.gain_profile();
        math::sqrt(m + math::sqrt(p * p + s * s))
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }
}

pub fn norm(x: [f64; 2]) -> f64 {
    math::sqrt(x[0] * x[0] + x[1] * x[1])
}

/// Unit vector at angle `theta`.
pub fn direction(theta: f64) -> [f64; 2] {
    [math::cos(theta), math::sin(theta)]
}

pub fn angle(x: [f64; 2]) -> f64 {
    math::atan2(x[1], x[0])
}
