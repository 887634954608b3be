//! Fixed-size real and complex matrix kernels.
//!
//! Everything here works on stack arrays: 3-vectors and 3×3 real matrices for
//! the Bloch-form algebra, 2×2 and 4×4 complex matrices for single-qubit
//! operators and two-qubit states.

use std::f64::consts::PI;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

/// Formats with at most 12 significant digits, shortest form, never `-0`.
pub fn fmt_sig12(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    if r == 0.0 {
        "0".to_string()
    } else {
        format!("{r}")
    }
}

/// Numerical tolerances shared by every module.
pub mod tol {
    /// Hermiticity of density matrices and unitarity checks.
    pub const HERMITIAN: f64 = 1e-12;
    /// Deviation of a trace from one.
    pub const TRACE: f64 = 1e-12;
    /// Smallest eigenvalue still accepted as positive semidefinite.
    pub const PSD_SLACK: f64 = -1e-10;
    /// Residual of an eigenpair.
    pub const EIGEN_RESIDUAL: f64 = 1e-9;
    /// Symmetry required on input to `eig_sym3`.
    pub const SYMMETRY: f64 = 1e-10;
    /// Unit-vector norm deviation.
    pub const UNIT_NORM: f64 = 1e-12;
    /// Bell-basis eigenvalues may dip this far below zero.
    pub const BELL_EIGENVALUE: f64 = 1e-12;
    /// Slack on Bloch vector norms and correlation entries.
    pub const BLOCH: f64 = 1e-10;
    /// Completeness of a Kraus set.
    pub const KRAUS: f64 = 1e-12;
    /// Discord values below this are treated as zero in event detection.
    pub const DISCORD_ZERO: f64 = 1e-9;
    /// Entries treated as structural zeros when recognising X states.
    pub const STRUCTURAL_ZERO: f64 = 1e-12;
    /// Trigonometric cubic solver hands over to Jacobi this close to a repeated root.
    pub const CUBIC_DISCRIMINANT: f64 = 1e-14;
}

pub fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm3(a: &Vec3) -> f64 {
    dot3(a, a).sqrt()
}

pub fn cross3(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn mat3_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    [dot3(&m[0], v), dot3(&m[1], v), dot3(&m[2], v)]
}

pub fn mat3_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn mat3_transpose(m: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[j][i] = *v;
        }
    }
    out
}

pub fn mat3_trace(m: &Mat3) -> f64 {
    m[0][0] + m[1][1] + m[2][2]
}

pub fn mat3_det(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Squared Frobenius norm, i.e. `Tr(MᵀM)`.
pub fn mat3_frobenius_sq(m: &Mat3) -> f64 {
    m.iter().flatten().map(|v| v * v).sum()
}

pub fn is_symmetric3(m: &Mat3, tol: f64) -> bool {
    (0..3).all(|i| (0..3).all(|j| (m[i][j] - m[j][i]).abs() <= tol))
}

/// Eigenvalues of a real symmetric 3×3 matrix, sorted descending.
///
/// Uses the trigonometric solution of the characteristic cubic. When the
/// cubic is within [`tol::CUBIC_DISCRIMINANT`] of a repeated root the
/// cyclic Jacobi method takes over.
pub fn eig_sym3(m: &Mat3) -> Result<[f64; 3]> {
    if m.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::validation("eig_sym3: non-finite entry"));
    }
    if !is_symmetric3(m, tol::SYMMETRY) {
        return Err(Error::validation("eig_sym3: matrix is not symmetric"));
    }
    // Work on the exactly symmetrised matrix.
    let mut s = *m;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let avg = 0.5 * (m[i][j] + m[j][i]);
            s[i][j] = avg;
            s[j][i] = avg;
        }
    }

    let off = s[0][1] * s[0][1] + s[0][2] * s[0][2] + s[1][2] * s[1][2];
    let mut eig = if off == 0.0 {
        [s[0][0], s[1][1], s[2][2]]
    } else {
        let q = mat3_trace(&s) / 3.0;
        let p2 = (s[0][0] - q).powi(2) + (s[1][1] - q).powi(2) + (s[2][2] - q).powi(2) + 2.0 * off;
        let p = (p2 / 6.0).sqrt();
        let mut b = s;
        for (i, row) in b.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                if i == j {
                    *v -= q;
                }
                *v /= p;
            }
        }
        let r = mat3_det(&b) / 2.0;
        if 1.0 - r.abs() <= tol::CUBIC_DISCRIMINANT {
            jacobi_sym3(&s).0
        } else {
            let phi = r.acos() / 3.0;
            let e1 = q + 2.0 * p * phi.cos();
            let e3 = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
            [e1, 3.0 * q - e1 - e3, e3]
        }
    };
    eig.sort_by(|a, b| b.total_cmp(a));
    Ok(eig)
}

/// Cyclic Jacobi diagonalisation of a symmetric 3×3 matrix.
///
/// Returns the (unsorted) eigenvalues and the matrix whose columns are the
/// matching eigenvectors.
pub fn jacobi_sym3(m: &Mat3) -> ([f64; 3], Mat3) {
    let mut a = *m;
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _sweep in 0..64 {
        let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
        let scale = a.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
        if off <= f64::EPSILON * 1e-3 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = 0.5 * (2.0 * a[p][q]).atan2(a[q][q] - a[p][p]);
            let (s, c) = theta.sin_cos();
            // A ← RᵀAR with R the rotation in the (p, q) plane.
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for row in v.iter_mut() {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    ([a[0][0], a[1][1], a[2][2]], v)
}

/// Unit eigenvector of symmetric `m` for eigenvalue `u`.
///
/// Taken as the largest cross product of two rows of `m − uI`; falls back to
/// Jacobi when the eigenvalue is (numerically) repeated.
pub fn sym3_eigenvector(m: &Mat3, u: f64) -> Vec3 {
    let mut a = *m;
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= u;
    }
    let candidates = [cross3(&a[0], &a[1]), cross3(&a[0], &a[2]), cross3(&a[1], &a[2])];
    let best = candidates
        .iter()
        .max_by(|x, y| norm3(x).total_cmp(&norm3(y)))
        .copied()
        .unwrap_or([0.0; 3]);
    let scale = mat3_frobenius_sq(m).max(1.0);
    let n = norm3(&best);
    if n > 1e-8 * scale {
        return [best[0] / n, best[1] / n, best[2] / n];
    }
    let (vals, vecs) = jacobi_sym3(m);
    let k = (0..3)
        .min_by(|&i, &j| (vals[i] - u).abs().total_cmp(&(vals[j] - u).abs()))
        .unwrap_or(0);
    [vecs[0][k], vecs[1][k], vecs[2][k]]
}

/// Largest eigenvalue of `K = x xᵀ + T Tᵀ`.
pub fn max_eig_k(x: &Vec3, t: &Mat3) -> f64 {
    let ttt = mat3_mul(t, &mat3_transpose(t));
    let mut k = ttt;
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] += x[i] * x[j];
        }
    }
    // K is symmetric by construction.
    eig_sym3(&k).map(|e| e[0]).unwrap_or(f64::NAN)
}

/// 2×2 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMat2(pub [[C64; 2]; 2]);

/// 4×4 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMat4(pub [[C64; 4]; 4]);

macro_rules! cmat_impl {
    ($name:ident, $n:expr) => {
        impl $name {
            pub fn zeros() -> Self {
                Self([[C64::new(0.0, 0.0); $n]; $n])
            }

            pub fn identity() -> Self {
                let mut m = Self::zeros();
                for i in 0..$n {
                    m.0[i][i] = C64::new(1.0, 0.0);
                }
                m
            }

            pub fn from_real(rows: [[f64; $n]; $n]) -> Self {
                let mut m = Self::zeros();
                for i in 0..$n {
                    for j in 0..$n {
                        m.0[i][j] = C64::new(rows[i][j], 0.0);
                    }
                }
                m
            }

            pub fn adjoint(&self) -> Self {
                let mut m = Self::zeros();
                for i in 0..$n {
                    for j in 0..$n {
                        m.0[j][i] = self.0[i][j].conj();
                    }
                }
                m
            }

            pub fn scale(&self, s: C64) -> Self {
                let mut m = *self;
                m.0.iter_mut().flatten().for_each(|v| *v *= s);
                m
            }

            pub fn scale_re(&self, s: f64) -> Self {
                self.scale(C64::new(s, 0.0))
            }

            pub fn trace(&self) -> C64 {
                (0..$n).map(|i| self.0[i][i]).sum()
            }

            /// Largest entrywise modulus of `self − other`.
            pub fn max_abs_diff(&self, other: &Self) -> f64 {
                self.0
                    .iter()
                    .flatten()
                    .zip(other.0.iter().flatten())
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max)
            }

            /// Largest entrywise modulus of `self − self†`.
            pub fn hermiticity_defect(&self) -> f64 {
                self.max_abs_diff(&self.adjoint())
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().flatten().all(|v| v.re.is_finite() && v.im.is_finite())
            }
        }

        impl Index<(usize, usize)> for $name {
            type Output = C64;
            fn index(&self, (i, j): (usize, usize)) -> &C64 {
                &self.0[i][j]
            }
        }

        impl IndexMut<(usize, usize)> for $name {
            fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
                &mut self.0[i][j]
            }
        }

        impl Add for $name {
            type Output = Self;
            fn add(self, rhs: Self) -> Self {
                let mut m = self;
                for i in 0..$n {
                    for j in 0..$n {
                        m.0[i][j] += rhs.0[i][j];
                    }
                }
                m
            }
        }

        impl Sub for $name {
            type Output = Self;
            fn sub(self, rhs: Self) -> Self {
                let mut m = self;
                for i in 0..$n {
                    for j in 0..$n {
                        m.0[i][j] -= rhs.0[i][j];
                    }
                }
                m
            }
        }

        impl Mul for $name {
            type Output = Self;
            fn mul(self, rhs: Self) -> Self {
                let mut m = Self::zeros();
                for i in 0..$n {
                    for k in 0..$n {
                        let a = self.0[i][k];
                        if a == C64::new(0.0, 0.0) {
                            continue;
                        }
                        for j in 0..$n {
                            m.0[i][j] += a * rhs.0[k][j];
                        }
                    }
                }
                m
            }
        }
    };
}

cmat_impl!(CMat2, 2);
cmat_impl!(CMat4, 4);

impl CMat2 {
    pub fn pauli_x() -> Self {
        Self::from_real([[0.0, 1.0], [1.0, 0.0]])
    }

    pub fn pauli_y() -> Self {
        let i = C64::new(0.0, 1.0);
        let z = C64::new(0.0, 0.0);
        Self([[z, -i], [i, z]])
    }

    pub fn pauli_z() -> Self {
        Self::from_real([[1.0, 0.0], [0.0, -1.0]])
    }

    /// `σ₁, σ₂, σ₃`.
    pub fn paulis() -> [Self; 3] {
        [Self::pauli_x(), Self::pauli_y(), Self::pauli_z()]
    }
}

/// Kronecker product `a ⊗ b`; row index of the result is `2·i_a + i_b`.
pub fn kron22(a: &CMat2, b: &CMat2) -> CMat4 {
    let mut m = CMat4::zeros();
    for ia in 0..2 {
        for ja in 0..2 {
            for ib in 0..2 {
                for jb in 0..2 {
                    m.0[2 * ia + ib][2 * ja + jb] = a.0[ia][ja] * b.0[ib][jb];
                }
            }
        }
    }
    m
}

/// Eigenvalues of a 4×4 Hermitian matrix (ascending), by complex Jacobi rotations.
pub fn eig_herm4(m: &CMat4) -> [f64; 4] {
    let mut a = *m;
    // Exact Hermitian part.
    for i in 0..4 {
        a.0[i][i] = C64::new(a.0[i][i].re, 0.0);
        for j in (i + 1)..4 {
            let avg = 0.5 * (a.0[i][j] + a.0[j][i].conj());
            a.0[i][j] = avg;
            a.0[j][i] = avg.conj();
        }
    }
    let scale = a.0.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    for _sweep in 0..64 {
        let off: f64 = (0..4)
            .flat_map(|i| ((i + 1)..4).map(move |j| (i, j)))
            .map(|(i, j)| a.0[i][j].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-17 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..4 {
            for q in (p + 1)..4 {
                let g = a.0[p][q];
                let h = g.norm();
                if h == 0.0 {
                    continue;
                }
                // Phase that makes the (p, q) entry real, then a real rotation.
                let e = g / h;
                let theta = 0.5 * (2.0 * h).atan2(a.0[q][q].re - a.0[p][p].re);
                let (s, c) = theta.sin_cos();
                // J = D·R restricted to the (p, q) plane, D = diag(1, ē).
                let jpp = C64::new(c, 0.0);
                let jpq = C64::new(s, 0.0);
                let jqp = -e.conj() * s;
                let jqq = e.conj() * c;
                // A ← A J (columns p, q)
                for k in 0..4 {
                    let akp = a.0[k][p];
                    let akq = a.0[k][q];
                    a.0[k][p] = akp * jpp + akq * jqp;
                    a.0[k][q] = akp * jpq + akq * jqq;
                }
                // A ← J† A (rows p, q)
                for k in 0..4 {
                    let apk = a.0[p][k];
                    let aqk = a.0[q][k];
                    a.0[p][k] = jpp.conj() * apk + jqp.conj() * aqk;
                    a.0[q][k] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a.0[p][q] = C64::new(0.0, 0.0);
                a.0[q][p] = C64::new(0.0, 0.0);
            }
        }
    }
    let mut eig = [a.0[0][0].re, a.0[1][1].re, a.0[2][2].re, a.0[3][3].re];
    eig.sort_by(f64::total_cmp);
    eig
}

/// Gershgorin lower bound on the spectrum of a Hermitian matrix.
pub fn gershgorin_lower4(m: &CMat4) -> f64 {
    (0..4)
        .map(|i| {
            let radius: f64 = (0..4).filter(|&j| j != i).map(|j| m.0[i][j].norm()).sum();
            m.0[i][i].re - radius
        })
        .fold(f64::INFINITY, f64::min)
}
