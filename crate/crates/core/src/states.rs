//! Two-qubit states: dense density matrices, the Bloch form, Bell-diagonal
//! triples, X-structured states and the extended Werner-like family.
//!
//! # Basis convention
//!
//! Matrices use the product basis `{|00⟩, |01⟩, |10⟩, |11⟩}` with row index
//! `2·a + b`, and the single-qubit Pauli matrices are the standard ones on
//! that ordering (`σ₃ = diag(1, −1)`). Single-qubit index 0 is the upper
//! (excited, `σ₃ = +1`) level. With that reading the matrices of the
//! decoherence models, which are written excited-level first, copy over
//! position by position, and the local Bloch components `m`, `n` come out
//! with the usual "ground state has `σ₃ = −1`" sign.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::numerics::{
    eig_herm4, gershgorin_lower4, kron22, norm3, tol, CMat2, CMat4, Mat3, Vec3, C64,
};

/// A validated two-qubit density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix {
    rho: CMat4,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(rho: CMat4) -> Result<Self> {
        check_density(&rho)?;
        Ok(Self { rho })
    }

    pub fn maximally_mixed() -> Self {
        Self {
            rho: CMat4::identity().scale_re(0.25),
        }
    }

    /// Projector onto `psi`, which must be normalised within 1e−12.
    pub fn from_pure(psi: [C64; 4]) -> Result<Self> {
        let norm_sq: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > tol::TRACE {
            return Err(Error::InvalidState(format!("state vector has squared norm {norm_sq}")));
        }
        let mut rho = CMat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                rho[(i, j)] = psi[i] * psi[j].conj();
            }
        }
        Self::new(rho)
    }

    pub fn matrix(&self) -> &CMat4 {
        &self.rho
    }

    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }

    /// Spectrum in ascending order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        spectrum(&self.rho)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// `U ρ U†`.
    pub fn conjugate(&self, u: &CMat4) -> Result<Self> {
        Self::new(*u * self.rho * u.adjoint())
    }

    /// The X-structure of the matrix, if every entry outside the diagonal and
    /// anti-diagonal vanishes.
    pub fn x_blocks(&self) -> Option<XBlocks> {
        x_blocks(&self.rho)
    }
}

/// Diagonal and (possibly complex) anti-diagonal of an X-structured matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XBlocks {
    pub diag: [f64; 4],
    pub rho14: C64,
    pub rho23: C64,
}

fn x_blocks(m: &CMat4) -> Option<XBlocks> {
    for i in 0..4 {
        for j in 0..4 {
            if i != j && i + j != 3 && m[(i, j)].norm() > tol::STRUCTURAL_ZERO {
                return None;
            }
        }
    }
    Some(XBlocks {
        diag: [m[(0, 0)].re, m[(1, 1)].re, m[(2, 2)].re, m[(3, 3)].re],
        rho14: m[(0, 3)],
        rho23: m[(1, 2)],
    })
}

/// Ascending spectrum: closed form for X-structured matrices (two 2×2
/// blocks), Jacobi otherwise.
fn spectrum(m: &CMat4) -> [f64; 4] {
    if let Some(x) = x_blocks(m) {
        let block = |a: f64, b: f64, o: C64| {
            let mean = 0.5 * (a + b);
            let rad = (0.25 * (a - b) * (a - b) + o.norm_sqr()).sqrt();
            [mean - rad, mean + rad]
        };
        let [l1, l2] = block(x.diag[0], x.diag[3], x.rho14);
        let [l3, l4] = block(x.diag[1], x.diag[2], x.rho23);
        let mut e = [l1, l2, l3, l4];
        e.sort_by(f64::total_cmp);
        e
    } else {
        eig_herm4(m)
    }
}

/// Checks the density-matrix invariants on a raw matrix.
pub fn check_density(rho: &CMat4) -> Result<()> {
    if !rho.is_finite() {
        return Err(Error::InvalidState("non-finite entry".into()));
    }
    let herm = rho.hermiticity_defect();
    if herm > tol::HERMITIAN {
        return Err(Error::InvalidState(format!("not Hermitian (defect {herm:e})")));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > tol::TRACE || tr.im.abs() > tol::TRACE {
        return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
    }
    if gershgorin_lower4(rho) >= 0.0 {
        return Ok(());
    }
    let min = spectrum(rho)[0];
    if min < tol::PSD_SLACK {
        return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
    }
    Ok(())
}

/// Local Bloch vectors and correlation matrix of a two-qubit state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochForm {
    /// Bloch vector of qubit A.
    pub x: Vec3,
    /// Bloch vector of qubit B.
    pub y: Vec3,
    /// `T[i][j] = Tr(ρ σᵢ⊗σⱼ)`.
    pub t: Mat3,
}

impl BlochForm {
    pub fn zero() -> Self {
        Self {
            x: [0.0; 3],
            y: [0.0; 3],
            t: [[0.0; 3]; 3],
        }
    }

    pub fn diagonal(x: Vec3, y: Vec3, c: [f64; 3]) -> Self {
        Self {
            x,
            y,
            t: [[c[0], 0.0, 0.0], [0.0, c[1], 0.0], [0.0, 0.0, c[2]]],
        }
    }

    /// Checks the norm bounds on `x`, `y` and the entry bounds on `T`.
    pub fn check(&self) -> Result<()> {
        let finite = self.x.iter().chain(&self.y).chain(self.t.iter().flatten()).all(|v| v.is_finite());
        if !finite {
            return Err(Error::validation("Bloch form has a non-finite component"));
        }
        if norm3(&self.x) > 1.0 + tol::BLOCH || norm3(&self.y) > 1.0 + tol::BLOCH {
            return Err(Error::validation("local Bloch vector longer than one"));
        }
        if self.t.iter().flatten().any(|v| v.abs() > 1.0 + tol::BLOCH) {
            return Err(Error::validation("correlation entry outside [-1, 1]"));
        }
        Ok(())
    }

    /// Largest componentwise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.x
            .iter()
            .chain(&self.y)
            .chain(self.t.iter().flatten())
            .zip(other.x.iter().chain(&other.y).chain(other.t.iter().flatten()))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// The raw (unvalidated) matrix `¼(I⊗I + x·σ⊗I + I⊗y·σ + Σ tᵢⱼ σᵢ⊗σⱼ)`.
pub fn bloch_matrix(b: &BlochForm) -> CMat4 {
    let id = CMat2::identity();
    let s = CMat2::paulis();
    let mut m = CMat4::identity();
    for i in 0..3 {
        if b.x[i] != 0.0 {
            m = m + kron22(&s[i], &id).scale_re(b.x[i]);
        }
        if b.y[i] != 0.0 {
            m = m + kron22(&id, &s[i]).scale_re(b.y[i]);
        }
        for j in 0..3 {
            if b.t[i][j] != 0.0 {
                m = m + kron22(&s[i], &s[j]).scale_re(b.t[i][j]);
            }
        }
    }
    m.scale_re(0.25)
}

/// Builds the density matrix of a Bloch form, rejecting unphysical parameters.
pub fn from_bloch(b: &BlochForm) -> Result<DensityMatrix> {
    if b.x.iter().chain(&b.y).chain(b.t.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(Error::validation("Bloch form has a non-finite component"));
    }
    let m = bloch_matrix(b);
    if gershgorin_lower4(&m) < 0.0 {
        let min = spectrum(&m)[0];
        if min < tol::PSD_SLACK {
            return Err(Error::UnphysicalBloch { min_eigenvalue: min });
        }
    }
    DensityMatrix::new(m)
}

/// `Tr(ρ P)` for Hermitian `P`, real part.
fn expectation(rho: &CMat4, p: &CMat4) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            acc += (rho[(i, j)] * p[(j, i)]).re;
        }
    }
    acc
}

pub fn to_bloch(rho: &DensityMatrix) -> BlochForm {
    let id = CMat2::identity();
    let s = CMat2::paulis();
    let m = rho.matrix();
    let mut b = BlochForm::zero();
    for i in 0..3 {
        b.x[i] = expectation(m, &kron22(&s[i], &id));
        b.y[i] = expectation(m, &kron22(&id, &s[i]));
        for j in 0..3 {
            b.t[i][j] = expectation(m, &kron22(&s[i], &s[j]));
        }
    }
    b
}

/// Bell-basis weights of a Bell-diagonal state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellEigenvalues {
    pub psi_minus: f64,
    pub phi_minus: f64,
    pub phi_plus: f64,
    pub psi_plus: f64,
}

impl BellEigenvalues {
    /// Validates each weight in `[0, 1]` (to 1e−12) and unit sum.
    pub fn new(psi_minus: f64, phi_minus: f64, phi_plus: f64, psi_plus: f64) -> Result<Self> {
        let l = Self {
            psi_minus,
            phi_minus,
            phi_plus,
            psi_plus,
        };
        let arr = l.as_array();
        if arr
            .iter()
            .any(|v| !v.is_finite() || *v < -tol::BELL_EIGENVALUE || *v > 1.0 + tol::BELL_EIGENVALUE)
        {
            return Err(Error::validation(format!("Bell weights {arr:?} outside [0, 1]")));
        }
        let sum: f64 = arr.iter().sum();
        if (sum - 1.0).abs() > tol::TRACE {
            return Err(Error::validation(format!("Bell weights sum to {sum}")));
        }
        Ok(l)
    }

    /// `[λΨ⁻, λΦ⁻, λΦ⁺, λΨ⁺]`.
    pub fn as_array(&self) -> [f64; 4] {
        [self.psi_minus, self.phi_minus, self.phi_plus, self.psi_plus]
    }

    /// Weights sorted in descending order.
    pub fn sorted_desc(&self) -> [f64; 4] {
        let mut a = self.as_array();
        a.sort_by(|x, y| y.total_cmp(x));
        a
    }

    /// Inverts the affine map from correlation triple to Bell weights.
    pub fn to_c(&self) -> [f64; 3] {
        let (sm, fm, fp, sp) = (self.psi_minus, self.phi_minus, self.phi_plus, self.psi_plus);
        [fp + sp - sm - fm, fm + sp - sm - fp, fm + fp - sm - sp]
    }
}

pub fn bell_eigenvalues(c: [f64; 3]) -> BellEigenvalues {
    let [c1, c2, c3] = c;
    BellEigenvalues {
        psi_minus: 0.25 * (1.0 - c1 - c2 - c3),
        phi_minus: 0.25 * (1.0 - c1 + c2 + c3),
        phi_plus: 0.25 * (1.0 + c1 - c2 + c3),
        psi_plus: 0.25 * (1.0 + c1 + c2 - c3),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BellCheck {
    pub physical: bool,
    /// Bell weights below −1e−12, by label.
    pub negative: Vec<(&'static str, f64)>,
    /// Whether `|cᵢ| ≤ 1` and `cᵢ² − cⱼ² − cₖ² ≥ −1` all hold.
    pub necessary_conditions: bool,
}

/// Positivity of the Bell-diagonal state with correlation triple `c`.
pub fn is_physical_bell(c: [f64; 3]) -> BellCheck {
    let l = bell_eigenvalues(c);
    let labels = ["psi_minus", "phi_minus", "phi_plus", "psi_plus"];
    let negative: Vec<_> = labels
        .iter()
        .zip(l.as_array())
        .filter(|(_, v)| !(*v >= -tol::BELL_EIGENVALUE))
        .map(|(k, v)| (*k, v))
        .collect();
    BellCheck {
        physical: negative.is_empty(),
        negative,
        necessary_conditions: necessary_conditions_hold(c, 4.0 * tol::BELL_EIGENVALUE),
    }
}

/// The necessary conditions on a physical triple, with additive slack.
pub fn necessary_conditions_hold(c: [f64; 3], slack: f64) -> bool {
    let sq = c.map(|v| v * v);
    c.iter().all(|v| v.abs() <= 1.0 + slack)
        && (0..3).all(|i| sq[i] - sq[(i + 1) % 3] - sq[(i + 2) % 3] >= -1.0 - slack)
}

/// Bell-diagonal state `¼(I⊗I + Σ cᵢ σᵢ⊗σᵢ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellDiagonal {
    c: [f64; 3],
}

impl BellDiagonal {
    pub fn new(c: [f64; 3]) -> Result<Self> {
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("non-finite correlation triple"));
        }
        let check = is_physical_bell(c);
        if !check.physical {
            return Err(Error::UnphysicalBell {
                c,
                reason: format!("negative Bell weights {:?}", check.negative),
            });
        }
        Ok(Self { c })
    }

    pub fn from_eigenvalues(l: &BellEigenvalues) -> Result<Self> {
        Self::new(l.to_c())
    }

    pub fn c(&self) -> [f64; 3] {
        self.c
    }

    pub fn eigenvalues(&self) -> BellEigenvalues {
        bell_eigenvalues(self.c)
    }

    pub fn bloch(&self) -> BlochForm {
        BlochForm::diagonal([0.0; 3], [0.0; 3], self.c)
    }

    pub fn density(&self) -> DensityMatrix {
        // Physical by construction; the matrix has the X shape.
        DensityMatrix {
            rho: bloch_matrix(&self.bloch()),
        }
    }

    /// The same state as X-structured parameters.
    pub fn x_state(&self) -> XState {
        let l = self.eigenvalues();
        XState {
            d11: 0.5 * (l.phi_plus + l.phi_minus),
            d22: 0.5 * (l.psi_plus + l.psi_minus),
            d33: 0.5 * (l.psi_plus + l.psi_minus),
            d44: 0.5 * (l.phi_plus + l.phi_minus),
            o14: 0.5 * (l.phi_plus - l.phi_minus),
            o23: 0.5 * (l.psi_plus - l.psi_minus),
        }
    }
}

/// `|Φ±⟩ = (|00⟩ ± |11⟩)/√2`, `|Ψ±⟩ = (|01⟩ ± |10⟩)/√2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [Self::PsiMinus, Self::PhiMinus, Self::PhiPlus, Self::PsiPlus];

    pub fn vector(self) -> [C64; 4] {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let z = C64::new(0.0, 0.0);
        match self {
            Self::PhiPlus => [h, z, z, h],
            Self::PhiMinus => [h, z, z, -h],
            Self::PsiPlus => [z, h, h, z],
            Self::PsiMinus => [z, h, -h, z],
        }
    }

    pub fn projector(self) -> DensityMatrix {
        DensityMatrix::from_pure(self.vector()).expect("Bell vectors are normalised")
    }

    /// `⟨β|ρ|β⟩`.
    pub fn weight(self, rho: &DensityMatrix) -> f64 {
        let v = self.vector();
        let m = rho.matrix();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                acc += v[i].conj() * m[(i, j)] * v[j];
            }
        }
        acc.re
    }
}

/// `cos θ |00⟩ + sin θ |11⟩`.
pub fn pure_schmidt(theta: f64) -> DensityMatrix {
    let (s, c) = theta.sin_cos();
    let z = C64::new(0.0, 0.0);
    DensityMatrix::from_pure([C64::new(c, 0.0), z, z, C64::new(s, 0.0)]).expect("unit vector")
}

/// Werner state `c |Ψ⁻⟩⟨Ψ⁻| + (1 − c) I/4`.
pub fn werner(c: f64) -> Result<BellDiagonal> {
    check_range("c", c, 0.0, 1.0, "[0, 1]")?;
    BellDiagonal::new([-c, -c, -c])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

/// Rank-two Bell-diagonal state `(1+c₃)/2 |Φ±⟩⟨Φ±| + (1−c₃)/2 |Ψ±⟩⟨Ψ±|`,
/// i.e. the triple `(±1, ∓c₃, c₃)`.
pub fn rank2_bell(c3: f64, branch: Branch) -> Result<BellDiagonal> {
    check_range("c3", c3, -1.0, 1.0, "[-1, 1]")?;
    let c = match branch {
        Branch::Plus => [1.0, -c3, c3],
        Branch::Minus => [-1.0, c3, c3],
    };
    BellDiagonal::new(c)
}

/// X-structured state with real anti-diagonal entries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XState {
    d11: f64,
    d22: f64,
    d33: f64,
    d44: f64,
    o14: f64,
    o23: f64,
}

/// Bloch parameters of an X state: `T = diag(c₁, c₂, c₃)`, `x = (0, 0, m)`,
/// `y = (0, 0, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XBloch {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub m: f64,
    pub n: f64,
}

impl XBloch {
    pub fn bloch(&self) -> BlochForm {
        BlochForm::diagonal([0.0, 0.0, self.m], [0.0, 0.0, self.n], [self.c1, self.c2, self.c3])
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.c1, self.c2, self.c3, self.m, self.n]
    }
}

impl XState {
    pub fn new(diag: [f64; 4], o14: f64, o23: f64) -> Result<Self> {
        let [d11, d22, d33, d44] = diag;
        if diag.iter().chain([&o14, &o23]).any(|v| !v.is_finite()) {
            return Err(Error::validation("X state has a non-finite entry"));
        }
        if diag.iter().any(|d| *d < -tol::HERMITIAN) {
            return Err(Error::validation(format!("X state has a negative diagonal {diag:?}")));
        }
        let sum: f64 = diag.iter().sum();
        if (sum - 1.0).abs() > tol::TRACE {
            return Err(Error::validation(format!("X state diagonal sums to {sum}")));
        }
        if d11 * d44 < o14 * o14 + tol::PSD_SLACK || d22 * d33 < o23 * o23 + tol::PSD_SLACK {
            return Err(Error::validation("X state coherence exceeds its populations"));
        }
        Ok(Self {
            d11,
            d22,
            d33,
            d44,
            o14,
            o23,
        })
    }

    pub fn diag(&self) -> [f64; 4] {
        [self.d11, self.d22, self.d33, self.d44]
    }

    pub fn o14(&self) -> f64 {
        self.o14
    }

    pub fn o23(&self) -> f64 {
        self.o23
    }

    pub fn matrix(&self) -> CMat4 {
        let mut m = CMat4::from_real([
            [self.d11, 0.0, 0.0, self.o14],
            [0.0, self.d22, self.o23, 0.0],
            [0.0, self.o23, self.d33, 0.0],
            [self.o14, 0.0, 0.0, self.d44],
        ]);
        // Absorb the ≤1e−12 trace slack allowed on construction.
        let tr = m.trace().re;
        if tr != 1.0 {
            m = m.scale_re(1.0 / tr);
        }
        m
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::new(self.matrix()).expect("validated X state")
    }

    pub fn bloch(&self) -> XBloch {
        x_state_bloch(self)
    }
}

/// `c₁ = 2ρ₁₄ + 2ρ₂₃`, `c₂ = −2ρ₁₄ + 2ρ₂₃`, `c₃ = ρ₁₁ − ρ₂₂ − ρ₃₃ + ρ₄₄`,
/// `m = ρ₁₁ + ρ₂₂ − ρ₃₃ − ρ₄₄`, `n = ρ₁₁ − ρ₂₂ + ρ₃₃ − ρ₄₄`.
pub fn x_state_bloch(x: &XState) -> XBloch {
    XBloch {
        c1: 2.0 * x.o14 + 2.0 * x.o23,
        c2: -2.0 * x.o14 + 2.0 * x.o23,
        c3: x.d11 - x.d22 - x.d33 + x.d44,
        m: x.d11 + x.d22 - x.d33 - x.d44,
        n: x.d11 - x.d22 + x.d33 - x.d44,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EwlKind {
    /// Noisy `α|01⟩ + β|10⟩`.
    Phi,
    /// Noisy `α|00⟩ + β|11⟩`.
    Psi,
}

/// Extended Werner-like state `r |χ⟩⟨χ| + (1 − r) I/4`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EwlParams {
    pub kind: EwlKind,
    pub r: f64,
    pub alpha: f64,
}

impl EwlParams {
    pub fn new(kind: EwlKind, r: f64, alpha: f64) -> Result<Self> {
        check_range("r", r, 0.0, 1.0, "[0, 1]")?;
        check_range("alpha", alpha, 0.0, 1.0, "[0, 1]")?;
        Ok(Self { kind, r, alpha })
    }

    /// Parametrised by `α²` instead of `α`.
    pub fn with_alpha_sq(kind: EwlKind, r: f64, alpha_sq: f64) -> Result<Self> {
        check_range("alpha_sq", alpha_sq, 0.0, 1.0, "[0, 1]")?;
        Self::new(kind, r, alpha_sq.sqrt())
    }

    pub fn beta(&self) -> f64 {
        (1.0 - self.alpha * self.alpha).max(0.0).sqrt()
    }

    /// The pure part `|χ⟩` in this crate's level ordering (index 0 = excited).
    pub fn pure_vector(&self) -> [C64; 4] {
        let a = C64::new(self.alpha, 0.0);
        let b = C64::new(self.beta(), 0.0);
        let z = C64::new(0.0, 0.0);
        match self.kind {
            // α|ge⟩ + β|eg⟩
            EwlKind::Phi => [z, b, a, z],
            // α|gg⟩ + β|ee⟩
            EwlKind::Psi => [b, z, z, a],
        }
    }
}

pub fn ewl(p: &EwlParams) -> XState {
    let (a, b, r) = (p.alpha, p.beta(), p.r);
    let noise = 0.25 * (1.0 - r);
    let coh = a * b * r;
    let (diag, o14, o23) = match p.kind {
        EwlKind::Phi => ([noise, noise + b * b * r, noise + a * a * r, noise], 0.0, coh),
        EwlKind::Psi => ([noise + b * b * r, noise, noise, noise + a * a * r], coh, 0.0),
    };
    XState::new(diag, o14, o23).expect("EWL parameters give a valid X state")
}

/// Uniform sample from the tetrahedron of Bell-diagonal states: Bell weights
/// drawn uniformly on the 3-simplex by sorted-uniform spacings.
pub fn sample_bell_diagonal<R: Rng + ?Sized>(rng: &mut R) -> BellDiagonal {
    let mut u = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
    u.sort_by(f64::total_cmp);
    let l = BellEigenvalues {
        psi_minus: u[0],
        phi_minus: u[1] - u[0],
        phi_plus: u[2] - u[1],
        psi_plus: 1.0 - u[2],
    };
    let c = l.to_c();
    // Rounding can push a vanishing weight to −1e−17; the triple stays inside
    // the 1e−12 slack.
    BellDiagonal { c }
}

/// Random full-rank state from a complex Ginibre matrix, `G G† / Tr(G G†)`.
pub fn sample_density_matrix<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    let mut g = CMat4::zeros();
    for v in g.0.iter_mut().flatten() {
        *v = C64::new(gaussian(rng), gaussian(rng));
    }
    let m = g * g.adjoint();
    let tr = m.trace().re;
    let mut rho = m.scale_re(1.0 / tr);
    for i in 0..4 {
        rho[(i, i)].im = 0.0;
    }
    DensityMatrix::new(rho).expect("Ginibre states are physical")
}

/// Random valid X state with real coherences.
pub fn sample_x_state<R: Rng + ?Sized>(rng: &mut R) -> XState {
    let mut u = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
    u.sort_by(f64::total_cmp);
    let d = [u[0], u[1] - u[0], u[2] - u[1], 1.0 - u[2]];
    let o14 = rng.gen_range(-1.0..=1.0) * (d[0] * d[3]).sqrt();
    let o23 = rng.gen_range(-1.0..=1.0) * (d[1] * d[2]).sqrt();
    XState::new(d, o14, o23).expect("sampled X state is valid")
}

/// Haar-random single-qubit unitary.
pub fn sample_unitary2<R: Rng + ?Sized>(rng: &mut R) -> CMat2 {
    let q = [gaussian(rng), gaussian(rng), gaussian(rng), gaussian(rng)];
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let [a, b, c, d] = q.map(|v| v / n);
    let u = C64::new(a, b);
    let w = C64::new(c, d);
    CMat2([[u, -w.conj()], [w, u.conj()]])
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box–Muller; u1 in (0, 1].
    let u1 = 1.0 - rng.gen::<f64>();
    let u2 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// JSON description of an initial state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Werner {
        c: f64,
    },
    /// Either the correlation triple `c` or the Bell weights `lambda`.
    BellDiagonal {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<[f64; 3]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<BellEigenvalues>,
    },
    /// Exactly one of `alpha`, `alpha_sq`.
    Ewl {
        kind: EwlKind,
        r: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha_sq: Option<f64>,
    },
    Pure {
        theta: f64,
    },
    X {
        diag: [f64; 4],
        o14: f64,
        o23: f64,
    },
    Dense {
        re: [[f64; 4]; 4],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        im: Option<[[f64; 4]; 4]>,
    },
}

/// A state built from a [`StateSpec`], kept in its most structured form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum State {
    Bell(BellDiagonal),
    X(XState),
    Dense(DensityMatrix),
}

impl State {
    pub fn density(&self) -> DensityMatrix {
        match self {
            State::Bell(b) => b.density(),
            State::X(x) => x.density(),
            State::Dense(d) => *d,
        }
    }
}

impl StateSpec {
    pub fn build(&self) -> Result<State> {
        match self {
            StateSpec::Werner { c } => Ok(State::Bell(werner(*c)?)),
            StateSpec::BellDiagonal { c, lambda } => match (c, lambda) {
                (Some(c), None) => Ok(State::Bell(BellDiagonal::new(*c)?)),
                (None, Some(l)) => {
                    let l = BellEigenvalues::new(l.psi_minus, l.phi_minus, l.phi_plus, l.psi_plus)?;
                    Ok(State::Bell(BellDiagonal::from_eigenvalues(&l)?))
                }
                _ => Err(Error::validation("bell_diagonal needs exactly one of `c`, `lambda`")),
            },
            StateSpec::Ewl {
                kind,
                r,
                alpha,
                alpha_sq,
            } => {
                let p = match (alpha, alpha_sq) {
                    (Some(a), None) => EwlParams::new(*kind, *r, *a)?,
                    (None, Some(a2)) => EwlParams::with_alpha_sq(*kind, *r, *a2)?,
                    _ => return Err(Error::validation("ewl needs exactly one of `alpha`, `alpha_sq`")),
                };
                Ok(State::X(ewl(&p)))
            }
            StateSpec::Pure { theta } => {
                if !theta.is_finite() {
                    return Err(Error::validation("theta must be finite"));
                }
                Ok(State::Dense(pure_schmidt(*theta)))
            }
            StateSpec::X { diag, o14, o23 } => Ok(State::X(XState::new(*diag, *o14, *o23)?)),
            StateSpec::Dense { re, im } => {
                let mut m = CMat4::zeros();
                for i in 0..4 {
                    for j in 0..4 {
                        m[(i, j)] = C64::new(re[i][j], im.map_or(0.0, |im| im[i][j]));
                    }
                }
                Ok(State::Dense(DensityMatrix::new(m)?))
            }
        }
    }
}
