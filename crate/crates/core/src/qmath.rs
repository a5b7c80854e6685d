//! Fixed-size complex linear algebra on one and two qubits.
//!
//! Two-qubit objects use the basis order `|00⟩, |01⟩, |10⟩, |11⟩` with the
//! source qubit as the first tensor factor. Every routine here is closed-form
//! or a bounded iteration, so results are bit-for-bit reproducible.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Tolerances shared by contract checks across the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericalPolicy {
    /// Contract checks (filter normalization, transfer identities).
    pub contract_tol: f64,
    /// Purely algebraic identities (reconstructions, tensor laws).
    pub identity_tol: f64,
    /// Linear-dependence threshold, relative to the larger squared norm.
    pub dependence_rel: f64,
    pub jacobi_max_sweeps: usize,
}

impl NumericalPolicy {
    pub const DEFAULT: NumericalPolicy = NumericalPolicy {
        contract_tol: 1e-9,
        identity_tol: 1e-12,
        dependence_rel: 1e-10,
        jacobi_max_sweeps: 50,
    };
}

impl Default for NumericalPolicy {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Which tensor factor of a two-qubit vector a projection contracts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    Source,
    Target,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex2Vector(pub [C64; 2]);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex2Matrix(pub [[C64; 2]; 2]);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex4Vector(pub [C64; 4]);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex4Matrix(pub [[C64; 4]; 4]);

impl Complex2Vector {
    pub const fn new(a: C64, b: C64) -> Self {
        Self([a, b])
    }

    pub fn real(a: f64, b: f64) -> Self {
        Self([C64::new(a, 0.0), C64::new(b, 0.0)])
    }

    pub fn zero() -> Self {
        Self([ZERO; 2])
    }

    pub fn basis(i: usize) -> Self {
        let mut v = Self::zero();
        v.0[i] = ONE;
        v
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self([self.0[0] * s, self.0[1] * s])
    }

    /// A vector orthogonal to `self` with the same norm.
    pub fn perp(&self) -> Self {
        Self([-self.0[1].conj(), self.0[0].conj()])
    }

    /// `|self⟩⟨other|`.
    pub fn outer(&self, other: &Self) -> Complex2Matrix {
        let mut m = [[ZERO; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.0[i] * other.0[j].conj();
            }
        }
        Complex2Matrix(m)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (0..2).map(|i| (self.0[i] - other.0[i]).norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.is_finite())
    }
}

/// Determinant of the 2×2 matrix with columns `a`, `b`.
pub fn det_columns(a: &Complex2Vector, b: &Complex2Vector) -> C64 {
    a.0[0] * b.0[1] - a.0[1] * b.0[0]
}

impl Complex2Matrix {
    pub fn zero() -> Self {
        Self([[ZERO; 2]; 2])
    }

    pub fn identity() -> Self {
        Self::diag(ONE, ONE)
    }

    pub fn diag(a: C64, b: C64) -> Self {
        Self([[a, ZERO], [ZERO, b]])
    }

    pub fn real(m: [[f64; 2]; 2]) -> Self {
        Self(m.map(|row| row.map(|x| C64::new(x, 0.0))))
    }

    pub fn from_columns(a: &Complex2Vector, b: &Complex2Vector) -> Self {
        Self([[a.0[0], b.0[0]], [a.0[1], b.0[1]]])
    }

    pub fn column(&self, j: usize) -> Complex2Vector {
        Complex2Vector([self.0[0][j], self.0[1][j]])
    }

    pub fn pauli_x() -> Self {
        Self::real([[0.0, 1.0], [1.0, 0.0]])
    }

    pub fn pauli_y() -> Self {
        Self([[ZERO, -I], [I, ZERO]])
    }

    pub fn pauli_z() -> Self {
        Self::real([[1.0, 0.0], [0.0, -1.0]])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Self([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(self.0.map(|row| row.map(|x| x * s)))
    }

    pub fn frobenius_sqr(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        d
    }

    /// `Tr(self† other)`, the Hilbert-Schmidt inner product.
    pub fn hs_inner(&self, other: &Self) -> C64 {
        let mut acc = ZERO;
        for i in 0..2 {
            for j in 0..2 {
                acc += self.0[i][j].conj() * other.0[i][j];
            }
        }
        acc
    }

    /// `min_θ ‖self − e^{iθ} other‖_F`: distance up to a global phase.
    pub fn phase_invariant_distance(&self, other: &Self) -> f64 {
        let d2 = self.frobenius_sqr() + other.frobenius_sqr() - 2.0 * other.hs_inner(self).norm();
        d2.max(0.0).sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.is_finite())
    }

    /// Unitary within `tol` in the max-entry norm of `M†M − I`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        (self.adjoint() * *self).max_abs_diff(&Self::identity()) <= tol
    }
}

impl Complex4Vector {
    pub fn zero() -> Self {
        Self([ZERO; 4])
    }

    pub fn basis(i: usize) -> Self {
        let mut v = Self::zero();
        v.0[i] = ONE;
        v
    }

    /// `(|00⟩ + |11⟩)/√2`.
    pub fn bell_phi_plus() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self([h, ZERO, ZERO, h])
    }

    pub fn kron(a: &Complex2Vector, b: &Complex2Vector) -> Self {
        Self([a.0[0] * b.0[0], a.0[0] * b.0[1], a.0[1] * b.0[0], a.0[1] * b.0[1]])
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(self.0.map(|x| x * s))
    }

    pub fn outer(&self, other: &Self) -> Complex4Matrix {
        let mut m = [[ZERO; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.0[i] * other.0[j].conj();
            }
        }
        Complex4Matrix(m)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (0..4).map(|i| (self.0[i] - other.0[i]).norm()).fold(0.0, f64::max)
    }
}

impl Complex4Matrix {
    pub fn zero() -> Self {
        Self([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        Self::diag([ONE; 4])
    }

    pub fn diag(d: [C64; 4]) -> Self {
        let mut m = Self::zero();
        for (i, x) in d.into_iter().enumerate() {
            m.0[i][i] = x;
        }
        m
    }

    pub fn diagonal(&self) -> [C64; 4] {
        [self.0[0][0], self.0[1][1], self.0[2][2], self.0[3][3]]
    }

    /// Exchanges the two qubits.
    pub fn swap() -> Self {
        let mut m = Self::zero();
        for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            m.0[i][j] = ONE;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(self.0.map(|row| row.map(|x| x * s)))
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                d = d.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn hermitize(&self) -> Self {
        (*self + self.adjoint()).scale_real(0.5)
    }

    /// `⟨v|M|v⟩`.
    pub fn expectation(&self, v: &Complex4Vector) -> C64 {
        v.inner(&(*self * *v))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.is_finite())
    }
}

/// Kronecker product `a ⊗ b`; `a` acts on the source qubit.
pub fn tensor(a: &Complex2Matrix, b: &Complex2Matrix) -> Complex4Matrix {
    let mut m = Complex4Matrix::zero();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m.0[2 * i + k][2 * j + l] = a.0[i][j] * b.0[k][l];
                }
            }
        }
    }
    m
}

/// Contracts one qubit of `state` with the bra `⟨bra|`, leaving the
/// unnormalized residual vector on the other qubit.
pub fn partial_project(
    bra: &Complex2Vector,
    state: &Complex4Vector,
    subsystem: Subsystem,
) -> Complex2Vector {
    let b = [bra.0[0].conj(), bra.0[1].conj()];
    let s = &state.0;
    match subsystem {
        Subsystem::Source => Complex2Vector([b[0] * s[0] + b[1] * s[2], b[0] * s[1] + b[1] * s[3]]),
        Subsystem::Target => Complex2Vector([b[0] * s[0] + b[1] * s[1], b[0] * s[2] + b[1] * s[3]]),
    }
}

/// Singular value decomposition `m = u · diag(sigma) · v†`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Svd2 {
    pub u: Complex2Matrix,
    /// Descending, non-negative.
    pub sigma: [f64; 2],
    pub v: Complex2Matrix,
}

impl Svd2 {
    pub fn reconstruct(&self) -> Complex2Matrix {
        let s = Complex2Matrix::diag(self.sigma[0].into(), self.sigma[1].into());
        self.u * s * self.v.adjoint()
    }
}

/// Closed-form SVD of a 2×2 complex matrix.
///
/// The right singular vectors come from the Hermitian eigenproblem of `m†m`.
/// The second left vector is taken as the exact orthogonal complement of the
/// first, with the phase chosen so the second singular value is real, which
/// keeps `u` unitary to rounding even for rank-deficient input.
pub fn svd2(m: &Complex2Matrix) -> Svd2 {
    let h = m.adjoint() * *m;
    let a = h.0[0][0].re;
    let d = h.0[1][1].re;
    let b = h.0[0][1];
    let half_gap = ((a - d) * 0.5).hypot(b.norm());
    let mid = (a + d) * 0.5;
    let lambda1 = mid + half_gap;

    // eigenvector of the larger eigenvalue; pick the better-conditioned row
    let cand1 = Complex2Vector([b, C64::new(lambda1 - a, 0.0)]);
    let cand2 = Complex2Vector([C64::new(lambda1 - d, 0.0), b.conj()]);
    let best = if cand1.norm_sqr() >= cand2.norm_sqr() { cand1 } else { cand2 };
    let scale = lambda1.abs().max(f64::MIN_POSITIVE);
    let v1 = if best.norm_sqr() <= (1e-30 * scale).powi(2) {
        Complex2Vector::basis(0)
    } else {
        best.scale((1.0 / best.norm()).into())
    };
    let v2 = v1.perp();
    let v = Complex2Matrix::from_columns(&v1, &v2);

    let mv1 = *m * v1;
    let s1 = mv1.norm();
    if s1 == 0.0 {
        return Svd2 {
            u: Complex2Matrix::identity(),
            sigma: [0.0, 0.0],
            v,
        };
    }
    let u1 = mv1.scale((1.0 / s1).into());
    let mut u2 = u1.perp();
    let proj = u2.inner(&(*m * v2));
    let s2 = proj.norm();
    if s2 > 0.0 {
        u2 = u2.scale(proj / s2);
    }
    Svd2 {
        u: Complex2Matrix::from_columns(&u1, &u2),
        sigma: [s1, s2],
        v,
    }
}

pub fn singular_values(m: &Complex2Matrix) -> [f64; 2] {
    svd2(m).sigma
}

/// Spectral decomposition of a Hermitian 4×4 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianEigen {
    /// Descending.
    pub values: [f64; 4],
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: Complex4Matrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Complex4Vector {
        Complex4Vector([0, 1, 2, 3].map(|i| self.vectors.0[i][k]))
    }

    /// `Σ f(λ_k) |v_k⟩⟨v_k|`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Complex4Matrix {
        let mut out = Complex4Matrix::zero();
        for k in 0..4 {
            let v = self.vector(k);
            out = out + v.outer(&v).scale_real(f(self.values[k]));
        }
        out
    }

    pub fn reconstruct(&self) -> Complex4Matrix {
        self.map_spectrum(|x| x)
    }
}

/// Cyclic complex Jacobi eigensolver for Hermitian 4×4 matrices.
pub fn eig_hermitian4(m: &Complex4Matrix) -> Result<HermitianEigen> {
    eig_hermitian4_with(m, &NumericalPolicy::DEFAULT)
}

pub fn eig_hermitian4_with(m: &Complex4Matrix, policy: &NumericalPolicy) -> Result<HermitianEigen> {
    let deviation = m.hermitian_deviation();
    if !(deviation <= 1e-10 * m.max_abs().max(1.0)) {
        return Err(Error::NotHermitian { deviation });
    }
    let mut a = m.hermitize();
    let mut v = Complex4Matrix::identity();
    let total: f64 = a.0.iter().flatten().map(|z| z.norm_sqr()).sum();

    for _ in 0..policy.jacobi_max_sweeps {
        let off: f64 = (0..4)
            .flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.0[i][j].norm_sqr())
            .sum();
        if off <= (f64::EPSILON * f64::EPSILON) * total || off == 0.0 {
            break;
        }
        for p in 0..3 {
            for q in (p + 1)..4 {
                let apq = a.0[p][q];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = apq / mag;
                let theta = 0.5 * (2.0 * mag).atan2(a.0[q][q].re - a.0[p][p].re);
                let (s, c) = theta.sin_cos();
                // G = diag(1, e^{-iφ}) on (p, q), followed by a real rotation
                let mut g = Complex4Matrix::identity();
                g.0[p][p] = C64::new(c, 0.0);
                g.0[p][q] = C64::new(s, 0.0);
                g.0[q][p] = -phase.conj() * s;
                g.0[q][q] = phase.conj() * c;
                a = g.adjoint() * a * g;
                a.0[p][q] = ZERO;
                a.0[q][p] = ZERO;
                v = v * g;
            }
        }
    }

    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| a.0[j][j].re.total_cmp(&a.0[i][i].re));
    let values = order.map(|k| a.0[k][k].re);
    let mut vectors = Complex4Matrix::zero();
    for (col, &k) in order.iter().enumerate() {
        for i in 0..4 {
            vectors.0[i][col] = v.0[i][k];
        }
    }
    Ok(HermitianEigen { values, vectors })
}

macro_rules! impl_linear_ops {
    ($t:ident) => {
        impl Add for $t {
            type Output = $t;
            fn add(mut self, rhs: $t) -> $t {
                for (a, b) in self.0.iter_mut().flatten().zip(rhs.0.iter().flatten()) {
                    *a += *b;
                }
                self
            }
        }

        impl Sub for $t {
            type Output = $t;
            fn sub(mut self, rhs: $t) -> $t {
                for (a, b) in self.0.iter_mut().flatten().zip(rhs.0.iter().flatten()) {
                    *a -= *b;
                }
                self
            }
        }

        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                $t(self.0.map(|row| row.map(|x| -x)))
            }
        }
    };
}

impl_linear_ops!(Complex2Matrix);
impl_linear_ops!(Complex4Matrix);

impl Add for Complex2Vector {
    type Output = Complex2Vector;
    fn add(self, rhs: Self) -> Self {
        Self([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1]])
    }
}

impl Sub for Complex2Vector {
    type Output = Complex2Vector;
    fn sub(self, rhs: Self) -> Self {
        Self([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1]])
    }
}

impl Add for Complex4Vector {
    type Output = Complex4Vector;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
        self
    }
}

impl Mul for Complex2Matrix {
    type Output = Complex2Matrix;
    fn mul(self, rhs: Self) -> Self {
        let mut m = Self::zero();
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = self.0[i][0] * rhs.0[0][j] + self.0[i][1] * rhs.0[1][j];
            }
        }
        m
    }
}

impl Mul<Complex2Vector> for Complex2Matrix {
    type Output = Complex2Vector;
    fn mul(self, v: Complex2Vector) -> Complex2Vector {
        Complex2Vector([
            self.0[0][0] * v.0[0] + self.0[0][1] * v.0[1],
            self.0[1][0] * v.0[0] + self.0[1][1] * v.0[1],
        ])
    }
}

impl Mul for Complex4Matrix {
    type Output = Complex4Matrix;
    fn mul(self, rhs: Self) -> Self {
        let mut m = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        m
    }
}

impl Mul<Complex4Vector> for Complex4Matrix {
    type Output = Complex4Vector;
    fn mul(self, v: Complex4Vector) -> Complex4Vector {
        Complex4Vector([0, 1, 2, 3].map(|i| (0..4).map(|k| self.0[i][k] * v.0[k]).sum()))
    }
}
