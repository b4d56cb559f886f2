//! Dense complex linear algebra for one- and two-qubit operators.
//!
//! Matrices are fixed-size arrays indexed `[row][col]`; two-qubit operators use
//! the ordering `|s p>` -> `2 * s + p` (system first, probe second).

use core::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;
#[allow(unused_imports)] // inherent f64 math is unavailable without std
use num_traits::Float;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Tolerance used when a caller hands us a matrix that must be Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// A state vector of dimension `N`.
pub type Ket<const N: usize> = [C64; N];
pub type Ket2 = Ket<2>;
pub type Ket4 = Ket<4>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix<const N: usize>(pub [[C64; N]; N]);

pub type Mat2 = Matrix<2>;
pub type Mat4 = Matrix<4>;

pub const SIGMA_X: Mat2 = Matrix([[ZERO, ONE], [ONE, ZERO]]);
pub const SIGMA_Y: Mat2 = Matrix([[ZERO, C64::new(0.0, -1.0)], [I, ZERO]]);
pub const SIGMA_Z: Mat2 = Matrix([[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]]);

impl<const N: usize> Matrix<N> {
    pub const fn zeros() -> Self {
        Matrix([[ZERO; N]; N])
    }

    pub fn identity() -> Self {
        Self::diagonal(&[ONE; N])
    }

    pub fn diagonal(d: &[C64; N]) -> Self {
        let mut m = Self::zeros();
        for (i, &x) in d.iter().enumerate() {
            m.0[i][i] = x;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..N).map(|i| self.0[i][i]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|z| *z *= s);
        m
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |A - A^dagger|`.
    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        let deviation = self.hermiticity_error();
        if deviation <= tol && deviation.is_finite() {
            Ok(())
        } else {
            Err(Error::NotHermitian { deviation })
        }
    }

    /// `(A + A^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()).scale(C64::new(0.5, 0.0))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    /// `A B A^dagger`.
    pub fn conjugate(&self, inner: &Self) -> Self {
        *self * *inner * self.adjoint()
    }

    pub fn apply(&self, ket: &Ket<N>) -> Ket<N> {
        let mut out = [ZERO; N];
        for (i, row) in self.0.iter().enumerate() {
            out[i] = row.iter().zip(ket).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// `<a| M |a>` for a normalized `a`, real part only.
    pub fn expectation(&self, ket: &Ket<N>) -> f64 {
        inner(ket, &self.apply(ket)).re
    }

    /// `|a><a|`.
    pub fn projector(ket: &Ket<N>) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = ket[i] * ket[j].conj();
            }
        }
        m
    }

    /// Column `j` as a ket.
    pub fn column(&self, j: usize) -> Ket<N> {
        let mut out = [ZERO; N];
        for (i, z) in out.iter_mut().enumerate() {
            *z = self.0[i][j];
        }
        out
    }
}

impl<const N: usize> Default for Matrix<N> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const N: usize> Index<(usize, usize)> for Matrix<N> {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl<const N: usize> IndexMut<(usize, usize)> for Matrix<N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl<const N: usize> Add for Matrix<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl<const N: usize> AddAssign for Matrix<N> {
    fn add_assign(&mut self, rhs: Self) {
        for (a, b) in self.0.iter_mut().flatten().zip(rhs.0.iter().flatten()) {
            *a += b;
        }
    }
}

impl<const N: usize> Sub for Matrix<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().flatten().zip(rhs.0.iter().flatten()) {
            *a -= b;
        }
        self
    }
}

impl<const N: usize> Neg for Matrix<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-ONE)
    }
}

impl<const N: usize> Mul for Matrix<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for k in 0..N {
                let a = self.0[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..N {
                    m.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        m
    }
}

impl<const N: usize> Mul<f64> for Matrix<N> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(C64::new(rhs, 0.0))
    }
}

pub fn inner<const N: usize>(a: &Ket<N>, b: &Ket<N>) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn ket_norm<const N: usize>(a: &Ket<N>) -> f64 {
    inner(a, a).re.sqrt()
}

/// `|<a|b>|^2` for normalized kets.
pub fn fidelity<const N: usize>(a: &Ket<N>, b: &Ket<N>) -> f64 {
    inner(a, b).norm_sqr()
}

/// Kronecker product `a (x) b` of two single-qubit operators.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut m = Mat4::zeros();
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

pub fn kron_ket(a: &Ket2, b: &Ket2) -> Ket4 {
    [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
}

/// Real 3-vector on (or inside) the Bloch ball. Also used for unit axes.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const X: Self = Self::new(1.0, 0.0, 0.0);
    pub const Y: Self = Self::new(0.0, 1.0, 0.0);
    pub const Z: Self = Self::new(0.0, 0.0, 1.0);
    pub const ORIGIN: Self = Self::new(0.0, 0.0, 0.0);

    /// Below this norm a vector cannot be normalized into an axis.
    pub const MIN_AXIS_NORM: f64 = 1e-6;

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Normalizes `(x, y, z)` into a unit axis, rejecting near-zero vectors.
    pub fn unit(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::new(x, y, z).normalized()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !n.is_finite() || n < Self::MIN_AXIS_NORM {
            return Err(Error::invalid(alloc::format!(
                "axis ({}, {}, {}) has norm {n:e}, below {:e}",
                self.x,
                self.y,
                self.z,
                Self::MIN_AXIS_NORM
            )));
        }
        Ok(Self::new(self.x / n, self.y / n, self.z / n))
    }

    /// Unit vector from polar angle `theta` and azimuth `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self::new(
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        )
    }

    /// Polar and azimuthal angles, azimuth in `[0, 2 pi)`.
    pub fn angles(&self) -> (f64, f64) {
        let rho = self.x.hypot(self.y);
        let theta = rho.atan2(self.z);
        let mut phi = self.y.atan2(self.x);
        if phi < 0.0 {
            phi += 2.0 * core::f64::consts::PI;
        }
        (theta, phi)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, o: &Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// `sigma . v` (no normalization).
    pub fn pauli(&self) -> Mat2 {
        SIGMA_X * self.x + SIGMA_Y * self.y + SIGMA_Z * self.z
    }
}

impl From<[f64; 3]> for BlochVector {
    fn from([x, y, z]: [f64; 3]) -> Self {
        Self::new(x, y, z)
    }
}

/// Components `Tr(rho sigma_i)`.
pub fn bloch_vector(rho: &Mat2) -> BlochVector {
    BlochVector::new(
        (rho.0[0][1] + rho.0[1][0]).re,
        (rho.0[1][0] - rho.0[0][1]).im,
        (rho.0[0][0] - rho.0[1][1]).re,
    )
}

/// `(I + v . sigma) / 2`, rejecting vectors outside the Bloch ball.
pub fn bloch_to_density(v: &BlochVector) -> Result<Mat2> {
    let n = v.norm();
    if n.is_nan() || n > 1.0 + 1e-9 {
        return Err(Error::invalid(alloc::format!(
            "Bloch vector norm {n} exceeds 1"
        )));
    }
    Ok((Mat2::identity() + v.pauli()).scale(C64::new(0.5, 0.0)))
}

/// Pure state with Bloch vector `v` (normalized internally), phase chosen so
/// the `|0>` amplitude is real and non-negative.
pub fn ket_from_bloch(v: &BlochVector) -> Result<Ket2> {
    let u = v.normalized()?;
    let (theta, phi) = u.angles();
    Ok([
        C64::new((theta / 2.0).cos(), 0.0),
        C64::from_polar((theta / 2.0).sin(), phi),
    ])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    System,
    Probe,
}

/// Reduced state of one qubit of a two-qubit density matrix.
pub fn partial_trace(rho: &Mat4, keep: Subsystem) -> Mat2 {
    let mut out = Mat2::zeros();
    for a in 0..2 {
        for b in 0..2 {
            out.0[a][b] = match keep {
                Subsystem::System => rho.0[2 * a][2 * b] + rho.0[2 * a + 1][2 * b + 1],
                Subsystem::Probe => rho.0[a][b] + rho.0[2 + a][2 + b],
            };
        }
    }
    out
}

/// `Tr(rho^2)`.
pub fn purity<const N: usize>(rho: &Matrix<N>) -> f64 {
    // Tr(AB) = sum_ij A_ij B_ji, and rho is Hermitian so B_ji = conj(A_ij).
    let mut acc = 0.0;
    for i in 0..N {
        for j in 0..N {
            acc += (rho.0[i][j] * rho.0[j][i]).re;
        }
    }
    acc
}

/// Largest eigenvalue of a single-qubit density matrix, `(1 + |r|) / 2` at unit
/// trace: the weight of the dominant pure component.
pub fn max_eigenvalue(rho: &Mat2) -> f64 {
    let mean = 0.5 * (rho.0[0][0].re + rho.0[1][1].re);
    let half_gap = 0.5 * (rho.0[0][0].re - rho.0[1][1].re);
    mean + half_gap.hypot(rho.0[0][1].norm())
}

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigensystem<const N: usize> {
    pub values: [f64; N],
    pub vectors: Matrix<N>,
}

impl<const N: usize> Eigensystem<N> {
    /// `V diag(lambda) V^dagger`.
    pub fn reconstruct(&self) -> Matrix<N> {
        let d = Matrix::diagonal(&self.values.map(|l| C64::new(l, 0.0)));
        self.vectors * d * self.vectors.adjoint()
    }

    /// `V exp(-i lambda t) V^dagger`.
    pub fn propagator(&self, t: f64) -> Matrix<N> {
        let d = Matrix::diagonal(&self.values.map(|l| C64::from_polar(1.0, -l * t)));
        self.vectors * d * self.vectors.adjoint()
    }
}

const JACOBI_MAX_SWEEPS: usize = 64;

/// Eigen-decomposition of a Hermitian matrix: closed form for `N = 2`, cyclic
/// Jacobi rotations otherwise.
pub fn hermitian_eigensystem<const N: usize>(h: &Matrix<N>) -> Result<Eigensystem<N>> {
    h.check_hermitian(HERMITIAN_TOL)?;
    let h = h.hermitian_part();
    let mut es = if N == 2 {
        closed_form_2x2(&h)
    } else {
        jacobi(&h)
    };
    sort_ascending(&mut es);
    Ok(es)
}

fn closed_form_2x2<const N: usize>(h: &Matrix<N>) -> Eigensystem<N> {
    let mean = 0.5 * (h.0[0][0].re + h.0[1][1].re);
    let b = BlochVector::new(
        h.0[0][1].re,
        -h.0[0][1].im,
        0.5 * (h.0[0][0].re - h.0[1][1].re),
    );
    let r = b.norm();
    let mut vectors = Matrix::<N>::identity();
    let mut values = [0.0; N];
    values[0] = mean - r;
    values[1] = mean + r;
    if r > 0.0 {
        let (theta, phi) = b.angles();
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let e = C64::from_polar(1.0, phi);
        // column 0: |-> along b, column 1: |+> along b
        vectors.0[0][0] = C64::new(s, 0.0);
        vectors.0[1][0] = -e * c;
        vectors.0[0][1] = C64::new(c, 0.0);
        vectors.0[1][1] = e * s;
    } else {
        values[0] = mean;
    }
    Eigensystem { values, vectors }
}

fn off_diagonal_norm<const N: usize>(a: &Matrix<N>) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        for j in 0..N {
            if i != j {
                acc += a.0[i][j].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

fn jacobi<const N: usize>(h: &Matrix<N>) -> Eigensystem<N> {
    let mut a = *h;
    let mut v = Matrix::<N>::identity();
    let scale = a.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Eigensystem {
            values: [0.0; N],
            vectors: v,
        };
    }
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= 1e-16 * scale {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a.0[p][q];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                // Phase-rotate q so the (p, q) block is real symmetric, then
                // apply the real Jacobi rotation that annihilates it.
                let phase = apq / r;
                let tau = (a.0[q][q].re - a.0[p][p].re) / (2.0 * r);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let e = phase.conj();
                // U restricted to (p, q): [[c, s], [-s e, c e]] with e = exp(-i alpha)
                let (upp, upq, uqp, uqq) = (C64::new(c, 0.0), C64::new(s, 0.0), -e * s, e * c);
                for k in 0..N {
                    let (akp, akq) = (a.0[k][p], a.0[k][q]);
                    a.0[k][p] = akp * upp + akq * uqp;
                    a.0[k][q] = akp * upq + akq * uqq;
                    let (vkp, vkq) = (v.0[k][p], v.0[k][q]);
                    v.0[k][p] = vkp * upp + vkq * uqp;
                    v.0[k][q] = vkp * upq + vkq * uqq;
                }
                for k in 0..N {
                    let (apk, aqk) = (a.0[p][k], a.0[q][k]);
                    a.0[p][k] = upp.conj() * apk + uqp.conj() * aqk;
                    a.0[q][k] = upq.conj() * apk + uqq.conj() * aqk;
                }
                a.0[p][q] = ZERO;
                a.0[q][p] = ZERO;
            }
        }
    }
    let mut values = [0.0; N];
    for (i, l) in values.iter_mut().enumerate() {
        *l = a.0[i][i].re;
    }
    Eigensystem { values, vectors: v }
}

fn sort_ascending<const N: usize>(es: &mut Eigensystem<N>) {
    let mut order = [0usize; N];
    for (i, o) in order.iter_mut().enumerate() {
        *o = i;
    }
    order.sort_by(|&i, &j| es.values[i].total_cmp(&es.values[j]));
    let values = order.map(|i| es.values[i]);
    let mut vectors = Matrix::<N>::zeros();
    for (new, &old) in order.iter().enumerate() {
        for row in 0..N {
            vectors.0[row][new] = es.vectors.0[row][old];
        }
    }
    *es = Eigensystem { values, vectors };
}

/// `exp(-i h t)` for Hermitian `h` (hbar = 1).
pub fn propagator<const N: usize>(h: &Matrix<N>, t: f64) -> Result<Matrix<N>> {
    Ok(hermitian_eigensystem(h)?.propagator(t))
}
