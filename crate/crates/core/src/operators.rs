//! Finite-dimensional operator algebra.
//!
//! Matrices are dense `DMatrix<Complex64>`. Superoperators act on density
//! matrices flattened by **column stacking**: entry `(i, j)` of a `d x d`
//! matrix sits at index `i + d * j` of the vector. Under this convention
//! `vec(A X B) = (B^T ⊗ A) vec(X)`.

use alloc::format;
use alloc::vec::Vec;

use libm::{cos, sin, sqrt};
use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Absolute tolerance for Hermiticity, trace and positivity checks.
pub const STATE_TOL: f64 = 1e-12;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const IM: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// Pauli matrix `σ^k` for `k ∈ {1, 2, 3}`; `k = 0` gives the identity.
pub fn pauli(k: usize) -> CMatrix {
    match k {
        0 => identity(2),
        1 => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        2 => CMatrix::from_row_slice(2, 2, &[ZERO, -IM, IM, ZERO]),
        3 => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        _ => panic!("pauli index {k} out of range"),
    }
}

/// Matrix unit `|i⟩⟨j|`.
pub fn matrix_unit(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = ONE;
    m
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn frobenius_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm_one(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Induced infinity-norm (maximum absolute row sum).
pub fn norm_inf(m: &CMatrix) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Spectral norm, via the largest eigenvalue of `A†A`.
pub fn op_norm(m: &CMatrix) -> f64 {
    let g = hermitian_part(&(m.adjoint() * m));
    let eig = SymmetricEigen::new(g);
    sqrt(eig.eigenvalues.iter().cloned().fold(0.0, f64::max).max(0.0))
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(m.nrows())
}

/// Eigenvalues sorted ascending, with the matching orthonormal eigenvectors
/// as columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Spectrum {
    /// `Σ_k e^{i s λ_k} |v_k⟩⟨v_k|`
    pub fn exp_i(&self, s: f64) -> CMatrix {
        let d = self.values.len();
        let mut scaled = self.vectors.clone();
        for k in 0..d {
            let ph = c(cos(s * self.values[k]), sin(s * self.values[k]));
            for i in 0..d {
                scaled[(i, k)] *= ph;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Eigendecomposition of a Hermitian matrix (only the Hermitian part is used).
pub fn hermitian_spectrum(m: &CMatrix) -> Spectrum {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let d = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(d, d);
    for (new, &old) in order.iter().enumerate() {
        vectors.set_column(new, &eig.eigenvectors.column(old));
    }
    Spectrum { values, vectors }
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_spectrum(m).values.first().cloned().unwrap_or(0.0)
}

/// A Hermitian operator. Construction checks `‖H − H†‖_max ≤ 1e-12` and
/// stores the exactly symmetrized matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        ensure_square(&m)?;
        let dev = max_abs(&(&m - m.adjoint()));
        if dev > STATE_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self { matrix: hermitian_part(&m) })
    }

    pub fn zero(d: usize) -> Self {
        Self { matrix: CMatrix::zeros(d, d) }
    }

    pub fn pauli(k: usize) -> Self {
        Self { matrix: pauli(k) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { matrix: self.matrix.scale(s) }
    }

    pub fn spectrum(&self) -> Spectrum {
        hermitian_spectrum(&self.matrix)
    }
}

/// A density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        ensure_square(&m)?;
        let dev = max_abs(&(&m - m.adjoint()));
        if dev > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {dev:e})")));
        }
        let m = hermitian_part(&m);
        let tr = m.trace();
        if (tr - ONE).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let lo = min_eigenvalue(&m);
        if lo < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {lo:e}")));
        }
        Ok(Self { matrix: m })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { matrix: identity(d).scale(1.0 / d as f64) }
    }

    /// Pure state `|ψ⟩⟨ψ|` from an (unnormalized) vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm = sqrt(psi.iter().map(|z| z.norm_sqr()).sum::<f64>());
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let v = nalgebra::DVector::from_iterator(psi.len(), psi.iter().map(|z| z / norm));
        Self::new(&v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }
}

/// Bloch vector of a qubit state, `ρ = (I + x·σ)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub x: [f64; 3],
}

impl BlochVector {
    pub fn new(x1: f64, x2: f64, x3: f64) -> Result<Self> {
        let v = Self { x: [x1, x2, x3] };
        if !v.x.iter().all(|c| c.is_finite()) || v.norm_sq() > 1.0 + STATE_TOL {
            return Err(Error::InvalidState(format!("Bloch vector {:?} outside the unit ball", v.x)));
        }
        Ok(v)
    }

    pub fn norm_sq(&self) -> f64 {
        self.x.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        sqrt(self.norm_sq())
    }
}

/// Component formulas `x1 = 2 Re ρ21`, `x2 = 2 Im ρ21`, `x3 = 2 ρ11 − 1`.
pub fn bloch_from_density(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::Dimension { expected: 2, got: rho.dim() });
    }
    let m = rho.matrix();
    let r21 = m[(1, 0)];
    Ok(BlochVector { x: [2.0 * r21.re, 2.0 * r21.im, 2.0 * m[(0, 0)].re - 1.0] })
}

pub fn density_from_bloch(x: &BlochVector) -> Result<DensityMatrix> {
    let x = BlochVector::new(x.x[0], x.x[1], x.x[2])?;
    let [x1, x2, x3] = x.x;
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[c(0.5 * (1.0 + x3), 0.0), c(0.5 * x1, -0.5 * x2), c(0.5 * x1, 0.5 * x2), c(0.5 * (1.0 - x3), 0.0)],
    );
    // Validity follows from |x| ≤ 1; skip the eigenvalue check.
    Ok(DensityMatrix { matrix: m })
}

/// `e^{i s H}` through the eigendecomposition of `H`.
pub fn expm_hermitian(h: &HermitianOperator, s: f64) -> CMatrix {
    h.spectrum().exp_i(s)
}

/// Same as [`expm_hermitian`] for a raw matrix, validating Hermiticity.
pub fn expm_hermitian_matrix(h: &CMatrix, s: f64) -> Result<CMatrix> {
    Ok(expm_hermitian(&HermitianOperator::new(h.clone())?, s))
}

/// Column-stacking vectorization.
pub fn vec_of(m: &CMatrix) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &nalgebra::DVector<Complex64>, d: usize) -> CMatrix {
    CMatrix::from_column_slice(d, d, v.as_slice())
}

/// Linear map on `d x d` matrices, stored as a `d² x d²` matrix acting on
/// column-stacked vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn new(dim: usize, matrix: CMatrix) -> Result<Self> {
        let n = ensure_square(&matrix)?;
        if n != dim * dim {
            return Err(Error::Dimension { expected: dim * dim, got: n });
        }
        Ok(Self { dim, matrix })
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, matrix: CMatrix::zeros(dim * dim, dim * dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, matrix: identity(dim * dim) }
    }

    /// `ρ ↦ A ρ B`
    pub fn sandwich(a: &CMatrix, b: &CMatrix) -> Self {
        Self { dim: a.nrows(), matrix: kron(&b.transpose(), a) }
    }

    /// GKSL dissipator `ρ ↦ S ρ S† − ½{S†S, ρ}`.
    pub fn dissipator(s: &CMatrix) -> Self {
        let d = s.nrows();
        let id = identity(d);
        let sds = s.adjoint() * s;
        let m = kron(&s.conjugate(), s) - (kron(&id, &sds) + kron(&sds.transpose(), &id)).scale(0.5);
        Self { dim: d, matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        unvec(&(&self.matrix * vec_of(rho)), self.dim)
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &Superoperator) -> Superoperator {
        Self { dim: self.dim, matrix: &self.matrix * &other.matrix }
    }

    pub fn add_scaled(&mut self, other: &Superoperator, s: f64) {
        self.matrix.zip_apply(&other.matrix, |a, b| *a += b * s);
    }

    /// Express in a new orthonormal basis whose vectors are the columns of
    /// `v`: the result acts on matrices written in that basis.
    pub fn in_basis(&self, v: &CMatrix) -> Superoperator {
        let k = kron(&v.conjugate(), v);
        Self { dim: self.dim, matrix: k.adjoint() * &self.matrix * k }
    }

    /// Inverse of [`Superoperator::in_basis`].
    pub fn from_basis(&self, v: &CMatrix) -> Superoperator {
        let k = kron(&v.conjugate(), v);
        Self { dim: self.dim, matrix: &k * &self.matrix * k.adjoint() }
    }

    /// Unnormalized Choi matrix `Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`.
    pub fn choi(&self) -> CMatrix {
        let d = self.dim;
        let mut out = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let img = self.apply(&matrix_unit(d, i, j));
                out.view_mut((i * d, j * d), (d, d)).copy_from(&img);
            }
        }
        out
    }
}

/// Matrix of a linear map, built from its action on the `d²` matrix units.
pub fn vectorize<F>(d: usize, map: F) -> Superoperator
where
    F: Fn(&CMatrix) -> CMatrix,
{
    let mut m = CMatrix::zeros(d * d, d * d);
    for j in 0..d {
        for i in 0..d {
            let img = map(&matrix_unit(d, i, j));
            m.set_column(i + d * j, &vec_of(&img));
        }
    }
    Superoperator { dim: d, matrix: m }
}

// Padé(13) coefficients for scaling and squaring (Higham 2005).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// `e^{t M}` by scaling and squaring with a degree-13 Padé approximant.
pub fn expm_general(m: &CMatrix, t: f64) -> Result<CMatrix> {
    let n = ensure_square(m)?;
    if !t.is_finite() {
        return Err(Error::Domain { name: "t", value: t });
    }
    let a = m.scale(t);
    let norm = norm_one(&a);
    if norm == 0.0 {
        return Ok(identity(n));
    }
    let mut squarings = 0u32;
    if norm > THETA13 {
        squarings = libm::ceil(libm::log2(norm / THETA13)) as u32;
    }
    if squarings > 1000 {
        return Err(Error::Overflow);
    }
    let a = a.scale(libm::exp2(-(squarings as f64)));
    let id = identity(n);
    let b = |k: usize| c(PADE13[k], 0.0);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9)) + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8)) + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).ok_or(Error::Overflow)?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if r.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Overflow);
    }
    Ok(r)
}

/// Outcome of a complete-positivity / trace-preservation audit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptpReport {
    pub trace_defect: f64,
    pub choi_min_eig: f64,
}

impl CptpReport {
    pub const TOL: f64 = 1e-10;

    pub fn passes(&self) -> bool {
        self.trace_defect <= Self::TOL && self.choi_min_eig >= -Self::TOL
    }
}

/// Trace-preservation defect `max_ij |Tr Φ(|i⟩⟨j|) − δ_ij|` and the minimum
/// eigenvalue of the (Hermitian part of the) Choi matrix.
pub fn verify_cptp(map: &Superoperator) -> CptpReport {
    let d = map.dim();
    let mut defect: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let tr = map.apply(&matrix_unit(d, i, j)).trace();
            let want = if i == j { ONE } else { ZERO };
            defect = defect.max((tr - want).norm());
        }
    }
    CptpReport { trace_defect: defect, choi_min_eig: min_eigenvalue(&map.choi()) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn random_matrix(d: usize, seed: u64) -> CMatrix {
        // small LCG keeps these unit tests free of RNG plumbing
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / ((1u64 << 53) as f64) * 2.0 - 1.0
        };
        CMatrix::from_fn(d, d, |_, _| c(next(), next()))
    }

    #[test]
    fn bloch_poles_and_center() {
        let mixed = DensityMatrix::maximally_mixed(2);
        assert_eq!(bloch_from_density(&mixed).unwrap().x, [0.0, 0.0, 0.0]);
        let up = DensityMatrix::new(CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO])).unwrap();
        assert_eq!(bloch_from_density(&up).unwrap().x, [0.0, 0.0, 1.0]);
        let back = density_from_bloch(&BlochVector::new(0.0, 0.0, 0.0).unwrap()).unwrap();
        assert!(max_abs(&(back.matrix() - identity(2).scale(0.5))) == 0.0);
    }

    #[test]
    fn bloch_component_inversion() {
        let (a, b, cc) = (0.3, -0.4, 0.5);
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c((1.0 + cc) / 2.0, 0.0), c(a / 2.0, -b / 2.0), c(a / 2.0, b / 2.0), c((1.0 - cc) / 2.0, 0.0)],
        );
        let x = bloch_from_density(&DensityMatrix::new(m).unwrap()).unwrap();
        assert!((x.x[0] - a).abs() < 1e-15 && (x.x[1] - b).abs() < 1e-15 && (x.x[2] - cc).abs() < 1e-15);
    }

    #[test]
    fn bloch_rejects_outside_ball_and_wrong_dim() {
        assert!(BlochVector::new(1.0, 0.1, 0.0).is_err());
        assert!(bloch_from_density(&DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn unit_bloch_vector_is_pure() {
        let x = BlochVector::new(0.6, 0.0, 0.8).unwrap();
        let rho = density_from_bloch(&x).unwrap();
        let m = rho.matrix();
        assert!(max_abs(&(m * m - m)) < 1e-12);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(identity(2)).is_err());
        let neg = CMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), ZERO, ZERO, c(-0.5, 0.0)]);
        assert!(DensityMatrix::new(neg).is_err());
        let non_herm = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), ONE, ZERO, c(0.5, 0.0)]);
        assert!(DensityMatrix::new(non_herm).is_err());
    }

    #[test]
    fn expm_hermitian_cases() {
        assert!(max_abs(&(expm_hermitian(&HermitianOperator::zero(3), 1.7) - identity(3))) == 0.0);
        let u = expm_hermitian(&HermitianOperator::pauli(1), -PI / 2.0);
        assert!(max_abs(&(u - pauli(1) * (-IM))) < 1e-15);
    }

    #[test]
    fn expm_hermitian_matches_power_series() {
        let h = pauli(1);
        let s = -PI / 2.0;
        let x = h.scale(s) * IM;
        let mut term = identity(2);
        let mut sum = identity(2);
        for k in 1..40 {
            term = &term * &x / c(k as f64, 0.0);
            sum += &term;
        }
        assert!(max_abs(&(sum - expm_hermitian_matrix(&h, s).unwrap())) < 1e-14);
    }

    #[test]
    fn expm_hermitian_rejects_non_hermitian() {
        assert!(expm_hermitian_matrix(&matrix_unit(2, 0, 1), 1.0).is_err());
    }

    #[test]
    fn expm_hermitian_is_unitary() {
        for seed in 0..20 {
            let a = random_matrix(4, seed);
            let h = HermitianOperator::new((&a + a.adjoint()).scale(0.5)).unwrap();
            let u = expm_hermitian(&h, 3.1);
            assert!(op_norm(&(u.adjoint() * &u - identity(4))) < 1e-12);
        }
    }

    #[test]
    fn vectorize_identity_and_sandwich() {
        let id = vectorize(2, |m| m.clone());
        assert_eq!(id.matrix(), &identity(4));
        let a = random_matrix(3, 1);
        let b = random_matrix(3, 2);
        let map = vectorize(3, |m| &a * m * &b);
        assert_eq!(map.matrix(), Superoperator::sandwich(&a, &b).matrix());
        assert!(max_abs(&(map.matrix() - kron(&b.transpose(), &a))) == 0.0);
    }

    #[test]
    fn commutator_generator_is_traceless() {
        let a = random_matrix(2, 3);
        let h = (&a + a.adjoint()).scale(0.5);
        let map = vectorize(2, |m| commutator(&h, m) * (-IM));
        // left action of the trace functional: vec(I)^† L = 0
        let tr_row = vec_of(&identity(2)).adjoint() * map.matrix();
        assert!(tr_row.iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn expm_general_trivial_cases() {
        assert_eq!(expm_general(&CMatrix::zeros(3, 3), 2.0).unwrap(), identity(3));
        let n = matrix_unit(2, 0, 1);
        let e = expm_general(&n, 1.0).unwrap();
        let want = CMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        assert!(max_abs(&(e - want)) < 1e-15);
    }

    #[test]
    fn expm_general_matches_diagonalization() {
        for seed in 0..10 {
            let a = random_matrix(4, 10 + seed);
            let h = (&a + a.adjoint()).scale(0.5);
            // normal matrix with complex spectrum: i·H + 0.3·I
            let m = &h * IM - identity(4).scale(0.3);
            let direct = expm_general(&m, 2.5).unwrap();
            let spec = hermitian_spectrum(&h);
            let oracle = spec.exp_i(2.5).scale(libm::exp(-0.75));
            assert!(max_abs(&(direct - oracle)) < 1e-10);
        }
    }

    #[test]
    fn transposition_is_not_completely_positive() {
        let t = vectorize(2, |m| m.transpose());
        let r = verify_cptp(&t);
        assert!(r.trace_defect < 1e-15);
        assert!((r.choi_min_eig + 1.0).abs() < 1e-12);
        assert!(!r.passes());
        let id = verify_cptp(&Superoperator::identity(2));
        assert!(id.passes() && id.choi_min_eig.abs() < 1e-12);
    }

    #[test]
    fn dissipator_matches_direct_action() {
        let s = random_matrix(3, 7);
        let rho = random_matrix(3, 8);
        let sds = s.adjoint() * &s;
        let direct = &s * &rho * s.adjoint() - (&sds * &rho + &rho * &sds).scale(0.5);
        assert!(max_abs(&(Superoperator::dissipator(&s).apply(&rho) - direct)) < 1e-13);
    }

    #[test]
    fn basis_change_round_trip() {
        let a = random_matrix(2, 4);
        let v = expm_hermitian_matrix(&(&a + a.adjoint()).scale(0.5), 1.0).unwrap();
        let l = Superoperator::dissipator(&random_matrix(2, 5));
        let back = l.in_basis(&v).from_basis(&v);
        assert!(max_abs(&(back.matrix() - l.matrix())) < 1e-13);
        // ρ in the new basis is V† ρ V
        let rho = random_matrix(2, 6);
        let lhs = l.in_basis(&v).apply(&(v.adjoint() * &rho * &v));
        let rhs = v.adjoint() * l.apply(&rho) * &v;
        assert!(max_abs(&(lhs - rhs)) < 1e-13);
    }
}
