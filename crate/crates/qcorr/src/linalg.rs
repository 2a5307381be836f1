//! Dense complex linear algebra and operator-space utilities.
//!
//! Everything else in the crate builds on this module: tensor products,
//! partial traces, Hermitian eigendecomposition, von Neumann entropy,
//! orthonormal Hermitian operator bases, and SVD-based numerical rank.
//! All operations are pure functions on immutable values.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;
pub type RealMatrix = DMatrix<f64>;

/// One of the two factors of a bipartite system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Subsystem {
    A,
    B,
}

impl Subsystem {
    pub fn other(self) -> Subsystem {
        match self {
            Subsystem::A => Subsystem::B,
            Subsystem::B => Subsystem::A,
        }
    }
}

impl std::fmt::Display for Subsystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Subsystem::A => write!(f, "A"),
            Subsystem::B => write!(f, "B"),
        }
    }
}

impl std::str::FromStr for Subsystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Subsystem::A),
            "B" | "b" => Ok(Subsystem::B),
            _ => Err(Error::InvalidInput(format!(
                "subsystem must be A or B, got {s:?}"
            ))),
        }
    }
}

/// Kronecker product `a ⊗ b`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Complex identity matrix.
pub fn cidentity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

/// Computational basis ket |i>.
pub fn basis_ket(dim: usize, i: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(dim);
    v[i] = C64::new(1.0, 0.0);
    v
}

/// Rank-one projector |v><v| (the ket is not normalized here).
pub fn projector(v: &ComplexVector) -> ComplexMatrix {
    v * v.adjoint()
}

/// Hilbert-Schmidt inner product tr(A†B).
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(C64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

/// Largest entrywise |M - M†|.
pub fn hermiticity_residual(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    if n != m.ncols() {
        return f64::INFINITY;
    }
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entry magnitude.
pub fn max_entry_norm(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry magnitude of a real matrix.
pub fn max_entry_norm_real(m: &RealMatrix) -> f64 {
    m.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix (checked), in no particular order.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let res = hermiticity_residual(m);
    if res > tol::IMAG_RESIDUE {
        return Err(Error::InvalidInput(format!(
            "matrix is not Hermitian (residual {res:.3e})"
        )));
    }
    Ok(m.symmetric_eigenvalues().iter().copied().collect())
}

/// Eigendecomposition of a Hermitian matrix: (eigenvalues, eigenvectors as
/// columns). Uses the symmetric-specific solver so eigenvalues are real and
/// eigenvectors orthonormal.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let res = hermiticity_residual(m);
    if res > tol::IMAG_RESIDUE {
        return Err(Error::InvalidInput(format!(
            "matrix is not Hermitian (residual {res:.3e})"
        )));
    }
    let eig = m.clone().symmetric_eigen();
    Ok((eig.eigenvalues.iter().copied().collect(), eig.eigenvectors))
}

/// Trace over one factor of a matrix on a `dim_a * dim_b` bipartite space;
/// returns the operator on the remaining factor. Row/column index layout is
/// `(a, b) -> a * dim_b + b`.
pub fn partial_trace(
    m: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    traced_out: Subsystem,
) -> Result<ComplexMatrix> {
    let n = dim_a * dim_b;
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, expected {n}x{n} for factors {dim_a}x{dim_b}",
            m.nrows(),
            m.ncols()
        )));
    }
    match traced_out {
        Subsystem::B => {
            let mut out = ComplexMatrix::zeros(dim_a, dim_a);
            for a in 0..dim_a {
                for a2 in 0..dim_a {
                    let mut acc = C64::new(0.0, 0.0);
                    for b in 0..dim_b {
                        acc += m[(a * dim_b + b, a2 * dim_b + b)];
                    }
                    out[(a, a2)] = acc;
                }
            }
            Ok(out)
        }
        Subsystem::A => {
            let mut out = ComplexMatrix::zeros(dim_b, dim_b);
            for b in 0..dim_b {
                for b2 in 0..dim_b {
                    let mut acc = C64::new(0.0, 0.0);
                    for a in 0..dim_a {
                        acc += m[(a * dim_b + b, a * dim_b + b2)];
                    }
                    out[(b, b2)] = acc;
                }
            }
            Ok(out)
        }
    }
}

/// Shannon entropy (base 2) of a spectrum, with 0*log(0) := 0.
pub fn entropy_of_spectrum(eigs: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = 0.0;
    for l in eigs {
        if l > tol::PROB_FLOOR {
            s -= l * l.log2();
        }
    }
    s
}

/// Von Neumann entropy in bits, -tr(m log2 m), via the Hermitian
/// eigendecomposition. An eigenvalue below the positivity floor signals a
/// non-state input and is reported as an error.
pub fn von_neumann_entropy(m: &ComplexMatrix) -> Result<f64> {
    let eigs = hermitian_eigenvalues(m)?;
    if let Some(bad) = eigs.iter().find(|&&l| l < tol::EIG_FLOOR) {
        return Err(Error::InvalidState(format!(
            "eigenvalue {bad:.3e} below the positivity floor"
        )));
    }
    Ok(entropy_of_spectrum(eigs))
}

/// An orthonormal basis of Hermitian operators under the Hilbert-Schmidt
/// inner product: tr(E_i E_j) = delta_ij, spanning the full operator space.
#[derive(Debug, Clone)]
pub struct HermitianBasis {
    dim: usize,
    elements: Vec<ComplexMatrix>,
}

impl HermitianBasis {
    /// Wraps a caller-supplied basis after checking Hermiticity,
    /// orthonormality, and completeness (d² elements).
    pub fn new(dim: usize, elements: Vec<ComplexMatrix>) -> Result<Self> {
        if elements.len() != dim * dim {
            return Err(Error::InvalidInput(format!(
                "expected {} basis elements for dimension {dim}, got {}",
                dim * dim,
                elements.len()
            )));
        }
        for (i, e) in elements.iter().enumerate() {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "basis element {i} is {}x{}, expected {dim}x{dim}",
                    e.nrows(),
                    e.ncols()
                )));
            }
            if hermiticity_residual(e) > tol::HERMITIAN {
                return Err(Error::InvalidInput(format!(
                    "basis element {i} is not Hermitian"
                )));
            }
        }
        for i in 0..elements.len() {
            for j in i..elements.len() {
                let g = hs_inner(&elements[i], &elements[j]);
                let expected = if i == j { 1.0 } else { 0.0 };
                if (g.re - expected).abs() > 1e-10 || g.im.abs() > 1e-10 {
                    return Err(Error::InvalidInput(format!(
                        "basis not orthonormal: tr(E_{i} E_{j}) = {g}"
                    )));
                }
            }
        }
        Ok(HermitianBasis { dim, elements })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    /// Expansion coefficients tr(M E_i) of a Hermitian matrix; real because
    /// both operands are Hermitian.
    pub fn coefficients(&self, m: &ComplexMatrix) -> Vec<f64> {
        self.elements.iter().map(|e| hs_inner(e, m).re).collect()
    }

    /// Rebuilds sum_i c_i E_i.
    pub fn reconstruct(&self, coeffs: &[f64]) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for (c, e) in coeffs.iter().zip(&self.elements) {
            out += e * C64::new(*c, 0.0);
        }
        out
    }

    /// New basis E'_i = sum_j O_ji E_j for an orthogonal matrix O; stays
    /// orthonormal and Hermitian.
    pub fn rotate(&self, orthogonal: &RealMatrix) -> Result<HermitianBasis> {
        let n = self.elements.len();
        if orthogonal.nrows() != n || orthogonal.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "rotation is {}x{}, expected {n}x{n}",
                orthogonal.nrows(),
                orthogonal.ncols()
            )));
        }
        let mut elements = Vec::with_capacity(n);
        for i in 0..n {
            let mut e = ComplexMatrix::zeros(self.dim, self.dim);
            for j in 0..n {
                e += &self.elements[j] * C64::new(orthogonal[(j, i)], 0.0);
            }
            elements.push(e);
        }
        HermitianBasis::new(self.dim, elements)
    }
}

/// Generalized Gell-Mann basis for dimension `dim`, Hilbert-Schmidt
/// orthonormalized. Element 0 is I/sqrt(d); the rest are traceless
/// (symmetric, antisymmetric, then diagonal families). For dim = 2 this is
/// the normalized Pauli basis {I, X, Y, Z}/sqrt(2).
pub fn gellmann_basis(dim: usize) -> HermitianBasis {
    assert!(dim >= 1, "gellmann_basis requires dim >= 1");
    let inv = 1.0 / 2.0f64.sqrt();
    let mut elements = Vec::with_capacity(dim * dim);

    let mut id = cidentity(dim);
    id /= C64::new((dim as f64).sqrt(), 0.0);
    elements.push(id);

    for j in 0..dim {
        for k in (j + 1)..dim {
            let mut e = ComplexMatrix::zeros(dim, dim);
            e[(j, k)] = C64::new(inv, 0.0);
            e[(k, j)] = C64::new(inv, 0.0);
            elements.push(e);
        }
    }
    for j in 0..dim {
        for k in (j + 1)..dim {
            let mut e = ComplexMatrix::zeros(dim, dim);
            e[(j, k)] = C64::new(0.0, -inv);
            e[(k, j)] = C64::new(0.0, inv);
            elements.push(e);
        }
    }
    for l in 1..dim {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut e = ComplexMatrix::zeros(dim, dim);
        for j in 0..l {
            e[(j, j)] = C64::new(norm, 0.0);
        }
        e[(l, l)] = C64::new(-(l as f64) * norm, 0.0);
        elements.push(e);
    }

    HermitianBasis { dim, elements }
}

/// Singular value decomposition of a real matrix, M = U diag(σ) Vᵀ with the
/// singular values in non-increasing order.
#[derive(Debug, Clone)]
pub struct SingularDecomposition {
    pub singular_values: Vec<f64>,
    pub u: RealMatrix,
    pub v: RealMatrix,
}

impl SingularDecomposition {
    pub fn reconstruct(&self) -> RealMatrix {
        let sigma = RealMatrix::from_diagonal(&DVector::from_vec(self.singular_values.clone()));
        &self.u * sigma * self.v.transpose()
    }
}

/// Thin SVD of a real matrix.
pub fn svd_real(m: &RealMatrix) -> SingularDecomposition {
    let svd = m.clone().svd(true, true);
    SingularDecomposition {
        singular_values: svd.singular_values.iter().copied().collect(),
        u: svd.u.expect("svd computed with u"),
        v: svd.v_t.expect("svd computed with v").transpose(),
    }
}

/// Count of singular values above `rel_tol` times the largest one. Zero for
/// the zero matrix.
pub fn rank_from_singular_values(singular_values: &[f64], rel_tol: f64) -> usize {
    assert!(
        rel_tol > 0.0 && rel_tol < 1.0,
        "rank tolerance must lie in (0,1)"
    );
    let max = singular_values.iter().copied().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return 0;
    }
    singular_values.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Numerical rank of a real matrix: singular values above `rel_tol * σ_max`.
pub fn numerical_rank(m: &RealMatrix, rel_tol: f64) -> usize {
    let svals = m.clone().singular_values();
    rank_from_singular_values(svals.as_slice(), rel_tol)
}

/// Ginibre matrix: independent standard complex Gaussian entries, drawn in
/// row-major order (real part first).
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            m[(i, j)] = C64::new(re, im);
        }
    }
    m
}

/// Haar-distributed random unitary via QR of a Ginibre matrix with the
/// phase-fixing diagonal correction.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ginibre(dim, dim, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / C64::new(d.norm(), 0.0)
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random real orthogonal matrix via QR of a Gaussian matrix.
pub fn random_orthogonal(dim: usize, rng: &mut impl Rng) -> RealMatrix {
    let mut g = RealMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            g[(i, j)] = rng.sample(StandardNormal);
        }
    }
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            for i in 0..dim {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}
