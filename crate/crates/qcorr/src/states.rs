//! Bipartite density matrices: construction, validation, serialization, and
//! random sampling.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format;
use crate::linalg::{
    self, basis_ket, cidentity, ginibre, projector, tensor_product, ComplexMatrix, ComplexVector,
    RealMatrix, Subsystem, C64,
};
use crate::tol;

/// Checks the density-matrix invariants on a raw matrix: Hermitian, unit
/// trace, positive semidefinite within tolerance.
pub fn validate_state(m: &ComplexMatrix, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidState(format!(
            "{what}: matrix is {}x{}, not square",
            m.nrows(),
            m.ncols()
        )));
    }
    let herm = linalg::hermiticity_residual(m);
    if herm > tol::HERMITIAN {
        return Err(Error::InvalidState(format!(
            "{what}: Hermiticity residual {herm:.3e} exceeds {:.0e}",
            tol::HERMITIAN
        )));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > tol::TRACE || tr.im.abs() > tol::TRACE {
        return Err(Error::InvalidState(format!(
            "{what}: trace is {tr}, expected 1"
        )));
    }
    let eigs = m.symmetric_eigenvalues();
    if let Some(bad) = eigs.iter().find(|&&l| l < tol::EIG_FLOOR) {
        return Err(Error::InvalidState(format!(
            "{what}: eigenvalue {bad:.3e} below the positivity floor"
        )));
    }
    Ok(())
}

/// A density matrix on a bipartite space with recorded factor dimensions.
///
/// Every constructor validates Hermiticity (1e-12), unit trace (1e-12), and
/// positivity (eigenvalue floor -1e-9).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim_a: usize,
    dim_b: usize,
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(dim_a: usize, dim_b: usize, mat: ComplexMatrix) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::InvalidInput("factor dimensions must be positive".into()));
        }
        let n = dim_a * dim_b;
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, expected {n}x{n} for factors {dim_a}x{dim_b}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        validate_state(&mat, "density matrix")?;
        Ok(DensityMatrix { dim_a, dim_b, mat })
    }

    /// Pure state |psi><psi| from a ket on the joint space.
    pub fn from_ket(dim_a: usize, dim_b: usize, ket: &ComplexVector) -> Result<Self> {
        let norm = ket.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("ket norm is {norm}, expected 1")));
        }
        Self::new(dim_a, dim_b, projector(ket))
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    /// min{d_A, d_B}, the classical upper bound on the correlation rank.
    pub fn d_min(&self) -> usize {
        self.dim_a.min(self.dim_b)
    }

    pub fn total_dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn subsystem_dim(&self, s: Subsystem) -> usize {
        match s {
            Subsystem::A => self.dim_a,
            Subsystem::B => self.dim_b,
        }
    }

    /// Reduced state after tracing out the given factor.
    pub fn partial_trace(&self, traced_out: Subsystem) -> ComplexMatrix {
        linalg::partial_trace(&self.mat, self.dim_a, self.dim_b, traced_out)
            .expect("dimensions validated at construction")
    }

    /// Reduced state on A.
    pub fn marginal_a(&self) -> ComplexMatrix {
        self.partial_trace(Subsystem::B)
    }

    /// Reduced state on B.
    pub fn marginal_b(&self) -> ComplexMatrix {
        self.partial_trace(Subsystem::A)
    }

    pub fn purity(&self) -> f64 {
        linalg::hs_inner(&self.mat, &self.mat).re
    }

    /// Classically correlated state sum_ij p_ij |a_i><a_i| ⊗ |b_j><b_j| for a
    /// joint distribution p and orthonormal ket lists.
    pub fn classical(
        probabilities: &RealMatrix,
        basis_a: &[ComplexVector],
        basis_b: &[ComplexVector],
    ) -> Result<Self> {
        let da = probabilities.nrows();
        let db = probabilities.ncols();
        if probabilities.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidInput("probabilities must be non-negative".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > tol::TRACE {
            return Err(Error::InvalidInput(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        check_orthonormal_kets(basis_a, da, "basis_a")?;
        check_orthonormal_kets(basis_b, db, "basis_b")?;
        let n = da * db;
        let mut mat = ComplexMatrix::zeros(n, n);
        for i in 0..da {
            let pa = projector(&basis_a[i]);
            for j in 0..db {
                let p = probabilities[(i, j)];
                if p == 0.0 {
                    continue;
                }
                let pb = projector(&basis_b[j]);
                mat += tensor_product(&pa, &pb) * C64::new(p, 0.0);
            }
        }
        Self::new(da, db, mat)
    }

    /// Classical state in the computational product basis.
    pub fn classical_computational(probabilities: &RealMatrix) -> Result<Self> {
        let da = probabilities.nrows();
        let db = probabilities.ncols();
        let basis_a: Vec<_> = (0..da).map(|i| basis_ket(da, i)).collect();
        let basis_b: Vec<_> = (0..db).map(|j| basis_ket(db, j)).collect();
        Self::classical(probabilities, &basis_a, &basis_b)
    }

    /// Werner-family state (1-z)/4 I + z|Psi><Psi| with the Bell state
    /// |Psi> = (|00> + |11>)/sqrt(2). Positive exactly for z in [-1/3, 1].
    pub fn werner(z: f64) -> Result<Self> {
        if !(-1.0 / 3.0..=1.0).contains(&z) {
            return Err(Error::InvalidInput(format!(
                "werner parameter z = {z} outside the positivity range [-1/3, 1]"
            )));
        }
        let mat = cidentity(4) * C64::new((1.0 - z) / 4.0, 0.0)
            + projector(&bell_ket()) * C64::new(z, 0.0);
        Self::new(2, 2, mat)
    }

    /// The Bell state |Psi><Psi| with |Psi> = (|00> + |11>)/sqrt(2).
    pub fn bell() -> Self {
        Self::new(2, 2, projector(&bell_ket())).expect("bell state is valid")
    }

    /// rho_L = (|00><00| + |+1><+1|)/2, the state produced locally from
    /// rho_C by the preparation map on subsystem A.
    pub fn rho_l() -> Self {
        let e00 = basis_ket(4, 0);
        let mut plus1 = ComplexVector::zeros(4);
        let inv = 1.0 / 2.0f64.sqrt();
        plus1[1] = C64::new(inv, 0.0); // |01>
        plus1[3] = C64::new(inv, 0.0); // |11>
        let mat = (projector(&e00) + projector(&plus1)) * C64::new(0.5, 0.0);
        Self::new(2, 2, mat).expect("rho_L is valid")
    }

    /// rho_C = (|00><00| + |11><11|)/2, the classical two-qubit seed.
    pub fn rho_c() -> Self {
        let mat = (projector(&basis_ket(4, 0)) + projector(&basis_ket(4, 3))) * C64::new(0.5, 0.0);
        Self::new(2, 2, mat).expect("rho_C is valid")
    }

    /// Pure Schmidt-rank-2 state (|00> + |11>)/sqrt(2) on C^dim ⊗ C^dim.
    pub fn schmidt_rank2(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidInput("schmidt_rank2 requires dim >= 2".into()));
        }
        let inv = 1.0 / 2.0f64.sqrt();
        let mut ket = ComplexVector::zeros(dim * dim);
        ket[0] = C64::new(inv, 0.0);
        ket[dim + 1] = C64::new(inv, 0.0);
        Self::new(dim, dim, projector(&ket))
    }

    /// Hilbert-Schmidt-random state: GG†/tr(GG†) for a Ginibre matrix G.
    /// Deterministic per seed.
    pub fn random(dim_a: usize, dim_b: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(dim_a, dim_b, &mut rng)
    }

    /// Hilbert-Schmidt-random state drawn from a caller-supplied generator.
    pub fn random_with(dim_a: usize, dim_b: usize, rng: &mut impl Rng) -> Self {
        let mat = random_state_matrix(dim_a * dim_b, rng);
        Self::new(dim_a, dim_b, mat).expect("Ginibre construction yields a valid state")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = StateFile {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            matrix: format::matrix_to_rows(&self.mat),
        };
        fs::write(path, format::to_json_full_precision(&file)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = StateFile {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            matrix: format::matrix_to_rows(&self.mat),
        };
        format::to_json_full_precision(&file)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: StateFile = serde_json::from_str(text)?;
        let mat = format::rows_to_matrix(&file.matrix)?;
        Self::new(file.dim_a, file.dim_b, mat)
    }
}

/// Unnormalized-state sampling shared by ensembles and channel tests:
/// GG†/tr(GG†) on a single `dim`-dimensional system.
pub fn random_state_matrix(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ginibre(dim, dim, rng);
    let mut m = &g * g.adjoint();
    let tr = m.trace().re;
    m /= C64::new(tr, 0.0);
    // Symmetrize away the last bits of rounding so validation is exact.
    let herm = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    herm
}

fn bell_ket() -> ComplexVector {
    let inv = 1.0 / 2.0f64.sqrt();
    let mut ket = ComplexVector::zeros(4);
    ket[0] = C64::new(inv, 0.0);
    ket[3] = C64::new(inv, 0.0);
    ket
}

fn check_orthonormal_kets(kets: &[ComplexVector], dim: usize, what: &str) -> Result<()> {
    if kets.len() != dim {
        return Err(Error::InvalidInput(format!(
            "{what}: expected {dim} kets, got {}",
            kets.len()
        )));
    }
    for (i, k) in kets.iter().enumerate() {
        if k.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{what}: ket {i} has length {}, expected {dim}",
                k.len()
            )));
        }
    }
    for i in 0..kets.len() {
        for j in i..kets.len() {
            let g = kets[i].dotc(&kets[j]);
            let expected = if i == j { 1.0 } else { 0.0 };
            if (g.re - expected).abs() > tol::HERMITIAN || g.im.abs() > tol::HERMITIAN {
                return Err(Error::InvalidInput(format!(
                    "{what}: kets {i}, {j} are not orthonormal (<i|j> = {g})"
                )));
            }
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct StateFile {
    dim_a: usize,
    dim_b: usize,
    matrix: Vec<Vec<[f64; 2]>>,
}

/// One term of a separable decomposition: weight and the two factor states.
#[derive(Debug, Clone)]
pub struct EnsembleTerm {
    pub weight: f64,
    pub state_a: ComplexMatrix,
    pub state_b: ComplexMatrix,
}

/// A convex decomposition {p_i, rho_i^A, rho_i^B} of a separable state. The
/// term count s upper-bounds the correlation rank L.
#[derive(Debug, Clone)]
pub struct ProductEnsemble {
    terms: Vec<EnsembleTerm>,
}

impl ProductEnsemble {
    pub fn new(terms: Vec<EnsembleTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidInput("ensemble needs at least one term".into()));
        }
        let da = terms[0].state_a.nrows();
        let db = terms[0].state_b.nrows();
        let total: f64 = terms.iter().map(|t| t.weight).sum();
        if (total - 1.0).abs() > tol::TRACE {
            return Err(Error::InvalidInput(format!(
                "ensemble weights sum to {total}, expected 1"
            )));
        }
        for (i, t) in terms.iter().enumerate() {
            if t.weight <= 0.0 || t.weight > 1.0 {
                return Err(Error::InvalidInput(format!(
                    "term {i} has weight {} outside (0, 1]",
                    t.weight
                )));
            }
            if t.state_a.nrows() != da || t.state_b.nrows() != db {
                return Err(Error::DimensionMismatch(format!(
                    "term {i} factor dimensions differ from the first term"
                )));
            }
            validate_state(&t.state_a, &format!("ensemble term {i}, factor A"))?;
            validate_state(&t.state_b, &format!("ensemble term {i}, factor B"))?;
        }
        Ok(ProductEnsemble { terms })
    }

    pub fn terms(&self) -> &[EnsembleTerm] {
        &self.terms
    }

    /// Number of product terms s.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn dim_a(&self) -> usize {
        self.terms[0].state_a.nrows()
    }

    pub fn dim_b(&self) -> usize {
        self.terms[0].state_b.nrows()
    }

    pub fn d_min(&self) -> usize {
        self.dim_a().min(self.dim_b())
    }

    /// The represented state sum_i p_i rho_i^A ⊗ rho_i^B.
    pub fn assemble(&self) -> DensityMatrix {
        let n = self.dim_a() * self.dim_b();
        let mut mat = ComplexMatrix::zeros(n, n);
        for t in &self.terms {
            mat += tensor_product(&t.state_a, &t.state_b) * C64::new(t.weight, 0.0);
        }
        DensityMatrix::new(self.dim_a(), self.dim_b(), mat)
            .expect("convex mixture of product states is a valid state")
    }

    /// Random ensemble: Dirichlet(1) weights, independent Hilbert-Schmidt
    /// factor states. Deterministic per seed.
    pub fn random(dim_a: usize, dim_b: usize, s: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(dim_a, dim_b, s, &mut rng)
    }

    /// Random ensemble from a caller-supplied generator.
    pub fn random_with(dim_a: usize, dim_b: usize, s: usize, rng: &mut impl Rng) -> Result<Self> {
        if s == 0 {
            return Err(Error::InvalidInput("ensemble needs at least one term".into()));
        }
        // Symmetric Dirichlet(1) = normalized Exp(1) draws, uniform on the simplex.
        let raw: Vec<f64> = (0..s).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let terms = weights
            .into_iter()
            .map(|weight| EnsembleTerm {
                weight,
                state_a: random_state_matrix(dim_a, rng),
                state_b: random_state_matrix(dim_b, rng),
            })
            .collect();
        Self::new(terms)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = EnsembleFile {
            dim_a: self.dim_a(),
            dim_b: self.dim_b(),
            terms: self
                .terms
                .iter()
                .map(|t| EnsembleTermFile {
                    weight: t.weight,
                    state_a: format::matrix_to_rows(&t.state_a),
                    state_b: format::matrix_to_rows(&t.state_b),
                })
                .collect(),
        };
        format::to_json_full_precision(&file)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: EnsembleFile = serde_json::from_str(text)?;
        let terms = file
            .terms
            .iter()
            .map(|t| {
                Ok(EnsembleTerm {
                    weight: t.weight,
                    state_a: format::rows_to_matrix(&t.state_a)?,
                    state_b: format::rows_to_matrix(&t.state_b)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let ens = Self::new(terms)?;
        if ens.dim_a() != file.dim_a || ens.dim_b() != file.dim_b {
            return Err(Error::DimensionMismatch(format!(
                "ensemble file declares dims {}x{} but factors are {}x{}",
                file.dim_a,
                file.dim_b,
                ens.dim_a(),
                ens.dim_b()
            )));
        }
        Ok(ens)
    }
}

#[derive(Serialize, Deserialize)]
struct EnsembleFile {
    dim_a: usize,
    dim_b: usize,
    terms: Vec<EnsembleTermFile>,
}

#[derive(Serialize, Deserialize)]
struct EnsembleTermFile {
    weight: f64,
    state_a: Vec<Vec<[f64; 2]>>,
    state_b: Vec<Vec<[f64; 2]>>,
}
