//! The correlation matrix of a bipartite state and everything derived from
//! it: the rank L, the diagonal representation rho = sum_i c_i S_i ⊗ F_i,
//! the L > d_min discord witness, the commutator criterion for zero discord,
//! and the rank theorem for product ensembles.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    self, gellmann_basis, hs_inner, rank_from_singular_values, svd_real, tensor_product,
    ComplexMatrix, HermitianBasis, RealMatrix, C64,
};
use crate::states::{DensityMatrix, ProductEnsemble};
use crate::tol;

/// Coefficient matrix R = (r_ij) of a state over orthonormal Hermitian
/// bases: r_ij = tr(rho (A_i ⊗ B_j)). Real for Hermitian inputs; an
/// imaginary residue above tolerance signals a corrupted state.
pub fn correlation_matrix(
    rho: &DensityMatrix,
    basis_a: &HermitianBasis,
    basis_b: &HermitianBasis,
) -> Result<RealMatrix> {
    if basis_a.dim() != rho.dim_a() || basis_b.dim() != rho.dim_b() {
        return Err(Error::DimensionMismatch(format!(
            "bases are for {}x{}, state factors are {}x{}",
            basis_a.dim(),
            basis_b.dim(),
            rho.dim_a(),
            rho.dim_b()
        )));
    }
    let na = basis_a.len();
    let nb = basis_b.len();
    let mut r = RealMatrix::zeros(na, nb);
    for i in 0..na {
        for j in 0..nb {
            let op = tensor_product(&basis_a.elements()[i], &basis_b.elements()[j]);
            let coeff = hs_inner(&op, rho.matrix());
            if coeff.im.abs() > tol::IMAG_RESIDUE {
                return Err(Error::InvalidState(format!(
                    "correlation coefficient ({i}, {j}) has imaginary residue {:.3e}",
                    coeff.im
                )));
            }
            r[(i, j)] = coeff.re;
        }
    }
    Ok(r)
}

/// The correlation matrix with its singular value decomposition, the
/// numerical rank L, and the operator pairs of the diagonal representation.
#[derive(Debug, Clone)]
pub struct CorrelationAnalysis {
    dim_a: usize,
    dim_b: usize,
    r_matrix: RealMatrix,
    singular_values: Vec<f64>,
    rank_l: usize,
    ops_a: Vec<ComplexMatrix>,
    ops_b: Vec<ComplexMatrix>,
}

impl CorrelationAnalysis {
    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn d_min(&self) -> usize {
        self.dim_a.min(self.dim_b)
    }

    pub fn r_matrix(&self) -> &RealMatrix {
        &self.r_matrix
    }

    /// Full non-increasing singular value list, including the discarded tail.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Rank L of the correlation matrix.
    pub fn rank_l(&self) -> usize {
        self.rank_l
    }

    /// Left operators S_i of the diagonal representation, i = 1..L.
    pub fn ops_a(&self) -> &[ComplexMatrix] {
        &self.ops_a
    }

    /// Right operators F_i of the diagonal representation, i = 1..L.
    pub fn ops_b(&self) -> &[ComplexMatrix] {
        &self.ops_b
    }

    /// Ratio c_L / c_{L+1} between the smallest kept and largest discarded
    /// singular value; `None` when nothing was discarded.
    pub fn sv_gap(&self) -> Option<f64> {
        if self.rank_l == 0 || self.rank_l >= self.singular_values.len() {
            return None;
        }
        let tail = self.singular_values[self.rank_l];
        if tail <= 0.0 {
            return None;
        }
        Some(self.singular_values[self.rank_l - 1] / tail)
    }

    /// Smallest kept singular value relative to the largest; the margin
    /// separating the state from the rank-deficient set. Zero-rank inputs
    /// report 0.
    pub fn relative_smallest_sv(&self) -> f64 {
        if self.rank_l == 0 {
            return 0.0;
        }
        self.singular_values[self.rank_l - 1] / self.singular_values[0]
    }

    /// Rebuilds sum_{i<=L} c_i S_i ⊗ F_i.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim_a * self.dim_b;
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..self.rank_l {
            out += tensor_product(&self.ops_a[i], &self.ops_b[i])
                * C64::new(self.singular_values[i], 0.0);
        }
        out
    }
}

/// Full correlation analysis in the Gell-Mann bases with the default rank
/// tolerance.
pub fn analyze(rho: &DensityMatrix) -> Result<CorrelationAnalysis> {
    analyze_with(rho, tol::RANK_REL)
}

/// Full correlation analysis with an explicit relative rank tolerance.
pub fn analyze_with(rho: &DensityMatrix, rank_rel_tol: f64) -> Result<CorrelationAnalysis> {
    let basis_a = gellmann_basis(rho.dim_a());
    let basis_b = gellmann_basis(rho.dim_b());
    analyze_in_bases(rho, &basis_a, &basis_b, rank_rel_tol)
}

/// Analysis over caller-supplied orthonormal Hermitian bases. The rank L is
/// basis independent; the operator pairs are not.
pub fn analyze_in_bases(
    rho: &DensityMatrix,
    basis_a: &HermitianBasis,
    basis_b: &HermitianBasis,
    rank_rel_tol: f64,
) -> Result<CorrelationAnalysis> {
    let r = correlation_matrix(rho, basis_a, basis_b)?;
    let svd = svd_real(&r);
    let rank_l = rank_from_singular_values(&svd.singular_values, rank_rel_tol);
    let mut ops_a = Vec::with_capacity(rank_l);
    let mut ops_b = Vec::with_capacity(rank_l);
    for i in 0..rank_l {
        let mut s = ComplexMatrix::zeros(rho.dim_a(), rho.dim_a());
        for j in 0..basis_a.len() {
            s += &basis_a.elements()[j] * C64::new(svd.u[(j, i)], 0.0);
        }
        ops_a.push(s);
        let mut f = ComplexMatrix::zeros(rho.dim_b(), rho.dim_b());
        for j in 0..basis_b.len() {
            f += &basis_b.elements()[j] * C64::new(svd.v[(j, i)], 0.0);
        }
        ops_b.push(f);
    }
    Ok(CorrelationAnalysis {
        dim_a: rho.dim_a(),
        dim_b: rho.dim_b(),
        r_matrix: r,
        singular_values: svd.singular_values,
        rank_l,
        ops_a,
        ops_b,
    })
}

/// Discord witness and commutator criterion, read off the diagonal
/// representation alone.
#[derive(Debug, Clone, Serialize)]
pub struct DiscordWitnessReport {
    pub rank_l: usize,
    pub d_min: usize,
    /// L > d_min: sufficient for nonzero discord.
    pub witness_fired: bool,
    /// Largest max-entry norm of [S_i, S_j] over pairs i, j <= L.
    pub max_commutator_a: f64,
    /// Largest max-entry norm of [F_i, F_j] over pairs i, j <= L.
    pub max_commutator_b: f64,
    /// Commutator criterion: discord w.r.t. A vanishes iff all S_i commute.
    pub zero_discord_a: bool,
    pub zero_discord_b: bool,
    /// c_L / c_{L+1}, the spectral margin of the rank decision.
    pub sv_gap: Option<f64>,
}

/// Largest max-entry norm of [M_i, M_j] over all pairs.
fn max_pairwise_commutator(ops: &[ComplexMatrix]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..ops.len() {
        for j in (i + 1)..ops.len() {
            let comm = &ops[i] * &ops[j] - &ops[j] * &ops[i];
            worst = worst.max(linalg::max_entry_norm(&comm));
        }
    }
    worst
}

pub fn witness_report(rho: &DensityMatrix) -> Result<DiscordWitnessReport> {
    Ok(witness_from_analysis(&analyze(rho)?))
}

pub fn witness_from_analysis(analysis: &CorrelationAnalysis) -> DiscordWitnessReport {
    let max_commutator_a = max_pairwise_commutator(analysis.ops_a());
    let max_commutator_b = max_pairwise_commutator(analysis.ops_b());
    DiscordWitnessReport {
        rank_l: analysis.rank_l(),
        d_min: analysis.d_min(),
        witness_fired: analysis.rank_l() > analysis.d_min(),
        max_commutator_a,
        max_commutator_b,
        zero_discord_a: max_commutator_a <= tol::COMMUTATOR,
        zero_discord_b: max_commutator_b <= tol::COMMUTATOR,
        sv_gap: analysis.sv_gap(),
    }
}

/// Outcome of the rank theorem check: L = s exactly when both factor
/// families are linearly independent.
#[derive(Debug, Clone, Serialize)]
pub struct EnsembleRankCheck {
    /// s when both sides are independent, otherwise the Gram-rank upper
    /// bound min(rank_A, rank_B).
    pub predicted_l: usize,
    pub measured_l: usize,
    pub independent_a: bool,
    pub independent_b: bool,
}

/// Gram matrix G_ij = tr(rho_i rho_j) of a family of Hermitian operators.
fn gram_matrix(ops: &[&ComplexMatrix]) -> RealMatrix {
    let s = ops.len();
    let mut g = RealMatrix::zeros(s, s);
    for i in 0..s {
        for j in i..s {
            let v = hs_inner(ops[i], ops[j]).re;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Tests linear independence of the ensemble's factor families via Gram
/// matrix ranks and compares the predicted rank with the measured L of the
/// assembled state.
pub fn ensemble_rank_theorem_check(ensemble: &ProductEnsemble) -> Result<EnsembleRankCheck> {
    let s = ensemble.len();
    let ops_a: Vec<_> = ensemble.terms().iter().map(|t| &t.state_a).collect();
    let ops_b: Vec<_> = ensemble.terms().iter().map(|t| &t.state_b).collect();
    let rank_a = linalg::numerical_rank(&gram_matrix(&ops_a), tol::RANK_REL);
    let rank_b = linalg::numerical_rank(&gram_matrix(&ops_b), tol::RANK_REL);
    let independent_a = rank_a == s;
    let independent_b = rank_b == s;
    let predicted_l = if independent_a && independent_b {
        s
    } else {
        rank_a.min(rank_b)
    };
    let measured_l = analyze(&ensemble.assemble())?.rank_l();
    Ok(EnsembleRankCheck {
        predicted_l,
        measured_l,
        independent_a,
        independent_b,
    })
}

/// One term of the reduced operator decomposition: rho_i^A paired with the
/// combined operator X_i^B = p_i rho_i^B + p_k x_i rho_k^B. The weight is
/// tr(X_i^B); when every dependence coefficient is positive the X_i^B are
/// unnormalized states and the decomposition is again a product ensemble.
#[derive(Debug, Clone)]
pub struct ReducedTerm {
    pub weight: f64,
    pub op_a: ComplexMatrix,
    pub op_b: ComplexMatrix,
}

/// Result of eliminating one linearly dependent A-factor from an ensemble.
#[derive(Debug, Clone)]
pub struct ReducedDecomposition {
    pub terms: Vec<ReducedTerm>,
    /// Index of the eliminated term in the original ensemble.
    pub eliminated: usize,
    /// Coefficients x_i expressing the eliminated factor over the kept ones,
    /// aligned with `terms`.
    pub coefficients: Vec<f64>,
    /// All x_i >= 0: sufficient for the reduced terms to form a valid
    /// (s-1)-term product ensemble after normalizing each X_i^B.
    pub all_coefficients_positive: bool,
}

impl ReducedDecomposition {
    /// sum_i op_a ⊗ op_b; equals the original assembled state.
    pub fn reassemble(&self) -> ComplexMatrix {
        let da = self.terms[0].op_a.nrows();
        let db = self.terms[0].op_b.nrows();
        let n = da * db;
        let mut out = ComplexMatrix::zeros(n, n);
        for t in &self.terms {
            out += tensor_product(&t.op_a, &t.op_b);
        }
        out
    }
}

/// Finds a linear dependence rho_k^A = sum_i x_i rho_i^A via the null space
/// of the A-side Gram matrix and rewrites the state with s-1 product-operator
/// terms. Errors when the factors are linearly independent.
pub fn reduce_dependent_ensemble(ensemble: &ProductEnsemble) -> Result<ReducedDecomposition> {
    let s = ensemble.len();
    let ops_a: Vec<_> = ensemble.terms().iter().map(|t| &t.state_a).collect();
    let gram = gram_matrix(&ops_a);
    let eig = gram.clone().symmetric_eigen();
    let (min_idx, &min_eig) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite eigenvalues"))
        .expect("non-empty spectrum");
    let max_eig = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    if min_eig > tol::RANK_REL * max_eig {
        return Err(Error::NoDependence);
    }
    let null = eig.eigenvectors.column(min_idx);

    // Pivot on the largest |n_k| for stability, then x_i = -n_i / n_k.
    let (pivot, _) = null
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).expect("finite entries"))
        .expect("non-empty null vector");
    let n_k = null[pivot];
    let p_k = ensemble.terms()[pivot].weight;
    let rho_k_b = &ensemble.terms()[pivot].state_b;

    let mut terms = Vec::with_capacity(s - 1);
    let mut coefficients = Vec::with_capacity(s - 1);
    for (i, term) in ensemble.terms().iter().enumerate() {
        if i == pivot {
            continue;
        }
        let x_i = -null[i] / n_k;
        let op_b =
            &term.state_b * C64::new(term.weight, 0.0) + rho_k_b * C64::new(p_k * x_i, 0.0);
        terms.push(ReducedTerm {
            weight: op_b.trace().re,
            op_a: term.state_a.clone(),
            op_b,
        });
        coefficients.push(x_i);
    }
    let all_coefficients_positive = coefficients.iter().all(|&x| x >= -1e-12);
    Ok(ReducedDecomposition {
        terms,
        eliminated: pivot,
        coefficients,
        all_coefficients_positive,
    })
}
