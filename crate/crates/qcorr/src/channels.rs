//! CPTP channels as Kraus-operator lists, local application to bipartite
//! states, the preparation construction that turns a diagonal classical seed
//! into an arbitrary convex sum of at most d_min product states, and the
//! monotonicity harness showing the correlation rank never grows under local
//! operations.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation;
use crate::error::{Error, Result};
use crate::format;
use crate::linalg::{
    self, basis_ket, cidentity, ginibre, projector, tensor_product, ComplexMatrix, ComplexVector,
    RealMatrix, Subsystem, C64,
};
use crate::states::{DensityMatrix, EnsembleTerm, ProductEnsemble};
use crate::tol;

/// A completely positive map in Kraus form. Trace preserving unless the
/// `trace_decreasing` flag was set at construction, in which case
/// sum K†K <= I is enforced instead and renormalization is the caller's
/// business.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
    trace_decreasing: bool,
}

impl QuantumChannel {
    /// Trace-preserving channel: sum K†K = I within 1e-10.
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        Self::build(kraus, false)
    }

    /// Trace-decreasing map (e.g. one branch of a selective measurement):
    /// sum K†K <= I within 1e-10.
    pub fn new_trace_decreasing(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        Self::build(kraus, true)
    }

    fn build(kraus: Vec<ComplexMatrix>, trace_decreasing: bool) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidChannel("empty Kraus list".into()));
        }
        let dim_out = kraus[0].nrows();
        let dim_in = kraus[0].ncols();
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidChannel("zero-dimensional Kraus operator".into()));
        }
        for (i, k) in kraus.iter().enumerate() {
            if k.nrows() != dim_out || k.ncols() != dim_in {
                return Err(Error::InvalidChannel(format!(
                    "Kraus operator {i} is {}x{}, expected {dim_out}x{dim_in}",
                    k.nrows(),
                    k.ncols()
                )));
            }
        }
        let mut completeness = ComplexMatrix::zeros(dim_in, dim_in);
        for k in &kraus {
            completeness += k.adjoint() * k;
        }
        let gap = &completeness - cidentity(dim_in);
        if trace_decreasing {
            // I - sum K†K must be positive semidefinite
            let deficit = -gap;
            let eigs = deficit.symmetric_eigenvalues();
            if let Some(bad) = eigs.iter().find(|&&l| l < -tol::KRAUS_COMPLETENESS) {
                return Err(Error::InvalidChannel(format!(
                    "sum K†K exceeds the identity (eigenvalue excess {:.3e})",
                    -bad
                )));
            }
        } else {
            let residual = linalg::max_entry_norm(&gap);
            if residual > tol::KRAUS_COMPLETENESS {
                return Err(Error::InvalidChannel(format!(
                    "completeness residual {residual:.3e} exceeds {:.0e}",
                    tol::KRAUS_COMPLETENESS
                )));
            }
        }
        Ok(QuantumChannel {
            dim_in,
            dim_out,
            kraus,
            trace_decreasing,
        })
    }

    /// The identity channel on `dim`.
    pub fn identity(dim: usize) -> Self {
        QuantumChannel {
            dim_in: dim,
            dim_out: dim,
            kraus: vec![cidentity(dim)],
            trace_decreasing: false,
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn is_trace_decreasing(&self) -> bool {
        self.trace_decreasing
    }

    /// sum_k K m K†.
    pub fn apply(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.nrows() != self.dim_in || m.ncols() != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{}, channel input is {}",
                m.nrows(),
                m.ncols(),
                self.dim_in
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * m * k.adjoint();
        }
        Ok(out)
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
        let file = ChannelFile {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            trace_decreasing: self.trace_decreasing,
            kraus: self.kraus.iter().map(format::matrix_to_rows).collect(),
        };
        format::to_json_full_precision(&file)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ChannelFile = serde_json::from_str(text)?;
        let kraus = file
            .kraus
            .iter()
            .map(|rows| format::rows_to_matrix(rows))
            .collect::<Result<Vec<_>>>()?;
        let channel = Self::build(kraus, file.trace_decreasing)?;
        if channel.dim_in != file.dim_in || channel.dim_out != file.dim_out {
            return Err(Error::DimensionMismatch(format!(
                "channel file declares {}->{}, Kraus operators are {}->{}",
                file.dim_in, file.dim_out, channel.dim_in, channel.dim_out
            )));
        }
        Ok(channel)
    }
}

#[derive(Serialize, Deserialize)]
struct ChannelFile {
    dim_in: usize,
    dim_out: usize,
    #[serde(default)]
    trace_decreasing: bool,
    kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

/// (Phi_A ⊗ Phi_B)(rho) as a raw matrix, via the lifted Kraus operators
/// K_A ⊗ K_B. `None` stands for the identity on that side. Performs no
/// state validation, so trace-decreasing maps can be applied and
/// renormalized by the caller.
pub fn apply_local_matrix(
    channel_a: Option<&QuantumChannel>,
    channel_b: Option<&QuantumChannel>,
    rho: &DensityMatrix,
) -> Result<ComplexMatrix> {
    if let Some(a) = channel_a {
        if a.dim_in() != rho.dim_a() {
            return Err(Error::DimensionMismatch(format!(
                "channel A input {} does not match factor dimension {}",
                a.dim_in(),
                rho.dim_a()
            )));
        }
    }
    if let Some(b) = channel_b {
        if b.dim_in() != rho.dim_b() {
            return Err(Error::DimensionMismatch(format!(
                "channel B input {} does not match factor dimension {}",
                b.dim_in(),
                rho.dim_b()
            )));
        }
    }
    let ident_a;
    let kraus_a: &[ComplexMatrix] = match channel_a {
        Some(c) => c.kraus(),
        None => {
            ident_a = [cidentity(rho.dim_a())];
            &ident_a
        }
    };
    let ident_b;
    let kraus_b: &[ComplexMatrix] = match channel_b {
        Some(c) => c.kraus(),
        None => {
            ident_b = [cidentity(rho.dim_b())];
            &ident_b
        }
    };
    let out_a = channel_a.map_or(rho.dim_a(), |c| c.dim_out());
    let out_b = channel_b.map_or(rho.dim_b(), |c| c.dim_out());
    let n = out_a * out_b;
    let mut out = ComplexMatrix::zeros(n, n);
    for ka in kraus_a {
        for kb in kraus_b {
            let lifted = tensor_product(ka, kb);
            out += &lifted * rho.matrix() * lifted.adjoint();
        }
    }
    Ok(out)
}

/// (Phi_A ⊗ Phi_B)(rho) as a validated state with the channels' output
/// dimensions.
pub fn apply_local(
    channel_a: Option<&QuantumChannel>,
    channel_b: Option<&QuantumChannel>,
    rho: &DensityMatrix,
) -> Result<DensityMatrix> {
    let out = apply_local_matrix(channel_a, channel_b, rho)?;
    let out_a = channel_a.map_or(rho.dim_a(), |c| c.dim_out());
    let out_b = channel_b.map_or(rho.dim_b(), |c| c.dim_out());
    DensityMatrix::new(out_a, out_b, out)
}

/// The paper-construction preparation channel: Kraus operators
/// K_ij = sqrt(w_j^i) |Psi_j^i><i| built from the spectral decompositions
/// rho_i = sum_j w_j^i |Psi_j^i><Psi_j^i|, so the channel maps |i><i| to the
/// i-th target state. Requires one target per source ket and a complete
/// orthonormal source basis, which makes the map trace preserving by
/// construction.
pub fn state_preparation_channel(
    targets: &[ComplexMatrix],
    source_basis: &[ComplexVector],
) -> Result<QuantumChannel> {
    if targets.is_empty() {
        return Err(Error::InvalidInput("no target states given".into()));
    }
    let dim_in = source_basis.len();
    if targets.len() != dim_in {
        return Err(Error::InvalidInput(format!(
            "{} targets for {} source kets; need one target per source direction",
            targets.len(),
            dim_in
        )));
    }
    for (i, k) in source_basis.iter().enumerate() {
        if k.len() != dim_in {
            return Err(Error::DimensionMismatch(format!(
                "source ket {i} has length {}, expected {dim_in}",
                k.len()
            )));
        }
    }
    for i in 0..dim_in {
        for j in i..dim_in {
            let g = source_basis[i].dotc(&source_basis[j]);
            let expected = if i == j { 1.0 } else { 0.0 };
            if (g.re - expected).abs() > tol::HERMITIAN || g.im.abs() > tol::HERMITIAN {
                return Err(Error::InvalidInput(format!(
                    "source kets {i}, {j} are not orthonormal"
                )));
            }
        }
    }
    let dim_out = targets[0].nrows();
    for (i, t) in targets.iter().enumerate() {
        if t.nrows() != dim_out || t.ncols() != dim_out {
            return Err(Error::DimensionMismatch(format!(
                "target {i} is {}x{}, expected {dim_out}x{dim_out}",
                t.nrows(),
                t.ncols()
            )));
        }
        crate::states::validate_state(t, &format!("preparation target {i}"))?;
    }

    let mut kraus = Vec::new();
    for (i, target) in targets.iter().enumerate() {
        let (eigs, vecs) = linalg::hermitian_eigen(target)?;
        let bra = source_basis[i].adjoint();
        for (j, &w) in eigs.iter().enumerate() {
            if w <= tol::PROB_FLOOR {
                continue;
            }
            let ket = vecs.column(j).into_owned();
            kraus.push(ket * &bra * C64::new(w.sqrt(), 0.0));
        }
    }
    QuantumChannel::new(kraus)
}

/// Seed state and local channels realizing a target ensemble.
#[derive(Debug, Clone)]
pub struct LocalCreation {
    /// The diagonal classical seed sum_i p_i |i><i| ⊗ |i><i|.
    pub seed: DensityMatrix,
    pub channel_a: QuantumChannel,
    pub channel_b: QuantumChannel,
}

impl LocalCreation {
    /// (Phi_A ⊗ Phi_B)(seed); equals the assembled target within tolerance.
    pub fn output(&self) -> Result<DensityMatrix> {
        apply_local(Some(&self.channel_a), Some(&self.channel_b), &self.seed)
    }
}

/// Builds the classical seed and the two preparation channels whose local
/// application produces the target ensemble's state. Only ensembles with at
/// most d_min terms are reachable this way; larger ones are rejected.
pub fn synthesize_local_creation(target: &ProductEnsemble) -> Result<LocalCreation> {
    let s = target.len();
    let (da, db) = (target.dim_a(), target.dim_b());
    let d_min = da.min(db);
    if s > d_min {
        return Err(Error::NotLocallyProducible(format!(
            "{s} product terms exceed the classical bound d_min = {d_min}"
        )));
    }

    let mut probs = RealMatrix::zeros(da, db);
    for (i, term) in target.terms().iter().enumerate() {
        probs[(i, i)] = term.weight;
    }
    let seed = DensityMatrix::classical_computational(&probs)?;

    // Unused source directions (index >= s) carry no seed weight; pad the
    // target lists with the maximally mixed state.
    let pad_a = cidentity(da) / C64::new(da as f64, 0.0);
    let targets_a: Vec<ComplexMatrix> = (0..da)
        .map(|i| {
            target
                .terms()
                .get(i)
                .map_or_else(|| pad_a.clone(), |t| t.state_a.clone())
        })
        .collect();
    let pad_b = cidentity(db) / C64::new(db as f64, 0.0);
    let targets_b: Vec<ComplexMatrix> = (0..db)
        .map(|i| {
            target
                .terms()
                .get(i)
                .map_or_else(|| pad_b.clone(), |t| t.state_b.clone())
        })
        .collect();

    let source_a: Vec<ComplexVector> = (0..da).map(|i| basis_ket(da, i)).collect();
    let source_b: Vec<ComplexVector> = (0..db).map(|i| basis_ket(db, i)).collect();
    Ok(LocalCreation {
        seed,
        channel_a: state_preparation_channel(&targets_a, &source_a)?,
        channel_b: state_preparation_channel(&targets_b, &source_b)?,
    })
}

/// Rewrites a general classical joint distribution in the row form
/// sum_i p_i |i><i| ⊗ rho_i^B with p_i rho_i^B = sum_j p_ij |j><j|,
/// dropping zero-probability rows.
pub fn reduce_classical(probabilities: &RealMatrix) -> Result<ProductEnsemble> {
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
    let mut terms = Vec::new();
    for i in 0..da {
        let row_sum: f64 = (0..db).map(|j| probabilities[(i, j)]).sum();
        if row_sum <= tol::PROB_FLOOR {
            continue;
        }
        let mut state_b = ComplexMatrix::zeros(db, db);
        for j in 0..db {
            state_b[(j, j)] = C64::new(probabilities[(i, j)] / row_sum, 0.0);
        }
        terms.push(EnsembleTerm {
            weight: row_sum,
            state_a: projector(&basis_ket(da, i)),
            state_b,
        });
    }
    ProductEnsemble::new(terms)
}

/// Before/after ranks for one local-operation trial.
#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityTrial {
    pub l_before: usize,
    pub l_after: usize,
    /// l_after <= l_before, the monotonicity property under test.
    pub ok: bool,
}

/// Applies a channel to one side and compares correlation ranks.
pub fn l_monotonicity_trial(
    rho: &DensityMatrix,
    channel: &QuantumChannel,
    side: Subsystem,
) -> Result<MonotonicityTrial> {
    let l_before = correlation::analyze(rho)?.rank_l();
    let after = match side {
        Subsystem::A => apply_local(Some(channel), None, rho)?,
        Subsystem::B => apply_local(None, Some(channel), rho)?,
    };
    let l_after = correlation::analyze(&after)?.rank_l();
    Ok(MonotonicityTrial {
        l_before,
        l_after,
        ok: l_after <= l_before,
    })
}

/// Haar-style random channel: orthonormalize the columns of a tall Ginibre
/// block matrix into an isometry and slice it into Kraus operators, so
/// completeness holds by construction.
pub fn random_channel(dim: usize, kraus_count: usize, seed: u64) -> Result<QuantumChannel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_channel_with(dim, kraus_count, &mut rng)
}

/// Random channel from a caller-supplied generator.
pub fn random_channel_with(
    dim: usize,
    kraus_count: usize,
    rng: &mut impl Rng,
) -> Result<QuantumChannel> {
    if kraus_count == 0 || kraus_count > dim * dim {
        return Err(Error::InvalidInput(format!(
            "kraus_count must lie in 1..={}, got {kraus_count}",
            dim * dim
        )));
    }
    let g = ginibre(dim * kraus_count, dim, rng);
    let q = g.qr().q();
    let kraus = (0..kraus_count)
        .map(|i| q.rows(i * dim, dim).into_owned())
        .collect();
    QuantumChannel::new(kraus)
}

/// Violation tally for a batch of random (state, local channel) trials.
#[derive(Debug, Clone, Serialize)]
pub struct MonotonicitySummary {
    pub dim_a: usize,
    pub dim_b: usize,
    pub trials: usize,
    pub violations: usize,
    pub seed: u64,
}

/// Runs `trials` random monotonicity trials at the given dimensions. Each
/// trial draws a Hilbert-Schmidt state, a random Kraus count, a random side,
/// and a random channel from its own deterministic stream, so the tally is
/// reproducible and independent of thread count.
pub fn monotonicity_sweep(
    dim_a: usize,
    dim_b: usize,
    trials: usize,
    seed: u64,
) -> Result<MonotonicitySummary> {
    let violations = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64 + 1);
            let rho = DensityMatrix::random_with(dim_a, dim_b, &mut rng);
            let side = if rng.random::<bool>() {
                Subsystem::A
            } else {
                Subsystem::B
            };
            let dim = match side {
                Subsystem::A => dim_a,
                Subsystem::B => dim_b,
            };
            let kraus_count = rng.random_range(1..=dim * dim);
            let channel = random_channel_with(dim, kraus_count, &mut rng)?;
            let trial = l_monotonicity_trial(&rho, &channel, side)?;
            Ok(usize::from(!trial.ok))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    Ok(MonotonicitySummary {
        dim_a,
        dim_b,
        trials,
        violations,
        seed,
    })
}

/// The preparation map of the worked two-qubit example:
/// Phi(X) = |0><0| X |0><0| + |+><1| X |1><+|.
pub fn example_preparation_map() -> QuantumChannel {
    let zero = basis_ket(2, 0);
    let one = basis_ket(2, 1);
    let inv = C64::new(1.0 / 2.0f64.sqrt(), 0.0);
    let plus = basis_ket(2, 0) * inv + basis_ket(2, 1) * inv;
    let k0 = &zero * zero.adjoint();
    let k1 = &plus * one.adjoint();
    QuantumChannel::new(vec![k0, k1]).expect("the example map is trace preserving")
}
