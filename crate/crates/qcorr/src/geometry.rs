//! State-space structure: parameter counting behind the measure-zero
//! statement for locally producible states, the positivity and monotonicity
//! of the counting margin f(d_A, d_B), and Monte Carlo classification of
//! random states into the classical / low-rank-quantum / high-rank-quantum
//! regions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::correlation::{self, CorrelationAnalysis};
use crate::discord::{self, DiscordOptions};
use crate::error::Result;
use crate::linalg::{max_entry_norm, Subsystem};
use crate::states::{DensityMatrix, ProductEnsemble};
use crate::tol;

/// Exact integer parameter counting for the class of convex sums of s
/// product states against the full state body.
#[derive(Debug, Clone, Serialize)]
pub struct CountingReport {
    pub dim_a: u64,
    pub dim_b: u64,
    pub s: u64,
    /// s(d_A² - 1 + d_B² - 1) + s - 1.
    pub params_class: i64,
    /// d_A² d_B² - 1.
    pub params_full: i64,
    /// params_class < params_full: the class has Lebesgue measure zero.
    pub measure_zero: bool,
    /// f(d_A, d_B) = d_A²d_B² - d_A³ - d_A d_B² + d_A, the strict margin at
    /// s = d_A.
    pub f_value: i64,
}

/// f(d_A, d_B) = d_A²d_B² - d_A³ - d_A d_B² + d_A in exact integer
/// arithmetic.
pub fn f_margin(dim_a: u64, dim_b: u64) -> i64 {
    let a = dim_a as i64;
    let b = dim_b as i64;
    a * a * b * b - a * a * a - a * b * b + a
}

/// Parameter-counting report; pure integer arithmetic throughout.
pub fn counting_report(dim_a: u64, dim_b: u64, s: u64) -> CountingReport {
    let a2 = (dim_a * dim_a) as i64;
    let b2 = (dim_b * dim_b) as i64;
    let s_i = s as i64;
    let params_class = s_i * (a2 - 1 + b2 - 1) + s_i - 1;
    let params_full = a2 * b2 - 1;
    CountingReport {
        dim_a,
        dim_b,
        s,
        params_class,
        params_full,
        measure_zero: params_class < params_full,
        f_value: f_margin(dim_a, dim_b),
    }
}

/// Exhaustively verifies f > 0 and f nondecreasing in each argument over
/// 2 <= d_A <= d_B <= max_dim.
pub fn f_monotonicity_check(max_dim: u64) -> bool {
    for da in 2..=max_dim {
        for db in da..=max_dim {
            if f_margin(da, db) <= 0 {
                return false;
            }
            if da + 1 <= db && f_margin(da + 1, db) < f_margin(da, db) {
                return false;
            }
            if db + 1 <= max_dim && f_margin(da, db + 1) < f_margin(da, db) {
                return false;
            }
        }
    }
    true
}

/// Region of the (discord, L) landscape a state falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// Zero discord on both sides.
    Classical,
    /// Nonzero discord with L <= d_min, compatible with classical
    /// correlations.
    QuantumLowL,
    /// L > d_min: correlations beyond classical reach.
    QuantumHighL,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Region::Classical => write!(f, "classical"),
            Region::QuantumLowL => write!(f, "quantum_low_l"),
            Region::QuantumHighL => write!(f, "quantum_high_l"),
        }
    }
}

/// Whether the state is known to be reachable from a classical state by
/// local operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProducibleHint {
    /// The caller supplied an ensemble with at most d_min terms assembling
    /// to this state; the preparation construction applies.
    YesConstructed,
    /// No construction known; deciding membership in general is open.
    Unknown,
}

/// Per-state classification record.
#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub state_id: String,
    pub rank_l: usize,
    pub d_min: usize,
    /// Numerical discord when the measured side is a qubit; `None` when the
    /// commutator criterion substituted for the optimizer.
    pub discord_a: Option<f64>,
    pub discord_b: Option<f64>,
    pub zero_discord_a: bool,
    pub zero_discord_b: bool,
    pub region: Region,
    pub locally_producible_hint: ProducibleHint,
}

/// Classification thresholds; defaults match the crate-wide tolerances.
#[derive(Debug, Clone)]
pub struct ClassifyOptions {
    pub rank_rel_tol: f64,
    pub discord_zero_tol: f64,
    pub discord: DiscordOptions,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            rank_rel_tol: tol::RANK_REL,
            discord_zero_tol: tol::DISCORD_ZERO,
            discord: DiscordOptions::default(),
        }
    }
}

/// Classifies a state into its region. Discord is computed numerically for
/// qubit measured sides; for larger sides the commutator criterion decides
/// zero-vs-nonzero. A supplied ensemble with at most d_min terms that
/// assembles to the state upgrades the producibility hint.
pub fn classify(
    rho: &DensityMatrix,
    state_id: impl Into<String>,
    hint_ensemble: Option<&ProductEnsemble>,
    opts: &ClassifyOptions,
) -> Result<ClassificationReport> {
    let (report, _) = classify_with_analysis(rho, state_id, hint_ensemble, opts)?;
    Ok(report)
}

pub(crate) fn classify_with_analysis(
    rho: &DensityMatrix,
    state_id: impl Into<String>,
    hint_ensemble: Option<&ProductEnsemble>,
    opts: &ClassifyOptions,
) -> Result<(ClassificationReport, CorrelationAnalysis)> {
    let analysis = correlation::analyze_with(rho, opts.rank_rel_tol)?;
    let witness = correlation::witness_from_analysis(&analysis);

    let eval_side = |side: Subsystem, commutator_zero: bool| -> Result<(Option<f64>, bool)> {
        if rho.subsystem_dim(side) <= 2 {
            let d = discord::discord_with(rho, side, &opts.discord)?;
            Ok((Some(d.value), d.value <= opts.discord_zero_tol))
        } else {
            Ok((None, commutator_zero))
        }
    };
    let (discord_a, zero_a) = eval_side(Subsystem::A, witness.zero_discord_a)?;
    let (discord_b, zero_b) = eval_side(Subsystem::B, witness.zero_discord_b)?;

    let region = if zero_a && zero_b {
        Region::Classical
    } else if witness.witness_fired {
        Region::QuantumHighL
    } else {
        Region::QuantumLowL
    };

    let locally_producible_hint = match hint_ensemble {
        Some(ens)
            if ens.len() <= rho.d_min()
                && max_entry_norm(&(ens.assemble().matrix() - rho.matrix()))
                    <= tol::RECONSTRUCTION =>
        {
            ProducibleHint::YesConstructed
        }
        _ => ProducibleHint::Unknown,
    };

    let report = ClassificationReport {
        state_id: state_id.into(),
        rank_l: analysis.rank_l(),
        d_min: rho.d_min(),
        discord_a,
        discord_b,
        zero_discord_a: zero_a,
        zero_discord_b: zero_b,
        region,
        locally_producible_hint,
    };
    Ok((report, analysis))
}

/// One Monte Carlo sample: classification plus the rank margin.
#[derive(Debug, Clone, Serialize)]
pub struct SampleRecord {
    pub sample_id: usize,
    pub rank_l: usize,
    pub discord_a: Option<f64>,
    pub discord_b: Option<f64>,
    pub region: Region,
    /// Smallest kept singular value over the largest: the sample's distance
    /// from the rank-deficient set.
    pub min_sv_gap: f64,
}

/// Region tallies over seeded Hilbert-Schmidt samples.
#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloReport {
    pub dim_a: usize,
    pub dim_b: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub classical: usize,
    pub quantum_low_l: usize,
    pub quantum_high_l: usize,
    pub fraction_classical: f64,
    pub fraction_quantum_low_l: f64,
    pub fraction_quantum_high_l: f64,
    /// Smallest rank margin observed across all samples; how close the
    /// sample set came to the measure-zero rank-deficient sets.
    pub min_sv_gap: f64,
    pub samples: Vec<SampleRecord>,
}

/// Samples `n_samples` Hilbert-Schmidt-random states (one deterministic
/// stream per sample index) and classifies each. Reproducible bit-for-bit
/// for a fixed seed and sample count, independent of thread count.
pub fn monte_carlo_regions(
    dim_a: usize,
    dim_b: usize,
    n_samples: usize,
    seed: u64,
) -> Result<MonteCarloReport> {
    let opts = ClassifyOptions::default();
    let mut samples: Vec<SampleRecord> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            let rho = DensityMatrix::random_with(dim_a, dim_b, &mut rng);
            let (report, analysis) =
                classify_with_analysis(&rho, format!("sample-{i}"), None, &opts)?;
            Ok(SampleRecord {
                sample_id: i,
                rank_l: report.rank_l,
                discord_a: report.discord_a,
                discord_b: report.discord_b,
                region: report.region,
                min_sv_gap: analysis.relative_smallest_sv(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    samples.sort_by_key(|s| s.sample_id);

    let count = |r: Region| samples.iter().filter(|s| s.region == r).count();
    let classical = count(Region::Classical);
    let quantum_low_l = count(Region::QuantumLowL);
    let quantum_high_l = count(Region::QuantumHighL);
    let min_sv_gap = samples
        .iter()
        .map(|s| s.min_sv_gap)
        .fold(f64::INFINITY, f64::min);
    let n = n_samples.max(1) as f64;
    Ok(MonteCarloReport {
        dim_a,
        dim_b,
        n_samples,
        seed,
        classical,
        quantum_low_l,
        quantum_high_l,
        fraction_classical: classical as f64 / n,
        fraction_quantum_low_l: quantum_low_l as f64 / n,
        fraction_quantum_high_l: quantum_high_l as f64 / n,
        min_sv_gap,
        samples,
    })
}

/// Assembled-ensemble variant of the Monte Carlo experiment: classifies
/// states built as random s-term product ensembles instead of full-body
/// samples. By construction every sample satisfies L <= s.
pub fn monte_carlo_ensemble_regions(
    dim_a: usize,
    dim_b: usize,
    s: usize,
    n_samples: usize,
    seed: u64,
) -> Result<MonteCarloReport> {
    let opts = ClassifyOptions::default();
    let mut samples: Vec<SampleRecord> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            let ens = ProductEnsemble::random_with(dim_a, dim_b, s, &mut rng)?;
            let rho = ens.assemble();
            let (report, analysis) =
                classify_with_analysis(&rho, format!("ensemble-{i}"), Some(&ens), &opts)?;
            Ok(SampleRecord {
                sample_id: i,
                rank_l: report.rank_l,
                discord_a: report.discord_a,
                discord_b: report.discord_b,
                region: report.region,
                min_sv_gap: analysis.relative_smallest_sv(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    samples.sort_by_key(|s| s.sample_id);

    let count = |r: Region| samples.iter().filter(|x| x.region == r).count();
    let classical = count(Region::Classical);
    let quantum_low_l = count(Region::QuantumLowL);
    let quantum_high_l = count(Region::QuantumHighL);
    let min_sv_gap = samples
        .iter()
        .map(|x| x.min_sv_gap)
        .fold(f64::INFINITY, f64::min);
    let n = n_samples.max(1) as f64;
    Ok(MonteCarloReport {
        dim_a,
        dim_b,
        n_samples,
        seed,
        classical,
        quantum_low_l,
        quantum_high_l,
        fraction_classical: classical as f64 / n,
        fraction_quantum_low_l: quantum_low_l as f64 / n,
        fraction_quantum_high_l: quantum_high_l as f64 / n,
        min_sv_gap,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_ket, projector, C64};
    use crate::states::EnsembleTerm;

    fn rho_l_ensemble() -> ProductEnsemble {
        let inv = C64::new(1.0 / 2.0f64.sqrt(), 0.0);
        let plus = basis_ket(2, 0) * inv + basis_ket(2, 1) * inv;
        ProductEnsemble::new(vec![
            EnsembleTerm {
                weight: 0.5,
                state_a: projector(&basis_ket(2, 0)),
                state_b: projector(&basis_ket(2, 0)),
            },
            EnsembleTerm {
                weight: 0.5,
                state_a: projector(&plus),
                state_b: projector(&basis_ket(2, 1)),
            },
        ])
        .unwrap()
    }

    #[test]
    fn counting_for_two_qubits() {
        let report = counting_report(2, 2, 2);
        assert_eq!(report.params_class, 13);
        assert_eq!(report.params_full, 15);
        assert!(report.measure_zero);
        assert_eq!(report.f_value, 2);
    }

    #[test]
    fn counting_for_qubit_qutrit() {
        let report = counting_report(2, 3, 2);
        assert_eq!(report.f_value, 12); // 36 - 8 - 18 + 2
        assert!(report.measure_zero);
    }

    #[test]
    fn counting_with_enough_terms_is_not_measure_zero() {
        let report = counting_report(2, 2, 16);
        assert!(!report.measure_zero);
    }

    #[test]
    fn f_monotonicity_holds_up_to_ten() {
        assert!(f_monotonicity_check(2));
        assert!(f_monotonicity_check(10));
        assert!(f_margin(2, 3) >= f_margin(2, 2));
    }

    #[test]
    fn measure_zero_at_d_min_for_all_small_dimensions() {
        for da in 2..=10 {
            for db in 2..=10 {
                let s = da.min(db);
                let report = counting_report(da, db, s);
                assert!(
                    report.measure_zero,
                    "s = d_min not measure zero at ({da}, {db})"
                );
            }
        }
    }

    #[test]
    fn classify_named_states() {
        let opts = ClassifyOptions::default();
        let c = classify(&DensityMatrix::rho_c(), "rho_c", None, &opts).unwrap();
        assert_eq!(c.region, Region::Classical);

        let ens = rho_l_ensemble();
        let l = classify(&DensityMatrix::rho_l(), "rho_l", Some(&ens), &opts).unwrap();
        assert_eq!(l.region, Region::QuantumLowL);
        assert_eq!(l.locally_producible_hint, ProducibleHint::YesConstructed);

        let w = classify(
            &DensityMatrix::werner(1.0 / 3.0).unwrap(),
            "werner",
            None,
            &opts,
        )
        .unwrap();
        assert_eq!(w.region, Region::QuantumHighL);
        assert_eq!(w.locally_producible_hint, ProducibleHint::Unknown);
    }

    #[test]
    fn classify_is_stable_under_serialization_round_trip() {
        let opts = ClassifyOptions::default();
        let rho = DensityMatrix::random(2, 2, 61);
        let a = classify(&rho, "x", None, &opts).unwrap();
        let back = DensityMatrix::from_json(&rho.to_json().unwrap()).unwrap();
        let b = classify(&back, "x", None, &opts).unwrap();
        assert_eq!(a.rank_l, b.rank_l);
        assert_eq!(a.region, b.region);
        assert_eq!(a.discord_a, b.discord_a);
        assert_eq!(a.discord_b, b.discord_b);
    }

    #[test]
    fn qutrit_classification_uses_commutator_fallback() {
        let opts = ClassifyOptions::default();
        let p = crate::linalg::RealMatrix::from_element(3, 3, 1.0 / 9.0);
        let rho = DensityMatrix::classical_computational(&p).unwrap();
        let report = classify(&rho, "uniform", None, &opts).unwrap();
        assert_eq!(report.region, Region::Classical);
        assert!(report.discord_a.is_none());
        assert!(report.discord_b.is_none());
    }

    #[test]
    fn monte_carlo_small_run_is_generic_high_rank() {
        let report = monte_carlo_regions(2, 2, 50, 7).unwrap();
        assert_eq!(report.classical, 0);
        assert_eq!(report.quantum_high_l, 50);
        assert!(report.min_sv_gap > 0.0);
        for s in &report.samples {
            assert_eq!(s.rank_l, 4);
        }
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let a = monte_carlo_regions(2, 2, 20, 11).unwrap();
        let b = monte_carlo_regions(2, 2, 20, 11).unwrap();
        assert_eq!(a.min_sv_gap.to_bits(), b.min_sv_gap.to_bits());
        for (x, y) in a.samples.iter().zip(b.samples.iter()) {
            assert_eq!(x.rank_l, y.rank_l);
            assert_eq!(x.region, y.region);
            assert_eq!(
                x.discord_a.map(f64::to_bits),
                y.discord_a.map(f64::to_bits)
            );
            assert_eq!(x.min_sv_gap.to_bits(), y.min_sv_gap.to_bits());
        }
    }

    #[test]
    fn assembled_two_term_ensembles_stay_low_rank() {
        let report = monte_carlo_ensemble_regions(2, 2, 2, 50, 13).unwrap();
        assert_eq!(report.quantum_high_l, 0);
        for s in &report.samples {
            assert!(s.rank_l <= 2);
        }
    }
}
