//! Quantum discord by direct numerical minimization over local rank-one
//! projective measurements.
//!
//! For a measurement on subsystem X with outcomes {Pi_k},
//!
//!   D_X(rho) = S(rho_X) - S(rho) + min over {Pi_k} of sum_k p_k S(rho_Y|k),
//!
//! the gap between total mutual information and the classical correlation
//! extractable by the best measurement. Qubit measured subsystems use a
//! Bloch-sphere grid plus multi-start Nelder-Mead refinement;it
//! higher-dimensional measured subsystems use a Givens-rotation
//! parametrization and are flagged best-effort.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::f64::consts::PI;

use crate::correlation;
use crate::error::Result;
use crate::format;
use crate::linalg::{
    self, cidentity, von_neumann_entropy, ComplexMatrix, ComplexVector, Subsystem, C64,
};
use crate::states::DensityMatrix;
use crate::tol;

/// The optimal measurement found by the minimizer.
#[derive(Debug, Clone)]
pub enum Measurement {
    /// Unit Bloch vector of the projector pair (I ± n.sigma)/2 on a qubit.
    Bloch([f64; 3]),
    /// Explicit rank-one projector list for d >= 3 measured subsystems.
    Projectors(Vec<ComplexMatrix>),
}

impl Serialize for Measurement {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Measurement::Bloch(n) => {
                let mut s = serializer.serialize_struct("Measurement", 1)?;
                s.serialize_field("bloch", n)?;
                s.end()
            }
            Measurement::Projectors(ps) => {
                let rows: Vec<_> = ps.iter().map(format::matrix_to_rows).collect();
                let mut s = serializer.serialize_struct("Measurement", 1)?;
                s.serialize_field("projectors", &rows)?;
                s.end()
            }
        }
    }
}

/// One refinement start: the initial parameter vector and the conditional
/// entropy it refined to.
#[derive(Debug, Clone, Serialize)]
pub struct TracePoint {
    pub start: Vec<f64>,
    pub value: f64,
}

/// Discord of a state with respect to one measured subsystem.
#[derive(Debug, Clone, Serialize)]
pub struct DiscordResult {
    /// D in bits, clamped to 0 when within -1e-9 of it.
    pub value: f64,
    pub measured_subsystem: Subsystem,
    pub optimal_measurement: Measurement,
    /// I(rho) = S(rho_A) + S(rho_B) - S(rho) in bits.
    pub mutual_information: f64,
    /// J = S(rho_other) - min sum_k p_k S(rho_other|k) in bits.
    pub classical_correlation: f64,
    pub optimizer_trace: Vec<TracePoint>,
    /// False when some refinement start hit the iteration cap.
    pub converged: bool,
    /// False for d >= 3 measured subsystems, where the search carries no
    /// optimality certificate.
    pub certified_optimal: bool,
}

/// Tuning knobs of the measurement search. Defaults reproduce the reference
/// values to ~1e-6.
#[derive(Debug, Clone)]
pub struct DiscordOptions {
    pub grid_azimuthal: usize,
    pub grid_polar: usize,
    pub refine_starts: usize,
    pub simplex_tol: f64,
    pub max_iterations: usize,
}

impl Default for DiscordOptions {
    fn default() -> Self {
        DiscordOptions {
            grid_azimuthal: 64,
            grid_polar: 32,
            refine_starts: 5,
            simplex_tol: 1e-9,
            max_iterations: 500,
        }
    }
}

/// S(rho_A) + S(rho_B) - S(rho) in bits.
pub fn mutual_information(rho: &DensityMatrix) -> Result<f64> {
    let sa = von_neumann_entropy(&rho.marginal_a())?;
    let sb = von_neumann_entropy(&rho.marginal_b())?;
    let s = von_neumann_entropy(rho.matrix())?;
    Ok(sa + sb - s)
}

/// Discord with default search options.
pub fn discord(rho: &DensityMatrix, subsystem: Subsystem) -> Result<DiscordResult> {
    discord_with(rho, subsystem, &DiscordOptions::default())
}

pub fn discord_with(
    rho: &DensityMatrix,
    subsystem: Subsystem,
    opts: &DiscordOptions,
) -> Result<DiscordResult> {
    let d_meas = rho.subsystem_dim(subsystem);
    let marg_meas = rho.partial_trace(subsystem.other());
    let marg_other = rho.partial_trace(subsystem);
    let s_meas = von_neumann_entropy(&marg_meas)?;
    let s_other = von_neumann_entropy(&marg_other)?;
    let s_total = von_neumann_entropy(rho.matrix())?;

    let view = MeasuredView::new(rho, subsystem);
    let outcome = match d_meas {
        // The only rank-one measurement on a trivial subsystem is the
        // identity; conditioning changes nothing.
        1 => MinimizationOutcome {
            min_conditional: s_other,
            measurement: Measurement::Projectors(vec![cidentity(1)]),
            trace: Vec::new(),
            converged: true,
            certified: true,
        },
        2 => minimize_qubit(&view, &marg_meas, opts),
        _ => minimize_givens(&view, &marg_meas, opts)?,
    };

    let mutual = s_meas + s_other - s_total;
    let classical = s_other - outcome.min_conditional;
    let mut value = s_meas - s_total + outcome.min_conditional;
    if value < 0.0 && value > -1e-9 {
        value = 0.0;
    }
    Ok(DiscordResult {
        value,
        measured_subsystem: subsystem,
        optimal_measurement: outcome.measurement,
        mutual_information: mutual,
        classical_correlation: classical,
        optimizer_trace: outcome.trace,
        converged: outcome.converged,
        certified_optimal: outcome.certified,
    })
}

struct MinimizationOutcome {
    min_conditional: f64,
    measurement: Measurement,
    trace: Vec<TracePoint>,
    converged: bool,
    certified: bool,
}

/// The state reorganized around the measured subsystem: block (a, a') holds
/// the d_other x d_other operator <a| rho |a'>, so the unnormalized
/// post-measurement state for a ket |n> is sum_{a,a'} conj(n_a) n_a' B_{aa'}.
struct MeasuredView {
    d_meas: usize,
    d_other: usize,
    blocks: Vec<ComplexMatrix>,
}

impl MeasuredView {
    fn new(rho: &DensityMatrix, measured: Subsystem) -> Self {
        let (d_meas, d_other) = match measured {
            Subsystem::A => (rho.dim_a(), rho.dim_b()),
            Subsystem::B => (rho.dim_b(), rho.dim_a()),
        };
        let m = rho.matrix();
        let mut blocks = Vec::with_capacity(d_meas * d_meas);
        for a in 0..d_meas {
            for a2 in 0..d_meas {
                let mut block = ComplexMatrix::zeros(d_other, d_other);
                for b in 0..d_other {
                    for b2 in 0..d_other {
                        let (row, col) = match measured {
                            Subsystem::A => (a * d_other + b, a2 * d_other + b2),
                            Subsystem::B => (b * d_meas + a, b2 * d_meas + a2),
                        };
                        block[(b, b2)] = m[(row, col)];
                    }
                }
                blocks.push(block);
            }
        }
        MeasuredView {
            d_meas,
            d_other,
            blocks,
        }
    }

    /// Bloch-angle evaluation for a qubit measured side, avoiding ket
    /// allocation; falls back to the general path for d_other > 2.
    fn conditional_entropy_bloch(
        &self,
        theta: f64,
        phi: f64,
        scratch: &mut ComplexMatrix,
    ) -> f64 {
        debug_assert_eq!(self.d_meas, 2);
        let (sin_half, cos_half) = (theta / 2.0).sin_cos();
        let phase = C64::new(phi.cos(), phi.sin());
        let kets = [
            [C64::new(cos_half, 0.0), phase * sin_half],
            [C64::new(sin_half, 0.0), -phase * cos_half],
        ];
        if self.d_other == 2 {
            let mut total = 0.0;
            for ket in kets {
                total += self.qubit_outcome_term(ket);
            }
            return total;
        }
        let full: Vec<ComplexVector> = kets
            .iter()
            .map(|k| ComplexVector::from_row_slice(k))
            .collect();
        self.conditional_entropy(&full, scratch)
    }

    /// p * S(rho_other | outcome) for one projector ket on a 2x2 ⊗ 2x2
    /// state, fully in scalars.
    fn qubit_outcome_term(&self, ket: [C64; 2]) -> f64 {
        let mut n00 = C64::new(0.0, 0.0);
        let mut n01 = C64::new(0.0, 0.0);
        let mut n11 = C64::new(0.0, 0.0);
        for a in 0..2 {
            for a2 in 0..2 {
                let w = ket[a].conj() * ket[a2];
                let block = &self.blocks[a * 2 + a2];
                n00 += w * block[(0, 0)];
                n01 += w * block[(0, 1)];
                n11 += w * block[(1, 1)];
            }
        }
        let p = n00.re + n11.re;
        if p < tol::PROB_FLOOR {
            return 0.0;
        }
        let m00 = n00.re / p;
        let m11 = n11.re / p;
        let off = n01 / C64::new(p, 0.0);
        let half_tr = 0.5 * (m00 + m11);
        let det = m00 * m11 - off.norm_sqr();
        let disc = (half_tr * half_tr - det).max(0.0).sqrt();
        p * linalg::entropy_of_spectrum([half_tr + disc, half_tr - disc])
    }

    /// sum_k p_k S(rho_other | k) for the rank-one measurement given by
    /// orthonormal kets. Outcomes with probability below the floor are
    /// skipped.
    fn conditional_entropy(&self, kets: &[ComplexVector], scratch: &mut ComplexMatrix) -> f64 {
        let mut total = 0.0;
        for ket in kets {
            scratch.fill(C64::new(0.0, 0.0));
            for a in 0..self.d_meas {
                for a2 in 0..self.d_meas {
                    let w = ket[a].conj() * ket[a2];
                    if w.norm_sqr() == 0.0 {
                        continue;
                    }
                    let block = &self.blocks[a * self.d_meas + a2];
                    for i in 0..self.d_other {
                        for j in 0..self.d_other {
                            scratch[(i, j)] += w * block[(i, j)];
                        }
                    }
                }
            }
            let p: f64 = (0..self.d_other).map(|i| scratch[(i, i)].re).sum();
            if p < tol::PROB_FLOOR {
                continue;
            }
            total += p * conditional_state_entropy(scratch, p, self.d_other);
        }
        total
    }
}

/// Entropy of the normalized conditional state `unnormalized / p`.
fn conditional_state_entropy(unnormalized: &ComplexMatrix, p: f64, dim: usize) -> f64 {
    if dim == 2 {
        // closed-form eigenvalues of a 2x2 Hermitian matrix
        let m00 = unnormalized[(0, 0)].re / p;
        let m11 = unnormalized[(1, 1)].re / p;
        let off = unnormalized[(0, 1)] / C64::new(p, 0.0);
        let half_tr = 0.5 * (m00 + m11);
        let det = m00 * m11 - off.norm_sqr();
        let disc = (half_tr * half_tr - det).max(0.0).sqrt();
        linalg::entropy_of_spectrum([half_tr + disc, half_tr - disc])
    } else {
        let normalized = unnormalized / C64::new(p, 0.0);
        linalg::entropy_of_spectrum(normalized.symmetric_eigenvalues().iter().copied())
    }
}

/// Bloch angles of the projector onto a qubit ket, folded into the
/// antipodal-free half sphere theta in [0, pi/2].
fn bloch_angles_of_ket(ket: &ComplexVector) -> (f64, f64) {
    let cross = ket[0].conj() * ket[1];
    let nx = 2.0 * cross.re;
    let ny = 2.0 * cross.im;
    let nz = ket[0].norm_sqr() - ket[1].norm_sqr();
    let mut theta = nz.clamp(-1.0, 1.0).acos();
    let mut phi = ny.atan2(nx);
    if theta > PI / 2.0 {
        theta = PI - theta;
        phi += PI;
    }
    (theta, phi.rem_euclid(2.0 * PI))
}

fn minimize_qubit(
    view: &MeasuredView,
    marg_meas: &ComplexMatrix,
    opts: &DiscordOptions,
) -> MinimizationOutcome {
    let mut scratch = ComplexMatrix::zeros(view.d_other, view.d_other);
    let mut eval =
        |params: &[f64]| view.conditional_entropy_bloch(params[0], params[1], &mut scratch);

    // Coarse grid over the half sphere (antipodal directions give the same
    // projector pair), keeping the best few points as refinement starts.
    let mut candidates: Vec<([f64; 2], f64)> = Vec::new();
    for j in 0..opts.grid_polar {
        let theta = (j as f64 + 0.5) * (PI / 2.0) / opts.grid_polar as f64;
        for i in 0..opts.grid_azimuthal {
            let phi = i as f64 * 2.0 * PI / opts.grid_azimuthal as f64;
            let v = eval(&[theta, phi]);
            candidates.push(([theta, phi], v));
        }
    }
    // The eigenbasis of the measured marginal is exactly optimal for
    // classical states; add it as an extra start.
    if let Ok((_, vectors)) = linalg::hermitian_eigen(marg_meas) {
        let col = vectors.column(0).into_owned();
        let (theta, phi) = bloch_angles_of_ket(&col);
        let v = eval(&[theta, phi]);
        candidates.push(([theta, phi], v));
    }
    candidates.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite objective"));
    candidates.truncate(opts.refine_starts);

    let mut best_value = f64::INFINITY;
    let mut best_params = [0.0, 0.0];
    let mut converged = true;
    let mut trace = Vec::new();
    for (start, _) in &candidates {
        let run = nelder_mead(&mut eval, start, 0.02, opts.simplex_tol, opts.max_iterations);
        trace.push(TracePoint {
            start: start.to_vec(),
            value: run.value,
        });
        converged &= run.converged;
        if run.value < best_value {
            best_value = run.value;
            best_params = [run.params[0], run.params[1]];
        }
    }

    let (theta, phi) = (best_params[0], best_params[1]);
    let n = [
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    ];
    MinimizationOutcome {
        min_conditional: best_value,
        measurement: Measurement::Bloch(n),
        trace,
        converged,
        certified: true,
    }
}

/// Complex Givens rotation in the (p, q) plane.
fn givens_rotation(dim: usize, p: usize, q: usize, theta: f64, phi: f64) -> ComplexMatrix {
    let mut g = cidentity(dim);
    let (s, c) = theta.sin_cos();
    let phase = C64::new(phi.cos(), phi.sin());
    g[(p, p)] = C64::new(c, 0.0);
    g[(q, q)] = C64::new(c, 0.0);
    g[(p, q)] = -phase.conj() * C64::new(s, 0.0);
    g[(q, p)] = phase * C64::new(s, 0.0);
    g
}

/// Measurement basis U0 * product of plane rotations; d(d-1) angles.
fn givens_basis(base: &ComplexMatrix, angles: &[f64]) -> ComplexMatrix {
    let dim = base.nrows();
    let mut u = base.clone();
    let mut idx = 0;
    for p in 0..dim {
        for q in (p + 1)..dim {
            let g = givens_rotation(dim, p, q, angles[idx], angles[idx + 1]);
            u *= g;
            idx += 2;
        }
    }
    u
}

fn columns_as_kets(u: &ComplexMatrix) -> Vec<ComplexVector> {
    (0..u.ncols()).map(|k| u.column(k).into_owned()).collect()
}

/// Best-effort minimization for measured subsystems of dimension >= 3:
/// multi-start Nelder-Mead over Givens angles around a handful of fixed base
/// unitaries (the marginal eigenbasis first, which is exactly optimal for
/// classical states).
fn minimize_givens(
    view: &MeasuredView,
    marg_meas: &ComplexMatrix,
    opts: &DiscordOptions,
) -> Result<MinimizationOutcome> {
    use rand::SeedableRng;
    let d = view.d_meas;
    let n_angles = d * (d - 1);

    let mut bases = Vec::new();
    let (_, eigvecs) = linalg::hermitian_eigen(marg_meas)?;
    bases.push(eigvecs);
    bases.push(cidentity(d));
    // fixed pseudo-random bases widen the search deterministically
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x51C0_5EED);
    for _ in 0..3 {
        bases.push(linalg::random_unitary(d, &mut rng));
    }

    let mut scratch = ComplexMatrix::zeros(view.d_other, view.d_other);
    let mut best_value = f64::INFINITY;
    let mut best_u: Option<ComplexMatrix> = None;
    let mut converged = true;
    let mut trace = Vec::new();
    for base in bases {
        let mut eval = |angles: &[f64]| {
            let u = givens_basis(&base, angles);
            view.conditional_entropy(&columns_as_kets(&u), &mut scratch)
        };
        let start = vec![0.0; n_angles];
        let run = nelder_mead(&mut eval, &start, 0.1, opts.simplex_tol, opts.max_iterations);
        trace.push(TracePoint {
            start,
            value: run.value,
        });
        converged &= run.converged;
        if run.value < best_value {
            best_value = run.value;
            best_u = Some(givens_basis(&base, &run.params));
        }
    }

    let u = best_u.expect("at least one start");
    let projectors = columns_as_kets(&u).iter().map(linalg::projector).collect();
    Ok(MinimizationOutcome {
        min_conditional: best_value,
        measurement: Measurement::Projectors(projectors),
        trace,
        converged,
        certified: false,
    })
}

struct NelderMeadRun {
    params: Vec<f64>,
    value: f64,
    converged: bool,
}

/// Plain Nelder-Mead with standard coefficients. Converges when the simplex
/// diameter falls below `diameter_tol`; reports non-convergence past the
/// iteration cap.
fn nelder_mead(
    f: &mut impl FnMut(&[f64]) -> f64,
    start: &[f64],
    step: f64,
    diameter_tol: f64,
    max_iterations: usize,
) -> NelderMeadRun {
    let n = start.len();
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), f(start)));
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += step;
        let v = f(&p);
        simplex.push((p, v));
    }

    let diameter = |s: &[(Vec<f64>, f64)]| -> f64 {
        let mut d = 0.0f64;
        for i in 0..s.len() {
            for j in (i + 1)..s.len() {
                let dist = s[i]
                    .0
                    .iter()
                    .zip(&s[j].0)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                d = d.max(dist);
            }
        }
        d
    };

    let mut converged = false;
    for _ in 0..max_iterations {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite objective"));
        if diameter(&simplex) < diameter_tol {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..n].iter().map(|(p, _)| p[i]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();

        let reflect: Vec<f64> = (0..n)
            .map(|i| centroid[i] + alpha * (centroid[i] - worst.0[i]))
            .collect();
        let f_reflect = f(&reflect);

        if f_reflect < simplex[0].1 {
            let expand: Vec<f64> = (0..n)
                .map(|i| centroid[i] + gamma * (reflect[i] - centroid[i]))
                .collect();
            let f_expand = f(&expand);
            simplex[n] = if f_expand < f_reflect {
                (expand, f_expand)
            } else {
                (reflect, f_reflect)
            };
        } else if f_reflect < simplex[n - 1].1 {
            simplex[n] = (reflect, f_reflect);
        } else {
            let contract: Vec<f64> = (0..n)
                .map(|i| centroid[i] + rho * (worst.0[i] - centroid[i]))
                .collect();
            let f_contract = f(&contract);
            if f_contract < worst.1 {
                simplex[n] = (contract, f_contract);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let shrunk: Vec<f64> = (0..n)
                        .map(|i| best[i] + sigma * (entry.0[i] - best[i]))
                        .collect();
                    entry.1 = f(&shrunk);
                    entry.0 = shrunk;
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite objective"));
    NelderMeadRun {
        params: simplex[0].0.clone(),
        value: simplex[0].1,
        converged,
    }
}

/// One row of the Werner-family sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub z: f64,
    pub discord: f64,
    pub rank_l: usize,
    pub witness_fired: bool,
}

/// Discord (measured on A) and correlation rank across the Werner family.
pub fn discord_sweep(z_values: &[f64]) -> Result<Vec<SweepRow>> {
    z_values
        .iter()
        .map(|&z| {
            let rho = DensityMatrix::werner(z)?;
            let d = discord(&rho, Subsystem::A)?;
            let analysis = correlation::analyze(&rho)?;
            Ok(SweepRow {
                z,
                discord: d.value,
                rank_l: analysis.rank_l(),
                witness_fired: analysis.rank_l() > analysis.d_min(),
            })
        })
        .collect()
}
