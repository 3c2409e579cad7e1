//! Time evolution, energy tracking and decay-rate estimation.
//!
//! The primary propagator diagonalizes the generator in the orthonormal
//! energy frame `B~ = L^T B L^{-T}` (exact in time, no step error); when the
//! eigenbasis is ill-conditioned it falls back to implicit-midpoint stepping
//! and records that in the trajectory.

use ndarray::{Array1, Array2};
use ndarray_linalg::{c64, Eig, EigVals, Factorize, Solve, SVD};

use crate::assembly::{dissipation_rate, EnergyGram, GeneratorMatrix};
use crate::error::{Error, Result};
use crate::params::ModelParameters;
use crate::state::StateVector;

/// Condition-number ceiling beyond which the eigenbasis is treated as
/// numerically defective and propagation switches to midpoint stepping.
pub const EIGENBASIS_CONDITION_LIMIT: f64 = 1e12;

/// Substep ceiling used by the midpoint fallback.
pub const FALLBACK_MAX_STEP: f64 = 1e-3;

/// Energies, dissipation rates and optional state snapshots along one
/// solution of `dU/dt = B U`.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub energies: Vec<f64>,
    pub dissipations: Vec<f64>,
    /// Sparse `(time, state)` pairs, present when a snapshot stride was requested.
    pub snapshots: Vec<(f64, StateVector<f64>)>,
    pub params: ModelParameters,
    pub mode_count: usize,
    /// True when the eigenbasis was too ill-conditioned and the trajectory
    /// was produced by implicit-midpoint stepping instead.
    pub used_midpoint_fallback: bool,
}

/// Result of a log-energy least-squares fit, `E(t) ~ E0 exp(-2 omega t)`.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    pub omega: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub spectral_abscissa: f64,
}

/// Total energy `E(U) = 1/2 ||U||_G^2` of a state.
pub fn energy(params: &ModelParameters, state: &StateVector<f64>) -> Result<f64> {
    let gram = crate::assembly::assemble_gram(params, state.mode_count())?;
    Ok(0.5 * gram.norm_sq(state)?)
}

/// Exact-in-time propagator built from the dense eigendecomposition of the
/// generator in the energy frame.
pub struct Propagator {
    params: ModelParameters,
    mode_count: usize,
    gram: EnergyGram,
    transformed: Array2<f64>,
    eigenvalues: Array1<c64>,
    eigenvectors: Array2<c64>,
    inv_eigenvectors: Option<Array2<c64>>,
    basis_condition: f64,
    fallback: bool,
}

impl Propagator {
    pub fn new(gen: &GeneratorMatrix, gram: &EnergyGram) -> Result<Self> {
        Self::with_condition_limit(gen, gram, EIGENBASIS_CONDITION_LIMIT)
    }

    /// As [`Propagator::new`] with an explicit condition ceiling for the
    /// eigenbasis; anything above it switches propagation to the midpoint
    /// fallback.
    pub fn with_condition_limit(
        gen: &GeneratorMatrix,
        gram: &EnergyGram,
        condition_limit: f64,
    ) -> Result<Self> {
        if gen.mode_count() != gram.mode_count() {
            return Err(Error::DimensionMismatch(
                "generator and Gram were assembled at different mode counts".into(),
            ));
        }
        let transformed = gram.similarity(gen.matrix())?;
        let (eigenvalues, eigenvectors) = transformed.eig()?;
        let (_, sv, _) = eigenvectors.svd(false, false)?;
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let basis_condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        let fallback = !(basis_condition <= condition_limit);
        let inv_eigenvectors = if fallback {
            None
        } else {
            use ndarray_linalg::Inverse;
            Some(eigenvectors.inv()?)
        };
        Ok(Propagator {
            params: gen.params().clone(),
            mode_count: gen.mode_count(),
            gram: gram.clone(),
            transformed,
            eigenvalues,
            eigenvectors,
            inv_eigenvectors,
            basis_condition,
            fallback,
        })
    }

    pub fn basis_condition(&self) -> f64 {
        self.basis_condition
    }

    pub fn uses_fallback(&self) -> bool {
        self.fallback
    }

    /// Spectral abscissa of the truncated generator (similarity transforms
    /// preserve the spectrum).
    pub fn abscissa(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    fn check_initial(&self, u0: &StateVector<f64>) -> Result<()> {
        if u0.mode_count() != self.mode_count {
            return Err(Error::DimensionMismatch(format!(
                "initial state has {} modes, propagator expects {}",
                u0.mode_count(),
                self.mode_count
            )));
        }
        Ok(())
    }

    /// Solution state at one time (exact path only).
    pub fn state_at(&self, u0: &StateVector<f64>, t: f64) -> Result<StateVector<f64>> {
        self.check_initial(u0)?;
        if t == 0.0 {
            return Ok(u0.clone());
        }
        let inv = self.inv_eigenvectors.as_ref().ok_or_else(|| Error::Singular {
            context: format!(
                "eigenbasis condition {:.3e} exceeds {EIGENBASIS_CONDITION_LIMIT:.0e}; use propagate()",
                self.basis_condition
            ),
        })?;
        let x0 = self.gram.energy_coords(u0)?.mapv(|v| c64::new(v, 0.0));
        let a0 = inv.dot(&x0);
        let coords = self.coords_at(&a0, t);
        self.gram.from_energy_coords(&coords.mapv(|z| z.re))
    }

    fn coords_at(&self, a0: &Array1<c64>, t: f64) -> Array1<c64> {
        let phases = Array1::from_iter(
            self.eigenvalues.iter().zip(a0.iter()).map(|(l, a)| (l * t).exp() * a),
        );
        self.eigenvectors.dot(&phases)
    }

    /// Propagate along an increasing time grid starting at 0. A nonzero
    /// `snapshot_stride` stores every `stride`-th state (plus the final one).
    pub fn propagate(
        &self,
        u0: &StateVector<f64>,
        times: &[f64],
        snapshot_stride: usize,
    ) -> Result<TrajectoryRecord> {
        self.check_initial(u0)?;
        if times.is_empty() || times[0] != 0.0 {
            return Err(Error::invalid("times", "time grid must start at 0"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("times", "time grid must be strictly increasing"));
        }
        if self.fallback {
            return self.propagate_midpoint(u0, times, snapshot_stride);
        }
        let inv = self.inv_eigenvectors.as_ref().expect("exact path has the inverse");
        let x0 = self.gram.energy_coords(u0)?.mapv(|v| c64::new(v, 0.0));
        let a0 = inv.dot(&x0);

        let mut energies = Vec::with_capacity(times.len());
        let mut dissipations = Vec::with_capacity(times.len());
        let mut snapshots = Vec::new();
        for (k, &t) in times.iter().enumerate() {
            let state = if t == 0.0 {
                u0.clone()
            } else {
                let coords = self.coords_at(&a0, t);
                self.gram.from_energy_coords(&coords.mapv(|z| z.re))?
            };
            energies.push(0.5 * self.gram.norm_sq(&state)?);
            dissipations.push(dissipation_rate(&self.params, &state)?);
            if snapshot_stride > 0 && (k % snapshot_stride == 0 || k + 1 == times.len()) {
                snapshots.push((t, state));
            }
        }
        Ok(TrajectoryRecord {
            times: times.to_vec(),
            energies,
            dissipations,
            snapshots,
            params: self.params.clone(),
            mode_count: self.mode_count,
            used_midpoint_fallback: false,
        })
    }

    fn propagate_midpoint(
        &self,
        u0: &StateVector<f64>,
        times: &[f64],
        snapshot_stride: usize,
    ) -> Result<TrajectoryRecord> {
        let dim = 9 * self.mode_count;
        let mut coords = self.gram.energy_coords(u0)?;
        let mut energies = vec![0.5 * coords.iter().map(|v| v * v).sum::<f64>()];
        let mut dissipations = vec![dissipation_rate(&self.params, u0)?];
        let mut snapshots = Vec::new();
        if snapshot_stride > 0 {
            snapshots.push((0.0, u0.clone()));
        }
        let mut cached: Option<(f64, CayleyStep)> = None;
        for (k, w) in times.windows(2).enumerate() {
            let span = w[1] - w[0];
            let substeps = (span / FALLBACK_MAX_STEP).ceil().max(1.0) as usize;
            let h = span / substeps as f64;
            let step = match &cached {
                Some((hc, s)) if *hc == h => s,
                _ => {
                    cached = Some((h, CayleyStep::new(&self.transformed, dim, h)?));
                    &cached.as_ref().unwrap().1
                }
            };
            for _ in 0..substeps {
                coords = step.advance(&coords)?;
            }
            let state = self.gram.from_energy_coords(&coords)?;
            energies.push(0.5 * coords.iter().map(|v| v * v).sum::<f64>());
            dissipations.push(dissipation_rate(&self.params, &state)?);
            if snapshot_stride > 0 && ((k + 1) % snapshot_stride == 0 || k + 2 == times.len()) {
                snapshots.push((w[1], state));
            }
        }
        Ok(TrajectoryRecord {
            times: times.to_vec(),
            energies,
            dissipations,
            snapshots,
            params: self.params.clone(),
            mode_count: self.mode_count,
            used_midpoint_fallback: true,
        })
    }
}

/// One implicit-midpoint step `(I - h/2 M) x+ = (I + h/2 M) x` with a cached
/// factorization.
struct CayleyStep {
    lu: ndarray_linalg::LUFactorized<ndarray::OwnedRepr<f64>>,
    plus: Array2<f64>,
}

impl CayleyStep {
    fn new(m: &Array2<f64>, dim: usize, h: f64) -> Result<Self> {
        let eye = Array2::<f64>::eye(dim);
        let minus = &eye - &(m * (h / 2.0));
        let plus = &eye + &(m * (h / 2.0));
        let lu = minus
            .factorize()
            .map_err(|e| Error::Singular { context: format!("midpoint step matrix ({e})") })?;
        Ok(CayleyStep { lu, plus })
    }

    fn advance(&self, x: &Array1<f64>) -> Result<Array1<f64>> {
        Ok(self.lu.solve_into(self.plus.dot(x))?)
    }
}

/// Propagate `U(0) = U0` through the eigendecomposition of the generator,
/// with automatic midpoint fallback for ill-conditioned eigenbases.
pub fn propagate_exact(
    gen: &GeneratorMatrix,
    gram: &EnergyGram,
    u0: &StateVector<f64>,
    times: &[f64],
) -> Result<TrajectoryRecord> {
    Propagator::new(gen, gram)?.propagate(u0, times, 0)
}

/// One implicit-midpoint step `(I - dt/2 B) U+ = (I + dt/2 B) U` in the
/// original coefficient frame. For a skew generator this is an exact
/// energy isometry up to roundoff.
pub fn step_implicit_midpoint(
    gen: &GeneratorMatrix,
    state: &StateVector<f64>,
    dt: f64,
) -> Result<StateVector<f64>> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", format!("step size must be positive, got {dt}")));
    }
    if state.mode_count() != gen.mode_count() {
        return Err(Error::DimensionMismatch("state does not match generator size".into()));
    }
    let step = CayleyStep::new(gen.matrix(), 9 * gen.mode_count(), dt)?;
    let next = step.advance(state.as_flat())?;
    StateVector::from_flat(next, state.length())
}

/// Largest real part of the truncated generator's eigenvalues.
pub fn spectral_abscissa(gen: &GeneratorMatrix) -> Result<f64> {
    let ev = gen.matrix().eigvals()?;
    Ok(ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// Least-squares fit of `log E` over `window`; energies below `1e-300` are
/// excluded as underflow. Requires at least 10 usable samples.
pub fn fit_decay_rate(traj: &TrajectoryRecord, window: (f64, f64)) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = traj
        .times
        .iter()
        .zip(traj.energies.iter())
        .filter(|(t, e)| **t >= window.0 && **t <= window.1 && **e > 1e-300)
        .map(|(t, e)| (*t, e.ln()))
        .collect();
    if pts.len() < 10 {
        return Err(Error::TooFewSamples { have: pts.len(), need: 10 });
    }
    let n = pts.len() as f64;
    let (st, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (tbar, ybar) = (st / n, sy / n);
    let mut stt = 0.0;
    let mut sty = 0.0;
    for (t, y) in &pts {
        stt += (t - tbar) * (t - tbar);
        sty += (t - tbar) * (y - ybar);
    }
    let slope = sty / stt;
    let intercept = ybar - slope * tbar;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (t, y) in &pts {
        let fit = slope * t + intercept;
        ss_res += (y - fit) * (y - fit);
        ss_tot += (y - ybar) * (y - ybar);
    }
    let r_squared = if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).max(0.0) } else { 1.0 };
    let gen = crate::assembly::assemble_generator(&traj.params, traj.mode_count)?;
    Ok(DecayFit {
        omega: -slope / 2.0,
        r_squared,
        window,
        spectral_abscissa: spectral_abscissa(&gen)?,
    })
}
