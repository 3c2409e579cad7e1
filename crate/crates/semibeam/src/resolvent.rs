//! Resolvent solves on the imaginary axis, energy-metric operator norms,
//! frequency sweeps, scaling-exponent fits and inequality audits.
//!
//! A finite truncation only mirrors the continuous resolvent inside its
//! resolved band; sweeps and fits are therefore restricted to
//! `lambda <= mu_{N/2}` (see [`validity_limit`]), beyond which any
//! truncation decays like `1/lambda` regardless of the model.

use ndarray::{Array1, Array2};
use ndarray_linalg::{c64, Factorize, ReciprocalConditionNum, Scalar, Solve, SVD};
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::assembly::{EnergyGram, GeneratorMatrix};
use crate::error::{Error, Result};
use crate::params::{ModelParameters, SystemVariant};
use crate::spectral::{derivative_matrix, eigenvalue, fractional_power_diag};
use crate::state::{Block, StateVector};

/// Reciprocal-condition floor below which a shifted solve is reported as
/// sitting numerically on an eigenfrequency.
pub const RCOND_FLOOR: f64 = 1e-14;

/// Relative residual contract for resolvent solves.
pub const RESIDUAL_LIMIT: f64 = 1e-9;

/// One frequency sample of the resolvent: the energy-metric operator norm
/// and the worst relative residual over the probe solves.
#[derive(Debug, Clone, Copy)]
pub struct ResolventSample {
    pub lambda: f64,
    pub norm_energy: f64,
    pub residual: f64,
}

/// Outcome of one grid point of a sweep; failed solves keep their error so
/// the sweep can continue.
#[derive(Debug)]
pub struct SweepPoint {
    pub lambda: f64,
    pub outcome: Result<ResolventSample>,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    /// Random right-hand sides per frequency used for the residual check.
    pub residual_probes: usize,
    pub seed: u64,
    /// Worker threads; 0 keeps the global rayon pool.
    pub workers: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { residual_probes: 2, seed: 1, workers: 0 }
    }
}

/// Log-log slope fit of the resolvent norm, `||R(i lambda)|| ~ lambda^{-p}`.
#[derive(Debug, Clone, Copy)]
pub struct ExponentFit {
    pub window: (f64, f64),
    pub slope: f64,
    pub r_squared: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Upper edge `mu_{floor(N/2)}` of the band in which the truncation
/// faithfully reflects the continuous resolvent scaling.
pub fn validity_limit(length: f64, modes: usize) -> Result<f64> {
    eigenvalue((modes / 2).max(1), length)
}

fn shifted_complex(matrix: &Array2<f64>, lambda: f64) -> Array2<c64> {
    let n = matrix.nrows();
    let mut m = matrix.mapv(|v| c64::new(-v, 0.0));
    for i in 0..n {
        m[[i, i]] += c64::new(0.0, lambda);
    }
    m
}

fn complex_matvec(matrix: &Array2<f64>, x: &Array1<c64>) -> Array1<c64> {
    let re = x.mapv(|z| z.re);
    let im = x.mapv(|z| z.im);
    let yre = matrix.dot(&re);
    let yim = matrix.dot(&im);
    Array1::from_iter(yre.iter().zip(yim.iter()).map(|(a, b)| c64::new(*a, *b)))
}

/// Solve `(i lambda I - B) U = F` by dense complex LU, rejecting shifts that
/// sit numerically on an eigenfrequency and verifying the relative residual.
pub fn resolvent_solve(
    gen: &GeneratorMatrix,
    lambda: f64,
    forcing: &StateVector<c64>,
) -> Result<StateVector<c64>> {
    if forcing.mode_count() != gen.mode_count() {
        return Err(Error::DimensionMismatch("forcing does not match generator size".into()));
    }
    if forcing.is_zero() {
        return StateVector::zero(gen.mode_count(), forcing.length());
    }
    let shifted = shifted_complex(gen.matrix(), lambda);
    let lu = shifted.factorize()?;
    let rcond = lu.rcond()?;
    if !(rcond > RCOND_FLOOR) {
        return Err(Error::NearSingular { lambda, rcond });
    }
    let u = lu.solve(forcing.as_flat())?;
    // residual check: || (i lambda - B) U - F || / || F ||
    let mut resid = complex_matvec(gen.matrix(), &u).mapv(|z| -z);
    for (r, ui) in resid.iter_mut().zip(u.iter()) {
        *r += c64::new(0.0, lambda) * ui;
    }
    let resid = &resid - forcing.as_flat();
    let rel = resid.iter().map(|z| z.square()).sum::<f64>().sqrt()
        / forcing.as_flat().iter().map(|z| z.square()).sum::<f64>().sqrt();
    if rel > RESIDUAL_LIMIT {
        return Err(Error::Singular {
            context: format!("resolvent residual {rel:.3e} exceeds {RESIDUAL_LIMIT:.0e} at lambda = {lambda}"),
        });
    }
    StateVector::from_flat(u, forcing.length())
}

fn norm_from_transformed(transformed: &Array2<f64>, lambda: f64) -> Result<f64> {
    let shifted = shifted_complex(transformed, lambda);
    let (_, sv, _) = shifted.svd(false, false)?;
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(smin > 0.0) {
        return Err(Error::NearSingular { lambda, rcond: 0.0 });
    }
    Ok(1.0 / smin)
}

/// Energy-metric operator norm `||(i lambda I - B)^{-1}||` computed as the
/// reciprocal smallest singular value of the shifted generator in the
/// orthonormal energy frame (equivalently, the largest singular value of
/// `L^T (i lambda I - B)^{-1} L^{-T}`).
pub fn resolvent_norm(gen: &GeneratorMatrix, gram: &EnergyGram, lambda: f64) -> Result<f64> {
    let transformed = gram.similarity(gen.matrix())?;
    norm_from_transformed(&transformed, lambda)
}

fn sample_at(
    gen: &GeneratorMatrix,
    gram: &EnergyGram,
    transformed: &Array2<f64>,
    lambda: f64,
    probes: usize,
    rng: &mut ChaCha12Rng,
) -> Result<ResolventSample> {
    let norm_energy = norm_from_transformed(transformed, lambda)?;
    let n = gen.mode_count();
    let mut residual = 0.0f64;
    for _ in 0..probes {
        let data = Array1::from_iter(
            (0..9 * n).map(|_| c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
        );
        let f = StateVector::from_flat(data, gen.params().length)?;
        let u = resolvent_solve(gen, lambda, &f)?;
        // residual in the energy norm
        let mut r = complex_matvec(gen.matrix(), u.as_flat()).mapv(|z| -z);
        for (ri, ui) in r.iter_mut().zip(u.as_flat().iter()) {
            *ri += c64::new(0.0, lambda) * ui;
        }
        let r = &r - f.as_flat();
        let rstate = StateVector::from_flat(r, gen.params().length)?;
        residual = residual.max(gram.norm(&rstate)? / gram.norm(&f)?);
    }
    if residual > RESIDUAL_LIMIT {
        return Err(Error::Singular {
            context: format!("sweep residual {residual:.3e} exceeds {RESIDUAL_LIMIT:.0e} at lambda = {lambda}"),
        });
    }
    Ok(ResolventSample { lambda, norm_energy, residual })
}

/// Sweep the resolvent norm over a frequency grid. Samples are computed
/// independently (optionally on a dedicated worker pool) and returned in
/// ascending frequency order; per-sample failures are recorded and do not
/// abort the sweep.
pub fn sweep(
    gen: &GeneratorMatrix,
    gram: &EnergyGram,
    grid: &[f64],
    opts: &SweepOptions,
) -> Result<Vec<SweepPoint>> {
    let transformed = gram.similarity(gen.matrix())?;
    let run = |&(idx, lambda): &(usize, f64)| -> SweepPoint {
        let mut rng = ChaCha12Rng::seed_from_u64(opts.seed);
        rng.set_stream(idx as u64 + 1);
        SweepPoint {
            lambda,
            outcome: sample_at(gen, gram, &transformed, lambda, opts.residual_probes, &mut rng),
        }
    };
    let indexed: Vec<(usize, f64)> = grid.iter().cloned().enumerate().collect();
    let mut points: Vec<SweepPoint> = if opts.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        pool.install(|| indexed.par_iter().map(run).collect())
    } else {
        indexed.par_iter().map(run).collect()
    };
    points.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).unwrap());
    Ok(points)
}

/// Fit `-log ||R||` against `log lambda` over `window` (at least 8 samples)
/// and compare the slope with `target` at the given tolerance.
pub fn fit_exponent(
    samples: &[ResolventSample],
    window: (f64, f64),
    target: f64,
    tolerance: f64,
) -> Result<ExponentFit> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.lambda >= window.0 && s.lambda <= window.1 && s.norm_energy > 0.0)
        .map(|s| (s.lambda.ln(), -s.norm_energy.ln()))
        .collect();
    if pts.len() < 8 {
        return Err(Error::TooFewSamples { have: pts.len(), need: 8 });
    }
    let n = pts.len() as f64;
    let xbar = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ybar = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in &pts {
        sxx += (x - xbar) * (x - xbar);
        sxy += (x - xbar) * (y - ybar);
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (x, y) in &pts {
        ss_res += (y - slope * x - intercept) * (y - slope * x - intercept);
        ss_tot += (y - ybar) * (y - ybar);
    }
    let r_squared = if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).max(0.0) } else { 1.0 };
    Ok(ExponentFit { window, slope, r_squared, target, tolerance, pass: slope >= target - tolerance })
}

/// Resolvent scaling exponent `2 phi / (1 + phi)` with `phi` the smallest
/// damping exponent; `phi = 1` is the analytic case with exponent 1 and
/// `phi = 0` degenerates to 0.
pub fn gevrey_target(exponents: [f64; 3]) -> Result<f64> {
    for (i, e) in exponents.iter().enumerate() {
        if !e.is_finite() || !(0.0..=1.0).contains(e) {
            return Err(Error::invalid(
                &format!("exponents[{i}]"),
                format!("damping exponent must lie in [0, 1], got {e}"),
            ));
        }
    }
    let phi = exponents.iter().cloned().fold(f64::INFINITY, f64::min);
    if phi == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * phi / (1.0 + phi))
}

#[derive(Debug, Clone, Copy)]
pub struct AuditOptions {
    /// Random forcing probes per frequency.
    pub trials: usize,
    pub seed: u64,
    /// Band limit of the probe coefficients. Probes drawn at a fixed band
    /// are the same physical data at every truncation size, which is what
    /// makes the per-ratio maxima comparable across mode counts. 0 selects
    /// `min(16, N)`.
    pub probe_modes: usize,
    /// Ratios above this ceiling are flagged in the report.
    pub ceiling: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions { trials: 20, seed: 1, probe_modes: 0, ceiling: 1e4 }
    }
}

/// Maximum observed ratio `LHS / (||F|| ||U||)` for one audited inequality.
#[derive(Debug, Clone)]
pub struct AuditEntry {
    pub name: &'static str,
    /// The quantity on the left-hand side.
    pub quantity: &'static str,
    /// Exponent hypothesis under which the inequality is claimed, if any.
    pub hypothesis: &'static str,
    /// False when the hypothesis does not hold for the audited parameters;
    /// inactive entries carry no ratio.
    pub active: bool,
    pub max_ratio: f64,
    pub lambda_at_max: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone)]
pub struct AuditReport {
    pub variant: SystemVariant,
    pub mode_count: usize,
    pub probe_modes: usize,
    pub trials: usize,
    pub ceiling: f64,
    pub entries: Vec<AuditEntry>,
}

impl AuditReport {
    pub fn all_finite(&self) -> bool {
        self.entries.iter().filter(|e| e.active).all(|e| e.max_ratio.is_finite())
    }

    pub fn any_flagged(&self) -> bool {
        self.entries.iter().any(|e| e.flagged)
    }
}

struct RatioProbe<'a> {
    mus: &'a Array1<f64>,
    deriv: &'a Array2<f64>,
}

impl RatioProbe<'_> {
    fn l2_sq(block: ndarray::ArrayView1<'_, c64>) -> f64 {
        block.iter().map(|z| z.square()).sum()
    }

    fn weighted_sq(&self, block: ndarray::ArrayView1<'_, c64>, power: f64) -> f64 {
        block
            .iter()
            .zip(self.mus.iter())
            .map(|(z, mu)| z.square() * mu.powf(power))
            .sum()
    }

    /// `|| f_x - g ||^2` evaluated exactly on spectral data.
    fn shear_sq(
        &self,
        f: ndarray::ArrayView1<'_, c64>,
        g: ndarray::ArrayView1<'_, c64>,
    ) -> f64 {
        let df = {
            let re = f.mapv(|z| z.re);
            let im = f.mapv(|z| z.im);
            let dre = self.deriv.dot(&re);
            let dim = self.deriv.dot(&im);
            Array1::from_iter(dre.iter().zip(dim.iter()).map(|(a, b)| c64::new(*a, *b)))
        };
        let grad_sq = self.weighted_sq(f, 1.0);
        let cross: f64 = g.iter().zip(df.iter()).map(|(gz, dz)| (gz.conj() * dz).re).sum();
        grad_sq - 2.0 * cross + Self::l2_sq(g)
    }
}

struct AuditQuantity {
    name: &'static str,
    quantity: &'static str,
    hypothesis: &'static str,
    active: bool,
    eval: Box<dyn Fn(&RatioProbe<'_>, f64, &StateVector<c64>) -> f64 + Sync>,
}

fn audit_quantities(params: &ModelParameters) -> Vec<AuditQuantity> {
    use Block::*;
    let [e1, e2, e3] = params.exponents;
    let (k1, k2, b1, b2) = (params.kappa1, params.kappa2, params.b1, params.b2);
    let mut list: Vec<AuditQuantity> = vec![
        AuditQuantity {
            name: "tube_gap",
            quantity: "|lambda| ||y - phi||^2",
            hypothesis: "",
            active: true,
            eval: Box::new(|_, lam, u| {
                let gap = Array1::from_iter(
                    u.block(Deflection2).iter().zip(u.block(Deflection1).iter()).map(|(a, b)| a - b),
                );
                lam.abs() * RatioProbe::l2_sq(gap.view())
            }),
        },
        AuditQuantity {
            name: "rot1_rate",
            quantity: "||v||^2",
            hypothesis: "",
            active: true,
            eval: Box::new(|_, _, u| RatioProbe::l2_sq(u.block(Rotation1Rate))),
        },
        AuditQuantity {
            name: "tube1_strain",
            quantity: "kappa1 ||phi_x - psi||^2 + b1 ||A^1/2 psi||^2",
            hypothesis: "",
            active: true,
            eval: Box::new(move |p, _, u| {
                k1 * p.shear_sq(u.block(Deflection1), u.block(Rotation1))
                    + b1 * p.weighted_sq(u.block(Rotation1), 1.0)
            }),
        },
        AuditQuantity {
            name: "tube2_strain",
            quantity: "kappa2 ||y_x - z||^2 + b2 ||A^1/2 z||^2",
            hypothesis: "",
            active: true,
            eval: Box::new(move |p, _, u| {
                k2 * p.shear_sq(u.block(Deflection2), u.block(Rotation2))
                    + b2 * p.weighted_sq(u.block(Rotation2), 1.0)
            }),
        },
    ];
    if params.variant == SystemVariant::System02 {
        let half = |e: f64| e >= 0.5;
        list.extend([
            AuditQuantity {
                name: "temp_freq",
                quantity: "|lambda| ||theta||^2",
                hypothesis: "",
                active: true,
                eval: Box::new(|_, lam, u| lam.abs() * RatioProbe::l2_sq(u.block(Temperature))),
            },
            AuditQuantity {
                name: "defl1_rate_freq",
                quantity: "|lambda| ||u||^2",
                hypothesis: "e1 >= 1/2",
                active: half(e1),
                eval: Box::new(|_, lam, u| lam.abs() * RatioProbe::l2_sq(u.block(Deflection1Rate))),
            },
            AuditQuantity {
                name: "defl2_rate_freq",
                quantity: "|lambda| ||s||^2",
                hypothesis: "e2 >= 1/2",
                active: half(e2),
                eval: Box::new(|_, lam, u| lam.abs() * RatioProbe::l2_sq(u.block(Deflection2Rate))),
            },
            AuditQuantity {
                name: "shear1_freq",
                quantity: "|lambda| ||phi_x - psi||^2",
                hypothesis: "e1 >= 1/2",
                active: half(e1),
                eval: Box::new(|p, lam, u| {
                    lam.abs() * p.shear_sq(u.block(Deflection1), u.block(Rotation1))
                }),
            },
            AuditQuantity {
                name: "shear2_freq",
                quantity: "|lambda| ||y_x - z||^2",
                hypothesis: "e2 >= 1/2",
                active: half(e2),
                eval: Box::new(|p, lam, u| {
                    lam.abs() * p.shear_sq(u.block(Deflection2), u.block(Rotation2))
                }),
            },
            AuditQuantity {
                name: "rot1_rate_grad",
                quantity: "||A^1/2 v||^2",
                hypothesis: "",
                active: true,
                eval: Box::new(|p, _, u| p.weighted_sq(u.block(Rotation1Rate), 1.0)),
            },
            AuditQuantity {
                name: "rot1_rate_freq",
                quantity: "|lambda| ||v||^2",
                hypothesis: "",
                active: true,
                eval: Box::new(|_, lam, u| lam.abs() * RatioProbe::l2_sq(u.block(Rotation1Rate))),
            },
            AuditQuantity {
                name: "rot1_grad_freq",
                quantity: "|lambda| ||A^1/2 psi||^2",
                hypothesis: "",
                active: true,
                eval: Box::new(|p, lam, u| lam.abs() * p.weighted_sq(u.block(Rotation1), 1.0)),
            },
            AuditQuantity {
                name: "rot2_rate_freq",
                quantity: "|lambda| ||w||^2",
                hypothesis: "e2, e3 >= 1/2",
                active: half(e2) && half(e3),
                eval: Box::new(|_, lam, u| lam.abs() * RatioProbe::l2_sq(u.block(Rotation2Rate))),
            },
            AuditQuantity {
                name: "rot2_grad_freq",
                quantity: "|lambda| ||A^1/2 z||^2",
                hypothesis: "e2, e3 >= 1/2",
                active: half(e2) && half(e3),
                eval: Box::new(|p, lam, u| lam.abs() * p.weighted_sq(u.block(Rotation2), 1.0)),
            },
        ]);
    }
    list
}

fn banded_probe(rng: &mut ChaCha12Rng, n: usize, band: usize, length: f64) -> StateVector<c64> {
    let mut data = Array1::zeros(9 * n);
    for b in 0..9 {
        for i in 0..band {
            data[b * n + i] = c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    StateVector::from_flat(data, length).expect("probe dimensions are valid")
}

/// Probe the resolvent inequalities behind the decay and regularity
/// estimates: for every frequency on the grid and every random forcing,
/// record the ratio `LHS / (||F||_G ||U||_G)` of each audited quantity and
/// keep the maximum. Quantities whose exponent hypothesis fails for the
/// given parameters are reported inactive.
pub fn lemma_audit(
    params: &ModelParameters,
    modes: usize,
    grid: &[f64],
    opts: &AuditOptions,
) -> Result<AuditReport> {
    params.validate()?;
    if opts.trials == 0 {
        return Err(Error::invalid("trials", "at least one probe per frequency is required"));
    }
    let gen = crate::assembly::assemble_generator(params, modes)?;
    let gram = crate::assembly::assemble_gram(params, modes)?;
    let band = if opts.probe_modes == 0 { modes.min(16) } else { opts.probe_modes.min(modes) };
    let mus = fractional_power_diag(modes, params.length, 1.0)?;
    let deriv = derivative_matrix(modes, params.length)?;
    let quantities = audit_quantities(params);

    struct Acc {
        max_ratio: f64,
        lambda_at_max: f64,
    }
    let per_lambda: Vec<Result<Vec<Acc>>> = grid
        .par_iter()
        .enumerate()
        .map(|(idx, &lambda)| {
            let mut rng = ChaCha12Rng::seed_from_u64(opts.seed);
            rng.set_stream(idx as u64 + 1);
            let probe = RatioProbe { mus: &mus, deriv: &deriv };
            let mut acc: Vec<Acc> =
                quantities.iter().map(|_| Acc { max_ratio: 0.0, lambda_at_max: lambda }).collect();
            for _ in 0..opts.trials {
                let f = banded_probe(&mut rng, modes, band, params.length);
                let u = resolvent_solve(&gen, lambda, &f)?;
                let denom = gram.norm(&f)? * gram.norm(&u)?;
                if denom == 0.0 {
                    continue;
                }
                for (q, a) in quantities.iter().zip(acc.iter_mut()) {
                    if !q.active {
                        continue;
                    }
                    let ratio = (q.eval)(&probe, lambda, &u) / denom;
                    if ratio > a.max_ratio {
                        a.max_ratio = ratio;
                    }
                }
            }
            Ok(acc)
        })
        .collect();

    let mut entries: Vec<AuditEntry> = quantities
        .iter()
        .map(|q| AuditEntry {
            name: q.name,
            quantity: q.quantity,
            hypothesis: q.hypothesis,
            active: q.active,
            max_ratio: 0.0,
            lambda_at_max: f64::NAN,
            flagged: false,
        })
        .collect();
    for acc in per_lambda {
        let acc = acc?;
        for (e, a) in entries.iter_mut().zip(acc.iter()) {
            if a.max_ratio > e.max_ratio {
                e.max_ratio = a.max_ratio;
                e.lambda_at_max = a.lambda_at_max;
            }
        }
    }
    for e in entries.iter_mut() {
        e.flagged = e.active && !(e.max_ratio <= opts.ceiling);
    }
    Ok(AuditReport {
        variant: params.variant,
        mode_count: modes,
        probe_modes: band,
        trials: opts.trials,
        ceiling: opts.ceiling,
        entries,
    })
}
