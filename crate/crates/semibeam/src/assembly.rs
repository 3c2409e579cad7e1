//! Dense truncated generators and energy Gram matrices for both variants.
//!
//! The truncation is the compression of the continuous operator onto the
//! span of the first `N` sine modes per field. All blocks except the
//! first-derivative couplings are diagonal, so compression commutes with
//! them and the dissipation identity survives truncation exactly (up to
//! roundoff); the tests exercise this.

use ndarray::{s, Array1, Array2};
use ndarray_linalg::{c64, Cholesky, Diag, Scalar, Solve, SolveTriangular, UPLO};

use crate::error::{Error, Result};
use crate::params::{ModelParameters, SystemVariant};
use crate::spectral::{derivative_matrix, fractional_power_diag};
use crate::state::{Block, StateVector};

/// Dense `9N x 9N` truncation of the evolution generator.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    params: ModelParameters,
    mode_count: usize,
    matrix: Array2<f64>,
}

/// Symmetric positive-definite realization of the energy inner product,
/// together with its lower-triangular Cholesky factor `G = L L^T`.
#[derive(Debug, Clone)]
pub struct EnergyGram {
    variant: SystemVariant,
    mode_count: usize,
    length: f64,
    matrix: Array2<f64>,
    factor: Array2<f64>,
}

fn block_slice(b: Block, n: usize) -> std::ops::Range<usize> {
    let i = b.index();
    i * n..(i + 1) * n
}

/// Build the truncated generator for `params` with `n` modes per field.
///
/// Rows for the four configuration blocks are exact identity injections of
/// the corresponding rate blocks; the rate rows carry stiffness, shear,
/// van der Waals and fractional damping terms; the temperature row carries
/// Fourier diffusion plus the variant-specific coupling to the first
/// tube's rotation rate.
pub fn assemble_generator(params: &ModelParameters, n: usize) -> Result<GeneratorMatrix> {
    params.validate()?;
    if n == 0 {
        return Err(Error::invalid("modes", "mode count must be at least 1"));
    }
    let l = params.length;
    let mu = fractional_power_diag(n, l, 1.0)?;
    let d = derivative_matrix(n, l)?;
    let mu_e1 = fractional_power_diag(n, l, params.exponents[0])?;
    let mu_e2 = fractional_power_diag(n, l, params.exponents[1])?;
    let mu_e3 = fractional_power_diag(n, l, params.exponents[2])?;

    let mut b = Array2::<f64>::zeros((9 * n, 9 * n));
    let put_diag = |b: &mut Array2<f64>, row: Block, col: Block, scale: f64, diag: Option<&Array1<f64>>| {
        let (r0, c0) = (row.index() * n, col.index() * n);
        for i in 0..n {
            b[[r0 + i, c0 + i]] += scale * diag.map_or(1.0, |d| d[i]);
        }
    };
    let put_dense = |b: &mut Array2<f64>, row: Block, col: Block, scale: f64, m: &Array2<f64>| {
        let mut view = b.slice_mut(s![block_slice(row, n), block_slice(col, n)]);
        view.scaled_add(scale, m);
    };

    use Block::*;
    // configuration rows: exact identity injections of the rates
    put_diag(&mut b, Deflection1, Deflection1Rate, 1.0, None);
    put_diag(&mut b, Rotation1, Rotation1Rate, 1.0, None);
    put_diag(&mut b, Deflection2, Deflection2Rate, 1.0, None);
    put_diag(&mut b, Rotation2, Rotation2Rate, 1.0, None);

    // first tube, deflection rate
    put_diag(&mut b, Deflection1Rate, Deflection1, -params.kappa1 / params.rho1, Some(&mu));
    put_diag(&mut b, Deflection1Rate, Deflection1, -params.vdw / params.rho1, None);
    put_dense(&mut b, Deflection1Rate, Rotation1, -params.kappa1 / params.rho1, &d);
    put_diag(&mut b, Deflection1Rate, Deflection2, params.vdw / params.rho1, None);
    put_diag(&mut b, Deflection1Rate, Deflection1Rate, -params.gamma1 / params.rho1, Some(&mu_e1));

    // first tube, rotation rate
    put_diag(&mut b, Rotation1Rate, Rotation1, -params.b1 / params.rho2, Some(&mu));
    put_diag(&mut b, Rotation1Rate, Rotation1, -params.kappa1 / params.rho2, None);
    put_dense(&mut b, Rotation1Rate, Deflection1, params.kappa1 / params.rho2, &d);
    put_diag(&mut b, Rotation1Rate, Temperature, params.delta / params.rho2, Some(&mu));

    // second tube, deflection rate
    put_diag(&mut b, Deflection2Rate, Deflection2, -params.kappa2 / params.rho3, Some(&mu));
    put_diag(&mut b, Deflection2Rate, Deflection2, -params.vdw / params.rho3, None);
    put_dense(&mut b, Deflection2Rate, Rotation2, -params.kappa2 / params.rho3, &d);
    put_diag(&mut b, Deflection2Rate, Deflection1, params.vdw / params.rho3, None);
    put_diag(&mut b, Deflection2Rate, Deflection2Rate, -params.gamma2 / params.rho3, Some(&mu_e2));

    // second tube, rotation rate
    put_diag(&mut b, Rotation2Rate, Rotation2, -params.b2 / params.rho4, Some(&mu));
    put_diag(&mut b, Rotation2Rate, Rotation2, -params.kappa2 / params.rho4, None);
    put_dense(&mut b, Rotation2Rate, Deflection2, params.kappa2 / params.rho4, &d);
    put_diag(&mut b, Rotation2Rate, Rotation2Rate, -params.gamma3 / params.rho4, Some(&mu_e3));

    // heat row
    put_diag(&mut b, Temperature, Temperature, -params.conductivity / params.rho5, Some(&mu));
    match params.variant {
        SystemVariant::System01 => {
            put_diag(&mut b, Temperature, Rotation1Rate, -params.beta_thermal / params.rho5, None);
        }
        SystemVariant::System02 => {
            put_diag(&mut b, Temperature, Rotation1Rate, -params.delta / params.rho5, Some(&mu));
        }
    }

    Ok(GeneratorMatrix { params: params.clone(), mode_count: n, matrix: b })
}

impl GeneratorMatrix {
    pub fn params(&self) -> &ModelParameters {
        &self.params
    }

    pub fn variant(&self) -> SystemVariant {
        self.params.variant
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    /// Flat index range of one block, for callers that address the raw matrix.
    pub fn block_range(&self, block: Block) -> std::ops::Range<usize> {
        block_slice(block, self.mode_count)
    }

    fn check_state<T: Scalar<Real = f64>>(&self, state: &StateVector<T>) -> Result<()> {
        if state.mode_count() != self.mode_count {
            return Err(Error::DimensionMismatch(format!(
                "state has {} modes, generator expects {}",
                state.mode_count(),
                self.mode_count
            )));
        }
        Ok(())
    }

    pub fn apply(&self, state: &StateVector<f64>) -> Result<StateVector<f64>> {
        self.check_state(state)?;
        StateVector::from_flat(self.matrix.dot(state.as_flat()), state.length())
    }

    /// Apply the (real) generator to a complex state via its real and
    /// imaginary parts.
    pub fn apply_complex(&self, state: &StateVector<c64>) -> Result<StateVector<c64>> {
        self.check_state(state)?;
        let re = state.as_flat().mapv(|z| z.re);
        let im = state.as_flat().mapv(|z| z.im);
        let yre = self.matrix.dot(&re);
        let yim = self.matrix.dot(&im);
        let y = Array1::from_iter(yre.iter().zip(yim.iter()).map(|(a, b)| c64::new(*a, *b)));
        StateVector::from_flat(y, state.length())
    }
}

/// Build the energy Gram matrix realizing the variant's squared norm:
/// rate blocks weighted by their inertias, bending terms `b_i ||A^{1/2}.||^2`,
/// shear terms `kappa_i ||(.)_x - .||^2` expanded with the derivative
/// coupling, the van der Waals gap term, and the variant's temperature
/// weight (`rho5*delta/beta * ||A^{1/2}theta||^2` resp. `rho5 ||theta||^2`).
pub fn assemble_gram(params: &ModelParameters, n: usize) -> Result<EnergyGram> {
    params.validate()?;
    if n == 0 {
        return Err(Error::invalid("modes", "mode count must be at least 1"));
    }
    let l = params.length;
    let mu = fractional_power_diag(n, l, 1.0)?;
    let d = derivative_matrix(n, l)?;

    let mut g = Array2::<f64>::zeros((9 * n, 9 * n));
    let add_diag = |g: &mut Array2<f64>, b: Block, scale: f64, diag: Option<&Array1<f64>>| {
        let o = b.index() * n;
        for i in 0..n {
            g[[o + i, o + i]] += scale * diag.map_or(1.0, |d| d[i]);
        }
    };

    use Block::*;
    add_diag(&mut g, Deflection1Rate, params.rho1, None);
    add_diag(&mut g, Rotation1Rate, params.rho2, None);
    add_diag(&mut g, Deflection2Rate, params.rho3, None);
    add_diag(&mut g, Rotation2Rate, params.rho4, None);
    add_diag(&mut g, Rotation1, params.b1, Some(&mu));
    add_diag(&mut g, Rotation2, params.b2, Some(&mu));

    // kappa1 ||phi_x - psi||^2 = kappa1 (phi*M phi - 2 Re psi*(D phi) + psi*psi)
    add_diag(&mut g, Deflection1, params.kappa1, Some(&mu));
    add_diag(&mut g, Rotation1, params.kappa1, None);
    {
        let mut gg = g.slice_mut(s![block_slice(Rotation1, n), block_slice(Deflection1, n)]);
        gg.scaled_add(-params.kappa1, &d);
        let dt = d.t().to_owned();
        let mut gg = g.slice_mut(s![block_slice(Deflection1, n), block_slice(Rotation1, n)]);
        gg.scaled_add(-params.kappa1, &dt);
    }
    // kappa2 ||y_x - z||^2
    add_diag(&mut g, Deflection2, params.kappa2, Some(&mu));
    add_diag(&mut g, Rotation2, params.kappa2, None);
    {
        let mut gg = g.slice_mut(s![block_slice(Rotation2, n), block_slice(Deflection2, n)]);
        gg.scaled_add(-params.kappa2, &d);
        let dt = d.t().to_owned();
        let mut gg = g.slice_mut(s![block_slice(Deflection2, n), block_slice(Rotation2, n)]);
        gg.scaled_add(-params.kappa2, &dt);
    }
    // vdw ||y - phi||^2
    add_diag(&mut g, Deflection1, params.vdw, None);
    add_diag(&mut g, Deflection2, params.vdw, None);
    for i in 0..n {
        let (p, y) = (Deflection1.index() * n + i, Deflection2.index() * n + i);
        g[[p, y]] -= params.vdw;
        g[[y, p]] -= params.vdw;
    }
    // temperature weight
    match params.variant {
        SystemVariant::System01 => {
            let w = params.rho5 * params.delta / params.beta_thermal;
            add_diag(&mut g, Temperature, w, Some(&mu));
        }
        SystemVariant::System02 => add_diag(&mut g, Temperature, params.rho5, None),
    }

    let factor = g
        .cholesky(UPLO::Lower)
        .map_err(|e| Error::GramFactorization(format!("{e} (check parameter positivity)")))?;
    Ok(EnergyGram { variant: params.variant, mode_count: n, length: l, matrix: g, factor })
}

impl EnergyGram {
    pub fn variant(&self) -> SystemVariant {
        self.variant
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    /// Lower-triangular Cholesky factor `L` with `G = L L^T`.
    pub fn factor(&self) -> &Array2<f64> {
        &self.factor
    }

    fn check_state<T: Scalar<Real = f64>>(&self, state: &StateVector<T>) -> Result<()> {
        if state.mode_count() != self.mode_count {
            return Err(Error::DimensionMismatch(format!(
                "state has {} modes, Gram expects {}",
                state.mode_count(),
                self.mode_count
            )));
        }
        Ok(())
    }

    /// Squared energy norm `U* G U` (real for Hermitian `G`).
    pub fn norm_sq<T: Scalar<Real = f64>>(&self, state: &StateVector<T>) -> Result<f64> {
        self.check_state(state)?;
        let (re, im) = self.energy_coords_parts(state);
        Ok(re.iter().map(|v| v * v).sum::<f64>() + im.iter().map(|v| v * v).sum::<f64>())
    }

    pub fn norm<T: Scalar<Real = f64>>(&self, state: &StateVector<T>) -> Result<f64> {
        Ok(self.norm_sq(state)?.sqrt())
    }

    /// Real part of the energy inner product `<a, b>_G = b* G a`.
    pub fn inner_re<T: Scalar<Real = f64>>(
        &self,
        a: &StateVector<T>,
        b: &StateVector<T>,
    ) -> Result<f64> {
        self.check_state(a)?;
        self.check_state(b)?;
        let are = a.as_flat().mapv(|z| z.re());
        let aim = a.as_flat().mapv(|z| z.im());
        let gare = self.matrix.dot(&are);
        let gaim = self.matrix.dot(&aim);
        // Re(sum conj(b_i) (Ga)_i) = sum b_re*(Ga)_re + b_im*(Ga)_im
        let mut acc = 0.0;
        for (i, z) in b.as_flat().iter().enumerate() {
            acc += z.re() * gare[i] + z.im() * gaim[i];
        }
        Ok(acc)
    }

    fn energy_coords_parts<T: Scalar<Real = f64>>(
        &self,
        state: &StateVector<T>,
    ) -> (Array1<f64>, Array1<f64>) {
        let re = state.as_flat().mapv(|z| z.re());
        let im = state.as_flat().mapv(|z| z.im());
        let lt = self.factor.t();
        (lt.dot(&re), lt.dot(&im))
    }

    /// Coordinates in the orthonormal energy frame, `x = L^T U`, in which
    /// the energy norm is the Euclidean one.
    pub fn energy_coords(&self, state: &StateVector<f64>) -> Result<Array1<f64>> {
        self.check_state(state)?;
        Ok(self.factor.t().dot(state.as_flat()))
    }

    /// Invert `x = L^T U` by a triangular solve.
    pub fn from_energy_coords(&self, coords: &Array1<f64>) -> Result<StateVector<f64>> {
        if coords.len() != 9 * self.mode_count {
            return Err(Error::DimensionMismatch(format!(
                "coordinate vector length {} does not match 9N = {}",
                coords.len(),
                9 * self.mode_count
            )));
        }
        let lt = self.factor.t().to_owned();
        let u = lt.solve_triangular(UPLO::Upper, Diag::NonUnit, coords)?;
        StateVector::from_flat(u, self.length)
    }

    /// Similarity transform `L^T M L^{-T}` of an operator matrix into the
    /// energy frame. Skew parts of `M` in the `G` metric become exactly
    /// skew-symmetric there.
    pub fn similarity(&self, m: &Array2<f64>) -> Result<Array2<f64>> {
        if m.nrows() != 9 * self.mode_count || m.ncols() != 9 * self.mode_count {
            return Err(Error::DimensionMismatch("operator size does not match Gram".into()));
        }
        // Z = M L^{-T} obtained from L Z^T = M^T
        let mt = m.t().to_owned();
        let zt = self.factor.solve_triangular(UPLO::Lower, Diag::NonUnit, &mt)?;
        Ok(self.factor.t().dot(&zt.t()))
    }
}

/// Spectral evaluation of the dissipation functional
/// `Re <B U, U>_G = -sum_i gamma_i ||A^{e_i/2} rate_i||^2 - (thermal term)`,
/// where the thermal term is `delta*K/beta ||A theta||^2` for System01 and
/// `K ||A^{1/2} theta||^2` for System02. Always `<= 0`.
pub fn dissipation_rate<T: Scalar<Real = f64>>(
    params: &ModelParameters,
    state: &StateVector<T>,
) -> Result<f64> {
    params.validate()?;
    let n = state.mode_count();
    let l = params.length;
    if state.length() != l {
        return Err(Error::DimensionMismatch(format!(
            "state length {} does not match model length {}",
            state.length(),
            l
        )));
    }
    let weighted_sq = |block: Block, sigma: f64| -> Result<f64> {
        let diag = fractional_power_diag(n, l, sigma)?;
        Ok(state
            .block(block)
            .iter()
            .zip(diag.iter())
            .map(|(c, w)| c.square() * w)
            .sum())
    };
    let mut rate = -params.gamma1 * weighted_sq(Block::Deflection1Rate, params.exponents[0])?
        - params.gamma2 * weighted_sq(Block::Deflection2Rate, params.exponents[1])?
        - params.gamma3 * weighted_sq(Block::Rotation2Rate, params.exponents[2])?;
    rate -= match params.variant {
        SystemVariant::System01 => {
            params.delta * params.conductivity / params.beta_thermal
                * weighted_sq(Block::Temperature, 2.0)?
        }
        SystemVariant::System02 => params.conductivity * weighted_sq(Block::Temperature, 1.0)?,
    };
    Ok(rate)
}

/// Solve the stationary problem `-B U = F` on the full `9N x 9N` real system
/// and verify the residual in the energy norm.
pub fn stationary_solve(
    params: &ModelParameters,
    n: usize,
    forcing: &StateVector<f64>,
) -> Result<StateVector<f64>> {
    let gen = assemble_generator(params, n)?;
    let gram = assemble_gram(params, n)?;
    gen.check_state(forcing)?;
    if forcing.is_zero() {
        return StateVector::zero(n, params.length);
    }
    let neg_b = gen.matrix().mapv(|v| -v);
    let u_flat = neg_b
        .solve(forcing.as_flat())
        .map_err(|e| Error::Singular { context: format!("stationary system ({e})") })?;
    let u = StateVector::from_flat(u_flat, params.length)?;
    // ||B U + F||_G / ||F||_G must sit at solver precision
    let bu = gen.apply(&u)?;
    let resid_flat = bu.as_flat() + forcing.as_flat();
    let resid = StateVector::from_flat(resid_flat, params.length)?;
    let rel = gram.norm(&resid)? / gram.norm(forcing)?;
    if rel > 1e-10 {
        return Err(Error::Singular {
            context: format!("stationary solve residual {rel:.3e} exceeds 1e-10"),
        });
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::BLOCKS;
    use approx::assert_relative_eq;
    use ndarray_linalg::EigVals;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn random_params(rng: &mut ChaCha12Rng, variant: SystemVariant) -> ModelParameters {
        let mut p = ModelParameters::defaults(variant);
        for v in [
            &mut p.rho1, &mut p.rho2, &mut p.rho3, &mut p.rho4, &mut p.rho5,
            &mut p.kappa1, &mut p.kappa2, &mut p.b1, &mut p.b2, &mut p.vdw,
            &mut p.gamma1, &mut p.gamma2, &mut p.gamma3, &mut p.delta,
            &mut p.beta_thermal, &mut p.conductivity,
        ] {
            *v = rng.random_range(0.2..3.0);
        }
        p.exponents = [rng.random(), rng.random(), rng.random()];
        p
    }

    fn random_state(rng: &mut ChaCha12Rng, n: usize, l: f64) -> StateVector<c64> {
        let data = Array1::from_iter(
            (0..9 * n).map(|_| c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
        );
        StateVector::from_flat(data, l).unwrap()
    }

    #[test]
    fn generator_image_of_zero_state_is_zero() {
        let p = ModelParameters::defaults(SystemVariant::System01);
        let gen = assemble_generator(&p, 6).unwrap();
        let z = StateVector::<f64>::zero(6, p.length).unwrap();
        assert!(gen.apply(&z).unwrap().is_zero());
    }

    #[test]
    fn configuration_rows_are_identity_injections() {
        let p = ModelParameters::defaults(SystemVariant::System02).with_exponents([0.3, 0.6, 0.9]);
        let gen = assemble_generator(&p, 5).unwrap();
        let m = gen.matrix();
        let n = 5;
        for (cfg, rate) in [
            (Block::Deflection1, Block::Deflection1Rate),
            (Block::Rotation1, Block::Rotation1Rate),
            (Block::Deflection2, Block::Deflection2Rate),
            (Block::Rotation2, Block::Rotation2Rate),
        ] {
            for i in 0..n {
                for j in 0..9 * n {
                    let expected = if j == rate.index() * n + i { 1.0 } else { 0.0 };
                    assert_eq!(m[[cfg.index() * n + i, j]], expected);
                }
            }
        }
    }

    #[test]
    fn decoupled_heat_row_acts_diagonally() {
        // System02 with delta -> 0 limit is modelled by probing the row directly:
        // a pure temperature mode maps to -(K/rho5) mu_1 times itself plus the
        // rotation-rate coupling, which vanishes on this state.
        let p = ModelParameters::defaults(SystemVariant::System02);
        let gen = assemble_generator(&p, 4).unwrap();
        let mut u = StateVector::<f64>::zero(4, p.length).unwrap();
        u.block_mut(Block::Temperature)[0] = 1.0;
        let img = gen.apply(&u).unwrap();
        let mu1 = crate::spectral::eigenvalue(1, p.length).unwrap();
        for b in BLOCKS {
            match b {
                Block::Temperature => {
                    assert_relative_eq!(img.block(b)[0], -p.conductivity / p.rho5 * mu1);
                }
                Block::Rotation1Rate => {
                    // delta * mu_1 / rho2 from the thermal stress term
                    assert_relative_eq!(img.block(b)[0], p.delta / p.rho2 * mu1);
                }
                _ => assert!(img.block(b).iter().all(|v| *v == 0.0)),
            }
        }
    }

    /// Independent hand assembly of the N = 1 generator for unit
    /// coefficients and exponents (0,0,0), System01. At one mode the
    /// derivative coupling vanishes, so each entry follows directly from
    /// the row definitions.
    #[test]
    fn n1_generator_matches_hand_assembly() {
        let p = ModelParameters::defaults(SystemVariant::System01).with_exponents([0.0, 0.0, 0.0]);
        let gen = assemble_generator(&p, 1).unwrap();
        let mu1 = 1.0; // l = pi
        #[rustfmt::skip]
        let expected = ndarray::array![
            // phi   u     psi   v     y     s     z     w     th
            [0.0,  1.0,  0.0,  0.0,  0.0,  0.0,  0.0,  0.0,  0.0],
            [-mu1 - 1.0, -1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
            [0.0,  0.0,  0.0,  1.0,  0.0,  0.0,  0.0,  0.0,  0.0],
            [0.0,  0.0, -mu1 - 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, mu1],
            [0.0,  0.0,  0.0,  0.0,  0.0,  1.0,  0.0,  0.0,  0.0],
            [1.0,  0.0,  0.0,  0.0, -mu1 - 1.0, -1.0, 0.0, 0.0, 0.0],
            [0.0,  0.0,  0.0,  0.0,  0.0,  0.0,  0.0,  1.0,  0.0],
            [0.0,  0.0,  0.0,  0.0,  0.0,  0.0, -mu1 - 1.0, -1.0, 0.0],
            [0.0,  0.0,  0.0, -1.0,  0.0,  0.0,  0.0,  0.0, -mu1],
        ];
        assert_eq!(gen.matrix().shape(), &[9, 9]);
        for i in 0..9 {
            for j in 0..9 {
                assert_relative_eq!(gen.matrix()[[i, j]], expected[[i, j]], max_relative = 1e-15);
            }
        }
        // eigenvalues of the assembled matrix match the hand matrix
        let ev_a = gen.matrix().eigvals().unwrap();
        let ev_b = expected.eigvals().unwrap();
        let mut ra: Vec<(f64, f64)> = ev_a.iter().map(|z| (z.re, z.im)).collect();
        let mut rb: Vec<(f64, f64)> = ev_b.iter().map(|z| (z.re, z.im)).collect();
        let key = |p: &(f64, f64)| (p.0, p.1);
        ra.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        rb.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        for (a, b) in ra.iter().zip(rb.iter()) {
            assert_relative_eq!(a.0, b.0, max_relative = 1e-10, epsilon = 1e-12);
            assert_relative_eq!(a.1, b.1, max_relative = 1e-10, epsilon = 1e-12);
        }
    }

    #[test]
    fn gram_reproduces_single_mode_energy() {
        // System01, l = pi, b1 = kappa1 = 1: a pure first rotation mode has
        // squared norm b1*mu1 + kappa1 = 2
        let p = ModelParameters::defaults(SystemVariant::System01);
        let gram = assemble_gram(&p, 3).unwrap();
        let mut u = StateVector::<f64>::zero(3, p.length).unwrap();
        u.block_mut(Block::Rotation1)[0] = 1.0;
        assert_relative_eq!(gram.norm_sq(&u).unwrap(), 2.0, max_relative = 1e-13);
        let z = StateVector::<f64>::zero(3, p.length).unwrap();
        assert_eq!(gram.norm_sq(&z).unwrap(), 0.0);
    }

    /// Quadrature oracle for the Gram quadratic form: synthesize the nine
    /// fields on a fine grid, evaluate every term of the squared energy
    /// norm by composite Simpson integration of the actual functions, and
    /// compare. Spatial derivatives are synthesized analytically from the
    /// cosine series, so the oracle shares no code path with the Gram
    /// assembly.
    #[test]
    fn gram_matches_term_by_term_quadrature() {
        fn simpson(f: impl Fn(f64) -> f64, l: f64, panels: usize) -> f64 {
            let h = l / panels as f64;
            let mut acc = f(0.0) + f(l);
            for i in 1..panels {
                acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
            }
            acc * h / 3.0
        }
        let synth_deriv = |c: ndarray::ArrayView1<f64>, l: f64, x: f64| -> f64 {
            let scale = (2.0 / l).sqrt();
            c.iter()
                .enumerate()
                .map(|(i, v)| {
                    let k = (i + 1) as f64 * std::f64::consts::PI / l;
                    v * scale * k * (k * x).cos()
                })
                .sum()
        };
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for variant in [SystemVariant::System01, SystemVariant::System02] {
            let mut p = random_params(&mut rng, variant);
            p.length = std::f64::consts::PI;
            let n = 8;
            let gram = assemble_gram(&p, n).unwrap();
            let data = Array1::from_iter((0..9 * n).map(|_| rng.random_range(-1.0f64..1.0)));
            let u = StateVector::from_flat(data, p.length).unwrap();
            let l = p.length;
            let val = |b: Block, x: f64| u.field(b).synthesize(&[x]).unwrap()[0];
            let panels = 20_000;
            let sq = |f: &dyn Fn(f64) -> f64| simpson(|x| f(x) * f(x), l, panels);
            let mut expected = p.rho1 * sq(&|x| val(Block::Deflection1Rate, x))
                + p.rho2 * sq(&|x| val(Block::Rotation1Rate, x))
                + p.rho3 * sq(&|x| val(Block::Deflection2Rate, x))
                + p.rho4 * sq(&|x| val(Block::Rotation2Rate, x))
                + p.b1 * sq(&|x| synth_deriv(u.block(Block::Rotation1), l, x))
                + p.b2 * sq(&|x| synth_deriv(u.block(Block::Rotation2), l, x))
                + p.kappa1
                    * sq(&|x| synth_deriv(u.block(Block::Deflection1), l, x) - val(Block::Rotation1, x))
                + p.kappa2
                    * sq(&|x| synth_deriv(u.block(Block::Deflection2), l, x) - val(Block::Rotation2, x))
                + p.vdw * sq(&|x| val(Block::Deflection2, x) - val(Block::Deflection1, x));
            expected += match variant {
                SystemVariant::System01 => {
                    p.rho5 * p.delta / p.beta_thermal
                        * sq(&|x| synth_deriv(u.block(Block::Temperature), l, x))
                }
                SystemVariant::System02 => p.rho5 * sq(&|x| val(Block::Temperature, x)),
            };
            let got = gram.norm_sq(&u).unwrap();
            assert_relative_eq!(got, expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn gram_factorization_succeeds_for_random_valid_parameters() {
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        for variant in [SystemVariant::System01, SystemVariant::System02] {
            for n in [4usize, 16, 32] {
                for _ in 0..17 {
                    let p = random_params(&mut rng, variant);
                    let gram = assemble_gram(&p, n).unwrap();
                    // L L^T reproduces G
                    let llt = gram.factor().dot(&gram.factor().t());
                    let err = (&llt - gram.matrix()).iter().map(|v| v.abs()).fold(0.0, f64::max);
                    let scale = gram.matrix().iter().map(|v| v.abs()).fold(0.0, f64::max);
                    assert!(err <= 1e-12 * scale);
                }
            }
        }
    }

    #[test]
    fn gram_is_symmetric() {
        let p = ModelParameters::defaults(SystemVariant::System01);
        let gram = assemble_gram(&p, 12).unwrap();
        let g = gram.matrix();
        for i in 0..g.nrows() {
            for j in 0..i {
                assert!((g[[i, j]] - g[[j, i]]).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn dissipation_identity_random_states_and_params() {
        let mut rng = ChaCha12Rng::seed_from_u64(123);
        for variant in [SystemVariant::System01, SystemVariant::System02] {
            for _ in 0..25 {
                let p = random_params(&mut rng, variant);
                let n = 8;
                let gen = assemble_generator(&p, n).unwrap();
                let gram = assemble_gram(&p, n).unwrap();
                let u = random_state(&mut rng, n, p.length);
                let bu = gen.apply_complex(&u).unwrap();
                let lhs = gram.inner_re(&bu, &u).unwrap();
                let rhs = dissipation_rate(&p, &u).unwrap();
                let bound = 1e-10 * (1.0 + gram.norm_sq(&u).unwrap());
                assert!(
                    (lhs - rhs).abs() <= bound,
                    "variant {variant}: |{lhs} - {rhs}| > {bound}"
                );
                assert!(rhs <= 0.0);
            }
        }
    }

    #[test]
    fn dissipation_examples() {
        // all dissipation channels empty
        let p = ModelParameters::defaults(SystemVariant::System01);
        let mut u = StateVector::<f64>::zero(4, p.length).unwrap();
        u.block_mut(Block::Deflection1)[1] = 3.0;
        u.block_mut(Block::Rotation1)[0] = -2.0;
        assert_eq!(dissipation_rate(&p, &u).unwrap(), 0.0);
        // System01, gamma1 = 2, e1 = 1/2, first deflection-rate mode only
        let mut p = ModelParameters::defaults(SystemVariant::System01);
        p.gamma1 = 2.0;
        p.exponents = [0.5, 0.0, 0.0];
        let mut u = StateVector::<f64>::zero(4, p.length).unwrap();
        u.block_mut(Block::Deflection1Rate)[0] = 1.0;
        assert_relative_eq!(dissipation_rate(&p, &u).unwrap(), -2.0, max_relative = 1e-14);
    }

    #[test]
    fn beam_subblock_is_conservative_without_damping_or_coupling() {
        // System02, all gamma = 0, delta ~ 0: for temperature-free states the
        // generator is skew in the energy metric, so Re<BU,U>_G = 0. delta
        // enters only the temperature row and column, which this state never
        // touches, so an exactly zero inner product survives any delta; we
        // still take a small one to match the diagnostic configuration.
        let mut p = ModelParameters::defaults(SystemVariant::System02);
        p.gamma1 = 0.0;
        p.gamma2 = 0.0;
        p.gamma3 = 0.0;
        p.delta = 1e-30;
        let n = 10;
        let gen = assemble_generator(&p, n).unwrap();
        let gram = assemble_gram(&p, n).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..10 {
            let mut u = random_state(&mut rng, n, p.length);
            for v in u.block_mut(Block::Temperature).iter_mut() {
                *v = c64::new(0.0, 0.0);
            }
            let bu = gen.apply_complex(&u).unwrap();
            let re = gram.inner_re(&bu, &u).unwrap();
            let scale = gram.norm_sq(&u).unwrap();
            assert!(re.abs() <= 1e-12 * scale, "Re<BU,U> = {re}, scale {scale}");
        }
    }

    #[test]
    fn stationary_solve_zero_forcing_gives_zero() {
        let p = ModelParameters::defaults(SystemVariant::System02);
        let f = StateVector::<f64>::zero(8, p.length).unwrap();
        let u = stationary_solve(&p, 8, &f).unwrap();
        assert!(u.is_zero());
    }

    #[test]
    fn stationary_solve_random_forcing_has_tiny_residual() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        for variant in [SystemVariant::System01, SystemVariant::System02] {
            let p = random_params(&mut rng, variant);
            let n = 8;
            let data = Array1::from_iter((0..9 * n).map(|_| rng.random_range(-1.0f64..1.0)));
            let f = StateVector::from_flat(data, p.length).unwrap();
            // residual check is built into stationary_solve
            let u = stationary_solve(&p, n, &f).unwrap();
            let gram = assemble_gram(&p, n).unwrap();
            let c = gram.norm(&u).unwrap() / gram.norm(&f).unwrap();
            assert!(c.is_finite() && c > 0.0);
        }
    }

    #[test]
    fn stationary_heat_row_inversion_scalar_case() {
        // Near-decoupled heat block: with delta tiny the temperature block of
        // the solution approaches (rho5 / (K mu_1)) times the forcing mode.
        let mut p = ModelParameters::defaults(SystemVariant::System02);
        p.delta = 1e-12;
        let n = 4;
        let mut f = StateVector::<f64>::zero(n, p.length).unwrap();
        f.block_mut(Block::Temperature)[0] = 1.0;
        let u = stationary_solve(&p, n, &f).unwrap();
        let mu1 = crate::spectral::eigenvalue(1, p.length).unwrap();
        assert_relative_eq!(
            u.block(Block::Temperature)[0],
            p.rho5 / (p.conductivity * mu1),
            max_relative = 1e-9
        );
    }

    #[test]
    fn similarity_transform_matches_direct_product() {
        let p = ModelParameters::defaults(SystemVariant::System02);
        let n = 4;
        let gen = assemble_generator(&p, n).unwrap();
        let gram = assemble_gram(&p, n).unwrap();
        let bt = gram.similarity(gen.matrix()).unwrap();
        // reconstruct L^T B L^{-T} by explicitly inverting the factor
        let lt = gram.factor().t().to_owned();
        let eye = Array2::<f64>::eye(9 * n);
        let lt_inv = lt.solve_triangular(UPLO::Upper, Diag::NonUnit, &eye).unwrap();
        let direct = lt.dot(gen.matrix()).dot(&lt_inv);
        for (a, b) in bt.iter().zip(direct.iter()) {
            assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }
}
