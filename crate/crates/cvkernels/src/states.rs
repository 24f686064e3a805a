//! Continuous-variable states, their loss channel, and phase-space tools.
//!
//! Two representations are kept deliberately separate. Gaussian states carry
//! a mean vector and covariance matrix in quadrature ordering
//! `(q1, p1, q2, p2, ...)`. Number-diagonal and other non-Gaussian states
//! carry a truncated Fock-basis density matrix per mode. Both support the
//! same operations: photon loss, phase-space displacement, pointwise Wigner
//! evaluation, and purity.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fock cutoff used when a non-Gaussian base state is built without an
/// explicitly chosen truncation.
pub const DEFAULT_FOCK_CUTOFF: usize = 32;

/// Largest squeezing magnitude accepted by [`StateSpec::new`]. Beyond this
/// the closed-form kernel denominators overflow long before any state of
/// physical interest is reached.
pub const MAX_SQUEEZING: f64 = 20.0;

const SYMMETRY_TOL: f64 = 1e-12;
const HERMITICITY_TOL: f64 = 1e-12;
const EIGENVALUE_FLOOR: f64 = -1e-10;
const SYMPLECTIC_SLACK: f64 = 1e-9;

/// A classical data point encoded into phase space.
///
/// Coordinates come in pairs `(x1, x2)` per mode; the point displaces mode
/// `j` by the amplitude `alpha_j = x1_j + i x2_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct DataPoint {
    coords: Vec<f64>,
}

impl DataPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Empty("data point has no coordinates".into()));
        }
        if !coords.len().is_multiple_of(2) {
            return Err(Error::param(
                "coords",
                format!("length {} is odd, expected (x1, x2) pairs", coords.len()),
            ));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("coords", "coordinates must be finite"));
        }
        Ok(DataPoint { coords })
    }

    /// The origin of phase space for `modes` modes.
    pub fn origin(modes: usize) -> Self {
        DataPoint {
            coords: vec![0.0; 2 * modes.max(1)],
        }
    }

    pub fn single_mode(x1: f64, x2: f64) -> Result<Self> {
        DataPoint::new(vec![x1, x2])
    }

    pub fn modes(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Displacement amplitude `x1 + i x2` for one mode.
    pub fn amplitude(&self, mode: usize) -> Complex64 {
        Complex64::new(self.coords[2 * mode], self.coords[2 * mode + 1])
    }

    /// Squared Euclidean distance `|x - x'|^2` summed over all coordinates.
    pub fn dist_sq(&self, other: &DataPoint) -> Result<f64> {
        if self.coords.len() != other.coords.len() {
            return Err(Error::DimensionMismatch(format!(
                "points have {} and {} coordinates",
                self.coords.len(),
                other.coords.len()
            )));
        }
        Ok(self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum())
    }

    /// Largest per-mode displacement magnitude `|alpha_j|`.
    pub fn max_abs_amplitude(&self) -> f64 {
        (0..self.modes())
            .map(|j| self.amplitude(j).norm())
            .fold(0.0, f64::max)
    }
}

/// A point in multimode phase space, one complex amplitude per mode.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    amps: Vec<Complex64>,
}

impl PhasePoint {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::Empty("phase-space point has no modes".into()));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::param("amps", "amplitudes must be finite"));
        }
        Ok(PhasePoint { amps })
    }

    pub fn single(alpha: Complex64) -> Self {
        PhasePoint { amps: vec![alpha] }
    }

    pub fn modes(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }
}

/// Base state families the crate knows closed-form kernels for.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum StateFamily {
    /// Vacuum base state; displacement encodes data in a coherent state.
    Coherent,
    /// Squeezed vacuum with squeezing parameter `r`. Positive `r` reduces
    /// the `q` variance to `exp(-2r)/2`.
    Squeezed { r: f64 },
    /// One photon per mode.
    SinglePhoton,
    /// Thermal state with mean photon number `nbar` per mode.
    Thermal { nbar: f64 },
}

impl StateFamily {
    pub fn is_gaussian(&self) -> bool {
        !matches!(self, StateFamily::SinglePhoton)
    }

    pub fn label(&self) -> String {
        match self {
            StateFamily::Coherent => "coherent".into(),
            StateFamily::Squeezed { r } => format!("squeezed(r={r})"),
            StateFamily::SinglePhoton => "single_photon".into(),
            StateFamily::Thermal { nbar } => format!("thermal(nbar={nbar})"),
        }
    }
}

/// A fully specified base state: family, loss-channel transmissivity, and
/// mode count.
///
/// `eta` is the transmissivity of the photon-loss channel applied to the
/// base state before data is encoded: `eta = 1` means no loss and `eta = 0`
/// replaces the state with vacuum. The loss fraction quoted alongside
/// experimental budgets is `1 - eta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSpec {
    pub family: StateFamily,
    pub eta: f64,
    pub modes: usize,
}

impl StateSpec {
    pub fn new(family: StateFamily, eta: f64, modes: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) || !eta.is_finite() {
            return Err(Error::param("eta", format!("{eta} is outside [0, 1]")));
        }
        if modes == 0 {
            return Err(Error::param("modes", "at least one mode is required"));
        }
        match family {
            StateFamily::Squeezed { r } => {
                if !r.is_finite() || r.abs() > MAX_SQUEEZING {
                    return Err(Error::param(
                        "r",
                        format!("{r} is outside [-{MAX_SQUEEZING}, {MAX_SQUEEZING}]"),
                    ));
                }
            }
            StateFamily::Thermal { nbar } => {
                if !nbar.is_finite() || nbar < 0.0 {
                    return Err(Error::param("nbar", format!("{nbar} is negative")));
                }
            }
            StateFamily::Coherent | StateFamily::SinglePhoton => {}
        }
        Ok(StateSpec { family, eta, modes })
    }

    pub fn single_mode(family: StateFamily, eta: f64) -> Result<Self> {
        StateSpec::new(family, eta, 1)
    }

    /// The lossy base state this spec describes, before any data encoding.
    pub fn base_state(&self) -> Result<State> {
        make_state(self)
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) || !eta.is_finite() {
        return Err(Error::param("eta", format!("{eta} is outside [0, 1]")));
    }
    Ok(())
}

/// A Gaussian state: mean vector and covariance matrix over the quadratures
/// `(q1, p1, q2, p2, ...)` with vacuum variance `1/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// Validates dimensions, symmetry, and the uncertainty relation (every
    /// symplectic eigenvalue at least `1/2` up to numerical slack).
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::DimensionMismatch(format!(
                "mean has length {dim}, expected a positive even length"
            )));
        }
        if cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "covariance is {}x{} but the mean has length {dim}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        if mean.iter().any(|v| !v.is_finite()) || cov.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidState("non-finite Gaussian moments".into()));
        }
        let defect = (&cov - cov.transpose()).abs().max();
        if defect > SYMMETRY_TOL {
            return Err(Error::InvalidState(format!(
                "covariance symmetry defect {defect:.3e} exceeds {SYMMETRY_TOL:.0e}"
            )));
        }
        let cov = (&cov + cov.transpose()) * 0.5;
        let state = GaussianState { mean, cov };
        let nu_min = state
            .symplectic_eigenvalues()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if nu_min < 0.5 - SYMPLECTIC_SLACK {
            return Err(Error::InvalidState(format!(
                "smallest symplectic eigenvalue {nu_min:.6} violates the vacuum limit 1/2"
            )));
        }
        Ok(state)
    }

    /// Vacuum in `modes` modes: zero mean, covariance `I/2`.
    pub fn vacuum(modes: usize) -> Self {
        let dim = 2 * modes.max(1);
        GaussianState {
            mean: DVector::zeros(dim),
            cov: DMatrix::identity(dim, dim) * 0.5,
        }
    }

    pub fn modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Symplectic spectrum of the covariance matrix, one value per mode.
    ///
    /// Uses the antisymmetric product `T = S^{1/2} Omega S^{1/2}`, whose
    /// squared singular values are the squared symplectic eigenvalues, each
    /// appearing twice.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        let dim = self.mean.len();
        let eig = self.cov.clone().symmetric_eigen();
        if eig.eigenvalues.iter().any(|&l| l < -SYMMETRY_TOL) {
            return Err(Error::InvalidState(
                "covariance matrix is not positive semidefinite".into(),
            ));
        }
        let sqrt_vals = DVector::from_iterator(dim, eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()));
        let sqrt_cov = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose();
        let mut omega = DMatrix::zeros(dim, dim);
        for j in 0..dim / 2 {
            omega[(2 * j, 2 * j + 1)] = 1.0;
            omega[(2 * j + 1, 2 * j)] = -1.0;
        }
        let t = &sqrt_cov * omega * &sqrt_cov;
        let tt = &t * t.transpose();
        let mut sq: Vec<f64> = tt.symmetric_eigen().eigenvalues.iter().map(|l| l.max(0.0)).collect();
        sq.sort_by(|a, b| a.total_cmp(b));
        // The spectrum of T T^t is doubly degenerate; average each pair.
        let nu = (0..dim / 2)
            .map(|j| (0.5 * (sq[2 * j] + sq[2 * j + 1])).sqrt())
            .collect();
        Ok(nu)
    }

    /// Purity `1 / (2^N sqrt(det S))`.
    pub fn purity(&self) -> f64 {
        let n = self.modes() as i32;
        let det = match self.cov.clone().cholesky() {
            Some(chol) => chol.determinant(),
            None => self.cov.determinant(),
        };
        1.0 / (2f64.powi(n) * det.sqrt())
    }

    /// Sends the state through a loss channel of transmissivity `eta`.
    pub fn apply_loss(&self, eta: f64) -> Result<GaussianState> {
        check_eta(eta)?;
        let dim = self.mean.len();
        let mean = &self.mean * eta.sqrt();
        let cov = &self.cov * eta + DMatrix::identity(dim, dim) * (0.5 * (1.0 - eta));
        Ok(GaussianState { mean, cov })
    }

    /// Displaces the state by the phase-space encoding of `x`.
    pub fn displace(&self, x: &DataPoint) -> Result<GaussianState> {
        if x.modes() != self.modes() {
            return Err(Error::DimensionMismatch(format!(
                "point has {} modes but the state has {}",
                x.modes(),
                self.modes()
            )));
        }
        let mut mean = self.mean.clone();
        let root2 = std::f64::consts::SQRT_2;
        for j in 0..self.modes() {
            mean[2 * j] += root2 * x.coords()[2 * j];
            mean[2 * j + 1] += root2 * x.coords()[2 * j + 1];
        }
        Ok(GaussianState { mean, cov: self.cov.clone() })
    }

    /// Wigner function over amplitude coordinates, normalized so that it
    /// integrates to one against `d^2alpha` per mode.
    pub fn wigner_at(&self, point: &PhasePoint) -> Result<f64> {
        if point.modes() != self.modes() {
            return Err(Error::DimensionMismatch(format!(
                "phase point has {} modes but the state has {}",
                point.modes(),
                self.modes()
            )));
        }
        let dim = self.mean.len();
        let root2 = std::f64::consts::SQRT_2;
        let mut delta = DVector::zeros(dim);
        for (j, a) in point.amps().iter().enumerate() {
            delta[2 * j] = root2 * a.re - self.mean[2 * j];
            delta[2 * j + 1] = root2 * a.im - self.mean[2 * j + 1];
        }
        let chol = self
            .cov
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidState("covariance matrix is not positive definite".into()))?;
        let solved = chol.solve(&delta);
        let quad = delta.dot(&solved);
        let det = chol.determinant();
        let norm = 1.0 / (std::f64::consts::PI.powi(self.modes() as i32) * det.sqrt());
        Ok(norm * (-0.5 * quad).exp())
    }

    /// Largest quadrature variance, used to size integration grids.
    pub fn max_variance(&self) -> f64 {
        self.cov
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(0.0, |acc, &l| acc.max(l))
    }
}

pub(crate) fn ln_factorials(up_to: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(up_to + 1);
    table.push(0.0);
    for n in 1..=up_to {
        table.push(table[n - 1] + (n as f64).ln());
    }
    table
}

/// Generalized Laguerre values `L_k^{(d)}(y)` for `k = 0..len`.
pub(crate) fn laguerre_row(d: usize, y: f64, len: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(len);
    if len == 0 {
        return row;
    }
    let df = d as f64;
    row.push(1.0);
    if len == 1 {
        return row;
    }
    row.push(1.0 + df - y);
    for k in 2..len {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0 + df - y) * row[k - 1] - (kf - 1.0 + df) * row[k - 2]) / kf;
        row.push(next);
    }
    row
}

/// Matrix elements `<m| D(alpha) |n>` of the displacement operator in a
/// truncated Fock basis, built diagonal by diagonal from the Laguerre
/// recurrence.
pub(crate) fn displacement_matrix_impl(alpha: Complex64, cutoff: usize) -> DMatrix<Complex64> {
    let y = alpha.norm_sqr();
    let pref = (-0.5 * y).exp();
    let lnf = ln_factorials(cutoff.saturating_sub(1));
    let mut mat = DMatrix::zeros(cutoff, cutoff);
    let neg_conj = -alpha.conj();
    let mut alpha_pow = Complex64::new(1.0, 0.0);
    let mut neg_conj_pow = Complex64::new(1.0, 0.0);
    for d in 0..cutoff {
        let lag = laguerre_row(d, y, cutoff - d);
        for (n, lag_n) in lag.iter().enumerate() {
            let weight = pref * (0.5 * (lnf[n] - lnf[n + d])).exp() * lag_n;
            mat[(n + d, n)] = alpha_pow * weight;
            mat[(n, n + d)] = neg_conj_pow * weight;
        }
        alpha_pow *= alpha;
        neg_conj_pow *= neg_conj;
    }
    mat
}

/// Single-mode density matrix in a truncated Fock basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    rho: DMatrix<Complex64>,
}

impl FockState {
    /// Validates shape, Hermiticity, and that the trace lies within
    /// `[1 - trunc_tol, 1]` up to rounding, so truncation loss is bounded.
    pub fn new(rho: DMatrix<Complex64>, trunc_tol: f64) -> Result<Self> {
        if rho.nrows() == 0 || rho.nrows() != rho.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "density matrix is {}x{}, expected square and nonempty",
                rho.nrows(),
                rho.ncols()
            )));
        }
        if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite density matrix entries".into()));
        }
        let herm_defect = (&rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm_defect > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "Hermiticity defect {herm_defect:.3e} exceeds {HERMITICITY_TOL:.0e}"
            )));
        }
        let tr = rho.diagonal().sum();
        if tr.im.abs() > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "trace has imaginary part {:.3e}",
                tr.im
            )));
        }
        if tr.re < 1.0 - trunc_tol || tr.re > 1.0 + 1e-10 {
            return Err(Error::InvalidState(format!(
                "trace {:.12} is outside [1 - {trunc_tol:.1e}, 1]",
                tr.re
            )));
        }
        Ok(FockState { rho })
    }

    /// Wraps a matrix without the trace window check, for truncation
    /// probes whose trace deficiency is the quantity under study.
    pub(crate) fn from_matrix_unchecked(rho: DMatrix<Complex64>) -> FockState {
        FockState { rho }
    }

    /// Checks that the spectrum is nonnegative up to numerical slack. This
    /// is an O(cutoff^3) eigendecomposition, kept out of the hot paths and
    /// called where states enter from outside.
    pub fn validate_physical(&self) -> Result<()> {
        let eig = self.rho.clone().symmetric_eigen();
        let min = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        if min < EIGENVALUE_FLOOR {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e} below the {EIGENVALUE_FLOOR:.0e} floor"
            )));
        }
        Ok(())
    }

    pub fn vacuum(cutoff: usize) -> Self {
        FockState::number_state(0, cutoff.max(1))
    }

    /// The Fock state `|n><n|`; `cutoff` must exceed `n`.
    pub fn number_state(n: usize, cutoff: usize) -> Self {
        assert!(n < cutoff, "number state {n} does not fit in cutoff {cutoff}");
        let mut rho = DMatrix::zeros(cutoff, cutoff);
        rho[(n, n)] = Complex64::new(1.0, 0.0);
        FockState { rho }
    }

    pub fn cutoff(&self) -> usize {
        self.rho.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.diagonal().sum().re
    }

    /// Purity `tr rho^2`, exact for the stored truncation.
    pub fn purity(&self) -> f64 {
        self.rho.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Mean photon number of the stored truncation.
    pub fn mean_photons(&self) -> f64 {
        (0..self.cutoff()).map(|n| n as f64 * self.rho[(n, n)].re).sum()
    }

    /// Largest quadrature variance, used to size integration grids.
    pub fn max_variance(&self) -> f64 {
        let nbar = self.mean_photons();
        let mut a_sq = Complex64::new(0.0, 0.0);
        for n in 2..self.cutoff() {
            a_sq += self.rho[(n, n - 2)] * ((n * (n - 1)) as f64).sqrt();
        }
        0.5 + nbar + a_sq.norm()
    }

    /// Grows (zero padding, exact) or shrinks (truncation, revalidated)
    /// the Fock cutoff.
    pub fn resize(&self, cutoff: usize, trunc_tol: f64) -> Result<FockState> {
        if cutoff == 0 {
            return Err(Error::param("cutoff", "cutoff must be at least 1"));
        }
        let old = self.cutoff();
        if cutoff == old {
            return Ok(self.clone());
        }
        let mut rho = DMatrix::zeros(cutoff, cutoff);
        let keep = old.min(cutoff);
        for i in 0..keep {
            for j in 0..keep {
                rho[(i, j)] = self.rho[(i, j)];
            }
        }
        if cutoff > old {
            return Ok(FockState { rho });
        }
        FockState::new(rho, trunc_tol)
    }

    /// Sends the state through a loss channel of transmissivity `eta` by
    /// summing the full Kraus series of the channel.
    pub fn apply_loss(&self, eta: f64) -> Result<FockState> {
        check_eta(eta)?;
        if eta == 1.0 {
            return Ok(self.clone());
        }
        let dim = self.cutoff();
        if eta == 0.0 {
            let mut rho = DMatrix::zeros(dim, dim);
            rho[(0, 0)] = Complex64::new(self.trace(), 0.0);
            return Ok(FockState { rho });
        }
        let lnf = ln_factorials(dim.saturating_sub(1));
        let ln_eta = eta.ln();
        let ln_one_minus = (1.0 - eta).ln();
        // coeff[k][n] is the amplitude the Kraus operator for k lost
        // photons assigns to |n - k><n|.
        let coeff = |k: usize, n: usize| -> f64 {
            let ln_binom = lnf[n] - lnf[k] - lnf[n - k];
            (0.5 * (ln_binom + k as f64 * ln_one_minus + (n - k) as f64 * ln_eta)).exp()
        };
        let mut out = DMatrix::zeros(dim, dim);
        for k in 0..dim {
            for m in 0..dim - k {
                let cm = coeff(k, m + k);
                for n in 0..dim - k {
                    out[(m, n)] += self.rho[(m + k, n + k)] * (cm * coeff(k, n + k));
                }
            }
        }
        Ok(FockState { rho: out })
    }

    /// Conjugates the state by the displacement operator for `alpha`.
    pub fn displaced(&self, alpha: Complex64) -> FockState {
        if alpha == Complex64::new(0.0, 0.0) {
            return self.clone();
        }
        let u = displacement_matrix_impl(alpha, self.cutoff());
        let rho = &u * &self.rho * u.adjoint();
        FockState { rho }
    }

    /// Wigner function over amplitude coordinates at a single point,
    /// normalized to integrate to one against `d^2alpha`.
    pub fn wigner_at(&self, alpha: Complex64) -> f64 {
        let dim = self.cutoff();
        let y = 4.0 * alpha.norm_sqr();
        let envelope = std::f64::consts::FRAC_2_PI * (-2.0 * alpha.norm_sqr()).exp();
        let lnf = ln_factorials(dim.saturating_sub(1));
        let two_conj = 2.0 * alpha.conj();
        let mut total = 0.0;
        let diag = laguerre_row(0, y, dim);
        let mut sign = 1.0;
        for (n, lag) in diag.iter().enumerate() {
            total += sign * self.rho[(n, n)].re * lag;
            sign = -sign;
        }
        let mut pow = Complex64::new(1.0, 0.0);
        for d in 1..dim {
            pow *= two_conj;
            let lag = laguerre_row(d, y, dim - d);
            let mut partial = Complex64::new(0.0, 0.0);
            let mut sign = 1.0;
            for (n, lag_n) in lag.iter().enumerate() {
                let weight = sign * (0.5 * (lnf[n] - lnf[n + d])).exp() * lag_n;
                partial += self.rho[(n + d, n)] * weight;
                sign = -sign;
            }
            total += 2.0 * (pow * partial).re;
        }
        envelope * total
    }

    /// Overlap `tr(rho sigma)` with another Fock state of the same cutoff.
    pub fn overlap(&self, other: &FockState) -> Result<f64> {
        if self.cutoff() != other.cutoff() {
            return Err(Error::DimensionMismatch(format!(
                "cutoffs {} and {} differ",
                self.cutoff(),
                other.cutoff()
            )));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.cutoff() {
            for j in 0..self.cutoff() {
                acc += self.rho[(i, j)] * other.rho[(j, i)];
            }
        }
        Ok(acc.re)
    }
}

/// A product of independent single-mode Fock states.
#[derive(Clone, Debug, PartialEq)]
pub struct FockProduct {
    modes: Vec<FockState>,
}

impl FockProduct {
    pub fn new(modes: Vec<FockState>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Empty("product state has no modes".into()));
        }
        Ok(FockProduct { modes })
    }

    pub fn modes(&self) -> usize {
        self.modes.len()
    }

    pub fn mode(&self, j: usize) -> &FockState {
        &self.modes[j]
    }

    pub fn purity(&self) -> f64 {
        self.modes.iter().map(FockState::purity).product()
    }

    pub fn apply_loss(&self, eta: f64) -> Result<FockProduct> {
        let modes = self
            .modes
            .iter()
            .map(|m| m.apply_loss(eta))
            .collect::<Result<Vec<_>>>()?;
        Ok(FockProduct { modes })
    }

    pub fn displace(&self, x: &DataPoint) -> Result<FockProduct> {
        if x.modes() != self.modes() {
            return Err(Error::DimensionMismatch(format!(
                "point has {} modes but the state has {}",
                x.modes(),
                self.modes()
            )));
        }
        let modes = self
            .modes
            .iter()
            .enumerate()
            .map(|(j, m)| m.displaced(x.amplitude(j)))
            .collect();
        Ok(FockProduct { modes })
    }

    pub fn wigner_at(&self, point: &PhasePoint) -> Result<f64> {
        if point.modes() != self.modes() {
            return Err(Error::DimensionMismatch(format!(
                "phase point has {} modes but the state has {}",
                point.modes(),
                self.modes()
            )));
        }
        Ok(self
            .modes
            .iter()
            .zip(point.amps())
            .map(|(m, &a)| m.wigner_at(a))
            .product())
    }

    pub fn overlap(&self, other: &FockProduct) -> Result<f64> {
        if self.modes() != other.modes() {
            return Err(Error::DimensionMismatch(format!(
                "products have {} and {} modes",
                self.modes(),
                other.modes()
            )));
        }
        let mut acc = 1.0;
        for (a, b) in self.modes.iter().zip(&other.modes) {
            acc *= a.overlap(b)?;
        }
        Ok(acc)
    }

    pub fn max_variance(&self) -> f64 {
        self.modes.iter().map(FockState::max_variance).fold(0.0, f64::max)
    }
}

/// A state in whichever representation suits it.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Gaussian(GaussianState),
    Fock(FockProduct),
}

impl State {
    pub fn modes(&self) -> usize {
        match self {
            State::Gaussian(g) => g.modes(),
            State::Fock(f) => f.modes(),
        }
    }

    pub fn purity(&self) -> f64 {
        match self {
            State::Gaussian(g) => g.purity(),
            State::Fock(f) => f.purity(),
        }
    }

    pub fn apply_loss(&self, eta: f64) -> Result<State> {
        Ok(match self {
            State::Gaussian(g) => State::Gaussian(g.apply_loss(eta)?),
            State::Fock(f) => State::Fock(f.apply_loss(eta)?),
        })
    }

    pub fn displace(&self, x: &DataPoint) -> Result<State> {
        Ok(match self {
            State::Gaussian(g) => State::Gaussian(g.displace(x)?),
            State::Fock(f) => State::Fock(f.displace(x)?),
        })
    }

    pub fn wigner_at(&self, point: &PhasePoint) -> Result<f64> {
        match self {
            State::Gaussian(g) => g.wigner_at(point),
            State::Fock(f) => f.wigner_at(point),
        }
    }

    pub fn max_variance(&self) -> f64 {
        match self {
            State::Gaussian(g) => g.max_variance(),
            State::Fock(f) => f.max_variance(),
        }
    }
}

/// Builds the lossy base state for a spec. Loss acts on the base state;
/// data displacements come afterwards.
pub fn make_state(spec: &StateSpec) -> Result<State> {
    StateSpec::new(spec.family, spec.eta, spec.modes)?;
    let dim = 2 * spec.modes;
    match spec.family {
        StateFamily::Coherent => {
            let base = GaussianState::vacuum(spec.modes);
            Ok(State::Gaussian(base.apply_loss(spec.eta)?))
        }
        StateFamily::Squeezed { r } => {
            let mut cov = DMatrix::zeros(dim, dim);
            for j in 0..spec.modes {
                cov[(2 * j, 2 * j)] = 0.5 * (-2.0 * r).exp();
                cov[(2 * j + 1, 2 * j + 1)] = 0.5 * (2.0 * r).exp();
            }
            let base = GaussianState::new(DVector::zeros(dim), cov)?;
            Ok(State::Gaussian(base.apply_loss(spec.eta)?))
        }
        StateFamily::Thermal { nbar } => {
            let cov = DMatrix::identity(dim, dim) * (nbar + 0.5);
            let base = GaussianState::new(DVector::zeros(dim), cov)?;
            Ok(State::Gaussian(base.apply_loss(spec.eta)?))
        }
        StateFamily::SinglePhoton => {
            let mode = FockState::number_state(1, DEFAULT_FOCK_CUTOFF).apply_loss(spec.eta)?;
            mode.validate_physical()?;
            let modes = vec![mode; spec.modes];
            Ok(State::Fock(FockProduct::new(modes)?))
        }
    }
}

/// Loss channel of transmissivity `eta` applied to any state.
pub fn apply_loss(state: &State, eta: f64) -> Result<State> {
    state.apply_loss(eta)
}

/// Displacement encoding of `x` applied to any state.
pub fn displace(state: &State, x: &DataPoint) -> Result<State> {
    state.displace(x)
}

/// Wigner function of any state at one phase-space point.
pub fn wigner_at(state: &State, point: &PhasePoint) -> Result<f64> {
    state.wigner_at(point)
}

/// Purity `tr rho^2` of any state.
pub fn purity(state: &State) -> f64 {
    state.purity()
}
