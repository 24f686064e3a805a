//! First-principles numeric evaluation of every kernel the crate offers in
//! closed form.
//!
//! Three independent routes are provided. The Fock route builds the lossy
//! base state as a truncated density matrix, displaces it with exact
//! displacement-operator matrix elements, and takes normalized traces. The
//! Wigner route samples phase-space quasiprobability functions on a
//! trapezoid grid and integrates their product. The Gaussian moment route
//! evaluates the closed overlap formula for mean vectors and covariance
//! matrices. None of them shares a formula with the closed-form kernels
//! they are used to cross-check.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::states::{
    self, make_state, DataPoint, FockProduct, FockState, PhasePoint, State, StateFamily, StateSpec,
};

/// Hard ceiling for the automatic Fock cutoff search.
pub const DEFAULT_CUTOFF_LIMIT: usize = 256;

/// Convergence tolerance used when a caller does not supply one.
pub const DEFAULT_ORACLE_TOL: f64 = 1e-8;

/// Points per axis of an automatically sized phase-space grid.
pub const DEFAULT_GRID_RESOLUTION: usize = 257;

/// Smallest accepted grid resolution. Odd counts are required so that a
/// nested grid of alternate nodes exists for error estimation.
pub const MIN_GRID_RESOLUTION: usize = 17;

const BOUNDARY_TOL: f64 = 1e-12;

/// Matrix elements `<m| D(alpha) |n>` of the displacement operator in a
/// Fock basis truncated at `cutoff` levels.
pub fn displacement_matrix(alpha: Complex64, cutoff: usize) -> Result<DMatrix<Complex64>> {
    if cutoff == 0 {
        return Err(Error::param("cutoff", "cutoff must be at least 1"));
    }
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(Error::param("alpha", "displacement must be finite"));
    }
    Ok(states::displacement_matrix_impl(alpha, cutoff))
}

/// Lossy base state of a spec built directly in the Fock basis, without
/// the trace window applied.
fn raw_lossy_mode(family: StateFamily, eta: f64, cutoff: usize) -> Result<FockState> {
    let mut rho = DMatrix::zeros(cutoff, cutoff);
    match family {
        StateFamily::Coherent => {
            rho[(0, 0)] = Complex64::new(1.0, 0.0);
        }
        StateFamily::SinglePhoton => {
            if cutoff > 1 {
                rho[(1, 1)] = Complex64::new(1.0, 0.0);
            }
        }
        StateFamily::Squeezed { r } => {
            let amps = squeezed_amplitudes(r, cutoff);
            for i in 0..cutoff {
                for j in 0..cutoff {
                    rho[(i, j)] = Complex64::new(amps[i] * amps[j], 0.0);
                }
            }
        }
        StateFamily::Thermal { nbar } => {
            let ratio = nbar / (1.0 + nbar);
            let mut p = 1.0 / (1.0 + nbar);
            for n in 0..cutoff {
                rho[(n, n)] = Complex64::new(p, 0.0);
                p *= ratio;
            }
        }
    }
    FockState::from_matrix_unchecked(rho).apply_loss(eta)
}

/// Number-basis amplitudes of squeezed vacuum, nonzero on even levels.
fn squeezed_amplitudes(r: f64, cutoff: usize) -> Vec<f64> {
    let mut amps = vec![0.0; cutoff];
    if cutoff == 0 {
        return amps;
    }
    let mut t = 1.0 / r.cosh().sqrt();
    amps[0] = t;
    let mut n = 0usize;
    while 2 * (n + 1) < cutoff {
        let nf = n as f64;
        t *= -r.tanh() * ((2.0 * nf + 1.0) * (2.0 * nf + 2.0)).sqrt() / (2.0 * (nf + 1.0));
        amps[2 * (n + 1)] = t;
        n += 1;
    }
    amps
}

/// Builds the lossy base state of `spec` in a truncated Fock basis,
/// checking that the truncation keeps at least `1 - trunc_tol` of the
/// trace and a physical spectrum.
pub fn fock_base(spec: &StateSpec, cutoff: usize, trunc_tol: f64) -> Result<FockProduct> {
    StateSpec::new(spec.family, spec.eta, spec.modes)?;
    if cutoff == 0 {
        return Err(Error::param("cutoff", "cutoff must be at least 1"));
    }
    let raw = raw_lossy_mode(spec.family, spec.eta, cutoff)?;
    let mode = FockState::new(raw.matrix().clone(), trunc_tol)?;
    mode.validate_physical()?;
    FockProduct::new(vec![mode; spec.modes])
}

fn displaced_metric(family: StateFamily, eta: f64, cutoff: usize, disp: f64) -> Result<(f64, f64)> {
    let lossy = raw_lossy_mode(family, eta, cutoff)?;
    let displaced = lossy.displaced(Complex64::new(disp, 0.0));
    Ok((displaced.trace(), displaced.purity()))
}

fn metric_close(a: (f64, f64), b: (f64, f64), tol: f64) -> bool {
    (a.0 - b.0).abs() <= tol && (a.1 - b.1).abs() <= tol
}

/// Smallest Fock cutoff at which the lossy, displaced base state has
/// stopped drifting, searched under the default ceiling of
/// [`DEFAULT_CUTOFF_LIMIT`].
pub fn choose_cutoff(spec: &StateSpec, max_displacement: f64, tol: f64) -> Result<usize> {
    choose_cutoff_with_limit(spec, max_displacement, tol, DEFAULT_CUTOFF_LIMIT)
}

/// Like [`choose_cutoff`] with an explicit ceiling.
///
/// Doubles the cutoff until both the trace and the purity of the displaced
/// lossy base move by at most `tol` under a further doubling, then binary
/// searches the smallest cutoff matching the converged metric.
pub fn choose_cutoff_with_limit(
    spec: &StateSpec,
    max_displacement: f64,
    tol: f64,
    limit: usize,
) -> Result<usize> {
    StateSpec::new(spec.family, spec.eta, spec.modes)?;
    if !max_displacement.is_finite() || max_displacement < 0.0 {
        return Err(Error::param(
            "max_displacement",
            format!("{max_displacement} is not a finite nonnegative number"),
        ));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::param("tol", format!("{tol} is not a positive tolerance")));
    }
    if limit == 0 {
        return Err(Error::param("limit", "cutoff limit must be at least 1"));
    }
    let mut memo: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
    let mut metric = |d: usize| -> Result<(f64, f64)> {
        if let Some(&m) = memo.get(&d) {
            return Ok(m);
        }
        let m = displaced_metric(spec.family, spec.eta, d, max_displacement)?;
        memo.insert(d, m);
        Ok(m)
    };

    let mut d = 1usize;
    let mut prev = metric(1)?;
    let converged_at = loop {
        let next = match d.checked_mul(2) {
            Some(n) if n <= limit => n,
            _ => {
                return Err(Error::CutoffExceeded {
                    limit,
                    reason: format!(
                        "state {} with displacement {max_displacement} is still drifting \
                         (trace {:.6}, purity {:.6} at cutoff {d})",
                        spec.family.label(),
                        prev.0,
                        prev.1
                    ),
                });
            }
        };
        let cur = metric(next)?;
        if metric_close(prev, cur, tol) {
            break next;
        }
        d = next;
        prev = cur;
    };

    let reference = metric(converged_at)?;
    let mut lo = 0usize;
    let mut hi = converged_at;
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if metric_close(metric(mid)?, reference, tol) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Reusable Fock-basis kernel evaluator: the cutoff search and the lossy
/// base state are computed once and shared across evaluations.
pub struct NumericEvaluator {
    spec: StateSpec,
    base: FockProduct,
    max_displacement: f64,
    cutoff: usize,
}

impl NumericEvaluator {
    /// Chooses a cutoff for displacements up to `max_displacement` and
    /// builds the lossy base state at that truncation.
    pub fn new(spec: &StateSpec, max_displacement: f64, tol: f64) -> Result<Self> {
        Self::with_limit(spec, max_displacement, tol, DEFAULT_CUTOFF_LIMIT)
    }

    pub fn with_limit(
        spec: &StateSpec,
        max_displacement: f64,
        tol: f64,
        limit: usize,
    ) -> Result<Self> {
        let cutoff = choose_cutoff_with_limit(spec, max_displacement, tol, limit)?;
        let trunc_tol = (10.0 * tol).clamp(1e-10, 1e-3);
        let base = fock_base(spec, cutoff, trunc_tol)?;
        Ok(NumericEvaluator {
            spec: *spec,
            base,
            max_displacement,
            cutoff,
        })
    }

    /// Uses a caller-chosen cutoff; displacements are then unconstrained
    /// and accuracy is the caller's responsibility.
    pub fn with_cutoff(spec: &StateSpec, cutoff: usize, trunc_tol: f64) -> Result<Self> {
        let base = fock_base(spec, cutoff, trunc_tol)?;
        Ok(NumericEvaluator {
            spec: *spec,
            base,
            max_displacement: f64::INFINITY,
            cutoff,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn spec(&self) -> &StateSpec {
        &self.spec
    }

    /// Normalized overlap kernel between the encodings of two points,
    /// computed entirely in the Fock basis.
    pub fn eval(&self, x: &DataPoint, x_prime: &DataPoint) -> Result<f64> {
        let reach = x.max_abs_amplitude().max(x_prime.max_abs_amplitude());
        if reach > self.max_displacement * (1.0 + 1e-12) + 1e-12 {
            return Err(Error::param(
                "x",
                format!(
                    "displacement {reach:.4} exceeds the {:.4} this evaluator's cutoff was \
                     converged for",
                    self.max_displacement
                ),
            ));
        }
        let rho_x = self.base.displace(x)?;
        let rho_xp = self.base.displace(x_prime)?;
        let overlap = rho_x.overlap(&rho_xp)?;
        let norm = (rho_x.purity() * rho_xp.purity()).sqrt();
        Ok(overlap / norm)
    }
}

/// One-shot Fock-basis kernel evaluation with automatic cutoff selection
/// at the default tolerance.
pub fn kernel_numeric(spec: &StateSpec, x: &DataPoint, x_prime: &DataPoint) -> Result<f64> {
    kernel_numeric_with(spec, x, x_prime, DEFAULT_ORACLE_TOL, DEFAULT_CUTOFF_LIMIT)
}

/// One-shot Fock-basis kernel evaluation with explicit tolerance and
/// cutoff ceiling.
pub fn kernel_numeric_with(
    spec: &StateSpec,
    x: &DataPoint,
    x_prime: &DataPoint,
    tol: f64,
    limit: usize,
) -> Result<f64> {
    let reach = x.max_abs_amplitude().max(x_prime.max_abs_amplitude());
    let eval = NumericEvaluator::with_limit(spec, reach, tol, limit)?;
    eval.eval(x, x_prime)
}

/// Normalized overlap kernel evaluated from Gaussian moments alone.
/// Available only for families whose base state is Gaussian.
pub fn gaussian_overlap_kernel(spec: &StateSpec, x: &DataPoint, x_prime: &DataPoint) -> Result<f64> {
    let state = make_state(spec)?;
    let State::Gaussian(base) = state else {
        return Err(Error::Unsupported(format!(
            "{} has no Gaussian moment description",
            spec.family.label()
        )));
    };
    let a = base.displace(x)?;
    let b = base.displace(x_prime)?;
    let overlap = gaussian_overlap(&a, &b)?;
    Ok(overlap / (a.purity() * b.purity()).sqrt())
}

/// Overlap `tr(rho_a rho_b)` of two Gaussian states from their moments.
fn gaussian_overlap(a: &states::GaussianState, b: &states::GaussianState) -> Result<f64> {
    let sum = a.cov() + b.cov();
    let delta = b.mean() - a.mean();
    let chol = sum
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidState("covariance sum is not positive definite".into()))?;
    let quad = delta.dot(&chol.solve(&delta));
    Ok((-0.5 * quad).exp() / chol.determinant().sqrt())
}

/// Uniform trapezoid grid over the square `[-L, L]^2` in one mode's
/// phase plane, with amplitude coordinates `alpha = a + i b`.
#[derive(Clone, Debug)]
pub struct PhaseGrid {
    half_width: f64,
    axis: Vec<f64>,
    weights: Vec<f64>,
}

fn trapezoid_weights(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    let h = (axis[n - 1] - axis[0]) / (n - 1) as f64;
    let mut w = vec![h; n];
    w[0] = 0.5 * h;
    w[n - 1] = 0.5 * h;
    w
}

impl PhaseGrid {
    /// `resolution` must be odd and at least [`MIN_GRID_RESOLUTION`] so
    /// the alternate-node subgrid used for error estimates is valid.
    pub fn new(half_width: f64, resolution: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::param(
                "half_width",
                format!("{half_width} is not a positive width"),
            ));
        }
        if resolution < MIN_GRID_RESOLUTION || resolution.is_multiple_of(2) {
            return Err(Error::param(
                "resolution",
                format!("{resolution} must be odd and at least {MIN_GRID_RESOLUTION}"),
            ));
        }
        let h = 2.0 * half_width / (resolution - 1) as f64;
        let axis: Vec<f64> = (0..resolution).map(|i| -half_width + h * i as f64).collect();
        let weights = trapezoid_weights(&axis);
        Ok(PhaseGrid {
            half_width,
            axis,
            weights,
        })
    }

    /// Sizes a grid for a spec's lossy base state displaced by up to
    /// `max_displacement`: wide enough that the Wigner function decays to
    /// numerical noise before the boundary.
    pub fn for_spec(spec: &StateSpec, max_displacement: f64) -> Result<Self> {
        if !max_displacement.is_finite() || max_displacement < 0.0 {
            return Err(Error::param(
                "max_displacement",
                format!("{max_displacement} is not a finite nonnegative number"),
            ));
        }
        let state = make_state(spec)?;
        // Quadrature variance over (q, p) maps to amplitude-plane variance
        // through the factor 1/2.
        let sigma_alpha = (state.max_variance() / 2.0).sqrt();
        let half_width = max_displacement + 6.0 * sigma_alpha + 1.5;
        PhaseGrid::new(half_width, DEFAULT_GRID_RESOLUTION)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn resolution(&self) -> usize {
        self.axis.len()
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    fn sample(&self, state: &State) -> Result<Vec<f64>> {
        let n = self.axis.len();
        let mut values = Vec::with_capacity(n * n);
        for &re in &self.axis {
            for &im in &self.axis {
                let point = PhasePoint::single(Complex64::new(re, im));
                values.push(state.wigner_at(&point)?);
            }
        }
        Ok(values)
    }

    fn boundary_max(&self, values: &[f64]) -> f64 {
        let n = self.axis.len();
        let mut max = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                    max = max.max(values[i * n + j].abs());
                }
            }
        }
        max
    }

    /// Weighted product integral of two sampled functions over the grid.
    fn product_integral(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.axis.len();
        let mut terms = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let idx = i * n + j;
                terms.push(self.weights[i] * self.weights[j] * a[idx] * b[idx]);
            }
        }
        pairwise_sum(&terms)
    }

    /// Same integral on the alternate-node subgrid, reusing the samples.
    fn coarse_product_integral(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.axis.len();
        let coarse_axis: Vec<f64> = self.axis.iter().copied().step_by(2).collect();
        let w = trapezoid_weights(&coarse_axis);
        let m = coarse_axis.len();
        let mut terms = Vec::with_capacity(m * m);
        for (ci, wi) in w.iter().enumerate() {
            for (cj, wj) in w.iter().enumerate() {
                let idx = (2 * ci) * n + 2 * cj;
                terms.push(wi * wj * a[idx] * b[idx]);
            }
        }
        pairwise_sum(&terms)
    }
}

fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// A kernel value from the Wigner quadrature route together with an
/// internal error estimate.
#[derive(Clone, Copy, Debug)]
pub struct OverlapKernel {
    pub value: f64,
    /// Difference against the alternate-node subgrid, a conservative
    /// estimate of the quadrature error.
    pub quadrature_tolerance: f64,
}

/// Kernel between two encoded points computed by integrating the product
/// of Wigner functions over a phase-space grid. Single-mode specs only.
pub fn kernel_via_overlap(
    spec: &StateSpec,
    x: &DataPoint,
    x_prime: &DataPoint,
    grid: &PhaseGrid,
) -> Result<OverlapKernel> {
    if spec.modes != 1 {
        return Err(Error::Unsupported(
            "the quadrature route integrates a single mode's phase plane".into(),
        ));
    }
    let base = make_state(spec)?;
    let rho_x = base.displace(x)?;
    let rho_xp = base.displace(x_prime)?;
    let w_x = grid.sample(&rho_x)?;
    let w_xp = grid.sample(&rho_xp)?;
    for (name, values) in [("first", &w_x), ("second", &w_xp)] {
        let edge = grid.boundary_max(values);
        if edge > BOUNDARY_TOL {
            return Err(Error::GridTooSmall(format!(
                "the {name} state's Wigner function reaches {edge:.3e} at the boundary \
                 (limit {BOUNDARY_TOL:.0e}); widen the grid"
            )));
        }
    }
    let cross = grid.product_integral(&w_x, &w_xp);
    let norm_x = grid.product_integral(&w_x, &w_x);
    let norm_xp = grid.product_integral(&w_xp, &w_xp);
    if norm_x <= 0.0 || norm_xp <= 0.0 {
        return Err(Error::GridTooSmall(
            "a Wigner norm integral vanished on this grid".into(),
        ));
    }
    let value = cross / (norm_x * norm_xp).sqrt();
    let coarse_cross = grid.coarse_product_integral(&w_x, &w_xp);
    let coarse_x = grid.coarse_product_integral(&w_x, &w_x);
    let coarse_xp = grid.coarse_product_integral(&w_xp, &w_xp);
    let coarse_value = if coarse_x > 0.0 && coarse_xp > 0.0 {
        coarse_cross / (coarse_x * coarse_xp).sqrt()
    } else {
        f64::NAN
    };
    let estimate = (value - coarse_value).abs();
    let quadrature_tolerance = if estimate.is_finite() {
        estimate.max(1e-15)
    } else {
        f64::INFINITY
    };
    Ok(OverlapKernel {
        value,
        quadrature_tolerance,
    })
}

/// The two sides of the pointwise phase-space product inequality obeyed
/// by every classical-mixture state, and their difference.
///
/// `margin < 0` exhibits nonclassicality of the base state.
#[derive(Clone, Debug)]
pub struct InequalityMargin {
    pub alpha: PhasePoint,
    pub alpha_prime: PhasePoint,
    /// `W(alpha) W(alpha')`.
    pub left: f64,
    /// `exp(-|alpha - alpha'|^2) W((alpha + alpha') / 2)^2`.
    pub right: f64,
    pub margin: f64,
    pub dist_sq: f64,
}

/// Evaluates the product inequality for a spec's lossy base state at a
/// pair of phase-space points.
pub fn check_phase_space_inequality(
    spec: &StateSpec,
    alpha: &PhasePoint,
    alpha_prime: &PhasePoint,
) -> Result<InequalityMargin> {
    let state = make_state(spec)?;
    if alpha.modes() != alpha_prime.modes() {
        return Err(Error::DimensionMismatch(format!(
            "phase points have {} and {} modes",
            alpha.modes(),
            alpha_prime.modes()
        )));
    }
    let mid = PhasePoint::new(
        alpha
            .amps()
            .iter()
            .zip(alpha_prime.amps())
            .map(|(a, b)| 0.5 * (a + b))
            .collect(),
    )?;
    let w_a = state.wigner_at(alpha)?;
    let w_b = state.wigner_at(alpha_prime)?;
    let w_mid = state.wigner_at(&mid)?;
    let dist_sq: f64 = alpha
        .amps()
        .iter()
        .zip(alpha_prime.amps())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    let left = w_a * w_b;
    let right = (-dist_sq).exp() * w_mid * w_mid;
    Ok(InequalityMargin {
        alpha: alpha.clone(),
        alpha_prime: alpha_prime.clone(),
        left,
        right,
        margin: left - right,
        dist_sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(family: StateFamily, eta: f64) -> StateSpec {
        StateSpec::single_mode(family, eta).unwrap()
    }

    fn pt(x1: f64, x2: f64) -> DataPoint {
        DataPoint::single_mode(x1, x2).unwrap()
    }

    #[test]
    fn cutoff_search_needs_one_level_for_vacuum() {
        let s = spec(StateFamily::Coherent, 1.0);
        assert_eq!(choose_cutoff(&s, 0.0, 1e-10).unwrap(), 1);
    }

    #[test]
    fn cutoff_search_finds_two_levels_for_an_undisplaced_photon() {
        let s = spec(StateFamily::SinglePhoton, 1.0);
        assert_eq!(choose_cutoff(&s, 0.0, 1e-10).unwrap(), 2);
    }

    #[test]
    fn cutoff_search_reports_exhaustion() {
        let s = spec(StateFamily::SinglePhoton, 1.0);
        let err = choose_cutoff_with_limit(&s, 3.0, 1e-10, 4).unwrap_err();
        assert!(matches!(err, Error::CutoffExceeded { limit: 4, .. }));
    }

    #[test]
    fn numeric_kernel_matches_the_coherent_closed_form() {
        let s = spec(StateFamily::Coherent, 1.0);
        let x = pt(0.4, -0.2);
        let y = pt(-0.3, 0.5);
        let k = kernel_numeric(&s, &x, &y).unwrap();
        let expect = (-x.dist_sq(&y).unwrap()).exp();
        assert_relative_eq!(k, expect, epsilon = 1e-8);
    }

    #[test]
    fn numeric_kernel_is_one_on_the_diagonal() {
        for family in [
            StateFamily::Coherent,
            StateFamily::SinglePhoton,
            StateFamily::Squeezed { r: 0.6 },
            StateFamily::Thermal { nbar: 0.7 },
        ] {
            let s = spec(family, 0.7);
            let x = pt(0.8, -0.4);
            let k = kernel_numeric(&s, &x, &x).unwrap();
            assert_relative_eq!(k, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn gaussian_route_matches_the_coherent_closed_form() {
        let s = spec(StateFamily::Coherent, 1.0);
        let x = pt(0.9, 0.1);
        let y = pt(-0.2, -0.6);
        let k = gaussian_overlap_kernel(&s, &x, &y).unwrap();
        assert_relative_eq!(k, (-x.dist_sq(&y).unwrap()).exp(), epsilon = 1e-13);
    }

    #[test]
    fn gaussian_route_rejects_single_photon_states() {
        let s = spec(StateFamily::SinglePhoton, 1.0);
        let err = gaussian_overlap_kernel(&s, &pt(0.0, 0.0), &pt(0.1, 0.0)).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }

    #[test]
    fn quadrature_route_matches_the_coherent_closed_form() {
        let s = spec(StateFamily::Coherent, 1.0);
        let x = pt(0.5, 0.0);
        let y = pt(-0.5, 0.3);
        let grid = PhaseGrid::for_spec(&s, 1.0).unwrap();
        let k = kernel_via_overlap(&s, &x, &y, &grid).unwrap();
        let expect = (-x.dist_sq(&y).unwrap()).exp();
        assert!((k.value - expect).abs() <= k.quadrature_tolerance + 1e-10);
    }

    #[test]
    fn quadrature_norms_recover_purity() {
        let s = spec(StateFamily::Thermal { nbar: 0.8 }, 0.6);
        let grid = PhaseGrid::for_spec(&s, 0.0).unwrap();
        let state = make_state(&s).unwrap();
        let w = grid.sample(&state).unwrap();
        let norm = grid.product_integral(&w, &w) * std::f64::consts::PI;
        assert_relative_eq!(norm, state.purity(), epsilon = 1e-10);
    }

    #[test]
    fn quadrature_route_rejects_undersized_grids() {
        let s = spec(StateFamily::Coherent, 1.0);
        let grid = PhaseGrid::new(1.5, 33).unwrap();
        let err = kernel_via_overlap(&s, &pt(3.0, 0.0), &pt(0.0, 0.0), &grid).unwrap_err();
        assert!(matches!(err, Error::GridTooSmall(_)));
    }

    #[test]
    fn grid_validation() {
        assert!(PhaseGrid::new(0.0, 33).is_err());
        assert!(PhaseGrid::new(3.0, 16).is_err());
        assert!(PhaseGrid::new(3.0, 32).is_err());
        assert!(PhaseGrid::new(3.0, 17).is_ok());
    }

    #[test]
    fn coherent_states_saturate_the_inequality() {
        let s = spec(StateFamily::Coherent, 1.0);
        let a = PhasePoint::single(Complex64::new(0.3, -0.8));
        let b = PhasePoint::single(Complex64::new(-0.5, 0.2));
        let m = check_phase_space_inequality(&s, &a, &b).unwrap();
        assert!(m.margin.abs() < 1e-14, "margin {:.3e}", m.margin);
    }

    #[test]
    fn thermal_states_keep_a_nonnegative_margin() {
        let s = spec(StateFamily::Thermal { nbar: 1.2 }, 0.8);
        for (a, b) in [(0.0, 0.4), (0.5, -0.3), (1.0, 1.5)] {
            let pa = PhasePoint::single(Complex64::new(a, 0.1));
            let pb = PhasePoint::single(Complex64::new(b, -0.2));
            let m = check_phase_space_inequality(&s, &pa, &pb).unwrap();
            assert!(m.margin >= -1e-14, "margin {:.3e}", m.margin);
        }
    }

    #[test]
    fn a_single_photon_violates_the_inequality() {
        let s = spec(StateFamily::SinglePhoton, 1.0);
        let a = PhasePoint::single(Complex64::new(0.0, 0.0));
        let b = PhasePoint::single(Complex64::new(0.3, 0.0));
        let m = check_phase_space_inequality(&s, &a, &b).unwrap();
        assert_relative_eq!(m.margin, -0.06367603822058726, epsilon = 1e-9);
    }

    #[test]
    fn evaluator_guards_its_displacement_range() {
        let s = spec(StateFamily::SinglePhoton, 1.0);
        let eval = NumericEvaluator::new(&s, 1.0, 1e-8).unwrap();
        assert!(eval.eval(&pt(2.5, 0.0), &pt(0.0, 0.0)).is_err());
    }
}
