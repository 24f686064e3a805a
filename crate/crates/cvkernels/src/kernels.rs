//! Closed-form kernels for each state family, the classical bound, the
//! nonclassicality witness, and Gram-matrix assembly.
//!
//! Every kernel here is the normalized overlap of two displaced copies of
//! a lossy base state, reduced to a formula in the separation `x - x'`.
//! The classical bound `exp(-|x - x'|^2)` is what any mixture of coherent
//! states can reach at most slowly; a kernel dipping below it certifies a
//! nonclassical base state, which is what the witness measures.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{self, NumericEvaluator, PhaseGrid, DEFAULT_ORACLE_TOL};
use crate::states::{DataPoint, StateFamily, StateSpec, MAX_SQUEEZING};

/// How a kernel value is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    /// Closed-form expression.
    Analytic,
    /// Fock-basis density matrices, displacement matrices, and traces.
    NumericFock,
    /// Wigner-function quadrature on a phase-space grid.
    NumericWigner,
}

/// A base state together with the evaluation route for its kernel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub state: StateSpec,
    pub mode: EvalMode,
}

impl KernelSpec {
    pub fn analytic(state: StateSpec) -> Self {
        KernelSpec {
            state,
            mode: EvalMode::Analytic,
        }
    }

    pub fn numeric_fock(state: StateSpec) -> Self {
        KernelSpec {
            state,
            mode: EvalMode::NumericFock,
        }
    }

    pub fn numeric_wigner(state: StateSpec) -> Self {
        KernelSpec {
            state,
            mode: EvalMode::NumericWigner,
        }
    }
}

fn check_dims(x: &DataPoint, x_prime: &DataPoint) -> Result<()> {
    if x.modes() != x_prime.modes() {
        return Err(Error::DimensionMismatch(format!(
            "points have {} and {} modes",
            x.modes(),
            x_prime.modes()
        )));
    }
    Ok(())
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) || !eta.is_finite() {
        return Err(Error::param("eta", format!("{eta} is outside [0, 1]")));
    }
    Ok(())
}

/// Kernel of the (possibly lossy) coherent-state encoding,
/// `exp(-|x - x'|^2)`. Loss does not change it.
pub fn kernel_coherent(x: &DataPoint, x_prime: &DataPoint) -> Result<f64> {
    Ok((-x.dist_sq(x_prime)?).exp())
}

/// Kernel of the lossy squeezed-vacuum encoding. Per mode, the separation
/// along `x1` is scaled by `1 - eta (1 - exp(-2r))` and along `x2` by
/// `1 - eta (1 - exp(2r))`; `eta` is the loss-channel transmissivity.
pub fn kernel_squeezed(x: &DataPoint, x_prime: &DataPoint, r: f64, eta: f64) -> Result<f64> {
    check_dims(x, x_prime)?;
    check_eta(eta)?;
    if !r.is_finite() || r.abs() > MAX_SQUEEZING {
        return Err(Error::param(
            "r",
            format!("{r} is outside [-{MAX_SQUEEZING}, {MAX_SQUEEZING}]"),
        ));
    }
    let narrow = 1.0 - eta * (1.0 - (-2.0 * r).exp());
    let wide = 1.0 - eta * (1.0 - (2.0 * r).exp());
    let mut exponent = 0.0;
    for j in 0..x.modes() {
        let d1 = x.coords()[2 * j] - x_prime.coords()[2 * j];
        let d2 = x.coords()[2 * j + 1] - x_prime.coords()[2 * j + 1];
        exponent += d1 * d1 / narrow + d2 * d2 / wide;
    }
    Ok((-exponent).exp())
}

/// Kernel of the lossy single-photon encoding, applied per mode and
/// multiplied. `eta` is the loss-channel transmissivity.
pub fn kernel_single_photon(x: &DataPoint, x_prime: &DataPoint, eta: f64) -> Result<f64> {
    check_dims(x, x_prime)?;
    check_eta(eta)?;
    let purity = 1.0 - 2.0 * eta + 2.0 * eta * eta;
    let mut k = 1.0;
    for j in 0..x.modes() {
        let d1 = x.coords()[2 * j] - x_prime.coords()[2 * j];
        let d2 = x.coords()[2 * j + 1] - x_prime.coords()[2 * j + 1];
        let s = d1 * d1 + d2 * d2;
        let poly = 1.0 - 2.0 * eta * (1.0 - eta) + eta * s * (2.0 - eta * (4.0 - s));
        k *= (-s).exp() / purity * poly;
    }
    Ok(k)
}

/// Kernel of a thermal-state encoding with mean photon number `nbar`,
/// `exp(-|x - x'|^2 / (2 nbar + 1))`.
///
/// `nbar` is the mean photon number of the state actually encoded; a loss
/// channel of transmissivity `eta` turns a thermal state of `nbar` photons
/// into one of `eta * nbar`, so pass the product for lossy states.
pub fn kernel_thermal(x: &DataPoint, x_prime: &DataPoint, nbar: f64) -> Result<f64> {
    check_dims(x, x_prime)?;
    if !nbar.is_finite() || nbar < 0.0 {
        return Err(Error::param("nbar", format!("{nbar} is negative")));
    }
    Ok((-x.dist_sq(x_prime)? / (2.0 * nbar + 1.0)).exp())
}

/// Largest kernel value any classical mixture of coherent states can
/// reach at separation `x - x'`: `exp(-|x - x'|^2)`.
pub fn classical_bound(x: &DataPoint, x_prime: &DataPoint) -> Result<f64> {
    Ok((-x.dist_sq(x_prime)?).exp())
}

/// Kernel value for a spec, routed through the requested evaluation mode.
pub fn evaluate(spec: &KernelSpec, x: &DataPoint, x_prime: &DataPoint) -> Result<f64> {
    check_dims(x, x_prime)?;
    if x.modes() != spec.state.modes {
        return Err(Error::DimensionMismatch(format!(
            "points have {} modes but the spec has {}",
            x.modes(),
            spec.state.modes
        )));
    }
    match spec.mode {
        EvalMode::Analytic => match spec.state.family {
            StateFamily::Coherent => kernel_coherent(x, x_prime),
            StateFamily::Squeezed { r } => kernel_squeezed(x, x_prime, r, spec.state.eta),
            StateFamily::SinglePhoton => kernel_single_photon(x, x_prime, spec.state.eta),
            StateFamily::Thermal { nbar } => kernel_thermal(x, x_prime, spec.state.eta * nbar),
        },
        EvalMode::NumericFock => oracle::kernel_numeric(&spec.state, x, x_prime),
        EvalMode::NumericWigner => {
            let reach = x.max_abs_amplitude().max(x_prime.max_abs_amplitude());
            let grid = PhaseGrid::for_spec(&spec.state, reach)?;
            Ok(oracle::kernel_via_overlap(&spec.state, x, x_prime, &grid)?.value)
        }
    }
}

/// Witness `W = K(x, x') - exp(-|x - x'|^2)`. Negative values certify
/// that no classical mixture of coherent states produces this kernel.
pub fn witness(spec: &KernelSpec, x: &DataPoint, x_prime: &DataPoint) -> Result<f64> {
    Ok(evaluate(spec, x, x_prime)? - classical_bound(x, x_prime)?)
}

/// Separations at which a witness scan is evaluated.
///
/// Each offset is a separation `x - x'`; scans evaluate the pair
/// `(offset, origin)`, which fixes every kernel here completely because
/// all of them depend only on the separation.
#[derive(Clone, Debug)]
pub struct ScanGrid {
    offsets: Vec<DataPoint>,
}

impl ScanGrid {
    pub fn from_offsets(offsets: Vec<DataPoint>) -> Result<Self> {
        if offsets.is_empty() {
            return Err(Error::Empty("scan grid has no offsets".into()));
        }
        let modes = offsets[0].modes();
        if offsets.iter().any(|o| o.modes() != modes) {
            return Err(Error::DimensionMismatch(
                "scan offsets have mixed dimensions".into(),
            ));
        }
        Ok(ScanGrid { offsets })
    }

    /// `steps` evenly spaced separations along the `x1` axis from 0 to
    /// `max`, with `x2 = 0`.
    pub fn x1_axis(max: f64, steps: usize) -> Result<Self> {
        if !(max.is_finite() && max > 0.0) {
            return Err(Error::param("max", format!("{max} is not a positive range")));
        }
        if steps < 2 {
            return Err(Error::param("steps", "at least two scan points are required"));
        }
        let offsets = (0..steps)
            .map(|i| DataPoint::single_mode(max * i as f64 / (steps - 1) as f64, 0.0))
            .collect::<Result<Vec<_>>>()?;
        ScanGrid::from_offsets(offsets)
    }

    /// `steps` separations along the `x1` axis whose squared lengths are
    /// evenly spaced from 0 to `max_sq`.
    pub fn dist_sq_axis(max_sq: f64, steps: usize) -> Result<Self> {
        if !(max_sq.is_finite() && max_sq > 0.0) {
            return Err(Error::param(
                "max_sq",
                format!("{max_sq} is not a positive range"),
            ));
        }
        if steps < 2 {
            return Err(Error::param("steps", "at least two scan points are required"));
        }
        let offsets = (0..steps)
            .map(|i| {
                let s = max_sq * i as f64 / (steps - 1) as f64;
                DataPoint::single_mode(s.sqrt(), 0.0)
            })
            .collect::<Result<Vec<_>>>()?;
        ScanGrid::from_offsets(offsets)
    }

    pub fn offsets(&self) -> &[DataPoint] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }
}

/// Kernel, bound, and witness values over a scan, with the witness
/// minimum and where it occurs.
#[derive(Clone, Debug)]
pub struct WitnessReport {
    pub offsets: Vec<DataPoint>,
    pub kernel: Vec<f64>,
    pub bound: Vec<f64>,
    pub witness: Vec<f64>,
    pub min_witness: f64,
    pub argmin: DataPoint,
    pub argmin_index: usize,
}

/// Evaluates the witness over every offset in the grid. Ties for the
/// minimum break toward the smaller separation.
pub fn witness_scan(spec: &KernelSpec, grid: &ScanGrid) -> Result<WitnessReport> {
    let origin = DataPoint::origin(spec.state.modes);
    let mut kernel = Vec::with_capacity(grid.len());
    let mut bound = Vec::with_capacity(grid.len());
    let mut witness_vals = Vec::with_capacity(grid.len());
    let mut best: Option<(usize, f64, f64)> = None;
    for (i, offset) in grid.offsets().iter().enumerate() {
        let k = evaluate(spec, offset, &origin)?;
        let b = classical_bound(offset, &origin)?;
        let w = k - b;
        let d = offset.dist_sq(&origin)?;
        kernel.push(k);
        bound.push(b);
        witness_vals.push(w);
        let replace = match best {
            None => true,
            Some((_, bw, bd)) => w < bw || (w == bw && d < bd),
        };
        if replace {
            best = Some((i, w, d));
        }
    }
    let (argmin_index, min_witness, _) = best.expect("scan grids are nonempty");
    Ok(WitnessReport {
        offsets: grid.offsets().to_vec(),
        kernel,
        bound,
        witness: witness_vals,
        min_witness,
        argmin: grid.offsets()[argmin_index].clone(),
        argmin_index,
    })
}

/// PSD floor for Gram matrices: the smallest eigenvalue may round off to
/// no less than this.
pub const GRAM_PSD_TOL: f64 = -1e-9;

const GRAM_SYMMETRY_TOL: f64 = 1e-12;
const GRAM_DIAGONAL_TOL: f64 = 1e-12;

/// Kernel matrix over a dataset, validated symmetric, unit-diagonal, and
/// positive semidefinite up to round-off.
#[derive(Clone, Debug)]
pub struct GramMatrix {
    entries: DMatrix<f64>,
    points: Vec<DataPoint>,
    spec: KernelSpec,
    min_eigenvalue: f64,
}

impl GramMatrix {
    /// Validates an externally assembled matrix against the Gram
    /// invariants.
    pub fn from_entries(
        entries: DMatrix<f64>,
        points: Vec<DataPoint>,
        spec: KernelSpec,
    ) -> Result<Self> {
        let m = points.len();
        if m == 0 {
            return Err(Error::Empty("Gram matrix over no points".into()));
        }
        if entries.nrows() != m || entries.ncols() != m {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{} for {m} points",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let sym_defect = (&entries - entries.transpose()).abs().max();
        if sym_defect > GRAM_SYMMETRY_TOL {
            return Err(Error::Data(format!(
                "Gram symmetry defect {sym_defect:.3e} exceeds {GRAM_SYMMETRY_TOL:.0e}"
            )));
        }
        let diag_defect = entries
            .diagonal()
            .iter()
            .map(|d| (d - 1.0).abs())
            .fold(0.0, f64::max);
        if diag_defect > GRAM_DIAGONAL_TOL {
            return Err(Error::Data(format!(
                "Gram diagonal deviates from 1 by {diag_defect:.3e}"
            )));
        }
        let symmetrized = (&entries + entries.transpose()) * 0.5;
        let min_eigenvalue = symmetrized
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        if min_eigenvalue < GRAM_PSD_TOL {
            return Err(Error::NotPsd(format!(
                "minimum eigenvalue {min_eigenvalue:.3e} is below {GRAM_PSD_TOL:.0e}"
            )));
        }
        Ok(GramMatrix {
            entries,
            points,
            spec,
            min_eigenvalue,
        })
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn points(&self) -> &[DataPoint] {
        &self.points
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }
}

/// Assembles the Gram matrix of a dataset, sequentially in row-major
/// order. The Fock route shares one evaluator (cutoff search and lossy
/// base state) across all entries.
pub fn gram(spec: &KernelSpec, points: &[DataPoint]) -> Result<GramMatrix> {
    if points.is_empty() {
        return Err(Error::Empty("Gram matrix over no points".into()));
    }
    for p in points {
        if p.modes() != spec.state.modes {
            return Err(Error::DimensionMismatch(format!(
                "point with {} modes in a {}-mode spec",
                p.modes(),
                spec.state.modes
            )));
        }
    }
    let m = points.len();
    let mut entries = DMatrix::zeros(m, m);
    match spec.mode {
        EvalMode::NumericFock => {
            let reach = points
                .iter()
                .map(DataPoint::max_abs_amplitude)
                .fold(0.0, f64::max);
            let eval = NumericEvaluator::new(&spec.state, reach, DEFAULT_ORACLE_TOL)?;
            for i in 0..m {
                for j in i..m {
                    let k = eval.eval(&points[i], &points[j])?;
                    entries[(i, j)] = k;
                    entries[(j, i)] = k;
                }
            }
        }
        EvalMode::NumericWigner => {
            let reach = points
                .iter()
                .map(DataPoint::max_abs_amplitude)
                .fold(0.0, f64::max);
            let grid = PhaseGrid::for_spec(&spec.state, reach)?;
            for i in 0..m {
                for j in i..m {
                    let k = oracle::kernel_via_overlap(&spec.state, &points[i], &points[j], &grid)?
                        .value;
                    entries[(i, j)] = k;
                    entries[(j, i)] = k;
                }
            }
        }
        EvalMode::Analytic => {
            for i in 0..m {
                for j in i..m {
                    let k = evaluate(spec, &points[i], &points[j])?;
                    entries[(i, j)] = k;
                    entries[(j, i)] = k;
                }
            }
        }
    }
    GramMatrix::from_entries(entries, points.to_vec(), *spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pt(x1: f64, x2: f64) -> DataPoint {
        DataPoint::single_mode(x1, x2).unwrap()
    }

    fn spec(family: StateFamily, eta: f64) -> KernelSpec {
        KernelSpec::analytic(StateSpec::single_mode(family, eta).unwrap())
    }

    #[test]
    fn coherent_kernel_values() {
        let x = pt(0.3, -0.4);
        assert_relative_eq!(kernel_coherent(&x, &x).unwrap(), 1.0);
        assert_relative_eq!(
            kernel_coherent(&pt(1.0, 0.0), &pt(0.0, 0.0)).unwrap(),
            0.36787944117144233,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            kernel_coherent(&pt(0.0, 0.0), &pt(1.0, 1.0)).unwrap(),
            0.1353352832366127,
            max_relative = 1e-15
        );
    }

    #[test]
    fn squeezed_kernel_values() {
        let a = pt(1.0, 0.0);
        let b = pt(0.0, 0.0);
        // Full loss collapses every squeezed kernel onto the coherent one.
        for r in [0.3, 1.0, 2.5] {
            assert_relative_eq!(
                kernel_squeezed(&a, &b, r, 0.0).unwrap(),
                (-1.0f64).exp(),
                max_relative = 1e-15
            );
        }
        let e_sq = std::f64::consts::E * std::f64::consts::E;
        assert_relative_eq!(
            kernel_squeezed(&a, &b, 1.0, 1.0).unwrap(),
            (-e_sq).exp(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            kernel_squeezed(&pt(0.0, 1.0), &b, 1.0, 1.0).unwrap(),
            (-1.0 / e_sq).exp(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn single_photon_kernel_values() {
        let a = pt(1.0, 0.0);
        let b = pt(0.0, 0.0);
        assert!(kernel_single_photon(&a, &b, 1.0).unwrap().abs() < 1e-15);
        assert_relative_eq!(
            kernel_single_photon(&a, &b, 0.0).unwrap(),
            (-1.0f64).exp(),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            kernel_single_photon(&a, &b, 0.5).unwrap(),
            0.5518191617571635,
            max_relative = 1e-15
        );
    }

    #[test]
    fn thermal_kernel_values() {
        let a = pt(1.0, 0.0);
        let b = pt(0.0, 0.0);
        assert_relative_eq!(
            kernel_thermal(&a, &b, 0.0).unwrap(),
            (-1.0f64).exp(),
            max_relative = 1e-15
        );
        let k = kernel_thermal(&a, &b, 0.5).unwrap();
        assert_relative_eq!(k, (-0.5f64).exp(), max_relative = 1e-15);
        assert!(k >= (-1.0f64).exp());
        assert_relative_eq!(kernel_thermal(&a, &a, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn classical_bound_equals_the_coherent_kernel() {
        for (a, b) in [(pt(0.0, 0.0), pt(1.0, 0.0)), (pt(0.7, -0.3), pt(-0.2, 0.9))] {
            assert_eq!(
                classical_bound(&a, &b).unwrap(),
                kernel_coherent(&a, &b).unwrap()
            );
        }
        assert_relative_eq!(classical_bound(&pt(0.5, 0.5), &pt(0.5, 0.5)).unwrap(), 1.0);
    }

    #[test]
    fn witness_values() {
        let sp = spec(StateFamily::SinglePhoton, 1.0);
        let x = pt(0.4, 0.4);
        assert_eq!(witness(&sp, &x, &x).unwrap(), 0.0);
        assert_relative_eq!(
            witness(&sp, &pt(1.0, 0.0), &pt(0.0, 0.0)).unwrap(),
            -0.36787944117144233,
            max_relative = 1e-12
        );
        let coh = spec(StateFamily::Coherent, 0.7);
        assert_eq!(witness(&coh, &pt(0.9, -0.2), &pt(0.1, 0.3)).unwrap(), 0.0);
    }

    #[test]
    fn squeezed_scan_dips_well_below_the_bound() {
        let s = spec(StateFamily::Squeezed { r: 1.0 }, 1.0);
        let grid = ScanGrid::x1_axis(3.0, 301).unwrap();
        let report = witness_scan(&s, &grid).unwrap();
        assert!(report.min_witness < -0.3, "min {}", report.min_witness);
    }

    #[test]
    fn single_photon_scan_respects_the_loss_threshold() {
        let grid = ScanGrid::dist_sq_axis(4.0, 400).unwrap();
        let at_half = witness_scan(&spec(StateFamily::SinglePhoton, 0.5), &grid).unwrap();
        assert!(at_half.min_witness >= -1e-9, "min {}", at_half.min_witness);
        let above = witness_scan(&spec(StateFamily::SinglePhoton, 0.55), &grid).unwrap();
        assert!(above.min_witness < -1e-3, "min {}", above.min_witness);
    }

    #[test]
    fn witness_equals_kernel_minus_bound_entrywise() {
        let s = spec(StateFamily::Squeezed { r: 0.8 }, 0.6);
        let grid = ScanGrid::x1_axis(2.0, 41).unwrap();
        let report = witness_scan(&s, &grid).unwrap();
        for i in 0..grid.len() {
            assert_eq!(report.witness[i], report.kernel[i] - report.bound[i]);
        }
        assert_eq!(report.min_witness, report.witness[report.argmin_index]);
    }

    #[test]
    fn scan_ties_break_toward_smaller_separation() {
        let s = spec(StateFamily::Coherent, 1.0);
        let grid = ScanGrid::x1_axis(1.0, 11).unwrap();
        // A coherent witness is identically zero, so every point ties.
        let report = witness_scan(&s, &grid).unwrap();
        assert_eq!(report.argmin_index, 0);
    }

    #[test]
    fn gram_of_a_single_point() {
        let s = spec(StateFamily::Thermal { nbar: 1.0 }, 0.9);
        let g = gram(&s, &[pt(0.4, 0.1)]).unwrap();
        assert_eq!(g.size(), 1);
        assert_relative_eq!(g.entries()[(0, 0)], 1.0);
    }

    #[test]
    fn gram_of_distant_points_is_nearly_diagonal() {
        let s = spec(StateFamily::Coherent, 1.0);
        let g = gram(&s, &[pt(0.0, 0.0), pt(10.0, 0.0)]).unwrap();
        assert!(g.entries()[(0, 1)] < 1e-40);
        assert!(g.min_eigenvalue() > 0.9);
    }

    #[test]
    fn gram_rejects_non_psd_input() {
        let s = spec(StateFamily::Coherent, 1.0);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let err =
            GramMatrix::from_entries(bad, vec![pt(0.0, 0.0), pt(1.0, 0.0)], s).unwrap_err();
        assert!(matches!(err, Error::NotPsd(_)));
    }

    #[test]
    fn evaluate_checks_spec_dimensions() {
        let s = spec(StateFamily::Coherent, 1.0);
        let two_mode = DataPoint::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!(evaluate(&s, &two_mode, &two_mode).is_err());
    }

    #[test]
    fn loss_broadens_the_squeezed_kernel() {
        let a = pt(0.7, 0.0);
        let b = pt(0.0, 0.0);
        let mut last = kernel_squeezed(&a, &b, 1.0, 1.0).unwrap();
        for eta in [0.8, 0.6, 0.4, 0.2, 0.0] {
            let k = kernel_squeezed(&a, &b, 1.0, eta).unwrap();
            assert!(k > last, "kernel should grow as loss increases");
            last = k;
        }
    }

    #[test]
    fn analytic_multimode_kernels_factorize() {
        let one = spec(StateFamily::Squeezed { r: 0.9 }, 0.75);
        let two = KernelSpec::analytic(
            StateSpec::new(StateFamily::Squeezed { r: 0.9 }, 0.75, 2).unwrap(),
        );
        let x = DataPoint::new(vec![0.3, -0.1, -0.6, 0.4]).unwrap();
        let y = DataPoint::new(vec![-0.2, 0.5, 0.1, -0.3]).unwrap();
        let x0 = pt(0.3, -0.1);
        let y0 = pt(-0.2, 0.5);
        let x1 = pt(-0.6, 0.4);
        let y1 = pt(0.1, -0.3);
        let product = evaluate(&one, &x0, &y0).unwrap() * evaluate(&one, &x1, &y1).unwrap();
        assert_relative_eq!(evaluate(&two, &x, &y).unwrap(), product, max_relative = 1e-14);
    }
}
