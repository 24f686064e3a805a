//! Kernel ridge regression on top of the quantum kernels, with the
//! norm-based generalization bound.
//!
//! Fitting solves `(K + lambda M I) c = Y` with a positive-definite
//! factorization and keeps the squared function norm `B = c^T K c`, whose
//! square root bounds the regressor in the kernel's function space. The
//! generalization report puts the empirical error side by side with
//! `2 B / sqrt(M)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernels::{evaluate, GramMatrix, KernelSpec};
use crate::states::DataPoint;

const RESIDUAL_TOL: f64 = 1e-10;
const NORM_CROSS_CHECK_TOL: f64 = 1e-10;
const MAX_CONDITION: f64 = 1e12;

/// Training or evaluation data: points with real labels. Classification
/// uses labels in `{-1, +1}`; nothing in the fit depends on that.
#[derive(Clone, Debug)]
pub struct LabeledDataset {
    points: Vec<DataPoint>,
    labels: Vec<f64>,
}

impl LabeledDataset {
    pub fn new(points: Vec<DataPoint>, labels: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("dataset has no points".into()));
        }
        if points.len() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} points but {} labels",
                points.len(),
                labels.len()
            )));
        }
        let modes = points[0].modes();
        if points.iter().any(|p| p.modes() != modes) {
            return Err(Error::DimensionMismatch(
                "points have mixed dimensions".into(),
            ));
        }
        if labels.iter().any(|y| !y.is_finite()) {
            return Err(Error::Data("labels must be finite".into()));
        }
        Ok(LabeledDataset { points, labels })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn modes(&self) -> usize {
        self.points[0].modes()
    }

    pub fn points(&self) -> &[DataPoint] {
        &self.points
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }
}

/// A fitted kernel ridge regressor.
#[derive(Clone, Debug)]
pub struct KrrModel {
    spec: KernelSpec,
    points: Vec<DataPoint>,
    coefficients: DVector<f64>,
    lambda: f64,
    bound_b: f64,
}

impl KrrModel {
    /// Rebuilds a model from stored parts, for deserialized model files.
    ///
    /// Validates shapes and finiteness but trusts the norm value; it was
    /// cross-checked when the model was fitted.
    pub fn from_parts(
        spec: KernelSpec,
        points: Vec<DataPoint>,
        coefficients: Vec<f64>,
        lambda: f64,
        bound_b: f64,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("model has no training points".into()));
        }
        if coefficients.len() != points.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for {} training points",
                coefficients.len(),
                points.len()
            )));
        }
        if points.iter().any(|p| p.modes() != spec.state.modes) {
            return Err(Error::DimensionMismatch(format!(
                "training points do not all have {} modes",
                spec.state.modes
            )));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Data("model coefficients must be finite".into()));
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::param("lambda", "must be finite and nonnegative"));
        }
        if !bound_b.is_finite() || bound_b < 0.0 {
            return Err(Error::Data(format!(
                "stored norm bound {bound_b} is not a nonnegative number"
            )));
        }
        Ok(KrrModel {
            spec,
            points,
            coefficients: DVector::from_vec(coefficients),
            lambda,
            bound_b,
        })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn training_points(&self) -> &[DataPoint] {
        &self.points
    }

    pub fn coefficients(&self) -> &[f64] {
        self.coefficients.as_slice()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn training_size(&self) -> usize {
        self.points.len()
    }
}

/// Fits `(K + lambda M I) c = Y`.
///
/// With `lambda = 0` the Gram matrix must be numerically nonsingular
/// (condition number below 1e12); otherwise the fit fails with advice to
/// regularize rather than falling back to a pseudo-inverse.
pub fn fit_krr(gram: &GramMatrix, labels: &[f64], lambda: f64) -> Result<KrrModel> {
    let m = gram.size();
    if labels.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for a {m}-point Gram matrix",
            labels.len()
        )));
    }
    if labels.iter().any(|y| !y.is_finite()) {
        return Err(Error::Data("labels must be finite".into()));
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::param("lambda", format!("{lambda} is negative")));
    }
    let k = gram.entries();
    let eig = ((k + k.transpose()) * 0.5).symmetric_eigen();
    if lambda == 0.0 {
        let max = eig.eigenvalues.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let min = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        if min <= 0.0 || max / min > MAX_CONDITION {
            return Err(Error::SingularSystem(format!(
                "Gram matrix condition exceeds {MAX_CONDITION:.0e} at lambda = 0 \
                 (eigenvalue range [{min:.3e}, {max:.3e}]); use lambda > 0"
            )));
        }
    }
    let y = DVector::from_column_slice(labels);
    let ridge = lambda * m as f64;
    let system = k + DMatrix::identity(m, m) * ridge;
    let chol = system.clone().cholesky().ok_or_else(|| {
        Error::SingularSystem(
            "K + lambda M I is not positive definite; use lambda > 0".into(),
        )
    })?;
    let c = chol.solve(&y);
    let residual = (&system * &c - &y).abs().max();
    if residual > RESIDUAL_TOL {
        return Err(Error::SingularSystem(format!(
            "solve residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e}; the system is too \
             ill-conditioned, use a larger lambda"
        )));
    }
    let bound_b = c.dot(&(k * &c));
    // Independent route to the same norm through the eigensystem of K:
    // B = sum_i l_i <u_i, Y>^2 / (l_i + lambda M)^2.
    let mut bound_y_form = 0.0;
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        let proj = eig.eigenvectors.column(i).dot(&y);
        let denom = l + ridge;
        bound_y_form += l * (proj / denom) * (proj / denom);
    }
    let cross_tol = NORM_CROSS_CHECK_TOL + 1e-13 * bound_b.abs();
    if (bound_b - bound_y_form).abs() > cross_tol {
        return Err(Error::SingularSystem(format!(
            "norm bound routes disagree ({bound_b:.12e} vs {bound_y_form:.12e}); the system \
             is too ill-conditioned for a trustworthy fit"
        )));
    }
    Ok(KrrModel {
        spec: *gram.spec(),
        points: gram.points().to_vec(),
        coefficients: c,
        lambda,
        bound_b,
    })
}

/// Regressor value `sum_k c_k K(x, x_k)`.
pub fn predict(model: &KrrModel, x: &DataPoint) -> Result<f64> {
    if x.modes() != model.spec.state.modes {
        return Err(Error::DimensionMismatch(format!(
            "query has {} modes but the model has {}",
            x.modes(),
            model.spec.state.modes
        )));
    }
    let mut acc = 0.0;
    for (c, p) in model.coefficients.iter().zip(&model.points) {
        acc += c * evaluate(&model.spec, x, p)?;
    }
    Ok(acc)
}

/// Squared function-space norm `B = c^T K c` of the fitted regressor,
/// cross-checked against its eigendecomposition form at fit time.
pub fn norm_bound(model: &KrrModel) -> f64 {
    model.bound_b
}

/// Empirical error next to the norm-based bound.
#[derive(Clone, Copy, Debug)]
pub struct GeneralizationReport {
    /// Mean absolute error of the model on the test set.
    pub empirical_error: f64,
    /// `2 B / sqrt(M)` with `M` the training size.
    pub bound_rhs: f64,
}

/// Mean absolute test error alongside `2 B / sqrt(M)`.
pub fn generalization_report(
    model: &KrrModel,
    test: &LabeledDataset,
) -> Result<GeneralizationReport> {
    if test.modes() != model.spec.state.modes {
        return Err(Error::DimensionMismatch(format!(
            "test points have {} modes but the model has {}",
            test.modes(),
            model.spec.state.modes
        )));
    }
    let mut total = 0.0;
    for (x, y) in test.points().iter().zip(test.labels()) {
        total += (predict(model, x)? - y).abs();
    }
    let empirical_error = total / test.len() as f64;
    let bound_rhs = 2.0 * model.bound_b / (model.training_size() as f64).sqrt();
    Ok(GeneralizationReport {
        empirical_error,
        bound_rhs,
    })
}
