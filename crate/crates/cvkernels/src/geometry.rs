//! Feature-space geometry induced by a kernel: pairwise distances,
//! center-of-mass norm, and dispersion.
//!
//! With the unit normalization `K(x, x) = 1`, the encoded states sit on a
//! sphere in feature space and their squared distance is `2 (1 - K)`.
//! Kernels dipping below the coherent baseline therefore push points
//! further apart and spread the dataset further from its center of mass;
//! the comparison report quantifies both effects.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernels::{evaluate, gram, GramMatrix, KernelSpec};
use crate::states::DataPoint;

const COM_IDENTITY_TOL: f64 = 1e-12;

/// Squared feature-space distance `2 (1 - K(x, x'))`.
pub fn feature_distance(spec: &KernelSpec, x: &DataPoint, x_prime: &DataPoint) -> Result<f64> {
    Ok(2.0 * (1.0 - evaluate(spec, x, x_prime)?))
}

/// Squared norm of the dataset's feature-space center of mass,
/// `(1/M^2) sum_ij K_ij`.
pub fn com_norm(gram: &GramMatrix) -> f64 {
    let m = gram.size() as f64;
    gram.entries().iter().sum::<f64>() / (m * m)
}

/// Mean squared distance of the encoded points from their center of
/// mass, accumulated per point. For unit-diagonal Gram matrices it
/// equals `1 - com_norm` up to round-off.
pub fn mean_sq_dist_to_com(gram: &GramMatrix) -> f64 {
    let m = gram.size();
    let mf = m as f64;
    let com = com_norm(gram);
    let k = gram.entries();
    let mut total = 0.0;
    for i in 0..m {
        let mut row_mean = 0.0;
        for j in 0..m {
            row_mean += k[(i, j)];
        }
        row_mean /= mf;
        total += k[(i, i)] - 2.0 * row_mean + com;
    }
    total / mf
}

/// Distance and dispersion summary of one kernel on one dataset.
#[derive(Clone, Debug)]
pub struct GeometryReport {
    pub spec: KernelSpec,
    /// `2 (1 - K_ij)` for every pair.
    pub pairwise_sq_distances: DMatrix<f64>,
    pub com_norm: f64,
    pub mean_sq_dist_to_com: f64,
}

/// Builds the Gram matrix of `points` under `spec` and summarizes the
/// geometry it induces.
pub fn geometry_report(spec: &KernelSpec, points: &[DataPoint]) -> Result<GeometryReport> {
    let g = gram(spec, points)?;
    let com = com_norm(&g);
    let msd = mean_sq_dist_to_com(&g);
    let defect = (msd + com - 1.0).abs();
    if defect > COM_IDENTITY_TOL {
        return Err(Error::InvalidState(format!(
            "dispersion identity defect {defect:.3e} exceeds {COM_IDENTITY_TOL:.0e}"
        )));
    }
    let m = g.size();
    let mut d = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            d[(i, j)] = 2.0 * (1.0 - g.entries()[(i, j)]);
        }
    }
    Ok(GeometryReport {
        spec: *spec,
        pairwise_sq_distances: d,
        com_norm: com,
        mean_sq_dist_to_com: msd,
    })
}

/// One pair's squared distances under the two compared kernels.
#[derive(Clone, Copy, Debug)]
pub struct PairSeparation {
    pub i: usize,
    pub j: usize,
    pub dist_sq_a: f64,
    pub dist_sq_b: f64,
}

/// Pairwise and dispersion comparison of two kernels on one dataset.
#[derive(Clone, Debug)]
pub struct SeparationComparison {
    pub spec_a: KernelSpec,
    pub spec_b: KernelSpec,
    pub pairs: Vec<PairSeparation>,
    /// Pairs where the first kernel separates more.
    pub a_greater: usize,
    /// Pairs where the second kernel separates more.
    pub b_greater: usize,
    pub ties: usize,
    pub dispersion_a: f64,
    pub dispersion_b: f64,
    pub com_norm_a: f64,
    pub com_norm_b: f64,
}

impl SeparationComparison {
    /// True when neither kernel separates every pair at least as much as
    /// the other. Callers reporting dataset-level claims should surface
    /// this instead of aggregating over a mixed comparison.
    pub fn is_mixed(&self) -> bool {
        self.a_greater > 0 && self.b_greater > 0
    }
}

/// Compares how two kernel specs separate the same dataset, pair by pair
/// and through the dispersion around the center of mass.
///
/// Pairs are ordered by comparing kernel values: `d^2 = 2 (1 - K)` makes
/// a larger distance and a smaller kernel the same statement, but the
/// kernels stay distinguishable in floating point long after both
/// distances round to 2.
pub fn separation_comparison(
    spec_a: &KernelSpec,
    spec_b: &KernelSpec,
    points: &[DataPoint],
) -> Result<SeparationComparison> {
    if points.len() < 2 {
        return Err(Error::Empty(
            "separation comparison needs at least two points".into(),
        ));
    }
    let ga = gram(spec_a, points)?;
    let gb = gram(spec_b, points)?;
    let mut pairs = Vec::new();
    let mut a_greater = 0;
    let mut b_greater = 0;
    let mut ties = 0;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let ka = ga.entries()[(i, j)];
            let kb = gb.entries()[(i, j)];
            let da = 2.0 * (1.0 - ka);
            let db = 2.0 * (1.0 - kb);
            if ka < kb {
                a_greater += 1;
            } else if kb < ka {
                b_greater += 1;
            } else {
                ties += 1;
            }
            pairs.push(PairSeparation {
                i,
                j,
                dist_sq_a: da,
                dist_sq_b: db,
            });
        }
    }
    Ok(SeparationComparison {
        spec_a: *spec_a,
        spec_b: *spec_b,
        pairs,
        a_greater,
        b_greater,
        ties,
        dispersion_a: mean_sq_dist_to_com(&ga),
        dispersion_b: mean_sq_dist_to_com(&gb),
        com_norm_a: com_norm(&ga),
        com_norm_b: com_norm(&gb),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{classical_bound, witness};
    use crate::states::{StateFamily, StateSpec};
    use approx::assert_relative_eq;

    fn pt(x1: f64, x2: f64) -> DataPoint {
        DataPoint::single_mode(x1, x2).unwrap()
    }

    fn analytic(family: StateFamily, eta: f64) -> KernelSpec {
        KernelSpec::analytic(StateSpec::single_mode(family, eta).unwrap())
    }

    fn x1_axis_points(count: usize) -> Vec<DataPoint> {
        (0..count).map(|i| pt(i as f64, 0.0)).collect()
    }

    #[test]
    fn feature_distance_values() {
        let coh = analytic(StateFamily::Coherent, 1.0);
        let x = pt(0.4, -0.6);
        assert_eq!(feature_distance(&coh, &x, &x).unwrap(), 0.0);
        assert_relative_eq!(
            feature_distance(&coh, &pt(1.0, 0.0), &pt(0.0, 0.0)).unwrap(),
            1.2642411176571153,
            max_relative = 1e-15
        );
        let sp = analytic(StateFamily::SinglePhoton, 1.0);
        assert_relative_eq!(
            feature_distance(&sp, &pt(1.0, 0.0), &pt(0.0, 0.0)).unwrap(),
            2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn com_norm_closed_forms() {
        let coh = analytic(StateFamily::Coherent, 1.0);
        let single = gram(&coh, &[pt(0.3, 0.3)]).unwrap();
        assert_relative_eq!(com_norm(&single), 1.0);
        assert_relative_eq!(mean_sq_dist_to_com(&single), 0.0, epsilon = 1e-15);
        let two = gram(&coh, &[pt(0.0, 0.0), pt(1.0, 0.0)]).unwrap();
        let k = (-1.0f64).exp();
        assert_relative_eq!(com_norm(&two), (1.0 + k) / 2.0, max_relative = 1e-14);
        assert_relative_eq!(
            mean_sq_dist_to_com(&two),
            (1.0 - k) / 2.0,
            max_relative = 1e-13
        );
    }

    #[test]
    fn dispersion_identity_holds_across_families() {
        let points: Vec<DataPoint> = vec![
            pt(0.0, 0.0),
            pt(0.8, -0.3),
            pt(-0.5, 0.6),
            pt(1.2, 0.9),
            pt(-1.0, -0.7),
        ];
        for family in [
            StateFamily::Coherent,
            StateFamily::Squeezed { r: 1.0 },
            StateFamily::SinglePhoton,
            StateFamily::Thermal { nbar: 0.8 },
        ] {
            let report = geometry_report(&analytic(family, 0.85), &points).unwrap();
            assert!(
                (report.mean_sq_dist_to_com + report.com_norm - 1.0).abs() < 1e-12,
                "identity defect for {family:?}"
            );
        }
    }

    #[test]
    fn squeezing_separates_an_axis_dataset_more_than_coherent() {
        let points = x1_axis_points(10);
        let coh = analytic(StateFamily::Coherent, 1.0);
        let sq = analytic(StateFamily::Squeezed { r: 1.0 }, 1.0);
        let cmp = separation_comparison(&sq, &coh, &points).unwrap();
        assert_eq!(cmp.a_greater, cmp.pairs.len());
        assert_eq!(cmp.b_greater, 0);
        assert!(cmp.dispersion_a > cmp.dispersion_b);
        assert!(cmp.com_norm_a < cmp.com_norm_b);
    }

    #[test]
    fn identical_specs_tie_everywhere() {
        let points = x1_axis_points(4);
        let spec = analytic(StateFamily::Thermal { nbar: 0.4 }, 0.9);
        let cmp = separation_comparison(&spec, &spec, &points).unwrap();
        assert_eq!(cmp.ties, cmp.pairs.len());
        assert_eq!(cmp.a_greater, 0);
        assert_eq!(cmp.b_greater, 0);
    }

    #[test]
    fn negative_witness_matches_extra_separation_pointwise() {
        let sp = analytic(StateFamily::SinglePhoton, 1.0);
        let origin = pt(0.0, 0.0);
        for step in 1..30 {
            let x = pt(step as f64 * 0.1, 0.0);
            let w = witness(&sp, &x, &origin).unwrap();
            let d = feature_distance(&sp, &x, &origin).unwrap();
            let baseline = 2.0 * (1.0 - classical_bound(&x, &origin).unwrap());
            assert_eq!(w < 0.0, d > baseline);
        }
    }

    #[test]
    fn induced_distance_satisfies_the_triangle_inequality() {
        let points = vec![
            pt(0.0, 0.0),
            pt(0.7, 0.2),
            pt(-0.4, 0.9),
            pt(1.1, -0.5),
            pt(0.3, 0.3),
        ];
        for family in [StateFamily::SinglePhoton, StateFamily::Squeezed { r: 1.2 }] {
            let report = geometry_report(&analytic(family, 0.7), &points).unwrap();
            let d = &report.pairwise_sq_distances;
            for i in 0..points.len() {
                for j in 0..points.len() {
                    for l in 0..points.len() {
                        let lhs = d[(i, l)].max(0.0).sqrt();
                        let rhs = d[(i, j)].max(0.0).sqrt() + d[(j, l)].max(0.0).sqrt();
                        assert!(lhs <= rhs + 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn comparison_requires_two_points() {
        let spec = analytic(StateFamily::Coherent, 1.0);
        assert!(separation_comparison(&spec, &spec, &[pt(0.0, 0.0)]).is_err());
    }
}
