//! The six subcommands, sharing the CSV/JSON conventions in `data`.

use std::fs;

use cvkernels::geometry::{geometry_report, separation_comparison};
use cvkernels::kernels::{evaluate, gram, witness_scan, KernelSpec, ScanGrid};
use cvkernels::learning::{
    fit_krr, generalization_report, norm_bound, predict as predict_point, KrrModel,
    LabeledDataset,
};
use cvkernels::oracle::NumericEvaluator;
use cvkernels::states::{DataPoint, StateFamily, StateSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{csv_row, read_dataset, suffixed, write_text};
use crate::{
    CliError, FamilyArg, FitArgs, FormatArg, GeometryArgs, GramArgs, PredictArgs, VerifyArgs,
    WitnessArgs,
};

pub fn resolve_family(
    family: FamilyArg,
    r: Option<f64>,
    nbar: Option<f64>,
) -> Result<StateFamily, CliError> {
    let check_unused = |flag: Option<f64>, name: &str, label: &str| -> Result<(), CliError> {
        if flag.is_some() {
            return Err(CliError::Usage(format!(
                "--{name} does not apply to the {label} family"
            )));
        }
        Ok(())
    };
    match family {
        FamilyArg::Coherent => {
            check_unused(r, "r", "coherent")?;
            check_unused(nbar, "nbar", "coherent")?;
            Ok(StateFamily::Coherent)
        }
        FamilyArg::Squeezed => {
            check_unused(nbar, "nbar", "squeezed")?;
            Ok(StateFamily::Squeezed {
                r: r.unwrap_or(1.0),
            })
        }
        FamilyArg::SinglePhoton => {
            check_unused(r, "r", "single-photon")?;
            check_unused(nbar, "nbar", "single-photon")?;
            Ok(StateFamily::SinglePhoton)
        }
        FamilyArg::Thermal => {
            check_unused(r, "r", "thermal")?;
            Ok(StateFamily::Thermal {
                nbar: nbar.unwrap_or(0.5),
            })
        }
    }
}

/// One scan channel: how the user named it, and the transmissivity.
struct ScanChannel {
    suffix: String,
    loss: f64,
    eta: f64,
}

fn witness_channels(args: &WitnessArgs) -> Result<Vec<ScanChannel>, CliError> {
    if let Some(etas) = &args.eta {
        return etas
            .iter()
            .map(|&eta| {
                Ok(ScanChannel {
                    suffix: format!("_eta{eta}"),
                    loss: 1.0 - eta,
                    eta,
                })
            })
            .collect();
    }
    let default = vec![0.0, 0.2, 0.5, 0.8];
    let losses = args.loss.as_ref().unwrap_or(&default);
    losses
        .iter()
        .map(|&loss| {
            if !(0.0..=1.0).contains(&loss) {
                return Err(CliError::Usage(format!("--loss {loss} is outside [0, 1]")));
            }
            Ok(ScanChannel {
                suffix: format!("_loss{loss}"),
                loss,
                eta: 1.0 - loss,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct ScanSummary {
    loss: f64,
    eta: f64,
    file: String,
    min_witness: f64,
    argmin_delta_x1: f64,
    argmin_delta_x2: f64,
    argmin_index: usize,
}

#[derive(Serialize)]
struct WitnessSummary {
    family: String,
    range: f64,
    steps: usize,
    scans: Vec<ScanSummary>,
}

pub fn witness(args: WitnessArgs) -> Result<(), CliError> {
    let family = args.family.resolve()?;
    let channels = witness_channels(&args)?;
    if channels.is_empty() {
        return Err(CliError::Usage("no loss or eta values to scan".into()));
    }
    let grid = ScanGrid::x1_axis(args.range, args.steps)?;
    let mut scans = Vec::new();
    for channel in &channels {
        let spec = StateSpec::single_mode(family, channel.eta)?;
        let report = witness_scan(&KernelSpec::analytic(spec), &grid)?;
        let mut out = String::from("delta_x1,delta_x2,kernel,bound,witness\n");
        for (i, offset) in report.offsets.iter().enumerate() {
            out.push_str(&csv_row(&[
                offset.coords()[0],
                offset.coords()[1],
                report.kernel[i],
                report.bound[i],
                report.witness[i],
            ]));
            out.push('\n');
        }
        let path = suffixed(&args.out, &format!("{}.csv", channel.suffix));
        write_text(Some(&path), &out)?;
        scans.push(ScanSummary {
            loss: channel.loss,
            eta: channel.eta,
            file: path
                .file_name()
                .map_or_else(String::new, |n| n.to_string_lossy().into_owned()),
            min_witness: report.min_witness,
            argmin_delta_x1: report.argmin.coords()[0],
            argmin_delta_x2: report.argmin.coords()[1],
            argmin_index: report.argmin_index,
        });
    }
    let summary = WitnessSummary {
        family: family.label(),
        range: args.range,
        steps: args.steps,
        scans,
    };
    let path = suffixed(&args.out, "_summary.json");
    write_text(Some(&path), &to_json(&summary)?)?;
    Ok(())
}

#[derive(Serialize)]
struct FamilyDeviation {
    family: String,
    max_abs_deviation: f64,
    max_rel_deviation: f64,
    worst_delta_x1: f64,
    worst_delta_x2: f64,
    worst_eta: f64,
    within_tolerance: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    tolerance: f64,
    range: f64,
    steps: usize,
    etas: Vec<f64>,
    seed: u64,
    cutoff_limit: usize,
    families: Vec<FamilyDeviation>,
    all_within_tolerance: bool,
}

fn verify_families(args: &VerifyArgs) -> Result<Vec<StateFamily>, CliError> {
    match args.family {
        Some(pick) => Ok(vec![resolve_family(pick, args.r, args.nbar)?]),
        None => Ok(vec![
            StateFamily::Coherent,
            StateFamily::Squeezed {
                r: args.r.unwrap_or(1.0),
            },
            StateFamily::SinglePhoton,
            StateFamily::Thermal {
                nbar: args.nbar.unwrap_or(0.5),
            },
        ]),
    }
}

fn verify_etas(args: &VerifyArgs) -> Result<Vec<f64>, CliError> {
    if let Some(etas) = &args.eta {
        return Ok(etas.clone());
    }
    if let Some(losses) = &args.loss {
        return losses
            .iter()
            .map(|&l| {
                if !(0.0..=1.0).contains(&l) {
                    return Err(CliError::Usage(format!("--loss {l} is outside [0, 1]")));
                }
                Ok(1.0 - l)
            })
            .collect();
    }
    Ok(vec![0.0, 0.2, 0.5, 0.8, 1.0])
}

pub fn verify(args: VerifyArgs) -> Result<(), CliError> {
    if !(args.tol.is_finite() && args.tol > 0.0) {
        return Err(CliError::Usage(format!(
            "--tol {} is not a positive tolerance",
            args.tol
        )));
    }
    if !(args.range.is_finite() && args.range > 0.0) {
        return Err(CliError::Usage(format!(
            "--range {} is not a positive separation",
            args.range
        )));
    }
    if args.steps < 2 {
        return Err(CliError::Usage("--steps must be at least 2".into()));
    }
    let families = verify_families(&args)?;
    let etas = verify_etas(&args)?;
    if etas.is_empty() {
        return Err(CliError::Usage("no transmissivities to sweep".into()));
    }
    let oracle_tol = (args.tol / 100.0).clamp(1e-12, 1e-8);
    // Each pair sits at a seeded random center, so the sweep also
    // exercises translation invariance of the numeric route.
    let center_box = 0.25;
    let reach = args.range * std::f64::consts::FRAC_1_SQRT_2 + center_box * std::f64::consts::SQRT_2;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let axis: Vec<f64> = (0..args.steps)
        .map(|i| args.range * i as f64 / (args.steps - 1) as f64)
        .collect();
    let mut reports = Vec::new();
    let mut all_ok = true;
    for &family in &families {
        let mut worst_abs = 0.0f64;
        let mut worst_rel = 0.0f64;
        let mut worst_at = (0.0, 0.0, 1.0);
        for &eta in &etas {
            let spec = StateSpec::single_mode(family, eta)?;
            let analytic = KernelSpec::analytic(spec);
            let eval = NumericEvaluator::with_limit(&spec, reach, oracle_tol, args.cutoff_limit)?;
            for &d1 in &axis {
                for &d2 in &axis {
                    let c1 = rng.gen_range(-center_box..center_box);
                    let c2 = rng.gen_range(-center_box..center_box);
                    let x = DataPoint::single_mode(c1 + 0.5 * d1, c2 + 0.5 * d2)?;
                    let y = DataPoint::single_mode(c1 - 0.5 * d1, c2 - 0.5 * d2)?;
                    let closed = evaluate(&analytic, &x, &y)?;
                    let numeric = eval.eval(&x, &y)?;
                    let abs = (closed - numeric).abs();
                    let rel = abs / closed.abs().max(1e-12);
                    if abs > worst_abs {
                        worst_abs = abs;
                        worst_at = (d1, d2, eta);
                    }
                    worst_rel = worst_rel.max(rel);
                }
            }
        }
        let ok = worst_abs <= args.tol;
        all_ok &= ok;
        reports.push(FamilyDeviation {
            family: family.label(),
            max_abs_deviation: worst_abs,
            max_rel_deviation: worst_rel,
            worst_delta_x1: worst_at.0,
            worst_delta_x2: worst_at.1,
            worst_eta: worst_at.2,
            within_tolerance: ok,
        });
    }
    let report = VerifyReport {
        tolerance: args.tol,
        range: args.range,
        steps: args.steps,
        etas,
        seed: args.seed,
        cutoff_limit: args.cutoff_limit,
        families: reports,
        all_within_tolerance: all_ok,
    };
    write_text(args.out.as_ref(), &to_json(&report)?)?;
    if !all_ok {
        let breached: Vec<String> = report
            .families
            .iter()
            .filter(|f| !f.within_tolerance)
            .map(|f| format!("{} ({:.3e})", f.family, f.max_abs_deviation))
            .collect();
        return Err(CliError::Tolerance(format!(
            "deviation above {:.1e} for {}",
            args.tol,
            breached.join(", ")
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct GramFile {
    spec: StateSpec,
    size: usize,
    min_eigenvalue: f64,
    entries: Vec<Vec<f64>>,
}

pub fn gram_cmd(args: GramArgs) -> Result<(), CliError> {
    let family = args.family.resolve()?;
    let eta = args.channel.resolve()?;
    let dataset = read_dataset(&args.data)?;
    let spec = StateSpec::new(family, eta, dataset.modes())?;
    let g = gram(&KernelSpec::analytic(spec), &dataset.points)?;
    let m = g.size();
    let content = match args.format {
        FormatArg::Csv => {
            let mut out = (0..m)
                .map(|j| format!("k_{j}"))
                .collect::<Vec<_>>()
                .join(",");
            out.push('\n');
            for i in 0..m {
                let row: Vec<f64> = (0..m).map(|j| g.entries()[(i, j)]).collect();
                out.push_str(&csv_row(&row));
                out.push('\n');
            }
            out
        }
        FormatArg::Json => to_json(&GramFile {
            spec,
            size: m,
            min_eigenvalue: g.min_eigenvalue(),
            entries: (0..m)
                .map(|i| (0..m).map(|j| g.entries()[(i, j)]).collect())
                .collect(),
        })?,
    };
    write_text(args.out.as_ref(), &content)
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    kernel: KernelSpec,
    points: Vec<Vec<f64>>,
    labels: Vec<f64>,
    lambda: f64,
    training_size: usize,
    coefficients: Vec<f64>,
    norm_bound: f64,
    bound_rhs: f64,
    residual_inf: f64,
}

pub fn fit(args: FitArgs) -> Result<(), CliError> {
    let family = args.family.resolve()?;
    let eta = args.channel.resolve()?;
    let dataset = read_dataset(&args.data)?;
    let labels = dataset.labels.as_ref().ok_or_else(|| {
        CliError::Data(format!(
            "{}: no label column; fit needs labeled rows",
            args.data.display()
        ))
    })?;
    let spec = StateSpec::new(family, eta, dataset.modes())?;
    let kernel = KernelSpec::analytic(spec);
    let g = gram(&kernel, &dataset.points)?;
    let model = fit_krr(&g, labels, args.lambda)?;
    let m = model.training_size();
    let c = model.coefficients();
    let mut residual_inf = 0.0f64;
    for i in 0..m {
        let mut row = args.lambda * m as f64 * c[i] - labels[i];
        for (j, &cj) in c.iter().enumerate() {
            row += g.entries()[(i, j)] * cj;
        }
        residual_inf = residual_inf.max(row.abs());
    }
    let b = norm_bound(&model);
    let file = ModelFile {
        kernel,
        points: dataset
            .points
            .iter()
            .map(|p| p.coords().to_vec())
            .collect(),
        labels: labels.clone(),
        lambda: args.lambda,
        training_size: m,
        coefficients: c.to_vec(),
        norm_bound: b,
        bound_rhs: 2.0 * b / (m as f64).sqrt(),
        residual_inf,
    };
    write_text(args.out.as_ref(), &to_json(&file)?)
}

#[derive(Serialize)]
struct HeldOutReport {
    test_size: usize,
    empirical_error: f64,
    bound_rhs: f64,
}

pub fn predict(args: PredictArgs) -> Result<(), CliError> {
    let raw = fs::read_to_string(&args.data)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.data.display())))?;
    let file: ModelFile = serde_json::from_str(&raw)?;
    let points = file
        .points
        .into_iter()
        .map(DataPoint::new)
        .collect::<Result<Vec<_>, _>>()?;
    let model = KrrModel::from_parts(
        file.kernel,
        points,
        file.coefficients,
        file.lambda,
        file.norm_bound,
    )?;
    let query = read_dataset(&args.query)?;
    let mut out = query.coord_names.join(",");
    out.push_str(",prediction\n");
    let mut predictions = Vec::with_capacity(query.points.len());
    for point in &query.points {
        let value = predict_point(&model, point)?;
        predictions.push(value);
        let mut row: Vec<f64> = point.coords().to_vec();
        row.push(value);
        out.push_str(&csv_row(&row));
        out.push('\n');
    }
    write_text(args.out.as_ref(), &out)?;
    if let Some(labels) = query.labels {
        if !query.points.is_empty() {
            let set = LabeledDataset::new(query.points, labels)?;
            let report = generalization_report(&model, &set)?;
            let held_out = HeldOutReport {
                test_size: set.len(),
                empirical_error: report.empirical_error,
                bound_rhs: report.bound_rhs,
            };
            match &args.out {
                Some(path) => {
                    let stem = path
                        .file_stem()
                        .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
                    let report_path = path.with_file_name(format!("{stem}_report.json"));
                    write_text(Some(&report_path), &to_json(&held_out)?)?;
                }
                None => eprintln!("{}", to_json(&held_out)?.trim_end()),
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct GeometrySide {
    com_norm: f64,
    mean_sq_dist_to_com: f64,
}

#[derive(Serialize)]
struct ComparisonBlock {
    pairs: usize,
    wider_than_coherent: usize,
    narrower_than_coherent: usize,
    ties: usize,
    mixed: bool,
}

#[derive(Serialize)]
struct GeometryFile {
    spec: StateSpec,
    com_norm: f64,
    mean_sq_dist_to_com: f64,
    coherent_baseline: GeometrySide,
    comparison: Option<ComparisonBlock>,
}

pub fn geometry(args: GeometryArgs) -> Result<(), CliError> {
    let family = args.family.resolve()?;
    let eta = args.channel.resolve()?;
    let dataset = read_dataset(&args.data)?;
    let spec = StateSpec::new(family, eta, dataset.modes())?;
    let kernel = KernelSpec::analytic(spec);
    let report = geometry_report(&kernel, &dataset.points)?;
    match args.format {
        FormatArg::Csv => {
            let m = dataset.points.len();
            let mut out = (0..m)
                .map(|j| format!("d_{j}"))
                .collect::<Vec<_>>()
                .join(",");
            out.push('\n');
            for i in 0..m {
                let row: Vec<f64> = (0..m)
                    .map(|j| report.pairwise_sq_distances[(i, j)])
                    .collect();
                out.push_str(&csv_row(&row));
                out.push('\n');
            }
            write_text(args.out.as_ref(), &out)
        }
        FormatArg::Json => {
            let baseline_spec = StateSpec::new(StateFamily::Coherent, eta, dataset.modes())?;
            let baseline_kernel = KernelSpec::analytic(baseline_spec);
            let baseline = geometry_report(&baseline_kernel, &dataset.points)?;
            let comparison = if dataset.points.len() >= 2 {
                let cmp = separation_comparison(&kernel, &baseline_kernel, &dataset.points)?;
                Some(ComparisonBlock {
                    pairs: cmp.pairs.len(),
                    wider_than_coherent: cmp.a_greater,
                    narrower_than_coherent: cmp.b_greater,
                    ties: cmp.ties,
                    mixed: cmp.is_mixed(),
                })
            } else {
                None
            };
            let file = GeometryFile {
                spec,
                com_norm: report.com_norm,
                mean_sq_dist_to_com: report.mean_sq_dist_to_com,
                coherent_baseline: GeometrySide {
                    com_norm: baseline.com_norm,
                    mean_sq_dist_to_com: baseline.mean_sq_dist_to_com,
                },
                comparison,
            };
            write_text(args.out.as_ref(), &to_json(&file)?)
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Data(format!("could not serialize report: {e}")))?;
    text.push('\n');
    Ok(text)
}
