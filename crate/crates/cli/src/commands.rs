use serde::Serialize;
use serde_json::json;
use siegel_core::bifurc::{
    bn_scaling_experiment, class_map_pgm, classify_raster, noble_radius_experiment, slice_current_density,
    BnScalingOptions, Budgets, CellClass, CurrentDensity, GridSpec, NobleOptions, Raster, RowStatus,
};
use siegel_core::cubic::CubicMap;
use siegel_core::numerics::convert;
use siegel_core::parabolic::{
    count_fixed_points, jellouli_stat, rational_multiplier, winding_experiment, JellouliSampling, WindingControl,
};
use siegel_core::rotation::{brjuno_sum, cf_value, convergents, is_bounded_type};
use siegel_core::siegel::{conformal_radius_coeffs, linearizer, MIN_RADIUS_ORDER};
use siegel_core::{ComplexExt, Real, Result, XComplex, XReal, C64};

use crate::config::*;
use crate::report::{log10_pair, Check, Report};

pub fn run(config: &RunConfig) -> Result<Report> {
    match &config.command {
        Command::Convergents(a) => run_convergents(a),
        Command::Brjuno(a) => run_brjuno(a),
        Command::BnScaling(a) => run_bn_scaling(a),
        Command::Radius(a) => run_radius(a),
        Command::Classify(a) => run_grid(a, GridKind::Classify, config),
        Command::LyapunovMap(a) => run_grid(a, GridKind::Lyapunov, config),
        Command::CurrentDensity(a) => run_grid(a, GridKind::Current, config),
        Command::FixedPoints(a) => run_fixed_points(a),
        Command::Winding(a) => run_winding(a),
        Command::Jellouli(a) => run_jellouli(a),
        Command::NobleRadius(a) => run_noble(a),
    }
}

fn xc(z: C64) -> XComplex {
    convert::<f64, XReal>(&z)
}

fn siegel_lambda(cf: &Cf) -> XComplex {
    XComplex::unit_turn(&cf_value::<XReal>(&cf.0))
}

#[derive(Serialize)]
struct ConvergentRow {
    n: usize,
    a_n: i128,
    p: i128,
    q: i128,
    p_over_q: f64,
    /// `q²|θ − p/q|`.
    q2_error: f64,
}

fn run_convergents(args: &ConvergentsArgs) -> Result<Report> {
    let theta = cf_value::<XReal>(&args.cf.0);
    let conv = convergents(&args.cf.0, args.n)?;
    let rows: Vec<ConvergentRow> = conv
        .iter()
        .map(|c| {
            let q = XReal::from_i64(c.q as i64);
            let err = (theta.clone() - c.value::<XReal>()).abs() * q.clone() * q;
            ConvergentRow {
                n: c.n,
                a_n: args.cf.0.partial(c.n).unwrap_or(0),
                p: c.p,
                q: c.q,
                p_over_q: c.p as f64 / c.q as f64,
                q2_error: err.to_f64(),
            }
        })
        .collect();
    let det_ok = conv.windows(2).all(|w| {
        let d = w[1].p * w[0].q - w[0].p * w[1].q;
        d == if w[1].n % 2 == 1 { 1 } else { -1 }
    });
    let approx_ok = rows.iter().all(|r| r.q2_error < 1.0);
    Ok(Report::new(&rows, json!({ "cf": args.cf.to_string(), "theta": theta.to_f64() }))?
        .check(Check::new("determinant", det_ok, "p_n q_{n-1} - p_{n-1} q_n = (-1)^{n-1}"))
        .check(Check::new("approximation", approx_ok, "q_n^2 |theta - p_n/q_n| < 1")))
}

#[derive(Serialize)]
struct BrjunoRow {
    n: usize,
    q_n: i128,
    partial_sum: f64,
    tail_bound: Option<f64>,
}

fn run_brjuno(args: &BrjunoArgs) -> Result<Report> {
    let conv = convergents(&args.cf.0, args.n)?;
    let rows: Vec<BrjunoRow> = (0..=args.n)
        .map(|n| {
            let s = brjuno_sum(&args.cf.0, n)?;
            Ok(BrjunoRow { n, q_n: conv[n].q, partial_sum: s.partial_sum, tail_bound: s.tail_bound })
        })
        .collect::<Result<_>>()?;
    let monotone = rows.windows(2).all(|w| w[1].partial_sum >= w[0].partial_sum);
    let last = rows.last().map_or(0.0, |r| r.partial_sum);
    // Every earlier partial sum plus its tail bound must dominate later sums.
    let consistent = rows.iter().all(|r| r.tail_bound.is_none_or(|t| r.partial_sum + t >= last * (1.0 - 1e-12)));
    let bounded = is_bounded_type(&args.cf.0);
    Ok(Report::new(
        &rows,
        json!({ "cf": args.cf.to_string(), "bounded_type": bounded.bounded, "bound": bounded.bound }),
    )?
    .check(Check::new("monotone", monotone, "partial sums are nondecreasing"))
    .check(Check::new("tail-bound", consistent, "partial sum + tail bound dominates later partial sums")))
}

#[derive(Serialize)]
struct BnRowOut {
    n: usize,
    q: i128,
    status: RowStatus,
    b_log10_abs: Option<f64>,
    b_arg_over_pi: Option<f64>,
    /// `(1/q) log|b_n|`.
    root_growth: Option<f64>,
    neg_log_r_hat: f64,
    e_n: Option<f64>,
    residual: Option<f64>,
    bits: Option<u32>,
    note: Option<String>,
}

fn run_bn_scaling(args: &BnScalingArgs) -> Result<Report> {
    let opts = BnScalingOptions {
        radius_order: args.radius_order,
        max_bits: args.max_bits,
        degeneracy_threshold: args.threshold,
    };
    let table = bn_scaling_experiment::<XReal>(args.a.0, &args.cf.0, args.nmin..=args.nmax, &opts)?;
    let rows: Vec<BnRowOut> = table
        .rows
        .iter()
        .map(|r| {
            let pair = r.log_abs_b.zip(r.arg_b_over_pi).map(|(l, t)| log10_pair(l, t));
            BnRowOut {
                n: r.n,
                q: r.q,
                status: r.status,
                b_log10_abs: pair.map(|p| p.0),
                b_arg_over_pi: pair.map(|p| p.1),
                root_growth: r.root_growth,
                neg_log_r_hat: table.neg_log_r_hat,
                e_n: r.e_n,
                residual: r.residual,
                bits: r.bits,
                note: r.note.clone(),
            }
        })
        .collect();
    let check = table.check(args.min_final_q as i128);
    let summary = json!({
        "a": [args.a.0.re, args.a.0.im],
        "cf": args.cf.to_string(),
        "r_hat": table.r_hat,
        "r_hat_err": table.r_hat_err,
        "radius_order": table.radius_order,
        "neg_log_r_hat": table.neg_log_r_hat,
        "truncated": table.truncated().and_then(|r| r.note.clone()),
    });
    let mut report = Report::new(&rows, summary)?.check(Check::new(
        "scaling",
        check.passed,
        if check.passed {
            format!("final q = {:?}, e_n = {:?} <= 0.05, decreasing", check.final_q, check.final_e)
        } else {
            check.problems.join("; ")
        },
    ));
    if let Some(r) = table.refused() {
        report.refusal = Some(format!(
            "b_n(a) vanishes (or nearly) at q = {}: the limit |b_n|^(1/q_n) -> 1/r(a) only holds where b_n != 0",
            r.q
        ));
    }
    Ok(report)
}

#[derive(Serialize)]
struct RadiusRow {
    order: usize,
    r_hat: f64,
    r_hat_err: f64,
}

fn run_radius(args: &RadiusArgs) -> Result<Report> {
    let f = CubicMap::new(siegel_lambda(&args.cf), xc(args.a.0));
    let series = linearizer(&f, args.order)?;
    let coeffs = series.psi.coeffs();
    let rows: Vec<RadiusRow> = [args.order / 4, args.order / 2, args.order]
        .into_iter()
        .filter(|&k| k >= MIN_RADIUS_ORDER)
        .map(|k| conformal_radius_coeffs(&coeffs[..=k]).map(|(r, e)| RadiusRow { order: k, r_hat: r, r_hat_err: e }))
        .collect::<Result<_>>()?;
    let stable = match rows.as_slice() {
        [.., half, full] if half.order * 2 == full.order => Some((full.r_hat - half.r_hat).abs() / full.r_hat),
        _ => None,
    };
    let summary = json!({
        "a": [args.a.0.re, args.a.0.im],
        "cf": args.cf.to_string(),
        "small_divisor_min": series.small_divisor_min,
        "doubling_change": stable,
    });
    Ok(Report::new(&rows, summary)?.check(Check::new(
        "doubling-stability",
        stable.is_some_and(|s| s <= 0.02),
        format!("relative change K/2 -> K = {stable:?} (limit 0.02)"),
    )))
}

enum GridKind {
    Classify,
    Lyapunov,
    Current,
}

#[derive(Serialize)]
struct CellRow {
    row: usize,
    col: usize,
    re_a: f64,
    im_a: f64,
    class: &'static str,
    k: Option<usize>,
    component: Option<usize>,
    /// `|w| / r_hat` of the landing point, for capture cells.
    w_over_r: Option<f64>,
    lyapunov: Option<f64>,
    mass: Option<f64>,
}

fn run_grid(args: &GridArgs, kind: GridKind, config: &RunConfig) -> Result<Report> {
    let spec = GridSpec::new(args.center.0, args.half_width, args.resolution)?;
    let budgets = Budgets {
        escape: args.escape_budget,
        capture: args.capture_budget,
        safety: args.safety,
        series_order: args.series_order,
        tol: args.tol,
    };
    let lambda = C64::unit_turn(&cf_value::<f64>(&args.cf.0));
    let raster = classify_raster(&lambda, &spec, &budgets)?;
    let density = match kind {
        GridKind::Current => Some(slice_current_density(&raster)?),
        _ => None,
    };
    let n = spec.resolution;
    let rows: Vec<CellRow> = raster
        .cells
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let (class, k) = match c.class {
                CellClass::Escape => ("escape", None),
                CellClass::Capture { k } => ("capture", Some(k)),
                CellClass::Undecided => ("undecided", None),
            };
            CellRow {
                row: i / n,
                col: i % n,
                re_a: c.a.re,
                im_a: c.a.im,
                class,
                k,
                component: c.component,
                w_over_r: c.aux.get("w_abs").zip(c.aux.get("r_hat")).map(|(w, r)| w / r),
                lyapunov: c.lyapunov,
                mass: density.as_ref().and_then(|d| d.mass[i]),
            }
        })
        .collect();
    let bad = raster.lyapunov_violations();
    let mut report = Report::new(&rows, grid_summary(args, &raster, density.as_ref()))?.check(Check::new(
        "capture-lyapunov",
        bad.is_empty(),
        format!("{} capture cells with |L - log 3| > 2 tol", bad.len()),
    ));
    if let Some(d) = &density {
        report = report.check(Check::new(
            "mask-fraction",
            !d.warning,
            format!("masked fraction {:.4} (warning above 0.5)", d.mask_fraction),
        ));
    }
    report.pgm = Some(class_map_pgm(&raster, &[crate::report::generator(), format!("config: {}", config.to_json())]));
    Ok(report)
}

fn grid_summary(args: &GridArgs, raster: &Raster, density: Option<&CurrentDensity>) -> serde_json::Value {
    let mut s = json!({
        "cf": args.cf.to_string(),
        "escape": raster.count(|c| *c == CellClass::Escape),
        "capture": raster.count(|c| matches!(c, CellClass::Capture { .. })),
        "undecided": raster.count(|c| *c == CellClass::Undecided),
        "components": raster.components,
        "cell_area": raster.spec.cell_area(),
    });
    if let Some(d) = density {
        s["total_mass"] = json!(d.total);
        s["mask_fraction"] = json!(d.mask_fraction);
        s["warning"] = json!(d.warning);
    }
    s
}

#[derive(Serialize)]
struct FixedRow {
    n: usize,
    q: i128,
    winding: i64,
    n_extra: i64,
    n_extra_over_q: f64,
    samples: usize,
}

fn run_fixed_points(args: &FixedPointArgs) -> Result<Report> {
    let a = xc(args.a.0);
    let series = linearizer(&CubicMap::new(siegel_lambda(&args.cf), a.clone()), args.order)?;
    let rows: Vec<FixedRow> = convergents(&args.cf.0, args.nmax)?
        .into_iter()
        .filter(|c| c.n >= args.nmin)
        .map(|c| {
            let f_n = CubicMap::new(rational_multiplier::<XReal>(c.p, c.q)?, a.clone());
            let r = count_fixed_points(&f_n, &series, c.q as usize, args.r1, args.samples)?;
            Ok(FixedRow {
                n: c.n,
                q: c.q,
                winding: r.winding,
                n_extra: r.n_extra,
                n_extra_over_q: r.n_extra as f64 / c.q as f64,
                samples: r.samples,
            })
        })
        .collect::<Result<_>>()?;
    let none = rows.iter().all(|r| r.n_extra == 0);
    let ratio = rows.iter().all(|r| r.n_extra_over_q <= 0.1);
    Ok(Report::new(&rows, json!({ "a": [args.a.0.re, args.a.0.im], "cf": args.cf.to_string(), "r1": args.r1 }))?
        .check(Check::new("no-extra-fixed-points", none, "N_extra = 0 at every stage"))
        .check(Check::new("extra-ratio", ratio, "N_extra / q_n <= 0.1")))
}

#[derive(Serialize)]
struct WindingRow {
    n: usize,
    q: i128,
    total_arg_variation: f64,
    net_arg_change: f64,
    band_crossings: usize,
    path_samples: usize,
}

/// Closed circular path with `points` segments.
pub fn circle_path(centre: C64, radius: f64, points: usize) -> Vec<C64> {
    (0..=points).map(|j| centre + C64::from_polar(radius, std::f64::consts::TAU * j as f64 / points as f64)).collect()
}

fn run_winding(args: &WindingArgs) -> Result<Report> {
    let path = circle_path(args.a.0, args.path_radius, args.points.max(3));
    let ctl = WindingControl {
        depth: args.depth,
        series_order: args.series_order,
        capture_budget: args.capture_budget,
        safety: args.safety,
        min_step: args.min_step,
    };
    let rows: Vec<WindingRow> = (args.nmin..=args.nmax)
        .map(|n| {
            let w = winding_experiment(&path, &args.cf.0, n, &ctl)?;
            Ok(WindingRow {
                n,
                q: w.q,
                total_arg_variation: w.total_arg_variation,
                net_arg_change: w.net_arg_change,
                band_crossings: w.band_crossings,
                path_samples: w.samples.len(),
            })
        })
        .collect::<Result<_>>()?;
    let growth = winding_growth(&rows.iter().map(|r| (r.q, r.total_arg_variation)).collect::<Vec<_>>());
    let crossing = rows.last().is_some_and(|r| r.band_crossings >= 1);
    let summary = json!({
        "a": [args.a.0.re, args.a.0.im],
        "cf": args.cf.to_string(),
        "path_radius": args.path_radius,
        "growth_ratios": growth.1,
    });
    Ok(Report::new(&rows, summary)?
        .check(Check::new("growth", growth.0, "variation ratio within 50% of q_{n+1}/q_n between consecutive stages"))
        .check(Check::new("band-crossing", crossing, "at least one band crossing at the largest stage")))
}

/// Whether each consecutive variation ratio is within 50% of `q_{n+1}/q_n`,
/// and the ratios `(V_{n+1}/V_n) / (q_{n+1}/q_n)`.
pub fn winding_growth(stages: &[(i128, f64)]) -> (bool, Vec<f64>) {
    let rel: Vec<f64> = stages.windows(2).map(|w| (w[1].1 / w[0].1) / (w[1].0 as f64 / w[0].0 as f64)).collect();
    let ok = !rel.is_empty() && rel.iter().all(|r| (r - 1.0).abs() <= 0.5);
    (ok, rel)
}

#[derive(Serialize)]
struct JellouliRow {
    n: usize,
    q: i128,
    c_hat: f64,
    samples_used: usize,
    skipped: usize,
}

fn run_jellouli(args: &JellouliArgs) -> Result<Report> {
    let sampling = JellouliSampling { r0: args.r0, m: args.m, seed: args.seed };
    let a = xc(args.a.0);
    let rows: Vec<JellouliRow> = (args.nmin..=args.nmax)
        .map(|n| {
            let s = jellouli_stat(&a, &args.cf.0, n, args.order, &sampling)?;
            Ok(JellouliRow { n, q: s.q, c_hat: s.c_hat, samples_used: s.samples_used, skipped: s.skipped.len() })
        })
        .collect::<Result<_>>()?;
    let (lo, hi) = rows.iter().fold((f64::INFINITY, 0.0_f64), |(l, h), r| (l.min(r.c_hat), h.max(r.c_hat)));
    let ratio = hi / lo;
    let ok = rows.iter().all(|r| r.c_hat.is_finite()) && ratio <= 10.0;
    Ok(Report::new(
        &rows,
        json!({ "a": [args.a.0.re, args.a.0.im], "cf": args.cf.to_string(), "max_over_min": ratio }),
    )?
    .check(Check::new("bounded", ok, format!("max/min of C_hat = {ratio:.4} (limit 10)"))))
}

fn run_noble(args: &NobleArgs) -> Result<Report> {
    let opts = NobleOptions { series_order: args.order, capture_budget: args.capture_budget, safety: args.safety };
    let table = noble_radius_experiment::<XReal>(args.a.0, &args.cf.0, args.nmin..=args.nmax, &opts)?;
    let check = table.check();
    let summary = json!({
        "a": [args.a.0.re, args.a.0.im],
        "cf": args.cf.to_string(),
        "reference_r_hat": table.reference_r_hat,
        "reference_depth": table.reference_depth,
        "final_relative_error": check.final_relative_error,
    });
    Ok(Report::new(&table.rows, summary)?.check(Check::new(
        "noble-approximation",
        check.passed,
        if check.passed { "radius within 5% and depth stable".to_string() } else { check.problems.join("; ") },
    )))
}
