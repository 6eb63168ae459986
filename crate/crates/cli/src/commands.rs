use std::collections::BTreeMap;
use std::f64::consts::PI;

use anyhow::{bail, Context, Result};
use chronopath::operators::{
    build_realization, coarse_grain_state, compare_path_sums, fidelity, peak_path_state,
    phenomenological_commutator, schrodinger_sweep,
};
use chronopath::peaks::index_variance;
use chronopath::uncertainty::{
    physical_scales, solve_min_uncertainty_theta, truncated_gaussian_moments, uncertainty_report,
    ScaleMode, ScalesInput, HALF_NORMAL_FACTOR,
};
use chronopath::{
    analytic_peaks, nudge_off_poles, numeric_peaks, on_pole_lattice, peak_spacing_bound, Error,
    ModelParams, PathAmplitudeProfile,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::figures::{self, FigureSpec};
use crate::manifest::OutputSink;
use crate::{FigureArgs, OracleArgs, PeaksArgs, ScalesArgs, SchrodingerArgs};

/// Outcome of a command that ran to completion.
pub enum Status {
    Ok,
    /// Outputs were written but a pass/fail check did not pass.
    CheckFailed(String),
}

/// Oracle threshold on the fidelity deficit.
const ORACLE_TOLERANCE: f64 = 1e-8;

fn params_map<T: Serialize>(args: &T) -> Result<BTreeMap<String, Value>> {
    match serde_json::to_value(args)? {
        Value::Object(map) => Ok(map.into_iter().collect()),
        other => bail!("unexpected parameter encoding {other}"),
    }
}

/// Attach the command-line hint to pole errors.
pub(crate) fn pole_hint(e: Error) -> anyhow::Error {
    let hinted = matches!(e, Error::SingularDenominator { .. });
    let err = anyhow::Error::new(e);
    if hinted {
        err.context("θ sits on the pole lattice; rerun with --perturb-theta-on-pole")
    } else {
        err
    }
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    Ok(w.into_inner()?)
}

pub fn figure(args: &FigureArgs) -> Result<Status> {
    let spec = FigureSpec::new(
        args.figure,
        args.theta_over_pi,
        args.n_steps.clone(),
        args.normalization,
    );
    let data = figures::compute(&spec, args.common.perturb_theta_on_pole)?;

    let mut sink = OutputSink::create(&args.common.out)?;
    for d in &data {
        sink.write(
            &format!("{}.csv", d.file_stem),
            &figures::to_csv(args.figure, d)?,
        )?;
    }
    let name = args.figure.name();
    sink.write(
        &format!("{name}.svg"),
        figures::to_svg(args.figure, &data).as_bytes(),
    )?;

    let mut params = params_map(args)?;
    params.insert("spec".into(), serde_json::to_value(&spec)?);
    let effective: Vec<Value> = data
        .iter()
        .map(|d| {
            json!({
                "file": format!("{}.csv", d.file_stem),
                "theta": d.theta,
                "vertical_offset": d.offset,
                "rows": d.rows.len(),
            })
        })
        .collect();
    params.insert("series".into(), Value::Array(effective));
    sink.finish(&format!("figure {name}"), params)?;
    Ok(Status::Ok)
}

#[derive(Debug, Serialize)]
struct OracleRow {
    n_steps: u64,
    theta: f64,
    delta_t: f64,
    fidelity: f64,
    deficit: f64,
}

pub fn oracle(args: &OracleArgs) -> Result<Status> {
    if args.n_max == 0 || args.n_max > 14 {
        bail!("--n-max must lie in 1..=14, got {}", args.n_max);
    }
    if args.dim > 256 {
        bail!("--dim must be at most 256, got {}", args.dim);
    }
    let theta = args.theta_over_pi * PI;
    let commuting = theta == 0.0;
    let lambda = if commuting { 0.0 } else { 1.0 };
    let base = build_realization(args.dim, lambda)?;

    let rows: Vec<Result<OracleRow>> = (1..=args.n_max)
        .into_par_iter()
        .map(|n_steps| {
            let (theta_used, delta_t, real) = if commuting {
                // Any step works for commuting generators.
                let dt = 0.1;
                (0.0, dt, base.clone())
            } else {
                let mut p = ModelParams::new(1.0, theta, n_steps)?;
                if args.common.perturb_theta_on_pole {
                    p = nudge_off_poles(&p)?;
                } else if on_pole_lattice(&p) {
                    // Surface the same error the closed form would raise.
                    PathAmplitudeProfile::compute(&p).map_err(pole_hint)?;
                }
                let dt = (p.theta() / (lambda * n_steps as f64)).sqrt();
                (p.theta(), dt, base.centered_for_paths(n_steps as f64 * dt))
            };
            let res = compare_path_sums(&real, n_steps, delta_t).map_err(pole_hint)?;
            Ok(OracleRow {
                n_steps,
                theta: theta_used,
                delta_t,
                fidelity: res.fidelity,
                deficit: 1.0 - res.fidelity,
            })
        })
        .collect();
    let rows: Vec<OracleRow> = rows.into_iter().collect::<Result<_>>()?;

    let worst = rows.iter().map(|r| r.deficit).fold(0.0, f64::max);
    let pass = worst <= ORACLE_TOLERANCE;
    let mut sink = OutputSink::create(&args.common.out)?;
    sink.write(
        "oracle.csv",
        &csv_bytes(
            &["n_steps", "theta", "delta_t", "fidelity", "deficit"],
            rows.iter().map(|r| {
                vec![
                    r.n_steps.to_string(),
                    r.theta.to_string(),
                    r.delta_t.to_string(),
                    r.fidelity.to_string(),
                    r.deficit.to_string(),
                ]
            }),
        )?,
    )?;
    sink.write_json(
        "oracle.json",
        &json!({
            "dim": args.dim,
            "lambda": lambda,
            "max_deficit": worst,
            "tolerance": ORACLE_TOLERANCE,
            "pass": pass,
            "rows": rows,
        }),
    )?;
    sink.finish("oracle", params_map(args)?)?;
    for r in &rows {
        println!(
            "N={:2}  fidelity={:.15}  deficit={:.3e}",
            r.n_steps, r.fidelity, r.deficit
        );
    }
    if pass {
        Ok(Status::Ok)
    } else {
        Ok(Status::CheckFailed(format!(
            "largest fidelity deficit {worst:e} exceeds {ORACLE_TOLERANCE:e}"
        )))
    }
}

pub fn schrodinger(args: &SchrodingerArgs) -> Result<Status> {
    let theta = args.theta_over_pi * PI;
    let real = build_realization(args.dim, 1.0)?;
    let params = real.model_params(theta, args.n_steps)?;
    let peaks = analytic_peaks(&params)?;
    let t_c = args.t_c.unwrap_or(peaks.t_c_peak);
    let centred = real.centered_for_paths(args.n_steps as f64 * params.delta_t());

    let sweep = schrodinger_sweep(&centred, &params, t_c, &args.h)?;
    let ratios: Vec<Option<f64>> = (0..sweep.len())
        .map(|i| sweep.get(i + 1).map(|next| sweep[i].1 / next.1))
        .collect();
    let comm = phenomenological_commutator(&real, &params)?;
    let cg_fidelity = fidelity(
        &coarse_grain_state(&centred, &params)?,
        &peak_path_state(&centred, &params)?,
    );

    let mut sink = OutputSink::create(&args.common.out)?;
    sink.write(
        "schrodinger.csv",
        &csv_bytes(
            &["h", "residual", "ratio"],
            sweep.iter().zip(&ratios).map(|((h, r), q)| {
                vec![
                    h.to_string(),
                    r.to_string(),
                    q.map(|v| v.to_string()).unwrap_or_default(),
                ]
            }),
        )?,
    )?;
    sink.write_json(
        "schrodinger.json",
        &json!({
            "theta": theta,
            "lambda": real.lambda(),
            "t_c": t_c,
            "a_plus": peaks.a_plus,
            "a_minus": peaks.a_minus,
            "residuals": sweep.iter().map(|(h, r)| json!({"h": h, "residual": r})).collect::<Vec<_>>(),
            "ratios": ratios,
            "commutator": {
                "scalar": [comm.scalar.re, comm.scalar.im],
                "target": [comm.target.re, comm.target.im],
                "from_weights": [comm.from_weights.re, comm.from_weights.im],
                "relative_error": comm.relative_error(),
                "interior_defect": comm.interior_defect,
            },
            "coarse_grain_fidelity": cg_fidelity,
        }),
    )?;
    sink.finish("schrodinger", params_map(args)?)?;
    for ((h, r), q) in sweep.iter().zip(&ratios) {
        match q {
            Some(q) => println!("h={h:<8} residual={r:.6e}  ratio={q:.4}"),
            None => println!("h={h:<8} residual={r:.6e}"),
        }
    }
    println!(
        "[H_phen, T⁻¹H_phen T] = {:.12}i·λ (target {:.12}i·λ)",
        comm.scalar.im / real.lambda(),
        comm.target.im / real.lambda()
    );
    Ok(Status::Ok)
}

fn scales_input(args: &ScalesArgs) -> ScalesInput {
    ScalesInput {
        f: args.f,
        delta_t_min: args.delta_t_min,
        lambda_override: args.lambda,
    }
}

pub fn uncertainty(args: &ScalesArgs) -> Result<Status> {
    let input = scales_input(args);
    let report = uncertainty_report(&input)?;
    let theta_star = solve_min_uncertainty_theta();
    let quad = truncated_gaussian_moments(report.delta_tc, args.grid);
    let closed = HALF_NORMAL_FACTOR / (4.0 * report.delta_tc * report.delta_tc);

    let mut sink = OutputSink::create(&args.common.out)?;
    sink.write_json(
        "uncertainty.json",
        &json!({
            "theta_star": {"value": theta_star, "over_pi": theta_star / PI, "unit": "rad"},
            "tan_quarter_theta_star": (theta_star / 4.0).tan(),
            "var_tc_bound": {"value": report.var_tc_bound, "unit": "s^2"},
            "var_tc_energy_time": {"value": report.var_tc_energy_time, "unit": "s^2"},
            "var_h": {"value": report.var_h, "unit": "s^-2"},
            "energy_time_product": (report.var_h * report.var_tc_energy_time).sqrt(),
            "half_line_energy": {
                "mean": quad.mean,
                "variance_quadrature": quad.variance,
                "variance_closed_form": closed,
                "unit_mean": "s^-1",
                "unit_variance": "s^-2",
            },
            "tc_min_peak": {"value": report.tc_min_peak, "unit": "s"},
            "delta_tc": {"value": report.delta_tc, "unit": "s"},
            "lambda": {"value": report.lambda_used, "unit": "s^-2"},
        }),
    )?;
    sink.finish("uncertainty", params_map(args)?)?;
    println!(
        "θ* = {:.6}π, tan(θ*/4) = {:.4}",
        theta_star / PI,
        (theta_star / 4.0).tan()
    );
    println!(
        "Δt_c = {:.4e} s, t_c,min = {:.4e} s",
        report.delta_tc, report.tc_min_peak
    );
    Ok(Status::Ok)
}

pub fn scales(args: &ScalesArgs) -> Result<Status> {
    let input = scales_input(args);
    let modes = [ScaleMode::MesonScale, ScaleMode::NatureChosen];
    let mut out = serde_json::Map::new();
    for mode in modes {
        let s = physical_scales(&input, mode)?;
        let key = serde_json::to_value(mode)?
            .as_str()
            .context("mode name")?
            .to_string();
        out.insert(
            key,
            json!({
                "lambda": {"value": s.lambda, "unit": "s^-2"},
                "tc_min_peak": {"value": s.tc_min_peak, "unit": "s"},
                "delta_tc": {"value": s.delta_tc, "unit": "s"},
                "delta_tc_over_delta_t_min": s.delta_tc / input.delta_t_min,
            }),
        );
        println!(
            "{:?}: λ = {:.4e} s⁻², t_c,min = {:.4e} s, Δt_c = {:.4e} s",
            mode, s.lambda, s.tc_min_peak, s.delta_tc
        );
    }
    out.insert(
        "delta_t_min".into(),
        json!({"value": input.delta_t_min, "unit": "s"}),
    );
    out.insert("f".into(), json!(input.f));
    let mut sink = OutputSink::create(&args.common.out)?;
    sink.write_json("scales.json", &Value::Object(out))?;
    sink.finish("scales", params_map(args)?)?;
    Ok(Status::Ok)
}

#[derive(Debug, Serialize)]
struct PeakRow {
    n_steps: u64,
    theta: f64,
    n_plus: f64,
    n_minus: f64,
    n_hat_plus: u64,
    n_hat_minus: u64,
    t_c_peak_scaled: f64,
    t_c_numeric_scaled: f64,
    width_var_tc: f64,
    index_variance: f64,
    spacing: f64,
    spacing_large_n: f64,
}

pub fn peaks(args: &PeaksArgs) -> Result<Status> {
    let theta = args.theta_over_pi * PI;
    let perturb = args.common.perturb_theta_on_pole;
    let rows: Vec<Result<PeakRow>> = args
        .n_steps
        .par_iter()
        .map(|&n_steps| {
            let mut p = ModelParams::new(1.0, theta, n_steps)?;
            if perturb {
                p = nudge_off_poles(&p)?;
            }
            let a = analytic_peaks(&p)?;
            let profile = PathAmplitudeProfile::compute(&p).map_err(pole_hint)?;
            let (hat_plus, hat_minus) = numeric_peaks(&profile)?;
            Ok(PeakRow {
                n_steps,
                theta: p.theta(),
                n_plus: a.n_plus,
                n_minus: a.n_minus,
                n_hat_plus: hat_plus,
                n_hat_minus: hat_minus,
                t_c_peak_scaled: a.t_c_peak / p.sigma_t(),
                t_c_numeric_scaled: p.clock_time(hat_plus) / p.sigma_t(),
                width_var_tc: a.width_var_tc,
                index_variance: index_variance(&p)?,
                spacing: a.spacing,
                spacing_large_n: a.spacing_large_n,
            })
        })
        .collect();
    let mut ok = Vec::new();
    let mut errors = Vec::new();
    for r in rows {
        match r {
            Ok(row) => ok.push(row),
            Err(e) => errors.push(format!("{e:#}")),
        }
    }
    if !errors.is_empty() {
        bail!(
            "{} of {} evaluations failed:\n  {}",
            errors.len(),
            args.n_steps.len(),
            errors.join("\n  ")
        );
    }

    let bound = match args.delta_t_min {
        Some(d) => {
            let p = ModelParams::new(1.0, theta, 1)?.with_delta_t_min(d)?;
            let n_min = p.n_min().context("N_min")?;
            let p = p.with_n_steps(n_min)?;
            let b = peak_spacing_bound(&p)?;
            Some(json!({
                "delta_t_min": d,
                "n_min": n_min,
                "spacing": b.spacing,
                "spacing_large_n": b.spacing_large_n,
                "limit": b.limit,
                "bound_ok": b.bound_ok,
                "t_c_min_peak": analytic_peaks(&p)?.t_c_min_peak,
            }))
        }
        None => None,
    };

    let mut sink = OutputSink::create(&args.common.out)?;
    sink.write(
        "peaks.csv",
        &csv_bytes(
            &[
                "n_steps",
                "theta",
                "n_plus",
                "n_minus",
                "n_hat_plus",
                "n_hat_minus",
                "t_c_peak_scaled",
                "t_c_numeric_scaled",
                "width_var_tc",
                "spacing",
                "spacing_large_n",
            ],
            ok.iter().map(|r| {
                vec![
                    r.n_steps.to_string(),
                    r.theta.to_string(),
                    r.n_plus.to_string(),
                    r.n_minus.to_string(),
                    r.n_hat_plus.to_string(),
                    r.n_hat_minus.to_string(),
                    r.t_c_peak_scaled.to_string(),
                    r.t_c_numeric_scaled.to_string(),
                    r.width_var_tc.to_string(),
                    r.spacing.to_string(),
                    r.spacing_large_n.to_string(),
                ]
            }),
        )?,
    )?;
    sink.write_json("peaks.json", &json!({"rows": ok, "spacing_bound": bound}))?;
    sink.finish("peaks", params_map(args)?)?;
    for r in &ok {
        println!(
            "N={:<6} n̂+={:<6} t_c/σ_t: analytic {:.3}, numeric {:.3}",
            r.n_steps, r.n_hat_plus, r.t_c_peak_scaled, r.t_c_numeric_scaled
        );
    }
    Ok(Status::Ok)
}
