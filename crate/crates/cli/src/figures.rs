//! Figure reproduction: per-series CSV files and one SVG overlay per figure.

use std::f64::consts::PI;

use anyhow::{Context, Result};
use chronopath::{
    analytic_peaks, binomial_profile, gaussian_envelope, nudge_off_poles, peak_approximant, Branch,
    LogComplex, ModelParams, Normalization, PathAmplitudeProfile,
};
use clap::ValueEnum;
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::pole_hint;
use crate::svg::{self, Mark, Plot, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    /// Binomial weights B_n against the Gaussian envelope, N = 10, 100, 1000.
    Fig2,
    /// Exact |I| against the Gaussian peak approximant, N = 100, 1000, 10000.
    Fig3,
    /// |I| against t_c/σ_t for N = 300, 1200, 2600, 4600 and the λ = 0 case.
    Fig4,
}

impl FigureId {
    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
        }
    }

    fn default_steps(self) -> Vec<u64> {
        match self {
            FigureId::Fig2 => vec![10, 100, 1000],
            FigureId::Fig3 => vec![100, 1000, 10_000],
            FigureId::Fig4 => vec![300, 1200, 2600, 4600],
        }
    }

    fn abscissa_name(self) -> &'static str {
        match self {
            FigureId::Fig2 => "x_scaled",
            FigureId::Fig3 | FigureId::Fig4 => "t_c_scaled",
        }
    }
}

/// One curve of a figure before evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesSpec {
    pub n_steps: u64,
    /// Radians; 0 selects the commuting (binomial) case.
    pub theta: f64,
    pub normalization: Normalization,
    pub vertical_offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureSpec {
    pub figure: FigureId,
    pub series: Vec<SeriesSpec>,
}

impl FigureSpec {
    /// Caption defaults, with optional overrides of θ/π and the N list.
    pub fn new(
        figure: FigureId,
        theta_over_pi: Option<f64>,
        n_steps: Option<Vec<u64>>,
        normalization: Normalization,
    ) -> Self {
        let custom_steps = n_steps.is_some();
        let steps = n_steps.unwrap_or_else(|| figure.default_steps());
        let theta = match figure {
            FigureId::Fig2 => 0.0,
            _ => theta_over_pi.unwrap_or(2.23) * PI,
        };
        let mut series: Vec<SeriesSpec> = steps
            .iter()
            .enumerate()
            .map(|(i, &n_steps)| SeriesSpec {
                n_steps,
                theta,
                normalization,
                // Fig. 2 stacks its three pairs 0.2 apart.
                vertical_offset: if figure == FigureId::Fig2 {
                    0.2 * i as f64
                } else {
                    0.0
                },
            })
            .collect();
        if figure == FigureId::Fig4 && !custom_steps {
            series.push(SeriesSpec {
                n_steps: 1000,
                theta: 0.0,
                normalization,
                vertical_offset: 0.0,
            });
        }
        FigureSpec { figure, series }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub n: u64,
    pub abscissa: f64,
    pub magnitude: f64,
    pub phase: f64,
}

#[derive(Debug, Clone)]
pub struct SeriesData {
    pub file_stem: String,
    pub label: String,
    pub rows: Vec<Row>,
    pub mark: Mark,
    pub offset: f64,
    pub colour: usize,
    /// θ actually used, after any pole perturbation.
    pub theta: f64,
}

fn rows_from(amps: &[LogComplex], abscissa: impl Fn(u64) -> f64) -> Vec<Row> {
    amps.iter()
        .enumerate()
        .map(|(n, a)| {
            let n = n as u64;
            Row {
                n,
                abscissa: abscissa(n),
                magnitude: a.abs(),
                phase: a.phase(),
            }
        })
        .collect()
}

fn params_for(spec: &SeriesSpec, perturb: bool) -> Result<ModelParams> {
    let p = ModelParams::new(1.0, spec.theta, spec.n_steps)?;
    Ok(if perturb { nudge_off_poles(&p)? } else { p })
}

fn evaluate(
    figure: FigureId,
    spec: &SeriesSpec,
    index: usize,
    perturb: bool,
) -> Result<Vec<SeriesData>> {
    let n_steps = spec.n_steps;
    let norm = spec.normalization;
    let sqrt_n = (n_steps as f64).sqrt();
    match figure {
        FigureId::Fig2 => {
            let b = binomial_profile(n_steps);
            let dots: Vec<LogComplex> = b
                .normalized(norm)
                .into_iter()
                .map(LogComplex::from_real)
                .collect();
            // The envelope shares the dots' scale factor: g = 1 at the centre
            // for max normalization, and the same L2 rescaling otherwise.
            let scale = match norm {
                Normalization::Max => 1.0,
                Normalization::L2 => {
                    let max = b.normalized(Normalization::Max);
                    dots[0].abs() / max[0]
                }
            };
            let curve: Vec<LogComplex> = (0..=n_steps)
                .map(|n| LogComplex::from_real(scale * gaussian_envelope(b.abscissa(n), 1.0)))
                .collect();
            Ok(vec![
                SeriesData {
                    file_stem: format!("fig2_binomial_N{n_steps}"),
                    label: format!("B_n, N={n_steps}"),
                    rows: rows_from(&dots, |n| b.abscissa(n)),
                    mark: Mark::Dots,
                    offset: spec.vertical_offset,
                    colour: index,
                    theta: 0.0,
                },
                SeriesData {
                    file_stem: format!("fig2_gaussian_N{n_steps}"),
                    label: format!("g(x), N={n_steps}"),
                    rows: rows_from(&curve, |n| b.abscissa(n)),
                    mark: Mark::Line,
                    offset: spec.vertical_offset,
                    colour: index,
                    theta: 0.0,
                },
            ])
        }
        FigureId::Fig3 => {
            let p = params_for(spec, perturb)?;
            let profile = PathAmplitudeProfile::compute(&p)
                .map_err(pole_hint)
                .with_context(|| format!("fig3 series N={n_steps}"))?;
            let t_peak = analytic_peaks(&p)?.t_c_peak;
            let shift = |n: u64| (p.clock_time(n) - t_peak) / p.sigma_t();
            let approx: Vec<LogComplex> = (0..=n_steps)
                .map(|n| peak_approximant(&p, Branch::Plus, n))
                .collect::<chronopath::Result<_>>()?;
            let approx = PathAmplitudeProfile::from_amplitudes(&p, approx)?.normalized(norm);
            Ok(vec![
                SeriesData {
                    file_stem: format!("fig3_exact_N{n_steps}"),
                    label: format!("|I|, N={n_steps}"),
                    rows: rows_from(&profile.normalized(norm), shift),
                    mark: Mark::Dots,
                    offset: spec.vertical_offset,
                    colour: index,
                    theta: p.theta(),
                },
                SeriesData {
                    file_stem: format!("fig3_approx_N{n_steps}"),
                    label: format!("|f g|, N={n_steps}"),
                    rows: rows_from(&approx, shift),
                    mark: Mark::Line,
                    offset: spec.vertical_offset,
                    colour: index,
                    theta: p.theta(),
                },
            ])
        }
        FigureId::Fig4 => {
            let p = params_for(spec, perturb)?;
            let profile = PathAmplitudeProfile::compute(&p)
                .map_err(pole_hint)
                .with_context(|| format!("fig4 series N={n_steps}"))?;
            let commuting = spec.theta == 0.0;
            let stem = if commuting {
                format!("fig4_commuting_N{n_steps}")
            } else {
                format!("fig4_N{n_steps}")
            };
            let label = if commuting {
                format!("λ=0, N={n_steps}")
            } else {
                format!("N={n_steps}")
            };
            Ok(vec![SeriesData {
                file_stem: stem,
                label,
                rows: rows_from(&profile.normalized(norm), |n| {
                    (2.0 * n as f64 - n_steps as f64) / sqrt_n
                }),
                mark: Mark::Line,
                offset: spec.vertical_offset,
                colour: index,
                theta: p.theta(),
            }])
        }
    }
}

/// Evaluate all series in parallel. Failures are collected, not short-circuited.
pub fn compute(spec: &FigureSpec, perturb: bool) -> Result<Vec<SeriesData>> {
    let results: Vec<Result<Vec<SeriesData>>> = spec
        .series
        .par_iter()
        .enumerate()
        .map(|(i, s)| evaluate(spec.figure, s, i, perturb))
        .collect();
    let mut out = Vec::new();
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(v) => out.extend(v),
            Err(e) => errors.push(format!("{e:#}")),
        }
    }
    if !errors.is_empty() {
        anyhow::bail!("{} series failed:\n  {}", errors.len(), errors.join("\n  "));
    }
    Ok(out)
}

pub fn to_csv(figure: FigureId, data: &SeriesData) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", figure.abscissa_name(), "magnitude_normalized", "phase"])?;
    for r in &data.rows {
        w.write_record([
            r.n.to_string(),
            r.abscissa.to_string(),
            r.magnitude.to_string(),
            r.phase.to_string(),
        ])?;
    }
    Ok(w.into_inner()?)
}

pub fn to_svg(figure: FigureId, data: &[SeriesData]) -> String {
    let (title, x_label, x_range) = match figure {
        FigureId::Fig2 => (
            "Binomial weights and Gaussian envelope",
            "x/σ_x",
            Some((-4.0, 4.0)),
        ),
        FigureId::Fig3 => (
            "Interference peak: exact and approximant",
            "(t_c − t_c^peak)/σ_t",
            Some((-1.0, 1.0)),
        ),
        FigureId::Fig4 => ("Interference magnitude against clock time", "t_c/σ_t", None),
    };
    let series: Vec<Series> = data
        .iter()
        .map(|d| Series {
            label: d.label.clone(),
            points: d.rows.iter().map(|r| (r.abscissa, r.magnitude)).collect(),
            mark: d.mark,
            offset: d.offset,
            colour: d.colour,
        })
        .collect();
    svg::render(
        &Plot {
            title,
            x_label,
            y_label: "normalized magnitude",
            x_range,
        },
        &series,
    )
}
