//! Seeded Monte Carlo studies over the solver pipeline.
//!
//! Every study draws from counter-based substreams keyed by
//! `(n index, trial, purpose)`, so runs are reproducible bit for bit across
//! reruns and worker counts: trials execute in parallel but their results are
//! gathered in trial order before any reduction.

use rand::Rng;
use rayon::prelude::*;

use crate::dynamics::{
    solve_projected, solve_random_graph, solve_reference, ExtensionKind, TimeGrid, Trajectory,
};
use crate::error::{Error, Result};
use crate::experiments::config::ExperimentConfig;
use crate::graphon::{
    field_projection_error, project_field, project_graphon, Graphon, Partition1D, ScalarField,
};
use crate::metrics::{
    linear_oracle_error, loglog_slope, regime_classify, sup_time_lp_error, theoretical_bound,
    BoundParams, LogLogFit,
};
use crate::sampling::{deterministic_nodes, sample_nodes, NodeSet, RngStream};

#[derive(Debug, Clone, Copy)]
enum Purpose {
    Nodes = 0,
    Edges = 1,
}

fn stream_for(seed: u64, n_index: usize, trial: usize, purpose: Purpose) -> RngStream {
    RngStream::new(
        seed,
        ((n_index as u64) << 40) | ((trial as u64) << 1) | purpose as u64,
    )
}

fn median(sorted: &[f64]) -> f64 {
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

fn draw_nodes(cfg: &ExperimentConfig, n: usize, n_index: usize, trial: usize) -> Result<NodeSet> {
    if cfg.random_nodes()? {
        sample_nodes(n, &stream_for(cfg.run.seed, n_index, trial, Purpose::Nodes))
    } else {
        deterministic_nodes(n)
    }
}

// ---------------------------------------------------------------------------
// Convergence sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub trial: usize,
    /// Mesh size of the trial's solver partition.
    pub delta: f64,
    /// `C(0,T; L^p)` error against the reference; `None` for stability aborts.
    pub error: Option<f64>,
    /// Optional `C(0,T; L^2)` error of the same run.
    pub error_l2: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// Median error per n over the non-aborted rows.
    pub medians: Vec<(usize, f64)>,
    pub fit: Option<LogLogFit>,
    /// Constant fitted to overlay the theoretical bound on the medians.
    pub fitted_c: Option<f64>,
    pub overlay: Vec<(usize, f64)>,
    pub aborted: usize,
}

enum Reference {
    Analytic,
    Projected(Box<Trajectory>),
}

fn resolve_reference(
    cfg: &ExperimentConfig,
    kernel: &Graphon,
    g: &ScalarField,
    grid: &TimeGrid,
    q_n: f64,
) -> Result<Reference> {
    let analytic_ok = cfg.run.p == 2.0 && kernel.is_constant().is_some();
    match cfg.reference.mode.as_str() {
        "analytic" => {
            if !analytic_ok {
                return Err(Error::config(
                    "reference.mode",
                    "analytic reference needs p = 2 and a constant kernel",
                ));
            }
            Ok(Reference::Analytic)
        }
        "auto" if analytic_ok => Ok(Reference::Analytic),
        _ => {
            let n_ref = cfg.reference.n_mult * *cfg.run.n_grid.last().unwrap();
            let grid_ref =
                TimeGrid::uniform(grid.t_end(), grid.n_steps() * cfg.reference.tau_div)?;
            let traj = solve_reference(kernel, q_n, g, cfg.run.p, n_ref, &grid_ref)?;
            Ok(Reference::Projected(Box::new(traj)))
        }
    }
}

fn error_vs_reference(
    traj: &Trajectory,
    reference: &Reference,
    g: &ScalarField,
    p: f64,
) -> Result<f64> {
    match reference {
        Reference::Analytic => Ok(linear_oracle_error(traj, g, p)?.sup_time_lp),
        Reference::Projected(ref_traj) => {
            let avg = ref_traj.averaged_onto(traj.partition());
            let a = traj.extend(ExtensionKind::PwLinearTime);
            let b = avg.extend(ExtensionKind::PwLinearTime);
            Ok(sup_time_lp_error(&a, &b, p)?.sup_time_lp)
        }
    }
}

/// For each `n` and trial: sample nodes and a graph, run the random-graph
/// scheme, and measure the `C(0,T; L^p)` distance to the reference solution.
/// Fits `log median error` against `log n` and overlays the theoretical bound
/// with a fitted constant.
pub fn convergence_sweep(cfg: &ExperimentConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    let kernel = cfg.build_graphon()?;
    let g = cfg.build_initial()?;
    let rule = cfg.sparsity.rule()?;
    let grid = cfg.time.grid()?;
    let mode = cfg.sample_mode()?;
    let p = cfg.run.p;
    let reference = resolve_reference(cfg, &kernel, &g, &grid, rule.q(*cfg.run.n_grid.last().unwrap()))?;

    let mut rows = Vec::with_capacity(cfg.run.n_grid.len() * cfg.run.trials);
    for (ni, &n) in cfg.run.n_grid.iter().enumerate() {
        let q_n = rule.q(n);
        let trial_rows: Vec<Result<SweepRow>> = (0..cfg.run.trials)
            .into_par_iter()
            .map(|trial| -> Result<SweepRow> {
                let started = std::time::Instant::now();
                let nodes = draw_nodes(cfg, n, ni, trial)?;
                let mut graph = crate::sampling::sample_graph(
                    &nodes,
                    &kernel,
                    q_n,
                    &stream_for(cfg.run.seed, ni, trial, Purpose::Edges),
                    mode,
                )?;
                if !cfg.run.loops {
                    graph = graph.with_zeroed_diagonal();
                }
                let delta = nodes.max_spacing();
                let solved = solve_random_graph(&graph, &g, p, &grid);
                let (error, error_l2) = match solved {
                    Ok(traj) => {
                        let e = error_vs_reference(&traj, &reference, &g, p)?;
                        let e2 = if cfg.study.also_l2 {
                            Some(error_vs_reference(&traj, &reference, &g, 2.0)?)
                        } else {
                            None
                        };
                        (Some(e), e2)
                    }
                    Err(Error::Unstable { .. }) => (None, None),
                    Err(other) => return Err(other),
                };
                log::info!(
                    "converge n={n} trial={trial} took {:.2?}",
                    started.elapsed()
                );
                Ok(SweepRow {
                    n,
                    trial,
                    delta,
                    error,
                    error_l2,
                    seed: cfg.run.seed,
                })
            })
            .collect();
        for row in trial_rows {
            rows.push(row?);
        }
    }

    let aborted = rows.iter().filter(|r| r.error.is_none()).count();
    let mut medians = Vec::new();
    for &n in &cfg.run.n_grid {
        let mut vals: Vec<f64> = rows
            .iter()
            .filter(|r| r.n == n)
            .filter_map(|r| r.error)
            .collect();
        if !vals.is_empty() {
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            medians.push((n, median(&vals)));
        }
    }
    let fit_points: Vec<(f64, f64)> = medians
        .iter()
        .filter(|&&(_, m)| m > 0.0)
        .map(|&(n, m)| (n as f64, m))
        .collect();
    let fit = if fit_points.len() >= 3 {
        Some(loglog_slope(&fit_points)?)
    } else {
        None
    };

    // bound overlay: shape from the theorem with c = 1, constant fitted as
    // the geometric mean of median / shape
    let mut shapes = Vec::new();
    for &(n, _) in &medians {
        let b = theoretical_bound(&BoundParams {
            n,
            q_n: rule.q(n),
            p,
            beta: cfg.bound.beta,
            tau: grid.tau(),
            theta: cfg.bound.theta,
            t_tail: cfg.bound.t_tail,
            c: 1.0,
        })?;
        shapes.push(b.epsilon);
    }
    let fitted_c = if medians.iter().all(|&(_, m)| m > 0.0) && !medians.is_empty() {
        let mean_log: f64 = medians
            .iter()
            .zip(&shapes)
            .map(|(&(_, m), &s)| (m / s).ln())
            .sum::<f64>()
            / medians.len() as f64;
        Some(mean_log.exp())
    } else {
        None
    };
    let overlay = match fitted_c {
        Some(c) => medians
            .iter()
            .zip(&shapes)
            .map(|(&(n, _), &s)| (n, c * s))
            .collect(),
        None => Vec::new(),
    };

    Ok(SweepOutcome {
        rows,
        medians,
        fit,
        fitted_c,
        overlay,
        aborted,
    })
}

// ---------------------------------------------------------------------------
// Scheme gap study
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct GapRow {
    pub n: usize,
    pub trial: usize,
    pub delta: f64,
    /// `|| v_check - u_check ||_{C(0,T;L^p)}`; `None` for stability aborts.
    pub gap: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct GapOutcome {
    pub rows: Vec<GapRow>,
    /// Per n: (q25, median, q75) of the gap over non-aborted trials.
    pub quantiles: Vec<(usize, f64, f64, f64)>,
    pub fit: Option<LogLogFit>,
    pub aborted: usize,
}

/// Gap between the random-graph scheme and the projected-weight scheme on the
/// same nodes and initial data; the empirical counterpart of the deviation
/// bound between the two discrete solutions.
pub fn scheme_gap_study(cfg: &ExperimentConfig) -> Result<GapOutcome> {
    cfg.validate()?;
    let kernel = cfg.build_graphon()?;
    let g = cfg.build_initial()?;
    let rule = cfg.sparsity.rule()?;
    let grid = cfg.time.grid()?;
    let mode = cfg.sample_mode()?;
    let p = cfg.run.p;

    let mut rows = Vec::with_capacity(cfg.run.n_grid.len() * cfg.run.trials);
    for (ni, &n) in cfg.run.n_grid.iter().enumerate() {
        let q_n = rule.q(n);
        let trial_rows: Vec<Result<GapRow>> = (0..cfg.run.trials)
            .into_par_iter()
            .map(|trial| -> Result<GapRow> {
                let nodes = draw_nodes(cfg, n, ni, trial)?;
                let mut graph = crate::sampling::sample_graph(
                    &nodes,
                    &kernel,
                    q_n,
                    &stream_for(cfg.run.seed, ni, trial, Purpose::Edges),
                    mode,
                )?;
                if !cfg.run.loops {
                    graph = graph.with_zeroed_diagonal();
                }
                let delta = nodes.max_spacing();
                let gap = match (
                    solve_random_graph(&graph, &g, p, &grid),
                    solve_projected(&kernel, &nodes, q_n, &g, p, &grid),
                ) {
                    (Ok(rand_traj), Ok(proj_traj)) => {
                        let a = rand_traj.extend(ExtensionKind::PwLinearTime);
                        let b = proj_traj.extend(ExtensionKind::PwLinearTime);
                        Some(sup_time_lp_error(&a, &b, p)?.sup_time_lp)
                    }
                    (Err(Error::Unstable { .. }), _) | (_, Err(Error::Unstable { .. })) => None,
                    (Err(e), _) | (_, Err(e)) => return Err(e),
                };
                Ok(GapRow {
                    n,
                    trial,
                    delta,
                    gap,
                    seed: cfg.run.seed,
                })
            })
            .collect();
        for row in trial_rows {
            rows.push(row?);
        }
    }

    let aborted = rows.iter().filter(|r| r.gap.is_none()).count();
    let mut quantiles = Vec::new();
    for &n in &cfg.run.n_grid {
        let mut vals: Vec<f64> = rows
            .iter()
            .filter(|r| r.n == n)
            .filter_map(|r| r.gap)
            .collect();
        if !vals.is_empty() {
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            quantiles.push((n, quantile(&vals, 0.25), median(&vals), quantile(&vals, 0.75)));
        }
    }
    let fit_points: Vec<(f64, f64)> = quantiles
        .iter()
        .filter(|&&(_, _, m, _)| m > 0.0)
        .map(|&(n, _, m, _)| (n as f64, m))
        .collect();
    let fit = if fit_points.len() >= 3 {
        Some(loglog_slope(&fit_points)?)
    } else {
        None
    };
    Ok(GapOutcome {
        rows,
        quantiles,
        fit,
        aborted,
    })
}

// ---------------------------------------------------------------------------
// Deviation study
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationRow {
    pub n: usize,
    pub trial: usize,
    /// `|| Z_n(t*) ||_{p,n}^p` for one resampled weight matrix.
    pub z_norm_p: f64,
}

#[derive(Debug, Clone)]
pub struct DeviationOutcome {
    pub rows: Vec<DeviationRow>,
    /// Monte Carlo mean of `|| Z_n ||_{p,n}^p` per n.
    pub means: Vec<(usize, f64)>,
    pub fit: Option<LogLogFit>,
}

/// One resampled deviation norm, streaming the Bernoulli draws without
/// materializing the weight matrix. The draw order matches `sample_graph`
/// pair for pair, so a given stream implies the same graph either way.
fn deviation_norm_streamed(
    v: &[f64],
    khat: &ndarray::Array2<f64>,
    q_n: f64,
    p: f64,
    stream: &RngStream,
) -> f64 {
    let n = v.len();
    let weight = 1.0 / q_n;
    let mut rng = stream.rng();
    let mut z = vec![0.0f64; n];
    for i in 0..n {
        let krow = khat.row(i);
        let vi = v[i];
        for j in i..n {
            let k = krow[j];
            let lam = if rng.gen::<f64>() < q_n * k { weight } else { 0.0 };
            let d = lam - k;
            if i != j && d != 0.0 {
                let a = crate::dynamics::f_p_raw(v[j] - vi, p) * d;
                z[i] += a;
                z[j] -= a;
            }
        }
    }
    let inv_n = 1.0 / n as f64;
    z.iter().map(|zi| (zi * inv_n).abs().powf(p)).sum::<f64>() * inv_n
}

/// Monte Carlo estimate of `E || Z_n(t*) ||_{p,n}^p` over resampled weight
/// matrices at a fixed node set, with a log-log fit of the mean against n.
pub fn deviation_study(cfg: &ExperimentConfig) -> Result<DeviationOutcome> {
    cfg.validate()?;
    if cfg.run.trials < 100 {
        return Err(Error::config(
            "run.trials",
            "deviation study needs at least 100 trials",
        ));
    }
    let kernel = cfg.build_graphon()?;
    let g = cfg.build_initial()?;
    let rule = cfg.sparsity.rule()?;
    let p = cfg.run.p;

    let mut rows = Vec::with_capacity(cfg.run.n_grid.len() * cfg.run.trials);
    let mut means = Vec::new();
    for (ni, &n) in cfg.run.n_grid.iter().enumerate() {
        let q_n = rule.q(n);
        // the node set is fixed per n; only the edge draws are resampled
        let nodes = draw_nodes(cfg, n, ni, 0)?;
        let part = nodes.solver_partition()?;
        let khat = project_graphon(&kernel, &part, q_n)?;
        let v = if cfg.study.t_star == 0.0 {
            project_field(&g, &part)
        } else {
            let grid = cfg.time.grid()?;
            let traj = solve_projected(&kernel, &nodes, q_n, &g, p, &grid)?;
            let vbar = traj.extend(ExtensionKind::PwConstantTime);
            vbar.values_at(cfg.study.t_star)
        };
        let values: Vec<f64> = (0..cfg.run.trials)
            .into_par_iter()
            .map(|trial| {
                deviation_norm_streamed(
                    &v,
                    &khat,
                    q_n,
                    p,
                    &stream_for(cfg.run.seed, ni, trial, Purpose::Edges),
                )
            })
            .collect();
        for (trial, &z_norm_p) in values.iter().enumerate() {
            rows.push(DeviationRow { n, trial, z_norm_p });
        }
        means.push((n, values.iter().sum::<f64>() / values.len() as f64));
    }

    let fit_points: Vec<(f64, f64)> = means
        .iter()
        .filter(|&&(_, m)| m > 0.0)
        .map(|&(n, m)| (n as f64, m))
        .collect();
    let fit = if fit_points.len() >= 3 {
        Some(loglog_slope(&fit_points)?)
    } else {
        None
    };
    Ok(DeviationOutcome { rows, means, fit })
}

// ---------------------------------------------------------------------------
// Spacing study
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct SpacingTailRow {
    pub n: usize,
    pub eps: f64,
    pub exact: f64,
    pub empirical: f64,
    /// Binomial standard error at the exact tail value.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxSpacingRow {
    pub n: usize,
    pub t: f64,
    /// `t log n / n`.
    pub threshold: f64,
    /// Empirical frequency of `max spacing <= threshold`.
    pub empirical: f64,
    /// Union-bound prediction `1 - n * n^{-t}`.
    pub union_bound: f64,
}

#[derive(Debug, Clone)]
pub struct SpacingOutcome {
    pub tails: Vec<SpacingTailRow>,
    pub max_rows: Vec<MaxSpacingRow>,
    pub trials: usize,
}

/// Empirical spacing tails against the exact law `(1 - eps)^n`, plus the
/// max-spacing concentration against its union-bound prediction. Works on the
/// raw `n + 1` spacings of sampled node sets.
pub fn spacing_study(cfg: &ExperimentConfig) -> Result<SpacingOutcome> {
    cfg.validate()?;
    if cfg.run.trials < 10_000 {
        return Err(Error::config(
            "run.trials",
            "spacing study needs at least 10^4 trials",
        ));
    }
    let trials = cfg.run.trials;
    let mut tails = Vec::new();
    let mut max_rows = Vec::new();
    for (ni, &n) in cfg.run.n_grid.iter().enumerate() {
        // one designated spacing per trial keeps the tail counts binomial
        let samples: Vec<(f64, f64)> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let nodes =
                    sample_nodes(n, &stream_for(cfg.run.seed, ni, trial, Purpose::Nodes))
                        .expect("n >= 1");
                let sp = nodes.spacings();
                let max = sp.iter().cloned().fold(0.0f64, f64::max);
                (sp[n / 2], max)
            })
            .collect();
        for &target in &cfg.study.epsilon_tails {
            let eps = 1.0 - target.powf(1.0 / n as f64);
            let exact = crate::sampling::spacing_tail_probability(n, eps)?;
            let hits = samples.iter().filter(|&&(d, _)| d >= eps).count();
            let empirical = hits as f64 / trials as f64;
            let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
            tails.push(SpacingTailRow {
                n,
                eps,
                exact,
                empirical,
                sigma,
            });
        }
        let t = cfg.study.spacing_t;
        let threshold = t * (n as f64).ln() / n as f64;
        let ok = samples.iter().filter(|&&(_, m)| m <= threshold).count();
        max_rows.push(MaxSpacingRow {
            n,
            t,
            threshold,
            empirical: ok as f64 / trials as f64,
            union_bound: (1.0 - (n as f64) * (n as f64).powf(-t)).max(0.0),
        });
    }
    Ok(SpacingOutcome {
        tails,
        max_rows,
        trials,
    })
}

// ---------------------------------------------------------------------------
// Piecewise-projection rate study
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct LipRow {
    pub member: String,
    pub delta: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LipFit {
    pub member: String,
    pub s: f64,
    pub q: f64,
    /// `s * min(1, q/p)`, the rate the projection bound predicts.
    pub predicted: f64,
    /// Slope of `log error` against `log (1/delta)`; a `delta^theta` decay
    /// shows up as `-theta`.
    pub slope: f64,
    pub r2: f64,
}

#[derive(Debug, Clone)]
pub struct LipOutcome {
    pub rows: Vec<LipRow>,
    pub fits: Vec<LipFit>,
}

fn sqrt_grid_field(m: usize) -> ScalarField {
    // cell averages of sqrt(x) on the uniform grid
    let values: Vec<f64> = (0..m)
        .map(|i| {
            let l = i as f64 / m as f64;
            let r = (i + 1) as f64 / m as f64;
            (2.0 / 3.0) * (r.powf(1.5) - l.powf(1.5)) * m as f64
        })
        .collect();
    ScalarField::sampled_grid(values).expect("finite values")
}

/// `|| F - F_n ||_p` across dyadic meshes for a smoothness corpus: a step
/// function at 1/3, a Holder-type kernel (sampled sqrt), and a smooth ramp.
/// Slopes are fitted per member and compared to the predicted rate.
pub fn lip_approx_study(cfg: &ExperimentConfig) -> Result<LipOutcome> {
    cfg.validate()?;
    let p = cfg.run.p;
    let corpus: Vec<(&str, ScalarField, f64, f64)> = vec![
        (
            "step_third",
            ScalarField::step(vec![0.0, 1.0 / 3.0, 1.0], vec![0.0, 1.0])?,
            1.0,
            1.0,
        ),
        ("holder_sqrt", sqrt_grid_field(1 << 12), 0.5, f64::INFINITY),
        ("smooth_affine", ScalarField::affine(0.0, 1.0)?, 1.0, f64::INFINITY),
    ];
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for (name, field, s, q) in &corpus {
        let mut pts = Vec::new();
        for &k in &cfg.study.mesh_exponents {
            let cells = 1usize << k;
            let part = Partition1D::uniform(cells)?;
            let delta = 1.0 / cells as f64;
            let error = field_projection_error(field, &part, p)?;
            rows.push(LipRow {
                member: name.to_string(),
                delta,
                error,
            });
            if error > 0.0 {
                pts.push((cells as f64, error));
            }
        }
        let predicted = regime_classify(p, *s, *q)?.theta;
        if pts.len() >= 3 {
            let fit = loglog_slope(&pts)?;
            fits.push(LipFit {
                member: name.to_string(),
                s: *s,
                q: *q,
                predicted,
                slope: fit.slope,
                r2: fit.r2,
            });
        }
    }
    Ok(LipOutcome { rows, fits })
}
