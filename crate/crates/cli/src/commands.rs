//! Subcommand implementations.

use std::collections::BTreeMap;
use std::fs;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use rand::Rng;
use serde_json::json;

use toric_loss::analysis::boundary::{fit_phase_boundary, linear_slope, linearized_boundary};
use toric_loss::analysis::fit::{
    crossing_point_bootstrap, fit_scaling, CountPoint, ScalingPoint, ThresholdFit, Weighting,
};
use toric_loss::analysis::percolation::{
    collapse_ratio, mean_largest_superplaquette, percolation_fit, solve_p_scale, PercolationSample,
};
use toric_loss::analysis::{estimate_pfail_taus, trial_rng, PfailEstimate};
use toric_loss::degrade::{apply_losses, form_superplaquettes, restored_weights, LossPattern};
use toric_loss::lattice::ToricLattice;
use toric_loss::matching::{build_syndrome_graph, min_weight_perfect_matching};
use toric_loss::noise::{compute_syndrome, sample_errors};
use toric_loss::oracle::{enumerate_matchings, presentation_bias_test, MAX_ENUMERATED_NODES};

use crate::output::{fit_row, pfail_row, Run, Table, FIT_HEADER, PFAIL_HEADER};
use crate::{
    Cli, Command, GridArgs, OracleCheckArgs, PercolationArgs, PhaseDiagramArgs, SimulateArgs,
    TauSweepArgs, ThresholdArgs, WeightingArg,
};

/// Substream for analysis-side randomness (bootstrap, oracle instances),
/// disjoint from the loss and error streams.
const ANALYSIS_STREAM: u64 = 2;

/// Outcome of a subcommand: files written, a JSON summary for the manifest,
/// and whether its checks passed.
struct Report {
    outputs: Vec<String>,
    summary: serde_json::Value,
    ok: bool,
}

pub fn run(cli: &Cli) -> Result<ExitCode> {
    let common = &cli.common;
    if common.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(common.workers)
            .build_global()
            .context("configuring the worker pool")?;
    }
    fs::create_dir_all(&common.out)
        .with_context(|| format!("creating {}", common.out.display()))?;
    let run = Run::start();
    let report = match &cli.command {
        Command::Simulate(args) => simulate(cli, args)?,
        Command::Threshold(args) => threshold(cli, args)?,
        Command::PhaseDiagram(args) => phase_diagram(cli, args)?,
        Command::Percolation(args) => percolation(cli, args)?,
        Command::TauSweep(args) => tau_sweep(cli, args)?,
        Command::OracleCheck(args) => oracle_check(cli, args)?,
    };
    run.write_manifest(&common.out, cli, common.seed, &report.outputs, &report.summary)?;
    println!("{}", serde_json::to_string_pretty(&report.summary)?);
    Ok(if report.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn weighting(arg: WeightingArg) -> Weighting {
    match arg {
        WeightingArg::InverseVariance => Weighting::InverseVariance,
        WeightingArg::Uniform => Weighting::Uniform,
    }
}

fn check_grid(grid: &GridArgs) -> Result<()> {
    if grid.sizes.is_empty() {
        bail!("--sizes must name at least one lattice size");
    }
    if grid.trials == 0 {
        bail!("--trials must be at least 1");
    }
    if grid.p_comp.is_empty() && grid.grid_points == 0 {
        bail!("--grid-points must be at least 1");
    }
    Ok(())
}

/// The explicit grid, or points spaced evenly around the small-loss
/// prediction at `p_loss`.
fn p_comp_grid(grid: &GridArgs, p_loss: f64) -> Result<Vec<f64>> {
    if !grid.p_comp.is_empty() {
        return Ok(grid.p_comp.clone());
    }
    let centre = linearized_boundary(p_loss)?.p_thr;
    let half = (grid.grid_points - 1) as f64 / 2.0;
    Ok((0..grid.grid_points)
        .map(|k| centre + (k as f64 - half) * grid.grid_spacing)
        // Round away binary noise so grid values print cleanly.
        .map(|p| (p * 1e9).round() / 1e9)
        .filter(|&p| p > 0.0 && p < 0.5)
        .collect())
}

/// Per `τ`, per size, the sampled curve.
type Curves = BTreeMap<usize, Vec<(f64, PfailEstimate)>>;

/// Fill the `p_comp` grid for every size, writing one row per cell and `τ`.
fn sample_grid(
    cli: &Cli,
    grid: &GridArgs,
    p_loss: f64,
    taus: &[f64],
    table: &mut Table,
) -> Result<Vec<Curves>> {
    let points = p_comp_grid(grid, p_loss)?;
    let mut curves = vec![Curves::new(); taus.len()];
    for &size in &grid.sizes {
        for &p in &points {
            let ests = estimate_pfail_taus(size, p_loss, p, taus, grid.trials, cli.common.seed)?;
            for (k, (&tau, est)) in taus.iter().zip(ests).enumerate() {
                table.row(pfail_row(size, p_loss, p, tau, &est))?;
                curves[k].entry(size).or_default().push((p, est));
            }
        }
    }
    Ok(curves)
}

fn fit_curves(curves: &Curves, weighting: Weighting) -> Result<ThresholdFit> {
    let points: Vec<ScalingPoint> = curves
        .iter()
        .flat_map(|(&size, curve)| {
            curve.iter().map(move |(p, est)| ScalingPoint {
                size,
                p: *p,
                p_fail: est.p_fail,
                n_trials: est.n_trials,
            })
        })
        .collect();
    Ok(fit_scaling(&points, weighting)?)
}

fn count_points(curve: &[(f64, PfailEstimate)]) -> Vec<CountPoint> {
    curve
        .iter()
        .map(|(p, est)| CountPoint {
            p: *p,
            n_fail: est.n_fail,
            n_trials: est.n_trials,
        })
        .collect()
}

fn fit_summary(fit: &ThresholdFit) -> serde_json::Value {
    json!({
        "p_thr": fit.p_thr,
        "p_thr_err": fit.p_thr_err,
        "nu0": fit.nu0,
        "nu0_err": fit.nu0_err,
        "a": fit.a,
        "b": fit.b,
        "resid": fit.resid,
        "weighting": fit.weighting,
    })
}

fn simulate(cli: &Cli, args: &SimulateArgs) -> Result<Report> {
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let mut table = Table::create(&cli.common.out, "pfail.csv", &PFAIL_HEADER)?;
    let est = estimate_pfail_taus(
        args.size,
        args.p_loss,
        args.p_comp,
        &[args.tau],
        args.trials,
        cli.common.seed,
    )?
    .remove(0);
    table.row(pfail_row(args.size, args.p_loss, args.p_comp, args.tau, &est))?;
    Ok(Report {
        outputs: vec![table.name()],
        summary: json!({ "p_fail": est.p_fail, "stderr": est.stderr, "n_fail": est.n_fail }),
        ok: true,
    })
}

fn threshold(cli: &Cli, args: &ThresholdArgs) -> Result<Report> {
    check_grid(&args.grid)?;
    let out = &cli.common.out;
    let mut pfail = Table::create(out, "pfail.csv", &PFAIL_HEADER)?;
    let curves = sample_grid(cli, &args.grid, args.p_loss, &[args.tau], &mut pfail)?.remove(0);

    let mut crossings = Table::create(
        out,
        "crossings.csv",
        &["L_a", "L_b", "p_cross", "stderr", "replicates"],
    )?;
    let mut rng = trial_rng(cli.common.seed, u64::MAX, ANALYSIS_STREAM);
    let sizes: Vec<usize> = curves.keys().copied().collect();
    let mut missing = Vec::new();
    for (i, &a) in sizes.iter().enumerate() {
        for &b in &sizes[i + 1..] {
            match crossing_point_bootstrap(
                &count_points(&curves[&a]),
                &count_points(&curves[&b]),
                args.resamples,
                &mut rng,
            ) {
                Ok(c) => crossings.row([
                    a.to_string(),
                    b.to_string(),
                    c.p.to_string(),
                    c.stderr.to_string(),
                    c.replicates.to_string(),
                ])?,
                Err(_) => missing.push(format!("{a}/{b}")),
            }
        }
    }

    let mut fits = Table::create(out, "fit.csv", &FIT_HEADER)?;
    let fit = fit_curves(&curves, weighting(args.grid.weighting))?;
    fits.row(fit_row(args.p_loss, &fit))?;
    Ok(Report {
        outputs: vec![pfail.name(), crossings.name(), fits.name()],
        summary: json!({
            "fit": fit_summary(&fit),
            "pairs_without_crossing": missing,
        }),
        ok: true,
    })
}

fn phase_diagram(cli: &Cli, args: &PhaseDiagramArgs) -> Result<Report> {
    check_grid(&args.grid)?;
    let out = &cli.common.out;
    let mut pfail = Table::create(out, "pfail.csv", &PFAIL_HEADER)?;
    let mut fits = Table::create(out, "fit.csv", &FIT_HEADER)?;
    let mut linear = Table::create(
        out,
        "linearized.csv",
        &["p_loss", "p_thr_implicit", "p_thr_linear"],
    )?;
    let mut triples = Vec::new();
    let mut failed_fits = Vec::new();
    for &p_loss in &args.p_loss {
        let lb = linearized_boundary(p_loss)?;
        linear.row([p_loss.to_string(), lb.p_thr.to_string(), lb.linear.to_string()])?;
        let curves = sample_grid(cli, &args.grid, p_loss, &[args.tau], &mut pfail)?.remove(0);
        match fit_curves(&curves, weighting(args.grid.weighting)) {
            Ok(fit) => {
                fits.row(fit_row(p_loss, &fit))?;
                triples.push((p_loss, fit.p_thr, fit.p_thr_err));
            }
            Err(e) => failed_fits.push(json!({ "p_loss": p_loss, "error": e.to_string() })),
        }
    }
    let mut outputs = vec![pfail.name(), fits.name(), linear.name()];
    let boundary = if triples.len() >= 3 {
        let b = fit_phase_boundary(&triples)?;
        let mut table = Table::create(
            out,
            "boundary.csv",
            &["c0", "c1", "c2", "c0_err", "c1_err", "c2_err", "zero_crossing", "alpha_analytic"],
        )?;
        table.row([
            b.coefficients[0].to_string(),
            b.coefficients[1].to_string(),
            b.coefficients[2].to_string(),
            b.errors[0].to_string(),
            b.errors[1].to_string(),
            b.errors[2].to_string(),
            b.zero_crossing.map_or(String::new(), |x| x.to_string()),
            linear_slope().to_string(),
        ])?;
        outputs.push(table.name());
        json!({
            "coefficients": b.coefficients,
            "errors": b.errors,
            "alpha": b.slope(),
            "alpha_err": b.slope_err(),
            "alpha_analytic": linear_slope(),
            "zero_crossing": b.zero_crossing,
        })
    } else {
        json!(null)
    };
    Ok(Report {
        outputs,
        summary: json!({ "boundary": boundary, "failed_fits": failed_fits }),
        ok: failed_fits.is_empty(),
    })
}

fn percolation(cli: &Cli, args: &PercolationArgs) -> Result<Report> {
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let out = &cli.common.out;
    let seed = cli.common.seed;
    let mut mu = Table::create(out, "mu.csv", &["L", "p_loss", "n_trials", "mu"])?;
    let mut samples = Vec::new();
    for &size in &args.sizes {
        for &p_loss in &args.p_loss {
            let m = mean_largest_superplaquette(size, p_loss, args.trials, seed)?;
            mu.row([size.to_string(), p_loss.to_string(), args.trials.to_string(), m.to_string()])?;
            samples.push(PercolationSample { size, p_loss, mu: m });
        }
    }
    let fit = percolation_fit(&samples)?;
    let ratio = collapse_ratio(&samples, &fit);
    let mut fit_table = Table::create(
        out,
        "percolation_fit.csv",
        &["chi", "xi", "resid", "collapse_ratio"],
    )?;
    fit_table.row([
        fit.chi.to_string(),
        fit.xi.to_string(),
        fit.resid.to_string(),
        ratio.to_string(),
    ])?;

    let fine: Vec<f64> = (0..=40).map(|k| 0.3 + 0.005 * k as f64).collect();
    let mut scale = Table::create(out, "p_scale.csv", &["L", "p_scale"])?;
    let mut scales = BTreeMap::new();
    for &size in &args.scale_sizes {
        let mut curve = Vec::new();
        for &p in &fine {
            let m = mean_largest_superplaquette(size, p, args.trials, seed)?;
            mu.row([size.to_string(), p.to_string(), args.trials.to_string(), m.to_string()])?;
            curve.push((p, m));
        }
        let p_scale = solve_p_scale(size, &curve)?;
        scale.row([size.to_string(), p_scale.to_string()])?;
        scales.insert(size, p_scale);
    }
    Ok(Report {
        outputs: vec![mu.name(), fit_table.name(), scale.name()],
        summary: json!({
            "chi": fit.chi,
            "xi": fit.xi,
            "collapse_ratio": ratio,
            "p_scale": scales,
        }),
        ok: true,
    })
}

fn tau_sweep(cli: &Cli, args: &TauSweepArgs) -> Result<Report> {
    check_grid(&args.grid)?;
    if args.taus.is_empty() {
        bail!("--taus must name at least one value");
    }
    let out = &cli.common.out;
    let mut pfail = Table::create(out, "pfail.csv", &PFAIL_HEADER)?;
    let curves = sample_grid(cli, &args.grid, 0.0, &args.taus, &mut pfail)?;
    let mut header = vec!["tau"];
    header.extend(FIT_HEADER);
    let mut fits = Table::create(out, "tau_fit.csv", &header)?;
    let mut summary = Vec::new();
    for (&tau, curves) in args.taus.iter().zip(&curves) {
        let fit = fit_curves(curves, weighting(args.grid.weighting))?;
        let mut row = vec![tau.to_string()];
        row.extend(fit_row(0.0, &fit));
        fits.row(row)?;
        summary.push(json!({ "tau": tau, "p_thr": fit.p_thr, "p_thr_err": fit.p_thr_err, "nu0": fit.nu0 }));
    }
    Ok(Report {
        outputs: vec![pfail.name(), fits.name()],
        summary: json!({ "thresholds": summary }),
        ok: true,
    })
}

fn oracle_check(cli: &Cli, args: &OracleCheckArgs) -> Result<Report> {
    if args.max_size < 3 {
        bail!("--max-size must be at least 3");
    }
    if args.p_loss.is_empty() || args.taus.is_empty() {
        bail!("--p-loss and --taus must be non-empty");
    }
    let out = &cli.common.out;
    let mut table = Table::create(
        out,
        "oracle.csv",
        &["instance", "L", "p_loss", "nodes", "tau", "solver_weight", "enumerated_weight", "match"],
    )?;
    let mut mismatches = 0;
    for i in 0..args.instances {
        let mut rng = trial_rng(cli.common.seed, i as u64, ANALYSIS_STREAM);
        let p_loss = args.p_loss[i % args.p_loss.len()];
        // Redraw until the syndrome is non-empty and small enough to enumerate.
        let (size, degraded, syndrome) = loop {
            let size = rng.random_range(3..=args.max_size);
            let p_comp = rng.random_range(0.03..0.2);
            let lattice = ToricLattice::new(size)?;
            let loss = apply_losses(&lattice, p_loss, &mut rng)?;
            let partition = form_superplaquettes(&lattice, &loss);
            let degraded = restored_weights(&lattice, &loss, &partition, p_comp)?;
            let error = sample_errors(&loss, p_comp, &mut rng)?;
            let syndrome = compute_syndrome(&degraded, &error);
            if !syndrome.is_empty() && syndrome.len() <= MAX_ENUMERATED_NODES {
                break (size, degraded, syndrome);
            }
        };
        for &tau in &args.taus {
            let graph = build_syndrome_graph(&degraded, &syndrome, tau)?;
            let solved = min_weight_perfect_matching(&graph)?.weight;
            let best = enumerate_matchings(&graph)?.min_weight();
            let agree = (solved - best).abs() <= 1e-9 * best.abs().max(1.0);
            mismatches += !agree as usize;
            table.row([
                i.to_string(),
                size.to_string(),
                p_loss.to_string(),
                syndrome.len().to_string(),
                tau.to_string(),
                solved.to_string(),
                best.to_string(),
                agree.to_string(),
            ])?;
        }
    }

    // Four nodes on L = 8 with two minimum-distance matchings of
    // degeneracy 1 and 9.
    let lattice = ToricLattice::new(8)?;
    let loss = LossPattern::none(&lattice);
    let degraded = restored_weights(&lattice, &loss, &form_superplaquettes(&lattice, &loss), 0.1)?;
    let labels = [
        lattice.cell_id(0, 0),
        lattice.cell_id(0, 3),
        lattice.cell_id(2, 1),
        lattice.cell_id(2, 4),
    ];
    let mut bias = Table::create(out, "bias.csv", &["tau", "matching", "count"])?;
    let mut bias_summary = Vec::new();
    let mut unanimous = true;
    for tau in [0.0, 1.0] {
        let histogram = presentation_bias_test(&degraded, &labels, tau)?;
        for (pairs, count) in &histogram {
            let text = pairs
                .iter()
                .map(|(a, b)| format!("{a}-{b}"))
                .collect::<Vec<_>>()
                .join(" ");
            bias.row([tau.to_string(), text.clone(), count.to_string()])?;
            bias_summary.push(json!({ "tau": tau, "matching": text, "count": count }));
        }
        if tau > 0.0 {
            unanimous &= histogram.len() == 1;
        }
    }
    Ok(Report {
        outputs: vec![table.name(), bias.name()],
        summary: json!({
            "instances": args.instances,
            "mismatches": mismatches,
            "bias": bias_summary,
            "degenerate_choice_unanimous": unanimous,
        }),
        ok: mismatches == 0 && unanimous,
    })
}
