//! One function per subcommand. Every command writes CSV tables whose `#`
//! headers carry the resolved configuration, appends a run record to the
//! JSON-lines store, and reports success (0), unconverged (2) or error (1)
//! through [`Outcome`].

use crate::config::Config;
use crate::svg::LineChart;
use repulsion_core::capacity::{
    extrapolate_capacity, kernel_matrix, kkt_report, solve_obstacle, verify_inverse_identity,
    CapacityResult, ObstacleProblem, ObstacleSample,
};
use repulsion_core::conditional::{g_l_curve, markov_check, BoxGeometry};
use repulsion_core::experiments::{
    height_run, inverse_positivity_scan, rate_table, HeightConfig, JsonlStore, RateAsymptote,
    RepulsionConfig, RunRecord,
};
use repulsion_core::lattice::validate_model;
use repulsion_core::spectral::{
    decay_constant, empirical_covariance, green_infinite, GreenTable, QuadratureSpec,
    SpectralSampler,
};
use repulsion_core::table::{full, CsvTable};
use repulsion_core::{LatticeField, TorusGrid};
use serde_json::json;
use std::error::Error;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Unconverged,
}

pub struct Ctx {
    pub cfg: Config,
    pub out_dir: PathBuf,
    pub plot: bool,
    pub command: &'static str,
    started: Instant,
}

impl Ctx {
    pub fn new(cfg: Config, out_dir: PathBuf, plot: bool, command: &'static str) -> Self {
        Self {
            cfg,
            out_dir,
            plot,
            command,
            started: Instant::now(),
        }
    }

    fn table<S: Into<String>>(&self, columns: impl IntoIterator<Item = S>) -> CsvTable {
        let mut t = CsvTable::new(columns);
        t.comment("command", self.command);
        for (k, v) in self.cfg.entries() {
            t.comment(k, v);
        }
        t
    }

    fn out(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn record(&self, estimates: serde_json::Value, diagnostics: serde_json::Value) {
        let store_name = self
            .cfg
            .get("output.store")
            .unwrap_or("runs.jsonl")
            .to_string();
        let store = JsonlStore::open(self.out(&store_name));
        let config: serde_json::Map<String, serde_json::Value> = self
            .cfg
            .entries()
            .map(|(k, v)| (k.to_string(), serde_json::Value::String(v.to_string())))
            .collect();
        let seed = self.cfg.seed().unwrap_or(0);
        let record = RunRecord::new(
            format!("{}-{}", self.command, seed),
            self.command,
            seed,
            serde_json::Value::Object(config),
            estimates,
            diagnostics,
            self.started.elapsed().as_secs_f64(),
        );
        if let Err(e) = store.append(&record) {
            eprintln!("warning: could not persist run record: {e}");
        }
    }
}

type CommandResult = Result<Outcome, Box<dyn Error>>;

pub fn run_validate(ctx: &Ctx) -> CommandResult {
    let model = ctx.cfg.model()?;
    let report = validate_model(&model);
    let mut t = ctx.table(["requirement", "status", "witness", "detail"]);
    t.row([
        "dimension_bound".to_string(),
        if report.dimension_ok { "pass" } else { "fail" }.to_string(),
        String::new(),
        format!("d = {}; minimal degree k = {}", model.d, model.q.min_degree()),
    ]);
    let positivity_witness = report
        .violations
        .iter()
        .find_map(|v| v.witness)
        .map(full)
        .unwrap_or_default();
    let positivity_detail = report
        .violations
        .iter()
        .find(|v| v.witness.is_some())
        .map(|v| v.detail.clone())
        .unwrap_or_else(|| "q > 0 on (0, 2]".to_string());
    t.row([
        "symbol_positivity".to_string(),
        if report.positivity_ok { "pass" } else { "fail" }.to_string(),
        positivity_witness,
        positivity_detail,
    ]);
    t.write_to(ctx.out("validate.csv"))?;
    ctx.record(
        json!({"passed": report.passed()}),
        json!({"violations": report.violations.len()}),
    );
    if report.passed() {
        println!("model ok: d = {}, k = {}", model.d, model.q.min_degree());
        Ok(Outcome::Success)
    } else {
        Err(format!(
            "model fails {}",
            report
                .violations
                .iter()
                .map(|v| format!("{:?}", v.requirement))
                .collect::<Vec<_>>()
                .join(", ")
        )
        .into())
    }
}

pub fn run_green(ctx: &Ctx) -> CommandResult {
    let model = ctx.cfg.model()?;
    let grid = ctx.cfg.grid(model.d)?;
    let table = GreenTable::compute(&model.q, grid)?;
    let mut quad = QuadratureSpec::for_dimension(model.d);
    quad.nodes_per_axis = ctx.cfg.usize_or("green.nodes", quad.nodes_per_axis)?;
    quad.richardson_levels = ctx.cfg.usize_or("green.levels", quad.richardson_levels)?;
    let max_disp = ctx.cfg.usize_or("green.max_displacement", 5)?;

    let mut t = ctx.table([
        "displacement",
        "torus_value",
        "quadrature_value",
        "quadrature_error_estimate",
        "relative_difference",
    ]);
    let mut converged = true;
    for r in 0..=max_disp {
        let mut x = vec![0i64; model.d];
        x[0] = r as i64;
        let quad_val = green_infinite(&model.q, model.d, &x, &quad);
        converged &= quad_val.converged;
        let torus = table.value(&x);
        t.row([
            r.to_string(),
            full(torus),
            full(quad_val.value),
            full(quad_val.error_estimate),
            full((torus - quad_val.value).abs() / quad_val.value.abs().max(1e-300)),
        ]);
    }
    t.write_to(ctx.out("green.csv"))?;

    let radii_min = ctx.cfg.usize_or("green.radii_min", if model.d <= 3 { 15 } else { 8 })?;
    let radii_max = ctx.cfg.usize_or("green.radii_max", if model.d <= 3 { 30 } else { 16 })?;
    let decay = decay_constant(&model.q, model.d, radii_min..=radii_max, &quad);
    let mut rt = ctx.table(["radius", "ratio_axis", "ratio_diagonal"]);
    rt.comment("eta_k", full(decay.eta_k));
    rt.comment("eta_k_diagonal", full(decay.eta_k_diagonal));
    rt.comment("fit_error", full(decay.fit_error));
    for row in &decay.rows {
        rt.row([full(row.radius), full(row.along_axis), full(row.along_diagonal)]);
    }
    rt.write_to(ctx.out("green_ratios.csv"))?;

    if ctx.plot {
        let mut chart = LineChart::new("decay ratio q_k G(0,x) |x|^{d-2k}");
        chart.series(
            "axis",
            decay.rows.iter().map(|r| (r.radius, r.along_axis)).collect(),
        );
        chart.series(
            "diagonal",
            decay
                .rows
                .iter()
                .map(|r| (r.radius, r.along_diagonal))
                .collect(),
        );
        chart.write_to(ctx.out("green_ratios.svg"))?;
    }
    ctx.record(
        json!({"eta_k": decay.eta_k, "g_torus_origin": table.variance()}),
        json!({"quadrature_converged": converged}),
    );
    println!(
        "green: torus G(0,0) = {:.6}, decay constant = {:.6}",
        table.variance(),
        decay.eta_k
    );
    Ok(if converged {
        Outcome::Success
    } else {
        Outcome::Unconverged
    })
}

pub fn run_sample(ctx: &Ctx) -> CommandResult {
    let model = ctx.cfg.model()?;
    let grid = ctx.cfg.grid(model.d)?;
    let draws = ctx.cfg.usize_or("sample.draws", 2000)?;
    let max_disp = ctx.cfg.usize_or("sample.max_displacement", 3)? as i64;
    let seed = ctx.cfg.seed()?;

    let sampler = SpectralSampler::new(&model.q, grid)?;
    let mut rng = repulsion_core::rng::stream(seed, "cli-sample", 0);
    let samples: Vec<LatticeField> = (0..draws).map(|_| sampler.sample_with(&mut rng)).collect();

    // displacement classes: one representative per sorted |component| tuple
    let mut displacements: Vec<Vec<i64>> = Vec::new();
    collect_displacements(model.d, max_disp, &mut displacements);
    let rows = empirical_covariance(&samples, &displacements)?;
    let green = GreenTable::compute(&model.q, grid)?;

    let mut t = ctx.table([
        "displacement",
        "empirical",
        "std_error",
        "torus_value",
        "z_score",
    ]);
    let mut worst_z = 0.0f64;
    for row in &rows {
        let want = green.value(&row.displacement);
        let z = (row.estimate - want) / row.std_error.max(1e-300);
        worst_z = worst_z.max(z.abs());
        t.row([
            format!("{:?}", row.displacement).replace(',', " "),
            full(row.estimate),
            full(row.std_error),
            full(want),
            full(z),
        ]);
    }
    t.write_to(ctx.out("sample_cov.csv"))?;
    ctx.record(
        json!({"worst_z": worst_z, "draws": draws}),
        json!({"displacements": rows.len()}),
    );
    println!("sample: {draws} draws, worst covariance z-score = {worst_z:.2}");
    Ok(Outcome::Success)
}

fn collect_displacements(d: usize, max_disp: i64, out: &mut Vec<Vec<i64>>) {
    let mut v = vec![0i64; d];
    loop {
        let norm2: i64 = v.iter().map(|c| c * c).sum();
        if norm2 <= max_disp * max_disp {
            let mut sorted: Vec<i64> = v.clone();
            sorted.sort_unstable();
            if sorted == *v {
                out.push(v.clone());
            }
        }
        // odometer over [0, max_disp]^d
        let mut a = d;
        loop {
            if a == 0 {
                return;
            }
            a -= 1;
            v[a] += 1;
            if v[a] > max_disp {
                v[a] = 0;
            } else {
                break;
            }
        }
    }
}

pub fn run_conditional(ctx: &Ctx) -> CommandResult {
    let model = ctx.cfg.model()?;
    let l_boxes = ctx.cfg.list_usize_or(
        "conditional.l_boxes",
        &default_l_boxes(model.q.max_degree()),
    )?;
    let curve = g_l_curve(&model.q, model.d, &l_boxes)?;
    let quad = QuadratureSpec::for_dimension(model.d);
    let g_infinite = green_infinite(&model.q, model.d, &vec![0; model.d], &quad);

    let mut t = ctx.table(["l_box", "g_l", "gap_to_infinite"]);
    t.comment("g_infinite", full(g_infinite.value));
    for p in &curve {
        t.row([
            p.l_box.to_string(),
            full(p.g_l),
            full(g_infinite.value - p.g_l),
        ]);
    }
    t.write_to(ctx.out("conditional_gl.csv"))?;

    let markov_l = ctx.cfg.usize_or("conditional.markov_l", 9)?;
    let markov_l_box = ctx
        .cfg
        .usize_or("conditional.markov_l_box", model.q.max_degree() + 4)?;
    let grid = TorusGrid::new(model.d, markov_l, ctx.cfg.f64_or("grid.eps", 0.1)?);
    let geometry = BoxGeometry::new(vec![0; model.d], markov_l_box, model.q.max_degree())?;
    let report = markov_check(&model.q, grid, &geometry)?;
    let mut mt = ctx.table(["residual", "exterior_sites", "shell_sites"]);
    mt.row([
        full(report.residual),
        report.exterior_sites.to_string(),
        report.shell_sites.to_string(),
    ]);
    mt.write_to(ctx.out("conditional_markov.csv"))?;

    if ctx.plot {
        let mut chart = LineChart::new("conditional variance of the centre spin");
        chart.series(
            "G_L",
            curve.iter().map(|p| (p.l_box as f64, p.g_l)).collect(),
        );
        chart.write_to(ctx.out("conditional_gl.svg"))?;
    }
    ctx.record(
        json!({"g_l": curve.iter().map(|p| p.g_l).collect::<Vec<f64>>(),
               "markov_residual": report.residual}),
        json!({"g_infinite": g_infinite.value}),
    );
    println!(
        "conditional: G_L over {:?}, screening residual = {:.2e}",
        l_boxes, report.residual
    );
    Ok(Outcome::Success)
}

fn default_l_boxes(k: usize) -> Vec<usize> {
    (0..5).map(|i| k + 2 + 2 * i).collect()
}

pub fn run_capacity(ctx: &Ctx) -> CommandResult {
    let model = ctx.cfg.model()?;
    let k = model.q.min_degree();
    let d = model.d;
    let h_steps = ctx.cfg.list_f64_or("capacity.h_steps", &[0.5, 0.25, 0.125])?;
    let radius = ctx.cfg.f64_or("capacity.radius", 6.0)?;
    let radius2 = ctx.cfg.f64_or("capacity.radius2", 9.0)?;
    let kernel_res = ctx.cfg.usize_or("capacity.kernel_resolution", 10)?;
    let identity_res = ctx.cfg.usize_or("capacity.identity_resolution", 16)?;

    let mut samples = Vec::new();
    let mut all_converged = true;
    let mut t = ctx.table([
        "route", "h_step", "radius", "resolution", "value", "converged",
    ]);
    for &h in &h_steps {
        let problem = ObstacleProblem::new(k, d, h, radius)?;
        let sol = solve_obstacle(&problem);
        all_converged &= sol.converged;
        let kkt = kkt_report(&problem, &sol);
        samples.push(ObstacleSample {
            h_step: h,
            radius,
            value: sol.value,
        });
        t.row([
            "obstacle".to_string(),
            full(h),
            full(radius),
            String::new(),
            full(sol.value),
            sol.converged.to_string(),
        ]);
        println!(
            "obstacle h = {h}: value = {:.5} (iters {}, stationarity {:.1e})",
            sol.value, sol.iterations, kkt.off_contact_stationarity
        );
    }
    {
        let h = *h_steps.last().unwrap();
        let problem = ObstacleProblem::new(k, d, h, radius2)?;
        let sol = solve_obstacle(&problem);
        all_converged &= sol.converged;
        samples.push(ObstacleSample {
            h_step: h,
            radius: radius2,
            value: sol.value,
        });
        t.row([
            "obstacle".to_string(),
            full(h),
            full(radius2),
            String::new(),
            full(sol.value),
            sol.converged.to_string(),
        ]);
    }
    let extrapolated = extrapolate_capacity(k, d, &samples)?;

    // kernel route, with the decay constant measured for this model
    let quad = QuadratureSpec::for_dimension(d);
    let decay = decay_constant(&model.q, d, if d <= 3 { 10..=20 } else { 6..=12 }, &quad);
    let q_k = model.q.leading_coeff();
    let op = kernel_matrix(k, d, decay.eta_k, q_k, kernel_res)?;
    let primal = extrapolated.value.unwrap_or(f64::NAN);
    let result = CapacityResult::assemble(primal, *h_steps.last().unwrap(), radius, &op)?;
    for (route, v) in [
        ("dual_linear", result.dual_linear),
        ("dual_rayleigh", result.dual_rayleigh),
        ("eigen_sum", result.eigen_sum),
    ] {
        t.row([
            route.to_string(),
            String::new(),
            String::new(),
            kernel_res.to_string(),
            full(v),
            "true".to_string(),
        ]);
    }
    if let Some(v) = extrapolated.value {
        t.row([
            "obstacle_extrapolated".to_string(),
            "0".to_string(),
            full(radius),
            String::new(),
            full(v),
            "true".to_string(),
        ]);
    }
    t.write_to(ctx.out("capacity.csv"))?;

    let identity = verify_inverse_identity(&model.q, d, identity_res)?;
    let mut record = serde_json::to_value(&result)?;
    record.as_object_mut().expect("object").extend([
        ("primal_error_bar".to_string(), json!(extrapolated.error_bar)),
        ("h_steps".to_string(), json!(h_steps)),
        ("radius2".to_string(), json!(radius2)),
        (
            "identity_best_constant".to_string(),
            json!(identity.candidates[identity.best].0),
        ),
        (
            "identity_residual".to_string(),
            json!(identity.candidates[identity.best].1),
        ),
        ("refused".to_string(), json!(extrapolated.refused)),
    ]);
    std::fs::write(
        ctx.out("capacity.json"),
        serde_json::to_string_pretty(&record)?,
    )?;
    ctx.record(record, json!({"obstacle_converged": all_converged}));
    println!(
        "capacity: primal = {:.4} (+- {:.4}), eigen = {:.4}, gap = {:.2}",
        primal, extrapolated.error_bar, result.eigen_sum, result.primal_dual_gap
    );
    Ok(if all_converged && extrapolated.refused.is_none() {
        Outcome::Success
    } else {
        Outcome::Unconverged
    })
}

pub fn run_repulsion(ctx: &Ctx) -> CommandResult {
    let model = ctx.cfg.model()?;
    let grid = ctx.cfg.grid(model.d)?;
    let seed = ctx.cfg.seed()?;
    let n_list = ctx.cfg.list_usize_or("repulsion.n_list", &[1, 2])?;
    let draws_list = ctx.cfg.list_usize_or("repulsion.draws", &[100_000])?;

    let configs: Vec<RepulsionConfig> = n_list
        .iter()
        .enumerate()
        .map(|(i, &n)| RepulsionConfig {
            model: model.clone(),
            grid,
            n_half: n,
            draws: *draws_list.get(i).unwrap_or(draws_list.last().unwrap()),
            master_seed: repulsion_core::rng::derive_seed(seed, "repulsion-n", n as u64),
        })
        .collect();

    // assemble the asymptote: G from quadrature, capacity configurable or
    // from the kernel eigen route
    let quad = QuadratureSpec::for_dimension(model.d);
    let g_value = green_infinite(&model.q, model.d, &vec![0; model.d], &quad).value;
    let k = model.q.min_degree();
    let q_k = model.q.leading_coeff();
    let capacity = match ctx.cfg.get("repulsion.capacity") {
        Some(v) => v.parse::<f64>().map_err(|_| "repulsion.capacity: bad number")?,
        None => {
            let decay = decay_constant(&model.q, model.d, if model.d <= 3 { 10..=20 } else { 6..=12 }, &quad);
            let op = kernel_matrix(k, model.d, decay.eta_k, q_k, 8)?;
            CapacityResult::assemble(f64::NAN, 0.0, 0.0, &op)?.eigen_sum
        }
    };
    let asymptote = RateAsymptote {
        k,
        q_k,
        g_value,
        capacity,
    };
    let rows = rate_table(&model, &configs, asymptote)?;

    let mut t = ctx.table([
        "n", "draws", "hits", "p_hat", "ci_low", "ci_high", "normalized_rate", "rate_low",
        "rate_high", "asymptote", "rare_event",
    ]);
    let mut any_empty = false;
    for row in &rows {
        any_empty |= row.estimate.p_hat.is_none();
        t.row([
            row.n_half.to_string(),
            row.estimate.draws.to_string(),
            row.estimate.hits.to_string(),
            row.estimate.p_hat.map(full).unwrap_or_default(),
            full(row.estimate.ci.0),
            full(row.estimate.ci.1),
            row.normalized_rate.map(full).unwrap_or_default(),
            full(row.rate_ci.0),
            full(row.rate_ci.1),
            full(row.asymptote),
            row.estimate.rare_event_regime.to_string(),
        ]);
    }
    t.write_to(ctx.out("repulsion_rates.csv"))?;
    if ctx.plot {
        let mut chart = LineChart::new("normalized hard-wall decay rate");
        chart.series(
            "rate",
            rows.iter()
                .filter_map(|r| r.normalized_rate.map(|v| (r.n_half as f64, v)))
                .collect(),
        );
        chart.series(
            "asymptote",
            rows.iter()
                .map(|r| (r.n_half as f64, r.asymptote))
                .collect(),
        );
        chart.write_to(ctx.out("repulsion_rates.svg"))?;
    }
    ctx.record(
        json!({"rows": rows.iter().map(|r| json!({
            "n": r.n_half,
            "p_hat": r.estimate.p_hat,
            "rate": r.normalized_rate,
        })).collect::<Vec<_>>(), "asymptote": asymptote.value()}),
        json!({"g_value": g_value, "capacity": capacity}),
    );
    for row in &rows {
        println!(
            "repulsion N = {}: p = {:?} rate = {:?} (asymptote {:.3})",
            row.n_half, row.estimate.p_hat, row.normalized_rate, row.asymptote
        );
    }
    Ok(if any_empty {
        Outcome::Unconverged
    } else {
        Outcome::Success
    })
}

pub fn run_height(ctx: &Ctx) -> CommandResult {
    let model = ctx.cfg.model()?;
    let seed = ctx.cfg.seed()?;
    let cfg = HeightConfig {
        block_scale: ctx.cfg.f64_or("height.block_scale", 0.5)?,
        z: Vec::new(),
        n_values: ctx.cfg.list_usize_or("height.n_list", &[4, 8])?,
        eps_scale: ctx.cfg.f64_or("height.eps_scale", 2.0)?,
        burn_in: ctx.cfg.u64_or("height.burn_in", 1000)?,
        thinning: ctx.cfg.u64_or("height.thinning", 10)?,
        chains_per_start: ctx.cfg.usize_or("height.chains", 2)?,
        samples_per_chain: ctx.cfg.usize_or("height.samples", 200)?,
        master_seed: seed,
    };
    let quad = QuadratureSpec::for_dimension(model.d);
    let g_value = green_infinite(&model.q, model.d, &vec![0; model.d], &quad).value;
    let rows = height_run(&model, &cfg, g_value)?;

    let mut t = ctx.table([
        "n",
        "torus_side",
        "estimate",
        "std_error",
        "start_flat",
        "start_repelled",
        "converged",
        "ratio",
        "target_ratio",
        "conditional_mean_block",
        "unconditioned_mean",
        "unconditioned_se",
    ]);
    let mut all_converged = true;
    for row in &rows {
        all_converged &= row.converged;
        t.row([
            row.n_half.to_string(),
            row.torus_side.to_string(),
            full(row.estimate),
            full(row.std_error),
            full(row.start_means.0),
            full(row.start_means.1),
            row.converged.to_string(),
            full(row.ratio),
            full(row.target_ratio),
            full(row.conditional_mean_block),
            full(row.unconditioned_mean),
            full(row.unconditioned_se),
        ]);
    }
    t.write_to(ctx.out("height.csv"))?;
    if ctx.plot {
        let mut chart = LineChart::new("conditioned block height / sqrt(log N)");
        chart.series(
            "ratio",
            rows.iter().map(|r| (r.n_half as f64, r.ratio)).collect(),
        );
        chart.series(
            "limit scale",
            rows.iter()
                .map(|r| (r.n_half as f64, r.target_ratio))
                .collect(),
        );
        chart.write_to(ctx.out("height.svg"))?;
    }
    ctx.record(
        serde_json::to_value(&rows)?,
        json!({"g_value": g_value}),
    );
    for row in &rows {
        println!(
            "height N = {}: block mean = {:.3} +- {:.3}, ratio = {:.3} (scale {:.3}), converged = {}",
            row.n_half, row.estimate, row.std_error, row.ratio, row.target_ratio, row.converged
        );
    }
    Ok(if all_converged {
        Outcome::Success
    } else {
        Outcome::Unconverged
    })
}

pub fn run_check_c(ctx: &Ctx) -> CommandResult {
    let model = ctx.cfg.model()?;
    let eps_list = ctx.cfg.list_f64_or("check_c.eps_list", &[0.5, 0.1, 0.02])?;
    let l = ctx.cfg.usize_or("check_c.l", 16)?;
    if l.pow(model.d as u32) > 100_000 {
        return Err(format!(
            "check-c needs L^d <= 100000 for the exact column solves (got {}^{})",
            l, model.d
        )
        .into());
    }
    let scans = inverse_positivity_scan(&model.q, model.d, l, &eps_list)?;
    let mut t = ctx.table([
        "eps",
        "min_entry",
        "min_displacement",
        "max_entry",
        "verdict",
    ]);
    for scan in &scans {
        t.row([
            full(scan.eps),
            full(scan.min_entry),
            format!("{:?}", scan.min_displacement).replace(',', " "),
            full(scan.max_entry),
            if scan.consistent {
                "consistent-with-nonnegative".to_string()
            } else {
                "negative-entries".to_string()
            },
        ]);
    }
    t.write_to(ctx.out("check_c.csv"))?;
    ctx.record(serde_json::to_value(&scans)?, json!({}));
    for scan in &scans {
        println!(
            "check-c eps = {}: min = {:.3e} at {:?} ({})",
            scan.eps,
            scan.min_entry,
            scan.min_displacement,
            if scan.consistent { "ok" } else { "negative" }
        );
    }
    Ok(Outcome::Success)
}

/// Write a starter configuration next to the outputs.
pub fn write_example_config(path: &Path) -> std::io::Result<()> {
    std::fs::write(
        path,
        "\
[model]
d = 3
k = 1
q = 1.0

[grid]
l = 16
eps = 0.1

[run]
seed = 1
",
    )
}
