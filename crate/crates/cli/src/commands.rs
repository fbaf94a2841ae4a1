//! Command implementations: each builds a manifest and an output table from
//! the core library.

use metasir::{
    analytics, mc, LogRateMethod, McConfig, NetworkParams, Rect,
    ReliabilityTarget, SirThreshold, ThresholdInfo,
};

use crate::config::{GridSpec, Settings};
use crate::table::{Cell, Manifest, Table};
use crate::{CliError, Method};

fn push_network(m: &mut Manifest, p: &NetworkParams) {
    m.push_f64("lambda", p.density());
    m.push_f64("alpha", p.path_loss_exponent());
    m.push_f64("R", p.link_distance());
}

fn push_target(m: &mut Manifest, t: &ReliabilityTarget) {
    m.push_f64("nu", t.nu());
    m.push_f64("eps", t.epsilon());
}

fn push_mc(m: &mut Manifest, cfg: &McConfig) {
    m.push("samples", cfg.n_realizations().to_string());
    m.push("seed", cfg.master_seed().to_string());
    m.push_f64("truncation_tol", cfg.truncation_tol());
}

fn grid_or(spec: Option<GridSpec>, default: &str) -> Result<GridSpec, CliError> {
    match spec {
        Some(g) => Ok(g),
        None => GridSpec::parse(default),
    }
}

// ---------------------------------------------------------------------------
// md
// ---------------------------------------------------------------------------

pub fn run_md(s: &Settings) -> Result<(Manifest, Table), CliError> {
    let params = s.network()?;
    let theta = s.theta()?;
    let grid = grid_or(s.x_grid, "0.01:0.99:99:linear")?;
    let method = s.method.unwrap_or(Method::GilPelaez);

    let mut manifest = Manifest::new("md");
    push_network(&mut manifest, &params);
    manifest.push_f64("theta", theta.value());
    manifest.push("method", method.name().into());
    manifest.push("x_grid", grid.spec_string());

    let xs = grid.points();
    let mut table;
    match method {
        Method::GilPelaez => {
            table = Table::new(&["x", "md"]);
            for &x in &xs {
                let v = analytics::md_gil_pelaez(&params, theta, x)?;
                table.push_row(vec![Cell::Num(x), Cell::Num(v)]);
            }
        }
        Method::Binomial => {
            let n = s.moments.unwrap_or(20);
            manifest.push("moments", n.to_string());
            table = Table::new(&["x", "md"]);
            for &x in &xs {
                let v = analytics::md_binomial_mixture(&params, theta, x, n)?;
                table.push_row(vec![Cell::Num(x), Cell::Num(v)]);
            }
        }
        Method::Mc => {
            let cfg = s.mc_config(1e-4)?;
            push_mc(&mut manifest, &cfg);
            let curve = mc::estimate_md(&params, theta, &xs, &cfg)?;
            table = Table::new(&["x", "md", "std_error"]);
            for (i, &x) in xs.iter().enumerate() {
                let e = &curve.estimates()[i];
                table.push_row(vec![Cell::Num(x), Cell::Num(e.value), Cell::Num(e.std_error)]);
            }
        }
        Method::Ultrarel | Method::Partial => {
            return Err(CliError::usage(format!(
                "method {} applies to tdist, not md",
                method.name()
            )));
        }
    }
    Ok((manifest, table))
}

// ---------------------------------------------------------------------------
// tdist
// ---------------------------------------------------------------------------

pub fn run_tdist(s: &Settings) -> Result<(Manifest, Table), CliError> {
    let params = s.network()?;
    let target = s.target()?;
    let grid = grid_or(s.t_grid, "1e-4:10:60:log")?;
    let method = s.method.unwrap_or(Method::GilPelaez);

    if method == Method::Ultrarel && target.epsilon() > 0.1 {
        eprintln!(
            "warning: the ultrareliable asymptotic is derived for eps -> 0; eps = {} is outside its validity range",
            target.epsilon()
        );
    }
    if s.k.len() > 1 {
        return Err(CliError::usage(
            "tdist takes at most one --k (use fig2 for k sweeps)".into(),
        ));
    }

    let mut manifest = Manifest::new("tdist");
    push_network(&mut manifest, &params);
    push_target(&mut manifest, &target);
    manifest.push("method", method.name().into());
    manifest.push("t_grid", grid.spec_string());

    let ts = grid.points();
    let mut table;
    match method {
        Method::GilPelaez => {
            table = Table::new(&["t", "ccdf"]);
            for &t in &ts {
                let v = analytics::md_gil_pelaez(&params, SirThreshold::new(t)?, target.nu())?;
                table.push_row(vec![Cell::Num(t), Cell::Num(v)]);
            }
        }
        Method::Binomial => {
            let n = s.moments.unwrap_or(20);
            manifest.push("moments", n.to_string());
            table = Table::new(&["t", "ccdf"]);
            for &t in &ts {
                let v =
                    analytics::md_binomial_mixture(&params, SirThreshold::new(t)?, target.nu(), n)?;
                table.push_row(vec![Cell::Num(t), Cell::Num(v)]);
            }
        }
        Method::Ultrarel => {
            table = Table::new(&["t", "ccdf"]);
            for &t in &ts {
                let v =
                    analytics::threshold_ccdf_ultrareliable(&params, target, SirThreshold::new(t)?)?;
                table.push_row(vec![Cell::Num(t), Cell::Num(v)]);
            }
        }
        Method::Partial => {
            table = Table::new(&["t", "ccdf"]);
            for &t in &ts {
                let v =
                    analytics::threshold_ccdf_partial_info(&params, target, SirThreshold::new(t)?)?;
                table.push_row(vec![Cell::Num(t), Cell::Num(v)]);
            }
        }
        Method::Mc => {
            let cfg = s.mc_config(default_tol_for(target))?;
            push_mc(&mut manifest, &cfg);
            let info = match s.k.first() {
                Some(&k) => {
                    manifest.push("k", k.to_string());
                    ThresholdInfo::KNearest(k)
                }
                None => ThresholdInfo::Full,
            };
            let curve = mc::estimate_threshold_ccdf(&params, target, &ts, &cfg, info)?;
            table = Table::new(&["t", "ccdf", "std_error"]);
            for (i, &t) in ts.iter().enumerate() {
                let e = &curve.estimates()[i];
                table.push_row(vec![Cell::Num(t), Cell::Num(e.value), Cell::Num(e.std_error)]);
            }
        }
    }
    Ok((manifest, table))
}

/// Ultrareliable targets need a tighter window: far-field truncation shows
/// up directly in the tail statistics.
fn default_tol_for(target: ReliabilityTarget) -> f64 {
    if target.epsilon() <= 1e-3 {
        1e-6
    } else {
        1e-4
    }
}

// ---------------------------------------------------------------------------
// throughput and fig3
// ---------------------------------------------------------------------------

fn throughput_table(
    params: &NetworkParams,
    target: ReliabilityTarget,
    grid: &GridSpec,
    cfg: Option<&McConfig>,
) -> Result<Table, CliError> {
    let thetas = grid.points();
    let data = mc::figure3_data(params, target, &thetas, cfg)?;
    let mut table = if data.mc.is_some() {
        Table::new(&[
            "theta",
            "S_rc",
            "Srel_rc",
            "S_det",
            "Srel_det",
            "S_rc_mc",
            "S_rc_mc_se",
            "Srel_rc_mc",
            "Srel_rc_mc_se",
            "S_det_mc",
            "S_det_mc_se",
            "Srel_det_mc",
            "Srel_det_mc_se",
        ])
    } else {
        Table::new(&["theta", "S_rc", "Srel_rc", "S_det", "Srel_det"])
    };
    for (i, &theta) in thetas.iter().enumerate() {
        let det = &data.deterministic[i];
        let mut row = vec![
            Cell::Num(theta),
            Cell::Num(data.rate_control.s),
            Cell::Num(data.rate_control.s_rel),
            Cell::Num(det.s),
            Cell::Num(det.s_rel),
        ];
        if let Some(mc_table) = &data.mc {
            let rc = &mc_table.rate_control;
            let d = &mc_table.deterministic[i];
            row.extend([
                Cell::Num(rc.s.value),
                Cell::Num(rc.s.std_error),
                Cell::Num(rc.s_rel.value),
                Cell::Num(rc.s_rel.std_error),
                Cell::Num(d.s.value),
                Cell::Num(d.s.std_error),
                Cell::Num(d.s_rel.value),
                Cell::Num(d.s_rel.std_error),
            ]);
        }
        table.push_row(row);
    }
    Ok(table)
}

pub fn run_throughput(s: &Settings) -> Result<(Manifest, Table), CliError> {
    let params = s.network()?;
    let target = s.target()?;
    let grid = grid_or(s.theta_grid, "0.01:100:41:log")?;
    let cfg = s.mc_config(1e-4)?;

    let mut manifest = Manifest::new("throughput");
    push_network(&mut manifest, &params);
    push_target(&mut manifest, &target);
    manifest.push("theta_grid", grid.spec_string());
    push_mc(&mut manifest, &cfg);

    let table = throughput_table(&params, target, &grid, Some(&cfg))?;
    Ok((manifest, table))
}

pub fn run_fig3(s: &Settings) -> Result<(Manifest, Table), CliError> {
    // Operating point of the throughput-density figure.
    let params = s.network_or(1.0, 4.0, 0.5)?;
    let target = match (s.nu, s.eps) {
        (None, None) => ReliabilityTarget::from_epsilon(0.01)?,
        _ => s.target()?,
    };
    let grid = grid_or(s.theta_grid, "0.01:100:41:log")?;
    let cfg = s.mc_config(1e-4)?;

    let mut manifest = Manifest::new("fig3");
    push_network(&mut manifest, &params);
    push_target(&mut manifest, &target);
    manifest.push("theta_grid", grid.spec_string());
    push_mc(&mut manifest, &cfg);

    let table = throughput_table(&params, target, &grid, Some(&cfg))?;
    Ok((manifest, table))
}

// ---------------------------------------------------------------------------
// interference
// ---------------------------------------------------------------------------

pub fn run_interference(s: &Settings) -> Result<(Manifest, Table), CliError> {
    let params = s.network()?;
    let grid = grid_or(s.x_grid, "1:1000:60:log")?;
    let cfg = s.mc_config(1e-6)?;

    let mut manifest = Manifest::new("interference");
    push_network(&mut manifest, &params);
    manifest.push("x_grid", grid.spec_string());
    push_mc(&mut manifest, &cfg);

    let xs = grid.points();
    let curve = mc::estimate_interference_ccdf(&params, &xs, &cfg)?;
    let levy = params.path_loss_exponent() == 4.0;
    let mut table = if levy {
        Table::new(&["x", "ccdf", "std_error", "ccdf_levy"])
    } else {
        Table::new(&["x", "ccdf", "std_error"])
    };
    for (i, &x) in xs.iter().enumerate() {
        let e = &curve.estimates()[i];
        let mut row = vec![Cell::Num(x), Cell::Num(e.value), Cell::Num(e.std_error)];
        if levy {
            row.push(Cell::Num(analytics::levy_interference_ccdf(&params, x)?));
        }
        table.push_row(row);
    }
    Ok((manifest, table))
}

// ---------------------------------------------------------------------------
// realization
// ---------------------------------------------------------------------------

pub fn run_realization(s: &Settings) -> Result<(Manifest, Table), CliError> {
    let params = s.network()?;
    let target = s.target()?;
    let theta = s.theta()?;
    let (width, height) = s.window.unwrap_or((40.0, 30.0));
    let rect = Rect::centered(width, height)?;
    let cfg = s.mc_config(1e-4)?;

    let mut manifest = Manifest::new("realization");
    push_network(&mut manifest, &params);
    push_target(&mut manifest, &target);
    manifest.push_f64("theta", theta.value());
    manifest.push("window", format!("{width}x{height}"));
    manifest.push("seed", cfg.master_seed().to_string());

    let records = mc::realization_report(&params, theta, target, &rect, &cfg)?;
    let mut table = Table::new(&["tx_x", "tx_y", "rx_x", "rx_y", "reliability", "threshold"]);
    for r in &records {
        table.push_row(vec![
            Cell::Num(r.tx[0]),
            Cell::Num(r.tx[1]),
            Cell::Num(r.rx[0]),
            Cell::Num(r.rx[1]),
            Cell::Num(r.reliability),
            Cell::Num(r.threshold),
        ]);
    }
    Ok((manifest, table))
}

// ---------------------------------------------------------------------------
// fig2
// ---------------------------------------------------------------------------

pub fn run_fig2(s: &Settings) -> Result<(Manifest, Table), CliError> {
    // The accuracy figure fixes alpha = 4 and R = 1/2 but not the target
    // reliability: that one must come from the caller.
    let params = s.network_or(1.0, 4.0, 0.5)?;
    let target = s.target().map_err(|_| {
        CliError::usage("fig2 requires an explicit --nu or --eps (no silent default)".into())
    })?;
    let densities = if s.densities.is_empty() {
        vec![0.25, 1.0]
    } else {
        s.densities.clone()
    };
    let ks = if s.k.is_empty() { vec![1, 3] } else { s.k.clone() };
    let grid = grid_or(s.t_grid, "1e-4:10:60:log")?;
    let cfg = s.mc_config(1e-4)?;

    let mut manifest = Manifest::new("fig2");
    manifest.push_f64("alpha", params.path_loss_exponent());
    manifest.push_f64("R", params.link_distance());
    push_target(&mut manifest, &target);
    manifest.push(
        "densities",
        densities
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(" "),
    );
    manifest.push(
        "k",
        ks.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" "),
    );
    manifest.push("t_grid", grid.spec_string());
    push_mc(&mut manifest, &cfg);

    let ts = grid.points();
    let data = mc::figure2_data(&params, target, &densities, &ks, &ts, &cfg)?;

    let mut columns = vec!["density".to_string(), "t".to_string(), "exact_gp".to_string(),
        "partial_info".to_string()];
    for &k in &ks {
        columns.push(format!("k{k}"));
        columns.push(format!("k{k}_se"));
    }
    let mut table = Table {
        columns,
        rows: Vec::new(),
    };
    for curves in &data.per_density {
        for (i, &t) in ts.iter().enumerate() {
            let mut row = vec![
                Cell::Num(curves.density),
                Cell::Num(t),
                Cell::Num(curves.exact.values()[i]),
                Cell::Num(curves.partial_info.values()[i]),
            ];
            for (_, mc_curve) in &curves.k_nearest {
                let e = &mc_curve.estimates()[i];
                row.push(Cell::Num(e.value));
                row.push(Cell::Num(e.std_error));
            }
            table.push_row(row);
        }
    }
    Ok((manifest, table))
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

struct Check {
    name: String,
    value: f64,
    limit: f64,
    /// true when value must stay <= limit, false for >=.
    upper: bool,
}

impl Check {
    fn upper(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, limit, upper: true }
    }

    fn lower(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, limit, upper: false }
    }

    fn pass(&self) -> bool {
        if self.upper {
            self.value <= self.limit
        } else {
            self.value >= self.limit
        }
    }
}

pub fn run_validate(s: &Settings, suite: &str) -> Result<(Manifest, Table, bool), CliError> {
    let params = s.network_or(1.0, 4.0, 0.5)?;
    let cfg = s.mc_config(1e-4)?;

    let mut manifest = Manifest::new("validate");
    manifest.push("suite", suite.into());
    push_network(&mut manifest, &params);
    push_mc(&mut manifest, &cfg);

    let mut checks = Vec::new();
    let known = [
        "duality", "psuccess", "md", "binomial", "bound", "ultrarel", "partialinfo", "levy",
        "throughput", "repro", "all",
    ];
    if !known.contains(&suite) {
        return Err(CliError::usage(format!(
            "unknown suite '{suite}'; choose one of {}",
            known.join("|")
        )));
    }
    let run = |name: &str| suite == name || suite == "all";

    if run("duality") {
        suite_duality(s, &params, &cfg, &mut checks)?;
    }
    if run("psuccess") {
        suite_psuccess(&params, &cfg, &mut checks)?;
    }
    if run("md") {
        suite_md(&params, &cfg, &mut checks)?;
    }
    if run("binomial") {
        suite_binomial(&params, &mut checks)?;
    }
    if run("bound") {
        suite_bound(s, &params, &cfg, &mut checks)?;
    }
    if run("ultrarel") {
        suite_ultrarel(s, &params, &cfg, &mut checks)?;
    }
    if run("partialinfo") {
        suite_partialinfo(&params, &mut checks)?;
    }
    if run("levy") {
        suite_levy(&params, &cfg, &mut checks)?;
    }
    if run("throughput") {
        suite_throughput(&params, &cfg, &mut checks)?;
    }
    if run("repro") {
        suite_repro(&params, &cfg, &mut checks)?;
    }

    let mut table = Table::new(&["check", "value", "limit", "pass"]);
    let mut all_pass = true;
    for c in &checks {
        let ok = c.pass();
        all_pass &= ok;
        table.push_row(vec![
            Cell::Text(c.name.clone()),
            Cell::Num(c.value),
            Cell::Num(c.limit),
            Cell::Int(ok as i64),
        ]);
        println!(
            "{}: value={:.6e} limit={:.6e} {} {}",
            c.name,
            c.value,
            c.limit,
            if c.upper { "<=" } else { ">=" },
            if ok { "PASS" } else { "FAIL" }
        );
    }
    Ok((manifest, table, all_pass))
}

fn suite_duality(
    s: &Settings,
    params: &NetworkParams,
    cfg: &McConfig,
    checks: &mut Vec<Check>,
) -> Result<(), CliError> {
    let combos: Vec<(f64, f64)> = match (s.theta, s.nu) {
        (Some(t), Some(nu)) => vec![(t, nu)],
        _ => [0.5, 1.0, 4.0]
            .iter()
            .flat_map(|&t| [0.5, 0.9, 0.99].iter().map(move |&nu| (t, nu)))
            .collect(),
    };
    for (t, nu) in combos {
        let report = mc::verify_duality(
            params,
            SirThreshold::new(t)?,
            ReliabilityTarget::from_nu(nu)?,
            cfg,
        )?;
        checks.push(Check::upper(
            format!("duality_violations_theta{t}_nu{nu}"),
            report.violations as f64,
            0.0,
        ));
    }
    Ok(())
}

fn suite_psuccess(
    params: &NetworkParams,
    cfg: &McConfig,
    checks: &mut Vec<Check>,
) -> Result<(), CliError> {
    let theta = SirThreshold::new(1.0)?;
    let est = mc::estimate_success_probability(params, theta, cfg)?;
    let want = analytics::standard_success_probability(params, theta);
    checks.push(Check::upper(
        "psuccess_abs_diff_over_3se",
        (est.value - want).abs(),
        3.0 * est.std_error,
    ));
    Ok(())
}

fn suite_md(params: &NetworkParams, cfg: &McConfig, checks: &mut Vec<Check>) -> Result<(), CliError> {
    let theta = SirThreshold::new(1.0)?;
    let grid: Vec<f64> = (1..=19).map(|i| i as f64 * 0.05).collect();
    let curve = mc::estimate_md(params, theta, &grid, cfg)?;
    let mut worst = 0.0f64;
    for (i, &x) in grid.iter().enumerate() {
        let analytic = analytics::md_gil_pelaez(params, theta, x)?;
        let e = &curve.estimates()[i];
        let z = (analytic - e.value).abs() / e.std_error.max(1e-12);
        worst = worst.max(z);
    }
    checks.push(Check::upper("md_gp_vs_mc_max_z_score", worst, 3.0));
    Ok(())
}

fn suite_binomial(params: &NetworkParams, checks: &mut Vec<Check>) -> Result<(), CliError> {
    let theta = SirThreshold::new(1.0)?;
    let weights = analytics::binomial_mixture_weights(params, theta, 20)?;
    let total: f64 = weights.iter().sum();
    checks.push(Check::upper("binomial_weight_sum_err", (total - 1.0).abs(), 1e-9));
    let min = weights.iter().cloned().fold(f64::INFINITY, f64::min);
    checks.push(Check::lower("binomial_min_weight", min, -1e-6));
    let mut worst = 0.0f64;
    for i in 1..=19 {
        let x = i as f64 * 0.05;
        let gp = analytics::md_gil_pelaez(params, theta, x)?;
        let bm = analytics::md_binomial_mixture(params, theta, x, 20)?;
        worst = worst.max((gp - bm).abs());
    }
    checks.push(Check::upper("binomial_vs_gp_max_diff", worst, 0.02));
    Ok(())
}

fn suite_bound(
    s: &Settings,
    params: &NetworkParams,
    cfg: &McConfig,
    checks: &mut Vec<Check>,
) -> Result<(), CliError> {
    use metasir::pointproc;
    let target = ReliabilityTarget::from_nu(s.nu.unwrap_or(0.9))?;
    let ks: Vec<usize> = if s.k.is_empty() { vec![1, 3, 10] } else { s.k.clone() };
    let window =
        metasir::SamplingConfig::from_tolerance(params, cfg.truncation_tol(), cfg.master_seed())?;
    let mut violations = 0usize;
    let max_k = ks.iter().copied().max().unwrap_or(1);
    for i in 0..cfg.n_realizations() as u64 {
        let mut r = None;
        for attempt in 0..1000u64 {
            let seed = pointproc::mix_seed(cfg.master_seed(), i, attempt);
            let cand = pointproc::sample_realization(params, &window.with_seed(seed));
            if cand.len() >= max_k {
                r = Some(cand);
                break;
            }
        }
        let r = r.ok_or_else(|| CliError::usage("window too small for bound suite".into()))?;
        for &k in &ks {
            let bound = metasir::model::threshold_lower_bound_k(&r, params, target, k)?;
            let exact_k =
                metasir::model::threshold_for_reliability_k_nearest(&r, params, target, k)?;
            if bound.value() > exact_k.value() * (1.0 + 1e-9) {
                violations += 1;
            }
        }
    }
    checks.push(Check::upper("bound_pathwise_violations", violations as f64, 0.0));

    // synthetic single interferer: the k = 1 bound is the exact threshold
    let single = metasir::Realization::from_points(vec![[2.0, 0.0]], 4.0).unwrap();
    let p1 = NetworkParams::new(params.density(), params.path_loss_exponent(), 1.0)?;
    let t1 = ReliabilityTarget::from_epsilon(0.1)?;
    let bound = metasir::model::threshold_lower_bound_k(&single, &p1, t1, 1)?.value();
    let exact = metasir::model::threshold_for_reliability(&single, &p1, t1)?.value();
    checks.push(Check::upper(
        "bound_single_interferer_rel_gap",
        (bound - exact).abs() / exact,
        1e-9,
    ));
    Ok(())
}

fn suite_ultrarel(
    s: &Settings,
    params: &NetworkParams,
    cfg: &McConfig,
    checks: &mut Vec<Check>,
) -> Result<(), CliError> {
    let target = ReliabilityTarget::from_epsilon(s.eps.unwrap_or(1e-3))?;
    let cfg = McConfig::new(cfg.n_realizations(), cfg.master_seed())?
        .with_truncation_tol(1e-6)?
        .with_workers(cfg.worker_hint());
    // t-range where the analytic ccdf sweeps [0.1, 0.9]
    let scale = std::f64::consts::PI.powf(1.5) * params.density()
        * params.link_distance().powi(2) / 2.0;
    let grid: Vec<f64> = (0..25)
        .map(|i| {
            let a = 0.089 + (1.163 - 0.089) * i as f64 / 24.0;
            target.epsilon() * (a / scale).powi(2)
        })
        .collect();
    let curve = mc::estimate_threshold_ccdf(params, target, &grid, &cfg, ThresholdInfo::Full)?;
    let mut worst = 0.0f64;
    for (i, &t) in grid.iter().enumerate() {
        let analytic = analytics::threshold_ccdf_ultrareliable(params, target, SirThreshold::new(t)?)?;
        if (0.1..=0.9).contains(&analytic) {
            worst = worst.max((analytic - curve.estimates()[i].value).abs());
        }
    }
    checks.push(Check::upper("ultrarel_max_abs_diff", worst, 0.03));
    Ok(())
}

fn suite_partialinfo(params: &NetworkParams, checks: &mut Vec<Check>) -> Result<(), CliError> {
    let target = ReliabilityTarget::from_epsilon(0.1)?;
    for &density in &[0.25, 1.0] {
        let p = NetworkParams::new(density, params.path_loss_exponent(), params.link_distance())?;
        let grid: Vec<f64> = (-40..=10).map(|e| 10f64.powf(e as f64 / 10.0)).collect();
        let mut worst = 0.0f64;
        for &t in &grid {
            let exact = analytics::md_gil_pelaez(&p, SirThreshold::new(t)?, target.nu())?;
            if exact < 0.5 {
                break; // only below the exact curve's median
            }
            let approx = analytics::threshold_ccdf_partial_info(&p, target, SirThreshold::new(t)?)?;
            worst = worst.max((exact - approx).abs());
        }
        checks.push(Check::upper(
            format!("partialinfo_max_diff_below_median_lambda{density}"),
            worst,
            0.05,
        ));
    }
    Ok(())
}

fn suite_levy(params: &NetworkParams, cfg: &McConfig, checks: &mut Vec<Check>) -> Result<(), CliError> {
    let cfg = McConfig::new(cfg.n_realizations(), cfg.master_seed())?
        .with_truncation_tol(1e-6)?
        .with_workers(cfg.worker_hint());
    let grid: Vec<f64> = (0..45).map(|i| 10f64.powf(0.5 + i as f64 * 0.05)).collect();
    let curve = mc::estimate_interference_ccdf(params, &grid, &cfg)?;
    let mut worst = 0.0f64;
    for (i, &x) in grid.iter().enumerate() {
        let want = analytics::levy_interference_ccdf(params, x)?;
        worst = worst.max((curve.estimates()[i].value - want).abs());
    }
    checks.push(Check::upper("levy_sup_diff", worst, 0.02));
    Ok(())
}

fn suite_throughput(
    params: &NetworkParams,
    cfg: &McConfig,
    checks: &mut Vec<Check>,
) -> Result<(), CliError> {
    let target = ReliabilityTarget::from_epsilon(0.01)?;
    let grid = [0.01, 0.1, 1.0, 10.0, 100.0];
    let data = mc::figure3_data(params, target, &grid, Some(cfg))?;
    let mc_table = data.mc.as_ref().expect("mc requested");

    let rc = &mc_table.rate_control;
    checks.push(Check::upper(
        "throughput_rc_identity_err",
        (rc.s.value - (1.0 - target.epsilon()) * rc.s_rel.value).abs(),
        0.0,
    ));
    let mut worst_z = 0.0f64;
    for (j, det) in data.deterministic.iter().enumerate() {
        let d = &mc_table.deterministic[j];
        worst_z = worst_z.max((d.s.value - det.s).abs() / (d.s.std_error + 1e-12));
        worst_z = worst_z.max((d.s_rel.value - det.s_rel).abs() / (d.s_rel.std_error + 1e-12));
    }
    checks.push(Check::upper("throughput_det_mc_vs_analytic_max_z", worst_z, 3.0));
    let mut rc_wins = true;
    for det in &data.deterministic {
        rc_wins &= data.rate_control.s_rel >= det.s_rel;
    }
    checks.push(Check::lower("throughput_rc_srel_dominates", rc_wins as i64 as f64, 1.0));

    // closed form vs quadrature at C = 1, and the fallback flag at C ~ 48
    let l = std::f64::consts::PI.powi(3) / 64.0;
    let c1 = ReliabilityTarget::from_epsilon(-(-l).exp_m1())?;
    let quad = analytics::expected_log_rate(params, c1, LogRateMethod::Quadrature)?;
    let closed = analytics::expected_log_rate(params, c1, LogRateMethod::ClosedForm)?;
    checks.push(Check::upper(
        "throughput_closed_form_rel_diff_at_c1",
        (closed.value - quad.value).abs() / quad.value,
        1e-8,
    ));
    let fig3 = analytics::expected_log_rate(params, target, LogRateMethod::ClosedForm)?;
    checks.push(Check::lower(
        "throughput_closed_form_flagged_unusable_at_fig3",
        (fig3.method_used == LogRateMethod::Quadrature) as i64 as f64,
        1.0,
    ));
    Ok(())
}

fn suite_repro(params: &NetworkParams, cfg: &McConfig, checks: &mut Vec<Check>) -> Result<(), CliError> {
    let theta = SirThreshold::new(1.0)?;
    let grid = [0.25, 0.5, 0.75];
    let n = cfg.n_realizations().min(2000);
    let base = McConfig::new(n, cfg.master_seed())?.with_truncation_tol(1e-3)?;
    let one = mc::estimate_md(params, theta, &grid, &base.with_workers(Some(1)))?;
    let four = mc::estimate_md(params, theta, &grid, &base.with_workers(Some(4)))?;
    let eight = mc::estimate_md(params, theta, &grid, &base.with_workers(Some(8)))?;
    let identical = one == four && four == eight;
    checks.push(Check::lower("repro_bit_identical_1_4_8", identical as i64 as f64, 1.0));
    Ok(())
}
