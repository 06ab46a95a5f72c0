use anyhow::{anyhow, Context, Result};
use horizonlab::analysis::{fit_decay, fit_power, fit_prony, regularity_predictors, DecayOptions, FitMethod, FitResult, TimeSeries};
use horizonlab::bflow::{BPhasePoint, FlowOptions, KdsFlow, RadialFlow};
use horizonlab::numerics::linear_fit;
use horizonlab::par::{self, Execution};
use horizonlab::spacetime::{build_charts, extend_mu, exterior_charts, horizon_data, ChartData, Family, HorizonData, MetricBlock, SpacetimeParams};
use horizonlab::waves::io::{encode_mode_field, encode_null_field};
use horizonlab::waves::{exterior_evolve, interior_evolve, probe_null, transversal_log, Derivative, ExteriorConfig, ExteriorRun, HorizonTail, NullBlockField, NullLocation, WaveError};
use serde_json::{json, Value};

use crate::config::{ConfigError, RunConfig};
use crate::output::{csv, OutputDir};

/// Configuration problems reported by the engines count as config errors (exit 2).
fn wave_err(section: &str, e: WaveError) -> anyhow::Error {
    match e {
        WaveError::Config(_) | WaveError::Cfl { .. } => ConfigError::at(section, e.to_string()).into(),
        other => anyhow!(other).context(format!("{section} evolution failed")),
    }
}

const HORIZON_HEADER: [&str; 17] =
    ["lambda", "mass", "charge", "spin", "r1", "r2", "r3", "kappa1", "kappa2", "kappa3", "beta1", "beta2", "beta3", "r_p", "nu_min", "gamma0", "sobolev_order"];

fn horizon_row(p: &SpacetimeParams, h: &HorizonData, alpha: Option<f64>) -> Vec<Option<f64>> {
    let t = h.trapping;
    let alpha = alpha.or(t.map(|t| t.gamma0));
    let s = match (alpha, h.beta(1)) {
        (Some(a), Some(b)) => Some(0.5 + a * b),
        _ => None,
    };
    vec![
        Some(p.lambda),
        Some(p.mass),
        Some(p.charge),
        Some(p.spin),
        h.radius(1),
        h.radius(2),
        h.radius(3),
        h.kappa(1),
        h.kappa(2),
        h.kappa(3),
        h.beta(1),
        h.beta(2),
        h.beta(3),
        t.map(|t| t.r_p),
        t.map(|t| t.nu_min),
        t.map(|t| t.gamma0),
        s,
    ]
}

pub fn params(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value> {
    let h = horizon_data(&cfg.params, &cfg.horizons).context("horizon computation failed")?;
    out.write("params.csv", csv(&HORIZON_HEADER, &[horizon_row(&cfg.params, &h, cfg.predictors.alpha)]).as_bytes())?;
    let alpha = cfg.predictors.alpha.or(h.trapping.map(|t| t.gamma0));
    let report = match (alpha, h.kappa(1)) {
        (Some(a), Some(_)) => Some(regularity_predictors(&h, a, cfg.predictors.k)),
        _ => None,
    };
    out.write_json("params.json", &json!({ "horizons": h, "predictors": report }))?;
    Ok(json!({ "roots": h.roots.len(), "trapping": h.trapping.is_some() }))
}

fn scan_points(cfg: &RunConfig) -> Vec<SpacetimeParams> {
    let or_base = |axis: &Vec<f64>, base: f64| if axis.is_empty() { vec![base] } else { axis.clone() };
    let p = cfg.params;
    let mut points = Vec::new();
    for lambda in or_base(&cfg.scan.lambda, p.lambda) {
        for charge in or_base(&cfg.scan.charge, p.charge) {
            for spin in or_base(&cfg.scan.spin, p.spin) {
                points.push(SpacetimeParams { lambda, charge, spin, ..p });
            }
        }
    }
    points
}

fn first_probe_fit(run: &ExteriorRun, window: Option<(f64, f64)>, t_end: f64) -> Result<FitResult> {
    let probe = run.probes.iter().find(|s| !s.near_horizon).or(run.probes.first()).ok_or_else(|| anyhow!("no probe recorded"))?;
    let window = window.unwrap_or((0.5 * t_end, t_end));
    Ok(fit_decay(&probe.values(), Some(window), &DecayOptions::default())?)
}

pub fn scan(cfg: &RunConfig, out: &mut OutputDir, exec: Execution) -> Result<Value> {
    let points = scan_points(cfg);
    let horizons = par::map(exec, &points, |p| horizon_data(p, &cfg.horizons).map_err(|e| e.to_string()));
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (p, h) in points.iter().zip(&horizons) {
        match h {
            Ok(h) => rows.push(horizon_row(p, h, cfg.predictors.alpha)),
            Err(e) => {
                let mut row = vec![Some(p.lambda), Some(p.mass), Some(p.charge), Some(p.spin)];
                row.resize(HORIZON_HEADER.len(), None);
                rows.push(row);
                errors.push(json!({ "params": p, "error": e }));
            }
        }
    }
    out.write("scan.csv", csv(&HORIZON_HEADER, &rows).as_bytes())?;

    let mut decay_rows = 0;
    if !cfg.scan.ell.is_empty() {
        let jobs: Vec<(SpacetimeParams, u32)> = points.iter().zip(&horizons).filter(|(_, h)| h.is_ok()).flat_map(|(p, _)| cfg.scan.ell.iter().map(move |&l| (*p, l))).collect();
        let fits = par::map(exec, &jobs, |(p, ell)| -> Result<FitResult, String> {
            let ext = ExteriorConfig { ell: *ell, ..cfg.exterior.clone() };
            let run = exterior_evolve(p, &ext).map_err(|e| e.to_string())?;
            first_probe_fit(&run, cfg.fit.window, ext.t_end).map_err(|e| e.to_string())
        });
        let mut decay = Vec::new();
        for ((p, ell), fit) in jobs.iter().zip(fits) {
            match fit {
                Ok(f) => decay.push(vec![Some(p.lambda), Some(p.charge), Some(p.spin), Some(f64::from(*ell)), Some(f.u0), Some(f.alpha), f.alpha_stderr]),
                Err(e) => errors.push(json!({ "params": p, "ell": ell, "error": e })),
            }
        }
        decay_rows = decay.len();
        out.write("scan_decay.csv", csv(&["lambda", "charge", "spin", "ell", "u0", "alpha", "alpha_stderr"], &decay).as_bytes())?;
    }
    if !errors.is_empty() {
        out.write_json("scan_errors.json", &errors)?;
    }
    Ok(json!({ "points": points.len(), "failed": errors.len(), "decay_fits": decay_rows }))
}

fn radial_chart(p: &SpacetimeParams) -> Result<ChartData> {
    let glued = extend_mu(p, None, None).and_then(|ext| build_charts(&ext, None));
    match glued {
        Ok(c) => Ok(c),
        Err(_) => exterior_charts(p, None).context("no chart covers these parameters"),
    }
}

pub fn flow(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value> {
    let f = &cfg.flow;
    if !(f.branch == 1.0 || f.branch == -1.0) {
        return Err(ConfigError::at("flow.branch", "must be 1 or -1").into());
    }
    let opts = FlowOptions { span: f.span, stride: f.stride.max(1), rtol: f.rtol, atol: f.atol, ..FlowOptions::default() };
    if cfg.params.family == Family::Kds {
        let flow = KdsFlow::new(&cfg.params, 2)?;
        let x = flow
            .turning_point(f.r, f.theta, f.sigma, f.zeta)
            .ok_or_else(|| ConfigError::at("flow", "no null turning point for (r, θ, σ, ζ)"))?;
        let t = flow.integrate(x, &opts)?;
        let rows: Vec<Vec<Option<f64>>> = t
            .samples
            .iter()
            .map(|s| {
                let p = &s.point;
                [s.s, p.r, p.theta, p.phi, p.sigma, p.xi, p.eta, p.zeta, s.log_scale, s.g, s.carter].into_iter().map(Some).collect()
            })
            .collect();
        out.write("trajectory.csv", csv(&["s", "r", "theta", "phi", "sigma", "xi", "eta", "zeta", "log_scale", "g", "carter"], &rows).as_bytes())?;
        let summary = json!({
            "terminal": t.terminal,
            "samples": t.samples.len(),
            "chart_switches": t.chart_switches,
            "max_g_drift": t.max_g_drift(),
            "max_carter_drift": t.max_carter_drift(),
        });
        out.write_json("flow.json", &summary)?;
        return Ok(summary);
    }
    let chart = radial_chart(&cfg.params)?;
    let c = chart.block(f.r);
    let l = f.angular_momentum;
    let (a, b, k) = (c.mu, 2.0 * c.phi * f.sigma, c.e * f.sigma * f.sigma + l * l / (f.r * f.r));
    let xi = if a.abs() < 1e-14 {
        -k / b
    } else {
        let disc = b * b - 4.0 * a * k;
        if disc < 0.0 {
            return Err(ConfigError::at("flow", format!("(r, σ, L) = ({}, {}, {l}) has no null completion", f.r, f.sigma)).into());
        }
        (-b + f.branch * disc.sqrt()) / (2.0 * a)
    };
    let horizons = chart.horizons.iter().map(|h| (h.index, h.radius)).collect();
    let flow = RadialFlow::new(chart);
    let x = BPhasePoint { tau0: 1.0, r: f.r, angle: 0.0, sigma: f.sigma, xi, eta: l };
    let t = flow.integrate(x, &FlowOptions { horizons, ..opts })?;
    out.write("trajectory.csv", t.to_csv().as_bytes())?;
    let summary = json!({
        "terminal": t.terminal,
        "samples": t.samples.len(),
        "renormalizations": t.renormalizations,
        "max_g_drift": t.max_g_drift(),
        "max_sigma_drift": t.max_sigma_drift(),
    });
    out.write_json("flow.json", &summary)?;
    Ok(summary)
}

fn write_exterior(run: &ExteriorRun, out: &mut OutputDir, prefix: &str) -> Result<Value> {
    let mut probes = Vec::new();
    let mut k = 0;
    for p in &run.probes {
        let name = if p.near_horizon {
            format!("{prefix}probe_horizon.csv")
        } else {
            k += 1;
            format!("{prefix}probe_{k:02}.csv")
        };
        out.write(&name, p.to_csv().as_bytes())?;
        probes.push(json!({ "file": name, "r": p.r, "near_horizon": p.near_horizon }));
    }
    out.write("exterior.bin", &encode_mode_field(&run.field)?)?;
    Ok(json!({ "meta": run.field.meta, "points": run.field.r.len(), "snapshots": run.field.snapshots.len(), "probes": probes }))
}

pub fn evolve_exterior(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value> {
    let run = exterior_evolve(&cfg.params, &cfg.exterior).map_err(|e| wave_err("exterior", e))?;
    let summary = write_exterior(&run, out, "")?;
    out.write_json("exterior.json", &summary)?;
    Ok(summary)
}

fn write_interior(field: &NullBlockField, out: &mut OutputDir, prefix: &str) -> Result<Value> {
    let g = &field.geometry;
    let mut rays = Vec::new();
    for (k, ray) in field.rays.iter().enumerate() {
        let dv = probe_null(field, NullLocation::Ray { u: ray.u }, Derivative::V)?;
        let rows: Vec<Vec<Option<f64>>> = (0..ray.value.len()).map(|j| vec![Some(g.v(j)), Some(ray.value[j]), Some(dv.u[j])]).collect();
        let name = format!("{prefix}ray_{k:02}.csv");
        out.write(&name, csv(&["v", "u", "dv_u"], &rows).as_bytes())?;
        rays.push(json!({ "file": name, "u": ray.u }));
    }
    let du = probe_null(field, NullLocation::FinalSlice, Derivative::U)?;
    let rows: Vec<Vec<Option<f64>>> = (0..field.final_slice.len()).map(|i| vec![Some(g.u(i)), Some(field.final_slice[i]), Some(du.u[i])]).collect();
    out.write(&format!("{prefix}final_slice.csv"), csv(&["u_null", "u", "du_u"], &rows).as_bytes())?;
    out.write("interior.bin", &encode_null_field(field)?)?;
    Ok(json!({
        "r1": g.r1,
        "r2": g.r2,
        "kappa1": g.kappa1,
        "kappa2": g.kappa2,
        "h": g.h,
        "nu": g.nu,
        "nv": g.nv,
        "max_abs_u": field.max_abs_u,
        "overflow_row": field.overflow,
        "rays": rays,
    }))
}

pub fn evolve_interior(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value> {
    let field = interior_evolve(&cfg.params, &cfg.interior, &cfg.tail).map_err(|e| wave_err("interior", e))?;
    let summary = write_interior(&field, out, "")?;
    out.write_json("interior.json", &summary)?;
    Ok(summary)
}

fn run_fit(series: &TimeSeries, cfg: &RunConfig) -> Result<FitResult> {
    let f = &cfg.fit;
    Ok(match f.method {
        FitMethod::LogLinear => fit_decay(series, f.window, &DecayOptions::default())?,
        FitMethod::Prony => fit_prony(series, f.window)?,
        FitMethod::PowerLaw => {
            let s = match f.window {
                Some((lo, hi)) => series.window(lo, hi),
                None => series.clone(),
            };
            fit_power(&s, f.v_max)?
        }
    })
}

pub fn fit(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value> {
    let path = cfg.fit.input.as_ref().ok_or_else(|| ConfigError::at("fit.input", "a CSV input is required"))?;
    let bytes = std::fs::read(path).map_err(|e| ConfigError::at("fit.input", format!("cannot read {}: {e}", path.display())))?;
    out.record_input(path, &bytes);
    let text = String::from_utf8(bytes).map_err(|_| ConfigError::at("fit.input", "not UTF-8"))?;
    let series = TimeSeries::from_csv(&text, &cfg.fit.column).map_err(|e| ConfigError::at("fit.input", e.to_string()))?;
    let result = run_fit(&series, cfg).context("fit failed")?;
    out.write_json("fit.json", &result)?;
    Ok(json!({ "u0": result.u0, "alpha": result.alpha, "exponent": result.exponent }))
}

/// Exterior evolution, its probe just inside r_2 as event-horizon data, the interior block and
/// the decay and blow-up fits.
pub fn pipeline(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value> {
    let ext = &cfg.exterior;
    let int = &cfg.interior;
    if int.v0 < 0.0 || int.v0 + int.v_span > ext.t_end {
        return Err(ConfigError::at("interior", format!("v ∈ [{}, {}] must lie within the exterior run [0, {}]", int.v0, int.v0 + int.v_span, ext.t_end)).into());
    }
    let run = exterior_evolve(&cfg.params, ext).map_err(|e| wave_err("exterior", e))?;
    let ext_summary = write_exterior(&run, out, "exterior_")?;
    let near = run.near_horizon().ok_or_else(|| anyhow!("the exterior run recorded no near-horizon probe"))?;
    // t_* and v differ by a function of r alone, so along the horizon the probe is u_ℓ(v).
    let tail = HorizonTail::Series { t: near.t.clone(), u: near.u.clone() };
    out.write("horizon_tail.csv", near.values().to_csv("u").as_bytes())?;

    let field = interior_evolve(&cfg.params, int, &tail).map_err(|e| wave_err("interior", e))?;
    let int_summary = write_interior(&field, out, "interior_")?;

    let window = cfg.fit.window.unwrap_or((0.5 * ext.t_end, ext.t_end));
    let exterior_fit = fit_decay(&near.values(), Some(window), &DecayOptions::default()).context("exterior decay fit")?;

    let g = &field.geometry;
    let last = field.last_ray();
    let dv = probe_null(&field, NullLocation::Ray { u: last.u }, Derivative::V)?;
    let v_mid = g.v0 + 0.5 * g.nv as f64 * g.h;
    let (vs, ls): (Vec<f64>, Vec<f64>) = dv.t.iter().zip(&dv.u).filter(|(v, d)| **v >= v_mid && **d != 0.0).map(|(v, d)| (*v, d.abs().ln())).unzip();
    let tangential = linear_fit(&vs, &ls).map(|f| -f.1);
    let (lv, lf) = transversal_log(&field, last.u)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = lv.iter().zip(&lf).filter(|(x, _)| **x <= -g.kappa1 * v_mid).map(|(x, y)| (*x, *y)).unzip();
    let transversal = linear_fit(&xs, &ys).map(|f| f.1);

    let h = horizon_data(&cfg.params, &cfg.horizons)?;
    let predictors = regularity_predictors(&h, exterior_fit.alpha, cfg.predictors.k);
    let fits = json!({
        "exterior": exterior_fit,
        "interior_dv_rate": tangential,
        "kappa2": g.kappa2,
        "transversal_exponent": transversal,
        "predicted_blowup_exponent": g.kappa2 / g.kappa1 - 1.0,
        "predictors": predictors,
    });
    out.write_json("fits.json", &fits)?;
    Ok(json!({ "exterior": ext_summary, "interior": int_summary, "fits": fits }))
}
