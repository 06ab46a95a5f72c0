//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on an unexpected failure.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use horizonlab::analysis::{fit_decay, DecayOptions};
use horizonlab::bflow::*;
use horizonlab::numerics::linear_fit;
use horizonlab::par::{self, Execution};
use horizonlab::spacetime::*;
use horizonlab::waves::*;

type Check = Result<String, String>;

struct Criterion {
    id: u8,
    name: &'static str,
    budget: Duration,
    /// Criteria that cannot be met by a correct solver, with the reason. They still report FAIL.
    known_blocker: Option<&'static str>,
    run: fn() -> Check,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn full(p: &SpacetimeParams) -> Result<HorizonData, String> {
    horizon_data(p, &HorizonOptions::default()).map_err(e)
}

fn max_abs(xs: impl Iterator<Item = f64>) -> f64 {
    xs.fold(0.0, |m, x| m.max(x.abs()))
}

fn mu_direct(p: &SpacetimeParams, r: f64) -> (f64, f64) {
    let l3 = p.lambda / 3.0;
    let (m, q) = (p.mass, p.charge);
    (1.0 - 2.0 * m / r + q * q / (r * r) - l3 * r * r, 2.0 * m / (r * r) - 2.0 * q * q / (r * r * r) - 2.0 * l3 * r)
}

// ---------- 1 ----------

fn closed_forms() -> Check {
    let sch = photon_sphere(&SpacetimeParams::rn_flat(1.0, 0.0)).map_err(e)?;
    let ext = photon_sphere(&SpacetimeParams::rn_flat(1.0, 1.0)).map_err(e)?;
    let h = full(&SpacetimeParams::rn_flat(1.0, 0.8))?;
    let (r1, b1) = (h.radius(1).ok_or("no r_1")?, h.beta(1).ok_or("no β_1")?);
    let errs = [
        sch.gamma0 - 1.0 / (2.0 * 3f64.powf(1.5)),
        ext.gamma0 - 1.0 / (8.0 * 2f64.sqrt()),
        sch.r_p - 3.0,
        ext.r_p - 2.0,
        r1 - 0.4,
        b1 - 4.0 / 15.0,
    ];
    let worst = max_abs(errs.into_iter());
    ensure(worst < 1e-12, || format!("worst deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.1e}"))
}

// ---------- 2 ----------

fn asymptotics() -> Check {
    let beta_dev = |q: f64| -> Result<f64, String> {
        let h = full(&SpacetimeParams::rnds(0.01, 1.0, q))?;
        Ok(h.beta(1).ok_or("no β_1")? / (q.powi(4) / 4.0) - 1.0)
    };
    let (da, db) = (beta_dev(0.1)?, beta_dev(0.05)?);
    let shrink = da / db;
    ensure((3.0..=5.0).contains(&shrink), || format!("β_1 deviations {da:e}, {db:e}: ratio {shrink}"))?;

    let eps: f64 = 1e-3;
    let h = full(&SpacetimeParams::rn_flat(1.0, 1.0 - eps))?;
    let product = h.trapping.ok_or("no trapping data")?.gamma0 * h.beta(1).ok_or("no β_1")? * 16.0 * eps.sqrt();
    ensure((0.8..=1.2).contains(&product), || format!("γ_0β_1·16√ε = {product}"))?;

    let r1_dev = |a: f64| -> Result<f64, String> {
        let h = full(&SpacetimeParams::kds(0.01, 1.0, a))?;
        Ok(h.radius(1).ok_or("no r_1")? / (a * a / 2.0) - 1.0)
    };
    let (ka, kb) = (r1_dev(0.05)?, r1_dev(0.025)?);
    ensure(kb.abs() < ka.abs() && ka.abs() < 1e-2, || format!("KdS r_1 deviations {ka:e}, {kb:e}"))?;
    Ok(format!("β_1 ratio {shrink:.3}, gap product {product:.4}, KdS r_1 dev {ka:.2e} → {kb:.2e}"))
}

// ---------- 3 ----------

fn saddles() -> Check {
    let p = SpacetimeParams::rnds(0.02, 1.0, 0.5);
    let ext = extend_mu(&p, None, None).map_err(e)?;
    let chart = build_charts(&ext, None).map_err(e)?;
    let flow = RadialFlow::new(chart.clone());
    let (mut eig_worst, mut beta_worst) = (0.0f64, 0.0f64);
    for j in [2u8, 3] {
        let h = *chart.horizon(j).ok_or("missing horizon")?;
        for xs in [1.0, -1.0] {
            let lin = linearize_radial(&flow, h.radius, xs).map_err(e)?;
            let m = -xs * h.slope;
            for (got, want) in lin.eigenvalues.iter().zip([m, m, 2.0 * m]) {
                eig_worst = eig_worst.max((got - want).abs() / want.abs());
            }
            let want = 2.0 / h.slope.abs();
            let beta = measure_beta(&flow, h.radius, xs, 5.0 / h.slope.abs()).map_err(e)?;
            beta_worst = beta_worst.max((beta / want - 1.0).abs());
        }
    }
    ensure(eig_worst < 1e-4, || format!("eigenvalue deviation {eig_worst:e}"))?;
    ensure(beta_worst < 1e-2, || format!("β deviation {beta_worst:e}"))?;
    Ok(format!("eigenvalues rel {eig_worst:.1e}, β rel {beta_worst:.1e}"))
}

// ---------- 4 ----------

fn trapping() -> Check {
    let mut worst = 0.0f64;
    let mut hess = 0.0f64;
    for q in [0.0, 0.5] {
        let p = SpacetimeParams::rnds(0.02, 1.0, q);
        let t = photon_sphere(&p).map_err(e)?;
        let grown = measure_trapping_growth(&p, 1e-9).map_err(e)?;
        let lin = linearize_trapping(&p).map_err(e)?;
        worst = worst.max((grown / t.nu_min - 1.0).abs()).max((lin.rate / t.nu_min - 1.0).abs());
        for r in [2.4, 3.3, 5.0] {
            let (chain, formula) = second_derivative_check(&p, r, 0.8).map_err(e)?;
            hess = hess.max((chain - formula).abs() / formula.abs().max(1.0));
        }
    }
    ensure(worst < 1e-2, || format!("rate deviation {worst:e}"))?;
    ensure(hess < 1e-8, || format!("H_G²r deviation {hess:e}"))?;
    Ok(format!("rate rel {worst:.1e}, H_G²r rel {hess:.1e}"))
}

// ---------- 5 ----------

fn conservation() -> Check {
    let p = SpacetimeParams::rnds(0.02, 1.0, 0.5);
    let flow = RadialFlow::new(StaticChart::new(Arc::new(p)));
    let mut g_worst = 0.0f64;
    for (r, sigma, l) in [(4.0, 1.0, 2.0), (3.0, -1.0, 3.5), (6.0, 1.0, 0.5)] {
        let c = flow.chart().block(r);
        // ξ completing (r, σ, L) to a null covector
        let (a, b, k) = (c.mu, 2.0 * c.phi * sigma, c.e * sigma * sigma + l * l / (r * r));
        let disc = b * b - 4.0 * a * k;
        ensure(disc >= 0.0, || format!("no null covector at r = {r}"))?;
        let xi = (-b + disc.sqrt()) / (2.0 * a);
        let x = BPhasePoint { tau0: 1.0, r, angle: 0.0, sigma, xi, eta: l };
        let t = flow.integrate(x, &FlowOptions { span: 100.0, ..FlowOptions::default() }).map_err(e)?;
        g_worst = g_worst.max(t.max_g_drift());
    }
    let kds = SpacetimeParams::kds(0.02, 1.0, 0.05);
    let f = KdsFlow::new(&kds, 2).map_err(e)?;
    let x = f.spherical_orbit(-1.0, 0.0, 2.2, 4.5).ok_or("no spherical orbit")?;
    let t = f.integrate(x, &FlowOptions { span: 100.0, ..FlowOptions::default() }).map_err(e)?;
    ensure(t.terminal == Terminal::SpanCompleted, || format!("KdS orbit ended early: {:?}", t.terminal))?;
    let (kg, carter) = (t.max_g_drift(), t.max_carter_drift());
    g_worst = g_worst.max(kg);
    ensure(g_worst < 1e-8, || format!("G drift {g_worst:e}"))?;
    ensure(carter < 1e-8, || format!("p_C drift {carter:e}"))?;
    Ok(format!("G drift {g_worst:.1e}, p_C drift {carter:.1e} over s = 100"))
}

// ---------- 6 ----------

fn de_sitter_rate(ell: u32) -> Result<f64, String> {
    let p = SpacetimeParams::de_sitter(3.0);
    // A pulse straddling r_3 = 1; data supported inside the static patch leaves no tail.
    let pulse = Some(Pulse { amplitude: 1.0, center: 1.0, width: 0.04 });
    let cfg = ExteriorConfig { ell, points: 2000, t_end: 12.0, chart_delta: Some(0.15), pulse, probes: vec![0.3], ..Default::default() };
    let run = exterior_evolve(&p, &cfg).map_err(e)?;
    let series = run.probes.iter().find(|s| !s.near_horizon).ok_or("no probe")?.values();
    Ok(fit_decay(&series, Some((4.0, 10.0)), &DecayOptions::default()).map_err(e)?.alpha)
}

fn de_sitter() -> Check {
    let kappa3 = 1.0;
    let rates = par::map(Execution::Parallel, &[0u32, 1], |&ell| de_sitter_rate(ell));
    let a0 = rates[0].clone()?;
    let a1 = rates[1].clone().map(|a| format!("{a:.3}")).unwrap_or_else(|m| m);
    let detail = format!("ℓ=0 rate {a0:.3} vs κ_3 = {kappa3} (ℓ=1 rate {a1})");
    ensure((a0 / kappa3 - 1.0).abs() < 0.1, || detail.clone())?;
    Ok(detail)
}

// ---------- 7 ----------

fn kg_constant() -> Check {
    let p = SpacetimeParams::rnds(0.02, 1.0, 0.0);
    let pulse = Pulse { amplitude: 1.0, center: 5.2, width: 0.5 };
    let fits = par::map(Execution::Parallel, &[0.04, 0.0], |&mass2| -> Result<f64, String> {
        let cfg = ExteriorConfig { mass2, points: 2000, t_end: 300.0, pulse: Some(pulse), velocity: Some(pulse), sample_every: 20, probes: vec![4.0, 6.0], ..Default::default() };
        let run = exterior_evolve(&p, &cfg).map_err(e)?;
        let mut worst = 0.0f64;
        for s in run.probes.iter().filter(|s| !s.near_horizon) {
            let fit = fit_decay(&s.values(), Some((150.0, 300.0)), &DecayOptions::default()).map_err(e)?;
            worst = if worst.abs() > fit.u0.abs() { worst } else { fit.u0 };
        }
        Ok(worst)
    });
    let (kg, massless) = (fits[0].clone()?, fits[1].clone()?);
    let detail = format!("|u_0| = {:.1e} for m² = 0.04, u_0 = {massless:.4} for m = 0", kg.abs());
    ensure(kg.abs() < 1e-3 * pulse.amplitude, || detail.clone())?;
    ensure(massless.abs() > 1e-2 * pulse.amplitude, || detail.clone())?;
    Ok(detail)
}

// ---------- 8 ----------

fn interior() -> Check {
    let p = SpacetimeParams::rnds(0.02, 1.0, 0.5);
    let tail = HorizonTail::Model { u0: 1.0, amplitude: 1.0, rate: None };
    let fields = par::map(Execution::Parallel, &[4000usize, 8000, 16000], |&cells_v| {
        interior_evolve(&p, &InteriorConfig { cells_v, v_span: 80.0, ..Default::default() }, &tail)
    });
    let fields: Vec<NullBlockField> = fields.into_iter().collect::<Result<_, _>>().map_err(e)?;
    let sups: Vec<f64> = fields.iter().map(|f| f.max_abs_u).collect();
    let spread = sups.iter().map(|s| (s / sups[2] - 1.0).abs()).fold(0.0, f64::max);
    ensure(sups.iter().all(|s| s.is_finite()) && spread < 0.02, || format!("max|u| {sups:?}"))?;

    let fine = &fields[2];
    let g = &fine.geometry;
    let last = fine.last_ray().u;
    let dv = probe_null(fine, NullLocation::Ray { u: last }, Derivative::V).map_err(e)?;
    let (vs, ls): (Vec<f64>, Vec<f64>) = dv.t.iter().zip(&dv.u).filter(|(v, d)| (40.0..=80.0).contains(*v) && **d != 0.0).map(|(v, d)| (*v, d.abs().ln())).unzip();
    let (_, slope, _) = linear_fit(&vs, &ls).ok_or("∂_v fit failed")?;
    let rate = -slope;
    ensure((rate / g.kappa2 - 1.0).abs() < 0.1, || format!("∂_v rate {rate:.4} vs κ_2 = {:.4}", g.kappa2))?;

    let (lv, lf) = transversal_log(fine, last).map_err(e)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = lv.iter().zip(&lf).filter(|(x, _)| (-1500.0..=-100.0).contains(*x)).map(|(x, y)| (*x, *y)).unzip();
    let predicted = g.kappa2 / g.kappa1 - 1.0;
    let exponent = linear_fit(&xs, &ys).map(|f| f.1).unwrap_or(f64::NAN);
    let band = if (exponent / predicted - 1.0).abs() < 0.15 { "inside" } else { "outside" };
    Ok(format!(
        "max|u| {:.5}/{:.5}/{:.5} (spread {spread:.1e}), ∂_v rate {rate:.4} vs κ_2 = {:.4}, transversal exponent {exponent:.4} vs {predicted:.4} ({band} ±15%, diagnostic)",
        sups[0], sups[1], sups[2], g.kappa2
    ))
}

// ---------- 9 ----------

fn order_of(errs: &[f64]) -> f64 {
    (errs[0] / errs[2]).ln() / 4f64.ln()
}

fn exterior_mms_error(points: usize) -> Result<f64, String> {
    let p = SpacetimeParams::rnds(0.02, 1.0, 0.5);
    let exact = |t: f64, r: f64| {
        let d = (-0.5 * t).exp();
        [d * r.sin(), -0.5 * d * r.sin(), d * r.cos(), 0.25 * d * r.sin(), -0.5 * d * r.cos(), -d * r.sin()]
    };
    let cfg = ExteriorConfig { ell: 1, mass2: 0.04, points, t_end: 1.0, ..Default::default() };
    let solver = ExteriorSolver::new(&p, &cfg).map_err(e)?;
    let op = solver.operator();
    let source = |t: f64, r: f64| op.coefficients(r).map(|c| c.apply(exact(t, r))).unwrap_or(f64::NAN);
    let data = |r: f64| {
        let d = exact(0.0, r);
        [d[0], d[1], d[2]]
    };
    let run = solver.run(&data, Some(&source)).map_err(e)?;
    let last = run.field.last();
    Ok(max_abs(run.field.r.iter().zip(&last.u).map(|(r, u)| u - exact(last.t, *r)[0])))
}

fn interior_mms_error(cells_v: usize) -> Result<f64, String> {
    let p = SpacetimeParams::rnds(0.02, 1.0, 0.9);
    let cfg = InteriorConfig { ell: 1, mass2: 0.1, cells_v, v_span: 2.0, u_range: Some((-3.0, -1.0)), snapshot_cells: 40, ..Default::default() };
    let solver = InteriorSolver::new(&p, &cfg).map_err(e)?;
    let g = solver.geometry().clone();
    let f = |u: f64, v: f64| {
        let (su, cu, sv, cv) = ((0.8 * u).sin(), (0.8 * u).cos(), (0.5 * v).sin(), (0.5 * v).cos());
        [su * cv + 1.0, 0.8 * cu * cv, -0.5 * su * sv, -0.4 * cu * sv]
    };
    let source = |u: f64, v: f64| {
        let r = g.r[(((u + v) / g.h).round() as i64 - g.k0) as usize];
        let (m, dm) = mu_direct(&p, r);
        let pot = m * (2.0 / (r * r) + dm / r + 0.1);
        let d = f(u, v);
        // 4∂_u∂_v(r f) − V r f with ∂_u r = ∂_v r = μ/2
        m * dm * d[0] + 2.0 * m * (d[1] + d[2]) + 4.0 * r * d[3] - pot * r * d[0]
    };
    let field = solver.run(&|v| f(g.u(0), v)[0], &|u| f(u, g.v(0))[0], Some(&source)).map_err(e)?;
    let cols = field.snapshot_cols.len();
    let mut err = 0.0f64;
    for (a, &i) in field.snapshot_rows.iter().enumerate() {
        for (b, &j) in field.snapshot_cols.iter().enumerate() {
            err = err.max((field.snapshot[a * cols + b] - f(g.u(i), g.v(j))[0]).abs());
        }
    }
    Ok(err)
}

fn exterior_domain_of_dependence() -> Result<f64, String> {
    let p = SpacetimeParams::rnds(0.02, 1.0, 0.5);
    let h = full(&p)?;
    let (r2, r3) = (h.radius(2).ok_or("no r_2")?, h.radius(3).ok_or("no r_3")?);
    let (probe_r, cut) = (4.0, 7.0);
    // Light travel time from the cut to the probe, ∫ dr/μ by Simpson's rule.
    let n = 2000;
    let w = (cut - probe_r) / n as f64;
    let travel = (0..=n)
        .map(|k| {
            let c = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            c / mu_direct(&p, probe_r + w * k as f64).0
        })
        .sum::<f64>()
        * w
        / 3.0;
    let pulse = Some(Pulse { amplitude: 1.0, center: 3.0, width: 0.2 });
    let base = ExteriorConfig { spacing: Some(0.01), dt: Some(0.003), t_end: 0.6 * travel, pulse, probes: vec![probe_r], ..Default::default() };
    let full_run = exterior_evolve(&p, &ExteriorConfig { domain: Some((r2 - 0.1, r3 + 0.2)), ..base.clone() }).map_err(e)?;
    let cut_run = exterior_evolve(&p, &ExteriorConfig { domain: Some((r2 - 0.1, cut)), ..base }).map_err(e)?;
    let pick = |r: &ExteriorRun| r.probes.iter().find(|s| !s.near_horizon).map(|s| s.u.clone()).ok_or("no probe");
    let (a, b) = (pick(&full_run)?, pick(&cut_run)?);
    ensure(max_abs(a.iter().copied()) > 1e-3, || "the pulse never reached the probe".into())?;
    Ok(max_abs(a.iter().zip(&b).map(|(x, y)| x - y)))
}

fn interior_domain_of_dependence() -> Result<f64, String> {
    let p = SpacetimeParams::rnds(0.02, 1.0, 0.5);
    let cfg = InteriorConfig { cells_v: 400, v_span: 20.0, ..Default::default() };
    let solver = InteriorSolver::new(&p, &cfg).map_err(e)?;
    let g = solver.geometry().clone();
    let v_cut = g.v(g.nv / 2);
    let eh = |v: f64| 1.0 + (-g.kappa2 * v).exp();
    let bumped = |v: f64| eh(v) + if v > v_cut { (v - v_cut).powi(2) } else { 0.0 };
    let trans = |_: f64| eh(g.v(0));
    let a = solver.run(&eh, &trans, None).map_err(e)?;
    let b = solver.run(&bumped, &trans, None).map_err(e)?;
    let cols = a.snapshot_cols.len();
    let mut diff = 0.0f64;
    let mut changed = false;
    for row in 0..a.snapshot_rows.len() {
        for (c, &j) in a.snapshot_cols.iter().enumerate() {
            let d = (a.snapshot[row * cols + c] - b.snapshot[row * cols + c]).abs();
            if g.v(j) <= v_cut {
                diff = diff.max(d);
            } else if d > 0.0 {
                changed = true;
            }
        }
    }
    ensure(changed, || "the modification never propagated".into())?;
    Ok(diff)
}

fn exterior_linearity() -> Result<f64, String> {
    let p = SpacetimeParams::rnds(0.02, 1.0, 0.5);
    let cfg = ExteriorConfig { points: 300, t_end: 10.0, probes: vec![3.0, 6.0], ..Default::default() };
    let solver = ExteriorSolver::new(&p, &cfg).map_err(e)?;
    let data = |f: Pulse| move |r: f64| {
        let (u, du) = f.eval(r);
        [u, 0.2 * u, du]
    };
    let (f1, f2) = (Pulse { amplitude: 1.0, center: 4.0, width: 0.5 }, Pulse { amplitude: -0.3, center: 7.0, width: 0.8 });
    let (a, b) = (1.7, -2.4);
    let x = solver.run(&data(f1), None).map_err(e)?;
    let y = solver.run(&data(f2), None).map_err(e)?;
    let combo = |r: f64| {
        let (s, t) = (data(f1)(r), data(f2)(r));
        [a * s[0] + b * t[0], a * s[1] + b * t[1], a * s[2] + b * t[2]]
    };
    let z = solver.run(&combo, None).map_err(e)?;
    let mut worst = 0.0f64;
    for k in 0..z.probes.len() {
        let scale = max_abs(z.probes[k].u.iter().copied());
        let err = max_abs((0..z.probes[k].u.len()).map(|i| z.probes[k].u[i] - a * x.probes[k].u[i] - b * y.probes[k].u[i]));
        worst = worst.max(err / scale);
    }
    Ok(worst)
}

fn interior_linearity() -> Result<f64, String> {
    let p = SpacetimeParams::rnds(0.02, 1.0, 0.5);
    let solver = InteriorSolver::new(&p, &InteriorConfig { cells_v: 300, v_span: 20.0, ..Default::default() }).map_err(e)?;
    let g = solver.geometry().clone();
    let e1 = |v: f64| (-g.kappa2 * v).exp();
    let t1 = |u: f64| e1(g.v(0)) + 0.1 * ((-(u + 10.0).powi(2)).exp() - (-(g.u(0) + 10.0).powi(2)).exp());
    let e2 = |v: f64| 0.3 * (0.2 * v).cos();
    let t2 = |_: f64| e2(g.v(0));
    let (a, b) = (0.6, -1.9);
    let x = solver.run(&e1, &t1, None).map_err(e)?;
    let y = solver.run(&e2, &t2, None).map_err(e)?;
    let z = solver.run(&|v| a * e1(v) + b * e2(v), &|u| a * t1(u) + b * t2(u), None).map_err(e)?;
    let scale = max_abs(z.snapshot.iter().copied());
    Ok(max_abs((0..z.snapshot.len()).map(|k| z.snapshot[k] - a * x.snapshot[k] - b * y.snapshot[k])) / scale)
}

fn scheme_quality() -> Check {
    let ext: Vec<f64> = [101, 201, 401].into_iter().map(exterior_mms_error).collect::<Result<_, _>>()?;
    let int: Vec<f64> = [40, 80, 160].into_iter().map(interior_mms_error).collect::<Result<_, _>>()?;
    let (oe, oi) = (order_of(&ext), order_of(&int));
    ensure((oe - 2.0).abs() < 0.2, || format!("exterior order {oe:.3} from {ext:?}"))?;
    ensure((oi - 2.0).abs() < 0.2, || format!("interior order {oi:.3} from {int:?}"))?;
    let (de, di) = (exterior_domain_of_dependence()?, interior_domain_of_dependence()?);
    ensure(de < 1e-10, || format!("exterior domain of dependence {de:e}"))?;
    ensure(di == 0.0, || format!("interior domain of dependence {di:e}"))?;
    let (le, li) = (exterior_linearity()?, interior_linearity()?);
    ensure(le < 1e-12 && li < 1e-11, || format!("linearity defects {le:e}, {li:e}"))?;
    Ok(format!("orders {oe:.3} (exterior), {oi:.3} (interior); causal leak {de:.1e}/{di:.0e}; linearity {le:.1e}/{li:.1e}"))
}

const DS_BLOCKER: &str = "ℓ=0 de Sitter resonances are 0, −2iκ_3, −3iκ_3, …; the post-constant rate of a correct solver is 2κ_3";

fn criteria() -> Vec<Criterion> {
    let s = Duration::from_secs;
    vec![
        Criterion { id: 1, name: "closed-form table", budget: s(1), known_blocker: None, run: closed_forms },
        Criterion { id: 2, name: "asymptotic laws", budget: s(1), known_blocker: None, run: asymptotics },
        Criterion { id: 3, name: "flow saddle structure", budget: s(10), known_blocker: None, run: saddles },
        Criterion { id: 4, name: "trapping rate", budget: s(10), known_blocker: None, run: trapping },
        Criterion { id: 5, name: "conservation", budget: s(10), known_blocker: None, run: conservation },
        Criterion { id: 6, name: "de Sitter decay", budget: s(60), known_blocker: Some(DS_BLOCKER), run: de_sitter },
        Criterion { id: 7, name: "Klein-Gordon constant removal", budget: s(120), known_blocker: None, run: kg_constant },
        Criterion { id: 8, name: "interior boundedness and tangential decay", budget: s(300), known_blocker: None, run: interior },
        Criterion { id: 9, name: "scheme quality", budget: s(120), known_blocker: None, run: scheme_quality },
    ]
}

fn main() -> ExitCode {
    let filter: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = 0;
    for c in criteria().into_iter().filter(|c| filter.is_empty() || filter.contains(&c.id)) {
        let start = Instant::now();
        let outcome = (c.run)();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > c.budget => Err(format!("{detail}; over the {:?} budget", c.budget)),
            other => other,
        };
        match (&outcome, c.known_blocker) {
            (Ok(detail), _) => println!("PASS [{}] {}: {detail} ({:.2?})", c.id, c.name, took),
            (Err(detail), Some(why)) => println!("FAIL [{}] {}: {detail} ({:.2?}) [known blocker: {why}]", c.id, c.name, took),
            (Err(detail), None) => {
                unexpected += 1;
                println!("FAIL [{}] {}: {detail} ({:.2?})", c.id, c.name, took);
            }
        }
    }
    if unexpected > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
