use horizonlab::analysis::TimeSeries;
use horizonlab::spacetime::*;
use horizonlab::waves::io::{decode, encode_mode_field, encode_null_field};
use horizonlab::waves::*;
use proptest::prelude::*;

fn rnds() -> SpacetimeParams {
    SpacetimeParams::rnds(0.02, 1.0, 0.5)
}

fn mu_direct(p: &SpacetimeParams, r: f64) -> (f64, f64) {
    let l3 = p.lambda / 3.0;
    let (m, q) = (p.mass, p.charge);
    (1.0 - 2.0 * m / r + q * q / (r * r) - l3 * r * r, 2.0 * m / (r * r) - 2.0 * q * q / (r * r * r) - 2.0 * l3 * r)
}

/// Radii from the analytic sign changes of r²μ, refined by bisection.
fn roots_direct(p: &SpacetimeParams) -> Vec<f64> {
    let f = |r: f64| r * r * mu_direct(p, r).0;
    let (lo, hi, n) = (1e-3, 40.0, 40_000);
    let h = (hi - lo) / n as f64;
    let mut out = Vec::new();
    for k in 0..n {
        let (mut a, mut b) = (lo + h * k as f64, lo + h * (k + 1) as f64);
        if f(a).signum() == f(b).signum() {
            continue;
        }
        let sa = f(a).signum();
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if f(m).signum() == sa {
                a = m;
            } else {
                b = m;
            }
        }
        out.push(0.5 * (a + b));
    }
    out
}

fn max_abs(xs: impl Iterator<Item = f64>) -> f64 {
    xs.fold(0.0, |m, x| m.max(x.abs()))
}

// ---------- mode_reduce ----------

#[test]
fn flat_limit_is_the_radial_wave_operator() {
    // Λ → 0 with M = Q = 0: the static region at r ~ 1 is flat to O(Λ).
    let p = SpacetimeParams::de_sitter(1e-9);
    let charts = exterior_charts(&p, None).unwrap();
    for ell in [0u32, 2] {
        let op = mode_reduce(&p, &charts, ell, 0.0).unwrap();
        for r in [0.5, 1.0, 3.0] {
            let c = op.coefficients(r).unwrap();
            let (t, l) = (0.3, f64::from(ell));
            let (e, s, co) = (f64::exp(-t), r.sin(), r.cos());
            let d = [e * s, -e * s, e * co, e * s, -e * co, -e * s];
            let flat = d[3] - d[5] - 2.0 / r * d[2] + l * (l + 1.0) / (r * r) * d[0];
            assert!((c.apply(d) - flat).abs() < 1e-7, "r = {r}: {} vs {flat}", c.apply(d));
        }
    }
}

#[test]
fn dual_cross_term_matches_local_chart_forms() {
    let p = rnds();
    let charts = exterior_charts(&p, Some(0.05)).unwrap();
    let op = mode_reduce(&p, &charts, 1, 0.0).unwrap();
    let mut in_bands = 0;
    for k in 0..4000 {
        let r = 0.09 + 12.0 * k as f64 / 4000.0;
        let m = mu_direct(&p, r).0;
        let g = op.dual(r).unwrap();
        for f in charts.local_forms(r) {
            assert!((g[1] - f.sign * (1.0 + m * f.c)).abs() < 1e-9 * (1.0 + (m * f.c).abs()), "r = {r}");
        }
        assert!((g[2] + m).abs() < 1e-12);
        if matches!(charts.region_at(r).kind, RegionKind::Blend { .. }) {
            // c is set by the blend itself here, so the check is not circular.
            let i = charts.horizons.iter().position(|h| (h.radius - r).abs() <= charts.delta).unwrap();
            let c = charts.blend_value(i, r).unwrap();
            assert!((g[1] - charts.horizons[i].sign * (1.0 + m * c)).abs() < 1e-12, "r = {r}");
            in_bands += 1;
        }
    }
    assert!(in_bands > 50);
}

#[test]
fn assembled_operator_matches_flux_form_stencil() {
    // P u = r⁻²[∂_t(r²(G^tt u_t + G^tr u_r)) + ∂_r(r²(G^tr u_t + G^rr u_r))] + V u with
    // u = e^{−t} sin r, the r-derivative by a fourth-order central difference.
    let p = rnds();
    let charts = exterior_charts(&p, None).unwrap();
    let op = mode_reduce(&p, &charts, 2, 0.04).unwrap();
    let t = 0.7;
    let et = f64::exp(-t);
    let flux = |r: f64| {
        let g = charts.block(r).dual();
        r * r * (g[1] * (-et * r.sin()) + g[2] * et * r.cos())
    };
    let margin = 0.05;
    let mut checked = 0;
    for reg in &charts.regions {
        let hi = reg.hi.min(14.0);
        if hi - reg.lo < 4.0 * margin {
            continue;
        }
        for k in 1..8 {
            let r = reg.lo + margin + (hi - reg.lo - 2.0 * margin) * k as f64 / 8.0;
            let g = charts.block(r).dual();
            let h = 1e-3;
            let dflux = (-flux(r + 2.0 * h) + 8.0 * flux(r + h) - 8.0 * flux(r - h) + flux(r - 2.0 * h)) / (12.0 * h);
            let time_part = g[0] * et * r.sin() + g[1] * (-et * r.cos());
            let l = 2.0;
            let v = l * (l + 1.0) / (r * r) + 0.04;
            let reference = time_part + dflux / (r * r) + v * et * r.sin();
            let d = [et * r.sin(), -et * r.sin(), et * r.cos(), et * r.sin(), -et * r.cos(), -et * r.sin()];
            let got = op.coefficients(r).unwrap().apply(d);
            assert!((got - reference).abs() < 1e-8, "r = {r}: {got} vs {reference}");
            checked += 1;
        }
    }
    assert!(checked >= 20);
}

#[test]
fn negative_mass_squared_is_rejected() {
    let p = rnds();
    let charts = exterior_charts(&p, None).unwrap();
    assert!(matches!(mode_reduce(&p, &charts, 0, -0.1), Err(WaveError::Config(_))));
}

// ---------- exterior engine ----------

fn exterior_mms_error(points: usize) -> f64 {
    let p = rnds();
    let exact = |t: f64, r: f64| {
        let e = (-0.5 * t).exp();
        [e * r.sin(), -0.5 * e * r.sin(), e * r.cos(), 0.25 * e * r.sin(), -0.5 * e * r.cos(), -e * r.sin()]
    };
    let cfg = ExteriorConfig { ell: 1, mass2: 0.04, points, t_end: 1.0, ..Default::default() };
    let solver = ExteriorSolver::new(&p, &cfg).unwrap();
    let op = solver.operator();
    let source = |t: f64, r: f64| op.coefficients(r).unwrap().apply(exact(t, r));
    let run = solver
        .run(
            &|r| {
                let d = exact(0.0, r);
                [d[0], d[1], d[2]]
            },
            Some(&source),
        )
        .unwrap();
    let last = run.field.last();
    max_abs(run.field.r.iter().zip(&last.u).map(|(r, u)| u - exact(last.t, *r)[0]))
}

#[test]
fn exterior_manufactured_solution_converges_at_second_order() {
    let e: Vec<f64> = [101, 201, 401].iter().map(|&n| exterior_mms_error(n)).collect();
    assert!(e[0] > e[1] && e[1] > e[2], "{e:?}");
    let order = (e[0] / e[2]).ln() / 4f64.ln();
    assert!((order - 2.0).abs() < 0.2, "order {order}, errors {e:?}");
}

#[test]
fn excision_ends_are_pure_outflow() {
    let cfg = ExteriorConfig { points: 400, t_end: 0.1, ..Default::default() };
    let solver = ExteriorSolver::new(&rnds(), &cfg).unwrap();
    let run = solver.run(&|_| [0.0; 3], None).unwrap();
    assert_eq!(run.field.meta.inflow_points, 0);
}

#[test]
fn cfl_violation_is_reported() {
    let cfg = ExteriorConfig { points: 400, dt: Some(1.0), ..Default::default() };
    assert!(matches!(ExteriorSolver::new(&rnds(), &cfg), Err(WaveError::Cfl { .. })));
}

#[test]
fn exterior_needs_a_cosmological_horizon() {
    let cfg = ExteriorConfig { points: 100, ..Default::default() };
    assert!(ExteriorSolver::new(&SpacetimeParams::rn_flat(1.0, 0.5), &cfg).is_err());
}

#[test]
fn extending_the_grid_beyond_the_cosmological_horizon_leaves_probes_unchanged() {
    let p = rnds();
    let hd = horizon_data(&p, &HorizonOptions::default()).unwrap();
    let (r2, r3) = (hd.radius(2).unwrap(), hd.radius(3).unwrap());
    let h = 0.01;
    let pulse = Some(Pulse { amplitude: 1.0, center: 6.0, width: 0.4 });
    let base = ExteriorConfig { spacing: Some(h), dt: Some(0.003), t_end: 6.0, pulse, probes: vec![5.0], ..Default::default() };
    let lo = r2 - 0.1;
    let short = ExteriorConfig { domain: Some((lo, r3 + 0.2)), ..base.clone() };
    let long = ExteriorConfig { domain: Some((lo, r3 + 1.0)), ..base };
    let a = exterior_evolve(&p, &short).unwrap();
    let b = exterior_evolve(&p, &long).unwrap();
    let pa = a.probes.iter().find(|s| !s.near_horizon).unwrap();
    let pb = b.probes.iter().find(|s| !s.near_horizon).unwrap();
    assert_eq!(pa.u, pb.u);
}

#[test]
fn truncating_outside_the_causal_past_changes_probes_below_tolerance() {
    let p = rnds();
    let hd = horizon_data(&p, &HorizonOptions::default()).unwrap();
    let (r2, r3) = (hd.radius(2).unwrap(), hd.radius(3).unwrap());
    let (probe_r, cut) = (4.0, 7.0);
    // Light travel time from the cut to the probe: ∫ dr/μ by Simpson's rule.
    let n = 2000;
    let w = (cut - probe_r) / n as f64;
    let travel: f64 = (0..=n)
        .map(|k| {
            let c = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            c / mu_direct(&p, probe_r + w * k as f64).0
        })
        .sum::<f64>()
        * w
        / 3.0;
    let h = 0.01;
    let pulse = Some(Pulse { amplitude: 1.0, center: 3.0, width: 0.2 });
    let base = ExteriorConfig { spacing: Some(h), dt: Some(0.003), t_end: 0.6 * travel, pulse, probes: vec![probe_r], ..Default::default() };
    let lo = r2 - 0.1;
    let full = exterior_evolve(&p, &ExteriorConfig { domain: Some((lo, r3 + 0.2)), ..base.clone() }).unwrap();
    let cut_run = exterior_evolve(&p, &ExteriorConfig { domain: Some((lo, cut)), ..base }).unwrap();
    let pa = full.probes.iter().find(|s| !s.near_horizon).unwrap();
    let pb = cut_run.probes.iter().find(|s| !s.near_horizon).unwrap();
    let diff = max_abs(pa.u.iter().zip(&pb.u).map(|(a, b)| a - b));
    assert!(diff < 1e-10, "difference {diff:e} over t ≤ {}", 0.6 * travel);
    assert!(max_abs(pa.u.iter().copied()) > 1e-3);
}

#[test]
fn exterior_evolution_is_linear() {
    let p = rnds();
    let cfg = ExteriorConfig { points: 300, t_end: 10.0, probes: vec![3.0, 6.0], ..Default::default() };
    let solver = ExteriorSolver::new(&p, &cfg).unwrap();
    let f1 = Pulse { amplitude: 1.0, center: 4.0, width: 0.5 };
    let f2 = Pulse { amplitude: -0.3, center: 7.0, width: 0.8 };
    let data = |f: Pulse| move |r: f64| {
        let (u, du) = f.eval(r);
        [u, 0.2 * u, du]
    };
    let (a, b) = (1.7, -2.4);
    let r1 = solver.run(&data(f1), None).unwrap();
    let r2 = solver.run(&data(f2), None).unwrap();
    let combo = solver
        .run(
            &|r| {
                let (x, y) = (data(f1)(r), data(f2)(r));
                [a * x[0] + b * y[0], a * x[1] + b * y[1], a * x[2] + b * y[2]]
            },
            None,
        )
        .unwrap();
    for k in 0..combo.probes.len() {
        let scale = max_abs(combo.probes[k].u.iter().copied());
        let err = max_abs((0..combo.probes[k].u.len()).map(|i| combo.probes[k].u[i] - a * r1.probes[k].u[i] - b * r2.probes[k].u[i]));
        assert!(err <= 1e-12 * scale, "{err:e}");
    }
}

#[test]
fn massless_field_settles_to_a_spatial_constant() {
    let p = rnds();
    let hd = horizon_data(&p, &HorizonOptions::default()).unwrap();
    let (r2, r3) = (hd.radius(2).unwrap(), hd.radius(3).unwrap());
    let pulse = Some(Pulse { amplitude: 1.0, center: 5.0, width: 0.5 });
    let cfg = ExteriorConfig { points: 600, t_end: 150.0, pulse, velocity: pulse, snapshot_every: Some(2000), sample_every: 50, ..Default::default() };
    let run = exterior_evolve(&p, &cfg).unwrap();
    let delta = 0.5;
    let variance = |s: &FieldSnapshot| {
        let vals: Vec<f64> = run.field.r.iter().zip(&s.u).filter(|(r, _)| **r > r2 + delta && **r < r3 - delta).map(|(_, u)| *u).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        vals.iter().map(|u| (u - mean).powi(2)).sum::<f64>() / vals.len() as f64
    };
    let snaps = &run.field.snapshots;
    let first = variance(&snaps[0]);
    let middle = variance(&snaps[snaps.len() / 2]);
    let last = variance(snaps.last().unwrap());
    assert!(last < middle && middle < first, "{first:e} {middle:e} {last:e}");
    assert!(last < 1e-5 * first, "{first:e} {last:e}");
    let mean_last = snaps.last().unwrap().u.iter().sum::<f64>() / run.field.r.len() as f64;
    assert!(mean_last.abs() > 1e-2);
}

// ---------- probe ----------

fn snapshot_run() -> ExteriorRun {
    let cfg = ExteriorConfig { points: 1000, t_end: 2.0, snapshot_every: Some(50), ..Default::default() };
    exterior_evolve(&rnds(), &cfg).unwrap()
}

#[test]
fn probing_the_initial_slice_reproduces_the_data() {
    let run = snapshot_run();
    let solver = ExteriorSolver::new(&rnds(), &ExteriorConfig { points: 1000, ..Default::default() }).unwrap();
    let pulse = solver.pulse();
    for r in [3.3, 5.01, 6.77] {
        let u = probe(&run.field, r, Derivative::Value, 4).unwrap();
        let ur = probe(&run.field, r, Derivative::R, 4).unwrap();
        let (v, dv) = pulse.eval(r);
        assert!((u.u[0] - v).abs() < 1e-6, "{} vs {v}", u.u[0]);
        assert!((ur.u[0] - dv).abs() < 1e-5);
    }
}

#[test]
fn probe_stencils_of_different_order_agree() {
    let run = snapshot_run();
    let h = run.field.meta.h;
    for r in [3.31, 5.07] {
        for d in [Derivative::Value, Derivative::T, Derivative::R] {
            let a = probe(&run.field, r, d, 3).unwrap();
            let b = probe(&run.field, r, d, 5).unwrap();
            let scale = max_abs(b.u.iter().copied()).max(1e-3);
            let diff = max_abs(a.u.iter().zip(&b.u).map(|(x, y)| x - y));
            assert!(diff < 50.0 * h.powi(4) * scale / h.powi(0) * 1e2, "{d:?}: {diff:e}");
        }
    }
}

#[test]
fn probe_outside_the_domain_is_an_error() {
    let run = snapshot_run();
    assert!(matches!(probe(&run.field, 100.0, Derivative::Value, 3), Err(WaveError::OutOfDomain(_))));
    assert!(probe(&run.field, 4.0, Derivative::U, 3).is_err());
}

// ---------- interior engine ----------

fn small_interior(cells_v: usize) -> InteriorConfig {
    InteriorConfig { cells_v, v_span: 20.0, ..Default::default() }
}

#[test]
fn lattice_radius_matches_closed_form_tortoise_coordinate() {
    let p = rnds();
    let roots = roots_direct(&p);
    assert_eq!(roots.len(), 3);
    let (r1, r2, r3) = (roots[0], roots[1], roots[2]);
    let rn = -(r1 + r2 + r3);
    let dmu = |r: f64| mu_direct(&p, r).1;
    // 1/μ = r²/(r²μ) = Σ_j 1/(μ'(r_j)(r − r_j)), with μ'(r_n) from the factored quartic.
    let lam3 = p.lambda / 3.0;
    let dmu_n = -lam3 * (rn - r1) * (rn - r2) * (rn - r3) / (rn * rn);
    let solver = InteriorSolver::new(&p, &small_interior(400)).unwrap();
    let g = solver.geometry();
    assert!((g.r1 - r1).abs() < 1e-10 && (g.r2 - r2).abs() < 1e-10);
    let rstar = |s: usize| {
        let r = g.r[s];
        g.ln_r_minus_r1[s] / dmu(r1) + (r2 - r).abs().ln() / dmu(r2) + (r3 - r).abs().ln() / dmu(r3) + (r - rn).abs().ln() / dmu_n
    };
    let s0 = g.r.iter().position(|&r| (r - 0.5 * (r1 + r2)).abs() < 0.05).unwrap();
    let mut checked = 0;
    for s in 0..g.r.len() {
        if g.r[s] - r1 < 1e-6 || r2 - g.r[s] < 1e-6 {
            continue;
        }
        let expect = (s as f64 - s0 as f64) * 0.5 * g.h;
        assert!((rstar(s) - rstar(s0) - expect).abs() < 1e-8, "slot {s}: {} vs {expect}", rstar(s) - rstar(s0));
        checked += 1;
    }
    assert!(checked > 50);
    // r decreases towards the future and approaches r_1 on the last rows.
    assert!(g.r.windows(2).all(|w| w[1] <= w[0]));
    assert!(g.ln_r_minus_r1.last().unwrap() < &(1e-12f64 * (r2 - r1)).ln());
}

fn interior_mms_error(cells_v: usize) -> f64 {
    let p = SpacetimeParams::rnds(0.02, 1.0, 0.9);
    let cfg = InteriorConfig { ell: 1, mass2: 0.1, cells_v, v_span: 2.0, u_range: Some((-3.0, -1.0)), snapshot_cells: 40, ..Default::default() };
    let solver = InteriorSolver::new(&p, &cfg).unwrap();
    let g = solver.geometry().clone();
    let f = |u: f64, v: f64| [(0.8 * u).sin() * (0.5 * v).cos() + 1.0, 0.8 * (0.8 * u).cos() * (0.5 * v).cos(), -0.5 * (0.8 * u).sin() * (0.5 * v).sin(), -0.4 * (0.8 * u).cos() * (0.5 * v).sin()];
    let source = |u: f64, v: f64| {
        let slot = (((u + v) / g.h).round() as i64 - g.k0) as usize;
        let r = g.r[slot];
        let (m, dm) = mu_direct(&p, r);
        let pot = m * (2.0 / (r * r) + dm / r + 0.1);
        let d = f(u, v);
        // 4∂_u∂_v(r f) − V r f with ∂_u r = ∂_v r = μ/2.
        m * dm * d[0] + 2.0 * m * (d[1] + d[2]) + 4.0 * r * d[3] - pot * r * d[0]
    };
    let field = solver.run(&|v| f(g.u(0), v)[0], &|u| f(u, g.v(0))[0], Some(&source)).unwrap();
    let mut err: f64 = 0.0;
    for (a, &i) in field.snapshot_rows.iter().enumerate() {
        for (b, &j) in field.snapshot_cols.iter().enumerate() {
            let got = field.snapshot[a * field.snapshot_cols.len() + b];
            err = err.max((got - f(g.u(i), g.v(j))[0]).abs());
        }
    }
    err
}

#[test]
fn interior_manufactured_solution_converges_at_second_order() {
    let e: Vec<f64> = [40, 80, 160].iter().map(|&n| interior_mms_error(n)).collect();
    assert!(e[0] > e[1] && e[1] > e[2], "{e:?}");
    let order = (e[0] / e[2]).ln() / 4f64.ln();
    assert!((order - 2.0).abs() < 0.2, "order {order}, errors {e:?}");
}

#[test]
fn killing_time_is_an_exact_solution() {
    // ∂_t is Killing, so u = t = (v − u)/2 solves the ℓ = 0 massless equation.
    let solver = InteriorSolver::new(&rnds(), &small_interior(1000)).unwrap();
    let g = solver.geometry().clone();
    let f = solver.run(&|v| 0.5 * (v - g.u(0)), &|u| 0.5 * (g.v(0) - u), None).unwrap();
    let v_end = g.v(g.nv);
    let err = max_abs(f.final_slice.iter().enumerate().map(|(i, x)| x - 0.5 * (v_end - g.u(i))));
    let scale = max_abs(f.final_slice.iter().copied());
    assert!(err < 1e-8 * scale, "{err:e} against {scale}");
}

#[test]
fn constant_data_stays_constant() {
    let f = interior_evolve(&rnds(), &small_interior(500), &HorizonTail::Model { u0: 0.7, amplitude: 0.0, rate: None }).unwrap();
    let dev = max_abs(f.snapshot.iter().map(|u| u - 0.7));
    assert!(dev < 1e-9, "{dev:e}");
    assert!(f.overflow.is_none());
}

#[test]
fn interior_sup_is_refinement_stable_for_slow_and_fast_tails() {
    for alpha in [0.1, 0.5] {
        let tail = HorizonTail::Model { u0: 0.2, amplitude: 1.0, rate: Some(alpha) };
        let a = interior_evolve(&rnds(), &small_interior(1000), &tail).unwrap();
        let b = interior_evolve(&rnds(), &small_interior(2000), &tail).unwrap();
        let rel = (a.max_abs_u - b.max_abs_u).abs() / b.max_abs_u;
        assert!(rel < 0.02, "α = {alpha}: {} vs {}", a.max_abs_u, b.max_abs_u);
        assert!(b.max_abs_u.is_finite());
    }
}

#[test]
fn interior_evolution_is_linear() {
    let p = rnds();
    let solver = InteriorSolver::new(&p, &small_interior(300)).unwrap();
    let k2 = solver.geometry().kappa2;
    let e1 = move |v: f64| (-k2 * v).exp();
    let t1 = |u: f64| 1.0 + 0.1 * (-(u + 10.0).powi(2)).exp();
    let e2 = |v: f64| 0.3 * (0.2 * v).cos();
    let c2 = e2(solver.geometry().v(0));
    let t2 = move |u: f64| c2 + 0.0 * u;
    let (a, b) = (0.6, -1.9);
    let f1 = solver.run(&e1, &|u| t1(u) - t1(solver.geometry().u(0)) + e1(solver.geometry().v(0)), None).unwrap();
    let f2 = solver.run(&e2, &t2, None).unwrap();
    let f12 = solver
        .run(&|v| a * e1(v) + b * e2(v), &|u| a * (t1(u) - t1(solver.geometry().u(0)) + e1(solver.geometry().v(0))) + b * t2(u), None)
        .unwrap();
    let scale = max_abs(f12.snapshot.iter().copied());
    let err = max_abs((0..f12.snapshot.len()).map(|k| f12.snapshot[k] - a * f1.snapshot[k] - b * f2.snapshot[k]));
    assert!(err <= 1e-11 * scale, "{err:e}");
}

#[test]
fn tangential_derivative_of_a_function_of_u_vanishes() {
    let solver = InteriorSolver::new(&rnds(), &small_interior(200)).unwrap();
    let mut field = interior_evolve(&rnds(), &small_interior(200), &HorizonTail::Model { u0: 1.0, amplitude: 0.5, rate: None }).unwrap();
    let g = solver.geometry();
    for ray in &mut field.rays {
        let val = (0.3 * ray.u).sin();
        ray.value.iter_mut().for_each(|x| *x = val);
    }
    field.final_slice = (0..=g.nu).map(|i| (0.3 * g.u(i)).sin()).collect();
    for ray in &field.rays {
        let dv = probe_null(&field, NullLocation::Ray { u: ray.u }, Derivative::V).unwrap();
        assert!(dv.u.iter().all(|x| x.abs() < 1e-14));
    }
    let du = probe_null(&field, NullLocation::FinalSlice, Derivative::U).unwrap();
    let h = g.h;
    let mid = du.u.len() / 2;
    assert!((du.u[mid] - 0.3 * (0.3 * g.u(mid)).cos()).abs() < h * h);
}

#[test]
fn null_probe_checks_its_location() {
    let f = interior_evolve(&rnds(), &small_interior(200), &HorizonTail::Model { u0: 1.0, amplitude: 0.5, rate: None }).unwrap();
    assert!(matches!(probe_null(&f, NullLocation::Ray { u: -1e6 }, Derivative::V), Err(WaveError::OutOfDomain(_))));
    assert!(probe_null(&f, NullLocation::FinalSlice, Derivative::V).is_err());
}

#[test]
fn horizon_series_must_cover_the_block() {
    let p = rnds();
    let tail = HorizonTail::Series { t: vec![0.0, 1.0, 2.0, 3.0], u: vec![1.0, 0.9, 0.8, 0.7] };
    assert!(matches!(interior_evolve(&p, &small_interior(100), &tail), Err(WaveError::OutOfDomain(_))));
    let t: Vec<f64> = (0..=300).map(|k| -1.0 + 0.1 * k as f64).collect();
    let u: Vec<f64> = t.iter().map(|v| 0.5 + (-0.2 * v).exp()).collect();
    let f = interior_evolve(&p, &small_interior(100), &HorizonTail::Series { t, u }).unwrap();
    assert!(f.max_abs_u.is_finite());
}

#[test]
fn interior_rejects_uncharged_backgrounds() {
    let err = InteriorSolver::new(&SpacetimeParams::rnds(0.02, 1.0, 0.0), &small_interior(100)).unwrap_err();
    assert!(matches!(err, WaveError::Config(_) | WaveError::Spacetime(_)));
}

// ---------- snapshots ----------

#[test]
fn snapshots_decode_to_the_encoded_arrays() {
    let run = snapshot_run();
    let bytes = encode_mode_field(&run.field).unwrap();
    let (header, arrays) = decode(&bytes).unwrap();
    assert_eq!(header.kind, "exterior");
    assert_eq!(arrays[1], run.field.r);
    let n = run.field.r.len();
    let last = run.field.last();
    let k = run.field.snapshots.len() - 1;
    assert_eq!(&arrays[2][k * n..(k + 1) * n], &last.u[..]);
    assert!(decode(&bytes[..bytes.len() - 3]).is_err());

    let f = interior_evolve(&rnds(), &small_interior(100), &HorizonTail::Model { u0: 1.0, amplitude: 0.5, rate: None }).unwrap();
    let (header, arrays) = decode(&encode_null_field(&f).unwrap()).unwrap();
    assert_eq!(header.kind, "interior");
    assert_eq!(arrays[2], f.snapshot);
}

#[test]
fn probe_series_csv_has_one_row_per_sample() {
    let run = snapshot_run();
    let nh = run.near_horizon().unwrap();
    let csv = nh.to_csv();
    assert_eq!(csv.lines().count(), nh.t.len() + 1);
    let back = TimeSeries::from_csv(&csv, "u").unwrap();
    assert_eq!(back.u.len(), nh.u.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn constants_solve_the_interior_update(c in -3.0f64..3.0) {
        let f = interior_evolve(&rnds(), &small_interior(120), &HorizonTail::Model { u0: c, amplitude: 0.0, rate: None }).unwrap();
        prop_assert!(max_abs(f.snapshot.iter().map(|u| u - c)) <= 1e-9 * c.abs().max(1.0));
    }

    #[test]
    fn scaling_the_data_scales_the_exterior_field(a in -5.0f64..5.0) {
        let cfg = ExteriorConfig { points: 120, t_end: 3.0, probes: vec![5.0], ..Default::default() };
        let solver = ExteriorSolver::new(&rnds(), &cfg).unwrap();
        let pulse = solver.pulse();
        let one = solver.run(&|r| { let (u, du) = pulse.eval(r); [u, 0.0, du] }, None).unwrap();
        let many = solver.run(&|r| { let (u, du) = pulse.eval(r); [a * u, 0.0, a * du] }, None).unwrap();
        for (x, y) in one.probes[1].u.iter().zip(&many.probes[1].u) {
            prop_assert!((a * x - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
    }
}
