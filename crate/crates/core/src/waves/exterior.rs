//! Exterior engine: first-order reduction (u, Π = ∂_t u, Φ = ∂_r u) of P u = S on the t_*
//! foliation, second-order upwind differences per characteristic field and classical RK4.
//!
//! With A = [[2φ/e, −μ/e], [1, 0]] the principal part is ∂_t(Π, Φ) = A ∂_r(Π, Φ); since
//! φ² − μe = 1 its eigenvalues are λ± = (φ ± 1)/e with left eigenvectors (1, −λ∓).
//! A field with λ > 0 moves towards smaller r and is differenced forwards. Beyond r_2 and
//! r_3 both λ have the outflow sign, so the excision ends need no boundary condition.

use serde::{Deserialize, Serialize};

use super::operator::{mode_reduce, ModeOperator};
use super::{Pulse, WaveError};
use crate::analysis::TimeSeries;
use crate::numerics::interp::lagrange;
use crate::spacetime::{charts_from, horizon_data, Family, HorizonOptions, MetricBlock, SpacetimeParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExteriorConfig {
    pub ell: u32,
    pub mass2: f64,
    /// Radial grid points (ignored if `spacing` is set).
    pub points: usize,
    /// Fixed grid spacing; the outer end is moved down onto the grid.
    pub spacing: Option<f64>,
    pub cfl: f64,
    /// Explicit time step, checked against the CFL limit.
    pub dt: Option<f64>,
    pub t_end: f64,
    /// Half-width of the chart blend bands.
    pub chart_delta: Option<f64>,
    /// Inner end at r_2 − inner_excision (default: the chart δ).
    pub inner_excision: Option<f64>,
    /// Outer end at r_3 + outer_excision (default: the chart δ).
    pub outer_excision: Option<f64>,
    /// Explicit radial domain; an inner end at 0 selects the regular centre.
    pub domain: Option<(f64, f64)>,
    /// Initial u. Default: amplitude 1 at 35% of the domain, width 5% of it.
    pub pulse: Option<Pulse>,
    /// Initial ∂_t u (default 0).
    pub velocity: Option<Pulse>,
    pub probes: Vec<f64>,
    /// Record the probes every this many steps.
    pub sample_every: usize,
    /// Keep a full snapshot every this many steps (the final state is always kept).
    pub snapshot_every: Option<usize>,
}

impl Default for ExteriorConfig {
    fn default() -> Self {
        Self {
            ell: 0,
            mass2: 0.0,
            points: 2000,
            spacing: None,
            cfl: 0.5,
            dt: None,
            t_end: 100.0,
            chart_delta: None,
            inner_excision: None,
            outer_excision: None,
            domain: None,
            pulse: None,
            velocity: None,
            probes: Vec::new(),
            sample_every: 1,
            snapshot_every: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSnapshot {
    pub t: f64,
    pub u: Vec<f64>,
    pub pi: Vec<f64>,
    pub phi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub ell: u32,
    pub mass2: f64,
    pub scheme: String,
    pub order: u32,
    pub h: f64,
    pub dt: f64,
    pub steps: usize,
    pub cfl: f64,
    pub max_speed: f64,
    /// Points where the upwind stencil did not fit and the opposite one-sided stencil was used.
    pub inflow_points: usize,
    /// (−1)^ℓ at a regular centre.
    pub parity: Option<i32>,
    pub domain: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeField {
    pub r: Vec<f64>,
    /// In time order; the last one is the final state.
    pub snapshots: Vec<FieldSnapshot>,
    pub meta: FieldMeta,
}

impl ModeField {
    pub fn last(&self) -> &FieldSnapshot {
        self.snapshots.last().expect("a field always has its final snapshot")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSeries {
    pub r: f64,
    /// The probe at r_2 − δ_exc/2 whose series feeds the interior engine.
    pub near_horizon: bool,
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub dt_u: Vec<f64>,
    pub dr_u: Vec<f64>,
}

impl ProbeSeries {
    pub fn values(&self) -> TimeSeries {
        TimeSeries { t: self.t.clone(), u: self.u.clone() }
    }

    pub fn time_derivative(&self) -> TimeSeries {
        TimeSeries { t: self.t.clone(), u: self.dt_u.clone() }
    }

    pub fn radial_derivative(&self) -> TimeSeries {
        TimeSeries { t: self.t.clone(), u: self.dr_u.clone() }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,u,dt_u,dr_u\n");
        for k in 0..self.t.len() {
            out.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e}\n", self.t[k], self.u[k], self.dt_u[k], self.dr_u[k]));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExteriorRun {
    pub field: ModeField,
    pub probes: Vec<ProbeSeries>,
}

impl ExteriorRun {
    pub fn near_horizon(&self) -> Option<&ProbeSeries> {
        self.probes.iter().find(|p| p.near_horizon)
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    lam_p: f64,
    lam_m: f64,
    /// λ±/(λ± − λ∓)
    w_p: f64,
    w_m: f64,
    fwd_p: bool,
    fwd_m: bool,
    inv_e: f64,
    a_pi: f64,
    a_phi: f64,
    pot: f64,
}

/// A prepared grid with frozen coefficients.
#[derive(Debug, Clone)]
pub struct ExteriorSolver {
    cfg: ExteriorConfig,
    r: Vec<f64>,
    h: f64,
    dt: f64,
    steps: usize,
    nodes: Vec<Node>,
    parity: Option<f64>,
    max_speed: f64,
    inflow_points: usize,
    probes: Vec<(f64, bool)>,
    pulse: Pulse,
    op: ModeOperator,
}

type Source<'a> = &'a (dyn Fn(f64, f64) -> f64 + Sync);

pub fn exterior_evolve(params: &SpacetimeParams, cfg: &ExteriorConfig) -> Result<ExteriorRun, WaveError> {
    let solver = ExteriorSolver::new(params, cfg)?;
    let (pulse, velocity) = (solver.pulse, cfg.velocity);
    solver.run(
        &|r| {
            let (u, du) = pulse.eval(r);
            [u, velocity.map_or(0.0, |v| v.eval(r).0), du]
        },
        None,
    )
}

impl ExteriorSolver {
    pub fn new(params: &SpacetimeParams, cfg: &ExteriorConfig) -> Result<Self, WaveError> {
        if !(cfg.cfl > 0.0 && cfg.cfl <= 1.0) {
            return Err(WaveError::Config(format!("cfl must lie in (0, 1], got {}", cfg.cfl)));
        }
        if !(cfg.t_end > 0.0) || cfg.sample_every == 0 || cfg.snapshot_every == Some(0) {
            return Err(WaveError::Config("t_end, sample_every and snapshot_every must be positive".into()));
        }
        if params.family == Family::Kds {
            return Err(WaveError::Config("the mode reduction needs a spherically symmetric background".into()));
        }
        let horizons = horizon_data(params, &HorizonOptions::default())?;
        let r2 = horizons.radius(2);
        let r3 = horizons.radius(3).ok_or_else(|| WaveError::Config("the exterior engine needs a cosmological horizon".into()))?;
        // The inner horizon plays no part outside r_2, so it does not constrain δ.
        let charts = charts_from(params, if r2.is_some() { &[2, 3] } else { &[3] }, cfg.chart_delta)?;
        let op = mode_reduce(params, &charts, cfg.ell, cfg.mass2)?;
        let d_in = cfg.inner_excision.unwrap_or(charts.delta);
        let d_out = cfg.outer_excision.unwrap_or(charts.delta);
        if !(d_in > 0.0 && d_out > 0.0) {
            return Err(WaveError::Config("excision widths must be positive".into()));
        }
        let (lo, hi) = match (cfg.domain, r2) {
            (Some(d), _) => d,
            (None, Some(r2)) => (r2 - d_in, r3 + d_out),
            (None, None) => (0.0, r3 + d_out),
        };
        if !(lo >= 0.0 && hi > lo) {
            return Err(WaveError::Config(format!("bad domain ({lo}, {hi})")));
        }
        let centred = lo == 0.0;
        let (r, h) = if centred {
            let (n, h) = match cfg.spacing {
                Some(h) => ((hi / h).floor() as usize, h),
                None => (cfg.points, hi / cfg.points as f64),
            };
            ((0..n).map(|i| (i as f64 + 0.5) * h).collect::<Vec<f64>>(), h)
        } else {
            let (n, h) = match cfg.spacing {
                Some(h) => (((hi - lo) / h + 1e-9).floor() as usize + 1, h),
                None => (cfg.points, (hi - lo) / (cfg.points - 1) as f64),
            };
            ((0..n).map(|i| lo + i as f64 * h).collect::<Vec<f64>>(), h)
        };
        let n = r.len();
        if n < 8 || !(h > 0.0) {
            return Err(WaveError::Config(format!("{n} grid points are too few")));
        }
        let parity = centred.then(|| if cfg.ell.is_multiple_of(2) { 1.0 } else { -1.0 });

        let mut nodes = Vec::with_capacity(n);
        let mut max_speed: f64 = 0.0;
        let mut inflow_points = 0;
        for (i, &ri) in r.iter().enumerate() {
            let p = charts.block(ri);
            if !(-p.e > 0.0) {
                return Err(WaveError::Causality { r: ri, norm: -p.e });
            }
            let c = op.coefficients(ri)?;
            let (lam_p, lam_m) = ((p.phi + 1.0) / p.e, (p.phi - 1.0) / p.e);
            max_speed = max_speed.max(lam_p.abs()).max(lam_m.abs());
            let can_fwd = i + 2 < n;
            let can_bwd = i >= 2 || parity.is_some();
            let mut pick = |lam: f64| {
                let want = lam > 0.0;
                let ok = if want { can_fwd } else { can_bwd };
                if !ok && lam != 0.0 {
                    inflow_points += 1;
                }
                if ok { want } else { !want }
            };
            let fwd_p = pick(lam_p);
            let fwd_m = pick(lam_m);
            let gap = lam_p - lam_m;
            nodes.push(Node {
                lam_p,
                lam_m,
                w_p: lam_p / gap,
                w_m: -lam_m / gap,
                fwd_p,
                fwd_m,
                inv_e: 1.0 / p.e,
                a_pi: c.t,
                a_phi: c.r,
                pot: c.zero,
            });
        }
        let limit = cfg.cfl * h / max_speed;
        let (dt, steps) = match cfg.dt {
            Some(dt) if dt > limit => return Err(WaveError::Cfl { dt, limit }),
            Some(dt) if dt > 0.0 => (dt, (cfg.t_end / dt).round().max(1.0) as usize),
            Some(dt) => return Err(WaveError::Config(format!("dt must be positive, got {dt}"))),
            None => {
                let steps = (cfg.t_end / limit).ceil() as usize;
                (cfg.t_end / steps as f64, steps)
            }
        };

        let mut probes = Vec::new();
        let inside = |x: f64| x >= r[0] && x <= r[n - 1];
        if let Some(r2) = r2 {
            let x = r2 - 0.5 * d_in;
            if inside(x) {
                probes.push((x, true));
            }
        }
        for &x in &cfg.probes {
            if !inside(x) {
                return Err(WaveError::OutOfDomain(format!("probe radius {x} outside [{}, {}]", r[0], r[n - 1])));
            }
            probes.push((x, false));
        }
        let span = r[n - 1] - r[0];
        let pulse = cfg.pulse.unwrap_or(Pulse { amplitude: 1.0, center: r[0] + 0.35 * span, width: 0.05 * span });
        pulse.validate()?;
        if let Some(v) = cfg.velocity {
            v.validate()?;
        }
        Ok(Self { cfg: cfg.clone(), r, h, dt, steps, nodes, parity, max_speed, inflow_points, probes, pulse, op })
    }

    /// The mode operator on the solver's charts.
    pub fn operator(&self) -> &ModeOperator {
        &self.op
    }

    pub fn grid(&self) -> &[f64] {
        &self.r
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn pulse(&self) -> Pulse {
        self.pulse
    }

    /// Evolves data [u, ∂_t u, ∂_r u](r) under P u = S(t, r).
    pub fn run(&self, initial: &dyn Fn(f64) -> [f64; 3], source: Option<Source>) -> Result<ExteriorRun, WaveError> {
        let n = self.r.len();
        let mut y = vec![0.0; 3 * n];
        for (i, &ri) in self.r.iter().enumerate() {
            let d = initial(ri);
            y[i] = d[0];
            y[n + i] = d[1];
            y[2 * n + i] = d[2];
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(WaveError::NonFinite(0.0));
        }
        let mut probes: Vec<ProbeSeries> = self
            .probes
            .iter()
            .map(|&(r, near_horizon)| ProbeSeries { r, near_horizon, t: vec![], u: vec![], dt_u: vec![], dr_u: vec![] })
            .collect();
        let mut snapshots = Vec::new();
        let snapshot = |t: f64, y: &[f64]| FieldSnapshot { t, u: y[..n].to_vec(), pi: y[n..2 * n].to_vec(), phi: y[2 * n..].to_vec() };
        self.record(&mut probes, 0.0, &y);
        if self.cfg.snapshot_every.is_some() {
            snapshots.push(snapshot(0.0, &y));
        }

        let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; 3 * n], vec![0.0; 3 * n], vec![0.0; 3 * n], vec![0.0; 3 * n]);
        let mut tmp = vec![0.0; 3 * n];
        let dt = self.dt;
        for step in 0..self.steps {
            let t = step as f64 * dt;
            self.rhs(t, &y, &mut k1, source);
            axpy(&mut tmp, &y, 0.5 * dt, &k1);
            self.rhs(t + 0.5 * dt, &tmp, &mut k2, source);
            axpy(&mut tmp, &y, 0.5 * dt, &k2);
            self.rhs(t + 0.5 * dt, &tmp, &mut k3, source);
            axpy(&mut tmp, &y, dt, &k3);
            self.rhs(t + dt, &tmp, &mut k4, source);
            for i in 0..3 * n {
                y[i] += dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
            }
            let t = (step + 1) as f64 * dt;
            if y.iter().any(|v| !v.is_finite()) {
                return Err(WaveError::NonFinite(t));
            }
            if (step + 1) % self.cfg.sample_every == 0 {
                self.record(&mut probes, t, &y);
            }
            if let Some(every) = self.cfg.snapshot_every {
                if (step + 1) % every == 0 && step + 1 != self.steps {
                    snapshots.push(snapshot(t, &y));
                }
            }
        }
        let t_final = self.steps as f64 * dt;
        snapshots.push(snapshot(t_final, &y));

        let meta = FieldMeta {
            ell: self.cfg.ell,
            mass2: self.cfg.mass2,
            scheme: "upwind2-rk4".into(),
            order: 2,
            h: self.h,
            dt,
            steps: self.steps,
            cfl: dt * self.max_speed / self.h,
            max_speed: self.max_speed,
            inflow_points: self.inflow_points,
            parity: self.parity.map(|p| p as i32),
            domain: (self.r[0], self.r[n - 1]),
        };
        Ok(ExteriorRun { field: ModeField { r: self.r.clone(), snapshots, meta }, probes })
    }

    fn record(&self, probes: &mut [ProbeSeries], t: f64, y: &[f64]) {
        let n = self.r.len();
        for p in probes.iter_mut() {
            let at = |a: &[f64]| lagrange(&self.r, a, p.r, 3).unwrap_or(f64::NAN);
            p.t.push(t);
            p.u.push(at(&y[..n]));
            p.dt_u.push(at(&y[n..2 * n]));
            p.dr_u.push(at(&y[2 * n..]));
        }
    }

    fn rhs(&self, t: f64, y: &[f64], out: &mut [f64], source: Option<Source>) {
        let n = self.r.len();
        let (u, pi, phi) = (&y[..n], &y[n..2 * n], &y[2 * n..]);
        let par = self.parity.unwrap_or(0.0);
        let at = |a: &[f64], j: isize, sign: f64| if j < 0 { sign * a[(-j - 1) as usize] } else { a[j as usize] };
        let inv2h = 0.5 / self.h;
        let diff = |a: &[f64], i: usize, fwd: bool, sign: f64| {
            let i = i as isize;
            if fwd {
                (-3.0 * a[i as usize] + 4.0 * a[(i + 1) as usize] - a[(i + 2) as usize]) * inv2h
            } else {
                (3.0 * a[i as usize] - 4.0 * at(a, i - 1, sign) + at(a, i - 2, sign)) * inv2h
            }
        };
        for (i, c) in self.nodes.iter().enumerate() {
            let (dpi_p, dphi_p) = (diff(pi, i, c.fwd_p, par), diff(phi, i, c.fwd_p, -par));
            let (dpi_m, dphi_m) = if c.fwd_m == c.fwd_p { (dpi_p, dphi_p) } else { (diff(pi, i, c.fwd_m, par), diff(phi, i, c.fwd_m, -par)) };
            let cp = dpi_p - c.lam_m * dphi_p;
            let cm = dpi_m - c.lam_p * dphi_m;
            let s = source.map_or(0.0, |f| f(t, self.r[i]));
            out[i] = pi[i];
            out[n + i] = c.lam_p * c.w_p * cp
                + c.lam_m * c.w_m * cm
                + c.inv_e * (c.a_pi * pi[i] + c.a_phi * phi[i] + c.pot * u[i] - s);
            out[2 * n + i] = c.w_p * cp + c.w_m * cm;
        }
    }
}

fn axpy(out: &mut [f64], y: &[f64], a: f64, k: &[f64]) {
    for i in 0..out.len() {
        out[i] = y[i] + a * k[i];
    }
}
