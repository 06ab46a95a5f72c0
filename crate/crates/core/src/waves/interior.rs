//! Double-null engine for r_1 < r < r_2.
//!
//! Null coordinates u, v both increase to the future and r* = (u + v)/2 with dr/dr* = μ,
//! so ∂_u r = ∂_v r = μ/2 < 0. With ψ = r u_ℓ the mode equation is 4∂_u∂_vψ = V_ℓψ,
//! V_ℓ = μ(ℓ(ℓ+1)/r² + μ'/r + m²). The grid is uniform with Δu = Δv = h, so every node lies
//! on the lattice r* = k h/2 and r is tabulated once per lattice index.

use serde::{Deserialize, Serialize};

use super::{Pulse, WaveError};
use crate::numerics::interp::MonotoneCubic;
use crate::spacetime::{horizon_data, mu, Family, HorizonOptions, SpacetimeParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InteriorConfig {
    pub ell: u32,
    pub mass2: f64,
    /// Diamonds along v; h = v_span / cells_v.
    pub cells_v: usize,
    pub v0: f64,
    pub v_span: f64,
    /// The initial outgoing ray is placed where r_2 − r ≤ tol·(r_2 − r_1) up to the last v,
    /// and the last ray where r − r_1 ≤ tol·(r_2 − r_1) from v0 on.
    pub horizon_tolerance: f64,
    /// Extra u beyond the point where the last ray reaches the Cauchy-horizon tolerance.
    pub u_margin: f64,
    /// Explicit (u_first, u_last), overriding the placement above.
    pub u_range: Option<(f64, f64)>,
    /// Added to the data on the transversal segment v = v0, as a function of u.
    pub pulse: Option<Pulse>,
    /// Outgoing rays u = const recorded at full resolution (the last ray always is).
    pub rays: Vec<f64>,
    /// Upper bound on the snapshot lattice per direction.
    pub snapshot_cells: usize,
    /// RK4 substeps per lattice step of the r(r*) table; default from κ_1.
    pub substeps: Option<usize>,
}

impl Default for InteriorConfig {
    fn default() -> Self {
        Self {
            ell: 0,
            mass2: 0.0,
            cells_v: 2000,
            v0: 0.0,
            v_span: 40.0,
            horizon_tolerance: 1e-12,
            u_margin: 1.0,
            u_range: None,
            pulse: None,
            rays: Vec::new(),
            snapshot_cells: 400,
            substeps: None,
        }
    }
}

/// Data on the event-horizon segment, as u_ℓ(v).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HorizonTail {
    /// u0 + A e^{−rate v}, rate defaulting to κ_2.
    Model { u0: f64, amplitude: f64, rate: Option<f64> },
    /// A recorded series with t read as v, resampled by monotone cubic interpolation.
    Series { t: Vec<f64>, u: Vec<f64> },
}

/// Lattice r(r*) and the grid placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteriorGeometry {
    pub r1: f64,
    pub r2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub h: f64,
    pub u0: f64,
    pub v0: f64,
    pub nu: usize,
    pub nv: usize,
    /// Lattice index of the node (u0, v0); node (i, j) has index k0 + i + j.
    pub k0: i64,
    /// Per lattice index from k0 to k0 + nu + nv + 1.
    pub r: Vec<f64>,
    pub ln_r_minus_r1: Vec<f64>,
    pub mu: Vec<f64>,
    pub potential: Vec<f64>,
}

impl InteriorGeometry {
    pub fn u(&self, i: usize) -> f64 {
        self.u0 + i as f64 * self.h
    }

    pub fn v(&self, j: usize) -> f64 {
        self.v0 + j as f64 * self.h
    }

    pub fn rstar(&self, slot: usize) -> f64 {
        (self.k0 + slot as i64) as f64 * 0.5 * self.h
    }

    /// Table slot of node (i, j).
    pub fn slot(&self, i: usize, j: usize) -> usize {
        i + j
    }

    /// V = −e^{−κ_1 v}/κ_1 as ln|V|.
    pub fn ln_abs_big_v(&self, v: f64) -> f64 {
        -self.kappa1 * v - self.kappa1.ln()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullRay {
    pub u: f64,
    pub index: usize,
    pub psi: Vec<f64>,
    /// u_ℓ = ψ/r at v_j.
    pub value: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullBlockField {
    pub ell: u32,
    pub mass2: f64,
    pub geometry: InteriorGeometry,
    pub rays: Vec<NullRay>,
    /// u_ℓ on the last slice v = v0 + nv h, per u index.
    pub final_slice: Vec<f64>,
    /// u_ℓ on a coarse lattice: rows `snapshot_rows`, columns `snapshot_cols` (node indices).
    pub snapshot_rows: Vec<usize>,
    pub snapshot_cols: Vec<usize>,
    pub snapshot: Vec<f64>,
    pub max_abs_u: f64,
    /// Set when the field stopped being finite; the u index of the failing row.
    pub overflow: Option<usize>,
}

impl NullBlockField {
    pub fn last_ray(&self) -> &NullRay {
        self.rays.iter().max_by_key(|r| r.index).expect("the last ray is always recorded")
    }

    pub fn ray_near(&self, u: f64) -> Option<&NullRay> {
        self.rays.iter().min_by(|a, b| (a.u - u).abs().total_cmp(&(b.u - u).abs()))
    }
}

/// A prepared block: r table, potential and grid.
#[derive(Debug, Clone)]
pub struct InteriorSolver {
    cfg: InteriorConfig,
    geometry: InteriorGeometry,
}

type Source<'a> = &'a dyn Fn(f64, f64) -> f64;

pub fn interior_evolve(params: &SpacetimeParams, cfg: &InteriorConfig, tail: &HorizonTail) -> Result<NullBlockField, WaveError> {
    let solver = InteriorSolver::new(params, cfg)?;
    let g = solver.geometry();
    let eh: Box<dyn Fn(f64) -> f64> = match tail {
        HorizonTail::Model { u0, amplitude, rate } => {
            let (u0, a, k) = (*u0, *amplitude, rate.unwrap_or(g.kappa2));
            Box::new(move |v| u0 + a * (-k * v).exp())
        }
        HorizonTail::Series { t, u } => {
            let spline = MonotoneCubic::new(t.clone(), u.clone())
                .ok_or_else(|| WaveError::Config("horizon series needs increasing abscissae".into()))?;
            let (lo, hi) = spline.domain();
            let (v_lo, v_hi) = (g.v(0), g.v(g.nv));
            if v_lo < lo || v_hi > hi {
                return Err(WaveError::OutOfDomain(format!("v ∈ [{v_lo}, {v_hi}] not covered by the series on [{lo}, {hi}]")));
            }
            Box::new(move |v| spline.eval(v).map_or(f64::NAN, |p| p.0))
        }
    };
    let corner = eh(g.v(0));
    let pulse = cfg.pulse;
    solver.run(&*eh, &|u| corner + pulse.map_or(0.0, |p| p.eval(u).0), None)
}

/// RK4 integration of ln(r − r_1) (towards r_1) or ln(r_2 − r) (towards r_2) on the lattice.
struct Side {
    forward: bool,
    step: f64,
    substeps: usize,
    ys: Vec<f64>,
}

struct Background {
    r1: f64,
    r2: f64,
    /// r²μ = −q(r)(r − r_1)(r_2 − r)
    lambda3: f64,
    r3: Option<f64>,
}

impl Background {
    fn q(&self, r: f64) -> f64 {
        match self.r3 {
            Some(r3) => {
                let rn = -(self.r1 + self.r2 + r3);
                -self.lambda3 * (r - rn) * (r - r3)
            }
            None => 1.0,
        }
    }

    /// (r, r − r_1, r_2 − r) from the side variable.
    fn point(&self, forward: bool, y: f64) -> (f64, f64, f64) {
        let gap = self.r2 - self.r1;
        let d = y.exp();
        if forward {
            (self.r1 + d, d, gap - d)
        } else {
            (self.r2 - d, gap - d, d)
        }
    }

    fn slope(&self, forward: bool, y: f64) -> f64 {
        let (r, d1, d2) = self.point(forward, y);
        // d/dr* ln(r − r_1) = μ/(r − r_1); the backward side runs towards −r*.
        if forward {
            -self.q(r) * d2 / (r * r)
        } else {
            -self.q(r) * d1 / (r * r)
        }
    }

    fn mu(&self, r: f64, d1: f64, d2: f64) -> f64 {
        -self.q(r) * d1 * d2 / (r * r)
    }
}

impl Side {
    fn extend(&mut self, bg: &Background, len: usize) -> Result<(), WaveError> {
        let dir = if self.forward { 1.0 } else { -1.0 };
        let hs = self.step / self.substeps as f64;
        while self.ys.len() < len {
            let mut y = *self.ys.last().expect("seeded");
            for _ in 0..self.substeps {
                let k1 = bg.slope(self.forward, y);
                let k2 = bg.slope(self.forward, y + 0.5 * hs * k1);
                let k3 = bg.slope(self.forward, y + 0.5 * hs * k2);
                let k4 = bg.slope(self.forward, y + hs * k3);
                y += hs / 6.0 * (k1 + 2.0 * (k2 + k3) + k4);
            }
            if !y.is_finite() || y >= (bg.r2 - bg.r1).ln() {
                return Err(WaveError::BlockBreach(dir * self.ys.len() as f64 * self.step));
            }
            self.ys.push(y);
        }
        Ok(())
    }

    /// First lattice distance at which `pred` holds.
    fn find(&mut self, bg: &Background, pred: impl Fn(f64) -> bool) -> Result<usize, WaveError> {
        let mut k = 0;
        loop {
            if k >= self.ys.len() {
                if k > 50_000_000 {
                    return Err(WaveError::Config("horizon tolerance not reached".into()));
                }
                self.extend(bg, k + 1024)?;
            }
            if pred(self.ys[k]) {
                return Ok(k);
            }
            k += 1;
        }
    }
}

impl InteriorSolver {
    pub fn new(params: &SpacetimeParams, cfg: &InteriorConfig) -> Result<Self, WaveError> {
        if !matches!(params.family, Family::Rnds | Family::RnFlat) {
            return Err(WaveError::Config(format!("the interior engine needs a charged black hole, not {}", params.family.name())));
        }
        if cfg.cells_v < 2 || !(cfg.v_span > 0.0) || !(cfg.horizon_tolerance > 0.0 && cfg.horizon_tolerance < 1e-2) {
            return Err(WaveError::Config("cells_v ≥ 2, v_span > 0 and 0 < horizon_tolerance < 1e−2 are required".into()));
        }
        if !(cfg.mass2 >= 0.0) || cfg.snapshot_cells == 0 {
            return Err(WaveError::Config("m² ≥ 0 and snapshot_cells ≥ 1 are required".into()));
        }
        if let Some(p) = cfg.pulse {
            p.validate()?;
        }
        let hd = horizon_data(params, &HorizonOptions::default())?;
        let (r1, r2) = match (hd.radius(1), hd.radius(2)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(WaveError::Config("no Cauchy horizon".into())),
        };
        let (kappa1, kappa2) = (hd.kappa(1).unwrap_or(f64::NAN), hd.kappa(2).unwrap_or(f64::NAN));
        let bg = Background { r1, r2, lambda3: params.lambda / 3.0, r3: hd.radius(3) };
        let r_mid = 0.5 * (r1 + r2);
        let exact = mu(params, r_mid)?.value;
        let factored = bg.mu(r_mid, r_mid - r1, r2 - r_mid);
        if (exact - factored).abs() > 1e-10 * exact.abs().max(1.0) {
            return Err(WaveError::Config(format!("factored μ {factored} disagrees with {exact}")));
        }

        let h = cfg.v_span / cfg.cells_v as f64;
        let step = 0.5 * h;
        let substeps = cfg.substeps.unwrap_or_else(|| ((step * 3.0 * kappa1.max(kappa2)) / 0.01).ceil().max(1.0) as usize);
        let y_mid = (0.5 * (r2 - r1)).ln();
        let mut fwd = Side { forward: true, step, substeps, ys: vec![y_mid] };
        let mut bwd = Side { forward: false, step, substeps, ys: vec![y_mid] };

        let nv = cfg.cells_v;
        let v0 = (cfg.v0 / h).round() * h;
        let (k0, nu) = match cfg.u_range {
            Some((a, b)) => {
                if !(b > a) {
                    return Err(WaveError::Config(format!("bad u range ({a}, {b})")));
                }
                (((a + v0) / h).round() as i64, ((b - a) / h).round().max(1.0) as usize)
            }
            None => {
                let ln_tol = (cfg.horizon_tolerance * (r2 - r1)).ln();
                let k_eh = -(bwd.find(&bg, |y| y <= ln_tol)? as i64);
                let k_ch = fwd.find(&bg, |y| y <= ln_tol)? as i64;
                let k0 = k_eh - nv as i64;
                let k_last = k_ch + (cfg.u_margin.max(0.0) / h).ceil() as i64;
                (k0, (k_last - k0).max(1) as usize)
            }
        };
        let u0 = k0 as f64 * h - v0;
        let k_end = k0 + (nu + nv) as i64 + 1;
        if k_end > 0 {
            fwd.extend(&bg, k_end as usize + 1)?;
        }
        if k0 < 0 {
            bwd.extend(&bg, (-k0) as usize + 1)?;
        }

        let l = f64::from(cfg.ell);
        let slots = (k_end - k0 + 1) as usize;
        let (mut rs, mut ln_d1, mut mus, mut pots) = (Vec::with_capacity(slots), Vec::with_capacity(slots), Vec::with_capacity(slots), Vec::with_capacity(slots));
        let (mut d1s, mut d2s) = (Vec::with_capacity(slots), Vec::with_capacity(slots));
        for k in k0..=k_end {
            let (forward, y) = if k >= 0 { (true, fwd.ys[k as usize]) } else { (false, bwd.ys[(-k) as usize]) };
            let (r, d1, d2) = bg.point(forward, y);
            let m = bg.mu(r, d1, d2);
            let dmu = mu(params, r)?.d1;
            rs.push(r);
            d1s.push(d1);
            d2s.push(d2);
            ln_d1.push(if forward { y } else { d1.ln() });
            mus.push(m);
            pots.push(m * (l * (l + 1.0) / (r * r) + dmu / r + cfg.mass2));
        }
        // μμ'/r = ∂²_{r*} r / r: replacing it by the lattice second difference makes ψ = c r an
        // exact solution of the update, so the ℓ = 0 constant does not drift along the Cauchy
        // horizon. Differences are taken in r − r_1 or r_2 − r, whichever is small.
        let scale = 4.0 / (h * h);
        for s in 1..slots - 1 {
            let second = if d1s[s] <= d2s[s] {
                d1s[s - 1] - 2.0 * d1s[s] + d1s[s + 1]
            } else {
                -(d2s[s - 1] - 2.0 * d2s[s] + d2s[s + 1])
            };
            pots[s] = scale * second / rs[s] + mus[s] * (l * (l + 1.0) / (rs[s] * rs[s]) + cfg.mass2);
        }
        let geometry = InteriorGeometry { r1, r2, kappa1, kappa2, h, u0, v0, nu, nv, k0, r: rs, ln_r_minus_r1: ln_d1, mu: mus, potential: pots };
        Ok(Self { cfg: cfg.clone(), geometry })
    }

    pub fn geometry(&self) -> &InteriorGeometry {
        &self.geometry
    }

    /// Sweeps the block from u_ℓ data on the event-horizon segment (function of v) and the
    /// transversal segment (function of u), with an optional source 4∂_u∂_vψ − Vψ = S(u, v).
    pub fn run(&self, eh: &dyn Fn(f64) -> f64, transversal: &dyn Fn(f64) -> f64, source: Option<Source>) -> Result<NullBlockField, WaveError> {
        let g = &self.geometry;
        let (nu, nv, h) = (g.nu, g.nv, g.h);
        let stride = nu.max(nv).div_ceil(self.cfg.snapshot_cells).max(1);
        let mut snapshot_rows: Vec<usize> = (0..=nu).step_by(stride).collect();
        if snapshot_rows.last() != Some(&nu) {
            snapshot_rows.push(nu);
        }
        let mut snapshot_cols: Vec<usize> = (0..=nv).step_by(stride).collect();
        if snapshot_cols.last() != Some(&nv) {
            snapshot_cols.push(nv);
        }
        let mut ray_rows: Vec<usize> = self
            .cfg
            .rays
            .iter()
            .map(|&u| (((u - g.u0) / h).round().max(0.0) as usize).min(nu))
            .chain(std::iter::once(nu))
            .collect();
        ray_rows.sort_unstable();
        ray_rows.dedup();

        let mut old: Vec<f64> = (0..=nv).map(|j| g.r[j] * eh(g.v(j))).collect();
        let mut new = vec![0.0; nv + 1];
        let mut rays = Vec::new();
        let mut final_slice = Vec::with_capacity(nu + 1);
        let mut snapshot = Vec::with_capacity(snapshot_rows.len() * snapshot_cols.len());
        let mut max_abs_u: f64 = 0.0;
        let mut overflow = None;
        let w = h * h / 8.0;
        let ws = h * h / 4.0;
        let mut next_snapshot = 0;

        let mut finish_row = |i: usize, row: &[f64], max_abs_u: &mut f64| -> bool {
            let mut finite = true;
            for (j, psi) in row.iter().enumerate() {
                let v = psi / g.r[i + j];
                finite &= v.is_finite();
                *max_abs_u = max_abs_u.max(v.abs());
            }
            final_slice.push(row[nv] / g.r[i + nv]);
            if ray_rows.binary_search(&i).is_ok() {
                let value = row.iter().enumerate().map(|(j, p)| p / g.r[i + j]).collect();
                rays.push(NullRay { u: g.u(i), index: i, psi: row.to_vec(), value });
            }
            if snapshot_rows.get(next_snapshot) == Some(&i) {
                snapshot.extend(snapshot_cols.iter().map(|&j| row[j] / g.r[i + j]));
                next_snapshot += 1;
            }
            finite
        };

        if !finish_row(0, &old, &mut max_abs_u) {
            return Err(WaveError::NonFinite(g.u(0)));
        }
        for i in 0..nu {
            new[0] = g.r[i + 1] * transversal(g.u(i + 1));
            let uc = g.u(i) + 0.5 * h;
            for j in 0..nv {
                let slot = i + j + 1;
                let (west, east) = (new[j], old[j + 1]);
                let mut north = west + east - old[j] + w * g.potential[slot] * (west + east);
                if let Some(s) = source {
                    north += ws * s(uc, g.v(j) + 0.5 * h);
                }
                new[j + 1] = north;
            }
            std::mem::swap(&mut old, &mut new);
            if !finish_row(i + 1, &old, &mut max_abs_u) {
                overflow = Some(i + 1);
                break;
            }
        }
        if overflow.is_some() {
            snapshot_rows.truncate(next_snapshot);
        }
        Ok(NullBlockField {
            ell: self.cfg.ell,
            mass2: self.cfg.mass2,
            geometry: g.clone(),
            rays,
            final_slice,
            snapshot_rows,
            snapshot_cols,
            snapshot,
            max_abs_u,
            overflow,
        })
    }
}
