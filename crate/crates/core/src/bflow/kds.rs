//! Kerr–de Sitter null flow in the t₀ chart of one horizon.
//!
//! Writing the covector as σ dτ₀/τ₀ + ξ dr + ζ dφ + η dθ,
//!
//! ```text
//! ρ²G = −μ̃ξ² + 2as(1+γ)ξζ − 2s(1+γ)(r²+a²)ξσ − p_C,
//! p_C = (1+γ)²(a sin²θ σ − ζ)²/(κ sin²θ) + κη²,   κ = 1 + γcos²θ.
//! ```
//!
//! Near the poles the angular part is rewritten in y = sinθ cosφ, z = sinθ sinφ
//! with momenta (λ, ν), where every term is polynomial in (y, z, λ, ν).

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use super::rnds::drift_against_peak;
use super::{FlowError, FlowOptions, Terminal};
use crate::numerics::dual::{Dual, Scalar};
use crate::numerics::roots::bisect;
use crate::numerics::ode::{integrate as ode_integrate, Control, OdeError};
use crate::spacetime::{find_horizons, Family, HorizonOptions, SpacetimeParams};

const ENTER_POLAR: f64 = 0.1;
const LEAVE_POLAR: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KdsPoint {
    pub tau0: f64,
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
    pub sigma: f64,
    pub xi: f64,
    pub eta: f64,
    pub zeta: f64,
}

impl KdsPoint {
    pub fn fiber_norm(&self) -> f64 {
        (self.sigma.powi(2) + self.xi.powi(2) + self.eta.powi(2) + self.zeta.powi(2)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KdsSample {
    pub s: f64,
    pub point: KdsPoint,
    /// ln k, where the current covector is k times the initial-normalization covector.
    pub log_scale: f64,
    /// ρ²G in the current normalization.
    pub g: f64,
    pub carter: f64,
    pub polar: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdsTrajectory {
    pub samples: Vec<KdsSample>,
    pub terminal: Terminal,
    pub chart_switches: usize,
}

impl KdsTrajectory {
    /// max |ρ²G(s) − ρ²G(0)k(s)²| over the largest fiber norm² reached up to s.
    pub fn max_g_drift(&self) -> f64 {
        drift_against_peak(self.samples.iter().map(|x| (x.g, x.log_scale, x.point.fiber_norm())))
    }

    /// max |p_C(s) − p_C(0)| / |p_C(0)| in the initial normalization.
    pub fn max_carter_drift(&self) -> f64 {
        let c0 = self.samples[0].carter;
        self.samples
            .iter()
            .map(|x| (unscale(x.carter, -2.0 * x.log_scale) - c0).abs() / c0.abs())
            .fold(0.0, f64::max)
    }

    /// Same as `max_carter_drift` but against the running peak fiber norm², which stays
    /// meaningful when p_C/|ζ|² decays along the approach to a radial set.
    pub fn max_carter_drift_against_peak(&self) -> f64 {
        drift_against_peak(self.samples.iter().map(|x| (x.carter, x.log_scale, x.point.fiber_norm())))
    }

    /// max |ζ(s) − ζ(0)| relative to the initial fiber norm.
    pub fn max_zeta_drift(&self) -> f64 {
        let z0 = self.samples[0].point.zeta;
        let n0 = self.samples[0].point.fiber_norm();
        self.samples.iter().map(|x| (unscale(x.point.zeta, -x.log_scale) - z0).abs() / n0).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct KdsFlow {
    pub params: SpacetimeParams,
    /// s_j of the horizon whose t₀ chart is used.
    pub sign: f64,
    lam: f64,
    a: f64,
    m: f64,
    gamma: f64,
}

impl KdsFlow {
    pub fn new(params: &SpacetimeParams, horizon: u8) -> Result<Self, FlowError> {
        if params.family != Family::Kds {
            return Err(FlowError::OutsideChart(format!("{} is not KdS", params.family.name())));
        }
        let h = find_horizons(params, &HorizonOptions::default())?;
        let root = h
            .root(horizon)
            .ok_or_else(|| FlowError::OutsideChart(format!("no horizon with index {horizon}")))?;
        Ok(Self {
            params: *params,
            sign: root.sign(),
            lam: params.lambda_reduced(),
            a: params.spin,
            m: params.mass,
            gamma: params.gamma(),
        })
    }

    fn radial<T: Scalar>(&self, r: T, sigma: T, xi: T, zeta: T) -> T {
        let a = self.a;
        let g1 = 1.0 + self.gamma;
        let r2 = r * r;
        let mu = (r2 + a * a) * (T::cst(1.0) - r2 * self.lam) - r * (2.0 * self.m);
        -(mu * xi * xi) + xi * zeta * (2.0 * a * self.sign * g1) - (r2 + a * a) * xi * sigma * (2.0 * self.sign * g1)
    }

    fn carter_sph<T: Scalar>(&self, theta: T, sigma: T, eta: T, zeta: T) -> T {
        let g1 = 1.0 + self.gamma;
        let s2 = theta.sin().sq();
        let kappa = theta.cos().sq() * self.gamma + 1.0;
        (s2 * sigma * self.a - zeta).sq() * (g1 * g1) / (kappa * s2) + kappa * eta * eta
    }

    fn carter_pol<T: Scalar>(&self, y: T, z: T, sigma: T, lam: T, nu: T) -> T {
        let (g, a) = (self.gamma, self.a);
        let g1 = 1.0 + g;
        let s = y * y + z * z;
        let c2 = T::cst(1.0) - s;
        let kappa = c2 * g + 1.0;
        let zeta = nu * y - lam * z;
        let q = lam * y + nu * z;
        let tilde = (lam * lam + nu * nu - q * q) * (g1 * g1) - (c2 * g + (2.0 + g)) * c2 * q * q * g;
        ((s * sigma * sigma * (a * a) - sigma * zeta * (2.0 * a)) * (g1 * g1) + tilde) / kappa
    }

    pub fn carter(&self, p: &KdsPoint) -> f64 {
        if p.theta.sin().abs() < ENTER_POLAR {
            let y = to_polar(p, p.theta.cos() > 0.0);
            self.carter_pol(y[2], y[3], y[4], y[6], y[7])
        } else {
            self.carter_sph(p.theta, p.sigma, p.eta, p.zeta)
        }
    }

    /// ρ²G.
    pub fn dual_metric(&self, p: &KdsPoint) -> f64 {
        self.radial(p.r, p.sigma, p.xi, p.zeta) - self.carter(p)
    }

    /// Hamilton field of ρ²G on [τ₀, r, θ, φ, σ, ξ, η, ζ].
    pub fn rhs_spherical(&self, y: &[f64; 8]) -> [f64; 8] {
        let [r, th, sg, xi, et, ze] = Dual::<6>::vars([y[1], y[2], y[4], y[5], y[6], y[7]]);
        let h = self.radial(r, sg, xi, ze) - self.carter_sph(th, sg, et, ze);
        let d = h.d;
        [y[0] * d[2], d[3], d[4], d[5], 0.0, -d[0], -d[1], 0.0]
    }

    /// Hamilton field of ρ²G on [τ₀, r, y, z, σ, ξ, λ, ν].
    pub fn rhs_polar(&self, y: &[f64; 8]) -> [f64; 8] {
        let [r, py, pz, sg, xi, lam, nu] = Dual::<7>::vars([y[1], y[2], y[3], y[4], y[5], y[6], y[7]]);
        let zeta = nu * py - lam * pz;
        let h = self.radial(r, sg, xi, zeta) - self.carter_pol(py, pz, sg, lam, nu);
        let d = h.d;
        [y[0] * d[3], d[4], d[5], d[6], 0.0, -d[0], -d[1], -d[2]]
    }

    /// Null completion: the root ξ of ρ²G = 0 with the requested sign, if real.
    pub fn solve_xi(&self, r: f64, theta: f64, sigma: f64, eta: f64, zeta: f64, xi_sign: f64) -> Option<f64> {
        let g1 = 1.0 + self.gamma;
        let a = self.a;
        let mu = (r * r + a * a) * (1.0 - self.lam * r * r) - 2.0 * self.m * r;
        let b = 2.0 * self.sign * g1 * (a * zeta - (r * r + a * a) * sigma);
        let c = -self.carter_sph(theta, sigma, eta, zeta);
        // −μ ξ² + b ξ + c = 0
        let roots: Vec<f64> = if mu.abs() < 1e-14 {
            vec![-c / b]
        } else {
            let disc = b * b + 4.0 * mu * c;
            if disc < 0.0 {
                return None;
            }
            let sq = disc.sqrt();
            vec![(b + sq) / (2.0 * mu), (b - sq) / (2.0 * mu)]
        };
        roots.into_iter().filter(|x| x.is_finite() && x.signum() == xi_sign).max_by(|x, y| x.abs().total_cmp(&y.abs()))
    }

    /// Null covector at (r, θ) with given σ, ζ whose ξ is a double root, i.e. H r = 0:
    /// a radial turning point, close to trapped when r is near the photon region.
    pub fn turning_point(&self, r: f64, theta: f64, sigma: f64, zeta: f64) -> Option<KdsPoint> {
        let g1 = 1.0 + self.gamma;
        let a = self.a;
        let mu = (r * r + a * a) * (1.0 - self.lam * r * r) - 2.0 * self.m * r;
        if !(mu > 0.0) {
            return None;
        }
        let b = 2.0 * self.sign * g1 * (a * zeta - (r * r + a * a) * sigma);
        let target = b * b / (4.0 * mu);
        let s2 = theta.sin().powi(2);
        let kappa = 1.0 + self.gamma * theta.cos().powi(2);
        let rest = target - g1 * g1 * (a * s2 * sigma - zeta).powi(2) / (kappa * s2);
        if rest < 0.0 {
            return None;
        }
        let eta = (rest / kappa).sqrt();
        Some(KdsPoint { tau0: 1.0, r, theta, phi: 0.0, sigma, xi: b / (2.0 * mu), eta, zeta })
    }

    /// Null covector on a spherical orbit: r, ξ at a fixed point of the (r, ξ) subsystem for the
    /// given σ, ζ, with r searched in (r_lo, r_hi) and the point placed at θ = π/2, η ≥ 0.
    /// Neighbouring floats of r and ξ are scanned so that ṙ and ξ̇ evaluate to exactly zero
    /// where possible, since the orbit is unstable.
    pub fn spherical_orbit(&self, sigma: f64, zeta: f64, r_lo: f64, r_hi: f64) -> Option<KdsPoint> {
        let (a, lam, m) = (self.a, self.lam, self.m);
        let g1 = 1.0 + self.gamma;
        let mu = |r: f64| (r * r + a * a) * (1.0 - lam * r * r) - 2.0 * m * r;
        let dmu = |r: f64| 2.0 * r * (1.0 - lam * r * r) - 2.0 * lam * r * (r * r + a * a) - 2.0 * m;
        // ∂_ξ and ∂_r of the radial part vanish together
        let f = |r: f64| (a * zeta - (r * r + a * a) * sigma) * dmu(r) + 4.0 * r * sigma * mu(r);
        let r0 = bisect(f, r_lo, r_hi, 1e-16).ok()?;
        let theta = std::f64::consts::FRAC_PI_2;
        let xi_of = |r: f64| 2.0 * self.sign * g1 * (a * zeta - (r * r + a * a) * sigma) / (2.0 * mu(r));
        let residual = |r: f64, xi: f64| {
            let d = self.rhs_spherical(&[1.0, r, theta, 0.0, sigma, xi, 0.0, zeta]);
            d[1].abs() + d[5].abs()
        };
        let mut best = (r0, xi_of(r0));
        let mut best_v = residual(best.0, best.1);
        'outer: for i in 0..128 {
            let r = if i % 2 == 0 { offset_ulps(r0, i / 2) } else { offset_ulps(r0, -(i / 2 + 1)) };
            let xi0 = xi_of(r);
            for j in -16..=16 {
                let xi = offset_ulps(xi0, j);
                let v = residual(r, xi);
                if v < best_v {
                    best = (r, xi);
                    best_v = v;
                    if v == 0.0 {
                        break 'outer;
                    }
                }
            }
        }
        let (r, xi) = best;
        let b = 2.0 * self.sign * g1 * (a * zeta - (r * r + a * a) * sigma);
        let carter = -mu(r) * xi * xi + b * xi;
        let eta2 = carter - g1 * g1 * (a * sigma - zeta).powi(2);
        if !(eta2 >= 0.0) {
            return None;
        }
        Some(KdsPoint { tau0: 1.0, r, theta, phi: 0.0, sigma, xi, eta: eta2.sqrt(), zeta })
    }

    pub fn integrate(&self, p0: KdsPoint, opts: &FlowOptions) -> Result<KdsTrajectory, FlowError> {
        if !(p0.r > 0.0) || !(p0.theta > 0.0 && p0.theta < std::f64::consts::PI) {
            return Err(FlowError::OutsideChart(format!("r = {}, θ = {}", p0.r, p0.theta)));
        }
        let mut polar = p0.theta.sin() < ENTER_POLAR;
        let mut north = p0.theta < std::f64::consts::FRAC_PI_2;
        if !(p0.tau0 > 0.0) {
            return Err(FlowError::OutsideChart("τ₀ must be positive".into()));
        }
        // slot 0 carries ln τ₀
        let mut y = if polar { to_polar(&p0, north) } else { to_spherical_array(&p0) };
        y[0] = p0.tau0.ln();
        let mut samples = vec![self.sample(0.0, &y, polar, north, 0.0)];
        let mut s = 0.0;
        let mut log_scale = 0.0;
        let zeta = Cell::new(p0.zeta);
        let mut switches = 0;
        let mut terminal = Terminal::SpanCompleted;
        let ctl = opts.step_control();
        let dir = opts.span.signum();
        loop {
            let mut switch = false;
            let mut exit = None;
            let mut last = y;
            let rhs = |_: f64, v: &[f64; 8]| {
                let mut w = *v;
                w[0] = 1.0;
                let mut d = if polar { self.rhs_polar(&w) } else { self.rhs_spherical(&w) };
                // the (r, ξ) block sees ζ only as the constant it is; recomputing it from the
                // polar variables would feed rounding into an unstable subsystem
                let [r, xi] = Dual::<2>::vars([v[1], v[5]]);
                let rad = self.radial(r, Dual::constant(v[4]), xi, Dual::constant(zeta.get()));
                d[1] = rad.d[1];
                d[5] = -rad.d[0];
                d
            };
            let result = ode_integrate(&rhs, s, y, opts.span, &ctl, |t, v| {
                if t == s {
                    return Control::Continue;
                }
                last = *v;
                samples.push(self.sample(t, v, polar, north, log_scale));
                if opts.band.is_some_and(|(lo, hi)| v[1] < lo || v[1] > hi) || !(v[1] > 0.0) {
                    exit = Some(Terminal::ExitedBand { r: v[1] });
                    return Control::Stop;
                }
                let sin_theta = if polar { (v[2] * v[2] + v[3] * v[3]).sqrt() } else { v[2].sin() };
                if (polar && sin_theta > LEAVE_POLAR) || (!polar && sin_theta < ENTER_POLAR) {
                    switch = true;
                    return Control::Stop;
                }
                let n = (v[4] * v[4] + v[5] * v[5] + v[6] * v[6] + v[7] * v[7]).sqrt();
                if !(1e-6..=1e6).contains(&n) {
                    let k = 1.0 / n;
                    log_scale -= n.ln();
                    zeta.set(zeta.get() * k);
                    let mut w = *v;
                    for x in &mut w[4..] {
                        *x *= k;
                    }
                    last = w;
                    return Control::Replace(w);
                }
                Control::Continue
            });
            match result {
                Ok(summary) => s = summary.s_end,
                Err(OdeError::StepUnderflow { at, .. }) => {
                    terminal = Terminal::StepUnderflow { at };
                    break;
                }
                Err(e) => return Err(e.into()),
            }
            if let Some(t) = exit {
                terminal = t;
                break;
            }
            if !switch || dir * (opts.span - s) <= 0.0 {
                break;
            }
            switches += 1;
            if polar {
                let p = from_polar(&last, north);
                y = to_spherical_array(&p);
            } else {
                north = last[2] < std::f64::consts::FRAC_PI_2;
                y = to_polar(&from_spherical_array(&last), north);
            }
            polar = !polar;
        }
        Ok(KdsTrajectory { samples, terminal, chart_switches: switches })
    }

    fn sample(&self, s: f64, v: &[f64; 8], polar: bool, north: bool, log_scale: f64) -> KdsSample {
        let (mut point, carter) = if polar {
            (from_polar(v, north), self.carter_pol(v[2], v[3], v[4], v[6], v[7]))
        } else {
            let p = from_spherical_array(v);
            (p, self.carter_sph(p.theta, p.sigma, p.eta, p.zeta))
        };
        point.tau0 = v[0].exp();
        let zeta = if polar { v[7] * v[2] - v[6] * v[3] } else { v[7] };
        let g = self.radial(v[1], v[4], v[5], zeta) - carter;
        KdsSample { s, point, log_scale, g, carter, polar }
    }
}

/// v·e^l without overflowing when v has underflowed far below e^{−l}.
fn unscale(v: f64, l: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v.signum() * (v.abs().ln() + l).exp()
    }
}

fn offset_ulps(x: f64, n: i32) -> f64 {
    let mut y = x;
    for _ in 0..n.unsigned_abs() {
        y = if n > 0 { y.next_up() } else { y.next_down() };
    }
    y
}

fn to_spherical_array(p: &KdsPoint) -> [f64; 8] {
    [p.tau0, p.r, p.theta, p.phi, p.sigma, p.xi, p.eta, p.zeta]
}

fn from_spherical_array(v: &[f64; 8]) -> KdsPoint {
    KdsPoint { tau0: v[0], r: v[1], theta: v[2], phi: v[3], sigma: v[4], xi: v[5], eta: v[6], zeta: v[7] }
}

/// [τ₀, r, y, z, σ, ξ, λ, ν] from a spherical point away from the equator.
fn to_polar(p: &KdsPoint, north: bool) -> [f64; 8] {
    let (st, ct) = p.theta.sin_cos();
    let ct = if north { ct.abs() } else { -ct.abs() };
    let (sp, cp) = p.phi.sin_cos();
    let a = p.eta / ct;
    let b = p.zeta / st;
    [p.tau0, p.r, st * cp, st * sp, p.sigma, p.xi, a * cp - b * sp, a * sp + b * cp]
}

fn from_polar(v: &[f64; 8], north: bool) -> KdsPoint {
    let (y, z, lam, nu) = (v[2], v[3], v[6], v[7]);
    let st = (y * y + z * z).sqrt().min(1.0);
    let theta = if north { st.asin() } else { std::f64::consts::PI - st.asin() };
    let phi = z.atan2(y);
    let (sp, cp) = phi.sin_cos();
    KdsPoint {
        tau0: v[0],
        r: v[1],
        theta,
        phi,
        sigma: v[4],
        xi: v[5],
        eta: theta.cos() * (lam * cp + nu * sp),
        zeta: nu * y - lam * z,
    }
}
