//! One-dimensional interpolation on sorted abscissae.

/// Lagrange interpolation using `order + 1` nodes centred on `x`.
/// Returns `None` outside `[xs[0], xs[last]]` or when too few nodes exist.
pub fn lagrange(xs: &[f64], ys: &[f64], x: f64, order: usize) -> Option<f64> {
    let n = xs.len();
    if n != ys.len() || n < order + 1 || x < xs[0] || x > xs[n - 1] {
        return None;
    }
    let k = order + 1;
    let i = xs.partition_point(|&v| v <= x).saturating_sub(1).min(n - 2);
    // first node of the stencil
    let mut start = (i + 1).saturating_sub(k / 2);
    if start + k > n {
        start = n - k;
    }
    let mut sum = 0.0;
    for a in start..start + k {
        let mut w = 1.0;
        for b in start..start + k {
            if a != b {
                w *= (x - xs[b]) / (xs[a] - xs[b]);
            }
        }
        sum += w * ys[a];
    }
    Some(sum)
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes).
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Option<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n || xs.windows(2).any(|w| w[1] <= w[0]) {
            return None;
        }
        let secants: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])).collect();
        let mut m = vec![0.0; n];
        m[0] = secants[0];
        m[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            m[i] = if secants[i - 1] * secants[i] <= 0.0 {
                0.0
            } else {
                0.5 * (secants[i - 1] + secants[i])
            };
        }
        for i in 0..n - 1 {
            let d = secants[i];
            if d == 0.0 {
                m[i] = 0.0;
                m[i + 1] = 0.0;
                continue;
            }
            let a = m[i] / d;
            let b = m[i + 1] / d;
            let s = a * a + b * b;
            if s > 9.0 {
                let t = 3.0 / s.sqrt();
                m[i] = t * a * d;
                m[i + 1] = t * b * d;
            }
        }
        Some(Self { xs, ys, slopes: m })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// Value and derivative; `None` outside the data range.
    pub fn eval(&self, x: f64) -> Option<(f64, f64)> {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return None;
        }
        let i = self.xs.partition_point(|&v| v <= x).saturating_sub(1).min(n - 2);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let v = h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1];
        let d00 = (6.0 * t2 - 6.0 * t) / h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * t) / h;
        let d11 = 3.0 * t2 - 2.0 * t;
        let d = d00 * self.ys[i] + d10 * self.slopes[i] + d01 * self.ys[i + 1] + d11 * self.slopes[i + 1];
        Some((v, d))
    }
}
