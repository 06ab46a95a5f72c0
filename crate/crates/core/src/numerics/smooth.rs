//! Polynomial smoothsteps on [0, 1], flat outside.

/// Quintic step (C² at both ends). Returns (S, S', S'').
pub fn step5(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if x >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let x2 = x * x;
    let x3 = x2 * x;
    let s = x3 * (10.0 - 15.0 * x + 6.0 * x2);
    let ds = 30.0 * x2 * (1.0 - x) * (1.0 - x);
    let dds = 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
    (s, ds, dds)
}

/// Degree-9 step with four vanishing derivatives at both ends. Returns (S, S', S'').
pub fn step9(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if x >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let x5 = x.powi(5);
    let s = x5 * (126.0 - 420.0 * x + 540.0 * x * x - 315.0 * x.powi(3) + 70.0 * x.powi(4));
    // S' = 630 x^4 (1-x)^4
    let omx = 1.0 - x;
    let ds = 630.0 * x.powi(4) * omx.powi(4);
    let dds = 2520.0 * x.powi(3) * omx.powi(3) * (1.0 - 2.0 * x);
    (s, ds, dds)
}
