use super::{AnalysisError, FitMethod, FitResult, TimeSeries};
use crate::numerics::linear_fit;

/// Fits |f| ≈ C|V|^p on the samples with |V| ≤ `v_max`, where the abscissa of `series`
/// is V and approaches 0 monotonically.
pub fn fit_power(series: &TimeSeries, v_max: f64) -> Result<FitResult, AnalysisError> {
    let (mut lv, mut lf) = (Vec::new(), Vec::new());
    let (mut vs, mut fs) = (Vec::new(), Vec::new());
    for (v, f) in series.t.iter().zip(&series.u) {
        if v.abs() <= v_max && *v != 0.0 {
            if *f == 0.0 {
                return Err(AnalysisError::IllConditioned(format!("f vanishes at V = {v}")));
            }
            lv.push(v.abs().ln());
            lf.push(f.abs().ln());
            vs.push(*v);
            fs.push(*f);
        }
    }
    let n = lv.len();
    if n < 10 {
        return Err(AnalysisError::TooShort(n));
    }
    let decades = (lv.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - lv.iter().cloned().fold(f64::INFINITY, f64::min))
        / std::f64::consts::LN_10;
    if !(decades >= 0.5) {
        return Err(AnalysisError::IllConditioned(format!("window spans {decades:.2} decades in V")));
    }
    let (a, p, rms) = linear_fit(&lv, &lf).ok_or_else(|| AnalysisError::IllConditioned("degenerate abscissae".into()))?;
    let mean = lv.iter().sum::<f64>() / n as f64;
    let sxx: f64 = lv.iter().map(|x| (x - mean).powi(2)).sum();
    let window = TimeSeries { t: vs, u: fs };
    let mut out = FitResult::empty(FitMethod::PowerLaw, &window);
    out.window = (window.t.iter().cloned().fold(f64::INFINITY, f64::min), window.t.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    out.exponent = Some(p);
    out.amplitude = a.exp();
    out.exponent_stderr = (n > 2).then(|| (rms * rms * n as f64 / (n - 2) as f64 / sxx).sqrt());
    out.residual_rms = rms;
    out.residual_max = lv.iter().zip(&lf).fold(0.0, |m, (x, y)| f64::max(m, (y - a - p * x).abs()));
    Ok(out)
}
