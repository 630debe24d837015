/// Pump curve `h = shutoff_head - coeff * q^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpCurveFit {
    pub shutoff_head: f64,
    pub coeff: f64,
    pub exponent: f64,
}

/// Fits `h = h_s - r q^nu` to (flow, head) points.
///
/// * one point `(q, h)`: `h_s = 4h/3`, `nu = 2`, so the curve reaches zero
///   head at `2q`.
/// * three or more points: least squares on `ln(h_s - h) = ln r + nu ln q`.
///   A zero-flow point fixes `h_s` directly; otherwise `h_s` is chosen by a
///   golden-section search on the log-space residual.
pub fn fit_pump_curve(points: &[(f64, f64)]) -> Result<PumpCurveFit, String> {
    if points
        .iter()
        .any(|&(q, h)| !q.is_finite() || !h.is_finite())
    {
        return Err("non-finite curve point".into());
    }
    match points.len() {
        1 => {
            let (q, h) = points[0];
            if q <= 0.0 || h <= 0.0 {
                return Err("single-point curve needs positive flow and head".into());
            }
            let shutoff_head = 4.0 * h / 3.0;
            Ok(PumpCurveFit {
                shutoff_head,
                coeff: (shutoff_head - h) / (q * q),
                exponent: 2.0,
            })
        }
        0 | 2 => Err(format!(
            "pump curve needs 1 or at least 3 points, got {}",
            points.len()
        )),
        _ => fit_multi_point(points),
    }
}

fn fit_multi_point(points: &[(f64, f64)]) -> Result<PumpCurveFit, String> {
    for w in points.windows(2) {
        if w[1].0 <= w[0].0 || w[1].1 >= w[0].1 {
            return Err("pump curve must have increasing flow and decreasing head".into());
        }
    }
    if points[0].0 < 0.0 {
        return Err("pump curve has negative flow".into());
    }

    if points[0].0 == 0.0 {
        let shutoff_head = points[0].1;
        let (coeff, exponent, _) = log_regression(shutoff_head, &points[1..]);
        return Ok(PumpCurveFit {
            shutoff_head,
            coeff,
            exponent,
        });
    }

    let h_max = points[0].1;
    let scale = (points[0].1 - points[points.len() - 1].1).max(f64::MIN_POSITIVE);
    // search over t = ln(h_s - h_max)
    let mut lo = (scale * 1e-8).ln();
    let mut hi = (scale * 1e3).ln();
    let cost = |t: f64| log_regression(h_max + t.exp(), points).2;
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (mut fa, mut fb) = (cost(a), cost(b));
    for _ in 0..200 {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = cost(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = cost(b);
        }
    }
    let shutoff_head = h_max + (0.5 * (lo + hi)).exp();
    let (coeff, exponent, _) = log_regression(shutoff_head, points);
    Ok(PumpCurveFit {
        shutoff_head,
        coeff,
        exponent,
    })
}

/// Least squares of `ln(h_s - h)` against `ln q`. Returns `(r, nu, ssr)`.
fn log_regression(shutoff_head: f64, points: &[(f64, f64)]) -> (f64, f64, f64) {
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| (shutoff_head - p.1).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    (intercept.exp(), slope, ssr)
}

/// Fits `R` in `h = R q^mu` to a valve head-loss curve, in log space, using
/// the points with positive flow and head.
pub fn fit_valve_resistance(points: &[(f64, f64)], exponent: f64) -> Result<f64, String> {
    let logs: Vec<f64> = points
        .iter()
        .filter(|(q, h)| *q > 0.0 && *h > 0.0)
        .map(|(q, h)| h.ln() - exponent * q.ln())
        .collect();
    if logs.is_empty() {
        return Err("valve curve has no point with positive flow and head".into());
    }
    Ok((logs.iter().sum::<f64>() / logs.len() as f64).exp())
}
