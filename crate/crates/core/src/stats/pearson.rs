use super::{check_pair, Correlation};
use crate::error::Result;

/// Pearson's r, accumulated in a single pass with Welford-style co-moment
/// updates. Constant inputs give [`Correlation::Degenerate`].
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    check_pair(x, y, 2)?;
    let (mut mean_x, mut mean_y) = (0.0, 0.0);
    let (mut m2_x, mut m2_y, mut co) = (0.0, 0.0, 0.0);
    for (k, (&xi, &yi)) in x.iter().zip(y).enumerate() {
        let n = (k + 1) as f64;
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        mean_x += dx / n;
        mean_y += dy / n;
        m2_x += dx * (xi - mean_x);
        m2_y += dy * (yi - mean_y);
        co += dx * (yi - mean_y);
    }
    if m2_x <= 0.0 || m2_y <= 0.0 || constant(x) || constant(y) {
        return Ok(Correlation::Degenerate);
    }
    Ok(Correlation::Value(
        (co / (m2_x.sqrt() * m2_y.sqrt())).clamp(-1.0, 1.0),
    ))
}

fn constant(v: &[f64]) -> bool {
    v.iter().all(|&a| a == v[0])
}
