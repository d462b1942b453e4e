//! Locally weighted scatterplot smoothing with tricube weights and
//! bisquare robustifying iterations.

use crate::error::{Error, Result};

/// Smooths `points` with locally weighted linear regression: each point is
/// fit over its `ceil(fraction·n)` nearest neighbours (contiguous in x,
/// ties prefer the left), tricube-weighted by distance, then `iterations`
/// bisquare reweightings temper outliers. Returns (x, smoothed y) sorted by
/// x; each smoothed value is clamped to its neighbourhood's y-range.
pub fn lowess(
    points: &[(f64, f64)],
    fraction: f64,
    iterations: usize,
) -> Result<Vec<(f64, f64)>> {
    if points.len() < 2 {
        return Err(Error::InvalidArg(format!(
            "lowess needs at least 2 points, got {}",
            points.len()
        )));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArg(format!(
            "lowess fraction must be inside (0, 1], got {fraction}"
        )));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidArg("lowess points must be finite".into()));
    }

    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = pts.len();
    let q = ((fraction * n as f64).ceil() as usize).clamp(2, n);

    let mut delta = vec![1.0f64; n]; // robustness weights
    let mut smoothed = vec![0.0f64; n];
    for pass in 0..=iterations {
        for i in 0..n {
            let lo = window_start(&pts, i, q);
            smoothed[i] = fit_at(&pts, &delta, i, lo, q);
        }
        if pass == iterations {
            break;
        }
        // Bisquare reweighting from the residuals of this pass.
        let mut abs_res: Vec<f64> = pts
            .iter()
            .zip(&smoothed)
            .map(|((_, y), s)| (y - s).abs())
            .collect();
        abs_res.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let s = if n % 2 == 1 {
            abs_res[n / 2]
        } else {
            0.5 * (abs_res[n / 2 - 1] + abs_res[n / 2])
        };
        if s <= 0.0 {
            break; // perfect fit; further passes change nothing
        }
        for (d, ((_, y), sm)) in delta.iter_mut().zip(pts.iter().zip(&smoothed)) {
            let r = ((y - sm) / (6.0 * s)).abs();
            *d = if r < 1.0 { (1.0 - r * r).powi(2) } else { 0.0 };
        }
    }
    Ok(pts
        .iter()
        .zip(&smoothed)
        .map(|(&(x, _), &s)| (x, s))
        .collect())
}

/// Leftmost start of the q-point window whose farthest member is nearest to
/// x_i; equidistant left/right candidates keep the left one.
fn window_start(pts: &[(f64, f64)], i: usize, q: usize) -> usize {
    let n = pts.len();
    let x = pts[i].0;
    let mut lo = i.saturating_sub(q - 1).min(n - q);
    // Slide right while dropping the left end strictly shrinks the span.
    while lo + q < n {
        let d_left = x - pts[lo].0;
        let d_right = pts[lo + q].0 - x;
        if d_right < d_left {
            lo += 1;
        } else {
            break;
        }
    }
    lo
}

/// Weighted linear fit of the window evaluated at x_i, clamped to the
/// window's y-range. Degenerate windows fall back to the weighted mean.
fn fit_at(pts: &[(f64, f64)], delta: &[f64], i: usize, lo: usize, q: usize) -> f64 {
    let x_i = pts[i].0;
    let window = &pts[lo..lo + q];
    let d_max = window
        .iter()
        .map(|(x, _)| (x - x_i).abs())
        .fold(0.0f64, f64::max);

    let (mut sw, mut swx, mut swx2, mut swy, mut swxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for (j, &(x, y)) in window.iter().enumerate() {
        y_min = y_min.min(y);
        y_max = y_max.max(y);
        let tricube = if d_max > 0.0 {
            let t = ((x - x_i).abs() / d_max).powi(3);
            (1.0 - t).max(0.0).powi(3)
        } else {
            1.0
        };
        let w = tricube * delta[lo + j];
        let dx = x - x_i;
        sw += w;
        swx += w * dx;
        swx2 += w * dx * dx;
        swy += w * y;
        swxy += w * dx * y;
    }
    if sw <= 0.0 {
        // Every neighbour was rejected as an outlier; fall back to the
        // unweighted window mean.
        let mean = window.iter().map(|(_, y)| y).sum::<f64>() / q as f64;
        return mean.clamp(y_min, y_max);
    }
    let denom = sw * swx2 - swx * swx;
    let fitted = if d_max <= 0.0 || denom.abs() <= 1e-12 * sw * swx2.max(1e-300) {
        swy / sw
    } else {
        let slope = (sw * swxy - swx * swy) / denom;
        (swy - slope * swx) / sw
    };
    fitted.clamp(y_min, y_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn linear_data_is_reproduced() {
        let pts: Vec<(f64, f64)> = (0..40).map(|i| (i as f64, 2.0 * i as f64)).collect();
        for (input, (x, s)) in pts.iter().zip(lowess(&pts, 2.0 / 3.0, 3).unwrap()) {
            assert_eq!(input.0, x);
            assert!((s - input.1).abs() < 1e-9, "x {x}: {s} vs {}", input.1);
        }
    }

    #[test]
    fn constant_data_is_reproduced() {
        let pts: Vec<(f64, f64)> = (0..25).map(|i| (i as f64 * 0.5, 0.7)).collect();
        for (_, s) in lowess(&pts, 2.0 / 3.0, 3).unwrap() {
            assert!((s - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicate_x_falls_back_to_the_mean() {
        let pts = vec![(1.0, 0.0), (1.0, 1.0), (1.0, 0.5), (1.0, 0.5)];
        for (_, s) in lowess(&pts, 1.0, 0).unwrap() {
            assert!((s - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn binary_outcomes_stay_inside_the_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<(f64, f64)> = (0..200)
            .map(|_| {
                let x: f64 = rng.gen_range(0.0..2000.0);
                let y = if rng.gen_bool((x / 2000.0).clamp(0.05, 0.95)) { 1.0 } else { 0.0 };
                (x, y)
            })
            .collect();
        for (_, s) in lowess(&pts, 2.0 / 3.0, 3).unwrap() {
            assert!((0.0..=1.0).contains(&s), "smoothed value {s} escaped [0,1]");
        }
    }

    #[test]
    fn output_is_sorted_by_x_even_if_input_is_not() {
        let pts = vec![(3.0, 1.0), (1.0, 0.0), (2.0, 0.5), (0.0, 0.0)];
        let out = lowess(&pts, 1.0, 1).unwrap();
        let xs: Vec<f64> = out.iter().map(|(x, _)| *x).collect();
        assert_eq!(xs, vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn robust_iterations_temper_an_outlier() {
        // y = x with one wild point; robust passes should pull the smoothed
        // curve at the outlier's x back toward the line.
        let mut pts: Vec<(f64, f64)> = (0..30).map(|i| (i as f64, i as f64)).collect();
        pts[15].1 = 1000.0;
        let naive = lowess(&pts, 0.4, 0).unwrap();
        let robust = lowess(&pts, 0.4, 3).unwrap();
        let err = |out: &[(f64, f64)]| {
            out.iter()
                .enumerate()
                .filter(|(i, _)| *i != 15)
                .map(|(i, (_, s))| (s - i as f64).abs())
                .fold(0.0f64, f64::max)
        };
        assert!(
            err(&robust) < err(&naive) * 0.1,
            "robust {} vs naive {}",
            err(&robust),
            err(&naive)
        );
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(lowess(&[(0.0, 1.0)], 0.5, 3).is_err());
        let pts = vec![(0.0, 0.0), (1.0, 1.0)];
        assert!(lowess(&pts, 0.0, 3).is_err());
        assert!(lowess(&pts, 1.5, 3).is_err());
        assert!(lowess(&[(0.0, f64::NAN), (1.0, 1.0)], 0.5, 3).is_err());
    }
}
