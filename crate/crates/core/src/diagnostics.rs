//! Error norms, convergence tables and pattern metrics.

use crate::error::{Error, Result};
use crate::problem::{analytic_linear, preset, Model, Params};
use crate::stepper::{run, Trajectory};

/// Error norms of both species against a reference solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub l2_u: f64,
    pub linf_u: f64,
    pub l2_v: f64,
    pub linf_v: f64,
    pub n: usize,
    pub dt: f64,
    pub t: f64,
    pub label: String,
}

/// `(sqrt(h * sum d_j^2), max |d_j|)` for `d = numeric - exact`.
pub fn l2_linf(numeric: &[f64], exact: &[f64], h: f64) -> Result<(f64, f64)> {
    if numeric.len() != exact.len() {
        return Err(Error::DimensionMismatch {
            expected: exact.len(),
            found: numeric.len(),
        });
    }
    let (mut sq, mut inf) = (0.0f64, 0.0f64);
    for (a, b) in numeric.iter().zip(exact) {
        let d = a - b;
        sq += d * d;
        inf = inf.max(d.abs());
    }
    Ok(((h * sq).sqrt(), inf))
}

/// `sqrt(sum |next - prev|^2 / sum |next|^2)`.
pub fn relative_error(prev: &[f64], next: &[f64]) -> Result<f64> {
    if prev.len() != next.len() {
        return Err(Error::DimensionMismatch {
            expected: next.len(),
            found: prev.len(),
        });
    }
    let den: f64 = next.iter().map(|x| x * x).sum();
    if !(den > 0.0) {
        return Err(Error::ZeroDenominator);
    }
    let num: f64 = prev.iter().zip(next).map(|(p, q)| (q - p) * (q - p)).sum();
    Ok((num / den).sqrt())
}

/// Indices of interior local maxima whose height above the higher of the
/// two flanking minima is at least `prominence`.
///
/// A flanking minimum is the lowest value between the peak and the nearest
/// strictly higher sample on that side, or the end of the array. Flat tops
/// count once, at their first index.
pub fn find_peaks(values: &[f64], prominence: f64) -> Vec<usize> {
    let n = values.len();
    let mut peaks = Vec::new();
    if n < 3 {
        return peaks;
    }
    let mut j = 1;
    while j < n - 1 {
        if values[j] > values[j - 1] {
            // walk across a plateau
            let mut k = j;
            while k + 1 < n && values[k + 1] == values[j] {
                k += 1;
            }
            if k < n - 1 && values[k + 1] < values[j] {
                let top = values[j];
                let mut left = top;
                for &x in values[..j].iter().rev() {
                    if x > top {
                        break;
                    }
                    left = left.min(x);
                }
                let mut right = top;
                for &x in &values[k + 1..] {
                    if x > top {
                        break;
                    }
                    right = right.min(x);
                }
                if top - left.max(right) >= prominence {
                    peaks.push(j);
                }
            }
            j = k + 1;
        } else {
            j += 1;
        }
    }
    peaks
}

pub fn count_interior_maxima(profile: &[f64], prominence: f64) -> usize {
    find_peaks(profile, prominence).len()
}

/// Fraction of the series range used as peak prominence by [`estimate_period`].
pub const PERIOD_PROMINENCE: f64 = 0.05;

/// Mean spacing of successive peak times.
pub fn estimate_period(series: &[(f64, f64)]) -> Result<f64> {
    let values: Vec<f64> = series.iter().map(|s| s.1).collect();
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let range = hi - lo;
    let peaks = if range > 0.0 {
        find_peaks(&values, PERIOD_PROMINENCE * range)
    } else {
        Vec::new()
    };
    if peaks.len() < 2 {
        return Err(Error::InsufficientPeaks { found: peaks.len() });
    }
    let first = series[peaks[0]].0;
    let last = series[peaks[peaks.len() - 1]].0;
    Ok((last - first) / (peaks.len() - 1) as f64)
}

/// `log2(coarse / fine)` for errors at `2 dt` and `dt`.
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub n: usize,
    pub l2_u: f64,
    pub linf_u: f64,
    pub l2_v: f64,
    pub linf_v: f64,
    /// Order from the `L_inf` errors against the row with twice this `dt`.
    pub order_u: Option<f64>,
    pub order_v: Option<f64>,
}

/// Rows sorted by increasing `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn from_reports(mut reports: Vec<ErrorReport>) -> Self {
        reports.sort_by(|a, b| a.dt.total_cmp(&b.dt));
        let mut rows: Vec<ConvergenceRow> = reports
            .iter()
            .map(|r| ConvergenceRow {
                dt: r.dt,
                n: r.n,
                l2_u: r.l2_u,
                linf_u: r.linf_u,
                l2_v: r.l2_v,
                linf_v: r.linf_v,
                order_u: None,
                order_v: None,
            })
            .collect();
        for i in 0..rows.len() {
            let twice = rows
                .iter()
                .position(|r| (r.dt - 2.0 * rows[i].dt).abs() <= 1e-12 * r.dt && r.n == rows[i].n);
            if let Some(k) = twice {
                rows[i].order_u = Some(observed_order(rows[k].linf_u, rows[i].linf_u));
                rows[i].order_v = Some(observed_order(rows[k].linf_v, rows[i].linf_v));
            }
        }
        Self { rows }
    }
}

/// Errors of a linear-model trajectory at its final time.
pub fn linear_errors(a: f64, b: f64, d: f64, dt: f64, traj: &Trajectory) -> Result<ErrorReport> {
    let t = traj.last.t;
    let (eu, ev): (Vec<f64>, Vec<f64>) = traj
        .knots
        .iter()
        .map(|&x| analytic_linear(x, t, a, b, d))
        .unzip();
    let n = traj.knots.len() - 1;
    let h = (traj.knots[n] - traj.knots[0]) / n as f64;
    let (l2_u, linf_u) = l2_linf(&traj.last.u, &eu, h)?;
    let (l2_v, linf_v) = l2_linf(&traj.last.v, &ev, h)?;
    Ok(ErrorReport {
        l2_u,
        linf_u,
        l2_v,
        linf_v,
        n,
        dt,
        t,
        label: Model::Linear.name().into(),
    })
}

/// Runs the linear model for every `dt` up to `t = 1` and tabulates the
/// errors against the exact solution. Runs execute concurrently.
pub fn convergence_study(a: f64, b: f64, d: f64, n: usize, dts: &[f64]) -> Result<ConvergenceTable> {
    if dts.is_empty() {
        return Err(Error::InvalidConfig("no time steps given".into()));
    }
    let reports: Vec<Result<ErrorReport>> = std::thread::scope(|scope| {
        let handles: Vec<_> = dts
            .iter()
            .map(|&dt| {
                scope.spawn(move || {
                    let over: Params = [("a", a), ("b", b), ("d", d), ("n", n as f64), ("dt", dt)]
                        .iter()
                        .map(|(k, v)| (k.to_string(), *v))
                        .collect();
                    let p = preset(Model::Linear, &over)?;
                    let traj = run(&p.setup, &p.solver)?;
                    linear_errors(a, b, d, dt, &traj)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("convergence run panicked"))
            .collect()
    });
    Ok(ConvergenceTable::from_reports(
        reports.into_iter().collect::<Result<_>>()?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn norms_by_hand() {
        assert_eq!(l2_linf(&[1.0, 2.0], &[1.0, 2.0], 0.5).unwrap(), (0.0, 0.0));
        assert_eq!(l2_linf(&[3.0, 4.0], &[0.0, 0.0], 1.0).unwrap(), (5.0, 4.0));
        assert!(l2_linf(&[1.0], &[1.0, 2.0], 1.0).is_err());
    }

    #[test]
    fn relative_error_examples() {
        assert_eq!(relative_error(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(relative_error(&[0.0; 4], &[1.0; 4]).unwrap(), 1.0);
        assert_eq!(relative_error(&[1.0], &[0.0]), Err(Error::ZeroDenominator));
    }

    proptest! {
        #[test]
        fn relative_error_scale_invariant(
            prev in prop::collection::vec(-10.0f64..10.0, 8),
            next in prop::collection::vec(0.5f64..10.0, 8),
            c in prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3],
        ) {
            let r = relative_error(&prev, &next).unwrap();
            let sp: Vec<f64> = prev.iter().map(|x| c * x).collect();
            let sn: Vec<f64> = next.iter().map(|x| c * x).collect();
            let rs = relative_error(&sp, &sn).unwrap();
            prop_assert!((r - rs).abs() <= 1e-14 * r.max(1.0));
        }

        #[test]
        fn self_error_is_zero(x in prop::collection::vec(-1e6f64..1e6, 1..50), h in 1e-3f64..1.0) {
            prop_assert_eq!(l2_linf(&x, &x, h).unwrap(), (0.0, 0.0));
        }

        #[test]
        fn maxima_count_shift_invariant(
            x in prop::collection::vec(-1.0f64..1.0, 3..60),
            shift in -4.0f64..4.0,
        ) {
            // shift by a power of two so the sums stay exact
            let s = (shift * 4.0).round() / 4.0;
            let y: Vec<f64> = x.iter().map(|v| v + s).collect();
            prop_assert_eq!(count_interior_maxima(&x, 0.1), count_interior_maxima(&y, 0.1));
        }
    }

    #[test]
    fn sine_maxima() {
        let x: Vec<f64> = (0..200).map(|k| (9.0 * PI * k as f64 / 199.0).sin()).collect();
        assert_eq!(count_interior_maxima(&x, 0.1), 5);
        assert_eq!(count_interior_maxima(&[2.0; 30], 0.1), 0);
    }

    #[test]
    fn prominence_filters_ripples() {
        let x = [0.0, 1.0, 0.95, 0.97, 0.0, 0.5, 0.0];
        assert_eq!(find_peaks(&x, 0.1), vec![1, 5]);
        assert_eq!(find_peaks(&x, 0.01), vec![1, 3, 5]);
        // flat top counted once
        assert_eq!(find_peaks(&[0.0, 1.0, 1.0, 1.0, 0.0], 0.5), vec![1]);
    }

    #[test]
    fn period_of_sine() {
        let s: Vec<(f64, f64)> = (0..=3000)
            .map(|k| {
                let t = k as f64 * 0.01;
                (t, (2.0 * PI * t / 5.0).sin())
            })
            .collect();
        assert!((estimate_period(&s).unwrap() - 5.0).abs() < 0.02);
        let flat: Vec<(f64, f64)> = (0..100).map(|k| (k as f64, 1.0)).collect();
        assert!(matches!(
            estimate_period(&flat),
            Err(Error::InsufficientPeaks { found: 0 })
        ));
    }

    #[test]
    fn orders_attach_to_halved_steps() {
        let rep = |dt: f64, e: f64| ErrorReport {
            l2_u: e,
            linf_u: e,
            l2_v: e,
            linf_v: e / 2.0,
            n: 16,
            dt,
            t: 1.0,
            label: "linear".into(),
        };
        let t = ConvergenceTable::from_reports(vec![rep(0.04, 16.0), rep(0.01, 1.0), rep(0.02, 4.0)]);
        let dts: Vec<f64> = t.rows.iter().map(|r| r.dt).collect();
        assert_eq!(dts, vec![0.01, 0.02, 0.04]);
        assert_eq!(t.rows[0].order_u, Some(2.0));
        assert_eq!(t.rows[1].order_v, Some(2.0));
        assert_eq!(t.rows[2].order_u, None);
    }
}
