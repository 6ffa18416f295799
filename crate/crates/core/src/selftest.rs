//! Property checks of the basis and the band solver, runnable from the CLI.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::banded::BandedMatrix;
use crate::basis::{StencilWeights, TrigQuinticBasis, MAX_ORDER};
use crate::mesh::{UniformMesh, MAX_SPACING};

/// Default spacings checked by [`run_selftest`].
pub const DEFAULT_GRID: [f64; 3] = [0.01, 0.1, 0.5];

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Pass,
    Fail(String),
    /// The input violates a precondition; not counted as a failure.
    Rejected(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub h: Option<f64>,
    pub outcome: Outcome,
}

impl std::fmt::Display for PropertyResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let label = match self.h {
            Some(h) => format!("{} (h = {h})", self.name),
            None => self.name.to_string(),
        };
        match &self.outcome {
            Outcome::Pass => write!(f, "PASS {label}"),
            Outcome::Fail(msg) => write!(f, "FAIL {label}: {msg}"),
            Outcome::Rejected(msg) => write!(f, "SKIP {label}: precondition rejected: {msg}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SelftestOptions {
    pub grid: Vec<f64>,
    pub systems: usize,
    pub seed: u64,
    /// Test hook: multiply `alpha(i)` by `1 + eps` before the stencil check.
    #[doc(hidden)]
    pub alpha_perturbation: Option<(usize, f64)>,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        Self {
            grid: DEFAULT_GRID.to_vec(),
            systems: 200,
            seed: 0x7142_5eed,
            alpha_perturbation: None,
        }
    }
}

pub fn all_passed(results: &[PropertyResult]) -> bool {
    results.iter().all(|r| !matches!(r.outcome, Outcome::Fail(_)))
}

fn verdict(worst: f64, tol: f64, what: &str) -> Outcome {
    if worst <= tol {
        Outcome::Pass
    } else {
        Outcome::Fail(format!("{what} {worst:.3e} exceeds {tol:.0e}"))
    }
}

fn basis_for(h: f64) -> Option<TrigQuinticBasis> {
    let mesh = UniformMesh::new(0.0, 8.0 * h, 8).ok()?;
    TrigQuinticBasis::new(&mesh).ok()
}

/// Largest jump of derivatives 0..=4 across the interior support knots,
/// relative to the derivative's magnitude.
pub fn continuity_defect(basis: &TrigQuinticBasis) -> f64 {
    let mut worst = 0.0f64;
    for order in 0..=MAX_ORDER {
        let scale = basis.max_magnitude(order);
        for j in -2..=2 {
            let (l, r) = basis.one_sided_limits(j, order).expect("valid knot and order");
            worst = worst.max((l - r).abs() / scale);
        }
    }
    worst
}

/// Largest difference between the stencil rows and the basis evaluated at
/// the knots, relative to each row's largest weight.
pub fn stencil_defect(basis: &TrigQuinticBasis, w: &StencilWeights) -> f64 {
    let h = basis.mesh().spacing();
    let mut worst = 0.0f64;
    for order in 0..=MAX_ORDER {
        let row = w.row(order);
        let scale = row.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (idx, &wj) in row.iter().enumerate() {
            let j = idx as f64 - 2.0;
            let direct = basis.local_value(-j * h, order).expect("order in range");
            worst = worst.max((wj - direct).abs() / scale);
        }
    }
    worst
}

/// Dense Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k] == 0.0 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Some(x)
}

/// Random banded systems with a dominant-ish diagonal solved both ways;
/// returns the worst relative difference.
pub fn banded_vs_dense(systems: usize, seed: u64) -> f64 {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..systems {
        let n = rng.gen_range(1..=40);
        let kl = rng.gen_range(0..=5.min(n - 1));
        let ku = rng.gen_range(0..=5.min(n - 1));
        let mut a = BandedMatrix::zeros(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                a.set(i, j, rng.gen_range(-1.0..1.0));
            }
            // keep the conditioning moderate while still allowing pivoting
            a.add(i, i, if rng.gen_bool(0.5) { 2.0 } else { 0.5 });
        }
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = match a.factor().and_then(|lu| lu.solve(&b)) {
            Ok(x) => x,
            Err(_) => {
                worst = f64::INFINITY;
                continue;
            }
        };
        let Some(y) = dense_solve(a.to_dense(), b) else {
            continue;
        };
        let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for (p, q) in x.iter().zip(&y) {
            worst = worst.max((p - q).abs() / scale);
        }
    }
    worst
}

pub fn run_selftest(opts: &SelftestOptions) -> Vec<PropertyResult> {
    let mut out = Vec::new();
    for &h in &opts.grid {
        let rejected = if !(h > 0.0) {
            Some(format!("spacing must be positive, got {h}"))
        } else if h >= MAX_SPACING {
            Some(format!("spacing {h} is not below 2*pi/5"))
        } else {
            None
        };
        let basis = match (rejected, basis_for(h)) {
            (None, Some(b)) => b,
            (reason, _) => {
                let msg = reason.unwrap_or_else(|| format!("no basis for h = {h}"));
                for name in ["c4-continuity", "stencil-oracle"] {
                    out.push(PropertyResult {
                        name,
                        h: Some(h),
                        outcome: Outcome::Rejected(msg.clone()),
                    });
                }
                continue;
            }
        };
        out.push(PropertyResult {
            name: "c4-continuity",
            h: Some(h),
            outcome: verdict(continuity_defect(&basis), 1e-9, "relative jump"),
        });
        let mut w = basis.stencil_weights();
        if let Some((i, eps)) = opts.alpha_perturbation {
            let mut alpha = *w.alphas();
            if (1..=13).contains(&i) {
                alpha[i - 1] *= 1.0 + eps;
            }
            w = StencilWeights::from_alpha(w.spacing(), w.theta(), alpha);
        }
        out.push(PropertyResult {
            name: "stencil-oracle",
            h: Some(h),
            outcome: verdict(stencil_defect(&basis, &w), 1e-12, "relative difference"),
        });
    }
    if let Some(h) = opts
        .grid
        .iter()
        .copied()
        .filter(|&h| h > 0.0 && h <= 0.05)
        .min_by(f64::total_cmp)
    {
        let w = basis_for(h).expect("small spacing is valid").stencil_weights();
        let (r2, r3) = (w.alpha(2) / w.alpha(1), w.alpha(3) / w.alpha(1));
        let worst = (r2 - 26.0).abs().max((r3 - 66.0).abs()) / 66.0;
        out.push(PropertyResult {
            name: "small-h-ratios",
            h: Some(h),
            outcome: verdict(worst, 1e-3, "relative deviation from 1:26:66"),
        });
    }
    out.push(PropertyResult {
        name: "banded-vs-dense",
        h: None,
        outcome: verdict(banded_vs_dense(opts.systems, opts.seed), 1e-10, "relative difference"),
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_passes() {
        let r = run_selftest(&SelftestOptions::default());
        assert!(all_passed(&r), "{r:?}");
        assert_eq!(r.len(), 2 * DEFAULT_GRID.len() + 2);
    }

    #[test]
    fn perturbed_alpha_fails_stencil_oracle() {
        let opts = SelftestOptions {
            alpha_perturbation: Some((7, 1e-6)),
            systems: 5,
            ..Default::default()
        };
        let r = run_selftest(&opts);
        assert!(!all_passed(&r));
        assert!(r
            .iter()
            .filter(|p| matches!(p.outcome, Outcome::Fail(_)))
            .all(|p| p.name == "stencil-oracle"));
    }

    #[test]
    fn coarse_spacing_is_rejected_not_failed() {
        let opts = SelftestOptions {
            grid: vec![0.1, 1.3],
            systems: 5,
            ..Default::default()
        };
        let r = run_selftest(&opts);
        assert!(all_passed(&r));
        assert!(r
            .iter()
            .any(|p| p.h == Some(1.3) && matches!(p.outcome, Outcome::Rejected(_))));
    }

    #[test]
    fn dense_oracle_by_hand() {
        let x = dense_solve(vec![vec![0.0, 2.0], vec![1.0, 1.0]], vec![4.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0]);
        assert!(dense_solve(vec![vec![0.0]], vec![1.0]).is_none());
    }
}
