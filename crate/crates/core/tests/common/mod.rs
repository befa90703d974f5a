//! Independent reference implementations used only by the tests.
#![allow(dead_code)]

use cppm::{Instance, PricingProfile};

/// `E'(t) = c·E(t - τ)`, `E = 1` on `[-τ, 0]`, integrated with classical RK4
/// on steps that divide `τ`; delayed values come from cubic Hermite
/// interpolation of the stored solution and its derivative.
pub fn delay_exp_method_of_steps(c: f64, tau: f64, t: f64, steps_per_tau: usize) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let h = tau / steps_per_tau as f64;
    let mut ys = vec![1.0f64];
    let mut ds = vec![c]; // right derivative at 0
    let hist = |ys: &Vec<f64>, ds: &Vec<f64>, s: f64| -> f64 {
        if s <= 0.0 {
            return 1.0;
        }
        let p = s / h;
        let i = (p.floor() as usize).min(ys.len().saturating_sub(2));
        let th = p - i as f64;
        let (y0, y1, d0, d1) = (ys[i], ys[i + 1], ds[i], ds[i + 1]);
        let (h00, h10, h01, h11) = (
            2.0 * th.powi(3) - 3.0 * th * th + 1.0,
            th.powi(3) - 2.0 * th * th + th,
            -2.0 * th.powi(3) + 3.0 * th * th,
            th.powi(3) - th * th,
        );
        h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
    };
    let f = |ys: &Vec<f64>, ds: &Vec<f64>, s: f64| c * hist(ys, ds, s - tau);
    let mut x = 0.0;
    let mut y = 1.0;
    loop {
        let step = h.min(t - x);
        if step <= 1e-15 {
            break;
        }
        // the delayed argument never exceeds x, so the history is complete
        let k1 = f(&ys, &ds, x);
        let k2 = f(&ys, &ds, x + step / 2.0);
        let k4 = f(&ys, &ds, x + step);
        y += step / 6.0 * (k1 + 4.0 * k2 + k4);
        x += step;
        if (step - h).abs() < 1e-15 {
            ys.push(y);
            ds.push(f(&ys, &ds, x));
        }
    }
    y
}

/// Sum of the `k` largest values by full sort.
pub fn opt_by_sort(v: &[f64], k: usize) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s.iter().take(k).sum()
}

/// Marginal price at fractional position `s` of a one-unit-per-level profile.
pub fn marginal(profile: &PricingProfile, s: f64) -> f64 {
    let k = profile.levels.len();
    let i = (s.floor() as usize).min(k - 1);
    profile.levels[i].eval(s - i as f64)
}

/// Fractional allocations by scanning `x ∈ [0, min(1, k - ŷ)]` in steps of
/// `step` and maximising `∫_ŷ^{ŷ+x} (v - marginal(s)) ds` (midpoint rule).
pub fn fractional_by_scan(profile: &PricingProfile, instance: &Instance, step: f64) -> Vec<f64> {
    let k = profile.params.k as f64;
    let mut y = 0.0;
    let mut out = Vec::new();
    for &v in &instance.valuations {
        let cap = 1.0f64.min(k - y).max(0.0);
        let n = (cap / step).floor() as usize;
        let (mut best, mut best_x, mut acc) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let mid = y + (i as f64 + 0.5) * step;
            acc += (v - marginal(profile, mid)) * step;
            if acc >= best - 1e-15 {
                best = acc;
                best_x = (i + 1) as f64 * step;
            }
        }
        out.push(best_x);
        y += best_x;
    }
    out
}

/// Tail mean of a sample by sorting and fractional boundary weight.
pub fn cvar_by_sort(values: &[f64], delta: f64) -> f64 {
    let mut s = values.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let w = 1.0 / s.len() as f64;
    let (mut acc, mut sum) = (0.0, 0.0);
    for x in s {
        let take = w.min(delta - acc);
        if take <= 0.0 {
            break;
        }
        sum += take * x;
        acc += take;
    }
    sum / delta
}
