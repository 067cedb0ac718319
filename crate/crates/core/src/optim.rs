//! Derivative-free optimizers used by the boundary-state minimization and
//! the teleportation parameter searches. Objectives may return +infinity to
//! mark infeasible points; they must never return NaN.

/// Outcome of a single simplex run.
#[derive(Debug, Clone)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub iterations: usize,
}

/// Standard Nelder-Mead minimization with reflection 1, expansion 2,
/// contraction 1/2 and shrink 1/2. Stops when the objective spread over the
/// simplex falls below `tol * max(1, |f_best|)` or after `max_iters`.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    steps: &[f64],
    tol: f64,
    max_iters: usize,
) -> SimplexOutcome {
    let dim = x0.len();
    assert_eq!(steps.len(), dim);
    let mut evaluations = 0usize;
    let mut eval = |p: &[f64], n: &mut usize| -> f64 {
        *n += 1;
        let v = f(p);
        debug_assert!(!v.is_nan(), "objective returned NaN at {p:?}");
        v
    };

    let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(dim + 1);
    simplex.push((eval(x0, &mut evaluations), x0.to_vec()));
    for i in 0..dim {
        let mut p = x0.to_vec();
        p[i] += steps[i];
        simplex.push((eval(&p, &mut evaluations), p));
    }

    let mut iterations = 0usize;
    while iterations < max_iters {
        iterations += 1;
        simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
        let best = simplex[0].0;
        let worst = simplex[dim].0;
        if best.is_finite() {
            let spread = if worst.is_finite() {
                worst - best
            } else {
                f64::INFINITY
            };
            let diameter = simplex[1..]
                .iter()
                .map(|(_, p)| {
                    p.iter()
                        .zip(&simplex[0].1)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0_f64, f64::max)
                })
                .fold(0.0_f64, f64::max);
            let scale = simplex[0].1.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
            if spread <= tol * best.abs().max(1.0) && diameter <= tol.sqrt() * scale {
                break;
            }
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; dim];
        for (_, p) in &simplex[..dim] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / dim as f64;
            }
        }
        let worst_point = simplex[dim].1.clone();
        let second_worst = simplex[dim - 1].0;

        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&worst_point)
            .map(|(c, w)| 2.0 * c - w)
            .collect();
        let f_reflect = eval(&reflect, &mut evaluations);

        if f_reflect < simplex[0].0 {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&worst_point)
                .map(|(c, w)| 3.0 * c - 2.0 * w)
                .collect();
            let f_expand = eval(&expand, &mut evaluations);
            simplex[dim] = if f_expand < f_reflect {
                (f_expand, expand)
            } else {
                (f_reflect, reflect)
            };
            continue;
        }
        if f_reflect < second_worst {
            simplex[dim] = (f_reflect, reflect);
            continue;
        }
        // Contraction, outside or inside depending on the reflected value.
        let contract: Vec<f64> = if f_reflect < simplex[dim].0 {
            centroid
                .iter()
                .zip(&reflect)
                .map(|(c, r)| 0.5 * (c + r))
                .collect()
        } else {
            centroid
                .iter()
                .zip(&worst_point)
                .map(|(c, w)| 0.5 * (c + w))
                .collect()
        };
        let f_contract = eval(&contract, &mut evaluations);
        if f_contract < simplex[dim].0.min(f_reflect) {
            simplex[dim] = (f_contract, contract);
            continue;
        }
        // Shrink toward the best vertex.
        let best_point = simplex[0].1.clone();
        for entry in simplex.iter_mut().skip(1) {
            let p: Vec<f64> = best_point
                .iter()
                .zip(&entry.1)
                .map(|(b, v)| 0.5 * (b + v))
                .collect();
            *entry = (eval(&p, &mut evaluations), p);
        }
    }

    simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
    SimplexOutcome {
        x: simplex[0].1.clone(),
        value: simplex[0].0,
        evaluations,
        iterations,
    }
}

/// Maximize a one-dimensional function on [lo, hi]: a coarse scan brackets
/// the maximum, then golden-section search refines it.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    const SCAN: usize = 64;
    let mut best_i = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    let at = |i: usize| lo + (hi - lo) * i as f64 / SCAN as f64;
    for i in 0..=SCAN {
        let v = f(at(i));
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let mut a = at(best_i.saturating_sub(1));
    let mut b = at((best_i + 1).min(SCAN));

    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Find the point where a decreasing function crosses `target` on [lo, hi]
/// by bisection. Assumes f(lo) >= target >= f(hi).
pub fn bisect_decreasing<F: Fn(f64) -> f64>(f: F, target: f64, lo: f64, hi: f64, tol: f64) -> f64 {
    let mut a = lo;
    let mut b = hi;
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if f(mid) >= target {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_finds_quadratic_minimum() {
        let out = nelder_mead(
            |p| (p[0] - 1.5).powi(2) + 2.0 * (p[1] + 0.5).powi(2) + 3.0,
            &[0.0, 0.0],
            &[0.5, 0.5],
            1e-12,
            500,
        );
        assert!((out.x[0] - 1.5).abs() < 1e-5);
        assert!((out.x[1] + 0.5).abs() < 1e-5);
        assert!((out.value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn simplex_recovers_from_infeasible_region() {
        // Left half-plane is forbidden; the minimum sits at x = 2.
        let out = nelder_mead(
            |p| {
                if p[0] < 0.0 {
                    f64::INFINITY
                } else {
                    (p[0] - 2.0).powi(2)
                }
            },
            &[-0.4, 0.0],
            &[0.5, 0.5],
            1e-12,
            500,
        );
        assert!((out.x[0] - 2.0).abs() < 1e-4, "{:?}", out.x);
    }

    #[test]
    fn golden_finds_peak() {
        let (x, v) = golden_max(|x| -(x - 0.7).powi(2) + 2.0, 0.0, 3.0, 1e-10);
        assert!((x - 0.7).abs() < 1e-7);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bisection_hits_target() {
        let x = bisect_decreasing(|x| (-x).exp(), 0.5, 0.0, 10.0, 1e-12);
        assert!((x - 2.0_f64.ln()).abs() < 1e-10);
    }
}
