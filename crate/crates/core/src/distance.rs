//! Relative-entropy distance from a two-mode Gaussian state to the
//! three-parameter family of Gaussian states sitting on the separability
//! boundary, found by multi-start derivative-free minimization.

use std::cell::RefCell;

use nalgebra::{Matrix4, Vector4};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::gaussian::{gaussian_entropy, williamson, StdFormVariance};
use crate::optim::nelder_mead;

/// Candidate boundary states below this distance from a pure symplectic
/// direction are rejected: the relative entropy is genuinely infinite there.
const NU_MIXED_FLOOR: f64 = 1e-8;

/// Controls for the multi-start simplex minimization.
#[derive(Debug, Clone, Copy)]
pub struct MinimizerConfig {
    pub n_starts: usize,
    pub simplex_tol: f64,
    pub max_iters: usize,
    /// Seed for the deterministic start perturbations.
    pub seed: u64,
}

impl MinimizerConfig {
    pub fn new(n_starts: usize, simplex_tol: f64, max_iters: usize, seed: u64) -> Result<Self> {
        if n_starts < 4 {
            return Err(CoreError::Domain(format!(
                "n_starts must be >= 4, got {n_starts}"
            )));
        }
        if !(simplex_tol > 0.0 && simplex_tol <= 1e-8) {
            return Err(CoreError::Domain(format!(
                "simplex_tol must lie in (0, 1e-8], got {simplex_tol}"
            )));
        }
        Ok(Self {
            n_starts,
            simplex_tol,
            max_iters,
            seed,
        })
    }

    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

impl Default for MinimizerConfig {
    fn default() -> Self {
        Self {
            n_starts: 8,
            simplex_tol: 1e-9,
            max_iters: 2000,
            seed: 42,
        }
    }
}

/// Which root of the boundary quadratic produced a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootBranch {
    Plus,
    Minus,
}

/// A Gaussian state on the separability boundary: three free parameters and
/// the dependent covariance solved from the boundary equality.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryPoint {
    pub x_s: f64,
    pub y_s: f64,
    pub z1_s: f64,
    pub z2_s: f64,
    pub root_branch: RootBranch,
}

impl BoundaryPoint {
    pub fn variance(&self) -> Result<StdFormVariance> {
        StdFormVariance::new(self.x_s, self.y_s, self.z1_s, self.z2_s)
    }
}

/// Solve the boundary equality for |z2| given (x, y, z1): the roots of
/// A u^2 + 2|z1| u + (x^2 + y^2 - 1/4 - A x y) = 0 with A = 4(x y - z1^2).
/// Returns each real nonnegative root as a signed z2 opposite to z1,
/// filtered by physicality of the resulting variance matrix.
pub fn boundary_z2(x_s: f64, y_s: f64, z1_s: f64) -> Vec<(f64, RootBranch)> {
    if x_s < 0.5 || y_s < 0.5 {
        return Vec::new();
    }
    let a = 4.0 * (x_s * y_s - z1_s * z1_s);
    let b = 2.0 * z1_s.abs();
    let c = x_s * x_s + y_s * y_s - 0.25 - a * x_s * y_s;
    let mut magnitudes: Vec<(f64, RootBranch)> = Vec::new();
    if a.abs() < 1e-14 {
        if b > 0.0 {
            let u = -c / b;
            if u >= -1e-15 {
                magnitudes.push((u.max(0.0), RootBranch::Plus));
            }
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let root = disc.sqrt();
            for (sign, branch) in [(1.0, RootBranch::Plus), (-1.0, RootBranch::Minus)] {
                let u = (-b + sign * root) / (2.0 * a);
                if u >= -1e-15 {
                    magnitudes.push((u.max(0.0), branch));
                }
            }
            // A vanishing discriminant yields the same root twice.
            if magnitudes.len() == 2 && (magnitudes[0].0 - magnitudes[1].0).abs() < 1e-12 {
                magnitudes.truncate(1);
            }
        }
    }
    let z2_sign = if z1_s >= 0.0 { -1.0 } else { 1.0 };
    magnitudes
        .into_iter()
        .filter_map(|(u, branch)| {
            let z2 = z2_sign * u;
            StdFormVariance::new(x_s, y_s, z1_s, z2)
                .ok()
                .map(|_| (z2, branch))
        })
        .collect()
}

/// Relative entropy Tr rho (ln rho - ln sigma), in nats, between two
/// zero-mean Gaussian states given by their standard-form variances. The
/// reference state must be strictly mixed in every symplectic direction.
pub fn relative_entropy_gaussian(
    rho_v: &StdFormVariance,
    sigma_v: &StdFormVariance,
) -> Result<f64> {
    let sigma_spectrum = sigma_v.symplectic_spectrum()?;
    if sigma_spectrum.nu_minus() <= 0.5 + 1e-10 {
        return Err(CoreError::Domain(format!(
            "reference state must be strictly mixed, nu_min = {}",
            sigma_spectrum.nu_minus()
        )));
    }
    let w = williamson(sigma_v)?;
    let nus = [w.spectrum.nu_minus(), w.spectrum.nu_plus()];
    let gibbs: Vec<f64> = nus
        .iter()
        .map(|nu| ((nu + 0.5) / (nu - 0.5)).ln())
        .collect();
    let m_inv = w
        .transform
        .try_inverse()
        .ok_or_else(|| CoreError::IllConditioned("singular symplectic transform".into()))?;
    let g_diag = Matrix4::from_diagonal(&Vector4::new(gibbs[0], gibbs[0], gibbs[1], gibbs[1]));
    let g_sigma = m_inv.transpose() * g_diag * m_inv;
    let tr_gv = (g_sigma * rho_v.matrix()).trace();
    let log_norm: f64 = nus.iter().map(|nu| -0.5 * (nu * nu - 0.25).ln()).sum();
    let value = -gaussian_entropy(rho_v) - (log_norm - 0.5 * tr_gv);
    if value < -1e-9 {
        return Err(CoreError::Inconsistency(format!(
            "relative entropy evaluated to {value:e}"
        )));
    }
    Ok(value)
}

/// Result of the boundary-distance minimization.
#[derive(Debug, Clone)]
pub struct DistanceResult {
    /// The distance, in nats, clamped at zero.
    pub e_nats: f64,
    /// The best boundary state found; absent for pure inputs, where the
    /// closed-form reduction is used instead of a search.
    pub argmin: Option<BoundaryPoint>,
    /// Total number of objective evaluations across all starts.
    pub n_evaluations: usize,
    /// Whether the two best starts agreed to 10x the simplex tolerance.
    pub converged: bool,
}

/// States with both symplectic eigenvalues this close to 1/2 are treated as
/// pure and routed to the exact reduction.
const PURITY_TOL: f64 = 1e-9;

/// Entanglement, measured by the relative-entropy distance to separable
/// states, of a two-mode Gaussian state in standard form.
///
/// For pure inputs the distance to the full separable set equals the von
/// Neumann entropy of either reduced mode, and the state realizing it is not
/// Gaussian; the closed form is used directly because a search over boundary
/// Gaussian states would strictly overshoot there. Mixed inputs are handled
/// by multi-start simplex minimization over the three-parameter family of
/// boundary states.
pub fn distance_to_separable(
    rho_v: &StdFormVariance,
    cfg: &MinimizerConfig,
) -> Result<DistanceResult> {
    let rho_spectrum = rho_v.symplectic_spectrum()?;
    if rho_spectrum.nu_plus() <= 0.5 + PURITY_TOL {
        // Pure state: the reduced mode of a standard-form pure state has
        // symplectic eigenvalue x, so its entropy is available in closed
        // form.
        return Ok(DistanceResult {
            e_nats: crate::gaussian::mode_entropy(rho_v.x()),
            argmin: None,
            n_evaluations: 0,
            converged: true,
        });
    }

    let best: RefCell<Option<(f64, BoundaryPoint)>> = RefCell::new(None);

    // The simplex walks (ln(nu1 - 1/2), ln(nu2 - 1/2), r): the candidate
    // (x, y, z1) is the two-mode squeeze of a diagonal pair, so one step in
    // r slides along the strongly correlated valley that dominates the
    // landscape for squeezed inputs, and the vacuum floor is respected by
    // construction. The map is a bijection onto z1 < (x + y)/2, which
    // contains every physical candidate.
    let z_sign = if rho_v.z1() < 0.0 { -1.0 } else { 1.0 };
    let objective = |p: &[f64]| -> f64 {
        if p.iter().any(|v| !v.is_finite()) {
            return f64::INFINITY;
        }
        let nu1 = 0.5 + p[0].exp();
        let nu2 = 0.5 + p[1].exp();
        let ch2 = (2.0 * p[2]).cosh();
        let sh2 = (2.0 * p[2]).sinh();
        let x = 0.5 * ((nu1 + nu2) * ch2 + (nu1 - nu2));
        let y = 0.5 * ((nu1 + nu2) * ch2 - (nu1 - nu2));
        let z1 = z_sign * 0.5 * (nu1 + nu2) * sh2;
        if !(x.is_finite() && y.is_finite() && z1.is_finite()) {
            return f64::INFINITY;
        }
        let mut local_best = f64::INFINITY;
        for (z2, branch) in boundary_z2(x, y, z1) {
            let Ok(sigma) = StdFormVariance::new(x, y, z1, z2) else {
                continue;
            };
            let Ok(spectrum) = sigma.symplectic_spectrum() else {
                continue;
            };
            if spectrum.nu_minus() <= 0.5 + NU_MIXED_FLOOR {
                continue;
            }
            let Ok(value) = relative_entropy_gaussian(rho_v, &sigma) else {
                continue;
            };
            if value < local_best {
                local_best = value;
                let mut slot = best.borrow_mut();
                if slot.as_ref().is_none_or(|(v, _)| value < *v) {
                    *slot = Some((
                        value,
                        BoundaryPoint {
                            x_s: x,
                            y_s: y,
                            z1_s: z1,
                            z2_s: z2,
                            root_branch: branch,
                        },
                    ));
                }
            }
        }
        local_best
    };

    let log_excess = |v: f64| (v - 0.5).max(1e-9).ln();
    // Inverse of the squeeze chart for the seed points (x, y, z1).
    let chart_coords = |x: f64, y: f64, z1: f64| -> [f64; 3] {
        let sum = ((x + y) * (x + y) - 4.0 * z1 * z1).max(1e-300).sqrt();
        let nu1 = 0.5 * (sum + (x - y));
        let nu2 = 0.5 * (sum - (x - y));
        let r = 0.5 * (2.0 * z1.abs() / sum).asinh();
        [log_excess(nu1), log_excess(nu2), r]
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let fractions = [0.0, 0.25, 0.5, 0.75];
    let mut start_values = Vec::with_capacity(cfg.n_starts);
    let mut n_evaluations = 0usize;
    for i in 0..cfg.n_starts {
        let t = fractions[i % fractions.len()];
        let mut seed = [rho_v.x(), rho_v.y(), t * rho_v.z1()];
        if i >= fractions.len() {
            // Perturbed copies keep the search off degenerate seeds.
            seed[0] = seed[0] * (1.0 + 0.1 * rng.random_range(0.0..1.0))
                + 0.02 * rng.random_range(0.0..1.0);
            seed[1] = seed[1] * (1.0 + 0.1 * rng.random_range(0.0..1.0))
                + 0.02 * rng.random_range(0.0..1.0);
            seed[2] *= 1.0 + 0.2 * (rng.random_range(0.0..1.0) - 0.5);
        }
        let mut incumbent = chart_coords(seed[0], seed[1], seed[2]);
        let mut incumbent_value = f64::INFINITY;
        // Restart from the incumbent with a fresh full-size simplex until a
        // round stops improving: a collapsed simplex partway down the
        // valley would otherwise stall the start.
        for _round in 0..8 {
            let steps = [0.25, 0.25, 0.25];
            let outcome = nelder_mead(
                objective,
                &incumbent,
                &steps,
                cfg.simplex_tol,
                cfg.max_iters,
            );
            n_evaluations += outcome.evaluations;
            let improved = outcome.value.is_finite()
                && (!incumbent_value.is_finite()
                    || outcome.value
                        < incumbent_value
                            - 10.0 * cfg.simplex_tol * incumbent_value.abs().max(1.0));
            if outcome.value < incumbent_value {
                incumbent_value = outcome.value;
                incumbent = [outcome.x[0], outcome.x[1], outcome.x[2]];
            }
            if !improved {
                break;
            }
        }
        start_values.push(incumbent_value);
    }

    let Some((raw, argmin)) = best.into_inner() else {
        return Err(CoreError::NoFeasiblePoint);
    };
    start_values.sort_by(|a, b| a.total_cmp(b));
    let converged = start_values.len() >= 2
        && start_values[1].is_finite()
        && (start_values[1] - start_values[0]).abs()
            <= 10.0 * cfg.simplex_tol * start_values[0].abs().max(1.0);
    Ok(DistanceResult {
        e_nats: raw.max(0.0),
        argmin: Some(argmin),
        n_evaluations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::tmsv_entropy;
    use crate::gaussian::{
        propagate_tmsv, simon_separable, to_std_form, ChannelPair, SimonClass, TmsvParams,
    };

    fn propagated(q: f64, t1: f64, t2: f64) -> StdFormVariance {
        let p = TmsvParams::from_q_mag(q).unwrap();
        let ch = ChannelPair::new(t1, t2).unwrap();
        to_std_form(&propagate_tmsv(&p, &ch))
    }

    #[test]
    fn boundary_roots_known_cases() {
        // Vacuum parameters close onto the vacuum itself.
        let roots = boundary_z2(0.5, 0.5, 0.0);
        assert_eq!(roots.len(), 1);
        assert!(roots[0].0.abs() < 1e-12);

        // (1, 1, 0): 4(1 - u^2) = 2 - 1/4, so |z2| = 3/4.
        let roots = boundary_z2(1.0, 1.0, 0.0);
        assert_eq!(roots.len(), 1);
        assert!((roots[0].0 + 0.75).abs() < 1e-12, "z2 = {}", roots[0].0);
    }

    #[test]
    fn boundary_roots_sit_on_boundary() {
        for (x, y, z1) in [(0.8, 0.9, 0.2), (1.5, 1.5, 0.7), (2.0, 0.9, -0.4)] {
            for (z2, _) in boundary_z2(x, y, z1) {
                let v = StdFormVariance::new(x, y, z1, z2).unwrap();
                let r = simon_separable(&v);
                assert!(
                    r.margin.abs() < 1e-10,
                    "({x},{y},{z1},{z2}) margin {}",
                    r.margin
                );
                assert_eq!(r.class, SimonClass::Boundary);
            }
        }
    }

    #[test]
    fn relative_entropy_of_state_with_itself_vanishes() {
        let v = propagated(0.6, 0.8, 0.7);
        let e = relative_entropy_gaussian(&v, &v).unwrap();
        assert!(e.abs() < 1e-9, "{e}");
    }

    #[test]
    fn distance_vanishes_exactly_on_separable_states() {
        let cfg = MinimizerConfig::default();
        for q in [0.46, 0.9] {
            for t in [0.0, 0.5, 0.9] {
                let v = propagated(q, t, t);
                let separable = !matches!(simon_separable(&v).class, SimonClass::Inseparable);
                let d = distance_to_separable(&v, &cfg).unwrap().e_nats;
                if separable {
                    assert!(d < 1e-6, "q={q} t={t}: separable but distance {d}");
                } else {
                    assert!(d > 1e-6, "q={q} t={t}: inseparable but distance {d}");
                }
            }
        }
    }

    #[test]
    fn relative_entropy_vacuum_to_double_thermal() {
        let vac = StdFormVariance::new(0.5, 0.5, 0.0, 0.0).unwrap();
        let th = StdFormVariance::new(1.5, 1.5, 0.0, 0.0).unwrap();
        let e = relative_entropy_gaussian(&vac, &th).unwrap();
        assert!((e - 2.0 * 2.0_f64.ln()).abs() < 1e-10, "{e}");
    }

    #[test]
    fn relative_entropy_rejects_pure_reference() {
        let v = propagated(0.6, 0.8, 0.7);
        let pure = StdFormVariance::new(0.5, 0.5, 0.0, 0.0).unwrap();
        assert!(relative_entropy_gaussian(&v, &pure).is_err());
    }

    #[test]
    fn relative_entropy_asymmetry() {
        let a = StdFormVariance::new(1.0, 1.0, 0.3, -0.3).unwrap();
        let b = StdFormVariance::new(1.3, 0.9, 0.1, -0.2).unwrap();
        let ab = relative_entropy_gaussian(&a, &b).unwrap();
        let ba = relative_entropy_gaussian(&b, &a).unwrap();
        assert!(ab > 0.0 && ba > 0.0);
        assert!((ab - ba).abs() > 1e-6);
    }

    #[test]
    fn distance_of_vacuum_is_zero() {
        let vac = propagated(0.6, 0.0, 0.0);
        let cfg = MinimizerConfig::default();
        let r = distance_to_separable(&vac, &cfg).unwrap();
        assert!(r.e_nats < 1e-9, "distance {}", r.e_nats);
        assert!(r.argmin.is_none());
    }

    #[test]
    fn distance_of_nearly_dead_channels_is_tiny() {
        // Barely mixed, barely inseparable: the search has to settle right
        // against the strictly-mixed floor.
        let v = propagated(0.3, 0.05, 0.05);
        let cfg = MinimizerConfig::default();
        let r = distance_to_separable(&v, &cfg).unwrap();
        assert!(r.e_nats >= 0.0);
        assert!(r.e_nats < 1e-4, "distance {}", r.e_nats);
        assert!(r.argmin.is_some());
        assert!(r.n_evaluations > 0);
    }

    #[test]
    fn distance_of_lossless_source_matches_entropy() {
        let q = std::f64::consts::FRAC_1_SQRT_2;
        let v = propagated(q, 1.0, 1.0);
        let cfg = MinimizerConfig::default();
        let r = distance_to_separable(&v, &cfg).unwrap();
        let want = tmsv_entropy(q).unwrap();
        assert!(
            (r.e_nats - want).abs() < 1e-10,
            "distance {} vs {want}",
            r.e_nats
        );
        assert!(r.argmin.is_none());
    }

    #[test]
    fn boundary_search_overshoots_at_the_pure_limit() {
        // Regression for the barely-mixed regime: the closest boundary
        // Gaussian state sits a few percent above the pure-state value,
        // because the separable state realizing the pure-state distance is
        // not Gaussian. The jump at exact purity is intentional.
        let q = std::f64::consts::FRAC_1_SQRT_2;
        let v = propagated(q, 0.9999, 0.9999);
        let cfg = MinimizerConfig::default();
        let r = distance_to_separable(&v, &cfg).unwrap();
        assert!(r.argmin.is_some());
        assert!(
            r.e_nats > 1.40 && r.e_nats < 1.44,
            "boundary-restricted distance {}",
            r.e_nats
        );
    }

    #[test]
    fn distance_stable_under_more_starts() {
        let q = std::f64::consts::FRAC_1_SQRT_2;
        let v = propagated(q, 0.8187307530779818, 0.8187307530779818);
        let cfg8 = MinimizerConfig::default();
        let cfg16 = MinimizerConfig {
            n_starts: 16,
            ..cfg8
        };
        let a = distance_to_separable(&v, &cfg8).unwrap();
        let b = distance_to_separable(&v, &cfg16).unwrap();
        assert!(
            (a.e_nats - b.e_nats).abs() <= 2.0 * cfg8.simplex_tol * a.e_nats.max(1.0),
            "{} vs {}",
            a.e_nats,
            b.e_nats
        );
        assert!(a.converged);
    }

    #[test]
    fn distance_decreases_with_length() {
        let q = std::f64::consts::FRAC_1_SQRT_2;
        let cfg = MinimizerConfig::default();
        let mut prev = f64::INFINITY;
        for i in 0..10 {
            let l = 0.05 + 0.1 * i as f64;
            let t = (-l).exp();
            let r = distance_to_separable(&propagated(q, t, t), &cfg).unwrap();
            assert!(
                r.e_nats <= prev + 1e-6,
                "distance not monotone at l = {l}: {} vs {prev}",
                r.e_nats
            );
            prev = r.e_nats;
        }
    }

    #[test]
    fn minimizer_config_validation() {
        assert!(MinimizerConfig::new(3, 1e-9, 100, 0).is_err());
        assert!(MinimizerConfig::new(4, 1e-7, 100, 0).is_err());
        assert!(MinimizerConfig::new(4, 1e-9, 100, 0).is_ok());
    }
}
