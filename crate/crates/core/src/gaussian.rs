//! Two-mode Gaussian states: lossy propagation of the two-mode squeezed
//! vacuum, standard-form variance matrices, the Simon separability
//! classification, symplectic spectra, Williamson decomposition and the
//! Gaussian von Neumann entropy.
//!
//! Conventions: vacuum quadrature variance 1/2, symplectic eigenvalue 1/2,
//! entropies in nats. Quadrature ordering is (x1, p1, x2, p2). The squeezing
//! amplitude is q = tanh|zeta|, so the mean photon number per mode is
//! sinh^2|zeta| = q^2/(1-q^2).

use nalgebra::{Matrix4, SymmetricEigen, Vector4};

use crate::error::{CoreError, Result};

/// Tolerance on the physicality bound nu_min >= 1/2.
pub const PHYSICALITY_TOL: f64 = 1e-12;

/// Symplectic form for the (x1, p1, x2, p2) ordering.
pub fn symplectic_form() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0, 0.0,
    )
}

/// Amplitude transmission of a fiber of length `l` with absorption length
/// `l_abs`, following the exponential extinction law.
pub fn transmission_from_length(l: f64, l_abs: f64) -> Result<f64> {
    if !(l >= 0.0) {
        return Err(CoreError::Domain(format!("length must be >= 0, got {l}")));
    }
    if !(l_abs > 0.0) {
        return Err(CoreError::Domain(format!(
            "absorption length must be > 0, got {l_abs}"
        )));
    }
    Ok((-l / l_abs).exp())
}

/// Transmission coefficients of the two fibers, magnitudes and phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPair {
    t1_mag: f64,
    t2_mag: f64,
    t1_phase: f64,
    t2_phase: f64,
}

impl ChannelPair {
    pub fn new(t1_mag: f64, t2_mag: f64) -> Result<Self> {
        Self::with_phases(t1_mag, t2_mag, 0.0, 0.0)
    }

    pub fn with_phases(t1_mag: f64, t2_mag: f64, t1_phase: f64, t2_phase: f64) -> Result<Self> {
        for (label, t) in [("|T1|", t1_mag), ("|T2|", t2_mag)] {
            if !(0.0..=1.0).contains(&t) {
                return Err(CoreError::Domain(format!(
                    "{label} must lie in [0, 1], got {t}"
                )));
            }
        }
        Ok(Self {
            t1_mag,
            t2_mag,
            t1_phase,
            t2_phase,
        })
    }

    /// Equal fibers on both arms.
    pub fn symmetric(t_mag: f64) -> Result<Self> {
        Self::new(t_mag, t_mag)
    }

    /// Channels from fiber lengths and a common absorption length.
    pub fn from_lengths(l1: f64, l2: f64, l_abs: f64) -> Result<Self> {
        Self::new(
            transmission_from_length(l1, l_abs)?,
            transmission_from_length(l2, l_abs)?,
        )
    }

    pub fn t1_mag(&self) -> f64 {
        self.t1_mag
    }
    pub fn t2_mag(&self) -> f64 {
        self.t2_mag
    }
    pub fn t1_phase(&self) -> f64 {
        self.t1_phase
    }
    pub fn t2_phase(&self) -> f64 {
        self.t2_phase
    }
}

/// Squeezing parameters of the source state: magnitude |zeta| and phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TmsvParams {
    zeta_mag: f64,
    phi: f64,
}

impl TmsvParams {
    pub fn new(zeta_mag: f64) -> Result<Self> {
        Self::with_phase(zeta_mag, 0.0)
    }

    pub fn with_phase(zeta_mag: f64, phi: f64) -> Result<Self> {
        if !(zeta_mag >= 0.0) {
            return Err(CoreError::Domain(format!(
                "|zeta| must be >= 0, got {zeta_mag}"
            )));
        }
        Ok(Self { zeta_mag, phi })
    }

    /// Parameters giving the requested squeezing amplitude q = tanh|zeta|.
    pub fn from_q_mag(q: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&q) {
            return Err(CoreError::Domain(format!("q must lie in [0, 1), got {q}")));
        }
        Self::new(q.atanh())
    }

    /// Parameters giving the requested mean photon number per mode.
    pub fn from_mean_photons(nbar: f64) -> Result<Self> {
        if !(nbar >= 0.0) {
            return Err(CoreError::Domain(format!("nbar must be >= 0, got {nbar}")));
        }
        Self::from_q_mag((nbar / (nbar + 1.0)).sqrt())
    }

    pub fn zeta_mag(&self) -> f64 {
        self.zeta_mag
    }
    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Squeezing amplitude q = tanh|zeta|.
    pub fn q_mag(&self) -> f64 {
        self.zeta_mag.tanh()
    }

    /// Mean photon number per mode, sinh^2|zeta|.
    pub fn mean_photons(&self) -> f64 {
        let s = self.zeta_mag.sinh();
        s * s
    }
}

/// Exponent coefficients of the transmitted two-mode Gaussian state, plus
/// the normalization factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeGaussianState {
    c1: f64,
    c2: f64,
    s_mag: f64,
    s_phase: f64,
    norm_n: f64,
}

impl TwoModeGaussianState {
    pub fn new(c1: f64, c2: f64, s_mag: f64, s_phase: f64, norm_n: f64) -> Result<Self> {
        if !(c1 > 0.0 && c2 > 0.0) {
            return Err(CoreError::Domain(format!(
                "C1, C2 must be > 0, got {c1}, {c2}"
            )));
        }
        if !(norm_n >= 1.0 - 1e-12) {
            return Err(CoreError::Domain(format!(
                "normalization must be >= 1, got {norm_n}"
            )));
        }
        let resid = (c1 * c2 - s_mag * s_mag - 1.0 / norm_n).abs();
        if resid > 1e-10 {
            return Err(CoreError::Inconsistency(format!(
                "C1*C2 - |S|^2 must equal 1/N, residual {resid:e}"
            )));
        }
        Ok(Self {
            c1,
            c2,
            s_mag,
            s_phase,
            norm_n,
        })
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }
    pub fn c2(&self) -> f64 {
        self.c2
    }
    pub fn s_mag(&self) -> f64 {
        self.s_mag
    }
    pub fn s_phase(&self) -> f64 {
        self.s_phase
    }
    pub fn norm_n(&self) -> f64 {
        self.norm_n
    }
}

/// Transmit the two-mode squeezed vacuum through the pair of fibers.
pub fn propagate_tmsv(params: &TmsvParams, ch: &ChannelPair) -> TwoModeGaussianState {
    let ch2 = (2.0 * params.zeta_mag()).cosh();
    let sh2 = (2.0 * params.zeta_mag()).sinh();
    let t1sq = ch.t1_mag() * ch.t1_mag();
    let t2sq = ch.t2_mag() * ch.t2_mag();
    let norm_n = 1.0 + (t1sq + t2sq - 2.0 * t1sq * t2sq) * (ch2 - 1.0);
    let c1 = (1.0 + t1sq * (ch2 - 1.0)) / norm_n;
    let c2 = (1.0 + t2sq * (ch2 - 1.0)) / norm_n;
    let s_mag = ch.t1_mag() * ch.t2_mag() * sh2 / norm_n;
    let s_phase = params.phi() + ch.t1_phase() + ch.t2_phase();
    TwoModeGaussianState {
        c1,
        c2,
        s_mag,
        s_phase,
        norm_n,
    }
}

/// Standard-form variance matrix, parameterized by (x, y, z1, z2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StdFormVariance {
    x: f64,
    y: f64,
    z1: f64,
    z2: f64,
}

impl StdFormVariance {
    /// Validates physicality: x, y >= 1/2 and nu_min >= 1/2 (to tolerance).
    pub fn new(x: f64, y: f64, z1: f64, z2: f64) -> Result<Self> {
        if !(x >= 0.5 - PHYSICALITY_TOL && y >= 0.5 - PHYSICALITY_TOL) {
            return Err(CoreError::Domain(format!(
                "diagonal variances must be >= 1/2, got x = {x}, y = {y}"
            )));
        }
        let v = Self { x, y, z1, z2 };
        let spectrum = v.symplectic_spectrum()?;
        if spectrum.nu_minus() < 0.5 - PHYSICALITY_TOL {
            return Err(CoreError::Domain(format!(
                "unphysical variance matrix: nu_min = {} < 1/2",
                spectrum.nu_minus()
            )));
        }
        Ok(v)
    }

    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn y(&self) -> f64 {
        self.y
    }
    pub fn z1(&self) -> f64 {
        self.z1
    }
    pub fn z2(&self) -> f64 {
        self.z2
    }

    /// The 4x4 variance matrix in the (x1, p1, x2, p2) ordering.
    pub fn matrix(&self) -> Matrix4<f64> {
        Matrix4::new(
            self.x, 0.0, self.z1, 0.0, //
            0.0, self.x, 0.0, self.z2, //
            self.z1, 0.0, self.y, 0.0, //
            0.0, self.z2, 0.0, self.y,
        )
    }

    pub fn det(&self) -> f64 {
        (self.x * self.y - self.z1 * self.z1) * (self.x * self.y - self.z2 * self.z2)
    }

    pub fn symplectic_spectrum(&self) -> Result<SymplecticSpectrum> {
        symplectic_spectrum_raw(self.x, self.y, self.z1, self.z2)
    }
}

/// Standard form of the transmitted state.
pub fn to_std_form(state: &TwoModeGaussianState) -> StdFormVariance {
    let half_n = 0.5 * state.norm_n();
    StdFormVariance {
        x: half_n * state.c1(),
        y: half_n * state.c2(),
        z1: half_n * state.s_mag(),
        z2: -half_n * state.s_mag(),
    }
}

/// Symplectic eigenvalues of a two-mode variance matrix, nu_plus >= nu_minus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticSpectrum {
    nu_plus: f64,
    nu_minus: f64,
}

impl SymplecticSpectrum {
    pub fn nu_plus(&self) -> f64 {
        self.nu_plus
    }
    pub fn nu_minus(&self) -> f64 {
        self.nu_minus
    }
}

fn symplectic_spectrum_raw(x: f64, y: f64, z1: f64, z2: f64) -> Result<SymplecticSpectrum> {
    // Closed two-mode formula: nu^2 = (delta +- sqrt(delta^2 - 4 det V)) / 2
    // with delta = det A + det B + 2 det C.
    let delta = x * x + y * y + 2.0 * z1 * z2;
    let det_v = (x * y - z1 * z1) * (x * y - z2 * z2);
    let disc = delta * delta - 4.0 * det_v;
    if disc < -1e-12 {
        return Err(CoreError::NumericalDegeneracy(format!(
            "negative symplectic discriminant {disc:e}"
        )));
    }
    let root = disc.max(0.0).sqrt();
    let nu_plus_sq = 0.5 * (delta + root);
    let nu_minus_sq = 0.5 * (delta - root);
    if nu_minus_sq < -1e-12 {
        return Err(CoreError::NumericalDegeneracy(format!(
            "negative squared symplectic eigenvalue {nu_minus_sq:e}"
        )));
    }
    Ok(SymplecticSpectrum {
        nu_plus: nu_plus_sq.max(0.0).sqrt(),
        nu_minus: nu_minus_sq.max(0.0).sqrt(),
    })
}

/// Convenience wrapper over [`StdFormVariance::symplectic_spectrum`].
pub fn symplectic_spectrum(v: &StdFormVariance) -> Result<SymplecticSpectrum> {
    v.symplectic_spectrum()
}

/// Outcome of the separability classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimonClass {
    Separable,
    Boundary,
    Inseparable,
}

/// Classification together with the signed margin of the inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimonResult {
    pub class: SimonClass,
    pub margin: f64,
}

/// Separability of a two-mode Gaussian state in standard form. The margin is
/// the left-hand side minus the right-hand side of the separability
/// inequality; nonnegative margins are separable.
pub fn simon_separable(v: &StdFormVariance) -> SimonResult {
    let (x, y, z1, z2) = (v.x(), v.y(), v.z1(), v.z2());
    let lhs = 4.0 * (x * y - z1 * z1) * (x * y - z2 * z2);
    let rhs = x * x + y * y + 2.0 * (z1 * z2).abs() - 0.25;
    let margin = lhs - rhs;
    let class = if margin.abs() < 1e-12 {
        SimonClass::Boundary
    } else if margin > 0.0 {
        SimonClass::Separable
    } else {
        SimonClass::Inseparable
    };
    SimonResult { class, margin }
}

/// Entropy contribution, in nats, of one symplectic mode of size `nu`;
/// zero in the pure limit nu = 1/2.
pub fn mode_entropy(nu: f64) -> f64 {
    let up = nu + 0.5;
    let down = nu - 0.5;
    if down <= 1e-14 {
        return 0.0;
    }
    up * up.ln() - down * down.ln()
}

/// Von Neumann entropy of the Gaussian state, in nats, from its symplectic
/// spectrum. Pure directions (nu = 1/2) contribute zero.
pub fn gaussian_entropy(v: &StdFormVariance) -> f64 {
    // Physicality is guaranteed by construction, so the spectrum exists.
    let s = v
        .symplectic_spectrum()
        .expect("validated variance matrix has a spectrum");
    mode_entropy(s.nu_plus()) + mode_entropy(s.nu_minus())
}

/// Result of the Williamson normal-form factorization V = M D M^T with M
/// symplectic and D = diag(nu_minus, nu_minus, nu_plus, nu_plus).
#[derive(Debug, Clone)]
pub struct WilliamsonDecomposition {
    pub transform: Matrix4<f64>,
    pub spectrum: SymplecticSpectrum,
}

const WILLIAMSON_RESID_TOL: f64 = 1e-9;

/// Williamson decomposition of a standard-form variance matrix.
pub fn williamson(v: &StdFormVariance) -> Result<WilliamsonDecomposition> {
    let spectrum = v.symplectic_spectrum()?;

    // Diagonal matrices are already in normal form up to a mode swap.
    if v.z1().abs() < 1e-14 && v.z2().abs() < 1e-14 {
        let transform = if v.x() <= v.y() {
            Matrix4::identity()
        } else {
            // Swap the two modes so the smaller eigenvalue comes first.
            Matrix4::new(
                0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0,
            )
        };
        return Ok(WilliamsonDecomposition {
            transform,
            spectrum,
        });
    }

    let m = v.matrix();
    let eig = SymmetricEigen::new(m);
    for &lambda in eig.eigenvalues.iter() {
        if lambda <= 0.0 {
            return Err(CoreError::IllConditioned(format!(
                "variance matrix not positive definite (eigenvalue {lambda:e})"
            )));
        }
    }
    let sqrt_vals = Vector4::from_iterator(eig.eigenvalues.iter().map(|l| l.sqrt()));
    let inv_sqrt_vals = Vector4::from_iterator(eig.eigenvalues.iter().map(|l| 1.0 / l.sqrt()));
    let basis = eig.eigenvectors;
    let v_sqrt = basis * Matrix4::from_diagonal(&sqrt_vals) * basis.transpose();
    let v_inv_sqrt = basis * Matrix4::from_diagonal(&inv_sqrt_vals) * basis.transpose();

    // W = V^{-1/2} Omega V^{-1/2} is antisymmetric with eigenfrequencies
    // kappa_i = 1/nu_i; -W^2 is symmetric positive with doubly degenerate
    // eigenvalues kappa_i^2.
    let omega = symplectic_form();
    let w = v_inv_sqrt * omega * v_inv_sqrt;
    let w2 = -(w * w);
    let eig2 = SymmetricEigen::new(w2);

    let mut order: Vec<usize> = (0..4).collect();
    // Largest kappa first, i.e. smallest symplectic eigenvalue first.
    order.sort_by(|&a, &b| eig2.eigenvalues[b].total_cmp(&eig2.eigenvalues[a]));

    let mut columns: Vec<Vector4<f64>> = Vec::with_capacity(4);
    let mut nus = [0.0_f64; 2];
    for mode in 0..2 {
        let kappa_sq = eig2.eigenvalues[order[2 * mode]];
        if kappa_sq <= 0.0 {
            return Err(CoreError::IllConditioned(
                "nonpositive symplectic frequency".into(),
            ));
        }
        let kappa = kappa_sq.sqrt();
        nus[mode] = 1.0 / kappa;
        // Pick a representative eigenvector and orthogonalize it against the
        // plane already used by the previous mode.
        let mut u: Vector4<f64> = eig2.eigenvectors.column(order[2 * mode]).into_owned();
        for c in &columns {
            u -= c * c.dot(&u);
        }
        if u.norm() < 1e-8 {
            u = eig2.eigenvectors.column(order[2 * mode + 1]).into_owned();
            for c in &columns {
                u -= c * c.dot(&u);
            }
        }
        if u.norm() < 1e-8 {
            return Err(CoreError::IllConditioned(
                "failed to build an orthogonal symplectic plane".into(),
            ));
        }
        u /= u.norm();
        let u_tilde = (w * u) / kappa;
        columns.push(u_tilde);
        columns.push(u);
    }

    let mut o = Matrix4::zeros();
    for (j, c) in columns.iter().enumerate() {
        o.set_column(j, c);
    }
    let d_inv_sqrt = Matrix4::from_diagonal(&Vector4::new(
        1.0 / nus[0].sqrt(),
        1.0 / nus[0].sqrt(),
        1.0 / nus[1].sqrt(),
        1.0 / nus[1].sqrt(),
    ));
    let transform = v_sqrt * o * d_inv_sqrt;

    // Verify both defining properties before handing the transform out. The
    // reconstruction residual is scaled by the size of V; the symplectic
    // residual is against the unit-scale form.
    let d = Matrix4::from_diagonal(&Vector4::new(nus[0], nus[0], nus[1], nus[1]));
    let resid_v = (transform * d * transform.transpose() - m).abs().max();
    let resid_omega = (transform.transpose() * omega * transform - omega)
        .abs()
        .max();
    let v_scale = m.abs().max().max(1.0);
    if resid_v > WILLIAMSON_RESID_TOL * v_scale || resid_omega > WILLIAMSON_RESID_TOL {
        return Err(CoreError::IllConditioned(format!(
            "normal-form residuals too large: |MDM^T - V| = {resid_v:e}, |M^T Omega M - Omega| = {resid_omega:e}"
        )));
    }
    Ok(WilliamsonDecomposition {
        transform,
        spectrum: SymplecticSpectrum {
            nu_minus: nus[0],
            nu_plus: nus[1],
        },
    })
}

/// Action of the pair of lossy fibers on an arbitrary two-mode variance
/// matrix: attenuate amplitudes and mix in vacuum noise.
pub fn apply_loss(v: &Matrix4<f64>, ch: &ChannelPair) -> Matrix4<f64> {
    let scale = Matrix4::from_diagonal(&Vector4::new(
        ch.t1_mag(),
        ch.t1_mag(),
        ch.t2_mag(),
        ch.t2_mag(),
    ));
    let t1sq = ch.t1_mag() * ch.t1_mag();
    let t2sq = ch.t2_mag() * ch.t2_mag();
    let noise = Matrix4::from_diagonal(&Vector4::new(
        0.5 * (1.0 - t1sq),
        0.5 * (1.0 - t1sq),
        0.5 * (1.0 - t2sq),
        0.5 * (1.0 - t2sq),
    ));
    scale * v * scale + noise
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmsv_std(zeta: f64) -> StdFormVariance {
        let p = TmsvParams::new(zeta).unwrap();
        let ch = ChannelPair::symmetric(1.0).unwrap();
        to_std_form(&propagate_tmsv(&p, &ch))
    }

    #[test]
    fn transmission_values() {
        assert_eq!(transmission_from_length(0.0, 1.0).unwrap(), 1.0);
        assert!((transmission_from_length(1.0, 1.0).unwrap() - (-1.0_f64).exp()).abs() < 1e-15);
        assert!((transmission_from_length(0.1, 1.0).unwrap() - 0.9048374180359595).abs() < 1e-15);
        assert!(transmission_from_length(-0.1, 1.0).is_err());
        assert!(transmission_from_length(1.0, 0.0).is_err());
    }

    #[test]
    fn tmsv_params_consistency() {
        for zeta in [0.0, 0.3, 0.88137, 2.0, 4.0] {
            let p = TmsvParams::new(zeta).unwrap();
            let q = p.q_mag();
            let from_q = q * q / (1.0 - q * q);
            assert!(
                (from_q - p.mean_photons()).abs() <= 1e-12 * from_q.max(1.0),
                "zeta = {zeta}"
            );
        }
        let p = TmsvParams::from_mean_photons(1.0).unwrap();
        assert!((p.q_mag() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn propagate_no_squeezing_gives_vacuum() {
        let p = TmsvParams::new(0.0).unwrap();
        let ch = ChannelPair::new(0.37, 0.81).unwrap();
        let st = propagate_tmsv(&p, &ch);
        assert_eq!(st.c1(), 1.0);
        assert_eq!(st.c2(), 1.0);
        assert_eq!(st.s_mag(), 0.0);
        assert_eq!(st.norm_n(), 1.0);
    }

    #[test]
    fn propagate_lossless_reproduces_source() {
        let zeta = 0.9;
        let p = TmsvParams::new(zeta).unwrap();
        let ch = ChannelPair::symmetric(1.0).unwrap();
        let st = propagate_tmsv(&p, &ch);
        assert!((st.norm_n() - 1.0).abs() < 1e-12);
        assert!((st.c1() - (2.0 * zeta).cosh()).abs() < 1e-12);
        assert!((st.c2() - (2.0 * zeta).cosh()).abs() < 1e-12);
        assert!((st.s_mag() - (2.0 * zeta).sinh()).abs() < 1e-12);
    }

    #[test]
    fn propagate_complete_absorption_gives_vacuum() {
        let p = TmsvParams::new(1.3).unwrap();
        let ch = ChannelPair::symmetric(0.0).unwrap();
        let st = propagate_tmsv(&p, &ch);
        assert!((st.c1() - 1.0).abs() < 1e-12);
        assert!((st.c2() - 1.0).abs() < 1e-12);
        assert_eq!(st.s_mag(), 0.0);
    }

    #[test]
    fn propagated_state_satisfies_determinant_relation() {
        for zeta in [0.2, 0.88137, 2.0] {
            for t1 in [0.2, 0.7, 1.0] {
                for t2 in [0.0, 0.5, 0.9] {
                    let p = TmsvParams::new(zeta).unwrap();
                    let ch = ChannelPair::new(t1, t2).unwrap();
                    let st = propagate_tmsv(&p, &ch);
                    let resid =
                        (st.c1() * st.c2() - st.s_mag() * st.s_mag() - 1.0 / st.norm_n()).abs();
                    assert!(resid < 1e-10, "zeta={zeta} t1={t1} t2={t2} resid={resid:e}");
                    // Round-trips through the validating constructor.
                    TwoModeGaussianState::new(
                        st.c1(),
                        st.c2(),
                        st.s_mag(),
                        st.s_phase(),
                        st.norm_n(),
                    )
                    .unwrap();
                }
            }
        }
    }

    #[test]
    fn std_form_of_vacuum_and_lossless_source() {
        let vac = tmsv_std(0.0);
        assert_eq!((vac.x(), vac.y(), vac.z1(), vac.z2()), (0.5, 0.5, 0.0, 0.0));

        let v = tmsv_std(1.0);
        let ch2 = 2.0_f64.cosh() / 2.0;
        let sh2 = 2.0_f64.sinh() / 2.0;
        assert!((v.x() - ch2).abs() < 1e-12);
        assert!((v.y() - ch2).abs() < 1e-12);
        assert!((v.z1() - sh2).abs() < 1e-12);
        assert!((v.z2() + sh2).abs() < 1e-12);
    }

    #[test]
    fn std_form_one_dead_arm() {
        let p = TmsvParams::new(1.0).unwrap();
        let ch = ChannelPair::new(1.0, 0.0).unwrap();
        let v = to_std_form(&propagate_tmsv(&p, &ch));
        assert!((v.x() - 2.0_f64.cosh() / 2.0).abs() < 1e-12);
        assert!((v.y() - 0.5).abs() < 1e-12);
        assert_eq!(v.z1(), 0.0);
        assert_eq!(v.z2(), 0.0);
    }

    #[test]
    fn loss_map_reproduces_propagation() {
        // Independent route: apply the attenuation map to the lossless
        // variance matrix and compare against the closed-form coefficients.
        for zeta in [0.1, 0.7, 1.5, 2.5] {
            for t1 in [0.15, 0.5, 0.95] {
                for t2 in [0.3, 0.8, 1.0] {
                    let p = TmsvParams::new(zeta).unwrap();
                    let lossless = tmsv_std(zeta).matrix();
                    let ch = ChannelPair::new(t1, t2).unwrap();
                    let direct = to_std_form(&propagate_tmsv(&p, &ch)).matrix();
                    let mapped = apply_loss(&lossless, &ch);
                    assert!(
                        (direct - mapped).abs().max() < 1e-10,
                        "zeta={zeta} t1={t1} t2={t2}"
                    );
                }
            }
        }
    }

    #[test]
    fn losses_compose_multiplicatively() {
        for zeta in [0.2, 0.6, 0.9, 1.4, 1.8] {
            for ta in [0.15, 0.3, 0.6, 0.8, 0.9] {
                for tb in [0.25, 0.4, 0.55, 0.7, 0.85] {
                    let p = TmsvParams::new(zeta).unwrap();
                    let cha = ChannelPair::symmetric(ta).unwrap();
                    let chb = ChannelPair::new(tb, 0.9 * tb).unwrap();
                    let chab = ChannelPair::new(ta * tb, ta * 0.9 * tb).unwrap();
                    let two_step = apply_loss(&apply_loss(&tmsv_std(zeta).matrix(), &cha), &chb);
                    let one_step = to_std_form(&propagate_tmsv(&p, &chab)).matrix();
                    assert!(
                        (two_step - one_step).abs().max() < 1e-10,
                        "zeta={zeta} ta={ta} tb={tb}"
                    );
                }
            }
        }
    }

    #[test]
    fn simon_vacuum_sits_on_boundary() {
        let vac = StdFormVariance::new(0.5, 0.5, 0.0, 0.0).unwrap();
        let r = simon_separable(&vac);
        assert_eq!(r.class, SimonClass::Boundary);
        assert!(r.margin.abs() < 1e-12);
    }

    #[test]
    fn simon_lossless_source_is_inseparable() {
        let v = tmsv_std(1.0);
        let r = simon_separable(&v);
        assert_eq!(r.class, SimonClass::Inseparable);
        let expected = 0.25 - (4.0_f64.cosh() / 2.0 - 0.25);
        assert!((r.margin - expected).abs() < 1e-9, "{}", r.margin);
    }

    #[test]
    fn simon_dead_channels_reach_boundary() {
        let p = TmsvParams::new(1.0).unwrap();
        let ch = ChannelPair::symmetric(0.0).unwrap();
        let v = to_std_form(&propagate_tmsv(&p, &ch));
        let r = simon_separable(&v);
        assert!(matches!(
            r.class,
            SimonClass::Boundary | SimonClass::Separable
        ));
    }

    #[test]
    fn spectrum_of_known_states() {
        let vac = StdFormVariance::new(0.5, 0.5, 0.0, 0.0).unwrap();
        let s = vac.symplectic_spectrum().unwrap();
        assert!((s.nu_plus() - 0.5).abs() < 1e-12);
        assert!((s.nu_minus() - 0.5).abs() < 1e-12);

        let pure = tmsv_std(1.3);
        let s = pure.symplectic_spectrum().unwrap();
        assert!((s.nu_plus() - 0.5).abs() < 1e-10);
        assert!((s.nu_minus() - 0.5).abs() < 1e-10);

        let thermal = StdFormVariance::new(1.5, 1.5, 0.0, 0.0).unwrap();
        let s = thermal.symplectic_spectrum().unwrap();
        assert!((s.nu_plus() - 1.5).abs() < 1e-12);
        assert!((s.nu_minus() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn spectrum_product_equals_sqrt_det() {
        for zeta in [0.3, 1.0, 2.2] {
            for t in [0.2, 0.6, 0.95] {
                let p = TmsvParams::new(zeta).unwrap();
                let ch = ChannelPair::symmetric(t).unwrap();
                let v = to_std_form(&propagate_tmsv(&p, &ch));
                let s = v.symplectic_spectrum().unwrap();
                assert!((s.nu_plus() * s.nu_minus() - v.det().sqrt()).abs() < 1e-10);
                // Uncertainty bound in this convention.
                assert!(v.det() >= 1.0 / 16.0 - 1e-12);
            }
        }
    }

    #[test]
    fn entropy_anchors() {
        let pure = tmsv_std(0.88137);
        assert!(gaussian_entropy(&pure).abs() < 1e-9);

        let one_thermal = StdFormVariance::new(1.5, 0.5, 0.0, 0.0).unwrap();
        assert!((gaussian_entropy(&one_thermal) - 2.0 * 2.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn entropy_matches_reduced_mode_of_source() {
        // A lossless source with |q|^2 = 1/2 has a thermal reduced mode with
        // variance cosh(2 zeta)/2; its entropy must be 2 ln 2.
        let p = TmsvParams::from_q_mag(0.5_f64.sqrt()).unwrap();
        let x = (2.0 * p.zeta_mag()).cosh() / 2.0;
        let reduced = StdFormVariance::new(x, 0.5, 0.0, 0.0).unwrap();
        assert!((gaussian_entropy(&reduced) - 2.0 * 2.0_f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn williamson_identity_cases() {
        let vac = StdFormVariance::new(0.5, 0.5, 0.0, 0.0).unwrap();
        let w = williamson(&vac).unwrap();
        assert!((w.transform - Matrix4::identity()).abs().max() < 1e-12);

        let thermal = StdFormVariance::new(1.5, 1.5, 0.0, 0.0).unwrap();
        let w = williamson(&thermal).unwrap();
        assert!((w.transform - Matrix4::identity()).abs().max() < 1e-12);
    }

    #[test]
    fn williamson_reconstructs_lossy_state() {
        let p = TmsvParams::from_q_mag(std::f64::consts::FRAC_1_SQRT_2).unwrap();
        let ch = ChannelPair::symmetric(0.9).unwrap();
        let v = to_std_form(&propagate_tmsv(&p, &ch));
        let w = williamson(&v).unwrap();
        let d = Matrix4::from_diagonal(&Vector4::new(
            w.spectrum.nu_minus(),
            w.spectrum.nu_minus(),
            w.spectrum.nu_plus(),
            w.spectrum.nu_plus(),
        ));
        let resid_v = (w.transform * d * w.transform.transpose() - v.matrix())
            .abs()
            .max();
        let omega = symplectic_form();
        let resid_o = (w.transform.transpose() * omega * w.transform - omega)
            .abs()
            .max();
        assert!(resid_v < 1e-9, "resid_v = {resid_v:e}");
        assert!(resid_o < 1e-9, "resid_o = {resid_o:e}");
    }

    #[test]
    fn williamson_swaps_modes_when_needed() {
        let v = StdFormVariance::new(2.5, 0.8, 0.0, 0.0).unwrap();
        let w = williamson(&v).unwrap();
        assert!((w.spectrum.nu_minus() - 0.8).abs() < 1e-12);
        let d = Matrix4::from_diagonal(&Vector4::new(0.8, 0.8, 2.5, 2.5));
        assert!(
            (w.transform * d * w.transform.transpose() - v.matrix())
                .abs()
                .max()
                < 1e-12
        );
    }

    #[test]
    fn unphysical_variance_rejected() {
        assert!(StdFormVariance::new(0.4, 0.5, 0.0, 0.0).is_err());
        assert!(StdFormVariance::new(0.5, 0.5, 0.4, -0.4).is_err());
    }
}
