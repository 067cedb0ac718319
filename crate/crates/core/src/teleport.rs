//! Continuous-variable teleportation through the lossy two-mode channel:
//! the Gaussian smearing kernel, closed-form fidelities for squeezed
//! coherent and Fock inputs, a numeric Wigner-overlap oracle, and the gain,
//! source-placement and range optimizations.
//!
//! All numerical work uses the phase convention phi-tilde = 0; the phase is
//! carried in the scenario for completeness but never enters the formulas.

use nalgebra::Complex;

use crate::error::{CoreError, Result};
use crate::gaussian::{ChannelPair, TmsvParams, TwoModeGaussianState};
use crate::optim::{bisect_decreasing, golden_max};
use crate::specfun::laguerre;

type C64 = Complex<f64>;

/// Width of the Gaussian kernel that smears the input Wigner function,
/// together with its infinite-squeezing floor.
#[derive(Debug, Clone, Copy)]
pub struct SmearingKernel {
    pub sigma: f64,
    pub sigma_inf: f64,
    pub gain: f64,
}

/// Infinite-squeezing limit of the smearing variance.
pub fn sigma_infinity(ch: &ChannelPair) -> Result<f64> {
    let t1sq = ch.t1_mag() * ch.t1_mag();
    let t2sq = ch.t2_mag() * ch.t2_mag();
    if t2sq == 0.0 {
        return Err(CoreError::Domain("sigma_inf requires |T2| > 0".into()));
    }
    Ok((t1sq + t2sq - 2.0 * t1sq * t2sq) / (4.0 * t2sq))
}

/// Smearing kernel from the propagated-state coefficients, as the closed
/// form is written. Prefer [`TeleportScenario::kernel`] for large squeezing,
/// where the coefficient route loses precision to cancellation.
pub fn smearing_sigma(
    state: &TwoModeGaussianState,
    ch: &ChannelPair,
    gain: f64,
) -> Result<SmearingKernel> {
    if !(gain > 0.0) {
        return Err(CoreError::Domain(format!("gain must be > 0, got {gain}")));
    }
    let n = state.norm_n();
    let sigma = n * (state.c2() + gain * gain * state.c1() - 2.0 * gain * state.s_mag())
        / (4.0 * gain * gain);
    Ok(SmearingKernel {
        sigma,
        sigma_inf: sigma_infinity(ch)?,
        gain,
    })
}

/// Cancellation-free evaluation of the smearing variance: the cosh/sinh
/// combination is regrouped into exponentials with nonnegative coefficients.
fn stable_sigma(params: &TmsvParams, ch: &ChannelPair, gain: f64) -> f64 {
    let t1 = ch.t1_mag();
    let t2 = ch.t2_mag();
    let lam2 = gain * gain;
    let alpha = t2 * t2 + lam2 * t1 * t1;
    let beta = 2.0 * gain * t1 * t2;
    let two_zeta = 2.0 * params.zeta_mag();
    let hyper = 0.5 * ((alpha - beta) * two_zeta.exp() + (alpha + beta) * (-two_zeta).exp());
    ((1.0 - t2 * t2) + lam2 * (1.0 - t1 * t1) + hyper) / (4.0 * lam2)
}

/// The state-independent gain choice |T2/T1|.
pub fn canonical_gain(ch: &ChannelPair) -> Result<f64> {
    if ch.t1_mag() == 0.0 {
        return Err(CoreError::Domain("canonical gain requires |T1| > 0".into()));
    }
    Ok(ch.t2_mag() / ch.t1_mag())
}

/// The alternative gain choice C2/|S| suggested by the conditional state.
pub fn state_matched_gain(state: &TwoModeGaussianState) -> Result<f64> {
    if state.s_mag() == 0.0 {
        return Err(CoreError::Domain(
            "state-matched gain requires |S| > 0".into(),
        ));
    }
    Ok(state.c2() / state.s_mag())
}

/// Everything the fidelity formulas need: source squeezing, channels,
/// displacement gain and phase. The infinite-squeezing flag replaces the
/// smearing variance by its floor.
#[derive(Debug, Clone, Copy)]
pub struct TeleportScenario {
    pub tmsv: TmsvParams,
    pub ch: ChannelPair,
    gain: f64,
    pub phase_tilde: f64,
    infinite_squeezing: bool,
}

impl TeleportScenario {
    pub fn new(tmsv: TmsvParams, ch: ChannelPair, gain: f64) -> Result<Self> {
        if !(gain > 0.0) {
            return Err(CoreError::Domain(format!("gain must be > 0, got {gain}")));
        }
        Ok(Self {
            tmsv,
            ch,
            gain,
            phase_tilde: 0.0,
            infinite_squeezing: false,
        })
    }

    /// Scenario in the infinitely squeezed regime: the kernel width is the
    /// floor value regardless of the source squeezing.
    pub fn infinite_squeezing(ch: ChannelPair, gain: f64) -> Result<Self> {
        let mut scn = Self::new(TmsvParams::new(0.0)?, ch, gain)?;
        scn.infinite_squeezing = true;
        Ok(scn)
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn kernel(&self) -> Result<SmearingKernel> {
        let sigma_inf = sigma_infinity(&self.ch)?;
        let sigma = if self.infinite_squeezing {
            sigma_inf
        } else {
            stable_sigma(&self.tmsv, &self.ch, self.gain)
        };
        Ok(SmearingKernel {
            sigma,
            sigma_inf,
            gain: self.gain,
        })
    }
}

/// A signal state that can be teleported: closed-form fidelity through the
/// Gaussian kernel plus a sampleable Wigner function.
pub trait InputState: Send + Sync {
    fn name(&self) -> &'static str;
    /// Teleportation fidelity for kernel width `sigma` and gain `lambda`.
    fn fidelity(&self, sigma: f64, lambda: f64) -> f64;
    /// Wigner function value at gamma = re + i im.
    fn wigner(&self, re: f64, im: f64) -> f64;
    /// Phase-space half-width that comfortably covers the state.
    fn default_half_width(&self) -> f64;
    /// Fidelity achievable with no shared squeezing (sigma = 1/2, unit gain).
    fn classical_fidelity(&self) -> f64 {
        self.fidelity(0.5, 1.0)
    }
}

/// Squeezed coherent input state with real squeezing `zeta0` and complex
/// amplitude `alpha0`.
#[derive(Debug, Clone, Copy)]
pub struct SqueezedInput {
    pub zeta0: f64,
    pub alpha0: C64,
}

impl SqueezedInput {
    pub fn new(zeta0: f64, alpha0: C64) -> Self {
        Self { zeta0, alpha0 }
    }

    pub fn vacuum() -> Self {
        Self::new(0.0, C64::new(0.0, 0.0))
    }
}

impl InputState for SqueezedInput {
    fn name(&self) -> &'static str {
        "squeezed"
    }

    fn fidelity(&self, sigma: f64, lambda: f64) -> f64 {
        fidelity_squeezed_kernel(sigma, lambda, self)
    }

    fn wigner(&self, re: f64, im: f64) -> f64 {
        input_wigner_squeezed(self).value(re, im)
    }

    fn default_half_width(&self) -> f64 {
        6.0 + 2.0 * (self.alpha0.norm_sqr() + (2.0 * self.zeta0.abs()).exp()).sqrt()
    }
}

/// Photon-number input state |N>.
#[derive(Debug, Clone, Copy)]
pub struct FockInput {
    pub n_photons: u32,
}

impl FockInput {
    pub fn new(n_photons: u32) -> Self {
        Self { n_photons }
    }
}

impl InputState for FockInput {
    fn name(&self) -> &'static str {
        "fock"
    }

    fn fidelity(&self, sigma: f64, lambda: f64) -> f64 {
        fidelity_fock_kernel(sigma, lambda, self.n_photons)
    }

    fn wigner(&self, re: f64, im: f64) -> f64 {
        let r2 = re * re + im * im;
        let sign = if self.n_photons % 2 == 0 { 1.0 } else { -1.0 };
        sign * 2.0 / std::f64::consts::PI * (-2.0 * r2).exp() * laguerre(self.n_photons, 4.0 * r2)
    }

    fn default_half_width(&self) -> f64 {
        6.0 + 2.0 * (self.n_photons as f64 + 1.0).sqrt()
    }
}

/// Fidelity for a squeezed coherent input at the given kernel parameters.
pub fn fidelity_squeezed_kernel(sigma: f64, lambda: f64, inp: &SqueezedInput) -> f64 {
    let ch0 = (2.0 * inp.zeta0).cosh();
    let lam2 = lambda * lambda;
    let base = 1.0
        + 2.0 * lam2
        + lam2 * lam2 * (1.0 + 16.0 * sigma * sigma)
        + 8.0 * lam2 * (1.0 + lam2) * sigma * ch0;
    let f0 = 2.0 / base.sqrt();
    if lambda == 1.0 {
        // The amplitude dependence vanishes identically at unit gain.
        return f0;
    }
    let e2z = (2.0 * inp.zeta0).exp();
    let re2 = 4.0 * inp.alpha0.re * inp.alpha0.re;
    let im2 = 4.0 * inp.alpha0.im * inp.alpha0.im;
    let amplitude_term = re2 * e2z / (1.0 + lam2 * (1.0 + 4.0 * e2z * sigma));
    let phase_term = im2 / ((1.0 + lam2) * e2z + 4.0 * lam2 * sigma);
    let exponent = -0.5 * (1.0 - lambda) * (1.0 - lambda) * (amplitude_term + phase_term);
    f0 * exponent.exp()
}

/// Scaled Legendre recurrence s_n = w^n P_n(1 + c/w), evaluated without
/// forming the singular argument; the removable singularity at w = 0 is the
/// n-th coefficient limit.
fn scaled_legendre(n: u32, w: f64, c: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0_f64;
    let mut cur = w + c;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * (w + c) * cur - kf * w * w * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Scaled Laguerre recurrence r_n = v^n L_n(u/v), finite for all v
/// including v = 0, where it degenerates to (-u)^n / n!.
fn scaled_laguerre(n: u32, u: f64, v: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0_f64;
    let mut cur = v - u;
    for k in 1..n {
        let kf = k as f64;
        let next = (((2.0 * kf + 1.0) * v - u) * cur - kf * v * v * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Fidelity for an N-photon input at the given kernel parameters.
pub fn fidelity_fock_kernel(sigma: f64, lambda: f64, n_photons: u32) -> f64 {
    let lam2 = lambda * lambda;
    let d = lam2 * (4.0 * sigma + 1.0) + 1.0;
    let w = lam2 * (4.0 * sigma - 1.0) - 1.0;
    let c = 8.0 * lam2 / d;
    2.0 * scaled_legendre(n_photons, w, c) / d.powi(n_photons as i32 + 1)
}

/// Fidelity for a squeezed coherent input through the scenario's channel.
pub fn fidelity_squeezed(scn: &TeleportScenario, inp: &SqueezedInput) -> Result<f64> {
    let kernel = scn.kernel()?;
    Ok(fidelity_squeezed_kernel(kernel.sigma, kernel.gain, inp))
}

/// Fidelity for an N-photon input through the scenario's channel.
pub fn fidelity_fock(scn: &TeleportScenario, inp: &FockInput) -> Result<f64> {
    let kernel = scn.kernel()?;
    Ok(fidelity_fock_kernel(
        kernel.sigma,
        kernel.gain,
        inp.n_photons,
    ))
}

/// Coefficients of a Gaussian Wigner function
/// (norm/pi) exp[-quad |g|^2 - sq (g^2 + g*^2) + lin* g + lin g*].
#[derive(Debug, Clone, Copy)]
pub struct GaussianWignerCoeffs {
    pub norm: f64,
    pub quad: f64,
    pub sq: f64,
    pub lin: C64,
}

impl GaussianWignerCoeffs {
    pub fn value(&self, re: f64, im: f64) -> f64 {
        let exponent = -self.quad * (re * re + im * im) - 2.0 * self.sq * (re * re - im * im)
            + 2.0 * (self.lin.re * re + self.lin.im * im);
        self.norm / std::f64::consts::PI * exponent.exp()
    }
}

/// Wigner coefficients of the squeezed coherent input state.
pub fn input_wigner_squeezed(inp: &SqueezedInput) -> GaussianWignerCoeffs {
    let ch0 = (2.0 * inp.zeta0).cosh();
    let sh0 = (2.0 * inp.zeta0).sinh();
    let a0 = inp.alpha0;
    let re_sq = a0.re * a0.re - a0.im * a0.im;
    let norm = 2.0 * (-2.0 * a0.norm_sqr() * ch0 - 2.0 * re_sq * sh0).exp();
    GaussianWignerCoeffs {
        norm,
        quad: 2.0 * ch0,
        sq: sh0,
        lin: (a0 * ch0 + a0.conj() * sh0) * 2.0,
    }
}

/// Wigner coefficients of the teleported squeezed coherent state.
pub fn output_wigner_squeezed(
    scn: &TeleportScenario,
    inp: &SqueezedInput,
) -> Result<GaussianWignerCoeffs> {
    let kernel = scn.kernel()?;
    let (sigma, lambda) = (kernel.sigma, kernel.gain);
    let ch0 = (2.0 * inp.zeta0).cosh();
    let sh0 = (2.0 * inp.zeta0).sinh();
    let den = 1.0 + 8.0 * sigma * ch0 + 16.0 * sigma * sigma;
    let lam2 = lambda * lambda;
    let a0 = inp.alpha0;
    let re_sq = a0.re * a0.re - a0.im * a0.im;
    let norm = 2.0 * (-(2.0 * a0.norm_sqr() * (ch0 + 4.0 * sigma) + 2.0 * re_sq * sh0) / den).exp()
        / (lam2 * den.sqrt());
    Ok(GaussianWignerCoeffs {
        norm,
        quad: 2.0 * (ch0 + 4.0 * sigma) / (lam2 * den),
        sq: sh0 / (lam2 * den),
        lin: (a0 * (ch0 + 4.0 * sigma) + a0.conj() * sh0) * 2.0 / (lambda * den),
    })
}

/// Closed-form overlap fidelity pi * integral(W1 W2) of two Gaussian Wigner
/// functions.
pub fn gaussian_overlap_fidelity(w1: &GaussianWignerCoeffs, w2: &GaussianWignerCoeffs) -> f64 {
    let a = w1.quad + w2.quad;
    let b = w1.sq + w2.sq;
    let c = w1.lin + w2.lin;
    let plane = (a + 2.0 * b) * (a - 2.0 * b);
    w1.norm * w2.norm / plane.sqrt()
        * (c.re * c.re / (a + 2.0 * b) + c.im * c.im / (a - 2.0 * b)).exp()
}

/// Closed form of the teleported N-photon Wigner function.
#[derive(Debug, Clone, Copy)]
pub struct FockOutputWigner {
    pub sigma: f64,
    pub gain: f64,
    pub n_photons: u32,
}

impl FockOutputWigner {
    pub fn value(&self, re: f64, im: f64) -> f64 {
        let beta2 = re * re + im * im;
        let lam2 = self.gain * self.gain;
        let plus = 4.0 * self.sigma + 1.0;
        let v = 4.0 * self.sigma - 1.0;
        let u = -4.0 * beta2 / (lam2 * plus);
        2.0 / (std::f64::consts::PI * lam2) * scaled_laguerre(self.n_photons, u, v)
            / plus.powi(self.n_photons as i32 + 1)
            * (-2.0 * beta2 / (lam2 * plus)).exp()
    }
}

/// Regular square sampling of a Wigner function on [-half_width, half_width]^2.
#[derive(Debug, Clone)]
pub struct WignerGrid {
    half_width: f64,
    n_points: usize,
    values: Vec<f64>,
}

impl WignerGrid {
    pub fn sample<F: Fn(f64, f64) -> f64>(half_width: f64, n_points: usize, f: F) -> Result<Self> {
        if !(half_width > 0.0) || n_points < 16 {
            return Err(CoreError::GridResolution(format!(
                "need half_width > 0 and at least 16 points, got {half_width}, {n_points}"
            )));
        }
        let mut values = vec![0.0; n_points * n_points];
        for i in 0..n_points {
            let re = Self::axis_value(half_width, n_points, i);
            for j in 0..n_points {
                let im = Self::axis_value(half_width, n_points, j);
                values[i * n_points + j] = f(re, im);
            }
        }
        Ok(Self {
            half_width,
            n_points,
            values,
        })
    }

    /// Sample an input state on its default extent.
    pub fn from_input(input: &dyn InputState, n_points: usize) -> Result<Self> {
        Self::sample(input.default_half_width(), n_points, |re, im| {
            input.wigner(re, im)
        })
    }

    fn axis_value(half_width: f64, n_points: usize, i: usize) -> f64 {
        -half_width + 2.0 * half_width * i as f64 / (n_points - 1) as f64
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n_points - 1) as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Quadrature of the grid; 1 for a well-resolved normalized state.
    pub fn normalization(&self) -> f64 {
        let h = self.spacing();
        self.values.iter().sum::<f64>() * h * h
    }
}

/// Default axis resolution used by the sampling helpers.
pub const DEFAULT_GRID_POINTS: usize = 512;

/// Sample the closed-form teleported N-photon Wigner function. The grid must
/// resolve both the kernel and the input-state oscillations.
pub fn output_wigner_fock(
    scn: &TeleportScenario,
    inp: &FockInput,
    half_width: f64,
    n_points: usize,
) -> Result<(WignerGrid, FockOutputWigner)> {
    let kernel = scn.kernel()?;
    let spacing = 2.0 * half_width / (n_points - 1) as f64;
    if spacing >= kernel.sigma.sqrt() / 4.0 {
        return Err(CoreError::GridResolution(format!(
            "spacing {spacing:.3e} does not resolve kernel width sqrt(sigma)/4 = {:.3e}",
            kernel.sigma.sqrt() / 4.0
        )));
    }
    if spacing >= 1.0 / (4.0 * ((inp.n_photons + 1) as f64).sqrt()) {
        return Err(CoreError::GridResolution(format!(
            "spacing {spacing:.3e} does not resolve the {}-photon state",
            inp.n_photons
        )));
    }
    let profile = FockOutputWigner {
        sigma: kernel.sigma,
        gain: kernel.gain,
        n_photons: inp.n_photons,
    };
    let grid = WignerGrid::sample(half_width, n_points, |re, im| profile.value(re, im))?;
    Ok((grid, profile))
}

/// Numeric teleportation fidelity: convolve the input grid with the Gaussian
/// kernel (including the gain rescaling) and take the Wigner overlap by grid
/// quadrature. Serves as the independent oracle for the closed forms.
pub fn numeric_fidelity_oracle(w_in: &WignerGrid, scn: &TeleportScenario) -> Result<f64> {
    let kernel = scn.kernel()?;
    numeric_fidelity_oracle_kernel(w_in, kernel.sigma, kernel.gain)
}

/// Oracle at explicit kernel parameters.
pub fn numeric_fidelity_oracle_kernel(w_in: &WignerGrid, sigma: f64, lambda: f64) -> Result<f64> {
    if !(sigma >= 0.0) || !(lambda > 0.0) {
        return Err(CoreError::Domain(format!(
            "need sigma >= 0 and lambda > 0, got {sigma}, {lambda}"
        )));
    }
    let norm = w_in.normalization();
    if (norm - 1.0).abs() > 1e-4 {
        return Err(CoreError::GridResolution(format!(
            "input grid normalization {norm} departs from 1 beyond 1e-4"
        )));
    }
    let n = w_in.n_points();
    let h = w_in.spacing();
    let hw = w_in.half_width();
    let axis: Vec<f64> = (0..n).map(|i| WignerGrid::axis_value(hw, n, i)).collect();

    // One-dimensional kernel matrix K[target][source]. When the grid
    // resolves the kernel the nodes sample it directly (spectrally accurate
    // for smooth decaying integrands); otherwise the kernel is integrated
    // over source cells, which degrades gracefully to the identity as
    // sigma -> 0.
    let resolved = h < sigma.sqrt() / 4.0;
    let mut k = vec![0.0; n * n];
    for a in 0..n {
        let target = axis[a] / lambda;
        for j in 0..n {
            k[a * n + j] = if resolved {
                let d = axis[j] - target;
                h * (-d * d / (2.0 * sigma)).exp() / (2.0 * std::f64::consts::PI * sigma).sqrt()
            } else {
                let scale = (2.0 * sigma).sqrt().max(1e-300);
                let lo = (axis[j] - 0.5 * h - target) / scale;
                let hi = (axis[j] + 0.5 * h - target) / scale;
                0.5 * (libm::erf(hi) - libm::erf(lo))
            };
        }
    }

    // Separable convolution: rows first, then columns.
    let w = w_in.values();
    let mut tmp = vec![0.0; n * n];
    for a in 0..n {
        for j2 in 0..n {
            let mut acc = 0.0;
            for j1 in 0..n {
                acc += k[a * n + j1] * w[j1 * n + j2];
            }
            tmp[a * n + j2] = acc;
        }
    }
    let inv_lam2 = 1.0 / (lambda * lambda);
    let mut overlap = 0.0;
    for a in 0..n {
        for b in 0..n {
            let mut acc = 0.0;
            for j2 in 0..n {
                acc += tmp[a * n + j2] * k[b * n + j2];
            }
            let w_out = acc * inv_lam2;
            overlap += w[a * n + b] * w_out;
        }
    }
    Ok(std::f64::consts::PI * overlap * h * h)
}

/// Result of the gain optimization.
#[derive(Debug, Clone, Copy)]
pub struct GainOptimum {
    pub gain: f64,
    pub fidelity: f64,
}

/// Maximize the fidelity over the displacement gain in [0.01, 10] for a
/// fixed source and channel. The kernel width is recomputed at every gain.
pub fn optimize_gain(
    tmsv: &TmsvParams,
    ch: &ChannelPair,
    input: &dyn InputState,
) -> Result<GainOptimum> {
    let f = |lambda: f64| input.fidelity(stable_sigma(tmsv, ch, lambda), lambda);
    let (gain, fidelity) = golden_max(f, 0.01, 10.0, 1e-8);
    Ok(GainOptimum { gain, fidelity })
}

/// Result of the source-placement optimization.
#[derive(Debug, Clone, Copy)]
pub struct PlacementOptimum {
    pub l1: f64,
    pub fidelity: f64,
}

/// For an infinitely squeezed source and total distance `l12`, find the
/// source position l1 (distance from the sender) that maximizes the
/// fidelity, with the canonical gain |T2/T1| at each position.
pub fn optimize_source_position(
    l12: f64,
    l_abs: f64,
    input: &dyn InputState,
) -> Result<PlacementOptimum> {
    if !(l12 >= 0.0) || !(l_abs > 0.0) {
        return Err(CoreError::Domain(format!(
            "need l12 >= 0 and l_abs > 0, got {l12}, {l_abs}"
        )));
    }
    let fidelity_at = |l1: f64| -> f64 {
        let t1 = (-l1 / l_abs).exp();
        let t2 = (-(l12 - l1) / l_abs).exp();
        let lambda = t2 / t1;
        let t1sq = t1 * t1;
        let t2sq = t2 * t2;
        let sigma_inf = (t1sq + t2sq - 2.0 * t1sq * t2sq) / (4.0 * t2sq);
        input.fidelity(sigma_inf, lambda)
    };
    if l12 == 0.0 {
        return Ok(PlacementOptimum {
            l1: 0.0,
            fidelity: fidelity_at(0.0),
        });
    }
    let (l1, fidelity) = golden_max(fidelity_at, 0.0, l12, 1e-10 * l12.max(1.0));
    Ok(PlacementOptimum { l1, fidelity })
}

/// Largest distance over which the fidelity stays above `threshold` when
/// the source sits at the sender (|T1| = 1) and the source squeezing is
/// infinite. Found by bisection on the receiver arm length.
pub fn teleport_range(input: &dyn InputState, threshold: f64, l_abs: f64) -> Result<f64> {
    if !(l_abs > 0.0) {
        return Err(CoreError::Domain(format!("l_abs must be > 0, got {l_abs}")));
    }
    if !(threshold > 0.0) {
        return Err(CoreError::Domain(format!(
            "threshold must be > 0, got {threshold}"
        )));
    }
    if threshold >= 1.0 {
        return Err(CoreError::ThresholdUnreachable { threshold });
    }
    let fidelity_at = |l2: f64| -> f64 {
        let t2 = (-l2 / l_abs).exp();
        let t2sq = t2 * t2;
        let sigma_inf = (1.0 - t2sq) / (4.0 * t2sq);
        input.fidelity(sigma_inf, t2)
    };
    let mut hi = 0.05 * l_abs;
    while fidelity_at(hi) >= threshold {
        hi *= 2.0;
        if hi > 1e4 * l_abs {
            return Err(CoreError::ThresholdUnreachable { threshold });
        }
    }
    Ok(bisect_decreasing(
        fidelity_at,
        threshold,
        0.0,
        hi,
        1e-12 * l_abs.max(hi),
    ))
}
