//! Truncated number-basis representation of the transmitted two-mode state,
//! reduced entropies, the closed-form entanglement of the pure source state,
//! and an independent beam-splitter loss model used as an oracle for the
//! coefficient-based construction.
//!
//! Matrix elements <n1 n2|rho|m1 m2> vanish unless n1 - m1 = n2 - m2; the
//! storage is organized around that offset so states with large photon-number
//! cutoffs stay affordable.

use std::io::Write;

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::error::{CoreError, Result};
use crate::gaussian::{ChannelPair, TmsvParams};
use crate::specfun::{hyp2f1_with, log_factorial, SeriesTolerance};

type C64 = Complex<f64>;

/// Entanglement of the pure source state, in nats, as a function of the
/// squeezing amplitude q = tanh|zeta|.
pub fn tmsv_entropy(q_mag: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&q_mag) {
        return Err(CoreError::Domain(format!(
            "q must lie in [0, 1), got {q_mag}"
        )));
    }
    if q_mag == 0.0 {
        return Ok(0.0);
    }
    let q2 = q_mag * q_mag;
    Ok(-(1.0 - q2).ln() - q2 / (1.0 - q2) * q2.ln())
}

/// Coefficient table for the transmitted state at fixed (q, |T1|, |T2|),
/// caching the common hypergeometric argument and the joint ladder
/// amplitudes.
#[derive(Debug, Clone)]
pub struct KCoefficients {
    q_mag: f64,
    t1_mag: f64,
    t2_mag: f64,
    /// Hypergeometric argument q^2 (1-|T1|^2)(1-|T2|^2).
    pub arg_x: f64,
    /// Combined ladder phase per offset step: phi + arg T1 + arg T2.
    phase: f64,
    tol: SeriesTolerance,
}

impl KCoefficients {
    pub fn new(params: &TmsvParams, ch: &ChannelPair) -> Self {
        let q = params.q_mag();
        let t1 = ch.t1_mag();
        let t2 = ch.t2_mag();
        Self {
            q_mag: q,
            t1_mag: t1,
            t2_mag: t2,
            arg_x: q * q * (1.0 - t1 * t1) * (1.0 - t2 * t2),
            phase: params.phi() + ch.t1_phase() + ch.t2_phase(),
            tol: SeriesTolerance::default(),
        }
    }

    /// The real coefficient K_{k,l,m}.
    pub fn value(&self, k: usize, l: usize, m: usize) -> Result<f64> {
        k_coefficient_with(k, l, m, self.q_mag, self.t1_mag, self.t2_mag, &self.tol)
    }

    /// Joint amplitude c_m * d_m with the bookkeeping factor for m = 0
    /// stripped: (-q)^m (T1 T2)^m including phases.
    pub fn ladder_amplitude(&self, m: usize) -> C64 {
        let mag = (self.q_mag * self.t1_mag * self.t2_mag).powi(m as i32);
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let angle = self.phase * m as f64;
        C64::new(angle.cos(), angle.sin()) * (sign * mag)
    }
}

/// K_{k,l,m} with the default series tolerance.
pub fn k_coefficient(
    k: usize,
    l: usize,
    m: usize,
    q_mag: f64,
    t1_mag: f64,
    t2_mag: f64,
) -> Result<f64> {
    k_coefficient_with(k, l, m, q_mag, t1_mag, t2_mag, &SeriesTolerance::default())
}

fn k_coefficient_with(
    k: usize,
    l: usize,
    m: usize,
    q_mag: f64,
    t1_mag: f64,
    t2_mag: f64,
    tol: &SeriesTolerance,
) -> Result<f64> {
    let a = k.max(l);
    if q_mag == 0.0 {
        return Ok(if a == 0 { 1.0 } else { 0.0 });
    }
    if (t1_mag == 0.0 && k > 0) || (t2_mag == 0.0 && l > 0) {
        return Ok(0.0);
    }
    let t1sq = t1_mag * t1_mag;
    let t2sq = t2_mag * t2_mag;
    // The x^a factor is regrouped against the 1/(1-|T|^2) powers so the
    // expression stays finite all the way to |T| = 1.
    if (t1sq >= 1.0 && a > k) || (t2sq >= 1.0 && a > l) {
        return Ok(0.0);
    }
    let x = q_mag * q_mag * (1.0 - t1sq) * (1.0 - t2sq);
    let mut ln_mag = 2.0 * (a as f64) * q_mag.ln();
    if a > k {
        ln_mag += ((a - k) as f64) * (1.0 - t1sq).ln();
    }
    if a > l {
        ln_mag += ((a - l) as f64) * (1.0 - t2sq).ln();
    }
    if k > 0 {
        ln_mag += (k as f64) * t1sq.ln();
    }
    if l > 0 {
        ln_mag += (l as f64) * t2sq.ln();
    }
    ln_mag += log_factorial(a) + log_factorial(a + m)
        - 0.5 * (log_factorial(k) + log_factorial(l) + log_factorial(k + m) + log_factorial(l + m))
        - log_factorial(a - k)
        - log_factorial(a - l);
    let hyper = hyp2f1_with(
        (a + 1) as f64,
        (a + m + 1) as f64,
        (k.abs_diff(l) + 1) as f64,
        x,
        tol,
    )?;
    Ok(ln_mag.exp() * hyper)
}

/// Truncated two-mode density matrix in the number basis. Only elements
/// with n1 - m1 = n2 - m2 are stored; everything else is exactly zero.
#[derive(Debug, Clone)]
pub struct FockDensityMatrix {
    n_max: usize,
    /// One dense block per ket-bra offset f in [-n_max, n_max]; the block
    /// for offset f holds <m1+f, m2+f|rho|m1, m2> indexed by (m1, m2).
    blocks: Vec<Vec<C64>>,
}

impl FockDensityMatrix {
    pub fn zeros(n_max: usize) -> Self {
        let blocks = (0..=2 * n_max)
            .map(|i| {
                let f = i as isize - n_max as isize;
                let side = n_max + 1 - f.unsigned_abs();
                vec![C64::new(0.0, 0.0); side * side]
            })
            .collect();
        Self { n_max, blocks }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    fn dim(&self) -> usize {
        self.n_max + 1
    }

    fn block_index(&self, f: isize) -> usize {
        (f + self.n_max as isize) as usize
    }

    /// <n1 n2|rho|m1 m2>; zero off the conserved-offset structure.
    pub fn get(&self, n1: usize, n2: usize, m1: usize, m2: usize) -> C64 {
        let d = self.dim();
        if n1 >= d || n2 >= d || m1 >= d || m2 >= d {
            return C64::new(0.0, 0.0);
        }
        let f1 = n1 as isize - m1 as isize;
        let f2 = n2 as isize - m2 as isize;
        if f1 != f2 {
            return C64::new(0.0, 0.0);
        }
        let side = d - f1.unsigned_abs();
        let (i, j) = if f1 >= 0 { (m1, m2) } else { (n1, n2) };
        self.blocks[self.block_index(f1)][i * side + j]
    }

    /// Write one element. Fails for index pairs off the conserved-offset
    /// structure, which are identically zero for this state family.
    pub fn set(&mut self, n1: usize, n2: usize, m1: usize, m2: usize, value: C64) -> Result<()> {
        let d = self.dim();
        if n1 >= d || n2 >= d || m1 >= d || m2 >= d {
            return Err(CoreError::Domain(format!(
                "index out of range for n_max = {}",
                self.n_max
            )));
        }
        let f1 = n1 as isize - m1 as isize;
        let f2 = n2 as isize - m2 as isize;
        if f1 != f2 {
            return Err(CoreError::Domain(
                "elements with n1 - m1 != n2 - m2 vanish identically".into(),
            ));
        }
        let side = d - f1.unsigned_abs();
        let (i, j) = if f1 >= 0 { (m1, m2) } else { (n1, n2) };
        let idx = self.block_index(f1);
        self.blocks[idx][i * side + j] = value;
        Ok(())
    }

    fn add(&mut self, n1: usize, n2: usize, m1: usize, m2: usize, value: C64) {
        let d = self.dim();
        let f = n1 as isize - m1 as isize;
        debug_assert_eq!(f, n2 as isize - m2 as isize);
        let side = d - f.unsigned_abs();
        let (i, j) = if f >= 0 { (m1, m2) } else { (n1, n2) };
        let idx = self.block_index(f);
        self.blocks[idx][i * side + j] += value;
    }

    pub fn trace(&self) -> f64 {
        let idx = self.block_index(0);
        let d = self.dim();
        let mut t = 0.0;
        for i in 0..d {
            for j in 0..d {
                t += self.blocks[idx][i * d + j].re;
            }
        }
        t
    }

    /// 1 - trace: the population lost to the truncation.
    pub fn trace_deficit(&self) -> f64 {
        1.0 - self.trace()
    }

    /// Errors when the truncation deficit exceeds `max_deficit`.
    pub fn ensure_trace_deficit(&self, max_deficit: f64) -> Result<()> {
        let deficit = self.trace_deficit();
        if deficit > max_deficit {
            return Err(CoreError::TruncationInsufficient {
                deficit,
                n_max: self.n_max,
                suggested: self.n_max + (self.n_max / 2).max(10),
            });
        }
        Ok(())
    }

    /// Largest deviation from Hermitian symmetry.
    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0_f64;
        for f in 0..=(self.n_max as isize) {
            let side = d - f as usize;
            for i in 0..side {
                for j in 0..side {
                    let up = self.get(i + f as usize, j + f as usize, i, j);
                    let down = self.get(i, j, i + f as usize, j + f as usize);
                    worst = worst.max((up - down.conj()).norm());
                }
            }
        }
        worst
    }

    /// The photon-number-difference block c = n1 - n2: the matrix
    /// <k+c, k|rho|l+c, l> (for c >= 0) or <k, k-c|rho|l, l-c> (c < 0).
    pub fn number_difference_block(&self, c: isize) -> DMatrix<C64> {
        let side = self.dim() - c.unsigned_abs();
        DMatrix::from_fn(side, side, |k, l| {
            if c >= 0 {
                self.get(k + c as usize, k, l + c as usize, l)
            } else {
                self.get(k, k + (-c) as usize, l, l + (-c) as usize)
            }
        })
    }

    /// Smallest eigenvalue across the number-difference blocks (the blocks
    /// exhaust the support, so this is the global minimum).
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.n_max as isize;
        let mut min = f64::INFINITY;
        for c in -n..=n {
            let block = self.number_difference_block(c);
            let eig = SymmetricEigen::new(block);
            for &lambda in eig.eigenvalues.iter() {
                min = min.min(lambda);
            }
        }
        min
    }

    /// Reduced density matrix of one mode.
    pub fn reduced(&self, mode: Mode) -> DMatrix<C64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |n, m| {
            let mut acc = C64::new(0.0, 0.0);
            for s in 0..d {
                acc += match mode {
                    Mode::One => self.get(n, s, m, s),
                    Mode::Two => self.get(s, n, s, m),
                };
            }
            acc
        })
    }

    /// Dense composite matrix with row index n1*(n_max+1)+n2; intended for
    /// small cutoffs and cross-checks.
    pub fn composite_matrix(&self) -> DMatrix<C64> {
        let d = self.dim();
        DMatrix::from_fn(d * d, d * d, |r, c| self.get(r / d, r % d, c / d, c % d))
    }

    /// Debug dump as one `n1,n2,m1,m2,re,im` record per nonzero element.
    pub fn dump_records<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let d = self.dim();
        for n1 in 0..d {
            for n2 in 0..d {
                for m1 in 0..d {
                    for m2 in 0..d {
                        let v = self.get(n1, n2, m1, m2);
                        if v.norm() > 0.0 {
                            writeln!(w, "{n1},{n2},{m1},{m2},{:e},{:e}", v.re, v.im)?;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Mode selector for partial traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    One,
    Two,
}

/// Number-basis representation of the transmitted state, truncated at
/// `n_max` photons per mode. Lossless channels short-circuit to the exact
/// source projector, since the coefficient formula degenerates there.
pub fn build_transmitted_state(
    params: &TmsvParams,
    ch: &ChannelPair,
    n_max: usize,
) -> Result<FockDensityMatrix> {
    if n_max < 1 {
        return Err(CoreError::Domain("n_max must be >= 1".into()));
    }
    if ch.t1_mag() >= 1.0 - 1e-15 && ch.t2_mag() >= 1.0 - 1e-15 {
        return Ok(pure_source_projector(params, n_max));
    }

    let table = KCoefficients::new(params, ch);
    let one_minus_q2 = 1.0 - params.q_mag() * params.q_mag();
    let mut rho = FockDensityMatrix::zeros(n_max);
    for m in 0..=n_max {
        let ladder = table.ladder_amplitude(m) * one_minus_q2;
        if m > 0 && ladder.norm() == 0.0 {
            continue;
        }
        for k in 0..=(n_max - m) {
            for l in 0..=(n_max - m) {
                let coeff = table.value(k, l, m)?;
                if coeff == 0.0 {
                    continue;
                }
                let value = ladder * coeff;
                // The m = 0 term is its own Hermitian conjugate and is
                // counted exactly once.
                rho.add(m + k, m + l, k, l, value);
                if m > 0 {
                    rho.add(k, l, m + k, m + l, value.conj());
                }
            }
        }
    }
    Ok(rho)
}

fn pure_source_projector(params: &TmsvParams, n_max: usize) -> FockDensityMatrix {
    let q = params.q_mag();
    let norm = (1.0 - q * q).sqrt();
    let amp = |n: usize| -> C64 {
        let mag = norm * q.powi(n as i32);
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let angle = params.phi() * n as f64;
        C64::new(angle.cos(), angle.sin()) * (sign * mag)
    };
    let mut rho = FockDensityMatrix::zeros(n_max);
    for a in 0..=n_max {
        for b in 0..=n_max {
            rho.add(a, a, b, b, amp(a) * amp(b).conj());
        }
    }
    rho
}

/// Independent construction of the transmitted state: each fiber is modeled
/// as a beam splitter coupling the mode to a vacuum ancilla, and the output
/// is the partial trace over both ancillas. Exact up to the reported
/// truncation, with the source expansion carried far enough that neglected
/// source terms are below 1e-16.
pub fn beamsplitter_loss_oracle(
    params: &TmsvParams,
    ch: &ChannelPair,
    n_max: usize,
) -> Result<FockDensityMatrix> {
    if n_max < 1 {
        return Err(CoreError::Domain("n_max must be >= 1".into()));
    }
    let q = params.q_mag();
    let q2 = q * q;
    let a_max = if q2 == 0.0 {
        n_max
    } else {
        let tail = ((-37.0) / q2.ln()).ceil() as usize;
        n_max.max(tail).min(600)
    };

    let t1 = ch.t1_mag();
    let t2 = ch.t2_mag();
    let r1sq = 1.0 - t1 * t1;
    let r2sq = 1.0 - t2 * t2;
    let phase = params.phi() + ch.t1_phase() + ch.t2_phase();
    let one_minus_q2 = 1.0 - q2;

    // log binomial sqrt: 0.5 * ln C(n, j)
    let ln_choose_half =
        |n: usize, j: usize| 0.5 * (log_factorial(n) - log_factorial(j) - log_factorial(n - j));
    // Per-mode amplitude product for losing j photons from ket level a and
    // bra level b: sqrt(C(a,j) C(b,j)) |T|^(a+b-2j) (1-|T|^2)^j.
    let mode_amp = |a: usize, b: usize, j: usize, t: f64, rsq: f64| -> f64 {
        let power = (a + b - 2 * j) as f64;
        if t == 0.0 && power > 0.0 {
            return 0.0;
        }
        if rsq == 0.0 && j > 0 {
            return 0.0;
        }
        let mut ln = ln_choose_half(a, j) + ln_choose_half(b, j);
        if power > 0.0 {
            ln += power * t.ln();
        }
        if j > 0 {
            ln += j as f64 * rsq.ln();
        }
        ln.exp()
    };

    let mut rho = FockDensityMatrix::zeros(n_max);
    for a in 0..=a_max {
        for b in 0..=a {
            let mag = one_minus_q2 * q.powi((a + b) as i32);
            if mag < 1e-300 {
                continue;
            }
            let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
            let angle = phase * (a as f64 - b as f64);
            let psi = C64::new(angle.cos(), angle.sin()) * (sign * mag);
            let j1_lo = a.saturating_sub(n_max);
            let j2_lo = j1_lo;
            for j1 in j1_lo..=b.min(a) {
                let g1 = mode_amp(a, b, j1, t1, r1sq);
                if g1 == 0.0 {
                    continue;
                }
                for j2 in j2_lo..=b.min(a) {
                    let g2 = mode_amp(a, b, j2, t2, r2sq);
                    if g2 == 0.0 {
                        continue;
                    }
                    let w = psi * (g1 * g2);
                    let (n1, n2, m1, m2) = (a - j1, a - j2, b - j1, b - j2);
                    rho.add(n1, n2, m1, m2, w);
                    if a != b {
                        rho.add(m1, m2, n1, n2, w.conj());
                    }
                }
            }
        }
    }
    Ok(rho)
}

/// Von Neumann entropy of one reduced mode, in nats.
pub fn reduced_entropy(rho: &FockDensityMatrix, mode: Mode) -> Result<f64> {
    let reduced = rho.reduced(mode);
    let eig = SymmetricEigen::new(reduced);
    let mut entropy = 0.0;
    for &lambda in eig.eigenvalues.iter() {
        if lambda < -1e-10 {
            return Err(CoreError::NumericalDegeneracy(format!(
                "reduced matrix has eigenvalue {lambda:e}"
            )));
        }
        if lambda > 1e-14 {
            entropy -= lambda * lambda.ln();
        }
    }
    Ok(entropy)
}
