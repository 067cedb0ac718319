//! Fock-basis entanglement quantifiers for the transmitted state: the
//! closed-form single-pure-state extraction estimate and the convex upper
//! bound from the block decomposition into Schmidt-form density operators.

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::error::{CoreError, Result};
use crate::fock::{FockDensityMatrix, KCoefficients};
use crate::gaussian::{ChannelPair, TmsvParams};

type C64 = Complex<f64>;

/// Closed-form extraction estimate and its ingredients.
#[derive(Debug, Clone, Copy)]
pub struct ExtractionResult {
    /// The closed-form estimate, in nats.
    pub estimate_nats: f64,
    /// Weight of the extracted pure component (its squared norm).
    pub weight: f64,
    /// q^2 (1-|T1|^2)(1-|T2|^2).
    pub x_arg: f64,
    /// |q T1 T2|^2.
    pub y_arg: f64,
}

/// Closed-form estimate of the transmitted entanglement from extracting a
/// single pure component. Evaluated exactly as the closed form is written;
/// see [`extracted_state_direct`] for the summed route, which carries the
/// extracted weight explicitly (the two differ by that normalization in the
/// lossless limit).
pub fn extraction_estimate(q_mag: f64, t1_mag: f64, t2_mag: f64) -> Result<ExtractionResult> {
    if !(0.0..1.0).contains(&q_mag) {
        return Err(CoreError::Domain(format!(
            "q must lie in [0, 1), got {q_mag}"
        )));
    }
    for t in [t1_mag, t2_mag] {
        if !(0.0..=1.0).contains(&t) {
            return Err(CoreError::Domain(format!(
                "|T| must lie in [0, 1], got {t}"
            )));
        }
    }
    let x = q_mag * q_mag * (1.0 - t1_mag * t1_mag) * (1.0 - t2_mag * t2_mag);
    let y = (q_mag * t1_mag * t2_mag).powi(2);
    let u = 1.0 - x;
    let gap = u * u - y;
    if gap <= 0.0 {
        // Unreachable for q < 1; the estimate diverges along this limit.
        return Err(CoreError::NumericalDegeneracy(
            "extraction estimate diverges at y = (1-x)^2".into(),
        ));
    }
    let y_ln_y = if y > 0.0 { y * y.ln() } else { 0.0 };
    let first = u / gap * (u / gap).ln();
    let second = u * ((y + u * u) * u.ln() - y_ln_y) / (gap * gap);
    let estimate = (first + second).max(0.0);
    let weight = (1.0 - q_mag * q_mag) * u / gap;
    Ok(ExtractionResult {
        estimate_nats: estimate,
        weight,
        x_arg: x,
        y_arg: y,
    })
}

/// The extracted pure component built by direct summation.
#[derive(Debug, Clone, Copy)]
pub struct DirectExtraction {
    /// Squared norm of the extracted component.
    pub weight: f64,
    /// Entanglement entropy of the normalized component, in nats.
    pub entropy_nats: f64,
    /// weight * entropy: the direct-route estimate.
    pub estimate_nats: f64,
}

/// Direct route to the extraction estimate: build the unnormalized pure
/// component whose ladder coefficients match the transmitted state, read off
/// its weight, and weight its entanglement entropy.
pub fn extracted_state_direct(
    params: &TmsvParams,
    ch: &ChannelPair,
    n_max: usize,
) -> Result<DirectExtraction> {
    if n_max < 1 {
        return Err(CoreError::Domain("n_max must be >= 1".into()));
    }
    let table = KCoefficients::new(params, ch);
    let q = params.q_mag();
    let k000 = table.value(0, 0, 0)?;
    let scale = (1.0 - q * q) / k000;

    let mut probs = Vec::with_capacity(n_max + 1);
    let mut weight = 0.0;
    for n in 0..=n_max {
        let coeff = table.value(0, 0, n)?;
        let amp_sq = scale * coeff * coeff * table.ladder_amplitude(n).norm_sqr();
        probs.push(amp_sq);
        weight += amp_sq;
    }
    let mut entropy = 0.0;
    if weight > 0.0 {
        for p in probs {
            let p = p / weight;
            if p > 1e-300 {
                entropy -= p * p.ln();
            }
        }
    }
    Ok(DirectExtraction {
        weight,
        entropy_nats: entropy,
        estimate_nats: weight * entropy,
    })
}

/// One block of the photon-number-difference decomposition.
#[derive(Debug, Clone)]
pub struct SchmidtBlock {
    /// Difference n1 - n2 labeling the block.
    pub offset: isize,
    /// Trace of the unnormalized block.
    pub weight: f64,
    /// The normalized block as a density matrix in its Schmidt basis.
    pub matrix: DMatrix<C64>,
}

/// Decomposition of the state into blocks that are individually in Schmidt
/// form with respect to the product bases |k + offset> x |k>.
#[derive(Debug, Clone)]
pub struct SchmidtBlockDecomposition {
    pub blocks: Vec<SchmidtBlock>,
    /// Sum of the block weights; equals the trace of the input state.
    pub total_weight: f64,
}

const NEGLIGIBLE_BLOCK_WEIGHT: f64 = 1e-14;

/// Split the state into its photon-number-difference blocks and normalize
/// each one. Blocks with negligible weight are dropped.
pub fn schmidt_blocks(rho: &FockDensityMatrix) -> SchmidtBlockDecomposition {
    let n = rho.n_max() as isize;
    let mut blocks = Vec::new();
    let mut total_weight = 0.0;
    for offset in -n..=n {
        let raw = rho.number_difference_block(offset);
        let weight: f64 = (0..raw.nrows()).map(|i| raw[(i, i)].re).sum();
        total_weight += weight;
        if weight < NEGLIGIBLE_BLOCK_WEIGHT {
            continue;
        }
        let matrix = raw.map(|v| v / weight);
        blocks.push(SchmidtBlock {
            offset,
            weight,
            matrix,
        });
    }
    SchmidtBlockDecomposition {
        blocks,
        total_weight,
    }
}

/// Entanglement, in nats, of a normalized density matrix given in Schmidt
/// form: the entropy of its diagonal minus its von Neumann entropy, clamped
/// at zero against truncation noise.
fn schmidt_form_entanglement(matrix: &DMatrix<C64>) -> Result<f64> {
    let mut diag_entropy = 0.0;
    for i in 0..matrix.nrows() {
        let p = matrix[(i, i)].re;
        if p < -1e-10 {
            return Err(CoreError::NumericalDegeneracy(format!(
                "negative diagonal probability {p:e}"
            )));
        }
        if p > 1e-14 {
            diag_entropy -= p * p.ln();
        }
    }
    let eig = SymmetricEigen::new(matrix.clone());
    let mut vn_entropy = 0.0;
    for &lambda in eig.eigenvalues.iter() {
        if lambda < -1e-10 {
            return Err(CoreError::NumericalDegeneracy(format!(
                "block eigenvalue {lambda:e} below tolerance"
            )));
        }
        if lambda > 1e-14 {
            vn_entropy -= lambda * lambda.ln();
        }
    }
    Ok((diag_entropy - vn_entropy).max(0.0))
}

/// Convex upper bound on the transmitted entanglement: the weighted sum of
/// the per-block Schmidt-form entanglements.
pub fn schmidt_block_bound(rho: &FockDensityMatrix) -> Result<f64> {
    let decomposition = schmidt_blocks(rho);
    let mut bound = 0.0;
    for block in &decomposition.blocks {
        bound += block.weight * schmidt_form_entanglement(&block.matrix)?;
    }
    Ok(bound)
}
