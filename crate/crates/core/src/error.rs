use thiserror::Error;

/// Errors produced by the numeric layers of this crate.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    /// Input outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series did not converge within the configured term budget.
    #[error("series did not converge after {terms} terms (partial sum {partial_sum:e})")]
    SeriesDivergence { partial_sum: f64, terms: usize },

    /// The Fock-space truncation is too small for the requested accuracy.
    #[error(
        "truncation insufficient: trace deficit {deficit:.3e} at n_max = {n_max}, try n_max >= {suggested}"
    )]
    TruncationInsufficient {
        deficit: f64,
        n_max: usize,
        suggested: usize,
    },

    /// A closed-form discriminant or eigenvalue left its allowed range.
    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    /// A matrix decomposition could not be carried out to tolerance.
    #[error("ill-conditioned decomposition: {0}")]
    IllConditioned(String),

    /// Every start of the boundary-state minimization was infeasible.
    #[error("no feasible boundary point found")]
    NoFeasiblePoint,

    /// A requested fidelity threshold cannot be reached at any length.
    #[error("fidelity threshold {threshold} is unreachable")]
    ThresholdUnreachable { threshold: f64 },

    /// A phase-space grid is too coarse (or badly normalized) for the kernel.
    #[error("grid resolution: {0}")]
    GridResolution(String),

    /// An internal cross-check failed; indicates a numerical problem upstream.
    #[error("internal consistency: {0}")]
    Inconsistency(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
