//! The entanglement quantifiers behind a common interface. Each method is a
//! strategy registered by name, so callers can sweep or compare them without
//! caring which Fock-space or Gaussian machinery backs each one.

use std::collections::BTreeMap;

use crate::bounds::{extracted_state_direct, extraction_estimate, schmidt_block_bound};
use crate::distance::{distance_to_separable, MinimizerConfig};
use crate::error::Result;
use crate::fock::build_transmitted_state;
use crate::gaussian::{propagate_tmsv, to_std_form, ChannelPair, TmsvParams};

/// Value of a quantifier together with method-specific diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct MeasureValue {
    /// The quantifier, in nats.
    pub nats: f64,
    /// Truncation deficit, for Fock-basis methods.
    pub trace_deficit: Option<f64>,
    /// Convergence flag, for minimization-based methods.
    pub converged: Option<bool>,
}

impl MeasureValue {
    fn plain(nats: f64) -> Self {
        Self {
            nats,
            trace_deficit: None,
            converged: None,
        }
    }
}

/// An entanglement quantifier for the transmitted state.
pub trait EntanglementMeasure: Send + Sync {
    /// Stable identifier used for registry lookup and reporting.
    fn name(&self) -> &'static str;
    /// Evaluate the quantifier for a source and channel pair.
    fn evaluate(&self, tmsv: &TmsvParams, ch: &ChannelPair) -> Result<MeasureValue>;
}

/// Closed-form single-pure-state extraction estimate.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExtractionEstimateMeasure;

impl EntanglementMeasure for ExtractionEstimateMeasure {
    fn name(&self) -> &'static str {
        "extraction-estimate"
    }

    fn evaluate(&self, tmsv: &TmsvParams, ch: &ChannelPair) -> Result<MeasureValue> {
        let r = extraction_estimate(tmsv.q_mag(), ch.t1_mag(), ch.t2_mag())?;
        Ok(MeasureValue::plain(r.estimate_nats))
    }
}

/// Extraction estimate by direct summation of the pure component.
#[derive(Debug, Clone, Copy)]
pub struct ExtractionDirectMeasure {
    pub n_max: usize,
}

impl EntanglementMeasure for ExtractionDirectMeasure {
    fn name(&self) -> &'static str {
        "extraction-direct"
    }

    fn evaluate(&self, tmsv: &TmsvParams, ch: &ChannelPair) -> Result<MeasureValue> {
        let d = extracted_state_direct(tmsv, ch, self.n_max)?;
        Ok(MeasureValue::plain(d.estimate_nats))
    }
}

/// Convex upper bound from the Schmidt-form block decomposition.
#[derive(Debug, Clone, Copy)]
pub struct SchmidtBoundMeasure {
    pub n_max: usize,
}

impl EntanglementMeasure for SchmidtBoundMeasure {
    fn name(&self) -> &'static str {
        "schmidt-bound"
    }

    fn evaluate(&self, tmsv: &TmsvParams, ch: &ChannelPair) -> Result<MeasureValue> {
        let rho = build_transmitted_state(tmsv, ch, self.n_max)?;
        let bound = schmidt_block_bound(&rho)?;
        Ok(MeasureValue {
            nats: bound,
            trace_deficit: Some(rho.trace_deficit()),
            converged: None,
        })
    }
}

/// Relative-entropy distance to the boundary separable Gaussian states.
#[derive(Debug, Clone, Copy)]
pub struct DistanceMeasure {
    pub config: MinimizerConfig,
}

impl EntanglementMeasure for DistanceMeasure {
    fn name(&self) -> &'static str {
        "distance"
    }

    fn evaluate(&self, tmsv: &TmsvParams, ch: &ChannelPair) -> Result<MeasureValue> {
        let v = to_std_form(&propagate_tmsv(tmsv, ch));
        let r = distance_to_separable(&v, &self.config)?;
        Ok(MeasureValue {
            nats: r.e_nats,
            trace_deficit: None,
            converged: Some(r.converged),
        })
    }
}

/// Name-keyed registry of quantifiers.
pub struct MeasureRegistry {
    measures: BTreeMap<&'static str, Box<dyn EntanglementMeasure>>,
}

impl MeasureRegistry {
    pub fn empty() -> Self {
        Self {
            measures: BTreeMap::new(),
        }
    }

    /// Registry with all four quantifiers at the given Fock cutoff and
    /// minimizer configuration.
    pub fn standard(n_max: usize, config: MinimizerConfig) -> Self {
        let mut r = Self::empty();
        r.register(ExtractionEstimateMeasure);
        r.register(ExtractionDirectMeasure { n_max });
        r.register(SchmidtBoundMeasure { n_max });
        r.register(DistanceMeasure { config });
        r
    }

    pub fn register<M: EntanglementMeasure + 'static>(&mut self, measure: M) {
        self.measures.insert(measure.name(), Box::new(measure));
    }

    pub fn get(&self, name: &str) -> Option<&dyn EntanglementMeasure> {
        self.measures.get(name).map(|m| m.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.measures.keys().copied().collect()
    }
}
