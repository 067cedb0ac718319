//! Implementations of the sweep subcommands. Every command assembles its
//! rows in a deterministic order; failed points become NaN cells rather
//! than aborting the sweep.

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use cvent_core::bounds::{extraction_estimate, schmidt_block_bound};
use cvent_core::distance::{distance_to_separable, MinimizerConfig};
use cvent_core::fock::{build_transmitted_state, tmsv_entropy};
use cvent_core::gaussian::{propagate_tmsv, to_std_form, transmission_from_length};
use cvent_core::measures::ExtractionDirectMeasure;
use cvent_core::teleport::{
    canonical_gain, optimize_gain, optimize_source_position, state_matched_gain, FockInput,
    InputState, SqueezedInput, TeleportScenario,
};
use cvent_core::{ChannelPair, Complex64, MeasureRegistry, TmsvParams};

use crate::sweep::{point_seed, Axis, CsvTable};

/// Settings shared by every command.
#[derive(Debug, Clone)]
pub struct GlobalOpts {
    pub l_abs: f64,
    pub n_max: usize,
    pub starts: usize,
    pub seed: u64,
}

impl GlobalOpts {
    fn minimizer(&self, point_index: u64) -> Result<MinimizerConfig> {
        let cfg = MinimizerConfig::default();
        Ok(MinimizerConfig::new(
            self.starts,
            cfg.simplex_tol,
            cfg.max_iters,
            point_seed(self.seed, point_index),
        )?)
    }

    /// Quantifier registry for one grid point. The direct extraction route
    /// gets a deeper cutoff than the block bound: its ladder sum converges
    /// geometrically and the extra depth is nearly free.
    fn registry(&self, point_index: u64) -> Result<MeasureRegistry> {
        let mut registry = MeasureRegistry::standard(self.n_max, self.minimizer(point_index)?);
        registry.register(ExtractionDirectMeasure {
            n_max: 2 * self.n_max,
        });
        Ok(registry)
    }

    fn channel_from_length(&self, l: f64) -> Result<ChannelPair> {
        let t = transmission_from_length(l, self.l_abs)?;
        Ok(ChannelPair::symmetric(t)?)
    }
}

/// Grid of the closed-form extraction estimate over (q, l), equal fibers.
pub fn estimate_surface(opts: &GlobalOpts, q_axis: &Axis, l_axis: &Axis) -> Result<CsvTable> {
    if q_axis.start < 0.0 || q_axis.stop > 0.99 {
        bail!("q axis must stay within [0, 0.99]");
    }
    if l_axis.start < 0.0 || l_axis.stop > 2.0 {
        bail!("length axis must stay within [0, 2] absorption lengths");
    }
    let mut table = CsvTable::new(vec!["q", "l_over_la", "estimate_nats"]);
    for q in q_axis.values() {
        for l in l_axis.values() {
            let t = transmission_from_length(l, opts.l_abs)?;
            let e = extraction_estimate(q, t, t)?.estimate_nats;
            table.push_row(vec![q, l, e]);
        }
    }
    Ok(table)
}

/// Grid of the Schmidt-block bound over (q, l), equal fibers. Rows whose
/// truncation deficit exceeds 1e-3 carry flag = 1.
pub fn bound_surface(opts: &GlobalOpts, q_axis: &Axis, l_axis: &Axis) -> Result<CsvTable> {
    if q_axis.start < 0.0 || q_axis.stop > 0.99 {
        bail!("q axis must stay within [0, 0.99]");
    }
    if l_axis.start < 0.0 || l_axis.stop > 2.0 {
        bail!("length axis must stay within [0, 2] absorption lengths");
    }
    let points: Vec<(f64, f64)> = q_axis
        .values()
        .into_iter()
        .flat_map(|q| l_axis.values().into_iter().map(move |l| (q, l)))
        .collect();
    let rows: Vec<Vec<f64>> = points
        .par_iter()
        .map(|&(q, l)| {
            let row = (|| -> Result<Vec<f64>> {
                let params = TmsvParams::from_q_mag(q)?;
                let ch = opts.channel_from_length(l)?;
                let rho = build_transmitted_state(&params, &ch, opts.n_max)?;
                let bound = schmidt_block_bound(&rho)?;
                let deficit = rho.trace_deficit();
                let flag = if deficit > 1e-3 { 1.0 } else { 0.0 };
                Ok(vec![q, l, bound, deficit, flag])
            })();
            row.unwrap_or_else(|_| vec![q, l, f64::NAN, f64::NAN, 1.0])
        })
        .collect();
    let mut table = CsvTable::new(vec![
        "q",
        "l_over_la",
        "bound_nats",
        "trace_deficit",
        "flag",
    ]);
    table.extend(rows);
    Ok(table)
}

const DISTANCE_CURVE_NBARS: [f64; 4] = [1.0, 10.0, 100.0, 1000.0];

/// Distance measure normalized by the source entanglement, one column per
/// mean photon number.
pub fn distance_curves(opts: &GlobalOpts, l_axis: &Axis) -> Result<CsvTable> {
    if l_axis.start < 0.0 || l_axis.stop > 1.0 {
        bail!("length axis must stay within [0, 1] absorption lengths");
    }
    let ls = l_axis.values();
    let rows: Vec<Vec<f64>> = ls
        .par_iter()
        .enumerate()
        .map(|(i, &l)| {
            let mut row = vec![l];
            for (j, &nbar) in DISTANCE_CURVE_NBARS.iter().enumerate() {
                let ratio = (|| -> Result<f64> {
                    let params = TmsvParams::from_mean_photons(nbar)?;
                    let ch = opts.channel_from_length(l)?;
                    let v = to_std_form(&propagate_tmsv(&params, &ch));
                    let cfg = opts.minimizer((i * DISTANCE_CURVE_NBARS.len() + j) as u64)?;
                    let d = distance_to_separable(&v, &cfg)?;
                    Ok(d.e_nats / tmsv_entropy(params.q_mag())?)
                })()
                .unwrap_or(f64::NAN);
                row.push(ratio);
            }
            row
        })
        .collect();
    let mut table = CsvTable::new(vec![
        "l_over_la",
        "ratio_nbar1",
        "ratio_nbar10",
        "ratio_nbar100",
        "ratio_nbar1000",
    ]);
    table.extend(rows);
    Ok(table)
}

/// The quantifiers to compare, in column order. The estimate column is the
/// direct (weight-normalized) route, which is the one that sits between the
/// distance and the bound.
const COMPARE_MEASURES: [&str; 3] = ["schmidt-bound", "extraction-direct", "distance"];

/// The registered quantifiers side by side at nbar = 1.
pub fn compare(opts: &GlobalOpts, l_axis: &Axis) -> Result<CsvTable> {
    if l_axis.start < 0.0 || l_axis.stop > 1.0 {
        bail!("length axis must stay within [0, 1] absorption lengths");
    }
    let params = TmsvParams::from_mean_photons(1.0)?;
    let ls = l_axis.values();
    let rows: Vec<Vec<f64>> = ls
        .par_iter()
        .enumerate()
        .map(|(i, &l)| {
            (|| -> Result<Vec<f64>> {
                let ch = opts.channel_from_length(l)?;
                let registry = opts.registry(i as u64)?;
                let mut row = vec![l];
                for name in COMPARE_MEASURES {
                    let measure = registry.get(name).expect("standard registry entry");
                    row.push(measure.evaluate(&params, &ch)?.nats);
                }
                Ok(row)
            })()
            .unwrap_or_else(|_| vec![l, f64::NAN, f64::NAN, f64::NAN])
        })
        .collect();
    let mut table = CsvTable::new(vec!["l_over_la", "bound", "estimate", "distance"]);
    table.extend(rows);
    Ok(table)
}

const AVAILABLE_LENGTHS: [f64; 3] = [0.0, 0.01, 0.1];

/// Available entanglement (distance measure) against source squeezing for
/// three transmission lengths.
pub fn available_entanglement(opts: &GlobalOpts, zeta_axis: &Axis) -> Result<CsvTable> {
    if zeta_axis.start < 0.5 || zeta_axis.stop > 3.0 {
        bail!("zeta axis must stay within [0.5, 3]");
    }
    let zetas = zeta_axis.values();
    let rows: Vec<Vec<f64>> = zetas
        .par_iter()
        .enumerate()
        .map(|(i, &zeta)| {
            let mut row = vec![zeta];
            for (j, &l) in AVAILABLE_LENGTHS.iter().enumerate() {
                let e = (|| -> Result<f64> {
                    let params = TmsvParams::new(zeta)?;
                    let ch = opts.channel_from_length(l)?;
                    let v = to_std_form(&propagate_tmsv(&params, &ch));
                    let cfg = opts.minimizer((i * AVAILABLE_LENGTHS.len() + j) as u64)?;
                    Ok(distance_to_separable(&v, &cfg)?.e_nats)
                })()
                .unwrap_or(f64::NAN);
                row.push(e);
            }
            row
        })
        .collect();
    let mut table = CsvTable::new(vec!["zeta", "E_l0", "E_l001", "E_l01"]);
    table.extend(rows);
    Ok(table)
}

/// Input-state selector for the fidelity sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FidelityInput {
    Squeezed,
    Fock,
}

/// Figure selector for the fidelity sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FidelityMode {
    /// Surface over (zeta, |T2|): unit gain and canonical gain side by side,
    /// squeezed-vacuum input.
    GainComparison,
    /// Curves over zeta at |T2| = 0.9: optimal, canonical and state-matched
    /// gain.
    GainOptimality,
    /// Surface over (zeta, |T2|) at canonical gain.
    Saturation,
    /// Curves over the receiver arm length at infinite squeezing.
    RangeCurves,
    /// Optimal source position against the total distance.
    SourcePlacement,
}

pub struct FidelitySpec {
    pub mode: FidelityMode,
    pub input: FidelityInput,
    pub zeta_axis: Axis,
    pub t2_axis: Axis,
    pub l2_axis: Axis,
    pub l12_axis: Axis,
}

pub fn fidelity(opts: &GlobalOpts, spec: &FidelitySpec) -> Result<CsvTable> {
    match spec.mode {
        FidelityMode::GainComparison => fidelity_gain_comparison(spec),
        FidelityMode::GainOptimality => fidelity_gain_optimality(spec),
        FidelityMode::Saturation => fidelity_saturation(spec),
        FidelityMode::RangeCurves => fidelity_range_curves(opts, spec),
        FidelityMode::SourcePlacement => fidelity_source_placement(opts, spec),
    }
}

fn squeezed_vacuum_probe() -> SqueezedInput {
    SqueezedInput::new(0.5, Complex64::new(0.0, 0.0))
}

fn fidelity_gain_comparison(spec: &FidelitySpec) -> Result<CsvTable> {
    if spec.t2_axis.start <= 0.0 {
        bail!("|T2| axis must be positive for the canonical gain");
    }
    let inp = squeezed_vacuum_probe();
    let mut table = CsvTable::new(vec!["zeta", "t2", "f_unit_gain", "f_canonical_gain"]);
    for zeta in spec.zeta_axis.values() {
        let params = TmsvParams::new(zeta)?;
        for t2 in spec.t2_axis.values() {
            let ch = ChannelPair::new(1.0, t2)?;
            let unit = TeleportScenario::new(params, ch, 1.0)?;
            let canonical = TeleportScenario::new(params, ch, canonical_gain(&ch)?)?;
            let ku = unit.kernel()?;
            let kc = canonical.kernel()?;
            table.push_row(vec![
                zeta,
                t2,
                inp.fidelity(ku.sigma, ku.gain),
                inp.fidelity(kc.sigma, kc.gain),
            ]);
        }
    }
    Ok(table)
}

fn fidelity_gain_optimality(spec: &FidelitySpec) -> Result<CsvTable> {
    let input: Box<dyn InputState> = match spec.input {
        FidelityInput::Squeezed => Box::new(SqueezedInput::new(0.88, Complex64::new(0.0, 0.0))),
        FidelityInput::Fock => Box::new(FockInput::new(1)),
    };
    let ch = ChannelPair::new(1.0, 0.9)?;
    if spec.zeta_axis.start <= 0.0 {
        bail!("zeta axis must be positive: the state-matched gain diverges at zero squeezing");
    }
    let mut table = CsvTable::new(vec!["zeta", "f_optimal", "f_canonical", "f_state_matched"]);
    for zeta in spec.zeta_axis.values() {
        let params = TmsvParams::new(zeta)?;
        let state = propagate_tmsv(&params, &ch);
        let optimal = optimize_gain(&params, &ch, input.as_ref())?;
        let fid_at = |gain: f64| -> Result<f64> {
            let scn = TeleportScenario::new(params, ch, gain)?;
            let k = scn.kernel()?;
            Ok(input.fidelity(k.sigma, k.gain))
        };
        table.push_row(vec![
            zeta,
            optimal.fidelity,
            fid_at(canonical_gain(&ch)?)?,
            fid_at(state_matched_gain(&state)?)?,
        ]);
    }
    Ok(table)
}

fn fidelity_saturation(spec: &FidelitySpec) -> Result<CsvTable> {
    let input: Box<dyn InputState> = match spec.input {
        FidelityInput::Squeezed => Box::new(SqueezedInput::new(0.5, Complex64::new(0.7, 0.0))),
        FidelityInput::Fock => Box::new(FockInput::new(1)),
    };
    if spec.t2_axis.start <= 0.0 {
        bail!("|T2| axis must be positive for the canonical gain");
    }
    let mut table = CsvTable::new(vec!["zeta", "t2", "fidelity"]);
    for zeta in spec.zeta_axis.values() {
        let params = TmsvParams::new(zeta)?;
        for t2 in spec.t2_axis.values() {
            let ch = ChannelPair::new(1.0, t2)?;
            let scn = TeleportScenario::new(params, ch, canonical_gain(&ch)?)?;
            let k = scn.kernel()?;
            table.push_row(vec![zeta, t2, input.fidelity(k.sigma, k.gain)]);
        }
    }
    Ok(table)
}

fn fidelity_range_curves(opts: &GlobalOpts, spec: &FidelitySpec) -> Result<CsvTable> {
    let (header, inputs): (Vec<&'static str>, Vec<Box<dyn InputState>>) = match spec.input {
        FidelityInput::Squeezed => (
            vec!["l2_over_la", "f_zeta0_0p88", "f_zeta0_1p54", "f_zeta0_1p87"],
            vec![
                Box::new(SqueezedInput::new(0.88, Complex64::new(0.0, 0.0))),
                Box::new(SqueezedInput::new(1.54, Complex64::new(0.0, 0.0))),
                Box::new(SqueezedInput::new(1.87, Complex64::new(0.0, 0.0))),
            ],
        ),
        FidelityInput::Fock => (
            vec!["l2_over_la", "f_n1", "f_n5", "f_n10"],
            vec![
                Box::new(FockInput::new(1)),
                Box::new(FockInput::new(5)),
                Box::new(FockInput::new(10)),
            ],
        ),
    };
    let mut table = CsvTable::new(header);
    for l2 in spec.l2_axis.values() {
        let t2 = transmission_from_length(l2, opts.l_abs)?;
        let ch = ChannelPair::new(1.0, t2)?;
        let mut row = vec![l2];
        for input in &inputs {
            if t2 == 0.0 {
                row.push(f64::NAN);
                continue;
            }
            let scn = TeleportScenario::infinite_squeezing(ch, canonical_gain(&ch)?)?;
            let k = scn.kernel()?;
            row.push(input.fidelity(k.sigma, k.gain));
        }
        table.push_row(row);
    }
    Ok(table)
}

fn fidelity_source_placement(opts: &GlobalOpts, spec: &FidelitySpec) -> Result<CsvTable> {
    let inputs: Vec<Box<dyn InputState>> = match spec.input {
        FidelityInput::Squeezed => vec![
            Box::new(SqueezedInput::new(0.78, Complex64::new(0.5, 0.0))),
            Box::new(SqueezedInput::new(1.44, Complex64::new(1.0, 0.0))),
            Box::new(SqueezedInput::new(1.63, Complex64::new(2.0, 0.0))),
        ],
        FidelityInput::Fock => vec![
            Box::new(FockInput::new(1)),
            Box::new(FockInput::new(5)),
            Box::new(FockInput::new(10)),
        ],
    };
    let mut table = CsvTable::new(vec!["l12_over_la", "l1_star_1", "l1_star_2", "l1_star_3"]);
    for l12 in spec.l12_axis.values() {
        let mut row = vec![l12];
        for input in &inputs {
            let opt = optimize_source_position(l12, opts.l_abs, input.as_ref())?;
            row.push(opt.l1);
        }
        table.push_row(row);
    }
    Ok(table)
}

/// Write the table to the chosen destination.
pub fn write_output(table: &CsvTable, out: Option<&std::path::Path>, sig: usize) -> Result<()> {
    match out {
        Some(path) => {
            let mut f = std::fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))?;
            table.write(&mut f, sig)?;
        }
        None => {
            let stdout = std::io::stdout();
            table.write(&mut stdout.lock(), sig)?;
        }
    }
    Ok(())
}
