//! Regression anchors for the boundary-distance minimizer on asymmetric
//! channels. The frozen values were verified against a 120^3 brute-force
//! grid scan over (x, y, z1) with both boundary roots; the minimizer landed
//! below the grid optimum in every case.

use cvent_core::distance::{distance_to_separable, MinimizerConfig};
use cvent_core::gaussian::{propagate_tmsv, to_std_form, ChannelPair, TmsvParams};

#[test]
fn asymmetric_channel_distance_anchors() {
    for (q, t1, t2, want) in [
        (0.6, 0.9, 0.5, 0.126300905),
        (0.8, 0.95, 0.7, 0.394505194),
        (0.7071, 0.6, 0.9, 0.207653053),
    ] {
        let p = TmsvParams::from_q_mag(q).unwrap();
        let ch = ChannelPair::new(t1, t2).unwrap();
        let rho = to_std_form(&propagate_tmsv(&p, &ch));
        let r = distance_to_separable(&rho, &MinimizerConfig::default()).unwrap();
        assert!(r.converged, "q={q} t1={t1} t2={t2}");
        assert!(
            (r.e_nats - want).abs() < 1e-5,
            "q={q} t1={t1} t2={t2}: {} vs {want}",
            r.e_nats
        );
    }
}
