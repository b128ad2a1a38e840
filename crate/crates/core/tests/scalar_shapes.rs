use num_complex::Complex;

use jpstate::beamsplitter::{conditional_oracle, ConditionalIndices};
use jpstate::fock::{coherent_state, squeezed_vacuum};
use jpstate::jpstates::{jp_state_general, jp_state_jacobi_form};
use jpstate::{
    BeamSplitterF32, BeamSplitterF64, CoherentParamsF32, CoherentParamsF64, FockVectorF32, FockVectorF64,
    SqueezeParamsF32, SqueezeParamsF64, TwoModeStateF32,
};

fn widen(v: &FockVectorF32) -> FockVectorF64 {
    FockVectorF64::new(v.amps().iter().map(|a| Complex::new(a.re as f64, a.im as f64)).collect())
}

#[test]
fn single_precision_tracks_double_precision() {
    let b32 = BeamSplitterF32::from_transmittance_phases(0.81, 0.2, -0.3).unwrap();
    let b64 = BeamSplitterF64::from_transmittance_phases(0.81, 0.2, -0.3).unwrap();
    let in32 = coherent_state(&CoherentParamsF32::polar(1.5, 0.4), 30).unwrap();
    let in64 = coherent_state(&CoherentParamsF64::polar(1.5, 0.4), 30).unwrap();
    for (n, m) in [(2, 3), (3, 2), (0, 2), (2, 0)] {
        let o32 = conditional_oracle(&in32, n, m, &b32).unwrap();
        let o64 = conditional_oracle(&in64, n, m, &b64).unwrap();
        assert!((o32.probability as f64 - o64.probability).abs() < 1e-5);
        assert!(1.0 - widen(&o32.state).fidelity(&o64.state) < 1e-5);
        let idx = ConditionalIndices::new(n, m);
        let g = jp_state_general(&in32, idx, &b32).unwrap().state;
        let j = jp_state_jacobi_form(&in32, idx, &b32).unwrap().state;
        assert!(1.0 - widen(&g).fidelity(&o64.state) < 1e-5);
        assert!(1.0 - widen(&j).fidelity(&o64.state) < 1e-5);
    }
}

#[test]
fn squeezed_states_in_both_precisions() {
    let s32 = squeezed_vacuum(&SqueezeParamsF32::polar(0.4, 0.1), 40).unwrap();
    let s64 = squeezed_vacuum(&SqueezeParamsF64::polar(0.4, 0.1), 40).unwrap();
    assert!(1.0 - widen(&s32).fidelity(&s64) < 1e-6);
    assert!((s32.mean_photon_number() as f64 - s64.mean_photon_number()).abs() < 1e-5);
    let two = TwoModeStateF32::product(&s32, &FockVectorF32::basis(2, 1));
    assert!((two.norm_sqr() - 1.0).abs() < 1e-5);
}
