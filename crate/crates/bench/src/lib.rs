//! Shared fixtures for the benchmarks.

use fringecorr::interference::{DEFAULT_OMEGA_1, DEFAULT_OMEGA_2};
use fringecorr::{Evaluator, ModeParams, ScanSetup, TwoModeState};

/// Default-frequency setup with coupling `q` for `state`.
pub fn setup(state: TwoModeState, q: f64, time: f64) -> ScanSetup {
    ScanSetup {
        mode_a: ModeParams::with_q(DEFAULT_OMEGA_1, q).expect("valid mode"),
        mode_b: ModeParams::with_q(DEFAULT_OMEGA_2, q).expect("valid mode"),
        state,
        time,
        evaluator: Evaluator::default(),
    }
}
