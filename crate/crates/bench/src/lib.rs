//! Fixtures shared by the benchmarks in `benches/`.

use std::f64::consts::PI;

use tradeoff_core::{EncodingKernel, Ensemble, PureState, C64};

/// BB84 states at angle π/8, uniform prior.
pub fn bb84() -> Ensemble {
    let (s, c) = (PI / 8.0).sin_cos();
    let st = |v: [f64; 2]| PureState::from_real(&v).unwrap();
    Ensemble::uniform(vec![st([1.0, 0.0]), st([c, s]), st([0.0, 1.0]), st([-s, c])]).unwrap()
}

/// `m` deterministic, generic states in dimension `d`.
pub fn spread(m: usize, d: usize) -> Ensemble {
    let states = (0..m)
        .map(|i| {
            let amps = (0..d)
                .map(|k| {
                    let t = 1.0 + (i * d + k) as f64;
                    C64::new((0.7 * t).sin(), (1.3 * t).cos())
                })
                .collect();
            PureState::normalized(amps).unwrap()
        })
        .collect();
    Ensemble::uniform(states).unwrap()
}

/// Splits BB84 by basis.
pub fn basis_kernel() -> EncodingKernel {
    EncodingKernel::deterministic(&[0, 0, 1, 1])
}

/// A typical-looking joint count table n[i][j] for the basis kernel.
pub fn basis_counts(n: usize) -> Vec<Vec<usize>> {
    let q = n / 4;
    vec![vec![q, 0], vec![q, 0], vec![0, q], vec![0, n - 3 * q]]
}
