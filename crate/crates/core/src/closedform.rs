//! The unitarily invariant qubit source.
//!
//! Its trade-off curve has a one-parameter form. For λ > 0 the optimal
//! posteriors are tilted towards a direction n with density ∝ exp(λ|⟨ψ|n⟩|²),
//! which gives
//!
//! ```text
//! R(λ) = [λ/(e^λ − 1) − 1 + ln(λ e^λ / (e^λ − 1))] / ln 2
//! Q(λ) = H₂(1/λ − 1/(e^λ − 1))
//! ```
//!
//! in bits. A finite ensemble spread over the Bloch sphere approximates it.

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::qcore::{binary_entropy, Ensemble, PureState};

/// Below this λ the closed form loses digits to cancellation; use the series.
const SERIES_BELOW: f64 = 1e-2;

/// (R, Q) in bits at parameter `lambda`.
pub fn devetak_berger(lambda: f64) -> Result<(f64, f64)> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    let (rate_nats, minority) = if lambda < SERIES_BELOW {
        let l2 = lambda * lambda;
        (
            l2 / 24.0 - l2 * l2 / 960.0 + l2 * l2 * l2 / 36288.0,
            0.5 - lambda / 12.0 + lambda * l2 / 720.0 - lambda * l2 * l2 / 30240.0,
        )
    } else {
        let em1 = lambda.exp_m1();
        // ln(e^λ − 1) = λ + ln(1 − e^{−λ})
        (
            lambda / em1 - 1.0 + lambda.ln() - (-(-lambda).exp()).ln_1p(),
            1.0 / lambda - 1.0 / em1,
        )
    };
    Ok((rate_nats / LN_2, binary_entropy(minority)))
}

/// Q at a given rate, by bisection on λ. Q = 1 at R ≤ 0.
pub fn devetak_berger_at_rate(rate: f64) -> Result<f64> {
    if rate.is_nan() {
        return Err(Error::InvalidArgument("rate is NaN".into()));
    }
    if rate <= 0.0 {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (1e-8f64, 1.0f64);
    while devetak_berger(hi)?.0 < rate {
        hi *= 2.0;
        if hi > 1e300 {
            return Ok(0.0);
        }
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if devetak_berger(mid)?.0 < rate {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-15 {
            break;
        }
    }
    Ok(devetak_berger(0.5 * (lo + hi))?.1)
}

/// Samples on a log-spaced λ grid over [10⁻², 10³], increasing in R.
pub fn uniform_qubit_curve(n_lambda: usize) -> Result<Vec<(f64, f64)>> {
    if n_lambda < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let (lo, hi) = (1e-2f64.ln(), 1e3f64.ln());
    (0..n_lambda)
        .map(|k| {
            let t = k as f64 / (n_lambda - 1) as f64;
            devetak_berger((lo + t * (hi - lo)).exp())
        })
        .collect()
}

/// Finite stand-in for the uniform qubit source.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub ensemble: Ensemble,
    /// Largest trace distance from a pure state to the nearest member, estimated by sampling.
    pub covering_radius: f64,
}

fn bloch_state(v: [f64; 3]) -> PureState {
    let [x, y, z] = v;
    let theta = z.clamp(-1.0, 1.0).acos();
    let phi = y.atan2(x);
    let (s, c) = (0.5 * theta).sin_cos();
    PureState::normalized(vec![C64::new(c, 0.0), C64::from_polar(s, phi)]).expect("unit Bloch vector")
}

fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - (2 * k + 1) as f64 / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * k as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Bloch vectors: poles, tetrahedron and octahedron for n = 2, 4, 6, otherwise
/// a Fibonacci lattice, symmetrized under inversion when n is even.
pub fn sphere_points(n: usize) -> Vec<[f64; 3]> {
    let t = 1.0 / 3f64.sqrt();
    match n {
        2 => vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]],
        4 => vec![[t, t, t], [t, -t, -t], [-t, t, -t], [-t, -t, t]],
        6 => vec![
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ],
        _ => {
            let mut pts = fibonacci_sphere(n);
            if n % 2 == 0 {
                for k in n / 2..n {
                    let [x, y, z] = pts[n - 1 - k];
                    pts[k] = [-x, -y, -z];
                }
            }
            pts
        }
    }
}

pub fn discretize_uniform_qubit(n_points: usize) -> Result<Discretization> {
    if n_points < 2 {
        return Err(Error::InvalidArgument("need at least two points".into()));
    }
    let pts = sphere_points(n_points);
    let ensemble = Ensemble::uniform(pts.iter().map(|&v| bloch_state(v)).collect())?;
    // Pure states at Bloch angle α are at trace distance sin(α/2) = √((1 − cos α)/2).
    let probes = fibonacci_sphere(20_000);
    let covering_radius = probes
        .iter()
        .map(|p| {
            let best_cos = pts
                .iter()
                .map(|q| p[0] * q[0] + p[1] * q[1] + p[2] * q[2])
                .fold(f64::NEG_INFINITY, f64::max);
            ((1.0 - best_cos) / 2.0).max(0.0).sqrt()
        })
        .fold(0.0, f64::max);
    Ok(Discretization {
        ensemble,
        covering_radius,
    })
}

/// Upper bound C(d) ε^(−d²), with C(d) = (2√2 d³)^(d²), on the number of cells
/// of radius ε needed to partition the pure states of dimension d.
pub fn partition_count_bound(dim: usize, eps: f64) -> Result<f64> {
    if dim == 0 || !(eps > 0.0) {
        return Err(Error::InvalidArgument("need d ≥ 1 and ε > 0".into()));
    }
    let d = dim as f64;
    let exponent = d * d;
    Ok((2.0 * 2f64.sqrt() * d.powi(3)).powf(exponent) * eps.powf(-exponent))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // Reference values from a 40-digit evaluation of the closed form.
    const REFERENCE: [(f64, f64, f64); 5] = [
        (1e-3, 6.0112291867566183e-8, 0.99999997996256945),
        (0.1, 0.00060097269271668322, 0.99979968318730348),
        (1.0, 0.058648225653271094, 0.98052183911836673),
        (5.0, 0.93792048016400487, 0.70815152440416764),
        (30.0, 3.4641955547237402, 0.21084230031807755),
    ];

    #[test]
    fn matches_high_precision_reference() {
        for (l, r, q) in REFERENCE {
            let (rr, qq) = devetak_berger(l).unwrap();
            assert_abs_diff_eq!(rr, r, epsilon = 1e-13);
            assert_abs_diff_eq!(qq, q, epsilon = 1e-13);
        }
    }

    #[test]
    fn lambda_one_direct_form() {
        let e = std::f64::consts::E;
        let (r, q) = devetak_berger(1.0).unwrap();
        let direct_r = (1.0 / (e - 1.0) - 1.0 + (e / (e - 1.0)).ln()) / LN_2;
        assert_abs_diff_eq!(r, direct_r, epsilon = 1e-14);
        assert_abs_diff_eq!(q, binary_entropy(1.0 - 1.0 / (e - 1.0)), epsilon = 1e-14);
    }

    #[test]
    fn limits() {
        let (r, q) = devetak_berger(1e-6).unwrap();
        assert!(r < 1e-12 && (1.0 - q) < 1e-12);
        let (r, q) = devetak_berger(1e6).unwrap();
        assert!(r > 15.0 && q < 1e-4 && q > 0.0);
        assert!(devetak_berger(0.0).is_err());
        assert!(devetak_berger(-1.0).is_err());
        // Series and closed form agree where they meet.
        let below = devetak_berger(SERIES_BELOW * (1.0 - 1e-9)).unwrap();
        let above = devetak_berger(SERIES_BELOW * (1.0 + 1e-9)).unwrap();
        assert_abs_diff_eq!(below.0, above.0, epsilon = 1e-12);
        assert_abs_diff_eq!(below.1, above.1, epsilon = 1e-12);
    }

    #[test]
    fn inverse_round_trips() {
        for &(_, r, q) in REFERENCE.iter().skip(1) {
            assert_abs_diff_eq!(devetak_berger_at_rate(r).unwrap(), q, epsilon = 1e-9);
        }
        assert_eq!(devetak_berger_at_rate(0.0).unwrap(), 1.0);
    }

    #[test]
    fn curve_is_monotone_and_above_schumacher() {
        let c = uniform_qubit_curve(200).unwrap();
        for w in c.windows(2) {
            assert!(w[1].0 > w[0].0);
            assert!(w[1].1 < w[0].1);
        }
        for &(r, q) in &c {
            assert!(q + r >= 1.0 - 1e-9);
            assert!(q > 0.0 && q < 1.0);
        }
    }

    #[test]
    fn small_discretizations() {
        let poles = discretize_uniform_qubit(2).unwrap();
        assert_abs_diff_eq!(poles.covering_radius, 0.5f64.sqrt(), epsilon = 1e-3);
        let octa = discretize_uniform_qubit(6).unwrap();
        assert_abs_diff_eq!(octa.ensemble.entropy(), 1.0, epsilon = 1e-12);
        let fine = discretize_uniform_qubit(64).unwrap();
        assert_abs_diff_eq!(fine.ensemble.entropy(), 1.0, epsilon = 1e-12);
        assert!(fine.covering_radius < octa.covering_radius);
        assert!(discretize_uniform_qubit(1).is_err());
    }

    #[test]
    fn partition_bound_for_qubits() {
        // (2√2·8)^4 ε^-4
        let c = partition_count_bound(2, 1.0).unwrap();
        assert_abs_diff_eq!(c, (16.0 * 2f64.sqrt()).powi(4), epsilon = 1e-6);
        assert_abs_diff_eq!(partition_count_bound(2, 0.5).unwrap(), 16.0 * c, epsilon = 1e-3);
    }
}
