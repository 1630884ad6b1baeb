//! `V(x)` and the potential part of the discretized Euclidean action.

use crate::model::Potential;

/// `V(x)` for particle mass `mass` (the harmonic term depends on it).
pub fn evaluate(potential: &Potential, mass: f64, x: f64) -> f64 {
    match potential {
        Potential::Free => 0.0,
        Potential::Harmonic { omega } => 0.5 * mass * omega * omega * x * x,
        Potential::Sech2 { depth, width } => {
            let s = (x / width).cosh().recip();
            -depth * s * s
        }
        // Horner
        Potential::Polynomial { coefficients } => {
            coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
        }
    }
}

/// Trapezoidal `S_V = a₀·[½V(x₀) + Σ V(x_k) + ½V(x_{n_t})]` along a sampled path.
pub fn action_potential(potential: &Potential, mass: f64, path: &[f64], slice_width: f64) -> f64 {
    debug_assert!(path.len() >= 3, "path needs at least two time slices");
    if matches!(potential, Potential::Free) {
        return 0.0;
    }
    let last = path.len() - 1;
    let ends = 0.5 * (evaluate(potential, mass, path[0]) + evaluate(potential, mass, path[last]));
    let interior: f64 = path[1..last].iter().map(|&x| evaluate(potential, mass, x)).sum();
    slice_width * (ends + interior)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn harmonic_value() {
        let v = evaluate(&Potential::Harmonic { omega: 0.6 }, 1.0, 1.0);
        assert!((v - 0.18).abs() < 1e-15);
    }

    #[test]
    fn sech2_minimum_and_tails() {
        let p = Potential::Sech2 { depth: 1.0, width: 1.0 };
        assert_eq!(evaluate(&p, 1.0, 0.0), -1.0);
        let wide = Potential::Sech2 { depth: 1.0, width: 2.0 };
        assert!(evaluate(&wide, 1.0, 200.0).abs() < 1e-40);
        assert!(evaluate(&wide, 1.0, -200.0).abs() < 1e-40);
        // cosh overflows to inf far out; sech² must still be 0, not NaN
        assert_eq!(evaluate(&wide, 1.0, 1e6), 0.0);
    }

    #[test]
    fn free_is_zero() {
        assert_eq!(evaluate(&Potential::Free, 1.0, 3.7), 0.0);
        assert_eq!(action_potential(&Potential::Free, 1.0, &[0.3, -1.0, 4.0], 0.5), 0.0);
    }

    #[test]
    fn polynomial_horner() {
        let p = Potential::Polynomial { coefficients: vec![1.0, -2.0, 0.0, 0.5] };
        // 1 − 2x + 0.5x³ at x = 2
        assert!((evaluate(&p, 1.0, 2.0) - 1.0).abs() < 1e-15);
        let empty = Potential::Polynomial { coefficients: vec![] };
        assert_eq!(evaluate(&empty, 1.0, 2.0), 0.0);
    }

    #[test]
    fn constant_path_harmonic() {
        let p = Potential::Harmonic { omega: 1.0 };
        let path = vec![1.0; 65];
        let s = action_potential(&p, 1.0, &path, 1.0 / 64.0);
        assert!((s - 0.5).abs() < 1e-14);
    }

    #[test]
    fn linear_path_two_slices() {
        let p = Potential::Harmonic { omega: 1.0 };
        let s = action_potential(&p, 1.0, &[0.0, 0.5, 1.0], 0.5);
        assert!((s - 0.1875).abs() < 1e-15);
    }

    #[test]
    fn second_order_convergence() {
        // ∫₀¹ ½ t² dt = 1/6 along x(t) = t
        let p = Potential::Harmonic { omega: 1.0 };
        let err = |n: usize| {
            let path: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
            (action_potential(&p, 1.0, &path, 1.0 / n as f64) - 1.0 / 6.0).abs()
        };
        for n in [4, 8, 16, 32] {
            let ratio = err(n) / err(2 * n);
            assert!((ratio - 4.0).abs() < 0.05, "n={n} ratio={ratio}");
        }
    }

    proptest! {
        #[test]
        fn reversal_invariant(path in prop::collection::vec(-5.0f64..5.0, 3..40), omega in 0.1f64..3.0) {
            let mut rev = path.clone();
            rev.reverse();
            for p in [
                Potential::Harmonic { omega },
                Potential::Sech2 { depth: omega, width: 1.5 },
                Potential::Polynomial { coefficients: vec![0.1, -0.3, omega, 0.0, 0.05] },
            ] {
                let a = action_potential(&p, 1.3, &path, 0.1);
                let b = action_potential(&p, 1.3, &rev, 0.1);
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }
    }
}
