//! Hashing lower bound on one-way distillable entanglement.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::IsotropicParams;
use crate::tensor::{entropy, DensityState};

const BISECTION_LO: f64 = 1e-6;
const BISECTION_HI: f64 = 1.0 - 1e-6;
const BISECTION_STEPS: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HashingResult {
    /// `S_B − S_AB` in bits.
    pub value: f64,
    /// `(S_B, S_AB)`.
    pub entropies: (f64, f64),
}

/// `S(ρ_B) − S(ρ_AB)` where `b` lists the subsystems on the receiving side
/// and the remaining subsystems form `A`.
pub fn hashing_bound(state: &DensityState, b: &[usize]) -> Result<HashingResult> {
    let n = state.dims().len();
    if let Some(&index) = b.iter().find(|&&k| k >= n) {
        return Err(Error::IndexOutOfRange { index, count: n });
    }
    let mut sorted = b.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != b.len() {
        return Err(Error::InvalidParameter(format!(
            "cut {b:?} repeats a subsystem"
        )));
    }
    if sorted.is_empty() || sorted.len() == n {
        return Err(Error::InvalidParameter(format!(
            "cut {b:?} leaves one side of {n} subsystems empty"
        )));
    }
    let s_b = entropy(&state.reduce(&sorted)?)?;
    let s_ab = entropy(state)?;
    Ok(HashingResult {
        value: s_b - s_ab,
        entropies: (s_b, s_ab),
    })
}

/// Hashing bound of the isotropic state from its spectrum alone, usable for
/// dimensions far beyond what can be materialized.
pub fn isotropic_hashing(p: f64, d: usize) -> Result<f64> {
    let params = IsotropicParams::new(p, d)?;
    let (top, rest) = params.eigenvalues();
    let d = d as f64;
    let h = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    Ok(d.log2() - h(top) - (d * d - 1.0) * h(rest))
}

/// Smallest `p` at which the isotropic hashing bound turns positive.
pub fn hashing_threshold(d: usize) -> Result<f64> {
    let (mut lo, mut hi) = (BISECTION_LO, BISECTION_HI);
    if isotropic_hashing(lo, d)? >= 0.0 || isotropic_hashing(hi, d)? <= 0.0 {
        return Err(Error::NoSignChange { lo, hi });
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if isotropic_hashing(mid, d)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// [`hashing_threshold`] over several dimensions, evaluated in parallel.
pub fn hashing_thresholds(ds: &[usize]) -> Vec<Result<f64>> {
    ds.par_iter().map(|&d| hashing_threshold(d)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{isotropic, max_entangled};
    use proptest::prelude::*;

    #[test]
    fn pure_and_mixed_extremes() {
        let phi = max_entangled(2).unwrap();
        let r = hashing_bound(&phi, &[1]).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        assert!((r.entropies.0 - 1.0).abs() < 1e-10 && r.entropies.1.abs() < 1e-10);
        let mixed = DensityState::maximally_mixed(vec![2, 2]);
        assert!((hashing_bound(&mixed, &[1]).unwrap().value + 1.0).abs() < 1e-10);
    }

    #[test]
    fn isotropic_spectrum_entropy() {
        let s = isotropic(IsotropicParams::new(0.9, 2).unwrap()).unwrap();
        let r = hashing_bound(&s, &[1]).unwrap();
        let expected = 1.0 + 0.925 * 0.925f64.log2() + 3.0 * 0.025 * 0.025f64.log2();
        assert!((r.value - expected).abs() < 1e-10);
        assert_eq!(r.value, r.entropies.0 - r.entropies.1);
    }

    #[test]
    fn closed_form_matches_materialized_states() {
        for d in 2..=8 {
            for p in [0.0, 0.3, 0.55, 0.8, 1.0] {
                let s = isotropic(IsotropicParams::new(p, d).unwrap()).unwrap();
                let direct = hashing_bound(&s, &[1]).unwrap().value;
                let closed = isotropic_hashing(p, d).unwrap();
                assert!((direct - closed).abs() < 1e-10, "d={d} p={p}");
            }
        }
        assert!((isotropic_hashing(1.0, 1 << 16).unwrap() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn qubit_threshold_matches_werner_fidelity_root() {
        // in the Bell basis the state has fidelity F and three weights (1−F)/3
        let g = |f: f64| 1.0 + f * f.log2() + (1.0 - f) * ((1.0 - f) / 3.0).log2();
        let mut f = 0.8;
        for _ in 0..50 {
            let h = 1e-7;
            f -= g(f) * 2.0 * h / (g(f + h) - g(f - h));
        }
        assert!((f - 0.8107).abs() < 1e-4);
        let p = hashing_threshold(2).unwrap();
        assert!((p - (4.0 * f - 1.0) / 3.0).abs() < 1e-9);
        assert!((p - 0.7476).abs() < 1e-3);
    }

    #[test]
    fn thresholds_decrease_towards_one_half() {
        let ds: Vec<usize> = (1..=16).map(|k| 1usize << k).collect();
        let ps: Vec<f64> = hashing_thresholds(&ds)
            .into_iter()
            .map(|r| r.unwrap())
            .collect();
        for w in ps.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert!(ps.iter().all(|&p| p > 0.5 && p < 1.0));
        // the approach to 1/2 is slow: roughly 1/2 + O(1/log d)
        let big = isotropic_hashing(0.51, 1 << 16).unwrap();
        assert!(
            big < 0.0,
            "p = 0.51 is still below threshold at d = 2^16: {big}"
        );
    }

    #[test]
    fn additive_over_product_states() {
        let a = isotropic(IsotropicParams::new(0.8, 2).unwrap()).unwrap();
        let b = isotropic(IsotropicParams::new(0.95, 2).unwrap()).unwrap();
        let joint = a.tensor(&b);
        let sum = hashing_bound(&a, &[1]).unwrap().value + hashing_bound(&b, &[1]).unwrap().value;
        let whole = hashing_bound(&joint, &[1, 3]).unwrap().value;
        assert!((whole - sum).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_cuts() {
        let phi = max_entangled(2).unwrap();
        assert!(hashing_bound(&phi, &[]).is_err());
        assert!(hashing_bound(&phi, &[0, 1]).is_err());
        assert!(hashing_bound(&phi, &[1, 1]).is_err());
        assert!(matches!(
            hashing_bound(&phi, &[2]),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    proptest! {
        #[test]
        fn increasing_in_p(d in 2usize..64, p in 0.0f64..0.99) {
            let a = isotropic_hashing(p, d).unwrap();
            let b = isotropic_hashing(p + 0.01, d).unwrap();
            prop_assert!(b > a);
        }
    }
}
