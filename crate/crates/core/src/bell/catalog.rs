use std::f64::consts::PI;

use rayon::prelude::*;

use super::{BellFunctional, BoundKind};
use crate::behaviors::{decode, Scenario};
use crate::error::{Error, Result};
use crate::measurements::{projective, MeasurementAssignment, Povm};
use crate::polytope::{deterministic_vertices, hybrid_vertices_3party};
use crate::tensor::{Operator, C64};

/// Largest number of sign patterns enumerated by [`correlator_local_bound`].
const MAX_SIGN_PATTERNS: u64 = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CatalogName {
    Chsh,
    Mermin { n: usize },
    Svetlichny,
    Cglmp { d: usize },
    Plane { n: usize, k: usize },
}

pub fn catalog(name: CatalogName) -> Result<BellFunctional> {
    match name {
        CatalogName::Chsh => Ok(chsh()),
        CatalogName::Mermin { n } => mermin(n),
        CatalogName::Svetlichny => Ok(svetlichny()),
        CatalogName::Cglmp { d } => cglmp(d),
        CatalogName::Plane { n, k } => plane(n, k),
    }
}

/// `c[x⃗][a⃗] = w[x⃗]·∏ᵢ(−1)^{aᵢ}` on a dichotomic scenario.
pub fn correlator_functional(
    parties: usize,
    settings: usize,
    weights: &[f64],
    bound: f64,
    bound_kind: BoundKind,
) -> Result<BellFunctional> {
    let s = Scenario::new(parties, settings, 2)?;
    if weights.len() != s.setting_count() {
        return Err(Error::InvalidParameter(format!(
            "{} correlator weights for {} setting tuples",
            weights.len(),
            s.setting_count()
        )));
    }
    let ro = s.outcome_count();
    let mut coeffs = vec![0.0; s.len()];
    for (x, &w) in weights.iter().enumerate() {
        for a in 0..ro {
            let sign = if (a as u64).count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            coeffs[x * ro + a] = w * sign;
        }
    }
    BellFunctional::new(s, coeffs, bound, bound_kind)
}

/// `max Σ w[x⃗] ∏ sᵢ(xᵢ)` over sign vectors `sᵢ ∈ {±1}^m`: the local bound of
/// a correlator functional. The last party is maximized in closed form.
pub fn correlator_local_bound(parties: usize, settings: usize, weights: &[f64]) -> Result<f64> {
    if parties == 0 || settings == 0 || weights.len() != settings.pow(parties as u32) {
        return Err(Error::InvalidParameter(format!(
            "{} weights for {parties} parties with {settings} settings",
            weights.len()
        )));
    }
    let bits = settings * (parties - 1);
    if bits >= 64 || (1u64 << bits) > MAX_SIGN_PATTERNS {
        return Err(Error::GuardExceeded(format!("2^{bits} sign patterns")));
    }
    let head = settings.pow(parties as u32 - 1);
    let prefixes: Vec<Vec<usize>> = (0..head)
        .map(|x| decode(x, settings, parties - 1))
        .collect();
    let best = (0..1u64 << bits)
        .into_par_iter()
        .map(|code| {
            let sign = |party: usize, x: usize| {
                if code >> (party * settings + x) & 1 == 0 {
                    1.0
                } else {
                    -1.0
                }
            };
            let prefix_sign: Vec<f64> = prefixes
                .iter()
                .map(|xs| xs.iter().enumerate().map(|(i, &x)| sign(i, x)).product())
                .collect();
            (0..settings)
                .map(|last| {
                    (0..head)
                        .map(|h| weights[h * settings + last] * prefix_sign[h])
                        .sum::<f64>()
                        .abs()
                })
                .sum::<f64>()
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(best)
}

fn local_correlator(parties: usize, settings: usize, weights: Vec<f64>) -> Result<BellFunctional> {
    let bound = correlator_local_bound(parties, settings, &weights)?;
    correlator_functional(parties, settings, &weights, bound, BoundKind::Local)
}

/// `E₀₀ + E₀₁ + E₁₀ − E₁₁`.
pub fn chsh() -> BellFunctional {
    local_correlator(2, 2, vec![1.0, 1.0, 1.0, -1.0]).expect("fixed CHSH weights")
}

/// Correlator weights of the `n`-party Mermin functional, defined as twice
/// the recursive Mermin–Ardehali–Belinskii–Klyshko polynomial.
pub fn mermin_weights(n: usize) -> Result<Vec<f64>> {
    if !(2..=10).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "Mermin functional needs 2 ≤ n ≤ 10, got {n}"
        )));
    }
    let mut m = vec![1.0, 0.0];
    let mut mp = vec![0.0, 1.0];
    for _ in 1..n {
        let mut next = Vec::with_capacity(2 * m.len());
        let mut next_p = Vec::with_capacity(2 * m.len());
        for (&u, &v) in m.iter().zip(&mp) {
            next.extend([0.5 * (u + v), 0.5 * (u - v)]);
            next_p.extend([0.5 * (v - u), 0.5 * (v + u)]);
        }
        m = next;
        mp = next_p;
    }
    Ok(m.into_iter().map(|w| 2.0 * w).collect())
}

pub fn mermin(n: usize) -> Result<BellFunctional> {
    local_correlator(n, 2, mermin_weights(n)?)
}

/// Mermin(3) plus its copy with every setting flipped. The bound is the
/// maximum over the hybrid no-signalling vertices.
pub fn svetlichny() -> BellFunctional {
    let m = mermin_weights(3).expect("n = 3 is supported");
    let weights: Vec<f64> = (0..8).map(|x| m[x] + m[7 - x]).collect();
    let mut f = correlator_functional(3, 2, &weights, 0.0, BoundKind::HybridNs)
        .expect("fixed Svetlichny weights");
    f.bound = f
        .bound_over(&hybrid_vertices_3party())
        .expect("matching scenario");
    f
}

/// CGLMP functional for two parties, two settings and `d` outcomes, with
/// local bound 2.
pub fn cglmp(d: usize) -> Result<BellFunctional> {
    if !(2..=8).contains(&d) {
        return Err(Error::InvalidParameter(format!(
            "CGLMP needs 2 ≤ d ≤ 8, got {d}"
        )));
    }
    let s = Scenario::new(2, 2, d)?;
    let mut coeffs = vec![0.0; s.len()];
    let di = d as i64;
    // P(a − b ≡ shift mod d | x, y) gets `weight`
    let mut add = |x: usize, y: usize, shift: i64, weight: f64| {
        for b in 0..d {
            let a = ((b as i64 + shift).rem_euclid(di)) as usize;
            coeffs[s.index(&[x, y], &[a, b])] += weight;
        }
    };
    for k in 0..d / 2 {
        let w = 1.0 - 2.0 * k as f64 / (d as f64 - 1.0);
        let k = k as i64;
        add(0, 0, k, w);
        add(1, 0, -(k + 1), w);
        add(1, 1, k, w);
        add(0, 1, -k, w);
        add(0, 0, -(k + 1), -w);
        add(1, 0, k, -w);
        add(1, 1, -(k + 1), -w);
        add(0, 1, k + 1, -w);
    }
    let mut f = BellFunctional::new(s, coeffs, 0.0, BoundKind::Local)?;
    f.bound = f.bound_over(&deterministic_vertices(s)?)?;
    Ok(f)
}

/// Qubit observable `cos θ·Z + sin θ·X` as a two-outcome measurement.
pub fn real_plane_povm(angle: f64) -> Result<Povm> {
    let (c, s) = (angle.cos(), angle.sin());
    Povm::from_observable(&Operator::from_real_rows(vec![2], &[&[c, s], &[s, -c]])?)
}

/// Alice at angles `0, π/2`, Bob at `±π/4`: Tsirelson's bound on `|Φ⁺⟩`.
pub fn chsh_measurements() -> MeasurementAssignment {
    use std::f64::consts::FRAC_PI_4;
    let povms = |angles: [f64; 2]| {
        angles
            .iter()
            .map(|&a| real_plane_povm(a).expect("real-plane observables are valid"))
            .collect()
    };
    MeasurementAssignment::new(vec![
        povms([0.0, 2.0 * FRAC_PI_4]),
        povms([FRAC_PI_4, -FRAC_PI_4]),
    ])
    .expect("two qubit parties with two settings")
}

/// Fourier-basis measurements that are optimal for CGLMP on the maximally
/// entangled state: `|k⟩_x ∝ Σⱼ ω^{j(k+αₓ)}|j⟩` for Alice with `α = (0, ½)`
/// and `Σⱼ ω^{−j(k+β_y)}|j⟩` for Bob with `β = (−¼, ¼)`.
pub fn cglmp_fourier_measurements(d: usize) -> Result<MeasurementAssignment> {
    let basis = |shift: f64, sign: f64| -> Vec<Vec<C64>> {
        let norm = 1.0 / (d as f64).sqrt();
        (0..d)
            .map(|k| {
                (0..d)
                    .map(|j| {
                        let phase = sign * 2.0 * PI * j as f64 * (k as f64 + shift) / d as f64;
                        C64::from_polar(norm, phase)
                    })
                    .collect()
            })
            .collect()
    };
    let alice = [0.0, 0.5]
        .iter()
        .map(|&a| projective(&basis(a, 1.0)))
        .collect::<Result<Vec<_>>>()?;
    let bob = [-0.25, 0.25]
        .iter()
        .map(|&b| projective(&basis(b, -1.0)))
        .collect::<Result<Vec<_>>>()?;
    MeasurementAssignment::new(vec![alice, bob])
}

/// Correlator functional with `k` settings per party at equally spaced
/// equatorial angles `θₓ = 2πx/k`: `c(x⃗) = cos(Σθ)/kⁿ`.
pub fn plane(n: usize, k: usize) -> Result<BellFunctional> {
    if n == 0 || k < 2 {
        return Err(Error::InvalidParameter(format!(
            "plane functional with n = {n}, K = {k} is outside the supported range"
        )));
    }
    let s = Scenario::new(n, k, 2)?;
    let norm = (k as f64).powi(n as i32);
    let weights: Vec<f64> = (0..s.setting_count())
        .map(|x| {
            let total: usize = decode(x, k, n).iter().sum();
            (2.0 * PI * total as f64 / k as f64).cos() / norm
        })
        .collect();
    local_correlator(n, k, weights)
}
