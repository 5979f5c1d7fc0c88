//! Network protocols: entanglement swapping in the star and Λ networks,
//! flag-based activation from many copies, and the associated thresholds.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::behaviors::{mix, Behavior, Scenario};
use crate::bell::{
    polytope_seesaw, seesaw, svetlichny, BellFunctional, PolytopeSearch, SeesawOptions,
};
use crate::error::{Error, Result};
use crate::measurements::measure_and_condition;
use crate::polytope::{hybrid_vertices_3party, visibility, MEMBER_TOL};
use crate::states::{compose_network, ghz_ket, phi_ket, IsotropicParams, NetworkLayout, StateSpec};
use crate::tensor::{DensityState, Operator};

/// Largest star handled densely: `2N` qubits.
pub const MAX_STAR_LEAVES: usize = 5;
/// Largest local dimension accepted by [`lambda_swap`].
pub const MAX_SWAP_DIM: usize = 4;
/// Seesaw rounds used when searching for the Λ-network behavior.
pub const LAMBDA_SEARCH_ROUNDS: usize = 100;

#[derive(Clone, Debug)]
pub struct StarResult {
    pub p: f64,
    pub leaves: usize,
    pub success_prob: f64,
    /// State of the leaves after the center's GHZ projection.
    pub conditional: DensityState,
}

/// Links isotropic qubit pairs between a center and `leaves` parties, then
/// projects the center's qubits onto the GHZ state.
pub fn star_conditional(p: f64, leaves: usize) -> Result<StarResult> {
    if leaves < 2 {
        return Err(Error::InvalidParameter(format!(
            "a star needs at least two leaves, got {leaves}"
        )));
    }
    if leaves > MAX_STAR_LEAVES {
        return Err(Error::GuardExceeded(format!(
            "star with {leaves} leaves exceeds {MAX_STAR_LEAVES}"
        )));
    }
    IsotropicParams::new(p, 2)?;
    let layout = NetworkLayout::star(leaves, StateSpec::Iso { p, d: 2 });
    let (state, map) = compose_network(&layout, &layout.build_states()?)?;
    let center = map.subsystems_of("A").expect("star has a center").to_vec();
    let effect = Operator::projector(vec![2; leaves], &ghz_ket(leaves))?;
    let (success_prob, conditional) = measure_and_condition(&state, &effect, &center)?;
    let conditional = conditional
        .ok_or_else(|| Error::InvalidParameter("GHZ projection has zero probability".into()))?;
    Ok(StarResult {
        p,
        leaves,
        success_prob,
        conditional,
    })
}

/// Swaps entanglement through `A`: the first subsystems of both states are
/// projected onto `|Φ⟩`, leaving a state on the two second subsystems.
pub fn lambda_swap(rho_ab: &DensityState, rho_ac: &DensityState) -> Result<(f64, DensityState)> {
    let d = match (rho_ab.dims(), rho_ac.dims()) {
        ([a, b], [c, e]) if a == b && b == c && c == e => *a,
        (x, y) => {
            return Err(Error::DimensionMismatch(format!(
                "swap needs two d×d states with equal d, got {x:?} and {y:?}"
            )))
        }
    };
    if d > MAX_SWAP_DIM {
        return Err(Error::GuardExceeded(format!(
            "swap dimension {d} exceeds {MAX_SWAP_DIM}"
        )));
    }
    let joint = rho_ab.tensor(rho_ac);
    let effect = Operator::projector(vec![d, d], &phi_ket(d))?;
    let (prob, out) = measure_and_condition(&joint, &effect, &[0, 2])?;
    let out =
        out.ok_or_else(|| Error::InvalidParameter("Bell projection has zero probability".into()))?;
    Ok((prob, out))
}

/// `(2/π)·2^{1/N}`.
pub fn star_threshold(leaves: usize) -> f64 {
    2.0 / PI * 2f64.powf(1.0 / leaves as f64)
}

/// Copies of the flagged state and the probability that all flags agree.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlagProtocolParams {
    pub copies: usize,
    pub p_eq: f64,
}

impl FlagProtocolParams {
    pub fn new(copies: usize) -> Result<Self> {
        if copies == 0 {
            return Err(Error::InvalidParameter(
                "at least one copy is needed".into(),
            ));
        }
        let exponent = i32::try_from(copies - 1)
            .map_err(|_| Error::InvalidParameter(format!("{copies} copies")))?;
        Ok(Self {
            copies,
            p_eq: 2f64.powi(-exponent),
        })
    }
}

/// Output of the flag protocol: `P_Ψ` when the flags disagree, one of the
/// two fallback behaviors otherwise.
pub fn flag_distribution(
    params: FlagProtocolParams,
    p_psi: &Behavior,
    junk_b: &Behavior,
    junk_c: &Behavior,
) -> Result<Behavior> {
    let expected = Scenario::new(3, 2, 2)?;
    for b in [p_psi, junk_b, junk_c] {
        if *b.scenario() != expected {
            return Err(Error::ScenarioMismatch {
                expected: expected.to_string(),
                found: b.scenario().to_string(),
            });
        }
    }
    let q = params.p_eq;
    mix(&[junk_b, junk_c, p_psi], &[q / 2.0, q / 2.0, 1.0 - q])
}

/// Probability that `copies` uniform draws from `{1, …, leaves}` hit every
/// value.
pub fn coverage_probability(copies: usize, leaves: usize) -> f64 {
    if leaves == 0 {
        return 1.0;
    }
    if copies < leaves {
        return 0.0;
    }
    let n = leaves as f64;
    let mut binom = 1.0;
    let mut total = 0.0;
    for k in 0..=leaves {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * binom * ((n - k as f64) / n).powi(copies as i32);
        binom = binom * (n - k as f64) / (k as f64 + 1.0);
    }
    total.clamp(0.0, 1.0)
}

/// Seesaw value of `f` on the star's conditional state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarViolation {
    pub p: f64,
    pub leaves: usize,
    pub success_prob: f64,
    pub value: f64,
    pub bound: f64,
    pub violated: bool,
}

pub fn star_violation(
    p: f64,
    leaves: usize,
    f: &BellFunctional,
    opts: &SeesawOptions,
) -> Result<StarViolation> {
    if f.scenario.parties != leaves || f.scenario.outcomes != 2 {
        return Err(Error::ScenarioMismatch {
            expected: format!("{leaves} parties with two outcomes"),
            found: f.scenario.to_string(),
        });
    }
    let star = star_conditional(p, leaves)?;
    let run = seesaw(&star.conditional, &vec![2; leaves], f, opts)?;
    Ok(StarViolation {
        p,
        leaves,
        success_prob: star.success_prob,
        value: run.value,
        bound: f.bound,
        violated: run.value > f.bound + MEMBER_TOL,
    })
}

/// Noise level at which the seesaw value of `f` on the star conditional
/// state exceeds its bound, by bisection on `[0, 1]`. Returns 1 when even
/// pure links give no violation.
pub fn star_crossing(
    leaves: usize,
    f: &BellFunctional,
    opts: &SeesawOptions,
    steps: usize,
) -> Result<f64> {
    let gap = |p: f64| star_violation(p, leaves, f, opts).map(|s| s.value - s.bound - MEMBER_TOL);
    let (mut lo, mut hi) = (0.0, 1.0);
    if gap(hi)? <= 0.0 {
        return Ok(1.0);
    }
    if gap(lo)? > 0.0 {
        return Err(Error::NoSignChange { lo, hi });
    }
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Two maximally entangled qubit pairs in the Λ configuration; `A` holds two
/// qubits, so the party sides are `[4, 2, 2]`.
pub fn lambda_singlets() -> Result<DensityState> {
    let layout = NetworkLayout::lambda(StateSpec::Phi { d: 2 }, StateSpec::Phi { d: 2 });
    Ok(compose_network(&layout, &layout.build_states()?)?.0)
}

/// Searches measurements on [`lambda_singlets`] whose behavior lies outside
/// the hybrid polytope, seeded with the Svetlichny functional.
pub fn lambda_search(opts: &SeesawOptions) -> Result<PolytopeSearch> {
    let state = lambda_singlets()?;
    polytope_seesaw(
        &state,
        &[4, 2, 2],
        Some(&svetlichny()),
        &hybrid_vertices_3party(),
        opts,
        LAMBDA_SEARCH_ROUNDS,
    )
}

/// One copy count of the flag protocol and the hybrid visibility of its
/// output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaRow {
    pub copies: usize,
    pub p_eq: f64,
    pub v_star: f64,
    pub member: bool,
}

/// Hybrid-polytope visibility of the flag protocol output for each copy
/// count, with uniform fallback behaviors.
pub fn sigma_activation(p_psi: &Behavior, copies: &[usize]) -> Result<Vec<SigmaRow>> {
    let vertices = hybrid_vertices_3party();
    let junk = Behavior::uniform(*p_psi.scenario());
    copies
        .par_iter()
        .map(|&l| {
            let params = FlagProtocolParams::new(l)?;
            let out = flag_distribution(params, p_psi, &junk, &junk)?;
            let (v_star, _) = visibility(&out, &vertices)?;
            Ok(SigmaRow {
                copies: l,
                p_eq: params.p_eq,
                v_star,
                member: v_star >= 1.0 - MEMBER_TOL,
            })
        })
        .collect()
}

/// Smallest value of `f` over all normalized behaviors of its scenario.
pub fn functional_floor(f: &BellFunctional) -> f64 {
    let r = f.scenario.outcome_count();
    f.coeffs
        .chunks(r)
        .map(|c| c.iter().copied().fold(f64::INFINITY, f64::min))
        .sum()
}

/// Flag reconstruction of the star from `copies` copies of the flagged
/// state: the star value is reached with the coverage probability, and the
/// remaining branch is bounded below by the functional's floor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauRow {
    pub copies: usize,
    pub coverage: f64,
    pub star_value: f64,
    pub guaranteed: f64,
    pub bound: f64,
    pub violated: bool,
}

pub fn tau_activation(star: &StarViolation, f: &BellFunctional, copies: &[usize]) -> Vec<TauRow> {
    let floor = functional_floor(f);
    copies
        .iter()
        .map(|&l| {
            let c = coverage_probability(l, star.leaves);
            let guaranteed = c * star.value + (1.0 - c) * floor;
            TauRow {
                copies: l,
                coverage: c,
                star_value: star.value,
                guaranteed,
                bound: f.bound,
                violated: guaranteed > f.bound + MEMBER_TOL,
            }
        })
        .collect()
}
