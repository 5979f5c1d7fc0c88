//! Joint conditional probability tables `P(a⃗|x⃗)`.
//!
//! Tables are stored flat, settings-major: entry `(x⃗, a⃗)` lives at
//! `x_flat · rᴺ + a_flat`, where both multi-indices are lexicographic with
//! party 0 most significant. The JSON format uses exactly this order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurements::MeasurementAssignment;
use crate::tensor::{kron_all, DensityState, Operator};

/// Tolerance on table normalization.
pub const NORMALIZATION_TOL: f64 = 1e-10;
/// Most negative entry accepted in a table.
pub const NEGATIVITY_TOL: f64 = 1e-12;

/// `N` parties, each with `m` settings of `r` outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scenario {
    pub parties: usize,
    pub settings: usize,
    pub outcomes: usize,
}

impl Scenario {
    pub fn new(parties: usize, settings: usize, outcomes: usize) -> Result<Self> {
        if parties == 0 || settings == 0 || outcomes == 0 {
            return Err(Error::InvalidParameter(format!(
                "scenario ({parties}, {settings}, {outcomes}) needs every entry ≥ 1"
            )));
        }
        Ok(Self {
            parties,
            settings,
            outcomes,
        })
    }

    /// `mᴺ`.
    pub fn setting_count(&self) -> usize {
        self.settings.pow(self.parties as u32)
    }

    /// `rᴺ`.
    pub fn outcome_count(&self) -> usize {
        self.outcomes.pow(self.parties as u32)
    }

    /// Table length `mᴺ·rᴺ`.
    pub fn len(&self) -> usize {
        self.setting_count() * self.outcome_count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, settings: &[usize], outcomes: &[usize]) -> usize {
        encode(settings, self.settings) * self.outcome_count() + encode(outcomes, self.outcomes)
    }

    pub fn settings_of(&self, x_flat: usize) -> Vec<usize> {
        decode(x_flat, self.settings, self.parties)
    }

    pub fn outcomes_of(&self, a_flat: usize) -> Vec<usize> {
        decode(a_flat, self.outcomes, self.parties)
    }

    pub(crate) fn check_same(&self, other: &Scenario) -> Result<()> {
        if self != other {
            return Err(Error::ScenarioMismatch {
                expected: self.to_string(),
                found: other.to_string(),
            });
        }
        Ok(())
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.parties, self.settings, self.outcomes)
    }
}

/// Lexicographic encoding, first digit most significant.
pub fn encode(digits: &[usize], base: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * base + d)
}

pub fn decode(mut flat: usize, base: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for k in (0..len).rev() {
        out[k] = flat % base;
        flat /= base;
    }
    out
}

/// A normalized, nonnegative conditional probability table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BehaviorJson")]
pub struct Behavior {
    scenario: Scenario,
    table: Vec<f64>,
}

#[derive(Deserialize)]
struct BehaviorJson {
    scenario: Scenario,
    table: Vec<f64>,
}

impl TryFrom<BehaviorJson> for Behavior {
    type Error = Error;

    fn try_from(value: BehaviorJson) -> Result<Self> {
        Behavior::new(value.scenario, value.table)
    }
}

impl Behavior {
    pub fn new(scenario: Scenario, table: Vec<f64>) -> Result<Self> {
        Scenario::new(scenario.parties, scenario.settings, scenario.outcomes)?;
        if table.len() != scenario.len() {
            return Err(Error::InvalidBehavior(format!(
                "table of length {} for scenario {scenario} (expected {})",
                table.len(),
                scenario.len()
            )));
        }
        if let Some((i, &v)) = table
            .iter()
            .enumerate()
            .find(|(_, &v)| v < -NEGATIVITY_TOL || !v.is_finite())
        {
            return Err(Error::InvalidBehavior(format!("entry {i} is {v}")));
        }
        let ro = scenario.outcome_count();
        for (x, block) in table.chunks(ro).enumerate() {
            let sum: f64 = block.iter().sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::InvalidBehavior(format!(
                    "settings {:?} sum to {sum}",
                    scenario.settings_of(x)
                )));
            }
        }
        Ok(Self { scenario, table })
    }

    pub fn uniform(scenario: Scenario) -> Self {
        let v = 1.0 / scenario.outcome_count() as f64;
        Self {
            scenario,
            table: vec![v; scenario.len()],
        }
    }

    /// Deterministic behavior; `responses[party][setting]` is the outcome.
    pub fn deterministic(scenario: Scenario, responses: &[Vec<usize>]) -> Result<Self> {
        if responses.len() != scenario.parties
            || responses
                .iter()
                .any(|r| r.len() != scenario.settings || r.iter().any(|&a| a >= scenario.outcomes))
        {
            return Err(Error::InvalidBehavior(format!(
                "response table does not fit scenario {scenario}"
            )));
        }
        let mut table = vec![0.0; scenario.len()];
        for x in 0..scenario.setting_count() {
            let xs = scenario.settings_of(x);
            let a: Vec<usize> = xs
                .iter()
                .enumerate()
                .map(|(i, &xi)| responses[i][xi])
                .collect();
            table[scenario.index(&xs, &a)] = 1.0;
        }
        Ok(Self { scenario, table })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn prob(&self, settings: &[usize], outcomes: &[usize]) -> f64 {
        self.table[self.scenario.index(settings, outcomes)]
    }

    /// Independent product: parties of `self` first, then those of `other`.
    pub fn product(&self, other: &Behavior) -> Result<Behavior> {
        let (s, t) = (self.scenario, other.scenario);
        if s.settings != t.settings || s.outcomes != t.outcomes {
            return Err(Error::ScenarioMismatch {
                expected: s.to_string(),
                found: t.to_string(),
            });
        }
        let joint = Scenario::new(s.parties + t.parties, s.settings, s.outcomes)?;
        let mut table = vec![0.0; joint.len()];
        let (so, to) = (s.outcome_count(), t.outcome_count());
        for xs in 0..s.setting_count() {
            for xt in 0..t.setting_count() {
                let x = xs * t.setting_count() + xt;
                for a_s in 0..so {
                    let p = self.table[xs * so + a_s];
                    if p == 0.0 {
                        continue;
                    }
                    for a_t in 0..to {
                        table[x * joint.outcome_count() + a_s * to + a_t] =
                            p * other.table[xt * to + a_t];
                    }
                }
            }
        }
        Ok(Behavior {
            scenario: joint,
            table,
        })
    }

    /// Reorders parties: party `k` of the result is party `order[k]` of `self`.
    pub fn permute_parties(&self, order: &[usize]) -> Result<Behavior> {
        let s = self.scenario;
        let mut seen = vec![false; s.parties];
        if order.len() != s.parties
            || order
                .iter()
                .any(|&o| o >= s.parties || std::mem::replace(&mut seen[o], true))
        {
            return Err(Error::InvalidParameter(format!(
                "{order:?} is not a permutation of {} parties",
                s.parties
            )));
        }
        let mut table = vec![0.0; s.len()];
        for x in 0..s.setting_count() {
            let xs = s.settings_of(x);
            let new_x: Vec<usize> = order.iter().map(|&o| xs[o]).collect();
            for a in 0..s.outcome_count() {
                let av = s.outcomes_of(a);
                let new_a: Vec<usize> = order.iter().map(|&o| av[o]).collect();
                table[s.index(&new_x, &new_a)] = self.table[x * s.outcome_count() + a];
            }
        }
        Ok(Behavior { scenario: s, table })
    }

    pub fn max_abs_diff(&self, other: &Behavior) -> f64 {
        self.table
            .iter()
            .zip(&other.table)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// `P(a⃗|x⃗) = tr(ρ ⊗ᵢ M_{aᵢ}^{xᵢ})`.
pub fn behavior_from_quantum(state: &DensityState, ma: &MeasurementAssignment) -> Result<Behavior> {
    let sides = ma.party_sides();
    let total: usize = sides.iter().product();
    let rho = state.operator();
    if total != rho.side() {
        return Err(Error::DimensionMismatch(format!(
            "measurement acts on dimension {total}, state has {}",
            rho.side()
        )));
    }
    let scenario = Scenario::new(ma.party_count(), ma.settings(), ma.outcomes())?;
    let ro = scenario.outcome_count();
    let blocks: Vec<Vec<f64>> = (0..scenario.setting_count())
        .into_par_iter()
        .map(|x| {
            let xs = scenario.settings_of(x);
            (0..ro)
                .map(|a| {
                    let av = scenario.outcomes_of(a);
                    let factors: Vec<&Operator> = (0..scenario.parties)
                        .map(|i| ma.effect(i, xs[i], av[i]))
                        .collect();
                    let joint = kron_all(factors).expect("at least one party");
                    rho.trace_product(&joint).expect("sides checked").re
                })
                .collect()
        })
        .collect();
    Behavior::new(scenario, blocks.concat())
}

/// Largest change of any party-removed marginal when the removed party
/// switches setting. Zero for no-signalling tables.
pub fn no_signalling_residual(b: &Behavior) -> f64 {
    let s = b.scenario;
    let mut worst = 0.0f64;
    for j in 0..s.parties {
        for x in 0..s.setting_count() {
            let xs = s.settings_of(x);
            if xs[j] != 0 {
                continue;
            }
            let base = marginal_removing(b, j, &xs);
            for xj in 1..s.settings {
                let mut other = xs.clone();
                other[j] = xj;
                let alt = marginal_removing(b, j, &other);
                for (u, v) in base.iter().zip(&alt) {
                    worst = worst.max((u - v).abs());
                }
            }
        }
    }
    worst
}

fn marginal_removing(b: &Behavior, party: usize, settings: &[usize]) -> Vec<f64> {
    let s = b.scenario;
    let rest = s.outcomes.pow((s.parties - 1) as u32);
    let mut out = vec![0.0; rest];
    let x = encode(settings, s.settings);
    for a in 0..s.outcome_count() {
        let av = s.outcomes_of(a);
        let reduced: Vec<usize> = av
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != party)
            .map(|(_, &v)| v)
            .collect();
        out[encode(&reduced, s.outcomes)] += b.table[x * s.outcome_count() + a];
    }
    out
}

/// `Σ_a⃗ (∏ᵢ (−1)^{aᵢ}) P(a⃗|x⃗)` for two-outcome scenarios.
pub fn correlator(b: &Behavior, settings: &[usize]) -> Result<f64> {
    let s = b.scenario;
    if s.outcomes != 2 {
        return Err(Error::InvalidParameter(format!(
            "correlators need 2 outcomes, scenario has {}",
            s.outcomes
        )));
    }
    if settings.len() != s.parties || settings.iter().any(|&x| x >= s.settings) {
        return Err(Error::InvalidParameter(format!(
            "settings {settings:?} do not fit scenario {s}"
        )));
    }
    let x = encode(settings, s.settings);
    let ro = s.outcome_count();
    Ok((0..ro)
        .map(|a| {
            let sign = if (a.count_ones() & 1) == 1 { -1.0 } else { 1.0 };
            sign * b.table[x * ro + a]
        })
        .sum())
}

/// Convex combination.
pub fn mix(behaviors: &[&Behavior], weights: &[f64]) -> Result<Behavior> {
    if behaviors.is_empty() || behaviors.len() != weights.len() {
        return Err(Error::InvalidParameter(format!(
            "{} behaviors with {} weights",
            behaviors.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "negative weight in {weights:?}"
        )));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "weights sum to {total}, not 1"
        )));
    }
    let s = behaviors[0].scenario;
    let mut table = vec![0.0; s.len()];
    for (b, &w) in behaviors.iter().zip(weights) {
        s.check_same(&b.scenario)?;
        for (t, v) in table.iter_mut().zip(&b.table) {
            *t += w * v;
        }
    }
    Ok(Behavior { scenario: s, table })
}

/// Behavior of the parties in `parties` (kept in ascending order) with every
/// other party's setting fixed by `context`, listed in ascending party
/// order. Context-independent exactly when `b` is no-signalling.
pub fn marginal(b: &Behavior, parties: &[usize], context: &[usize]) -> Result<Behavior> {
    let s = b.scenario;
    let mut keep: Vec<usize> = parties.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() || keep.iter().any(|&p| p >= s.parties) {
        return Err(Error::InvalidParameter(format!(
            "party subset {parties:?} invalid for {} parties",
            s.parties
        )));
    }
    let others: Vec<usize> = (0..s.parties).filter(|p| !keep.contains(p)).collect();
    if context.len() != others.len() || context.iter().any(|&x| x >= s.settings) {
        return Err(Error::InvalidParameter(format!(
            "context {context:?} does not fix the {} remaining parties",
            others.len()
        )));
    }
    let sub = Scenario::new(keep.len(), s.settings, s.outcomes)?;
    let mut table = vec![0.0; sub.len()];
    for xk in 0..sub.setting_count() {
        let sub_x = sub.settings_of(xk);
        let mut full_x = vec![0; s.parties];
        for (i, &p) in keep.iter().enumerate() {
            full_x[p] = sub_x[i];
        }
        for (i, &p) in others.iter().enumerate() {
            full_x[p] = context[i];
        }
        let x = encode(&full_x, s.settings);
        for a in 0..s.outcome_count() {
            let av = s.outcomes_of(a);
            let sub_a: Vec<usize> = keep.iter().map(|&p| av[p]).collect();
            table[xk * sub.outcome_count() + encode(&sub_a, s.outcomes)] +=
                b.table[x * s.outcome_count() + a];
        }
    }
    Behavior::new(sub, table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurements::Povm;
    use crate::states::{isotropic, max_entangled, IsotropicParams};
    use crate::tensor::{random, DensityState};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pauli_z() -> Operator {
        Operator::from_diagonal(vec![2], &[1.0, -1.0]).unwrap()
    }

    fn pauli_x() -> Operator {
        Operator::from_real_rows(vec![2], &[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    fn chsh_assignment() -> MeasurementAssignment {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let b0 = pauli_z().add(&pauli_x()).unwrap().scale(s);
        let b1 = pauli_z().sub(&pauli_x()).unwrap().scale(s);
        let obs = |o: &Operator| Povm::from_observable(o).unwrap();
        MeasurementAssignment::new(vec![
            vec![obs(&pauli_z()), obs(&pauli_x())],
            vec![obs(&b0), obs(&b1)],
        ])
        .unwrap()
    }

    fn chsh_value(b: &Behavior) -> f64 {
        correlator(b, &[0, 0]).unwrap()
            + correlator(b, &[0, 1]).unwrap()
            + correlator(b, &[1, 0]).unwrap()
            - correlator(b, &[1, 1]).unwrap()
    }

    fn s222() -> Scenario {
        Scenario::new(2, 2, 2).unwrap()
    }

    fn random_assignment(
        rng: &mut ChaCha8Rng,
        parties: usize,
        dim: usize,
    ) -> MeasurementAssignment {
        let povm = |rng: &mut ChaCha8Rng| {
            let u = random::unitary(rng, dim);
            let half: Vec<f64> = (0..dim)
                .map(|i| if i < dim / 2 { 1.0 } else { 0.0 })
                .collect();
            let d = Operator::from_diagonal(vec![dim], &half).unwrap();
            Povm::dichotomic(u.matmul(&d).unwrap().matmul(&u.adjoint()).unwrap()).unwrap()
        };
        MeasurementAssignment::new((0..parties).map(|_| vec![povm(rng), povm(rng)]).collect())
            .unwrap()
    }

    #[test]
    fn product_state_factorizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let r1 = random::density(&mut rng, vec![2]);
        let r2 = random::density(&mut rng, vec![2]);
        let ma = random_assignment(&mut rng, 2, 2);
        let b = behavior_from_quantum(&r1.tensor(&r2), &ma).unwrap();
        let a_marg = marginal(&b, &[0], &[0]).unwrap();
        let b_marg = marginal(&b, &[1], &[0]).unwrap();
        let prod = a_marg.product(&b_marg).unwrap();
        assert!(prod.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn bell_state_chsh_optimal_value() {
        let b = behavior_from_quantum(&max_entangled(2).unwrap(), &chsh_assignment()).unwrap();
        assert!((chsh_value(&b) - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!((correlator(&b, &[0, 0]).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn bell_state_zz_correlator_is_one() {
        let z = Povm::from_observable(&pauli_z()).unwrap();
        let ma = MeasurementAssignment::new(vec![vec![z.clone()], vec![z]]).unwrap();
        let b = behavior_from_quantum(&max_entangled(2).unwrap(), &ma).unwrap();
        assert!((correlator(&b, &[0, 0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn maximally_mixed_gives_uniform() {
        let b = behavior_from_quantum(
            &DensityState::maximally_mixed(vec![2, 2]),
            &chsh_assignment(),
        )
        .unwrap();
        assert!(b.max_abs_diff(&Behavior::uniform(s222())) < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let res = behavior_from_quantum(
            &DensityState::maximally_mixed(vec![2, 3]),
            &chsh_assignment(),
        );
        assert!(matches!(res, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn residual_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let rho = random::density(&mut rng, vec![2, 2, 2]);
            let ma = random_assignment(&mut rng, 3, 2);
            let b = behavior_from_quantum(&rho, &ma).unwrap();
            assert!(no_signalling_residual(&b) < 1e-10);
        }
        assert_eq!(no_signalling_residual(&Behavior::uniform(s222())), 0.0);
        // Bob's outcome copies Alice's setting with a planted bias.
        let gap = 0.3;
        let mut table = vec![0.0; 16];
        for x in 0..2 {
            for y in 0..2 {
                let pb0 = if x == 0 {
                    0.5 + gap / 2.0
                } else {
                    0.5 - gap / 2.0
                };
                let xf = x * 2 + y;
                table[xf * 4] = 0.5 * pb0;
                table[xf * 4 + 1] = 0.5 * (1.0 - pb0);
                table[xf * 4 + 2] = 0.5 * pb0;
                table[xf * 4 + 3] = 0.5 * (1.0 - pb0);
            }
        }
        let signalling = Behavior::new(s222(), table).unwrap();
        assert!((no_signalling_residual(&signalling) - gap).abs() < 1e-15);
        let m0 = marginal(&signalling, &[1], &[0]).unwrap();
        let m1 = marginal(&signalling, &[1], &[1]).unwrap();
        assert!((m0.max_abs_diff(&m1) - gap).abs() < 1e-15);
    }

    #[test]
    fn correlator_cases() {
        let det = Behavior::deterministic(s222(), &[vec![0, 0], vec![0, 0]]).unwrap();
        assert_eq!(correlator(&det, &[1, 0]).unwrap(), 1.0);
        assert_eq!(
            correlator(&Behavior::uniform(s222()), &[0, 1]).unwrap(),
            0.0
        );
        let s3 = Behavior::uniform(Scenario::new(2, 2, 3).unwrap());
        assert!(correlator(&s3, &[0, 0]).is_err());
    }

    #[test]
    fn mix_cases() {
        let b = behavior_from_quantum(&max_entangled(2).unwrap(), &chsh_assignment()).unwrap();
        assert_eq!(mix(&[&b], &[1.0]).unwrap(), b);
        let u = Behavior::uniform(s222());
        let m = mix(&[&b, &u], &[0.5, 0.5]).unwrap();
        for ((x, y), z) in m.table().iter().zip(b.table()).zip(u.table()) {
            assert!((x - 0.5 * (y + z)).abs() < 1e-15);
        }
        assert!(mix(&[&b, &u], &[0.7, 0.7]).is_err());
        assert!(mix(&[&b, &u], &[1.5, -0.5]).is_err());
        let other = Behavior::uniform(Scenario::new(3, 2, 2).unwrap());
        assert!(matches!(
            mix(&[&b, &other], &[0.5, 0.5]),
            Err(Error::ScenarioMismatch { .. })
        ));
    }

    #[test]
    fn bell_state_single_party_marginal_is_uniform() {
        let b = behavior_from_quantum(&max_entangled(2).unwrap(), &chsh_assignment()).unwrap();
        for ctx in 0..2 {
            let m = marginal(&b, &[0], &[ctx]).unwrap();
            for &v in m.table() {
                assert!((v - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn isotropic_chsh_scales_linearly() {
        for k in 0..=10 {
            let p = k as f64 / 10.0;
            let s = isotropic(IsotropicParams::new(p, 2).unwrap()).unwrap();
            let b = behavior_from_quantum(&s, &chsh_assignment()).unwrap();
            assert!((chsh_value(&b) - p * 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
        }
    }

    #[test]
    fn permute_parties_moves_outcomes() {
        let s = Scenario::new(3, 2, 2).unwrap();
        let det = Behavior::deterministic(s, &[vec![0, 0], vec![1, 1], vec![0, 1]]).unwrap();
        let p = det.permute_parties(&[2, 0, 1]).unwrap();
        let expected = Behavior::deterministic(s, &[vec![0, 1], vec![0, 0], vec![1, 1]]).unwrap();
        assert_eq!(p, expected);
    }

    #[test]
    fn json_schema_and_validation() {
        let u = Behavior::uniform(s222());
        let text = u.to_json().unwrap();
        assert!(text
            .starts_with(r#"{"scenario":{"parties":2,"settings":2,"outcomes":2},"table":[0.25"#));
        assert_eq!(Behavior::from_json(&text).unwrap(), u);
        let bad = r#"{"scenario":{"parties":1,"settings":1,"outcomes":2},"table":[0.2,0.2]}"#;
        assert!(Behavior::from_json(bad).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn quantum_behaviors_are_normalized_and_no_signalling(seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let rho = random::density(&mut rng, vec![2, 2]);
                let ma = random_assignment(&mut rng, 2, 2);
                let b = behavior_from_quantum(&rho, &ma).unwrap();
                prop_assert!(no_signalling_residual(&b) < 1e-10);
                for x in 0..4 {
                    prop_assert!(correlator(&b, &decode(x, 2, 2)).unwrap().abs() <= 1.0 + 1e-12);
                }
            }

            #[test]
            fn mixtures_of_no_signalling_stay_no_signalling(seed in any::<u64>(), w in 0.0f64..1.0) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let ma = random_assignment(&mut rng, 2, 2);
                let b1 = behavior_from_quantum(&random::density(&mut rng, vec![2, 2]), &ma).unwrap();
                let b2 = behavior_from_quantum(&random::density(&mut rng, vec![2, 2]), &ma).unwrap();
                let m = mix(&[&b1, &b2], &[w, 1.0 - w]).unwrap();
                let bound = w * no_signalling_residual(&b1) + (1.0 - w) * no_signalling_residual(&b2);
                prop_assert!(no_signalling_residual(&m) <= bound + 1e-15);
            }
        }
    }
}
