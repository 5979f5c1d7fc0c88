//! Bell functionals: evaluation, bounds over vertex sets, lifting through
//! post-selection, a catalog of named inequalities and a seesaw optimizer.

mod catalog;
mod seesaw;

pub use catalog::{
    catalog, cglmp, cglmp_fourier_measurements, chsh, chsh_measurements, correlator_functional,
    correlator_local_bound, mermin, mermin_weights, plane, real_plane_povm, svetlichny,
    CatalogName,
};
pub use seesaw::{
    polytope_seesaw, random_assignment, seesaw, seesaw_from, PolytopeSearch, SeesawOptions,
    SeesawRun,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::behaviors::{decode, encode, Behavior, Scenario};
use crate::error::{Error, Result};
use crate::polytope::VertexSet;

/// What the `bound` of a functional refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Local,
    HybridNs,
    Ns,
    Declared,
}

/// Coefficients `c[x⃗][a⃗]` laid out like a behavior table, with a bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionalJson")]
pub struct BellFunctional {
    pub scenario: Scenario,
    #[serde(rename = "table")]
    pub coeffs: Vec<f64>,
    pub bound: f64,
    pub bound_kind: BoundKind,
}

#[derive(Deserialize)]
struct FunctionalJson {
    scenario: Scenario,
    table: Vec<f64>,
    bound: f64,
    bound_kind: BoundKind,
}

impl TryFrom<FunctionalJson> for BellFunctional {
    type Error = Error;

    fn try_from(v: FunctionalJson) -> Result<Self> {
        BellFunctional::new(v.scenario, v.table, v.bound, v.bound_kind)
    }
}

impl BellFunctional {
    pub fn new(
        scenario: Scenario,
        coeffs: Vec<f64>,
        bound: f64,
        bound_kind: BoundKind,
    ) -> Result<Self> {
        Scenario::new(scenario.parties, scenario.settings, scenario.outcomes)?;
        if coeffs.len() != scenario.len() {
            return Err(Error::InvalidParameter(format!(
                "{} coefficients for scenario {scenario} (expected {})",
                coeffs.len(),
                scenario.len()
            )));
        }
        if !bound.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(
                "non-finite coefficient or bound".into(),
            ));
        }
        Ok(Self {
            scenario,
            coeffs,
            bound,
            bound_kind,
        })
    }

    /// `Σ c[x⃗][a⃗]·P(a⃗|x⃗)`.
    pub fn evaluate(&self, b: &Behavior) -> Result<f64> {
        self.scenario.check_same(b.scenario())?;
        Ok(self.coeffs.iter().zip(b.table()).map(|(c, p)| c * p).sum())
    }

    /// Maximum of [`evaluate`](Self::evaluate) over the vertices.
    pub fn bound_over(&self, v: &VertexSet) -> Result<f64> {
        self.scenario.check_same(&v.scenario)?;
        Ok(v.vertices
            .par_iter()
            .map(|vx| {
                self.coeffs
                    .iter()
                    .zip(vx.table())
                    .map(|(c, p)| c * p)
                    .sum::<f64>()
            })
            .reduce(|| f64::NEG_INFINITY, f64::max))
    }

    /// Amount by which `b` exceeds the bound.
    pub fn violation(&self, b: &Behavior) -> Result<f64> {
        Ok(self.evaluate(b)? - self.bound)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            scenario: self.scenario,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            bound: self.bound * factor,
            bound_kind: self.bound_kind,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Fixed settings and outcomes of the post-selecting parties.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostSelection {
    /// Positions of the post-selecting parties in the full scenario.
    pub parties: Vec<usize>,
    pub settings: Vec<usize>,
    pub outcomes: Vec<usize>,
}

impl PostSelection {
    pub fn new(parties: Vec<usize>, settings: Vec<usize>, outcomes: Vec<usize>) -> Result<Self> {
        if parties.len() != settings.len() || parties.len() != outcomes.len() {
            return Err(Error::InvalidParameter(format!(
                "post-selection with {} parties, {} settings and {} outcomes",
                parties.len(),
                settings.len(),
                outcomes.len()
            )));
        }
        let mut sorted = parties.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != parties.len() {
            return Err(Error::InvalidParameter(format!(
                "repeated post-selecting party in {parties:?}"
            )));
        }
        Ok(Self {
            parties,
            settings,
            outcomes,
        })
    }
}

/// Turns `f` on the tested parties into a functional on the full scenario
/// whose value is `P(b′|y′)·(I_cond − K)`.
///
/// The tested parties are the positions not listed in `ps.parties`, in
/// ascending order. `x0` is the reference setting of the tested parties used
/// to express `P(b′|y′)`; `None` means all zeros.
pub fn lift(
    f: &BellFunctional,
    ps: &PostSelection,
    x0: Option<&[usize]>,
) -> Result<BellFunctional> {
    let sf = f.scenario;
    let k = ps.parties.len();
    let total = sf.parties + k;
    if ps.parties.iter().any(|&p| p >= total) {
        return Err(Error::InvalidParameter(format!(
            "post-selecting parties {:?} overlap the {} tested parties of a {total}-party scenario",
            ps.parties, sf.parties
        )));
    }
    if ps.settings.iter().any(|&y| y >= sf.settings)
        || ps.outcomes.iter().any(|&b| b >= sf.outcomes)
    {
        return Err(Error::InvalidParameter(
            "post-selected setting or outcome out of range".into(),
        ));
    }
    let reference = match x0 {
        Some(x) => {
            if x.len() != sf.parties || x.iter().any(|&v| v >= sf.settings) {
                return Err(Error::InvalidParameter(format!(
                    "reference setting {x:?} invalid for {} tested parties",
                    sf.parties
                )));
            }
            x.to_vec()
        }
        None => vec![0; sf.parties],
    };
    let tested: Vec<usize> = (0..total).filter(|p| !ps.parties.contains(p)).collect();
    let full = Scenario::new(total, sf.settings, sf.outcomes)?;
    let ro_full = full.outcome_count();
    let ro_f = sf.outcome_count();
    let mut coeffs = vec![0.0; full.len()];
    for xf in 0..sf.setting_count() {
        let xt = decode(xf, sf.settings, sf.parties);
        let is_reference = xt == reference;
        let mut xs = vec![0; total];
        for (i, &p) in tested.iter().enumerate() {
            xs[p] = xt[i];
        }
        for (j, &p) in ps.parties.iter().enumerate() {
            xs[p] = ps.settings[j];
        }
        let x_full = encode(&xs, sf.settings);
        for af in 0..ro_f {
            let at = decode(af, sf.outcomes, sf.parties);
            let mut as_ = vec![0; total];
            for (i, &p) in tested.iter().enumerate() {
                as_[p] = at[i];
            }
            for (j, &p) in ps.parties.iter().enumerate() {
                as_[p] = ps.outcomes[j];
            }
            let mut c = f.coeffs[xf * ro_f + af];
            if is_reference {
                c -= f.bound;
            }
            coeffs[x_full * ro_full + encode(&as_, sf.outcomes)] = c;
        }
    }
    BellFunctional::new(full, coeffs, 0.0, BoundKind::Declared)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behaviors::{behavior_from_quantum, mix};
    use crate::measurements::{MeasurementAssignment, Povm};
    use crate::polytope::{deterministic_vertices, hybrid_vertices_3party, pr_box};
    use crate::states::{compose_network, phi_ket, NetworkLayout, StateSpec};
    use crate::tensor::{DensityState, Operator};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::SQRT_2;

    fn observable(angle: f64) -> Operator {
        let (c, s) = (angle.cos(), angle.sin());
        Operator::from_real_rows(vec![2], &[&[c, s], &[s, -c]]).unwrap()
    }

    fn dichotomic(angle: f64) -> Povm {
        Povm::from_observable(&observable(angle)).unwrap()
    }

    /// Real-plane settings reaching Tsirelson's bound on |Φ⁺⟩.
    fn chsh_settings() -> Vec<Vec<Povm>> {
        use std::f64::consts::FRAC_PI_4;
        vec![
            vec![dichotomic(0.0), dichotomic(2.0 * FRAC_PI_4)],
            vec![dichotomic(FRAC_PI_4), dichotomic(-FRAC_PI_4)],
        ]
    }

    fn lambda_network() -> DensityState {
        let layout = NetworkLayout::lambda(StateSpec::Phi { d: 2 }, StateSpec::Phi { d: 2 });
        let states = layout.build_states().unwrap();
        compose_network(&layout, &states).unwrap().0
    }

    /// Alice's Bell-state test on her two qubits in both settings.
    fn alice_phi_test() -> Povm {
        let proj = Operator::projector(vec![4], &phi_ket(2)).unwrap();
        Povm::dichotomic(proj).unwrap()
    }

    fn lambda_behavior() -> Behavior {
        let mut settings = chsh_settings();
        let c = settings.pop().unwrap();
        let b = settings.pop().unwrap();
        let a = vec![alice_phi_test(), alice_phi_test()];
        let ma = MeasurementAssignment::new(vec![a, b, c]).unwrap();
        behavior_from_quantum(&lambda_network(), &ma).unwrap()
    }

    #[test]
    fn chsh_values() {
        let f = chsh();
        assert_eq!(f.evaluate(&pr_box(0, 0, 0)).unwrap(), 4.0);
        let local = deterministic_vertices(f.scenario).unwrap();
        for v in &local.vertices {
            assert!(f.evaluate(v).unwrap() <= 2.0);
        }
        assert!((f.bound_over(&local).unwrap() - 2.0).abs() < 1e-12);
        let phi = DensityState::from_ket(vec![2, 2], &phi_ket(2)).unwrap();
        let ma = MeasurementAssignment::new(chsh_settings()).unwrap();
        let b = behavior_from_quantum(&phi, &ma).unwrap();
        assert!((f.evaluate(&b).unwrap() - 2.0 * SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn catalog_bounds_match_vertex_max() {
        let local3 = deterministic_vertices(Scenario::new(3, 2, 2).unwrap()).unwrap();
        let m = mermin(3).unwrap();
        assert!((m.bound - 2.0).abs() < 1e-12);
        assert!((m.bound_over(&local3).unwrap() - m.bound).abs() < 1e-9);
        let s = svetlichny();
        assert_eq!(s.bound_kind, BoundKind::HybridNs);
        assert!((s.bound_over(&hybrid_vertices_3party()).unwrap() - 4.0).abs() < 1e-12);
        for k in [2, 3, 4] {
            let p = plane(2, k).unwrap();
            let local = deterministic_vertices(p.scenario).unwrap();
            assert!((p.bound_over(&local).unwrap() - p.bound).abs() < 1e-9);
        }
        let c = cglmp(3).unwrap();
        assert!((c.bound - 2.0).abs() < 1e-9);
    }

    #[test]
    fn evaluate_rejects_mismatch() {
        let b = Behavior::uniform(Scenario::new(3, 2, 2).unwrap());
        assert!(matches!(
            chsh().evaluate(&b),
            Err(Error::ScenarioMismatch { .. })
        ));
    }

    #[test]
    fn lifted_chsh_on_lambda_network() {
        let ps = PostSelection::new(vec![0], vec![0], vec![0]).unwrap();
        let lifted = lift(&chsh(), &ps, None).unwrap();
        assert_eq!(lifted.scenario, Scenario::new(3, 2, 2).unwrap());
        let b = lambda_behavior();
        let expected = (2.0 * SQRT_2 - 2.0) / 4.0;
        assert!((lifted.evaluate(&b).unwrap() - expected).abs() < 1e-12);
        for x0 in [[0, 1], [1, 0], [1, 1]] {
            let other = lift(&chsh(), &ps, Some(&x0)).unwrap();
            assert!((other.evaluate(&b).unwrap() - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn lifting_is_sound_on_local_mixtures() {
        let full = deterministic_vertices(Scenario::new(3, 2, 2).unwrap()).unwrap();
        let refs: Vec<&Behavior> = full.vertices.iter().collect();
        let functionals: Vec<BellFunctional> = (0..2)
            .flat_map(|y| (0..2).map(move |b| (y, b)))
            .flat_map(|(y, b)| {
                [0usize, 1, 2].into_iter().map(move |p| {
                    lift(
                        &chsh(),
                        &PostSelection::new(vec![p], vec![y], vec![b]).unwrap(),
                        None,
                    )
                    .unwrap()
                })
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let w: Vec<f64> = (0..refs.len())
                .map(|_| rng.random::<f64>().powi(4))
                .collect();
            let t: f64 = w.iter().sum();
            let w: Vec<f64> = w.iter().map(|x| x / t).collect();
            let b = mix(&refs, &w).unwrap();
            for f in &functionals {
                assert!(f.evaluate(&b).unwrap() <= 1e-9);
            }
        }
    }

    #[test]
    fn lift_rejects_bad_input() {
        let ps = PostSelection::new(vec![3], vec![0], vec![0]).unwrap();
        assert!(lift(&chsh(), &ps, None).is_err());
        assert!(PostSelection::new(vec![0, 0], vec![0, 0], vec![0, 0]).is_err());
        let ps = PostSelection::new(vec![0], vec![0], vec![0]).unwrap();
        assert!(lift(&chsh(), &ps, Some(&[0])).is_err());
    }

    #[test]
    fn functional_json_round_trip() {
        let f = chsh();
        let text = f.to_json().unwrap();
        assert!(
            text.starts_with(r#"{"scenario":{"parties":2,"settings":2,"outcomes":2},"table":["#)
        );
        assert!(text.ends_with(r#""bound":2.0,"bound_kind":"local"}"#));
        assert_eq!(BellFunctional::from_json(&text).unwrap(), f);
        let bad = text.replacen("[1.0,", "[", 1);
        assert!(BellFunctional::from_json(&bad).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn lift_is_x0_invariant_on_quantum(a0 in 0.0f64..6.3, a1 in 0.0f64..6.3,
                                               b0 in 0.0f64..6.3, b1 in 0.0f64..6.3,
                                               y in 0usize..2, out in 0usize..2) {
                let a = vec![alice_phi_test(), alice_phi_test()];
                let ma = MeasurementAssignment::new(vec![
                    a,
                    vec![dichotomic(a0), dichotomic(a1)],
                    vec![dichotomic(b0), dichotomic(b1)],
                ]).unwrap();
                let b = behavior_from_quantum(&lambda_network(), &ma).unwrap();
                let ps = PostSelection::new(vec![0], vec![y], vec![out]).unwrap();
                let base = lift(&chsh(), &ps, None).unwrap().evaluate(&b).unwrap();
                for x0 in [[0, 1], [1, 0], [1, 1]] {
                    let v = lift(&chsh(), &ps, Some(&x0)).unwrap().evaluate(&b).unwrap();
                    prop_assert!((v - base).abs() < 1e-10);
                }
            }

            #[test]
            fn evaluation_is_linear(w in 0.0f64..1.0) {
                let f = chsh();
                let p = pr_box(0, 0, 0);
                let u = Behavior::uniform(f.scenario);
                let m = mix(&[&p, &u], &[w, 1.0 - w]).unwrap();
                prop_assert!((f.evaluate(&m).unwrap() - 4.0 * w).abs() < 1e-12);
            }
        }
    }
}
