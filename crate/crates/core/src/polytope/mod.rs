//! Vertex sets of local and hybrid no-signalling polytopes, and membership
//! by linear programming.
//!
//! Membership is posed as a visibility problem: the largest `v` such that
//! `v·P + (1 − v)·U` (with `U` the uniform table) is a convex combination of
//! the vertices. `P` is a member exactly when `v* ≥ 1`. When it is not, the
//! optimal dual solution is a Bell functional separating `P` from every
//! vertex, and it is re-verified before being returned.

pub mod lp;

use serde::{Deserialize, Serialize};

use crate::behaviors::{Behavior, Scenario};
use crate::bell::{BellFunctional, BoundKind};
use crate::error::{Error, Result};
use lp::{LinearProgram, LpOutcome};

/// Largest number of deterministic vertices enumerated.
pub const MAX_VERTICES: usize = 100_000;
/// Largest `vertices × table length` accepted by [`membership`].
pub const MAX_LP_COEFFICIENTS: usize = 100_000_000;
/// `v*` at or above `1 − MEMBER_TOL` counts as membership.
pub const MEMBER_TOL: f64 = 1e-9;
/// Minimum separation a certificate must show.
pub const CERTIFICATE_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VertexKind {
    Local,
    HybridNs,
    Ns,
}

/// Generators of a polytope of behaviors.
#[derive(Clone, Debug)]
pub struct VertexSet {
    pub scenario: Scenario,
    pub vertices: Vec<Behavior>,
    pub kind: VertexKind,
}

impl VertexSet {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Every deterministic local strategy: each party maps each setting to an
/// outcome, `(r^m)^N` vertices.
pub fn deterministic_vertices(s: Scenario) -> Result<VertexSet> {
    let per_party = (s.outcomes as f64).powi(s.settings as i32);
    let count = per_party.powi(s.parties as i32);
    if count > MAX_VERTICES as f64 {
        return Err(Error::GuardExceeded(format!(
            "{count} deterministic vertices for scenario {s}"
        )));
    }
    let per_party = per_party as usize;
    let count = count as usize;
    let strategies: Vec<Vec<usize>> = (0..per_party)
        .map(|k| crate::behaviors::decode(k, s.outcomes, s.settings))
        .collect();
    let vertices = (0..count)
        .map(|v| {
            let choice = crate::behaviors::decode(v, per_party, s.parties);
            let responses: Vec<Vec<usize>> =
                choice.iter().map(|&c| strategies[c].clone()).collect();
            Behavior::deterministic(s, &responses)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VertexSet {
        scenario: s,
        vertices,
        kind: VertexKind::Local,
    })
}

/// PR box `P(ab|xy) = 1/2` iff `a ⊕ b = xy ⊕ αx ⊕ βy ⊕ γ`.
pub fn pr_box(alpha: usize, beta: usize, gamma: usize) -> Behavior {
    let s = Scenario::new(2, 2, 2).expect("valid scenario");
    let mut table = vec![0.0; s.len()];
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    if (a ^ b) == ((x & y) ^ (alpha & x) ^ (beta & y) ^ gamma) {
                        table[s.index(&[x, y], &[a, b])] = 0.5;
                    }
                }
            }
        }
    }
    Behavior::new(s, table).expect("PR box is normalized")
}

/// The 24 extremal no-signalling boxes of the (2,2,2) scenario: 16
/// deterministic and 8 PR boxes.
pub fn ns_vertices_222() -> VertexSet {
    let s = Scenario::new(2, 2, 2).expect("valid scenario");
    let mut set = deterministic_vertices(s).expect("16 vertices");
    for code in 0..8 {
        set.vertices
            .push(pr_box(code >> 2 & 1, code >> 1 & 1, code & 1));
    }
    set.kind = VertexKind::Ns;
    set
}

/// Products of a single-party deterministic strategy with a bipartite
/// no-signalling vertex, over the three bipartitions of (3,2,2):
/// `3 × 4 × 24 = 288` vertices.
pub fn hybrid_vertices_3party() -> VertexSet {
    let s3 = Scenario::new(3, 2, 2).expect("valid scenario");
    let single = deterministic_vertices(Scenario::new(1, 2, 2).expect("valid scenario"))
        .expect("4 vertices");
    let pairs = ns_vertices_222();
    let mut vertices = Vec::with_capacity(288);
    for lone in 0..3 {
        let rest: Vec<usize> = (0..3).filter(|&p| p != lone).collect();
        // product order is [lone, rest[0], rest[1]]
        let mut order = [0usize; 3];
        order[lone] = 0;
        order[rest[0]] = 1;
        order[rest[1]] = 2;
        for d in &single.vertices {
            for pair in &pairs.vertices {
                let prod = d.product(pair).expect("matching scenarios");
                vertices.push(prod.permute_parties(&order).expect("valid permutation"));
            }
        }
    }
    VertexSet {
        scenario: s3,
        vertices,
        kind: VertexKind::HybridNs,
    }
}

/// Outcome of a membership query.
#[derive(Clone, Debug, PartialEq)]
pub struct MembershipVerdict {
    /// Critical visibility; `f64::INFINITY` when the query equals the
    /// uniform table.
    pub critical_visibility: f64,
    pub member: bool,
    pub certificate: Option<BellFunctional>,
}

impl MembershipVerdict {
    /// Amount by which the certificate exceeds its bound on `b`; zero for
    /// members.
    pub fn violation(&self, b: &Behavior) -> f64 {
        self.certificate
            .as_ref()
            .and_then(|f| f.evaluate(b).ok().map(|v| v - f.bound))
            .unwrap_or(0.0)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&VerdictJson::from(self))?)
    }
}

/// `{"v_star": …, "member": …, "certificate": {"coeffs": […], "bound": …}}`
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerdictJson {
    pub v_star: Option<f64>,
    pub member: bool,
    pub certificate: Option<CertificateJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateJson {
    pub scenario: Scenario,
    pub coeffs: Vec<f64>,
    pub bound: f64,
    pub bound_kind: BoundKind,
}

impl From<&MembershipVerdict> for VerdictJson {
    fn from(v: &MembershipVerdict) -> Self {
        Self {
            v_star: v
                .critical_visibility
                .is_finite()
                .then_some(v.critical_visibility),
            member: v.member,
            certificate: v.certificate.as_ref().map(|f| CertificateJson {
                scenario: f.scenario,
                coeffs: f.coeffs.clone(),
                bound: f.bound,
                bound_kind: f.bound_kind,
            }),
        }
    }
}

/// Critical visibility of `b` with respect to `v`, together with the optimal
/// dual functional `f`: `f·V ≤ bound` for every vertex and
/// `f·b ≥ bound + 1 − v*`. The functional is `None` when `v*` is unbounded.
pub fn visibility(b: &Behavior, v: &VertexSet) -> Result<(f64, Option<BellFunctional>)> {
    v.scenario.check_same(b.scenario())?;
    let len = v.scenario.len();
    if v.len().saturating_mul(len) > MAX_LP_COEFFICIENTS {
        return Err(Error::GuardExceeded(format!(
            "{} vertices × {len} entries",
            v.len()
        )));
    }
    if v.is_empty() {
        return Err(Error::InvalidParameter("empty vertex set".into()));
    }
    let uniform = Behavior::uniform(v.scenario);
    let u = uniform.table();
    let t = b.table();
    let nv = v.len();
    let a: Vec<Vec<f64>> = (0..len)
        .map(|e| {
            let mut row: Vec<f64> = v.vertices.iter().map(|vx| vx.table()[e]).collect();
            row.push(u[e] - t[e]);
            row
        })
        .collect();
    let mut c = vec![0.0; nv + 1];
    c[nv] = 1.0;
    let lp = LinearProgram {
        a,
        b: u.to_vec(),
        c,
    };
    match lp.solve()? {
        LpOutcome::Unbounded => Ok((f64::INFINITY, None)),
        LpOutcome::Infeasible => Err(Error::Infeasible(
            "uniform noise is outside the polytope; the query is malformed".into(),
        )),
        LpOutcome::Optimal { objective, y, .. } => {
            let kind = match v.kind {
                VertexKind::Local => BoundKind::Local,
                VertexKind::HybridNs => BoundKind::HybridNs,
                VertexKind::Ns => BoundKind::Ns,
            };
            let mut f = BellFunctional {
                scenario: v.scenario,
                coeffs: y.iter().map(|x| 0.0 - x).collect(),
                bound: 0.0,
                bound_kind: kind,
            };
            f.bound = f.bound_over(v)?;
            Ok((objective, Some(f)))
        }
    }
}

/// Decides whether `b` lies in the convex hull of `v`.
pub fn membership(b: &Behavior, v: &VertexSet) -> Result<MembershipVerdict> {
    let (v_star, dual) = visibility(b, v)?;
    let member = v_star >= 1.0 - MEMBER_TOL;
    let certificate = match dual {
        Some(f) if !member => Some(certify(b, f)?),
        _ => None,
    };
    Ok(MembershipVerdict {
        critical_visibility: v_star,
        member,
        certificate,
    })
}

fn certify(b: &Behavior, f: BellFunctional) -> Result<BellFunctional> {
    let value = f.evaluate(b)?;
    if value <= f.bound + CERTIFICATE_MARGIN {
        return Err(Error::Certificate(format!(
            "functional value {value:.12} does not exceed vertex bound {:.12}",
            f.bound
        )));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behaviors::{correlator, mix, no_signalling_residual};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s222() -> Scenario {
        Scenario::new(2, 2, 2).unwrap()
    }

    fn chsh(b: &Behavior) -> f64 {
        correlator(b, &[0, 0]).unwrap()
            + correlator(b, &[0, 1]).unwrap()
            + correlator(b, &[1, 0]).unwrap()
            - correlator(b, &[1, 1]).unwrap()
    }

    /// Isotropic two-qubit behavior under CHSH-optimal settings, built from
    /// its correlators: `P(ab|xy) = (1 + (−1)^{a⊕b} E_xy)/4`.
    fn chsh_behavior(p: f64) -> Behavior {
        let e = p * std::f64::consts::FRAC_1_SQRT_2;
        let s = s222();
        let mut table = vec![0.0; 16];
        for x in 0..2 {
            for y in 0..2 {
                let exy = if x == 1 && y == 1 { -e } else { e };
                for a in 0..2 {
                    for b in 0..2 {
                        let sign = if a == b { 1.0 } else { -1.0 };
                        table[s.index(&[x, y], &[a, b])] = (1.0 + sign * exy) / 4.0;
                    }
                }
            }
        }
        Behavior::new(s, table).unwrap()
    }

    #[test]
    fn vertex_counts() {
        assert_eq!(deterministic_vertices(s222()).unwrap().len(), 16);
        let v3 = deterministic_vertices(Scenario::new(3, 2, 2).unwrap()).unwrap();
        assert_eq!(v3.len(), 64);
        assert!(v3.vertices.iter().all(|v| no_signalling_residual(v) == 0.0));
        assert!(v3
            .vertices
            .iter()
            .all(|v| v.table().iter().all(|&x| x == 0.0 || x == 1.0)));
        assert!(deterministic_vertices(Scenario::new(5, 3, 3).unwrap()).is_err());
    }

    #[test]
    fn ns_vertices_are_valid() {
        let ns = ns_vertices_222();
        assert_eq!(ns.len(), 24);
        for v in &ns.vertices {
            assert_eq!(no_signalling_residual(v), 0.0);
        }
        assert_eq!(chsh(&pr_box(0, 0, 0)), 4.0);
    }

    #[test]
    fn ns_vertices_are_extremal() {
        let ns = ns_vertices_222();
        for i in 0..ns.len() {
            let others = VertexSet {
                scenario: ns.scenario,
                vertices: ns
                    .vertices
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, v)| v.clone())
                    .collect(),
                kind: VertexKind::Ns,
            };
            let verdict = membership(&ns.vertices[i], &others).unwrap();
            assert!(!verdict.member, "vertex {i} is in the hull of the others");
        }
    }

    #[test]
    fn hybrid_set_structure() {
        let h = hybrid_vertices_3party();
        assert_eq!(h.len(), 288);
        assert!(h.vertices.iter().all(|v| no_signalling_residual(v) < 1e-15));
        let local = deterministic_vertices(Scenario::new(3, 2, 2).unwrap()).unwrap();
        for v in &local.vertices {
            assert!(h.vertices.iter().any(|w| w == v));
        }
    }

    #[test]
    fn mixtures_of_vertices_are_members() {
        let set = deterministic_vertices(s222()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let w: Vec<f64> = (0..set.len()).map(|_| rng.random::<f64>()).collect();
            let total: f64 = w.iter().sum();
            let w: Vec<f64> = w.iter().map(|x| x / total).collect();
            let refs: Vec<&Behavior> = set.vertices.iter().collect();
            let b = mix(&refs, &w).unwrap();
            let verdict = membership(&b, &set).unwrap();
            assert!(verdict.member && verdict.critical_visibility >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn chsh_visibility_of_bell_state() {
        let set = deterministic_vertices(s222()).unwrap();
        let b = chsh_behavior(1.0);
        let verdict = membership(&b, &set).unwrap();
        assert!((verdict.critical_visibility - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        assert!(!verdict.member);
        let f = verdict.certificate.as_ref().unwrap();
        assert!(f.evaluate(&b).unwrap() > f.bound + 1e-9);
        for v in &set.vertices {
            assert!(f.evaluate(v).unwrap() <= f.bound + 1e-9);
        }
        assert!(verdict.violation(&b) > 0.0);
    }

    #[test]
    fn half_isotropic_is_local() {
        let set = deterministic_vertices(s222()).unwrap();
        let verdict = membership(&chsh_behavior(0.5), &set).unwrap();
        assert!(verdict.member);
        assert!(verdict.certificate.is_none());
    }

    #[test]
    fn uniform_query_has_infinite_visibility() {
        let set = deterministic_vertices(s222()).unwrap();
        let verdict = membership(&Behavior::uniform(s222()), &set).unwrap();
        assert!(verdict.critical_visibility.is_infinite() && verdict.member);
        let json = verdict.to_json().unwrap();
        assert_eq!(json, r#"{"v_star":null,"member":true,"certificate":null}"#);
    }

    #[test]
    fn scenario_mismatch_is_rejected() {
        let set = deterministic_vertices(s222()).unwrap();
        let b = Behavior::uniform(Scenario::new(3, 2, 2).unwrap());
        assert!(matches!(
            membership(&b, &set),
            Err(Error::ScenarioMismatch { .. })
        ));
    }

    #[test]
    fn verdict_json_schema() {
        let set = deterministic_vertices(s222()).unwrap();
        let verdict = membership(&chsh_behavior(1.0), &set).unwrap();
        let value: serde_json::Value = serde_json::from_str(&verdict.to_json().unwrap()).unwrap();
        assert_eq!(value["member"], false);
        assert!((value["v_star"].as_f64().unwrap() - 0.7071067811865).abs() < 1e-9);
        assert_eq!(value["certificate"]["coeffs"].as_array().unwrap().len(), 16);
        assert_eq!(value["certificate"]["bound_kind"], "local");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(16))]

            #[test]
            fn noise_never_decreases_visibility(p in 0.05f64..1.0, w in 0.05f64..0.95) {
                let set = deterministic_vertices(s222()).unwrap();
                let b = chsh_behavior(p);
                let noisy = mix(&[&b, &Behavior::uniform(s222())], &[w, 1.0 - w]).unwrap();
                let v0 = membership(&b, &set).unwrap().critical_visibility;
                let v1 = membership(&noisy, &set).unwrap().critical_visibility;
                prop_assert!(v1 >= v0 - 1e-9);
            }

            #[test]
            fn certificates_separate(p in 0.72f64..1.0) {
                let set = deterministic_vertices(s222()).unwrap();
                let b = chsh_behavior(p);
                let verdict = membership(&b, &set).unwrap();
                let f = verdict.certificate.unwrap();
                prop_assert!(f.evaluate(&b).unwrap() > f.bound + 1e-9);
                for v in &set.vertices {
                    prop_assert!(f.evaluate(v).unwrap() <= f.bound + 1e-9);
                }
            }
        }
    }
}
