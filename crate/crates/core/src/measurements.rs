//! POVMs, projective measurements and post-selection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{hermitian_eig, partial_trace, DensityState, MatrixJson, Operator, C64};

/// Tolerance on positivity and completeness of POVM effects.
pub const POVM_TOL: f64 = 1e-10;
/// Outcome probabilities below this have no conditional state.
pub const MIN_OUTCOME_PROBABILITY: f64 = 1e-12;

/// A measurement given by its effects, which are positive and sum to `𝟙`.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    effects: Vec<Operator>,
}

impl Povm {
    pub fn new(effects: Vec<Operator>) -> Result<Self> {
        let first = effects
            .first()
            .ok_or_else(|| Error::InvalidPovm("no effects".into()))?;
        let dims = first.dims().to_vec();
        let mut sum = Operator::zeros(dims.clone());
        for (k, e) in effects.iter().enumerate() {
            if e.side() != first.side() {
                return Err(Error::InvalidPovm(format!(
                    "effect {k} has side {} but effect 0 has side {}",
                    e.side(),
                    first.side()
                )));
            }
            let min = min_eigenvalue(e)?;
            if min < -POVM_TOL {
                return Err(Error::InvalidPovm(format!(
                    "effect {k} has negative eigenvalue {min:.3e}"
                )));
            }
            sum.add_scaled(1.0, e)?;
        }
        let err = sum.max_abs_diff(&Operator::identity(dims));
        if err > POVM_TOL {
            return Err(Error::InvalidPovm(format!(
                "effects sum to identity only within {err:.3e}"
            )));
        }
        Ok(Self { effects })
    }

    /// Two-outcome measurement `{M₀, 𝟙 − M₀}`.
    pub fn dichotomic(m0: Operator) -> Result<Self> {
        let m1 = Operator::identity(m0.dims().to_vec()).sub(&m0)?;
        Self::new(vec![m0, m1])
    }

    /// `{(𝟙 + A)/2, (𝟙 − A)/2}` for a `±1`-valued observable `A`.
    pub fn from_observable(observable: &Operator) -> Result<Self> {
        let id = Operator::identity(observable.dims().to_vec());
        let plus = id.add(observable)?.scale(0.5);
        let minus = id.sub(observable)?.scale(0.5);
        Self::new(vec![plus, minus])
    }

    pub(crate) fn from_trusted(effects: Vec<Operator>) -> Self {
        Self { effects }
    }

    pub fn effects(&self) -> &[Operator] {
        &self.effects
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn side(&self) -> usize {
        self.effects[0].side()
    }

    /// Outcome probabilities `tr(ρ Mₐ)` for a state on exactly this space.
    pub fn probabilities(&self, state: &DensityState) -> Result<Vec<f64>> {
        self.effects
            .iter()
            .map(|e| Ok(state.operator().trace_product(e)?.re))
            .collect()
    }
}

fn min_eigenvalue(op: &Operator) -> Result<f64> {
    Ok(hermitian_eig(op)?
        .eigenvalues
        .last()
        .copied()
        .unwrap_or(0.0))
}

/// Rank-one measurement in an orthonormal basis.
pub fn projective(basis: &[Vec<C64>]) -> Result<Povm> {
    let dim = basis.len();
    if dim == 0 || basis.iter().any(|v| v.len() != dim) {
        return Err(Error::InvalidPovm(format!(
            "basis of {dim} vectors is not complete"
        )));
    }
    for i in 0..dim {
        for j in 0..dim {
            let overlap: C64 = basis[i]
                .iter()
                .zip(&basis[j])
                .map(|(a, b)| a.conj() * b)
                .sum();
            let target = if i == j { 1.0 } else { 0.0 };
            if (overlap - target).norm() > POVM_TOL {
                return Err(Error::InvalidPovm(format!(
                    "basis vectors {i}, {j} have overlap {overlap}"
                )));
            }
        }
    }
    let effects = basis
        .iter()
        .map(|v| Operator::projector(vec![dim], v))
        .collect::<Result<Vec<_>>>()?;
    Povm::new(effects)
}

/// Projective measurement plus classical post-processing reproducing a
/// dichotomic POVM `{M₀, 𝟙 − M₀}`: measure in `basis`, then output 0 with
/// probability `response[i]` on outcome `i`.
#[derive(Clone, Debug)]
pub struct DichotomicSimulation {
    pub basis: Vec<Vec<C64>>,
    pub response: Vec<f64>,
}

impl DichotomicSimulation {
    /// Probability of output 0 on `rho`: `Σᵢ λᵢ ⟨φᵢ|ρ|φᵢ⟩`.
    pub fn probability_zero(&self, rho: &Operator) -> Result<f64> {
        let mut acc = 0.0;
        for (v, &l) in self.basis.iter().zip(&self.response) {
            acc += l * rho.expectation(v)?.re;
        }
        Ok(acc)
    }

    /// The von Neumann measurement of step one.
    pub fn projective(&self) -> Result<Povm> {
        projective(&self.basis)
    }
}

pub fn dichotomic_to_projective(m0: &Operator) -> Result<DichotomicSimulation> {
    let eig = hermitian_eig(m0)?;
    for &l in &eig.eigenvalues {
        if !(-POVM_TOL..=1.0 + POVM_TOL).contains(&l) {
            return Err(Error::InvalidPovm(format!(
                "dichotomic effect has eigenvalue {l} outside [0, 1]"
            )));
        }
    }
    let basis = (0..eig.eigenvalues.len())
        .map(|i| eig.vector(i))
        .collect();
    let response = eig.eigenvalues.iter().map(|l| l.clamp(0.0, 1.0)).collect();
    Ok(DichotomicSimulation { basis, response })
}

/// Measures `effect` on subsystems `on` and returns the outcome probability
/// and the normalized post-measurement state of the remaining subsystems.
///
/// The Lüders update `√E ρ √E` is used; after tracing out the measured
/// subsystems it coincides with `tr_on((E ⊗ 𝟙) ρ)`.
pub fn measure_and_condition(
    state: &DensityState,
    effect: &Operator,
    on: &[usize],
) -> Result<(f64, Option<DensityState>)> {
    let eig = hermitian_eig(effect)?;
    let (max, min) = (
        eig.eigenvalues.first().copied().unwrap_or(0.0),
        eig.eigenvalues.last().copied().unwrap_or(0.0),
    );
    if min < -POVM_TOL || max > 1.0 + POVM_TOL {
        return Err(Error::InvalidPovm(format!(
            "effect spectrum [{min:.3e}, {max:.3e}] outside [0, 1]"
        )));
    }
    let applied = state.operator().apply_left(effect, on)?;
    let probability = applied.trace().re;
    let n = state.dims().len();
    let rest: Vec<usize> = (0..n).filter(|k| !on.contains(k)).collect();
    if probability < MIN_OUTCOME_PROBABILITY {
        return Ok((0.0, None));
    }
    if rest.is_empty() {
        return Ok((probability, None));
    }
    let mut reduced = partial_trace(&applied, &rest)?.scale(1.0 / probability);
    let side = reduced.side();
    for i in 0..side {
        for j in i..side {
            let avg = (reduced.get(i, j) + reduced.get(j, i).conj()) * 0.5;
            reduced.set(i, j, avg);
            reduced.set(j, i, avg.conj());
        }
    }
    let labels = rest.iter().map(|&k| state.labels()[k].clone()).collect();
    Ok((
        probability,
        Some(DensityState::from_trusted(reduced, labels)),
    ))
}

/// Per party, one POVM per setting. Parties act on consecutive subsystem
/// blocks of the measured state, in order.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementAssignment {
    parties: Vec<Vec<Povm>>,
}

impl MeasurementAssignment {
    pub fn new(parties: Vec<Vec<Povm>>) -> Result<Self> {
        let m = parties
            .first()
            .map(|p| p.len())
            .ok_or_else(|| Error::InvalidPovm("no parties".into()))?;
        if m == 0 {
            return Err(Error::InvalidPovm("party without settings".into()));
        }
        let r = parties[0][0].outcomes();
        for (i, party) in parties.iter().enumerate() {
            if party.len() != m {
                return Err(Error::InvalidPovm(format!(
                    "party {i} has {} settings, expected {m}",
                    party.len()
                )));
            }
            let side = party[0].side();
            for (x, povm) in party.iter().enumerate() {
                if povm.outcomes() != r {
                    return Err(Error::InvalidPovm(format!(
                        "party {i} setting {x} has {} outcomes, expected {r}",
                        povm.outcomes()
                    )));
                }
                if povm.side() != side {
                    return Err(Error::InvalidPovm(format!(
                        "party {i} setting {x} acts on dimension {}, expected {side}",
                        povm.side()
                    )));
                }
            }
        }
        Ok(Self { parties })
    }

    pub fn parties(&self) -> &[Vec<Povm>] {
        &self.parties
    }

    pub fn party_count(&self) -> usize {
        self.parties.len()
    }

    pub fn settings(&self) -> usize {
        self.parties[0].len()
    }

    pub fn outcomes(&self) -> usize {
        self.parties[0][0].outcomes()
    }

    /// Local dimension of each party.
    pub fn party_sides(&self) -> Vec<usize> {
        self.parties.iter().map(|p| p[0].side()).collect()
    }

    pub fn effect(&self, party: usize, setting: usize, outcome: usize) -> &Operator {
        &self.parties[party][setting].effects[outcome]
    }

    pub fn replace_party(&mut self, party: usize, povms: Vec<Povm>) {
        self.parties[party] = povms;
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&MeasurementAssignmentJson::from(
            self,
        ))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<MeasurementAssignmentJson>(text)?.try_into()
    }
}

/// JSON layout: `[party][setting][outcome]` → effect matrix as row-major
/// `[[re, im], …]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeasurementAssignmentJson(pub Vec<Vec<Vec<MatrixJson>>>);

impl From<&MeasurementAssignment> for MeasurementAssignmentJson {
    fn from(ma: &MeasurementAssignment) -> Self {
        Self(
            ma.parties
                .iter()
                .map(|party| {
                    party
                        .iter()
                        .map(|povm| povm.effects.iter().map(MatrixJson::from_operator).collect())
                        .collect()
                })
                .collect(),
        )
    }
}

impl TryFrom<MeasurementAssignmentJson> for MeasurementAssignment {
    type Error = Error;

    fn try_from(value: MeasurementAssignmentJson) -> Result<Self> {
        let parties = value
            .0
            .iter()
            .map(|party| {
                party
                    .iter()
                    .map(|effects| {
                        Povm::new(
                            effects
                                .iter()
                                .map(MatrixJson::to_operator)
                                .collect::<Result<Vec<_>>>()?,
                        )
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        MeasurementAssignment::new(parties)
    }
}
