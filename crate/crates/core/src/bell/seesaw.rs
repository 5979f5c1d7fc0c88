use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::BellFunctional;
use crate::behaviors::{behavior_from_quantum, decode, encode, Behavior, Scenario};
use crate::error::{Error, Result};
use crate::measurements::{MeasurementAssignment, Povm};
use crate::polytope::{visibility, VertexSet};
use crate::tensor::{hermitian_eig, kron_all, partial_trace, random, DensityState, Operator, C64};

/// Slack allowed when checking that a sweep did not lower the objective.
const MONOTONE_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeesawOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_sweeps: usize,
    /// Stop once a full sweep improves the value by less than this.
    pub tol: f64,
    /// Basis-update iterations per setting when outcomes exceed two.
    pub inner_iters: usize,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            seed: 0,
            max_sweeps: 500,
            tol: 1e-8,
            inner_iters: 50,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SeesawRun {
    pub assignment: MeasurementAssignment,
    pub value: f64,
    /// Functional value after each sweep, starting with the initial one.
    pub history: Vec<f64>,
    /// Index of the restart that produced this run.
    pub restart: usize,
}

impl SeesawRun {
    pub fn behavior(&self, state: &DensityState) -> Result<Behavior> {
        behavior_from_quantum(state, &self.assignment)
    }
}

type Effects = Vec<Vec<Vec<Operator>>>;

fn check_inputs(state: &DensityState, sides: &[usize], f: &BellFunctional) -> Result<()> {
    let s = f.scenario;
    if sides.len() != s.parties {
        return Err(Error::DimensionMismatch(format!(
            "{} party dimensions for a {}-party functional",
            sides.len(),
            s.parties
        )));
    }
    let total: usize = sides.iter().product();
    if total != state.operator().side() {
        return Err(Error::DimensionMismatch(format!(
            "party dimensions {sides:?} multiply to {total}, state has dimension {}",
            state.operator().side()
        )));
    }
    if s.outcomes > 2 && sides.iter().any(|&d| d != s.outcomes) {
        return Err(Error::InvalidParameter(format!(
            "with {} outcomes every party dimension must equal the outcome count",
            s.outcomes
        )));
    }
    Ok(())
}

/// Haar-random projective measurements: for two outcomes, the first outcome
/// projects onto half of a random basis; otherwise each outcome is one
/// vector of a random basis.
pub fn random_assignment(
    rng: &mut ChaCha8Rng,
    sides: &[usize],
    scenario: Scenario,
) -> Result<MeasurementAssignment> {
    let parties = sides
        .iter()
        .map(|&d| {
            (0..scenario.settings)
                .map(|_| {
                    let u = random::unitary(rng, d);
                    let column = |k: usize| (0..d).map(|i| u.get(i, k)).collect::<Vec<C64>>();
                    if scenario.outcomes == 2 {
                        let mut m0 = Operator::zeros(vec![d]);
                        for k in 0..d.div_ceil(2) {
                            m0.add_scaled(1.0, &Operator::projector(vec![d], &column(k))?)?;
                        }
                        let m1 = Operator::identity(vec![d]).sub(&m0)?;
                        Ok(Povm::from_trusted(vec![m0, m1]))
                    } else {
                        let effects = (0..d)
                            .map(|k| Operator::projector(vec![d], &column(k)))
                            .collect::<Result<Vec<_>>>()?;
                        Ok(Povm::from_trusted(effects))
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    MeasurementAssignment::new(parties)
}

/// Best of `opts.restarts` independent seesaw runs from random measurements.
/// Restart `k` draws from stream `k` of a generator seeded with `opts.seed`,
/// so results do not depend on thread scheduling.
pub fn seesaw(
    state: &DensityState,
    sides: &[usize],
    f: &BellFunctional,
    opts: &SeesawOptions,
) -> Result<SeesawRun> {
    check_inputs(state, sides, f)?;
    let runs = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(k as u64);
            let init = random_assignment(&mut rng, sides, f.scenario)?;
            let mut run = seesaw_from(state, sides, f, init, opts)?;
            run.restart = k;
            Ok(run)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(runs
        .into_iter()
        .reduce(|best, run| if run.value > best.value { run } else { best })
        .expect("at least one restart"))
}

/// One seesaw run from the given measurements.
pub fn seesaw_from(
    state: &DensityState,
    sides: &[usize],
    f: &BellFunctional,
    init: MeasurementAssignment,
    opts: &SeesawOptions,
) -> Result<SeesawRun> {
    check_inputs(state, sides, f)?;
    let s = f.scenario;
    if init.party_count() != s.parties
        || init.settings() != s.settings
        || init.outcomes() != s.outcomes
        || init.party_sides() != sides
    {
        return Err(Error::DimensionMismatch(
            "initial measurements do not match the functional and party dimensions".into(),
        ));
    }
    let rho = state.operator().clone().with_dims(sides.to_vec())?;
    let mut effects: Effects = init
        .parties()
        .iter()
        .map(|party| party.iter().map(|povm| povm.effects().to_vec()).collect())
        .collect();
    let mut value = f.evaluate(&behavior_from_quantum(state, &init)?)?;
    let mut history = vec![value];
    for _ in 0..opts.max_sweeps {
        for party in 0..s.parties {
            let w = effective_operators(&rho, sides, f, &effects, party)?;
            for (x, wx) in w.iter().enumerate() {
                let current = effects[party][x].clone();
                let proposal = if s.outcomes == 2 {
                    best_dichotomic(wx)?
                } else {
                    improve_basis(wx, &current, opts.inner_iters)?
                };
                if local_objective(wx, &proposal) >= local_objective(wx, &current) {
                    effects[party][x] = proposal;
                }
            }
        }
        let next = f.evaluate(&behavior_from_quantum(state, &assemble(&effects)?)?)?;
        debug_assert!(
            next >= value - MONOTONE_SLACK,
            "seesaw decreased {value} → {next}"
        );
        history.push(next);
        let gain = next - value;
        value = value.max(next);
        if gain < opts.tol {
            break;
        }
    }
    Ok(SeesawRun {
        assignment: assemble(&effects)?,
        value,
        history,
        restart: 0,
    })
}

fn assemble(effects: &Effects) -> Result<MeasurementAssignment> {
    MeasurementAssignment::new(
        effects
            .iter()
            .map(|party| {
                party
                    .iter()
                    .map(|e| Povm::from_trusted(e.clone()))
                    .collect()
            })
            .collect(),
    )
}

/// `W[x][a] = Σ c[x⃗][a⃗]·tr_{¬i}[ρ(⊗_{j≠i} M_j ⊗ 𝟙_i)]` with party `i`'s
/// setting and outcome fixed to `(x, a)`.
fn effective_operators(
    rho: &Operator,
    sides: &[usize],
    f: &BellFunctional,
    effects: &Effects,
    party: usize,
) -> Result<Vec<Vec<Operator>>> {
    let s = f.scenario;
    let n = s.parties;
    let (m, r) = (s.settings, s.outcomes);
    let ro = s.outcome_count();
    let others: Vec<usize> = (0..n).filter(|&p| p != party).collect();
    let identity = Operator::identity(vec![sides[party]]);
    let combos = (m * r).pow(others.len() as u32);
    let partials = (0..combos)
        .into_par_iter()
        .map(|c| {
            let digits = decode(c, m * r, others.len());
            let mut xs = vec![0; n];
            let mut os = vec![0; n];
            for (k, &p) in others.iter().enumerate() {
                xs[p] = digits[k] / r;
                os[p] = digits[k] % r;
            }
            let factors: Vec<&Operator> = (0..n)
                .map(|p| {
                    if p == party {
                        &identity
                    } else {
                        &effects[p][xs[p]][os[p]]
                    }
                })
                .collect();
            let joint = kron_all(factors)
                .expect("at least one party")
                .with_dims(sides.to_vec())?;
            let sigma = partial_trace(&joint.matmul(rho)?, &[party])?;
            Ok((xs, os, hermitize(sigma)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut w = vec![vec![Operator::zeros(vec![sides[party]]); r]; m];
    for (mut xs, mut os, sigma) in partials {
        for (x, wx) in w.iter_mut().enumerate() {
            for (a, wxa) in wx.iter_mut().enumerate() {
                xs[party] = x;
                os[party] = a;
                let c = f.coeffs[encode(&xs, m) * ro + encode(&os, r)];
                if c != 0.0 {
                    wxa.add_scaled(c, &sigma)?;
                }
            }
        }
    }
    Ok(w)
}

fn hermitize(op: Operator) -> Operator {
    let adj = op.adjoint();
    op.add(&adj).expect("same dimensions").scale(0.5)
}

fn local_objective(w: &[Operator], effects: &[Operator]) -> f64 {
    w.iter()
        .zip(effects)
        .map(|(wa, ea)| wa.trace_product(ea).expect("same dimensions").re)
        .sum()
}

/// Projector onto the positive eigenspace of `W₀ − W₁`, and its complement.
fn best_dichotomic(w: &[Operator]) -> Result<Vec<Operator>> {
    let diff = hermitize(w[0].sub(&w[1])?);
    let spec = hermitian_eig(&diff)?;
    let m0 = spec.map_eigenvalues(|l| if l > 0.0 { 1.0 } else { 0.0 });
    let m1 = Operator::identity(m0.dims().to_vec()).sub(&m0)?;
    Ok(vec![m0, m1])
}

/// Unit vector spanning a rank-one projector.
fn spanning_vector(p: &Operator) -> Vec<C64> {
    let d = p.side();
    let col = (0..d)
        .max_by(|&a, &b| p.get(a, a).re.total_cmp(&p.get(b, b).re))
        .expect("nonempty");
    let v: Vec<C64> = (0..d).map(|i| p.get(i, col)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Ascent on `Σₐ⟨eₐ|Wₐ|eₐ⟩` over orthonormal bases: with every `Wₐ` shifted
/// to be positive semidefinite the objective is convex, so replacing the
/// basis by the unitary polar factor of `G = [Wₐeₐ]` never decreases it.
fn improve_basis(w: &[Operator], current: &[Operator], iters: usize) -> Result<Vec<Operator>> {
    let d = current[0].side();
    let shift = w
        .iter()
        .map(|wa| hermitian_eig(wa).map(|s| s.eigenvalues[d - 1]))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0f64, |acc, l| acc.max(-l));
    let shifted: Vec<Operator> = w
        .iter()
        .map(|wa| {
            let mut s = wa.clone();
            s.add_scaled(shift, &Operator::identity(vec![d]))?;
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut basis: Vec<Vec<C64>> = current.iter().map(spanning_vector).collect();
    let objective = |basis: &[Vec<C64>]| -> f64 {
        shifted
            .iter()
            .zip(basis)
            .map(|(wa, e)| wa.expectation(e).expect("same dimension").re)
            .sum()
    };
    let mut value = objective(&basis);
    for _ in 0..iters {
        let mut g = Operator::zeros(vec![d]);
        for (a, (wa, e)) in shifted.iter().zip(&basis).enumerate() {
            for i in 0..d {
                let gi: C64 = (0..d).map(|j| wa.get(i, j) * e[j]).sum();
                g.set(i, a, gi);
            }
        }
        let h = hermitize(g.adjoint().matmul(&g)?);
        let spec = hermitian_eig(&h)?;
        if spec.eigenvalues[d - 1] <= 1e-14 * spec.eigenvalues[0].max(f64::MIN_POSITIVE) {
            break;
        }
        let polar = g.matmul(&spec.map_eigenvalues(|l| 1.0 / l.sqrt()))?;
        let next: Vec<Vec<C64>> = (0..d)
            .map(|a| (0..d).map(|i| polar.get(i, a)).collect())
            .collect();
        let next_value = objective(&next);
        if next_value < value {
            break;
        }
        let gain = next_value - value;
        basis = next;
        value = next_value;
        if gain < 1e-14 {
            break;
        }
    }
    basis
        .iter()
        .map(|e| Operator::projector(vec![d], e))
        .collect()
}

/// Result of [`polytope_seesaw`].
#[derive(Clone, Debug)]
pub struct PolytopeSearch {
    pub run: SeesawRun,
    pub behavior: Behavior,
    /// Critical visibility after the initial search and after each round.
    pub visibilities: Vec<f64>,
}

impl PolytopeSearch {
    pub fn critical_visibility(&self) -> f64 {
        *self.visibilities.last().expect("at least one entry")
    }
}

/// Lowers the critical visibility of the quantum behavior with respect to
/// `v`. Each of `opts.restarts` chains starts from random measurements,
/// optionally runs the seesaw on `initial`, then alternates between solving
/// the visibility LP and running the seesaw on its dual functional from the
/// current measurements. A chain stops once a round brings no decrease; the
/// chain with the lowest `v*` wins.
pub fn polytope_seesaw(
    state: &DensityState,
    sides: &[usize],
    initial: Option<&BellFunctional>,
    v: &VertexSet,
    opts: &SeesawOptions,
    rounds: usize,
) -> Result<PolytopeSearch> {
    let chains = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(k as u64);
            let init = random_assignment(&mut rng, sides, v.scenario)?;
            let mut run = match initial {
                Some(f) => seesaw_from(state, sides, f, init, opts)?,
                None => {
                    let value = 0.0;
                    SeesawRun {
                        assignment: init,
                        value,
                        history: vec![],
                        restart: k,
                    }
                }
            };
            run.restart = k;
            let mut behavior = run.behavior(state)?;
            let (mut v_star, mut dual) = visibility(&behavior, v)?;
            let mut visibilities = vec![v_star];
            for _ in 0..rounds {
                let Some(f) = dual.take() else { break };
                let mut next = seesaw_from(state, sides, &f, run.assignment.clone(), opts)?;
                next.restart = k;
                let next_behavior = next.behavior(state)?;
                // a later LP that breaks down ends the chain at its last good point
                let Ok((next_v, next_dual)) = visibility(&next_behavior, v) else {
                    break;
                };
                if next_v > v_star - 1e-10 {
                    break;
                }
                run = next;
                behavior = next_behavior;
                v_star = next_v;
                dual = next_dual;
                visibilities.push(v_star);
            }
            Ok(PolytopeSearch {
                run,
                behavior,
                visibilities,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(chains
        .into_iter()
        .reduce(|best, c| {
            if c.critical_visibility() < best.critical_visibility() {
                c
            } else {
                best
            }
        })
        .expect("at least one chain"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{cglmp, chsh, mermin, svetlichny};
    use crate::states::{ghz, max_entangled};
    use std::f64::consts::SQRT_2;

    fn quick(restarts: usize) -> SeesawOptions {
        SeesawOptions {
            restarts,
            ..SeesawOptions::default()
        }
    }

    #[test]
    fn tsirelson_from_random_starts() {
        let phi = max_entangled(2).unwrap();
        let run = seesaw(&phi, &[2, 2], &chsh(), &quick(20)).unwrap();
        assert!((run.value - 2.0 * SQRT_2).abs() < 1e-6);
        let b = run.behavior(&phi).unwrap();
        assert!((chsh().evaluate(&b).unwrap() - run.value).abs() < 1e-12);
    }

    #[test]
    fn mermin_on_ghz() {
        let g = ghz(3).unwrap();
        let run = seesaw(&g, &[2, 2, 2], &mermin(3).unwrap(), &quick(20)).unwrap();
        assert!((run.value - 4.0).abs() < 1e-6);
    }

    #[test]
    fn svetlichny_on_ghz() {
        let g = ghz(3).unwrap();
        let run = seesaw(&g, &[2, 2, 2], &svetlichny(), &quick(20)).unwrap();
        assert!((run.value - 4.0 * SQRT_2).abs() < 1e-3);
    }

    #[test]
    fn history_is_monotone() {
        let g = ghz(3).unwrap();
        let run = seesaw(&g, &[2, 2, 2], &svetlichny(), &quick(4)).unwrap();
        for pair in run.history.windows(2) {
            assert!(pair[1] >= pair[0] - MONOTONE_SLACK);
        }
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let phi = max_entangled(2).unwrap();
        let opts = SeesawOptions {
            restarts: 3,
            seed: 11,
            ..SeesawOptions::default()
        };
        let a = seesaw(&phi, &[2, 2], &chsh(), &opts).unwrap();
        let b = seesaw(&phi, &[2, 2], &chsh(), &opts).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.assignment, b.assignment);
    }

    #[test]
    fn qutrit_seesaw_reaches_fourier_value() {
        let phi = max_entangled(3).unwrap();
        let f = cglmp(3).unwrap();
        let fourier =
            behavior_from_quantum(&phi, &crate::bell::cglmp_fourier_measurements(3).unwrap())
                .unwrap();
        let target = f.evaluate(&fourier).unwrap();
        let run = seesaw(&phi, &[3, 3], &f, &quick(20)).unwrap();
        assert!(run.value > target - 1e-6, "{} vs {target}", run.value);
    }

    #[test]
    fn rejects_bad_dimensions() {
        let phi = max_entangled(2).unwrap();
        assert!(seesaw(&phi, &[2, 3], &chsh(), &quick(1)).is_err());
        assert!(seesaw(&phi, &[4], &chsh(), &quick(1)).is_err());
        let phi3 = max_entangled(2).unwrap();
        assert!(seesaw(&phi3, &[2, 2], &cglmp(3).unwrap(), &quick(1)).is_err());
    }
}
