//! State families and network composition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{kron_ket, DensityState, Operator, C64};

/// Largest total Hilbert-space dimension materialized by [`compose_network`].
pub const MAX_NETWORK_DIM: usize = 1 << 12;

/// `(1/√d) Σᵢ |ii⟩`.
pub fn phi_ket(d: usize) -> Vec<C64> {
    let amp = 1.0 / (d as f64).sqrt();
    let mut ket = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        ket[i * d + i] = C64::new(amp, 0.0);
    }
    ket
}

/// `(|0…0⟩ + |1…1⟩)/√2` on `n` qubits.
pub fn ghz_ket(n: usize) -> Vec<C64> {
    let side = 1usize << n;
    let mut ket = vec![C64::new(0.0, 0.0); side];
    ket[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    ket[side - 1] += C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    ket
}

/// Computational basis ket `|index⟩` of the given dimension.
pub fn basis_ket(dim: usize, index: usize) -> Vec<C64> {
    let mut ket = vec![C64::new(0.0, 0.0); dim];
    ket[index] = C64::new(1.0, 0.0);
    ket
}

pub fn max_entangled(d: usize) -> Result<DensityState> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("local dimension {d} < 2")));
    }
    DensityState::from_ket(vec![d, d], &phi_ket(d))
}

pub fn ghz(n: usize) -> Result<DensityState> {
    if n < 1 {
        return Err(Error::InvalidParameter("GHZ state needs n ≥ 1".into()));
    }
    if n > 12 {
        return Err(Error::GuardExceeded(format!("GHZ on {n} qubits")));
    }
    DensityState::from_ket(vec![2; n], &ghz_ket(n))
}

/// Noise weight and local dimension of an isotropic state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotropicParams {
    pub p: f64,
    pub d: usize,
}

impl IsotropicParams {
    pub fn new(p: f64, d: usize) -> Result<Self> {
        let params = Self { p, d };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidParameter(format!(
                "noise weight p = {} outside [0, 1]",
                self.p
            )));
        }
        if self.d < 2 {
            return Err(Error::InvalidParameter(format!(
                "local dimension {} < 2",
                self.d
            )));
        }
        Ok(())
    }

    /// `(largest, rest)` eigenvalues; `rest` has multiplicity `d² − 1`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let d2 = (self.d * self.d) as f64;
        let noise = (1.0 - self.p) / d2;
        (self.p + noise, noise)
    }
}

/// `p |Φ⟩⟨Φ| + (1 − p) 𝟙/d²`.
pub fn isotropic(params: IsotropicParams) -> Result<DensityState> {
    params.validate()?;
    let d = params.d;
    let phi = Operator::projector(vec![d, d], &phi_ket(d))?;
    let mut op = Operator::identity(vec![d, d]).scale((1.0 - params.p) / (d * d) as f64);
    op.add_scaled(params.p, &phi)?;
    DensityState::new(op)
}

/// Subsystem order of [`sigma_state`].
pub const SIGMA_LABELS: [&str; 6] = ["A", "B", "C", "Af", "Bf", "Cf"];

/// The flagged branch kets `|ψ₁⟩ = |Φ⟩_AB|0⟩_C` and `|ψ₂⟩ = |Φ⟩_AC|0⟩_B` on ABC.
pub fn sigma_branches() -> (Vec<C64>, Vec<C64>) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut psi1 = vec![C64::new(0.0, 0.0); 8];
    let mut psi2 = vec![C64::new(0.0, 0.0); 8];
    // index = 4a + 2b + c
    psi1[0b000] = C64::new(s, 0.0);
    psi1[0b110] = C64::new(s, 0.0);
    psi2[0b000] = C64::new(s, 0.0);
    psi2[0b101] = C64::new(s, 0.0);
    (psi1, psi2)
}

/// Equal mixture of `|ψ₁⟩⟨ψ₁| ⊗ |000⟩⟨000|` and `|ψ₂⟩⟨ψ₂| ⊗ |111⟩⟨111|`
/// on `A B C A_f B_f C_f`. The idle qubit of each branch is `|0⟩`.
pub fn sigma_state() -> Result<DensityState> {
    let (psi1, psi2) = sigma_branches();
    let k1 = kron_ket(&psi1, &basis_ket(8, 0b000));
    let k2 = kron_ket(&psi2, &basis_ket(8, 0b111));
    let mut op = Operator::projector(vec![2; 6], &k1)?.scale(0.5);
    op.add_scaled(0.5, &Operator::projector(vec![2; 6], &k2)?)?;
    DensityState::new(op)?.with_labels(SIGMA_LABELS.iter().map(|s| s.to_string()).collect())
}

/// State held by the idle leaves of a flag branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Filler {
    MaximallyMixedQubit,
}

/// Symbolic description of the flagged star state and its `L` copies.
/// Nothing is materialized: one copy already has dimension `(2N)^{N+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauDescriptor {
    pub leaves: usize,
    pub p: f64,
    pub copies: usize,
    pub filler: Filler,
}

impl TauDescriptor {
    /// Number of parties: the center plus every leaf.
    pub fn parties(&self) -> usize {
        self.leaves + 1
    }

    /// log₂ of the dimension of one copy: the center and leaf qubits plus
    /// one `N`-level flag per party.
    pub fn log2_dim_single_copy(&self) -> f64 {
        let n = self.leaves as f64;
        (n + 1.0) + (n + 1.0) * n.log2()
    }
}

pub fn tau_descriptor(leaves: usize, p: f64, copies: usize) -> Result<TauDescriptor> {
    if leaves < 1 || copies < 1 {
        return Err(Error::InvalidParameter(format!(
            "tau needs N ≥ 1 and L ≥ 1, got N = {leaves}, L = {copies}"
        )));
    }
    IsotropicParams::new(p, 2)?;
    Ok(TauDescriptor {
        leaves,
        p,
        copies,
        filler: Filler::MaximallyMixedQubit,
    })
}

/// One state of a network and the party receiving each of its subsystems.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Link {
    #[serde(flatten)]
    pub state: StateSpec,
    pub assign: Vec<String>,
}

/// Named state constructors usable from JSON layouts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum StateSpec {
    Iso { p: f64, d: usize },
    Phi { d: usize },
    Ghz { n: usize },
    Mixed { dims: Vec<usize> },
}

impl StateSpec {
    pub fn build(&self) -> Result<DensityState> {
        match self {
            StateSpec::Iso { p, d } => isotropic(IsotropicParams::new(*p, *d)?),
            StateSpec::Phi { d } => max_entangled(*d),
            StateSpec::Ghz { n } => ghz(*n),
            StateSpec::Mixed { dims } => Ok(DensityState::maximally_mixed(dims.clone())),
        }
    }
}

/// Parties and the links distributing states among them.
///
/// JSON form:
/// `{"parties":["A","B"],"links":[{"state":"iso","p":0.8,"d":2,"assign":["A","B"]}]}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkLayout {
    pub parties: Vec<String>,
    pub links: Vec<Link>,
}

impl NetworkLayout {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Builds each link's state from its spec.
    pub fn build_states(&self) -> Result<Vec<DensityState>> {
        self.links.iter().map(|l| l.state.build()).collect()
    }

    /// `Λ` layout: `A` shares one state with `B` and one with `C`.
    pub fn lambda(ab: StateSpec, ac: StateSpec) -> Self {
        Self {
            parties: vec!["A".into(), "B".into(), "C".into()],
            links: vec![
                Link {
                    state: ab,
                    assign: vec!["A".into(), "B".into()],
                },
                Link {
                    state: ac,
                    assign: vec!["A".into(), "C".into()],
                },
            ],
        }
    }

    /// Star layout: center `A` shares `link` with each of `B1 … BN`.
    pub fn star(leaves: usize, link: StateSpec) -> Self {
        let mut parties = vec!["A".to_string()];
        parties.extend((1..=leaves).map(|i| format!("B{i}")));
        let links = (1..=leaves)
            .map(|i| Link {
                state: link.clone(),
                assign: vec!["A".into(), format!("B{i}")],
            })
            .collect();
        Self { parties, links }
    }
}

/// Ownership record of a composed network state.
#[derive(Clone, Debug, PartialEq)]
pub struct PartyMap {
    /// `(party, subsystems it owns in the composed state)`, in layout order.
    pub owners: Vec<(String, Vec<usize>)>,
    /// For each composed subsystem, `(link, slot)` it came from.
    pub sources: Vec<(usize, usize)>,
}

impl PartyMap {
    pub fn subsystems_of(&self, party: &str) -> Option<&[usize]> {
        self.owners
            .iter()
            .find(|(p, _)| p == party)
            .map(|(_, s)| s.as_slice())
    }

    /// Position each subsystem would have in the plain tensor product of the
    /// links, before party-contiguous reordering.
    pub fn raw_positions(&self, party: &str, link_sizes: &[usize]) -> Vec<usize> {
        let mut starts = vec![0usize; link_sizes.len()];
        for k in 1..link_sizes.len() {
            starts[k] = starts[k - 1] + link_sizes[k - 1];
        }
        self.subsystems_of(party)
            .unwrap_or(&[])
            .iter()
            .map(|&s| {
                let (link, slot) = self.sources[s];
                starts[link] + slot
            })
            .collect()
    }
}

/// Tensors the link states together, reordered so each party's subsystems
/// are contiguous (parties in layout order, subsystems in link order).
/// `states[i]` is the state of `layout.links[i]`.
pub fn compose_network(
    layout: &NetworkLayout,
    states: &[DensityState],
) -> Result<(DensityState, PartyMap)> {
    if states.len() != layout.links.len() {
        return Err(Error::InvalidLayout(format!(
            "{} states for {} links",
            states.len(),
            layout.links.len()
        )));
    }
    if states.is_empty() {
        return Err(Error::InvalidLayout("layout has no links".into()));
    }
    let total: f64 = states
        .iter()
        .map(|s| (s.operator().side() as f64).log2())
        .sum();
    if total > (MAX_NETWORK_DIM as f64).log2() + 1e-9 {
        return Err(Error::GuardExceeded(format!(
            "network dimension 2^{total:.1} exceeds {MAX_NETWORK_DIM}"
        )));
    }
    let mut raw_owner: Vec<usize> = Vec::new();
    let mut raw_source: Vec<(usize, usize)> = Vec::new();
    for (li, (link, state)) in layout.links.iter().zip(states).enumerate() {
        if link.assign.len() != state.dims().len() {
            return Err(Error::InvalidLayout(format!(
                "link {li} assigns {} subsystems but its state has {}",
                link.assign.len(),
                state.dims().len()
            )));
        }
        for (slot, party) in link.assign.iter().enumerate() {
            let pi = layout
                .parties
                .iter()
                .position(|p| p == party)
                .ok_or_else(|| {
                    Error::InvalidLayout(format!("link {li} names unknown party {party:?}"))
                })?;
            raw_owner.push(pi);
            raw_source.push((li, slot));
        }
    }
    let mut product = states[0].clone();
    for s in &states[1..] {
        product = product.tensor(s);
    }
    let mut order = Vec::with_capacity(raw_owner.len());
    let mut owners = Vec::with_capacity(layout.parties.len());
    for (pi, party) in layout.parties.iter().enumerate() {
        let mut owned = Vec::new();
        for (raw, &o) in raw_owner.iter().enumerate() {
            if o == pi {
                owned.push(order.len());
                order.push(raw);
            }
        }
        owners.push((party.clone(), owned));
    }
    let op = product.operator().permute(&order)?;
    let labels = order
        .iter()
        .map(|&raw| layout.parties[raw_owner[raw]].clone())
        .collect();
    let sources = order.iter().map(|&raw| raw_source[raw]).collect();
    Ok((
        DensityState::from_trusted(op, labels),
        PartyMap { owners, sources },
    ))
}
