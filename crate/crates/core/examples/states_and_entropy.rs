//! Isotropic states, partial traces and the entropies behind the hashing bound.

use bellnet::states::{isotropic, max_entangled, phi_ket, IsotropicParams};
use bellnet::tensor::{entropy, fidelity_pure, partial_trace};

fn main() -> bellnet::Result<()> {
    let phi = max_entangled(2)?;
    let alice = partial_trace(phi.operator(), &[0])?;
    println!(
        "reduced state of |Φ⁺⟩: diag({:.3}, {:.3})",
        alice.get(0, 0).re,
        alice.get(1, 1).re
    );

    for p in [0.0, 0.5, 0.9, 1.0] {
        let rho = isotropic(IsotropicParams::new(p, 3)?)?;
        let s = entropy(&rho)?;
        let f = fidelity_pure(&rho, &phi_ket(3))?;
        println!("d=3 p={p:.1}: S(AB) = {s:.4} bits, ⟨Φ|ρ|Φ⟩ = {f:.4}");
    }
    Ok(())
}
