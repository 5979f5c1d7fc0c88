//! Star network: the center projects her qubits onto GHZ and the leaves test
//! the resulting state.

use bellnet::bell::{chsh, mermin, plane, SeesawOptions};
use bellnet::protocols::{star_conditional, star_crossing, star_threshold};
use bellnet::states::ghz_ket;
use bellnet::tensor::fidelity_pure;

fn main() -> bellnet::Result<()> {
    for p in [0.7, 0.8, 0.9, 1.0] {
        let r = star_conditional(p, 3)?;
        println!(
            "N=3 p={p}: success {:.4}, GHZ fidelity {:.4}",
            r.success_prob,
            fidelity_pure(&r.conditional, &ghz_ket(3))?
        );
    }
    let opts = SeesawOptions {
        restarts: 10,
        ..SeesawOptions::default()
    };
    println!(
        "N=2 CHSH crossing   {:.4}",
        star_crossing(2, &chsh(), &opts, 20)?
    );
    println!(
        "N=3 Mermin crossing {:.4}",
        star_crossing(3, &mermin(3)?, &opts, 20)?
    );
    for k in [4, 8] {
        println!(
            "N=2 plane K={k} crossing {:.4}",
            star_crossing(2, &plane(2, k)?, &opts, 20)?
        );
    }
    for n in [2, 3, 7, 21] {
        println!("p_{n} = {:.4}", star_threshold(n));
    }
    Ok(())
}
