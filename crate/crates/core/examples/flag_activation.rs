//! Activation from many copies: flags reconstruct the Λ network (σ) or the
//! star (τ) with a probability approaching one.

use bellnet::bell::{mermin, SeesawOptions};
use bellnet::protocols::{lambda_search, sigma_activation, star_violation, tau_activation};

fn main() -> bellnet::Result<()> {
    let search = lambda_search(&SeesawOptions {
        restarts: 500,
        ..SeesawOptions::default()
    })?;
    println!("Λ behavior v* = {:.6}", search.critical_visibility());
    for row in sigma_activation(&search.behavior, &(1..=10).collect::<Vec<_>>())? {
        println!(
            "L={:>2} p_eq={:.5} v*={:.5} nonlocal={}",
            row.copies, row.p_eq, row.v_star, !row.member
        );
    }

    let f = mermin(3)?;
    let star = star_violation(0.95, 3, &f, &SeesawOptions::default())?;
    for row in tau_activation(&star, &f, &[3, 5, 10, 20, 40]) {
        println!(
            "L={:>2} coverage={:.5} guaranteed Mermin value {:.4} (bound {})",
            row.copies, row.coverage, row.guaranteed, row.bound
        );
    }
    Ok(())
}
