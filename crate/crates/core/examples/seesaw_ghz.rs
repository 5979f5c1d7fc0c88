//! Seesaw optimization of CHSH, Mermin and Svetlichny.

use bellnet::bell::{chsh, mermin, seesaw, svetlichny, SeesawOptions};
use bellnet::states::{ghz, max_entangled};

fn main() -> bellnet::Result<()> {
    let opts = SeesawOptions::default();
    let run = seesaw(&max_entangled(2)?, &[2, 2], &chsh(), &opts)?;
    println!(
        "CHSH on |Φ⁺⟩: {:.6} (2√2 = {:.6})",
        run.value,
        2.0 * 2f64.sqrt()
    );

    let g = ghz(3)?;
    let run = seesaw(&g, &[2, 2, 2], &mermin(3)?, &opts)?;
    println!("Mermin on GHZ: {:.6}, local bound 2", run.value);

    let s = svetlichny();
    let run = seesaw(&g, &[2, 2, 2], &s, &opts)?;
    println!(
        "Svetlichny on GHZ: {:.6}, hybrid bound {} ({} sweeps)",
        run.value,
        s.bound,
        run.history.len()
    );
    Ok(())
}
