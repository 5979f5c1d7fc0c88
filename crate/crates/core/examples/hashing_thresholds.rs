//! Isotropic weight above which the hashing bound is positive, for growing
//! local dimension.

use bellnet::distill::{hashing_bound, hashing_thresholds, isotropic_hashing};
use bellnet::states::{isotropic, IsotropicParams};

fn main() -> bellnet::Result<()> {
    let rho = isotropic(IsotropicParams::new(0.9, 2)?)?;
    let r = hashing_bound(&rho, &[1])?;
    println!(
        "qubit p=0.9: S_B={:.4} S_AB={:.4} bound={:.4} (closed form {:.4})",
        r.entropies.0,
        r.entropies.1,
        r.value,
        isotropic_hashing(0.9, 2)?
    );
    let ds: Vec<usize> = (1..=16).map(|k| 1usize << k).collect();
    println!("d,p_star");
    for (d, p) in ds.iter().zip(hashing_thresholds(&ds)) {
        println!("{d},{:.6}", p?);
    }
    Ok(())
}
