//! A dichotomic POVM is a projective measurement followed by a biased coin.

use bellnet::measurements::dichotomic_to_projective;
use bellnet::tensor::random;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> bellnet::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rho = random::density(&mut rng, vec![3]);
    // any density matrix has its spectrum in [0, 1], so it is a valid effect
    let m0 = random::density(&mut rng, vec![3]).into_operator();
    let sim = dichotomic_to_projective(&m0)?;
    println!("response per basis vector: {:?}", sim.response);
    println!(
        "direct {:.12}, simulated {:.12}",
        rho.operator().trace_product(&m0)?.re,
        sim.probability_zero(rho.operator())?
    );
    Ok(())
}
