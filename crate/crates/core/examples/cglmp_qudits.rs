//! CGLMP on maximally entangled qudits: Fourier measurements versus seesaw,
//! and the noise threshold each implies.

use bellnet::behaviors::behavior_from_quantum;
use bellnet::bell::{cglmp, cglmp_fourier_measurements, seesaw, SeesawOptions};
use bellnet::states::max_entangled;

fn main() -> bellnet::Result<()> {
    let opts = SeesawOptions {
        restarts: 10,
        ..SeesawOptions::default()
    };
    for d in 2..=4 {
        let f = cglmp(d)?;
        let phi = max_entangled(d)?;
        let fourier = f.evaluate(&behavior_from_quantum(
            &phi,
            &cglmp_fourier_measurements(d)?,
        )?)?;
        let run = seesaw(&phi, &[d, d], &f, &opts)?;
        // isotropic noise mixes in the uniform table, on which CGLMP is zero
        println!(
            "d={d}: Fourier {fourier:.5}, seesaw {:.5}, threshold p* = {:.5}",
            run.value,
            f.bound / run.value
        );
    }
    Ok(())
}
