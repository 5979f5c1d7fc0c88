//! A Bell inequality on the state left after post-selection becomes a
//! standard inequality on the whole network.

use bellnet::behaviors::behavior_from_quantum;
use bellnet::bell::{chsh, lift, real_plane_povm, PostSelection};
use bellnet::measurements::{MeasurementAssignment, Povm};
use bellnet::protocols::lambda_singlets;
use bellnet::states::phi_ket;
use bellnet::tensor::Operator;
use std::f64::consts::FRAC_PI_4;

fn main() -> bellnet::Result<()> {
    // A tests for |Φ⁺⟩ on her two qubits; B and C play CHSH
    let bell_test = Povm::dichotomic(Operator::projector(vec![4], &phi_ket(2))?)?;
    let ma = MeasurementAssignment::new(vec![
        vec![bell_test.clone(), bell_test],
        vec![real_plane_povm(0.0)?, real_plane_povm(2.0 * FRAC_PI_4)?],
        vec![real_plane_povm(FRAC_PI_4)?, real_plane_povm(-FRAC_PI_4)?],
    ])?;
    let b = behavior_from_quantum(&lambda_singlets()?, &ma)?;
    let lifted = lift(
        &chsh(),
        &PostSelection::new(vec![0], vec![0], vec![0])?,
        None,
    )?;
    println!(
        "lifted CHSH: {:.6} > {} (expected (2√2−2)/4 = {:.6})",
        lifted.evaluate(&b)?,
        lifted.bound,
        (2.0 * 2f64.sqrt() - 2.0) / 4.0
    );
    Ok(())
}
