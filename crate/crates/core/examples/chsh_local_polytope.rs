//! Local-polytope membership of the isotropic qubit state under CHSH-optimal
//! settings. Non-members come with a separating functional.

use bellnet::behaviors::{behavior_from_quantum, Scenario};
use bellnet::bell::{chsh, chsh_measurements};
use bellnet::polytope::{deterministic_vertices, membership};
use bellnet::states::{isotropic, IsotropicParams};

fn main() -> bellnet::Result<()> {
    let vertices = deterministic_vertices(Scenario::new(2, 2, 2)?)?;
    let settings = chsh_measurements();
    println!("{:>5} {:>8} {:>8} {:>7}", "p", "CHSH", "v*", "local");
    for k in 0..=10 {
        let p = 0.5 + 0.05 * k as f64;
        let b = behavior_from_quantum(&isotropic(IsotropicParams::new(p, 2)?)?, &settings)?;
        let verdict = membership(&b, &vertices)?;
        println!(
            "{p:>5.2} {:>8.4} {:>8.4} {:>7}",
            chsh().evaluate(&b)?,
            verdict.critical_visibility,
            verdict.member
        );
    }

    let b = behavior_from_quantum(&isotropic(IsotropicParams::new(1.0, 2)?)?, &settings)?;
    let verdict = membership(&b, &vertices)?;
    let cert = verdict
        .certificate
        .as_ref()
        .expect("pure state is nonlocal");
    println!(
        "certificate at p=1: value {:.4} > bound {:.4}",
        cert.evaluate(&b)?,
        cert.bound
    );
    Ok(())
}
