//! Two singlets in the Λ configuration give correlations outside the hybrid
//! local/no-signalling polytope.

use bellnet::bell::SeesawOptions;
use bellnet::polytope::{hybrid_vertices_3party, membership};
use bellnet::protocols::lambda_search;

fn main() -> bellnet::Result<()> {
    let opts = SeesawOptions {
        restarts: 500,
        ..SeesawOptions::default()
    };
    let search = lambda_search(&opts)?;
    println!("v* per round: {:?}", search.visibilities);
    let verdict = membership(&search.behavior, &hybrid_vertices_3party())?;
    let cert = verdict
        .certificate
        .as_ref()
        .expect("search found a non-member");
    println!(
        "hybrid member: {}, certificate {:.6} > bound {:.6}",
        verdict.member,
        cert.evaluate(&search.behavior)?,
        cert.bound
    );
    Ok(())
}
