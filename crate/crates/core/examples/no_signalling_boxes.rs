//! PR boxes are extremal no-signalling points outside the local polytope.

use bellnet::bell::chsh;
use bellnet::polytope::{deterministic_vertices, membership, ns_vertices_222, pr_box};

fn main() -> bellnet::Result<()> {
    let ns = ns_vertices_222();
    let local = deterministic_vertices(ns.scenario)?;
    println!("{} no-signalling vertices, {} local", ns.len(), local.len());
    let pr = pr_box(0, 0, 0);
    let verdict = membership(&pr, &local)?;
    println!(
        "PR box: CHSH {}, local v* {:.6}, no-signalling member {}",
        chsh().evaluate(&pr)?,
        verdict.critical_visibility,
        membership(&pr, &ns)?.member
    );
    Ok(())
}
