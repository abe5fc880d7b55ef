//! The posterior map is non-expansive for d* but not for Kantorovich–Rubinstein.
//!
//! cargo run --example dstar_metric

use beliefspace::metric::{dstar_distance, dstar_lower_bound, kr_distance, posterior_map};
use beliefspace::{random, JointDist};

fn main() -> beliefspace::Result<()> {
    // Two joint laws on three states and two signals, 0.5 apart in L¹.
    let pi = JointDist::new(vec![vec![0.25, 0.0], vec![0.0, 0.5], vec![0.25, 0.0]])?;
    let pi2 = JointDist::new(vec![vec![0.25, 0.0], vec![0.0, 0.5], vec![0.0, 0.25]])?;
    let (u, v) = (posterior_map(&pi), posterior_map(&pi2));

    let (d, _) = dstar_distance(&u, &v)?;
    let (kr, plan) = kr_distance(&u, &v)?;
    let mut rng = random::seeded(3);
    let families: Vec<_> = (0..200).map(|_| random::matrix_family(&mut rng, 3, 3)).collect();
    let lower = dstar_lower_bound(&u, &v, &families)?;

    println!("|pi - pi'|_1          = {}", pi.l1_distance(&pi2)?);
    println!("d*(u, v)              = {d:.12}");
    println!("d_KR(u, v)            = {kr:.12}");
    println!("best of 200 games     = {lower:.12}");
    println!("optimal coupling      = {:?}", plan.coupling);
    Ok(())
}
