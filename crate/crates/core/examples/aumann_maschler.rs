//! Informed controller with a fixed state: the long-run value is the concave
//! envelope of the non-revealing value, here p(1 − p).
//!
//! cargo run --release --example aumann_maschler

use beliefspace::catalog::{aumann_maschler_family, aumann_maschler_game};
use beliefspace::partial::{cav_u, informed_to_belief_mdp, non_revealing_values, BeliefGrid, GridModel};
use beliefspace::Evaluation;

fn main() -> beliefspace::Result<()> {
    let grid = BeliefGrid::uniform_1d(21)?;
    let fam = aumann_maschler_family();
    let u = non_revealing_values(&fam, &grid)?;
    let cav = cav_u(&fam, &grid)?;
    let bm = informed_to_belief_mdp(&aumann_maschler_game(0.5)?, 20)?;
    let v = GridModel::build(&bm, &grid)?
        .value_theta(&Evaluation::cesaro(500)?)
        .values;
    println!("{:>5} {:>9} {:>9} {:>9}", "p", "u(p)", "cav u", "v_500");
    for (i, p) in grid.points().iter().enumerate() {
        println!("{:>5.2} {:>9.5} {:>9.5} {:>9.5}", p[0], u[i], cav[i], v[i]);
    }
    Ok(())
}
