//! A controller that never observes the state: discounted values on a belief
//! grid against the best "move n times, then collect" plan.
//!
//! cargo run --release --example dark

use beliefspace::catalog::{dark_oracle, dark_pomdp};
use beliefspace::partial::{pomdp_to_belief_mdp, BeliefGrid, GridModel};
use beliefspace::{Evaluation, SimplexPoint};

fn main() -> beliefspace::Result<()> {
    let grid = BeliefGrid::uniform_1d(2001)?;
    let model = GridModel::build(&pomdp_to_belief_mdp(&dark_pomdp()), &grid)?;
    let start = SimplexPoint::vertex(2, 0)?;
    for lambda in [1e-1, 1e-2, 1e-3, 1e-4] {
        let gv = model.value_theta(&Evaluation::discounted(lambda, 1e-10)?);
        let v = grid.interpolate(&gv.values, &start);
        let scale = lambda * (1.0 / lambda).log2();
        println!(
            "lambda = {lambda:.0e}  v = {v:.6}  oracle = {:.6}  (1 - v)/(lambda log2(1/lambda)) = {:.3}",
            dark_oracle(lambda, 200),
            (1.0 - v) / scale
        );
    }
    Ok(())
}
