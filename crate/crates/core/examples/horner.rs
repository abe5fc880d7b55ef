//! The informed-controller game with a persistent state: at persistence p in
//! [½, ⅔) the value from the uniform prior is p/(4p − 1).
//!
//! cargo run --release --example horner

use beliefspace::catalog::{horner_game, horner_value};
use beliefspace::partial::{informed_to_belief_mdp, BeliefGrid, GridModel};
use beliefspace::Evaluation;

fn main() -> beliefspace::Result<()> {
    let grid = BeliefGrid::uniform_1d(201)?;
    for p in [0.55, 0.6, 0.65] {
        let game = horner_game(p)?;
        let model = GridModel::build(&informed_to_belief_mdp(&game, 40)?, &grid)?;
        let gv = model.value_theta(&Evaluation::cesaro(2000)?);
        let v = grid.expect(&gv.values, &game.initial_beliefs());
        println!("p = {p}: v_2000 = {v:.5}  p/(4p-1) = {:.5}", horner_value(p));
    }
    Ok(())
}
