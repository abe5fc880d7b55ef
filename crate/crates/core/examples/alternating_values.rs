//! Two states swapped every stage: Cesàro values tend to ½, while an
//! evaluation that only weights even stages keeps the starting state's payoff.
//!
//! cargo run --example alternating_values

use beliefspace::catalog::{alternating_house, alternating_mdp, even_stage_evaluation};
use beliefspace::dp::{limit_value_lp, value_theta_house};
use beliefspace::Evaluation;

fn main() -> beliefspace::Result<()> {
    let house = alternating_house();
    for n in [1, 2, 3, 10, 11, 1000, 1001] {
        let v = value_theta_house(&house, &Evaluation::cesaro(n)?);
        println!("cesaro n = {n:<5} v = ({:.6}, {:.6})", v[0], v[1]);
    }
    for n in [1, 10, 100] {
        let theta = even_stage_evaluation(n)?;
        let v = value_theta_house(&house, &theta);
        println!(
            "even stages n = {n:<4} I(theta) = {:.3}  v = ({}, {})",
            theta.impatience(),
            v[0],
            v[1]
        );
    }
    let (v_star, cert) = limit_value_lp(&alternating_mdp(), 0)?;
    println!("v* = {v_star}, w = {:?}, h = {:?}", cert.w, cert.h);
    Ok(())
}
