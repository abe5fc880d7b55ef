//! Averaging an evaluation over windows of length n makes it patient:
//! the impatience of the result is at most 3/n.
//!
//! cargo run --example window_transform

use beliefspace::dp::window_transform;
use beliefspace::Evaluation;

fn main() -> beliefspace::Result<()> {
    let spiky = beliefspace::catalog::even_stage_evaluation(20)?;
    let discounted = Evaluation::discounted(0.3, 1e-12)?;
    for (name, theta) in [("even stages", &spiky), ("discounted 0.3", &discounted)] {
        println!("{name}: I(theta) = {:.4}", theta.impatience());
        for n in [1, 2, 5, 10, 50] {
            let beta = window_transform(theta.weights(), n)?;
            println!(
                "  n = {n:<3} I(beta) = {:.4}  3/n = {:.4}",
                beta.impatience(),
                3.0 / n as f64
            );
        }
    }
    Ok(())
}
