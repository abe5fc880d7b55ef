//! Unit rotation on the circle: time averages of (1 + cos α)/2 along an orbit
//! approach ½ from every start.
//!
//! cargo run --release --example circle

use beliefspace::catalog::{circle_house, circle_reference};
use beliefspace::dp::value_theta_house;
use beliefspace::Evaluation;

fn main() -> beliefspace::Result<()> {
    let reference = circle_reference(1_000_000);
    for start in [0.0, 1.9, 5.1] {
        for n in [10, 100, 1000, 10_000] {
            let v = value_theta_house(&circle_house(start, n), &Evaluation::cesaro(n)?)[0];
            println!(
                "start {start}  n = {n:<6} v_n = {v:.6}  |v_n - 1/2| = {:.2e}",
                (v - reference).abs()
            );
        }
    }
    Ok(())
}
