//! A reaching problem whose discounted value approaches 1 like 1 − Cλ^{(l−1)/l}.
//!
//! cargo run --release --example infini

use beliefspace::catalog::{fitted_exponent, infini_closed_form, infini_house, InfiniPayoff};
use beliefspace::dp::value_theta_house;
use beliefspace::Evaluation;

fn main() -> beliefspace::Result<()> {
    let l = 2.0;
    let house = infini_house(l, 501, InfiniPayoff::Reach)?;
    let mut lambdas = Vec::new();
    let mut gaps = Vec::new();
    for i in 0..9 {
        let lambda = 10f64.powf(-4.0 + 0.25 * i as f64);
        let v = value_theta_house(&house, &Evaluation::discounted(lambda, 1e-10)?)[0];
        println!(
            "lambda = {lambda:.2e}  v = {v:.6}  closed form = {:.6}",
            infini_closed_form(lambda, l)
        );
        lambdas.push(lambda);
        gaps.push(1.0 - v);
    }
    println!(
        "fitted exponent of 1 - v: {:.4} (expected {})",
        fitted_exponent(&lambdas, &gaps),
        (l - 1.0) / l
    );
    Ok(())
}
