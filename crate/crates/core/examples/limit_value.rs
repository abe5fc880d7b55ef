//! Limit value of random MDPs from the linear program, audited by the
//! stationary separation oracle and compared with long Cesàro horizons.
//!
//! cargo run --release --example limit_value

use beliefspace::dp::{limit_value_lp, max_invariant_payoff, superharmonic_completion, value_theta_mdp};
use beliefspace::{random, Evaluation};

fn main() -> beliefspace::Result<()> {
    let theta = Evaluation::cesaro(2000)?;
    for seed in 0..6 {
        let mut rng = random::seeded(seed);
        let mdp = random::finite_mdp(&mut rng, 4, 3);
        let (v_star, cert) = limit_value_lp(&mdp, 0)?;
        let v_n = value_theta_mdp(&mdp, &theta)[0];
        let separation = max_invariant_payoff(&mdp, &cert.w)?;
        let farkas = superharmonic_completion(&mdp, &cert.w)?.is_some();
        println!(
            "seed {seed}: v* = {v_star:.6}  v_2000 = {v_n:.6}  residual = {:.1e}  separation = {separation:.1e}  h exists: {farkas}",
            cert.residual(&mdp)
        );
    }
    Ok(())
}
