// The filter-free variant: special angles make the conditional states
// orthogonal and equally long, so a unitary replaces the filter.

use qrl::channels::{channel_fidelity, choi, scenario_channel, Scenario};
use qrl::optimize::maximize_omega;
use qrl::protocol::{
    check_ortho_conditions, conditional_states, simplified_settings, simplified_success, InteractionSpec,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for tv2 in [0.1, 0.334, 0.45] {
        let tv = f64::sqrt(tv2);
        let angles = simplified_settings(tv)?;
        let coupling = InteractionSpec::ppbs(tv)?;
        let pair = conditional_states(&coupling, &angles.target(), &angles.measurement());
        let unfiltered = simplified_success(tv)?;
        let optimal = maximize_omega(tv, std::f64::consts::FRAC_PI_4)?.best_p;
        println!(
            "T_V = {tv2}: omega = kappa = {:.4} deg, orthogonal = {}, p_tilde = {unfiltered:.6}, p = {optimal:.6}",
            angles.omega.to_degrees(),
            check_ortho_conditions(&pair, 1e-12),
        );
        let f = channel_fidelity(&choi(&scenario_channel(&coupling, &angles.target(), angles.kappa, Scenario::FULL)?))?;
        println!("    full-protocol fidelity at these angles: {f:.12}");
    }
    match simplified_settings(0.6f64.sqrt()) {
        Err(e) => println!("T_V = 0.6: {e}"),
        Ok(_) => unreachable!("weak coupling admits no filter-free setting"),
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
