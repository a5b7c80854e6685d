// Transfers an unknown qubit through the ideal PPBS coupling and checks
// that both heralded branches act as the identity.

use std::f64::consts::FRAC_PI_4;

use qrl::channels::{apply, channel_fidelity, scenario_channel, Scenario};
use qrl::error::Branch;
use qrl::protocol::{branch_operator, feed_forward_plan, InteractionSpec, PureQubit};
use qrl::qmath::{Complex2Matrix, C64};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let coupling = InteractionSpec::ppbs_intensity(0.334)?;
    let g = PureQubit::from_angle(55f64.to_radians());
    let plan = feed_forward_plan(&coupling, &g, FRAC_PI_4)?;

    let pi_plus = PureQubit::from_angle(FRAC_PI_4);
    for (branch, pi) in [(Branch::Plus, pi_plus), (Branch::Minus, pi_plus.perp())] {
        let filter = plan.filter(branch).ok_or("missing filter")?;
        let k = branch_operator(&coupling, &g, &pi, filter);
        let deviation = k.max_abs_diff(&Complex2Matrix::identity().scale((1.0 / filter.n).into()));
        println!("branch {branch}: N = {:.6}, success = {:.6}, |K - I/N| = {deviation:.1e}", filter.n, filter.success);
    }
    println!("total success p = {:.9}", plan.total_success);

    let map = scenario_channel(&coupling, &g, FRAC_PI_4, Scenario::FULL)?;
    let psi = PureQubit::new(C64::new(0.6, 0.0), C64::new(0.0, 0.8))?;
    let rho = psi.vector().outer(psi.vector());
    let (out, p) = apply(&map, &rho)?;
    let normalized = out.scale((1.0 / p).into());
    println!("input |psi> heralded with p = {p:.6}, output deviation {:.1e}", normalized.max_abs_diff(&rho));
    println!("channel fidelity = {:.12}", channel_fidelity(&qrl::channels::choi(&map))?);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
