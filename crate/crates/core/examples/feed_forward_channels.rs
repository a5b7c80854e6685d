// Process matrices of the three operating modes: bare measurement, fixed
// filter without feed-forward (a dephasing channel) and the full protocol.

use std::f64::consts::FRAC_PI_4;

use qrl::channels::{channel_fidelity, choi, fidelity_bounds, scenario_channel, FidelityBounds, Scenario};
use qrl::protocol::{InteractionSpec, PureQubit};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let coupling = InteractionSpec::ppbs_intensity(0.334)?;
    let g = PureQubit::from_angle(55f64.to_radians());
    let bound = fidelity_bounds();
    println!("measure-and-prepare bound: F_avg = {:.4}", bound.classical_average);

    for scenario in Scenario::ALL {
        let chi = choi(&scenario_channel(&coupling, &g, FRAC_PI_4, scenario)?);
        let f = channel_fidelity(&chi)?;
        let normalized = chi.normalized()?;
        println!(
            "scenario {scenario}: F = {f:.6}, F_avg = {:.6}, Tr chi = {:.6}",
            FidelityBounds::average_from_channel(f),
            chi.trace
        );
        for row in normalized.0 {
            let cells: Vec<String> = row.iter().map(|z| format!("{:+.4}{:+.4}i", z.re, z.im)).collect();
            println!("    [{}]", cells.join(", "));
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
