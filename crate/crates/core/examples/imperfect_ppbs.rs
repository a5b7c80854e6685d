// Fidelity of the full protocol through a PPBS that also reflects some
// horizontal light, with filters designed for the ideal device.

use std::f64::consts::FRAC_PI_4;

use qrl::channels::{channel_fidelity, choi, Scenario};
use qrl::imperfections::{imperfect_transfer_channel, DistinguishabilityModel, PpbsPhysical};
use qrl::protocol::PureQubit;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let device = PpbsPhysical::from_intensities(0.983, 0.334)?;
    println!("{:>6} {:>10} {:>10} {:>10}", "omega", "v = 1", "v = 0.9", "success");
    for deg in (1..=17).map(|i| 5.0 * f64::from(i)) {
        let g = PureQubit::from_angle(f64::to_radians(deg));
        let mut row = Vec::new();
        let mut success = 0.0;
        for v in [1.0, 0.9] {
            let model = DistinguishabilityModel::new(v)?;
            let chi = choi(&imperfect_transfer_channel(&device, &model, &g, FRAC_PI_4, Scenario::FULL)?);
            row.push(channel_fidelity(&chi)?);
            success = chi.trace;
        }
        println!("{deg:>6} {:>10.6} {:>10.6} {success:>10.6}", row[0], row[1]);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
