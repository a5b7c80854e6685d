// Simulated process tomography of the full protocol: exact probabilities,
// sampled counts, linear inversion and maximum likelihood.

use std::f64::consts::FRAC_PI_4;

use qrl::channels::{choi, scenario_channel, Scenario};
use qrl::protocol::{InteractionSpec, PureQubit};
use qrl::tomography::{
    compare, exact_probabilities, reconstruct_linear, reconstruct_mle, sample_counts, Basis, Detection,
    Observations, ProbeSet,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let coupling = InteractionSpec::ppbs_intensity(0.334)?;
    let map = scenario_channel(&coupling, &PureQubit::from_angle(55f64.to_radians()), FRAC_PI_4, Scenario::FULL)?;
    let truth = choi(&map);
    let probs = exact_probabilities(&map, &ProbeSet::pauli_six(), &Basis::ALL);

    let exact = reconstruct_linear(&Observations::from_probabilities(&probs, Detection::LossAware))?;
    println!("infinite statistics: trace distance {:.1e}", compare(&exact.chi_hat, &truth)?.trace_distance);

    for shots in [1_000, 10_000, 100_000] {
        let counts = sample_counts(&probs, shots, 7)?;
        let obs = Observations::from_counts(&counts, Detection::LossAware);
        let lin = compare(&reconstruct_linear(&obs)?.chi_hat, &truth)?;
        let mle = reconstruct_mle(&obs, 5000, 1e-10)?;
        let ml = compare(&mle.chi_hat, &truth)?;
        println!(
            "{shots:>7} shots: linear F = {:.5}, MLE F = {:.5} ({} iterations), Tr chi = {:.4} vs {:.4}",
            lin.fidelity,
            ml.fidelity,
            mle.diagnostics.iterations,
            mle.chi_hat.trace,
            truth.trace
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
