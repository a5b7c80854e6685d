// Derives the heralded PPBS operator by propagating Fock states and
// compares it with the closed form.

use qrl::imperfections::{
    fock_oracle, oracle_deviation, oracle_grid, ppbs_postselected, PpbsPhysical, ReflectionConvention,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let worst = oracle_grid()
        .iter()
        .map(|p| oracle_deviation(p, ReflectionConvention::Standard))
        .fold(0.0, f64::max);
    println!("max deviation over {} devices: {worst:.1e}", oracle_grid().len());

    let device = PpbsPhysical::from_intensities(0.983, 0.334)?;
    let oracle = fock_oracle(&device);
    println!("T_H = 0.983, T_V = 0.334:");
    for row in oracle.0 {
        let cells: Vec<String> = row.iter().map(|z| format!("{:+.6}", z.re)).collect();
        println!("    [{}]", cells.join(", "));
    }
    let post = ppbs_postselected(&device);
    println!("largest singular value {:.6}, diagonal form: {}", post.scale, post.as_interaction().is_some());

    let flipped = oracle_deviation(&device, ReflectionConvention::Flipped);
    println!("with the wrong reflection sign the deviation is {flipped:.3}");
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
