// Searches the preparation and measurement angles that maximize the
// success probability, then sweeps the coupling strength.

use std::f64::consts::FRAC_PI_4;

use qrl::optimize::{maximize_kappa, maximize_omega, sweep_tv};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tv = 0.334f64.sqrt();
    let omega = maximize_omega(tv, FRAC_PI_4)?;
    println!(
        "T_V = 0.334: omega* = {:.3} deg, p* = {:.9}",
        omega.best_omega.to_degrees(),
        omega.best_p
    );
    let kappa = maximize_kappa(tv, omega.best_omega)?;
    println!("at omega*: kappa* = {:.3} deg", kappa.best_kappa.to_degrees());

    let grid: Vec<f64> = (1..10).map(|i| f64::from(i) / 10.0).collect();
    println!("{:>6} {:>12} {:>10} {:>10}", "T_V", "p_optimal", "omega*", "p_tilde");
    for s in sweep_tv(&grid).samples {
        println!(
            "{:>6.2} {:>12.6} {:>10.3} {:>10}",
            s.tv_squared,
            s.p.unwrap_or(f64::NAN),
            s.omega_star.map_or(f64::NAN, f64::to_degrees),
            s.p_tilde.map_or("-".to_string(), |p| format!("{p:.6}"))
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
