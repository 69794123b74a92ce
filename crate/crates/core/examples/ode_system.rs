//! Closed-form solution (u, s) of the ODE pair and its residuals.

use l2lab::odekit::{solve_gz, verify_gz_residuals};
use l2lab::weightlab::WeightFunction;

fn main() -> l2lab::Result<()> {
    let c = WeightFunction::exp_rate(0.0, 0.5);
    let sol = solve_gz(&c)?;
    println!("{:>6} {:>12} {:>12}", "t", "u", "s");
    for t in [0.1, 0.5, 1.0, 2.0, 5.0] {
        println!("{t:>6.2} {:>12.8} {:>12.8}", sol.u(t)?, sol.s(t)?);
    }
    let grid: Vec<f64> = (1..=100).map(|i| 0.1 * f64::from(i)).collect();
    let rep = verify_gz_residuals(&sol, &grid)?;
    println!(
        "max residuals {:.2e} {:.2e}, min u''s - s'' = {:.3e}",
        rep.max_res1, rep.max_res2, rep.min_positivity
    );
    Ok(())
}
