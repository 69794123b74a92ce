//! Piecewise cutoff v, its smoothed version v_eps, and the regularized maximum.

use l2lab::odekit::{make_cutoff, make_max_smoother, make_smoothed_cutoff, max_smoother_constant};

fn main() -> l2lab::Result<()> {
    let (t0, width, eps) = (0.5, 1.0, 0.1);
    let v = make_cutoff(t0, width)?;
    let ve = make_smoothed_cutoff(t0, width, eps)?;
    println!("{:>6} {:>8} {:>10} {:>10} {:>10}", "t", "b", "v", "v_eps", "v_eps''");
    for i in 0..=12 {
        let t = -2.5 + 0.25 * f64::from(i);
        println!("{t:>6.2} {:>8.4} {:>10.6} {:>10.6} {:>10.6}", v.b(t), v.v(t), ve.value(t), ve.second(t));
    }

    let m = make_max_smoother(0.5)?;
    println!("\nM_eps with eps = 0.5, |M - max| <= {:.4} eps", max_smoother_constant());
    for (x, y) in [(0.0, 0.0), (0.3, 0.0), (1.0, 0.0), (0.0, -2.0)] {
        println!("M({x}, {y}) = {:.8}", m.eval(x, y));
    }
    Ok(())
}
