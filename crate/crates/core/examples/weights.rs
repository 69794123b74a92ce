//! Class membership and the g transform for the built-in weight families.

use l2lab::weightlab::{check_class_c, check_class_p, GTransform, WeightFunction};

fn main() -> l2lab::Result<()> {
    let grid: Vec<f64> = (1..=64).map(|i| 0.25 * f64::from(i)).collect();
    let weights = [
        ("c = 1", WeightFunction::constant(0.0)),
        ("c = e^(t/2)", WeightFunction::exp_rate(0.0, 0.5)),
        ("c = 1/(1+t^2)", WeightFunction::rational(0.0, vec![1.0], vec![1.0, 0.0, 1.0])),
        ("c = e^(2t)", WeightFunction::exp_rate(0.0, 2.0)),
    ];
    for (name, c) in weights {
        let p = check_class_p(&c, &grid, 1e-2)?;
        let cc = match check_class_c(&c, &grid) {
            Ok(r) => r.in_class.to_string(),
            Err(_) => "-".into(),
        };
        print!("{name:<14} P_T: {:<5} C_T: {cc:<5}", p.in_class);
        match GTransform::new(&c) {
            Ok(g) => {
                let r = 0.5 * g.total();
                println!(" g(T) = {:.6}  g^-1(g(T)/2) = {:.6}", g.total(), g.inverse(r)?);
            }
            Err(e) => println!(" ({e})"),
        }
    }
    Ok(())
}
