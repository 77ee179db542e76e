// A user-supplied Laurent series about a shifted center, with its envelope.

use std::sync::Arc;

use qineq::bounds::{envelope_meromorphic, meromorphic_bound_params};
use qineq::series::{eval_laurent, CoefficientFn, LaurentSpec, DEFAULT_K_CAP};
use qineq::{Complex64, QBase};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let q = QBase::new(0.4)?;
    let alpha = 0.5;
    let center = Complex64::new(1.0, -1.0);

    // a_k = q^{k^2} / (1 + k^2): decays fast enough for any alpha < 1.
    let qv = q.value();
    let coeff: CoefficientFn =
        Arc::new(move |k: i64| Complex64::new(qv.powf((k * k) as f64) / (1.0 + (k * k) as f64), 0.0));
    let spec = LaurentSpec::with_computed_weight(center, coeff, alpha, q, DEFAULT_K_CAP)?;
    println!("weighted constant c = {:.6}", spec.c_weighted);

    let params = meromorphic_bound_params(alpha, q)?;
    for dist in [0.05, 0.5, 2.0, 20.0] {
        let z = center + Complex64::from_polar(dist, 0.7);
        let v = eval_laurent(&spec, z, 1e-14)?;
        let env = envelope_meromorphic(&params, spec.c_weighted, dist)?;
        println!(
            "|z - center| = {dist:>5}: |value| {:.4e}  envelope {:.4e}  ratio {:.3e}",
            v.abs(),
            env.log_bound.exp(),
            (v.log_abs() - env.log_bound).exp()
        );
    }

    match eval_laurent(&spec, center, 1e-14) {
        Err(e) => println!("at the center: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
