// Evaluating the confluent class, a basic hypergeometric series, A_q and theta.

use qineq::series::{
    eval_confluent_f, eval_phi, eval_ramanujan_aq, eval_theta, phi_to_f, ConfluentParams, PhiParams,
};
use qineq::{Complex64, QBase};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let q = QBase::new(0.5)?;
    let tol = 1e-14;

    let aq = eval_ramanujan_aq(q, Complex64::new(1.0, 0.0), tol)?;
    println!(
        "A_q(1)      = {:.15}  terms {} tail {:.1e}",
        aq.to_complex().re,
        aq.terms_used,
        aq.tail_bound_abs()
    );

    let theta = eval_theta(q, Complex64::new(-1.0, 0.0), tol)?;
    println!("Theta(-1|q) = {:.15}", theta.to_complex().re);

    let p = ConfluentParams::new(vec![Complex64::new(0.3, 1.0)], vec![0.4], 1.5, QBase::new(0.7)?)?;
    let f = eval_confluent_f(&p, Complex64::new(2.0, -1.0), tol)?;
    println!("f(2-i)      = {}", f.to_complex());

    // Huge arguments stay finite: the value is mantissa * 2^exp2_scale.
    let big = eval_ramanujan_aq(q, Complex64::new(-1e200, 0.0), tol)?;
    println!("ln|A_q(-1e200)| = {:.6}  (2^{} scale)", big.log_abs(), big.exp2_scale);

    let phi = PhiParams::new(vec![Complex64::new(0.5, 0.0)], vec![0.0], q)?;
    let w = Complex64::new(0.3, 0.0);
    let (as_f, map) = phi_to_f(&phi);
    let direct = eval_phi(&phi, w, tol)?.to_complex();
    let reduced = eval_confluent_f(&as_f, map.apply(w), tol)?.to_complex();
    println!("phi(0.3) = {direct}, through f: {reduced}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
