// q-shifted factorials, finite and infinite, and Gaussian binomials.

use qineq::qcore::{multishifted, pochhammer_finite, pochhammer_infinite, q_binomial, Order};
use qineq::{Complex64, QBase};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let q = QBase::new(0.5)?;
    let a = Complex64::new(0.5, 0.0);

    let two = pochhammer_finite(a, q, 2);
    println!("(0.5;0.5)_2   = {}", two.value.re);

    let inf = pochhammer_infinite(a, q, 1e-14)?;
    println!(
        "(0.5;0.5)_inf = {:.15} ({} factors, |log error| <= {:.1e})",
        inf.value.re, inf.factors_used, inf.tail_log_bound
    );

    let pair = multishifted(&[a, a], q, Order::Finite(2), 1e-14)?;
    println!("(0.5,0.5;0.5)_2 = {}", pair.value.re);

    println!("[4 choose 2]_0.5 = {}", q_binomial(4, 2, q)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
