// Residuals of classical product/sum identities.

use qineq::verify::{identity_euler, identity_ql_sum, identity_qbinomial_theorem, identity_theta_triple_product};
use qineq::{Complex64, QBase};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tol = 1e-16;
    let c = Complex64::new;
    println!("Euler, q=0.9, z=-0.8:           {:.2e}", identity_euler(QBase::new(0.9)?, c(-0.8, 0.0), tol)?);
    println!(
        "q-binomial, a=q, q=0.5, z=0.3:  {:.2e}",
        identity_qbinomial_theorem(c(0.5, 0.0), QBase::new(0.5)?, c(0.3, 0.0), tol)?
    );
    println!("q^l sum, l=0.5, q=0.9:          {:.2e}", identity_ql_sum(0.5, QBase::new(0.9)?, tol)?);
    println!(
        "triple product, q=0.3, z=2+i:   {:.2e}",
        identity_theta_triple_product(QBase::new(0.3)?, c(2.0, 1.0), tol)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
