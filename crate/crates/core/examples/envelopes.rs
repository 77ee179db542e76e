// Growth envelopes for entire and Laurent-class q-series.

use qineq::bounds::{
    envelope_aq_exponential, envelope_aq_gaussian, envelope_entire, envelope_phi, envelope_theta,
    envelope_theta_as_printed, meromorphic_bound_params, term_peak,
};
use qineq::series::{ConfluentParams, PhiParams};
use qineq::{Complex64, QBase};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let q = QBase::new(0.5)?;

    let g = envelope_aq_gaussian(q, 1.0)?;
    println!("A_q Gaussian envelope at |z|=1: {:.12}", g.bound.unwrap_or(f64::INFINITY));
    println!("A_q exponential envelope at |z|=1: {:.12}", envelope_aq_exponential(q, 1.0)?.bound.unwrap());

    // Past exp(709) only the logarithm is representable.
    let far = envelope_aq_gaussian(q, 1e200)?;
    println!("ln envelope at |z|=1e200: {:.3} (linear: {:?})", far.log_bound, far.bound);

    let p = ConfluentParams::new(vec![Complex64::new(0.0, 0.3)], vec![0.2], 0.5, QBase::new(0.7)?)?;
    let e = envelope_entire(&p, 5.0)?;
    println!(
        "confluent f, |z|=5: ln c {:.4} + prefactor {:.4} + exponent {:.4} = {:.4}",
        e.constant_c.ln(),
        e.prefactor_log,
        e.exponent_term,
        e.log_bound
    );
    println!("term peak at |z|=4, l=1: {:.6}", term_peak(4.0, 1.0, q)?);

    let phi = PhiParams::new(vec![], vec![0.0], q)?;
    println!("1phi1-type envelope at |z|=2: {:.6}", envelope_phi(&phi, 2.0)?.log_bound);

    let m = meromorphic_bound_params(0.5, QBase::new(0.3)?)?;
    println!("alpha=0.5, q=0.3: beta {:.6}, gamma {}", m.beta, m.gamma);
    for r in [0.01, 1.0, 100.0] {
        println!(
            "theta envelope |z|={r}: ln {:.4}  (as printed: ln {:.4})",
            envelope_theta(0.5, QBase::new(0.3)?, r)?.log_bound,
            envelope_theta_as_printed(0.5, QBase::new(0.3)?, r)?.log_bound
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
