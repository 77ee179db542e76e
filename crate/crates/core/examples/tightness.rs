// How close do the functions come to their envelopes?

use qineq::verify::{tightness_search, AuditTarget};
use qineq::QBase;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for qv in [0.1, 0.5, 0.9] {
        let t = tightness_search(&AuditTarget::Aq(QBase::new(qv)?), (1e-3, 1e3), 200, 1e-14)?;
        println!(
            "A_q, q={qv}: best ratio {:.6} at |z| = {:.4}, angle {:.4} ({} evaluations)",
            t.best_ratio, t.best_abs_z, t.best_angle, t.evaluations
        );
    }
    let theta = AuditTarget::Theta { q: QBase::new(0.3)?, alpha: 0.5 };
    let t = tightness_search(&theta, (1e-2, 1e2), 200, 1e-14)?;
    println!("theta, q=0.3: best ratio {:.3e} at |z| = {:.4}", t.best_ratio, t.best_abs_z);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
