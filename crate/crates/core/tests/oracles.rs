//! Library results against naive direct summation and against values
//! computed independently at 40 significant digits.

mod common;

use std::f64::consts::TAU;

use common::{aq_terms, c, confluent_terms, phi_terms, poch, poch_real, sum, theta_terms, Lcg};
use qineq::bounds::*;
use qineq::qcore::*;
use qineq::series::*;
use qineq::{Complex64, QBase};

const TOL: f64 = 1e-14;

fn q(v: f64) -> QBase {
    QBase::new(v).unwrap()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

fn circle(radius: f64, n: usize) -> impl Iterator<Item = Complex64> {
    (0..n).map(move |j| Complex64::from_polar(radius, TAU * (j as f64 + 0.5) / n as f64))
}

#[test]
fn pochhammer_matches_factor_products() {
    for &(a, qv) in &[(c(0.5, 0.0), 0.5), (c(-1.3, 0.4), 0.8), (c(0.2, 2.0), 0.1)] {
        for n in [0, 1, 2, 7, 40] {
            let v = pochhammer_finite(a, q(qv), n);
            assert!(rel(v.value, poch(a, qv, n)) < 1e-13 || n == 0 && v.value == c(1.0, 0.0));
        }
    }
    assert_eq!(pochhammer_finite(c(0.5, 0.0), q(0.5), 2).value, c(0.375, 0.0));
}

#[test]
fn infinite_products_match_high_precision() {
    // (a;q)_inf at 40 digits.
    let cases = [
        (0.5, 0.5, 0.288_788_095_086_602_4),
        (0.5, 0.9, 0.002_790_546_567_171_093),
        (-0.5, 0.5, 2.384_231_029_031_372),
    ];
    for (a, qv, want) in cases {
        let v = pochhammer_infinite(c(a, 0.0), q(qv), 1e-16).unwrap();
        assert!((v.value.re - want).abs() <= 1e-13 * want, "a={a} q={qv}: {}", v.value.re);
        let long = poch_real(a, qv, 4000);
        assert!((v.value.re - long).abs() <= v.tail_log_bound.exp_m1() * long.abs() + 1e-13 * want);
    }
}

#[test]
fn gaussian_binomial_polynomial() {
    let qv = 0.5;
    assert!((q_binomial(4, 2, q(qv)).unwrap() - (1.0 + qv + 2.0 * qv * qv + qv.powi(3) + qv.powi(4))).abs() < 1e-15);
    for n in 0..25 {
        for k in 0..=n {
            let direct = poch_real(qv, qv, n) / (poch_real(qv, qv, k) * poch_real(qv, qv, n - k));
            assert!((q_binomial(n, k, q(qv)).unwrap() - direct).abs() <= 1e-12 * direct);
        }
    }
}

#[test]
fn confluent_examples() {
    let p = ConfluentParams::ramanujan(q(0.5));
    let v = eval_confluent_f(&p, c(-1.0, 0.0), TOL).unwrap();
    assert!((v.to_complex().re - 0.160_763_788_932_088_9).abs() < 1e-14);
    let o = sum(&confluent_terms(&[], &[], 1.0, 0.5, c(-1.0, 0.0), 20));
    assert!(rel(v.to_complex(), o) < 1e-13);
    let v = eval_confluent_f(&p, c(1.0, 0.0), TOL).unwrap();
    assert!((v.to_complex().re - 2.172_668_750_849_664).abs() < 1e-14);
}

#[test]
fn confluent_matches_double_depth_oracle() {
    let a = [c(0.3, 1.0), c(-1.5, 0.0)];
    let b = [0.4];
    let p = ConfluentParams::new(a.to_vec(), b.to_vec(), 1.5, q(0.7)).unwrap();
    for z in circle(3.0, 12) {
        let v = eval_confluent_f(&p, z, TOL).unwrap();
        let o = sum(&confluent_terms(&a, &b, 1.5, 0.7, z, 2 * v.terms_used));
        assert!(rel(v.to_complex(), o) < 1e-12);
    }
}

#[test]
fn phi_example_against_thirty_terms() {
    let a = [c(0.5, 0.0)];
    let b = [0.0];
    let p = PhiParams::new(a.to_vec(), b.to_vec(), q(0.5)).unwrap();
    let z = c(0.3, 0.0);
    let v = eval_phi(&p, z, TOL).unwrap();
    let o = sum(&phi_terms(&a, &b, 0.5, z, 30));
    assert!(v.to_complex().re.is_finite());
    assert!(rel(v.to_complex(), o) < 1e-14);
}

#[test]
fn phi_reduction_at_excess_one() {
    let p = PhiParams::new(vec![], vec![0.3], q(0.5)).unwrap();
    let (f, map) = phi_to_f(&p);
    assert_eq!(f.l, 1.0);
    let w = c(0.7, 0.1);
    let lhs = sum(&phi_terms(&[], &[0.3], 0.5, w, 60));
    let rhs = sum(&confluent_terms(&f.a_list, &f.b_list, f.l, 0.5, map.apply(w), 60));
    assert!(rel(lhs, rhs) < 1e-12);
    let v = eval_confluent_f(&f, map.apply(w), TOL).unwrap();
    assert!(rel(v.to_complex(), lhs) < 1e-12);
}

#[test]
fn aq_examples() {
    let v = eval_ramanujan_aq(q(0.5), c(1.0, 0.0), TOL).unwrap();
    let o = sum(&aq_terms(0.5, c(1.0, 0.0), 20));
    assert!(rel(v.to_complex(), o) < 1e-14);
    assert!((v.to_complex().re - 0.160_764).abs() < 1e-6);
    let v = eval_ramanujan_aq(q(0.5), c(-1.0, 0.0), TOL).unwrap();
    assert!((v.to_complex().re - 2.172_67).abs() < 1e-5);
}

#[test]
fn theta_examples() {
    let v = eval_theta(q(0.5), c(1.0, 0.0), TOL).unwrap();
    assert!((v.to_complex().re - sum(&theta_terms(0.5, c(1.0, 0.0), 12)).re).abs() < 1e-14);
    assert!((v.to_complex().re - 2.128_936_827_211_877).abs() < 1e-14);
    let v = eval_theta(q(0.5), c(-1.0, 0.0), TOL).unwrap();
    assert!((v.to_complex().re - 0.121_124_208_002_580_5).abs() < 1e-14);
}

#[test]
fn constant_of_single_denominator() {
    let p = ConfluentParams::new(vec![], vec![0.5], 1.0, q(0.5)).unwrap();
    let want = 1.0 / 0.288_788_095_086_602_4;
    let got = constant_c(&p).unwrap();
    assert!(got >= want * (1.0 - 1e-15) && got <= want * (1.0 + 1e-12), "{got}");
}

#[test]
fn term_peak_examples() {
    for &(abs_z, l, qv) in &[(4.0, 1.0, 0.5), (0.01, 2.0, 0.9)] {
        let peak = term_peak(abs_z, l, q(qv)).unwrap();
        let best = (0..=60)
            .map(|k| {
                let k = k as f64;
                k * (l * (k - 1.0) * f64::ln(qv) + f64::ln(abs_z))
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(best <= peak + 1e-12);
        if abs_z > 1.0 {
            assert!(peak - best < 1.0, "peak should be close to the integer maximum");
        }
    }
}

#[test]
fn entire_envelope_value_and_domination() {
    // 2^{1/4} / (0.5;0.5)_inf, at 40 digits.
    let env = envelope_entire(&ConfluentParams::ramanujan(q(0.5)), 1.0).unwrap();
    assert!((env.bound.unwrap() - 4.117_922_917_307_581).abs() < 1e-12);
    assert!(env.bound.unwrap() > 2.172_668_750_849_664);

    let a = [c(0.0, 0.3)];
    let b = [0.2];
    let p = ConfluentParams::new(a.to_vec(), b.to_vec(), 0.5, q(0.7)).unwrap();
    let env = envelope_entire(&p, 5.0).unwrap();
    for z in circle(5.0, 16) {
        let o = sum(&confluent_terms(&a, &b, 0.5, 0.7, z, 400));
        assert!(o.norm().ln() <= env.log_bound);
    }
}

#[test]
fn phi_envelope_routes_and_domination() {
    let p = PhiParams::new(vec![c(0.4, -0.2)], vec![0.3, 0.8], q(0.6)).unwrap();
    let x = envelope_phi(&p, 3.0).unwrap().log_bound;
    let y = envelope_phi_closed_form(&p, 3.0).unwrap().log_bound;
    assert!((x - y).abs().exp_m1() < 1e-13);

    let p = PhiParams::new(vec![], vec![0.0], q(0.5)).unwrap();
    let env = envelope_phi(&p, 2.0).unwrap();
    for z in circle(2.0, 32) {
        let o = sum(&phi_terms(&[], &[0.0], 0.5, z, 200));
        assert!(o.norm().ln() <= env.log_bound);
    }
}

#[test]
fn aq_envelopes_dominate() {
    let g = envelope_aq_gaussian(q(0.5), 1.0).unwrap();
    let e = envelope_entire(&ConfluentParams::ramanujan(q(0.5)), 1.0).unwrap();
    assert_eq!(g.log_bound, e.log_bound);

    let mut rng = Lcg(11);
    for _ in 0..100 {
        let z = Complex64::from_polar(rng.log_uniform(1e-4, 1e4), rng.uniform(0.0, TAU));
        let v = eval_ramanujan_aq(q(0.3), z, TOL).unwrap();
        assert!(v.log_abs() <= envelope_aq_gaussian(q(0.3), z.norm()).unwrap().log_bound);
    }
    for _ in 0..100 {
        let z = rng.disk(50.0);
        let v = eval_ramanujan_aq(q(0.5), z, TOL).unwrap();
        assert!(v.log_abs() <= envelope_aq_exponential(q(0.5), z.norm()).unwrap().log_bound);
    }
}

#[test]
fn exponent_parameters_maximize_the_term_profile() {
    // beta |L|^gamma is the supremum over real t > 0 of t L - lambda t^{alpha+1}.
    for &(alpha, qv) in &[(0.5, 0.5), (0.25, 0.9), (2.0, 0.1)] {
        let p = meromorphic_bound_params(alpha, q(qv)).unwrap();
        assert!((p.gamma - (1.0 + 1.0 / alpha)).abs() < 1e-15);
        let lambda = -f64::ln(qv);
        for l in [0.5, 3.0, 20.0] {
            let f = |t: f64| t * l - lambda * t.powf(alpha + 1.0);
            let t_star = (l / (lambda * (alpha + 1.0))).powf(1.0 / alpha);
            let bound = p.beta * l.powf(p.gamma);
            assert!((f(t_star) - bound).abs() <= 1e-12 * bound);
            for s in [0.5, 0.9, 1.1, 2.0] {
                assert!(f(t_star * s) <= bound);
            }
        }
    }
}

#[test]
fn meromorphic_terms_are_dominated() {
    let mut rng = Lcg(12);
    for _ in 0..100 {
        let alpha = rng.uniform(0.1, 3.0);
        let qv = rng.uniform(0.05, 0.95);
        let dist = rng.log_uniform(1e-4, 1e4);
        let p = meromorphic_bound_params(alpha, q(qv)).unwrap();
        let bound = envelope_meromorphic(&p, 1.0, dist).unwrap().log_bound;
        for k in -40i32..=40 {
            let k = k as f64;
            assert!(k.abs().powf(alpha + 1.0) * qv.ln() + k * dist.ln() <= bound + 1e-12);
        }
    }
}

#[test]
fn weighted_theta_constant() {
    let direct: f64 = (-200i64..=200)
        .map(|k| 0.5f64.powf((k * k) as f64 - (k.abs() as f64).powf(1.5)))
        .sum();
    let got = theta_weighted_constant(0.5, q(0.5), 1e-14).unwrap();
    assert!(got >= direct * (1.0 - 1e-15) && got <= direct * (1.0 + 1e-13));
    assert!((got - 4.039_030_627).abs() < 1e-8);
    assert!(theta_weighted_constant(0.75, q(0.5), 1e-14).unwrap() >= theta_weighted_constant(0.25, q(0.5), 1e-14).unwrap());
}

#[test]
fn theta_envelope_dominates() {
    let env = envelope_theta(0.5, q(0.5), 1.0).unwrap();
    assert_eq!(env.log_bound, theta_weighted_constant(0.5, q(0.5), 1e-17).unwrap().ln());
    assert!(env.bound.unwrap() > 2.128_936);
    for r in [0.01, 0.1, 10.0, 100.0] {
        let env = envelope_theta(0.5, q(0.3), r).unwrap();
        for z in circle(r, 16) {
            let o = sum(&theta_terms(0.3, z, 60));
            assert!(o.norm().ln() <= env.log_bound);
        }
    }
}

#[test]
fn laurent_theta_stream_matches_theta() {
    let spec = LaurentSpec::theta(q(0.4), 0.5).unwrap();
    for z in circle(0.7, 8).chain(circle(6.0, 8)) {
        let l = eval_laurent(&spec, z, TOL).unwrap();
        let o = sum(&theta_terms(0.4, z, 40));
        assert!(rel(l.to_complex(), o) < 1e-12);
    }
}

#[test]
fn laurent_shifted_center() {
    let center = c(1.0, -2.0);
    let spec = LaurentSpec::new(
        center,
        std::sync::Arc::new(|k: i64| Complex64::new(0.5f64.powi((k * k) as i32), 0.0)),
        0.5,
        q(0.5),
        theta_weighted_constant(0.5, q(0.5), 1e-17).unwrap(),
        10_000,
    )
    .unwrap();
    let w = c(0.3, 1.1);
    let l = eval_laurent(&spec, center + w, TOL).unwrap();
    let o = sum(&theta_terms(0.5, w, 40));
    assert!(rel(l.to_complex(), o) < 1e-13);
}
