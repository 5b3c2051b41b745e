use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;
use pvtau::cli::{parse_complex, parse_rational};
use pvtau::conformal_blocks::{confluent1_series, Cb1Params};
use pvtau::connection::{cubic, labels_from_sigma_eta, sigma_eta_from_x, x_from_sigma_eta};
use pvtau::fredholm_det::log_tau_fredholm_normalized;
use pvtau::lambda_limit::{d1_closed_form, dk_coefficients, LambdaParams};
use pvtau::params::PVParams;
use pvtau::pv_ode::sigma_pv_residual;
use pvtau::scalar::wrap_log;
use pvtau::tau_expansions::TauSeries;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn theta() -> impl Strategy<Value = Complex64> {
    (-0.4..0.4f64, -0.05..0.05f64).prop_map(|(a, b)| c(a, b))
}

fn label() -> impl Strategy<Value = Complex64> {
    (-0.4..0.4f64, -0.08..0.08f64).prop_map(|(a, b)| c(a, b))
}

fn rational() -> impl Strategy<Value = BigRational> {
    (-5000i64..5000, 1i64..700).prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rationals_parse_back_exactly(x in rational()) {
        prop_assert_eq!(parse_rational(&x.to_string()), Some(x.clone()));
        let z = parse_complex(&x.to_string()).unwrap();
        prop_assert!((z.re - num_traits::ToPrimitive::to_f64(&x).unwrap()).abs() <= 1e-15 * z.re.abs());
    }

    #[test]
    fn decimal_literals_are_exact(n in -99999i64..99999, e in -6i32..6) {
        let text = format!("{n}e{e}");
        let want = if e >= 0 {
            BigRational::from_integer(BigInt::from(n) * BigInt::from(10).pow(e as u32))
        } else {
            BigRational::new(BigInt::from(n), BigInt::from(10).pow((-e) as u32))
        };
        prop_assert_eq!(parse_rational(&text), Some(want));
    }

    #[test]
    fn traces_lie_on_the_cubic(t0 in theta(), tt in theta(), ts in theta(), s in label(), e in label()) {
        let p = PVParams::new(t0, tt, ts);
        let r = labels_from_sigma_eta(s, e, &p);
        prop_assume!(r.is_ok());
        let (_, m) = r.unwrap();
        let scale = 1.0 + m.x_plus.norm() * m.x_minus.norm() * m.x_sigma.norm();
        prop_assert!(cubic(&m, &p).norm() < 1e-10 * scale);
    }

    #[test]
    fn monodromy_recovers_sigma(t0 in theta(), tt in theta(), ts in theta(), s in label(), e in label()) {
        let p = PVParams::new(t0, tt, ts);
        let r = x_from_sigma_eta(s, e, &p);
        prop_assume!(r.is_ok());
        let (xp, xm) = r.unwrap();
        let (s2, _) = sigma_eta_from_x(xp, xm, &p).unwrap();
        let dist = |d: Complex64| (d - d.re.round()).norm();
        prop_assert!(dist(s2 - s).min(dist(s2 + s)) < 1e-9, "{} vs {}", s2, s);
    }

    #[test]
    fn confluent_block_is_even_in_theta0(t0 in theta(), tt in theta(), ts in theta(), s in label()) {
        let one = c(1.0, 0.0);
        let block = |t0| confluent1_series(&Cb1Params { theta_star: ts, sigma: s, thetat: tt, theta0: t0, beta: one }, 4);
        let (a, b) = (block(t0), block(-t0));
        prop_assume!(a.is_ok() && b.is_ok());
        for (u, v) in a.unwrap().expanded_coeffs().iter().zip(&b.unwrap().expanded_coeffs()) {
            prop_assert!((u - v).norm() < 1e-9 * u.norm().max(1.0));
        }
    }

    #[test]
    fn first_dk_matches_closed_form(t0 in theta(), tt in theta(), ts in theta(), nu in label()) {
        let p = LambdaParams { thetat: tt, theta_star: ts, nu, theta0: t0, beta: c(1.0, 0.0) };
        let (d, want) = (dk_coefficients(&p, 2), d1_closed_form(&p));
        prop_assume!(d.is_ok() && want.is_ok());
        let (d, want) = (d.unwrap(), want.unwrap());
        prop_assert!((d[0] - 1.0).norm() < 1e-14);
        prop_assert!((d[1] - want).norm() < 1e-9 * want.norm().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn series_hamiltonian_solves_sigma_form(t0 in theta(), tt in theta(), ts in theta(), s in label(), e in label()) {
        let p = PVParams::new(t0, tt, ts);
        let series = TauSeries::zero(&p, s, e, 8, 6);
        prop_assume!(series.is_ok());
        let t = c(0.03, 0.01);
        let [h, hd, hdd] = series.unwrap().hamiltonian(t).unwrap();
        let scale = 1.0 + h.norm().powi(2) + hd.norm().powi(4);
        prop_assert!(sigma_pv_residual(&p, t, h, hd, hdd) < 1e-6 * scale);
    }

    #[test]
    fn normalized_fredholm_matches_series(t0 in theta(), tt in theta(), ts in theta(), s in label(), e in label()) {
        let p = PVParams::new(t0, tt, ts);
        let t = c(0.05, 0.0);
        let series = TauSeries::zero(&p, s, e, 8, 6).and_then(|x| x.log_value(t));
        let det = log_tau_fredholm_normalized(t, s, e, &p, 24);
        prop_assume!(series.is_ok() && det.is_ok());
        let (a, b) = (series.unwrap(), det.unwrap());
        prop_assert!(wrap_log(a - b).norm() < 1e-6, "{} vs {}", a, b);
    }
}
