//! The 50-point grid on which every bound calculator is checked against the
//! extended-precision re-evaluation.

use comma_ea::theory::{self, CommaLowerParams, CommaUpperParams, LevelBasedParams};

use super::bigfloat::{self as big, rel_err, Big};

pub struct Case {
    pub id: String,
    pub got: f64,
    pub rel_err: String,
    pub ok: bool,
}

fn case(id: String, got: f64, want: Big) -> Case {
    let (ok, rel_err) = if want.0.is_zero() {
        (got == 0.0, if got == 0.0 { "0".into() } else { "inf".into() })
    } else {
        rel_err(got, &want)
    };
    Case { id, got, rel_err, ok }
}

pub fn run() -> Vec<Case> {
    let mut out = Vec::new();
    for (n, k) in [
        (10, 2),
        (20, 2),
        (50, 2),
        (50, 3),
        (100, 5),
        (30, 30),
        (200, 3),
        (12, 6),
        (1000, 4),
        (40, 10),
    ] {
        let got = theory::p_k(n, k).unwrap().value;
        out.push(case(format!("p_k n={n} k={k}"), got, big::p_k(n, k)));
    }
    let c = 0.1;
    for (n, k, mu, lambda) in [
        (200, 3, 50, 200),
        (100, 50, 50, 100),
        (50, 2, 5, 60),
        (30, 2, 10, 40),
        (30, 3, 20, 80),
        (50, 3, 10, 40),
        (50, 2, 20, 80),
        (100, 10, 25, 100),
        (1000, 5, 100, 400),
        (400, 4, 50, 300),
    ] {
        let got = theory::comma_ea_lower_bound(CommaLowerParams {
            n,
            k,
            mu,
            lambda,
            c,
            big_c: theory::minimal_big_c(c),
        })
        .unwrap()
        .value;
        out.push(case(
            format!("comma_lower n={n} k={k} mu={mu} lambda={lambda}"),
            got,
            big::comma_lower(n, k, mu, lambda, c),
        ));
    }
    for (n, k, lambda, delta) in [
        (50, 2, 60, 0.5),
        (100, 5, 100, 0.5),
        (50, 2, 100, 0.5),
        (30, 3, 80, 0.3),
        (100, 2, 500, 0.9),
        (200, 4, 1000, 0.5),
        (20, 2, 40, 0.5),
        (64, 3, 200, 0.25),
        (80, 5, 300, 0.7),
        (150, 3, 120, 0.5),
    ] {
        let got = theory::comma_ea_upper_bound(CommaUpperParams {
            n,
            k,
            mu: 1,
            lambda,
            delta,
            big_k: None,
        })
        .unwrap()
        .value;
        out.push(case(
            format!("comma_upper n={n} k={k} lambda={lambda} delta={delta}"),
            got,
            big::comma_upper(n, k, lambda, delta),
        ));
    }
    for (n, delta, lambda) in [
        (50, 0.5, 100),
        (100, 0.5, 100),
        (20, 0.5, 200),
        (200, 0.1, 1000),
        (30, 0.9, 30),
    ] {
        out.push(case(
            format!("t0 n={n} delta={delta} lambda={lambda}"),
            theory::tzero(n, delta, lambda),
            big::tzero(n, delta, lambda),
        ));
    }
    for (n, k, ell, delta, lambda) in [
        (20, 3, 20, 0.5, 200),
        (20, 3, 5, 0.5, 200),
        (50, 2, 50, 0.5, 100),
        (50, 4, 10, 0.5, 300),
        (100, 5, 100, 0.5, 100),
        (30, 3, 1, 0.5, 100),
        (40, 2, 39, 0.8, 150),
        (60, 6, 30, 0.4, 400),
        (25, 25, 20, 0.5, 200),
        (10, 2, 9, 0.5, 60),
    ] {
        let r = theory::level_based_t0(&LevelBasedParams {
            m: n + 1,
            ell,
            z: theory::jump_z_schedule(n, k).unwrap().z,
            delta,
            gamma0_lambda: theory::gamma0_lambda(lambda, delta),
            lambda,
        })
        .unwrap();
        out.push(case(
            format!("t0(ell) n={n} k={k} ell={ell} delta={delta} lambda={lambda}"),
            r.get("t0").unwrap(),
            big::t0_ell(n, k, ell, delta, lambda),
        ));
    }
    for (n, m, samples) in [
        (20, 1.0, 100),
        (16, 1.0, 100),
        (10, 3.0, 50),
        (30, 2.0, 1000),
        (8, 1.0, 20),
    ] {
        let got = theory::uniform_sampling_lower_bound(n, m, samples, samples, samples)
            .unwrap()
            .value;
        out.push(case(
            format!("uniform n={n} M={m} N={samples}"),
            got,
            big::uniform_expected(n, m, samples),
        ));
    }
    out
}
