//! Arbitrary-precision re-evaluation of the closed-form bounds, written
//! directly from their definitions (linear space, no log tricks) so that it
//! shares no code with `comma_ea::theory`.

use std::cell::RefCell;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode};

const P: usize = 320;
const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CC: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

#[derive(Clone, Debug)]
pub struct Big(pub BigFloat);

impl Big {
    pub fn f(v: f64) -> Self {
        Big(BigFloat::from_f64(v, P))
    }

    pub fn u(v: u64) -> Self {
        Big(BigFloat::from_u64(v, P))
    }

    pub fn e() -> Self {
        Big::u(1).exp()
    }

    pub fn exp(&self) -> Self {
        CC.with(|cc| Big(self.0.exp(P, RM, &mut cc.borrow_mut())))
    }

    pub fn ln(&self) -> Self {
        CC.with(|cc| Big(self.0.ln(P, RM, &mut cc.borrow_mut())))
    }

    pub fn log2(&self) -> Self {
        CC.with(|cc| Big(self.0.log2(P, RM, &mut cc.borrow_mut())))
    }

    pub fn sqrt(&self) -> Self {
        Big(self.0.sqrt(P, RM))
    }

    pub fn powi(&self, n: u64) -> Self {
        Big(self.0.powi(n as usize, P, RM))
    }

    pub fn floor(&self) -> Self {
        Big(self.0.floor())
    }

    pub fn ceil(&self) -> Self {
        Big(self.0.ceil())
    }

    pub fn le(&self, o: &Big) -> bool {
        self.0.cmp(&o.0).is_some_and(|c| c <= 0)
    }

    pub fn min(&self, o: &Big) -> Big {
        if self.le(o) {
            self.clone()
        } else {
            o.clone()
        }
    }

    pub fn max(&self, o: &Big) -> Big {
        if self.le(o) {
            o.clone()
        } else {
            self.clone()
        }
    }

    pub fn abs(&self) -> Big {
        if self.0.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

impl Add for Big {
    type Output = Big;
    fn add(self, o: Big) -> Big {
        Big(self.0.add(&o.0, P, RM))
    }
}

impl Sub for Big {
    type Output = Big;
    fn sub(self, o: Big) -> Big {
        Big(self.0.sub(&o.0, P, RM))
    }
}

impl Mul for Big {
    type Output = Big;
    fn mul(self, o: Big) -> Big {
        Big(self.0.mul(&o.0, P, RM))
    }
}

impl Div for Big {
    type Output = Big;
    fn div(self, o: Big) -> Big {
        Big(self.0.div(&o.0, P, RM))
    }
}

impl Neg for Big {
    type Output = Big;
    fn neg(self) -> Big {
        Big(self.0.neg())
    }
}

/// `|got - want| / |want|`, evaluated in extended precision and rendered.
pub fn rel_err(got: f64, want: &Big) -> (bool, String) {
    let err = (Big::f(got) - want.clone()).abs() / want.abs();
    (err.le(&Big::f(1e-10)), format!("{}", err.0))
}

pub fn p_k(n: u64, k: u64) -> Big {
    let nb = Big::u(n);
    let q = Big::u(1) - Big::u(1) / nb.clone();
    q.powi(n - k) / nb.powi(k)
}

pub fn h_comma(n: u64, lambda: u64, c: f64) -> Big {
    let c_prime = Big::u(1) / Big::e() + Big::f(c);
    let a = Big::u(1) - Big::u(2) * c_prime;
    let first = (-(a.clone() * a) * Big::u(lambda) / Big::u(2)).exp();
    first + (Big::u(2 * n - 1)) / Big::u(n * n - n)
}

/// Comma lower bound `T_k`, or `T_{⌊cn⌋}` when `k > cn`; 0 when vacuous.
pub fn comma_lower(n: u64, k: u64, mu: u64, lambda: u64, c: f64) -> Big {
    let cn = Big::f(c) * Big::u(n);
    let k_eff = if Big::u(k).le(&cn) {
        k
    } else {
        (0..=n).rev().find(|&j| Big::u(j).le(&cn)).unwrap_or(0)
    };
    let h = h_comma(n, lambda, c);
    if Big::u(1).le(&h) {
        return Big::u(0);
    }
    let pre = Big::u(1) - (-(Big::f(0.16) * Big::u(n))).exp();
    pre * (Big::u(mu) + (Big::u(1) - h) / p_k(n, k_eff))
}

fn gamma0_lambda(lambda: u64, delta: f64) -> Big {
    (Big::u(lambda) / ((Big::u(1) + Big::f(delta)) * Big::e())).floor()
}

fn d0(delta: f64, lambda: u64) -> Big {
    (Big::u(100) / Big::f(delta)).ceil().min(&gamma0_lambda(lambda, delta))
}

pub fn tzero(n: u64, delta: f64, lambda: u64) -> Big {
    let e = Big::e();
    let nb = Big::u(n);
    let middle = e.clone() / (e.clone() - Big::u(1)) * nb.clone() * (Big::u(8) * e.clone() * d0(delta, lambda)).log2();
    let last = Big::u(4) * e * nb.clone() * nb.ln() / Big::u(lambda);
    Big::u(10_000) / Big::f(delta) * (Big::u(n + 1) + middle + last)
}

pub fn comma_upper(n: u64, k: u64, lambda: u64, delta: f64) -> Big {
    let t0 = tzero(n, delta, lambda);
    let nb = Big::u(n);
    let pl = p_k(n, k) * Big::u(lambda);
    let floor_n15 = (nb.clone() * nb.sqrt()).floor();
    let inner = Big::u(8) * t0.clone()
        + Big::u(1)
        + Big::u(9) * (t0.clone() / pl.clone()).sqrt()
        + Big::u(8) * t0 / (pl.clone() * floor_n15)
        + Big::u(1) / pl;
    Big::u(lambda) / (Big::u(1) - Big::u(1) / nb.sqrt()) * inner
}

/// `z_j` of the jump level schedule, `j in [1..n-1]`.
pub fn z(n: u64, k: u64, j: u64) -> Big {
    let num = if j < k { n - j } else { n - (j - k) };
    Big::u(num) / (Big::u(4) * Big::e() * Big::u(n))
}

/// `t₀(ℓ)` with the jump schedule and `γ₀λ = ⌊λ/((1+δ)e)⌋`.
pub fn t0_ell(n: u64, k: u64, ell: u64, delta: f64, lambda: u64) -> Big {
    let g0l = gamma0_lambda(lambda, delta);
    let gamma0 = g0l.clone() / Big::u(lambda);
    let d = d0(delta, lambda);
    let mut sum_log = Big::u(0);
    let mut sum_inv = Big::u(0);
    for j in 1..ell {
        let zj = z(n, k, j);
        let arg = Big::u(2) * g0l.clone() / (Big::u(1) + zj.clone() * Big::u(lambda) / d.clone());
        sum_log = sum_log + arg.log2().max(&Big::u(0));
        sum_inv = sum_inv + Big::u(1) / zj;
    }
    Big::u(10_000) / Big::f(delta) * (Big::u(n + 1) + sum_log / (Big::u(1) - gamma0) + sum_inv / Big::u(lambda))
}

/// Expected-time form `(1 - MN2^{-n})(N+1)` of the uniform-sampling bound.
pub fn uniform_expected(n: u64, m: f64, samples: u64) -> Big {
    let miss = Big::u(1) - Big::f(m) * Big::u(samples) / Big::u(2).powi(n);
    miss * Big::u(samples + 1)
}

pub fn plus_lower(n: u64, k: u64, mu: u64) -> Big {
    let nb = Big::u(n);
    let h = (Big::u(2) * nb.clone() * (Big::u(mu) * nb.clone()).ln()).sqrt();
    let threshold = nb.clone() / Big::u(2) - h;
    let q = Big::u(1) - Big::u(1) / nb.clone();
    let inv_p = if Big::u(k).le(&threshold) {
        Big::u(1) / p_k(n, k)
    } else {
        // real exponent k': p = q^{n-k'} n^{-k'}
        let kp = threshold;
        let ln_p = (nb.clone() - kp.clone()) * q.clone().ln() - kp * nb.ln();
        (-ln_p).exp()
    };
    q * (Big::u(mu) + inv_p)
}

/// `(4k/n)^{2/ln(n/(4k))}`.
pub fn corollary_identity(n: u64, k: u64) -> Big {
    let ratio = Big::u(4 * k) / Big::u(n);
    let expo = Big::u(2) / (Big::u(n) / Big::u(4 * k)).ln();
    (expo * ratio.ln()).exp()
}
