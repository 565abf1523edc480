//! Bessel functions of the first kind for real order.
//!
//! Small arguments use the ascending series summed in double-double
//! arithmetic, so the large alternating terms cancel without loss. Large
//! arguments use the Hankel asymptotic expansion.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const MAX_ORDER: f64 = 5.0;
pub const MAX_ARG: f64 = 1e4;
/// Switch from the series to the asymptotic expansion.
pub const SERIES_LIMIT: f64 = 25.0;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function (Lanczos, with reflection below 1/2).
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut a = LANCZOS[0];
        let t = x + LANCZOS_G + 0.5;
        for (i, c) in LANCZOS.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd { hi: p, lo: a.mul_add(b, -p) }
}

impl Dd {
    fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.hi, o.hi);
        let t = two_sum(self.lo, o.lo);
        let u = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(u.hi, u.lo + t.lo)
    }

    fn mul(self, o: Dd) -> Dd {
        let p = two_prod(self.hi, o.hi);
        quick_two_sum(p.hi, p.lo + (self.hi * o.lo + self.lo * o.hi))
    }

    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.add(o.mul(Dd::new(-q1)));
        let q2 = r.hi / o.hi;
        let r = r.add(o.mul(Dd::new(-q2)));
        let q3 = r.hi / o.hi;
        quick_two_sum(q1, q2).add(Dd::new(q3))
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

fn is_negative_integer(nu: f64) -> bool {
    nu < 0.0 && nu == nu.round()
}

/// Ascending series `sum (-x^2/4)^k / (k! Gamma(nu + k + 1)) (x/2)^nu`.
fn series(nu: f64, x: f64) -> f64 {
    let half = x / 2.0;
    let q = two_prod(half, half);
    let neg_q = Dd { hi: -q.hi, lo: -q.lo };
    let mut term = Dd::new(1.0);
    let mut sum = Dd::new(1.0);
    for k in 1..400 {
        let kf = k as f64;
        let den = two_sum(nu, kf).mul(Dd::new(kf));
        term = term.mul(neg_q).div(den);
        sum = sum.add(term);
        if term.hi.abs() < 1e-34 * sum.hi.abs().max(1e-300) && kf > half {
            break;
        }
    }
    sum.to_f64() * half.powf(nu) / gamma(nu + 1.0)
}

/// Hankel expansion `sqrt(2/(pi x)) (P cos chi - Q sin chi)`.
fn hankel(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let (mut p, mut q) = (1.0, 0.0);
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        a *= (mu - (2.0 * kf - 1.0).powi(2)) / (8.0 * kf * x);
        if a.abs() > prev || a == 0.0 {
            break;
        }
        prev = a.abs();
        // a_k / x^k enters P (even k) or Q (odd k) with sign (-1)^(k/2)
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// `J_nu(x)` for any real order and `x > 0`, without range checks.
pub(crate) fn jv(nu: f64, x: f64) -> f64 {
    if is_negative_integer(nu) {
        let n = -nu;
        let s = if (n as i64) % 2 == 0 { 1.0 } else { -1.0 };
        return s * jv(n, x);
    }
    if x <= SERIES_LIMIT {
        series(nu, x)
    } else {
        hankel(nu, x)
    }
}

/// `J_nu(x)` for `0 <= nu <= 5`, `0 < x <= 1e4`.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    if !(0.0..=MAX_ORDER).contains(&nu) {
        return Err(Error::Domain(format!("Bessel order {nu} outside [0, {MAX_ORDER}]")));
    }
    if !(x > 0.0 && x <= MAX_ARG) {
        return Err(Error::Domain(format!("Bessel argument {x} outside (0, {MAX_ARG}]")));
    }
    Ok(jv(nu, x))
}

/// `(J_nu, J_nu', J_nu'')` at `x`, for any real order. The derivatives come
/// from the order recurrences, not from the Bessel equation.
pub(crate) fn jv_jet(nu: f64, x: f64) -> [f64; 3] {
    let j = jv(nu, x);
    let d1 = nu / x * j - jv(nu + 1.0, x);
    let d2 = 0.25 * (jv(nu - 2.0, x) - 2.0 * j + jv(nu + 2.0, x));
    [j, d1, d2]
}
