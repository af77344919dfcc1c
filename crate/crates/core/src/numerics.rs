//! Small numerical helpers: compensated summation, quadrature, modified Bessel
//! functions of integer order.

use quadrature::double_exponential;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Integral of `f` over `[a, b]` with a double-exponential rule.
/// Integrable endpoint singularities are tolerated.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    double_exponential::integrate(f, a, b, tol).integral
}

/// Integral of `f` over `[0, inf)` by summing dyadic panels
/// `[0, s], [s, 2s], [2s, 4s], ...` until a panel contributes less than
/// `tol` relative to the running total, several times in a row.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: F, scale: f64, tol: f64) -> f64 {
    let mut total = CompensatedSum::default();
    total.add(integrate(&f, 0.0, scale, tol * 1e-2));
    let mut lo = scale;
    let mut quiet = 0;
    for _ in 0..200 {
        let hi = 2.0 * lo;
        let part = integrate(&f, lo, hi, tol * 1e-2);
        total.add(part);
        if part.abs() <= tol * total.value().abs().max(f64::MIN_POSITIVE) {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
        lo = hi;
    }
    total.value()
}

/// `e^{-x} I_n(x)` for `n = 0..=n_max` and `x >= 0`, via Miller's backward
/// recurrence normalized with `I_0 + 2 sum_{n>=1} I_n = e^x`.
pub fn bessel_i_scaled(x: f64, n_max: usize) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite(), "bessel_i_scaled needs finite x >= 0");
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    // I_n / I_0 ~ exp(-n^2 / 2x) for large x and ~ (x/2)^n / n! for small x;
    // start far enough out that both are negligible.
    let start = n_max + 40 + (120.0 * x.max(1.0)).sqrt().ceil() as usize;
    let mut above = 0.0f64; // I_{n+1}
    let mut here = 1e-300f64; // I_n
    let mut norm = CompensatedSum::default();
    for n in (1..=start).rev() {
        let below = (2.0 * n as f64 / x) * here + above;
        if n <= n_max {
            out[n] = here;
        }
        norm.add(2.0 * here);
        above = here;
        here = below;
        if here > 1e250 {
            let s = 1e-250;
            here *= s;
            above *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
            let nv = norm.value() * s;
            norm = CompensatedSum::default();
            norm.add(nv);
        }
    }
    out[0] = here;
    norm.add(here);
    let total = norm.value();
    for v in out.iter_mut() {
        *v /= total;
    }
    out
}
