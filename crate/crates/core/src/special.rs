//! Bessel J₀, Gauss–Legendre quadrature, the logarithmic integral and the
//! normal distribution.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

use statrs::function::erf::erfc;

/// Switchover between the power series and the Hankel expansion.
pub const J0_SWITCH: f64 = 12.0;

#[derive(Clone, Copy, Debug)]
struct Dd(f64, f64);

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd(s, b - (s - a))
}

impl Dd {
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.0, o.0);
        quick_two_sum(s, e + self.1 + o.1)
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.0 * o.0;
        let e = self.0.mul_add(o.0, -p) + self.0 * o.1 + self.1 * o.0;
        quick_two_sum(p, e)
    }

    fn div_f64(self, d: f64) -> Dd {
        let q = self.0 / d;
        let p = q * d;
        let e = q.mul_add(d, -p);
        let r = (self.0 - p - e + self.1) / d;
        quick_two_sum(q, r)
    }

    fn neg(self) -> Dd {
        Dd(-self.0, -self.1)
    }
}

/// J₀(u) = Σ (−1)^k (u²/4)^k/(k!)², in double-double once cancellation
/// becomes significant.
pub fn j0_series(u: f64) -> f64 {
    let x = 0.25 * u * u;
    if x <= 1.0 {
        let mut term: f64 = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        while term.abs() > 1e-18 {
            term *= -x / (k * k);
            sum += term;
            k += 1.0;
        }
        return sum;
    }
    let p = u * u;
    let xd = Dd(p, u.mul_add(u, -p)).mul(Dd(0.25, 0.0));
    let mut term = Dd(1.0, 0.0);
    let mut sum = term;
    let mut k = 1u32;
    loop {
        term = term.mul(xd).div_f64((k * k) as f64).neg();
        sum = sum.add(term);
        if term.0.abs() < 1e-22 && (k * k) as f64 > x {
            break;
        }
        k += 1;
    }
    sum.0 + sum.1
}

/// Hankel asymptotic expansion √(2/πu)(P cos(u−π/4) − Q sin(u−π/4)),
/// summed up to its smallest term.
pub fn j0_asymptotic(u: f64) -> f64 {
    let u = u.abs();
    let (mut p, mut q) = (1.0, 0.0);
    let mut t = 1.0;
    let mut k = 1u32;
    loop {
        let kf = k as f64;
        let next = t * (2.0 * kf - 1.0).powi(2) / (8.0 * kf * u);
        if next >= t || next < 1e-18 {
            break;
        }
        t = next;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * t;
        } else {
            q -= sign * t;
        }
        k += 1;
    }
    let (s, c) = u.sin_cos();
    let cos_chi = (c + s) * FRAC_1_SQRT_2;
    let sin_chi = (s - c) * FRAC_1_SQRT_2;
    (2.0 / (PI * u)).sqrt() * (p * cos_chi - q * sin_chi)
}

/// Bessel function of the first kind of order zero.
pub fn j0(u: f64) -> f64 {
    let a = u.abs();
    if a <= J0_SWITCH {
        j0_series(a)
    } else {
        j0_asymptotic(a)
    }
}

/// Reference value (1/N)Σ_j cos(u·sin(π(j+½)/N)) of (1/π)∫₀^π cos(u sin θ)dθ.
/// The midpoint rule on a periodic analytic integrand converges geometrically.
pub fn j0_quadrature(u: f64, n: usize) -> f64 {
    let s: f64 = (0..n).map(|j| (u * (PI * (j as f64 + 0.5) / n as f64).sin()).cos()).sum();
    s / n as f64
}

/// An upper bound for |J₀(u)|: min(1, √(2/πu)(1 + 1/(8u²))).
pub fn j0_envelope(u: f64) -> f64 {
    let a = u.abs();
    if a < 0.5 {
        return 1.0;
    }
    ((2.0 / (PI * a)).sqrt() * (1.0 + 1.0 / (8.0 * a * a))).min(1.0)
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

const GL_ORDER: usize = 16;

fn gl_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_ORDER))
}

fn gl(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (x, w) = gl_rule();
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    h * x.iter().zip(w).map(|(x, w)| w * f(c + h * x)).sum::<f64>()
}

/// Result of [`integrate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Sum of |two halves − whole| over the accepted intervals.
    pub error: f64,
    pub evaluations: usize,
}

/// Adaptive 16-point Gauss–Legendre: an interval is accepted when its two
/// halves agree with the whole to max(abs_tol, rel_tol·|value|).
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Quadrature {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, abs_tol: f64, rel_tol: f64, depth: u32) -> Quadrature {
        let m = 0.5 * (a + b);
        let (l, r) = (gl(f, a, m), gl(f, m, b));
        let err = (l + r - whole).abs();
        if err <= abs_tol.max(rel_tol * (l + r).abs()) || depth == 0 {
            return Quadrature { value: l + r, error: err, evaluations: 2 * GL_ORDER };
        }
        let ql = rec(f, a, m, l, 0.5 * abs_tol, rel_tol, depth - 1);
        let qr = rec(f, m, b, r, 0.5 * abs_tol, rel_tol, depth - 1);
        Quadrature {
            value: ql.value + qr.value,
            error: ql.error + qr.error,
            evaluations: ql.evaluations + qr.evaluations + 2 * GL_ORDER,
        }
    }
    let whole = gl(f, a, b);
    let mut q = rec(f, a, b, whole, abs_tol, rel_tol, 24);
    q.evaluations += GL_ORDER;
    q
}

/// Li(x) = ∫₂^x dt/log t, with u = log t.
pub fn li2(x: f64) -> f64 {
    if x <= 2.0 {
        return 0.0;
    }
    let f = |u: f64| u.exp() / u;
    let (lo, hi) = (2f64.ln(), x.ln());
    // Unit-length pieces in u keep the exponential well resolved.
    let mut s = 0.0;
    let mut a = lo;
    while a < hi {
        let b = (a + 1.0).min(hi);
        s += integrate(&f, a, b, 0.0, 1e-13).value;
        a = b;
    }
    s
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j0_known_values() {
        assert!((j0(0.0) - 1.0).abs() < 1e-16);
        assert!((j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((j0(2.404_825_557_695_773) ).abs() < 1e-15);
        assert!((j0(10.0) + 0.245_935_764_451_348_3).abs() < 1e-14);
        assert!((j0(20.0) - 0.167_024_664_340_583_1).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((s - 2.0 / 31.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn li_reference_values() {
        // li(x) − li(2) with li(10⁶) = 78627.549159462181919…, li(2) = 1.045163780117492784…
        let want = 78_627.549_159_462_18 - 1.045_163_780_117_492_8;
        assert!((li2(1e6) - want).abs() < 1e-8 * want);
        assert!((integrate(&|x: f64| x.sin(), 0.0, PI, 1e-14, 0.0).value - 2.0).abs() < 1e-13);
    }

    #[test]
    fn normal_cdf_symmetry() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((normal_cdf(1.0) + normal_cdf(-1.0) - 1.0).abs() < 1e-15);
        let d = normal_cdf(1.959_963_984_540_054) - 0.975;
        assert!(d.abs() < 5e-12, "{d}");
    }
}
