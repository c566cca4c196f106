//! Distribution functions used by the tests: F survival, Student-t quantiles,
//! the studentized range distribution and a one-sided sign test.

use std::sync::OnceLock;

use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, StudentsT};
use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Upper tail of the F(d1, d2) distribution through the regularized
/// incomplete beta function.
pub fn f_sf(f: f64, d1: u64, d2: u64) -> Result<f64> {
    if d1 == 0 || d2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "F({d1}, {d2}) needs positive degrees of freedom"
        )));
    }
    if f.is_nan() || f < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "F statistic {f} is not non-negative"
        )));
    }
    if f == 0.0 {
        return Ok(1.0);
    }
    if f.is_infinite() {
        return Ok(0.0);
    }
    let (d1, d2) = (d1 as f64, d2 as f64);
    Ok(beta_reg(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f)).clamp(0.0, 1.0))
}

/// Two-sided critical value of Student's t with `df` degrees of freedom.
pub fn t_critical(confidence: f64, df: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&confidence) || df <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "t quantile at {confidence} with df {df}"
        )));
    }
    let t = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(t.inverse_cdf(0.5 + confidence / 2.0))
}

/// Mean and half-width of the t-based confidence interval for the mean.
/// `None` when fewer than two values are given.
pub fn mean_ci(values: &[f64], confidence: f64) -> Option<(f64, f64)> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = t_critical(confidence, (n - 1) as f64).ok()?;
    Some((mean, t * (var / n as f64).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignTest {
    pub positive: u64,
    pub negative: u64,
    /// P(X >= positive) for X ~ Binomial(positive + negative, 1/2).
    pub p_value: f64,
}

/// One-sided sign test of "values tend to be positive". Zeros are dropped.
pub fn sign_test(values: &[f64]) -> SignTest {
    let positive = values.iter().filter(|&&v| v > 0.0).count() as u64;
    let negative = values.iter().filter(|&&v| v < 0.0).count() as u64;
    let n = positive + negative;
    let p_value = if positive == 0 || n == 0 {
        1.0
    } else {
        Binomial::new(0.5, n)
            .expect("valid binomial")
            .sf(positive - 1)
    };
    SignTest {
        positive,
        negative,
        p_value,
    }
}

const GL_ORDER: usize = 16;

/// Gauss-Legendre nodes and weights on [-1, 1], found by Newton iteration on
/// the Legendre polynomial.
fn gauss_legendre() -> &'static [(f64, f64); GL_ORDER] {
    static NODES: OnceLock<[(f64, f64); GL_ORDER]> = OnceLock::new();
    NODES.get_or_init(|| {
        let n = GL_ORDER;
        let mut out = [(0.0, 0.0); GL_ORDER];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let j = j as f64;
                    let p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            *slot = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        out
    })
}

/// Composite Gauss-Legendre quadrature of `f` over [a, b].
fn integrate(a: f64, b: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    let nodes = gauss_legendre();
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + width * (p as f64 + 0.5);
        for &(x, w) in nodes {
            total += w * f(mid + 0.5 * width * x);
        }
    }
    total * 0.5 * width
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Inner quadrature over z in [-8.5, 8.5]: node, weight times pdf, and cdf.
fn range_nodes() -> &'static [(f64, f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| {
        let (a, b, panels) = (-8.5, 8.5, 24);
        let width = (b - a) / panels as f64;
        let mut out = Vec::with_capacity(panels * GL_ORDER);
        for p in 0..panels {
            let mid = a + width * (p as f64 + 0.5);
            for &(x, w) in gauss_legendre() {
                let z = mid + 0.5 * width * x;
                out.push((z, 0.5 * width * w * std_normal_pdf(z), std_normal_cdf(z)));
            }
        }
        out
    })
}

/// CDF of the range of `k` standard normals.
fn range_cdf(w: f64, k: usize) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let v: f64 = range_nodes()
        .iter()
        .map(|&(z, wp, cdf)| {
            let inner = (cdf - std_normal_cdf(z - w)).max(0.0);
            wp * inner.powi(k as i32 - 1)
        })
        .sum();
    (k as f64 * v).clamp(0.0, 1.0)
}

/// Beyond this many degrees of freedom the scale variable is treated as fixed.
const DF_INFINITE: f64 = 1e5;

/// CDF of the studentized range statistic for `k` groups and `df` error
/// degrees of freedom (`f64::INFINITY` allowed). The outer integral runs over
/// the chi-distributed scale variable.
pub fn ptukey(q: f64, k: usize, df: f64) -> Result<f64> {
    if k < 2 || df.is_nan() || df < 1.0 || q.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "ptukey(q={q}, k={k}, df={df})"
        )));
    }
    if q <= 0.0 {
        return Ok(0.0);
    }
    if q.is_infinite() {
        return Ok(1.0);
    }
    if df > DF_INFINITE {
        return Ok(range_cdf(q, k));
    }
    let half = df / 2.0;
    let log_norm = half * df.ln() - ln_gamma(half) - (half - 1.0) * std::f64::consts::LN_2;
    let spread = 20.0 * (2.0 * df).sqrt();
    let lo = ((df - spread).max(0.0) / df).sqrt();
    let hi = ((df + spread + 60.0) / df).sqrt();
    let v = integrate(lo, hi, 32, |s| {
        if s <= 0.0 {
            return 0.0;
        }
        let log_density = log_norm + (df - 1.0) * s.ln() - half * s * s;
        // exp(-60) is far below the quadrature error.
        if log_density < -60.0 {
            return 0.0;
        }
        log_density.exp() * range_cdf(q * s, k)
    });
    Ok(v.clamp(0.0, 1.0))
}

/// Quantile of the studentized range distribution, by bracketing followed by
/// the Illinois variant of regula falsi.
pub fn qtukey(p: f64, k: usize, df: f64) -> Result<f64> {
    if !(0.0 < p && p < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "qtukey probability {p} outside (0, 1)"
        )));
    }
    let g = |q: f64| ptukey(q, k, df).map(|v| v - p);
    let (mut a, mut fa) = (0.0, -p);
    let (mut b, mut fb) = (2.0, g(2.0)?);
    while fb < 0.0 {
        a = b;
        fa = fb;
        b *= 2.0;
        fb = g(b)?;
        if b > 1e4 {
            return Err(Error::NotConverged {
                iterations: 0,
                grad_norm: fb.abs(),
            });
        }
    }
    let mut side = 0;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = g(c)?;
        if fc.abs() < 1e-13 || (b - a).abs() < 1e-11 {
            return Ok(c);
        }
        if (fc < 0.0) == (fa < 0.0) {
            a = c;
            fa = fc;
            if side == -1 {
                fb /= 2.0;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa /= 2.0;
            }
            side = 1;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent regularized incomplete beta from the power series
    /// I_x(a,b) = x^a (1-x)^b / (a B(a,b)) * sum_n B(a+1,n+1)/B(a+b,n+1) x^n.
    fn beta_reg_series(a: f64, b: f64, x: f64) -> f64 {
        let ln_front = a * x.ln() + b * (1.0 - x).ln()
            - a.ln()
            - (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b));
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 0..100_000 {
            let n = n as f64;
            term *= (a + b + n) / (a + 1.0 + n) * x;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        ln_front.exp() * sum
    }

    #[test]
    fn f_survival_limits_and_oracle() {
        assert_eq!(f_sf(0.0, 1, 4).unwrap(), 1.0);
        assert_eq!(f_sf(f64::INFINITY, 1, 4).unwrap(), 0.0);
        assert!(f_sf(1e12, 3, 7).unwrap() < 1e-12);
        let p = f_sf(13.5, 1, 4).unwrap();
        assert!((p - 0.0213).abs() < 1e-3);
        for &(f, d1, d2) in &[
            (13.5, 1u64, 4u64),
            (2.0, 3, 10),
            (0.7, 5, 30),
            (4.2, 2, 2),
            (9.0, 1, 100),
        ] {
            let x = d2 as f64 / (d2 as f64 + d1 as f64 * f);
            let oracle = beta_reg_series(d2 as f64 / 2.0, d1 as f64 / 2.0, x);
            assert!(
                (f_sf(f, d1, d2).unwrap() - oracle).abs() < 1e-10,
                "F({d1},{d2}) at {f}"
            );
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let v = integrate(0.0, 2.0, 1, |x| x.powi(31));
        assert!((v - 2f64.powi(32) / 32.0).abs() / v < 1e-12);
        let w: f64 = gauss_legendre().iter().map(|&(_, w)| w).sum();
        assert!((w - 2.0).abs() < 1e-13);
    }

    #[test]
    fn range_of_two_normals_matches_closed_form() {
        // The range of two standard normals is |N(0, 2)|.
        for &w in &[0.3, 1.0, 2.5, 4.0] {
            let exact = 2.0 * std_normal_cdf(w / 2f64.sqrt()) - 1.0;
            assert!((ptukey(w, 2, f64::INFINITY).unwrap() - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn two_group_studentized_range_is_scaled_t() {
        // For k = 2, q / sqrt(2) follows |t(df)|.
        for &(q, df) in &[(2.0, 5.0), (3.5, 12.0), (1.2, 40.0)] {
            let t = StudentsT::new(0.0, 1.0, df).unwrap();
            let exact = 2.0 * t.cdf(q / 2f64.sqrt()) - 1.0;
            assert!(
                (ptukey(q, 2, df).unwrap() - exact).abs() < 1e-8,
                "q={q} df={df}"
            );
        }
    }

    #[test]
    fn critical_values_match_published_tables() {
        let table_05 = [
            (10.0, [3.877, 4.327, 4.654, 4.912]),
            (20.0, [3.578, 3.958, 4.232, 4.445]),
            (f64::INFINITY, [3.314, 3.633, 3.858, 4.030]),
        ];
        let table_01 = [
            (10.0, [5.270, 5.769, 6.136, 6.428]),
            (20.0, [4.639, 5.018, 5.294, 5.510]),
            (f64::INFINITY, [4.120, 4.403, 4.603, 4.757]),
        ];
        for (alpha, table) in [(0.05, table_05), (0.01, table_01)] {
            for (df, row) in table {
                for (i, expected) in row.iter().enumerate() {
                    let q = qtukey(1.0 - alpha, i + 3, df).unwrap();
                    assert!(
                        (q - expected).abs() < 1.5e-3,
                        "k={} df={df} alpha={alpha}: {q}",
                        i + 3
                    );
                }
            }
        }
    }

    #[test]
    fn sign_test_counts() {
        let s = sign_test(&[1.0, 2.0, -1.0, 0.0, 3.0]);
        assert_eq!((s.positive, s.negative), (3, 1));
        assert!((s.p_value - 5.0 / 16.0).abs() < 1e-12);
        assert_eq!(sign_test(&[-1.0]).p_value, 1.0);
        assert!((sign_test(&[1.0; 10]).p_value - 1.0 / 1024.0).abs() < 1e-15);
    }

    #[test]
    fn t_interval() {
        let (m, h) = mean_ci(&[1.0, 2.0, 3.0], 0.95).unwrap();
        assert_eq!(m, 2.0);
        // t_{0.975, 2} = 4.302653 and the standard error is 1/sqrt(3).
        assert!((h - 4.302_652_729_7 / 3f64.sqrt()).abs() < 1e-6);
        assert!(mean_ci(&[1.0], 0.95).is_none());
    }
}
