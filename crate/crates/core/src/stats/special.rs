//! Special functions: complementary error function, log-gamma, regularized
//! incomplete beta, and the Student-t CDF/quantile built on top of them.
//!
//! The p-values downstream live far in the distribution tails (down to
//! ~1e-18), so everything here is written to preserve *relative* accuracy in
//! the tails: the normal CDF goes through `erfc` instead of `1 - cdf`
//! cancellation, and the t survival mass comes straight out of the incomplete
//! beta continued fraction.

// Constants below keep their full published digit strings.
#![allow(clippy::excessive_precision)]

use super::StatsError;

// Rational-approximation constants for erfc, from the classic FreeBSD msun
// implementation (Sun Microsystems, 1993; freely redistributable). Accurate
// to within ~1 ulp over the whole double range.
const ERX: f64 = 8.45062911510467529297e-01;

const PP0: f64 = 1.28379167095512558561e-01;
const PP1: f64 = -3.25042107247001499370e-01;
const PP2: f64 = -2.84817495755985104766e-02;
const PP3: f64 = -5.77027029648944159157e-03;
const PP4: f64 = -2.37630166566501626084e-05;
const QQ1: f64 = 3.97917223959155352819e-01;
const QQ2: f64 = 6.50222499887672944485e-02;
const QQ3: f64 = 5.08130628187576562776e-03;
const QQ4: f64 = 1.32494738004321644526e-04;
const QQ5: f64 = -3.96022827877536812320e-06;

const PA0: f64 = -2.36211856075265944077e-03;
const PA1: f64 = 4.14856118683748331666e-01;
const PA2: f64 = -3.72207876035701323847e-01;
const PA3: f64 = 3.18346619901161753674e-01;
const PA4: f64 = -1.10894694282396677476e-01;
const PA5: f64 = 3.54783043256182359371e-02;
const PA6: f64 = -2.16637559486879084300e-03;
const QA1: f64 = 1.06420880400844228286e-01;
const QA2: f64 = 5.40397917702171048937e-01;
const QA3: f64 = 7.18286544141962662868e-02;
const QA4: f64 = 1.26171219808761642112e-01;
const QA5: f64 = 1.36370839120290507362e-02;
const QA6: f64 = 1.19844998467991074170e-02;

const RA0: f64 = -9.86494403484714822705e-03;
const RA1: f64 = -6.93858572707181764372e-01;
const RA2: f64 = -1.05586262253232909814e+01;
const RA3: f64 = -6.23753324503260060396e+01;
const RA4: f64 = -1.62396669462573470355e+02;
const RA5: f64 = -1.84605092906711035994e+02;
const RA6: f64 = -8.12874355063065934246e+01;
const RA7: f64 = -9.81432934416914548592e+00;
const SA1: f64 = 1.96512716674392571292e+01;
const SA2: f64 = 1.37657754143519042600e+02;
const SA3: f64 = 4.34565877475229228821e+02;
const SA4: f64 = 6.45387271733267880336e+02;
const SA5: f64 = 4.29008140027567833386e+02;
const SA6: f64 = 1.08635005541779435134e+02;
const SA7: f64 = 6.57024977031928170135e+00;
const SA8: f64 = -6.04244152148580987438e-02;

const RB0: f64 = -9.86494292470009928597e-03;
const RB1: f64 = -7.99283237680523006574e-01;
const RB2: f64 = -1.77579549177547519889e+01;
const RB3: f64 = -1.60636384855821916062e+02;
const RB4: f64 = -6.37566443368389627722e+02;
const RB5: f64 = -1.02509513161107724954e+03;
const RB6: f64 = -4.83519191608651397019e+02;
const SB1: f64 = 3.03380607434824582924e+01;
const SB2: f64 = 3.25792512996573918826e+02;
const SB3: f64 = 1.53672958608443695994e+03;
const SB4: f64 = 3.19985821950859553908e+03;
const SB5: f64 = 2.55305040643316442583e+03;
const SB6: f64 = 4.74528541206955367215e+02;
const SB7: f64 = -2.24409524465858183362e+01;

// 2^-56
const TINY: f64 = 1.387_778_780_781_445_7e-17;

/// Complementary error function `erfc(x) = 1 - erf(x)`.
///
/// Keeps full relative precision for large positive `x`, where
/// `erfc(x) ~ exp(-x^2)/(x sqrt(pi))`.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 2.0;
    }
    let sign = x < 0.0;
    let x = x.abs();

    if x < 0.84375 {
        let temp = if x < TINY {
            x
        } else {
            let z = x * x;
            let r = PP0 + z * (PP1 + z * (PP2 + z * (PP3 + z * PP4)));
            let s = 1.0 + z * (QQ1 + z * (QQ2 + z * (QQ3 + z * (QQ4 + z * QQ5))));
            let y = r / s;
            if x < 0.25 {
                x + x * y
            } else {
                0.5 + (x * y + (x - 0.5))
            }
        };
        return if sign { 1.0 + temp } else { 1.0 - temp };
    }

    if x < 1.25 {
        let s = x - 1.0;
        let p = PA0 + s * (PA1 + s * (PA2 + s * (PA3 + s * (PA4 + s * (PA5 + s * PA6)))));
        let q = 1.0 + s * (QA1 + s * (QA2 + s * (QA3 + s * (QA4 + s * (QA5 + s * QA6)))));
        return if sign {
            1.0 + ERX + p / q
        } else {
            1.0 - ERX - p / q
        };
    }

    if x < 28.0 {
        let s = 1.0 / (x * x);
        let (r, q);
        if x < 1.0 / 0.35 {
            r = RA0 + s * (RA1 + s * (RA2 + s * (RA3 + s * (RA4 + s * (RA5 + s * (RA6 + s * RA7))))));
            q = 1.0
                + s * (SA1
                    + s * (SA2 + s * (SA3 + s * (SA4 + s * (SA5 + s * (SA6 + s * (SA7 + s * SA8)))))));
        } else {
            if sign && x > 6.0 {
                return 2.0;
            }
            r = RB0 + s * (RB1 + s * (RB2 + s * (RB3 + s * (RB4 + s * (RB5 + s * RB6)))));
            q = 1.0
                + s * (SB1 + s * (SB2 + s * (SB3 + s * (SB4 + s * (SB5 + s * (SB6 + s * SB7))))));
        }
        // Split x into a coarse part with an exactly representable square so
        // exp(-x^2) can be computed without cancellation.
        let z = f64::from_bits(x.to_bits() & 0xffff_ffff_0000_0000);
        let v = (-z * z - 0.5625).exp() * ((z - x) * (z + x) + r / q).exp();
        return if sign { 2.0 - v / x } else { v / x };
    }

    if sign {
        2.0
    } else {
        0.0
    }
}

/// Standard normal CDF.
///
/// Evaluated as `erfc(-z/sqrt(2))/2`, which keeps relative accuracy in the
/// lower tail instead of collapsing to 0; `normal_cdf(-10)` is still a
/// meaningful ~7.6e-24.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

// Lanczos approximation, g = 607/128, 15 terms. Roughly 1e-14 relative
// accuracy for positive arguments, which is what the beta prefactor needs.
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_COEF: [f64; 15] = [
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
];

/// Natural log of the gamma function for positive arguments.
pub fn ln_gamma(x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NAN;
    }
    if x < 0.5 {
        // Reflection keeps the Lanczos sum in its accurate range.
        return (std::f64::consts::PI / (std::f64::consts::PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    let mut sum = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + sum.ln()
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

const BETA_MAX_ITER: usize = 300;
const BETA_EPS: f64 = 1e-15;
const LENTZ_TINY: f64 = 1e-30;

/// Regularized incomplete beta function `I_x(a, b)`.
///
/// Continued-fraction evaluation (modified Lentz), switching through the
/// symmetry `I_x(a,b) = 1 - I_{1-x}(b,a)` so the fraction always converges
/// from the small side.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64, StatsError> {
    if !a.is_finite() || !b.is_finite() || a <= 0.0 || b <= 0.0 {
        return Err(StatsError::InvalidArgument(format!(
            "incomplete beta requires a > 0 and b > 0, got a={a}, b={b}"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(StatsError::InvalidArgument(format!(
            "incomplete beta requires 0 <= x <= 1, got x={x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    if x > (a + 1.0) / (a + b + 2.0) {
        Ok(1.0 - beta_cf(b, a, 1.0 - x)?)
    } else {
        beta_cf(a, b, x)
    }
}

/// `x^a (1-x)^b / (a B(a,b))` times the Lentz-evaluated continued fraction.
fn beta_cf(a: f64, b: f64, x: f64) -> Result<f64, StatsError> {
    let prefix = (a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b)).exp() / a;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;

    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < LENTZ_TINY {
        d = LENTZ_TINY;
    }
    d = 1.0 / d;
    let mut h = d;

    for m in 1..=BETA_MAX_ITER {
        let m_f = m as f64;
        let m2 = 2.0 * m_f;

        // Even step.
        let num = m_f * (b - m_f) * x / ((qam + m2) * (a + m2));
        d = 1.0 + num * d;
        if d.abs() < LENTZ_TINY {
            d = LENTZ_TINY;
        }
        c = 1.0 + num / c;
        if c.abs() < LENTZ_TINY {
            c = LENTZ_TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        // Odd step.
        let num = -(a + m_f) * (qab + m_f) * x / ((a + m2) * (qap + m2));
        d = 1.0 + num * d;
        if d.abs() < LENTZ_TINY {
            d = LENTZ_TINY;
        }
        c = 1.0 + num / c;
        if c.abs() < LENTZ_TINY {
            c = LENTZ_TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;

        if (delta - 1.0).abs() < BETA_EPS {
            return Ok(prefix * h);
        }
    }
    Err(StatsError::NonConvergence(BETA_MAX_ITER))
}

fn check_df(df: u32) -> Result<f64, StatsError> {
    if df == 0 {
        return Err(StatsError::InvalidArgument(
            "degrees of freedom must be >= 1".into(),
        ));
    }
    Ok(f64::from(df))
}

/// CDF of the Student-t distribution with `df` degrees of freedom.
pub fn student_t_cdf(t: f64, df: u32) -> Result<f64, StatsError> {
    Ok(1.0 - student_t_sf(t, df)?)
}

/// Survival function `P(T > t)` of the Student-t distribution.
///
/// For `t >= 0` the tail mass is exactly `I_x(df/2, 1/2)/2` with
/// `x = df/(df + t^2)`, evaluated without any `1 - cdf` cancellation, so
/// far-tail p-values keep full relative precision.
pub fn student_t_sf(t: f64, df: u32) -> Result<f64, StatsError> {
    let v = check_df(df)?;
    if !t.is_finite() {
        return Err(StatsError::InvalidArgument(format!(
            "t statistic must be finite, got {t}"
        )));
    }
    if t == 0.0 {
        return Ok(0.5);
    }
    let x = v / (v + t * t);
    let ib = regularized_incomplete_beta(0.5 * v, 0.5, x)?;
    if t > 0.0 {
        Ok(0.5 * ib)
    } else {
        Ok(1.0 - 0.5 * ib)
    }
}

/// Quantile (inverse CDF) of the Student-t distribution.
///
/// Bracketing plus bisection on [`student_t_cdf`]; converges to adjacent
/// doubles, comfortably inside the 1e-10 contract.
pub fn student_t_quantile(p: f64, df: u32) -> Result<f64, StatsError> {
    check_df(df)?;
    if p.is_nan() || p <= 0.0 || p >= 1.0 {
        return Err(StatsError::InvalidArgument(format!(
            "quantile requires 0 < p < 1, got {p}"
        )));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    if p < 0.5 {
        return Ok(-student_t_quantile(1.0 - p, df)?);
    }

    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    while student_t_cdf(hi, df)? < p {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(StatsError::NonConvergence(0));
        }
    }
    for _ in 0..500 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if student_t_cdf(mid, df)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ln_gamma_known_values() {
        assert!(ln_gamma(1.0).abs() < 1e-14);
        assert!(ln_gamma(2.0).abs() < 1e-14);
        // ln Gamma(1/2) = ln sqrt(pi)
        assert!((ln_gamma(0.5) - 0.5723649429247001).abs() < 1e-14);
        // ln 9! = ln 362880
        assert!((ln_gamma(10.0) - 362880.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn ln_gamma_recurrence() {
        for &x in &[0.7, 1.3, 4.5, 17.25, 39.5] {
            let lhs = ln_gamma(x + 1.0);
            let rhs = ln_gamma(x) + x.ln();
            assert!((lhs - rhs).abs() < 1e-12, "recurrence at {x}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn beta_boundaries_and_uniform() {
        assert_eq!(regularized_incomplete_beta(2.0, 3.0, 0.0).unwrap(), 0.0);
        assert_eq!(regularized_incomplete_beta(2.0, 3.0, 1.0).unwrap(), 1.0);
        // I_x(1,1) = x
        for &x in &[0.1, 0.3, 0.72, 0.99] {
            let v = regularized_incomplete_beta(1.0, 1.0, x).unwrap();
            assert!((v - x).abs() < 1e-14);
        }
        assert!(regularized_incomplete_beta(0.0, 1.0, 0.5).is_err());
        assert!(regularized_incomplete_beta(1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn beta_half_three_halves_closed_form() {
        // I_x(1/2, 3/2) = (2/pi)(asin(sqrt x) + sqrt(x(1-x)))
        for &x in &[0.01_f64, 0.1, 0.25, 0.5, 0.77, 0.95] {
            let expected =
                2.0 / std::f64::consts::PI * (x.sqrt().asin() + (x * (1.0 - x)).sqrt());
            let got = regularized_incomplete_beta(0.5, 1.5, x).unwrap();
            assert!(
                (got - expected).abs() < 1e-13,
                "I_{x}(0.5,1.5): {got} vs {expected}"
            );
        }
    }

    #[test]
    fn beta_integer_polynomial_closed_form() {
        // I_x(2,3) = 6x^2 - 8x^3 + 3x^4
        for &x in &[0.05, 0.2, 0.5, 0.8, 0.99] {
            let expected = 6.0 * x * x - 8.0 * x * x * x + 3.0 * x * x * x * x;
            let got = regularized_incomplete_beta(2.0, 3.0, x).unwrap();
            assert!((got - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn normal_cdf_center_and_quantile() {
        assert_eq!(normal_cdf(0.0), 0.5);
        // Bisect the CDF for p = 0.975 and compare against the published
        // two-sided 5% critical value.
        let (mut lo, mut hi) = (0.0_f64, 10.0_f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if normal_cdf(mid) < 0.975 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let q = 0.5 * (lo + hi);
        assert!((q - 1.959964).abs() < 1e-5, "q = {q}");
    }

    #[test]
    fn normal_cdf_far_tail_matches_asymptotic_expansion() {
        // phi(z)/|z| * (1 - 1/z^2 + 3/z^4) has relative error O(z^-6).
        let z = -7.77_f64;
        let phi = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let za = z.abs();
        let oracle = phi / za * (1.0 - 1.0 / (za * za) + 3.0 / (za * za * za * za));
        let got = normal_cdf(z);
        assert!(
            (got / oracle - 1.0).abs() < 1e-4,
            "tail at {z}: {got} vs {oracle}"
        );
        // Magnitude check against the hand-derived value.
        assert!((got / 3.92e-15 - 1.0).abs() < 5e-3);
    }

    #[test]
    fn normal_cdf_never_underflows_in_range() {
        for i in 0..=100 {
            let z = -10.0 + 0.2 * i as f64;
            let p = normal_cdf(z);
            assert!(p > 0.0 && p <= 1.0, "underflow at z={z}: {p}");
            if z <= 0.0 {
                // Lower-tail mass stays resolvable all the way down.
                assert!(p < 1.0);
            }
        }
        assert!(normal_cdf(-10.0) > 1e-24);
    }

    #[test]
    fn student_t_cdf_center_and_symmetry() {
        for df in [1, 2, 10, 79] {
            assert_eq!(student_t_cdf(0.0, df).unwrap(), 0.5);
        }
    }

    #[test]
    fn student_t_cdf_df1_matches_arctan_form() {
        for i in -50..=50 {
            let t = i as f64;
            let expected = 0.5 + t.atan() / std::f64::consts::PI;
            let got = student_t_cdf(t, 1).unwrap();
            assert!((got - expected).abs() < 1e-12, "df=1 at t={t}");
        }
    }

    #[test]
    fn student_t_cdf_df2_matches_algebraic_form() {
        for i in -50..=50 {
            let t = i as f64 + 0.25;
            let expected = 0.5 + t / (2.0 * (2.0 + t * t).sqrt());
            let got = student_t_cdf(t, 2).unwrap();
            assert!((got - expected).abs() < 1e-12, "df=2 at t={t}");
        }
        assert!((student_t_cdf(3.4641, 2).unwrap() - 0.9629).abs() < 5e-4);
    }

    #[test]
    fn student_t_far_tail_survival() {
        // Two-sided tail mass at the reconstructed paired-test statistic.
        let p = 2.0 * student_t_sf(11.428, 79).unwrap();
        assert!(p > 2.22e-18 / 1.5 && p < 2.22e-18 * 1.5, "p = {p:e}");
    }

    #[test]
    fn student_t_converges_to_normal() {
        for i in -30..=30 {
            let z = i as f64 / 10.0;
            let diff = (student_t_cdf(z, 1000).unwrap() - normal_cdf(z)).abs();
            assert!(diff < 1e-3, "df=1000 vs normal at z={z}: {diff}");
        }
    }

    #[test]
    fn student_t_quantile_known_values() {
        assert_eq!(student_t_quantile(0.5, 7).unwrap(), 0.0);
        let q = student_t_quantile(0.975, 79).unwrap();
        assert!((q - 1.9905).abs() < 5e-4, "q(0.975, 79) = {q}");
        // df=1 closed form: tan(pi (p - 1/2))
        let q = student_t_quantile(0.975, 1).unwrap();
        let expected = (std::f64::consts::PI * 0.475).tan();
        assert!((q - expected).abs() < 1e-8, "q(0.975, 1) = {q} vs {expected}");
        assert!((q - 12.7062).abs() < 1e-3);
    }

    #[test]
    fn student_t_quantile_inverts_cdf() {
        for df in [1u32, 2, 10, 79] {
            for i in 1..=999 {
                if i % 37 != 0 && i != 1 && i != 999 {
                    continue;
                }
                let p = i as f64 / 1000.0;
                let q = student_t_quantile(p, df).unwrap();
                let back = student_t_cdf(q, df).unwrap();
                assert!(
                    (back - p).abs() < 1e-9,
                    "df={df} p={p}: quantile {q} maps back to {back}"
                );
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(student_t_cdf(1.0, 0).is_err());
        assert!(student_t_cdf(f64::NAN, 5).is_err());
        assert!(student_t_quantile(0.0, 5).is_err());
        assert!(student_t_quantile(1.0, 5).is_err());
    }

    proptest! {
        #[test]
        fn normal_cdf_symmetry(z in -10.0..10.0f64) {
            let sum = normal_cdf(z) + normal_cdf(-z);
            prop_assert!((sum - 1.0).abs() < 1e-14);
        }

        #[test]
        fn beta_symmetry(a in 0.1..20.0f64, b in 0.1..20.0f64, x in 0.001..0.999f64) {
            let lhs = regularized_incomplete_beta(a, b, x).unwrap();
            let rhs = 1.0 - regularized_incomplete_beta(b, a, 1.0 - x).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn student_t_symmetry(t in -40.0..40.0f64, df in 1u32..200) {
            let lhs = student_t_cdf(-t, df).unwrap();
            let rhs = 1.0 - student_t_cdf(t, df).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
