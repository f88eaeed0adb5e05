//! Univariate Gaussian discriminant baselines scored by plug-in EPE.

use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::estimator::OperatingCondition;
use crate::rational::to_f64;

/// Class means and maximum-likelihood variances of one variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianFit {
    pub mean0: f64,
    pub mean1: f64,
    pub var0: f64,
    pub var1: f64,
    /// `(n0*var0 + n1*var1) / n`.
    pub pooled_var: f64,
}

impl GaussianFit {
    pub fn fit(values: &[f64], labels: &[u8]) -> Result<Self> {
        if values.len() != labels.len() {
            return Err(Error::InvalidSample(format!(
                "{} values for {} labels",
                values.len(),
                labels.len()
            )));
        }
        let (mut s, mut c) = ([0.0f64; 2], [0usize; 2]);
        for (&x, &y) in values.iter().zip(labels) {
            let k = (y == 1) as usize;
            s[k] += x;
            c[k] += 1;
        }
        if c[0] == 0 || c[1] == 0 {
            return Err(Error::SingleClassSample);
        }
        let mean = [s[0] / c[0] as f64, s[1] / c[1] as f64];
        let mut ss = [0.0f64; 2];
        for (&x, &y) in values.iter().zip(labels) {
            let k = (y == 1) as usize;
            ss[k] += (x - mean[k]).powi(2);
        }
        Ok(GaussianFit {
            mean0: mean[0],
            mean1: mean[1],
            var0: ss[0] / c[0] as f64,
            var1: ss[1] / c[1] as f64,
            pooled_var: (ss[0] + ss[1]) / (c[0] + c[1]) as f64,
        })
    }
}

fn normal_cdf(x: f64, mean: f64, var: f64) -> f64 {
    0.5 * erfc(-(x - mean) / (2.0 * var).sqrt())
}

/// Class weights `(c0*pi0, c1*pi1)` as floats.
fn weights(oc: &OperatingCondition) -> (f64, f64) {
    (to_f64(&oc.negative_weight()), to_f64(&oc.positive_weight()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdaScore {
    pub threshold: f64,
    /// Positive region is `[threshold, inf)` if true, `(-inf, threshold)` otherwise.
    pub positive_above: bool,
    pub plugin_epe: f64,
    /// No usable boundary; the score is that of the trivial classifier.
    pub degenerate: bool,
}

pub fn lda_from_fit(fit: &GaussianFit, oc: &OperatingCondition) -> LdaScore {
    let (w0, w1) = weights(oc);
    let diff = fit.mean1 - fit.mean0;
    if !(fit.pooled_var > 0.0) || diff == 0.0 || !diff.is_finite() {
        return LdaScore {
            threshold: f64::NAN,
            positive_above: true,
            plugin_epe: w0.min(w1),
            degenerate: true,
        };
    }
    let s2 = fit.pooled_var;
    let t = 0.5 * (fit.mean0 + fit.mean1) + s2 * (w0 / w1).ln() / diff;
    let above = diff > 0.0;
    let (f0, f1) = (normal_cdf(t, fit.mean0, s2), normal_cdf(t, fit.mean1, s2));
    let epe = if above {
        w0 * (1.0 - f0) + w1 * f1
    } else {
        w0 * f0 + w1 * (1.0 - f1)
    };
    LdaScore {
        threshold: t,
        positive_above: above,
        plugin_epe: epe,
        degenerate: false,
    }
}

pub fn lda_score(values: &[f64], labels: &[u8], oc: &OperatingCondition) -> Result<LdaScore> {
    Ok(lda_from_fit(&GaussianFit::fit(values, labels)?, oc))
}

/// Positive region of a quadratic boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Empty,
    All,
    /// `[t, inf)` or `(-inf, t)`.
    HalfLine { threshold: f64, positive_above: bool },
    Interval { lo: f64, hi: f64 },
    Complement { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QdaScore {
    pub region: Region,
    pub plugin_epe: f64,
    pub degenerate: bool,
}

pub fn qda_from_fit(fit: &GaussianFit, oc: &OperatingCondition) -> QdaScore {
    let (w0, w1) = weights(oc);
    let (m0, m1, v0, v1) = (fit.mean0, fit.mean1, fit.var0, fit.var1);

    if v0 == v1 {
        let lda = lda_from_fit(fit, oc);
        let region = if lda.degenerate {
            if w1 > w0 {
                Region::All
            } else {
                Region::Empty
            }
        } else {
            Region::HalfLine {
                threshold: lda.threshold,
                positive_above: lda.positive_above,
            }
        };
        return QdaScore {
            region,
            plugin_epe: lda.plugin_epe,
            degenerate: lda.degenerate,
        };
    }
    if !(v0 > 0.0) || !(v1 > 0.0) {
        return degenerate_qda(fit, w0, w1);
    }

    // g(x) = ln(w1 f1(x)) - ln(w0 f0(x)) = a x^2 + b x + c; positive where g > 0
    let a = 0.5 / v0 - 0.5 / v1;
    let b = m1 / v1 - m0 / v0;
    let c = m0 * m0 / (2.0 * v0) - m1 * m1 / (2.0 * v1) + (w1 / w0).ln() + 0.5 * (v0 / v1).ln();
    let disc = b * b - 4.0 * a * c;
    let mass = |lo: f64, hi: f64, m: f64, v: f64| normal_cdf(hi, m, v) - normal_cdf(lo, m, v);
    if disc <= 0.0 {
        return if a > 0.0 {
            QdaScore {
                region: Region::All,
                plugin_epe: w0,
                degenerate: false,
            }
        } else {
            QdaScore {
                region: Region::Empty,
                plugin_epe: w1,
                degenerate: false,
            }
        };
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = (q / a, c / q);
    let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
    let (inner0, inner1) = (mass(lo, hi, m0, v0), mass(lo, hi, m1, v1));
    if a > 0.0 {
        QdaScore {
            region: Region::Complement { lo, hi },
            plugin_epe: w0 * (1.0 - inner0) + w1 * inner1,
            degenerate: false,
        }
    } else {
        QdaScore {
            region: Region::Interval { lo, hi },
            plugin_epe: w0 * inner0 + w1 * (1.0 - inner1),
            degenerate: false,
        }
    }
}

/// One class has zero fitted variance: the best half-line bounded at that
/// class's mean.
fn degenerate_qda(fit: &GaussianFit, w0: f64, w1: f64) -> QdaScore {
    let (m0, m1, v0, v1) = (fit.mean0, fit.mean1, fit.var0, fit.var1);
    let candidates: Vec<(Region, f64)> = if v1 == 0.0 && v0 > 0.0 {
        // positives sit on a point; keep it inside the positive half-line
        let f = normal_cdf(m1, m0, v0);
        vec![
            (Region::HalfLine { threshold: m1, positive_above: true }, w0 * (1.0 - f)),
            (Region::HalfLine { threshold: m1, positive_above: false }, w0 * f),
        ]
    } else if v0 == 0.0 && v1 > 0.0 {
        let f = normal_cdf(m0, m1, v1);
        vec![
            (Region::HalfLine { threshold: m0, positive_above: true }, w1 * f),
            (Region::HalfLine { threshold: m0, positive_above: false }, w1 * (1.0 - f)),
        ]
    } else if m0 != m1 {
        vec![(
            Region::HalfLine {
                threshold: 0.5 * (m0 + m1),
                positive_above: m1 > m0,
            },
            0.0,
        )]
    } else {
        vec![(if w1 > w0 { Region::All } else { Region::Empty }, w0.min(w1))]
    };
    let (region, plugin_epe) = candidates
        .into_iter()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("nonempty");
    QdaScore {
        region,
        plugin_epe,
        degenerate: true,
    }
}

pub fn qda_score(values: &[f64], labels: &[u8], oc: &OperatingCondition) -> Result<QdaScore> {
    Ok(qda_from_fit(&GaussianFit::fit(values, labels)?, oc))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oc(c0: i64, c1: i64) -> OperatingCondition {
        OperatingCondition::from_ints(c0, c1, 1, 2)
    }

    fn fit(m0: f64, m1: f64, v0: f64, v1: f64) -> GaussianFit {
        GaussianFit {
            mean0: m0,
            mean1: m1,
            var0: v0,
            var1: v1,
            pooled_var: 0.5 * (v0 + v1),
        }
    }

    #[test]
    fn lda_boundaries() {
        let s = lda_from_fit(&fit(0.0, 1.0, 1.0, 1.0), &oc(1, 1));
        assert!((s.threshold - 0.5).abs() < 1e-15);
        assert!(s.positive_above);
        let s = lda_from_fit(&fit(0.0, 1.0, 1.0, 1.0), &oc(1, 2));
        assert!((s.threshold - (0.5 - 2f64.ln())).abs() < 1e-12);
        assert!((s.threshold + 0.1931).abs() < 1e-4);
        let s = lda_from_fit(&fit(1.0, 0.0, 1.0, 1.0), &oc(1, 1));
        assert!(!s.positive_above);
    }

    #[test]
    fn lda_degenerate() {
        let s = lda_from_fit(&fit(2.0, 2.0, 1.0, 1.0), &oc(1, 2));
        assert!(s.degenerate);
        assert_eq!(s.plugin_epe, 0.5);
    }

    #[test]
    fn lda_shift_invariance() {
        let labels = [0, 0, 0, 1, 1, 1];
        let x = [0.3, -1.2, 0.8, 1.9, 0.4, 2.2];
        let shifted: Vec<f64> = x.iter().map(|v| v + 10.0).collect();
        let a = lda_score(&x, &labels, &oc(1, 3)).unwrap();
        let b = lda_score(&shifted, &labels, &oc(1, 3)).unwrap();
        assert!((b.threshold - a.threshold - 10.0).abs() < 1e-9);
        assert!((a.plugin_epe - b.plugin_epe).abs() < 1e-9);
    }

    #[test]
    fn fit_uses_mle_variances() {
        let f = GaussianFit::fit(&[0.0, 2.0, 1.0, 5.0], &[0, 0, 1, 1]).unwrap();
        assert_eq!((f.mean0, f.mean1, f.var0, f.var1), (1.0, 3.0, 1.0, 4.0));
        assert_eq!(f.pooled_var, 2.5);
    }

    #[test]
    fn qda_equal_variances_is_lda() {
        let f = fit(0.2, 1.7, 0.8, 0.8);
        for o in [oc(1, 1), oc(1, 3), oc(4, 1)] {
            let l = lda_from_fit(&f, &o);
            let q = qda_from_fit(&f, &o);
            assert_eq!(
                q.region,
                Region::HalfLine {
                    threshold: l.threshold,
                    positive_above: true
                }
            );
            assert_eq!(q.plugin_epe, l.plugin_epe);
        }
    }

    #[test]
    fn qda_interval_matches_bisection() {
        let f = fit(0.0, 0.0, 1.0, 0.25);
        let o = oc(1, 1);
        let q = qda_from_fit(&f, &o);
        let Region::Interval { lo, hi } = q.region else {
            panic!("expected interval, got {:?}", q.region)
        };
        assert!((lo + hi).abs() < 1e-12);
        // independent root of ln f1 - ln f0 on (0, 5)
        let g = |x: f64| {
            let l1 = -0.5 * (x * x) / 0.25 - 0.5 * 0.25f64.ln();
            let l0 = -0.5 * x * x;
            l1 - l0
        };
        let (mut a, mut b) = (0.0, 5.0);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if g(m) > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        assert!((hi - a).abs() < 1e-12);
    }

    #[test]
    fn qda_dominance_gives_whole_line() {
        // f1 wide and heavily weighted; no real roots
        let f = fit(0.0, 0.0, 1.0, 1.1);
        let q = qda_from_fit(&f, &oc(1, 100));
        assert_eq!(q.region, Region::All);
        assert_eq!(q.plugin_epe, 0.5);
    }

    #[test]
    fn qda_zero_variance_uses_half_line_at_mean() {
        let q = qda_from_fit(&fit(0.0, 1.0, 1.0, 0.0), &oc(1, 1));
        assert!(q.degenerate);
        assert_eq!(
            q.region,
            Region::HalfLine {
                threshold: 1.0,
                positive_above: true
            }
        );
        assert!((q.plugin_epe - 0.5 * (1.0 - normal_cdf(1.0, 0.0, 1.0))).abs() < 1e-15);
    }
}
