//! Numerical checks of the support theorem for functions of exponential type:
//! an integrable entire function of type τ has `∫ e^{iax} f(x) dx = 0` for
//! every |a| > τ, the shifted-contour estimate behind it, and additivity of
//! type under multiplication.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bandlimited::{fourier_at, product, BandlimitedFunction};
use crate::error::{Error, Result};
use crate::quadrature;

/// Largest magnitude accepted as "zero" for truncated-domain quadrature.
pub const QUADRATURE_ZERO_TOL: f64 = 1e-6;
/// Slack allowed on the contour bound.
pub const BOUND_SLACK: f64 = 0.05;
/// Strip heights used by [`verify_lemma`] for its bound checks.
pub const LEMMA_GAMMAS: [f64; 3] = [1.0, 5.0, 10.0];

const PANEL_NODES: usize = 16;
const L1_REL_TOL: f64 = 1e-6;
const DIVERGENT_RATIO: f64 = 0.99;
const STRIP_LIMIT: f64 = 700.0;

/// One evaluation of the shifted-contour estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub gamma: f64,
    pub a: f64,
    pub measured: f64,
    pub bound: f64,
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        self.measured <= self.bound * (1.0 + BOUND_SLACK)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub tau: f64,
    pub frequencies: Vec<f64>,
    /// `|∫ e^{iax} f|` from the stored spectrum; literal zero beyond τ.
    pub structural_magnitudes: Vec<f64>,
    /// The same quantity by windowed quadrature over the real line.
    pub quadrature_magnitudes: Vec<f64>,
    pub l1_norm: f64,
    /// Window is flat on [−L, L] and tapers to zero at ±2L.
    pub window_half_width: f64,
    /// Fitted mass of |f| outside [−L, L].
    pub truncation_estimate: f64,
    pub bound_checks: Vec<BoundCheck>,
    pub structural_zero_tol: f64,
    pub quadrature_zero_tol: f64,
}

impl LemmaReport {
    pub fn structural_zero_beyond_type(&self) -> bool {
        self.outside().all(|i| self.structural_magnitudes[i] == 0.0)
    }

    pub fn quadrature_zero_beyond_type(&self) -> bool {
        self.outside().all(|i| self.quadrature_magnitudes[i] <= self.quadrature_zero_tol)
    }

    pub fn bounds_hold(&self) -> bool {
        self.bound_checks.iter().all(BoundCheck::holds)
    }

    pub fn passed(&self) -> bool {
        self.structural_zero_beyond_type() && self.quadrature_zero_beyond_type() && self.bounds_hold()
    }

    fn outside(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.frequencies.len()).filter(move |&i| self.frequencies[i].abs() > self.tau)
    }
}

/// `count` equally spaced frequencies on (0, 3τ], avoiding τ itself.
pub fn standard_frequencies(tau: f64, count: usize) -> Vec<f64> {
    (1..=count)
        .map(|j| 3.0 * tau * (j as f64 - 0.5) / count as f64)
        .collect()
}

/// Checks that the transform vanishes beyond the type, both structurally and
/// by quadrature, and evaluates the contour bound at each such frequency for
/// the strip heights in [`LEMMA_GAMMAS`].
pub fn verify_lemma(f: &BandlimitedFunction, freq_grid: &[f64]) -> Result<LemmaReport> {
    if freq_grid.is_empty() || freq_grid.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidParameter("frequency grid must be non-empty and finite".into()));
    }
    if freq_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("frequency grid must be strictly increasing".into()));
    }
    let tau = f.kappa();
    let l1 = l1_norm(f)?;
    let structural = freq_grid.iter().map(|&a| fourier_at(f, -a).norm()).collect();
    let window = Window::for_frequencies(tau, freq_grid);
    let quadrature_magnitudes = window.transform(f, 0.0, freq_grid)?.into_iter().map(|z| z.norm()).collect();

    let outside: Vec<f64> = freq_grid.iter().copied().filter(|a| a.abs() > tau).collect();
    let mut bound_checks = Vec::new();
    if !outside.is_empty() {
        for &gamma in &LEMMA_GAMMAS {
            let measured = window.contour(f, gamma, &outside)?;
            for (&a, m) in outside.iter().zip(measured) {
                bound_checks.push(BoundCheck { gamma, a, measured: m, bound: contour_bound(l1.value, tau, a, gamma) });
            }
        }
    }
    Ok(LemmaReport {
        tau,
        frequencies: freq_grid.to_vec(),
        structural_magnitudes: structural,
        quadrature_magnitudes,
        l1_norm: l1.value,
        window_half_width: window.half_width,
        truncation_estimate: l1.tail_beyond(window.half_width),
        bound_checks,
        structural_zero_tol: 0.0,
        quadrature_zero_tol: QUADRATURE_ZERO_TOL,
    })
}

/// For each γ: `measured = e^{−aγ} |∫ e^{iax} f(x + iγ) dx|` and
/// `bound = M e^{−γ(a − τ)}` with M the L¹ norm of f on the real line.
pub fn verify_contour_bound(f: &BandlimitedFunction, a: f64, gammas: &[f64]) -> Result<Vec<BoundCheck>> {
    let tau = f.kappa();
    if !(a.abs() > tau) {
        return Err(Error::InvalidParameter(format!("frequency {a} must exceed the type {tau}")));
    }
    if gammas.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
        return Err(Error::InvalidParameter("strip heights must be positive".into()));
    }
    let l1 = l1_norm(f)?;
    let window = Window::for_frequencies(tau, &[a]);
    gammas
        .iter()
        .map(|&gamma| {
            let measured = window.contour(f, gamma, &[a])?[0];
            Ok(BoundCheck { gamma, a, measured, bound: contour_bound(l1.value, tau, a, gamma) })
        })
        .collect()
}

fn contour_bound(m: f64, tau: f64, a: f64, gamma: f64) -> f64 {
    m * (-gamma * (a.abs() - tau)).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductTypeReport {
    pub kappa_f: f64,
    pub kappa_g: f64,
    pub kappa_product: f64,
    /// Frequencies sampled in (κ_f+κ_g, 2(κ_f+κ_g)] with their magnitudes.
    pub outside: Vec<(f64, f64)>,
    pub max_inside_magnitude: f64,
    /// Largest |h(x) − f(x)g(x)| over sample points, relative to max |f g|.
    pub pointwise_deviation: f64,
}

impl ProductTypeReport {
    pub fn support_additive(&self) -> bool {
        self.kappa_product == self.kappa_f + self.kappa_g
    }

    pub fn zero_outside(&self) -> bool {
        self.outside.iter().all(|&(_, m)| m == 0.0)
    }

    pub fn nonzero_inside(&self) -> bool {
        self.max_inside_magnitude > 1e-10
    }

    pub fn passed(&self) -> bool {
        self.support_additive() && self.zero_outside() && self.nonzero_inside() && self.pointwise_deviation <= 1e-8
    }
}

pub fn verify_product_type(f: &BandlimitedFunction, g: &BandlimitedFunction) -> Result<ProductTypeReport> {
    let h = product(f, g)?;
    let sum = f.kappa() + g.kappa();
    let outside = (1..=16)
        .flat_map(|j| {
            let a = sum * (1.0 + j as f64 / 16.0);
            [a, -a]
        })
        .map(|a| (a, fourier_at(&h, a).norm()))
        .collect();
    let max_inside_magnitude = (-15..=15)
        .map(|j| fourier_at(&h, sum * j as f64 / 16.0).norm())
        .fold(0.0, f64::max);
    let step = 0.53 / sum;
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for j in -40i32..=40 {
        let x = step * j as f64;
        let direct = f.evaluate(x) * g.evaluate(x);
        worst = worst.max((h.evaluate(x) - direct).norm());
        scale = scale.max(direct.norm());
    }
    Ok(ProductTypeReport {
        kappa_f: f.kappa(),
        kappa_g: g.kappa(),
        kappa_product: h.kappa(),
        outside,
        max_inside_magnitude,
        pointwise_deviation: worst / scale.max(f64::MIN_POSITIVE),
    })
}

/// Real-line L¹ norm together with the fitted power-law tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Estimate {
    pub value: f64,
    /// Decay exponent p of the fitted envelope `C |x|^{−p}`.
    pub exponent: f64,
    /// Fitted tail mass beyond the last integrated half-width.
    pub tail: f64,
    pub half_width: f64,
}

impl L1Estimate {
    /// Fitted mass of |f| outside [−x, x].
    pub fn tail_beyond(&self, x: f64) -> f64 {
        self.tail * (self.half_width / x).powf(self.exponent - 1.0)
    }
}

/// `∫ |f(x)| dx` by doubling the domain and extrapolating the remaining
/// tail from the ratio of successive shell masses. Fails when the shells stop
/// shrinking fast enough for the integral to converge.
pub fn l1_norm(f: &BandlimitedFunction) -> Result<L1Estimate> {
    let kappa = f.kappa();
    let panel = 0.5 * PI / kappa;
    let mut half = 32.0 * PI / kappa;
    let abs_f = |x: f64| f.value(x).norm();
    let mut raw = integrate_abs(&abs_f, -half, half, panel);
    let mut prev_shell = f64::NAN;
    let mut prev_total = f64::NAN;
    for _ in 0..24 {
        let next = 2.0 * half;
        let shell = integrate_abs(&abs_f, half, next, panel) + integrate_abs(&abs_f, -next, -half, panel);
        raw += shell;
        half = next;
        if !(shell > 0.0) {
            return Ok(L1Estimate { value: raw, exponent: f64::INFINITY, tail: 0.0, half_width: half });
        }
        if prev_shell.is_finite() {
            let r = shell / prev_shell;
            if r >= DIVERGENT_RATIO {
                return Err(Error::HypothesisViolation(format!(
                    "|f| tail shells shrink by only {r:.4} per doubling at |x| = {half:.1}; f is not integrable"
                )));
            }
            let tail = shell * r / (1.0 - r);
            let total = raw + tail;
            let exponent = 1.0 - r.log2();
            if prev_total.is_finite() && (total - prev_total).abs() <= L1_REL_TOL * total {
                return Ok(L1Estimate { value: total, exponent, tail, half_width: half });
            }
            prev_total = total;
        }
        prev_shell = shell;
    }
    Err(Error::HypothesisViolation(format!(
        "L¹ norm did not settle to {L1_REL_TOL:e} by |x| = {half:.1}"
    )))
}

fn integrate_abs(g: &impl Fn(f64) -> f64, a: f64, b: f64, panel: f64) -> f64 {
    let rule = quadrature::composite(&[a, b], PANEL_NODES, panel);
    rule.integrate(g)
}

/// Smooth window equal to one on [−L, L] and vanishing beyond ±2L.
struct Window {
    half_width: f64,
    max_freq: f64,
}

impl Window {
    fn for_frequencies(tau: f64, freqs: &[f64]) -> Self {
        let gap = freqs
            .iter()
            .map(|a| (a.abs() - tau).abs())
            .filter(|&d| d > 0.0)
            .fold(tau, f64::min);
        let half_width = (100.0 / gap).max(64.0 * PI / tau).min(2.0e4 / tau.min(1.0));
        let max_freq = freqs.iter().fold(0.0f64, |m, a| m.max(a.abs())) + tau;
        Window { half_width, max_freq }
    }

    fn weight(&self, x: f64) -> f64 {
        let t = (x.abs() - self.half_width) / self.half_width;
        if t <= 0.0 {
            1.0
        } else if t >= 1.0 {
            0.0
        } else {
            let bump = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
            let (u, v) = (bump(1.0 - t), bump(t));
            u / (u + v)
        }
    }

    fn rule(&self) -> quadrature::Rule {
        let edge = 2.0 * self.half_width;
        quadrature::composite(&[-edge, edge], PANEL_NODES, 2.0 / self.max_freq.max(1e-3))
    }

    /// `∫ w(x) e^{iax} f(x + iγ) dx` for each frequency.
    fn transform(&self, f: &BandlimitedFunction, gamma: f64, freqs: &[f64]) -> Result<Vec<Complex64>> {
        if gamma.abs() * f.kappa() > STRIP_LIMIT {
            return Err(Error::Range(format!(
                "strip height {gamma} overflows the growth factor e^{{κγ}} (κ = {})",
                f.kappa()
            )));
        }
        let rule = self.rule();
        let samples: Vec<(f64, Complex64)> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| (x, f.continuum_value(Complex64::new(x, gamma)) * (w * self.weight(x))))
            .collect();
        if samples.iter().any(|(_, v)| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Range(format!("non-finite values of f on the line Im z = {gamma}")));
        }
        Ok(freqs
            .iter()
            .map(|&a| {
                samples
                    .iter()
                    .fold(Complex64::new(0.0, 0.0), |acc, &(x, v)| acc + v * Complex64::from_polar(1.0, a * x))
            })
            .collect())
    }

    fn contour(&self, f: &BandlimitedFunction, gamma: f64, freqs: &[f64]) -> Result<Vec<f64>> {
        let raw = self.transform(f, gamma, freqs)?;
        Ok(freqs
            .iter()
            .zip(raw)
            .map(|(&a, z)| (-a.abs() * gamma).exp() * z.norm())
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandlimited::{conjugate, make_fejer, make_gamma_reciprocal};

    #[test]
    fn fejer_l1_norm_matches_closed_form() {
        let f = make_fejer(1.0, 128).unwrap();
        let c = (3.0 / (4.0 * PI)).sqrt();
        let est = l1_norm(&f).unwrap();
        assert!((est.value - 2.0 * PI * c).abs() < 1e-5, "{}", est.value);
        assert!((est.exponent - 2.0).abs() < 0.05);
    }

    #[test]
    fn fejer_lemma_grid_is_zero_beyond_type() {
        let f = make_fejer(1.0, 128).unwrap();
        let report = verify_lemma(&f, &[1.1, 1.5, 2.0, 3.0]).unwrap();
        assert!(report.structural_magnitudes.iter().all(|&m| m == 0.0));
        assert!(report.quadrature_magnitudes.iter().all(|&m| m <= 1e-6), "{:?}", report.quadrature_magnitudes);
        assert!(report.passed());
    }

    #[test]
    fn quadrature_matches_structure_inside_support() {
        let f = make_fejer(1.0, 128).unwrap();
        let report = verify_lemma(&f, &[-0.77, -0.31, 0.23, 0.58, 0.91]).unwrap();
        for (s, q) in report.structural_magnitudes.iter().zip(&report.quadrature_magnitudes) {
            assert!((s - q).abs() < 1e-6, "{s} vs {q}");
        }
    }

    #[test]
    fn gamma_reciprocal_transform_vanishes_past_pi() {
        let f = make_gamma_reciprocal(2.0, 1.0).unwrap();
        let report = verify_lemma(&f, &[0.0, 1.2 * PI]).unwrap();
        let peak = report.quadrature_magnitudes[0];
        assert!(report.quadrature_magnitudes[1] <= 1e-6 * peak);
        assert_eq!(report.structural_magnitudes[1], 0.0);
    }

    #[test]
    fn contour_bound_examples() {
        let f = make_fejer(1.0, 128).unwrap();
        let checks = verify_contour_bound(&f, 2.0, &[1.0, 2.0, 4.0, 5.0, 8.0, 20.0]).unwrap();
        assert!(checks.iter().all(BoundCheck::holds));
        let m: Vec<f64> = checks.iter().map(|c| c.measured).collect();
        assert!(m[0] > m[1] && m[1] > m[2] && m[2] > m[4]);
        assert!(m[5] <= 1e-7);
        assert!(matches!(verify_contour_bound(&f, 0.5, &[1.0]), Err(Error::InvalidParameter(_))));
        assert!(matches!(verify_contour_bound(&f, 2.0, &[800.0]), Err(Error::Range(_))));
    }

    #[test]
    fn product_type_examples() {
        let one = make_fejer(1.0, 64).unwrap();
        let half = make_fejer(0.5, 64).unwrap();
        let r = verify_product_type(&one, &half).unwrap();
        assert_eq!(r.kappa_product, 1.5);
        assert!(r.passed());
        let h = product(&one, &one).unwrap();
        assert!(fourier_at(&h, 1.9).norm() > 1e-10);
        let auto = verify_product_type(&one, &conjugate(&one).unwrap()).unwrap();
        assert_eq!(auto.kappa_product, 2.0);
        assert!(auto.zero_outside());
    }

    #[test]
    fn rejects_unordered_grid() {
        let f = make_fejer(1.0, 64).unwrap();
        assert!(verify_lemma(&f, &[2.0, 1.5]).is_err());
    }

    #[test]
    fn report_round_trips_through_json() {
        let f = make_fejer(1.0, 64).unwrap();
        let report = verify_lemma(&f, &[0.5, 2.0]).unwrap();
        let back: LemmaReport = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
        assert_eq!(back, report);
    }
}
