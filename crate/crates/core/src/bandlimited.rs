//! Momentum-limited wavefunctions with certified compact spectral support.
//!
//! Convention used throughout the crate:
//!
//! ```text
//! ψ(x) = ∫_{−κ}^{κ} e^{ixk} ψ̃(k) dk,      ∫ e^{iax} ψ(x) dx = 2π ψ̃(−a),
//! ∫ |ψ(x)|² dx = 2π ∫ |ψ̃(k)|² dk.
//! ```
//!
//! A [`Spectrum`] stores ψ̃ on Gauss–Legendre panels whose breakpoints sit on
//! the kinks of ψ̃. The discrete sum `Σ w_j e^{ixk_j} ψ̃(k_j)` is itself a finite
//! exponential sum, so support outside [−κ, κ] is structural: every Fourier
//! value beyond the certified half-width is returned as a literal zero.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, Rule};
use crate::special;

const NORMALIZATION_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-10;
const STRIP_LIMIT: f64 = 700.0;

/// Sampled spectral amplitude on [−κ, κ].
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    kappa: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    amps: Vec<Complex64>,
    breaks: Vec<f64>,
    normalized: bool,
    panels: Vec<Panel>,
}

#[derive(Debug, Clone, PartialEq)]
struct Panel {
    lo: f64,
    hi: f64,
    start: usize,
    end: usize,
    bary: Vec<f64>,
}

impl Spectrum {
    /// Builds a spectrum from raw arrays. `breaks` are panel boundaries; when
    /// empty the whole interval is one panel.
    pub fn new(
        kappa: f64,
        nodes: Vec<f64>,
        weights: Vec<f64>,
        amps: Vec<Complex64>,
        breaks: Vec<f64>,
    ) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "spectral half-width must be positive, got {kappa}"
            )));
        }
        let n = nodes.len();
        if n < 2 || weights.len() != n || amps.len() != n {
            return Err(Error::InvalidParameter(format!(
                "nodes/weights/amps must have equal length >= 2 (got {}, {}, {})",
                n,
                weights.len(),
                amps.len()
            )));
        }
        let slack = 1e-12 * kappa;
        if nodes.iter().any(|&k| !(k >= -kappa - slack && k <= kappa + slack)) {
            return Err(Error::InvalidParameter(format!(
                "spectral nodes must lie in [-{kappa}, {kappa}]"
            )));
        }
        if nodes.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter("spectral nodes must be ordered".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter("quadrature weights must be strictly positive".into()));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidParameter("spectral amplitudes must be finite".into()));
        }
        let breaks = if breaks.is_empty() { vec![-kappa, kappa] } else { breaks };
        if breaks.windows(2).any(|w| w[1] <= w[0])
            || (breaks[0] + kappa).abs() > slack
            || (breaks[breaks.len() - 1] - kappa).abs() > slack
        {
            return Err(Error::InvalidParameter(
                "panel breaks must increase from -kappa to kappa".into(),
            ));
        }
        let panels = build_panels(&nodes, &breaks)?;
        let mut s = Spectrum { kappa, nodes, weights, amps, breaks, normalized: false, panels };
        s.normalized = (s.norm_sq() - 1.0).abs() <= NORMALIZATION_TOL;
        Ok(s)
    }

    /// Samples `amp` on Gauss–Legendre panels delimited by `breaks`.
    pub fn from_fn<F>(kappa: f64, breaks: &[f64], nodes_per_panel: usize, amp: F) -> Result<Self>
    where
        F: Fn(f64) -> Complex64,
    {
        let rule = quadrature::composite(breaks, nodes_per_panel, f64::INFINITY);
        let amps = rule.nodes.iter().map(|&k| amp(k)).collect();
        Spectrum::new(kappa, rule.nodes, rule.weights, amps, breaks.to_vec())
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Largest node count of any panel.
    pub fn max_panel_nodes(&self) -> usize {
        self.panels.iter().map(|p| p.end - p.start).max().unwrap_or(0)
    }

    /// `2π Σ_j w_j |ψ̃(k_j)|²`, the squared L² norm of the position function.
    pub fn norm_sq(&self) -> f64 {
        2.0 * PI
            * self
                .weights
                .iter()
                .zip(&self.amps)
                .map(|(w, a)| w * a.norm_sqr())
                .sum::<f64>()
    }

    /// `Σ_j w_j |ψ̃(k_j)|`, the spectral L¹ norm bounding |ψ(z)| e^{−κ|Im z|}.
    pub fn l1_norm(&self) -> f64 {
        self.weights.iter().zip(&self.amps).map(|(w, a)| w * a.norm()).sum()
    }

    /// Rescales amplitudes so that the position function has unit L² norm.
    pub fn normalize(mut self) -> Result<Self> {
        let n2 = self.norm_sq();
        if !(n2 > 0.0 && n2.is_finite()) {
            return Err(Error::Normalization(format!("cannot normalize spectrum with norm² {n2}")));
        }
        let s = 1.0 / n2.sqrt();
        for a in &mut self.amps {
            *a *= s;
        }
        self.normalized = (self.norm_sq() - 1.0).abs() <= NORMALIZATION_TOL;
        Ok(self)
    }

    /// Piecewise-polynomial interpolant of ψ̃; zero outside [−κ, κ].
    pub fn amplitude_at(&self, k: f64) -> Complex64 {
        if k < -self.kappa || k > self.kappa {
            return Complex64::new(0.0, 0.0);
        }
        let idx = self.panels.partition_point(|p| p.hi < k).min(self.panels.len() - 1);
        let p = &self.panels[idx];
        let nodes = &self.nodes[p.start..p.end];
        let vals = &self.amps[p.start..p.end];
        if nodes.len() == 1 {
            return vals[0];
        }
        quadrature::barycentric_eval(nodes, &p.bary, vals, k)
    }

    /// A quadrature rule over [−κ, κ] fine enough for integrands carrying a
    /// phase `e^{iηk}` with |η| ≤ `max_freq`, together with interpolated
    /// amplitudes at its nodes. Returns the stored samples when no panel needs
    /// splitting.
    pub fn fine_rule(&self, max_freq: f64) -> (Rule, Vec<Complex64>) {
        let needs_split = self
            .panels
            .iter()
            .any(|p| (p.hi - p.lo) * max_freq > 0.5 * (p.end - p.start) as f64);
        if !needs_split {
            return (
                Rule { nodes: self.nodes.clone(), weights: self.weights.clone() },
                self.amps.clone(),
            );
        }
        let rule = quadrature::panel_rule(&self.breaks, self.max_panel_nodes(), max_freq);
        let amps = rule.nodes.iter().map(|&k| self.amplitude_at(k)).collect();
        (rule, amps)
    }

    fn map(&self, kappa: f64, node: impl Fn(f64) -> f64, weight_scale: f64, amp: impl Fn(f64, Complex64) -> Complex64) -> Result<Self> {
        let mut triples: Vec<(f64, f64, Complex64)> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .zip(&self.amps)
            .map(|((&k, &w), &a)| (node(k), w * weight_scale, amp(k, a)))
            .collect();
        triples.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut breaks: Vec<f64> = self.breaks.iter().map(|&b| node(b)).collect();
        breaks.sort_by(f64::total_cmp);
        let (nodes, rest): (Vec<f64>, Vec<(f64, Complex64)>) =
            triples.into_iter().map(|(k, w, a)| (k, (w, a))).unzip();
        let (weights, amps) = rest.into_iter().unzip();
        Spectrum::new(kappa, nodes, weights, amps, breaks)
    }
}

fn build_panels(nodes: &[f64], breaks: &[f64]) -> Result<Vec<Panel>> {
    let mut panels = Vec::with_capacity(breaks.len() - 1);
    let mut start = 0;
    let last = breaks.len() - 2;
    for (i, pair) in breaks.windows(2).enumerate() {
        let (lo, hi) = (pair[0], pair[1]);
        let mut end = start;
        while end < nodes.len() && (nodes[end] <= hi || i == last) {
            end += 1;
        }
        if end == start {
            return Err(Error::InvalidParameter(format!(
                "spectral panel [{lo}, {hi}] holds no nodes"
            )));
        }
        let bary = quadrature::barycentric_weights(&nodes[start..end]);
        panels.push(Panel { lo, hi, start, end, bary });
        start = end;
    }
    Ok(panels)
}

/// JSON form `{kappa, nodes[], weights[], re[], im[], breaks[]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub kappa: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub breaks: Vec<f64>,
}

impl From<&Spectrum> for SpectrumRecord {
    fn from(s: &Spectrum) -> Self {
        SpectrumRecord {
            kappa: s.kappa,
            nodes: s.nodes.clone(),
            weights: s.weights.clone(),
            re: s.amps.iter().map(|a| a.re).collect(),
            im: s.amps.iter().map(|a| a.im).collect(),
            breaks: s.breaks.clone(),
        }
    }
}

impl TryFrom<SpectrumRecord> for Spectrum {
    type Error = Error;

    fn try_from(r: SpectrumRecord) -> Result<Self> {
        if r.re.len() != r.im.len() {
            return Err(Error::InvalidParameter("re/im arrays differ in length".into()));
        }
        let amps = r.re.iter().zip(&r.im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        Spectrum::new(r.kappa, r.nodes, r.weights, amps, r.breaks)
    }
}

impl Serialize for Spectrum {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SpectrumRecord::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Spectrum {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let r = SpectrumRecord::deserialize(deserializer)?;
        Spectrum::try_from(r).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reality {
    RealValued,
    ComplexValued,
}

/// Where a function came from; used for the high-accuracy continuum value.
#[derive(Debug, Clone, PartialEq)]
pub enum Origin {
    /// `c · 2(1 − cos κx)/(κx²)`, spectrum `c(1 − |k|/κ)`.
    Fejer { kappa: f64, scale: f64 },
    /// `scale / (Γ(g_a + g_b x) Γ(g_a − g_b x))`.
    GammaReciprocal { g_a: f64, g_b: f64, scale: f64 },
    Translated { inner: Box<BandlimitedFunction>, shift: f64 },
    Conjugated(Box<BandlimitedFunction>),
    Product(Box<BandlimitedFunction>, Box<BandlimitedFunction>),
    /// Only the sampled spectrum is known.
    Sampled,
}

/// A momentum-limited function together with its declared symmetries.
#[derive(Debug, Clone, PartialEq)]
pub struct BandlimitedFunction {
    spectrum: Spectrum,
    parity: Parity,
    reality: Reality,
    origin: Origin,
}

impl BandlimitedFunction {
    /// Wraps a spectrum, verifying the declared parity and reality by
    /// sampling the position function.
    pub fn new(spectrum: Spectrum, parity: Parity, reality: Reality) -> Result<Self> {
        Self::with_origin(spectrum, parity, reality, Origin::Sampled)
    }

    fn with_origin(spectrum: Spectrum, parity: Parity, reality: Reality, origin: Origin) -> Result<Self> {
        let f = BandlimitedFunction { spectrum, parity, reality, origin };
        f.check_symmetries()?;
        Ok(f)
    }

    fn check_symmetries(&self) -> Result<()> {
        if self.parity == Parity::None && self.reality == Reality::ComplexValued {
            return Ok(());
        }
        let step = 0.37 / self.spectrum.kappa;
        for j in -40i32..=40 {
            let x = step * j as f64;
            let v = self.evaluate(x);
            match self.parity {
                Parity::Even => {
                    let gap = (v - self.evaluate(-x)).norm();
                    if gap > SYMMETRY_TOL {
                        return Err(Error::InvalidParameter(format!(
                            "declared even parity violated at x={x}: |ψ(x)-ψ(-x)|={gap:e}"
                        )));
                    }
                }
                Parity::Odd => {
                    let gap = (v + self.evaluate(-x)).norm();
                    if gap > SYMMETRY_TOL {
                        return Err(Error::InvalidParameter(format!(
                            "declared odd parity violated at x={x}: |ψ(x)+ψ(-x)|={gap:e}"
                        )));
                    }
                }
                Parity::None => {}
            }
            if self.reality == Reality::RealValued && v.im.abs() > SYMMETRY_TOL {
                return Err(Error::InvalidParameter(format!(
                    "declared real-valued function has Im ψ({x}) = {:e}",
                    v.im
                )));
            }
        }
        Ok(())
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn kappa(&self) -> f64 {
        self.spectrum.kappa
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn reality(&self) -> Reality {
        self.reality
    }

    pub fn origin(&self) -> &Origin {
        &self.origin
    }

    /// The quadrature realization `Σ_j w_j e^{ixk_j} ψ̃(k_j)`.
    pub fn evaluate(&self, x: f64) -> Complex64 {
        let s = &self.spectrum;
        s.nodes
            .iter()
            .zip(&s.weights)
            .zip(&s.amps)
            .fold(Complex64::new(0.0, 0.0), |acc, ((&k, &w), &a)| {
                acc + Complex64::from_polar(w, x * k) * a
            })
    }

    /// The quadrature realization at a complex point; fails once the
    /// exponential growth `e^{κ|Im z|}` would overflow.
    pub fn evaluate_complex(&self, z: Complex64) -> Result<Complex64> {
        let s = &self.spectrum;
        if z.im.abs() * s.kappa > STRIP_LIMIT {
            return Err(Error::Range(format!(
                "|Im z|·κ = {:.1} exceeds {STRIP_LIMIT}",
                z.im.abs() * s.kappa
            )));
        }
        let i = Complex64::i();
        Ok(s.nodes
            .iter()
            .zip(&s.weights)
            .zip(&s.amps)
            .fold(Complex64::new(0.0, 0.0), |acc, ((&k, &w), &a)| acc + (i * z * k).exp() * w * a))
    }

    /// Value of the underlying entire function: closed form where one is
    /// known, otherwise the defining integral over the spectral interpolant.
    pub fn continuum_value(&self, z: Complex64) -> Complex64 {
        match &self.origin {
            Origin::Fejer { kappa, scale } => {
                let h = 0.5 * kappa * z;
                if z.norm() * kappa < 1e-6 {
                    return Complex64::new(scale * kappa, 0.0) * (1.0 - h * h / 3.0);
                }
                let s = h.sin();
                4.0 * scale * s * s / (kappa * z * z)
            }
            Origin::GammaReciprocal { g_a, g_b, scale } => {
                special::reciprocal_gamma_pair(*g_a, *g_b, z) * *scale
            }
            Origin::Translated { inner, shift } => inner.continuum_value(z - shift),
            Origin::Conjugated(inner) => inner.continuum_value(z.conj()).conj(),
            Origin::Product(f, g) => f.continuum_value(z) * g.continuum_value(z),
            Origin::Sampled => {
                let freq = z.norm() + 1.0;
                let (rule, amps) = self.spectrum.fine_rule(freq);
                let i = Complex64::i();
                rule.nodes
                    .iter()
                    .zip(&rule.weights)
                    .zip(&amps)
                    .fold(Complex64::new(0.0, 0.0), |acc, ((&k, &w), &a)| acc + (i * z * k).exp() * w * a)
            }
        }
    }

    /// Where the bulk of the function sits: the accumulated translation.
    fn center(&self) -> f64 {
        match &self.origin {
            Origin::Translated { inner, shift } => inner.center() + shift,
            Origin::Conjugated(inner) => inner.center(),
            Origin::Product(f, g) => 0.5 * (f.center() + g.center()),
            _ => 0.0,
        }
    }

    /// Real-axis convenience for [`continuum_value`](Self::continuum_value).
    pub fn value(&self, x: f64) -> Complex64 {
        self.continuum_value(Complex64::new(x, 0.0))
    }
}

/// Normalized Fejér state: spectrum ∝ (1 − |k|/κ) on [−κ, κ], real and even,
/// position form `∝ sin²(κx/2)/x²`.
pub fn make_fejer(kappa: f64, n: usize) -> Result<BandlimitedFunction> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
    }
    if n < 8 {
        return Err(Error::InvalidParameter(format!("Fejér state needs n >= 8 nodes, got {n}")));
    }
    let per_panel = n.div_ceil(2);
    let spectrum = Spectrum::from_fn(kappa, &[-kappa, 0.0, kappa], per_panel, |k| {
        Complex64::new(1.0 - k.abs() / kappa, 0.0)
    })?;
    let raw = spectrum.norm_sq();
    let spectrum = spectrum.normalize()?;
    let scale = 1.0 / raw.sqrt();
    BandlimitedFunction::with_origin(
        spectrum,
        Parity::Even,
        Reality::RealValued,
        Origin::Fejer { kappa, scale },
    )
}

/// `1/(Γ(g_a + g_b x) Γ(g_a − g_b x))`, normalized, with spectrum recovered by
/// a fine-grid Fourier transform and certified half-width π·g_b.
pub fn make_gamma_reciprocal(g_a: f64, g_b: f64) -> Result<BandlimitedFunction> {
    make_gamma_reciprocal_with(g_a, g_b, 256)
}

pub fn make_gamma_reciprocal_with(g_a: f64, g_b: f64, n: usize) -> Result<BandlimitedFunction> {
    if !(g_a > 1.0) {
        return Err(Error::NotIntegrable(format!(
            "1/(Γ(a+bx)Γ(a-bx)) is not in L¹ for a = {g_a} <= 1"
        )));
    }
    if !(g_b > 0.0 && g_b.is_finite()) {
        return Err(Error::InvalidParameter(format!("g_b must be positive, got {g_b}")));
    }
    if n < 8 {
        return Err(Error::InvalidParameter(format!("need n >= 8 spectral nodes, got {n}")));
    }
    let kappa = PI * g_b;
    // Sampling below the Nyquist spacing 1/g_b makes the trapezoid sum exact up
    // to truncation; the tail decays like x^{1-2a}.
    let h = 0.25 / g_b;
    let x_max = 4000.0 / g_b;
    let m = (x_max / h).round() as usize;
    let samples: Vec<f64> = (0..=m)
        .map(|j| special::reciprocal_gamma_pair(g_a, g_b, Complex64::new(j as f64 * h, 0.0)).re)
        .collect();
    // ψ is real and even, so ψ̃(k) = (1/π) ∫_0^∞ cos(kx) ψ(x) dx.
    let transform = |k: f64| {
        let mut acc = 0.5 * samples[0];
        for (j, &s) in samples.iter().enumerate().skip(1) {
            acc += s * (k * h * j as f64).cos();
        }
        Complex64::new(acc * h / PI, 0.0)
    };
    let spectrum = Spectrum::from_fn(kappa, &[-kappa, kappa], n, transform)?;
    let raw = spectrum.norm_sq();
    let spectrum = spectrum.normalize()?;
    BandlimitedFunction::with_origin(
        spectrum,
        Parity::Even,
        Reality::RealValued,
        Origin::GammaReciprocal { g_a, g_b, scale: 1.0 / raw.sqrt() },
    )
}

/// Quadrature realization `Σ_j w_j e^{ixk_j} ψ̃(k_j)`.
pub fn evaluate(f: &BandlimitedFunction, x: f64) -> Complex64 {
    f.evaluate(x)
}

pub fn evaluate_complex(f: &BandlimitedFunction, z: Complex64) -> Result<Complex64> {
    f.evaluate_complex(z)
}

/// `∫ e^{iax} f(x) dx = 2π ψ̃(−a)`; a literal zero beyond the certified
/// half-width.
pub fn fourier_at(f: &BandlimitedFunction, a: f64) -> Complex64 {
    if a.abs() > f.kappa() {
        return Complex64::new(0.0, 0.0);
    }
    2.0 * PI * f.spectrum.amplitude_at(-a)
}

/// Overlap `A(η) = ∫ ψ(q+η) ψ*(q) dq = 2π ∫ |ψ̃(k)|² e^{iηk} dk`.
pub fn autocorrelation(f: &BandlimitedFunction, eta: f64) -> Complex64 {
    autocorrelation_many(f, &[eta])[0]
}

/// [`autocorrelation`] at many shifts, sharing one quadrature rule.
pub fn autocorrelation_many(f: &BandlimitedFunction, etas: &[f64]) -> Vec<Complex64> {
    let max_freq = etas.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let (rule, amps) = f.spectrum.fine_rule(max_freq);
    let density: Vec<f64> = amps
        .iter()
        .zip(&rule.weights)
        .map(|(a, w)| 2.0 * PI * w * a.norm_sqr())
        .collect();
    etas.iter()
        .map(|&eta| {
            rule.nodes
                .iter()
                .zip(&density)
                .fold(Complex64::new(0.0, 0.0), |acc, (&k, &d)| acc + Complex64::from_polar(d, eta * k))
        })
        .collect()
}

/// `x ↦ f(x − shift)`; spectrum picks up `e^{−i·shift·k}`.
pub fn translate(f: &BandlimitedFunction, shift: f64) -> Result<BandlimitedFunction> {
    let spectrum = f.spectrum.map(f.kappa(), |k| k, 1.0, |k, a| a * Complex64::from_polar(1.0, -shift * k))?;
    let parity = if shift == 0.0 { f.parity } else { Parity::None };
    BandlimitedFunction::with_origin(
        spectrum,
        parity,
        f.reality,
        Origin::Translated { inner: Box::new(f.clone()), shift },
    )
}

/// `x ↦ conj f(x)`; spectrum becomes `conj ψ̃(−k)`.
pub fn conjugate(f: &BandlimitedFunction) -> Result<BandlimitedFunction> {
    let spectrum = f.spectrum.map(f.kappa(), |k| -k, 1.0, |_, a| a.conj())?;
    BandlimitedFunction::with_origin(spectrum, f.parity, f.reality, Origin::Conjugated(Box::new(f.clone())))
}

/// `y ↦ A(β y)` as a band-limited function of half-width βκ, with spectrum
/// `(2π/β)|ψ̃(p/β)|²`.
pub fn scaled_autocorrelation(f: &BandlimitedFunction, beta: f64) -> Result<BandlimitedFunction> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {beta}")));
    }
    let spectrum = f
        .spectrum
        .map(beta * f.kappa(), |k| beta * k, beta, |_, a| Complex64::new(2.0 * PI * a.norm_sqr() / beta, 0.0))?;
    let symmetric = symmetric_modulus(&f.spectrum);
    let (parity, reality) = if symmetric {
        (Parity::Even, Reality::RealValued)
    } else {
        (Parity::None, Reality::ComplexValued)
    };
    BandlimitedFunction::with_origin(spectrum, parity, reality, Origin::Sampled)
}

/// Whether |ψ̃(−k)| = |ψ̃(k)| on the stored nodes, within 1e−10.
pub fn symmetric_modulus(s: &Spectrum) -> bool {
    s.nodes
        .iter()
        .zip(&s.amps)
        .all(|(&k, a)| (s.amplitude_at(-k).norm() - a.norm()).abs() <= 1e-10)
}

/// Pointwise product; its spectrum is the convolution of the two spectra,
/// with certified half-width exactly κ_f + κ_g.
pub fn product(f: &BandlimitedFunction, g: &BandlimitedFunction) -> Result<BandlimitedFunction> {
    let (sf, sg) = (&f.spectrum, &g.spectrum);
    let kappa = sf.kappa + sg.kappa;
    let mut breaks: Vec<f64> = sf
        .breaks
        .iter()
        .flat_map(|&a| sg.breaks.iter().map(move |&b| a + b))
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * kappa);
    breaks[0] = -kappa;
    let last = breaks.len() - 1;
    breaks[last] = kappa;

    let per_panel = sf.max_panel_nodes().max(sg.max_panel_nodes());
    let sub_rule = quadrature::gauss_legendre(per_panel);
    let outer = quadrature::composite(&breaks, per_panel, f64::INFINITY);

    let amps: Vec<Complex64> = outer
        .nodes
        .iter()
        .map(|&u| convolve_at(sf, sg, u, &sub_rule))
        .collect();
    let spectrum = Spectrum::new(kappa, outer.nodes, outer.weights, amps, breaks)?;

    let parity = match (f.parity, g.parity) {
        (Parity::Even, Parity::Even) | (Parity::Odd, Parity::Odd) => Parity::Even,
        (Parity::Even, Parity::Odd) | (Parity::Odd, Parity::Even) => Parity::Odd,
        _ => Parity::None,
    };
    let reality = if f.reality == Reality::RealValued && g.reality == Reality::RealValued {
        Reality::RealValued
    } else {
        Reality::ComplexValued
    };
    let h = BandlimitedFunction {
        spectrum,
        parity,
        reality,
        origin: Origin::Product(Box::new(f.clone()), Box::new(g.clone())),
    };
    check_product_resolution(f, g, &h)?;
    h.check_symmetries()?;
    Ok(h)
}

/// `∫ f̃(k) g̃(u − k) dk`, split so that each piece lies inside one panel of
/// each factor; the Legendre rule then integrates the interpolant product
/// exactly.
fn convolve_at(sf: &Spectrum, sg: &Spectrum, u: f64, rule: &Rule) -> Complex64 {
    let lo = (-sf.kappa).max(u - sg.kappa);
    let hi = sf.kappa.min(u + sg.kappa);
    if hi <= lo {
        return Complex64::new(0.0, 0.0);
    }
    let mut cuts: Vec<f64> = vec![lo, hi];
    cuts.extend(sf.breaks.iter().copied().filter(|&b| b > lo && b < hi));
    cuts.extend(sg.breaks.iter().map(|&b| u - b).filter(|&b| b > lo && b < hi));
    cuts.sort_by(f64::total_cmp);
    let mut acc = Complex64::new(0.0, 0.0);
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b - a <= 0.0 {
            continue;
        }
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let k = mid + half * t;
            acc += sf.amplitude_at(k) * sg.amplitude_at(u - k) * (w * half);
        }
    }
    acc
}

fn check_product_resolution(f: &BandlimitedFunction, g: &BandlimitedFunction, h: &BandlimitedFunction) -> Result<()> {
    let step = 0.61 / h.kappa();
    let mut centers = vec![0.0, f.center(), g.center()];
    centers.sort_by(f64::total_cmp);
    centers.dedup();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for &c in &centers {
        for j in -6i32..=6 {
            let x = c + step * j as f64;
            let direct = f.evaluate(x) * g.evaluate(x);
            worst = worst.max((h.evaluate(x) - direct).norm());
            scale = scale.max(direct.norm());
        }
    }
    if worst > 1e-6 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Resolution(format!(
            "product spectrum reproduces f·g only to {worst:.2e} (scale {scale:.2e}); refine the input spectra"
        )));
    }
    Ok(())
}
