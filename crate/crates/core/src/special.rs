//! Complex log-gamma and the reciprocal-gamma product `1/(Γ(a+bz)Γ(a−bz))`.

use num_complex::Complex64;
use std::f64::consts::PI;

const LANCZOS_G: f64 = 5.242_187_5;
const LANCZOS_C0: f64 = 0.999_999_999_999_997_1;
const LANCZOS_COEF: [f64; 14] = [
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_8e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_6e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Log-gamma on the right half plane (Re z ≥ 0.5), Lanczos form.
fn ln_gamma_right(z: Complex64) -> Complex64 {
    let mut t = z + LANCZOS_G;
    t = (z + 0.5) * t.ln() - t;
    let mut ser = Complex64::new(LANCZOS_C0, 0.0);
    let mut y = z;
    for c in LANCZOS_COEF {
        y += 1.0;
        ser += c / y;
    }
    t + (ser * SQRT_2PI / z).ln()
}

/// `ln sin(πz)` without overflow for large |Im z|. The imaginary part is
/// only defined modulo 2π.
pub fn ln_sin_pi(z: Complex64) -> Complex64 {
    let i = Complex64::i();
    if z.im > 15.0 {
        let e = (2.0 * i * PI * z).exp();
        -i * PI * z + (i * 0.5 * (Complex64::new(1.0, 0.0) - e)).ln()
    } else if z.im < -15.0 {
        let e = (-2.0 * i * PI * z).exp();
        i * PI * z + ((Complex64::new(1.0, 0.0) - e) / (2.0 * i)).ln()
    } else {
        (PI * z).sin().ln()
    }
}

/// Complex log-gamma, reflection-safe. The imaginary part is only defined
/// modulo 2π; exponentiate before comparing values.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma_right(Complex64::new(1.0, 0.0) - z)
    } else {
        ln_gamma_right(z)
    }
}

/// Gamma function on the complex plane.
pub fn gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let s = (PI * z).sin();
        if s == Complex64::new(0.0, 0.0) {
            return Complex64::new(f64::INFINITY, 0.0);
        }
        PI / (s * ln_gamma_right(Complex64::new(1.0, 0.0) - z).exp())
    } else {
        ln_gamma_right(z).exp()
    }
}

/// Reciprocal gamma `1/Γ(z)`, entire; exactly zero at the poles of Γ.
pub fn rgamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let s = (PI * z).sin();
        s / PI * ln_gamma_right(Complex64::new(1.0, 0.0) - z).exp()
    } else {
        (-ln_gamma_right(z)).exp()
    }
}

/// `1/(Γ(a + b z) Γ(a − b z))` for a > 1, b > 0, evaluated so that the large
/// factors of the reflected gamma cancel in log space.
pub fn reciprocal_gamma_pair(a: f64, b: f64, z: Complex64) -> Complex64 {
    let mut u = a + b * z;
    let mut v = a - b * z;
    if u.re < v.re {
        std::mem::swap(&mut u, &mut v);
    }
    // u now has the larger real part, Re u ≥ a > 1.
    if v.re >= 0.5 {
        return (-ln_gamma_right(u) - ln_gamma_right(v)).exp();
    }
    let one = Complex64::new(1.0, 0.0);
    let log_ratio = ln_gamma_right(one - v) - ln_gamma_right(u);
    if v.im.abs() <= 15.0 {
        (PI * v).sin() / PI * log_ratio.exp()
    } else {
        (ln_sin_pi(v) - PI.ln() + log_ratio).exp()
    }
}
