//! Transfer matrices and Jost scattering data for piecewise-constant single
//! sites.
//!
//! Every piece is propagated exactly through the entire functions
//! `C(z) = cos √z` and `S(z) = sin √z / √z`, so there is no square-root branch
//! to choose: energies above and below a piece's value, and complex spectral
//! parameters, all go through the same code.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::TransferMatrix;
use crate::potential::SingleSitePotential;

/// Smallest `|k|` accepted by [`jost_coefficients`]; `k = 0` is a possible
/// pole of `a` and `b`.
pub const K_MIN: f64 = 1e-6;

const SERIES_RADIUS: f64 = 1e-4;
const SERIES_TERMS: usize = 10;

/// Jost data `(a(k), b(k))`: the solution equal to `e^{ikx}` left of the
/// support is `a e^{ikx} + b e^{-ikx}` right of it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringData {
    pub k: Complex64,
    pub a: Complex64,
    pub b: Complex64,
}

impl ScatteringData {
    /// `|a|² − |b|² − 1`, zero for real `k` by constancy of the Wronskian.
    ///
    /// Evaluated exactly (error-free products, compensated sum) so that the
    /// result reflects the stored `a`, `b` and not rounding in this formula.
    pub fn wronskian_residual(&self) -> f64 {
        let terms = [
            (self.a.re, self.a.re),
            (self.a.im, self.a.im),
            (-self.b.re, self.b.re),
            (-self.b.im, self.b.im),
        ];
        let (mut hi, mut lo) = (-1.0f64, 0.0f64);
        for (x, y) in terms {
            let p = x * y;
            let e = x.mul_add(y, -p);
            // two-sum of hi + p
            let s = hi + p;
            let bb = s - hi;
            lo += (hi - (s - bb)) + (p - bb) + e;
            hi = s;
        }
        hi + lo
    }

    /// Transmission amplitude `t = 1/a`.
    pub fn transmission(&self) -> Complex64 {
        self.a.inv()
    }

    /// Reflection amplitude `r = b/a`.
    pub fn reflection(&self) -> Complex64 {
        self.b / self.a
    }
}

/// An energy together with its spectral parameter `k`, `k² = E`, taken on the
/// closed upper half plane: `k = √E` for `E > 0` and `k = iα` for `E = −α²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralPoint {
    pub energy: f64,
    pub k: Complex64,
}

impl SpectralPoint {
    pub fn from_energy(energy: f64) -> Self {
        let k = if energy >= 0.0 {
            Complex64::new(energy.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (-energy).sqrt())
        };
        Self { energy, k }
    }
}

/// `(C(z), S(z))` for real `z`.
pub fn entire_cs(z: f64) -> (f64, f64) {
    if z.abs() < SERIES_RADIUS {
        let (mut c, mut s) = (0.0, 0.0);
        let mut term = 1.0; // (-z)^n / (2n)!
        for n in 0..SERIES_TERMS {
            c += term;
            let t_odd = term / (2 * n + 1) as f64;
            s += t_odd;
            term = -t_odd * z / (2 * n + 2) as f64;
        }
        (c, s)
    } else if z > 0.0 {
        let w = z.sqrt();
        (w.cos(), w.sin() / w)
    } else {
        let w = (-z).sqrt();
        (w.cosh(), w.sinh() / w)
    }
}

/// `(C(z), S(z))` for complex `z`. Both are even in `√z`, so the branch of
/// the square root is irrelevant.
pub fn entire_cs_complex(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < SERIES_RADIUS {
        let (mut c, mut s) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let mut term = Complex64::new(1.0, 0.0);
        for n in 0..SERIES_TERMS {
            c += term;
            let t_odd = term / (2 * n + 1) as f64;
            s += t_odd;
            term = -t_odd * z / (2 * n + 2) as f64;
        }
        (c, s)
    } else {
        let w = z.sqrt();
        (w.cos(), w.sin() / w)
    }
}

/// Exact propagator of `-u'' + q u = E u` across a piece of width `h`.
pub fn piece_propagator(energy: f64, q: f64, h: f64) -> TransferMatrix {
    let de = energy - q;
    let (c, s) = entire_cs(de * h * h);
    TransferMatrix::new(c, h * s, -de * h * s, c)
}

/// Complex counterpart of [`piece_propagator`] for `E = k²` with complex `k`.
fn piece_propagator_complex(k_sq: Complex64, q: f64, h: f64) -> [[Complex64; 2]; 2] {
    let de = k_sq - q;
    let (c, s) = entire_cs_complex(de * (h * h));
    [[c, s * h], [-de * s * h, c]]
}

/// Transfer matrix `g(E)` from `-1/2` to `1/2`: the product of the piece
/// propagators with the leftmost piece as the rightmost factor.
pub fn transfer_matrix(p: &SingleSitePotential, energy: f64) -> TransferMatrix {
    p.pieces().fold(TransferMatrix::IDENTITY, |acc, (h, q)| {
        piece_propagator(energy, q, h) * acc
    })
}

/// Free transfer matrix `g₀(E)` over a unit interval.
pub fn free_transfer_matrix(energy: f64) -> TransferMatrix {
    piece_propagator(energy, 0.0, 1.0)
}

/// Jost coefficients at a (possibly complex) spectral parameter.
pub fn jost_coefficients(p: &SingleSitePotential, k: Complex64) -> Result<ScatteringData> {
    let modulus = k.norm();
    if !(modulus >= K_MIN) {
        return Err(Error::KTooSmall { modulus });
    }
    let i = Complex64::i();
    let ik = i * k;
    let k_sq = k * k;
    let start = (-ik * 0.5).exp();
    let (mut u, mut du) = (start, ik * start);
    for (h, q) in p.pieces() {
        let m = piece_propagator_complex(k_sq, q, h);
        (u, du) = (m[0][0] * u + m[0][1] * du, m[1][0] * u + m[1][1] * du);
    }
    // u(1/2) = a e^{ik/2} + b e^{-ik/2},  u'(1/2) = ik (a e^{ik/2} − b e^{-ik/2})
    let half = (ik * 0.5).exp();
    let a = (ik * u + du) / (ik * 2.0 * half);
    let b = (ik * u - du) * half / (ik * 2.0);
    Ok(ScatteringData { k, a, b })
}

/// Rebuild `g(k²)` from the Jost data at real `k > 0`, with
/// `z± = a e^{ik} ± b`.
pub fn transfer_from_scattering(s: &ScatteringData) -> Result<TransferMatrix> {
    let k = real_positive_k(s.k)?;
    let phase = Complex64::from_polar(1.0, k);
    let zp = s.a * phase + s.b;
    let zm = s.a * phase - s.b;
    Ok(TransferMatrix::new(zp.re, zp.im / k, -k * zm.im, zm.re))
}

pub(crate) fn real_positive_k(k: Complex64) -> Result<f64> {
    if k.im.abs() > 1e-12 * k.re.abs().max(1.0) {
        return Err(Error::NonRealK { im: k.im });
    }
    if !(k.re > 0.0) {
        return Err(Error::NonPositiveK { k: k.re });
    }
    Ok(k.re)
}

/// Closed-form Jost data for the step `λ·χ[-1/2, 1/2]`, valid for
/// `E > max(0, λ)`.
pub fn example1_scattering(lambda: f64, energy: f64) -> Result<ScatteringData> {
    if !(energy > lambda.max(0.0)) {
        return Err(Error::OutOfClosedFormRange { energy });
    }
    let k = energy.sqrt();
    let alpha = (energy - lambda).sqrt();
    let (sa, ca) = alpha.sin_cos();
    let a_phase = Complex64::new(ca, (2.0 * k * k - lambda) / (2.0 * k * alpha) * sa);
    let a = a_phase * Complex64::from_polar(1.0, -k);
    let b = Complex64::new(0.0, lambda * sa / (2.0 * k * alpha));
    Ok(ScatteringData {
        k: Complex64::new(k, 0.0),
        a,
        b,
    })
}

/// Closed-form `g(E)` for the step `λ·χ[-1/2, 1/2]`, valid for
/// `E > max(0, λ)`.
pub fn example1_transfer(lambda: f64, energy: f64) -> Result<TransferMatrix> {
    if !(energy > lambda.max(0.0)) {
        return Err(Error::OutOfClosedFormRange { energy });
    }
    let alpha = (energy - lambda).sqrt();
    let (s, c) = alpha.sin_cos();
    Ok(TransferMatrix::new(c, s / alpha, -alpha * s, c))
}

/// Closed-form `g(E)` for the antisymmetric step
/// `λ(χ[-1/2, 0] − χ(0, 1/2])`, valid for `E > λ`.
pub fn example2_transfer(lambda: f64, energy: f64) -> Result<TransferMatrix> {
    if !(energy > lambda && energy > -lambda) {
        return Err(Error::OutOfClosedFormRange { energy });
    }
    let ap = (energy + lambda).sqrt();
    let am = (energy - lambda).sqrt();
    let (sp, cp) = (ap / 2.0).sin_cos();
    let (sm, cm) = (am / 2.0).sin_cos();
    Ok(TransferMatrix::new(
        cm * cp - am / ap * sm * sp,
        sm * cp / am + cm * sp / ap,
        -ap * cm * sp - am * sm * cp,
        -ap / am * sm * sp + cm * cp,
    ))
}

/// `a(k)` for the antisymmetric step at a reflectionless energy
/// `E = 2π²(n² + m²)` (with `λ = 2π²(n² − m²)`). There `g(E) = (−1)^{n+m} I`,
/// so `a = (−1)^{n+m} e^{−ik}` with `k = π √(2(n² + m²))`.
pub fn example2_reflectionless_a(n: u64, m: u64) -> Complex64 {
    let k = PI * ((2 * (n * n + m * m)) as f64).sqrt();
    let sign = if (n + m).is_multiple_of(2) { 1.0 } else { -1.0 };
    Complex64::from_polar(sign, -k)
}
