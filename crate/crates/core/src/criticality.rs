//! The critical-energy set: the `(nπ/2)²` lattice, positive energies with
//! vanishing reflection, and negative energies where one of `a(±iα)`,
//! `b(±iα)` vanishes. Also the closed-form enumerations for the two
//! step-potential families.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::potential::SingleSitePotential;
use crate::scattering::jost_coefficients;

/// Absolute tolerance on `E` for membership in the `(nπ/2)²` lattice.
pub const LATTICE_TOL: f64 = 1e-9;
/// Default tolerance on `|b|` for declaring a reflection zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;
/// Default scan density, grid points per unit of `k`.
pub const DEFAULT_POINTS_PER_UNIT: f64 = 2000.0;
/// Roots closer than this are merged.
pub const DEDUP_SPACING: f64 = 1e-6;

const CANDIDATE_RATIO: f64 = 1e-4;
const IDENTICALLY_ZERO_FRACTION: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CriticalReason {
    HalfIntegerPiSquared,
    PositiveReflectionZero,
    NegativeAxisZero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Regular,
    Critical,
}

/// Quantities measured while classifying an energy.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Witnesses {
    /// `n` with `E ≈ (nπ/2)²`, when `E ≥ 0`.
    pub lattice_n: Option<u64>,
    /// `|E − (nπ/2)²|` for that `n`.
    pub lattice_residual: Option<f64>,
    pub k: Option<f64>,
    /// `|b(√E)|` for `E > 0`.
    pub b_modulus: Option<f64>,
    pub alpha: Option<f64>,
    /// `[a(iα), a(−iα), b(iα), b(−iα)]` (real parts) for `E = −α² < 0`.
    pub negative_axis_values: Option<[f64; 4]>,
    pub negative_axis_product: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalityReport {
    pub energy: f64,
    pub status: Status,
    pub reasons: Vec<CriticalReason>,
    pub witnesses: Witnesses,
}

impl CriticalityReport {
    pub fn is_critical(&self) -> bool {
        self.status == Status::Critical
    }

    pub fn has(&self, reason: CriticalReason) -> bool {
        self.reasons.contains(&reason)
    }
}

/// Nearest `n ≥ 0` with `(nπ/2)² ≈ E` and the residual `|E − (nπ/2)²|`.
pub fn nearest_lattice_point(energy: f64) -> (u64, f64) {
    let n = (2.0 * energy.max(0.0).sqrt() / PI).round();
    let e_n = (n * PI / 2.0).powi(2);
    (n as u64, (energy - e_n).abs())
}

pub fn is_lattice_energy(energy: f64) -> bool {
    nearest_lattice_point(energy).1 < LATTICE_TOL
}

/// Classify `E` against the three parts of the critical set.
pub fn classify_energy(p: &SingleSitePotential, energy: f64, tol: f64) -> CriticalityReport {
    let mut reasons = Vec::new();
    let mut w = Witnesses::default();
    if energy >= -LATTICE_TOL {
        let (n, res) = nearest_lattice_point(energy);
        w.lattice_n = Some(n);
        w.lattice_residual = Some(res);
        if res < LATTICE_TOL {
            reasons.push(CriticalReason::HalfIntegerPiSquared);
        }
    }
    if energy.abs() > LATTICE_TOL {
        if energy > 0.0 {
            let k = energy.sqrt();
            w.k = Some(k);
            if let Ok(s) = jost_coefficients(p, Complex64::new(k, 0.0)) {
                let bm = s.b.norm();
                w.b_modulus = Some(bm);
                if bm < tol {
                    reasons.push(CriticalReason::PositiveReflectionZero);
                }
            }
        } else {
            let alpha = (-energy).sqrt();
            w.alpha = Some(alpha);
            if let Some(vals) = negative_axis_values(p, alpha) {
                let prod = vals.iter().product::<f64>().abs();
                w.negative_axis_values = Some(vals);
                w.negative_axis_product = Some(prod);
                if prod < tol {
                    reasons.push(CriticalReason::NegativeAxisZero);
                }
            }
        }
    }
    let status = if reasons.is_empty() {
        Status::Regular
    } else {
        Status::Critical
    };
    CriticalityReport {
        energy,
        status,
        reasons,
        witnesses: w,
    }
}

/// Which Jost coefficient on the imaginary axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JostBranch {
    /// `a(iα)`
    APlus,
    /// `a(−iα)`
    AMinus,
    /// `b(iα)`
    BPlus,
    /// `b(−iα)`
    BMinus,
}

impl JostBranch {
    pub const ALL: [JostBranch; 4] = [
        JostBranch::APlus,
        JostBranch::AMinus,
        JostBranch::BPlus,
        JostBranch::BMinus,
    ];

    fn index(self) -> usize {
        self as usize
    }
}

/// `[a(iα), a(−iα), b(iα), b(−iα)]`. For a real potential these are real; the
/// imaginary parts are rounding noise and are dropped.
pub fn negative_axis_values(p: &SingleSitePotential, alpha: f64) -> Option<[f64; 4]> {
    let up = jost_coefficients(p, Complex64::new(0.0, alpha)).ok()?;
    let dn = jost_coefficients(p, Complex64::new(0.0, -alpha)).ok()?;
    Some([up.a.re, dn.a.re, up.b.re, dn.b.re])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReflectionZero {
    pub k: f64,
    pub energy: f64,
    /// `|b(k)|` at the refined root.
    pub residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReflectionScan {
    pub zeros: Vec<ReflectionZero>,
    /// `|b| < tol` on most of the grid (the free potential). No zeros are
    /// reported in that case.
    pub identically_reflectionless: bool,
}

/// Grid size for `[k_lo, k_hi]` at the default density.
pub fn default_grid_n(k_lo: f64, k_hi: f64) -> usize {
    (((k_hi - k_lo) * DEFAULT_POINTS_PER_UNIT).ceil() as usize).max(2)
}

/// Locate real `k` in `[k_lo, k_hi]` with `b(k) = 0`.
///
/// `b` is complex, so there is no sign change to bracket; instead `|b|²` is
/// sampled on a uniform grid and every strict local minimum below
/// `1e-4 · max` is refined by golden-section search followed by a
/// finite-difference Newton step on the minimizer. Only roots with
/// `|b| < tol` are kept.
pub fn scan_reflection_zeros(
    p: &SingleSitePotential,
    k_lo: f64,
    k_hi: f64,
    grid_n: usize,
    tol: f64,
    exec: Exec,
) -> Result<ReflectionScan> {
    if !(k_lo > 0.0 && k_hi > k_lo) || grid_n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need 0 < k_lo < k_hi and grid_n >= 2, got [{k_lo}, {k_hi}], {grid_n}"
        )));
    }
    let b_sq = |k: f64| {
        jost_coefficients(p, Complex64::new(k, 0.0))
            .map(|s| s.b.norm_sqr())
            .unwrap_or(f64::INFINITY)
    };
    let step = (k_hi - k_lo) / (grid_n - 1) as f64;
    let ks: Vec<f64> = (0..grid_n)
        .map(|i| {
            if i + 1 == grid_n {
                k_hi
            } else {
                k_lo + i as f64 * step
            }
        })
        .collect();
    let fs = exec.map_slice(&ks, |&k| b_sq(k));

    let tol_sq = tol * tol;
    let small = fs.iter().filter(|&&f| f < tol_sq).count();
    if small as f64 > IDENTICALLY_ZERO_FRACTION * grid_n as f64 {
        return Ok(ReflectionScan {
            zeros: Vec::new(),
            identically_reflectionless: true,
        });
    }
    let f_max = fs
        .iter()
        .cloned()
        .filter(|f| f.is_finite())
        .fold(0.0, f64::max);
    let threshold = CANDIDATE_RATIO * f_max;
    let candidates: Vec<usize> = (1..grid_n - 1)
        .filter(|&i| fs[i] < fs[i - 1] && fs[i] <= fs[i + 1] && fs[i] < threshold)
        .collect();

    let refined = exec.map_slice(&candidates, |&i| {
        let k = minimize_golden(&b_sq, ks[i - 1], ks[i + 1]);
        let k = newton_polish(&b_sq, k);
        let residual = b_sq(k).sqrt();
        (residual < tol).then_some(ReflectionZero {
            k,
            energy: k * k,
            residual,
        })
    });
    let zeros = dedup_sorted(refined.into_iter().flatten().collect(), |z| z.k);
    Ok(ReflectionScan {
        zeros,
        identically_reflectionless: false,
    })
}

fn dedup_sorted<T, F: Fn(&T) -> f64>(mut xs: Vec<T>, key: F) -> Vec<T> {
    xs.sort_by(|a, b| key(a).total_cmp(&key(b)));
    let mut out: Vec<T> = Vec::with_capacity(xs.len());
    for x in xs {
        match out.last() {
            Some(prev) if (key(&x) - key(prev)).abs() < DEDUP_SPACING => {}
            _ => out.push(x),
        }
    }
    out
}

/// Golden-section minimization on `[lo, hi]`, assuming one local minimum.
pub fn minimize_golden<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let width_tol = 1e-14 * hi.abs().max(1.0);
    for _ in 0..200 {
        if hi - lo < width_tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

/// Newton iteration `x ← x − f'/f''` with central differences; a step is
/// kept only if it lowers `f`.
fn newton_polish<F: Fn(f64) -> f64>(f: &F, mut x: f64) -> f64 {
    let mut fx = f(x);
    for _ in 0..4 {
        let h = 1e-5 * x.abs().max(1.0);
        let (fp, fm) = (f(x + h), f(x - h));
        let d1 = (fp - fm) / (2.0 * h);
        let d2 = (fp - 2.0 * fx + fm) / (h * h);
        if !(d2 > 0.0) {
            break;
        }
        let cand = x - d1 / d2;
        let fc = f(cand);
        if fc < fx {
            x = cand;
            fx = fc;
        } else {
            break;
        }
    }
    x
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NegativeAxisZero {
    pub alpha: f64,
    pub energy: f64,
    pub which: JostBranch,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NegativeAxisScan {
    pub zeros: Vec<NegativeAxisZero>,
    /// Branches that vanish on most of the grid (e.g. `b` for the free
    /// potential); their sign changes are noise and are not reported.
    pub identically_zero: Vec<JostBranch>,
}

/// Zeros of `a(±iα)` and `b(±iα)` for `α ∈ [α_lo, α_hi]`, found by sign-change
/// bracketing on a uniform grid and bisection. Tangential (double) zeros are
/// not detected.
pub fn negative_axis_zeros(
    p: &SingleSitePotential,
    alpha_lo: f64,
    alpha_hi: f64,
    grid_n: usize,
    tol: f64,
    exec: Exec,
) -> Result<NegativeAxisScan> {
    if !(alpha_lo > 0.0 && alpha_hi > alpha_lo) || grid_n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need 0 < alpha_lo < alpha_hi and grid_n >= 2, got [{alpha_lo}, {alpha_hi}], {grid_n}"
        )));
    }
    let step = (alpha_hi - alpha_lo) / (grid_n - 1) as f64;
    let alphas: Vec<f64> = (0..grid_n)
        .map(|i| {
            if i + 1 == grid_n {
                alpha_hi
            } else {
                alpha_lo + i as f64 * step
            }
        })
        .collect();
    let vals = exec.map_slice(&alphas, |&al| {
        negative_axis_values(p, al).unwrap_or([f64::NAN; 4])
    });

    let mut scan = NegativeAxisScan::default();
    for which in JostBranch::ALL {
        let j = which.index();
        let small = vals.iter().filter(|v| v[j].abs() < tol).count();
        if small as f64 > IDENTICALLY_ZERO_FRACTION * grid_n as f64 {
            scan.identically_zero.push(which);
            continue;
        }
        let f = |al: f64| {
            negative_axis_values(p, al)
                .map(|v| v[j])
                .unwrap_or(f64::NAN)
        };
        let mut found = Vec::new();
        for i in 0..grid_n - 1 {
            let (f0, f1) = (vals[i][j], vals[i + 1][j]);
            let root = if f0 == 0.0 {
                Some(alphas[i])
            } else if f0 * f1 < 0.0 {
                Some(bisect(&f, alphas[i], alphas[i + 1], f0))
            } else {
                None
            };
            if let Some(alpha) = root {
                let value = f(alpha);
                if value.abs() < tol {
                    found.push(NegativeAxisZero {
                        alpha,
                        energy: -alpha * alpha,
                        which,
                        value,
                    });
                }
            }
        }
        scan.zeros.extend(dedup_sorted(found, |z| z.alpha));
    }
    scan.zeros.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    Ok(scan)
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    // return the endpoint with the smaller |f|
    let (a, b) = (f(lo).abs(), f(hi).abs());
    if a <= b {
        lo
    } else {
        hi
    }
}

/// A reflectionless energy of the antisymmetric step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReflectionlessPair {
    pub n: u64,
    pub m: u64,
    pub energy: f64,
}

/// For `λ = 2π² N` with integer `N`, every `n > m ≥ 1` with `n² − m² = N`
/// gives a reflectionless energy `E = 2π²(n² + m²)` of the antisymmetric
/// step. Other `λ > 0` have none above the barrier.
pub fn example2_reflectionless(lambda: f64, tol: f64) -> Vec<ReflectionlessPair> {
    if !(lambda > 0.0) {
        return Vec::new();
    }
    let nf = lambda / (2.0 * PI * PI);
    if (nf - nf.round()).abs() >= tol || nf.round() < 1.0 {
        return Vec::new();
    }
    let big_n = nf.round() as u64;
    let mut out = Vec::new();
    for n in 1..=big_n.div_ceil(2) + 1 {
        for m in 1..n {
            if n * n - m * m == big_n {
                out.push(ReflectionlessPair {
                    n,
                    m,
                    energy: 2.0 * PI * PI * (n * n + m * m) as f64,
                });
            }
        }
    }
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    out
}

/// `λ_j = 2π² N_j` with `N_j = 2^{j+1}(2^{j−1} + 1)` and the `j` explicit
/// pairs `n_ℓ² − m_ℓ² = N_j`, `0 ≤ ℓ < j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NjConstruction {
    pub j: u32,
    pub n_j: u64,
    pub lambda: f64,
    pub pairs: Vec<(u64, u64)>,
}

pub fn nj_construction(j: u32) -> Result<NjConstruction> {
    if j == 0 {
        return Err(Error::InvalidArgument("j must be at least 1".into()));
    }
    let overflow = || Error::Overflow { j };
    let pow2 = |e: u32| 1u64.checked_shl(e).filter(|_| e < 64).ok_or_else(overflow);
    let base = pow2(j - 1)?.checked_add(1).ok_or_else(overflow)?;
    let n_j = pow2(j + 1)?.checked_mul(base).ok_or_else(overflow)?;
    let mut pairs = Vec::with_capacity(j as usize);
    for l in 0..j {
        let a = pow2(l)?.checked_mul(base).ok_or_else(overflow)?;
        let b = pow2(j - l - 1)?;
        let n = a.checked_add(b).ok_or_else(overflow)?;
        let m = a - b;
        let diff = (n as u128) * (n as u128) - (m as u128) * (m as u128);
        if diff != n_j as u128 {
            return Err(Error::InvalidArgument(format!(
                "pair ({n}, {m}) fails n² − m² = {n_j}"
            )));
        }
        pairs.push((n, m));
    }
    Ok(NjConstruction {
        j,
        n_j,
        lambda: 2.0 * PI * PI * n_j as f64,
        pairs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Example1Type {
    /// `b(k) = 0`: `E = n²π² + λ`, where `g = ±I`.
    Type1a,
    /// `k = nπ`, where `g₀ = ±I`.
    Type1b,
    /// `k = (2n−1)π/2` and `α = √(E − λ) = (2m−1)π/2`.
    Type2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Example1Critical {
    pub kind: Example1Type,
    pub energy: f64,
    pub n: u64,
    pub m: Option<u64>,
}

/// Critical energies `0 < E ≤ E_max` of the step `λ·χ[-1/2, 1/2]`, by type.
pub fn example1_critical_types(lambda: f64, e_max: f64) -> Vec<Example1Critical> {
    let mut out = Vec::new();
    if !(e_max > 0.0) {
        return out;
    }
    let pi2 = PI * PI;
    let n_max = (e_max.sqrt() / PI).floor() as u64 + 2;
    for n in 1..=n_max + ((-lambda).max(0.0).sqrt() / PI).ceil() as u64 {
        let e = (n * n) as f64 * pi2 + lambda;
        if e > lambda.max(0.0) && e <= e_max {
            out.push(Example1Critical {
                kind: Example1Type::Type1a,
                energy: e,
                n,
                m: None,
            });
        }
    }
    for n in 1..=n_max {
        let e = (n * n) as f64 * pi2;
        if e <= e_max {
            out.push(Example1Critical {
                kind: Example1Type::Type1b,
                energy: e,
                n,
                m: None,
            });
        }
    }
    let lam_tol = 1e-9 * lambda.abs().max(1.0);
    for n in 1..=n_max {
        let k = (2 * n - 1) as f64 * PI / 2.0;
        let e = k * k;
        if e > e_max || !(e > lambda) {
            continue;
        }
        let m_max = ((e - lambda).sqrt() / PI).ceil() as u64 + 1;
        for m in 1..=m_max {
            let lam_nm = pi2 * (n as f64 - m as f64) * (n + m - 1) as f64;
            if (lambda - lam_nm).abs() < lam_tol {
                out.push(Example1Critical {
                    kind: Example1Type::Type2,
                    energy: e,
                    n,
                    m: Some(m),
                });
            }
        }
    }
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex1(l: f64) -> SingleSitePotential {
        SingleSitePotential::constant(l).unwrap()
    }

    #[test]
    fn classify_examples() {
        let p = ex1(1.0);
        let r = classify_energy(&p, (PI / 2.0).powi(2), DEFAULT_ZERO_TOL);
        assert!(r.has(CriticalReason::HalfIntegerPiSquared));
        assert_eq!(r.status, Status::Critical);

        let r = classify_energy(&p, PI * PI + 1.0, DEFAULT_ZERO_TOL);
        assert_eq!(r.reasons, vec![CriticalReason::PositiveReflectionZero]);

        let r = classify_energy(&p, 2.0, DEFAULT_ZERO_TOL);
        assert_eq!(r.status, Status::Regular);
        // closed form |b(√2)| = sin(1)/(2√2), far above the tolerance
        let b = 1f64.sin() / (2.0 * 2f64.sqrt());
        assert!((r.witnesses.b_modulus.unwrap() - b).abs() < 1e-14);

        let r = classify_energy(&p, 0.0, DEFAULT_ZERO_TOL);
        assert_eq!(r.reasons, vec![CriticalReason::HalfIntegerPiSquared]);
    }

    #[test]
    fn scan_example1() {
        let scan = scan_reflection_zeros(
            &ex1(1.0),
            0.5,
            10.0,
            default_grid_n(0.5, 10.0),
            DEFAULT_ZERO_TOL,
            Exec::default(),
        )
        .unwrap();
        let expect: Vec<f64> = (1..=3)
            .map(|n| ((n * n) as f64 * PI * PI + 1.0).sqrt())
            .collect();
        assert_eq!(scan.zeros.len(), 3, "{:?}", scan.zeros);
        for (z, k) in scan.zeros.iter().zip(&expect) {
            assert!((z.k - k).abs() < 1e-8, "{} vs {}", z.k, k);
        }
    }

    #[test]
    fn scan_example2_single_zero() {
        let p = SingleSitePotential::antisymmetric_step(6.0 * PI * PI).unwrap();
        let scan = scan_reflection_zeros(
            &p,
            0.5,
            12.0,
            default_grid_n(0.5, 12.0),
            DEFAULT_ZERO_TOL,
            Exec::default(),
        )
        .unwrap();
        assert_eq!(scan.zeros.len(), 1, "{:?}", scan.zeros);
        assert!((scan.zeros[0].k - (10.0 * PI * PI).sqrt()).abs() < 1e-8);
    }

    #[test]
    fn scan_free_is_flagged() {
        let scan = scan_reflection_zeros(
            &SingleSitePotential::free(),
            0.5,
            5.0,
            2000,
            DEFAULT_ZERO_TOL,
            Exec::Sequential,
        )
        .unwrap();
        assert!(scan.identically_reflectionless);
        assert!(scan.zeros.is_empty());
    }

    #[test]
    fn scan_rejects_bad_range() {
        assert!(scan_reflection_zeros(&ex1(1.0), 2.0, 1.0, 10, 1e-8, Exec::Sequential).is_err());
        assert!(scan_reflection_zeros(&ex1(1.0), 0.0, 1.0, 10, 1e-8, Exec::Sequential).is_err());
        assert!(scan_reflection_zeros(&ex1(1.0), 0.5, 1.0, 1, 1e-8, Exec::Sequential).is_err());
    }

    #[test]
    fn negative_axis_free_is_flagged() {
        let scan = negative_axis_zeros(
            &SingleSitePotential::free(),
            0.1,
            3.0,
            500,
            1e-8,
            Exec::Sequential,
        )
        .unwrap();
        assert!(scan.zeros.is_empty());
        assert!(scan.identically_zero.contains(&JostBranch::BPlus));
        assert!(scan.identically_zero.contains(&JostBranch::BMinus));
    }

    #[test]
    fn negative_axis_well_matches_dense_evaluation() {
        let p = ex1(-10.0);
        let scan = negative_axis_zeros(&p, 0.1, 3.0, 3000, 1e-8, Exec::default()).unwrap();
        // brute force: sign changes on a much finer grid
        let n = 200_000;
        for which in JostBranch::ALL {
            let j = which as usize;
            let mut count = 0;
            let mut prev = negative_axis_values(&p, 0.1).unwrap()[j];
            let mut roots = Vec::new();
            for i in 1..=n {
                let al = 0.1 + 2.9 * i as f64 / n as f64;
                let v = negative_axis_values(&p, al).unwrap()[j];
                if v * prev < 0.0 {
                    count += 1;
                    roots.push(al);
                }
                prev = v;
            }
            let got: Vec<_> = scan.zeros.iter().filter(|z| z.which == which).collect();
            assert_eq!(got.len(), count, "{which:?}");
            for (z, r) in got.iter().zip(&roots) {
                assert!((z.alpha - r).abs() < 2.0 * 2.9 / n as f64);
                assert!(z.value.abs() < 1e-8);
            }
        }
        // b(iα) ∝ sin(√(10 − α²)) vanishes at α = √(10 − π²)
        let b0 = (10.0 - PI * PI).sqrt();
        assert!(scan
            .zeros
            .iter()
            .any(|z| z.which == JostBranch::BPlus && (z.alpha - b0).abs() < 1e-10));
    }

    #[test]
    fn example2_enumeration() {
        let pi2 = PI * PI;
        let r = example2_reflectionless(6.0 * pi2, 1e-9);
        assert_eq!(r.len(), 1);
        assert_eq!((r[0].n, r[0].m), (2, 1));
        assert!((r[0].energy - 10.0 * pi2).abs() < 1e-12);

        let r = example2_reflectionless(48.0 * pi2, 1e-9);
        let pairs: Vec<_> = r.iter().map(|x| (x.n, x.m)).collect();
        assert_eq!(pairs, vec![(5, 1), (7, 5)]);
        assert!((r[0].energy - 52.0 * pi2).abs() < 1e-10);
        assert!((r[1].energy - 148.0 * pi2).abs() < 1e-10);

        assert!(example2_reflectionless(4.0 * pi2, 1e-9).is_empty());
        assert!(example2_reflectionless(4.1 * pi2, 1e-9).is_empty());
    }

    #[test]
    fn nj_examples() {
        let c = nj_construction(2).unwrap();
        assert_eq!(c.n_j, 24);
        assert_eq!(c.pairs, vec![(5, 1), (7, 5)]);
        let c = nj_construction(1).unwrap();
        assert_eq!(c.n_j, 8);
        assert_eq!(c.pairs, vec![(3, 1)]);
        assert_eq!(nj_construction(3).unwrap().n_j, 80);
        for j in 1..=10 {
            let c = nj_construction(j).unwrap();
            assert_eq!(c.pairs.len(), j as usize);
            let mut ns: Vec<_> = c.pairs.iter().collect();
            ns.dedup();
            assert_eq!(ns.len(), j as usize);
        }
        assert!(matches!(
            nj_construction(64),
            Err(Error::Overflow { j: 64 })
        ));
        assert!(nj_construction(31).is_ok());
        assert!(matches!(
            nj_construction(32),
            Err(Error::Overflow { j: 32 })
        ));
    }

    #[test]
    fn example1_types() {
        let pi2 = PI * PI;
        let t = example1_critical_types(2.0 * pi2, 30.0);
        let t2: Vec<_> = t.iter().filter(|c| c.kind == Example1Type::Type2).collect();
        assert_eq!(t2.len(), 1);
        assert!((t2[0].energy - 9.0 * pi2 / 4.0).abs() < 1e-12);
        assert_eq!((t2[0].n, t2[0].m), (2, Some(1)));

        let t = example1_critical_types(1.0, 50.0);
        let of = |kind| {
            t.iter()
                .filter(|c| c.kind == kind)
                .map(|c| c.energy)
                .collect::<Vec<_>>()
        };
        assert_eq!(of(Example1Type::Type1a), vec![pi2 + 1.0, 4.0 * pi2 + 1.0]);
        assert_eq!(of(Example1Type::Type1b), vec![pi2, 4.0 * pi2]);
        assert!(of(Example1Type::Type2).is_empty());

        let t = example1_critical_types(0.0, 50.0);
        assert_eq!(
            of_kind(&t, Example1Type::Type1a),
            of_kind(&t, Example1Type::Type1b)
        );
    }

    fn of_kind(t: &[Example1Critical], kind: Example1Type) -> Vec<f64> {
        t.iter()
            .filter(|c| c.kind == kind)
            .map(|c| c.energy)
            .collect()
    }
}
