//! Constructive checks of the two hypotheses of Fürstenberg's theorem for the
//! group generated by `g₀(E)` and `g(E)`: non-compactness and strong
//! irreducibility.
//!
//! For `E = k² > 0` the work is done in "tilde" coordinates,
//! `g̃ = diag(1, 1/k) · g · diag(1, k)`, where `g̃₀` is the rotation by `k` and
//! `g̃ = A·rot + B·refl` maps the unit circle onto an ellipse with semi-axes
//! `A ± B` (`A = |a|`, `B = |b|`).

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::TransferMatrix;
use crate::potential::SingleSitePotential;
use crate::scattering::{
    free_transfer_matrix, jost_coefficients, real_positive_k, transfer_matrix, ScatteringData,
};

/// Two directions closer than this are considered equal.
pub const DIRECTION_TOL: f64 = 1e-6;
/// Default search depth for orbit enumeration.
pub const DEFAULT_ORBIT_DEPTH: usize = 12;
/// Norm a witness word has to exceed.
pub const WITNESS_NORM: f64 = 10.0;

const ZERO_REFLECTION: f64 = 1e-12;
const SEARCH_BINS: usize = 1024;

/// A point of the projective line, stored as the angle `θ ∈ [0, π)` of the
/// line through `(cos θ, sin θ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveDirection(f64);

impl ProjectiveDirection {
    pub fn new(theta: f64) -> Self {
        let t = theta.rem_euclid(PI);
        Self(if t >= PI { 0.0 } else { t })
    }

    pub fn from_vector(v: [f64; 2]) -> Self {
        Self::new(v[1].atan2(v[0]))
    }

    pub fn angle(self) -> f64 {
        self.0
    }

    pub fn vector(self) -> [f64; 2] {
        let (s, c) = self.0.sin_cos();
        [c, s]
    }

    pub fn distance(self, other: Self) -> f64 {
        let d = (self.0 - other.0).abs();
        d.min(PI - d)
    }

    pub fn image(self, g: &TransferMatrix) -> Self {
        Self::from_vector(g.apply(self.vector()))
    }
}

/// `diag(1, 1/k) · g · diag(1, k)`.
pub fn conjugate_to_tilde(g: &TransferMatrix, k: f64) -> Result<TransferMatrix> {
    if !(k > 0.0) {
        return Err(Error::NonPositiveK { k });
    }
    Ok(TransferMatrix::new(g.m11, g.m12 * k, g.m21 / k, g.m22))
}

/// Inverse of [`conjugate_to_tilde`].
pub fn conjugate_from_tilde(g: &TransferMatrix, k: f64) -> Result<TransferMatrix> {
    if !(k > 0.0) {
        return Err(Error::NonPositiveK { k });
    }
    Ok(TransferMatrix::new(g.m11, g.m12 / k, g.m21 * k, g.m22))
}

/// Polar data of the Jost coefficients at real `k > 0`.
#[derive(Clone, Copy, Debug)]
struct Polar {
    k: f64,
    a_mod: f64,
    b_mod: f64,
    alpha_phase: f64,
    beta_phase: f64,
    phi: f64,
    psi: f64,
}

fn polar(s: &ScatteringData) -> Result<Polar> {
    let k = real_positive_k(s.k)?;
    let alpha_phase = s.a.arg();
    // phase of b·e^{ik}: with this choice ψ = k − β = −arg b
    let beta_phase = (s.b * Complex64::from_polar(1.0, k)).arg();
    Ok(Polar {
        k,
        a_mod: s.a.norm(),
        b_mod: s.b.norm(),
        alpha_phase,
        beta_phase,
        phi: -k - alpha_phase,
        psi: k - beta_phase,
    })
}

/// Norm gain of `g̃(k²)` as a function of the input direction, and a
/// direction interval with a guaranteed gain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormGainProfile {
    pub k: f64,
    /// `A = |a(k)|`
    pub a_modulus: f64,
    /// `B = |b(k)|`
    pub b_modulus: f64,
    pub alpha_phase: f64,
    /// Phase of `b(k)·e^{ik}`.
    pub beta_phase: f64,
    pub phi: f64,
    pub psi: f64,
    /// Direction of maximal gain `A + B`.
    pub eta: f64,
    /// Direction of minimal gain `A − B`.
    pub eta_prime: f64,
    /// Half-width of the gain interval `K = [η − w, η + w]`.
    pub half_width: f64,
    /// Lower bound on `‖g̃ v(θ)‖` for `θ ∈ K`.
    pub gain: f64,
}

impl NormGainProfile {
    /// `R(θ) = ‖g̃ v(θ)‖` from `R² = 1 + 2B(B + A cos(2θ + φ + ψ))`.
    pub fn r(&self, theta: f64) -> f64 {
        let (a, b) = (self.a_modulus, self.b_modulus);
        (1.0 + 2.0 * b * (b + a * (2.0 * theta + self.phi + self.psi).cos())).sqrt()
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.eta - self.half_width, self.eta + self.half_width)
    }

    pub fn interval_length(&self) -> f64 {
        2.0 * self.half_width
    }

    pub fn contains(&self, theta: f64) -> bool {
        ProjectiveDirection::new(theta).distance(ProjectiveDirection::new(self.eta))
            <= self.half_width
    }

    /// The two solutions of `R(θ) = 1` in `[0, π)`.
    pub fn unit_gain_roots(&self) -> [f64; 2] {
        let c = (-self.b_modulus / self.a_modulus).acos();
        let s = self.phi + self.psi;
        let mut r = [
            ProjectiveDirection::new((c - s) / 2.0).angle(),
            ProjectiveDirection::new((-c - s) / 2.0).angle(),
        ];
        r.sort_by(f64::total_cmp);
        r
    }

    /// Lebesgue measure of `{θ ∈ [0, π) : R(θ) > 1}`.
    pub fn gain_region_measure(&self) -> f64 {
        (-self.b_modulus / self.a_modulus).acos()
    }
}

pub fn norm_gain_profile(s: &ScatteringData) -> Result<NormGainProfile> {
    let pl = polar(s)?;
    if pl.b_mod < ZERO_REFLECTION {
        return Err(Error::ZeroReflection { modulus: pl.b_mod });
    }
    let eta = -(pl.phi + pl.psi) / 2.0;
    // K: cos(2(θ − η)) ≥ −B/(2A); at its ends R² = 1 + B².
    let half_width = (-pl.b_mod / (2.0 * pl.a_mod)).acos() / 2.0;
    Ok(NormGainProfile {
        k: pl.k,
        a_modulus: pl.a_mod,
        b_modulus: pl.b_mod,
        alpha_phase: pl.alpha_phase,
        beta_phase: pl.beta_phase,
        phi: pl.phi,
        psi: pl.psi,
        eta,
        eta_prime: eta + FRAC_PI_2,
        half_width,
        gain: (1.0 + pl.b_mod * pl.b_mod).sqrt(),
    })
}

/// `|‖g̃ v(θ)‖² − 1 − 2B(B + A cos(2θ + φ + ψ))|`, the left side computed by
/// applying the matrix rebuilt from `(a, b)`.
pub fn r_squared_identity_check(s: &ScatteringData, theta: f64) -> Result<f64> {
    let pl = polar(s)?;
    let g = crate::scattering::transfer_from_scattering(s)?;
    let gt = conjugate_to_tilde(&g, pl.k)?;
    let v = gt.apply([theta.cos(), theta.sin()]);
    let lhs = v[0] * v[0] + v[1] * v[1];
    let rhs = 1.0 + 2.0 * pl.b_mod * (pl.b_mod + pl.a_mod * (2.0 * theta + pl.phi + pl.psi).cos());
    Ok((lhs - rhs).abs())
}

/// A generator of the group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Letter {
    /// `g₀(E)`
    Free,
    /// `g(E)`
    Site,
}

/// How a witness word was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WitnessMethod {
    /// Powers of the hyperbolic free matrix (`E < 0`).
    HyperbolicPowers,
    /// Rotate into the gain interval, then apply `g̃`.
    GainIntervalGreedy,
    /// Best-growth search over words, see [`word_search`].
    WordSearch,
}

/// A word whose product has norm above [`WITNESS_NORM`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoncompactnessWitness {
    pub energy: f64,
    /// Letters in order of application (first letter acts first).
    pub word: Vec<Letter>,
    /// The product in original coordinates.
    pub product: TransferMatrix,
    /// Norm of `product`.
    pub norm: f64,
    /// Norm of the product in tilde coordinates (`E > 0` only).
    pub tilde_norm: Option<f64>,
    pub method: WitnessMethod,
}

impl NoncompactnessWitness {
    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }
}

/// Multiply out a word in original coordinates.
pub fn word_product(p: &SingleSitePotential, energy: f64, word: &[Letter]) -> TransferMatrix {
    let g0 = free_transfer_matrix(energy);
    let g = transfer_matrix(p, energy);
    word.iter()
        .fold(TransferMatrix::IDENTITY, |acc, l| match l {
            Letter::Free => g0 * acc,
            Letter::Site => g * acc,
        })
}

/// Build a word with norm > 10.
///
/// `E < 0`: powers of the hyperbolic `g₀`. `E = k² > 0`: starting at the
/// direction of maximal gain, apply `g̃` whenever the current direction lies
/// in the gain interval `K` and the rotation `g̃₀` otherwise; since `|K| > π/2`
/// the rotation brings every direction back into `K` unless `k ∈ πℤ`.
///
/// Fails with [`Error::ZeroReflection`] when `b(k) = 0` (the conjugated group
/// is a group of rotations) and with [`Error::WitnessNotFound`] when no word
/// of length `max_word_len` exceeds the threshold.
pub fn noncompactness_witness(
    p: &SingleSitePotential,
    energy: f64,
    max_word_len: usize,
) -> Result<NoncompactnessWitness> {
    if energy < 0.0 {
        let g0 = free_transfer_matrix(energy);
        let mut prod = TransferMatrix::IDENTITY;
        let mut best = 0.0f64;
        for n in 1..=max_word_len {
            prod = g0 * prod;
            let norm = prod.norm();
            best = best.max(norm);
            if norm > WITNESS_NORM {
                return Ok(NoncompactnessWitness {
                    energy,
                    word: vec![Letter::Free; n],
                    product: prod,
                    norm,
                    tilde_norm: None,
                    method: WitnessMethod::HyperbolicPowers,
                });
            }
        }
        return Err(Error::WitnessNotFound {
            max_len: max_word_len,
            best_norm: best,
        });
    }
    if energy == 0.0 {
        return Err(Error::InvalidArgument(
            "E = 0 is the scattering pole".into(),
        ));
    }
    let k = energy.sqrt();
    let s = jost_coefficients(p, Complex64::new(k, 0.0))?;
    let profile = norm_gain_profile(&s)?;
    let g = transfer_matrix(p, energy);
    let g0 = free_transfer_matrix(energy);
    let gt = conjugate_to_tilde(&g, k)?;

    let g0t = TransferMatrix::rotation(k);

    let mut v = ProjectiveDirection::new(profile.eta).vector();
    let mut word = Vec::new();
    let mut prod = TransferMatrix::IDENTITY;
    let mut best = 0.0f64;
    while word.len() < max_word_len {
        let theta = v[1].atan2(v[0]);
        let (letter, mt, m) = if profile.contains(theta) {
            (Letter::Site, gt, g)
        } else {
            (Letter::Free, g0t, g0)
        };
        word.push(letter);
        prod = m * prod;
        let w = mt.apply(v);
        let n = (w[0] * w[0] + w[1] * w[1]).sqrt();
        v = [w[0] / n, w[1] / n];
        let norm = prod.norm();
        best = best.max(norm);
        if norm > WITNESS_NORM {
            let tilde_norm = Some(conjugate_to_tilde(&prod, k)?.norm());
            return Ok(NoncompactnessWitness {
                energy,
                word,
                product: prod,
                norm,
                tilde_norm,
                method: WitnessMethod::GainIntervalGreedy,
            });
        }
    }
    if let Some((word, prod)) = word_search(
        &[(Letter::Free, g0), (Letter::Site, g)],
        max_word_len,
        SEARCH_BINS,
        WITNESS_NORM,
    ) {
        let tilde_norm = Some(conjugate_to_tilde(&prod, k)?.norm());
        return Ok(NoncompactnessWitness {
            energy,
            norm: prod.norm(),
            word,
            product: prod,
            tilde_norm,
            method: WitnessMethod::WordSearch,
        });
    }
    Err(Error::WitnessNotFound {
        max_len: max_word_len,
        best_norm: best,
    })
}

/// Search for a word of length `≤ max_len` whose product exceeds `threshold`
/// in norm.
///
/// Dynamic programming over the projective line cut into `bins` cells: each
/// cell keeps the single vector (and the word producing it) with the largest
/// accumulated log-growth among those landing in it. The returned product is
/// recomputed from the word, so the bound `‖W‖ ≥ |Wv|/|v|` is exact.
pub fn word_search(
    generators: &[(Letter, TransferMatrix)],
    max_len: usize,
    bins: usize,
    threshold: f64,
) -> Option<(Vec<Letter>, TransferMatrix)> {
    #[derive(Clone, Copy)]
    struct Cell {
        v: [f64; 2],
        log_norm: f64,
        node: u32,
    }
    const ROOT: u32 = u32::MAX;
    let bin_of = |v: [f64; 2]| {
        ((ProjectiveDirection::from_vector(v).angle() / PI * bins as f64) as usize).min(bins - 1)
    };
    // (parent node, generator index) for every cell ever kept
    let mut nodes: Vec<(u32, u8)> = Vec::new();
    let mut cells: Vec<Option<Cell>> = (0..bins)
        .map(|b| {
            Some(Cell {
                v: ProjectiveDirection::new(PI * (b as f64 + 0.5) / bins as f64).vector(),
                log_norm: 0.0,
                node: ROOT,
            })
        })
        .collect();
    let log_threshold = threshold.ln();
    for _ in 0..max_len {
        let mut next: Vec<Option<Cell>> = vec![None; bins];
        let mut origin: Vec<(u32, u8)> = vec![(ROOT, 0); bins];
        for cell in cells.iter().flatten() {
            for (gi, (_, m)) in generators.iter().enumerate() {
                let w = m.apply(cell.v);
                let n = (w[0] * w[0] + w[1] * w[1]).sqrt();
                let v = [w[0] / n, w[1] / n];
                let log_norm = cell.log_norm + n.ln();
                let b = bin_of(v);
                if next[b].is_none_or(|c| log_norm > c.log_norm) {
                    next[b] = Some(Cell {
                        v,
                        log_norm,
                        node: ROOT,
                    });
                    origin[b] = (cell.node, gi as u8);
                }
            }
        }
        let mut best: Option<(f64, u32)> = None;
        for (b, slot) in next.iter_mut().enumerate() {
            if let Some(c) = slot {
                c.node = nodes.len() as u32;
                nodes.push(origin[b]);
                if best.is_none_or(|(l, _)| c.log_norm > l) {
                    best = Some((c.log_norm, c.node));
                }
            }
        }
        cells = next;
        if let Some((log_norm, node)) = best {
            if log_norm > log_threshold {
                let mut idx = Vec::new();
                let mut cur = node;
                while cur != ROOT {
                    let (parent, gi) = nodes[cur as usize];
                    idx.push(gi);
                    cur = parent;
                }
                idx.reverse();
                let word: Vec<Letter> = idx.iter().map(|&gi| generators[gi as usize].0).collect();
                let prod = idx.iter().fold(TransferMatrix::IDENTITY, |acc, &gi| {
                    generators[gi as usize].1 * acc
                });
                if prod.norm() > threshold {
                    return Some((word, prod));
                }
            }
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Irreducibility {
    Certified,
    Inconclusive,
}

/// Argument that extends the finite direction test to every direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoveringArgument {
    /// `E > 0`, `k ∉ (π/2)ℤ`: the rotation `g̃₀` alone moves every direction
    /// to three distinct ones.
    RotationPowers,
    /// `E < 0`: `g₀` has infinite orbits off its two fixed directions, and
    /// `g` moves both fixed directions off themselves.
    HyperbolicTwoCase,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrreducibilityVerdict {
    pub energy: f64,
    pub status: Irreducibility,
    pub covering: Option<CoveringArgument>,
    pub directions_tested: usize,
    /// Smallest number of distinct directions found in any tested orbit
    /// (the search stops at 3).
    pub min_orbit_size: usize,
    pub failing_direction: Option<f64>,
}

/// Number of pairwise distinct directions (capped at `cap`) in the orbit of
/// `start` under words of length `≤ depth` in the generators and their
/// inverses.
pub fn orbit_size(
    start: ProjectiveDirection,
    generators: &[TransferMatrix],
    depth: usize,
    cap: usize,
) -> usize {
    let mut reps = vec![start];
    let mut frontier = vec![start];
    for _ in 0..depth {
        let mut next = Vec::new();
        for d in &frontier {
            for g in generators {
                let img = d.image(g);
                if reps.iter().all(|r| r.distance(img) > DIRECTION_TOL) {
                    reps.push(img);
                    next.push(img);
                    if reps.len() >= cap {
                        return reps.len();
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    reps.len()
}

/// Test that every one of `n_test_dirs` directions (plus the fixed
/// directions of `g₀` when `E < 0`) has at least three distinct images under
/// the group.
pub fn strong_irreducibility_check(
    p: &SingleSitePotential,
    energy: f64,
    n_test_dirs: usize,
    orbit_depth: usize,
) -> IrreducibilityVerdict {
    let g0 = free_transfer_matrix(energy);
    let g = transfer_matrix(p, energy);
    let gens = [g0, g, g0.inverse_unimodular(), g.inverse_unimodular()];

    let mut dirs: Vec<ProjectiveDirection> = (0..n_test_dirs)
        .map(|i| ProjectiveDirection::new(PI * i as f64 / n_test_dirs as f64))
        .collect();
    let covering = if energy > 0.0 {
        let k = energy.sqrt();
        let off_lattice =
            ProjectiveDirection::new(2.0 * k).distance(ProjectiveDirection::new(0.0)) > 1e-9;
        off_lattice.then_some(CoveringArgument::RotationPowers)
    } else if energy < 0.0 {
        let alpha = (-energy).sqrt();
        dirs.push(ProjectiveDirection::from_vector([1.0, alpha]));
        dirs.push(ProjectiveDirection::from_vector([1.0, -alpha]));
        negative_energy_unstable_check(p, energy)
            .unwrap_or(false)
            .then_some(CoveringArgument::HyperbolicTwoCase)
    } else {
        None
    };

    let mut min_orbit = usize::MAX;
    let mut failing = None;
    for d in &dirs {
        let n = orbit_size(*d, &gens, orbit_depth, 3);
        if n < min_orbit {
            min_orbit = n;
        }
        if n < 3 && failing.is_none() {
            failing = Some(d.angle());
        }
    }
    IrreducibilityVerdict {
        energy,
        status: if failing.is_none() {
            Irreducibility::Certified
        } else {
            Irreducibility::Inconclusive
        },
        covering,
        directions_tested: dirs.len(),
        min_orbit_size: if dirs.is_empty() { 0 } else { min_orbit },
        failing_direction: failing,
    }
}

/// For `E = −α² < 0`: does `g(E)` move both eigendirections `(1, ±α)` of
/// `g₀(E)` off the pair?
pub fn negative_energy_unstable_check(p: &SingleSitePotential, energy: f64) -> Result<bool> {
    if !(energy < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "expected E < 0, got {energy}"
        )));
    }
    let alpha = (-energy).sqrt();
    let g = transfer_matrix(p, energy);
    let vp = ProjectiveDirection::from_vector([1.0, alpha]);
    let vm = ProjectiveDirection::from_vector([1.0, -alpha]);
    Ok([vp, vm].iter().all(|v| {
        let img = v.image(&g);
        img.distance(vp) > 1e-8 && img.distance(vm) > 1e-8
    }))
}
