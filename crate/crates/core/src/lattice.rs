//! Finite-dimensional lattices with nearest-neighbour quantization,
//! modulo reduction and dither sampling.
//!
//! Three families are supported, each as a scaled copy `c·Λ₀` of a unit
//! lattice:
//!
//! * `Z^n` (any `n ≥ 1`; `n = 1` is the scalar interval lattice),
//! * the checkerboard lattice `D4 = {z ∈ Z⁴ : Σz even}`,
//! * the Gosset lattice `E8 = D8 ∪ (D8 + ½·1)`.
//!
//! The generator matrix `G` holds the basis vectors as columns, so
//! `Λ = G·Z^n`.
//!
//! Ties on Voronoi boundaries are resolved deterministically. For `Z^n` every
//! coordinate rounds half toward `−∞`, which picks the lexicographically
//! smallest integer vector and makes the fundamental cell of `cZ` the
//! interval `(−c/2, c/2]`. For `D4`/`E8` the parity fix-up flips the first
//! coordinate with the largest rounding error, and `E8` prefers the `D8`
//! coset on exact ties.

use std::f64::consts::{E, PI, SQRT_2};
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use rand::Rng;

use crate::error::{domain, Error, Result};

/// Normalized second moment of the 24-cell (Voronoi cell of D4).
pub const NSM_D4: f64 = 13.0 / (120.0 * SQRT_2);
/// Normalized second moment of the E8 Voronoi cell.
pub const NSM_E8: f64 = 929.0 / 12960.0;
/// Normalized second moment of the cube.
pub const NSM_CUBE: f64 = 1.0 / 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LatticeKind {
    Integer,
    D4,
    E8,
}

impl LatticeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LatticeKind::Integer => "z",
            LatticeKind::D4 => "d4",
            LatticeKind::E8 => "e8",
        }
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LatticeKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "z" | "zn" | "integer" | "cubic" => Ok(LatticeKind::Integer),
            "d4" => Ok(LatticeKind::D4),
            "e8" => Ok(LatticeKind::E8),
            other => Err(format!("unknown lattice `{other}` (expected z, d4 or e8)")),
        }
    }
}

/// A point of the lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePoint(pub Vec<f64>);

/// A modulo residue, i.e. a point of the fundamental Voronoi cell `V0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosetVector(pub Vec<f64>);

impl Deref for LatticePoint {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Deref for CosetVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl CosetVector {
    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// A scaled lattice `c·Λ₀`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    kind: LatticeKind,
    dim: usize,
    scale: f64,
    /// Column-major n×n generator of the unit lattice Λ₀.
    unit_generator: Vec<f64>,
}

impl Lattice {
    /// `c·Z^n`.
    pub fn integer(dim: usize, scale: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig(
                "lattice dimension must be >= 1".into(),
            ));
        }
        let mut g = vec![0.0; dim * dim];
        for i in 0..dim {
            g[i * dim + i] = 1.0;
        }
        Self::build(LatticeKind::Integer, dim, scale, g)
    }

    /// `c·D4`.
    pub fn d4(scale: f64) -> Result<Self> {
        #[rustfmt::skip]
        let cols = [
            [-1.0, -1.0,  0.0,  0.0],
            [ 1.0, -1.0,  0.0,  0.0],
            [ 0.0,  1.0, -1.0,  0.0],
            [ 0.0,  0.0,  1.0, -1.0],
        ];
        Self::build(LatticeKind::D4, 4, scale, cols.concat())
    }

    /// `c·E8` in the even coordinate system (`D8 ∪ D8 + ½`).
    pub fn e8(scale: f64) -> Result<Self> {
        let mut cols = vec![0.0; 64];
        cols[0] = 2.0;
        for j in 1..7 {
            cols[j * 8 + j - 1] = -1.0;
            cols[j * 8 + j] = 1.0;
        }
        for i in 0..8 {
            cols[7 * 8 + i] = 0.5;
        }
        Self::build(LatticeKind::E8, 8, scale, cols)
    }

    /// Build a lattice of the given family. `dim` must be 4 for D4 and 8 for E8.
    pub fn new(kind: LatticeKind, dim: usize, scale: f64) -> Result<Self> {
        match kind {
            LatticeKind::Integer => Self::integer(dim, scale),
            LatticeKind::D4 if dim == 4 => Self::d4(scale),
            LatticeKind::E8 if dim == 8 => Self::e8(scale),
            _ => Err(Error::InvalidConfig(format!(
                "{kind} lattice has no dimension {dim}"
            ))),
        }
    }

    fn build(kind: LatticeKind, dim: usize, scale: f64, unit_generator: Vec<f64>) -> Result<Self> {
        if !scale.is_finite() || scale <= 0.0 {
            return Err(domain(
                "Lattice",
                format!("scale must be finite and > 0, got {scale}"),
            ));
        }
        Ok(Lattice {
            kind,
            dim,
            scale,
            unit_generator,
        })
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Generator matrix `G` (column-major, basis vectors as columns).
    pub fn generator(&self) -> Vec<f64> {
        self.unit_generator.iter().map(|g| g * self.scale).collect()
    }

    fn unit_volume(&self) -> f64 {
        match self.kind {
            LatticeKind::Integer | LatticeKind::E8 => 1.0,
            LatticeKind::D4 => 2.0,
        }
    }

    /// Cell volume `|det G|`.
    pub fn cell_volume(&self) -> f64 {
        self.unit_volume() * self.scale.powi(self.dim as i32)
    }

    /// Normalized second moment `G(Λ)` (scale invariant).
    pub fn nsm(&self) -> f64 {
        match self.kind {
            LatticeKind::Integer => NSM_CUBE,
            LatticeKind::D4 => NSM_D4,
            LatticeKind::E8 => NSM_E8,
        }
    }

    /// Second moment per dimension `σ²(Λ) = G(Λ)·V^{2/n}`.
    pub fn second_moment(&self) -> f64 {
        self.nsm() * self.unit_volume().powf(2.0 / self.dim as f64) * self.scale * self.scale
    }

    /// Rescale so that `σ²(Λ) = target_power`.
    pub fn scale_to_power(&self, target_power: f64) -> Result<Lattice> {
        if !target_power.is_finite() || target_power <= 0.0 {
            return Err(domain(
                "scale_to_power",
                format!("target power must be finite and > 0, got {target_power}"),
            ));
        }
        let factor = (target_power / self.second_moment()).sqrt();
        let mut out = self.clone();
        out.scale *= factor;
        Ok(out)
    }

    /// Volume-to-noise ratio `V^{2/n}/σ²`.
    pub fn vnr(&self, noise_variance: f64) -> Result<f64> {
        if !(noise_variance > 0.0) {
            return Err(domain(
                "vnr",
                format!("noise variance must be > 0, got {noise_variance}"),
            ));
        }
        Ok(self.cell_volume().powf(2.0 / self.dim as f64) / noise_variance)
    }

    /// Looseness `μ·G(Λ) = σ²(Λ)/σ²` of this lattice against a noise level.
    pub fn looseness(&self, noise_variance: f64) -> Result<f64> {
        Ok(self.vnr(noise_variance)? * self.nsm())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: len,
            });
        }
        Ok(())
    }

    /// Nearest lattice point to `x`.
    pub fn quantize_nn(&self, x: &[f64]) -> Result<LatticePoint> {
        self.check_len(x.len())?;
        let mut out = vec![0.0; self.dim];
        self.quantize_into(x, &mut out);
        Ok(LatticePoint(out))
    }

    /// `x mod Λ = x − Q_Λ(x)`.
    pub fn modulo(&self, x: &[f64]) -> Result<CosetVector> {
        self.check_len(x.len())?;
        let mut out = x.to_vec();
        self.modulo_in_place(&mut out);
        Ok(CosetVector(out))
    }

    /// True when `Q_Λ(x) = 0`, i.e. `x ∈ V0`.
    pub fn in_fundamental_cell(&self, x: &[f64]) -> bool {
        debug_assert_eq!(x.len(), self.dim);
        let mut q = [0.0f64; 8];
        let mut heap;
        let buf: &mut [f64] = if self.dim <= 8 {
            &mut q[..self.dim]
        } else {
            heap = vec![0.0; self.dim];
            &mut heap
        };
        self.quantize_into(x, buf);
        buf.iter().all(|&v| v == 0.0)
    }

    /// Allocation-free quantizer; `x` and `out` must have length `n`.
    pub fn quantize_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        let inv = 1.0 / self.scale;
        for (o, &xi) in out.iter_mut().zip(x) {
            *o = xi * inv;
        }
        match self.kind {
            LatticeKind::Integer => {
                for o in out.iter_mut() {
                    *o = round_half_down(*o);
                }
            }
            LatticeKind::D4 => {
                let y: [f64; 4] = [out[0], out[1], out[2], out[3]];
                nearest_dn(&y, out);
            }
            LatticeKind::E8 => {
                let mut y = [0.0f64; 8];
                y.copy_from_slice(out);
                nearest_e8(&y, out);
            }
        }
        for o in out.iter_mut() {
            *o *= self.scale;
        }
    }

    /// Allocation-free modulo reduction.
    pub fn modulo_in_place(&self, x: &mut [f64]) {
        let mut q = [0.0f64; 8];
        let mut heap;
        let buf: &mut [f64] = if self.dim <= 8 {
            &mut q[..self.dim]
        } else {
            heap = vec![0.0; self.dim];
            &mut heap
        };
        self.quantize_into(x, buf);
        for (xi, qi) in x.iter_mut().zip(buf.iter()) {
            *xi -= qi;
        }
    }

    /// A dither uniformly distributed on `V0`: a uniform point of the
    /// fundamental parallelepiped `G·[0,1)^n` reduced modulo Λ.
    pub fn sample_dither<R: Rng + ?Sized>(&self, rng: &mut R) -> CosetVector {
        let mut out = vec![0.0; self.dim];
        self.sample_dither_into(rng, &mut out);
        CosetVector(out)
    }

    pub fn sample_dither_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        out.fill(0.0);
        let n = self.dim;
        for j in 0..n {
            let u: f64 = rng.random();
            let col = &self.unit_generator[j * n..(j + 1) * n];
            for (o, g) in out.iter_mut().zip(col) {
                *o += g * u * self.scale;
            }
        }
        self.modulo_in_place(out);
    }
}

/// Asymptotic VNR of a good lattice at looseness `L`: `μ = 2πe·L`.
pub fn looseness_to_vnr(looseness: f64) -> f64 {
    2.0 * PI * E * looseness
}

#[inline]
fn round_half_down(x: f64) -> f64 {
    (x - 0.5).ceil()
}

// Conway–Sloane D_n decoder: round every coordinate, and if the coordinate
// sum is odd re-round the worst coordinate the other way.
fn nearest_dn(y: &[f64], out: &mut [f64]) {
    let mut sum = 0.0;
    let mut worst = 0usize;
    let mut worst_err = -1.0;
    for (i, (&yi, o)) in y.iter().zip(out.iter_mut()).enumerate() {
        let r = round_half_down(yi);
        *o = r;
        sum += r;
        let err = (yi - r).abs();
        if err > worst_err {
            worst_err = err;
            worst = i;
        }
    }
    if sum.rem_euclid(2.0) != 0.0 {
        let yi = y[worst];
        out[worst] += if yi > out[worst] { 1.0 } else { -1.0 };
    }
}

fn nearest_e8(y: &[f64; 8], out: &mut [f64]) {
    let mut a = [0.0f64; 8];
    nearest_dn(y, &mut a);
    let shifted: [f64; 8] = std::array::from_fn(|i| y[i] - 0.5);
    let mut b = [0.0f64; 8];
    nearest_dn(&shifted, &mut b);
    for v in b.iter_mut() {
        *v += 0.5;
    }
    let da: f64 = a.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum();
    let db: f64 = b.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum();
    out.copy_from_slice(if db < da { &b } else { &a });
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn all_lattices() -> Vec<Lattice> {
        vec![
            Lattice::integer(1, 0.7).unwrap(),
            Lattice::integer(3, 1.3).unwrap(),
            Lattice::d4(0.9).unwrap(),
            Lattice::e8(1.1).unwrap(),
        ]
    }

    // Exhaustive nearest point of the unscaled lattice: every candidate
    // whose coordinates lie within ±1 of the rounded (or half-shifted)
    // input, filtered by coset membership.
    fn brute_nearest(l: &Lattice, x: &[f64]) -> Vec<f64> {
        let n = l.dimension();
        let y: Vec<f64> = x.iter().map(|v| v / l.scale()).collect();
        let shifts: &[f64] = match l.kind() {
            LatticeKind::E8 => &[0.0, 0.5],
            _ => &[0.0],
        };
        let mut best = (f64::INFINITY, vec![0.0; n]);
        for &h in shifts {
            for idx in 0..3usize.pow(n as u32) {
                let mut k = idx;
                let mut p = vec![0.0; n];
                for i in 0..n {
                    p[i] = (y[i] - h).round() + (k % 3) as f64 - 1.0 + h;
                    k /= 3;
                }
                let member = match l.kind() {
                    LatticeKind::Integer => true,
                    _ => p.iter().map(|v| v - h).sum::<f64>().rem_euclid(2.0) == 0.0,
                };
                let d: f64 = p.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
                if member && d < best.0 {
                    best = (d, p);
                }
            }
        }
        best.1.iter().map(|v| v * l.scale()).collect()
    }

    fn dist2(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
    }

    #[test]
    fn scalar_examples() {
        let c = 2.5;
        let l = Lattice::integer(1, c).unwrap();
        assert_eq!(l.quantize_nn(&[0.49 * c]).unwrap().0, vec![0.0]);
        let m = l.modulo(&[1.3 * c]).unwrap();
        assert!((m[0] - 0.3 * c).abs() < 1e-12);
        // Boundary: +c/2 stays, −c/2 wraps to +c/2.
        assert_eq!(l.modulo(&[0.5 * c]).unwrap()[0], 0.5 * c);
        assert_eq!(l.modulo(&[-0.5 * c]).unwrap()[0], 0.5 * c);
    }

    #[test]
    fn z2_componentwise_rounding() {
        let l = Lattice::integer(2, 1.0).unwrap();
        assert_eq!(l.quantize_nn(&[0.7, -1.2]).unwrap().0, vec![1.0, -1.0]);
        assert_eq!(l.quantize_nn(&[0.5, -0.5]).unwrap().0, vec![0.0, -1.0]);
    }

    #[test]
    fn dimension_mismatch_is_error() {
        let l = Lattice::d4(1.0).unwrap();
        assert!(matches!(
            l.quantize_nn(&[0.0; 3]),
            Err(Error::DimensionMismatch {
                expected: 4,
                got: 3
            })
        ));
        assert!(l.modulo(&[0.0; 5]).is_err());
        assert!(Lattice::new(LatticeKind::E8, 4, 1.0).is_err());
        assert!(Lattice::integer(0, 1.0).is_err());
        assert!(Lattice::integer(2, 0.0).is_err());
    }

    #[test]
    fn lattice_points_are_fixed_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for l in all_lattices() {
            let n = l.dimension();
            let g = l.generator();
            for _ in 0..200 {
                let coef: Vec<f64> = (0..n).map(|_| rng.random_range(-5i64..=5) as f64).collect();
                let mut p = vec![0.0; n];
                for j in 0..n {
                    for i in 0..n {
                        p[i] += g[j * n + i] * coef[j];
                    }
                }
                let q = l.quantize_nn(&p).unwrap();
                assert!(dist2(&q, &p) < 1e-18, "{:?}", l.kind());
                let m = l.modulo(&p).unwrap();
                assert!(m.iter().all(|v| v.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn quantizer_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for l in [
            Lattice::integer(2, 1.3).unwrap(),
            Lattice::d4(0.8).unwrap(),
            Lattice::e8(1.0).unwrap(),
        ] {
            let trials = if l.dimension() == 8 { 200 } else { 2000 };
            for _ in 0..trials {
                let x: Vec<f64> = (0..l.dimension())
                    .map(|_| rng.random_range(-3.0..3.0))
                    .collect();
                let fast = l.quantize_nn(&x).unwrap();
                let brute = brute_nearest(&l, &x);
                assert!(
                    (dist2(&fast, &x) - dist2(&brute, &x)).abs() < 1e-12,
                    "{:?} x={x:?}",
                    l.kind()
                );
            }
        }
    }

    #[test]
    fn volumes_and_moments() {
        let l = Lattice::integer(1, 3.0).unwrap();
        assert!((l.second_moment() - 9.0 / 12.0).abs() < 1e-15);
        assert!((l.nsm() - 1.0 / 12.0).abs() < 1e-15);
        assert!((Lattice::d4(1.0).unwrap().cell_volume() - 2.0).abs() < 1e-15);
        assert!((Lattice::e8(1.0).unwrap().cell_volume() - 1.0).abs() < 1e-15);
        for l in all_lattices() {
            let n = l.dimension() as f64;
            let nsm = l.second_moment() / l.cell_volume().powf(2.0 / n);
            assert!((nsm - l.nsm()).abs() < 1e-12);
            assert!(l.nsm() >= 1.0 / (2.0 * PI * E));
        }
    }

    #[test]
    fn scale_to_power_examples() {
        let p = 7.0;
        let l = Lattice::integer(1, 1.0).unwrap().scale_to_power(p).unwrap();
        assert!((l.scale() - (12.0 * p).sqrt()).abs() < 1e-12);
        let l = Lattice::integer(5, 1.0)
            .unwrap()
            .scale_to_power(1.0)
            .unwrap();
        assert!((l.scale() - 12f64.sqrt()).abs() < 1e-12);
        for l in all_lattices() {
            let s = l.scale_to_power(42.0).unwrap();
            assert!(((s.second_moment() - 42.0) / 42.0).abs() < 1e-9);
        }
        let base = Lattice::d4(1.0).unwrap();
        let twice = Lattice::d4(2.0).unwrap();
        assert!((twice.second_moment() - 4.0 * base.second_moment()).abs() < 1e-12);
        assert!(base.scale_to_power(0.0).is_err());
    }

    #[test]
    fn vnr_relations() {
        let l = Lattice::integer(1, 2.0).unwrap();
        let noise = 0.3;
        let mu = l.vnr(noise).unwrap();
        assert!((mu - 4.0 / 0.3).abs() < 1e-12);
        // L = μ·G(Λ) = σ²(Λ)/σ²
        assert!((l.looseness(noise).unwrap() - l.second_moment() / noise).abs() < 1e-12);
        // μ doubles when V^{2/n} doubles.
        let l2 = Lattice::integer(1, 2.0 * SQRT_2).unwrap();
        assert!((l2.vnr(noise).unwrap() - 2.0 * mu).abs() < 1e-9);
        assert!((looseness_to_vnr(1.0) - 2.0 * PI * E).abs() < 1e-12);
        assert!(l.vnr(0.0).is_err());
    }

    #[test]
    fn modulo_is_idempotent_and_distributive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for l in all_lattices() {
            let n = l.dimension();
            for _ in 0..10_000 {
                let x: Vec<f64> = (0..n).map(|_| rng.random_range(-20.0..20.0)).collect();
                let y: Vec<f64> = (0..n).map(|_| rng.random_range(-20.0..20.0)).collect();
                let mx = l.modulo(&x).unwrap();
                let mmx = l.modulo(&mx).unwrap();
                assert!(dist2(&mx, &mmx) < 1e-24);
                assert!(l.in_fundamental_cell(&mx));
                let lhs_in: Vec<f64> = mx.iter().zip(&y).map(|(a, b)| a + b).collect();
                let rhs_in: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
                let lhs = l.modulo(&lhs_in).unwrap();
                let rhs = l.modulo(&rhs_in).unwrap();
                assert!(dist2(&lhs, &rhs).sqrt() < 1e-12, "{:?}", l.kind());
            }
        }
    }

    #[test]
    fn dither_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for l in all_lattices() {
            let n = l.dimension();
            let draws = 100_000;
            let mut mean = vec![0.0; n];
            let mut pow = 0.0;
            for _ in 0..draws {
                let d = l.sample_dither(&mut rng);
                assert!(l.in_fundamental_cell(&d));
                for (m, v) in mean.iter_mut().zip(d.iter()) {
                    *m += v;
                }
                pow += d.iter().map(|v| v * v).sum::<f64>();
            }
            let sm = l.second_moment();
            let sd_mean = (sm / draws as f64).sqrt();
            for m in &mean {
                assert!(
                    (m / draws as f64).abs() < 4.0 * sd_mean,
                    "{:?} mean {m}",
                    l.kind()
                );
            }
            let p = pow / (draws * n) as f64;
            assert!(((p - sm) / sm).abs() < 0.01, "{:?}: {p} vs {sm}", l.kind());
        }
    }

    #[test]
    fn scalar_dither_is_uniform() {
        // One-sample Kolmogorov–Smirnov test against U(−c/2, c/2].
        let c = 3.0;
        let l = Lattice::integer(1, c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut xs: Vec<f64> = (0..20_000).map(|_| l.sample_dither(&mut rng)[0]).collect();
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = (x + c / 2.0) / c;
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max);
        // Asymptotic critical value at p = 0.01 is 1.628/√n.
        assert!(d < 1.628 / n.sqrt(), "KS statistic {d}");
    }

    #[test]
    fn crypto_lemma_power() {
        // [s + V] mod Λ is uniform on V0 for any fixed s.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for l in [
            Lattice::integer(1, 2.0).unwrap(),
            Lattice::d4(1.0).unwrap(),
            Lattice::e8(1.0).unwrap(),
        ] {
            let n = l.dimension();
            let s: Vec<f64> = (0..n).map(|i| 0.49 * l.scale() + 13.7 * i as f64).collect();
            let draws = 50_000;
            let mut pow = 0.0;
            for _ in 0..draws {
                let v = l.sample_dither(&mut rng);
                let x: Vec<f64> = s.iter().zip(v.iter()).map(|(a, b)| a + b).collect();
                pow += l.modulo(&x).unwrap().iter().map(|t| t * t).sum::<f64>();
            }
            let p = pow / (draws * n) as f64;
            let sm = l.second_moment();
            assert!(((p - sm) / sm).abs() < 0.01, "{:?}: {p} vs {sm}", l.kind());
        }
    }

    #[test]
    fn residues_requantize_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for l in all_lattices() {
            for _ in 0..1000 {
                let x: Vec<f64> = (0..l.dimension())
                    .map(|_| rng.random_range(-9.0..9.0))
                    .collect();
                let q = l.quantize_nn(&x).unwrap();
                let r: Vec<f64> = x.iter().zip(q.iter()).map(|(a, b)| a - b).collect();
                assert!(l.quantize_nn(&r).unwrap().iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("E8".parse::<LatticeKind>().unwrap(), LatticeKind::E8);
        assert_eq!("z".parse::<LatticeKind>().unwrap(), LatticeKind::Integer);
        assert!("leech".parse::<LatticeKind>().is_err());
    }
}
