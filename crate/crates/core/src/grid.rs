//! Centered periodic grids, complex fields, spectral transforms, and the
//! free Schrödinger propagator e^{itΔ}.
//!
//! The box is [-L, L)^d sampled at n points per axis (n a power of two), with
//! coordinates x_j = -L + j·(2L/n) and wavenumbers k_m = π·m/L for integer
//! m ∈ [-n/2, n/2) stored in standard FFT order. Quadrature uses the uniform
//! cell volume (2L/n)^d. e^{itΔ} multiplies spectral coefficients by
//! e^{-i|k|²t} and is exactly unitary in the grid L² norm.

use std::sync::{Arc, OnceLock};

use rustfft::{Fft, FftPlanner};

use crate::error::Error;
use crate::{exec, Result, C64};

/// Maximum spatial dimension supported.
pub const MAX_DIM: usize = 3;

pub struct Grid {
    d: usize,
    n: usize,
    half_length: f64,
    coords: Vec<f64>,
    waves: Vec<f64>,
    plan: OnceLock<SpectralPlan>,
}

impl Grid {
    /// Build a grid; `n` must be a power of two ≥ 8 and `d` in 1..=3.
    pub fn new(d: usize, n: usize, half_length: f64) -> Result<Grid> {
        if !(1..=MAX_DIM).contains(&d) {
            return Err(Error::InvalidGrid(format!("dimension {d} not in 1..=3")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half length must be positive and finite, got {half_length}"
            )));
        }
        // Total point count must fit comfortably in memory/indexing.
        let total = (n as u128).pow(d as u32);
        if total > (1u128 << 28) {
            return Err(Error::InvalidGrid(format!(
                "grid of {total} points is larger than supported"
            )));
        }
        let h = 2.0 * half_length / n as f64;
        let coords = (0..n).map(|j| -half_length + j as f64 * h).collect();
        // FFT ordering: m = 0, 1, ..., n/2-1, -n/2, ..., -1.
        let waves = (0..n)
            .map(|m| {
                let m_phys = if m < n / 2 { m as i64 } else { m as i64 - n as i64 };
                std::f64::consts::PI * m_phys as f64 / half_length
            })
            .collect();
        Ok(Grid { d, n, half_length, coords, waves, plan: OnceLock::new() })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    /// Per-axis sample coordinates (same for every axis).
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Per-axis wavenumbers in FFT order.
    pub fn waves(&self) -> &[f64] {
        &self.waves
    }

    /// Grid spacing 2L/n.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    /// Quadrature weight (2L/n)^d of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    /// Total number of grid points n^d.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest wavenumber magnitude π·(n/2)/L along one axis.
    pub fn k_max(&self) -> f64 {
        std::f64::consts::PI * (self.n as f64 / 2.0) / self.half_length
    }

    /// Stride of `axis` in the row-major flat layout.
    fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.d - 1 - axis) as u32)
    }

    /// Axis index of flat point `flat` along `axis`.
    #[inline]
    fn axis_index(&self, flat: usize, axis: usize) -> usize {
        (flat / self.stride(axis)) % self.n
    }

    /// Coordinates of a flat index; entries beyond `d` are zero.
    #[inline]
    pub fn point(&self, flat: usize) -> [f64; MAX_DIM] {
        let mut x = [0.0; MAX_DIM];
        let mut rest = flat;
        for a in (0..self.d).rev() {
            x[a] = self.coords[rest % self.n];
            rest /= self.n;
        }
        x
    }

    /// |x|² at a flat index.
    #[inline]
    pub fn x_sq(&self, flat: usize) -> f64 {
        let x = self.point(flat);
        x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
    }

    /// Largest per-axis |x| at a flat index.
    #[inline]
    pub fn x_max_abs(&self, flat: usize) -> f64 {
        let x = self.point(flat);
        x.iter().take(self.d).fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// |k|² at a flat index (FFT ordering per axis).
    #[inline]
    pub fn k_sq(&self, flat: usize) -> f64 {
        let mut sum = 0.0;
        let mut rest = flat;
        for _ in 0..self.d {
            let k = self.waves[rest % self.n];
            sum += k * k;
            rest /= self.n;
        }
        sum
    }

    /// Wavenumber component along `axis` at a flat index.
    #[inline]
    pub fn k_axis(&self, flat: usize, axis: usize) -> f64 {
        self.waves[self.axis_index(flat, axis)]
    }

    /// Time below which the quadratic phase |x|²/(4t) is not resolved at the
    /// box edge (slope L/2t reaches half of k_max). Used to pick between the
    /// direct and phase-gradient evaluations of x + 2it∇.
    pub fn phase_resolution_time(&self) -> f64 {
        2.0 * self.half_length * self.half_length / (std::f64::consts::PI * self.n as f64)
    }

    /// Shared transform plan for this grid (built on first use).
    pub fn plan(&self) -> &SpectralPlan {
        self.plan.get_or_init(|| SpectralPlan::new(self.n))
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.n == other.n && self.half_length == other.half_length
    }
}

impl Clone for Grid {
    fn clone(&self) -> Self {
        Grid {
            d: self.d,
            n: self.n,
            half_length: self.half_length,
            coords: self.coords.clone(),
            waves: self.waves.clone(),
            plan: OnceLock::new(),
        }
    }
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Grid(d={}, n={}, L={})", self.d, self.n, self.half_length)
    }
}

/// Convenience constructor returning a shared grid.
pub fn make_grid(d: usize, n: usize, half_length: f64) -> Result<Arc<Grid>> {
    Ok(Arc::new(Grid::new(d, n, half_length)?))
}

/// FFT direction.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Dir {
    Forward,
    Inverse,
}

/// Cached FFT plans for one axis length, applied along every axis of a field.
/// The plans are immutable and shareable; scratch space is per call/thread.
pub struct SpectralPlan {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl SpectralPlan {
    pub fn new(n: usize) -> SpectralPlan {
        let mut planner = FftPlanner::new();
        SpectralPlan {
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    /// Unnormalized forward transform along each axis.
    pub fn forward(&self, g: &Grid, values: &mut [C64]) {
        self.transform(g, values, Dir::Forward, true);
    }

    /// Inverse transform along each axis, scaled by 1/n^d.
    pub fn inverse(&self, g: &Grid, values: &mut [C64]) {
        self.transform(g, values, Dir::Inverse, true);
        let scale = 1.0 / g.len() as f64;
        exec::map_indexed(values, |_, v| v * scale);
    }

    /// Inverse transform without the 1/n^d normalization (callers fold the
    /// scale into a preceding multiplier pass).
    pub fn inverse_unscaled(&self, g: &Grid, values: &mut [C64]) {
        self.transform(g, values, Dir::Inverse, true);
    }

    /// Sequential forward transform; bit-identical to [`forward`](Self::forward).
    pub fn forward_seq(&self, g: &Grid, values: &mut [C64]) {
        self.transform(g, values, Dir::Forward, false);
    }

    /// Sequential inverse transform; bit-identical to [`inverse`](Self::inverse).
    pub fn inverse_seq(&self, g: &Grid, values: &mut [C64]) {
        self.transform(g, values, Dir::Inverse, false);
        let scale = 1.0 / g.len() as f64;
        exec::map_indexed_seq(values, |_, v| v * scale);
    }

    fn transform(&self, g: &Grid, values: &mut [C64], dir: Dir, parallel: bool) {
        assert_eq!(values.len(), g.len(), "field length does not match grid");
        let fft = match dir {
            Dir::Forward => &self.fwd,
            Dir::Inverse => &self.inv,
        };
        let n = g.n();
        for axis in 0..g.d() {
            let stride = g.stride(axis);
            if stride == 1 {
                self.contiguous_axis(fft, n, values, parallel);
            } else {
                self.strided_axis(fft, n, stride, values, parallel);
            }
        }
    }

    /// Transform lines that are contiguous in memory (the last axis).
    fn contiguous_axis(&self, fft: &Arc<dyn Fft<f64>>, n: usize, values: &mut [C64], parallel: bool) {
        let scratch_len = fft.get_inplace_scratch_len();
        let lines = values.len() / n;
        // Split into disjoint line slices up front so both paths share code.
        let mut slices: Vec<&mut [C64]> = values.chunks_mut(n).collect();
        let job = |scratch: &mut Vec<C64>, line: &mut &mut [C64]| {
            fft.process_with_scratch(line, scratch);
        };
        if parallel {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                slices
                    .par_iter_mut()
                    .for_each_init(|| vec![C64::default(); scratch_len], |s, line| job(s, line));
                return;
            }
        }
        let mut scratch = vec![C64::default(); scratch_len];
        for line in slices.iter_mut().take(lines) {
            job(&mut scratch, line);
        }
    }

    /// Transform lines with a fixed stride by gather/scatter into a buffer.
    fn strided_axis(&self, fft: &Arc<dyn Fft<f64>>, n: usize, stride: usize, values: &mut [C64], parallel: bool) {
        let scratch_len = fft.get_inplace_scratch_len();
        let lines = values.len() / n;
        let values_ptr = SendPtr(values.as_mut_ptr());
        let init = || (vec![C64::default(); n], vec![C64::default(); scratch_len]);
        let job = move |bufs: &mut (Vec<C64>, Vec<C64>), l: usize| {
            let (buf, scratch) = bufs;
            // Line l covers flat indices base + i*stride, i in 0..n; lines are
            // disjoint, so the raw writes below never alias.
            let outer = l / stride;
            let inner = l % stride;
            let base = outer * (n * stride) + inner;
            let ptr = values_ptr;
            unsafe {
                for (i, b) in buf.iter_mut().enumerate() {
                    *b = *ptr.0.add(base + i * stride);
                }
            }
            fft.process_with_scratch(buf, scratch);
            unsafe {
                for (i, b) in buf.iter().enumerate() {
                    *ptr.0.add(base + i * stride) = *b;
                }
            }
        };
        if parallel {
            exec::for_each_line(lines, init, job);
        } else {
            exec::for_each_line_seq(lines, init, job);
        }
    }
}

/// Raw pointer wrapper so disjoint line writes can cross thread boundaries.
#[derive(Clone, Copy)]
struct SendPtr(*mut C64);
unsafe impl Send for SendPtr {}
unsafe impl Sync for SendPtr {}

/// A complex scalar field sampled on a grid, plus a divergence flag set by
/// operations that produced (or received) non-finite values.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<C64>,
    diverged: bool,
}

impl Field {
    pub fn zero(grid: &Arc<Grid>) -> Field {
        Field { grid: grid.clone(), values: vec![C64::default(); grid.len()], diverged: false }
    }

    /// Sample `f(x)` at every grid point (slice has `d` valid coordinates).
    pub fn from_fn<F>(grid: &Arc<Grid>, f: F) -> Field
    where
        F: Fn(&[f64]) -> C64,
    {
        let d = grid.d();
        let values = (0..grid.len())
            .map(|i| {
                let x = grid.point(i);
                f(&x[..d])
            })
            .collect();
        Field { grid: grid.clone(), values, diverged: false }
    }

    pub fn from_values(grid: &Arc<Grid>, values: Vec<C64>) -> Result<Field> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "value count {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        let diverged = !exec::all_finite(&values);
        Ok(Field { grid: grid.clone(), values, diverged })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn diverged(&self) -> bool {
        self.diverged
    }

    pub(crate) fn set_diverged(&mut self, flag: bool) {
        self.diverged = flag;
    }

    pub fn same_grid(&self, other: &Field) -> bool {
        *self.grid == *other.grid
    }

    /// Quadrature L² norm squared ∫|f|².
    pub fn l2_norm_sq(&self) -> f64 {
        let vol = self.grid.cell_volume();
        exec::sum_indexed(&self.values, |_, v| v.norm_sqr()) * vol
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// ∫|f|^p for arbitrary p ≥ 1 (fast paths for even integer p).
    pub fn lp_norm_pow(&self, p: f64) -> f64 {
        let vol = self.grid.cell_volume();
        let sum = if p == 2.0 {
            exec::sum_indexed(&self.values, |_, v| v.norm_sqr())
        } else if p == 4.0 {
            exec::sum_indexed(&self.values, |_, v| {
                let s = v.norm_sqr();
                s * s
            })
        } else if p == 6.0 {
            exec::sum_indexed(&self.values, |_, v| {
                let s = v.norm_sqr();
                s * s * s
            })
        } else if p == 8.0 {
            exec::sum_indexed(&self.values, |_, v| {
                let s = v.norm_sqr();
                (s * s) * (s * s)
            })
        } else {
            let half = 0.5 * p;
            exec::sum_indexed(&self.values, |_, v| v.norm_sqr().powf(half))
        };
        sum * vol
    }

    /// L^p norm (∫|f|^p)^{1/p}.
    pub fn lp_norm(&self, p: f64) -> f64 {
        self.lp_norm_pow(p).powf(1.0 / p)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.norm_sqr())).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        exec::all_finite(&self.values)
    }

    /// Pointwise difference on the same grid.
    pub fn sub(&self, other: &Field) -> Result<Field> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Field {
            grid: self.grid.clone(),
            values,
            diverged: self.diverged || other.diverged,
        })
    }

    pub fn scale(&self, c: C64) -> Field {
        let mut out = self.clone();
        exec::map_indexed(out.values_mut(), |_, v| v * c);
        out
    }

    /// Relative L² distance ‖a-b‖/‖a‖ (0 when both vanish).
    pub fn rel_l2_distance(&self, other: &Field) -> Result<f64> {
        let diff = self.sub(other)?;
        let denom = self.l2_norm();
        if denom == 0.0 {
            return Ok(diff.l2_norm());
        }
        Ok(diff.l2_norm() / denom)
    }
}

/// Apply the free propagator e^{itΔ}: spectral multiplication by e^{-i|k|²t}.
/// Exactly mass-conserving (unitary modulo roundoff) for any t.
pub fn free_propagate(f: &Field, t: f64) -> Field {
    let g = f.grid().clone();
    let mut out = f.clone();
    if t == 0.0 {
        return out;
    }
    let plan = g.plan();
    plan.forward(&g, out.values_mut());
    let scale = 1.0 / g.len() as f64;
    exec::map_indexed(out.values_mut(), |i, v| {
        let phase = -g.k_sq(i) * t;
        let (s, c) = phase.sin_cos();
        v * C64::new(c * scale, s * scale)
    });
    plan.inverse_unscaled(&g, out.values_mut());
    out
}

/// ∫|∇f|² computed spectrally: Σ |k|²|û|² · h^d / N.
pub fn grad_norm_sq(f: &Field) -> f64 {
    let g = f.grid().clone();
    let mut hat = f.clone();
    g.plan().forward(&g, hat.values_mut());
    let weight = g.cell_volume() / g.len() as f64;
    exec::sum_indexed(hat.values(), |i, v| g.k_sq(i) * v.norm_sqr()) * weight
}

/// Partial derivative ∂f/∂x_axis computed spectrally (multiply by i·k).
pub fn gradient_axis(f: &Field, axis: usize) -> Field {
    let g = f.grid().clone();
    assert!(axis < g.d(), "axis {axis} out of range for dimension {}", g.d());
    let mut out = f.clone();
    let plan = g.plan();
    plan.forward(&g, out.values_mut());
    let scale = 1.0 / g.len() as f64;
    exec::map_indexed(out.values_mut(), |i, v| {
        let k = g.k_axis(i, axis);
        C64::new(0.0, k * scale) * v
    });
    plan.inverse_unscaled(&g, out.values_mut());
    out
}

/// -Δf computed spectrally (multiply by |k|²).
pub fn neg_laplacian(f: &Field) -> Field {
    let g = f.grid().clone();
    let mut out = f.clone();
    let plan = g.plan();
    plan.forward(&g, out.values_mut());
    let scale = 1.0 / g.len() as f64;
    exec::map_indexed(out.values_mut(), |i, v| v * (g.k_sq(i) * scale));
    plan.inverse_unscaled(&g, out.values_mut());
    out
}

/// Fraction of ∫|f|² carried by points with max-axis |x_j| > 0.9·L.
/// Returns 0 for the zero field.
pub fn boundary_mass_fraction(f: &Field) -> f64 {
    let g = f.grid();
    let cut = 0.9 * g.half_length();
    let shell = exec::sum_indexed(f.values(), |i, v| {
        if g.x_max_abs(i) > cut {
            v.norm_sqr()
        } else {
            0.0
        }
    });
    let total = exec::sum_indexed(f.values(), |_, v| v.norm_sqr());
    if total == 0.0 {
        0.0
    } else {
        shell / total
    }
}

/// Evaluate the trigonometric interpolant of `f` on the points of `target`
/// (same d and n, any half length). Exact for fields whose spectrum is
/// resolved; cost O(n²) per axis line via incremental phase rotation.
pub fn resample(f: &Field, target: &Arc<Grid>) -> Result<Field> {
    let src = f.grid();
    if src.d() != target.d() || src.n() != target.n() {
        return Err(Error::InvalidArgument(
            "resample requires matching dimension and point count".into(),
        ));
    }
    let n = src.n();
    let mut spectrum = f.clone();
    src.plan().forward(src, spectrum.values_mut());
    let scale = 1.0 / src.len() as f64;

    // Per-axis change of sample points: out[j] = Σ_m c_m z_m^j with
    // z_m = e^{i k_m h'} and c_m = û_m e^{i k_m y_0}. Applied axis by axis.
    let mut values = spectrum.values().to_vec();
    for axis in 0..src.d() {
        let stride = src.stride(axis);
        let lines = values.len() / n;
        // The FFT indexes points from the box corner, so the interpolant is
        // u(y) = (1/n) Σ û_m e^{i k_m (y + L_src)}; start the phase there.
        let y0 = -target.half_length() + src.half_length();
        let hp = target.spacing();
        let base_phase: Vec<C64> = src
            .waves()
            .iter()
            .map(|&k| C64::from_polar(1.0, k * y0))
            .collect();
        let step_phase: Vec<C64> = src
            .waves()
            .iter()
            .map(|&k| C64::from_polar(1.0, k * hp))
            .collect();
        let mut out = vec![C64::default(); values.len()];
        for l in 0..lines {
            let outer = l / stride;
            let inner = l % stride;
            let base = outer * (n * stride) + inner;
            let mut coef: Vec<C64> = (0..n)
                .map(|m| values[base + m * stride] * base_phase[m])
                .collect();
            for j in 0..n {
                let mut acc = C64::default();
                for (c, z) in coef.iter_mut().zip(&step_phase) {
                    acc += *c;
                    *c *= *z;
                }
                out[base + j * stride] = acc;
            }
        }
        values = out;
    }
    for v in values.iter_mut() {
        *v *= scale;
    }
    Field::from_values(target, values)
}
