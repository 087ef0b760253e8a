//! Doubly periodic scalar and vector fields on the square torus
//! `[0, 2π) × [0, 2π)`.
//!
//! Fields carry their physical samples and, lazily, the complex
//! coefficients of the full 2D Fourier transform; whichever side is
//! produced first stays authoritative and the other is derived on
//! demand. Differential operators act on the spectral side:
//!
//! * `laplacian` multiplies by `−(k_x² + k_y²)` (Nyquist included);
//! * first derivatives multiply by `i·k` with the Nyquist mode zeroed,
//!   which keeps them exactly skew-adjoint on the grid;
//! * quadratic nonlinearities (the Jacobian) are evaluated pointwise
//!   with a 2/3-rule truncation of the inputs and of the product, so
//!   the retained modes are alias-free;
//! * quadrature is the sample mean times the domain area, exact for
//!   band-limited integrands.
//!
//! Transform plans are cached per length behind a process-wide mutex;
//! concurrent use from any thread yields identical results.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Relative mean bound enforced where an operation requires a
/// zero-mean field (the bound is `REL` times the sup norm).
pub const ZERO_MEAN_REL_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}x{1} vs {2}x{3}")]
    GridMismatch(usize, usize, usize, usize),
    #[error("field must have zero mean, measured mean {mean:.6e}")]
    NonZeroMean { mean: f64 },
    #[error("field contains non-finite samples")]
    NonFinite,
}

/// Sample counts of a `[0,2π)²` grid; both must be even and at least 8.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid2D {
    nx: usize,
    ny: usize,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize) -> Result<Self, FieldError> {
        for (name, n) in [("nx", nx), ("ny", ny)] {
            if n < 8 || n % 2 != 0 {
                return Err(FieldError::InvalidGrid(format!(
                    "{name} must be even and >= 8, got {n}"
                )));
            }
        }
        Ok(Self { nx, ny })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_area(&self) -> f64 {
        (TWO_PI / self.nx as f64) * (TWO_PI / self.ny as f64)
    }

    pub fn area(&self) -> f64 {
        TWO_PI * TWO_PI
    }

    pub fn x(&self, i: usize) -> f64 {
        TWO_PI * i as f64 / self.nx as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        TWO_PI * j as f64 / self.ny as f64
    }

    /// Integer wavenumber for FFT bin `idx` of `n` samples.
    fn wavenumber(idx: usize, n: usize) -> f64 {
        if idx <= n / 2 {
            idx as f64
        } else {
            idx as f64 - n as f64
        }
    }

    /// 2/3-rule cutoff: modes with `|k| > kmax` are discarded around
    /// quadratic products. `3·kmax ≤ n−1` keeps the retained range
    /// alias-free.
    fn dealias_kmax(n: usize) -> usize {
        (n - 1) / 3
    }
}

fn plan(n: usize, dir: FftDirection) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry((n, dir == FftDirection::Forward))
        .or_insert_with(|| FftPlanner::new().plan_fft(n, dir))
        .clone()
}

fn fft_rows(a: &mut Array2<Complex64>, dir: FftDirection) {
    let n = a.ncols();
    let p = plan(n, dir);
    let mut scratch = vec![Complex64::default(); p.get_inplace_scratch_len()];
    for mut row in a.rows_mut() {
        let slice = row.as_slice_mut().expect("rows of a standard-layout array are contiguous");
        p.process_with_scratch(slice, &mut scratch);
    }
}

fn fft2_complex(a: &Array2<Complex64>, dir: FftDirection) -> Array2<Complex64> {
    let mut w = a.clone();
    fft_rows(&mut w, dir);
    let mut t = w.t().to_owned();
    fft_rows(&mut t, dir);
    t.t().to_owned()
}

fn fft2(values: &Array2<f64>) -> Array2<Complex64> {
    let c = values.mapv(|v| Complex64::new(v, 0.0));
    fft2_complex(&c, FftDirection::Forward)
}

fn ifft2(spectral: &Array2<Complex64>) -> Array2<f64> {
    let scale = 1.0 / spectral.len() as f64;
    fft2_complex(spectral, FftDirection::Inverse).mapv(|c| c.re * scale)
}

/// Real scalar field; physical samples and spectral coefficients are
/// two views of the same immutable value.
#[derive(Debug, Clone)]
pub struct ScalarField2D {
    grid: Grid2D,
    values: OnceLock<Array2<f64>>,
    spectral: OnceLock<Array2<Complex64>>,
}

impl ScalarField2D {
    pub fn from_values(grid: Grid2D, values: Array2<f64>) -> Result<Self, FieldError> {
        if values.dim() != (grid.nx, grid.ny) {
            return Err(FieldError::GridMismatch(
                values.dim().0,
                values.dim().1,
                grid.nx,
                grid.ny,
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite);
        }
        let cell = OnceLock::new();
        cell.set(values).expect("fresh cell");
        Ok(Self { grid, values: cell, spectral: OnceLock::new() })
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = Array2::from_shape_fn((grid.nx, grid.ny), |(i, j)| f(grid.x(i), grid.y(j)));
        Self::from_values(grid, values).expect("shape matches by construction")
    }

    /// Builds a field from FFT coefficients (the forward-transform
    /// convention of this module, unnormalized). Physical samples are
    /// derived on first use.
    pub fn from_spectral(grid: Grid2D, spectral: Array2<Complex64>) -> Result<Self, FieldError> {
        if spectral.dim() != (grid.nx, grid.ny) {
            return Err(FieldError::GridMismatch(
                spectral.dim().0,
                spectral.dim().1,
                grid.nx,
                grid.ny,
            ));
        }
        let cell = OnceLock::new();
        cell.set(spectral).expect("fresh cell");
        Ok(Self { grid, values: OnceLock::new(), spectral: cell })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self::from_values(grid, Array2::zeros((grid.nx, grid.ny))).expect("zeros are finite")
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        self.values.get_or_init(|| ifft2(self.spectral.get().expect("one side always present")))
    }

    pub fn spectral(&self) -> &Array2<Complex64> {
        self.spectral.get_or_init(|| fft2(self.values.get().expect("one side always present")))
    }

    pub fn mean(&self) -> f64 {
        // Prefer the pinned spectral mode when it already exists: fields
        // produced by the solver carry an exact zero there.
        if let Some(s) = self.spectral.get() {
            s[[0, 0]].re / self.grid.len() as f64
        } else {
            self.values().sum() / self.grid.len() as f64
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        match (self.values.get(), self.spectral.get()) {
            (Some(v), _) => v.iter().all(|x| x.is_finite()),
            (None, Some(s)) => s.iter().all(|c| c.re.is_finite() && c.im.is_finite()),
            (None, None) => unreachable!("one side always present"),
        }
    }

    pub fn require_zero_mean(&self) -> Result<(), FieldError> {
        let mean = self.mean();
        if mean.abs() > ZERO_MEAN_REL_TOL * self.max_abs() {
            return Err(FieldError::NonZeroMean { mean });
        }
        Ok(())
    }

    /// Copy of this field with the spectral mean mode set to exactly
    /// zero, so mean-sensitive monitors read an exact 0.
    pub fn pinned_zero_mean(&self) -> Self {
        let mut s = self.spectral().clone();
        s[[0, 0]] = Complex64::new(0.0, 0.0);
        Self::from_spectral(self.grid, s).expect("same grid")
    }

    fn same_grid(&self, other: &Self) -> Result<(), FieldError> {
        if self.grid != other.grid {
            return Err(FieldError::GridMismatch(
                self.grid.nx,
                self.grid.ny,
                other.grid.nx,
                other.grid.ny,
            ));
        }
        Ok(())
    }

    /// Pointwise combination on a shared grid (panics on mismatch; the
    /// fallible entry points live on the named operations).
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "zip_with requires a shared grid");
        let mut out = self.values().clone();
        out.zip_mut_with(other.values(), |a, &b| *a = f(*a, b));
        Self::from_values(self.grid, out).expect("same grid")
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_values(self.grid, self.values().mapv(&f)).expect("same grid")
    }

    pub fn scale(&self, s: f64) -> Self {
        // Spectral scaling when available avoids a transform round trip.
        if let Some(sp) = self.spectral.get() {
            return Self::from_spectral(self.grid, sp.mapv(|c| c * s)).expect("same grid");
        }
        self.map(|v| v * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    /// Spectral-side subtraction, for combinations that should stay in
    /// coefficient space (keeps lazily computed sample arrays lazy).
    pub fn sub_spectral(&self, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid, "sub_spectral requires a shared grid");
        let mut s = self.spectral().clone();
        s.zip_mut_with(other.spectral(), |a, &b| *a -= b);
        Self::from_spectral(self.grid, s).expect("same grid")
    }
}

/// Divergence-free (by construction) pair of velocity components.
#[derive(Debug, Clone)]
pub struct VectorField2D {
    x: ScalarField2D,
    y: ScalarField2D,
}

impl VectorField2D {
    pub fn new(x: ScalarField2D, y: ScalarField2D) -> Result<Self, FieldError> {
        x.same_grid(&y)?;
        Ok(Self { x, y })
    }

    pub fn grid(&self) -> Grid2D {
        self.x.grid()
    }

    pub fn x(&self) -> &ScalarField2D {
        &self.x
    }

    pub fn y(&self) -> &ScalarField2D {
        &self.y
    }

    pub fn max_norm(&self) -> f64 {
        let xv = self.x.values();
        let yv = self.y.values();
        xv.iter()
            .zip(yv.iter())
            .fold(0.0_f64, |m, (&a, &b)| m.max((a * a + b * b).sqrt()))
    }
}

/// Spectral multiplier helper: `out[k] = f(kx, ky) * in[k]`.
fn apply_multiplier(
    field: &ScalarField2D,
    f: impl Fn(f64, f64) -> Complex64,
) -> Array2<Complex64> {
    let grid = field.grid();
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut out = field.spectral().clone();
    for ((i, j), c) in out.indexed_iter_mut() {
        let kx = Grid2D::wavenumber(i, nx);
        let ky = Grid2D::wavenumber(j, ny);
        *c *= f(kx, ky);
    }
    out
}

/// `Δf`, computed as multiplication by `−(k_x² + k_y²)`.
pub fn laplacian(f: &ScalarField2D) -> ScalarField2D {
    let s = apply_multiplier(f, |kx, ky| Complex64::new(-(kx * kx + ky * ky), 0.0));
    ScalarField2D::from_spectral(f.grid(), s).expect("same grid")
}

/// Zero-mean `g` with `Δg = f`; the mean mode of `g` is gauged to zero.
/// Rejects inputs whose mean is not (numerically) zero.
pub fn inv_laplacian(f: &ScalarField2D) -> Result<ScalarField2D, FieldError> {
    // Solver states carry an exactly pinned spectral mean; only fields
    // arriving from sample data need the measured check.
    let pinned = f.spectral.get().map(|s| s[[0, 0]] == Complex64::new(0.0, 0.0)).unwrap_or(false);
    if !pinned {
        f.require_zero_mean()?;
    }
    let mut s = apply_multiplier(f, |kx, ky| {
        let k2 = kx * kx + ky * ky;
        if k2 == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(-1.0 / k2, 0.0)
        }
    });
    s[[0, 0]] = Complex64::new(0.0, 0.0);
    Ok(ScalarField2D::from_spectral(f.grid(), s)?)
}

fn derivative_spectral(f: &ScalarField2D, along_x: bool) -> Array2<Complex64> {
    let grid = f.grid();
    let (nx, ny) = (grid.nx(), grid.ny());
    apply_multiplier(f, |kx, ky| {
        // The Nyquist mode has no well-defined first derivative on an
        // even grid; dropping it keeps d/dx exactly skew-adjoint.
        let k = if along_x { kx } else { ky };
        let n = if along_x { nx } else { ny };
        if k.abs() as usize == n / 2 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, k)
        }
    })
}

pub fn dx(f: &ScalarField2D) -> ScalarField2D {
    ScalarField2D::from_spectral(f.grid(), derivative_spectral(f, true)).expect("same grid")
}

pub fn dy(f: &ScalarField2D) -> ScalarField2D {
    ScalarField2D::from_spectral(f.grid(), derivative_spectral(f, false)).expect("same grid")
}

/// `∇f = (f_x, f_y)`.
pub fn grad(f: &ScalarField2D) -> VectorField2D {
    VectorField2D::new(dx(f), dy(f)).expect("same grid")
}

/// `∇⊥ψ = (−ψ_y, ψ_x)`: the divergence-free velocity of a stream
/// function, with `curl ∇⊥ψ = Δψ`.
pub fn velocity_from_stream(psi: &ScalarField2D) -> VectorField2D {
    VectorField2D::new(dy(psi).scale(-1.0), dx(psi)).expect("same grid")
}

/// `u_x,x + u_y,y` (spectral).
pub fn divergence(u: &VectorField2D) -> ScalarField2D {
    dx(u.x()).add(&dy(u.y()))
}

/// Scalar curl `u_y,x − u_x,y`.
pub fn curl(u: &VectorField2D) -> ScalarField2D {
    dx(u.y()).sub(&dy(u.x()))
}

fn dealias_in_place(s: &mut Array2<Complex64>, nx: usize, ny: usize) {
    let kmx = Grid2D::dealias_kmax(nx) as f64;
    let kmy = Grid2D::dealias_kmax(ny) as f64;
    for ((i, j), c) in s.indexed_iter_mut() {
        let kx = Grid2D::wavenumber(i, nx);
        let ky = Grid2D::wavenumber(j, ny);
        if kx.abs() > kmx || ky.abs() > kmy {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// `J(f,g) = f_x g_y − f_y g_x`, evaluated pseudo-spectrally with
/// 2/3-rule dealiasing of the derivative inputs and of the product.
pub fn jacobian(f: &ScalarField2D, g: &ScalarField2D) -> Result<ScalarField2D, FieldError> {
    f.same_grid(g)?;
    let grid = f.grid();
    let (nx, ny) = (grid.nx(), grid.ny());

    let mut parts = [
        derivative_spectral(f, true),
        derivative_spectral(f, false),
        derivative_spectral(g, true),
        derivative_spectral(g, false),
    ];
    for p in &mut parts {
        dealias_in_place(p, nx, ny);
    }
    let [fx, fy, gx, gy] = parts.map(|p| ifft2(&p));

    let mut h = fx;
    h.zip_mut_with(&gy, |a, &b| *a *= b);
    let mut h2 = fy;
    h2.zip_mut_with(&gx, |a, &b| *a *= b);
    h.zip_mut_with(&h2, |a, &b| *a -= b);

    let mut hs = fft2(&h);
    dealias_in_place(&mut hs, nx, ny);
    Ok(ScalarField2D::from_spectral(grid, hs)?)
}

/// `∬ f dA` (sample mean times area).
pub fn integrate_domain(f: &ScalarField2D) -> f64 {
    f.values().sum() * f.grid().cell_area()
}

/// `∬ f·g dA`.
pub fn l2_inner(f: &ScalarField2D, g: &ScalarField2D) -> Result<f64, FieldError> {
    f.same_grid(g)?;
    let mut acc = 0.0;
    for (a, b) in f.values().iter().zip(g.values().iter()) {
        acc += a * b;
    }
    Ok(acc * f.grid().cell_area())
}

/// `∬ (u, w) dA` for vector fields.
pub fn l2_inner_vec(u: &VectorField2D, w: &VectorField2D) -> Result<f64, FieldError> {
    Ok(l2_inner(u.x(), w.x())? + l2_inner(u.y(), w.y())?)
}

pub fn l2_norm_sq(f: &ScalarField2D) -> f64 {
    l2_inner(f, f).expect("a field shares its own grid")
}

pub fn l2_norm_sq_vec(u: &VectorField2D) -> f64 {
    l2_inner_vec(u, u).expect("a field shares its own grid")
}
