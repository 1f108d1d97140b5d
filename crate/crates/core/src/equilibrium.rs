//! Money dynamics, Berry connection and phase, and residual checks of the
//! market field equations on sampled grids.
//!
//! Inner products are conjugate-linear in the first slot:
//! `(a, b) = Σ conj(aᵢ) bᵢ`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::kernels::FieldValue;
use crate::quadrature::adaptive_simpson;
use crate::{Error, Result, Vec3};

/// Complex state vector in the money phase space.
pub type StateVector = Vec<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `(a, b) = Σ conj(aᵢ) bᵢ`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    inner(a, a).re.sqrt()
}

fn centered(minus: &[Complex64], plus: &[Complex64], h: f64) -> StateVector {
    minus.iter().zip(plus).map(|(m, p)| (p - m) / (2.0 * h)).collect()
}

/// Money supply decomposed over a basis, `M = Σ C_k m_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MoneyState {
    coefficients: Vec<Complex64>,
    basis: Vec<StateVector>,
    activity: f64,
}

impl MoneyState {
    pub fn new(coefficients: Vec<Complex64>, basis: Vec<StateVector>, activity: f64) -> Result<Self> {
        if coefficients.len() != basis.len() || basis.is_empty() {
            return Err(Error::invalid("basis", "one basis vector per coefficient is required"));
        }
        let dim = basis[0].len();
        for m in &basis {
            if m.len() != dim {
                return Err(Error::invalid("basis", "basis vectors differ in dimension"));
            }
            if (norm(m) - 1.0).abs() > 1e-12 {
                return Err(Error::invalid("basis", "basis vectors must have unit norm"));
            }
        }
        let state = Self {
            coefficients,
            basis,
            activity,
        };
        if state.total().iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::invalid("coefficients", "total money must be finite"));
        }
        Ok(state)
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn basis(&self) -> &[StateVector] {
        &self.basis
    }

    pub fn activity(&self) -> f64 {
        self.activity
    }

    /// `M = Σ C_k m_k`.
    pub fn total(&self) -> StateVector {
        let mut out = vec![Complex64::new(0.0, 0.0); self.basis[0].len()];
        for (c, m) in self.coefficients.iter().zip(&self.basis) {
            for (o, v) in out.iter_mut().zip(m) {
                *o += c * v;
            }
        }
        out
    }
}

/// Market activity `A = i (M, ∂M/∂t)` from a sampled trajectory.
///
/// Centred differences are used, so entry `j` of the result belongs to
/// sample `j + 1`. For normalised trajectories the imaginary part vanishes
/// up to truncation error.
pub fn activity_of(trajectory: &[StateVector], dt: f64) -> Result<Vec<Complex64>> {
    if trajectory.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: trajectory.len(),
        });
    }
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", "must be > 0"));
    }
    Ok(trajectory
        .windows(3)
        .map(|w| I * inner(&w[1], &centered(&w[0], &w[2], dt)))
        .collect())
}

/// Expansion coefficient `C_n(t) = exp(−∫₀ᵗ [(m_n, ṁ_n) + iA] dt')`.
///
/// `connection(t)` supplies `(m_n, ṁ_n)` and `activity(t)` supplies `A`.
pub fn evolve_coefficient<C, A>(connection: C, activity: A, t: f64) -> Complex64
where
    C: Fn(f64) -> Complex64,
    A: Fn(f64) -> f64,
{
    let re = adaptive_simpson(|s| connection(s).re, 0.0, t, 1e-13);
    let im = adaptive_simpson(|s| connection(s).im + activity(s), 0.0, t, 1e-13);
    (-Complex64::new(re, im)).exp()
}

/// `(m(t), ṁ(t))` of a time-dependent basis vector, by centred differences.
pub fn time_connection<M>(basis_vector: M, t: f64, dt: f64) -> Complex64
where
    M: Fn(f64) -> StateVector,
{
    inner(
        &basis_vector(t),
        &centered(&basis_vector(t - dt), &basis_vector(t + dt), dt),
    )
}

/// Choice connection `i (m̃, ∂m̃/∂X)` of a basis family at `x`.
///
/// Real up to `O(dx²)` for normalised families. For `m̃ = e^{iθ(X)} u` the
/// result is `−θ'(X)`.
pub fn berry_connection<M>(basis_vector: M, x: f64, dx: f64) -> Complex64
where
    M: Fn(f64) -> StateVector,
{
    let here = basis_vector(x);
    I * inner(&here, &centered(&basis_vector(x - dx), &basis_vector(x + dx), dx))
}

/// Off-diagonal connection `(m_n, ∂m_k/∂X)`, `n ≠ k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffDiagonal {
    pub n: usize,
    pub k: usize,
    pub value: Complex64,
}

/// Off-diagonal connection terms of a basis family at `x`; all of them
/// vanish for a parallel-transported basis.
pub fn parallel_transport_check<B>(basis: B, x: f64, dx: f64) -> Result<Vec<OffDiagonal>>
where
    B: Fn(f64) -> Vec<StateVector>,
{
    let here = basis(x);
    if here.len() < 2 {
        return Err(Error::invalid("basis", "need at least two basis vectors"));
    }
    let minus = basis(x - dx);
    let plus = basis(x + dx);
    let derivs: Vec<StateVector> = minus.iter().zip(&plus).map(|(m, p)| centered(m, p, dx)).collect();
    let mut out = Vec::new();
    for (n, m_n) in here.iter().enumerate() {
        for (k, dm_k) in derivs.iter().enumerate() {
            if n != k {
                out.push(OffDiagonal {
                    n,
                    k,
                    value: inner(m_n, dm_k),
                });
            }
        }
    }
    Ok(out)
}

/// Regular `n`-gon inscribed in the circle of `radius` about `center` in
/// the plane `X₃ = center.z`, counter-clockwise, closed (last point equals
/// the first).
pub fn circle_contour(center: Vec3, radius: f64, n: usize) -> Vec<Vec3> {
    let mut pts: Vec<Vec3> = (0..n).map(|i| ring_point(center, radius, i, n)).collect();
    pts.push(pts[0]);
    pts
}

fn ring_point(center: Vec3, radius: f64, i: usize, n: usize) -> Vec3 {
    let a = 2.0 * PI * i as f64 / n as f64;
    center + Vec3::new(radius * a.cos(), radius * a.sin(), 0.0)
}

fn check_closed(contour: &[Vec3]) -> Result<()> {
    if contour.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: contour.len(),
        });
    }
    let gap = (contour[contour.len() - 1] - contour[0]).norm();
    let scale = contour.iter().map(|p| p.norm()).fold(1.0, f64::max);
    if gap > 1e-12 * scale {
        return Err(Error::OpenContour { gap });
    }
    Ok(())
}

/// Berry phase as the circulation `∮ C_h · dX` over a closed polyline,
/// midpoint rule per segment.
pub fn berry_phase_line<F>(choice: F, contour: &[Vec3]) -> Result<f64>
where
    F: Fn(Vec3) -> Vec3,
{
    check_closed(contour)?;
    Ok(contour
        .windows(2)
        .map(|w| choice(0.5 * (w[0] + w[1])).dot(&(w[1] - w[0])))
        .sum())
}

/// Curl of a sampled field by centred differences with step `h`.
pub fn curl<F>(field: &F, x: Vec3, h: f64) -> Vec3
where
    F: Fn(Vec3) -> Vec3,
{
    let d = |axis: usize| {
        let mut e = Vec3::zeros();
        e[axis] = h;
        (field(x + e) - field(x - e)) / (2.0 * h)
    };
    let (dx, dy, dz) = (d(0), d(1), d(2));
    Vec3::new(dy.z - dz.y, dz.x - dx.z, dx.y - dy.x)
}

/// Triangulated surface.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriangleMesh {
    /// Polar triangulation of a disk in the plane `X₃ = center.z`, normal
    /// along `+X₃`. The outer ring coincides with
    /// [`circle_contour`]`(center, radius, sectors)`.
    pub fn disk(center: Vec3, radius: f64, rings: usize, sectors: usize) -> Self {
        let rings = rings.max(1);
        let mut vertices = vec![center];
        for r in 1..=rings {
            let rr = radius * r as f64 / rings as f64;
            for i in 0..sectors {
                vertices.push(ring_point(center, rr, i, sectors));
            }
        }
        let ring_start = |r: usize| 1 + (r - 1) * sectors;
        let mut triangles = Vec::new();
        for i in 0..sectors {
            let j = (i + 1) % sectors;
            triangles.push([0, ring_start(1) + i, ring_start(1) + j]);
        }
        for r in 2..=rings {
            let (inner, outer) = (ring_start(r - 1), ring_start(r));
            for i in 0..sectors {
                let j = (i + 1) % sectors;
                triangles.push([inner + i, outer + i, outer + j]);
                triangles.push([inner + i, outer + j, inner + j]);
            }
        }
        Self { vertices, triangles }
    }

    /// Directed edges used by exactly one triangle.
    pub fn boundary_edges(&self) -> Vec<(usize, usize)> {
        use std::collections::HashMap;
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.triangles {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut out = Vec::new();
        for t in &self.triangles {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                if count[&(a.min(b), a.max(b))] == 1 {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Area vector `½ (b − a) × (c − a)` and centroid of each triangle.
    pub fn facets(&self) -> impl Iterator<Item = (Vec3, Vec3)> + '_ {
        self.triangles.iter().map(|t| {
            let (a, b, c) = (self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]);
            (0.5 * (b - a).cross(&(c - a)), (a + b + c) / 3.0)
        })
    }

    fn extent(&self) -> f64 {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (hi - lo).norm()
    }
}

fn check_boundary(mesh: &TriangleMesh, contour: &[Vec3]) -> Result<()> {
    check_closed(contour)?;
    let edges = mesh.boundary_edges();
    let segments = contour.len() - 1;
    if edges.len() != segments {
        return Err(Error::MeshBoundaryMismatch(format!(
            "mesh has {} boundary edges, contour has {segments} segments",
            edges.len()
        )));
    }
    let tol = 1e-9 * mesh.extent().max(1.0);
    let close = |a: Vec3, b: Vec3| (a - b).norm() <= tol;
    for w in contour.windows(2) {
        let found = edges
            .iter()
            .any(|&(a, b)| close(mesh.vertices[a], w[0]) && close(mesh.vertices[b], w[1]));
        if !found {
            let reversed = edges
                .iter()
                .any(|&(a, b)| close(mesh.vertices[b], w[0]) && close(mesh.vertices[a], w[1]));
            let why = if reversed {
                "mesh orientation is opposite to the contour"
            } else {
                "contour segment has no matching boundary edge"
            };
            return Err(Error::MeshBoundaryMismatch(format!("{why} at {:?}", w[0])));
        }
    }
    Ok(())
}

/// Berry phase as the profit flux `∫_S rot C_h · dS` through a triangulated
/// surface spanning `boundary`; the curl is taken by finite differences at
/// triangle centroids.
pub fn berry_phase_surface<F>(choice: F, mesh: &TriangleMesh, boundary: &[Vec3]) -> Result<f64>
where
    F: Fn(Vec3) -> Vec3,
{
    check_boundary(mesh, boundary)?;
    let h = 1e-5 * mesh.extent().max(1e-3);
    Ok(mesh.facets().map(|(area, c)| curl(&choice, c, h).dot(&area)).sum())
}

/// Geometry of a space-time field grid. Point `(i, j, k)` of slice `n` sits
/// at `origin + (i, j, k) ⊙ spacing`, time `t0 + n dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub origin: Vec3,
    pub spacing: Vec3,
    pub dims: [usize; 3],
    pub t0: f64,
    pub dt: f64,
}

impl GridGeometry {
    pub fn points(&self) -> usize {
        self.dims.iter().product()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn coords(&self, index: usize) -> [usize; 3] {
        let i = index % self.dims[0];
        let j = (index / self.dims[0]) % self.dims[1];
        [i, j, index / (self.dims[0] * self.dims[1])]
    }

    pub fn position(&self, index: usize) -> Vec3 {
        let [i, j, k] = self.coords(index);
        self.origin + self.spacing.component_mul(&Vec3::new(i as f64, j as f64, k as f64))
    }

    pub fn time(&self, slice: usize) -> f64 {
        self.t0 + slice as f64 * self.dt
    }

    /// Flat index of the neighbour `offset` steps along `axis`.
    #[inline]
    fn shifted(&self, index: usize, axis: usize, offset: isize) -> usize {
        let stride = match axis {
            0 => 1,
            1 => self.dims[0],
            _ => self.dims[0] * self.dims[1],
        } as isize;
        (index as isize + offset * stride) as usize
    }

    fn validate(&self) -> Result<()> {
        if self.spacing.iter().any(|h| !(*h > 0.0)) || !(self.dt > 0.0) {
            return Err(Error::invalid("spacing", "grid spacing and dt must be > 0"));
        }
        Ok(())
    }
}

/// Field samples of one time slice. `competition`, `profit` and `capital`
/// stay empty until [`construct_fields`] fills them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FieldSlice {
    pub choice: Vec<Vec3>,
    pub phi: Vec<f64>,
    pub ln_m: Vec<f64>,
    pub competition: Vec<Vec3>,
    pub profit: Vec<Vec3>,
    pub capital: Vec<Vec3>,
}

/// Potentials supplied per grid point when sampling a [`FieldGrid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSample {
    pub choice: Vec3,
    pub phi: f64,
    pub ln_m: f64,
}

/// Uniformly sampled fields `C_h, φ, ln M, C, P, K` over space and time.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub geometry: GridGeometry,
    pub slices: Vec<FieldSlice>,
}

impl FieldGrid {
    /// Samples the potentials `(C_h, φ, ln M)` on `slices` time levels.
    pub fn sample<F>(geometry: GridGeometry, slices: usize, f: F) -> Result<Self>
    where
        F: Fn(Vec3, f64) -> PotentialSample,
    {
        geometry.validate()?;
        let slices = (0..slices)
            .map(|n| {
                let t = geometry.time(n);
                let mut s = FieldSlice::default();
                for idx in 0..geometry.points() {
                    let p = f(geometry.position(idx), t);
                    s.choice.push(p.choice);
                    s.phi.push(p.phi);
                    s.ln_m.push(p.ln_m);
                }
                s
            })
            .collect();
        Ok(Self { geometry, slices })
    }

    /// Grid point on the outer layer of space or time; its constructed
    /// values come from one-sided differences.
    pub fn is_boundary(&self, index: usize, slice: usize) -> bool {
        let c = self.geometry.coords(index);
        slice == 0 || slice + 1 == self.slices.len() || (0..3).any(|a| c[a] == 0 || c[a] + 1 == self.geometry.dims[a])
    }
}

/// Second-order first derivative at position `i` of a line of `n` samples;
/// one-sided at the ends.
fn diff2<V: FieldValue>(at: impl Fn(usize) -> V, i: usize, n: usize, h: f64) -> V {
    let w = 1.0 / (2.0 * h);
    if i == 0 {
        (at(0) * -3.0 + at(1) * 4.0 - at(2)) * w
    } else if i + 1 == n {
        (at(n - 1) * 3.0 - at(n - 2) * 4.0 + at(n - 3)) * w
    } else {
        (at(i + 1) - at(i - 1)) * w
    }
}

/// Fourth-order centred first derivative; `at(o)` returns the sample at
/// offset `o ∈ [−2, 2]`.
fn diff4<V: FieldValue>(at: impl Fn(isize) -> V, h: f64) -> V {
    (at(-2) - at(-1) * 8.0 + at(1) * 8.0 - at(2)) * (1.0 / (12.0 * h))
}

/// Fourth-order centred second derivative.
fn second4(at: impl Fn(isize) -> f64, h: f64) -> f64 {
    (-at(-2) + 16.0 * at(-1) - 30.0 * at(0) + 16.0 * at(1) - at(2)) / (12.0 * h * h)
}

fn curl_of(jac: &[Vec3; 3]) -> Vec3 {
    // jac[a][c] = ∂_a F_c
    Vec3::new(jac[1].z - jac[2].y, jac[2].x - jac[0].z, jac[0].y - jac[1].x)
}

/// Fills competition `C = −∂C_h/∂t − ∇φ`, profit `P = rot C_h` and capital
/// `K = ∇ ln M` with second-order differences (one-sided on the outer
/// layer, see [`FieldGrid::is_boundary`]).
pub fn construct_fields(mut grid: FieldGrid) -> Result<FieldGrid> {
    let nt = grid.slices.len();
    if nt < 3 {
        return Err(Error::TooFewSlices { needed: 3, got: nt });
    }
    let g = grid.geometry;
    g.validate()?;
    if g.dims.iter().any(|&d| d < 3) {
        return Err(Error::IncompleteGrid("need at least 3 points per axis".into()));
    }
    let npts = g.points();
    for s in &grid.slices {
        if s.choice.len() != npts || s.phi.len() != npts || s.ln_m.len() != npts {
            return Err(Error::IncompleteGrid("potential samples missing".into()));
        }
    }

    let mut built = Vec::with_capacity(nt);
    for n in 0..nt {
        let slice = &grid.slices[n];
        let mut competition = Vec::with_capacity(npts);
        let mut profit = Vec::with_capacity(npts);
        let mut capital = Vec::with_capacity(npts);
        for idx in 0..npts {
            let c = g.coords(idx);
            let dt_choice = diff2(|m| grid.slices[m].choice[idx], n, nt, g.dt);
            let along = |axis: usize, i: usize| g.shifted(idx, axis, i as isize - c[axis] as isize);
            let grad = |f: &[f64]| Vec3::from_fn(|a, _| diff2(|i| f[along(a, i)], c[a], g.dims[a], g.spacing[a]));
            let jac: [Vec3; 3] =
                std::array::from_fn(|a| diff2(|i| slice.choice[along(a, i)], c[a], g.dims[a], g.spacing[a]));
            competition.push(-dt_choice - grad(&slice.phi));
            profit.push(curl_of(&jac));
            capital.push(grad(&slice.ln_m));
        }
        built.push((competition, profit, capital));
    }
    for (slice, (c, p, k)) in grid.slices.iter_mut().zip(built) {
        slice.competition = c;
        slice.profit = p;
        slice.capital = k;
    }
    Ok(grid)
}

/// Maximum and RMS of one equation's residual over the checked points.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EquationResidual {
    pub max_abs: f64,
    pub rms: f64,
}

/// Residuals of the field equations:
///
/// | field | equation |
/// |---|---|
/// | `competition_div` | `div C + ∂ ln M/∂t = 0` |
/// | `competition_curl` | `rot C + ∂P/∂t = 0` |
/// | `profit_div` | `div P = 0` |
/// | `profit_curl` | `rot P − ∂C/∂t − ∇ ln M = 0` |
/// | `gauge` | `div C_h + ∂φ/∂t = 0` |
/// | `potential_wave` | `Δφ − ∂ ln M/∂t − ∂²φ/∂t² = 0` |
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ResidualReport {
    pub competition_div: EquationResidual,
    pub competition_curl: EquationResidual,
    pub profit_div: EquationResidual,
    pub profit_curl: EquationResidual,
    pub gauge: EquationResidual,
    pub potential_wave: EquationResidual,
    pub points: usize,
}

impl ResidualReport {
    pub fn entries(&self) -> [(&'static str, EquationResidual); 6] {
        [
            ("competition_div", self.competition_div),
            ("competition_curl", self.competition_curl),
            ("profit_div", self.profit_div),
            ("profit_curl", self.profit_curl),
            ("gauge", self.gauge),
            ("potential_wave", self.potential_wave),
        ]
    }
}

/// Points within this many layers of the grid edge are not checked, so the
/// five-point stencils only read values built with centred differences.
pub const RESIDUAL_MARGIN: usize = 3;

#[derive(Default)]
struct Accum {
    max: f64,
    sq: f64,
}

impl Accum {
    fn add(&mut self, r: f64) {
        self.max = self.max.max(r.abs());
        self.sq += r * r;
    }

    fn finish(&self, n: usize) -> EquationResidual {
        EquationResidual {
            max_abs: self.max,
            rms: (self.sq / n as f64).sqrt(),
        }
    }
}

/// Evaluates the field-equation residuals with fourth-order centred
/// differences at every point at least [`RESIDUAL_MARGIN`] layers from the
/// edge in space and time.
///
/// Because the stencils differ from the second-order ones used by
/// [`construct_fields`], the report measures the truncation error of the
/// constructed fields rather than a discrete identity.
pub fn residual_check(grid: &FieldGrid) -> Result<ResidualReport> {
    let g = grid.geometry;
    let nt = grid.slices.len();
    let npts = g.points();
    for s in &grid.slices {
        let lens = [
            s.choice.len(),
            s.phi.len(),
            s.ln_m.len(),
            s.competition.len(),
            s.profit.len(),
        ];
        if lens.iter().any(|&l| l != npts) {
            return Err(Error::IncompleteGrid(
                "fields C_h, φ, ln M, C and P must be present on every slice".into(),
            ));
        }
    }
    let m = RESIDUAL_MARGIN;
    if nt < 2 * m + 1 || g.dims.iter().any(|&d| d < 2 * m + 1) {
        return Err(Error::IncompleteGrid(format!(
            "interior is empty; need at least {} points per axis and slices",
            2 * m + 1
        )));
    }

    let mut acc: [Accum; 6] = Default::default();
    let mut count = 0;
    for n in m..nt - m {
        let slice = &grid.slices[n];
        let dt_of = |f: &dyn Fn(&FieldSlice) -> f64| diff4(|o| f(&grid.slices[(n as isize + o) as usize]), g.dt);
        for idx in 0..npts {
            let c = g.coords(idx);
            if (0..3).any(|a| c[a] < m || c[a] + m >= g.dims[a]) {
                continue;
            }
            count += 1;
            let at = |a: usize, o: isize| g.shifted(idx, a, o);
            let d_vec = |f: &[Vec3], a: usize| diff4(|o| f[at(a, o)], g.spacing[a]);
            let d_sc = |f: &[f64], a: usize| diff4(|o| f[at(a, o)], g.spacing[a]);
            let div = |f: &[Vec3]| (0..3).map(|a| d_vec(f, a)[a]).sum::<f64>();
            let rot = |f: &[Vec3]| curl_of(&std::array::from_fn(|a| d_vec(f, a)));
            let dt_vec = |f: &dyn Fn(&FieldSlice) -> Vec3| diff4(|o| f(&grid.slices[(n as isize + o) as usize]), g.dt);

            let dt_ln_m = dt_of(&|s| s.ln_m[idx]);
            let dt_phi = dt_of(&|s| s.phi[idx]);
            let dt_profit = dt_vec(&|s| s.profit[idx]);
            let dt_comp = dt_vec(&|s| s.competition[idx]);
            let grad_ln_m = Vec3::from_fn(|a, _| d_sc(&slice.ln_m, a));
            let lap_phi: f64 = (0..3).map(|a| second4(|o| slice.phi[at(a, o)], g.spacing[a])).sum();
            let dtt_phi = second4(|o| grid.slices[(n as isize + o) as usize].phi[idx], g.dt);

            acc[0].add(div(&slice.competition) + dt_ln_m);
            acc[1].add((rot(&slice.competition) + dt_profit).norm());
            acc[2].add(div(&slice.profit));
            acc[3].add((rot(&slice.profit) - dt_comp - grad_ln_m).norm());
            acc[4].add(div(&slice.choice) + dt_phi);
            acc[5].add(lap_phi - dt_ln_m - dtt_phi);
        }
    }
    Ok(ResidualReport {
        competition_div: acc[0].finish(count),
        competition_curl: acc[1].finish(count),
        profit_div: acc[2].finish(count),
        profit_curl: acc[3].finish(count),
        gauge: acc[4].finish(count),
        potential_wave: acc[5].finish(count),
        points: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn phase_family(theta: impl Fn(f64) -> f64) -> impl Fn(f64) -> StateVector {
        let u = [c(0.6, 0.0), c(0.0, 0.8)];
        move |x| {
            let p = Complex64::from_polar(1.0, theta(x));
            u.iter().map(|v| p * v).collect()
        }
    }

    #[test]
    fn money_state_validation() {
        let e1 = vec![c(1.0, 0.0), c(0.0, 0.0)];
        let e2 = vec![c(0.0, 0.0), c(0.0, 1.0)];
        let m = MoneyState::new(vec![c(2.0, 0.0), c(0.0, 1.0)], vec![e1.clone(), e2], 1.0).unwrap();
        assert_eq!(m.total(), vec![c(2.0, 0.0), c(-1.0, 0.0)]);
        assert!(MoneyState::new(vec![c(1.0, 0.0)], vec![vec![c(2.0, 0.0)]], 1.0).is_err());
        assert!(MoneyState::new(vec![c(1.0, 0.0)], vec![e1.clone(), e1], 1.0).is_err());
    }

    #[test]
    fn activity_of_phase_evolution() {
        let a = 2.5;
        let dt = 1e-4;
        let u = [c(0.6, 0.0), c(0.0, 0.8)];
        let traj: Vec<StateVector> = (0..5)
            .map(|n| {
                let p = Complex64::from_polar(1.0, -a * n as f64 * dt);
                u.iter().map(|v| p * v).collect()
            })
            .collect();
        for value in activity_of(&traj, dt).unwrap() {
            assert!((value.re - a).abs() < 1e-6);
            assert!(value.im.abs() < 1e-8);
        }
        let still = vec![vec![c(1.0, 0.0)]; 3];
        assert_eq!(activity_of(&still, 0.1).unwrap(), vec![c(0.0, 0.0)]);
        assert!(matches!(
            activity_of(&still[..2], 0.1),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn coefficient_with_constant_activity() {
        let c_n = evolve_coefficient(|_| c(0.0, 0.0), |_| 1.7, 2.0);
        assert!((c_n - Complex64::from_polar(1.0, -3.4)).norm() < 1e-12);
        assert!((c_n.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn coefficient_with_oscillating_activity() {
        for t in [0.5, 2.0, 7.0] {
            let c_n = evolve_coefficient(|_| c(0.0, 0.0), f64::cos, t);
            let expected = Complex64::from_polar(1.0, -t.sin());
            assert!((c_n - expected).norm() < 1e-10);
        }
    }

    #[test]
    fn imaginary_connection_preserves_norm() {
        let m = phase_family(|t| 0.3 * t * t);
        let conn = |t: f64| time_connection(&m, t, 1e-5);
        let c_n = evolve_coefficient(conn, |_| 0.4, 3.0);
        assert!((c_n.norm() - 1.0).abs() < 1e-8);
        // exponent −∫(i θ' + i A) = −i(θ(3) + 1.2)
        assert!((c_n - Complex64::from_polar(1.0, -(0.3 * 9.0 + 1.2))).norm() < 1e-7);
    }

    #[test]
    fn connection_of_constant_vector_is_zero() {
        let v = berry_connection(|_| vec![c(0.6, 0.0), c(0.8, 0.0)], 0.3, 1e-4);
        assert_eq!(v, c(0.0, 0.0));
    }

    #[test]
    fn connection_of_phase_family() {
        let m = phase_family(|x| x * x);
        let v = berry_connection(&m, 1.0, 1e-5);
        assert!((v.re + 2.0).abs() < 1e-6);
        assert!(v.im.abs() < 1e-8);
    }

    #[test]
    fn transport_of_constant_and_rotated_bases() {
        let e = |i: usize| {
            let mut v = vec![c(0.0, 0.0); 3];
            v[i] = c(1.0, 0.0);
            v
        };
        let constant = |_x: f64| vec![e(0), e(1), e(2)];
        for od in parallel_transport_check(constant, 0.4, 1e-4).unwrap() {
            assert_eq!(od.value, c(0.0, 0.0));
        }
        let phased = |x: f64| {
            let p = Complex64::from_polar(1.0, x.sin());
            vec![
                e(0).iter().map(|v| p * v).collect(),
                e(1).iter().map(|v| p * v).collect(),
            ]
        };
        for od in parallel_transport_check(phased, 0.4, 1e-5).unwrap() {
            assert!(od.value.norm() < 1e-8);
        }
    }

    #[test]
    fn transport_detects_coupling() {
        let w = 0.7;
        let coupled = move |x: f64| {
            let (s, co) = (w * x).sin_cos();
            vec![vec![c(co, 0.0), c(s, 0.0)], vec![c(-s, 0.0), c(co, 0.0)]]
        };
        let off = parallel_transport_check(coupled, 1.1, 1e-5).unwrap();
        assert_eq!(off.len(), 2);
        for od in off {
            assert!((od.value.norm() - w).abs() < 1e-8);
        }
        assert!(parallel_transport_check(|_| vec![vec![c(1.0, 0.0)]], 0.0, 1e-3).is_err());
    }

    fn rotational(x: Vec3) -> Vec3 {
        Vec3::new(-x.y, x.x, 0.0) * 0.5
    }

    #[test]
    fn line_phase_values() {
        let contour = circle_contour(Vec3::zeros(), 1.5, 1000);
        assert!(berry_phase_line(|_| Vec3::new(1.0, -2.0, 0.3), &contour).unwrap().abs() < 1e-12);
        let v = berry_phase_line(rotational, &contour).unwrap();
        assert!((v - PI * 1.5 * 1.5).abs() < 1e-4);
        let flat = vec![Vec3::zeros(), Vec3::x(), Vec3::x() * 2.0, Vec3::x(), Vec3::zeros()];
        assert!(berry_phase_line(rotational, &flat).unwrap().abs() < 1e-12);
        let open = &contour[..500];
        assert!(matches!(
            berry_phase_line(rotational, open),
            Err(Error::OpenContour { .. })
        ));
    }

    #[test]
    fn disk_mesh_boundary_is_contour() {
        let mesh = TriangleMesh::disk(Vec3::zeros(), 2.0, 4, 32);
        assert_eq!(mesh.triangles.len(), 32 + 3 * 64);
        assert_eq!(mesh.boundary_edges().len(), 32);
        let contour = circle_contour(Vec3::zeros(), 2.0, 32);
        assert!(check_boundary(&mesh, &contour).is_ok());
        let reversed: Vec<Vec3> = contour.iter().rev().copied().collect();
        assert!(matches!(
            check_boundary(&mesh, &reversed),
            Err(Error::MeshBoundaryMismatch(_))
        ));
        let other = circle_contour(Vec3::zeros(), 2.0, 31);
        assert!(matches!(
            check_boundary(&mesh, &other),
            Err(Error::MeshBoundaryMismatch(_))
        ));
    }

    #[test]
    fn surface_phase_values() {
        let rho = 1.2;
        let mesh = TriangleMesh::disk(Vec3::zeros(), rho, 8, 256);
        let contour = circle_contour(Vec3::zeros(), rho, 256);
        assert!(
            berry_phase_surface(|_| Vec3::new(3.0, 1.0, -1.0), &mesh, &contour)
                .unwrap()
                .abs()
                < 1e-9
        );
        let line = berry_phase_line(rotational, &contour).unwrap();
        let surf = berry_phase_surface(rotational, &mesh, &contour).unwrap();
        assert!(((line - surf) / line).abs() < 1e-3);
        assert!((surf - PI * rho * rho).abs() < 1e-3);
        let grad = |x: Vec3| Vec3::new(x.y.cos() + 2.0 * x.x * x.z, -x.x * x.y.sin(), x.x * x.x);
        assert!(berry_phase_surface(grad, &mesh, &contour).unwrap().abs() < 1e-6);
    }

    fn small_geometry(n: usize) -> GridGeometry {
        let h = 1.0 / (n - 1) as f64;
        GridGeometry {
            origin: Vec3::zeros(),
            spacing: Vec3::repeat(h),
            dims: [n, n, n],
            t0: 0.0,
            dt: h,
        }
    }

    #[test]
    fn zero_fields_have_zero_residuals() {
        let zero = |_: Vec3, _: f64| PotentialSample {
            choice: Vec3::zeros(),
            phi: 0.0,
            ln_m: 0.0,
        };
        let grid = construct_fields(FieldGrid::sample(small_geometry(8), 7, zero).unwrap()).unwrap();
        let rep = residual_check(&grid).unwrap();
        assert_eq!(rep.points, 2 * 2 * 2);
        for (_, r) in rep.entries() {
            assert_eq!(r.max_abs, 0.0);
        }
    }

    #[test]
    fn static_choice_has_no_competition() {
        let f = |x: Vec3, _: f64| PotentialSample {
            choice: Vec3::new(x.y * x.z, x.x.sin(), 1.0),
            phi: 0.0,
            ln_m: 0.0,
        };
        let grid = construct_fields(FieldGrid::sample(small_geometry(5), 3, f).unwrap()).unwrap();
        for s in &grid.slices {
            assert!(s.competition.iter().all(|c| c.norm() < 1e-12));
        }
    }

    #[test]
    fn gradient_choice_has_small_profit() {
        let f = |x: Vec3, _: f64| PotentialSample {
            choice: Vec3::new(x.y * x.z.cos(), x.x * x.z.cos(), -x.x * x.y * x.z.sin()),
            phi: 0.0,
            ln_m: 0.0,
        };
        let max_profit = |n: usize| {
            let grid = construct_fields(FieldGrid::sample(small_geometry(n), 3, f).unwrap()).unwrap();
            grid.slices[1]
                .profit
                .iter()
                .enumerate()
                .filter(|(i, _)| !grid.is_boundary(*i, 1))
                .map(|(_, p)| p.norm())
                .fold(0.0, f64::max)
        };
        let coarse = max_profit(9);
        let fine = max_profit(17);
        assert!(coarse < 1e-2);
        assert!(coarse / fine > 3.5, "{coarse} {fine}");
    }

    #[test]
    fn injected_divergence_is_reported() {
        let f = |x: Vec3, t: f64| PotentialSample {
            choice: Vec3::new(x.y.sin() * t, x.z * x.x, x.x.cos()),
            phi: 0.0,
            ln_m: 0.0,
        };
        let mut grid = construct_fields(FieldGrid::sample(small_geometry(9), 7, f).unwrap()).unwrap();
        let base = residual_check(&grid).unwrap().profit_div.max_abs;
        let geom = grid.geometry;
        let strength = 0.4;
        for s in &mut grid.slices {
            for (idx, p) in s.profit.iter_mut().enumerate() {
                *p += (geom.position(idx) - Vec3::repeat(0.5)) * strength;
            }
        }
        let rep = residual_check(&grid).unwrap();
        assert!((rep.profit_div.max_abs - 3.0 * strength).abs() < base + 1e-10);
    }

    #[test]
    fn residuals_need_constructed_fields() {
        let f = |_: Vec3, _: f64| PotentialSample {
            choice: Vec3::zeros(),
            phi: 0.0,
            ln_m: 0.0,
        };
        let raw = FieldGrid::sample(small_geometry(8), 7, f).unwrap();
        assert!(matches!(residual_check(&raw), Err(Error::IncompleteGrid(_))));
        assert!(matches!(
            construct_fields(FieldGrid::sample(small_geometry(8), 2, f).unwrap()),
            Err(Error::TooFewSlices { .. })
        ));
        let thin = construct_fields(FieldGrid::sample(small_geometry(5), 7, f).unwrap()).unwrap();
        assert!(matches!(residual_check(&thin), Err(Error::IncompleteGrid(_))));
    }
}
