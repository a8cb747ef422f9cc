//! Unit-sphere geometry and the paired-vector form of the `B`-sphere.

use crate::error::{check_dim, Error, Result};
use crate::linalg::vector::{axpy, dot, norm, DenseVector};

/// Below this tangent length the closed forms are replaced by their limits.
pub const SMALL_TANGENT: f64 = 1e-14;

/// Unit-norm point.
#[derive(Clone, Debug, PartialEq)]
pub struct SpherePoint {
    coords: DenseVector,
}

impl SpherePoint {
    /// Normalizes `v`.
    pub fn new(v: DenseVector) -> Result<Self> {
        let nv = norm(&v);
        if !(nv > 0.0) || !nv.is_finite() {
            return Err(Error::Geometry("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(Self { coords: v.into_iter().map(|c| c / nv).collect() })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> DenseVector {
        self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Tangent vector together with its base point.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    pub base: SpherePoint,
    pub dir: DenseVector,
}

impl TangentVector {
    pub fn zero(base: &SpherePoint) -> Self {
        Self { base: base.clone(), dir: vec![0.0; base.dim()] }
    }

    pub fn norm(&self) -> f64 {
        norm(&self.dir)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { base: self.base.clone(), dir: self.dir.iter().map(|v| a * v).collect() }
    }

    /// `a·self + b·other`; both must share the base point.
    pub fn lincomb(&self, a: f64, other: &TangentVector, b: f64) -> Result<Self> {
        check_dim(self.dir.len(), other.dir.len())?;
        let dir = self.dir.iter().zip(&other.dir).map(|(u, w)| a * u + b * w).collect();
        Ok(Self { base: self.base.clone(), dir })
    }
}

fn clamp_unit(c: f64) -> f64 {
    c.clamp(-1.0, 1.0)
}

/// `(I − x xᵀ) ξ`
pub fn project_tangent(x: &SpherePoint, xi: &[f64]) -> Result<TangentVector> {
    check_dim(x.dim(), xi.len())?;
    let c = dot(x.coords(), xi);
    let mut dir = xi.to_vec();
    axpy(-c, x.coords(), &mut dir);
    Ok(TangentVector { base: x.clone(), dir })
}

/// `cos‖v‖ x + sin‖v‖ v/‖v‖`
pub fn exp_map(x: &SpherePoint, v: &TangentVector) -> Result<SpherePoint> {
    check_dim(x.dim(), v.dir.len())?;
    let t = v.norm();
    if t < SMALL_TANGENT {
        return Ok(x.clone());
    }
    let (s, c) = t.sin_cos();
    let y: DenseVector = x.coords().iter().zip(&v.dir).map(|(xi, vi)| c * xi + s * vi / t).collect();
    SpherePoint::new(y)
}

/// Inverse of `exp_map` on the open hemisphere-free domain `y ≠ −x`.
pub fn log_map(x: &SpherePoint, y: &SpherePoint) -> Result<TangentVector> {
    check_dim(x.dim(), y.dim())?;
    let c = dot(x.coords(), y.coords());
    let mut p = y.coords().to_vec();
    axpy(-c, x.coords(), &mut p);
    let s = norm(&p);
    // atan2 of the two legs is the clamped arccos, but keeps full relative
    // accuracy for nearby points.
    let theta = s.atan2(clamp_unit(c));
    if s < SMALL_TANGENT {
        if c < 0.0 {
            return Err(Error::Geometry("logarithm undefined at the antipode".into()));
        }
        return Ok(TangentVector::zero(x));
    }
    let dir = p.into_iter().map(|pi| theta * pi / s).collect();
    Ok(TangentVector { base: x.clone(), dir })
}

/// Parallel transport of `u` from `x` to `y` along the minimizing geodesic.
pub fn parallel_transport(x: &SpherePoint, y: &SpherePoint, u: &TangentVector) -> Result<TangentVector> {
    check_dim(x.dim(), u.dir.len())?;
    let v = log_map(x, y)?;
    let t = v.norm();
    if t < SMALL_TANGENT {
        return Ok(TangentVector { base: y.clone(), dir: u.dir.clone() });
    }
    let vu = dot(&v.dir, &u.dir);
    let (s, c) = t.sin_cos();
    let mut dir = u.dir.clone();
    axpy((c - 1.0) * vu / (t * t), &v.dir, &mut dir);
    axpy(-s * vu / t, x.coords(), &mut dir);
    Ok(TangentVector { base: y.clone(), dir })
}

pub fn distance(x: &SpherePoint, y: &SpherePoint) -> Result<f64> {
    Ok(log_map(x, y)?.norm())
}

/// A point of the `B`-sphere stored with its co-iterate `x̂ = Bx`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairedVector {
    pub x: DenseVector,
    pub xhat: DenseVector,
}

impl PairedVector {
    pub fn new(x: DenseVector, xhat: DenseVector) -> Result<Self> {
        check_dim(x.len(), xhat.len())?;
        Ok(Self { x, xhat })
    }

    pub fn zeros(n: usize) -> Self {
        Self { x: vec![0.0; n], xhat: vec![0.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// `xᵀ x̂`, the squared `B`-norm.
    pub fn bnorm2(&self) -> f64 {
        dot(&self.x, &self.xhat)
    }

    /// Symmetrized `B` inner product `(xᵀŵ + wᵀx̂)/2`.
    pub fn binner(&self, other: &PairedVector) -> f64 {
        0.5 * (dot(&self.x, &other.xhat) + dot(&other.x, &self.xhat))
    }

    pub fn scale(&mut self, a: f64) {
        for v in self.x.iter_mut() {
            *v *= a;
        }
        for v in self.xhat.iter_mut() {
            *v *= a;
        }
    }

    pub fn negate(&mut self) {
        self.scale(-1.0);
    }

    /// `self += a·other` on both components.
    pub fn axpy(&mut self, a: f64, other: &PairedVector) {
        axpy(a, &other.x, &mut self.x);
        axpy(a, &other.xhat, &mut self.xhat);
    }

    /// `a·self + b·other`
    pub fn lincomb(&self, a: f64, other: &PairedVector, b: f64) -> PairedVector {
        let mut out = self.clone();
        out.scale(a);
        out.axpy(b, other);
        out
    }

    /// Same coefficients on both components.
    pub fn combine(coeffs: &[f64], parts: &[&PairedVector]) -> PairedVector {
        assert_eq!(coeffs.len(), parts.len());
        let mut out = PairedVector::zeros(parts[0].dim());
        for (c, p) in coeffs.iter().zip(parts) {
            if *c != 0.0 {
                out.axpy(*c, p);
            }
        }
        out
    }
}

/// Divides both components by `√⟨x, x̂⟩`.
pub fn paired_normalize(p: &PairedVector) -> Result<PairedVector> {
    let mut out = p.clone();
    normalize_in_place(&mut out)?;
    Ok(out)
}

pub(crate) fn normalize_in_place(p: &mut PairedVector) -> Result<f64> {
    let e = p.bnorm2();
    if !(e > 0.0) || !e.is_finite() {
        return Err(Error::Geometry(format!(
            "non-positive B-norm {e:e}: co-iterate lost consistency with an SPD preconditioner"
        )));
    }
    let e = e.sqrt();
    p.scale(1.0 / e);
    Ok(e)
}

/// Tolerance on the orthonormality precondition of `paired_geodesic_step`.
pub const PAIRED_ORTHO_TOL: f64 = 1e-8;

/// `cos(angle)·base + sin(angle)·dir`, applied identically to both
/// components and `B`-normalized. `dir` must be `B`-orthonormal to `base`.
pub fn paired_geodesic_step(base: &PairedVector, dir: &PairedVector, angle: f64) -> Result<PairedVector> {
    check_dim(base.dim(), dir.dim())?;
    let cross = base.binner(dir);
    let dn = dir.bnorm2();
    if cross.abs() > PAIRED_ORTHO_TOL || (dn - 1.0).abs() > PAIRED_ORTHO_TOL {
        return Err(Error::Geometry(format!(
            "direction not B-orthonormal to base (cross {cross:e}, norm² {dn})"
        )));
    }
    let mut out = geodesic_combination(base, dir, angle);
    normalize_in_place(&mut out)?;
    Ok(out)
}

pub(crate) fn geodesic_combination(base: &PairedVector, dir: &PairedVector, angle: f64) -> PairedVector {
    let (s, c) = angle.sin_cos();
    base.lincomb(c, dir, s)
}
