//! The parametric unit-square-periodic Fourier vector field and its
//! symmetrizations.
//!
//! A base field `F` is a truncated 2-D Fourier series, periodic with the unit
//! square. Symmetrization operators wrap it:
//!
//! - basis conjugation `B ∘ F ∘ B⁻¹` makes the field periodic over an
//!   arbitrary lattice `B`;
//! - rotation symmetrization sums `K` rotated copies, producing a field
//!   equivariant under rotation about a center;
//! - transflection symmetrization adds one glide-reflected copy, producing
//!   equivariance under the glide;
//! - an optional outer affine conjugation `A_lin ∘ V ∘ A⁻¹` transports the
//!   whole symmetry group by a rotation+scale+translation.
//!
//! A symmetrized field is compiled once into a list of affine *branches*
//! `V(p) = Σ_b Post_b · F(PreL_b · p + PreO_b)` with `PreL_b = Post_b⁻¹`,
//! which keeps evaluation, the spatial Jacobian, the divergence, and all
//! reverse-mode parameter derivatives straightforward and fast.

use crate::geom::{AffineMap, Line, Mat2, Point2, Vec2};
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("coefficient tensor length {got} does not match 2*4*{n1}*{n2}")]
    ShapeMismatch { got: usize, n1: usize, n2: usize },
    #[error("symmetry incompatible with lattice: {0}")]
    SymmetryIncompatible(String),
    #[error("basis conjugation must be the innermost (first) operator")]
    BasisNotInnermost,
    #[error("affine conjugation must be the outermost (last) operator")]
    AffineNotOutermost,
    #[error("degenerate basis in symmetry op")]
    DegenerateBasis,
    #[error("rotation order must be at least 2, got {0}")]
    BadRotationOrder(u32),
    #[error("parse error in field checkpoint: {0}")]
    Parse(String),
    #[error("non-finite coefficient")]
    NonFinite,
}

/// Coefficients of the unit-square-periodic Fourier field.
///
/// Indexing is `(k, l, i, j)`: `k` selects the output coordinate (0 or 1),
/// `l` the product basis (0: cos·cos, 1: cos·sin, 2: sin·cos, 3: sin·sin),
/// `i in 0..=omega1` and `j in 0..=omega2` the frequency multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierParams {
    omega1: usize,
    omega2: usize,
    coeffs: Vec<f64>,
}

impl FourierParams {
    pub fn zeros(omega1: usize, omega2: usize) -> Self {
        let n = 2 * 4 * (omega1 + 1) * (omega2 + 1);
        FourierParams {
            omega1,
            omega2,
            coeffs: vec![0.0; n],
        }
    }

    pub fn from_coeffs(omega1: usize, omega2: usize, coeffs: Vec<f64>) -> Result<Self, FieldError> {
        let n = 2 * 4 * (omega1 + 1) * (omega2 + 1);
        if coeffs.len() != n {
            return Err(FieldError::ShapeMismatch {
                got: coeffs.len(),
                n1: omega1 + 1,
                n2: omega2 + 1,
            });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(FieldError::NonFinite);
        }
        Ok(FourierParams {
            omega1,
            omega2,
            coeffs,
        })
    }

    pub fn omega(&self) -> (usize, usize) {
        (self.omega1, self.omega2)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, k: usize, l: usize, i: usize, j: usize) -> usize {
        debug_assert!(k < 2 && l < 4 && i <= self.omega1 && j <= self.omega2);
        ((k * 4 + l) * (self.omega1 + 1) + i) * (self.omega2 + 1) + j
    }

    pub fn get(&self, k: usize, l: usize, i: usize, j: usize) -> f64 {
        self.coeffs[self.index(k, l, i, j)]
    }

    pub fn set(&mut self, k: usize, l: usize, i: usize, j: usize, v: f64) {
        let idx = self.index(k, l, i, j);
        self.coeffs[idx] = v;
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |a, c| a.max(c.abs()))
    }

    fn tables(&self, p: Point2) -> BasisTables {
        BasisTables::new(self.omega1, self.omega2, p)
    }

    /// Field value `(f(x,y,1), f(x,y,2))`.
    pub fn eval(&self, p: Point2) -> Vec2 {
        let t = self.tables(p);
        let mut out = [0.0; 2];
        let mut idx = 0;
        for f in out.iter_mut() {
            for l in 0..4 {
                for i in 0..=self.omega1 {
                    let (fx, _, _) = t.x_factors(l, i);
                    for j in 0..=self.omega2 {
                        let (fy, _, _) = t.y_factors(l, j);
                        *f += self.coeffs[idx] * fx * fy;
                        idx += 1;
                    }
                }
            }
        }
        Vec2::new(out[0], out[1])
    }

    /// Spatial Jacobian `dF/dp`.
    pub fn jacobian(&self, p: Point2) -> Mat2 {
        let t = self.tables(p);
        let mut j00 = 0.0;
        let mut j01 = 0.0;
        let mut j10 = 0.0;
        let mut j11 = 0.0;
        let mut idx = 0;
        for k in 0..2 {
            for l in 0..4 {
                for i in 0..=self.omega1 {
                    let (fx, dfx, _) = t.x_factors(l, i);
                    for jj in 0..=self.omega2 {
                        let (fy, dfy, _) = t.y_factors(l, jj);
                        let c = self.coeffs[idx];
                        idx += 1;
                        let gx = c * dfx * fy;
                        let gy = c * fx * dfy;
                        if k == 0 {
                            j00 += gx;
                            j01 += gy;
                        } else {
                            j10 += gx;
                            j11 += gy;
                        }
                    }
                }
            }
        }
        Mat2::new(j00, j01, j10, j11)
    }

    /// Trace of the spatial Jacobian (the field divergence).
    pub fn trace_jacobian(&self, p: Point2) -> f64 {
        let t = self.tables(p);
        let mut tr = 0.0;
        let mut idx = 0;
        for k in 0..2 {
            for l in 0..4 {
                for i in 0..=self.omega1 {
                    let (fx, dfx, _) = t.x_factors(l, i);
                    for jj in 0..=self.omega2 {
                        let (fy, dfy, _) = t.y_factors(l, jj);
                        let c = self.coeffs[idx];
                        idx += 1;
                        tr += if k == 0 { c * dfx * fy } else { c * fx * dfy };
                    }
                }
            }
        }
        tr
    }

    /// Spatial gradient of the divergence.
    pub fn grad_trace_jacobian(&self, p: Point2) -> Vec2 {
        let t = self.tables(p);
        let mut gx = 0.0;
        let mut gy = 0.0;
        let mut idx = 0;
        for k in 0..2 {
            for l in 0..4 {
                for i in 0..=self.omega1 {
                    let (fx, dfx, ddfx) = t.x_factors(l, i);
                    for jj in 0..=self.omega2 {
                        let (fy, dfy, ddfy) = t.y_factors(l, jj);
                        let c = self.coeffs[idx];
                        idx += 1;
                        if k == 0 {
                            // d/dx and d/dy of (df_0/dx)
                            gx += c * ddfx * fy;
                            gy += c * dfx * dfy;
                        } else {
                            // d/dx and d/dy of (df_1/dy)
                            gx += c * dfx * dfy;
                            gy += c * fx * ddfy;
                        }
                    }
                }
            }
        }
        Vec2::new(gx, gy)
    }

    /// Accumulates `d<w, F(p)>/dθ` into `out` (same layout as the tensor).
    pub fn accum_vjp_eval(&self, p: Point2, w: Vec2, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.coeffs.len());
        let t = self.tables(p);
        let wk = [w.x, w.y];
        let mut idx = 0;
        for k in 0..2 {
            for l in 0..4 {
                for i in 0..=self.omega1 {
                    let (fx, _, _) = t.x_factors(l, i);
                    for jj in 0..=self.omega2 {
                        let (fy, _, _) = t.y_factors(l, jj);
                        out[idx] += wk[k] * fx * fy;
                        idx += 1;
                    }
                }
            }
        }
    }

    /// Accumulates `c * d(tr dF/dp)/dθ` into `out`.
    pub fn accum_vjp_trace_jac(&self, p: Point2, c: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.coeffs.len());
        let t = self.tables(p);
        let mut idx = 0;
        for k in 0..2 {
            for l in 0..4 {
                for i in 0..=self.omega1 {
                    let (fx, dfx, _) = t.x_factors(l, i);
                    for jj in 0..=self.omega2 {
                        let (fy, dfy, _) = t.y_factors(l, jj);
                        out[idx] += c * if k == 0 { dfx * fy } else { fx * dfy };
                        idx += 1;
                    }
                }
            }
        }
    }
}

/// Precomputed cos/sin columns at a point, with first/second derivative
/// factors of each 1-D basis component.
struct BasisTables {
    cx: Vec<f64>,
    sx: Vec<f64>,
    cy: Vec<f64>,
    sy: Vec<f64>,
    wx: Vec<f64>,
    wy: Vec<f64>,
}

impl BasisTables {
    fn new(omega1: usize, omega2: usize, p: Point2) -> Self {
        let build = |omega: usize, u: f64| -> (Vec<f64>, Vec<f64>, Vec<f64>) {
            let mut c = Vec::with_capacity(omega + 1);
            let mut s = Vec::with_capacity(omega + 1);
            let mut w = Vec::with_capacity(omega + 1);
            for i in 0..=omega {
                let wi = TAU * i as f64;
                let (si, ci) = (wi * u).sin_cos();
                c.push(ci);
                s.push(si);
                w.push(wi);
            }
            (c, s, w)
        };
        let (cx, sx, wx) = build(omega1, p.x);
        let (cy, sy, wy) = build(omega2, p.y);
        BasisTables {
            cx,
            sx,
            cy,
            sy,
            wx,
            wy,
        }
    }

    /// (value, d/dx, d²/dx²) of the x-factor of basis `l` at frequency `i`.
    #[inline]
    fn x_factors(&self, l: usize, i: usize) -> (f64, f64, f64) {
        let w = self.wx[i];
        if l < 2 {
            // cos(2πix)
            (self.cx[i], -w * self.sx[i], -w * w * self.cx[i])
        } else {
            (self.sx[i], w * self.cx[i], -w * w * self.sx[i])
        }
    }

    /// (value, d/dy, d²/dy²) of the y-factor of basis `l` at frequency `j`.
    #[inline]
    fn y_factors(&self, l: usize, j: usize) -> (f64, f64, f64) {
        let w = self.wy[j];
        if l % 2 == 0 {
            (self.cy[j], -w * self.sy[j], -w * w * self.cy[j])
        } else {
            (self.sy[j], w * self.cy[j], -w * w * self.sy[j])
        }
    }
}

/// One symmetrization operator. Operators are listed innermost-first on a
/// `SymmetrizedField`.
#[derive(Debug, Clone, PartialEq)]
pub enum SymmetryOp {
    /// `V(p) = B · F(B⁻¹ p)` — makes a unit-square-periodic field B-periodic.
    BasisConjugation(Mat2),
    /// Sum of `order` rotated copies about `center`.
    RotationSym { center: Point2, order: u32 },
    /// Identity plus one glide-reflected copy.
    TransflectionSym { line: Line, mu: f64 },
    /// Outer conjugation by a rotation+scale+translation.
    AffineConjugation(AffineMap),
}

/// One expanded branch: contributes `post · F(pre_lin · p + pre_off)`.
#[derive(Debug, Clone, Copy)]
struct Branch {
    pre_lin: Mat2,
    pre_off: Vec2,
    post: Mat2,
}

/// A base Fourier field with an ordered list of symmetrization operators.
/// Immutable after construction; evaluation and gradients are pure.
#[derive(Debug, Clone)]
pub struct SymmetrizedField {
    params: FourierParams,
    ops: Vec<SymmetryOp>,
    branches: Vec<Branch>,
    affine: Option<AffineMap>,
    /// Lattice (columns) of the innermost basis conjugation, if present.
    lattice: Option<Mat2>,
}

const LATTICE_TOL: f64 = 1e-9;

fn is_near_integer(v: f64) -> bool {
    (v - v.round()).abs() <= LATTICE_TOL
}

/// Checks `B⁻¹ M B` has integer entries, i.e. `M` maps the lattice to itself.
fn preserves_lattice(m: Mat2, basis: Mat2) -> Result<bool, FieldError> {
    let binv = basis.inverse().map_err(|_| FieldError::DegenerateBasis)?;
    let c = binv.mul_mat(m).mul_mat(basis);
    Ok(is_near_integer(c.a) && is_near_integer(c.b) && is_near_integer(c.c) && is_near_integer(c.d))
}

fn is_lattice_vector(v: Vec2, basis: Mat2) -> Result<bool, FieldError> {
    let binv = basis.inverse().map_err(|_| FieldError::DegenerateBasis)?;
    let c = binv.mul_vec(v);
    Ok(is_near_integer(c.x) && is_near_integer(c.y))
}

impl SymmetrizedField {
    pub fn new(params: FourierParams, ops: Vec<SymmetryOp>) -> Result<Self, FieldError> {
        let mut branches = vec![Branch {
            pre_lin: Mat2::IDENTITY,
            pre_off: Vec2::ZERO,
            post: Mat2::IDENTITY,
        }];
        let mut affine = None;
        let mut lattice: Option<Mat2> = None;

        for (pos, op) in ops.iter().enumerate() {
            if affine.is_some() {
                return Err(FieldError::AffineNotOutermost);
            }
            match op {
                SymmetryOp::BasisConjugation(b) => {
                    if pos != 0 {
                        return Err(FieldError::BasisNotInnermost);
                    }
                    let binv = b.inverse().map_err(|_| FieldError::DegenerateBasis)?;
                    for br in &mut branches {
                        br.pre_lin = br.pre_lin.mul_mat(binv);
                        br.post = b.mul_mat(br.post);
                    }
                    lattice = Some(*b);
                }
                SymmetryOp::RotationSym { center, order } => {
                    if *order < 2 {
                        return Err(FieldError::BadRotationOrder(*order));
                    }
                    if let Some(b) = lattice {
                        let r = Mat2::rotation(TAU / *order as f64);
                        if !preserves_lattice(r, b)? {
                            return Err(FieldError::SymmetryIncompatible(format!(
                                "rotation of order {order} does not preserve the lattice"
                            )));
                        }
                    }
                    let mut expanded = Vec::with_capacity(branches.len() * *order as usize);
                    for k in 1..=*order {
                        let angle = TAU * k as f64 / *order as f64;
                        let r = Mat2::rotation(angle);
                        let rinv = Mat2::rotation(-angle);
                        // R_c(p) = R p + (I - R) c
                        let off = *center - r.mul_vec(*center);
                        for br in &branches {
                            expanded.push(Branch {
                                pre_lin: br.pre_lin.mul_mat(r),
                                pre_off: br.pre_lin.mul_vec(off) + br.pre_off,
                                post: rinv.mul_mat(br.post),
                            });
                        }
                    }
                    branches = expanded;
                }
                SymmetryOp::TransflectionSym { line, mu } => {
                    let refl = Mat2::reflection(line.direction);
                    if let Some(b) = lattice {
                        if !preserves_lattice(refl, b)? {
                            return Err(FieldError::SymmetryIncompatible(
                                "transflection axis reflection does not preserve the lattice"
                                    .into(),
                            ));
                        }
                        if !is_lattice_vector(line.direction * (2.0 * mu), b)? {
                            return Err(FieldError::SymmetryIncompatible(format!(
                                "2·mu·direction = ({}, {}) is not a lattice vector",
                                2.0 * mu * line.direction.x,
                                2.0 * mu * line.direction.y
                            )));
                        }
                    }
                    // G(p) = M p + g
                    let g = line.anchor - refl.mul_vec(line.anchor) + line.direction * *mu;
                    let mut expanded = Vec::with_capacity(branches.len() * 2);
                    expanded.extend(branches.iter().copied());
                    for br in &branches {
                        expanded.push(Branch {
                            pre_lin: br.pre_lin.mul_mat(refl),
                            pre_off: br.pre_lin.mul_vec(g) + br.pre_off,
                            post: refl.mul_mat(br.post),
                        });
                    }
                    branches = expanded;
                }
                SymmetryOp::AffineConjugation(a) => {
                    affine = Some(*a);
                }
            }
        }

        // Invariant used by divergence: each branch satisfies pre_lin = post⁻¹.
        debug_assert!(branches.iter().all(|b| {
            let p = b.pre_lin.mul_mat(b.post);
            (p.a - 1.0).abs() < 1e-9
                && p.b.abs() < 1e-9
                && p.c.abs() < 1e-9
                && (p.d - 1.0).abs() < 1e-9
        }));

        Ok(SymmetrizedField {
            params,
            ops,
            branches,
            affine,
            lattice,
        })
    }

    pub fn params(&self) -> &FourierParams {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut FourierParams {
        &mut self.params
    }

    pub fn set_params(&mut self, params: FourierParams) -> Result<(), FieldError> {
        if params.len() != self.params.len() {
            return Err(FieldError::ShapeMismatch {
                got: params.len(),
                n1: self.params.omega1 + 1,
                n2: self.params.omega2 + 1,
            });
        }
        self.params = params;
        Ok(())
    }

    pub fn ops(&self) -> &[SymmetryOp] {
        &self.ops
    }

    pub fn affine(&self) -> Option<&AffineMap> {
        self.affine.as_ref()
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    /// Lattice of the inner basis conjugation, if any.
    pub fn inner_lattice(&self) -> Option<Mat2> {
        self.lattice
    }

    /// Lattice in world coordinates: the inner lattice transported by the
    /// affine conjugation's linear part.
    pub fn world_lattice(&self) -> Option<Mat2> {
        self.lattice.map(|b| match &self.affine {
            Some(a) => a.linear().mul_mat(b),
            None => b,
        })
    }

    #[inline]
    fn to_inner(&self, p: Point2) -> Point2 {
        match &self.affine {
            Some(a) => a.apply_inverse(p),
            None => p,
        }
    }

    fn inner_eval(&self, z: Point2) -> Vec2 {
        let mut acc = Vec2::ZERO;
        for br in &self.branches {
            let zb = br.pre_lin.mul_vec(z) + br.pre_off;
            acc += br.post.mul_vec(self.params.eval(zb));
        }
        acc
    }

    fn inner_jacobian(&self, z: Point2) -> Mat2 {
        let mut acc = Mat2::new(0.0, 0.0, 0.0, 0.0);
        for br in &self.branches {
            let zb = br.pre_lin.mul_vec(z) + br.pre_off;
            let j = br.post.mul_mat(self.params.jacobian(zb)).mul_mat(br.pre_lin);
            acc.a += j.a;
            acc.b += j.b;
            acc.c += j.c;
            acc.d += j.d;
        }
        acc
    }

    fn inner_divergence(&self, z: Point2) -> f64 {
        // pre_lin = post⁻¹ per branch, so each branch contributes tr J_F.
        let mut acc = 0.0;
        for br in &self.branches {
            let zb = br.pre_lin.mul_vec(z) + br.pre_off;
            acc += self.params.trace_jacobian(zb);
        }
        acc
    }

    fn inner_divergence_gradient(&self, z: Point2) -> Vec2 {
        let mut acc = Vec2::ZERO;
        for br in &self.branches {
            let zb = br.pre_lin.mul_vec(z) + br.pre_off;
            let g = self.params.grad_trace_jacobian(zb);
            acc += br.pre_lin.transpose().mul_vec(g);
        }
        acc
    }

    /// Field value at a world point.
    pub fn eval(&self, p: Point2) -> Vec2 {
        match &self.affine {
            Some(a) => a.linear().mul_vec(self.inner_eval(a.apply_inverse(p))),
            None => self.inner_eval(p),
        }
    }

    /// Spatial Jacobian `dV/dp` at a world point.
    pub fn jacobian(&self, p: Point2) -> Mat2 {
        match &self.affine {
            Some(a) => {
                let z = a.apply_inverse(p);
                a.linear()
                    .mul_mat(self.inner_jacobian(z))
                    .mul_mat(a.linear_inverse())
            }
            None => self.inner_jacobian(p),
        }
    }

    /// Divergence `tr(dV/dp)`.
    pub fn divergence(&self, p: Point2) -> f64 {
        self.inner_divergence(self.to_inner(p))
    }

    /// Spatial gradient of the divergence.
    pub fn divergence_gradient(&self, p: Point2) -> Vec2 {
        match &self.affine {
            Some(a) => {
                let z = a.apply_inverse(p);
                a.linear_inverse()
                    .transpose()
                    .mul_vec(self.inner_divergence_gradient(z))
            }
            None => self.inner_divergence_gradient(p),
        }
    }

    pub fn zero_grad(&self) -> FieldGrad {
        FieldGrad {
            theta: vec![0.0; self.params.len()],
            affine: self.affine.map(|_| AffineGrad::default()),
        }
    }

    /// Accumulates the gradient of `<w, V(p)>` with respect to the Fourier
    /// coefficients and (when present) the affine conjugation parameters.
    pub fn accum_vjp_eval(&self, p: Point2, w: Vec2, grad: &mut FieldGrad) {
        match &self.affine {
            None => {
                for br in &self.branches {
                    let zb = br.pre_lin.mul_vec(p) + br.pre_off;
                    let u = br.post.transpose().mul_vec(w);
                    self.params.accum_vjp_eval(zb, u, &mut grad.theta);
                }
            }
            Some(a) => {
                let z = a.apply_inverse(p);
                let alin = a.linear();
                let wa = alin.transpose().mul_vec(w);
                for br in &self.branches {
                    let zb = br.pre_lin.mul_vec(z) + br.pre_off;
                    let u = br.post.transpose().mul_vec(wa);
                    self.params.accum_vjp_eval(zb, u, &mut grad.theta);
                }
                let ag = grad.affine.as_mut().expect("affine grad present");
                let wz = self.inner_eval(z);
                let jw = self.inner_jacobian(z);
                // dA_lin/dangle = scale * R(angle + 90°)
                let dlin = Mat2::rotation(a.angle + std::f64::consts::FRAC_PI_2).scale(a.scale);
                let dz_dangle = -z.perp(); // = -R(90°) z
                ag.angle += w.dot(dlin.mul_vec(wz)) + w.dot(alin.mul_mat(jw).mul_vec(dz_dangle));
                let rphi = Mat2::rotation(a.angle);
                ag.scale += w.dot(rphi.mul_vec(wz)) - w.dot(rphi.mul_mat(jw).mul_vec(z));
                // grad_t = -(A_lin J A_lin⁻¹)^T w
                let jt = alin.mul_mat(jw).mul_mat(a.linear_inverse()).transpose();
                let gt = -jt.mul_vec(w).x;
                let gt2 = -jt.mul_vec(w).y;
                ag.tx += gt;
                ag.ty += gt2;
            }
        }
    }

    /// Accumulates `cot * d(div V(p))/dθ` (and affine parameters).
    pub fn accum_vjp_divergence(&self, p: Point2, cot: f64, grad: &mut FieldGrad) {
        match &self.affine {
            None => {
                for br in &self.branches {
                    let zb = br.pre_lin.mul_vec(p) + br.pre_off;
                    self.params.accum_vjp_trace_jac(zb, cot, &mut grad.theta);
                }
            }
            Some(a) => {
                let z = a.apply_inverse(p);
                for br in &self.branches {
                    let zb = br.pre_lin.mul_vec(z) + br.pre_off;
                    self.params.accum_vjp_trace_jac(zb, cot, &mut grad.theta);
                }
                let ag = grad.affine.as_mut().expect("affine grad present");
                let gdiv = self.inner_divergence_gradient(z);
                ag.angle += cot * gdiv.dot(-z.perp());
                ag.scale += cot * gdiv.dot(-z * (1.0 / a.scale));
                let gt = Mat2::rotation(a.angle)
                    .scale(1.0 / a.scale)
                    .mul_vec(gdiv)
                    * (-cot);
                ag.tx += gt.x;
                ag.ty += gt.y;
            }
        }
    }
}

/// Gradient with respect to the Fourier coefficients and, when an affine
/// conjugation is present, its four scalar parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrad {
    pub theta: Vec<f64>,
    pub affine: Option<AffineGrad>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AffineGrad {
    pub angle: f64,
    pub scale: f64,
    pub tx: f64,
    pub ty: f64,
}

impl FieldGrad {
    pub fn add_scaled(&mut self, other: &FieldGrad, s: f64) {
        for (a, b) in self.theta.iter_mut().zip(other.theta.iter()) {
            *a += s * b;
        }
        if let (Some(ga), Some(gb)) = (self.affine.as_mut(), other.affine.as_ref()) {
            ga.angle += s * gb.angle;
            ga.scale += s * gb.scale;
            ga.tx += s * gb.tx;
            ga.ty += s * gb.ty;
        }
    }
}

// ---------------------------------------------------------------------------
// Checkpoint serialization: a flat text format (header + one coefficient per
// line) shared by the tile and density pipelines.
// ---------------------------------------------------------------------------

pub fn serialize_field(sf: &SymmetrizedField) -> String {
    let mut out = String::new();
    let (o1, o2) = sf.params().omega();
    out.push_str("tileflow-field 1\n");
    out.push_str(&format!("omega {o1} {o2}\n"));
    out.push_str(&format!("ops {}\n", sf.ops().len()));
    for op in sf.ops() {
        match op {
            SymmetryOp::BasisConjugation(b) => {
                out.push_str(&format!("basis {} {} {} {}\n", b.a, b.b, b.c, b.d));
            }
            SymmetryOp::RotationSym { center, order } => {
                out.push_str(&format!("rotation {} {} {}\n", center.x, center.y, order));
            }
            SymmetryOp::TransflectionSym { line, mu } => {
                out.push_str(&format!(
                    "transflection {} {} {} {} {}\n",
                    line.anchor.x, line.anchor.y, line.direction.x, line.direction.y, mu
                ));
            }
            SymmetryOp::AffineConjugation(a) => {
                out.push_str(&format!(
                    "affine {} {} {} {}\n",
                    a.angle, a.scale, a.translation.x, a.translation.y
                ));
            }
        }
    }
    out.push_str(&format!("coeffs {}\n", sf.params().len()));
    for c in sf.params().coeffs() {
        out.push_str(&format!("{c}\n"));
    }
    out
}

pub fn deserialize_field(text: &str) -> Result<SymmetrizedField, FieldError> {
    let mut lines = text.lines();
    let mut next = || {
        lines
            .next()
            .ok_or_else(|| FieldError::Parse("unexpected end of input".into()))
    };
    let header = next()?;
    if header.trim() != "tileflow-field 1" {
        return Err(FieldError::Parse(format!("bad header: {header:?}")));
    }
    let omega_line = next()?;
    let toks: Vec<&str> = omega_line.split_whitespace().collect();
    if toks.len() != 3 || toks[0] != "omega" {
        return Err(FieldError::Parse(format!("bad omega line: {omega_line:?}")));
    }
    let parse_usize = |s: &str| {
        s.parse::<usize>()
            .map_err(|e| FieldError::Parse(format!("{e}: {s:?}")))
    };
    let parse_f64 = |s: &str| {
        s.parse::<f64>()
            .map_err(|e| FieldError::Parse(format!("{e}: {s:?}")))
    };
    let o1 = parse_usize(toks[1])?;
    let o2 = parse_usize(toks[2])?;
    let ops_line = next()?;
    let toks: Vec<&str> = ops_line.split_whitespace().collect();
    if toks.len() != 2 || toks[0] != "ops" {
        return Err(FieldError::Parse(format!("bad ops line: {ops_line:?}")));
    }
    let nops = parse_usize(toks[1])?;
    let mut ops = Vec::with_capacity(nops);
    for _ in 0..nops {
        let line = next()?;
        let t: Vec<&str> = line.split_whitespace().collect();
        match t.first().copied() {
            Some("basis") if t.len() == 5 => {
                ops.push(SymmetryOp::BasisConjugation(Mat2::new(
                    parse_f64(t[1])?,
                    parse_f64(t[2])?,
                    parse_f64(t[3])?,
                    parse_f64(t[4])?,
                )));
            }
            Some("rotation") if t.len() == 4 => {
                ops.push(SymmetryOp::RotationSym {
                    center: Vec2::new(parse_f64(t[1])?, parse_f64(t[2])?),
                    order: t[3]
                        .parse::<u32>()
                        .map_err(|e| FieldError::Parse(e.to_string()))?,
                });
            }
            Some("transflection") if t.len() == 6 => {
                let dir = Vec2::new(parse_f64(t[3])?, parse_f64(t[4])?);
                ops.push(SymmetryOp::TransflectionSym {
                    line: Line::through(Vec2::new(parse_f64(t[1])?, parse_f64(t[2])?), dir),
                    mu: parse_f64(t[5])?,
                });
            }
            Some("affine") if t.len() == 5 => {
                ops.push(SymmetryOp::AffineConjugation(AffineMap::new(
                    parse_f64(t[1])?,
                    parse_f64(t[2])?,
                    Vec2::new(parse_f64(t[3])?, parse_f64(t[4])?),
                )));
            }
            _ => return Err(FieldError::Parse(format!("bad op line: {line:?}"))),
        }
    }
    let coeffs_line = next()?;
    let t: Vec<&str> = coeffs_line.split_whitespace().collect();
    if t.len() != 2 || t[0] != "coeffs" {
        return Err(FieldError::Parse(format!("bad coeffs line: {coeffs_line:?}")));
    }
    let n = parse_usize(t[1])?;
    let mut coeffs = Vec::with_capacity(n);
    for _ in 0..n {
        coeffs.push(parse_f64(next()?.trim())?);
    }
    let params = FourierParams::from_coeffs(o1, o2, coeffs)?;
    SymmetrizedField::new(params, ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    pub(crate) fn random_params(omega: usize, amp: f64, rng: &mut impl Rng) -> FourierParams {
        let mut p = FourierParams::zeros(omega, omega);
        for c in p.coeffs_mut() {
            *c = rng.gen_range(-amp..amp);
        }
        p
    }

    #[test]
    fn zero_params_zero_field() {
        let p = FourierParams::zeros(3, 3);
        let v = p.eval(Vec2::new(0.37, -1.2));
        assert_eq!(v, Vec2::ZERO);
    }

    #[test]
    fn constant_term() {
        // theta_{0,0}^{1,1} = 1 gives the constant field (1, 0).
        let mut p = FourierParams::zeros(2, 2);
        p.set(0, 0, 0, 0, 1.0);
        for q in [Vec2::ZERO, Vec2::new(0.3, 0.9), Vec2::new(-4.0, 2.5)] {
            assert!((p.eval(q) - Vec2::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn single_sin_term() {
        // theta_{1,0}^{2,3} = 1: second coordinate, sin·cos basis, i=1, j=0.
        let mut p = FourierParams::zeros(1, 1);
        p.set(1, 2, 1, 0, 1.0);
        let v = p.eval(Vec2::new(0.25, 0.7));
        assert!((v - Vec2::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn jacobian_single_term_analytic() {
        // theta_{1,0}^{1,3} = 1: f1 = sin(2πx), df1/dx = 2π cos(2πx).
        let mut p = FourierParams::zeros(1, 1);
        p.set(0, 2, 1, 0, 1.0);
        let x = 0.13;
        let j = p.jacobian(Vec2::new(x, 0.4));
        assert!((j.a - TAU * (TAU * x).cos()).abs() < 1e-12);
        assert!(j.b.abs() < 1e-15);
        assert!(j.c.abs() < 1e-15);
        assert!(j.d.abs() < 1e-15);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = random_params(3, 1.0, &mut rng);
        let h = 1e-5;
        for _ in 0..10 {
            let q = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let j = p.jacobian(q);
            let fd_x = (p.eval(q + Vec2::new(h, 0.0)) - p.eval(q - Vec2::new(h, 0.0))) * (0.5 / h);
            let fd_y = (p.eval(q + Vec2::new(0.0, h)) - p.eval(q - Vec2::new(0.0, h))) * (0.5 / h);
            let scale = 1.0 + j.a.abs() + j.b.abs() + j.c.abs() + j.d.abs();
            assert!((j.a - fd_x.x).abs() / scale < 1e-6);
            assert!((j.c - fd_x.y).abs() / scale < 1e-6);
            assert!((j.b - fd_y.x).abs() / scale < 1e-6);
            assert!((j.d - fd_y.y).abs() / scale < 1e-6);
        }
    }

    #[test]
    fn zero_params_zero_jacobian() {
        let p = FourierParams::zeros(2, 2);
        let j = p.jacobian(Vec2::new(0.4, 0.1));
        assert_eq!((j.a, j.b, j.c, j.d), (0.0, 0.0, 0.0, 0.0));
    }

    fn sample_field(rng: &mut impl Rng) -> SymmetrizedField {
        let params = random_params(2, 0.5, rng);
        SymmetrizedField::new(
            params,
            vec![
                SymmetryOp::BasisConjugation(Mat2::IDENTITY),
                SymmetryOp::RotationSym {
                    center: Vec2::new(0.5, 0.5),
                    order: 4,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn identity_basis_matches_raw_field() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let params = random_params(2, 0.7, &mut rng);
        let sf = SymmetrizedField::new(
            params.clone(),
            vec![SymmetryOp::BasisConjugation(Mat2::IDENTITY)],
        )
        .unwrap();
        for _ in 0..20 {
            let p = Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            assert!((sf.eval(p) - params.eval(p)).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_base_stays_zero_under_ops() {
        let sf = SymmetrizedField::new(
            FourierParams::zeros(2, 2),
            vec![
                SymmetryOp::BasisConjugation(Mat2::IDENTITY),
                SymmetryOp::TransflectionSym {
                    line: Line::through(Vec2::new(0.5, 0.0), Vec2::new(0.0, 1.0)),
                    mu: 1.0,
                },
                SymmetryOp::RotationSym {
                    center: Vec2::ZERO,
                    order: 2,
                },
            ],
        )
        .unwrap();
        assert_eq!(sf.eval(Vec2::new(0.3, -0.9)), Vec2::ZERO);
    }

    #[test]
    fn rotation_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sf = sample_field(&mut rng);
        let c = Vec2::new(0.5, 0.5);
        for _ in 0..200 {
            let p = Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let lhs = sf.eval(crate::geom::rotate_about(p, c, FRAC_PI_2));
            let rhs = Mat2::rotation(FRAC_PI_2).mul_vec(sf.eval(p));
            assert!(
                (lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()),
                "equivariance violated at {p:?}"
            );
        }
    }

    #[test]
    fn transflection_equivariance_and_periodicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let params = random_params(3, 0.4, &mut rng);
        let line = Line::through(Vec2::new(0.5, 0.0), Vec2::new(0.0, 1.0));
        let sf = SymmetrizedField::new(
            params,
            vec![
                SymmetryOp::BasisConjugation(Mat2::from_cols(
                    Vec2::new(1.0, 0.0),
                    Vec2::new(0.0, 2.0),
                )),
                SymmetryOp::TransflectionSym { line, mu: 1.0 },
            ],
        )
        .unwrap();
        let refl = Mat2::reflection(Vec2::new(0.0, 1.0));
        for _ in 0..200 {
            let p = Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let lhs = sf.eval(crate::geom::transflect(p, &line, 1.0));
            let rhs = refl.mul_vec(sf.eval(p));
            assert!((lhs - rhs).norm() <= 1e-11 * (1.0 + rhs.norm()));
            // B-periodicity
            let v0 = sf.eval(p);
            let v1 = sf.eval(p + Vec2::new(1.0, 0.0));
            let v2 = sf.eval(p + Vec2::new(0.0, 2.0));
            assert!((v0 - v1).norm() <= 1e-11 * (1.0 + v0.norm()));
            assert!((v0 - v2).norm() <= 1e-11 * (1.0 + v0.norm()));
        }
    }

    #[test]
    fn incompatible_transflection_rejected() {
        let params = FourierParams::zeros(1, 1);
        // 2·mu·d = (0, 1.0) is not a lattice vector of diag(1, 2).
        let res = SymmetrizedField::new(
            params,
            vec![
                SymmetryOp::BasisConjugation(Mat2::from_cols(
                    Vec2::new(1.0, 0.0),
                    Vec2::new(0.0, 2.0),
                )),
                SymmetryOp::TransflectionSym {
                    line: Line::through(Vec2::new(0.5, 0.0), Vec2::new(0.0, 1.0)),
                    mu: 0.5,
                },
            ],
        );
        assert!(matches!(res, Err(FieldError::SymmetryIncompatible(_))));
    }

    #[test]
    fn linearity_in_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let pa = random_params(2, 0.5, &mut rng);
        let pb = random_params(2, 0.5, &mut rng);
        let mut psum = pa.clone();
        for (c, d) in psum.coeffs_mut().iter_mut().zip(pb.coeffs()) {
            *c += d;
        }
        let ops = vec![
            SymmetryOp::BasisConjugation(Mat2::IDENTITY),
            SymmetryOp::RotationSym {
                center: Vec2::new(0.25, 0.75),
                order: 2,
            },
        ];
        let fa = SymmetrizedField::new(pa, ops.clone()).unwrap();
        let fb = SymmetrizedField::new(pb, ops.clone()).unwrap();
        let fs = SymmetrizedField::new(psum, ops).unwrap();
        let p = Vec2::new(0.3, 0.8);
        assert!((fs.eval(p) - (fa.eval(p) + fb.eval(p))).norm() < 1e-12);
    }

    #[test]
    fn divergence_free_construction() {
        // f1 = sin(2πy), f2 = sin(2πx): no diagonal Jacobian entries.
        let mut p = FourierParams::zeros(1, 1);
        p.set(0, 1, 0, 1, 1.0);
        p.set(1, 2, 1, 0, 1.0);
        let sf =
            SymmetrizedField::new(p, vec![SymmetryOp::BasisConjugation(Mat2::IDENTITY)]).unwrap();
        for q in [Vec2::new(0.1, 0.2), Vec2::new(0.9, -0.4)] {
            assert!(sf.divergence(q).abs() < 1e-14);
        }
    }

    fn field_with_affine(rng: &mut impl Rng) -> SymmetrizedField {
        let params = random_params(2, 0.4, rng);
        SymmetrizedField::new(
            params,
            vec![
                SymmetryOp::BasisConjugation(Mat2::IDENTITY),
                SymmetryOp::RotationSym {
                    center: Vec2::new(0.5, 0.5),
                    order: 2,
                },
                SymmetryOp::AffineConjugation(AffineMap::new(
                    0.7,
                    1.3,
                    Vec2::new(0.2, -0.4),
                )),
            ],
        )
        .unwrap()
    }

    #[test]
    fn divergence_matches_fd_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let sf = field_with_affine(&mut rng);
        let h = 1e-5;
        for _ in 0..20 {
            let p = Vec2::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            let fd = (sf.eval(p + Vec2::new(h, 0.0)).x - sf.eval(p - Vec2::new(h, 0.0)).x
                + sf.eval(p + Vec2::new(0.0, h)).y
                - sf.eval(p - Vec2::new(0.0, h)).y)
                * (0.5 / h);
            let d = sf.divergence(p);
            assert!((d - fd).abs() <= 1e-5 * (1.0 + d.abs()), "{d} vs {fd}");
        }
    }

    #[test]
    fn divergence_gradient_matches_fd() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let sf = field_with_affine(&mut rng);
        let h = 1e-5;
        for _ in 0..10 {
            let p = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let g = sf.divergence_gradient(p);
            let gx = (sf.divergence(p + Vec2::new(h, 0.0)) - sf.divergence(p - Vec2::new(h, 0.0)))
                * (0.5 / h);
            let gy = (sf.divergence(p + Vec2::new(0.0, h)) - sf.divergence(p - Vec2::new(0.0, h)))
                * (0.5 / h);
            assert!((g.x - gx).abs() <= 1e-4 * (1.0 + g.norm()));
            assert!((g.y - gy).abs() <= 1e-4 * (1.0 + g.norm()));
        }
    }

    #[test]
    fn vjp_eval_matches_fd() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut sf = field_with_affine(&mut rng);
        let p = Vec2::new(0.37, -0.21);
        let w = Vec2::new(0.8, -1.1);
        let mut grad = sf.zero_grad();
        sf.accum_vjp_eval(p, w, &mut grad);
        let h = 1e-6;
        // Coefficient derivatives.
        for idx in (0..sf.params().len()).step_by(7) {
            let orig = sf.params().coeffs()[idx];
            sf.params_mut().coeffs_mut()[idx] = orig + h;
            let up = w.dot(sf.eval(p));
            sf.params_mut().coeffs_mut()[idx] = orig - h;
            let dn = w.dot(sf.eval(p));
            sf.params_mut().coeffs_mut()[idx] = orig;
            let fd = (up - dn) / (2.0 * h);
            assert!(
                (grad.theta[idx] - fd).abs() <= 1e-5 * (1.0 + fd.abs()),
                "idx {idx}: {} vs {}",
                grad.theta[idx],
                fd
            );
        }
        // Affine derivatives.
        let base = *sf.affine().unwrap();
        let eval_with = |sf: &SymmetrizedField, a: AffineMap| {
            let mut ops = sf.ops().to_vec();
            *ops.last_mut().unwrap() = SymmetryOp::AffineConjugation(a);
            let f = SymmetrizedField::new(sf.params().clone(), ops).unwrap();
            w.dot(f.eval(p))
        };
        let ga = grad.affine.unwrap();
        let fd_angle = (eval_with(&sf, AffineMap::new(base.angle + h, base.scale, base.translation))
            - eval_with(&sf, AffineMap::new(base.angle - h, base.scale, base.translation)))
            / (2.0 * h);
        assert!((ga.angle - fd_angle).abs() <= 1e-4 * (1.0 + fd_angle.abs()));
        let fd_scale = (eval_with(&sf, AffineMap::new(base.angle, base.scale + h, base.translation))
            - eval_with(&sf, AffineMap::new(base.angle, base.scale - h, base.translation)))
            / (2.0 * h);
        assert!((ga.scale - fd_scale).abs() <= 1e-4 * (1.0 + fd_scale.abs()));
        let fd_tx = (eval_with(
            &sf,
            AffineMap::new(base.angle, base.scale, base.translation + Vec2::new(h, 0.0)),
        ) - eval_with(
            &sf,
            AffineMap::new(base.angle, base.scale, base.translation - Vec2::new(h, 0.0)),
        )) / (2.0 * h);
        assert!((ga.tx - fd_tx).abs() <= 1e-4 * (1.0 + fd_tx.abs()));
        let fd_ty = (eval_with(
            &sf,
            AffineMap::new(base.angle, base.scale, base.translation + Vec2::new(0.0, h)),
        ) - eval_with(
            &sf,
            AffineMap::new(base.angle, base.scale, base.translation - Vec2::new(0.0, h)),
        )) / (2.0 * h);
        assert!((ga.ty - fd_ty).abs() <= 1e-4 * (1.0 + fd_ty.abs()));
    }

    #[test]
    fn vjp_divergence_matches_fd() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let mut sf = field_with_affine(&mut rng);
        let p = Vec2::new(-0.4, 0.6);
        let cot = 1.7;
        let mut grad = sf.zero_grad();
        sf.accum_vjp_divergence(p, cot, &mut grad);
        let h = 1e-6;
        for idx in (0..sf.params().len()).step_by(11) {
            let orig = sf.params().coeffs()[idx];
            sf.params_mut().coeffs_mut()[idx] = orig + h;
            let up = cot * sf.divergence(p);
            sf.params_mut().coeffs_mut()[idx] = orig - h;
            let dn = cot * sf.divergence(p);
            sf.params_mut().coeffs_mut()[idx] = orig;
            let fd = (up - dn) / (2.0 * h);
            assert!(
                (grad.theta[idx] - fd).abs() <= 1e-5 * (1.0 + fd.abs()),
                "idx {idx}"
            );
        }
    }

    #[test]
    fn vjp_zero_cotangent_zero_grad() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let sf = sample_field(&mut rng);
        let mut grad = sf.zero_grad();
        sf.accum_vjp_eval(Vec2::new(0.1, 0.2), Vec2::ZERO, &mut grad);
        sf.accum_vjp_divergence(Vec2::new(0.1, 0.2), 0.0, &mut grad);
        assert!(grad.theta.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn constant_terms_have_zero_divergence_gradient() {
        // Divergence is independent of the constant (i=j=0, l=0) coefficients.
        let mut sf = SymmetrizedField::new(
            FourierParams::zeros(2, 2),
            vec![SymmetryOp::BasisConjugation(Mat2::IDENTITY)],
        )
        .unwrap();
        sf.params_mut().set(0, 0, 0, 0, 0.9);
        sf.params_mut().set(1, 0, 0, 0, -0.3);
        let mut grad = sf.zero_grad();
        sf.accum_vjp_divergence(Vec2::new(0.3, 0.3), 1.0, &mut grad);
        let i0 = sf.params().index(0, 0, 0, 0);
        let i1 = sf.params().index(1, 0, 0, 0);
        assert_eq!(grad.theta[i0], 0.0);
        assert_eq!(grad.theta[i1], 0.0);
        assert!(sf.divergence(Vec2::new(0.1, 0.9)).abs() < 1e-14);
    }

    #[test]
    fn serialization_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let sf = field_with_affine(&mut rng);
        let text = serialize_field(&sf);
        let sf2 = deserialize_field(&text).unwrap();
        assert_eq!(sf.params().coeffs(), sf2.params().coeffs());
        assert_eq!(sf.ops().len(), sf2.ops().len());
        let p = Vec2::new(0.123, -0.456);
        assert!((sf.eval(p) - sf2.eval(p)).norm() < 1e-15);
    }

    #[test]
    fn rotation_sum_includes_identity_term() {
        // K-th term of the rotation sum is the identity rotation, so a
        // 2-fold symmetrization of an already symmetric field doubles it.
        let mut p = FourierParams::zeros(0, 0);
        p.set(0, 0, 0, 0, 1.0);
        let sf = SymmetrizedField::new(
            p,
            vec![SymmetryOp::RotationSym {
                center: Vec2::ZERO,
                order: 2,
            }],
        )
        .unwrap();
        // Constant field (1,0): sum of (1,0) rotated by π and 2π = (0,0) + ...
        // R^{-π}(1,0) = (-1,0), R^{-2π}(1,0) = (1,0): total (0,0).
        assert!(sf.eval(Vec2::new(0.4, 0.4)).norm() < 1e-15);
        assert_eq!(sf.branch_count(), 2);
    }

    #[test]
    fn period_example_quarter_rotation_on_lattice() {
        // Rotation symmetrized field over a square lattice stays periodic.
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let params = random_params(2, 0.3, &mut rng);
        let b = Mat2::from_cols(Vec2::new(2.0, 0.0), Vec2::new(0.0, 2.0));
        let sf = SymmetrizedField::new(
            params,
            vec![
                SymmetryOp::BasisConjugation(b),
                SymmetryOp::RotationSym {
                    center: Vec2::new(1.0, 1.0),
                    order: 4,
                },
            ],
        )
        .unwrap();
        for _ in 0..100 {
            let p = Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let v = sf.eval(p);
            for (m, n) in [(1i32, 0i32), (0, 1), (-2, 1), (2, 2)] {
                let q = p + b.col(0) * m as f64 + b.col(1) * n as f64;
                assert!((sf.eval(q) - v).norm() <= 1e-9 * (1.0 + v.norm()));
            }
        }
        let _ = PI;
    }
}
