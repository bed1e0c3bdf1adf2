//! The nine isohedral tiling classes: default template polygons, translation
//! bases, symmetry elements, symmetrized-field construction, tiling-group
//! enumeration, tile deformation, and a Monte-Carlo tiling-validity oracle.
//!
//! Template coordinates are fixed constants of this crate. Each class's
//! translation basis and symmetry elements are computed from the template
//! geometry, so scaled templates produce scaled data. Edge identifications
//! are not hard-coded: they are discovered at construction by searching the
//! tiling group for elements that map one template edge onto another, which
//! makes the geometry self-certifying (see `verify_tiling`).

use crate::field::{FieldError, FourierParams, SymmetryOp, SymmetrizedField};
use crate::flow::{self, FlowError, IntegratorConfig};
use crate::geom::{AffineMap, Isometry, Line, Mat2, Point2, Polygon, Vec2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_3, TAU};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IsohedralError {
    #[error("template polygon invalid: {0}")]
    Template(#[from] crate::geom::GeomError),
    #[error("field construction failed: {0}")]
    Field(#[from] FieldError),
    #[error("flow failed: {0}")]
    Flow(#[from] FlowError),
    #[error("tiling group closure did not terminate (>{0} elements)")]
    GroupClosure(usize),
    #[error("edge {0} of the template has no identification in the tiling group")]
    UnpairedEdge(usize),
}

/// The nine isohedral classes whose templates generate every isohedral tile
/// shape when adjacency relations are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IsohedralClass {
    Ih1,
    Ih2,
    Ih3,
    Ih4,
    Ih5,
    Ih6,
    Ih7,
    Ih21,
    Ih28,
}

impl IsohedralClass {
    pub const ALL: [IsohedralClass; 9] = [
        IsohedralClass::Ih1,
        IsohedralClass::Ih2,
        IsohedralClass::Ih3,
        IsohedralClass::Ih4,
        IsohedralClass::Ih5,
        IsohedralClass::Ih6,
        IsohedralClass::Ih7,
        IsohedralClass::Ih21,
        IsohedralClass::Ih28,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            IsohedralClass::Ih1 => "IH1",
            IsohedralClass::Ih2 => "IH2",
            IsohedralClass::Ih3 => "IH3",
            IsohedralClass::Ih4 => "IH4",
            IsohedralClass::Ih5 => "IH5",
            IsohedralClass::Ih6 => "IH6",
            IsohedralClass::Ih7 => "IH7",
            IsohedralClass::Ih21 => "IH21",
            IsohedralClass::Ih28 => "IH28",
        }
    }

    /// Wallpaper group of the class's tilings.
    pub fn symmetry_group(&self) -> &'static str {
        match self {
            IsohedralClass::Ih1 => "p1",
            IsohedralClass::Ih2 | IsohedralClass::Ih3 => "pg",
            IsohedralClass::Ih4 => "p2",
            IsohedralClass::Ih5 | IsohedralClass::Ih6 => "pgg",
            IsohedralClass::Ih7 => "p3",
            IsohedralClass::Ih21 => "p6",
            IsohedralClass::Ih28 => "p4",
        }
    }

    /// Number of point-group coset representatives (tiles per period cell).
    pub fn coset_count(&self) -> usize {
        match self {
            IsohedralClass::Ih1 => 1,
            IsohedralClass::Ih2 | IsohedralClass::Ih3 | IsohedralClass::Ih4 => 2,
            IsohedralClass::Ih5 | IsohedralClass::Ih6 => 4,
            IsohedralClass::Ih7 => 3,
            IsohedralClass::Ih21 => 6,
            IsohedralClass::Ih28 => 4,
        }
    }

    pub fn parse(s: &str) -> Option<IsohedralClass> {
        match s.to_ascii_uppercase().as_str() {
            "IH1" => Some(IsohedralClass::Ih1),
            "IH2" => Some(IsohedralClass::Ih2),
            "IH3" => Some(IsohedralClass::Ih3),
            "IH4" => Some(IsohedralClass::Ih4),
            "IH5" => Some(IsohedralClass::Ih5),
            "IH6" => Some(IsohedralClass::Ih6),
            "IH7" => Some(IsohedralClass::Ih7),
            "IH21" => Some(IsohedralClass::Ih21),
            "IH28" => Some(IsohedralClass::Ih28),
            _ => None,
        }
    }
}

/// An identification between two template edges (possibly the same edge,
/// self-paired through a 2-fold rotation about its midpoint). The isometry is
/// a tiling-group element mapping edge `a` onto edge `b` as point sets.
#[derive(Debug, Clone)]
pub struct EdgeIdentification {
    pub edge_a: usize,
    pub edge_b: usize,
    pub isometry: Isometry,
}

/// A template polygon for one class, with its derived edge identifications.
#[derive(Debug, Clone)]
pub struct TemplateTile {
    pub class: IsohedralClass,
    pub boundary: Polygon,
    pub identifications: Vec<EdgeIdentification>,
}

impl TemplateTile {
    pub fn edge_vector(&self, i: usize) -> Vec2 {
        let (a, b) = self.boundary.edge(i);
        b - a
    }

    pub fn edge_vectors(&self) -> Vec<Vec2> {
        (0..self.boundary.len())
            .map(|i| self.edge_vector(i))
            .collect()
    }
}

fn hexagon_corner_anchored() -> Vec<Point2> {
    // Regular unit-edge hexagon with v0 at the origin.
    let s3 = 3.0_f64.sqrt();
    vec![
        Vec2::new(0.0, 0.0),
        Vec2::new(1.0, 0.0),
        Vec2::new(1.5, s3 / 2.0),
        Vec2::new(1.0, s3),
        Vec2::new(0.0, s3),
        Vec2::new(-0.5, s3 / 2.0),
    ]
}

fn hexagon_centered() -> Vec<Point2> {
    // Regular unit-edge hexagon centered at the origin, vertex on the +x axis.
    (0..6)
        .map(|k| {
            let t = FRAC_PI_3 * k as f64;
            Vec2::new(t.cos(), t.sin())
        })
        .collect()
}

fn template_vertices(class: IsohedralClass) -> Vec<Point2> {
    match class {
        IsohedralClass::Ih1 | IsohedralClass::Ih7 => hexagon_corner_anchored(),
        IsohedralClass::Ih2 | IsohedralClass::Ih3 | IsohedralClass::Ih4 => hexagon_centered(),
        IsohedralClass::Ih5 => vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.5, 0.0),
            Vec2::new(-0.25, 0.5),
            Vec2::new(0.5, 1.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(-1.25, 0.5),
        ],
        IsohedralClass::Ih6 => vec![
            Vec2::new(-1.0 / 3.0, 0.0),
            Vec2::new(-1.0 / 6.0, 0.0),
            Vec2::new(1.0 / 6.0, 0.0),
            Vec2::new(1.0 / 3.0, 0.5),
            Vec2::new(1.0 / 6.0, 0.5),
            Vec2::new(-1.0 / 6.0, 0.5),
        ],
        IsohedralClass::Ih21 => {
            // Pentagon with a 6-fold corner at the origin, a 3-fold corner at
            // the triangle centroid, and a 2-fold midpoint on the far edge.
            let c3 = Vec2::new(0.5, 3.0_f64.sqrt() / 6.0);
            let v1 = Vec2::new(0.55, 0.02);
            let v3 = c3 + Mat2::rotation(-2.0 * FRAC_PI_3).mul_vec(v1 - c3);
            let v4 = Mat2::rotation(FRAC_PI_3).mul_vec(v1);
            vec![Vec2::ZERO, v1, c3, v3, v4]
        }
        IsohedralClass::Ih28 => {
            // Pentagon with 4-fold corners at the origin and at (1/2, 1/2).
            let c4 = Vec2::new(0.5, 0.5);
            let v1 = Vec2::new(0.45, -0.1);
            let v3 = c4 + Mat2::rotation(-std::f64::consts::FRAC_PI_2).mul_vec(v1 - c4);
            let v4 = Mat2::rotation(std::f64::consts::FRAC_PI_2).mul_vec(v1);
            vec![Vec2::ZERO, v1, c4, v3, v4]
        }
    }
}

/// The default template for a class. The concrete coordinates are committed
/// constants; `verify_tiling` certifies them.
pub fn default_template(class: IsohedralClass) -> Result<TemplateTile, IsohedralError> {
    template_from_vertices(class, template_vertices(class))
}

/// Uniformly scaled template (about the origin of the template frame).
pub fn scaled_template(class: IsohedralClass, factor: f64) -> Result<TemplateTile, IsohedralError> {
    let verts = template_vertices(class)
        .into_iter()
        .map(|v| v * factor)
        .collect();
    template_from_vertices(class, verts)
}

fn template_from_vertices(
    class: IsohedralClass,
    vertices: Vec<Point2>,
) -> Result<TemplateTile, IsohedralError> {
    let boundary = Polygon::new(vertices)?;
    let mut tile = TemplateTile {
        class,
        boundary,
        identifications: Vec::new(),
    };
    tile.identifications = derive_identifications(&tile)?;
    Ok(tile)
}

/// Translation basis per class, computed from the template geometry.
pub fn translation_basis(template: &TemplateTile) -> Mat2 {
    let e = template.edge_vectors();
    let v = template.boundary.vertices();
    match template.class {
        IsohedralClass::Ih1 => Mat2::from_cols(e[0] + e[1], e[1] + e[2]),
        IsohedralClass::Ih2 | IsohedralClass::Ih3 | IsohedralClass::Ih4 => {
            Mat2::from_cols(e[0] * 3.0, e[1] + e[2])
        }
        IsohedralClass::Ih5 => Mat2::from_cols(e[0] * 6.0, e[1] + e[2]),
        IsohedralClass::Ih6 => Mat2::from_cols(e[1] * 3.0, (e[2] + e[3]) * 2.0),
        IsohedralClass::Ih7 => Mat2::from_cols(e[0] * 3.0, e[1] * 3.0),
        IsohedralClass::Ih21 => {
            let b1 = v[3] + v[4];
            Mat2::from_cols(b1, Mat2::rotation(FRAC_PI_3).mul_vec(b1))
        }
        IsohedralClass::Ih28 => Mat2::from_cols(v[2] * 2.0, v[3] + v[4]),
    }
}

/// Rotation centers and transflection axes of a class, instantiated on the
/// template geometry, in innermost-first application order for the field
/// symmetrization.
pub fn symmetry_elements(template: &TemplateTile) -> Vec<SymmetryOp> {
    let e = template.edge_vectors();
    let v = template.boundary.vertices();
    match template.class {
        IsohedralClass::Ih1 => vec![],
        IsohedralClass::Ih2 => {
            let dir = (e[1] + e[2]).normalized();
            let mu = (e[1] + e[2]).norm() / 2.0;
            vec![
                SymmetryOp::TransflectionSym {
                    line: Line::through((e[0] * 5.0 + e[2]) * 0.5, dir),
                    mu,
                },
                SymmetryOp::TransflectionSym {
                    line: Line::through((e[0] + e[1]) * 0.5, dir),
                    mu,
                },
            ]
        }
        IsohedralClass::Ih3 => {
            let dir = e[0].normalized();
            let mu = 1.5 * e[0].norm();
            vec![
                SymmetryOp::TransflectionSym {
                    line: Line::through((e[1] + e[2]) * 0.75, dir),
                    mu,
                },
                SymmetryOp::TransflectionSym {
                    line: Line::through((e[0] + e[1]) * 0.5, dir),
                    mu,
                },
            ]
        }
        IsohedralClass::Ih4 => vec![
            SymmetryOp::RotationSym {
                center: (e[0] * 3.0 + e[1] * 2.0 - e[2]) * 0.5,
                order: 2,
            },
            SymmetryOp::RotationSym {
                center: (e[0] + e[1]) * 0.5,
                order: 2,
            },
            SymmetryOp::RotationSym {
                center: (e[0] + e[1] * 2.0 + e[2]) * 0.5,
                order: 2,
            },
            SymmetryOp::RotationSym {
                center: (e[0] + e[1]) * 1.5,
                order: 2,
            },
        ],
        IsohedralClass::Ih5 => {
            vec![
                SymmetryOp::TransflectionSym {
                    line: Line::through((e[1] - e[0]) * 0.5, (e[1] + e[2]).normalized()),
                    mu: (e[1] + e[2]).norm() / 2.0,
                },
                SymmetryOp::TransflectionSym {
                    line: Line::through(Vec2::new(e[1].x, e[1].y), e[0].normalized()),
                    mu: 3.0 * e[0].norm(),
                },
                SymmetryOp::RotationSym {
                    center: (e[0] * 11.0 + e[1] + e[2] * 2.0) * 0.5,
                    order: 2,
                },
                SymmetryOp::RotationSym {
                    center: (e[0] * 11.0 + e[2]) * 0.5,
                    order: 2,
                },
            ]
        }
        IsohedralClass::Ih6 => {
            let dvert = (e[2] + e[3]).normalized();
            vec![
                SymmetryOp::TransflectionSym {
                    line: Line::through(v[0], e[1].normalized()),
                    mu: 1.5 * e[1].norm(),
                },
                SymmetryOp::TransflectionSym {
                    line: Line::through((v[0] + v[3]) * 0.5, dvert),
                    mu: (v[3] - v[0]).dot(dvert),
                },
                SymmetryOp::RotationSym {
                    center: (v[5] + v[0]) * 0.5,
                    order: 2,
                },
                SymmetryOp::RotationSym {
                    center: (v[2] + v[3]) * 0.5,
                    order: 2,
                },
            ]
        }
        IsohedralClass::Ih7 => vec![SymmetryOp::RotationSym {
            center: v[0] + e[0] * 2.0 + e[1],
            order: 3,
        }],
        IsohedralClass::Ih21 => vec![
            SymmetryOp::RotationSym {
                center: v[0],
                order: 6,
            },
            SymmetryOp::RotationSym {
                center: v[2],
                order: 3,
            },
        ],
        IsohedralClass::Ih28 => vec![
            SymmetryOp::RotationSym {
                center: v[0],
                order: 4,
            },
            SymmetryOp::RotationSym {
                center: v[2],
                order: 4,
            },
        ],
    }
}

/// Builds the class's symmetrized field: basis conjugation, then the class
/// elements innermost-first, then the affine conjugation.
pub fn build_class_field(
    params: FourierParams,
    template: &TemplateTile,
    affine: AffineMap,
) -> Result<SymmetrizedField, IsohedralError> {
    let mut ops = vec![SymmetryOp::BasisConjugation(translation_basis(template))];
    ops.extend(symmetry_elements(template));
    ops.push(SymmetryOp::AffineConjugation(affine));
    Ok(SymmetrizedField::new(params, ops)?)
}

/// One tile placement: an isometry together with the point-group coset it
/// belongs to (used for coloring and bookkeeping).
#[derive(Debug, Clone)]
pub struct TilingGroupElement {
    pub isometry: Isometry,
    pub coset: usize,
}

const GROUP_TOL: f64 = 1e-9;

fn same_coset(a: &Isometry, b: &Isometry, basis_inv: Mat2) -> bool {
    let lin_close = (a.linear.a - b.linear.a).abs() <= GROUP_TOL
        && (a.linear.b - b.linear.b).abs() <= GROUP_TOL
        && (a.linear.c - b.linear.c).abs() <= GROUP_TOL
        && (a.linear.d - b.linear.d).abs() <= GROUP_TOL;
    if !lin_close {
        return false;
    }
    let d = basis_inv.mul_vec(a.translation - b.translation);
    (d.x - d.x.round()).abs() <= 1e-7 && (d.y - d.y.round()).abs() <= 1e-7
}

/// Point-group coset representatives of the tiling group, computed by closing
/// the generator set modulo lattice translations.
pub fn coset_representatives(template: &TemplateTile) -> Result<Vec<Isometry>, IsohedralError> {
    let basis = translation_basis(template);
    let basis_inv = basis.inverse().map_err(IsohedralError::Template)?;
    let mut gens: Vec<Isometry> = vec![];
    for op in symmetry_elements(template) {
        match op {
            SymmetryOp::RotationSym { center, order } => {
                for k in 1..order {
                    gens.push(Isometry::rotation_about(
                        center,
                        TAU * k as f64 / order as f64,
                    ));
                }
            }
            SymmetryOp::TransflectionSym { line, mu } => {
                gens.push(Isometry::transflection(&line, mu));
                gens.push(Isometry::transflection(&line, -mu));
            }
            _ => {}
        }
    }
    let mut reps: Vec<Isometry> = vec![Isometry::IDENTITY];
    let cap = 64;
    let mut frontier = vec![Isometry::IDENTITY];
    while let Some(g) = frontier.pop() {
        for gen in &gens {
            let h = gen.compose(&g);
            if !reps.iter().any(|r| same_coset(r, &h, basis_inv)) {
                if reps.len() >= cap {
                    return Err(IsohedralError::GroupClosure(cap));
                }
                reps.push(h);
                frontier.push(h);
            }
        }
    }
    Ok(reps)
}

/// Enumerates every placement whose transformed copy of `shape` has a
/// bounding box intersecting `window` (given as (lo, hi) corners).
pub fn enumerate_group(
    template: &TemplateTile,
    shape: &Polygon,
    window: (Point2, Point2),
) -> Result<Vec<TilingGroupElement>, IsohedralError> {
    let basis = translation_basis(template);
    let basis_inv = basis.inverse().map_err(IsohedralError::Template)?;
    let reps = coset_representatives(template)?;
    let (wlo, whi) = window;
    let pad = shape.diameter() + 1e-9;
    let corners = [
        Vec2::new(wlo.x - pad, wlo.y - pad),
        Vec2::new(whi.x + pad, wlo.y - pad),
        Vec2::new(wlo.x - pad, whi.y + pad),
        Vec2::new(whi.x + pad, whi.y + pad),
    ];
    let mut mlo = i64::MAX;
    let mut mhi = i64::MIN;
    let mut nlo = i64::MAX;
    let mut nhi = i64::MIN;
    for c in corners {
        let f = basis_inv.mul_vec(c);
        mlo = mlo.min(f.x.floor() as i64 - 1);
        mhi = mhi.max(f.x.ceil() as i64 + 1);
        nlo = nlo.min(f.y.floor() as i64 - 1);
        nhi = nhi.max(f.y.ceil() as i64 + 1);
    }
    let mut out = Vec::new();
    let verts = shape.vertices();
    for (ci, rep) in reps.iter().enumerate() {
        for m in mlo..=mhi {
            for n in nlo..=nhi {
                let t = basis.col(0) * m as f64 + basis.col(1) * n as f64;
                let iso = Isometry {
                    linear: rep.linear,
                    translation: rep.translation + t,
                };
                let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
                let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for &v in verts {
                    let p = iso.apply(v);
                    lo.x = lo.x.min(p.x);
                    lo.y = lo.y.min(p.y);
                    hi.x = hi.x.max(p.x);
                    hi.y = hi.y.max(p.y);
                }
                if hi.x >= wlo.x && lo.x <= whi.x && hi.y >= wlo.y && lo.y <= whi.y {
                    out.push(TilingGroupElement {
                        isometry: iso,
                        coset: ci,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Finds, for every ordered edge pair, the tiling-group elements mapping one
/// template edge onto another (endpoint sets matching within 1e-9). Every
/// edge must be covered, otherwise the template cannot tile edge-to-edge.
fn derive_identifications(
    template: &TemplateTile,
) -> Result<Vec<EdgeIdentification>, IsohedralError> {
    let basis = translation_basis(template);
    let reps = coset_representatives(template)?;
    let n = template.boundary.len();
    let mut out = Vec::new();
    let mut covered = vec![false; n];
    let tol = 1e-9;
    for (ci, rep) in reps.iter().enumerate() {
        for m in -2i64..=2 {
            for nn in -2i64..=2 {
                if ci == 0 && m == 0 && nn == 0 {
                    continue; // identity pairs nothing
                }
                let t = basis.col(0) * m as f64 + basis.col(1) * nn as f64;
                let iso = Isometry {
                    linear: rep.linear,
                    translation: rep.translation + t,
                };
                for i in 0..n {
                    let (a0, a1) = template.boundary.edge(i);
                    let (ia0, ia1) = (iso.apply(a0), iso.apply(a1));
                    for j in 0..n {
                        let (b0, b1) = template.boundary.edge(j);
                        let direct = (ia0 - b0).norm() <= tol && (ia1 - b1).norm() <= tol;
                        let flipped = (ia0 - b1).norm() <= tol && (ia1 - b0).norm() <= tol;
                        if direct || flipped {
                            covered[i] = true;
                            covered[j] = true;
                            out.push(EdgeIdentification {
                                edge_a: i,
                                edge_b: j,
                                isometry: iso,
                            });
                        }
                    }
                }
            }
        }
    }
    if let Some(i) = covered.iter().position(|&c| !c) {
        return Err(IsohedralError::UnpairedEdge(i));
    }
    Ok(out)
}

/// Forward-deforms the densely sampled template boundary through the flow.
pub fn deform_tile(
    template: &TemplateTile,
    field: &SymmetrizedField,
    cfg: &IntegratorConfig,
    samples_per_edge: usize,
) -> Result<Polygon, IsohedralError> {
    assert!(samples_per_edge >= 2, "need at least 2 samples per edge");
    let n = template.boundary.len();
    let mut pts = Vec::with_capacity(n * samples_per_edge);
    for i in 0..n {
        let (a, b) = template.boundary.edge(i);
        for k in 0..samples_per_edge {
            let t = k as f64 / samples_per_edge as f64;
            pts.push(a + (b - a) * t);
        }
    }
    let deformed: Result<Vec<Point2>, FlowError> = pts
        .par_iter()
        .map(|&p| flow::integrate_forward(field, p, cfg))
        .collect();
    Ok(Polygon::new(deformed?)?)
}

/// Tiling-validity report from Monte-Carlo sampling over one period cell.
#[derive(Debug, Clone, Copy)]
pub struct TilingReport {
    pub covered_fraction: f64,
    pub overlap_fraction: f64,
    pub area_ratio: f64,
    pub samples_used: usize,
}

impl TilingReport {
    pub fn pass(&self) -> bool {
        self.covered_fraction >= 0.999
            && self.overlap_fraction <= 0.001
            && (self.area_ratio - 1.0).abs() <= 0.01
    }
}

/// Checks that the group orbit of `shape` covers one period cell exactly
/// once. Points within a band of width 1e-3 of any placed boundary are
/// excluded from the coverage statistics.
pub fn verify_tiling(
    shape: &Polygon,
    template: &TemplateTile,
    n_points: usize,
    seed: u64,
) -> Result<TilingReport, IsohedralError> {
    let basis = translation_basis(template);
    let cell_area = basis.det().abs();
    let cosets = coset_representatives(template)?.len();
    let area_ratio = shape.area() * cosets as f64 / cell_area;

    let cell_corners = [
        Vec2::ZERO,
        basis.col(0),
        basis.col(1),
        basis.col(0) + basis.col(1),
    ];
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in cell_corners {
        lo.x = lo.x.min(c.x);
        lo.y = lo.y.min(c.y);
        hi.x = hi.x.max(c.x);
        hi.y = hi.y.max(c.y);
    }
    let placements = enumerate_group(template, shape, (lo, hi))?;
    let placed: Vec<(Polygon, Point2, Point2)> = placements
        .iter()
        .map(|g| {
            let verts: Vec<Point2> = shape
                .vertices()
                .iter()
                .map(|&v| g.isometry.apply(v))
                .collect();
            let poly = Polygon::new(verts).expect("isometry preserves simplicity");
            let (plo, phi) = poly.bbox();
            (poly, plo, phi)
        })
        .collect();

    let band = 1e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Point2> = (0..n_points)
        .map(|_| {
            let u = rng.gen_range(0.0..1.0);
            let v = rng.gen_range(0.0..1.0);
            basis.col(0) * u + basis.col(1) * v
        })
        .collect();

    let stats: Vec<(u32, bool)> = pts
        .par_iter()
        .map(|&p| {
            let mut count = 0u32;
            let mut near_boundary = false;
            for (poly, plo, phi) in &placed {
                if p.x < plo.x - band
                    || p.x > phi.x + band
                    || p.y < plo.y - band
                    || p.y > phi.y + band
                {
                    continue;
                }
                let d = poly.sdf(p);
                if d.abs() <= band {
                    near_boundary = true;
                    break;
                }
                if d > 0.0 {
                    count += 1;
                }
            }
            (count, near_boundary)
        })
        .collect();

    let mut used = 0usize;
    let mut covered = 0usize;
    let mut overlapped = 0usize;
    for (count, near) in stats {
        if near {
            continue;
        }
        used += 1;
        if count >= 1 {
            covered += 1;
        }
        if count >= 2 {
            overlapped += 1;
        }
    }
    let used_f = used.max(1) as f64;
    Ok(TilingReport {
        covered_fraction: covered as f64 / used_f,
        overlap_fraction: overlapped as f64 / used_f,
        area_ratio,
        samples_used: used,
    })
}

/// Emits an SVG drawing of the tiling: one path per tile copy over a grid of
/// period cells, colored by coset, with the base period cell outlined.
pub fn tiling_svg(
    shape: &Polygon,
    template: &TemplateTile,
    cells: usize,
) -> Result<String, IsohedralError> {
    let basis = translation_basis(template);
    let half = cells as f64 / 2.0;
    let corners = [
        basis.col(0) * -half + basis.col(1) * -half,
        basis.col(0) * half + basis.col(1) * -half,
        basis.col(0) * -half + basis.col(1) * half,
        basis.col(0) * half + basis.col(1) * half,
    ];
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in corners {
        lo.x = lo.x.min(c.x);
        lo.y = lo.y.min(c.y);
        hi.x = hi.x.max(c.x);
        hi.y = hi.y.max(c.y);
    }
    let placements = enumerate_group(template, shape, (lo, hi))?;
    let palette = [
        "#4878cf", "#d65f5f", "#6acc65", "#b47cc7", "#c4ad66", "#77bedb", "#e5a273", "#8c8c8c",
    ];
    let w = hi.x - lo.x;
    let h = hi.y - lo.y;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.4} {:.4} {:.4} {:.4}\">\n",
        lo.x, -hi.y, w, h
    ));
    let stroke = 0.004 * w.max(h);
    for g in &placements {
        let mut d = String::new();
        for (i, v) in shape.vertices().iter().enumerate() {
            let p = g.isometry.apply(*v);
            // SVG y-axis points down; flip.
            d.push_str(&format!(
                "{}{:.5} {:.5} ",
                if i == 0 { "M" } else { "L" },
                p.x,
                -p.y
            ));
        }
        d.push('Z');
        svg.push_str(&format!(
            "  <path d=\"{}\" fill=\"{}\" stroke=\"#222\" stroke-width=\"{:.5}\"/>\n",
            d,
            palette[g.coset % palette.len()],
            stroke
        ));
    }
    let cell = [
        Vec2::ZERO,
        basis.col(0),
        basis.col(0) + basis.col(1),
        basis.col(1),
    ];
    let mut d = String::new();
    for (i, p) in cell.iter().enumerate() {
        d.push_str(&format!(
            "{}{:.5} {:.5} ",
            if i == 0 { "M" } else { "L" },
            p.x,
            -p.y
        ));
    }
    d.push('Z');
    svg.push_str(&format!(
        "  <path d=\"{}\" fill=\"none\" stroke=\"#000\" stroke-width=\"{:.5}\"/>\n",
        d,
        stroke * 2.0
    ));
    svg.push_str("</svg>\n");
    Ok(svg)
}
