//! Narrow-phase contact generation for discs, oriented boxes and the
//! workspace walls. Every manifold point carries the normal pointing from
//! the first shape toward the second and a signed separation (negative
//! when the shapes overlap).

use nalgebra::Rotation2;

use crate::types::{Shape, Vec2, Workspace};

/// A shape placed in the world.
#[derive(Debug, Clone, Copy)]
pub struct Geom {
    pub center: Vec2,
    pub angle: f64,
    pub shape: Shape,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldPoint {
    pub point: Vec2,
    pub normal: Vec2,
    pub separation: f64,
}

impl Geom {
    pub fn bounding_radius(&self) -> f64 {
        self.shape.bounding_radius()
    }

    fn corners(&self, hx: f64, hy: f64) -> [Vec2; 4] {
        let rot = Rotation2::new(self.angle);
        [
            self.center + rot * Vec2::new(-hx, -hy),
            self.center + rot * Vec2::new(hx, -hy),
            self.center + rot * Vec2::new(hx, hy),
            self.center + rot * Vec2::new(-hx, hy),
        ]
    }
}

/// Appends contact points between `a` and `b` whose separation is below `margin`.
pub fn collide(a: &Geom, b: &Geom, margin: f64, out: &mut Vec<ManifoldPoint>) {
    let reach = a.bounding_radius() + b.bounding_radius() + margin;
    if (b.center - a.center).norm_squared() > reach * reach {
        return;
    }
    match (a.shape, b.shape) {
        (Shape::Disc { radius: ra }, Shape::Disc { radius: rb }) => {
            disc_disc(a.center, ra, b.center, rb, margin, out)
        }
        (Shape::Disc { radius }, Shape::Box { width, length }) => {
            if let Some(mut m) = box_disc(b, 0.5 * width, 0.5 * length, a.center, radius, margin) {
                m.normal = -m.normal;
                out.push(m);
            }
        }
        (Shape::Box { width, length }, Shape::Disc { radius }) => {
            if let Some(m) = box_disc(a, 0.5 * width, 0.5 * length, b.center, radius, margin) {
                out.push(m);
            }
        }
        (
            Shape::Box {
                width: wa,
                length: la,
            },
            Shape::Box {
                width: wb,
                length: lb,
            },
        ) => box_box(
            &a.corners(0.5 * wa, 0.5 * la),
            &b.corners(0.5 * wb, 0.5 * lb),
            margin,
            out,
        ),
    }
}

fn disc_disc(ca: Vec2, ra: f64, cb: Vec2, rb: f64, margin: f64, out: &mut Vec<ManifoldPoint>) {
    let d = cb - ca;
    let dist = d.norm();
    let separation = dist - ra - rb;
    if separation >= margin {
        return;
    }
    let normal = if dist > 1e-12 {
        d / dist
    } else {
        Vec2::new(1.0, 0.0)
    };
    out.push(ManifoldPoint {
        point: ca + normal * (ra + 0.5 * separation),
        normal,
        separation,
    });
}

/// Box (half extents `hx`, `hy`) against a disc; normal points box → disc.
fn box_disc(
    bx: &Geom,
    hx: f64,
    hy: f64,
    center: Vec2,
    radius: f64,
    margin: f64,
) -> Option<ManifoldPoint> {
    let rot = Rotation2::new(bx.angle);
    let local = rot.inverse() * (center - bx.center);
    let inside = local.x.abs() <= hx && local.y.abs() <= hy;
    let (normal_local, surface_local, separation) = if inside {
        let dx = hx - local.x.abs();
        let dy = hy - local.y.abs();
        if dx <= dy {
            let s = if local.x >= 0.0 { 1.0 } else { -1.0 };
            (Vec2::new(s, 0.0), Vec2::new(s * hx, local.y), -dx - radius)
        } else {
            let s = if local.y >= 0.0 { 1.0 } else { -1.0 };
            (Vec2::new(0.0, s), Vec2::new(local.x, s * hy), -dy - radius)
        }
    } else {
        let clamped = Vec2::new(local.x.clamp(-hx, hx), local.y.clamp(-hy, hy));
        let d = local - clamped;
        let dist = d.norm();
        (d / dist, clamped, dist - radius)
    };
    if separation >= margin {
        return None;
    }
    let normal = rot * normal_local;
    let surface = bx.center + rot * surface_local;
    Some(ManifoldPoint {
        point: surface + normal * (0.5 * separation),
        normal,
        separation,
    })
}

fn edge_normal(poly: &[Vec2; 4], i: usize) -> Vec2 {
    let e = poly[(i + 1) % 4] - poly[i];
    Vec2::new(e.y, -e.x).normalize()
}

/// Largest separation of `b` along the outward face normals of `a`.
fn max_separation(a: &[Vec2; 4], b: &[Vec2; 4]) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, 0);
    for i in 0..4 {
        let n = edge_normal(a, i);
        let s = b
            .iter()
            .map(|w| n.dot(&(w - a[i])))
            .fold(f64::INFINITY, f64::min);
        if s > best.0 {
            best = (s, i);
        }
    }
    best
}

/// Clips the incident edge of one box against the reference face of the other.
fn box_box(a: &[Vec2; 4], b: &[Vec2; 4], margin: f64, out: &mut Vec<ManifoldPoint>) {
    let (sep_a, edge_a) = max_separation(a, b);
    if sep_a >= margin {
        return;
    }
    let (sep_b, edge_b) = max_separation(b, a);
    if sep_b >= margin {
        return;
    }
    let (reference, incident, edge, flip) = if sep_b > sep_a + 1e-9 {
        (b, a, edge_b, true)
    } else {
        (a, b, edge_a, false)
    };
    let n_ref = edge_normal(reference, edge);

    let mut inc_edge = 0;
    let mut min_dot = f64::INFINITY;
    for i in 0..4 {
        let d = n_ref.dot(&edge_normal(incident, i));
        if d < min_dot {
            min_dot = d;
            inc_edge = i;
        }
    }
    let mut seg = [incident[inc_edge], incident[(inc_edge + 1) % 4]];

    let v1 = reference[edge];
    let v2 = reference[(edge + 1) % 4];
    let tangent = (v2 - v1).normalize();
    // keep t·p >= t·v1 and t·p <= t·v2
    if !clip(&mut seg, -tangent, -tangent.dot(&v1)) || !clip(&mut seg, tangent, tangent.dot(&v2)) {
        return;
    }
    let normal = if flip { -n_ref } else { n_ref };
    // The sequential solver is order dependent, so emit the points in an
    // order that does not depend on corner numbering: nearest to the
    // incident box's center first.
    let center = incident.iter().fold(Vec2::zeros(), |acc, c| acc + c) * 0.25;
    if (seg[1] - center).norm_squared() < (seg[0] - center).norm_squared() {
        seg.swap(0, 1);
    }
    for p in seg {
        let separation = n_ref.dot(&(p - v1));
        if separation < margin {
            out.push(ManifoldPoint {
                point: p - n_ref * (0.5 * separation),
                normal,
                separation,
            });
        }
    }
}

/// Clips a segment to the half-plane `n·p <= offset`. Returns false when
/// the whole segment lies outside.
fn clip(seg: &mut [Vec2; 2], n: Vec2, offset: f64) -> bool {
    let d0 = n.dot(&seg[0]) - offset;
    let d1 = n.dot(&seg[1]) - offset;
    if d0 > 0.0 && d1 > 0.0 {
        return false;
    }
    if d0 > 0.0 {
        seg[0] = seg[0] + (seg[1] - seg[0]) * (d0 / (d0 - d1));
    } else if d1 > 0.0 {
        seg[1] = seg[1] + (seg[0] - seg[1]) * (d1 / (d1 - d0));
    }
    true
}

/// Contacts between a shape and the four workspace walls. The normal
/// points from the wall into the workspace.
pub fn collide_walls(g: &Geom, ws: &Workspace, margin: f64, out: &mut Vec<ManifoldPoint>) {
    let r = g.bounding_radius();
    let c = g.center;
    if c.x - r >= margin
        && c.y - r >= margin
        && ws.width - c.x - r >= margin
        && ws.height - c.y - r >= margin
    {
        return;
    }
    let walls = [
        (Vec2::new(1.0, 0.0), 0.0),
        (Vec2::new(-1.0, 0.0), -ws.width),
        (Vec2::new(0.0, 1.0), 0.0),
        (Vec2::new(0.0, -1.0), -ws.height),
    ];
    match g.shape {
        Shape::Disc { radius } => {
            for (n, offset) in walls {
                let separation = n.dot(&c) - offset - radius;
                if separation < margin {
                    let surface = c - n * radius;
                    out.push(ManifoldPoint {
                        point: surface - n * (0.5 * separation),
                        normal: n,
                        separation,
                    });
                }
            }
        }
        Shape::Box { width, length } => {
            let corners = g.corners(0.5 * width, 0.5 * length);
            for (n, offset) in walls {
                for p in corners {
                    let separation = n.dot(&p) - offset;
                    if separation < margin {
                        out.push(ManifoldPoint {
                            point: p - n * (0.5 * separation),
                            normal: n,
                            separation,
                        });
                    }
                }
            }
        }
    }
}

/// Deepest overlap between two shapes, 0 when they do not touch.
pub fn penetration_depth(a: &Geom, b: &Geom) -> f64 {
    let mut pts = Vec::new();
    collide(a, b, 0.0, &mut pts);
    pts.iter().map(|p| -p.separation).fold(0.0, f64::max)
}

pub fn wall_penetration_depth(g: &Geom, ws: &Workspace) -> f64 {
    let mut pts = Vec::new();
    collide_walls(g, ws, 0.0, &mut pts);
    pts.iter().map(|p| -p.separation).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(x: f64, y: f64, r: f64) -> Geom {
        Geom {
            center: Vec2::new(x, y),
            angle: 0.0,
            shape: Shape::Disc { radius: r },
        }
    }

    fn boxed(x: f64, y: f64, angle: f64, w: f64, l: f64) -> Geom {
        Geom {
            center: Vec2::new(x, y),
            angle,
            shape: Shape::Box {
                width: w,
                length: l,
            },
        }
    }

    #[test]
    fn overlapping_discs() {
        let mut out = Vec::new();
        collide(&disc(0.0, 0.0, 0.1), &disc(0.15, 0.0, 0.1), 0.0, &mut out);
        assert_eq!(out.len(), 1);
        assert!((out[0].separation + 0.05).abs() < 1e-12);
        assert_eq!(out[0].normal, Vec2::new(1.0, 0.0));
    }

    #[test]
    fn disc_against_box_face_and_corner() {
        let mut out = Vec::new();
        collide(
            &disc(0.0, 0.0, 0.1),
            &boxed(0.18, 0.0, 0.0, 0.2, 0.2),
            0.0,
            &mut out,
        );
        assert_eq!(out.len(), 1);
        assert!((out[0].separation + 0.02).abs() < 1e-12);
        assert!((out[0].normal - Vec2::new(1.0, 0.0)).norm() < 1e-12);

        out.clear();
        let b = boxed(0.0, 0.0, 0.0, 0.2, 0.2);
        collide(&b, &disc(0.2, 0.2, 0.15), 0.0, &mut out);
        let expected = (0.1f64 * 0.1 * 2.0).sqrt() - 0.15;
        assert!((out[0].separation - expected).abs() < 1e-12);
    }

    #[test]
    fn disc_center_inside_box() {
        let mut out = Vec::new();
        collide(
            &boxed(0.0, 0.0, 0.0, 0.4, 0.2),
            &disc(0.0, 0.05, 0.02),
            0.0,
            &mut out,
        );
        assert_eq!(out.len(), 1);
        assert!((out[0].normal - Vec2::new(0.0, 1.0)).norm() < 1e-12);
        assert!((out[0].separation + 0.07).abs() < 1e-12);
    }

    #[test]
    fn stacked_boxes_give_two_points() {
        let mut out = Vec::new();
        let a = boxed(0.0, 0.0, 0.0, 0.2, 0.2);
        let b = boxed(0.05, 0.19, 0.0, 0.2, 0.2);
        collide(&a, &b, 0.0, &mut out);
        assert_eq!(out.len(), 2);
        for p in &out {
            assert!((p.separation + 0.01).abs() < 1e-12);
            assert!((p.normal - Vec2::new(0.0, 1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn separated_boxes_report_nothing_without_margin() {
        let mut out = Vec::new();
        let a = boxed(0.0, 0.0, 0.3, 0.1, 0.1);
        let b = boxed(0.5, 0.0, -0.2, 0.1, 0.1);
        collide(&a, &b, 0.0, &mut out);
        assert!(out.is_empty());
    }

    #[test]
    fn rotated_box_corner_into_wall() {
        let ws = Workspace::new(1.0, 1.0);
        let g = boxed(0.05, 0.5, std::f64::consts::FRAC_PI_4, 0.1, 0.1);
        assert!((wall_penetration_depth(&g, &ws) - (0.05 * 2f64.sqrt() - 0.05)).abs() < 1e-12);
    }
}
