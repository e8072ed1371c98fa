//! Finite planar lattices, cones with a common apex, good conical partitions
//! and the coordinate projectors they induce on the one-particle space.
//!
//! The one-particle space `K` has one basis vector per (site, Majorana index),
//! site-major: index `site * majorana_count + m`.

use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sites closer than this to a cone boundary ray are rejected.
pub const EPS_GENERIC: f64 = 1e-6;

pub const DEFAULT_APEX_OFFSET: [f64; 2] = [0.2371, 0.1129];

/// Three equal sectors; the boundary rays point up, lower-left and lower-right.
pub const DEFAULT_BOUNDARY_ANGLES: [f64; 3] = [PI / 2.0, 7.0 * PI / 6.0, 11.0 * PI / 6.0];

pub const DEFAULT_GAP_HALFWIDTH: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SitePoint {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    Square,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeGeometry {
    sites: Vec<SitePoint>,
    majorana_count: usize,
    apex: [f64; 2],
}

impl LatticeGeometry {
    /// Geometry from an explicit site list. Ids are reassigned contiguously
    /// in list order.
    pub fn from_sites(points: &[[f64; 2]], majorana_count: usize, apex: [f64; 2]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyLattice);
        }
        if majorana_count == 0 || majorana_count % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "majorana_count must be positive and even, got {majorana_count}"
            )));
        }
        if points.iter().flatten().chain(apex.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coordinate".into()));
        }
        let sites = points
            .iter()
            .enumerate()
            .map(|(id, p)| SitePoint { id, x: p[0], y: p[1] })
            .collect();
        Ok(Self { sites, majorana_count, apex })
    }

    pub fn sites(&self) -> &[SitePoint] {
        &self.sites
    }

    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    pub fn majorana_count(&self) -> usize {
        self.majorana_count
    }

    pub fn apex(&self) -> [f64; 2] {
        self.apex
    }

    /// Dimension of the one-particle space.
    pub fn dim_k(&self) -> usize {
        self.sites.len() * self.majorana_count
    }

    /// Same sites and apex, different number of Majorana modes per site.
    pub fn with_majorana_count(&self, majorana_count: usize) -> Result<Self> {
        let points: Vec<[f64; 2]> = self.sites.iter().map(|s| [s.x, s.y]).collect();
        Self::from_sites(&points, majorana_count, self.apex)
    }

    /// True when both geometries have the same sites (in order) and apex.
    pub fn same_sites(&self, other: &Self) -> bool {
        self.apex == other.apex && self.sites == other.sites
    }

    /// Map from integer lattice coordinates to site id.
    pub fn site_lookup(&self) -> std::collections::HashMap<(i64, i64), usize> {
        self.sites
            .iter()
            .map(|s| ((s.x.round() as i64, s.y.round() as i64), s.id))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("geometry serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let g: Self = serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let points: Vec<[f64; 2]> = g.sites.iter().map(|s| [s.x, s.y]).collect();
        if g.sites.iter().enumerate().any(|(i, s)| s.id != i) {
            return Err(Error::InvalidArgument("site ids must be contiguous from 0".into()));
        }
        Self::from_sites(&points, g.majorana_count, g.apex)
    }
}

/// All square-lattice points within `radius` of `apex_offset`; the apex is
/// the offset itself, measured from the lattice point at the origin.
pub fn build_disk_lattice(
    kind: LatticeKind,
    radius: f64,
    apex_offset: [f64; 2],
    majorana_count: usize,
) -> Result<LatticeGeometry> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    let LatticeKind::Square = kind;
    let [ax, ay] = apex_offset;
    let reach = radius.ceil() as i64 + 1;
    let (cx, cy) = (ax.round() as i64, ay.round() as i64);
    let mut points = Vec::new();
    for y in (cy - reach)..=(cy + reach) {
        for x in (cx - reach)..=(cx + reach) {
            let (dx, dy) = (x as f64 - ax, y as f64 - ay);
            if dx * dx + dy * dy <= radius * radius {
                points.push([x as f64, y as f64]);
            }
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyLattice);
    }
    LatticeGeometry::from_sites(&points, majorana_count, apex_offset)
}

/// Open angular sector `(angle_lo, angle_hi)` swept counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    pub apex: [f64; 2],
    pub angle_lo: f64,
    pub angle_hi: f64,
}

impl Cone {
    pub fn new(apex: [f64; 2], angle_lo: f64, angle_hi: f64) -> Result<Self> {
        let cone = Self { apex, angle_lo: angle_lo.rem_euclid(TAU), angle_hi: angle_hi.rem_euclid(TAU) };
        let w = cone.width();
        if !(w > 0.0 && w < TAU) {
            return Err(Error::DegeneratePartition(format!("cone of width {w}")));
        }
        Ok(cone)
    }

    pub fn width(&self) -> f64 {
        (self.angle_hi - self.angle_lo).rem_euclid(TAU)
    }

    /// Distance from `p` to the nearer of the two boundary rays.
    pub fn boundary_distance(&self, p: [f64; 2]) -> f64 {
        ray_distance(self.apex, self.angle_lo, p).min(ray_distance(self.apex, self.angle_hi, p))
    }

    fn contains_direction(&self, p: [f64; 2]) -> bool {
        let phi = (p[1] - self.apex[1]).atan2(p[0] - self.apex[0]);
        let rel = (phi - self.angle_lo).rem_euclid(TAU);
        rel > 0.0 && rel < self.width()
    }
}

fn ray_distance(apex: [f64; 2], angle: f64, p: [f64; 2]) -> f64 {
    let (dx, dy) = (p[0] - apex[0], p[1] - apex[1]);
    let (c, s) = (angle.cos(), angle.sin());
    let along = dx * c + dy * s;
    if along <= 0.0 {
        dx.hypot(dy)
    } else {
        (dx * s - dy * c).abs()
    }
}

/// Whether the site's direction from the apex lies inside the open cone.
pub fn cone_membership(cone: &Cone, site: &SitePoint) -> Result<bool> {
    let p = [site.x, site.y];
    let distance = cone.boundary_distance(p);
    if distance < EPS_GENERIC {
        return Err(Error::NonGenericSite { site: site.id, distance });
    }
    Ok(cone.contains_direction(p))
}

/// Cones `A_0, A_1, A_2` in counterclockwise order, plus the gap cones
/// `B_01, B_12, B_20` around the separating rays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConicalPartition {
    pub apex: [f64; 2],
    pub boundary_angles: [f64; 3],
    pub cones_a: [Cone; 3],
    pub cones_b: [Cone; 3],
}

/// `boundary_angles[a]` is the ray where `A_{a-1}` ends and `A_a` begins, so
/// `A_a` spans `(boundary_angles[a], boundary_angles[a+1])`. `B_{a(a+1)}`
/// is centred on `boundary_angles[a+1]`.
pub fn make_good_partition(
    apex: [f64; 2],
    boundary_angles: [f64; 3],
    gap_halfwidth: f64,
) -> Result<ConicalPartition> {
    let [b0, b1, b2] = boundary_angles;
    if boundary_angles.iter().any(|a| !a.is_finite()) || !gap_halfwidth.is_finite() {
        return Err(Error::DegeneratePartition("non-finite angle".into()));
    }
    if !(b0 < b1 && b1 < b2 && b2 - b0 < TAU) {
        return Err(Error::DegeneratePartition(format!(
            "boundary angles {boundary_angles:?} are not strictly increasing within one turn"
        )));
    }
    let widths = [b1 - b0, b2 - b1, b0 + TAU - b2];
    let narrowest = widths.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(gap_halfwidth > 0.0 && 2.0 * gap_halfwidth < narrowest) {
        return Err(Error::DegeneratePartition(format!(
            "gap half-width {gap_halfwidth} makes B-cones overlap (narrowest sector {narrowest})"
        )));
    }
    let ends = [b1, b2, b0 + TAU];
    let mut cones_a = Vec::with_capacity(3);
    let mut cones_b = Vec::with_capacity(3);
    for a in 0..3 {
        cones_a.push(Cone::new(apex, boundary_angles[a], ends[a])?);
        cones_b.push(Cone::new(apex, ends[a] - gap_halfwidth, ends[a] + gap_halfwidth)?);
    }
    Ok(ConicalPartition {
        apex,
        boundary_angles,
        cones_a: [cones_a[0], cones_a[1], cones_a[2]],
        cones_b: [cones_b[0], cones_b[1], cones_b[2]],
    })
}

impl ConicalPartition {
    /// Same partition with every boundary ray rotated by `delta`.
    pub fn rotated(&self, delta: f64, gap_halfwidth: f64) -> Result<Self> {
        let b = self.boundary_angles;
        make_good_partition(self.apex, [b[0] + delta, b[1] + delta, b[2] + delta], gap_halfwidth)
    }

    /// Site masks of `A_0, A_1, A_2`. Fails if any site is non-generic.
    pub fn site_masks(&self, geometry: &LatticeGeometry) -> Result<[Vec<bool>; 3]> {
        if self.apex != geometry.apex() {
            return Err(Error::GeometryMismatch(format!(
                "partition apex {:?} differs from geometry apex {:?}",
                self.apex,
                geometry.apex()
            )));
        }
        let mut masks = [Vec::new(), Vec::new(), Vec::new()];
        for site in geometry.sites() {
            for (a, cone) in self.cones_a.iter().enumerate() {
                masks[a].push(cone_membership(cone, site)?);
            }
        }
        Ok(masks)
    }
}

/// A set of sites.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Cone(Cone),
    Sites(BTreeSet<usize>),
    /// Closed disk; used for trace windows, no genericity requirement.
    Disk { center: [f64; 2], radius: f64 },
}

impl Region {
    pub fn site_mask(&self, geometry: &LatticeGeometry) -> Result<Vec<bool>> {
        match self {
            Region::Cone(cone) => geometry.sites().iter().map(|s| cone_membership(cone, s)).collect(),
            Region::Sites(ids) => {
                if let Some(&bad) = ids.iter().find(|&&i| i >= geometry.site_count()) {
                    return Err(Error::InvalidArgument(format!("site id {bad} out of range")));
                }
                Ok((0..geometry.site_count()).map(|i| ids.contains(&i)).collect())
            }
            Region::Disk { center, radius } => Ok(geometry
                .sites()
                .iter()
                .map(|s| (s.x - center[0]).hypot(s.y - center[1]) <= *radius)
                .collect()),
        }
    }
}

/// Expand a per-site mask to the basis of `K ⊗ C^copies`, `per_site`
/// indices per site.
pub fn expand_mask(site_mask: &[bool], per_site: usize) -> Vec<bool> {
    site_mask.iter().flat_map(|&b| std::iter::repeat(b).take(per_site)).collect()
}

/// Diagonal 0/1 projector `Π_X` on `K`, stored as its diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionProjector {
    diagonal: Vec<bool>,
}

impl RegionProjector {
    pub fn diagonal(&self) -> &[bool] {
        &self.diagonal
    }

    pub fn rank(&self) -> usize {
        self.diagonal.iter().filter(|&&b| b).count()
    }

    pub fn to_matrix(&self) -> crate::linalg::CMat {
        crate::linalg::diagonal(&self.diagonal)
    }
}

pub fn site_projector(region: &Region, geometry: &LatticeGeometry) -> Result<RegionProjector> {
    let mask = region.site_mask(geometry)?;
    Ok(RegionProjector { diagonal: expand_mask(&mask, geometry.majorana_count()) })
}

#[cfg(test)]
mod tests {
    use super::*;

    const OFF: [f64; 2] = DEFAULT_APEX_OFFSET;

    fn brute_force_count(radius: f64, off: [f64; 2]) -> usize {
        let r = radius.ceil() as i64 + 3;
        let mut n = 0;
        for x in -r..=r {
            for y in -r..=r {
                if ((x as f64 - off[0]).powi(2) + (y as f64 - off[1]).powi(2)).sqrt() <= radius {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn disk_counts_match_enumeration() {
        for radius in [1.5, 4.0, 7.3, 12.0, 16.0] {
            let g = build_disk_lattice(LatticeKind::Square, radius, OFF, 2).unwrap();
            assert_eq!(g.site_count(), brute_force_count(radius, OFF), "radius {radius}");
        }
        // (0,0), (±1,0), (0,±1), (1,1), (1,-1); (-1,1) sits at 1.52
        let g = build_disk_lattice(LatticeKind::Square, 1.5, OFF, 2).unwrap();
        assert_eq!(g.site_count(), 7);
    }

    #[test]
    fn disk_count_within_area_bounds() {
        for radius in [4.0, 8.0, 10.0, 16.0, 20.5] {
            let n = build_disk_lattice(LatticeKind::Square, radius, OFF, 2).unwrap().site_count() as f64;
            assert!(n >= PI * (radius - 1.0).powi(2) && n <= PI * (radius + 1.0).powi(2));
        }
    }

    #[test]
    fn tiny_radius_is_empty() {
        assert_eq!(build_disk_lattice(LatticeKind::Square, 0.1, OFF, 2), Err(Error::EmptyLattice));
    }

    #[test]
    fn default_partition_is_valid_and_covers_sites() {
        let g = build_disk_lattice(LatticeKind::Square, 10.0, OFF, 4).unwrap();
        let p = make_good_partition(OFF, DEFAULT_BOUNDARY_ANGLES, DEFAULT_GAP_HALFWIDTH).unwrap();
        let masks = p.site_masks(&g).unwrap();
        for i in 0..g.site_count() {
            assert_eq!(masks.iter().filter(|m| m[i]).count(), 1);
        }
        // B_01 straddles the ray between A_0 and A_1.
        assert!((p.cones_b[0].angle_lo + DEFAULT_GAP_HALFWIDTH - p.cones_a[1].angle_lo).abs() < 1e-12);
        let total: usize = masks.iter().map(|m| m.iter().filter(|&&b| b).count()).sum();
        assert_eq!(total, g.site_count());
    }

    #[test]
    fn degenerate_partitions() {
        assert!(matches!(make_good_partition(OFF, [0.0, 0.0, PI], 0.1), Err(Error::DegeneratePartition(_))));
        assert!(matches!(make_good_partition(OFF, [0.0, 0.2, PI], 0.15), Err(Error::DegeneratePartition(_))));
        assert!(matches!(make_good_partition(OFF, [0.0, 2.0, 7.0], 0.1), Err(Error::DegeneratePartition(_))));
    }

    #[test]
    fn membership_examples() {
        let apex = [0.0, 0.0];
        let cone = Cone::new(apex, 0.0, PI).unwrap();
        let site = |x, y| SitePoint { id: 0, x, y };
        assert_eq!(cone_membership(&cone, &site(1.0, 0.5)), Ok(true));
        assert_eq!(cone_membership(&cone, &site(1.0, -0.5)), Ok(false));
        assert!(matches!(cone_membership(&cone, &site(1.0, 1e-9)), Err(Error::NonGenericSite { .. })));
        // behind the apex a boundary ray is far away
        let quarter = Cone::new(apex, 0.0, PI / 2.0).unwrap();
        assert_eq!(cone_membership(&quarter, &site(-1.0, -1e-9)), Ok(false));
    }

    #[test]
    fn projectors_partition_identity() {
        let g = build_disk_lattice(LatticeKind::Square, 6.0, OFF, 4).unwrap();
        let p = make_good_partition(OFF, DEFAULT_BOUNDARY_ANGLES, DEFAULT_GAP_HALFWIDTH).unwrap();
        let projs: Vec<_> =
            p.cones_a.iter().map(|c| site_projector(&Region::Cone(*c), &g).unwrap()).collect();
        for i in 0..g.dim_k() {
            assert_eq!(projs.iter().filter(|q| q.diagonal()[i]).count(), 1);
        }
        let all = site_projector(&Region::Sites((0..g.site_count()).collect()), &g).unwrap();
        assert_eq!(all.rank(), g.dim_k());
        let none = site_projector(&Region::Sites(BTreeSet::new()), &g).unwrap();
        assert_eq!(none.rank(), 0);
    }

    #[test]
    fn integer_apex_shift_preserves_memberships() {
        let g1 = build_disk_lattice(LatticeKind::Square, 7.0, OFF, 2).unwrap();
        let shifted = [OFF[0] + 3.0, OFF[1] - 2.0];
        let g2 = build_disk_lattice(LatticeKind::Square, 7.0, shifted, 2).unwrap();
        assert_eq!(g1.site_count(), g2.site_count());
        let p1 = make_good_partition(OFF, DEFAULT_BOUNDARY_ANGLES, 0.1).unwrap();
        let p2 = make_good_partition(shifted, DEFAULT_BOUNDARY_ANGLES, 0.1).unwrap();
        let m1 = p1.site_masks(&g1).unwrap();
        let m2 = p2.site_masks(&g2).unwrap();
        let key = |g: &LatticeGeometry, m: &[Vec<bool>; 3], dx: f64, dy: f64| {
            let mut v: Vec<(i64, i64, usize)> = g
                .sites()
                .iter()
                .map(|s| {
                    let a = (0..3).find(|&a| m[a][s.id]).unwrap();
                    ((s.x - dx) as i64, (s.y - dy) as i64, a)
                })
                .collect();
            v.sort();
            v
        };
        assert_eq!(key(&g1, &m1, 0.0, 0.0), key(&g2, &m2, 3.0, -2.0));
    }

    #[test]
    fn json_roundtrip_schema() {
        let g = build_disk_lattice(LatticeKind::Square, 2.0, OFF, 4).unwrap();
        let v: serde_json::Value = serde_json::from_str(&g.to_json()).unwrap();
        assert_eq!(v["majorana_count"], 4);
        assert_eq!(v["apex"][0], OFF[0]);
        assert!(v["sites"][0].get("id").is_some() && v["sites"][0].get("x").is_some());
        assert_eq!(LatticeGeometry::from_json(&g.to_json()).unwrap(), g);
    }

    proptest::proptest! {
        #[test]
        fn membership_scale_invariant(dx in -5.0f64..5.0, dy in -5.0f64..5.0, scale in 0.1f64..10.0) {
            let cone = Cone::new([0.3, -0.2], 1.0, 3.5).unwrap();
            let p = SitePoint { id: 0, x: 0.3 + dx, y: -0.2 + dy };
            let q = SitePoint { id: 0, x: 0.3 + dx * scale, y: -0.2 + dy * scale };
            if let (Ok(a), Ok(b)) = (cone_membership(&cone, &p), cone_membership(&cone, &q)) {
                proptest::prop_assert_eq!(a, b);
            }
        }
    }
}
