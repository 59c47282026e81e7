//! Exact construction of finite-generation `1/p`-Sierpiński carpets and of
//! truncated weak tangents.
//!
//! Every peripheral circle is stored with rational geometry: the lower left
//! corner and the side length of the removed square. Denominators are powers
//! of `p`, so containment and distance checks are exact.

mod angle;
mod dimension;
mod symmetry;

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Rational, Result};

pub use angle::{angle_density, subtended_angle};
pub use dimension::{conformal_dim_lower_bound, dimension_distinguishable, hausdorff_dimension};
pub use symmetry::{
    apply_symmetry, is_corner_square, orbit_of_point, orbits, GroupKind, Isometry, OrbitInfo, OrbitPartition,
    SymmetryElement,
};

/// A point with exact coordinates.
pub type Point = (Rational, Rational);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TangentAngle {
    /// Quarter plane, the blow-up at a corner of `O`.
    Quarter,
    /// Half plane, the blow-up at the midpoint of a side of `O`.
    Half,
    /// Three-quarter plane, the blow-up at a corner of `M`.
    ThreeQuarter,
}

impl TangentAngle {
    /// Angular extent of the sector in radians, as a multiple of `π/2`.
    pub fn quarter_turns(self) -> u32 {
        match self {
            TangentAngle::Quarter => 1,
            TangentAngle::Half => 2,
            TangentAngle::ThreeQuarter => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Region {
    UnitSquare,
    /// Window between scales `p^-levels` and `p^levels` of a weak tangent.
    WeakTangent { angle: TangentAngle, levels: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CarpetSpec {
    pub p: u32,
    pub generation: u32,
    pub region: Region,
}

impl CarpetSpec {
    pub fn unit_square(p: u32, generation: u32) -> Self {
        CarpetSpec { p, generation, region: Region::UnitSquare }
    }

    pub fn weak_tangent(p: u32, generation: u32, angle: TangentAngle, levels: u32) -> Self {
        CarpetSpec { p, generation, region: Region::WeakTangent { angle, levels } }
    }

    pub fn validate(&self) -> Result<()> {
        validate_p(self.p)?;
        if self.generation == 0 {
            return Err(Error::param("generation must be at least 1"));
        }
        // keep p^(generation + levels) well inside i64
        let levels = match self.region {
            Region::UnitSquare => 0,
            Region::WeakTangent { levels, .. } => {
                if levels == 0 {
                    return Err(Error::param("window levels must be at least 1"));
                }
                levels
            }
        };
        let bits = f64::from(self.p).log2() * f64::from(self.generation + 2 * levels + 1);
        if bits > 40.0 {
            return Err(Error::param(format!(
                "p = {}, generation = {}, levels = {} exceeds the exact-arithmetic range",
                self.p, self.generation, levels
            )));
        }
        Ok(())
    }

    pub fn middle_digit(&self) -> u32 {
        (self.p - 1) / 2
    }
}

/// `p` must be odd and at least 3.
pub fn validate_p(p: u32) -> Result<()> {
    if p < 3 || p % 2 == 0 {
        return Err(Error::param(format!("p must be odd and >= 3, got {p}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Quadrant {
    I,
    II,
    III,
    IV,
}

/// Base-`p` address of a removed square.
///
/// `digits[g]` selects the column/row of the subcell at depth `g + 1`. The last
/// pair is the middle pair and no earlier pair is. Weak-tangent squares also
/// carry the scale offset `e` (the square is `p^(e+1)` times a square of
/// `S_p`) and, for the three-quarter tangent, the quadrant of the copy.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SquareAddress {
    pub digits: Vec<(u32, u32)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scale: Option<i32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub quadrant: Option<Quadrant>,
}

impl SquareAddress {
    pub fn new(digits: Vec<(u32, u32)>) -> Self {
        SquareAddress { digits, scale: None, quadrant: None }
    }

    pub fn generation(&self) -> usize {
        self.digits.len()
    }

    /// Checks the digit invariants for the given `p`.
    pub fn validate(&self, p: u32) -> Result<()> {
        let mid = (p - 1) / 2;
        let Some((last, init)) = self.digits.split_last() else {
            return Err(Error::domain("empty address"));
        };
        if *last != (mid, mid) {
            return Err(Error::domain("last digit pair must be the middle pair"));
        }
        for &(dx, dy) in init {
            if dx >= p || dy >= p {
                return Err(Error::domain("digit out of range"));
            }
            if (dx, dy) == (mid, mid) {
                return Err(Error::domain("middle pair before the last position"));
            }
        }
        Ok(())
    }

    /// Geometry of the square inside the unit square, ignoring scale and quadrant.
    pub fn unit_geometry(&self, p: u32) -> (Point, Rational) {
        let p = i64::from(p);
        let mut x = Rational::zero();
        let mut y = Rational::zero();
        let mut side = Rational::one();
        for &(dx, dy) in &self.digits {
            side /= p;
            x += side * i64::from(dx);
            y += side * i64::from(dy);
        }
        ((x, y), side)
    }

    fn sort_key(&self) -> (usize, &[(u32, u32)], Option<Quadrant>, Option<i32>) {
        (self.digits.len(), &self.digits, self.quadrant, self.scale)
    }
}

impl fmt::Display for SquareAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = self.quadrant {
            write!(f, "{q:?}:")?;
        }
        if let Some(e) = self.scale {
            write!(f, "e{e}:")?;
        }
        let parts: Vec<String> = self.digits.iter().map(|(x, y)| format!("{x}{y}")).collect();
        write!(f, "{}", parts.join("."))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircleKind {
    /// Boundary of the unit square.
    Outer,
    /// Boundary of the first removed square.
    Middle,
    Removed,
    /// Boundary of the sector containing a weak tangent (unbounded).
    SectorBoundary,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeripheralCircle {
    pub id: usize,
    pub kind: CircleKind,
    pub address: Option<SquareAddress>,
    /// Lower left corner of the closed square; `None` for the unbounded boundary.
    pub corner: Option<Point>,
    pub side: Option<Rational>,
    pub tag: Option<&'static str>,
}

impl PeripheralCircle {
    pub fn is_bounded(&self) -> bool {
        self.side.is_some()
    }

    /// Closed square `[x0, x1] × [y0, y1]` as `(x0, y0, x1, y1)`.
    pub fn bounds(&self) -> Option<(Rational, Rational, Rational, Rational)> {
        let (x, y) = self.corner?;
        let s = self.side?;
        Some((x, y, x + s, y + s))
    }

    pub fn generation(&self) -> usize {
        self.address.as_ref().map_or(0, SquareAddress::generation)
    }
}

/// A finite carpet: the peripheral circles of the generation-`n` approximation
/// inside the region. Immutable after construction.
#[derive(Clone, Debug)]
pub struct Carpet {
    spec: CarpetSpec,
    circles: Vec<PeripheralCircle>,
    index: HashMap<SquareAddress, usize>,
}

impl Carpet {
    pub fn spec(&self) -> &CarpetSpec {
        &self.spec
    }

    pub fn p(&self) -> u32 {
        self.spec.p
    }

    pub fn generation(&self) -> u32 {
        self.spec.generation
    }

    pub fn circles(&self) -> &[PeripheralCircle] {
        &self.circles
    }

    pub fn len(&self) -> usize {
        self.circles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.circles.is_empty()
    }

    pub fn circle(&self, id: usize) -> Result<&PeripheralCircle> {
        self.circles.get(id).ok_or(Error::UnknownCircle(id))
    }

    pub fn find(&self, address: &SquareAddress) -> Option<usize> {
        self.index.get(address).copied()
    }

    pub fn find_tag(&self, tag: &str) -> Option<usize> {
        self.circles.iter().find(|c| c.tag == Some(tag)).map(|c| c.id)
    }

    pub fn outer(&self) -> Option<usize> {
        self.find_tag("O")
    }

    pub fn middle(&self) -> Option<usize> {
        self.find_tag("M")
    }

    /// The unbounded boundary of a weak-tangent sector.
    pub fn sector_boundary(&self) -> Option<usize> {
        self.circles.iter().find(|c| c.kind == CircleKind::SectorBoundary).map(|c| c.id)
    }

    pub fn is_weak_tangent(&self) -> bool {
        matches!(self.spec.region, Region::WeakTangent { .. })
    }

    /// Exact geometry of an address in this carpet's region.
    pub fn geometry_of(&self, address: &SquareAddress) -> Result<(Point, Rational)> {
        address.validate(self.spec.p)?;
        match self.spec.region {
            Region::UnitSquare => {
                if address.scale.is_some() || address.quadrant.is_some() {
                    return Err(Error::domain("unit-square address with scale or quadrant"));
                }
                Ok(address.unit_geometry(self.spec.p))
            }
            Region::WeakTangent { angle, .. } => {
                let e = address
                    .scale
                    .ok_or_else(|| Error::domain("weak-tangent address without scale offset"))?;
                let quadrant = match (angle, address.quadrant) {
                    (TangentAngle::ThreeQuarter, Some(q)) if q != Quadrant::I => q,
                    (TangentAngle::ThreeQuarter, _) => {
                        return Err(Error::domain("three-quarter address needs quadrant II-IV"))
                    }
                    (_, None) => Quadrant::I,
                    (_, Some(_)) => return Err(Error::domain("quadrant only for three-quarter")),
                };
                Ok(tangent_geometry(self.spec.p, angle, address, e, quadrant))
            }
        }
    }

    /// Recovers the address of a square from its exact geometry.
    pub fn address_of(&self, corner: Point, side: Rational) -> Option<SquareAddress> {
        match self.spec.region {
            Region::UnitSquare => {
                let a = unit_address(self.spec.p, corner, side)?;
                (a.generation() as u32 <= self.spec.generation).then_some(a)
            }
            Region::WeakTangent { .. } => {
                // a square determines its level uniquely; probe all of them
                self.circles.iter().find_map(|c| {
                    (c.corner == Some(corner) && c.side == Some(side)).then(|| c.address.clone())?
                })
            }
        }
    }

    /// Number of removed squares of generation `g` inside the unit square.
    pub fn removed_count(p: u32, g: u32) -> u64 {
        u64::from(p * p - 1).pow(g - 1)
    }
}

fn pow_rational(p: u32, e: i32) -> Rational {
    let base = Rational::from_integer(i64::from(p));
    if e >= 0 {
        (0..e).fold(Rational::one(), |acc, _| acc * base)
    } else {
        (0..-e).fold(Rational::one(), |acc, _| acc / base)
    }
}

fn tangent_geometry(
    p: u32,
    angle: TangentAngle,
    address: &SquareAddress,
    e: i32,
    quadrant: Quadrant,
) -> (Point, Rational) {
    let ((x, y), s) = address.unit_geometry(p);
    let f = pow_rational(p, e + 1);
    let half = Rational::new(1, 2);
    let (x, y) = match angle {
        TangentAngle::Half => ((x - half) * f, y * f),
        _ => (x * f, y * f),
    };
    let s = s * f;
    let corner = match quadrant {
        Quadrant::I => (x, y),
        Quadrant::II => (-x - s, y),
        Quadrant::III => (-x - s, -y - s),
        Quadrant::IV => (x, -y - s),
    };
    (corner, s)
}

fn unit_address(p: u32, corner: Point, side: Rational) -> Option<SquareAddress> {
    let pi = i64::from(p);
    let mut g = 0usize;
    let mut s = Rational::one();
    while s > side {
        s /= pi;
        g += 1;
    }
    if s != side || g == 0 {
        return None;
    }
    let scale = Rational::from_integer(pi.pow(g as u32));
    let xs = corner.0 * scale;
    let ys = corner.1 * scale;
    if !xs.is_integer() || !ys.is_integer() {
        return None;
    }
    let (mut xi, mut yi) = (xs.to_integer(), ys.to_integer());
    if xi < 0 || yi < 0 || xi >= pi.pow(g as u32) || yi >= pi.pow(g as u32) {
        return None;
    }
    let mut digits = vec![(0u32, 0u32); g];
    for d in digits.iter_mut().rev() {
        *d = ((xi % pi) as u32, (yi % pi) as u32);
        xi /= pi;
        yi /= pi;
    }
    let a = SquareAddress::new(digits);
    a.validate(p).ok().map(|_| a)
}

/// Non-middle digit prefixes of length `len`, in lexicographic order.
fn prefixes(p: u32, len: usize) -> Vec<Vec<(u32, u32)>> {
    let mid = (p - 1) / 2;
    let pairs: Vec<(u32, u32)> = (0..p)
        .flat_map(|x| (0..p).map(move |y| (x, y)))
        .filter(|&d| d != (mid, mid))
        .collect();
    let mut out: Vec<Vec<(u32, u32)>> = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|pre| {
                pairs.iter().map(move |&d| {
                    let mut v = pre.clone();
                    v.push(d);
                    v
                })
            })
            .collect();
    }
    out
}

/// All removed-square addresses of `S_p` up to `generation`, ordered by
/// (generation, digits).
fn unit_addresses(p: u32, generation: u32) -> Vec<SquareAddress> {
    let mid = (p - 1) / 2;
    (1..=generation as usize)
        .flat_map(|g| {
            prefixes(p, g - 1).into_iter().map(move |mut d| {
                d.push((mid, mid));
                SquareAddress::new(d)
            })
        })
        .collect()
}

/// Builds the generation-`n` carpet for `spec`.
pub fn build_carpet(spec: CarpetSpec) -> Result<Carpet> {
    spec.validate()?;
    let p = spec.p;
    let mid = spec.middle_digit();
    let mut circles = Vec::new();
    match spec.region {
        Region::UnitSquare => {
            circles.push(PeripheralCircle {
                id: 0,
                kind: CircleKind::Outer,
                address: None,
                corner: Some((Rational::zero(), Rational::zero())),
                side: Some(Rational::one()),
                tag: Some("O"),
            });
            for a in unit_addresses(p, spec.generation) {
                let (corner, side) = a.unit_geometry(p);
                let middle = a.generation() == 1;
                circles.push(PeripheralCircle {
                    id: circles.len(),
                    kind: if middle { CircleKind::Middle } else { CircleKind::Removed },
                    address: Some(a),
                    corner: Some(corner),
                    side: Some(side),
                    tag: middle.then_some("M"),
                });
            }
        }
        Region::WeakTangent { angle, levels } => {
            circles.push(PeripheralCircle {
                id: 0,
                kind: CircleKind::SectorBoundary,
                address: None,
                corner: None,
                side: None,
                tag: None,
            });
            // subcell of Q0 that holds the next smaller copy
            let excluded = match angle {
                TangentAngle::Half => (mid, 0),
                _ => (0, 0),
            };
            let quadrants: &[Quadrant] = match angle {
                TangentAngle::ThreeQuarter => &[Quadrant::II, Quadrant::III, Quadrant::IV],
                _ => &[Quadrant::I],
            };
            let mut addresses = Vec::new();
            for base in unit_addresses(p, spec.generation) {
                if base.digits[0] == excluded {
                    continue;
                }
                for &q in quadrants {
                    for e in -(levels as i32)..levels as i32 {
                        addresses.push(SquareAddress {
                            digits: base.digits.clone(),
                            scale: Some(e),
                            quadrant: (angle == TangentAngle::ThreeQuarter).then_some(q),
                        });
                    }
                }
            }
            addresses.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
            for a in addresses {
                let q = a.quadrant.unwrap_or(Quadrant::I);
                let (corner, side) = tangent_geometry(p, angle, &a, a.scale.unwrap_or(0), q);
                circles.push(PeripheralCircle {
                    id: circles.len(),
                    kind: CircleKind::Removed,
                    address: Some(a),
                    corner: Some(corner),
                    side: Some(side),
                    tag: None,
                });
            }
        }
    }
    let index = circles
        .iter()
        .filter_map(|c| c.address.clone().map(|a| (a, c.id)))
        .collect();
    Ok(Carpet { spec, circles, index })
}

/// Squared Euclidean distance between two closed axis-parallel squares.
pub fn square_distance_sq(a: &PeripheralCircle, b: &PeripheralCircle) -> Option<Rational> {
    let (ax0, ay0, ax1, ay1) = a.bounds()?;
    let (bx0, by0, bx1, by1) = b.bounds()?;
    let gap = |lo0: Rational, hi0: Rational, lo1: Rational, hi1: Rational| {
        let g = (lo1 - hi0).max(lo0 - hi1);
        g.max(Rational::zero())
    };
    let dx = gap(ax0, ax1, bx0, bx1);
    let dy = gap(ay0, ay1, by0, by1);
    Some(dx * dx + dy * dy)
}

/// Checks `dist(C, C') >= (p-1)/2 · min(ℓ(C), ℓ(C'))` exactly for every pair
/// of distinct circles. Returns the first violating pair, if any.
///
/// The distance between a removed square and the outer square `O` is measured
/// to the boundary of the unit square.
pub fn separation_violation(carpet: &Carpet) -> Option<(usize, usize)> {
    let factor = Rational::new(i64::from(carpet.p()) - 1, 2);
    let bounded: Vec<&PeripheralCircle> =
        carpet.circles().iter().filter(|c| c.is_bounded()).collect();
    for (i, a) in bounded.iter().enumerate() {
        for b in &bounded[i + 1..] {
            let (sa, sb) = (a.side.unwrap(), b.side.unwrap());
            let need = factor * sa.min(sb);
            let d2 = match (a.kind, b.kind) {
                (CircleKind::Outer, _) => boundary_distance(a, b),
                (_, CircleKind::Outer) => boundary_distance(b, a),
                _ => square_distance_sq(a, b).unwrap(),
            };
            if d2 < need * need {
                return Some((a.id, b.id));
            }
        }
    }
    None
}

/// Squared distance from a square inside `outer` to the boundary of `outer`.
fn boundary_distance(outer: &PeripheralCircle, c: &PeripheralCircle) -> Rational {
    let (ox0, oy0, ox1, oy1) = outer.bounds().unwrap();
    let (x0, y0, x1, y1) = c.bounds().unwrap();
    let d = (x0 - ox0).min(y0 - oy0).min(ox1 - x1).min(oy1 - y1);
    d * d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn first_generation_has_outer_and_middle() {
        let c = build_carpet(CarpetSpec::unit_square(3, 1)).unwrap();
        assert_eq!(c.len(), 2);
        let o = c.circle(c.outer().unwrap()).unwrap();
        assert_eq!(o.corner, Some((r(0, 1), r(0, 1))));
        assert_eq!(o.side, Some(r(1, 1)));
        let m = c.circle(c.middle().unwrap()).unwrap();
        assert_eq!(m.corner, Some((r(1, 3), r(1, 3))));
        assert_eq!(m.side, Some(r(1, 3)));
    }

    #[test]
    fn second_generation_squares_have_side_one_ninth() {
        let c = build_carpet(CarpetSpec::unit_square(3, 2)).unwrap();
        assert_eq!(c.len(), 10);
        let small: Vec<_> = c.circles().iter().filter(|c| c.generation() == 2).collect();
        assert_eq!(small.len(), 8);
        assert!(small.iter().all(|c| c.side == Some(r(1, 9))));
    }

    #[test]
    fn p5_middle_square() {
        let c = build_carpet(CarpetSpec::unit_square(5, 1)).unwrap();
        let m = c.circle(c.middle().unwrap()).unwrap();
        assert_eq!(m.bounds(), Some((r(2, 5), r(2, 5), r(3, 5), r(3, 5))));
    }

    #[test]
    fn rejects_bad_parameters() {
        for p in [0, 1, 2, 4, 10] {
            assert!(build_carpet(CarpetSpec::unit_square(p, 1)).is_err());
        }
        assert!(build_carpet(CarpetSpec::unit_square(3, 0)).is_err());
        assert!(build_carpet(CarpetSpec::weak_tangent(3, 1, TangentAngle::Quarter, 0)).is_err());
    }

    #[test]
    fn address_validation() {
        assert!(SquareAddress::new(vec![(1, 1)]).validate(3).is_ok());
        assert!(SquareAddress::new(vec![(0, 1)]).validate(3).is_err());
        assert!(SquareAddress::new(vec![(1, 1), (1, 1)]).validate(3).is_err());
        assert!(SquareAddress::new(vec![(3, 0), (1, 1)]).validate(3).is_err());
        assert!(SquareAddress::new(vec![]).validate(3).is_err());
    }

    #[test]
    fn weak_tangent_window_counts() {
        for (angle, copies) in [
            (TangentAngle::Quarter, 1usize),
            (TangentAngle::Half, 1),
            (TangentAngle::ThreeQuarter, 3),
        ] {
            let c = build_carpet(CarpetSpec::weak_tangent(3, 2, angle, 2)).unwrap();
            // one boundary + per level (p^2-1)^(n-1) squares, 2k levels
            assert_eq!(c.len(), 1 + copies * 8 * 4, "{angle:?}");
            assert_eq!(c.sector_boundary(), Some(0));
        }
    }

    #[test]
    fn quarter_tangent_squares_live_in_their_level() {
        let c = build_carpet(CarpetSpec::weak_tangent(3, 2, TangentAngle::Quarter, 2)).unwrap();
        for circle in c.circles().iter().skip(1) {
            let e = circle.address.as_ref().unwrap().scale.unwrap();
            let (_, _, x1, y1) = circle.bounds().unwrap();
            let far = x1.max(y1);
            assert!(far > pow_rational(3, e) && far < pow_rational(3, e + 1));
        }
    }

    #[test]
    fn three_quarter_copies_avoid_the_first_quadrant() {
        let c =
            build_carpet(CarpetSpec::weak_tangent(3, 1, TangentAngle::ThreeQuarter, 1)).unwrap();
        for circle in c.circles().iter().skip(1) {
            let (x0, y0, x1, y1) = circle.bounds().unwrap();
            let zero = Rational::zero();
            assert!(x1 < zero || y1 < zero, "{x0} {y0}");
        }
    }

    #[test]
    fn address_round_trip() {
        for spec in [
            CarpetSpec::unit_square(3, 3),
            CarpetSpec::unit_square(5, 2),
            CarpetSpec::weak_tangent(3, 2, TangentAngle::Quarter, 2),
            CarpetSpec::weak_tangent(3, 2, TangentAngle::Half, 1),
            CarpetSpec::weak_tangent(3, 2, TangentAngle::ThreeQuarter, 1),
        ] {
            let c = build_carpet(spec).unwrap();
            for circle in c.circles() {
                let Some(a) = &circle.address else { continue };
                let (corner, side) = c.geometry_of(a).unwrap();
                assert_eq!(Some(corner), circle.corner);
                assert_eq!(Some(side), circle.side);
                assert_eq!(c.address_of(corner, side).as_ref(), Some(a));
                assert_eq!(c.find(a), Some(circle.id));
            }
        }
    }

    #[test]
    fn ordering_is_by_generation_then_digits() {
        let c = build_carpet(CarpetSpec::unit_square(3, 3)).unwrap();
        let keys: Vec<_> = c
            .circles()
            .iter()
            .skip(1)
            .map(|c| c.address.as_ref().unwrap().clone())
            .collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        assert_eq!(keys, sorted);
    }
}
