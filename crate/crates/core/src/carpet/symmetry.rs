//! The dihedral group of the unit square and the scaling map of weak tangents.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{Carpet, CircleKind, Point, Quadrant, Region, SquareAddress, TangentAngle};
use crate::{Error, Rational, Result};

/// An isometry of the unit square, stored as an integer matrix acting on
/// coordinates centred at `(1/2, 1/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Isometry {
    m: [[i8; 2]; 2],
}

impl Isometry {
    pub const IDENTITY: Isometry = Isometry { m: [[1, 0], [0, 1]] };
    /// Counter-clockwise quarter turn.
    pub const ROTATION: Isometry = Isometry { m: [[0, -1], [1, 0]] };
    /// `x ↦ 1 - x`.
    pub const FLIP_X: Isometry = Isometry { m: [[-1, 0], [0, 1]] };
    /// `(x, y) ↦ (y, x)`.
    pub const DIAGONAL: Isometry = Isometry { m: [[0, 1], [1, 0]] };

    pub fn matrix(&self) -> [[i8; 2]; 2] {
        self.m
    }

    pub fn rotation(quarter_turns: u32) -> Isometry {
        (0..quarter_turns % 4).fold(Isometry::IDENTITY, |acc, _| Isometry::ROTATION.compose(&acc))
    }

    /// All eight elements: the four rotations followed by the four reflections.
    pub fn all() -> [Isometry; 8] {
        let mut out = [Isometry::IDENTITY; 8];
        for k in 0..4 {
            out[k as usize] = Isometry::rotation(k);
            out[k as usize + 4] = Isometry::rotation(k).compose(&Isometry::FLIP_X);
        }
        out
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        let (a, b) = (self.m, other.m);
        let mut m = [[0i8; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Isometry { m }
    }

    pub fn inverse(&self) -> Isometry {
        // orthogonal: inverse is the transpose
        let m = self.m;
        Isometry { m: [[m[0][0], m[1][0]], [m[0][1], m[1][1]]] }
    }

    pub fn is_reflection(&self) -> bool {
        let m = self.m;
        m[0][0] * m[1][1] - m[0][1] * m[1][0] < 0
    }

    fn apply_centred<T>(&self, x: T, y: T) -> (T, T)
    where
        T: Copy + std::ops::Neg<Output = T> + std::ops::Add<Output = T> + Zero,
    {
        let pick = |c: i8, v: T| match c {
            1 => v,
            -1 => -v,
            _ => T::zero(),
        };
        (
            pick(self.m[0][0], x) + pick(self.m[0][1], y),
            pick(self.m[1][0], x) + pick(self.m[1][1], y),
        )
    }

    pub fn apply_point(&self, z: Point) -> Point {
        let h = Rational::new(1, 2);
        let (x, y) = self.apply_centred(z.0 - h, z.1 - h);
        (x + h, y + h)
    }

    /// Image of the closed square with lower left `corner` and `side`.
    pub fn apply_square(&self, corner: Point, side: Rational) -> Point {
        let a = self.apply_point(corner);
        let b = self.apply_point((corner.0 + side, corner.1 + side));
        (a.0.min(b.0), a.1.min(b.1))
    }

    /// Image of a base-`p` digit pair.
    pub fn apply_digit(&self, p: u32, d: (u32, u32)) -> (u32, u32) {
        let mid = i64::from((p - 1) / 2);
        let (x, y) = self.apply_centred(i64::from(d.0) - mid, i64::from(d.1) - mid);
        ((x + mid) as u32, (y + mid) as u32)
    }

    /// Image of cell `(i, j)` of an `n × n` grid on the unit square.
    pub fn apply_cell(&self, n: usize, cell: (usize, usize)) -> (usize, usize) {
        let c = |v: usize| 2 * v as i64 + 1 - n as i64;
        let (x, y) = self.apply_centred(c(cell.0), c(cell.1));
        let back = |v: i64| ((v + n as i64 - 1) / 2) as usize;
        (back(x), back(y))
    }
}

impl fmt::Display for Isometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let all = Isometry::all();
        let k = all.iter().position(|g| g == self).unwrap_or(0);
        if k < 4 {
            write!(f, "rot{}", 90 * k)
        } else {
            write!(f, "flip∘rot{}", 90 * (k - 4))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryElement {
    Dihedral(Isometry),
    /// `z ↦ p^power · z` on a weak tangent.
    Scaling(i32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    Trivial,
    Dihedral,
    Scaling,
}

impl Carpet {
    /// The isometries of the unit square that preserve this carpet's region.
    ///
    /// All eight for the unit square. A quarter or three-quarter sector is only
    /// preserved by the diagonal reflection and a half plane by the reflection
    /// in the imaginary axis, which acts on base digits as `x ↦ 1 - x`.
    pub fn symmetries(&self) -> Vec<Isometry> {
        match self.spec.region {
            Region::UnitSquare => Isometry::all().to_vec(),
            Region::WeakTangent { angle: TangentAngle::Half, .. } => {
                vec![Isometry::IDENTITY, Isometry::FLIP_X]
            }
            Region::WeakTangent { .. } => vec![Isometry::IDENTITY, Isometry::DIAGONAL],
        }
    }

    /// Image of every circle id under `g`. Scaling images that leave the
    /// truncation window are `None`.
    pub fn circle_permutation(&self, g: SymmetryElement) -> Result<Vec<Option<usize>>> {
        self.circles
            .iter()
            .map(|c| match &c.address {
                None => Ok(Some(c.id)),
                Some(a) => Ok(self.find(&apply_symmetry(self, g, a)?)),
            })
            .collect()
    }
}

/// Address of the image square of `a` under `g`.
pub fn apply_symmetry(carpet: &Carpet, g: SymmetryElement, a: &SquareAddress) -> Result<SquareAddress> {
    let p = carpet.p();
    match g {
        SymmetryElement::Scaling(power) => {
            if !carpet.is_weak_tangent() {
                return Err(Error::domain("scaling map outside a weak-tangent region"));
            }
            let e = a.scale.ok_or_else(|| Error::domain("address has no scale offset"))?;
            Ok(SquareAddress { scale: Some(e + power), ..a.clone() })
        }
        SymmetryElement::Dihedral(iso) => {
            if !carpet.symmetries().contains(&iso) {
                return Err(Error::domain(format!("{iso} does not preserve the region")));
            }
            let digits = a.digits.iter().map(|&d| iso.apply_digit(p, d)).collect();
            let quadrant = match (a.quadrant, iso == Isometry::DIAGONAL) {
                (Some(Quadrant::II), true) => Some(Quadrant::IV),
                (Some(Quadrant::IV), true) => Some(Quadrant::II),
                (q, _) => q,
            };
            Ok(SquareAddress { digits, scale: a.scale, quadrant })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitInfo {
    pub representative: usize,
    pub size: usize,
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitPartition {
    pub group: GroupKind,
    /// Orbit id of every circle id.
    pub circle_orbit: Vec<usize>,
    /// Orbits in order of their smallest member.
    pub orbits: Vec<OrbitInfo>,
}

impl OrbitPartition {
    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    pub fn orbit_of(&self, circle: usize) -> usize {
        self.circle_orbit[circle]
    }

    fn from_keys<K: Ord + Clone>(group: GroupKind, keys: &[K]) -> Self {
        let mut seen: std::collections::BTreeMap<K, usize> = Default::default();
        let mut circle_orbit = Vec::with_capacity(keys.len());
        let mut orbits: Vec<OrbitInfo> = Vec::new();
        for (id, k) in keys.iter().enumerate() {
            let o = *seen.entry(k.clone()).or_insert_with(|| {
                orbits.push(OrbitInfo { representative: id, size: 0, members: Vec::new() });
                orbits.len() - 1
            });
            orbits[o].size += 1;
            orbits[o].members.push(id);
            circle_orbit.push(o);
        }
        OrbitPartition { group, circle_orbit, orbits }
    }
}

/// Partitions the circles of `carpet` into orbits of `group`.
///
/// For the scaling group on a window of `k` levels every bounded orbit has
/// exactly `2k` members; the sector boundary is its own orbit.
pub fn orbits(carpet: &Carpet, group: GroupKind) -> Result<OrbitPartition> {
    let keys: Vec<Vec<usize>> = match group {
        GroupKind::Trivial => (0..carpet.len()).map(|i| vec![i]).collect(),
        GroupKind::Dihedral => {
            let gs = carpet.symmetries();
            let perms = gs
                .iter()
                .map(|&g| carpet.circle_permutation(SymmetryElement::Dihedral(g)))
                .collect::<Result<Vec<_>>>()?;
            (0..carpet.len())
                .map(|i| {
                    let set: BTreeSet<usize> = perms.iter().map(|p| p[i].expect("closed")).collect();
                    set.into_iter().collect()
                })
                .collect()
        }
        GroupKind::Scaling => {
            if !carpet.is_weak_tangent() {
                return Err(Error::domain("scaling orbits need a weak-tangent region"));
            }
            let mut slot: std::collections::BTreeMap<(Vec<(u32, u32)>, Option<Quadrant>), usize> =
                Default::default();
            carpet
                .circles()
                .iter()
                .map(|c| match &c.address {
                    None => vec![usize::MAX],
                    Some(a) => {
                        let n = slot.len();
                        vec![*slot.entry((a.digits.clone(), a.quadrant)).or_insert(n)]
                    }
                })
                .collect()
        }
    };
    Ok(OrbitPartition::from_keys(group, &keys))
}

/// Orbit of a point of the closed unit square under the eight isometries.
pub fn orbit_of_point(z: Point) -> Result<BTreeSet<Point>> {
    let (zero, one) = (Rational::zero(), Rational::one());
    if z.0 < zero || z.0 > one || z.1 < zero || z.1 > one {
        return Err(Error::domain("point outside the closed unit square"));
    }
    Ok(Isometry::all().iter().map(|g| g.apply_point(z)).collect())
}

/// Generation-2 squares of `S_3` split into the corner squares (touching the
/// diagonals of `O`) and the side squares.
pub fn is_corner_square(carpet: &Carpet, id: usize) -> Result<bool> {
    let c = carpet.circle(id)?;
    if c.kind != CircleKind::Removed {
        return Ok(false);
    }
    let a = c.address.as_ref().expect("removed squares have addresses");
    let mid = carpet.spec.middle_digit();
    Ok(a.digits[0].0 != mid && a.digits[0].1 != mid)
}
