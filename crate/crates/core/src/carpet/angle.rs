use num_traits::Zero;

use super::{Carpet, PeripheralCircle, Region, TangentAngle};
use crate::pathgrid::MassDistribution;
use crate::{ratio_to_real, Error, Real, Result};

/// Angle under which the closed square of `c` is seen from the origin.
///
/// For `[a, b] × [c, d]` in the open first quadrant the extreme directions are
/// the corners `(a, d)` and `(b, c)`, so `θ = atan(d/a) - atan(c/b)`. The two
/// slopes are formed exactly, which makes `θ` exactly invariant under scaling.
pub fn subtended_angle<T: Real>(c: &PeripheralCircle) -> Result<T> {
    let (a, cy, b, d) = c
        .bounds()
        .ok_or_else(|| Error::domain("unbounded circle has no subtended angle"))?;
    if a <= Zero::zero() || cy <= Zero::zero() {
        return Err(Error::domain("square must lie in the open first quadrant"));
    }
    let hi: T = ratio_to_real(&(d / a));
    let lo: T = ratio_to_real(&(cy / b));
    Ok(hi.atan() - lo.atan())
}

/// The density `ρ(C) = (2/π) θ(C)` on a quarter-plane weak tangent, with
/// `ρ = 0` on the sector boundary. Cell densities are left empty.
pub fn angle_density<T: Real>(carpet: &Carpet) -> Result<MassDistribution<T>> {
    match carpet.spec().region {
        Region::WeakTangent { angle: TangentAngle::Quarter, .. } => {}
        _ => return Err(Error::domain("angle density needs a quarter-plane weak tangent")),
    }
    let scale = T::lit(2.0) / T::PI();
    let weights = carpet
        .circles()
        .iter()
        .map(|c| if c.is_bounded() { subtended_angle::<T>(c).map(|t| scale * t) } else { Ok(T::zero()) })
        .collect::<Result<Vec<T>>>()?;
    Ok(MassDistribution::from_weights(weights))
}
