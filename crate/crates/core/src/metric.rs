//! The extended metric `d(A, B) = sqrt(mu(A Δ B))`, handled through its exact square.

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::measure::{MeasureModel, Set};
use crate::rational::{ExtendedRational, Q};

/// `mu(A Δ B)`; may be infinite.
pub fn dist_sq(model: &MeasureModel, a: &Set, b: &Set) -> Result<ExtendedRational> {
    model.validate(a)?;
    model.validate(b)?;
    let (ar, aa) = model.split(a)?;
    let (br, ba) = model.split(b)?;
    let mut total = ExtendedRational::zero();
    if let Some(l) = model.continuous() {
        if let (Some(ar), Some(br)) = (ar, br) {
            let both = l.intersection(ar, br)?;
            let d = l.measure(ar)? + l.measure(br)? - both * Q::from_integer(2.into());
            total = total + d.into();
        }
    }
    if let Some(u) = model.atoms() {
        if let (Some(aa), Some(ba)) = (aa, ba) {
            total = total + u.mass(&aa.symmetric_difference(ba))?;
        }
    }
    Ok(total)
}

/// `dist_sq(center, x) <= radius_sq`; the radius must be finite.
pub fn in_closed_ball(
    model: &MeasureModel,
    center: &Set,
    radius_sq: &ExtendedRational,
    x: &Set,
) -> Result<bool> {
    if radius_sq.is_infinite() {
        return Err(Error::Invalid("ball radius must be finite".into()));
    }
    Ok(&dist_sq(model, center, x)? <= radius_sq)
}

/// Decides `sqrt(c) <= sqrt(a) + sqrt(b)` exactly.
///
/// Squaring gives `c <= a + b + 2 sqrt(ab)`; when `c > a + b` both sides of
/// `c - a - b <= 2 sqrt(ab)` are nonnegative and can be squared again.
/// Infinite arguments follow extended arithmetic (`inf <= inf` holds).
pub fn triangle_holds(a_sq: &ExtendedRational, b_sq: &ExtendedRational, c_sq: &ExtendedRational) -> bool {
    let (a, b, c) = match (a_sq.as_finite(), b_sq.as_finite(), c_sq.as_finite()) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return a_sq.is_infinite() || b_sq.is_infinite(),
    };
    let excess = c - a - b;
    if !excess.is_positive() {
        return true;
    }
    &excess * &excess <= Q::from_integer(4.into()) * a * b
}
