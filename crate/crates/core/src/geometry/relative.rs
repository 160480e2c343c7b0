use super::{GeometryError, SetDef};
use crate::scalar::Scalar;

/// An unsafe set that rides along with an agent.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeSetSpec<T> {
    pub id: String,
    pub base: SetDef<T>,
    pub offset: Vec<T>,
    pub anchor: String,
}

impl<T: Scalar> RelativeSetSpec<T> {
    pub fn new(
        id: impl Into<String>,
        base: SetDef<T>,
        offset: Vec<T>,
        anchor: impl Into<String>,
    ) -> Result<Self, GeometryError> {
        if offset.len() != base.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: base.dim(),
                found: offset.len(),
            });
        }
        Ok(RelativeSetSpec {
            id: id.into(),
            base,
            offset,
            anchor: anchor.into(),
        })
    }

    /// Relative ball: radius `radius`, centered at anchor + `offset`.
    pub fn ball(
        id: impl Into<String>,
        offset: Vec<T>,
        radius: T,
        anchor: impl Into<String>,
    ) -> Result<Self, GeometryError> {
        let base = SetDef::ball(vec![T::zero(); offset.len()], radius)?;
        Self::new(id, base, offset, anchor)
    }
}

/// Places the base set so its reference point sits at `anchor_position + offset`.
pub fn update_relative<T: Scalar>(
    spec: &RelativeSetSpec<T>,
    anchor_position: &[T],
) -> Result<SetDef<T>, GeometryError> {
    if anchor_position.len() != spec.base.dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: spec.base.dim(),
            found: anchor_position.len(),
        });
    }
    let target: Vec<T> = anchor_position
        .iter()
        .zip(&spec.offset)
        .map(|(&a, &o)| a + o)
        .collect();
    // Built per variant so the reference point lands on `target` exactly.
    Ok(match &spec.base {
        SetDef::Point(_) => SetDef::Point(target),
        SetDef::Ball { radius, .. } => SetDef::Ball {
            center: target,
            radius: *radius,
        },
        SetDef::Hyperrectangle { lower, upper } => {
            let half: Vec<T> = lower
                .iter()
                .zip(upper)
                .map(|(&l, &u)| (u - l) / T::lit(2.0))
                .collect();
            SetDef::Hyperrectangle {
                lower: target.iter().zip(&half).map(|(&c, &h)| c - h).collect(),
                upper: target.iter().zip(&half).map(|(&c, &h)| c + h).collect(),
            }
        }
        SetDef::Polytope(poly) => SetDef::Polytope(poly.translate(&target)),
    })
}
