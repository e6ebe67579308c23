//! Two-dimensional synthetic objectives with a tunable optimum offset.

use nalgebra::{DVector, Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Axis weight of the ellipsoid's second coordinate, `5^2`.
pub const ELLIPSOID_CONDITION: f64 = 25.0;

/// Offsets evaluated by the transfer experiments.
pub const OFFSETS: [f64; 5] = [0.4, 0.5, 0.6, 0.7, 0.8];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    Sphere,
    RotatedEllipsoid,
}

impl SyntheticKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sphere" => Some(SyntheticKind::Sphere),
            "rotated_ellipsoid" => Some(SyntheticKind::RotatedEllipsoid),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SyntheticKind::Sphere => "sphere",
            SyntheticKind::RotatedEllipsoid => "rotated_ellipsoid",
        }
    }
}

/// Counter-clockwise rotation by `pi / 6`.
pub fn rotation<T: Scalar>() -> Matrix2<T> {
    let angle = T::pi() / T::lit(6.0);
    let (s, c) = (angle.sin(), angle.cos());
    Matrix2::new(c, -s, s, c)
}

pub fn sphere<T: Scalar>(x: &[T], b: T) -> T {
    (x[0] - b) * (x[0] - b) + (x[1] - b) * (x[1] - b)
}

/// `f_ell(R x)` with `f_ell(y) = (y1 - b)^2 + 25 (y2 - b)^2`.
pub fn rotated_ellipsoid<T: Scalar>(x: &[T], b: T) -> T {
    let y = rotation::<T>() * Vector2::new(x[0], x[1]);
    (y[0] - b) * (y[0] - b) + T::lit(ELLIPSOID_CONDITION) * (y[1] - b) * (y[1] - b)
}

/// `x -> g(f(x))`. With `g` strictly increasing the argmin and every ranking are unchanged.
pub fn monotone_wrap<X: ?Sized, T, F, G>(f: F, g: G) -> impl Fn(&X) -> T
where
    F: Fn(&X) -> T,
    G: Fn(T) -> T,
{
    move |x| g(f(x))
}

/// One member of a benchmark family, restricted to offsets whose minimizer lies in `[0,1]^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticProblem<T> {
    kind: SyntheticKind,
    offset: T,
}

impl<T: Scalar> SyntheticProblem<T> {
    pub fn new(kind: SyntheticKind, offset: T) -> Result<Self> {
        let problem = Self { kind, offset };
        let m = problem.minimizer();
        if !m.iter().all(|&v| v >= T::zero() && v <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "{} offset {offset}: minimizer ({}, {}) lies outside [0,1]^2",
                kind.as_str(),
                m[0],
                m[1]
            )));
        }
        Ok(problem)
    }

    pub fn kind(&self) -> SyntheticKind {
        self.kind
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    pub const fn dim(&self) -> usize {
        2
    }

    /// `(b, b)` for the sphere, `R^T (b, b)` for the rotated ellipsoid.
    pub fn minimizer(&self) -> DVector<T> {
        let bb = Vector2::new(self.offset, self.offset);
        let m = match self.kind {
            SyntheticKind::Sphere => bb,
            SyntheticKind::RotatedEllipsoid => rotation::<T>().transpose() * bb,
        };
        DVector::from_column_slice(m.as_slice())
    }

    pub fn evaluate(&self, x: &DVector<T>) -> T {
        match self.kind {
            SyntheticKind::Sphere => sphere(x.as_slice(), self.offset),
            SyntheticKind::RotatedEllipsoid => rotated_ellipsoid(x.as_slice(), self.offset),
        }
    }
}
