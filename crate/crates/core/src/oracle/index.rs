//! Radius queries over table entries via vantage-point trees.

use nalgebra::DMatrix;
use vpsearch::{BestCandidate, MetricSpace, Tree};

use crate::qstate::{inner_raw, C64};

/// Projective state with the Fubini–Study angle `acos |⟨a|b⟩|` as metric.
#[derive(Clone)]
pub(crate) struct Ray(Box<[C64]>);

impl Ray {
    pub(crate) fn new(amps: &[C64]) -> Self {
        Self(amps.into())
    }
}

impl MetricSpace for Ray {
    type UserData = ();
    type Distance = f64;

    fn distance(&self, other: &Self, _: &()) -> f64 {
        inner_raw(&self.0, &other.0).norm().min(1.0).acos()
    }
}

/// Hermitian matrix embedded isometrically in `R^{d²}`; the metric is the
/// Frobenius distance.
#[derive(Clone)]
pub(crate) struct Embedded(Box<[f64]>);

impl Embedded {
    pub(crate) fn new(m: &DMatrix<C64>) -> Self {
        let d = m.nrows();
        let s = std::f64::consts::SQRT_2;
        let mut v = Vec::with_capacity(d * d);
        for i in 0..d {
            v.push(m[(i, i)].re);
        }
        for i in 0..d {
            for j in i + 1..d {
                v.push(s * m[(i, j)].re);
                v.push(s * m[(i, j)].im);
            }
        }
        Self(v.into())
    }
}

impl MetricSpace for Embedded {
    type UserData = ();
    type Distance = f64;

    fn distance(&self, other: &Self, _: &()) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }
}

struct Within {
    radius: f64,
    hits: Vec<usize>,
}

impl<P: MetricSpace<Distance = f64> + Clone> BestCandidate<P, ()> for Within {
    type Output = Vec<usize>;

    fn consider(&mut self, _: &P, distance: f64, index: usize, _: &P::UserData) {
        if distance <= self.radius {
            self.hits.push(index);
        }
    }

    fn distance(&self) -> f64 {
        self.radius
    }

    fn result(mut self, _: &P::UserData) -> Vec<usize> {
        self.hits.sort_unstable();
        self.hits
    }
}

/// Static index answering "which points lie within `radius`".
pub(crate) struct NeighborIndex<P: MetricSpace<Distance = f64, UserData = ()> + Clone> {
    tree: Tree<P>,
}

impl<P: MetricSpace<Distance = f64, UserData = ()> + Clone> NeighborIndex<P> {
    pub(crate) fn new(points: &[P]) -> Self {
        Self {
            tree: Tree::new(points),
        }
    }

    /// Indices within `radius` (slightly widened for rounding), ascending.
    pub(crate) fn within(&self, p: &P, radius: f64) -> Vec<usize> {
        self.tree.find_nearest_custom(
            p,
            &(),
            Within {
                radius: radius * (1.0 + 1e-9) + 1e-12,
                hits: Vec::new(),
            },
        )
    }
}
