//! Central finite differences along lattice axes, with zero extension past
//! the grid edges.

use crate::field::Sample;
use crate::grid::Lattice;

/// Accuracy order of the central-difference stencils.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DifferenceOrder {
    #[default]
    Fourth,
    Sixth,
    Eighth,
}

impl DifferenceOrder {
    pub(crate) fn first(self) -> &'static [f64] {
        match self {
            DifferenceOrder::Fourth => &[2.0 / 3.0, -1.0 / 12.0],
            DifferenceOrder::Sixth => &[3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0],
            DifferenceOrder::Eighth => &[4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0],
        }
    }

    fn second(self) -> (f64, &'static [f64]) {
        match self {
            DifferenceOrder::Fourth => (-5.0 / 2.0, &[4.0 / 3.0, -1.0 / 12.0]),
            DifferenceOrder::Sixth => (-49.0 / 18.0, &[3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0]),
            DifferenceOrder::Eighth => (-205.0 / 72.0, &[8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0]),
        }
    }
}

fn apply<T: Sample>(lat: &Lattice, values: &[T], axis: usize, center: f64, sym: &[f64], odd: bool, scale: f64) -> Vec<T> {
    let n = lat.axis(axis).len();
    let stride = lat.strides()[axis];
    (0..values.len())
        .map(|flat| {
            let i = (flat / stride) % n;
            let mut acc = values[flat] * center;
            for (k, &c) in sym.iter().enumerate() {
                let k = k + 1;
                let plus = if i + k < n { values[flat + k * stride] } else { T::default() };
                let minus = if i >= k { values[flat - k * stride] } else { T::default() };
                acc += if odd { (plus - minus) * c } else { (plus + minus) * c };
            }
            acc * scale
        })
        .collect()
}

/// `d/dx_axis` of the sampled function.
pub fn derivative<T: Sample>(lat: &Lattice, values: &[T], axis: usize, order: DifferenceOrder) -> Vec<T> {
    let h = lat.axis(axis).spacing();
    apply(lat, values, axis, 0.0, order.first(), true, 1.0 / h)
}

/// `d^2/dx_axis^2` of the sampled function.
pub fn second_derivative<T: Sample>(lat: &Lattice, values: &[T], axis: usize, order: DifferenceOrder) -> Vec<T> {
    let h = lat.axis(axis).spacing();
    let (c0, sym) = order.second();
    apply(lat, values, axis, c0, sym, false, 1.0 / (h * h))
}

/// `d^2/dx_a dx_b`, using the pure second difference when `a == b`.
pub fn mixed_derivative<T: Sample>(lat: &Lattice, values: &[T], a: usize, b: usize, order: DifferenceOrder) -> Vec<T> {
    if a == b {
        second_derivative(lat, values, a, order)
    } else {
        derivative(lat, &derivative(lat, values, a, order), b, order)
    }
}
