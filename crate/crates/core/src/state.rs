use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

/// Fixed-length state of a system with `V` unknowns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateVector<const V: usize>(pub [f64; V]);

impl<const V: usize> StateVector<V> {
    pub const ZERO: Self = Self([0.0; V]);

    pub const fn new(components: [f64; V]) -> Self {
        Self(components)
    }

    pub fn splat(value: f64) -> Self {
        Self([value; V])
    }

    pub fn from_fn(f: impl FnMut(usize) -> f64) -> Self {
        Self(std::array::from_fn(f))
    }

    pub fn map(self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self(self.0.map(&mut f))
    }

    pub fn zip_with(self, other: Self, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        Self::from_fn(|k| f(self.0[k], other.0[k]))
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.0.iter()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl<const V: usize> Default for StateVector<V> {
    fn default() -> Self {
        Self::ZERO
    }
}

impl<const V: usize> From<[f64; V]> for StateVector<V> {
    fn from(v: [f64; V]) -> Self {
        Self(v)
    }
}

impl<const V: usize> Index<usize> for StateVector<V> {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

impl<const V: usize> IndexMut<usize> for StateVector<V> {
    fn index_mut(&mut self, k: usize) -> &mut f64 {
        &mut self.0[k]
    }
}

impl<const V: usize> Add for StateVector<V> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<const V: usize> Sub for StateVector<V> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<const V: usize> Neg for StateVector<V> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|a| -a)
    }
}

impl<const V: usize> Mul<f64> for StateVector<V> {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.map(|a| a * s)
    }
}

impl<const V: usize> Mul<StateVector<V>> for f64 {
    type Output = StateVector<V>;
    fn mul(self, v: StateVector<V>) -> StateVector<V> {
        v * self
    }
}

impl<const V: usize> AddAssign for StateVector<V> {
    fn add_assign(&mut self, rhs: Self) {
        for k in 0..V {
            self.0[k] += rhs.0[k];
        }
    }
}

impl<const V: usize> SubAssign for StateVector<V> {
    fn sub_assign(&mut self, rhs: Self) {
        for k in 0..V {
            self.0[k] -= rhs.0[k];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_is_componentwise() {
        let a = StateVector::new([1.0, -2.0, 3.0]);
        let b = StateVector::new([0.5, 0.5, 0.5]);
        assert_eq!((a + b).0, [1.5, -1.5, 3.5]);
        assert_eq!((a - b).0, [0.5, -2.5, 2.5]);
        assert_eq!((2.0 * a).0, [2.0, -4.0, 6.0]);
        assert_eq!(a.max_abs(), 3.0);
        assert!(!StateVector::new([f64::NAN]).is_finite());
    }
}
