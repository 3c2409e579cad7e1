//! The nine-field state vector and its block layout.

use ndarray::{s, Array1, ArrayView1, ArrayViewMut1};
use ndarray_linalg::Scalar;

use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// The nine state blocks in their fixed order: deflection and rate, rotation
/// and rate for each tube, then the temperature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Block {
    Deflection1,
    Deflection1Rate,
    Rotation1,
    Rotation1Rate,
    Deflection2,
    Deflection2Rate,
    Rotation2,
    Rotation2Rate,
    Temperature,
}

pub const BLOCKS: [Block; 9] = [
    Block::Deflection1,
    Block::Deflection1Rate,
    Block::Rotation1,
    Block::Rotation1Rate,
    Block::Deflection2,
    Block::Deflection2Rate,
    Block::Rotation2,
    Block::Rotation2Rate,
    Block::Temperature,
];

impl Block {
    pub fn index(self) -> usize {
        match self {
            Block::Deflection1 => 0,
            Block::Deflection1Rate => 1,
            Block::Rotation1 => 2,
            Block::Rotation1Rate => 3,
            Block::Deflection2 => 4,
            Block::Deflection2Rate => 5,
            Block::Rotation2 => 6,
            Block::Rotation2Rate => 7,
            Block::Temperature => 8,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Block::Deflection1 => "deflection1",
            Block::Deflection1Rate => "deflection1_rate",
            Block::Rotation1 => "rotation1",
            Block::Rotation1Rate => "rotation1_rate",
            Block::Deflection2 => "deflection2",
            Block::Deflection2Rate => "deflection2_rate",
            Block::Rotation2 => "rotation2",
            Block::Rotation2Rate => "rotation2_rate",
            Block::Temperature => "temperature",
        }
    }
}

/// Nine spectral fields of a common mode count, stored block-contiguously:
/// block `b` occupies flat indices `b*N .. (b+1)*N`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Scalar> {
    mode_count: usize,
    length: f64,
    data: Array1<T>,
}

impl<T: Scalar<Real = f64>> StateVector<T> {
    pub fn zero(mode_count: usize, length: f64) -> Result<Self> {
        if mode_count == 0 {
            return Err(Error::invalid("modes", "mode count must be at least 1"));
        }
        if !(length > 0.0) {
            return Err(Error::invalid("length", "beam length must be positive"));
        }
        Ok(StateVector { mode_count, length, data: Array1::zeros(9 * mode_count) })
    }

    /// Wrap a flat vector of length `9 N` in the fixed block order.
    pub fn from_flat(data: Array1<T>, length: f64) -> Result<Self> {
        if data.len() % 9 != 0 || data.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "flat state length {} is not a positive multiple of 9",
                data.len()
            )));
        }
        let mode_count = data.len() / 9;
        if !(length > 0.0) {
            return Err(Error::invalid("length", "beam length must be positive"));
        }
        Ok(StateVector { mode_count, length, data })
    }

    /// Assemble from nine fields, which must share mode count and length.
    pub fn from_fields(fields: [SpectralField<T>; 9]) -> Result<Self> {
        let n = fields[0].mode_count();
        let l = fields[0].length();
        if fields.iter().any(|f| f.mode_count() != n || f.length() != l) {
            return Err(Error::DimensionMismatch(
                "all nine fields must share mode count and length".into(),
            ));
        }
        let mut data = Array1::zeros(9 * n);
        for (b, f) in fields.iter().enumerate() {
            data.slice_mut(s![b * n..(b + 1) * n]).assign(f.coefficients());
        }
        Ok(StateVector { mode_count: n, length: l, data })
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn as_flat(&self) -> &Array1<T> {
        &self.data
    }

    pub fn into_flat(self) -> Array1<T> {
        self.data
    }

    pub fn block(&self, block: Block) -> ArrayView1<'_, T> {
        let b = block.index();
        self.data.slice(s![b * self.mode_count..(b + 1) * self.mode_count])
    }

    pub fn block_mut(&mut self, block: Block) -> ArrayViewMut1<'_, T> {
        let b = block.index();
        let n = self.mode_count;
        self.data.slice_mut(s![b * n..(b + 1) * n])
    }

    pub fn field(&self, block: Block) -> SpectralField<T> {
        SpectralField::new(self.block(block).to_owned(), self.length)
            .expect("a valid state always yields valid fields")
    }

    /// Euclidean norm of the flat coefficient vector (not the energy norm).
    pub fn flat_norm(&self) -> f64 {
        self.data.iter().map(|c| c.square()).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|c| c.square() == 0.0)
    }
}

impl StateVector<f64> {
    /// Standard decay-experiment datum: coefficients `1/n^2` on both
    /// deflections, everything else zero. Smooth, generic, reproducible.
    pub fn smooth_datum(mode_count: usize, length: f64) -> Result<Self> {
        let mut u = StateVector::zero(mode_count, length)?;
        for n in 1..=mode_count {
            let v = 1.0 / (n * n) as f64;
            u.block_mut(Block::Deflection1)[n - 1] = v;
            u.block_mut(Block::Deflection2)[n - 1] = v;
        }
        Ok(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_layout_is_contiguous_in_fixed_order() {
        let pi = std::f64::consts::PI;
        let mut u = StateVector::<f64>::zero(4, pi).unwrap();
        u.block_mut(Block::Rotation1Rate)[2] = 7.0;
        assert_eq!(u.as_flat()[3 * 4 + 2], 7.0);
        assert_eq!(u.block(Block::Rotation1Rate)[2], 7.0);
        assert_eq!(Block::Temperature.index(), 8);
    }

    #[test]
    fn from_fields_demands_shared_shape() {
        let pi = std::f64::consts::PI;
        let mk = |n: usize| SpectralField::<f64>::zero(n, pi).unwrap();
        let fields = [
            mk(4), mk(4), mk(4), mk(4), mk(4), mk(4), mk(4), mk(4), mk(3),
        ];
        assert!(StateVector::from_fields(fields).is_err());
    }

    #[test]
    fn flat_round_trip() {
        let pi = std::f64::consts::PI;
        let data = Array1::from_iter((0..18).map(|i| i as f64));
        let u = StateVector::from_flat(data.clone(), pi).unwrap();
        assert_eq!(u.mode_count(), 2);
        assert_eq!(u.into_flat(), data);
    }
}
