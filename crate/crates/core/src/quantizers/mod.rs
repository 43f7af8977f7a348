//! Scaled binary quantizers.
//!
//! A `k`-bit scaled binary quantization approximates `x` by
//! `sum_i v_i * s_i(x)` with scalar levels `v_i >= 0` and sign planes `s_i`.
//! Every quantizer here is *foldable*: plane `i` is the sign of the residual
//! left after the first `i - 1` terms, so the planes follow from the levels
//! alone (see [`fold_planes`]).
//!
//! | method            | bits   | levels                                        |
//! |-------------------|--------|-----------------------------------------------|
//! | [`quantize_ls1`]  | 1      | `mean(|x|)`                                   |
//! | [`quantize_ls2`]  | 2      | global least-squares `(v_1, v_2)`             |
//! | [`quantize_ternary`] | 2   | `v_1 = v_2 = v`, values in `{-2v, 0, 2v}`    |
//! | [`quantize_greedy`] | 1..=16 | repeated 1-bit fits of the residual         |
//!
//! [`quantize_lloyd`] is an unconstrained `2^k`-level scalar quantizer used as
//! a reference point; it is not bit-decomposable.

mod bqt;
mod greedy;
pub(crate) mod least_squares;
mod lloyd;

pub use bqt::{decode_bqt, encode_bqt, load_bqt, save_bqt, MAX_BQT_BITS};
pub use greedy::{quantize_greedy, MAX_GREEDY_BITS};
pub use least_squares::{quantize_ls1, quantize_ls2, quantize_ternary};
pub use lloyd::{quantize_lloyd, quantize_lloyd_with, LloydOptions, LloydQuantizer, MAX_LLOYD_BITS};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bitkernel::{BitPlane, PackedQuantizedVector};
use crate::error::{Error, Result};
use crate::tensor::{pairwise_sum_by, FloatVector};

/// `-1` for negative input, `+1` otherwise (including zero).
#[inline]
pub fn sign(x: f64) -> i8 {
    if x < 0.0 {
        -1
    } else {
        1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ls1,
    Ls2,
    Ternary,
    Greedy,
    Lloyd,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Ls1, Method::Ls2, Method::Ternary, Method::Greedy, Method::Lloyd];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ls1 => "ls1",
            Method::Ls2 => "ls2",
            Method::Ternary => "ternary",
            Method::Greedy => "greedy",
            Method::Lloyd => "lloyd",
        }
    }

    /// The only admissible bit count, for methods that have one.
    pub fn fixed_bits(self) -> Option<usize> {
        match self {
            Method::Ls1 => Some(1),
            Method::Ls2 | Method::Ternary => Some(2),
            Method::Greedy | Method::Lloyd => None,
        }
    }

    pub fn check_bits(self, k: usize) -> Result<()> {
        let ok = match self {
            Method::Greedy => (1..=MAX_GREEDY_BITS).contains(&k),
            Method::Lloyd => (1..=MAX_LLOYD_BITS).contains(&k),
            fixed => fixed.fixed_bits() == Some(k),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("method {self} does not support {k} bits")))
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ls1" | "ls-1" => Ok(Method::Ls1),
            "ls2" | "ls-2" => Ok(Method::Ls2),
            "ternary" | "t" => Ok(Method::Ternary),
            "greedy" | "gf" => Ok(Method::Greedy),
            "lloyd" => Ok(Method::Lloyd),
            other => Err(Error::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

/// Output of a scaled binary quantizer: levels, packed planes, and the
/// method that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledBinaryQuantization {
    method: Method,
    packed: PackedQuantizedVector,
}

impl ScaledBinaryQuantization {
    pub(crate) fn from_levels(method: Method, x: &[f64], levels: Vec<f64>) -> Self {
        let planes = fold_planes(x, &levels);
        let packed = PackedQuantizedVector::new(levels, planes).expect("levels and planes are consistent");
        Self { method, packed }
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn levels(&self) -> &[f64] {
        self.packed.levels()
    }

    pub fn planes(&self) -> &[BitPlane] {
        self.packed.planes()
    }

    pub fn bits(&self) -> usize {
        self.packed.bits()
    }

    pub fn len(&self) -> usize {
        self.packed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packed.is_empty()
    }

    pub fn packed(&self) -> &PackedQuantizedVector {
        &self.packed
    }

    pub fn into_packed(self) -> PackedQuantizedVector {
        self.packed
    }

    /// `sum_i v_i s_i`.
    pub fn reconstruction(&self) -> FloatVector {
        FloatVector::new(self.packed.reconstruct()).expect("finite levels give finite output")
    }
}

/// Planes of the foldable quantization of `x` with the given levels:
/// `s_i = sign(r_i)` where `r_1 = x` and `r_{i+1} = r_i - v_i s_i`.
pub fn fold_planes(x: &[f64], levels: &[f64]) -> Vec<BitPlane> {
    let mut residual = x.to_vec();
    let mut planes = Vec::with_capacity(levels.len());
    for &v in levels {
        planes.push(BitPlane::from_signs_of(&residual));
        for r in residual.iter_mut() {
            *r -= v * sign(*r) as f64;
        }
    }
    planes
}

/// Anything that maps an input vector to its quantized approximation.
pub trait Reconstruct {
    fn reconstruct(&self, x: &FloatVector) -> Result<FloatVector>;
}

impl Reconstruct for ScaledBinaryQuantization {
    fn reconstruct(&self, x: &FloatVector) -> Result<FloatVector> {
        if x.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), actual: x.len() });
        }
        Ok(self.reconstruction())
    }
}

impl Reconstruct for PackedQuantizedVector {
    fn reconstruct(&self, x: &FloatVector) -> Result<FloatVector> {
        if x.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), actual: x.len() });
        }
        FloatVector::new(PackedQuantizedVector::reconstruct(self))
    }
}

/// Reconstruction of `x` under `q`.
pub fn reconstruct<Q: Reconstruct + ?Sized>(q: &Q, x: &FloatVector) -> Result<FloatVector> {
    q.reconstruct(x)
}

/// Mean squared reconstruction error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantizationObjective {
    pub mse: f64,
}

/// `(1/N) sum_i (x_i - xq_i)^2`, summed pairwise.
pub fn mse(x: &[f64], xq: &[f64]) -> Result<f64> {
    if x.len() != xq.len() {
        return Err(Error::LengthMismatch { expected: x.len(), actual: xq.len() });
    }
    if x.is_empty() {
        return Err(Error::Empty);
    }
    Ok(pairwise_sum_by(x.len(), |i| {
        let d = x[i] - xq[i];
        d * d
    }) / x.len() as f64)
}

pub fn objective<Q: Reconstruct + ?Sized>(x: &FloatVector, q: &Q) -> Result<QuantizationObjective> {
    let xq = q.reconstruct(x)?;
    Ok(QuantizationObjective { mse: mse(x.as_slice(), xq.as_slice())? })
}

/// Dispatches to the quantizer named by `method`. Lloyd results are
/// returned as their reconstruction only.
pub fn quantize(x: &FloatVector, method: Method, k: usize) -> Result<Quantized> {
    method.check_bits(k)?;
    Ok(match method {
        Method::Ls1 => Quantized::Scaled(quantize_ls1(x)),
        Method::Ls2 => Quantized::Scaled(quantize_ls2(x)),
        Method::Ternary => Quantized::Scaled(quantize_ternary(x)),
        Method::Greedy => Quantized::Scaled(quantize_greedy(x, k)?),
        Method::Lloyd => Quantized::Lloyd(quantize_lloyd(x, k)?),
    })
}

/// Either family of quantizer output.
#[derive(Debug, Clone)]
pub enum Quantized {
    Scaled(ScaledBinaryQuantization),
    Lloyd(LloydQuantizer),
}

impl Quantized {
    /// Scaled levels, or the codebook for Lloyd.
    pub fn levels(&self) -> &[f64] {
        match self {
            Quantized::Scaled(q) => q.levels(),
            Quantized::Lloyd(q) => q.codebook(),
        }
    }
}

impl Reconstruct for Quantized {
    fn reconstruct(&self, x: &FloatVector) -> Result<FloatVector> {
        match self {
            Quantized::Scaled(q) => q.reconstruct(x),
            Quantized::Lloyd(q) => q.reconstruct(x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(v: &[f64]) -> FloatVector {
        FloatVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn sign_convention() {
        assert_eq!(sign(0.0), 1);
        assert_eq!(sign(-0.0), 1);
        assert_eq!(sign(-3.2), -1);
        assert_eq!(sign(7.0), 1);
    }

    #[test]
    fn reconstruct_examples() {
        let q = PackedQuantizedVector::new(vec![2.5], vec![BitPlane::pack(&[1, -1])]).unwrap();
        assert_eq!(reconstruct(&q, &fv(&[0.0, 0.0])).unwrap().as_slice(), &[2.5, -2.5]);

        let q = PackedQuantizedVector::new(
            vec![2.0, 1.0],
            vec![BitPlane::pack(&[1, 1, -1, -1]), BitPlane::pack(&[-1, 1, 1, -1])],
        )
        .unwrap();
        let r = reconstruct(&q, &fv(&[0.0; 4])).unwrap();
        assert_eq!(r.as_slice(), &[1.0, 3.0, -1.0, -3.0]);
        assert!(matches!(reconstruct(&q, &fv(&[0.0; 3])), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn objective_examples() {
        assert_eq!(objective(&fv(&[1.0, -1.0]), &quantize_ls1(&fv(&[1.0, -1.0]))).unwrap().mse, 0.0);
        let x = fv(&[0.0, 2.0]);
        let q = quantize_ls1(&x);
        assert_eq!(q.levels(), &[1.0]);
        assert_eq!(objective(&x, &q).unwrap().mse, 1.0);
        let x = fv(&[1.0, 1.0, 3.0, 3.0]);
        assert_eq!(objective(&x, &quantize_ls2(&x)).unwrap().mse, 0.0);
        assert!(objective(&fv(&[1.0]), &q).is_err());
    }

    #[test]
    fn method_bits_contract() {
        assert!(Method::Ls1.check_bits(1).is_ok());
        assert!(Method::Ls1.check_bits(2).is_err());
        assert!(Method::Ls2.check_bits(2).is_ok());
        assert!(Method::Ternary.check_bits(1).is_err());
        assert!(Method::Greedy.check_bits(0).is_err());
        assert!(Method::Greedy.check_bits(16).is_ok());
        assert!(Method::Greedy.check_bits(17).is_err());
        assert!(Method::Lloyd.check_bits(9).is_err());
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("gf2".parse::<Method>().is_err());
    }

    #[test]
    fn fold_planes_two_bit_example() {
        let planes = fold_planes(&[0.5, 1.5], &[1.0, 0.5]);
        assert_eq!(planes[0].unpack(), vec![1, 1]);
        assert_eq!(planes[1].unpack(), vec![-1, 1]);
    }
}
