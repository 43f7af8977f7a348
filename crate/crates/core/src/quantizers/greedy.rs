use super::{fold_planes, sign, Method, ScaledBinaryQuantization};
use crate::bitkernel::PackedQuantizedVector;
use crate::error::{Error, Result};
use crate::tensor::{pairwise_sum_by, FloatVector};

pub const MAX_GREEDY_BITS: usize = 16;

/// Greedy foldable quantization: starting from `r = x`, repeat `k` times
/// `v_i = mean(|r|)`, `s_i = sign(r)`, `r -= v_i s_i`.
///
/// Levels are reported in generation order and are not re-sorted.
pub fn quantize_greedy(x: &FloatVector, k: usize) -> Result<ScaledBinaryQuantization> {
    if !(1..=MAX_GREEDY_BITS).contains(&k) {
        return Err(Error::InvalidParameter(format!("greedy bits must be in 1..={MAX_GREEDY_BITS}, got {k}")));
    }
    let n = x.len();
    let mut residual = x.as_slice().to_vec();
    let mut levels = Vec::with_capacity(k);
    for _ in 0..k {
        let v = pairwise_sum_by(n, |i| residual[i].abs()) / n as f64;
        for r in residual.iter_mut() {
            *r -= v * sign(*r) as f64;
        }
        levels.push(v);
    }
    // fold_planes replays the same residual arithmetic, so the planes are
    // exactly the signs observed above.
    let planes = fold_planes(x.as_slice(), &levels);
    Ok(ScaledBinaryQuantization {
        method: Method::Greedy,
        packed: PackedQuantizedVector::new(levels, planes)?,
    })
}
