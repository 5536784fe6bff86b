use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geom::{RotationMatrix, UnitQuaternion};
use crate::symmetry::random_rotation;
use crate::{Error, Result};

const PHI: f64 = std::f64::consts::SQRT_2;
const PSI: f64 = 1.533_751_168_755_204_3;

/// `n` quasi-uniform rotations; sample 0 is the identity.
///
/// The rest is a super-Fibonacci spiral of `n - 1` unit quaternions, rotated as a
/// whole by a rotation drawn from `seed` so different seeds give different but
/// equally uniform samples.
pub fn sample_so3(n: usize, seed: u64) -> Result<Vec<RotationMatrix>> {
    if n == 0 {
        return Err(Error::invalid("need at least one rotation sample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset = random_rotation(&mut rng);
    let m = n - 1;
    let mut out = Vec::with_capacity(n);
    out.push(RotationMatrix::identity());
    for i in 0..m {
        let s = i as f64 + 0.5;
        let t = s / m as f64;
        let (r, big_r) = (t.sqrt(), (1.0 - t).sqrt());
        let alpha = TAU * s / PHI;
        let beta = TAU * s / PSI;
        let q = UnitQuaternion::new(r * alpha.sin(), r * alpha.cos(), big_r * beta.sin(), big_r * beta.cos())?;
        out.push(offset * q.to_matrix());
    }
    Ok(out)
}
