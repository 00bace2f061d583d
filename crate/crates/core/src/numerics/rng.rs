use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::matrix::CVector;

/// A reproducible random stream identified by `(seed, stream)`.
///
/// Backed by ChaCha8 with the stream id as its 64-bit nonce, so the output is
/// platform independent. [`RngStream::derive`] produces child streams from a key
/// without consuming the parent, which is how per-row and per-trial streams
/// stay identical under any thread count.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Fresh child stream keyed by `key`; independent of how much of `self` was consumed.
    pub fn derive(&self, key: u64) -> RngStream {
        RngStream::new(self.seed, splitmix64(self.stream.rotate_left(23) ^ splitmix64(key)))
    }

    /// Child stream keyed by a sequence of keys.
    pub fn derive_path(&self, keys: &[u64]) -> RngStream {
        keys.iter().fold(self.clone(), |s, &k| s.derive(k))
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform on `{0, …, n-1}`.
    pub fn uniform_index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// `(g1 + i g2) / sqrt(2)` with independent standard normals, so `E|z|^2 = 1`.
    pub fn complex_normal(&mut self) -> Complex64 {
        let re = self.standard_normal();
        let im = self.standard_normal();
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    /// `k` distinct indices from `{0, …, n-1}`, in sampling order.
    pub fn sample_without_replacement(&mut self, n: usize, k: usize) -> Vec<usize> {
        rand::seq::index::sample(&mut self.rng, n, k).into_vec()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// I.i.d. standard complex Gaussian direction rescaled to `|n|_2 = target_norm`.
pub fn complex_gaussian_vector(rng: &mut RngStream, m: usize, target_norm: f64) -> CVector {
    let mut v: CVector = (0..m).map(|_| rng.complex_normal()).collect();
    if target_norm == 0.0 {
        v.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        return v;
    }
    let norm = super::norm2(&v);
    if norm > 0.0 {
        let scale = target_norm / norm;
        v.iter_mut().for_each(|z| *z *= scale);
    }
    v
}

/// Maps `u` in `[0, 1]` to `cos(pi u)`, which is Chebyshev distributed when `u` is uniform.
pub fn chebyshev_point(u: f64) -> f64 {
    (std::f64::consts::PI * u).cos()
}

/// One draw from the Chebyshev measure `dnu = pi^-1 (1 - t^2)^-1/2 dt` on `[-1, 1]`.
pub fn sample_chebyshev_point(rng: &mut RngStream) -> f64 {
    chebyshev_point(rng.uniform())
}
