use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fnv1a;

/// Seeded random stream addressed by a derivation path.
///
/// The draw sequence is a pure function of `(seed, path)`. Children are
/// derived from the path only, never from the parent's draw state, so
/// handing children to workers keeps results reproducible.
#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    path: Vec<String>,
    rng: ChaCha8Rng,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn derive_key(seed: u64, path: &[String]) -> u64 {
    path.iter()
        .fold(splitmix(seed), |h, tag| splitmix(h ^ fnv1a(tag.as_bytes())))
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self::at(seed, Vec::new())
    }

    fn at(seed: u64, path: Vec<String>) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(derive_key(seed, &path));
        RandomStream { seed, path, rng }
    }

    pub fn child(&self, tag: impl Into<String>) -> Self {
        let mut path = self.path.clone();
        path.push(tag.into());
        Self::at(self.seed, path)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> &[String] {
        &self.path
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn draws(s: &mut RandomStream) -> Vec<u64> {
        (0..8).map(|_| s.gen()).collect()
    }

    #[test]
    fn same_seed_and_path_repeat() {
        let mut a = RandomStream::new(5).child("round").child("3");
        let mut b = RandomStream::new(5).child("round").child("3");
        assert_eq!(draws(&mut a), draws(&mut b));
    }

    #[test]
    fn children_ignore_parent_draw_state() {
        let mut parent = RandomStream::new(5);
        let before = parent.child("x");
        let _ = parent.next_u64();
        let after = parent.child("x");
        assert_eq!(draws(&mut before.clone()), draws(&mut after.clone()));
    }

    #[test]
    fn distinct_paths_differ() {
        let root = RandomStream::new(5);
        assert_ne!(draws(&mut root.child("a")), draws(&mut root.child("b")));
        assert_ne!(draws(&mut root.child("a")), draws(&mut RandomStream::new(6).child("a")));
        assert_eq!(root.child("a").path(), &["a".to_string()]);
    }
}
