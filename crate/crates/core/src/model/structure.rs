use std::collections::HashSet;
use std::ops::Range;

use super::ModelError;
use crate::scalar::Scalar;

/// Partition of the `N` configuration coordinates into `n` blocks.
///
/// Coordinates are stored block-major: block `r` occupies the global index
/// range [`BlockStructure::range`]. Block and coordinate indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockStructure {
    names: Vec<Vec<String>>,
    offsets: Vec<usize>,
    flat: Vec<String>,
}

impl BlockStructure {
    pub fn new(names: Vec<Vec<String>>) -> Result<Self, ModelError> {
        if names.is_empty() {
            return Err(ModelError::Structure("at least one block is required".into()));
        }
        let mut seen = HashSet::new();
        let mut offsets = Vec::with_capacity(names.len() + 1);
        let mut flat = Vec::new();
        for (r, block) in names.iter().enumerate() {
            if block.is_empty() {
                return Err(ModelError::Structure(format!("block {} is empty", r + 1)));
            }
            offsets.push(flat.len());
            for name in block {
                if !seen.insert(name.as_str()) {
                    return Err(ModelError::Structure(format!("coordinate `{name}` declared twice")));
                }
                flat.push(name.clone());
            }
        }
        offsets.push(flat.len());
        Ok(Self { names, offsets, flat })
    }

    /// Blocks with default names `q1..qN`.
    pub fn with_sizes(sizes: &[usize]) -> Result<Self, ModelError> {
        let mut k = 0;
        let names = sizes
            .iter()
            .map(|&s| {
                (0..s)
                    .map(|_| {
                        k += 1;
                        format!("q{k}")
                    })
                    .collect()
            })
            .collect();
        Self::new(names)
    }

    pub fn n_blocks(&self) -> usize {
        self.names.len()
    }

    /// Total number of coordinates `N`.
    pub fn dim(&self) -> usize {
        self.flat.len()
    }

    pub fn size(&self, r: usize) -> usize {
        self.offsets[r + 1] - self.offsets[r]
    }

    pub fn sizes(&self) -> Vec<usize> {
        (0..self.n_blocks()).map(|r| self.size(r)).collect()
    }

    pub fn range(&self, r: usize) -> Range<usize> {
        self.offsets[r]..self.offsets[r + 1]
    }

    pub fn global(&self, r: usize, i: usize) -> usize {
        assert!(i < self.size(r), "coordinate {i} outside block {r}");
        self.offsets[r] + i
    }

    /// Inverse of [`global`](Self::global).
    pub fn local(&self, k: usize) -> (usize, usize) {
        assert!(k < self.dim(), "coordinate index {k} out of range");
        let r = self.offsets.partition_point(|&o| o <= k) - 1;
        (r, k - self.offsets[r])
    }

    pub fn block_of(&self, k: usize) -> usize {
        self.local(k).0
    }

    pub fn block_names(&self, r: usize) -> &[String] {
        &self.names[r]
    }

    /// All coordinate names in global order.
    pub fn names(&self) -> &[String] {
        &self.flat
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.flat.iter().position(|n| n == name)
    }
}

/// A point of `T*M`: positions and conjugate momenta in global order.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint<T = f64> {
    pub q: Vec<T>,
    pub p: Vec<T>,
}

impl<T: Scalar> PhasePoint<T> {
    pub fn new(q: Vec<T>, p: Vec<T>) -> Self {
        assert_eq!(q.len(), p.len(), "position and momentum lengths differ");
        Self { q, p }
    }

    pub fn at_rest(q: Vec<T>) -> Self {
        let p = vec![T::zero(); q.len()];
        Self { q, p }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// Splits a flat `[q.., p..]` state (extra trailing entries are ignored).
    pub fn from_state(state: &[T], n: usize) -> Self {
        Self { q: state[..n].to_vec(), p: state[n..2 * n].to_vec() }
    }

    pub fn to_state(&self) -> Vec<T> {
        self.q.iter().chain(&self.p).copied().collect()
    }

    pub fn block_q<'a>(&'a self, s: &BlockStructure, r: usize) -> &'a [T] {
        &self.q[s.range(r)]
    }

    pub fn block_p<'a>(&'a self, s: &BlockStructure, r: usize) -> &'a [T] {
        &self.p[s.range(r)]
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> PhasePoint<U> {
        PhasePoint { q: self.q.iter().map(|&x| f(x)).collect(), p: self.p.iter().map(|&x| f(x)).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_maps_are_mutually_inverse() {
        let s = BlockStructure::with_sizes(&[1, 2, 3]).unwrap();
        assert_eq!(s.dim(), 6);
        assert_eq!(s.names(), ["q1", "q2", "q3", "q4", "q5", "q6"]);
        for k in 0..s.dim() {
            let (r, i) = s.local(k);
            assert_eq!(s.global(r, i), k);
        }
        assert_eq!(s.local(3), (2, 0));
        assert_eq!(s.range(1), 1..3);
    }

    #[test]
    fn duplicate_and_empty_blocks_are_rejected() {
        assert!(BlockStructure::new(vec![vec!["a".into()], vec!["a".into()]]).is_err());
        assert!(BlockStructure::new(vec![vec![]]).is_err());
        assert!(BlockStructure::new(vec![]).is_err());
    }

    #[test]
    fn phase_point_slices() {
        let s = BlockStructure::with_sizes(&[1, 2]).unwrap();
        let pt = PhasePoint::new(vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]);
        assert_eq!(pt.block_q(&s, 1), &[2.0, 3.0]);
        assert_eq!(pt.block_p(&s, 0), &[4.0]);
        assert_eq!(PhasePoint::from_state(&pt.to_state(), 3), pt);
    }
}
