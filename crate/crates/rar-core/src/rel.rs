//! Dense bit-set relations over event indices.
//!
//! States in this crate are small (tens of events), so relations are stored
//! as one bit row per event. Closure, composition and cycle search are all
//! plain bit operations, which keeps the per-state analysis cheap enough to
//! run the full axiom battery on every explored configuration.

pub const WORD: usize = 64;

#[inline]
fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

/// A subset of `0..n` as a bit vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitSet {
    n: usize,
    bits: Vec<u64>,
}

impl BitSet {
    pub fn new(n: usize) -> Self {
        BitSet {
            n,
            bits: vec![0; words_for(n)],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|w| *w == 0)
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        debug_assert!(i < self.n);
        self.bits[i / WORD] |= 1u64 << (i % WORD);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        self.bits[i / WORD] &= !(1u64 << (i % WORD));
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        debug_assert!(i < self.n);
        self.bits[i / WORD] & (1u64 << (i % WORD)) != 0
    }

    pub fn union_with(&mut self, other: &BitSet) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    pub fn intersects(&self, other: &BitSet) -> bool {
        self.bits.iter().zip(&other.bits).any(|(a, b)| a & b != 0)
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(|&i| self.contains(i))
    }
}

/// A binary relation on `0..n` stored row-major: `row(a)` is the set of `b`
/// with `(a, b)` in the relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rel {
    n: usize,
    rows: Vec<u64>, // n * words_for(n), row-major
}

impl Rel {
    pub fn new(n: usize) -> Self {
        Rel {
            n,
            rows: vec![0; n * words_for(n)],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    fn w(&self) -> usize {
        words_for(self.n)
    }

    #[inline]
    pub fn insert(&mut self, a: usize, b: usize) {
        debug_assert!(a < self.n && b < self.n);
        let w = self.w();
        self.rows[a * w + b / WORD] |= 1u64 << (b % WORD);
    }

    #[inline]
    pub fn contains(&self, a: usize, b: usize) -> bool {
        let w = self.w();
        self.rows[a * w + b / WORD] & (1u64 << (b % WORD)) != 0
    }

    #[inline]
    pub fn row(&self, a: usize) -> &[u64] {
        let w = self.w();
        &self.rows[a * w..(a + 1) * w]
    }

    pub fn row_set(&self, a: usize) -> BitSet {
        BitSet {
            n: self.n,
            bits: self.row(a).to_vec(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|w| *w == 0)
    }

    pub fn union(&self, other: &Rel) -> Rel {
        debug_assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (a, b) in out.rows.iter_mut().zip(&other.rows) {
            *a |= b;
        }
        out
    }

    /// Relational composition `self ; other`.
    pub fn compose(&self, other: &Rel) -> Rel {
        debug_assert_eq!(self.n, other.n);
        let w = self.w();
        let mut out = Rel::new(self.n);
        for a in 0..self.n {
            let row_a = &self.rows[a * w..(a + 1) * w];
            let out_row = &mut out.rows[a * w..(a + 1) * w];
            for (word_idx, &word) in row_a.iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    let mid = word_idx * WORD + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    for (o, &src) in out_row
                        .iter_mut()
                        .zip(&other.rows[mid * w..(mid + 1) * w])
                    {
                        *o |= src;
                    }
                }
            }
        }
        out
    }

    /// Inverse relation.
    pub fn inverse(&self) -> Rel {
        let mut out = Rel::new(self.n);
        for a in 0..self.n {
            for b in self.row_iter(a) {
                out.insert(b, a);
            }
        }
        out
    }

    /// Exact transitive closure (repeated squaring over the reachability
    /// rows; equivalent to Floyd–Warshall on bit rows).
    pub fn closure(&self) -> Rel {
        let w = self.w();
        let mut out = self.clone();
        for mid in 0..self.n {
            let mid_row = out.rows[mid * w..(mid + 1) * w].to_vec();
            for a in 0..self.n {
                if out.contains(a, mid) {
                    let row_a = &mut out.rows[a * w..(a + 1) * w];
                    for (o, m) in row_a.iter_mut().zip(&mid_row) {
                        *o |= m;
                    }
                }
            }
        }
        out
    }

    /// Reflexive closure.
    pub fn reflexive(&self) -> Rel {
        let mut out = self.clone();
        for i in 0..self.n {
            out.insert(i, i);
        }
        out
    }

    pub fn is_irreflexive(&self) -> bool {
        (0..self.n).all(|i| !self.contains(i, i))
    }

    /// First `a` (ascending) with `(a, a)` in the relation.
    pub fn first_reflexive(&self) -> Option<usize> {
        (0..self.n).find(|&i| self.contains(i, i))
    }

    pub fn row_iter(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&b| self.contains(a, b))
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in self.row_iter(a) {
                out.push((a, b));
            }
        }
        out
    }

    /// True if every pair of `self` is also in `other`.
    pub fn subset_of(&self, other: &Rel) -> bool {
        self.rows
            .iter()
            .zip(&other.rows)
            .all(|(a, b)| a & !b == 0)
    }

    /// Shortest cycle through the edge set, found by BFS from each node in
    /// ascending order; returns the node sequence `v0 v1 .. vk` with
    /// `(vk, v0)` an edge. Among shortest cycles the one with the smallest
    /// starting node is returned.
    pub fn shortest_cycle(&self) -> Option<Vec<usize>> {
        let mut best: Option<Vec<usize>> = None;
        for start in 0..self.n {
            // BFS from start looking for a path back to start.
            let mut pred = vec![usize::MAX; self.n];
            let mut queue = std::collections::VecDeque::new();
            queue.push_back(start);
            let mut seen = BitSet::new(self.n);
            seen.insert(start);
            let mut found = false;
            'bfs: while let Some(v) = queue.pop_front() {
                for nxt in self.row_iter(v) {
                    if nxt == start {
                        pred[start] = v;
                        found = true;
                        break 'bfs;
                    }
                    if !seen.contains(nxt) {
                        seen.insert(nxt);
                        pred[nxt] = v;
                        queue.push_back(nxt);
                    }
                }
            }
            if found {
                let mut cycle = vec![start];
                let mut v = pred[start];
                while v != start {
                    cycle.push(v);
                    v = pred[v];
                }
                cycle.reverse();
                // cycle starts at `start` after reversal? Normalize so the
                // sequence begins at `start`.
                let pos = cycle.iter().position(|&x| x == start).unwrap();
                cycle.rotate_left(pos);
                match &best {
                    Some(b) if b.len() <= cycle.len() => {}
                    _ => best = Some(cycle),
                }
            }
        }
        best
    }
}
