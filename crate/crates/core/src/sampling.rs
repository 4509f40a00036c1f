//! Ancestral sampling from a homogeneous tree model, the memoryless binary
//! symmetric channel, and reduction of a batch to pairwise joint counts.
//!
//! Batches are stored bit-sliced: one run of `u64` words per variable, with
//! sample `k` at bit `k % 64` of word `k / 64`. Joint counts then reduce to
//! popcounts over word pairs. Row (per-sample) packing is available through
//! [`SampleBatch::row_bytes`] and the hex dump.

use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};
use crate::rng::{BernoulliMask, Domain, StreamKey, CHANNEL_LANE_OFFSET};
use crate::tree::{check_q, check_theta, TreeStructure};
use rand::RngCore;

/// `n` binary samples of dimension `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleBatch {
    n: usize,
    p: usize,
    words: usize,
    cols: Vec<u64>,
}

impl SampleBatch {
    /// All-zero batch.
    pub fn zeros(n: usize, p: usize) -> Result<Self> {
        if n == 0 {
            return invalid("a sample batch needs n >= 1");
        }
        if p == 0 {
            return invalid("a sample batch needs p >= 1");
        }
        let words = n.div_ceil(64);
        Ok(SampleBatch { n, p, words, cols: vec![0; words * p] })
    }

    /// Builds a batch from explicit rows of 0/1 values.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let p = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut batch = SampleBatch::zeros(rows.len(), p)?;
        for (k, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != p {
                return invalid(format!("row {k} has {} entries, expected {p}", row.len()));
            }
            for (i, &bit) in row.iter().enumerate() {
                match bit {
                    0 => {}
                    1 => batch.cols[i * batch.words + k / 64] |= 1 << (k % 64),
                    other => return invalid(format!("entry ({k},{i}) is {other}, expected 0 or 1")),
                }
            }
        }
        Ok(batch)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn get(&self, sample: usize, var: usize) -> u8 {
        ((self.column(var)[sample / 64] >> (sample % 64)) & 1) as u8
    }

    pub fn row(&self, sample: usize) -> Vec<u8> {
        (0..self.p).map(|i| self.get(sample, i)).collect()
    }

    /// Bit-packed words of one variable; bits past `n` are zero.
    pub fn column(&self, var: usize) -> &[u64] {
        &self.cols[var * self.words..(var + 1) * self.words]
    }

    fn column_mut(&mut self, var: usize) -> &mut [u64] {
        &mut self.cols[var * self.words..(var + 1) * self.words]
    }

    fn tail_mask(&self) -> u64 {
        match self.n % 64 {
            0 => u64::MAX,
            r => (1u64 << r) - 1,
        }
    }

    /// One sample packed little-endian within bytes: variable `i` is bit
    /// `i % 8` of byte `i / 8`.
    pub fn row_bytes(&self, sample: usize) -> Vec<u8> {
        let mut out = vec![0u8; self.p.div_ceil(8)];
        for i in 0..self.p {
            out[i / 8] |= self.get(sample, i) << (i % 8);
        }
        out
    }

    /// Hex dump, one sample per line, bytes as produced by [`Self::row_bytes`].
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.n * (self.p.div_ceil(8) * 2 + 1));
        for k in 0..self.n {
            for b in self.row_bytes(k) {
                let _ = write!(s, "{b:02x}");
            }
            s.push('\n');
        }
        s
    }

    pub fn from_hex(p: usize, text: &str) -> Result<Self> {
        let width = p.div_ceil(8);
        let mut rows = Vec::new();
        for (line_no, line) in text.lines().map(str::trim).filter(|l| !l.is_empty()).enumerate() {
            if line.len() != 2 * width {
                return Err(Error::Parse(format!("hex row {line_no} has {} digits, expected {}", line.len(), 2 * width)));
            }
            let mut row = Vec::with_capacity(p);
            let bytes: Vec<u8> = (0..width)
                .map(|b| u8::from_str_radix(&line[2 * b..2 * b + 2], 16))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("hex row {line_no}: {e}")))?;
            for i in 0..p {
                row.push((bytes[i / 8] >> (i % 8)) & 1);
            }
            if bytes.last().is_some_and(|&last| !p.is_multiple_of(8) && last >> (p % 8) != 0) {
                return Err(Error::Parse(format!("hex row {line_no} sets bits beyond p={p}")));
            }
            rows.push(row);
        }
        SampleBatch::from_rows(&rows)
    }
}

/// Precomputed ancestral order for one tree.
#[derive(Clone, Debug)]
pub struct Sampler {
    p: usize,
    root: usize,
    // (child, parent) in BFS order from the root
    steps: Vec<(usize, usize)>,
    edge_flip: BernoulliMask,
}

impl Sampler {
    pub fn new(t: &TreeStructure, theta: f64) -> Result<Self> {
        check_theta(theta)?;
        let order = t.bfs_order(0);
        let steps = order.iter().filter_map(|&(v, parent)| parent.map(|u| (v, u))).collect();
        Ok(Sampler { p: t.p(), root: 0, steps, edge_flip: BernoulliMask::new(theta) })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Overwrites `batch` with fresh samples drawn from the stream `key`.
    /// Variable `v` reads lane `v` only.
    pub fn fill(&self, key: &StreamKey, batch: &mut SampleBatch) {
        debug_assert_eq!(batch.p, self.p);
        let tail = batch.tail_mask();
        let words = batch.words;
        {
            let mut rng = key.lane(self.root as u64);
            let col = batch.column_mut(self.root);
            for w in col.iter_mut() {
                *w = rng.next_u64();
            }
            col[words - 1] &= tail;
        }
        for &(child, parent) in &self.steps {
            let mut rng = key.lane(child as u64);
            for w in 0..words {
                let flips = self.edge_flip.draw(&mut rng);
                let src = batch.cols[parent * words + w];
                batch.cols[child * words + w] = src ^ flips;
            }
            batch.cols[child * words + words - 1] &= tail;
        }
    }
}

/// Memoryless binary symmetric channel with crossover `q`.
#[derive(Clone, Debug)]
pub struct Channel {
    flip: BernoulliMask,
}

impl Channel {
    pub fn new(q: f64) -> Result<Self> {
        check_q(q)?;
        Ok(Channel { flip: BernoulliMask::new(q) })
    }

    pub fn is_noiseless(&self) -> bool {
        self.flip.probability_is_zero()
    }

    /// Flips each bit of `batch` independently; variable `v` reads lane
    /// `CHANNEL_LANE_OFFSET + v`.
    pub fn corrupt(&self, key: &StreamKey, batch: &mut SampleBatch) {
        if self.is_noiseless() {
            return;
        }
        let tail = batch.tail_mask();
        let words = batch.words;
        for v in 0..batch.p {
            let mut rng = key.lane(CHANNEL_LANE_OFFSET + v as u64);
            let col = batch.column_mut(v);
            for w in col.iter_mut() {
                *w ^= self.flip.draw(&mut rng);
            }
            col[words - 1] &= tail;
        }
    }
}

/// Draws `n` i.i.d. samples from the homogeneous model on `t`.
pub fn sample_batch(t: &TreeStructure, theta: f64, n: usize, seed: u64) -> Result<SampleBatch> {
    let sampler = Sampler::new(t, theta)?;
    let mut batch = SampleBatch::zeros(n, t.p())?;
    sampler.fill(&StreamKey::new(seed, Domain::Samples, 0), &mut batch);
    Ok(batch)
}

/// Passes every bit of `b` through a BSC(q).
pub fn apply_bsc(b: &SampleBatch, q: f64, seed: u64) -> Result<SampleBatch> {
    let channel = Channel::new(q)?;
    let mut out = b.clone();
    channel.corrupt(&StreamKey::new(seed, Domain::Samples, 0), &mut out);
    Ok(out)
}

/// Joint counts `[c00, c01, c10, c11]` for every unordered pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairStats {
    n: u64,
    p: usize,
    // upper triangle, row-major over i < j
    counts: Vec<[u64; 4]>,
}

#[inline]
fn tri_index(p: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < p);
    i * (2 * p - i - 1) / 2 + (j - i - 1)
}

impl PairStats {
    /// Builds stats from explicit counts, listed for pairs `(0,1), (0,2), …`.
    pub fn from_counts(n: u64, p: usize, counts: Vec<[u64; 4]>) -> Result<Self> {
        if p < 2 {
            return invalid("pair statistics need p >= 2");
        }
        if counts.len() != p * (p - 1) / 2 {
            return invalid(format!("expected {} pairs, got {}", p * (p - 1) / 2, counts.len()));
        }
        if let Some(c) = counts.iter().find(|c| c.iter().sum::<u64>() != n) {
            return invalid(format!("counts {c:?} do not sum to n={n}"));
        }
        Ok(PairStats { n, p, counts })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// `[c00, c01, c10, c11]` with the first index on variable `i`.
    pub fn counts(&self, i: usize, j: usize) -> [u64; 4] {
        assert!(i != j, "pair counts need distinct variables");
        if i < j {
            self.counts[tri_index(self.p, i, j)]
        } else {
            let [c00, c01, c10, c11] = self.counts[tri_index(self.p, j, i)];
            [c00, c10, c01, c11]
        }
    }

    /// `c00 + c11`, the exact integer behind the agreement weight.
    pub fn agreement_count(&self, i: usize, j: usize) -> u64 {
        let c = self.counts(i, j);
        c[0] + c[3]
    }

    /// Fraction of samples on which `i` and `j` agree.
    pub fn agreement_weight(&self, i: usize, j: usize) -> f64 {
        self.agreement_count(i, j) as f64 / self.n as f64
    }

    /// Empirical mutual information in nats.
    pub fn mi_weight(&self, i: usize, j: usize) -> f64 {
        mutual_information(self.counts(i, j))
    }

    /// Iterator over `(i, j)` with `i < j` in storage order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let p = self.p;
        (0..p).flat_map(move |i| (i + 1..p).map(move |j| (i, j)))
    }
}

/// Smallest image of a 2×2 table under row swap, column swap and transpose.
/// Mutual information is invariant under all eight symmetries.
pub fn canonical_table(c: [u64; 4]) -> [u64; 4] {
    let row_swap = |[a, b, c, d]: [u64; 4]| [c, d, a, b];
    let col_swap = |[a, b, c, d]: [u64; 4]| [b, a, d, c];
    let transpose = |[a, b, c, d]: [u64; 4]| [a, c, b, d];
    let mut best = c;
    let mut x = c;
    for k in 0..8 {
        x = if k % 2 == 0 { row_swap(x) } else { col_swap(x) };
        best = best.min(x).min(transpose(x));
    }
    best
}

/// Mutual information (nats) of the empirical joint given by `c`, with
/// `0 · log 0 = 0`. Evaluated on the canonical table so that symmetric
/// count patterns give bit-identical values.
pub fn mutual_information(c: [u64; 4]) -> f64 {
    let [c00, c01, c10, c11] = canonical_table(c);
    let n = (c00 + c01 + c10 + c11) as f64;
    let rows = [(c00 + c01) as f64, (c10 + c11) as f64];
    let cols = [(c00 + c10) as f64, (c01 + c11) as f64];
    let cells = [(c00, 0, 0), (c01, 0, 1), (c10, 1, 0), (c11, 1, 1)];
    let mut mi = 0.0;
    for (cnt, r, s) in cells {
        if cnt > 0 {
            let cnt = cnt as f64;
            mi += cnt / n * (cnt * n / (rows[r] * cols[s])).ln();
        }
    }
    mi.max(0.0)
}

/// Exact joint counts for all pairs.
pub fn pair_stats(b: &SampleBatch) -> PairStats {
    let mut out = PairStats { n: b.n as u64, p: b.p, counts: Vec::new() };
    pair_stats_into(b, &mut out);
    out
}

/// Like [`pair_stats`] but reuses the allocation in `out`.
pub fn pair_stats_into(b: &SampleBatch, out: &mut PairStats) {
    let n = b.n as u64;
    let ones: Vec<u64> = (0..b.p).map(|i| b.column(i).iter().map(|w| w.count_ones() as u64).sum()).collect();
    out.n = n;
    out.p = b.p;
    out.counts.clear();
    for i in 0..b.p {
        let ci = b.column(i);
        for j in i + 1..b.p {
            let cj = b.column(j);
            let c11: u64 = ci.iter().zip(cj).map(|(x, y)| (x & y).count_ones() as u64).sum();
            let c10 = ones[i] - c11;
            let c01 = ones[j] - c11;
            out.counts.push([n - c11 - c10 - c01, c01, c10, c11]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{make_chain, make_star, path_flip_probability, random_tree};

    #[test]
    fn pair_stats_small_cases() {
        let s = pair_stats(&SampleBatch::from_rows(&[[0u8, 1, 1]]).unwrap());
        assert_eq!(s.agreement_weight(0, 1), 0.0);
        assert_eq!(s.agreement_weight(0, 2), 0.0);
        assert_eq!(s.agreement_weight(1, 2), 1.0);

        let s = pair_stats(&SampleBatch::from_rows(&[[1u8, 0, 1], [1, 0, 1]]).unwrap());
        for (i, j) in s.pairs().collect::<Vec<_>>() {
            assert_eq!(s.agreement_weight(i, j), if (i, j) == (0, 2) { 1.0 } else { 0.0 });
        }
        let s = pair_stats(&SampleBatch::from_rows(&[[0u8, 0], [0, 0]]).unwrap());
        assert_eq!(s.agreement_weight(0, 1), 1.0);

        let s = pair_stats(&SampleBatch::from_rows(&[[0u8, 0], [0, 1], [1, 0], [1, 1]]).unwrap());
        assert_eq!(s.counts(0, 1), [1, 1, 1, 1]);
        assert_eq!(s.agreement_weight(0, 1), 0.5);
    }

    #[test]
    fn counts_are_transposed_for_reversed_pairs() {
        let s = pair_stats(&SampleBatch::from_rows(&[[0u8, 1], [0, 1], [1, 1]]).unwrap());
        assert_eq!(s.counts(0, 1), [0, 2, 0, 1]);
        assert_eq!(s.counts(1, 0), [0, 0, 2, 1]);
    }

    #[test]
    fn weight_values() {
        let mi = mutual_information([4, 0, 0, 4]);
        assert!((mi - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(mutual_information([2, 2, 2, 2]), 0.0);
        // 2 · (3/8) ln(3/2) + 2 · (1/8) ln(1/2)
        let expected = 0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln();
        assert!((mutual_information([3, 1, 1, 3]) - expected).abs() < 1e-15);
        assert!((expected - 0.130812035941137).abs() < 1e-12);
        let s = PairStats::from_counts(8, 2, vec![[3, 1, 1, 3]]).unwrap();
        assert_eq!(s.agreement_weight(0, 1), 0.75);
        assert!(PairStats::from_counts(8, 2, vec![[3, 1, 1, 2]]).is_err());
    }

    #[test]
    fn symmetric_tables_have_identical_mi_bits() {
        let c = [5, 2, 7, 11];
        let images = [[7, 11, 5, 2], [2, 5, 11, 7], [5, 7, 2, 11], [11, 7, 2, 5]];
        for img in images {
            assert_eq!(mutual_information(c).to_bits(), mutual_information(img).to_bits());
        }
    }

    #[test]
    fn tiny_theta_gives_constant_rows() {
        let b = sample_batch(&make_star(6).unwrap(), 1e-9, 100, 3).unwrap();
        for k in 0..100 {
            let row = b.row(k);
            assert!(row.iter().all(|&x| x == row[0]));
        }
    }

    #[test]
    fn marginals_and_edge_disagreement() {
        let n = 100_000;
        let t = make_chain(5).unwrap();
        let b = sample_batch(&t, 0.3, n, 21).unwrap();
        let s = pair_stats(&b);
        let nf = n as f64;
        let sd_half = (0.25 / nf).sqrt();
        for i in 0..5 {
            let zeros = b.column(i).iter().map(|w| w.count_ones() as f64).sum::<f64>();
            let frac0 = 1.0 - zeros / nf;
            assert!((frac0 - 0.5).abs() < 3.0 * sd_half, "node {i}: {frac0}");
        }
        for i in 0..5 {
            for j in i + 1..5 {
                let target = path_flip_probability(&t, i, j, 0.3).unwrap();
                let sd = (target * (1.0 - target) / nf).sqrt();
                let rate = 1.0 - s.agreement_weight(i, j);
                assert!((rate - target).abs() < 4.0 * sd, "pair ({i},{j}) rate {rate} vs {target}");
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_rejects_bad_theta() {
        let t = random_tree(8, 4).unwrap();
        assert_eq!(sample_batch(&t, 0.2, 333, 9).unwrap(), sample_batch(&t, 0.2, 333, 9).unwrap());
        assert_ne!(sample_batch(&t, 0.2, 333, 9).unwrap(), sample_batch(&t, 0.2, 333, 10).unwrap());
        assert!(sample_batch(&t, 0.0, 10, 1).is_err());
        assert!(sample_batch(&t, 0.5, 10, 1).is_err());
        assert!(sample_batch(&t, 0.2, 0, 1).is_err());
    }

    #[test]
    fn channel_behaviour() {
        let t = make_chain(4).unwrap();
        let b = sample_batch(&t, 0.2, 500, 1).unwrap();
        assert_eq!(apply_bsc(&b, 0.0, 5).unwrap(), b);
        assert!(apply_bsc(&b, 0.5, 5).is_err());
        assert!(apply_bsc(&b, -0.1, 5).is_err());

        let zeros = SampleBatch::zeros(250_000, 4).unwrap();
        let noisy = apply_bsc(&zeros, 0.25, 8).unwrap();
        let total = (250_000 * 4) as f64;
        let ones: f64 = (0..4).map(|i| noisy.column(i).iter().map(|w| w.count_ones() as f64).sum::<f64>()).sum();
        let sd = (0.25 * 0.75 / total).sqrt();
        assert!((ones / total - 0.25).abs() < 3.0 * sd);

        let near_half = apply_bsc(&zeros, 0.5 - 1e-9, 2).unwrap();
        let ones: f64 = (0..4).map(|i| near_half.column(i).iter().map(|w| w.count_ones() as f64).sum::<f64>()).sum();
        assert!((ones / total - 0.5).abs() < 3.0 * (0.25 / total).sqrt());
    }

    #[test]
    fn hex_dump_round_trip_and_byte_order() {
        let b = SampleBatch::from_rows(&[[1u8, 0, 0, 0, 0, 0, 0, 0, 0, 1], [0, 1, 0, 0, 0, 0, 0, 0, 1, 0]]).unwrap();
        assert_eq!(b.to_hex(), "0102\n0201\n");
        assert_eq!(SampleBatch::from_hex(10, &b.to_hex()).unwrap(), b);
        assert!(SampleBatch::from_hex(10, "0104\n").is_err());
        assert!(SampleBatch::from_hex(10, "01\n").is_err());
    }
}
