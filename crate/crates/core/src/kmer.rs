//! Two-bit packed k-mers and strand canonicalization.
//!
//! Bases are packed most-significant-first into a `u128` (A=00, C=01, G=10,
//! T=11), so for a fixed `k` the numeric order of the packed value is the
//! lexicographic order of the base string.

use std::fmt;

/// Smallest supported k-mer size.
pub const MIN_K: usize = 3;
/// Largest supported k-mer size (126 bits of a `u128`).
pub const MAX_K: usize = 63;

/// Returns `Some(code)` for an upper- or lower-case nucleotide.
#[inline]
pub fn base_code(b: u8) -> Option<u8> {
    match b {
        b'A' | b'a' => Some(0),
        b'C' | b'c' => Some(1),
        b'G' | b'g' => Some(2),
        b'T' | b't' => Some(3),
        _ => None,
    }
}

#[inline]
pub fn code_base(code: u8) -> u8 {
    b"ACGT"[(code & 3) as usize]
}

#[inline]
pub fn complement_base(b: u8) -> u8 {
    match b {
        b'A' => b'T',
        b'C' => b'G',
        b'G' => b'C',
        b'T' => b'A',
        other => other,
    }
}

/// Checks that `k` is odd and within `[MIN_K, MAX_K]`.
pub fn validate_k(k: usize) -> Result<(), KmerError> {
    if (MIN_K..=MAX_K).contains(&k) && k % 2 == 1 {
        Ok(())
    } else {
        Err(KmerError::InvalidK(k))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KmerError {
    #[error("k must be odd and in [{MIN_K}, {MAX_K}], got {0}")]
    InvalidK(usize),
    #[error("sequence of length {len} cannot form a {k}-mer")]
    WrongLength { len: usize, k: usize },
    #[error("invalid nucleotide {0:?}")]
    InvalidBase(char),
}

#[inline]
fn mask(k: usize) -> u128 {
    (1u128 << (2 * k)) - 1
}

/// A k-mer in a specific orientation. The length `k` is carried by the
/// owning context (graph, index, search parameters), not by the value.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Kmer(u128);

impl Kmer {
    pub fn from_bits(bits: u128) -> Self {
        Kmer(bits)
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    pub fn from_bytes(seq: &[u8]) -> Result<Self, KmerError> {
        let k = seq.len();
        validate_k(k).map_err(|_| KmerError::WrongLength { len: k, k })?;
        let mut bits = 0u128;
        for &b in seq {
            let code = base_code(b).ok_or(KmerError::InvalidBase(b as char))?;
            bits = (bits << 2) | code as u128;
        }
        Ok(Kmer(bits))
    }

    /// Base code at position `i` (0 = leftmost).
    #[inline]
    pub fn code_at(self, i: usize, k: usize) -> u8 {
        ((self.0 >> (2 * (k - 1 - i))) & 3) as u8
    }

    #[inline]
    pub fn first_code(self, k: usize) -> u8 {
        self.code_at(0, k)
    }

    #[inline]
    pub fn last_code(self) -> u8 {
        (self.0 & 3) as u8
    }

    pub fn to_bytes(self, k: usize) -> Vec<u8> {
        (0..k).map(|i| code_base(self.code_at(i, k))).collect()
    }

    pub fn to_string(self, k: usize) -> String {
        String::from_utf8(self.to_bytes(k)).expect("ACGT is ascii")
    }

    pub fn reverse_complement(self, k: usize) -> Self {
        let mut fwd = self.0;
        let mut rc = 0u128;
        for _ in 0..k {
            rc = (rc << 2) | (3 - (fwd & 3));
            fwd >>= 2;
        }
        Kmer(rc)
    }

    /// Drops the first base and appends `code` on the right.
    #[inline]
    pub fn extend_right(self, code: u8, k: usize) -> Self {
        Kmer(((self.0 << 2) | code as u128) & mask(k))
    }

    /// Drops the last base and prepends `code` on the left.
    #[inline]
    pub fn extend_left(self, code: u8, k: usize) -> Self {
        Kmer((self.0 >> 2) | ((code as u128) << (2 * (k - 1))))
    }

    pub fn canonical(self, k: usize) -> CanonicalKmer {
        let rc = self.reverse_complement(k);
        CanonicalKmer(self.min(rc))
    }

    /// Whether this orientation is already the canonical one.
    pub fn is_canonical(self, k: usize) -> bool {
        self <= self.reverse_complement(k)
    }

    /// Packs into `ceil(k/4)` bytes, first base in the top two bits of byte 0.
    pub fn pack(self, k: usize, out: &mut Vec<u8>) {
        let nbytes = packed_len(k);
        let mut byte = 0u8;
        for i in 0..nbytes * 4 {
            let code = if i < k { self.code_at(i, k) } else { 0 };
            byte = (byte << 2) | code;
            if i % 4 == 3 {
                out.push(byte);
                byte = 0;
            }
        }
    }

    pub fn unpack(bytes: &[u8], k: usize) -> Self {
        let mut bits = 0u128;
        for i in 0..k {
            let code = (bytes[i / 4] >> (6 - 2 * (i % 4))) & 3;
            bits = (bits << 2) | code as u128;
        }
        Kmer(bits)
    }
}

impl fmt::Debug for Kmer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Kmer({:#x})", self.0)
    }
}

/// Bytes used by one packed k-mer.
pub fn packed_len(k: usize) -> usize {
    k.div_ceil(4)
}

/// The lexicographically smaller of a k-mer and its reverse complement.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct CanonicalKmer(Kmer);

impl CanonicalKmer {
    pub fn kmer(self) -> Kmer {
        self.0
    }

    /// Wraps a k-mer that is known to be canonical.
    pub fn from_canonical(kmer: Kmer, k: usize) -> Option<Self> {
        kmer.is_canonical(k).then_some(CanonicalKmer(kmer))
    }

    pub fn from_str(seq: &str, k: usize) -> Result<Self, KmerError> {
        validate_k(k)?;
        if seq.len() != k {
            return Err(KmerError::WrongLength { len: seq.len(), k });
        }
        Ok(Kmer::from_bytes(seq.as_bytes())?.canonical(k))
    }

    pub fn to_string(self, k: usize) -> String {
        self.0.to_string(k)
    }
}

impl fmt::Debug for CanonicalKmer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalKmer({:#x})", self.0 .0)
    }
}

pub fn canonicalize(kmer: Kmer, k: usize) -> CanonicalKmer {
    kmer.canonical(k)
}

/// Rolling window over the clean (ACGT-only) segments of a read.
///
/// Yields every k-mer of every maximal clean segment of length `>= k`,
/// together with a flag marking the first window of each segment so callers
/// know where adjacency is broken.
pub struct KmerWindows<'a> {
    seq: &'a [u8],
    k: usize,
    pos: usize,
    fwd: u128,
    rc: u128,
    filled: usize,
}

/// One window produced by [`KmerWindows`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub forward: Kmer,
    pub reverse: Kmer,
    /// True when this window does not overlap the previous one emitted.
    pub segment_start: bool,
}

impl Window {
    pub fn canonical(&self) -> CanonicalKmer {
        CanonicalKmer(self.forward.min(self.reverse))
    }

    /// True when the read runs along the canonical strand here.
    pub fn is_forward(&self) -> bool {
        self.forward <= self.reverse
    }
}

impl<'a> KmerWindows<'a> {
    pub fn new(seq: &'a [u8], k: usize) -> Self {
        KmerWindows {
            seq,
            k,
            pos: 0,
            fwd: 0,
            rc: 0,
            filled: 0,
        }
    }
}

impl Iterator for KmerWindows<'_> {
    type Item = Window;

    fn next(&mut self) -> Option<Window> {
        let k = self.k;
        let m = mask(k);
        while self.pos < self.seq.len() {
            let b = self.seq[self.pos];
            self.pos += 1;
            match base_code(b) {
                Some(code) => {
                    self.fwd = ((self.fwd << 2) | code as u128) & m;
                    self.rc = (self.rc >> 2) | (((3 - code) as u128) << (2 * (k - 1)));
                    self.filled += 1;
                    if self.filled >= k {
                        return Some(Window {
                            forward: Kmer(self.fwd),
                            reverse: Kmer(self.rc),
                            segment_start: self.filled == k,
                        });
                    }
                }
                None => {
                    self.filled = 0;
                    self.fwd = 0;
                    self.rc = 0;
                }
            }
        }
        None
    }
}

/// Splits a read at non-ACGT symbols and returns every k-mer window of the
/// clean segments, in read order.
pub fn kmerize(read: &[u8], k: usize) -> Vec<Kmer> {
    KmerWindows::new(read, k).map(|w| w.forward).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn strings(kmers: &[Kmer], k: usize) -> Vec<String> {
        kmers.iter().map(|x| x.to_string(k)).collect()
    }

    // string-based reverse complement, independent of the bit path
    fn revcomp_str(s: &str) -> String {
        s.bytes()
            .rev()
            .map(|b| complement_base(b) as char)
            .collect()
    }

    #[test]
    fn kmerize_windows() {
        assert_eq!(strings(&kmerize(b"ACGTA", 3), 3), ["ACG", "CGT", "GTA"]);
        assert_eq!(strings(&kmerize(b"ACGNTAC", 3), 3), ["ACG", "TAC"]);
        assert!(kmerize(b"AC", 3).is_empty());
        assert_eq!(strings(&kmerize(b"acgta", 3), 3), ["ACG", "CGT", "GTA"]);
    }

    #[test]
    fn segment_start_flags() {
        let flags: Vec<bool> = KmerWindows::new(b"ACGTNNACGT", 3)
            .map(|w| w.segment_start)
            .collect();
        assert_eq!(flags, [true, false, true, false]);
    }

    #[test]
    fn canonicalize_examples() {
        let k = 3;
        let acg = Kmer::from_bytes(b"ACG").unwrap();
        assert_eq!(canonicalize(acg, k).to_string(k), "ACG");
        let ttt = Kmer::from_bytes(b"TTT").unwrap();
        assert_eq!(canonicalize(ttt, k).to_string(k), "AAA");
    }

    #[test]
    fn canonical_matches_string_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let k = 21;
        for _ in 0..1000 {
            let s: String = (0..k)
                .map(|_| "ACGT".as_bytes()[rng.gen_range(0..4)] as char)
                .collect();
            let rc = revcomp_str(&s);
            let expected = if s <= rc { s.clone() } else { rc.clone() };
            let x = Kmer::from_bytes(s.as_bytes()).unwrap();
            let c = canonicalize(x, k);
            assert_eq!(c.to_string(k), expected);
            assert_eq!(canonicalize(c.kmer(), k), c);
            assert_eq!(x.reverse_complement(k).to_string(k), rc);
            assert_eq!(canonicalize(x.reverse_complement(k), k), c);
        }
    }

    #[test]
    fn rolling_reverse_matches_direct() {
        let seq = b"ACGTTGCANNGGGTACCATTAGC";
        let k = 5;
        for w in KmerWindows::new(seq, k) {
            assert_eq!(w.reverse, w.forward.reverse_complement(k));
        }
    }

    #[test]
    fn pack_layout_is_msb_first() {
        let x = Kmer::from_bytes(b"CGTAC").unwrap();
        let mut out = Vec::new();
        x.pack(5, &mut out);
        // C G T A | C _ _ _  -> 01 10 11 00 | 01 00 00 00
        assert_eq!(out, [0b0110_1100, 0b0100_0000]);
        assert_eq!(Kmer::unpack(&out, 5), x);
    }

    #[test]
    fn invalid_k_rejected() {
        assert!(validate_k(4).is_err());
        assert!(validate_k(1).is_err());
        assert!(validate_k(65).is_err());
        assert!(validate_k(63).is_ok());
        assert!(validate_k(3).is_ok());
    }

    proptest! {
        #[test]
        fn pack_round_trip(seq in "[ACGT]{63}", k in (1usize..=31).prop_map(|h| 2 * h + 1)) {
            let x = Kmer::from_bytes(&seq.as_bytes()[..k]).unwrap();
            let mut buf = Vec::new();
            x.pack(k, &mut buf);
            prop_assert_eq!(buf.len(), packed_len(k));
            prop_assert_eq!(Kmer::unpack(&buf, k), x);
        }

        #[test]
        fn extend_right_matches_string(seq in "[ACGT]{22}") {
            let k = 21;
            let a = Kmer::from_bytes(&seq.as_bytes()[..k]).unwrap();
            let b = Kmer::from_bytes(&seq.as_bytes()[1..]).unwrap();
            prop_assert_eq!(a.extend_right(b.last_code(), k), b);
            prop_assert_eq!(b.extend_left(a.first_code(k), k), a);
        }
    }
}
