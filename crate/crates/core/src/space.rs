//! Discrete cell-based encodings and the identity-cell equivalence between them.
//!
//! A genotype assigns one symbol per searchable position. Positions inside a
//! segment (a run of normal cells between two fixed reduction cells) may hold
//! an identity cell; where the identity sits inside its segment does not change
//! the network that gets built, so many genotypes share one architecture. The
//! canonical form packs non-identity cells to the front of each segment.

use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MACRONAS_JSON: &str = include_str!("../spaces/macronas.json");
const MACRONAS_LARGE_JSON: &str = include_str!("../spaces/macronas_large.json");

/// On-disk shape of a space description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceDescription {
    pub length: usize,
    pub alphabet_sizes: Vec<usize>,
    pub identity_symbol: Vec<Option<u8>>,
    /// Half-open `[start, end)` index pairs.
    pub segments: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchSpace {
    alphabet_sizes: Vec<usize>,
    identity_symbol: Vec<Option<u8>>,
    segments: Vec<(usize, usize)>,
    labels: Option<Vec<String>>,
}

impl SearchSpace {
    pub fn new(desc: SpaceDescription) -> Result<Self> {
        let SpaceDescription {
            length,
            alphabet_sizes,
            identity_symbol,
            mut segments,
            labels,
        } = desc;
        let bad = |msg: String| Err(Error::InvalidSpace(msg));
        if length == 0 {
            return bad("length must be at least 1".into());
        }
        if alphabet_sizes.len() != length || identity_symbol.len() != length {
            return bad(format!(
                "expected {length} alphabet sizes and identity entries, got {} and {}",
                alphabet_sizes.len(),
                identity_symbol.len()
            ));
        }
        if let Some(labels) = &labels {
            if labels.len() != length {
                return bad(format!("expected {length} labels, got {}", labels.len()));
            }
        }
        for (i, &a) in alphabet_sizes.iter().enumerate() {
            if a < 2 {
                return bad(format!("position {i} has alphabet size {a} < 2"));
            }
            if a > usize::from(u8::MAX) + 1 {
                return bad(format!("position {i} has alphabet size {a} > 256"));
            }
            if let Some(id) = identity_symbol[i] {
                if usize::from(id) >= a {
                    return bad(format!("identity symbol {id} out of range at position {i}"));
                }
            }
        }

        segments.sort_unstable();
        let mut covered = vec![false; length];
        for &(start, end) in &segments {
            if start >= end || end > length {
                return bad(format!("segment [{start}, {end}) is empty or out of range"));
            }
            for (pos, slot) in covered.iter_mut().enumerate().take(end).skip(start) {
                if *slot {
                    return bad(format!("position {pos} belongs to two segments"));
                }
                *slot = true;
            }
            let a = alphabet_sizes[start];
            let id = identity_symbol[start];
            if (start..end).any(|p| alphabet_sizes[p] != a || identity_symbol[p] != id) {
                return Err(Error::HeterogeneousSegment { start, end });
            }
        }
        for pos in 0..length {
            match (covered[pos], identity_symbol[pos].is_some()) {
                (true, false) => {
                    return bad(format!("segment position {pos} has no identity symbol"))
                }
                (false, true) => {
                    return bad(format!("identity-bearing position {pos} is in no segment"))
                }
                _ => {}
            }
        }

        Ok(Self {
            alphabet_sizes,
            identity_symbol,
            segments,
            labels,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::new(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_json(&text)
    }

    /// The 14-variable, three-option space with fixed reduction cells.
    pub fn macronas() -> Self {
        Self::from_json(MACRONAS_JSON).expect("bundled space is valid")
    }

    /// The 17-variable, five-option space with searchable reduction cells.
    pub fn macronas_large() -> Self {
        Self::from_json(MACRONAS_LARGE_JSON).expect("bundled space is valid")
    }

    /// Resolves `builtin:macronas`, `builtin:macronas_large`, or a file path.
    pub fn resolve(name: &str) -> Result<Self> {
        match name {
            "builtin:macronas" => Ok(Self::macronas()),
            "builtin:macronas_large" => Ok(Self::macronas_large()),
            path => Self::load(path),
        }
    }

    pub fn description(&self) -> SpaceDescription {
        SpaceDescription {
            length: self.len(),
            alphabet_sizes: self.alphabet_sizes.clone(),
            identity_symbol: self.identity_symbol.clone(),
            segments: self.segments.clone(),
            labels: self.labels.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.alphabet_sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn alphabet_size(&self, pos: usize) -> usize {
        self.alphabet_sizes[pos]
    }

    pub fn alphabet_sizes(&self) -> &[usize] {
        &self.alphabet_sizes
    }

    pub fn identity(&self, pos: usize) -> Option<u8> {
        self.identity_symbol[pos]
    }

    pub fn segments(&self) -> &[(usize, usize)] {
        &self.segments
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Positions that belong to no segment, in ascending order.
    pub fn free_positions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&p| self.identity_symbol[p].is_none())
    }

    pub fn validate(&self, g: &Genotype) -> Result<()> {
        if g.len() != self.len() {
            return Err(Error::InvalidGenotype(format!(
                "length {} does not match space length {}",
                g.len(),
                self.len()
            )));
        }
        for (pos, (&s, &a)) in g.0.iter().zip(&self.alphabet_sizes).enumerate() {
            if usize::from(s) >= a {
                return Err(Error::InvalidGenotype(format!(
                    "symbol {s} at position {pos} exceeds alphabet size {a}"
                )));
            }
        }
        Ok(())
    }

    pub fn random_genotype<R: Rng + ?Sized>(&self, rng: &mut R) -> Genotype {
        Genotype(
            self.alphabet_sizes
                .iter()
                .map(|&a| rng.gen_range(0..a) as u8)
                .collect(),
        )
    }

    /// Packs the non-identity cells of every segment to the segment front.
    pub fn canonicalize(&self, g: &Genotype) -> Genotype {
        let mut out = g.clone();
        for &(start, end) in &self.segments {
            let id = self.identity_symbol[start].expect("segment positions carry identity");
            let mut write = start;
            for read in start..end {
                let s = g.0[read];
                if s != id {
                    out.0[write] = s;
                    write += 1;
                }
            }
            out.0[write..end].fill(id);
        }
        out
    }

    pub fn is_canonical(&self, g: &Genotype) -> bool {
        self.canonicalize(g) == *g
    }

    /// Number of computationally distinct architectures, in closed form.
    pub fn count_distinct_architectures(&self) -> Result<u128> {
        let mut total: u128 = 1;
        for &(start, end) in &self.segments {
            let a = self.alphabet_sizes[start];
            if self.alphabet_sizes[start..end].iter().any(|&x| x != a) {
                return Err(Error::HeterogeneousSegment { start, end });
            }
            // sum over k = 0..=n of (a-1)^k: k non-identity cells packed in front
            let base = (a - 1) as u128;
            let mut term: u128 = 1;
            let mut sum: u128 = 1;
            for _ in 0..(end - start) {
                term = term.checked_mul(base).ok_or(Error::CountOverflow)?;
                sum = sum.checked_add(term).ok_or(Error::CountOverflow)?;
            }
            total = total.checked_mul(sum).ok_or(Error::CountOverflow)?;
        }
        for pos in self.free_positions() {
            total = total
                .checked_mul(self.alphabet_sizes[pos] as u128)
                .ok_or(Error::CountOverflow)?;
        }
        Ok(total)
    }

    /// Number of raw encodings, the product of all alphabet sizes.
    pub fn encoding_space_size(&self) -> Result<u128> {
        self.alphabet_sizes.iter().try_fold(1u128, |acc, &a| {
            acc.checked_mul(a as u128).ok_or(Error::CountOverflow)
        })
    }

    /// The all-identity genotype.
    pub fn trivial_genotype(&self) -> Result<Genotype> {
        self.identity_symbol
            .iter()
            .enumerate()
            .map(|(pos, id)| id.ok_or(Error::NoTrivialNet(pos)))
            .collect::<Result<Vec<_>>>()
            .map(Genotype)
    }

    /// Identity wherever available and symbol 0 elsewhere. Equal to
    /// [`trivial_genotype`](Self::trivial_genotype) when that exists.
    pub fn trivial_or_fallback(&self) -> Genotype {
        Genotype(self.identity_symbol.iter().map(|id| id.unwrap_or(0)).collect())
    }

    /// Every canonical genotype, in lexicographic order of the per-segment
    /// settings. Callers are expected to check the count first.
    pub fn canonical_genotypes(&self) -> Vec<Genotype> {
        // Each "slot" is either a whole segment or a single free position.
        let mut slots: Vec<(usize, Vec<Vec<u8>>)> = Vec::new();
        let mut seg_iter = self.segments.iter().peekable();
        let mut pos = 0;
        while pos < self.len() {
            if let Some(&&(start, end)) = seg_iter.peek() {
                if start == pos {
                    seg_iter.next();
                    slots.push((start, self.segment_settings(start, end)));
                    pos = end;
                    continue;
                }
            }
            let settings = (0..self.alphabet_sizes[pos]).map(|s| vec![s as u8]).collect();
            slots.push((pos, settings));
            pos += 1;
        }

        let mut out = Vec::new();
        let mut cursor = vec![0usize; slots.len()];
        let mut g = vec![0u8; self.len()];
        loop {
            for (slot, &c) in slots.iter().zip(&cursor) {
                let setting = &slot.1[c];
                g[slot.0..slot.0 + setting.len()].copy_from_slice(setting);
            }
            out.push(Genotype(g.clone()));
            let mut i = slots.len();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                cursor[i] += 1;
                if cursor[i] < slots[i].1.len() {
                    break;
                }
                cursor[i] = 0;
            }
        }
    }

    fn segment_settings(&self, start: usize, end: usize) -> Vec<Vec<u8>> {
        let n = end - start;
        let id = self.identity_symbol[start].expect("segment positions carry identity");
        let others: Vec<u8> = (0..self.alphabet_sizes[start] as u8)
            .filter(|&s| s != id)
            .collect();
        let mut out = vec![vec![id; n]];
        let mut frontier: Vec<Vec<u8>> = vec![Vec::new()];
        for _ in 0..n {
            let mut next = Vec::with_capacity(frontier.len() * others.len());
            for prefix in &frontier {
                for &s in &others {
                    let mut p = prefix.clone();
                    p.push(s);
                    next.push(p);
                }
            }
            for p in &next {
                let mut full = p.clone();
                full.resize(n, id);
                out.push(full);
            }
            frontier = next;
        }
        out
    }
}

/// A fixed-length assignment of symbols to positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Genotype(pub Vec<u8>);

impl Genotype {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    /// Fixed-width decimal key, one digit per position. Falls back to
    /// dot-separated numbers when a symbol does not fit one digit.
    pub fn key(&self) -> String {
        if self.0.iter().all(|&s| s < 10) {
            self.0.iter().map(|&s| char::from(b'0' + s)).collect()
        } else {
            let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
            parts.join(".")
        }
    }

    pub fn parse_key(key: &str) -> Result<Self> {
        let bad = || Error::InvalidGenotype(format!("malformed key {key:?}"));
        if key.contains('.') {
            key.split('.')
                .map(|p| p.parse::<u8>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()
                .map(Genotype)
        } else {
            key.bytes()
                .map(|b| b.is_ascii_digit().then(|| b - b'0').ok_or_else(bad))
                .collect::<Result<Vec<_>>>()
                .map(Genotype)
        }
    }
}

impl fmt::Display for Genotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

impl From<Vec<u8>> for Genotype {
    fn from(v: Vec<u8>) -> Self {
        Genotype(v)
    }
}
