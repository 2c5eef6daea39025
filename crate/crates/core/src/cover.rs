//! Covering structures: Hamming-ball covers of `{0,1}^n` used for space
//! splitting, and covering codes over choice vectors `{1..k}^t` used by
//! FastBall. Both are built by greedy set cover and verified exhaustively.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cnf::Assignment;
use crate::error::{Error, Result};
use crate::resource::entropy;

/// Largest block length for which the greedy table over `2^b` points is built.
pub const MAX_BLOCK_BITS: usize = 24;
/// Largest choice space `k^t` handled by exhaustive greedy.
pub const MAX_CHOICE_SPACE: u64 = 10_000_000;

/// Ball radius fraction `ρ = num/den`, kept exact so `⌊ρ·m⌋` never suffers
/// from float rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rho {
    pub num: u32,
    pub den: u32,
}

impl Rho {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidParam("rho denominator is zero".into()));
        }
        Ok(Rho { num, den })
    }

    /// `⌊ρ·m⌋`.
    pub fn floor_mul(self, m: usize) -> usize {
        (m as u64 * self.num as u64 / self.den as u64) as usize
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Rho {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Rho {
    type Err = Error;

    /// Accepts `a/b` or a decimal such as `0.25`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParam(format!("bad rho {s:?}"));
        if let Some((a, b)) = s.split_once('/') {
            return Rho::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 6 {
            return Err(bad());
        }
        let den = 10u32.pow(frac.len() as u32);
        let int: u32 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let frac: u32 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let g = gcd(int * den + frac, den);
        Rho::new((int * den + frac) / g, den / g)
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

/// Lazy greedy set cover over points `0..num_points`, where the candidate
/// sets are the balls around each point. Ties go to the lowest index.
fn greedy_cover(num_points: usize, ball: impl Fn(usize, &mut Vec<usize>)) -> Vec<usize> {
    let mut covered = vec![false; num_points];
    let mut remaining = num_points;
    let mut buf = Vec::new();
    ball(0, &mut buf);
    let full = buf.len();
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> =
        (0..num_points).map(|i| (full, Reverse(i))).collect();
    let mut chosen = Vec::new();
    while remaining > 0 {
        let (stale, Reverse(idx)) = heap.pop().expect("uncovered points remain");
        buf.clear();
        ball(idx, &mut buf);
        let gain = buf.iter().filter(|&&p| !covered[p]).count();
        if gain == 0 {
            continue;
        }
        let fresh = (gain, Reverse(idx));
        if gain < stale && heap.peek().is_some_and(|top| *top > fresh) {
            heap.push(fresh);
            continue;
        }
        for &p in &buf {
            if !covered[p] {
                covered[p] = true;
                remaining -= 1;
            }
        }
        chosen.push(idx);
    }
    chosen
}

/// All masks of `bits` bits with popcount at most `radius`.
fn ball_masks(bits: usize, radius: usize) -> Vec<u64> {
    (0u64..1 << bits)
        .filter(|m| m.count_ones() as usize <= radius)
        .collect()
}

/// Greedy radius-`radius` cover of `{0,1}^bits`, centers as bit masks.
pub fn greedy_binary_cover(bits: usize, radius: usize) -> Result<Vec<u64>> {
    if bits > MAX_BLOCK_BITS {
        return Err(Error::InvalidParam(format!(
            "block of {bits} bits exceeds greedy limit {MAX_BLOCK_BITS}"
        )));
    }
    if radius == 0 {
        return Ok((0u64..1 << bits).collect());
    }
    let masks = ball_masks(bits, radius);
    let cover = greedy_cover(1 << bits, |c, out| {
        out.extend(masks.iter().map(|m| (c as u64 ^ m) as usize))
    });
    Ok(cover.into_iter().map(|c| c as u64).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverSet {
    pub n: usize,
    pub rho: Rho,
    pub d: usize,
    /// Sum of block radii; every point is within this distance of a center.
    pub radius: usize,
    pub block_sizes: Vec<usize>,
    pub block_radii: Vec<usize>,
    pub centers: Vec<Assignment>,
}

impl CoverSet {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// `|centers| / 2^{(1-h(ρ))n}`, the polynomial overhead of the construction.
    pub fn overhead(&self) -> f64 {
        let ideal = (1.0 - entropy(self.rho.as_f64()).unwrap_or(1.0)) * self.n as f64;
        (self.len() as f64).log2() - ideal
    }

    pub fn verify(&self) -> Result<bool> {
        verify_binary_cover(&self.centers, self.radius, self.n)
    }

    /// Line-oriented text form used by the on-disk cache.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# hybridsat cover v1\n");
        s += &format!("n {}\nrho {}\nd {}\nradius {}\n", self.n, self.rho, self.d, self.radius);
        s += &format!("blocks {}\n", join(&self.block_sizes));
        s += &format!("radii {}\n", join(&self.block_radii));
        s += &format!("centers {}\n", self.centers.len());
        for c in &self.centers {
            s += &format!("{c}\n");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.starts_with('#'));
        let mut field = |name: &str| -> Result<String> {
            let (i, line) = lines.next().ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("missing field {name}"),
            })?;
            line.strip_prefix(name)
                .map(|v| v.trim().to_string())
                .ok_or_else(|| Error::Parse {
                    line: i + 1,
                    msg: format!("expected {name}"),
                })
        };
        let num = |s: String| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line: 0,
                msg: format!("bad number {s:?}"),
            })
        };
        let list = |s: String| -> Result<Vec<usize>> {
            s.split_whitespace()
                .map(|x| num(x.to_string()))
                .collect()
        };
        let n = num(field("n")?)?;
        let rho: Rho = field("rho")?.parse()?;
        let d = num(field("d")?)?;
        let radius = num(field("radius")?)?;
        let block_sizes = list(field("blocks")?)?;
        let block_radii = list(field("radii")?)?;
        let count = num(field("centers")?)?;
        let centers = lines
            .take(count)
            .map(|(_, l)| Assignment::parse(l.trim()))
            .collect::<Result<Vec<_>>>()?;
        if centers.len() != count || centers.iter().any(|c| c.len() != n) {
            return Err(Error::Parse {
                line: 0,
                msg: "center list truncated or malformed".into(),
            });
        }
        Ok(CoverSet {
            n,
            rho,
            d,
            radius,
            block_sizes,
            block_radii,
            centers,
        })
    }
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Splits `n` into blocks of `⌈n/d⌉` bits (the last one possibly shorter).
pub fn block_sizes(n: usize, d: usize) -> Vec<usize> {
    let b = n.div_ceil(d.max(1)).max(1);
    let mut out = Vec::new();
    let mut left = n;
    while left > 0 {
        let s = b.min(left);
        out.push(s);
        left -= s;
    }
    out
}

/// Direct product of per-block greedy covers. Each block of `m` bits gets
/// radius `⌊ρ·m⌋`, so the total radius never exceeds `⌊ρ·n⌋`.
pub fn build_binary_cover(n: usize, rho: Rho, d: usize) -> Result<CoverSet> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParam("n and d must be positive".into()));
    }
    if 2 * rho.num >= rho.den {
        return Err(Error::InvalidParam(format!("rho {rho} must be below 1/2")));
    }
    let sizes = block_sizes(n, d);
    let radii: Vec<usize> = sizes.iter().map(|&s| rho.floor_mul(s)).collect();
    let mut block_covers: Vec<Vec<u64>> = Vec::with_capacity(sizes.len());
    for (&s, &r) in sizes.iter().zip(&radii) {
        if let Some(pos) = sizes.iter().position(|&x| x == s) {
            if pos < block_covers.len() {
                block_covers.push(block_covers[pos].clone());
                continue;
            }
        }
        block_covers.push(greedy_binary_cover(s, r)?);
    }

    let mut centers = Vec::new();
    let mut idx = vec![0usize; sizes.len()];
    loop {
        let mut bits = Vec::with_capacity(n);
        for (b, &i) in idx.iter().enumerate() {
            let m = block_covers[b][i];
            bits.extend((0..sizes[b]).map(|j| (m >> j) & 1 == 1));
        }
        centers.push(Assignment::from_bits(bits));
        // odometer over blocks
        let mut b = sizes.len();
        loop {
            if b == 0 {
                let cover = CoverSet {
                    n,
                    rho,
                    d,
                    radius: radii.iter().sum(),
                    block_sizes: sizes,
                    block_radii: radii,
                    centers,
                };
                log::debug!(
                    "cover n={n} rho={rho} d={d}: {} centers, log2 overhead {:.3}",
                    cover.len(),
                    cover.overhead()
                );
                return Ok(cover);
            }
            b -= 1;
            idx[b] += 1;
            if idx[b] < block_covers[b].len() {
                break;
            }
            idx[b] = 0;
        }
    }
}

/// Covering code `C ⊆ {1..k}^t` with radius `⌊t/k⌋`. Words hold values in
/// `1..=k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiceCode {
    pub arity: usize,
    pub word_length: usize,
    pub radius: usize,
    pub words: Vec<Vec<u8>>,
}

impl ChoiceCode {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn verify(&self) -> Result<bool> {
        verify_choice_cover(&self.words, self.radius, self.arity, self.word_length)
    }
}

fn choice_space_size(k: usize, t: usize) -> Result<u64> {
    let mut size = 1u64;
    for _ in 0..t {
        size = size.saturating_mul(k as u64);
        if size > MAX_CHOICE_SPACE {
            return Err(Error::Budget(format!(
                "choice space {k}^{t} exceeds {MAX_CHOICE_SPACE}"
            )));
        }
    }
    Ok(size)
}

fn choice_word(mut idx: usize, k: usize, t: usize) -> Vec<u8> {
    let mut w = vec![0u8; t];
    for slot in w.iter_mut() {
        *slot = (idx % k) as u8 + 1;
        idx /= k;
    }
    w
}

fn choice_index(w: &[u8], k: usize) -> usize {
    w.iter().rev().fold(0, |acc, &x| acc * k + (x as usize - 1))
}

/// Points of `{1..k}^t` (as indices) within distance `radius` of `center`.
fn choice_ball(center: usize, k: usize, t: usize, radius: usize, out: &mut Vec<usize>) {
    fn rec(pos: usize, left: usize, idx: usize, place: usize, k: usize, t: usize, out: &mut Vec<usize>) {
        if pos == t {
            out.push(idx);
            return;
        }
        rec(pos + 1, left, idx, place * k, k, t, out);
        if left > 0 {
            let digit = (idx / place) % k;
            for v in 0..k {
                if v != digit {
                    let moved = idx - digit * place + v * place;
                    rec(pos + 1, left - 1, moved, place * k, k, t, out);
                }
            }
        }
    }
    rec(0, radius, center, 1, k, t, out);
}

pub fn build_choice_cover(k: usize, t: usize) -> Result<ChoiceCode> {
    if k < 2 || t < 1 {
        return Err(Error::InvalidParam(format!("need k >= 2, t >= 1 (got k={k}, t={t})")));
    }
    let size = choice_space_size(k, t)? as usize;
    let radius = t / k;
    let picked = greedy_cover(size, |c, out| choice_ball(c, k, t, radius, out));
    let code = ChoiceCode {
        arity: k,
        word_length: t,
        radius,
        words: picked.into_iter().map(|i| choice_word(i, k, t)).collect(),
    };
    if !code.verify()? {
        return Err(Error::Build("greedy choice code failed coverage".into()));
    }
    Ok(code)
}

/// The space a cover lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Binary { n: usize },
    Choice { k: usize, t: usize },
}

/// Exhaustive coverage check. Binary centers are 0/1 vectors, choice
/// centers hold values in `1..=k`.
pub fn verify_cover(centers: &[Vec<u8>], radius: usize, space: Space) -> Result<bool> {
    match space {
        Space::Binary { n } => {
            let cs: Vec<Assignment> = centers
                .iter()
                .map(|c| Assignment::from_bits(c.iter().map(|&b| b == 1).collect()))
                .collect();
            verify_binary_cover(&cs, radius, n)
        }
        Space::Choice { k, t } => verify_choice_cover(centers, radius, k, t),
    }
}

pub fn verify_binary_cover(centers: &[Assignment], radius: usize, n: usize) -> Result<bool> {
    if n > MAX_BLOCK_BITS {
        return Err(Error::Budget(format!("{{0,1}}^{n} too large for exhaustive scan")));
    }
    if centers.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidParam("center length differs from n".into()));
    }
    let mut covered = vec![false; 1 << n];
    let masks = ball_masks(n, radius.min(n));
    for c in centers {
        let m = c
            .bits()
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i));
        for x in &masks {
            covered[(m ^ x) as usize] = true;
        }
    }
    Ok(covered.into_iter().all(|b| b))
}

pub fn verify_choice_cover(centers: &[Vec<u8>], radius: usize, k: usize, t: usize) -> Result<bool> {
    let size = choice_space_size(k, t)? as usize;
    if centers
        .iter()
        .any(|w| w.len() != t || w.iter().any(|&x| x == 0 || x as usize > k))
    {
        return Err(Error::InvalidParam("code word outside {1..k}^t".into()));
    }
    let mut covered = vec![false; size];
    let mut buf = Vec::new();
    for w in centers {
        buf.clear();
        choice_ball(choice_index(w, k), k, t, radius, &mut buf);
        for &p in &buf {
            covered[p] = true;
        }
    }
    Ok(covered.into_iter().all(|b| b))
}

/// File cache for binary covers keyed by `(n, ρ, d)`.
#[derive(Debug, Clone)]
pub struct CoverCache {
    dir: PathBuf,
}

impl CoverCache {
    pub fn new(dir: impl AsRef<Path>) -> Self {
        CoverCache {
            dir: dir.as_ref().to_path_buf(),
        }
    }

    fn path(&self, n: usize, rho: Rho, d: usize) -> PathBuf {
        self.dir
            .join(format!("cover_n{n}_rho{}-{}_d{d}.txt", rho.num, rho.den))
    }

    pub fn get_or_build(&self, n: usize, rho: Rho, d: usize) -> Result<CoverSet> {
        let p = self.path(n, rho, d);
        if let Ok(text) = fs::read_to_string(&p) {
            match CoverSet::from_text(&text) {
                Ok(c) if c.n == n && c.rho == rho && c.d == d => return Ok(c),
                _ => log::warn!("ignoring unreadable cover cache entry {}", p.display()),
            }
        }
        let cover = build_binary_cover(n, rho, d)?;
        fs::create_dir_all(&self.dir)?;
        fs::write(&p, cover.to_text())?;
        Ok(cover)
    }
}
