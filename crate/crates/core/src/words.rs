//! Breadth-first enumeration of group elements by word length.
//!
//! Every distinct element is reported once, under its shortlex-least word.
//! Candidates of a level are generated as (parent, letter) pairs in parent
//! order and ascending letter order, which is shortlex order; a candidate
//! is dropped when its matrix agrees with an earlier element up to a
//! relative tolerance. Matrices are kept only for elements that still serve
//! as parents; everything else is recomputed on demand, which keeps a
//! depth-8 scan over eight involutions at a few hundred megabytes.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{max_abs, max_abs_diff, HermitianSpace, Isometry, Mat3, C64};
use crate::json;
use crate::spectral::{self, Classification, Kind};

/// Relative max-entry distance below which two matrices are one element.
pub const DEDUP_TOL: f64 = 1e-7;
/// Grid of [`canonical_hash`].
pub const HASH_QUANTUM: f64 = 1e-7;

/// Letters of a word: generators, and for non-involutions their inverses.
#[derive(Debug, Clone)]
pub struct Alphabet {
    space: HermitianSpace,
    matrices: Vec<Mat3>,
    inverse: Vec<u8>,
    names: Vec<String>,
}

impl Alphabet {
    /// Each generator is its own inverse.
    pub fn involutions(names: &[String], gens: &[Isometry]) -> Result<Self> {
        Self::check(names, gens)?;
        Ok(Self {
            space: *gens[0].space(),
            matrices: gens.iter().map(|g| *g.matrix()).collect(),
            inverse: (0..gens.len() as u8).collect(),
            names: names.to_vec(),
        })
    }

    /// Letters `g_1, g_1⁻¹, g_2, g_2⁻¹, ...`.
    pub fn with_inverses(names: &[String], gens: &[Isometry]) -> Result<Self> {
        Self::check(names, gens)?;
        let mut a = Self {
            space: *gens[0].space(),
            matrices: Vec::new(),
            inverse: Vec::new(),
            names: Vec::new(),
        };
        for (k, (g, n)) in gens.iter().zip(names).enumerate() {
            let k = 2 * k as u8;
            a.matrices.push(*g.matrix());
            a.matrices.push(*g.inverse().matrix());
            a.inverse.extend([k + 1, k]);
            a.names.push(n.clone());
            a.names.push(format!("{n}^-1"));
        }
        Ok(a)
    }

    fn check(names: &[String], gens: &[Isometry]) -> Result<()> {
        if gens.is_empty() {
            return Err(Error::Invalid("empty generator set".into()));
        }
        if names.len() != gens.len() {
            return Err(Error::Invalid("one name per generator expected".into()));
        }
        if 2 * gens.len() > u8::MAX as usize {
            return Err(Error::Invalid("too many generators".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn space(&self) -> &HermitianSpace {
        &self.space
    }

    pub fn matrix(&self, letter: u8) -> &Mat3 {
        &self.matrices[letter as usize]
    }

    pub fn inverse(&self, letter: u8) -> u8 {
        self.inverse[letter as usize]
    }

    pub fn name(&self, letter: u8) -> &str {
        &self.names[letter as usize]
    }

    pub fn evaluate(&self, word: &[u8]) -> Mat3 {
        word.iter()
            .fold(Mat3::identity(), |acc, &l| acc * self.matrix(l))
    }

    /// Letters joined by `.`, the empty word as `e`.
    pub fn format(&self, word: &[u8]) -> String {
        if word.is_empty() {
            return "e".into();
        }
        word.iter()
            .map(|&l| self.name(l))
            .collect::<Vec<_>>()
            .join(".")
    }

    pub fn is_reduced(&self, word: &[u8]) -> bool {
        word.windows(2).all(|w| self.inverse(w[0]) != w[1])
    }
}

/// Hash of the 18 real components rounded to a `1e-7` grid. Equal hashes
/// imply entrywise agreement within the grid.
pub fn canonical_hash(m: &Mat3) -> u64 {
    let mut h = DefaultHasher::new();
    for z in m.iter() {
        for x in [z.re, z.im] {
            let q = (x / HASH_QUANTUM).round();
            // fold -0 into 0
            ((q + 0.0) as i64).hash(&mut h);
        }
    }
    h.finish()
}

/// A distinct group element and its shortlex-least word.
#[derive(Debug, Clone)]
pub struct ElementRecord {
    pub word: Vec<u8>,
    pub matrix: Mat3,
    pub trace: C64,
    pub hash: u64,
    /// Present when the enumeration was asked to classify.
    pub classification: Option<std::result::Result<Classification, Error>>,
}

impl ElementRecord {
    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn classification(&self) -> Option<&Classification> {
        self.classification.as_ref().and_then(|c| c.as_ref().ok())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    All,
    Even,
}

impl Parity {
    fn admits(self, len: usize) -> bool {
        match self {
            Parity::All => true,
            Parity::Even => len.is_multiple_of(2),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EnumerateOptions {
    pub max_len: usize,
    pub parity: Parity,
    pub jobs: usize,
    /// Classify each reported element with this `tol_class`.
    pub classify: Option<f64>,
}

impl EnumerateOptions {
    pub fn new(max_len: usize) -> Self {
        Self {
            max_len,
            parity: Parity::All,
            jobs: 1,
            classify: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelStats {
    pub length: usize,
    /// Reduced words of this length whose prefix is a distinct element.
    pub words: u64,
    pub elements: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnumerationStats {
    pub levels: Vec<LevelStats>,
    /// Words found equal to the identity (at most [`MAX_IDENTITY_WORDS`]).
    pub identity_words: Vec<Vec<u8>>,
    pub identity_word_count: u64,
    pub stopped_early: bool,
}

pub const MAX_IDENTITY_WORDS: usize = 64;

/// Weights of the 1-D projection used to find duplicate candidates.
fn weights() -> [f64; 18] {
    let mut w = [0.0; 18];
    let phi = 0.618_033_988_749_894_9;
    for (k, x) in w.iter_mut().enumerate() {
        let f = ((k + 1) as f64 * phi).fract() + 0.5;
        *x = if k % 2 == 0 { f } else { -f };
    }
    w
}

fn project(m: &Mat3, w: &[f64; 18]) -> f64 {
    m.iter()
        .enumerate()
        .map(|(k, z)| w[2 * k] * z.re + w[2 * k + 1] * z.im)
        .sum()
}

struct Tree {
    parent: Vec<u32>,
    letter: Vec<u8>,
    /// Matrices of elements that are (or were) parents.
    mats: Vec<Mat3>,
}

impl Tree {
    fn word(&self, mut node: u32) -> Vec<u8> {
        let mut w = Vec::new();
        while node != 0 {
            w.push(self.letter[node as usize]);
            node = self.parent[node as usize];
        }
        w.reverse();
        w
    }
}

/// Enumerates distinct elements in shortlex order of their least word and
/// hands each one of admitted length to `visit`. Returns when all words up
/// to `max_len` are exhausted or `visit` breaks.
pub fn enumerate<F>(
    alphabet: &Alphabet,
    opts: &EnumerateOptions,
    mut visit: F,
) -> Result<EnumerationStats>
where
    F: FnMut(&ElementRecord) -> ControlFlow<()>,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    run(alphabet, opts, &pool, &mut visit)
}

fn run<F>(
    alphabet: &Alphabet,
    opts: &EnumerateOptions,
    pool: &rayon::ThreadPool,
    visit: &mut F,
) -> Result<EnumerationStats>
where
    F: FnMut(&ElementRecord) -> ControlFlow<()>,
{
    let w = weights();
    let wsum: f64 = w.iter().map(|x| x.abs()).sum();
    let mut stats = EnumerationStats::default();
    let mut tree = Tree {
        parent: vec![0],
        letter: vec![u8::MAX],
        mats: vec![Mat3::identity()],
    };
    // sorted (key, node) over all accepted elements
    let mut prior: Vec<(f64, u32)> = vec![(project(&Mat3::identity(), &w), 0)];
    let mut level_start = vec![0usize, 1];
    stats.levels.push(LevelStats {
        length: 0,
        words: 1,
        elements: 1,
    });
    if opts.parity.admits(0) && emit(alphabet, opts, pool, &tree, 0..1, visit).is_break() {
        stats.stopped_early = true;
        return Ok(stats);
    }

    for len in 1..=opts.max_len {
        let parents = level_start[len - 1]..level_start[len];
        let mut cands: Vec<(u32, u8)> = Vec::new();
        for p in parents.clone() {
            let last = (len > 1).then(|| tree.letter[p]);
            for a in 0..alphabet.len() as u8 {
                if last.is_some_and(|l| alphabet.inverse(l) == a) {
                    continue;
                }
                cands.push((p as u32, a));
            }
        }
        let matrix_of = |c: (u32, u8)| tree.mats[c.0 as usize] * alphabet.matrix(c.1);
        let keys: Vec<(f64, f64)> = pool.install(|| {
            cands
                .par_iter()
                .map(|&c| {
                    let m = matrix_of(c);
                    (project(&m, &w), max_abs(&m).max(1.0))
                })
                .collect()
        });

        let mut order: Vec<u32> = (0..cands.len() as u32).collect();
        order.sort_by(|&a, &b| {
            keys[a as usize]
                .0
                .total_cmp(&keys[b as usize].0)
                .then(a.cmp(&b))
        });
        let mut rank = vec![0u32; cands.len()];
        for (pos, &i) in order.iter().enumerate() {
            rank[i as usize] = pos as u32;
        }
        let mut accepted = vec![false; cands.len()];
        for i in 0..cands.len() {
            let (key, scale) = keys[i];
            let window = 2.0 * wsum * DEDUP_TOL * scale;
            let mi = matrix_of(cands[i]);
            let same = |m: &Mat3, s: f64| max_abs_diff(&mi, m) <= DEDUP_TOL * scale.max(s);

            let lo = prior.partition_point(|&(k, _)| k < key - window);
            let dup_of_prior = prior[lo..]
                .iter()
                .take_while(|&&(k, _)| k <= key + window)
                .find(|&&(_, n)| {
                    let m = &tree.mats[n as usize];
                    same(m, max_abs(m))
                })
                .map(|&(_, n)| n);
            if let Some(n) = dup_of_prior {
                if n == 0 {
                    stats.identity_word_count += 1;
                    if stats.identity_words.len() < MAX_IDENTITY_WORDS {
                        let mut word = tree.word(cands[i].0);
                        word.push(cands[i].1);
                        stats.identity_words.push(word);
                    }
                }
                continue;
            }

            let r = rank[i] as usize;
            let near = |&&j: &&u32| {
                let j = j as usize;
                j < i && accepted[j] && same(&matrix_of(cands[j]), keys[j].1)
            };
            let below = order[..r]
                .iter()
                .rev()
                .take_while(|&&j| keys[j as usize].0 >= key - window)
                .any(|j| near(&j));
            let above = !below
                && order[r + 1..]
                    .iter()
                    .take_while(|&&j| keys[j as usize].0 <= key + window)
                    .any(|j| near(&j));
            if !(below || above) {
                accepted[i] = true;
            }
        }

        let first_new = tree.parent.len();
        let mut new_keys = Vec::new();
        for (i, &(p, a)) in cands.iter().enumerate() {
            if accepted[i] {
                let id = tree.parent.len() as u32;
                tree.parent.push(p);
                tree.letter.push(a);
                new_keys.push((keys[i].0, id));
            }
        }
        let count = tree.parent.len() - first_new;
        stats.levels.push(LevelStats {
            length: len,
            words: cands.len() as u64,
            elements: count as u64,
        });
        level_start.push(tree.parent.len());

        // Parent matrices are only needed while a further level follows;
        // the last level is recomputed in `emit`.
        if len < opts.max_len {
            let new_mats: Vec<Mat3> = pool.install(|| {
                (first_new..tree.parent.len())
                    .into_par_iter()
                    .map(|n| tree.mats[tree.parent[n] as usize] * alphabet.matrix(tree.letter[n]))
                    .collect()
            });
            tree.mats.extend(new_mats);
            new_keys.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            prior = merge(prior, new_keys);
        }
        drop(cands);

        if opts.parity.admits(len)
            && emit(
                alphabet,
                opts,
                pool,
                &tree,
                first_new..tree.parent.len(),
                visit,
            )
            .is_break()
        {
            stats.stopped_early = true;
            return Ok(stats);
        }
    }
    Ok(stats)
}

fn merge(a: Vec<(f64, u32)>, b: Vec<(f64, u32)>) -> Vec<(f64, u32)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i].0.total_cmp(&b[j].0).then(a[i].1.cmp(&b[j].1)).is_le() {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

const EMIT_CHUNK: usize = 1 << 15;

fn emit<F>(
    alphabet: &Alphabet,
    opts: &EnumerateOptions,
    pool: &rayon::ThreadPool,
    tree: &Tree,
    nodes: std::ops::Range<usize>,
    visit: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(&ElementRecord) -> ControlFlow<()>,
{
    let mut start = nodes.start;
    while start < nodes.end {
        let end = (start + EMIT_CHUNK).min(nodes.end);
        let records: Vec<ElementRecord> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|n| {
                    let matrix = if n < tree.mats.len() {
                        tree.mats[n]
                    } else {
                        tree.mats[tree.parent[n] as usize] * alphabet.matrix(tree.letter[n])
                    };
                    ElementRecord {
                        word: tree.word(n as u32),
                        trace: matrix.trace(),
                        hash: canonical_hash(&matrix),
                        classification: opts.classify.map(|t| spectral::classify(&matrix, t)),
                        matrix,
                    }
                })
                .collect()
        });
        for r in &records {
            visit(r)?;
        }
        start = end;
    }
    ControlFlow::Continue(())
}

/// Collects every reported element; for small searches and tests.
pub fn collect(
    alphabet: &Alphabet,
    opts: &EnumerateOptions,
) -> Result<(Vec<ElementRecord>, EnumerationStats)> {
    let mut out = Vec::new();
    let stats = enumerate(alphabet, opts, |r| {
        out.push(r.clone());
        ControlFlow::Continue(())
    })?;
    Ok((out, stats))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Check {
    /// The line `C·e0` is not fixed: off-diagonal entries of row/column 0.
    Block,
    /// Loxodromic eigenvalues differ from `{1, α/r, αr}` with `α = ±1`.
    Spectrum,
    /// Trace not real, or not `1 + α(r + 1/r)`.
    Trace,
    /// The eigenproblem could not be solved reliably.
    Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub check: Check,
    pub detail: String,
    pub value: f64,
}

/// Residuals of [`verify_spectral_form`], all compared against one `tol`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCheck {
    /// `max |M_0j|, |M_j0|` (`j = 1, 2`) over `max(1, max|M|)`.
    pub block: f64,
    /// Trace as computed from the representative.
    #[serde(with = "json::complex")]
    pub trace: C64,
    pub im_trace: f64,
    /// `|Im tr| / max(1, max|M|)`, the quantity compared against `tol`.
    pub im_trace_relative: f64,
    /// `±1` for loxodromic elements.
    pub alpha_sign: Option<i8>,
    pub alpha_deviation: Option<f64>,
    /// Expanding eigenvalue of the 2×2 block, or of the cubic when the
    /// block is not decoupled.
    pub r: Option<f64>,
    /// `|tr - (1 + α(r + 1/r))| / (1 + |tr|)`.
    pub trace_formula: Option<f64>,
    pub failures: Vec<Failure>,
}

impl SpectralCheck {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks that an element has the shape `diag(1, α/r, αr)` in a basis
/// `e0, e1, e2` with `e0` the polar vector of the `(e1, e2)` plane, up to
/// `tol`:
///
/// * (a) `C·e0` is an invariant line,
/// * (b) if loxodromic, the `e0`-eigenvalue is 1, the eigenvalues of the
///   complementary 2×2 block are `α/r, αr` with `α = ±1`, and `r` agrees
///   with the classification,
/// * (c) the trace is real and, if loxodromic, equals `1 + α(r + 1/r)`.
///
/// Once (a) holds, eigenvalues are read off `M_00` and the 2×2 block rather
/// than from the cubic: for entries of size `s` the smaller roots of the
/// cubic are only accurate to about `s·ε`. For the same reason `Im tr` is
/// compared against `tol·max(1, max|M|)`; the absolute value is reported as
/// `im_trace`.
pub fn verify_spectral_form(rec: &ElementRecord, tol: f64) -> SpectralCheck {
    check_spectral_form(&rec.matrix, &rec.matrix, rec.classification.as_ref(), tol)
}

/// [`verify_spectral_form`] for `m` with the conjugation-invariant data
/// (trace, eigenvalues) read off a conjugate `rep` of `m`, classified as
/// `class`. Conjugating by a long word inflates entries far beyond `r`,
/// which makes the eigenvalues of `m` itself ill-conditioned; see
/// [`cyclic_core`].
pub fn check_spectral_form(
    m: &Mat3,
    rep: &Mat3,
    class: Option<&std::result::Result<Classification, Error>>,
    tol: f64,
) -> SpectralCheck {
    let decoupling = |m: &Mat3| {
        [m[(0, 1)], m[(0, 2)], m[(1, 0)], m[(2, 0)]]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            / max_abs(m).max(1.0)
    };
    let block = decoupling(m);
    let rep_block = decoupling(rep);
    let scale = max_abs(rep).max(1.0);
    let tr = rep.trace();
    let mut out = SpectralCheck {
        block,
        trace: tr,
        im_trace: tr.im.abs(),
        im_trace_relative: tr.im.abs() / scale,
        alpha_sign: None,
        alpha_deviation: None,
        r: None,
        trace_formula: None,
        failures: Vec::new(),
    };
    let mut fail = |check, detail: String, value| {
        out.failures.push(Failure {
            check,
            detail,
            value,
        })
    };
    if block > tol {
        fail(Check::Block, "e0 row/column not decoupled".into(), block);
    }
    if tr.im.abs() >= tol * scale {
        fail(
            Check::Trace,
            format!("trace {tr} is not real"),
            tr.im.abs() / scale,
        );
    }
    let class = match class {
        Some(Ok(c)) => c.clone(),
        Some(Err(e)) => {
            fail(Check::Classification, e.to_string(), f64::NAN);
            return out;
        }
        None => match spectral::classify(rep, 1e-6) {
            Ok(c) => c,
            Err(e) => {
                fail(Check::Classification, e.to_string(), f64::NAN);
                return out;
            }
        },
    };
    if class.kind != Kind::Loxodromic {
        return out;
    }
    let r_class = class.r.expect("loxodromic has r");
    let (alpha, r) = if block <= tol && rep_block <= tol {
        let e0 = (rep[(0, 0)] - 1.0).norm();
        if e0 >= tol {
            fail(
                Check::Spectrum,
                format!("e0-eigenvalue {} is not 1", rep[(0, 0)]),
                e0,
            );
        }
        block_expanding_eigenvalue(rep)
    } else {
        let a = class.alpha.expect("loxodromic has alpha");
        (a, r_class)
    };
    let sign: i8 = if alpha.re >= 0.0 { 1 } else { -1 };
    let s = f64::from(sign);
    let dev = (alpha - s).norm();
    if dev >= tol {
        fail(Check::Spectrum, format!("alpha = {alpha} is not ±1"), dev);
    }
    let d = (r - r_class).abs() / r;
    if d >= tol {
        fail(
            Check::Spectrum,
            format!("expanding eigenvalue {r_class} differs from block value {r}"),
            d,
        );
    }
    let formula = (tr - (1.0 + s * (r + 1.0 / r))).norm() / (1.0 + tr.norm());
    if formula >= tol {
        fail(
            Check::Trace,
            format!("trace {tr} is not 1 + ({sign})(r + 1/r) with r = {r}"),
            formula,
        );
    }
    out.alpha_sign = Some(sign);
    out.alpha_deviation = Some(dev);
    out.r = Some(r);
    out.trace_formula = Some(formula);
    out
}

/// The word with matching first and last letters `a … a⁻¹` stripped
/// repeatedly. Its element is conjugate to that of `word`.
pub fn cyclic_core<'a>(alphabet: &Alphabet, word: &'a [u8]) -> &'a [u8] {
    let mut w = word;
    while w.len() >= 2 && alphabet.inverse(w[0]) == w[w.len() - 1] {
        w = &w[1..w.len() - 1];
    }
    w
}

/// `(α, r)` from the dominant eigenvalue `αr` of the lower-right 2×2 block
/// of a decoupled `m` with `det m = 1`. The block determinant is taken as
/// `1/M_00`: expanding it directly cancels terms of size `max|M|²`.
fn block_expanding_eigenvalue(m: &Mat3) -> (C64, f64) {
    let t = m[(1, 1)] + m[(2, 2)];
    let det = m[(0, 0)].inv();
    let sq = (t * t - det * 4.0).sqrt();
    let big = if (t + sq).norm() >= (t - sq).norm() {
        (t + sq) / 2.0
    } else {
        (t - sq) / 2.0
    };
    (big / big.norm(), big.norm())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub word: String,
    pub length: usize,
    pub failure: Failure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub word: String,
    pub length: usize,
    #[serde(with = "json::complex")]
    pub trace: C64,
    pub r: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LengthSummary {
    pub length: usize,
    pub elements: u64,
    pub loxodromic: u64,
    pub alpha_plus: u64,
    pub alpha_minus: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindCounts {
    pub loxodromic: u64,
    pub elliptic: u64,
    pub parabolic: u64,
    pub scalar: u64,
    pub unclassified: u64,
    pub indeterminate: u64,
    pub low_confidence: u64,
}

/// `scan.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub max_len: usize,
    pub tolerance: f64,
    /// Reduced words examined at all lengths, odd ones included.
    pub words_examined: u64,
    /// Distinct elements of even length.
    pub elements: u64,
    pub kinds: KindCounts,
    pub alpha_plus: u64,
    pub alpha_minus: u64,
    pub by_length: Vec<LengthSummary>,
    pub alpha_minus_witness: Option<Witness>,
    /// Largest absolute `|Im tr|`.
    pub max_im_trace: f64,
    /// Largest `|Im tr| / max(1, max|M|)`, the quantity the check uses.
    pub max_im_trace_relative: f64,
    /// `tolerance - max_im_trace_relative`.
    pub im_trace_margin: f64,
    /// Elements with `|Im tr| >= tolerance` in absolute terms. These are
    /// not violations when the relative value passes: at entry size `s`
    /// rounding alone contributes about `s·ε` to `Im tr`.
    pub im_trace_absolute_exceedances: u64,
    pub max_block_residual: f64,
    pub max_alpha_deviation: f64,
    pub max_trace_formula_residual: f64,
    pub max_entry: f64,
    pub identity_words: Vec<String>,
    pub identity_word_count: u64,
    pub violation_count: u64,
    /// At most [`MAX_VIOLATIONS`] of them.
    pub violations: Vec<Violation>,
    pub limitations: String,
}

pub const MAX_VIOLATIONS: usize = 1000;

const LIMITATIONS: &str = "Finite-depth check only: every even word up to max_len is \
verified, which neither proves discreteness or faithfulness of the representation \
nor rules out relations longer than max_len.";

impl ScanReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

/// Verifies the spectral form for every distinct even-length element of the
/// group generated by `alphabet`, with trace and eigenvalues taken from the
/// element of the word's [`cyclic_core`]. `sink` sees each record with its
/// check, e.g. to write a CSV row.
pub fn scan<F>(
    alphabet: &Alphabet,
    max_len: usize,
    jobs: usize,
    tol: f64,
    tol_class: f64,
    mut sink: F,
) -> Result<ScanReport>
where
    F: FnMut(&ElementRecord, &SpectralCheck),
{
    let opts = EnumerateOptions {
        max_len,
        parity: Parity::Even,
        jobs,
        classify: Some(tol_class),
    };
    let mut rep = ScanReport {
        max_len,
        tolerance: tol,
        words_examined: 0,
        elements: 0,
        kinds: KindCounts::default(),
        alpha_plus: 0,
        alpha_minus: 0,
        by_length: Vec::new(),
        alpha_minus_witness: None,
        max_im_trace: 0.0,
        max_im_trace_relative: 0.0,
        im_trace_margin: 0.0,
        im_trace_absolute_exceedances: 0,
        max_block_residual: 0.0,
        max_alpha_deviation: 0.0,
        max_trace_formula_residual: 0.0,
        max_entry: 0.0,
        identity_words: Vec::new(),
        identity_word_count: 0,
        violation_count: 0,
        violations: Vec::new(),
        limitations: LIMITATIONS.into(),
    };
    let stats = enumerate(alphabet, &opts, |r| {
        let core = cyclic_core(alphabet, &r.word);
        let reduced;
        let (rep_m, class) = if core.len() < r.word.len() {
            let m = alphabet.evaluate(core);
            reduced = Some(spectral::classify(&m, tol_class));
            (m, reduced.as_ref())
        } else {
            (r.matrix, r.classification.as_ref())
        };
        let check = check_spectral_form(&r.matrix, &rep_m, class, tol);
        let len = r.len();
        if rep.by_length.last().map(|s| s.length) != Some(len) {
            rep.by_length.push(LengthSummary {
                length: len,
                ..Default::default()
            });
        }
        let row = rep.by_length.last_mut().expect("pushed above");
        row.elements += 1;
        rep.elements += 1;
        rep.max_entry = rep.max_entry.max(max_abs(&r.matrix));
        rep.max_im_trace = rep.max_im_trace.max(check.im_trace);
        rep.max_im_trace_relative = rep.max_im_trace_relative.max(check.im_trace_relative);
        rep.im_trace_absolute_exceedances += u64::from(check.im_trace >= tol);
        rep.max_block_residual = rep.max_block_residual.max(check.block);
        match class {
            Some(Ok(c)) => {
                let k = &mut rep.kinds;
                match c.kind {
                    Kind::Loxodromic => k.loxodromic += 1,
                    Kind::Elliptic => k.elliptic += 1,
                    Kind::Parabolic => k.parabolic += 1,
                    Kind::Scalar => k.scalar += 1,
                }
                k.indeterminate += u64::from(c.indeterminate);
                k.low_confidence += u64::from(c.low_confidence);
                if c.is_loxodromic() {
                    row.loxodromic += 1;
                }
            }
            _ => rep.kinds.unclassified += 1,
        }
        match check.alpha_sign {
            Some(1) => {
                rep.alpha_plus += 1;
                row.alpha_plus += 1;
            }
            Some(_) => {
                rep.alpha_minus += 1;
                row.alpha_minus += 1;
                if rep.alpha_minus_witness.is_none() {
                    rep.alpha_minus_witness = Some(Witness {
                        word: alphabet.format(&r.word),
                        length: len,
                        trace: check.trace,
                        r: check.r.unwrap_or(f64::NAN),
                    });
                }
            }
            None => {}
        }
        if let Some(d) = check.alpha_deviation {
            rep.max_alpha_deviation = rep.max_alpha_deviation.max(d);
        }
        if let Some(d) = check.trace_formula {
            rep.max_trace_formula_residual = rep.max_trace_formula_residual.max(d);
        }
        for f in &check.failures {
            rep.violation_count += 1;
            if rep.violations.len() < MAX_VIOLATIONS {
                rep.violations.push(Violation {
                    word: alphabet.format(&r.word),
                    length: len,
                    failure: f.clone(),
                });
            }
        }
        sink(r, &check);
        ControlFlow::Continue(())
    })?;
    rep.words_examined = stats.levels.iter().map(|l| l.words).sum();
    rep.identity_word_count = stats.identity_word_count;
    rep.identity_words = stats
        .identity_words
        .iter()
        .map(|w| alphabet.format(w))
        .collect();
    rep.im_trace_margin = tol - rep.max_im_trace_relative;
    Ok(rep)
}

/// Shortlex-first even word whose element is loxodromic with `α = -1`.
pub fn find_alpha_minus_one(
    alphabet: &Alphabet,
    max_len: usize,
    jobs: usize,
    tol_class: f64,
) -> Result<Option<ElementRecord>> {
    let opts = EnumerateOptions {
        max_len,
        parity: Parity::Even,
        jobs,
        classify: Some(tol_class),
    };
    let mut found = None;
    enumerate(alphabet, &opts, |r| match r.classification() {
        Some(c) if c.is_loxodromic() && c.alpha.is_some_and(|a| a.re < 0.0) => {
            found = Some(r.clone());
            ControlFlow::Break(())
        }
        _ => ControlFlow::Continue(()),
    })?;
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disk::{q_involution, DiskPoint};
    use crate::hermitian::{cx, real, real_diag};
    use crate::pentagon::PentagonConfig;
    use crate::spectral::CubeRoot;

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("Q{i}")).collect()
    }

    fn q_alphabet() -> Alphabet {
        let cfg = PentagonConfig::build(0.0).unwrap();
        Alphabet::involutions(&names(8), &cfg.generators()).unwrap()
    }

    #[test]
    fn depth_two_counts() {
        let a = q_alphabet();
        let (recs, stats) = collect(
            &a,
            &EnumerateOptions {
                parity: Parity::Even,
                ..EnumerateOptions::new(2)
            },
        )
        .unwrap();
        assert_eq!(stats.levels[2].words, 56);
        assert_eq!(stats.levels[1].words, 8);
        assert_eq!(recs[0].word, Vec::<u8>::new());
        assert_eq!(recs.len() as u64, 1 + stats.levels[2].elements);
        assert!(recs.iter().all(|r| r.len() % 2 == 0));
    }

    #[test]
    fn identity_is_scalar() {
        let a = q_alphabet();
        let opts = EnumerateOptions {
            classify: Some(1e-6),
            ..EnumerateOptions::new(0)
        };
        let (recs, _) = collect(&a, &opts).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].classification().unwrap().kind, Kind::Scalar);
        assert!(verify_spectral_form(&recs[0], 1e-8).passed());
    }

    #[test]
    fn output_is_shortlex() {
        let a = q_alphabet();
        let (recs, _) = collect(&a, &EnumerateOptions::new(4)).unwrap();
        for w in recs.windows(2) {
            let (x, y) = (&w[0].word, &w[1].word);
            assert!(x.len() < y.len() || (x.len() == y.len() && x < y));
        }
    }

    #[test]
    fn words_match_matrices() {
        let a = q_alphabet();
        let (recs, _) = collect(&a, &EnumerateOptions::new(4)).unwrap();
        for r in &recs {
            assert!(a.is_reduced(&r.word));
            assert!(max_abs_diff(&a.evaluate(&r.word), &r.matrix) < 1e-9 * max_abs(&r.matrix));
        }
    }

    #[test]
    fn eight_fold_relation_merges_length_four_words() {
        // Q8Q7Q6Q5Q4Q3Q2Q1 = 1: each of its 8 cyclic rotations splits as
        // u·w = 1, identifying u with w⁻¹ (the inverse relation gives the
        // same pairs)
        let a = q_alphabet();
        let (_, stats) = collect(&a, &EnumerateOptions::new(4)).unwrap();
        assert_eq!(stats.levels[4].words, 8 * 7 * 7 * 7);
        assert_eq!(stats.levels[4].words - stats.levels[4].elements, 8);
        assert_eq!(stats.levels[3].words, stats.levels[3].elements);
    }

    #[test]
    fn duplicates_are_merged_under_relative_tolerance() {
        // a free product of two involutions has no coincidences; adding the
        // same generator twice must merge every word through the twin
        let q = q_involution(&DiskPoint::new(cx(0.3, 0.1)).unwrap()).unwrap();
        let p = q_involution(&DiskPoint::new(cx(-0.2, 0.4)).unwrap()).unwrap();
        let a = Alphabet::involutions(&names(3), &[q.clone(), p, q]).unwrap();
        let (recs, stats) = collect(&a, &EnumerateOptions::new(3)).unwrap();
        // distinct elements of the infinite dihedral group up to length 3
        assert_eq!(recs.len(), 1 + 2 + 2 + 2);
        assert!(stats.identity_word_count > 0);
    }

    #[test]
    fn product_of_two_half_turns_is_hyperbolic() {
        let a = q_alphabet();
        let m = a.matrix(0) * a.matrix(1);
        let c = spectral::classify(&m, 1e-6).unwrap();
        assert_eq!(c.kind, Kind::Loxodromic);
        assert!((c.alpha.unwrap() - real(1.0)).norm() < 1e-10);
        let r = c.r.unwrap();
        assert!((m.trace() - real(1.0 + r + 1.0 / r)).norm() < 1e-9 * r);
    }

    #[test]
    fn omega_control_breaks_reality_only() {
        let cfg = PentagonConfig::build(0.0).unwrap();
        let mut gens = cfg.generators();
        gens[0] = gens[0].scaled(CubeRoot::Omega.value());
        let a = Alphabet::involutions(&names(8), &gens).unwrap();
        let rep = scan(&a, 2, 1, 1e-8, 1e-6, |_, _| {}).unwrap();
        assert!(rep.violation_count > 0);
        assert!(rep
            .violations
            .iter()
            .all(|v| v.failure.check != Check::Block));
        assert!(rep
            .violations
            .iter()
            .any(|v| v.failure.check == Check::Trace));
    }

    #[test]
    fn single_translation_pair_has_no_alpha_minus() {
        let q = q_involution(&DiskPoint::new(real(0.2)).unwrap()).unwrap();
        let p = q_involution(&DiskPoint::new(real(-0.5)).unwrap()).unwrap();
        let a = Alphabet::involutions(&names(2), &[q, p]).unwrap();
        assert!(find_alpha_minus_one(&a, 8, 1, 1e-6).unwrap().is_none());
    }

    #[test]
    fn diagonal_loxodromic_passes_spectral_form() {
        let m = real_diag(1.0, 0.5, 2.0);
        let rec = ElementRecord {
            word: vec![0, 1],
            matrix: m,
            trace: m.trace(),
            hash: canonical_hash(&m),
            classification: None,
        };
        // diag(1, 1/2, 2) in the ball basis has no e0 coupling but its block
        // trace 2.5 is that of a hyperbolic element
        assert!(verify_spectral_form(&rec, 1e-8).passed());
    }

    #[test]
    fn hash_is_grid_stable() {
        let m = real_diag(1.0, 0.5, 2.0);
        let n = m + Mat3::identity() * real(1e-12);
        assert_eq!(canonical_hash(&m), canonical_hash(&n));
        assert_ne!(
            canonical_hash(&m),
            canonical_hash(&real_diag(1.0, 0.5, 2.1))
        );
        let z = Mat3::zeros();
        assert_eq!(canonical_hash(&z), canonical_hash(&(z * real(-1.0))));
    }
}
