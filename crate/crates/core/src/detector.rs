//! Decision procedure for finitely generated subgroups of `SU(2,1)`: a
//! stable complex line, a stable totally real subspace, or a word whose
//! trace violates the cube-root hypothesis.
//!
//! Pipeline: find a loxodromic `g`; audit traces of short and random words;
//! rescale every generator by a cube root so that `tr(gⁿh)` is real
//! (`reduce_to_h`); test the eigenlines of `g`; failing that, look for a
//! phase of the normal-form basis of `g` that makes every generator real.

use std::ops::ControlFlow;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{
    coord_norm_sq, max_abs, HermitianSpace, Isometry, Mat3, PointType, Vec3, C64,
};
use crate::json::{self, GeneratorFile, SpaceRepr};
use crate::sample;
use crate::spectral::{self, pair_trace_type, trace_type, CubeRoot, NormalForm, TraceRejection};
use crate::tol::Tolerances;
use crate::words::{self, Alphabet, EnumerateOptions, Parity};

#[derive(Debug, Clone)]
pub struct GeneratorSet {
    space: HermitianSpace,
    gens: Vec<Isometry>,
    names: Vec<String>,
}

impl GeneratorSet {
    pub fn new(
        space: HermitianSpace,
        gens: Vec<Isometry>,
        names: Option<Vec<String>>,
    ) -> Result<Self> {
        if gens.is_empty() {
            return Err(Error::Invalid("empty generator set".into()));
        }
        let names = names.unwrap_or_else(|| (1..=gens.len()).map(|i| format!("g{i}")).collect());
        if names.len() != gens.len() {
            return Err(Error::Invalid("one name per generator expected".into()));
        }
        if gens.iter().any(|g| g.space() != &space) {
            return Err(Error::Invalid("generators live in different spaces".into()));
        }
        Ok(Self { space, gens, names })
    }

    pub fn from_matrices(
        space: HermitianSpace,
        ms: &[Mat3],
        names: Option<Vec<String>>,
        tol_su: f64,
    ) -> Result<Self> {
        Self::new(space, sample::certify_all(ms, &space, tol_su)?, names)
    }

    pub fn from_file(file: &GeneratorFile, tol_su: f64) -> Result<Self> {
        let space = HermitianSpace::new(file.space.gram)?;
        let names = (!file.names.is_empty()).then(|| file.names.clone());
        Self::from_matrices(space, &file.generators, names, tol_su)
    }

    pub fn to_file(&self, description: Option<String>) -> GeneratorFile {
        GeneratorFile {
            space: SpaceRepr {
                gram: *self.space.gram(),
            },
            names: self.names.clone(),
            generators: self.gens.iter().map(|g| *g.matrix()).collect(),
            description,
        }
    }

    pub fn space(&self) -> &HermitianSpace {
        &self.space
    }

    pub fn gens(&self) -> &[Isometry] {
        &self.gens
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Each generator followed by its inverse.
    pub fn alphabet(&self) -> Alphabet {
        Alphabet::with_inverses(&self.names, &self.gens).expect("validated on construction")
    }
}

/// Search depths of [`decide`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    /// Longest word tried when looking for a loxodromic element.
    pub loxodromic_len: usize,
    /// All words up to this length are audited.
    pub audit_len: usize,
    /// Number of extra random reduced words, with lengths in `random_len`.
    pub audit_random: usize,
    pub random_len: (usize, usize),
    /// `tr(gⁿh)` is checked for `|n| ≤ n_max`.
    pub n_max: i32,
    pub burnside_len: usize,
    pub seed: u64,
    /// Worker threads; left out of reports so they do not depend on it.
    #[serde(skip, default = "one")]
    pub jobs: usize,
}

fn one() -> usize {
    1
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            loxodromic_len: 6,
            audit_len: 4,
            audit_random: 64,
            random_len: (5, 8),
            n_max: 8,
            burnside_len: 6,
            seed: 20_240_601,
            jobs: 1,
        }
    }
}

/// Shortlex-first word (letters of [`GeneratorSet::alphabet`]) whose
/// element is loxodromic.
pub fn find_loxodromic(
    set: &GeneratorSet,
    max_len: usize,
    jobs: usize,
    tol: &Tolerances,
) -> Result<(Vec<u8>, Isometry)> {
    let alphabet = set.alphabet();
    let opts = EnumerateOptions {
        max_len,
        parity: Parity::All,
        jobs,
        classify: Some(tol.class),
    };
    let mut found = None;
    words::enumerate(&alphabet, &opts, |r| {
        if r.classification().is_some_and(|c| c.is_loxodromic()) {
            found = Some((r.word.clone(), r.matrix));
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    let (word, m) = found.ok_or(Error::NoLoxodromic(max_len))?;
    Ok((word, Isometry::unchecked(m, &set.space)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub word: String,
    pub letters: Vec<u8>,
    #[serde(with = "json::complex")]
    pub trace: C64,
    pub rejection: TraceRejection,
}

/// What the hypothesis audit covered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Audit {
    pub depth: usize,
    pub random_words: usize,
    pub random_len: (usize, usize),
    pub seed: u64,
    pub words_checked: u64,
    pub loxodromic_checked: u64,
}

fn random_word<R: Rng>(alphabet: &Alphabet, len: usize, rng: &mut R) -> Vec<u8> {
    let n = alphabet.len() as u8;
    let mut w: Vec<u8> = Vec::with_capacity(len);
    while w.len() < len {
        let a = rng.gen_range(0..n);
        if w.last().is_some_and(|&l| alphabet.inverse(l) == a) {
            continue;
        }
        w.push(a);
    }
    w
}

/// Trace types of every loxodromic word up to `budget.audit_len` and of
/// `budget.audit_random` seeded random words. Returns the first rejection.
pub fn audit(
    set: &GeneratorSet,
    budget: &Budget,
    tol: &Tolerances,
) -> Result<(Audit, Option<Witness>)> {
    let alphabet = set.alphabet();
    let mut a = Audit {
        depth: budget.audit_len,
        random_words: budget.audit_random,
        random_len: budget.random_len,
        seed: budget.seed,
        words_checked: 0,
        loxodromic_checked: 0,
    };
    let mut witness = None;
    let mut check =
        |word: &[u8], m: &Mat3, class: Option<&spectral::Classification>, a: &mut Audit| {
            a.words_checked += 1;
            if !class.is_some_and(|c| c.is_loxodromic()) {
                return ControlFlow::Continue(());
            }
            a.loxodromic_checked += 1;
            let t = m.trace();
            match trace_type(t, tol.trace) {
                Ok(_) => ControlFlow::Continue(()),
                Err(rejection) => {
                    witness = Some(Witness {
                        word: alphabet.format(word),
                        letters: word.to_vec(),
                        trace: t,
                        rejection,
                    });
                    ControlFlow::Break(())
                }
            }
        };
    let opts = EnumerateOptions {
        max_len: budget.audit_len,
        parity: Parity::All,
        jobs: budget.jobs,
        classify: Some(tol.class),
    };
    let stats = words::enumerate(&alphabet, &opts, |r| {
        check(&r.word, &r.matrix, r.classification(), &mut a)
    })?;
    if !stats.stopped_early {
        let mut rng = sample::rng(budget.seed);
        let (lo, hi) = budget.random_len;
        for _ in 0..budget.audit_random {
            let len = rng.gen_range(lo..=hi.max(lo));
            let w = random_word(&alphabet, len, &mut rng);
            let m = alphabet.evaluate(&w);
            let class = spectral::classify(&m, tol.class).ok();
            if check(&w, &m, class.as_ref(), &mut a).is_break() {
                break;
            }
        }
    }
    Ok((a, witness))
}

/// A generator after rescaling by `conj(delta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reduced {
    pub name: String,
    pub delta: CubeRoot,
    pub residual: f64,
}

pub enum Reduction {
    Ok {
        reduced: Vec<Reduced>,
        gens: Vec<Isometry>,
    },
    Violated(Witness),
    /// A pairing was off every line `Rδ` but no loxodromic `gⁿh` with a
    /// rejected trace turned up.
    Unresolved {
        generator: String,
        rejection: spectral::PairRejection,
    },
}

/// How far `gⁿh` is searched for a loxodromic witness when a pairing test
/// fails without one.
const WITNESS_SEARCH: i32 = 64;

/// Rescales each generator `h` by `conj(δ_h)` so that `tr(gⁿh)` is real for
/// `|n| ≤ n_max`. `g` must be loxodromic with real trace.
pub fn reduce_to_h(
    set: &GeneratorSet,
    g_word: &[u8],
    nf: &NormalForm,
    g: &Isometry,
    n_max: i32,
    tol: &Tolerances,
) -> Reduction {
    let alphabet = set.alphabet();
    let mut reduced = Vec::new();
    let mut gens = Vec::new();
    for (k, h) in set.gens.iter().enumerate() {
        match pair_trace_type(nf, h.matrix(), n_max, tol.trace) {
            Ok(tt) => {
                reduced.push(Reduced {
                    name: set.names[k].clone(),
                    delta: tt.delta,
                    residual: tt.residual,
                });
                gens.push(h.scaled(tt.delta.conj().value()));
            }
            Err(rejection) => {
                let h_letter = 2 * k as u8;
                let g_inv: Vec<u8> = g_word.iter().rev().map(|&l| alphabet.inverse(l)).collect();
                let order = rejection
                    .n
                    .into_iter()
                    .chain((1..=WITNESS_SEARCH).flat_map(|n| [n, -n]));
                for n in order {
                    let gn = g.pow(n);
                    let m = gn.matrix() * h.matrix();
                    let Ok(c) = spectral::classify(&m, tol.class) else {
                        continue;
                    };
                    if !c.is_loxodromic() {
                        continue;
                    }
                    if let Err(rej) = trace_type(m.trace(), tol.trace) {
                        let block = if n >= 0 { g_word } else { &g_inv[..] };
                        let mut letters = Vec::new();
                        for _ in 0..n.unsigned_abs() {
                            letters.extend_from_slice(block);
                        }
                        letters.push(h_letter);
                        return Reduction::Violated(Witness {
                            word: alphabet.format(&letters),
                            trace: alphabet.evaluate(&letters).trace(),
                            letters,
                            rejection: rej,
                        });
                    }
                }
                return Reduction::Unresolved {
                    generator: set.names[k].clone(),
                    rejection,
                };
            }
        }
    }
    Reduction::Ok { reduced, gens }
}

/// Sine of the Fubini–Study angle between the lines of `u` and `v`.
pub fn line_sine(u: &Vec3, v: &Vec3) -> f64 {
    let nu = coord_norm_sq(u);
    let nv = coord_norm_sq(v);
    if nu == 0.0 || nv == 0.0 {
        return 1.0;
    }
    let c = u.dotc(v).norm_sqr() / (nu * nv);
    (1.0 - c.min(1.0)).max(0.0).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CLine {
    #[serde(with = "json::vector")]
    pub line: Vec3,
    pub point_type: PointType,
    #[serde(with = "json::complex")]
    pub eigenvalue: C64,
    /// `sin∠(h·L, L)` per generator.
    pub residuals: Vec<f64>,
}

/// The first eigenline of `g` (positive-type lines first, then larger
/// `|λ|`) that every generator maps to itself.
pub fn detect_c_line(gens: &[Isometry], g: &Isometry, tol: &Tolerances) -> Result<Option<CLine>> {
    let e = spectral::eigen3(g.matrix())?;
    let space = g.space();
    let mut cands: Vec<(PointType, C64, Vec3)> = Vec::new();
    for k in 0..3 {
        let v = e.vectors[k];
        if cands.iter().any(|(_, _, w)| line_sine(w, &v) < tol.line) {
            continue;
        }
        let pt = space.point_type(&v, 1e-9)?;
        cands.push((pt, e.values[k], v));
    }
    cands.sort_by(|a, b| {
        let pa = a.0 != PointType::Positive;
        let pb = b.0 != PointType::Positive;
        pa.cmp(&pb).then(b.1.norm().total_cmp(&a.1.norm()))
    });
    for (pt, lambda, v) in cands {
        let residuals: Vec<f64> = gens
            .iter()
            .map(|h| line_sine(&(h.matrix() * v), &v))
            .collect();
        if residuals.iter().all(|&r| r < tol.line) {
            let v = v / C64::new(coord_norm_sq(&v).sqrt(), 0.0);
            return Ok(Some(CLine {
                line: v,
                point_type: pt,
                eigenvalue: lambda,
                residuals,
            }));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TotallyReal {
    /// Columns `e0, e1', e2'` in the coordinates of the input space.
    #[serde(with = "json::matrix")]
    pub basis: Mat3,
    pub theta: f64,
    /// Cube roots `δ_h`; the certificate is about `conj(δ_h)·h`.
    pub deltas: Vec<CubeRoot>,
    /// `max|Im|` of each transported generator over `max(1, max|entry|)`.
    pub residuals: Vec<f64>,
    #[serde(with = "json::matrix")]
    pub gram: Mat3,
    pub gram_residual: f64,
}

fn im_residual(m: &Mat3) -> f64 {
    m.iter().map(|z| z.im.abs()).fold(0.0, f64::max) / max_abs(m).max(1.0)
}

/// Candidate phases `θ` making the pivot entry real: `(0,1), (0,2)` pick up
/// `e^{iθ}` and `(1,0), (2,0)` pick up `e^{-iθ}` under `e1, e2 ↦ e^{iθ}e1,
/// e^{iθ}e2`; every other entry is unchanged.
fn theta_candidates(transported: &[Mat3], tol: f64) -> Vec<f64> {
    const MOVING: [((usize, usize), f64); 4] =
        [((0, 1), 1.0), ((0, 2), 1.0), ((1, 0), -1.0), ((2, 0), -1.0)];
    for t in transported {
        let floor = tol * max_abs(t).max(1.0);
        for ((i, j), k) in MOVING {
            let z = t[(i, j)];
            if z.norm() > floor {
                let th = -z.arg() / k;
                return vec![th, th + std::f64::consts::PI];
            }
        }
    }
    vec![0.0]
}

/// A basis of eigenvectors of `g` in which the reduced generators are real.
pub fn detect_totally_real(
    reduced: &[Isometry],
    deltas: &[CubeRoot],
    nf: &NormalForm,
    tol: &Tolerances,
) -> Result<Option<TotallyReal>> {
    let transported: Vec<Mat3> = reduced.iter().map(|h| nf.transport(h.matrix())).collect();
    for theta in theta_candidates(&transported, tol.real) {
        let nf = nf.rephased(theta)?;
        let residuals: Vec<f64> = reduced
            .iter()
            .map(|h| im_residual(&nf.transport(h.matrix())))
            .collect();
        let gram = *nf.basis.target_gram();
        let gram_residual = im_residual(&gram);
        if residuals.iter().all(|&r| r < tol.real) && gram_residual < tol.real {
            return Ok(Some(TotallyReal {
                basis: *nf.basis.matrix(),
                theta,
                deltas: deltas.to_vec(),
                residuals,
                gram,
                gram_residual,
            }));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Burnside {
    pub dimension: usize,
    /// Rank after each word length.
    pub by_length: Vec<usize>,
    /// Length of the first level that added nothing.
    pub stable_at: Option<usize>,
}

/// Modified Gram–Schmidt (twice) on real 18-vectors.
struct RealSpan {
    basis: Vec<[f64; 18]>,
    pivot: f64,
}

impl RealSpan {
    fn add(&mut self, m: &Mat3) -> bool {
        let mut v = [0.0; 18];
        for (k, z) in m.iter().enumerate() {
            v[2 * k] = z.re;
            v[2 * k + 1] = z.im;
        }
        let n0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n0 == 0.0 {
            return false;
        }
        v.iter_mut().for_each(|x| *x /= n0);
        for _ in 0..2 {
            for b in &self.basis {
                let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > self.pivot {
            v.iter_mut().for_each(|x| *x /= n);
            self.basis.push(v);
            true
        } else {
            false
        }
    }
}

/// Real dimension of the span of all elements of word length `≤ max_len`,
/// stopping at the first length that adds nothing.
pub fn burnside_dimension(set: &GeneratorSet, max_len: usize, jobs: usize) -> Result<Burnside> {
    let alphabet = set.alphabet();
    let opts = EnumerateOptions {
        max_len,
        parity: Parity::All,
        jobs,
        classify: None,
    };
    let mut span = RealSpan {
        basis: Vec::new(),
        pivot: 1e-8,
    };
    let mut by_length: Vec<usize> = Vec::new();
    let mut stable_at = None;
    words::enumerate(&alphabet, &opts, |r| {
        let len = r.len();
        if len > 0 && by_length.len() == len {
            // first word of a new length closes the previous level
            if len >= 2 && by_length[len - 1] == by_length[len - 2] {
                stable_at = Some(len - 1);
                return ControlFlow::Break(());
            }
        }
        while by_length.len() <= len {
            by_length.push(span.basis.len());
        }
        span.add(&r.matrix);
        by_length[len] = span.basis.len();
        if span.basis.len() == 18 {
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    })?;
    if stable_at.is_none() {
        let n = by_length.len();
        if n >= 2 && by_length[n - 1] == by_length[n - 2] {
            stable_at = Some(n - 1);
        }
    }
    Ok(Burnside {
        dimension: span.basis.len(),
        by_length,
        stable_at,
    })
}

#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Verdict {
    CLine(CLine),
    TotallyReal(TotallyReal),
    HypothesisViolated(Witness),
    Inconclusive {
        reason: String,
        /// Set when the real span is all of `M_3(C)` although every audited
        /// trace was real: numerically this contradicts the dichotomy, so
        /// precision or budget should be raised.
        flagged: bool,
    },
}

impl Verdict {
    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::CLine(_) => "CLine",
            Verdict::TotallyReal(_) => "TotallyReal",
            Verdict::HypothesisViolated(_) => "HypothesisViolated",
            Verdict::Inconclusive { .. } => "Inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoxodromicInfo {
    pub word: String,
    #[serde(with = "json::complex")]
    pub trace: C64,
    pub r: f64,
    /// Cube root with `tr g ∈ Rδ`; `g` is used as `conj(δ)·g`.
    pub delta: CubeRoot,
}

/// `verdict.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub verdict: Verdict,
    pub loxodromic: Option<LoxodromicInfo>,
    pub reduced: Vec<Reduced>,
    pub audit: Option<Audit>,
    pub burnside_dim: usize,
    pub burnside: Burnside,
    pub budget: Budget,
    pub tolerances: Tolerances,
}

pub fn decide(set: &GeneratorSet, budget: &Budget, tol: &Tolerances) -> Result<Decision> {
    let burnside = burnside_dimension(set, budget.burnside_len, budget.jobs)?;
    let mut out = Decision {
        verdict: Verdict::Inconclusive {
            reason: String::new(),
            flagged: false,
        },
        loxodromic: None,
        reduced: Vec::new(),
        audit: None,
        burnside_dim: burnside.dimension,
        burnside: burnside.clone(),
        budget: *budget,
        tolerances: *tol,
    };
    let (g_word, g_raw) = match find_loxodromic(set, budget.loxodromic_len, budget.jobs, tol) {
        Ok(x) => x,
        Err(Error::NoLoxodromic(n)) => {
            out.verdict = Verdict::Inconclusive {
                reason: format!("no loxodromic element among words of length <= {n}"),
                flagged: false,
            };
            return Ok(out);
        }
        Err(e) => return Err(e),
    };

    let (audit, witness) = audit(set, budget, tol)?;
    out.audit = Some(audit);
    if let Some(w) = witness {
        out.verdict = Verdict::HypothesisViolated(w);
        return Ok(out);
    }

    let alphabet = set.alphabet();
    let delta = match trace_type(g_raw.trace(), tol.trace) {
        Ok(t) => t.delta,
        Err(rejection) => {
            out.verdict = Verdict::HypothesisViolated(Witness {
                word: alphabet.format(&g_word),
                letters: g_word.clone(),
                trace: g_raw.trace(),
                rejection,
            });
            return Ok(out);
        }
    };
    let g = g_raw.scaled(delta.conj().value());
    let nf = spectral::loxodromic_normal_form(&g, tol)?;
    out.loxodromic = Some(LoxodromicInfo {
        word: alphabet.format(&g_word),
        trace: g_raw.trace(),
        r: nf.r,
        delta,
    });

    let (reduced, gens) = match reduce_to_h(set, &g_word, &nf, &g, budget.n_max, tol) {
        Reduction::Ok { reduced, gens } => (reduced, gens),
        Reduction::Violated(w) => {
            out.verdict = Verdict::HypothesisViolated(w);
            return Ok(out);
        }
        Reduction::Unresolved {
            generator,
            rejection,
        } => {
            out.verdict = Verdict::Inconclusive {
                reason: format!(
                    "{} of generator {generator} is off every line Rδ but no loxodromic g^n h with a rejected trace was found",
                    rejection.pairing
                ),
                flagged: false,
            };
            return Ok(out);
        }
    };
    out.reduced = reduced.clone();

    if let Some(line) = detect_c_line(set.gens(), &g, tol)? {
        out.verdict = Verdict::CLine(line);
        return Ok(out);
    }
    let deltas: Vec<CubeRoot> = reduced.iter().map(|r| r.delta).collect();
    if let Some(tr) = detect_totally_real(&gens, &deltas, &nf, tol)? {
        out.verdict = Verdict::TotallyReal(tr);
        return Ok(out);
    }
    let flagged = burnside.dimension == 18;
    out.verdict = Verdict::Inconclusive {
        reason: if flagged {
            "real traces audited but the real span is 18-dimensional: theorem-contradicting numerics, raise precision or budget".into()
        } else {
            "no stable complex line and no real basis among the eigenbases of g".into()
        },
        flagged,
    };
    Ok(out)
}

/// Outcome of re-checking a verdict's certificate from the generators alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictCheck {
    pub ok: bool,
    pub residual: f64,
    pub detail: String,
}

pub fn verify_verdict(set: &GeneratorSet, verdict: &Verdict, tol: &Tolerances) -> VerdictCheck {
    match verdict {
        Verdict::CLine(c) => {
            let residual = set
                .gens()
                .iter()
                .map(|h| line_sine(&(h.matrix() * c.line), &c.line))
                .fold(0.0, f64::max);
            VerdictCheck {
                ok: residual < tol.line,
                residual,
                detail: "max sine of angle between h·L and L".into(),
            }
        }
        Verdict::TotallyReal(t) => {
            if t.deltas.len() != set.gens().len() {
                return VerdictCheck {
                    ok: false,
                    residual: f64::INFINITY,
                    detail: "certificate has the wrong number of cube roots".into(),
                };
            }
            let basis = match crate::hermitian::BasisChange::new(t.basis, set.space()) {
                Ok(b) => b,
                Err(e) => {
                    return VerdictCheck {
                        ok: false,
                        residual: f64::INFINITY,
                        detail: e.to_string(),
                    }
                }
            };
            let gens = set
                .gens()
                .iter()
                .zip(&t.deltas)
                .map(|(h, d)| im_residual(&basis.matrix_of(&(h.matrix() * d.conj().value()))))
                .fold(0.0, f64::max);
            let gram = im_residual(basis.target_gram());
            let residual = gens.max(gram);
            VerdictCheck {
                ok: residual < tol.real,
                residual,
                detail: "max relative |Im| over transported generators and the Gram matrix".into(),
            }
        }
        Verdict::HypothesisViolated(w) => {
            let alphabet = set.alphabet();
            if w.letters.iter().any(|&l| l as usize >= alphabet.len()) {
                return VerdictCheck {
                    ok: false,
                    residual: f64::NAN,
                    detail: "witness uses unknown letters".into(),
                };
            }
            let m = alphabet.evaluate(&w.letters);
            let lox = spectral::classify(&m, tol.class).is_ok_and(|c| c.is_loxodromic());
            match trace_type(m.trace(), tol.trace) {
                Err(r) if lox => VerdictCheck {
                    ok: true,
                    residual: r.residual,
                    detail: "witness is loxodromic and its trace is off every line Rδ".into(),
                },
                _ => VerdictCheck {
                    ok: false,
                    residual: 0.0,
                    detail: "witness does not reproduce".into(),
                },
            }
        }
        Verdict::Inconclusive { .. } => VerdictCheck {
            ok: true,
            residual: 0.0,
            detail: "nothing to certify".into(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::real_diag;
    use crate::pentagon::PentagonConfig;

    fn set(ms: &[Mat3], space: HermitianSpace) -> GeneratorSet {
        GeneratorSet::from_matrices(space, ms, None, 1e-10).unwrap()
    }

    #[test]
    fn diagonal_generator_is_loxodromic_at_length_one() {
        let s = set(&[real_diag(1.0, 0.5, 2.0)], HermitianSpace::null());
        let (w, _) = find_loxodromic(&s, 4, 1, &Tolerances::default()).unwrap();
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn two_elliptics_give_a_loxodromic() {
        let ball = HermitianSpace::ball();
        let a = sample::phase_rotation(0.9, -0.4);
        let u = sample::boost(1, 1.3);
        let b = sample::conjugate(&u, &sample::phase_rotation(-0.7, 1.1), &ball);
        let s = set(&[a, b], ball);
        let tol = Tolerances::default();
        for g in s.gens() {
            assert!(!g.classify(tol.class).unwrap().is_loxodromic());
        }
        let (w, g) = find_loxodromic(&s, 4, 1, &tol).unwrap();
        assert!(w.len() <= 4);
        assert!(g.classify(tol.class).unwrap().is_loxodromic());
    }

    #[test]
    fn scalar_group_has_no_loxodromic() {
        let w = CubeRoot::Omega.value();
        let s = set(&[Mat3::identity() * w], HermitianSpace::ball());
        assert_eq!(
            find_loxodromic(&s, 6, 1, &Tolerances::default()).unwrap_err(),
            Error::NoLoxodromic(6)
        );
    }

    #[test]
    fn single_diagonal_generator_prefers_positive_line() {
        let null = HermitianSpace::null();
        let g = Isometry::certify(real_diag(1.0, 0.5, 2.0), &null, 1e-12).unwrap();
        let line = detect_c_line(std::slice::from_ref(&g), &g, &Tolerances::default())
            .unwrap()
            .unwrap();
        assert_eq!(line.point_type, PointType::Positive);
        assert!(line_sine(&line.line, &Vec3::x()) < 1e-12);
    }

    #[test]
    fn counterexample_is_c_fuchsian() {
        let cfg = PentagonConfig::build(0.0).unwrap();
        let s = GeneratorSet::new(HermitianSpace::ball(), cfg.even_generators(), None).unwrap();
        let tol = Tolerances::default();
        let d = decide(&s, &Budget::default(), &tol).unwrap();
        match &d.verdict {
            Verdict::CLine(c) => {
                assert!(line_sine(&c.line, &Vec3::x()) < 1e-12);
                assert!(c.residuals.iter().all(|&r| r < 1e-8));
            }
            v => panic!("expected a complex line, got {v:?}"),
        }
        assert!(verify_verdict(&s, &d.verdict, &tol).ok);
        assert_eq!(d.burnside_dim, 5);
    }

    #[test]
    fn counterexample_has_no_real_basis() {
        let cfg = PentagonConfig::build(0.0).unwrap();
        let gens = cfg.even_generators();
        let s = GeneratorSet::new(HermitianSpace::ball(), gens.clone(), None).unwrap();
        let tol = Tolerances::default();
        let (w, g) = find_loxodromic(&s, 4, 1, &tol).unwrap();
        let nf = spectral::loxodromic_normal_form(&g, &tol).unwrap();
        let Reduction::Ok { reduced, gens } = reduce_to_h(&s, &w, &nf, &g, 8, &tol) else {
            panic!("real traces must reduce");
        };
        let deltas: Vec<CubeRoot> = reduced.iter().map(|r| r.delta).collect();
        assert!(detect_totally_real(&gens, &deltas, &nf, &tol)
            .unwrap()
            .is_none());
    }

    #[test]
    fn planted_real_group_is_recovered() {
        let (ms, _) = sample::planted_real_group(7, 3);
        let s = set(&ms, HermitianSpace::ball());
        let tol = Tolerances::default();
        let d = decide(&s, &Budget::default(), &tol).unwrap();
        let Verdict::TotallyReal(t) = &d.verdict else {
            panic!("expected a real basis, got {:?}", d.verdict);
        };
        assert!(t.residuals.iter().all(|&r| r < 1e-8));
        assert!(verify_verdict(&s, &d.verdict, &tol).ok);
        assert!(d.burnside_dim <= 9);
    }

    #[test]
    fn scaling_by_cube_roots_keeps_the_verdict_kind() {
        let (mut ms, _) = sample::planted_real_group(8, 3);
        let tol = Tolerances::default();
        let before = decide(&set(&ms, HermitianSpace::ball()), &Budget::default(), &tol).unwrap();
        ms[0] *= CubeRoot::Omega.value();
        ms[2] *= CubeRoot::OmegaBar.value();
        let s = set(&ms, HermitianSpace::ball());
        let after = decide(&s, &Budget::default(), &tol).unwrap();
        assert_eq!(before.verdict.kind(), after.verdict.kind());
        assert!(verify_verdict(&s, &after.verdict, &tol).ok);
    }

    #[test]
    fn non_real_trace_is_a_violation() {
        let s = set(&sample::planted_violator(3), HermitianSpace::ball());
        let tol = Tolerances::default();
        let d = decide(&s, &Budget::default(), &tol).unwrap();
        let Verdict::HypothesisViolated(w) = &d.verdict else {
            panic!("expected a violation, got {:?}", d.verdict);
        };
        assert_eq!(w.letters, vec![2]);
        assert!(verify_verdict(&s, &d.verdict, &tol).ok);
    }

    #[test]
    fn omega_times_real_is_repaired() {
        let ball = HermitianSpace::ball();
        let tol = Tolerances::default();
        let g = Isometry::certify(
            sample::null_to_ball_matrix(&real_diag(1.0, 0.5, 2.0)),
            &ball,
            1e-12,
        )
        .unwrap();
        let nf = spectral::loxodromic_normal_form(&g, &tol).unwrap();
        let real_h = sample::random_so21(&mut sample::rng(4), 1.0);
        let h = Isometry::certify(real_h * CubeRoot::Omega.value(), &ball, 1e-10).unwrap();
        let s = GeneratorSet::new(ball, vec![g.clone(), h], None).unwrap();
        let Reduction::Ok { reduced, gens } = reduce_to_h(&s, &[0], &nf, &g, 8, &tol) else {
            panic!("should reduce");
        };
        assert_eq!(reduced[0].delta, CubeRoot::One);
        assert_eq!(reduced[1].delta, CubeRoot::Omega);
        assert!(gens[1].trace().im.abs() < 1e-9);
    }

    #[test]
    fn burnside_examples() {
        let s = set(&[real_diag(1.0, 0.5, 2.0)], HermitianSpace::null());
        assert!(burnside_dimension(&s, 6, 1).unwrap().dimension <= 3);
        let s = set(&sample::generic_pair(5), HermitianSpace::ball());
        assert_eq!(burnside_dimension(&s, 6, 1).unwrap().dimension, 18);
    }

    #[test]
    fn burnside_is_monotone_in_length() {
        let s = set(&sample::generic_pair(6), HermitianSpace::ball());
        let mut last = 0;
        for len in 0..4 {
            let d = burnside_dimension(&s, len, 1).unwrap().dimension;
            assert!(d >= last && d <= 18);
            last = d;
        }
    }
}
