//! Four copies of the regular pentagon with angles `2π/5`, glued along
//! pairs of side midpoints, and the involutions `Q(q_i)` attached to the
//! fourteen midpoints.
//!
//! The first pentagon is centred at the origin with midpoints `q6..q10`
//! listed counterclockwise. Each further copy is the image of the previous
//! one under the half-turn about the hyperbolic midpoint of a shared pair
//! of midpoints, which swaps that pair. The labels this produces are
//! checked against the expected cyclic tuples rather than assumed.

use serde::{Deserialize, Serialize};

use crate::disk::{
    self, block_embed, embed_su21, q_involution, reflect_matrix, regular_pentagon, DiskPoint,
    GeodesicPair, Pentagon, Su11,
};
use crate::error::{Error, Result};
use crate::hermitian::{
    cx, diag, max_abs, max_abs_diff, real, HermitianSpace, Isometry, Mat3, C64,
};
use crate::json;
use crate::tol::Tolerances;

/// Midpoint labels of each pentagon in cyclic order. The cyclic relation
/// of a pentagon `(a, b, c, d, e)` is `Q_e Q_d Q_c Q_b Q_a`.
pub const PENTAGONS: [[usize; 5]; 4] = [
    [6, 7, 8, 9, 10],
    [5, 10, 9, 12, 11],
    [4, 11, 12, 13, 14],
    [1, 2, 3, 14, 13],
];

/// The four factors whose product telescopes to `Q8 Q7 ··· Q1`; each is a
/// cyclic rotation of a pentagon relation read left to right.
pub const FACTORS: [[usize; 5]; 4] = [
    [8, 7, 6, 10, 9],
    [9, 10, 5, 11, 12],
    [12, 11, 4, 14, 13],
    [13, 14, 3, 2, 1],
];

/// `(shared pair, relabelling old → new)` for the three copy steps.
#[allow(clippy::type_complexity)]
const COPIES: [((usize, usize), [(usize, usize); 3]); 3] = [
    ((9, 10), [(8, 5), (7, 11), (6, 12)]),
    ((11, 12), [(9, 4), (5, 13), (10, 14)]),
    ((13, 14), [(4, 1), (11, 2), (12, 3)]),
];

/// The generators of the surface-group-like subgroup: `Q1..Q8`.
pub const GENERATORS: [usize; 8] = [1, 2, 3, 4, 5, 6, 7, 8];

/// A pentagon together with the `q`-labels of its midpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPentagon {
    pub labels: [usize; 5],
    #[serde(flatten)]
    pub pentagon: Pentagon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationCertificate {
    pub name: String,
    #[serde(with = "json::matrix")]
    pub product: Mat3,
    #[serde(with = "json::matrix")]
    pub target: Mat3,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl RelationCertificate {
    fn new(name: impl Into<String>, product: Mat3, target: Mat3, tolerance: f64) -> Self {
        let residual = max_abs_diff(&product, &target);
        Self {
            name: name.into(),
            product,
            target,
            residual,
            tolerance,
            passed: residual < tolerance,
        }
    }

    pub fn to_error(&self) -> Error {
        Error::RelationFailed {
            name: self.name.clone(),
            residual: self.residual,
            tolerance: self.tolerance,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PentagonConfig {
    pub phase: f64,
    pub pentagons: [LabeledPentagon; 4],
    /// `q[i - 1]` is `q_i`.
    pub q: [DiskPoint; 14],
    /// Centres of the three half-turns producing pentagons 2, 3 and 4.
    pub half_turns: [DiskPoint; 3],
    reflections: Vec<Su11>,
    involutions: Vec<Isometry>,
    j: Mat3,
}

fn product(ms: impl IntoIterator<Item = Mat3>) -> Mat3 {
    ms.into_iter().fold(Mat3::identity(), |acc, m| acc * m)
}

fn label_name(labels: &[usize]) -> String {
    labels
        .iter()
        .map(|l| format!("Q{l}"))
        .collect::<Vec<_>>()
        .join("")
}

/// `true` if `a` is a cyclic rotation of `b`.
fn cyclically_equal(a: &[usize; 5], b: &[usize; 5]) -> bool {
    (0..5).any(|s| (0..5).all(|k| a[(k + s) % 5] == b[k]))
}

/// Free reduction of a word in involutions (`QQ = 1`).
pub fn reduce_involution_word(letters: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for l in letters {
        if out.last() == Some(&l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Concatenation of [`FACTORS`] reduced symbolically; expected to be
/// `[8, 7, 6, 5, 4, 3, 2, 1]`.
pub fn telescoped_word() -> Vec<usize> {
    reduce_involution_word(FACTORS.iter().flatten().copied())
}

impl PentagonConfig {
    /// Builds the configuration without judging any relation.
    pub fn build(phase: f64) -> Result<Self> {
        let first = regular_pentagon(&DiskPoint::origin(), phase);
        let mut q: [Option<DiskPoint>; 14] = [None; 14];
        for (k, p) in first.midpoints.iter().enumerate() {
            q[PENTAGONS[0][k] - 1] = Some(*p);
        }
        let mut pentagons = vec![LabeledPentagon {
            labels: PENTAGONS[0],
            pentagon: first,
        }];
        let mut half_turns = [DiskPoint::origin(); 3];
        for (step, ((a, b), relabel)) in COPIES.iter().enumerate() {
            let prev = pentagons.last().expect("non-empty").clone();
            let qa = q[a - 1].expect("shared midpoint labelled");
            let qb = q[b - 1].expect("shared midpoint labelled");
            let centre = disk::midpoint(&qa, &qb)?;
            half_turns[step] = centre;
            let rho = reflect_matrix(&centre)?;
            let image = prev.pentagon.map(&rho);
            let mut labels = [0usize; 5];
            for (k, &old) in prev.labels.iter().enumerate() {
                labels[k] = if old == *a {
                    *b
                } else if old == *b {
                    *a
                } else {
                    relabel
                        .iter()
                        .find(|(o, _)| *o == old)
                        .map(|(_, n)| *n)
                        .ok_or_else(|| Error::Invalid(format!("q{old} has no image label")))?
                };
                if q[labels[k] - 1].is_none() {
                    q[labels[k] - 1] = Some(image.midpoints[k]);
                }
            }
            pentagons.push(LabeledPentagon {
                labels,
                pentagon: image,
            });
        }
        for (lp, want) in pentagons.iter().zip(PENTAGONS.iter()) {
            if !cyclically_equal(&lp.labels, want) {
                return Err(Error::Invalid(format!(
                    "pentagon labels {:?} are not a rotation of {:?}",
                    lp.labels, want
                )));
            }
        }
        let q: [DiskPoint; 14] = q.map(|p| p.expect("all fourteen midpoints labelled"));
        let pentagons: [LabeledPentagon; 4] = pentagons.try_into().expect("four pentagons");
        Self::assemble(phase, pentagons, q, half_turns)
    }

    fn assemble(
        phase: f64,
        pentagons: [LabeledPentagon; 4],
        q: [DiskPoint; 14],
        half_turns: [DiskPoint; 3],
    ) -> Result<Self> {
        let reflections = q.iter().map(reflect_matrix).collect::<Result<Vec<_>>>()?;
        let involutions = q.iter().map(q_involution).collect::<Result<Vec<_>>>()?;
        let mut cfg = Self {
            phase,
            pentagons,
            q,
            half_turns,
            reflections,
            involutions,
            j: Mat3::identity(),
        };
        cfg.j = cfg.pentagon_relation(0);
        Ok(cfg)
    }

    pub fn point(&self, i: usize) -> &DiskPoint {
        &self.q[i - 1]
    }

    /// `Q(q_i)`.
    pub fn involution(&self, i: usize) -> &Isometry {
        &self.involutions[i - 1]
    }

    pub fn involutions(&self) -> &[Isometry] {
        &self.involutions
    }

    /// `R(q_i)`.
    pub fn reflection(&self, i: usize) -> &Su11 {
        &self.reflections[i - 1]
    }

    /// `J = Q10 Q9 Q8 Q7 Q6`.
    pub fn j(&self) -> &Mat3 {
        &self.j
    }

    /// `Q1, ..., Q8`.
    pub fn generators(&self) -> Vec<Isometry> {
        GENERATORS
            .iter()
            .map(|&i| self.involution(i).clone())
            .collect()
    }

    /// Generators `Q1 Qj` (`j = 2..8`) of the even-word subgroup.
    pub fn even_generators(&self) -> Vec<Isometry> {
        (2..=8)
            .map(|j| self.involution(1).compose(self.involution(j)))
            .collect()
    }

    pub fn word(&self, labels: &[usize]) -> Mat3 {
        product(labels.iter().map(|&l| *self.involution(l).matrix()))
    }

    /// Cyclic relation of pentagon `k` (0-based): labels in reverse order.
    pub fn pentagon_relation(&self, k: usize) -> Mat3 {
        let rev: Vec<usize> = self.pentagons[k].labels.iter().rev().copied().collect();
        self.word(&rev)
    }

    /// `+1` or `-1`: the block entry of `J` is `∓i` with the upper sign when
    /// this is `+1`.
    pub fn j_sign(&self) -> i8 {
        if (self.j[(1, 1)] - cx(0.0, -1.0)).norm() <= (self.j[(1, 1)] - cx(0.0, 1.0)).norm() {
            1
        } else {
            -1
        }
    }

    fn j_target(&self) -> Mat3 {
        let u = cx(0.0, -f64::from(self.j_sign()));
        diag(real(-1.0), u, u)
    }

    /// Every relation the configuration is expected to satisfy, each with
    /// its residual. Nothing is short-circuited.
    pub fn verify_relations(&self, tol: &Tolerances) -> Vec<RelationCertificate> {
        let mut out = Vec::new();
        let id = Mat3::identity();
        let minus = -id;
        for i in 1..=14 {
            let r = self.reflection(i).matrix();
            out.push(RelationCertificate::new(
                format!("R(q{i})^2 = -I"),
                block_embed(real(-1.0), &(r * r)),
                minus,
                tol.su,
            ));
        }
        for i in 1..=14 {
            let m = self.involution(i).matrix();
            out.push(RelationCertificate::new(
                format!("Q(q{i})^2 = I"),
                m * m,
                id,
                tol.su,
            ));
        }
        for i in 1..=14 {
            let want = block_embed(real(-1.0), &(self.reflection(i).matrix() * cx(0.0, -1.0)));
            out.push(RelationCertificate::new(
                format!("Q(q{i}) = diag(-1) + (-i)R(q{i})"),
                *self.involution(i).matrix(),
                want,
                tol.su,
            ));
        }
        let sign = if self.j_sign() > 0 { "-i" } else { "+i" };
        out.push(RelationCertificate::new(
            format!("Q10Q9Q8Q7Q6 = diag(-1, {sign}, {sign})"),
            self.pentagon_relation(0),
            self.j_target(),
            tol.relation,
        ));
        let j = self.j_target();
        let j_inv = j.adjoint();
        for k in 0..4 {
            let rel = self.pentagon_relation(k);
            let (target, exp) = if max_abs_diff(&rel, &j) <= max_abs_diff(&rel, &j_inv) {
                (j, "J")
            } else {
                (j_inv, "J^-1")
            };
            let rev: Vec<usize> = self.pentagons[k].labels.iter().rev().copied().collect();
            out.push(RelationCertificate::new(
                format!("pentagon {}: {} = {exp}", k + 1, label_name(&rev)),
                rel,
                target,
                tol.relation,
            ));
        }
        out.push(RelationCertificate::new(
            "J^4 = I",
            j * j * j * j,
            id,
            tol.relation,
        ));
        for (k, f) in FACTORS.iter().enumerate() {
            out.push(RelationCertificate::new(
                format!("factor {}: {} = J", k + 1, label_name(f)),
                self.word(f),
                j,
                tol.relation,
            ));
        }
        out.push(RelationCertificate::new(
            "factor 1 * factor 2 = Q8Q7Q6Q5Q11Q12",
            self.word(&FACTORS[0]) * self.word(&FACTORS[1]),
            self.word(&[8, 7, 6, 5, 11, 12]),
            tol.relation,
        ));
        let eight = [8, 7, 6, 5, 4, 3, 2, 1];
        out.push(RelationCertificate::new(
            "factor 1 * factor 2 * factor 3 * factor 4 = Q8Q7Q6Q5Q4Q3Q2Q1",
            product(FACTORS.iter().map(|f| self.word(f))),
            self.word(&eight),
            tol.relation,
        ));
        out.push(RelationCertificate::new(
            "Q8Q7Q6Q5Q4Q3Q2Q1 = I",
            self.word(&eight),
            id,
            tol.relation,
        ));
        for (step, lp) in self.pentagons.iter().skip(1).enumerate() {
            let prev = &self.pentagons[step];
            let Ok(rho) = reflect_matrix(&self.half_turns[step]).and_then(|r| embed_su21(&r))
            else {
                continue;
            };
            let rho_inv = rho.inverse();
            for (old, new) in prev.labels.iter().zip(lp.labels.iter()) {
                out.push(RelationCertificate::new(
                    format!("half-turn {}: Q(q{new}) = rho Q(q{old}) rho^-1", step + 1),
                    *self.involution(*new).matrix(),
                    rho.matrix() * self.involution(*old).matrix() * rho_inv.matrix(),
                    tol.relation,
                ));
            }
        }
        out
    }

    /// Smallest hyperbolic distance between two of the fourteen midpoints.
    pub fn min_pairwise_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..14 {
            for j in (i + 1)..14 {
                best = best.min(disk::dist(&self.q[i], &self.q[j]));
            }
        }
        best
    }

    /// Geodesics through shared midpoint pairs compared pairwise. The first
    /// two entries are the separating pairs that must be ultraparallel.
    pub fn separation_report(&self, tol_geo: f64) -> Vec<SeparationEntry> {
        let pairs = [
            ((9, 10), (11, 12), true),
            ((11, 12), (13, 14), true),
            ((9, 10), (13, 14), false),
            ((6, 7), (7, 8), false),
        ];
        pairs
            .iter()
            .map(|&(a, b, required)| {
                let outcome = disk::geodesic_through(self.point(a.0), self.point(a.1), tol_geo)
                    .and_then(|g1| {
                        let g2 = disk::geodesic_through(self.point(b.0), self.point(b.1), tol_geo)?;
                        disk::ultraparallel(&g1, &g2, tol_geo)
                    });
                SeparationEntry {
                    first: [a.0, a.1],
                    second: [b.0, b.1],
                    required,
                    outcome: outcome.map_err(|e| e.to_string()),
                }
            })
            .collect()
    }

    pub fn to_file(&self, tol: &Tolerances) -> ConfigFile {
        ConfigFile {
            phase: self.phase,
            q: self.q.to_vec(),
            involutions: self.involutions.iter().map(|m| *m.matrix()).collect(),
            j: self.j,
            j_sign: self.j_sign(),
            half_turns: self.half_turns.to_vec(),
            pentagons: self.pentagons.to_vec(),
            telescoped_word: telescoped_word(),
            min_pairwise_distance: self.min_pairwise_distance(),
            certificates: self.verify_relations(tol),
            separation: self.separation_report(tol.geo),
            geometric_overlap_checked: false,
        }
    }

    /// Rebuilds a configuration from a file, certifying the stored
    /// involutions. Relations are not judged here; use
    /// [`verify_relations`](Self::verify_relations).
    pub fn from_file(file: &ConfigFile, tol: &Tolerances) -> Result<Self> {
        if file.q.len() != 14
            || file.involutions.len() != 14
            || file.pentagons.len() != 4
            || file.half_turns.len() != 3
        {
            return Err(Error::Invalid(
                "configuration needs 14 points, 14 involutions, 4 pentagons and 3 half-turns"
                    .into(),
            ));
        }
        let q: Vec<DiskPoint> = file
            .q
            .iter()
            .map(|p| DiskPoint::new(p.z()))
            .collect::<Result<_>>()?;
        let half_turns: Vec<DiskPoint> = file
            .half_turns
            .iter()
            .map(|p| DiskPoint::new(p.z()))
            .collect::<Result<_>>()?;
        for (lp, want) in file.pentagons.iter().zip(PENTAGONS.iter()) {
            if !cyclically_equal(&lp.labels, want) {
                return Err(Error::Invalid(format!(
                    "unexpected pentagon labels {:?}",
                    lp.labels
                )));
            }
        }
        let ball = HermitianSpace::ball();
        let involutions = file
            .involutions
            .iter()
            .map(|m| Isometry::certify(*m, &ball, tol.su))
            .collect::<Result<Vec<_>>>()?;
        let mut cfg = Self::assemble(
            file.phase,
            file.pentagons.clone().try_into().expect("checked length"),
            q.try_into().expect("checked length"),
            half_turns.try_into().expect("checked length"),
        )?;
        cfg.involutions = involutions;
        cfg.j = cfg.pentagon_relation(0);
        Ok(cfg)
    }
}

/// Builds the configuration and fails on the first certificate that does
/// not pass, or if two midpoints (nearly) coincide.
pub fn build_configuration(phase: f64, tol: &Tolerances) -> Result<PentagonConfig> {
    let cfg = PentagonConfig::build(phase)?;
    let certs = cfg.verify_relations(tol);
    if let Some(bad) = certs.iter().find(|c| !c.passed) {
        return Err(bad.to_error());
    }
    if telescoped_word() != [8, 7, 6, 5, 4, 3, 2, 1] {
        return Err(Error::RelationFailed {
            name: "symbolic telescoping".into(),
            residual: f64::INFINITY,
            tolerance: 0.0,
        });
    }
    let d = cfg.min_pairwise_distance();
    if d <= 1e-6 {
        return Err(Error::RelationFailed {
            name: "distinct midpoints".into(),
            residual: d,
            tolerance: 1e-6,
        });
    }
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationEntry {
    pub first: [usize; 2],
    pub second: [usize; 2],
    /// Whether the pair must be ultraparallel, as opposed to merely recorded.
    pub required: bool,
    pub outcome: std::result::Result<GeodesicPair, String>,
}

impl SeparationEntry {
    pub fn is_ultraparallel(&self) -> bool {
        matches!(&self.outcome, Ok(p) if p.relation == disk::GeodesicRelation::Ultraparallel)
    }
}

/// `config.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigFile {
    pub phase: f64,
    pub q: Vec<DiskPoint>,
    #[serde(rename = "Q", with = "json::matrices")]
    pub involutions: Vec<Mat3>,
    #[serde(rename = "J", with = "json::matrix")]
    pub j: Mat3,
    pub j_sign: i8,
    pub half_turns: Vec<DiskPoint>,
    pub pentagons: Vec<LabeledPentagon>,
    pub telescoped_word: Vec<usize>,
    pub min_pairwise_distance: f64,
    pub certificates: Vec<RelationCertificate>,
    pub separation: Vec<SeparationEntry>,
    /// The pentagons' interiors are not checked for overlap; only the
    /// algebraic relations and the ultraparallel separations are.
    pub geometric_overlap_checked: bool,
}

/// Largest entry modulus over the involutions `Q1..Q14`.
pub fn max_entry(cfg: &PentagonConfig) -> f64 {
    cfg.involutions()
        .iter()
        .map(|m| max_abs(m.matrix()))
        .fold(0.0, f64::max)
}

/// Value of `J` expected from the sign: `diag(-1, -s·i, -s·i)`.
pub fn j_for_sign(sign: i8) -> Mat3 {
    let u: C64 = cx(0.0, -f64::from(sign));
    diag(real(-1.0), u, u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbolic_telescoping() {
        assert_eq!(telescoped_word(), vec![8, 7, 6, 5, 4, 3, 2, 1]);
        let f12 = reduce_involution_word(FACTORS[0].iter().chain(FACTORS[1].iter()).copied());
        assert_eq!(f12, vec![8, 7, 6, 5, 11, 12]);
    }

    #[test]
    fn labels_follow_the_expected_tuples() {
        let cfg = PentagonConfig::build(0.0).unwrap();
        for (lp, want) in cfg.pentagons.iter().zip(PENTAGONS.iter()) {
            assert!(
                cyclically_equal(&lp.labels, want),
                "{:?} vs {:?}",
                lp.labels,
                want
            );
        }
        assert!(cyclically_equal(&[3, 4, 5, 1, 2], &[1, 2, 3, 4, 5]));
        assert!(!cyclically_equal(&[2, 1, 3, 4, 5], &[1, 2, 3, 4, 5]));
    }

    #[test]
    fn every_certificate_passes() {
        let tol = Tolerances::default();
        let cfg = build_configuration(0.0, &tol).unwrap();
        for c in cfg.verify_relations(&tol) {
            assert!(c.passed, "{} residual {:e}", c.name, c.residual);
        }
    }

    #[test]
    fn j_is_diagonal_with_resolved_sign() {
        let cfg = PentagonConfig::build(0.0).unwrap();
        let s = cfg.j_sign();
        assert!(max_abs_diff(cfg.j(), &j_for_sign(s)) < 1e-9);
        let j = cfg.j();
        assert!(max_abs_diff(&(j * j * j * j), &Mat3::identity()) < 1e-9);
    }

    #[test]
    fn tight_tolerance_fails_with_residual() {
        let tol = Tolerances {
            relation: 1e-15,
            ..Tolerances::default()
        };
        match build_configuration(0.0, &tol) {
            Err(Error::RelationFailed {
                residual,
                tolerance,
                ..
            }) => {
                assert!(residual >= tolerance);
            }
            other => panic!("expected a relation failure, got {other:?}"),
        }
    }

    #[test]
    fn midpoints_are_distinct() {
        let cfg = PentagonConfig::build(0.0).unwrap();
        assert!(cfg.min_pairwise_distance() > 1e-6);
    }

    #[test]
    fn separating_geodesics_are_ultraparallel() {
        let cfg = PentagonConfig::build(0.0).unwrap();
        let report = cfg.separation_report(1e-9);
        for e in report.iter().filter(|e| e.required) {
            assert!(e.is_ultraparallel(), "{:?}", e);
            if let Ok(p) = &e.outcome {
                assert!(p.margin > 1e-6);
            }
        }
        // q6q7 and q7q8 meet at q7
        let last = report.last().unwrap();
        assert_eq!(last.first, [6, 7]);
        assert!(!last.is_ultraparallel());
    }

    #[test]
    fn rotated_configuration_passes_too() {
        let tol = Tolerances::default();
        let a = build_configuration(0.0, &tol).unwrap();
        let b = build_configuration(0.3, &tol).unwrap();
        assert_eq!(a.j_sign(), b.j_sign());
        // rotating by the phase conjugates everything by a diagonal element
        let rot = embed_su21(&Su11::rotation(0.3)).unwrap();
        for i in 1..=14 {
            let want = rot.matrix() * a.involution(i).matrix() * rot.inverse().matrix();
            assert!(max_abs_diff(&want, b.involution(i).matrix()) < 1e-9);
        }
    }

    #[test]
    fn file_round_trip() {
        let tol = Tolerances::default();
        let cfg = build_configuration(0.0, &tol).unwrap();
        let file = cfg.to_file(&tol);
        let back = PentagonConfig::from_file(&file, &tol).unwrap();
        for i in 1..=14 {
            assert_eq!(back.involution(i).matrix(), cfg.involution(i).matrix());
        }
        assert!(back.verify_relations(&tol).iter().all(|c| c.passed));
    }
}
