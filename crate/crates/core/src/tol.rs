use serde::{Deserialize, Serialize};

/// Tolerances used across the crate. Every verification reports the residual
/// it achieved next to the tolerance it was compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Form and determinant residual for `SU(2,1)` / `SU(1,1)` membership.
    pub su: f64,
    /// Margin on `|λ| - 1` above which an element counts as loxodromic.
    pub class: f64,
    /// Relative tolerance for cube-root trace types.
    pub trace: f64,
    /// Sine of the projective angle for stable complex lines.
    pub line: f64,
    /// Imaginary-part bound for totally real bases.
    pub real: f64,
    /// Angular tolerance (radians) on boundary endpoints of geodesics.
    pub geo: f64,
    /// Max-entry residual for group relations.
    pub relation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            su: 1e-10,
            class: 1e-6,
            trace: 1e-8,
            line: 1e-8,
            real: 1e-8,
            geo: 1e-9,
            relation: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> crate::Result<()> {
        let all = [
            ("su", self.su),
            ("class", self.class),
            ("trace", self.trace),
            ("line", self.line),
            ("real", self.real),
            ("geo", self.geo),
            ("relation", self.relation),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(crate::Error::Invalid(format!(
                    "tolerance {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}
