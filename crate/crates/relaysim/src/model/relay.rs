//! Memoryless relay functions.
//!
//! A relay applies a real scalar map `f` to its complex input, lifted either
//! componentwise (`f(re) + i f(im)`) or in modulus-phase form
//! (`f(|r|) * exp(i arg r)`).

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::de::Error as DeError;
use serde::ser::Error as SerError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;
use crate::Result;

/// The scalar map a relay applies.
#[derive(Clone)]
pub enum RelayKind {
    /// Identity map; the only kind with a closed-form destination likelihood.
    Linear,
    /// Hyperbolic tangent, the default saturating nonlinearity.
    Tanh,
    /// Arbitrary user-supplied scalar map. Not serializable; outputs are
    /// checked for finiteness at application time.
    Custom { name: String, f: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
}

impl RelayKind {
    /// Custom map from a closure and a display name.
    pub fn custom(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        RelayKind::Custom { name: name.into(), f: Arc::new(f) }
    }

    #[inline]
    fn eval(&self, x: f64) -> f64 {
        match self {
            RelayKind::Linear => x,
            RelayKind::Tanh => x.tanh(),
            RelayKind::Custom { f, .. } => f(x),
        }
    }

    fn name(&self) -> &str {
        match self {
            RelayKind::Linear => "linear",
            RelayKind::Tanh => "tanh",
            RelayKind::Custom { name, .. } => name,
        }
    }
}

impl fmt::Debug for RelayKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RelayKind({})", self.name())
    }
}

/// How the scalar map acts on a complex input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplexMode {
    /// `f(re) + i f(im)`.
    Componentwise,
    /// `f(|r|) * exp(i arg r)`; the phase of `0` is taken as `0`.
    ModulusPhase,
}

/// A relay's full input-output behaviour: scalar kind plus complex lifting.
#[derive(Debug, Clone)]
pub struct RelayFunction {
    /// Scalar map.
    pub kind: RelayKind,
    /// Complex lifting mode.
    pub mode: ComplexMode,
}

impl RelayFunction {
    /// Componentwise tanh, the default relay.
    pub fn tanh() -> Self {
        RelayFunction { kind: RelayKind::Tanh, mode: ComplexMode::Componentwise }
    }

    /// Identity relay (both modes agree on it).
    pub fn linear() -> Self {
        RelayFunction { kind: RelayKind::Linear, mode: ComplexMode::Componentwise }
    }

    /// True if the relay is the identity map.
    pub fn is_linear(&self) -> bool {
        matches!(self.kind, RelayKind::Linear)
    }

    /// Apply the relay to one complex input without a finiteness check.
    #[inline]
    pub fn apply_unchecked(&self, r: Complex64) -> Complex64 {
        match self.mode {
            ComplexMode::Componentwise => Complex64::new(self.kind.eval(r.re), self.kind.eval(r.im)),
            ComplexMode::ModulusPhase => {
                let modulus = r.norm();
                if modulus == 0.0 {
                    Complex64::new(self.kind.eval(0.0), 0.0)
                } else {
                    Complex64::from_polar(self.kind.eval(modulus), r.arg())
                }
            }
        }
    }

    /// Apply the relay to one complex input, rejecting non-finite outputs.
    pub fn apply(&self, r: Complex64) -> Result<Complex64> {
        let out = self.apply_unchecked(r);
        if out.re.is_finite() && out.im.is_finite() {
            Ok(out)
        } else {
            Err(Error::NumericDomain(format!(
                "relay map {:?} produced non-finite output {out} at input {r}",
                self.kind
            )))
        }
    }

    /// Apply the relay elementwise to a matrix of inputs.
    pub fn apply_matrix(&self, r: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
        r.iter().map(|row| row.iter().map(|&z| self.apply(z)).collect()).collect()
    }
}

impl Serialize for RelayKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RelayKind::Linear => s.serialize_str("linear"),
            RelayKind::Tanh => s.serialize_str("tanh"),
            RelayKind::Custom { name, .. } => Err(S::Error::custom(format!(
                "custom relay map '{name}' cannot be serialized; use it through the library API"
            ))),
        }
    }
}

impl<'de> Deserialize<'de> for RelayKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        match name.as_str() {
            "linear" => Ok(RelayKind::Linear),
            "tanh" => Ok(RelayKind::Tanh),
            other => Err(D::Error::custom(format!(
                "unknown relay kind '{other}' (expected 'linear' or 'tanh')"
            ))),
        }
    }
}

impl Serialize for RelayFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Doc<'a> {
            kind: &'a RelayKind,
            mode: ComplexMode,
        }
        Doc { kind: &self.kind, mode: self.mode }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RelayFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Doc {
            kind: RelayKind,
            #[serde(default = "default_mode")]
            mode: ComplexMode,
        }
        let doc = Doc::deserialize(d)?;
        Ok(RelayFunction { kind: doc.kind, mode: doc.mode })
    }
}

fn default_mode() -> ComplexMode {
    ComplexMode::Componentwise
}
