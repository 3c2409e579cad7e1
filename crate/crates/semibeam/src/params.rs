//! Model coefficients and the system variant switch.

use crate::error::{Error, Result};

/// Which of the two beam/heat couplings is in force.
///
/// Both variants share the double-beam block; they differ in the heat
/// equation's source term and in the energy weight of the temperature field:
/// `System01` couples the temperature to the rotation rate through a
/// zero-order term, `System02` through the stiffness operator (strong
/// coupling).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemVariant {
    System01,
    System02,
}

impl SystemVariant {
    pub fn label(self) -> &'static str {
        match self {
            SystemVariant::System01 => "system01",
            SystemVariant::System02 => "system02",
        }
    }
}

impl std::fmt::Display for SystemVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for SystemVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "system01" | "system1" | "1" => Ok(SystemVariant::System01),
            "system02" | "system2" | "2" => Ok(SystemVariant::System02),
            other => Err(Error::invalid("variant", format!("unknown system variant `{other}`"))),
        }
    }
}

/// All physical coefficients of one model instance.
///
/// `rho1..rho4` are the inertia coefficients of the four beam equations,
/// `rho5` the heat capacity; `kappa1/kappa2` shear moduli, `b1/b2` bending
/// moduli, `vdw` the van der Waals interaction coefficient coupling the two
/// deflections. `gamma1..gamma3` are the damping gains and `exponents` the
/// corresponding fractional damping powers in `[0, 1]`. `delta` is the
/// thermal coupling, `beta_thermal` the zero-order heat/rotation coupling
/// used only by `System01`, and `conductivity` the Fourier coefficient.
///
/// Everything is dimensionless; no unit system is imposed.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParameters {
    pub variant: SystemVariant,
    pub length: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub rho4: f64,
    pub rho5: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub b1: f64,
    pub b2: f64,
    pub vdw: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub delta: f64,
    pub beta_thermal: f64,
    pub conductivity: f64,
    pub exponents: [f64; 3],
}

impl ModelParameters {
    /// Unit coefficients on `(0, pi)` with fully regular damping `(1,1,1)`.
    pub fn defaults(variant: SystemVariant) -> Self {
        ModelParameters {
            variant,
            length: std::f64::consts::PI,
            rho1: 1.0,
            rho2: 1.0,
            rho3: 1.0,
            rho4: 1.0,
            rho5: 1.0,
            kappa1: 1.0,
            kappa2: 1.0,
            b1: 1.0,
            b2: 1.0,
            vdw: 1.0,
            gamma1: 1.0,
            gamma2: 1.0,
            gamma3: 1.0,
            delta: 1.0,
            beta_thermal: 1.0,
            conductivity: 1.0,
            exponents: [1.0, 1.0, 1.0],
        }
    }

    pub fn with_exponents(mut self, exponents: [f64; 3]) -> Self {
        self.exponents = exponents;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let strictly_positive = [
            ("length", self.length),
            ("rho1", self.rho1),
            ("rho2", self.rho2),
            ("rho3", self.rho3),
            ("rho4", self.rho4),
            ("rho5", self.rho5),
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
            ("b1", self.b1),
            ("b2", self.b2),
            ("vdw", self.vdw),
            ("delta", self.delta),
            ("conductivity", self.conductivity),
        ];
        for (name, value) in strictly_positive {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::invalid(name, format!("must be strictly positive, got {value}")));
            }
        }
        let nonnegative = [
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("gamma3", self.gamma3),
        ];
        for (name, value) in nonnegative {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::invalid(name, format!("must be nonnegative, got {value}")));
            }
        }
        for (i, e) in self.exponents.iter().enumerate() {
            if !e.is_finite() || !(0.0..=1.0).contains(e) {
                return Err(Error::invalid(
                    &format!("exponents[{i}]"),
                    format!("damping exponent must lie in [0, 1], got {e}"),
                ));
            }
        }
        // System01's energy weight for the temperature is rho5*delta/beta.
        if self.variant == SystemVariant::System01
            && (!self.beta_thermal.is_finite() || self.beta_thermal <= 0.0)
        {
            return Err(Error::invalid(
                "beta_thermal",
                format!("System01 requires a positive heat/rotation coupling, got {}", self.beta_thermal),
            ));
        }
        Ok(())
    }

    /// True when every damping gain is active. The stability statements
    /// assume this; gamma = 0 runs are diagnostic references.
    pub fn has_active_dampers(&self) -> bool {
        self.gamma1 > 0.0 && self.gamma2 > 0.0 && self.gamma3 > 0.0
    }
}
