use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Radial kernel families `K(x, y) = k(|x - y|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    /// `-|x - y|^r` with `r` in `(0, 2)`.
    Riesz { r: f64 },
    /// `exp(-|x - y|^2 / (2 sigma_sq))`.
    Gaussian { sigma_sq: f64 },
    /// `(|x - y|^2 + c)^(-1/2)`.
    InverseMultiquadric { c: f64 },
    /// `exp(-|x - y| / sigma)`.
    Laplace { sigma: f64 },
}

impl KernelSpec {
    /// The negative distance kernel, the only one with a sorting fast path.
    pub const ENERGY: KernelSpec = KernelSpec::Riesz { r: 1.0 };

    pub fn riesz(r: f64) -> Result<Self> {
        KernelSpec::Riesz { r }.validated()
    }

    pub fn gaussian(sigma_sq: f64) -> Result<Self> {
        KernelSpec::Gaussian { sigma_sq }.validated()
    }

    pub fn inverse_multiquadric(c: f64) -> Result<Self> {
        KernelSpec::InverseMultiquadric { c }.validated()
    }

    pub fn laplace(sigma: f64) -> Result<Self> {
        KernelSpec::Laplace { sigma }.validated()
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            KernelSpec::Riesz { r } => r > 0.0 && r < 2.0,
            KernelSpec::Gaussian { sigma_sq: p }
            | KernelSpec::InverseMultiquadric { c: p }
            | KernelSpec::Laplace { sigma: p } => p > 0.0 && p.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidKernel(self.to_string()))
        }
    }

    pub fn validated(self) -> Result<Self> {
        self.validate().map(|()| self)
    }

    pub fn is_energy(&self) -> bool {
        matches!(*self, KernelSpec::Riesz { r } if r == 1.0)
    }

    pub fn family(&self) -> &'static str {
        match self {
            KernelSpec::Riesz { .. } => "riesz",
            KernelSpec::Gaussian { .. } => "gaussian",
            KernelSpec::InverseMultiquadric { .. } => "imq",
            KernelSpec::Laplace { .. } => "laplace",
        }
    }

    pub fn param(&self) -> f64 {
        match *self {
            KernelSpec::Riesz { r } => r,
            KernelSpec::Gaussian { sigma_sq } => sigma_sq,
            KernelSpec::InverseMultiquadric { c } => c,
            KernelSpec::Laplace { sigma } => sigma,
        }
    }

    /// Parse `family` + `param` as used on the command line.
    pub fn from_parts(family: &str, param: f64) -> Result<Self> {
        let k = match family.to_ascii_lowercase().as_str() {
            "riesz" | "energy" => KernelSpec::Riesz { r: param },
            "gaussian" | "gauss" => KernelSpec::Gaussian { sigma_sq: param },
            "imq" | "inverse-multiquadric" | "inverse_multiquadric" => {
                KernelSpec::InverseMultiquadric { c: param }
            }
            "laplace" | "laplacian" => KernelSpec::Laplace { sigma: param },
            other => return Err(Error::InvalidKernel(format!("unknown family '{other}'"))),
        };
        k.validated()
    }

    /// Kernel value as a function of the squared distance.
    #[inline]
    pub fn value_sq(&self, dist_sq: f64) -> f64 {
        match *self {
            KernelSpec::Riesz { r } => -dist_sq.powf(0.5 * r),
            KernelSpec::Gaussian { sigma_sq } => (-dist_sq / (2.0 * sigma_sq)).exp(),
            KernelSpec::InverseMultiquadric { c } => 1.0 / (dist_sq + c).sqrt(),
            KernelSpec::Laplace { sigma } => (-dist_sq.sqrt() / sigma).exp(),
        }
    }

    /// Scalar `s` with `grad_x K(x, y) = s * (x - y)`, given `|x - y|^2`.
    ///
    /// Returns 0 at coincidence for the non-smooth families (zero subgradient).
    #[inline]
    pub fn grad_coef_sq(&self, dist_sq: f64) -> f64 {
        match *self {
            KernelSpec::Riesz { r } => {
                if dist_sq == 0.0 {
                    0.0
                } else if r == 1.0 {
                    -1.0 / dist_sq.sqrt()
                } else {
                    -r * dist_sq.powf(0.5 * r - 1.0)
                }
            }
            KernelSpec::Gaussian { sigma_sq } => -(-dist_sq / (2.0 * sigma_sq)).exp() / sigma_sq,
            KernelSpec::InverseMultiquadric { c } => {
                let s = dist_sq + c;
                -1.0 / (s * s.sqrt())
            }
            KernelSpec::Laplace { sigma } => {
                if dist_sq == 0.0 {
                    0.0
                } else {
                    let dist = dist_sq.sqrt();
                    -(-dist / sigma).exp() / (sigma * dist)
                }
            }
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            KernelSpec::Riesz { r } => write!(f, "riesz(r={r})"),
            KernelSpec::Gaussian { sigma_sq } => write!(f, "gaussian(sigma^2={sigma_sq})"),
            KernelSpec::InverseMultiquadric { c } => write!(f, "imq(c={c})"),
            KernelSpec::Laplace { sigma } => write!(f, "laplace(sigma={sigma})"),
        }
    }
}

/// Parses `family:param`, e.g. `riesz:1`, `gaussian:0.05`, `imq:0.5`, `laplace:1`.
impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (family, param) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidKernel(format!("expected family:param, got '{s}'")))?;
        let param: f64 = param
            .trim()
            .parse()
            .map_err(|_| Error::InvalidKernel(format!("bad parameter in '{s}'")))?;
        KernelSpec::from_parts(family.trim(), param)
    }
}
