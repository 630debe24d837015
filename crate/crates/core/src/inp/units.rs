use serde::{Deserialize, Serialize};

// Conversion constants used by EPANET.
const FT_PER_M: f64 = 1.0 / 0.3048;
const GRAVITY_FT: f64 = 32.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FlowUnits {
    Cfs,
    Gpm,
    Mgd,
    Imgd,
    Afd,
    Lps,
    Lpm,
    Mld,
    Cmh,
    Cmd,
}

impl FlowUnits {
    pub fn parse(token: &str) -> Option<Self> {
        Some(match token.to_ascii_uppercase().as_str() {
            "CFS" => FlowUnits::Cfs,
            "GPM" => FlowUnits::Gpm,
            "MGD" => FlowUnits::Mgd,
            "IMGD" => FlowUnits::Imgd,
            "AFD" => FlowUnits::Afd,
            "LPS" => FlowUnits::Lps,
            "LPM" => FlowUnits::Lpm,
            "MLD" => FlowUnits::Mld,
            "CMH" => FlowUnits::Cmh,
            "CMD" => FlowUnits::Cmd,
            _ => return None,
        })
    }

    pub fn token(self) -> &'static str {
        match self {
            FlowUnits::Cfs => "CFS",
            FlowUnits::Gpm => "GPM",
            FlowUnits::Mgd => "MGD",
            FlowUnits::Imgd => "IMGD",
            FlowUnits::Afd => "AFD",
            FlowUnits::Lps => "LPS",
            FlowUnits::Lpm => "LPM",
            FlowUnits::Mld => "MLD",
            FlowUnits::Cmh => "CMH",
            FlowUnits::Cmd => "CMD",
        }
    }

    /// Flow units per cubic foot per second.
    pub fn per_cfs(self) -> f64 {
        match self {
            FlowUnits::Cfs => 1.0,
            FlowUnits::Gpm => 448.831,
            FlowUnits::Mgd => 0.64632,
            FlowUnits::Imgd => 0.5382,
            FlowUnits::Afd => 1.9837,
            FlowUnits::Lps => 28.317,
            FlowUnits::Lpm => 1699.0,
            FlowUnits::Mld => 2.4466,
            FlowUnits::Cmh => 101.94,
            FlowUnits::Cmd => 2446.6,
        }
    }

    /// SI flow units imply metres for lengths and heads, millimetres for
    /// diameters.
    pub fn is_si(self) -> bool {
        matches!(
            self,
            FlowUnits::Lps | FlowUnits::Lpm | FlowUnits::Mld | FlowUnits::Cmh | FlowUnits::Cmd
        )
    }

    fn length_to_ft(self, x: f64) -> f64 {
        if self.is_si() {
            x * FT_PER_M
        } else {
            x
        }
    }

    fn diameter_to_ft(self, x: f64) -> f64 {
        if self.is_si() {
            x / 304.8
        } else {
            x / 12.0
        }
    }

    fn head_from_ft(self, h: f64) -> f64 {
        if self.is_si() {
            h * 0.3048
        } else {
            h
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeadlossFormula {
    #[serde(rename = "H-W")]
    HazenWilliams,
    #[serde(rename = "D-W")]
    DarcyWeisbach,
    #[serde(rename = "C-M")]
    ChezyManning,
}

impl HeadlossFormula {
    pub fn parse(token: &str) -> Option<Self> {
        Some(match token.to_ascii_uppercase().as_str() {
            "H-W" => HeadlossFormula::HazenWilliams,
            "D-W" => HeadlossFormula::DarcyWeisbach,
            "C-M" => HeadlossFormula::ChezyManning,
            _ => return None,
        })
    }

    pub fn token(self) -> &'static str {
        match self {
            HeadlossFormula::HazenWilliams => "H-W",
            HeadlossFormula::DarcyWeisbach => "D-W",
            HeadlossFormula::ChezyManning => "C-M",
        }
    }

    /// Flow exponent `mu` shared by every pipe and valve.
    pub fn exponent(self) -> f64 {
        match self {
            HeadlossFormula::HazenWilliams => 1.852,
            HeadlossFormula::DarcyWeisbach | HeadlossFormula::ChezyManning => 2.0,
        }
    }

    /// Pipe resistance in the file's head and flow units.
    ///
    /// The coefficient is computed in feet and cfs, then converted. Darcy-Weisbach
    /// uses the fully rough friction factor `0.25 / log10(eps / 3.7 d)^2`, so the
    /// resistance does not depend on flow.
    pub fn resistance(self, units: FlowUnits, length: f64, diameter: f64, roughness: f64) -> f64 {
        let l = units.length_to_ft(length);
        let d = units.diameter_to_ft(diameter);
        let base = match self {
            HeadlossFormula::HazenWilliams => 4.727 * l / roughness.powf(1.852) / d.powf(4.871),
            HeadlossFormula::DarcyWeisbach => {
                // roughness is in millifeet (US) or millimetres (SI)
                let eps = if units.is_si() {
                    roughness / 304.8
                } else {
                    roughness * 1e-3
                };
                let log = (eps / (3.7 * d)).log10();
                let friction = 0.25 / (log * log);
                let area = std::f64::consts::PI * d * d / 4.0;
                friction * l / (2.0 * GRAVITY_FT * d * area * area)
            }
            HeadlossFormula::ChezyManning => {
                let a = 4.0 * roughness / (1.49 * std::f64::consts::PI * d * d);
                a * a * (d / 4.0).powf(-4.0 / 3.0) * l
            }
        };
        units.head_from_ft(base) / units.per_cfs().powf(self.exponent())
    }
}
