use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Stable keys of every identity the suite evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityId {
    TorseForming,
    WeylCompatibility,
    ContractionIdentity,
    ContractionIff,
    RicciDecomposition,
    PhiGradientSpatial,
    GrwVelocityCriterion,
    N4Lovelock,
    N4QuarterDelta,
    N4Reconstruction,
    N4ElectricRepresentation,
    N4WeylSquare,
    N4VanishingIff,
    GammaGeneralizedCurvature,
    GammaTraceless,
    GammaUAnnihilation,
    GammaRecurrence,
    GammaVanishesN4,
    GammaSquare,
    WeylScalarPositivity,
    Adati,
    DivergenceFormula,
    DivergenceContractions,
    MasterRecurrence,
    MasterGammaConsistency,
    PurelyElectricDivergenceFree,
    DivergenceFreeContractionRecurrence,
    DivergenceFreeElectric,
    DivergenceFreeElectricCurl,
}

/// Where an identity is expected to hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    /// Every metric, any dimension.
    AnyMetric,
    /// Every metric in four dimensions.
    AnyMetricDim4,
    /// Space-times with a torse-forming unit velocity.
    TwistedFamily,
    /// The same, in four dimensions.
    TwistedFamilyDim4,
    /// Minkowski, RW and GRW only.
    GrwFamily,
    /// Twisted family, and only at points where a hypothesis holds.
    Conditional,
}

/// Display grouping for text reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    Velocity,
    TwistedStructure,
    FourDimensions,
    GammaTensor,
    WeylDivergence,
    Conditional,
    Recurrence,
}

impl Group {
    pub fn title(self) -> &'static str {
        match self {
            Group::Velocity => "Torse-forming velocity",
            Group::TwistedStructure => "Twisted space-time structure",
            Group::FourDimensions => "Weyl algebra in four dimensions",
            Group::GammaTensor => "The traceless tensor Γ",
            Group::WeylDivergence => "Bianchi identity and Weyl divergence",
            Group::Conditional => "Divergence-free Weyl tensor (conditional)",
            Group::Recurrence => "Recurrence along u",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IdentityInfo {
    pub id: IdentityId,
    pub group: Group,
    pub scope: Scope,
    /// The statement being checked, in index notation.
    pub reference: &'static str,
    pub tolerance: f64,
}

macro_rules! entry {
    ($id:ident, $group:ident, $scope:ident, $tol:expr, $text:expr) => {
        IdentityInfo {
            id: IdentityId::$id,
            group: Group::$group,
            scope: Scope::$scope,
            reference: $text,
            tolerance: $tol,
        }
    };
}

pub static REGISTRY: &[IdentityInfo] = &[
    entry!(TorseForming, Velocity, TwistedFamily, 1e-9,
        "∇_i u_j = φ (g_ij + u_i u_j), u_k u^k = −1"),
    entry!(WeylCompatibility, TwistedStructure, TwistedFamily, 1e-9,
        "(u_i C_jklm + u_j C_kilm + u_k C_ijlm) u^m = 0"),
    entry!(ContractionIdentity, TwistedStructure, TwistedFamily, 1e-9,
        "C_jklm u^m = u_k E_jl − u_j E_kl"),
    entry!(ContractionIff, TwistedStructure, TwistedFamily, 1e-9,
        "C_jklm u^m = 0 ⇔ E_ij = 0"),
    entry!(RicciDecomposition, TwistedStructure, TwistedFamily, 1e-9,
        "R_jk = (R − nξ)/(n−1) u_j u_k + (R − ξ)/(n−1) g_jk + (n−2)(u_j v_k + u_k v_j − E_jk)"),
    entry!(PhiGradientSpatial, TwistedStructure, TwistedFamily, 1e-11,
        "v_k u^k = 0 with v^k = (g^km + u^k u^m) ∇_m φ"),
    entry!(GrwVelocityCriterion, TwistedStructure, GrwFamily, 1e-10,
        "GRW ⇒ v_j = 0"),
    entry!(N4Lovelock, FourDimensions, AnyMetricDim4, 1e-10,
        "g_ar C_bcst + g_br C_cast + g_cr C_abst + g_at C_bcrs + g_bt C_cars + g_ct C_abrs + g_as C_bctr + g_bs C_catr + g_cs C_abtr = 0"),
    entry!(N4QuarterDelta, FourDimensions, AnyMetricDim4, 1e-10,
        "C_abcr C^abcs = ¼ δ_r^s C²"),
    entry!(N4Reconstruction, FourDimensions, AnyMetricDim4, 1e-9,
        "C_abcd = −u^m (u_a C_mbcd + u_b C_amcd + u_c C_abmd + u_d C_abcm) + g_ad E_bc − g_bd E_ac − g_ac E_bd + g_bc E_ad"),
    entry!(N4ElectricRepresentation, FourDimensions, TwistedFamilyDim4, 1e-9,
        "C_abcd = 2(u_a u_d E_bc − u_a u_c E_bd + u_b u_c E_ad − u_b u_d E_ac) + g_ad E_bc − g_ac E_bd + g_bc E_ad − g_bd E_ac"),
    entry!(N4WeylSquare, FourDimensions, TwistedFamilyDim4, 1e-9,
        "C² = 8 E²"),
    entry!(N4VanishingIff, FourDimensions, TwistedFamilyDim4, 1e-9,
        "C_abcd = 0 ⇔ E_ab = 0 (n = 4)"),
    entry!(GammaGeneralizedCurvature, GammaTensor, TwistedFamily, 1e-10,
        "Γ_iklm = −Γ_kilm = −Γ_ikml = Γ_lmik, Γ_iklm + Γ_klim + Γ_likm = 0"),
    entry!(GammaTraceless, GammaTensor, TwistedFamily, 1e-10,
        "g^ab Γ contracted on any slot pair = 0"),
    entry!(GammaUAnnihilation, GammaTensor, TwistedFamily, 1e-10,
        "u^m Γ_jklm = 0 (every slot)"),
    entry!(GammaRecurrence, GammaTensor, TwistedFamily, 1e-8,
        "u^p ∇_p Γ_jklm = −2φ Γ_jklm"),
    entry!(GammaVanishesN4, GammaTensor, TwistedFamilyDim4, 1e-9,
        "Γ_jklm = 0 (n = 4)"),
    entry!(GammaSquare, GammaTensor, TwistedFamily, 1e-9,
        "Γ² = C² − 4 (n−2)/(n−3) E²"),
    entry!(WeylScalarPositivity, GammaTensor, TwistedFamily, 1e-10,
        "C² = 4 (n−2)/(n−3) E² + Γ² ≥ 0, E² ≥ 0, Γ² ≥ 0"),
    entry!(Adati, WeylDivergence, AnyMetric, 1e-8,
        "∇_i C_jklm + ∇_j C_kilm + ∇_k C_ijlm = (n−3)⁻¹ ∇_p (g_jm C_kil^p + g_km C_ijl^p + g_im C_jkl^p + g_kl C_jim^p + g_il C_kjm^p + g_jl C_ikm^p)"),
    entry!(DivergenceFormula, WeylDivergence, TwistedFamily, 1e-8,
        "∇_p C_ikm^p = (n−3)(∇_i E_km − ∇_k E_im) + (n−2)[u^p ∇_p (u_i E_km − u_k E_im) + 2φ (u_i E_km − u_k E_im)] + (2u_k u_m + g_km) ∇_p E_i^p − (2u_i u_m + g_im) ∇_p E_k^p"),
    entry!(DivergenceContractions, WeylDivergence, TwistedFamily, 1e-8,
        "u^k u^m ∇_p C_jkm^p = ∇_p E_j^p, u^j ∇_p C_jkm^p = u_m ∇_p E^p_k − φ(n−1) E_km − u^p ∇_p E_km"),
    entry!(MasterRecurrence, Recurrence, TwistedFamily, 1e-8,
        "(n−3)(u^p ∇_p C_iklm + 2φ C_iklm) = (n−2)[u^p ∇_p A_iklm + 2φ A_iklm] + [u^p ∇_p B_iklm + 2φ B_iklm], A = u_i u_m E_kl − u_k u_m E_il − u_i u_l E_km + u_k u_l E_im, B = g_im E_kl − g_km E_il − g_il E_km + g_kl E_im"),
    entry!(MasterGammaConsistency, Recurrence, TwistedFamily, 1e-9,
        "master recurrence residual = (n−3)(u^p ∇_p Γ + 2φ Γ)"),
    entry!(PurelyElectricDivergenceFree, Conditional, Conditional, 1e-8,
        "u_m C_jkl^m = 0 ⇒ ∇_m C_jkl^m = 0"),
    entry!(DivergenceFreeContractionRecurrence, Conditional, Conditional, 1e-8,
        "∇_m C_jkl^m = 0 ⇒ u^p ∇_p (u_m C_jkl^m) = −φ (n−1) u_m C_jkl^m"),
    entry!(DivergenceFreeElectric, Conditional, Conditional, 1e-8,
        "∇^p C_jklp = 0 ⇒ ∇_p E^pk = 0 and u^p ∇_p E_km = −φ (n−1) E_km"),
    entry!(DivergenceFreeElectricCurl, Conditional, Conditional, 1e-8,
        "∇_m C_jkl^m = 0 ⇒ ∇_i E_km − ∇_k E_im = (n−2) φ (u_i E_km − u_k E_im)"),
];

impl IdentityId {
    pub fn info(self) -> &'static IdentityInfo {
        REGISTRY
            .iter()
            .find(|e| e.id == self)
            .expect("every identity has a registry entry")
    }

    pub fn as_str(self) -> &'static str {
        match self {
            IdentityId::TorseForming => "torse_forming",
            IdentityId::WeylCompatibility => "weyl_compatibility",
            IdentityId::ContractionIdentity => "contraction_identity",
            IdentityId::ContractionIff => "contraction_iff",
            IdentityId::RicciDecomposition => "ricci_decomposition",
            IdentityId::PhiGradientSpatial => "phi_gradient_spatial",
            IdentityId::GrwVelocityCriterion => "grw_velocity_criterion",
            IdentityId::N4Lovelock => "n4_lovelock",
            IdentityId::N4QuarterDelta => "n4_quarter_delta",
            IdentityId::N4Reconstruction => "n4_reconstruction",
            IdentityId::N4ElectricRepresentation => "n4_electric_representation",
            IdentityId::N4WeylSquare => "n4_weyl_square",
            IdentityId::N4VanishingIff => "n4_vanishing_iff",
            IdentityId::GammaGeneralizedCurvature => "gamma_generalized_curvature",
            IdentityId::GammaTraceless => "gamma_traceless",
            IdentityId::GammaUAnnihilation => "gamma_u_annihilation",
            IdentityId::GammaRecurrence => "gamma_recurrence",
            IdentityId::GammaVanishesN4 => "gamma_vanishes_n4",
            IdentityId::GammaSquare => "gamma_square",
            IdentityId::WeylScalarPositivity => "weyl_scalar_positivity",
            IdentityId::Adati => "adati",
            IdentityId::DivergenceFormula => "divergence_formula",
            IdentityId::DivergenceContractions => "divergence_contractions",
            IdentityId::MasterRecurrence => "master_recurrence",
            IdentityId::MasterGammaConsistency => "master_gamma_consistency",
            IdentityId::PurelyElectricDivergenceFree => "purely_electric_divergence_free",
            IdentityId::DivergenceFreeContractionRecurrence => "divergence_free_contraction_recurrence",
            IdentityId::DivergenceFreeElectric => "divergence_free_electric",
            IdentityId::DivergenceFreeElectricCurl => "divergence_free_electric_curl",
        }
    }

    pub fn all() -> impl Iterator<Item = IdentityId> {
        REGISTRY.iter().map(|e| e.id)
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IdentityId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        IdentityId::all()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownIdentity(s.to_string()))
    }
}
