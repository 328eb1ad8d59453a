//! Continuous risk assessment for cloud infrastructures described as
//! infrastructure-as-code templates.
//!
//! The pipeline is: [`iac`] parses templates into resource descriptors,
//! [`ontology`] translates them into a provider-agnostic view,
//! [`profile`] defines the threat profiles (configuration weaknesses),
//! [`assessment`] evaluates profiles against both views and rebuilds the
//! per-asset attack map, and [`risk`] turns that map into scores.

pub mod assessment;
pub mod document;
pub mod iac;
pub mod ontology;
pub mod profile;
pub mod risk;

pub use assessment::{
    brute_force_oracle, evaluate_all, evaluate_profile, join_views, reconstruct_attack_map,
    AssetThreatMap, Binding, IdentifiedThreat,
};
pub use document::DocumentValue;
pub use iac::{parse_path, parse_template, resolve_path, IacTemplate, PathExpr, ResourceDescriptor};
pub use ontology::{OntologyResource, RuleSet};
pub use profile::{parse_profile, validate_name, ProfileName, ProtectionGoal, ThreatProfile};
pub use risk::{compute_risk, RiskReport, RiskScore};
