use super::{parse_scenario, Scenario};

const CANNED: &[(&str, &str)] = &[
    ("no_atom", include_str!("../../scenarios/no_atom.toml")),
    ("classical_ev", include_str!("../../scenarios/classical_ev.toml")),
    ("two_level", include_str!("../../scenarios/two_level.toml")),
    ("sigma_plus", include_str!("../../scenarios/sigma_plus.toml")),
    ("linear_x", include_str!("../../scenarios/linear_x.toml")),
    ("bell_linear", include_str!("../../scenarios/bell_linear.toml")),
    ("bell_circular", include_str!("../../scenarios/bell_circular.toml")),
];

pub fn canned_names() -> impl Iterator<Item = &'static str> {
    CANNED.iter().map(|(name, _)| *name)
}

/// One of the scenarios shipped under `scenarios/`.
pub fn canned(name: &str) -> Option<Scenario> {
    CANNED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| parse_scenario(text).expect("canned scenarios parse"))
}
