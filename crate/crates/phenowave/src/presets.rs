//! Shipped experiment presets: complete config files compiled into the
//! binary so the reference runs need no external files. Each is an
//! ordinary config; `--config` with the same content is equivalent.

use crate::config::RunConfig;
use crate::error::{Error, Result};

/// Preset names and their config texts.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig3-pde", include_str!("../presets/fig3-pde.cfg")),
    ("fig3-ibm", include_str!("../presets/fig3-ibm.cfg")),
    ("fig4-pde", include_str!("../presets/fig4-pde.cfg")),
    ("fig4-ibm", include_str!("../presets/fig4-ibm.cfg")),
    ("fig5-top", include_str!("../presets/fig5-top.cfg")),
    ("fig5-mid", include_str!("../presets/fig5-mid.cfg")),
    ("fig5-bottom", include_str!("../presets/fig5-bottom.cfg")),
    ("fig6-top", include_str!("../presets/fig6-top.cfg")),
    ("fig6-mid", include_str!("../presets/fig6-mid.cfg")),
    ("fig6-bottom", include_str!("../presets/fig6-bottom.cfg")),
];

/// All preset names in declaration order.
pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

/// Resolve a preset name to its parsed config.
pub fn load(name: &str) -> Result<RunConfig> {
    let text = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| {
            Error::Config(format!(
                "unknown preset {name:?}; available: {}",
                names().join(", ")
            ))
        })?;
    RunConfig::parse(text)
}
