//! Figure presets shipped with the binary.

use anyhow::{bail, Result};

pub const NAMES: [&str; 8] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"];

/// Subcommand each preset is meant for.
pub fn command_for(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig2" | "fig3" | "fig4" | "fig5" | "fig7" => "sweep",
        "fig6" => "region",
        "fig8" => "limits",
        "fig9" => "qam",
        _ => return None,
    })
}

pub fn get(name: &str) -> Result<&'static str> {
    Ok(match name {
        "fig2" => include_str!("../presets/fig2.toml"),
        "fig3" => include_str!("../presets/fig3.toml"),
        "fig4" => include_str!("../presets/fig4.toml"),
        "fig5" => include_str!("../presets/fig5.toml"),
        "fig6" => include_str!("../presets/fig6.toml"),
        "fig7" => include_str!("../presets/fig7.toml"),
        "fig8" => include_str!("../presets/fig8.toml"),
        "fig9" => include_str!("../presets/fig9.toml"),
        _ => bail!("unknown preset `{name}`; available: {}", NAMES.join(", ")),
    })
}
