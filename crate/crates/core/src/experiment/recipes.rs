//! Bundled configs, one per figure data set.

use super::config::RunConfig;

#[derive(Debug, Clone, Copy)]
pub struct Recipe {
    pub name: &'static str,
    pub description: &'static str,
    /// Measured single-core wall time of a release build.
    pub runtime: &'static str,
    pub config: &'static str,
}

impl Recipe {
    pub fn parse(&self) -> RunConfig {
        RunConfig::parse(self.config).expect("bundled recipes are valid")
    }
}

pub const RECIPES: &[Recipe] = &[
    Recipe {
        name: "fig2a",
        description: "spectrum: lowest five gaps vs h, N = 100",
        runtime: "<1 s",
        config: include_str!("../../recipes/fig2a.toml"),
    },
    Recipe {
        name: "fig2b",
        description: "spectrum: all levels vs h plus doublet phase boundary, N = 100",
        runtime: "<1 s",
        config: include_str!("../../recipes/fig2b.toml"),
    },
    Recipe {
        name: "fig2c",
        description: "wpd: work distribution from h_i = 0.5",
        runtime: "<1 s",
        config: include_str!("../../recipes/fig2c.toml"),
    },
    Recipe {
        name: "fig2d",
        description: "wpd: work distribution from h_i = 1.5",
        runtime: "<1 s",
        config: include_str!("../../recipes/fig2d.toml"),
    },
    Recipe {
        name: "fig3a",
        description: "quench: W(t), P(t), S(t) from h_i = 0.5",
        runtime: "<1 s",
        config: include_str!("../../recipes/fig3a.toml"),
    },
    Recipe {
        name: "fig3c",
        description: "quench-sweep: W_max, <W>, std W, P_max, t_opt from h_i = 0.5",
        runtime: "~5 s",
        config: include_str!("../../recipes/fig3c.toml"),
    },
    Recipe {
        name: "fig3e",
        description: "quench: W(t), P(t), S(t) from h_i = 1.5",
        runtime: "<1 s",
        config: include_str!("../../recipes/fig3e.toml"),
    },
    Recipe {
        name: "fig3g",
        description: "quench-sweep: W_max, <W>, std W, P_max, t_opt from h_i = 1.5",
        runtime: "~5 s",
        config: include_str!("../../recipes/fig3g.toml"),
    },
    Recipe {
        name: "fig4",
        description: "quench-sweep: E_max and E_max/W^M for M = 50, 80, 100",
        runtime: "~5 min",
        config: include_str!("../../recipes/fig4.toml"),
    },
    Recipe {
        name: "fig5a",
        description: "bath: W, <n>, E, E/W at g = 0.25, N = 10",
        runtime: "~2 s",
        config: include_str!("../../recipes/fig5a.toml"),
    },
    Recipe {
        name: "fig5b",
        description: "bath: W, <n>, E, E/W at g = 2, N = 10",
        runtime: "~2 s",
        config: include_str!("../../recipes/fig5b.toml"),
    },
    Recipe {
        name: "fig6",
        description: "bath-sweep: W_max, E at W_max and ratio vs g",
        runtime: "~20 s",
        config: include_str!("../../recipes/fig6.toml"),
    },
    Recipe {
        name: "fig7a",
        description: "bath: level occupations at t(W_max), g = 0.25",
        runtime: "~2 s",
        config: include_str!("../../recipes/fig7a.toml"),
    },
    Recipe {
        name: "fig7b",
        description: "bath: level occupations at t(W_max), g = 2",
        runtime: "~2 s",
        config: include_str!("../../recipes/fig7b.toml"),
    },
    Recipe {
        name: "fig7c",
        description: "bath: level occupations at t(W_max), g = 10",
        runtime: "~2 s",
        config: include_str!("../../recipes/fig7c.toml"),
    },
    Recipe {
        name: "fig8a",
        description: "isotropic-check: closed-form levels and gaps vs diagonalization",
        runtime: "<1 s",
        config: include_str!("../../recipes/fig8a.toml"),
    },
    Recipe {
        name: "fig8b",
        description: "wpd: isotropic model, single-point distribution",
        runtime: "<1 s",
        config: include_str!("../../recipes/fig8b.toml"),
    },
    Recipe {
        name: "fig9",
        description: "quench: E(t) and E/W^M(t) for M = 50, 80",
        runtime: "~10 s",
        config: include_str!("../../recipes/fig9.toml"),
    },
];

pub fn find(name: &str) -> Option<&'static Recipe> {
    RECIPES.iter().find(|r| r.name == name)
}
