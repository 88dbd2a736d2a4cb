use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::exactreal::DEFAULT_BIT_CAP;
use crate::limits::LawKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    DynkinLamperti,
    CriticalFarey,
    CriticalThaler,
    LargeDeviation,
    ContinuedFractions,
    Tables,
    Records,
    Digits,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::DynkinLamperti,
        ExperimentKind::CriticalFarey,
        ExperimentKind::CriticalThaler,
        ExperimentKind::LargeDeviation,
        ExperimentKind::ContinuedFractions,
        ExperimentKind::Tables,
        ExperimentKind::Records,
        ExperimentKind::Digits,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::DynkinLamperti => "dynkin-lamperti",
            ExperimentKind::CriticalFarey => "critical-farey",
            ExperimentKind::CriticalThaler => "critical-thaler",
            ExperimentKind::LargeDeviation => "large-deviation",
            ExperimentKind::ContinuedFractions => "continued-fractions",
            ExperimentKind::Tables => "tables",
            ExperimentKind::Records => "records",
            ExperimentKind::Digits => "digits",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ExperimentError::Config(format!("unknown experiment {s:?}")))
    }
}

/// Where the visit times come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Farey,
    LasotaYorke,
    Thaler0,
    Renewal,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Farey => "farey",
            Model::LasotaYorke => "lasota-yorke",
            Model::Thaler0 => "thaler0",
            Model::Renewal => "renewal",
        }
    }
}

impl FromStr for Model {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Model::Farey, Model::LasotaYorke, Model::Thaler0, Model::Renewal]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| ExperimentError::Config(format!("unknown map {s:?}; expected farey, lasota-yorke, thaler0 or renewal")))
    }
}

/// Farey digit source: the fast conditional chain or exact lazy refinement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Chain,
    Exact,
}

impl FromStr for Engine {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "chain" => Ok(Engine::Chain),
            "exact" => Ok(Engine::Exact),
            other => Err(ExperimentError::Config(format!(
                "unknown engine {other:?}; expected chain or exact"
            ))),
        }
    }
}

/// Config as read from a file or flags; anything left out takes the
/// experiment's default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub experiment: Option<ExperimentKind>,
    pub map: Option<Model>,
    pub engine: Option<Engine>,
    pub alphas: Option<Vec<f64>>,
    pub horizons: Option<Vec<u64>>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub x_grid: Option<Vec<f64>>,
    pub xy_grid: Option<Vec<[f64; 2]>>,
    pub cap: Option<u64>,
    pub bit_cap: Option<u64>,
    pub max_degraded: Option<f64>,
    pub precisions: Option<Vec<usize>>,
    pub laws: Option<Vec<LawKind>>,
    pub grid_points: Option<usize>,
}

impl PartialConfig {
    /// Fields set in `other` win.
    pub fn overlay(self, other: PartialConfig) -> PartialConfig {
        PartialConfig {
            experiment: other.experiment.or(self.experiment),
            map: other.map.or(self.map),
            engine: other.engine.or(self.engine),
            alphas: other.alphas.or(self.alphas),
            horizons: other.horizons.or(self.horizons),
            samples: other.samples.or(self.samples),
            seed: other.seed.or(self.seed),
            x_grid: other.x_grid.or(self.x_grid),
            xy_grid: other.xy_grid.or(self.xy_grid),
            cap: other.cap.or(self.cap),
            bit_cap: other.bit_cap.or(self.bit_cap),
            max_degraded: other.max_degraded.or(self.max_degraded),
            precisions: other.precisions.or(self.precisions),
            laws: other.laws.or(self.laws),
            grid_points: other.grid_points.or(self.grid_points),
        }
    }
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub map: Model,
    pub engine: Engine,
    pub alphas: Vec<f64>,
    /// Sorted ascending, without duplicates.
    pub horizons: Vec<u64>,
    pub samples: usize,
    pub seed: u64,
    pub x_grid: Vec<f64>,
    pub xy_grid: Vec<[f64; 2]>,
    /// Iteration cap for orbit engines.
    pub cap: u64,
    /// Bit budget of the exact lazy engines.
    pub bit_cap: u64,
    /// Largest tolerated fraction of samples with lost certification.
    pub max_degraded: f64,
    /// Bit precisions tried, in order, for orbits that lose certification in
    /// double-double arithmetic.
    pub precisions: Vec<usize>,
    pub laws: Vec<LawKind>,
    pub grid_points: usize,
}

pub const DEFAULT_SEED: u64 = 20_240_601;

const CRITICAL_HORIZONS: [u64; 3] = [1_000, 31_623, 1_000_000];

impl ExperimentConfig {
    pub fn defaults(kind: ExperimentKind) -> Self {
        let mut c = ExperimentConfig {
            experiment: kind,
            map: Model::Farey,
            engine: Engine::Chain,
            alphas: Vec::new(),
            horizons: vec![1_000],
            samples: 1_000,
            seed: DEFAULT_SEED,
            x_grid: Vec::new(),
            xy_grid: Vec::new(),
            cap: 0,
            bit_cap: 1 << 16,
            max_degraded: 0.01,
            precisions: Vec::new(),
            laws: Vec::new(),
            grid_points: 201,
        };
        match kind {
            ExperimentKind::DynkinLamperti => {
                c.map = Model::Renewal;
                c.alphas = vec![0.3, 0.5, 0.7];
                c.horizons = vec![100_000];
                c.samples = 50_000;
            }
            ExperimentKind::CriticalFarey => {
                c.horizons = CRITICAL_HORIZONS.to_vec();
                c.samples = 10_000;
            }
            ExperimentKind::CriticalThaler => {
                c.map = Model::Thaler0;
                c.x_grid = vec![0.5, 0.6, 0.8, 1.0];
                c.cap = 1_000_000;
                c.precisions = vec![256, 512, 1024];
            }
            ExperimentKind::LargeDeviation => {
                c.horizons = vec![1_000_000];
                c.samples = 1_000_000;
                c.x_grid = vec![0.5, 1.0, 2.0];
                c.xy_grid = vec![[0.5, 0.5], [0.0, 1.0]];
            }
            ExperimentKind::ContinuedFractions => {
                c.horizons = CRITICAL_HORIZONS.to_vec();
                c.samples = 10_000;
                c.x_grid = vec![(-1f64).exp(), 1.0];
            }
            ExperimentKind::Tables => {
                c.alphas = vec![0.15, 0.3, 0.5, 0.8, 0.98];
                c.laws = LawKind::PARAMETRIC.to_vec();
            }
            ExperimentKind::Records => {
                c.samples = 100;
            }
            ExperimentKind::Digits => {
                c.samples = 10;
                c.bit_cap = DEFAULT_BIT_CAP;
            }
        }
        c
    }

    /// Defaults for the named experiment, overridden by `partial`, then
    /// validated.
    pub fn resolve(partial: PartialConfig) -> Result<Self, ExperimentError> {
        let kind = partial
            .experiment
            .ok_or_else(|| ExperimentError::Config("no experiment given".into()))?;
        let mut c = Self::defaults(kind);
        let mut explicit_cap = false;
        macro_rules! take {
            ($($f:ident),*) => {$(if let Some(v) = partial.$f { c.$f = v; })*};
        }
        take!(
            map,
            engine,
            alphas,
            horizons,
            samples,
            seed,
            x_grid,
            xy_grid,
            bit_cap,
            max_degraded,
            precisions,
            laws,
            grid_points
        );
        if let Some(cap) = partial.cap {
            c.cap = cap;
            explicit_cap = true;
        }
        c.horizons.sort_unstable();
        c.horizons.dedup();
        if kind == ExperimentKind::CriticalThaler && !explicit_cap {
            c.cap = c.cap.max(c.horizons.last().copied().unwrap_or(0));
        }
        c.validate()?;
        Ok(c)
    }

    pub fn max_horizon(&self) -> u64 {
        *self.horizons.last().expect("validated")
    }

    fn validate(&self) -> Result<(), ExperimentError> {
        use ExperimentKind::*;
        let bad = |msg: String| Err(ExperimentError::Config(msg));
        let kind = self.experiment;
        if kind != Tables {
            if self.samples == 0 {
                return bad("samples must be at least 1".into());
            }
            if self.horizons.is_empty() {
                return bad("at least one horizon is required".into());
            }
            let least = if matches!(kind, CriticalFarey | CriticalThaler | ContinuedFractions) {
                2
            } else {
                1
            };
            if self.horizons[0] < least {
                return bad(format!("horizons must be at least {least}"));
            }
        }
        let allowed: &[Model] = match kind {
            DynkinLamperti => &[Model::Renewal],
            CriticalFarey => &[Model::Farey, Model::LasotaYorke],
            CriticalThaler => &[Model::Thaler0],
            LargeDeviation | ContinuedFractions | Digits => &[Model::Farey],
            Records => &[Model::Farey, Model::LasotaYorke, Model::Renewal],
            Tables => &[Model::Farey, Model::LasotaYorke, Model::Thaler0, Model::Renewal],
        };
        if !allowed.contains(&self.map) {
            return bad(format!("map {} is not available for {}", self.map.name(), kind));
        }
        let needs_alpha = kind == DynkinLamperti || kind == Tables || (kind == Records && self.map == Model::Renewal);
        if needs_alpha {
            if self.alphas.is_empty() {
                return bad("at least one alpha is required".into());
            }
            for &a in &self.alphas {
                if kind == Tables && !(a > 0.0 && a < 1.0) {
                    return bad(format!("alpha must lie in (0, 1), got {a}"));
                }
                if kind != Tables && (a == 0.0 || a == 1.0) {
                    return bad(format!(
                        "alpha = {a} is a critical case; use critical-thaler (alpha = 0) or critical-farey (alpha = 1)"
                    ));
                }
                if !(a > 0.0 && a < 1.0) {
                    return bad(format!("alpha must lie in (0, 1), got {a}"));
                }
            }
        }
        match kind {
            CriticalThaler => {
                if self.x_grid.is_empty() {
                    return bad("x grid is empty".into());
                }
                if self.cap < self.max_horizon() {
                    return bad(format!("cap {} is below the horizon {}", self.cap, self.max_horizon()));
                }
                for &x in &self.x_grid {
                    if !(x > 0.0 && x.is_finite()) {
                        return bad(format!("x must be positive, got {x}"));
                    }
                    let need = (self.max_horizon() as f64).powf(1.0 / x);
                    if need > self.cap as f64 + 1.0 {
                        return bad(format!("x = {x} needs V compared with {need:.0}, above cap {}", self.cap));
                    }
                }
                if self.precisions.iter().any(|&p| !(128..=4096).contains(&p)) {
                    return bad("precisions must lie between 128 and 4096 bits".into());
                }
                if !(0.0..=1.0).contains(&self.max_degraded) {
                    return bad("max_degraded must lie in [0, 1]".into());
                }
            }
            LargeDeviation => {
                if self.x_grid.is_empty() && self.xy_grid.is_empty() {
                    return bad("x and (x, y) grids are both empty".into());
                }
                if let Some(x) = self.x_grid.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
                    return bad(format!("x must be positive, got {x}"));
                }
                for &[x, y] in &self.xy_grid {
                    if !((0.0..1.0).contains(&x) && y >= 0.0 && x + y > 0.0 && y.is_finite()) {
                        return bad(format!("(x, y) = ({x}, {y}) needs 0 <= x < 1, y >= 0, x + y > 0"));
                    }
                }
            }
            ContinuedFractions => {
                if let Some(x) = self.x_grid.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
                    return bad(format!("x must be positive, got {x}"));
                }
            }
            Tables => {
                if self.laws.is_empty() {
                    return bad("no laws requested".into());
                }
                if self.laws.contains(&LawKind::PointMass) {
                    return bad("point masses have no density table".into());
                }
                if self.grid_points < 2 {
                    return bad("grid needs at least 2 points".into());
                }
            }
            _ => {}
        }
        Ok(())
    }
}
