use std::path::{Path, PathBuf};

use nhpc_core::models::{random_ring_hoppings, ModelSpec, ReservoirSpec, System};
use nhpc_core::observables::DEFAULT_DELTA_PHI;
use nhpc_core::oracle::DEFAULT_DIM_CAP;
use nhpc_core::presets::{Grid, Preset, PresetKind};
use nhpc_core::susceptibility::DEFAULT_ETA;
use nhpc_core::{NhError, Temperature};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Observable computed on every point of the φ grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    NhTrace,
    NhOperator,
    Lr,
    Rr,
    Iso,
    Exact,
    SusceptibilityNh,
    SusceptibilityExact,
}

impl Method {
    pub const CURRENTS: [Method; 6] = [Method::NhTrace, Method::NhOperator, Method::Lr, Method::Rr, Method::Iso, Method::Exact];

    pub fn name(self) -> &'static str {
        match self {
            Method::NhTrace => "nh_trace",
            Method::NhOperator => "nh_operator",
            Method::Lr => "lr",
            Method::Rr => "rr",
            Method::Iso => "iso",
            Method::Exact => "exact",
            Method::SusceptibilityNh => "susceptibility_nh",
            Method::SusceptibilityExact => "susceptibility_exact",
        }
    }

    /// CSV columns this method contributes to `currents.csv`.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Method::Lr => &["lr_re", "lr_im"],
            Method::NhTrace => &["nh_trace"],
            Method::NhOperator => &["nh_operator"],
            Method::Rr => &["rr"],
            Method::Iso => &["iso"],
            Method::Exact => &["exact"],
            Method::SusceptibilityNh | Method::SusceptibilityExact => &[],
        }
    }

    fn needs_oracle(self) -> bool {
        matches!(self, Method::Exact | Method::SusceptibilityExact)
    }
}

fn default_methods() -> Vec<Method> {
    vec![Method::NhTrace, Method::Iso]
}

fn default_delta_phi() -> f64 {
    DEFAULT_DELTA_PHI
}

/// One sweep, as read from a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub reservoirs: Vec<ReservoirSpec>,
    pub phi_grid: Grid,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub omega_grid: Option<Grid>,
    /// Broadening of the exact susceptibility.
    #[serde(default)]
    pub eta: Option<f64>,
    /// Bond the current is measured on; the model default if absent.
    #[serde(default)]
    pub bond: Option<usize>,
    #[serde(default = "default_delta_phi")]
    pub delta_phi: f64,
    /// Draws ring hoppings `t * U(0.7, 1.3)`.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Also write `bonds.csv` with RR and operator currents per bond.
    #[serde(default)]
    pub site_resolved: bool,
    /// Tunnel amplitudes for `kappa_scan.csv`.
    #[serde(default)]
    pub kappas: Vec<f64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn field(name: impl std::fmt::Display) -> impl Fn(NhError) -> CliError {
    move |e| match e {
        NhError::Spec(m) => CliError::Config(format!("{name}: {m}")),
        other => CliError::Config(format!("{name}: {other}")),
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn from_preset(p: &Preset) -> Self {
        let methods = match p.kind {
            PresetKind::Spectrum => vec![Method::NhTrace, Method::Iso],
            PresetKind::Currents => Method::CURRENTS.to_vec(),
            PresetKind::SiteResolved => vec![Method::NhOperator, Method::Rr, Method::Iso],
            PresetKind::KappaScan => vec![Method::NhTrace, Method::Exact],
            PresetKind::SusceptibilityNh => vec![Method::SusceptibilityNh],
            PresetKind::SusceptibilityExact => vec![Method::SusceptibilityExact],
        };
        RunConfig {
            model: p.system.model.clone(),
            reservoirs: p.system.reservoirs.clone(),
            phi_grid: p.phi,
            beta: p.beta,
            methods,
            omega_grid: p.omega,
            eta: p.eta,
            bond: None,
            delta_phi: DEFAULT_DELTA_PHI,
            seed: None,
            site_resolved: p.kind == PresetKind::SiteResolved,
            kappas: p.kappas.clone(),
            output_dir: None,
        }
    }

    pub fn temperature(&self) -> Temperature {
        Temperature::from_beta(self.beta)
    }

    pub fn eta(&self) -> f64 {
        self.eta.unwrap_or(DEFAULT_ETA)
    }

    /// Methods without duplicates, in canonical order.
    pub fn methods(&self) -> Vec<Method> {
        let mut m = self.methods.clone();
        m.sort();
        m.dedup();
        m
    }

    pub fn has(&self, m: Method) -> bool {
        self.methods.contains(&m)
    }

    /// The device with its reservoirs; seeded or uniform ring hoppings are filled in.
    pub fn system(&self) -> System {
        let mut model = self.model.clone();
        if let ModelSpec::Ring(r) = &mut model {
            if let Some(seed) = self.seed {
                r.hoppings = random_ring_hoppings(r.n, r.t, seed);
            } else if r.hoppings.is_empty() {
                r.hoppings = vec![r.t; r.n];
            }
        }
        System::new(model, self.reservoirs.clone())
    }

    pub fn bond(&self) -> usize {
        self.bond.unwrap_or_else(|| self.model.default_bond())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        self.phi_grid.validate("phi_grid").map_err(field("phi_grid"))?;
        if self.seed.is_some() && !matches!(self.model, ModelSpec::Ring(_)) {
            return bad("seed: only ring models take random hoppings".into());
        }
        let sys = self.system();
        sys.model.validate().map_err(field("model"))?;
        let n = sys.model.n_sites();
        for (i, r) in self.reservoirs.iter().enumerate() {
            r.validate(n).map_err(field(format!("reservoirs[{i}]")))?;
        }
        if let Some(b) = self.beta {
            if !(b > 0.0 && b.is_finite()) {
                return bad(format!("beta: must be positive and finite, got {b}"));
            }
        }
        if !(self.delta_phi > 0.0 && self.delta_phi.is_finite()) {
            return bad(format!("delta_phi: must be positive, got {}", self.delta_phi));
        }
        if self.methods.is_empty() {
            return bad("methods: at least one method is required".into());
        }
        let susc = self.has(Method::SusceptibilityNh) || self.has(Method::SusceptibilityExact);
        match &self.omega_grid {
            Some(g) => g.validate("omega_grid").map_err(field("omega_grid"))?,
            None if susc => return bad("omega_grid: required by the susceptibility methods".into()),
            None => {}
        }
        if let Some(e) = self.eta {
            if !(e > 0.0 && e.is_finite()) {
                return bad(format!("eta: must be positive, got {e}"));
            }
        }
        let bonds = sys.model.current_bonds();
        if let Some(b) = self.bond {
            if !bonds.contains(&b) {
                return bad(format!("bond: {b} is not a current bond (valid {}..={})", bonds.start(), bonds.end()));
            }
        }
        if self.has(Method::SusceptibilityNh) || self.has(Method::SusceptibilityExact) {
            if sys.model.bond_phase(self.bond()) != 0.0 {
                return bad(format!("bond: susceptibility needs a bond without flux, {} carries it", self.bond()));
            }
        }
        for (i, &k) in self.kappas.iter().enumerate() {
            if !(k <= 0.0 && k.is_finite()) {
                return bad(format!("kappas[{i}]: must be negative or zero, got {k}"));
            }
        }
        if !self.kappas.is_empty() && self.reservoirs.is_empty() {
            return bad("kappas: a coupling scan needs at least one reservoir".into());
        }
        let oracle = self.methods.iter().any(|m| m.needs_oracle());
        if oracle && sys.total_dim() > DEFAULT_DIM_CAP {
            return bad(format!(
                "methods: exact diagonalization needs total dimension <= {DEFAULT_DIM_CAP}, this system has {}",
                sys.total_dim()
            ));
        }
        Ok(())
    }
}
