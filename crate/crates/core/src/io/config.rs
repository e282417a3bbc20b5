//! Sectioned `key = value` run configuration.
//!
//! ```text
//! # comment
//! [gas]
//! gamma = 1.4
//! ```
//!
//! Lines are `[section]`, `key = value`, blank, or `#` comments (also
//! trailing). There are no continuation lines. Unknown sections and keys are
//! errors. Every key has a default; the resolved document, defaults included,
//! is reproduced by [`RunConfig::canonical`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiments::{ExperimentConfig, ExperimentKind, IcFamily, InitialData};
use crate::gas::{GasParams, TransportKind, TransportLaw};
use crate::grid::Grid;
use crate::solver::StepControl;

const SCHEMA: &[(&str, &[&str])] = &[
    ("gas", &["gamma", "R", "A"]),
    (
        "transport",
        &["kind", "mu0", "kappa0", "beta_mu", "beta_kappa", "alpha"],
    ),
    ("grid", &["n", "L"]),
    ("ic", &["family", "amplitude", "support", "seed"]),
    (
        "control",
        &[
            "cfl_hyperbolic",
            "cfl_parabolic",
            "dt_max",
            "positivity_floor",
            "t_end",
            "record_every",
        ],
    ),
    ("output", &["dir", "emit_svg"]),
    ("experiment", &["levels", "gammas"]),
];

/// How the transport coefficients were specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransportSpec {
    Constant { mu0: f64, kappa0: f64 },
    PowerLaw { mu0: f64, kappa0: f64, beta_mu: f64, beta_kappa: f64 },
    /// Exponent `1/2 + 2/α` for both coefficients.
    Kinetic { alpha: f64, mu0: f64, kappa0: f64 },
}

impl TransportSpec {
    pub fn law(&self) -> Result<TransportLaw<f64>> {
        match *self {
            Self::Constant { mu0, kappa0 } => TransportLaw::constant(mu0, kappa0),
            Self::PowerLaw {
                mu0,
                kappa0,
                beta_mu,
                beta_kappa,
            } => TransportLaw::power_law(mu0, kappa0, beta_mu, beta_kappa),
            Self::Kinetic { alpha, mu0, kappa0 } => TransportLaw::kinetic(alpha, mu0, kappa0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcSpec {
    pub family: String,
    pub amplitude: f64,
    pub support: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub emit_svg: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub gas: GasParams<f64>,
    pub transport: TransportSpec,
    pub law: TransportLaw<f64>,
    pub grid: Grid<f64>,
    pub ic: IcSpec,
    pub control: StepControl<f64>,
    pub t_end: f64,
    pub record_every: usize,
    pub output: OutputSpec,
    /// Grid sizes for refinement studies.
    pub levels: Vec<usize>,
    /// Adiabatic exponents for sweeps; defaults to `[gas] gamma`.
    pub gammas: Vec<f64>,
}

struct Entry {
    line: usize,
    value: String,
}

struct Document {
    entries: BTreeMap<(String, String), Entry>,
}

impl Document {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section: Option<&'static str> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| cfg_err(line, format!("malformed section header {content:?}")))?
                    .trim();
                let (known, _) = SCHEMA
                    .iter()
                    .find(|(s, _)| *s == name)
                    .ok_or_else(|| cfg_err(line, format!("unknown section [{name}]")))?;
                section = Some(known);
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| cfg_err(line, format!("expected `key = value`, got {content:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let sec = section.ok_or_else(|| cfg_err(line, format!("key {key:?} outside any section")))?;
            let keys = SCHEMA.iter().find(|(s, _)| *s == sec).expect("known section").1;
            if !keys.contains(&key) {
                return Err(cfg_err(line, format!("unknown key {key:?} in [{sec}]")));
            }
            if value.is_empty() {
                return Err(cfg_err(line, format!("{key}: missing value")));
            }
            let slot = (sec.to_string(), key.to_string());
            if let Some(prev) = entries.get(&slot) {
                let prev: &Entry = prev;
                return Err(cfg_err(
                    line,
                    format!("duplicate key {key:?} in [{sec}] (first set on line {})", prev.line),
                ));
            }
            entries.insert(
                slot,
                Entry {
                    line,
                    value: value.to_string(),
                },
            );
        }
        Ok(Self { entries })
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn line(&self, section: &str, key: &str) -> usize {
        self.get(section, key).map_or(0, |e| e.line)
    }

    fn f64_or(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        match self.get(section, key) {
            None => Ok(default),
            Some(e) => parse_f64(&e.value).ok_or_else(|| {
                cfg_err(e.line, format!("{key}: expected a number, got {:?}", e.value))
            }),
        }
    }

    fn usize_or(&self, section: &str, key: &str, default: usize) -> Result<usize> {
        match self.get(section, key) {
            None => Ok(default),
            Some(e) => e.value.parse().map_err(|_| {
                cfg_err(e.line, format!("{key}: expected a nonnegative integer, got {:?}", e.value))
            }),
        }
    }

    fn str_or(&self, section: &str, key: &str, default: &str) -> String {
        self.get(section, key)
            .map_or_else(|| default.to_string(), |e| unquote(&e.value).to_string())
    }

    fn list<T>(&self, section: &str, key: &str, item: impl Fn(&str) -> Option<T>) -> Result<Option<Vec<T>>> {
        let Some(e) = self.get(section, key) else {
            return Ok(None);
        };
        e.value
            .split(',')
            .map(|s| {
                item(s.trim()).ok_or_else(|| cfg_err(e.line, format!("{key}: bad list item {:?}", s.trim())))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

fn cfg_err(line: usize, message: String) -> Error {
    Error::Config { line, message }
}

fn parse_f64(s: &str) -> Option<f64> {
    match s {
        "inf" | "+inf" | "infinity" => Some(f64::INFINITY),
        _ => s.parse::<f64>().ok().filter(|x| x.is_finite()),
    }
}

fn unquote(s: &str) -> &str {
    s.strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .unwrap_or(s)
}

/// Re-labels a validation error from the owning type with the config line.
fn at(line: usize, key: &str, e: Error) -> Error {
    let message = match e {
        Error::Domain {
            value, requirement, ..
        } => format!("{key} = {value} violates {key} {requirement}"),
        other => format!("{key}: {other}"),
    };
    cfg_err(line, message)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let doc = Document::parse(text)?;

        let gamma = doc.f64_or("gas", "gamma", 1.4)?;
        let r = doc.f64_or("gas", "R", 1.0)?;
        let a = doc.f64_or("gas", "A", 1.0)?;
        if !(gamma > 1.0) {
            return Err(cfg_err(
                doc.line("gas", "gamma"),
                format!("gamma = {gamma} violates gamma > 1"),
            ));
        }
        if !(r > 0.0) {
            return Err(cfg_err(doc.line("gas", "R"), format!("R = {r} violates R > 0")));
        }
        if !(a > 0.0) {
            return Err(cfg_err(doc.line("gas", "A"), format!("A = {a} violates A > 0")));
        }
        let gas = GasParams::new(gamma, r, a).map_err(|e| at(doc.line("gas", "gamma"), "gamma", e))?;

        let transport = Self::transport(&doc)?;
        let law = transport
            .law()
            .map_err(|e| at(doc.line("transport", "kind"), "transport", e))?;

        let n = doc.usize_or("grid", "n", 256)?;
        let l = doc.f64_or("grid", "L", 10.0)?;
        if n < Grid::<f64>::MIN_CELLS || n % 2 != 0 {
            return Err(cfg_err(
                doc.line("grid", "n"),
                format!("n = {n} violates n even and >= {}", Grid::<f64>::MIN_CELLS),
            ));
        }
        if !(l > 0.0) {
            return Err(cfg_err(doc.line("grid", "L"), format!("L = {l} violates L > 0")));
        }
        let grid = Grid::new(n, l).map_err(|e| at(doc.line("grid", "n"), "n", e))?;

        let family = doc.str_or("ic", "family", "sine_bump");
        if IcFamily::from_name(&family).is_none() {
            return Err(cfg_err(
                doc.line("ic", "family"),
                format!("family = {family:?} violates family in {{sine_bump, entropy_bump}}"),
            ));
        }
        let amplitude = doc.f64_or("ic", "amplitude", 0.1)?;
        let support = doc.f64_or("ic", "support", 0.25 * l)?;
        let dx = grid.dx();
        if !(support >= 8.0 * dx && support < 0.5 * l) {
            return Err(cfg_err(
                doc.line("ic", "support"),
                format!(
                    "support = {support} violates 8 dx <= support < L/2 (here [{}, {}))",
                    8.0 * dx,
                    0.5 * l
                ),
            ));
        }
        let seed = doc.usize_or("ic", "seed", 0)? as u64;

        let control = StepControl {
            cfl_hyperbolic: doc.f64_or("control", "cfl_hyperbolic", 0.4)?,
            cfl_parabolic: doc.f64_or("control", "cfl_parabolic", 0.4)?,
            dt_max: doc.f64_or("control", "dt_max", f64::INFINITY)?,
            positivity_floor: doc.f64_or("control", "positivity_floor", 1e-8)?,
        };
        if let Err(e) = control.validate() {
            let key = match &e {
                Error::Domain { what, .. } => *what,
                _ => "control",
            };
            return Err(at(doc.line("control", key), key, e));
        }
        let t_end = doc.f64_or("control", "t_end", 1.0)?;
        if !(t_end >= 0.0) || !t_end.is_finite() {
            return Err(cfg_err(
                doc.line("control", "t_end"),
                format!("t_end = {t_end} violates t_end >= 0"),
            ));
        }
        let record_every = doc.usize_or("control", "record_every", 100)?;
        if record_every == 0 {
            return Err(cfg_err(
                doc.line("control", "record_every"),
                "record_every = 0 violates record_every >= 1".into(),
            ));
        }

        let output = OutputSpec {
            dir: PathBuf::from(doc.str_or("output", "dir", "out")),
            emit_svg: match doc.str_or("output", "emit_svg", "false").as_str() {
                "true" => true,
                "false" => false,
                other => {
                    return Err(cfg_err(
                        doc.line("output", "emit_svg"),
                        format!("emit_svg = {other:?} violates emit_svg in {{true, false}}"),
                    ))
                }
            },
        };

        let levels = doc
            .list("experiment", "levels", |s| s.parse::<usize>().ok())?
            .unwrap_or_else(|| vec![128, 256, 512]);
        if levels.is_empty() || levels.windows(2).any(|w| w[1] != 2 * w[0]) {
            return Err(cfg_err(
                doc.line("experiment", "levels"),
                format!("levels = {levels:?} violates each level doubling the previous"),
            ));
        }
        let gammas = doc
            .list("experiment", "gammas", parse_f64)?
            .unwrap_or_else(|| vec![gamma]);
        if let Some(g) = gammas.iter().find(|&&g| !(g > 1.0)) {
            return Err(cfg_err(
                doc.line("experiment", "gammas"),
                format!("gammas entry {g} violates gamma > 1"),
            ));
        }

        Ok(Self {
            gas,
            transport,
            law,
            grid,
            ic: IcSpec {
                family,
                amplitude,
                support,
                seed,
            },
            control,
            t_end,
            record_every,
            output,
            levels,
            gammas,
        })
    }

    fn transport(doc: &Document) -> Result<TransportSpec> {
        let has = |k| doc.get("transport", k).is_some();
        let mu0 = doc.f64_or("transport", "mu0", 1.0)?;
        let kappa0 = doc.f64_or("transport", "kappa0", 1.0)?;
        for (key, v) in [("mu0", mu0), ("kappa0", kappa0)] {
            if !(v > 0.0) {
                return Err(cfg_err(doc.line("transport", key), format!("{key} = {v} violates {key} > 0")));
            }
        }
        let default_kind = if has("alpha") {
            "kinetic"
        } else if has("beta_mu") || has("beta_kappa") {
            "power_law"
        } else {
            "constant"
        };
        let kind = doc.str_or("transport", "kind", default_kind);
        let kind_line = doc.line("transport", "kind");
        match kind.as_str() {
            "constant" => {
                for k in ["alpha", "beta_mu", "beta_kappa"] {
                    if has(k) {
                        return Err(cfg_err(doc.line("transport", k), format!("{k} is not used by kind = constant")));
                    }
                }
                Ok(TransportSpec::Constant { mu0, kappa0 })
            }
            "power_law" => {
                if has("alpha") {
                    return Err(cfg_err(
                        doc.line("transport", "alpha"),
                        "alpha is not used by kind = power_law".into(),
                    ));
                }
                Ok(TransportSpec::PowerLaw {
                    mu0,
                    kappa0,
                    beta_mu: doc.f64_or("transport", "beta_mu", 0.0)?,
                    beta_kappa: doc.f64_or("transport", "beta_kappa", 0.0)?,
                })
            }
            "kinetic" => {
                for k in ["beta_mu", "beta_kappa"] {
                    if has(k) {
                        return Err(cfg_err(doc.line("transport", k), format!("{k} is not used by kind = kinetic")));
                    }
                }
                let alpha = doc.f64_or("transport", "alpha", 4.0)?;
                if !(alpha > 0.0) {
                    return Err(cfg_err(
                        doc.line("transport", "alpha"),
                        format!("alpha = {alpha} violates alpha > 0"),
                    ));
                }
                Ok(TransportSpec::Kinetic { alpha, mu0, kappa0 })
            }
            other => Err(cfg_err(
                kind_line,
                format!("kind = {other:?} violates kind in {{constant, power_law, kinetic}}"),
            )),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn initial_data(&self) -> InitialData {
        InitialData {
            family: IcFamily::from_name(&self.ic.family).expect("validated family"),
            amplitude: self.ic.amplitude,
            support: self.ic.support,
        }
    }

    /// Resolved configuration, defaults included, in parseable form.
    pub fn canonical(&self) -> String {
        let mut s = self.physics_text();
        let _ = write!(
            s,
            "\n[output]\ndir = {}\nemit_svg = {}\n",
            self.output.dir.display(),
            self.output.emit_svg
        );
        s
    }

    /// Everything that influences the computed numbers; `[output]` excluded.
    fn physics_text(&self) -> String {
        let mut s = String::new();
        let g = &self.gas;
        let _ = writeln!(s, "[gas]\ngamma = {:?}\nR = {:?}\nA = {:?}", g.gamma(), g.r(), g.a());
        let _ = writeln!(s, "\n[transport]");
        match self.transport {
            TransportSpec::Constant { mu0, kappa0 } => {
                let _ = writeln!(s, "kind = constant\nmu0 = {mu0:?}\nkappa0 = {kappa0:?}");
            }
            TransportSpec::PowerLaw {
                mu0,
                kappa0,
                beta_mu,
                beta_kappa,
            } => {
                let _ = writeln!(
                    s,
                    "kind = power_law\nmu0 = {mu0:?}\nkappa0 = {kappa0:?}\nbeta_mu = {beta_mu:?}\nbeta_kappa = {beta_kappa:?}"
                );
            }
            TransportSpec::Kinetic { alpha, mu0, kappa0 } => {
                let _ = writeln!(s, "kind = kinetic\nalpha = {alpha:?}\nmu0 = {mu0:?}\nkappa0 = {kappa0:?}");
            }
        }
        let _ = writeln!(s, "\n[grid]\nn = {}\nL = {:?}", self.grid.n(), self.grid.half_width());
        let _ = writeln!(
            s,
            "\n[ic]\nfamily = {}\namplitude = {:?}\nsupport = {:?}\nseed = {}",
            self.ic.family, self.ic.amplitude, self.ic.support, self.ic.seed
        );
        let c = &self.control;
        let dt_max = if c.dt_max.is_infinite() {
            "inf".to_string()
        } else {
            format!("{:?}", c.dt_max)
        };
        let _ = writeln!(
            s,
            "\n[control]\ncfl_hyperbolic = {:?}\ncfl_parabolic = {:?}\ndt_max = {dt_max}\npositivity_floor = {:?}\nt_end = {:?}\nrecord_every = {}",
            c.cfl_hyperbolic, c.cfl_parabolic, c.positivity_floor, self.t_end, self.record_every
        );
        let join = |v: Vec<String>| v.join(", ");
        let _ = writeln!(
            s,
            "\n[experiment]\nlevels = {}\ngammas = {}",
            join(self.levels.iter().map(|n| n.to_string()).collect()),
            join(self.gammas.iter().map(|g| format!("{g:?}")).collect())
        );
        s
    }

    /// First 8 bytes (little-endian) of the SHA-256 of the canonical physics
    /// text. Stored in checkpoints to refuse resuming under another config.
    pub fn hash(&self) -> u64 {
        let digest = Sha256::digest(self.physics_text().as_bytes());
        u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
    }

    pub fn experiment(&self, kind: ExperimentKind) -> ExperimentConfig {
        ExperimentConfig {
            kind,
            levels: match kind {
                ExperimentKind::Convergence => self.levels.clone(),
                _ => vec![self.grid.n()],
            },
            half_width: self.grid.half_width(),
            t_end: self.t_end,
            gammas: self.gammas.clone(),
            r: self.gas.r(),
            a: self.gas.a(),
            law: self.law,
            ic: self.initial_data(),
            seed: self.ic.seed,
            control: self.control,
            record_every: self.record_every,
            output_path: Some(self.output.dir.clone()),
        }
    }

    pub fn transport_kind(&self) -> TransportKind {
        self.law.kind()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = RunConfig::parse("[gas]\ngamma = 1.4\n").unwrap();
        assert_eq!(cfg.gas.gamma(), 1.4);
        assert_eq!(cfg.grid.n(), 256);
        assert_eq!(cfg.control, StepControl::default());
        assert_eq!(cfg.transport, TransportSpec::Constant { mu0: 1.0, kappa0: 1.0 });
        assert_eq!(cfg.gammas, vec![1.4]);
        let echo = cfg.canonical();
        assert!(echo.contains("cfl_parabolic = 0.4"));
        assert!(echo.contains("dt_max = inf"));
        assert_eq!(RunConfig::parse(&echo).unwrap(), cfg);
    }

    #[test]
    fn gamma_constraint_names_key_and_bound() {
        let err = RunConfig::parse("[gas]\ngamma = 0.9\n").unwrap_err().to_string();
        assert!(err.contains("gamma") && err.contains("> 1"), "{err}");
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::parse("[gas]\ngama = 1.4\n").unwrap_err().to_string();
        assert!(err.contains("gama"), "{err}");
        assert!(RunConfig::parse("[nope]\n").is_err());
        assert!(RunConfig::parse("gamma = 1.4\n").is_err());
    }

    #[test]
    fn comments_and_quotes() {
        let cfg = RunConfig::parse(
            "# header\n[output] # trailing\ndir = \"results\" # where\nemit_svg = true\n",
        )
        .unwrap();
        assert_eq!(cfg.output.dir, PathBuf::from("results"));
        assert!(cfg.output.emit_svg);
    }

    #[test]
    fn transport_variants() {
        let k = RunConfig::parse("[transport]\nalpha = 4\n").unwrap();
        assert!(matches!(k.transport, TransportSpec::Kinetic { alpha, .. } if alpha == 4.0));
        assert_eq!(k.law.beta_mu(), 1.0);
        let p = RunConfig::parse("[transport]\nkind = power_law\nbeta_mu = 0.5\n").unwrap();
        assert_eq!(p.law.beta_mu(), 0.5);
        assert_eq!(p.law.beta_kappa(), 0.0);
        assert!(RunConfig::parse("[transport]\nkind = constant\nalpha = 4\n").is_err());
        assert!(RunConfig::parse("[transport]\nkind = magic\n").is_err());
        assert!(RunConfig::parse("[transport]\nmu0 = -1\n").is_err());
    }

    #[test]
    fn constraint_violations() {
        for bad in [
            "[grid]\nn = 15\n",
            "[grid]\nL = 0\n",
            "[control]\ncfl_parabolic = 2\n",
            "[control]\nrecord_every = 0\n",
            "[ic]\nsupport = 9\n",
            "[ic]\nfamily = square\n",
            "[experiment]\nlevels = 128, 200\n",
            "[experiment]\ngammas = 1.2, 1.0\n",
            "[gas]\ngamma = 1.4\ngamma = 1.5\n",
            "[gas]\ngamma = abc\n",
        ] {
            assert!(RunConfig::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn hash_ignores_output_and_formatting() {
        let a = RunConfig::parse("[gas]\ngamma = 1.4\n[output]\ndir = a\n").unwrap();
        let b = RunConfig::parse("[gas]\ngamma=1.40   # same\n[output]\ndir = b\n").unwrap();
        let c = RunConfig::parse("[gas]\ngamma = 1.41\n").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }
}
