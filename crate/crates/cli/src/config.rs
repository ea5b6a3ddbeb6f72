//! Flat `key = value` run configuration.
//!
//! A config is assembled from an optional file, then command-line
//! `KEY=VALUE` overrides, then `--out`. Every key must be consumed by the
//! chosen experiment; leftovers are rejected. [`RunConfig::to_manifest`]
//! writes the fully resolved configuration back in the same format.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use willmore_core::cutoff::RadialCutoff;
use willmore_core::flow::{AbortCriteria, DtPolicy, FlowConfig, Scheme, DEFAULT_C_STAB};
use willmore_core::inequality::CorpusSpec;
use willmore_core::monitor::{ConstantsLedger, Provenance, ReportOptions};
use willmore_core::primitives::{make_primitive, FourierMode, Perturbation, Primitive};
use willmore_core::{AnalysisOptions, ImmersedMesh};

use crate::meshio::MeshFormat;

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Make,
    Flow,
    Graph,
    Analyze,
    Ineq,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Make => "make",
            Experiment::Flow => "flow",
            Experiment::Graph => "graph",
            Experiment::Analyze => "analyze",
            Experiment::Ineq => "ineq",
        }
    }
}

/// Parses `key = value` lines. `#` starts a comment; repeated keys are errors.
pub fn parse_entries(text: &str, source: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return err(format!("{source}:{}: expected `key = value`, got `{line}`", k + 1));
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return err(format!("{source}:{}: empty key", k + 1));
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return err(format!("{source}:{}: key `{key}` given twice", k + 1));
        }
    }
    Ok(map)
}

/// Consumes keys and remembers which ones were read.
struct Keys {
    map: BTreeMap<String, String>,
}

impl Keys {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).or_else(|_| err(format!("cannot parse `{key} = {v}`"))),
        }
    }

    fn or<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T, ConfigError> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) if v.is_empty() => Ok(Some(Vec::new())),
            Some(v) => v
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map(Some)
                .or_else(|_| err(format!("cannot parse `{key} = {v}` as a comma-separated list"))),
        }
    }

    fn finish(self, experiment: Experiment) -> Result<(), ConfigError> {
        match self.map.keys().next() {
            None => Ok(()),
            Some(k) => err(format!("unknown key `{k}` (or it does not apply to `{}` with these settings)", experiment.name())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlaneShape {
    None,
    Bump { amplitude: f64, width: f64, center: [f64; 2] },
    Fourier(Vec<FourierMode>),
    /// `modes` seeded random Fourier modes with total amplitude at most `amplitude`.
    Random { modes: usize, amplitude: f64 },
}

/// A generator with its parameters, as named in the config.
#[derive(Debug, Clone, PartialEq)]
pub enum PrimitiveSpec {
    Fixed(Primitive),
    Plane { size: f64, resolution: usize, periodic: bool, shape: PlaneShape },
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    File(PathBuf),
    Primitive { spec: PrimitiveSpec, dim: usize },
}

impl MeshSource {
    /// Builds the input mesh; all randomness comes from `seed`.
    pub fn load(&self, seed: u64) -> Result<ImmersedMesh, crate::CliError> {
        match self {
            MeshSource::File(path) => Ok(crate::meshio::parse_mesh(path)?),
            MeshSource::Primitive { spec, dim } => {
                let kind = match spec {
                    PrimitiveSpec::Fixed(p) => p.clone(),
                    PrimitiveSpec::Plane { size, resolution, periodic, shape } => Primitive::PerturbedPlane {
                        size: *size,
                        resolution: *resolution,
                        periodic: *periodic,
                        perturbation: resolve_shape(shape, *size, seed),
                    },
                };
                make_primitive(&kind, *dim).map_err(crate::CliError::from_core)
            }
        }
    }
}

fn resolve_shape(shape: &PlaneShape, size: f64, seed: u64) -> Perturbation {
    match shape {
        PlaneShape::None => Perturbation::None,
        PlaneShape::Bump { amplitude, width, center } => Perturbation::Bump { amplitude: *amplitude, width: *width, center: *center },
        PlaneShape::Fourier(modes) => Perturbation::Fourier(modes.clone()),
        PlaneShape::Random { modes, amplitude } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k0 = 2.0 * PI / size;
            let each = amplitude / *modes as f64;
            Perturbation::Fourier(
                (0..*modes)
                    .map(|_| FourierMode {
                        kx: k0 * rng.random_range(-3i32..=3) as f64,
                        ky: k0 * rng.random_range(1i32..=3) as f64,
                        amplitude: each * rng.random_range(-1.0..=1.0),
                        phase: rng.random_range(0.0..2.0 * PI),
                    })
                    .collect(),
            )
        }
    }
}

/// Everything a run needs, validated before any computation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub out: PathBuf,
    /// Absent only for `ineq`, which builds its own corpus.
    pub mesh: Option<MeshSource>,
    pub analysis: AnalysisOptions,
    /// Used by `flow` and `graph`; its `analysis` and `report` mirror the fields here.
    pub flow: Option<FlowConfig>,
    pub report: ReportOptions,
    pub ledger: ConstantsLedger,
    pub corpus: Option<CorpusSpec>,
    pub format: MeshFormat,
}

pub const DEFAULT_OUT: &str = "willmore-out";

impl RunConfig {
    /// Resolves `entries` for `experiment`. An `experiment` key, if present, must agree.
    pub fn resolve(experiment: Experiment, entries: BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let mut k = Keys { map: entries };
        if let Some(e) = k.take("experiment") {
            if e != experiment.name() {
                return err(format!("config is for `{e}` but the subcommand is `{}`", experiment.name()));
            }
        }
        let seed = k.or("seed", 0u64)?;
        let out = PathBuf::from(k.take("out").unwrap_or_else(|| DEFAULT_OUT.to_string()));
        let analysis = AnalysisOptions { collar: k.or("collar", AnalysisOptions::default().collar)? };

        let mesh = match experiment {
            Experiment::Ineq => None,
            _ => Some(mesh_source(&mut k)?),
        };
        let uses_report = matches!(experiment, Experiment::Flow | Experiment::Graph | Experiment::Analyze);
        let report = if uses_report { report_options(&mut k)? } else { ReportOptions::default() };
        let ledger = if uses_report { ledger(&mut k)? } else { ConstantsLedger::default() };
        let flow = match experiment {
            Experiment::Flow | Experiment::Graph => Some(flow_config(&mut k, analysis, report.clone())?),
            _ => None,
        };
        let corpus = match experiment {
            Experiment::Ineq => {
                let d = CorpusSpec::default();
                let spec = CorpusSpec {
                    seed,
                    resolution: k.or("corpus_resolution", d.resolution)?,
                    sphere_level: k.or("sphere_level", d.sphere_level)?,
                    fields_per_mesh: k.or("fields_per_mesh", d.fields_per_mesh)?,
                    p: k.or("p", d.p)?,
                };
                if spec.p <= 2.0 || !spec.p.is_finite() {
                    return err(format!("p = {} must be finite and greater than 2", spec.p));
                }
                Some(spec)
            }
            _ => None,
        };
        let format = match experiment {
            Experiment::Make => {
                let name = k.take("format").unwrap_or_else(|| "noff".into());
                MeshFormat::from_name(&name).ok_or_else(|| ConfigError(format!("unknown mesh format `{name}`")))?
            }
            _ => MeshFormat::Noff,
        };
        k.finish(experiment)?;
        Ok(RunConfig { experiment, seed, out, mesh, analysis, flow, report, ledger, corpus, format })
    }

    /// The resolved configuration as `key = value` lines; re-parsing it yields `self`.
    pub fn to_manifest(&self) -> String {
        let mut s = String::new();
        let mut put = |key: &str, value: String| {
            let _ = writeln!(s, "{key} = {value}");
        };
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        put("experiment", self.experiment.name().into());
        put("seed", self.seed.to_string());
        put("out", self.out.display().to_string());
        put("collar", self.analysis.collar.to_string());
        match &self.mesh {
            Some(MeshSource::File(p)) => put("mesh", p.display().to_string()),
            Some(MeshSource::Primitive { spec, dim }) => {
                put("dim", dim.to_string());
                for (key, value) in primitive_entries(spec) {
                    put(key, value);
                }
            }
            None => {}
        }
        if matches!(self.experiment, Experiment::Flow | Experiment::Graph | Experiment::Analyze) {
            if let Some(rho) = self.report.rho {
                put("rho", rho.to_string());
            }
            if !self.report.radii.is_empty() {
                put("radii", list(&self.report.radii));
            }
            if let Some(c) = &self.report.center {
                put("report_center", list(c));
            }
            let l = &self.ledger;
            put("eps0", l.eps0.value.to_string());
            put("a_n", l.a_n.value.to_string());
            put("c0", l.c0.value.to_string());
            // derived constants are recomputed on load
            if l.eps1.provenance != Provenance::Derived {
                put("eps1", l.eps1.value.to_string());
            }
            if l.c1.provenance != Provenance::Derived {
                put("c1", l.c1.value.to_string());
            }
        }
        if let Some(f) = &self.flow {
            put("scheme", scheme_name(f.scheme).into());
            match f.dt_policy {
                DtPolicy::Fixed(dt) => put("dt", dt.to_string()),
                DtPolicy::Auto { c_stab } => {
                    put("dt", "auto".into());
                    put("c_stab", c_stab.to_string());
                }
            }
            put("t_end", f.t_end.to_string());
            put("record_every", f.record_every.to_string());
            put("q_min", f.abort.q_min.to_string());
            put("max_sup_a", f.abort.max_sup_a.to_string());
            if let Some(c) = &f.cutoff {
                put("cutoff_center", list(c.center()));
                put("cutoff_radius", c.radius().to_string());
                put("cutoff_width", c.width().to_string());
                put("cutoff_exponent", c.exponent().to_string());
            }
        }
        if let Some(c) = &self.corpus {
            put("corpus_resolution", c.resolution.to_string());
            put("sphere_level", c.sphere_level.to_string());
            put("fields_per_mesh", c.fields_per_mesh.to_string());
            put("p", c.p.to_string());
        }
        if self.experiment == Experiment::Make {
            put("format", self.format.extension().into());
        }
        s
    }
}

fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::SemiImplicit => "semi_implicit",
        Scheme::ExplicitEuler => "explicit",
    }
}

fn mesh_source(k: &mut Keys) -> Result<MeshSource, ConfigError> {
    match (k.take("mesh"), k.take("primitive")) {
        (Some(_), Some(_)) => err("give either `mesh` or `primitive`, not both"),
        (Some(path), None) => Ok(MeshSource::File(PathBuf::from(path))),
        (None, kind) => {
            let kind = kind.unwrap_or_else(|| "icosphere".into());
            let dim = k.or("dim", 3usize)?;
            let spec = match kind.as_str() {
                "icosphere" => PrimitiveSpec::Fixed(Primitive::Icosphere { level: k.or("level", 4)?, radius: k.or("radius", 1.0)? }),
                "torus" => PrimitiveSpec::Fixed(Primitive::Torus {
                    major: k.or("major", 2.0)?,
                    minor: k.or("minor", 1.0)?,
                    nu: k.or("nu", 48)?,
                    nv: k.or("nv", 24)?,
                }),
                "tube" => PrimitiveSpec::Fixed(Primitive::Tube {
                    radius: k.or("radius", 1.0)?,
                    length: k.or("length", 6.0)?,
                    n_around: k.or("n_around", 32)?,
                }),
                "plane_disk" => PrimitiveSpec::Fixed(Primitive::PlaneDisk { radius: k.or("radius", 1.0)?, h: k.or("h", 0.1)? }),
                "flat_torus" => {
                    let nx = k.or("nx", 32)?;
                    let lx = k.or("lx", 2.0 * PI)?;
                    PrimitiveSpec::Fixed(Primitive::FlatTorusGrid { nx, ny: k.or("ny", nx)?, lx, ly: k.or("ly", lx)? })
                }
                "clifford_torus" => PrimitiveSpec::Fixed(Primitive::CliffordTorus { nu: k.or("nu", 32)?, nv: k.or("nv", 32)? }),
                "plane" => plane_spec(k)?,
                other => return err(format!("unknown primitive `{other}`")),
            };
            Ok(MeshSource::Primitive { spec, dim })
        }
    }
}

fn plane_spec(k: &mut Keys) -> Result<PrimitiveSpec, ConfigError> {
    let size = k.or("size", 2.0 * PI)?;
    let resolution = k.or("resolution", 32)?;
    let periodic = k.or("periodic", true)?;
    let shape = match k.take("perturbation").as_deref().unwrap_or("none") {
        "none" => PlaneShape::None,
        "bump" => {
            let default_center = if periodic { [0.5 * size; 2] } else { [0.0; 2] };
            let center = match k.list("center")? {
                None => default_center,
                Some(c) if c.len() == 2 => [c[0], c[1]],
                Some(_) => return err("`center` needs two values"),
            };
            PlaneShape::Bump { amplitude: k.or("amplitude", 0.05)?, width: k.or("width", 0.5)?, center }
        }
        "fourier" => {
            let raw = k.list("modes")?.unwrap_or_default();
            if raw.is_empty() || raw.len() % 4 != 0 {
                return err("`modes` needs groups of four values kx,ky,amplitude,phase");
            }
            PlaneShape::Fourier(
                raw.chunks(4).map(|c| FourierMode { kx: c[0], ky: c[1], amplitude: c[2], phase: c[3] }).collect(),
            )
        }
        "random" => {
            let modes = k.or("random_modes", 4usize)?;
            if modes == 0 {
                return err("`random_modes` must be at least 1");
            }
            PlaneShape::Random { modes, amplitude: k.or("amplitude", 0.05)? }
        }
        other => return err(format!("unknown perturbation `{other}` (none, bump, fourier, random)")),
    };
    Ok(PrimitiveSpec::Plane { size, resolution, periodic, shape })
}

fn primitive_entries(spec: &PrimitiveSpec) -> Vec<(&'static str, String)> {
    let s = |x: f64| x.to_string();
    match spec {
        PrimitiveSpec::Fixed(p) => match p {
            Primitive::Icosphere { level, radius } => vec![("primitive", "icosphere".into()), ("level", level.to_string()), ("radius", s(*radius))],
            Primitive::Torus { major, minor, nu, nv } => vec![
                ("primitive", "torus".into()),
                ("major", s(*major)),
                ("minor", s(*minor)),
                ("nu", nu.to_string()),
                ("nv", nv.to_string()),
            ],
            Primitive::Tube { radius, length, n_around } => vec![
                ("primitive", "tube".into()),
                ("radius", s(*radius)),
                ("length", s(*length)),
                ("n_around", n_around.to_string()),
            ],
            Primitive::PlaneDisk { radius, h } => vec![("primitive", "plane_disk".into()), ("radius", s(*radius)), ("h", s(*h))],
            Primitive::FlatTorusGrid { nx, ny, lx, ly } => vec![
                ("primitive", "flat_torus".into()),
                ("nx", nx.to_string()),
                ("ny", ny.to_string()),
                ("lx", s(*lx)),
                ("ly", s(*ly)),
            ],
            Primitive::CliffordTorus { nu, nv } => vec![("primitive", "clifford_torus".into()), ("nu", nu.to_string()), ("nv", nv.to_string())],
            Primitive::PerturbedPlane { .. } => unreachable!("planes are stored as PrimitiveSpec::Plane"),
        },
        PrimitiveSpec::Plane { size, resolution, periodic, shape } => {
            let mut v = vec![
                ("primitive", "plane".into()),
                ("size", s(*size)),
                ("resolution", resolution.to_string()),
                ("periodic", periodic.to_string()),
            ];
            match shape {
                PlaneShape::None => v.push(("perturbation", "none".into())),
                PlaneShape::Bump { amplitude, width, center } => v.extend([
                    ("perturbation", "bump".into()),
                    ("amplitude", s(*amplitude)),
                    ("width", s(*width)),
                    ("center", format!("{},{}", center[0], center[1])),
                ]),
                PlaneShape::Fourier(modes) => {
                    let flat: Vec<String> = modes.iter().flat_map(|m| [m.kx, m.ky, m.amplitude, m.phase]).map(s).collect();
                    v.extend([("perturbation", "fourier".into()), ("modes", flat.join(","))]);
                }
                PlaneShape::Random { modes, amplitude } => v.extend([
                    ("perturbation", "random".into()),
                    ("random_modes", modes.to_string()),
                    ("amplitude", s(*amplitude)),
                ]),
            }
            v
        }
    }
}

fn report_options(k: &mut Keys) -> Result<ReportOptions, ConfigError> {
    let rho: Option<f64> = k.parse("rho")?;
    if let Some(r) = rho {
        if r.is_nan() || r <= 0.0 {
            return err(format!("rho = {r} must be positive"));
        }
    }
    Ok(ReportOptions { rho, radii: k.list("radii")?.unwrap_or_default(), center: k.list("report_center")? })
}

fn ledger(k: &mut Keys) -> Result<ConstantsLedger, ConfigError> {
    let d = ConstantsLedger::default();
    let mut l = ConstantsLedger::new(k.or("eps0", d.eps0.value)?, k.or("a_n", d.a_n.value)?, k.or("c0", d.c0.value)?)
        .map_err(|e| ConfigError(e.to_string()))?;
    if let Some(v) = k.parse("eps1")? {
        l = l.with_eps1(v, Provenance::UserSet).map_err(|e| ConfigError(e.to_string()))?;
    }
    if let Some(v) = k.parse("c1")? {
        l = l.with_c1(v, Provenance::UserSet).map_err(|e| ConfigError(e.to_string()))?;
    }
    Ok(l)
}

fn flow_config(k: &mut Keys, analysis: AnalysisOptions, report: ReportOptions) -> Result<FlowConfig, ConfigError> {
    let scheme = match k.take("scheme").as_deref().unwrap_or("semi_implicit") {
        "semi_implicit" => Scheme::SemiImplicit,
        "explicit" => Scheme::ExplicitEuler,
        other => return err(format!("unknown scheme `{other}` (semi_implicit, explicit)")),
    };
    let dt_policy = match k.take("dt").as_deref().unwrap_or("auto") {
        "auto" => DtPolicy::Auto { c_stab: k.or("c_stab", DEFAULT_C_STAB)? },
        v => DtPolicy::Fixed(v.parse().or_else(|_| err(format!("cannot parse `dt = {v}`")))?),
    };
    let t_end = k.parse("t_end")?.ok_or_else(|| ConfigError("`t_end` is required".into()))?;
    let d = AbortCriteria::default();
    let abort = AbortCriteria { q_min: k.or("q_min", d.q_min)?, max_sup_a: k.or("max_sup_a", d.max_sup_a)? };
    let cutoff = match (k.list("cutoff_center")?, k.parse::<f64>("cutoff_radius")?) {
        (None, None) => None,
        (Some(center), Some(radius)) => {
            let width = k.parse("cutoff_width")?.ok_or_else(|| ConfigError("`cutoff_width` is required with a cutoff".into()))?;
            let exponent = k.or("cutoff_exponent", 1u32)?;
            Some(RadialCutoff::new(center, radius, width, exponent).map_err(|e| ConfigError(e.to_string()))?)
        }
        _ => return err("a cutoff needs both `cutoff_center` and `cutoff_radius`"),
    };
    let cfg = FlowConfig {
        scheme,
        dt_policy,
        t_end,
        cutoff,
        record_every: k.or("record_every", 1)?,
        abort,
        analysis,
        report,
    };
    cfg.validate().map_err(|e| ConfigError(e.to_string()))?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(e: Experiment, text: &str) -> Result<RunConfig, ConfigError> {
        RunConfig::resolve(e, parse_entries(text, "test").unwrap())
    }

    #[test]
    fn manifest_round_trips() {
        let texts = [
            (Experiment::Flow, "primitive = plane\nperturbation = bump\ncenter = 1.5, 1.5\nt_end = 0.1\ndt = 1e-3\nrho = 0.5\neps1 = 0.2"),
            (Experiment::Graph, "primitive = plane\nperturbation = random\nseed = 9\nt_end = 1\ncutoff_center = 1,1,0\ncutoff_radius = 2\ncutoff_width = 1"),
            (Experiment::Analyze, "primitive = clifford_torus\ndim = 4\nradii = 0.5,1"),
            (Experiment::Ineq, "p = 3\nfields_per_mesh = 2"),
            (Experiment::Make, "primitive = torus\nformat = obj\nnu = 12"),
            (Experiment::Flow, "mesh = a b.off\nt_end = 1\nscheme = explicit\nc_stab = 0.01"),
        ];
        for (e, t) in texts {
            let a = resolve(e, t).unwrap();
            let b = resolve(e, &a.to_manifest()).unwrap();
            assert_eq!(a, b, "{}", a.to_manifest());
        }
    }

    #[test]
    fn unknown_and_inapplicable_keys() {
        assert!(resolve(Experiment::Analyze, "primitive = icosphere\nlevle = 3").is_err());
        assert!(resolve(Experiment::Analyze, "primitive = icosphere\nnu = 3").is_err());
        assert!(resolve(Experiment::Flow, "t_end = 1\ndt = 0.1\nc_stab = 0.01").is_err());
        assert!(resolve(Experiment::Flow, "experiment = graph\nt_end = 1").is_err());
        assert!(resolve(Experiment::Flow, "dt = 0.1").is_err());
        assert!(parse_entries("a = 1\na = 2", "x").is_err());
        assert!(parse_entries("just words", "x").is_err());
    }

    #[test]
    fn random_planes_follow_the_seed() {
        let cfg = |seed: u64| resolve(Experiment::Analyze, &format!("primitive = plane\nperturbation = random\nseed = {seed}")).unwrap();
        let load = |c: &RunConfig| c.mesh.as_ref().unwrap().load(c.seed).unwrap();
        assert_eq!(load(&cfg(3)).positions(), load(&cfg(3)).positions());
        assert_ne!(load(&cfg(3)).positions(), load(&cfg(4)).positions());
    }
}
