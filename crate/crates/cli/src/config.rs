//! Dotted-key run configuration.
//!
//! A config file holds one `key = value` pair per line; `#` starts a comment
//! line. Complex numbers are written `re,im` (or a bare real), complex lists
//! separate entries with `;`, index lists with `,`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Convert,
    Solve,
    Family,
    Minimal,
    Transforms,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Convert => "convert",
            Command::Solve => "solve",
            Command::Family => "family",
            Command::Minimal => "minimal",
            Command::Transforms => "transforms",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub origin: C64,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainSpec {
    Rect,
    Disc { center: C64, radius: f64 },
    Annulus { center: C64, inner: f64, outer: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum StructureSpec {
    Zero,
    /// `amplitude * exp(-width |z - center|^2)`.
    Gaussian { amplitude: C64, width: f64, center: C64 },
    /// `value` on `|z - center| <= radius`, quintic fall-off to zero at `collar`.
    Constant { value: C64, center: C64, radius: f64, collar: f64 },
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamSpec {
    pub min: f64,
    pub max: f64,
    pub samples: usize,
    pub anchors: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverSpec {
    pub tol: f64,
    pub max_iter: usize,
    pub fixed_points: Vec<C64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformOp {
    Cauchy,
    Beurling,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransformSpec {
    pub padding: usize,
    pub operator: TransformOp,
}

/// Holomorphic function `t` giving the input family `f_b = t(g_b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyTarget {
    Identity,
    Square,
    Exp,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilySpec {
    pub degree: usize,
    pub eps: f64,
    pub k_radius: f64,
    pub target: FamilyTarget,
    pub jet_points: Vec<C64>,
    pub jet_order: usize,
    pub dilation: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NullData {
    Enneper,
    Catenoid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeKind {
    NullQuadric,
    PuncturedSpace,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CycleSpec {
    Auto,
    /// `(center, half-width in cells)` square loops.
    Squares(Vec<(C64, usize)>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    RealOnly,
    Full,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirectedSpec {
    pub data: NullData,
    pub cone: ConeKind,
    pub dimension: usize,
    pub cycles: CycleSpec,
    pub mode: Mode,
    pub multipliers: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub perturbation: f64,
    pub radius: f64,
    pub domination: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub stem: String,
}

/// A validated run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    pub grid: GridSpec,
    pub domain: DomainSpec,
    pub structure: StructureSpec,
    pub params: ParamSpec,
    pub solver: SolverSpec,
    pub transforms: TransformSpec,
    pub family: FamilySpec,
    pub directed: DirectedSpec,
    pub output: OutputSpec,
}

/// Every accepted key with its default; `None` marks a required key.
const KEYS: &[(&str, Option<&str>)] = &[
    ("command", None),
    ("threads", Some("0")),
    ("grid.origin", Some("-2,-2")),
    ("grid.spacing", Some("0.015625")),
    ("grid.nx", Some("257")),
    ("grid.ny", Some("257")),
    ("domain.kind", Some("rect")),
    ("domain.center", Some("0,0")),
    ("domain.radius", Some("1")),
    ("domain.inner_radius", Some("0.5")),
    ("structure.kind", Some("zero")),
    ("structure.amplitude", Some("0.4,0")),
    ("structure.width", Some("8")),
    ("structure.center", Some("0,0")),
    ("structure.radius", Some("1")),
    ("structure.collar", Some("1.8")),
    ("structure.file", Some("")),
    ("params.min", Some("0")),
    ("params.max", Some("1")),
    ("params.samples", Some("1")),
    ("params.anchors", Some("0")),
    ("solver.tol", Some("1e-12")),
    ("solver.max_iter", Some("300")),
    ("solver.fixed_points", Some("")),
    ("transforms.padding", Some("2")),
    ("transforms.operator", Some("cauchy")),
    ("family.degree", Some("12")),
    ("family.eps", Some("1e-4")),
    ("family.k_radius", Some("1")),
    ("family.target", Some("exp")),
    ("family.jet_points", Some("")),
    ("family.jet_order", Some("0")),
    ("family.dilation", Some("6")),
    ("directed.data", Some("enneper")),
    ("directed.cone", Some("null_quadric")),
    ("directed.dimension", Some("3")),
    ("directed.cycles", Some("auto")),
    ("directed.mode", Some("real_only")),
    ("directed.multipliers", Some("3")),
    ("directed.tol", Some("1e-10")),
    ("directed.max_iter", Some("10")),
    ("directed.perturbation", Some("0")),
    ("directed.radius", Some("1")),
    ("directed.domination", Some("1e-8")),
    ("output.dir", Some("out")),
    ("output.stem", Some("")),
];

/// Keys that do not change any artifact and are left out of the hash.
const UNHASHED: &[&str] = &["threads", "output.dir"];

/// Raw `key = value` pairs with the line each came from (0 for overrides).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut raw = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let ln = i + 1;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (k, v) = t.split_once('=').ok_or_else(|| CliError::Config {
                key: t.to_string(),
                line: Some(ln),
                message: "expected 'key = value'".into(),
            })?;
            let k = k.trim();
            check_known(k, Some(ln))?;
            if let Some((_, first)) = raw.entries.get(k) {
                return Err(CliError::Config {
                    key: k.into(),
                    line: Some(ln),
                    message: format!("duplicate key (first set on line {first})"),
                });
            }
            raw.entries.insert(k.to_string(), (v.trim().to_string(), ln));
        }
        Ok(raw)
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let (k, v) = assignment.split_once('=').ok_or_else(|| CliError::Config {
            key: assignment.into(),
            line: None,
            message: "override must look like key=value".into(),
        })?;
        let k = k.trim();
        check_known(k, None)?;
        self.entries.insert(k.to_string(), (v.trim().to_string(), 0));
        Ok(())
    }
}

fn check_known(key: &str, line: Option<usize>) -> Result<(), CliError> {
    if KEYS.iter().any(|(k, _)| *k == key) {
        Ok(())
    } else {
        Err(CliError::Config { key: key.into(), line, message: "unknown key".into() })
    }
}

/// Typed access to raw values, falling back to defaults.
struct Reader<'a> {
    raw: &'a RawConfig,
}

impl Reader<'_> {
    fn get(&self, key: &str) -> Result<(&str, Option<usize>), CliError> {
        if let Some((v, ln)) = self.raw.entries.get(key) {
            return Ok((v.as_str(), (*ln > 0).then_some(*ln)));
        }
        match KEYS.iter().find(|(k, _)| *k == key) {
            Some((_, Some(d))) => Ok((d, None)),
            _ => Err(CliError::Config { key: key.into(), line: None, message: "missing required key".into() }),
        }
    }

    fn err(&self, key: &str, message: impl Into<String>) -> CliError {
        let line = self.raw.entries.get(key).and_then(|(_, l)| (*l > 0).then_some(*l));
        CliError::Config { key: key.into(), line, message: message.into() }
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let (v, _) = self.get(key)?;
        v.parse::<T>().map_err(|e| self.err(key, format!("cannot parse '{v}': {e}")))
    }

    fn f64_in(&self, key: &str, ok: impl Fn(f64) -> bool, range: &str) -> Result<f64, CliError> {
        let x: f64 = self.parsed(key)?;
        if x.is_finite() && ok(x) {
            Ok(x)
        } else {
            Err(self.err(key, format!("value {x} out of range (must be {range})")))
        }
    }

    fn usize_in(&self, key: &str, ok: impl Fn(usize) -> bool, range: &str) -> Result<usize, CliError> {
        let x: usize = self.parsed(key)?;
        if ok(x) {
            Ok(x)
        } else {
            Err(self.err(key, format!("value {x} out of range (must be {range})")))
        }
    }

    fn complex(&self, key: &str) -> Result<C64, CliError> {
        let (v, _) = self.get(key)?;
        parse_complex(v).ok_or_else(|| self.err(key, format!("cannot parse complex number '{v}'")))
    }

    fn complex_list(&self, key: &str) -> Result<Vec<C64>, CliError> {
        let (v, _) = self.get(key)?;
        split_list(v, ';')
            .map(|t| parse_complex(t).ok_or_else(|| self.err(key, format!("cannot parse complex number '{t}'"))))
            .collect()
    }

    fn choice<T: Copy>(&self, key: &str, options: &[(&str, T)]) -> Result<T, CliError> {
        let (v, _) = self.get(key)?;
        options.iter().find(|(n, _)| *n == v).map(|(_, t)| *t).ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            self.err(key, format!("'{v}' is not one of {}", names.join(", ")))
        })
    }
}

fn split_list(v: &str, sep: char) -> impl Iterator<Item = &str> {
    v.split(sep).map(str::trim).filter(|t| !t.is_empty())
}

fn parse_complex(s: &str) -> Option<C64> {
    let mut parts = s.split(',').map(str::trim);
    let re = parts.next()?.parse::<f64>().ok()?;
    let im = match parts.next() {
        Some(t) => t.parse::<f64>().ok()?,
        None => 0.0,
    };
    if parts.next().is_some() || !re.is_finite() || !im.is_finite() {
        return None;
    }
    Some(C64::new(re, im))
}

fn fmt_complex(z: C64) -> String {
    format!("{:?},{:?}", z.re, z.im)
}

impl RunConfig {
    /// Builds and validates a config from raw pairs.
    pub fn from_raw(raw: &RawConfig) -> Result<Self, CliError> {
        let r = Reader { raw };
        let command = r.choice(
            "command",
            &[
                ("convert", Command::Convert),
                ("solve", Command::Solve),
                ("family", Command::Family),
                ("minimal", Command::Minimal),
                ("transforms", Command::Transforms),
            ],
        )?;
        let threads = r.usize_in("threads", |_| true, "a thread count")?;

        let grid = GridSpec {
            origin: r.complex("grid.origin")?,
            spacing: r.f64_in("grid.spacing", |x| x > 0.0, "> 0")?,
            nx: r.usize_in("grid.nx", |n| (5..=8193).contains(&n), "in 5..=8193")?,
            ny: r.usize_in("grid.ny", |n| (5..=8193).contains(&n), "in 5..=8193")?,
        };

        let center = r.complex("domain.center")?;
        let radius = r.f64_in("domain.radius", |x| x > 0.0, "> 0")?;
        let domain = match r.choice("domain.kind", &[("rect", 0), ("disc", 1), ("annulus", 2)])? {
            0 => DomainSpec::Rect,
            1 => DomainSpec::Disc { center, radius },
            _ => {
                let inner = r.f64_in("domain.inner_radius", |x| x >= 0.0, ">= 0")?;
                if inner >= radius {
                    return Err(r.err("domain.inner_radius", format!("{inner} is not below domain.radius = {radius}")));
                }
                DomainSpec::Annulus { center, inner, outer: radius }
            }
        };

        let structure = match r.choice(
            "structure.kind",
            &[("zero", 0), ("gaussian", 1), ("constant", 2), ("file", 3)],
        )? {
            0 => StructureSpec::Zero,
            1 => StructureSpec::Gaussian {
                amplitude: unit_disc(&r, "structure.amplitude")?,
                width: r.f64_in("structure.width", |x| x > 0.0, "> 0")?,
                center: r.complex("structure.center")?,
            },
            2 => {
                let radius = r.f64_in("structure.radius", |x| x > 0.0, "> 0")?;
                let collar = r.f64_in("structure.collar", |x| x > radius, "> structure.radius")?;
                StructureSpec::Constant {
                    value: unit_disc(&r, "structure.amplitude")?,
                    center: r.complex("structure.center")?,
                    radius,
                    collar,
                }
            }
            _ => {
                let (v, _) = r.get("structure.file")?;
                if v.is_empty() {
                    return Err(r.err("structure.file", "required when structure.kind = file"));
                }
                let path = PathBuf::from(v);
                if !path.is_file() {
                    return Err(r.err("structure.file", format!("file '{v}' does not exist")));
                }
                StructureSpec::File(path)
            }
        };

        let samples = r.usize_in("params.samples", |n| n >= 1, ">= 1")?;
        let min = r.f64_in("params.min", |_| true, "finite")?;
        let max = r.f64_in("params.max", |x| if samples > 1 { x > min } else { x >= min }, "> params.min")?;
        let (anchors_text, _) = r.get("params.anchors")?;
        let anchors = split_list(anchors_text, ',')
            .map(|t| t.parse::<usize>().map_err(|e| r.err("params.anchors", format!("bad index '{t}': {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if anchors.is_empty() || anchors.iter().any(|&a| a >= samples) || anchors.windows(2).any(|w| w[0] >= w[1]) {
            return Err(r.err("params.anchors", format!("need strictly increasing indices below params.samples = {samples}")));
        }
        let params = ParamSpec { min, max, samples, anchors };

        let solver = SolverSpec {
            tol: r.f64_in("solver.tol", |x| x > 0.0 && x < 1.0, "in (0, 1)")?,
            max_iter: r.usize_in("solver.max_iter", |n| n >= 1, ">= 1")?,
            fixed_points: r.complex_list("solver.fixed_points")?,
        };

        let transforms = TransformSpec {
            padding: r.usize_in("transforms.padding", |n| (2..=8).contains(&n), "in 2..=8")?,
            operator: r.choice("transforms.operator", &[("cauchy", TransformOp::Cauchy), ("beurling", TransformOp::Beurling)])?,
        };

        let family = FamilySpec {
            degree: r.usize_in("family.degree", |n| n <= 40, "<= 40")?,
            eps: r.f64_in("family.eps", |x| x > 0.0, "> 0")?,
            k_radius: r.f64_in("family.k_radius", |x| x > 0.0, "> 0")?,
            target: r.choice(
                "family.target",
                &[("identity", FamilyTarget::Identity), ("square", FamilyTarget::Square), ("exp", FamilyTarget::Exp)],
            )?,
            jet_points: r.complex_list("family.jet_points")?,
            jet_order: r.usize_in("family.jet_order", |n| n <= 4, "<= 4")?,
            dilation: r.f64_in("family.dilation", |x| x >= 0.0, ">= 0")?,
        };

        let cone = r.choice("directed.cone", &[("null_quadric", ConeKind::NullQuadric), ("punctured_space", ConeKind::PuncturedSpace)])?;
        let dimension = r.usize_in("directed.dimension", |n| n == 3, "3 (the built-in data are curves in C^3)")?;
        let (cycles_text, _) = r.get("directed.cycles")?;
        let cycles = if cycles_text == "auto" {
            CycleSpec::Auto
        } else {
            let squares = split_list(cycles_text, ';')
                .map(|t| {
                    let bad = || r.err("directed.cycles", format!("expected 'auto' or 're,im,half' entries, got '{t}'"));
                    let (c, half) = t.rsplit_once(',').ok_or_else(bad)?;
                    let c = parse_complex(c).ok_or_else(bad)?;
                    let half = half.trim().parse::<usize>().ok().filter(|&h| h >= 1).ok_or_else(bad)?;
                    Ok((c, half))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            CycleSpec::Squares(squares)
        };
        let directed = DirectedSpec {
            data: r.choice("directed.data", &[("enneper", NullData::Enneper), ("catenoid", NullData::Catenoid)])?,
            cone,
            dimension,
            cycles,
            mode: r.choice("directed.mode", &[("real_only", Mode::RealOnly), ("full", Mode::Full)])?,
            multipliers: r.usize_in("directed.multipliers", |n| (1..=32).contains(&n), "in 1..=32")?,
            tol: r.f64_in("directed.tol", |x| x > 0.0, "> 0")?,
            max_iter: r.usize_in("directed.max_iter", |n| n >= 1, ">= 1")?,
            perturbation: r.f64_in("directed.perturbation", |x| x >= 0.0, ">= 0")?,
            radius: r.f64_in("directed.radius", |x| x > 0.0, "> 0")?,
            domination: r.f64_in("directed.domination", |x| x > 0.0, "> 0")?,
        };

        let (dir, _) = r.get("output.dir")?;
        if dir.is_empty() {
            return Err(r.err("output.dir", "must not be empty"));
        }
        let (stem, _) = r.get("output.stem")?;
        let stem = if stem.is_empty() { command.name().to_string() } else { stem.to_string() };
        if stem.contains(['/', '\\']) || stem.chars().any(char::is_whitespace) {
            return Err(r.err("output.stem", format!("'{stem}' must be a plain file name stem")));
        }
        let output = OutputSpec { dir: PathBuf::from(dir), stem };

        Ok(RunConfig { command, threads, grid, domain, structure, params, solver, transforms, family, directed, output })
    }

    pub fn parse_str(text: &str) -> Result<Self, CliError> {
        RunConfig::from_raw(&RawConfig::parse(text)?)
    }

    /// Every key in canonical order, `key = value` per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.pairs() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// SHA-256 of the canonical text without the keys that do not affect
    /// artifacts (thread count and output directory), as lowercase hex.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.pairs() {
            if !UNHASHED.contains(&k) {
                h.update(format!("{k} = {v}\n").as_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    fn pairs(&self) -> Vec<(&'static str, String)> {
        let c = fmt_complex;
        let list = |v: &[C64]| v.iter().map(|z| c(*z)).collect::<Vec<_>>().join("; ");
        let (kind, center, radius, inner) = match self.domain {
            DomainSpec::Rect => ("rect", C64::new(0.0, 0.0), 1.0, 0.5),
            DomainSpec::Disc { center, radius } => ("disc", center, radius, 0.5),
            DomainSpec::Annulus { center, inner, outer } => ("annulus", center, outer, inner),
        };
        let mut s_kind = "zero";
        let (mut amp, mut width, mut s_center, mut s_radius, mut collar, mut file) =
            (C64::new(0.4, 0.0), 8.0, C64::new(0.0, 0.0), 1.0, 1.8, String::new());
        match &self.structure {
            StructureSpec::Zero => {}
            StructureSpec::Gaussian { amplitude, width: w, center } => {
                s_kind = "gaussian";
                (amp, width, s_center) = (*amplitude, *w, *center);
            }
            StructureSpec::Constant { value, center, radius, collar: cl } => {
                s_kind = "constant";
                (amp, s_center, s_radius, collar) = (*value, *center, *radius, *cl);
            }
            StructureSpec::File(p) => {
                s_kind = "file";
                file = p.display().to_string();
            }
        }
        let d = &self.directed;
        let cycles = match &d.cycles {
            CycleSpec::Auto => "auto".to_string(),
            CycleSpec::Squares(v) => v.iter().map(|(z, h)| format!("{},{h}", c(*z))).collect::<Vec<_>>().join("; "),
        };
        let f = &self.family;
        vec![
            ("command", self.command.name().into()),
            ("threads", self.threads.to_string()),
            ("grid.origin", c(self.grid.origin)),
            ("grid.spacing", format!("{:?}", self.grid.spacing)),
            ("grid.nx", self.grid.nx.to_string()),
            ("grid.ny", self.grid.ny.to_string()),
            ("domain.kind", kind.into()),
            ("domain.center", c(center)),
            ("domain.radius", format!("{radius:?}")),
            ("domain.inner_radius", format!("{inner:?}")),
            ("structure.kind", s_kind.into()),
            ("structure.amplitude", c(amp)),
            ("structure.width", format!("{width:?}")),
            ("structure.center", c(s_center)),
            ("structure.radius", format!("{s_radius:?}")),
            ("structure.collar", format!("{collar:?}")),
            ("structure.file", file),
            ("params.min", format!("{:?}", self.params.min)),
            ("params.max", format!("{:?}", self.params.max)),
            ("params.samples", self.params.samples.to_string()),
            ("params.anchors", self.params.anchors.iter().map(usize::to_string).collect::<Vec<_>>().join(",")),
            ("solver.tol", format!("{:?}", self.solver.tol)),
            ("solver.max_iter", self.solver.max_iter.to_string()),
            ("solver.fixed_points", list(&self.solver.fixed_points)),
            ("transforms.padding", self.transforms.padding.to_string()),
            (
                "transforms.operator",
                match self.transforms.operator {
                    TransformOp::Cauchy => "cauchy",
                    TransformOp::Beurling => "beurling",
                }
                .into(),
            ),
            ("family.degree", f.degree.to_string()),
            ("family.eps", format!("{:?}", f.eps)),
            ("family.k_radius", format!("{:?}", f.k_radius)),
            (
                "family.target",
                match f.target {
                    FamilyTarget::Identity => "identity",
                    FamilyTarget::Square => "square",
                    FamilyTarget::Exp => "exp",
                }
                .into(),
            ),
            ("family.jet_points", list(&f.jet_points)),
            ("family.jet_order", f.jet_order.to_string()),
            ("family.dilation", format!("{:?}", f.dilation)),
            (
                "directed.data",
                match d.data {
                    NullData::Enneper => "enneper",
                    NullData::Catenoid => "catenoid",
                }
                .into(),
            ),
            (
                "directed.cone",
                match d.cone {
                    ConeKind::NullQuadric => "null_quadric",
                    ConeKind::PuncturedSpace => "punctured_space",
                }
                .into(),
            ),
            ("directed.dimension", d.dimension.to_string()),
            ("directed.cycles", cycles),
            (
                "directed.mode",
                match d.mode {
                    Mode::RealOnly => "real_only",
                    Mode::Full => "full",
                }
                .into(),
            ),
            ("directed.multipliers", d.multipliers.to_string()),
            ("directed.tol", format!("{:?}", d.tol)),
            ("directed.max_iter", d.max_iter.to_string()),
            ("directed.perturbation", format!("{:?}", d.perturbation)),
            ("directed.radius", format!("{:?}", d.radius)),
            ("directed.domination", format!("{:?}", d.domination)),
            ("output.dir", self.output.dir.display().to_string()),
            ("output.stem", self.output.stem.clone()),
        ]
    }
}

fn unit_disc(r: &Reader<'_>, key: &str) -> Result<C64, CliError> {
    let z = r.complex(key)?;
    if z.norm() < 1.0 {
        Ok(z)
    } else {
        Err(r.err(key, format!("|{z}| must be below 1")))
    }
}

/// Reads, overrides and validates a config file.
pub fn parse_config(path: &Path, overrides: &[String]) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
    let mut raw = RawConfig::parse(&text)?;
    for o in overrides {
        raw.set(o)?;
    }
    RunConfig::from_raw(&raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_a_minimal_solve_config() {
        let cfg = RunConfig::parse_str("command = solve\n").unwrap();
        assert_eq!(cfg.command, Command::Solve);
        assert_eq!(cfg.solver.tol, 1e-12);
        assert_eq!(cfg.family.eps, 1e-4);
        assert_eq!(cfg.directed.tol, 1e-10);
        assert_eq!(cfg.transforms.padding, 2);
        assert_eq!(cfg.output.stem, "solve");
    }

    #[test]
    fn errors_name_key_and_line() {
        match RunConfig::parse_str("command = solve\n\nsolver.tol = -1\n") {
            Err(CliError::Config { key, line, .. }) => assert_eq!((key.as_str(), line), ("solver.tol", Some(3))),
            other => panic!("{other:?}"),
        }
        match RunConfig::parse_str("command = solve\nsolver.tolerance = 1\n") {
            Err(CliError::Config { key, line, message }) => {
                assert_eq!((key.as_str(), line), ("solver.tolerance", Some(2)));
                assert!(message.contains("unknown"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(RunConfig::parse_str("grid.nx = 9\n"), Err(CliError::Config { key, .. }) if key == "command"));
    }

    #[test]
    fn overrides_win() {
        let mut raw = RawConfig::parse("command = family\nfamily.eps = 1e-3\n").unwrap();
        raw.set("family.eps=2e-5").unwrap();
        assert_eq!(RunConfig::from_raw(&raw).unwrap().family.eps, 2e-5);
        assert!(raw.set("family.epsilon=1").is_err());
    }
}
