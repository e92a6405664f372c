//! End-to-end runs for each subcommand.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use confam::beltrami::{normalize_with_times, solve_beltrami, FixedPointSet};
use confam::directed::{
    auto_cycles, build_period_spray, check_cone_membership, export_meshes, kill_periods, minimal_immersion_family,
    monomial_multipliers, ConeSpec, HomologyCycle, MinimalOptions, NullCurveBundle, PeriodMode,
};
use confam::families::{
    family_runge_with_charts, standard_charts, FamilyField, FamilyRungeOptions, JetSpec, ParameterGrid,
};
use confam::grid::smoothstep;
use confam::io::{load_cgrid, save_cgrid, save_real, FamilyManifest};
use confam::structures::{acs_to_beltrami, beltrami_to_metric, metric_to_acs, BeltramiField};
use confam::transforms::{beurling, cauchy_green, TransformPlan};
use confam::{ComplexGrid, Lattice, C64};

use crate::config::{
    Command, ConeKind, CycleSpec, DomainSpec, FamilyTarget, Mode, NullData, RunConfig, StructureSpec, TransformOp,
};
use crate::error::{CliError, InModule};

/// Files written by a run; the report is also listed in `artifacts`.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub report: PathBuf,
    pub artifacts: Vec<PathBuf>,
}

/// Runs the configured subcommand on a pool of `cfg.threads` workers.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Config { key: "threads".into(), line: None, message: e.to_string() })?;
    pool.install(|| {
        let mut out = Output::new(cfg)?;
        match cfg.command {
            Command::Convert => convert(cfg, &mut out)?,
            Command::Solve => solve(cfg, &mut out)?,
            Command::Family => family(cfg, &mut out)?,
            Command::Minimal => minimal(cfg, &mut out)?,
            Command::Transforms => transforms(cfg, &mut out)?,
        }
        out.finish()
    })
}

struct Output {
    dir: PathBuf,
    stem: String,
    header: Vec<String>,
    report: Vec<String>,
    artifacts: Vec<PathBuf>,
}

impl Output {
    fn new(cfg: &RunConfig) -> Result<Self, CliError> {
        let dir = cfg.output.dir.clone();
        fs::create_dir_all(&dir).map_err(|e| CliError::Io { path: dir.clone(), source: e })?;
        let hash = cfg.hash();
        Ok(Output {
            dir,
            stem: cfg.output.stem.clone(),
            header: vec![format!("config {hash}")],
            report: vec![format!("command = {}", cfg.command.name()), format!("config = {hash}")],
            artifacts: Vec::new(),
        })
    }

    fn path(&mut self, suffix: &str) -> PathBuf {
        let p = self.dir.join(format!("{}{suffix}", self.stem));
        self.artifacts.push(p.clone());
        p
    }

    fn cgrid(&mut self, suffix: &str, g: &ComplexGrid) -> Result<(), CliError> {
        let p = self.path(suffix);
        save_cgrid(&p, g, &self.header).module("io")
    }

    fn line(&mut self, key: impl AsRef<str>, value: impl std::fmt::Display) {
        self.report.push(format!("{} = {value}", key.as_ref()));
    }

    fn finish(mut self) -> Result<RunSummary, CliError> {
        let path = self.path(".report");
        let io = |e| CliError::Io { path: path.clone(), source: e };
        let mut f = fs::File::create(&path).map_err(io)?;
        let mut text = String::new();
        for h in &self.header {
            text.push_str(&format!("# {h}\n"));
        }
        for l in &self.report {
            text.push_str(l);
            text.push('\n');
        }
        f.write_all(text.as_bytes()).map_err(io)?;
        Ok(RunSummary { report: path, artifacts: self.artifacts })
    }
}

fn lattice(cfg: &RunConfig) -> Result<Lattice, CliError> {
    let g = &cfg.grid;
    Lattice::new(g.origin, g.spacing, g.nx, g.ny).module("grid")
}

fn domain_mask(cfg: &RunConfig, lat: &Lattice) -> Vec<bool> {
    (0..lat.len())
        .map(|k| {
            let z = lat.node_at(k);
            match cfg.domain {
                DomainSpec::Rect => true,
                DomainSpec::Disc { center, radius } => (z - center).norm() <= radius,
                DomainSpec::Annulus { center, inner, outer } => (inner..=outer).contains(&(z - center).norm()),
            }
        })
        .collect()
}

/// The configured structure field on the whole lattice.
fn structure_field(cfg: &RunConfig, lat: Lattice) -> Result<ComplexGrid, CliError> {
    Ok(match &cfg.structure {
        StructureSpec::Zero => ComplexGrid::zeros(lat),
        &StructureSpec::Gaussian { amplitude, width, center } => {
            ComplexGrid::from_fn(lat, move |z| amplitude * (-width * (z - center).norm_sqr()).exp())
        }
        &StructureSpec::Constant { value, center, radius, collar } => ComplexGrid::from_fn(lat, move |z| {
            value * (1.0 - smoothstep(((z - center).norm() - radius) / (collar - radius)))
        }),
        StructureSpec::File(path) => {
            let g = load_cgrid(path).module("io")?;
            lat.check_compatible(g.lattice()).module("structures")?;
            g
        }
    })
}

fn params(cfg: &RunConfig) -> Result<ParameterGrid, CliError> {
    let p = &cfg.params;
    if p.samples == 1 {
        ParameterGrid::new(vec![p.min])
    } else {
        ParameterGrid::uniform(p.min, p.max, p.samples)
    }
    .module("families")
}

fn sup_diff(a: &[C64], b: &[C64], mask: &[bool]) -> f64 {
    (0..a.len()).filter(|&k| mask[k]).map(|k| (a[k] - b[k]).norm()).fold(0.0, f64::max)
}

fn convert(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let lat = lattice(cfg)?;
    let mask = domain_mask(cfg, &lat);
    let field = structure_field(cfg, lat)?.with_mask(mask.clone()).module("grid")?;
    let mu = BeltramiField::new(field).module("structures")?;
    let metric = beltrami_to_metric(&mu);
    let acs = metric_to_acs(&metric).module("structures")?;
    let back = acs_to_beltrami(&acs).module("structures")?;
    let err = sup_diff(back.mu().samples(), mu.mu().samples(), &mask);

    out.cgrid("_mu.cgrid", mu.mu())?;
    for (name, g) in [("e", &metric.e), ("f", &metric.f), ("g", &metric.g)] {
        let p = out.path(&format!("_metric_{name}.cgrid"));
        save_real(&p, g, &out.header).module("io")?;
    }
    for (name, g) in [("11", &acs.j11), ("12", &acs.j12), ("21", &acs.j21), ("22", &acs.j22)] {
        let p = out.path(&format!("_acs_{name}.cgrid"));
        save_real(&p, g, &out.header).module("io")?;
    }
    out.cgrid("_mu_roundtrip.cgrid", back.mu())?;
    out.line("sup_mu", format!("{:e}", mu.sup()));
    out.line("roundtrip_error", format!("{err:e}"));
    Ok(())
}

fn solve(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let lat = lattice(cfg)?;
    let mu = BeltramiField::new(structure_field(cfg, lat)?).module("structures")?;
    let plan = TransformPlan::new(lat, cfg.transforms.padding).module("transforms")?;
    let mut chart = solve_beltrami(&mu, &plan, cfg.solver.tol, cfg.solver.max_iter).module("beltrami")?;
    if !cfg.solver.fixed_points.is_empty() {
        let fixed = FixedPointSet::new(cfg.solver.fixed_points.clone()).module("beltrami")?;
        let (c, times) = normalize_with_times(&chart, &fixed, cfg.solver.tol).module("beltrami")?;
        chart = c;
        for (j, t) in times.iter().enumerate() {
            out.line(format!("flow_time.{j}"), format!("{:e},{:e}", t.re, t.im));
        }
    }
    if !matches!(cfg.domain, DomainSpec::Rect) {
        let f = chart.f.clone().with_mask(domain_mask(cfg, &lat)).module("grid")?;
        chart = chart.with_values(f).module("beltrami")?;
    }
    out.cgrid(".cgrid", &chart.f)?;
    let sidecar = out.path(".chart");
    chart.sidecar().save(&sidecar, &out.header).module("io")?;
    out.line("residual", format!("{:e}", chart.residual));
    out.line("iterations", chart.iterations);
    out.line("contraction", format!("{:e}", chart.contraction));
    out.line("jacobian_min", format!("{:e}", chart.jacobian_min));
    Ok(())
}

fn transforms(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let lat = lattice(cfg)?;
    let phi = structure_field(cfg, lat)?;
    let plan = TransformPlan::new(lat, cfg.transforms.padding).module("transforms")?;
    let (name, result) = match cfg.transforms.operator {
        TransformOp::Cauchy => ("cauchy", cauchy_green(&phi, &plan)),
        TransformOp::Beurling => ("beurling", beurling(&phi, &plan)),
    };
    let result = result.module("transforms")?.with_mask(domain_mask(cfg, &lat)).module("grid")?;
    out.cgrid(".cgrid", &result)?;
    out.line("operator", name);
    out.line("sup_input", format!("{:e}", phi.sup_norm()));
    out.line("sup_output", format!("{:e}", result.sup_norm()));
    Ok(())
}

fn family(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let lat = lattice(cfg)?;
    let mask = domain_mask(cfg, &lat);
    let star = structure_field(cfg, lat)?;
    let params = params(cfg)?;
    let mus = params
        .values()
        .iter()
        .map(|&b| BeltramiField::new(star.map(|v| v * b)))
        .collect::<confam::Result<Vec<_>>>()
        .module("structures")?;
    let mus = FamilyField::new(params.clone(), mus).module("families")?;
    let plan = TransformPlan::new(lat, cfg.transforms.padding).module("transforms")?;
    let fs = &cfg.family;
    let jets = if fs.jet_points.is_empty() {
        None
    } else {
        Some(JetSpec::new(FixedPointSet::new(fs.jet_points.clone()).module("families")?, fs.jet_order))
    };
    let opts = FamilyRungeOptions {
        anchors: cfg.params.anchors.clone(),
        degree: fs.degree,
        eps: vec![fs.eps],
        jets,
        tol: cfg.solver.tol,
        max_iter: cfg.solver.max_iter,
        dilation: fs.dilation,
    };
    let charts = standard_charts(&mus, &plan, &opts).module("beltrami")?;
    let target = fs.target;
    let f = charts
        .fibers
        .iter()
        .map(|c| {
            c.f.map(move |w| match target {
                FamilyTarget::Identity => w,
                FamilyTarget::Square => w * w,
                FamilyTarget::Exp => w.exp(),
            })
            .with_mask(mask.clone())
        })
        .collect::<confam::Result<Vec<_>>>()
        .module("families")?;
    let f = FamilyField::new(params.clone(), f).module("families")?;
    let k: Vec<bool> = (0..lat.len()).map(|i| mask[i] && lat.node_at(i).norm() <= fs.k_radius).collect();
    let report = family_runge_with_charts(&f, &mus, charts, &k, &opts).module("families")?;

    let mut manifest = FamilyManifest { entries: Vec::new() };
    for (i, (b, g)) in report.approximation.iter().enumerate() {
        let suffix = format!("_b{i}.cgrid");
        out.cgrid(&suffix, g)?;
        manifest.entries.push((b, format!("{}{suffix}", out.stem)));
    }
    let mpath = out.path(".family");
    manifest.save(&mpath, &out.header).module("io")?;

    out.line("fibers", report.fibers.len());
    out.line("max_sup_error", format!("{:e}", report.max_sup_error()));
    out.line("max_residual", format!("{:e}", report.max_residual()));
    for (j, fit) in report.anchor_fits.iter().enumerate() {
        out.line(
            format!("anchor.{j}"),
            format!("index={} degree={} sup_error={:e}", cfg.params.anchors[j], fit.degree_used, fit.sup_error),
        );
    }
    for (i, r) in report.fibers.iter().enumerate() {
        out.line(
            format!("fiber.{i}"),
            format!(
                "b={:e} sup_error={:e} residual={:e} fd_residual={:e} jet_defect={:e} chart_residual={:e}",
                params.values()[i],
                r.sup_error,
                r.residual,
                r.fd_residual,
                r.jet_defect,
                report.charts.fibers[i].residual
            ),
        );
    }
    Ok(())
}

/// Components of the null data in the lattice coordinate.
fn null_data(data: NullData, z: C64) -> [C64; 3] {
    let i = C64::i();
    match data {
        NullData::Enneper => [0.5 * (1.0 - z * z), 0.5 * i * (1.0 + z * z), z],
        NullData::Catenoid => {
            let w = z.powi(-2);
            [0.5 * (w - 1.0), 0.5 * i * (w + 1.0), 1.0 / z]
        }
    }
}

fn cycles(cfg: &RunConfig, lat: &Lattice, mask: &[bool]) -> Result<Vec<HomologyCycle>, CliError> {
    match &cfg.directed.cycles {
        CycleSpec::Auto => auto_cycles(lat, mask).module("directed"),
        CycleSpec::Squares(v) => {
            v.iter().map(|&(c, half)| HomologyCycle::square(lat, mask, c, half)).collect::<confam::Result<_>>().module("directed")
        }
    }
}

fn minimal(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let lat = lattice(cfg)?;
    let mask = domain_mask(cfg, &lat);
    let d = &cfg.directed;
    let cone = match d.cone {
        ConeKind::NullQuadric => ConeSpec::null_quadric(d.dimension).module("directed")?,
        ConeKind::PuncturedSpace => ConeSpec::punctured_space(d.dimension).module("directed")?,
    };
    let mode = match d.mode {
        Mode::RealOnly => PeriodMode::RealOnly,
        Mode::Full => PeriodMode::Full,
    };
    let params = params(cfg)?;
    let theta = ComplexGrid::filled(lat, C64::new(1.0, 0.0));
    let cycles = cycles(cfg, &lat, &mask)?;
    let multipliers = monomial_multipliers(lat, d.multipliers);

    let mut fields = Vec::with_capacity(params.len());
    for (i, &b) in params.values().iter().enumerate() {
        // Associate-family rotation e^{ib} keeps the data null.
        let phase = C64::from_polar(1.0, b);
        let f = (0..3)
            .map(|c| {
                ComplexGrid::from_fn(lat, |z| {
                    let v = phase * null_data(d.data, z)[c];
                    if v.is_finite() { v } else { C64::new(0.0, 0.0) }
                })
                .with_mask(mask.clone())
            })
            .collect::<confam::Result<Vec<_>>>()
            .module("directed")?;
        let member = check_cone_membership(&f, cone, d.tol).module("directed")?;
        out.line(format!("fiber.{i}.membership"), format!("residual={:e} pass={}", member.max_residual, member.pass));
        if !member.pass {
            return Err(CliError::Module {
                module: "directed",
                source: confam::Error::Fiber {
                    index: i,
                    source: Box::new(confam::Error::Domain(format!(
                        "data leave the cone (largest residual {:e} at node {}, smallest modulus {:e})",
                        member.max_residual, member.worst_node, member.min_modulus
                    ))),
                },
            });
        }
        let f = if cycles.is_empty() {
            f
        } else {
            let spray = build_period_spray(&f, cone, &theta, &cycles, &multipliers, d.domination)
                .map_err(|e| fiber_error(i, e))?;
            let spray = if d.perturbation > 0.0 {
                let zeta: Vec<C64> = (0..spray.len())
                    .map(|c| d.perturbation * C64::new((1.3 * c as f64).sin(), (0.7 * c as f64).cos()))
                    .collect();
                let moved = spray.apply(&zeta).map_err(|e| fiber_error(i, e))?;
                spray.rebased(moved).map_err(|e| fiber_error(i, e))?
            } else {
                spray
            };
            let p0 = spray.periods(&vec![C64::new(0.0, 0.0); spray.len()]).map_err(|e| fiber_error(i, e))?;
            out.line(format!("fiber.{i}.initial_periods"), fmt_periods(p0.iter()));
            let corr = kill_periods(&spray, mode, d.tol, d.max_iter, d.radius).map_err(|e| fiber_error(i, e))?;
            out.line(
                format!("fiber.{i}.kill"),
                format!(
                    "iterations={} residual={:e} max_cone_residual={:e}",
                    corr.iterations, corr.residual, corr.max_cone_residual
                ),
            );
            corr.field
        };
        fields.push(f);
    }
    let bundle = NullCurveBundle::new(params.clone(), cone, fields, theta, cycles).module("directed")?;
    for (i, p) in bundle.periods.iter().enumerate() {
        out.line(format!("fiber.{i}.periods"), fmt_periods(p.iter()));
    }
    let opts = MinimalOptions { period_tol: d.tol.max(1e-8), ..Default::default() };
    let fibers = minimal_immersion_family(&bundle, None, &opts).module("directed")?;

    let meshes = export_meshes(&fibers, &out.dir, &out.stem, &out.header).module("io")?;
    out.artifacts.extend(meshes);
    for (i, fib) in fibers.iter().enumerate() {
        for (c, h) in fib.h.iter().enumerate() {
            out.cgrid(&format!("_b{i}_h{c}.cgrid"), h)?;
        }
        let g = &fib.diagnostics;
        out.line(format!("fiber.{i}.b"), format!("{:e}", params.values()[i]));
        out.line(format!("fiber.{i}.conformality"), format!("{:e}", g.conformality));
        out.line(format!("fiber.{i}.harmonicity"), format!("{:e}", g.harmonicity));
        out.line(format!("fiber.{i}.harmonicity_relative"), format!("{:e}", g.harmonicity_relative));
        out.line(format!("fiber.{i}.margin"), format!("{:e}", g.margin));
        out.line(format!("fiber.{i}.nonflat"), g.nonflat);
        out.line(format!("fiber.{i}.loop_defect"), format!("{:e}", g.loop_defect));
        out.line(format!("fiber.{i}.real_loop_defect"), format!("{:e}", g.real_loop_defect));
        let flux: Vec<String> = g.flux.iter().map(|x| format!("{x:e}")).collect();
        out.line(format!("fiber.{i}.flux"), if flux.is_empty() { "none".into() } else { flux.join(" ") });
    }
    Ok(())
}

fn fiber_error(index: usize, e: confam::Error) -> CliError {
    CliError::Module { module: "directed", source: confam::Error::Fiber { index, source: Box::new(e) } }
}

/// Periods as `re,im` pairs, cycle index varying fastest.
fn fmt_periods<'a>(p: impl IntoIterator<Item = &'a C64>) -> String {
    let v: Vec<String> = p.into_iter().map(|z| format!("{:e},{:e}", z.re, z.im)).collect();
    if v.is_empty() {
        "none".into()
    } else {
        v.join(" ")
    }
}
