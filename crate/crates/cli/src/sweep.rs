use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nhpc_core::biortho::{biorthogonal_eig, ep_scan, track_branches, BiorthogonalSpectrum, EpInterval, EpScanOptions};
use nhpc_core::models::{current_operator, System};
use nhpc_core::observables::{
    current_lr, current_operator_site_resolved, current_rr, current_rr_site_resolved, expect_quadratic,
    isolated_current_at, persistent_current,
};
use nhpc_core::oracle::HermitianSpectrum;
use nhpc_core::selfenergy::effective_hamiltonian;
use nhpc_core::susceptibility::{susceptibility_exact_row, susceptibility_nh_row};
use nhpc_core::NhError;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Method, RunConfig};
use crate::error::CliError;

/// Offset applied to φ when the biorthogonal basis is defective there.
pub const EP_NUDGE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Nudge {
    pub phi: f64,
    pub nudge: f64,
    pub stage: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub files: Vec<String>,
    pub ep_nudges: Vec<Nudge>,
    pub exceptional_points: Vec<EpInterval>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    preset: Option<&'a str>,
    config: &'a RunConfig,
    workers: usize,
    ep_nudges: &'a [Nudge],
    branch_warnings: usize,
    files: &'a [String],
    wall_seconds: &'a BTreeMap<&'static str, f64>,
}

/// Evaluates `f` at `phi`, stepping off the point if the basis there is defective.
fn nudged<T>(phi: f64, stage: &'static str, f: impl Fn(f64) -> nhpc_core::Result<T>) -> Result<(T, Option<Nudge>), CliError> {
    match f(phi) {
        Err(NhError::Defective { .. }) => {}
        r => return Ok((r?, None)),
    }
    let mut last = None;
    for d in [EP_NUDGE, -EP_NUDGE, 10.0 * EP_NUDGE, -10.0 * EP_NUDGE] {
        match f(phi + d) {
            Ok(v) => return Ok((v, Some(Nudge { phi, nudge: d, stage }))),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one retry").into())
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

struct Writer {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Writer {
    fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut buf = String::new();
        buf.push_str(&header.join(","));
        buf.push('\n');
        for r in rows {
            buf.push_str(&r.join(","));
            buf.push('\n');
        }
        self.file(&path, buf.as_bytes())
    }

    fn file(&mut self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        self.written.push(path.to_path_buf());
        let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        f.write_all(bytes).map_err(|e| CliError::io(path, e))
    }

    fn names(&self) -> Vec<String> {
        self.written.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect()
    }

    fn discard(&self) {
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
    }
}

struct Point {
    spectrum: BiorthogonalSpectrum,
    currents: Vec<f64>,
    bonds: Vec<(usize, f64, f64)>,
    nudges: Vec<Nudge>,
}

fn point(cfg: &RunConfig, sys: &System, phi: f64, methods: &[Method]) -> Result<Point, CliError> {
    let temp = cfg.temperature();
    let bond = cfg.bond();
    let (spectrum, nudge) = nudged(phi, "spectrum", |p| biorthogonal_eig(&effective_hamiltonian(&sys.with_phi(p))?))?;
    let at = sys.with_phi(phi + nudge.map_or(0.0, |n| n.nudge));
    let j = current_operator(&at.model, bond)?;
    let mut currents = Vec::new();
    for &m in methods {
        match m {
            Method::NhTrace => currents.push(persistent_current(sys, phi, temp, cfg.delta_phi)?),
            Method::NhOperator => currents.push(expect_quadratic(&spectrum, &j, temp)?),
            Method::Lr => {
                let z = current_lr(&spectrum, &j);
                currents.extend([z.re, z.im]);
            }
            Method::Rr => currents.push(current_rr(&spectrum, &j)),
            Method::Iso => currents.push(isolated_current_at(&sys.with_phi(phi).model, bond, temp)?),
            Method::Exact => {
                let s = sys.with_phi(phi);
                let hs = HermitianSpectrum::of(&s)?;
                currents.push(hs.expect(&hs.layout.embed(&current_operator(&s.model, bond)?), temp));
            }
            Method::SusceptibilityNh | Method::SusceptibilityExact => {}
        }
    }
    let mut bonds = Vec::new();
    if cfg.site_resolved {
        let list: Vec<usize> = at.model.current_bonds().collect();
        let op = current_operator_site_resolved(&spectrum, &at.model, &list, temp)?;
        let rr = current_rr_site_resolved(&spectrum, &at.model, &list)?;
        bonds = list.into_iter().zip(op).zip(rr).map(|((b, o), r)| (b, o, r)).collect();
    }
    Ok(Point { spectrum, currents, bonds, nudges: nudge.into_iter().collect() })
}

fn amplitude(cfg: &RunConfig, sys: &System, phis: &[f64], exact: bool) -> Result<(f64, f64), CliError> {
    let temp = cfg.temperature();
    let r: Vec<(f64, f64)> = phis
        .par_iter()
        .map(|&p| {
            let nh = persistent_current(sys, p, temp, cfg.delta_phi)?;
            let ex = if exact {
                let s = sys.with_phi(p);
                let hs = HermitianSpectrum::of(&s)?;
                hs.expect(&hs.layout.embed(&current_operator(&s.model, cfg.bond())?), temp)
            } else {
                f64::NAN
            };
            Ok((nh.abs(), ex.abs()))
        })
        .collect::<Result<_, CliError>>()?;
    let nh = r.iter().map(|x| x.0).fold(0.0, f64::max);
    let ex = if exact { r.iter().map(|x| x.1).fold(0.0, f64::max) } else { f64::NAN };
    Ok((nh, ex))
}

/// Runs every requested method over the φ grid and writes the results into `out`.
///
/// On failure every file written so far is removed.
pub fn run_sweep(cfg: &RunConfig, out: &Path, preset: Option<&str>, workers: usize) -> Result<RunSummary, CliError> {
    cfg.validate()?;
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("workers: {e}")))?;
    let mut w = Writer { dir: out.to_path_buf(), written: Vec::new() };
    match pool.install(|| sweep(cfg, &mut w, preset, workers.max(1))) {
        Ok(s) => Ok(s),
        Err(e) => {
            w.discard();
            Err(e)
        }
    }
}

fn sweep(cfg: &RunConfig, w: &mut Writer, preset: Option<&str>, workers: usize) -> Result<RunSummary, CliError> {
    let sys = cfg.system();
    let phis = cfg.phi_grid.points();
    let methods = cfg.methods();
    let mut times = BTreeMap::new();
    let mut nudges = Vec::new();

    let t0 = Instant::now();
    let points: Vec<Point> = phis.par_iter().map(|&p| point(cfg, &sys, p, &methods)).collect::<Result<_, _>>()?;
    times.insert("points", t0.elapsed().as_secs_f64());
    nudges.extend(points.iter().flat_map(|p| p.nudges.iter().copied()));

    let t0 = Instant::now();
    let sweep: Vec<_> =
        phis.par_iter().map(|&p| effective_hamiltonian(&sys.with_phi(p))).collect::<nhpc_core::Result<_>>()?;
    let eps = ep_scan(&sweep, &EpScanOptions::for_hopping(sys.model.t()))?;
    let values: Vec<_> = points.iter().map(|p| p.spectrum.eigenvalues.clone()).collect();
    let branches = track_branches(&phis, &values, &eps)?;
    times.insert("spectrum", t0.elapsed().as_secs_f64());

    let mut header = vec!["phi"];
    for m in &methods {
        header.extend_from_slice(m.columns());
    }
    if header.len() > 1 {
        w.csv(
            "currents.csv",
            &header,
            phis.iter().zip(&points).map(|(&p, pt)| std::iter::once(p).chain(pt.currents.iter().copied()).map(num).collect()),
        )?;
    }

    let mut rows = Vec::new();
    for (k, &p) in phis.iter().enumerate() {
        for (b, z) in branches.values[k].iter().enumerate() {
            let r = points[k].spectrum.phase_rigidity[branches.index[k][b]];
            rows.push(vec![num(p), b.to_string(), num(z.re), num(z.im), num(r)]);
        }
    }
    w.csv("spectrum.csv", &["phi", "branch", "re", "im", "phase_rigidity"], rows)?;
    w.csv(
        "eps.csv",
        &["phi_lo", "phi_hi", "phi_at", "mode_a", "mode_b", "gap", "phase_rigidity", "re", "im"],
        eps.iter().map(|e| {
            vec![
                num(e.phi_lo),
                num(e.phi_hi),
                num(e.phi_at),
                e.modes.0.to_string(),
                e.modes.1.to_string(),
                num(e.gap),
                num(e.rigidity),
                num(e.eigenvalue.re),
                num(e.eigenvalue.im),
            ]
        }),
    )?;

    if cfg.site_resolved {
        let rows = phis.iter().zip(&points).flat_map(|(&p, pt)| {
            pt.bonds.iter().map(move |&(b, o, r)| vec![num(p), b.to_string(), num(o), num(r)])
        });
        w.csv("bonds.csv", &["phi", "bond", "nh_operator", "rr"], rows)?;
    }

    for m in [Method::SusceptibilityNh, Method::SusceptibilityExact] {
        if !methods.contains(&m) {
            continue;
        }
        let t0 = Instant::now();
        let om = cfg.omega_grid.expect("validated").points();
        let (bond, eta) = (cfg.bond(), cfg.eta());
        let maps: Vec<(Vec<f64>, Option<Nudge>)> = phis
            .par_iter()
            .map(|&p| {
                if m == Method::SusceptibilityNh {
                    nudged(p, "susceptibility_nh", |q| susceptibility_nh_row(&sys.with_phi(q), bond, &om))
                } else {
                    Ok((susceptibility_exact_row(&sys.with_phi(p), bond, &om, eta)?, None))
                }
            })
            .collect::<Result<_, CliError>>()?;
        nudges.extend(maps.iter().filter_map(|x| x.1));
        let rows = phis.iter().zip(&maps).flat_map(|(&p, (row, _))| {
            om.iter().zip(row).map(move |(&o, &v)| vec![num(p), num(o), num(v)])
        });
        w.csv(&format!("{}.csv", m.name()), &["phi", "omega", "im_pi"], rows)?;
        times.insert(m.name(), t0.elapsed().as_secs_f64());
    }

    if !cfg.kappas.is_empty() {
        let t0 = Instant::now();
        let exact = methods.contains(&Method::Exact);
        let mut rows = Vec::new();
        for &k in &cfg.kappas {
            let (nh, ex) = amplitude(cfg, &sys.with_kappa(k), &phis, exact)?;
            let mut r = vec![num(k), num(nh)];
            if exact {
                r.push(num(ex));
            }
            rows.push(r);
        }
        let header: &[&str] = if exact { &["kappa", "amp_nh_trace", "amp_exact"] } else { &["kappa", "amp_nh_trace"] };
        w.csv("kappa_scan.csv", header, rows)?;
        times.insert("kappa_scan", t0.elapsed().as_secs_f64());
    }

    let mut files = w.names();
    files.push("run_manifest.json".into());
    let manifest = Manifest {
        tool: "nhpc",
        version: env!("CARGO_PKG_VERSION"),
        preset,
        config: cfg,
        workers,
        ep_nudges: &nudges,
        branch_warnings: branches.warnings.len(),
        files: &files,
        wall_seconds: &times,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Config(e.to_string()))? + "\n";
    let path = w.dir.join("run_manifest.json");
    w.file(&path, text.as_bytes())?;
    Ok(RunSummary { output_dir: w.dir.clone(), files, ep_nudges: nudges, exceptional_points: eps })
}
