//! Scenario execution: one output directory per run, a manifest hashing every product.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use qtomo::chronocyclic::{chrono_eps_tei, refinement_study, tt_tomogram, CombParams, CombState, TTGrid};
use qtomo::decoherence::{damp_mode, DampingParams};
use qtomo::dynamics::{revival_time, spectrum_sweep, HamiltonianSpec, Propagator, RevivalClock, SweepParam};
use qtomo::fock::{fidelity, make_binomial, make_coherent, make_fock, make_pacs, make_two_mode_squeezed, tensor_pure};
use qtomo::indicators::{
    default_angles, negativity, slice_indicators, xi_all, xi_prime_tei, xi_qmi, xi_sle, xi_svne, Column, IndicatorKind,
    IndicatorSeries,
};
use qtomo::io::{
    density_to_json, ingest_density, INGEST_TOL, series_csv, spin_tomogram_csv, table_csv, to_json_rounded, tomogram_csv,
    tomogram_to_json, tt_profile_csv, write_text,
};
use qtomo::squeezing::{entropic_threshold, hillery_dq, hong_mandel_moment, tomographic_entropy_slice, HilleryComponent};
use qtomo::timeseries::{
    embed_dim, fit_lambda_inf, lambda_l, logistic_series, ar1_series, mi_curve, mi_delay, power_spectrum, EmbedConfig,
    Embedding, LyapunovConfig, ScalarSeries,
};
use qtomo::tomography::{
    all_xyz_axes, ensemble_density, ensemble_pure, spin_tomogram, tomogram_pure_single,
    tomogram_two_mode, QuadGrid, TwoModeSlicer,
};
use qtomo::{DensityMatrix, ModeSpace, PureState, C64};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{parse_fraction, Command, ScenarioConfig, SeriesSource, StateRecipe};

#[derive(Debug, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub name: &'a str,
    pub command: &'a str,
    pub seed: u64,
    pub config: &'a ScenarioConfig,
    pub files: Vec<ManifestEntry>,
}

struct Writer {
    dir: PathBuf,
    files: Vec<ManifestEntry>,
}

impl Writer {
    fn put(&mut self, name: &str, text: &str) -> Result<()> {
        write_text(&self.dir.join(name), text)?;
        self.files.push(ManifestEntry { path: name.into(), bytes: text.len(), sha256: sha256_hex(text.as_bytes()) });
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// First free directory among root/name, root/name-2, root/name-3, ...
fn fresh_dir(root: &Path, name: &str) -> Result<PathBuf> {
    for k in 1.. {
        let dir = if k == 1 { root.join(name) } else { root.join(format!("{name}-{k}")) };
        if !dir.exists() {
            fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            return Ok(dir);
        }
    }
    unreachable!()
}

/// Runs a resolved scenario and returns its output directory.
pub fn run_scenario(cfg: &ScenarioConfig, out_root: &Path) -> Result<PathBuf> {
    let outputs: Vec<String> = match &cfg.outputs {
        Some(o) => o.clone(),
        None => cfg.command.default_outputs().iter().map(|s| s.to_string()).collect(),
    };
    let dir = fresh_dir(out_root, &cfg.name)?;
    let mut w = Writer { dir: dir.clone(), files: Vec::new() };
    if !outputs.is_empty() {
        let want = |p: &str| outputs.iter().any(|o| o == p);
        match cfg.command {
            Command::Evolve => evolve(cfg, &want, &mut w)?,
            Command::Tomogram => tomogram(cfg, &want, &mut w)?,
            Command::Indicators => indicators(cfg, &want, &mut w)?,
            Command::Squeeze => squeeze(cfg, &mut w)?,
            Command::Sweep => sweep(cfg, &want, &mut w)?,
            Command::Timeseries => timeseries(cfg, &want, &mut w)?,
            Command::Chrono => chrono(cfg, &want, &mut w)?,
            Command::Ingest => ingest(cfg, &want, &mut w)?,
        }
    }
    let manifest = Manifest { name: &cfg.name, command: cfg.command.name(), seed: cfg.seed, config: cfg, files: w.files };
    write_text(&dir.join("manifest.json"), &serde_json::to_string_pretty(&manifest)?)?;
    Ok(dir)
}

fn c64(z: [f64; 2]) -> C64 {
    C64::new(z[0], z[1])
}

fn build_state(recipe: &StateRecipe) -> Result<PureState> {
    let one = |c: usize| ModeSpace::fock(c);
    let psi = match recipe {
        StateRecipe::Coherent { alpha, cutoff } => make_coherent(c64(*alpha), &one(*cutoff))?,
        StateRecipe::Pacs { alpha, m, cutoff } => make_pacs(c64(*alpha), *m, &one(*cutoff))?,
        StateRecipe::Fock { n, cutoff } => make_fock(*n, &one(*cutoff))?,
        StateRecipe::Binomial { n, cutoff } => make_binomial(*n, &one(*cutoff))?,
        StateRecipe::TwoModeCoherent { alpha_a, alpha_b, cutoff } => {
            tensor_pure(&make_coherent(c64(*alpha_a), &one(*cutoff))?, &make_coherent(c64(*alpha_b), &one(*cutoff))?)
        }
        StateRecipe::TwoModeSqueezed { zeta, cutoff } => {
            make_two_mode_squeezed(c64(*zeta), &ModeSpace::two_mode(*cutoff, *cutoff))?
        }
    };
    Ok(psi)
}

struct Instant {
    t: f64,
    psi: PureState,
}

/// Initial state evolved to every requested instant (the initial state alone without a system).
fn instants(cfg: &ScenarioConfig) -> Result<Vec<Instant>> {
    let recipe = cfg.state.as_ref().ok_or_else(|| anyhow!("[state] section is required for '{}'", cfg.command.name()))?;
    let psi0 = build_state(recipe)?;
    let Some(spec) = &cfg.system else {
        return Ok(vec![Instant { t: 0.0, psi: psi0 }]);
    };
    let space = spec.space(recipe.cutoff());
    if space != psi0.space {
        bail!(
            "state space {:?} does not match the {} system layout {:?}; choose a matching [state] kind",
            psi0.space.dims(),
            model_name(spec),
            space.dims()
        );
    }
    let time = cfg.time.clone().unwrap_or_default();
    let prop = Propagator::new(spec, &space)?;
    let mut out = Vec::new();
    for &t in &time.instants {
        out.push(Instant { t, psi: prop.evolve(&psi0, t)? });
    }
    if !time.revival_fractions.is_empty() {
        let t_rev = revival_time(spec).ok_or_else(|| anyhow!("{} has no exact revival time for these parameters", model_name(spec)))?;
        let clock = match spec {
            HamiltonianSpec::KerrCubic { chi1, chi2 } => RevivalClock::kerr_cubic(*chi1, *chi2),
            _ => None,
        };
        for f in &time.revival_fractions {
            let (p, q) = parse_fraction(f)?;
            let t = t_rev * p as f64 / q as f64;
            let psi = match &clock {
                Some(c) => c.evolve_fraction(&psi0, p, q)?,
                None => prop.evolve(&psi0, t)?,
            };
            out.push(Instant { t, psi });
        }
    }
    if out.is_empty() {
        out.push(Instant { t: 0.0, psi: psi0 });
    }
    Ok(out)
}

fn model_name(spec: &HamiltonianSpec) -> String {
    serde_json::to_value(spec).ok().and_then(|v| v["model"].as_str().map(str::to_string)).unwrap_or_default()
}

fn quad_grid(cfg: &ScenarioConfig, extra: &[f64]) -> Result<QuadGrid> {
    let g = &cfg.grid;
    let mut thetas = QuadGrid::equal_angles(g.n_theta, g.full_circle);
    for &e in extra {
        if !thetas.iter().any(|t| (t - e).abs() < 1e-12) {
            thetas.push(e);
        }
    }
    thetas.sort_by(f64::total_cmp);
    Ok(QuadGrid::new(g.x_min, g.x_max, g.n_x, thetas)?)
}

fn evolve(cfg: &ScenarioConfig, want: &dyn Fn(&str) -> bool, w: &mut Writer) -> Result<()> {
    let inst = instants(cfg)?;
    let psi0 = &inst[0].psi;
    let modes = psi0.space.n_subsystems();
    if want("observables") {
        let mut header = vec!["t".to_string()];
        header.extend((0..modes).map(|m| format!("n_{m}")));
        header.push("fidelity_first".into());
        let rows: Vec<Vec<f64>> = inst
            .iter()
            .map(|i| {
                let mut r = vec![i.t];
                r.extend((0..modes).map(|m| i.psi.mean_number(m)));
                r.push(fidelity(psi0, &i.psi));
                r
            })
            .collect();
        let h: Vec<&str> = header.iter().map(String::as_str).collect();
        w.put("observables.csv", &table_csv(&h, &rows))?;
    }
    if want("density") {
        for (k, i) in inst.iter().enumerate() {
            w.put(&format!("rho_{k:03}.json"), &density_to_json(&i.psi.to_density()?)?)?;
        }
    }
    if want("damping") {
        let d = cfg.damping.as_ref().ok_or_else(|| anyhow!("'damping' output needs a [damping] section"))?;
        let rho = inst[0].psi.to_density()?;
        let mut rows = Vec::new();
        for &gt in &d.gamma_tau {
            let p = match d.kind.as_str() {
                "amplitude" => DampingParams::amplitude(gt, 1.0),
                "phase" => DampingParams::phase(gt, 1.0),
                k => bail!("damping kind '{k}' is not 'amplitude' or 'phase'"),
            };
            let out = damp_mode(&rho, d.mode, &p)?;
            rows.push(vec![gt, out.purity()]);
        }
        w.put("damping.csv", &table_csv(&["gamma_tau", "purity"], &rows))?;
    }
    Ok(())
}

fn tomogram(cfg: &ScenarioConfig, want: &dyn Fn(&str) -> bool, w: &mut Writer) -> Result<()> {
    let grid = quad_grid(cfg, &[])?;
    for (k, i) in instants(cfg)?.iter().enumerate() {
        let t = match i.psi.space.n_subsystems() {
            1 => tomogram_pure_single(&i.psi, &grid)?,
            2 => tomogram_two_mode(ensemble_pure(&i.psi)?, &grid, &grid)?,
            n => bail!("tomogram output supports one or two modes, state has {n} subsystems"),
        };
        if want("tomogram") {
            w.put(&format!("tomogram_{k:03}.csv"), &tomogram_csv(&t)?)?;
        }
        if want("tomogram_json") {
            w.put(&format!("tomogram_{k:03}.json"), &tomogram_to_json(&t)?)?;
        }
    }
    Ok(())
}

fn indicators(cfg: &ScenarioConfig, want: &dyn Fn(&str) -> bool, w: &mut Writer) -> Result<()> {
    let spec = &cfg.indicators;
    let g = QuadGrid::new(-spec.x_max, spec.x_max, spec.n_x, vec![0.0])?;
    let angles = default_angles(spec.n_angles);
    let inst = instants(cfg)?;
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); 7];
    let mut slices = Vec::new();
    for i in &inst {
        let rho = field_pair(&i.psi)?;
        let slicer = TwoModeSlicer::new(ensemble_density(&rho)?, &g, &g)?;
        let xi = xi_all(&slicer, &angles)?;
        let vals = [xi[0], xi_prime_tei(&slicer, &angles)?, xi[1], xi[2], xi[3], xi_svne(&rho, &[0])?, xi_sle(&rho, &[0])?];
        for (c, v) in cols.iter_mut().zip(vals) {
            c.push(v);
        }
        if want("slices") {
            for s in slice_indicators(&slicer, &angles, &IndicatorKind::ALL)? {
                slices.push(vec![i.t, s.theta_a, s.theta_b, kind_index(s.kind), s.value]);
            }
        }
    }
    if want("indicators") {
        let mut series = IndicatorSeries::new("t", inst.iter().map(|i| i.t).collect());
        let order = [Column::XiTei, Column::XiPrimeTei, Column::XiIpr, Column::XiPcc, Column::XiBd, Column::XiSvne, Column::XiSle];
        for (c, v) in order.into_iter().zip(cols) {
            series.set(c, v)?;
        }
        series.add_differences()?;
        w.put("indicators.csv", &series_csv(&series))?;
    }
    if want("slices") {
        w.put("slices.csv", &table_csv(&["t", "theta_a", "theta_b", "kind", "value"], &slices))?;
    }
    Ok(())
}

fn kind_index(k: IndicatorKind) -> f64 {
    IndicatorKind::ALL.iter().position(|&x| x == k).unwrap_or(0) as f64
}

/// Reduced state of the first two subsystems (the field modes).
fn field_pair(psi: &PureState) -> Result<DensityMatrix> {
    match psi.space.n_subsystems() {
        2 => Ok(psi.to_density()?),
        n if n > 2 => Ok(psi.reduced(&[0, 1])?),
        _ => bail!("indicators need at least two subsystems"),
    }
}

fn squeeze(cfg: &ScenarioConfig, w: &mut Writer) -> Result<()> {
    let sq = &cfg.squeeze;
    let grid = quad_grid(cfg, &[sq.theta, 0.0, std::f64::consts::FRAC_PI_2])?;
    let mut header = vec!["t".to_string()];
    for q in &sq.orders {
        header.push(format!("hong_mandel_{q}"));
        header.push(format!("hong_mandel_threshold_{q}"));
        header.push(format!("hillery_z1_{q}"));
    }
    header.push("entropy_sum".into());
    header.push("entropy_bound".into());
    let mut rows = Vec::new();
    for i in instants(cfg)? {
        if i.psi.space.n_subsystems() != 1 {
            bail!("squeeze runs on single-mode states");
        }
        let t = tomogram_pure_single(&i.psi, &grid)?;
        let mut r = vec![i.t];
        for &q in &sq.orders {
            r.push(hong_mandel_moment(&t, sq.theta, q)?);
            r.push(double_factorial(2 * q - 1) / 2f64.powi(q as i32));
            r.push(hillery_dq(&i.psi, q, HilleryComponent::Z1, 1).map(|s| s.value).unwrap_or(f64::NAN));
        }
        r.push(tomographic_entropy_slice(&t, 0.0)? + tomographic_entropy_slice(&t, std::f64::consts::FRAC_PI_2)?);
        r.push(2.0 * entropic_threshold());
        rows.push(r);
    }
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    w.put("squeezing.csv", &table_csv(&h, &rows))
}

fn double_factorial(n: usize) -> f64 {
    (1..=n).rev().step_by(2).map(|k| k as f64).product()
}

fn sweep(cfg: &ScenarioConfig, want: &dyn Fn(&str) -> bool, w: &mut Writer) -> Result<()> {
    let spec = cfg.system.as_ref().ok_or_else(|| anyhow!("[system] section is required for 'sweep'"))?;
    let s = cfg.sweep.as_ref().ok_or_else(|| anyhow!("[sweep] section is required for 'sweep'"))?;
    let space = spec.space(s.cutoff);
    let points = spectrum_sweep(spec, &SweepParam::stepped(&s.param, s.start, s.step, s.count), &space, &s.charge)?;
    let levels = points.first().map(|p| p.eigen.dim()).unwrap_or(0);
    let mut header = vec![s.param.clone()];
    header.extend((0..levels).map(|k| format!("level_{k}")));
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    if want("spectrum") {
        let rows: Vec<Vec<f64>> =
            points.iter().map(|p| std::iter::once(p.param).chain(p.eigen.energies.iter().copied()).collect()).collect();
        w.put("spectrum.csv", &table_csv(&h, &rows))?;
    }
    if want("svne") {
        let mut rows = Vec::new();
        for p in &points {
            let mut r = vec![p.param];
            for k in 0..levels {
                r.push(qtomo::indicators::xi_svne_pure(&p.eigen.state(k, &space), &[0])?);
            }
            rows.push(r);
        }
        w.put("svne.csv", &table_csv(&h, &rows))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TimeseriesSummary {
    n: usize,
    tau_d: usize,
    d_emb: usize,
    slopes: Vec<f64>,
    lambda_inf: f64,
    m: f64,
    q: f64,
    residual: f64,
}

fn timeseries(cfg: &ScenarioConfig, want: &dyn Fn(&str) -> bool, w: &mut Writer) -> Result<()> {
    let ts = cfg.timeseries.as_ref().ok_or_else(|| anyhow!("[timeseries] section is required for 'timeseries'"))?;
    let values = match &ts.source {
        SeriesSource::Logistic { r, x0, n, discard } => logistic_series(*r, *x0, *n, *discard),
        SeriesSource::Ar1 { a, noise, n } => ar1_series(*a, *noise, *n, cfg.seed),
        SeriesSource::File { path } => read_series(path)?,
    };
    let s = ScalarSeries::new(values, ts.dt)?;
    if want("mi") {
        let mi = mi_curve(&s, ts.max_delay, ts.n_bins)?;
        let rows: Vec<Vec<f64>> = mi.iter().enumerate().map(|(t, v)| vec![t as f64, *v]).collect();
        w.put("mi.csv", &table_csv(&["tau", "mi"], &rows))?;
    }
    if want("spectrum") {
        let rows: Vec<Vec<f64>> = power_spectrum(&s)?.into_iter().map(|(f, p)| vec![f, p]).collect();
        w.put("spectrum.csv", &table_csv(&["frequency", "power"], &rows))?;
    }
    if want("lambda") || want("fit") {
        let tau = mi_delay(&s, ts.max_delay, ts.n_bins, ts.smooth)?;
        let e = embed_dim(&s, tau, &EmbedConfig::default()).with_context(|| format!("embedding with tau_d = {tau}"))?;
        let emb = Embedding::new(tau, e.d_emb)?;
        let lcfg = LyapunovConfig { n_starts: ts.n_starts, seed: cfg.seed, ..LyapunovConfig::default() };
        let pts = lambda_l(&s, &emb, &ts.ls, &lcfg)?;
        if want("lambda") {
            let rows: Vec<Vec<f64>> = pts.iter().map(|p| vec![p.l as f64, p.lambda, p.skipped as f64]).collect();
            w.put("lambda.csv", &table_csv(&["l", "lambda", "skipped"], &rows))?;
        }
        if want("fit") {
            let pairs: Vec<(f64, f64)> = pts.iter().filter(|p| p.lambda.is_finite()).map(|p| (p.l as f64, p.lambda)).collect();
            let fit = fit_lambda_inf(&pairs)?;
            let summary = TimeseriesSummary {
                n: s.len(),
                tau_d: tau,
                d_emb: e.d_emb,
                slopes: e.slopes,
                lambda_inf: fit.lambda_inf,
                m: fit.m,
                q: fit.q,
                residual: fit.residual,
            };
            w.put("fit.json", &to_json_rounded(&summary)?)?;
        }
    }
    Ok(())
}

fn read_series(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading series {}", path.display()))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .enumerate()
        .map(|(k, l)| l.parse::<f64>().with_context(|| format!("{}: value {} is not a number", path.display(), k + 1)))
        .collect()
}

#[derive(Serialize)]
struct ChronoEps {
    state: String,
    n_teeth: usize,
    n_t: usize,
    t_span: f64,
    norm_integral: f64,
    eps_tei: f64,
    eps_refined: Option<f64>,
}

fn chrono(cfg: &ScenarioConfig, want: &dyn Fn(&str) -> bool, w: &mut Writer) -> Result<()> {
    let c = cfg.chrono.as_ref().ok_or_else(|| anyhow!("[chrono] section is required for 'chrono'"))?;
    let p = CombParams::new(c.omega_p, c.omega_bar, c.d_omega, c.omega_0, c.d_big_omega)?;
    let mut g = TTGrid::default_for(&p);
    if let Some(span) = c.t_span {
        g = TTGrid::new(-0.5 * span, 0.5 * span, g.n_t)?;
    }
    if let Some(n) = c.n_t {
        g = TTGrid::new(g.t_min, g.t_max, n)?;
    }
    let names = c.states.clone().unwrap_or_else(|| vec!["alpha".into(), "beta".into()]);
    let mut report = Vec::new();
    for name in &names {
        let state = match name.as_str() {
            "alpha" => CombState::Alpha,
            "beta" => CombState::Beta,
            other => bail!("chrono state '{other}' is not 'alpha' or 'beta'"),
        };
        let tt = tt_tomogram(state, &p, &g)?;
        if want("profile") {
            w.put(&format!("profile_{name}.csv"), &tt_profile_csv(&tt))?;
        }
        let eps_refined = if c.refine { Some(refinement_study(state, &p, &g)?.eps_fine) } else { None };
        report.push(ChronoEps {
            state: name.clone(),
            n_teeth: p.n_teeth(),
            n_t: g.n_t,
            t_span: g.span(),
            norm_integral: tt.norm_integral,
            eps_tei: chrono_eps_tei(&tt)?,
            eps_refined,
        });
    }
    if want("eps") {
        w.put("eps.json", &to_json_rounded(&report)?)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct IngestSummary {
    dims: Vec<usize>,
    trace: f64,
    purity: f64,
    eigenvalues: Vec<f64>,
    part_a: Vec<usize>,
    xi_svne: Option<f64>,
    xi_qmi: Option<f64>,
    negativity: Option<f64>,
}

fn ingest(cfg: &ScenarioConfig, want: &dyn Fn(&str) -> bool, w: &mut Writer) -> Result<()> {
    let spec = cfg.ingest.as_ref().ok_or_else(|| anyhow!("[ingest] section is required for 'ingest'"))?;
    let rho = ingest_density(&spec.path).with_context(|| format!("ingesting {}", spec.path.display()))?;
    let n = rho.space.n_subsystems();
    if want("density") {
        w.put("density.json", &density_to_json(&rho)?)?;
    }
    if want("summary") {
        let part_a = spec.part_a.clone().unwrap_or_else(|| vec![0]);
        let part_b: Vec<usize> = (0..n).filter(|k| !part_a.contains(k)).collect();
        let bipartite = !part_b.is_empty();
        let mut eigs = rho.eigenvalues();
        eigs.sort_by(|a, b| b.total_cmp(a));
        let summary = IngestSummary {
            dims: rho.space.dims().to_vec(),
            trace: rho.trace().re,
            purity: rho.purity(),
            eigenvalues: eigs,
            xi_svne: if bipartite { Some(noisy(xi_svne(&rho, &part_a))?) } else { None },
            xi_qmi: if bipartite { Some(noisy(xi_qmi(&rho, &part_a, &part_b))?) } else { None },
            negativity: if bipartite { Some(noisy(negativity(&rho, &part_a))?) } else { None },
            part_a,
        };
        w.put("summary.json", &to_json_rounded(&summary)?)?;
    }
    if want("spin_tomogram") {
        let st = spin_tomogram(&rho, &all_xyz_axes(n))?;
        w.put("spin_tomogram.csv", &spin_tomogram_csv(&st))?;
    }
    Ok(())
}

/// Measured matrices carry ~1e-9 rounding; negative values within the ingest tolerance read as zero.
fn noisy(v: qtomo::Result<f64>) -> Result<f64> {
    match v {
        Err(qtomo::Error::NegativeIndicator(x)) if x > -INGEST_TOL => Ok(0.0),
        other => Ok(other?),
    }
}
