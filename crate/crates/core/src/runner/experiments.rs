//! Parameter validation and execution for each experiment kind.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde_json::json;

use super::params::Params;
use super::{Artifact, ExperimentConfig, ExperimentKind, Outcome, Result, RunError};
use crate::billiard::{
    cover_dimension, find_periodic_orbit, trapped_set_covers, Billiard, CoverOptions, OrbitOptions,
};
use crate::gap_lab::{power_norm_scan, resolvent_norm_scan, spectrum, ResolventScanOptions, SPECTRUM_CAP};
use crate::geometry::{
    check_disjoint, check_no_eclipse, distance_to_hull, BoundaryChart, GeometryError, ObstacleConfig, Vec2,
};
use crate::linalg::CVec;
use crate::phase_quant::{
    baker_open, dilation_model, h_of, quantize_weyl, write_operator, PhaseError, SymbolGrid, TorusOperator,
};
use crate::stats::linear_fit;
use crate::svg::{Plot, Rect, Series};
use crate::wave_decay::{
    deformed_contour_check, fdtd_run, random_dissipative, DeformedOptions, FdtdOptions, PulseKind, WaveGrid,
    WaveGridSpec, WaveState,
};

/// Names accepted by [`named_symbol`].
pub const SYMBOL_NAMES: [&str; 5] = ["harper", "sinsin", "expcos", "ratio", "bump"];

/// Smooth real test symbols on the torus.
pub fn named_symbol(name: &str) -> Option<fn(f64, f64) -> f64> {
    fn harper(x: f64, xi: f64) -> f64 {
        (TAU * x).cos() + (TAU * xi).cos()
    }
    fn sinsin(x: f64, xi: f64) -> f64 {
        (TAU * x).sin() * (TAU * xi).sin()
    }
    fn expcos(x: f64, xi: f64) -> f64 {
        ((TAU * x).cos() + 0.5 * (TAU * xi).sin()).exp()
    }
    fn ratio(x: f64, xi: f64) -> f64 {
        1.0 / (2.5 + (TAU * x).cos() + (TAU * (x + xi)).sin())
    }
    fn bump(x: f64, xi: f64) -> f64 {
        (1.0 - (TAU * x).cos()).powi(3) * (1.0 - (TAU * xi).cos()).powi(2) / 32.0
    }
    Some(match name {
        "harper" => harper,
        "sinsin" => sinsin,
        "expcos" => expcos,
        "ratio" => ratio,
        "bump" => bump,
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum MapFamily {
    Baker,
    Dilation { cutoff: f64 },
}

impl MapFamily {
    fn from_params(p: &Params<'_>) -> Result<Self> {
        let map = p.choice("map", "baker", &["baker", "dilation"])?;
        let cutoff = p.f64_or("cutoff", 0.2)?;
        if map == "dilation" {
            if !(cutoff > 0.0 && cutoff < 0.25) {
                return Err(p.err("cutoff", "must lie in (0, 1/4)"));
            }
            Ok(Self::Dilation { cutoff })
        } else {
            Ok(Self::Baker)
        }
    }

    fn build(self, n: usize) -> std::result::Result<TorusOperator, PhaseError> {
        match self {
            Self::Baker => baker_open(n),
            Self::Dilation { cutoff } => dilation_model(n, cutoff),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Self::Baker => "open baker",
            Self::Dilation { .. } => "dilation model",
        }
    }
}

pub(crate) enum Plan {
    Geometry {
        config: ObstacleConfig,
    },
    Orbit {
        config: ObstacleConfig,
        words: Vec<Vec<usize>>,
        opts: OrbitOptions,
    },
    TrappedSet {
        config: ObstacleConfig,
        depth: u32,
        min_depth: u32,
        opts: CoverOptions,
    },
    Quantize {
        symbol: String,
        ns: Vec<usize>,
        write_operators: bool,
    },
    GapScan {
        map: MapFamily,
        ns: Vec<usize>,
        delta: f64,
    },
    ResolventScan {
        map: MapFamily,
        ns: Vec<usize>,
        delta: f64,
        gamma: Option<f64>,
        h0: f64,
        return_time: f64,
        zs: Vec<Complex64>,
    },
    Spectrum {
        map: MapFamily,
        n: usize,
        cap: usize,
    },
    Wave {
        spec: WaveGridSpec,
        obstacles: Option<ObstacleConfig>,
        pulse: PulseKind,
        width: f64,
        center: Vec2,
        fdtd: FdtdOptions,
    },
    ContourTest {
        dim: usize,
        matrices: usize,
        ks: Vec<u32>,
        ts: Vec<f64>,
        delta: f64,
        margin: f64,
        opts: DeformedOptions,
    },
}

fn obstacles(p: &Params<'_>, required: bool) -> Result<Option<ObstacleConfig>> {
    let inline = p.nested_f64_list("discs", 3)?;
    let file = p.path("obstacles")?;
    let config = match (inline, file) {
        (Some(_), Some(_)) => return Err(p.err("obstacles", "give either `discs` or `obstacles`, not both")),
        (Some(rows), None) => {
            let triples: Vec<[f64; 3]> = rows.iter().map(|r| [r[0], r[1], r[2]]).collect();
            ObstacleConfig::from_triples(&triples).map_err(|e| p.err("discs", e.to_string()))?
        }
        (None, Some(path)) => ObstacleConfig::load(&path).map_err(|e| match e {
            GeometryError::Io(io) => RunError::io(&path, io),
            other => p.err("obstacles", format!("{}: {other}", path.display())),
        })?,
        (None, None) if required => ObstacleConfig::triangle(6.0, 1.0).expect("valid default"),
        (None, None) => return Ok(None),
    };
    Ok(Some(config))
}

fn nonempty<T>(p: &Params<'_>, key: &str, v: Vec<T>) -> Result<Vec<T>> {
    if v.is_empty() {
        Err(p.err(key, "must not be empty"))
    } else {
        Ok(v)
    }
}

impl Plan {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let p = cfg.params();
        let plan = match cfg.kind {
            ExperimentKind::GeometryCheck => Plan::Geometry {
                config: obstacles(&p, true)?.expect("required"),
            },
            ExperimentKind::Orbit => {
                let config = obstacles(&p, true)?.expect("required");
                let words = match p.nested_usize_list("words")? {
                    Some(w) => w,
                    None => (0..config.len())
                        .flat_map(|i| (i + 1..config.len()).map(move |j| vec![i, j]))
                        .collect(),
                };
                for w in &words {
                    if w.len() < 2 || w.iter().any(|&j| j >= config.len()) {
                        return Err(p.err("words", format!("invalid word {w:?}")));
                    }
                }
                let d = OrbitOptions::default();
                let opts = OrbitOptions {
                    max_iterations: p.usize_min("max_iterations", d.max_iterations, 1)?,
                    reflection_tol: p.positive_or("reflection_tol", d.reflection_tol)?,
                    grid_points: p.usize_min("grid_points", d.grid_points, 4)?,
                    grid_sweeps: p.usize_min("grid_sweeps", d.grid_sweeps, 1)?,
                };
                Plan::Orbit { config, words, opts }
            }
            ExperimentKind::TrappedSet => {
                let config = obstacles(&p, true)?.expect("required");
                let depth = p.usize_or("depth", 6)?;
                if depth > 16 {
                    return Err(p.err("depth", "must be at most 16"));
                }
                let min_depth = p.usize_or("min_depth", 2)?.min(depth);
                let d = CoverOptions::default();
                let opts = CoverOptions {
                    samples: p.usize_min("samples", d.samples, 1)?,
                    inflate: p.positive_or("inflate", d.inflate)?,
                    sweeps: p.usize_min("sweeps", d.sweeps, 1)?,
                };
                Plan::TrappedSet {
                    config,
                    depth: depth as u32,
                    min_depth: min_depth as u32,
                    opts,
                }
            }
            ExperimentKind::Quantize => {
                let symbol = p.choice("symbol", "harper", &SYMBOL_NAMES)?;
                let ns = nonempty(&p, "ns", p.usize_list_or("ns", &[32, 64, 128, 256])?)?;
                if ns.contains(&0) {
                    return Err(p.err("ns", "dimensions must be positive"));
                }
                Plan::Quantize {
                    symbol,
                    ns,
                    write_operators: p.bool_or("write_operators", false)?,
                }
            }
            ExperimentKind::GapScan => Plan::GapScan {
                map: MapFamily::from_params(&p)?,
                ns: p.usize_list_or("ns", &[27, 81, 243])?,
                delta: p.positive_or("delta", 1.0)?,
            },
            ExperimentKind::ResolventScan => {
                let map = MapFamily::from_params(&p)?;
                let ns = p.usize_list_or("ns", &[27, 81, 243])?;
                let delta = p.positive_or("delta", 1.0)?;
                let gamma = p.opt_f64("gamma")?;
                let h0 = p.positive_or("h0", h_of(243))?;
                let return_time = p.positive_or("return_time", 1.0)?;
                let re_min = p.f64_or("re_min", 0.0)?;
                let re_max = p.f64_or("re_max", TAU)?;
                let re_steps = p.usize_min("re_steps", 16, 1)?;
                if re_max < re_min {
                    return Err(p.err("re_max", "must not be below re_min"));
                }
                let ims = p.f64_list_or("im", &[0.0])?;
                let mut zs = Vec::with_capacity(re_steps * ims.len());
                for &im in &ims {
                    for s in 0..re_steps {
                        let re = if re_steps == 1 {
                            re_min
                        } else {
                            re_min + (re_max - re_min) * s as f64 / (re_steps - 1) as f64
                        };
                        zs.push(Complex64::new(re, im));
                    }
                }
                Plan::ResolventScan {
                    map,
                    ns,
                    delta,
                    gamma,
                    h0,
                    return_time,
                    zs,
                }
            }
            ExperimentKind::Spectrum => Plan::Spectrum {
                map: MapFamily::from_params(&p)?,
                n: p.usize_min("n", 243, 1)?,
                cap: p.usize_min("cap", SPECTRUM_CAP, 1)?,
            },
            ExperimentKind::Wave => {
                let d = WaveGridSpec::default();
                let spec = WaveGridSpec {
                    extent: p.positive_or("extent", d.extent)?,
                    nx: p.usize_min("nx", d.nx, 8)?,
                    courant: p.positive_or("courant", d.courant)?,
                    absorber_width: p.usize_or("absorber_width", d.absorber_width)?,
                    absorber_strength: p.f64_or("absorber_strength", d.absorber_strength)?,
                    absorber_power: p.usize_min("absorber_power", d.absorber_power as usize, 1)? as i32,
                };
                let pulse = match p.choice("pulse", "velocity", &["velocity", "displacement"])?.as_str() {
                    "velocity" => PulseKind::Velocity,
                    _ => PulseKind::Displacement,
                };
                let c = p.f64_list_or("center", &[0.0, 0.0])?;
                if c.len() != 2 {
                    return Err(p.err("center", "expected [x, y]"));
                }
                Plan::Wave {
                    spec,
                    obstacles: obstacles(&p, false)?,
                    pulse,
                    width: p.positive_or("width", 1.5)?,
                    center: Vec2::new(c[0], c[1]),
                    fdtd: FdtdOptions {
                        t_final: p.positive_or("t_final", 100.0)?,
                        r: p.positive_or("r", 10.0)?,
                        stride: p.usize_min("stride", 10, 1)?,
                    },
                }
            }
            ExperimentKind::ContourTest => {
                let ks = p.usize_list_or("ks", &[2])?;
                if ks.iter().any(|&k| !(2..=16).contains(&k)) {
                    return Err(p.err("ks", "each k must lie in 2..=16"));
                }
                let ts = p.f64_list_or("ts", &[0.0, 1.0, 5.0])?;
                if ts.iter().any(|&t| t < 0.0) {
                    return Err(p.err("ts", "times must be nonnegative"));
                }
                let mut opts = DeformedOptions::default();
                opts.contour.tol = p.positive_or("tol", opts.contour.tol)?;
                opts.eps = p.opt_f64("eps")?;
                if opts.eps.is_some_and(|e| e <= 0.0) {
                    return Err(p.err("eps", "must be positive"));
                }
                Plan::ContourTest {
                    dim: p.usize_min("dim", 6, 1)?,
                    matrices: p.usize_min("matrices", 3, 1)?,
                    ks: ks.into_iter().map(|k| k as u32).collect(),
                    ts,
                    delta: p.positive_or("delta", 0.3)?,
                    margin: p.positive_or("margin", 0.5)?,
                    opts,
                }
            }
        };
        p.finish()?;
        Ok(plan)
    }

    pub fn execute(&self, cfg: &ExperimentConfig, plot: bool) -> Result<Outcome> {
        let mut out = Outcome::default();
        match self {
            Plan::Geometry { config } => geometry(config, &mut out)?,
            Plan::Orbit { config, words, opts } => orbits(config, words, opts, plot, &mut out)?,
            Plan::TrappedSet {
                config,
                depth,
                min_depth,
                opts,
            } => trapped(config, *depth, *min_depth, opts, plot, &mut out)?,
            Plan::Quantize {
                symbol,
                ns,
                write_operators,
            } => quantize(symbol, ns, *write_operators, plot, &mut out)?,
            Plan::GapScan { map, ns, delta } => gap_scan(*map, ns, *delta, plot, &mut out)?,
            Plan::ResolventScan {
                map,
                ns,
                delta,
                gamma,
                h0,
                return_time,
                zs,
            } => {
                let gamma = match gamma {
                    Some(g) => {
                        out.summary.insert("gamma_source".into(), json!("config"));
                        *g
                    }
                    None => {
                        let report = power_norm_scan(|n| map.build(n), *delta, ns)
                            .map_err(|e| RunError::numeric(format!("fitting gamma for the {}", map.name()), e))?;
                        out.summary.insert("gamma_source".into(), json!("fitted"));
                        report
                            .fitted_gamma
                            .ok_or_else(|| RunError::numeric("fitting gamma", "no usable scan point"))?
                    }
                };
                let opts = ResolventScanOptions {
                    delta: *delta,
                    gamma,
                    h0: *h0,
                    return_time: *return_time,
                };
                resolvent(*map, ns, &opts, zs, plot, &mut out)?
            }
            Plan::Spectrum { map, n, cap } => spectrum_run(*map, *n, *cap, plot, &mut out)?,
            Plan::Wave {
                spec,
                obstacles,
                pulse,
                width,
                center,
                fdtd,
            } => wave(spec, obstacles.as_ref(), *pulse, *width, *center, fdtd, plot, &mut out)?,
            Plan::ContourTest {
                dim,
                matrices,
                ks,
                ts,
                delta,
                margin,
                opts,
            } => contour(cfg.seed, *dim, *matrices, ks, ts, *delta, *margin, opts, plot, &mut out)?,
        }
        Ok(out)
    }
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn csv_artifact(name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<Artifact> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_io = |e: csv::Error| RunError::io(name, std::io::Error::other(e));
    w.write_record(header).map_err(to_io)?;
    for r in rows {
        w.write_record(&r).map_err(to_io)?;
    }
    let bytes = w.into_inner().map_err(|e| RunError::io(name, std::io::Error::other(e.to_string())))?;
    Ok(Artifact {
        name: name.to_string(),
        bytes,
    })
}

fn svg_artifact(name: &str, plot: &Plot) -> Artifact {
    Artifact {
        name: name.to_string(),
        bytes: plot.render().into_bytes(),
    }
}

fn circle(center: Vec2, r: f64) -> Vec<(f64, f64)> {
    (0..=96)
        .map(|k| {
            let a = TAU * k as f64 / 96.0;
            (center.x + r * a.cos(), center.y + r * a.sin())
        })
        .collect()
}

fn geometry(config: &ObstacleConfig, out: &mut Outcome) -> Result<()> {
    let ctx = |e: GeometryError| RunError::numeric("geometry check", e);
    let disjoint = check_disjoint(config).map_err(ctx)?;
    let no_eclipse = if disjoint { Some(check_no_eclipse(config).map_err(ctx)?) } else { None };
    let obs = config.obstacles();
    let mut rows = Vec::new();
    for (j, o) in obs.iter().enumerate() {
        let gap = obs
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .map(|(_, p)| (p.center - o.center).norm() - p.radius - o.radius)
            .fold(f64::INFINITY, f64::min);
        let mut hull = f64::INFINITY;
        for (k, a) in obs.iter().enumerate() {
            for (l, b) in obs.iter().enumerate().skip(k + 1) {
                if k != j && l != j && disjoint {
                    hull = hull.min(distance_to_hull(o.center, a, b) - o.radius);
                }
            }
        }
        rows.push(vec![
            j.to_string(),
            num(o.center.x),
            num(o.center.y),
            num(o.radius),
            num(gap),
            if hull.is_finite() { num(hull) } else { String::new() },
        ]);
    }
    out.files.push(csv_artifact(
        "geometry.csv",
        &["j", "cx", "cy", "r", "min_gap", "hull_margin"],
        rows,
    )?);
    out.summary.insert("obstacles".into(), json!(obs.len()));
    out.summary.insert("disjoint".into(), json!(disjoint));
    out.summary.insert("no_eclipse".into(), json!(no_eclipse));
    Ok(())
}

fn word_label(w: &[usize]) -> String {
    w.iter().map(usize::to_string).collect::<Vec<_>>().join("-")
}

fn orbits(config: &ObstacleConfig, words: &[Vec<usize>], opts: &OrbitOptions, plot: bool, out: &mut Outcome) -> Result<()> {
    let billiard = Billiard::new(config);
    let mut rows = Vec::new();
    let mut fig = Plot::new("Periodic orbits", "x", "y");
    fig.equal_aspect = true;
    for (j, o) in config.obstacles().iter().enumerate() {
        fig.series.push(Series::line(format!("obstacle {j}"), circle(o.center, o.radius)));
    }
    for w in words {
        let orbit = find_periodic_orbit(config, w, opts)
            .map_err(|e| RunError::numeric(format!("orbit {}", word_label(w)), e))?;
        let m = orbit.monodromy_matrix();
        let mu = orbit.multipliers().map_or(f64::NAN, |(a, _)| a);
        rows.push(vec![
            word_label(w),
            orbit.period().to_string(),
            num(orbit.length),
            num(m[(0, 0)]),
            num(m[(0, 1)]),
            num(m[(1, 0)]),
            num(m[(1, 1)]),
            num(m.determinant()),
            num(mu),
            num(orbit.lyapunov()),
            num(orbit.reflection_residual),
        ]);
        if plot {
            let mut pts = Vec::new();
            for p in orbit.points.iter().chain(orbit.points.first()) {
                let (x, _) = billiard
                    .lift(*p)
                    .map_err(|e| RunError::numeric(format!("orbit {}", word_label(w)), e))?;
                pts.push((x.x, x.y));
            }
            fig.series.push(Series::line(format!("word {}", word_label(w)), pts));
        }
    }
    out.files.push(csv_artifact(
        "orbits.csv",
        &["word", "period", "length", "m11", "m12", "m21", "m22", "det", "mu", "lyapunov", "reflection_residual"],
        rows,
    )?);
    out.summary.insert("orbits".into(), json!(words.len()));
    if plot {
        out.plots.push(svg_artifact("orbits.svg", &fig));
    }
    Ok(())
}

fn trapped(
    config: &ObstacleConfig,
    depth: u32,
    min_depth: u32,
    opts: &CoverOptions,
    plot: bool,
    out: &mut Outcome,
) -> Result<()> {
    let covers = trapped_set_covers(config, depth, opts);
    let last = covers.last().expect("level 0 present");
    let levels = covers
        .iter()
        .map(|c| vec![c.depth.to_string(), c.box_count().to_string(), num(c.total_area)])
        .collect();
    out.files
        .push(csv_artifact("cover_levels.csv", &["depth", "boxes", "total_area"], levels)?);
    let mut rows = Vec::new();
    let mut offsets = vec![0.0];
    for o in config.obstacles() {
        offsets.push(offsets.last().unwrap() + o.perimeter());
    }
    let mut fig = Plot::new(format!("Trapped set cover, depth {depth}"), "s (obstacles side by side)", "eta");
    for b in &last.boxes {
        let ([s0, s1], [e0, e1]) = last.rect(b);
        rows.push(vec![
            last.depth.to_string(),
            b.obstacle.to_string(),
            num(s0),
            num(s1),
            num(e0),
            num(e1),
        ]);
        let off = offsets[b.obstacle];
        fig.rects.push(Rect {
            x: [off + s0, off + s1],
            y: [e0, e1],
            group: b.obstacle,
        });
    }
    out.files.push(csv_artifact(
        "cover.csv",
        &["depth", "obstacle", "s_lo", "s_hi", "eta_lo", "eta_hi"],
        rows,
    )?);
    out.summary.insert("boxes".into(), json!(last.box_count()));
    out.summary.insert("total_area".into(), json!(last.total_area));
    out.summary
        .insert("box_dimension".into(), json!(cover_dimension(&covers, min_depth)));
    if plot {
        out.plots.push(svg_artifact("cover.svg", &fig));
    }
    Ok(())
}

fn sup_abs(f: fn(f64, f64) -> f64) -> f64 {
    const M: usize = 1024;
    let mut best = 0.0f64;
    for i in 0..M {
        for j in 0..M {
            best = best.max(f(i as f64 / M as f64, j as f64 / M as f64).abs());
        }
    }
    best
}

fn quantize(symbol: &str, ns: &[usize], write_operators: bool, plot: bool, out: &mut Outcome) -> Result<()> {
    let f = named_symbol(symbol).expect("validated");
    let sup = sup_abs(f);
    let mut rows = Vec::new();
    let mut pts = Vec::new();
    for &n in ns {
        let op = quantize_weyl(&SymbolGrid::from_real_fn(n, f), n)
            .map_err(|e| RunError::numeric(format!("quantizing at N = {n}"), e))?;
        let norm = op.norm();
        rows.push(vec![n.to_string(), num(op.h()), num(norm), num(sup), num(norm - sup)]);
        pts.push((op.h(), (norm - sup).abs()));
        if write_operators {
            let mut bytes = Vec::new();
            write_operator(&op, &mut bytes).map_err(|e| RunError::numeric("encoding operator", e))?;
            out.files.push(Artifact {
                name: format!("operator_{n}.topr"),
                bytes,
            });
        }
    }
    out.files
        .insert(0, csv_artifact("quantize.csv", &["N", "h", "op_norm", "sup_abs", "excess"], rows)?);
    let log_pts: Vec<(f64, f64)> = pts
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|&(h, d)| (h.ln(), d.ln()))
        .collect();
    out.summary.insert("symbol".into(), json!(symbol));
    out.summary
        .insert("defect_exponent".into(), json!(linear_fit(&log_pts).map(|f| f.slope)));
    if plot {
        let mut fig = Plot::new(format!("|‖Op(a)‖ - sup|a|| for {symbol}"), "h", "defect");
        fig.log_x = true;
        fig.log_y = true;
        fig.series.push(Series::line("defect", pts));
        out.plots.push(svg_artifact("quantize.svg", &fig));
    }
    Ok(())
}

fn gap_scan(map: MapFamily, ns: &[usize], delta: f64, plot: bool, out: &mut Outcome) -> Result<()> {
    let report =
        power_norm_scan(|n| map.build(n), delta, ns).map_err(|e| RunError::numeric(format!("{} gap scan", map.name()), e))?;
    let rows = report
        .entries
        .iter()
        .map(|e| {
            vec![
                e.n.to_string(),
                num(e.h),
                e.n_of_h.to_string(),
                num(e.power_norm),
                num(e.amp_sup),
            ]
        })
        .collect();
    out.files.push(csv_artifact(
        "gap_report.csv",
        &["N", "h", "N_of_h", "power_norm", "amp_sup"],
        rows,
    )?);
    out.summary.insert("fitted_gamma".into(), json!(report.fitted_gamma));
    out.summary
        .insert("gamma_with_prefactor".into(), json!(report.gamma_with_prefactor));
    if plot {
        let mut fig = Plot::new("‖M^N(h)‖ against h", "h", "norm");
        fig.log_x = true;
        fig.log_y = true;
        fig.series.push(Series::line(
            "power norm",
            report.entries.iter().map(|e| (e.h, e.power_norm)).collect(),
        ));
        fig.series.push(Series::line(
            "amp_sup^N(h)",
            report
                .entries
                .iter()
                .map(|e| (e.h, e.amp_sup.powi(e.n_of_h as i32)))
                .collect(),
        ));
        out.plots.push(svg_artifact("gap_report.svg", &fig));
    }
    Ok(())
}

fn resolvent(
    map: MapFamily,
    ns: &[usize],
    opts: &ResolventScanOptions,
    zs: &[Complex64],
    plot: bool,
    out: &mut Outcome,
) -> Result<()> {
    let report = resolvent_norm_scan(|n| map.build(n), opts, ns, zs)
        .map_err(|e| RunError::numeric(format!("{} resolvent scan", map.name()), e))?;
    let rows = report
        .entries
        .iter()
        .map(|e| {
            vec![
                e.n.to_string(),
                num(e.h),
                num(e.z.re),
                num(e.z.im),
                num(e.norm),
                num(e.bound),
                e.hypothesis_ok.to_string(),
            ]
        })
        .collect();
    out.files.push(csv_artifact(
        "resolvent_report.csv",
        &["N", "h", "re_z", "im_z", "norm", "bound", "hypothesis_ok"],
        rows,
    )?);
    out.summary.insert("gamma".into(), json!(opts.gamma));
    out.summary.insert("h0".into(), json!(opts.h0));
    out.summary.insert(
        "hypothesis_points".into(),
        json!(report.entries.iter().filter(|e| e.hypothesis_ok).count()),
    );
    out.summary
        .insert("violations".into(), json!(report.violations().len()));
    if plot {
        let mut fig = Plot::new("‖(I - M_z)^-1‖ against the bound", "Re z", "norm");
        fig.log_y = true;
        for &n in ns {
            let pick = |f: fn(&crate::gap_lab::ResolventEntry) -> f64| -> Vec<(f64, f64)> {
                report
                    .entries
                    .iter()
                    .filter(|e| e.n == n && e.z.im == zs[0].im)
                    .map(|e| (e.z.re, f(e)))
                    .collect()
            };
            fig.series.push(Series::line(format!("N = {n}"), pick(|e| e.norm)));
            fig.series.push(Series::markers(format!("bound N = {n}"), pick(|e| e.bound)));
        }
        out.plots.push(svg_artifact("resolvent_report.svg", &fig));
    }
    Ok(())
}

fn spectrum_run(map: MapFamily, n: usize, cap: usize, plot: bool, out: &mut Outcome) -> Result<()> {
    let ctx = |e: &dyn std::fmt::Display| RunError::numeric(format!("{} spectrum at N = {n}", map.name()), e);
    let m = map.build(n).map_err(|e| ctx(&e))?;
    let ev = spectrum(&m, cap).map_err(|e| ctx(&e))?;
    let rows = ev.iter().map(|z| vec![num(z.re), num(z.im)]).collect();
    out.files.push(csv_artifact("spectrum.csv", &["re", "im"], rows)?);
    let radius = ev.first().map_or(0.0, |z| z.norm());
    out.summary.insert("n".into(), json!(n));
    out.summary.insert("spectral_radius".into(), json!(radius));
    if plot {
        let mut fig = Plot::new(format!("Spectrum of the {}, N = {n}", map.name()), "Re", "Im");
        fig.equal_aspect = true;
        fig.series.push(Series::line("unit circle", circle(Vec2::new(0.0, 0.0), 1.0)));
        fig.series
            .push(Series::markers("eigenvalues", ev.iter().map(|z| (z.re, z.im)).collect()));
        out.plots.push(svg_artifact("spectrum.svg", &fig));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn wave(
    spec: &WaveGridSpec,
    obstacles: Option<&ObstacleConfig>,
    pulse: PulseKind,
    width: f64,
    center: Vec2,
    fdtd: &FdtdOptions,
    plot: bool,
    out: &mut Outcome,
) -> Result<()> {
    let ctx = |e: crate::wave_decay::WaveError| RunError::numeric("wave simulation", e);
    let grid = WaveGrid::new(spec, obstacles).map_err(ctx)?;
    let data = WaveState::pulse(&grid, center, width, pulse);
    let trace = fdtd_run(&grid, &data, fdtd).map_err(ctx)?;
    let rows = trace
        .samples
        .iter()
        .map(|s| vec![num(s.t), num(s.e_r), num(s.e_total)])
        .collect();
    out.files
        .push(csv_artifact("energy_trace.csv", &["t", "E_R", "E_total"], rows)?);
    out.summary.insert("fitted_slope".into(), json!(trace.fitted_slope));
    out.summary
        .insert("absorber_arrival".into(), json!(trace.absorber_arrival));
    out.summary.insert("dx".into(), json!(grid.dx));
    if plot {
        let mut fig = Plot::new(format!("Local energy in B(0, {})", fdtd.r), "t", "E_R");
        fig.log_x = true;
        fig.log_y = true;
        fig.series.push(Series::line(
            "E_R",
            trace.samples.iter().filter(|s| s.t > 0.0).map(|s| (s.t, s.e_r)).collect(),
        ));
        out.plots.push(svg_artifact("energy_trace.svg", &fig));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn contour(
    seed: u64,
    dim: usize,
    matrices: usize,
    ks: &[u32],
    ts: &[f64],
    delta: f64,
    margin: f64,
    opts: &DeformedOptions,
    plot: bool,
    out: &mut Outcome,
) -> Result<()> {
    let u = CVec::from_fn(dim, |i, _| Complex64::new(1.0 / (1.0 + i as f64), 0.0));
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    let mut fig = Plot::new("Contour integral norms", "t", "‖value‖");
    fig.log_y = true;
    for m in 0..matrices {
        let a = random_dissipative(dim, margin, seed.wrapping_add(m as u64));
        for &k in ks {
            let mut pts = Vec::new();
            for &t in ts {
                let check = deformed_contour_check(&a, k, t, &u, delta, opts)
                    .map_err(|e| RunError::numeric(format!("matrix {m}, k = {k}, t = {t}"), e))?;
                worst = worst.max(check.max_difference);
                let norm = check.value.norm();
                pts.push((t, norm));
                rows.push(vec![
                    m.to_string(),
                    k.to_string(),
                    num(t),
                    num(norm),
                    num(check.max_difference),
                ]);
            }
            fig.series.push(Series::line(format!("matrix {m}, k = {k}"), pts));
        }
    }
    out.files.push(csv_artifact(
        "contour_check.csv",
        &["matrix", "k", "t", "value_norm", "difference"],
        rows,
    )?);
    out.summary.insert("max_difference".into(), json!(worst));
    out.summary
        .insert("hermitian_part_bound".into(), json!(-margin));
    if plot {
        out.plots.push(svg_artifact("contour_check.svg", &fig));
    }
    Ok(())
}
