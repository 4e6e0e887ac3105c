use std::io::Write;
use std::sync::Arc;

use qwcat::category::{self, Decomposition, ModelWalk, VerifyConfig};
use qwcat::dynamics::{
    characteristic_function, moments, periodic_evolve, position_distribution, velocity_distribution, PeriodicSchedule,
    StateVector,
};
use qwcat::spectral;
use qwcat::symbol::VALIDATION_GRID;
use qwcat::{ctqw, registry, QwError, WalkDefinition};
use serde_json::{json, Value};

use crate::report::Report;
use crate::{load_state, load_walk, Cli, Format, RunConfig, EXIT_ERROR, EXIT_NEGATIVE};

type Result<T> = std::result::Result<T, QwError>;

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub struct CommandOutput {
    pub report: Report,
    pub table: Option<Table>,
    pub summary: Vec<String>,
    /// The answer is "no" (no intertwiner, not realizable).
    pub negative: bool,
}

/// Runs the parsed command and returns the process exit status.
pub fn run(cli: &Cli) -> u8 {
    let cfg = RunConfig::from_cli(cli);
    match execute(&cfg).and_then(|out| deliver(&cfg, &out).map(|_| out.negative)) {
        Ok(false) => 0,
        Ok(true) => EXIT_NEGATIVE,
        Err(e) => {
            eprintln!("qwcat {}: {e}", cfg.command);
            EXIT_ERROR
        }
    }
}

pub fn execute(cfg: &RunConfig) -> Result<CommandOutput> {
    match cfg.command.as_str() {
        "validate" => validate(cfg),
        "simulate" => simulate(cfg),
        "velocity" => velocity(cfg),
        "charfn" => charfn(cfg),
        "spectrum" => spectrum(cfg),
        "limit" => limit(cfg),
        "decompose" => decompose(cfg),
        "intertwine" => intertwine(cfg),
        "ctqw" => ctqw_command(cfg),
        "examples" => examples(cfg),
        other => Err(QwError::InvalidArgument(format!("unknown command {other}"))),
    }
}

fn deliver(cfg: &RunConfig, out: &CommandOutput) -> Result<()> {
    let body = match cfg.format {
        Format::Json => out.report.to_json(),
        Format::Csv => {
            let table = out.table.as_ref().ok_or_else(|| {
                QwError::InvalidArgument(format!("{} has no tabular output; use --format json", cfg.command))
            })?;
            render_csv(table)?
        }
    };
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, body)?;
            let mut stdout = std::io::stdout().lock();
            for line in &out.summary {
                writeln!(stdout, "{line}")?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(body.as_bytes()).and_then(|_| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(())
}

fn render_csv(table: &Table) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| QwError::Io(std::io::Error::other(e));
    w.write_record(&table.header).map_err(io)?;
    for row in &table.rows {
        w.write_record(row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| QwError::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn walks(cfg: &RunConfig) -> Result<Vec<WalkDefinition>> {
    cfg.inputs.iter().map(|s| load_walk(s)).collect()
}

fn one_walk(cfg: &RunConfig) -> Result<WalkDefinition> {
    load_walk(&cfg.inputs[0])
}

fn complex(z: num_complex::Complex64) -> Value {
    json!([z.re, z.im])
}

fn validate(cfg: &RunConfig) -> Result<CommandOutput> {
    let w = one_walk(cfg)?;
    let (defect, at) = w.unitarity_defect(VALIDATION_GRID);
    let result = json!({
        "name": w.name(),
        "d": w.dim(),
        "n": w.degree(),
        "propagation_radius": w.propagation_radius(),
        "regularity": w.classify_regularity(),
        "unitarity_defect": defect,
        "worst_k": at,
    });
    let summary = vec![format!(
        "{}: d = {}, n = {}, radius {}, unitarity defect {defect:.3e}",
        w.name(),
        w.dim(),
        w.degree(),
        w.propagation_radius()
    )];
    Ok(CommandOutput {
        report: Report::new(
            cfg,
            result,
            &[
                ("unitarity_defect", "max Frobenius norm of U(k)U(k)* - I over a uniform k-grid"),
                ("propagation_radius", "largest |shift| among symbol terms"),
            ],
        ),
        table: None,
        summary,
        negative: false,
    })
}

/// Evolved state for the simulation-type commands.
fn evolved(cfg: &RunConfig) -> Result<(WalkDefinition, StateVector, u64)> {
    let ws = walks(cfg)?;
    let first = ws[0].clone();
    let t = cfg.t.unwrap_or(100);
    if let Some(window) = cfg.window {
        let need = 2 * ws.iter().map(|w| w.propagation_radius()).max().unwrap_or(0) * t;
        if (window as u64) < need {
            return Err(QwError::WindowTooSmall {
                window,
                reason: format!("simulation to t = {t} needs at least {need} sites"),
            });
        }
    }
    let xi = load_state(cfg.init.as_deref(), first.dim(), first.degree())?;
    let out = periodic_evolve(&PeriodicSchedule::new(ws)?, &xi, t)?;
    Ok((first, out, t))
}

fn simulate(cfg: &RunConfig) -> Result<CommandOutput> {
    let (w, state, t) = evolved(cfg)?;
    let mu = position_distribution(&state.clone().normalized())?;
    let rows = mu
        .masses
        .iter()
        .map(|(x, m)| x.iter().map(|v| v.to_string()).chain([m.to_string()]).collect())
        .collect();
    let header = position_header(w.dim(), "x", "mass");
    let result = json!({
        "t": t,
        "norm": state.norm(),
        "support": state.support_bounds(),
        "positions": mu.masses.iter().map(|(x, m)| json!({"site": x, "mass": m})).collect::<Vec<_>>(),
        "state": state.to_document(),
    });
    Ok(CommandOutput {
        report: Report::new(
            cfg,
            result,
            &[
                ("state", "exact sparse convolution of the walk coefficients, t steps"),
                ("positions", "sum over internal components of |amplitude|^2"),
            ],
        ),
        table: Some(Table { header, rows }),
        summary: vec![format!("t = {t}, norm {:.15}", state.norm())],
        negative: false,
    })
}

fn position_header(d: usize, axis: &'static str, value: &'static str) -> Vec<&'static str> {
    const X: [&str; 3] = ["x", "y", "z"];
    const V: [&str; 3] = ["vx", "vy", "vz"];
    let names = if axis == "x" { &X } else { &V };
    let mut h: Vec<&'static str> = if d == 1 { vec![if axis == "x" { "x" } else { "v" }] } else { names[..d.min(3)].to_vec() };
    h.push(value);
    h
}

fn velocity(cfg: &RunConfig) -> Result<CommandOutput> {
    let (w, state, t) = evolved(cfg)?;
    let nu = velocity_distribution(&state, t.max(1))?;
    let m = moments(&nu, 4)?;
    let rows = nu
        .atoms
        .iter()
        .map(|(v, m)| v.iter().map(|x| x.to_string()).chain([m.to_string()]).collect())
        .collect();
    let result = json!({
        "t": t,
        "atoms": nu.atoms,
        "moments": m,
    });
    Ok(CommandOutput {
        report: Report::new(
            cfg,
            result,
            &[
                ("atoms", "position distribution of U^t xi rescaled by 1/t"),
                ("moments", "raw and central moments of the atoms"),
            ],
        ),
        table: Some(Table {
            header: position_header(w.dim(), "v", "mass"),
            rows,
        }),
        summary: vec![format!("t = {t}, {} atoms, mean {:?}", nu.atoms.len(), m.mean)],
        negative: false,
    })
}

fn parse_kgrid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || QwError::InvalidArgument(format!("--kgrid expects start:end:count, got {text}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let m: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if m == 0 {
        return Err(bad());
    }
    if m == 1 {
        return Ok(vec![a]);
    }
    Ok((0..m).map(|i| a + (b - a) * i as f64 / (m - 1) as f64).collect())
}

fn charfn(cfg: &RunConfig) -> Result<CommandOutput> {
    let ks = parse_kgrid(cfg.kgrid.as_deref().unwrap_or("-3:3:16"))?;
    let (w, state, t) = evolved(cfg)?;
    let nu = velocity_distribution(&state, t.max(1))?;
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for &k in &ks {
        let mut kv = vec![0.0; w.dim()];
        kv[0] = k;
        let phi = characteristic_function(&nu, &kv);
        rows.push(vec![k.to_string(), phi.re.to_string(), phi.im.to_string(), phi.norm().to_string()]);
        values.push(json!({"k": k, "value": complex(phi)}));
    }
    Ok(CommandOutput {
        report: Report::new(
            cfg,
            json!({"t": t, "values": values}),
            &[("values", "sum over velocity atoms of mass * exp(i k v), k along the first axis")],
        ),
        table: Some(Table {
            header: vec!["k", "re", "im", "abs"],
            rows,
        }),
        summary: vec![format!("t = {t}, {} k-points", ks.len())],
        negative: false,
    })
}

fn branch_json(b: usize, f: &spectral::EigenvalueFunction) -> Value {
    json!({
        "branch": b,
        "period": f.period(),
        "minimal_period": f.minimal_period(),
        "winding": f.winding(),
        "constant": f.is_constant(),
        "closure_defect": f.closure_defect(),
        "samples": f.samples().iter().map(|z| complex(*z)).collect::<Vec<_>>(),
    })
}

fn spectrum(cfg: &RunConfig) -> Result<CommandOutput> {
    let w = one_walk(cfg)?;
    let s = spectral::track_branches(&w, cfg.grid_size()?)?;
    let (eigen_residual, orthonormality) = s.section_residuals();
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for (b, f) in s.branches().iter().enumerate() {
        for (i, z) in f.samples().iter().enumerate() {
            let k = f.grid_point(i);
            rows.push(vec![
                b.to_string(),
                k.to_string(),
                z.re.to_string(),
                z.im.to_string(),
                f.group_velocity(k).to_string(),
            ]);
        }
        summary.push(format!(
            "branch {b}: period {:.6}, minimal period {:.6}, winding {}{}",
            f.period(),
            f.minimal_period(),
            f.winding(),
            if f.is_constant() { ", constant" } else { "" }
        ));
    }
    let result = json!({
        "grid": s.grid_size(),
        "coverage_defect": s.coverage_defect(),
        "section_eigen_residual": eigen_residual,
        "section_orthonormality": orthonormality,
        "branches": s.branches().iter().enumerate().map(|(b, f)| branch_json(b, f)).collect::<Vec<_>>(),
    });
    Ok(CommandOutput {
        report: Report::new(
            cfg,
            result,
            &[
                ("branches.samples", "eigenvalues of U(k) continued across k by phase extrapolation and optimal assignment"),
                ("branches.period", "2π times the cycle length of the monodromy permutation"),
                ("branches.minimal_period", "period divided by the gcd of the Fourier frequencies present, checked on the grid"),
                ("branches.winding", "unwrapped phase change over one minimal period divided by 2π"),
                ("coverage_defect", "optimal-assignment mismatch between branch translates and eigenvalues of U(k)"),
            ],
        ),
        table: Some(Table {
            header: vec!["branch", "k", "re", "im", "group_velocity"],
            rows,
        }),
        summary,
        negative: false,
    })
}

fn limit(cfg: &RunConfig) -> Result<CommandOutput> {
    let w = one_walk(cfg)?;
    let xi = load_state(cfg.init.as_deref(), w.dim(), w.degree())?;
    let s = spectral::track_branches(&w, cfg.grid_size()?)?;
    let mu = s.limit_distribution(&xi)?;
    let mass: f64 = mu.atoms.iter().map(|(_, m)| m).sum();
    let rows = mu.atoms.iter().map(|(v, m)| vec![v.to_string(), m.to_string()]).collect();
    let result = json!({
        "total_mass": mass,
        "support_radius": mu.support_radius(1e-14),
        "atoms": mu.atoms,
    });
    Ok(CommandOutput {
        report: Report::new(
            cfg,
            result,
            &[(
                "atoms",
                "group velocity of each branch sample, weighted by |<section, Fourier transform of the state>|^2 / grid",
            )],
        ),
        table: Some(Table {
            header: vec!["v", "mass"],
            rows,
        }),
        summary: vec![format!("{} atoms, total mass {mass:.12}", mu.atoms.len())],
        negative: false,
    })
}

fn part_json(i: usize, m: &ModelWalk) -> Value {
    json!({
        "part": i,
        "branch": m.branch(),
        "copy": m.copy(),
        "period": m.period(),
        "constant": m.is_constant(),
        "minimal_period": m.lambda().minimal_period(),
        "winding": m.lambda().winding(),
        "lambda_at_zero": complex(m.lambda().samples()[0]),
    })
}

fn decompose_walk(cfg: &RunConfig, w: &WalkDefinition) -> Result<Decomposition> {
    Ok(category::decompose_spectrum(Arc::new(spectral::track_branches(
        w,
        cfg.grid_size()?,
    )?)))
}

fn decompose(cfg: &RunConfig) -> Result<CommandOutput> {
    let w = one_walk(cfg)?;
    let d = decompose_walk(cfg, &w)?;
    let indecomposable = category::decomposition_is_indecomposable(&d);
    let summary = d
        .parts()
        .iter()
        .enumerate()
        .map(|(i, m)| {
            format!(
                "part {i}: branch {} copy {}, period {:.6}{}",
                m.branch(),
                m.copy(),
                m.period(),
                if m.is_constant() { ", constant" } else { "" }
            )
        })
        .chain([format!("indecomposable: {indecomposable}")])
        .collect();
    let result = json!({
        "parts": d.parts().iter().enumerate().map(|(i, m)| part_json(i, m)).collect::<Vec<_>>(),
        "indecomposable": indecomposable,
        "total_weight": d.total_weight(),
    });
    Ok(CommandOutput {
        report: Report::new(
            cfg,
            result,
            &[
                ("parts", "one model walk per eigenvalue branch, split into copies at the minimal period"),
                ("total_weight", "sum of part periods divided by 2π; equals the number of internal states"),
            ],
        ),
        table: Some(parts_table(d.parts())),
        summary,
        negative: false,
    })
}

fn parts_table(parts: &[ModelWalk]) -> Table {
    Table {
        header: vec!["part", "branch", "copy", "period", "constant", "winding"],
        rows: parts
            .iter()
            .enumerate()
            .map(|(i, m)| {
                vec![
                    i.to_string(),
                    m.branch().to_string(),
                    m.copy().to_string(),
                    m.period().to_string(),
                    m.is_constant().to_string(),
                    m.lambda().winding().to_string(),
                ]
            })
            .collect(),
    }
}

fn intertwine(cfg: &RunConfig) -> Result<CommandOutput> {
    let ws = walks(cfg)?;
    let (d1, d2) = (decompose_walk(cfg, &ws[0])?, decompose_walk(cfg, &ws[1])?);
    let report = category::uniform_intertwiners(&d1, &d2);
    let divisor = category::common_divisor_pairing(&d1, &d2);
    let similar = divisor.len() == d1.parts().len() && divisor.len() == d2.parts().len();
    let defect = if cfg.verify && report.exists {
        let vc = VerifyConfig {
            window: cfg.window.unwrap_or(256),
            states: cfg.trials.unwrap_or(20),
            seed: cfg.seed,
        };
        Some(category::verify_intertwiner(&divisor, &d1, &d2, &vc)?)
    } else {
        None
    };
    let mut summary = vec![format!("uniform intertwiner exists: {}", report.exists)];
    for p in &report.pairings {
        summary.push(format!("pair: part {} -> part {}, shift l = {}", p.left, p.right, p.shift));
    }
    if let Some(d) = defect {
        summary.push(format!("defect {d:.3e}"));
    }
    let result = json!({
        "exists": report.exists,
        "pairings": report.pairings,
        "common_divisor": divisor,
        "similar": similar,
        "defect": defect,
        "left_parts": d1.parts().iter().enumerate().map(|(i, m)| part_json(i, m)).collect::<Vec<_>>(),
        "right_parts": d2.parts().iter().enumerate().map(|(i, m)| part_json(i, m)).collect::<Vec<_>>(),
    });
    Ok(CommandOutput {
        report: Report::new(
            cfg,
            result,
            &[
                ("pairings", "part pairs whose eigenvalue functions are translates at equal minimal periods"),
                ("pairings.shift", "cross-correlation peak, golden-section and Newton refined, accepted at sup error 1e-7"),
                ("common_divisor", "maximal disjoint set of pairings"),
                ("defect", "max over seeded random states of the discrete L2 norm of (W U1 - U2 W) xi in k-space"),
            ],
        ),
        table: Some(Table {
            header: vec!["left", "right", "shift"],
            rows: report
                .pairings
                .iter()
                .map(|p| vec![p.left.to_string(), p.right.to_string(), p.shift.to_string()])
                .collect(),
        }),
        summary,
        negative: !report.exists,
    })
}

fn ctqw_command(cfg: &RunConfig) -> Result<CommandOutput> {
    let w = one_walk(cfg)?;
    let s = Arc::new(spectral::track_branches(&w, cfg.grid_size()?)?);
    let verdict = ctqw::spectrum_realizable(&s);
    let mut summary = vec![format!("realizable: {}", verdict.realizable)];
    for b in &verdict.windings {
        summary.push(format!("branch {}: winding {}", b.branch, b.winding));
    }
    let mut result = json!({
        "realizable": verdict.realizable,
        "windings": verdict.windings,
        "obstruction": verdict.obstruction,
    });
    let mut table = None;
    if cfg.build && verdict.realizable {
        let g = ctqw::generator_from_spectrum(s.clone())?;
        result["generator_residual"] = json!(g.residual());
        result["generator_endpoint_mismatch"] = json!(g.endpoint_mismatch());
        result["generator"] = json!(g.to_documents());
        let mut rows = Vec::new();
        for doc in g.to_documents() {
            let f = s.branch(doc.branch);
            for (i, h) in doc.phase_samples.iter().enumerate() {
                rows.push(vec![doc.branch.to_string(), f.grid_point(i).to_string(), h.to_string()]);
            }
        }
        table = Some(Table {
            header: vec!["branch", "k", "h"],
            rows,
        });
        if cfg.verify {
            let window = cfg.window.unwrap_or(512);
            let defect = ctqw::verify_realization(&g, &w, window, cfg.trials.unwrap_or(20), cfg.seed)?;
            result["defect"] = json!(defect);
            summary.push(format!("defect {defect:.3e} (window {window})"));
        }
    }
    Ok(CommandOutput {
        report: Report::new(
            cfg,
            result,
            &[
                ("windings", "winding number of each eigenvalue branch per minimal period"),
                ("generator", "unwrapped phase of each branch with h(0) in (-π, π]"),
                ("defect", "max over seeded random states of ||V(1) xi - U xi||, V evaluated in k-space on the window"),
            ],
        ),
        table,
        summary,
        negative: !verdict.realizable,
    })
}

fn examples(cfg: &RunConfig) -> Result<CommandOutput> {
    let list: Vec<Value> = registry::ENTRIES
        .iter()
        .map(|(name, description)| json!({"name": name, "description": description}))
        .collect();
    let mut summary: Vec<String> = registry::ENTRIES.iter().map(|(n, d)| format!("@{n}: {d}")).collect();
    if let Some(dir) = cfg.inputs.first() {
        std::fs::create_dir_all(dir)?;
        for w in registry::all_default()? {
            let path = std::path::Path::new(dir).join(format!("{}.json", file_stem(w.name())));
            std::fs::write(&path, w.to_json())?;
            summary.push(format!("wrote {}", path.display()));
        }
    }
    let rows = registry::ENTRIES
        .iter()
        .map(|(n, d)| vec![n.to_string(), d.to_string()])
        .collect();
    Ok(CommandOutput {
        report: Report::new(cfg, json!({"walks": list}), &[("walks", "built-in registry")]),
        table: Some(Table {
            header: vec!["name", "description"],
            rows,
        }),
        summary,
        negative: false,
    })
}

/// `coin(0.6)` becomes `coin-0.6`.
fn file_stem(name: &str) -> String {
    name.replace('(', "-").replace([')', ' '], "").replace(',', "-")
}
