//! Subcommand implementations; each returns the process exit code.

use std::path::Path;
use std::sync::Arc;

use conicscan::adiabatic::{
    bulk_gap_window, packet_width, spectral_flow_adaptive, wavepacket_compare, CylinderOperator,
    WavepacketConfig,
};
use conicscan::chern::{chern_number, verify_chirality_balance, ChernConfig};
use conicscan::cone::{analyze_cone, dirac_model};
use conicscan::genericity::{
    framed_bump_perturbation, remove_high_multiplicity, sard_shift_2x2, verify_all_conical, Chart,
};
use conicscan::model::{builtin, builtin_names, Axis, Family, Model};
use conicscan::scan::{scan as run_scan, ScanConfig, Verdict};
use conicscan::{Error, Result};
use serde_json::{json, Value};

use crate::report::{envelope, write_csv, write_json};
use crate::{exit_code, Common, PerturbKind, WallArgs, EXIT_NUMERIC, EXIT_PRECONDITION, EXIT_USAGE};

/// Maximum number of `xi1` doublings when eigenvalue tracking is ambiguous.
const FLOW_DOUBLINGS: usize = 3;

struct Setup {
    model: Model,
    family: Arc<dyn Family>,
    band: usize,
    scan: ScanConfig,
    echo: Value,
}

fn load_model(spec: &str) -> Result<Model> {
    match spec.strip_prefix("builtin:") {
        Some(name) => builtin(name),
        None => Model::load(Path::new(spec)),
    }
}

fn setup(c: &Common, extra: Value) -> std::result::Result<Setup, u8> {
    let fail = |e: Error| {
        eprintln!("error: {e}");
        exit_code(&e)
    };
    let model = load_model(&c.model).map_err(fail)?;
    let family = model.family();
    let band = c.band.unwrap_or_else(|| model.band_index());
    if band == 0 || band >= family.bands() {
        eprintln!("error: band {band} must lie in 1..{}", family.bands());
        return Err(EXIT_USAGE);
    }
    let mut scan = ScanConfig::default();
    if let Some(g) = c.grid {
        scan.grid = g;
    }
    if let Some(t) = c.refine_tol {
        scan.refine_tol = t;
    }
    scan.validate().map_err(fail)?;
    let mut echo = json!({
        "model": c.model,
        "model_kind": model.kind(),
        "band": band,
        "seed": c.seed,
        "scan": scan,
    });
    if let (Value::Object(dst), Value::Object(src)) = (&mut echo, extra) {
        dst.extend(src);
    }
    Ok(Setup {
        model,
        family,
        band,
        scan,
        echo,
    })
}

/// Writes the report and maps the outcome to an exit code.
fn conclude(c: &Common, command: &str, file: &str, echo: &Value, outcome: Result<(Value, u8)>) -> u8 {
    let (doc, code) = match &outcome {
        Ok((v, code)) => (envelope(command, echo, Ok(v.clone())), *code),
        Err(e) => {
            eprintln!("error: {e}");
            (envelope(command, echo, Err(e)), exit_code(e))
        }
    };
    if let Err(io) = write_json(&c.out, file, &doc) {
        return io;
    }
    println!("wrote {}", c.out.join(file).display());
    code
}

pub fn scan(c: &Common) -> u8 {
    let s = match setup(c, json!({})) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let outcome = run_scan(&*s.family, s.band, &s.scan).map(|pts| {
        let conical = pts.iter().filter(|p| p.verdict == Verdict::Conical).count();
        println!("{} crossings, {conical} conical", pts.len());
        (json!({ "count": pts.len(), "conical": conical, "points": pts }), 0)
    });
    conclude(c, "scan", "degeneracies.json", &s.echo, outcome)
}

pub fn classify(c: &Common) -> u8 {
    let s = match setup(c, json!({})) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let outcome = (|| {
        let pts = run_scan(&*s.family, s.band, &s.scan)?;
        let mut entries = Vec::new();
        for p in &pts {
            let cone = if p.verdict == Verdict::Conical {
                Some(analyze_cone(&*s.family, p)?)
            } else {
                None
            };
            let dirac = cone.as_ref().map(dirac_model);
            entries.push(json!({ "point": p, "cone": cone, "dirac": dirac }));
        }
        let chirality_sum: i64 = entries
            .iter()
            .filter_map(|e| e["cone"]["chirality"].as_i64())
            .sum();
        println!("{} crossings, chirality sum {chirality_sum}", pts.len());
        Ok((json!({ "count": pts.len(), "chirality_sum": chirality_sum, "crossings": entries }), 0))
    })();
    conclude(c, "classify", "cones.json", &s.echo, outcome)
}

pub fn chern(c: &Common, slices: &[f64]) -> u8 {
    let cfg = ChernConfig::default();
    let s = match setup(c, json!({ "chern": cfg, "slices": slices })) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let slices: Vec<f64> = if slices.is_empty() {
        match s.family.domain().axes[0] {
            Axis::Interval { lo, hi } => vec![lo, hi],
            Axis::Periodic => vec![0.0],
        }
    } else {
        slices.to_vec()
    };
    let outcome = slices
        .iter()
        .map(|&x| chern_number(&*s.family, x, s.band, &cfg))
        .collect::<Result<Vec<_>>>()
        .map(|est| {
            for e in &est {
                println!("s = {}: c1 = {} (grid {})", e.s, e.value, e.grid);
            }
            (json!({ "slices": est }), 0)
        });
    conclude(c, "chern", "chern.json", &s.echo, outcome)
}

pub fn verify(c: &Common, wall: &WallArgs, no_flow: bool) -> u8 {
    let cfg = ChernConfig::default();
    let s = match setup(c, json!({ "chern": cfg, "wall": wall_echo(wall), "flow": !no_flow })) {
        Ok(s) => s,
        Err(code) => return code,
    };
    if !matches!(s.family.domain().axes[0], Axis::Interval { .. }) {
        eprintln!("error: the chirality balance needs a homotopy (interval first axis)");
        return EXIT_USAGE;
    }
    let outcome = (|| {
        let (cones, report) = match verify_chirality_balance(&*s.family, s.band, &s.scan, &cfg) {
            Err(Error::NotConical { point, detail }) => {
                eprintln!(
                    "error: non-conical crossings present at {point:?} ({detail}); \
                     the chirality balance requires every crossing to be conical, perturb the model first"
                );
                let doc = json!({ "pass": false, "non_conical": point, "detail": detail });
                return Ok((doc, EXIT_PRECONDITION));
            }
            other => other?,
        };
        let flow = match (&s.model, no_flow) {
            (Model::Homotopy(h), false) => {
                let gap = bulk_gap_window(h, 64)?;
                let cyl = CylinderOperator::new(h.clone(), wall.delta, wall.resolved_width(), wall.k1)?;
                Some(spectral_flow_adaptive(&cyl, gap.center(), gap.default_half_width(), FLOW_DOUBLINGS)?)
            }
            _ => None,
        };
        let signed = flow.as_ref().map(|f| f.signed_count);
        let pass = report.pass && signed.is_none_or(|n| n == report.total_chirality);
        println!(
            "delta c1 = {}, chirality sum = {}, wall count = {}: {}",
            report.total_delta_c1,
            report.total_chirality,
            signed.map_or("n/a".to_string(), |n| n.to_string()),
            if pass { "pass" } else { "FAIL" }
        );
        let doc = json!({
            "pass": pass,
            "delta_c1": report.total_delta_c1,
            "chirality_sum": report.total_chirality,
            "signed_count": signed,
            "cones": cones,
            "chern": report,
            "flow": flow,
        });
        Ok((doc, if pass { 0 } else { EXIT_NUMERIC }))
    })();
    conclude(c, "verify-theorem3", "chern_report.json", &s.echo, outcome)
}

pub fn perturb(c: &Common, kind: PerturbKind, eps: f64, center: &[f64], radius: f64) -> u8 {
    let kind_name = format!("{kind:?}").to_lowercase();
    let extra = json!({ "kind": kind_name, "eps": eps, "center": center, "radius": radius });
    let s = match setup(c, extra) {
        Ok(s) => s,
        Err(code) => return code,
    };
    if !center.is_empty() && center.len() != 3 {
        eprintln!("error: --center takes three comma-separated coordinates");
        return EXIT_USAGE;
    }
    let outcome = (|| {
        let (result, check) = match kind {
            PerturbKind::Shift => {
                let (r, f) = remove_high_multiplicity(s.family.clone(), s.band, eps, c.seed, &s.scan)?;
                (r, verify_all_conical(&f, s.band, &s.scan)?)
            }
            PerturbKind::Pauli => {
                let (r, f) = sard_shift_2x2(s.family.clone(), s.band, eps, c.seed, &s.scan)?;
                (r, verify_all_conical(&f, s.band, &s.scan)?)
            }
            PerturbKind::Bump => {
                let centre = if center.len() == 3 {
                    [center[0], center[1], center[2]]
                } else {
                    let pts = run_scan(&*s.family, s.band, &s.scan)?;
                    match pts.iter().find(|p| p.verdict != Verdict::Conical) {
                        Some(p) => p.location,
                        None => return Err(Error::Input("no non-conical crossing to perturb; pass --center".into())),
                    }
                };
                let chart = Chart { center: centre, radius };
                let (r, f) = framed_bump_perturbation(s.family.clone(), s.band, chart, eps, c.seed, &s.scan)?;
                (r, verify_all_conical(&f, s.band, &s.scan)?)
            }
        };
        println!(
            "accepted after {} draw(s), norm {:.3e}, all conical: {}",
            result.draws, result.norm, check.all_conical
        );
        let code = if check.all_conical { 0 } else { EXIT_NUMERIC };
        Ok((json!({ "perturbation": result, "verification": check }), code))
    })();
    conclude(c, "perturb", "perturbation.json", &s.echo, outcome)
}

fn wall_echo(w: &WallArgs) -> Value {
    json!({ "delta": w.delta, "width": w.resolved_width(), "k1_count": w.k1 })
}

pub fn adiabatic(c: &Common, wall: &WallArgs, packet: Option<(f64, f64, usize)>) -> u8 {
    let packet_cfg = packet.map(|(sigma, horizon, samples)| WavepacketConfig {
        sigma_scale: sigma,
        horizon,
        samples,
        ..WavepacketConfig::default()
    });
    let s = match setup(c, json!({ "wall": wall_echo(wall), "wavepacket": packet_cfg })) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let Model::Homotopy(h) = &s.model else {
        eprintln!("error: the domain-wall operator needs a homotopy model");
        return EXIT_USAGE;
    };
    let outcome = (|| {
        let gap = bulk_gap_window(h, 64)?;
        let cyl = CylinderOperator::new(h.clone(), wall.delta, wall.resolved_width(), wall.k1)?;
        let flow = spectral_flow_adaptive(&cyl, gap.center(), gap.default_half_width(), FLOW_DOUBLINGS)?;
        println!("wall spectral flow {} ({} branches)", flow.signed_count, flow.branches.len());
        let scatter = cyl.with_k1_count(flow.k1_count)?.spectrum_scatter()?;
        write_csv(
            &c.out,
            "spectrum.csv",
            "xi1,energy",
            scatter.iter().map(|(x, e)| format!("{x},{e}")),
        )
        .map_err(|_| Error::Io("cannot write spectrum.csv".into()))?;
        let mut doc = json!({ "flow": flow });
        if let Some(pc) = &packet_cfg {
            let pts = run_scan(&**h, s.band, &s.scan)?;
            let p = pts
                .iter()
                .find(|p| p.verdict == Verdict::Conical)
                .ok_or_else(|| Error::Input("the homotopy has no conical crossing".into()))?;
            let cone = analyze_cone(&**h, p)?;
            let width = wall.resolved_width().max(packet_width(wall.delta, pc.sigma_scale));
            let pcyl = CylinderOperator::new(h.clone(), wall.delta, width, wall.k1)?;
            let rep = wavepacket_compare(&pcyl, &cone, pc)?;
            println!(
                "wavepacket deviation at horizon {:.4e}, norm drift {:.1e}",
                rep.deviation.last().copied().unwrap_or(0.0),
                rep.norm_drift
            );
            write_csv(
                &c.out,
                "deviation.csv",
                "t,tau,deviation",
                rep.times
                    .iter()
                    .zip(&rep.rescaled_times)
                    .zip(&rep.deviation)
                    .map(|((t, tau), d)| format!("{t},{tau},{d}")),
            )
            .map_err(|_| Error::Io("cannot write deviation.csv".into()))?;
            doc["wavepacket"] = json!(rep);
        }
        Ok((doc, 0))
    })();
    conclude(c, "adiabatic", "spectral_flow.json", &s.echo, outcome)
}

pub fn models_list() -> u8 {
    for (name, desc) in builtin_names() {
        println!("{name:<22} {desc}");
    }
    0
}

pub fn models_show(name: &str) -> u8 {
    match builtin(name) {
        Ok(m) => {
            println!("{}", serde_json::to_string_pretty(&m.to_json()).expect("model JSON"));
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
