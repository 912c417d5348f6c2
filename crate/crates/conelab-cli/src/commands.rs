//! The laboratory commands: integrate curve families, assemble boundary
//! atlases, profile the induced boundary maps, export the chart, run the
//! lattice cross-check, and execute the verification suite.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use conelab::cboundary::{build_atlas, export_atlas, relations_csv, WitnessSearch};
use conelab::confmap::{
    alpha_max, cloud_csv, image_of_params, in_target, map_point, null_deviation, params_of,
    rescaled_angle, target_region_of, MapParams, RegionTag,
};
use conelab::conefield::{ConeField, MetricKind, Point};
use conelab::gridoracle::{crosscheck, GridOracle, LatticeBox};
use conelab::nullflow::{curve_csv, endpoint_of, integrate_null, Endpoint, Family};
use conelab::pushforward::{
    composition_check, default_match_tol, map_profile, strain_target_atlas, MapDiagnostics,
};
use conelab::verification;
use conelab::Error as LibError;

use crate::scenario::Scenario;

/// Command failure with its process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Invalid configuration or contract violation: exit 2.
    Config(String),
    /// A verified claim or invariant failed, or the run could not complete:
    /// exit 1.
    Claim(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Claim(_) => 1,
        }
    }
    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Claim(m) => m,
        }
    }
}

fn lib_err(e: LibError) -> Failure {
    match e {
        LibError::ConesNotNested | LibError::InvalidConfig(_) => Failure::Config(e.to_string()),
        other => Failure::Claim(other.to_string()),
    }
}

type CmdResult = Result<(), Failure>;

/// Output sink embedding the resolved scenario into every file.
pub struct Outputs {
    dir: PathBuf,
    scenario_line: String,
    scenario_value: serde_json::Value,
}

impl Outputs {
    pub fn new(dir: &Path, scenario: &Scenario) -> Result<Self, Failure> {
        fs::create_dir_all(dir)
            .map_err(|e| Failure::Claim(format!("cannot create output dir: {e}")))?;
        let scenario_value = serde_json::to_value(scenario)
            .map_err(|e| Failure::Claim(format!("scenario serialization: {e}")))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            scenario_line: format!("# scenario={}", scenario_value),
            scenario_value,
        })
    }

    fn write_csv(&self, name: &str, body: &str) -> CmdResult {
        let content = format!("{}\n{}", self.scenario_line, body);
        fs::write(self.dir.join(name), content)
            .map_err(|e| Failure::Claim(format!("writing {name}: {e}")))
    }

    fn write_json<V: Serialize>(&self, name: &str, value: &V) -> CmdResult {
        let mut doc = serde_json::to_value(value)
            .map_err(|e| Failure::Claim(format!("serializing {name}: {e}")))?;
        if let serde_json::Value::Object(map) = &mut doc {
            map.insert("scenario".into(), self.scenario_value.clone());
        } else {
            doc = json!({ "scenario": self.scenario_value, "data": doc });
        }
        fs::write(self.dir.join(name), doc.to_string())
            .map_err(|e| Failure::Claim(format!("writing {name}: {e}")))
    }

    fn write_text(&self, name: &str, body: &str) -> CmdResult {
        fs::write(self.dir.join(name), body)
            .map_err(|e| Failure::Claim(format!("writing {name}: {e}")))
    }
}

fn the_metrics() -> [ConeField<f64>; 3] {
    [
        ConeField::minkowski(),
        ConeField::strain(),
        ConeField::narrow(),
    ]
}

pub fn metric_by_name(name: &str) -> Result<ConeField<f64>, Failure> {
    match name {
        "unit" => Ok(ConeField::minkowski()),
        "strain" => Ok(ConeField::strain()),
        "narrow" => Ok(ConeField::narrow()),
        other => Err(Failure::Config(format!(
            "unknown metric '{other}' (expected unit | strain | narrow)"
        ))),
    }
}

/// Integrate the configured rightward family and export one CSV per curve
/// plus an index.
pub fn cmd_curves(scenario: &Scenario, out: &Outputs) -> CmdResult {
    let seeds = scenario.t_seeds();
    if seeds.is_empty() {
        return Err(Failure::Config("no generator seeds configured".into()));
    }
    let cfg = scenario.numeric();
    let g = ConeField::<f64>::strain();
    let mut index = Vec::new();
    for (k, &t) in seeds.iter().enumerate() {
        let curve = integrate_null(&g, Family::Rightward, (-1.0, t), cfg.window(), &cfg)
            .map_err(lib_err)?;
        let endpoint = match endpoint_of(&curve, &cfg).map_err(lib_err)? {
            Endpoint::Attached { t, .. } => t,
            Endpoint::Infinity => f64::NAN,
        };
        let file = format!("curve_{k:03}.csv");
        out.write_csv(&file, &curve_csv(&curve, &cfg))?;
        index.push(json!({ "seed": t, "endpoint": endpoint, "file": file }));
    }
    out.write_json("curves_index.json", &json!({ "count": index.len(), "curves": index }))
}

/// Build and export the three boundary atlases with their relation
/// matrices; verify the strain structure.
pub fn cmd_boundary(scenario: &Scenario, out: &Outputs) -> CmdResult {
    let cfg = scenario.numeric();
    let search = WitnessSearch::new(&cfg);
    let seeds = scenario.t_seeds();
    let j_seeds: Vec<Point<f64>> = scenario
        .infinity_seeds
        .iter()
        .map(|&(t, x)| Point::new(t, x))
        .collect::<Result<_, _>>()
        .map_err(lib_err)?;

    let mut failures: Vec<String> = Vec::new();
    for metric in the_metrics() {
        let atlas = build_atlas(&metric, &seeds, &j_seeds, &cfg).map_err(lib_err)?;
        let export = export_atlas(&metric, &atlas, &search, &cfg).map_err(lib_err)?;
        let tag = metric.kind().tag();
        out.write_json(&format!("atlas_{tag}.json"), &export)?;
        out.write_csv(&format!("relations_{tag}.csv"), &relations_csv(&export))?;

        let strains = atlas.strain_groups();
        match metric.kind() {
            MetricKind::Strain => {
                if strains.len() != 1
                    || strains[0].members.len() != scenario.strain_seeds
                    || strains[0].endpoint.abs() > 4.0 * scenario.x_stop.abs()
                {
                    failures.push(format!(
                        "{tag}: expected one strain of {} members at 0, found {:?}",
                        scenario.strain_seeds,
                        strains
                            .iter()
                            .map(|g| (g.endpoint, g.members.len()))
                            .collect::<Vec<_>>()
                    ));
                }
            }
            _ => {
                if !strains.is_empty() {
                    failures.push(format!("{tag}: unexpected strain group"));
                }
            }
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Claim(failures.join("; ")))
    }
}

fn target_atlas_for(
    metric: &ConeField<f64>,
    endpoints: &[f64],
    strain_count: usize,
    cfg: &conelab::nullflow::NumericConfig<f64>,
) -> Result<conelab::cboundary::BoundaryAtlas<f64>, Failure> {
    match metric.kind() {
        MetricKind::Strain => {
            strain_target_atlas(endpoints, strain_count, metric, cfg).map_err(lib_err)
        }
        _ => {
            let shift = metric.profile().low.sqrt().max(
                if metric.kind() == MetricKind::Minkowski {
                    1.0
                } else {
                    0.0
                },
            );
            let seeds: Vec<f64> = endpoints.iter().map(|&t| t - shift).collect();
            build_atlas(metric, &seeds, &[], cfg).map_err(lib_err)
        }
    }
}

fn markdown_profile(diag: &MapDiagnostics<f64>) -> String {
    let mut md = String::new();
    md.push_str(&format!(
        "## Boundary map {} -> {}\n\n{} sampled boundary points.\n\n",
        diag.source,
        diag.target,
        diag.rows.len()
    ));
    if diag.continuity_breaks.is_empty() {
        md.push_str("No continuity breaks detected.\n\n");
    } else {
        md.push_str("Continuity breaks:\n\n");
        for b in &diag.continuity_breaks {
            md.push_str(&format!(
                "- between source seeds {:.6} and {:.6}, boundary jump {:.4}\n",
                b.between_seeds.0, b.between_seeds.1, b.gap
            ));
        }
        md.push('\n');
    }
    if diag.collision_groups.is_empty() {
        md.push_str("No collisions: the sampled map is injective.\n\n");
    } else {
        for g in &diag.collision_groups {
            md.push_str(&format!(
                "Collision group of {} sources with a common image (seeds {:.6} to {:.6}).\n\n",
                g.len(),
                diag.rows[g[0]].source_seed,
                diag.rows[*g.last().unwrap()].source_seed
            ));
        }
    }
    md.push_str(&format!(
        "Unreached target boundary points: {}.\n\n",
        diag.unreached_targets.len()
    ));
    md
}

/// Profile the boundary maps along the nested chain (or a custom pair),
/// check the headline claims, and export diagnostics.
pub fn cmd_jmap(
    scenario: &Scenario,
    out: &Outputs,
    source: Option<&str>,
    target: Option<&str>,
) -> CmdResult {
    let cfg = scenario.numeric();
    let samples = scenario.map_samples();

    if let (Some(src), Some(tgt)) = (source, target) {
        let m1 = metric_by_name(src)?;
        let m2 = metric_by_name(tgt)?;
        let seeds: Vec<f64> = samples.iter().map(|&t| t - 1.0).collect();
        let target_atlas = target_atlas_for(&m2, &samples, scenario.strain_seeds, &cfg)?;
        let diag = map_profile(&m1, &m2, &seeds, &target_atlas, default_match_tol::<f64>(), &cfg)
            .map_err(lib_err)?;
        out.write_json("jmap_custom.json", &diag)?;
        out.write_text("jmap_custom.md", &markdown_profile(&diag))?;
        return Ok(());
    }

    let cc = ConeField::<f64>::minkowski();
    let g = ConeField::<f64>::strain();
    let ca = ConeField::<f64>::narrow();
    let mut failures: Vec<String> = Vec::new();

    // Unit -> strain: the law run with the break at zero.
    let seeds_cc: Vec<f64> = samples.iter().map(|&t| t - 1.0).collect();
    let target_g = strain_target_atlas(&samples, scenario.strain_seeds, &g, &cfg).map_err(lib_err)?;
    let diag_up = map_profile(&cc, &g, &seeds_cc, &target_g, default_match_tol::<f64>(), &cfg)
        .map_err(lib_err)?;
    if diag_up.continuity_breaks.len() != 1 {
        failures.push(format!(
            "expected exactly one break in the unit->strain map, found {}",
            diag_up.continuity_breaks.len()
        ));
    }
    if diag_up.unreached_targets.is_empty() {
        failures.push("the unit->strain map unexpectedly covers the whole strain".into());
    }

    // Strain -> narrow over the strain: the collapse.
    let n = scenario.strain_seeds;
    let strain_seeds: Vec<f64> = (0..n)
        .map(|k| -1.0 + 0.5 * k as f64 / (n - 1) as f64)
        .collect();
    let target_ca = build_atlas(&ca, &[-0.5], &[], &cfg).map_err(lib_err)?;
    let diag_down = map_profile(&g, &ca, &strain_seeds, &target_ca, default_match_tol::<f64>(), &cfg)
        .map_err(lib_err)?;
    let collapsed = diag_down
        .collision_groups
        .first()
        .is_some_and(|g| g.len() == n);
    if !collapsed {
        failures.push("the strain did not collapse to a single wide-cone image".into());
    }

    // Composition across the chain.
    let comp_endpoints: Vec<f64> = samples.iter().step_by(4).copied().collect();
    let comp_seeds: Vec<f64> = comp_endpoints.iter().map(|&t| t - 1.0).collect();
    let comp = composition_check(&cc, &g, &ca, &comp_seeds, 1e-5, &cfg).map_err(lib_err)?;
    if !comp.pass {
        failures.push("composition across the chain is not an isomorphism".into());
    }

    // Quotient embedding.
    let quotient = verification::quotient_embedding(&scenario.verify_config()).map_err(lib_err)?;
    if !quotient.pass {
        failures.push("quotient embedding check failed".into());
    }

    out.write_json(
        "jmap.json",
        &json!({
            "up": diag_up,
            "down": diag_down,
            "composition": comp,
            "quotient": quotient,
        }),
    )?;
    let mut md = String::from("# Boundary map diagnostics\n\n");
    md.push_str(&markdown_profile(&diag_up));
    md.push_str(&markdown_profile(&diag_down));
    md.push_str(&format!(
        "## Composition\n\nendpoint deviation {:.3e}; relations preserved: {}.\n\n## Quotient\n\n{}\n",
        comp.max_endpoint_dev,
        comp.relations_preserved,
        quotient.line()
    ));
    out.write_text("jmap.md", &md)?;

    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Claim(failures.join("; ")))
    }
}

/// Map the configured point cloud and curve family, verify containment and
/// interface continuity, and export images plus deviation measurements.
pub fn cmd_confmap(scenario: &Scenario, out: &Outputs) -> CmdResult {
    use rand::{Rng, SeedableRng};
    let cfg = scenario.numeric();
    let g = ConeField::<f64>::strain();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(scenario.cloud.seed);

    let mut cloud = Vec::with_capacity(scenario.cloud.n);
    for _ in 0..scenario.cloud.n {
        let t = rng.gen_range(scenario.cloud.t_range.0..scenario.cloud.t_range.1);
        let x = rng.gen_range(scenario.cloud.x_range.0..scenario.cloud.x_range.1);
        cloud.push(Point::new(t, x).map_err(lib_err)?);
    }
    let mut containment_ok = true;
    for &p in &cloud {
        let params = params_of(&g, p, rescaled_angle, &cfg).map_err(lib_err)?;
        let q = image_of_params(&params);
        let sector = match params {
            MapParams::Above { .. } => RegionTag::Above,
            MapParams::Wedge { .. } => RegionTag::Wedge,
            MapParams::Below { .. } => RegionTag::Below,
        };
        if !in_target(q) || target_region_of(q) != sector {
            containment_ok = false;
        }
    }
    out.write_csv(
        "confmap_cloud.csv",
        &cloud_csv(&g, &cloud, rescaled_angle, &cfg).map_err(lib_err)?,
    )?;

    // Interface continuity: parameter-matched gluing plus pointwise
    // agreement on the half-slope generator.
    let a = alpha_max::<f64>();
    let mut glue: f64 = 0.0;
    for k in 1..=12 {
        let r = 0.4 * k as f64;
        let w0 = image_of_params(&MapParams::Wedge { alpha: 0.0, radius: r });
        let b0 = image_of_params(&MapParams::Above { t_end: 0.0, radius: r });
        glue = glue.max((w0.t - b0.t).hypot(w0.x - b0.x));
        let wa = image_of_params(&MapParams::Wedge { alpha: a, radius: r });
        let c0 = image_of_params(&MapParams::Below { t_end: 0.0, radius: r });
        glue = glue.max((wa.t - c0.t).hypot(wa.x - c0.x));
    }
    for xk in [-0.3, -1.1, -2.4, -4.0] {
        let p = Point::new(xk / 2.0, xk).map_err(lib_err)?;
        let q = map_point(&g, p, rescaled_angle, &cfg).map_err(lib_err)?;
        let direct = image_of_params(&MapParams::Above {
            t_end: 0.0,
            radius: p.t().hypot(p.x()),
        });
        glue = glue.max((q.t - direct.t).hypot(q.x - direct.x));
    }

    // Null-image measurements: rightward curves off the wedge are asserted
    // exactly null; wedge and leftward images are reported.
    let mut reports = Vec::new();
    let mut asserted_dev: f64 = 0.0;
    for (seed, asserted) in [
        (0.4, true),
        (0.0, true),
        (-2.2, true),
        (-0.75, false),
    ] {
        let curve = integrate_null(&g, Family::Rightward, (-1.0, seed), cfg.window(), &cfg)
            .map_err(lib_err)?;
        let report = null_deviation(&g, &curve, rescaled_angle, &cfg).map_err(lib_err)?;
        if asserted {
            asserted_dev = asserted_dev.max(report.max_slope_deviation);
        }
        reports.push(json!({
            "family": "rightward", "seed": seed, "asserted": asserted, "report": report,
        }));
    }
    let y = integrate_null(&g, Family::Leftward, (-1.0, 0.0), cfg.window(), &cfg).map_err(lib_err)?;
    let y_report = null_deviation(&g, &y, rescaled_angle, &cfg).map_err(lib_err)?;
    reports.push(json!({
        "family": "leftward", "seed": 0.0, "asserted": false, "report": y_report,
    }));

    out.write_json(
        "confmap_report.json",
        &json!({
            "containment_ok": containment_ok,
            "interface_glue": glue,
            "asserted_slope_deviation": asserted_dev,
            "curves": reports,
        }),
    )?;

    if !containment_ok {
        return Err(Failure::Claim("chart images escaped the target region".into()));
    }
    if glue > 1e-6 {
        return Err(Failure::Claim(format!(
            "interface continuity violated: {glue:.3e}"
        )));
    }
    if asserted_dev > 1e-9 {
        return Err(Failure::Claim(format!(
            "null image slope deviation {asserted_dev:.3e} above 1e-9"
        )));
    }
    Ok(())
}

/// Lattice cross-validation of the chronology for all three cone fields.
pub fn cmd_oracle_check(scenario: &Scenario, out: &Outputs) -> CmdResult {
    let cfg = scenario.numeric();
    let o = &scenario.oracle;
    let bbox = LatticeBox {
        t_min: o.t_min,
        t_max: o.t_max,
        x_min: o.x_min,
        x_max: o.x_max,
    };
    let mut reports = Vec::new();
    let mut violations = 0usize;
    for metric in the_metrics() {
        let oracle = GridOracle::build(&metric, bbox, o.h).map_err(lib_err)?;
        let report = crosscheck(&metric, &oracle, o.samples, o.seed, &cfg).map_err(lib_err)?;
        violations += report.violations.len();
        reports.push(report);
    }
    out.write_json("oracle_check.json", &json!({ "reports": reports }))?;
    if violations == 0 {
        Ok(())
    } else {
        Err(Failure::Claim(format!(
            "{violations} chronology disagreements outside the band"
        )))
    }
}

/// Execute the full verification suite and write the report.
pub fn cmd_verify(scenario: &Scenario, out: &Outputs) -> CmdResult {
    let outcomes = verification::run_all(&scenario.verify_config()).map_err(lib_err)?;
    let mut md = String::from("# Verification report\n\n");
    for o in &outcomes {
        md.push_str(&format!("- {}\n", o.line()));
        println!("{}", o.line());
    }
    md.push_str("\n## Scenario\n\n```json\n");
    md.push_str(&serde_json::to_string_pretty(scenario).unwrap_or_default());
    md.push_str("\n```\n");
    out.write_text("report.md", &md)?;
    out.write_json("report.json", &json!({ "criteria": outcomes }))?;
    if outcomes.iter().all(|o| o.pass) {
        Ok(())
    } else {
        let failed: Vec<&str> = outcomes.iter().filter(|o| !o.pass).map(|o| o.name).collect();
        Err(Failure::Claim(format!("criteria failed: {}", failed.join(", "))))
    }
}
