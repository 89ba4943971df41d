use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use qpos_core::corpus::{run_corpus, CorpusSpec};
use qpos_core::io::{write_eigenvalues_csv, write_fields_csv, ComplexMatrixRepr};
use qpos_core::normalizer::certify_with_witness;
use qpos_core::q_positivity::uniform_margin_bound;
use qpos_core::{
    check_q_positive, check_uniform_q_positive, chern_curvature, dual_not_psef_test,
    equivalence_suite, generalized_eigenvalues, normalize_scalar, scalar_curvature,
    torus_psef_oracle, uniformize_metric, CertificateSummary, LineBundleMetric, MetricField,
    TorusGeometry,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{default_seed, Config, CorpusConfig, PerAxis};
use crate::{Cli, Command, ConfigError};

#[derive(Serialize)]
struct Report<'a> {
    command: &'static str,
    /// Seconds since the Unix epoch; the only field that varies between runs.
    timestamp: u64,
    config: &'a Config,
    result: Value,
}

struct RunContext<'a> {
    config: &'a Config,
    out_dir: PathBuf,
}

impl RunContext<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn write_report(&self, command: Command, result: Value) -> Result<PathBuf> {
        let report = Report {
            command: command.name(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            config: self.config,
            result,
        };
        let path = self.path(&format!("{}.json", command.name()));
        let mut text = serde_json::to_string_pretty(&report)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

fn resolve_config(cli: &Cli) -> Result<Config> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None if cli.corpus.is_some() && cli.command.name() == "equivalence-suite" => {
            Config::corpus_default()
        }
        None => return Err(ConfigError("--config is required for this command".into()).into()),
    };
    if let Some(grid) = cli.grid {
        config.geometry.grid = PerAxis::Uniform(grid);
    }
    if let Some(eps) = cli.tolerance {
        config.tolerances.eps_pos_rel = eps;
    }
    if let Some(size) = cli.corpus {
        let seed = config.corpus.as_ref().map_or_else(default_seed, |c| c.seed);
        config.corpus = Some(CorpusConfig { size, seed });
    }
    if let (Some(seed), Some(corpus)) = (cli.seed, config.corpus.as_mut()) {
        corpus.seed = seed;
    }
    if let Some(dir) = &cli.out_dir {
        config.output.dir = Some(dir.clone());
    }
    config
        .validate()
        .map_err(|e| ConfigError(format!("{e:#}")))?;
    Ok(config)
}

pub fn run(cli: &Cli) -> Result<()> {
    let config = resolve_config(cli)?;
    let out_dir = config
        .output
        .dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("qpos-out"));
    fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let ctx = RunContext {
        config: &config,
        out_dir,
    };
    let geometry = config.geometry.build()?;
    let (result, line) = match cli.command {
        Command::CheckQpos => check_qpos(&ctx, &geometry)?,
        Command::Uniformize => uniformize(&ctx, &geometry)?,
        Command::NormalizeScalar => normalize(&ctx, &geometry)?,
        Command::Certify => certify(&ctx, &geometry)?,
        Command::PsefTest => psef_test(&ctx, &geometry)?,
        Command::EquivalenceSuite => equivalence(&ctx, &geometry, cli.seed)?,
        Command::DumpField => dump_field(&ctx, &geometry)?,
    };
    let path = ctx.write_report(cli.command, result)?;
    println!("[{}] {line}; report {}", cli.command.name(), path.display());
    Ok(())
}

fn inputs(ctx: &RunContext, geometry: &TorusGeometry) -> Result<(LineBundleMetric, MetricField)> {
    Ok((ctx.config.bundle(geometry)?, ctx.config.metric(geometry)?))
}

fn summary(cert: &CertificateSummary) -> Result<Value> {
    Ok(serde_json::to_value(cert)?)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn check_qpos(ctx: &RunContext, geometry: &TorusGeometry) -> Result<(Value, String)> {
    let (bundle, metric) = inputs(ctx, geometry)?;
    let q = ctx.config.q(bundle.dim());
    let ev = generalized_eigenvalues(&chern_curvature(&bundle)?, &metric)?;
    let eps = ctx.config.tolerances.eps_pos(ev.max_abs());
    let pointwise = check_q_positive(&bundle, &metric, q, eps)?;
    let uniform = check_uniform_q_positive(&bundle, &metric, q, eps)?;
    let mut result = json!({
        "q_positive": summary(&pointwise.summary())?,
        "uniform_q_positive": summary(&uniform.summary())?,
    });
    if ctx.config.output.dump_fields {
        let path = ctx.path("eigenvalues.csv");
        write_eigenvalues_csv(&path, &ev, "lambda")?;
        result["eigenvalue_field"] = json!(file_name(&path));
    }
    let line = format!(
        "q={q} q-positive={} (margin {:e}), uniformly={} (margin {:e})",
        pointwise.verdict, pointwise.margin, uniform.verdict, uniform.margin
    );
    Ok((result, line))
}

fn uniformize(ctx: &RunContext, geometry: &TorusGeometry) -> Result<(Value, String)> {
    let (bundle, metric) = inputs(ctx, geometry)?;
    let q = ctx.config.q(bundle.dim());
    let curvature = chern_curvature(&bundle)?;
    let base = generalized_eigenvalues(&curvature, &metric)?;
    let eps = ctx.config.tolerances.eps_pos(base.max_abs());
    let pointwise = check_q_positive(&bundle, &metric, q, eps)?;
    if !pointwise.verdict {
        let result = json!({ "uniformized": false, "q_positive": summary(&pointwise.summary())? });
        return Ok((result, format!("q={q} not q-positive, no metric built")));
    }
    let um = uniformize_metric(&bundle, &metric, q, eps)?;
    let actual = generalized_eigenvalues(&curvature, &um.metric)?;
    let predicted = um.predicted_eigenvalues();
    let n = bundle.dim();
    let (mut map_error, mut slack) = (0.0f64, f64::INFINITY);
    let sums = actual.smallest_sum(q + 1);
    for p in 0..geometry.num_points() {
        let (a, b) = (actual.at(p), predicted.at(p));
        let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            map_error = map_error.max((a[i] - b[i]).abs() / scale);
        }
        let bound = uniform_margin_bound(um.base_eigenvalues.at(p)[n - q - 1], um.lambda0, q);
        slack = slack.min(sums.values()[p] - bound);
    }
    let mut uniform = check_uniform_q_positive(
        &bundle,
        &um.metric,
        q,
        ctx.config.tolerances.eps_pos(actual.max_abs()),
    )?;
    uniform.lambda0 = Some(um.lambda0);
    let mut result = json!({
        "uniformized": true,
        "lambda0": um.lambda0,
        "q_positive": summary(&pointwise.summary())?,
        "uniform_q_positive": summary(&uniform.summary())?,
        "metric_min_eigenvalue": um.metric.min_eigenvalue(),
        "eigenvalue_map_max_relative_error": map_error,
        "min_margin_minus_bound": slack,
    });
    if ctx.config.output.dump_fields {
        let path = ctx.path("uniformized_eigenvalues.csv");
        write_eigenvalues_csv(&path, &actual, "kappa")?;
        result["eigenvalue_field"] = json!(file_name(&path));
    }
    let line = format!(
        "lambda0={:e}, uniformly {}-positive={} (margin {:e})",
        um.lambda0, q, uniform.verdict, uniform.margin
    );
    Ok((result, line))
}

fn normalization_output(
    ctx: &RunContext,
    cert: &qpos_core::PositivityCertificate,
    norm: &qpos_core::normalizer::ScalarNormalization,
) -> Result<Value> {
    let path = ctx.path("normalized_f.csv");
    write_fields_csv(&path, &[("value", &norm.weight_shift)])?;
    let mut result = json!({
        "certificate": summary(&cert.summary())?,
        "weight_shift_field": file_name(&path),
    });
    if ctx.config.output.dump_fields {
        let path = ctx.path("normalized_scalar_curvature.csv");
        write_fields_csv(&path, &[("scalar_curvature", &norm.scalar_curvature)])?;
        result["scalar_curvature_field"] = json!(file_name(&path));
    }
    Ok(result)
}

fn normalize(ctx: &RunContext, geometry: &TorusGeometry) -> Result<(Value, String)> {
    let (bundle, metric) = inputs(ctx, geometry)?;
    let norm = normalize_scalar(&bundle, &metric, &ctx.config.tolerances)?;
    let cert = norm.certificate.clone();
    let result = normalization_output(ctx, &cert, &norm)?;
    Ok((
        result,
        format!("c={:e}, verdict={}", norm.target, cert.verdict),
    ))
}

fn certify(ctx: &RunContext, geometry: &TorusGeometry) -> Result<(Value, String)> {
    let bundle = ctx.config.bundle(geometry)?;
    let (cert, norm) = certify_with_witness(&bundle, &ctx.config.tolerances)?;
    let result = normalization_output(ctx, &cert, &norm)?;
    Ok((
        result,
        format!("(n-1)-positive={} (c={:e})", cert.verdict, norm.target),
    ))
}

fn psef_test(ctx: &RunContext, geometry: &TorusGeometry) -> Result<(Value, String)> {
    let bundle = ctx.config.bundle(geometry)?;
    let dual = dual_not_psef_test(&bundle, &ctx.config.tolerances)?;
    let result = json!({
        "pseudo_effective": torus_psef_oracle(&bundle),
        "dual_pseudo_effective": torus_psef_oracle(&bundle.dual()),
        "dual_not_pseudo_effective": {
            "verdict": dual.dual_not_psef,
            "degree": dual.degree,
            "normalized_degree": dual.normalized_degree,
            "threshold": dual.threshold,
            "witness_metric": dual.witness.as_ref().map(ComplexMatrixRepr::from),
        },
    });
    Ok((
        result,
        format!("dual not pseudo-effective={}", dual.dual_not_psef),
    ))
}

fn equivalence(
    ctx: &RunContext,
    geometry: &TorusGeometry,
    seed: Option<u64>,
) -> Result<(Value, String)> {
    if let Some(corpus) = &ctx.config.corpus {
        let spec = CorpusSpec {
            size: corpus.size,
            seed: corpus.seed,
            geometry: geometry.clone(),
            tolerances: ctx.config.tolerances,
        };
        let report = run_corpus(&spec)?;
        let path = ctx.path("equivalence-corpus.csv");
        fs::write(&path, report.to_csv()?)
            .with_context(|| format!("writing {}", path.display()))?;
        let s = report.summary();
        let line = format!("{} instances, {} PASS, {} FAIL", s.size, s.passed, s.failed);
        let failures: Vec<usize> = report.failures().map(|r| r.index).collect();
        let result =
            json!({ "summary": s, "failed_instances": failures, "rows": file_name(&path) });
        return Ok((result, line));
    }
    let bundle = ctx.config.bundle(geometry)?;
    let mut report = equivalence_suite(&bundle, &ctx.config.tolerances)?;
    report.seed = seed;
    let line = format!("{} (verdicts {:?})", report.status(), report.verdicts());
    Ok((serde_json::to_value(&report)?, line))
}

fn dump_field(ctx: &RunContext, geometry: &TorusGeometry) -> Result<(Value, String)> {
    let (bundle, metric) = inputs(ctx, geometry)?;
    let scalar = scalar_curvature(&bundle, &metric)?;
    let ev = generalized_eigenvalues(&chern_curvature(&bundle)?, &metric)?;
    let comps: Vec<(String, qpos_core::ScalarField)> = (0..ev.dim())
        .map(|i| (format!("lambda_{}", i + 1), ev.component(i)))
        .collect();
    let mut columns = vec![("phi", bundle.phi()), ("scalar_curvature", &scalar)];
    columns.extend(comps.iter().map(|(n, f)| (n.as_str(), f)));
    let path = ctx.path("fields.csv");
    write_fields_csv(&path, &columns)?;
    let phi_path = ctx.path("phi.csv");
    write_fields_csv(&phi_path, &[("value", bundle.phi())])?;
    let result = json!({
        "fields": file_name(&path),
        "weight": file_name(&phi_path),
        "columns": columns.iter().map(|(n, _)| *n).collect::<Vec<_>>(),
        "points": geometry.num_points(),
    });
    Ok((result, format!("{} points written", geometry.num_points())))
}
